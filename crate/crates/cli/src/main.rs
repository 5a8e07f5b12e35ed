use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qid_core::brst::{self, BrstField, GaugeFixing};
use qid_core::heatkernel::{self, FluctuationOperator};
use qid_core::innerspace;
use qid_core::looptab::{self, LoopIntegral};
use qid_core::powercount::{self, FeynmanGraph};
use qid_core::renorm::{self, MatterContent};
use qid_core::rules::{self, Leg};
use qid_core::symcore::coeff::{parse_rational, rational_to_string};
use qid_core::symcore::{GradedExpr, Symbol, TensorExpr};
use qid_core::verify;

/// Directory that receives a copy of every report as `<command>.json`.
const REPORT_DIR_VAR: &str = "QID_REPORT_DIR";

#[derive(Parser, Debug)]
#[command(name = "qid", version, about = "Symbolic one-loop checks for the volume-preserving gauge theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vertex factors and propagators.
    Rules(RulesArgs),
    /// Superficial degree of divergence of a graph read from JSON.
    PowerCount {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Divergent part of a one-loop tensor integral.
    DivIntegral {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        denoms: usize,
        /// Replace Ω₄ by 1/(8π²).
        #[arg(long)]
        numeric: bool,
        #[arg(long, value_enum, default_value_t = ExprFormat::Json)]
        format: ExprFormat,
    },
    /// Inner-ball momentum moment.
    InnerMoment {
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        dim: Option<u32>,
        #[arg(long, default_value = "1")]
        cutoff: String,
        /// Evaluate the all-first-axis component and compare with quadrature.
        #[arg(long)]
        numeric: bool,
        #[arg(long, value_enum, default_value_t = ExprFormat::Json)]
        format: ExprFormat,
    },
    /// Divergent part of Tr Ln for the generic or covariant operator.
    HeatKernel {
        #[arg(long, conflicts_with = "covariant", required_unless_present = "covariant")]
        generic: bool,
        #[arg(long)]
        covariant: bool,
        #[arg(long, value_enum, default_value_t = ExprFormat::Json)]
        format: ExprFormat,
    },
    /// One-loop beta function with matter content.
    Beta(BetaArgs),
    /// BRST nilpotency on a generator or exactness of the gauge-fixing terms.
    BrstCheck {
        #[arg(long, conflicts_with = "exactness", required_unless_present = "exactness")]
        field: Option<String>,
        #[arg(long)]
        exactness: bool,
        #[arg(long, value_enum, default_value_t = GaugeChoice::Lorentz)]
        gauge: GaugeChoice,
        #[arg(long, value_enum, default_value_t = TextFormat::Json)]
        format: TextFormat,
    },
    /// Runs acceptance suites; all of them without an argument.
    Verify {
        /// Suite name or number 1-10.
        suite: Option<String>,
        #[arg(long, value_enum, default_value_t = TextFormat::Json)]
        format: TextFormat,
    },
}

#[derive(Args, Debug)]
struct RulesArgs {
    #[arg(long, value_enum, conflicts_with = "propagator", required_unless_present = "propagator")]
    vertex: Option<VertexChoice>,
    #[arg(long, value_enum)]
    propagator: Option<PropagatorChoice>,
    /// Rational gauge parameter; symbolic ξ when absent.
    #[arg(long)]
    xi: Option<String>,
    #[arg(long, value_enum, default_value_t = ExprFormat::Json)]
    format: ExprFormat,
}

#[derive(Args, Debug)]
struct BetaArgs {
    #[arg(long)]
    dimension: i64,
    #[arg(long, value_enum, default_value_t = MatterChoice::None)]
    matter: MatterChoice,
    #[arg(long)]
    no_higgs: bool,
    #[arg(long, default_value_t = 0)]
    n_gauge: i64,
    #[arg(long, default_value_t = 0)]
    n_dirac: i64,
    #[arg(long, default_value_t = 0)]
    n_chiral: i64,
    #[arg(long, default_value_t = 0)]
    n_scalar_doublet: i64,
    #[arg(long, default_value_t = 0)]
    n_complex_scalar: i64,
    /// Lowest dimension in table mode.
    #[arg(long, default_value_t = 1)]
    d_min: i64,
    /// Highest dimension in table mode; defaults to `--dimension`.
    #[arg(long)]
    d_max: Option<i64>,
    #[arg(long, value_enum, default_value_t = BetaFormat::Json)]
    format: BetaFormat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VertexChoice {
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    Ghost,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PropagatorChoice {
    Gauge,
    Ghost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExprFormat {
    Json,
    Latex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BetaFormat {
    Json,
    Latex,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MatterChoice {
    None,
    Sm,
    Custom,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GaugeChoice {
    Lorentz,
    Axial,
}

#[derive(Clone, Debug, Serialize)]
struct Verdict {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Clone, Debug, Serialize)]
struct RunReport {
    command: String,
    inputs: BTreeMap<String, Value>,
    outputs: BTreeMap<String, Value>,
    verdicts: Vec<Verdict>,
    exit_status: u8,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            verdicts: vec![],
            exit_status: 0,
        }
    }

    fn input(mut self, k: &str, v: impl Serialize) -> Self {
        self.inputs.insert(k.into(), json!(v));
        self
    }

    fn output(&mut self, k: &str, v: impl Serialize) {
        self.outputs.insert(k.into(), json!(v));
    }

    fn verdict(&mut self, name: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict {
            name: name.into(),
            passed,
            detail,
        });
        if !passed {
            self.exit_status = 1;
        }
    }
}

/// What goes to stdout besides the report.
enum Rendered {
    Report,
    Text(String),
}

fn tensor_json(e: &TensorExpr) -> Value {
    serde_json::from_str(&e.to_json()).expect("expressions serialize")
}

fn graded_json(e: &GradedExpr) -> Value {
    serde_json::from_str(&e.to_json()).expect("expressions serialize")
}

fn rational(s: &str) -> Result<qid_core::symcore::Rational> {
    parse_rational(s).ok_or_else(|| anyhow!("`{s}` is not a rational number"))
}

fn rules_cmd(a: &RulesArgs) -> Result<(RunReport, Rendered)> {
    let mut r = RunReport::new("rules").input("format", format!("{:?}", a.format).to_lowercase());
    let expr = if let Some(v) = a.vertex {
        r = r.input("vertex", format!("{v:?}").to_lowercase());
        let res = match v {
            VertexChoice::Three => rules::vertex3(&rules::default_gauge_legs())?,
            VertexChoice::Four => rules::vertex4(&rules::default_gauge_legs())?,
            VertexChoice::Ghost => rules::vertex_ghost(&rules::default_ghost_legs())?,
        };
        let legs: Vec<Leg> = match v {
            VertexChoice::Three => rules::default_gauge_legs::<3>().to_vec(),
            VertexChoice::Four => rules::default_gauge_legs::<4>().to_vec(),
            VertexChoice::Ghost => rules::default_ghost_legs().to_vec(),
        };
        r.output("legs", &legs);
        r.output("constraints", &res.constraints);
        res.expr
    } else {
        let p = a.propagator.expect("clap requires one of the two");
        r = r.input("propagator", format!("{p:?}").to_lowercase());
        match p {
            PropagatorChoice::Gauge => {
                let xi = a.xi.as_deref().map(rational).transpose()?;
                r = r.input("xi", a.xi.clone());
                rules::gauge_propagator(&rules::xi_value(xi), 1, ("mu", "M"), ("nu", "N"))?
            }
            PropagatorChoice::Ghost => rules::ghost_propagator(1, "R", "S")?,
        }
    };
    r.output("expr", tensor_json(&expr));
    r.output("latex", expr.to_latex());
    let out = match a.format {
        ExprFormat::Json => Rendered::Report,
        ExprFormat::Latex => Rendered::Text(expr.to_latex()),
    };
    Ok((r, out))
}

fn power_count_cmd(path: &PathBuf) -> Result<(RunReport, Rendered)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = FeynmanGraph::from_json(&text)?;
    let mut r = RunReport::new("power-count").input("graph", serde_json::to_value(&g)?);
    let omega = powercount::superficial_degree(&g)?;
    r.output("external_lines", g.external_count());
    r.output("superficial_degree", omega);
    r.output("divergent", omega >= 0);
    if g.is_connected() {
        let brute = powercount::brute_degree(&g)?;
        r.output("loops", g.loop_count());
        r.output("brute_degree", brute);
        r.verdict("brute degree equals 4 - B", brute == omega, format!("{brute} vs {omega}"));
    }
    Ok((r, Rendered::Report))
}

fn div_integral_cmd(rank: usize, denoms: usize, numeric: bool, format: ExprFormat) -> Result<(RunReport, Rendered)> {
    let li = LoopIntegral::new(rank, denoms)?;
    let dp = looptab::div_part(&li)?;
    let mut r = RunReport::new("div-integral")
        .input("rank", rank)
        .input("denoms", denoms)
        .input("numeric", numeric);
    r.output("tabulated", looptab::TABULATED.contains(&(rank, denoms)));
    r.output("pole_coeff", tensor_json(&dp.pole_coeff));
    let shown = if numeric {
        let full = dp.full().subst_symbol(Symbol::Omega4, &innerspace::omega4_value())?;
        r.output("divergent_part", tensor_json(&full));
        full
    } else {
        dp.pole_coeff.clone()
    };
    r.output("latex", shown.to_latex());
    let out = match format {
        ExprFormat::Json => Rendered::Report,
        ExprFormat::Latex => Rendered::Text(shown.to_latex()),
    };
    Ok((r, out))
}

fn inner_moment_cmd(
    degree: u32,
    dim: Option<u32>,
    cutoff: &str,
    numeric: bool,
    format: ExprFormat,
) -> Result<(RunReport, Rendered)> {
    let m = innerspace::moment(degree)?;
    let mut r = RunReport::new("inner-moment")
        .input("degree", degree)
        .input("dim", dim)
        .input("cutoff", cutoff)
        .input("numeric", numeric);
    r.output("moment", tensor_json(&m.result));
    r.output("latex", m.result.to_latex());
    if numeric {
        let d = dim.ok_or_else(|| anyhow!("--numeric needs --dim"))?;
        let c = innerspace::quadrature_check(degree, d, &rational(cutoff)?, &vec![0; degree as usize])?;
        r.output("numeric", &c);
        r.verdict(
            "symbolic moment equals quadrature",
            c.rel_error <= verify::MOMENT_TOLERANCE,
            format!("relative error {:.2e}", c.rel_error),
        );
    }
    let out = match format {
        ExprFormat::Json => Rendered::Report,
        ExprFormat::Latex => Rendered::Text(m.result.to_latex()),
    };
    Ok((r, out))
}

fn heat_kernel_cmd(covariant: bool, format: ExprFormat) -> Result<(RunReport, Rendered)> {
    let mut r = RunReport::new("heat-kernel").input("operator", if covariant { "covariant" } else { "generic" });
    let expr = if covariant {
        let c = heatkernel::covariant_reduce(&FluctuationOperator::generic_covariant(), Default::default())?;
        r.output("c_f", c.c_f.to_string());
        r.output("c_e", c.c_e.to_string());
        r.verdict(
            "covariant form closes",
            c.residue.is_zero(),
            format!("{} residue terms", c.residue.len()),
        );
        c.expr
    } else {
        let c = heatkernel::master_bracket_check()?;
        let published = heatkernel::master_bracket_published();
        let mut sum = GradedExpr::zero();
        let mut table = Vec::new();
        for ((label, coeff), (_, _, e)) in c.labels.iter().zip(&c.derived).zip(&published) {
            sum = sum + e.scale(coeff);
            table.push(json!({"term": label, "coefficient": coeff.to_string()}));
        }
        r.output("terms", table);
        r.verdict("master bracket matches the published coefficients", c.passes(), String::new());
        heatkernel::pole_prefactor(1).times(&sum)
    };
    r.output("expr", graded_json(&expr));
    r.output("latex", expr.to_latex());
    let out = match format {
        ExprFormat::Json => Rendered::Report,
        ExprFormat::Latex => Rendered::Text(expr.to_latex()),
    };
    Ok((r, out))
}

fn beta_cmd(a: &BetaArgs) -> Result<(RunReport, Rendered)> {
    let mut content = match a.matter {
        MatterChoice::None => MatterContent::none(),
        MatterChoice::Sm => MatterContent::standard_model(),
        MatterChoice::Custom => MatterContent {
            n_gauge: a.n_gauge,
            n_dirac: a.n_dirac,
            n_chiral: a.n_chiral,
            n_scalar_doublet: a.n_scalar_doublet,
            n_complex_scalar: a.n_complex_scalar,
        },
    };
    if a.no_higgs {
        content = content.without_higgs();
    }
    let b = renorm::beta(&content)?;
    let at = b.coefficient_at(a.dimension);
    let mut r = RunReport::new("beta")
        .input("dimension", a.dimension)
        .input("matter", &content);
    r.output("coefficient", b.coefficient.to_string());
    r.output("coefficient_at_dimension", rational_to_string(&at));
    r.output("beta", tensor_json(&b.beta));
    r.output("beta_latex", b.beta.to_latex());
    r.output("g_renormalized", tensor_json(&b.g_renormalized));
    r.output("asymptotically_free", b.asymptotically_free(a.dimension));
    let out = match a.format {
        BetaFormat::Json => Rendered::Report,
        BetaFormat::Latex => Rendered::Text(b.beta.to_latex()),
        BetaFormat::Table => {
            let hi = a.d_max.unwrap_or(a.dimension);
            if hi < a.d_min {
                bail!("empty dimension range {}..={hi}", a.d_min);
            }
            let mut s = format!("beta(g) = {}\n", b.beta.to_latex());
            s += &format!("{:>4}  {:>12}  {}\n", "D", "coefficient", "verdict");
            for d in a.d_min..=hi {
                let c = b.coefficient_at(d);
                let verdict = if b.asymptotically_free(d) {
                    "asymptotically free"
                } else {
                    "not asymptotically free"
                };
                s += &format!("{d:>4}  {:>12}  {verdict}\n", rational_to_string(&c));
            }
            Rendered::Text(s)
        }
    };
    Ok((r, out))
}

fn proof_text(p: &brst::ProofReport) -> String {
    let mut s = format!("{}\n", p.subject);
    for (name, e) in &p.steps {
        s += &format!("  {name}: {e}\n");
    }
    s += &format!("  residue: {}\n", p.residue);
    s += if p.passes() { "verdict: PASS\n" } else { "verdict: FAIL\n" };
    s
}

fn brst_cmd(field: Option<&str>, exactness: bool, gauge: GaugeChoice, format: TextFormat) -> Result<(RunReport, Rendered)> {
    let mut r = RunReport::new("brst-check");
    let p = if exactness {
        r = r.input("exactness", true).input("gauge", format!("{gauge:?}").to_lowercase());
        let gf = match gauge {
            GaugeChoice::Lorentz => GaugeFixing::lorentz(),
            GaugeChoice::Axial => GaugeFixing::axial(),
        };
        brst::exactness_check(&gf, true)?
    } else {
        let name = field.expect("clap requires one of the two");
        r = r.input("field", name);
        let f = BrstField::parse(name)
            .ok_or_else(|| anyhow!("unknown field `{name}`; expected A, omega, omega-star, h or psi"))?;
        brst::verify_nilpotent(f)?
    };
    let steps: Vec<Value> = p
        .steps
        .iter()
        .map(|(n, e)| json!({"step": n, "expr": graded_json(e), "text": e.to_string()}))
        .collect();
    r.output("steps", steps);
    r.output("residue", graded_json(&p.residue));
    r.verdict(&p.subject, p.passes(), format!("{} residue terms", p.residue.len()));
    let out = match format {
        TextFormat::Json => Rendered::Report,
        TextFormat::Text => Rendered::Text(proof_text(&p)),
    };
    Ok((r, out))
}

const SUITES: [(&str, &[u32]); 10] = [
    ("loop-table", &[1]),
    ("heat-kernel", &[2, 3]),
    ("coefficient", &[4]),
    ("matter", &[5]),
    ("beta", &[6]),
    ("brst", &[7]),
    ("power-count", &[8]),
    ("inner-moment", &[9]),
    ("rules", &[10]),
    ("all", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]),
];

fn verify_cmd(suite: Option<&str>, format: TextFormat) -> Result<(RunReport, Rendered)> {
    let name = suite.unwrap_or("all");
    let ids: Vec<u32> = match name.parse::<u32>() {
        Ok(n) if (1..=10).contains(&n) => vec![n],
        _ => SUITES
            .iter()
            .find(|(s, _)| *s == name)
            .map(|(_, ids)| ids.to_vec())
            .ok_or_else(|| anyhow!("unknown suite `{name}`"))?,
    };
    let mut r = RunReport::new("verify").input("suite", name);
    let mut lines = String::new();
    for c in ids.iter().filter_map(|i| verify::run(*i)) {
        lines += &c.line();
        lines.push('\n');
        r.verdict(&format!("{} {}", c.id, c.name), c.passed, c.detail);
    }
    let out = match format {
        TextFormat::Json => Rendered::Report,
        TextFormat::Text => Rendered::Text(lines),
    };
    Ok((r, out))
}

fn dispatch(cli: &Cli) -> Result<(RunReport, Rendered)> {
    match &cli.command {
        Command::Rules(a) => rules_cmd(a),
        Command::PowerCount { graph } => power_count_cmd(graph),
        Command::DivIntegral {
            rank,
            denoms,
            numeric,
            format,
        } => div_integral_cmd(*rank, *denoms, *numeric, *format),
        Command::InnerMoment {
            degree,
            dim,
            cutoff,
            numeric,
            format,
        } => inner_moment_cmd(*degree, *dim, cutoff, *numeric, *format),
        Command::HeatKernel { covariant, format, .. } => heat_kernel_cmd(*covariant, *format),
        Command::Beta(a) => beta_cmd(a),
        Command::BrstCheck {
            field,
            exactness,
            gauge,
            format,
        } => brst_cmd(field.as_deref(), *exactness, *gauge, *format),
        Command::Verify { suite, format } => verify_cmd(suite.as_deref(), *format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, rendered) = match dispatch(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    if let Some(dir) = std::env::var_os(REPORT_DIR_VAR) {
        let path = PathBuf::from(dir).join(format!("{}.json", report.command));
        if let Err(e) = std::fs::write(&path, format!("{text}\n")) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let body = match rendered {
        Rendered::Report => text,
        Rendered::Text(s) => s,
    };
    // a closed pipe is not an error worth reporting
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(body.as_bytes()).and_then(|_| {
        if body.ends_with('\n') {
            Ok(())
        } else {
            out.write_all(b"\n")
        }
    });
    ExitCode::from(report.exit_status)
}
