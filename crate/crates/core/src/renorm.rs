//! One-loop divergent effective action, coupling renormalization and beta
//! functions with minimally coupled matter.
//!
//! Every sector is reduced through the covariant heat-kernel coefficients
//! `c_F`, `c_E` of [`crate::heatkernel`]:
//!
//! `(Tr Ln 𝒟)^div = −iΩ₄/ε · N · (c_F·Tr₁ + c_E·Tr(ℰ²)/F·F) · Tr_X(ℱ·ℱ)`
//!
//! where `Tr₁` is the trace of the identity on the Lorentz or spinor
//! factor, `N` the internal multiplicity and `Tr_X(ℱ·ℱ) = r·u` the inner
//! trace with `r = D` on inner vectors and `r = 1` on inner scalars. The
//! sector enters the effective action as `Γ = κ·i·Tr Ln 𝒟`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heatkernel::{covariant_simplify, op_atom, FluctuationOperator, SLOT};
use crate::innerspace::{omega4_value, trace_in_units, InnerOperator, InnerRep};
use crate::symcore::{
    Coeff, Exp, GradedExpr, IndexLabel, NumericEnv, Poly, Rational, Species, Symbol, TensorAtom, TensorExpr,
};

/// Spinor trace of the identity for a Dirac field.
pub const DIRAC_DIM: i64 = 4;

/// `c_F`, `c_E` of `−iΩ₄/ε Tr{c_F ℱ·ℱ + c_E ℰ²}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatKernelCoeffs {
    pub c_f: Coeff,
    pub c_e: Coeff,
}

/// Derives the covariant coefficients once per process.
pub fn heat_kernel_coeffs() -> Result<HeatKernelCoeffs> {
    static CACHE: OnceLock<std::result::Result<HeatKernelCoeffs, Error>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let r = covariant_simplify(&FluctuationOperator::generic_covariant())?;
            Ok(HeatKernelCoeffs { c_f: r.c_f, c_e: r.c_e })
        })
        .clone()
}

/// The gauge and ghost fluctuation operators of the pure theory together
/// with the inner operator sitting in their connection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QidOperators {
    /// `𝒟_A = −𝒟²η + ℰ`, `ℰ^μ_ν = −2ℱ^μ_ν`.
    pub gauge: FluctuationOperator,
    /// `𝒟_ω = −𝒟²`.
    pub ghost: FluctuationOperator,
    /// `(𝒜_μ)^M_N = A_μ^K ∇_K δ^M_N − ∇_N A_μ^M`.
    pub connection: InnerOperator,
}

pub fn qid_fluctuation_operators() -> QidOperators {
    let a = GradedExpr::atom(op_atom(Species::OpA, vec![IndexLabel::ld(SLOT)]));
    let f = GradedExpr::atom(op_atom(Species::OpF, vec![IndexLabel::lu("mu"), IndexLabel::ld("nu")]));
    QidOperators {
        gauge: FluctuationOperator::from_covariant(a.clone(), f.scale(&Coeff::int(-2))),
        ghost: FluctuationOperator::from_covariant(a, GradedExpr::zero()),
        connection: InnerOperator::with_lorentz("A", vec![IndexLabel::ld("mu")]),
    }
}

fn field_f(a: IndexLabel, b: IndexLabel) -> TensorExpr {
    TensorExpr::atom(TensorAtom::Field {
        name: "F".into(),
        lorentz: vec![a, b],
        inner: vec![],
        derivs: vec![],
    })
}

/// `F_{μν} F^{μν}` with a Lorentz-only antisymmetric `F`.
pub fn ff_invariant() -> TensorExpr {
    field_f(IndexLabel::ld("a"), IndexLabel::ld("b")).times(&field_f(IndexLabel::lu("a"), IndexLabel::lu("b")))
}

/// `Tr(ℰ²)` for `ℰ^μ_ν = λ F^μ_ν` acting on Lorentz vectors.
pub fn vector_e_square(lambda: &Coeff) -> TensorExpr {
    field_f(IndexLabel::lu("a"), IndexLabel::ld("b"))
        .times(&field_f(IndexLabel::lu("b"), IndexLabel::ld("a")))
        .scale(&(lambda * lambda))
}

/// `Tr(ℰ²)` for `ℰ = −½ F^{μν} γ_μ γ_ν` on spinors of trace dimension
/// `spinor_dim`, using `tr(γ_μγ_νγ_ργ_σ) = n(η_{μν}η_{ρσ} − η_{μρ}η_{νσ} + η_{μσ}η_{νρ})`.
pub fn spinor_e_square(spinor_dim: i64) -> TensorExpr {
    let e = |x: &str, y: &str| TensorExpr::eta(IndexLabel::ld(x), IndexLabel::ld(y));
    let gamma4 = e("m", "n").times(&e("r", "s")) - e("m", "r").times(&e("n", "s")) + e("m", "s").times(&e("n", "r"));
    field_f(IndexLabel::lu("m"), IndexLabel::lu("n"))
        .times(&field_f(IndexLabel::lu("r"), IndexLabel::lu("s")))
        .times(&gamma4)
        .scale(&Coeff::frac(spinor_dim, 4))
}

fn random_antisymmetric(rng: &mut impl Rng) -> NumericEnv {
    let mut env = NumericEnv {
        inner_dim: 1,
        ..NumericEnv::default()
    };
    for i in 0..4usize {
        env.fields.insert(("F".into(), vec![i, i]), Rational::zero());
        for j in (i + 1)..4 {
            let v = Rational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=5).into());
            env.fields.insert(("F".into(), vec![i, j]), v.clone());
            env.fields.insert(("F".into(), vec![j, i]), -v);
        }
    }
    env
}

/// The constant `r` with `e = r·F_{μν}F^{μν}` for antisymmetric `F`,
/// found by exact evaluation at random configurations. `None` when `e` is
/// not a multiple of the invariant.
pub fn ratio_to_ff(e: &TensorExpr, seed: u64) -> Result<Option<Rational>> {
    let e = e.canonicalize()?;
    let ff = ff_invariant().canonicalize()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let none = BTreeMap::new();
    let mut ratio: Option<Rational> = None;
    for _ in 0..4 {
        let env = random_antisymmetric(&mut rng);
        let (x, y) = (e.eval(&env, &none)?, ff.eval(&env, &none)?);
        if y.is_zero() {
            continue;
        }
        let r = x / y;
        match &ratio {
            Some(prev) if *prev != r => return Ok(None),
            _ => ratio = Some(r),
        }
    }
    Ok(ratio)
}

/// One Gaussian integral of the one-loop amplitude.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sector {
    pub name: String,
    /// `Γ = κ·i·Tr Ln 𝒟`.
    pub kappa: Coeff,
    /// Internal components (doublet, …).
    pub multiplicity: Coeff,
    /// Trace of the identity on the Lorentz or spinor factor.
    pub identity_trace: Coeff,
    /// `Tr(ℰ²) / F_{μν}F^{μν}`.
    pub e_square: Coeff,
    pub rep: InnerRep,
}

/// Coefficient of `iΩ₄/ε · u(F, F)` in `(Tr Ln 𝒟)^div`, where
/// `u(F, F) = −Ω_D/(D(D+2)) Λ^{D+2} F_{μν}^K F^{μν}_K`.
pub fn tr_ln_div(s: &Sector) -> Result<Coeff> {
    let hk = heat_kernel_coeffs()?;
    let lorentz = &(&hk.c_f * &s.identity_trace) + &(&hk.c_e * &s.e_square);
    let (fa, fb) = match s.rep {
        InnerRep::Vector => (
            InnerOperator::with_lorentz("F", vec![IndexLabel::ld("mu"), IndexLabel::ld("nu")]),
            InnerOperator::with_lorentz("F", vec![IndexLabel::lu("mu"), IndexLabel::lu("nu")]),
        ),
        InnerRep::Scalar => (
            InnerOperator::scalar("F", vec![IndexLabel::ld("mu"), IndexLabel::ld("nu")]),
            InnerOperator::scalar("F", vec![IndexLabel::lu("mu"), IndexLabel::lu("nu")]),
        ),
    };
    let inner = trace_in_units(&fa, &fb)?
        .ok_or_else(|| Error::Unsupported("inner trace is not a multiple of the unit".into()))?;
    Ok(-(&(&lorentz * &s.multiplicity) * &inner))
}

/// Coefficient of `Ω₄/ε · Ω_D/(D(D+2)) · Λ²∫Λ^D F·F` in the effective
/// action.
pub fn action_div(s: &Sector) -> Result<Coeff> {
    Ok(&s.kappa * &tr_ln_div(s)?)
}

fn coeff(r: Rational) -> Coeff {
    Coeff::from_rational(r)
}

fn lorentz_vector_sector(name: &str, kappa: Coeff, e_scale: i64, rep: InnerRep) -> Result<Sector> {
    let e_square = ratio_to_ff(&vector_e_square(&Coeff::int(e_scale)), 1)?
        .ok_or_else(|| Error::Unsupported("ℰ² is not a multiple of F·F".into()))?;
    let identity = TensorExpr::eta(IndexLabel::lu("a"), IndexLabel::ld("a"))
        .canonicalize()?
        .as_coeff()
        .ok_or_else(|| Error::Unsupported("Lorentz trace".into()))?;
    Ok(Sector {
        name: name.into(),
        kappa,
        multiplicity: Coeff::one(),
        identity_trace: identity,
        e_square: coeff(e_square),
        rep,
    })
}

fn scalar_sector(name: &str, kappa: Coeff, multiplicity: i64, rep: InnerRep) -> Sector {
    Sector {
        name: name.into(),
        kappa,
        multiplicity: Coeff::int(multiplicity),
        identity_trace: Coeff::one(),
        e_square: Coeff::zero(),
        rep,
    }
}

fn spinor_sector(name: &str, spinor_dim: i64) -> Result<Sector> {
    let e_square = ratio_to_ff(&spinor_e_square(spinor_dim), 2)?
        .ok_or_else(|| Error::Unsupported("ℰ² is not a multiple of F·F".into()))?;
    Ok(Sector {
        name: name.into(),
        kappa: Coeff::frac(-1, 2),
        multiplicity: Coeff::one(),
        identity_trace: Coeff::int(spinor_dim),
        e_square: coeff(e_square),
        rep: InnerRep::Scalar,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeterminantKind {
    Gauge,
    Ghost,
}

/// The two sectors of the pure theory. The gauge field carries
/// `ℰ = −2ℱ` and enters with `i/2`, the ghost with `−i`.
pub fn qid_sector(kind: DeterminantKind) -> Result<Sector> {
    match kind {
        DeterminantKind::Gauge => lorentz_vector_sector("qid_gauge", Coeff::frac(1, 2), -2, InnerRep::Vector),
        DeterminantKind::Ghost => Ok(scalar_sector("qid_ghost", Coeff::int(-1), 1, InnerRep::Vector)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminantDiv {
    pub kind: DeterminantKind,
    /// Multiple of `iΩ₄/ε ∫ Tr F·F`.
    pub coefficient: Coeff,
    /// `iΩ₄/ε · coefficient · u(F, F)`.
    pub expr: TensorExpr,
}

/// `u(F, F) = −Ω_D/(D(D+2)) Λ^{D+2} F_{μν}^K F^{μν}_K`.
pub fn trace_unit_ff() -> Result<TensorExpr> {
    crate::innerspace::trace_unit(
        &InnerOperator::with_lorentz("F", vec![IndexLabel::ld("mu"), IndexLabel::ld("nu")]),
        &InnerOperator::with_lorentz("F", vec![IndexLabel::lu("mu"), IndexLabel::lu("nu")]),
    )
}

fn pole(c: &Coeff, imaginary: bool) -> TensorExpr {
    let mut t = TensorExpr::num(c.clone())
        .times(&TensorExpr::sym(Symbol::Omega4, Exp::int(1)))
        .times(&TensorExpr::sym(Symbol::Epsilon, Exp::int(-1)));
    if imaginary {
        t = t.times(&TensorExpr::sym(Symbol::I, Exp::int(1)));
    }
    t
}

pub fn determinant_div(kind: DeterminantKind) -> Result<DeterminantDiv> {
    let ops = qid_fluctuation_operators();
    let op = match kind {
        DeterminantKind::Gauge => &ops.gauge,
        DeterminantKind::Ghost => &ops.ghost,
    };
    op.check_covariant()?;
    let coefficient = tr_ln_div(&qid_sector(kind)?)?;
    let expr = pole(&coefficient, true).times(&trace_unit_ff()?).canonicalize()?;
    Ok(DeterminantDiv { kind, coefficient, expr })
}

/// Coefficient of `Ω₄/ε · Ω_D/(D(D+2)) · Λ²∫Λ^D F·F` in the pure-theory
/// divergent action, from the weighted gauge and ghost determinants.
pub fn qid_action_div() -> Result<Coeff> {
    Ok(&action_div(&qid_sector(DeterminantKind::Gauge)?)? + &action_div(&qid_sector(DeterminantKind::Ghost)?)?)
}

/// The same coefficient written down directly.
pub fn qid_action_div_closed_form() -> Coeff {
    &Coeff::frac(11, 12) * &Coeff::d()
}

/// The divergent action as an expression: `Ω₄/ε · c · Ω_D/(D(D+2)) Λ^{D+2} F·F`.
pub fn divergent_action(c: &Coeff) -> Result<TensorExpr> {
    pole(c, false).times(&trace_unit_ff()?).scale(&Coeff::int(-1)).canonicalize()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatterKind {
    GaugeField,
    Dirac,
    Chiral,
    ScalarDoublet,
    ComplexScalar,
}

impl MatterKind {
    pub const ALL: [MatterKind; 5] = [
        MatterKind::GaugeField,
        MatterKind::Dirac,
        MatterKind::Chiral,
        MatterKind::ScalarDoublet,
        MatterKind::ComplexScalar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatterKind::GaugeField => "gauge_field",
            MatterKind::Dirac => "dirac",
            MatterKind::Chiral => "chiral",
            MatterKind::ScalarDoublet => "scalar_doublet",
            MatterKind::ComplexScalar => "complex_scalar",
        }
    }
}

impl fmt::Display for MatterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sectors of one matter field. Matter lives on inner scalars. A gauge
/// field at `ξ = 1` has `ℰ^μ_ν = F^μ_ν` plus its ghost; a chiral field
/// takes the Weyl spinor trace; the potential of a scalar is
/// field-independent here.
pub fn matter_sectors(kind: MatterKind) -> Result<Vec<Sector>> {
    let s = InnerRep::Scalar;
    Ok(match kind {
        MatterKind::GaugeField => vec![
            lorentz_vector_sector("gauge_field", Coeff::frac(1, 2), 1, s)?,
            scalar_sector("gauge_field_ghost", Coeff::int(-1), 1, s),
        ],
        MatterKind::Dirac => vec![spinor_sector("dirac", DIRAC_DIM)?],
        MatterKind::Chiral => vec![spinor_sector("chiral", DIRAC_DIM / 2)?],
        MatterKind::ScalarDoublet => vec![scalar_sector("scalar_doublet", Coeff::one(), 2, s)],
        MatterKind::ComplexScalar => vec![scalar_sector("complex_scalar", Coeff::one(), 1, s)],
    })
}

/// Per-field contribution in units of `Ω₄/ε · Ω_D/(D(D+2)) · Λ²∫Λ^D F·F`.
pub fn matter_div(kind: MatterKind) -> Result<Rational> {
    let mut total = Coeff::zero();
    for s in matter_sectors(kind)? {
        total = &total + &action_div(&s)?;
    }
    total
        .as_rational()
        .ok_or_else(|| Error::Unsupported(format!("{kind} contribution depends on D")))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatterContent {
    pub n_gauge: i64,
    pub n_dirac: i64,
    pub n_chiral: i64,
    pub n_scalar_doublet: i64,
    pub n_complex_scalar: i64,
}

impl MatterContent {
    pub fn none() -> Self {
        MatterContent::default()
    }

    /// 12 gauge fields, 45 chiral fermions and one Higgs doublet.
    pub fn standard_model() -> Self {
        MatterContent {
            n_gauge: 12,
            n_chiral: 45,
            n_scalar_doublet: 1,
            ..MatterContent::default()
        }
    }

    pub fn without_higgs(mut self) -> Self {
        self.n_scalar_doublet = 0;
        self
    }

    pub fn counts(&self) -> [(MatterKind, i64); 5] {
        [
            (MatterKind::GaugeField, self.n_gauge),
            (MatterKind::Dirac, self.n_dirac),
            (MatterKind::Chiral, self.n_chiral),
            (MatterKind::ScalarDoublet, self.n_scalar_doublet),
            (MatterKind::ComplexScalar, self.n_complex_scalar),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match self.counts().into_iter().find(|(_, n)| *n < 0) {
            Some((k, _)) => Err(Error::NegativeCount(k.name().into())),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaResult {
    pub content: MatterContent,
    /// Bracket multiplying `−g³/(4π²) · Ω_D/(D(D+2)) · 1/12`.
    pub coefficient: Coeff,
    /// `β(g)`.
    pub beta: TensorExpr,
    /// `g_R` to order `g³`.
    pub g_renormalized: TensorExpr,
}

impl BetaResult {
    pub fn coefficient_at(&self, dim: i64) -> Rational {
        self.coefficient
            .eval_at(&Rational::from_integer(dim.into()))
            .expect("the coefficient is a polynomial in D")
    }

    pub fn asymptotically_free(&self, dim: i64) -> bool {
        self.coefficient_at(dim) > Rational::zero()
    }
}

/// `11D + 2n_g − 4n_d − 2n_c − 2n_s − n_cs`, written down directly.
pub fn beta_coefficient_closed_form(c: &MatterContent) -> Coeff {
    let matter = 2 * c.n_gauge - 4 * c.n_dirac - 2 * c.n_chiral - 2 * c.n_scalar_doublet - c.n_complex_scalar;
    Coeff::from_poly(Poly::from_coeffs(vec![
        Rational::from_integer(matter.into()),
        Rational::from_integer(11.into()),
    ]))
}

fn g_pow(k: i32) -> TensorExpr {
    TensorExpr::sym(Symbol::G, Exp::int(k))
}

/// `Ω_D/(D(D+2))` as an expression.
fn omega_d_factor() -> TensorExpr {
    TensorExpr::sym(Symbol::OmegaD, Exp::int(1)).scale(&(&Coeff::d() * &Coeff::d_plus(2)).inv())
}

pub fn beta(content: &MatterContent) -> Result<BetaResult> {
    content.validate()?;
    let mut total = qid_action_div()?;
    for (kind, n) in content.counts() {
        if n != 0 {
            total = &total + &(&Coeff::from_rational(matter_div(kind)?) * &Coeff::int(n));
        }
    }
    let coefficient = &total * &Coeff::int(12);
    // g_R = g(1 + 2Ω₄ g² · c/ε · Ω_D/(D(D+2))) absorbs the divergence of
    // the −1/(4g²)-normalized action; β(g) is minus the g³/ε residue.
    let shift = TensorExpr::num(&total * &Coeff::int(2))
        .times(&TensorExpr::sym(Symbol::Omega4, Exp::int(1)))
        .times(&omega_d_factor())
        .subst_symbol(Symbol::Omega4, &omega4_value())?;
    let g_renormalized = g_pow(1)
        .times(&(TensorExpr::one() + shift.times(&g_pow(2)).times(&TensorExpr::sym(Symbol::Epsilon, Exp::int(-1)))))
        .canonicalize()?;
    let beta = shift.times(&g_pow(3)).scale(&Coeff::int(-1)).canonicalize()?;
    Ok(BetaResult {
        content: content.clone(),
        coefficient,
        beta,
        g_renormalized,
    })
}

/// `β(g) = −g³/(4π²) · Ω_D/(D(D+2)) · b/12` written down directly.
pub fn beta_closed_form(b: &Coeff) -> Result<TensorExpr> {
    TensorExpr::num(&b.clone() * &Coeff::frac(-1, 48))
        .times(&TensorExpr::sym(Symbol::Pi, Exp::int(-2)))
        .times(&g_pow(3))
        .times(&omega_d_factor())
        .canonicalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::q;

    #[test]
    fn heat_kernel_coefficients() {
        let hk = heat_kernel_coeffs().unwrap();
        assert_eq!(hk.c_f, Coeff::frac(1, 12));
        assert_eq!(hk.c_e, Coeff::frac(1, 2));
    }

    #[test]
    fn operators_have_covariant_form() {
        let ops = qid_fluctuation_operators();
        ops.gauge.check_covariant().unwrap();
        ops.ghost.check_covariant().unwrap();
        assert!(ops.ghost.covariant.as_ref().unwrap().e.is_zero());
        let e = &ops.gauge.covariant.as_ref().unwrap().e;
        assert_eq!(e.len(), 1);
        assert_eq!(e.terms().next().unwrap().1, &Coeff::int(-2));
        assert_eq!(ops.connection.rep, InnerRep::Vector);
    }

    #[test]
    fn e_square_ratios() {
        assert_eq!(ratio_to_ff(&vector_e_square(&Coeff::int(-2)), 0).unwrap(), Some(q(-4, 1)));
        assert_eq!(ratio_to_ff(&vector_e_square(&Coeff::one()), 0).unwrap(), Some(q(-1, 1)));
        assert_eq!(ratio_to_ff(&spinor_e_square(4), 0).unwrap(), Some(q(-2, 1)));
        assert_eq!(ratio_to_ff(&ff_invariant(), 3).unwrap(), Some(q(1, 1)));
        // a quartic invariant is not a fixed multiple
        let quartic = ff_invariant().times(&ff_invariant());
        assert_eq!(ratio_to_ff(&quartic, 3).unwrap(), None);
    }

    #[test]
    fn gauge_and_ghost_determinants() {
        let g = determinant_div(DeterminantKind::Gauge).unwrap();
        assert_eq!(g.coefficient, &Coeff::frac(5, 3) * &Coeff::d());
        let gh = determinant_div(DeterminantKind::Ghost).unwrap();
        assert_eq!(gh.coefficient, &Coeff::frac(-1, 12) * &Coeff::d());
    }

    #[test]
    fn pure_theory_eleven_twelfths() {
        assert_eq!(qid_action_div().unwrap(), qid_action_div_closed_form());
    }

    #[test]
    fn divergent_action_is_proportional_to_the_action() {
        let e = divergent_action(&qid_action_div().unwrap()).unwrap();
        assert_eq!(e.len(), 1);
        let (t, _) = e.terms().next().unwrap();
        assert_eq!(t.mono.exponent(Symbol::Lambda), Exp::dim_plus(2));
        // no derivatives of Λ-dependent structures, only F·F
        assert!(t.atoms.iter().all(|(a, _)| match a {
            TensorAtom::Field { name, derivs, .. } => name == "F" && derivs.is_empty(),
            _ => false,
        }));
    }

    #[test]
    fn matter_contributions() {
        let want = [
            (MatterKind::GaugeField, q(1, 6)),
            (MatterKind::Dirac, q(-1, 3)),
            (MatterKind::Chiral, q(-1, 6)),
            (MatterKind::ScalarDoublet, q(-1, 6)),
            (MatterKind::ComplexScalar, q(-1, 12)),
        ];
        for (k, v) in want {
            assert_eq!(matter_div(k).unwrap(), v, "{k}");
        }
    }

    #[test]
    fn beta_pure_and_standard_model() {
        let pure = beta(&MatterContent::none()).unwrap();
        assert_eq!(pure.coefficient, &Coeff::int(11) * &Coeff::d());
        assert!((1..=30).all(|d| pure.asymptotically_free(d)));
        let sm = beta(&MatterContent::standard_model()).unwrap();
        assert_eq!(sm.coefficient, beta_coefficient_closed_form(&MatterContent::standard_model()));
        assert_eq!(sm.coefficient_at(6), q(-2, 1));
        assert!(!sm.asymptotically_free(6));
        assert!(sm.asymptotically_free(7));
        let nh = beta(&MatterContent::standard_model().without_higgs()).unwrap();
        assert_eq!(nh.coefficient_at(6), q(0, 1));
        assert!(!nh.asymptotically_free(6));
    }

    #[test]
    fn beta_expression_matches_closed_form() {
        for c in [MatterContent::none(), MatterContent::standard_model()] {
            let r = beta(&c).unwrap();
            assert_eq!(r.beta, beta_closed_form(&r.coefficient).unwrap());
        }
    }

    #[test]
    fn renormalized_coupling_form() {
        let r = beta(&MatterContent::none()).unwrap();
        // g_R − g is the order-g³ pole, and β is −ε times it over g⁰
        let shift = (r.g_renormalized.clone() - g_pow(1)).canonicalize().unwrap();
        let back = shift
            .times(&TensorExpr::sym(Symbol::Epsilon, Exp::int(1)))
            .scale(&Coeff::int(-1))
            .canonicalize()
            .unwrap();
        assert_eq!(back, r.beta);
    }

    #[test]
    fn negative_count_is_rejected() {
        let c = MatterContent {
            n_dirac: -1,
            ..MatterContent::default()
        };
        assert_eq!(beta(&c).unwrap_err(), Error::NegativeCount("dirac".into()));
    }

    #[test]
    fn closed_form_matches_derivation_for_mixed_content() {
        let c = MatterContent {
            n_gauge: 3,
            n_dirac: 2,
            n_chiral: 5,
            n_scalar_doublet: 1,
            n_complex_scalar: 4,
        };
        assert_eq!(beta(&c).unwrap().coefficient, beta_coefficient_closed_form(&c));
    }
}
