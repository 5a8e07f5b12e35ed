//! Divergent part of `Tr Ln(𝒟/𝒟₀)` for `𝒟 = −∂² + B_ρ∂^ρ + C`.
//!
//! `Γ⁽ⁿ⁾` is assembled by expanding `Π_j (i B_{ρj} (p + q_j)^{ρj} + C_j)`,
//! contracting the pole tensors of [`crate::looptab`] with the `B` slots, and
//! turning every external momentum `k_j^μ` into `i∂^μ` acting on factor `j`.
//! The result is brought to a trace normal form: the cyclic average of a
//! term, with spacetime derivatives integrated by parts off the first factor,
//! then dummy-canonicalized. Two expressions have the same normal form
//! exactly when they differ by total derivatives and cyclic rotations.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::looptab::{div_part, LoopIntegral};
use crate::symcore::{
    Coeff, Exp, GTerm, GradedAtom, GradedExpr, IndexLabel, NormalizeOptions, Space, Species, Symbol, TensorAtom,
};

/// `B_ρ` and `C` of the operator. `b` carries the free lower Lorentz label
/// [`SLOT`]; `c` has no free Lorentz labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluctuationOperator {
    pub b: GradedExpr,
    pub c: GradedExpr,
    pub covariant: Option<CovariantForm>,
}

/// `𝒟 = −𝒟_μ𝒟^μ + ℰ` with `𝒟_μ = ∂_μ + 𝒜_μ`. `a` carries the free lower
/// label [`SLOT`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovariantForm {
    pub a: GradedExpr,
    pub e: GradedExpr,
}

/// Name of the free Lorentz slot of the `B` and `𝒜` templates.
pub const SLOT: &str = "rho";

pub fn op_atom(s: Species, lorentz: Vec<IndexLabel>) -> GradedAtom {
    GradedAtom::new(s, lorentz, vec![])
}

fn b_atom(l: IndexLabel) -> GradedAtom {
    op_atom(Species::OpB, vec![l])
}

fn a_atom(l: IndexLabel) -> GradedAtom {
    op_atom(Species::OpA, vec![l])
}

fn c_atom() -> GradedAtom {
    GradedAtom::bare(Species::OpC)
}

fn e_atom() -> GradedAtom {
    GradedAtom::bare(Species::OpE)
}

/// `−iΩ₄/ε` or `iΩ₄/ε` as a graded scalar.
pub fn pole_prefactor(sign: i64) -> GradedExpr {
    GradedExpr::num(Coeff::int(sign))
        .times_sym(Symbol::I, Exp::int(1))
        .times_sym(Symbol::Omega4, Exp::int(1))
        .times_sym(Symbol::Epsilon, Exp::int(-1))
}

/// Strips the `iΩ₄/ε` prefactor.
pub fn strip_pole(e: &GradedExpr) -> GradedExpr {
    e.times_sym(Symbol::I, Exp::int(-1))
        .times_sym(Symbol::Omega4, Exp::int(-1))
        .times_sym(Symbol::Epsilon, Exp::int(1))
}

impl FluctuationOperator {
    /// Free noncommuting `B_ρ` and `C`.
    pub fn generic() -> Self {
        FluctuationOperator {
            b: GradedExpr::atom(b_atom(IndexLabel::ld(SLOT))),
            c: GradedExpr::atom(c_atom()),
            covariant: None,
        }
    }

    /// Builds `B_μ = −2𝒜_μ`, `C = −∂_μ𝒜^μ − 𝒜_μ𝒜^μ + ℰ`.
    pub fn from_covariant(a: GradedExpr, e: GradedExpr) -> Self {
        let (b, c) = covariant_bc(&a, &e);
        FluctuationOperator {
            b,
            c,
            covariant: Some(CovariantForm { a, e }),
        }
    }

    /// Free noncommuting `𝒜_μ` and `ℰ`.
    pub fn generic_covariant() -> Self {
        FluctuationOperator::from_covariant(
            GradedExpr::atom(a_atom(IndexLabel::ld(SLOT))),
            GradedExpr::atom(e_atom()),
        )
    }

    /// Verifies that `B` and `C` match the covariant form.
    pub fn check_covariant(&self) -> Result<()> {
        let Some(cf) = &self.covariant else {
            return Err(Error::CovariantForm("no covariant form attached".into()));
        };
        let (b, c) = covariant_bc(&cf.a, &cf.e);
        if !(&self.b - &b).normalize()?.is_zero() {
            return Err(Error::CovariantForm("B differs from −2𝒜".into()));
        }
        if !(&self.c - &c).normalize()?.is_zero() {
            return Err(Error::CovariantForm("C differs from −∂𝒜 − 𝒜𝒜 + ℰ".into()));
        }
        Ok(())
    }

    /// Replaces the generic `B`, `C` atoms of `e` by this operator's
    /// coefficients.
    pub fn apply(&self, e: &GradedExpr) -> Result<GradedExpr> {
        e.substitute(
            |s| *s == Species::OpB || *s == Species::OpC,
            |atom| match atom.species {
                Species::OpB => Ok(self.b.relabel(SLOT, &atom.lorentz[0])),
                _ => Ok(self.c.clone()),
            },
        )
    }
}

fn covariant_bc(a: &GradedExpr, e: &GradedExpr) -> (GradedExpr, GradedExpr) {
    let b = a.scale(&Coeff::int(-2));
    let s_up = IndexLabel::lu("s");
    let s_dn = IndexLabel::ld("s");
    let da = a.relabel(SLOT, &s_up).partial(&s_dn);
    let aa = a.relabel(SLOT, &s_dn).times(&a.relabel(SLOT, &s_up));
    let c = (-da) - aa + e.clone();
    (b, c)
}

/// `Γ⁽ⁿ⁾` in the generic `B`, `C` atoms, before the trace normal form.
pub fn gamma_n_raw(n: usize) -> Result<GradedExpr> {
    if !(1..=4).contains(&n) {
        return Err(Error::Unsupported(format!("Γ⁽{n}⁾: n must be 1..=4")));
    }
    let slot = |j: usize| format!("r{}", j + 1);
    let mut total = GradedExpr::zero();
    for mask in 0u32..(1 << n) {
        let b_pos: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        // each B factor j picks p or one k_i with 2 ≤ i ≤ j+1 from (p + q_j)
        let options: Vec<Vec<u32>> = b_pos
            .iter()
            .map(|j| std::iter::once(0).chain(2..=(*j as u32 + 1)).collect())
            .collect();
        let choices: Vec<Vec<u32>> = if options.is_empty() {
            vec![vec![]]
        } else {
            options.into_iter().multi_cartesian_product().collect()
        };
        for choice in choices {
            let mut loop_labels = Vec::new();
            let mut explicit = crate::symcore::TensorExpr::one();
            for (j, c) in b_pos.iter().zip(&choice) {
                let l = IndexLabel::lu(&slot(*j));
                if *c == 0 {
                    loop_labels.push(l);
                } else {
                    explicit = explicit.times(&crate::symcore::TensorExpr::k(*c, l));
                }
            }
            let li = LoopIntegral::with_labels(loop_labels.len(), n, loop_labels)?;
            let pole = div_part(&li)?.pole_coeff;
            if pole.is_zero() {
                continue;
            }
            let t = pole.times(&explicit).canonicalize()?;
            for (term, c) in t.terms() {
                let mut factors: Vec<GradedAtom> = (0..n)
                    .map(|j| {
                        if b_pos.contains(&j) {
                            b_atom(IndexLabel::ld(&slot(j)))
                        } else {
                            c_atom()
                        }
                    })
                    .collect();
                let mut i_power = b_pos.len() as i32;
                let mut fresh = 0;
                let slot_of = |name: &str| -> Result<usize> {
                    name.strip_prefix('r')
                        .and_then(|k| k.parse::<usize>().ok())
                        .map(|k| k - 1)
                        .ok_or_else(|| Error::Unsupported(format!("unexpected label {name}")))
                };
                for (atom, p) in &term.atoms {
                    match atom {
                        TensorAtom::MetricEta { a, b } => {
                            factors[slot_of(&b.name)?].lorentz[0] = IndexLabel::lu(&a.name);
                        }
                        TensorAtom::Momentum { leg, index } => {
                            let f = &mut factors[*leg as usize - 1];
                            *f = f.clone().with_deriv(IndexLabel::lu(&index.name));
                            i_power += 1;
                        }
                        TensorAtom::Dot {
                            a,
                            b,
                            space: Space::Lorentz,
                        } if *p > 0 => {
                            for _ in 0..*p {
                                fresh += 1;
                                let name = format!("d{fresh}");
                                let fa = &mut factors[*a as usize - 1];
                                *fa = fa.clone().with_deriv(IndexLabel::lu(&name));
                                let fb = &mut factors[*b as usize - 1];
                                *fb = fb.clone().with_deriv(IndexLabel::ld(&name));
                                i_power += 2;
                            }
                        }
                        other => {
                            return Err(Error::Unsupported(format!("unexpected pole atom {other:?}")));
                        }
                    }
                }
                let g = GradedExpr::from_term(
                    GTerm {
                        atoms: factors,
                        mono: term.mono.clone(),
                    },
                    c.clone(),
                )
                .times_sym(Symbol::I, Exp::int(i_power));
                total = total + g;
            }
        }
    }
    Ok(total
        .times_sym(Symbol::Omega4, Exp::int(1))
        .times_sym(Symbol::Epsilon, Exp::int(-1)))
}

/// Moves every spacetime derivative off the first factor by parts.
fn ibp_first(atoms: Vec<GradedAtom>) -> Vec<(i64, Vec<GradedAtom>)> {
    let pos = atoms[0].derivs.iter().position(|d| d.space == Space::Lorentz);
    let Some(k) = pos else {
        return vec![(1, atoms)];
    };
    let mut out = Vec::new();
    let d = atoms[0].derivs[k].clone();
    let mut stripped = atoms;
    stripped[0].derivs.remove(k);
    for j in 1..stripped.len() {
        let mut next = stripped.clone();
        next[j] = next[j].clone().with_deriv(d.clone());
        for (s, seq) in ibp_first(next) {
            out.push((-s, seq));
        }
    }
    out
}

/// Normal form under the spacetime-integrated trace.
pub fn trace_normal_form(e: &GradedExpr, opts: NormalizeOptions) -> Result<GradedExpr> {
    let mut out = GradedExpr::zero();
    for (t, c) in e.terms() {
        let n = t.atoms.len();
        if n == 0 {
            out = out + GradedExpr::from_term(t.clone(), c.clone());
            continue;
        }
        let orders: Vec<Vec<usize>> = if opts.commuting_operators {
            (0..n).permutations(n).collect()
        } else {
            (0..n).map(|r| (0..n).map(|i| (i + r) % n).collect()).collect()
        };
        let w = c / &Coeff::int(orders.len() as i64);
        for ord in orders {
            let seq: Vec<GradedAtom> = ord.iter().map(|i| t.atoms[*i].clone()).collect();
            for (s, nseq) in ibp_first(seq) {
                out = out
                    + GradedExpr::from_term(
                        GTerm {
                            atoms: nseq,
                            mono: t.mono.clone(),
                        },
                        &w * &Coeff::int(s),
                    );
            }
        }
    }
    out.normalize_with(opts)
}

fn check_n(n: usize) -> Result<()> {
    if (1..=4).contains(&n) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("Γ⁽{n}⁾: n must be 1..=4")))
    }
}

/// Trace-normalized `Γ⁽ⁿ⁾_div` of an operator.
pub fn gamma_n_div(op: &FluctuationOperator, n: usize) -> Result<GradedExpr> {
    gamma_n_div_with(op, n, NormalizeOptions::default())
}

pub fn gamma_n_div_with(op: &FluctuationOperator, n: usize, opts: NormalizeOptions) -> Result<GradedExpr> {
    check_n(n)?;
    trace_normal_form(&op.apply(&gamma_n_raw(n)?)?, opts)
}

/// `Γ⁽¹⁾ − ½Γ⁽²⁾ + ⅓Γ⁽³⁾ − ¼Γ⁽⁴⁾`, trace-normalized.
pub fn trace_ln_div(op: &FluctuationOperator) -> Result<GradedExpr> {
    trace_ln_div_with(op, NormalizeOptions::default())
}

pub fn trace_ln_div_with(op: &FluctuationOperator, opts: NormalizeOptions) -> Result<GradedExpr> {
    let mut raw = GradedExpr::zero();
    for n in 1..=4 {
        let w = Coeff::frac(if n % 2 == 1 { 1 } else { -1 }, n as i64);
        raw = raw + gamma_n_raw(n)?.scale(&w);
    }
    trace_normal_form(&op.apply(&raw)?, opts)
}

fn lu(n: &str) -> IndexLabel {
    IndexLabel::lu(n)
}

fn ld(n: &str) -> IndexLabel {
    IndexLabel::ld(n)
}

/// The nine monomials of the master bracket with their published
/// coefficients, in the generic `B`, `C` atoms (without `iΩ₄/ε`).
pub fn master_bracket_published() -> Vec<(&'static str, Coeff, GradedExpr)> {
    let b = |l: IndexLabel| b_atom(l);
    let db = |l: IndexLabel, d: IndexLabel| b_atom(l).with_deriv(d);
    let p = GradedExpr::product;
    vec![
        ("d^mu B_mu . d^nu B_nu", Coeff::frac(-1, 12), p(vec![db(ld("mu"), lu("mu")), db(ld("nu"), lu("nu"))])),
        ("d^nu B_mu . d_nu B^mu", Coeff::frac(-1, 24), p(vec![db(ld("mu"), lu("nu")), db(lu("mu"), ld("nu"))])),
        ("d^mu B_mu . C", Coeff::frac(1, 2), p(vec![db(ld("mu"), lu("mu")), c_atom()])),
        ("C . C", Coeff::frac(-1, 2), p(vec![c_atom(), c_atom()])),
        ("d^mu B_mu . B^nu . B_nu", Coeff::frac(1, 12), p(vec![db(ld("mu"), lu("mu")), b(lu("nu")), b(ld("nu"))])),
        ("B_mu . d^mu B^nu . B_nu", Coeff::frac(-1, 12), p(vec![b(ld("mu")), db(lu("nu"), lu("mu")), b(ld("nu"))])),
        ("C . B^nu . B_nu", Coeff::frac(-1, 4), p(vec![c_atom(), b(lu("nu")), b(ld("nu"))])),
        ("B^mu . B_mu . B^nu . B_nu", Coeff::frac(-1, 48), p(vec![b(lu("mu")), b(ld("mu")), b(lu("nu")), b(ld("nu"))])),
        ("B^mu . B^nu . B_mu . B_nu", Coeff::frac(-1, 96), p(vec![b(lu("mu")), b(lu("nu")), b(ld("mu")), b(ld("nu"))])),
    ]
}

/// Published per-`n` brackets (without `iΩ₄/ε`) for `n = 2, 3, 4`.
pub fn gamma_published(n: usize) -> Option<Vec<(Coeff, GradedExpr)>> {
    let all = master_bracket_published();
    let pick = |i: usize, c: Coeff| (c, all[i].2.clone());
    Some(match n {
        1 => vec![],
        2 => vec![
            pick(0, Coeff::frac(1, 6)),
            pick(1, Coeff::frac(1, 12)),
            pick(2, Coeff::int(-1)),
            pick(3, Coeff::int(-1)),
        ],
        3 => vec![
            pick(4, Coeff::frac(1, 4)),
            pick(5, Coeff::frac(-1, 4)),
            pick(6, Coeff::frac(-3, 4)),
        ],
        4 => vec![pick(7, Coeff::frac(1, 12)), pick(8, Coeff::frac(1, 24))],
        _ => return None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub coeffs: Vec<Coeff>,
    pub residue: GradedExpr,
}

/// Writes `target = Σ c_i basis_i + residue` with exact coefficients, all
/// inputs already in normal form. Fails if the basis is linearly dependent.
pub fn decompose(target: &GradedExpr, basis: &[GradedExpr]) -> Result<Decomposition> {
    let mut keys: Vec<GTerm> = basis.iter().flat_map(|b| b.terms().map(|(t, _)| t.clone())).collect();
    keys.sort();
    keys.dedup();
    let m = basis.len();
    let coeff_of = |e: &GradedExpr, k: &GTerm| {
        e.terms()
            .find(|(t, _)| *t == k)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Coeff::zero)
    };
    let mut mat: Vec<Vec<Coeff>> = keys
        .iter()
        .map(|k| {
            let mut row: Vec<Coeff> = basis.iter().map(|b| coeff_of(b, k)).collect();
            row.push(coeff_of(target, k));
            row
        })
        .collect();
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..m {
        let Some(r) = (row..mat.len()).find(|r| !mat[*r][col].is_zero()) else {
            return Err(Error::Unsupported("basis is linearly dependent under the trace".into()));
        };
        mat.swap(row, r);
        let inv = mat[row][col].inv();
        for x in mat[row].iter_mut() {
            *x = &*x * &inv;
        }
        for r2 in 0..mat.len() {
            if r2 != row && !mat[r2][col].is_zero() {
                let f = mat[r2][col].clone();
                for c2 in 0..=m {
                    let v = &mat[row][c2] * &f;
                    mat[r2][c2] = &mat[r2][c2] - &v;
                }
            }
        }
        pivots.push(row);
        row += 1;
    }
    let coeffs: Vec<Coeff> = pivots.iter().map(|r| mat[*r][m].clone()).collect();
    let mut residue = target.clone();
    for (c, b) in coeffs.iter().zip(basis) {
        residue = residue - b.scale(c);
    }
    Ok(Decomposition {
        coeffs,
        residue: residue.normalize()?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketCheck {
    pub labels: Vec<String>,
    pub derived: Vec<Coeff>,
    pub published: Vec<Coeff>,
    pub residue: GradedExpr,
}

impl BracketCheck {
    pub fn passes(&self) -> bool {
        self.derived == self.published && self.residue.is_zero()
    }
}

/// Derives the nine master-bracket coefficients from the assembled
/// `Γ⁽ⁿ⁾` and compares them with the published ones.
pub fn master_bracket_check() -> Result<BracketCheck> {
    let opts = NormalizeOptions::default();
    let derived = strip_pole(&trace_ln_div(&FluctuationOperator::generic())?);
    let published = master_bracket_published();
    let basis: Vec<GradedExpr> = published
        .iter()
        .map(|(_, _, e)| trace_normal_form(e, opts))
        .collect::<Result<_>>()?;
    let d = decompose(&derived, &basis)?;
    Ok(BracketCheck {
        labels: published.iter().map(|(l, _, _)| l.to_string()).collect(),
        derived: d.coeffs,
        published: published.into_iter().map(|(_, c, _)| c).collect(),
        residue: d.residue,
    })
}

/// Decomposes a single trace-normalized `Γ⁽ⁿ⁾` over its published bracket.
pub fn gamma_n_check(n: usize) -> Result<BracketCheck> {
    check_n(n)?;
    let opts = NormalizeOptions::default();
    let derived = strip_pole(&gamma_n_div(&FluctuationOperator::generic(), n)?);
    let all = master_bracket_published();
    let published = gamma_published(n).expect("n checked");
    let basis: Vec<GradedExpr> = published
        .iter()
        .map(|(_, e)| trace_normal_form(e, opts))
        .collect::<Result<_>>()?;
    let d = decompose(&derived, &basis)?;
    let labels = published
        .iter()
        .map(|(_, e)| {
            all.iter()
                .find(|(_, _, x)| x == e)
                .map(|(l, _, _)| l.to_string())
                .unwrap_or_default()
        })
        .collect();
    Ok(BracketCheck {
        labels,
        derived: d.coeffs,
        published: published.into_iter().map(|(c, _)| c).collect(),
        residue: d.residue,
    })
}

/// `ℱ_{μν} = ∂_μ𝒜_ν − ∂_ν𝒜_μ + 𝒜_μ𝒜_ν − 𝒜_ν𝒜_μ` in generic `𝒜` atoms.
pub fn field_strength_expanded(m: &IndexLabel, n: &IndexLabel) -> GradedExpr {
    let a = |l: &IndexLabel| GradedExpr::atom(a_atom(l.clone()));
    let da = |l: &IndexLabel, d: &IndexLabel| GradedExpr::atom(a_atom(l.clone()).with_deriv(d.clone()));
    da(n, m) - da(m, n) + a(m).times(&a(n)) - a(n).times(&a(m))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovariantResult {
    /// Coefficient of `ℱ_{μν}ℱ^{μν}` inside `−iΩ₄/ε Tr{…}`.
    pub c_f: Coeff,
    /// Coefficient of `ℰ²` inside `−iΩ₄/ε Tr{…}`.
    pub c_e: Coeff,
    /// What remains after removing both terms; zero when the form closes.
    pub residue: GradedExpr,
    /// `−iΩ₄/ε (c_F ℱ_{μν}ℱ^{μν} + c_E ℰ²)` with `ℱ` as an operator atom.
    pub expr: GradedExpr,
}

/// Substitutes the covariant form into the master bracket and reduces it
/// to `−iΩ₄/ε Tr{c_F ℱ² + c_E ℰ²}`; any leftover is reported as an error.
pub fn covariant_simplify(op: &FluctuationOperator) -> Result<CovariantResult> {
    covariant_simplify_with(op, NormalizeOptions::default())
}

pub fn covariant_simplify_with(op: &FluctuationOperator, opts: NormalizeOptions) -> Result<CovariantResult> {
    let r = covariant_reduce(op, opts)?;
    if !r.residue.is_zero() {
        return Err(Error::CovariantForm(format!("non-cancelling residue {}", r.residue)));
    }
    Ok(r)
}

/// Like [`covariant_simplify_with`] but returns a nonzero residue instead of
/// failing.
pub fn covariant_reduce(op: &FluctuationOperator, opts: NormalizeOptions) -> Result<CovariantResult> {
    op.check_covariant()?;
    let cf = op.covariant.as_ref().expect("checked above");
    let generic = FluctuationOperator::generic_covariant();
    let total = trace_ln_div_with(&generic, opts)?;
    let target = strip_pole(&total).scale(&Coeff::int(-1));
    let ff = field_strength_expanded(&ld("mu"), &ld("nu")).times(&field_strength_expanded(&lu("mu"), &lu("nu")));
    let ee = GradedExpr::product(vec![e_atom(), e_atom()]);
    let mut basis = Vec::new();
    let mut present = Vec::new();
    for b in [ff, ee] {
        let nf = trace_normal_form(&b, opts)?;
        present.push(!nf.is_zero());
        if !nf.is_zero() {
            basis.push(nf);
        }
    }
    let d = decompose(&target, &basis)?;
    let mut it = d.coeffs.into_iter();
    let c_f = if present[0] { it.next().unwrap() } else { Coeff::zero() };
    let c_e = if present[1] { it.next().unwrap() } else { Coeff::zero() };
    let f_op = |a: IndexLabel, b: IndexLabel| op_atom(Species::OpF, vec![a, b]);
    let two_term = GradedExpr::product(vec![f_op(ld("mu"), ld("nu")), f_op(lu("mu"), lu("nu"))]).scale(&c_f)
        + cf.e.times(&cf.e).scale(&c_e);
    Ok(CovariantResult {
        c_f,
        c_e,
        residue: d.residue,
        expr: pole_prefactor(-1).times(&two_term),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_one_vanishes() {
        assert!(gamma_n_div(&FluctuationOperator::generic(), 1).unwrap().is_zero());
    }

    #[test]
    fn gamma_range_is_checked() {
        assert!(gamma_n_div(&FluctuationOperator::generic(), 5).is_err());
        assert!(gamma_n_div(&FluctuationOperator::generic(), 0).is_err());
    }

    #[test]
    fn total_derivative_has_zero_normal_form() {
        let bc = GradedExpr::product(vec![b_atom(ld("mu")), c_atom()]);
        let td = bc.partial(&lu("mu"));
        assert!(trace_normal_form(&td, NormalizeOptions::default()).unwrap().is_zero());
    }

    #[test]
    fn cyclic_rotation_has_same_normal_form() {
        let o = NormalizeOptions::default();
        let x = GradedExpr::product(vec![b_atom(lu("mu")), c_atom(), b_atom(ld("mu"))]);
        let y = GradedExpr::product(vec![c_atom(), b_atom(ld("mu")), b_atom(lu("mu"))]);
        assert_eq!(trace_normal_form(&x, o).unwrap(), trace_normal_form(&y, o).unwrap());
        let z = GradedExpr::product(vec![b_atom(lu("mu")), b_atom(ld("mu")), c_atom()]);
        assert_eq!(trace_normal_form(&x, o).unwrap(), trace_normal_form(&z, o).unwrap());
    }

    #[test]
    fn covariant_form_is_checked() {
        let mut op = FluctuationOperator::generic_covariant();
        op.check_covariant().unwrap();
        op.c = GradedExpr::atom(c_atom());
        assert!(matches!(op.check_covariant(), Err(Error::CovariantForm(_))));
    }
}

#[cfg(test)]
mod derivation_tests {
    use super::*;

    #[test]
    fn master_bracket_matches_published() {
        let r = master_bracket_check().unwrap();
        for (l, (d, p)) in r.labels.iter().zip(r.derived.iter().zip(&r.published)) {
            println!("{l}: derived {d} published {p}");
        }
        println!("residue {}", r.residue);
        assert!(r.passes());
    }

    #[test]
    fn cubic_and_quartic_match_published() {
        for n in [3, 4] {
            assert!(gamma_n_check(n).unwrap().passes(), "n = {n}");
        }
    }

    #[test]
    fn quadratic_differs_only_in_c_squared_sign() {
        let r = gamma_n_check(2).unwrap();
        assert!(r.residue.is_zero());
        assert_eq!(r.derived[..3], r.published[..3]);
        assert_eq!(r.derived[3], Coeff::int(1));
        assert_eq!(r.published[3], Coeff::int(-1));
    }

    #[test]
    fn b_zero_leaves_c_squared() {
        let op = FluctuationOperator {
            b: GradedExpr::zero(),
            c: GradedExpr::atom(c_atom()),
            covariant: None,
        };
        let t = trace_ln_div(&op).unwrap();
        let expect = pole_prefactor(1).times(&GradedExpr::product(vec![c_atom(), c_atom()]).scale(&Coeff::frac(-1, 2)));
        assert_eq!(t, expect.normalize().unwrap());
    }

    #[test]
    fn abelian_mode_closes() {
        let o = NormalizeOptions { commuting_operators: true };
        let r = covariant_simplify_with(&FluctuationOperator::generic_covariant(), o).unwrap();
        assert_eq!(r.c_f, Coeff::frac(1, 12));
        assert_eq!(r.c_e, Coeff::frac(1, 2));
    }

    #[test]
    fn covariant_closes() {
        let r = covariant_simplify(&FluctuationOperator::generic_covariant()).unwrap();
        assert_eq!(r.c_f, Coeff::frac(1, 12));
        assert_eq!(r.c_e, Coeff::frac(1, 2));
    }
}
