//! Cutoff-regularized inner-momentum integrals over the ball `|P| ≤ Λ` and
//! inner traces of first-order inner-derivative operators.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::looptab::pairings;
use crate::symcore::{
    Coeff, Exp, IndexLabel, NumericEnv, Rational, Space, Symbol, TensorAtom, TensorExpr, Term,
};

/// Highest supported moment degree.
pub const MAX_MOMENT: u32 = 4;

/// Leg id of the integrated inner momentum `P`.
const P_LEG: u32 = 0;

/// Default moment labels `I, J, K, L`.
pub const MOMENT_LABELS: [&str; 4] = ["I", "J", "K", "L"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerMoment {
    pub degree: u32,
    pub result: TensorExpr,
}

/// `1 / (D (D+2) ⋯ (D+n))` for even `n`; the factor multiplying
/// `Ω_D Λ^{D+n}` and each pairing of inner metrics.
pub fn moment_scalar(n: u32) -> Coeff {
    let mut c = Coeff::one();
    for j in (0..=n).step_by(2) {
        c = &c / &Coeff::d_plus(j as i64);
    }
    c
}

/// `∫_{|P|≤Λ} d^D P / (2π)^D  P^{I₁} ⋯ P^{Iₙ}` with the given labels.
pub fn moment_with(labels: &[IndexLabel]) -> Result<InnerMoment> {
    let n = labels.len() as u32;
    if n > MAX_MOMENT {
        return Err(Error::Unsupported(format!("inner moment of degree {n}")));
    }
    if let Some(l) = labels.iter().find(|l| l.space != Space::Inner) {
        return Err(Error::SpaceMismatch(l.name.clone(), "inner".into()));
    }
    if n % 2 == 1 {
        return Ok(InnerMoment {
            degree: n,
            result: TensorExpr::zero(),
        });
    }
    let slots: Vec<usize> = (0..labels.len()).collect();
    let mut sum = TensorExpr::zero();
    for p in pairings(&slots) {
        let mut t = TensorExpr::one();
        for (a, b) in p {
            t = t.times(&TensorExpr::delta(labels[a].clone(), labels[b].clone()));
        }
        sum = sum + t;
    }
    let result = sum
        .scale(&moment_scalar(n))
        .times(&TensorExpr::sym(Symbol::OmegaD, Exp::int(1)))
        .times(&TensorExpr::sym(Symbol::Lambda, Exp::dim_plus(n as i32)))
        .canonicalize()?;
    Ok(InnerMoment { degree: n, result })
}

/// Moment of degree `n` with upper labels `I, J, K, L`.
pub fn moment(n: u32) -> Result<InnerMoment> {
    if n > MAX_MOMENT {
        return Err(Error::Unsupported(format!("inner moment of degree {n}")));
    }
    let labels: Vec<IndexLabel> = MOMENT_LABELS[..n as usize].iter().map(|s| IndexLabel::iu(s)).collect();
    moment_with(&labels)
}

/// `Ω_D = 2π^{D/2} / Γ(D/2) / (2π)^D` at integer `D` as `rational · π^k`.
pub fn omega_d_exact(dim: u32) -> Result<TensorExpr> {
    if dim == 0 {
        return Err(Error::Unsupported("Ω_D at D = 0".into()));
    }
    // Γ(D/2) = g · √π^{D odd}
    let mut g = Rational::from_integer(1.into());
    if dim.is_multiple_of(2) {
        for k in 1..(dim / 2) {
            g *= Rational::from_integer(k.into());
        }
    } else {
        let mut x = Rational::new(1.into(), 2.into());
        while x < Rational::new(dim.into(), 2.into()) {
            g *= x.clone();
            x += Rational::from_integer(1.into());
        }
    }
    let two_pow = Rational::from_integer(num_bigint::BigInt::from(2).pow(dim));
    let c = Rational::from_integer(2.into()) / (g * two_pow);
    let pi_power = if dim.is_multiple_of(2) {
        dim as i64 / 2 - dim as i64
    } else {
        (dim as i64 - 1) / 2 - dim as i64
    };
    Ok(TensorExpr::num(Coeff::from_rational(c)).times(&TensorExpr::sym(Symbol::Pi, Exp::int(pi_power as i32))))
}

/// `Ω₄ = 1/(8π²)`.
pub fn omega4_value() -> TensorExpr {
    TensorExpr::num(Coeff::frac(1, 8)).times(&TensorExpr::sym(Symbol::Pi, Exp::int(-2)))
}

/// Floating value of a scalar `rational · π^k` expression.
pub fn scalar_f64(e: &TensorExpr) -> Result<f64> {
    let mut out = 0.0;
    for (t, c) in e.terms() {
        if !t.atoms.is_empty() {
            return Err(Error::Evaluation("indexed atom in a scalar".into()));
        }
        let r = c
            .as_rational()
            .ok_or_else(|| Error::Evaluation("D-dependent coefficient".into()))?;
        let mut v = r.to_f64().unwrap_or(f64::NAN);
        for (s, e) in t.mono.factors() {
            if s != Symbol::Pi || e.d != 0 {
                return Err(Error::Evaluation(format!("symbol {} in a numeric scalar", s.plain())));
            }
            v *= std::f64::consts::PI.powi(e.c);
        }
        out += v;
    }
    Ok(out)
}

pub fn omega_d_f64(dim: u32) -> Result<f64> {
    scalar_f64(&omega_d_exact(dim)?)
}

/// Gauss-Legendre nodes per coordinate of the quadrature oracle.
pub const QUADRATURE_NODES: usize = 24;

/// `∫_{|P|≤Λ} d^D P / (2π)^D Π_i (P^i)^{powers[i]}` by a radial-angular
/// product rule in hyperspherical coordinates.
pub fn quadrature_moment(dim: usize, cutoff: f64, powers: &[u32]) -> f64 {
    assert!(dim >= 2, "quadrature needs D ≥ 2");
    let rule = GaussLegendre::new(NonZeroUsize::new(QUADRATURE_NODES).expect("nonzero"));
    let mut pw = powers.to_vec();
    pw.resize(dim, 0);
    // x_1 = r cos θ_1, x_2 = r sin θ_1 cos θ_2, …, x_D = r Π sin θ_j sin φ
    fn angles(rule: &GaussLegendre, dim: usize, depth: usize, prefix: &mut Vec<f64>, pw: &[u32]) -> f64 {
        let polar = dim - 2;
        if depth == polar {
            return rule.integrate(0.0, 2.0 * std::f64::consts::PI, |phi| {
                prefix.push(phi);
                let v = unit_monomial(dim, prefix, pw);
                prefix.pop();
                v
            });
        }
        let jac_power = (dim - 2 - depth) as i32;
        rule.integrate(0.0, std::f64::consts::PI, |th| {
            prefix.push(th);
            let v = angles(rule, dim, depth + 1, prefix, pw) * th.sin().powi(jac_power);
            prefix.pop();
            v
        })
    }
    fn unit_monomial(dim: usize, ang: &[f64], pw: &[u32]) -> f64 {
        let mut prod = 1.0;
        let mut sines = 1.0;
        for i in 0..dim {
            let x = if i < dim - 2 {
                sines * ang[i].cos()
            } else if i == dim - 2 {
                sines * ang[dim - 2].cos()
            } else {
                sines * ang[dim - 2].sin()
            };
            if i < dim - 2 {
                sines *= ang[i].sin();
            }
            prod *= x.powi(pw[i] as i32);
        }
        prod
    }
    let total: u32 = pw.iter().sum();
    let radial = rule.integrate(0.0, cutoff, |r| r.powi(dim as i32 - 1 + total as i32));
    let ang = angles(&rule, dim, 0, &mut Vec::new(), &pw);
    radial * ang / (2.0 * std::f64::consts::PI).powi(dim as i32)
}

/// Numeric value of a symbolic moment component at integer `D`.
pub fn moment_component_f64(m: &InnerMoment, dim: u32, cutoff: &Rational, components: &[usize]) -> Result<f64> {
    let mut env = NumericEnv {
        inner_dim: dim as usize,
        ..NumericEnv::default()
    };
    env.scalars.insert(Symbol::OmegaD, Rational::from_integer(1.into()));
    env.scalars.insert(Symbol::Lambda, cutoff.clone());
    let free: BTreeMap<String, usize> = MOMENT_LABELS
        .iter()
        .zip(components)
        .map(|(l, c)| (l.to_string(), *c))
        .collect();
    let v = m.result.eval(&env, &free)?;
    Ok(v.to_f64().unwrap_or(f64::NAN) * omega_d_f64(dim)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCheck {
    pub degree: u32,
    pub dim: u32,
    pub cutoff: String,
    pub components: Vec<usize>,
    pub symbolic: f64,
    pub quadrature: f64,
    pub rel_error: f64,
}

/// Compares one moment component with the quadrature oracle.
pub fn quadrature_check(n: u32, dim: u32, cutoff: &Rational, components: &[usize]) -> Result<QuadratureCheck> {
    let m = moment(n)?;
    let symbolic = moment_component_f64(&m, dim, cutoff, components)?;
    let mut powers = vec![0u32; dim as usize];
    for c in components {
        powers[*c] += 1;
    }
    let quadrature = quadrature_moment(dim as usize, cutoff.to_f64().unwrap_or(f64::NAN), &powers);
    let rel_error = if symbolic == 0.0 {
        quadrature.abs()
    } else {
        ((symbolic - quadrature) / symbolic).abs()
    };
    Ok(QuadratureCheck {
        degree: n,
        dim,
        cutoff: crate::symcore::coeff::rational_to_string(cutoff),
        components: components.to_vec(),
        symbolic,
        quadrature,
        rel_error,
    })
}

/// `Λ → ρΛ` multiplies the degree-`n` moment by `ρ^{D+n}`: every term is
/// homogeneous in `Λ` with exponent exactly `D + n`, which is checked
/// symbolically and confirmed numerically at `D = 2, 3, 4`.
pub fn scaling_check(n: u32, rho: &Rational) -> Result<bool> {
    if n % 2 == 1 {
        return Err(Error::Unsupported("scaling check needs an even degree".into()));
    }
    let m = moment(n)?;
    let want = Exp::dim_plus(n as i32);
    if m.result.terms().any(|(t, _)| t.mono.exponent(Symbol::Lambda) != want) {
        return Ok(false);
    }
    let comps = vec![0usize; n as usize];
    for dim in 2..=4u32 {
        let mut env = NumericEnv {
            inner_dim: dim as usize,
            ..NumericEnv::default()
        };
        env.scalars.insert(Symbol::OmegaD, Rational::from_integer(1.into()));
        let free: BTreeMap<String, usize> = MOMENT_LABELS
            .iter()
            .zip(&comps)
            .map(|(l, c)| (l.to_string(), *c))
            .collect();
        let base = Rational::new(3.into(), 2.into());
        env.scalars.insert(Symbol::Lambda, base.clone());
        let at = m.result.eval(&env, &free)?;
        env.scalars.insert(Symbol::Lambda, &base * rho);
        let scaled = m.result.eval(&env, &free)?;
        let factor = pow_int(rho, dim as i32 + n as i32);
        if scaled != at * factor {
            return Ok(false);
        }
    }
    Ok(true)
}

fn pow_int(r: &Rational, k: i32) -> Rational {
    let mut out = Rational::from_integer(1.into());
    for _ in 0..k.unsigned_abs() {
        out *= r.clone();
    }
    if k < 0 {
        out = out.recip();
    }
    out
}

/// How an inner operator acts: on inner vectors or on inner scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerRep {
    /// `(𝒜)^M_N = a^K ∇_K δ^M_N − ∇_N a^M`
    Vector,
    /// `𝒜 = a^K ∇_K`
    Scalar,
}

/// First-order inner operator built from a divergence-free field `a`,
/// which may carry extra Lorentz slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerOperator {
    pub field: String,
    pub lorentz: Vec<IndexLabel>,
    pub rep: InnerRep,
}

impl InnerOperator {
    pub fn new(field: &str) -> Self {
        InnerOperator::with_lorentz(field, vec![])
    }

    pub fn with_lorentz(field: &str, lorentz: Vec<IndexLabel>) -> Self {
        InnerOperator {
            field: field.into(),
            lorentz,
            rep: InnerRep::Vector,
        }
    }

    pub fn scalar(field: &str, lorentz: Vec<IndexLabel>) -> Self {
        InnerOperator {
            field: field.into(),
            lorentz,
            rep: InnerRep::Scalar,
        }
    }

    fn field(&self, inner: IndexLabel, derivs: Vec<IndexLabel>) -> TensorExpr {
        TensorExpr::atom(TensorAtom::Field {
            name: self.field.clone(),
            lorentz: self.lorentz.clone(),
            inner: vec![inner],
            derivs,
        })
    }

    /// Phase-space symbol `i a^K P_K δ^{up}_{down} − ∇_{down} a^{up}`, or
    /// `i a^K P_K` in the scalar representation.
    fn symbol(&self, up: &str, down: &str, k: &str) -> TensorExpr {
        let i = TensorExpr::sym(Symbol::I, Exp::int(1));
        let lead = i
            .times(&self.field(IndexLabel::iu(k), vec![]))
            .times(&TensorExpr::kk(P_LEG, IndexLabel::id(k)));
        match self.rep {
            InnerRep::Scalar => lead,
            InnerRep::Vector => {
                lead.times(&TensorExpr::delta(IndexLabel::iu(up), IndexLabel::id(down)))
                    - self.field(IndexLabel::iu(up), vec![IndexLabel::id(down)])
            }
        }
    }

    /// `∂_{P_J}` of the symbol.
    fn symbol_dp(&self, up: &str, down: &str, j: &str) -> TensorExpr {
        let da = TensorExpr::sym(Symbol::I, Exp::int(1)).times(&self.field(IndexLabel::iu(j), vec![]));
        match self.rep {
            InnerRep::Scalar => da,
            InnerRep::Vector => da.times(&TensorExpr::delta(IndexLabel::iu(up), IndexLabel::id(down))),
        }
    }
}

/// Applies `∇_l` to every field atom.
fn nabla(e: &TensorExpr, l: &IndexLabel) -> TensorExpr {
    let mut out = TensorExpr::zero();
    for (t, c) in e.terms() {
        for (idx, (a, p)) in t.atoms.iter().enumerate() {
            let TensorAtom::Field { name, lorentz, inner, derivs } = a else {
                continue;
            };
            let mut d = derivs.clone();
            d.push(l.clone());
            let da = TensorAtom::Field {
                name: name.clone(),
                lorentz: lorentz.clone(),
                inner: inner.clone(),
                derivs: d,
            };
            let mut acc = TensorExpr::from_term(Term { atoms: vec![], mono: t.mono.clone() }, c * &Coeff::int(*p as i64));
            for (j, (b, q)) in t.atoms.iter().enumerate() {
                let q = if j == idx { q - 1 } else { *q };
                acc = acc.times(&TensorExpr::atom_pow(b.clone(), q));
            }
            out = out + acc.times(&TensorExpr::atom(da));
        }
    }
    out
}

/// Replaces the `P` dependence by the ball moments.
fn integrate_p(e: &TensorExpr) -> Result<TensorExpr> {
    let mut out = TensorExpr::zero();
    for (t, c) in e.terms() {
        let mut labels = Vec::new();
        let mut rest = TensorExpr::from_term(Term { atoms: vec![], mono: t.mono.clone() }, c.clone());
        let mut fresh = 0;
        for (a, p) in &t.atoms {
            match a {
                TensorAtom::InnerMomentum { leg, index } if *leg == P_LEG => {
                    for _ in 0..*p {
                        labels.push(index.clone());
                    }
                }
                TensorAtom::Dot { a: 0, b: 0, space: Space::Inner } => {
                    for _ in 0..*p {
                        fresh += 1;
                        let n = format!("p{fresh}");
                        labels.push(IndexLabel::iu(&n));
                        labels.push(IndexLabel::id(&n));
                    }
                }
                _ => rest = rest.times(&TensorExpr::atom_pow(a.clone(), *p)),
            }
        }
        out = out + rest.times(&moment_with(&labels)?.result);
    }
    out.canonicalize()
}

/// Moves every inner derivative onto the first field of each term
/// (integration by parts over inner space), then drops divergences
/// `∇_M a^M` of the divergence-free fields.
pub fn reduce_divergence_free(e: &TensorExpr) -> Result<TensorExpr> {
    let mut out = TensorExpr::zero();
    for (t, c) in e.canonicalize()?.terms() {
        let mut fields = Vec::new();
        let mut rest = TensorExpr::from_term(Term { atoms: vec![], mono: t.mono.clone() }, c.clone());
        for (a, p) in &t.atoms {
            if matches!(a, TensorAtom::Field { .. }) {
                for _ in 0..*p {
                    fields.push(a.clone());
                }
            } else {
                rest = rest.times(&TensorExpr::atom_pow(a.clone(), *p));
            }
        }
        if fields.is_empty() {
            out = out + rest;
            continue;
        }
        let mut sign = 1i64;
        let mut moved = Vec::new();
        for f in fields.iter_mut().skip(1) {
            if let TensorAtom::Field { derivs, .. } = f {
                let inner: Vec<IndexLabel> = derivs.iter().filter(|d| d.space == Space::Inner).cloned().collect();
                derivs.retain(|d| d.space != Space::Inner);
                if inner.len() % 2 == 1 {
                    sign = -sign;
                }
                moved.extend(inner);
            }
        }
        if let TensorAtom::Field { derivs, .. } = &mut fields[0] {
            derivs.extend(moved);
        }
        let mut term = rest.scale(&Coeff::int(sign));
        for f in fields {
            term = term.times(&TensorExpr::atom(f));
        }
        out = out + term;
    }
    let out = out.canonicalize()?;
    Ok(out.filter_terms(|t| {
        !t.atoms.iter().any(|(a, _)| match a {
            TensorAtom::Field { inner, derivs, .. } => inner
                .iter()
                .any(|i| derivs.iter().any(|d| d.name == i.name && d.space == Space::Inner)),
            _ => false,
        })
    }))
}

/// `Tr_{XΛ}{op_a · op_b}` per unit inner volume: the symbols are composed
/// exactly (both are first order in `P`), traced, integrated over the ball,
/// and reduced with `∇·a = ∇·b = 0`.
pub fn trace_quadratic(op_a: &InnerOperator, op_b: &InnerOperator) -> Result<TensorExpr> {
    if op_a.rep != op_b.rep {
        return Err(Error::Unsupported("trace of operators in different representations".into()));
    }
    let sa = op_a.symbol("M", "R", "K");
    let sb = op_b.symbol("R", "M", "L");
    let minus_i = TensorExpr::sym(Symbol::I, Exp::int(1)).scale(&Coeff::int(-1));
    let comp = sa.times(&sb)
        + minus_i
            .times(&op_a.symbol_dp("M", "R", "J"))
            .times(&nabla(&sb, &IndexLabel::id("J")));
    reduce_divergence_free(&integrate_p(&comp.canonicalize()?)?)
}

/// `u(a, b) = −Ω_D/(D(D+2)) Λ^{D+2} a^K b_K`, the trace unit per inner
/// component.
pub fn trace_unit(op_a: &InnerOperator, op_b: &InnerOperator) -> Result<TensorExpr> {
    op_a.field(IndexLabel::iu("K"), vec![])
        .times(&op_b.field(IndexLabel::id("K"), vec![]))
        .times(&TensorExpr::sym(Symbol::OmegaD, Exp::int(1)))
        .times(&TensorExpr::sym(Symbol::Lambda, Exp::dim_plus(2)))
        .scale(&(-moment_scalar(2)))
        .canonicalize()
}

/// Ratio `trace_quadratic / trace_unit` when proportional.
pub fn trace_in_units(op_a: &InnerOperator, op_b: &InnerOperator) -> Result<Option<Coeff>> {
    let t = trace_quadratic(op_a, op_b)?;
    let u = trace_unit(op_a, op_b)?;
    if t.is_zero() {
        return Ok(Some(Coeff::zero()));
    }
    let (Some((tt, tc)), Some((ut, uc))) = (t.terms().next(), u.terms().next()) else {
        return Ok(None);
    };
    if t.len() != 1 || u.len() != 1 || tt != ut {
        return Ok(None);
    }
    Ok(Some(tc / uc))
}

/// Dense polynomial in three inner coordinates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly3(BTreeMap<[u32; 3], Rational>);

impl Poly3 {
    pub fn zero() -> Self {
        Poly3::default()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn push(&mut self, e: [u32; 3], c: Rational) {
        let v = self.0.remove(&e).unwrap_or_else(Rational::zero) + c;
        if !v.is_zero() {
            self.0.insert(e, v);
        }
    }

    pub fn add(&self, o: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (e, c) in &o.0 {
            out.push(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly3 {
        Poly3(self.0.iter().map(|(e, c)| (*e, -c.clone())).collect())
    }

    pub fn mul(&self, o: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &o.0 {
                out.push([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }

    pub fn deriv(&self, i: usize) -> Poly3 {
        let mut out = Poly3::zero();
        for (e, c) in &self.0 {
            if e[i] > 0 {
                let mut ne = *e;
                ne[i] -= 1;
                out.push(ne, c * Rational::from_integer(e[i].into()));
            }
        }
        out
    }

    /// Random polynomial of total degree `≤ deg` with small rational
    /// coefficients.
    pub fn random(deg: u32, rng: &mut impl Rng) -> Poly3 {
        let mut out = Poly3::zero();
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                for c in 0..=(deg - a - b) {
                    let v = rng.gen_range(-5i64..=5);
                    out.push([a, b, c], Rational::from_integer(v.into()));
                }
            }
        }
        out
    }
}

pub type Field3 = [Poly3; 3];

pub fn divergence(f: &Field3) -> Poly3 {
    f[0].deriv(0).add(&f[1].deriv(1)).add(&f[2].deriv(2))
}

/// `∇ × ψ`, divergence-free by construction.
pub fn curl(psi: &Field3) -> Field3 {
    [
        psi[2].deriv(1).add(&psi[1].deriv(2).neg()),
        psi[0].deriv(2).add(&psi[2].deriv(0).neg()),
        psi[1].deriv(0).add(&psi[0].deriv(1).neg()),
    ]
}

/// `(𝒜 f)^M = a^K ∇_K f^M − (∇_N a^M) f^N`.
pub fn apply_inner_operator(a: &Field3, f: &Field3) -> Field3 {
    std::array::from_fn(|m| {
        let mut g = Poly3::zero();
        for k in 0..3 {
            g = g.add(&a[k].mul(&f[m].deriv(k)));
            g = g.add(&a[m].deriv(k).mul(&f[k]).neg());
        }
        g
    })
}

/// Random divergence-free field of degree `≤ deg`.
pub fn random_solenoidal(deg: u32, rng: &mut impl Rng) -> Field3 {
    let psi: Field3 = std::array::from_fn(|_| Poly3::random(deg + 1, rng));
    curl(&psi)
}

/// `∇·(𝒜 f) = 0` for divergence-free `a` and `f`.
pub fn endomorphism_check(a: &Field3, f: &Field3) -> bool {
    divergence(&apply_inner_operator(a, f)).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn moment_values() {
        let m0 = moment(0).unwrap().result;
        let want0 = TensorExpr::sym(Symbol::OmegaD, Exp::int(1))
            .times(&TensorExpr::sym(Symbol::Lambda, Exp::dim_plus(0)))
            .scale(&Coeff::d().inv());
        assert_eq!(m0, want0.canonicalize().unwrap());
        assert!(moment(1).unwrap().result.is_zero());
        assert!(moment(3).unwrap().result.is_zero());
        let m2 = moment(2).unwrap().result;
        let want2 = TensorExpr::delta(IndexLabel::iu("I"), IndexLabel::iu("J"))
            .times(&TensorExpr::sym(Symbol::OmegaD, Exp::int(1)))
            .times(&TensorExpr::sym(Symbol::Lambda, Exp::dim_plus(2)))
            .scale(&(Coeff::d() * Coeff::d_plus(2)).inv());
        assert_eq!(m2, want2.canonicalize().unwrap());
        assert_eq!(moment(4).unwrap().result.len(), 3);
        assert!(moment(6).is_err());
    }

    #[test]
    fn moment_trace_consistency() {
        // δ_{IJ} contracted against moment(2) gives the P² moment Ω_D Λ^{D+2}/(D+2)
        let m2 = moment(2).unwrap().result;
        let t = m2
            .times(&TensorExpr::delta(IndexLabel::id("I"), IndexLabel::id("J")))
            .canonicalize()
            .unwrap();
        let want = TensorExpr::sym(Symbol::OmegaD, Exp::int(1))
            .times(&TensorExpr::sym(Symbol::Lambda, Exp::dim_plus(2)))
            .scale(&Coeff::d_plus(2).inv());
        assert_eq!(t, want.canonicalize().unwrap());
    }

    #[test]
    fn omega_four() {
        assert_eq!(omega_d_exact(4).unwrap(), omega4_value());
        let w = omega_d_f64(3).unwrap();
        let direct = 4.0 * std::f64::consts::PI / (2.0 * std::f64::consts::PI).powi(3);
        assert!((w - direct).abs() < 1e-15);
    }

    #[test]
    fn quadrature_agrees() {
        for dim in 2..=4 {
            for cutoff in [q(1, 1), q(2, 1)] {
                for comps in [vec![], vec![0, 0], vec![1, 1], vec![0, 0, 0, 0], vec![0, 0, 1, 1]] {
                    let n = comps.len() as u32;
                    let c = quadrature_check(n, dim, &cutoff, &comps).unwrap();
                    assert!(c.rel_error <= 1e-9, "{c:?}");
                }
                let odd = quadrature_check(2, dim, &cutoff, &[0, 1]).unwrap();
                assert!(odd.symbolic == 0.0 && odd.quadrature.abs() < 1e-12, "{odd:?}");
            }
        }
    }

    #[test]
    fn scaling() {
        assert!(scaling_check(2, &q(2, 1)).unwrap());
        assert!(scaling_check(0, &q(7, 3)).unwrap());
        assert!(scaling_check(4, &q(3, 1)).unwrap());
    }

    #[test]
    fn trace_is_d_units() {
        let f = InnerOperator::new("F");
        assert_eq!(trace_in_units(&f, &f).unwrap(), Some(Coeff::d()));
        let g = InnerOperator::new("G");
        assert_eq!(trace_in_units(&f, &g).unwrap(), Some(Coeff::d()));
    }

    #[test]
    fn trace_is_bilinear() {
        let a = InnerOperator::new("a");
        let b = InnerOperator::new("b");
        let c = InnerOperator::new("c");
        let sum = trace_quadratic(&a, &b).unwrap() + trace_quadratic(&a, &c).unwrap();
        let fb = TensorExpr::atom(TensorAtom::Field {
            name: "b".into(),
            lorentz: vec![],
            inner: vec![IndexLabel::id("K")],
            derivs: vec![],
        });
        let fc = TensorExpr::atom(TensorAtom::Field {
            name: "c".into(),
            lorentz: vec![],
            inner: vec![IndexLabel::id("K")],
            derivs: vec![],
        });
        let fa = TensorExpr::atom(TensorAtom::Field {
            name: "a".into(),
            lorentz: vec![],
            inner: vec![IndexLabel::iu("K")],
            derivs: vec![],
        });
        let unit = TensorExpr::sym(Symbol::OmegaD, Exp::int(1))
            .times(&TensorExpr::sym(Symbol::Lambda, Exp::dim_plus(2)))
            .scale(&(-Coeff::d_plus(2).inv()));
        let want = fa.times(&(fb + fc)).times(&unit).canonicalize().unwrap();
        assert_eq!(sum.canonicalize().unwrap(), want);
    }

    #[test]
    fn lorentz_slots_are_carried() {
        let f = InnerOperator::with_lorentz("F", vec![IndexLabel::ld("mu"), IndexLabel::ld("nu")]);
        let g = InnerOperator::with_lorentz("F", vec![IndexLabel::lu("mu"), IndexLabel::lu("nu")]);
        assert_eq!(trace_in_units(&f, &g).unwrap(), Some(Coeff::d()));
    }

    #[test]
    fn endomorphism_on_solenoidal_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for deg in 1..=3 {
            let a = random_solenoidal(deg, &mut rng);
            let f = random_solenoidal(deg, &mut rng);
            assert!(divergence(&a).is_zero());
            assert!(endomorphism_check(&a, &f));
        }
        // a compressible coefficient breaks it
        let mut a = random_solenoidal(2, &mut rng);
        a[0] = a[0].add(&Poly3::random(1, &mut rng).mul(&Poly3(BTreeMap::from([([1, 0, 0], q(1, 1))]))));
        let f = random_solenoidal(2, &mut rng);
        assert!(!endomorphism_check(&a, &f));
    }

    #[test]
    fn scalar_trace_is_one_unit() {
        let f = InnerOperator::scalar("F", vec![IndexLabel::ld("mu"), IndexLabel::ld("nu")]);
        let g = InnerOperator::scalar("F", vec![IndexLabel::lu("mu"), IndexLabel::lu("nu")]);
        assert_eq!(trace_in_units(&f, &g).unwrap(), Some(Coeff::one()));
        assert!(trace_quadratic(&f, &InnerOperator::new("F")).is_err());
    }

    #[test]
    fn zero_field_has_zero_trace() {
        let zero = TensorExpr::zero();
        assert!(reduce_divergence_free(&zero).unwrap().is_zero());
    }
}
