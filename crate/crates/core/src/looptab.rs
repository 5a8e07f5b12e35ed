//! Pole parts of dimensionally regularized one-loop spacetime integrals
//!
//! ```text
//! (2π)^{-4} ∫ d⁴p  p^{μ1}…p^{μr} / Π_j (p + q_j)²,   q_1 = 0, q_j = k_2 + … + k_j
//! ```
//!
//! Results are the coefficient of `Ω₄/ε`, including the factor `i` from the
//! Wick rotation. Legs of the external momenta are numbered 2..=N.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{Coeff, Exp, IndexLabel, Space, Symbol, TensorAtom, TensorExpr};

pub const MAX_RANK: usize = 4;
pub const MAX_DENOMS: usize = 4;

/// Default names of the numerator labels, in slot order.
pub const DEFAULT_LABELS: [&str; 4] = ["mu", "nu", "rho", "sigma"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopIntegral {
    pub rank: usize,
    pub denoms: usize,
    /// Upper Lorentz labels of the numerator factors.
    pub labels: Vec<IndexLabel>,
}

impl LoopIntegral {
    pub fn new(rank: usize, denoms: usize) -> Result<Self> {
        if rank > MAX_RANK || denoms > MAX_DENOMS || denoms == 0 {
            return Err(Error::Unsupported(format!(
                "rank {rank} with {denoms} denominators (supported: rank ≤ {MAX_RANK}, 1 ≤ denominators ≤ {MAX_DENOMS})"
            )));
        }
        let labels = DEFAULT_LABELS[..rank].iter().map(|n| IndexLabel::lu(n)).collect();
        Ok(LoopIntegral { rank, denoms, labels })
    }

    pub fn with_labels(rank: usize, denoms: usize, labels: Vec<IndexLabel>) -> Result<Self> {
        let mut li = LoopIntegral::new(rank, denoms)?;
        if labels.len() != rank || labels.iter().any(|l| l.space != Space::Lorentz) {
            return Err(Error::MalformedIndex {
                label: labels.first().map(|l| l.name.clone()).unwrap_or_default(),
                reason: "numerator labels must be one Lorentz label per loop-momentum factor".into(),
            });
        }
        li.labels = labels;
        Ok(li)
    }

    /// Mass dimension of the pole coefficient.
    pub fn scaling_power(&self) -> i32 {
        self.rank as i32 - 2 * self.denoms as i32 + 4
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergentPart {
    /// Coefficient of `Ω₄/ε`.
    pub pole_coeff: TensorExpr,
}

impl DivergentPart {
    /// `pole_coeff · Ω₄ · ε⁻¹`.
    pub fn full(&self) -> TensorExpr {
        self.pole_coeff
            .times(&TensorExpr::sym(Symbol::Omega4, Exp::int(1)))
            .times(&TensorExpr::sym(Symbol::Epsilon, Exp::int(-1)))
    }
}

fn i_unit() -> TensorExpr {
    TensorExpr::sym(Symbol::I, Exp::int(1))
}

fn k(leg: u32, l: &IndexLabel) -> TensorExpr {
    TensorExpr::k(leg, l.clone())
}

fn eta(a: &IndexLabel, b: &IndexLabel) -> TensorExpr {
    TensorExpr::eta(a.clone(), b.clone())
}

/// The published entries, keyed by `(rank, denominators)`.
fn table_entry(rank: usize, denoms: usize, l: &[IndexLabel]) -> Option<TensorExpr> {
    let c = |n, d| Coeff::frac(n, d);
    let e = match (rank, denoms) {
        (0, 1) => TensorExpr::zero(),
        (0, 2) => i_unit(),
        (1, 2) => k(2, &l[0]).scale(&c(-1, 2)).times(&i_unit()),
        (2, 2) => (k(2, &l[0]).times(&k(2, &l[1])).scale(&c(1, 3))
            - eta(&l[0], &l[1])
                .times(&TensorExpr::dot(2, 2, Space::Lorentz))
                .scale(&c(1, 12)))
        .times(&i_unit()),
        (2, 3) => eta(&l[0], &l[1]).scale(&c(1, 4)).times(&i_unit()),
        (3, 3) => {
            let v = |x: &IndexLabel| k(2, x).scale(&Coeff::int(2)) + k(3, x);
            (eta(&l[0], &l[1]).times(&v(&l[2]))
                + eta(&l[1], &l[2]).times(&v(&l[0]))
                + eta(&l[2], &l[0]).times(&v(&l[1])))
            .scale(&c(-1, 12))
            .times(&i_unit())
        }
        (4, 4) => (eta(&l[0], &l[1]).times(&eta(&l[2], &l[3]))
            + eta(&l[0], &l[2]).times(&eta(&l[1], &l[3]))
            + eta(&l[0], &l[3]).times(&eta(&l[1], &l[2])))
        .scale(&c(1, 24))
        .times(&i_unit()),
        _ => return None,
    };
    Some(e)
}

/// The seven `(rank, denominators)` pairs with published values.
pub const TABULATED: [(usize, usize); 7] = [(0, 1), (0, 2), (1, 2), (2, 2), (2, 3), (3, 3), (4, 4)];

/// Table lookup for published cases, the reduction oracle otherwise.
pub fn div_part(li: &LoopIntegral) -> Result<DivergentPart> {
    match table_entry(li.rank, li.denoms, &li.labels) {
        Some(e) => Ok(DivergentPart {
            pole_coeff: e.canonicalize()?,
        }),
        None => reduce_oracle(li),
    }
}

/// Polynomial in the Feynman parameters `x_1..x_N` with tensor coefficients.
#[derive(Clone, Debug, Default)]
struct XPoly {
    terms: BTreeMap<Vec<u32>, TensorExpr>,
}

impl XPoly {
    fn constant(n: usize, e: TensorExpr) -> Self {
        let mut p = XPoly::default();
        p.add_term(vec![0; n], e);
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, e: TensorExpr) {
        let slot = self.terms.entry(exps).or_default();
        *slot = std::mem::take(slot) + e;
    }

    fn add(mut self, other: XPoly) -> XPoly {
        for (x, e) in other.terms {
            self.add_term(x, e);
        }
        self
    }

    fn mul(&self, other: &XPoly) -> XPoly {
        let mut out = XPoly::default();
        for (xa, ea) in &self.terms {
            for (xb, eb) in &other.terms {
                let x = xa.iter().zip(xb).map(|(a, b)| a + b).collect();
                out.add_term(x, ea.times(eb));
            }
        }
        out
    }

    fn scale(&self, c: &Coeff) -> XPoly {
        XPoly {
            terms: self.terms.iter().map(|(x, e)| (x.clone(), e.scale(c))).collect(),
        }
    }

    /// `∫ dx δ(1 − Σx) Π x_j^{α_j} = Π α_j! / (N − 1 + |α|)!`
    fn integrate_simplex(&self, n: usize) -> TensorExpr {
        let fact = |m: u64| (1..=m).fold(Coeff::one(), |acc, v| &acc * &Coeff::int(v as i64));
        let mut out = TensorExpr::zero();
        for (x, e) in &self.terms {
            let num = x.iter().fold(Coeff::one(), |acc, a| &acc * &fact(*a as u64));
            let total: u64 = x.iter().map(|a| *a as u64).sum::<u64>() + n as u64 - 1;
            out = out + e.scale(&(&num / &fact(total)));
        }
        out
    }
}

fn unit_x(n: usize, j: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[j] = 1;
    v
}

/// `q_j` as a list of legs summed.
fn offset_legs(j: usize) -> Vec<u32> {
    (2..=j as u32 + 1).collect()
}

/// All ways of splitting `slots` into unordered pairs.
pub fn pairings(slots: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if slots.is_empty() {
        return vec![vec![]];
    }
    let first = slots[0];
    let mut out = Vec::new();
    for i in 1..slots.len() {
        let rest: Vec<usize> = slots[1..].iter().enumerate().filter(|(j, _)| *j + 1 != i).map(|(_, s)| *s).collect();
        for mut p in pairings(&rest) {
            p.insert(0, (first, slots[i]));
            out.push(p);
        }
    }
    out
}

/// Independent derivation by Feynman parametrization, shift, symmetric
/// tensor reduction and the pole of `∫ d^d l (l²)^a / (l² + Δ)^N`.
pub fn reduce_oracle(li: &LoopIntegral) -> Result<DivergentPart> {
    let n = li.denoms;
    let labels = &li.labels;
    // Q^μ = Σ_j x_j q_j^μ, as an x-polynomial per label
    let q_vec = |l: &IndexLabel| -> XPoly {
        let mut p = XPoly::default();
        for j in 0..n {
            let qj = offset_legs(j)
                .into_iter()
                .fold(TensorExpr::zero(), |acc, leg| acc + TensorExpr::k(leg, l.clone()));
            if !qj.is_zero() {
                p.add_term(unit_x(n, j), qj);
            }
        }
        p
    };
    let dot_legs = |a: &[u32], b: &[u32]| -> TensorExpr {
        let mut e = TensorExpr::zero();
        for x in a {
            for y in b {
                e = e + TensorExpr::dot(*x, *y, Space::Lorentz);
            }
        }
        e
    };
    // Δ = Σ_j x_j q_j² − Q·Q
    let mut delta = XPoly::default();
    for j in 0..n {
        let qj = offset_legs(j);
        delta.add_term(unit_x(n, j), dot_legs(&qj, &qj));
    }
    for a in 0..n {
        for b in 0..n {
            let mut x = vec![0; n];
            x[a] += 1;
            x[b] += 1;
            delta.add_term(x, dot_legs(&offset_legs(a), &offset_legs(b)).scale(&Coeff::int(-1)));
        }
    }

    let mut integrand = XPoly::default();
    let r = li.rank;
    for mask in 0u32..(1 << r) {
        let l_slots: Vec<usize> = (0..r).filter(|s| mask & (1 << s) != 0).collect();
        if l_slots.len() % 2 == 1 {
            continue;
        }
        let a = l_slots.len() / 2;
        let m = a as i64 + 2 - n as i64;
        if m < 0 {
            continue;
        }
        // (l^{μ1}…l^{μ2a}) → (l²)^a · Σ_pairings η…η / (d(d+2)…(d+2a−2)) at d = 4
        let mut sym = TensorExpr::zero();
        for p in pairings(&l_slots) {
            sym = sym
                + p.iter()
                    .fold(TensorExpr::one(), |acc, (x, y)| acc.times(&eta(&labels[*x], &labels[*y])));
        }
        let norm = (0..a).fold(Coeff::one(), |acc, i| &acc * &Coeff::int(4 + 2 * i as i64));
        let fact = |v: i64| (1..=v).fold(Coeff::one(), |acc, x| &acc * &Coeff::int(x));
        let sign = if m % 2 == 0 { Coeff::one() } else { Coeff::int(-1) };
        let pole = &(&fact(a as i64 + 1) * &sign) / &(&fact(m) * &norm);
        let mut term = XPoly::constant(n, sym.scale(&pole));
        for s in 0..r {
            if mask & (1 << s) == 0 {
                term = term.mul(&q_vec(&labels[s]).scale(&Coeff::int(-1)));
            }
        }
        for _ in 0..m {
            term = term.mul(&delta);
        }
        integrand = integrand.add(term);
    }
    let e = integrand.integrate_simplex(n).times(&i_unit());
    Ok(DivergentPart {
        pole_coeff: e.canonicalize()?,
    })
}

/// True when every atom of the pole coefficient is an external momentum,
/// a metric or an invariant, and each term has tensor rank `rank`.
pub fn lorentz_closed(dp: &DivergentPart, rank: usize) -> bool {
    dp.pole_coeff.terms().all(|(t, _)| {
        let mut free = 0;
        for (a, p) in &t.atoms {
            match a {
                TensorAtom::MetricEta { .. } => free += 2 * *p as usize,
                TensorAtom::Momentum { leg, .. } if *leg >= 2 => free += *p as usize,
                TensorAtom::Dot { a, b, space: Space::Lorentz } if *a >= 2 && *b >= 2 => {}
                _ => return false,
            }
        }
        free == rank
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_reproduces_published_table() {
        for (r, n) in TABULATED {
            let li = LoopIntegral::new(r, n).unwrap();
            let table = div_part(&li).unwrap();
            let oracle = reduce_oracle(&li).unwrap();
            assert_eq!(table, oracle, "rank {r}, {n} denominators");
        }
    }

    #[test]
    fn unsupported_sizes() {
        assert!(LoopIntegral::new(5, 2).is_err());
        assert!(LoopIntegral::new(1, 5).is_err());
    }

    #[test]
    fn convergent_cases_vanish() {
        let li = LoopIntegral::new(0, 3).unwrap();
        assert!(div_part(&li).unwrap().pole_coeff.is_zero());
        let li = LoopIntegral::new(1, 4).unwrap();
        assert!(div_part(&li).unwrap().pole_coeff.is_zero());
    }

    #[test]
    fn pairing_counts() {
        assert_eq!(pairings(&[0, 1]).len(), 1);
        assert_eq!(pairings(&[0, 1, 2, 3]).len(), 3);
    }
}
