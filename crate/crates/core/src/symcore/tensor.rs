//! Commutative indexed-tensor algebra.
//!
//! A [`TensorExpr`] is a sum of terms `coeff · monomial · Π atoms^power`.
//! Indexed atoms always carry power 1; dot products and propagator markers
//! may carry any integer power.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::coeff::{qi, Coeff, Rational};
use super::index::{IndexLabel, Space, Variance};
use super::scalar::{Exp, Monomial, Symbol};
use crate::error::{Error, Result};

/// Above this many dummy pairs in one term the canonical renaming falls back
/// to first-appearance order instead of a full permutation search.
const MAX_BRUTE_DUMMIES: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TensorAtom {
    MetricEta {
        a: IndexLabel,
        b: IndexLabel,
    },
    KronDelta {
        a: IndexLabel,
        b: IndexLabel,
    },
    Momentum {
        leg: u32,
        index: IndexLabel,
    },
    InnerMomentum {
        leg: u32,
        index: IndexLabel,
    },
    Dot {
        a: u32,
        b: u32,
        space: Space,
    },
    /// Inert `k² − iε` marker of leg `leg`.
    PropagatorDen {
        leg: u32,
    },
    /// Opaque external field with Lorentz and inner slots. `derivs` lists
    /// applied ∂ (Lorentz labels) and ∇ (inner labels); they commute.
    Field {
        name: String,
        lorentz: Vec<IndexLabel>,
        inner: Vec<IndexLabel>,
        derivs: Vec<IndexLabel>,
    },
}

impl TensorAtom {
    pub fn labels(&self) -> Vec<&IndexLabel> {
        match self {
            TensorAtom::MetricEta { a, b } | TensorAtom::KronDelta { a, b } => vec![a, b],
            TensorAtom::Momentum { index, .. } | TensorAtom::InnerMomentum { index, .. } => {
                vec![index]
            }
            TensorAtom::Dot { .. } | TensorAtom::PropagatorDen { .. } => vec![],
            TensorAtom::Field {
                lorentz,
                inner,
                derivs,
                ..
            } => lorentz.iter().chain(inner).chain(derivs).collect(),
        }
    }

    pub fn is_indexed(&self) -> bool {
        !matches!(self, TensorAtom::Dot { .. } | TensorAtom::PropagatorDen { .. })
    }

    pub fn map_labels(&self, mut f: impl FnMut(&IndexLabel) -> IndexLabel) -> TensorAtom {
        match self {
            TensorAtom::MetricEta { a, b } => TensorAtom::MetricEta { a: f(a), b: f(b) },
            TensorAtom::KronDelta { a, b } => TensorAtom::KronDelta { a: f(a), b: f(b) },
            TensorAtom::Momentum { leg, index } => TensorAtom::Momentum {
                leg: *leg,
                index: f(index),
            },
            TensorAtom::InnerMomentum { leg, index } => TensorAtom::InnerMomentum {
                leg: *leg,
                index: f(index),
            },
            TensorAtom::Field {
                name,
                lorentz,
                inner,
                derivs,
            } => TensorAtom::Field {
                name: name.clone(),
                lorentz: lorentz.iter().map(&mut f).collect(),
                inner: inner.iter().map(&mut f).collect(),
                derivs: derivs.iter().map(&mut f).collect(),
            },
            other => other.clone(),
        }
    }

    /// Orders the slots of symmetric atoms.
    fn normalized(self) -> TensorAtom {
        match self {
            TensorAtom::MetricEta { a, b } if b < a => TensorAtom::MetricEta { a: b, b: a },
            TensorAtom::KronDelta { a, b } if b < a => TensorAtom::KronDelta { a: b, b: a },
            TensorAtom::Dot { a, b, space } if b < a => TensorAtom::Dot { a: b, b: a, space },
            TensorAtom::Field {
                name,
                lorentz,
                inner,
                mut derivs,
            } => {
                derivs.sort();
                TensorAtom::Field {
                    name,
                    lorentz,
                    inner,
                    derivs,
                }
            }
            other => other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Term {
    pub atoms: Vec<(TensorAtom, i32)>,
    pub mono: Monomial,
}

impl Term {
    pub fn power_of(&self, pred: impl Fn(&TensorAtom) -> bool) -> i32 {
        self.atoms
            .iter()
            .filter(|(a, _)| pred(a))
            .map(|(_, p)| *p)
            .sum()
    }

    fn names(&self) -> BTreeSet<String> {
        self.atoms
            .iter()
            .flat_map(|(a, _)| a.labels().into_iter().map(|l| l.name.clone()))
            .collect()
    }

    fn label_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for (a, p) in &self.atoms {
            for l in a.labels() {
                *m.entry(l.name.clone()).or_insert(0) += (*p).max(1) as usize;
            }
        }
        m
    }

    fn dummies(&self) -> BTreeSet<String> {
        self.label_counts()
            .into_iter()
            .filter(|(_, c)| *c == 2)
            .map(|(n, _)| n)
            .collect()
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Term {
        Term {
            atoms: self
                .atoms
                .iter()
                .map(|(a, p)| {
                    (
                        a.map_labels(|l| match map.get(&l.name) {
                            Some(n) => l.renamed(n),
                            None => l.clone(),
                        }),
                        *p,
                    )
                })
                .collect(),
            mono: self.mono.clone(),
        }
    }
}

/// Picks names of the form `%n` not present in `taken`.
fn fresh_names(count: usize, taken: &BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count {
        let n = format!("%{k}");
        if !taken.contains(&n) {
            out.push(n);
        }
        k += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TensorExpr {
    terms: BTreeMap<Term, Coeff>,
}

impl TensorExpr {
    pub fn zero() -> Self {
        TensorExpr::default()
    }

    pub fn one() -> Self {
        TensorExpr::num(Coeff::one())
    }

    pub fn num(c: Coeff) -> Self {
        TensorExpr::from_term(Term::default(), c)
    }

    pub fn from_term(t: Term, c: Coeff) -> Self {
        let mut e = TensorExpr::zero();
        e.push(t, c);
        e
    }

    pub fn atom(a: TensorAtom) -> Self {
        TensorExpr::atom_pow(a, 1)
    }

    pub fn atom_pow(a: TensorAtom, p: i32) -> Self {
        if p == 0 {
            return TensorExpr::one();
        }
        TensorExpr::from_term(
            Term {
                atoms: vec![(a.normalized(), p)],
                mono: Monomial::one(),
            },
            Coeff::one(),
        )
    }

    pub fn sym(s: Symbol, e: Exp) -> Self {
        let (c, m) = Monomial::power(s, e);
        TensorExpr::from_term(
            Term {
                atoms: vec![],
                mono: m,
            },
            c,
        )
    }

    pub fn eta(a: IndexLabel, b: IndexLabel) -> Self {
        TensorExpr::atom(TensorAtom::MetricEta { a, b })
    }

    pub fn delta(a: IndexLabel, b: IndexLabel) -> Self {
        TensorExpr::atom(TensorAtom::KronDelta { a, b })
    }

    pub fn k(leg: u32, index: IndexLabel) -> Self {
        TensorExpr::atom(TensorAtom::Momentum { leg, index })
    }

    pub fn kk(leg: u32, index: IndexLabel) -> Self {
        TensorExpr::atom(TensorAtom::InnerMomentum { leg, index })
    }

    pub fn dot(a: u32, b: u32, space: Space) -> Self {
        TensorExpr::atom(TensorAtom::Dot { a, b, space })
    }

    pub fn dot_pow(a: u32, b: u32, space: Space, p: i32) -> Self {
        TensorExpr::atom_pow(TensorAtom::Dot { a, b, space }, p)
    }

    pub fn prop_den(leg: u32, p: i32) -> Self {
        TensorExpr::atom_pow(TensorAtom::PropagatorDen { leg }, p)
    }

    fn push(&mut self, t: Term, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&t) {
            Some(old) => &old + &c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(t, merged);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Coeff)> {
        self.terms.iter()
    }

    /// The coefficient when the expression is a bare number.
    pub fn as_coeff(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => {
                let (t, c) = self.terms.iter().next().unwrap();
                (t.atoms.is_empty() && t.mono.is_one()).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scale(&self, c: &Coeff) -> TensorExpr {
        if c.is_zero() {
            return TensorExpr::zero();
        }
        TensorExpr {
            terms: self.terms.iter().map(|(t, x)| (t.clone(), x * c)).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> TensorExpr {
        let mut out = TensorExpr::zero();
        for (t, c) in &self.terms {
            out.push(t.clone(), f(c));
        }
        out
    }

    fn mul_terms(a: &Term, b: &Term) -> (Coeff, Term) {
        let taken_a = a.names();
        let taken_b = b.names();
        let all: BTreeSet<String> = taken_a.union(&taken_b).cloned().collect();
        let clash_b: Vec<String> = b.dummies().into_iter().filter(|n| taken_a.contains(n)).collect();
        let clash_a: Vec<String> = a.dummies().into_iter().filter(|n| taken_b.contains(n)).collect();
        let fresh = fresh_names(clash_a.len() + clash_b.len(), &all);
        let ra = a.rename(&clash_a.iter().cloned().zip(fresh.iter().cloned()).collect());
        let rb = b.rename(
            &clash_b
                .iter()
                .cloned()
                .zip(fresh[clash_a.len()..].iter().cloned())
                .collect(),
        );
        let (sign, mono) = ra.mono.mul(&rb.mono);
        let mut atoms: BTreeMap<TensorAtom, i32> = BTreeMap::new();
        for (at, p) in ra.atoms.into_iter().chain(rb.atoms) {
            *atoms.entry(at).or_insert(0) += p;
        }
        let atoms = atoms.into_iter().filter(|(_, p)| *p != 0).collect();
        (sign, Term { atoms, mono })
    }

    /// Product with capture-avoiding renaming of dummy labels.
    pub fn times(&self, other: &TensorExpr) -> TensorExpr {
        let mut out = TensorExpr::zero();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &other.terms {
                let (s, t) = TensorExpr::mul_terms(ta, tb);
                out.push(t, &(ca * cb) * &s);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> TensorExpr {
        (0..n).fold(TensorExpr::one(), |acc, _| acc.times(self))
    }

    /// Unique canonical form; see the module docs for the rewriting rules.
    pub fn canonicalize(&self) -> Result<TensorExpr> {
        let mut out = TensorExpr::zero();
        for (t, c) in &self.terms {
            let (f, nt) = canonical_term(t)?;
            out.push(nt, c * &f);
        }
        out.check_free_consistency()?;
        Ok(out)
    }

    fn check_free_consistency(&self) -> Result<()> {
        let mut reference: Option<BTreeSet<IndexLabel>> = None;
        for t in self.terms.keys() {
            let free = term_free_labels(t);
            match &reference {
                None => reference = Some(free),
                Some(r) if *r != free => {
                    let bad = r
                        .symmetric_difference(&free)
                        .next()
                        .map(|l| l.name.clone())
                        .unwrap_or_default();
                    return Err(Error::MalformedIndex {
                        label: bad,
                        reason: "free indices differ between terms".into(),
                    });
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Free labels of a well-formed expression.
    pub fn free_indices(&self) -> Result<BTreeSet<IndexLabel>> {
        let c = self.canonicalize()?;
        Ok(c.terms.keys().next().map(term_free_labels).unwrap_or_default())
    }

    /// Contracts the free labels `upper` and `lower`.
    pub fn contract(&self, upper: &IndexLabel, lower: &IndexLabel) -> Result<TensorExpr> {
        if upper.space != lower.space {
            return Err(Error::SpaceMismatch(upper.name.clone(), lower.name.clone()));
        }
        if upper.variance == lower.variance {
            return Err(Error::MalformedIndex {
                label: lower.name.clone(),
                reason: "contraction needs one upper and one lower label".into(),
            });
        }
        let free = self.free_indices()?;
        for l in [upper, lower] {
            if !free.contains(l) {
                return Err(Error::NotFree(l.name.clone()));
            }
        }
        let metric = match upper.space {
            Space::Lorentz => TensorAtom::MetricEta {
                a: upper.flipped(),
                b: lower.flipped(),
            },
            Space::Inner => TensorAtom::KronDelta {
                a: upper.flipped(),
                b: lower.flipped(),
            },
        };
        self.times(&TensorExpr::atom(metric)).canonicalize()
    }

    /// Replaces a formal scalar symbol by an index-free expression.
    pub fn subst_symbol(&self, s: Symbol, value: &TensorExpr) -> Result<TensorExpr> {
        if !value.free_indices()?.is_empty() {
            return Err(Error::MalformedIndex {
                label: s.plain().into(),
                reason: "scalar binding must be index-free".into(),
            });
        }
        let mut out = TensorExpr::zero();
        for (t, c) in &self.terms {
            let e = t.mono.exponent(s);
            if e.is_zero() {
                out.push(t.clone(), c.clone());
                continue;
            }
            if e.d != 0 {
                return Err(Error::Unsupported(format!(
                    "substituting {} raised to a D-dependent power",
                    s.plain()
                )));
            }
            let factor = if e.c >= 0 {
                value.pow(e.c as u32)
            } else {
                value.inverse_monomial()?.pow((-e.c) as u32)
            };
            let rest = TensorExpr::from_term(
                Term {
                    atoms: t.atoms.clone(),
                    mono: t.mono.without(s),
                },
                c.clone(),
            );
            out = out + rest.times(&factor);
        }
        out.canonicalize()
    }

    fn inverse_monomial(&self) -> Result<TensorExpr> {
        if self.terms.len() != 1 {
            return Err(Error::Unsupported("inverting a sum".into()));
        }
        let (t, c) = self.terms.iter().next().unwrap();
        if t.atoms.iter().any(|(a, _)| a.is_indexed()) {
            return Err(Error::Unsupported("inverting an indexed atom".into()));
        }
        let (s, m) = t.mono.inv();
        Ok(TensorExpr::from_term(
            Term {
                atoms: t.atoms.iter().map(|(a, p)| (a.clone(), -p)).collect(),
                mono: m,
            },
            &c.inv() * &s,
        ))
    }

    /// Replaces momentum `leg` in `space` by `Σ c_j · k_j`. An empty
    /// combination sets it to zero. Propagator markers are left untouched.
    pub fn subst_momentum(&self, leg: u32, space: Space, combo: &[(Coeff, u32)]) -> Result<TensorExpr> {
        let mut out = TensorExpr::zero();
        for (t, c) in &self.terms {
            let mut acc = TensorExpr::from_term(
                Term {
                    atoms: vec![],
                    mono: t.mono.clone(),
                },
                c.clone(),
            );
            for (a, p) in &t.atoms {
                let factor = match a {
                    TensorAtom::Momentum { leg: l, index } if *l == leg && space == Space::Lorentz => {
                        linear_combo(combo, |j| TensorExpr::k(j, index.clone()))
                    }
                    TensorAtom::InnerMomentum { leg: l, index } if *l == leg && space == Space::Inner => {
                        linear_combo(combo, |j| TensorExpr::kk(j, index.clone()))
                    }
                    TensorAtom::Dot { a: x, b: y, space: sp } if *sp == space && (*x == leg || *y == leg) => {
                        if *p < 0 {
                            return Err(Error::Unsupported(format!(
                                "substituting a momentum inside an inverse invariant of leg {leg}"
                            )));
                        }
                        let side = |v: u32| -> Vec<(Coeff, u32)> {
                            if v == leg {
                                combo.to_vec()
                            } else {
                                vec![(Coeff::one(), v)]
                            }
                        };
                        let (lx, ly) = (side(*x), side(*y));
                        let mut d = TensorExpr::zero();
                        for (cx, jx) in &lx {
                            for (cy, jy) in &ly {
                                d = d + TensorExpr::dot(*jx, *jy, *sp).scale(&(cx * cy));
                            }
                        }
                        d.pow(*p as u32)
                    }
                    _ => {
                        acc = acc.times(&TensorExpr::atom_pow(a.clone(), *p));
                        continue;
                    }
                };
                acc = acc.times(&factor);
            }
            out = out + acc;
        }
        out.canonicalize()
    }

    /// Swaps leg ids according to `perm` (old → new) throughout.
    pub fn relabel_legs(&self, perm: &BTreeMap<u32, u32>) -> TensorExpr {
        let f = |l: u32| perm.get(&l).copied().unwrap_or(l);
        let mut out = TensorExpr::zero();
        for (t, c) in &self.terms {
            let mut acc = TensorExpr::from_term(
                Term {
                    atoms: vec![],
                    mono: t.mono.clone(),
                },
                c.clone(),
            );
            for (a, p) in &t.atoms {
                let na = match a {
                    TensorAtom::Momentum { leg, index } => TensorAtom::Momentum {
                        leg: f(*leg),
                        index: index.clone(),
                    },
                    TensorAtom::InnerMomentum { leg, index } => TensorAtom::InnerMomentum {
                        leg: f(*leg),
                        index: index.clone(),
                    },
                    TensorAtom::Dot { a, b, space } => TensorAtom::Dot {
                        a: f(*a),
                        b: f(*b),
                        space: *space,
                    },
                    TensorAtom::PropagatorDen { leg } => TensorAtom::PropagatorDen { leg: f(*leg) },
                    other => other.clone(),
                };
                acc = acc.times(&TensorExpr::atom_pow(na, *p));
            }
            out = out + acc;
        }
        out
    }

    /// Renames free labels (by name) throughout.
    pub fn rename_labels(&self, map: &BTreeMap<String, String>) -> TensorExpr {
        let mut out = TensorExpr::zero();
        for (t, c) in &self.terms {
            let mut nt = t.rename(map);
            nt.atoms = nt.atoms.into_iter().map(|(a, p)| (a.normalized(), p)).collect();
            nt.atoms.sort();
            out.push(nt, c.clone());
        }
        out
    }

    /// Keeps only the terms for which `keep` holds.
    pub fn filter_terms(&self, keep: impl Fn(&Term) -> bool) -> TensorExpr {
        TensorExpr {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| keep(t))
                .map(|(t, c)| (t.clone(), c.clone()))
                .collect(),
        }
    }

    /// Componentwise numeric evaluation with the given free-index values.
    pub fn eval(&self, env: &NumericEnv, free: &BTreeMap<String, usize>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (t, c) in &self.terms {
            let coeff = c
                .eval_at(&qi(env.inner_dim as i64))
                .ok_or_else(|| Error::Evaluation("pole of the coefficient".into()))?;
            let mono = env.eval_monomial(&t.mono)?;
            let dummies: Vec<(String, Space)> = {
                let mut seen = BTreeMap::new();
                for (a, _) in &t.atoms {
                    for l in a.labels() {
                        seen.entry(l.name.clone()).or_insert((0usize, l.space)).0 += 1;
                    }
                }
                for (n, (cnt, _)) in &seen {
                    if *cnt == 1 && !free.contains_key(n) {
                        return Err(Error::Evaluation(format!("no value for free label `{n}`")));
                    }
                }
                seen.into_iter()
                    .filter(|(_, (cnt, _))| *cnt == 2)
                    .map(|(n, (_, s))| (n, s))
                    .collect()
            };
            let ranges: Vec<std::ops::Range<usize>> = dummies
                .iter()
                .map(|(_, s)| 0..env.range(*s))
                .collect();
            let mut sum = Rational::zero();
            let combos: Vec<Vec<usize>> = if ranges.is_empty() {
                vec![vec![]]
            } else {
                ranges.into_iter().multi_cartesian_product().collect()
            };
            for combo in combos {
                let mut assign = free.clone();
                for ((n, _), v) in dummies.iter().zip(combo) {
                    assign.insert(n.clone(), v);
                }
                let mut prod = Rational::one();
                for (a, p) in &t.atoms {
                    let v = env.eval_atom(a, &assign)?;
                    prod *= pow_rational(&v, *p)?;
                }
                sum += prod;
            }
            total += coeff * mono * sum;
        }
        Ok(total)
    }

    pub fn to_latex(&self) -> String {
        super::latex::tensor_to_latex(self)
    }

    pub fn from_latex(s: &str) -> Result<TensorExpr> {
        super::latex::tensor_from_latex(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tensor serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<TensorExpr> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn linear_combo(combo: &[(Coeff, u32)], f: impl Fn(u32) -> TensorExpr) -> TensorExpr {
    combo
        .iter()
        .fold(TensorExpr::zero(), |acc, (c, j)| acc + f(*j).scale(c))
}

fn pow_rational(v: &Rational, p: i32) -> Result<Rational> {
    if p < 0 && v.is_zero() {
        return Err(Error::Evaluation("division by zero".into()));
    }
    let base = if p < 0 { v.recip() } else { v.clone() };
    Ok((0..p.unsigned_abs()).fold(Rational::one(), |acc, _| acc * &base))
}

fn term_free_labels(t: &Term) -> BTreeSet<IndexLabel> {
    let counts = t.label_counts();
    t.atoms
        .iter()
        .flat_map(|(a, _)| a.labels())
        .filter(|l| counts.get(&l.name) == Some(&1))
        .cloned()
        .collect()
}

fn validate(atoms: &[TensorAtom]) -> Result<()> {
    let mut seen: BTreeMap<&str, Vec<&IndexLabel>> = BTreeMap::new();
    for a in atoms {
        for l in a.labels() {
            seen.entry(l.name.as_str()).or_default().push(l);
        }
    }
    for (name, ls) in seen {
        if name.is_empty() {
            return Err(Error::MalformedIndex {
                label: name.into(),
                reason: "empty label name".into(),
            });
        }
        match ls.len() {
            1 => {}
            2 => {
                if ls[0].space != ls[1].space {
                    return Err(Error::SpaceMismatch(name.into(), name.into()));
                }
                if ls[0].variance == ls[1].variance {
                    return Err(Error::MalformedIndex {
                        label: name.into(),
                        reason: "a contracted pair needs one upper and one lower slot".into(),
                    });
                }
            }
            n => {
                return Err(Error::MalformedIndex {
                    label: name.into(),
                    reason: format!("appears {n} times in one term"),
                })
            }
        }
    }
    Ok(())
}

fn replace_label(a: &TensorAtom, name: &str, with: &IndexLabel) -> TensorAtom {
    a.map_labels(|l| if l.name == name { with.clone() } else { l.clone() })
}

/// Eliminates metrics against their partners and fuses momentum pairs.
fn contract_metrics(atoms: &mut Vec<TensorAtom>, factor: &mut Coeff) {
    'outer: loop {
        for i in 0..atoms.len() {
            let (a, b, trace) = match &atoms[i] {
                TensorAtom::MetricEta { a, b } => (a.clone(), b.clone(), Coeff::int(4)),
                TensorAtom::KronDelta { a, b } => (a.clone(), b.clone(), Coeff::d()),
                _ => continue,
            };
            if a.name == b.name {
                atoms.remove(i);
                *factor = &*factor * &trace;
                continue 'outer;
            }
            for (x, other) in [(&a, &b), (&b, &a)] {
                let partner = (0..atoms.len())
                    .find(|&j| j != i && atoms[j].labels().iter().any(|l| l.name == x.name));
                if let Some(j) = partner {
                    atoms[j] = replace_label(&atoms[j], &x.name, other);
                    atoms.remove(i);
                    continue 'outer;
                }
            }
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                let fused = match (&atoms[i], &atoms[j]) {
                    (
                        TensorAtom::Momentum { leg: l1, index: x },
                        TensorAtom::Momentum { leg: l2, index: y },
                    ) if x.name == y.name => Some(TensorAtom::Dot {
                        a: *l1.min(l2),
                        b: *l1.max(l2),
                        space: Space::Lorentz,
                    }),
                    (
                        TensorAtom::InnerMomentum { leg: l1, index: x },
                        TensorAtom::InnerMomentum { leg: l2, index: y },
                    ) if x.name == y.name => Some(TensorAtom::Dot {
                        a: *l1.min(l2),
                        b: *l1.max(l2),
                        space: Space::Inner,
                    }),
                    _ => None,
                };
                if let Some(d) = fused {
                    atoms.remove(j);
                    atoms[i] = d;
                    continue 'outer;
                }
            }
        }
        break;
    }
}

fn canonical_term(t: &Term) -> Result<(Coeff, Term)> {
    let mut atoms = Vec::new();
    let mut scalars: BTreeMap<TensorAtom, i32> = BTreeMap::new();
    for (a, p) in &t.atoms {
        if a.is_indexed() {
            if *p < 0 {
                return Err(Error::MalformedIndex {
                    label: a.labels().first().map(|l| l.name.clone()).unwrap_or_default(),
                    reason: "indexed atom with negative power".into(),
                });
            }
            for _ in 0..*p {
                atoms.push(a.clone());
            }
        } else {
            *scalars.entry(a.clone().normalized()).or_insert(0) += p;
        }
    }
    validate(&atoms)?;
    let mut factor = Coeff::one();
    contract_metrics(&mut atoms, &mut factor);
    let mut indexed = Vec::new();
    for a in atoms {
        if a.is_indexed() {
            indexed.push(a);
        } else {
            *scalars.entry(a.normalized()).or_insert(0) += 1;
        }
    }
    let mut key = canonical_dummies(indexed);
    let mut all: Vec<(TensorAtom, i32)> = key.drain(..).map(|a| (a, 1)).collect();
    all.extend(scalars.into_iter().filter(|(_, p)| *p != 0));
    all.sort();
    Ok((
        factor,
        Term {
            atoms: all,
            mono: t.mono.clone(),
        },
    ))
}

fn canonical_dummies(atoms: Vec<TensorAtom>) -> Vec<TensorAtom> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for a in &atoms {
        for l in a.labels() {
            *counts.entry(l.name.clone()).or_insert(0) += 1;
        }
    }
    let dummies: Vec<String> = counts
        .into_iter()
        .filter(|(_, c)| *c == 2)
        .map(|(n, _)| n)
        .collect();
    let render = |order: &[usize]| -> Vec<TensorAtom> {
        let map: BTreeMap<&str, String> = dummies
            .iter()
            .zip(order)
            .map(|(n, k)| (n.as_str(), format!("#{}", k + 1)))
            .collect();
        let mut out: Vec<TensorAtom> = atoms
            .iter()
            .map(|a| {
                a.map_labels(|l| match map.get(l.name.as_str()) {
                    Some(n) => IndexLabel::new(n, l.space, Variance::Upper),
                    None => l.clone(),
                })
                .normalized()
            })
            .collect();
        out.sort();
        let mut seen = BTreeSet::new();
        out.into_iter()
            .map(|a| {
                a.map_labels(|l| {
                    if l.is_canonical_dummy() && !seen.insert(l.name.clone()) {
                        l.with_variance(Variance::Lower)
                    } else {
                        l.clone()
                    }
                })
            })
            .collect()
    };
    if dummies.is_empty() {
        let mut out = atoms;
        out.sort();
        return out;
    }
    if dummies.len() > MAX_BRUTE_DUMMIES {
        let order: Vec<usize> = (0..dummies.len()).collect();
        return render(&order);
    }
    (0..dummies.len())
        .permutations(dummies.len())
        .map(|p| render(&p))
        .min()
        .unwrap()
}

impl Add for TensorExpr {
    type Output = TensorExpr;
    fn add(mut self, rhs: TensorExpr) -> TensorExpr {
        for (t, c) in rhs.terms {
            self.push(t, c);
        }
        self
    }
}

impl Sub for TensorExpr {
    type Output = TensorExpr;
    fn sub(self, rhs: TensorExpr) -> TensorExpr {
        self + (-rhs)
    }
}

impl Neg for TensorExpr {
    type Output = TensorExpr;
    fn neg(self) -> TensorExpr {
        TensorExpr {
            terms: self.terms.into_iter().map(|(t, c)| (t, -c)).collect(),
        }
    }
}

impl Mul for TensorExpr {
    type Output = TensorExpr;
    fn mul(self, rhs: TensorExpr) -> TensorExpr {
        TensorExpr::times(&self, &rhs)
    }
}

impl<'a> Add<&'a TensorExpr> for &'a TensorExpr {
    type Output = TensorExpr;
    fn add(self, rhs: &TensorExpr) -> TensorExpr {
        self.clone() + rhs.clone()
    }
}

impl<'a> Sub<&'a TensorExpr> for &'a TensorExpr {
    type Output = TensorExpr;
    fn sub(self, rhs: &TensorExpr) -> TensorExpr {
        self.clone() - rhs.clone()
    }
}

impl<'a> Mul<&'a TensorExpr> for &'a TensorExpr {
    type Output = TensorExpr;
    fn mul(self, rhs: &TensorExpr) -> TensorExpr {
        TensorExpr::times(self, rhs)
    }
}

/// Values used at the numeric evaluation boundary.
#[derive(Clone, Debug, Default)]
pub struct NumericEnv {
    pub inner_dim: usize,
    /// Contravariant components `k^μ` per leg.
    pub lorentz: BTreeMap<u32, [Rational; 4]>,
    pub inner: BTreeMap<u32, Vec<Rational>>,
    pub scalars: BTreeMap<Symbol, Rational>,
    /// Field components keyed by name and the full index tuple
    /// (Lorentz, inner, derivatives; derivative order sorted by name).
    pub fields: BTreeMap<(String, Vec<usize>), Rational>,
}

impl NumericEnv {
    fn range(&self, s: Space) -> usize {
        match s {
            Space::Lorentz => 4,
            Space::Inner => self.inner_dim,
        }
    }

    fn eta(i: usize) -> Rational {
        if i == 0 {
            -Rational::one()
        } else {
            Rational::one()
        }
    }

    fn lorentz_of(&self, leg: u32) -> Result<&[Rational; 4]> {
        self.lorentz
            .get(&leg)
            .ok_or_else(|| Error::Evaluation(format!("no spacetime momentum for leg {leg}")))
    }

    fn inner_of(&self, leg: u32) -> Result<&Vec<Rational>> {
        let v = self
            .inner
            .get(&leg)
            .ok_or_else(|| Error::Evaluation(format!("no inner momentum for leg {leg}")))?;
        if v.len() != self.inner_dim {
            return Err(Error::Evaluation(format!("inner momentum of leg {leg} has wrong length")));
        }
        Ok(v)
    }

    fn eval_monomial(&self, m: &Monomial) -> Result<Rational> {
        let mut out = Rational::one();
        for (s, e) in m.factors() {
            if s == Symbol::I {
                return Err(Error::Evaluation("imaginary unit in a rational evaluation".into()));
            }
            let v = self
                .scalars
                .get(&s)
                .ok_or_else(|| Error::Evaluation(format!("no value for {}", s.plain())))?;
            let k = e.at_dim(self.inner_dim as i64);
            out *= pow_rational(v, k as i32)?;
        }
        Ok(out)
    }

    fn eval_atom(&self, a: &TensorAtom, assign: &BTreeMap<String, usize>) -> Result<Rational> {
        let val = |l: &IndexLabel| -> Result<usize> {
            assign
                .get(&l.name)
                .copied()
                .ok_or_else(|| Error::Evaluation(format!("no value for label `{}`", l.name)))
        };
        Ok(match a {
            TensorAtom::MetricEta { a, b } => {
                let (i, j) = (val(a)?, val(b)?);
                if i != j {
                    Rational::zero()
                } else if a.variance == b.variance {
                    NumericEnv::eta(i)
                } else {
                    Rational::one()
                }
            }
            TensorAtom::KronDelta { a, b } => {
                if val(a)? == val(b)? {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            TensorAtom::Momentum { leg, index } => {
                let i = val(index)?;
                let c = self.lorentz_of(*leg)?[i].clone();
                match index.variance {
                    Variance::Upper => c,
                    Variance::Lower => c * NumericEnv::eta(i),
                }
            }
            TensorAtom::InnerMomentum { leg, index } => self.inner_of(*leg)?[val(index)?].clone(),
            TensorAtom::Dot { a, b, space } => match space {
                Space::Lorentz => {
                    let (x, y) = (self.lorentz_of(*a)?, self.lorentz_of(*b)?);
                    (0..4).map(|i| NumericEnv::eta(i) * &x[i] * &y[i]).sum()
                }
                Space::Inner => {
                    let (x, y) = (self.inner_of(*a)?, self.inner_of(*b)?);
                    x.iter().zip(y).map(|(p, q)| p * q).sum()
                }
            },
            TensorAtom::PropagatorDen { leg } => {
                let x = self.lorentz_of(*leg)?;
                (0..4).map(|i| NumericEnv::eta(i) * &x[i] * &x[i]).sum()
            }
            TensorAtom::Field {
                name,
                lorentz,
                inner,
                derivs,
            } => {
                let mut idx = Vec::new();
                let mut sign = Rational::one();
                for l in lorentz.iter().chain(inner) {
                    let i = val(l)?;
                    if l.space == Space::Lorentz && l.variance == Variance::Lower {
                        sign *= NumericEnv::eta(i);
                    }
                    idx.push(i);
                }
                let mut ds: Vec<&IndexLabel> = derivs.iter().collect();
                ds.sort_by_key(|l| (l.space, val(l).unwrap_or(0)));
                for l in ds {
                    let i = val(l)?;
                    if l.space == Space::Lorentz && l.variance == Variance::Upper {
                        sign *= NumericEnv::eta(i);
                    }
                    idx.push(i);
                }
                let v = self
                    .fields
                    .get(&(name.clone(), idx))
                    .cloned()
                    .ok_or_else(|| Error::Evaluation(format!("no component of field `{name}`")))?;
                v * sign
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
struct AtomPow {
    atom: TensorAtom,
    power: i32,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: Coeff,
    monomial: Monomial,
    atoms: Vec<AtomPow>,
}

#[derive(Serialize, Deserialize)]
struct ExprRepr {
    terms: Vec<TermRepr>,
}

impl Serialize for TensorExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExprRepr {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| TermRepr {
                    coeff: c.clone(),
                    monomial: t.mono.clone(),
                    atoms: t
                        .atoms
                        .iter()
                        .map(|(a, p)| AtomPow {
                            atom: a.clone(),
                            power: *p,
                        })
                        .collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TensorExpr {
    fn deserialize<De: Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let repr = ExprRepr::deserialize(d)?;
        let mut out = TensorExpr::zero();
        for t in repr.terms {
            let mut atoms: Vec<(TensorAtom, i32)> = t
                .atoms
                .into_iter()
                .map(|ap| (ap.atom.normalized(), ap.power))
                .collect();
            atoms.sort();
            out.push(
                Term {
                    atoms,
                    mono: t.monomial,
                },
                t.coeff,
            );
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::index::IndexLabel as L;

    #[test]
    fn lorentz_and_inner_traces() {
        let e = TensorExpr::eta(L::lu("mu"), L::lu("nu")) * TensorExpr::eta(L::ld("mu"), L::ld("nu"));
        assert_eq!(e.canonicalize().unwrap(), TensorExpr::num(Coeff::int(4)));
        let d = TensorExpr::delta(L::iu("M"), L::iu("N")) * TensorExpr::delta(L::id("M"), L::id("N"));
        assert_eq!(d.canonicalize().unwrap(), TensorExpr::num(Coeff::d()));
    }

    #[test]
    fn momentum_contraction_identity() {
        let e = TensorExpr::k(1, L::ld("mu")) * TensorExpr::k(1, L::ld("nu")) * TensorExpr::eta(L::lu("mu"), L::lu("nu"))
            - TensorExpr::dot(1, 1, Space::Lorentz);
        assert!(e.canonicalize().unwrap().is_zero());
    }

    #[test]
    fn metric_lowers_index() {
        let e = TensorExpr::k(1, L::lu("mu")) * TensorExpr::eta(L::ld("mu"), L::ld("nu"));
        assert_eq!(e.canonicalize().unwrap(), TensorExpr::k(1, L::ld("nu")));
        let raw = TensorExpr::k(1, L::lu("mu")) * TensorExpr::eta(L::ld("rho"), L::ld("nu"));
        let c = raw.contract(&L::lu("mu"), &L::ld("rho")).unwrap();
        assert_eq!(c, TensorExpr::k(1, L::ld("nu")));
        let inner = TensorExpr::kk(2, L::iu("M")) * TensorExpr::delta(L::id("M"), L::id("N"));
        assert_eq!(inner.canonicalize().unwrap(), TensorExpr::kk(2, L::id("N")));
    }

    #[test]
    fn malformed_pairs_name_the_label() {
        let e = TensorExpr::k(1, L::lu("mu")) * TensorExpr::k(2, L::lu("mu"));
        match e.canonicalize() {
            Err(Error::MalformedIndex { label, .. }) => assert_eq!(label, "mu"),
            other => panic!("unexpected {other:?}"),
        }
        let triple = TensorExpr::from_term(
            Term {
                atoms: vec![
                    (TensorAtom::MetricEta { a: L::lu("mu"), b: L::ld("mu") }, 1),
                    (TensorAtom::Momentum { leg: 1, index: L::lu("mu") }, 1),
                ],
                mono: Monomial::one(),
            },
            Coeff::one(),
        );
        assert!(matches!(triple.canonicalize(), Err(Error::MalformedIndex { .. })));
        let mixed = TensorExpr::k(1, L::lu("a")) * TensorExpr::kk(1, L::id("a"));
        assert!(matches!(mixed.canonicalize(), Err(Error::SpaceMismatch(..))));
    }

    #[test]
    fn contract_errors() {
        let e = TensorExpr::k(1, L::lu("mu")) * TensorExpr::kk(1, L::id("M"));
        assert!(matches!(e.contract(&L::lu("mu"), &L::id("M")), Err(Error::SpaceMismatch(..))));
        assert!(matches!(e.contract(&L::lu("nu"), &L::ld("mu")), Err(Error::NotFree(_))));
    }

    #[test]
    fn dummy_renaming_is_invisible() {
        let f = |n: &str| TensorAtom::Field {
            name: "F".into(),
            lorentz: vec![L::lu(n), L::ld("nu")],
            inner: vec![],
            derivs: vec![],
        };
        let a = TensorExpr::atom(f("a")) * TensorExpr::k(1, L::ld("a"));
        let b = TensorExpr::atom(f("b")) * TensorExpr::k(1, L::ld("b"));
        assert_eq!(a.canonicalize().unwrap(), b.canonicalize().unwrap());
    }

    #[test]
    fn product_avoids_capture() {
        let a = TensorExpr::k(1, L::lu("mu")) * TensorExpr::k(2, L::ld("mu"));
        let sq = a.times(&a).canonicalize().unwrap();
        assert_eq!(sq, TensorExpr::dot_pow(1, 2, Space::Lorentz, 2));
    }

    #[test]
    fn momentum_substitution() {
        let e = TensorExpr::dot(1, 2, Space::Lorentz);
        let s = e
            .subst_momentum(2, Space::Lorentz, &[(Coeff::int(-1), 1), (Coeff::int(-1), 3)])
            .unwrap();
        let expect = (TensorExpr::dot(1, 1, Space::Lorentz) + TensorExpr::dot(1, 3, Space::Lorentz)).scale(&Coeff::int(-1));
        assert_eq!(s, expect.canonicalize().unwrap());
        let z = TensorExpr::kk(1, L::iu("M")).subst_momentum(1, Space::Inner, &[]).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn numeric_eval_respects_signature() {
        let mut env = NumericEnv {
            inner_dim: 2,
            ..Default::default()
        };
        env.lorentz.insert(1, [qi(2), qi(1), qi(0), qi(3)]);
        let e = TensorExpr::k(1, L::lu("mu")) * TensorExpr::k(1, L::ld("mu"));
        assert_eq!(e.eval(&env, &BTreeMap::new()).unwrap(), qi(-4 + 1 + 9));
        let c = e.canonicalize().unwrap();
        assert_eq!(c.eval(&env, &BTreeMap::new()).unwrap(), qi(6));
    }

    #[test]
    fn json_round_trip() {
        let e = (TensorExpr::k(1, L::lu("mu")) * TensorExpr::sym(Symbol::Lambda, Exp::int(2))
            + TensorExpr::k(2, L::lu("mu")).scale(&Coeff::frac(-1, 3)))
        .canonicalize()
        .unwrap();
        let back = TensorExpr::from_json(&e.to_json()).unwrap();
        assert_eq!(back, e);
    }
}
