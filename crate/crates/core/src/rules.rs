//! Momentum-space Feynman rules. All momenta are incoming.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{
    Coeff, Exp, IndexLabel, NumericEnv, Rational, Space, Symbol, TensorAtom, TensorExpr,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegKind {
    Gauge,
    GhostIn,
    GhostOut,
}

/// A vertex leg: momenta `k_id`, `K_id` and its index slots. Gauge legs use
/// a lower Lorentz and an upper inner label; ghost legs only the inner one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub id: u32,
    pub kind: LegKind,
    pub lorentz: Option<IndexLabel>,
    pub inner: IndexLabel,
}

impl Leg {
    pub fn gauge(id: u32, lorentz: &str, inner: &str) -> Leg {
        Leg {
            id,
            kind: LegKind::Gauge,
            lorentz: Some(IndexLabel::ld(lorentz)),
            inner: IndexLabel::iu(inner),
        }
    }

    pub fn ghost_in(id: u32, inner: &str) -> Leg {
        Leg {
            id,
            kind: LegKind::GhostIn,
            lorentz: None,
            inner: IndexLabel::iu(inner),
        }
    }

    pub fn ghost_out(id: u32, inner: &str) -> Leg {
        Leg {
            id,
            kind: LegKind::GhostOut,
            lorentz: None,
            inner: IndexLabel::iu(inner),
        }
    }

    fn mu(&self) -> IndexLabel {
        self.lorentz.clone().expect("gauge leg")
    }

    fn k(&self, index: IndexLabel) -> TensorExpr {
        TensorExpr::k(self.id, index)
    }

    fn kk(&self, index: IndexLabel) -> TensorExpr {
        TensorExpr::kk(self.id, index)
    }
}

/// `Σ_{legs} k = 0` in one space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conservation {
    pub space: Space,
    pub legs: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleResult {
    pub expr: TensorExpr,
    pub constraints: Vec<Conservation>,
}

impl RuleResult {
    fn new(expr: TensorExpr, legs: &[Leg]) -> Result<RuleResult> {
        let ids: Vec<u32> = legs.iter().map(|l| l.id).collect();
        Ok(RuleResult {
            expr: expr.canonicalize()?,
            constraints: vec![
                Conservation {
                    space: Space::Lorentz,
                    legs: ids.clone(),
                },
                Conservation {
                    space: Space::Inner,
                    legs: ids,
                },
            ],
        })
    }

    /// Eliminates the last leg's momenta in both spaces.
    pub fn on_shell(&self) -> Result<TensorExpr> {
        let mut e = self.expr.clone();
        for c in &self.constraints {
            let (last, rest) = c.legs.split_last().expect("nonempty");
            let combo: Vec<(Coeff, u32)> = rest.iter().map(|l| (Coeff::int(-1), *l)).collect();
            e = e.subst_momentum(*last, c.space, &combo)?;
        }
        Ok(e)
    }
}

fn lambda2() -> TensorExpr {
    TensorExpr::sym(Symbol::Lambda, Exp::int(2))
}

fn xi() -> TensorExpr {
    TensorExpr::sym(Symbol::Xi, Exp::int(1))
}

/// The formal gauge parameter `ξ` or a fixed rational value.
pub fn xi_value(v: Option<Rational>) -> TensorExpr {
    match v {
        Some(r) => TensorExpr::num(Coeff::from_rational(r)),
        None => xi(),
    }
}

/// `(η_{μν} − (1−ξ) k_μ k_ν / k²) δ^{MN} / (k² − iε)`.
pub fn gauge_propagator(xi: &TensorExpr, leg: u32, mu: (&str, &str), nu: (&str, &str)) -> Result<TensorExpr> {
    let (m, n) = (IndexLabel::ld(mu.0), IndexLabel::ld(nu.0));
    let one_minus_xi = TensorExpr::one() - xi.clone();
    let kk = TensorExpr::k(leg, m.clone())
        .times(&TensorExpr::k(leg, n.clone()))
        .times(&TensorExpr::dot_pow(leg, leg, Space::Lorentz, -1));
    let proj = TensorExpr::eta(m, n) - one_minus_xi.times(&kk);
    proj.times(&TensorExpr::delta(IndexLabel::iu(mu.1), IndexLabel::iu(nu.1)))
        .times(&TensorExpr::prop_den(leg, -1))
        .canonicalize()
}

/// `δ^R_S / (k² − iε)`.
pub fn ghost_propagator(leg: u32, r: &str, s: &str) -> Result<TensorExpr> {
    TensorExpr::delta(IndexLabel::iu(r), IndexLabel::id(s))
        .times(&TensorExpr::prop_den(leg, -1))
        .canonicalize()
}

fn require(legs: &[Leg], kinds: &[LegKind], what: &str) -> Result<()> {
    let got: Vec<LegKind> = legs.iter().map(|l| l.kind).collect();
    if got != kinds {
        return Err(Error::WrongLegKinds(format!("{what} expects {kinds:?}, got {got:?}")));
    }
    for l in legs {
        if l.kind == LegKind::Gauge && l.lorentz.is_none() {
            return Err(Error::WrongLegKinds(format!("gauge leg {} without a Lorentz label", l.id)));
        }
    }
    if !legs.iter().map(|l| l.id).all_unique() {
        return Err(Error::WrongLegKinds(format!("{what}: leg ids must be distinct")));
    }
    Ok(())
}

/// Trilinear gauge vertex with legs `(μM, νN, λL)`.
pub fn vertex3(legs: &[Leg; 3]) -> Result<RuleResult> {
    require(legs, &[LegKind::Gauge; 3], "vertex3")?;
    let [l1, l2, l3] = legs;
    let (mu, nu, la) = (l1.mu(), l2.mu(), l3.mu());
    let (m, n, l) = (l1.inner.clone(), l2.inner.clone(), l3.inner.clone());
    let eta = |a: &IndexLabel, b: &IndexLabel| TensorExpr::eta(a.clone(), b.clone());
    let delta = |a: &IndexLabel, b: &IndexLabel| TensorExpr::delta(a.clone(), b.clone());
    let t1 = l1
        .kk(l.clone())
        .times(&delta(&m, &n))
        .times(&(l2.k(la.clone()).times(&eta(&mu, &nu)) - l2.k(mu.clone()).times(&eta(&nu, &la))));
    let t2 = l2
        .kk(m.clone())
        .times(&delta(&n, &l))
        .times(&(l3.k(mu.clone()).times(&eta(&nu, &la)) - l3.k(nu.clone()).times(&eta(&la, &mu))));
    let t3 = l3
        .kk(n.clone())
        .times(&delta(&l, &m))
        .times(&(l1.k(nu.clone()).times(&eta(&la, &mu)) - l1.k(la.clone()).times(&eta(&mu, &nu))));
    let e = (t1 + t2 + t3).times(&lambda2()).scale(&Coeff::int(-2));
    RuleResult::new(e, legs)
}

/// One field assignment of the cubic action term: field `a` in the curl,
/// `b` in the undifferentiated slot, `c` under `∇`.
fn cubic_assignment(a: &Leg, b: &Leg, c: &Leg) -> TensorExpr {
    let eta = |x: &Leg, y: &Leg| TensorExpr::eta(x.mu(), y.mu());
    c.kk(b.inner.clone())
        .times(&TensorExpr::delta(a.inner.clone(), c.inner.clone()))
        .times(&(a.k(b.mu()).times(&eta(a, c)) - a.k(c.mu()).times(&eta(a, b))))
}

/// Trilinear vertex obtained by differentiating the cubic action term with
/// respect to all three fields: `−Λ²` times the sum over the six field
/// assignments. [`vertex3`] is twice its cyclic half.
pub fn vertex3_from_action(legs: &[Leg; 3]) -> Result<RuleResult> {
    require(legs, &[LegKind::Gauge; 3], "vertex3")?;
    let mut e = TensorExpr::zero();
    for p in (0..3).permutations(3) {
        e = e + cubic_assignment(&legs[p[0]], &legs[p[1]], &legs[p[2]]);
    }
    RuleResult::new(e.times(&lambda2()).scale(&Coeff::int(-1)), legs)
}

/// `−2Λ²` times the cyclic assignments; equals [`vertex3`] term by term.
pub fn vertex3_cyclic_half(legs: &[Leg; 3]) -> Result<RuleResult> {
    require(legs, &[LegKind::Gauge; 3], "vertex3")?;
    let [l1, l2, l3] = legs;
    let e = cubic_assignment(l2, l3, l1) + cubic_assignment(l3, l1, l2) + cubic_assignment(l1, l2, l3);
    RuleResult::new(e.times(&lambda2()).scale(&Coeff::int(-2)), legs)
}

/// Quadrilinear gauge vertex with legs `(μM, νN, ρR, σS)`.
pub fn vertex4(legs: &[Leg; 4]) -> Result<RuleResult> {
    require(legs, &[LegKind::Gauge; 4], "vertex4")?;
    let [l1, l2, l3, l4] = legs;
    let (mu, nu, rho, sig) = (l1.mu(), l2.mu(), l3.mu(), l4.mu());
    let (m, n, r, s) = (
        l1.inner.clone(),
        l2.inner.clone(),
        l3.inner.clone(),
        l4.inner.clone(),
    );
    let eta = |a: &IndexLabel, b: &IndexLabel| TensorExpr::eta(a.clone(), b.clone());
    let delta = |a: &IndexLabel, b: &IndexLabel| TensorExpr::delta(a.clone(), b.clone());
    let kk = |leg: &Leg, i: &IndexLabel, other: &Leg, j: &IndexLabel, d: TensorExpr| {
        leg.kk(i.clone()).times(&other.kk(j.clone())).times(&d)
    };
    let ee = |a, b, c, d| eta(a, b).times(&eta(c, d));
    let g1 = kk(l1, &r, l2, &s, delta(&m, &n)) - kk(l2, &s, l3, &m, delta(&n, &r))
        + kk(l3, &m, l4, &n, delta(&r, &s))
        - kk(l1, &r, l4, &n, delta(&m, &s));
    let g2 = kk(l1, &s, l2, &r, delta(&m, &n)) - kk(l1, &s, l3, &n, delta(&m, &r))
        + kk(l3, &n, l4, &m, delta(&r, &s))
        - kk(l2, &r, l4, &m, delta(&n, &s));
    let g3 = kk(l1, &n, l3, &s, delta(&m, &r)) - kk(l1, &n, l4, &r, delta(&m, &s))
        + kk(l2, &m, l4, &r, delta(&n, &s))
        - kk(l2, &m, l3, &s, delta(&n, &r));
    let e = g1.times(&(ee(&mu, &nu, &rho, &sig) - ee(&mu, &sig, &nu, &rho)))
        + g2.times(&(ee(&mu, &nu, &rho, &sig) - ee(&mu, &rho, &nu, &sig)))
        + g3.times(&(ee(&mu, &rho, &nu, &sig) - ee(&mu, &sig, &nu, &rho)));
    RuleResult::new(e.times(&lambda2()).scale(&Coeff::int(-1)), legs)
}

/// Ghost-gauge vertex with legs `(ghost_out R, ghost_in S, gauge μM)`.
pub fn vertex_ghost(legs: &[Leg; 3]) -> Result<RuleResult> {
    require(
        legs,
        &[LegKind::GhostOut, LegKind::GhostIn, LegKind::Gauge],
        "vertex_ghost",
    )?;
    let [l1, l2, l3] = legs;
    let (r, s, m) = (l1.inner.clone(), l2.inner.clone(), l3.inner.clone());
    let e = (l2.kk(m.clone()).times(&TensorExpr::delta(r.clone(), s.clone()))
        - l3.kk(s).times(&TensorExpr::delta(m, r)))
    .times(&l1.k(l3.mu()))
    .times(&lambda2())
    .scale(&Coeff::int(-1));
    RuleResult::new(e, legs)
}

pub fn default_gauge_legs<const N: usize>() -> [Leg; N] {
    const NAMES: [(&str, &str); 4] = [("mu", "M"), ("nu", "N"), ("lambda", "L"), ("sigma", "S")];
    const NAMES4: [(&str, &str); 4] = [("mu", "M"), ("nu", "N"), ("rho", "R"), ("sigma", "S")];
    let names = if N == 4 { NAMES4 } else { NAMES };
    std::array::from_fn(|i| Leg::gauge(i as u32 + 1, names[i].0, names[i].1))
}

pub fn default_ghost_legs() -> [Leg; 3] {
    [Leg::ghost_out(1, "R"), Leg::ghost_in(2, "S"), Leg::gauge(3, "mu", "M")]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoseReport {
    pub permutation: Vec<usize>,
    /// Identical canonical forms without using any constraint.
    pub literal: bool,
    /// Equal values for conserved momenta and arbitrary polarizations.
    pub conserved: bool,
    /// Equal values once inner polarizations are transverse, `K_i·e_i = 0`.
    pub inner_transverse: bool,
    /// Equal values once Lorentz polarizations are transverse as well.
    pub physical: bool,
}

/// Exact-rational kinematics for numeric vertex evaluation.
#[derive(Clone, Debug)]
pub struct Kinematics {
    pub env: NumericEnv,
    pub pol_lorentz: BTreeMap<u32, [Rational; 4]>,
    pub pol_inner: BTreeMap<u32, Vec<Rational>>,
}

fn small_rational(rng: &mut impl Rng) -> Rational {
    Rational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=4).into())
}

fn eta_dot(a: &[Rational; 4], b: &[Rational; 4]) -> Rational {
    -(&a[0] * &b[0]) + (1..4).map(|i| &a[i] * &b[i]).sum::<Rational>()
}

fn euclid_dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Kinematics {
    /// Random conserved momenta for `legs` at inner dimension `dim`;
    /// polarizations are projected transverse as requested.
    pub fn random(
        legs: &[Leg],
        dim: usize,
        inner_transverse: bool,
        lorentz_transverse: bool,
        rng: &mut impl Rng,
    ) -> Kinematics {
        let mut env = NumericEnv {
            inner_dim: dim,
            ..NumericEnv::default()
        };
        env.scalars.insert(Symbol::Lambda, Rational::from_integer(3.into()));
        let (last, rest) = legs.split_last().expect("legs");
        let mut sum_k: [Rational; 4] = std::array::from_fn(|_| Rational::from_integer(0.into()));
        let mut sum_kk = vec![Rational::from_integer(0.into()); dim];
        for l in rest {
            let k: [Rational; 4] = std::array::from_fn(|_| small_rational(rng));
            let kk: Vec<Rational> = (0..dim).map(|_| small_rational(rng)).collect();
            for i in 0..4 {
                sum_k[i] += &k[i];
            }
            for i in 0..dim {
                sum_kk[i] += &kk[i];
            }
            env.lorentz.insert(l.id, k);
            env.inner.insert(l.id, kk);
        }
        env.lorentz.insert(last.id, sum_k.map(|x| -x));
        env.inner.insert(last.id, sum_kk.into_iter().map(|x| -x).collect());
        let mut pol_lorentz = BTreeMap::new();
        let mut pol_inner = BTreeMap::new();
        for l in legs {
            let mut e: [Rational; 4] = std::array::from_fn(|_| small_rational(rng));
            let k = &env.lorentz[&l.id];
            let kk2 = eta_dot(k, k);
            if lorentz_transverse && !kk2.is_zero() {
                let f = eta_dot(k, &e) / &kk2;
                for i in 0..4 {
                    e[i] -= &f * &k[i];
                }
            }
            let mut v: Vec<Rational> = (0..dim).map(|_| small_rational(rng)).collect();
            let kv = &env.inner[&l.id];
            let n2 = euclid_dot(kv, kv);
            if inner_transverse && !n2.is_zero() {
                let f = euclid_dot(kv, &v) / &n2;
                for i in 0..dim {
                    v[i] -= &f * &kv[i];
                }
            }
            pol_lorentz.insert(l.id, e);
            pol_inner.insert(l.id, v);
        }
        Kinematics {
            env,
            pol_lorentz,
            pol_inner,
        }
    }

    /// Environment with the polarization fields `e{id}` filled in.
    fn filled(&self, legs: &[Leg]) -> NumericEnv {
        let mut env = self.env.clone();
        for l in legs {
            let inner = &self.pol_inner[&l.id];
            let name = format!("e{}", l.id);
            match l.lorentz {
                Some(_) => {
                    for (mu, lv) in self.pol_lorentz[&l.id].iter().enumerate() {
                        for (m, iv) in inner.iter().enumerate() {
                            env.fields.insert((name.clone(), vec![mu, m]), lv * iv);
                        }
                    }
                }
                None => {
                    for (m, iv) in inner.iter().enumerate() {
                        env.fields.insert((name.clone(), vec![m]), iv.clone());
                    }
                }
            }
        }
        env
    }

    /// Value of the vertex with every free index contracted against the
    /// leg polarizations.
    pub fn contract(&self, e: &TensorExpr, legs: &[Leg]) -> Result<Rational> {
        let c = with_polarizations(e, legs).canonicalize()?;
        c.eval(&self.filled(legs), &BTreeMap::new())
    }

    /// Rotates every inner vector by `rot`.
    pub fn rotated(&self, rot: &[[Rational; 3]; 3]) -> Kinematics {
        let mut k = self.clone();
        for v in k.env.inner.values_mut() {
            *v = rotate(rot, v);
        }
        for v in k.pol_inner.values_mut() {
            *v = rotate(rot, v);
        }
        k
    }
}

/// Samples per numeric Bose level.
const BOSE_SAMPLES: usize = 3;

fn bose_one<const N: usize>(
    build: fn(&[Leg; N]) -> Result<RuleResult>,
    legs: &[Leg; N],
    perm: &[usize],
    rng: &mut impl Rng,
) -> Result<BoseReport> {
    let base = build(legs)?;
    let permuted: [Leg; N] = std::array::from_fn(|i| legs[perm[i]].clone());
    let other = build(&permuted)?;
    let diff = (&base.expr - &other.expr).canonicalize()?;
    let mut level = |inner: bool, lorentz: bool| -> Result<bool> {
        for _ in 0..BOSE_SAMPLES {
            let kin = Kinematics::random(legs, 3, inner, lorentz, rng);
            if !kin.contract(&diff, legs)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    };
    Ok(BoseReport {
        permutation: perm.to_vec(),
        literal: diff.is_zero(),
        conserved: level(false, false)?,
        inner_transverse: level(true, false)?,
        physical: level(true, true)?,
    })
}

/// Bose-symmetry report for every permutation of the legs.
pub fn bose_suite<const N: usize>(build: fn(&[Leg; N]) -> Result<RuleResult>, seed: u64) -> Result<Vec<BoseReport>> {
    let legs: [Leg; N] = default_gauge_legs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..N)
        .permutations(N)
        .map(|p| bose_one(build, &legs, &p, &mut rng))
        .collect()
}

/// Sets every inner momentum to zero.
pub fn at_zero_inner(r: &RuleResult) -> Result<TensorExpr> {
    let mut e = r.expr.clone();
    for c in r.constraints.iter().filter(|c| c.space == Space::Inner) {
        for l in &c.legs {
            e = e.subst_momentum(*l, Space::Inner, &[])?;
        }
    }
    Ok(e)
}

/// `(Λ degree, inner-momentum degree)` of every term.
pub fn grading(e: &TensorExpr) -> Vec<(Exp, i32)> {
    e.terms()
        .map(|(t, _)| {
            let k = t.power_of(|a| matches!(a, TensorAtom::InnerMomentum { .. }));
            (t.mono.exponent(Symbol::Lambda), k)
        })
        .collect()
}

/// Cayley transform `(1 − S)(1 + S)⁻¹` of the antisymmetric matrix built
/// from `(a, b, c)`; exactly orthogonal with rational entries.
pub fn cayley_rotation3(a: Rational, b: Rational, c: Rational) -> [[Rational; 3]; 3] {
    let z = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    let s = [
        [z.clone(), -a.clone(), b.clone()],
        [a.clone(), z.clone(), -c.clone()],
        [-b.clone(), c.clone(), z.clone()],
    ];
    let mut p = s.clone();
    let mut m = s.clone();
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { one.clone() } else { z.clone() };
            p[i][j] = &id + &s[i][j];
            m[i][j] = &id - &s[i][j];
        }
    }
    let pinv = inverse3(&p);
    let mut r = s;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| &m[i][k] * &pinv[k][j]).sum();
        }
    }
    r
}

fn inverse3(m: &[[Rational; 3]; 3]) -> [[Rational; 3]; 3] {
    let c = |i: usize, j: usize| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        &m[i1][j1] * &m[i2][j2] - &m[i1][j2] * &m[i2][j1]
    };
    let det: Rational = (0..3).map(|j| &m[0][j] * c(0, j)).sum();
    std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / &det))
}

fn rotate(r: &[[Rational; 3]; 3], v: &[Rational]) -> Vec<Rational> {
    (0..3).map(|i| (0..3).map(|j| &r[i][j] * &v[j]).sum()).collect()
}

/// Contracts every free index of a vertex with a polarization field
/// `e{id}` carrying the leg's slots.
fn with_polarizations(e: &TensorExpr, legs: &[Leg]) -> TensorExpr {
    let mut out = e.clone();
    for l in legs {
        let atom = TensorAtom::Field {
            name: format!("e{}", l.id),
            lorentz: l.lorentz.iter().map(|x| x.flipped()).collect(),
            inner: vec![l.inner.flipped()],
            derivs: vec![],
        };
        out = out.times(&TensorExpr::atom(atom));
    }
    out
}

/// Values of the contracted vertex before and after rotating all inner
/// vectors; equal for an inner-covariant rule.
pub fn rotation_check(
    r: &RuleResult,
    legs: &[Leg],
    kin: &Kinematics,
    rot: &[[Rational; 3]; 3],
) -> Result<(Rational, Rational)> {
    Ok((kin.contract(&r.expr, legs)?, kin.rotated(rot).contract(&r.expr, legs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::q;

    fn k_up(leg: u32, n: &str) -> TensorExpr {
        TensorExpr::k(leg, IndexLabel::lu(n))
    }

    #[test]
    fn feynman_gauge_propagator() {
        let p = gauge_propagator(&xi_value(Some(q(1, 1))), 1, ("mu", "M"), ("nu", "N")).unwrap();
        let want = TensorExpr::eta(IndexLabel::ld("mu"), IndexLabel::ld("nu"))
            .times(&TensorExpr::delta(IndexLabel::iu("M"), IndexLabel::iu("N")))
            .times(&TensorExpr::prop_den(1, -1))
            .canonicalize()
            .unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn landau_propagator_is_transverse() {
        let p = gauge_propagator(&xi_value(Some(q(0, 1))), 1, ("mu", "M"), ("nu", "N")).unwrap();
        assert!(p.times(&k_up(1, "mu")).canonicalize().unwrap().is_zero());
    }

    #[test]
    fn general_xi_longitudinal_part() {
        let p = gauge_propagator(&xi(), 1, ("mu", "M"), ("nu", "N")).unwrap();
        let got = p.times(&k_up(1, "mu")).canonicalize().unwrap();
        let want = xi()
            .times(&TensorExpr::k(1, IndexLabel::ld("nu")))
            .times(&TensorExpr::delta(IndexLabel::iu("M"), IndexLabel::iu("N")))
            .times(&TensorExpr::prop_den(1, -1))
            .canonicalize()
            .unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn ghost_propagator_trace() {
        let p = ghost_propagator(1, "R", "S").unwrap();
        let tr = p.contract(&IndexLabel::iu("R"), &IndexLabel::id("S")).unwrap();
        let want = TensorExpr::num(Coeff::d()).times(&TensorExpr::prop_den(1, -1));
        assert_eq!(tr, want.canonicalize().unwrap());
        let two = p
            .times(&ghost_propagator(1, "S", "R").unwrap())
            .canonicalize()
            .unwrap();
        let want2 = TensorExpr::num(Coeff::d()).times(&TensorExpr::prop_den(1, -2));
        assert_eq!(two, want2.canonicalize().unwrap());
    }

    #[test]
    fn ghost_propagator_is_xi_free() {
        let p = ghost_propagator(2, "R", "S").unwrap();
        assert_eq!(p.subst_symbol(Symbol::Xi, &TensorExpr::num(Coeff::int(7))).unwrap(), p);
    }

    #[test]
    fn wrong_leg_kinds_rejected() {
        let legs = default_ghost_legs();
        assert!(matches!(vertex3(&legs), Err(Error::WrongLegKinds(_))));
        let g: [Leg; 3] = default_gauge_legs();
        assert!(matches!(vertex_ghost(&g), Err(Error::WrongLegKinds(_))));
    }

    #[test]
    fn vertices_vanish_without_inner_momenta() {
        assert!(at_zero_inner(&vertex3(&default_gauge_legs()).unwrap()).unwrap().is_zero());
        assert!(at_zero_inner(&vertex4(&default_gauge_legs()).unwrap()).unwrap().is_zero());
        assert!(at_zero_inner(&vertex_ghost(&default_ghost_legs()).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn ghost_vertex_vanishes_at_zero_k1() {
        let r = vertex_ghost(&default_ghost_legs()).unwrap();
        assert!(r.expr.subst_momentum(1, Space::Lorentz, &[]).unwrap().is_zero());
        let partial = r
            .expr
            .subst_momentum(2, Space::Inner, &[])
            .unwrap()
            .subst_momentum(3, Space::Inner, &[])
            .unwrap();
        assert!(partial.is_zero());
    }

    #[test]
    fn grading_is_homogeneous() {
        for (e, kdeg) in [
            (vertex3(&default_gauge_legs()).unwrap().expr, 1),
            (vertex4(&default_gauge_legs()).unwrap().expr, 2),
            (vertex_ghost(&default_ghost_legs()).unwrap().expr, 1),
        ] {
            for (l, k) in grading(&e) {
                assert_eq!(l, Exp::int(2));
                assert_eq!(k, kdeg);
            }
        }
    }

    #[test]
    fn constraints_cover_both_spaces() {
        let r = vertex3(&default_gauge_legs()).unwrap();
        assert_eq!(r.constraints.len(), 2);
        assert_eq!(r.constraints[0].space, Space::Lorentz);
        assert_eq!(r.constraints[1].space, Space::Inner);
    }

    #[test]
    fn vertex3_is_twice_the_cyclic_half() {
        let legs = default_gauge_legs();
        assert_eq!(vertex3(&legs).unwrap(), vertex3_cyclic_half(&legs).unwrap());
    }

    #[test]
    fn action_vertex3_is_bose_symmetric() {
        let reports = bose_suite::<3>(vertex3_from_action, 3).unwrap();
        assert!(reports.iter().all(|r| r.literal));
    }

    #[test]
    fn published_vertex3_only_cyclic() {
        let reports = bose_suite::<3>(vertex3, 7).unwrap();
        for r in &reports {
            let cyclic = [vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]].contains(&r.permutation);
            assert_eq!(r.literal, cyclic);
            assert_eq!(r.physical, cyclic);
        }
    }

    #[test]
    fn vertices_are_inner_rotation_invariant() {
        let rot = cayley_rotation3(q(1, 2), q(-1, 3), q(2, 5));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g3: [Leg; 3] = default_gauge_legs();
        let g4: [Leg; 4] = default_gauge_legs();
        let gh = default_ghost_legs();
        let cases: Vec<(RuleResult, Vec<Leg>)> = vec![
            (vertex3(&g3).unwrap(), g3.to_vec()),
            (vertex4(&g4).unwrap(), g4.to_vec()),
            (vertex_ghost(&gh).unwrap(), gh.to_vec()),
        ];
        for (r, legs) in cases {
            let kin = Kinematics::random(&legs, 3, false, false, &mut rng);
            let (a, b) = rotation_check(&r, &legs, &kin, &rot).unwrap();
            assert_eq!(a, b);
            assert!(!a.is_zero());
        }
    }

    #[test]
    fn cyclic_elimination_closure() {
        let legs: [Leg; 3] = default_gauge_legs();
        let r = vertex3(&legs).unwrap();
        let cyc = [legs[1].clone(), legs[2].clone(), legs[0].clone()];
        let rc = RuleResult {
            expr: vertex3(&cyc).unwrap().expr,
            constraints: r.constraints.clone(),
        };
        assert_eq!(r.on_shell().unwrap(), rc.on_shell().unwrap());
    }

    #[test]
    fn vertex4_bose_symmetric() {
        let reports = bose_suite::<4>(vertex4, 7).unwrap();
        assert_eq!(reports.len(), 24);
        assert!(reports.iter().all(|r| r.literal), "{reports:?}");
    }

    #[test]
    fn cayley_is_orthogonal() {
        let r = cayley_rotation3(q(1, 2), q(-1, 3), q(2, 5));
        for i in 0..3 {
            for j in 0..3 {
                let dot: Rational = (0..3).map(|k| &r[k][i] * &r[k][j]).sum();
                assert_eq!(dot, if i == j { q(1, 1) } else { q(0, 1) });
            }
        }
    }
}
