//! BRST variations as a graded derivation on [`GradedExpr`].
//!
//! `δ_θ X = θ sX` with `θ` odd and constant. `s` acts on generators by
//!
//! ```text
//! s A_μ^M = ∂_μω^M + A_μ^K ∇_Kω^M − ω^K ∇_K A_μ^M
//! s ω^S   = −ω^K ∇_K ω^S
//! s ω*_R  = −h_R
//! s h_R   = 0
//! s ψ     = −ω^K ∇_K ψ
//! ```
//!
//! and extends by `s(XY) = (sX)Y + (−1)^{|X|} X sY`, commuting with `∂`
//! and `∇`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{Coeff, Exp, GTerm, GradedAtom, GradedExpr, IndexLabel, Space, Species, Symbol};

/// A dummy name not used by `a`; clashes with other factors are renamed
/// on multiplication.
fn dummy_for(a: &GradedAtom) -> String {
    (0..)
        .map(|i| format!("k{i}"))
        .find(|n| a.labels().all(|l| &l.name != n))
        .expect("unbounded")
}

fn ghost(inner: IndexLabel) -> GradedAtom {
    GradedAtom::new(Species::Ghost, vec![], vec![inner])
}

fn gauge(mu: IndexLabel, m: IndexLabel) -> GradedAtom {
    GradedAtom::new(Species::Gauge, vec![mu], vec![m])
}

fn at(a: GradedAtom) -> GradedExpr {
    GradedExpr::atom(a)
}

/// `ω^K ∇_K X` for an atom `X`.
fn ghost_transport(x: &GradedAtom) -> GradedExpr {
    let k = dummy_for(x);
    GradedExpr::product(vec![ghost(IndexLabel::iu(&k)), x.clone().with_deriv(IndexLabel::id(&k))])
}

/// `s` on one generator without derivatives.
fn s_generator(a: &GradedAtom) -> Result<GradedExpr> {
    match &a.species {
        Species::Gauge => {
            let (mu, m) = match (a.lorentz.as_slice(), a.inner.as_slice()) {
                ([mu], [m]) => (mu.clone(), m.clone()),
                _ => return Err(Error::UnknownSpecies(format!("gauge atom {a}"))),
            };
            let k = dummy_for(a);
            let d_omega = at(ghost(m.clone()).with_deriv(mu.clone()));
            let a_nabla = GradedExpr::product(vec![
                gauge(mu.clone(), IndexLabel::iu(&k)),
                ghost(m.clone()).with_deriv(IndexLabel::id(&k)),
            ]);
            Ok(d_omega + a_nabla - ghost_transport(a))
        }
        Species::Ghost => Ok(-ghost_transport(a)),
        Species::AntiGhost => Ok(-at(GradedAtom::new(Species::Aux, a.lorentz.clone(), a.inner.clone()))),
        Species::Aux | Species::Theta => Ok(GradedExpr::zero()),
        Species::Matter { .. } => Ok(-ghost_transport(a)),
        other => Err(Error::UnknownSpecies(format!("{other:?}"))),
    }
}

/// `s` on an atom with derivatives.
fn s_atom(a: &GradedAtom) -> Result<GradedExpr> {
    let base = GradedAtom {
        derivs: vec![],
        ..a.clone()
    };
    let mut out = s_generator(&base)?;
    for d in &a.derivs {
        out = out.deriv(d);
    }
    Ok(out)
}

/// The BRST differential.
pub fn s(e: &GradedExpr) -> Result<GradedExpr> {
    let mut out = GradedExpr::zero();
    for (t, c) in e.terms() {
        let mut odd_prefix = false;
        for i in 0..t.atoms.len() {
            let v = s_atom(&t.atoms[i])?;
            if !v.is_zero() {
                let prefix = GradedExpr::from_term(
                    GTerm {
                        atoms: t.atoms[..i].to_vec(),
                        mono: t.mono.clone(),
                    },
                    if odd_prefix { -c.clone() } else { c.clone() },
                );
                let suffix = GradedExpr::product(t.atoms[i + 1..].to_vec());
                out = out + prefix.times(&v).times(&suffix);
            }
            odd_prefix ^= t.atoms[i].is_odd();
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BrstField {
    A,
    Omega,
    OmegaStar,
    H,
    Psi,
}

impl BrstField {
    pub const ALL: [BrstField; 5] = [
        BrstField::A,
        BrstField::Omega,
        BrstField::OmegaStar,
        BrstField::H,
        BrstField::Psi,
    ];

    /// `A_μ^M`, `ω^S`, `ω*_R`, `h_R` and an even `ψ`.
    pub fn atom(self) -> GradedAtom {
        match self {
            BrstField::A => gauge(IndexLabel::ld("mu"), IndexLabel::iu("M")),
            BrstField::Omega => ghost(IndexLabel::iu("S")),
            BrstField::OmegaStar => GradedAtom::new(Species::AntiGhost, vec![], vec![IndexLabel::id("R")]),
            BrstField::H => GradedAtom::new(Species::Aux, vec![], vec![IndexLabel::id("R")]),
            BrstField::Psi => GradedAtom::bare(Species::Matter { odd: false }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BrstField::A => "A",
            BrstField::Omega => "omega",
            BrstField::OmegaStar => "omega-star",
            BrstField::H => "h",
            BrstField::Psi => "psi",
        }
    }

    pub fn parse(s: &str) -> Option<BrstField> {
        BrstField::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Report of one symbolic verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofReport {
    pub subject: String,
    /// Named intermediate expressions in order.
    pub steps: Vec<(String, GradedExpr)>,
    /// Normalized result; zero on success.
    pub residue: GradedExpr,
}

impl ProofReport {
    pub fn passes(&self) -> bool {
        self.residue.is_zero()
    }
}

/// `s(sX)` for an arbitrary expression.
pub fn nilpotency(subject: &str, x: &GradedExpr) -> Result<ProofReport> {
    let first = s(x)?;
    let second = s(&first)?;
    let residue = second.normalize()?;
    Ok(ProofReport {
        subject: subject.into(),
        steps: vec![
            ("x".into(), x.clone()),
            ("s x".into(), first.normalize()?),
            ("s s x (expanded)".into(), second),
        ],
        residue,
    })
}

pub fn verify_nilpotent(field: BrstField) -> Result<ProofReport> {
    nilpotency(field.name(), &at(field.atom()))
}

/// Linear gauge-fixing functional `f^R[A]` with free inner label `R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeFixing {
    pub f: GradedExpr,
}

impl GaugeFixing {
    /// `f^R = ∂^μ A_μ^R`.
    pub fn lorentz() -> Self {
        GaugeFixing {
            f: at(gauge(IndexLabel::ld("nu"), IndexLabel::iu("R")).with_deriv(IndexLabel::lu("nu"))),
        }
    }

    /// `f^R = A_3^R`; `3` is a fixed spatial component label.
    pub fn axial() -> Self {
        GaugeFixing {
            f: at(gauge(IndexLabel::ld("3"), IndexLabel::iu("R"))),
        }
    }

    /// Only terms with exactly one gauge atom and nothing else are linear.
    pub fn check_linear(&self) -> Result<()> {
        for (t, _) in self.f.terms() {
            let ok = t.atoms.len() == 1 && t.atoms[0].species == Species::Gauge;
            if !ok {
                return Err(Error::Unsupported(format!("gauge fixing outside the linear class: {}", self.f)));
            }
        }
        if self.f.is_zero() {
            return Err(Error::Unsupported("empty gauge fixing".into()));
        }
        Ok(())
    }

    /// `Δ^R = δf^R/δℰ · ω`: `f` evaluated on the gauge variation with
    /// parameter `ω`.
    pub fn delta(&self) -> Result<GradedExpr> {
        self.check_linear()?;
        let mut out = GradedExpr::zero();
        for (t, c) in self.f.terms() {
            let a = &t.atoms[0];
            let mut v = gauge_variation_with(&a.lorentz[0], &a.inner[0], &|l| ghost(l));
            for d in &a.derivs {
                v = v.deriv(d);
            }
            out = out + v.scale(c);
        }
        Ok(out)
    }
}

/// Even gauge parameter `ℰ^M`.
fn parameter_species() -> Species {
    Species::Named {
        name: "E".into(),
        odd: false,
        ghost: 0,
    }
}

/// `δA_μ^M = ∂_μℰ^M + A_μ^N ∇_N ℰ^M − ℰ^N ∇_N A_μ^M`.
pub fn gauge_variation(mu: &IndexLabel, m: &IndexLabel) -> GradedExpr {
    gauge_variation_with(mu, m, &|l| GradedAtom::new(parameter_species(), vec![], vec![l]))
}

fn gauge_variation_with(mu: &IndexLabel, m: &IndexLabel, e: &dyn Fn(IndexLabel) -> GradedAtom) -> GradedExpr {
    let n = dummy_for(&gauge(mu.clone(), m.clone()));
    at(e(m.clone()).with_deriv(mu.clone()))
        + GradedExpr::product(vec![gauge(mu.clone(), IndexLabel::iu(&n)), e(m.clone()).with_deriv(IndexLabel::id(&n))])
        - GradedExpr::product(vec![e(IndexLabel::iu(&n)), gauge(mu.clone(), m.clone()).with_deriv(IndexLabel::id(&n))])
}

/// The gauge variation with `ℰ^M = θω^M` equals `θ sA_μ^M`.
pub fn gauge_transformation_check() -> Result<ProofReport> {
    let theta = GradedAtom::bare(Species::Theta);
    let var = gauge_variation(&IndexLabel::ld("mu"), &IndexLabel::iu("M"));
    let sub = var.substitute(
        |sp| *sp == parameter_species(),
        |p| Ok(GradedExpr::product(vec![theta.clone(), ghost(p.inner[0].clone())])),
    )?;
    let brst = at(theta).times(&s(&at(BrstField::A.atom()))?);
    let residue = (&sub - &brst).normalize()?;
    Ok(ProofReport {
        subject: "gauge transformation with parameter θω".into(),
        steps: vec![("δA at ℰ = θω".into(), sub.normalize()?), ("θ sA".into(), brst.normalize()?)],
        residue,
    })
}

/// `Ψ = −Λ²(ω*_R f^R + ξ/2 ω*_R h^R)`.
pub fn gauge_fermion(gf: &GaugeFixing, with_xi: bool) -> GradedExpr {
    let wstar = at(GradedAtom::new(Species::AntiGhost, vec![], vec![IndexLabel::id("R")]));
    let h_up = at(GradedAtom::new(Species::Aux, vec![], vec![IndexLabel::iu("R")]));
    let mut inner = wstar.times(&gf.f);
    if with_xi {
        inner = inner + wstar.times(&h_up).scale(&Coeff::frac(1, 2)).times_sym(Symbol::Xi, Exp::int(1));
    }
    inner.scale(&Coeff::int(-1)).times_sym(Symbol::Lambda, Exp::int(2))
}

/// `S_NEW − S_ID = Λ²(ω*_R Δ^R + h_R f^R + ξ/2 h_R h^R)`.
pub fn gauge_fixing_terms(gf: &GaugeFixing, delta: &GradedExpr, with_xi: bool) -> GradedExpr {
    let wstar = at(GradedAtom::new(Species::AntiGhost, vec![], vec![IndexLabel::id("R")]));
    let h_dn = at(GradedAtom::new(Species::Aux, vec![], vec![IndexLabel::id("R")]));
    let h_up = at(GradedAtom::new(Species::Aux, vec![], vec![IndexLabel::iu("R")]));
    let mut sum = wstar.times(delta) + h_dn.times(&gf.f);
    if with_xi {
        sum = sum + h_dn.times(&h_up).scale(&Coeff::frac(1, 2)).times_sym(Symbol::Xi, Exp::int(1));
    }
    sum.times_sym(Symbol::Lambda, Exp::int(2))
}

/// `ℱ^R_S ω^S = ∂^μ(∂_μω^R + A_μ^K ∇_Kω^R − (∇_S A_μ^R) ω^S)` for the
/// Lorentz gauge, written out directly.
pub fn lorentz_faddeev_popov() -> GradedExpr {
    let mu = IndexLabel::ld("nu");
    let inner = at(ghost(IndexLabel::iu("R")).with_deriv(mu.clone()))
        + GradedExpr::product(vec![
            gauge(mu.clone(), IndexLabel::iu("q")),
            ghost(IndexLabel::iu("R")).with_deriv(IndexLabel::id("q")),
        ])
        - GradedExpr::product(vec![
            gauge(mu, IndexLabel::iu("R")).with_deriv(IndexLabel::id("q")),
            ghost(IndexLabel::iu("q")),
        ]);
    inner.partial(&IndexLabel::lu("nu"))
}

/// Checks `S_NEW − S_ID = sΨ` with `Δ^R` from the gauge variation of `f`.
pub fn exactness_check(gf: &GaugeFixing, with_xi: bool) -> Result<ProofReport> {
    let delta = gf.delta()?;
    let psi = gauge_fermion(gf, with_xi);
    let s_psi = s(&psi)?;
    let terms = gauge_fixing_terms(gf, &delta, with_xi);
    let residue = (&terms - &s_psi).normalize()?;
    Ok(ProofReport {
        subject: "S_NEW − S_ID = sΨ".into(),
        steps: vec![
            ("Δ".into(), delta.normalize()?),
            ("Ψ".into(), psi.normalize()?),
            ("sΨ".into(), s_psi.normalize()?),
            ("S_NEW − S_ID".into(), terms.normalize()?),
        ],
        residue,
    })
}

/// Drops terms containing `∇_M X^M` of a generator, i.e. imposes the
/// divergence-free constraints. Only applied on request.
pub fn apply_transversality(e: &GradedExpr) -> GradedExpr {
    let mut out = GradedExpr::zero();
    for (t, c) in e.terms() {
        let divergence = t.atoms.iter().any(|a| {
            a.inner
                .iter()
                .any(|i| a.derivs.iter().any(|d| d.space == Space::Inner && d.name == i.name))
        });
        if !divergence {
            out = out + GradedExpr::from_term(t.clone(), c.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_variations() {
        assert!(s(&at(BrstField::H.atom())).unwrap().is_zero());
        let sw = s(&at(BrstField::Omega.atom())).unwrap().normalize().unwrap();
        let want = (-ghost_transport(&BrstField::Omega.atom())).normalize().unwrap();
        assert_eq!(sw, want);
        let sws = s(&at(BrstField::OmegaStar.atom())).unwrap();
        assert_eq!(sws, -at(GradedAtom::new(Species::Aux, vec![], vec![IndexLabel::id("R")])));
    }

    #[test]
    fn nilpotent_on_generators() {
        for f in BrstField::ALL {
            let r = verify_nilpotent(f).unwrap();
            assert!(r.passes(), "{}: {}", f.name(), r.residue);
        }
    }

    #[test]
    fn gauge_field_expansion_is_nontrivial() {
        let r = verify_nilpotent(BrstField::A).unwrap();
        let expanded = &r.steps[2].1;
        assert!(expanded.len() >= 5);
    }

    #[test]
    fn odd_matter_is_nilpotent() {
        let psi = at(GradedAtom::bare(Species::Matter { odd: true }));
        assert!(nilpotency("psi odd", &psi).unwrap().passes());
    }

    #[test]
    fn theta_and_operators() {
        assert!(s(&at(GradedAtom::bare(Species::Theta))).unwrap().is_zero());
        assert!(matches!(s(&at(GradedAtom::bare(Species::OpC))), Err(Error::UnknownSpecies(_))));
    }

    #[test]
    fn exactness_lorentz_gauge() {
        let gf = GaugeFixing::lorentz();
        let r = exactness_check(&gf, true).unwrap();
        assert!(r.passes(), "{}", r.residue);
        assert!(exactness_check(&gf, false).unwrap().passes());
        let d = gf.delta().unwrap().normalize().unwrap();
        assert_eq!(d, lorentz_faddeev_popov().normalize().unwrap());
    }

    #[test]
    fn exactness_axial_gauge() {
        assert!(exactness_check(&GaugeFixing::axial(), true).unwrap().passes());
    }

    #[test]
    fn gauge_fermion_grading() {
        let psi = gauge_fermion(&GaugeFixing::lorentz(), true);
        assert_eq!(psi.ghost_numbers(), [-1].into());
        assert_eq!(psi.parities(), [true].into());
        assert!(nilpotency("Ψ", &psi).unwrap().passes());
    }

    #[test]
    fn nonlinear_gauge_fixing_is_rejected() {
        let a = gauge(IndexLabel::ld("nu"), IndexLabel::iu("R"));
        let b = gauge(IndexLabel::lu("nu"), IndexLabel::iu("q"));
        let c = gauge(IndexLabel::ld("3"), IndexLabel::id("q"));
        let gf = GaugeFixing {
            f: GradedExpr::product(vec![a, b, c]),
        };
        assert!(matches!(exactness_check(&gf, true), Err(Error::Unsupported(_))));
    }

    #[test]
    fn brst_acts_as_gauge_transformation() {
        let r = gauge_transformation_check().unwrap();
        assert!(r.passes(), "{}", r.residue);
    }

    #[test]
    fn transversality_drops_divergences() {
        let div = at(ghost(IndexLabel::iu("K")).with_deriv(IndexLabel::id("K")));
        assert!(apply_transversality(&div).is_zero());
        let keep = at(ghost(IndexLabel::iu("K")).with_deriv(IndexLabel::ld("mu")));
        assert_eq!(apply_transversality(&keep), keep);
    }

    #[test]
    fn field_names_round_trip() {
        for f in BrstField::ALL {
            assert_eq!(BrstField::parse(f.name()), Some(f));
        }
    }
}
