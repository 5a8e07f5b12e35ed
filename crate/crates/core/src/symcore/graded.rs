//! Graded algebra of field and operator atoms.
//!
//! Field-class atoms (gauge field, ghosts, auxiliary field, matter, the BRST
//! parameter and named fields) supercommute with everything. Operator atoms
//! keep their relative order and are written after all field-class atoms.
//! Derivatives `∂_μ` and `∇_K` are recorded on the atom they act on and
//! commute with one another.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::coeff::Coeff;
use super::latex::latex_label;
use super::index::{IndexLabel, Space, Variance};
use super::scalar::{Exp, Monomial, Symbol};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "species", rename_all = "snake_case")]
pub enum Species {
    Gauge,
    Ghost,
    AntiGhost,
    Aux,
    Matter { odd: bool },
    Theta,
    Named { name: String, odd: bool, ghost: i32 },
    OpB,
    OpC,
    OpM,
    OpN,
    OpE,
    OpA,
    /// Field-strength operator, antisymmetric in its two Lorentz slots.
    OpF,
}

impl Species {
    pub fn is_operator(&self) -> bool {
        matches!(
            self,
            Species::OpB
                | Species::OpC
                | Species::OpM
                | Species::OpN
                | Species::OpE
                | Species::OpA
                | Species::OpF
        )
    }

    pub fn is_odd(&self) -> bool {
        match self {
            Species::Ghost | Species::AntiGhost | Species::Theta => true,
            Species::Matter { odd } | Species::Named { odd, .. } => *odd,
            _ => false,
        }
    }

    pub fn ghost_number(&self) -> i32 {
        match self {
            Species::Ghost => 1,
            Species::AntiGhost | Species::Theta => -1,
            Species::Named { ghost, .. } => *ghost,
            _ => 0,
        }
    }

    /// Constant atoms are annihilated by derivatives.
    pub fn is_constant(&self) -> bool {
        matches!(self, Species::Theta)
    }

    fn plain(&self) -> String {
        match self {
            Species::Gauge => "A".into(),
            Species::Ghost => "omega".into(),
            Species::AntiGhost => "omega*".into(),
            Species::Aux => "h".into(),
            Species::Matter { .. } => "psi".into(),
            Species::Theta => "theta".into(),
            Species::Named { name, .. } => name.clone(),
            Species::OpB => "B".into(),
            Species::OpC => "C".into(),
            Species::OpM => "M".into(),
            Species::OpN => "N".into(),
            Species::OpE => "E".into(),
            Species::OpA => "A".into(),
            Species::OpF => "F".into(),
        }
    }

    fn latex(&self) -> String {
        match self {
            Species::Gauge => "A".into(),
            Species::Ghost => "\\omega".into(),
            Species::AntiGhost => "\\omega^{*}".into(),
            Species::Aux => "h".into(),
            Species::Matter { .. } => "\\psi".into(),
            Species::Theta => "\\theta".into(),
            Species::Named { name, .. } => format!("\\mathrm{{{name}}}"),
            Species::OpB => "B".into(),
            Species::OpC => "C".into(),
            Species::OpM => "M".into(),
            Species::OpN => "N".into(),
            Species::OpE => "\\mathcal{E}".into(),
            Species::OpA => "\\mathcal{A}".into(),
            Species::OpF => "\\mathcal{F}".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GradedAtom {
    pub species: Species,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lorentz: Vec<IndexLabel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inner: Vec<IndexLabel>,
    /// Applied `∂` (Lorentz labels) and `∇` (inner labels).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub derivs: Vec<IndexLabel>,
}

impl GradedAtom {
    pub fn new(species: Species, lorentz: Vec<IndexLabel>, inner: Vec<IndexLabel>) -> Self {
        GradedAtom {
            species,
            lorentz,
            inner,
            derivs: vec![],
        }
    }

    pub fn bare(species: Species) -> Self {
        GradedAtom::new(species, vec![], vec![])
    }

    pub fn with_deriv(mut self, l: IndexLabel) -> Self {
        self.derivs.push(l);
        self.derivs.sort();
        self
    }

    pub fn labels(&self) -> impl Iterator<Item = &IndexLabel> {
        self.lorentz.iter().chain(&self.inner).chain(&self.derivs)
    }

    pub fn map_labels(&self, mut f: impl FnMut(&IndexLabel) -> IndexLabel) -> GradedAtom {
        GradedAtom {
            species: self.species.clone(),
            lorentz: self.lorentz.iter().map(&mut f).collect(),
            inner: self.inner.iter().map(&mut f).collect(),
            derivs: self.derivs.iter().map(&mut f).collect(),
        }
    }

    pub fn is_odd(&self) -> bool {
        self.species.is_odd()
    }

    fn fmt_labels(labels: &[IndexLabel], latex: bool) -> String {
        let mut out = String::new();
        for (var, group) in &labels.iter().chunk_by(|l| l.variance) {
            let names: Vec<String> = group
                .map(|l| if latex { latex_label(l) } else { l.name.clone() })
                .collect();
            let mark = if var == Variance::Upper { '^' } else { '_' };
            if latex {
                if !out.is_empty() {
                    out.push_str("{}");
                }
                out.push_str(&format!("{mark}{{{}}}", names.join(" ")));
            } else {
                out.push_str(&format!("{mark}{}", names.join(",")));
            }
        }
        out
    }

    pub fn to_plain(&self) -> String {
        let mut s = String::new();
        for d in &self.derivs {
            let op = if d.space == Space::Lorentz { "d" } else { "nabla" };
            s.push_str(&format!("{op}{} ", GradedAtom::fmt_labels(std::slice::from_ref(d), false)));
        }
        s.push_str(&self.species.plain());
        let slots: Vec<IndexLabel> = self.lorentz.iter().chain(&self.inner).cloned().collect();
        s.push_str(&GradedAtom::fmt_labels(&slots, false));
        s
    }

    pub fn to_latex(&self) -> String {
        let mut s = String::new();
        for d in &self.derivs {
            let op = if d.space == Space::Lorentz { "\\partial" } else { "\\nabla" };
            s.push_str(op);
            s.push_str(&GradedAtom::fmt_labels(std::slice::from_ref(d), true));
        }
        let base = self.species.latex();
        let slots: Vec<IndexLabel> = self.lorentz.iter().chain(&self.inner).cloned().collect();
        if slots.is_empty() {
            s.push_str(&base);
        } else {
            s.push_str(&format!("{{{base}}}"));
            s.push_str(&GradedAtom::fmt_labels(&slots, true));
        }
        s
    }
}

impl fmt::Display for GradedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GTerm {
    pub atoms: Vec<GradedAtom>,
    pub mono: Monomial,
}

impl GTerm {
    pub fn ghost_number(&self) -> i32 {
        self.atoms.iter().map(|a| a.species.ghost_number()).sum()
    }

    pub fn is_odd(&self) -> bool {
        self.atoms.iter().filter(|a| a.is_odd()).count() % 2 == 1
    }

    fn names(&self) -> BTreeSet<String> {
        self.atoms
            .iter()
            .flat_map(|a| a.labels().map(|l| l.name.clone()))
            .collect()
    }

    fn label_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for a in &self.atoms {
            for l in a.labels() {
                *m.entry(l.name.clone()).or_insert(0) += 1;
            }
        }
        m
    }

    fn dummies(&self) -> Vec<String> {
        self.label_counts()
            .into_iter()
            .filter(|(_, c)| *c == 2)
            .map(|(n, _)| n)
            .collect()
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> GTerm {
        GTerm {
            atoms: self
                .atoms
                .iter()
                .map(|a| {
                    a.map_labels(|l| match map.get(&l.name) {
                        Some(n) => l.renamed(n),
                        None => l.clone(),
                    })
                })
                .collect(),
            mono: self.mono.clone(),
        }
    }

    pub fn free_labels(&self) -> BTreeSet<IndexLabel> {
        let counts = self.label_counts();
        self.atoms
            .iter()
            .flat_map(|a| a.labels())
            .filter(|l| counts.get(&l.name) == Some(&1))
            .cloned()
            .collect()
    }
}

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

/// Ordering options for [`GradedExpr::normalize_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Treat operator atoms as mutually commuting (abelian case).
    pub commuting_operators: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GradedExpr {
    terms: BTreeMap<GTerm, Coeff>,
}

impl GradedExpr {
    pub fn zero() -> Self {
        GradedExpr::default()
    }

    pub fn one() -> Self {
        GradedExpr::num(Coeff::one())
    }

    pub fn num(c: Coeff) -> Self {
        GradedExpr::from_term(GTerm::default(), c)
    }

    pub fn sym(s: Symbol, e: Exp) -> Self {
        let (c, m) = Monomial::power(s, e);
        GradedExpr::from_term(
            GTerm {
                atoms: vec![],
                mono: m,
            },
            c,
        )
    }

    pub fn from_term(t: GTerm, c: Coeff) -> Self {
        let mut e = GradedExpr::zero();
        e.push(t, c);
        e
    }

    pub fn atom(a: GradedAtom) -> Self {
        GradedExpr::from_term(
            GTerm {
                atoms: vec![a],
                mono: Monomial::one(),
            },
            Coeff::one(),
        )
    }

    /// Product of atoms in the given order.
    pub fn product(atoms: Vec<GradedAtom>) -> Self {
        GradedExpr::from_term(
            GTerm {
                atoms,
                mono: Monomial::one(),
            },
            Coeff::one(),
        )
    }

    fn push(&mut self, t: GTerm, c: Coeff) {
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

    pub fn terms(&self) -> impl Iterator<Item = (&GTerm, &Coeff)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &Coeff) -> GradedExpr {
        let mut out = GradedExpr::zero();
        for (t, x) in &self.terms {
            out.push(t.clone(), x * c);
        }
        out
    }

    pub fn times_sym(&self, s: Symbol, e: Exp) -> GradedExpr {
        self.times(&GradedExpr::sym(s, e))
    }

    /// Ordered product with capture-avoiding renaming of dummy labels.
    pub fn times(&self, other: &GradedExpr) -> GradedExpr {
        let mut out = GradedExpr::zero();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &other.terms {
                let (s, t) = mul_terms(ta, tb);
                out.push(t, &(ca * cb) * &s);
            }
        }
        out
    }

    /// Applies a derivative by the Leibniz rule.
    pub fn deriv(&self, l: &IndexLabel) -> GradedExpr {
        let mut out = GradedExpr::zero();
        for (t, c) in &self.terms {
            let t = if t.dummies().contains(&l.name) {
                let fresh = fresh_names(1, &t.names()).remove(0);
                t.rename(&BTreeMap::from([(l.name.clone(), fresh)]))
            } else {
                t.clone()
            };
            for i in 0..t.atoms.len() {
                if t.atoms[i].species.is_constant() {
                    continue;
                }
                let mut nt = t.clone();
                nt.atoms[i] = nt.atoms[i].clone().with_deriv(l.clone());
                out.push(nt, c.clone());
            }
        }
        out
    }

    /// `∂_μ` with a Lorentz label.
    pub fn partial(&self, l: &IndexLabel) -> GradedExpr {
        debug_assert_eq!(l.space, Space::Lorentz);
        self.deriv(l)
    }

    /// `∇_K` with an inner label.
    pub fn nabla(&self, l: &IndexLabel) -> GradedExpr {
        debug_assert_eq!(l.space, Space::Inner);
        self.deriv(l)
    }

    /// Replaces every atom of a species. `rule` receives the atom stripped of
    /// derivatives; the derivatives are then reapplied by the Leibniz rule.
    /// The replacement must have the parity of the atom it replaces.
    pub fn substitute(
        &self,
        target: impl Fn(&Species) -> bool,
        rule: impl Fn(&GradedAtom) -> Result<GradedExpr>,
    ) -> Result<GradedExpr> {
        let mut out = GradedExpr::zero();
        for (t, c) in &self.terms {
            let mut acc = GradedExpr::from_term(
                GTerm {
                    atoms: vec![],
                    mono: t.mono.clone(),
                },
                c.clone(),
            );
            for a in &t.atoms {
                if !target(&a.species) {
                    acc = acc.times(&GradedExpr::atom(a.clone()));
                    continue;
                }
                let base = GradedAtom {
                    derivs: vec![],
                    ..a.clone()
                };
                let mut rep = rule(&base)?;
                for (rt, _) in rep.terms() {
                    if rt.is_odd() != a.is_odd() {
                        return Err(Error::ParityViolation(a.to_plain()));
                    }
                }
                for d in &a.derivs {
                    rep = rep.deriv(d);
                }
                acc = acc.times(&rep);
            }
            out = out + acc;
        }
        Ok(out)
    }

    pub fn normalize(&self) -> Result<GradedExpr> {
        self.normalize_with(NormalizeOptions::default())
    }

    /// Canonical order with Grassmann signs and canonical dummy names.
    pub fn normalize_with(&self, opts: NormalizeOptions) -> Result<GradedExpr> {
        let mut out = GradedExpr::zero();
        for (t, c) in &self.terms {
            if let Some((sign, nt)) = canonical_term(t, opts)? {
                out.push(nt, c * &Coeff::int(sign as i64));
            }
        }
        Ok(out)
    }

    pub fn ghost_numbers(&self) -> BTreeSet<i32> {
        self.terms.keys().map(|t| t.ghost_number()).collect()
    }

    pub fn parities(&self) -> BTreeSet<bool> {
        self.terms.keys().map(|t| t.is_odd()).collect()
    }

    pub fn free_indices(&self) -> BTreeSet<IndexLabel> {
        self.terms.keys().next().map(|t| t.free_labels()).unwrap_or_default()
    }

    /// Replaces every label named `from` by `to`, variance included.
    pub fn relabel(&self, from: &str, to: &IndexLabel) -> GradedExpr {
        let mut out = GradedExpr::zero();
        for (t, c) in &self.terms {
            let nt = GTerm {
                atoms: t
                    .atoms
                    .iter()
                    .map(|a| a.map_labels(|l| if l.name == from { to.clone() } else { l.clone() }))
                    .collect(),
                mono: t.mono.clone(),
            };
            out.push(nt, c.clone());
        }
        out
    }

    /// Renames labels by name throughout.
    pub fn rename_labels(&self, map: &BTreeMap<String, String>) -> GradedExpr {
        let mut out = GradedExpr::zero();
        for (t, c) in &self.terms {
            out.push(t.rename(map), c.clone());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graded serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<GradedExpr> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_plain(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (t, c)) in self.terms.iter().enumerate() {
            let cs = c.to_display_string();
            let (neg, mag) = match cs.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, cs),
            };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut parts = Vec::new();
            if mag != "1" || (t.atoms.is_empty() && t.mono.is_one()) {
                parts.push(mag);
            }
            if !t.mono.is_one() {
                parts.push(t.mono.to_plain());
            }
            parts.extend(t.atoms.iter().map(|a| a.to_plain()));
            out.push_str(&parts.join(" "));
        }
        out
    }

    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (t, c)) in self.terms.iter().enumerate() {
            let (neg, body) = super::latex::coeff_latex(c);
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut parts = Vec::new();
            if body != "1" || (t.atoms.is_empty() && t.mono.is_one()) {
                parts.push(body);
            }
            if !t.mono.is_one() {
                parts.push(t.mono.to_latex());
            }
            parts.extend(t.atoms.iter().map(|a| a.to_latex()));
            out.push_str(&parts.join(" "));
        }
        out
    }
}

impl fmt::Display for GradedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain())
    }
}

fn mul_terms(a: &GTerm, b: &GTerm) -> (Coeff, GTerm) {
    let taken_a = a.names();
    let taken_b = b.names();
    let all: BTreeSet<String> = taken_a.union(&taken_b).cloned().collect();
    let clash_a: Vec<String> = a.dummies().into_iter().filter(|n| taken_b.contains(n)).collect();
    let clash_b: Vec<String> = b.dummies().into_iter().filter(|n| taken_a.contains(n)).collect();
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
    let mut atoms = ra.atoms;
    atoms.extend(rb.atoms);
    (sign, GTerm { atoms, mono })
}

fn validate(t: &GTerm) -> Result<()> {
    let mut seen: BTreeMap<&str, Vec<&IndexLabel>> = BTreeMap::new();
    for a in &t.atoms {
        for l in a.labels() {
            seen.entry(l.name.as_str()).or_default().push(l);
        }
    }
    for (name, ls) in seen {
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

/// Renders one dummy assignment; `None` means the term vanishes.
fn render(
    fields: &[GradedAtom],
    ops: &[GradedAtom],
    map: &BTreeMap<&str, String>,
    opts: NormalizeOptions,
) -> Option<(Vec<GradedAtom>, i32)> {
    let mut sign = 1;
    let mut prep = |a: &GradedAtom| -> Option<GradedAtom> {
        let mut na = a.map_labels(|l| match map.get(l.name.as_str()) {
            Some(n) => IndexLabel::new(n, l.space, Variance::Upper),
            None => l.clone(),
        });
        na.derivs.sort();
        if na.species == Species::OpF && na.lorentz.len() == 2 {
            if na.lorentz[0].name == na.lorentz[1].name {
                return None;
            }
            if na.lorentz[1] < na.lorentz[0] {
                na.lorentz.swap(0, 1);
                sign = -sign;
            }
        }
        Some(na)
    };
    let mut fs: Vec<GradedAtom> = fields.iter().map(&mut prep).collect::<Option<_>>()?;
    let mut os: Vec<GradedAtom> = ops.iter().map(&mut prep).collect::<Option<_>>()?;
    // insertion sort tracking odd transpositions
    for i in 1..fs.len() {
        let mut j = i;
        while j > 0 && fs[j] < fs[j - 1] {
            if fs[j].is_odd() && fs[j - 1].is_odd() {
                sign = -sign;
            }
            fs.swap(j, j - 1);
            j -= 1;
        }
    }
    if fs.windows(2).any(|w| w[0] == w[1] && w[0].is_odd()) {
        return None;
    }
    if opts.commuting_operators {
        os.sort();
    }
    let mut seen = BTreeSet::new();
    let seq = fs
        .into_iter()
        .chain(os)
        .map(|a| {
            a.map_labels(|l| {
                if l.is_canonical_dummy() && !seen.insert(l.name.clone()) {
                    l.with_variance(Variance::Lower)
                } else {
                    l.clone()
                }
            })
        })
        .collect();
    Some((seq, sign))
}

fn canonical_term(t: &GTerm, opts: NormalizeOptions) -> Result<Option<(i32, GTerm)>> {
    validate(t)?;
    if t.atoms.iter().any(|a| a.species.is_constant() && !a.derivs.is_empty()) {
        return Ok(None);
    }
    let (ops, fields): (Vec<GradedAtom>, Vec<GradedAtom>) =
        t.atoms.iter().cloned().partition(|a| a.species.is_operator());
    let dummies = t.dummies();
    let mut best: Option<(Vec<GradedAtom>, BTreeSet<i32>)> = None;
    for perm in (0..dummies.len()).permutations(dummies.len()) {
        let map: BTreeMap<&str, String> = dummies
            .iter()
            .zip(&perm)
            .map(|(n, k)| (n.as_str(), format!("#{}", k + 1)))
            .collect();
        let Some((seq, sign)) = render(&fields, &ops, &map, opts) else {
            return Ok(None);
        };
        match &mut best {
            Some((k, signs)) if *k == seq => {
                signs.insert(sign);
            }
            Some((k, _)) if seq > *k => {}
            _ => best = Some((seq, BTreeSet::from([sign]))),
        }
    }
    let (atoms, signs) = best.expect("at least one renaming");
    if signs.len() > 1 {
        return Ok(None);
    }
    let sign = *signs.iter().next().unwrap();
    Ok(Some((
        sign,
        GTerm {
            atoms,
            mono: t.mono.clone(),
        },
    )))
}

impl Add for GradedExpr {
    type Output = GradedExpr;
    fn add(mut self, rhs: GradedExpr) -> GradedExpr {
        for (t, c) in rhs.terms {
            self.push(t, c);
        }
        self
    }
}

impl Sub for GradedExpr {
    type Output = GradedExpr;
    fn sub(self, rhs: GradedExpr) -> GradedExpr {
        self + (-rhs)
    }
}

impl Neg for GradedExpr {
    type Output = GradedExpr;
    fn neg(self) -> GradedExpr {
        GradedExpr {
            terms: self.terms.into_iter().map(|(t, c)| (t, -c)).collect(),
        }
    }
}

impl Mul for GradedExpr {
    type Output = GradedExpr;
    fn mul(self, rhs: GradedExpr) -> GradedExpr {
        self.times(&rhs)
    }
}

impl<'a> Add<&'a GradedExpr> for &'a GradedExpr {
    type Output = GradedExpr;
    fn add(self, rhs: &GradedExpr) -> GradedExpr {
        self.clone() + rhs.clone()
    }
}

impl<'a> Sub<&'a GradedExpr> for &'a GradedExpr {
    type Output = GradedExpr;
    fn sub(self, rhs: &GradedExpr) -> GradedExpr {
        self.clone() - rhs.clone()
    }
}

impl<'a> Mul<&'a GradedExpr> for &'a GradedExpr {
    type Output = GradedExpr;
    fn mul(self, rhs: &GradedExpr) -> GradedExpr {
        self.times(rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct GTermRepr {
    coeff: Coeff,
    monomial: Monomial,
    atoms: Vec<GradedAtom>,
}

#[derive(Serialize, Deserialize)]
struct GExprRepr {
    terms: Vec<GTermRepr>,
}

impl Serialize for GradedExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GExprRepr {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| GTermRepr {
                    coeff: c.clone(),
                    monomial: t.mono.clone(),
                    atoms: t.atoms.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GradedExpr {
    fn deserialize<De: Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let repr = GExprRepr::deserialize(d)?;
        let mut out = GradedExpr::zero();
        for t in repr.terms {
            out.push(
                GTerm {
                    atoms: t.atoms,
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

    fn ghost(l: L) -> GradedAtom {
        GradedAtom::new(Species::Ghost, vec![], vec![l])
    }

    fn theta() -> GradedExpr {
        GradedExpr::atom(GradedAtom::bare(Species::Theta))
    }

    #[test]
    fn odd_atoms_anticommute() {
        let w = GradedExpr::atom(ghost(L::iu("M")));
        let e = theta().times(&w) + w.times(&theta());
        assert!(e.normalize().unwrap().is_zero());
        assert!(theta().times(&theta()).normalize().unwrap().is_zero());
    }

    #[test]
    fn contracted_odd_square_vanishes() {
        let e = GradedExpr::product(vec![ghost(L::iu("K")), ghost(L::id("K"))]);
        assert!(e.normalize().unwrap().is_zero());
    }

    #[test]
    fn leibniz_rule() {
        let w_k = ghost(L::iu("K"));
        let dw = ghost(L::iu("M")).with_deriv(L::id("K"));
        let e = GradedExpr::product(vec![w_k.clone(), dw.clone()]).partial(&L::ld("mu"));
        let expect = GradedExpr::product(vec![w_k.clone().with_deriv(L::ld("mu")), dw.clone()])
            + GradedExpr::product(vec![w_k, dw.with_deriv(L::ld("mu"))]);
        assert_eq!(e.normalize().unwrap(), expect.normalize().unwrap());
    }

    #[test]
    fn theta_is_constant() {
        let e = theta().partial(&L::ld("mu"));
        assert!(e.normalize().unwrap().is_zero());
    }

    #[test]
    fn operators_keep_order() {
        let b = |n: &str| GradedAtom::new(Species::OpB, vec![L::lu(n)], vec![]);
        let c = GradedAtom::bare(Species::OpC);
        let bc = GradedExpr::product(vec![b("mu"), c.clone()]).normalize().unwrap();
        let cb = GradedExpr::product(vec![c, b("mu")]).normalize().unwrap();
        assert_ne!(bc, cb);
        let comm = NormalizeOptions {
            commuting_operators: true,
        };
        let bc2 = GradedExpr::product(vec![b("mu"), GradedAtom::bare(Species::OpC)]);
        let cb2 = GradedExpr::product(vec![GradedAtom::bare(Species::OpC), b("mu")]);
        assert_eq!(bc2.normalize_with(comm).unwrap(), cb2.normalize_with(comm).unwrap());
    }

    #[test]
    fn field_strength_is_antisymmetric() {
        let f = |a: L, b: L| GradedAtom::new(Species::OpF, vec![a, b], vec![]);
        let e = GradedExpr::atom(f(L::ld("mu"), L::ld("nu"))) + GradedExpr::atom(f(L::ld("nu"), L::ld("mu")));
        assert!(e.normalize().unwrap().is_zero());
        let ff = GradedExpr::product(vec![f(L::lu("mu"), L::lu("nu")), f(L::ld("mu"), L::ld("nu"))]);
        let ff2 = GradedExpr::product(vec![f(L::lu("nu"), L::lu("mu")), f(L::ld("mu"), L::ld("nu"))]);
        assert_eq!(ff.normalize().unwrap(), ff2.scale(&Coeff::int(-1)).normalize().unwrap());
    }

    #[test]
    fn parity_violating_binding_is_rejected() {
        let e = GradedExpr::atom(ghost(L::iu("M")));
        let r = e.substitute(|s| *s == Species::Ghost, |_| Ok(GradedExpr::one()));
        assert!(matches!(r, Err(Error::ParityViolation(_))));
    }

    #[test]
    fn json_round_trip() {
        let e = GradedExpr::product(vec![ghost(L::iu("K")), ghost(L::iu("M")).with_deriv(L::id("K"))])
            .scale(&Coeff::frac(-1, 2))
            .normalize()
            .unwrap();
        assert_eq!(GradedExpr::from_json(&e.to_json()).unwrap(), e);
    }
}
