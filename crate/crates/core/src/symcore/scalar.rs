//! Formal commuting scalars (Λ, ξ, g, ε, Ω₄, Ω_D, m, i, π) and their
//! monomials. Exponents may depend linearly on `D`, so `Λ^{D+2}` is a
//! single factor.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::coeff::Coeff;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    /// The imaginary unit. Powers are folded into the coefficient modulo 2.
    I,
    Lambda,
    Xi,
    G,
    Epsilon,
    Omega4,
    OmegaD,
    Mass,
    Pi,
}

impl Symbol {
    pub const ALL: [Symbol; 9] = [
        Symbol::I,
        Symbol::Lambda,
        Symbol::Xi,
        Symbol::G,
        Symbol::Epsilon,
        Symbol::Omega4,
        Symbol::OmegaD,
        Symbol::Mass,
        Symbol::Pi,
    ];

    pub fn plain(self) -> &'static str {
        match self {
            Symbol::I => "i",
            Symbol::Lambda => "Lambda",
            Symbol::Xi => "xi",
            Symbol::G => "g",
            Symbol::Epsilon => "eps",
            Symbol::Omega4 => "Omega4",
            Symbol::OmegaD => "OmegaD",
            Symbol::Mass => "m",
            Symbol::Pi => "pi",
        }
    }

    pub fn latex(self) -> &'static str {
        match self {
            Symbol::I => "i",
            Symbol::Lambda => "\\Lambda",
            Symbol::Xi => "\\xi",
            Symbol::G => "g",
            Symbol::Epsilon => "\\varepsilon",
            Symbol::Omega4 => "\\Omega_{4}",
            Symbol::OmegaD => "\\Omega_{D}",
            Symbol::Mass => "m",
            Symbol::Pi => "\\pi",
        }
    }
}

/// Exponent `c + d·D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Exp {
    pub c: i32,
    pub d: i32,
}

impl Exp {
    pub const fn int(c: i32) -> Self {
        Exp { c, d: 0 }
    }

    /// `D + c`.
    pub const fn dim_plus(c: i32) -> Self {
        Exp { c, d: 1 }
    }

    pub fn is_zero(self) -> bool {
        self.c == 0 && self.d == 0
    }

    pub fn add(self, o: Exp) -> Exp {
        Exp {
            c: self.c + o.c,
            d: self.d + o.d,
        }
    }

    pub fn neg(self) -> Exp {
        Exp {
            c: -self.c,
            d: -self.d,
        }
    }

    pub fn scale(self, k: i32) -> Exp {
        Exp {
            c: self.c * k,
            d: self.d * k,
        }
    }

    pub fn at_dim(self, dim: i64) -> i64 {
        self.c as i64 + self.d as i64 * dim
    }

    /// Body of a superscript: `2`, `D+2`, `-1`, `2D-1`.
    pub fn to_script(self) -> String {
        let dpart = match self.d {
            0 => String::new(),
            1 => "D".into(),
            -1 => "-D".into(),
            k => format!("{k}D"),
        };
        match (self.d, self.c) {
            (0, c) => c.to_string(),
            (_, 0) => dpart,
            (_, c) if c > 0 => format!("{dpart}+{c}"),
            (_, c) => format!("{dpart}{c}"),
        }
    }

    pub fn parse_script(s: &str) -> Option<Exp> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(pos) = s.find('D') {
            let (head, tail) = (&s[..pos], &s[pos + 1..]);
            let d = match head {
                "" | "+" => 1,
                "-" => -1,
                h => h.parse().ok()?,
            };
            let c = if tail.is_empty() {
                0
            } else {
                tail.parse().ok()?
            };
            Some(Exp { c, d })
        } else {
            s.parse().ok().map(Exp::int)
        }
    }
}

/// Product of formal scalar powers. `I` is never stored; see [`Monomial::mul`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Monomial(BTreeMap<Symbol, Exp>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// A single power, together with the coefficient that absorbs any power
    /// of `i`.
    pub fn power(sym: Symbol, e: Exp) -> (Coeff, Monomial) {
        Monomial::one().mul(&Monomial::raw(sym, e))
    }

    fn raw(sym: Symbol, e: Exp) -> Monomial {
        let mut m = BTreeMap::new();
        if !e.is_zero() {
            m.insert(sym, e);
        }
        Monomial(m)
    }

    pub fn factors(&self) -> impl Iterator<Item = (Symbol, Exp)> + '_ {
        self.0.iter().map(|(s, e)| (*s, *e))
    }

    pub fn exponent(&self, s: Symbol) -> Exp {
        self.0.get(&s).copied().unwrap_or(Exp::int(0))
    }

    /// Product. Powers of `i` are reduced: `i² = −1`, so the returned sign
    /// (±1, as a coefficient) and a residual first power of `i` remain.
    pub fn mul(&self, other: &Monomial) -> (Coeff, Monomial) {
        let mut m = self.0.clone();
        for (s, e) in &other.0 {
            let ne = m.get(s).copied().unwrap_or(Exp::int(0)).add(*e);
            if ne.is_zero() {
                m.remove(s);
            } else {
                m.insert(*s, ne);
            }
        }
        let mut sign = Coeff::one();
        if let Some(e) = m.get(&Symbol::I).copied() {
            assert_eq!(e.d, 0, "power of i cannot depend on D");
            let r = e.c.rem_euclid(4);
            if r >= 2 {
                sign = Coeff::int(-1);
            }
            if r % 2 == 1 {
                m.insert(Symbol::I, Exp::int(1));
            } else {
                m.remove(&Symbol::I);
            }
        }
        (sign, Monomial(m))
    }

    pub fn inv(&self) -> (Coeff, Monomial) {
        let m = Monomial(self.0.iter().map(|(s, e)| (*s, e.neg())).collect());
        Monomial::one().mul(&m)
    }

    pub fn without(&self, s: Symbol) -> Monomial {
        let mut m = self.0.clone();
        m.remove(&s);
        Monomial(m)
    }

    pub fn to_plain(&self) -> String {
        self.0
            .iter()
            .map(|(s, e)| {
                if *e == Exp::int(1) {
                    s.plain().to_string()
                } else {
                    format!("{}^({})", s.plain(), e.to_script())
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn to_latex(&self) -> String {
        self.0
            .iter()
            .map(|(s, e)| {
                if *e == Exp::int(1) {
                    s.latex().to_string()
                } else {
                    format!("{}^{{{}}}", s.latex(), e.to_script())
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_plain())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let (c, i) = Monomial::power(Symbol::I, Exp::int(1));
        assert!(c.is_one());
        let (s, m) = i.mul(&i);
        assert_eq!(s, Coeff::int(-1));
        assert!(m.is_one());
        let (s3, m3) = Monomial::power(Symbol::I, Exp::int(3));
        assert_eq!(s3, Coeff::int(-1));
        assert_eq!(m3, i);
    }

    #[test]
    fn dimension_dependent_exponents() {
        let (_, a) = Monomial::power(Symbol::Lambda, Exp::dim_plus(2));
        let (_, b) = Monomial::power(Symbol::Lambda, Exp::int(-2));
        let (_, ab) = a.mul(&b);
        assert_eq!(ab.exponent(Symbol::Lambda), Exp { c: 0, d: 1 });
        assert_eq!(ab.to_plain(), "Lambda^(D)");
    }

    #[test]
    fn exponent_scripts_round_trip() {
        for e in [Exp::int(3), Exp::int(-1), Exp::dim_plus(2), Exp { c: -1, d: 2 }, Exp { c: 0, d: -1 }] {
            assert_eq!(Exp::parse_script(&e.to_script()), Some(e));
        }
    }
}
