//! Exact coefficients: rational functions of the symbolic inner dimension `D`
//! over the rationals.
//!
//! Every symbolic expression in the crate carries its numeric weight as a
//! [`Coeff`]. The inner dimension never gets specialized here; callers do that
//! at an evaluation boundary through [`Coeff::eval_at`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

/// Shorthand for the rational `n/d`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand for the integer `n` as a rational.
pub fn qi(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_to_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Univariate polynomial in `D`, coefficients in ascending degree, no
/// trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly(vec![c]);
        p.trim();
        p
    }

    /// The monomial `D`.
    pub fn d() -> Self {
        Poly(vec![Rational::zero(), Rational::one()])
    }

    pub fn from_coeffs(c: Vec<Rational>) -> Self {
        let mut p = Poly(c);
        p.trim();
        p
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.0[0].clone()),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::from_coeffs(self.0.iter().map(|x| x * c).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Polynomial long division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.lead();
        let mut rem = self.0.clone();
        let mut quot = vec![Rational::zero(); self.0.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let factor = rem.last().unwrap() / &lead;
            for (i, c) in divisor.0.iter().enumerate() {
                rem[shift + i] -= &factor * c;
            }
            quot[shift] = factor;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (Poly::from_coeffs(quot), Poly::from_coeffs(rem))
    }

    fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        self.scale(&(Rational::one() / l))
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }

    pub fn to_display_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (deg, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mag_s = rational_to_string(&mag);
            match deg {
                0 => out.push_str(&mag_s),
                _ => {
                    if !mag.is_one() {
                        out.push_str(&mag_s);
                        out.push('*');
                    }
                    out.push('D');
                    if deg > 1 {
                        out.push_str(&format!("^{deg}"));
                    }
                }
            }
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        let mut v = vec![Rational::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            v[i] += c;
        }
        for (i, c) in rhs.0.iter().enumerate() {
            v[i] += c;
        }
        Poly::from_coeffs(v)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![Rational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::from_coeffs(v)
    }
}

/// Reduced rational function `num(D)/den(D)` with a monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coeff {
    num: Poly,
    den: Poly,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff {
            num: Poly::zero(),
            den: Poly::constant(Rational::one()),
        }
    }

    pub fn one() -> Self {
        Coeff::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Coeff {
            num: Poly::constant(r),
            den: Poly::constant(Rational::one()),
        }
    }

    pub fn int(n: i64) -> Self {
        Coeff::from_rational(qi(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Coeff::from_rational(q(n, d))
    }

    /// The inner dimension `D` itself.
    pub fn d() -> Self {
        Coeff::from_poly(Poly::d())
    }

    /// `D + c`.
    pub fn d_plus(c: i64) -> Self {
        Coeff::from_poly(Poly::from_coeffs(vec![qi(c), Rational::one()]))
    }

    pub fn from_poly(p: Poly) -> Self {
        Coeff {
            num: p,
            den: Poly::constant(Rational::one()),
        }
    }

    pub fn ratio(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator in coefficient");
        let mut c = Coeff { num, den };
        c.reduce();
        c
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::constant(Rational::one());
            return;
        }
        let g = Poly::gcd(&self.num, &self.den);
        if g.degree().unwrap_or(0) > 0 {
            self.num = self.num.div_rem(&g).0;
            self.den = self.den.div_rem(&g).0;
        }
        let l = self.den.lead();
        if !l.is_one() {
            let inv = Rational::one() / l;
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.degree() == Some(0) && self.num == self.den
    }

    /// `Some(r)` when the coefficient does not depend on `D`.
    pub fn as_rational(&self) -> Option<Rational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn as_poly(&self) -> Option<Poly> {
        (self.den.degree() == Some(0)).then(|| self.num.scale(&(Rational::one() / self.den.lead())))
    }

    /// Value at a concrete inner dimension; `None` at a pole.
    pub fn eval_at(&self, d: &Rational) -> Option<Rational> {
        let den = self.den.eval(d);
        if den.is_zero() {
            return None;
        }
        Some(self.num.eval(d) / den)
    }

    pub fn inv(&self) -> Coeff {
        assert!(!self.is_zero(), "inverse of zero coefficient");
        Coeff::ratio(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, e: i32) -> Coeff {
        let base = if e < 0 { self.inv() } else { self.clone() };
        (0..e.unsigned_abs()).fold(Coeff::one(), |acc, _| &acc * &base)
    }

    /// Sign of a constant coefficient; `None` when it depends on `D`.
    pub fn signum(&self) -> Option<i32> {
        let r = self.as_rational()?;
        Some(if r.is_zero() {
            0
        } else if r.is_positive() {
            1
        } else {
            -1
        })
    }

    pub fn to_display_string(&self) -> String {
        if self.den.degree() == Some(0) {
            if let Some(r) = self.as_rational() {
                return rational_to_string(&r);
            }
            return self.num.to_display_string();
        }
        format!(
            "({})/({})",
            self.num.to_display_string(),
            self.den.to_display_string()
        )
    }
}

impl Default for Coeff {
    fn default() -> Self {
        Coeff::zero()
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display_string())
    }
}

impl PartialOrd for Coeff {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Coeff {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num, &self.den).cmp(&(&other.num, &other.den))
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        if self.den == rhs.den {
            return Coeff::ratio(&self.num + &rhs.num, self.den.clone());
        }
        Coeff::ratio(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        self + &(-rhs)
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        if self.is_zero() || rhs.is_zero() {
            return Coeff::zero();
        }
        Coeff::ratio(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &Coeff {
    type Output = Coeff;
    fn div(self, rhs: &Coeff) -> Coeff {
        self * &rhs.inv()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Coeff {
            type Output = Coeff;
            fn $m(self, rhs: Coeff) -> Coeff {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

impl From<Rational> for Coeff {
    fn from(r: Rational) -> Self {
        Coeff::from_rational(r)
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    num: Vec<String>,
    den: Vec<String>,
}

impl Serialize for Coeff {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CoeffRepr {
            num: self.num.0.iter().map(rational_to_string).collect(),
            den: self.den.0.iter().map(rational_to_string).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        use serde::de::Error;
        let repr = CoeffRepr::deserialize(d)?;
        let parse = |v: &[String]| -> Result<Poly, De::Error> {
            v.iter()
                .map(|s| parse_rational(s).ok_or_else(|| De::Error::custom(format!("bad rational `{s}`"))))
                .collect::<Result<Vec<_>, _>>()
                .map(Poly::from_coeffs)
        };
        let num = parse(&repr.num)?;
        let den = parse(&repr.den)?;
        if den.is_zero() {
            return Err(De::Error::custom("zero denominator"));
        }
        Ok(Coeff::ratio(num, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_common_factors() {
        // D(D+2) / (D(D+2)(D+4)) = 1/(D+4)
        let dd2 = &Coeff::d() * &Coeff::d_plus(2);
        let c = &dd2 / &(&dd2 * &Coeff::d_plus(4));
        assert_eq!(c, Coeff::d_plus(4).inv());
        assert_eq!(c.eval_at(&qi(4)), Some(q(1, 8)));
    }

    #[test]
    fn constant_arithmetic() {
        let c = &Coeff::frac(1, 6) - &Coeff::frac(1, 4);
        assert_eq!(c.as_rational(), Some(q(-1, 12)));
        assert!((&c - &c).is_zero());
        assert_eq!(c.signum(), Some(-1));
    }

    #[test]
    fn display_forms() {
        let p = Coeff::from_poly(Poly::from_coeffs(vec![qi(-68), qi(11)]));
        assert_eq!(p.to_string(), "11*D - 68");
        assert_eq!(Coeff::frac(-5, 3).to_string(), "-5/3");
        let r = Coeff::d_plus(2).inv();
        assert_eq!(r.to_string(), "(1)/(D + 2)");
    }

    #[test]
    fn json_round_trip() {
        let c = &Coeff::frac(11, 12) * &(&Coeff::d() / &Coeff::d_plus(2));
        let s = serde_json::to_string(&c).unwrap();
        let back: Coeff = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
