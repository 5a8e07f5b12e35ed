//! LaTeX emitter for both algebras and a parser for the emitted tensor
//! subset.
//!
//! Label spaces are not written out. On parsing, Greek names (`\mu`) and
//! canonical dummies `\alpha_{n}` are Lorentz labels, Latin names and
//! canonical dummies `Z_{n}` are inner labels. Expressions whose labels
//! follow this convention round-trip exactly.

use num_traits::{One, Signed, Zero};

use super::coeff::{Coeff, Poly, Rational};
use super::index::{IndexLabel, Space, Variance};
use super::scalar::{Exp, Symbol};
use super::tensor::{TensorAtom, TensorExpr};
use crate::error::{Error, Result};

const GREEK: [&str; 12] = [
    "alpha", "beta", "gamma", "delta", "kappa", "lambda", "mu", "nu", "rho", "sigma", "tau", "phi",
];

pub(crate) fn latex_label(l: &IndexLabel) -> String {
    if let Some(k) = l.name.strip_prefix('#') {
        return match l.space {
            Space::Lorentz => format!("\\alpha_{{{k}}}"),
            Space::Inner => format!("Z_{{{k}}}"),
        };
    }
    if let Some(k) = l.name.strip_prefix('%') {
        return format!("\\%{k}");
    }
    if GREEK.contains(&l.name.as_str()) {
        format!("\\{}", l.name)
    } else {
        l.name.clone()
    }
}

fn rational_latex(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

fn poly_latex(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (deg, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let dpart = match deg {
            0 => String::new(),
            1 => "D".into(),
            k => format!("D^{{{k}}}"),
        };
        if deg == 0 {
            out.push_str(&rational_latex(&mag));
        } else if mag.is_one() {
            out.push_str(&dpart);
        } else {
            out.push_str(&format!("{} {dpart}", rational_latex(&mag)));
        }
    }
    out
}

/// Splits a coefficient into an overall sign and a LaTeX body.
pub fn coeff_latex(c: &Coeff) -> (bool, String) {
    if let Some(r) = c.as_rational() {
        return (r.is_negative(), rational_latex(&r.abs()));
    }
    let den = c.denom();
    if den.degree() == Some(0) {
        return (false, format!("\\left({}\\right)", poly_latex(c.numer())));
    }
    (
        false,
        format!("\\frac{{{}}}{{{}}}", poly_latex(c.numer()), poly_latex(den)),
    )
}

fn groups_latex(labels: &[&IndexLabel]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < labels.len() {
        let v = labels[i].variance;
        let mut names = vec![];
        while i < labels.len() && labels[i].variance == v {
            names.push(latex_label(labels[i]));
            i += 1;
        }
        if !out.is_empty() {
            out.push_str("{}");
        }
        let mark = if v == Variance::Upper { '^' } else { '_' };
        out.push_str(&format!("{mark}{{{}}}", names.join(" ")));
    }
    out
}

fn power_suffix(p: i32) -> String {
    if p == 1 {
        String::new()
    } else {
        format!("^{{{p}}}")
    }
}

fn atom_latex(a: &TensorAtom, p: i32) -> String {
    match a {
        TensorAtom::MetricEta { a, b } => format!("\\eta{}", groups_latex(&[a, b])),
        TensorAtom::KronDelta { a, b } => format!("\\delta{}", groups_latex(&[a, b])),
        TensorAtom::Momentum { leg, index } => format!("k_{{{leg}}}{{}}{}", groups_latex(&[index])),
        TensorAtom::InnerMomentum { leg, index } => {
            format!("K_{{{leg}}}{{}}{}", groups_latex(&[index]))
        }
        TensorAtom::Dot { a, b, space } => {
            let s = if *space == Space::Lorentz { "k" } else { "K" };
            format!("({s}_{{{a}}}\\cdot {s}_{{{b}}}){}", power_suffix(p))
        }
        TensorAtom::PropagatorDen { leg } => {
            format!("(k_{{{leg}}}^{{2}}-i\\epsilon){}", power_suffix(p))
        }
        TensorAtom::Field {
            name,
            lorentz,
            inner,
            derivs,
        } => {
            let mut s = String::new();
            for d in derivs {
                s.push_str(if d.space == Space::Lorentz {
                    "\\partial"
                } else {
                    "\\nabla"
                });
                s.push_str(&groups_latex(&[d]));
            }
            s.push_str(&format!("\\mathrm{{{name}}}"));
            let slots: Vec<&IndexLabel> = lorentz.iter().chain(inner).collect();
            s.push_str(&groups_latex(&slots));
            s
        }
    }
}

pub fn tensor_to_latex(e: &TensorExpr) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (t, c)) in e.terms().enumerate() {
        let (neg, body) = coeff_latex(c);
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
        for (a, p) in &t.atoms {
            if a.is_indexed() {
                for _ in 0..*p {
                    parts.push(atom_latex(a, 1));
                }
            } else {
                parts.push(atom_latex(a, *p));
            }
        }
        out.push_str(&parts.join(" "));
    }
    out
}

struct Parser<'a> {
    s: &'a str,
    i: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser { s, i: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.i..]
    }

    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!("{what} at offset {} in `{}`", self.i, self.s)))
    }

    fn ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.i += self.rest().chars().next().unwrap().len_utf8();
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        if self.rest().starts_with(tok) {
            self.i += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(&format!("expected `{tok}`"))
        }
    }

    fn braced(&mut self) -> Result<&'a str> {
        self.expect("{")?;
        let start = self.i;
        let mut depth = 1;
        for (off, ch) in self.rest().char_indices() {
            match ch {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        let body = &self.s[start..start + off];
                        self.i = start + off + 1;
                        return Ok(body);
                    }
                }
                _ => {}
            }
        }
        self.err("unbalanced braces")
    }

    fn uint(&mut self) -> Result<u32> {
        let body = self.braced()?;
        body.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad integer `{body}`")))
    }

    fn at_term_end(&self) -> bool {
        let r = self.rest();
        r.is_empty() || r.starts_with('+') || r.starts_with('-')
    }
}

fn label_from_token(tok: &str, var: Variance, forced: Option<Space>) -> Result<IndexLabel> {
    let (name, space) = if let Some(k) = tok.strip_prefix("\\alpha_{").and_then(|t| t.strip_suffix('}')) {
        (format!("#{k}"), Space::Lorentz)
    } else if let Some(k) = tok.strip_prefix("Z_{").and_then(|t| t.strip_suffix('}')) {
        (format!("#{k}"), Space::Inner)
    } else if let Some(k) = tok.strip_prefix("\\%") {
        (format!("%{k}"), forced.unwrap_or(Space::Inner))
    } else if let Some(g) = tok.strip_prefix('\\') {
        if !GREEK.contains(&g) {
            return Err(Error::Parse(format!("unknown index `{tok}`")));
        }
        (g.to_string(), Space::Lorentz)
    } else if !tok.is_empty() && tok.chars().all(|c| c.is_ascii_alphanumeric()) {
        (tok.to_string(), Space::Inner)
    } else {
        return Err(Error::Parse(format!("bad index token `{tok}`")));
    };
    Ok(IndexLabel::new(&name, forced.unwrap_or(space), var))
}

fn parse_groups(p: &mut Parser, forced: Option<Space>) -> Result<Vec<IndexLabel>> {
    let mut out = Vec::new();
    loop {
        if p.eat("{}") {
            continue;
        }
        let var = if p.rest().starts_with("^{") {
            Variance::Upper
        } else if p.rest().starts_with("_{") {
            Variance::Lower
        } else {
            break;
        };
        p.i += 1;
        for tok in p.braced()?.split_whitespace() {
            out.push(label_from_token(tok, var, forced)?);
        }
    }
    Ok(out)
}

fn parse_rational_tok(p: &mut Parser) -> Result<Option<Rational>> {
    if p.eat("\\frac") {
        let n = p.braced()?;
        let d = p.braced()?;
        let parse = |x: &str| {
            x.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer `{x}`")))
        };
        return Ok(Some(Rational::new(parse(n)?.into(), parse(d)?.into())));
    }
    let digits: String = p.rest().chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        return Ok(None);
    }
    p.i += digits.len();
    Ok(Some(
        digits
            .parse::<num_bigint::BigInt>()
            .map(Rational::from_integer)
            .map_err(|e| Error::Parse(e.to_string()))?,
    ))
}

fn parse_poly(src: &str) -> Result<Poly> {
    let mut p = Parser::new(src);
    let mut acc = Poly::zero();
    let mut sign = Rational::one();
    p.ws();
    if p.eat("-") {
        sign = -sign;
    }
    loop {
        p.ws();
        let c = parse_rational_tok(&mut p)?.unwrap_or_else(Rational::one);
        p.ws();
        let deg = if p.eat("D") {
            if p.rest().starts_with("^{") {
                p.i += 1;
                p.uint()? as usize
            } else {
                1
            }
        } else {
            0
        };
        let mut coeffs = vec![Rational::zero(); deg + 1];
        coeffs[deg] = c * &sign;
        acc = &acc + &Poly::from_coeffs(coeffs);
        p.ws();
        if p.rest().is_empty() {
            return Ok(acc);
        }
        sign = if p.eat("+") {
            Rational::one()
        } else if p.eat("-") {
            -Rational::one()
        } else {
            return p.err("expected `+` or `-` in polynomial");
        };
    }
}

fn parse_coeff(p: &mut Parser) -> Result<Option<Coeff>> {
    if p.rest().starts_with("\\frac") {
        let save = p.i;
        p.i += 5;
        let n = p.braced()?;
        let d = p.braced()?;
        if n.contains('D') || d.contains('D') || n.contains("\\frac") {
            return Ok(Some(Coeff::ratio(parse_poly(n)?, parse_poly(d)?)));
        }
        p.i = save;
        return Ok(parse_rational_tok(p)?.map(Coeff::from_rational));
    }
    if p.eat("\\left(") {
        let start = p.i;
        let Some(end) = p.rest().find("\\right)") else {
            return p.err("unterminated \\left(");
        };
        let body = &p.s[start..start + end];
        p.i = start + end + "\\right)".len();
        return Ok(Some(Coeff::from_poly(parse_poly(body)?)));
    }
    Ok(parse_rational_tok(p)?.map(Coeff::from_rational))
}

fn parse_exp(p: &mut Parser) -> Result<Exp> {
    if p.rest().starts_with("^{") {
        p.i += 1;
        let body = p.braced()?;
        Exp::parse_script(body).ok_or_else(|| Error::Parse(format!("bad exponent `{body}`")))
    } else {
        Ok(Exp::int(1))
    }
}

fn parse_power(p: &mut Parser) -> Result<i32> {
    let e = parse_exp(p)?;
    if e.d != 0 {
        return p.err("dimension-dependent atom power");
    }
    Ok(e.c)
}

fn parse_factor(p: &mut Parser) -> Result<TensorExpr> {
    const SYMS: [(&str, Symbol); 9] = [
        ("\\Lambda", Symbol::Lambda),
        ("\\xi", Symbol::Xi),
        ("\\varepsilon", Symbol::Epsilon),
        ("\\Omega_{4}", Symbol::Omega4),
        ("\\Omega_{D}", Symbol::OmegaD),
        ("\\pi", Symbol::Pi),
        ("i", Symbol::I),
        ("g", Symbol::G),
        ("m", Symbol::Mass),
    ];
    for (tok, s) in SYMS {
        if p.eat(tok) {
            let e = parse_exp(p)?;
            return Ok(TensorExpr::sym(s, e));
        }
    }
    if p.eat("\\eta") {
        let ls = parse_groups(p, Some(Space::Lorentz))?;
        let [a, b]: [IndexLabel; 2] = ls
            .try_into()
            .map_err(|_| Error::Parse("metric needs two labels".into()))?;
        return Ok(TensorExpr::eta(a, b));
    }
    if p.eat("\\delta") {
        let ls = parse_groups(p, Some(Space::Inner))?;
        let [a, b]: [IndexLabel; 2] = ls
            .try_into()
            .map_err(|_| Error::Parse("delta needs two labels".into()))?;
        return Ok(TensorExpr::delta(a, b));
    }
    for (tok, space) in [("k_", Space::Lorentz), ("K_", Space::Inner)] {
        if p.eat(tok) {
            let leg = p.uint()?;
            let mut ls = parse_groups(p, Some(space))?;
            if ls.len() != 1 {
                return p.err("momentum needs one label");
            }
            let l = ls.remove(0);
            return Ok(match space {
                Space::Lorentz => TensorExpr::k(leg, l),
                Space::Inner => TensorExpr::kk(leg, l),
            });
        }
    }
    if p.eat("(") {
        let space = if p.eat("k_") {
            Space::Lorentz
        } else if p.eat("K_") {
            Space::Inner
        } else {
            return p.err("expected a momentum inside parentheses");
        };
        let a = p.uint()?;
        if p.eat("^{2}-i\\epsilon)") {
            let pw = parse_power(p)?;
            return Ok(TensorExpr::prop_den(a, pw));
        }
        p.expect("\\cdot ")?;
        p.expect(if space == Space::Lorentz { "k_" } else { "K_" })?;
        let b = p.uint()?;
        p.expect(")")?;
        let pw = parse_power(p)?;
        return Ok(TensorExpr::dot_pow(a, b, space, pw));
    }
    let mut derivs = Vec::new();
    loop {
        if p.eat("\\partial") {
            derivs.extend(parse_groups(p, Some(Space::Lorentz))?);
        } else if p.eat("\\nabla") {
            derivs.extend(parse_groups(p, Some(Space::Inner))?);
        } else {
            break;
        }
    }
    if p.eat("\\mathrm") {
        let name = p.braced()?.to_string();
        let slots = parse_groups(p, None)?;
        let (lorentz, inner): (Vec<_>, Vec<_>) = slots.into_iter().partition(|l| l.space == Space::Lorentz);
        return Ok(TensorExpr::atom(TensorAtom::Field {
            name,
            lorentz,
            inner,
            derivs,
        }));
    }
    p.err("unrecognized factor")
}

pub fn tensor_from_latex(src: &str) -> Result<TensorExpr> {
    let mut p = Parser::new(src);
    p.ws();
    if p.rest().trim() == "0" {
        return Ok(TensorExpr::zero());
    }
    let mut total = TensorExpr::zero();
    let mut sign = Coeff::one();
    if p.eat("-") {
        sign = Coeff::int(-1);
    }
    loop {
        p.ws();
        let c = parse_coeff(&mut p)?.unwrap_or_else(Coeff::one);
        let mut term = TensorExpr::num(&c * &sign);
        loop {
            p.ws();
            if p.at_term_end() {
                break;
            }
            let f = parse_factor(&mut p)?;
            term = term.times(&f);
        }
        total = total + term;
        p.ws();
        if p.rest().is_empty() {
            break;
        }
        sign = if p.eat("+") {
            Coeff::one()
        } else if p.eat("-") {
            Coeff::int(-1)
        } else {
            return p.err("expected `+` or `-`");
        };
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::index::IndexLabel as L;
    use crate::symcore::coeff::qi;
    use crate::symcore::Symbol;

    fn round_trip(e: &TensorExpr) {
        let c = e.canonicalize().unwrap();
        let s = tensor_to_latex(&c);
        let back = tensor_from_latex(&s).unwrap().canonicalize().unwrap();
        assert_eq!(back, c, "latex was {s}");
    }

    #[test]
    fn simple_round_trips() {
        round_trip(&TensorExpr::zero());
        round_trip(&TensorExpr::num(Coeff::frac(-11, 12)));
        round_trip(
            &((TensorExpr::k(2, L::lu("mu")) * TensorExpr::k(2, L::lu("nu")).scale(&Coeff::frac(1, 3))
                - TensorExpr::eta(L::lu("mu"), L::lu("nu")) * TensorExpr::dot(2, 2, Space::Lorentz).scale(&Coeff::frac(1, 12)))
                * TensorExpr::sym(Symbol::I, Exp::int(1))),
        );
    }

    #[test]
    fn dimension_dependent_pieces() {
        let c = Coeff::d_plus(2).inv();
        let e = TensorExpr::num(c)
            * TensorExpr::sym(Symbol::Lambda, Exp::dim_plus(2))
            * TensorExpr::sym(Symbol::OmegaD, Exp::int(1))
            * TensorExpr::delta(L::iu("I"), L::iu("J"));
        round_trip(&e);
        round_trip(&TensorExpr::num(Coeff::from_poly(Poly::from_coeffs(vec![qi(-68), qi(11)]))));
    }

    #[test]
    fn dummies_and_fields() {
        let f = TensorExpr::atom(TensorAtom::Field {
            name: "F".into(),
            lorentz: vec![L::lu("a1"), L::ld("nu")],
            inner: vec![L::iu("M")],
            derivs: vec![L::ld("rho")],
        });
        let e = f * TensorExpr::k(1, L::ld("a1")) * TensorExpr::prop_den(1, -1) * TensorExpr::kk(3, L::id("M"));
        round_trip(&e);
    }
}
