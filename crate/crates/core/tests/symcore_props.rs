use std::collections::BTreeMap;

use proptest::prelude::*;
use qid_core::symcore::{Coeff, IndexLabel, NumericEnv, Rational, TensorExpr};

/// One contracted pair: `(inner space, leg a, leg b, upper first)`.
type Pair = (bool, u32, u32, bool);
/// A term: contracted pairs, an optional free-index leg, and a coefficient.
type TermSpec = (Vec<Pair>, Option<u32>, (i64, i64));

fn momentum(inner: bool, leg: u32, name: &str, up: bool) -> TensorExpr {
    let l = match (inner, up) {
        (false, true) => IndexLabel::lu(name),
        (false, false) => IndexLabel::ld(name),
        (true, true) => IndexLabel::iu(name),
        (true, false) => IndexLabel::id(name),
    };
    if inner {
        TensorExpr::kk(leg, l)
    } else {
        TensorExpr::k(leg, l)
    }
}

fn build(terms: &[TermSpec], prefix: &str) -> TensorExpr {
    let mut e = TensorExpr::zero();
    for (pairs, free, (n, d)) in terms {
        let mut t = TensorExpr::num(Coeff::frac(*n, *d));
        for (j, (inner, a, b, up)) in pairs.iter().enumerate() {
            let name = format!("{prefix}{j}");
            t = t
                .times(&momentum(*inner, *a, &name, *up))
                .times(&momentum(*inner, *b, &name, !*up));
        }
        if let Some(leg) = free {
            t = t.times(&TensorExpr::k(*leg, IndexLabel::ld("mu")));
        }
        e = e + t;
    }
    e
}

fn terms() -> impl Strategy<Value = Vec<TermSpec>> {
    let pair = (any::<bool>(), 1u32..4, 1u32..4, any::<bool>());
    let term = (
        prop::collection::vec(pair, 0..4),
        prop::option::of(1u32..4),
        (-5i64..6, 1i64..5),
    );
    // all terms share the free-index structure
    (prop::collection::vec(term, 1..4), prop::option::of(1u32..4)).prop_map(|(mut ts, free)| {
        for t in &mut ts {
            t.1 = free;
        }
        ts
    })
}

fn env(vals: &[i64]) -> NumericEnv {
    let r = |i: usize| Rational::from_integer(vals[i % vals.len()].into());
    let mut e = NumericEnv {
        inner_dim: 3,
        ..NumericEnv::default()
    };
    for leg in 1..4u32 {
        let o = leg as usize * 7;
        e.lorentz.insert(leg, [r(o), r(o + 1), r(o + 2), r(o + 3)]);
        e.inner.insert(leg, vec![r(o + 4), r(o + 5), r(o + 6)]);
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalize_is_idempotent(ts in terms()) {
        let c = build(&ts, "x").canonicalize().unwrap();
        prop_assert_eq!(c.canonicalize().unwrap(), c);
    }

    #[test]
    fn dummy_names_do_not_matter(ts in terms()) {
        let a = build(&ts, "x").canonicalize().unwrap();
        let b = build(&ts, "y").canonicalize().unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn term_order_does_not_matter(ts in terms()) {
        let mut rev = ts.clone();
        rev.reverse();
        for t in &mut rev {
            t.0.reverse();
        }
        prop_assert_eq!(build(&ts, "x").canonicalize().unwrap(), build(&rev, "x").canonicalize().unwrap());
    }

    #[test]
    fn canonical_form_has_same_value(ts in terms(), vals in prop::collection::vec(-4i64..5, 8..16), mu in 0usize..4) {
        let e = build(&ts, "x");
        let c = e.canonicalize().unwrap();
        let env = env(&vals);
        let free: BTreeMap<String, usize> = [("mu".to_string(), mu)].into();
        prop_assert_eq!(e.eval(&env, &free).unwrap(), c.eval(&env, &free).unwrap());
    }
}
