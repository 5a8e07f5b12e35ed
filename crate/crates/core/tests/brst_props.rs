use proptest::prelude::*;
use qid_core::brst::s;
use qid_core::symcore::{GradedAtom, GradedExpr, IndexLabel, Species};

/// `(generator, derivative kinds)`; a derivative kind is Lorentz when true.
type Spec = (u8, Vec<bool>);

fn atom(slot: usize, spec: &Spec) -> GradedAtom {
    let n = |p: &str| format!("{p}{slot}");
    let mut a = match spec.0 % 5 {
        0 => GradedAtom::new(Species::Gauge, vec![IndexLabel::ld(&n("m"))], vec![IndexLabel::iu(&n("M"))]),
        1 => GradedAtom::new(Species::Ghost, vec![], vec![IndexLabel::iu(&n("S"))]),
        2 => GradedAtom::new(Species::AntiGhost, vec![], vec![IndexLabel::id(&n("R"))]),
        3 => GradedAtom::new(Species::Aux, vec![], vec![IndexLabel::id(&n("R"))]),
        _ => GradedAtom::bare(Species::Matter { odd: false }),
    };
    for (j, lorentz) in spec.1.iter().enumerate() {
        let name = format!("d{slot}x{j}");
        a = a.with_deriv(if *lorentz { IndexLabel::ld(&name) } else { IndexLabel::id(&name) });
    }
    a
}

fn product(specs: &[Spec], offset: usize) -> GradedExpr {
    GradedExpr::product(specs.iter().enumerate().map(|(i, sp)| atom(offset + i, sp)).collect())
}

fn specs(max: usize) -> impl Strategy<Value = Vec<Spec>> {
    prop::collection::vec((0u8..5, prop::collection::vec(any::<bool>(), 0..2)), 1..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nilpotent_on_products(sp in specs(3)) {
        let x = product(&sp, 0);
        let ss = s(&s(&x).unwrap()).unwrap().normalize().unwrap();
        prop_assert!(ss.is_zero(), "{x} -> {ss}");
    }

    #[test]
    fn raises_ghost_number(sp in specs(3)) {
        let x = product(&sp, 0);
        let sx = s(&x).unwrap().normalize().unwrap();
        if !sx.is_zero() {
            let g = *x.ghost_numbers().iter().next().unwrap();
            prop_assert_eq!(sx.ghost_numbers(), [g + 1].into());
            let odd = *x.parities().iter().next().unwrap();
            prop_assert_eq!(sx.parities(), [!odd].into());
        }
    }

    #[test]
    fn graded_leibniz(a in specs(2), b in specs(2)) {
        let x = product(&a, 0);
        let y = product(&b, a.len());
        let lhs = s(&x.times(&y)).unwrap().normalize().unwrap();
        let sign = if *x.parities().iter().next().unwrap() { -1 } else { 1 };
        let rhs = s(&x).unwrap().times(&y)
            + x.times(&s(&y).unwrap()).scale(&qid_core::symcore::Coeff::int(sign));
        prop_assert_eq!(lhs, rhs.normalize().unwrap());
    }
}
