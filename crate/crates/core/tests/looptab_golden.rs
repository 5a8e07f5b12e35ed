use qid_core::looptab::{div_part, reduce_oracle, DivergentPart, LoopIntegral};

const RANK1_TWO_DENOMS: &str = include_str!("golden/div_rank1_denoms2.json");

#[test]
fn rank1_two_denominators_matches_frozen_json() {
    let li = LoopIntegral::new(1, 2).unwrap();
    let frozen: DivergentPart = serde_json::from_str(RANK1_TWO_DENOMS).unwrap();
    assert_eq!(reduce_oracle(&li).unwrap(), frozen);
    assert_eq!(div_part(&li).unwrap(), frozen);
}

#[test]
fn frozen_value_prints_as_expected() {
    let frozen: DivergentPart = serde_json::from_str(RANK1_TWO_DENOMS).unwrap();
    assert_eq!(frozen.pole_coeff.terms().count(), 1);
}
