use endlab_core::dependence::{
    certify_end_row, certify_fgm_discretization, parse_joint_tables, CertMode, JointTable, MarginalSpec,
};
use proptest::prelude::*;

fn dyadic_two_point() -> impl Strategy<Value = MarginalSpec> {
    (1u32..16, -5i32..5, 1i32..5).prop_map(|(k, lo, gap)| {
        let p1 = k as f64 / 16.0;
        MarginalSpec::two_point(lo as f64, (lo + gap) as f64, 1.0 - p1, p1)
    })
}

fn negated(t: &JointTable) -> JointTable {
    let (atoms, probs) = t.atoms().map(|(a, p)| (a.iter().map(|x| -x).collect(), p)).unzip();
    JointTable::new(atoms, probs).unwrap()
}

proptest! {
    #[test]
    fn product_tables_certify_one(laws in prop::collection::vec(dyadic_two_point(), 1..=4)) {
        let t = JointTable::product(&laws).unwrap();
        let c = certify_end_row(&t, CertMode::End).unwrap();
        prop_assert_eq!(c.m_end, 1.0);
        prop_assert_eq!(c.m_uend, 1.0);
        prop_assert_eq!(c.m_lend, 1.0);
    }

    #[test]
    fn certificates_are_at_least_one_and_mirror(weights in prop::collection::vec(1u32..8, 4)) {
        let total: u32 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| *w as f64 / total as f64).collect();
        let atoms = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let t = JointTable::new(atoms, probs).unwrap();
        let c = certify_end_row(&t, CertMode::End).unwrap();
        prop_assert!(c.m_uend >= 1.0 && c.m_lend >= 1.0);
        prop_assert_eq!(c.m_end, c.m_uend.max(c.m_lend));
        let m = certify_end_row(&negated(&t), CertMode::End).unwrap();
        prop_assert!((m.m_uend - c.m_lend).abs() <= 1e-12 * c.m_lend);
        prop_assert!((m.m_lend - c.m_uend).abs() <= 1e-12 * c.m_uend);
    }

    #[test]
    fn text_round_trip(laws in prop::collection::vec(dyadic_two_point(), 1..=3)) {
        let t = JointTable::product(&laws).unwrap();
        let parsed = parse_joint_tables(&t.to_text()).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        prop_assert_eq!(&parsed[0].1, &t);
    }
}

#[test]
fn fgm_discretizations_are_end_with_unit_constant() {
    for g in [3, 5, 9] {
        let c = certify_fgm_discretization(-1.0, g).unwrap();
        assert!(c.m_end <= 1.0 + 1e-9, "g = {g}: {}", c.m_end);
    }
}

#[test]
fn positive_fgm_needs_larger_constant() {
    let c = certify_fgm_discretization(1.0, 3).unwrap();
    assert!(c.m_end > 1.0);
}
