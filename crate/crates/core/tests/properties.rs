use proptest::prelude::*;
use sybilshare::analysis::threshold_payment;
use sybilshare::welfare::{sybil_social_cost, truthful_social_cost};
use sybilshare::*;

fn tables() -> Vec<CostFunction> {
    vec![
        CostFunction::constant(1.0),
        CostFunction::concave(vec![0.0, 1.0, 1.4, 1.7, 1.9, 2.05, 2.15]),
        CostFunction::concave(vec![0.0, 0.6, 1.1, 1.5, 1.8, 2.0]),
    ]
}

fn catalog() -> Vec<CostSharingMechanism> {
    let mut out: Vec<CostSharingMechanism> = MechanismId::ALL
        .iter()
        .map(|id| id.with_cost(CostFunction::constant(1.0)).unwrap())
        .collect();
    for cost in &tables()[1..] {
        out.push(MechanismId::Shapley.with_cost(cost.clone()).unwrap());
        out.push(MechanismId::Hybrid.with_cost(cost.clone()).unwrap());
    }
    out
}

/// Bids on a 0.05 grid so that ties and knife edges show up.
fn bids(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..=40).prop_map(|k| k as f64 * 0.05), 0..=max_n)
}

proptest! {
    #[test]
    fn outcomes_are_individually_rational(b in bids(6)) {
        for m in catalog() {
            let out = m.run(&b).unwrap();
            prop_assert!(out.check_invariants(&b).is_ok(), "{}: {:?} -> {:?}", m.name(), b, out);
        }
    }

    #[test]
    fn shapley_balances_its_budget(b in bids(7)) {
        for cost in tables() {
            let m = MechanismId::Shapley.with_cost(cost.clone()).unwrap();
            let out = m.run(&b).unwrap();
            let c = cost.cost_of(out.winners.len()).unwrap();
            prop_assert!((out.total_payment() - c).abs() < 1e-9);
        }
    }

    #[test]
    fn equal_bids_share_a_fate(b in bids(7)) {
        for cost in tables() {
            let out = MechanismId::Shapley.with_cost(cost).unwrap().run(&b).unwrap();
            for i in 0..b.len() {
                for j in 0..b.len() {
                    if b[i] == b[j] {
                        prop_assert_eq!(out.is_winner(i), out.is_winner(j));
                    }
                }
            }
        }
    }

    #[test]
    fn hybrid_serves_a_subset_of_shapley(b in bids(5)) {
        for cost in tables() {
            let h = MechanismId::Hybrid.with_cost(cost.clone()).unwrap().run(&b).unwrap();
            let s = MechanismId::Shapley.with_cost(cost).unwrap().run(&b).unwrap();
            prop_assert!(h.winners.iter().all(|w| s.is_winner(*w)), "{:?}: {:?} vs {:?}", b, h.winners, s.winners);
        }
    }

    #[test]
    fn truthful_mechanisms_charge_thresholds(b in bids(4)) {
        for id in MechanismId::TRUTHFUL {
            let m = id.with_cost(CostFunction::constant(1.0)).unwrap();
            let out = m.run(&b).unwrap();
            for &w in &out.winners {
                let mut others = b.clone();
                others.remove(w);
                let t = threshold_payment(&m, w, &others, 1e-12).unwrap().value();
                prop_assert!((t - out.payments[w]).abs() < 1e-6, "{id} {:?} identity {w}: {t} vs {}", b, out.payments[w]);
            }
        }
    }

    #[test]
    fn sybil_extension_restricts_to_the_base(b in bids(5)) {
        for m in catalog() {
            let base = m.run(&b).unwrap();
            let ext = run_sybil_extension(&m, &SybilProfile::truthful(&b).unwrap()).unwrap();
            prop_assert_eq!(ext.served_agents(), base.winners.clone());
            for i in 0..b.len() {
                prop_assert!((ext.total_payment[i] - base.payments[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn padding_an_agent_with_zero_changes_nothing(
        lists in prop::collection::vec(prop::collection::vec((0u32..=30).prop_map(|k| k as f64 * 0.05), 1..=3), 1..=3),
        who in 0usize..3,
    ) {
        let who = who % lists.len();
        let profile = SybilProfile::new(lists.clone()).unwrap();
        let mut padded_list = lists[who].clone();
        padded_list.push(0.0);
        let padded = profile.with_agent(who, padded_list).unwrap();
        for m in catalog() {
            let a = run_sybil_extension(&m, &profile).unwrap();
            let b = run_sybil_extension(&m, &padded).unwrap();
            prop_assert_eq!(&a.served, &b.served, "{}", m.name());
            for (x, y) in a.total_payment.iter().zip(&b.total_payment) {
                prop_assert!((x - y).abs() < 1e-7, "{}: {:?} vs {:?}", m.name(), a.total_payment, b.total_payment);
            }
        }
    }

    #[test]
    fn permuting_agents_permutes_outcomes(
        lists in prop::collection::vec(prop::collection::vec((0u32..=30).prop_map(|k| k as f64 * 0.05), 1..=2), 2..=3),
    ) {
        let n = lists.len();
        let rotated: Vec<Vec<f64>> = (0..n).map(|i| lists[(i + 1) % n].clone()).collect();
        for m in catalog() {
            let a = run_sybil_extension(&m, &SybilProfile::new(lists.clone()).unwrap()).unwrap();
            let b = run_sybil_extension(&m, &SybilProfile::new(rotated.clone()).unwrap()).unwrap();
            for i in 0..n {
                // Agent i in the rotated profile is agent i + 1 in the original.
                let j = (i + 1) % n;
                if lists.iter().filter(|l| **l == lists[j]).count() == 1 {
                    prop_assert_eq!(a.served[j], b.served[i], "{}", m.name());
                    prop_assert!((a.total_payment[j] - b.total_payment[i]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn optimum_never_exceeds_the_mechanism(b in bids(6)) {
        for m in catalog() {
            let score = welfare::approx_ratio(&m, &b).unwrap();
            prop_assert!(score.social_cost >= score.optimal_cost - 1e-9);
            prop_assert!(score.ratio.value() >= 1.0 - 1e-9);
        }
    }
}

/// With identity counts past the end of a concave table the cost stays flat,
/// and Sybil splits can then serve a low-value agent whose inclusion costs
/// more than its value. Off the 0.1 valuation grid, so the sweep does not see it.
#[test]
fn flat_tail_welfare_loss() {
    let cost = CostFunction::concave(vec![0.0, 1.0, 1.4, 1.7, 1.9]);
    let m = MechanismId::Shapley.with_cost(cost.clone()).unwrap();
    let v = [0.29, 1.08, 1.4];
    let b = vec![vec![0.29], vec![1.08, 0.48, 0.28], vec![1.4, 0.37, 0.32]];
    for (list, &value) in b.iter().zip(&v) {
        let z = welfare::canonical_z(list, value, &cost);
        assert!(
            z.iter().zip(list).all(|(x, y)| (x - y).abs() < 1e-12),
            "{list:?} is already in z-form"
        );
    }
    let truthful = truthful_social_cost(&m, &v).unwrap();
    let sybil = sybil_social_cost(&m, &v, &SybilProfile::new(b).unwrap()).unwrap();
    assert!((truthful - 1.69).abs() < 1e-12);
    assert!((sybil - 1.7).abs() < 1e-12);
    assert!(sybil > truthful + 1e-7);
}
