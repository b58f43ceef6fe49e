use polyexplain_core::explain::{explain_why_not, WhyNotOptions, WhyNotOutcome};
use polyexplain_core::fixtures;
use polyexplain_core::marching::{march_to_counterfactual, MarchBudget, MarchOutcome};
use polyexplain_core::model::Network;
use polyexplain_core::oracle::{full_decompose, oracle_why_not_with, OracleWhyNot};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn march_distance_matches_oracle_on_twelve_neurons() {
    let net = Network::random(&[2, 6, 6, 3], 12).unwrap();
    assert_eq!(net.total_hidden_neurons(), 12);
    let decomposition = full_decompose(&net).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut found = 0;
    for _ in 0..50 {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let pred = net.forward(&x).unwrap();
        let class = (pred.class_index + rng.random_range(1..3)) % 3;
        let oracle = oracle_why_not_with(&net, &decomposition, &x, class).unwrap();
        let same_region = matches!(&oracle, OracleWhyNot::Reachable { min_distance: 0, .. });
        if same_region {
            continue;
        }
        let march = march_to_counterfactual(&net, &pred.signature, class, &MarchBudget::default()).unwrap();
        match (oracle, march) {
            (OracleWhyNot::Reachable { min_distance, minimizers }, MarchOutcome::Found(r)) => {
                assert_eq!(r.distance, min_distance);
                assert!(minimizers.contains(&r.signature));
                let at = net.forward(&r.witness).unwrap();
                assert_eq!((at.class_index, at.signature), (class, r.signature));
                found += 1;
            }
            (OracleWhyNot::Unreachable, MarchOutcome::Exhausted { .. }) => {}
            other => panic!("march and oracle disagree: {other:?}"),
        }
    }
    assert!(found > 0);
}

#[test]
fn dominated_class_is_unreachable() {
    let net = fixtures::unreachable_class_network();
    assert_eq!(net.total_hidden_neurons(), 12);
    let x = [0.5, 0.5];
    let e = explain_why_not(&net, &x, 1, &WhyNotOptions::default()).unwrap();
    let WhyNotOutcome::ClassUnreachable { examined } = e.outcome else { panic!("{:?}", e.outcome) };
    assert_eq!(examined, (1 << 12) - 1);
    let decomposition = full_decompose(&net).unwrap();
    assert_eq!(oracle_why_not_with(&net, &decomposition, &x, 1).unwrap(), OracleWhyNot::Unreachable);
}

#[test]
fn shared_region_gives_a_delta_explanation() {
    let net = fixtures::shared_region_network();
    let x = [1.0, 0.2];
    let e = explain_why_not(&net, &x, 2, &WhyNotOptions::default()).unwrap();
    let WhyNotOutcome::SameRegion { delta_constraint, .. } = &e.outcome else { panic!("{:?}", e.outcome) };
    assert!(delta_constraint.slack(&x) > 0.0);
    assert_eq!(e.counterfactual_name.as_deref(), Some("low"));
}

#[test]
fn sparse_decomposition_and_partition() {
    let net = Network::random(&[2, 8, 2], 282).unwrap();
    let d = full_decompose(&net).unwrap();
    assert_eq!(d.examined, 256);
    assert!(d.feasible_count() < 256, "{}", d.feasible_count());
    for r in d.feasible() {
        assert_eq!(net.forward(r.witness.as_ref().unwrap()).unwrap().signature, r.signature);
    }
    let feasible: std::collections::HashSet<_> = d.feasible().map(|r| r.signature.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        assert!(feasible.contains(&net.forward(&x).unwrap().signature));
    }
}

#[test]
fn differing_pairs_follow_the_flipped_bits() {
    let net = Network::random(&[2, 5, 5, 3], 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let pred = net.forward(&x).unwrap();
        let class = (pred.class_index + 1) % 3;
        let e = explain_why_not(&net, &x, class, &WhyNotOptions::default()).unwrap();
        if let WhyNotOutcome::DifferentRegion { distance, differing_constraints, target_signature, witness, .. } = &e.outcome {
            assert_eq!(differing_constraints.len(), *distance);
            assert_eq!(pred.signature.hamming(target_signature), *distance);
            for pair in differing_constraints {
                assert!(pair.origin_side.holds_at(&x));
                assert!(pair.target_side.holds_at(witness));
            }
        }
    }
}
