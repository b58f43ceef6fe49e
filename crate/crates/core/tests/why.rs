use polyexplain_core::explain::explain_why;
use polyexplain_core::geometry::{remove_redundant, sample_interior, Polytope};
use polyexplain_core::lp;
use polyexplain_core::model::Network;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(net: &Network, rng: &mut ChaCha8Rng) -> Vec<f64> {
    net.input_bounds().iter().map(|b| rng.random_range(b.lo..b.hi)).collect()
}

/// Closed membership disagreement beyond `tol`: strictly inside one, clearly
/// outside the other.
fn disagree(p: &Polytope, q: &Polytope, x: &[f64], tol: f64) -> bool {
    (p.contains(x, -tol) && !q.contains(x, tol)) || (q.contains(x, -tol) && !p.contains(x, tol))
}

#[test]
fn deep_fixture_reduction_preserves_the_region() {
    let net = Network::random(&[2, 6, 6, 3], 2663).unwrap();
    let x = [0.35, -0.8];
    let e = explain_why(&net, &x, false).unwrap();
    assert_eq!(e.constraint_count, 12 + 2 + 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let open = e.reduced_polytope.open_feasibility().unwrap();
    let start = open.witness().unwrap().to_vec();
    let mut points = sample_interior(&e.reduced_polytope, &start, 5000, &mut rng);
    points.extend((0..5000).map(|_| random_point(&net, &mut rng)));
    assert_eq!(points.len(), 10_000);
    let disagreements = points.iter().filter(|p| disagree(&e.output_polytope, &e.reduced_polytope, p, 1e-7)).count();
    assert_eq!(disagreements, 0);
}

#[test]
fn explanations_are_exact_and_irreducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..6 {
        let net = Network::random(&[3, 5, 4, 3], seed).unwrap();
        let x = random_point(&net, &mut rng);
        let e = explain_why(&net, &x, false).unwrap();
        for c in &e.minimal_constraints {
            assert!(c.holds_at(&x));
        }

        let open = e.reduced_polytope.open_feasibility().unwrap();
        assert!(open.is_open());
        for p in sample_interior(&e.reduced_polytope, open.witness().unwrap(), 1000, &mut rng) {
            assert_eq!(net.forward(&p).unwrap().class_index, e.class_index, "seed {seed} at {p:?}");
        }

        let again = remove_redundant(&e.reduced_polytope).unwrap();
        assert!(again.removed.is_empty(), "fixpoint violated for seed {seed}");
    }
}

#[test]
fn one_lp_per_pre_removal_constraint() {
    let net = Network::random(&[2, 8, 8, 4], 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let x = random_point(&net, &mut rng);
        lp::reset_solve_calls();
        let e = explain_why(&net, &x, false).unwrap();
        assert_eq!(lp::solve_calls() as usize, e.constraint_count);
        assert_eq!(e.lp_calls, 16 + 3 + 4);
    }
}

#[test]
fn vrep_vertices_satisfy_every_row() {
    let net = Network::random(&[3, 6, 3], 31).unwrap();
    let e = explain_why(&net, &[0.2, 0.1, -0.4], true).unwrap();
    let v = e.vrep.as_ref().unwrap();
    assert!(!v.output.is_empty());
    assert!(v.output.len() <= v.region.len() + 64);
    for vx in &v.output.vertices {
        assert!(e.output_polytope.contains(vx, 1e-7));
        let tight = e.output_polytope.constraints().iter().filter(|c| c.slack(vx).abs() <= 1e-7).count();
        assert!(tight >= 3);
    }
}
