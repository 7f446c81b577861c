//! Packing correctness and annealing guarantees of the compact floorplanner:
//! every random tree packs without overlap, perturbation preserves the node
//! set, and runs are reproducible.

use chiplace_core::stage1::run_stage_one;
use chiplace_core::{BStarTree, Chiplet, Net, StageOneConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_chiplets(rng: &mut impl Rng, n: usize) -> Vec<Chiplet> {
    (0..n)
        .map(|i| {
            Chiplet::new(i, rng.random_range(2.0..9.0), rng.random_range(2.0..9.0), 1.0)
        })
        .collect()
}

#[test]
fn random_trees_pack_without_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    for _ in 0..500 {
        let n = rng.random_range(2..9);
        let chiplets = random_chiplets(&mut rng, n);
        let tree = BStarTree::random_chain(n, &mut rng);
        // A generous boundary: packing legality is what we test, not fit.
        let placement = tree.pack(&chiplets, 1000.0).unwrap();
        assert_eq!(placement.len(), n);
        for i in 0..n {
            for j in (i + 1)..n {
                assert!(
                    !placement.rect(i).overlaps(&placement.rect(j)),
                    "chiplets {i} and {j} overlap"
                );
            }
        }
        assert!(placement.bounding_box().within(1000.0));
    }
}

#[test]
fn perturbed_trees_stay_valid_and_packable() {
    let mut rng = ChaCha8Rng::seed_from_u64(502);
    for _ in 0..200 {
        let n = rng.random_range(2..9);
        let chiplets = random_chiplets(&mut rng, n);
        let mut tree = BStarTree::random_chain(n, &mut rng);
        for _ in 0..30 {
            tree = tree.perturb(&mut rng);
            assert!(tree.is_valid(), "perturbation broke the tree");
            assert_eq!(tree.len(), n);
            tree.pack(&chiplets, 1000.0).expect("a valid tree always packs on an open boundary");
        }
    }
}

#[test]
fn stage_one_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(503);
    let chiplets = random_chiplets(&mut rng, 6);
    let nets = vec![Net::new(0, 0, 1, 3), Net::new(1, 2, 3, 2), Net::new(2, 4, 5, 1)];
    let config = StageOneConfig { moves_per_level: 40, ..StageOneConfig::default() };
    let (p1, r1) = run_stage_one(&chiplets, &nets, 45.0, &config, 99).unwrap();
    let (p2, r2) = run_stage_one(&chiplets, &nets, 45.0, &config, 99).unwrap();
    assert_eq!(p1, p2);
    assert_eq!(r1, r2);
}

#[test]
fn stage_one_never_returns_an_illegal_placement() {
    let mut rng = ChaCha8Rng::seed_from_u64(504);
    for seed in 0..5 {
        let n = rng.random_range(3..7);
        let chiplets = random_chiplets(&mut rng, n);
        let nets = vec![Net::new(0, 0, 1, 2)];
        let config = StageOneConfig { moves_per_level: 40, ..StageOneConfig::default() };
        let (placement, report) = run_stage_one(&chiplets, &nets, 45.0, &config, seed).unwrap();
        assert!(placement.is_legal());
        let (l, a) = report.best;
        assert!(report.final_cost(l, a) <= report.final_cost(report.l_max, report.a_max) + 1e-12);
    }
}

#[test]
fn stage_one_improves_on_the_initial_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    // Keep every dimension at 7 mm or less so the initial chain of six
    // always fits the 45 mm boundary: a legal initial packing makes
    // best-cost <= initial-cost a hard guarantee rather than a likelihood.
    let chiplets: Vec<Chiplet> = (0..6)
        .map(|i| Chiplet::new(i, rng.random_range(3.0..7.0), rng.random_range(3.0..7.0), 1.0))
        .collect();
    let nets = vec![Net::new(0, 0, 1, 3), Net::new(1, 1, 2, 2), Net::new(2, 3, 4, 2)];
    let config = StageOneConfig { moves_per_level: 60, ..StageOneConfig::default() };
    for seed in 0..3 {
        let (_, report) = run_stage_one(&chiplets, &nets, 45.0, &config, seed).unwrap();
        let (l0, a0, _) = report.evaluated[0];
        let (lb, ab) = report.best;
        assert!(
            report.final_cost(lb, ab) <= report.final_cost(l0, a0) + 1e-12,
            "seed {seed}: best cost above the initial chain's"
        );
    }
}
