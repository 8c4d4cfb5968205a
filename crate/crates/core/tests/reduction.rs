use hashqkd::dense::{
    dense_joint_distribution, label_joint_distribution, premeasured_joint_distribution, total_variation, Axis,
    JointDistribution,
};
use hashqkd::verification::{draw_subsets, honest_reference};
use hashqkd::{BellString, Coarse, DenseState, Subset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn premeasured_mixture(u: &DenseState) -> Vec<(BellString, f64)> {
    u.bell_distribution()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(i, p)| (BellString::from_index(i, u.n_pairs()), p))
        .collect()
}

fn acceptance(d: &JointDistribution, expected: &[bool]) -> f64 {
    d.iter().filter(|(k, _)| k.parities == expected).map(|(_, p)| p).sum()
}

#[test]
fn raw_and_premeasured_joint_distributions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..40 {
        let n = rng.random_range(1..=3);
        let anc = rng.random_range(0..=4);
        let rounds = rng.random_range(1..=n);
        let u = DenseState::random(n, anc, &mut rng).unwrap();
        let subsets = draw_subsets(n, rounds, &mut rng);
        let raw = dense_joint_distribution(&u, &subsets).unwrap();
        let pre = premeasured_joint_distribution(&u, &subsets).unwrap();
        let lab = label_joint_distribution(&premeasured_mixture(&u), &subsets).unwrap();
        assert!(total_variation(&raw, &pre) < 1e-9, "case {case}");
        assert!(total_variation(&raw, &lab) < 1e-9, "case {case}");
    }
}

#[test]
fn no_advantage_from_entanglement_with_ancilla() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..30 {
        let u = DenseState::random(3, 3, &mut rng).unwrap();
        let subsets = draw_subsets(3, 2, &mut rng);
        let expected = honest_reference(3, &subsets).unwrap().parities;
        let raw = acceptance(&dense_joint_distribution(&u, &subsets).unwrap(), &expected);
        let mix = acceptance(
            &label_joint_distribution(&premeasured_mixture(&u), &subsets).unwrap(),
            &expected,
        );
        assert!((raw - mix).abs() < 1e-9);
    }
}

#[test]
fn premeasurement_probabilities_sum_over_ancilla() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = DenseState::random(2, 2, &mut rng).unwrap();
    let dist = u.bell_distribution();
    for (i, p) in dist.iter().enumerate() {
        let w = BellString::from_index(i, 2);
        let direct: f64 = u.ancilla_component(&w).unwrap().iter().map(|a| a.norm_sqr()).sum();
        assert!((p - direct).abs() < 1e-12);
    }
    assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn superposition_of_two_products_splits_evenly() {
    let c = num_complex::Complex64::new(1.0, 0.0);
    let u = DenseState::from_bell_terms(
        &[
            (BellString::singlets(2), vec![c]),
            (BellString::parse("0000").unwrap(), vec![c]),
        ],
        2,
        0,
    )
    .unwrap();
    let dist = u.bell_distribution();
    assert!((dist[BellString::singlets(2).index()] - 0.5).abs() < 1e-12);
    assert!((dist[0] - 0.5).abs() < 1e-12);
}

/// Per-pair, per-axis antiparallel probability from amplitudes and from the
/// premeasured mixture.
#[test]
fn estimator_statistics_survive_premeasurement() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let n = rng.random_range(1..=3);
        let u = DenseState::random(n, rng.random_range(0..=3), &mut rng).unwrap();
        let mix = premeasured_mixture(&u);
        for k in 0..n {
            for axis in Axis::ALL {
                let dense: f64 = u
                    .measure_pair_axis_branches(k, axis)
                    .unwrap()
                    .iter()
                    .filter(|b| b.fine.coarse() == Coarse::Antiparallel)
                    .map(|b| b.probability)
                    .sum();
                let labels: f64 = mix
                    .iter()
                    .filter(|(w, _)| {
                        let l = w.labels()[k];
                        l.is_singlet() || l == axis.antiparallel_label()
                    })
                    .map(|(_, p)| p)
                    .sum();
                assert!((dense - labels).abs() < 1e-10, "pair {k} axis {axis:?}");
            }
        }
    }
}

#[test]
fn honest_state_projects_fully_onto_honest_survivors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = DenseState::prepare_bell_product(&BellString::singlets(3)).unwrap();
    let subsets: Vec<Subset> = draw_subsets(3, 2, &mut rng);
    let d = dense_joint_distribution(&u, &subsets).unwrap();
    let honest: f64 = d.iter().filter(|(k, _)| k.honest_survivors).map(|(_, p)| p).sum();
    assert!((honest - 1.0).abs() < 1e-12);
}
