use hashqkd::adversary::{foreknowledge_cheat, foreknowledge_mixture, single_flaw, BellMixture, Strategy};
use hashqkd::dense::{dense_joint_distribution, exact_protocol_branches};
use hashqkd::verification::{
    direct_test, draw_subsets, generate_key, honest_reference, run_verification, run_with_subsets, trace_labels,
    PairSource, ProtocolParams,
};
use hashqkd::{BellLabel, BellString, BitString, DenseState, Subset};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn worked_schedule() -> Vec<Subset> {
    vec![Subset::parse("001101").unwrap(), Subset::parse("1001").unwrap()]
}

/// Every schedule of `m` nonzero subsets on `n` pairs.
fn all_schedules(n: usize, m: usize) -> Vec<Vec<Subset>> {
    let mut out = vec![vec![]];
    for r in 0..m {
        let len = 2 * (n - r);
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Subset>| {
                (1u64..1 << len).map(move |b| {
                    let mut p = prefix.clone();
                    p.push(Subset::new(BitString::from_u64(b, len)).unwrap());
                    p
                })
            })
            .collect();
    }
    out
}

/// `(P(accept), P(accept and survivors not honest))`.
fn exact_dense(u: &DenseState, schedules: &[Vec<Subset>]) -> (f64, f64) {
    let mut acc = 0.0;
    let mut bad = 0.0;
    for s in schedules {
        let expected = honest_reference(u.n_pairs(), s).unwrap().parities;
        for (k, p) in dense_joint_distribution(u, s).unwrap() {
            if k.parities == expected {
                acc += p;
                if !k.honest_survivors {
                    bad += p;
                }
            }
        }
    }
    let n = schedules.len() as f64;
    (acc / n, bad / n)
}

fn exact_labels(w: &BellString, schedules: &[Vec<Subset>]) -> (f64, f64) {
    let mut acc = 0.0;
    let mut bad = 0.0;
    for s in schedules {
        let h = honest_reference(w.len(), s).unwrap();
        let t = trace_labels(w, s).unwrap();
        if t.parities == h.parities {
            acc += 1.0;
            if !t.survivors.same_labels(&h.survivors) {
                bad += 1.0;
            }
        }
    }
    let n = schedules.len() as f64;
    (acc / n, bad / n)
}

fn within_3_sigma(hits: usize, trials: usize, p: f64) -> bool {
    let rate = hits as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    (rate - p).abs() <= 3.0 * sigma
}

#[test]
fn cheat_for_known_schedule_passes_and_fixes_key_zero() {
    let subsets = worked_schedule();
    let u = foreknowledge_cheat(&subsets, false).unwrap();
    let expected = honest_reference(3, &subsets).unwrap().parities;
    let branches = exact_protocol_branches(&u, &subsets).unwrap();
    let pass: f64 = branches
        .iter()
        .filter(|b| b.parities() == expected)
        .map(|b| b.probability)
        .sum();
    assert!((pass - 1.0).abs() < 1e-12);
    for b in &branches {
        let up: f64 = b
            .state
            .measure_pair_z_branches(0)
            .unwrap()
            .iter()
            .filter(|z| !z.fine.alice_down())
            .map(|z| z.probability)
            .sum();
        assert!((up - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cheat_can_target_either_key_bit() {
    let subsets = worked_schedule();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for bit in [false, true] {
        let u = foreknowledge_cheat(&subsets, bit).unwrap();
        for _ in 0..50 {
            let out = run_with_subsets(PairSource::Dense(u.clone()), &subsets, &mut rng).unwrap();
            assert!(out.accepted());
            let key = generate_key(&out.survivors, &mut rng).unwrap();
            assert_eq!(key.alice, vec![bit]);
            assert!(key.agrees());
        }
    }
}

/// The inverse-evolved cheat is two singlets times a Ψ−/Ψ+ superposition on
/// the key pair; the relative sign picks the key bit.
#[test]
fn cheat_state_structure() {
    let subsets = worked_schedule();
    let one = Complex64::new(1.0, 0.0);
    let with = |sign: f64| {
        DenseState::from_bell_terms(
            &[
                (BellString::singlets(3), vec![one]),
                (BellString::parse("111101").unwrap(), vec![one * sign]),
            ],
            3,
            0,
        )
        .unwrap()
    };
    let zero = foreknowledge_cheat(&subsets, false).unwrap();
    let one_bit = foreknowledge_cheat(&subsets, true).unwrap();
    assert!(zero.distance_up_to_phase(&with(1.0)) < 1e-12);
    assert!(one_bit.distance_up_to_phase(&with(-1.0)) < 1e-12);
}

#[test]
fn honest_singlets_pass_the_same_schedule() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let out = run_with_subsets(
        PairSource::Labels(BellString::singlets(3)),
        &worked_schedule(),
        &mut rng,
    )
    .unwrap();
    assert!(out.accepted());
}

#[test]
fn final_superposition_reads_key_zero() {
    let one = Complex64::new(1.0, 0.0);
    let u = DenseState::from_bell_terms(
        &[
            (BellString::parse("11").unwrap(), vec![one]),
            (BellString::parse("01").unwrap(), vec![one]),
        ],
        1,
        0,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        assert_eq!(
            generate_key(&PairSource::Dense(u.clone()), &mut rng).unwrap().alice,
            vec![false]
        );
    }
}

#[test]
fn cheat_mixture_is_the_premeasured_cheat() {
    let subsets = worked_schedule();
    let mix = foreknowledge_mixture(&subsets).unwrap();
    let dist = foreknowledge_cheat(&subsets, false).unwrap().bell_distribution();
    for (w, p) in mix.entries() {
        assert!((dist[w.index()] - p).abs() < 1e-12);
    }
    assert!((mix.entries().iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
}

/// Against schedules it was not built for, the cheat only wins by having
/// honest weight: accepted dishonest survivors stay below `2^-m`.
#[test]
fn cheat_against_fresh_schedules_exact() {
    let schedules = all_schedules(3, 2);
    assert_eq!(schedules.len(), 63 * 15);
    let u = foreknowledge_cheat(&worked_schedule(), false).unwrap();
    let (_, bad) = exact_dense(&u, &schedules);
    assert!(bad <= 0.25 + 1e-12, "{bad}");
}

#[test]
fn cheat_against_fresh_schedules_many_key_pairs() {
    let (n, m) = (16, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let believed = draw_subsets(n, m, &mut rng);
    let strategy = Strategy::foreknowledge(believed).unwrap();
    let params = ProtocolParams::new(n, m).unwrap();
    let trials = 100_000;
    let hits = (0..trials)
        .filter(|_| {
            let src = strategy.source(n, &mut rng).unwrap();
            run_verification(src, &params, &mut rng).unwrap().accepted()
        })
        .count();
    assert!(within_3_sigma(hits, trials, 0.5f64.powi(m as i32)), "{hits}");
}

/// Largest `P(accept and survivors not honest | w) · 2^m` over all Bell
/// strings; the accept-implies-fidelity constant for label strategies.
fn label_constant(n: usize, m: usize, schedules: &[Vec<Subset>]) -> f64 {
    BellString::all(n)
        .map(|w| exact_labels(&w, schedules).1 * (1u64 << m) as f64)
        .fold(0.0, f64::max)
}

#[test]
fn acceptance_implies_fidelity() {
    let (n, m) = (3, 2);
    let schedules = all_schedules(n, m);
    let c = label_constant(n, m, &schedules);
    assert!(c <= 1.0 + 1e-12, "{c}");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut states: Vec<DenseState> = (0..6)
        .map(|_| DenseState::random(n, rng.random_range(0..=2), &mut rng).unwrap())
        .collect();
    states.push(foreknowledge_cheat(&worked_schedule(), false).unwrap());
    for u in &states {
        let (acc, bad) = exact_dense(u, &schedules);
        let r = -acc.log2();
        let deficit = bad / acc;
        assert!(deficit <= c * 2f64.powf(-(m as f64 - r)) + 1e-9, "acc={acc} bad={bad}");
    }
}

#[test]
fn single_flaw_exact_enumeration() {
    let (n, m) = (3, 2);
    let schedules = all_schedules(n, m);
    for pos in 0..n {
        for flaw in [BellLabel::PHI_PLUS, BellLabel::PSI_PLUS, BellLabel::PHI_MINUS] {
            let w = single_flaw(n, pos, flaw).unwrap();
            let (acc, bad) = exact_labels(&w, &schedules);
            let (dacc, dbad) = exact_dense(&DenseState::prepare_bell_product(&w).unwrap(), &schedules);
            assert!((acc - dacc).abs() < 1e-12 && (bad - dbad).abs() < 1e-12);
            assert!(bad <= 0.25, "{pos} {flaw}: {bad}");
            assert!(acc < 0.5, "{pos} {flaw}: {acc}");
        }
    }
}

#[test]
fn general_pure_matches_premeasured_mixture_on_all_schedules() {
    let schedules = all_schedules(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let u = DenseState::random(2, 2, &mut rng).unwrap();
        let (acc, _) = exact_dense(&u, &schedules);
        let mix: f64 = u
            .bell_distribution()
            .iter()
            .enumerate()
            .map(|(i, p)| p * exact_labels(&BellString::from_index(i, 2), &schedules).0)
            .sum();
        assert!((acc - mix).abs() < 1e-9);
    }
}

#[test]
fn hashing_catches_a_flaw_two_to_the_minus_m() {
    let (n, m) = (20, 6);
    let params = ProtocolParams::new(n, m).unwrap();
    let strategy = Strategy::SingleFlaw {
        position: n - 1,
        label: BellLabel::PHI_PLUS,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 100_000;
    let hits = (0..trials)
        .filter(|_| {
            run_verification(strategy.source(n, &mut rng).unwrap(), &params, &mut rng)
                .unwrap()
                .accepted()
        })
        .count();
    assert!(within_3_sigma(hits, trials, params.cheat_bound()), "{hits}");
}

#[test]
fn direct_testing_misses_flaws() {
    let (n, m) = (30, 10);
    let w = single_flaw(n, 4, BellLabel::PHI_MINUS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 50_000;
    let hits = (0..trials)
        .filter(|_| direct_test(&w, m, &mut rng).unwrap().is_accept())
        .count();
    assert!(within_3_sigma(hits, trials, (n - m) as f64 / n as f64), "{hits}");
}

#[test]
fn half_honest_mixture() {
    let (n, m) = (20, 5);
    let mix = BellMixture::new(vec![
        (BellString::singlets(n), 0.5),
        (single_flaw(n, n - 1, BellLabel::PSI_PLUS).unwrap(), 0.5),
    ])
    .unwrap();
    let strategy = Strategy::BellMixture(mix);
    let params = ProtocolParams::new(n, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 100_000;
    let hits = (0..trials)
        .filter(|_| {
            run_verification(strategy.source(n, &mut rng).unwrap(), &params, &mut rng)
                .unwrap()
                .accepted()
        })
        .count();
    assert!(
        within_3_sigma(hits, trials, (1.0 + params.cheat_bound()) / 2.0),
        "{hits}"
    );
}

#[test]
fn uniform_mixture() {
    let (n, m) = (7, 4);
    let strategy = Strategy::BellMixture(BellMixture::uniform(n));
    let params = ProtocolParams::new(n, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let trials = 100_000;
    let mut hits = 0;
    let mut honest_survivors = 0;
    for _ in 0..trials {
        let out = run_verification(strategy.source(n, &mut rng).unwrap(), &params, &mut rng).unwrap();
        if out.accepted() {
            hits += 1;
            honest_survivors += !out.false_accept().unwrap() as usize;
        }
    }
    // a uniformly random string differs from the honest one in almost every draw
    let p = 0.5f64.powi(m as i32);
    assert!(
        (hits as f64 / trials as f64 - p).abs() < 4.0 * (p / trials as f64).sqrt() + 1e-3,
        "{hits}"
    );
    assert!((honest_survivors as f64) < 0.2 * hits as f64);
}

/// Subsets drawn after commitment: no strategy gets dishonest survivors
/// through more often than `2^-m`.
#[test]
fn subset_timing_invariant() {
    let (n, m) = (8, 5);
    let params = ProtocolParams::new(n, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let believed = draw_subsets(n, m, &mut rng);
    let two_flaws = {
        let mut w = single_flaw(n, 2, BellLabel::PHI_PLUS).unwrap();
        w.set_label(6, BellLabel::PSI_PLUS).unwrap();
        w
    };
    let suite = vec![
        Strategy::SingleFlaw {
            position: n - 1,
            label: BellLabel::PHI_MINUS,
        },
        Strategy::BellMixture(BellMixture::new(vec![(two_flaws, 1.0)]).unwrap()),
        Strategy::BellMixture(BellMixture::uniform(n)),
        Strategy::foreknowledge(believed).unwrap(),
    ];
    let bound = params.cheat_bound();
    let trials = 100_000;
    for strategy in &suite {
        let bad = (0..trials)
            .filter(|_| {
                let src = strategy.source(n, &mut rng).unwrap();
                run_verification(src, &params, &mut rng)
                    .unwrap()
                    .false_accept()
                    .unwrap()
            })
            .count();
        let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
        assert!(
            (bad as f64 / trials as f64) <= bound + 3.0 * sigma,
            "{strategy:?}: {bad}"
        );
    }
}
