use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bell_product_vector, DenseState, Matrix2, BRANCH_EPS, C};
use crate::bell::{BellLabel, BellString, Fine};
use crate::error::{Error, Result};

/// Common measurement axis of both halves of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The non-singlet Bell state whose halves are antiparallel along this axis.
    pub fn antiparallel_label(self) -> BellLabel {
        match self {
            Axis::Z => BellLabel::PSI_PLUS,
            Axis::X => BellLabel::PHI_MINUS,
            Axis::Y => BellLabel::PHI_PLUS,
        }
    }

    /// Single-qubit unitary taking this axis' eigenbasis onto z.
    fn to_z(self) -> Option<Matrix2> {
        let s = C::new(FRAC_1_SQRT_2, 0.0);
        let i = C::new(0.0, FRAC_1_SQRT_2);
        match self {
            Axis::Z => None,
            Axis::X => Some([[s, s], [s, -s]]),
            Axis::Y => Some([[s, -i], [s, i]]),
        }
    }
}

/// One outcome of a z measurement of a pair, with the pair removed.
#[derive(Clone, Debug)]
pub struct ZBranch {
    pub fine: Fine,
    pub probability: f64,
    pub state: DenseState,
}

/// One outcome of a complete Bell-basis measurement of all pairs.
#[derive(Clone, Debug)]
pub struct PremeasureBranch {
    pub labels: BellString,
    pub probability: f64,
    pub state: DenseState,
}

impl DenseState {
    /// All nonzero outcomes of measuring both halves of `pair` along z.
    pub fn measure_pair_z_branches(&self, pair: usize) -> Result<Vec<ZBranch>> {
        self.check_pair(pair)?;
        let mut out = Vec::with_capacity(4);
        for fine in Fine::ALL {
            let mut amps = self.project_out_pair(pair, fine.index());
            let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if p <= BRANCH_EPS {
                continue;
            }
            let norm = p.sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            out.push(ZBranch {
                fine,
                probability: p,
                state: DenseState {
                    amplitudes: amps,
                    n_pairs: self.n_pairs - 1,
                    n_ancilla: self.n_ancilla,
                },
            });
        }
        Ok(out)
    }

    /// Measures `pair` along `axis` on both sides and removes it.
    pub fn measure_pair_axis_branches(&self, pair: usize, axis: Axis) -> Result<Vec<ZBranch>> {
        self.check_pair(pair)?;
        match axis.to_z() {
            None => self.measure_pair_z_branches(pair),
            Some(u) => {
                let mut rotated = self.clone();
                rotated.apply_single(2 * pair, &u)?;
                rotated.apply_single(2 * pair + 1, &u)?;
                rotated.measure_pair_z_branches(pair)
            }
        }
    }

    /// Born-rule sample of a z measurement of `pair`.
    pub fn sample_measure_pair_z<R: Rng + ?Sized>(&self, pair: usize, rng: &mut R) -> Result<(Fine, DenseState)> {
        sample_branch(self.measure_pair_z_branches(pair)?, rng)
    }

    pub fn sample_measure_pair_axis<R: Rng + ?Sized>(
        &self,
        pair: usize,
        axis: Axis,
        rng: &mut R,
    ) -> Result<(Fine, DenseState)> {
        sample_branch(self.measure_pair_axis_branches(pair, axis)?, rng)
    }

    /// `(<w| ⊗ 1)|u>`: the unnormalized ancilla state paired with Bell string `w`.
    pub fn ancilla_component(&self, w: &BellString) -> Result<Vec<C>> {
        if w.len() != self.n_pairs {
            return Err(Error::LengthMismatch {
                expected: self.n_pairs,
                actual: w.len(),
            });
        }
        let bell = bell_product_vector(w);
        let anc = 1usize << self.n_ancilla;
        let mut out = vec![C::new(0.0, 0.0); anc];
        for (i, b) in bell.iter().enumerate() {
            if b.norm_sqr() == 0.0 {
                continue;
            }
            let bc = b.conj();
            for (j, o) in out.iter_mut().enumerate() {
                *o += bc * self.amplitudes[i * anc + j];
            }
        }
        Ok(out)
    }

    /// Probability of each `N`-Bell string, indexed by [`BellString::index`].
    pub fn bell_distribution(&self) -> Vec<f64> {
        BellString::all(self.n_pairs)
            .map(|w| {
                self.ancilla_component(&w)
                    .expect("lengths match")
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Complete projective measurement of the pairs onto the `N`-Bell basis,
    /// leaving the ancilla alone.
    pub fn bell_premeasure(&self) -> Vec<PremeasureBranch> {
        let mut out = Vec::new();
        for w in BellString::all(self.n_pairs) {
            let mut anc = self.ancilla_component(&w).expect("lengths match");
            let p: f64 = anc.iter().map(|a| a.norm_sqr()).sum();
            if p <= BRANCH_EPS {
                continue;
            }
            let norm = p.sqrt();
            anc.iter_mut().for_each(|a| *a /= norm);
            let pairs = bell_product_vector(&w);
            let amplitudes = pairs.iter().flat_map(|&x| anc.iter().map(move |&y| x * y)).collect();
            out.push(PremeasureBranch {
                labels: w,
                probability: p,
                state: DenseState {
                    amplitudes,
                    n_pairs: self.n_pairs,
                    n_ancilla: self.n_ancilla,
                },
            });
        }
        out
    }

    /// `<ref|ρ_AB|ref>` with the ancilla traced out.
    pub fn residual_fidelity(&self, reference: &BellString) -> Result<f64> {
        Ok(self.ancilla_component(reference)?.iter().map(|a| a.norm_sqr()).sum())
    }
}

fn sample_branch<R: Rng + ?Sized>(branches: Vec<ZBranch>, rng: &mut R) -> Result<(Fine, DenseState)> {
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    let mut u = rng.random::<f64>() * total;
    let last = branches.len().checked_sub(1).ok_or(Error::Unnormalizable(0.0))?;
    for (i, b) in branches.into_iter().enumerate() {
        if u < b.probability || i == last {
            return Ok((b.fine, b.state));
        }
        u -= b.probability;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{BellLabel, Coarse};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sum_probs(b: &[ZBranch]) -> f64 {
        b.iter().map(|x| x.probability).sum()
    }

    #[test]
    fn singlets_premeasure_to_all_ones() {
        let s = DenseState::prepare_bell_product(&BellString::singlets(3)).unwrap();
        let branches = s.bell_premeasure();
        assert_eq!(branches.len(), 1);
        assert!(branches[0].labels.is_all_singlets());
        assert_abs_diff_eq!(branches[0].probability, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_superposition_splits_evenly() {
        let terms = vec![
            (BellString::singlets(2), vec![C::new(1.0, 0.0)]),
            (BellString::new(vec![BellLabel::PHI_PLUS; 2]), vec![C::new(1.0, 0.0)]),
        ];
        let u = DenseState::from_bell_terms(&terms, 2, 0).unwrap();
        let b = u.bell_premeasure();
        assert_eq!(b.len(), 2);
        for x in &b {
            assert_abs_diff_eq!(x.probability, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn premeasure_weights_are_ancilla_marginals() {
        // Independent route: expand |u> = Σ α_{w,j}|w>|j> by summing |α|² over j.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = DenseState::random(2, 2, &mut rng).unwrap();
        let dist = u.bell_distribution();
        for branch in u.bell_premeasure() {
            let direct: f64 = (0..4)
                .map(|j| {
                    let mut basis = vec![C::new(0.0, 0.0); 4];
                    basis[j] = C::new(1.0, 0.0);
                    let v = DenseState::from_bell_terms(&[(branch.labels.clone(), basis)], 2, 2).unwrap();
                    v.inner(&u).norm_sqr()
                })
                .sum();
            assert_abs_diff_eq!(branch.probability, direct, epsilon = 1e-12);
            assert_abs_diff_eq!(branch.probability, dist[branch.labels.index()], epsilon = 1e-12);
        }
        assert_abs_diff_eq!(dist.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn residual_fidelity_basics() {
        let w = BellString::new(vec![BellLabel::PSI_PLUS, BellLabel::SINGLET]);
        let s = DenseState::prepare_bell_product(&w).unwrap();
        assert_abs_diff_eq!(s.residual_fidelity(&w).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            s.residual_fidelity(&BellString::singlets(2)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn residual_fidelity_recovers_mixture_weights() {
        // Ancilla-purified mixture 0.7 singlets + 0.3 Φ+ Φ+.
        let terms = vec![
            (
                BellString::singlets(2),
                vec![C::new(0.7f64.sqrt(), 0.0), C::new(0.0, 0.0)],
            ),
            (
                BellString::new(vec![BellLabel::PHI_PLUS; 2]),
                vec![C::new(0.0, 0.0), C::new(0.3f64.sqrt(), 0.0)],
            ),
        ];
        let u = DenseState::from_bell_terms(&terms, 2, 1).unwrap();
        assert_abs_diff_eq!(
            u.residual_fidelity(&BellString::singlets(2)).unwrap(),
            0.7,
            epsilon = 1e-12
        );
    }

    #[test]
    fn z_measurement_of_bell_states() {
        for l in BellLabel::ALL {
            let s = DenseState::prepare_bell_product(&BellString::new(vec![l, BellLabel::SINGLET])).unwrap();
            let b = s.measure_pair_z_branches(0).unwrap();
            assert_eq!(b.len(), 2);
            assert_abs_diff_eq!(sum_probs(&b), 1.0, epsilon = 1e-12);
            for x in &b {
                assert_eq!(x.fine.coarse(), Coarse::from_parity(l.amplitude));
                assert_abs_diff_eq!(
                    x.state.residual_fidelity(&BellString::singlets(1)).unwrap(),
                    1.0,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn each_triplet_is_antiparallel_along_one_axis() {
        // Direct computation of <σa⊗σa> signs for each Bell state.
        let expect = |l: BellLabel, axis: Axis| -> bool {
            matches!((l.index(), axis), (3, _) | (1, Axis::Z) | (2, Axis::X) | (0, Axis::Y))
        };
        for l in BellLabel::ALL {
            let s = DenseState::prepare_bell_product(&BellString::new(vec![l])).unwrap();
            for axis in Axis::ALL {
                let anti: f64 = s
                    .measure_pair_axis_branches(0, axis)
                    .unwrap()
                    .iter()
                    .filter(|b| b.fine.coarse() == Coarse::Antiparallel)
                    .map(|b| b.probability)
                    .sum();
                let want = if expect(l, axis) { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(anti, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fine_outcomes_can_see_coherence_coarse_cannot() {
        // (Φ+ + Φ−)/√2 = |↑↑>: fine outcome is certain, coarse agrees with premeasurement.
        let terms = vec![
            (BellString::new(vec![BellLabel::PHI_PLUS]), vec![C::new(1.0, 0.0)]),
            (BellString::new(vec![BellLabel::PHI_MINUS]), vec![C::new(1.0, 0.0)]),
        ];
        let u = DenseState::from_bell_terms(&terms, 1, 0).unwrap();
        let b = u.measure_pair_z_branches(0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].fine, Fine::UpUp);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (fine, _) = u.sample_measure_pair_z(0, &mut rng).unwrap();
        assert_eq!(fine, Fine::UpUp);
    }
}
