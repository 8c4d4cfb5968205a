//! Verification of allegedly perfect singlets by random hashing, the
//! classical parity game it is modelled on, and raw key extraction.
//!
//! A run is a sequence of rounds. Each round draws a nonzero subset of the
//! live pairs' label bits, runs the parity circuit, measures the destination
//! pair along z and drops it. The coarse outcome (antiparallel = 1) is the
//! subset parity of the pre-circuit string. A round passes when that parity
//! equals what `N` honest singlets would have produced under the same
//! circuits; the run stops at the first failed round.
//!
//! Subsets are drawn from the caller's RNG only after the source state has
//! been handed over, so a source can never depend on them.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{apply_gates, build_parity_circuit, measure_pair, BellString, Fine, Gate};
use crate::bits::{BitString, Subset};
use crate::dense::{run_protocol_dense, DenseState};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n_pairs: usize,
    pub rounds: usize,
}

impl ProtocolParams {
    /// Requires `1 <= rounds < n_pairs` so that at least one pair survives.
    pub fn new(n_pairs: usize, rounds: usize) -> Result<Self> {
        if rounds == 0 {
            return Err(invalid("rounds", "at least one round is needed"));
        }
        if rounds >= n_pairs {
            return Err(invalid(
                "rounds",
                format!("{rounds} rounds would consume all {n_pairs} pairs"),
            ));
        }
        Ok(Self { n_pairs, rounds })
    }

    /// Upper bound on the probability that a wrong string passes every round.
    pub fn cheat_bound(&self) -> f64 {
        0.5f64.powi(self.rounds as i32)
    }
}

/// Uniform nonzero subsets for each round; round `r` spans `N - r` pairs.
pub fn draw_subsets<R: Rng + ?Sized>(n_pairs: usize, rounds: usize, rng: &mut R) -> Vec<Subset> {
    (0..rounds)
        .map(|r| Subset::random_nonzero(2 * (n_pairs - r), rng))
        .collect()
}

fn check_schedule(n_pairs: usize, subsets: &[Subset]) -> Result<()> {
    if subsets.len() > n_pairs {
        return Err(invalid("subsets", "more rounds than pairs"));
    }
    for (r, s) in subsets.iter().enumerate() {
        if s.len() != 2 * (n_pairs - r) {
            return Err(Error::LengthMismatch {
                expected: 2 * (n_pairs - r),
                actual: s.len(),
            });
        }
    }
    Ok(())
}

/// The whole schedule as one gate list on the original pair indices, with
/// the original index measured in each round. Measured pairs are left in
/// place; later gates never touch them.
pub fn schedule_unitary(n_pairs: usize, subsets: &[Subset]) -> Result<(Vec<Gate>, Vec<usize>)> {
    check_schedule(n_pairs, subsets)?;
    let mut ids: Vec<usize> = (0..n_pairs).collect();
    let mut gates = Vec::new();
    let mut measured = Vec::with_capacity(subsets.len());
    for s in subsets {
        let c = build_parity_circuit(s, ids.len())?;
        gates.extend(c.gates.iter().map(|g| match *g {
            Gate::Bx(p) => Gate::Bx(ids[p]),
            Gate::By(p) => Gate::By(ids[p]),
            Gate::SigmaX(p) => Gate::SigmaX(ids[p]),
            Gate::Bxor { source, target } => Gate::Bxor {
                source: ids[source],
                target: ids[target],
            },
        }));
        measured.push(ids.remove(c.destination));
    }
    Ok((gates, measured))
}

/// Deterministic label-level trace of a subset schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelTrace {
    /// Coarse parity of each round's destination pair.
    pub parities: Vec<bool>,
    /// Original index of each round's destination pair.
    pub destinations: Vec<usize>,
    /// Surviving pairs after the last round.
    pub survivors: BellString,
    /// Original indices of the survivors.
    pub survivor_ids: Vec<usize>,
}

/// Runs every round of `subsets` on a Bell string without early exit.
pub fn trace_labels(source: &BellString, subsets: &[Subset]) -> Result<LabelTrace> {
    check_schedule(source.len(), subsets)?;
    let mut state = source.clone();
    let mut ids: Vec<usize> = (0..source.len()).collect();
    let mut parities = Vec::with_capacity(subsets.len());
    let mut destinations = Vec::with_capacity(subsets.len());
    for s in subsets {
        let circuit = build_parity_circuit(s, state.len())?;
        state = apply_gates(&state, &circuit.gates)?;
        parities.push(state.label(circuit.destination)?.amplitude);
        destinations.push(ids.remove(circuit.destination));
        state.remove_pair(circuit.destination);
    }
    Ok(LabelTrace {
        parities,
        destinations,
        survivors: state,
        survivor_ids: ids,
    })
}

/// What `N` perfect singlets produce under a given schedule.
pub fn honest_reference(n_pairs: usize, subsets: &[Subset]) -> Result<LabelTrace> {
    trace_labels(&BellString::singlets(n_pairs), subsets)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub subset: Subset,
    /// Original index of the measured pair.
    pub destination: usize,
    pub fine: Fine,
    /// Observed parity, antiparallel = 1.
    pub parity: bool,
    /// Parity honest singlets would give.
    pub expected: bool,
}

impl Round {
    pub fn passed(&self) -> bool {
        self.parity == self.expected
    }
}

/// Public record of a verification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub n_pairs: usize,
    pub rounds: Vec<Round>,
    pub verdict: Verdict,
    /// Original indices of the pairs left unmeasured.
    pub survivor_ids: Vec<usize>,
}

impl Transcript {
    pub(crate) fn from_rounds(n_pairs: usize, rounds: Vec<Round>, survivor_ids: Vec<usize>) -> Self {
        let verdict = if rounds.iter().all(Round::passed) {
            Verdict::Accept
        } else {
            Verdict::Reject
        };
        Self {
            n_pairs,
            rounds,
            verdict,
            survivor_ids,
        }
    }

    /// Structured text record: a header line, one line per round
    /// (`<hex subset>/<bits> <destination> <fine> <parity>`), and the verdict.
    pub fn to_text(&self) -> String {
        let mut out = format!("pairs {}\n", self.n_pairs);
        for r in &self.rounds {
            out += &format!(
                "{}/{} {} {} {}\n",
                r.subset.bits().to_hex(),
                r.subset.len(),
                r.destination,
                r.fine,
                r.parity as u8
            );
        }
        out += &format!("verdict {}\n", self.verdict);
        out
    }

    /// Parses [`Transcript::to_text`] output. Expected parities are
    /// recomputed from the subsets.
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::Parse(format!("bad transcript line {line:?}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(""))?;
        let n_pairs: usize = header
            .strip_prefix("pairs ")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(header))?;
        let mut rounds_raw = Vec::new();
        let mut verdict = None;
        for line in lines {
            if let Some(v) = line.strip_prefix("verdict ") {
                verdict = Some(match v {
                    "accept" => Verdict::Accept,
                    "reject" => Verdict::Reject,
                    _ => return Err(bad(line)),
                });
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad(line));
            }
            let (hex, len) = f[0].split_once('/').ok_or_else(|| bad(line))?;
            let len: usize = len.parse().map_err(|_| bad(line))?;
            let subset = Subset::new(BitString::from_hex(hex, len)?)?;
            let destination = f[1].parse().map_err(|_| bad(line))?;
            let fine = Fine::from_str(f[2])?;
            let parity = match f[3] {
                "0" => false,
                "1" => true,
                _ => return Err(bad(line)),
            };
            rounds_raw.push((subset, destination, fine, parity));
        }
        let subsets: Vec<Subset> = rounds_raw.iter().map(|r| r.0.clone()).collect();
        let honest = honest_reference(n_pairs, &subsets)?;
        let rounds: Vec<Round> = rounds_raw
            .into_iter()
            .zip(&honest.parities)
            .map(|((subset, destination, fine, parity), &expected)| Round {
                subset,
                destination,
                fine,
                parity,
                expected,
            })
            .collect();
        let mut ids: Vec<usize> = (0..n_pairs).collect();
        ids.retain(|i| !rounds.iter().any(|r| r.destination == *i));
        let t = Transcript::from_rounds(n_pairs, rounds, ids);
        if Some(t.verdict) != verdict {
            return Err(Error::Parse("verdict does not match rounds".into()));
        }
        Ok(t)
    }
}

/// The pairs handed to Alice and Bob.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSource {
    Labels(BellString),
    Dense(DenseState),
}

impl PairSource {
    pub fn n_pairs(&self) -> usize {
        match self {
            PairSource::Labels(b) => b.len(),
            PairSource::Dense(d) => d.n_pairs(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerificationOutcome {
    pub transcript: Transcript,
    /// Pairs left after the last executed round.
    pub survivors: PairSource,
    /// What honest singlets would have left, in the same order.
    pub honest_survivors: BellString,
}

impl VerificationOutcome {
    pub fn accepted(&self) -> bool {
        self.transcript.verdict.is_accept()
    }

    /// Accepted although the surviving labels differ from the honest ones.
    /// Only defined for label sources.
    pub fn false_accept(&self) -> Option<bool> {
        match &self.survivors {
            PairSource::Labels(s) => Some(self.accepted() && !s.same_labels(&self.honest_survivors)),
            PairSource::Dense(_) => None,
        }
    }
}

/// Runs `params.rounds` rounds of hashing verification on `source`.
/// Subsets are drawn from `rng` after the source is fixed.
pub fn run_verification<R: Rng + ?Sized>(
    source: PairSource,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    if source.n_pairs() != params.n_pairs {
        return Err(Error::LengthMismatch {
            expected: params.n_pairs,
            actual: source.n_pairs(),
        });
    }
    let subsets = draw_subsets(params.n_pairs, params.rounds, rng);
    run_with_subsets(source, &subsets, rng)
}

/// Runs verification against a fixed, possibly foreknown, schedule.
pub fn run_with_subsets<R: Rng + ?Sized>(
    source: PairSource,
    subsets: &[Subset],
    rng: &mut R,
) -> Result<VerificationOutcome> {
    let n = source.n_pairs();
    let honest = honest_reference(n, subsets)?;
    match source {
        PairSource::Labels(b) => {
            let (transcript, survivors) = run_labels(b, subsets, &honest, rng)?;
            let honest_survivors = honest_after(&honest, n, transcript.rounds.len(), subsets)?;
            Ok(VerificationOutcome {
                transcript,
                survivors: PairSource::Labels(survivors),
                honest_survivors,
            })
        }
        PairSource::Dense(d) => {
            let (transcript, survivors) = run_protocol_dense(&d, subsets, rng)?;
            let honest_survivors = honest_after(&honest, n, transcript.rounds.len(), subsets)?;
            Ok(VerificationOutcome {
                transcript,
                survivors: PairSource::Dense(survivors),
                honest_survivors,
            })
        }
    }
}

fn honest_after(full: &LabelTrace, n: usize, executed: usize, subsets: &[Subset]) -> Result<BellString> {
    if executed == subsets.len() {
        Ok(full.survivors.clone())
    } else {
        Ok(honest_reference(n, &subsets[..executed])?.survivors)
    }
}

fn run_labels<R: Rng + ?Sized>(
    source: BellString,
    subsets: &[Subset],
    honest: &LabelTrace,
    rng: &mut R,
) -> Result<(Transcript, BellString)> {
    let n = source.len();
    let mut state = source;
    let mut ids: Vec<usize> = (0..n).collect();
    let mut rounds = Vec::with_capacity(subsets.len());
    for (s, &expected) in subsets.iter().zip(&honest.parities) {
        let circuit = build_parity_circuit(s, state.len())?;
        state = apply_gates(&state, &circuit.gates)?;
        let m = measure_pair(&state, circuit.destination, rng)?;
        state = m.residual;
        let round = Round {
            subset: s.clone(),
            destination: ids.remove(circuit.destination),
            fine: m.fine,
            parity: m.coarse.parity(),
            expected,
        };
        let passed = round.passed();
        rounds.push(round);
        if !passed {
            break;
        }
    }
    Ok((Transcript::from_rounds(n, rounds, ids), state))
}

/// Raw key bits. Bob's bits are flipped, so perfect singlets give equal keys.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawKey {
    pub alice: Vec<bool>,
    pub bob: Vec<bool>,
}

impl RawKey {
    pub fn agrees(&self) -> bool {
        self.alice == self.bob
    }

    fn push(&mut self, fine: Fine) {
        // up = 0, down = 1
        self.alice.push(fine.alice_down());
        self.bob.push(!fine.bob_down());
    }
}

/// Measures every surviving pair along z.
pub fn generate_key<R: Rng + ?Sized>(survivors: &PairSource, rng: &mut R) -> Result<RawKey> {
    if survivors.n_pairs() == 0 {
        return Err(Error::NoSurvivors);
    }
    let mut key = RawKey {
        alice: Vec::new(),
        bob: Vec::new(),
    };
    match survivors {
        PairSource::Labels(b) => {
            let mut state = b.clone();
            while !state.is_empty() {
                let m = measure_pair(&state, 0, rng)?;
                key.push(m.fine);
                state = m.residual;
            }
        }
        PairSource::Dense(d) => {
            let mut state = d.clone();
            while state.n_pairs() > 0 {
                let (fine, rest) = state.sample_measure_pair_z(0, rng)?;
                key.push(fine);
                state = rest;
            }
        }
    }
    Ok(key)
}

/// Questions Alice and Bob may ask in the classical game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionPolicy {
    /// "Is bit k a 1?" with k uniform, drawn independently per question.
    SingleDigit,
    /// Parity of a subset drawn uniformly from all strings.
    RandomParity,
}

/// The parity game: Eve commits to `x`, then answers `m` questions
/// truthfully. Alice and Bob accept iff every answer matches the all-ones
/// hypothesis.
pub fn classical_game<R: Rng + ?Sized>(
    x: &BitString,
    m: usize,
    policy: QuestionPolicy,
    rng: &mut R,
) -> Result<Verdict> {
    if x.is_empty() {
        return Err(invalid("x", "empty string"));
    }
    let n = x.len();
    for _ in 0..m {
        let consistent = match policy {
            QuestionPolicy::SingleDigit => x.get(rng.random_range(0..n)),
            QuestionPolicy::RandomParity => {
                let s = BitString::random(n, rng);
                crate::bits::subset_parity(x, &s)? == (s.weight() % 2 == 1)
            }
        };
        if !consistent {
            return Ok(Verdict::Reject);
        }
    }
    Ok(Verdict::Accept)
}

/// Direct testing: measure `m` distinct random pairs along z and accept iff
/// all are antiparallel.
pub fn direct_test<R: Rng + ?Sized>(state: &BellString, m: usize, rng: &mut R) -> Result<Verdict> {
    if m > state.len() {
        return Err(invalid("rounds", format!("cannot test {m} of {} pairs", state.len())));
    }
    let ok = index::sample(rng, state.len(), m)
        .into_iter()
        .all(|k| state.labels()[k].amplitude);
    Ok(if ok { Verdict::Accept } else { Verdict::Reject })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::BellLabel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn params_validate() {
        assert!(ProtocolParams::new(5, 0).is_err());
        assert!(ProtocolParams::new(5, 5).is_err());
        assert!(ProtocolParams::new(5, 4).is_ok());
    }

    #[test]
    fn honest_singlets_always_accepted() {
        let mut r = rng(1);
        let params = ProtocolParams::new(12, 8).unwrap();
        for _ in 0..200 {
            let out = run_verification(PairSource::Labels(BellString::singlets(12)), &params, &mut r).unwrap();
            assert!(out.accepted());
            assert_eq!(out.transcript.rounds.len(), 8);
            assert_eq!(out.survivors.n_pairs(), 4);
            assert_eq!(out.false_accept(), Some(false));
        }
    }

    #[test]
    fn boundary_leaves_one_survivor() {
        let mut r = rng(2);
        let params = ProtocolParams::new(4, 3).unwrap();
        let out = run_verification(PairSource::Labels(BellString::singlets(4)), &params, &mut r).unwrap();
        assert_eq!(out.survivors.n_pairs(), 1);
        assert_eq!(out.transcript.survivor_ids.len(), 1);
    }

    #[test]
    fn wrong_size_source_rejected() {
        let params = ProtocolParams::new(4, 2).unwrap();
        assert!(run_verification(PairSource::Labels(BellString::singlets(3)), &params, &mut rng(0)).is_err());
    }

    #[test]
    fn two_subset_schedule_mapping() {
        let subsets = [Subset::parse("001101").unwrap(), Subset::parse("1001").unwrap()];
        let t = honest_reference(3, &subsets).unwrap();
        assert_eq!(t.destinations, vec![1, 0]);
        assert_eq!(t.parities, vec![true, false]);
        assert_eq!(t.survivor_ids, vec![2]);
        assert!(t.survivors.is_all_singlets());
    }

    #[test]
    fn transcript_text_round_trip() {
        let mut r = rng(5);
        let params = ProtocolParams::new(6, 3).unwrap();
        let mut src = BellString::singlets(6);
        src.set_label(4, BellLabel::PHI_PLUS).unwrap();
        for _ in 0..30 {
            let out = run_verification(PairSource::Labels(src.clone()), &params, &mut r).unwrap();
            let text = out.transcript.to_text();
            assert_eq!(Transcript::from_text(&text).unwrap(), out.transcript, "{text}");
        }
    }

    #[test]
    fn keys_from_singlets_agree_and_phi_plus_disagrees() {
        let mut r = rng(9);
        let mut ones = 0;
        for _ in 0..2000 {
            let k = generate_key(&PairSource::Labels(BellString::singlets(1)), &mut r).unwrap();
            assert!(k.agrees());
            ones += k.alice[0] as usize;
        }
        assert!((ones as f64 / 2000.0 - 0.5).abs() < 0.05);
        let k = generate_key(&PairSource::Labels(BellString::new(vec![BellLabel::PHI_PLUS])), &mut r).unwrap();
        assert!(!k.agrees());
        assert_eq!(
            generate_key(&PairSource::Labels(BellString::singlets(0)), &mut r).unwrap_err(),
            Error::NoSurvivors
        );
    }

    #[test]
    fn game_all_ones_is_always_accepted() {
        let mut r = rng(4);
        let x = BitString::ones(16);
        for policy in [QuestionPolicy::SingleDigit, QuestionPolicy::RandomParity] {
            for _ in 0..100 {
                assert_eq!(classical_game(&x, 20, policy, &mut r).unwrap(), Verdict::Accept);
            }
        }
    }

    #[test]
    fn game_single_zero_with_single_digit_questions() {
        // Exact value by counting: each question misses the zero w.p. 1 - 1/N.
        let (n, m, trials) = (10, 5, 200_000);
        let mut x = BitString::ones(n);
        x.set(3, false);
        let mut r = rng(6);
        let acc = (0..trials)
            .filter(|_| {
                classical_game(&x, m, QuestionPolicy::SingleDigit, &mut r)
                    .unwrap()
                    .is_accept()
            })
            .count() as f64
            / trials as f64;
        let p = (1.0 - 1.0 / n as f64).powi(m as i32);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((acc - p).abs() < 4.0 * sigma, "{acc} vs {p}");
    }

    #[test]
    fn game_random_parity_hits_two_to_minus_m() {
        let (n, m, trials) = (12, 4, 200_000);
        let mut r = rng(8);
        let mut accepted = 0;
        for _ in 0..trials {
            let mut x = BitString::random(n, &mut r);
            if x == BitString::ones(n) {
                x.set(0, false);
            }
            accepted += classical_game(&x, m, QuestionPolicy::RandomParity, &mut r)
                .unwrap()
                .is_accept() as usize;
        }
        let p = 0.5f64.powi(m as i32);
        let acc = accepted as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((acc - p).abs() < 4.0 * sigma, "{acc} vs {p}");
    }

    #[test]
    fn direct_test_catches_tested_flaw() {
        let mut s = BellString::singlets(5);
        s.set_label(2, BellLabel::PHI_MINUS).unwrap();
        let mut r = rng(3);
        assert_eq!(direct_test(&s, 5, &mut r).unwrap(), Verdict::Reject);
        assert_eq!(
            direct_test(&BellString::singlets(5), 5, &mut r).unwrap(),
            Verdict::Accept
        );
        assert!(direct_test(&s, 6, &mut r).is_err());
    }
}
