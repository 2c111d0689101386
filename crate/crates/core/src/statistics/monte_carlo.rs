//! Round-by-round Monte Carlo estimation of the observable statistics.
//!
//! Each round draws Alice's operation and Bob's basis, then Alice's detector
//! outcome from the evolved state, then (when Alice sees the vacuum) Bob's
//! outcome from the state `U_R` returns. Rounds are grouped in fixed-size
//! chunks; chunk `i` uses ChaCha8 stream `i` of the seed, so any split of
//! chunks across workers reproduces the sequential tallies exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bob_probabilities, evolve_operation, initial_state, ObservedStatistics};
use crate::adversary::{FirstAttack, SecondAttack};
use crate::fock::{MeasurementBasis, Outcome, OutcomeProbabilities};
use crate::math::sqrt;
use crate::protocol::{classify_round, AliceOperation, BobBasis, RoundType};
use crate::{Error, Result};

/// Rounds per RNG stream.
pub const CHUNK_ROUNDS: u64 = 1 << 16;

/// Relative frequencies of Alice's operations. SWAP-10 and SWAP-01 share
/// `swap_x` evenly.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperationWeights {
    /// CTRL weight.
    pub ctrl: f64,
    /// Combined SWAP-10 + SWAP-01 weight.
    pub swap_x: f64,
    /// SWAP-ALL weight.
    pub swap_all: f64,
}

impl Default for OperationWeights {
    fn default() -> Self {
        Self {
            ctrl: 0.25,
            swap_x: 0.5,
            swap_all: 0.25,
        }
    }
}

impl OperationWeights {
    fn cumulative(&self) -> Result<[f64; 4]> {
        for (name, w) in [
            ("ctrl", self.ctrl),
            ("swap_x", self.swap_x),
            ("swap_all", self.swap_all),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidParameter { name, value: w });
            }
        }
        let total = self.ctrl + self.swap_x + self.swap_all;
        if total <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "operation weights",
                value: total,
            });
        }
        let half = 0.5 * self.swap_x;
        Ok([
            self.ctrl / total,
            (self.ctrl + half) / total,
            (self.ctrl + self.swap_x) / total,
            1.0,
        ])
    }
}

/// Per-round outcome tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoundTally {
    /// All simulated rounds.
    pub rounds: u64,
    /// SWAP-x with computational measurement.
    pub raw_rounds: u64,
    /// `[alice bit][bob bit]` with Alice vacuum and a single Bob click.
    pub raw: [[u64; 2]; 2],
    /// SWAP-x with Hadamard measurement.
    pub mismatched_raw_rounds: u64,
    /// `[alice bit]` with Alice vacuum and Bob `|+>`.
    pub mismatched_plus: [u64; 2],
    /// CTRL with Hadamard measurement.
    pub test_rounds: u64,
    /// Bob `|+>` in test rounds.
    pub test_plus: u64,
    /// CTRL with computational measurement.
    pub mismatched_test_rounds: u64,
    /// Bob `|0,1>` / `|1,0>` in mismatched test rounds.
    pub ctrl: [u64; 2],
    /// SWAP-ALL with computational measurement.
    pub swap_all_rounds: u64,
    /// Alice double clicks.
    pub double: u64,
    /// Alice vacuum with Bob `|0,1>` / `|1,0>`.
    pub create: [u64; 2],
}

impl RoundTally {
    /// Adds another tally.
    pub fn merge(mut self, other: &Self) -> Self {
        self.rounds += other.rounds;
        self.raw_rounds += other.raw_rounds;
        for a in 0..2 {
            for b in 0..2 {
                self.raw[a][b] += other.raw[a][b];
            }
            self.mismatched_plus[a] += other.mismatched_plus[a];
            self.ctrl[a] += other.ctrl[a];
            self.create[a] += other.create[a];
        }
        self.mismatched_raw_rounds += other.mismatched_raw_rounds;
        self.test_rounds += other.test_rounds;
        self.test_plus += other.test_plus;
        self.mismatched_test_rounds += other.mismatched_test_rounds;
        self.swap_all_rounds += other.swap_all_rounds;
        self.double += other.double;
        self
    }

    /// Frequencies with binomial standard errors.
    pub fn estimate(&self) -> MonteCarloEstimate {
        let raw_total = self.raw.iter().flatten().sum();
        let pairs = [
            frequency(self.raw[0][0], self.raw_rounds),
            frequency(self.raw[0][1], self.raw_rounds),
            frequency(self.raw[1][0], self.raw_rounds),
            frequency(self.raw[1][1], self.raw_rounds),
            frequency(raw_total, self.raw_rounds),
            frequency(self.mismatched_plus[0], self.mismatched_raw_rounds),
            frequency(self.mismatched_plus[1], self.mismatched_raw_rounds),
            frequency(self.test_plus, self.test_rounds),
            frequency(self.ctrl[0], self.mismatched_test_rounds),
            frequency(self.ctrl[1], self.mismatched_test_rounds),
            frequency(self.double, self.swap_all_rounds),
            frequency(self.create[0], self.swap_all_rounds),
            frequency(self.create[1], self.swap_all_rounds),
        ];
        MonteCarloEstimate {
            stats: ObservedStatistics::from_values(pairs.map(|p| p.0)),
            std_errors: ObservedStatistics::from_values(pairs.map(|p| p.1)),
            tally: *self,
        }
    }
}

// Zero or full counts use the rule-of-three bound 3/n as the error.
fn frequency(count: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = count as f64 / nf;
    let se = if count == 0 || count == n {
        3.0 / nf
    } else {
        sqrt(p * (1.0 - p) / nf)
    };
    (p, se)
}

/// Estimated statistics, per-field standard errors and the raw tallies.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonteCarloEstimate {
    /// Frequencies, with the same conventions as the exact statistics.
    pub stats: ObservedStatistics,
    /// Standard error of each field.
    pub std_errors: ObservedStatistics,
    /// Underlying counts.
    pub tally: RoundTally,
}

/// Precomputed outcome distributions for one attack.
#[derive(Clone, Debug)]
pub struct RoundSampler {
    op_cumulative: [f64; 4],
    // indexed by AliceOperation::ALL order
    alice: [[f64; 4]; 4],
    // [op][basis], conditional on Alice's vacuum
    bob: [[[f64; 4]; 2]; 4],
}

fn slots(p: &OutcomeProbabilities) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (slot, (_, v)) in out.iter_mut().zip(p.iter()) {
        *slot = v;
    }
    out
}

fn sample(rng: &mut ChaCha8Rng, probs: &[f64; 4]) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            if u < p {
                return i;
            }
            u -= p;
            last = i;
        }
    }
    last
}

impl RoundSampler {
    /// Evolves the attack once per operation and caches the distributions.
    pub fn new(
        first: &FirstAttack,
        second: &SecondAttack,
        weights: OperationWeights,
    ) -> Result<Self> {
        let op_cumulative = weights.cumulative()?;
        let psi0 = initial_state(first, second)?;
        let mut alice = [[0.0; 4]; 4];
        let mut bob = [[[0.0; 4]; 2]; 4];
        for (i, op) in AliceOperation::ALL.into_iter().enumerate() {
            let branch = evolve_operation(&psi0, second, op)?;
            alice[i] = slots(&branch.alice);
            let vacuum = branch.alice.get(Outcome::Vacuum);
            if vacuum > 0.0 {
                for (j, basis) in BobBasis::ALL.into_iter().enumerate() {
                    let p = bob_probabilities(&branch.returned, basis.measurement());
                    bob[i][j] = slots(&p).map(|v| v / vacuum);
                }
            }
        }
        Ok(Self {
            op_cumulative,
            alice,
            bob,
        })
    }

    /// Simulates `rounds` rounds on stream `chunk` of `seed`.
    pub fn run_chunk(&self, seed: u64, chunk: u64, rounds: u64) -> RoundTally {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let mut tally = RoundTally::default();
        for _ in 0..rounds {
            self.round(&mut rng, &mut tally);
        }
        tally
    }

    fn round(&self, rng: &mut ChaCha8Rng, tally: &mut RoundTally) {
        tally.rounds += 1;
        let u = rng.random::<f64>();
        let op_index = self.op_cumulative.iter().position(|&c| u < c).unwrap_or(3);
        let op = AliceOperation::ALL[op_index];
        let basis_index = usize::from(rng.random::<bool>());
        let basis = BobBasis::ALL[basis_index];

        // slot 0 is the vacuum in both bases
        let alice_slot = sample(rng, &self.alice[op_index]);
        let alice_vacuum = alice_slot == 0;
        let bob_slot = if alice_vacuum {
            Some(sample(rng, &self.bob[op_index][basis_index]))
        } else {
            None
        };
        let bob = bob_slot.map(|s| OutcomeProbabilities::outcomes(basis.measurement())[s]);

        match classify_round(op, basis) {
            RoundType::RawKey => {
                tally.raw_rounds += 1;
                let a = op.raw_key_bit().expect("swap-x") as usize;
                match bob {
                    Some(Outcome::ClickZero) => tally.raw[a][0] += 1,
                    Some(Outcome::ClickOne) => tally.raw[a][1] += 1,
                    _ => {}
                }
            }
            RoundType::MismatchedRawKey => {
                tally.mismatched_raw_rounds += 1;
                if bob == Some(Outcome::Plus) {
                    tally.mismatched_plus[op.raw_key_bit().expect("swap-x") as usize] += 1;
                }
            }
            RoundType::Test => {
                tally.test_rounds += 1;
                if bob == Some(Outcome::Plus) {
                    tally.test_plus += 1;
                }
            }
            RoundType::MismatchedTest => {
                tally.mismatched_test_rounds += 1;
                match bob {
                    Some(Outcome::ClickZero) => tally.ctrl[0] += 1,
                    Some(Outcome::ClickOne) => tally.ctrl[1] += 1,
                    _ => {}
                }
            }
            RoundType::SwapAll => {
                tally.swap_all_rounds += 1;
                let alice =
                    OutcomeProbabilities::outcomes(MeasurementBasis::Computational)[alice_slot];
                if alice == Outcome::DoubleClick {
                    tally.double += 1;
                }
                match bob {
                    Some(Outcome::ClickZero) => tally.create[0] += 1,
                    Some(Outcome::ClickOne) => tally.create[1] += 1,
                    _ => {}
                }
            }
            RoundType::MismatchedSwapAll => {}
        }
    }

    /// `(chunk index, rounds)` pairs covering `rounds`.
    pub fn chunks(rounds: u64) -> impl Iterator<Item = (u64, u64)> {
        let full = rounds / CHUNK_ROUNDS;
        let rest = rounds % CHUNK_ROUNDS;
        (0..full)
            .map(|i| (i, CHUNK_ROUNDS))
            .chain((rest > 0).then_some((full, rest)))
    }
}

/// Monte Carlo estimate with uniform operation choice.
pub fn monte_carlo_statistics(
    first: &FirstAttack,
    second: &SecondAttack,
    rounds: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    monte_carlo_statistics_with_weights(first, second, rounds, seed, OperationWeights::default())
}

/// Monte Carlo estimate with explicit operation weights.
pub fn monte_carlo_statistics_with_weights(
    first: &FirstAttack,
    second: &SecondAttack,
    rounds: u64,
    seed: u64,
    weights: OperationWeights,
) -> Result<MonteCarloEstimate> {
    if rounds == 0 {
        return Err(Error::ZeroRounds);
    }
    let sampler = RoundSampler::new(first, second, weights)?;
    let tally = RoundSampler::chunks(rounds).fold(RoundTally::default(), |acc, (chunk, n)| {
        acc.merge(&sampler.run_chunk(seed, chunk, n))
    });
    Ok(tally.estimate())
}
