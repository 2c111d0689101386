//! Rayon drivers. Both split work so that results do not depend on the
//! number of threads.

use mirror_core::adversary::{FirstAttack, SecondAttack};
use mirror_core::scenarios::{curve_grid, curve_row, CurveRow, ScenarioConfig};
use mirror_core::statistics::{MonteCarloEstimate, OperationWeights, RoundSampler, RoundTally};
use rayon::prelude::*;

use crate::Result;

/// Monte Carlo estimate with chunks spread over the thread pool; identical to
/// the sequential `monte_carlo_statistics_with_weights`.
pub fn monte_carlo(
    first: &FirstAttack,
    second: &SecondAttack,
    rounds: u64,
    seed: u64,
    weights: OperationWeights,
) -> Result<MonteCarloEstimate> {
    if rounds == 0 {
        return Err(mirror_core::Error::ZeroRounds.into());
    }
    let sampler = RoundSampler::new(first, second, weights)?;
    let chunks: Vec<(u64, u64)> = RoundSampler::chunks(rounds).collect();
    let tallies: Vec<RoundTally> = chunks
        .par_iter()
        .map(|&(i, n)| sampler.run_chunk(seed, i, n))
        .collect();
    let total = tallies
        .iter()
        .fold(RoundTally::default(), |acc, t| acc.merge(t));
    Ok(total.estimate())
}

/// Rate curve with rows computed in parallel, returned in `Q_Z` order.
pub fn sweep_curve(
    cfg: &ScenarioConfig,
    start: f64,
    end: f64,
    steps: usize,
    grid_points: usize,
) -> Result<Vec<CurveRow>> {
    let qs = curve_grid(start, end, steps)?;
    let rows = qs
        .par_iter()
        .map(|&qz| curve_row(cfg, qz, grid_points))
        .collect::<mirror_core::Result<Vec<_>>>()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mirror_core::adversary::{build_depolarizing_attack, NoiseChannelSpec};
    use mirror_core::statistics::monte_carlo_statistics;

    #[test]
    fn parallel_matches_sequential_bit_for_bit() {
        let m =
            build_depolarizing_attack(&NoiseChannelSpec::new(0.1, 0.1, 0.2, 0.0).unwrap()).unwrap();
        let rounds = 5 * mirror_core::statistics::CHUNK_ROUNDS + 123;
        let seq = monte_carlo_statistics(&m.first, &m.second, rounds, 42).unwrap();
        for threads in [1, 3, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let par = pool
                .install(|| {
                    monte_carlo(&m.first, &m.second, rounds, 42, OperationWeights::default())
                })
                .unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn parallel_curve_matches_sequential() {
        let cfg = ScenarioConfig::default();
        let a = sweep_curve(&cfg, 0.0, 0.12, 13, 501).unwrap();
        let b = mirror_core::scenarios::sweep_curve(&cfg, 0.0, 0.12, 13, 501).unwrap();
        assert_eq!(a, b);
    }
}
