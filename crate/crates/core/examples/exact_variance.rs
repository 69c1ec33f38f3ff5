//! Exact mean and variance of Tr(A^p) for small n, compared with a Monte Carlo
//! estimate from the same ensemble.
//!
//! cargo run --release --example exact_variance -- [n] [p] [replicates]

use patterned_rmt::limits::exact_moments;
use patterned_rmt::montecarlo::{run_replicates, ExperimentConfig, MomentAccumulator};
use patterned_rmt::EnsembleKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    let p: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let replicates: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100_000);
    for kind in EnsembleKind::ALL {
        // odd powers are not studied for these two kinds
        if p % 2 == 1 && matches!(kind, EnsembleKind::ReverseCirculant | EnsembleKind::Hankel) {
            continue;
        }
        let exact = exact_moments(kind, n, p)?;
        let config = ExperimentConfig::new(kind, n, p, replicates, 3)?;
        let values: Vec<f64> = run_replicates(&config)?.iter().map(|s| s.value).collect();
        let acc = MomentAccumulator::from_slice(&values);
        println!(
            "{kind:>20}: exact mean {}, variance {}; sample mean {:.3}, variance {:.3} +- {:.3}",
            exact.mean,
            exact.variance,
            acc.mean(),
            acc.variance(),
            acc.variance_standard_error()
        );
    }
    Ok(())
}
