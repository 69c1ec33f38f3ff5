//! Monte Carlo CLT check for one ensemble and power: standardized trace
//! statistics, KS distance to the standard normal and the variance ratio
//! against its limit.
//!
//! cargo run --release --example clt_experiment -- [kind] [n] [p] [replicates]

use patterned_rmt::montecarlo::{run_replicates, summarize, ExperimentConfig};
use patterned_rmt::EnsembleKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: EnsembleKind = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(EnsembleKind::Circulant);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(256);
    let p: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let replicates: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2_000);
    let config = ExperimentConfig::new(kind, n, p, replicates, 42)?;
    let samples = run_replicates(&config)?;
    let report = summarize(&samples, &config)?;
    println!("{}", report.to_json()?);
    Ok(())
}
