//! Finite-n trace variance against the stated lower bounds, using the exact
//! variance where it is cheap and a Monte Carlo estimate otherwise.
//!
//! cargo run --release --example lower_bounds -- [n] [replicates]

use patterned_rmt::limits::exact_moments;
use patterned_rmt::montecarlo::{
    lower_bound_check, run_replicates, ExperimentConfig, MomentAccumulator, VarianceEstimate,
};
use patterned_rmt::{EnsembleKind, Error};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(32);
    let replicates: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5_000);
    for kind in EnsembleKind::ALL {
        for p in [2u32, 4] {
            let estimate = match exact_moments(kind, n, p) {
                Ok(m) => VarianceEstimate {
                    value: m.variance as f64,
                    standard_error: 0.0,
                },
                // over the exact-expansion budget
                Err(Error::Resource(_)) => {
                    let config = ExperimentConfig::new(kind, n, p, replicates, 9)?;
                    let values: Vec<f64> =
                        run_replicates(&config)?.iter().map(|s| s.value).collect();
                    let acc = MomentAccumulator::from_slice(&values);
                    VarianceEstimate {
                        value: acc.variance(),
                        standard_error: acc.variance_standard_error(),
                    }
                }
                Err(e) => return Err(e.into()),
            };
            println!("{}", serde_json::to_string(&lower_bound_check(kind, n, p, estimate))?);
        }
    }
    Ok(())
}
