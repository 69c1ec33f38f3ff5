//! Builds one small realization of each ensemble and prints it densely, along
//! with the largest covariance row sum of its entries.
//!
//! cargo run --example ensembles_tour -- [n] [seed]

use patterned_rmt::ensembles::covariance_row_sum_max;
use patterned_rmt::{EnsembleKind, MatrixRealization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    for kind in EnsembleKind::ALL {
        let real = MatrixRealization::sample(kind, n, seed, 0)?;
        println!(
            "{kind}: {} inputs, symmetric = {}, max covariance row sum = {}",
            real.values().len(),
            kind.is_symmetric(),
            covariance_row_sum_max(kind, n)?
        );
        let dense = real.dense_matrix()?;
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:7.3}", dense[(i, j)])).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
