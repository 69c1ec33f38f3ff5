//! Mean spectral norm of each ensemble divided by sqrt(n ln n) over a grid of
//! dimensions.
//!
//! cargo run --release --example norm_growth -- [replicates] [max_n]

use patterned_rmt::spectra::{norm_scan, norm_scan_csv};
use patterned_rmt::EnsembleKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let replicates: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);
    let max_n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4096);
    let grid: Vec<usize> = (7..=max_n.ilog2()).map(|e| 1usize << e).collect();
    for kind in EnsembleKind::ALL {
        let start = std::time::Instant::now();
        let rows = norm_scan(kind, &grid, replicates, 1)?;
        println!("# {kind} ({:.1?})", start.elapsed());
        print!("{}", norm_scan_csv(&rows));
    }
    Ok(())
}
