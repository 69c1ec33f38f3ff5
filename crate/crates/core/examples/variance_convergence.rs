//! Normalized trace variance over a grid of dimensions, next to its limit
//! and, where the exact expansion fits the budget, the exact finite-n value.
//!
//! cargo run --release --example variance_convergence -- [kind] [p] [replicates]

use patterned_rmt::montecarlo::variance_convergence_with;
use patterned_rmt::EnsembleKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: EnsembleKind = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(EnsembleKind::Circulant);
    let p: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let replicates: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2_000);
    let grid = [16, 32, 64, 128, 256, 512];
    let table = variance_convergence_with(kind, p, &grid, replicates, 5, true)?;
    print!("{}", table.to_csv());
    if let Some(note) = &table.limit_note {
        println!("# {note}");
    }
    if let Some(decreasing) = table.gaps_decreasing {
        println!("# relative gaps decreasing: {decreasing}");
    }
    Ok(())
}
