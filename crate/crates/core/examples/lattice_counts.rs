//! Lattice-point counts in closed form against brute-force enumeration, and
//! the scaled count approaching the Irwin-Hall density.
//!
//! cargo run --release --example lattice_counts -- [p] [n]

use patterned_rmt::limits::{
    brute_card, card_a, card_b, card_b_k, irwin_hall_density, scaled_count, BruteQuery,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let n: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(12);
    for s in 0..p as i64 {
        let closed = card_a(p, s, n)?.count;
        let brute = brute_card(BruteQuery::A { p, s }, n)?.count;
        println!("|A_{p},{s}| at n={n}: {closed} (brute force {brute})");
    }
    for s in -(p as i64 - 1)..=(p as i64 - 1) {
        println!("|B_{p},{s}| at n={n}: {}", card_b(p, s, n)?.count);
    }
    for k in 0..=p {
        let closed = card_b_k(p, k, n)?.count;
        let brute = brute_card(BruteQuery::BK { p, k }, n)?.count;
        println!("|B_{p}^({k})| at n={n}: {closed} (brute force {brute})");
    }
    let big = 1_000_000u64;
    for s in 0..p as i64 {
        let ratio = scaled_count(&card_a(p, s, big)?.count, big, p - 1);
        println!(
            "|A_{p},{s}| / n^{} at n={big}: {ratio:.6}, density {:.6}",
            p - 1,
            irwin_hall_density(p, s as f64)
        );
    }
    Ok(())
}
