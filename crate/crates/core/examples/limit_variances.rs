//! Closed-form limiting variances of the normalized traces, with both
//! readings of the symmetric circulant even-power exponent.
//!
//! cargo run --example limit_variances -- [max_p]

use patterned_rmt::limits::{
    limit_var_circulant, limit_var_reverse_circulant, limit_var_symmetric_circulant_with,
    EvenBranchExponent,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let max_p: u32 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(8);
    println!("p,circulant,reverse_circulant(2p),symmetric_circulant,symmetric_circulant_single");
    for p in 1..=max_p {
        let c = limit_var_circulant(p)?;
        let rc = limit_var_reverse_circulant(p)?;
        let sc = limit_var_symmetric_circulant_with(p, EvenBranchExponent::Doubled)?;
        let sc1 = limit_var_symmetric_circulant_with(p, EvenBranchExponent::Single)?;
        println!("{p},{},{},{},{}", c.exact, rc.exact, sc.exact, sc1.exact);
    }
    Ok(())
}
