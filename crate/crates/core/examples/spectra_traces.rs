//! Eigenvalues, traces and spectral norms of one realization per ensemble.
//! Traces come from the fast route; the dense eigenvalue sum is shown beside it.
//!
//! cargo run --release --example spectra_traces -- [n] [p]

use patterned_rmt::spectra::{spectral_norm, spectrum, trace_power};
use patterned_rmt::{EnsembleKind, MatrixRealization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(64);
    let p: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    for kind in EnsembleKind::ALL {
        let real = MatrixRealization::sample(kind, n, 11, 0)?;
        let eig = spectrum(&real)?;
        let dense_trace: f64 = eig.eigenvalues.iter().map(|z| z.powu(p).re).sum();
        let trace = trace_power(&real, p)?.value;
        println!(
            "{kind:>20}: Tr(A^{p}) = {trace:.6e} (eigenvalue sum {dense_trace:.6e}), \
             max |lambda| = {:.4}, ||A|| = {:.4}",
            eig.max_modulus(),
            spectral_norm(&real)?
        );
    }
    Ok(())
}
