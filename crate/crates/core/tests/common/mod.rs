//! Dense reference computations shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use patterned_rmt::MatrixRealization;

/// The matrix assembled entry by entry through the public accessor.
pub fn assemble(real: &MatrixRealization) -> DMatrix<f64> {
    DMatrix::from_fn(real.n, real.n, |i, j| real.entry(i + 1, j + 1).unwrap())
}

/// `Tr(A^p)` by repeated dense multiplication.
pub fn dense_trace_power(real: &MatrixRealization, p: u32) -> f64 {
    let a = assemble(real);
    let mut acc = DMatrix::<f64>::identity(real.n, real.n);
    for _ in 0..p {
        acc = &acc * &a;
    }
    acc.trace()
}

/// `sum_i sigma_i^p`, an upper bound on `|Tr(A^p)|`.
pub fn singular_power_sum(real: &MatrixRealization, p: u32) -> f64 {
    assemble(real)
        .singular_values()
        .iter()
        .map(|s| s.powi(p as i32))
        .sum()
}
