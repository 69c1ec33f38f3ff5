//! FFT-backed matrix-vector products for the reverse circulant and Hankel
//! patterns, plus the trace and norm routines that only need products.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::ensembles::{EnsembleKind, MatrixRealization};
use crate::error::{Error, Result};

/// `v -> A v` for a symmetric patterned matrix in `O(m log m)` per product.
pub struct StructuredOperator {
    n: usize,
    len: usize,
    // transform of the input sequence, zero padded to `len`
    kernel: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    kind: EnsembleKind,
}

impl StructuredOperator {
    pub fn new(real: &MatrixRealization) -> Result<Self> {
        let n = real.n;
        let len = match real.kind {
            // circular correlation with the input, period n
            EnsembleKind::ReverseCirculant => n,
            // linear correlation of a length-(2n-1) sequence with a length-n vector
            EnsembleKind::Hankel => (3 * n - 2).next_power_of_two(),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no structured product implemented for {other}"
                )))
            }
        };
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut kernel: Vec<Complex64> = real
            .values()
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(len)
            .collect();
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        forward.process_with_scratch(&mut kernel, &mut scratch);
        Ok(StructuredOperator {
            n,
            len,
            kernel,
            forward,
            inverse,
            buf: vec![Complex64::new(0.0, 0.0); len],
            scratch,
            kind: real.kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Writes `A v` into `out`.
    pub fn apply(&mut self, v: &[f64], out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(v.len(), n);
        debug_assert_eq!(out.len(), n);
        self.buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        // reversed copy of v turns correlation into convolution
        match self.kind {
            EnsembleKind::ReverseCirculant => {
                for (j, &x) in v.iter().enumerate() {
                    self.buf[(n - j) % n].re = x;
                }
            }
            _ => {
                for (j, &x) in v.iter().enumerate() {
                    self.buf[n - 1 - j].re = x;
                }
            }
        }
        self.forward
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for (b, k) in self.buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.len as f64;
        let offset = match self.kind {
            EnsembleKind::ReverseCirculant => 0,
            _ => n - 1,
        };
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.buf[i + offset].re * scale;
        }
    }
}

/// `Tr(A^p)` as `sum_j <A^a e_j, A^b e_j>` with `a = p / 2`, `b = p - a`.
pub fn trace_power_matvec(real: &MatrixRealization, p: u32) -> Result<f64> {
    let n = real.n;
    if p == 0 {
        return Ok(n as f64);
    }
    let mut op = StructuredOperator::new(real)?;
    let a = (p / 2) as usize;
    let b = p as usize - a;
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut half = vec![0.0; n];
    let mut total = 0.0;
    for j in 0..n {
        // column j of A is the first product
        for (i, c) in cur.iter_mut().enumerate() {
            *c = real.values()[real.kind.input_index(n, i + 1, j + 1)];
        }
        if a == 0 {
            // p = 1: diagonal entry
            total += cur[j];
            continue;
        }
        if a == 1 {
            half.copy_from_slice(&cur);
        }
        for step in 2..=b {
            op.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            if step == a {
                half.copy_from_slice(&cur);
            }
        }
        total += half.iter().zip(&cur).map(|(x, y)| x * y).sum::<f64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
pub struct PowerIterationOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for PowerIterationOptions {
    fn default() -> Self {
        PowerIterationOptions {
            max_iterations: 10_000,
            tolerance: 1e-6,
        }
    }
}

/// Largest `|eigenvalue|` of a symmetric structured matrix by power iteration
/// from the normalized all-ones vector.
///
/// The estimate `||A v||` with `||v|| = 1` increases towards `|lambda_max|`
/// and is insensitive to a `+/-` tie at the top of the spectrum. Iteration
/// stops once the remaining error, extrapolated from the geometric decay of
/// successive changes, is below `tolerance` relative to the estimate.
pub fn power_iteration_norm(
    real: &MatrixRealization,
    options: PowerIterationOptions,
) -> Result<f64> {
    let n = real.n;
    let mut op = StructuredOperator::new(real)?;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut w = vec![0.0; n];
    let mut estimate = 0.0;
    let mut last_change = f64::INFINITY;
    for _ in 0..options.max_iterations {
        op.apply(&v, &mut w);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        let change = (norm - estimate).abs();
        let rate = (change / last_change).min(1.0);
        let remaining = if rate < 1.0 {
            change * rate / (1.0 - rate)
        } else {
            f64::INFINITY
        };
        if change <= options.tolerance * norm * 1e-3
            || (remaining.max(change) <= options.tolerance * norm)
        {
            return Ok(norm);
        }
        last_change = change;
        estimate = norm;
    }
    Err(Error::Convergence {
        iterations: options.max_iterations,
        best_estimate: estimate,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub max_steps: usize,
    pub tolerance: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_steps: 400,
            tolerance: 1e-6,
        }
    }
}

/// Largest `|eigenvalue|` of a symmetric structured matrix by Lanczos with
/// full reorthogonalization, started from the normalized all-ones vector.
///
/// Stops when the Ritz residual `beta_m |s_m|` of the extreme Ritz value is
/// below `tolerance` relative to it; that residual bounds the distance to an
/// eigenvalue.
pub fn lanczos_norm(real: &MatrixRealization, options: LanczosOptions) -> Result<f64> {
    let n = real.n;
    let mut op = StructuredOperator::new(real)?;
    let steps = options.max_steps.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n]];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut best = 0.0;
    for j in 0..steps {
        op.apply(&basis[j], &mut w);
        alpha.push(dot(&basis[j], &w));
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = dot(&w, &w).sqrt();
        let (theta, last) = extreme_ritz(&alpha, &beta);
        best = theta.abs();
        let scale = alpha.iter().chain(&beta).fold(0.0f64, |m, x| m.max(x.abs()));
        if b <= 1e-12 * scale.max(f64::MIN_POSITIVE) || j + 1 == n {
            // invariant subspace: Ritz values are exact eigenvalues
            return Ok(best);
        }
        if b * last.abs() <= options.tolerance * best {
            return Ok(best);
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::Convergence {
        iterations: steps,
        best_estimate: best,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Ritz value of largest modulus of the tridiagonal `(alpha, beta)` and the
/// last component of its eigenvector.
fn extreme_ritz(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let idx = eig.eigenvalues.iamax();
    (eig.eigenvalues[idx], eig.eigenvectors[(m - 1, idx)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn products_match_dense() {
        for kind in [EnsembleKind::ReverseCirculant, EnsembleKind::Hankel] {
            for n in [1, 2, 3, 7, 16, 33] {
                let real = MatrixRealization::sample(kind, n, 11, n as u64).unwrap();
                let dense = real.dense_matrix().unwrap();
                let mut op = StructuredOperator::new(&real).unwrap();
                let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + 0.1).collect();
                let mut out = vec![0.0; n];
                op.apply(&v, &mut out);
                let expected = &dense * DVector::from_vec(v.clone());
                for i in 0..n {
                    assert!(
                        (out[i] - expected[i]).abs() < 1e-10 * (1.0 + expected[i].abs()),
                        "{kind} n={n} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn circulant_has_no_structured_operator() {
        let real = MatrixRealization::sample(EnsembleKind::Circulant, 4, 1, 0).unwrap();
        assert!(StructuredOperator::new(&real).is_err());
    }

    #[test]
    fn small_hankel_trace() {
        let real =
            MatrixRealization::from_values(EnsembleKind::Hankel, 2, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(trace_power_matvec(&real, 0).unwrap(), 2.0);
        assert!((trace_power_matvec(&real, 1).unwrap() - 4.0).abs() < 1e-12);
        assert!((trace_power_matvec(&real, 2).unwrap() - 18.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_reports_best_estimate() {
        let real = MatrixRealization::sample(EnsembleKind::Hankel, 32, 3, 0).unwrap();
        let err = power_iteration_norm(
            &real,
            PowerIterationOptions {
                max_iterations: 2,
                tolerance: 1e-14,
            },
        )
        .unwrap_err();
        match err {
            Error::Convergence { best_estimate, .. } => assert!(best_estimate > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
