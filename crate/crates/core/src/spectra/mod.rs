//! Eigenvalues, traces of powers and spectral norms.
//!
//! The circulant eigenvalues are `lambda_k = sum_j x_j exp(i 2 pi k j / n)`
//! for `k = 1..n`, i.e. an unnormalized inverse DFT of the input. The
//! symmetric circulant is the circulant of the folded sequence
//! `x_{min(j, n-j)}`, so its eigenvalues are the real cosine sums
//! `x_0 + 2 sum_j x_j cos(w_k j)` (plus `(-1)^k x_{n/2}` for even `n`).
//! The reverse circulant shares `|lambda_k|` with the circulant of the same
//! input, which covers its even powers and its norm. Everything else
//! (reverse circulant odd powers, Hankel) goes through FFT-backed
//! matrix-vector products or a dense symmetric eigensolve.

mod structured;

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleKind, InputSequence, MatrixRealization};
use crate::error::{Error, Result};

pub use structured::{
    lanczos_norm, power_iteration_norm, trace_power_matvec, LanczosOptions,
    PowerIterationOptions, StructuredOperator,
};

/// Relative size of the imaginary part tolerated before a complex trace is
/// reported as real.
pub const IMAGINARY_RESIDUAL_TOLERANCE: f64 = 1e-6;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub kind: EnsembleKind,
    pub n: usize,
    /// `eigenvalues[k - 1]` is `lambda_k`; for the dense fallback the
    /// eigenvalues are sorted ascending and carry no frequency.
    pub eigenvalues: Vec<Complex64>,
    /// `w_k = 2 pi k / n`, present for the Fourier-diagonalized kinds.
    pub frequencies: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct EigenRecord {
    k: usize,
    re: f64,
    im: f64,
}

impl Spectrum {
    fn fourier(kind: EnsembleKind, n: usize, eigenvalues: Vec<Complex64>) -> Self {
        let frequencies = (1..=n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        Spectrum {
            kind,
            n,
            eigenvalues,
            frequencies: Some(frequencies),
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    /// JSON array of `{k, re, im}`.
    pub fn to_json(&self) -> Result<String> {
        let records: Vec<EigenRecord> = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, z)| EigenRecord {
                k: i + 1,
                re: z.re,
                im: z.im,
            })
            .collect();
        Ok(serde_json::to_string(&records)?)
    }
}

/// `Tr(A^p)` of the raw (unnormalized) matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub kind: EnsembleKind,
    pub n: usize,
    pub p: u32,
    pub value: f64,
}

fn check_len(input: &InputSequence, expected: usize) -> Result<()> {
    if input.len() != expected {
        return Err(Error::Shape {
            expected,
            actual: input.len(),
        });
    }
    Ok(())
}

/// Unnormalized inverse DFT, rotated so that entry `k - 1` holds frequency `k`.
fn fourier_eigenvalues(coefficients: &[f64]) -> Vec<Complex64> {
    let n = coefficients.len();
    let mut buf: Vec<Complex64> = coefficients
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    fft.process(&mut buf);
    buf.rotate_left(1 % n.max(1));
    buf
}

pub fn circulant_spectrum(input: &InputSequence, n: usize) -> Result<Spectrum> {
    check_len(input, n)?;
    Ok(Spectrum::fourier(
        EnsembleKind::Circulant,
        n,
        fourier_eigenvalues(&input.values),
    ))
}

/// `O(n^2)` evaluation of the defining sum, for cross-checking the FFT path.
pub fn circulant_spectrum_direct(input: &InputSequence, n: usize) -> Result<Spectrum> {
    check_len(input, n)?;
    let eigenvalues = (1..=n)
        .map(|k| {
            input
                .values
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    // reduce k*j mod n before scaling to keep the angle small
                    let angle = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                    Complex64::new(x * angle.cos(), x * angle.sin())
                })
                .sum()
        })
        .collect();
    Ok(Spectrum::fourier(EnsembleKind::Circulant, n, eigenvalues))
}

/// First row of the symmetric circulant: `x_{min(j, n - j)}`.
fn folded_row(input: &InputSequence, n: usize) -> Vec<f64> {
    (0..n).map(|j| input.values[j.min(n - j)]).collect()
}

pub fn symmetric_circulant_spectrum(input: &InputSequence, n: usize) -> Result<Spectrum> {
    check_len(input, n / 2 + 1)?;
    let eigenvalues = fourier_eigenvalues(&folded_row(input, n))
        .into_iter()
        .map(|z| Complex64::new(z.re, 0.0))
        .collect();
    Ok(Spectrum::fourier(
        EnsembleKind::SymmetricCirculant,
        n,
        eigenvalues,
    ))
}

/// The cosine-sum formulas evaluated term by term.
pub fn symmetric_circulant_spectrum_direct(input: &InputSequence, n: usize) -> Result<Spectrum> {
    check_len(input, n / 2 + 1)?;
    let x = &input.values;
    let half = n / 2;
    let eigenvalues = (1..=n)
        .map(|k| {
            let cos_term = |j: usize| {
                let angle = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                angle.cos()
            };
            let value = if n % 2 == 1 {
                x[0] + 2.0 * (1..=half).map(|j| x[j] * cos_term(j)).sum::<f64>()
            } else {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                x[0] + 2.0 * (1..half).map(|j| x[j] * cos_term(j)).sum::<f64>() + sign * x[half]
            };
            Complex64::new(value, 0.0)
        })
        .collect();
    Ok(Spectrum::fourier(
        EnsembleKind::SymmetricCirculant,
        n,
        eigenvalues,
    ))
}

/// Real eigenvalues of a symmetric realization from a dense eigensolve.
pub fn dense_symmetric_eigenvalues(real: &MatrixRealization) -> Result<Vec<f64>> {
    if !real.kind.is_symmetric() {
        return Err(Error::InvalidArgument(format!(
            "{} is not symmetric",
            real.kind
        )));
    }
    let dense = real.dense_matrix()?;
    let mut eig: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Spectrum of any realization: Fourier formulas where they exist, a dense
/// symmetric eigensolve otherwise.
pub fn spectrum(real: &MatrixRealization) -> Result<Spectrum> {
    match real.kind {
        EnsembleKind::Circulant => circulant_spectrum(&real.input, real.n),
        EnsembleKind::SymmetricCirculant => symmetric_circulant_spectrum(&real.input, real.n),
        EnsembleKind::ReverseCirculant | EnsembleKind::Hankel => Ok(Spectrum {
            kind: real.kind,
            n: real.n,
            eigenvalues: dense_symmetric_eigenvalues(real)?
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect(),
            frequencies: None,
        }),
    }
}

/// How to evaluate traces of symmetric kinds that have no eigenvalue formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetricTraceMethod {
    /// Sum of `lambda^p` over a dense symmetric eigendecomposition.
    DenseEigen,
    /// `p - 1` FFT-backed products per basis vector (at most `ceil(p/2)` of them).
    #[default]
    StructuredMatvec,
}

fn complex_trace(eigenvalues: &[Complex64], p: u32) -> Result<f64> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for z in eigenvalues {
        let w = z.powu(p);
        scale += w.norm();
        total += w;
    }
    if total.im.abs() > IMAGINARY_RESIDUAL_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ImaginaryResidual {
            residual: total.im.abs(),
            scale,
        });
    }
    Ok(total.re)
}

pub fn trace_power(real: &MatrixRealization, p: u32) -> Result<TraceSample> {
    trace_power_with(real, p, SymmetricTraceMethod::default())
}

/// `Tr(A^p)`, choosing the cheapest exact route for the kind and parity.
///
/// `method` is only consulted for reverse circulant odd powers and Hankel.
pub fn trace_power_with(
    real: &MatrixRealization,
    p: u32,
    method: SymmetricTraceMethod,
) -> Result<TraceSample> {
    let n = real.n;
    let value = if p == 0 {
        n as f64
    } else {
        match real.kind {
            EnsembleKind::Circulant => {
                complex_trace(&circulant_spectrum(&real.input, n)?.eigenvalues, p)?
            }
            EnsembleKind::SymmetricCirculant => symmetric_circulant_spectrum(&real.input, n)?
                .eigenvalues
                .iter()
                .map(|z| z.re.powi(p as i32))
                .sum(),
            EnsembleKind::ReverseCirculant if p.is_multiple_of(2) => {
                circulant_spectrum(&real.input, n)?
                    .eigenvalues
                    .iter()
                    .map(|z| z.norm_sqr().powi(p as i32 / 2))
                    .sum()
            }
            EnsembleKind::ReverseCirculant | EnsembleKind::Hankel => {
                symmetric_trace_numeric(real, p, method)?
            }
        }
    };
    Ok(TraceSample {
        kind: real.kind,
        n,
        p,
        value,
    })
}

/// Trace of a power of any symmetric kind by a purely numerical route.
pub fn symmetric_trace_numeric(
    real: &MatrixRealization,
    p: u32,
    method: SymmetricTraceMethod,
) -> Result<f64> {
    match (method, real.kind) {
        (_, EnsembleKind::Circulant) => Err(Error::InvalidArgument(
            "circulant matrices are not symmetric".into(),
        )),
        (SymmetricTraceMethod::DenseEigen, _) => Ok(dense_symmetric_eigenvalues(real)?
            .iter()
            .map(|x| x.powi(p as i32))
            .sum()),
        // no structured product for the symmetric circulant
        (SymmetricTraceMethod::StructuredMatvec, EnsembleKind::SymmetricCirculant) => {
            symmetric_trace_numeric(real, p, SymmetricTraceMethod::DenseEigen)
        }
        (SymmetricTraceMethod::StructuredMatvec, _) => trace_power_matvec(real, p),
    }
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(real: &MatrixRealization) -> Result<f64> {
    spectral_norm_with(real, LanczosOptions::default())
}

/// Fourier formulas for the circulant family, Lanczos for Hankel.
pub fn spectral_norm_with(real: &MatrixRealization, options: LanczosOptions) -> Result<f64> {
    match real.kind {
        EnsembleKind::Circulant | EnsembleKind::ReverseCirculant => {
            Ok(circulant_spectrum(&real.input, real.n)?.max_modulus())
        }
        EnsembleKind::SymmetricCirculant => {
            Ok(symmetric_circulant_spectrum(&real.input, real.n)?.max_modulus())
        }
        EnsembleKind::Hankel => lanczos_norm(real, options),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormScanRow {
    pub n: usize,
    pub replicate_count: usize,
    pub mean_norm: f64,
    /// `mean_norm / sqrt(n ln n)`
    pub ratio: f64,
}

/// Stream id of replicate `r` at dimension `n` in a norm scan.
pub fn norm_scan_stream(n: usize, r: usize) -> u64 {
    ((n as u64) << 32) | r as u64
}

/// Mean spectral norm over seeded replicates for each dimension, sorted by `n`.
pub fn norm_scan(
    kind: EnsembleKind,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<Vec<NormScanRow>> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be positive".into()));
    }
    if let Some(&bad) = n_grid.iter().find(|&&n| n < 3) {
        return Err(Error::InvalidArgument(format!(
            "norm scan needs n >= 3 so that ln n > 1, got {bad}"
        )));
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let cells: Vec<(usize, usize)> = grid
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();
    let norms = cells
        .par_iter()
        .map(|&(n, r)| {
            let real = MatrixRealization::sample(kind, n, seed, norm_scan_stream(n, r))?;
            spectral_norm(&real)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(grid
        .iter()
        .zip(norms.chunks(replicates))
        .map(|(&n, chunk)| {
            let mean_norm = chunk.iter().sum::<f64>() / replicates as f64;
            let nf = n as f64;
            NormScanRow {
                n,
                replicate_count: replicates,
                mean_norm,
                ratio: mean_norm / (nf * nf.ln()).sqrt(),
            }
        })
        .collect())
}

pub fn norm_scan_csv(rows: &[NormScanRow]) -> String {
    let mut out = String::from("n,replicate_count,mean_norm,ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:?},{:?}\n",
            r.n, r.replicate_count, r.mean_norm, r.ratio
        ));
    }
    out
}
