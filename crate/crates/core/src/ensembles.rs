//! The four patterned ensembles and their Gaussian input sequences.
//!
//! Every matrix here is a fixed index map applied to one input sequence.
//! Inputs are stored 0-based regardless of how the mathematical literature
//! labels them:
//!
//! | kind                 | input length   | entry (i, j), 1-based      |
//! |----------------------|----------------|----------------------------|
//! | circulant            | n              | `values[(j - i) mod n]`    |
//! | symmetric circulant  | floor(n/2) + 1 | `values[min(d, n - d)]`, d = abs(i - j) |
//! | reverse circulant    | n              | `values[(i + j - 2) mod n]`|
//! | Hankel               | 2n - 1         | `values[i + j - 2]`        |
//!
//! For the reverse circulant and Hankel patterns `values[t]` holds the
//! element usually written `x_{t+1}`, so `values[n - 1]` plays the role of
//! both `x_n` and `x_0` in the reverse circulant.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension [`MatrixRealization::dense_matrix`] will materialize.
pub const DENSE_LIMIT: usize = 4096;

/// Largest dimension for which the n^4 covariance enumeration is attempted.
pub const COVARIANCE_ENUMERATION_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Circulant,
    SymmetricCirculant,
    ReverseCirculant,
    Hankel,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 4] = [
        EnsembleKind::Circulant,
        EnsembleKind::SymmetricCirculant,
        EnsembleKind::ReverseCirculant,
        EnsembleKind::Hankel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::Circulant => "circulant",
            EnsembleKind::SymmetricCirculant => "symmetric-circulant",
            EnsembleKind::ReverseCirculant => "reverse-circulant",
            EnsembleKind::Hankel => "hankel",
        }
    }

    pub fn is_symmetric(self) -> bool {
        !matches!(self, EnsembleKind::Circulant)
    }

    /// Number of Gaussian draws needed to build an `n x n` realization.
    pub fn required_input_length(self, n: usize) -> usize {
        match self {
            EnsembleKind::Circulant | EnsembleKind::ReverseCirculant => n,
            EnsembleKind::SymmetricCirculant => n / 2 + 1,
            EnsembleKind::Hankel => 2 * n - 1,
        }
    }

    /// 0-based input index of entry `(i, j)`, with `i, j` 1-based.
    ///
    /// Callers guarantee `1 <= i, j <= n`.
    #[inline]
    pub fn input_index(self, n: usize, i: usize, j: usize) -> usize {
        match self {
            EnsembleKind::Circulant => (j + n - i) % n,
            EnsembleKind::SymmetricCirculant => {
                let d = i.abs_diff(j);
                d.min(n - d)
            }
            EnsembleKind::ReverseCirculant => (i + j - 2) % n,
            EnsembleKind::Hankel => i + j - 2,
        }
    }

    /// Gershgorin constant `c` in `max row sum of the entry covariance <= c * n`.
    pub fn covariance_constant(self) -> usize {
        match self {
            EnsembleKind::SymmetricCirculant => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "circulant" | "c" => Ok(EnsembleKind::Circulant),
            "symmetric-circulant" | "sc" => Ok(EnsembleKind::SymmetricCirculant),
            "reverse-circulant" | "rc" => Ok(EnsembleKind::ReverseCirculant),
            "hankel" | "h" => Ok(EnsembleKind::Hankel),
            other => Err(Error::Usage(format!("unknown ensemble kind '{other}'"))),
        }
    }
}

/// Deterministic Gaussian stream for `(seed, stream)`.
///
/// Each replicate of an experiment uses its own stream id, so replicate `r`
/// can be regenerated without touching any other replicate.
pub fn gaussian_stream(seed: u64, stream: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    std::iter::repeat_with(move || StandardNormal.sample(&mut rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSequence {
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl InputSequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Wraps explicit values; seed and stream are recorded as zero.
    pub fn from_values(values: Vec<f64>) -> Self {
        InputSequence {
            values,
            seed: 0,
            stream: 0,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        InputSequence {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }
}

/// Draws the input sequence for an `n x n` realization of `kind` from stream 0.
pub fn sample_input(kind: EnsembleKind, n: usize, seed: u64) -> Result<InputSequence> {
    sample_input_stream(kind, n, seed, 0)
}

pub fn sample_input_stream(
    kind: EnsembleKind,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<InputSequence> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let len = kind.required_input_length(n);
    Ok(InputSequence {
        values: gaussian_stream(seed, stream).take(len).collect(),
        seed,
        stream,
    })
}

/// One sampled matrix. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRealization {
    pub kind: EnsembleKind,
    pub n: usize,
    pub input: InputSequence,
}

impl MatrixRealization {
    pub fn new(kind: EnsembleKind, n: usize, input: InputSequence) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        let expected = kind.required_input_length(n);
        if input.len() != expected {
            return Err(Error::Shape {
                expected,
                actual: input.len(),
            });
        }
        Ok(MatrixRealization { kind, n, input })
    }

    pub fn from_values(kind: EnsembleKind, n: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(kind, n, InputSequence::from_values(values))
    }

    pub fn sample(kind: EnsembleKind, n: usize, seed: u64, stream: u64) -> Result<Self> {
        let input = sample_input_stream(kind, n, seed, stream)?;
        Self::new(kind, n, input)
    }

    pub fn values(&self) -> &[f64] {
        &self.input.values
    }

    /// Entry `(i, j)` with 1-based indices.
    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || j == 0 || i > self.n || j > self.n {
            return Err(Error::Index { i, j, n: self.n });
        }
        Ok(self.input.values[self.kind.input_index(self.n, i, j)])
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        self.dense_matrix_with_limit(DENSE_LIMIT)
    }

    pub fn dense_matrix_with_limit(&self, limit: usize) -> Result<DMatrix<f64>> {
        if self.n > limit {
            return Err(Error::Resource(format!(
                "dense {n}x{n} matrix exceeds limit {limit}",
                n = self.n
            )));
        }
        let (n, kind, v) = (self.n, self.kind, &self.input.values);
        Ok(DMatrix::from_fn(n, n, |r, c| v[kind.input_index(n, r + 1, c + 1)]))
    }

    /// Row-major CSV dump of the dense matrix, full round-trip precision.
    pub fn to_csv(&self) -> Result<String> {
        let m = self.dense_matrix()?;
        let mut out = String::with_capacity(self.n * self.n * 20);
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|c| format!("{:?}", m[(r, c)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    /// `{kind, n, seed, values}` JSON dump.
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Dump<'a> {
            kind: EnsembleKind,
            n: usize,
            seed: u64,
            values: &'a [f64],
        }
        Ok(serde_json::to_string(&Dump {
            kind: self.kind,
            n: self.n,
            seed: self.input.seed,
            values: &self.input.values,
        })?)
    }

    /// The `2n x 2n` reverse circulant whose leading `n x n` block is this
    /// Hankel matrix. The one input slot the block never touches is zero.
    pub fn hankel_embedding(&self) -> Result<MatrixRealization> {
        if self.kind != EnsembleKind::Hankel {
            return Err(Error::InvalidArgument(
                "reverse circulant embedding is defined for Hankel realizations".into(),
            ));
        }
        let mut values = self.input.values.clone();
        values.push(0.0);
        MatrixRealization::new(
            EnsembleKind::ReverseCirculant,
            2 * self.n,
            InputSequence {
                values,
                ..self.input.clone()
            },
        )
    }
}

/// Covariance of the vectorized entries: `sigma(ij, kl)` is 1 when the two
/// entries read the same input variable and 0 otherwise.
///
/// The indicator is written in the explicit per-pattern form (shift
/// differences, index sums, folded distances) rather than through
/// [`EnsembleKind::input_index`], so the two can be checked against each other.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceStructure {
    pub kind: EnsembleKind,
    pub n: usize,
}

impl CovarianceStructure {
    pub fn new(kind: EnsembleKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        Ok(CovarianceStructure { kind, n })
    }

    /// `sigma(ij, kl)` with 1-based indices.
    pub fn sigma(&self, i: usize, j: usize, k: usize, l: usize) -> u8 {
        let n = self.n as i64;
        let (i, j, k, l) = (i as i64, j as i64, k as i64, l as i64);
        let hit = match self.kind {
            EnsembleKind::Circulant => (j - i).rem_euclid(n) == (l - k).rem_euclid(n),
            EnsembleKind::ReverseCirculant => (i + j).rem_euclid(n) == (k + l).rem_euclid(n),
            EnsembleKind::Hankel => i + j == k + l,
            // |n/2 - |i-j|| compared after doubling, exact for odd n
            EnsembleKind::SymmetricCirculant => {
                (n - 2 * (i - j).abs()).abs() == (n - 2 * (k - l).abs()).abs()
            }
        };
        hit as u8
    }

    pub fn row_sum(&self, i: usize, j: usize) -> u64 {
        let mut total = 0u64;
        for k in 1..=self.n {
            for l in 1..=self.n {
                total += self.sigma(i, j, k, l) as u64;
            }
        }
        total
    }
}

/// Maximum absolute row sum of the entry covariance matrix, by enumeration.
pub fn covariance_row_sum_max(kind: EnsembleKind, n: usize) -> Result<u64> {
    if n > COVARIANCE_ENUMERATION_LIMIT {
        return Err(Error::Resource(format!(
            "covariance enumeration needs n <= {COVARIANCE_ENUMERATION_LIMIT}, got {n}"
        )));
    }
    let cov = CovarianceStructure::new(kind, n)?;
    let mut best = 0;
    for i in 1..=n {
        for j in 1..=n {
            best = best.max(cov.row_sum(i, j));
        }
    }
    Ok(best)
}

/// Empirical covariance of the vectorized (row-major) entries over
/// `replicates` realizations drawn from streams `0..replicates`.
pub fn empirical_entry_covariance(
    kind: EnsembleKind,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if replicates < 2 {
        return Err(Error::DegenerateStatistics(
            "need at least two replicates".into(),
        ));
    }
    let dim = n * n;
    let mut sum = vec![0.0; dim];
    let mut cross = DMatrix::<f64>::zeros(dim, dim);
    let mut entries = vec![0.0; dim];
    for r in 0..replicates {
        let real = MatrixRealization::sample(kind, n, seed, r as u64)?;
        for a in 0..dim {
            entries[a] = real.values()[kind.input_index(n, a / n + 1, a % n + 1)];
            sum[a] += entries[a];
        }
        for a in 0..dim {
            for b in a..dim {
                cross[(a, b)] += entries[a] * entries[b];
            }
        }
    }
    let m = replicates as f64;
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for a in 0..dim {
        for b in a..dim {
            let c = (cross[(a, b)] - sum[a] * sum[b] / m) / (m - 1.0);
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_lengths() {
        assert_eq!(sample_input(EnsembleKind::Circulant, 4, 3).unwrap().len(), 4);
        assert_eq!(sample_input(EnsembleKind::Hankel, 4, 3).unwrap().len(), 7);
        assert_eq!(
            sample_input(EnsembleKind::SymmetricCirculant, 5, 3).unwrap().len(),
            3
        );
        assert_eq!(
            sample_input(EnsembleKind::ReverseCirculant, 6, 3).unwrap().len(),
            6
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_input(EnsembleKind::Circulant, 4, 99).unwrap();
        let b = sample_input(EnsembleKind::Circulant, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_input_stream(EnsembleKind::Circulant, 4, 99, 1).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            sample_input(EnsembleKind::Hankel, 0, 1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn long_stream_is_standard_normal() {
        let n = 1_000_000;
        let xs: Vec<f64> = gaussian_stream(2024, 0).take(n).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // sd of the mean is 1e-3, sd of the variance is sqrt(2)*1e-3
        assert!(mean.abs() < 5e-3, "mean {mean}");
        assert!((var - 1.0).abs() < 5.0 * 1.5e-3, "var {var}");
    }

    #[test]
    fn circulant_entries_follow_right_shift() {
        let r = MatrixRealization::from_values(EnsembleKind::Circulant, 3, vec![1.0, 2.0, 3.0])
            .unwrap();
        assert_eq!(r.entry(1, 1).unwrap(), 1.0);
        assert_eq!(r.entry(1, 2).unwrap(), 2.0);
        assert_eq!(r.entry(2, 1).unwrap(), 3.0);
        assert!(matches!(r.entry(0, 1), Err(Error::Index { .. })));
        assert!(matches!(r.entry(1, 4), Err(Error::Index { .. })));
    }

    #[test]
    fn symmetric_circulant_corner() {
        let r = MatrixRealization::from_values(
            EnsembleKind::SymmetricCirculant,
            5,
            vec![10.0, 11.0, 12.0],
        )
        .unwrap();
        assert_eq!(r.entry(1, 5).unwrap(), 11.0);
        assert_eq!(r.entry(1, 3).unwrap(), 12.0);
        assert_eq!(r.entry(1, 4).unwrap(), 12.0);
    }

    #[test]
    fn hankel_bottom_right() {
        let r = MatrixRealization::from_values(
            EnsembleKind::Hankel,
            3,
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
        )
        .unwrap();
        assert_eq!(r.entry(3, 3).unwrap(), 5.0);
        assert_eq!(r.entry(1, 3).unwrap(), 3.0);
    }

    #[test]
    fn small_dense_matrices() {
        let one = MatrixRealization::from_values(EnsembleKind::Circulant, 1, vec![7.5]).unwrap();
        assert_eq!(one.dense_matrix().unwrap(), DMatrix::from_element(1, 1, 7.5));
        let rc = MatrixRealization::from_values(EnsembleKind::ReverseCirculant, 2, vec![1.0, 2.0])
            .unwrap();
        assert_eq!(
            rc.dense_matrix().unwrap(),
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])
        );
        let rc4 = MatrixRealization::from_values(
            EnsembleKind::ReverseCirculant,
            4,
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        // rows are successive left shifts of (x1, x2, x3, x4)
        assert_eq!(
            rc4.dense_matrix().unwrap(),
            DMatrix::from_row_slice(
                4,
                4,
                &[1., 2., 3., 4., 2., 3., 4., 1., 3., 4., 1., 2., 4., 1., 2., 3.]
            )
        );
    }

    #[test]
    fn symmetric_kinds_are_symmetric() {
        for kind in EnsembleKind::ALL.into_iter().filter(|k| k.is_symmetric()) {
            for n in [1, 2, 5, 8] {
                let m = MatrixRealization::sample(kind, n, 5, 0)
                    .unwrap()
                    .dense_matrix()
                    .unwrap();
                assert_eq!(m, m.transpose(), "{kind} n={n}");
            }
        }
    }

    #[test]
    fn dense_limit_enforced() {
        let r = MatrixRealization::sample(EnsembleKind::Circulant, 10, 1, 0).unwrap();
        assert!(matches!(
            r.dense_matrix_with_limit(8),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn wrong_input_length_rejected() {
        assert!(matches!(
            MatrixRealization::from_values(EnsembleKind::Hankel, 3, vec![0.0; 4]),
            Err(Error::Shape {
                expected: 5,
                actual: 4
            })
        ));
    }

    #[test]
    fn entry_maps_are_periodic() {
        for n in 1..=16 {
            for i in 1..=n {
                for j in 1..=n {
                    let c = EnsembleKind::Circulant.input_index(n, i, j);
                    let c_next = EnsembleKind::Circulant.input_index(n, i % n + 1, j % n + 1);
                    assert_eq!(c, c_next);
                    let rc = EnsembleKind::ReverseCirculant.input_index(n, i, j);
                    assert_eq!(rc, (i + j - 2) % n);
                    if j < n {
                        // reverse circulant rows are left shifts
                        let below =
                            EnsembleKind::ReverseCirculant.input_index(n, i % n + 1, j);
                        assert_eq!(below, EnsembleKind::ReverseCirculant.input_index(n, i, j + 1));
                    }
                    let sc = EnsembleKind::SymmetricCirculant.input_index(n, i, j);
                    assert!(sc <= n / 2);
                    assert_eq!(
                        sc,
                        EnsembleKind::SymmetricCirculant.input_index(n, i % n + 1, j % n + 1)
                    );
                }
            }
        }
    }

    #[test]
    fn indicator_matches_input_index_equality() {
        for kind in EnsembleKind::ALL {
            for n in 1..=9 {
                let cov = CovarianceStructure::new(kind, n).unwrap();
                for i in 1..=n {
                    for j in 1..=n {
                        for k in 1..=n {
                            for l in 1..=n {
                                let same = kind.input_index(n, i, j) == kind.input_index(n, k, l);
                                assert_eq!(cov.sigma(i, j, k, l), same as u8, "{kind} n={n}");
                                assert_eq!(cov.sigma(i, j, k, l), cov.sigma(k, l, i, j));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn covariance_row_sums() {
        assert!(covariance_row_sum_max(EnsembleKind::Circulant, 8).unwrap() <= 8);
        assert!(covariance_row_sum_max(EnsembleKind::SymmetricCirculant, 8).unwrap() <= 16);
        assert_eq!(covariance_row_sum_max(EnsembleKind::Hankel, 1).unwrap(), 1);
        assert!(matches!(
            covariance_row_sum_max(EnsembleKind::Hankel, 65),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn empirical_covariance_matches_structure() {
        for kind in EnsembleKind::ALL {
            for n in [3, 4] {
                let emp = empirical_entry_covariance(kind, n, 100_000, 17).unwrap();
                let cov = CovarianceStructure::new(kind, n).unwrap();
                for a in 0..n * n {
                    for b in 0..n * n {
                        let expected =
                            cov.sigma(a / n + 1, a % n + 1, b / n + 1, b % n + 1) as f64;
                        assert!(
                            (emp[(a, b)] - expected).abs() < 0.05,
                            "{kind} n={n} ({a},{b}) {} vs {expected}",
                            emp[(a, b)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dumps() {
        let r = MatrixRealization::from_values(EnsembleKind::Circulant, 2, vec![0.5, -1.25])
            .unwrap();
        assert_eq!(r.to_csv().unwrap(), "0.5,-1.25\n-1.25,0.5\n");
        assert_eq!(
            r.to_json().unwrap(),
            r#"{"kind":"circulant","n":2,"seed":0,"values":[0.5,-1.25]}"#
        );
    }

    #[test]
    fn kind_parsing() {
        for kind in EnsembleKind::ALL {
            assert_eq!(kind.as_str().parse::<EnsembleKind>().unwrap(), kind);
        }
        assert!(matches!("toeplitz".parse::<EnsembleKind>(), Err(Error::Usage(_))));
    }

    fn kind_strategy() -> impl proptest::strategy::Strategy<Value = EnsembleKind> {
        proptest::sample::select(EnsembleKind::ALL.to_vec())
    }

    proptest::proptest! {
        #[test]
        fn entries_read_their_input(kind in kind_strategy(), n in 1usize..24, seed in 0u64..1000) {
            let real = MatrixRealization::sample(kind, n, seed, 0).unwrap();
            let dense = real.dense_matrix().unwrap();
            for i in 1..=n {
                for j in 1..=n {
                    let idx = kind.input_index(n, i, j);
                    proptest::prop_assert!(idx < kind.required_input_length(n));
                    proptest::prop_assert_eq!(dense[(i - 1, j - 1)], real.values()[idx]);
                    if kind.is_symmetric() {
                        proptest::prop_assert_eq!(dense[(i - 1, j - 1)], dense[(j - 1, i - 1)]);
                    }
                }
            }
        }
    }
}
