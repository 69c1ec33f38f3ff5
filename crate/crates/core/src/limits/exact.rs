//! Exact mean and variance of `Tr(A^p)` for Gaussian input.
//!
//! The trace is expanded into a polynomial with integer coefficients in the
//! input variables. Rewriting every monomial in probabilists' Hermite
//! polynomials, `x^m = sum_j m! / (2^j j! (m-2j)!) He_{m-2j}(x)`, makes the
//! terms orthogonal: with `T = sum_alpha c_alpha He_alpha` the mean is `c_0`
//! and the variance is `sum_{alpha != 0} c_alpha^2 alpha!`.

use std::collections::HashMap;

use crate::ensembles::EnsembleKind;
use crate::error::{Error, Result};

/// Upper bound on enumerated index tuples.
pub const EXACT_VARIANCE_BUDGET: f64 = 1e8;

const MAX_DEGREE: u32 = 8;
const SLOT_BITS: u32 = 16;

/// Monomial key: up to eight input indices, sorted, each stored as `index + 1`
/// in a 16-bit slot (zero slots are empty).
type Monomial = u128;

/// Polynomial in the input variables with exact integer coefficients.
pub type TracePolynomial = HashMap<Monomial, i128>;

/// How the index tuples of the trace are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceExpansion {
    /// Closed walks `i_1 -> ... -> i_p -> i_1` over matrix entries; any kind.
    ClosedWalk,
    /// Frequencies `f_1..f_p` with `sum f = 0 (mod n)`, weight `n`; circulant
    /// and symmetric circulant.
    Frequency,
    /// Alternating tuples `sum (-1)^k i_k = 0 (mod n)`, weight `n`; reverse
    /// circulant, even powers.
    Alternating,
}

impl TraceExpansion {
    pub fn preferred(kind: EnsembleKind, p: u32) -> Self {
        match kind {
            EnsembleKind::Circulant | EnsembleKind::SymmetricCirculant => TraceExpansion::Frequency,
            EnsembleKind::ReverseCirculant if p.is_multiple_of(2) => TraceExpansion::Alternating,
            _ => TraceExpansion::ClosedWalk,
        }
    }

    fn free_indices(self, p: u32) -> u32 {
        match self {
            TraceExpansion::ClosedWalk => p,
            _ => p - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactMoments {
    pub mean: i128,
    pub variance: i128,
}

fn pack(indices: &mut [usize]) -> Monomial {
    indices.sort_unstable();
    indices
        .iter()
        .fold(0u128, |key, &i| (key << SLOT_BITS) | (i as u128 + 1))
}

/// `(index, multiplicity)` groups of a key.
fn unpack(mut key: Monomial) -> Vec<(u16, u32)> {
    let mut groups: Vec<(u16, u32)> = Vec::new();
    while key != 0 {
        let slot = (key & 0xffff) as u16;
        key >>= SLOT_BITS;
        match groups.last_mut() {
            Some((idx, m)) if *idx == slot => *m += 1,
            _ => groups.push((slot, 1)),
        }
    }
    groups
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Expands `Tr(A^p)` for the `n x n` matrix of `kind` as a polynomial in the
/// input sequence.
pub fn trace_polynomial(
    kind: EnsembleKind,
    n: usize,
    p: u32,
    expansion: TraceExpansion,
) -> Result<TracePolynomial> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    if p == 0 || p > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "exact expansion supports 1 <= p <= {MAX_DEGREE}, got {p}"
        )));
    }
    let applicable = match expansion {
        TraceExpansion::ClosedWalk => true,
        TraceExpansion::Frequency => matches!(
            kind,
            EnsembleKind::Circulant | EnsembleKind::SymmetricCirculant
        ),
        TraceExpansion::Alternating => kind == EnsembleKind::ReverseCirculant && p.is_multiple_of(2),
    };
    if !applicable {
        return Err(Error::InvalidArgument(format!(
            "{expansion:?} expansion does not apply to {kind} with p = {p}"
        )));
    }
    let free = expansion.free_indices(p);
    let tuples = (n as f64).powi(free as i32);
    if tuples > EXACT_VARIANCE_BUDGET {
        return Err(Error::Resource(format!(
            "exact expansion needs {tuples:e} tuples, budget is {EXACT_VARIANCE_BUDGET:e}"
        )));
    }
    let p = p as usize;
    let mut poly = TracePolynomial::new();
    let mut digits = vec![0usize; free as usize];
    let mut atoms = vec![0usize; p];
    loop {
        let weight = match expansion {
            TraceExpansion::ClosedWalk => {
                for t in 0..p {
                    let (i, j) = (digits[t], digits[(t + 1) % p]);
                    atoms[t] = kind.input_index(n, i + 1, j + 1);
                }
                1
            }
            TraceExpansion::Frequency => {
                let partial: usize = digits.iter().sum();
                for (a, &f) in atoms.iter_mut().zip(&digits) {
                    *a = f;
                }
                atoms[p - 1] = (n - partial % n) % n;
                if kind == EnsembleKind::SymmetricCirculant {
                    for a in atoms.iter_mut() {
                        *a = (*a).min(n - *a);
                    }
                }
                n as i128
            }
            TraceExpansion::Alternating => {
                // labels in 0..n stand for residues; x_0 is stored last
                let mut signed = 0i64;
                for (t, &i) in digits.iter().enumerate() {
                    atoms[t] = i;
                    signed += if t % 2 == 0 { -(i as i64) } else { i as i64 };
                }
                // the last position carries a plus sign
                atoms[p - 1] = (-signed).rem_euclid(n as i64) as usize;
                for a in atoms.iter_mut() {
                    *a = (*a + n - 1) % n;
                }
                n as i128
            }
        };
        *poly.entry(pack(&mut atoms)).or_insert(0) += weight;
        if !odometer(&mut digits, n) {
            break;
        }
    }
    poly.retain(|_, c| *c != 0);
    Ok(poly)
}

fn checked(v: Option<i128>) -> Result<i128> {
    v.ok_or_else(|| Error::Resource("exact moment arithmetic overflowed i128".into()))
}

/// `m! / (2^j j! (m-2j)!)`: pairings leaving `m - 2j` points unmatched.
fn hermite_weight(m: u32, j: u32) -> i128 {
    let mut w: i128 = 1;
    for t in (m - 2 * j + 1)..=m {
        w *= t as i128;
    }
    for t in 1..=j {
        w /= 2 * t as i128;
    }
    w
}

fn factorial_i128(m: u32) -> i128 {
    (1..=m as i128).product()
}

/// Mean and variance of a Gaussian polynomial.
pub fn polynomial_moments(poly: &TracePolynomial) -> Result<ExactMoments> {
    let mut hermite: HashMap<Monomial, i128> = HashMap::new();
    for (&key, &coef) in poly {
        let groups = unpack(key);
        let mut choice = vec![0u32; groups.len()];
        loop {
            let mut c = coef;
            let mut out: Vec<usize> = Vec::new();
            for (&(idx, m), &j) in groups.iter().zip(&choice) {
                c = checked(c.checked_mul(hermite_weight(m, j)))?;
                out.extend(std::iter::repeat_n(idx as usize - 1, (m - 2 * j) as usize));
            }
            let slot = hermite.entry(pack(&mut out)).or_insert(0);
            *slot = checked(slot.checked_add(c))?;
            // next choice of pairings per group
            let mut advanced = false;
            for (j, &(_, m)) in choice.iter_mut().zip(&groups) {
                if *j < m / 2 {
                    *j += 1;
                    advanced = true;
                    break;
                }
                *j = 0;
            }
            if !advanced {
                break;
            }
        }
    }
    let mean = hermite.get(&0).copied().unwrap_or(0);
    let mut variance: i128 = 0;
    for (&key, &c) in &hermite {
        if key == 0 || c == 0 {
            continue;
        }
        let norm: i128 = unpack(key).iter().map(|&(_, m)| factorial_i128(m)).product();
        let term = checked(c.checked_mul(c).and_then(|sq| sq.checked_mul(norm)))?;
        variance = checked(variance.checked_add(term))?;
    }
    Ok(ExactMoments { mean, variance })
}

/// Exact `E[Tr(A^p)]` and `Var[Tr(A^p)]` for standard Gaussian input.
pub fn exact_moments(kind: EnsembleKind, n: usize, p: u32) -> Result<ExactMoments> {
    let poly = trace_polynomial(kind, n, p, TraceExpansion::preferred(kind, p))?;
    polynomial_moments(&poly)
}

pub fn exact_variance(kind: EnsembleKind, n: usize, p: u32) -> Result<f64> {
    exact_moments(kind, n, p).map(|m| m.variance as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_weights() {
        // x^4 = He_4 + 6 He_2 + 3
        assert_eq!(hermite_weight(4, 0), 1);
        assert_eq!(hermite_weight(4, 1), 6);
        assert_eq!(hermite_weight(4, 2), 3);
        assert_eq!(hermite_weight(5, 2), 15);
    }

    #[test]
    fn single_variable_moments() {
        // Var(x^2) = 2, Var(x^3) = 15, Var(x^4) = 105 - 9
        for (m, var) in [(1, 1), (2, 2), (3, 15), (4, 96)] {
            let mut atoms = vec![0usize; m];
            let poly = TracePolynomial::from([(pack(&mut atoms), 1)]);
            let moments = polynomial_moments(&poly).unwrap();
            assert_eq!(moments.variance, var, "m={m}");
        }
        // E[(x y + x^2)] = 1, Var = Var(xy) + Var(x^2) = 1 + 2
        let poly = TracePolynomial::from([(pack(&mut [0, 1]), 1), (pack(&mut [0, 0]), 1)]);
        assert_eq!(
            polynomial_moments(&poly).unwrap(),
            ExactMoments { mean: 1, variance: 3 }
        );
    }

    #[test]
    fn trivial_examples() {
        for n in 1..=9 {
            let m = exact_moments(EnsembleKind::Circulant, n, 1).unwrap();
            assert_eq!(m.variance, (n * n) as i128);
            let m = exact_moments(EnsembleKind::ReverseCirculant, n, 2).unwrap();
            assert_eq!(m.variance, 2 * (n as i128).pow(3));
            assert_eq!(m.mean, (n * n) as i128);
        }
    }

    #[test]
    fn specialized_expansions_agree_with_walks() {
        let cases = [
            (EnsembleKind::Circulant, TraceExpansion::Frequency, 1..=4),
            (EnsembleKind::SymmetricCirculant, TraceExpansion::Frequency, 1..=4),
            (EnsembleKind::ReverseCirculant, TraceExpansion::Alternating, 1..=2),
        ];
        for (kind, expansion, ps) in cases {
            for p in ps {
                let p = if expansion == TraceExpansion::Alternating { 2 * p } else { p };
                for n in 1..=7 {
                    let fast = trace_polynomial(kind, n, p, expansion).unwrap();
                    let walk = trace_polynomial(kind, n, p, TraceExpansion::ClosedWalk).unwrap();
                    assert_eq!(fast, walk, "{kind} n={n} p={p}");
                }
            }
        }
    }

    #[test]
    fn expansion_applicability() {
        assert!(trace_polynomial(EnsembleKind::Hankel, 4, 2, TraceExpansion::Frequency).is_err());
        assert!(
            trace_polynomial(EnsembleKind::ReverseCirculant, 4, 3, TraceExpansion::Alternating)
                .is_err()
        );
        assert!(matches!(
            exact_moments(EnsembleKind::Hankel, 200, 4),
            Err(Error::Resource(_))
        ));
        assert!(exact_moments(EnsembleKind::Circulant, 4, 9).is_err());
    }

    #[test]
    fn symmetric_circulant_square() {
        // Tr(SC^2) = n sum_j x_{min(j,n-j)}^2 over j in 0..n
        let n = 7;
        let m = exact_moments(EnsembleKind::SymmetricCirculant, n, 2).unwrap();
        // x_0 once, x_1..x_3 twice each
        assert_eq!(m.mean, 7 * 7);
        assert_eq!(m.variance, 49 * (2 + 3 * 4 * 2));
    }
}
