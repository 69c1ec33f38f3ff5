//! Closed-form limiting variances of `Tr(A^p) / n^{(p+1)/2}` and the constants
//! they are built from, evaluated in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::counting::{binomial, factorial, rational_to_f64};
use crate::ensembles::EnsembleKind;
use crate::error::{Error, Result};

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

fn sign(k: i64) -> BigRational {
    if k.rem_euclid(2) == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

fn check_p(p: u32) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    Ok(())
}

/// Irwin-Hall density `f_p(x) = sum_{k=0}^{floor x} (-1)^k C(p,k) (x-k)^{p-1} / (p-1)!`
/// on `[0, p]`, evaluated exactly at the dyadic rational `x`.
pub fn irwin_hall_density_exact(p: u32, x: &BigRational) -> BigRational {
    assert!(p >= 1, "irwin_hall_density requires p >= 1");
    if x.is_negative() || *x > rat(p) {
        return BigRational::zero();
    }
    // f_1 is the indicator of [0, 1)
    if p == 1 {
        return if *x < BigRational::one() {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    let floor = x.floor().to_integer();
    let top: u64 = num_traits::ToPrimitive::to_u64(&floor).unwrap_or(0).min(p as u64);
    let mut acc = BigRational::zero();
    for k in 0..=top {
        let base = x - rat(k);
        acc += sign(k as i64) * rat(binomial(p as u64, k)) * base.pow(p as i32 - 1);
    }
    acc / rat(factorial(p as u64 - 1))
}

pub fn irwin_hall_density(p: u32, x: f64) -> f64 {
    match BigRational::from_float(x) {
        Some(q) => rational_to_f64(&irwin_hall_density_exact(p, &q)),
        None => 0.0,
    }
}

/// `g(k) = (1/(2k-1)!) sum_{|s|<k} (2 - 1_{s=0}) k!^2
///          sum_{j=0}^{k+s-1} (-1)^j C(2k, j) (k+s-j)^{2k-1}`.
pub fn g_const_exact(k: u32) -> Result<BigRational> {
    if k < 1 {
        return Err(Error::InvalidArgument("g(k) requires k >= 1".into()));
    }
    let k64 = k as i64;
    let kfact2 = factorial(k as u64).pow(2);
    let mut total = BigInt::zero();
    for s in -(k64 - 1)..=(k64 - 1) {
        let mut inner = BigInt::zero();
        for j in 0..(k64 + s) {
            let term = binomial(2 * k as u64, j as u64) * BigInt::from(k64 + s - j).pow(2 * k - 1);
            if j % 2 == 0 {
                inner += term;
            } else {
                inner -= term;
            }
        }
        let weight = if s == 0 { 1 } else { 2 };
        total += inner * weight * &kfact2;
    }
    Ok(BigRational::new(total, factorial(2 * k as u64 - 1)))
}

pub fn g_const(k: u32) -> Result<f64> {
    g_const_exact(k).map(|q| rational_to_f64(&q))
}

/// `h_p(k) = (1/(p-1)!) sum_{s=-ceil((p-k)/2)}^{floor(k/2)}
///           sum_{q=0}^{2s+p-k} (-1)^q C(p, q) ((2s+p-k-q)/2)^{p-1}`.
pub fn h_limit_exact(p: u32, k: u32) -> Result<BigRational> {
    check_p(p)?;
    if k > p {
        return Err(Error::InvalidArgument(format!("h_p(k) requires k <= p, got k = {k}, p = {p}")));
    }
    let (p64, k64) = (p as i64, k as i64);
    let lo = -((p64 - k64 + 1) / 2);
    let hi = k64 / 2;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut total = BigRational::zero();
    for s in lo..=hi {
        let top = 2 * s + p64 - k64;
        for q in 0..=top.min(p64) {
            let base = rat(top - q) * &half;
            total += sign(q) * rat(binomial(p as u64, q as u64)) * base.pow(p as i32 - 1);
        }
    }
    Ok(total / rat(factorial(p as u64 - 1)))
}

pub fn h_limit(p: u32, k: u32) -> Result<f64> {
    h_limit_exact(p, k).map(|q| rational_to_f64(&q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// Which power of two divides the `k`-th term of the even-`p` symmetric
/// circulant limit. The two printed forms disagree; both are kept so that
/// simulation can arbitrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvenBranchExponent {
    /// `2^{2(m-k)}`
    #[default]
    Doubled,
    /// `2^{m-k}`
    Single,
}

impl std::str::FromStr for EvenBranchExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "doubled" | "2(m-k)" => Ok(EvenBranchExponent::Doubled),
            "single" | "m-k" => Ok(EvenBranchExponent::Single),
            other => Err(Error::Usage(format!("unknown exponent reading '{other}'"))),
        }
    }
}

fn serialize_rational<S: Serializer>(q: &BigRational, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&q.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitValue {
    pub kind: EnsembleKind,
    pub p: u32,
    pub value: f64,
    #[serde(serialize_with = "serialize_rational")]
    pub exact: BigRational,
    pub parity: Option<Parity>,
}

impl LimitValue {
    fn new(kind: EnsembleKind, p: u32, exact: BigRational, parity: Option<Parity>) -> Self {
        LimitValue {
            kind,
            p,
            value: rational_to_f64(&exact),
            exact,
            parity,
        }
    }
}

/// `lim Var(Tr(C_n^p)) / n^{p+1} = p! sum_{s=0}^{p-1} f_p(s)`.
pub fn limit_var_circulant(p: u32) -> Result<LimitValue> {
    check_p(p)?;
    let sum = (0..p).fold(BigRational::zero(), |acc, s| {
        acc + irwin_hall_density_exact(p, &rat(s))
    });
    let exact = rat(factorial(p as u64)) * sum;
    Ok(LimitValue::new(EnsembleKind::Circulant, p, exact, None))
}

/// `lim Var(Tr(RC_n^{2p})) / n^{2p+1} = sum_{k=2}^p c_k g(k) + 2 c_1`,
/// `c_k = (C(p, p-k)^2 (p-k)!)^2`. The argument is half the matrix power.
pub fn limit_var_reverse_circulant(p: u32) -> Result<LimitValue> {
    check_p(p)?;
    let p64 = p as u64;
    let c = |k: u64| -> BigRational {
        let base = binomial(p64, p64 - k).pow(2) * factorial(p64 - k);
        rat(base.pow(2))
    };
    let mut exact = c(1) * rat(2);
    for k in 2..=p {
        exact += c(k as u64) * g_const_exact(k)?;
    }
    Ok(LimitValue::new(EnsembleKind::ReverseCirculant, p, exact, None))
}

pub fn limit_var_symmetric_circulant(p: u32) -> Result<LimitValue> {
    limit_var_symmetric_circulant_with(p, EvenBranchExponent::default())
}

/// Symmetric circulant limit of `Var(Tr(SC_n^p)) / n^{p+1}`.
///
/// Odd `p = 2m+1`: `p^2 C(2m,m)^2 m!^2 / 2^{2m}
///   + sum_{k=1}^m a_k / 2^{2(m-k)} sum_l C(2k+1,l)^2 l! (2k+1-l)! h_{2k+1}(l)`.
///
/// Even `p = 2m`: `b_1 / 2^{2m-1} + sum_{k=2}^m b_k / D_k
///   (sum_{l != k} C(2k,l)^2 l! (2k-l)! h_{2k}(l) + C(2k,k)^2 g(k))`.
pub fn limit_var_symmetric_circulant_with(
    p: u32,
    exponent: EvenBranchExponent,
) -> Result<LimitValue> {
    check_p(p)?;
    let two = |e: u64| rat(BigInt::from(2).pow(e as u32));
    if p % 2 == 1 {
        let m = (p as u64 - 1) / 2;
        let lead = BigInt::from(p).pow(2) * binomial(2 * m, m).pow(2) * factorial(m).pow(2);
        let mut exact = rat(lead) / two(2 * m);
        for k in 1..=m {
            let a_k = (binomial(2 * m + 1, 2 * m - 2 * k)
                * binomial(2 * m - 2 * k, m - k)
                * factorial(m - k))
            .pow(2);
            let mut inner = BigRational::zero();
            let q = 2 * k + 1;
            for l in 0..=q {
                let weight = binomial(q, l).pow(2) * factorial(l) * factorial(q - l);
                inner += rat(weight) * h_limit_exact(q as u32, l as u32)?;
            }
            exact += rat(a_k) / two(2 * (m - k)) * inner;
        }
        Ok(LimitValue::new(
            EnsembleKind::SymmetricCirculant,
            p,
            exact,
            Some(Parity::Odd),
        ))
    } else {
        let m = p as u64 / 2;
        let b = |k: u64| {
            (binomial(2 * m, 2 * m - 2 * k) * binomial(2 * m - 2 * k, m - k) * factorial(m - k))
                .pow(2)
        };
        let mut exact = rat(b(1)) / two(2 * m - 1);
        for k in 2..=m {
            let q = 2 * k;
            let mut inner = BigRational::zero();
            for l in (0..=q).filter(|&l| l != k) {
                let weight = binomial(q, l).pow(2) * factorial(l) * factorial(q - l);
                inner += rat(weight) * h_limit_exact(q as u32, l as u32)?;
            }
            inner += rat(binomial(q, k).pow(2)) * g_const_exact(k as u32)?;
            let denom = match exponent {
                EvenBranchExponent::Doubled => two(2 * (m - k)),
                EvenBranchExponent::Single => two(m - k),
            };
            exact += rat(b(k)) / denom * inner;
        }
        Ok(LimitValue::new(
            EnsembleKind::SymmetricCirculant,
            p,
            exact,
            Some(Parity::Even),
        ))
    }
}

/// Closed-form limit of `Var(Tr(A^p)) / n^{p+1}` where one exists.
///
/// The reverse circulant takes the matrix power `p` (even); Hankel has none.
pub fn limit_variance_ratio(kind: EnsembleKind, p: u32) -> Result<LimitValue> {
    match kind {
        EnsembleKind::Circulant => limit_var_circulant(p),
        EnsembleKind::SymmetricCirculant => limit_var_symmetric_circulant(p),
        EnsembleKind::ReverseCirculant if p.is_multiple_of(2) && p > 0 => {
            limit_var_reverse_circulant(p / 2)
        }
        EnsembleKind::ReverseCirculant => Err(Error::UnsupportedLimit(format!(
            "odd powers of the reverse circulant (p = {p})"
        ))),
        EnsembleKind::Hankel => Err(Error::UnsupportedLimit("the Hankel ensemble".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn density_examples() {
        assert_eq!(irwin_hall_density(1, 0.5), 1.0);
        assert_eq!(irwin_hall_density(2, 1.0), 1.0);
        assert_eq!(irwin_hall_density(3, 1.5), 0.75);
        assert_eq!(irwin_hall_density(3, -0.1), 0.0);
        assert_eq!(irwin_hall_density(3, 3.1), 0.0);
        assert_eq!(irwin_hall_density(4, 4.0), 0.0);
    }

    #[test]
    fn density_matches_uniform_self_convolution() {
        // f_{p+1}(x) = int_{x-1}^{x} f_p, by composite Simpson
        for p in 1..=5u32 {
            for &x in &[0.3, 1.0, 1.7, 2.25, 3.5] {
                let steps = 2000;
                let h = 1.0 / steps as f64;
                let mut acc = 0.0;
                for i in 0..=steps {
                    let t = x - 1.0 + i as f64 * h;
                    let w = if i == 0 || i == steps {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc += w * irwin_hall_density(p, t);
                }
                let conv = acc * h / 3.0;
                let tol = if p == 1 { 2e-3 } else { 1e-6 };
                assert!((conv - irwin_hall_density(p + 1, x)).abs() < tol, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn g_values() {
        assert_eq!(g_const_exact(1).unwrap(), q(1, 1));
        assert_eq!(g_const_exact(2).unwrap(), q(16, 3));
        assert_eq!(g_const_exact(3).unwrap(), q(261, 5));
        assert_eq!(g_const_exact(4).unwrap(), q(30656, 35));
        assert!(g_const(0).is_err());
        for k in 1..=6 {
            assert!(g_const(k).unwrap() > 0.0);
        }
    }

    #[test]
    fn h_values() {
        let table: [&[(i64, i64)]; 4] = [
            &[(0, 1), (1, 1)],
            &[(0, 1), (1, 2), (0, 1)],
            &[(1, 8), (1, 8), (1, 8), (1, 8)],
            &[(1, 12), (1, 24), (1, 12), (1, 24), (1, 12)],
        ];
        for (i, row) in table.iter().enumerate() {
            let p = i as u32 + 1;
            for (k, &(a, b)) in row.iter().enumerate() {
                assert_eq!(h_limit_exact(p, k as u32).unwrap(), q(a, b), "p={p} k={k}");
            }
        }
        assert!(h_limit(3, 4).is_err());
        assert!(h_limit(0, 0).is_err());
    }

    #[test]
    fn h_is_reflection_symmetric() {
        // p = 1 is excluded: the sum picks up 0^0 = 1 at k = 1
        for p in 2..=6 {
            for k in 0..=p {
                assert_eq!(h_limit_exact(p, k).unwrap(), h_limit_exact(p, p - k).unwrap());
            }
        }
    }

    #[test]
    fn h_is_the_scaled_count_limit() {
        use crate::limits::counting::{card_b_k, scaled_count};
        // |B_p^(k)| / n^{p-1} approaches h_p(k) at rate 1/n
        for p in 2..=5u32 {
            for k in 0..=p {
                let n = 20_000u64;
                let count = card_b_k(p, k, n).unwrap().count;
                let ratio = scaled_count(&count, n, p - 1);
                let h = h_limit(p, k).unwrap();
                assert!((ratio - h).abs() < 2e-3, "p={p} k={k} ratio={ratio} h={h}");
            }
        }
    }

    #[test]
    fn circulant_limits() {
        let values: Vec<BigRational> =
            (1..=5).map(|p| limit_var_circulant(p).unwrap().exact).collect();
        assert_eq!(values, vec![q(1, 1), q(2, 1), q(6, 1), q(24, 1), q(120, 1)]);
    }

    #[test]
    fn reverse_circulant_limits() {
        assert_eq!(limit_var_reverse_circulant(1).unwrap().exact, q(2, 1));
        assert_eq!(limit_var_reverse_circulant(2).unwrap().exact, q(112, 3));
        assert_eq!(limit_var_reverse_circulant(3).unwrap().exact, q(5661, 5));
    }

    #[test]
    fn symmetric_circulant_limits() {
        let expected = [q(1, 1), q(1, 2), q(15, 1), q(222, 1), q(945, 1), q(136515, 2)];
        for (i, e) in expected.iter().enumerate() {
            let v = limit_var_symmetric_circulant(i as u32 + 1).unwrap();
            assert_eq!(&v.exact, e, "p={}", i + 1);
            let parity = if i % 2 == 0 { Parity::Odd } else { Parity::Even };
            assert_eq!(v.parity, Some(parity));
        }
        // the readings only separate once a k < m term appears
        for p in [2, 4] {
            assert_eq!(
                limit_var_symmetric_circulant_with(p, EvenBranchExponent::Single).unwrap().exact,
                limit_var_symmetric_circulant(p).unwrap().exact
            );
        }
        assert_eq!(
            limit_var_symmetric_circulant_with(6, EvenBranchExponent::Single).unwrap().exact,
            q(228315, 2)
        );
    }

    #[test]
    fn dispatch() {
        assert!(matches!(
            limit_variance_ratio(EnsembleKind::Hankel, 2),
            Err(Error::UnsupportedLimit(_))
        ));
        assert!(matches!(
            limit_variance_ratio(EnsembleKind::ReverseCirculant, 3),
            Err(Error::UnsupportedLimit(_))
        ));
        assert_eq!(
            limit_variance_ratio(EnsembleKind::ReverseCirculant, 4).unwrap().exact,
            q(112, 3)
        );
        assert!(limit_var_circulant(0).is_err());
    }

    #[test]
    fn limit_json_shape() {
        let v = limit_var_reverse_circulant(2).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with(r#"{"kind":"reverse-circulant","p":2,"value":37.3333"#), "{json}");
        assert!(json.ends_with(r#""exact":"112/3","parity":null}"#), "{json}");
    }
}
