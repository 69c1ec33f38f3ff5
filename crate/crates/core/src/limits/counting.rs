//! Exact sizes of the constrained index sets behind the trace expansions,
//! with generating-function closed forms and brute-force enumeration.
//!
//! * `A(p, s, n)`: `(i_1..i_p)` in `[0, n-1]^p` with `i_1 + ... + i_p = s n`.
//! * `B(p, s, n)`: `(i_1..i_2p)` in `[1, n]^2p` with `sum_k (-1)^k i_k = s n`.
//! * `B_k(p, k, n)`: `(j_1..j_p)` in `[1, floor(n/2)]^p` with
//!   `j_1 + ... + j_k - j_{k+1} - ... - j_p = 0 (mod n)`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Enumeration budget for [`brute_card`], in visited tuples.
pub const BRUTE_FORCE_BUDGET: f64 = 1e8;

pub fn binomial(top: u64, bottom: u64) -> BigInt {
    if bottom > top {
        return BigInt::zero();
    }
    let bottom = bottom.min(top - bottom);
    let mut acc = BigInt::one();
    for i in 0..bottom {
        acc *= top - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(m: u64) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * i)
}

fn signed(k: u64) -> BigInt {
    if k.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CardinalityFamily {
    A,
    B,
    #[serde(rename = "Bk")]
    BK,
}

impl std::str::FromStr for CardinalityFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(CardinalityFamily::A),
            "B" | "b" => Ok(CardinalityFamily::B),
            "Bk" | "BK" | "bk" | "B_k" => Ok(CardinalityFamily::BK),
            other => Err(Error::Usage(format!("unknown family '{other}'"))),
        }
    }
}

fn serialize_count<S: Serializer>(count: &BigInt, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match count.to_u64() {
        Some(v) => ser.serialize_u64(v),
        None => ser.serialize_str(&count.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CardinalityResult {
    pub family: CardinalityFamily,
    pub p: u32,
    /// Level `s` for `A` and `B`.
    pub s: Option<i64>,
    /// Split point `k` for `B_k`.
    pub k: Option<u32>,
    pub n: u64,
    #[serde(serialize_with = "serialize_count")]
    pub count: BigInt,
}

impl CardinalityResult {
    pub fn count_u64(&self) -> Option<u64> {
        self.count.to_u64()
    }
}

/// Valid level range of family `A` is `0..=p-1`.
pub fn a_level_in_range(p: u32, s: i64) -> bool {
    s >= 0 && s < p as i64
}

/// Valid level range of family `B` is `-(p-1)..=p-1`.
pub fn b_level_in_range(p: u32, s: i64) -> bool {
    s.abs() < p as i64
}

/// `|A(p, s, n)| = sum_{k=0}^{s} (-1)^k C(p, k) C((s-k) n + p - 1, p - 1)`,
/// the coefficient of `x^{sn}` in `(1 + x + ... + x^{n-1})^p`.
pub fn card_a(p: u32, s: i64, n: u64) -> Result<CardinalityResult> {
    check_pn(p, n)?;
    let mut count = BigInt::zero();
    if a_level_in_range(p, s) {
        let p64 = p as u64;
        for k in 0..=s as u64 {
            let top = (s as u64 - k) * n + p64 - 1;
            count += signed(k) * binomial(p64, k) * binomial(top, p64 - 1);
        }
    }
    Ok(CardinalityResult {
        family: CardinalityFamily::A,
        p,
        s: Some(s),
        k: None,
        n,
        count,
    })
}

/// `|B(p, s, n)| = sum_{k=0}^{p+s-1} (-1)^k C(2p, k) C((p+s-k) n + p - 1, 2p - 1)`.
pub fn card_b(p: u32, s: i64, n: u64) -> Result<CardinalityResult> {
    check_pn(p, n)?;
    let mut count = BigInt::zero();
    if b_level_in_range(p, s) {
        let p64 = p as u64;
        let upper = (p as i64 + s - 1) as u64;
        for k in 0..=upper {
            let top = (p64 as i64 + s - k as i64) as u64 * n + p64 - 1;
            count += signed(k) * binomial(2 * p64, k) * binomial(top, 2 * p64 - 1);
        }
    }
    Ok(CardinalityResult {
        family: CardinalityFamily::B,
        p,
        s: Some(s),
        k: None,
        n,
        count,
    })
}

/// `|B_{p,s}^{(k)}|`: tuples of `B_k(p, k, n)` whose signed sum is exactly `s n`.
///
/// With `N = floor(n/2)` this is the coefficient of `x^T`,
/// `T = s n - k + (p - k) N`, in `(1 - x^N)^p (1 - x)^{-p}`.
pub fn card_b_k_level(p: u32, k: u32, s: i64, n: u64) -> Result<BigInt> {
    check_pn(p, n)?;
    if k > p {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds p = {p}")));
    }
    let half = (n / 2) as i64;
    let (p64, k64) = (p as i64, k as i64);
    let target = s * n as i64 - k64 + (p64 - k64) * half;
    let mut count = BigInt::zero();
    if target < 0 {
        return Ok(count);
    }
    for q in 0..=p64 {
        let rest = target - q * half;
        if rest < 0 {
            break;
        }
        count += signed(q as u64)
            * binomial(p as u64, q as u64)
            * binomial((rest + p64 - 1) as u64, (p64 - 1) as u64);
    }
    Ok(count)
}

/// `|B_p^{(k)}|`, summing [`card_b_k_level`] over every reachable level.
pub fn card_b_k(p: u32, k: u32, n: u64) -> Result<CardinalityResult> {
    check_pn(p, n)?;
    let half = (n / 2) as i64;
    let lo = k as i64 - (p as i64 - k as i64) * half;
    let hi = k as i64 * half - (p as i64 - k as i64);
    let mut count = BigInt::zero();
    for s in lo.div_euclid(n as i64)..=hi.div_euclid(n as i64) {
        count += card_b_k_level(p, k, s, n)?;
    }
    Ok(CardinalityResult {
        family: CardinalityFamily::BK,
        p,
        s: None,
        k: Some(k),
        n,
        count,
    })
}

fn check_pn(p: u32, n: u64) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    Ok(())
}

/// Parameters of a brute-force enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteQuery {
    A { p: u32, s: i64 },
    B { p: u32, s: i64 },
    BK { p: u32, k: u32 },
}

/// Visits every tuple in `[lo, hi]^len` and counts those accepted by `keep`.
fn enumerate(len: usize, lo: i64, hi: i64, mut keep: impl FnMut(&[i64]) -> bool) -> u64 {
    if hi < lo {
        return 0;
    }
    let mut tuple = vec![lo; len];
    let mut count = 0;
    loop {
        if keep(&tuple) {
            count += 1;
        }
        let mut pos = len;
        loop {
            if pos == 0 {
                return count;
            }
            pos -= 1;
            if tuple[pos] < hi {
                tuple[pos] += 1;
                break;
            }
            tuple[pos] = lo;
        }
    }
}

/// Counts a family by direct enumeration of its defining constraint.
pub fn brute_card(query: BruteQuery, n: u64) -> Result<CardinalityResult> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    let (len, side) = match query {
        BruteQuery::A { p, .. } => (p as usize, n),
        BruteQuery::B { p, .. } => (2 * p as usize, n),
        BruteQuery::BK { p, .. } => (p as usize, n / 2),
    };
    if len == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    if (side as f64).powi(len as i32) > BRUTE_FORCE_BUDGET {
        return Err(Error::Resource(format!(
            "enumerating {side}^{len} tuples exceeds the budget of {BRUTE_FORCE_BUDGET:e}"
        )));
    }
    let ni = n as i64;
    let result = match query {
        BruteQuery::A { p, s } => {
            let count = enumerate(len, 0, ni - 1, |t| t.iter().sum::<i64>() == s * ni);
            CardinalityResult {
                family: CardinalityFamily::A,
                p,
                s: Some(s),
                k: None,
                n,
                count: count.into(),
            }
        }
        BruteQuery::B { p, s } => {
            let count = enumerate(len, 1, ni, |t| {
                // positions are 1-based: odd positions carry a minus sign
                let signed_sum: i64 = t
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| if i % 2 == 0 { -x } else { x })
                    .sum();
                signed_sum == s * ni
            });
            CardinalityResult {
                family: CardinalityFamily::B,
                p,
                s: Some(s),
                k: None,
                n,
                count: count.into(),
            }
        }
        BruteQuery::BK { p, k } => {
            if k > p {
                return Err(Error::InvalidArgument(format!("k = {k} exceeds p = {p}")));
            }
            let count = enumerate(len, 1, (n / 2) as i64, |t| {
                let plus: i64 = t[..k as usize].iter().sum();
                let minus: i64 = t[k as usize..].iter().sum();
                (plus - minus).rem_euclid(ni) == 0
            });
            CardinalityResult {
                family: CardinalityFamily::BK,
                p,
                s: None,
                k: Some(k),
                n,
                count: count.into(),
            }
        }
    };
    Ok(result)
}

/// `count / n^e` as a float, dividing exactly before rounding.
pub fn scaled_count(count: &BigInt, n: u64, e: u32) -> f64 {
    let denom = BigInt::from(n).pow(e);
    let q = num_rational::BigRational::new(count.clone(), denom);
    rational_to_f64(&q)
}

pub(crate) fn rational_to_f64(q: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    // scale to keep 64 significant bits before the final division
    let (num, den) = (q.numer(), q.denom());
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let scaled = if shift >= 0 {
        (num.abs() << shift as usize) / den
    } else {
        (num.abs() >> (-shift) as usize) / den
    };
    let mag = scaled.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift as i32);
    if num.is_negative() {
        -mag
    } else {
        mag
    }
}
