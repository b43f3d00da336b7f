//! Exponents of `n` in the norm estimates for unimodular multilinear forms.
//!
//! Every formula is piecewise rational in the reciprocals `1/p_k`, so values are
//! carried as exact rationals whenever the inputs are rational and only fall
//! back to `f64` when an input was supplied as a float.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number that is either an exact rational or an `f64` approximation.
#[derive(Clone, Debug)]
pub enum Real {
    Exact(BigRational),
    Approx(f64),
}

impl Real {
    pub fn integer(n: i64) -> Self {
        Real::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`; panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Real::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Real::integer(0)
    }

    pub fn half() -> Self {
        Real::ratio(1, 2)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Real::Approx(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Real::Exact(q) => Some(q),
            Real::Approx(_) => None,
        }
    }

    /// `1 / self`, or `None` for zero.
    pub fn recip(&self) -> Option<Real> {
        match self {
            Real::Exact(q) if q.is_zero() => None,
            Real::Exact(q) => Some(Real::Exact(q.recip())),
            Real::Approx(x) if *x == 0.0 => None,
            Real::Approx(x) => Some(Real::Approx(1.0 / x)),
        }
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    fn combine(&self, other: &Real, exact: impl Fn(&BigRational, &BigRational) -> BigRational, approx: impl Fn(f64, f64) -> f64) -> Real {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(exact(a, b)),
            _ => Real::Approx(approx(self.to_f64(), other.to_f64())),
        }
    }
}

impl Add for &Real {
    type Output = Real;
    fn add(self, rhs: &Real) -> Real {
        self.combine(rhs, |a, b| a + b, |a, b| a + b)
    }
}

impl Sub for &Real {
    type Output = Real;
    fn sub(self, rhs: &Real) -> Real {
        self.combine(rhs, |a, b| a - b, |a, b| a - b)
    }
}

impl Add for Real {
    type Output = Real;
    fn add(self, rhs: Real) -> Real {
        &self + &rhs
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, rhs: Real) -> Real {
        &self - &rhs
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Exact(q) => Real::Exact(-q),
            Real::Approx(x) => Real::Approx(-x),
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Real) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Real) -> Option<Ordering> {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact(q) if q.denom().is_one() => write!(f, "{}", q.numer()),
            Real::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Real::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Serialized as `{"exact": "5/6" | null, "value": 0.8333333333333334}`.
impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Real", 2)?;
        let exact = self.is_exact().then(|| self.to_string());
        s.serialize_field("exact", &exact)?;
        s.serialize_field("value", &self.to_f64())?;
        s.end()
    }
}

/// Parses `"3"`, `"3/2"`, `"1.5"` exactly; anything else `f64` accepts becomes approximate.
impl FromStr for Real {
    type Err = Error;

    fn from_str(s: &str) -> Result<Real> {
        let t = s.trim();
        let bad = || Error::Argument(format!("malformed number '{s}'"));
        if let Some((num, den)) = t.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            return Ok(Real::Exact(BigRational::new(num, den)));
        }
        if let Some(q) = parse_decimal(t) {
            return Ok(Real::Exact(q));
        }
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Real::Approx(x)),
            _ => Err(bad()),
        }
    }
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = BigRational::new(numer, denom);
    Some(if neg { -q } else { q })
}

/// An exponent `p ∈ [1, ∞]`; `∞` is a distinct value, not a large float.
#[derive(Clone, Debug)]
pub enum ExtendedExponent {
    Finite(Real),
    Infinity,
}

impl ExtendedExponent {
    pub const INFINITY: ExtendedExponent = ExtendedExponent::Infinity;

    /// Validates `value ≥ 1`.
    pub fn new(value: Real) -> Result<Self> {
        let ok = match &value {
            Real::Exact(q) => *q >= BigRational::one(),
            Real::Approx(x) => *x >= 1.0,
        };
        if !ok {
            return Err(Error::Domain(format!("exponent {value} is not in [1, inf]")));
        }
        Ok(ExtendedExponent::Finite(value))
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        if x == f64::INFINITY {
            Ok(ExtendedExponent::Infinity)
        } else if x.is_finite() {
            Self::new(Real::Approx(x))
        } else {
            Err(Error::Domain(format!("exponent {x} is not in [1, inf]")))
        }
    }

    /// Exact `num / den`; errors when below 1.
    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Argument("zero denominator".into()));
        }
        Self::new(Real::ratio(num, den))
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::new(Real::integer(n))
    }

    pub fn one() -> Self {
        ExtendedExponent::Finite(Real::integer(1))
    }

    pub fn two() -> Self {
        ExtendedExponent::Finite(Real::integer(2))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedExponent::Infinity)
    }

    pub fn is_exact(&self) -> bool {
        match self {
            ExtendedExponent::Finite(r) => r.is_exact(),
            ExtendedExponent::Infinity => true,
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> Real {
        match self {
            ExtendedExponent::Finite(r) => r.recip().expect("exponent is at least 1"),
            ExtendedExponent::Infinity => Real::zero(),
        }
    }

    /// The exponent whose reciprocal is `r`; `r = 0` gives `∞`.
    pub fn from_reciprocal(r: &Real) -> Result<Self> {
        match r.recip() {
            None => Ok(ExtendedExponent::Infinity),
            Some(p) => Self::new(p),
        }
    }

    /// `p*` with `1/p + 1/p* = 1`.
    pub fn conjugate(&self) -> ExtendedExponent {
        let r = &Real::integer(1) - &self.reciprocal();
        Self::from_reciprocal(&r).expect("conjugate of an exponent in [1, inf] lies in [1, inf]")
    }

    /// `f64::INFINITY` for `∞`.
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedExponent::Finite(r) => r.to_f64(),
            ExtendedExponent::Infinity => f64::INFINITY,
        }
    }

    pub fn max(self, other: ExtendedExponent) -> ExtendedExponent {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: ExtendedExponent) -> ExtendedExponent {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// Free-function form of [`ExtendedExponent::conjugate`].
pub fn conjugate(p: &ExtendedExponent) -> ExtendedExponent {
    p.conjugate()
}

impl PartialEq for ExtendedExponent {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for ExtendedExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedExponent::*;
        match (self, other) {
            (Infinity, Infinity) => Some(Ordering::Equal),
            (Infinity, Finite(_)) => Some(Ordering::Greater),
            (Finite(_), Infinity) => Some(Ordering::Less),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtendedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedExponent::Finite(r) => write!(f, "{r}"),
            ExtendedExponent::Infinity => f.write_str("inf"),
        }
    }
}

/// Accepts `inf` (any case), integers, fractions `a/b` and decimals.
impl FromStr for ExtendedExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("inf") {
            return Ok(ExtendedExponent::Infinity);
        }
        let value: Real = s.parse().map_err(|_| Error::Argument(format!("malformed exponent '{s}'")))?;
        ExtendedExponent::new(value).map_err(|_| Error::Argument(format!("exponent '{s}' is not in [1, inf]")))
    }
}

impl Serialize for ExtendedExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtendedExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated exponent list such as `1.5,3,inf`.
pub fn parse_exponent_list(s: &str) -> Result<Vec<ExtendedExponent>> {
    let ps = s.split(',').map(str::parse).collect::<Result<Vec<_>>>()?;
    if ps.is_empty() {
        return Err(Error::Argument("empty exponent list".into()));
    }
    Ok(ps)
}

fn nonempty(ps: &[ExtendedExponent]) -> Result<()> {
    if ps.is_empty() {
        Err(Error::Argument("exponent list must be nonempty".into()))
    } else {
        Ok(())
    }
}

/// `ρ = min_k max{2, p_k*}`.
pub fn rho(ps: &[ExtendedExponent]) -> Result<ExtendedExponent> {
    nonempty(ps)?;
    Ok(ps
        .iter()
        .map(|p| ExtendedExponent::two().max(p.conjugate()))
        .reduce(ExtendedExponent::min)
        .expect("nonempty"))
}

/// `Σ_k max{1/2 − 1/p_k, 0}`.
fn excess_over_two(ps: &[ExtendedExponent]) -> Real {
    ps.iter()
        .map(|p| (&Real::half() - &p.reciprocal()).max(Real::zero()))
        .fold(Real::zero(), |acc, t| acc + t)
}

/// The optimal exponent `1/ρ + Σ_k max{1/2 − 1/p_k, 0}` for mixed `ℓ_p` domains.
pub fn theorem1_exponent(ps: &[ExtendedExponent]) -> Result<Real> {
    let rho = rho(ps)?;
    Ok(rho.reciprocal() + excess_over_two(ps))
}

/// `γ = min{2, max{p_k : p_k ≤ 2}}`, taken to be 2 when no `p_k ≤ 2`.
pub fn ar_gamma(ps: &[ExtendedExponent]) -> Result<ExtendedExponent> {
    nonempty(ps)?;
    let two = ExtendedExponent::two();
    let small = ps.iter().filter(|p| **p <= two).cloned().reduce(ExtendedExponent::max);
    Ok(small.map_or(two.clone(), |g| g.min(two)))
}

/// The earlier general exponent `1 − 1/γ + Σ_k max{1/γ − 1/p_k, 0}`.
pub fn ar_exponent(ps: &[ExtendedExponent]) -> Result<Real> {
    let inv_gamma = ar_gamma(ps)?.reciprocal();
    let sum = ps
        .iter()
        .map(|p| (&inv_gamma - &p.reciprocal()).max(Real::zero()))
        .fold(Real::zero(), |acc, t| acc + t);
    Ok(&Real::integer(1) - &inv_gamma + sum)
}

/// `(m+1)/2 − Σ_k 1/p_k`, asserted only when every `p_k ≥ 2`.
pub fn classical_ksz_exponent(ps: &[ExtendedExponent]) -> Result<Real> {
    nonempty(ps)?;
    if let Some(p) = ps.iter().find(|p| **p < ExtendedExponent::two()) {
        return Err(Error::Domain(format!("classical exponent needs all p >= 2, got {p}")));
    }
    let m = ps.len() as i64;
    let sum = ps.iter().fold(Real::zero(), |acc, p| acc + p.reciprocal());
    Ok(Real::ratio(m + 1, 2) - sum)
}

/// `1 − 1/max_k p_k`, asserted only when every `p_k ≤ 2`.
pub fn bayart_exponent(ps: &[ExtendedExponent]) -> Result<Real> {
    nonempty(ps)?;
    if let Some(p) = ps.iter().find(|p| **p > ExtendedExponent::two()) {
        return Err(Error::Domain(format!("small-p exponent needs all p <= 2, got {p}")));
    }
    let pmax = ps.iter().cloned().reduce(ExtendedExponent::max).expect("nonempty");
    Ok(&Real::integer(1) - &pmax.reciprocal())
}

/// Universal floor `(1/√2)^{m−1} n^{1/2 + Σ(1/2 − 1/p_k)}` for unimodular forms with all `p_k ≥ 2`.
pub fn hl_lower_bound(ps: &[ExtendedExponent], n: usize) -> Result<f64> {
    let classical = classical_ksz_exponent(ps)?;
    if n == 0 {
        return Err(Error::Argument("dimension must be positive".into()));
    }
    // 1/2 + Σ(1/2 − 1/p_k) is the same number as (m+1)/2 − Σ 1/p_k.
    let m = ps.len() as i32;
    Ok(std::f64::consts::FRAC_1_SQRT_2.powi(m - 1) * (n as f64).powf(classical.to_f64()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Every `p_k ≥ 2`.
    AllLarge,
    /// Every `p_k < 2`.
    AllSmall,
    Mixed,
}

/// Every applicable exponent formula for one p-tuple.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentProfile {
    pub ps: Vec<ExtendedExponent>,
    pub conjugates: Vec<ExtendedExponent>,
    pub theorem1: Real,
    pub albuquerque_rezende: Real,
    pub classical_ksz: Option<Real>,
    pub bayart: Option<Real>,
    pub gamma: ExtendedExponent,
    pub rho: ExtendedExponent,
    pub regime: Regime,
    /// `theorem1 ≤ albuquerque_rezende`.
    pub theorem1_dominates: bool,
}

impl ExponentProfile {
    pub fn m(&self) -> usize {
        self.ps.len()
    }
}

pub fn profile(ps: &[ExtendedExponent]) -> Result<ExponentProfile> {
    let theorem1 = theorem1_exponent(ps)?;
    let ar = ar_exponent(ps)?;
    let two = ExtendedExponent::two();
    let regime = if ps.iter().all(|p| *p >= two) {
        Regime::AllLarge
    } else if ps.iter().all(|p| *p < two) {
        Regime::AllSmall
    } else {
        Regime::Mixed
    };
    Ok(ExponentProfile {
        ps: ps.to_vec(),
        conjugates: ps.iter().map(ExtendedExponent::conjugate).collect(),
        theorem1_dominates: theorem1 <= ar,
        theorem1,
        albuquerque_rezende: ar,
        classical_ksz: classical_ksz_exponent(ps).ok(),
        bayart: bayart_exponent(ps).ok(),
        gamma: ar_gamma(ps)?,
        rho: rho(ps)?,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> Vec<ExtendedExponent> {
        parse_exponent_list(s).unwrap()
    }

    fn q(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    #[test]
    fn conjugate_examples() {
        let two = ExtendedExponent::two();
        assert_eq!(two.conjugate(), two);
        assert!(ExtendedExponent::one().conjugate().is_infinite());
        assert_eq!(ExtendedExponent::Infinity.conjugate(), ExtendedExponent::one());
        assert_eq!(conjugate(&"3/2".parse().unwrap()), ExtendedExponent::integer(3).unwrap());
        assert_eq!("1.5".parse::<ExtendedExponent>().unwrap(), ExtendedExponent::ratio(3, 2).unwrap());
    }

    #[test]
    fn parsing() {
        assert!("INF".parse::<ExtendedExponent>().unwrap().is_infinite());
        assert!("0.5".parse::<ExtendedExponent>().is_err());
        assert!("abc".parse::<ExtendedExponent>().is_err());
        assert!("1/0".parse::<ExtendedExponent>().is_err());
        let approx: ExtendedExponent = "2.5e0".parse().unwrap();
        assert!(!approx.is_exact());
        assert_eq!(approx.to_f64(), 2.5);
        assert!(parse_exponent_list("1.5,,3").is_err());
    }

    #[test]
    fn theorem1_examples() {
        assert_eq!(theorem1_exponent(&ps("3/2,3,3")).unwrap(), q(5, 6));
        assert_eq!(theorem1_exponent(&ps("inf,inf")).unwrap(), q(3, 2));
        assert_eq!(theorem1_exponent(&ps("1,1,1")).unwrap(), q(0, 1));
        assert!(matches!(theorem1_exponent(&[]), Err(Error::Argument(_))));
    }

    #[test]
    fn ar_examples() {
        assert_eq!(ar_gamma(&ps("3/2,3,3")).unwrap(), ExtendedExponent::ratio(3, 2).unwrap());
        assert_eq!(ar_exponent(&ps("3/2,3,3")).unwrap(), q(1, 1));
        assert_eq!(ar_gamma(&ps("2,2")).unwrap(), ExtendedExponent::two());
        assert_eq!(ar_exponent(&ps("2,2")).unwrap(), q(1, 2));
        assert_eq!(ar_gamma(&ps("4/3,4/3")).unwrap(), ExtendedExponent::ratio(4, 3).unwrap());
        assert_eq!(ar_exponent(&ps("4/3,4/3")).unwrap(), q(1, 4));
        // no p ≤ 2: γ = 2 and the classical exponent is recovered
        assert_eq!(ar_gamma(&ps("3,inf")).unwrap(), ExtendedExponent::two());
        assert_eq!(ar_exponent(&ps("3,inf")).unwrap(), classical_ksz_exponent(&ps("3,inf")).unwrap());
        assert!(ar_exponent(&[]).is_err());
    }

    #[test]
    fn classical_and_small_examples() {
        assert_eq!(classical_ksz_exponent(&ps("2,2")).unwrap(), q(1, 2));
        assert_eq!(classical_ksz_exponent(&ps("inf,inf,inf")).unwrap(), q(2, 1));
        assert_eq!(classical_ksz_exponent(&ps("3,3")).unwrap(), q(5, 6));
        assert_eq!(theorem1_exponent(&ps("3,3")).unwrap(), q(5, 6));
        assert!(matches!(classical_ksz_exponent(&ps("3/2,3")), Err(Error::Domain(_))));

        assert_eq!(bayart_exponent(&ps("3/2,3/2")).unwrap(), q(1, 3));
        assert_eq!(bayart_exponent(&ps("1,1")).unwrap(), q(0, 1));
        assert_eq!(bayart_exponent(&ps("2,1")).unwrap(), q(1, 2));
        assert!(matches!(bayart_exponent(&ps("3,1")), Err(Error::Domain(_))));
    }

    #[test]
    fn hl_examples() {
        assert!((hl_lower_bound(&ps("inf,inf"), 2).unwrap() - 2.0).abs() < 1e-15);
        assert!((hl_lower_bound(&ps("2,2"), 5).unwrap() - 5f64.sqrt() / 2f64.sqrt()).abs() < 1e-15);
        assert!((hl_lower_bound(&ps("inf,inf"), 4).unwrap() - 4.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(matches!(hl_lower_bound(&ps("3/2,2"), 4), Err(Error::Domain(_))));
    }

    #[test]
    fn profile_examples() {
        let pr = profile(&ps("3/2,3,3")).unwrap();
        assert_eq!(pr.theorem1, q(5, 6));
        assert_eq!(pr.albuquerque_rezende, q(1, 1));
        assert_eq!(pr.gamma, ExtendedExponent::ratio(3, 2).unwrap());
        assert_eq!(pr.rho, ExtendedExponent::two());
        assert_eq!(pr.regime, Regime::Mixed);
        assert!(pr.theorem1_dominates);
        assert!(pr.classical_ksz.is_none() && pr.bayart.is_none());

        let pr = profile(&ps("2,2,2,2")).unwrap();
        assert_eq!(pr.theorem1, q(1, 2));
        assert_eq!(pr.albuquerque_rezende, q(1, 2));
        assert_eq!(pr.regime, Regime::AllLarge);

        let pr = profile(&ps("1,inf")).unwrap();
        assert_eq!(pr.rho, ExtendedExponent::two());
        assert_eq!(pr.theorem1, q(1, 1));

        let json = serde_json::to_value(profile(&ps("1,inf")).unwrap()).unwrap();
        assert_eq!(json["ps"][1], "inf");
        assert_eq!(json["theorem1"]["exact"], "1");
    }
}
