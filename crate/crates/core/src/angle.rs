//! Exact rational angles on the circle `R/Z` and their dynamics under
//! angle doubling.
//!
//! Every angle is stored as a reduced fraction in `[0, 1)` backed by
//! arbitrary-precision integers. Tuned angles and iterates of the surgery
//! maps quickly outgrow 64-bit denominators, so nothing here assumes a
//! machine-word bound.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AngleError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse angle {0:?}: expected \"p/q\"")]
    Parse(String),
    #[error("invalid digit word {0:?}: only '0' and '1' are allowed")]
    Digits(String),
    #[error("period word must be non-empty")]
    EmptyPeriod,
}

/// A rational point of the circle, `numerator / denominator` in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Angle(BigRational);

impl Angle {
    /// Reduced representative of `numerator / denominator` mod 1.
    pub fn new(
        numerator: impl Into<BigInt>,
        denominator: impl Into<BigInt>,
    ) -> Result<Self, AngleError> {
        let denominator = denominator.into();
        if denominator.is_zero() {
            return Err(AngleError::ZeroDenominator);
        }
        Ok(Self::from_ratio(BigRational::new(
            numerator.into(),
            denominator,
        )))
    }

    /// Reduces an arbitrary rational mod 1.
    pub fn from_ratio(r: BigRational) -> Self {
        let fl = r.floor();
        Angle(r - fl)
    }

    pub fn zero() -> Self {
        Angle(BigRational::zero())
    }

    pub fn half() -> Self {
        Angle(BigRational::new(BigInt::one(), BigInt::from(2)))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0)
    }

    /// `2 * self mod 1`.
    pub fn double(&self) -> Angle {
        let n = self.numer();
        let d = self.denom();
        if d.is_even() {
            // numerator is odd, so n / (d/2) is already reduced
            let half: BigInt = d >> 1;
            let m = if n >= &half { n - &half } else { n.clone() };
            Angle(BigRational::new_raw(m, half))
        } else {
            let mut m: BigInt = n << 1;
            if &m >= d {
                m -= d;
            }
            Angle(BigRational::new_raw(m, d.clone()))
        }
    }

    /// `2^k * self mod 1`, computed without stepping through the orbit.
    pub fn double_n(&self, k: u64) -> Angle {
        if k <= 64 {
            let mut a = self.clone();
            for _ in 0..k {
                a = a.double();
            }
            return a;
        }
        let d = self.denom().magnitude();
        let n = self.numer().magnitude();
        let two = BigUint::from(2u32);
        let m = (two.modpow(&BigUint::from(k), d) * n) % d;
        Angle(BigRational::new(
            BigInt::from_biguint(Sign::Plus, m),
            BigInt::from_biguint(Sign::Plus, d.clone()),
        ))
    }

    /// `self + 1/2 mod 1`: the angle of `-z` when `self` is the angle of `z`.
    pub fn add_half(&self) -> Angle {
        self.add(&Angle::half())
    }

    pub fn add(&self, other: &Angle) -> Angle {
        Angle::from_ratio(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Angle) -> Angle {
        Angle::from_ratio(&self.0 - &other.0)
    }

    /// Counterclockwise distance from `self` to `other`, in `[0, 1)`.
    pub fn ccw_distance(&self, other: &Angle) -> BigRational {
        other.sub(self).0
    }

    /// The 1 - self reflection (complex conjugation on rays).
    pub fn conjugate(&self) -> Angle {
        Angle::from_ratio(-self.0.clone())
    }

    /// Exponent of 2 in the reduced denominator.
    pub fn preperiod(&self) -> u64 {
        self.denom().trailing_zeros().unwrap_or(0)
    }

    /// Doubling period: multiplicative order of 2 modulo the odd part of
    /// the denominator.
    pub fn period(&self) -> u64 {
        let odd = self.denom().magnitude() >> self.preperiod();
        multiplicative_order_of_two(&odd)
    }

    pub fn is_periodic(&self) -> bool {
        self.preperiod() == 0
    }

    pub fn orbit_class(&self) -> OrbitClass {
        let preperiod = self.preperiod() as usize;
        let period = self.period() as usize;
        let mut orbit = Vec::with_capacity(preperiod + period + 1);
        let mut a = self.clone();
        for _ in 0..=preperiod + period {
            let next = a.double();
            orbit.push(a);
            a = next;
        }
        OrbitClass {
            preperiod,
            period,
            orbit,
        }
    }

    /// Canonical binary expansion. Digit `n` is 0 iff `2^(n-1) a mod 1`
    /// lies in `[0, 1/2)`, so dyadic angles end in `0̄`.
    pub fn to_expansion(&self) -> BinaryExpansion {
        let l = self.preperiod() as usize;
        let p = self.period() as usize;
        let digits = itinerary_digits(self, l + p);
        let period_word = digits[l..].to_vec();
        let mut preperiod_word = digits;
        preperiod_word.truncate(l);
        BinaryExpansion {
            preperiod_word,
            period_word,
        }
    }

    /// Inverse of [`Angle::to_expansion`]; also accepts non-canonical
    /// expansions (non-primitive period, overlong preperiod).
    pub fn from_expansion(e: &BinaryExpansion) -> Angle {
        angle_from_digits(&e.preperiod_word, &e.period_word)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Angle({self})")
    }
}

impl FromStr for Angle {
    type Err = AngleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || AngleError::Parse(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                Angle::new(n, d)
            }
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Angle::new(n, 1)
            }
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn multiplicative_order_of_two(m: &BigUint) -> u64 {
    if m.is_one() {
        return 1;
    }
    if let Some(m) = m.to_u64() {
        let m = m as u128;
        let mut r: u128 = 2 % m;
        let mut k = 1u64;
        while r != 1 {
            r = (r * 2) % m;
            k += 1;
        }
        return k;
    }
    let two = BigUint::from(2u32);
    let mut r = &two % m;
    let mut k = 1u64;
    while !r.is_one() {
        r = (r * 2u32) % m;
        k += 1;
    }
    k
}

/// First `count` itinerary digits of `a` with respect to `[0,1/2) | [1/2,1)`.
pub(crate) fn itinerary_digits(a: &Angle, count: usize) -> Vec<u8> {
    let mut digits = Vec::with_capacity(count);
    if let (Some(n), Some(d)) = (a.numer().to_u64(), a.denom().to_u64()) {
        let d = d as u128;
        let mut r = n as u128;
        for _ in 0..count {
            let twice = 2 * r;
            if twice >= d {
                digits.push(1);
                r = twice - d;
            } else {
                digits.push(0);
                r = twice;
            }
        }
        return digits;
    }
    let d = a.denom().magnitude().clone();
    let mut r = a.numer().magnitude().clone();
    for _ in 0..count {
        r <<= 1;
        if r >= d {
            digits.push(1);
            r -= &d;
        } else {
            digits.push(0);
        }
    }
    digits
}

fn word_value(word: &[u8]) -> BigUint {
    if word.is_empty() {
        return BigUint::zero();
    }
    BigUint::from_radix_be(word, 2).expect("digits are 0/1")
}

pub(crate) fn angle_from_digits(pre: &[u8], per: &[u8]) -> Angle {
    let l = pre.len();
    let p = per.len();
    let mersenne: BigUint = (BigUint::one() << p) - 1u32;
    let num = word_value(pre) * &mersenne + word_value(per);
    let den = mersenne << l;
    Angle::from_ratio(BigRational::new(
        BigInt::from_biguint(Sign::Plus, num),
        BigInt::from_biguint(Sign::Plus, den),
    ))
}

/// Doubling orbit of a rational angle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitClass {
    pub preperiod: usize,
    pub period: usize,
    /// `preperiod + period + 1` entries; the last repeats `orbit[preperiod]`.
    pub orbit: Vec<Angle>,
}

/// Eventually periodic binary digit sequence `pre (per)^∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryExpansion {
    pub preperiod_word: Vec<u8>,
    pub period_word: Vec<u8>,
}

impl BinaryExpansion {
    /// Builds an expansion from digit strings such as `"001"`, `"100"`.
    pub fn parse(preperiod: &str, period: &str) -> Result<Self, AngleError> {
        let preperiod_word = parse_digits(preperiod)?;
        let period_word = parse_digits(period)?;
        if period_word.is_empty() {
            return Err(AngleError::EmptyPeriod);
        }
        Ok(BinaryExpansion {
            preperiod_word,
            period_word,
        })
    }

    pub fn canonical(&self) -> BinaryExpansion {
        Angle::from_expansion(self).to_expansion()
    }

    /// Primitive period and minimal preperiod.
    pub fn is_canonical(&self) -> bool {
        let p = self.period_word.len();
        let primitive = (1..p)
            .filter(|d| p.is_multiple_of(*d))
            .all(|d| (0..p).any(|i| self.period_word[i] != self.period_word[(i + d) % p]));
        let minimal = match self.preperiod_word.last() {
            None => true,
            Some(last) => *last != self.period_word[p - 1],
        };
        let not_all_ones = !self.period_word.iter().all(|d| *d == 1);
        p > 0 && primitive && minimal && not_all_ones
    }
}

pub fn parse_digits(s: &str) -> Result<Vec<u8>, AngleError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(AngleError::Digits(s.to_string())),
        })
        .collect()
}

pub fn digits_to_string(d: &[u8]) -> String {
    d.iter().map(|x| if *x == 0 { '0' } else { '1' }).collect()
}

impl fmt::Display for BinaryExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "0.{}({})",
            digits_to_string(&self.preperiod_word),
            digits_to_string(&self.period_word)
        )
    }
}

/// `true` iff `x` lies strictly inside the counterclockwise arc from `a`
/// to `b`. Degenerate arcs (`a == b`) contain nothing.
pub fn strictly_between(a: &Angle, x: &Angle, b: &Angle) -> bool {
    if a == b {
        return false;
    }
    let to_x = a.ccw_distance(x);
    let to_b = a.ccw_distance(b);
    !to_x.is_zero() && to_x < to_b
}

/// A connected piece of the circle swept counterclockwise from `start` to
/// `end`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arc {
    pub start: Angle,
    pub end: Angle,
    pub includes_start: bool,
    pub includes_end: bool,
}

/// Result of doubling an arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArcImage {
    Arc(Arc),
    CoversCircle,
}

impl Arc {
    pub fn open(start: Angle, end: Angle) -> Self {
        Arc {
            start,
            end,
            includes_start: false,
            includes_end: false,
        }
    }

    pub fn closed(start: Angle, end: Angle) -> Self {
        Arc {
            start,
            end,
            includes_start: true,
            includes_end: true,
        }
    }

    /// Counterclockwise length; zero for degenerate arcs.
    pub fn length(&self) -> BigRational {
        self.start.ccw_distance(&self.end)
    }

    pub fn has_interior(&self) -> bool {
        self.start != self.end
    }

    pub fn contains(&self, a: &Angle) -> bool {
        if a == &self.start {
            return self.includes_start;
        }
        if a == &self.end {
            return self.includes_end;
        }
        strictly_between(&self.start, a, &self.end)
    }

    /// True when points immediately counterclockwise of `a` belong to the
    /// arc.
    fn contains_right_of(&self, a: &Angle) -> bool {
        self.has_interior() && (a == &self.start || strictly_between(&self.start, a, &self.end))
    }

    /// Exact test for a nonempty intersection.
    pub fn meets(&self, other: &Arc) -> bool {
        // Every component of the intersection of two arcs begins at one of
        // the two start points (or is a shared closed endpoint).
        if self.has_interior() && other.contains_right_of(&self.start) {
            return true;
        }
        if other.has_interior() && self.contains_right_of(&other.start) {
            return true;
        }
        let endpoints = [
            (&self.start, self.includes_start),
            (&self.end, self.includes_end),
        ];
        if endpoints.iter().any(|(p, inc)| *inc && other.contains(p)) {
            return true;
        }
        let endpoints = [
            (&other.start, other.includes_start),
            (&other.end, other.includes_end),
        ];
        endpoints.iter().any(|(p, inc)| *inc && self.contains(p))
    }

    pub fn image_under_doubling(&self) -> ArcImage {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        if self.length() >= half {
            return ArcImage::CoversCircle;
        }
        ArcImage::Arc(Arc {
            start: self.start.double(),
            end: self.end.double(),
            includes_start: self.includes_start,
            includes_end: self.includes_end,
        })
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.includes_start { '[' } else { '(' },
            self.start,
            self.end,
            if self.includes_end { ']' } else { ')' }
        )
    }
}

/// `|x - y|` as an `f64`, computed exactly before rounding.
pub fn abs_difference(x: &Angle, y: &Angle) -> f64 {
    ratio_to_f64(&(x.as_ratio() - y.as_ratio()).abs())
}

/// Natural log of `|x - y|`; finite for any nonzero gap, however small.
pub fn ln_abs_difference(x: &Angle, y: &Angle) -> f64 {
    let d = (x.as_ratio() - y.as_ratio()).abs();
    ln_magnitude(d.numer()) - ln_magnitude(d.denom())
}

fn ln_magnitude(n: &BigInt) -> f64 {
    let shift = n.bits().saturating_sub(60);
    let top = (n.magnitude() >> shift).to_f64().unwrap_or(0.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    let sn = n.bits().saturating_sub(60);
    let sd = d.bits().saturating_sub(60);
    let nf = (n >> sn).to_f64().unwrap_or(0.0);
    let df = (d >> sd).to_f64().unwrap_or(1.0);
    let e = sn as i64 - sd as i64;
    nf / df * 2f64.powi(e.clamp(-2000, 2000) as i32)
}
