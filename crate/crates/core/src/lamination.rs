//! Which rational parameter rays land together.
//!
//! Periodic angles are paired by Lavaurs' procedure: proceeding by
//! increasing period, the smallest unpaired angle of period `p` is joined to
//! the next angle of period `p` whose chord crosses no chord drawn before.
//!
//! Preperiodic angles `t1`, `t2` co-land in the parameter plane iff the
//! dynamic rays at those angles co-land at the critical value of
//! `c = γ_M(t1)`. That is decided by itineraries relative to the diameter
//! `{t1/2, t1/2 + 1/2}` whose endpoints both land at the critical point.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::Bound;
use std::sync::{Arc as Shared, Mutex, OnceLock};

use thiserror::Error;

use crate::angle::{strictly_between, Angle};

/// Default cap on the period handled by [`build_lamination`].
pub const DEFAULT_MAX_PERIOD: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaminationError {
    #[error("angle {0} is not periodic under doubling")]
    NotPeriodic(Angle),
    #[error("angle 0 lands at the cusp and has no partner")]
    ZeroAngle,
    #[error("period {period} exceeds the configured bound {bound}")]
    PeriodTooLarge { period: u64, bound: u32 },
    #[error("pairing failed for {0}: no admissible partner")]
    NoPartner(Angle),
}

/// A chord joining two co-landing periodic angles, `low < high`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Leaf {
    pub low: Angle,
    pub high: Angle,
    pub period: u32,
}

impl Leaf {
    /// True iff the two chords cross in the open disk.
    pub fn links(&self, other: &Leaf) -> bool {
        let inside = |x: &Angle| strictly_between(&self.low, x, &self.high);
        let shared = [&other.low, &other.high]
            .iter()
            .any(|x| **x == self.low || **x == self.high);
        !shared && inside(&other.low) != inside(&other.high)
    }
}

#[derive(Debug, Clone)]
pub struct Lamination {
    pub leaves: Vec<Leaf>,
    pub max_period: u32,
    partner: HashMap<Angle, Angle>,
}

impl Lamination {
    pub fn partner(&self, t: &Angle) -> Option<&Angle> {
        self.partner.get(t)
    }

    /// One leaf per line as `p1/q1 p2/q2`, sorted by period then low end.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for leaf in &self.leaves {
            let _ = writeln!(out, "{} {}", leaf.low, leaf.high);
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Slot {
    Low(Angle),
    High,
    Unpaired,
}

/// Numerators `k` of the angles `k / (2^p - 1)` with exact period `p`.
fn exact_period_words(p: u32) -> impl Iterator<Item = u64> {
    let mask = (1u64 << p) - 1;
    let rotate = move |k: u64, d: u32| ((k << d) | (k >> (p - d))) & mask;
    (1..mask).filter(move |&k| {
        (1..p)
            .filter(|d| p.is_multiple_of(*d))
            .all(|d| rotate(k, d) != k)
    })
}

pub fn build_lamination(max_period: u32) -> Result<Lamination, LaminationError> {
    build_lamination_bounded(max_period, DEFAULT_MAX_PERIOD)
}

pub fn build_lamination_bounded(
    max_period: u32,
    bound: u32,
) -> Result<Lamination, LaminationError> {
    if max_period > bound || max_period > 63 {
        return Err(LaminationError::PeriodTooLarge {
            period: max_period as u64,
            bound,
        });
    }
    let mut points: BTreeMap<Angle, Slot> = BTreeMap::new();
    let mut leaves = Vec::new();
    for p in 2..=max_period {
        let den = (1u64 << p) - 1;
        let candidates: Vec<Angle> = exact_period_words(p)
            .map(|k| Angle::new(k, den).expect("nonzero denominator"))
            .collect();
        for a in &candidates {
            points.insert(a.clone(), Slot::Unpaired);
        }
        for a in &candidates {
            if !matches!(points.get(a), Some(Slot::Unpaired)) {
                continue;
            }
            let b = scan_for_partner(&points, a)?;
            points.insert(a.clone(), Slot::Low(b.clone()));
            points.insert(b.clone(), Slot::High);
            leaves.push(Leaf {
                low: a.clone(),
                high: b,
                period: p,
            });
        }
    }
    let mut partner = HashMap::with_capacity(2 * leaves.len());
    for leaf in &leaves {
        partner.insert(leaf.low.clone(), leaf.high.clone());
        partner.insert(leaf.high.clone(), leaf.low.clone());
    }
    Ok(Lamination {
        leaves,
        max_period,
        partner,
    })
}

fn scan_for_partner(points: &BTreeMap<Angle, Slot>, a: &Angle) -> Result<Angle, LaminationError> {
    let mut cursor = a.clone();
    loop {
        let next = points
            .range((Bound::Excluded(&cursor), Bound::Unbounded))
            .next();
        match next {
            // nested chord: the partner cannot lie under it
            Some((_, Slot::Low(high))) => cursor = high.clone(),
            Some((x, Slot::Unpaired)) => return Ok(x.clone()),
            Some((_, Slot::High)) | None => return Err(LaminationError::NoPartner(a.clone())),
        }
    }
}

fn cached_lamination(period: u32) -> Result<Shared<Lamination>, LaminationError> {
    static CACHE: OnceLock<Mutex<Option<Shared<Lamination>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(None));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(lam) = guard.as_ref() {
        if lam.max_period >= period {
            return Ok(lam.clone());
        }
    }
    let lam = Shared::new(build_lamination(period)?);
    *guard = Some(lam.clone());
    Ok(lam)
}

/// Period of a periodic angle, i.e. the period of the hyperbolic component
/// at whose root its parameter ray lands.
pub fn component_period(t: &Angle) -> Result<u64, LaminationError> {
    if !t.is_periodic() {
        return Err(LaminationError::NotPeriodic(t.clone()));
    }
    Ok(t.period())
}

/// The other angle whose parameter ray lands at the same root as `t`.
pub fn conjugate_periodic_angle(t: &Angle) -> Result<Angle, LaminationError> {
    if t.is_zero() {
        return Err(LaminationError::ZeroAngle);
    }
    let p = component_period(t)?;
    if p > DEFAULT_MAX_PERIOD as u64 {
        return Err(LaminationError::PeriodTooLarge {
            period: p,
            bound: DEFAULT_MAX_PERIOD,
        });
    }
    let lam = cached_lamination(p as u32)?;
    lam.partner(t)
        .cloned()
        .ok_or_else(|| LaminationError::NoPartner(t.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symbol {
    A,
    B,
    Star,
}

fn itinerary(reference: &Angle, x: &Angle, len: usize) -> Vec<Symbol> {
    let d0 = Angle::from_ratio(reference.as_ratio() / num_bigint::BigInt::from(2));
    let d1 = d0.add_half();
    let mut x = x.clone();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let s = if x == d0 || x == d1 {
            Symbol::Star
        } else if strictly_between(&d0, &x, &d1) {
            Symbol::A
        } else {
            Symbol::B
        };
        out.push(s);
        x = x.double();
    }
    out
}

/// Whether the parameter rays at `t1` and `t2` land at the same point.
///
/// Periodic inputs need period at most [`DEFAULT_MAX_PERIOD`]; larger
/// periods return an error rather than a guess.
pub fn colanding(t1: &Angle, t2: &Angle) -> Result<bool, LaminationError> {
    if t1 == t2 {
        return Ok(true);
    }
    match (t1.is_periodic(), t2.is_periodic()) {
        (true, true) => {
            if t1.is_zero() || t2.is_zero() {
                return Ok(false);
            }
            if t1.period() != t2.period() {
                return Ok(false);
            }
            Ok(&conjugate_periodic_angle(t1)? == t2)
        }
        (false, false) => {
            let (l1, p1) = (t1.preperiod(), t1.period());
            if (l1, p1) != (t2.preperiod(), t2.period()) {
                return Ok(false);
            }
            let len = (l1 + p1) as usize;
            Ok(itinerary(t1, t1, len) == itinerary(t1, t2, len))
        }
        _ => Ok(false),
    }
}

/// Iterator over all angles `k/(2^p - 1)` of exact period `p`.
pub fn angles_of_period(p: u32) -> impl Iterator<Item = Angle> {
    let den = (1u64 << p) - 1;
    exact_period_words(p).map(move |k| Angle::new(k, den).expect("nonzero denominator"))
}
