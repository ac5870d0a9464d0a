//! Exact orbits of piecewise doubling maps without gcd reductions.
//!
//! Every point of an orbit is written `num / (2^exp · q)` for one odd `q`
//! chosen up front, so that affine steps are shifts, additions and a
//! bounded reduction.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use crate::angle::Angle;

use super::pwmap::PiecewiseDoublingMap;

/// `num / (2^exp · q)` with `num < 2^exp · q`, and `num` odd unless
/// `exp = 0`, which makes the representation unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Scaled {
    num: BigUint,
    exp: u32,
}

struct ScaledPiece {
    start: Scaled,
    end: Scaled,
    log2_slope: i32,
    image_start: Scaled,
}

pub(crate) enum Orbit {
    Closed { digits: Vec<u8>, loop_start: usize },
    Capped,
}

struct ScaledMap {
    q: BigUint,
    pieces: Vec<ScaledPiece>,
}

fn split_denominator(a: &Angle) -> (BigUint, u32, BigUint) {
    let den = a.denom().magnitude().clone();
    let exp = den.trailing_zeros().unwrap_or(0) as u32;
    let odd = &den >> exp;
    (a.numer().magnitude().clone(), exp, odd)
}

impl ScaledMap {
    fn new(map: &PiecewiseDoublingMap, t: &Angle) -> Self {
        let mut q = split_denominator(t).2;
        for p in map.pieces() {
            for a in [&p.start, &p.end, &p.image_start] {
                q = q.lcm(&split_denominator(a).2);
            }
        }
        let mut scaled = ScaledMap {
            q,
            pieces: Vec::new(),
        };
        scaled.pieces = map
            .pieces()
            .iter()
            .map(|p| ScaledPiece {
                start: scaled.scale(&p.start),
                end: scaled.scale(&p.end),
                log2_slope: p.log2_slope,
                image_start: scaled.scale(&p.image_start),
            })
            .collect();
        scaled
    }

    fn scale(&self, a: &Angle) -> Scaled {
        let (num, exp, odd) = split_denominator(a);
        self.normalize(num * (&self.q / odd), exp)
    }

    fn modulus(&self, exp: u32) -> BigUint {
        &self.q << exp
    }

    fn normalize(&self, num: BigUint, exp: u32) -> Scaled {
        let m = self.modulus(exp);
        let mut num = if num >= m { num % &m } else { num };
        let mut exp = exp;
        if num.is_zero() {
            exp = 0;
        } else {
            let shift = num.trailing_zeros().unwrap_or(0).min(exp as u64) as u32;
            num >>= shift;
            exp -= shift;
        }
        Scaled { num, exp }
    }

    /// Numerator of `x` over `2^exp · q`, for `exp ≥ x.exp`.
    fn lift(x: &Scaled, exp: u32) -> BigUint {
        &x.num << (exp - x.exp)
    }

    fn less(&self, x: &Scaled, y: &Scaled) -> bool {
        let e = x.exp.max(y.exp);
        Self::lift(x, e) < Self::lift(y, e)
    }

    fn upper_half(&self, x: &Scaled) -> bool {
        (&x.num << 1u32) >= self.modulus(x.exp)
    }

    fn contains(&self, p: &ScaledPiece, x: &Scaled) -> bool {
        let after_start = !self.less(x, &p.start);
        let before_end = self.less(x, &p.end);
        if self.less(&p.start, &p.end) {
            after_start && before_end
        } else {
            after_start || before_end
        }
    }

    fn eval(&self, x: &Scaled) -> Scaled {
        let Some(p) = self.pieces.iter().find(|p| self.contains(p, x)) else {
            return if x.exp > 0 {
                self.normalize(x.num.clone(), x.exp - 1)
            } else {
                self.normalize(&x.num << 1u32, 0)
            };
        };
        let base = x.exp.max(p.start.exp).max(p.image_start.exp);
        let m = self.modulus(base);
        let (xs, ss) = (Self::lift(x, base), Self::lift(&p.start, base));
        let offset = if xs >= ss { xs - ss } else { xs + &m - ss };
        if p.log2_slope >= 0 {
            let image = Self::lift(&p.image_start, base) + (offset << p.log2_slope as u32);
            self.normalize(image, base)
        } else {
            let exp = base + p.log2_slope.unsigned_abs();
            self.normalize(Self::lift(&p.image_start, exp) + offset, exp)
        }
    }
}

/// Binary digits (`1` on `[1/2, 1)`) of the orbit of `t` under `map` up to
/// its first repeated point, giving up after `cap` distinct points.
pub(crate) fn orbit_digits(map: &PiecewiseDoublingMap, t: &Angle, cap: usize) -> Orbit {
    let scaled = ScaledMap::new(map, t);
    let mut x = scaled.scale(t);
    let mut seen: HashMap<Scaled, usize> = HashMap::new();
    let mut digits = Vec::new();
    loop {
        if let Some(&loop_start) = seen.get(&x) {
            return Orbit::Closed { digits, loop_start };
        }
        if seen.len() >= cap {
            return Orbit::Capped;
        }
        digits.push(scaled.upper_half(&x) as u8);
        let next = scaled.eval(&x);
        seen.insert(x, digits.len() - 1);
        x = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: i64, d: i64) -> Angle {
        Angle::new(n, d).unwrap()
    }

    fn unscale(m: &ScaledMap, x: &Scaled) -> Angle {
        Angle::from_ratio(num_rational::BigRational::new(
            x.num.clone().into(),
            m.modulus(x.exp).into(),
        ))
    }

    #[test]
    fn scaled_doubling_matches_exact() {
        let map = PiecewiseDoublingMap::doubling();
        let m = ScaledMap::new(&map, &a(5, 24));
        let mut x = m.scale(&a(5, 24));
        let mut exact = a(5, 24);
        for _ in 0..6 {
            assert_eq!(unscale(&m, &x), exact);
            x = m.eval(&x);
            exact = exact.double();
        }
        assert!(m.upper_half(&m.scale(&a(1, 2))));
        assert!(!m.upper_half(&m.scale(&a(5, 12))));
    }

    #[test]
    fn representation_is_canonical() {
        let m = ScaledMap::new(&PiecewiseDoublingMap::doubling(), &a(1, 3));
        let zero = Scaled {
            num: BigUint::zero(),
            exp: 0,
        };
        assert_eq!(m.scale(&Angle::zero()), zero);
        assert_eq!(m.normalize(m.modulus(4), 4), zero);
        assert_eq!(m.normalize(BigUint::from(16u32), 4), m.scale(&a(1, 3)));
    }

    #[test]
    fn scaled_map_matches_exact_pieces() {
        let theta = [
            a(11, 56),
            a(199, 1008),
            a(103, 504),
            a(23, 112),
            a(29, 112),
            a(131, 504),
            a(269, 1008),
            a(15, 56),
        ];
        let cfg = crate::surgery::validate_config(theta).unwrap();
        for map in [
            crate::surgery::build_forward_map(&cfg).unwrap(),
            crate::surgery::build_backward_map(&cfg).unwrap(),
        ] {
            for t in [
                a(11, 56),
                a(25, 127),
                a(1, 5),
                a(1000, 4999),
                a(3, 4),
                a(45, 224),
            ] {
                let m = ScaledMap::new(&map, &t);
                let mut x = m.scale(&t);
                let mut exact = t.clone();
                for _ in 0..40 {
                    assert_eq!(unscale(&m, &x), exact, "orbit of {t}");
                    x = m.eval(&x);
                    exact = map.eval(&exact);
                }
            }
        }
    }
}
