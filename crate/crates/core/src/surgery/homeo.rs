use std::collections::HashMap;
use std::sync::{Arc as Shared, Mutex};

use thiserror::Error;

use crate::angle::{angle_from_digits, ln_abs_difference, Angle, Arc};

use super::config::{ConfigError, EdgeConfig, HolderData, Side};
use super::orbit::{orbit_digits, Orbit};
use super::pwmap::{build_backward_map, build_forward_map, PiecewiseDoublingMap};

/// Orbit length after which the itinerary search gives up.
pub const DEFAULT_CYCLE_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurgeryError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("orbit of {angle} did not close within {cap} iterations")]
    NoCycle { angle: Angle, cap: usize },
    #[error("conjugacy identity failed at {angle}")]
    ConjugacyViolation { angle: Angle },
    #[error("fundamental domains are not nested at n = {n}")]
    DomainOrder { n: i64 },
}

/// `H(t)` for the map `G`: the binary number whose `n`-th digit records
/// whether `G^(n-1)(t)` lies in `[1/2, 1)`. Returns the conjugacy
/// `H ∘ G = 2 H` evaluated exactly; the identity is re-checked on the
/// result.
pub fn conjugacy_image(map: &PiecewiseDoublingMap, t: &Angle) -> Result<Angle, SurgeryError> {
    conjugacy_image_capped(map, t, DEFAULT_CYCLE_CAP)
}

pub fn conjugacy_image_capped(
    map: &PiecewiseDoublingMap,
    t: &Angle,
    cap: usize,
) -> Result<Angle, SurgeryError> {
    let Orbit::Closed { digits, loop_start } = orbit_digits(map, t, cap) else {
        return Err(SurgeryError::NoCycle {
            angle: t.clone(),
            cap,
        });
    };
    let (pre, per) = digits.split_at(loop_start);
    let image = angle_from_digits(pre, per);
    let shifted = if pre.is_empty() {
        let mut rotated = per.to_vec();
        rotated.rotate_left(1);
        angle_from_digits(&[], &rotated)
    } else {
        angle_from_digits(&pre[1..], per)
    };
    if shifted != image.double() {
        return Err(SurgeryError::ConjugacyViolation { angle: t.clone() });
    }
    Ok(image)
}

/// A pair of angles bounding the `n`-th fundamental domain on each side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainPair {
    pub n: i64,
    pub minus: Angle,
    pub plus: Angle,
}

/// One sample of the local scaling of `H` near a vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSample {
    pub n: u32,
    pub ln_gap: f64,
    pub ln_image_gap: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    /// `Θ1-`, approached by backward iterates.
    Outer,
    /// `Θ4-`, approached by forward iterates.
    Inner,
}

/// Action of the surgery homeomorphism on external angles: `H` on the
/// closed edge arcs and the identity elsewhere.
#[derive(Debug)]
pub struct SurgeryHomeo {
    config: EdgeConfig,
    forward: PiecewiseDoublingMap,
    backward: PiecewiseDoublingMap,
    support: [Arc; 2],
    cycle_cap: usize,
    memo: Mutex<HashMap<(bool, Angle), Angle>>,
}

impl SurgeryHomeo {
    pub fn new(config: EdgeConfig) -> Result<Self, SurgeryError> {
        Self::with_cycle_cap(config, DEFAULT_CYCLE_CAP)
    }

    pub fn with_cycle_cap(config: EdgeConfig, cycle_cap: usize) -> Result<Self, SurgeryError> {
        let forward = build_forward_map(&config)?;
        let backward = build_backward_map(&config)?;
        let support = config.closed_edge_arcs();
        Ok(SurgeryHomeo {
            config,
            forward,
            backward,
            support,
            cycle_cap,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn into_shared(self) -> Shared<Self> {
        Shared::new(self)
    }

    pub fn config(&self) -> &EdgeConfig {
        &self.config
    }

    pub fn forward_map(&self) -> &PiecewiseDoublingMap {
        &self.forward
    }

    pub fn backward_map(&self) -> &PiecewiseDoublingMap {
        &self.backward
    }

    pub fn support(&self) -> &[Arc; 2] {
        &self.support
    }

    pub fn in_support(&self, t: &Angle) -> bool {
        self.support.iter().any(|a| a.contains(t))
    }

    fn conjugate_with(&self, inverse: bool, t: &Angle) -> Result<Angle, SurgeryError> {
        let key = (inverse, t.clone());
        if let Some(v) = self.memo.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let map = if inverse {
            &self.backward
        } else {
            &self.forward
        };
        let v = conjugacy_image_capped(map, t, self.cycle_cap)?;
        self.memo.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// `H(t)` on the whole circle (not restricted to the support).
    pub fn conjugacy(&self, t: &Angle) -> Result<Angle, SurgeryError> {
        self.conjugate_with(false, t)
    }

    /// `H^-1(t)`, computed as the conjugacy of `G̃`.
    pub fn inverse_conjugacy(&self, t: &Angle) -> Result<Angle, SurgeryError> {
        self.conjugate_with(true, t)
    }

    /// `h^n` on angles: `H^n` inside the closed edge arcs, identity outside.
    pub fn map_angle(&self, t: &Angle, n: i64) -> Result<Angle, SurgeryError> {
        if !self.in_support(t) {
            return Ok(t.clone());
        }
        let mut x = t.clone();
        for _ in 0..n.unsigned_abs() {
            x = if n > 0 {
                self.conjugacy(&x)?
            } else {
                self.inverse_conjugacy(&x)?
            };
        }
        Ok(x)
    }

    /// `(h^n(Θ2-), h^n(Θ2+))` for `-n_max ≤ n ≤ n_max`, checked to be
    /// strictly nested towards `Θ4±` as `n` grows and towards `Θ1±` as `n`
    /// decreases.
    pub fn fundamental_domains(&self, n_max: u32) -> Result<Vec<DomainPair>, SurgeryError> {
        let start = (
            self.config.theta(2, Side::Minus).clone(),
            self.config.theta(2, Side::Plus).clone(),
        );
        let mut backward = Vec::new();
        let mut cur = start.clone();
        for n in 1..=n_max as i64 {
            cur = (
                self.inverse_conjugacy(&cur.0)?,
                self.inverse_conjugacy(&cur.1)?,
            );
            backward.push(DomainPair {
                n: -n,
                minus: cur.0.clone(),
                plus: cur.1.clone(),
            });
        }
        backward.reverse();
        let mut pairs = backward;
        pairs.push(DomainPair {
            n: 0,
            minus: start.0.clone(),
            plus: start.1.clone(),
        });
        let mut cur = start;
        for n in 1..=n_max as i64 {
            cur = (self.conjugacy(&cur.0)?, self.conjugacy(&cur.1)?);
            pairs.push(DomainPair {
                n,
                minus: cur.0.clone(),
                plus: cur.1.clone(),
            });
        }
        self.check_nested(&pairs)?;
        Ok(pairs)
    }

    fn check_nested(&self, pairs: &[DomainPair]) -> Result<(), SurgeryError> {
        let [minus_arc, plus_arc] = self.config.edge_arcs();
        for (i, p) in pairs.iter().enumerate() {
            if !minus_arc.contains(&p.minus) || !plus_arc.contains(&p.plus) {
                return Err(SurgeryError::DomainOrder { n: p.n });
            }
            if i > 0 {
                let q = &pairs[i - 1];
                if q.minus >= p.minus || q.plus <= p.plus {
                    return Err(SurgeryError::DomainOrder { n: p.n });
                }
            }
        }
        Ok(())
    }

    pub fn holder_data(&self) -> HolderData {
        self.config.holder_data()
    }

    /// Ratios `ln|H(x) - H(y)| / ln|x - y|` for consecutive domain
    /// endpoints `x = h^-n(Θ2-)` near `Θ1-` or `x = h^n(Θ2-)` near `Θ4-`.
    pub fn scaling_exponents(
        &self,
        vertex: Vertex,
        count: u32,
    ) -> Result<Vec<ScalingSample>, SurgeryError> {
        let step = |x: &Angle| match vertex {
            Vertex::Outer => self.inverse_conjugacy(x),
            Vertex::Inner => self.conjugacy(x),
        };
        // orbit[j] = h^(∓j)(Θ2-); H maps orbit[j] to orbit[j - 1] near Θ1-
        // and to orbit[j + 1] near Θ4-
        let mut orbit = vec![self.config.theta(2, Side::Minus).clone()];
        for _ in 0..=count + 1 {
            let next = step(orbit.last().unwrap())?;
            orbit.push(next);
        }
        let mut samples = Vec::new();
        for n in 1..=count {
            let j = n as usize;
            let (x, y) = (&orbit[j], &orbit[j + 1]);
            let (hx, hy) = match vertex {
                Vertex::Outer => (&orbit[j - 1], &orbit[j]),
                Vertex::Inner => (&orbit[j + 1], &orbit[j + 2]),
            };
            let ln_gap = ln_abs_difference(x, y);
            let ln_image_gap = ln_abs_difference(hx, hy);
            samples.push(ScalingSample {
                n,
                ln_gap,
                ln_image_gap,
                exponent: ln_image_gap / ln_gap,
            });
        }
        Ok(samples)
    }
}

/// Composable actions on angles built from surgery homeomorphisms.
#[derive(Debug, Clone)]
pub enum AngleMap {
    Identity,
    Power(Shared<SurgeryHomeo>, i64),
    /// Applied left to right.
    Sequence(Vec<AngleMap>),
}

impl AngleMap {
    pub fn power(h: Shared<SurgeryHomeo>, n: i64) -> Self {
        AngleMap::Power(h, n)
    }

    pub fn apply(&self, t: &Angle) -> Result<Angle, SurgeryError> {
        match self {
            AngleMap::Identity => Ok(t.clone()),
            AngleMap::Power(h, n) => h.map_angle(t, *n),
            AngleMap::Sequence(maps) => {
                let mut x = t.clone();
                for m in maps {
                    x = m.apply(&x)?;
                }
                Ok(x)
            }
        }
    }

    /// `self ∘ inner`.
    pub fn after(self, inner: AngleMap) -> AngleMap {
        AngleMap::Sequence(vec![inner, self])
    }

    pub fn inverse(&self) -> AngleMap {
        match self {
            AngleMap::Identity => AngleMap::Identity,
            AngleMap::Power(h, n) => AngleMap::Power(h.clone(), -n),
            AngleMap::Sequence(maps) => {
                AngleMap::Sequence(maps.iter().rev().map(AngleMap::inverse).collect())
            }
        }
    }

    /// Closed arcs outside of which the map is the identity.
    pub fn support(&self) -> Vec<Arc> {
        match self {
            AngleMap::Identity | AngleMap::Power(_, 0) => Vec::new(),
            AngleMap::Power(h, _) => h.support().to_vec(),
            AngleMap::Sequence(maps) => maps.iter().flat_map(AngleMap::support).collect(),
        }
    }

    /// Disjoint supports imply that the two maps commute.
    pub fn supports_disjoint(&self, other: &AngleMap) -> bool {
        let theirs = other.support();
        self.support()
            .iter()
            .all(|a| theirs.iter().all(|b| !a.meets(b)))
    }
}
