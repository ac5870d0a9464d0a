use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::angle::{Angle, Arc};

use super::config::{ConfigError, EdgeConfig, Side, Sign, Strip};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("pieces {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("piece {0} has an empty domain")]
    EmptyPiece(usize),
    #[error("map is discontinuous at {0}")]
    Discontinuous(Angle),
    #[error("total degree is {0}, expected 2")]
    Degree(String),
}

fn pow2(e: i32) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(2));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base, (-e) as usize).recip()
    }
}

/// Affine circle map `x ↦ image_start + 2^log2_slope (x - start)` on the
/// half-open arc `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePiece {
    pub start: Angle,
    pub end: Angle,
    pub log2_slope: i32,
    pub image_start: Angle,
}

impl AffinePiece {
    pub fn slope(&self) -> BigRational {
        pow2(self.log2_slope)
    }

    pub fn length(&self) -> BigRational {
        self.start.ccw_distance(&self.end)
    }

    pub fn domain(&self) -> Arc {
        Arc {
            start: self.start.clone(),
            end: self.end.clone(),
            includes_start: true,
            includes_end: false,
        }
    }

    pub fn contains(&self, x: &Angle) -> bool {
        self.domain().contains(x)
    }

    /// Evaluates the affine formula; meaningful on the closed domain.
    pub fn eval(&self, x: &Angle) -> Angle {
        let offset = self.start.ccw_distance(x) * self.slope();
        Angle::from_ratio(self.image_start.as_ratio() + offset)
    }

    pub fn image_end(&self) -> Angle {
        self.eval(&self.end)
    }
}

impl fmt::Display for AffinePiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}) -> {} + 2^{} (x - {})",
            self.start, self.end, self.image_start, self.log2_slope, self.start
        )
    }
}

/// Angle doubling modified by affine pieces on finitely many arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseDoublingMap {
    pieces: Vec<AffinePiece>,
}

impl PiecewiseDoublingMap {
    pub fn doubling() -> Self {
        PiecewiseDoublingMap { pieces: Vec::new() }
    }

    /// Builds a map from disjoint pieces, requiring continuity and degree 2.
    pub fn from_pieces(pieces: Vec<AffinePiece>) -> Result<Self, MapError> {
        for (i, p) in pieces.iter().enumerate() {
            if p.start == p.end {
                return Err(MapError::EmptyPiece(i));
            }
        }
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                let (a, b) = (&pieces[i], &pieces[j]);
                let ai = Arc::open(a.start.clone(), a.end.clone());
                let bi = Arc::open(b.start.clone(), b.end.clone());
                if ai.meets(&bi) || a.start == b.start {
                    return Err(MapError::Overlap(i, j));
                }
            }
        }
        let map = PiecewiseDoublingMap { pieces };
        map.check_continuity()?;
        let degree = map.degree();
        if degree != BigRational::from_integer(BigInt::from(2)) {
            return Err(MapError::Degree(degree.to_string()));
        }
        Ok(map)
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    fn piece_at(&self, x: &Angle) -> Option<&AffinePiece> {
        self.pieces.iter().find(|p| p.contains(x))
    }

    pub fn eval(&self, x: &Angle) -> Angle {
        match self.piece_at(x) {
            Some(p) => p.eval(x),
            None => x.double(),
        }
    }

    /// Limit of the map approaching `x` clockwise.
    fn left_limit(&self, x: &Angle) -> Angle {
        match self.pieces.iter().find(|p| &p.end == x) {
            Some(p) => p.image_end(),
            None => match self.piece_at(x) {
                Some(p) if &p.start != x => p.eval(x),
                _ => x.double(),
            },
        }
    }

    fn check_continuity(&self) -> Result<(), MapError> {
        for x in self.breakpoints() {
            if self.left_limit(&x) != self.eval(&x) {
                return Err(MapError::Discontinuous(x));
            }
        }
        Ok(())
    }

    /// Exact degree: total signed length of the image of the circle.
    pub fn degree(&self) -> BigRational {
        let mut covered = BigRational::zero();
        let mut image = BigRational::zero();
        for p in &self.pieces {
            let len = p.length();
            image += &len * p.slope();
            covered += len;
        }
        image + (BigRational::one() - covered) * BigRational::from_integer(BigInt::from(2))
    }

    pub fn breakpoints(&self) -> Vec<Angle> {
        let mut pts: Vec<Angle> = self
            .pieces
            .iter()
            .flat_map(|p| [p.start.clone(), p.end.clone()])
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }
}

impl fmt::Display for PiecewiseDoublingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pieces {
            writeln!(f, "{p}")?;
        }
        write!(f, "doubling elsewhere")
    }
}

struct PieceLayout {
    strip: Strip,
    domain: (Angle, Angle),
    target: (Angle, Angle),
    k: u32,
    k_target: u32,
    sign: Sign,
}

/// `φ(x) = T0 + ((2^(k-1) x ± - 2^(kt-1) T0) mod 1) / 2^(kt-1)`, the
/// branch of `f^-(kt-1) ∘ ±f^(k-1)` landing in the target arc.
fn composed_branch(layout: &PieceLayout, x: &Angle) -> Angle {
    let t0 = &layout.target.0;
    let pushed = layout.sign.apply(&x.double_n(layout.k as u64 - 1));
    let base = t0.double_n(layout.k_target as u64 - 1);
    let offset = base.ccw_distance(&pushed) * pow2(1 - layout.k_target as i32);
    Angle::from_ratio(t0.as_ratio() + offset)
}

fn build_piece(layout: &PieceLayout) -> Result<AffinePiece, ConfigError> {
    let target_len = layout.target.0.ccw_distance(&layout.target.1);
    let branch_width = pow2(1 - layout.k_target as i32);
    if target_len >= branch_width {
        return Err(ConfigError::BranchAmbiguity {
            strip: layout.strip,
            length: target_len.to_string(),
            depth: layout.k_target - 1,
        });
    }
    let log2_slope = layout.k as i32 - layout.k_target as i32 + 1;
    let piece = AffinePiece {
        start: layout.domain.0.clone(),
        end: layout.domain.1.clone(),
        log2_slope,
        image_start: layout.target.0.double(),
    };
    let domain_len = layout.domain.0.ccw_distance(&layout.domain.1);
    if &domain_len * piece.slope() != &target_len * BigRational::from_integer(BigInt::from(2)) {
        return Err(ConfigError::AffineMismatch {
            strip: layout.strip,
            detail: format!(
                "slope 2^{log2_slope} does not carry {domain_len} onto 2 * {target_len}"
            ),
        });
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mid = Angle::from_ratio(layout.domain.0.as_ratio() + &domain_len / &two);
    for x in [&layout.domain.0, &mid, &layout.domain.1] {
        let phi = composed_branch(layout, x);
        if layout.target.0.ccw_distance(&phi) > target_len {
            return Err(ConfigError::AffineMismatch {
                strip: layout.strip,
                detail: format!("{x} leaves the target arc"),
            });
        }
        let expected = phi.double();
        let got = piece.eval(x);
        if got != expected {
            return Err(ConfigError::AffineMismatch {
                strip: layout.strip,
                detail: format!("at {x}: affine {got}, composition {expected}"),
            });
        }
    }
    Ok(piece)
}

fn assemble(specs: Vec<PieceLayout>) -> Result<PiecewiseDoublingMap, ConfigError> {
    let pieces = specs
        .iter()
        .map(build_piece)
        .collect::<Result<Vec<_>, _>>()?;
    PiecewiseDoublingMap::from_pieces(pieces).map_err(|e| ConfigError::AffineMismatch {
        strip: Strip::V,
        detail: e.to_string(),
    })
}

/// `G`: slope `2^(k_v - k̃_v + 1)` on the V arcs, `2^(k_w - k̃_w + 1)` on the
/// W arcs, doubling elsewhere.
pub fn build_forward_map(cfg: &EdgeConfig) -> Result<PiecewiseDoublingMap, ConfigError> {
    let t = |i, s| cfg.theta(i, s).clone();
    let (m, p) = (Side::Minus, Side::Plus);
    let v = |domain, target| PieceLayout {
        strip: Strip::V,
        domain,
        target,
        k: cfg.k_v,
        k_target: cfg.k_tilde_v,
        sign: cfg.sigma_v,
    };
    let w = |domain, target| PieceLayout {
        strip: Strip::W,
        domain,
        target,
        k: cfg.k_w,
        k_target: cfg.k_tilde_w,
        sign: cfg.sigma_w,
    };
    assemble(vec![
        v((t(1, m), t(2, m)), (t(1, m), t(3, m))),
        w((t(2, m), t(4, m)), (t(3, m), t(4, m))),
        w((t(4, p), t(2, p)), (t(4, p), t(3, p))),
        v((t(2, p), t(1, p)), (t(3, p), t(1, p))),
    ])
}

/// `G̃`: the same construction with the roles of the strips exchanged.
pub fn build_backward_map(cfg: &EdgeConfig) -> Result<PiecewiseDoublingMap, ConfigError> {
    let t = |i, s| cfg.theta(i, s).clone();
    let (m, p) = (Side::Minus, Side::Plus);
    let v = |domain, target| PieceLayout {
        strip: Strip::VTilde,
        domain,
        target,
        k: cfg.k_tilde_v,
        k_target: cfg.k_v,
        sign: cfg.sigma_v,
    };
    let w = |domain, target| PieceLayout {
        strip: Strip::WTilde,
        domain,
        target,
        k: cfg.k_tilde_w,
        k_target: cfg.k_w,
        sign: cfg.sigma_w,
    };
    assemble(vec![
        v((t(1, m), t(3, m)), (t(1, m), t(2, m))),
        w((t(3, m), t(4, m)), (t(2, m), t(4, m))),
        w((t(4, p), t(3, p)), (t(4, p), t(2, p))),
        v((t(3, p), t(1, p)), (t(2, p), t(1, p))),
    ])
}
