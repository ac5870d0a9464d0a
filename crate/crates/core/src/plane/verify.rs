use num_complex::Complex64;
use rayon::prelude::*;

use crate::angle::{Angle, Arc};
use crate::lamination::{angles_of_period, conjugate_periodic_angle};
use crate::surgery::{EdgeConfig, SurgeryHomeo, THETA_LABELS};

use super::rays::trace_dynamic_ray;
use super::settings::SolverSettings;
use super::solve::{
    dynamic_landing_point, solve_center, solve_misiurewicz, SolvedPoint, LANDING_TOLERANCE,
};
use super::PlaneError;

/// Highest period searched for a hyperbolic component inside the edge.
pub const SAMPLE_PERIOD_BOUND: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct LandingPair {
    /// `i` of the pair `(Θi-, Θi+)`.
    pub index: u8,
    pub minus: Angle,
    pub plus: Angle,
    pub minus_end: Complex64,
    pub plus_end: Complex64,
    pub distance: f64,
    pub colands: bool,
}

impl LandingPair {
    pub fn landing_point(&self) -> Complex64 {
        0.5 * (self.minus_end + self.plus_end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub label: String,
    pub c: Complex64,
    /// Vertex parameters, where the four landing points may merge.
    pub boundary: bool,
    pub pairs: Vec<LandingPair>,
    pub min_separation: f64,
    pub distinct: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCheck {
    pub angle: Angle,
    pub solved: Complex64,
    pub ray_endpoint: Complex64,
    pub distance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericReport {
    pub vertices: Vec<VertexCheck>,
    pub samples: Vec<SampleReport>,
    pub failures: Vec<String>,
}

impl NumericReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The lowest-period root angle pair `(lo, hi)` with `lo` in
/// `(Θ1-, Θ4-)` and `hi` in `(Θ4+, Θ1+)`, smallest `lo` first.
pub fn lowest_period_component(theta: &[Angle; 8]) -> Option<(u32, Angle, Angle)> {
    let lower = Arc::open(theta[0].clone(), theta[3].clone());
    let upper = Arc::open(theta[4].clone(), theta[7].clone());
    for p in 2..=SAMPLE_PERIOD_BOUND {
        let mut found: Vec<(Angle, Angle)> = angles_of_period(p)
            .filter(|t| lower.contains(t))
            .filter_map(|t| {
                let partner = conjugate_periodic_angle(&t).ok()?;
                upper.contains(&partner).then_some((t, partner))
            })
            .collect();
        found.sort();
        if let Some((lo, hi)) = found.into_iter().next() {
            return Some((p, lo, hi));
        }
    }
    None
}

/// Landing points of the eight dynamic rays at `c`, refined by Newton
/// from the traced endpoints, and their pairwise distances. A ray whose
/// landing point cannot be refined keeps its raw endpoint.
pub fn landing_pairs(
    c: Complex64,
    theta: &[Angle; 8],
    settings: &SolverSettings,
) -> Vec<LandingPair> {
    let ends: Vec<Complex64> = theta
        .par_iter()
        .map(|t| match dynamic_landing_point(c, t, settings) {
            Ok(z) => z.point,
            Err(_) => trace_dynamic_ray(c, t, settings)
                .endpoint()
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        })
        .collect();
    (1..=4)
        .map(|i| {
            let (m, p) = (i - 1, 8 - i);
            let distance = (ends[m] - ends[p]).norm();
            LandingPair {
                index: i as u8,
                minus: theta[m].clone(),
                plus: theta[p].clone(),
                minus_end: ends[m],
                plus_end: ends[p],
                distance,
                colands: distance < LANDING_TOLERANCE,
            }
        })
        .collect()
}

fn sample(
    label: &str,
    c: Complex64,
    boundary: bool,
    theta: &[Angle; 8],
    settings: &SolverSettings,
) -> SampleReport {
    let pairs = landing_pairs(c, theta, settings);
    let mut min_separation = f64::INFINITY;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let d = (pairs[i].landing_point() - pairs[j].landing_point()).norm();
            min_separation = min_separation.min(d);
        }
    }
    let distinct = min_separation > LANDING_TOLERANCE;
    let ok = pairs.iter().all(|p| p.colands) && distinct;
    SampleReport {
        label: label.to_string(),
        c,
        boundary,
        pairs,
        min_separation,
        distinct,
        ok,
    }
}

/// Numeric check of eight angles at parameters inside the edge: the
/// dynamic rays `Θi±` must land in pairs at four distinct points. Vertex
/// samples are reported but flagged as boundary cases and never count as
/// failures.
pub fn verify_angles_numeric(
    theta: &[Angle; 8],
    settings: &SolverSettings,
) -> Result<NumericReport, PlaneError> {
    let mut failures = Vec::new();
    let mut vertices = Vec::new();
    for i in [0, 7, 3, 4] {
        let t = &theta[i];
        match solve_misiurewicz(t, settings) {
            Ok(m) => {
                let distance = (m.point - m.seed).norm();
                vertices.push(VertexCheck {
                    angle: t.clone(),
                    solved: m.point,
                    ray_endpoint: m.seed,
                    distance,
                    ok: true,
                });
            }
            Err(e) => failures.push(format!("{}: {e}", THETA_LABELS[i])),
        }
    }
    let mut samples = Vec::new();
    match lowest_period_component(theta) {
        Some((p, lo, _)) => {
            let center = solve_center(p, &lo, settings)?;
            samples.push(sample(
                &format!("center of period {p} at {lo}"),
                center.point,
                false,
                theta,
                settings,
            ));
        }
        None => failures.push(format!(
            "no hyperbolic component of period <= {SAMPLE_PERIOD_BOUND} inside the edge"
        )),
    }
    for v in vertices.iter().step_by(2) {
        samples.push(sample(
            &format!("vertex {}", v.angle),
            v.solved,
            true,
            theta,
            settings,
        ));
    }
    for s in samples.iter().filter(|s| !s.boundary) {
        for p in s.pairs.iter().filter(|p| !p.colands) {
            failures.push(format!(
                "at {}: dynamic rays {} and {} land {:.3e} apart",
                s.label, p.minus, p.plus, p.distance
            ));
        }
        if !s.distinct {
            failures.push(format!(
                "at {}: landing points only {:.3e} apart",
                s.label, s.min_separation
            ));
        }
    }
    Ok(NumericReport {
        vertices,
        samples,
        failures,
    })
}

pub fn verify_config_numeric(
    cfg: &EdgeConfig,
    settings: &SolverSettings,
) -> Result<NumericReport, PlaneError> {
    verify_angles_numeric(cfg.thetas(), settings)
}

/// Kinds of parameter identified by external angles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParameterKind {
    Misiurewicz(Angle),
    Center { period: u32, angle: Angle },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterImage {
    pub source_angle: Angle,
    pub image_angle: Angle,
    pub source: SolvedPoint,
    pub image: SolvedPoint,
}

/// `h^n(c)` for a parameter identified by an angle: maps the angle through
/// the surgery and re-solves.
pub fn map_parameter_point(
    homeo: &SurgeryHomeo,
    kind: &ParameterKind,
    n: i64,
    settings: &SolverSettings,
) -> Result<ParameterImage, PlaneError> {
    match kind {
        ParameterKind::Misiurewicz(t) => {
            let image_angle = homeo.map_angle(t, n)?;
            Ok(ParameterImage {
                source: solve_misiurewicz(t, settings)?,
                image: solve_misiurewicz(&image_angle, settings)?,
                source_angle: t.clone(),
                image_angle,
            })
        }
        ParameterKind::Center { period, angle } => {
            let image_angle = homeo.map_angle(angle, n)?;
            let image_period = image_angle.period() as u32;
            Ok(ParameterImage {
                source: solve_center(*period, angle, settings)?,
                image: solve_center(image_period, &image_angle, settings)?,
                source_angle: angle.clone(),
                image_angle,
            })
        }
    }
}
