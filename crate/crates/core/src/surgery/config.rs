use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angle::{Angle, Arc, ArcImage};
use crate::lamination::{colanding, LaminationError};

/// Iterations allowed when searching for a strip's first return.
pub const DEFAULT_FIRST_RETURN_CAP: u32 = 64;

/// Names of the eight angles in storage order
/// `Θ1- < Θ2- < Θ3- < Θ4- < Θ4+ < Θ3+ < Θ2+ < Θ1+`.
pub const THETA_LABELS: [&str; 8] = [
    "theta1_minus",
    "theta2_minus",
    "theta3_minus",
    "theta4_minus",
    "theta4_plus",
    "theta3_plus",
    "theta2_plus",
    "theta1_plus",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
}

/// The `±` in `±f^k`. On angles, `-z` shifts the angle by `1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn apply(self, a: &Angle) -> Angle {
        match self {
            Sign::Plus => a.clone(),
            Sign::Minus => a.add_half(),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strip {
    V,
    W,
    VTilde,
    WTilde,
}

impl Strip {
    pub const ALL: [Strip; 4] = [Strip::V, Strip::W, Strip::VTilde, Strip::WTilde];

    pub fn name(self) -> &'static str {
        match self {
            Strip::V => "V",
            Strip::W => "W",
            Strip::VTilde => "V~",
            Strip::WTilde => "W~",
        }
    }
}

impl fmt::Display for Strip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("ordering violated: {lower_label} = {lower} must be < {upper_label} = {upper}")]
    Ordering {
        lower_label: &'static str,
        lower: Angle,
        upper_label: &'static str,
        upper: Angle,
    },
    #[error("{label} = {angle} is not strictly preperiodic under doubling")]
    NotPreperiodic { label: &'static str, angle: Angle },
    #[error("parameter rays at theta{pair}_minus = {minus} and theta{pair}_plus = {plus} do not co-land")]
    NotColanding { pair: u8, minus: Angle, plus: Angle },
    #[error("{label} = {angle} returns to the edge: 2^{step} * angle = {image} lies in (theta1_minus, theta1_plus)")]
    Returning {
        label: &'static str,
        angle: Angle,
        image: Angle,
        step: u64,
    },
    #[error("strip {strip} has no first return within {cap} doublings")]
    NoFirstReturn { strip: Strip, cap: u32 },
    #[error("no sign s in {{0, 1/2}} matches the endpoint images of strip {strip}")]
    NoSign { strip: Strip },
    #[error("strip {strip}: target arc of length {length} does not fit one branch of 2^-{depth}")]
    BranchAmbiguity {
        strip: Strip,
        length: String,
        depth: u32,
    },
    #[error("strip {strip}: affine piece disagrees with its composition form ({detail})")]
    AffineMismatch { strip: Strip, detail: String },
    #[error(transparent)]
    Lamination(#[from] LaminationError),
}

impl ConfigError {
    /// Stable machine-readable code per failed check.
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Ordering { .. } => "ordering",
            ConfigError::NotPreperiodic { .. } => "preperiodic",
            ConfigError::NotColanding { .. } => "colanding",
            ConfigError::Returning { .. } => "nonreturn",
            ConfigError::NoFirstReturn { .. } => "first_return",
            ConfigError::NoSign { .. } => "sign",
            ConfigError::BranchAmbiguity { .. } => "branch",
            ConfigError::AffineMismatch { .. } => "internal",
            ConfigError::Lamination(_) => "lamination",
        }
    }
}

/// A validated edge configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeConfig {
    theta: [Angle; 8],
    pub k_v: u32,
    pub k_w: u32,
    pub k_tilde_v: u32,
    pub k_tilde_w: u32,
    pub sigma_v: Sign,
    pub sigma_w: Sign,
    /// Non-fatal observations, e.g. an orbit hitting `Θ1±` exactly.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FirstReturns {
    pub k_v: u32,
    pub k_w: u32,
    pub k_tilde_v: u32,
    pub k_tilde_w: u32,
}

fn theta_at(theta: &[Angle; 8], i: usize, side: Side) -> &Angle {
    assert!((1..=4).contains(&i), "edge angles are indexed 1..=4");
    match side {
        Side::Minus => &theta[i - 1],
        Side::Plus => &theta[8 - i],
    }
}

fn strip_arcs(theta: &[Angle; 8], strip: Strip) -> [Arc; 2] {
    let (inner, outer) = match strip {
        Strip::V => (2, 1),
        Strip::W => (4, 2),
        Strip::VTilde => (3, 1),
        Strip::WTilde => (4, 3),
    };
    let t = |i, s| theta_at(theta, i, s).clone();
    [
        Arc::open(t(outer, Side::Minus), t(inner, Side::Minus)),
        Arc::open(t(inner, Side::Plus), t(outer, Side::Plus)),
    ]
}

fn edge_arcs(theta: &[Angle; 8]) -> [Arc; 2] {
    [
        Arc::open(theta[0].clone(), theta[3].clone()),
        Arc::open(theta[4].clone(), theta[7].clone()),
    ]
}

impl EdgeConfig {
    pub fn thetas(&self) -> &[Angle; 8] {
        &self.theta
    }

    /// `Θ_i^±` for `i` in `1..=4`.
    pub fn theta(&self, i: usize, side: Side) -> &Angle {
        theta_at(&self.theta, i, side)
    }

    /// The two open arcs of a strip, minus side first.
    pub fn strip_arcs(&self, strip: Strip) -> [Arc; 2] {
        strip_arcs(&self.theta, strip)
    }

    /// Open arcs `(Θ1-, Θ4-)` and `(Θ4+, Θ1+)` traced by the edge strip.
    pub fn edge_arcs(&self) -> [Arc; 2] {
        edge_arcs(&self.theta)
    }

    pub fn in_edge_arcs(&self, t: &Angle) -> bool {
        self.edge_arcs().iter().any(|a| a.contains(t))
    }

    /// Closed edge arcs, the support of the angle action.
    pub fn closed_edge_arcs(&self) -> [Arc; 2] {
        let [a, b] = self.edge_arcs();
        [Arc::closed(a.start, a.end), Arc::closed(b.start, b.end)]
    }

    pub fn first_returns(&self) -> FirstReturns {
        FirstReturns {
            k_v: self.k_v,
            k_w: self.k_w,
            k_tilde_v: self.k_tilde_v,
            k_tilde_w: self.k_tilde_w,
        }
    }

    /// Exact Hölder exponents `k̃_v/k_v`, `k_w/k̃_w` of `H` and the
    /// dilatation lower bound `max(k_v/k̃_v, k̃_w/k_w)`.
    pub fn holder_data(&self) -> HolderData {
        let r = |a: u32, b: u32| Ratio::new(a as u64, b as u64);
        HolderData {
            alpha_v: r(self.k_tilde_v, self.k_v),
            alpha_w: r(self.k_w, self.k_tilde_w),
            k_lower: r(self.k_v, self.k_tilde_v).max(r(self.k_tilde_w, self.k_w)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HolderData {
    pub alpha_v: Ratio<u64>,
    pub alpha_w: Ratio<u64>,
    pub k_lower: Ratio<u64>,
}

fn check_ordering(theta: &[Angle; 8]) -> Result<(), ConfigError> {
    if theta[0].is_zero() {
        return Err(ConfigError::Ordering {
            lower_label: "0",
            lower: Angle::zero(),
            upper_label: THETA_LABELS[0],
            upper: theta[0].clone(),
        });
    }
    for i in 0..7 {
        if theta[i] >= theta[i + 1] {
            return Err(ConfigError::Ordering {
                lower_label: THETA_LABELS[i],
                lower: theta[i].clone(),
                upper_label: THETA_LABELS[i + 1],
                upper: theta[i + 1].clone(),
            });
        }
    }
    Ok(())
}

fn check_preperiodic(theta: &[Angle; 8]) -> Result<(), ConfigError> {
    for (label, t) in THETA_LABELS.iter().zip(theta) {
        if t.is_periodic() {
            return Err(ConfigError::NotPreperiodic {
                label,
                angle: t.clone(),
            });
        }
    }
    Ok(())
}

fn check_colanding(theta: &[Angle; 8]) -> Result<(), ConfigError> {
    for i in 1..=4 {
        let minus = theta_at(theta, i, Side::Minus);
        let plus = theta_at(theta, i, Side::Plus);
        if !colanding(minus, plus)? {
            return Err(ConfigError::NotColanding {
                pair: i as u8,
                minus: minus.clone(),
                plus: plus.clone(),
            });
        }
    }
    Ok(())
}

/// Forward images never re-enter `(Θ1-, Θ1+)`. Returns warnings for
/// orbits that land exactly on `Θ1±`.
fn check_nonreturn(theta: &[Angle; 8]) -> Result<Vec<String>, ConfigError> {
    let region = Arc::open(theta[0].clone(), theta[7].clone());
    let mut warnings = Vec::new();
    for (label, t) in THETA_LABELS.iter().zip(theta) {
        let orbit = t.orbit_class();
        for (step, image) in orbit.orbit.iter().enumerate().skip(1) {
            if region.contains(image) {
                return Err(ConfigError::Returning {
                    label,
                    angle: t.clone(),
                    image: image.clone(),
                    step: step as u64,
                });
            }
            if image == &theta[0] || image == &theta[7] {
                warnings.push(format!(
                    "{label} = {t} is mapped onto {image} = theta1 after {step} doublings"
                ));
            }
        }
    }
    Ok(warnings)
}

fn first_return(theta: &[Angle; 8], strip: Strip, cap: u32) -> Result<u32, ConfigError> {
    let edge = edge_arcs(theta);
    let mut arcs: Vec<Arc> = strip_arcs(theta, strip).to_vec();
    for k in 1..=cap {
        let mut next = Vec::with_capacity(arcs.len());
        for arc in &arcs {
            match arc.image_under_doubling() {
                ArcImage::CoversCircle => return Ok(k),
                ArcImage::Arc(a) => next.push(a),
            }
        }
        if next.iter().any(|a| edge.iter().any(|e| a.meets(e))) {
            return Ok(k);
        }
        arcs = next;
    }
    Err(ConfigError::NoFirstReturn { strip, cap })
}

/// First-return numbers `(k_v, k_w, k̃_v, k̃_w)`: the least `k > 0` such
/// that the `k`-fold doubling image of either arc of the strip meets the
/// edge arcs.
pub fn first_return_numbers(theta: &[Angle; 8], cap: u32) -> Result<FirstReturns, ConfigError> {
    Ok(FirstReturns {
        k_v: first_return(theta, Strip::V, cap)?,
        k_w: first_return(theta, Strip::W, cap)?,
        k_tilde_v: first_return(theta, Strip::VTilde, cap)?,
        k_tilde_w: first_return(theta, Strip::WTilde, cap)?,
    })
}

/// Finds `s ∈ {0, 1/2}` with `2^(k-1) x + s ≡ 2^(kt-1) y` for all pairs.
fn find_sign(pairs: &[(&Angle, &Angle)], k: u32, kt: u32) -> Option<Sign> {
    [Sign::Plus, Sign::Minus].into_iter().find(|sign| {
        pairs
            .iter()
            .all(|(x, y)| sign.apply(&x.double_n(k as u64 - 1)) == y.double_n(kt as u64 - 1))
    })
}

fn determine_signs(theta: &[Angle; 8], k: &FirstReturns) -> Result<(Sign, Sign), ConfigError> {
    let t = |i, s| theta_at(theta, i, s);
    let (m, p) = (Side::Minus, Side::Plus);
    let v_pairs = [
        (t(1, m), t(1, m)),
        (t(1, p), t(1, p)),
        (t(2, m), t(3, m)),
        (t(2, p), t(3, p)),
    ];
    let w_pairs = [
        (t(4, m), t(4, m)),
        (t(4, p), t(4, p)),
        (t(2, m), t(3, m)),
        (t(2, p), t(3, p)),
    ];
    let sigma_v =
        find_sign(&v_pairs, k.k_v, k.k_tilde_v).ok_or(ConfigError::NoSign { strip: Strip::V })?;
    let sigma_w =
        find_sign(&w_pairs, k.k_w, k.k_tilde_w).ok_or(ConfigError::NoSign { strip: Strip::W })?;
    Ok((sigma_v, sigma_w))
}

pub fn validate_config(theta: [Angle; 8]) -> Result<EdgeConfig, ConfigError> {
    validate_config_with_cap(theta, DEFAULT_FIRST_RETURN_CAP)
}

/// Runs every check in order and stops at the first failure.
pub fn validate_config_with_cap(theta: [Angle; 8], cap: u32) -> Result<EdgeConfig, ConfigError> {
    check_ordering(&theta)?;
    check_preperiodic(&theta)?;
    check_colanding(&theta)?;
    let warnings = check_nonreturn(&theta)?;
    let k = first_return_numbers(&theta, cap)?;
    let (sigma_v, sigma_w) = determine_signs(&theta, &k)?;
    Ok(EdgeConfig {
        theta,
        k_v: k.k_v,
        k_w: k.k_w,
        k_tilde_v: k.k_tilde_v,
        k_tilde_w: k.k_tilde_w,
        sigma_v,
        sigma_w,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportError {
    pub code: String,
    pub message: String,
}

impl From<&ConfigError> for ReportError {
    fn from(e: &ConfigError) -> Self {
        ReportError {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

/// Flat validation summary; every check is attempted even after a failure
/// so the report names all offending angles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub ordering_ok: bool,
    pub preperiodic_ok: bool,
    pub colanding_ok: bool,
    pub nonreturn_ok: bool,
    pub k_v: Option<u32>,
    pub k_w: Option<u32>,
    pub k_tilde_v: Option<u32>,
    pub k_tilde_w: Option<u32>,
    pub sigma_v: Option<i8>,
    pub sigma_w: Option<i8>,
    pub alpha_v: Option<String>,
    pub alpha_w: Option<String>,
    #[serde(rename = "K_lower")]
    pub k_lower: Option<String>,
    pub errors: Vec<ReportError>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn run(theta: &[Angle; 8]) -> Self {
        let mut errors = Vec::new();
        let mut record = |r: Result<(), ConfigError>| match r {
            Ok(()) => true,
            Err(e) => {
                errors.push(ReportError::from(&e));
                false
            }
        };
        let ordering_ok = record(check_ordering(theta));
        let preperiodic_ok = record(check_preperiodic(theta));
        let colanding_ok = record(check_colanding(theta));
        let mut warnings = Vec::new();
        let nonreturn_ok = record(check_nonreturn(theta).map(|w| warnings = w));
        let mut report = ValidationReport {
            valid: false,
            ordering_ok,
            preperiodic_ok,
            colanding_ok,
            nonreturn_ok,
            k_v: None,
            k_w: None,
            k_tilde_v: None,
            k_tilde_w: None,
            sigma_v: None,
            sigma_w: None,
            alpha_v: None,
            alpha_w: None,
            k_lower: None,
            errors,
            warnings,
        };
        if !(ordering_ok && preperiodic_ok && colanding_ok && nonreturn_ok) {
            return report;
        }
        let k = match first_return_numbers(theta, DEFAULT_FIRST_RETURN_CAP) {
            Ok(k) => k,
            Err(e) => {
                report.errors.push(ReportError::from(&e));
                return report;
            }
        };
        report.k_v = Some(k.k_v);
        report.k_w = Some(k.k_w);
        report.k_tilde_v = Some(k.k_tilde_v);
        report.k_tilde_w = Some(k.k_tilde_w);
        match validate_config(theta.clone()) {
            Ok(cfg) => {
                report.sigma_v = Some(cfg.sigma_v.as_i8());
                report.sigma_w = Some(cfg.sigma_w.as_i8());
                let h = cfg.holder_data();
                report.alpha_v = Some(h.alpha_v.to_string());
                report.alpha_w = Some(h.alpha_w.to_string());
                report.k_lower = Some(h.k_lower.to_string());
                report.valid = true;
            }
            Err(e) => report.errors.push(ReportError::from(&e)),
        }
        report
    }

    /// Records a failure detected after validation proper (e.g. while
    /// building the piecewise maps).
    pub fn push_error(&mut self, e: &ConfigError) {
        self.errors.push(ReportError::from(e));
        self.valid = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: i64, d: i64) -> Angle {
        Angle::new(n, d).unwrap()
    }

    fn fig2() -> [Angle; 8] {
        [
            a(11, 56),
            a(199, 1008),
            a(103, 504),
            a(23, 112),
            a(29, 112),
            a(131, 504),
            a(269, 1008),
            a(15, 56),
        ]
    }

    #[test]
    fn fig2_validates() {
        let cfg = validate_config(fig2()).unwrap();
        assert_eq!(
            (cfg.k_v, cfg.k_w, cfg.k_tilde_v, cfg.k_tilde_w),
            (7, 4, 4, 7)
        );
        assert_eq!((cfg.sigma_v, cfg.sigma_w), (Sign::Plus, Sign::Minus));
        assert!(cfg.warnings.is_empty());
        assert_eq!(cfg.theta(4, Side::Plus), &a(29, 112));
    }

    #[test]
    fn sign_arithmetic_for_w_strip() {
        let t = a(23, 112);
        assert_eq!(t.double_n(3), a(9, 14));
        assert_eq!(t.double_n(6), a(2, 14));
        assert_eq!(a(9, 14).add_half(), a(2, 14));
    }

    #[test]
    fn first_return_arcs_for_v() {
        let theta = fig2();
        // 2^7 * 11/56 = 1/7; the k = 6 image starts at 4/7 and misses the edge
        assert_eq!(a(11, 56).double_n(7), a(1, 7));
        assert_eq!(a(11, 56).double_n(6), a(4, 7));
        let k = first_return_numbers(&theta, 64).unwrap();
        assert_eq!(k.k_v, 7);
        assert_eq!(k.k_w, 4);
        assert!(matches!(
            first_return_numbers(&theta, 5),
            Err(ConfigError::NoFirstReturn {
                strip: Strip::V,
                cap: 5
            })
        ));
    }

    #[test]
    fn wide_strip_returns_immediately() {
        let theta = [
            a(1, 8),
            a(1, 4),
            a(5, 16),
            a(3, 8),
            a(7, 16),
            a(1, 2),
            a(5, 8),
            a(7, 8),
        ];
        // (1/8, 1/4) doubles onto (1/4, 1/2), which meets (1/8, 3/8)
        let arcs = Arc::open(a(1, 8), a(5, 8));
        assert_eq!(arcs.image_under_doubling(), ArcImage::CoversCircle);
        assert_eq!(first_return(&theta, Strip::V, 64).unwrap(), 1);
    }

    #[test]
    fn ordering_errors() {
        let mut theta = fig2();
        theta.swap(1, 2);
        let err = validate_config(theta).unwrap_err();
        assert_eq!(err.code(), "ordering");
        assert!(err.to_string().contains("theta2_minus"));
        let mut theta = fig2();
        theta[0] = Angle::zero();
        assert_eq!(validate_config(theta).unwrap_err().code(), "ordering");
    }

    #[test]
    fn periodic_angle_rejected() {
        let mut theta = fig2();
        theta[1] = a(25, 127);
        assert_eq!(validate_config(theta).unwrap_err().code(), "preperiodic");
    }

    #[test]
    fn colanding_failure_names_pair() {
        let mut theta = fig2();
        theta[1] = a(201, 1008);
        match validate_config(theta).unwrap_err() {
            ConfigError::NotColanding { pair, .. } => assert_eq!(pair, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn report_collects_everything() {
        let r = ValidationReport::run(&fig2());
        assert!(r.valid);
        assert_eq!(r.k_v, Some(7));
        assert_eq!(r.sigma_w, Some(-1));
        assert_eq!(r.alpha_v.as_deref(), Some("4/7"));
        assert_eq!(r.k_lower.as_deref(), Some("7/4"));
        let mut bad = fig2();
        bad.swap(1, 2);
        let r = ValidationReport::run(&bad);
        assert!(!r.valid && !r.ordering_ok);
        assert!(r.preperiodic_ok);
        assert!(r.errors.iter().any(|e| e.code == "ordering"));
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("K_lower").is_some());
    }

    #[test]
    fn holder_data_for_fig2() {
        let h = validate_config(fig2()).unwrap().holder_data();
        assert_eq!(h.alpha_v, Ratio::new(4, 7));
        assert_eq!(h.alpha_w, Ratio::new(4, 7));
        assert_eq!(h.k_lower, Ratio::new(7, 4));
    }
}
