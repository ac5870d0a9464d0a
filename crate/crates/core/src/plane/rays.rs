use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::angle::Angle;

use super::escape::Viewport;
use super::settings::SolverSettings;

/// Points of a traced external ray, ordered by decreasing potential.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPolyline {
    pub angle: Angle,
    pub points: Vec<Complex64>,
    pub potentials: Vec<f64>,
    /// Set when continuation stopped early; `points` then holds the part
    /// traced so far.
    pub error: Option<String>,
    /// Set when tracing stopped above the final potential because
    /// successive points no longer moved by more than the Newton tolerance.
    pub resolution_limited: bool,
}

impl RayPolyline {
    pub fn endpoint(&self) -> Option<Complex64> {
        self.points.last().copied()
    }

    pub fn final_potential(&self) -> Option<f64> {
        self.potentials.last().copied()
    }

    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }

    /// One `re im potential` line per point.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, g) in self.points.iter().zip(&self.potentials) {
            writeln!(s, "{} {} {}", p.re, p.im, g).unwrap();
        }
        s
    }
}

/// Potentials `g0 2^(-j/S)` down to the final potential, which is always
/// the last entry.
pub fn potential_schedule(settings: &SolverSettings) -> Vec<f64> {
    let g0 = settings.ray_start_potential;
    let gf = settings.ray_final_potential;
    let s = settings.steps_per_halving as f64;
    let steps = (s * (g0 / gf).log2()).ceil() as usize;
    let mut out: Vec<f64> = (0..steps).map(|j| g0 * (-(j as f64) / s).exp2()).collect();
    out.push(gf);
    out
}

fn phase(theta: &Angle, doublings: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * theta.double_n(doublings).to_f64())
}

fn newton<F>(mut x: Complex64, settings: &SolverSettings, f: F) -> Option<Complex64>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    for _ in 0..settings.max_newton_steps {
        let (value, deriv) = f(x);
        let step = value / deriv;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return None;
        }
        x -= step;
        if step.norm() <= settings.newton_tolerance * (1.0 + x.norm()) {
            return Some(x);
        }
    }
    None
}

fn trace<F>(theta: &Angle, settings: &SolverSettings, mut step: F) -> RayPolyline
where
    F: FnMut(Complex64, f64) -> Option<Complex64>,
{
    let mut ray = RayPolyline {
        angle: theta.clone(),
        points: Vec::new(),
        potentials: Vec::new(),
        error: None,
        resolution_limited: false,
    };
    let g0 = settings.ray_start_potential;
    let mut x = Complex64::from_polar(g0.exp(), TAU * theta.to_f64());
    for g in potential_schedule(settings) {
        match step(x, g) {
            Some(next) => {
                if !ray.points.is_empty()
                    && (next - x).norm() <= settings.newton_tolerance * (1.0 + x.norm())
                {
                    ray.resolution_limited = true;
                    break;
                }
                x = next;
                ray.points.push(x);
                ray.potentials.push(g);
            }
            None => {
                ray.error = Some(format!("Newton continuation failed at potential {g:e}"));
                break;
            }
        }
    }
    ray
}

/// Traces the parameter ray of angle `theta` from the start potential
/// down to the final potential by Newton continuation on
/// `f_c^(n-1)(c) = Φ_M(c)^(2^(n-1))`, with `n` chosen so the target has
/// modulus at least the escape radius.
pub fn trace_parameter_ray(theta: &Angle, settings: &SolverSettings) -> RayPolyline {
    let ln_r = settings.escape_radius.ln();
    trace(theta, settings, |seed, g| {
        let mut n: u32 = 1;
        while (n as f64 - 1.0).exp2() * g < ln_r {
            n += 1;
        }
        let scale = (n as f64 - 1.0).exp2();
        let target = (scale * g).exp() * phase(theta, n as u64 - 1);
        newton(seed, settings, |c| {
            let (mut z, mut dz) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for _ in 0..n {
                dz = 2.0 * z * dz + 1.0;
                z = z * z + c;
            }
            (z - target, dz)
        })
    })
}

/// Traces the dynamic ray of angle `theta` for `f_c(z) = z^2 + c`, solving
/// `f_c^n(z) = Φ_c(z)^(2^n)`.
pub fn trace_dynamic_ray(c: Complex64, theta: &Angle, settings: &SolverSettings) -> RayPolyline {
    let ln_r = settings.escape_radius.ln();
    trace(theta, settings, |seed, g| {
        let mut n: u32 = 0;
        while (n as f64).exp2() * g < ln_r {
            n += 1;
        }
        let target = ((n as f64).exp2() * g).exp() * phase(theta, n as u64);
        newton(seed, settings, |z0| {
            let (mut z, mut d) = (z0, Complex64::new(1.0, 0.0));
            for _ in 0..n {
                d = 2.0 * z * d;
                z = z * z + c;
            }
            (z - target, d)
        })
    })
}

/// SVG document of ray polylines in the pixel coordinates of `view`.
pub fn svg_overlay(view: &Viewport, rays: &[RayPolyline]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = view.width,
        h = view.height
    )
    .unwrap();
    for ray in rays {
        let points: Vec<String> = ray
            .points
            .iter()
            .map(|p| {
                let (x, y) = view.point_to_pixel(*p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(
            s,
            r#"  <polyline fill="none" stroke="white" stroke-width="1" data-angle="{}" points="{}"/>"#,
            ray.angle,
            points.join(" ")
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
