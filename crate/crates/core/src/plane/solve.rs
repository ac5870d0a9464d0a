use num_complex::Complex64;
use rayon::prelude::*;

use crate::angle::Angle;
use crate::lamination::conjugate_periodic_angle;

use super::rays::{trace_dynamic_ray, trace_parameter_ray};
use super::settings::SolverSettings;
use super::PlaneError;

/// Distance allowed between a Newton root and the ray endpoint seeding it.
pub const SEED_TOLERANCE: f64 = 1e-3;

/// Landing distance below which two dynamic rays count as co-landing.
pub const LANDING_TOLERANCE: f64 = 1e-3;

/// Distance allowed between the extrapolated dynamic ray endpoint and the
/// refined landing point.
pub const DYNAMIC_SEED_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvedPoint {
    pub point: Complex64,
    /// Residual of the defining equation at the returned point.
    pub residual: f64,
    pub newton_steps: u32,
    /// Ray endpoint (extrapolated for dynamic rays) used as seed.
    pub seed: Complex64,
}

/// Critical orbit `z_0 = 0, z_{k+1} = z_k^2 + c` with `dz_k/dc`, for
/// `k = 0..=len`.
fn critical_orbit(c: Complex64, len: usize) -> Vec<(Complex64, Complex64)> {
    let mut out = Vec::with_capacity(len + 1);
    let (mut z, mut dz) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    out.push((z, dz));
    for _ in 0..len {
        dz = 2.0 * z * dz + 1.0;
        z = z * z + c;
        out.push((z, dz));
    }
    out
}

/// Newton iteration stopping on a small residual or a small step.
fn newton_solve<F>(
    seed: Complex64,
    settings: &SolverSettings,
    what: &str,
    f: F,
) -> Result<(Complex64, f64, u32), PlaneError>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    let mut c = seed;
    for step in 0..settings.max_newton_steps {
        let (value, deriv) = f(c);
        if value.norm() < settings.newton_tolerance {
            return Ok((c, value.norm(), step));
        }
        let delta = value / deriv;
        if !(delta.re.is_finite() && delta.im.is_finite()) {
            break;
        }
        c -= delta;
        if delta.norm() <= 1e-15 * (1.0 + c.norm()) {
            return Ok((c, f(c).0.norm(), step + 1));
        }
    }
    Err(PlaneError::NoConvergence {
        what: what.to_string(),
        steps: settings.max_newton_steps,
    })
}

fn ray_seed(theta: &Angle, settings: &SolverSettings) -> Result<Complex64, PlaneError> {
    let ray = trace_parameter_ray(theta, settings);
    match (&ray.error, ray.endpoint()) {
        (None, Some(p)) => Ok(p),
        (err, _) => Err(PlaneError::RayFailed {
            angle: theta.clone(),
            reason: err.clone().unwrap_or_else(|| "empty ray".into()),
        }),
    }
}

/// Landing point of the parameter ray of a strictly preperiodic angle:
/// the root of `f_c^(l+p)(c) - f_c^l(c)` nearest to the ray endpoint.
///
/// The critical orbit of a Misiurewicz point of long period is too
/// sensitive to evaluate in floating point, so the orbit points are
/// unknowns of their own (multiple shooting). They are seeded from the
/// dynamic rays at the orbit angles.
pub fn solve_misiurewicz(
    theta: &Angle,
    settings: &SolverSettings,
) -> Result<SolvedPoint, PlaneError> {
    let l = theta.preperiod() as usize;
    if l == 0 {
        return Err(PlaneError::NotPreperiodic(theta.clone()));
    }
    let p = theta.period() as usize;
    let ray = trace_parameter_ray(theta, settings);
    let (seed, seed_potential) = match (&ray.error, ray.endpoint(), ray.final_potential()) {
        (None, Some(c), Some(g)) => (c, g),
        (err, _, _) => {
            return Err(PlaneError::RayFailed {
                angle: theta.clone(),
                reason: err.clone().unwrap_or_else(|| "empty ray".into()),
            })
        }
    };
    // the seed lies outside M at potential `seed_potential`; dynamic rays
    // stay clear of precritical points above half of it
    let guide = SolverSettings {
        ray_final_potential: settings.ray_final_potential.max(seed_potential),
        ..*settings
    };
    let orbit_angles: Vec<Angle> = (0..(l + p) as u64).map(|k| theta.double_n(k)).collect();
    let guesses: Vec<Option<Complex64>> = orbit_angles
        .par_iter()
        .map(|a| trace_dynamic_ray(seed, a, &guide).endpoint())
        .collect();
    let Some(guesses) = guesses.into_iter().collect::<Option<Vec<_>>>() else {
        return Err(PlaneError::RayFailed {
            angle: theta.clone(),
            reason: "dynamic ray at the seed parameter failed".into(),
        });
    };
    let (c, residual, newton_steps) =
        shooting_newton(seed, guesses, l, settings).ok_or_else(|| PlaneError::NoConvergence {
            what: format!("Misiurewicz point of {theta}"),
            steps: settings.max_newton_steps,
        })?;
    let distance = (c - seed).norm();
    if distance > SEED_TOLERANCE {
        return Err(PlaneError::SeedMismatch {
            angle: theta.clone(),
            distance,
        });
    }
    Ok(SolvedPoint {
        point: c,
        residual,
        newton_steps,
        seed,
    })
}

/// Newton's method on `z_1 = c`, `z_(k+1) = z_k^2 + c` for `k < n` and
/// `z_n^2 + c = z_(l+1)`, with unknowns `c, z_1, ..., z_n`. The linear
/// system is eliminated backwards along the orbit, which is the stable
/// direction near a repelling cycle: every `δz_k` is written as
/// `a_k δz_n + b_k δc + r_k`, leaving a 2x2 system for `(δz_n, δc)`.
fn shooting_newton(
    mut c: Complex64,
    mut z: Vec<Complex64>,
    l: usize,
    settings: &SolverSettings,
) -> Option<(Complex64, f64, u32)> {
    let n = z.len();
    let one = Complex64::new(1.0, 0.0);
    // residuals, with `f[0]` for `z_1 = c` and `f[n]` for the closing equation
    let residuals = |c: Complex64, z: &[Complex64]| -> Vec<Complex64> {
        let mut f = Vec::with_capacity(n + 1);
        f.push(z[0] - c);
        for k in 1..n {
            f.push(z[k] - z[k - 1] * z[k - 1] - c);
        }
        f.push(z[n - 1] * z[n - 1] + c - z[l]);
        f
    };
    let max_norm = |f: &[Complex64]| f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut coeffs = vec![
        (
            Complex64::default(),
            Complex64::default(),
            Complex64::default()
        );
        n
    ];
    for step in 0..settings.max_newton_steps {
        let f = residuals(c, &z);
        let size = max_norm(&f);
        if !size.is_finite() {
            return None;
        }
        if size < settings.newton_tolerance {
            return Some((c, size, step));
        }
        // δz_(k-1) = (δz_k - δc + f_k) / (2 z_(k-1)), with z_k stored at k - 1
        coeffs[n - 1] = (one, Complex64::default(), Complex64::default());
        for k in (1..n).rev() {
            let (a, b, r) = coeffs[k];
            let w = 2.0 * z[k - 1];
            coeffs[k - 1] = (a / w, (b - one) / w, (r + f[k]) / w);
        }
        let (a1, b1, r1) = coeffs[0];
        let (al, bl, rl) = coeffs[l];
        // δz_1 - δc = -f_0 and 2 z_n δz_n + δc - δz_(l+1) = -f_n
        let m = [[a1, b1 - one], [2.0 * z[n - 1] - al, one - bl]];
        let rhs = [-f[0] - r1, -f[n] + rl];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let dzn = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
        let dc = (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det;
        if !(dc.re.is_finite() && dc.im.is_finite() && dzn.re.is_finite() && dzn.im.is_finite()) {
            return None;
        }
        let mut largest = dc.norm() / (1.0 + c.norm());
        for (zk, (a, b, r)) in z.iter_mut().zip(&coeffs) {
            let dz = a * dzn + b * dc + r;
            largest = largest.max(dz.norm() / (1.0 + zk.norm()));
            *zk += dz;
        }
        c += dc;
        if largest <= 1e-15 {
            let size = max_norm(&residuals(c, &z));
            return Some((c, size, step + 1));
        }
    }
    None
}

fn proper_divisors(n: usize) -> impl Iterator<Item = usize> {
    (1..n).filter(move |d| n.is_multiple_of(*d))
}

/// Center of the hyperbolic component whose root carries the periodic
/// `seed_angle`: the root of `f_c^period(0)` reached from the ray endpoint.
/// The result must have exact period `period`, and the dynamic rays at
/// `seed_angle` and its partner must co-land there (the center lies in the
/// wake they bound).
pub fn solve_center(
    period: u32,
    seed_angle: &Angle,
    settings: &SolverSettings,
) -> Result<SolvedPoint, PlaneError> {
    if !seed_angle.is_periodic() {
        return Err(PlaneError::NotPeriodic(seed_angle.clone()));
    }
    let angle_period = seed_angle.period();
    if angle_period != period as u64 {
        return Err(PlaneError::WrongPeriod {
            angle: seed_angle.clone(),
            expected: period as u64,
            found: angle_period,
        });
    }
    let p = period as usize;
    let seed = if seed_angle.is_zero() {
        Complex64::new(0.0, 0.0)
    } else {
        ray_seed(seed_angle, settings)?
    };
    let (c, residual, newton_steps) =
        newton_solve(seed, settings, &format!("center of period {period}"), |c| {
            critical_orbit(c, p)[p]
        })?;
    let orbit = critical_orbit(c, p);
    for d in proper_divisors(p) {
        if orbit[d].0.norm() < 1e-6 {
            return Err(PlaneError::WrongPeriod {
                angle: seed_angle.clone(),
                expected: period as u64,
                found: d as u64,
            });
        }
    }
    if p > 1 {
        let partner = conjugate_periodic_angle(seed_angle)?;
        let gap = match (
            dynamic_landing_point(c, seed_angle, settings),
            dynamic_landing_point(c, &partner, settings),
        ) {
            (Ok(x), Ok(y)) => (x.point - y.point).norm(),
            _ => f64::INFINITY,
        };
        if gap > LANDING_TOLERANCE {
            return Err(PlaneError::WrongComponent {
                angle: seed_angle.clone(),
                gap,
            });
        }
    }
    Ok(SolvedPoint {
        point: c,
        residual,
        newton_steps,
        seed,
    })
}

/// Near a repelling landing point, ray points `stride` samples apart (one
/// period's worth of halvings) approach it geometrically with the cycle
/// multiplier as ratio. Aitken extrapolation of the last three such points
/// recovers the limit even when the multiplier is close to the unit circle.
fn extrapolated_endpoint(points: &[Complex64], stride: usize) -> Option<Complex64> {
    let last = *points.last()?;
    let n = points.len() - 1;
    if stride == 0 || n < 2 * stride {
        return Some(last);
    }
    let (u0, u1, u2) = (points[n - 2 * stride], points[n - stride], last);
    let denom = u2 - 2.0 * u1 + u0;
    let limit = u2 - (u2 - u1) * (u2 - u1) / denom;
    if limit.re.is_finite() && limit.im.is_finite() && denom.norm() > 0.0 {
        Some(limit)
    } else {
        Some(last)
    }
}

/// Factor by which the final potential shrinks on each retry of a dynamic
/// landing point, and the floor below which retries stop.
const DEEPEN_FACTOR: f64 = 1e-30;
const DEEPEST_POTENTIAL: f64 = 1e-200;

/// Landing point of the dynamic ray of `theta` for `z^2 + c`: the root of
/// `f_c^(l+p)(z) - f_c^l(z)` reached from the extrapolated ray endpoint,
/// where `l` and `p` are the preperiod and period of `theta`. When the
/// extrapolation is still far from the root, the ray is traced deeper. This
/// stays accurate in floating point since the conditioning depends on the
/// distance to the Julia set, not on the potential.
pub fn dynamic_landing_point(
    c: Complex64,
    theta: &Angle,
    settings: &SolverSettings,
) -> Result<SolvedPoint, PlaneError> {
    let mut deeper = *settings;
    loop {
        match landing_attempt(c, theta, &deeper) {
            Err(PlaneError::SeedMismatch { .. })
                if deeper.ray_final_potential * DEEPEN_FACTOR >= DEEPEST_POTENTIAL =>
            {
                deeper.ray_final_potential *= DEEPEN_FACTOR;
            }
            other => return other,
        }
    }
}

fn landing_attempt(
    c: Complex64,
    theta: &Angle,
    settings: &SolverSettings,
) -> Result<SolvedPoint, PlaneError> {
    let l = theta.preperiod() as usize;
    let p = theta.period() as usize;
    let ray = trace_dynamic_ray(c, theta, settings);
    if let Some(err) = &ray.error {
        return Err(PlaneError::RayFailed {
            angle: theta.clone(),
            reason: err.clone(),
        });
    }
    let seed = extrapolated_endpoint(&ray.points, settings.steps_per_halving as usize * p)
        .ok_or_else(|| PlaneError::RayFailed {
            angle: theta.clone(),
            reason: "empty ray".into(),
        })?;
    let (z, residual, newton_steps) = newton_solve(
        seed,
        settings,
        &format!("landing point of the dynamic ray {theta}"),
        |z0| {
            let (mut z, mut d) = (z0, Complex64::new(1.0, 0.0));
            let (mut zl, mut dl) = (z, d);
            for k in 0..l + p {
                if k == l {
                    (zl, dl) = (z, d);
                }
                d = 2.0 * z * d;
                z = z * z + c;
            }
            (z - zl, d - dl)
        },
    )?;
    let distance = (z - seed).norm();
    if distance > DYNAMIC_SEED_TOLERANCE {
        return Err(PlaneError::SeedMismatch {
            angle: theta.clone(),
            distance,
        });
    }
    Ok(SolvedPoint {
        point: z,
        residual,
        newton_steps,
        seed,
    })
}

/// Multiplier `(f_c^p)'(z)` of the cycle through `z = f_c^p(0)`.
pub fn cycle_multiplier(c: Complex64, period: u32) -> Complex64 {
    let orbit = critical_orbit(c, 2 * period as usize);
    orbit[period as usize..2 * period as usize]
        .iter()
        .fold(Complex64::new(1.0, 0.0), |m, (z, _)| m * 2.0 * z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: i64, d: i64) -> Angle {
        Angle::new(n, d).unwrap()
    }

    #[test]
    fn tip_of_the_antenna() {
        let s = SolverSettings::default();
        let m = solve_misiurewicz(&Angle::half(), &s).unwrap();
        assert!((m.point - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!(matches!(
            solve_misiurewicz(&a(1, 3), &s),
            Err(PlaneError::NotPreperiodic(_))
        ));
    }

    #[test]
    fn long_period_misiurewicz_point() {
        let s = SolverSettings::default();
        let t = a(11, 122);
        assert_eq!((t.preperiod(), t.period()), (1, 60));
        let m = solve_misiurewicz(&t, &s).unwrap();
        assert!(m.residual < 1e-12);
        let end = trace_parameter_ray(&t, &s).endpoint().unwrap();
        assert!((m.point - end).norm() < 1e-6);
    }

    #[test]
    fn low_period_centers() {
        let s = SolverSettings::default();
        let c1 = solve_center(1, &Angle::zero(), &s).unwrap();
        assert!(c1.point.norm() < 1e-12);
        let c2 = solve_center(2, &a(1, 3), &s).unwrap();
        assert!((c2.point - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!(cycle_multiplier(c2.point, 2).norm() < 1e-8);
        assert!(matches!(
            solve_center(3, &a(1, 3), &s),
            Err(PlaneError::WrongPeriod { .. })
        ));
    }

    #[test]
    fn divisors() {
        assert_eq!(proper_divisors(12).collect::<Vec<_>>(), vec![1, 2, 3, 4, 6]);
        assert_eq!(proper_divisors(1).count(), 0);
    }
}
