use serde::{Deserialize, Serialize};

use super::PlaneError;

/// Tolerances and step counts shared by ray tracing, Newton solvers and
/// escape-time rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub newton_tolerance: f64,
    pub max_newton_steps: u32,
    /// Potential `ln|Φ|` of the first ray point; `ln 4` starts near radius 4.
    pub ray_start_potential: f64,
    pub ray_final_potential: f64,
    pub steps_per_halving: u32,
    pub escape_radius: f64,
    pub max_iterations: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            newton_tolerance: 1e-12,
            max_newton_steps: 64,
            ray_start_potential: 4f64.ln(),
            ray_final_potential: 1e-10,
            steps_per_halving: 16,
            escape_radius: 1e3,
            max_iterations: 10_000,
        }
    }
}

pub const SETTING_KEYS: [&str; 7] = [
    "newton_tolerance",
    "max_newton_steps",
    "ray_start_potential",
    "ray_final_potential",
    "steps_per_halving",
    "escape_radius",
    "max_iterations",
];

impl SolverSettings {
    /// Overrides one setting from its textual value, then re-validates.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PlaneError> {
        let bad = |reason: String| PlaneError::InvalidSetting {
            key: key.to_string(),
            reason,
        };
        let float = || value.trim().parse::<f64>().map_err(|e| bad(e.to_string()));
        let int = || value.trim().parse::<u32>().map_err(|e| bad(e.to_string()));
        let mut next = *self;
        match key {
            "newton_tolerance" => next.newton_tolerance = float()?,
            "max_newton_steps" => next.max_newton_steps = int()?,
            "ray_start_potential" => next.ray_start_potential = float()?,
            "ray_final_potential" => next.ray_final_potential = float()?,
            "steps_per_halving" => next.steps_per_halving = int()?,
            "escape_radius" => next.escape_radius = float()?,
            "max_iterations" => next.max_iterations = int()?,
            _ => return Err(PlaneError::UnknownSetting(key.to_string())),
        }
        next.validate()?;
        *self = next;
        Ok(())
    }

    /// Applies `key=value` overrides in order.
    pub fn with_overrides<'a>(
        mut self,
        overrides: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, PlaneError> {
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| PlaneError::InvalidSetting {
                    key: item.to_string(),
                    reason: "expected key=value".into(),
                })?;
            self.set(key.trim(), value)?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), PlaneError> {
        let bad = |key: &str, reason: &str| {
            Err(PlaneError::InvalidSetting {
                key: key.to_string(),
                reason: reason.to_string(),
            })
        };
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.newton_tolerance) {
            return bad("newton_tolerance", "must be positive");
        }
        if self.max_newton_steps == 0 {
            return bad("max_newton_steps", "must be positive");
        }
        if !positive(self.ray_start_potential) {
            return bad("ray_start_potential", "must be positive");
        }
        if !positive(self.ray_final_potential) {
            return bad("ray_final_potential", "must be positive");
        }
        if self.ray_final_potential >= self.ray_start_potential {
            return bad("ray_final_potential", "must be below ray_start_potential");
        }
        if self.steps_per_halving == 0 {
            return bad("steps_per_halving", "must be positive");
        }
        if !positive(self.escape_radius) || self.escape_radius <= 2.0 {
            return bad("escape_radius", "must exceed 2");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations", "must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SolverSettings::default().validate().unwrap();
    }

    #[test]
    fn overrides() {
        let s = SolverSettings::default()
            .with_overrides(["ray_final_potential=1e-6", "steps_per_halving = 8"])
            .unwrap();
        assert_eq!(s.ray_final_potential, 1e-6);
        assert_eq!(s.steps_per_halving, 8);
        assert!(matches!(
            SolverSettings::default().with_overrides(["colour=red"]),
            Err(PlaneError::UnknownSetting(_))
        ));
        let mut s = SolverSettings::default();
        assert!(s.set("ray_final_potential", "10").is_err());
        assert_eq!(s, SolverSettings::default());
        assert!(s.set("max_iterations", "-3").is_err());
    }
}
