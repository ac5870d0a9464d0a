use std::path::Path;

use edge_surgery::angle::abs_difference;
use edge_surgery::plane::{
    escape_data, lowest_period_component, map_parameter_point, solve_center, solve_misiurewicz,
    svg_overlay, trace_dynamic_ray, trace_parameter_ray, verify_angles_numeric, ParameterKind,
    Plane, Viewport, INTERIOR,
};
use edge_surgery::surgery::{
    tune_angle, validate_config, ConfigFile, Side, ValidationReport, THETA_LABELS,
};
use edge_surgery::{Angle, SurgeryHomeo, TuningWord};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::report::{self, Report};
use crate::{parse_angle, CliError, Context, MapParamArgs, Outcome, PlaneKind, RenderArgs};

/// Half width of the dynamic-plane window when none is given.
const JULIA_HALF_WIDTH: f64 = 1.8;

fn strings(angles: &[Angle]) -> Vec<String> {
    angles.iter().map(Angle::to_string).collect()
}

fn finish(
    ctx: &Context,
    command: Value,
    results: Value,
    errors: Vec<String>,
) -> Result<Outcome, CliError> {
    let name = command["name"].as_str().expect("command name").to_string();
    let report = Report {
        command,
        config: ctx
            .config
            .as_ref()
            .map_or(Value::Null, |c| report::config_echo(&c.path, &c.file)),
        settings: serde_json::to_value(ctx.settings).expect("settings serialize"),
        results,
        errors: errors.clone(),
    };
    let text = report.to_json();
    if ctx.out.is_some() {
        ctx.write(&format!("{name}.json"), text.as_bytes())?;
    }
    Ok(Outcome {
        stdout: text,
        code: if errors.is_empty() { 0 } else { 1 },
        diagnostics: errors,
    })
}

fn surgery(ctx: &Context) -> Result<SurgeryHomeo, CliError> {
    let cfg = ctx.config()?;
    let edge = validate_config(cfg.angles.clone()).map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(SurgeryHomeo::new(edge)?)
}

pub(crate) fn validate(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = ctx.config()?;
    let check = ValidationReport::run(&cfg.angles);
    let mut errors: Vec<String> = check.errors.iter().map(|e| e.message.clone()).collect();
    let mut results = serde_json::to_value(&check).expect("report serializes");
    results["angles"] = json!(strings(&cfg.angles));
    if ctx.numeric && check.valid {
        let numeric = verify_angles_numeric(&cfg.angles, &ctx.settings)?;
        errors.extend(numeric.failures.iter().cloned());
        results["numeric"] = report::numeric(&numeric);
    }
    let command = json!({ "name": "validate", "numeric": ctx.numeric });
    finish(ctx, command, results, errors)
}

pub(crate) fn map_angle(ctx: &Context, theta: &Angle, n: i64) -> Result<Outcome, CliError> {
    let h = surgery(ctx)?;
    let image = h.map_angle(theta, n)?;
    let back = h.map_angle(&image, -n)?;
    let mut errors = Vec::new();
    if &back != theta {
        errors.push(format!("h^{} of the image is {back}, not {theta}", -n));
    }
    let results = json!({
        "input": theta.to_string(),
        "n": n,
        "image": image.to_string(),
        "expansion": image.to_expansion().to_string(),
        "orbit_class": { "preperiod": image.preperiod(), "period": image.period() },
        "round_trip": back.to_string(),
    });
    let command = json!({ "name": "map-angle", "theta": theta.to_string(), "n": n });
    finish(ctx, command, results, errors)
}

pub(crate) fn map_param(ctx: &Context, args: &MapParamArgs) -> Result<Outcome, CliError> {
    let kind = match (&args.misiurewicz, &args.center) {
        (Some(t), None) => ParameterKind::Misiurewicz(t.clone()),
        (None, Some(v)) => {
            let period = v[0]
                .parse::<u32>()
                .map_err(|e| CliError::Usage(format!("period {:?}: {e}", v[0])))?;
            let angle = parse_angle(&v[1]).map_err(CliError::Usage)?;
            ParameterKind::Center { period, angle }
        }
        _ => return Err(CliError::Usage("give --misiurewicz or --center".into())),
    };
    let h = surgery(ctx)?;
    let mapped = map_parameter_point(&h, &kind, args.n, &ctx.settings)?;
    let (kind_echo, period) = match &kind {
        ParameterKind::Misiurewicz(_) => (json!("misiurewicz"), Value::Null),
        ParameterKind::Center { period, .. } => (json!("center"), json!(period)),
    };
    let results = json!({
        "kind": kind_echo,
        "n": args.n,
        "source_angle": mapped.source_angle.to_string(),
        "image_angle": mapped.image_angle.to_string(),
        "image_orbit_class": {
            "preperiod": mapped.image_angle.preperiod(),
            "period": mapped.image_angle.period(),
        },
        "source": report::solved(&mapped.source),
        "image": report::solved(&mapped.image),
        "displacement": (mapped.image.point - mapped.source.point).norm(),
    });
    let command = json!({
        "name": "map-param",
        "kind": kind_echo,
        "period": period,
        "theta": mapped.source_angle.to_string(),
        "n": args.n,
    });
    finish(ctx, command, results, Vec::new())
}

pub(crate) fn domains(ctx: &Context, n_max: u32) -> Result<Outcome, CliError> {
    let h = surgery(ctx)?;
    let pairs = h.fundamental_domains(n_max)?;
    let last = pairs.last().expect("at least the zeroth pair");
    let cfg = h.config();
    let mut results = json!({
        "n_max": n_max,
        "pairs": pairs.iter().map(report::domain).collect::<Vec<_>>(),
        "nested": true,
        "last_distance_to_theta4": {
            "minus": abs_difference(&last.minus, cfg.theta(4, Side::Minus)),
            "plus": abs_difference(&last.plus, cfg.theta(4, Side::Plus)),
        },
    });
    if ctx.numeric {
        let solved = pairs
            .iter()
            .map(|p| {
                let c = solve_misiurewicz(&p.minus, &ctx.settings)?;
                Ok(json!({ "n": p.n, "c": report::solved(&c) }))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        results["parameters"] = json!(solved);
    }
    let command = json!({ "name": "domains", "n_max": n_max, "numeric": ctx.numeric });
    finish(ctx, command, results, Vec::new())
}

pub(crate) fn tune(ctx: &Context, word0: &str, word1: &str) -> Result<Outcome, CliError> {
    let word = TuningWord::parse(word0, word1)?;
    let cfg = ctx.config()?;
    let tuned = cfg.angles.clone().map(|t| tune_angle(&word, &t));
    let file_name = format!(
        "{}_tuned.json",
        Path::new(&cfg.path)
            .file_stem()
            .map_or("config".into(), |s| s.to_string_lossy())
    );
    ctx.write(
        &file_name,
        ConfigFile::from_angles(&tuned).to_json().as_bytes(),
    )?;
    let check = ValidationReport::run(&tuned);
    let errors = check.errors.iter().map(|e| e.message.clone()).collect();
    let expansions: Vec<Value> = tuned
        .iter()
        .zip(THETA_LABELS)
        .map(|(t, label)| json!({ "label": label, "expansion": t.to_expansion().to_string() }))
        .collect();
    let results = json!({
        "tuned_config": file_name,
        "angles": strings(&tuned),
        "expansions": expansions,
        "validation": check,
    });
    let command = json!({ "name": "tune", "word0": word0, "word1": word1 });
    finish(ctx, command, results, errors)
}

pub(crate) fn render(ctx: &Context, args: &RenderArgs) -> Result<Outcome, CliError> {
    let cfg = ctx.config()?;
    validate_config(cfg.angles.clone()).map_err(|e| CliError::Invalid(e.to_string()))?;
    let (plane, c, default_center, default_half_width) = match args.plane {
        PlaneKind::Parameter => {
            let a = solve_misiurewicz(&cfg.angles[0], &ctx.settings)?.point;
            let b = solve_misiurewicz(&cfg.angles[3], &ctx.settings)?.point;
            (Plane::Mandelbrot, None, 0.5 * (a + b), (a - b).norm())
        }
        PlaneKind::Dynamic => {
            let c = match args.c {
                Some(c) => c,
                None => {
                    let (p, lo, _) = lowest_period_component(&cfg.angles).ok_or_else(|| {
                        CliError::Usage("no low-period center inside the edge; pass --c".into())
                    })?;
                    solve_center(p, &lo, &ctx.settings)?.point
                }
            };
            (
                Plane::Julia(c),
                Some(c),
                Complex64::new(0.0, 0.0),
                JULIA_HALF_WIDTH,
            )
        }
    };
    let view = Viewport::new(
        args.center.unwrap_or(default_center),
        args.half_width.unwrap_or(default_half_width),
        args.width,
        args.height,
    )?;
    let image = escape_data(plane, &view, ctx.settings.escape_radius, args.max_iter);
    let rays: Vec<_> = cfg
        .angles
        .iter()
        .map(|t| match c {
            Some(c) => trace_dynamic_ray(c, t, &ctx.settings),
            None => trace_parameter_ray(t, &ctx.settings),
        })
        .collect();
    let stem = match args.plane {
        PlaneKind::Parameter => "parameter",
        PlaneKind::Dynamic => "dynamic",
    };
    let mut ppm = Vec::new();
    image
        .write_ppm(&mut ppm)
        .expect("writing to memory cannot fail");
    let (ppm_name, svg_name) = (format!("{stem}.ppm"), format!("{stem}.svg"));
    ctx.write(&ppm_name, &ppm)?;
    ctx.write(&svg_name, svg_overlay(&view, &rays).as_bytes())?;
    let errors: Vec<String> = rays
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("ray {}: {e}", r.angle)))
        .collect();
    let results = json!({
        "plane": stem,
        "c": c.map(report::complex),
        "viewport": report::viewport(&view),
        "max_iter": args.max_iter,
        "image": ppm_name,
        "overlay": svg_name,
        "interior_pixels": image.data.iter().filter(|&&n| n == INTERIOR).count(),
        "rays": rays.iter().map(report::ray_summary).collect::<Vec<_>>(),
    });
    let command = json!({
        "name": "render",
        "plane": stem,
        "c": args.c.map(report::complex),
        "center": args.center.map(report::complex),
        "half_width": args.half_width,
        "width": args.width,
        "height": args.height,
        "max_iter": args.max_iter,
    });
    finish(ctx, command, results, errors)
}

pub(crate) fn trace_ray(
    ctx: &Context,
    theta: &Angle,
    c: Option<Complex64>,
) -> Result<Outcome, CliError> {
    let ray = match c {
        Some(c) => trace_dynamic_ray(c, theta, &ctx.settings),
        None => trace_parameter_ray(theta, &ctx.settings),
    };
    let text = ray.to_text();
    if ctx.out.is_some() {
        ctx.write("ray.txt", text.as_bytes())?;
    }
    let diagnostics: Vec<String> = ray
        .error
        .iter()
        .map(|e| format!("ray {theta}: {e}"))
        .collect();
    Ok(Outcome {
        stdout: text,
        code: if diagnostics.is_empty() { 0 } else { 1 },
        diagnostics,
    })
}
