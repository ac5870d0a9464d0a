//! JSON payloads. Everything goes through `serde_json::Value`, whose maps
//! are ordered by key, so the rendered text is deterministic.

use edge_surgery::plane::{LandingPair, NumericReport, RayPolyline, SolvedPoint, Viewport};
use edge_surgery::surgery::{ConfigFile, DomainPair};
use num_complex::Complex64;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Command echo, config echo and per-command results. No timings, so that
/// repeated runs produce identical bytes.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: Value,
    pub config: Value,
    pub settings: Value,
    pub results: Value,
    pub errors: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let doc = json!({
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "settings": self.settings,
            "results": self.results,
            "errors": self.errors,
        });
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }
}

pub fn config_echo(path: &str, file: &ConfigFile) -> Value {
    let mut v = serde_json::to_value(file).expect("config serializes");
    v["path"] = json!(path);
    v
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn solved(p: &SolvedPoint) -> Value {
    json!({
        "c": complex(p.point),
        "residual": p.residual,
        "newton_steps": p.newton_steps,
        "seed": complex(p.seed),
    })
}

fn pair(p: &LandingPair) -> Value {
    json!({
        "index": p.index,
        "minus": p.minus.to_string(),
        "plus": p.plus.to_string(),
        "minus_end": complex(p.minus_end),
        "plus_end": complex(p.plus_end),
        "distance": p.distance,
        "colands": p.colands,
    })
}

pub fn numeric(r: &NumericReport) -> Value {
    let vertices: Vec<Value> = r
        .vertices
        .iter()
        .map(|v| {
            json!({
                "angle": v.angle.to_string(),
                "solved": complex(v.solved),
                "ray_endpoint": complex(v.ray_endpoint),
                "distance": v.distance,
                "ok": v.ok,
            })
        })
        .collect();
    let samples: Vec<Value> = r
        .samples
        .iter()
        .map(|s| {
            json!({
                "label": s.label,
                "c": complex(s.c),
                "boundary": s.boundary,
                "pairs": s.pairs.iter().map(pair).collect::<Vec<_>>(),
                "min_separation": s.min_separation,
                "distinct": s.distinct,
                "ok": s.ok,
            })
        })
        .collect();
    json!({
        "ok": r.ok(),
        "vertices": vertices,
        "samples": samples,
        "failures": r.failures,
    })
}

pub fn domain(p: &DomainPair) -> Value {
    json!({ "n": p.n, "minus": p.minus.to_string(), "plus": p.plus.to_string() })
}

pub fn viewport(v: &Viewport) -> Value {
    json!({
        "center": complex(v.center),
        "half_width": v.half_width,
        "width": v.width,
        "height": v.height,
    })
}

pub fn ray_summary(r: &RayPolyline) -> Value {
    json!({
        "angle": r.angle.to_string(),
        "endpoint": r.endpoint().map(complex),
        "final_potential": r.final_potential(),
        "points": r.points.len(),
        "error": r.error,
        "resolution_limited": r.resolution_limited,
    })
}
