use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use super::PlaneError;

/// Axis-aligned window: `center` and half the width along the real axis.
/// Pixels are square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub center: Complex64,
    pub half_width: f64,
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub fn new(
        center: Complex64,
        half_width: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, PlaneError> {
        if width == 0 || height == 0 {
            return Err(PlaneError::InvalidViewport(format!(
                "{width}x{height} pixels"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(PlaneError::InvalidViewport(format!(
                "half width {half_width}"
            )));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(PlaneError::InvalidViewport(format!("center {center}")));
        }
        Ok(Viewport {
            center,
            half_width,
            width,
            height,
        })
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.half_width / self.width as f64
    }

    /// Point at the center of pixel `(x, y)`; `y` grows downwards.
    pub fn pixel_to_point(&self, x: u32, y: u32) -> Complex64 {
        let s = self.pixel_size();
        let half_height = 0.5 * s * self.height as f64;
        Complex64::new(
            self.center.re - self.half_width + (x as f64 + 0.5) * s,
            self.center.im + half_height - (y as f64 + 0.5) * s,
        )
    }

    /// Continuous pixel coordinates of a point.
    pub fn point_to_pixel(&self, p: Complex64) -> (f64, f64) {
        let s = self.pixel_size();
        let half_height = 0.5 * s * self.height as f64;
        (
            (p.re - self.center.re + self.half_width) / s,
            (self.center.im + half_height - p.im) / s,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plane {
    Mandelbrot,
    Julia(Complex64),
}

/// Iterations until `|z| > radius`, or `None` if the orbit stays bounded
/// for `cap` steps.
pub fn escape_time(plane: Plane, p: Complex64, radius: f64, cap: u32) -> Option<u32> {
    let (mut z, c) = match plane {
        Plane::Mandelbrot => (Complex64::new(0.0, 0.0), p),
        Plane::Julia(c) => (p, c),
    };
    let r2 = radius * radius;
    for n in 0..=cap {
        if z.norm_sqr() > r2 {
            return Some(n);
        }
        z = z * z + c;
    }
    None
}

pub const INTERIOR: u32 = u32::MAX;

/// Row-major escape counts; [`INTERIOR`] marks pixels that never escaped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u32>,
}

impl ImageBuffer {
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.data[(y * self.width + x) as usize]
    }

    /// Binary PPM (P6). Interior is black, escaping pixels are shaded by a
    /// smooth periodic palette of the escape count.
    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        let mut bytes = Vec::with_capacity(self.data.len() * 3);
        for &n in &self.data {
            bytes.extend_from_slice(&palette(n));
        }
        out.write_all(&bytes)
    }
}

fn palette(n: u32) -> [u8; 3] {
    if n == INTERIOR {
        return [0, 0, 0];
    }
    let t = (n % 64) as f64 / 64.0 * std::f64::consts::TAU;
    let channel = |phase: f64| (127.5 + 127.5 * (t + phase).cos()).round() as u8;
    [channel(0.0), channel(2.1), channel(4.2)]
}

/// Escape-time data for a viewport. Rows are computed in parallel; each
/// pixel depends only on its coordinates, so the result does not depend
/// on the thread count.
pub fn escape_data(plane: Plane, view: &Viewport, radius: f64, cap: u32) -> ImageBuffer {
    let mut data = vec![0u32; view.width as usize * view.height as usize];
    data.par_chunks_mut(view.width as usize)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, px) in row.iter_mut().enumerate() {
                let p = view.pixel_to_point(x as u32, y as u32);
                *px = escape_time(plane, p, radius, cap).unwrap_or(INTERIOR);
            }
        });
    ImageBuffer {
        width: view.width,
        height: view.height,
        data,
    }
}
