//! Point binning and Gaussian kernel density estimation on a pixel grid.
//!
//! Grids are row-major with `x` as the column and `y` as the row. Pixel
//! `(0, 0)` covers the lower-left corner `(x_min, y_min)` of the viewport.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernels are truncated at this many standard deviations.
pub const KERNEL_TRUNCATION_SIGMAS: f64 = 4.0;

/// Fraction of `max(width, height)` used as the default bandwidth.
pub const DEFAULT_BANDWIDTH_FRACTION: f64 = 0.01;

/// A projected data point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
    pub text: Option<String>,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            weight: 1.0,
            text: None,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }
}

/// Maps a data-space rectangle onto a `width` x `height` pixel grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub width: usize,
    pub height: usize,
}

impl Viewport {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let viewport = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            width,
            height,
        };
        viewport.validate()?;
        Ok(viewport)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::param("viewport", "bounds must be finite"));
        }
        if !(self.x_min < self.x_max && self.y_min < self.y_max) {
            return Err(Error::param("viewport", "requires x_min < x_max and y_min < y_max"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("viewport", "width and height must be at least 1"));
        }
        Ok(())
    }

    /// Data-space size of one pixel, `(sx, sy)`.
    pub fn pixel_size(&self) -> (f64, f64) {
        (
            (self.x_max - self.x_min) / self.width as f64,
            (self.y_max - self.y_min) / self.height as f64,
        )
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pixel containing a data point. Points on `x_max`/`y_max` land in the
    /// last column/row; points outside the viewport give `None`.
    pub fn pixel_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !(x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max) {
            return None;
        }
        let px = axis_cell(x, self.x_min, self.x_max, self.width);
        let py = axis_cell(y, self.y_min, self.y_max, self.height);
        Some((px, py))
    }

    /// Data coordinates of a (possibly fractional) pixel-grid location.
    pub fn to_data(&self, px: f64, py: f64) -> (f64, f64) {
        let (sx, sy) = self.pixel_size();
        (self.x_min + px * sx, self.y_min + py * sy)
    }

    /// Continuous inverse of [`Viewport::to_data`].
    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        let (sx, sy) = self.pixel_size();
        ((x - self.x_min) / sx, (y - self.y_min) / sy)
    }
}

fn axis_cell(v: f64, lo: f64, hi: f64, cells: usize) -> usize {
    let t = (v - lo) / (hi - lo) * cells as f64;
    (t.floor() as usize).min(cells - 1)
}

/// A grid of non-negative densities over a viewport.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMap {
    viewport: Viewport,
    values: Vec<f64>,
}

impl DensityMap {
    pub fn zeros(viewport: Viewport) -> Self {
        Self {
            values: vec![0.0; viewport.len()],
            viewport,
        }
    }

    pub fn from_values(viewport: Viewport, values: Vec<f64>) -> Result<Self> {
        viewport.validate()?;
        if values.len() != viewport.len() {
            return Err(Error::param(
                "values",
                format!("expected {} values, got {}", viewport.len(), values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::param(
                "values",
                format!("value at index {i} is negative or non-finite"),
            ));
        }
        Ok(Self { viewport, values })
    }

    /// A map over the unit-pixel viewport `[0, width] x [0, height]`.
    pub fn from_pixels(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let viewport = Viewport::new(0.0, width as f64, 0.0, height as f64, width, height)?;
        Self::from_values(viewport, values)
    }

    pub fn viewport(&self) -> &Viewport {
        &self.viewport
    }

    pub fn width(&self) -> usize {
        self.viewport.width
    }

    pub fn height(&self) -> usize {
        self.viewport.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.viewport.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Bounding box of `points` expanded by `padding_fraction` of its span on
/// each side. Degenerate axes are widened to a span of one data unit first.
pub fn auto_viewport(
    points: &[Point2D],
    width: usize,
    height: usize,
    padding_fraction: f64,
) -> Result<Viewport> {
    if !(0.0..1.0).contains(&padding_fraction) {
        return Err(Error::param("padding_fraction", "must be in [0, 1)"));
    }
    let mut bounds: Option<[f64; 4]> = None;
    for p in points.iter().filter(|p| p.x.is_finite() && p.y.is_finite()) {
        let b = bounds.get_or_insert([p.x, p.x, p.y, p.y]);
        b[0] = b[0].min(p.x);
        b[1] = b[1].max(p.x);
        b[2] = b[2].min(p.y);
        b[3] = b[3].max(p.y);
    }
    let [x_lo, x_hi, y_lo, y_hi] = bounds.ok_or(Error::NoData)?;
    let (x_min, x_max) = pad_axis(x_lo, x_hi, padding_fraction);
    let (y_min, y_max) = pad_axis(y_lo, y_hi, padding_fraction);
    Viewport::new(x_min, x_max, y_min, y_max, width, height)
}

fn pad_axis(lo: f64, hi: f64, padding_fraction: f64) -> (f64, f64) {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let pad = (hi - lo) * padding_fraction;
    (lo - pad, hi + pad)
}

/// Result of [`bin_points`].
#[derive(Debug, Clone)]
pub struct BinnedPoints {
    pub counts: DensityMap,
    /// Points outside the viewport.
    pub outside: usize,
    /// Points skipped for non-finite coordinates or invalid weights.
    pub skipped: usize,
}

/// Adds each point's weight to the pixel containing it.
pub fn bin_points(points: &[Point2D], viewport: &Viewport) -> Result<BinnedPoints> {
    viewport.validate()?;
    let mut counts = DensityMap::zeros(*viewport);
    let mut outside = 0;
    let mut skipped = 0;
    for p in points {
        if !(p.x.is_finite() && p.y.is_finite() && p.weight.is_finite() && p.weight >= 0.0) {
            skipped += 1;
            continue;
        }
        match viewport.pixel_of(p.x, p.y) {
            Some((px, py)) => counts.values[py * viewport.width + px] += p.weight,
            None => outside += 1,
        }
    }
    Ok(BinnedPoints {
        counts,
        outside,
        skipped,
    })
}

/// Default bandwidth in pixels for a grid.
pub fn default_bandwidth(width: usize, height: usize) -> f64 {
    DEFAULT_BANDWIDTH_FRACTION * width.max(height) as f64
}

/// Kernel radius in pixels for a given standard deviation.
pub fn kernel_radius(sigma: f64) -> usize {
    (KERNEL_TRUNCATION_SIGMAS * sigma).ceil() as usize
}

/// Discrete 1D Gaussian of length `2r + 1`, truncated at
/// [`KERNEL_TRUNCATION_SIGMAS`] and renormalized to sum to one.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![1.0];
    }
    let r = kernel_radius(sigma) as i64;
    let denom = 2.0 * sigma * sigma;
    let mut kernel: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / denom).exp()).collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= total);
    kernel
}

/// Convolves `counts` with an isotropic Gaussian of standard deviation
/// `bandwidth_px`, using separable passes and zero padding.
pub fn smooth(counts: &DensityMap, bandwidth_px: f64) -> Result<DensityMap> {
    if !(bandwidth_px.is_finite() && bandwidth_px >= 0.0) {
        return Err(Error::param("bandwidth", "must be finite and >= 0"));
    }
    if bandwidth_px == 0.0 {
        return Ok(counts.clone());
    }
    let kernel = gaussian_kernel(bandwidth_px);
    let r = kernel.len() / 2;
    let (w, h) = (counts.width(), counts.height());

    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        let src = &counts.values[y * w..(y + 1) * w];
        let dst = &mut rows[y * w..(y + 1) * w];
        convolve_line(src, dst, &kernel, r);
    }

    let mut out = vec![0.0; w * h];
    let mut column = vec![0.0; h];
    let mut smoothed = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            column[y] = rows[y * w + x];
        }
        convolve_line(&column, &mut smoothed, &kernel, r);
        for y in 0..h {
            out[y * w + x] = smoothed[y];
        }
    }
    Ok(DensityMap {
        viewport: counts.viewport,
        values: out,
    })
}

/// Scatter form: zero source cells cost nothing, which suits sparse counts.
fn convolve_line(src: &[f64], dst: &mut [f64], kernel: &[f64], r: usize) {
    dst.fill(0.0);
    let n = src.len();
    for (i, &v) in src.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let lo = i.saturating_sub(r);
        let hi = (i + r).min(n - 1);
        for (j, d) in dst.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *d += v * kernel[j + r - i];
        }
    }
}
