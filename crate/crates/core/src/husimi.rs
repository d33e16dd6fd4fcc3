//! Coherent states and the Husimi Q function on a rectangular grid.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockVector;

/// Default tail tolerance for a coherent state to be considered representable.
pub const COHERENT_TAIL_TOL: f64 = 1e-10;

/// `|α⟩` truncated to `dim` levels and renormalized.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<FockVector> {
    coherent_state_with_tolerance(alpha, dim, COHERENT_TAIL_TOL)
}

pub fn coherent_state_with_tolerance(alpha: C64, dim: usize, tolerance: f64) -> Result<FockVector> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for n in 1..dim {
        c *= alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let state = FockVector::from_amplitudes(amps)?;
    // mass beyond the cutoff plus the top levels kept
    let missing = (1.0 - state.norm_sqr()).max(0.0);
    let tail = state.tail_mass() + missing;
    if tail >= tolerance {
        return Err(Error::TruncationOverflow {
            tail,
            dim,
            tolerance,
        });
    }
    state.normalized()
}

/// `⟨α|ψ⟩` with the coherent state taken untruncated; exact because `ψ` has
/// no support above its own dimension.
pub fn coherent_overlap(alpha: C64, state: &FockVector) -> C64 {
    let conj = alpha.conj();
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for (n, amp) in state.amplitudes().iter().enumerate() {
        if n > 0 {
            c *= conj / (n as f64).sqrt();
        }
        acc += c * amp;
    }
    acc
}

/// Rectangular window in the complex `α` plane. Axis points include both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
    /// Largest tolerated probability mass outside the window.
    pub coverage_tolerance: f64,
}

impl GridSpec {
    pub fn square(half_width: f64, resolution: usize) -> Self {
        Self {
            re_range: (-half_width, half_width),
            im_range: (-half_width, half_width),
            resolution,
            coverage_tolerance: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Resolution(format!(
                "grid resolution {} below 2",
                self.resolution
            )));
        }
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && hi > lo;
        if !ok(self.re_range) || !ok(self.im_range) {
            return Err(Error::InvalidParameter(
                "grid ranges must be finite and increasing".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.coverage_tolerance) {
            return Err(Error::InvalidParameter(
                "coverage tolerance outside [0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Sampled Q function. `values[(i, j)]` is at `Im α = im_axis[i]`,
/// `Re α = re_axis[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
    pub values: DMatrix<f64>,
}

/// First and second moments of a grid, in `α` coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMoments {
    pub mass: f64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub var_re: f64,
    pub var_im: f64,
    pub cov: f64,
}

/// Principal axes of the grid's covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalAxes {
    pub major_variance: f64,
    pub minor_variance: f64,
    /// Angle of the major axis from the `Re α` axis, in `(−π/2, π/2]`.
    pub major_angle: f64,
}

impl PrincipalAxes {
    pub fn ratio(&self) -> f64 {
        self.major_variance / self.minor_variance
    }
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    let step = (range.1 - range.0) / (n - 1) as f64;
    (0..n).map(|k| range.0 + step * k as f64).collect()
}

impl PhaseSpaceGrid {
    pub fn re_axis(&self) -> Vec<f64> {
        axis(self.re_range, self.resolution)
    }

    pub fn im_axis(&self) -> Vec<f64> {
        axis(self.im_range, self.resolution)
    }

    pub fn cell_area(&self) -> f64 {
        let n = (self.resolution - 1) as f64;
        (self.re_range.1 - self.re_range.0) / n * (self.im_range.1 - self.im_range.0) / n
    }

    /// Riemann sum of Q over the grid.
    pub fn total_mass(&self) -> f64 {
        self.values.sum() * self.cell_area()
    }

    pub fn max_value(&self) -> f64 {
        self.values.max()
    }

    pub fn moments(&self) -> GridMoments {
        let re = self.re_axis();
        let im = self.im_axis();
        let (mut w, mut sr, mut si, mut srr, mut sii, mut sri) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, &y) in im.iter().enumerate() {
            for (j, &x) in re.iter().enumerate() {
                let q = self.values[(i, j)];
                w += q;
                sr += q * x;
                si += q * y;
                srr += q * x * x;
                sii += q * y * y;
                sri += q * x * y;
            }
        }
        let mean_re = sr / w;
        let mean_im = si / w;
        GridMoments {
            mass: w * self.cell_area(),
            mean_re,
            mean_im,
            var_re: srr / w - mean_re * mean_re,
            var_im: sii / w - mean_im * mean_im,
            cov: sri / w - mean_re * mean_im,
        }
    }

    pub fn principal_axes(&self) -> PrincipalAxes {
        let m = self.moments();
        let half_trace = 0.5 * (m.var_re + m.var_im);
        let half_gap = (0.25 * (m.var_re - m.var_im).powi(2) + m.cov * m.cov).sqrt();
        let mut angle = 0.5 * (2.0 * m.cov).atan2(m.var_re - m.var_im);
        if angle <= -std::f64::consts::FRAC_PI_2 {
            angle += std::f64::consts::PI;
        }
        PrincipalAxes {
            major_variance: half_trace + half_gap,
            minor_variance: half_trace - half_gap,
            major_angle: angle,
        }
    }
}

/// `Q(α) = |⟨α|ψ⟩|²/π` over `spec`. Fails if the window misses more than the
/// configured coverage tolerance of the state.
pub fn husimi_q(state: &FockVector, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    spec.validate()?;
    let n = spec.resolution;
    let re = axis(spec.re_range, n);
    let im = axis(spec.im_range, n);
    let rows: Vec<Vec<f64>> = im
        .par_iter()
        .map(|&y| {
            re.iter()
                .map(|&x| coherent_overlap(C64::new(x, y), state).norm_sqr() / std::f64::consts::PI)
                .collect()
        })
        .collect();
    let values = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let grid = PhaseSpaceGrid {
        re_range: spec.re_range,
        im_range: spec.im_range,
        resolution: n,
        values,
    };
    let mass = grid.total_mass();
    let required = (1.0 - spec.coverage_tolerance) * state.norm_sqr();
    if mass < required {
        return Err(Error::GridCoverage { mass, required });
    }
    Ok(grid)
}
