//! Single-mode squeezed vacua: three constructions, closed-form observables and
//! free rotation in phase space.
//!
//! Conventions: `S(ξ) = exp{½(ξ* a² − ξ a†²)}` with `ξ = r e^{iθ}`, quadratures
//! `X = (a+a†)/√2`, `P = (a−a†)/(i√2)` (vacuum variance ½), free evolution
//! `exp(−iωt a†a)`.
//!
//! The Fock expansion is
//! `S(ξ)|0⟩ = (cosh r)^{-1/2} Σ_k (−e^{iθ} tanh r)^k √((2k)!)/(2^k k!) |2k⟩`;
//! the phase `(−e^{iθ} tanh r)^k` is the one that reproduces the operator
//! exponential amplitude for amplitude.
//!
//! At `t = 0` the state has `Var X = ½(cosh 2r − sinh 2r cos θ)`. A coupling-
//! induced vacuum has `θ = π`, so it is anti-squeezed along `X`:
//! `Var X(t) = ½e^{2r} cos²ωt + ½e^{−2r} sin²ωt`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{evolve, FockOperator, FockVector};
use crate::husimi::{husimi_q, GridSpec, PhaseSpaceGrid};
use crate::truncation::Truncation;

/// Squeezing parameter `ξ = r e^{iθ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParameter {
    r: f64,
    theta: f64,
}

impl SqueezeParameter {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "squeezing magnitude must be finite and >= 0, got {r}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(
                "squeezing phase must be finite".into(),
            ));
        }
        Ok(Self { r, theta })
    }

    /// Real `ξ`: negative values map to `θ = π`.
    pub fn from_real(xi: f64) -> Result<Self> {
        if xi < 0.0 {
            Self::new(-xi, PI)
        } else {
            Self::new(xi, 0.0)
        }
    }

    /// `ξ = −r`, the orientation produced by a dispersive coupling.
    pub fn coupling_induced(r: f64) -> Result<Self> {
        Self::new(r, PI)
    }

    pub fn vacuum() -> Self {
        Self { r: 0.0, theta: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }

    /// `ξ` as a real number when `θ` is 0 or π.
    pub fn signed_real(&self) -> Option<f64> {
        let s = self.theta.sin();
        if s.abs() < 1e-12 {
            Some(self.r * self.theta.cos().signum())
        } else {
            None
        }
    }

    /// `−e^{iθ} tanh r`, the ratio between successive even amplitudes.
    fn series_ratio(&self) -> C64 {
        -C64::from_polar(self.r.tanh(), self.theta)
    }
}

/// `⟨a†a⟩ = sinh² r`.
pub fn photon_number(xi: &SqueezeParameter) -> f64 {
    xi.r.sinh().powi(2)
}

fn check_tail(state: FockVector) -> Result<FockVector> {
    let tolerance = Truncation::default().tail_tolerance;
    let missing = (1.0 - state.norm_sqr()).abs();
    let tail = state.tail_mass().max(missing);
    if tail >= tolerance {
        return Err(Error::TruncationOverflow {
            tail,
            dim: state.dim(),
            tolerance,
        });
    }
    state.normalized()
}

/// `S(ξ)|0⟩` by exponentiating the generator. The exponential is taken on a
/// basis twice as large and cut back to `dim`, which keeps the truncation-edge
/// error of the generator out of the returned amplitudes.
pub fn squeezed_vacuum_operator(xi: &SqueezeParameter, dim: usize) -> Result<FockVector> {
    if dim < 3 {
        return Err(Error::InvalidDimension { dim, min: 3 });
    }
    if xi.r == 0.0 {
        return FockVector::vacuum(dim);
    }
    let padded = 2 * dim;
    let a = FockOperator::annihilation(padded)?;
    let a2 = &a * &a;
    let ad2 = a2.adjoint();
    let z = xi.value();
    let generator = &(a2 * z.conj()) - &(ad2 * z);
    let u = (generator * 0.5).exp();
    let state =
        FockVector::from_amplitudes(u.matrix().column(0).iter().take(dim).copied().collect())?;
    check_tail(state)
}

/// `S(ξ)|0⟩` summed term by term from the closed-form number expansion.
pub fn squeezed_vacuum_fock_series(xi: &SqueezeParameter, dim: usize) -> Result<FockVector> {
    if dim < 3 {
        return Err(Error::InvalidDimension { dim, min: 3 });
    }
    let ratio = xi.series_ratio();
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    let mut term = C64::new(1.0 / xi.r.cosh().sqrt(), 0.0);
    for k in 0..=(dim - 1) / 2 {
        if k > 0 {
            let kk = k as f64;
            term *= ratio * ((2.0 * kk - 1.0) / (2.0 * kk)).sqrt();
        }
        amps[2 * k] = term;
    }
    check_tail(FockVector::from_amplitudes(amps)?)
}

/// Which route builds a squeezed vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    OperatorExponential,
    FockSeries,
}

/// Squeezed vacuum at the smallest adequate truncation.
pub fn squeezed_vacuum(
    xi: &SqueezeParameter,
    construction: Construction,
    truncation: &Truncation,
) -> Result<FockVector> {
    let build = |dim| match construction {
        Construction::OperatorExponential => squeezed_vacuum_operator(xi, dim),
        Construction::FockSeries => squeezed_vacuum_fock_series(xi, dim),
    };
    Ok(truncation.adapt(build, FockVector::tail_mass)?.0)
}

/// Two-term weak-squeezing state on `{|0⟩, |2⟩}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakSqueezing {
    /// Three-level vector (`|1⟩` amplitude zero).
    pub state: FockVector,
    /// Set when `r ≥ 0.5`, where the two-term form is a poor description.
    pub beyond_weak_regime: bool,
}

/// `|a₂|² = (cosh r − 1)/cosh r` before renormalization.
pub fn weak_two_photon_weight(xi: &SqueezeParameter) -> f64 {
    let c = xi.r.cosh();
    (c - 1.0) / c
}

pub fn weak_squeezing_approx(xi: &SqueezeParameter) -> WeakSqueezing {
    let c = xi.r.cosh();
    let phase = if xi.r > 0.0 {
        -C64::from_polar(1.0, xi.theta)
    } else {
        C64::new(1.0, 0.0)
    };
    let amps = vec![
        C64::new(1.0 / c.sqrt(), 0.0),
        C64::new(0.0, 0.0),
        phase * weak_two_photon_weight(xi).sqrt(),
    ];
    let state = FockVector::from_amplitudes(amps)
        .and_then(FockVector::normalized)
        .expect("two-term state has unit weight on |0>");
    WeakSqueezing {
        state,
        beyond_weak_regime: xi.r >= 0.5,
    }
}

/// Quadrature variances of a freely rotating squeezed vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureVariances {
    pub var_x: f64,
    pub var_p: f64,
    /// `½⟨{X, P}⟩`, zero at `θ ∈ {0, π}` and `ωt ∈ ½πℤ`.
    pub cov_xp: f64,
    pub t: f64,
    pub omega: f64,
}

impl QuadratureVariances {
    pub fn product(&self) -> f64 {
        self.var_x * self.var_p
    }
}

/// `(Var X, Var P, ½⟨{X,P}⟩)` at `t = 0`.
fn initial_moments(xi: &SqueezeParameter) -> (f64, f64, f64) {
    let (c2, s2) = ((2.0 * xi.r).cosh(), (2.0 * xi.r).sinh());
    let cos_t = xi.theta.cos();
    (
        0.5 * (c2 - s2 * cos_t),
        0.5 * (c2 + s2 * cos_t),
        -0.5 * s2 * xi.theta.sin(),
    )
}

/// Closed-form variances of `S(ξ)|0⟩` evolved for time `t` under `ω a†a`.
pub fn quadrature_variances(xi: &SqueezeParameter, omega: f64, t: f64) -> QuadratureVariances {
    let (vx, vp, cxp) = initial_moments(xi);
    let (s, c) = (omega * t).sin_cos();
    QuadratureVariances {
        var_x: vx * c * c + vp * s * s + 2.0 * cxp * s * c,
        var_p: vp * c * c + vx * s * s - 2.0 * cxp * s * c,
        cov_xp: (vp - vx) * s * c + cxp * (c * c - s * s),
        t,
        omega,
    }
}

/// `½⟨{X(t₁), X(t₂)}⟩` for the freely rotating squeezed vacuum.
pub fn symmetrized_two_time_correlation(
    xi: &SqueezeParameter,
    omega: f64,
    t1: f64,
    t2: f64,
) -> f64 {
    CorrelationComponents::of(xi).evaluate(omega, t1, t2)
}

/// Decomposition `C(t₁,t₂) = S cos ω(t₁−t₂) + A cos ω(t₁+t₂) + B sin ω(t₁+t₂)`.
/// `S` is the stationary part; `A`, `B` vanish for the vacuum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationComponents {
    pub stationary: f64,
    pub cos_sum: f64,
    pub sin_sum: f64,
}

impl CorrelationComponents {
    pub fn of(xi: &SqueezeParameter) -> Self {
        let (vx, vp, cxp) = initial_moments(xi);
        Self::from_moments(vx, vp, cxp)
    }

    /// From `t = 0` quadrature moments of a zero-mean state.
    pub fn from_moments(var_x: f64, var_p: f64, cov_xp: f64) -> Self {
        Self {
            stationary: 0.5 * (var_x + var_p),
            cos_sum: 0.5 * (var_x - var_p),
            sin_sum: cov_xp,
        }
    }

    pub fn evaluate(&self, omega: f64, t1: f64, t2: f64) -> f64 {
        let diff = omega * (t1 - t2);
        let sum = omega * (t1 + t2);
        self.stationary * diff.cos() + self.cos_sum * sum.cos() + self.sin_sum * sum.sin()
    }

    /// Amplitude of the non-stationary part, `√(A² + B²)`.
    pub fn nonstationary_amplitude(&self) -> f64 {
        self.cos_sum.hypot(self.sin_sum)
    }
}

/// Least-squares fit of [`CorrelationComponents`] to sampled `(t₁, t₂, C)`.
pub fn fit_correlation_components(
    samples: &[(f64, f64, f64)],
    omega: f64,
) -> Result<CorrelationComponents> {
    if samples.len() < 3 {
        return Err(Error::Resolution(format!(
            "{} correlation samples, need at least 3",
            samples.len()
        )));
    }
    let design = DMatrix::from_fn(samples.len(), 3, |i, j| {
        let (t1, t2, _) = samples[i];
        match j {
            0 => (omega * (t1 - t2)).cos(),
            1 => (omega * (t1 + t2)).cos(),
            _ => (omega * (t1 + t2)).sin(),
        }
    });
    let rhs = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.2));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::NumericalFailure(format!("correlation fit failed: {e}")))?;
    Ok(CorrelationComponents {
        stationary: coef[0],
        cos_sum: coef[1],
        sin_sum: coef[2],
    })
}

/// Q-function window of four standard deviations of the widest quadrature.
pub fn natural_grid(xi: &SqueezeParameter, resolution: usize) -> GridSpec {
    let (vx, vp, _) = initial_moments(xi);
    let widest = vx.max(vp);
    // Q smears each quadrature by the vacuum; α = (X + iP)/√2
    let sigma = ((widest + 0.5) / 2.0).sqrt();
    GridSpec::square(4.0 * sigma, resolution)
}

#[derive(Clone, Debug, Default)]
pub struct RotationOptions {
    pub truncation: Truncation,
    /// Husimi window; `None` skips the phase-space grids.
    pub grid: Option<GridSpec>,
}

/// One time slice of a rotating squeezed vacuum.
#[derive(Clone, Debug)]
pub struct RotationFrame {
    pub t: f64,
    pub state: FockVector,
    /// Variances measured on the evolved state.
    pub numeric: QuadratureVariances,
    pub analytic: QuadratureVariances,
    pub husimi: Option<PhaseSpaceGrid>,
}

pub fn numeric_variances(state: &FockVector, omega: f64, t: f64) -> QuadratureVariances {
    let q = state.ladder_moments().quadratures();
    QuadratureVariances {
        var_x: q.var_x,
        var_p: q.var_p,
        cov_xp: q.cov_xp,
        t,
        omega,
    }
}

/// Evolves `S(ξ)|0⟩` under `ω a†a` to each time, reporting numeric and
/// closed-form variances and optionally the Q function.
pub fn rotate_and_report(
    xi: &SqueezeParameter,
    omega: f64,
    times: &[f64],
    options: &RotationOptions,
) -> Result<Vec<RotationFrame>> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mode frequency must be positive, got {omega}"
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(
            "evolution times must be finite".into(),
        ));
    }
    let initial = squeezed_vacuum(xi, Construction::OperatorExponential, &options.truncation)?;
    let h = FockOperator::number(initial.dim())? * omega;
    times
        .par_iter()
        .map(|&t| {
            let state = evolve(&initial, &h, t)?;
            let husimi = options
                .grid
                .as_ref()
                .map(|g| husimi_q(&state, g))
                .transpose()?;
            Ok(RotationFrame {
                t,
                numeric: numeric_variances(&state, omega, t),
                analytic: quadrature_variances(xi, omega, t),
                state,
                husimi,
            })
        })
        .collect()
}
