//! Switching the light–matter coupling off: the squeezed ground-state field is
//! left to evolve under the bare `ω a†a`, turning virtual population into
//! freely rotating excitations. A finite linear ramp serves as the adiabatic
//! contrast case.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{eigh, DensityMatrix, FockOperator, FockVector};
use crate::io::format_f64;
use crate::rabi::{
    effective_hamiltonian_unchecked, exact_ground_field_state, squeezing_parameter, RabiParams,
    SwValidity,
};
use crate::squeezed::{squeezed_vacuum, Construction, QuadratureVariances};
use crate::truncation::Truncation;

/// Where the pre-quench field state comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuenchSource {
    /// Reduced ground state of the full Rabi model.
    Exact,
    /// `S(ξ)|0⟩` of the effective oscillator.
    Effective,
}

#[derive(Clone, Debug)]
pub struct QuenchResult {
    pub params: RabiParams,
    pub source: QuenchSource,
    pub field_dim: usize,
    pub pre_quench_n: f64,
    /// `(t, ⟨a†a⟩)` after the coupling is removed.
    pub post_quench_n_trace: Vec<(f64, f64)>,
    pub variance_traces: Vec<QuadratureVariances>,
    pub purity_trace: Vec<f64>,
    pub population_traces: Vec<Vec<f64>>,
    pub validity: SwValidity,
}

impl QuenchResult {
    /// Largest deviation of `⟨n⟩(t)` from its value at the first time.
    pub fn photon_number_drift(&self) -> f64 {
        let first = self.post_quench_n_trace.first().map_or(0.0, |p| p.1);
        self.post_quench_n_trace
            .iter()
            .map(|p| (p.1 - first).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `time,n,var_x,var_p`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "n", "var_x", "var_p"])?;
        for ((t, n), v) in self.post_quench_n_trace.iter().zip(&self.variance_traces) {
            w.write_record([
                format_f64(*t),
                format_f64(*n),
                format_f64(v.var_x),
                format_f64(v.var_p),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Prepares the coupled ground-state field, removes the coupling instantly and
/// follows the free evolution over `times`.
pub fn run_quench(
    params: &RabiParams,
    times: &[f64],
    source: QuenchSource,
    truncation: &Truncation,
) -> Result<QuenchResult> {
    let xi = squeezing_parameter(params)?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(
            "quench times must be finite".into(),
        ));
    }
    let initial = match source {
        QuenchSource::Effective => DensityMatrix::from_pure(&squeezed_vacuum(
            &xi,
            Construction::OperatorExponential,
            truncation,
        )?),
        QuenchSource::Exact => exact_ground_field_state(params, truncation)?.field_state,
    };
    let dim = initial.dim();
    let free = FockOperator::number(dim)? * params.omega;
    let mut n_trace = Vec::with_capacity(times.len());
    let mut variances = Vec::with_capacity(times.len());
    let mut purity = Vec::with_capacity(times.len());
    let mut populations = Vec::with_capacity(times.len());
    for &t in times {
        let rho = initial.evolve(&free, t)?;
        let q = rho.ladder_moments().quadratures();
        n_trace.push((t, rho.mean_photon_number()));
        variances.push(QuadratureVariances {
            var_x: q.var_x,
            var_p: q.var_p,
            cov_xp: q.cov_xp,
            t,
            omega: params.omega,
        });
        purity.push(rho.purity());
        populations.push(rho.populations());
    }
    Ok(QuenchResult {
        params: *params,
        source,
        field_dim: dim,
        pre_quench_n: initial.mean_photon_number(),
        post_quench_n_trace: n_trace,
        variance_traces: variances,
        purity_trace: purity,
        population_traces: populations,
        validity: crate::rabi::sw_validity(params),
    })
}

/// Linear ramp of the coupling from its initial value to zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub duration: f64,
    pub steps: usize,
    /// Also run with twice the steps and report the relative change.
    pub check_convergence: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticResult {
    pub duration: f64,
    pub steps: usize,
    pub final_n: f64,
    /// Final `⟨n⟩` with the step size halved, when requested.
    pub refined_n: Option<f64>,
    /// `|final_n − refined_n| / refined_n`.
    pub relative_change: Option<f64>,
}

impl AdiabaticResult {
    /// Step-halving changed the result by less than 1 %.
    pub fn converged(&self) -> Option<bool> {
        self.relative_change.map(|c| c < 0.01)
    }
}

fn ramp_final_n(
    params: &RabiParams,
    initial: &FockVector,
    duration: f64,
    steps: usize,
) -> Result<f64> {
    let dt = duration / steps as f64;
    let mut psi = initial.clone();
    for k in 0..steps {
        // coupling sampled at the midpoint of each step
        let g = params.coupling * (1.0 - (k as f64 + 0.5) / steps as f64);
        let h = effective_hamiltonian_unchecked(&params.with_coupling(g), psi.dim())?;
        psi = eigh(&h)?.propagate(&psi, dt)?;
    }
    let drift = (psi.norm() - 1.0).abs();
    if drift > crate::fock::NORM_DRIFT_TOL {
        return Err(Error::IntegrationFailure { drift });
    }
    let tolerance = Truncation::default().tail_tolerance;
    if psi.tail_mass() >= tolerance {
        return Err(Error::TruncationOverflow {
            tail: psi.tail_mass(),
            dim: psi.dim(),
            tolerance,
        });
    }
    Ok(psi.mean_photon_number())
}

/// Evolves the effective ground state under piecewise-constant `H_eff(g(t))`
/// while `g` falls linearly to zero over `ramp.duration`, and returns the
/// photon number left behind.
pub fn adiabatic_reference(
    params: &RabiParams,
    ramp: &Ramp,
    truncation: &Truncation,
) -> Result<AdiabaticResult> {
    if ramp.steps < 10 {
        return Err(Error::Resolution(format!(
            "ramp needs at least 10 steps, got {}",
            ramp.steps
        )));
    }
    if !(ramp.duration.is_finite() && ramp.duration > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ramp duration must be positive, got {}",
            ramp.duration
        )));
    }
    let xi = squeezing_parameter(params)?;
    let initial = squeezed_vacuum(&xi, Construction::OperatorExponential, truncation)?;
    let final_n = ramp_final_n(params, &initial, ramp.duration, ramp.steps)?;
    let (refined_n, relative_change) = if ramp.check_convergence {
        let refined = ramp_final_n(params, &initial, ramp.duration, 2 * ramp.steps)?;
        let change = if refined == 0.0 {
            0.0
        } else {
            ((final_n - refined) / refined).abs()
        };
        (Some(refined), Some(change))
    } else {
        (None, None)
    };
    Ok(AdiabaticResult {
        duration: ramp.duration,
        steps: ramp.steps,
        final_n,
        refined_n,
        relative_change,
    })
}
