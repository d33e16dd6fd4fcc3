//! Quantum Rabi model, its dispersive effective oscillator and the squeezing
//! parameter of the effective ground state.
//!
//! `H = ω a†a + (Ω/2)σ_z + (g/2)(a + a†)σ_x` on the qubit-major joint basis of
//! [`crate::fock`]. Eliminating the qubit for `Ω ≫ ω` leaves
//! `H_eff = ω a†a − (g²/4Ω)(a + a†)²`, an oscillator of frequency
//! `ω√(1 − g²/g_c²)` with `g_c = √(ωΩ)`, whose ground state is `S(ξ)|0⟩` with
//! `ξ = ¼ ln(1 − g²/g_c²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    hermitian_ground_state, partial_trace_qubit, qubit, qubit_block, qubit_field_tensor,
    DensityMatrix, FockOperator, FockVector,
};
use crate::squeezed::{squeezed_vacuum, Construction, SqueezeParameter};
use crate::truncation::Truncation;

/// Field frequency `ω`, qubit splitting `Ω` and coupling `g`, all in rad/time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiParams {
    pub omega: f64,
    pub qubit_omega: f64,
    pub coupling: f64,
}

impl RabiParams {
    pub fn new(omega: f64, qubit_omega: f64, coupling: f64) -> Result<Self> {
        let p = Self {
            omega,
            qubit_omega,
            coupling,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `g = ratio · g_c`.
    pub fn at_ratio(omega: f64, qubit_omega: f64, ratio: f64) -> Result<Self> {
        Self::new(omega, qubit_omega, ratio * (omega * qubit_omega).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.omega) {
            return Err(Error::InvalidParameter(format!(
                "field frequency must be > 0, got {}",
                self.omega
            )));
        }
        if !pos(self.qubit_omega) {
            return Err(Error::InvalidParameter(format!(
                "qubit frequency must be > 0, got {}",
                self.qubit_omega
            )));
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling must be >= 0, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    /// `g_c = √(ωΩ)`.
    pub fn critical_coupling(&self) -> f64 {
        (self.omega * self.qubit_omega).sqrt()
    }

    /// `1 − g²/g_c²`, the squared softening of the effective oscillator.
    pub fn softening(&self) -> f64 {
        1.0 - self.coupling * self.coupling / (self.omega * self.qubit_omega)
    }

    pub fn coupling_ratio(&self) -> f64 {
        self.coupling / self.critical_coupling()
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self { coupling, ..*self }
    }

    fn require_subcritical(&self) -> Result<()> {
        self.validate()?;
        if self.softening() <= 0.0 {
            return Err(Error::BeyondCritical {
                g: self.coupling,
                g_c: self.critical_coupling(),
            });
        }
        Ok(())
    }
}

pub fn critical_coupling(params: &RabiParams) -> f64 {
    params.critical_coupling()
}

/// Outcome of the dispersive-validity check `1 − g²/g_c² > (ω/Ω)^{2/3}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwValidity {
    pub valid: bool,
    /// Left side minus right side.
    pub margin: f64,
}

pub fn sw_validity(params: &RabiParams) -> SwValidity {
    let margin = params.softening() - (params.omega / params.qubit_omega).powf(2.0 / 3.0);
    SwValidity {
        valid: margin > 0.0,
        margin,
    }
}

/// `ξ = ¼ ln(1 − g²/g_c²)`, real and non-positive.
pub fn squeezing_parameter(params: &RabiParams) -> Result<SqueezeParameter> {
    params.require_subcritical()?;
    let xi = 0.25 * params.softening().ln();
    if xi == 0.0 {
        return Ok(SqueezeParameter::vacuum());
    }
    SqueezeParameter::coupling_induced(-xi)
}

/// Full Rabi Hamiltonian on `2·dim` joint levels (real symmetric).
pub fn build_rabi_hamiltonian(params: &RabiParams, dim: usize) -> Result<FockOperator> {
    params.validate()?;
    let a = FockOperator::annihilation(dim)?;
    let field = FockOperator::number(dim)? * params.omega;
    let position = &a + &a.adjoint();
    let id = FockOperator::identity(dim);
    let h = &(&qubit_field_tensor(&field, &qubit::identity())
        + &(qubit_field_tensor(&id, &qubit::sigma_z()) * (0.5 * params.qubit_omega)))
        + &(qubit_field_tensor(&position, &qubit::sigma_x()) * (0.5 * params.coupling));
    Ok(h)
}

/// `ω a†a − (g²/4Ω)(a + a†)²` on `dim` field levels.
pub fn build_effective_hamiltonian(params: &RabiParams, dim: usize) -> Result<FockOperator> {
    params.require_subcritical()?;
    effective_hamiltonian_unchecked(params, dim)
}

pub(crate) fn effective_hamiltonian_unchecked(
    params: &RabiParams,
    dim: usize,
) -> Result<FockOperator> {
    let a = FockOperator::annihilation(dim)?;
    let position = &a + &a.adjoint();
    let sq = &position * &position;
    let strength = params.coupling * params.coupling / (4.0 * params.qubit_omega);
    Ok(&(FockOperator::number(dim)? * params.omega) - &(sq * strength))
}

/// Ground energy and state of `H_eff` at adaptive truncation.
pub fn effective_ground_state(
    params: &RabiParams,
    truncation: &Truncation,
) -> Result<(f64, FockVector)> {
    params.require_subcritical()?;
    let build = |dim| hermitian_ground_state(&build_effective_hamiltonian(params, dim)?);
    Ok(truncation.adapt(build, |(_, s)| s.tail_mass())?.0)
}

/// Closed-form ground energy `(ω√(1 − g²/g_c²) − ω)/2` of `H_eff`.
pub fn effective_ground_energy(params: &RabiParams) -> Result<f64> {
    params.require_subcritical()?;
    Ok(0.5 * params.omega * (params.softening().sqrt() - 1.0))
}

/// Exact Rabi ground state reduced to the field and compared with the
/// effective squeezed vacuum.
#[derive(Clone, Debug)]
pub struct GroundStateReport {
    pub params: RabiParams,
    pub energy: f64,
    /// Field truncation used for the joint diagonalization.
    pub field_dim: usize,
    pub joint_state: FockVector,
    pub field_state: DensityMatrix,
    pub squeezing: SqueezeParameter,
    pub squeezed_vacuum: FockVector,
    /// `⟨ψ_sq|ρ_field|ψ_sq⟩`.
    pub fidelity: f64,
    pub mean_photons: f64,
    /// Joint weight on the excited qubit level; equals the odd-Fock population
    /// of the field because the ground state has even joint parity.
    pub excited_weight: f64,
    /// `⟨a†a⟩` restricted to the ground-qubit block (the even-photon sector).
    pub mean_photons_ground_sector: f64,
    pub validity: SwValidity,
}

/// Diagonalizes the Rabi model, traces out the qubit and reports the fidelity
/// to `S(ξ)|0⟩`. Outside the dispersive regime the result is still computed;
/// `validity.valid` is false.
pub fn exact_ground_field_state(
    params: &RabiParams,
    truncation: &Truncation,
) -> Result<GroundStateReport> {
    let squeezing = squeezing_parameter(params)?;
    let build = |dim| {
        let (energy, joint) = hermitian_ground_state(&build_rabi_hamiltonian(params, dim)?)?;
        let rho = partial_trace_qubit(&joint)?;
        Ok((energy, joint, rho))
    };
    let ((energy, joint_state, field_state), field_dim) =
        truncation.adapt(build, |(_, _, rho)| rho.tail_mass())?;
    let squeezed_vacuum = squeezed_vacuum(&squeezing, Construction::FockSeries, truncation)?;
    let fidelity = field_state.fidelity_to(&squeezed_vacuum);
    let up = qubit_block(&joint_state, qubit::EXCITED)?;
    let down = qubit_block(&joint_state, qubit::GROUND)?;
    Ok(GroundStateReport {
        params: *params,
        energy,
        field_dim,
        mean_photons: field_state.mean_photon_number(),
        excited_weight: up.norm_sqr(),
        mean_photons_ground_sector: down.mean_photon_number(),
        joint_state,
        field_state,
        squeezing,
        squeezed_vacuum,
        fidelity,
        validity: sw_validity(params),
    })
}

/// Joint parity `(−1)^{a†a} · (−σ_z)`, +1 on `|0, ↓⟩`.
pub fn joint_parity(joint: &FockVector) -> Result<f64> {
    if !joint.dim().is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "not a qubit-major joint vector".into(),
        ));
    }
    let d = joint.dim() / 2;
    Ok(joint
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let (q, n) = (i / d, i % d);
            let photon = if n % 2 == 0 { 1.0 } else { -1.0 };
            let spin = if q == qubit::GROUND { 1.0 } else { -1.0 };
            photon * spin * a.norm_sqr()
        })
        .sum())
}
