use serde::Serialize;
use sqvac_core::rabi::{effective_ground_energy, exact_ground_field_state, joint_parity};
use sqvac_core::squeezed::photon_number;

use super::CsvTable;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Outputs;

#[derive(Debug, Serialize)]
pub struct GroundStateSummary {
    pub omega: f64,
    pub qubit_omega: f64,
    pub coupling: f64,
    pub critical_coupling: f64,
    pub coupling_ratio: f64,
    pub xi: f64,
    /// Reduced exact field state against `S(ξ)|0⟩`.
    pub fidelity: f64,
    pub mean_photons: f64,
    pub mean_photons_effective: f64,
    pub mean_photons_ground_sector: f64,
    pub excited_weight: f64,
    pub joint_parity: f64,
    pub joint_ground_energy: f64,
    pub effective_ground_energy: f64,
    pub sw_valid: bool,
    pub sw_margin: f64,
    pub field_dim: usize,
}

pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let params = cfg.rabi()?;
    let report = exact_ground_field_state(&params, &cfg.truncation)?;
    let xi = report
        .squeezing
        .signed_real()
        .expect("coupling-induced squeezing is real");
    let summary = GroundStateSummary {
        omega: params.omega,
        qubit_omega: params.qubit_omega,
        coupling: params.coupling,
        critical_coupling: params.critical_coupling(),
        coupling_ratio: params.coupling_ratio(),
        xi,
        fidelity: report.fidelity,
        mean_photons: report.mean_photons,
        mean_photons_effective: photon_number(&report.squeezing),
        mean_photons_ground_sector: report.mean_photons_ground_sector,
        excited_weight: report.excited_weight,
        joint_parity: joint_parity(&report.joint_state)?,
        joint_ground_energy: report.energy,
        effective_ground_energy: effective_ground_energy(&params)?,
        sw_valid: report.validity.valid,
        sw_margin: report.validity.margin,
        field_dim: report.field_dim,
    };

    let mut table = CsvTable::new(&["quantity", "value"]);
    let scalar_rows = [
        ("coupling_ratio", summary.coupling_ratio),
        ("xi", summary.xi),
        ("fidelity", summary.fidelity),
        ("mean_photons", summary.mean_photons),
        ("mean_photons_effective", summary.mean_photons_effective),
        (
            "mean_photons_ground_sector",
            summary.mean_photons_ground_sector,
        ),
        ("excited_weight", summary.excited_weight),
        ("sw_margin", summary.sw_margin),
    ];
    for (name, v) in scalar_rows {
        table.raw(&[name.to_string(), sqvac_core::io::format_f64(v)]);
    }

    let exact = report.field_state.populations();
    let squeezed = report.squeezed_vacuum.resized(exact.len()).populations();
    let mut pops = CsvTable::new(&["n", "exact", "squeezed_vacuum"]);
    for (n, (e, s)) in exact.iter().zip(&squeezed).enumerate() {
        pops.row(&[n as f64, *e, *s]);
    }

    out.add_json("ground_state.json", &summary);
    out.add("ground_state.csv", table.into_bytes());
    out.add("ground_state_populations.csv", pops.into_bytes());
    Ok(format!(
        "g/g_c = {:.4}: xi = {:.7}, fidelity = {:.6}, <n> = {:.4e} (sinh^2 xi = {:.4e}), SW margin {:.4}{}",
        summary.coupling_ratio,
        summary.xi,
        summary.fidelity,
        summary.mean_photons,
        summary.mean_photons_effective,
        summary.sw_margin,
        if summary.sw_valid { "" } else { " (outside the dispersive regime)" }
    ))
}
