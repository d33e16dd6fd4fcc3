//! Quick end-to-end checks of the installed build against closed forms.

use std::f64::consts::PI;

use serde::Serialize;
use sqvac_core::measurement::{
    estimate_fluctuation_amplitude, period_bins, simulate_homodyne, simulate_photon_counts,
    xi_from_amplitude, DetectorConfig,
};
use sqvac_core::quench::{run_quench, QuenchSource};
use sqvac_core::rabi::{exact_ground_field_state, squeezing_parameter};
use sqvac_core::squeezed::{
    rotate_and_report, squeezed_vacuum, squeezed_vacuum_operator, Construction, RotationOptions,
};
use sqvac_core::{FockOperator, RabiParams, SqueezeParameter};

use super::linspace;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Outputs;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

fn at_most(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        value,
        limit,
        pass: value <= limit,
    }
}

fn checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let trunc = &cfg.truncation;
    let mut out = Vec::new();

    let a = FockOperator::annihilation(16)?;
    let comm = a.commutator(&a.adjoint());
    let dev = (0..15)
        .map(|n| (comm.entry(n, n).re - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(at_most("commutator [a, a†] below the cutoff", dev, 1e-14));

    let p06 = RabiParams::at_ratio(1.0, 100.0, 0.6)?;
    let xi06 = squeezing_parameter(&p06)?;
    let n06 =
        squeezed_vacuum(&xi06, Construction::OperatorExponential, trunc)?.mean_photon_number();
    out.push(at_most(
        "<n> at g/g_c = 0.6 minus 0.0125",
        (n06 - 0.0125).abs(),
        1e-8,
    ));

    let xi = SqueezeParameter::coupling_induced(0.5)?;
    let series = squeezed_vacuum(&xi, Construction::FockSeries, trunc)?;
    let op = squeezed_vacuum_operator(&xi, series.dim())?;
    out.push(at_most(
        "operator vs series infidelity, r = 0.5",
        1.0 - op.fidelity(&series),
        1e-10,
    ));

    let ground = exact_ground_field_state(&RabiParams::new(1.0, 100.0, 3.0)?, trunc)?;
    out.push(at_most(
        "Rabi vs squeezed vacuum infidelity, g/g_c = 0.3",
        1.0 - ground.fidelity,
        1e-3,
    ));

    let frames = rotate_and_report(
        &xi,
        1.0,
        &linspace(0.0, 2.0 * PI, 16),
        &RotationOptions {
            truncation: *trunc,
            grid: None,
        },
    )?;
    let err = frames
        .iter()
        .map(|f| {
            (f.numeric.var_x - f.analytic.var_x)
                .abs()
                .max((f.numeric.var_p - f.analytic.var_p).abs())
        })
        .fold(0.0, f64::max);
    out.push(at_most("rotating variances vs closed form", err, 1e-8));

    let quench = run_quench(
        &p06,
        &linspace(0.0, 10.0, 20),
        QuenchSource::Effective,
        trunc,
    )?;
    out.push(at_most(
        "post-quench <n> drift",
        quench.photon_number_drift(),
        1e-10,
    ));

    let det = DetectorConfig::ideal(100_000);
    let (mean, var) = simulate_photon_counts(&xi06, &det, cfg.seed)?.count_moments()?;
    out.push(at_most(
        "photon-count mean deviation in standard errors",
        (mean - 0.0125).abs() / (var / 1e5).sqrt(),
        4.0,
    ));

    let rec = simulate_homodyne(
        &SqueezeParameter::coupling_induced(0.3)?,
        1.0,
        &period_bins(1.0, 16),
        &det,
        cfg.seed,
    )?;
    let r_hat = xi_from_amplitude(estimate_fluctuation_amplitude(&rec)?.amplitude).r;
    out.push(at_most(
        "homodyne r estimate relative error at r = 0.3",
        (r_hat / 0.3 - 1.0).abs(),
        0.05,
    ));
    Ok(out)
}

pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let results = checks(cfg)?;
    for c in &results {
        println!(
            "{} {}: {:.3e} (limit {:.1e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }
    out.add_json("selftest.json", &results);
    let failed: Vec<&str> = results.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(format!("{} checks passed", results.len()))
    } else {
        Err(CliError::SelfTest(failed.join("; ")))
    }
}
