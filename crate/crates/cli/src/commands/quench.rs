use std::f64::consts::PI;

use serde::Serialize;
use sqvac_core::quench::{adiabatic_reference, run_quench, AdiabaticResult, QuenchSource, Ramp};
use sqvac_core::rabi::squeezing_parameter;
use sqvac_core::squeezed::photon_number;
use sqvac_core::SwValidity;

use super::linspace;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Outputs;
use crate::svg::{stacked_plot, Panel, Series, Style};

#[derive(Debug, Serialize)]
pub struct QuenchSummary {
    pub coupling_ratio: f64,
    pub source: QuenchSource,
    pub xi: f64,
    pub field_dim: usize,
    pub pre_quench_n: f64,
    pub sinh2_xi: f64,
    pub post_quench_n_mean: f64,
    pub photon_number_drift: f64,
    pub purity_min: f64,
    pub purity_max: f64,
    pub validity: SwValidity,
    pub adiabatic: Option<AdiabaticResult>,
    /// Adiabatic final `⟨n⟩` over the sudden-quench value.
    pub adiabatic_fraction: Option<f64>,
}

pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let params = cfg.rabi()?;
    let q = &cfg.quench;
    if !(q.periods.is_finite() && q.periods > 0.0) || q.time_points < 2 {
        return Err(CliError::Config(
            "quench needs periods > 0 and at least 2 time points".into(),
        ));
    }
    let times = linspace(0.0, q.periods * 2.0 * PI / params.omega, q.time_points);
    let res = run_quench(&params, &times, q.source, &cfg.truncation)?;
    let xi = squeezing_parameter(&params)?;
    let adiabatic = if q.ramp.enabled {
        let ramp = Ramp {
            duration: q.ramp.duration,
            steps: q.ramp.steps,
            check_convergence: q.ramp.check_convergence,
        };
        Some(adiabatic_reference(&params, &ramp, &cfg.truncation)?)
    } else {
        None
    };
    let sudden = photon_number(&xi);
    let n_mean = res.post_quench_n_trace.iter().map(|p| p.1).sum::<f64>()
        / res.post_quench_n_trace.len() as f64;
    let summary = QuenchSummary {
        coupling_ratio: params.coupling_ratio(),
        source: q.source,
        xi: xi
            .signed_real()
            .expect("coupling-induced squeezing is real"),
        field_dim: res.field_dim,
        pre_quench_n: res.pre_quench_n,
        sinh2_xi: sudden,
        post_quench_n_mean: n_mean,
        photon_number_drift: res.photon_number_drift(),
        purity_min: res
            .purity_trace
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
        purity_max: res
            .purity_trace
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max),
        validity: res.validity,
        adiabatic,
        adiabatic_fraction: adiabatic
            .filter(|_| sudden > 0.0)
            .map(|a| a.final_n / sudden),
    };

    let mut csv = Vec::new();
    res.write_csv(&mut csv)?;
    let wt = |t: f64| params.omega * t;
    let plot = stacked_plot(&[
        Panel {
            title: "photon number after the quench".into(),
            x_label: "ωt".into(),
            y_label: "<a†a>".into(),
            series: vec![Series::new(
                "<n>(t)",
                Style::Line,
                "#1f77b4",
                res.post_quench_n_trace
                    .iter()
                    .map(|&(t, n)| (wt(t), n))
                    .collect(),
            )],
        },
        Panel {
            title: "quadrature variances".into(),
            x_label: "ωt".into(),
            y_label: "variance".into(),
            series: vec![
                Series::new(
                    "Var X",
                    Style::Line,
                    "#1f77b4",
                    res.variance_traces
                        .iter()
                        .map(|v| (wt(v.t), v.var_x))
                        .collect(),
                ),
                Series::new(
                    "Var P",
                    Style::Line,
                    "#d62728",
                    res.variance_traces
                        .iter()
                        .map(|v| (wt(v.t), v.var_p))
                        .collect(),
                ),
            ],
        },
    ]);
    out.add("quench_trace.csv", csv);
    out.add("quench.svg", plot);
    out.add_json("quench.json", &summary);
    let ramp_note = match (summary.adiabatic, summary.adiabatic_fraction) {
        (Some(a), Some(f)) => format!(
            "; ramp over {} leaves <n> = {:.3e} ({:.2e} of sudden)",
            a.duration, a.final_n, f
        ),
        (Some(a), None) => format!("; ramp over {} leaves <n> = {:.3e}", a.duration, a.final_n),
        _ => String::new(),
    };
    Ok(format!(
        "pre-quench <n> = {:.6e}, post-quench drift {:.2e}{ramp_note}",
        summary.pre_quench_n, summary.photon_number_drift
    ))
}
