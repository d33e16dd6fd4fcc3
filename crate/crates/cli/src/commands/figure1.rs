use std::f64::consts::PI;

use serde::Serialize;
use sqvac_core::squeezed::{natural_grid, rotate_and_report, RotationOptions};
use sqvac_core::SqueezeParameter;

use super::{linspace, require, CsvTable};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Outputs;
use crate::svg::{heatmap_panels, stacked_plot, Panel, Series, Style};

#[derive(Debug, Serialize)]
pub struct PanelSummary {
    pub t: f64,
    pub mass: f64,
    pub major_variance: f64,
    pub minor_variance: f64,
    pub axis_ratio: f64,
    pub major_angle: f64,
}

#[derive(Debug, Serialize)]
pub struct Figure1Summary {
    pub omega: f64,
    pub r: f64,
    pub theta: f64,
    pub field_dim: usize,
    pub max_variance_error: f64,
    pub panels: Vec<PanelSummary>,
}

pub fn run(cfg: &RunConfig, out: &mut Outputs) -> Result<String, CliError> {
    let f = &cfg.figure1;
    let omega = require(f.omega, "figure1.omega")?;
    let r = require(f.r, "figure1.r")?;
    let xi = SqueezeParameter::new(r, f.theta)?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(CliError::Config(format!(
            "figure1.omega must be positive, got {omega}"
        )));
    }
    let panel_times = match &f.times {
        Some(t) if t.is_empty() => return Err(CliError::Config("figure1.times is empty".into())),
        Some(t) => t.clone(),
        None => linspace(0.0, PI / (2.0 * omega), f.panels.max(1)),
    };

    let grid_opts = RotationOptions {
        truncation: cfg.truncation,
        grid: Some(natural_grid(&xi, f.grid_resolution)),
    };
    let panels = rotate_and_report(&xi, omega, &panel_times, &grid_opts)?;
    let trace_times = linspace(0.0, 2.0 * PI / omega, f.trace_points);
    let trace = rotate_and_report(
        &xi,
        omega,
        &trace_times,
        &RotationOptions {
            truncation: cfg.truncation,
            grid: None,
        },
    )?;

    let mut csv = CsvTable::new(&["t", "var_x", "var_p", "analytic_var_x", "analytic_var_p"]);
    let mut max_err: f64 = 0.0;
    for fr in &trace {
        csv.row(&[
            fr.t,
            fr.numeric.var_x,
            fr.numeric.var_p,
            fr.analytic.var_x,
            fr.analytic.var_p,
        ]);
        max_err = max_err
            .max((fr.numeric.var_x - fr.analytic.var_x).abs())
            .max((fr.numeric.var_p - fr.analytic.var_p).abs());
    }

    let mut summaries = Vec::with_capacity(panels.len());
    let mut titled = Vec::with_capacity(panels.len());
    for (k, fr) in panels.iter().enumerate() {
        let grid = fr.husimi.as_ref().expect("grid requested");
        let axes = grid.principal_axes();
        summaries.push(PanelSummary {
            t: fr.t,
            mass: grid.total_mass(),
            major_variance: axes.major_variance,
            minor_variance: axes.minor_variance,
            axis_ratio: axes.ratio(),
            major_angle: axes.major_angle,
        });
        let mut cells = CsvTable::new(&["im", "re", "q"]);
        let (re, im) = (grid.re_axis(), grid.im_axis());
        for (i, y) in im.iter().enumerate() {
            for (j, x) in re.iter().enumerate() {
                cells.row(&[*y, *x, grid.values[(i, j)]]);
            }
        }
        out.add(format!("husimi_panel_{k}.csv"), cells.into_bytes());
        titled.push((format!("ωt = {:.3}", omega * fr.t), grid));
    }

    let trace_plot = Panel {
        title: format!("quadrature variances, r = {r}"),
        x_label: "ωt".into(),
        y_label: "variance".into(),
        series: vec![
            Series::new(
                "Var X",
                Style::Points,
                "#1f77b4",
                trace
                    .iter()
                    .map(|f| (omega * f.t, f.numeric.var_x))
                    .collect(),
            ),
            Series::new(
                "Var P",
                Style::Points,
                "#d62728",
                trace
                    .iter()
                    .map(|f| (omega * f.t, f.numeric.var_p))
                    .collect(),
            ),
            Series::new(
                "closed form X",
                Style::Line,
                "#1f77b4",
                trace
                    .iter()
                    .map(|f| (omega * f.t, f.analytic.var_x))
                    .collect(),
            ),
            Series::new(
                "closed form P",
                Style::Line,
                "#d62728",
                trace
                    .iter()
                    .map(|f| (omega * f.t, f.analytic.var_p))
                    .collect(),
            ),
        ],
    };

    out.add("figure1_husimi.svg", heatmap_panels(&titled));
    out.add("figure1_variances.svg", stacked_plot(&[trace_plot]));
    out.add("figure1_variances.csv", csv.into_bytes());
    let field_dim = trace.first().map_or(0, |f| f.state.dim());
    out.add_json(
        "figure1.json",
        &Figure1Summary {
            omega,
            r,
            theta: f.theta,
            field_dim,
            max_variance_error: max_err,
            panels: summaries,
        },
    );
    Ok(format!(
        "{} Husimi panels, {} trace points, max |numeric - closed form| = {max_err:.2e}",
        panels.len(),
        trace.len()
    ))
}
