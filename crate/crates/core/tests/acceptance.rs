//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqvac_core::fock::{FockOperator, FockVector};
use sqvac_core::measurement::{
    estimate_fluctuation_amplitude, fit_variance_modulation, period_bins, simulate_homodyne,
    simulate_photon_counts, xi_from_amplitude, DetectorConfig, Seed,
};
use sqvac_core::quench::{adiabatic_reference, run_quench, QuenchSource, Ramp};
use sqvac_core::rabi::{exact_ground_field_state, squeezing_parameter};
use sqvac_core::spectrum::{
    compare_mode_data, compare_spectra, generate_spectrum_data, ComparisonConfig, FrequencyGrid,
    ModeSpectrum, Profile, Verdict,
};
use sqvac_core::squeezed::{
    fit_correlation_components, photon_number, quadrature_variances, rotate_and_report,
    squeezed_vacuum, squeezed_vacuum_fock_series, squeezed_vacuum_operator, weak_squeezing_approx,
    Construction, RotationOptions,
};
use sqvac_core::{RabiParams, SqueezeParameter, Truncation};

type Check = Result<String, String>;

fn require(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn xi(r: f64) -> SqueezeParameter {
    SqueezeParameter::coupling_induced(r).unwrap()
}

/// r at coupling ratio 0.6, where e^{2r} = 1.25.
const R06: f64 = 0.111_571_775_657_104_88;

fn sw_correspondence() -> Check {
    const MIN_FIDELITY: f64 = 0.999;
    const MAX_RUNTIME: Duration = Duration::from_secs(10);
    let start = Instant::now();
    let params = RabiParams::new(1.0, 100.0, 3.0).map_err(|e| e.to_string())?;
    let report =
        exact_ground_field_state(&params, &Truncation::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let xi_ok = (report.squeezing.signed_real().unwrap_or(f64::NAN) + 0.0235777).abs() < 5e-8;
    require(
        report.fidelity >= MIN_FIDELITY && elapsed < MAX_RUNTIME && xi_ok,
        format!(
            "fidelity {:.6} (>= {MIN_FIDELITY}), xi {:.7}, dim {}, {:.2?}",
            report.fidelity,
            report.squeezing.signed_real().unwrap_or(f64::NAN),
            report.field_dim,
            elapsed
        ),
    )
}

fn photon_number_identity() -> Check {
    const TOL: f64 = 1e-8;
    let trunc = Truncation::default();
    let mut worst: f64 = 0.0;
    for r in [0.0235777, R06, 0.5, 1.0] {
        for c in [Construction::OperatorExponential, Construction::FockSeries] {
            let state = squeezed_vacuum(&xi(r), c, &trunc).map_err(|e| e.to_string())?;
            worst = worst.max((state.mean_photon_number() - r.sinh().powi(2)).abs());
        }
    }
    let params = RabiParams::at_ratio(1.0, 100.0, 0.6).map_err(|e| e.to_string())?;
    let x = squeezing_parameter(&params).map_err(|e| e.to_string())?;
    let n06 = squeezed_vacuum(&x, Construction::OperatorExponential, &trunc)
        .map_err(|e| e.to_string())?
        .mean_photon_number();
    let e2 = (2.0 * x.r()).exp();
    require(
        worst < TOL && (n06 - 0.0125).abs() < TOL && (e2 - 1.25).abs() < 1e-14,
        format!("max |<n> - sinh^2 r| {worst:.2e}; g/g_c=0.6: <n> {n06:.12}, e^(2|xi|) {e2:.15}"),
    )
}

fn rotation_dynamics() -> Check {
    const TOL: f64 = 1e-8;
    const RECURRENCE: f64 = 1.0 - 1e-9;
    let omega = 1.3;
    let period = PI / omega;
    let mut worst: f64 = 0.0;
    let mut worst_period: f64 = 0.0;
    let mut worst_fid: f64 = 1.0;
    for r in [R06, 0.5] {
        let times: Vec<f64> = (0..64).map(|k| 2.0 * period * k as f64 / 63.0).collect();
        let shifted: Vec<f64> = times.iter().map(|t| t + period).collect();
        let opts = RotationOptions::default();
        let frames = rotate_and_report(&xi(r), omega, &times, &opts).map_err(|e| e.to_string())?;
        let later = rotate_and_report(&xi(r), omega, &shifted, &opts).map_err(|e| e.to_string())?;
        for (f, g) in frames.iter().zip(&later) {
            worst = worst
                .max((f.numeric.var_x - f.analytic.var_x).abs())
                .max((f.numeric.var_p - f.analytic.var_p).abs());
            worst_period = worst_period
                .max((f.numeric.var_x - g.numeric.var_x).abs())
                .max((f.numeric.var_p - g.numeric.var_p).abs());
        }
        let initial = &frames[0].state;
        let back = &frames[63].state;
        worst_fid = worst_fid.min(initial.fidelity(back));
    }
    require(
        worst <= TOL && worst_period <= TOL && worst_fid >= RECURRENCE,
        format!(
            "max |numeric - closed form| {worst:.2e}, max |V(t+pi/w) - V(t)| {worst_period:.2e}, recurrence fidelity 1-{:.2e}",
            1.0 - worst_fid
        ),
    )
}

fn construction_cross_validation() -> Check {
    const SERIES_TOL: f64 = 1e-10;
    let mut worst_series: f64 = 0.0;
    for k in 0..=20 {
        let r = k as f64 * 0.05;
        let series = squeezed_vacuum(&xi(r), Construction::FockSeries, &Truncation::default())
            .map_err(|e| e.to_string())?;
        let op = squeezed_vacuum_operator(&xi(r), series.dim()).map_err(|e| e.to_string())?;
        worst_series = worst_series.max(1.0 - op.fidelity(&series));
    }
    let mut worst_ratio: f64 = 0.0;
    for k in 1..=30 {
        let r = k as f64 * 0.01;
        let exact = squeezed_vacuum_fock_series(&xi(r), 64).map_err(|e| e.to_string())?;
        let infid = 1.0 - weak_squeezing_approx(&xi(r)).state.fidelity(&exact);
        worst_ratio = worst_ratio.max(infid / (0.4 * r.tanh().powi(4)));
    }
    require(
        worst_series <= SERIES_TOL && worst_ratio < 1.0,
        format!("max operator/series infidelity {worst_series:.2e}; max two-term infidelity / 0.4 tanh^4 r = {worst_ratio:.4}"),
    )
}

fn uncertainty_floor() -> Check {
    const FLOOR: f64 = 0.25 - 1e-12;
    const EQUALITY: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut min_product = f64::INFINITY;
    for _ in 0..1000 {
        let r: f64 = rng.random_range(0.0..1.0);
        let wt: f64 = rng.random_range(0.0..2.0 * PI);
        let state = squeezed_vacuum_fock_series(&xi(r), 128).map_err(|e| e.to_string())?;
        let rotated = rotate_free(&state, wt);
        let q = rotated.ladder_moments().quadratures();
        min_product = min_product
            .min(q.var_x * q.var_p)
            .min(quadrature_variances(&xi(r), 1.0, wt).product());
    }
    let mut worst_eq: f64 = 0.0;
    for r in [0.0, R06, 0.5, 1.0] {
        let state = squeezed_vacuum_fock_series(&xi(r), 128).map_err(|e| e.to_string())?;
        for k in 0..8 {
            let wt = k as f64 * PI / 2.0;
            let q = rotate_free(&state, wt).ladder_moments().quadratures();
            worst_eq = worst_eq.max((q.var_x * q.var_p - 0.25).abs());
            worst_eq = worst_eq.max((quadrature_variances(&xi(r), 1.0, wt).product() - 0.25).abs());
        }
    }
    require(
        min_product >= FLOOR && worst_eq <= EQUALITY,
        format!("min var_x var_p over 1000 points {min_product:.15}; max |product - 1/4| at wt = k pi/2: {worst_eq:.2e}"),
    )
}

/// `exp(−iωt a†a)` applied amplitude by amplitude.
fn rotate_free(state: &FockVector, wt: f64) -> FockVector {
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, a)| a * C64::from_polar(1.0, -wt * n as f64))
        .collect();
    FockVector::from_amplitudes(amps).unwrap()
}

fn quench_conservation() -> Check {
    const CONSTANT: f64 = 1e-10;
    const IDENTITY: f64 = 1e-8;
    const ADIABATIC_FRACTION: f64 = 0.1;
    let params = RabiParams::at_ratio(1.0, 100.0, 0.6).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (0..100).map(|k| 0.2 * k as f64).collect();
    let res = run_quench(
        &params,
        &times,
        QuenchSource::Effective,
        &Truncation::default(),
    )
    .map_err(|e| e.to_string())?;
    let sudden = photon_number(&squeezing_parameter(&params).map_err(|e| e.to_string())?);
    let drift = res.photon_number_drift();
    let offset = res
        .post_quench_n_trace
        .iter()
        .map(|p| (p.1 - sudden).abs())
        .fold(0.0, f64::max);
    let ramp = Ramp {
        duration: 1000.0,
        steps: 10_000,
        check_convergence: true,
    };
    let adiabatic =
        adiabatic_reference(&params, &ramp, &Truncation::default()).map_err(|e| e.to_string())?;
    require(
        drift <= CONSTANT && offset <= IDENTITY && adiabatic.final_n < ADIABATIC_FRACTION * sudden,
        format!(
            "<n> drift {drift:.2e}, max |<n> - sinh^2 r| {offset:.2e}; ramp over 1000/w leaves {:.3e} = {:.2e} of sudden (step-halving change {:.2}%)",
            adiabatic.final_n,
            adiabatic.final_n / sudden,
            100.0 * adiabatic.relative_change.unwrap_or(f64::NAN)
        ),
    )
}

fn estimator_round_trip() -> Check {
    const RADIUS_TOL: f64 = 0.05;
    const SIGMAS: f64 = 3.0;
    let omega = 1.0;
    let det = DetectorConfig::ideal(100_000);
    let rec = simulate_homodyne(&xi(0.3), omega, &period_bins(omega, 16), &det, 2024)
        .map_err(|e| e.to_string())?;
    let est = estimate_fluctuation_amplitude(&rec).map_err(|e| e.to_string())?;
    let r_hat = xi_from_amplitude(est.amplitude).r;
    let counts = simulate_photon_counts(&xi(R06), &DetectorConfig::ideal(1_000_000), 2024)
        .map_err(|e| e.to_string())?;
    let (mean, var) = counts.count_moments().map_err(|e| e.to_string())?;
    let se = (var / 1e6).sqrt();
    require(
        (r_hat / 0.3 - 1.0).abs() <= RADIUS_TOL && (mean - 0.0125).abs() <= SIGMAS * se,
        format!(
            "r_hat {r_hat:.5} vs 0.3; count mean {mean:.6} vs 0.0125 (se {se:.2e}, {:.2} se)",
            (mean - 0.0125) / se
        ),
    )
}

fn figure2_verdicts() -> Check {
    const MATCHED_CORR: f64 = 0.9;
    const SCRAMBLED_CORR: f64 = 0.2;
    const MAX_FALSE_RATE: f64 = 0.05;
    const MAX_RUNTIME: Duration = Duration::from_secs(300);
    let start = Instant::now();
    let cfg = ComparisonConfig::default();
    let grid = FrequencyGrid {
        start: 1.0,
        stop: 4.0,
        modes: 32,
    };
    let bump = ModeSpectrum::from_profile(
        &grid,
        &Profile::GaussianBump {
            center: 2.5,
            width: 0.5,
            r_max: 0.3,
            baseline: 0.0,
        },
    )
    .map_err(|e| e.to_string())?;
    let det = DetectorConfig {
        dark_rate: 1e-3,
        ..DetectorConfig::ideal(100_000)
    };
    let data = generate_spectrum_data(&bump, &det, 2024).map_err(|e| e.to_string())?;
    let matched = compare_mode_data(&data, &cfg).map_err(|e| e.to_string())?;

    // dark counts only, against the same fluctuation records
    let flat =
        ModeSpectrum::from_profile(&grid, &Profile::Flat { r: 0.0 }).map_err(|e| e.to_string())?;
    let dark = generate_spectrum_data(&flat, &det, 4048).map_err(|e| e.to_string())?;
    let counts: Vec<_> = dark.into_iter().map(|d| d.photon).collect();
    let fluct: Vec<_> = data.into_iter().map(|d| d.homodyne).collect();
    let scrambled = compare_spectra(&counts, &fluct, &cfg).map_err(|e| e.to_string())?;

    let noisy = DetectorConfig {
        dark_rate: 1e-2,
        ..DetectorConfig::ideal(10_000)
    };
    let mut false_consistent = 0;
    for seed in 0..100 {
        let d = generate_spectrum_data(&flat, &noisy, seed).map_err(|e| e.to_string())?;
        if compare_mode_data(&d, &cfg)
            .map_err(|e| e.to_string())?
            .verdict
            == Verdict::Consistent
        {
            false_consistent += 1;
        }
    }
    let rate = false_consistent as f64 / 100.0;
    let elapsed = start.elapsed();
    require(
        matched.verdict == Verdict::Consistent
            && matched.correlation >= MATCHED_CORR
            && scrambled.verdict == Verdict::Inconsistent
            && scrambled.correlation <= SCRAMBLED_CORR
            && rate <= MAX_FALSE_RATE
            && elapsed < MAX_RUNTIME,
        format!(
            "matched {} (spearman {:.3}, p {:.3}); scrambled {} (spearman {:.3}); false CONSISTENT {false_consistent}/100; {:.1?}",
            matched.verdict, matched.correlation, matched.p_value, scrambled.verdict, scrambled.correlation, elapsed
        ),
    )
}

/// `½⟨{X(t₁), X(t₂)}⟩` from Heisenberg-picture operators on a padded basis.
fn numeric_two_time(state: &FockVector, omega: f64, t1: f64, t2: f64) -> Result<f64, String> {
    let psi = state.resized(state.dim() + 8);
    let d = psi.dim();
    let h = FockOperator::number(d).map_err(|e| e.to_string())? * omega;
    let x = FockOperator::quadrature_x(d).map_err(|e| e.to_string())?;
    let heisenberg = |t: f64| -> Result<FockVector, String> {
        let u = h.propagator(t).map_err(|e| e.to_string())?;
        let xt = &(&u.adjoint() * &x) * &u;
        xt.apply(&psi).map_err(|e| e.to_string())
    };
    Ok(heisenberg(t1)?.inner(&heisenberg(t2)?).re)
}

fn nonstationary_signature() -> Check {
    const REL_TOL: f64 = 0.05;
    const SIGMAS: f64 = 3.0;
    let omega = 1.0;
    let r: f64 = 0.5;
    let expected = 0.5 * (2.0 * r).sinh();
    let grid: Vec<f64> = (0..8).map(|k| 2.0 * PI * k as f64 / 8.0).collect();
    let sample = |state: &FockVector| -> Result<Vec<(f64, f64, f64)>, String> {
        let mut out = Vec::new();
        for &t1 in &grid {
            for &t2 in &grid {
                out.push((t1, t2, numeric_two_time(state, omega, t1, t2)?));
            }
        }
        Ok(out)
    };
    let sq = squeezed_vacuum(
        &xi(r),
        Construction::OperatorExponential,
        &Truncation::default(),
    )
    .map_err(|e| e.to_string())?;
    let fit = fit_correlation_components(&sample(&sq)?, omega).map_err(|e| e.to_string())?;
    let vac_fit = fit_correlation_components(&sample(&FockVector::vacuum(8).unwrap())?, omega)
        .map_err(|e| e.to_string())?;

    let det = DetectorConfig::ideal(100_000);
    let times = period_bins(omega, 32);
    let mc = fit_variance_modulation(
        &simulate_homodyne(&xi(r), omega, &times, &det, Seed::new(77, 0))
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let mc_vac = fit_variance_modulation(
        &simulate_homodyne(
            &SqueezeParameter::vacuum(),
            omega,
            &times,
            &det,
            Seed::new(77, 1),
        )
        .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;

    let analytic_ok = (fit.cos_sum / expected - 1.0).abs() <= REL_TOL
        && vac_fit.nonstationary_amplitude() < 1e-12;
    let mc_ok = (mc.cos2 / expected - 1.0).abs() <= REL_TOL
        && (mc.cos2 - expected).abs() <= SIGMAS * mc.cos2_se
        && mc_vac.cos2.abs() <= SIGMAS * mc_vac.cos2_se
        && mc_vac.sin2.abs() <= SIGMAS * mc_vac.sin2_se;
    require(
        analytic_ok && mc_ok,
        format!(
            "expected {expected:.6}; analytic {:.10}, vacuum {:.1e}; Monte Carlo {:.5} +- {:.5}, vacuum ({:.1e}, {:.1e}) +- {:.1e}",
            fit.cos_sum,
            vac_fit.nonstationary_amplitude(),
            mc.cos2,
            mc.cos2_se,
            mc_vac.cos2,
            mc_vac.sin2,
            mc_vac.cos2_se
        ),
    )
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        ("sw-correspondence", sw_correspondence),
        ("photon-number-identity", photon_number_identity),
        ("rotation-dynamics", rotation_dynamics),
        (
            "construction-cross-validation",
            construction_cross_validation,
        ),
        ("uncertainty-floor", uncertainty_floor),
        ("quench-conservation", quench_conservation),
        ("estimator-round-trip", estimator_round_trip),
        ("fig2-verdicts", figure2_verdicts),
        ("nonstationary-signature", nonstationary_signature),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({elapsed:.1?}) {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({elapsed:.1?}) {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
