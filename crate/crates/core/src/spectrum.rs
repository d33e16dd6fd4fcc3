//! Multimode decision engine: does the photon-count histogram of a dark
//! detector follow the fluctuation spectrum of the same modes?
//!
//! Each mode is simulated independently (photon counts plus a homodyne record
//! over one variance period). From the homodyne side the fluctuation amplitude
//! `A(ω)` gives `r̂ = ½ ln 2A` and a predicted excess count `η sinh² r̂`. The
//! verdict combines the Spearman rank correlation between observed and
//! predicted excess counts with a χ² goodness-of-fit test of the same link.

use std::fmt::Write as _;
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::measurement::{
    estimate_fluctuation_amplitude, period_bins, simulate_homodyne, simulate_photon_counts,
    xi_from_amplitude, DetectorConfig, MeasurementRecord, Seed, MIN_TIME_BINS,
};
use crate::squeezed::SqueezeParameter;

/// Homodyne time bins per mode, spread over `[0, π/ω)`.
pub const HOMODYNE_BINS: usize = MIN_TIME_BINS;

/// Fewest modes a comparison accepts.
pub const MIN_MODES: usize = 8;

/// Evenly spaced angular frequencies, both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub modes: usize,
}

impl FrequencyGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.modes < 2 {
            return Err(Error::Resolution(format!(
                "frequency grid needs at least 2 modes, got {}",
                self.modes
            )));
        }
        if !(self.start.is_finite()
            && self.stop.is_finite()
            && self.start > 0.0
            && self.stop > self.start)
        {
            return Err(Error::InvalidParameter(
                "frequency grid needs 0 < start < stop".into(),
            ));
        }
        let step = (self.stop - self.start) / (self.modes - 1) as f64;
        Ok((0..self.modes)
            .map(|k| self.start + step * k as f64)
            .collect())
    }
}

/// Named generators for `r(ω)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Flat {
        r: f64,
    },
    /// `baseline + r_max · exp(−(ω−center)²/(2 width²))`.
    GaussianBump {
        center: f64,
        width: f64,
        r_max: f64,
        #[serde(default)]
        baseline: f64,
    },
    /// `amplitude · (ω/reference)^exponent`.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
        reference: f64,
    },
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Flat { .. } => "flat",
            Profile::GaussianBump { .. } => "gaussian-bump",
            Profile::PowerLaw { .. } => "power-law",
        }
    }

    pub fn eval(&self, omega: f64) -> f64 {
        match *self {
            Profile::Flat { r } => r,
            Profile::GaussianBump {
                center,
                width,
                r_max,
                baseline,
            } => baseline + r_max * (-(omega - center).powi(2) / (2.0 * width * width)).exp(),
            Profile::PowerLaw {
                amplitude,
                exponent,
                reference,
            } => amplitude * (omega / reference).powf(exponent),
        }
    }
}

/// Squeezing magnitude per mode on an ascending frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub frequencies: Vec<f64>,
    pub r: Vec<f64>,
    /// `flat`, `gaussian-bump`, `power-law` or `user-table`.
    pub profile_kind: String,
}

impl ModeSpectrum {
    pub fn new(
        frequencies: Vec<f64>,
        r: Vec<f64>,
        profile_kind: impl Into<String>,
    ) -> Result<Self> {
        let s = Self {
            frequencies,
            r,
            profile_kind: profile_kind.into(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_profile(grid: &FrequencyGrid, profile: &Profile) -> Result<Self> {
        let frequencies = grid.points()?;
        let r = frequencies.iter().map(|&w| profile.eval(w)).collect();
        Self::new(frequencies, r, profile.name())
    }

    /// Reads a `frequency,r` CSV table with a header row.
    pub fn from_table<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "frequency" || &headers[1] != "r" {
            return Err(Error::Parse(format!(
                "expected header `frequency,r`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut frequencies, mut r) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec[i]
                    .parse()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))
            };
            frequencies.push(parse(0)?);
            r.push(parse(1)?);
        }
        Self::new(frequencies, r, "user-table")
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.len() != self.r.len() {
            return Err(Error::InvalidParameter(format!(
                "{} frequencies but {} squeezing values",
                self.frequencies.len(),
                self.r.len()
            )));
        }
        if self.frequencies.is_empty() {
            return Err(Error::InvalidParameter("spectrum has no modes".into()));
        }
        if self
            .frequencies
            .iter()
            .any(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(Error::InvalidParameter(
                "mode frequencies must be finite and positive".into(),
            ));
        }
        if self.frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "mode frequencies must be strictly ascending".into(),
            ));
        }
        if self.r.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidParameter(
                "squeezing values must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Both records for one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeData {
    pub photon: MeasurementRecord,
    pub homodyne: MeasurementRecord,
}

/// Simulates every mode with sub-seeds `Seed::new(seed, mode_index)`.
pub fn generate_spectrum_data(
    spectrum: &ModeSpectrum,
    detector: &DetectorConfig,
    seed: u64,
) -> Result<Vec<ModeData>> {
    spectrum.validate()?;
    detector.validate()?;
    spectrum
        .frequencies
        .par_iter()
        .zip(&spectrum.r)
        .enumerate()
        .map(|(k, (&omega, &r))| {
            let xi = SqueezeParameter::coupling_induced(r)?;
            let sub = Seed::new(seed, k as u64);
            let mut photon = simulate_photon_counts(&xi, detector, sub)?;
            photon.mode_frequency = Some(omega);
            let homodyne = simulate_homodyne(
                &xi,
                omega,
                &period_bins(omega, HOMODYNE_BINS),
                detector,
                sub,
            )?;
            Ok(ModeData { photon, homodyne })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountPrediction {
    pub r_hat: f64,
    pub clamped: bool,
    /// Expected excess counts per shot, `η sinh² r̂`.
    pub excess: f64,
    /// Propagated from the amplitude's standard error.
    pub standard_error: f64,
}

/// `η sinh² r̂` with `r̂ = ½ ln 2A`; amplitudes below ½ predict zero.
pub fn predicted_counts_from_fluctuations(
    amplitudes: &[(f64, f64)],
    detector: &DetectorConfig,
) -> Vec<CountPrediction> {
    let eta = detector.efficiency;
    amplitudes
        .iter()
        .map(|&(a, se)| {
            let est = xi_from_amplitude(a);
            let excess = eta * est.r.sinh().powi(2);
            // d/dA of η sinh²(½ ln 2A) = η sinh(2r̂) / (2A)
            let slope = if est.r > 0.0 {
                eta * (2.0 * est.r).sinh() / (2.0 * a)
            } else {
                0.0
            };
            CountPrediction {
                r_hat: est.r,
                clamped: est.clamped,
                excess,
                standard_error: slope * se,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DarkCountModel {
    /// Subtract the detector's configured dark rate.
    Known,
    /// Estimate the dark rate as the mean count of the listed reference modes.
    Reference { modes: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub correlation_threshold: f64,
    pub p_threshold: f64,
    /// An excess is resolvable when it exceeds this many standard errors.
    pub power_sigmas: f64,
    pub dark_counts: DarkCountModel,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            correlation_threshold: 0.8,
            p_threshold: 0.05,
            power_sigmas: 3.0,
            dark_counts: DarkCountModel::Known,
        }
    }
}

impl ComparisonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.correlation_threshold) {
            return Err(Error::InvalidParameter(
                "correlation threshold outside [-1, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_threshold) {
            return Err(Error::InvalidParameter(
                "p-value threshold outside [0, 1]".into(),
            ));
        }
        if !(self.power_sigmas.is_finite() && self.power_sigmas > 0.0) {
            return Err(Error::InvalidParameter(
                "power_sigmas must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "CONSISTENT",
            Verdict::Inconsistent => "INCONSISTENT",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub frequencies: Vec<f64>,
    pub shots: Vec<usize>,
    pub mean_counts: Vec<f64>,
    pub dark_rate: f64,
    /// Dark-subtracted mean counts per shot.
    pub count_spectrum: Vec<f64>,
    pub count_standard_errors: Vec<f64>,
    pub fluctuation_spectrum: Vec<f64>,
    pub fluctuation_standard_errors: Vec<f64>,
    pub predicted_counts: Vec<CountPrediction>,
    pub correlation: f64,
    pub chi2: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub resolvable_modes: usize,
    pub config: ComparisonConfig,
    pub verdict: Verdict,
}

impl SpectrumComparison {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict: {}", self.verdict);
        let _ = writeln!(
            s,
            "spearman {:.4} (threshold {}), chi2 {:.3} on {} dof, p = {:.4} (threshold {})",
            self.correlation,
            self.config.correlation_threshold,
            self.chi2,
            self.degrees_of_freedom,
            self.p_value,
            self.config.p_threshold
        );
        let _ = writeln!(
            s,
            "{} of {} modes have a predicted excess above {} standard errors; dark rate {:.6e}",
            self.resolvable_modes,
            self.frequencies.len(),
            self.config.power_sigmas,
            self.dark_rate
        );
        let _ = writeln!(
            s,
            "{:>12} {:>14} {:>14} {:>12}",
            "omega", "excess", "predicted", "A"
        );
        for i in 0..self.frequencies.len() {
            let _ = writeln!(
                s,
                "{:>12.6} {:>14.6e} {:>14.6e} {:>12.6}",
                self.frequencies[i],
                self.count_spectrum[i],
                self.predicted_counts[i].excess,
                self.fluctuation_spectrum[i]
            );
        }
        s
    }
}

/// Ranks starting at 1, ties sharing their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rank correlation; 0 when either side has no rank spread.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman inputs differ in length");
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Compares per-mode photon-count records with homodyne records on the same
/// frequency grid.
///
/// Count errors are Poisson-like: `σ² = max(sample variance, mean)/shots`,
/// floored at `1/shots²`, plus the propagated prediction error. χ² has one
/// degree of freedom per mode since nothing is fitted. The verdict is
/// INCONCLUSIVE when no predicted excess exceeds `power_sigmas` standard
/// errors, CONSISTENT when the correlation and p-value both clear their
/// thresholds, INCONSISTENT otherwise.
pub fn compare_spectra(
    counts: &[MeasurementRecord],
    fluctuations: &[MeasurementRecord],
    config: &ComparisonConfig,
) -> Result<SpectrumComparison> {
    config.validate()?;
    if counts.len() != fluctuations.len() {
        return Err(Error::Alignment(format!(
            "{} count records vs {} homodyne records",
            counts.len(),
            fluctuations.len()
        )));
    }
    if counts.len() < MIN_MODES {
        return Err(Error::Resolution(format!(
            "{} modes, need at least {MIN_MODES}",
            counts.len()
        )));
    }
    let mut frequencies = Vec::with_capacity(counts.len());
    for (k, (c, f)) in counts.iter().zip(fluctuations).enumerate() {
        match (c.mode_frequency, f.mode_frequency) {
            (Some(a), Some(b)) if a == b => frequencies.push(a),
            (a, b) => {
                return Err(Error::Alignment(format!(
                    "mode {k}: count frequency {a:?} vs homodyne frequency {b:?}"
                )))
            }
        }
    }
    if frequencies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Alignment(
            "mode frequencies are not strictly ascending".into(),
        ));
    }
    if let Some(c) = counts
        .iter()
        .find(|c| c.detector.efficiency != counts[0].detector.efficiency)
    {
        return Err(Error::Alignment(format!(
            "mixed detector efficiencies {} and {}",
            counts[0].detector.efficiency, c.detector.efficiency
        )));
    }

    let moments: Vec<(f64, f64)> = counts
        .iter()
        .map(|c| c.count_moments())
        .collect::<Result<_>>()?;
    let shots: Vec<usize> = counts.iter().map(|c| c.sample_count()).collect();
    let dark_rate = match &config.dark_counts {
        DarkCountModel::Known => counts[0].detector.dark_rate,
        DarkCountModel::Reference { modes } => {
            if modes.is_empty() || modes.iter().any(|&m| m >= counts.len()) {
                return Err(Error::InvalidParameter(format!(
                    "reference modes {modes:?} outside 0..{}",
                    counts.len()
                )));
            }
            modes.iter().map(|&m| moments[m].0).sum::<f64>() / modes.len() as f64
        }
    };
    let amplitudes: Vec<(f64, f64)> = fluctuations
        .iter()
        .map(|f| estimate_fluctuation_amplitude(f).map(|a| (a.amplitude, a.standard_error)))
        .collect::<Result<_>>()?;
    let predicted = predicted_counts_from_fluctuations(&amplitudes, &counts[0].detector);

    let count_spectrum: Vec<f64> = moments.iter().map(|m| m.0 - dark_rate).collect();
    let count_se: Vec<f64> = moments
        .iter()
        .zip(&shots)
        .map(|(&(mean, var), &n)| {
            let n = n as f64;
            (var.max(mean) / n).max(1.0 / (n * n)).sqrt()
        })
        .collect();
    let total_se: Vec<f64> = count_se
        .iter()
        .zip(&predicted)
        .map(|(c, p)| c.hypot(p.standard_error))
        .collect();

    let chi2: f64 = count_spectrum
        .iter()
        .zip(&predicted)
        .zip(&total_se)
        .map(|((obs, p), se)| ((obs - p.excess) / se).powi(2))
        .sum();
    let dof = counts.len();
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?
        .sf(chi2);
    let predicted_excess: Vec<f64> = predicted.iter().map(|p| p.excess).collect();
    let correlation = spearman(&count_spectrum, &predicted_excess);
    let resolvable_modes = predicted
        .iter()
        .zip(&total_se)
        .filter(|(p, se)| p.excess > config.power_sigmas * **se)
        .count();

    let verdict = if resolvable_modes == 0 {
        Verdict::Inconclusive
    } else if correlation >= config.correlation_threshold && p_value >= config.p_threshold {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    Ok(SpectrumComparison {
        frequencies,
        shots,
        mean_counts: moments.iter().map(|m| m.0).collect(),
        dark_rate,
        count_spectrum,
        count_standard_errors: count_se,
        fluctuation_spectrum: amplitudes.iter().map(|a| a.0).collect(),
        fluctuation_standard_errors: amplitudes.iter().map(|a| a.1).collect(),
        predicted_counts: predicted,
        correlation,
        chi2,
        degrees_of_freedom: dof,
        p_value,
        resolvable_modes,
        config: config.clone(),
        verdict,
    })
}

/// Splits generated data and runs [`compare_spectra`].
pub fn compare_mode_data(
    data: &[ModeData],
    config: &ComparisonConfig,
) -> Result<SpectrumComparison> {
    let (counts, fluct): (Vec<_>, Vec<_>) = data
        .iter()
        .map(|d| (d.photon.clone(), d.homodyne.clone()))
        .unzip();
    compare_spectra(&counts, &fluct, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bump(modes: usize) -> ModeSpectrum {
        let grid = FrequencyGrid {
            start: 1.0,
            stop: 4.0,
            modes,
        };
        ModeSpectrum::from_profile(
            &grid,
            &Profile::GaussianBump {
                center: 2.5,
                width: 0.5,
                r_max: 0.3,
                baseline: 0.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
        assert_abs_diff_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_abs_diff_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
        // textbook example: d² sum 4 over n = 5 gives 1 − 6·4/120
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]),
            0.8,
            epsilon = 1e-15
        );
    }

    #[test]
    fn profiles() {
        let grid = FrequencyGrid {
            start: 1.0,
            stop: 2.0,
            modes: 3,
        };
        let flat = ModeSpectrum::from_profile(&grid, &Profile::Flat { r: 0.2 }).unwrap();
        assert_eq!(flat.r, vec![0.2; 3]);
        assert_eq!(flat.frequencies, vec![1.0, 1.5, 2.0]);
        let pl = ModeSpectrum::from_profile(
            &grid,
            &Profile::PowerLaw {
                amplitude: 0.1,
                exponent: -1.0,
                reference: 1.0,
            },
        )
        .unwrap();
        assert_abs_diff_eq!(pl.r[2], 0.05);
        assert_eq!(pl.profile_kind, "power-law");
        assert!(ModeSpectrum::from_profile(&grid, &Profile::Flat { r: -0.1 }).is_err());
        assert!(ModeSpectrum::new(vec![1.0, 1.0], vec![0.0, 0.0], "user-table").is_err());
    }

    #[test]
    fn table_input() {
        let table = "frequency,r\n# comment\n1.0, 0.1\n2.0,0.2\n";
        let s = ModeSpectrum::from_table(table.as_bytes()).unwrap();
        assert_eq!(s.r, vec![0.1, 0.2]);
        assert_eq!(s.profile_kind, "user-table");
        assert!(ModeSpectrum::from_table("omega,r\n1,0\n".as_bytes()).is_err());
        assert!(ModeSpectrum::from_table("frequency,r\n2,0\n1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn prediction_chain() {
        let det = DetectorConfig::ideal(10);
        let p = predicted_counts_from_fluctuations(&[(0.5, 0.0), (0.625, 0.0), (0.3, 0.0)], &det);
        assert_eq!(p[0].excess, 0.0);
        assert_abs_diff_eq!(p[1].excess, 0.0125, epsilon = 1e-15);
        assert!(p[2].clamped && p[2].excess == 0.0);
        let half = predicted_counts_from_fluctuations(
            &[(0.625, 0.0)],
            &DetectorConfig {
                efficiency: 0.5,
                ..det
            },
        );
        assert_abs_diff_eq!(half[0].excess, 0.00625, epsilon = 1e-15);
    }

    #[test]
    fn flat_vacuum_is_quiet() {
        let grid = FrequencyGrid {
            start: 1.0,
            stop: 2.0,
            modes: 8,
        };
        let s = ModeSpectrum::from_profile(&grid, &Profile::Flat { r: 0.0 }).unwrap();
        let data = generate_spectrum_data(&s, &DetectorConfig::ideal(20_000), 1).unwrap();
        for d in &data {
            assert!(d.photon.counts().unwrap().iter().all(|&c| c == 0));
            let a = estimate_fluctuation_amplitude(&d.homodyne)
                .unwrap()
                .amplitude;
            assert!((a - 0.5).abs() < 0.02, "A {a}");
        }
    }

    #[test]
    fn bump_peaks_agree() {
        let data = generate_spectrum_data(&bump(16), &DetectorConfig::ideal(100_000), 3).unwrap();
        let argmax = |v: Vec<f64>| {
            v.iter()
                .enumerate()
                .fold((0, f64::MIN), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
                .0
        };
        let counts = argmax(
            data.iter()
                .map(|d| d.photon.count_moments().unwrap().0)
                .collect(),
        );
        let amps = argmax(
            data.iter()
                .map(|d| {
                    estimate_fluctuation_amplitude(&d.homodyne)
                        .unwrap()
                        .amplitude
                })
                .collect(),
        );
        assert!(counts.abs_diff(amps) <= 1, "{counts} vs {amps}");
    }

    #[test]
    fn generation_is_deterministic() {
        let det = DetectorConfig {
            dark_rate: 0.01,
            ..DetectorConfig::ideal(2_000)
        };
        assert_eq!(
            generate_spectrum_data(&bump(8), &det, 9).unwrap(),
            generate_spectrum_data(&bump(8), &det, 9).unwrap()
        );
    }

    #[test]
    fn vacuum_low_shots_is_inconclusive() {
        let grid = FrequencyGrid {
            start: 1.0,
            stop: 2.0,
            modes: 8,
        };
        let s = ModeSpectrum::from_profile(&grid, &Profile::Flat { r: 0.0 }).unwrap();
        let det = DetectorConfig {
            dark_rate: 0.01,
            ..DetectorConfig::ideal(500)
        };
        let cmp = compare_mode_data(
            &generate_spectrum_data(&s, &det, 4).unwrap(),
            &ComparisonConfig::default(),
        )
        .unwrap();
        assert_eq!(cmp.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn comparison_rejects_misaligned_input() {
        let det = DetectorConfig::ideal(100);
        let data = generate_spectrum_data(&bump(8), &det, 1).unwrap();
        let (mut counts, fl): (Vec<_>, Vec<_>) =
            data.into_iter().map(|d| (d.photon, d.homodyne)).unzip();
        counts[3].mode_frequency = Some(100.0);
        assert!(matches!(
            compare_spectra(&counts, &fl, &ComparisonConfig::default()),
            Err(Error::Alignment(_))
        ));
        assert!(matches!(
            compare_spectra(&counts[..7], &fl[..7], &ComparisonConfig::default()),
            Err(Error::Resolution(_))
        ));
        assert!(matches!(
            compare_spectra(&counts, &fl[..7], &ComparisonConfig::default()),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn reference_dark_estimate() {
        let grid = FrequencyGrid {
            start: 1.0,
            stop: 4.0,
            modes: 10,
        };
        let s = ModeSpectrum::from_profile(
            &grid,
            &Profile::GaussianBump {
                center: 3.5,
                width: 0.3,
                r_max: 0.3,
                baseline: 0.0,
            },
        )
        .unwrap();
        let det = DetectorConfig {
            dark_rate: 0.02,
            ..DetectorConfig::ideal(50_000)
        };
        let data = generate_spectrum_data(&s, &det, 6).unwrap();
        let cfg = ComparisonConfig {
            dark_counts: DarkCountModel::Reference {
                modes: vec![0, 1, 2],
            },
            ..Default::default()
        };
        let cmp = compare_mode_data(&data, &cfg).unwrap();
        assert!(
            (cmp.dark_rate - 0.02).abs() < 4.0 * (0.02f64 / 150_000.0).sqrt(),
            "{}",
            cmp.dark_rate
        );
        let bad = ComparisonConfig {
            dark_counts: DarkCountModel::Reference { modes: vec![10] },
            ..Default::default()
        };
        assert!(compare_mode_data(&data, &bad).is_err());
    }
}
