//! Time-of-flight experiments and parameter scans.
//!
//! A pulse is launched as the exact travelling wave of the model on a uniform
//! magnetic background and tracked through the energy-perturbation centroid
//! `z̄(t) = Σ z u' / Σ u'`, where `u' = u - u_bg` uses the analytic background
//! density. The measured speed is the least-squares slope of `z̄(t)` while the
//! centroid is inside the measurement window.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constitutive::{invert_db_counted, jacobian_d_of_e, to_dh};
use crate::error::{Error, Result};
use crate::exact::{predicted_velocity, standard_profile, AnsatzSpec, PhaseVelocity, PulseProfile};
use crate::forms4d::Vec3;
use crate::lagrangian::{duality_residual, LagrangianModel};
use crate::solver::{run_with, Grid1D, GridState1D, InitialCondition, Scheme, SolverConfig, Snapshot};

/// Minimum coefficient of determination of an accepted centroid fit.
pub const MIN_R_SQUARED: f64 = 0.999;
/// Minimum window length in pulse widths.
pub const MIN_WINDOW_WIDTHS: f64 = 20.0;
/// Approximate number of centroid samples per run.
const TARGET_SAMPLES: usize = 512;

/// How the pulse is seeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseInit {
    /// Exact travelling wave of the model.
    Ansatz,
    /// Cold start with `E ∥ x̂`.
    PolarizedX,
    /// Cold start with `E ∥ ŷ`.
    PolarizedY,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseSettings {
    /// `None` picks `0.1 / max(κ, 2√λ)` (0.1 for Maxwell).
    pub amplitude: Option<f64>,
    pub center: f64,
    pub width: f64,
    pub init: PulseInit,
}

/// Full description of a time-of-flight run or sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TofConfig {
    pub model: LagrangianModel,
    pub background: [f64; 3],
    pub pulse: PulseSettings,
    pub grid_n: usize,
    pub length: f64,
    pub window: [f64; 2],
    pub scheme: Scheme,
    pub cfl: f64,
    pub record_every: usize,
    /// Accepted relative speed error for the pass/fail verdict.
    pub tolerance: f64,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub seed: u64,
    pub sweep_models: Vec<LagrangianModel>,
    pub sweep_backgrounds: Vec<[f64; 3]>,
}

impl Default for TofConfig {
    fn default() -> Self {
        Self {
            model: LagrangianModel::Maxwell,
            background: [0.0; 3],
            pulse: PulseSettings {
                amplitude: None,
                center: 10.0,
                width: 1.0,
                init: PulseInit::Ansatz,
            },
            grid_n: 4096,
            length: 64.0,
            window: [12.0, 42.0],
            scheme: Scheme::Leapfrog,
            cfl: 0.5,
            record_every: 0,
            tolerance: 5e-3,
            csv: None,
            json: None,
            seed: 0,
            sweep_models: Vec::new(),
            sweep_backgrounds: Vec::new(),
        }
    }
}

/// Builds a model from its descriptor fields.
///
/// `kind` is one of `maxwell`, `bi` (`born-infeld`), `duality` or `family`;
/// `family` defaults to `𝓕 = ξ/2 + ξ²`.
pub fn build_model(
    kind: &str,
    kappa: Option<f64>,
    lambda: Option<f64>,
    coeffs: Option<Vec<f64>>,
    c1: f64,
    c2: f64,
) -> Result<LagrangianModel> {
    let model = match kind.trim().to_ascii_lowercase().as_str() {
        "maxwell" => LagrangianModel::Maxwell,
        "bi" | "born-infeld" | "borninfeld" => LagrangianModel::born_infeld(kappa.unwrap_or(1.0))?,
        "duality" => LagrangianModel::duality_family(lambda.unwrap_or(0.25))?,
        "family" => LagrangianModel::general_family(lambda.unwrap_or(0.25), coeffs.unwrap_or_else(|| vec![1.0]))?,
        other => return Err(Error::Config(format!("unknown model kind '{other}'"))),
    };
    Ok(model.with_constants(c1, c2))
}

/// Parses a compact model token: `maxwell`, `bi:κ`, `duality:λ` or
/// `family:λ:a₂:a₃:…`.
pub fn parse_model_token(token: &str) -> Result<LagrangianModel> {
    let mut parts = token.trim().split(':');
    let kind = parts.next().unwrap_or_default();
    let nums = parts.map(|p| parse_f64("model token", p)).collect::<Result<Vec<_>>>()?;
    let first = nums.first().copied();
    match kind {
        "maxwell" if nums.is_empty() => build_model(kind, None, None, None, 0.0, 0.0),
        "bi" | "born-infeld" if nums.len() <= 1 => build_model(kind, first, None, None, 0.0, 0.0),
        "duality" if nums.len() <= 1 => build_model(kind, None, first, None, 0.0, 0.0),
        "family" if !nums.is_empty() => {
            let coeffs = if nums.len() > 1 { Some(nums[1..].to_vec()) } else { None };
            build_model(kind, None, first, coeffs, 0.0, 0.0)
        }
        _ => Err(Error::Config(format!("malformed model token '{token}'"))),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: '{value}' is not a number")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

fn parse_vec3(key: &str, value: &str) -> Result<[f64; 3]> {
    let v = parse_list(key, value)?;
    v.try_into()
        .map_err(|_| Error::Config(format!("{key}: expected three components in '{value}'")))
}

/// Splits `key = value` lines, dropping blank lines and `#` comments.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(map)
}

impl TofConfig {
    /// Parses the flat key-value format; unset keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = parse_key_values(text)?;
        let mut take = |key: &str| map.remove(key);
        let mut cfg = TofConfig::default();

        let kind = take("model.kind").unwrap_or_else(|| "maxwell".into());
        let kappa = take("model.kappa").map(|v| parse_f64("model.kappa", &v)).transpose()?;
        let lambda = take("model.lambda").map(|v| parse_f64("model.lambda", &v)).transpose()?;
        let coeffs = take("model.coeffs").map(|v| parse_list("model.coeffs", &v)).transpose()?;
        let c1 = take("model.c1").map(|v| parse_f64("model.c1", &v)).transpose()?.unwrap_or(0.0);
        let c2 = take("model.c2").map(|v| parse_f64("model.c2", &v)).transpose()?.unwrap_or(0.0);
        cfg.model = build_model(&kind, kappa, lambda, coeffs, c1, c2)?;

        for (i, key) in ["background.bx", "background.by", "background.bz"].iter().enumerate() {
            if let Some(v) = take(key) {
                cfg.background[i] = parse_f64(key, &v)?;
            }
        }
        if let Some(v) = take("pulse.amplitude") {
            cfg.pulse.amplitude = Some(parse_f64("pulse.amplitude", &v)?);
        }
        if let Some(v) = take("pulse.center") {
            cfg.pulse.center = parse_f64("pulse.center", &v)?;
        }
        if let Some(v) = take("pulse.width") {
            cfg.pulse.width = parse_f64("pulse.width", &v)?;
        }
        if let Some(v) = take("pulse.init") {
            cfg.pulse.init = match v.as_str() {
                "ansatz" => PulseInit::Ansatz,
                "polarized-x" => PulseInit::PolarizedX,
                "polarized-y" => PulseInit::PolarizedY,
                other => return Err(Error::Config(format!("pulse.init: unknown value '{other}'"))),
            };
        }
        if let Some(v) = take("grid.n") {
            cfg.grid_n = v
                .parse()
                .map_err(|_| Error::Config(format!("grid.n: '{v}' is not a cell count")))?;
        }
        if let Some(v) = take("grid.length") {
            cfg.length = parse_f64("grid.length", &v)?;
        }
        if let Some(v) = take("window.start") {
            cfg.window[0] = parse_f64("window.start", &v)?;
        }
        if let Some(v) = take("window.stop") {
            cfg.window[1] = parse_f64("window.stop", &v)?;
        }
        if let Some(v) = take("solver.scheme") {
            cfg.scheme = match v.as_str() {
                "leapfrog" => Scheme::Leapfrog,
                "lax-friedrichs" => Scheme::LaxFriedrichs,
                other => return Err(Error::Config(format!("solver.scheme: unknown scheme '{other}'"))),
            };
        }
        if let Some(v) = take("solver.cfl") {
            cfg.cfl = parse_f64("solver.cfl", &v)?;
        }
        if let Some(v) = take("solver.record_every") {
            cfg.record_every = v
                .parse()
                .map_err(|_| Error::Config(format!("solver.record_every: '{v}' is not a step count")))?;
        }
        if let Some(v) = take("check.tolerance") {
            cfg.tolerance = parse_f64("check.tolerance", &v)?;
        }
        cfg.csv = take("output.csv").map(PathBuf::from);
        cfg.json = take("output.json").map(PathBuf::from);
        if let Some(v) = take("seed") {
            cfg.seed = v
                .parse()
                .map_err(|_| Error::Config(format!("seed: '{v}' is not an unsigned integer")))?;
        }
        if let Some(v) = take("sweep.models") {
            cfg.sweep_models = v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(parse_model_token)
                .collect::<Result<_>>()?;
        }
        if let Some(v) = take("sweep.backgrounds") {
            cfg.sweep_backgrounds = v
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse_vec3("sweep.backgrounds", s))
                .collect::<Result<_>>()?;
        }
        if let Some(key) = map.keys().next() {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn background_vec(&self) -> Vec3 {
        Vec3::from(self.background)
    }

    /// Pulse profile for `model`, using the model's default amplitude if unset.
    pub fn profile_for(&self, model: &LagrangianModel) -> Result<PulseProfile> {
        let amplitude = self
            .pulse
            .amplitude
            .unwrap_or_else(|| standard_profile(model).amplitude());
        PulseProfile::gaussian(amplitude, self.pulse.center, self.pulse.width)
    }

    /// Same settings with another model and background.
    pub fn with_case(&self, model: LagrangianModel, background: [f64; 3]) -> Self {
        Self {
            model,
            background,
            ..self.clone()
        }
    }

    /// Checks the geometric constraints for `velocity`.
    pub fn validate(&self, velocity: f64) -> Result<()> {
        let [start, stop] = self.window;
        let sigma = self.pulse.width;
        if !(sigma > 0.0) {
            return Err(Error::Config("pulse.width must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("check.tolerance must be positive".into()));
        }
        if stop - start < MIN_WINDOW_WIDTHS * sigma {
            return Err(Error::Config(format!(
                "window [{start}, {stop}] is shorter than {MIN_WINDOW_WIDTHS} pulse widths"
            )));
        }
        if start < self.pulse.center {
            return Err(Error::Config("window must start at or after the pulse centre".into()));
        }
        let radius = self.profile_for(&self.model)?.support_radius();
        if self.pulse.center - radius < 0.0 {
            return Err(Error::Config("pulse does not fit in the domain".into()));
        }
        let far_edge = self.pulse.center + velocity * self.tracking_time(velocity) + radius;
        if far_edge > self.length {
            return Err(Error::Config(format!(
                "pulse reaches z = {far_edge:.3} before the measurement ends; domain length is {}",
                self.length
            )));
        }
        Grid1D::new(self.grid_n, self.length)?;
        SolverConfig::new(self.cfl, 1.0, self.scheme)?;
        Ok(())
    }

    /// Time for the centroid to clear the window by one pulse width.
    fn tracking_time(&self, velocity: f64) -> f64 {
        (self.window[1] + self.pulse.width - self.pulse.center) / velocity
    }
}

/// Centroid track and fit diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentroidFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares line through `(t, z)` pairs.
pub fn fit_line(points: &[(f64, f64)]) -> Result<CentroidFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("only {} centroid samples in the window", points.len())));
    }
    let n = points.len() as f64;
    let (mt, mz) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, z)| (a + t / n, b + z / n));
    let (stt, stz, szz) = points.iter().fold((0.0, 0.0, 0.0), |(a, b, c), (t, z)| {
        let (dt, dz) = (t - mt, z - mz);
        (a + dt * dt, b + dt * dz, c + dz * dz)
    });
    if stt == 0.0 {
        return Err(Error::Fit("centroid samples share a single time".into()));
    }
    let slope = stz / stt;
    let r_squared = if szz == 0.0 { 0.0 } else { stz * stz / (stt * szz) };
    Ok(CentroidFit {
        slope,
        intercept: mz - slope * mt,
        r_squared,
        samples: points.len(),
    })
}

/// Centroid of `density - background` against the cell positions.
pub fn centroid(z: &[f64], density: &[f64], background: f64) -> Option<f64> {
    let (num, den) = z
        .iter()
        .zip(density)
        .fold((0.0, 0.0), |(n, d), (z, u)| (n + z * (u - background), d + (u - background)));
    (den != 0.0 && (num / den).is_finite()).then(|| num / den)
}

/// Relative L² distance between the perturbations `a - bg` and `b - bg`.
pub fn relative_l2(a: &[[f64; 4]], b: &[[f64; 4]], bg: &[f64; 4]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        for k in 0..4 {
            num += (x[k] - y[k]).powi(2);
            den += (y[k] - bg[k]).powi(2);
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TofResult {
    pub model: String,
    pub background: [f64; 3],
    pub v_measured: f64,
    pub v_predicted: f64,
    pub chi: f64,
    pub relative_error: f64,
    pub fit: CentroidFit,
    pub steps: usize,
    pub dt: f64,
    pub mean_newton_iterations: f64,
    /// `|E(end) - E(0)| / |E(0) - E_bg|` over the run.
    pub energy_drift: f64,
    /// Relative L² deviation after one periodic transit, when requested.
    pub shape_deviation: Option<f64>,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
}

impl TofResult {
    pub fn within(&self, tolerance: f64) -> bool {
        self.relative_error.abs() <= tolerance
    }
}

fn initial_condition(cfg: &TofConfig, profile: PulseProfile, velocity: PhaseVelocity) -> Result<InitialCondition> {
    Ok(match cfg.pulse.init {
        PulseInit::Ansatz => InitialCondition::Ansatz(AnsatzSpec::new(profile, velocity, cfg.background_vec())?),
        PulseInit::PolarizedX => InitialCondition::Polarized {
            profile,
            polarization: Vec3::x(),
        },
        PulseInit::PolarizedY => InitialCondition::Polarized {
            profile,
            polarization: Vec3::y(),
        },
    })
}

/// Runs the time-of-flight experiment described by `cfg`.
pub fn measure_tof(cfg: &TofConfig) -> Result<TofResult> {
    run_experiment(cfg, false)?.into_result(cfg)
}

/// Time of flight plus shape deviation after one full periodic transit.
pub fn measure_tof_with_fidelity(cfg: &TofConfig) -> Result<TofResult> {
    run_experiment(cfg, true)?.into_result(cfg)
}

/// Simulation output before the fit gate is applied.
struct Experiment {
    velocity: PhaseVelocity,
    fit: Result<CentroidFit>,
    steps: usize,
    dt: f64,
    mean_newton_iterations: f64,
    energy_drift: f64,
    shape_deviation: Option<f64>,
    snapshots: Vec<Snapshot>,
}

impl Experiment {
    fn into_result(self, cfg: &TofConfig) -> Result<TofResult> {
        let fit = self.fit?;
        Ok(TofResult {
            model: cfg.model.to_string(),
            background: cfg.background,
            v_measured: fit.slope,
            v_predicted: self.velocity.v,
            chi: self.velocity.chi,
            relative_error: (fit.slope - self.velocity.v) / self.velocity.v,
            fit,
            steps: self.steps,
            dt: self.dt,
            mean_newton_iterations: self.mean_newton_iterations,
            energy_drift: self.energy_drift,
            shape_deviation: self.shape_deviation,
            snapshots: self.snapshots,
        })
    }
}

fn gated_fit(track: &[(f64, f64)]) -> Result<CentroidFit> {
    let fit = fit_line(track)?;
    if fit.r_squared < MIN_R_SQUARED {
        return Err(Error::Fit(format!(
            "R² = {:.6} below {MIN_R_SQUARED} over {} samples",
            fit.r_squared, fit.samples
        )));
    }
    Ok(fit)
}

fn run_experiment(cfg: &TofConfig, fidelity: bool) -> Result<Experiment> {
    let b0 = cfg.background_vec();
    let velocity = predicted_velocity(&cfg.model, &b0);
    cfg.validate(velocity.v)?;
    let profile = cfg.profile_for(&cfg.model)?;
    let ic = initial_condition(cfg, profile, velocity)?;
    let grid = Grid1D::new(cfg.grid_n, cfg.length)?;
    let mut state = GridState1D::init(grid, cfg.model.clone(), b0, &ic, cfg.scheme)?;
    let u_bg = state.background_energy_density()?;
    let e_bg = u_bg * cfg.length;
    let initial = state.evolved().to_vec();
    let e0 = state.energy()?;
    let bg_state = GridState1D::init(grid, cfg.model.clone(), b0, &InitialCondition::Background, cfg.scheme)?;
    let u_bg_cell = bg_state.evolved()[0];

    let t_track = cfg.tracking_time(velocity.v);
    let end_time = if fidelity { cfg.length / velocity.v } else { t_track };
    let solver = SolverConfig {
        cfl: cfg.cfl,
        end_time,
        record_every: cfg.record_every,
        scheme: cfg.scheme,
    };
    let expected_steps = (end_time / state.max_dt(cfg.cfl)).ceil() as usize;
    let stride = (expected_steps / TARGET_SAMPLES).max(1);
    let z = grid.centers();
    let [start, stop] = cfg.window;
    let mut track = Vec::new();
    let mut counter = 0usize;
    let traj = run_with(&mut state, &solver, |s| {
        let k = counter;
        counter += 1;
        if !k.is_multiple_of(stride) || s.time() > t_track {
            return Ok(());
        }
        if let Some(c) = centroid(&z, &s.energy_density()?, u_bg) {
            if (start..=stop).contains(&c) {
                track.push((s.time(), c));
            }
        }
        Ok(())
    })?;
    let e1 = state.energy()?;
    Ok(Experiment {
        velocity,
        fit: gated_fit(&track),
        steps: traj.steps,
        dt: traj.dt,
        mean_newton_iterations: state.mean_newton_iterations(),
        energy_drift: (e1 - e0).abs() / (e0 - e_bg).abs().max(f64::MIN_POSITIVE),
        shape_deviation: fidelity.then(|| relative_l2(state.evolved(), &initial, &u_bg_cell)),
        snapshots: traj.snapshots,
    })
}

/// JSON summary of a time-of-flight run.
#[derive(Clone, Debug, Serialize)]
pub struct TofSummary<'a> {
    pub config: &'a TofConfig,
    pub result: &'a TofResult,
    pub tolerance: f64,
    pub passed: bool,
}

/// One (model, background) row of a discrimination sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: String,
    pub background: [f64; 3],
    /// `None` when the centroid fit was rejected (see `fit_error`).
    pub v_measured: Option<f64>,
    pub v_predicted: f64,
    pub relative_error: Option<f64>,
    pub r_squared: Option<f64>,
    pub fit_error: Option<String>,
    pub shape_deviation: f64,
}

/// Per-background comparison across models.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackgroundSummary {
    pub background: [f64; 3],
    pub coplanar: bool,
    /// `(max v - min v) / mean v` over the accepted fits.
    pub speed_spread: f64,
    /// Rows whose centroid fit was rejected.
    pub rejected_fits: usize,
    /// Largest over smallest shape deviation.
    pub fidelity_ratio: f64,
}

/// Speed spread below which coplanar rows count as indistinguishable.
pub const COPLANAR_SPREAD: f64 = 2e-3;
/// Fidelity ratio above which non-coplanar rows count as discriminating.
pub const FIDELITY_SEPARATION: f64 = 10.0;

impl BackgroundSummary {
    pub fn passed(&self) -> bool {
        if self.coplanar {
            self.rejected_fits == 0 && self.speed_spread <= COPLANAR_SPREAD
        } else {
            self.fidelity_ratio >= FIDELITY_SEPARATION
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<BackgroundSummary>,
}

pub const SWEEP_CSV_HEADER: &str = "model,bx,by,bz,v_measured,v_predicted,relative_error,r_squared,shape_deviation";

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.summaries.iter().all(BackgroundSummary::passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let [bx, by, bz] = r.background;
            let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{bx},{by},{bz},{},{},{},{},{}",
                r.model,
                opt(r.v_measured),
                r.v_predicted,
                opt(r.relative_error),
                opt(r.r_squared),
                r.shape_deviation
            );
        }
        out
    }
}

/// Runs every (model, background) pair with shape tracking over one transit.
///
/// All models must share `λ` (with `κ² = 4λ` for Born-Infeld).
pub fn discrimination_sweep(
    models: &[LagrangianModel],
    backgrounds: &[[f64; 3]],
    template: &TofConfig,
) -> Result<SweepReport> {
    if let Some(first) = models.first() {
        let lambda = first.family_lambda();
        for m in models {
            if (m.family_lambda() - lambda).abs() > 1e-12 * lambda.max(1.0) {
                return Err(Error::invalid(format!(
                    "sweep models must share lambda: {first} has {lambda}, {m} has {}",
                    m.family_lambda()
                )));
            }
        }
    }
    let cases: Vec<(&LagrangianModel, &[f64; 3])> = models
        .iter()
        .flat_map(|m| backgrounds.iter().map(move |b| (m, b)))
        .collect();
    let mut rows = cases
        .par_iter()
        .map(|(m, b)| {
            let exp = run_experiment(&template.with_case((*m).clone(), **b), true)?;
            let v_pred = exp.velocity.v;
            let (fit, fit_error) = match exp.fit {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok(SweepRow {
                model: m.to_string(),
                background: **b,
                v_measured: fit.as_ref().map(|f| f.slope),
                v_predicted: v_pred,
                relative_error: fit.as_ref().map(|f| (f.slope - v_pred) / v_pred),
                r_squared: fit.as_ref().map(|f| f.r_squared),
                fit_error,
                shape_deviation: exp.shape_deviation.unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.background
            .partial_cmp(&b.background)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.model.cmp(&b.model))
    });
    let summaries = backgrounds
        .iter()
        .map(|bg| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.background == *bg).collect();
            let vs: Vec<f64> = group.iter().filter_map(|r| r.v_measured).collect();
            let vmax = vs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let vmin = vs.iter().copied().fold(f64::INFINITY, f64::min);
            let vmean = vs.iter().sum::<f64>() / vs.len() as f64;
            let devs = group.iter().map(|r| r.shape_deviation);
            let dmax = devs.clone().fold(f64::NEG_INFINITY, f64::max);
            let dmin = devs.fold(f64::INFINITY, f64::min);
            BackgroundSummary {
                background: *bg,
                coplanar: bg[1] == 0.0,
                speed_spread: if vs.is_empty() { f64::NAN } else { (vmax - vmin) / vmean },
                rejected_fits: group.len() - vs.len(),
                fidelity_ratio: dmax / dmin,
            }
        })
        .collect();
    Ok(SweepReport { rows, summaries })
}

/// Uniform sample from the ball of radius `bound`.
pub fn sample_ball(rng: &mut impl Rng, bound: f64) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm_squared() <= 1.0 {
            return v * bound;
        }
    }
}

fn check_bound(model: &LagrangianModel, bound: f64) -> Result<()> {
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::invalid(format!("field bound must be positive, got {bound}")));
    }
    match model.safe_field_bound() {
        Some(safe) if bound > safe => Err(Error::BoundOutsideDomain { bound, safe }),
        _ => Ok(()),
    }
}

/// Duality residual `⋆(F∧F) - ⋆(G∧G)` tolerated for invariant models.
pub const DUALITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityScan {
    pub model: String,
    pub points: usize,
    pub bound: f64,
    pub seed: u64,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub expected_invariant: bool,
}

impl DualityScan {
    /// Invariant models stay below the tolerance; others are reported only.
    pub fn passed(&self) -> bool {
        !self.expected_invariant || self.max_abs <= DUALITY_TOLERANCE
    }
}

/// Duality residual statistics over `points` random `(E, B)` with
/// `|E|, |B| ≤ bound`.
pub fn duality_scan(model: &LagrangianModel, points: usize, bound: f64, seed: u64) -> Result<DualityScan> {
    check_bound(model, bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_abs, mut sum) = (0.0f64, 0.0);
    for _ in 0..points {
        let e = sample_ball(&mut rng, bound);
        let b = sample_ball(&mut rng, bound);
        let c = duality_residual(model, &e, &b)?.abs();
        max_abs = max_abs.max(c);
        sum += c;
    }
    Ok(DualityScan {
        model: model.to_string(),
        points,
        bound,
        seed,
        max_abs,
        mean_abs: if points == 0 { 0.0 } else { sum / points as f64 },
        expected_invariant: model.is_duality_invariant(),
    })
}

pub const ROUND_TRIP_TOLERANCE: f64 = 1e-10;
pub const JACOBIAN_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvertCheck {
    pub model: String,
    pub points: usize,
    pub bound: f64,
    pub seed: u64,
    /// `max |E' - E|∞ / max(1, |E|∞)` after `E → D → E'`.
    pub max_round_trip: f64,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    /// Largest relative gap between the analytic and central-difference `∂D/∂E`.
    pub max_jacobian_error: f64,
}

impl InvertCheck {
    pub fn passed(&self) -> bool {
        self.max_round_trip <= ROUND_TRIP_TOLERANCE && self.max_jacobian_error <= JACOBIAN_TOLERANCE
    }
}

/// Round trip `E → D → E` from a cold start and a Jacobian check at each point.
pub fn invert_check(model: &LagrangianModel, points: usize, bound: f64, seed: u64) -> Result<InvertCheck> {
    check_bound(model, bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut out = InvertCheck {
        model: model.to_string(),
        points,
        bound,
        seed,
        max_round_trip: 0.0,
        mean_iterations: 0.0,
        max_iterations: 0,
        max_jacobian_error: 0.0,
    };
    let mut total_iterations = 0usize;
    for _ in 0..points {
        let e = sample_ball(&mut rng, bound);
        let b = sample_ball(&mut rng, bound);
        let d = to_dh(model, &e, &b)?.d;
        let inv = invert_db_counted(model, &d, &b, &Vec3::zeros())?;
        out.max_round_trip = out.max_round_trip.max((inv.e - e).amax() / e.amax().max(1.0));
        total_iterations += inv.iterations;
        out.max_iterations = out.max_iterations.max(inv.iterations);
        let jac = jacobian_d_of_e(model, &e, &b)?;
        for j in 0..3 {
            let mut de = Vec3::zeros();
            de[j] = h;
            let col = (to_dh(model, &(e + de), &b)?.d - to_dh(model, &(e - de), &b)?.d) / (2.0 * h);
            for i in 0..3 {
                let err = (jac[(i, j)] - col[i]).abs() / jac[(i, j)].abs().max(1.0);
                out.max_jacobian_error = out.max_jacobian_error.max(err);
            }
        }
    }
    if points > 0 {
        out.mean_iterations = total_iterations as f64 / points as f64;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values_ignore_comments_and_reject_duplicates() {
        let map = parse_key_values("# header\n a = 1 # trailing\n\nb=two\n").unwrap();
        assert_eq!(map["a"], "1");
        assert_eq!(map["b"], "two");
        assert!(parse_key_values("a = 1\na = 2").is_err());
        assert!(parse_key_values("just words").is_err());
    }

    #[test]
    fn config_round_trip_of_every_key() {
        let text = "\
model.kind = family
model.lambda = 0.25
model.coeffs = -0.1, 0.02
model.c1 = 0.5
background.bx = 1
background.by = 0.7
background.bz = 1
pulse.amplitude = 0.05
pulse.center = 11
pulse.width = 0.9
pulse.init = polarized-y
grid.n = 1024
grid.length = 70
window.start = 13
window.stop = 40
solver.scheme = lax-friedrichs
solver.cfl = 0.4
solver.record_every = 10
check.tolerance = 0.01
output.csv = run.csv
output.json = run.json
seed = 7
sweep.models = duality:0.25, family:0.25:-0.1, bi:1
sweep.backgrounds = 1 0 1; 1 0.7 1
";
        let cfg = TofConfig::parse(text).unwrap();
        assert_eq!(
            cfg.model,
            LagrangianModel::general_family(0.25, vec![-0.1, 0.02]).unwrap().with_constants(0.5, 0.0)
        );
        assert_eq!(cfg.background, [1.0, 0.7, 1.0]);
        assert_eq!(cfg.pulse.amplitude, Some(0.05));
        assert_eq!(cfg.pulse.init, PulseInit::PolarizedY);
        assert_eq!((cfg.grid_n, cfg.length), (1024, 70.0));
        assert_eq!(cfg.window, [13.0, 40.0]);
        assert_eq!(cfg.scheme, Scheme::LaxFriedrichs);
        assert_eq!((cfg.cfl, cfg.record_every, cfg.tolerance, cfg.seed), (0.4, 10, 0.01, 7));
        assert_eq!(cfg.csv, Some(PathBuf::from("run.csv")));
        assert_eq!(cfg.sweep_models.len(), 3);
        assert_eq!(cfg.sweep_models[2], LagrangianModel::born_infeld(1.0).unwrap());
        assert_eq!(cfg.sweep_backgrounds, vec![[1.0, 0.0, 1.0], [1.0, 0.7, 1.0]]);
    }

    #[test]
    fn config_errors() {
        for bad in [
            "model.kind = quantum",
            "grid.n = -3",
            "background.bx = one",
            "unknown.key = 1",
            "sweep.models = family",
            "sweep.backgrounds = 1 0",
            "solver.scheme = rk4",
        ] {
            assert!(matches!(TofConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn window_and_domain_constraints() {
        let cfg = TofConfig::default();
        assert!(cfg.validate(1.0).is_ok());
        let short = TofConfig {
            window: [12.0, 30.0],
            ..cfg.clone()
        };
        assert!(short.validate(1.0).is_err());
        let wraps = TofConfig {
            length: 50.0,
            ..cfg.clone()
        };
        assert!(wraps.validate(1.0).is_err());
        let off_left = TofConfig {
            pulse: PulseSettings {
                center: 5.0,
                ..cfg.pulse.clone()
            },
            ..cfg
        };
        assert!(off_left.validate(1.0).is_err());
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..20).map(|k| (k as f64 * 0.1, 3.0 + 0.7 * k as f64 * 0.1)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!((fit.slope - 0.7).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
        assert!(fit_line(&pts[..2]).is_err());
    }

    #[test]
    fn centroid_of_symmetric_bump() {
        let z: Vec<f64> = (0..101).map(|i| i as f64 * 0.1).collect();
        let u: Vec<f64> = z.iter().map(|z| 2.0 + (-(z - 5.0f64).powi(2)).exp()).collect();
        assert!((centroid(&z, &u, 2.0).unwrap() - 5.0).abs() < 1e-9);
        assert_eq!(centroid(&z, &vec![2.0; 101], 2.0), None);
    }

    #[test]
    fn model_tokens() {
        assert_eq!(parse_model_token("maxwell").unwrap(), LagrangianModel::Maxwell);
        assert_eq!(parse_model_token("duality:0.3").unwrap(), LagrangianModel::duality_family(0.3).unwrap());
        assert_eq!(
            parse_model_token("family:0.25").unwrap(),
            LagrangianModel::general_family(0.25, vec![1.0]).unwrap()
        );
        assert!(parse_model_token("maxwell:1").is_err());
        assert!(parse_model_token("bi:x").is_err());
    }

    #[test]
    fn sweep_requires_shared_lambda() {
        let models = [
            LagrangianModel::duality_family(0.25).unwrap(),
            LagrangianModel::born_infeld(2.0).unwrap(),
        ];
        assert!(discrimination_sweep(&models, &[[1.0, 0.0, 1.0]], &TofConfig::default()).is_err());
        let empty = discrimination_sweep(&[], &[[1.0, 0.0, 1.0]], &TofConfig::default()).unwrap();
        assert!(empty.rows.is_empty());
    }

    #[test]
    fn duality_scan_statistics() {
        let maxwell = duality_scan(&LagrangianModel::Maxwell, 500, 2.0, 1).unwrap();
        assert_eq!(maxwell.max_abs, 0.0);
        let bi = duality_scan(&LagrangianModel::born_infeld(1.0).unwrap(), 500, 0.5, 1).unwrap();
        assert!(bi.max_abs <= DUALITY_TOLERANCE && bi.passed());
        let xi2 = LagrangianModel::general_family(0.25, vec![1.0]).unwrap();
        let scan = duality_scan(&xi2, 500, 0.5, 1).unwrap();
        assert!(scan.max_abs > 1e-3 && scan.passed() && !scan.expected_invariant);
        assert!(matches!(
            duality_scan(&LagrangianModel::born_infeld(1.0).unwrap(), 10, 0.9, 1),
            Err(Error::BoundOutsideDomain { .. })
        ));
    }

    #[test]
    fn scans_are_seed_deterministic() {
        let m = LagrangianModel::duality_family(0.25).unwrap();
        let a = invert_check(&m, 200, 0.5, 9).unwrap();
        let b = invert_check(&m, 200, 0.5, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.passed(), "{a:?}");
        let c = invert_check(&m, 200, 0.5, 10).unwrap();
        assert_ne!(a.max_round_trip, c.max_round_trip);
    }

    #[test]
    fn relative_l2_of_identical_states_is_zero() {
        let a = vec![[1.0, 2.0, 3.0, 4.0]; 8];
        assert_eq!(relative_l2(&a, &a, &[0.0; 4]), 0.0);
        let b: Vec<[f64; 4]> = a.iter().map(|r| r.map(|x| 2.0 * x)).collect();
        assert!((relative_l2(&b, &a, &[0.0; 4]) - 1.0).abs() < 1e-15);
    }
}
