//! Exact plane waves on a constant magnetic background.
//!
//! The travelling-wave family has Faraday form
//!
//! ```text
//! F = 𝓔(z - vt)(dz - v dt)∧dx - B_x dy∧dz - B_y dz∧dx - B_z dx∧dy + χ𝓔(z - vt) dt∧dz
//! ```
//!
//! which in the slot convention of [`crate::forms4d`] reads
//! `E = (-v𝓔, 0, χ𝓔)`, `B = (B_x, B_y - 𝓔, B_z)`. The wave travels along +z.
//! This module provides the closed-form phase velocities, the pointwise field,
//! finite-difference residuals of `dF = 0` and `d⋆G = 0`, and the
//! grid-refinement test that separates exact solutions from near misses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms4d::{exterior_derivative, FieldPoint, Form, Vec3};
use crate::lagrangian::LagrangianModel;

/// Smooth pulse shape `𝓔(u)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PulseProfile {
    /// `A exp(-(u - u₀)² / 2σ²)`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl PulseProfile {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() || !center.is_finite() {
            return Err(Error::invalid("gaussian pulse needs finite amplitude/center and width > 0"));
        }
        Ok(PulseProfile::Gaussian {
            amplitude,
            center,
            width,
        })
    }

    pub fn value(&self, u: f64) -> f64 {
        match *self {
            PulseProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let s = (u - center) / width;
                amplitude * (-0.5 * s * s).exp()
            }
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            PulseProfile::Gaussian { center, width, .. } => {
                -(u - center) / (width * width) * self.value(u)
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            PulseProfile::Gaussian { amplitude, .. } => amplitude,
        }
    }

    pub fn center(&self) -> f64 {
        match *self {
            PulseProfile::Gaussian { center, .. } => center,
        }
    }

    pub fn width(&self) -> f64 {
        match *self {
            PulseProfile::Gaussian { width, .. } => width,
        }
    }

    /// Half-width of the interval outside which `|𝓔| < 1e-14 |A|`.
    pub fn support_radius(&self) -> f64 {
        10.0 * self.width()
    }
}

/// Phase velocity and longitudinal coefficient of an exact wave.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseVelocity {
    pub v: f64,
    pub chi: f64,
}

/// `v = 1/√(1 + 4λB²)`: background transverse to propagation, E along B.
pub fn velocity_simple(lambda: f64, b: f64) -> f64 {
    1.0 / (1.0 + 4.0 * lambda * b * b).sqrt()
}

/// Background in the (x, z) plane, family member with parameter `λ`.
pub fn velocity_coplanar(lambda: f64, bx: f64, bz: f64) -> PhaseVelocity {
    let longitudinal = 1.0 + 4.0 * lambda * bz * bz;
    let v = (longitudinal / (1.0 + 4.0 * lambda * (bx * bx + bz * bz))).sqrt();
    PhaseVelocity {
        v,
        chi: 4.0 * lambda * bx * bz * v / longitudinal,
    }
}

/// Born-Infeld with an arbitrary background.
pub fn velocity_bi(kappa: f64, b0: &Vec3) -> PhaseVelocity {
    let k2 = kappa * kappa;
    let longitudinal = 1.0 + k2 * b0.z * b0.z;
    let v = (longitudinal / (1.0 + k2 * b0.norm_squared())).sqrt();
    PhaseVelocity {
        v,
        chi: k2 * b0.x * b0.z * v / longitudinal,
    }
}

/// Closed-form prediction for a model on background `b0`.
///
/// Family members with `B_y ≠ 0` get the Born-Infeld formula at `κ² = 4λ`;
/// only the duality-invariant member actually admits that wave, which is
/// what [`verify_exact`] tests.
pub fn predicted_velocity(model: &LagrangianModel, b0: &Vec3) -> PhaseVelocity {
    match model {
        LagrangianModel::Maxwell => PhaseVelocity { v: 1.0, chi: 0.0 },
        LagrangianModel::BornInfeld { kappa } => velocity_bi(*kappa, b0),
        LagrangianModel::Family { lambda, .. } => {
            if b0.y == 0.0 {
                velocity_coplanar(*lambda, b0.x, b0.z)
            } else {
                velocity_bi(2.0 * lambda.sqrt(), b0)
            }
        }
    }
}

/// Parametric travelling-wave solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub profile: PulseProfile,
    pub v: f64,
    pub chi: f64,
    pub background: [f64; 3],
}

impl AnsatzSpec {
    pub fn new(profile: PulseProfile, velocity: PhaseVelocity, background: Vec3) -> Result<Self> {
        if !(velocity.v > 0.0 && velocity.v <= 1.0) {
            return Err(Error::invalid(format!("phase velocity {} outside (0, 1]", velocity.v)));
        }
        if !velocity.chi.is_finite() || background.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("non-finite ansatz parameter"));
        }
        Ok(Self {
            profile,
            v: velocity.v,
            chi: velocity.chi,
            background: background.into(),
        })
    }

    pub fn background(&self) -> Vec3 {
        Vec3::from(self.background)
    }

    /// Lorentz factor of the phase velocity (infinite at `v = 1`).
    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.v * self.v).sqrt()
    }

    pub fn field(&self, t: f64, z: f64) -> FieldPoint {
        ansatz_field(self, t, z)
    }
}

pub fn ansatz_field(spec: &AnsatzSpec, t: f64, z: f64) -> FieldPoint {
    let amp = spec.profile.value(z - spec.v * t);
    let [bx, by, bz] = spec.background;
    FieldPoint {
        e: Vec3::new(-spec.v * amp, 0.0, spec.chi * amp),
        b: Vec3::new(bx, by - amp, bz),
    }
}

/// Components of the 3-forms `dF` and `d⋆G`.
///
/// Ordered as the coefficients of `e⁰¹², e⁰¹³, e⁰²³, e¹²³`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldResidual {
    pub r_f: [f64; 4],
    pub r_g: [f64; 4],
}

impl FieldResidual {
    pub fn max_f(&self) -> f64 {
        self.r_f.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max_g(&self) -> f64 {
        self.r_g.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.max_f().max(self.max_g())
    }
}

const THREE_FORM_MASKS: [u8; 4] = [0b0111, 0b1011, 0b1101, 0b1110];

fn pointwise_forms(model: &LagrangianModel, spec: &AnsatzSpec, t: f64, z: f64) -> Result<(Form, Form)> {
    let f = ansatz_field(spec, t, z).to_two_form();
    let g = model.excitation_form(&f)?;
    Ok((f.to_form(), g.to_form().hodge()))
}

/// Central-difference residuals of `dF = 0` and `d⋆G = 0` at `(t, z)`.
///
/// The ansatz depends on `(t, z)` only, so the x and y partials are zero and
/// the stencil is the five points `(t ± h, z)`, `(t, z ± h)`, `(t, z)`.
pub fn field_equation_residual(
    model: &LagrangianModel,
    spec: &AnsatzSpec,
    t: f64,
    z: f64,
    h: f64,
) -> Result<FieldResidual> {
    if !(h > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    // the centre point is evaluated to surface domain errors there as well
    pointwise_forms(model, spec, t, z)?;
    let (f_tp, g_tp) = pointwise_forms(model, spec, t + h, z)?;
    let (f_tm, g_tm) = pointwise_forms(model, spec, t - h, z)?;
    let (f_zp, g_zp) = pointwise_forms(model, spec, t, z + h)?;
    let (f_zm, g_zm) = pointwise_forms(model, spec, t, z - h)?;
    let inv = 1.0 / (2.0 * h);
    let df = exterior_derivative(&[
        inv * (f_tp - f_tm),
        Form::zero(),
        Form::zero(),
        inv * (f_zp - f_zm),
    ]);
    let dg = exterior_derivative(&[
        inv * (g_tp - g_tm),
        Form::zero(),
        Form::zero(),
        inv * (g_zp - g_zm),
    ]);
    Ok(FieldResidual {
        r_f: THREE_FORM_MASKS.map(|m| df.coeff(m)),
        r_g: THREE_FORM_MASKS.map(|m| dg.coeff(m)),
    })
}

/// Bracketed coefficients of the two reduced field equations for the
/// `B = B_x x̂` geometry, multiplied through by `1 - v²` so that the
/// light-speed limit stays finite.
///
/// At `P = (X, Y) = (-(1 - v²)𝓔² - B², -2Bv𝓔)`:
///
/// ```text
/// c₁ = B v L_XY + (1 - v²) 𝓔 L_XX
/// c₂ = (1 - v²) L_X - 2(1 - v²)² 𝓔² L_XX - 4(1 - v²) v B 𝓔 L_XY - 2 v² B² L_YY
/// ```
///
/// Both vanish for every `𝓔` exactly when `(model, v)` admit the wave.
pub fn dispersion_coefficients(
    model: &LagrangianModel,
    v: f64,
    b: f64,
    amplitude: f64,
) -> Result<(f64, f64)> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::invalid(format!("phase velocity {v} outside (0, 1]")));
    }
    let g2 = 1.0 - v * v;
    let e = amplitude;
    let x = -g2 * e * e - b * b;
    let y = -2.0 * b * v * e;
    let l = model.eval(x, y)?;
    let c1 = b * v * l.l_xy + g2 * e * l.l_xx;
    let c2 = g2 * l.l_x
        - 2.0 * g2 * g2 * e * e * l.l_xx
        - 4.0 * g2 * v * b * e * l.l_xy
        - 2.0 * v * v * b * b * l.l_yy;
    Ok((c1, c2))
}

/// Residual norms at a sequence of finite-difference steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementReport {
    pub steps: Vec<f64>,
    /// `max(|r_F|∞, |r_G|∞)` over all sample points, per step.
    pub norms: Vec<f64>,
    pub max_f: Vec<f64>,
    pub max_g: Vec<f64>,
    /// Least-squares slope of `ln(norm)` against `ln(h)`.
    pub slope: f64,
    /// Richardson-extrapolated (`h → 0`) residual from the two finest steps,
    /// assuming second-order error, max over components and samples.
    pub extrapolated: f64,
}

/// Target order and tolerance for "converges like h²".
pub const EXPECTED_ORDER: f64 = 2.0;
pub const ORDER_TOLERANCE: f64 = 0.1;
/// Residual level treated as exact to round-off.
pub const ROUNDOFF_RESIDUAL: f64 = 1e-10;

impl RefinementReport {
    pub fn converges(&self) -> bool {
        self.norms.iter().all(|n| *n <= ROUNDOFF_RESIDUAL)
            || (self.slope - EXPECTED_ORDER).abs() <= ORDER_TOLERANCE
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn refinement_study(
    model: &LagrangianModel,
    spec: &AnsatzSpec,
    steps: &[f64],
    samples: &[(f64, f64)],
) -> Result<RefinementReport> {
    if steps.len() < 2 || samples.is_empty() {
        return Err(Error::invalid("refinement study needs at least two steps and one sample"));
    }
    let mut per_step: Vec<Vec<FieldResidual>> = Vec::with_capacity(steps.len());
    for &h in steps {
        per_step.push(
            samples
                .iter()
                .map(|&(t, z)| field_equation_residual(model, spec, t, z, h))
                .collect::<Result<_>>()?,
        );
    }
    let max_f: Vec<f64> = per_step
        .iter()
        .map(|rs| rs.iter().fold(0.0f64, |a, r| a.max(r.max_f())))
        .collect();
    let max_g: Vec<f64> = per_step
        .iter()
        .map(|rs| rs.iter().fold(0.0f64, |a, r| a.max(r.max_g())))
        .collect();
    let norms: Vec<f64> = max_f.iter().zip(&max_g).map(|(a, b)| a.max(*b)).collect();
    let slope = fit_slope(
        &steps.iter().map(|h| h.ln()).collect::<Vec<_>>(),
        &norms.iter().map(|n| n.max(1e-300).ln()).collect::<Vec<_>>(),
    );
    let k = steps.len();
    let ratio2 = (steps[k - 2] / steps[k - 1]).powi(2);
    let mut extrapolated: f64 = 0.0;
    for (fine, coarse) in per_step[k - 1].iter().zip(&per_step[k - 2]) {
        let pairs = fine.r_f.iter().zip(&coarse.r_f).chain(fine.r_g.iter().zip(&coarse.r_g));
        for (a, b) in pairs {
            extrapolated = extrapolated.max(((ratio2 * a - b) / (ratio2 - 1.0)).abs());
        }
    }
    Ok(RefinementReport {
        steps: steps.to_vec(),
        norms,
        max_f,
        max_g,
        slope,
        extrapolated,
    })
}

/// Standard residual-test configuration.
pub const STANDARD_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Pulse amplitude `0.1/max(κ, 2√λ)` (0.1 for Maxwell), unit width, centred at 0.
pub fn standard_profile(model: &LagrangianModel) -> PulseProfile {
    let scale = model.coupling_scale();
    let amplitude = if scale > 0.0 { 0.1 / scale } else { 0.1 };
    PulseProfile::Gaussian {
        amplitude,
        center: 0.0,
        width: 1.0,
    }
}

/// Sample points `t = 0`, `z = u₀ + kσ/2` for `k = -6..=6`.
pub fn standard_samples(profile: &PulseProfile) -> Vec<(f64, f64)> {
    (-6..=6)
        .map(|k| (0.0, profile.center() + k as f64 * 0.5 * profile.width()))
        .collect()
}

/// Outcome of checking one (model, background) pair against the ansatz.
#[derive(Clone, Debug, Serialize)]
pub struct ExactCheck {
    pub model: String,
    pub background: [f64; 3],
    pub velocity: PhaseVelocity,
    pub report: RefinementReport,
    /// Extrapolated residual of Born-Infeld at `κ² = 4λ`, same background and
    /// pulse, with its own exact `(v, χ)`.
    pub reference_extrapolated: Option<f64>,
    /// `extrapolated / reference_extrapolated`.
    pub plateau_ratio: Option<f64>,
    pub converges: bool,
}

/// Ratio to the Born-Infeld reference that counts as a residual plateau.
pub const PLATEAU_RATIO: f64 = 1e3;

impl ExactCheck {
    /// Residual stays finite as `h → 0` at the scale-aware threshold.
    pub fn plateaus(&self) -> bool {
        !self.converges && self.plateau_ratio.is_none_or(|r| r >= PLATEAU_RATIO)
    }

    pub fn csv_rows(&self) -> Vec<String> {
        let [bx, by, bz] = self.background;
        self.report
            .steps
            .iter()
            .zip(self.report.max_f.iter().zip(&self.report.max_g))
            .map(|(h, (rf, rg))| {
                format!(
                    "{},{bx},{by},{bz},{},{},{h},{rf:e},{rg:e}",
                    self.model, self.velocity.v, self.velocity.chi
                )
            })
            .collect()
    }
}

pub const RESIDUAL_CSV_HEADER: &str = "model,bx,by,bz,v,chi,h,rf_inf,rg_inf";

/// Refinement test of the predicted wave for `model` on `b0`, with the
/// matched Born-Infeld reference for non-Maxwell models.
pub fn verify_exact(model: &LagrangianModel, b0: &Vec3) -> Result<ExactCheck> {
    verify_exact_with(model, b0, predicted_velocity(model, b0), None)
}

pub fn verify_exact_with(
    model: &LagrangianModel,
    b0: &Vec3,
    velocity: PhaseVelocity,
    profile: Option<PulseProfile>,
) -> Result<ExactCheck> {
    let profile = profile.unwrap_or_else(|| standard_profile(model));
    let spec = AnsatzSpec::new(profile, velocity, *b0)?;
    let samples = standard_samples(&profile);
    let report = refinement_study(model, &spec, &STANDARD_STEPS, &samples)?;
    let lambda = model.family_lambda();
    let reference_extrapolated = if lambda > 0.0 {
        let kappa = 2.0 * lambda.sqrt();
        let bi = LagrangianModel::born_infeld(kappa)?;
        let bi_spec = AnsatzSpec::new(profile, velocity_bi(kappa, b0), *b0)?;
        Some(refinement_study(&bi, &bi_spec, &STANDARD_STEPS, &samples)?.extrapolated)
    } else {
        None
    };
    let plateau_ratio = reference_extrapolated.map(|r| report.extrapolated / r.max(f64::MIN_POSITIVE));
    Ok(ExactCheck {
        model: model.to_string(),
        background: (*b0).into(),
        velocity,
        converges: report.converges(),
        report,
        reference_extrapolated,
        plateau_ratio,
    })
}
