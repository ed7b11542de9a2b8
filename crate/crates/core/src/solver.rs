//! Time-domain evolution of fields that depend on `(t, z)` only.
//!
//! With `∂_x = ∂_y = 0` the field equations reduce to
//!
//! ```text
//! ∂_t D_x = -∂_z H_y     ∂_t B_x = +∂_z E_y
//! ∂_t D_y = +∂_z H_x     ∂_t B_y = -∂_z E_x
//! ```
//!
//! while `D_z` and `B_z` are constant in space and time (they are stored as
//! scalars). The evolved state is `U = (D_x, D_y, B_x, B_y)`; each flux
//! evaluation recovers `E` from `(D, B)` by Newton inversion and then `H` from
//! `(E, B)`. A longitudinal `E_z` appears wherever the nonlinear constitutive
//! relation needs it to keep `D_z` fixed.
//!
//! Two schemes are provided. `Leapfrog` keeps a full copy of `U` on cell
//! centres (primary lattice) and on cell faces (dual lattice) and advances them
//! with a kick-drift-kick split: each lattice is updated from the other's
//! fluxes only, so the scheme is explicit, second order and time reversible.
//! `LaxFriedrichs` is the first-order collocated scheme with global
//! Lax-Friedrichs dissipation, kept as an independent cross-check.

use nalgebra::linalg::Schur;
use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{invert_db_counted, to_dh};
use crate::error::{Error, Result};
use crate::exact::{AnsatzSpec, PulseProfile};
use crate::forms4d::{invariants, FieldPoint, Vec3};
use crate::lagrangian::LagrangianModel;

/// Uniform periodic grid of `n` cells on `[0, length)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    length: f64,
}

impl Grid1D {
    pub const MIN_CELLS: usize = 16;

    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::invalid(format!("grid needs at least {} cells, got {n}", Self::MIN_CELLS)));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!("grid length must be positive, got {length}")));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dz(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dz()
    }

    pub fn face(&self, i: usize) -> f64 {
        i as f64 * self.dz()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Leapfrog,
    LaxFriedrichs,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub cfl: f64,
    pub end_time: f64,
    /// Snapshot cadence in steps; 0 records only the first and last state.
    pub record_every: usize,
    pub scheme: Scheme,
}

impl SolverConfig {
    pub fn new(cfl: f64, end_time: f64, scheme: Scheme) -> Result<Self> {
        let cfg = Self {
            cfl,
            end_time,
            record_every: 0,
            scheme,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::invalid(format!("CFL number must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(Error::invalid(format!("end time must be >= 0, got {}", self.end_time)));
        }
        Ok(())
    }
}

/// Initial data for [`GridState1D::init`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    /// Uniform background, no pulse.
    Background,
    /// Exact travelling wave evaluated at `t = 0`.
    Ansatz(AnsatzSpec),
    /// Cold start: `E = p 𝓔(z)` and `B = B₀ + ẑ × E` (the vacuum light-wave
    /// pairing), with `p` a unit vector transverse to `z`.
    Polarized {
        profile: PulseProfile,
        polarization: Vec3,
    },
}

#[derive(Clone, Debug)]
struct Lattice {
    u: Vec<[f64; 4]>,
    e: Vec<Vec3>,
    flux: Vec<[f64; 4]>,
    iterations: Vec<u32>,
}

impl Lattice {
    fn new(n: usize) -> Self {
        Self {
            u: vec![[0.0; 4]; n],
            e: vec![Vec3::zeros(); n],
            flux: vec![[0.0; 4]; n],
            iterations: vec![0; n],
        }
    }
}

/// Field values of one primary cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellFields {
    pub z: f64,
    pub d: Vec3,
    pub b: Vec3,
    /// Electric field from the latest inversion.
    pub e: Vec3,
}

/// Discretised state of the `(t, z)` reduction.
#[derive(Clone, Debug)]
pub struct GridState1D {
    grid: Grid1D,
    model: LagrangianModel,
    background: Vec3,
    scheme: Scheme,
    d_z: f64,
    b_z: f64,
    t: f64,
    primary: Lattice,
    dual: Option<Lattice>,
    primary_fresh: bool,
    char_speed: f64,
    newton_iterations: u64,
    inversions: u64,
}

fn point_fields(ic: &InitialCondition, background: &Vec3, z: f64) -> FieldPoint {
    match ic {
        InitialCondition::Background => FieldPoint::new(Vec3::zeros(), *background),
        InitialCondition::Ansatz(spec) => spec.field(0.0, z),
        InitialCondition::Polarized {
            profile,
            polarization,
        } => {
            let e = polarization * profile.value(z);
            FieldPoint::new(e, background + Vec3::z().cross(&e))
        }
    }
}

/// Flux `Φ` with `∂_t U = ∂_z Φ`, plus the inverted `E` and Newton count.
fn cell_flux(
    model: &LagrangianModel,
    u: &[f64; 4],
    d_z: f64,
    b_z: f64,
    guess: &Vec3,
) -> Result<([f64; 4], Vec3, usize)> {
    let d = Vec3::new(u[0], u[1], d_z);
    let b = Vec3::new(u[2], u[3], b_z);
    let inv = invert_db_counted(model, &d, &b, guess)?;
    let e = inv.e;
    let h = to_dh(model, &e, &b)?.h;
    Ok(([-h.y, h.x, e.y, -e.x], e, inv.iterations))
}

/// Characteristic speeds of the linearised `(t, z)` system about the uniform
/// state `E = 0`, `B = B₀`, sorted ascending.
pub fn characteristic_speeds(model: &LagrangianModel, background: &Vec3) -> Result<Vec<f64>> {
    let d_bg = to_dh(model, &Vec3::zeros(), background)?.d;
    let u0 = [d_bg.x, d_bg.y, background.x, background.y];
    let h = 1e-6;
    let mut jac = Matrix4::<f64>::zeros();
    for k in 0..4 {
        let mut up = u0;
        let mut um = u0;
        up[k] += h;
        um[k] -= h;
        let (fp, _, _) = cell_flux(model, &up, d_bg.z, background.z, &Vec3::zeros())?;
        let (fm, _, _) = cell_flux(model, &um, d_bg.z, background.z, &Vec3::zeros())?;
        for i in 0..4 {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let mut speeds = Vec::with_capacity(4);
    for (re, im) in eigenvalues(&jac)? {
        if im.abs() > 1e-6 * re.abs().max(1.0) {
            return Err(Error::NotHyperbolic { imag: im });
        }
        speeds.push(-re);
    }
    speeds.sort_by(|a, b| a.total_cmp(b));
    Ok(speeds)
}

/// Eigenvalues as `(re, im)` pairs.
///
/// The unshifted QR iteration can stall on the off-diagonal block structure of
/// these Jacobians, so shifted copies `J + sI` are tried in turn.
fn eigenvalues(jac: &Matrix4<f64>) -> Result<Vec<(f64, f64)>> {
    for shift in [0.0, 0.3, -0.6, 1.3] {
        let m = jac + Matrix4::identity() * shift;
        if let Some(schur) = Schur::try_new(m, 1e-14, 10_000) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| (z.re - shift, z.im)).collect());
        }
    }
    Err(Error::NoConvergence {
        iterations: 10_000,
        residual: f64::NAN,
        cell: None,
    })
}

impl GridState1D {
    /// Builds the state from initial data; `D` comes from the constitutive map.
    ///
    /// `B_z` and `D_z` are fixed to their background values. For a cold start
    /// whose pointwise `D_z` differs, the inversion supplies the `E_z` that
    /// restores it.
    pub fn init(
        grid: Grid1D,
        model: LagrangianModel,
        background: Vec3,
        ic: &InitialCondition,
        scheme: Scheme,
    ) -> Result<Self> {
        match ic {
            InitialCondition::Ansatz(spec) => {
                if (spec.background() - background).amax() > 0.0 {
                    return Err(Error::invalid("ansatz background differs from the grid background"));
                }
                check_support(&grid, &spec.profile)?;
            }
            InitialCondition::Polarized {
                profile,
                polarization,
            } => {
                if polarization.z != 0.0 || (polarization.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid("polarization must be a unit vector transverse to z"));
                }
                check_support(&grid, profile)?;
            }
            InitialCondition::Background => {}
        }
        Self::from_fn(grid, model, background, scheme, |z| point_fields(ic, &background, z))
    }

    /// Builds the state from an arbitrary field profile `z ↦ (E, B)`.
    pub fn from_fn(
        grid: Grid1D,
        model: LagrangianModel,
        background: Vec3,
        scheme: Scheme,
        fields: impl Fn(f64) -> FieldPoint,
    ) -> Result<Self> {
        let speeds = characteristic_speeds(&model, &background)?;
        let char_speed = speeds.iter().fold(1.0f64, |a, s| a.max(s.abs()));
        let d_z = to_dh(&model, &Vec3::zeros(), &background)?.d.z;
        let fill = |position: &dyn Fn(usize) -> f64| -> Result<Lattice> {
            let mut lat = Lattice::new(grid.n());
            for i in 0..grid.n() {
                let fp = fields(position(i));
                if (fp.b.z - background.z).abs() > 1e-12 * background.z.abs().max(1.0) {
                    return Err(Error::invalid("B_z must equal the background value everywhere"));
                }
                let d = to_dh(&model, &fp.e, &fp.b)?.d;
                lat.u[i] = [d.x, d.y, fp.b.x, fp.b.y];
                lat.e[i] = fp.e;
            }
            Ok(lat)
        };
        let primary = fill(&|i| grid.center(i))?;
        let dual = match scheme {
            Scheme::Leapfrog => Some(fill(&|i| grid.face(i))?),
            Scheme::LaxFriedrichs => None,
        };
        let mut state = Self {
            grid,
            model,
            background,
            scheme,
            d_z,
            b_z: background.z,
            t: 0.0,
            primary,
            dual,
            primary_fresh: false,
            char_speed,
            newton_iterations: 0,
            inversions: 0,
        };
        state.refresh_primary()?;
        Ok(state)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn model(&self) -> &LagrangianModel {
        &self.model
    }

    pub fn background(&self) -> Vec3 {
        self.background
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Conserved longitudinal excitation `D_z`.
    pub fn d_z(&self) -> f64 {
        self.d_z
    }

    pub fn b_z(&self) -> f64 {
        self.b_z
    }

    /// Speed bound used for the CFL condition: `max(1, |linearised speeds|)`.
    pub fn characteristic_speed(&self) -> f64 {
        self.char_speed
    }

    /// Largest stable step for the given CFL number.
    pub fn max_dt(&self, cfl: f64) -> f64 {
        cfl * self.grid.dz() / self.char_speed
    }

    /// Evolved variables `(D_x, D_y, B_x, B_y)` on the primary cells.
    pub fn evolved(&self) -> &[[f64; 4]] {
        &self.primary.u
    }

    pub fn cell(&self, i: usize) -> CellFields {
        let u = &self.primary.u[i];
        CellFields {
            z: self.grid.center(i),
            d: Vec3::new(u[0], u[1], self.d_z),
            b: Vec3::new(u[2], u[3], self.b_z),
            e: self.primary.e[i],
        }
    }

    /// Mean Newton iterations per inversion so far.
    pub fn mean_newton_iterations(&self) -> f64 {
        if self.inversions == 0 {
            0.0
        } else {
            self.newton_iterations as f64 / self.inversions as f64
        }
    }

    fn compute_flux(&mut self, which_dual: bool) -> Result<()> {
        let (model, d_z, b_z) = (&self.model, self.d_z, self.b_z);
        let lat = if which_dual {
            self.dual.as_mut().expect("dual lattice exists for leapfrog")
        } else {
            &mut self.primary
        };
        lat.u
            .par_iter()
            .zip(lat.e.par_iter_mut())
            .zip(lat.flux.par_iter_mut())
            .zip(lat.iterations.par_iter_mut())
            .enumerate()
            .with_min_len(256)
            .try_for_each(|(i, (((u, e), flux), iters))| {
                let (f, e_new, n) = cell_flux(model, u, d_z, b_z, e).map_err(|err| err.with_cell(i))?;
                *flux = f;
                *e = e_new;
                *iters = n as u32;
                Ok::<(), Error>(())
            })?;
        self.newton_iterations += lat.iterations.iter().map(|&n| n as u64).sum::<u64>();
        self.inversions += lat.u.len() as u64;
        Ok(())
    }

    fn refresh_primary(&mut self) -> Result<()> {
        if !self.primary_fresh {
            self.compute_flux(false)?;
            self.primary_fresh = true;
        }
        Ok(())
    }

    fn check_cfl(&self, dt: f64) -> Result<()> {
        let ratio = dt.abs() * self.char_speed / self.grid.dz();
        if ratio > 1.0 + 1e-12 {
            return Err(Error::CflViolation { ratio });
        }
        Ok(())
    }

    /// Advances by `dt` (negative steps run the leapfrog scheme backwards).
    pub fn step(&mut self, dt: f64) -> Result<()> {
        self.check_cfl(dt)?;
        match self.scheme {
            Scheme::Leapfrog => self.step_leapfrog(dt)?,
            Scheme::LaxFriedrichs => self.step_lax_friedrichs(dt)?,
        }
        self.t += dt;
        Ok(())
    }

    fn step_leapfrog(&mut self, dt: f64) -> Result<()> {
        let n = self.grid.n();
        let r = dt / self.grid.dz();
        self.refresh_primary()?;
        // dual face i sits between primary cells i-1 and i
        let kick = |dual: &mut Lattice, pflux: &[[f64; 4]]| {
            for i in 0..n {
                let im = if i == 0 { n - 1 } else { i - 1 };
                for k in 0..4 {
                    dual.u[i][k] += 0.5 * r * (pflux[i][k] - pflux[im][k]);
                }
            }
        };
        {
            let dual = self.dual.as_mut().expect("dual lattice exists for leapfrog");
            kick(dual, &self.primary.flux);
        }
        self.compute_flux(true)?;
        {
            let dflux = &self.dual.as_ref().expect("dual lattice").flux;
            for i in 0..n {
                let ip = if i + 1 == n { 0 } else { i + 1 };
                for k in 0..4 {
                    self.primary.u[i][k] += r * (dflux[ip][k] - dflux[i][k]);
                }
            }
        }
        self.primary_fresh = false;
        self.refresh_primary()?;
        let dual = self.dual.as_mut().expect("dual lattice exists for leapfrog");
        kick(dual, &self.primary.flux);
        Ok(())
    }

    fn step_lax_friedrichs(&mut self, dt: f64) -> Result<()> {
        let n = self.grid.n();
        let r = dt / self.grid.dz();
        let diss = 0.5 * self.char_speed * dt.abs() / self.grid.dz();
        self.refresh_primary()?;
        let u = &self.primary.u;
        let f = &self.primary.flux;
        let next: Vec<[f64; 4]> = (0..n)
            .map(|i| {
                let im = if i == 0 { n - 1 } else { i - 1 };
                let ip = if i + 1 == n { 0 } else { i + 1 };
                std::array::from_fn(|k| {
                    u[i][k]
                        + 0.5 * r * (f[ip][k] - f[im][k])
                        + diss * (u[ip][k] - 2.0 * u[i][k] + u[im][k])
                })
            })
            .collect();
        self.primary.u = next;
        self.primary_fresh = false;
        self.refresh_primary()
    }

    fn density(&self, e: &Vec3, d: &Vec3, b: &Vec3) -> Result<f64> {
        let (x, y) = invariants(e, b);
        Ok(e.dot(d) - self.model.lagrangian(x, y)?)
    }

    /// Energy density `u = E·D - L` on the primary cells.
    pub fn energy_density(&self) -> Result<Vec<f64>> {
        self.lattice_density(&self.primary, self.primary_fresh)
    }

    fn lattice_density(&self, lat: &Lattice, fresh: bool) -> Result<Vec<f64>> {
        lat.u
            .iter()
            .zip(&lat.e)
            .map(|(u, e_cached)| {
                let d = Vec3::new(u[0], u[1], self.d_z);
                let b = Vec3::new(u[2], u[3], self.b_z);
                let e = if fresh {
                    *e_cached
                } else {
                    invert_db_counted(&self.model, &d, &b, e_cached)?.e
                };
                self.density(&e, &d, &b)
            })
            .collect()
    }

    /// Analytic energy density of the uniform background state.
    pub fn background_energy_density(&self) -> Result<f64> {
        let e = Vec3::zeros();
        let b = self.background;
        let d = to_dh(&self.model, &e, &b)?.d;
        self.density(&e, &d, &b)
    }

    /// Total energy `∫ u dz`; the leapfrog value averages both lattices.
    pub fn energy(&self) -> Result<f64> {
        let dz = self.grid.dz();
        let primary: f64 = self.energy_density()?.iter().sum();
        match &self.dual {
            Some(dual) => {
                let dual_sum: f64 = self.lattice_density(dual, false)?.iter().sum();
                Ok(0.5 * dz * (primary + dual_sum))
            }
            None => Ok(dz * primary),
        }
    }

    pub fn max_abs_e(&self) -> f64 {
        self.primary.e.iter().fold(0.0, |a, e| a.max(e.norm()))
    }

    pub fn snapshot(&self) -> Result<Snapshot> {
        Ok(Snapshot {
            t: self.t,
            z: self.grid.centers(),
            u: self.primary.u.clone(),
            e: self.primary.e.clone(),
            energy_density: self.energy_density()?,
        })
    }
}

fn check_support(grid: &Grid1D, profile: &PulseProfile) -> Result<()> {
    let (c, r) = (profile.center(), profile.support_radius());
    if c - r < 0.0 || c + r > grid.length() {
        return Err(Error::invalid(format!(
            "pulse support [{}, {}] does not fit in the domain [0, {}]",
            c - r,
            c + r,
            grid.length()
        )));
    }
    Ok(())
}

/// Primary-lattice fields at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub z: Vec<f64>,
    pub u: Vec<[f64; 4]>,
    pub e: Vec<Vec3>,
    pub energy_density: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub t: f64,
    pub energy: f64,
    pub max_e: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostic>,
    pub steps: usize,
    pub dt: f64,
}

pub const SNAPSHOT_CSV_HEADER: &str = "t,z,D_x,D_y,B_x,B_y,E_x,E_y,E_z,energy_density";

pub fn write_snapshots_csv(mut out: impl std::io::Write, snapshots: &[Snapshot]) -> std::io::Result<()> {
    writeln!(out, "{SNAPSHOT_CSV_HEADER}")?;
    for s in snapshots {
        for i in 0..s.z.len() {
            let [dx, dy, bx, by] = s.u[i];
            let e = s.e[i];
            writeln!(
                out,
                "{},{},{dx},{dy},{bx},{by},{},{},{},{}",
                s.t, s.z[i], e.x, e.y, e.z, s.energy_density[i]
            )?;
        }
    }
    Ok(())
}

/// Runs to `config.end_time`, recording snapshots and diagnostics.
pub fn run(state: &mut GridState1D, config: &SolverConfig) -> Result<Trajectory> {
    run_with(state, config, |_| Ok(()))
}

/// Like [`run`], calling `observer` on the initial state and after every step.
pub fn run_with(
    state: &mut GridState1D,
    config: &SolverConfig,
    mut observer: impl FnMut(&GridState1D) -> Result<()>,
) -> Result<Trajectory> {
    config.validate()?;
    if config.scheme != state.scheme {
        return Err(Error::invalid("solver config scheme differs from the state's scheme"));
    }
    let max_dt = state.max_dt(config.cfl);
    let steps = (config.end_time / max_dt).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { config.end_time / steps as f64 };
    let mut traj = Trajectory {
        steps,
        dt,
        ..Default::default()
    };
    let record = |state: &GridState1D, traj: &mut Trajectory| -> Result<()> {
        traj.snapshots.push(state.snapshot()?);
        traj.diagnostics.push(Diagnostic {
            t: state.time(),
            energy: state.energy()?,
            max_e: state.max_abs_e(),
        });
        Ok(())
    };
    record(state, &mut traj)?;
    observer(state)?;
    for k in 1..=steps {
        state.step(dt)?;
        observer(state)?;
        let on_cadence = config.record_every > 0 && k % config.record_every == 0;
        if on_cadence || k == steps {
            record(state, &mut traj)?;
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{velocity_bi, PhaseVelocity};

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(n, 16.0).unwrap()
    }

    fn models() -> Vec<LagrangianModel> {
        vec![
            LagrangianModel::Maxwell,
            LagrangianModel::born_infeld(1.0).unwrap(),
            LagrangianModel::duality_family(0.25).unwrap(),
            LagrangianModel::general_family(0.25, vec![-0.1]).unwrap(),
        ]
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(8, 1.0).is_err());
        assert!(Grid1D::new(16, 0.0).is_err());
        let g = Grid1D::new(16, 4.0).unwrap();
        assert_eq!(g.dz(), 0.25);
        assert_eq!(g.center(0), 0.125);
        assert_eq!(g.face(3), 0.75);
    }

    #[test]
    fn constant_states_are_fixed_points() {
        let b0 = Vec3::new(0.8, -0.3, 0.5);
        for scheme in [Scheme::Leapfrog, Scheme::LaxFriedrichs] {
            for model in models() {
                let mut s = GridState1D::init(grid(32), model.clone(), b0, &InitialCondition::Background, scheme).unwrap();
                let before = s.evolved().to_vec();
                let dt = s.max_dt(0.5);
                for _ in 0..10 {
                    s.step(dt).unwrap();
                }
                for (a, b) in s.evolved().iter().zip(&before) {
                    for k in 0..4 {
                        assert!((a[k] - b[k]).abs() <= 1e-15, "{model} {scheme:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let spec = crate::exact::AnsatzSpec::new(
            PulseProfile::gaussian(0.1, 8.0, 0.6).unwrap(),
            velocity_bi(1.0, &Vec3::new(1.0, 1.0, 1.0)),
            Vec3::new(1.0, 1.0, 1.0),
        )
        .unwrap();
        for scheme in [Scheme::Leapfrog, Scheme::LaxFriedrichs] {
            let model = LagrangianModel::born_infeld(1.0).unwrap();
            let mut s = GridState1D::init(grid(128), model, spec.background(), &InitialCondition::Ansatz(spec), scheme).unwrap();
            let before = s.evolved().to_vec();
            s.step(0.0).unwrap();
            assert_eq!(s.evolved(), &before[..]);
            assert_eq!(s.time(), 0.0);
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let mut s = GridState1D::init(grid(32), LagrangianModel::Maxwell, Vec3::zeros(), &InitialCondition::Background, Scheme::Leapfrog).unwrap();
        let dz = s.grid().dz();
        assert!(matches!(s.step(1.5 * dz), Err(Error::CflViolation { .. })));
        assert!(s.step(dz).is_ok());
    }

    #[test]
    fn ill_posed_background_is_rejected() {
        // ξ/2 + 0.1ξ² at B = (1, 0, 1) has an imaginary characteristic speed
        let m = LagrangianModel::general_family(0.25, vec![0.1]).unwrap();
        let err = GridState1D::init(grid(32), m, Vec3::new(1.0, 0.0, 1.0), &InitialCondition::Background, Scheme::Leapfrog).unwrap_err();
        assert!(matches!(err, Error::NotHyperbolic { .. }));
    }

    #[test]
    fn characteristic_speeds_of_born_infeld_are_degenerate() {
        let b0 = Vec3::new(1.0, 0.7, 1.0);
        let speeds = characteristic_speeds(&LagrangianModel::born_infeld(1.0).unwrap(), &b0).unwrap();
        let v = velocity_bi(1.0, &b0).v;
        for (s, expect) in speeds.iter().zip([-v, -v, v, v]) {
            assert!((s - expect).abs() < 1e-6, "{speeds:?}");
        }
        let maxwell = characteristic_speeds(&LagrangianModel::Maxwell, &b0).unwrap();
        assert!(maxwell.iter().all(|s| (s.abs() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn ansatz_background_must_match() {
        let spec = crate::exact::AnsatzSpec::new(
            PulseProfile::gaussian(0.1, 8.0, 0.5).unwrap(),
            PhaseVelocity { v: 1.0, chi: 0.0 },
            Vec3::new(1.0, 0.0, 0.0),
        )
        .unwrap();
        let r = GridState1D::init(grid(64), LagrangianModel::Maxwell, Vec3::zeros(), &InitialCondition::Ansatz(spec), Scheme::Leapfrog);
        assert!(r.is_err());
    }

    #[test]
    fn pulse_must_fit_in_domain() {
        let ic = InitialCondition::Polarized {
            profile: PulseProfile::gaussian(0.1, 2.0, 0.5).unwrap(),
            polarization: Vec3::x(),
        };
        assert!(GridState1D::init(grid(64), LagrangianModel::Maxwell, Vec3::zeros(), &ic, Scheme::Leapfrog).is_err());
        let bad_pol = InitialCondition::Polarized {
            profile: PulseProfile::gaussian(0.1, 8.0, 0.5).unwrap(),
            polarization: Vec3::z(),
        };
        assert!(GridState1D::init(grid(64), LagrangianModel::Maxwell, Vec3::zeros(), &bad_pol, Scheme::Leapfrog).is_err());
    }

    #[test]
    fn run_to_time_zero_records_initial_state() {
        let ic = InitialCondition::Polarized {
            profile: PulseProfile::gaussian(0.1, 8.0, 0.5).unwrap(),
            polarization: Vec3::y(),
        };
        let mut s = GridState1D::init(grid(64), LagrangianModel::Maxwell, Vec3::zeros(), &ic, Scheme::Leapfrog).unwrap();
        let initial = s.snapshot().unwrap();
        let cfg = SolverConfig::new(0.5, 0.0, Scheme::Leapfrog).unwrap();
        let traj = run(&mut s, &cfg).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0], initial);
        assert_eq!(traj.steps, 0);
    }

    #[test]
    fn snapshot_csv_layout() {
        let mut s = GridState1D::init(grid(16), LagrangianModel::Maxwell, Vec3::zeros(), &InitialCondition::Background, Scheme::Leapfrog).unwrap();
        let traj = run(&mut s, &SolverConfig::new(0.5, 0.5, Scheme::Leapfrog).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_snapshots_csv(&mut buf, &traj.snapshots).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SNAPSHOT_CSV_HEADER);
        assert_eq!(lines.len(), 1 + 16 * traj.snapshots.len());
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 10));
    }
}
