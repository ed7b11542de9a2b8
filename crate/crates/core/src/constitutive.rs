//! The map `(E, B) ↦ (D, H)` induced by `G = 2(L_X F - L_Y ⋆F)` and its
//! inversion `(D, B) ↦ E` by damped Newton iteration.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::forms4d::{invariants, TwoForm, Vec3};
use crate::lagrangian::LagrangianModel;

/// Electric and magnetic blocks of the excitation form `G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Excitation {
    pub d: Vec3,
    pub h: Vec3,
}

/// `D = 2(L_X E + L_Y B)`, `H = 2(L_X B - L_Y E)`.
pub fn to_dh(model: &LagrangianModel, e: &Vec3, b: &Vec3) -> Result<Excitation> {
    let (x, y) = invariants(e, b);
    let l = model.eval(x, y)?;
    Ok(Excitation {
        d: (e * l.l_x + b * l.l_y) * 2.0,
        h: (b * l.l_x - e * l.l_y) * 2.0,
    })
}

/// Same map, routed through the exterior algebra: build `F`, form `G`, decompose.
pub fn to_dh_via_forms(model: &LagrangianModel, e: &Vec3, b: &Vec3) -> Result<Excitation> {
    let g = model.excitation_form(&TwoForm::from_eb(e, b))?;
    let (d, h) = g.to_eb();
    Ok(Excitation { d, h })
}

/// `∂D/∂E` at fixed `B`; symmetric, equal to the Hessian of `L` in `E`.
pub fn jacobian_d_of_e(model: &LagrangianModel, e: &Vec3, b: &Vec3) -> Result<Matrix3<f64>> {
    let (x, y) = invariants(e, b);
    let l = model.eval(x, y)?;
    let u = e * l.l_xx + b * l.l_xy;
    let w = e * l.l_xy + b * l.l_yy;
    Ok(Matrix3::identity() * (2.0 * l.l_x) + (u * e.transpose() + w * b.transpose()) * 4.0)
}

pub const MAX_NEWTON_ITERATIONS: usize = 50;
pub const MAX_HALVINGS: usize = 40;

/// Converged inversion together with the number of Newton steps taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inversion {
    pub e: Vec3,
    pub iterations: usize,
}

/// Stopping tolerance on `|D(E) - D|∞`.
pub fn inversion_tolerance(d: &Vec3) -> f64 {
    1e-12 * d.amax().max(1.0)
}

/// Outcome of the backtracking search along one Newton direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearch {
    /// Accepted step fraction, `2^-halvings`.
    pub step: f64,
    pub halvings: usize,
    pub residual: f64,
}

/// Halves the step until the trial iterate is inside the model domain and
/// reduces the Euclidean residual norm. `None` when no step is accepted.
pub fn backtrack(
    model: &LagrangianModel,
    target_d: &Vec3,
    b: &Vec3,
    e: &Vec3,
    direction: &Vec3,
    current_residual: f64,
) -> Option<LineSearch> {
    let mut step = 1.0;
    for halvings in 0..=MAX_HALVINGS {
        let trial = e + direction * step;
        if let Ok(ex) = to_dh(model, &trial, b) {
            let r = (ex.d - target_d).norm();
            if r < current_residual {
                return Some(LineSearch {
                    step,
                    halvings,
                    residual: r,
                });
            }
        }
        step *= 0.5;
    }
    None
}

/// Solves `D(E, B) = d` for `E`, starting from `guess`.
pub fn invert_db(model: &LagrangianModel, d: &Vec3, b: &Vec3, guess: &Vec3) -> Result<Vec3> {
    invert_db_counted(model, d, b, guess).map(|inv| inv.e)
}

pub fn invert_db_counted(
    model: &LagrangianModel,
    d: &Vec3,
    b: &Vec3,
    guess: &Vec3,
) -> Result<Inversion> {
    if d.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite field passed to the inversion"));
    }
    let tol = inversion_tolerance(d);
    // warm start, then the Maxwell guess E = D, then E = 0
    let start = [*guess, *d, Vec3::zeros()]
        .into_iter()
        .find_map(|cand| to_dh(model, &cand, b).ok().map(|ex| (cand, ex.d - d)));
    let Some((mut e, mut resid_vec)) = start else {
        let (x, y) = invariants(&Vec3::zeros(), b);
        return Err(Error::Domain {
            what: "no admissible starting point for the inversion",
            x,
            y,
        });
    };
    for iteration in 0..=MAX_NEWTON_ITERATIONS {
        if resid_vec.amax() <= tol {
            return Ok(Inversion {
                e,
                iterations: iteration,
            });
        }
        if iteration == MAX_NEWTON_ITERATIONS {
            break;
        }
        let jac = jacobian_d_of_e(model, &e, b)?;
        let direction = jac
            .lu()
            .solve(&(-resid_vec))
            .ok_or(Error::NoConvergence {
                iterations: iteration,
                residual: resid_vec.amax(),
                cell: None,
            })?;
        let Some(ls) = backtrack(model, d, b, &e, &direction, resid_vec.norm()) else {
            // no decrease available: either stagnated at round-off or stuck
            if to_dh(model, &(e + direction), b).is_err() {
                let (x, y) = invariants(&(e + direction), b);
                return Err(Error::Domain {
                    what: "Newton iterate left the domain after damping",
                    x,
                    y,
                });
            }
            return Err(Error::NoConvergence {
                iterations: iteration,
                residual: resid_vec.amax(),
                cell: None,
            });
        };
        e += direction * ls.step;
        resid_vec = to_dh(model, &e, b)?.d - d;
    }
    Err(Error::NoConvergence {
        iterations: MAX_NEWTON_ITERATIONS,
        residual: resid_vec.amax(),
        cell: None,
    })
}
