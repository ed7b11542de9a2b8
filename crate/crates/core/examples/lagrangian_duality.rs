//! Lagrangians L(X, Y), their derivatives and the duality residual.
//!
//! Born-Infeld and the duality-invariant member of the λ-family coincide at
//! κ² = 4λ; a polynomial profile with the same λ does not.

use nled::lagrangian::{duality_residual, duality_rotate};
use nled::tof::duality_scan;
use nled::{LagrangianModel, TwoForm, Vec3};

fn main() -> nled::Result<()> {
    let bi = LagrangianModel::born_infeld(1.0)?;
    let dual = LagrangianModel::duality_family(0.25)?;
    let xi2 = LagrangianModel::general_family(0.25, vec![1.0])?;

    let (x, y) = (0.2, -0.3);
    for m in [&LagrangianModel::Maxwell, &bi, &dual, &xi2] {
        let d = m.eval(x, y)?;
        println!("{m:>30}: L = {:+.12}  L_X = {:+.12}  L_Y = {:+.12}", d.l, d.l_x, d.l_y);
    }

    let e = Vec3::new(0.2, 0.4, -0.1);
    let b = Vec3::new(-0.3, 0.1, 0.35);
    println!("\nduality residual at one point:");
    for m in [&bi, &dual, &xi2] {
        println!("  {m:>30}: {:+.3e}", duality_residual(m, &e, &b)?);
    }

    // a finite rotation of (F, *G) is again a Born-Infeld pair
    let f = TwoForm::from_eb(&e, &b);
    let star_g = bi.excitation_form(&f)?.hodge();
    let (f2, star_g2) = duality_rotate(&f, &star_g, 0.7);
    let mismatch = (bi.excitation_form(&f2)?.hodge() - star_g2).max_abs();
    println!("\nBorn-Infeld pair after a 0.7 rad rotation: mismatch {mismatch:.2e}");

    println!("\nrandom scans, |E|, |B| <= 0.5, 10^4 points:");
    for m in [LagrangianModel::Maxwell, bi, xi2] {
        let s = duality_scan(&m, 10_000, 0.5, 1)?;
        println!("  {:>30}: max |C| = {:.3e}, mean |C| = {:.3e}", s.model, s.max_abs, s.mean_abs);
    }
    Ok(())
}
