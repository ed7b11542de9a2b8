//! Travelling waves on a magnetised background checked by grid refinement.
//!
//! The field-equation residual of the ansatz falls as h² where it is an exact
//! solution and levels off where it is not.

use nled::exact::{predicted_velocity, verify_exact, RESIDUAL_CSV_HEADER};
use nled::{LagrangianModel, Vec3};

fn main() -> nled::Result<()> {
    let cases = [
        (LagrangianModel::duality_family(0.25)?, Vec3::new(1.0, 0.0, 1.0)),
        (LagrangianModel::general_family(0.25, vec![1.0])?, Vec3::new(1.0, 0.0, 1.0)),
        (LagrangianModel::born_infeld(1.0)?, Vec3::new(1.0, 1.0, 1.0)),
        (LagrangianModel::general_family(0.25, vec![1.0])?, Vec3::new(1.0, 0.7, 1.0)),
    ];
    println!("{RESIDUAL_CSV_HEADER}");
    let mut summary = Vec::new();
    for (model, b0) in &cases {
        let check = verify_exact(model, b0)?;
        for row in check.csv_rows() {
            println!("{row}");
        }
        let pv = predicted_velocity(model, b0);
        summary.push(format!(
            "{model:>32} on {:?}: v = {:.6}, chi = {:.6}, slope {:.3}, extrapolated {:.2e} -> {}",
            b0.as_slice(),
            pv.v,
            pv.chi,
            check.report.slope,
            check.report.extrapolated,
            if check.converges { "exact" } else { "plateau" }
        ));
    }
    println!();
    for line in summary {
        println!("{line}");
    }
    Ok(())
}
