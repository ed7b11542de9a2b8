//! Constitutive map (E, B) -> (D, H) and its damped-Newton inverse.

use nled::constitutive::{invert_db_counted, to_dh};
use nled::tof::invert_check;
use nled::{LagrangianModel, Vec3};

fn main() -> nled::Result<()> {
    let model = LagrangianModel::born_infeld(1.0)?;
    let b = Vec3::new(0.6, -0.2, 0.3);
    for scale in [0.1, 0.4, 0.7] {
        let e = Vec3::new(0.8, 0.3, -0.5) * scale;
        let ex = to_dh(&model, &e, &b)?;
        let inv = invert_db_counted(&model, &ex.d, &b, &Vec3::zeros())?;
        println!(
            "|E| = {:.3}: D = {:?}, recovered in {} Newton steps, error {:.1e}",
            e.norm(),
            ex.d.as_slice(),
            inv.iterations,
            (inv.e - e).amax()
        );
    }

    println!();
    for m in [
        LagrangianModel::born_infeld(1.0)?,
        LagrangianModel::duality_family(0.25)?,
        LagrangianModel::general_family(0.25, vec![1.0])?,
    ] {
        let c = invert_check(&m, 1000, 0.5, 42)?;
        println!(
            "{:>30}: round trip {:.1e}, Jacobian vs differences {:.1e}, mean iterations {:.2}",
            c.model, c.max_round_trip, c.max_jacobian_error, c.mean_iterations
        );
    }
    Ok(())
}
