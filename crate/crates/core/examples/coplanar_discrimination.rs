//! Family members with equal λ share the coplanar wave speed; an oblique
//! background separates them through pulse shape.
//!
//! `cargo run --release --example coplanar_discrimination -- [cells]`

use nled::tof::{discrimination_sweep, TofConfig};
use nled::LagrangianModel;

fn main() -> nled::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1024);
    let models = [
        LagrangianModel::born_infeld(1.0)?,
        LagrangianModel::duality_family(0.25)?,
        LagrangianModel::general_family(0.25, vec![-0.1])?,
    ];
    let template = TofConfig {
        grid_n: n,
        ..TofConfig::default()
    };
    let report = discrimination_sweep(&models, &[[1.0, 0.0, 1.0], [1.0, 0.7, 1.0]], &template)?;
    print!("{}", report.to_csv());
    for s in &report.summaries {
        println!(
            "B0 = {:?} ({}): speed spread {:.2e}, shape deviation ratio {:.1}, rejected fits {}",
            s.background,
            if s.coplanar { "coplanar" } else { "oblique" },
            s.speed_spread,
            s.fidelity_ratio,
            s.rejected_fits
        );
    }
    Ok(())
}
