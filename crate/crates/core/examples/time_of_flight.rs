//! Pulse transit speed through a magnetised vacuum from the energy centroid.
//!
//! `cargo run --release --example time_of_flight -- [cells]`

use nled::tof::{measure_tof, TofConfig};
use nled::LagrangianModel;

fn main() -> nled::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2048);
    let runs = [
        (LagrangianModel::Maxwell, [1.0, 0.0, 0.0]),
        (LagrangianModel::duality_family(0.25)?, [1.0, 0.0, 0.0]),
        (LagrangianModel::duality_family(0.25)?, [1.0, 0.0, 1.0]),
        (LagrangianModel::born_infeld(1.0)?, [1.0, 1.0, 1.0]),
    ];
    for (model, background) in runs {
        let cfg = TofConfig {
            model,
            background,
            grid_n: n,
            ..TofConfig::default()
        };
        let r = measure_tof(&cfg)?;
        println!(
            "{:>22} B0 = {:?}: v = {:.6} (predicted {:.6}, {:+.1e}), R^2 = {:.8}, {} samples, {} steps",
            r.model, r.background, r.v_measured, r.v_predicted, r.relative_error, r.fit.r_squared, r.fit.samples, r.steps
        );
    }
    Ok(())
}
