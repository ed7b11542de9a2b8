//! Evolves an exact Born-Infeld pulse on the staggered leapfrog grid and
//! writes plot-ready snapshots.
//!
//! `cargo run --release --example pulse_evolution -- [cells] [out.csv]`

use nled::exact::{velocity_bi, AnsatzSpec, PulseProfile};
use nled::solver::{run, write_snapshots_csv, Grid1D, GridState1D, InitialCondition, Scheme, SolverConfig};
use nled::{LagrangianModel, Vec3};

fn main() -> nled::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1024);
    let out = args.next();

    let b0 = Vec3::new(1.0, 1.0, 1.0);
    let velocity = velocity_bi(1.0, &b0);
    let spec = AnsatzSpec::new(PulseProfile::gaussian(0.1, 16.0, 1.0)?, velocity, b0)?;
    let grid = Grid1D::new(n, 32.0)?;
    let mut state = GridState1D::init(grid, LagrangianModel::born_infeld(1.0)?, b0, &InitialCondition::Ansatz(spec), Scheme::Leapfrog)?;
    println!(
        "characteristic speed bound {:.6}, phase velocity {:.6}",
        state.characteristic_speed(),
        velocity.v
    );

    let config = SolverConfig {
        record_every: 200,
        ..SolverConfig::new(0.5, 32.0 / velocity.v, Scheme::Leapfrog)?
    };
    let traj = run(&mut state, &config)?;
    for d in &traj.diagnostics {
        println!("t = {:8.3}  energy = {:.14}  max|E| = {:.6}", d.t, d.energy, d.max_e);
    }
    println!("{} steps of dt = {:.5}, mean Newton iterations {:.2}", traj.steps, traj.dt, state.mean_newton_iterations());

    if let Some(path) = out {
        write_snapshots_csv(std::io::BufWriter::new(std::fs::File::create(&path)?), &traj.snapshots)?;
        println!("snapshots written to {path}");
    }
    Ok(())
}
