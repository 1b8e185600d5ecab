//! Integrate one trapped orbit, report its turning points against the analytic
//! roots and the drift of the energy constraint, and write the trajectory.
//!
//! ```text
//! cargo run --release --example trapped_orbit -- [out.csv]
//! ```

use std::fs::File;
use std::io::BufWriter;

use vlasov_shell::geodesics::{integrate_orbit_with, OrbitOptions};
use vlasov_shell::potential::{ParameterPoint, Schwarzschild};

fn main() -> vlasov_shell::Result<()> {
    let sch = Schwarzschild::new(1.0)?;
    let point = ParameterPoint::new(0.97, 15.0)?;
    let roots = sch.roots(point);
    let (r1, r2) = (roots.r1().unwrap(), roots.r2().unwrap());
    let opts = OrbitOptions {
        tau_max: 5000.0,
        step: 1e-3,
        stride: 500,
    };
    let traj = integrate_orbit_with(&sch, point, 10.0, 1.0, opts)?;

    println!("analytic turning points: r1 = {r1:.9}, r2 = {r2:.9}");
    println!(
        "integrated range:        [{:.9}, {:.9}]",
        traj.r_min, traj.r_max
    );
    println!("turning points passed:   {}", traj.turning_points.len());
    println!("termination:             {}", traj.termination.as_str());
    println!(
        "max |E^2 - E_l - w^2|:   {:.3e}",
        traj.max_conservation_error
    );

    if let Some(path) = std::env::args().nth(1) {
        traj.write_csv(BufWriter::new(File::create(&path)?))?;
        println!("wrote {} samples to {path}", traj.samples.len());
    }
    Ok(())
}
