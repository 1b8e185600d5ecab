//! Classify a handful of (E, l) pairs and cross-check each label against an
//! integrated geodesic.
//!
//! ```text
//! cargo run --release --example classify_orbits
//! ```

use vlasov_shell::geodesics::{verify_geodesic, OrbitOptions};
use vlasov_shell::potential::{ParameterPoint, Schwarzschild};

fn main() -> vlasov_shell::Result<()> {
    let sch = Schwarzschild::new(1.0)?;
    let ell_c = 14.0;
    let crit = sch
        .critical_radii(ell_c)
        .expect("l above 12 M^2 has two critical radii");
    let e_circ = sch.extremal_energies(ell_c).expect("same").e_sq_min.sqrt();
    let cases = [
        (0.97, 15.0, 10.0, false),
        (0.97, 15.0, 3.0, false),
        (1.01, 20.0, 100.0, true),
        (1.05, 10.0, 20.0, true),
        (e_circ, ell_c, crit.r_min, false),
    ];
    for e in [0.95, 0.97, 1.0] {
        let b = sch.l_bounds(e)?;
        println!(
            "E = {e:<5} l_lb = {:.6}  l_ub = {}",
            b.lower,
            b.upper
                .map(|u| format!("{u:.6}"))
                .unwrap_or_else(|| "none".into())
        );
    }
    println!();
    let opts = OrbitOptions {
        tau_max: 2e4,
        step: 5e-3,
        stride: 1000,
    };
    for (e, ell, r, inward) in cases {
        let point = ParameterPoint::new(e, ell)?;
        let roots: Vec<String> = sch
            .roots(point)
            .roots()
            .iter()
            .map(|x| format!("{:.4}", x.r))
            .collect();
        let class = sch.classify_orbit(point, r, inward)?;
        let check = verify_geodesic(&sch, point, r, class, opts)?;
        println!(
            "E={e:<8.6} l={ell:<5} r={r:<8.4} region={:<10} roots=[{}]\n    -> {class}  (integration agrees: {}; {})",
            format!("{:?}", sch.region(point)),
            roots.join(", "),
            check.agrees,
            check.detail
        );
    }
    Ok(())
}
