//! Luxemburg norms for `M_j(t) = max(0, t - 1/j)`, the top-`j` sandwich,
//! and the Orlicz upper bound on averaged order statistics.
//!
//! ```text
//! cargo run --example orlicz_norms
//! ```

use orderstat_bounds::family::MapFamily;
use orderstat_bounds::matrix::Matrix;
use orderstat_bounds::orlicz::{
    extreme_point_checks, extreme_points_bmj, luxemburg_norm, mj_function, sandwich_check, top_sum,
    upper_bound_check, DEFAULT_TOL,
};

fn main() -> orderstat_bounds::error::Result<()> {
    let x = [0.5, 2.0, 0.25, 1.0, 0.0];
    for j in 1..=x.len() {
        let norm = luxemburg_norm(&x, &mj_function(j as u64)?, DEFAULT_TOL)?;
        let [lo, hi] = sandwich_check(&x, j, DEFAULT_TOL)?;
        println!(
            "j={j}: ½·top={:.6} <= ‖x‖={norm:.6} <= top={:.6}  [{:?}, {:?}]",
            top_sum(&x, j) / 2.0,
            top_sum(&x, j),
            lo.status,
            hi.status
        );
    }

    let a = Matrix::from_fn(3, 3, |i, j| 1.0 / (1 + i + j) as f64)?;
    let sym3 = MapFamily::symmetric_group(3)?;
    for ell in 1..=3 {
        let r = upper_bound_check(&a, &sym3, ell)?;
        println!("ell={ell}: E S = {:.6} <= {:.6}", r.lhs, r.rhs);
    }

    let points = extreme_points_bmj(2, 3, 1)?;
    println!("\nfirst extreme point for 2x3, ell=1:\n{}", points.get(0).expect("nonempty"));
    let fam = MapFamily::full_mapping(2, 3)?;
    let checks = extreme_point_checks(&fam, 1)?;
    println!("E S on {} extreme points: all equal to 2/N = {:.6}: {}", checks.len(), 2.0 / 3.0, checks.iter().all(|r| r.passed()));
    Ok(())
}
