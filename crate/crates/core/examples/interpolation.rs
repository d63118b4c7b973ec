//! K-functional of `(ℓ1, ℓ∞)`, its average over a family, the `(1 - 1/p, p)`
//! interpolation norm, and the two-sided `ℓ_p` path estimate.
//!
//! ```text
//! cargo run --example interpolation
//! ```

use orderstat_bounds::family::MapFamily;
use orderstat_bounds::interpolation::{
    interpolation_norm, k_functional, k_functional_mixed, lp_expectation, lp_two_term_bound, mixed_interpolation_norm,
    mixed_k_curve, verify_lp_bounds,
};
use orderstat_bounds::matrix::Matrix;
use orderstat_bounds::report::Inputs;

fn main() -> orderstat_bounds::error::Result<()> {
    let x = [3.0, -1.0, 0.5];
    for t in [0.0, 0.5, 1.0, 1.5, 2.5, 4.0] {
        println!("K(x, {t}) = {}", k_functional(&x, t)?);
    }
    for p in [1.5, 2.0, 3.0] {
        let single = interpolation_norm(&[2.0, 0.0, 0.0], p)?;
        let closed = 2.0 * (p / (p - 1.0)).powf(1.0 / p);
        println!("p={p}: ‖(2,0,0)‖ = {single:.12} (closed form {closed:.12}), ‖x‖ = {:.6}", interpolation_norm(&x, p)?);
    }

    let a = Matrix::from_rows(&[[0.9, 0.1, 0.3], [0.2, 0.6, 0.0], [0.4, 0.4, 0.7]])?;
    let fam = MapFamily::symmetric_group(3)?;
    let curve = mixed_k_curve(&a, &fam)?;
    println!("\nmixed K slopes {:.4?}", curve.slopes());
    println!("mixed K(1.5): curve {:.6}, direct {:.6}", curve.eval(1.5)?, k_functional_mixed(&a, &fam, 1.5)?);

    for p in [1.0, 1.5, 2.0, 3.0] {
        let e = lp_expectation(&a, &fam, p)?;
        let b = lp_two_term_bound(&a, p)?;
        print!("p={p}: E‖a(g)‖_p = {e:.6}, bound {:.6} + {:.6}, ratio {:.4}", b.head, b.tail, e / b.value());
        if p > 1.0 {
            print!(", mixed (θ,p) norm {:.6}", mixed_interpolation_norm(&a, &fam, p)?);
        }
        println!();
        for r in verify_lp_bounds(&a, &fam, p, Inputs::default(), None)? {
            assert!(r.passed(), "{}", r.check_id);
        }
    }
    Ok(())
}
