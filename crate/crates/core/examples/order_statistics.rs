//! Exact and Monte Carlo expectations of `Σ_{k<=ell} kmax_i a[i][g(i)]`.
//!
//! ```text
//! cargo run --release --example order_statistics
//! ```

use orderstat_bounds::family::MapFamily;
use orderstat_bounds::matrix::Matrix;
use orderstat_bounds::orderstat::{expectation_exact, expectation_mc, kmax_profile};

fn main() -> orderstat_bounds::error::Result<()> {
    let a = Matrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 11) as f64 / 10.0)?;
    let fam = MapFamily::full_mapping(5, 5)?;

    let profile = kmax_profile(&a, &fam)?;
    println!("E kmax, k = 1..5: {profile:.6?}");

    for ell in 1..=3 {
        let exact = expectation_exact(&a, &fam, ell)?;
        let mc = expectation_mc(&a, &fam, ell, 100_000, 42)?;
        let se = mc.stderr.unwrap_or(0.0);
        println!(
            "ell={ell}: exact {:.6}  mc {:.6} ± {:.6}  (|diff| = {:.2} se)",
            exact.value,
            mc.value,
            se,
            (mc.value - exact.value).abs() / se
        );
        println!("        bounds: {:.6} <= E <= {:.6}", a.top_sum(ell * 5) / 5.0 / 288.0, 2.0 * a.top_sum(ell * 5) / 5.0);
    }

    // the same seed reproduces the estimate bit for bit
    let again = expectation_mc(&a, &fam, 2, 100_000, 42)?;
    assert_eq!(again, expectation_mc(&a, &fam, 2, 100_000, 42)?);
    Ok(())
}
