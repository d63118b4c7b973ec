//! Exact hitting-probability, anti-concentration and averaging checks on
//! one matrix.
//!
//! ```text
//! cargo run --example lemma_suite
//! ```

use orderstat_bounds::family::MapFamily;
use orderstat_bounds::lemmas::{lemma_suite, paley_zygmund_check, EmpiricalDistribution, LemmaContext};
use orderstat_bounds::matrix::Matrix;
use orderstat_bounds::report::{Inputs, ReportSet};

fn main() -> orderstat_bounds::error::Result<()> {
    let identity = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]])?;
    let sym2 = MapFamily::symmetric_group(2)?;
    let ctx = LemmaContext::new(&identity, &sym2, Inputs::default())?;
    for r in ctx.first_hit() {
        println!("{:<24} m={:?} lhs={} rhs={} margin={:e}", r.check_id, r.inputs.m, r.lhs, r.rhs, r.margin);
    }

    let a = Matrix::from_fn(3, 4, |i, j| ((i + 2 * j) % 5) as f64)?;
    let fam = MapFamily::full_mapping(3, 4)?;
    let mut set = ReportSet::new();
    for ell in 1..=3 {
        set.reports.extend(lemma_suite(&a, &fam, ell)?);
    }
    print!("\n{}", set.summary_text());

    let z = EmpiricalDistribution::from_values(&[0.0, 0.0, 1.0, 3.0])?;
    let pz = paley_zygmund_check(&z, 0.5)?;
    println!("\nPaley-Zygmund at θ = 0.5: P(Z > θ E Z) = {} >= {}", pz.lhs, pz.rhs);
    Ok(())
}
