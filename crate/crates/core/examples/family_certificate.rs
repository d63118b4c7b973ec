//! Marginal and pair-probability certificates for map families.
//!
//! ```text
//! cargo run --example family_certificate
//! ```

use orderstat_bounds::family::MapFamily;
use orderstat_bounds::report::certificate_to_json;

fn main() -> orderstat_bounds::error::Result<()> {
    let families = [
        MapFamily::symmetric_group(4)?,
        MapFamily::full_mapping(3, 4)?,
        // cyclic shifts: uniform marginals, but pairs are strongly correlated
        MapFamily::explicit(3, 3, (0..3).map(|s| (0..3).map(|i| (i + s) % 3).collect()).collect())?,
        // not uniform: the first point always goes to 1
        MapFamily::explicit(2, 2, vec![vec![0, 0], vec![0, 1]])?,
    ];
    for fam in &families {
        let cert = fam.certificate();
        println!(
            "{:<16} uniform={:<5} C_G={} ({:.4})",
            fam.descriptor(),
            cert.marginals_uniform,
            cert.c_g_exact,
            cert.c_g
        );
    }
    println!("\n{}", certificate_to_json(&families[0].certificate()));

    if let Err(e) = families[3].require_uniform_marginals() {
        println!("rejected: {e}");
    }
    Ok(())
}
