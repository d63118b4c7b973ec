//! The two-sided order-statistic campaign over a seeded corpus.
//!
//! ```text
//! cargo run --release --example main_campaign
//! ```

use orderstat_bounds::campaign::{run_verify_main, CampaignOptions, FamilySpec};
use orderstat_bounds::corpus::CorpusSpec;

fn main() -> orderstat_bounds::error::Result<()> {
    let corpus = CorpusSpec::grid(4, 4, 20, 5, 5, 2024).generate();
    let set = run_verify_main(&corpus, &[FamilySpec::Sym, FamilySpec::Map], &CampaignOptions::default())?;
    print!("{}", set.summary_text());
    for c in &set.certificates {
        println!("{:<10} C_G = {:<6} lower constant = {:.3e}", c.family, c.c_g_exact, orderstat_bounds::campaign::lower_constant(c.c_g));
    }
    println!("all passed: {}", set.all_passed());
    Ok(())
}
