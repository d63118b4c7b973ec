//! The `ℓ_p` path campaign: upper bound, `p = 1` identity, and the
//! smallest observed lower ratio.
//!
//! ```text
//! cargo run --release --example lp_campaign
//! ```

use orderstat_bounds::campaign::{run_verify_lp, CampaignOptions, FamilySpec};
use orderstat_bounds::corpus::CorpusSpec;

fn main() -> orderstat_bounds::error::Result<()> {
    let corpus = CorpusSpec::grid(4, 4, 20, 5, 5, 7).generate();
    let opts = CampaignOptions { p: vec![1.0, 1.25, 2.0, 4.0, 8.0], ..CampaignOptions::default() };
    let set = run_verify_lp(&corpus, &[FamilySpec::Map], &opts)?;
    print!("{}", set.summary_text());
    Ok(())
}
