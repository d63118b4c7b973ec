//! Corpus generation, JSON round trip, and byte-stable report output.
//!
//! ```text
//! cargo run --example corpus_reports
//! ```

use orderstat_bounds::campaign::{run_lemmas, CampaignOptions, FamilySpec};
use orderstat_bounds::config::EllRange;
use orderstat_bounds::corpus::{Corpus, CorpusSpec};

fn main() -> orderstat_bounds::error::Result<()> {
    let spec = CorpusSpec::grid(3, 3, 2, 1, 1, 99);
    let corpus = spec.generate();
    let json = corpus.to_json();
    let back = Corpus::from_json_str(&json)?;
    assert_eq!(back, corpus);
    println!("{} matrices, {} bytes of corpus JSON", corpus.len(), json.len());
    println!("first: {} =\n{}", corpus.matrices[0].id, corpus.matrices[0].matrix);

    let opts = CampaignOptions { ell: Some(EllRange { lo: 1, hi: 2 }), ..CampaignOptions::default() };
    let first = run_lemmas(&back, &[FamilySpec::Sym], &opts)?;
    let second = run_lemmas(&spec.generate(), &[FamilySpec::Sym], &opts)?;
    assert_eq!(first.to_json(), second.to_json());
    let csv = first.to_csv();
    println!("{} reports; CSV header: {}", first.reports.len(), csv.lines().next().unwrap_or(""));
    Ok(())
}
