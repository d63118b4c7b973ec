//! Seeded test-matrix corpora.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, MatrixFile};
use crate::numeric::sub_seed;

pub const DEFAULT_SEED: u64 = 0x05B0_2024;
pub const DEFAULT_SPARSE_DENSITY: f64 = 0.3;

/// How matrix entries are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryDistribution {
    /// Independent uniform `[0, 1)`.
    Uniform,
    /// Independent integers in `0..=9`.
    IntegerGrid,
    /// Uniform `[0, 1)` with probability `density`, zero otherwise.
    Sparse { density: f64 },
}

impl EntryDistribution {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::IntegerGrid => "integer",
            Self::Sparse { .. } => "sparse",
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            Self::Uniform => rng.random::<f64>(),
            Self::IntegerGrid => rng.random_range(0..=9u32) as f64,
            Self::Sparse { density } => {
                if rng.random::<f64>() < density {
                    rng.random::<f64>()
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sparse { density } => write!(f, "sparse:{density}"),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "integer" => Ok(Self::IntegerGrid),
            "sparse" => Ok(Self::Sparse { density: DEFAULT_SPARSE_DENSITY }),
            _ => match s.strip_prefix("sparse:").map(str::parse::<f64>) {
                Some(Ok(density)) if (0.0..=1.0).contains(&density) => Ok(Self::Sparse { density }),
                _ => Err(Error::Parse(format!("unknown entry distribution {s:?}"))),
            },
        }
    }
}

/// Generation recipe: for every `(n, N)` cell, `count` matrices of each
/// listed distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub dims: Vec<(usize, usize)>,
    pub variants: Vec<(EntryDistribution, usize)>,
    pub seed: u64,
}

impl CorpusSpec {
    /// All `(n, N)` in `{1..5}^2`; 50 uniform, 10 integer, 10 sparse per cell.
    pub fn default_desk() -> Self {
        Self::grid(5, 5, 50, 10, 10, DEFAULT_SEED)
    }

    /// Cells `1..=max_n` by `1..=max_cols` with the given counts per variant.
    pub fn grid(
        max_n: usize,
        max_cols: usize,
        uniform: usize,
        integer: usize,
        sparse: usize,
        seed: u64,
    ) -> Self {
        let dims = (1..=max_n).flat_map(|n| (1..=max_cols).map(move |c| (n, c))).collect();
        Self {
            dims,
            variants: vec![
                (EntryDistribution::Uniform, uniform),
                (EntryDistribution::IntegerGrid, integer),
                (EntryDistribution::Sparse { density: DEFAULT_SPARSE_DENSITY }, sparse),
            ],
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn generate(&self) -> Corpus {
        let mut matrices = Vec::new();
        for (cell, &(n, cols)) in self.dims.iter().enumerate() {
            for (v, (dist, count)) in self.variants.iter().enumerate() {
                for i in 0..*count {
                    let key = ((cell as u64) << 40) | ((v as u64) << 32) | i as u64;
                    let mut rng = Xoshiro256PlusPlus::seed_from_u64(sub_seed(self.seed, key));
                    let matrix = Matrix::from_fn(n, cols, |_, _| dist.draw(&mut rng))
                        .expect("positive dimensions and finite entries");
                    matrices.push(CorpusMatrix {
                        id: format!("{n}x{cols}/{}/{i:03}", dist.tag()),
                        matrix,
                    });
                }
            }
        }
        Corpus { seed: Some(self.seed), matrices }
    }
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self::default_desk()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMatrix {
    pub id: String,
    pub matrix: Matrix,
}

/// A list of identified matrices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub seed: Option<u64>,
    pub matrices: Vec<CorpusMatrix>,
}

#[derive(Serialize, Deserialize)]
struct CorpusEntry {
    id: String,
    #[serde(flatten)]
    matrix: MatrixFile,
}

#[derive(Serialize, Deserialize)]
struct CorpusFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    matrices: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn single(id: impl Into<String>, matrix: Matrix) -> Self {
        Self { seed: None, matrices: vec![CorpusMatrix { id: id.into(), matrix }] }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Distinct `(n, N)` shapes in first-seen order.
    pub fn shapes(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for m in &self.matrices {
            let s = (m.matrix.rows(), m.matrix.cols());
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    pub fn of_shape(&self, n: usize, cols: usize) -> impl Iterator<Item = &CorpusMatrix> {
        self.matrices.iter().filter(move |m| m.matrix.rows() == n && m.matrix.cols() == cols)
    }

    pub fn to_json(&self) -> String {
        let file = CorpusFile {
            seed: self.seed,
            matrices: self
                .matrices
                .iter()
                .map(|m| CorpusEntry { id: m.id.clone(), matrix: m.matrix.to_file() })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("corpus serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: CorpusFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("corpus: {e}")))?;
        let matrices = file
            .matrices
            .into_iter()
            .map(|e| {
                let id = e.id;
                e.matrix
                    .into_matrix()
                    .map(|matrix| CorpusMatrix { id: id.clone(), matrix })
                    .map_err(|err| Error::Parse(format!("corpus entry {id}: {err}")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { seed: file.seed, matrices })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_corpus_shape() {
        let c = CorpusSpec::default_desk().generate();
        assert_eq!(c.len(), 25 * 70);
        assert_eq!(c.shapes().len(), 25);
        assert_eq!(c.of_shape(3, 4).count(), 70);
        let ints = c.matrices.iter().filter(|m| m.id.contains("/integer/"));
        for m in ints {
            assert!(m.matrix.entries().iter().all(|&x| x.fract() == 0.0 && (0.0..=9.0).contains(&x)));
        }
    }

    #[test]
    fn generation_is_deterministic_and_seed_sensitive() {
        let spec = CorpusSpec::grid(3, 3, 2, 1, 1, 7);
        assert_eq!(spec.generate(), spec.generate());
        assert_ne!(spec.generate(), spec.clone().with_seed(8).generate());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let c = CorpusSpec::grid(2, 3, 2, 1, 1, 11).generate();
        let back = Corpus::from_json_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), c.to_json());
    }

    #[test]
    fn parse_distributions() {
        assert_eq!("uniform".parse::<EntryDistribution>().unwrap(), EntryDistribution::Uniform);
        assert_eq!(
            "sparse:0.5".parse::<EntryDistribution>().unwrap(),
            EntryDistribution::Sparse { density: 0.5 }
        );
        assert!("sparse:2".parse::<EntryDistribution>().is_err());
        assert!("gauss".parse::<EntryDistribution>().is_err());
    }

    #[test]
    fn rejects_bad_entries() {
        let bad = r#"{"matrices":[{"id":"x","rows":1,"cols":2,"entries":[[1.0]]}]}"#;
        assert!(matches!(Corpus::from_json_str(bad), Err(Error::Parse(_))));
    }
}
