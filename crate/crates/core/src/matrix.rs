//! Nonnegative dense matrices, their decreasing rearrangements, and the
//! canonical ordering map of their entries.
//!
//! Indices are 0-based throughout the library. File formats and printed
//! output use 1-based indices.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};

/// A nonnegative `rows × cols` matrix stored row-major.
///
/// Entries are replaced by their absolute values at construction. The
/// decreasing rearrangement is computed on first use and cached.
#[derive(Clone)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    sorted: OnceLock<Vec<f64>>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, taking absolute values.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return domain(format!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        if entries.len() != rows * cols {
            return domain(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            ));
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite()) {
            return domain(format!("matrix entries must be finite, got {bad}"));
        }
        let entries = entries.into_iter().map(f64::abs).collect();
        Ok(Self { rows, cols, entries, sorted: OnceLock::new() })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut entries = Vec::with_capacity(n * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Parse(format!(
                    "ragged matrix: row {} has {} entries, expected {cols}",
                    i + 1,
                    r.len()
                )));
            }
            entries.extend_from_slice(r);
        }
        Self::new(n, cols, entries)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![1.0; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of entries, `rows * cols`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Entries sorted in nonincreasing order.
    pub fn rearrangement(&self) -> &[f64] {
        self.sorted.get_or_init(|| {
            let mut s = self.entries.clone();
            s.sort_unstable_by(|a, b| b.total_cmp(a));
            s
        })
    }

    /// Sum of the `count` largest entries.
    pub fn top_sum(&self, count: usize) -> f64 {
        let s = self.rearrangement();
        crate::numeric::compensated_sum(s[..count.min(s.len())].iter().copied())
    }

    /// Multiplies every entry by `c` (taken in absolute value).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.entries.iter().map(|x| x * c).collect())
    }

    /// Matrix with rows reordered: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        check_perm(perm, self.rows)?;
        Self::from_fn(self.rows, self.cols, |i, j| self.get(perm[i], j))
    }

    /// Matrix with columns reordered: column `j` of the result is column `perm[j]`.
    pub fn permute_cols(&self, perm: &[usize]) -> Result<Self> {
        check_perm(perm, self.cols)?;
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, perm[j]))
    }

    /// Short content hash of the dimensions and entry bit patterns.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.rows as u64).to_le_bytes());
        hasher.update((self.cols as u64).to_le_bytes());
        for x in &self.entries {
            hasher.update(x.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Parses CSV rows of comma-separated decimals.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let row = record
                .iter()
                .map(|f| parse_entry(f, line + 1))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty matrix".into()));
        }
        Self::from_rows(&rows)
    }

    /// Parses `{"rows": n, "cols": N, "entries": [[...], ...]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix JSON: {e}")))?;
        file.into_matrix()
    }

    /// Loads a matrix from a `.csv` or `.json` file; other extensions are sniffed.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let is_json = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => true,
            Some("csv") => false,
            _ => text.trim_start().starts_with('{'),
        };
        if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_csv_str(&text)
        }
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile {
            rows: self.rows as i64,
            cols: self.cols as i64,
            entries: (0..self.rows).map(|i| self.row(i).to_vec()).collect(),
        }
    }
}

fn check_perm(perm: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return domain(format!("permutation has length {}, expected {len}", perm.len()));
    }
    for &p in perm {
        if p >= len || std::mem::replace(&mut seen[p], true) {
            return domain("not a permutation");
        }
    }
    Ok(())
}

fn parse_entry(field: &str, line: usize) -> Result<f64> {
    let x: f64 = field
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse {field:?} as a number")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("line {line}: non-finite entry {field:?}")));
    }
    Ok(x)
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.entries == other.entries
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("entries", &self.entries)
            .finish()
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:.4}")).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// On-disk JSON form of a matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: i64,
    pub cols: i64,
    pub entries: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn into_matrix(self) -> Result<Matrix> {
        if self.rows <= 0 || self.cols <= 0 {
            return Err(Error::Parse(format!(
                "matrix dimensions must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.entries.len() as i64 != self.rows {
            return Err(Error::Parse(format!(
                "declared {} rows but found {}",
                self.rows,
                self.entries.len()
            )));
        }
        for (i, r) in self.entries.iter().enumerate() {
            if r.len() as i64 != self.cols {
                return Err(Error::Parse(format!(
                    "ragged matrix: row {} has {} entries, expected {}",
                    i + 1,
                    r.len(),
                    self.cols
                )));
            }
        }
        Matrix::from_rows(&self.entries)
    }
}

/// The k-th largest of `|x_i|`, with `k` 1-based.
pub fn kmax(x: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > x.len() {
        return domain(format!("kmax index {k} outside 1..={}", x.len()));
    }
    let mut v: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let (_, kth, _) = v.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    Ok(*kth)
}

/// Decreasing rearrangement of the entries of `m`.
pub fn decreasing_rearrangement(m: &Matrix) -> Vec<f64> {
    m.rearrangement().to_vec()
}

/// A bijection from ranks `0..rows*cols` to matrix positions, listing
/// positions in nonincreasing order of the source entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderMap {
    rows: usize,
    cols: usize,
    positions: Vec<(usize, usize)>,
    ranks: Vec<usize>,
}

impl OrderMap {
    /// Builds an order map from an explicit list of positions.
    pub fn from_positions(rows: usize, cols: usize, positions: Vec<(usize, usize)>) -> Result<Self> {
        if positions.len() != rows * cols {
            return domain(format!(
                "order map needs {} positions, got {}",
                rows * cols,
                positions.len()
            ));
        }
        let mut ranks = vec![usize::MAX; rows * cols];
        for (r, &(i, j)) in positions.iter().enumerate() {
            if i >= rows || j >= cols {
                return domain(format!("position ({i},{j}) outside {rows}x{cols}"));
            }
            let slot = &mut ranks[i * cols + j];
            if *slot != usize::MAX {
                return domain(format!("position ({i},{j}) listed twice"));
            }
            *slot = r;
        }
        Ok(Self { rows, cols, positions, ranks })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Position with 0-based rank `r`.
    #[inline]
    pub fn position(&self, r: usize) -> (usize, usize) {
        self.positions[r]
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    /// 0-based rank of position `(i, j)`.
    #[inline]
    pub fn rank(&self, i: usize, j: usize) -> usize {
        self.ranks[i * self.cols + j]
    }

    /// Whether `m(h(r)) >= m(h(r+1))` for every rank `r`.
    pub fn is_compatible_with(&self, m: &Matrix) -> bool {
        m.rows() == self.rows
            && m.cols() == self.cols
            && self
                .positions
                .windows(2)
                .all(|w| m.get(w[0].0, w[0].1) >= m.get(w[1].0, w[1].1))
    }

    /// Membership in the class of matrices ordered by this map whose entries
    /// vanish beyond rank `top`.
    pub fn admits(&self, m: &Matrix, top: usize) -> bool {
        self.is_compatible_with(m)
            && self.positions[top.min(self.len())..].iter().all(|&(i, j)| m.get(i, j) == 0.0)
    }
}

/// Canonical order map: entries by value descending, ties by `(row, col)` ascending.
pub fn order_map(m: &Matrix) -> OrderMap {
    let cols = m.cols();
    let mut idx: Vec<usize> = (0..m.len()).collect();
    // Stable sort keeps row-major order among equal values.
    idx.sort_by(|&a, &b| m.entries()[b].total_cmp(&m.entries()[a]));
    let positions = idx.into_iter().map(|k| (k / cols, k % cols)).collect();
    OrderMap::from_positions(m.rows(), m.cols(), positions).expect("sorted indices form a bijection")
}

fn check_dims(m: &Matrix, h: &OrderMap) -> Result<()> {
    if m.rows() != h.rows() || m.cols() != h.cols() {
        return domain(format!(
            "order map is {}x{} but matrix is {}x{}",
            h.rows(),
            h.cols(),
            m.rows(),
            m.cols()
        ));
    }
    Ok(())
}

/// Spreads the average of the `ell * cols` entries at ranks `0..ell*cols` of
/// `h` uniformly over those positions; every other entry becomes zero.
pub fn averaged_matrix(m: &Matrix, h: &OrderMap, ell: usize) -> Result<Matrix> {
    check_dims(m, h)?;
    if ell == 0 || ell > m.rows() {
        return domain(format!("ell = {ell} outside 1..={}", m.rows()));
    }
    let top = ell * m.cols();
    let total = crate::numeric::compensated_sum(
        h.positions()[..top].iter().map(|&(i, j)| m.get(i, j)),
    );
    let avg = total / top as f64;
    let mut entries = vec![0.0; m.len()];
    for &(i, j) in &h.positions()[..top] {
        entries[i * m.cols() + j] = avg;
    }
    Matrix::new(m.rows(), m.cols(), entries)
}

/// Zero-one matrix with ones at the positions of ranks `0..count` of `h`.
pub fn indicator_matrix(h: &OrderMap, count: usize) -> Result<Matrix> {
    if count == 0 || count > h.len() {
        return domain(format!("indicator size {count} outside 1..={}", h.len()));
    }
    let mut entries = vec![0.0; h.len()];
    for &(i, j) in &h.positions()[..count] {
        entries[i * h.cols() + j] = 1.0;
    }
    Matrix::new(h.rows(), h.cols(), entries)
}

/// Keeps the entries at ranks `0..count` of `h` and zeroes the rest.
pub fn keep_top(m: &Matrix, h: &OrderMap, count: usize) -> Result<Matrix> {
    check_dims(m, h)?;
    let mut entries = vec![0.0; m.len()];
    for &(i, j) in &h.positions()[..count.min(h.len())] {
        entries[i * m.cols() + j] = m.get(i, j);
    }
    Matrix::new(m.rows(), m.cols(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag2() -> Matrix {
        Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    fn m3122() -> Matrix {
        Matrix::from_rows(&[[3.0, 1.0], [2.0, 2.0]]).unwrap()
    }

    #[test]
    fn rearrangement_examples() {
        assert_eq!(decreasing_rearrangement(&diag2()), vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(decreasing_rearrangement(&m3122()), vec![3.0, 2.0, 2.0, 1.0]);
        assert_eq!(decreasing_rearrangement(&Matrix::zeros(3, 3).unwrap()), vec![0.0; 9]);
    }

    #[test]
    fn construction_takes_absolute_values() {
        let m = Matrix::from_rows(&[[-2.0, 1.0]]).unwrap();
        assert_eq!(m.entries(), &[2.0, 1.0]);
    }

    #[test]
    fn kmax_examples() {
        assert_eq!(kmax(&[3.0, 1.0, 2.0], 2).unwrap(), 2.0);
        for k in 1..=3 {
            assert_eq!(kmax(&[5.0, 5.0, 5.0], k).unwrap(), 5.0);
            assert_eq!(kmax(&[0.0, 0.0, 0.0], k).unwrap(), 0.0);
        }
        assert_eq!(kmax(&[3.0, -7.0, 2.0], 1).unwrap(), 7.0);
        assert!(matches!(kmax(&[1.0], 0), Err(Error::Domain(_))));
        assert!(matches!(kmax(&[1.0], 2), Err(Error::Domain(_))));
    }

    #[test]
    fn order_map_tie_break_is_row_major() {
        let h = order_map(&diag2());
        assert_eq!(h.positions(), &[(0, 0), (1, 1), (0, 1), (1, 0)]);
        let h = order_map(&m3122());
        assert_eq!(h.positions(), &[(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert!(h.is_compatible_with(&m3122()));
        assert_eq!(h.rank(1, 1), 2);
    }

    #[test]
    fn averaged_matrix_examples() {
        let d = diag2();
        assert_eq!(averaged_matrix(&d, &order_map(&d), 1).unwrap(), d);

        let m = m3122();
        let h = order_map(&m);
        let avg = averaged_matrix(&m, &h, 1).unwrap();
        assert_eq!(avg, Matrix::from_rows(&[[2.5, 0.0], [2.5, 0.0]]).unwrap());
        assert!(h.admits(&avg, 2));

        let z = Matrix::zeros(2, 3).unwrap();
        assert_eq!(averaged_matrix(&z, &order_map(&z), 2).unwrap(), z);
        assert!(averaged_matrix(&m, &h, 0).is_err());
        assert!(averaged_matrix(&m, &h, 3).is_err());
    }

    #[test]
    fn indicator_examples() {
        let h = order_map(&m3122());
        assert_eq!(indicator_matrix(&h, 4).unwrap(), Matrix::ones(2, 2).unwrap());
        assert_eq!(
            indicator_matrix(&h, 1).unwrap(),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap()
        );
        assert_eq!(
            indicator_matrix(&h, 2).unwrap(),
            Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap()
        );
        assert!(indicator_matrix(&h, 0).is_err());
        assert!(indicator_matrix(&h, 5).is_err());
    }

    #[test]
    fn keep_top_zeroes_the_tail() {
        let m = m3122();
        let h = order_map(&m);
        let t = keep_top(&m, &h, 2).unwrap();
        assert_eq!(t, Matrix::from_rows(&[[3.0, 0.0], [2.0, 0.0]]).unwrap());
        assert!(h.admits(&t, 2));
        assert!(!h.admits(&m, 2));
    }

    #[test]
    fn csv_and_json_parsing() {
        let m = Matrix::from_csv_str("1, 2\n3,4\n").unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
        assert!(Matrix::from_csv_str("1,2\n3\n").is_err());
        assert!(Matrix::from_csv_str("1,NaN\n").is_err());
        assert!(Matrix::from_csv_str("1,inf\n").is_err());

        let j = Matrix::from_json_str(r#"{"rows":2,"cols":2,"entries":[[1,2],[3,4]]}"#).unwrap();
        assert_eq!(j, m);
        assert!(Matrix::from_json_str(r#"{"rows":-1,"cols":2,"entries":[]}"#).is_err());
        assert!(Matrix::from_json_str(r#"{"rows":2,"cols":2,"entries":[[1,2],[3]]}"#).is_err());
        assert!(Matrix::from_json_str(r#"{"rows":1,"cols":2,"entries":[[1,2],[3,4]]}"#).is_err());
    }

    #[test]
    fn hash_depends_on_content() {
        assert_eq!(diag2().content_hash(), diag2().content_hash());
        assert_ne!(diag2().content_hash(), m3122().content_hash());
        assert_eq!(diag2().content_hash().len(), 16);
    }
}
