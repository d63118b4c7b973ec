//! Decreasing rearrangement, the order map `h`, and the averaged matrix.
//!
//! ```text
//! cargo run --example rearrangement
//! ```

use orderstat_bounds::matrix::{averaged_matrix, indicator_matrix, kmax, keep_top, order_map, Matrix};

fn main() -> orderstat_bounds::error::Result<()> {
    let a = Matrix::from_rows(&[[0.9, -0.2, 0.4], [0.1, 0.7, 0.4], [0.3, 0.0, 0.8]])?;
    println!("a (absolute values):\n{a}");
    println!("s = {:?}", a.rearrangement());
    println!("Σ s(j), j <= 3 = {}", a.top_sum(3));

    let h = order_map(&a);
    for (r, (i, j)) in h.positions().iter().enumerate().take(4) {
        println!("h({}) = ({}, {})", r + 1, i + 1, j + 1);
    }

    let ell = 1;
    println!("averaged over blocks of N (ell = {ell}):\n{}", averaged_matrix(&a, &h, ell)?);
    println!("indicator of the top 3:\n{}", indicator_matrix(&h, 3)?);
    println!("top 3 kept:\n{}", keep_top(&a, &h, 3)?);

    let row: Vec<f64> = a.row(1).to_vec();
    println!("2-max of row 2 = {}", kmax(&row, 2)?);
    Ok(())
}
