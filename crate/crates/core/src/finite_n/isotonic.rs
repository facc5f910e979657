//! Weighted least-squares projection onto nonincreasing vectors.

use crate::error::{Error, Result};

/// Pool-adjacent-violators: the nonincreasing `y` minimizing
/// `sum_i w_i (y_i - v_i)^2`.
pub fn isotonic_project(v: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if v.len() != weights.len() {
        return Err(Error::InvalidParams("isotonic weights must match the vector length".into()));
    }
    if let Some(&w) = weights.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::Domain {
            name: "weight",
            value: w,
            expected: "> 0",
        });
    }
    // (level, total weight, block length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(v.len());
    for (&x, &w) in v.iter().zip(weights) {
        blocks.push((x, w, 1));
        while blocks.len() > 1 {
            let (l2, w2, n2) = blocks[blocks.len() - 1];
            let (l1, w1, n1) = blocks[blocks.len() - 2];
            if l1 >= l2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((l1 * w1 + l2 * w2) / (w1 + w2), w1 + w2, n1 + n2));
        }
    }
    Ok(blocks
        .into_iter()
        .flat_map(|(l, _, n)| std::iter::repeat(l).take(n))
        .collect())
}
