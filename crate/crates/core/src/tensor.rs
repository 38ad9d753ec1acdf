//! Row-major tensor contraction along one axis.

use std::ops::Mul;

use num_complex::Complex64 as C64;

/// Applies the `rows × shape[axis]` matrix `mat` (row-major) along `axis`.
/// Returns the new data and shape (with `shape[axis]` replaced by `rows`).
pub fn apply_along_axis<M>(
    data: &[C64],
    shape: &[usize],
    axis: usize,
    mat: &[M],
    rows: usize,
) -> (Vec<C64>, Vec<usize>)
where
    M: Copy,
    C64: Mul<M, Output = C64>,
{
    let cols = shape[axis];
    debug_assert_eq!(mat.len(), rows * cols);
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![C64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        let src = &data[o * cols * inner..(o + 1) * cols * inner];
        let dst = &mut out[o * rows * inner..(o + 1) * rows * inner];
        for r in 0..rows {
            let mrow = &mat[r * cols..(r + 1) * cols];
            let drow = &mut dst[r * inner..(r + 1) * inner];
            for (c, &m) in mrow.iter().enumerate() {
                let s = &src[c * inner..(c + 1) * inner];
                for (d, &v) in drow.iter_mut().zip(s) {
                    *d += v * m;
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = rows;
    (out, new_shape)
}

/// Decodes a flat row-major index into per-axis indices.
pub fn unravel(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for axis in (0..shape.len()).rev() {
        out[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contracts_middle_axis() {
        // shape (2, 3, 2), contract axis 1 with a 1×3 summing row.
        let data: Vec<C64> = (0..12).map(|v| C64::new(v as f64, 0.0)).collect();
        let (out, shape) = apply_along_axis(&data, &[2, 3, 2], 1, &[1.0, 1.0, 1.0], 1);
        assert_eq!(shape, vec![2, 1, 2]);
        let re: Vec<f64> = out.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![6.0, 9.0, 24.0, 27.0]);
    }

    #[test]
    fn unravel_round_trip() {
        let shape = [3, 4, 5];
        let mut idx = [0; 3];
        unravel(37, &shape, &mut idx);
        assert_eq!(idx, [1, 3, 2]);
    }
}
