use num_complex::Complex;

use crate::scalar::Real;

/// Element stride and extent of `axis` in a row-major layout.
fn stride(dims: &[usize], axis: usize) -> (usize, usize) {
    (dims[axis + 1..].iter().product(), dims[axis])
}

/// Forward differences along every axis; the last difference along each
/// axis is zero (replicate boundary). Returns one component per axis.
pub fn gradient<T: Real>(x: &[Complex<T>], dims: &[usize]) -> Vec<Vec<Complex<T>>> {
    (0..dims.len())
        .map(|axis| {
            let (s, n) = stride(dims, axis);
            let mut g = vec![Complex::default(); x.len()];
            for block in (0..x.len()).step_by(s * n) {
                for k in 0..n.saturating_sub(1) {
                    let at = block + k * s;
                    for i in at..at + s {
                        g[i] = x[i + s] - x[i];
                    }
                }
            }
            g
        })
        .collect()
}

/// Negative adjoint of [`gradient`].
pub fn divergence<T: Real>(field: &[Vec<Complex<T>>], dims: &[usize]) -> Vec<Complex<T>> {
    let len: usize = dims.iter().product();
    let mut out = vec![Complex::<T>::default(); len];
    for (axis, v) in field.iter().enumerate() {
        let (s, n) = stride(dims, axis);
        for block in (0..len).step_by(s * n) {
            for k in 0..n.saturating_sub(1) {
                let at = block + k * s;
                for i in at..at + s {
                    out[i] = out[i] + v[i];
                    out[i + s] = out[i + s] - v[i];
                }
            }
        }
    }
    out
}

/// Isotropic total variation `Σ_i sqrt(Σ_d |∂_d x_i|²)`.
pub fn tv_norm<T: Real>(x: &[Complex<T>], dims: &[usize]) -> T {
    let g = gradient(x, dims);
    (0..x.len())
        .map(|i| g.iter().map(|c| c[i].norm_sqr()).sum::<T>().sqrt())
        .sum()
}
