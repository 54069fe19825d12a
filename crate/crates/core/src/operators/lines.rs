use num_complex::Complex;

use crate::scalar::Real;
use crate::vector::zeros;

/// Number of elements before and after `axis` in a row-major layout.
fn outer_inner(dims: &[usize], axis: usize) -> (usize, usize) {
    (
        dims[..axis].iter().product(),
        dims[axis + 1..].iter().product(),
    )
}

/// Runs `f` on every line along `axis`, in place.
pub(crate) fn for_each_line<T: Real>(
    data: &mut [Complex<T>],
    dims: &[usize],
    axis: usize,
    mut f: impl FnMut(&mut [Complex<T>]),
) {
    let n = dims[axis];
    let (outer, inner) = outer_inner(dims, axis);
    if inner == 1 {
        data.chunks_exact_mut(n).for_each(f);
        return;
    }
    let mut line = zeros(n);
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[base + k * inner];
            }
            f(&mut line);
            for (k, v) in line.iter().enumerate() {
                data[base + k * inner] = *v;
            }
        }
    }
}

/// Maps every line along `axis` to a line of length `out_len`; returns the
/// new array and its dimensions.
pub(crate) fn map_lines<T: Real>(
    data: &[Complex<T>],
    dims: &[usize],
    axis: usize,
    out_len: usize,
    mut f: impl FnMut(&mut [Complex<T>], &mut [Complex<T>]),
) -> (Vec<Complex<T>>, Vec<usize>) {
    let n = dims[axis];
    let (outer, inner) = outer_inner(dims, axis);
    let mut out_dims = dims.to_vec();
    out_dims[axis] = out_len;
    let mut out = zeros(outer * out_len * inner);
    let mut line_in = zeros(n);
    let mut line_out = zeros(out_len);
    for o in 0..outer {
        for i in 0..inner {
            let base_in = o * n * inner + i;
            for (k, v) in line_in.iter_mut().enumerate() {
                *v = data[base_in + k * inner];
            }
            f(&mut line_in, &mut line_out);
            let base_out = o * out_len * inner + i;
            for (k, v) in line_out.iter().enumerate() {
                out[base_out + k * inner] = *v;
            }
        }
    }
    (out, out_dims)
}
