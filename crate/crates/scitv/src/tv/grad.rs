//! Forward-difference operators and their transposes.
//!
//! Horizontal differences act along columns (width shrinks by one),
//! vertical differences along rows. Single-row or single-column inputs
//! yield an empty gradient in the corresponding direction, which every
//! consumer treats as contributing nothing.

use ndarray::{s, Array2, Array3, ArrayView2, ArrayView3};

use crate::tensor::Frame;

/// `out(i,j) = f(i,j+1) - f(i,j)`, shape `(n_x, n_y-1)`.
pub fn grad_h(f: &Frame) -> Array2<f64> {
    grad_h_view(f.array().view())
}

/// `out(i,j) = f(i+1,j) - f(i,j)`, shape `(n_x-1, n_y)`.
pub fn grad_v(f: &Frame) -> Array2<f64> {
    grad_v_view(f.array().view())
}

/// Exact transpose of [`grad_h`]; maps `(n_x, n_y-1)` duals back to frames.
pub fn grad_h_adjoint(w: &Array2<f64>) -> Array2<f64> {
    let (n_x, m) = w.dim();
    let mut out = Array2::<f64>::zeros((n_x, m + 1));
    {
        let mut left = out.slice_mut(s![.., ..m]);
        left -= w;
    }
    {
        let mut right = out.slice_mut(s![.., 1..]);
        right += w;
    }
    out
}

/// Exact transpose of [`grad_v`]; maps `(n_x-1, n_y)` duals back to frames.
pub fn grad_v_adjoint(w: &Array2<f64>) -> Array2<f64> {
    let (m, n_y) = w.dim();
    let mut out = Array2::<f64>::zeros((m + 1, n_y));
    {
        let mut top = out.slice_mut(s![..m, ..]);
        top -= w;
    }
    {
        let mut bottom = out.slice_mut(s![1.., ..]);
        bottom += w;
    }
    out
}

pub(crate) fn grad_h_view(f: ArrayView2<'_, f64>) -> Array2<f64> {
    let n_y = f.ncols();
    &f.slice(s![.., 1..]) - &f.slice(s![.., ..n_y - 1])
}

pub(crate) fn grad_v_view(f: ArrayView2<'_, f64>) -> Array2<f64> {
    let n_x = f.nrows();
    &f.slice(s![1.., ..]) - &f.slice(s![..n_x - 1, ..])
}

// Cube-level variants: every frame handled independently, so these stay
// bit-identical to the per-frame kernels above.

pub(crate) fn grad_h_cube(x: ArrayView3<'_, f64>) -> Array3<f64> {
    let n_y = x.dim().2;
    &x.slice(s![.., .., 1..]) - &x.slice(s![.., .., ..n_y - 1])
}

pub(crate) fn grad_v_cube(x: ArrayView3<'_, f64>) -> Array3<f64> {
    let n_x = x.dim().1;
    &x.slice(s![.., 1.., ..]) - &x.slice(s![.., ..n_x - 1, ..])
}

pub(crate) fn grad_h_adjoint_cube(w: ArrayView3<'_, f64>) -> Array3<f64> {
    let (frames, n_x, m) = w.dim();
    let mut out = Array3::<f64>::zeros((frames, n_x, m + 1));
    {
        let mut left = out.slice_mut(s![.., .., ..m]);
        left -= &w;
    }
    {
        let mut right = out.slice_mut(s![.., .., 1..]);
        right += &w;
    }
    out
}

pub(crate) fn grad_v_adjoint_cube(w: ArrayView3<'_, f64>) -> Array3<f64> {
    let (frames, m, n_y) = w.dim();
    let mut out = Array3::<f64>::zeros((frames, m + 1, n_y));
    {
        let mut top = out.slice_mut(s![.., ..m, ..]);
        top -= &w;
    }
    {
        let mut bottom = out.slice_mut(s![.., 1.., ..]);
        bottom += &w;
    }
    out
}

/// `x - (D_h^T w_h + D_v^T w_v)` over a whole cube.
pub(crate) fn subtract_divergence(
    x: ArrayView3<'_, f64>,
    w_h: ArrayView3<'_, f64>,
    w_v: ArrayView3<'_, f64>,
    scale: f64,
) -> Array3<f64> {
    let mut out = x.to_owned();
    out.scaled_add(-scale, &grad_h_adjoint_cube(w_h));
    out.scaled_add(-scale, &grad_v_adjoint_cube(w_v));
    out
}
