//! Shared test-only machinery: a deterministic generator, dense linear
//! algebra, and an independent prox oracle. Everything here deliberately
//! avoids the library's computational paths: matrices are materialized,
//! systems are solved by Gaussian elimination, and the prox oracle runs on
//! flat, zero-padded dual grids.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use scitv::sensing::MaskCube;
use scitv::tensor::{Frame, VideoCube};
use scitv::tv::TvNorm;

/// splitmix64; good enough to fabricate test data deterministically.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x1234_5678))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

pub fn random_cube(n_x: usize, n_y: usize, frames: usize, rng: &mut TestRng) -> VideoCube {
    let data: Vec<f64> = (0..n_x * n_y * frames).map(|_| rng.unit()).collect();
    VideoCube::from_flat(n_x, n_y, frames, data).unwrap()
}

pub fn random_frame(n_x: usize, n_y: usize, rng: &mut TestRng) -> Frame {
    let data: Vec<f64> = (0..n_x * n_y).map(|_| rng.range(-1.0, 1.0)).collect();
    Frame::from_flat(n_x, n_y, data).unwrap()
}

/// Bernoulli(1/2) masks with dead pixels patched to stay invertible.
pub fn random_binary_masks(n_x: usize, n_y: usize, frames: usize, rng: &mut TestRng) -> MaskCube {
    let mut data: Vec<f64> = (0..n_x * n_y * frames)
        .map(|_| if rng.unit() < 0.5 { 1.0 } else { 0.0 })
        .collect();
    for i in 0..n_x {
        for j in 0..n_y {
            let dead = (0..frames).all(|k| data[(k * n_x + i) * n_y + j] == 0.0);
            if dead {
                let k = rng.index(frames);
                data[(k * n_x + i) * n_y + j] = 1.0;
            }
        }
    }
    MaskCube::from_flat(n_x, n_y, frames, data).unwrap()
}

/// Strictly positive random masks; well conditioned for dense comparisons.
pub fn random_positive_masks(n_x: usize, n_y: usize, frames: usize, rng: &mut TestRng) -> MaskCube {
    let data: Vec<f64> = (0..n_x * n_y * frames)
        .map(|_| rng.range(0.5, 1.5))
        .collect();
    MaskCube::from_flat(n_x, n_y, frames, data).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense `A x` with plain loops.
pub fn matvec(a: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    let (rows, cols) = a.dim();
    assert_eq!(cols, x.len());
    let mut out = vec![0.0; rows];
    for r in 0..rows {
        let mut acc = 0.0;
        for c in 0..cols {
            acc += a[[r, c]] * x[c];
        }
        out[r] = acc;
    }
    out
}

/// Dense `A^T y`.
pub fn mat_t_vec(a: &Array2<f64>, y: &[f64]) -> Vec<f64> {
    let (rows, cols) = a.dim();
    assert_eq!(rows, y.len());
    let mut out = vec![0.0; cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c] += a[[r, c]] * y[r];
        }
    }
    out
}

/// Dense `A A^T`.
pub fn gram_t(a: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = a.dim();
    let mut out = Array2::zeros((rows, rows));
    for i in 0..rows {
        for j in 0..rows {
            let mut acc = 0.0;
            for c in 0..cols {
                acc += a[[i, c]] * a[[j, c]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// Dense `A^T A`.
pub fn gram(a: &Array2<f64>) -> Array2<f64> {
    let (rows, cols) = a.dim();
    let mut out = Array2::zeros((cols, cols));
    for i in 0..cols {
        for j in 0..cols {
            let mut acc = 0.0;
            for r in 0..rows {
                acc += a[[r, i]] * a[[r, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))
            .unwrap();
        if pivot != col {
            for c in 0..n {
                let tmp = m[[col, c]];
                m[[col, c]] = m[[pivot, c]];
                m[[pivot, c]] = tmp;
            }
            rhs.swap(col, pivot);
        }
        let diag = m[[col, col]];
        assert!(diag.abs() > 1e-14, "singular system in test oracle");
        for row in col + 1..n {
            let f = m[[row, col]] / diag;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[[row, c]] -= f * m[[col, c]];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in row + 1..n {
            acc -= m[[row, c]] * x[c];
        }
        x[row] = acc / m[[row, row]];
    }
    x
}

/// Materialized forward-difference matrix along a length-`n` axis:
/// `(n-1) x n`, rows `[-1, +1]`.
pub fn diff_matrix(n: usize) -> Array2<f64> {
    let mut d = Array2::zeros((n.saturating_sub(1), n));
    for r in 0..n.saturating_sub(1) {
        d[[r, r]] = -1.0;
        d[[r, r + 1]] = 1.0;
    }
    d
}

/// Dense `X D_h^T` (horizontal differences of a frame via the materialized
/// matrix).
pub fn frame_grad_h_dense(x: &Array2<f64>) -> Array2<f64> {
    let (n_x, n_y) = x.dim();
    let d = diff_matrix(n_y);
    let mut out = Array2::zeros((n_x, n_y.saturating_sub(1)));
    for i in 0..n_x {
        for r in 0..n_y.saturating_sub(1) {
            let mut acc = 0.0;
            for c in 0..n_y {
                acc += x[[i, c]] * d[[r, c]];
            }
            out[[i, r]] = acc;
        }
    }
    out
}

/// Dense `D_v X`.
pub fn frame_grad_v_dense(x: &Array2<f64>) -> Array2<f64> {
    let (n_x, n_y) = x.dim();
    let d = diff_matrix(n_x);
    let mut out = Array2::zeros((n_x.saturating_sub(1), n_y));
    for r in 0..n_x.saturating_sub(1) {
        for j in 0..n_y {
            let mut acc = 0.0;
            for c in 0..n_x {
                acc += d[[r, c]] * x[[c, j]];
            }
            out[[r, j]] = acc;
        }
    }
    out
}

// ---------------------------------------------------------------------
// Effective prox objectives and an independent prox oracle.
//
// The dual-ball projections minimize the pixel-wise isotropic TVs, so the
// prox objective of the isotropic variants must be evaluated with the
// pixel-wise aggregation, not the whole-frame one reported by tv_norm.
// ---------------------------------------------------------------------

/// The TV functional whose prox the dual solvers compute.
pub fn effective_tv(x: &VideoCube, norm: TvNorm) -> f64 {
    let (frames, n_x, n_y) = x.array().dim();
    let a = x.array();
    let h = |k: usize, i: usize, j: usize| -> f64 {
        if j + 1 < n_y {
            a[[k, i, j + 1]] - a[[k, i, j]]
        } else {
            0.0
        }
    };
    let v = |k: usize, i: usize, j: usize| -> f64 {
        if i + 1 < n_x {
            a[[k, i + 1, j]] - a[[k, i, j]]
        } else {
            0.0
        }
    };
    let mut total = 0.0;
    match norm {
        TvNorm::Atv => {
            for k in 0..frames {
                for i in 0..n_x {
                    for j in 0..n_y {
                        total += h(k, i, j).abs() + v(k, i, j).abs();
                    }
                }
            }
        }
        TvNorm::Itv2d => {
            for k in 0..frames {
                for i in 0..n_x {
                    for j in 0..n_y {
                        let (hh, vv) = (h(k, i, j), v(k, i, j));
                        total += (hh * hh + vv * vv).sqrt();
                    }
                }
            }
        }
        TvNorm::Itv3d => {
            for i in 0..n_x {
                for j in 0..n_y {
                    let mut acc = 0.0;
                    for k in 0..frames {
                        let (hh, vv) = (h(k, i, j), v(k, i, j));
                        acc += hh * hh + vv * vv;
                    }
                    total += acc.sqrt();
                }
            }
        }
    }
    total
}

/// `0.5*||x - z||^2 + weight * effective_tv(x)`.
pub fn prox_objective(x: &VideoCube, z: &VideoCube, weight: f64, norm: TvNorm) -> f64 {
    let dist: f64 = x
        .to_flat()
        .iter()
        .zip(z.to_flat())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    0.5 * dist + weight * effective_tv(x, norm)
}

/// Independent TV prox: accelerated projected gradient on flat, zero-padded
/// dual grids with exact ball projections. Shares no code with the library.
pub fn oracle_prox(z: &VideoCube, weight: f64, norm: TvNorm, iters: usize) -> VideoCube {
    assert!(weight > 0.0);
    let (frames, n_x, n_y) = z.array().dim();
    let n = frames * n_x * n_y;
    let zf = z.to_flat();
    let at = |k: usize, i: usize, j: usize| (k * n_x + i) * n_y + j;

    let mut wh = vec![0.0f64; n];
    let mut wv = vec![0.0f64; n];
    let mut ph_prev = wh.clone();
    let mut pv_prev = wv.clone();
    let mut momentum = 1.0f64;
    let step = 1.0 / (8.0 * weight);

    let mut x = vec![0.0f64; n];
    for _ in 0..iters {
        // x = z - weight * divergence(w)
        for k in 0..frames {
            for i in 0..n_x {
                for j in 0..n_y {
                    let mut div = 0.0;
                    if j + 1 < n_y {
                        div -= wh[at(k, i, j)];
                    }
                    if j >= 1 {
                        div += wh[at(k, i, j - 1)];
                    }
                    if i + 1 < n_x {
                        div -= wv[at(k, i, j)];
                    }
                    if i >= 1 {
                        div += wv[at(k, i - 1, j)];
                    }
                    x[at(k, i, j)] = zf[at(k, i, j)] - weight * div;
                }
            }
        }
        // candidate duals: w + step * grad(x), then exact projection
        let mut ph = vec![0.0f64; n];
        let mut pv = vec![0.0f64; n];
        for k in 0..frames {
            for i in 0..n_x {
                for j in 0..n_y {
                    if j + 1 < n_y {
                        ph[at(k, i, j)] =
                            wh[at(k, i, j)] + step * (x[at(k, i, j + 1)] - x[at(k, i, j)]);
                    }
                    if i + 1 < n_x {
                        pv[at(k, i, j)] =
                            wv[at(k, i, j)] + step * (x[at(k, i + 1, j)] - x[at(k, i, j)]);
                    }
                }
            }
        }
        match norm {
            TvNorm::Atv => {
                for t in ph.iter_mut().chain(pv.iter_mut()) {
                    *t = t.clamp(-1.0, 1.0);
                }
            }
            TvNorm::Itv2d => {
                for idx in 0..n {
                    let mag = (ph[idx] * ph[idx] + pv[idx] * pv[idx]).sqrt();
                    if mag > 1.0 {
                        ph[idx] /= mag;
                        pv[idx] /= mag;
                    }
                }
            }
            TvNorm::Itv3d => {
                for i in 0..n_x {
                    for j in 0..n_y {
                        let mut acc = 0.0;
                        for k in 0..frames {
                            acc += ph[at(k, i, j)] * ph[at(k, i, j)]
                                + pv[at(k, i, j)] * pv[at(k, i, j)];
                        }
                        let mag = acc.sqrt();
                        if mag > 1.0 {
                            for k in 0..frames {
                                ph[at(k, i, j)] /= mag;
                                pv[at(k, i, j)] /= mag;
                            }
                        }
                    }
                }
            }
        }
        let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let coef = (momentum - 1.0) / next;
        for idx in 0..n {
            wh[idx] = ph[idx] + coef * (ph[idx] - ph_prev[idx]);
            wv[idx] = pv[idx] + coef * (pv[idx] - pv_prev[idx]);
        }
        ph_prev = ph;
        pv_prev = pv;
        momentum = next;
    }

    // rebuild from the last projected (feasible) duals
    let mut out = vec![0.0f64; n];
    for k in 0..frames {
        for i in 0..n_x {
            for j in 0..n_y {
                let mut div = 0.0;
                if j + 1 < n_y {
                    div -= ph_prev[at(k, i, j)];
                }
                if j >= 1 {
                    div += ph_prev[at(k, i, j - 1)];
                }
                if i + 1 < n_x {
                    div -= pv_prev[at(k, i, j)];
                }
                if i >= 1 {
                    div += pv_prev[at(k, i - 1, j)];
                }
                out[at(k, i, j)] = zf[at(k, i, j)] - weight * div;
            }
        }
    }
    VideoCube::from_flat(n_x, n_y, frames, out).unwrap()
}

pub fn as_array1(v: Vec<f64>) -> Array1<f64> {
    Array1::from_vec(v)
}

/// Maximum absolute elementwise difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
