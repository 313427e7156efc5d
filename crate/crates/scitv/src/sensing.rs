//! The snapshot sensing operator and the linear-algebra steps that exploit
//! its structure.
//!
//! A stack of per-frame modulation masks induces the measurement map
//! `Y(i,j) = sum_k C_k(i,j) * X_k(i,j)`. Stacked as a matrix the operator is
//! a row of diagonal blocks, so its Gram matrix is diagonal with entries
//! `sum_k C_k(i,j)^2`. Forward/adjoint applications, the Euclidean
//! projection onto the measurement-consistent affine set, and the quadratic
//! data update used by consensus splitting all reduce to per-pixel
//! arithmetic against that cached diagonal.

use ndarray::{Array2, Array3, Axis, Zip};

use crate::error::{Error, Result};
use crate::tensor::{Frame, VideoCube};

/// Per-frame modulation masks, same layout as a [`VideoCube`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaskCube {
    data: Array3<f64>,
}

impl MaskCube {
    pub fn from_flat(n_x: usize, n_y: usize, frames: usize, data: Vec<f64>) -> Result<Self> {
        Self::from_cube(VideoCube::from_flat(n_x, n_y, frames, data)?)
    }

    pub fn from_cube(cube: VideoCube) -> Result<Self> {
        if let Some(offset) = cube.array().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { offset });
        }
        Ok(Self {
            data: cube.into_array(),
        })
    }

    pub fn n_x(&self) -> usize {
        self.data.dim().1
    }

    pub fn n_y(&self) -> usize {
        self.data.dim().2
    }

    pub fn frames(&self) -> usize {
        self.data.dim().0
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[[k, i, j]]
    }

    pub fn array(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn to_cube(&self) -> VideoCube {
        VideoCube::wrap(self.data.clone())
    }
}

/// A single coded snapshot, plus the noise level used when it was simulated.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    frame: Frame,
    noise_std: Option<f64>,
}

impl Measurement {
    pub fn new(frame: Frame) -> Self {
        Self {
            frame,
            noise_std: None,
        }
    }

    pub fn with_noise_std(frame: Frame, noise_std: f64) -> Self {
        Self {
            frame,
            noise_std: Some(noise_std),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn noise_std(&self) -> Option<f64> {
        self.noise_std
    }

    pub fn into_frame(self) -> Frame {
        self.frame
    }
}

/// The structured sensing operator; immutable and cheap to share between
/// concurrent reconstructions.
#[derive(Debug, Clone)]
pub struct SensingOperator {
    masks: MaskCube,
    gram_diag: Frame,
}

pub const DEFAULT_DENSE_CAP: usize = 4096;

impl SensingOperator {
    /// Builds the operator and caches the Gram diagonal. Masks that leave
    /// any pixel with zero total energy are rejected here, not at use time.
    pub fn new(masks: MaskCube) -> Result<Self> {
        let (n_x, n_y) = (masks.n_x(), masks.n_y());
        let mut gram = Array2::<f64>::zeros((n_x, n_y));
        for k in 0..masks.frames() {
            let mk = masks.array().index_axis(Axis(0), k);
            Zip::from(&mut gram).and(&mk).for_each(|g, &c| *g += c * c);
        }
        for i in 0..n_x {
            for j in 0..n_y {
                if gram[[i, j]] <= 0.0 {
                    return Err(Error::DeadPixel { row: i, col: j });
                }
            }
        }
        Ok(Self {
            masks,
            gram_diag: Frame::wrap(gram),
        })
    }

    pub fn n_x(&self) -> usize {
        self.masks.n_x()
    }

    pub fn n_y(&self) -> usize {
        self.masks.n_y()
    }

    pub fn frames(&self) -> usize {
        self.masks.frames()
    }

    pub fn masks(&self) -> &MaskCube {
        &self.masks
    }

    /// Diagonal of the operator's Gram matrix, reshaped to the sensor grid.
    pub fn gram_diag(&self) -> &Frame {
        &self.gram_diag
    }

    /// Largest eigenvalue of the normal operator; exact for this structure
    /// (the Gram matrix is diagonal), so no power iteration is needed.
    pub fn lipschitz(&self) -> f64 {
        self.gram_diag
            .array()
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    fn check_cube(&self, x: &VideoCube) -> Result<()> {
        if x.n_x() != self.n_x() || x.n_y() != self.n_y() || x.frames() != self.frames() {
            return Err(Error::Dimension(format!(
                "cube is {}x{}x{}, operator expects {}x{}x{}",
                x.n_x(),
                x.n_y(),
                x.frames(),
                self.n_x(),
                self.n_y(),
                self.frames()
            )));
        }
        Ok(())
    }

    fn check_measurement(&self, y: &Measurement) -> Result<()> {
        if y.frame().n_x() != self.n_x() || y.frame().n_y() != self.n_y() {
            return Err(Error::Dimension(format!(
                "measurement is {}x{}, operator expects {}x{}",
                y.frame().n_x(),
                y.frame().n_y(),
                self.n_x(),
                self.n_y()
            )));
        }
        Ok(())
    }

    /// Noiseless coded snapshot of `x`: each pixel sums its masked samples
    /// across frames.
    pub fn forward(&self, x: &VideoCube) -> Result<Measurement> {
        self.check_cube(x)?;
        let mut acc = Array2::<f64>::zeros((self.n_x(), self.n_y()));
        for k in 0..self.frames() {
            let mk = self.masks.array().index_axis(Axis(0), k);
            let xk = x.array().index_axis(Axis(0), k);
            Zip::from(&mut acc)
                .and(&mk)
                .and(&xk)
                .for_each(|a, &c, &v| *a += c * v);
        }
        Ok(Measurement::new(Frame::wrap(acc)))
    }

    /// Transpose application: frame `k` of the result is `C_k .* Y`.
    pub fn adjoint(&self, y: &Measurement) -> Result<VideoCube> {
        self.check_measurement(y)?;
        let mut out = Array3::<f64>::zeros(self.masks.array().raw_dim());
        for k in 0..self.frames() {
            let mut ok = out.index_axis_mut(Axis(0), k);
            let mk = self.masks.array().index_axis(Axis(0), k);
            Zip::from(&mut ok)
                .and(&mk)
                .and(y.frame().array())
                .for_each(|o, &c, &v| *o = c * v);
        }
        Ok(VideoCube::wrap(out))
    }

    /// Euclidean projection of `theta` onto the affine set of cubes whose
    /// snapshot equals `y`; element-wise thanks to the diagonal Gram matrix.
    pub fn project_affine(&self, theta: &VideoCube, y: &Measurement) -> Result<VideoCube> {
        self.check_cube(theta)?;
        self.check_measurement(y)?;
        let resid = self.scaled_residual(theta, y, 0.0)?;
        Ok(self.spread_residual(theta, &resid))
    }

    /// Minimizer of `0.5*||y - A x||^2 + (rho/2)*||x - b||^2`, computed in
    /// closed form per pixel.
    pub fn admm_x_update(&self, b: &VideoCube, y: &Measurement, rho: f64) -> Result<VideoCube> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Parameter(format!("rho must be positive, got {rho}")));
        }
        self.check_cube(b)?;
        self.check_measurement(y)?;
        let resid = self.scaled_residual(b, y, rho)?;
        Ok(self.spread_residual(b, &resid))
    }

    /// `(y - A x) / (rho + gram)` on the sensor grid.
    fn scaled_residual(&self, x: &VideoCube, y: &Measurement, rho: f64) -> Result<Array2<f64>> {
        let ax = self.forward(x)?;
        let mut resid = Array2::<f64>::zeros((self.n_x(), self.n_y()));
        Zip::from(&mut resid)
            .and(y.frame().array())
            .and(ax.frame().array())
            .and(self.gram_diag.array())
            .for_each(|r, &ym, &am, &g| *r = (ym - am) / (rho + g));
        Ok(resid)
    }

    /// `x + A^T r` where `r` lives on the sensor grid.
    fn spread_residual(&self, x: &VideoCube, resid: &Array2<f64>) -> VideoCube {
        let mut out = x.array().clone();
        for k in 0..self.frames() {
            let mut ok = out.index_axis_mut(Axis(0), k);
            let mk = self.masks.array().index_axis(Axis(0), k);
            Zip::from(&mut ok)
                .and(&mk)
                .and(resid)
                .for_each(|o, &c, &r| *o += c * r);
        }
        VideoCube::wrap(out)
    }

    /// Dense `n x nB` matrix form of the operator, for oracle checks on
    /// small instances only.
    pub fn materialize_dense(&self) -> Result<Array2<f64>> {
        self.materialize_dense_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn materialize_dense_with_cap(&self, cap: usize) -> Result<Array2<f64>> {
        let n = self.n_x() * self.n_y();
        let entries = n * self.frames();
        if entries > cap {
            return Err(Error::DenseCap { entries, cap });
        }
        let mut dense = Array2::<f64>::zeros((n, entries));
        for k in 0..self.frames() {
            let mk = self.masks.array().index_axis(Axis(0), k);
            for i in 0..self.n_x() {
                for j in 0..self.n_y() {
                    let r = i * self.n_y() + j;
                    dense[[r, k * n + r]] = mk[[i, j]];
                }
            }
        }
        Ok(dense)
    }
}
