//! Dense tensor containers for video cubes and single frames.
//!
//! A [`VideoCube`] stores `frames` images of `n_x` rows by `n_y` columns.
//! The flat layout is frame-major, then row-major: element `(i, j, k)`
//! (row, column, frame) lives at offset `((k * n_x) + i) * n_y + j`. Every
//! linear-algebra identity in this crate relies on that ordering, so the
//! backing array is always kept in standard layout with shape
//! `(frames, n_x, n_y)`.

use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::error::{Error, Result};

/// A real-valued 3D signal: `frames` frames of `n_x` x `n_y` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoCube {
    data: Array3<f64>,
}

impl VideoCube {
    pub fn zeros(n_x: usize, n_y: usize, frames: usize) -> Result<Self> {
        check_dims3(n_x, n_y, frames)?;
        Ok(Self {
            data: Array3::zeros((frames, n_x, n_y)),
        })
    }

    /// Rebuilds a cube from its flat vector form (the inverse of [`Self::to_flat`]).
    pub fn from_flat(n_x: usize, n_y: usize, frames: usize, data: Vec<f64>) -> Result<Self> {
        check_dims3(n_x, n_y, frames)?;
        if data.len() != n_x * n_y * frames {
            return Err(Error::Dimension(format!(
                "flat vector has {} samples, {}x{}x{} needs {}",
                data.len(),
                n_x,
                n_y,
                frames,
                n_x * n_y * frames
            )));
        }
        let data = Array3::from_shape_vec((frames, n_x, n_y), data)
            .expect("length checked above");
        Ok(Self { data })
    }

    pub fn from_array(data: Array3<f64>) -> Result<Self> {
        let (frames, n_x, n_y) = data.dim();
        check_dims3(n_x, n_y, frames)?;
        Ok(Self::wrap(data))
    }

    /// Internal constructor for arrays whose dimensions are already known valid.
    pub(crate) fn wrap(data: Array3<f64>) -> Self {
        debug_assert!(data.dim().0 >= 1 && data.dim().1 >= 1 && data.dim().2 >= 1);
        let data = to_standard3(data);
        Self { data }
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

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // dimensions are validated to be >= 1
    }

    /// Sample at (row `i`, column `j`, frame `k`).
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[[k, i, j]]
    }

    /// Flattens to the vector form: frames stacked, each frame row-major.
    pub fn to_flat(&self) -> Vec<f64> {
        match self.data.as_slice() {
            Some(s) => s.to_vec(),
            None => self.data.iter().copied().collect(),
        }
    }

    pub fn frame(&self, k: usize) -> Frame {
        Frame::wrap(self.data.index_axis(Axis(0), k).to_owned())
    }

    pub fn frame_view(&self, k: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), k)
    }

    pub fn array(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn array_mut(&mut self) -> &mut Array3<f64> {
        &mut self.data
    }

    pub fn into_array(self) -> Array3<f64> {
        self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// A single 2D image of `n_x` rows by `n_y` columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    data: Array2<f64>,
}

impl Frame {
    pub fn zeros(n_x: usize, n_y: usize) -> Result<Self> {
        check_dims2(n_x, n_y)?;
        Ok(Self {
            data: Array2::zeros((n_x, n_y)),
        })
    }

    pub fn from_flat(n_x: usize, n_y: usize, data: Vec<f64>) -> Result<Self> {
        check_dims2(n_x, n_y)?;
        if data.len() != n_x * n_y {
            return Err(Error::Dimension(format!(
                "flat vector has {} samples, {}x{} needs {}",
                data.len(),
                n_x,
                n_y,
                n_x * n_y
            )));
        }
        let data = Array2::from_shape_vec((n_x, n_y), data).expect("length checked above");
        Ok(Self { data })
    }

    pub fn from_array(data: Array2<f64>) -> Result<Self> {
        let (n_x, n_y) = data.dim();
        check_dims2(n_x, n_y)?;
        Ok(Self::wrap(data))
    }

    pub(crate) fn wrap(data: Array2<f64>) -> Self {
        debug_assert!(data.nrows() >= 1 && data.ncols() >= 1);
        let data = to_standard2(data);
        Self { data }
    }

    pub fn n_x(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_y(&self) -> usize {
        self.data.ncols()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    pub fn to_flat(&self) -> Vec<f64> {
        match self.data.as_slice() {
            Some(s) => s.to_vec(),
            None => self.data.iter().copied().collect(),
        }
    }

    pub fn array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn array_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

fn check_dims3(n_x: usize, n_y: usize, frames: usize) -> Result<()> {
    if n_x == 0 || n_y == 0 || frames == 0 {
        return Err(Error::Dimension(format!(
            "cube dimensions must all be >= 1, got {}x{}x{}",
            n_x, n_y, frames
        )));
    }
    Ok(())
}

fn check_dims2(n_x: usize, n_y: usize) -> Result<()> {
    if n_x == 0 || n_y == 0 {
        return Err(Error::Dimension(format!(
            "frame dimensions must all be >= 1, got {}x{}",
            n_x, n_y
        )));
    }
    Ok(())
}

fn to_standard3(a: Array3<f64>) -> Array3<f64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

fn to_standard2(a: Array2<f64>) -> Array2<f64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}
