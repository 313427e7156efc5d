//! Deterministic data generation for simulations: random binary masks,
//! synthetic piecewise-smooth scenes, and coded measurements.
//!
//! Everything is driven by a counter-based ChaCha stream so that a (seed,
//! shape) pair produces bit-identical output on every platform and run.

use ndarray::{Array2, Array3, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sensing::{MaskCube, Measurement};
use crate::tensor::{Frame, VideoCube};

const DEAD_PIXEL_RETRIES: usize = 100;

/// Independent Bernoulli(density) masks in {0, 1}. Pixels that came out
/// dark in every frame are redrawn (pixel by pixel, in row-major order, from
/// the same seeded stream) until live, so the result never has dead pixels.
pub fn generate_masks(
    n_x: usize,
    n_y: usize,
    frames: usize,
    seed: u64,
    density: f64,
) -> Result<MaskCube> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Parameter(format!(
            "mask density must lie in (0, 1], got {density}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = move || if rng.random::<f64>() < density { 1.0 } else { 0.0 };
    let data: Vec<f64> = (0..n_x * n_y * frames).map(|_| draw()).collect();
    let mut cube = VideoCube::from_flat(n_x, n_y, frames, data)?;
    for i in 0..n_x {
        for j in 0..n_y {
            let mut attempts = 0;
            while (0..frames).all(|k| cube.value(i, j, k) == 0.0) {
                attempts += 1;
                if attempts > DEAD_PIXEL_RETRIES {
                    return Err(Error::Generation(format!(
                        "pixel ({i}, {j}) stayed dead after {DEAD_PIXEL_RETRIES} redraws \
                         (density {density}, {frames} frames); raise density or frame count"
                    )));
                }
                for k in 0..frames {
                    cube.array_mut()[[k, i, j]] = draw();
                }
            }
        }
    }
    MaskCube::from_cube(cube)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    /// A bright square over a flat background, translating one pixel per
    /// frame (cyclically, so frame k+1 is an exact shift of frame k).
    MovingSquare,
    /// A smooth blob translating one pixel per frame, same cyclic motion.
    MovingGaussian,
}

impl std::str::FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moving-square" => Ok(SceneKind::MovingSquare),
            "moving-gaussian" => Ok(SceneKind::MovingGaussian),
            other => Err(Error::Parameter(format!(
                "unknown scene kind {other:?} (expected moving-square or moving-gaussian)"
            ))),
        }
    }
}

impl std::fmt::Display for SceneKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SceneKind::MovingSquare => "moving-square",
            SceneKind::MovingGaussian => "moving-gaussian",
        })
    }
}

/// Piecewise-smooth test cube with deterministic one-pixel-per-frame motion
/// along the columns; all values in [0, 1].
pub fn generate_synthetic_scene(
    n_x: usize,
    n_y: usize,
    frames: usize,
    seed: u64,
    kind: SceneKind,
) -> Result<VideoCube> {
    if n_x == 0 || n_y == 0 || frames == 0 {
        return Err(Error::Dimension("scene dimensions must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ce0_5ce0);
    let background = 0.1 + 0.1 * rng.random::<f64>();
    let amplitude = 0.7 + 0.09 * rng.random::<f64>(); // background + amplitude stays below 1
    let row0 = rng.random_range(0..n_x);
    let col0 = rng.random_range(0..n_y);
    let size_x = (n_x / 3).max(1);
    let size_y = (n_y / 3).max(1);
    let sigma = 0.18 * (n_x.min(n_y) as f64).max(1.0);

    let mut data = Array3::<f64>::zeros((frames, n_x, n_y));
    for k in 0..frames {
        let mut frame = data.index_axis_mut(Axis(0), k);
        match kind {
            SceneKind::MovingSquare => {
                frame.fill(background);
                for di in 0..size_x {
                    for dj in 0..size_y {
                        let i = (row0 + di) % n_x;
                        let j = (col0 + dj + k) % n_y;
                        frame[[i, j]] = background + amplitude;
                    }
                }
            }
            SceneKind::MovingGaussian => {
                let ci = (row0 + size_x / 2) % n_x;
                let cj = (col0 + size_y / 2 + k) % n_y;
                for i in 0..n_x {
                    for j in 0..n_y {
                        let di = cyclic_distance(i, ci, n_x);
                        let dj = cyclic_distance(j, cj, n_y);
                        let r2 = (di * di + dj * dj) as f64;
                        frame[[i, j]] =
                            background + amplitude * (-r2 / (2.0 * sigma * sigma)).exp();
                    }
                }
            }
        }
    }
    // amplitudes were drawn so this always lands in [0, 1]
    debug_assert!(data.iter().all(|&v| (0.0..=1.0).contains(&v)));
    Ok(VideoCube::wrap(data))
}

fn cyclic_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// Coded snapshot of `truth` under `masks`, plus optional seeded Gaussian
/// noise of standard deviation `noise_std`.
pub fn simulate_measurement(
    truth: &VideoCube,
    masks: &MaskCube,
    noise_std: f64,
    seed: u64,
) -> Result<Measurement> {
    if truth.array().dim() != masks.array().dim() {
        return Err(Error::Dimension(format!(
            "truth is {:?}, masks are {:?}",
            truth.array().dim(),
            masks.array().dim()
        )));
    }
    if !(noise_std >= 0.0) || !noise_std.is_finite() {
        return Err(Error::Parameter(format!(
            "noise std must be finite and >= 0, got {noise_std}"
        )));
    }
    let (frames, n_x, n_y) = truth.array().dim();
    let mut acc = Array2::<f64>::zeros((n_x, n_y));
    for k in 0..frames {
        let mk = masks.array().index_axis(Axis(0), k);
        let xk = truth.array().index_axis(Axis(0), k);
        Zip::from(&mut acc)
            .and(&mk)
            .and(&xk)
            .for_each(|a, &c, &v| *a += c * v);
    }
    if noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0115e);
        let normal = Normal::new(0.0, noise_std)
            .map_err(|e| Error::Parameter(format!("bad noise model: {e}")))?;
        acc.mapv_inplace(|v| v + normal.sample(&mut rng));
    }
    Ok(Measurement::with_noise_std(Frame::wrap(acc), noise_std))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::s;

    #[test]
    fn masks_are_deterministic_for_a_seed() {
        let a = generate_masks(16, 16, 4, 99, 0.5).unwrap();
        let b = generate_masks(16, 16, 4, 99, 0.5).unwrap();
        assert_eq!(a, b);
        let c = generate_masks(16, 16, 4, 100, 0.5).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn density_one_gives_all_ones() {
        let m = generate_masks(5, 5, 3, 1, 1.0).unwrap();
        assert!(m.array().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn empirical_density_at_large_count() {
        let m = generate_masks(256, 256, 8, 7, 0.5).unwrap();
        let mean = m.array().sum() / m.array().len() as f64;
        assert!((0.49..=0.51).contains(&mean), "mean {mean}");
    }

    #[test]
    fn pathological_density_fails_with_generation_error() {
        // a single frame at tiny density essentially always has dead pixels
        let err = generate_masks(64, 64, 1, 3, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Generation(_)));
    }

    #[test]
    fn masks_have_no_dead_pixels() {
        let m = generate_masks(32, 32, 2, 11, 0.35).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                assert!((0..2).any(|k| m.value(i, j, k) != 0.0));
            }
        }
    }

    #[test]
    fn scene_is_deterministic_and_in_unit_range() {
        for kind in [SceneKind::MovingSquare, SceneKind::MovingGaussian] {
            let a = generate_synthetic_scene(24, 24, 6, 0, kind).unwrap();
            let b = generate_synthetic_scene(24, 24, 6, 0, kind).unwrap();
            assert_eq!(a, b);
            assert!(a.array().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn single_frame_scene_is_static() {
        let s = generate_synthetic_scene(8, 8, 1, 4, SceneKind::MovingSquare).unwrap();
        assert_eq!(s.frames(), 1);
    }

    #[test]
    fn consecutive_frames_are_one_pixel_cyclic_shifts() {
        for kind in [SceneKind::MovingSquare, SceneKind::MovingGaussian] {
            let cube = generate_synthetic_scene(16, 20, 5, 2, kind).unwrap();
            for k in 0..4 {
                let cur = cube.frame_view(k);
                let next = cube.frame_view(k + 1);
                // next(:, j) == cur(:, j-1) cyclically
                let shifted = ndarray::concatenate![
                    ndarray::Axis(1),
                    cur.slice(s![.., 19..]),
                    cur.slice(s![.., ..19])
                ];
                for (a, b) in shifted.iter().zip(next.iter()) {
                    assert_eq!(a.to_bits(), b.to_bits(), "{kind:?} frame {k}");
                }
            }
        }
    }

    #[test]
    fn noiseless_measurement_equals_masked_sum() {
        let truth = generate_synthetic_scene(12, 12, 4, 1, SceneKind::MovingSquare).unwrap();
        let masks = generate_masks(12, 12, 4, 2, 0.5).unwrap();
        let meas = simulate_measurement(&truth, &masks, 0.0, 0).unwrap();
        let op = crate::sensing::SensingOperator::new(masks).unwrap();
        let direct = op.forward(&truth).unwrap();
        assert_eq!(meas.frame(), direct.frame());
        assert_eq!(meas.noise_std(), Some(0.0));
    }

    #[test]
    fn noise_std_is_respected_empirically() {
        let truth = VideoCube::zeros(256, 256, 2).unwrap();
        let masks = generate_masks(256, 256, 2, 5, 0.5).unwrap();
        let meas = simulate_measurement(&truth, &masks, 0.01, 42).unwrap();
        // truth is zero, so the measurement is pure noise
        let v = meas.frame().to_flat();
        let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
        let var: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
        let std = var.sqrt();
        assert!((0.0095..=0.0105).contains(&std), "std {std}");
    }

    #[test]
    fn eight_frames_collapse_to_one_measurement() {
        let truth = generate_synthetic_scene(16, 16, 8, 0, SceneKind::MovingSquare).unwrap();
        let masks = generate_masks(16, 16, 8, 1, 0.5).unwrap();
        let meas = simulate_measurement(&truth, &masks, 0.0, 0).unwrap();
        assert_eq!((meas.frame().n_x(), meas.frame().n_y()), (16, 16));
    }
}
