//! Reconstruction quality metrics.

use crate::error::{Error, Result};
use crate::tensor::VideoCube;

/// PSNR cap reported for exact matches (zero MSE).
pub const PSNR_CAP_DB: f64 = 100.0;

/// Peak signal-to-noise ratio in dB, with peak fixed at 1.0 (data is
/// normalized on ingestion). Identical inputs return the 100 dB cap.
pub fn psnr(reference: &VideoCube, estimate: &VideoCube) -> Result<f64> {
    if reference.array().dim() != estimate.array().dim() {
        return Err(Error::Dimension(format!(
            "psnr shapes disagree: {:?} vs {:?}",
            reference.array().dim(),
            estimate.array().dim()
        )));
    }
    let n = reference.len() as f64;
    let mse: f64 = reference
        .array()
        .iter()
        .zip(estimate.array().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_cubes_hit_the_cap() {
        let cube = VideoCube::from_flat(2, 2, 1, vec![0.1, 0.4, 0.9, 0.5]).unwrap();
        assert_eq!(psnr(&cube, &cube).unwrap(), 100.0);
    }

    #[test]
    fn constant_offset_gives_closed_form() {
        // reference zeros, estimate 0.1 everywhere: MSE 0.01 -> 20 dB
        let reference = VideoCube::zeros(4, 4, 2).unwrap();
        let mut estimate = VideoCube::zeros(4, 4, 2).unwrap();
        estimate.array_mut().fill(0.1);
        let db = psnr(&reference, &estimate).unwrap();
        assert!((db - 20.0).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = VideoCube::zeros(2, 2, 2).unwrap();
        let b = VideoCube::zeros(2, 2, 3).unwrap();
        assert!(psnr(&a, &b).is_err());
    }
}
