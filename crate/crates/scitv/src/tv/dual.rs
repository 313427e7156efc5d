//! Dual-projection TV denoisers: the fixed-point iteration and its
//! Nesterov-accelerated variant.
//!
//! Both minimize `0.5*||x - z||^2 + lambda * TV(x)` by ascending the dual of
//! the problem: the output is always `z - lambda * (D_h^T w_h + D_v^T w_v)`
//! for duals `w` kept inside the unit ball of the selected norm. One call
//! performs `in_iter` dual updates; `lambda = 0` short-circuits to the
//! identity.

use crate::error::{Error, Result};
use crate::tensor::VideoCube;
use crate::tv::grad::{grad_h_cube, grad_v_cube, subtract_divergence};
use crate::tv::{project_dual_ball, DenoiseConfig, DualField, TvNorm};

/// Fixed-point dual iteration with duals starting at zero.
pub fn denoise_chambolle(z: &VideoCube, norm: TvNorm, cfg: &DenoiseConfig) -> Result<VideoCube> {
    let mut duals = DualField::zeros_like(z);
    denoise_chambolle_warm(z, norm, cfg, &mut duals)
}

/// Fixed-point dual iteration continuing from caller-held duals.
pub fn denoise_chambolle_warm(
    z: &VideoCube,
    norm: TvNorm,
    cfg: &DenoiseConfig,
    duals: &mut DualField,
) -> Result<VideoCube> {
    cfg.validate()?;
    check_duals(z, duals)?;
    if cfg.lambda == 0.0 {
        return Ok(z.clone());
    }
    let lambda = cfg.lambda;
    let dt = cfg.cham_dt;

    let scaled: ndarray::Array3<f64> = z.array().mapv(|t| t / lambda);
    for _ in 0..cfg.in_iter {
        // direction field: z/lambda minus the divergence of the current duals
        let g = subtract_divergence(scaled.view(), duals.h.view(), duals.v.view(), 1.0);
        let mut sh = grad_h_cube(g.view());
        sh *= dt;
        let mut sv = grad_v_cube(g.view());
        sv *= dt;
        duals.h += &sh;
        duals.v += &sv;
        let steps = DualField { h: sh, v: sv };
        project_dual_ball(duals, &steps, norm, cfg.projection_rule);
    }

    Ok(VideoCube::wrap(subtract_divergence(
        z.array().view(),
        duals.h.view(),
        duals.v.view(),
        lambda,
    )))
}

/// Accelerated dual projection with duals starting at zero.
pub fn denoise_fgp(z: &VideoCube, norm: TvNorm, cfg: &DenoiseConfig) -> Result<VideoCube> {
    let mut duals = DualField::zeros_like(z);
    denoise_fgp_warm(z, norm, cfg, &mut duals)
}

/// Accelerated dual projection continuing from caller-held duals. On return
/// `duals` holds the last projected point (momentum is not persisted).
pub fn denoise_fgp_warm(
    z: &VideoCube,
    norm: TvNorm,
    cfg: &DenoiseConfig,
    duals: &mut DualField,
) -> Result<VideoCube> {
    cfg.validate()?;
    check_duals(z, duals)?;
    if cfg.lambda == 0.0 {
        return Ok(z.clone());
    }
    let lambda = cfg.lambda;
    let step = 1.0 / (8.0 * lambda);

    // w carries the extrapolated iterate, p_prev the last projected one.
    let mut w = duals.clone();
    let mut p_prev = duals.clone();
    let mut nu = 1.0f64;

    for _ in 0..cfg.in_iter {
        let theta = subtract_divergence(z.array().view(), w.h.view(), w.v.view(), lambda);
        let mut sh = grad_h_cube(theta.view());
        sh *= step;
        let mut sv = grad_v_cube(theta.view());
        sv *= step;

        let mut p = DualField {
            h: &w.h + &sh,
            v: &w.v + &sv,
        };
        let steps = DualField { h: sh, v: sv };
        project_dual_ball(&mut p, &steps, norm, cfg.projection_rule);

        let nu_next = 0.5 * (1.0 + (1.0 + 4.0 * nu * nu).sqrt());
        let coef = (nu - 1.0) / nu_next;
        w.h.zip_mut_with(&p.h, |wv, &pv| *wv = pv);
        w.h.zip_mut_with(&p_prev.h, |wv, &prev| *wv += coef * (*wv - prev));
        w.v.zip_mut_with(&p.v, |wv, &pv| *wv = pv);
        w.v.zip_mut_with(&p_prev.v, |wv, &prev| *wv += coef * (*wv - prev));
        p_prev = p;
        nu = nu_next;
    }

    let out = subtract_divergence(z.array().view(), p_prev.h.view(), p_prev.v.view(), lambda);
    *duals = p_prev;
    Ok(VideoCube::wrap(out))
}

fn check_duals(z: &VideoCube, duals: &DualField) -> Result<()> {
    if !duals.matches(z) {
        return Err(Error::Dimension(
            "dual field shape does not match the input cube".into(),
        ));
    }
    Ok(())
}
