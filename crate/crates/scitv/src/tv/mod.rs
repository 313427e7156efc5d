//! Total-variation norms and denoisers.
//!
//! Three TV flavors are supported: anisotropic (`Atv`, the l1 norm of all
//! finite differences), per-frame isotropic (`Itv2d`), and whole-cube
//! isotropic (`Itv3d`). Each can be minimized against a quadratic proximity
//! term by one of three inner solvers: iterative clipping (`Clip`, ATV
//! only), a dual fixed-point iteration (`Cham`), and its Nesterov
//! accelerated variant (`Fgp`). The seven valid pairings are exactly the
//! columns of the benchmark grid.

mod clip;
mod dual;
mod grad;

pub use clip::{denoise_clip, denoise_clip_warm};
pub use dual::{denoise_chambolle, denoise_chambolle_warm, denoise_fgp, denoise_fgp_warm};
pub use grad::{grad_h, grad_h_adjoint, grad_v, grad_v_adjoint};

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::tensor::VideoCube;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TvNorm {
    /// Sum of absolute horizontal and vertical differences over all frames.
    Atv,
    /// Per-frame l2 aggregation of the difference energies, summed over frames.
    Itv2d,
    /// Single l2 aggregation over the whole cube.
    Itv3d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnerSolver {
    Clip,
    Cham,
    Fgp,
}

/// A (norm, inner solver) pairing. `Clip` is only defined for the
/// anisotropic norm, so construction is validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TvVariant {
    norm: TvNorm,
    solver: InnerSolver,
}

impl TvVariant {
    /// All seven valid combinations, in benchmark column order.
    pub const ALL: [TvVariant; 7] = [
        TvVariant { norm: TvNorm::Atv, solver: InnerSolver::Clip },
        TvVariant { norm: TvNorm::Atv, solver: InnerSolver::Cham },
        TvVariant { norm: TvNorm::Atv, solver: InnerSolver::Fgp },
        TvVariant { norm: TvNorm::Itv2d, solver: InnerSolver::Cham },
        TvVariant { norm: TvNorm::Itv2d, solver: InnerSolver::Fgp },
        TvVariant { norm: TvNorm::Itv3d, solver: InnerSolver::Cham },
        TvVariant { norm: TvNorm::Itv3d, solver: InnerSolver::Fgp },
    ];

    pub fn new(norm: TvNorm, solver: InnerSolver) -> Result<Self> {
        if solver == InnerSolver::Clip && norm != TvNorm::Atv {
            return Err(Error::Parameter(
                "the clipping solver is only defined for the anisotropic norm".into(),
            ));
        }
        Ok(Self { norm, solver })
    }

    pub fn norm(&self) -> TvNorm {
        self.norm
    }

    pub fn solver(&self) -> InnerSolver {
        self.solver
    }

    pub fn tag(&self) -> &'static str {
        match (self.norm, self.solver) {
            (TvNorm::Atv, InnerSolver::Clip) => "atv-clip",
            (TvNorm::Atv, InnerSolver::Cham) => "atv-cham",
            (TvNorm::Atv, InnerSolver::Fgp) => "atv-fgp",
            (TvNorm::Itv2d, InnerSolver::Cham) => "itv2d-cham",
            (TvNorm::Itv2d, InnerSolver::Fgp) => "itv2d-fgp",
            (TvNorm::Itv3d, InnerSolver::Cham) => "itv3d-cham",
            (TvNorm::Itv3d, InnerSolver::Fgp) => "itv3d-fgp",
            (TvNorm::Itv2d, InnerSolver::Clip) | (TvNorm::Itv3d, InnerSolver::Clip) => {
                unreachable!("validated at construction")
            }
        }
    }
}

impl std::fmt::Display for TvVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for TvVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TvVariant::ALL
            .iter()
            .find(|v| v.tag() == s)
            .copied()
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown tv variant {s:?} (expected one of: {})",
                    TvVariant::ALL.map(|v| v.tag()).join(", ")
                ))
            })
    }
}

/// Which denominator the dual projection uses: clamp-to-ball (`MaxOne`) or
/// the smoothed `1 + step*|direction|` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionRule {
    #[default]
    MaxOne,
    Additive,
}

/// Knobs shared by all inner denoisers.
#[derive(Debug, Clone)]
pub struct DenoiseConfig {
    /// Regularization weight; zero turns the dual solvers into the identity.
    pub lambda: f64,
    /// Number of dual updates per call.
    pub in_iter: usize,
    /// Step divisor of the clipping solver.
    pub clip_alpha: f64,
    /// Dual step of the fixed-point solver; must not exceed 1/4.
    pub cham_dt: f64,
    pub projection_rule: ProjectionRule,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            in_iter: 5,
            clip_alpha: 8.0,
            cham_dt: 0.125,
            projection_rule: ProjectionRule::MaxOne,
        }
    }
}

impl DenoiseConfig {
    pub fn new(lambda: f64, in_iter: usize) -> Self {
        Self {
            lambda,
            in_iter,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Parameter(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.in_iter < 1 {
            return Err(Error::Parameter("in_iter must be >= 1".into()));
        }
        if !(self.clip_alpha > 0.0) {
            return Err(Error::Parameter(format!(
                "clip_alpha must be positive, got {}",
                self.clip_alpha
            )));
        }
        if !(self.cham_dt > 0.0 && self.cham_dt <= 0.25) {
            return Err(Error::Parameter(format!(
                "cham_dt must lie in (0, 1/4], got {}",
                self.cham_dt
            )));
        }
        Ok(())
    }
}

/// Horizontal and vertical dual variables for a whole cube. The horizontal
/// field is one column narrower than the cube, the vertical one one row
/// shorter.
#[derive(Debug, Clone, PartialEq)]
pub struct DualField {
    pub(crate) h: Array3<f64>,
    pub(crate) v: Array3<f64>,
}

impl DualField {
    pub fn zeros(n_x: usize, n_y: usize, frames: usize) -> Self {
        Self {
            h: Array3::zeros((frames, n_x, n_y.saturating_sub(1))),
            v: Array3::zeros((frames, n_x.saturating_sub(1), n_y)),
        }
    }

    pub fn zeros_like(z: &VideoCube) -> Self {
        Self::zeros(z.n_x(), z.n_y(), z.frames())
    }

    pub fn from_parts(h: Array3<f64>, v: Array3<f64>) -> Result<Self> {
        let (fh, n_x, hw) = h.dim();
        let (fv, vh, n_y) = v.dim();
        if fh != fv || hw + 1 != n_y || vh + 1 != n_x {
            return Err(Error::Dimension(format!(
                "dual field shapes disagree: h is {:?}, v is {:?}",
                h.dim(),
                v.dim()
            )));
        }
        Ok(Self { h, v })
    }

    pub fn h(&self) -> &Array3<f64> {
        &self.h
    }

    pub fn v(&self) -> &Array3<f64> {
        &self.v
    }

    pub(crate) fn matches(&self, z: &VideoCube) -> bool {
        self.h.dim() == (z.frames(), z.n_x(), z.n_y() - 1)
            && self.v.dim() == (z.frames(), z.n_x() - 1, z.n_y())
    }

    /// Largest amount by which the field leaves the unit ball of `norm`;
    /// zero or negative means feasible.
    pub fn ball_violation(&self, norm: TvNorm) -> f64 {
        let (frames, n_x, _) = self.h.dim();
        let n_y = self.v.dim().2;
        let mut worst = f64::NEG_INFINITY;
        match norm {
            TvNorm::Atv => {
                for w in self.h.iter().chain(self.v.iter()) {
                    worst = worst.max(w.abs() - 1.0);
                }
            }
            TvNorm::Itv2d => {
                for k in 0..frames {
                    for i in 0..n_x {
                        for j in 0..n_y {
                            worst = worst.max(self.magnitude_at(k, i, j).sqrt() - 1.0);
                        }
                    }
                }
            }
            TvNorm::Itv3d => {
                for i in 0..n_x {
                    for j in 0..n_y {
                        let mut sum = 0.0;
                        for k in 0..frames {
                            sum += self.magnitude_at(k, i, j);
                        }
                        worst = worst.max(sum.sqrt() - 1.0);
                    }
                }
            }
        }
        if worst == f64::NEG_INFINITY {
            0.0
        } else {
            worst
        }
    }

    /// Squared component magnitude at a grid location, with components
    /// missing near the boundary reading as zero.
    fn magnitude_at(&self, k: usize, i: usize, j: usize) -> f64 {
        let (_, n_x, hw) = self.h.dim();
        let n_y = hw + 1;
        let hv = if j + 1 < n_y { self.h[[k, i, j]] } else { 0.0 };
        let vv = if i + 1 < n_x { self.v[[k, i, j]] } else { 0.0 };
        hv * hv + vv * vv
    }
}

/// Evaluates the selected TV norm of a cube.
pub fn tv_norm(x: &VideoCube, norm: TvNorm) -> f64 {
    let gh = grad::grad_h_cube(x.array().view());
    let gv = grad::grad_v_cube(x.array().view());
    match norm {
        TvNorm::Atv => {
            gh.iter().map(|v| v.abs()).sum::<f64>() + gv.iter().map(|v| v.abs()).sum::<f64>()
        }
        TvNorm::Itv2d => (0..x.frames())
            .map(|k| {
                let eh: f64 = gh
                    .index_axis(ndarray::Axis(0), k)
                    .iter()
                    .map(|v| v * v)
                    .sum();
                let ev: f64 = gv
                    .index_axis(ndarray::Axis(0), k)
                    .iter()
                    .map(|v| v * v)
                    .sum();
                (eh + ev).sqrt()
            })
            .sum(),
        TvNorm::Itv3d => {
            let total: f64 =
                gh.iter().map(|v| v * v).sum::<f64>() + gv.iter().map(|v| v * v).sum::<f64>();
            total.sqrt()
        }
    }
}

/// Runs the denoiser selected by `variant` with duals starting at zero.
pub fn denoise(z: &VideoCube, variant: TvVariant, cfg: &DenoiseConfig) -> Result<VideoCube> {
    match variant.solver() {
        InnerSolver::Clip => denoise_clip(z, cfg),
        InnerSolver::Cham => denoise_chambolle(z, variant.norm(), cfg),
        InnerSolver::Fgp => denoise_fgp(z, variant.norm(), cfg),
    }
}

/// Like [`denoise`] but reusing caller-held dual state across calls.
pub fn denoise_warm(
    z: &VideoCube,
    variant: TvVariant,
    cfg: &DenoiseConfig,
    duals: &mut DualField,
) -> Result<VideoCube> {
    match variant.solver() {
        InnerSolver::Clip => denoise_clip_warm(z, cfg, duals),
        InnerSolver::Cham => denoise_chambolle_warm(z, variant.norm(), cfg, duals),
        InnerSolver::Fgp => denoise_fgp_warm(z, variant.norm(), cfg, duals),
    }
}

/// Projects candidate duals onto the unit ball of `norm`. On entry `duals`
/// holds the unprojected candidates `w + step * direction` and `steps`
/// holds `step * direction` (used by the additive denominator rule).
pub fn project_dual_ball(
    duals: &mut DualField,
    steps: &DualField,
    norm: TvNorm,
    rule: ProjectionRule,
) {
    let (frames, n_x, hw) = duals.h.dim();
    let n_y = duals.v.dim().2;
    debug_assert_eq!(steps.h.dim(), duals.h.dim());
    debug_assert_eq!(steps.v.dim(), duals.v.dim());
    match (norm, rule) {
        (TvNorm::Atv, ProjectionRule::MaxOne) => {
            duals.h.mapv_inplace(|t| t / t.abs().max(1.0));
            duals.v.mapv_inplace(|t| t / t.abs().max(1.0));
        }
        (TvNorm::Atv, ProjectionRule::Additive) => {
            ndarray::Zip::from(&mut duals.h)
                .and(&steps.h)
                .for_each(|w, &s| *w /= 1.0 + s.abs());
            ndarray::Zip::from(&mut duals.v)
                .and(&steps.v)
                .for_each(|w, &s| *w /= 1.0 + s.abs());
        }
        (TvNorm::Itv2d, rule) => {
            for k in 0..frames {
                for i in 0..n_x {
                    for j in 0..n_y {
                        let has_h = j < hw;
                        let has_v = i + 1 < n_x;
                        let denom = match rule {
                            ProjectionRule::MaxOne => {
                                joint_mag(&duals.h, &duals.v, k, i, j, has_h, has_v).max(1.0)
                            }
                            ProjectionRule::Additive => {
                                1.0 + joint_mag(&steps.h, &steps.v, k, i, j, has_h, has_v)
                            }
                        };
                        if has_h {
                            duals.h[[k, i, j]] /= denom;
                        }
                        if has_v {
                            duals.v[[k, i, j]] /= denom;
                        }
                    }
                }
            }
        }
        (TvNorm::Itv3d, rule) => {
            for i in 0..n_x {
                for j in 0..n_y {
                    let has_h = j < hw;
                    let has_v = i + 1 < n_x;
                    let aggregate = |h: &Array3<f64>, v: &Array3<f64>| -> f64 {
                        let mut sum = 0.0;
                        for k in 0..frames {
                            if has_h {
                                let t = h[[k, i, j]];
                                sum += t * t;
                            }
                            if has_v {
                                let t = v[[k, i, j]];
                                sum += t * t;
                            }
                        }
                        sum.sqrt()
                    };
                    let denom = match rule {
                        ProjectionRule::MaxOne => aggregate(&duals.h, &duals.v).max(1.0),
                        ProjectionRule::Additive => 1.0 + aggregate(&steps.h, &steps.v),
                    };
                    for k in 0..frames {
                        if has_h {
                            duals.h[[k, i, j]] /= denom;
                        }
                        if has_v {
                            duals.v[[k, i, j]] /= denom;
                        }
                    }
                }
            }
        }
    }
}

fn joint_mag(
    h: &Array3<f64>,
    v: &Array3<f64>,
    k: usize,
    i: usize,
    j: usize,
    has_h: bool,
    has_v: bool,
) -> f64 {
    let hv = if has_h { h[[k, i, j]] } else { 0.0 };
    let vv = if has_v { v[[k, i, j]] } else { 0.0 };
    (hv * hv + vv * vv).sqrt()
}
