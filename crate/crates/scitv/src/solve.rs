//! Outer reconstruction frameworks.
//!
//! All four share the same skeleton: a data step built from the sensing
//! operator, then a pluggable TV denoise step. They differ in how the data
//! step is damped and how iterates are combined:
//!
//! * accelerated proximal gradient (`Fista`): gradient step of length `1/L`
//!   followed by the prox at weight `lambda/L` and Nesterov momentum;
//! * two-step iterative shrinkage (`Twist`): normalized gradient step,
//!   denoise, then an affine combination of the last two iterates;
//! * alternating projection (`Gap`): exact Euclidean projection onto the
//!   measurement-consistent set, then denoise;
//! * consensus splitting (`Admm`): closed-form quadratic data update with
//!   weight `rho`, denoise, dual ascent. As `rho` tends to zero the data
//!   update tends to the exact projection, recovering `Gap`.
//!
//! Every solve runs a fixed iteration budget (no early exit) so that traces
//! from different frameworks stay comparable.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::metrics;
use crate::sensing::{MaskCube, Measurement, SensingOperator};
use crate::tensor::{Frame, VideoCube};
use crate::tv::{self, DenoiseConfig, DualField, InnerSolver, TvVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Framework {
    Fista,
    Twist,
    Gap,
    Admm,
}

impl Framework {
    pub const ALL: [Framework; 4] = [
        Framework::Fista,
        Framework::Twist,
        Framework::Gap,
        Framework::Admm,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Framework::Fista => "fista",
            Framework::Twist => "twist",
            Framework::Gap => "gap",
            Framework::Admm => "admm",
        }
    }
}

impl std::fmt::Display for Framework {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Framework {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Framework::ALL
            .iter()
            .find(|f| f.tag() == s)
            .copied()
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown solver {s:?} (expected one of: fista, twist, gap, admm)"
                ))
            })
    }
}

/// Full description of one reconstruction run.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub framework: Framework,
    pub tv: TvVariant,
    /// TV weight. Interpreted per framework (see module docs).
    pub lambda: f64,
    /// Quadratic coupling weight; only meaningful for `Admm`.
    pub rho: f64,
    pub max_iter: usize,
    pub in_iter: usize,
    /// Spectral floor of the two-step solver's parameter rule.
    pub twist_xi1: f64,
    /// Keep dual variables across outer iterations instead of restarting
    /// them at zero each denoise call.
    pub warm_start: bool,
    pub trace_psnr: bool,
    pub reference: Option<VideoCube>,
}

/// Default number of dual updates per denoise call: the accelerated solver
/// reaches a usable prox in two, the others want five.
pub fn default_in_iter(tv: TvVariant) -> usize {
    if tv.solver() == InnerSolver::Fgp {
        2
    } else {
        5
    }
}

impl SolveConfig {
    pub fn new(framework: Framework, tv: TvVariant) -> Self {
        Self {
            framework,
            tv,
            lambda: 0.05,
            rho: 0.01,
            max_iter: 100,
            in_iter: default_in_iter(tv),
            twist_xi1: 1e-4,
            warm_start: false,
            trace_psnr: true,
            reference: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Parameter(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Parameter("max_iter must be >= 1".into()));
        }
        if self.in_iter < 1 {
            return Err(Error::Parameter("in_iter must be >= 1".into()));
        }
        if self.framework == Framework::Admm && (!self.rho.is_finite() || self.rho <= 0.0) {
            return Err(Error::Parameter(format!(
                "admm requires rho > 0, got {}",
                self.rho
            )));
        }
        if self.framework == Framework::Twist
            && !(self.twist_xi1 > 0.0 && self.twist_xi1 <= 1.0)
        {
            return Err(Error::Parameter(format!(
                "twist_xi1 must lie in (0, 1], got {}",
                self.twist_xi1
            )));
        }
        Ok(())
    }

    fn denoise_config(&self, lambda: f64) -> DenoiseConfig {
        DenoiseConfig {
            lambda,
            in_iter: self.in_iter,
            ..DenoiseConfig::default()
        }
    }
}

/// One row of a solve trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iteration: usize,
    /// `0.5 * ||y - A x||^2` at the recorded estimate.
    pub fidelity: f64,
    pub tv_value: f64,
    pub psnr: Option<f64>,
    pub elapsed_ms: f64,
}

/// Per-iteration record of a solve; one entry per outer iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    records: Vec<IterRecord>,
}

impl IterationTrace {
    pub fn records(&self) -> &[IterRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_psnr(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.psnr)
    }

    pub fn psnr_at(&self, iteration: usize) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.iteration == iteration)
            .and_then(|r| r.psnr)
    }

    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "iteration,fidelity,tv_value,psnr,elapsed_ms")?;
        for r in &self.records {
            let psnr = r.psnr.map(|p| format!("{p:.6}")).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{:.3}",
                r.iteration, r.fidelity, r.tv_value, psnr, r.elapsed_ms
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to vec");
        String::from_utf8(buf).expect("csv is utf8")
    }
}

type Observer<'a> = &'a mut dyn FnMut(usize, &VideoCube);

struct Tracer<'a> {
    op: &'a SensingOperator,
    y: &'a Measurement,
    cfg: &'a SolveConfig,
    start: Instant,
    trace: IterationTrace,
}

impl<'a> Tracer<'a> {
    fn new(op: &'a SensingOperator, y: &'a Measurement, cfg: &'a SolveConfig) -> Self {
        Self {
            op,
            y,
            cfg,
            start: Instant::now(),
            trace: IterationTrace::default(),
        }
    }

    fn record(&mut self, iteration: usize, est: &VideoCube) -> Result<()> {
        let ax = self.op.forward(est)?;
        let fidelity = 0.5
            * self
                .y
                .frame()
                .array()
                .iter()
                .zip(ax.frame().array().iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        let tv_value = tv::tv_norm(est, self.cfg.tv.norm());
        let psnr = match (&self.cfg.reference, self.cfg.trace_psnr) {
            (Some(reference), true) => Some(metrics::psnr(reference, est)?),
            _ => None,
        };
        self.trace.records.push(IterRecord {
            iteration,
            fidelity,
            tv_value,
            psnr,
            elapsed_ms: self.start.elapsed().as_secs_f64() * 1e3,
        });
        Ok(())
    }
}

pub(crate) fn tau_next(tau: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * tau * tau).sqrt())
}

fn denoise_step(
    z: &VideoCube,
    cfg: &SolveConfig,
    dcfg: &DenoiseConfig,
    duals: &mut Option<DualField>,
) -> Result<VideoCube> {
    match duals {
        Some(d) => tv::denoise_warm(z, cfg.tv, dcfg, d),
        None => tv::denoise(z, cfg.tv, dcfg),
    }
}

fn warm_duals(cfg: &SolveConfig, like: &VideoCube) -> Option<DualField> {
    cfg.warm_start.then(|| DualField::zeros_like(like))
}

/// `x + scale * A^T (y - A x)`.
fn gradient_step(
    op: &SensingOperator,
    x: &VideoCube,
    y: &Measurement,
    scale: f64,
) -> Result<VideoCube> {
    let ax = op.forward(x)?;
    let mut resid = y.frame().array().clone();
    resid -= ax.frame().array();
    resid *= scale;
    let corr = op.adjoint(&Measurement::new(Frame::wrap(resid)))?;
    let mut out = x.array().clone();
    out += corr.array();
    Ok(VideoCube::wrap(out))
}

fn solve_fista_inner(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
    observer: Observer<'_>,
) -> Result<(VideoCube, IterationTrace)> {
    let lipschitz = op.lipschitz();
    let dcfg = cfg.denoise_config(cfg.lambda / lipschitz);
    let mut tracer = Tracer::new(op, y, cfg);

    let mut x_prev = op.adjoint(y)?;
    let mut theta = x_prev.clone();
    let mut x = x_prev.clone();
    let mut tau = 1.0f64;
    let mut duals = warm_duals(cfg, &theta);

    for t in 1..=cfg.max_iter {
        let z = gradient_step(op, &theta, y, 1.0 / lipschitz)?;
        x = denoise_step(&z, cfg, &dcfg, &mut duals)?;
        let tau1 = tau_next(tau);
        let coef = (tau - 1.0) / tau1;
        let mut next_theta = x.array().clone();
        ndarray::Zip::from(&mut next_theta)
            .and(x_prev.array())
            .for_each(|nt, &xp| *nt += coef * (*nt - xp));
        theta = VideoCube::wrap(next_theta);
        x_prev = x.clone();
        tau = tau1;
        tracer.record(t, &x)?;
        observer(t, &x);
    }
    Ok((x, tracer.trace))
}

fn solve_twist_inner(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
    observer: Observer<'_>,
) -> Result<(VideoCube, IterationTrace)> {
    // Two-step parameters from the spectral floor xi1, assuming the data
    // step is normalized so the Gram spectrum lies in [xi1, 1].
    let xi1 = cfg.twist_xi1;
    let rho_bar = (1.0 - xi1.sqrt()) / (1.0 + xi1.sqrt());
    let alpha = rho_bar * rho_bar + 1.0;
    let beta = 2.0 * alpha / (1.0 + xi1);
    let lipschitz = op.lipschitz();

    let dcfg = cfg.denoise_config(cfg.lambda);
    let mut tracer = Tracer::new(op, y, cfg);

    let mut x_prev = op.adjoint(y)?;
    let mut x = x_prev.clone();
    let mut duals = warm_duals(cfg, &x);

    for t in 1..=cfg.max_iter {
        let z = gradient_step(op, &x, y, 1.0 / lipschitz)?;
        let theta = denoise_step(&z, cfg, &dcfg, &mut duals)?;
        let mut next = theta.array().clone();
        ndarray::Zip::from(&mut next)
            .and(x.array())
            .and(x_prev.array())
            .for_each(|n, &xc, &xp| *n = (1.0 - alpha) * xp + (alpha - beta) * xc + beta * *n);
        x_prev = x;
        x = VideoCube::wrap(next);
        tracer.record(t, &x)?;
        observer(t, &x);
    }
    Ok((x, tracer.trace))
}

fn solve_gap_inner(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
    observer: Observer<'_>,
) -> Result<(VideoCube, IterationTrace)> {
    let dcfg = cfg.denoise_config(cfg.lambda);
    let mut tracer = Tracer::new(op, y, cfg);

    let mut theta = op.adjoint(y)?;
    let mut duals = warm_duals(cfg, &theta);

    for t in 1..=cfg.max_iter {
        let x = op.project_affine(&theta, y)?;
        theta = denoise_step(&x, cfg, &dcfg, &mut duals)?;
        tracer.record(t, &theta)?;
        observer(t, &theta);
    }
    Ok((theta, tracer.trace))
}

fn solve_admm_inner(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
    observer: Observer<'_>,
) -> Result<(VideoCube, IterationTrace)> {
    let dcfg = cfg.denoise_config(cfg.lambda);
    let mut tracer = Tracer::new(op, y, cfg);

    let mut theta = op.adjoint(y)?;
    let mut u = ndarray::Array3::<f64>::zeros(theta.array().raw_dim());
    let mut duals = warm_duals(cfg, &theta);

    for t in 1..=cfg.max_iter {
        let b = VideoCube::wrap(theta.array() - &u);
        let x = op.admm_x_update(&b, y, cfg.rho)?;
        let z = VideoCube::wrap(x.array() + &u);
        theta = denoise_step(&z, cfg, &dcfg, &mut duals)?;
        u += x.array();
        u -= theta.array();
        tracer.record(t, &theta)?;
        observer(t, &theta);
    }
    Ok((theta, tracer.trace))
}

pub fn solve_fista(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
) -> Result<(VideoCube, IterationTrace)> {
    cfg.validate()?;
    solve_fista_inner(y, op, cfg, &mut |_, _| {})
}

pub fn solve_twist(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
) -> Result<(VideoCube, IterationTrace)> {
    cfg.validate()?;
    solve_twist_inner(y, op, cfg, &mut |_, _| {})
}

pub fn solve_gap(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
) -> Result<(VideoCube, IterationTrace)> {
    cfg.validate()?;
    solve_gap_inner(y, op, cfg, &mut |_, _| {})
}

pub fn solve_admm(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
) -> Result<(VideoCube, IterationTrace)> {
    cfg.validate()?;
    solve_admm_inner(y, op, cfg, &mut |_, _| {})
}

/// Builds the sensing operator from `masks` and dispatches on the
/// configured framework. Deterministic for fixed inputs.
pub fn reconstruct(
    y: &Measurement,
    masks: &MaskCube,
    cfg: &SolveConfig,
) -> Result<(VideoCube, IterationTrace)> {
    reconstruct_with_observer(y, masks, cfg, &mut |_, _| {})
}

/// Like [`reconstruct`], invoking `observer` with each outer iterate. Used
/// for every-N-iterations frame snapshots; observation must not (and does
/// not) perturb the iterates.
pub fn reconstruct_with_observer(
    y: &Measurement,
    masks: &MaskCube,
    cfg: &SolveConfig,
    observer: Observer<'_>,
) -> Result<(VideoCube, IterationTrace)> {
    cfg.validate()?;
    let op = SensingOperator::new(masks.clone())?;
    solve_on(y, &op, cfg, observer)
}

pub(crate) fn solve_on(
    y: &Measurement,
    op: &SensingOperator,
    cfg: &SolveConfig,
    observer: Observer<'_>,
) -> Result<(VideoCube, IterationTrace)> {
    match cfg.framework {
        Framework::Fista => solve_fista_inner(y, op, cfg, observer),
        Framework::Twist => solve_twist_inner(y, op, cfg, observer),
        Framework::Gap => solve_gap_inner(y, op, cfg, observer),
        Framework::Admm => solve_admm_inner(y, op, cfg, observer),
    }
}
