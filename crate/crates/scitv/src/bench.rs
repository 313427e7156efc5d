//! Benchmark grid runner: datasets, the framework x TV-variant grid, and
//! CSV reporting.
//!
//! A dataset couples one mask stack with one or more coded measurements
//! (one per group of `frames` ground-truth frames) and, for simulated data,
//! the ground truth itself. Reports are written as long-format CSV whose
//! `cell` rows walk the grid in table order (framework rows, variant
//! columns, datasets within a cell); wall-clock runtime is isolated in the
//! final column so reports from identical runs are comparable byte-for-byte
//! after stripping it.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use ndarray::Axis;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{load_cube, load_tensor, Tensor};
use crate::metrics::psnr;
use crate::sensing::{MaskCube, Measurement, SensingOperator};
use crate::sim::simulate_measurement;
use crate::solve::{default_in_iter, solve_on, Framework, SolveConfig};
use crate::tensor::{Frame, VideoCube};
use crate::tv::TvVariant;

/// One benchmark input: masks, measurements, optional ground truth.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub masks: MaskCube,
    /// One coded snapshot per group of `masks.frames()` truth frames.
    pub measurements: Vec<Measurement>,
    pub truth: Option<VideoCube>,
    /// Peak value the data was divided by on ingestion.
    pub peak: f64,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        masks: MaskCube,
        measurements: Vec<Measurement>,
        truth: Option<VideoCube>,
        peak: f64,
    ) -> Result<Self> {
        let name = name.into();
        if measurements.is_empty() {
            return Err(Error::Dimension(format!(
                "dataset {name}: needs at least one measurement"
            )));
        }
        for m in &measurements {
            if m.frame().n_x() != masks.n_x() || m.frame().n_y() != masks.n_y() {
                return Err(Error::Dimension(format!(
                    "dataset {name}: measurement is {}x{}, masks are {}x{}",
                    m.frame().n_x(),
                    m.frame().n_y(),
                    masks.n_x(),
                    masks.n_y()
                )));
            }
        }
        if let Some(t) = &truth {
            let want = masks.frames() * measurements.len();
            if t.n_x() != masks.n_x() || t.n_y() != masks.n_y() || t.frames() != want {
                return Err(Error::Dimension(format!(
                    "dataset {name}: truth is {}x{}x{}, expected {}x{}x{}",
                    t.n_x(),
                    t.n_y(),
                    t.frames(),
                    masks.n_x(),
                    masks.n_y(),
                    want
                )));
            }
        }
        Ok(Self {
            name,
            masks,
            measurements,
            truth,
            peak,
        })
    }

    /// Builds a simulated dataset: noiseless measurements derived from the
    /// truth, one per group of `masks.frames()` frames.
    pub fn simulated(name: impl Into<String>, truth: VideoCube, masks: MaskCube) -> Result<Self> {
        let b = masks.frames();
        if truth.frames() % b != 0 {
            return Err(Error::Dimension(format!(
                "truth frame count {} is not a multiple of the mask frame count {}",
                truth.frames(),
                b
            )));
        }
        let groups = truth.frames() / b;
        let mut measurements = Vec::with_capacity(groups);
        for g in 0..groups {
            let chunk = truth
                .array()
                .slice(ndarray::s![g * b..(g + 1) * b, .., ..])
                .to_owned();
            let chunk = VideoCube::wrap(chunk);
            measurements.push(simulate_measurement(&chunk, &masks, 0.0, 0)?);
        }
        Dataset::new(name, masks, measurements, Some(truth), 1.0)
    }

    /// Loads `<dir>/<name>_masks.scit` plus optional `<name>_truth.scit`,
    /// `<name>_meas.scit` (rank 2 for one group, rank 3 for several) and
    /// `<name>_peak.txt`. Truth and measurements are divided by the peak.
    pub fn load(dir: impl AsRef<Path>, name: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let masks = MaskCube::from_cube(load_cube(dir.join(format!("{name}_masks.scit")))?)?;

        let peak_path = dir.join(format!("{name}_peak.txt"));
        let peak = if peak_path.exists() {
            let text = std::fs::read_to_string(&peak_path)?;
            let p: f64 = text
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{}: not a number", peak_path.display())))?;
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::Config(format!(
                    "{}: peak must be a positive number",
                    peak_path.display()
                )));
            }
            p
        } else {
            1.0
        };

        let truth_path = dir.join(format!("{name}_truth.scit"));
        let truth = if truth_path.exists() {
            let mut cube = load_cube(truth_path)?;
            cube.array_mut().mapv_inplace(|v| v / peak);
            Some(cube)
        } else {
            None
        };

        let meas_path = dir.join(format!("{name}_meas.scit"));
        let measurements = if meas_path.exists() {
            let scale = |mut f: Frame| {
                f.array_mut().mapv_inplace(|v| v / peak);
                Measurement::new(f)
            };
            match load_tensor(meas_path)? {
                Tensor::Frame(f) => vec![scale(f)],
                Tensor::Cube(stack) => (0..stack.frames())
                    .map(|g| scale(stack.frame(g)))
                    .collect(),
            }
        } else {
            let truth = truth.as_ref().ok_or_else(|| {
                Error::Config(format!(
                    "dataset {name}: provide either {name}_meas.scit or {name}_truth.scit"
                ))
            })?;
            return Dataset::simulated(name, truth.clone(), masks);
        };

        Dataset::new(name, masks, measurements, truth, peak)
    }

    /// Finds every `<name>_masks.scit` under `dir` and loads it as a
    /// dataset, sorted by name.
    pub fn discover(dir: impl AsRef<Path>) -> Result<Vec<Dataset>> {
        let dir = dir.as_ref();
        let mut names = BTreeSet::new();
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            if let Some(fname) = entry.file_name().to_str() {
                if let Some(base) = fname.strip_suffix("_masks.scit") {
                    names.insert(base.to_string());
                }
            }
        }
        names.iter().map(|n| Dataset::load(dir, n)).collect()
    }
}

/// All 28 grid combinations in table order: framework rows, variant columns.
pub fn full_grid() -> Vec<(Framework, TvVariant)> {
    let mut grid = Vec::with_capacity(28);
    for framework in Framework::ALL {
        for tv in TvVariant::ALL {
            grid.push((framework, tv));
        }
    }
    grid
}

/// Parses `full` or a comma-separated list of `framework:tv` pairs.
pub fn parse_grid(spec: &str) -> Result<Vec<(Framework, TvVariant)>> {
    if spec == "full" {
        return Ok(full_grid());
    }
    spec.split(',')
        .map(|item| {
            let (fw, tv) = item.trim().split_once(':').ok_or_else(|| {
                Error::Parameter(format!(
                    "grid entry {item:?} is not framework:tv (e.g. gap:atv-fgp)"
                ))
            })?;
            Ok((fw.parse()?, tv.parse()?))
        })
        .collect()
}

/// Solver settings shared by every cell of a grid run.
#[derive(Debug, Clone)]
pub struct BenchDefaults {
    pub lambda: f64,
    pub rho: f64,
    pub max_iter: usize,
    /// Dual updates per denoise call; `None` selects the per-variant rule.
    pub in_iter: Option<usize>,
    pub twist_xi1: f64,
}

impl Default for BenchDefaults {
    fn default() -> Self {
        Self {
            lambda: 0.05,
            rho: 0.01,
            max_iter: 100,
            in_iter: None,
            twist_xi1: 1e-4,
        }
    }
}

impl BenchDefaults {
    pub fn config_for(&self, framework: Framework, tv: TvVariant) -> SolveConfig {
        let mut cfg = SolveConfig::new(framework, tv);
        cfg.lambda = self.lambda;
        cfg.rho = self.rho;
        cfg.max_iter = self.max_iter;
        cfg.in_iter = self.in_iter.unwrap_or_else(|| default_in_iter(tv));
        cfg.twist_xi1 = self.twist_xi1;
        cfg.trace_psnr = false;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCell {
    pub framework: Framework,
    pub tv: TvVariant,
    pub dataset: String,
    pub psnr_db: f64,
    pub runtime_s: f64,
}

/// Results of a grid run. Averages and maxima are always recomputed from
/// the cells rather than stored.
#[derive(Debug, Clone)]
pub struct BenchReport {
    grid: Vec<(Framework, TvVariant)>,
    datasets: Vec<String>,
    cells: Vec<BenchCell>,
    skipped: Vec<String>,
}

impl BenchReport {
    pub fn cells(&self) -> &[BenchCell] {
        &self.cells
    }

    pub fn skipped(&self) -> &[String] {
        &self.skipped
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn grid(&self) -> &[(Framework, TvVariant)] {
        &self.grid
    }

    pub fn cell(&self, framework: Framework, tv: TvVariant, dataset: &str) -> Option<&BenchCell> {
        self.cells
            .iter()
            .find(|c| c.framework == framework && c.tv == tv && c.dataset == dataset)
    }

    /// Mean PSNR of one grid entry across all datasets.
    pub fn average_over_datasets(&self, framework: Framework, tv: TvVariant) -> Option<f64> {
        let vals: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.framework == framework && c.tv == tv)
            .map(|c| c.psnr_db)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Best variant for a framework on one dataset (the grid's "bold" mark).
    pub fn best_variant_for(&self, framework: Framework, dataset: &str) -> Option<&BenchCell> {
        self.cells
            .iter()
            .filter(|c| c.framework == framework && c.dataset == dataset)
            .max_by(|a, b| a.psnr_db.total_cmp(&b.psnr_db))
    }

    /// Best grid entry overall on one dataset (the grid's "red" mark).
    pub fn best_overall_for(&self, dataset: &str) -> Option<&BenchCell> {
        self.cells
            .iter()
            .filter(|c| c.dataset == dataset)
            .max_by(|a, b| a.psnr_db.total_cmp(&b.psnr_db))
    }

    /// Grid entry with the best dataset-average PSNR.
    pub fn best_average(&self) -> Option<(Framework, TvVariant, f64)> {
        self.grid
            .iter()
            .filter_map(|&(fw, tv)| self.average_over_datasets(fw, tv).map(|a| (fw, tv, a)))
            .max_by(|a, b| a.2.total_cmp(&b.2))
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "section,framework,tv,dataset,psnr_db,runtime_s")?;
        for c in &self.cells {
            writeln!(
                w,
                "cell,{},{},{},{:.4},{:.6}",
                c.framework, c.tv, c.dataset, c.psnr_db, c.runtime_s
            )?;
        }
        for &(fw, tv) in &self.grid {
            if let Some(avg) = self.average_over_datasets(fw, tv) {
                writeln!(w, "average,{fw},{tv},all,{avg:.4},")?;
            }
        }
        let frameworks: Vec<Framework> = {
            let mut seen = Vec::new();
            for &(fw, _) in &self.grid {
                if !seen.contains(&fw) {
                    seen.push(fw);
                }
            }
            seen
        };
        for fw in &frameworks {
            for ds in &self.datasets {
                if let Some(c) = self.best_variant_for(*fw, ds) {
                    writeln!(w, "best_variant,{},{},{},{:.4},", fw, c.tv, ds, c.psnr_db)?;
                }
            }
        }
        for ds in &self.datasets {
            if let Some(c) = self.best_overall_for(ds) {
                writeln!(
                    w,
                    "best_overall,{},{},{},{:.4},",
                    c.framework, c.tv, ds, c.psnr_db
                )?;
            }
        }
        if let Some((fw, tv, avg)) = self.best_average() {
            writeln!(w, "best_average,{fw},{tv},all,{avg:.4},")?;
        }
        for name in &self.skipped {
            writeln!(w, "skipped,,,{name},,")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to vec");
        String::from_utf8(buf).expect("csv is utf8")
    }
}

/// Runs every grid entry on every dataset that has ground truth. Cells run
/// in parallel (bounded by `workers` when given); results are gathered in
/// deterministic grid order regardless of scheduling.
pub fn run_benchmark(
    datasets: &[Dataset],
    grid: &[(Framework, TvVariant)],
    defaults: &BenchDefaults,
    workers: Option<usize>,
) -> Result<BenchReport> {
    let mut skipped = Vec::new();
    let mut usable = Vec::new();
    for ds in datasets {
        if ds.truth.is_some() {
            usable.push(ds);
        } else {
            skipped.push(ds.name.clone());
        }
    }

    let operators: Vec<SensingOperator> = usable
        .iter()
        .map(|ds| SensingOperator::new(ds.masks.clone()))
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for &(fw, tv) in grid {
        for (di, _) in usable.iter().enumerate() {
            jobs.push((fw, tv, di));
        }
    }

    let run_cell = |&(fw, tv, di): &(Framework, TvVariant, usize)| -> Result<BenchCell> {
        let ds = usable[di];
        let op = &operators[di];
        let cfg = defaults.config_for(fw, tv);
        cfg.validate()?;
        let start = std::time::Instant::now();
        let recon = reconstruct_groups(ds, op, &cfg)?;
        let runtime_s = start.elapsed().as_secs_f64();
        let truth = ds.truth.as_ref().expect("filtered above");
        Ok(BenchCell {
            framework: fw,
            tv,
            dataset: ds.name.clone(),
            psnr_db: psnr(truth, &recon)?,
            runtime_s,
        })
    };

    let cells: Result<Vec<BenchCell>> = match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            pool.install(|| jobs.par_iter().map(run_cell).collect())
        }
        None => jobs.par_iter().map(run_cell).collect(),
    };

    Ok(BenchReport {
        grid: grid.to_vec(),
        datasets: usable.iter().map(|d| d.name.clone()).collect(),
        cells: cells?,
        skipped,
    })
}

/// Reconstructs every measurement group of a dataset and stacks the results
/// back into a full-length cube.
pub fn reconstruct_groups(
    ds: &Dataset,
    op: &SensingOperator,
    cfg: &SolveConfig,
) -> Result<VideoCube> {
    let mut parts = Vec::with_capacity(ds.measurements.len());
    for meas in &ds.measurements {
        let (cube, _) = solve_on(meas, op, cfg, &mut |_, _| {})?;
        parts.push(cube.into_array());
    }
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    let stacked = ndarray::concatenate(Axis(0), &views)
        .map_err(|e| Error::Dimension(format!("stacking groups: {e}")))?;
    Ok(VideoCube::wrap(stacked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;

    fn small_dataset(name: &str, seed: u64) -> Dataset {
        let truth =
            sim::generate_synthetic_scene(8, 8, 4, seed, sim::SceneKind::MovingSquare).unwrap();
        let masks = sim::generate_masks(8, 8, 2, seed + 1, 0.5).unwrap();
        Dataset::simulated(name, truth, masks).unwrap()
    }

    #[test]
    fn simulated_dataset_splits_into_groups_consistently() {
        let ds = small_dataset("toy", 3);
        assert_eq!(ds.measurements.len(), 2);
        let op = SensingOperator::new(ds.masks.clone()).unwrap();
        let truth = ds.truth.as_ref().unwrap();
        for (g, meas) in ds.measurements.iter().enumerate() {
            let chunk = VideoCube::wrap(
                truth
                    .array()
                    .slice(ndarray::s![g * 2..(g + 1) * 2, .., ..])
                    .to_owned(),
            );
            let direct = op.forward(&chunk).unwrap();
            assert_eq!(direct.frame(), meas.frame());
        }
    }

    #[test]
    fn single_cell_grid_produces_one_record() {
        let ds = small_dataset("toy", 5);
        let grid = parse_grid("gap:atv-fgp").unwrap();
        let mut defaults = BenchDefaults::default();
        defaults.max_iter = 5;
        let report = run_benchmark(&[ds], &grid, &defaults, Some(1)).unwrap();
        assert_eq!(report.cells().len(), 1);
        assert!(report.cells()[0].psnr_db.is_finite());
    }

    #[test]
    fn datasets_without_truth_are_skipped_with_warning_record() {
        let with = small_dataset("sim", 1);
        let masks = sim::generate_masks(8, 8, 2, 9, 0.5).unwrap();
        let meas = vec![Measurement::new(Frame::zeros(8, 8).unwrap())];
        let without = Dataset::new("real", masks, meas, None, 1.0).unwrap();
        let grid = parse_grid("gap:atv-cham").unwrap();
        let mut defaults = BenchDefaults::default();
        defaults.max_iter = 2;
        let report = run_benchmark(&[with, without], &grid, &defaults, Some(1)).unwrap();
        assert_eq!(report.skipped(), &["real".to_string()]);
        assert!(report.to_csv_string().contains("skipped,,,real,,"));
    }

    #[test]
    fn averages_are_recomputed_means_of_cells() {
        let a = small_dataset("a", 1);
        let b = small_dataset("b", 2);
        let grid = parse_grid("gap:atv-fgp,admm:itv3d-fgp").unwrap();
        let mut defaults = BenchDefaults::default();
        defaults.max_iter = 3;
        let report = run_benchmark(&[a, b], &grid, &defaults, Some(2)).unwrap();
        for &(fw, tv) in report.grid() {
            let cells: Vec<f64> = report
                .cells()
                .iter()
                .filter(|c| c.framework == fw && c.tv == tv)
                .map(|c| c.psnr_db)
                .collect();
            let mean = cells.iter().sum::<f64>() / cells.len() as f64;
            let got = report.average_over_datasets(fw, tv).unwrap();
            assert!((mean - got).abs() <= 1e-12);
        }
    }

    #[test]
    fn report_bytes_identical_modulo_runtime_column() {
        let ds = small_dataset("toy", 8);
        let grid = parse_grid("fista:atv-fgp,gap:itv2d-cham").unwrap();
        let mut defaults = BenchDefaults::default();
        defaults.max_iter = 3;
        let r1 = run_benchmark(&[ds.clone()], &grid, &defaults, Some(2)).unwrap();
        let r2 = run_benchmark(&[ds], &grid, &defaults, Some(1)).unwrap();
        let strip = |csv: &str| -> String {
            csv.lines()
                .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&r1.to_csv_string()), strip(&r2.to_csv_string()));
    }

    #[test]
    fn full_grid_is_28_entries_in_table_order() {
        let grid = full_grid();
        assert_eq!(grid.len(), 28);
        assert_eq!(grid[0], (Framework::Fista, "atv-clip".parse().unwrap()));
        assert_eq!(grid[27], (Framework::Admm, "itv3d-fgp".parse().unwrap()));
        assert!(parse_grid("nonsense").is_err());
        assert!(parse_grid("gap:atv-fgp,bogus:atv-cham").is_err());
    }
}
