//! Monte Carlo scans over chain length and band width.
//!
//! Every (cell, sample) job owns the stream `(cell_index << 32) | sample_index`
//! under the run seed, so results are independent of thread count and of the
//! order rayon happens to schedule jobs in. Cell indices enumerate the
//! configured grids in declaration order, outermost axis first.

use bandlab_core::fit::{fit_exponential_decay, fit_power_law, LineFit, ScalingFit};
use bandlab_core::lyapunov::corner_decay_rate;
use bandlab_core::model::ModelKind;
use bandlab_core::resolvent::{
    corner_log_norm_sample, resolvent_log_norm_sample, FractionalMomentParams, ResolventOptions,
    DEFAULT_CONDITION_CAP,
};
use bandlab_core::sampling::EntryField;
use bandlab_core::RngStream;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::{CliError, CliResult};

/// Highest admissible per-cell failure fraction for a cell to enter a fit.
pub const FIT_FAILURE_BUDGET: f64 = 0.01;

fn job_stream(seed: u64, cell: usize, sample: u64) -> RngStream {
    RngStream::with_index(seed, ((cell as u64) << 32) | sample)
}

fn check_samples(samples: u64) -> CliResult<()> {
    if samples < 30 {
        return Err(CliError::Usage(format!(
            "need at least 30 samples per cell, got {samples}"
        )));
    }
    if samples > u32::MAX as u64 {
        return Err(CliError::Usage(format!(
            "samples per cell must fit the 32-bit sample slot, got {samples}"
        )));
    }
    Ok(())
}

fn check_widths(widths: &[usize]) -> CliResult<()> {
    if widths.is_empty() {
        return Err(CliError::Usage("width list is empty".into()));
    }
    if widths.contains(&0) {
        return Err(CliError::Usage("band width must be at least 1".into()));
    }
    let mut seen = widths.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != widths.len() {
        return Err(CliError::Usage("width list has duplicates".into()));
    }
    Ok(())
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

// ---------------------------------------------------------------------------
// Corner decay scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DecayScanConfig {
    pub widths: Vec<usize>,
    pub blocks: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
    pub field: EntryField,
    pub keep_raw: bool,
}

#[derive(Debug, Clone)]
pub struct DecayCell {
    pub width: usize,
    pub n: usize,
    pub samples_ok: u64,
    pub failed: u64,
    pub mean_log_norm: f64,
    pub std_error: f64,
}

impl DecayCell {
    pub fn failure_fraction(&self) -> f64 {
        let total = self.samples_ok + self.failed;
        if total == 0 {
            1.0
        } else {
            self.failed as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecayFit {
    pub width: usize,
    pub mu_hat: f64,
    pub mu_std_error: f64,
    pub intercept: f64,
    pub rss: f64,
    pub cells_used: usize,
    /// Closed-form rate for this width and entry field.
    pub newman_mu: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone)]
pub struct DecayRawRow {
    pub width: usize,
    pub n: usize,
    pub sample_index: u64,
    pub log_norm: f64,
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct DecayScanResult {
    pub cells: Vec<DecayCell>,
    pub fits: Vec<DecayFit>,
    pub raw: Option<Vec<DecayRawRow>>,
}

fn fit_width_rate(
    width: usize,
    field: EntryField,
    cells: &[DecayCell],
) -> CliResult<Option<DecayFit>> {
    let points: Vec<(f64, f64, f64)> = cells
        .iter()
        .filter(|c| c.width == width && c.failure_fraction() < FIT_FAILURE_BUDGET)
        .map(|c| (c.n as f64, c.mean_log_norm, c.std_error))
        .collect();
    if points.len() < 3 {
        return Ok(None);
    }
    let LineFit {
        slope,
        slope_std_error,
        intercept,
        rss,
        points: used,
        ..
    } = fit_exponential_decay(&points)?;
    let newman_mu = corner_decay_rate(width, field)?;
    Ok(Some(DecayFit {
        width,
        mu_hat: slope,
        mu_std_error: slope_std_error,
        intercept,
        rss,
        cells_used: used,
        newman_mu,
        z_score: (slope - newman_mu) / slope_std_error,
    }))
}

pub fn run_decay_scan(cfg: &DecayScanConfig) -> CliResult<DecayScanResult> {
    check_widths(&cfg.widths)?;
    check_samples(cfg.samples)?;
    if cfg.blocks.is_empty() {
        return Err(CliError::Usage("block-count list is empty".into()));
    }
    if let Some(&n) = cfg.blocks.iter().find(|&&n| n < 2 || n % 2 != 0) {
        return Err(CliError::Usage(format!(
            "corner scans need even chain lengths of at least 2 blocks, got {n}"
        )));
    }
    let mut distinct = cfg.blocks.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(CliError::Usage(format!(
            "rate fits need at least 3 distinct chain lengths, got {}",
            distinct.len()
        )));
    }

    let grid: Vec<(usize, usize)> = cfg
        .widths
        .iter()
        .flat_map(|&w| cfg.blocks.iter().map(move |&n| (w, n)))
        .collect();
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|cell| (0..cfg.samples).map(move |s| (cell, s)))
        .collect();

    let outcomes: Vec<Option<f64>> = jobs
        .par_iter()
        .map(|&(cell, sample)| {
            let (w, n) = grid[cell];
            let stream = job_stream(cfg.seed, cell, sample);
            corner_log_norm_sample(n, w, cfg.field, &stream, DEFAULT_CONDITION_CAP).ok()
        })
        .collect();

    let mut cells = Vec::with_capacity(grid.len());
    let mut raw = cfg.keep_raw.then(Vec::new);
    for (cell, &(w, n)) in grid.iter().enumerate() {
        let slice = &outcomes[cell * cfg.samples as usize..(cell + 1) * cfg.samples as usize];
        let ok: Vec<f64> = slice.iter().flatten().copied().collect();
        let failed = cfg.samples - ok.len() as u64;
        let (mean, se) = if ok.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            mean_and_se(&ok)
        };
        cells.push(DecayCell {
            width: w,
            n,
            samples_ok: ok.len() as u64,
            failed,
            mean_log_norm: mean,
            std_error: se,
        });
        if let Some(rows) = raw.as_mut() {
            rows.extend(slice.iter().enumerate().map(|(i, v)| DecayRawRow {
                width: w,
                n,
                sample_index: i as u64,
                log_norm: v.unwrap_or(f64::NAN),
                failed: v.is_none(),
            }));
        }
    }

    let mut fits = Vec::new();
    for &w in &cfg.widths {
        if let Some(fit) = fit_width_rate(w, cfg.field, &cells)? {
            fits.push(fit);
        }
    }
    if fits.is_empty() {
        return Err(CliError::Numerical(
            "no width kept 3 clean cells, cannot fit any decay rate".into(),
        ));
    }
    Ok(DecayScanResult { cells, fits, raw })
}

// ---------------------------------------------------------------------------
// Fractional moment scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FmcScanConfig {
    pub widths: Vec<usize>,
    pub blocks: Vec<usize>,
    pub zs: Vec<Complex64>,
    pub ss: Vec<f64>,
    /// Matrix element positions; empty means the corner pair `(1, n)`.
    pub pairs: Vec<(usize, usize)>,
    pub samples: u64,
    pub seed: u64,
    pub kind: ModelKind,
    pub field: EntryField,
    pub keep_raw: bool,
    pub options: ResolventOptions,
}

#[derive(Debug, Clone)]
pub struct FmcCell {
    pub width: usize,
    pub n: usize,
    pub z: Complex64,
    pub s: f64,
    pub x: usize,
    pub y: usize,
    pub samples_ok: u64,
    pub failed: u64,
    /// Sample mean of `|G_xy(z)|^s`.
    pub moment: f64,
    pub moment_std_error: f64,
    pub mean_log_norm: f64,
}

#[derive(Debug, Clone)]
pub struct FmcRawRow {
    pub width: usize,
    pub n: usize,
    pub z: Complex64,
    pub s: f64,
    pub x: usize,
    pub y: usize,
    pub sample_index: u64,
    pub log_norm: f64,
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct FmcScanResult {
    pub cells: Vec<FmcCell>,
    pub raw: Option<Vec<FmcRawRow>>,
}

pub fn run_fmc_scan(cfg: &FmcScanConfig) -> CliResult<FmcScanResult> {
    check_widths(&cfg.widths)?;
    check_samples(cfg.samples)?;
    if cfg.blocks.is_empty() || cfg.zs.is_empty() || cfg.ss.is_empty() {
        return Err(CliError::Usage(
            "block, energy and exponent lists must all be nonempty".into(),
        ));
    }
    if let Some(&s) = cfg.ss.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
        return Err(CliError::Usage(format!(
            "fractional exponent must lie strictly between 0 and 1, got {s}"
        )));
    }

    // One parameter set per (w, n, z, s, pair); validate all before sampling.
    let mut grid = Vec::new();
    for &w in &cfg.widths {
        for &n in &cfg.blocks {
            let pairs: Vec<(usize, usize)> = if cfg.pairs.is_empty() {
                vec![(1, n)]
            } else {
                cfg.pairs.clone()
            };
            for &z in &cfg.zs {
                for &s in &cfg.ss {
                    for &(x, y) in &pairs {
                        let params = FractionalMomentParams {
                            n,
                            width: w,
                            kind: cfg.kind,
                            field: cfg.field,
                            z,
                            s,
                            x,
                            y,
                        };
                        params.validate().map_err(CliError::from)?;
                        grid.push(params);
                    }
                }
            }
        }
    }

    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|cell| (0..cfg.samples).map(move |s| (cell, s)))
        .collect();
    let outcomes: Vec<Option<f64>> = jobs
        .par_iter()
        .map(|&(cell, sample)| {
            let stream = job_stream(cfg.seed, cell, sample);
            resolvent_log_norm_sample(&grid[cell], &stream, &cfg.options).ok()
        })
        .collect();

    let mut cells = Vec::with_capacity(grid.len());
    let mut raw = cfg.keep_raw.then(Vec::new);
    for (cell, p) in grid.iter().enumerate() {
        let slice = &outcomes[cell * cfg.samples as usize..(cell + 1) * cfg.samples as usize];
        let logs: Vec<f64> = slice.iter().flatten().copied().collect();
        let failed = cfg.samples - logs.len() as u64;
        if failed * 2 > cfg.samples {
            return Err(CliError::Numerical(format!(
                "cell n={} W={} z={} s={}: {} of {} samples failed",
                p.n, p.width, p.z, p.s, failed, cfg.samples
            )));
        }
        let moments: Vec<f64> = logs.iter().map(|&l| (p.s * l).exp()).collect();
        let (moment, moment_se) = if moments.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            mean_and_se(&moments)
        };
        let mean_log = if logs.is_empty() {
            f64::NAN
        } else {
            logs.iter().sum::<f64>() / logs.len() as f64
        };
        cells.push(FmcCell {
            width: p.width,
            n: p.n,
            z: p.z,
            s: p.s,
            x: p.x,
            y: p.y,
            samples_ok: logs.len() as u64,
            failed,
            moment,
            moment_std_error: moment_se,
            mean_log_norm: mean_log,
        });
        if let Some(rows) = raw.as_mut() {
            rows.extend(slice.iter().enumerate().map(|(i, v)| FmcRawRow {
                width: p.width,
                n: p.n,
                z: p.z,
                s: p.s,
                x: p.x,
                y: p.y,
                sample_index: i as u64,
                log_norm: v.unwrap_or(f64::NAN),
                failed: v.is_none(),
            }));
        }
    }
    Ok(FmcScanResult { cells, raw })
}

// ---------------------------------------------------------------------------
// Rate-versus-width scaling fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    pub widths: Vec<usize>,
    pub blocks: Vec<usize>,
    pub samples: u64,
    pub seed: u64,
    pub field: EntryField,
}

#[derive(Debug, Clone)]
pub struct ScalingResult {
    pub cells: Vec<DecayCell>,
    pub rates: Vec<DecayFit>,
    pub fit: ScalingFit,
}

pub fn run_scaling_fit(cfg: &ScalingConfig) -> CliResult<ScalingResult> {
    let mut distinct = cfg.widths.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(CliError::Usage(format!(
            "scaling fits need at least 3 distinct widths, got {}",
            distinct.len()
        )));
    }
    let decay = run_decay_scan(&DecayScanConfig {
        widths: cfg.widths.clone(),
        blocks: cfg.blocks.clone(),
        samples: cfg.samples,
        seed: cfg.seed,
        field: cfg.field,
        keep_raw: false,
    })?;
    if decay.fits.len() < 3 {
        return Err(CliError::Numerical(format!(
            "only {} widths produced a rate fit, need 3 for the scaling law",
            decay.fits.len()
        )));
    }
    let widths: Vec<f64> = decay.fits.iter().map(|f| f.width as f64).collect();
    let rates: Vec<f64> = decay.fits.iter().map(|f| f.mu_hat).collect();
    let fit = fit_power_law(&widths, &rates)?;
    Ok(ScalingResult {
        cells: decay.cells,
        rates: decay.fits,
        fit,
    })
}
