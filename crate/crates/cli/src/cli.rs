//! Command line surface: argument types and subcommand drivers.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use bandlab_core::lyapunov::{
    complex_ginibre_exponent, estimate_lyapunov, newman_exponent, FactorGenerator, FactorKind,
};
use bandlab_core::model::{build_model, ModelKind};
use bandlab_core::resolvent::{
    resolvent_block_with_opts, zero_energy_corner_block_with_cap, ResolventOptions,
};
use bandlab_core::sampling::EntryField;
use bandlab_core::{linalg, RngStream};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use crate::model_io;
use crate::scan::{
    run_decay_scan, run_fmc_scan, run_scaling_fit, DecayScanConfig, FmcScanConfig, ScalingConfig,
    FIT_FAILURE_BUDGET,
};
use crate::table::{OutputFormat, Report, Table};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Complex,
    Real,
}

impl From<FieldArg> for EntryField {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Complex => EntryField::Complex,
            FieldArg::Real => EntryField::Real,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Full,
    Chiral,
    GeneralChiral,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => ModelKind::Full,
            ModelArg::Chiral => ModelKind::Chiral,
            ModelArg::GeneralChiral => ModelKind::GeneralChiral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// Independent Gaussian factors.
    Ginibre,
    /// Inverse-adjoint odd bond times even bond, as in the corner product.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

/// `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |p: &str, which: &str| -> Result<f64, String> {
        p.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad {which} part {p:?}: {e}"))
    };
    match parts.as_slice() {
        [re] => Ok((num(re, "real")?, 0.0)),
        [re, im] => Ok((num(re, "real")?, num(im, "imaginary")?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

/// `x,y` with 1-based block positions.
pub fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if let [x, y] = parts.as_slice() {
        let x = x
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad x {x:?}: {e}"))?;
        let y = y
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad y {y:?}: {e}"))?;
        Ok((x, y))
    } else {
        Err(format!("expected `x,y`, got {s:?}"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Record the wall clock in the metadata. Off by default so that equal
    /// invocations produce byte-identical output.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Parser)]
#[command(
    name = "bandlab",
    version,
    about = "Numerical laboratory for chiral random band operators",
    propagate_version = true
)]
pub struct Cli {
    /// Worker thread count for scans; defaults to one per core. Results do
    /// not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one disorder realization and write its blocks.
    Sample {
        /// Master seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Stream index under the master seed.
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Number of blocks along the chain.
        #[arg(short = 'n', long, default_value_t = 8)]
        blocks: usize,
        /// Band width, the side length of one block.
        #[arg(short = 'W', long, default_value_t = 2)]
        width: usize,
        /// Block layout of the operator.
        #[arg(long, value_enum, default_value_t = ModelArg::Chiral)]
        model: ModelArg,
        /// Number field of the Gaussian entries.
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Estimate the Lyapunov spectrum of a random factor product by the
    /// QR cocycle.
    Lyapunov {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short = 'W', long, default_value_t = 2)]
        width: usize,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        /// Factor process.
        #[arg(long, value_enum, default_value_t = KindArg::Ginibre)]
        kind: KindArg,
        /// Scale applied to the odd bond of each pair factor.
        #[arg(long, default_value_t = 1.0)]
        odd_scale: f64,
        /// Cocycle steps kept for statistics.
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Cocycle steps discarded up front.
        #[arg(long, default_value_t = 100)]
        burn_in: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compute one block of the Green's function (H - z)^-1.
    #[command(allow_negative_numbers = true)]
    Green {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(short = 'n', long, default_value_t = 8)]
        blocks: usize,
        #[arg(short = 'W', long, default_value_t = 2)]
        width: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Chiral)]
        model: ModelArg,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        /// Energy, `re` or `re,im`.
        #[arg(long, value_parser = parse_complex, default_value = "0,0")]
        z: (f64, f64),
        /// Block row (1-based).
        #[arg(short = 'x', long, default_value_t = 1)]
        x: usize,
        /// Block column (1-based); defaults to the far end of the chain.
        #[arg(short = 'y', long)]
        y: Option<usize>,
        /// Largest full dimension solved densely; longer chains use block
        /// elimination.
        #[arg(long)]
        dense_cap: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo scan of the zero-energy corner norm against chain length,
    /// with a decay-rate fit per width.
    DecayScan {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Band widths, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 4])]
        widths: Vec<usize>,
        /// Even chain lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![8, 16, 24, 32, 48, 64])]
        blocks: Vec<usize>,
        /// Disorder samples per (width, length) cell.
        #[arg(long, default_value_t = 200)]
        samples: u64,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        /// Keep every sampled log norm in a `raw` table.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo estimate of fractional resolvent moments E|G_xy(z)|^s.
    #[command(allow_negative_numbers = true)]
    FmcScan {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2])]
        widths: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![8, 16, 32])]
        blocks: Vec<usize>,
        /// Energy, `re` or `re,im`; repeat for several energies.
        #[arg(long, value_parser = parse_complex)]
        z: Vec<(f64, f64)>,
        /// Fractional exponents in (0, 1), comma separated.
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        /// Matrix element position `x,y` (1-based); repeat for several.
        /// Default is the corner pair 1,n.
        #[arg(long, value_parser = parse_pair)]
        pair: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::Full)]
        model: ModelArg,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        #[arg(long)]
        dense_cap: Option<usize>,
        /// Keep every sampled log norm in a `raw` table.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit the corner decay rate against band width as a power law.
    ScalingFit {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Band widths, comma separated; at least 3 distinct.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 4, 8])]
        widths: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![8, 16, 32, 64, 128])]
        blocks: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        samples: u64,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        #[command(flatten)]
        out: OutArgs,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("thread count must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Sample {
            seed,
            stream,
            blocks,
            width,
            model,
            field,
            out,
        } => cmd_sample(seed, stream, blocks, width, model, field, &out),
        Command::Lyapunov {
            seed,
            width,
            field,
            kind,
            odd_scale,
            steps,
            burn_in,
            out,
        } => cmd_lyapunov(seed, width, field, kind, odd_scale, steps, burn_in, &out),
        Command::Green {
            seed,
            stream,
            blocks,
            width,
            model,
            field,
            z,
            x,
            y,
            dense_cap,
            out,
        } => cmd_green(
            seed, stream, blocks, width, model, field, z, x, y, dense_cap, &out,
        ),
        Command::DecayScan {
            seed,
            widths,
            blocks,
            samples,
            field,
            raw,
            out,
        } => cmd_decay_scan(seed, widths, blocks, samples, field, raw, &out),
        Command::FmcScan {
            seed,
            widths,
            blocks,
            z,
            s,
            pair,
            samples,
            model,
            field,
            dense_cap,
            raw,
            out,
        } => cmd_fmc_scan(
            seed, widths, blocks, z, s, pair, samples, model, field, dense_cap, raw, &out,
        ),
        Command::ScalingFit {
            seed,
            widths,
            blocks,
            samples,
            field,
            out,
        } => cmd_scaling_fit(seed, widths, blocks, samples, field, &out),
    }
}

fn report_for(subcommand: &str, stamp: bool) -> Report {
    let mut r = Report::new(subcommand);
    if stamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        r.set_meta("timestamp_unix_seconds", json!(secs));
    }
    r
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn rate_formula_name(field: EntryField) -> &'static str {
    match field {
        EntryField::Complex => "integer-argument digamma (complex Gaussian factors)",
        EntryField::Real => "half-integer-argument digamma (real Gaussian factors)",
    }
}

fn cmd_sample(
    seed: u64,
    stream: u64,
    blocks: usize,
    width: usize,
    model: ModelArg,
    field: FieldArg,
    out: &OutArgs,
) -> CliResult<()> {
    let kind = ModelKind::from(model);
    let entry_field = EntryField::from(field);
    let rng = RngStream::with_index(seed, stream);
    let h = build_model(kind, entry_field, blocks, width, &rng)?;
    match out.format {
        FormatArg::Json => {
            let record =
                model_io::to_record(&h, Some(kind.name()), Some(entry_field.name()), Some(&rng));
            write_text(out.out.as_deref(), &model_io::to_json(&record))
        }
        FormatArg::Csv => {
            let mut report = report_for("sample", out.stamp);
            report.set_meta("seed", json!(seed));
            report.set_meta("stream", json!(stream));
            report.set_meta("blocks", json!(blocks));
            report.set_meta("width", json!(width));
            report.set_meta("model", json!(kind.name()));
            report.set_meta("field", json!(entry_field.name()));
            let mut t = Table::new("blocks", &["block", "index", "row", "col", "re", "im"]);
            let mut push_block = |label: &str, index: usize, m: &bandlab_core::ComplexMatrix| {
                for r in 0..m.rows() {
                    for c in 0..m.cols() {
                        let v = m[(r, c)];
                        t.push(vec![
                            label.into(),
                            (index as u64).into(),
                            ((r + 1) as u64).into(),
                            ((c + 1) as u64).into(),
                            v.re.into(),
                            v.im.into(),
                        ]);
                    }
                }
            };
            for (i, v) in h.v_blocks().iter().enumerate() {
                push_block("V", i + 1, v);
            }
            for (i, tb) in h.t_blocks().iter().enumerate() {
                push_block("T", i + 1, tb);
            }
            report.push_table(t);
            Ok(report.write(out.out.as_deref(), OutputFormat::Csv)?)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_lyapunov(
    seed: u64,
    width: usize,
    field: FieldArg,
    kind: KindArg,
    odd_scale: f64,
    steps: u64,
    burn_in: u64,
    out: &OutArgs,
) -> CliResult<()> {
    if !odd_scale.is_finite() || odd_scale <= 0.0 {
        return Err(CliError::Usage(format!(
            "odd bond scale must be positive and finite, got {odd_scale}"
        )));
    }
    let entry_field = EntryField::from(field);
    let factor_kind = match kind {
        KindArg::Ginibre => FactorKind::Ginibre,
        KindArg::Pair => FactorKind::Pair { odd_scale },
    };
    let gen = FactorGenerator::new(factor_kind, width, entry_field, RngStream::new(seed))?;
    let est = estimate_lyapunov(&gen, steps, burn_in)?;

    // Closed-form references: exact digamma spectra for single Gaussian
    // factors; for pair factors only width 1 collapses (the two bond logs
    // cancel in distribution up to the odd scale).
    let (formula, refs): (&str, Vec<f64>) = match kind {
        KindArg::Ginibre => (
            rate_formula_name(entry_field),
            (1..=width)
                .map(|k| match entry_field {
                    EntryField::Real => newman_exponent(width, k),
                    EntryField::Complex => complex_ginibre_exponent(width, k),
                })
                .collect::<Result<_, _>>()?,
        ),
        KindArg::Pair if width == 1 => ("exact bond cancellation", vec![-odd_scale.ln()]),
        KindArg::Pair => ("none", vec![f64::NAN; width]),
    };

    let mut report = report_for("lyapunov", out.stamp);
    report.set_meta("seed", json!(seed));
    report.set_meta("width", json!(width));
    report.set_meta("field", json!(entry_field.name()));
    report.set_meta(
        "kind",
        json!(match kind {
            KindArg::Ginibre => "ginibre",
            KindArg::Pair => "pair",
        }),
    );
    report.set_meta("odd_scale", json!(odd_scale));
    report.set_meta("steps", json!(est.steps));
    report.set_meta("burn_in", json!(est.burn_in));
    report.set_meta("order_violations", json!(est.order_violations));
    report.set_meta("factor_failures", json!(est.factor_failures));
    report.set_meta("reference_formula", json!(formula));

    let mut t = Table::new(
        "spectrum",
        &[
            "width",
            "k",
            "gamma_hat",
            "std_error",
            "newman_value",
            "z_score",
        ],
    );
    for (k, ((&gamma, &se), &reference)) in
        est.gamma.iter().zip(&est.std_error).zip(&refs).enumerate()
    {
        t.push(vec![
            (width as u64).into(),
            ((k + 1) as u64).into(),
            gamma.into(),
            se.into(),
            reference.into(),
            ((gamma - reference) / se).into(),
        ]);
    }
    report.push_table(t);
    Ok(report.write(out.out.as_deref(), out.format.into())?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_green(
    seed: u64,
    stream: u64,
    blocks: usize,
    width: usize,
    model: ModelArg,
    field: FieldArg,
    z: (f64, f64),
    x: usize,
    y: Option<usize>,
    dense_cap: Option<usize>,
    out: &OutArgs,
) -> CliResult<()> {
    let z = Complex64::new(z.0, z.1);
    let kind = ModelKind::from(model);
    let entry_field = EntryField::from(field);
    let y = y.unwrap_or(blocks);
    let rng = RngStream::with_index(seed, stream);
    let h = build_model(kind, entry_field, blocks, width, &rng)?;
    let mut opts = ResolventOptions::default();
    if let Some(cap) = dense_cap {
        opts.dense_cap = cap;
    }

    let at_zero = z == Complex64::new(0.0, 0.0);
    if at_zero && h.is_chiral() && !blocks.is_multiple_of(2) {
        return Err(CliError::Usage(format!(
            "the zero-energy operator of an odd chiral chain ({blocks} blocks) \
             has a kernel; use an even number of blocks"
        )));
    }
    let (route, block) = if at_zero && h.is_chiral() && x == 1 && y == blocks {
        (
            "corner-product",
            zero_energy_corner_block_with_cap(&h, opts.condition_cap)?,
        )
    } else {
        let r = resolvent_block_with_opts(&h, z, x, y, &opts)?;
        let route = if h.dim() <= opts.dense_cap {
            "dense-solve"
        } else {
            "block-elimination"
        };
        (route, r.block)
    };
    let norm = linalg::spectral_norm(&block);

    let mut report = report_for("green", out.stamp);
    report.set_meta("seed", json!(seed));
    report.set_meta("stream", json!(stream));
    report.set_meta("blocks", json!(blocks));
    report.set_meta("width", json!(width));
    report.set_meta("model", json!(kind.name()));
    report.set_meta("field", json!(entry_field.name()));
    report.set_meta("z", json!([z.re, z.im]));
    report.set_meta("x", json!(x));
    report.set_meta("y", json!(y));
    report.set_meta("route", json!(route));
    report.set_meta("dense_cap", json!(opts.dense_cap));
    report.set_meta("condition_cap", json!(opts.condition_cap));

    let mut entries = Table::new("block", &["row", "col", "re", "im", "abs"]);
    for r in 0..block.rows() {
        for c in 0..block.cols() {
            let v = block[(r, c)];
            entries.push(vec![
                ((r + 1) as u64).into(),
                ((c + 1) as u64).into(),
                v.re.into(),
                v.im.into(),
                v.norm().into(),
            ]);
        }
    }
    let mut summary = Table::new(
        "summary",
        &[
            "blocks", "width", "z_re", "z_im", "x", "y", "norm", "log_norm",
        ],
    );
    summary.push(vec![
        (blocks as u64).into(),
        (width as u64).into(),
        z.re.into(),
        z.im.into(),
        (x as u64).into(),
        (y as u64).into(),
        norm.into(),
        norm.ln().into(),
    ]);
    report.push_table(entries);
    report.push_table(summary);
    Ok(report.write(out.out.as_deref(), out.format.into())?)
}

fn push_decay_tables(report: &mut Report, result: &crate::scan::DecayScanResult, raw: bool) {
    let mut cells = Table::new(
        "cells",
        &[
            "width",
            "n",
            "samples_ok",
            "failed",
            "failure_fraction",
            "mean_log_norm",
            "std_error",
        ],
    );
    for c in &result.cells {
        cells.push(vec![
            (c.width as u64).into(),
            (c.n as u64).into(),
            c.samples_ok.into(),
            c.failed.into(),
            c.failure_fraction().into(),
            c.mean_log_norm.into(),
            c.std_error.into(),
        ]);
    }
    report.push_table(cells);

    let mut fits = Table::new(
        "fits",
        &[
            "width",
            "mu_hat",
            "mu_std_error",
            "intercept",
            "rss",
            "cells_used",
            "newman_mu",
            "z_score",
        ],
    );
    for f in &result.fits {
        fits.push(vec![
            (f.width as u64).into(),
            f.mu_hat.into(),
            f.mu_std_error.into(),
            f.intercept.into(),
            f.rss.into(),
            (f.cells_used as u64).into(),
            f.newman_mu.into(),
            f.z_score.into(),
        ]);
    }
    report.push_table(fits);

    if raw {
        if let Some(rows) = &result.raw {
            let mut t = Table::new("raw", &["width", "n", "sample_index", "log_norm", "failed"]);
            for r in rows {
                t.push(vec![
                    (r.width as u64).into(),
                    (r.n as u64).into(),
                    r.sample_index.into(),
                    r.log_norm.into(),
                    (r.failed as u64).into(),
                ]);
            }
            report.push_table(t);
        }
    }
}

fn cmd_decay_scan(
    seed: u64,
    widths: Vec<usize>,
    blocks: Vec<usize>,
    samples: u64,
    field: FieldArg,
    raw: bool,
    out: &OutArgs,
) -> CliResult<()> {
    let entry_field = EntryField::from(field);
    let result = run_decay_scan(&DecayScanConfig {
        widths: widths.clone(),
        blocks: blocks.clone(),
        samples,
        seed,
        field: entry_field,
        keep_raw: raw,
    })?;
    let mut report = report_for("decay-scan", out.stamp);
    report.set_meta("seed", json!(seed));
    report.set_meta("widths", json!(widths));
    report.set_meta("blocks", json!(blocks));
    report.set_meta("samples", json!(samples));
    report.set_meta("field", json!(entry_field.name()));
    report.set_meta("fit_failure_budget", json!(FIT_FAILURE_BUDGET));
    report.set_meta("reference_formula", json!(rate_formula_name(entry_field)));
    push_decay_tables(&mut report, &result, raw);
    Ok(report.write(out.out.as_deref(), out.format.into())?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_fmc_scan(
    seed: u64,
    widths: Vec<usize>,
    blocks: Vec<usize>,
    z: Vec<(f64, f64)>,
    s: Vec<f64>,
    pair: Vec<(usize, usize)>,
    samples: u64,
    model: ModelArg,
    field: FieldArg,
    dense_cap: Option<usize>,
    raw: bool,
    out: &OutArgs,
) -> CliResult<()> {
    let zs: Vec<Complex64> = if z.is_empty() {
        vec![Complex64::new(0.0, 0.0)]
    } else {
        z.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
    };
    let ss = if s.is_empty() { vec![0.5] } else { s };
    let kind = ModelKind::from(model);
    let entry_field = EntryField::from(field);
    let mut options = ResolventOptions::default();
    if let Some(cap) = dense_cap {
        options.dense_cap = cap;
    }
    let result = run_fmc_scan(&FmcScanConfig {
        widths: widths.clone(),
        blocks: blocks.clone(),
        zs: zs.clone(),
        ss: ss.clone(),
        pairs: pair.clone(),
        samples,
        seed,
        kind,
        field: entry_field,
        keep_raw: raw,
        options,
    })?;

    let mut report = report_for("fmc-scan", out.stamp);
    report.set_meta("seed", json!(seed));
    report.set_meta("widths", json!(widths));
    report.set_meta("blocks", json!(blocks));
    report.set_meta(
        "z",
        json!(zs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
    );
    report.set_meta("s", json!(ss));
    if pair.is_empty() {
        report.set_meta("pair", json!("corner"));
    } else {
        report.set_meta(
            "pair",
            json!(pair.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>()),
        );
    }
    report.set_meta("samples", json!(samples));
    report.set_meta("model", json!(kind.name()));
    report.set_meta("field", json!(entry_field.name()));
    report.set_meta("dense_cap", json!(options.dense_cap));
    report.set_meta("condition_cap", json!(options.condition_cap));

    let mut cells = Table::new(
        "cells",
        &[
            "width",
            "n",
            "z_re",
            "z_im",
            "s",
            "x",
            "y",
            "samples_ok",
            "failed",
            "moment",
            "moment_std_error",
            "mean_log_norm",
        ],
    );
    for c in &result.cells {
        cells.push(vec![
            (c.width as u64).into(),
            (c.n as u64).into(),
            c.z.re.into(),
            c.z.im.into(),
            c.s.into(),
            (c.x as u64).into(),
            (c.y as u64).into(),
            c.samples_ok.into(),
            c.failed.into(),
            c.moment.into(),
            c.moment_std_error.into(),
            c.mean_log_norm.into(),
        ]);
    }
    report.push_table(cells);
    if raw {
        if let Some(rows) = &result.raw {
            let mut t = Table::new(
                "raw",
                &[
                    "width",
                    "n",
                    "z_re",
                    "z_im",
                    "s",
                    "x",
                    "y",
                    "sample_index",
                    "log_norm",
                    "failed",
                ],
            );
            for r in rows {
                t.push(vec![
                    (r.width as u64).into(),
                    (r.n as u64).into(),
                    r.z.re.into(),
                    r.z.im.into(),
                    r.s.into(),
                    (r.x as u64).into(),
                    (r.y as u64).into(),
                    r.sample_index.into(),
                    r.log_norm.into(),
                    (r.failed as u64).into(),
                ]);
            }
            report.push_table(t);
        }
    }
    Ok(report.write(out.out.as_deref(), out.format.into())?)
}

fn cmd_scaling_fit(
    seed: u64,
    widths: Vec<usize>,
    blocks: Vec<usize>,
    samples: u64,
    field: FieldArg,
    out: &OutArgs,
) -> CliResult<()> {
    let entry_field = EntryField::from(field);
    let result = run_scaling_fit(&ScalingConfig {
        widths: widths.clone(),
        blocks: blocks.clone(),
        samples,
        seed,
        field: entry_field,
    })?;

    let mut report = report_for("scaling-fit", out.stamp);
    report.set_meta("seed", json!(seed));
    report.set_meta("widths", json!(widths));
    report.set_meta("blocks", json!(blocks));
    report.set_meta("samples", json!(samples));
    report.set_meta("field", json!(entry_field.name()));
    report.set_meta("reference_formula", json!(rate_formula_name(entry_field)));

    let decay_view = crate::scan::DecayScanResult {
        cells: result.cells.clone(),
        fits: result.rates.clone(),
        raw: None,
    };
    push_decay_tables(&mut report, &decay_view, false);

    let mut fit = Table::new(
        "fit",
        &["alpha", "alpha_std_error", "prefactor", "rss", "points"],
    );
    fit.push(vec![
        result.fit.alpha.into(),
        result.fit.alpha_std_error.into(),
        result.fit.prefactor.into(),
        result.fit.rss.into(),
        (result.fit.points as u64).into(),
    ]);
    report.push_table(fit);
    Ok(report.write(out.out.as_deref(), out.format.into())?)
}
