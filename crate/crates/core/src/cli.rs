//! Command-line front end: `analyze`, `certify`, `oracle` and `sweep`.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{Convention, FrameBounds, Provenance};
use crate::certify::{
    certify_amalgam_kadec, certify_bspline, certify_per_index, certify_rect,
    certify_rect_convolution, certify_sobolev_rectangle, certify_step, certify_step_p1_extension,
    geometric_weights, per_index_radii, Certificate, TheoremId, Verdict,
};
use crate::error::QsisError;
use crate::generator::{Exponent, Generator, GeneratorKind, GeneratorSpec};
use crate::oracle::{
    exponential_gram, perturbation_power, problem1_residual, run_oracle, write_ratio_csv,
};
use crate::oracle::{OracleConfig, OracleReport, Problem1Residual};
use crate::perturb::{PerturbationModel, PerturbationSet, PerturbationSpec};
use crate::quadrature::QuadratureSpec;
use crate::spectrum::{periodization_with_cell, riesz_bounds_p2, Cell, SpectrumProfile};

pub const SWEEP_SCHEMA: &str = "# qsis-sweep v1";
pub const MAX_P: f64 = 16.0;
pub const MAX_GRID_K: usize = 512;
pub const MAX_RESOLUTION: usize = 8192;
const DEFAULT_GRID_K: usize = 32;

#[derive(Parser, Debug)]
#[command(
    name = "qsis",
    version,
    about = "Riesz bounds and perturbation certificates for translate systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Periodization profile, p = 2 Riesz bounds and amalgam sums.
    Analyze(CommonArgs),
    /// Every certificate applicable to the generator.
    Certify(CommonArgs),
    /// Finite-section oracle, cross-checked against passing certificates.
    Oracle(CommonArgs),
    /// Certificates and oracle power over a grid of deviations.
    Sweep(SweepArgs),
}

#[derive(clap::Args, Debug, Clone)]
pub struct CommonArgs {
    /// Generator spec: a JSON file, or inline JSON.
    #[arg(long)]
    pub generator: String,
    /// Perturbation spec: a JSON file, or inline JSON. Defaults to the lattice.
    #[arg(long)]
    pub perturb: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Index box radius; overrides the perturbation spec.
    #[arg(long = "grid-k")]
    pub grid_k: Option<usize>,
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    #[arg(long = "tail-k", default_value_t = 2000)]
    pub tail_k: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Unit cell for the amalgam sums.
    #[arg(long, value_enum, default_value_t = CellArg::Unit)]
    pub cell: CellArg,
    /// Lower and upper frame bounds as `A,B`.
    #[arg(long)]
    pub bounds: Option<String>,
    /// Convention of `--bounds` and of the bounds shown by `analyze`.
    #[arg(long, value_enum, default_value_t = ConventionArg::Squared)]
    pub convention: ConventionArg,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Non-decreasing deviations, comma separated.
    #[arg(long = "l-grid")]
    pub l_grid: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellArg {
    Unit,
    Centered,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionArg {
    Squared,
    Unsquared,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Squared => Convention::Squared,
            ConventionArg::Unsquared => Convention::Unsquared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Analyze,
    Certify,
    Oracle,
    Sweep,
}

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Numerical(QsisError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<QsisError> for CliError {
    fn from(e: QsisError) -> Self {
        CliError::Numerical(e)
    }
}

fn config<E: fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

/// Fully resolved, validated run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub generator: GeneratorSpec,
    pub perturbation: PerturbationSpec,
    pub p: f64,
    pub grid_k: usize,
    pub resolution: usize,
    pub tail_k: usize,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub cell: Cell,
    pub bounds: Option<FrameBounds>,
    pub convention: Convention,
    pub l_grid: Vec<f64>,
}

fn load_json<T: for<'de> Deserialize<'de>>(source: &str, what: &str) -> Result<T, CliError> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(Path::new(source))
            .map_err(|e| CliError::Config(format!("{what} {source}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

fn parse_bounds(text: &str, convention: Convention) -> Result<FrameBounds, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::Config(format!(
            "--bounds expects A,B, got {text:?}"
        )));
    }
    let a: f64 = parts[0].parse().map_err(config)?;
    let b: f64 = parts[1].parse().map_err(config)?;
    FrameBounds::new(a, b, convention, Provenance::User).map_err(config)
}

fn parse_l_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let grid: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(config))
        .collect::<Result<_, _>>()?;
    if grid.is_empty() {
        return Err(CliError::Config("--l-grid is empty".into()));
    }
    if grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(CliError::Config(
            "--l-grid values must be non-negative".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Config("--l-grid must be non-decreasing".into()));
    }
    Ok(grid)
}

impl RunConfig {
    pub fn from_args(
        command: CommandKind,
        args: &CommonArgs,
        l_grid: Option<&str>,
    ) -> Result<Self, CliError> {
        let generator: GeneratorSpec = load_json(&args.generator, "generator spec")?;
        Generator::try_from(generator.clone()).map_err(config)?;
        let mut perturbation = match &args.perturb {
            Some(src) => load_json(src, "perturbation spec")?,
            None => {
                let model = if command == CommandKind::Sweep {
                    PerturbationModel::Adversarial
                } else {
                    PerturbationModel::Identity
                };
                PerturbationSpec::new(model, 0.0, DEFAULT_GRID_K)
            }
        };
        if let Some(k) = args.grid_k {
            perturbation.grid_k = k;
        }
        let convention = Convention::from(args.convention);
        let cfg = Self {
            command,
            grid_k: perturbation.grid_k,
            generator,
            perturbation,
            p: args.p,
            resolution: args.resolution,
            tail_k: args.tail_k,
            samples: args.samples,
            seed: args.seed,
            out: args.out.clone(),
            format: args.format,
            cell: match args.cell {
                CellArg::Unit => Cell::Unit,
                CellArg::Centered => Cell::Centered,
            },
            bounds: args
                .bounds
                .as_deref()
                .map(|b| parse_bounds(b, convention))
                .transpose()?,
            convention,
            l_grid: match l_grid {
                Some(text) => parse_l_grid(text)?,
                None => Vec::new(),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1.0..=MAX_P).contains(&self.p) {
            return Err(CliError::Config(format!(
                "p = {} outside [1, {MAX_P}]",
                self.p
            )));
        }
        if self.grid_k == 0 || self.grid_k > MAX_GRID_K {
            return Err(CliError::Config(format!(
                "grid_K = {} outside [1, {MAX_GRID_K}]",
                self.grid_k
            )));
        }
        if self.resolution > MAX_RESOLUTION {
            return Err(CliError::Config(format!(
                "resolution {} exceeds {MAX_RESOLUTION}",
                self.resolution
            )));
        }
        if self.samples == 0 {
            return Err(CliError::Config("at least one sample is required".into()));
        }
        if self.command == CommandKind::Sweep && self.l_grid.is_empty() {
            return Err(CliError::Config("sweep needs a non-empty --l-grid".into()));
        }
        self.perturbation.build().map_err(config)?;
        Ok(())
    }

    fn exponent(&self) -> Exponent {
        Exponent::new(self.p).expect("validated exponent")
    }

    fn generator(&self) -> Generator {
        Generator::try_from(self.generator.clone()).expect("validated generator")
    }

    fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            samples: self.samples,
            seed: self.seed,
            quadrature: QuadratureSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub generator: GeneratorSpec,
    pub spectrum: SpectrumProfile,
    /// Bounds in the requested display convention.
    pub bounds: Option<FrameBounds>,
    pub squared_bounds: Option<FrameBounds>,
    pub degenerate: Option<String>,
}

/// One applicable certificate, or the reason it could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyEntry {
    pub theorem_id: TheoremId,
    pub certificate: Option<Certificate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub generator: GeneratorSpec,
    pub perturbation: PerturbationSpec,
    pub p: f64,
    pub l2_deviation: f64,
    pub linf_deviation: f64,
    pub base_bounds: Option<FrameBounds>,
    pub entries: Vec<CertifyEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub theorem_id: TheoremId,
    #[serde(rename = "budget_Cp")]
    pub budget_cp: f64,
    pub rho: f64,
    pub power_within_budget: bool,
    pub ratios_within_bounds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCommandReport {
    pub generator: GeneratorSpec,
    pub perturbation: PerturbationSpec,
    pub oracle: OracleReport,
    pub exponential_eig_min: f64,
    pub exponential_eig_max: f64,
    pub problem1: Option<Problem1Residual>,
    pub cross_checks: Vec<CrossCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub l: f64,
    pub theorem_id: TheoremId,
    #[serde(rename = "budget_Cp")]
    pub budget_cp: Option<f64>,
    #[serde(rename = "paper_budget_Cp")]
    pub paper_budget_cp: Option<f64>,
    pub rho: Option<f64>,
    pub corrected_margin: Option<f64>,
    /// `pass`, `fail` or `error`.
    pub verdict: String,
    pub oracle_power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub generator: GeneratorSpec,
    pub perturbation: PerturbationSpec,
    pub p: f64,
    pub rows: Vec<SweepRow>,
}

/// Shared state for certifying one generator against many translation sets.
struct Context {
    g: Generator,
    p: Exponent,
    bounds: Option<FrameBounds>,
    bounds_note: Option<String>,
    profile: Option<SpectrumProfile>,
}

impl Context {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let g = cfg.generator();
        let p = cfg.exponent();
        let profile = if p.value() == 2.0 {
            match periodization_with_cell(&g, cfg.resolution, cfg.tail_k, cfg.cell) {
                Ok(profile) => Some(profile),
                Err(e @ QsisError::InvalidParameter(_)) => return Err(config(e)),
                Err(_) => None,
            }
        } else {
            None
        };
        let (bounds, bounds_note) = match (cfg.bounds, &profile) {
            (Some(b), _) => (Some(b), None),
            (None, Some(profile)) => match riesz_bounds_p2(profile) {
                Ok(b) => (Some(b), None),
                Err(e) => (None, Some(e.to_string())),
            },
            (None, None) => (
                None,
                Some("no lower frame bound available at this p; pass --bounds".into()),
            ),
        };
        Ok(Self {
            g,
            p,
            bounds,
            bounds_note,
            profile,
        })
    }

    fn theorems(&self) -> Vec<TheoremId> {
        let sobolev = self.g.flags().in_w1p && self.g.flags().compact_support;
        let mut ids = match self.g.kind() {
            GeneratorKind::Rect | GeneratorKind::BSpline { order: 0 } => vec![TheoremId::Rect],
            GeneratorKind::BSpline { .. } => {
                vec![
                    TheoremId::SobolevRect,
                    TheoremId::RectConv,
                    TheoremId::Bspline,
                    TheoremId::PerIndex,
                ]
            }
            GeneratorKind::Step { .. } => vec![TheoremId::Step],
            GeneratorKind::Sinc => vec![],
            GeneratorKind::Tabulated { .. } | GeneratorKind::TensorProduct { .. } if sobolev => {
                vec![TheoremId::SobolevRect, TheoremId::PerIndex]
            }
            _ => vec![],
        };
        if self.p.value() == 2.0 {
            ids.push(TheoremId::AmalgamKadec);
        }
        ids
    }

    fn need_bounds(&self) -> Result<&FrameBounds, QsisError> {
        self.bounds.as_ref().ok_or_else(|| {
            QsisError::InvalidParameter(
                self.bounds_note
                    .clone()
                    .unwrap_or_else(|| "no frame bounds".into()),
            )
        })
    }

    fn certify_one(&self, id: TheoremId, y: &PerturbationSet) -> Result<Certificate, QsisError> {
        let p = self.p;
        match id {
            TheoremId::Rect => certify_rect(y, p),
            TheoremId::SobolevRect => certify_sobolev_rectangle(&self.g, y, p, self.need_bounds()?),
            TheoremId::RectConv => match self.g.kind() {
                GeneratorKind::BSpline { order } => certify_rect_convolution(
                    &Generator::bspline(order - 1),
                    y,
                    p,
                    self.need_bounds()?,
                ),
                _ => Err(QsisError::InvalidParameter("not a rect convolution".into())),
            },
            TheoremId::Bspline => match self.g.kind() {
                GeneratorKind::BSpline { order } => {
                    certify_bspline(*order, y, p, self.bounds.as_ref())
                }
                _ => Err(QsisError::InvalidParameter("not a B-spline".into())),
            },
            TheoremId::Step => {
                if p.value() == 1.0 {
                    certify_step_p1_extension(&self.g, y, self.need_bounds()?)
                } else {
                    certify_step(&self.g, y, p, self.need_bounds()?)
                }
            }
            TheoremId::PerIndex => {
                let grid = y.grid();
                let bounds = self.need_bounds()?;
                let radii =
                    per_index_radii(&self.g, p, bounds, grid, &geometric_weights(&grid, 0.5))?;
                certify_per_index(&self.g, y, p, bounds, &radii)
            }
            TheoremId::AmalgamKadec => match &self.profile {
                Some(profile) => certify_amalgam_kadec(&self.g, y, None, profile),
                None => Err(QsisError::NoTransformPath(self.g.name())),
            },
            TheoremId::PwUpdate => Err(QsisError::InvalidParameter(
                "no perturbation budget given".into(),
            )),
        }
    }

    fn certify(&self, y: &PerturbationSet) -> Vec<CertifyEntry> {
        let mut entries = Vec::new();
        for id in self.theorems() {
            if id == TheoremId::Step && self.p.value() == 1.0 {
                // record the textbook refusal next to the extension
                entries.push(CertifyEntry {
                    theorem_id: id,
                    certificate: None,
                    error: Some(QsisError::DualExponentInfinite.to_string()),
                });
            }
            let (certificate, error) = match self.certify_one(id, y) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            entries.push(CertifyEntry {
                theorem_id: id,
                certificate,
                error,
            });
        }
        entries
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<AnalyzeReport, CliError> {
    let g = cfg.generator();
    let spectrum =
        periodization_with_cell(&g, cfg.resolution, cfg.tail_k, cfg.cell).map_err(|e| match e {
            QsisError::InvalidParameter(_) => config(e),
            other => CliError::Numerical(other),
        })?;
    let (squared_bounds, degenerate) = match riesz_bounds_p2(&spectrum) {
        Ok(b) => (Some(b), None),
        Err(e @ QsisError::DegenerateSpectrum { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    Ok(AnalyzeReport {
        generator: cfg.generator.clone(),
        bounds: squared_bounds.map(|b| b.to_convention(cfg.convention)),
        squared_bounds,
        degenerate,
        spectrum,
    })
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<CertifyReport, CliError> {
    let y = cfg.perturbation.build().map_err(config)?;
    let ctx = Context::new(cfg)?;
    Ok(CertifyReport {
        generator: cfg.generator.clone(),
        perturbation: cfg.perturbation.clone(),
        p: cfg.p,
        l2_deviation: y.l2_deviation(),
        linf_deviation: y.linf_deviation(),
        base_bounds: ctx.bounds,
        entries: ctx.certify(&y),
    })
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<OracleCommandReport, CliError> {
    let y = cfg.perturbation.build().map_err(config)?;
    let g = cfg.generator();
    let p = cfg.exponent();
    let oracle = run_oracle(&g, &y, p, &cfg.oracle_config())?;
    let (exponential_eig_min, exponential_eig_max) = exponential_gram(&y)?;
    let single_at_origin = cfg.perturbation.model == PerturbationModel::Single
        && cfg
            .perturbation
            .index
            .as_ref()
            .is_none_or(|k| k.iter().all(|&x| x == 0));
    let problem1 =
        if matches!(g.kind(), GeneratorKind::Rect) && single_at_origin && p.value() == 2.0 {
            Some(problem1_residual(cfg.perturbation.l, cfg.grid_k)?)
        } else {
            None
        };
    let ctx = Context::new(cfg)?;
    let cross_checks = ctx
        .certify(&y)
        .into_iter()
        .filter_map(|e| e.certificate)
        .filter(|c| c.passed() && c.budget_cp.is_some())
        .map(|c| {
            let budget = c.budget_cp.unwrap_or(0.0);
            let rho = c.rho.unwrap_or(0.0);
            let within = c.input_bounds.is_some_and(|b| {
                oracle.min_ratio >= b.lower() - rho - 1e-3
                    && oracle.max_ratio <= b.upper() + rho + 1e-3
            });
            CrossCheck {
                theorem_id: c.theorem_id,
                budget_cp: budget,
                rho,
                power_within_budget: oracle.perturbation_power_max <= budget + 1e-6,
                ratios_within_bounds: within,
            }
        })
        .collect();
    Ok(OracleCommandReport {
        generator: cfg.generator.clone(),
        perturbation: cfg.perturbation.clone(),
        oracle,
        exponential_eig_min,
        exponential_eig_max,
        problem1,
        cross_checks,
    })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepReport, CliError> {
    if cfg.l_grid.is_empty() {
        return Err(CliError::Config("sweep needs a non-empty --l-grid".into()));
    }
    let ctx = Context::new(cfg)?;
    let oracle_applies = ctx.g.dimension() == 1 && ctx.g.flags().compact_support;
    let per_l = cfg
        .l_grid
        .par_iter()
        .map(|&l| {
            let y = cfg.perturbation.with_l(l).build().map_err(config)?;
            let power = if oracle_applies {
                Some(perturbation_power(
                    &ctx.g,
                    &y,
                    ctx.p,
                    cfg.samples,
                    cfg.seed,
                    &QuadratureSpec::default(),
                )?)
            } else {
                None
            };
            let rows: Vec<SweepRow> = ctx
                .certify(&y)
                .into_iter()
                .map(|e| {
                    let c = e.certificate.as_ref();
                    SweepRow {
                        l,
                        theorem_id: e.theorem_id,
                        budget_cp: c.and_then(|c| c.budget_cp),
                        paper_budget_cp: c.and_then(|c| c.paper_budget_cp),
                        rho: c.and_then(|c| c.rho),
                        corrected_margin: c.and_then(|c| c.corrected_margin),
                        verdict: match c.map(|c| c.verdict) {
                            Some(Verdict::Pass) => "pass".into(),
                            Some(Verdict::Fail) => "fail".into(),
                            None => "error".into(),
                        },
                        oracle_power: power,
                    }
                })
                .collect();
            Ok(rows)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SweepReport {
        generator: cfg.generator.clone(),
        perturbation: cfg.perturbation.clone(),
        p: cfg.p,
        rows: per_l.into_iter().flatten().collect(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn csv_error(e: impl fmt::Display) -> CliError {
    CliError::Numerical(QsisError::NumericalBreakdown(format!(
        "csv output failed: {e}"
    )))
}

pub fn sweep_csv(report: &SweepReport) -> Result<String, CliError> {
    let mut out = format!("{SWEEP_SCHEMA}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record([
            "L",
            "theorem_id",
            "budget_Cp",
            "paper_budget_Cp",
            "rho",
            "corrected_margin",
            "verdict",
            "oracle_power",
        ])
        .map_err(csv_error)?;
        for r in &report.rows {
            let id = serde_json::to_value(r.theorem_id).map_err(csv_error)?;
            w.write_record([
                format!("{:?}", r.l),
                id.as_str().unwrap_or_default().to_string(),
                opt(r.budget_cp),
                opt(r.paper_budget_cp),
                opt(r.rho),
                opt(r.corrected_margin),
                r.verdict.clone(),
                opt(r.oracle_power),
            ])
            .map_err(csv_error)?;
        }
        w.flush().map_err(csv_error)?;
    }
    String::from_utf8(out).map_err(csv_error)
}

fn analyze_csv(report: &AnalyzeReport) -> Result<String, CliError> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let d = report.spectrum.dimension;
        let mut header: Vec<String> = (0..d).map(|j| format!("y{j}")).collect();
        header.push("G".into());
        w.write_record(&header).map_err(csv_error)?;
        for (i, v) in report.spectrum.values.iter().enumerate() {
            let mut row: Vec<String> = report
                .spectrum
                .grid_point(i)
                .iter()
                .map(|y| format!("{y:?}"))
                .collect();
            row.push(format!("{v:?}"));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush().map_err(csv_error)?;
    }
    String::from_utf8(out).map_err(csv_error)
}

fn certify_csv(report: &CertifyReport) -> Result<String, CliError> {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record([
            "theorem_id",
            "verdict",
            "budget_Cp",
            "paper_budget_Cp",
            "rho",
            "corrected_margin",
            "error",
        ])
        .map_err(csv_error)?;
        for e in &report.entries {
            let c = e.certificate.as_ref();
            let id = serde_json::to_value(e.theorem_id).map_err(csv_error)?;
            w.write_record([
                id.as_str().unwrap_or_default().to_string(),
                match c.map(|c| c.verdict) {
                    Some(Verdict::Pass) => "pass".into(),
                    Some(Verdict::Fail) => "fail".into(),
                    None => "error".into(),
                },
                opt(c.and_then(|c| c.budget_cp)),
                opt(c.and_then(|c| c.paper_budget_cp)),
                opt(c.and_then(|c| c.rho)),
                opt(c.and_then(|c| c.corrected_margin)),
                e.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_error)?;
        }
        w.flush().map_err(csv_error)?;
    }
    String::from_utf8(out).map_err(csv_error)
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.into()))?;
    s.push('\n');
    Ok(s)
}

/// Runs the configured command and renders its report.
pub fn render(cfg: &RunConfig) -> Result<String, CliError> {
    match (cfg.command, cfg.format) {
        (CommandKind::Analyze, Format::Json) => json(&cmd_analyze(cfg)?),
        (CommandKind::Analyze, Format::Csv) => analyze_csv(&cmd_analyze(cfg)?),
        (CommandKind::Certify, Format::Json) => json(&cmd_certify(cfg)?),
        (CommandKind::Certify, Format::Csv) => certify_csv(&cmd_certify(cfg)?),
        (CommandKind::Oracle, Format::Json) => json(&cmd_oracle(cfg)?),
        (CommandKind::Oracle, Format::Csv) => {
            let mut out = Vec::new();
            write_ratio_csv(&cmd_oracle(cfg)?.oracle, &mut out)?;
            String::from_utf8(out).map_err(csv_error)
        }
        (CommandKind::Sweep, Format::Json) => json(&cmd_sweep(cfg)?),
        (CommandKind::Sweep, Format::Csv) => sweep_csv(&cmd_sweep(cfg)?),
    }
}

/// Parses arguments, runs, and writes the report to `--out` or stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.command {
        Command::Analyze(a) => RunConfig::from_args(CommandKind::Analyze, a, None)?,
        Command::Certify(a) => RunConfig::from_args(CommandKind::Certify, a, None)?,
        Command::Oracle(a) => RunConfig::from_args(CommandKind::Oracle, a, None)?,
        Command::Sweep(s) => RunConfig::from_args(CommandKind::Sweep, &s.common, Some(&s.l_grid))?,
    };
    let text = render(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
