use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evfield::lawfit::{
    discriminate, fit_reciprocal_by_condition, fit_reciprocal_with_intercept, DecaySeries, InterceptFit, LawFitResult,
    ReciprocalFit, SeriesPoint,
};
use evfield::physics::LambdaConvention;
use evfield::reduce::{reduce_stack, DecayFit, FitWindow, LineProfile};
use evfield::synth::io::{load_stack, save_sim_image, save_stack};
use evfield::synth::{derive_seed, generate_stack, StackKind};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::experiment::{self, EnergyResult};
use crate::output::{ensure_dir, sci, write_csv, write_json, write_text, Provenance, SCHEMA_VERSION};
use crate::plot;

#[derive(Debug, Parser)]
#[command(
    name = "evfield",
    version,
    about = "Evanescent-field delocalization: simulation, reduction and law fitting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate every decay and coherence model on an energy-loss grid.
    Curves(CurvesArgs),
    /// Draw synthetic frame stacks for one energy loss.
    Simulate(SimulateArgs),
    /// Reduce a stack file to a profile and an exponential fit.
    Reduce(ReduceArgs),
    /// Fit the energy law to a decay-length series.
    FitLaw(FitLawArgs),
    /// Elastic slab control run with a defocus scan.
    Multislice(MultisliceArgs),
    /// Full pipeline over the configured energy grid.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (JSON); built-in defaults otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ConventionArg {
    ElectronDispersion,
    VirtualPhoton,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated ascending energy losses in eV.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub voltage: Option<f64>,
    #[arg(long)]
    pub delta_phi: Option<f64>,
    /// κ in eV·nm for the x_i_fit column.
    #[arg(long)]
    pub kappa_fit: Option<f64>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub delta_e: f64,
    #[arg(long)]
    pub frames: Option<usize>,
    /// Also write the incident and scattered stacks.
    #[arg(long)]
    pub all_kinds: bool,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub stack: PathBuf,
    #[arg(long)]
    pub interface_col: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub max_shift: Option<usize>,
    #[arg(long, requires = "x_max")]
    pub x_min: Option<f64>,
    #[arg(long, requires = "x_min")]
    pub x_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitLawArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with columns dE_eV,xi_nm,sigma_nm and an optional condition column.
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long)]
    pub threshold_reciprocal: Option<f64>,
    #[arg(long)]
    pub threshold_sqrt: Option<f64>,
    /// Also fit each illumination condition separately.
    #[arg(long)]
    pub by_condition: bool,
    /// Also fit the reciprocal law with a free offset.
    #[arg(long)]
    pub intercept: bool,
}

#[derive(Debug, Args)]
pub struct MultisliceArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn load_config(common: &Common, seed: Option<u64>) -> CliResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.out_dir = Some(common.out.clone());
    cfg.validate()?;
    ensure_dir(&common.out)?;
    Ok(cfg)
}

pub fn execute(cli: Cli, argv: &[String]) -> CliResult<()> {
    match cli.command {
        Command::Curves(a) => curves(a),
        Command::Simulate(a) => simulate(a),
        Command::Reduce(a) => reduce(a, argv),
        Command::FitLaw(a) => fit_law(a),
        Command::Multislice(a) => multislice(a),
        Command::Reproduce(a) => reproduce(a),
    }
}

pub const CURVES_HEADER: [&str; 7] = [
    "dE_eV",
    "l_s_nm",
    "l_e_nm",
    "l_t_nm",
    "x_i_fit_nm",
    "x_ic_nm",
    "t_heisenberg_s",
];

fn write_curves(path: &Path, curves: &evfield::ModelCurveSet, hash: &str) -> CliResult<()> {
    let rows: Vec<Vec<f64>> = (0..curves.len())
        .map(|i| {
            vec![
                curves.grid[i].value(),
                curves.l_s[i].value(),
                curves.l_e[i].value(),
                curves.l_t[i].value(),
                curves.x_i_fit[i].value(),
                curves.x_ic[i].value(),
                curves.t_heisenberg[i].value(),
            ]
        })
        .collect();
    write_csv(path, hash, &CURVES_HEADER, &rows)
}

fn curves(a: CurvesArgs) -> CliResult<()> {
    let mut cfg = load_config(&a.common, None)?;
    if let Some(g) = a.grid {
        cfg.curve_grid_ev = g;
    }
    if let Some(v) = a.voltage {
        cfg.beam_voltage_v = v;
    }
    if let Some(p) = a.delta_phi {
        cfg.delta_phi_rad = p;
    }
    if let Some(k) = a.kappa_fit {
        cfg.kappa_fit_ev_nm = k;
    }
    if let Some(c) = a.convention {
        cfg.convention = match c {
            ConventionArg::ElectronDispersion => LambdaConvention::ElectronDispersion,
            ConventionArg::VirtualPhoton => LambdaConvention::VirtualPhoton,
        };
    }
    let curves = experiment::curves(&cfg, cfg.kappa_fit_ev_nm)?;
    write_curves(&a.common.out.join("curves.csv"), &curves, &cfg.sha256())
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let mut cfg = load_config(&a.common, a.seed)?;
    if let Some(f) = a.frames {
        cfg.frames = f;
    }
    let scene = experiment::scene(&cfg, a.delta_e)?;
    let seed = derive_seed(cfg.seed, 0);
    let out = &a.common.out;
    let scattered = generate_stack(&scene, cfg.frames, StackKind::Scattered, seed)?;
    let incident = generate_stack(&scene, cfg.frames, StackKind::Incident, seed)?;
    let difference = evfield::synth::difference_stack(&scattered, &incident)?;
    if a.all_kinds {
        save_stack(out.join("scattered.evls"), &scattered)?;
        save_stack(out.join("incident.evls"), &incident)?;
    }
    save_stack(out.join("difference.evls"), &difference)?;
    #[derive(Serialize)]
    struct SimDoc<'a> {
        schema_version: u32,
        provenance: Provenance,
        phantom: &'a evfield::synth::ScenePhantom,
        frames: usize,
    }
    let mut provenance = Provenance::new(cfg.sha256());
    provenance.seed = Some(seed);
    write_json(
        &out.join("phantom.json"),
        &SimDoc {
            schema_version: SCHEMA_VERSION,
            provenance,
            phantom: &scene,
            frames: cfg.frames,
        },
    )
}

fn write_profile(path: &Path, profile: &LineProfile, hash: &str) -> CliResult<()> {
    let rows: Vec<Vec<f64>> = (0..profile.len())
        .map(|i| vec![profile.x_nm[i], profile.y[i], profile.sigma[i]])
        .collect();
    write_csv(path, hash, &["x_nm", "y_counts", "sigma"], &rows)
}

#[derive(Debug, Serialize)]
struct FitDoc {
    schema_version: u32,
    provenance: Provenance,
    #[serde(flatten)]
    fit: DecayFit,
    rows_averaged: usize,
    frames_averaged: usize,
    shifts: Vec<[i32; 2]>,
}

fn reduce(a: ReduceArgs, argv: &[String]) -> CliResult<()> {
    let cfg = load_config(&a.common, None)?;
    let stack = load_stack(&a.stack)?;
    let mut params = cfg.reduce.clone();
    params.interface_col = a
        .interface_col
        .or(params.interface_col)
        .or(Some(cfg.phantom.interface_col));
    if let Some(r) = a.rows {
        params.rows = r;
    }
    if let Some(m) = a.max_shift {
        params.max_shift = m;
    }
    if let (Some(x_min), Some(x_max)) = (a.x_min, a.x_max) {
        params.window = Some(FitWindow { x_min, x_max });
    }
    let r = reduce_stack(stack, &params)?;
    let hash = cfg.sha256();
    write_profile(&a.common.out.join("profile.csv"), &r.profile, &hash)?;
    let mut provenance = Provenance::new(hash);
    provenance.input = Some(a.stack.display().to_string());
    provenance.command = argv.to_vec();
    write_json(
        &a.common.out.join("fit.json"),
        &FitDoc {
            schema_version: SCHEMA_VERSION,
            provenance,
            rows_averaged: r.profile.rows_averaged,
            frames_averaged: r.profile.frames_averaged,
            fit: r.fit,
            shifts: r.shifts,
        },
    )
}

#[derive(Debug, Deserialize)]
struct SeriesRow {
    #[serde(rename = "dE_eV")]
    delta_e_ev: f64,
    xi_nm: f64,
    sigma_nm: f64,
    #[serde(default)]
    condition: Option<String>,
}

pub fn read_series(path: &Path) -> CliResult<DecaySeries> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, row) in reader.deserialize::<SeriesRow>().enumerate() {
        let row = row.map_err(|e| CliError::Input(format!("{} row {}: {e}", path.display(), i + 1)))?;
        points.push(SeriesPoint {
            condition: row.condition.unwrap_or_default(),
            provenance: format!("{}:{}", path.display(), i + 1),
            ..SeriesPoint::new(row.delta_e_ev, row.xi_nm, row.sigma_nm)
        });
    }
    Ok(DecaySeries::new(points)?)
}

pub fn write_series(path: &Path, series: &DecaySeries, hash: &str) -> CliResult<()> {
    let rows: Vec<Vec<f64>> = series
        .points()
        .iter()
        .map(|p| vec![p.delta_e_ev, p.x_i_nm, p.sigma_nm])
        .collect();
    write_csv(path, hash, &["dE_eV", "xi_nm", "sigma_nm"], &rows)
}

#[derive(Debug, Serialize)]
struct LawDoc {
    schema_version: u32,
    provenance: Provenance,
    #[serde(flatten)]
    result: LawFitResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_condition: Option<Vec<(String, ReciprocalFit)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intercept: Option<InterceptFit>,
}

fn fit_law(a: FitLawArgs) -> CliResult<()> {
    let mut cfg = load_config(&a.common, None)?;
    if let Some(t) = a.threshold_reciprocal {
        cfg.thresholds.reciprocal = t;
    }
    if let Some(t) = a.threshold_sqrt {
        cfg.thresholds.sqrt = t;
    }
    let series = read_series(&a.series)?;
    let result = discriminate(&series, cfg.thresholds)?;
    let per_condition = a
        .by_condition
        .then(|| fit_reciprocal_by_condition(&series))
        .transpose()?;
    let intercept = a
        .intercept
        .then(|| fit_reciprocal_with_intercept(&series))
        .transpose()?;
    let mut provenance = Provenance::new(cfg.sha256());
    provenance.input = Some(a.series.display().to_string());
    write_json(
        &a.common.out.join("lawfit.json"),
        &LawDoc {
            schema_version: SCHEMA_VERSION,
            provenance,
            result,
            per_condition,
            intercept,
        },
    )
}

fn write_scan(path: &Path, scan: &[evfield::multislice::DefocusPoint], hash: &str) -> CliResult<()> {
    let rows: Vec<Vec<f64>> = scan
        .iter()
        .map(|p| vec![p.defocus_nm, p.fringe_amplitude, p.tail_extent_nm])
        .collect();
    write_csv(path, hash, &["defocus_nm", "fringe_amplitude", "tail_extent_nm"], &rows)
}

fn multislice(a: MultisliceArgs) -> CliResult<()> {
    let cfg = load_config(&a.common, None)?;
    let hash = cfg.sha256();
    let (control, exit) = experiment::multislice_control(&cfg)?;
    let out = &a.common.out;
    save_sim_image(
        out.join("exit_intensity.evls"),
        &exit.intensity(),
        exit.pixel_size_nm,
        0.0,
    )?;
    write_scan(&out.join("defocus_scan.csv"), &control.scan, &hash)?;
    #[derive(Serialize)]
    struct Doc {
        schema_version: u32,
        provenance: Provenance,
        #[serde(flatten)]
        control: experiment::MultisliceControl,
    }
    write_json(
        &out.join("multislice.json"),
        &Doc {
            schema_version: SCHEMA_VERSION,
            provenance: Provenance::new(hash),
            control,
        },
    )
}

fn reproduce(a: ReproduceArgs) -> CliResult<()> {
    let cfg = load_config(&a.common, a.seed)?;
    let start = Instant::now();
    let (report, _profiles, mut timing) = experiment::reproduce(&cfg)?;
    let out = &a.common.out;
    let hash = report.provenance.config_sha256.clone();
    let series = experiment::series_of(&report.energies)?;
    let (fig_a, fig_b) = plot::emit_plots(&report)?;

    write_curves(&out.join("curves.csv"), &report.curves, &hash)?;
    write_series(&out.join("series.csv"), &series, &hash)?;
    write_json(
        &out.join("lawfit.json"),
        &LawDoc {
            schema_version: SCHEMA_VERSION,
            provenance: report.provenance.clone(),
            result: report.lawfit.clone(),
            per_condition: None,
            intercept: None,
        },
    )?;
    write_scan(&out.join("defocus_scan.csv"), &report.multislice.scan, &hash)?;
    write_json(&out.join("report.json"), &report)?;
    write_text(&out.join("fig4a.svg"), &fig_a)?;
    write_text(&out.join("fig4b.svg"), &fig_b)?;
    timing.total_s = start.elapsed().as_secs_f64();
    write_json(&out.join("timing.json"), &timing)?;
    summarize(&report.energies, &report.lawfit, timing.total_s);
    Ok(())
}

fn summarize(energies: &[EnergyResult], law: &LawFitResult, seconds: f64) {
    for e in energies {
        eprintln!(
            "dE = {} eV: x_i = {} ± {} nm (truth {})",
            sci(e.delta_e_ev),
            sci(e.fit.x_i),
            sci(e.fit.sigma_x_i),
            sci(e.x_i_true_nm)
        );
    }
    eprintln!(
        "hbar_v = {} ± {} eV nm, v/c = {}, preferred {:?} (rss ratio {}), {:.1} s",
        sci(law.hbar_v),
        sci(law.sigma_hbar_v),
        sci(law.v_over_c),
        law.preferred_model,
        sci(law.rss_ratio),
        seconds
    );
}
