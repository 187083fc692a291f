//! Orchestration of the synthetic measurement, reduction and control runs.

use std::time::Instant;

use evfield::lawfit::{discriminate, DecaySeries, LawFitResult, SeriesPoint};
use evfield::multislice::{
    apply_defocus, defocus_scan, edge_metrics, multislice_exit_wave, propagate, DefocusPoint, EdgeMetrics, SlabPhantom,
    WaveField,
};
use evfield::physics::{beam_kinematics, interaction_constant, model_curve_table, BeamState, ModelCurveSet};
use evfield::reduce::{reduce_stack, DecayFit, LineProfile, ReduceParams};
use evfield::synth::{
    derive_seed, difference_stack, generate_stack, spectral_weight, DecayModel, FrameStack, ScenePhantom, StackKind,
};
use evfield::units::{ElectronVolts, EvNm, Radians, Volts};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Provenance, SCHEMA_VERSION};

/// Index offset separating the resolution probe seed from the energy seeds.
const PROBE_STREAM: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyResult {
    pub delta_e_ev: f64,
    pub x_i_true_nm: f64,
    pub mu_interface: f64,
    pub seed: u64,
    pub fit: DecayFit,
    pub relative_error: f64,
    pub frames_shifted: usize,
    pub frames_skipped: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub x_i_true_nm: f64,
    pub mu_interface: f64,
    pub frames: usize,
    pub rows: usize,
    pub seed: u64,
    pub fit: DecayFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultisliceControl {
    pub wavelength_nm: f64,
    pub interaction_constant: f64,
    pub slab: SlabPhantom,
    pub at_focus: EdgeMetrics,
    pub scan: Vec<DefocusPoint>,
    pub min_fringe_defocus_nm: f64,
    /// relative change of Σ|ψ|² after 100 nm of free propagation
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub beam: BeamState,
    pub energies: Vec<EnergyResult>,
    pub lawfit: LawFitResult,
    pub curves: ModelCurveSet,
    pub resolution_probe: ProbeResult,
    pub multislice: MultisliceControl,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timing {
    pub stages: Vec<(String, f64)>,
    pub total_s: f64,
}

impl Timing {
    fn record(&mut self, stage: impl Into<String>, since: Instant) {
        let s = since.elapsed().as_secs_f64();
        let stage = stage.into();
        log::info!("{stage}: {s:.2} s");
        self.stages.push((stage, s));
    }
}

pub fn beam(cfg: &ExperimentConfig) -> CliResult<BeamState> {
    Ok(beam_kinematics(Volts(cfg.beam_voltage_v))?)
}

pub fn scene(cfg: &ExperimentConfig, delta_e_ev: f64) -> CliResult<ScenePhantom> {
    let mut scene = cfg.phantom.scene(cfg.phantom_law.decay_model(delta_e_ev), delta_e_ev);
    if let Some(spectrum) = &cfg.spectral_scaling {
        scene.mu_interface *= spectral_weight(delta_e_ev, spectrum)?;
    }
    Ok(scene)
}

/// Incident and scattered stacks of one scene, returned as their difference.
pub fn simulate_difference(scene: &ScenePhantom, frames: usize, seed: u64) -> CliResult<FrameStack> {
    let scattered = generate_stack(scene, frames, StackKind::Scattered, seed)?;
    let incident = generate_stack(scene, frames, StackKind::Incident, seed)?;
    Ok(difference_stack(&scattered, &incident)?)
}

pub fn reduce_energy(cfg: &ExperimentConfig, index: usize) -> CliResult<(EnergyResult, LineProfile)> {
    let delta_e_ev = cfg.grid_ev[index];
    let seed = derive_seed(cfg.seed, index as u64);
    let scene = scene(cfg, delta_e_ev)?;
    let stack = simulate_difference(&scene, cfg.frames, seed)?;
    let r = reduce_stack(stack, &cfg.reduce)?;
    let truth = scene.decay_model.length_nm();
    Ok((
        EnergyResult {
            delta_e_ev,
            x_i_true_nm: truth,
            mu_interface: scene.mu_interface,
            seed,
            relative_error: r.fit.sigma_x_i / r.fit.x_i,
            fit: r.fit,
            frames_shifted: r.shifts.iter().filter(|s| **s != [0, 0]).count(),
            frames_skipped: r.skipped,
        },
        r.profile,
    ))
}

pub fn resolution_probe(cfg: &ExperimentConfig) -> CliResult<ProbeResult> {
    let p = &cfg.resolution_probe;
    let seed = derive_seed(cfg.seed, PROBE_STREAM);
    let mut scene = cfg.phantom.scene(
        DecayModel::Exponential { x_i_nm: p.x_i_nm },
        cfg.kappa_fit_ev_nm / p.x_i_nm,
    );
    scene.mu_interface = p.mu_interface;
    let stack = simulate_difference(&scene, p.frames, seed)?;
    let params = ReduceParams {
        rows: p.rows,
        ..cfg.reduce.clone()
    };
    let r = reduce_stack(stack, &params)?;
    Ok(ProbeResult {
        x_i_true_nm: p.x_i_nm,
        mu_interface: p.mu_interface,
        frames: p.frames,
        rows: p.rows,
        seed,
        fit: r.fit,
    })
}

pub fn series_of(energies: &[EnergyResult]) -> CliResult<DecaySeries> {
    Ok(DecaySeries::new(
        energies
            .iter()
            .map(|e| SeriesPoint {
                provenance: format!("seed={}", e.seed),
                ..SeriesPoint::new(e.delta_e_ev, e.fit.x_i, e.fit.sigma_x_i)
            })
            .collect(),
    )?)
}

pub fn curves(cfg: &ExperimentConfig, kappa_fit: f64) -> CliResult<ModelCurveSet> {
    let grid: Vec<ElectronVolts> = cfg.curve_grid().into_iter().map(ElectronVolts).collect();
    Ok(model_curve_table(
        &beam(cfg)?,
        &grid,
        Radians(cfg.delta_phi_rad),
        EvNm(kappa_fit),
        cfg.convention,
    )?)
}

/// Elastic slab exit wave and its edge metrics over the configured defocus scan.
pub fn multislice_control(cfg: &ExperimentConfig) -> CliResult<(MultisliceControl, WaveField)> {
    let m = &cfg.multislice;
    if !m.defocus_nm.contains(&0.0) {
        return Err(CliError::Config("multislice.defocus_nm must include 0".into()));
    }
    let beam = beam(cfg)?;
    let slab = SlabPhantom {
        inner_potential_v: m.inner_potential_v,
        thickness_nm: m.thickness_nm,
        n_slices: m.n_slices,
        edge_col: m.edge_col,
        interaction_constant: interaction_constant(&beam),
        band_limit: m.band_limit,
    };
    let incident = WaveField::plane_wave(m.nx, m.ny, m.pixel_size_nm, beam.wavelength.value())?;
    let exit = multislice_exit_wave(&incident, &slab)?;
    let at_focus = edge_metrics(&apply_defocus(&exit, 0.0)?, m.edge_col, m.pixel_size_nm)?;
    let scan = defocus_scan(&exit, &m.defocus_nm, m.edge_col)?;
    // ties resolve to the defocus closest to zero
    let best = scan
        .iter()
        .min_by(|a, b| {
            a.fringe_amplitude
                .total_cmp(&b.fringe_amplitude)
                .then(a.defocus_nm.abs().total_cmp(&b.defocus_nm.abs()))
        })
        .expect("scan includes zero");
    let before = exit.total_intensity();
    let after = propagate(&exit, 100.0)?.total_intensity();
    Ok((
        MultisliceControl {
            wavelength_nm: beam.wavelength.value(),
            interaction_constant: slab.interaction_constant,
            slab,
            at_focus,
            min_fringe_defocus_nm: best.defocus_nm,
            scan,
            norm_drift: ((after - before) / before).abs(),
        },
        exit,
    ))
}

/// The full pipeline: every grid energy, the law fit, model curves, the
/// resolution probe and the multislice control.
pub fn reproduce(cfg: &ExperimentConfig) -> CliResult<(RunReport, Vec<LineProfile>, Timing)> {
    let start = Instant::now();
    let mut timing = Timing::default();
    let mut energies = Vec::with_capacity(cfg.grid_ev.len());
    let mut profiles = Vec::with_capacity(cfg.grid_ev.len());
    for k in 0..cfg.grid_ev.len() {
        let t = Instant::now();
        let (e, p) = reduce_energy(cfg, k)?;
        timing.record(format!("energy {} eV", cfg.grid_ev[k]), t);
        energies.push(e);
        profiles.push(p);
    }
    let t = Instant::now();
    let lawfit = discriminate(&series_of(&energies)?, cfg.thresholds)?;
    let curves = curves(cfg, lawfit.hbar_v)?;
    timing.record("law fit and curves", t);
    let t = Instant::now();
    let resolution_probe = resolution_probe(cfg)?;
    timing.record("resolution probe", t);
    let t = Instant::now();
    let (multislice, _) = multislice_control(cfg)?;
    timing.record("multislice control", t);
    timing.total_s = start.elapsed().as_secs_f64();

    let mut provenance = Provenance::new(cfg.sha256());
    provenance.seed = Some(cfg.seed);
    Ok((
        RunReport {
            schema_version: SCHEMA_VERSION,
            provenance,
            beam: beam(cfg)?,
            energies,
            lawfit,
            curves,
            resolution_probe,
            multislice,
        },
        profiles,
        timing,
    ))
}
