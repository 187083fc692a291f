//! Experiment configuration (UTF-8 JSON, unknown keys rejected).

use std::path::{Path, PathBuf};

use evfield::lawfit::Thresholds;
use evfield::physics::LambdaConvention;
use evfield::reduce::ReduceParams;
use evfield::synth::{DecayModel, ScenePhantom, Spectrum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Energy dependence the phantom decay length follows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum PhantomLaw {
    /// x_i = κ/ΔE
    Reciprocal { kappa_ev_nm: f64 },
    /// x_i = κ′/√ΔE
    Sqrt { kappa_ev_sqrt_nm: f64 },
}

impl PhantomLaw {
    pub fn decay_model(&self, delta_e_ev: f64) -> DecayModel {
        match *self {
            Self::Reciprocal { kappa_ev_nm } => DecayModel::Exponential {
                x_i_nm: kappa_ev_nm / delta_e_ev,
            },
            Self::Sqrt { kappa_ev_sqrt_nm } => DecayModel::SqrtTunneling {
                l_t_nm: kappa_ev_sqrt_nm / delta_e_ev.sqrt(),
            },
        }
    }

    pub fn length_nm(&self, delta_e_ev: f64) -> f64 {
        self.decay_model(delta_e_ev).length_nm()
    }
}

/// Scene geometry and dose shared by every energy of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomConfig {
    pub width_px: usize,
    pub height_px: usize,
    pub pixel_size_nm: f64,
    pub interface_col: usize,
    pub mu_background: f64,
    pub mu_bulk: f64,
    pub mu_interface: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drift: Vec<[i32; 2]>,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        let d = ScenePhantom::desk_scale(DecayModel::Exponential { x_i_nm: 1.0 }, 1.0);
        Self {
            width_px: d.width_px,
            height_px: d.height_px,
            pixel_size_nm: d.pixel_size_nm,
            interface_col: d.interface_col,
            mu_background: d.mu_background,
            mu_bulk: d.mu_bulk,
            mu_interface: d.mu_interface,
            drift: Vec::new(),
        }
    }
}

impl PhantomConfig {
    pub fn scene(&self, model: DecayModel, delta_e_ev: f64) -> ScenePhantom {
        ScenePhantom {
            width_px: self.width_px,
            height_px: self.height_px,
            pixel_size_nm: self.pixel_size_nm,
            interface_col: self.interface_col,
            mu_background: self.mu_background,
            mu_bulk: self.mu_bulk,
            mu_interface: self.mu_interface,
            decay_model: model,
            delta_e_ev,
            drift: self.drift.clone(),
        }
    }
}

/// Low-dose run at a single decay length probing the absolute resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub x_i_nm: f64,
    pub mu_interface: f64,
    pub frames: usize,
    pub rows: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            x_i_nm: 19.0,
            mu_interface: 0.1,
            frames: 100,
            rows: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultisliceConfig {
    pub nx: usize,
    pub ny: usize,
    pub pixel_size_nm: f64,
    pub inner_potential_v: f64,
    pub thickness_nm: f64,
    pub n_slices: usize,
    pub edge_col: usize,
    pub band_limit: bool,
    pub defocus_nm: Vec<f64>,
}

impl Default for MultisliceConfig {
    fn default() -> Self {
        Self {
            nx: 512,
            ny: 1,
            pixel_size_nm: 0.5,
            inner_potential_v: 17.0,
            thickness_nm: 2.0,
            n_slices: 4,
            edge_col: 256,
            band_limit: true,
            defocus_nm: (-8..=8).map(|k| f64::from(k) * 25.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub beam_voltage_v: f64,
    /// energy losses reduced by `reproduce`
    pub grid_ev: Vec<f64>,
    /// grid of the model-curve table; log-spaced 0.5 to 100 eV when empty
    #[serde(default)]
    pub curve_grid_ev: Vec<f64>,
    pub delta_phi_rad: f64,
    #[serde(default)]
    pub convention: LambdaConvention,
    /// κ used for the x_i_fit column when no fit is available
    pub kappa_fit_ev_nm: f64,
    pub phantom_law: PhantomLaw,
    pub phantom: PhantomConfig,
    /// scales μ_interface by the spectral weight at each energy when present
    #[serde(default)]
    pub spectral_scaling: Option<Spectrum>,
    pub frames: usize,
    pub reduce: ReduceParams,
    pub thresholds: Thresholds,
    pub resolution_probe: ProbeConfig,
    pub multislice: MultisliceConfig,
    pub seed: u64,
    /// not part of the provenance hash
    #[serde(default, skip_serializing)]
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            beam_voltage_v: 300e3,
            grid_ev: vec![0.9, 2.5, 5.0, 10.0, 20.0, 40.0],
            curve_grid_ev: Vec::new(),
            delta_phi_rad: 0.5,
            convention: LambdaConvention::default(),
            kappa_fit_ev_nm: 106.0,
            phantom_law: PhantomLaw::Reciprocal { kappa_ev_nm: 106.0 },
            phantom: PhantomConfig::default(),
            spectral_scaling: None,
            frames: 100,
            reduce: ReduceParams::default(),
            thresholds: Thresholds::default(),
            resolution_probe: ProbeConfig::default(),
            multislice: MultisliceConfig::default(),
            seed: 42,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.grid_ev.is_empty() || self.grid_ev.iter().any(|&e| !(e > 0.0)) {
            return Err(CliError::Config("grid_ev must hold positive energies".into()));
        }
        if self.frames == 0 {
            return Err(CliError::Config("frames must be at least 1".into()));
        }
        Ok(())
    }

    /// Model-curve grid, 10^(k/10) eV for k = −3..=20 unless configured.
    pub fn curve_grid(&self) -> Vec<f64> {
        if self.curve_grid_ev.is_empty() {
            (-3..=20).map(|k| 10f64.powf(f64::from(k) / 10.0)).collect()
        } else {
            self.curve_grid_ev.clone()
        }
    }

    /// Hex SHA-256 of the canonical JSON form (output directory excluded).
    pub fn sha256(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
