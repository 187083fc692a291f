use serde::{Deserialize, Serialize};

use super::stack::StackKind;
use crate::error::{domain, Result};

/// Largest admissible per-pixel mean; counts are stored as i32.
pub const MAX_MEAN: f64 = 2_147_483_648.0;

/// Vacuum-side intensity law of the phantom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DecayModel {
    /// μ_interface·exp(−x/x_i)
    Exponential { x_i_nm: f64 },
    /// μ_interface·exp(−x/l_t), with l_t following the square-root law across a series
    SqrtTunneling { l_t_nm: f64 },
}

impl DecayModel {
    pub fn length_nm(&self) -> f64 {
        match *self {
            Self::Exponential { x_i_nm } => x_i_nm,
            Self::SqrtTunneling { l_t_nm } => l_t_nm,
        }
    }
}

/// Sample/vacuum interface parallel to the frame columns. The sample fills
/// columns `0..interface_col`; vacuum starts at `interface_col` (x = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenePhantom {
    pub width_px: usize,
    pub height_px: usize,
    pub pixel_size_nm: f64,
    pub interface_col: usize,
    /// incident distribution, counts/px/frame
    pub mu_background: f64,
    /// sample region of scattered frames, counts/px/frame
    pub mu_bulk: f64,
    /// I₀ at the interface, counts/px/frame
    pub mu_interface: f64,
    pub decay_model: DecayModel,
    pub delta_e_ev: f64,
    /// Rigid integer `[dy, dx]` drift per frame (cycled); empty means none.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drift: Vec<[i32; 2]>,
}

impl ScenePhantom {
    /// 512 × 2048 px at 0.5 nm/px with the interface 64 px from the left edge.
    pub fn desk_scale(decay_model: DecayModel, delta_e_ev: f64) -> Self {
        Self {
            width_px: 512,
            height_px: 2048,
            pixel_size_nm: 0.5,
            interface_col: 64,
            mu_background: 0.01,
            mu_bulk: 2.0,
            mu_interface: 2.0,
            decay_model,
            delta_e_ev,
            drift: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(domain("phantom", "frame dimensions must be non-zero"));
        }
        if self.width_px > i32::MAX as usize || self.height_px > i32::MAX as usize {
            return Err(domain("phantom", "frame dimensions too large"));
        }
        if !(self.pixel_size_nm > 0.0) || !self.pixel_size_nm.is_finite() {
            return Err(domain(
                "pixel_size_nm",
                format!("{} must be positive", self.pixel_size_nm),
            ));
        }
        if self.interface_col == 0 || self.interface_col >= self.width_px {
            return Err(domain(
                "interface_col",
                format!("{} must lie strictly inside 0..{}", self.interface_col, self.width_px),
            ));
        }
        for (what, mu) in [
            ("mu_background", self.mu_background),
            ("mu_bulk", self.mu_bulk),
            ("mu_interface", self.mu_interface),
        ] {
            if !(mu >= 0.0) || !mu.is_finite() {
                return Err(domain(what, format!("{mu} must be finite and non-negative")));
            }
        }
        let len = self.decay_model.length_nm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(domain("decay length", format!("{len} nm must be positive")));
        }
        let peak = self.mu_background + self.mu_interface.max(self.mu_bulk);
        if peak > MAX_MEAN {
            return Err(domain("phantom means", format!("{peak} exceeds 2^31 counts/px")));
        }
        Ok(())
    }

    /// Expected vacuum intensity above background at distance `x_nm` from the interface.
    pub fn model_intensity(&self, x_nm: f64) -> f64 {
        self.mu_interface * (-x_nm / self.decay_model.length_nm()).exp()
    }

    /// Per-column mean counts of an undrifted frame of the given kind.
    pub fn column_means(&self, kind: StackKind) -> Vec<f64> {
        (0..self.width_px)
            .map(|c| match kind {
                StackKind::Incident => self.mu_background,
                StackKind::Scattered | StackKind::Difference => {
                    let base = if kind == StackKind::Scattered {
                        self.mu_background
                    } else {
                        0.0
                    };
                    if c < self.interface_col {
                        if kind == StackKind::Scattered {
                            self.mu_bulk
                        } else {
                            self.mu_bulk - self.mu_background
                        }
                    } else {
                        let x = (c - self.interface_col) as f64 * self.pixel_size_nm;
                        base + self.model_intensity(x)
                    }
                }
            })
            .collect()
    }

    pub fn drift_for(&self, frame: usize) -> [i32; 2] {
        if self.drift.is_empty() {
            [0, 0]
        } else {
            self.drift[frame % self.drift.len()]
        }
    }
}
