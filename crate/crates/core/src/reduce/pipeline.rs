use serde::{Deserialize, Serialize};

use ndarray::s;

use super::align::{align_stack_owned, effective_max_shift};
use super::fit::{default_window, fit_exponential, DecayFit, FitWindow};
use super::profile::{average_stack, default_row_range, extract_profile, LineProfile, MeanFrame};
use crate::error::{domain, Result};
use crate::synth::FrameStack;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceParams {
    /// Overrides the interface column recorded with the stack.
    #[serde(default)]
    pub interface_col: Option<usize>,
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default = "default_max_shift")]
    pub max_shift: usize,
    /// Fixed fit window; the automatic window is used when absent.
    #[serde(default)]
    pub window: Option<FitWindow>,
}

fn default_rows() -> usize {
    1000
}

fn default_max_shift() -> usize {
    3
}

impl Default for ReduceParams {
    fn default() -> Self {
        Self {
            interface_col: None,
            rows: default_rows(),
            max_shift: default_max_shift(),
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub shifts: Vec<[i32; 2]>,
    pub skipped: Vec<usize>,
    pub profile: LineProfile,
    pub fit: DecayFit,
}

/// Align, average, extract the perpendicular profile and fit it.
pub fn reduce_stack(stack: FrameStack, params: &ReduceParams) -> Result<Reduction> {
    let interface_col = params
        .interface_col
        .or(stack.geometry.interface_col)
        .ok_or_else(|| domain("interface_col", "not recorded with the stack and not given"))?;
    let pixel_size = stack.geometry.pixel_size_nm;
    let (height, width) = stack.dim();
    let aligned = align_stack_owned(stack, params.max_shift)?;
    let mean = average_stack(&aligned.stack)?;
    // alignment rolls periodically: drop the border that may hold wrapped pixels
    let border = effective_max_shift(params.max_shift, height, width);
    if height <= 2 * border + 1 || width <= interface_col + border + 1 {
        return Err(domain(
            "frame",
            format!("{height}×{width} too small for a {border}-pixel alignment border"),
        ));
    }
    let (r0, r1) = default_row_range(height - 2 * border, params.rows);
    let interior = MeanFrame {
        mean: mean.mean.slice(s![.., ..width - border]).to_owned(),
        frames: mean.frames,
    };
    let profile = extract_profile(&interior, interface_col, (r0 + border, r1 + border), pixel_size)?;
    let window = match params.window {
        Some(w) => w,
        None => default_window(&profile)?,
    };
    let fit = fit_exponential(&profile, window)?;
    Ok(Reduction {
        shifts: aligned.shifts,
        skipped: aligned.skipped,
        profile,
        fit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoseReport {
    pub x_i_full: f64,
    pub x_i_sub: f64,
    pub sigma_full: f64,
    pub sigma_sub: f64,
    pub combined_sigma: f64,
    pub frames_full: usize,
    pub frames_sub: usize,
    pub consistent: bool,
}

/// Reduces the full stack and its leading `fraction` of frames and checks the
/// two decay lengths agree within three combined standard errors.
pub fn dose_independence_check(stack: &FrameStack, fraction: f64, params: &ReduceParams) -> Result<DoseReport> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(domain("fraction", format!("{fraction} outside (0, 1]")));
    }
    let n_sub = (fraction * stack.len() as f64).round() as usize;
    if n_sub < 1 {
        return Err(domain(
            "fraction",
            format!("{fraction} of {} frames leaves no frame", stack.len()),
        ));
    }
    let sub = stack.leading(n_sub);
    let full = reduce_stack(stack.clone(), params)?;
    let part = if n_sub == stack.len() {
        full.clone()
    } else {
        reduce_stack(sub, params)?
    };
    let combined = full.fit.sigma_x_i.hypot(part.fit.sigma_x_i);
    Ok(DoseReport {
        x_i_full: full.fit.x_i,
        x_i_sub: part.fit.x_i,
        sigma_full: full.fit.sigma_x_i,
        sigma_sub: part.fit.sigma_x_i,
        combined_sigma: combined,
        frames_full: stack.len(),
        frames_sub: n_sub,
        consistent: (full.fit.x_i - part.fit.x_i).abs() < 3.0 * combined,
    })
}
