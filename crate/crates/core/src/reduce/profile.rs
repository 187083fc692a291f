use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::synth::FrameStack;

/// Per-pixel arithmetic mean of a stack.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFrame {
    pub mean: Array2<f64>,
    pub frames: usize,
}

pub fn average_stack(stack: &FrameStack) -> Result<MeanFrame> {
    if stack.is_empty() {
        return Err(domain("stack", "cannot average an empty stack"));
    }
    // integer sums below 2^53 are exact in f64, so the result does not depend
    // on summation order
    let mut sum = Array2::<f64>::zeros(stack.dim());
    for f in &stack.frames {
        sum.zip_mut_with(&f.counts, |s, &c| *s += f64::from(c));
    }
    let n = stack.len() as f64;
    sum.mapv_inplace(|v| v / n);
    Ok(MeanFrame {
        mean: sum,
        frames: stack.len(),
    })
}

/// Mean counts versus distance from the interface, averaged along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineProfile<T = f64> {
    /// distance into vacuum, nm, ascending from 0 at the interface column
    pub x_nm: Vec<T>,
    pub y: Vec<T>,
    /// standard error of the row average
    pub sigma: Vec<T>,
    pub rows_averaged: usize,
    pub frames_averaged: usize,
}

impl<T: Real> LineProfile<T> {
    pub fn len(&self) -> usize {
        self.x_nm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_nm.is_empty()
    }

    /// True when some point has zero spread (noiseless or saturated input).
    pub fn flagged(&self) -> bool {
        self.sigma.iter().any(|&s| s == T::zero())
    }

    pub fn cast<U: Real>(&self) -> LineProfile<U> {
        let conv = |v: &Vec<T>| v.iter().map(|&x| U::lit(x.to_f64_lossy())).collect();
        LineProfile {
            x_nm: conv(&self.x_nm),
            y: conv(&self.y),
            sigma: conv(&self.sigma),
            rows_averaged: self.rows_averaged,
            frames_averaged: self.frames_averaged,
        }
    }
}

/// `rows` rows centred in a frame of `height` rows (all rows if fewer).
pub fn default_row_range(height: usize, rows: usize) -> (usize, usize) {
    let rows = rows.min(height);
    let r0 = (height - rows) / 2;
    (r0, r0 + rows)
}

pub fn extract_profile(
    mean: &MeanFrame,
    interface_col: usize,
    (r0, r1): (usize, usize),
    pixel_size_nm: f64,
) -> Result<LineProfile<f64>> {
    let (h, w) = mean.mean.dim();
    if r1 <= r0 || r1 - r0 < 2 || r1 > h {
        return Err(domain(
            "row_range",
            format!("({r0}, {r1}) must span at least 2 of {h} rows"),
        ));
    }
    if interface_col >= w {
        return Err(domain(
            "interface_col",
            format!("{interface_col} outside frame of width {w}"),
        ));
    }
    if !(pixel_size_nm > 0.0) {
        return Err(domain("pixel_size_nm", format!("{pixel_size_nm} must be positive")));
    }
    let rows = r1 - r0;
    let n = rows as f64;
    let block = mean.mean.slice(ndarray::s![r0..r1, interface_col..]);
    let mut profile = LineProfile {
        x_nm: Vec::with_capacity(w - interface_col),
        y: Vec::with_capacity(w - interface_col),
        sigma: Vec::with_capacity(w - interface_col),
        rows_averaged: rows,
        frames_averaged: mean.frames,
    };
    for (i, col) in block.columns().into_iter().enumerate() {
        let m = col.sum() / n;
        let var = col.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        profile.x_nm.push(i as f64 * pixel_size_nm);
        profile.y.push(m);
        profile.sigma.push((var / n).sqrt());
    }
    Ok(profile)
}
