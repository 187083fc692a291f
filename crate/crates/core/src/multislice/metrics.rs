use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_defocus, WaveField, WaveReal};
use crate::error::{domain, Result};
use crate::scalar::Real;

const FRINGE_HALF_WIDTH_PX: usize = 20;
const TAIL_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeMetrics<T = f64> {
    /// peak-to-peak intensity within 20 px of the edge over the vacuum level
    pub fringe_amplitude: T,
    /// furthest distance into vacuum where the intensity departs from the
    /// vacuum level by more than 1% of the bulk mean
    pub tail_extent_nm: T,
}

fn mean<T: Real>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len())
}

/// Edge metrics of an image whose sample occupies columns `< edge_col`.
///
/// The vacuum level is the mean of the third quarter of the vacuum columns
/// and the bulk level the mean of the middle half of the sample columns.
/// The tail is searched over the first half of the vacuum.
pub fn edge_metrics<T: Real>(image: &Array2<T>, edge_col: usize, pixel_size_nm: T) -> Result<EdgeMetrics<T>> {
    let (h, w) = image.dim();
    if h == 0 || edge_col < 4 || edge_col + 4 > w {
        return Err(domain(
            "edge_col",
            format!("{edge_col} not inside an image of width {w}"),
        ));
    }
    if !(pixel_size_nm > T::zero()) {
        return Err(domain("pixel_size", format!("{pixel_size_nm} must be positive")));
    }
    let profile: Vec<T> = image
        .columns()
        .into_iter()
        .map(|c| c.sum() / T::from_usize_lossy(h))
        .collect();
    let vac = w - edge_col;
    let reference = mean(&profile[edge_col + vac / 2..edge_col + 3 * vac / 4]);
    let bulk = mean(&profile[edge_col / 4..3 * edge_col / 4]);

    let lo = edge_col.saturating_sub(FRINGE_HALF_WIDTH_PX);
    let hi = (edge_col + FRINGE_HALF_WIDTH_PX + 1).min(w);
    let window = &profile[lo..hi];
    let peak = window.iter().copied().fold(T::neg_infinity(), T::max);
    let trough = window.iter().copied().fold(T::infinity(), T::min);
    let norm = reference.abs().max(bulk.abs());
    let fringe_amplitude = if norm > T::zero() {
        (peak - trough) / norm
    } else {
        T::zero()
    };

    let level = T::lit(TAIL_LEVEL) * bulk.abs();
    let tail_px = (edge_col..edge_col + vac / 2)
        .rev()
        .find(|&c| (profile[c] - reference).abs() > level)
        .map_or(0, |c| c - edge_col);
    let tail_extent_nm = if level > T::zero() {
        T::from_usize_lossy(tail_px) * pixel_size_nm
    } else {
        T::zero()
    };
    Ok(EdgeMetrics {
        fringe_amplitude,
        tail_extent_nm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefocusPoint<T = f64> {
    pub defocus_nm: T,
    pub fringe_amplitude: T,
    pub tail_extent_nm: T,
}

/// Edge metrics of the exit wave imaged at each defocus, evaluated in parallel.
pub fn defocus_scan<T: WaveReal>(
    exit: &WaveField<T>,
    defocus_nm: &[T],
    edge_col: usize,
) -> Result<Vec<DefocusPoint<T>>> {
    defocus_nm
        .par_iter()
        .map(|&df| {
            let m = edge_metrics(&apply_defocus(exit, df)?, edge_col, exit.pixel_size_nm)?;
            Ok(DefocusPoint {
                defocus_nm: df,
                fringe_amplitude: m.fringe_amplitude,
                tail_extent_nm: m.tail_extent_nm,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_image_has_zero_metrics() {
        for v in [0.0, 3.0] {
            let m = edge_metrics(&Array2::from_elem((4, 128), v), 32, 0.5).unwrap();
            assert_eq!(m.fringe_amplitude, 0.0);
            assert_eq!(m.tail_extent_nm, 0.0);
        }
    }

    #[test]
    fn exponential_tail_reaches_ln100_decay_lengths() {
        let (edge, px, xi) = (256usize, 0.5, 10.0);
        let img = Array2::from_shape_fn((2, 1024), |(_, c)| {
            if c < edge {
                1.0
            } else {
                (-((c - edge) as f64) * px / xi).exp()
            }
        });
        let m = edge_metrics(&img, edge, px).unwrap();
        assert!(
            m.tail_extent_nm >= 40.0 && m.tail_extent_nm <= 50.0,
            "{}",
            m.tail_extent_nm
        );
        assert!((m.tail_extent_nm - 100f64.ln() * xi).abs() <= px);
    }

    #[test]
    fn edge_must_be_inside() {
        let img = Array2::from_elem((2, 64), 1.0);
        assert!(edge_metrics(&img, 0, 0.5).is_err());
        assert!(edge_metrics(&img, 63, 0.5).is_err());
    }
}
