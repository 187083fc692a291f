use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::synth::FrameStack;

#[derive(Debug, Clone)]
pub struct Alignment {
    pub stack: FrameStack,
    /// `[dy, dx]` roll applied to each frame; frame 0 is the reference.
    pub shifts: Vec<[i32; 2]>,
    /// Frames that were all zero and therefore left in place.
    pub skipped: Vec<usize>,
}

pub fn align_stack(stack: &FrameStack, max_shift: usize) -> Result<Alignment> {
    align_stack_owned(stack.clone(), max_shift)
}

/// Largest shift searched on an `h × w` frame.
pub(crate) fn effective_max_shift(max_shift: usize, h: usize, w: usize) -> usize {
    max_shift.min(h.min(w).saturating_sub(1) / 2)
}

/// Rigid integer alignment against the running sum of already aligned frames.
///
/// Frame `k` is rolled (periodically) by the shift `s` maximizing
/// `Σ f_k(y, x)·A(y + s_y, x + s_x)` over `|s_y|, |s_x| ≤ max_shift`, where
/// `A` is the sum of the aligned frames `0..k`. Exact ties go to the smaller
/// `|s_y| + |s_x|`.
pub fn align_stack_owned(mut stack: FrameStack, max_shift: usize) -> Result<Alignment> {
    if stack.is_empty() {
        return Err(domain("stack", "cannot align an empty stack"));
    }
    let (h, w) = stack.dim();
    let m = effective_max_shift(max_shift, h, w) as i32;
    let mut candidates: Vec<[i32; 2]> = (-m..=m).flat_map(|dy| (-m..=m).map(move |dx| [dy, dx])).collect();
    candidates.sort_by_key(|&[dy, dx]| (dy.abs() + dx.abs(), dy, dx));

    let mut reference = vec![0.0f64; h * w];
    let mut shifts = Vec::with_capacity(stack.len());
    let mut skipped = Vec::new();

    for (k, frame) in stack.frames.iter_mut().enumerate() {
        let data: Vec<f64> = frame.counts.iter().map(|&c| f64::from(c)).collect();
        let degenerate = data.iter().all(|&v| v == 0.0);
        if degenerate {
            skipped.push(k);
        }
        let shift = if k == 0 || degenerate || candidates.len() == 1 {
            [0, 0]
        } else {
            let scores: Vec<f64> = candidates
                .par_iter()
                .map(|&[dy, dx]| correlation(&data, &reference, h, w, dy, dx))
                .collect();
            let mut best = 0;
            for (i, &s) in scores.iter().enumerate().skip(1) {
                if s > scores[best] {
                    best = i;
                }
            }
            candidates[best]
        };
        if shift != [0, 0] {
            frame.counts = roll(&frame.counts, shift);
        }
        for (r, &c) in reference.iter_mut().zip(frame.counts.iter()) {
            *r += f64::from(c);
        }
        shifts.push(shift);
    }
    if !skipped.is_empty() {
        log::warn!("alignment skipped {} all-zero frame(s)", skipped.len());
    }
    Ok(Alignment { stack, shifts, skipped })
}

fn correlation(frame: &[f64], reference: &[f64], h: usize, w: usize, dy: i32, dx: i32) -> f64 {
    let dx = dx.rem_euclid(w as i32) as usize;
    let mut total = 0.0;
    for y in 0..h {
        let ry = (y as i64 + i64::from(dy)).rem_euclid(h as i64) as usize;
        let f = &frame[y * w..(y + 1) * w];
        let a = &reference[ry * w..(ry + 1) * w];
        let (f_head, f_tail) = f.split_at(w - dx);
        let head: f64 = f_head.iter().zip(&a[dx..]).map(|(p, q)| p * q).sum();
        let tail: f64 = f_tail.iter().zip(&a[..dx]).map(|(p, q)| p * q).sum();
        total += head + tail;
    }
    total
}

/// `out(y, x) = in(y − dy, x − dx)` with periodic wrap.
pub(crate) fn roll(counts: &Array2<i32>, [dy, dx]: [i32; 2]) -> Array2<i32> {
    let (h, w) = counts.dim();
    Array2::from_shape_fn((h, w), |(y, x)| {
        let sy = (y as i64 - i64::from(dy)).rem_euclid(h as i64) as usize;
        let sx = (x as i64 - i64::from(dx)).rem_euclid(w as i64) as usize;
        counts[[sy, sx]]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_from_mean, StackGeometry, StackKind};

    fn textured(h: usize, w: usize) -> Array2<f64> {
        Array2::from_shape_fn((h, w), |(y, x)| {
            let (y, x) = (y as f64, x as f64);
            40.0 + 30.0 * ((0.37 * x).sin() * (0.23 * y).cos()).powi(2) + 20.0 * (-(x - 20.0).powi(2) / 30.0).exp()
        })
    }

    fn geometry(h: usize, w: usize) -> StackGeometry {
        StackGeometry {
            width: w,
            height: h,
            pixel_size_nm: 0.5,
            interface_col: None,
            delta_e_ev: 1.0,
        }
    }

    #[test]
    fn recovers_injected_shifts() {
        let (h, w) = (48, 64);
        let injected = [[0, 0], [2, -1], [-3, 4]];
        let s = generate_from_mean(&textured(h, w), geometry(h, w), 3, StackKind::Scattered, 11, &injected).unwrap();
        let a = align_stack(&s, 5).unwrap();
        for (got, inj) in a.shifts.iter().zip(&injected) {
            assert_eq!(*got, [-inj[0], -inj[1]]);
        }
        assert!(a.skipped.is_empty());
    }

    #[test]
    fn idempotent_on_aligned_stack() {
        let (h, w) = (48, 64);
        let s = generate_from_mean(
            &textured(h, w),
            geometry(h, w),
            4,
            StackKind::Scattered,
            3,
            &[[1, 2], [0, -2]],
        )
        .unwrap();
        let once = align_stack(&s, 4).unwrap();
        let twice = align_stack(&once.stack, 4).unwrap();
        assert!(twice.shifts.iter().all(|&s| s == [0, 0]));
        assert_eq!(twice.stack.frames, once.stack.frames);
    }

    #[test]
    fn zero_max_shift_and_single_frame_are_identity() {
        let (h, w) = (16, 16);
        let s = generate_from_mean(&textured(h, w), geometry(h, w), 3, StackKind::Scattered, 5, &[[0, 1]]).unwrap();
        let a = align_stack(&s, 0).unwrap();
        assert_eq!(a.stack.frames, s.frames);
        assert!(a.shifts.iter().all(|&s| s == [0, 0]));
        let one = align_stack(&s.leading(1), 3).unwrap();
        assert_eq!(one.shifts, vec![[0, 0]]);
    }

    #[test]
    fn all_zero_frames_are_flagged() {
        let (h, w) = (8, 8);
        let zero = generate_from_mean(&Array2::zeros((h, w)), geometry(h, w), 3, StackKind::Incident, 1, &[]).unwrap();
        let a = align_stack(&zero, 2).unwrap();
        assert_eq!(a.skipped, vec![0, 1, 2]);
        assert!(a.shifts.iter().all(|&s| s == [0, 0]));
    }

    #[test]
    fn roll_inverts() {
        let img = Array2::from_shape_fn((5, 7), |(y, x)| (y * 7 + x) as i32);
        assert_eq!(roll(&roll(&img, [2, -3]), [-2, 3]), img);
        assert_eq!(roll(&img, [0, 1])[[0, 1]], img[[0, 0]]);
    }
}
