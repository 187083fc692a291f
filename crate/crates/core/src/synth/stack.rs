use std::sync::Arc;

use ndarray::{Array2, Zip};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::phantom::ScenePhantom;
use super::poisson::PoissonSampler;
use super::rng::StreamKey;
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StackKind {
    Incident,
    Scattered,
    /// I_s − I; may hold negative counts.
    Difference,
}

impl StackKind {
    fn stream_domain(self) -> u64 {
        match self {
            Self::Incident => 1,
            Self::Scattered => 2,
            Self::Difference => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackGeometry {
    pub width: usize,
    pub height: usize,
    pub pixel_size_nm: f64,
    /// Unknown for stacks read back from files that do not record it.
    pub interface_col: Option<usize>,
    pub delta_e_ev: f64,
}

impl StackGeometry {
    pub fn of(phantom: &ScenePhantom) -> Self {
        Self {
            width: phantom.width_px,
            height: phantom.height_px,
            pixel_size_nm: phantom.pixel_size_nm,
            interface_col: Some(phantom.interface_col),
            delta_e_ev: phantom.delta_e_ev,
        }
    }
}

/// One detector read-out. `counts` is indexed `[row, col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub counts: Array2<i32>,
    pub index: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct FrameStack {
    pub frames: Vec<Frame>,
    pub kind: StackKind,
    pub geometry: StackGeometry,
    pub phantom: Option<Arc<ScenePhantom>>,
}

impl FrameStack {
    pub fn new(frames: Vec<Frame>, kind: StackKind, geometry: StackGeometry) -> Result<Self> {
        let dim = (geometry.height, geometry.width);
        if let Some(f) = frames.iter().find(|f| f.counts.dim() != dim) {
            return Err(Error::Shape(format!(
                "frame {} is {:?}, stack geometry is {:?}",
                f.index,
                f.counts.dim(),
                dim
            )));
        }
        Ok(Self {
            frames,
            kind,
            geometry,
            phantom: None,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// (height, width)
    pub fn dim(&self) -> (usize, usize) {
        (self.geometry.height, self.geometry.width)
    }

    /// The first `n` frames.
    pub fn leading(&self, n: usize) -> Self {
        Self {
            frames: self.frames.iter().take(n).cloned().collect(),
            ..self.clone_header()
        }
    }

    /// Appends the frames of `other`; both stacks must share shape and kind.
    pub fn concat(mut self, other: FrameStack) -> Result<Self> {
        if self.dim() != other.dim() || self.kind != other.kind {
            return Err(Error::Shape(
                "cannot concatenate stacks of different shape or kind".into(),
            ));
        }
        let offset = self.frames.len();
        self.frames
            .extend(other.frames.into_iter().enumerate().map(|(i, mut f)| {
                f.index = offset + i;
                f
            }));
        Ok(self)
    }

    fn clone_header(&self) -> Self {
        Self {
            frames: Vec::new(),
            kind: self.kind,
            geometry: self.geometry,
            phantom: self.phantom.clone(),
        }
    }
}

fn check_frames(n_frames: usize) -> Result<()> {
    if n_frames == 0 {
        return Err(domain("n_frames", "at least one frame is required"));
    }
    if n_frames > u32::MAX as usize {
        return Err(domain("n_frames", "too many frames"));
    }
    Ok(())
}

fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Draws `n_frames` Poisson frames of the phantom.
///
/// Drift `[dy, dx]` rolls the scene (periodically) before detection. Rows are
/// uniform, so only `dx` changes the expected frame.
pub fn generate_stack(phantom: &ScenePhantom, n_frames: usize, kind: StackKind, seed: u64) -> Result<FrameStack> {
    phantom.validate()?;
    check_frames(n_frames)?;
    if kind == StackKind::Difference {
        return Err(domain("kind", "difference stacks come from difference_stack"));
    }
    let samplers = phantom
        .column_means(kind)
        .into_iter()
        .map(PoissonSampler::new)
        .collect::<Result<Vec<_>>>()?;
    let key = StreamKey::new(seed, kind.stream_domain());
    let (h, w) = (phantom.height_px, phantom.width_px);

    let frames = (0..n_frames)
        .into_par_iter()
        .map(|f| {
            let dx = if kind == StackKind::Scattered {
                phantom.drift_for(f)[1]
            } else {
                0
            };
            let mut counts = Array2::<i32>::zeros((h, w));
            for (r, mut row) in counts.rows_mut().into_iter().enumerate() {
                let mut rng = key.substream(f as u32, r as u32);
                for (c, px) in row.iter_mut().enumerate() {
                    let src = wrap(c as isize - dx as isize, w);
                    *px = samplers[src].sample(&mut rng) as i32;
                }
            }
            Frame { counts, index: f, seed }
        })
        .collect();

    Ok(FrameStack {
        frames,
        kind,
        geometry: StackGeometry::of(phantom),
        phantom: Some(Arc::new(phantom.clone())),
    })
}

/// Draws Poisson frames from an arbitrary per-pixel mean image, rolled by
/// `drift[f % drift.len()] = [dy, dx]` for frame `f`.
pub fn generate_from_mean(
    mean: &Array2<f64>,
    geometry: StackGeometry,
    n_frames: usize,
    kind: StackKind,
    seed: u64,
    drift: &[[i32; 2]],
) -> Result<FrameStack> {
    check_frames(n_frames)?;
    let (h, w) = mean.dim();
    if (h, w) != (geometry.height, geometry.width) {
        return Err(Error::Shape(format!(
            "mean image {:?} vs geometry {:?}",
            (h, w),
            (geometry.height, geometry.width)
        )));
    }
    if let Some(bad) = mean.iter().find(|&&m| !(0.0..=super::phantom::MAX_MEAN).contains(&m)) {
        return Err(domain("mean image", format!("pixel mean {bad} outside [0, 2^31]")));
    }
    let key = StreamKey::new(seed, kind.stream_domain());
    let frames = (0..n_frames)
        .into_par_iter()
        .map(|f| {
            let [dy, dx] = if drift.is_empty() {
                [0, 0]
            } else {
                drift[f % drift.len()]
            };
            let mut counts = Array2::<i32>::zeros((h, w));
            for (r, mut row) in counts.rows_mut().into_iter().enumerate() {
                let mut rng = key.substream(f as u32, r as u32);
                let sr = wrap(r as isize - dy as isize, h);
                for (c, px) in row.iter_mut().enumerate() {
                    let sc = wrap(c as isize - dx as isize, w);
                    let sampler = PoissonSampler::new(mean[[sr, sc]]).expect("validated mean");
                    *px = sampler.sample(&mut rng) as i32;
                }
            }
            Frame { counts, index: f, seed }
        })
        .collect();
    Ok(FrameStack {
        frames,
        kind,
        geometry,
        phantom: None,
    })
}

/// Per-pixel `scattered − incident`.
pub fn difference_stack(scattered: &FrameStack, incident: &FrameStack) -> Result<FrameStack> {
    if scattered.dim() != incident.dim() || scattered.len() != incident.len() {
        return Err(Error::Shape(format!(
            "scattered {} × {:?} vs incident {} × {:?}",
            scattered.len(),
            scattered.dim(),
            incident.len(),
            incident.dim()
        )));
    }
    let frames = scattered
        .frames
        .par_iter()
        .zip(incident.frames.par_iter())
        .map(|(s, i)| {
            let mut counts = s.counts.clone();
            Zip::from(&mut counts).and(&i.counts).for_each(|d, &b| *d -= b);
            Frame {
                counts,
                index: s.index,
                seed: s.seed,
            }
        })
        .collect();
    Ok(FrameStack {
        frames,
        kind: StackKind::Difference,
        geometry: scattered.geometry,
        phantom: scattered.phantom.clone(),
    })
}
