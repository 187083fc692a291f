//! `EVLS` stack files.
//!
//! Little-endian layout:
//!
//! ```text
//! magic      4 bytes  "EVLS"
//! version    u16      1
//! width      u32
//! height     u32
//! n_frames   u32
//! pixel_size f64      nm
//! delta_e    f64      eV
//! kind       u8       0 incident, 1 scattered, 2 difference, 3 simulated
//! payload    n_frames × height × width, row-major
//!            i32 counts, or f64 intensities for kind 3 (single frame)
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::stack::{Frame, FrameStack, StackGeometry, StackKind};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EVLS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 4 + 4 + 4 + 8 + 8 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Counts(StackKind),
    Simulated,
}

impl FileKind {
    fn code(self) -> u8 {
        match self {
            Self::Counts(StackKind::Incident) => 0,
            Self::Counts(StackKind::Scattered) => 1,
            Self::Counts(StackKind::Difference) => 2,
            Self::Simulated => 3,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => Self::Counts(StackKind::Incident),
            1 => Self::Counts(StackKind::Scattered),
            2 => Self::Counts(StackKind::Difference),
            3 => Self::Simulated,
            _ => return Err(Error::Format(format!("unknown kind code {code}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub width: u32,
    pub height: u32,
    pub n_frames: u32,
    pub pixel_size_nm: f64,
    pub delta_e_ev: f64,
    pub kind: FileKind,
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit in u32")))
}

fn write_header<W: Write>(w: &mut W, h: &Header) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&h.width.to_le_bytes())?;
    w.write_all(&h.height.to_le_bytes())?;
    w.write_all(&h.n_frames.to_le_bytes())?;
    w.write_all(&h.pixel_size_nm.to_le_bytes())?;
    w.write_all(&h.delta_e_ev.to_le_bytes())?;
    w.write_all(&[h.kind.code()])?;
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut buf = [0u8; HEADER_LEN];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if &buf[0..4] != MAGIC {
        return Err(Error::Format("bad magic, expected EVLS".into()));
    }
    let version = u16::from_le_bytes([buf[4], buf[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    Ok(Header {
        width: u32_at(6),
        height: u32_at(10),
        n_frames: u32_at(14),
        pixel_size_nm: f64_at(18),
        delta_e_ev: f64_at(26),
        kind: FileKind::from_code(buf[34])?,
    })
}

pub fn write_stack<W: Write>(w: &mut W, stack: &FrameStack) -> Result<()> {
    let (h, wd) = stack.dim();
    write_header(
        w,
        &Header {
            width: to_u32(wd, "width")?,
            height: to_u32(h, "height")?,
            n_frames: to_u32(stack.len(), "n_frames")?,
            pixel_size_nm: stack.geometry.pixel_size_nm,
            delta_e_ev: stack.geometry.delta_e_ev,
            kind: FileKind::Counts(stack.kind),
        },
    )?;
    let mut row_buf = Vec::with_capacity(wd * 4);
    for f in &stack.frames {
        for row in f.counts.rows() {
            row_buf.clear();
            for &v in row {
                row_buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&row_buf)?;
        }
    }
    Ok(())
}

pub fn read_stack<R: Read>(r: &mut R) -> Result<FrameStack> {
    let h = read_header(r)?;
    let kind = match h.kind {
        FileKind::Counts(k) => k,
        FileKind::Simulated => return Err(Error::Format("simulated image, not a count stack".into())),
    };
    let (height, width) = (h.height as usize, h.width as usize);
    let mut frames = Vec::with_capacity(h.n_frames as usize);
    let mut buf = vec![0u8; width * height * 4];
    for index in 0..h.n_frames as usize {
        r.read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("truncated payload in frame {index}: {e}")))?;
        let data = buf
            .chunks_exact(4)
            .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let counts = Array2::from_shape_vec((height, width), data).map_err(|e| Error::Format(e.to_string()))?;
        frames.push(Frame { counts, index, seed: 0 });
    }
    FrameStack::new(
        frames,
        kind,
        StackGeometry {
            width,
            height,
            pixel_size_nm: h.pixel_size_nm,
            interface_col: None,
            delta_e_ev: h.delta_e_ev,
        },
    )
}

/// Single float64 frame with kind `SIM`.
pub fn write_sim_image<W: Write>(w: &mut W, image: &Array2<f64>, pixel_size_nm: f64, delta_e_ev: f64) -> Result<()> {
    let (h, wd) = image.dim();
    write_header(
        w,
        &Header {
            width: to_u32(wd, "width")?,
            height: to_u32(h, "height")?,
            n_frames: 1,
            pixel_size_nm,
            delta_e_ev,
            kind: FileKind::Simulated,
        },
    )?;
    for &v in image.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_sim_image<R: Read>(r: &mut R) -> Result<(Header, Array2<f64>)> {
    let h = read_header(r)?;
    if h.kind != FileKind::Simulated || h.n_frames != 1 {
        return Err(Error::Format("not a single-frame simulated image".into()));
    }
    let n = h.width as usize * h.height as usize;
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
    let data = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let img = Array2::from_shape_vec((h.height as usize, h.width as usize), data)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok((h, img))
}

pub fn save_stack(path: impl AsRef<Path>, stack: &FrameStack) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_stack(&mut w, stack)?;
    w.flush()?;
    Ok(())
}

pub fn load_stack(path: impl AsRef<Path>) -> Result<FrameStack> {
    read_stack(&mut BufReader::new(File::open(path)?))
}

pub fn save_sim_image(path: impl AsRef<Path>, image: &Array2<f64>, pixel_size_nm: f64, delta_e_ev: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sim_image(&mut w, image, pixel_size_nm, delta_e_ev)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_stack, DecayModel, ScenePhantom};
    use proptest::prelude::*;

    fn phantom() -> ScenePhantom {
        ScenePhantom {
            width_px: 12,
            height_px: 5,
            pixel_size_nm: 0.25,
            interface_col: 4,
            mu_background: 0.5,
            mu_bulk: 3.0,
            mu_interface: 3.0,
            decay_model: DecayModel::Exponential { x_i_nm: 1.0 },
            delta_e_ev: 2.5,
            drift: vec![],
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        let s = generate_stack(&phantom(), 2, StackKind::Scattered, 1).unwrap();
        let mut bytes = Vec::new();
        write_stack(&mut bytes, &s).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 2 * 5 * 12 * 4);
        assert_eq!(&bytes[0..4], b"EVLS");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 12);
        assert_eq!(u32::from_le_bytes(bytes[10..14].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[14..18].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[18..26].try_into().unwrap()), 0.25);
        assert_eq!(f64::from_le_bytes(bytes[26..34].try_into().unwrap()), 2.5);
        assert_eq!(bytes[34], 1);
        let first = i32::from_le_bytes(bytes[35..39].try_into().unwrap());
        assert_eq!(first, s.frames[0].counts[[0, 0]]);
    }

    #[test]
    fn rejects_corrupt_files() {
        assert!(read_stack(&mut &b"EVLX\x01\x00"[..]).is_err());
        let s = generate_stack(&phantom(), 1, StackKind::Incident, 1).unwrap();
        let mut bytes = Vec::new();
        write_stack(&mut bytes, &s).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(read_stack(&mut bytes.as_slice()).is_err());
        let mut sim = Vec::new();
        write_sim_image(&mut sim, &Array2::zeros((2, 2)), 1.0, 0.0).unwrap();
        assert!(read_stack(&mut sim.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn stack_round_trip(seed in any::<u64>(), n in 1usize..4, kind in 0u8..3) {
            let kind = match kind { 0 => StackKind::Incident, 1 => StackKind::Scattered, _ => StackKind::Difference };
            let mut s = generate_stack(&phantom(), n, StackKind::Scattered, seed).unwrap();
            s.kind = kind;
            let mut bytes = Vec::new();
            write_stack(&mut bytes, &s).unwrap();
            let back = read_stack(&mut bytes.as_slice()).unwrap();
            prop_assert_eq!(back.kind, kind);
            prop_assert_eq!(back.len(), n);
            for (a, b) in back.frames.iter().zip(&s.frames) {
                prop_assert_eq!(&a.counts, &b.counts);
            }
        }

        #[test]
        fn sim_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 8)) {
            let img = Array2::from_shape_vec((2, 4), values).unwrap();
            let mut bytes = Vec::new();
            write_sim_image(&mut bytes, &img, 0.5, 3.0).unwrap();
            let (h, back) = read_sim_image(&mut bytes.as_slice()).unwrap();
            prop_assert_eq!(h.kind, FileKind::Simulated);
            prop_assert_eq!(back, img);
        }
    }
}
