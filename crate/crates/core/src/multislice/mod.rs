//! Minimal multi-slice engine: a uniform slab with one sharp vacuum edge,
//! phase-grating transmission, 2/3 band limit and Fresnel propagation.
//!
//! Propagation uses the kernel `exp(−iπ·λ·dz·|k|²)` with `z` increasing
//! along the beam, so a positive `dz` moves the wave downstream.

mod fft;
mod metrics;

use ndarray::{Array2, Zip};
use num_complex::Complex;
use rustfft::FftNum;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

pub use fft::Fft2;
pub use metrics::{defocus_scan, edge_metrics, DefocusPoint, EdgeMetrics};

/// Scalar type usable for the FFT-based propagation.
pub trait WaveReal: Real + FftNum {}
impl<T: Real + FftNum> WaveReal for T {}

/// Complex wave on an `ny × nx` periodic grid, indexed `[y, x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField<T = f64> {
    pub amplitude: Array2<Complex<T>>,
    pub pixel_size_nm: T,
    pub wavelength_nm: T,
}

fn check_grid<T: Real>(nx: usize, ny: usize, pixel_size: T) -> Result<()> {
    if !nx.is_power_of_two() || !ny.is_power_of_two() {
        return Err(Error::Shape(format!(
            "grid {ny}×{nx} is not a power of two in both axes"
        )));
    }
    if !(pixel_size > T::zero()) || !pixel_size.is_finite() {
        return Err(domain("pixel_size", format!("{pixel_size} must be positive")));
    }
    Ok(())
}

impl<T: WaveReal> WaveField<T> {
    pub fn new(amplitude: Array2<Complex<T>>, pixel_size_nm: T, wavelength_nm: T) -> Result<Self> {
        let (ny, nx) = amplitude.dim();
        check_grid(nx, ny, pixel_size_nm)?;
        if !(wavelength_nm > T::zero()) {
            return Err(domain("wavelength", format!("{wavelength_nm} must be positive")));
        }
        Ok(Self {
            amplitude,
            pixel_size_nm,
            wavelength_nm,
        })
    }

    /// Unit-amplitude plane wave along the optic axis.
    pub fn plane_wave(nx: usize, ny: usize, pixel_size_nm: T, wavelength_nm: T) -> Result<Self> {
        Self::new(
            Array2::from_elem((ny, nx), Complex::new(T::one(), T::zero())),
            pixel_size_nm,
            wavelength_nm,
        )
    }

    pub fn nx(&self) -> usize {
        self.amplitude.ncols()
    }

    pub fn ny(&self) -> usize {
        self.amplitude.nrows()
    }

    /// Σ|ψ|²·px²
    pub fn total_intensity(&self) -> T {
        self.amplitude.iter().map(|c| c.norm_sqr()).sum::<T>() * self.pixel_size_nm * self.pixel_size_nm
    }

    pub fn intensity(&self) -> Array2<T> {
        self.amplitude.mapv(|c| c.norm_sqr())
    }
}

fn frequency<T: Real>(i: usize, n: usize, pixel_size: T) -> T {
    let signed = if i < n.div_ceil(2) {
        i as f64
    } else {
        i as f64 - n as f64
    };
    T::lit(signed) / (T::from_usize_lossy(n) * pixel_size)
}

/// Reciprocal-space Fresnel kernel `exp(−iπ·λ·dz·|k|²)` in FFT order.
pub fn fresnel_propagator<T: WaveReal>(
    nx: usize,
    ny: usize,
    pixel_size_nm: T,
    wavelength_nm: T,
    dz_nm: T,
) -> Result<Array2<Complex<T>>> {
    check_grid(nx, ny, pixel_size_nm)?;
    let ky: Vec<T> = (0..ny).map(|i| frequency(i, ny, pixel_size_nm)).collect();
    let kx: Vec<T> = (0..nx).map(|i| frequency(i, nx, pixel_size_nm)).collect();
    let c = -T::PI() * wavelength_nm * dz_nm;
    Ok(Array2::from_shape_fn((ny, nx), |(y, x)| {
        let k2 = kx[x] * kx[x] + ky[y] * ky[y];
        Complex::from_polar(T::one(), c * k2)
    }))
}

/// 2/3 antialiasing aperture in FFT order: keeps |k| < (2/3)·k_Nyquist.
pub fn band_limit_mask<T: WaveReal>(nx: usize, ny: usize, pixel_size_nm: T) -> Result<Array2<T>> {
    check_grid(nx, ny, pixel_size_nm)?;
    let k_max = T::lit(2.0 / 3.0) / (T::lit(2.0) * pixel_size_nm);
    Ok(Array2::from_shape_fn((ny, nx), |(y, x)| {
        let kx = frequency(x, nx, pixel_size_nm);
        let ky = frequency(y, ny, pixel_size_nm);
        if kx * kx + ky * ky < k_max * k_max {
            T::one()
        } else {
            T::zero()
        }
    }))
}

/// Free-space propagation over `dz_nm` (negative propagates upstream).
pub fn propagate<T: WaveReal>(field: &WaveField<T>, dz_nm: T) -> Result<WaveField<T>> {
    let kernel = fresnel_propagator(field.nx(), field.ny(), field.pixel_size_nm, field.wavelength_nm, dz_nm)?;
    let fft = Fft2::new(field.nx(), field.ny());
    let mut psi = field.amplitude.clone();
    fft.forward(&mut psi);
    psi.zip_mut_with(&kernel, |p, &k| *p = *p * k);
    fft.inverse(&mut psi);
    Ok(WaveField {
        amplitude: psi,
        ..*field
    })
}

/// Uniform slab filling columns `[0, edge_col)` with vacuum beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlabPhantom<T = f64> {
    /// mean inner potential, V
    pub inner_potential_v: T,
    pub thickness_nm: T,
    pub n_slices: usize,
    /// first vacuum column; equal to the grid width for an edgeless slab
    pub edge_col: usize,
    /// σ, rad/(V·nm)
    pub interaction_constant: T,
    /// apply the 2/3 aperture after every transmission
    #[serde(default = "yes")]
    pub band_limit: bool,
}

fn yes() -> bool {
    true
}

impl<T: Real> SlabPhantom<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_slices < 1 {
            return Err(domain("n_slices", "must be at least 1"));
        }
        if !(self.thickness_nm > T::zero()) {
            return Err(domain("thickness", format!("{} must be positive", self.thickness_nm)));
        }
        if !self.inner_potential_v.is_finite() || !self.interaction_constant.is_finite() {
            return Err(domain("slab", "potential and interaction constant must be finite"));
        }
        Ok(())
    }

    /// Phase shift σ·V·dz imparted by one slice inside the sample.
    pub fn slice_phase(&self) -> T {
        self.interaction_constant * self.inner_potential_v * self.thickness_nm / T::from_usize_lossy(self.n_slices)
    }
}

/// Alternates phase-grating transmission and propagation over
/// `thickness / n_slices` through the slab.
pub fn multislice_exit_wave<T: WaveReal>(incident: &WaveField<T>, slab: &SlabPhantom<T>) -> Result<WaveField<T>> {
    slab.validate()?;
    let (nx, ny) = (incident.nx(), incident.ny());
    if slab.edge_col > nx {
        return Err(Error::Shape(format!(
            "edge column {} outside grid of width {nx}",
            slab.edge_col
        )));
    }
    let dz = slab.thickness_nm / T::from_usize_lossy(slab.n_slices);
    let mut kernel = fresnel_propagator(nx, ny, incident.pixel_size_nm, incident.wavelength_nm, dz)?;
    if slab.band_limit {
        let mask = band_limit_mask(nx, ny, incident.pixel_size_nm)?;
        Zip::from(&mut kernel).and(&mask).for_each(|k, &m| *k = k.scale(m));
    }
    let grating = Complex::from_polar(T::one(), slab.slice_phase());
    let fft = Fft2::new(nx, ny);
    let mut psi = incident.amplitude.clone();
    for _ in 0..slab.n_slices {
        for mut row in psi.rows_mut() {
            for v in row.iter_mut().take(slab.edge_col) {
                *v = *v * grating;
            }
        }
        fft.forward(&mut psi);
        psi.zip_mut_with(&kernel, |p, &k| *p = *p * k);
        fft.inverse(&mut psi);
    }
    Ok(WaveField {
        amplitude: psi,
        ..*incident
    })
}

/// Image intensity at defocus `defocus_nm`: the exit wave propagated by −Δf.
pub fn apply_defocus<T: WaveReal>(exit: &WaveField<T>, defocus_nm: T) -> Result<Array2<T>> {
    if defocus_nm == T::zero() {
        return Ok(exit.intensity());
    }
    Ok(propagate(exit, -defocus_nm)?.intensity())
}

/// Crystal thickness from the Pendellösung period and the number of
/// thickness oscillations seen across the wedge.
pub fn pendelloesung_thickness<T: Real>(period_nm: T, n_oscillations: T) -> Result<T> {
    if !(period_nm > T::zero()) || !(n_oscillations > T::zero()) {
        return Err(domain(
            "pendelloesung",
            format!("period {period_nm} and oscillation count {n_oscillations} must be positive"),
        ));
    }
    Ok(period_nm * n_oscillations)
}

/// Diffracted-beam intensity `sin²(π·t/ξ_g)` of the two-beam approximation.
pub fn two_beam_intensity<T: Real>(thickness_nm: T, extinction_nm: T) -> T {
    let s = (T::PI() * thickness_nm / extinction_nm).sin();
    s * s
}
