use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Zero-loss peak, centred at ΔE = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPeak {
    pub fwhm_ev: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianPeak {
    pub center_ev: f64,
    pub fwhm_ev: f64,
    /// Value at the apex.
    pub amplitude: f64,
}

/// Parametric loss spectrum used to scale the interface intensity across an
/// energy series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub zero_loss: Option<GaussianPeak>,
    pub peaks: Vec<LorentzianPeak>,
}

impl Spectrum {
    /// Zero-loss peak of 0.6 eV FWHM and a bulk plasmon at 19.4 eV.
    pub fn gan_like() -> Self {
        Self {
            zero_loss: Some(GaussianPeak {
                fwhm_ev: 0.6,
                amplitude: 50.0,
            }),
            peaks: vec![LorentzianPeak {
                center_ev: 19.4,
                fwhm_ev: 6.0,
                amplitude: 1.0,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |what: &'static str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(what, format!("{v} must be finite and non-negative")))
            }
        };
        if let Some(z) = &self.zero_loss {
            check("zero-loss width", z.fwhm_ev)?;
            check("zero-loss amplitude", z.amplitude)?;
        }
        for p in &self.peaks {
            check("peak width", p.fwhm_ev)?;
            check("peak amplitude", p.amplitude)?;
            if !p.center_ev.is_finite() {
                return Err(domain("peak center", "must be finite"));
            }
        }
        Ok(())
    }
}

impl Default for Spectrum {
    fn default() -> Self {
        Self::gan_like()
    }
}

pub fn spectral_weight(delta_e_ev: f64, spectrum: &Spectrum) -> Result<f64> {
    if !(delta_e_ev >= 0.0) {
        return Err(domain("delta_e", format!("{delta_e_ev} eV must be non-negative")));
    }
    spectrum.validate()?;
    let zlp = spectrum.zero_loss.map_or(0.0, |z| {
        if z.fwhm_ev == 0.0 {
            return if delta_e_ev == 0.0 { z.amplitude } else { 0.0 };
        }
        let sigma = z.fwhm_ev / (8.0 * std::f64::consts::LN_2).sqrt();
        z.amplitude * (-0.5 * (delta_e_ev / sigma).powi(2)).exp()
    });
    let lorentz: f64 = spectrum
        .peaks
        .iter()
        .map(|p| {
            if p.fwhm_ev == 0.0 {
                return if delta_e_ev == p.center_ev { p.amplitude } else { 0.0 };
            }
            let u = (delta_e_ev - p.center_ev) / (0.5 * p.fwhm_ev);
            p.amplitude / (1.0 + u * u)
        })
        .sum();
    Ok(zlp + lorentz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plasmon_is_the_maximum_above_five_ev() {
        let s = Spectrum::gan_like();
        let (best, _) = (0..=350)
            .map(|i| 5.0 + 0.1 * f64::from(i))
            .map(|e| (e, spectral_weight(e, &s).unwrap()))
            .fold((0.0, f64::MIN), |acc, (e, w)| if w > acc.1 { (e, w) } else { acc });
        assert!((best - 19.4).abs() < 1e-9, "{best}");
    }

    #[test]
    fn empty_and_single_peak() {
        let empty = Spectrum {
            zero_loss: None,
            peaks: vec![],
        };
        for e in [0.0, 1.0, 19.4, 100.0] {
            assert_eq!(spectral_weight(e, &empty).unwrap(), 0.0);
        }
        let one = Spectrum {
            zero_loss: None,
            peaks: vec![LorentzianPeak {
                center_ev: 7.0,
                fwhm_ev: 2.0,
                amplitude: 3.5,
            }],
        };
        assert_eq!(spectral_weight(7.0, &one).unwrap(), 3.5);
        assert_eq!(spectral_weight(8.0, &one).unwrap(), 3.5 / 2.0);
    }

    #[test]
    fn negative_parameters_rejected() {
        let bad = Spectrum {
            zero_loss: None,
            peaks: vec![LorentzianPeak {
                center_ev: 7.0,
                fwhm_ev: -2.0,
                amplitude: 1.0,
            }],
        };
        assert!(spectral_weight(1.0, &bad).is_err());
        assert!(spectral_weight(-1.0, &Spectrum::gan_like()).is_err());
    }
}
