//! Energy dependence of the decay length: the reciprocal law
//! `x_i = ħv/ΔE`, a free power law and discrimination against the
//! square-root tunneling law `x_i = κ′/√ΔE`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::physics::HBAR_C_EV_NM;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint<T = f64> {
    pub delta_e_ev: T,
    pub x_i_nm: T,
    pub sigma_nm: T,
    /// Illumination condition the point was measured under.
    #[serde(default)]
    pub condition: String,
    #[serde(default)]
    pub provenance: String,
}

impl<T: Real> SeriesPoint<T> {
    pub fn new(delta_e_ev: T, x_i_nm: T, sigma_nm: T) -> Self {
        Self {
            delta_e_ev,
            x_i_nm,
            sigma_nm,
            condition: String::new(),
            provenance: String::new(),
        }
    }

    fn weight(&self) -> T {
        T::one() / (self.sigma_nm * self.sigma_nm)
    }
}

/// Decay lengths versus energy loss, held in canonical order so that every
/// fit is independent of the order points were supplied in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SeriesPoint<T>>", into = "Vec<SeriesPoint<T>>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct DecaySeries<T = f64> {
    points: Vec<SeriesPoint<T>>,
}

fn total<T: Real>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

impl<T: Real> DecaySeries<T> {
    /// Energies must be positive and distinct within a condition; sigmas positive.
    pub fn new(mut points: Vec<SeriesPoint<T>>) -> Result<Self> {
        for p in &points {
            if !(p.delta_e_ev > T::zero()) || !p.delta_e_ev.is_finite() {
                return Err(domain("delta_e", format!("{} must be positive", p.delta_e_ev)));
            }
            if !(p.sigma_nm > T::zero()) || !p.sigma_nm.is_finite() {
                return Err(domain(
                    "sigma",
                    format!("{} at {} eV must be positive", p.sigma_nm, p.delta_e_ev),
                ));
            }
            if !p.x_i_nm.is_finite() {
                return Err(domain(
                    "x_i",
                    format!("{} at {} eV is not finite", p.x_i_nm, p.delta_e_ev),
                ));
            }
        }
        points.sort_by(|a, b| {
            a.condition
                .cmp(&b.condition)
                .then(total(a.delta_e_ev, b.delta_e_ev))
                .then(total(a.x_i_nm, b.x_i_nm))
                .then(total(a.sigma_nm, b.sigma_nm))
                .then(a.provenance.cmp(&b.provenance))
        });
        if let Some(w) = points
            .windows(2)
            .find(|w| w[0].condition == w[1].condition && w[0].delta_e_ev == w[1].delta_e_ev)
        {
            return Err(domain("delta_e", format!("{} eV appears twice", w[0].delta_e_ev)));
        }
        Ok(Self { points })
    }

    /// Series of a single condition from `(ΔE, x_i, σ)` triples.
    pub fn from_triples(triples: &[(T, T, T)]) -> Result<Self> {
        Self::new(triples.iter().map(|&(e, x, s)| SeriesPoint::new(e, x, s)).collect())
    }

    pub fn points(&self) -> &[SeriesPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiplies every x_i and sigma by `s`.
    pub fn scaled(&self, s: T) -> Result<Self> {
        Self::new(
            self.points
                .iter()
                .map(|p| SeriesPoint {
                    x_i_nm: p.x_i_nm * s,
                    sigma_nm: p.sigma_nm * s,
                    ..p.clone()
                })
                .collect(),
        )
    }

    /// Distinct condition labels in sorted order.
    pub fn conditions(&self) -> Vec<String> {
        let mut c: Vec<String> = self.points.iter().map(|p| p.condition.clone()).collect();
        c.dedup();
        c
    }

    fn require(&self, n: usize) -> Result<()> {
        if self.points.len() < n {
            return Err(Error::InsufficientData(format!(
                "series has {} points, need at least {n}",
                self.points.len()
            )));
        }
        Ok(())
    }
}

impl<T: Real> TryFrom<Vec<SeriesPoint<T>>> for DecaySeries<T> {
    type Error = Error;

    fn try_from(points: Vec<SeriesPoint<T>>) -> Result<Self> {
        Self::new(points)
    }
}

impl<T> From<DecaySeries<T>> for Vec<SeriesPoint<T>> {
    fn from(s: DecaySeries<T>) -> Self {
        s.points
    }
}

/// One-parameter fit `x_i = κ·u(ΔE)` through the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OriginFit<T> {
    kappa: T,
    sigma: T,
    rss: T,
}

fn fit_through_origin<T: Real>(series: &DecaySeries<T>, u: impl Fn(T) -> T) -> OriginFit<T> {
    let (mut sux, mut suu) = (T::zero(), T::zero());
    for p in series.points() {
        let w = p.weight();
        let ui = u(p.delta_e_ev);
        sux = sux + w * ui * p.x_i_nm;
        suu = suu + w * ui * ui;
    }
    let kappa = sux / suu;
    let rss = series
        .points()
        .iter()
        .map(|p| {
            let r = p.x_i_nm - kappa * u(p.delta_e_ev);
            p.weight() * r * r
        })
        .sum();
    OriginFit {
        kappa,
        sigma: T::one() / suu.sqrt(),
        rss,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalFit<T = f64> {
    /// (eV·nm)⁻¹
    pub a: T,
    pub sigma_a: T,
    /// eV·nm
    pub hbar_v: T,
    pub sigma_hbar_v: T,
    pub v_over_c: T,
    pub chi2_reduced: T,
    /// weighted residual sum of squares
    pub rss: T,
    pub n_points: usize,
}

/// Weighted least squares of x_i on 1/ΔE through the origin; the slope is ħv.
pub fn fit_reciprocal<T: Real>(series: &DecaySeries<T>) -> Result<ReciprocalFit<T>> {
    series.require(3)?;
    let f = fit_through_origin(series, |e| T::one() / e);
    if !(f.kappa > T::zero()) {
        return Err(Error::ModelMismatch(format!("fitted ħv = {} is not positive", f.kappa)));
    }
    let n = series.len();
    Ok(ReciprocalFit {
        a: T::one() / f.kappa,
        sigma_a: f.sigma / (f.kappa * f.kappa),
        hbar_v: f.kappa,
        sigma_hbar_v: f.sigma,
        v_over_c: f.kappa / T::lit(HBAR_C_EV_NM),
        chi2_reduced: f.rss / T::from_usize_lossy(n - 1),
        rss: f.rss,
        n_points: n,
    })
}

/// Reciprocal law with a free offset, `x_i = ħv/ΔE + c`. Diagnostic only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptFit<T = f64> {
    pub hbar_v: T,
    pub sigma_hbar_v: T,
    pub intercept_nm: T,
    pub sigma_intercept_nm: T,
    pub chi2_reduced: T,
}

pub fn fit_reciprocal_with_intercept<T: Real>(series: &DecaySeries<T>) -> Result<InterceptFit<T>> {
    series.require(3)?;
    let (mut sw, mut su, mut sx, mut suu, mut sux) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for p in series.points() {
        let w = p.weight();
        let u = T::one() / p.delta_e_ev;
        sw = sw + w;
        su = su + w * u;
        sx = sx + w * p.x_i_nm;
        suu = suu + w * u * u;
        sux = sux + w * u * p.x_i_nm;
    }
    let det = sw * suu - su * su;
    if !(det > T::zero()) {
        return Err(Error::Singular("degenerate energy grid".into()));
    }
    let slope = (sw * sux - su * sx) / det;
    let intercept = (suu * sx - su * sux) / det;
    let rss: T = series
        .points()
        .iter()
        .map(|p| {
            let r = p.x_i_nm - slope / p.delta_e_ev - intercept;
            p.weight() * r * r
        })
        .sum();
    Ok(InterceptFit {
        hbar_v: slope,
        sigma_hbar_v: (sw / det).sqrt(),
        intercept_nm: intercept,
        sigma_intercept_nm: (suu / det).sqrt(),
        chi2_reduced: rss / T::from_usize_lossy(series.len() - 2),
    })
}

/// Free power law `x_i = C·ΔE^(−p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit<T = f64> {
    /// nm·eV^p
    pub c: T,
    pub p: T,
    pub sigma_p: T,
}

/// Weighted regression of ln x_i on ln ΔE with σ_ln = σ/x_i.
pub fn fit_powerlaw<T: Real>(series: &DecaySeries<T>) -> Result<PowerLawFit<T>> {
    series.require(3)?;
    let (mut sw, mut sl, mut sy, mut sll, mut sly) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for p in series.points() {
        if !(p.x_i_nm > T::zero()) {
            return Err(domain(
                "x_i",
                format!("{} at {} eV must be positive for a power law", p.x_i_nm, p.delta_e_ev),
            ));
        }
        let rel = p.sigma_nm / p.x_i_nm;
        let w = T::one() / (rel * rel);
        let l = p.delta_e_ev.ln();
        let y = p.x_i_nm.ln();
        sw = sw + w;
        sl = sl + w * l;
        sy = sy + w * y;
        sll = sll + w * l * l;
        sly = sly + w * l * y;
    }
    // centred sums keep the slope accurate when ln ΔE has a large mean
    let lbar = sl / sw;
    let ybar = sy / sw;
    let sxx = sll - sl * lbar;
    let sxy = sly - sl * ybar;
    if !(sxx > T::zero()) {
        return Err(Error::Singular("degenerate energy grid".into()));
    }
    let slope = sxy / sxx;
    Ok(PowerLawFit {
        c: (ybar - slope * lbar).exp(),
        p: -slope,
        sigma_p: (T::one() / sxx).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PreferredModel {
    Reciprocal,
    Sqrt,
    Undecided,
}

/// RSS-ratio cut-offs for [`discriminate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds<T = f64> {
    /// prefer the reciprocal law when RSS_sqrt/RSS_reciprocal exceeds this
    pub reciprocal: T,
    /// prefer the square-root law when the ratio falls below this
    pub sqrt: T,
}

impl<T: Real> Default for Thresholds<T> {
    fn default() -> Self {
        Self {
            reciprocal: T::lit(5.0),
            sqrt: T::lit(0.2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawFitResult<T = f64> {
    pub a: T,
    pub hbar_v: T,
    pub v_over_c: T,
    pub sigma_hbar_v: T,
    pub chi2_reduced: T,
    pub powerlaw: PowerLawFit<T>,
    /// κ′ of the square-root law, nm·eV^½
    pub kappa_sqrt: T,
    pub sigma_kappa_sqrt: T,
    pub rss_reciprocal: T,
    pub rss_sqrt: T,
    pub rss_ratio: T,
    pub preferred_model: PreferredModel,
    pub n_points: usize,
}

/// Fits both one-parameter laws and classifies by RSS_sqrt/RSS_reciprocal.
pub fn discriminate<T: Real>(series: &DecaySeries<T>, thresholds: Thresholds<T>) -> Result<LawFitResult<T>> {
    series.require(4)?;
    if !(thresholds.sqrt > T::zero() && thresholds.sqrt <= thresholds.reciprocal) {
        return Err(domain(
            "thresholds",
            format!(
                "need 0 < sqrt ({}) ≤ reciprocal ({})",
                thresholds.sqrt, thresholds.reciprocal
            ),
        ));
    }
    let recip = fit_reciprocal(series)?;
    let powerlaw = fit_powerlaw(series)?;
    let sqrt = fit_through_origin(series, |e| T::one() / e.sqrt());
    // an exact fit of one law would give an infinite or undefined ratio
    let floor = T::epsilon() * T::epsilon() * recip.rss.max(sqrt.rss);
    let rss_ratio = if recip.rss.max(sqrt.rss) > T::zero() {
        sqrt.rss.max(floor) / recip.rss.max(floor)
    } else {
        T::one()
    };
    let preferred_model = if rss_ratio > thresholds.reciprocal {
        PreferredModel::Reciprocal
    } else if rss_ratio < thresholds.sqrt {
        PreferredModel::Sqrt
    } else {
        PreferredModel::Undecided
    };
    Ok(LawFitResult {
        a: recip.a,
        hbar_v: recip.hbar_v,
        v_over_c: recip.v_over_c,
        sigma_hbar_v: recip.sigma_hbar_v,
        chi2_reduced: recip.chi2_reduced,
        powerlaw,
        kappa_sqrt: sqrt.kappa,
        sigma_kappa_sqrt: sqrt.sigma,
        rss_reciprocal: recip.rss,
        rss_sqrt: sqrt.rss,
        rss_ratio,
        preferred_model,
        n_points: series.len(),
    })
}

/// Separate reciprocal fits per illumination condition.
pub fn fit_reciprocal_by_condition<T: Real>(series: &DecaySeries<T>) -> Result<Vec<(String, ReciprocalFit<T>)>> {
    series
        .conditions()
        .into_iter()
        .map(|c| {
            let sub = DecaySeries {
                points: series.points().iter().filter(|p| p.condition == c).cloned().collect(),
            };
            fit_reciprocal(&sub).map(|f| (c, f))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GRID: [f64; 6] = [0.9, 2.5, 5.0, 10.0, 20.0, 40.0];

    fn exact(kappa: f64, law: impl Fn(f64) -> f64) -> DecaySeries {
        DecaySeries::from_triples(
            &GRID
                .iter()
                .map(|&e| (e, kappa * law(e), 0.01 * kappa * law(e)))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn reciprocal_exact() {
        let f = fit_reciprocal(&exact(106.0, |e| 1.0 / e)).unwrap();
        assert!((f.hbar_v - 106.0).abs() < 1e-12 * 106.0);
        assert!((f.v_over_c - 0.537).abs() < 1e-3);
        let c = fit_reciprocal(&exact(HBAR_C_EV_NM, |e| 1.0 / e)).unwrap();
        assert!((c.v_over_c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn powerlaw_exponents() {
        let f = fit_powerlaw(&exact(106.0, |e| 1.0 / e)).unwrap();
        assert!((f.p - 1.0).abs() < 1e-10);
        assert!((f.c - 106.0).abs() < 1e-8);
        let lt = |e: f64| HBAR_C_EV_NM / (2.0 * crate::physics::ELECTRON_REST_ENERGY_EV * e).sqrt();
        let t = fit_powerlaw(&exact(1.0, lt)).unwrap();
        assert!((t.p - 0.5).abs() < 1e-10);
    }

    #[test]
    fn classification() {
        let r = discriminate(&exact(106.0, |e| 1.0 / e), Thresholds::default()).unwrap();
        assert_eq!(r.preferred_model, PreferredModel::Reciprocal);
        let s = discriminate(&exact(106.0, |e| 1.0 / e.sqrt()), Thresholds::default()).unwrap();
        assert_eq!(s.preferred_model, PreferredModel::Sqrt);
        assert!((s.kappa_sqrt - 106.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_points() {
        let two = DecaySeries::from_triples(&[(1.0, 106.0, 1.0), (2.0, 53.0, 1.0)]).unwrap();
        assert!(fit_reciprocal(&two).is_err());
        assert!(discriminate(&two, Thresholds::default()).is_err());
        let three = DecaySeries::from_triples(&[(1.0, 106.0, 1.0), (2.0, 53.0, 1.0), (4.0, 26.5, 1.0)]).unwrap();
        assert!(fit_reciprocal(&three).is_ok());
        assert!(discriminate(&three, Thresholds::default()).is_err());
    }

    #[test]
    fn validation() {
        assert!(DecaySeries::from_triples(&[(0.0, 1.0, 1.0)]).is_err());
        assert!(DecaySeries::from_triples(&[(1.0, 1.0, 0.0)]).is_err());
        assert!(DecaySeries::from_triples(&[(1.0, 1.0, 1.0), (1.0, 2.0, 1.0)]).is_err());
        let neg = DecaySeries::from_triples(&[(1.0, -1.0, 1.0), (2.0, 1.0, 1.0), (3.0, 1.0, 1.0)]).unwrap();
        assert!(fit_powerlaw(&neg).is_err());
    }

    #[test]
    fn intercept_mode_recovers_offset() {
        let s =
            DecaySeries::from_triples(&GRID.iter().map(|&e| (e, 106.0 / e + 2.0, 0.1)).collect::<Vec<_>>()).unwrap();
        let f = fit_reciprocal_with_intercept(&s).unwrap();
        assert!((f.hbar_v - 106.0).abs() < 1e-9);
        assert!((f.intercept_nm - 2.0).abs() < 1e-9);
    }

    #[test]
    fn per_condition_split() {
        let mut pts: Vec<SeriesPoint> = GRID.iter().map(|&e| SeriesPoint::new(e, 106.0 / e, 0.1)).collect();
        pts.extend(GRID.iter().map(|&e| SeriesPoint {
            condition: "b".into(),
            ..SeriesPoint::new(e, 90.0 / e, 0.1)
        }));
        let s = DecaySeries::new(pts).unwrap();
        let split = fit_reciprocal_by_condition(&s).unwrap();
        assert_eq!(split.len(), 2);
        assert!((split[0].1.hbar_v - 106.0).abs() < 1e-10);
        assert!((split[1].1.hbar_v - 90.0).abs() < 1e-10);
        let joint = fit_reciprocal(&s).unwrap();
        assert!(joint.hbar_v > 90.0 && joint.hbar_v < 106.0);
    }

    #[test]
    fn serde_round_trip_validates() {
        let s = exact(106.0, |e| 1.0 / e);
        let json = serde_json::to_string(&s).unwrap();
        let back: DecaySeries = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
        assert!(serde_json::from_str::<DecaySeries>(r#"[{"delta_e_ev":1,"x_i_nm":1,"sigma_nm":0}]"#).is_err());
    }
}
