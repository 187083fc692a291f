use serde::{Deserialize, Serialize};

use super::beam::BeamState;
use super::constants::PhysicalConstants;
use super::lengths::{
    evanescent_length, heisenberg_time, self_coherence_length, tunneling_depth, CoherenceQuery, LambdaConvention,
};
use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::units::{ElectronVolts, EvNm, Nanometers, Radians, Seconds};

/// Every decay and coherence model tabulated on one energy-loss grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCurveSet<T = f64> {
    pub grid: Vec<ElectronVolts<T>>,
    /// self-coherence length
    pub l_s: Vec<Nanometers<T>>,
    /// light-speed evanescent length ħc/ΔE
    pub l_e: Vec<Nanometers<T>>,
    /// tunneling depth
    pub l_t: Vec<Nanometers<T>>,
    /// κ_fit/ΔE
    pub x_i_fit: Vec<Nanometers<T>>,
    /// ħc/ΔE
    pub x_ic: Vec<Nanometers<T>>,
    pub t_heisenberg: Vec<Seconds<T>>,
}

impl<T: Real> ModelCurveSet<T> {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

pub fn model_curve_table<T: Real>(
    beam: &BeamState<T>,
    grid: &[ElectronVolts<T>],
    delta_phi: Radians<T>,
    kappa_fit: EvNm<T>,
    convention: LambdaConvention,
) -> Result<ModelCurveSet<T>> {
    if grid.is_empty() {
        return Err(domain("grid", "energy-loss grid is empty"));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1].value() > w[0].value())) {
        return Err(domain(
            "grid",
            format!("must be strictly ascending, found {} then {}", w[0], w[1]),
        ));
    }
    let hbar_c = EvNm(PhysicalConstants::<T>::codata().hbar_c);
    let n = grid.len();
    let mut set = ModelCurveSet {
        grid: grid.to_vec(),
        l_s: Vec::with_capacity(n),
        l_e: Vec::with_capacity(n),
        l_t: Vec::with_capacity(n),
        x_i_fit: Vec::with_capacity(n),
        x_ic: Vec::with_capacity(n),
        t_heisenberg: Vec::with_capacity(n),
    };
    for &de in grid {
        let q = CoherenceQuery::new(de, delta_phi, convention)?;
        set.l_s.push(self_coherence_length(beam, &q)?);
        let light = evanescent_length(de, hbar_c)?;
        set.l_e.push(light);
        set.x_ic.push(light);
        set.l_t.push(tunneling_depth(de)?);
        set.x_i_fit.push(evanescent_length(de, kappa_fit)?);
        set.t_heisenberg.push(heisenberg_time(de)?);
    }
    Ok(set)
}
