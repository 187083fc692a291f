use super::rng::Substream;
use crate::error::{domain, Result};

/// Poisson sampler for a fixed mean: table inversion below μ = 10,
/// Hörmann's PTRS transformed rejection above.
#[derive(Debug, Clone)]
pub enum PoissonSampler {
    Zero,
    /// Cumulative probabilities scaled to u64 thresholds.
    Inversion {
        thresholds: Vec<u64>,
    },
    Ptrs(Ptrs),
}

const INVERSION_LIMIT: f64 = 10.0;

impl PoissonSampler {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(domain("poisson mean", format!("{mu} must be finite and non-negative")));
        }
        Ok(if mu == 0.0 {
            Self::Zero
        } else if mu < INVERSION_LIMIT {
            Self::Inversion {
                thresholds: inversion_table(mu),
            }
        } else {
            Self::Ptrs(Ptrs::new(mu))
        })
    }

    #[inline]
    pub fn sample(&self, rng: &mut Substream) -> u32 {
        match self {
            Self::Zero => 0,
            Self::Inversion { thresholds } => {
                let u = rng.next_u64();
                thresholds.iter().position(|&t| u < t).unwrap_or(thresholds.len()) as u32
            }
            Self::Ptrs(p) => p.sample(rng),
        }
    }
}

fn inversion_table(mu: f64) -> Vec<u64> {
    const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64
    let mut p = (-mu).exp();
    let mut cdf = p;
    let mut table = Vec::with_capacity(32);
    let mut k = 0u32;
    loop {
        // `as` saturates at u64::MAX once cdf rounds to 1
        table.push((cdf * SCALE) as u64);
        if 1.0 - cdf < 1e-17 || k >= 256 {
            break;
        }
        k += 1;
        p *= mu / f64::from(k);
        cdf += p;
    }
    table
}

#[derive(Debug, Clone)]
pub struct Ptrs {
    mu: f64,
    log_mu: f64,
    a: f64,
    b: f64,
    inv_alpha: f64,
    v_r: f64,
}

impl Ptrs {
    fn new(mu: f64) -> Self {
        let slam = mu.sqrt();
        let b = 0.931 + 2.53 * slam;
        Self {
            mu,
            log_mu: mu.ln(),
            a: -0.059 + 0.024_83 * b,
            b,
            inv_alpha: 1.1239 + 1.1328 / (b - 3.4),
            v_r: 0.9277 - 3.6224 / (b - 2.0),
        }
    }

    fn sample(&self, rng: &mut Substream) -> u32 {
        loop {
            let u = rng.next_f64() - 0.5;
            let v = rng.next_f64();
            let us = 0.5 - u.abs();
            let k = ((2.0 * self.a / us + self.b) * u + self.mu + 0.43).floor();
            if us >= 0.07 && v <= self.v_r {
                return k as u32;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + self.inv_alpha.ln() - (self.a / (us * us) + self.b).ln();
            let rhs = -self.mu + k * self.log_mu - ln_factorial(k as u64);
            if lhs <= rhs {
                return k as u32;
            }
        }
    }
}

/// ln(k!) exact by summation below 16, Stirling series above.
pub(crate) fn ln_factorial(k: u64) -> f64 {
    if k < 16 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x + 0.5) * x.ln() - x
        + 0.5 * std::f64::consts::TAU.ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}
