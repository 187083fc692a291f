use evfield::synth::{generate_stack, DecayModel, PoissonSampler, ScenePhantom, StackKind, StreamKey};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

/// Pearson χ² of `n` draws against the Poisson pmf, bins merged until each
/// expects at least 5 counts. Returns the upper-tail p-value.
fn poisson_gof(mu: f64, seed: u64, n: usize) -> f64 {
    let sampler = PoissonSampler::new(mu).unwrap();
    let mut rng = StreamKey::new(seed, 7).substream(0, 0);
    let mut hist = vec![0usize; 0];
    for _ in 0..n {
        let k = sampler.sample(&mut rng) as usize;
        if k >= hist.len() {
            hist.resize(k + 1, 0);
        }
        hist[k] += 1;
    }
    let pois = Poisson::new(mu).unwrap();
    let lo = (mu - 8.0 * mu.sqrt() - 5.0).max(0.0) as u64;
    let hi = (mu + 8.0 * mu.sqrt() + 10.0) as u64;
    // bins: (-inf, lo], lo+1, ..., hi-1, [hi, inf)
    let mut expected = Vec::new();
    let mut observed = Vec::new();
    let count = |k: u64| hist.get(k as usize).copied().unwrap_or(0) as f64;
    let below: f64 = (0..=lo).map(count).sum();
    expected.push(pois.cdf(lo) * n as f64);
    observed.push(below);
    for k in lo + 1..hi {
        expected.push(pois.pmf(k) * n as f64);
        observed.push(count(k));
    }
    expected.push((1.0 - pois.cdf(hi - 1)) * n as f64);
    observed.push(
        hist.iter()
            .enumerate()
            .filter(|(k, _)| *k as u64 >= hi)
            .map(|(_, c)| *c as f64)
            .sum(),
    );

    let (mut e_bins, mut o_bins) = (Vec::new(), Vec::new());
    let (mut e_acc, mut o_acc) = (0.0, 0.0);
    for (e, o) in expected.iter().zip(&observed) {
        e_acc += e;
        o_acc += o;
        if e_acc >= 5.0 {
            e_bins.push(e_acc);
            o_bins.push(o_acc);
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    if let Some(last) = e_bins.last_mut() {
        *last += e_acc;
        *o_bins.last_mut().unwrap() += o_acc;
    }
    let stat: f64 = e_bins.iter().zip(&o_bins).map(|(e, o)| (o - e) * (o - e) / e).sum();
    let dof = (e_bins.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

#[test]
fn poisson_histograms_pass_chi_square_at_one_percent() {
    let pairs = [
        (0.01, 1),
        (0.05, 2),
        (0.3, 3),
        (1.0, 4),
        (2.0, 5),
        (4.5, 6),
        (9.9, 7),
        (10.0, 8),
        (37.0, 9),
        (250.0, 10),
    ];
    for (mu, seed) in pairs {
        let p = poisson_gof(mu, seed, 200_000);
        assert!(p > 0.01, "mu = {mu}, seed = {seed}: p = {p}");
    }
}

#[test]
fn column_means_converge_at_the_poisson_rate() {
    let phantom = ScenePhantom {
        width_px: 256,
        height_px: 512,
        ..ScenePhantom::desk_scale(DecayModel::Exponential { x_i_nm: 10.0 }, 10.6)
    };
    let n = 40;
    let stack = generate_stack(&phantom, n, StackKind::Scattered, 11).unwrap();
    let model = phantom.column_means(StackKind::Scattered);
    let samples = (n * phantom.height_px) as f64;
    let mut z2 = 0.0;
    let mut worst: f64 = 0.0;
    for (c, &mu) in model.iter().enumerate() {
        let sum: i64 = stack
            .frames
            .iter()
            .map(|f| f.counts.column(c).iter().map(|&v| i64::from(v)).sum::<i64>())
            .sum();
        let z = (sum as f64 / samples - mu) / (mu / samples).sqrt();
        z2 += z * z;
        worst = worst.max(z.abs());
    }
    let dof = model.len() as f64;
    // mean z² is χ²/dof with 256 degrees of freedom: 1 ± 0.09
    assert!((z2 / dof - 1.0).abs() < 0.3, "mean z² = {}", z2 / dof);
    // Bonferroni over 256 columns at 1% family-wise
    assert!(worst < 4.0, "worst column |z| = {worst}");
}

#[test]
fn mean_dose_is_linear_in_mu() {
    let base = ScenePhantom {
        width_px: 128,
        height_px: 256,
        ..ScenePhantom::desk_scale(DecayModel::Exponential { x_i_nm: 5.0 }, 21.2)
    };
    let total = |scale: f64| {
        let p = ScenePhantom {
            mu_background: base.mu_background * scale,
            mu_bulk: base.mu_bulk * scale,
            mu_interface: base.mu_interface * scale,
            ..base.clone()
        };
        let expect: f64 = p.column_means(StackKind::Scattered).iter().sum::<f64>() * 256.0 * 10.0;
        let s = generate_stack(&p, 10, StackKind::Scattered, 3).unwrap();
        let got: i64 = s
            .frames
            .iter()
            .map(|f| f.counts.iter().map(|&v| i64::from(v)).sum::<i64>())
            .sum();
        (got as f64, expect)
    };
    for scale in [0.5, 1.0, 4.0] {
        let (got, expect) = total(scale);
        assert!(
            (got - expect).abs() < 4.0 * expect.sqrt(),
            "scale {scale}: {got} vs {expect}"
        );
    }
}
