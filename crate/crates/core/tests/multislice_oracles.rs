use evfield::multislice::{
    apply_defocus, edge_metrics, fresnel_propagator, multislice_exit_wave, propagate, Fft2, SlabPhantom, WaveField,
};
use evfield::physics::{beam_kinematics, interaction_constant};
use evfield::units::Volts;
use ndarray::Array2;
use num_complex::Complex;
use proptest::prelude::*;

const LAMBDA_300KV: f64 = 1.968_748_6e-3;

fn gaussian(n: usize, px: f64, w0: f64) -> WaveField {
    let c = n as f64 / 2.0;
    let amp = Array2::from_shape_fn((n, n), |(y, x)| {
        let (dx, dy) = ((x as f64 - c) * px, (y as f64 - c) * px);
        Complex::new((-(dx * dx + dy * dy) / (w0 * w0)).exp(), 0.0)
    });
    WaveField::new(amp, px, LAMBDA_300KV).unwrap()
}

/// 1/e amplitude radius from the second moment of |ψ|² along x.
fn width(f: &WaveField) -> f64 {
    let n = f.nx();
    let c = n as f64 / 2.0;
    let (mut m0, mut m2) = (0.0, 0.0);
    for ((_, x), v) in f.amplitude.indexed_iter() {
        let i = v.norm_sqr();
        let dx = (x as f64 - c) * f.pixel_size_nm;
        m0 += i;
        m2 += i * dx * dx;
    }
    2.0 * (m2 / m0).sqrt()
}

#[test]
fn gaussian_beam_spreads_as_fresnel_theory() {
    let w0 = 1.0;
    let f = gaussian(256, 0.05, w0);
    assert!((width(&f) - w0).abs() < 1e-9);
    let z_r = std::f64::consts::PI * w0 * w0 / LAMBDA_300KV;
    for z in [0.5 * z_r, z_r, 2.0 * z_r, -z_r] {
        let expect = w0 * (1.0 + (z / z_r).powi(2)).sqrt();
        let got = width(&propagate(&f, z).unwrap());
        assert!(((got - expect) / expect).abs() < 1e-6, "z = {z}: {got} vs {expect}");
    }
}

/// Fresnel integrals C(w), S(w) by composite Simpson quadrature.
fn fresnel(w: f64) -> (f64, f64) {
    let n = 20_000;
    let h = w / n as f64;
    let (mut c, mut s) = (0.0, 0.0);
    for i in 0..=n {
        let t = i as f64 * h;
        let k = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let a = std::f64::consts::FRAC_PI_2 * t * t;
        c += k * a.cos();
        s += k * a.sin();
    }
    (c * h / 3.0, s * h / 3.0)
}

#[test]
fn opaque_edge_fringes_match_fresnel_integrals() {
    let (nx, px, edge, defocus) = (8192usize, 0.005, 4096usize, 100.0);
    let amp = Array2::from_shape_fn((1, nx), |(_, x)| Complex::new(if x >= edge { 1.0 } else { 0.0 }, 0.0));
    let exit = WaveField::new(amp, px, LAMBDA_300KV).unwrap();
    let image = apply_defocus(&exit, defocus).unwrap();
    let scale = (2.0 / (LAMBDA_300KV * defocus)).sqrt();
    let mut worst: f64 = 0.0;
    for x in edge - 200..edge + 600 {
        // half-pixel offset: the discrete step sits between columns edge−1 and edge
        let w = ((x as f64 - edge as f64) + 0.5) * px * scale;
        let (c, s) = fresnel(w);
        let oracle = 0.5 * ((c + 0.5).powi(2) + (s + 0.5).powi(2));
        worst = worst.max((image[[0, x]] - oracle).abs());
    }
    assert!(worst < 0.02, "largest deviation from the Fresnel edge pattern {worst}");

    // first maximum beyond the edge sits near √(λΔf)
    let row = image.row(0);
    let first_max = (edge + 1..edge + 1000)
        .find(|&x| row[x] > row[x - 1] && row[x] >= row[x + 1])
        .unwrap();
    let dist = (first_max - edge) as f64 * px;
    let scale_len = (LAMBDA_300KV * defocus).sqrt();
    assert!(((dist - scale_len) / scale_len).abs() < 0.2, "{dist} vs {scale_len}");
}

fn field_from(values: &[f64], n: usize) -> WaveField {
    let amp = Array2::from_shape_fn((n, n), |(y, x)| {
        let i = 2 * (y * n + x);
        Complex::new(values[i], values[i + 1])
    });
    WaveField::new(amp, 0.2, LAMBDA_300KV).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn free_propagation_is_unitary(values in prop::collection::vec(-1.0f64..1.0, 512), dz in -500.0f64..500.0) {
        let f = field_from(&values, 16);
        let before = f.total_intensity();
        let after = propagate(&f, dz).unwrap().total_intensity();
        prop_assert!(((after - before) / before).abs() < 1e-10);
    }

    #[test]
    fn parseval_holds(values in prop::collection::vec(-1.0f64..1.0, 512)) {
        let f = field_from(&values, 16);
        let mut k = f.amplitude.clone();
        Fft2::new(16, 16).forward(&mut k);
        let real: f64 = f.amplitude.iter().map(|c| c.norm_sqr()).sum();
        let recip: f64 = k.iter().map(|c| c.norm_sqr()).sum::<f64>() / 256.0;
        prop_assert!(((real - recip) / real).abs() < 1e-10);
    }

    #[test]
    fn defocus_is_invertible(values in prop::collection::vec(-1.0f64..1.0, 512), df in -300.0f64..300.0) {
        let f = field_from(&values, 16);
        let there = propagate(&f, -df).unwrap();
        let back = apply_defocus(&there, -df).unwrap();
        let orig = f.intensity();
        let scale = orig.iter().copied().fold(0.0, f64::max);
        for (a, b) in back.iter().zip(orig.iter()) {
            prop_assert!((a - b).abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn slices_of_free_space_compose() {
    let f = gaussian(64, 0.1, 0.8);
    let one = propagate(&f, 80.0).unwrap();
    let mut many = f.clone();
    for _ in 0..8 {
        many = propagate(&many, 10.0).unwrap();
    }
    for (a, b) in one.amplitude.iter().zip(many.amplitude.iter()) {
        assert!((a - b).norm() < 1e-10);
    }
    let k = fresnel_propagator(64, 64, 0.1, LAMBDA_300KV, 80.0).unwrap();
    assert!(k.iter().all(|c| (c.norm() - 1.0).abs() < 1e-14));
}

fn slab(edge_col: usize, potential: f64, thickness: f64, n_slices: usize) -> SlabPhantom {
    let beam = beam_kinematics(Volts(300e3)).unwrap();
    SlabPhantom {
        inner_potential_v: potential,
        thickness_nm: thickness,
        n_slices,
        edge_col,
        interaction_constant: interaction_constant(&beam),
        band_limit: true,
    }
}

#[test]
fn zero_potential_is_free_space_propagation() {
    // wide enough that the periodic copies do not overlap, so the input is band limited
    let f = gaussian(128, 0.1, 0.8);
    let exit = multislice_exit_wave(&f, &slab(64, 0.0, 20.0, 5)).unwrap();
    let free = propagate(&f, 20.0).unwrap();
    let worst = exit
        .amplitude
        .iter()
        .zip(free.amplitude.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn slice_count_converges_for_uniform_slab() {
    let f = gaussian(64, 0.1, 0.8);
    let a = multislice_exit_wave(&f, &slab(64, 17.0, 20.0, 10)).unwrap();
    let b = multislice_exit_wave(&f, &slab(64, 17.0, 20.0, 20)).unwrap();
    let rms = (a
        .amplitude
        .iter()
        .zip(b.amplitude.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        / a.amplitude.len() as f64)
        .sqrt();
    assert!(rms < 1e-6, "rms {rms}");
}

#[test]
fn elastic_slabs_show_no_tail_at_zero_defocus() {
    for (potential, thickness, slices) in [(17.0, 2.0, 4), (10.0, 1.0, 2), (25.0, 2.0, 8), (17.0, 1.5, 3)] {
        let s = slab(256, potential, thickness, slices);
        let incident = WaveField::plane_wave(512, 1, 0.5, LAMBDA_300KV).unwrap();
        let exit = multislice_exit_wave(&incident, &s).unwrap();
        let m = edge_metrics(&apply_defocus(&exit, 0.0).unwrap(), 256, 0.5).unwrap();
        assert!(
            m.tail_extent_nm <= 1.0,
            "{potential} V, {thickness} nm: tail {}",
            m.tail_extent_nm
        );
    }
}
