use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::WaveReal;

/// Planned 2-D transform over `[y, x]` grids. The inverse is normalized so
/// that `inverse(forward(ψ)) = ψ`.
pub struct Fft2<T: WaveReal> {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<T>>,
    fwd_y: Arc<dyn Fft<T>>,
    inv_x: Arc<dyn Fft<T>>,
    inv_y: Arc<dyn Fft<T>>,
}

impl<T: WaveReal> Fft2<T> {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_x: planner.plan_fft_inverse(nx),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    pub fn forward(&self, a: &mut Array2<Complex<T>>) {
        self.run(a, &self.fwd_x, &self.fwd_y);
    }

    pub fn inverse(&self, a: &mut Array2<Complex<T>>) {
        self.run(a, &self.inv_x, &self.inv_y);
        let scale = T::one() / T::from_usize_lossy(self.nx * self.ny);
        a.mapv_inplace(|c| c.scale(scale));
    }

    fn run(&self, a: &mut Array2<Complex<T>>, along_x: &Arc<dyn Fft<T>>, along_y: &Arc<dyn Fft<T>>) {
        assert_eq!(a.dim(), (self.ny, self.nx), "grid does not match the planned transform");
        if self.nx > 1 {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); self.nx];
            for mut row in a.rows_mut() {
                buf.iter_mut().zip(row.iter()).for_each(|(b, &v)| *b = v);
                along_x.process(&mut buf);
                row.iter_mut().zip(&buf).for_each(|(v, &b)| *v = b);
            }
        }
        if self.ny > 1 {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); self.ny];
            for mut col in a.columns_mut() {
                buf.iter_mut().zip(col.iter()).for_each(|(b, &v)| *b = v);
                along_y.process(&mut buf);
                col.iter_mut().zip(&buf).for_each(|(v, &b)| *v = b);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_parseval() {
        let a0 = Array2::from_shape_fn((8, 16), |(y, x)| {
            Complex::new((x * 3 + y) as f64 % 5.0, (y * 7) as f64 % 3.0)
        });
        let fft = Fft2::new(16, 8);
        let mut a = a0.clone();
        fft.forward(&mut a);
        let real: f64 = a0.iter().map(|c| c.norm_sqr()).sum();
        let recip: f64 = a.iter().map(|c| c.norm_sqr()).sum::<f64>() / 128.0;
        assert!((real - recip).abs() < 1e-10 * real);
        fft.inverse(&mut a);
        for (x, y) in a.iter().zip(&a0) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
