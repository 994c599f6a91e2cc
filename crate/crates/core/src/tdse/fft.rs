//! Three-dimensional FFT assembled from one-dimensional `rustfft` plans.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::GridSpec;
use crate::scalar::{int, Cplx, Real};

pub struct Fft3<T: Real> {
    n: [usize; 3],
    forward: [Arc<dyn Fft<T>>; 3],
    inverse: [Arc<dyn Fft<T>>; 3],
}

impl<T: Real> Fft3<T> {
    pub fn new(grid: &GridSpec<T>) -> Self {
        let mut planner = FftPlanner::new();
        let plan = |p: &mut FftPlanner<T>, n, d| p.plan_fft(n, d);
        let forward = [0, 1, 2].map(|a| plan(&mut planner, grid.n[a], FftDirection::Forward));
        let inverse = [0, 1, 2].map(|a| plan(&mut planner, grid.n[a], FftDirection::Inverse));
        Fft3 {
            n: grid.n,
            forward,
            inverse,
        }
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Cplx<T>]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform in place, including the `1/N` factor.
    pub fn inverse(&self, data: &mut [Cplx<T>]) {
        self.transform(data, &self.inverse);
        let s = T::one() / int::<T>(data.len() as i64);
        data.par_iter_mut().for_each(|v| *v = *v * s);
    }

    fn transform(&self, data: &mut [Cplx<T>], plans: &[Arc<dyn Fft<T>>; 3]) {
        let [nx, ny, nz] = self.n;
        assert_eq!(data.len(), nx * ny * nz);

        // z: contiguous lines.
        data.par_chunks_mut(nz * ny).for_each(|slab| plans[2].process(slab));

        // y: gather the lines of each x-slab, transform, scatter back.
        data.par_chunks_mut(ny * nz).for_each(|slab| {
            let mut buf = vec![Cplx::<T>::default(); ny * nz];
            for j in 0..ny {
                for k in 0..nz {
                    buf[k * ny + j] = slab[j * nz + k];
                }
            }
            plans[1].process(&mut buf);
            for j in 0..ny {
                for k in 0..nz {
                    slab[j * nz + k] = buf[k * ny + j];
                }
            }
        });

        // x: transpose to (y, z, x), transform contiguous lines, transpose back.
        let plane = ny * nz;
        let mut work = vec![Cplx::<T>::default(); data.len()];
        {
            let src = &*data;
            work.par_chunks_mut(nx * nz).enumerate().for_each(|(j, out)| {
                for k in 0..nz {
                    for i in 0..nx {
                        out[k * nx + i] = src[i * plane + j * nz + k];
                    }
                }
            });
        }
        work.par_chunks_mut(nx * nz).for_each(|lines| plans[0].process(lines));
        let work = &work;
        data.par_chunks_mut(plane).enumerate().for_each(|(i, out)| {
            for j in 0..ny {
                for k in 0..nz {
                    out[j * nz + k] = work[(j * nz + k) * nx + i];
                }
            }
        });
    }
}
