use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use super::{GridSpec, TdseError};
use crate::scalar::{cplx, lit, par_reduce, to_f64, Cplx, Real};

const MAGIC: &[u8; 8] = b"OAMWF\0\0\0";
const VERSION: u32 = 1;

/// Complex amplitude on a [`GridSpec`]. Norms and inner products include the
/// volume element `h³`.
#[derive(Clone, Debug, PartialEq)]
pub struct Wavefunction<T: Real> {
    pub grid: GridSpec<T>,
    pub data: Vec<Cplx<T>>,
}

/// Header fields stored alongside a checkpointed state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckpointMeta {
    pub t: f64,
    pub step: u64,
}

impl<T: Real> Wavefunction<T> {
    pub fn zeros(grid: GridSpec<T>) -> Self {
        Wavefunction {
            grid,
            data: vec![Cplx::default(); grid.len()],
        }
    }

    /// Samples `f(x, y, z)` at every node.
    pub fn from_fn<F: Fn(T, T, T) -> Cplx<T> + Sync>(grid: GridSpec<T>, f: F) -> Self {
        let (x, y, z) = (grid.axis(0), grid.axis(1), grid.axis(2));
        let plane = grid.n[1] * grid.n[2];
        let mut data = vec![Cplx::default(); grid.len()];
        data.par_chunks_mut(plane).enumerate().for_each(|(i, slab)| {
            for (q, v) in slab.iter_mut().enumerate() {
                *v = f(x[i], y[q / grid.n[2]], z[q % grid.n[2]]);
            }
        });
        Wavefunction { grid, data }
    }

    /// `1/√(π) e^{−r}` centered on the origin.
    pub fn hydrogen_1s(grid: GridSpec<T>) -> Self {
        let c = T::one() / T::PI().sqrt();
        Self::from_fn(grid, |x, y, z| {
            cplx(c * (-(x * x + y * y + z * z).sqrt()).exp(), T::zero())
        })
    }

    pub fn check_grid(&self, other: &Self) -> Result<(), TdseError> {
        if self.grid.matches(&other.grid) {
            Ok(())
        } else {
            Err(TdseError::GridMismatch)
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Cplx<T>, TdseError> {
        self.check_grid(other)?;
        let (a, b) = (&self.data, &other.data);
        let s = par_reduce(a.len(), Cplx::default(), |i| a[i].conj() * b[i], |x, y| x + y);
        Ok(s * self.grid.volume_element())
    }

    pub fn norm_sqr(&self) -> T {
        let d = &self.data;
        par_reduce(d.len(), T::zero(), |i| d[i].norm_sqr(), |x, y| x + y) * self.grid.volume_element()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm and returns the previous norm.
    pub fn normalize(&mut self) -> T {
        let n = self.norm();
        if n > T::zero() {
            let s = T::one() / n;
            self.data.par_iter_mut().for_each(|v| *v = *v * s);
        }
        n
    }

    pub fn scale(&mut self, s: Cplx<T>) {
        self.data.par_iter_mut().for_each(|v| *v = *v * s);
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: Cplx<T>, other: &Self) -> Result<(), TdseError> {
        self.check_grid(other)?;
        self.data
            .par_iter_mut()
            .zip(other.data.par_iter())
            .for_each(|(a, b)| *a += *b * s);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.par_iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn cast<U: Real>(&self) -> Wavefunction<U> {
        Wavefunction {
            grid: self.grid.cast(),
            data: self
                .data
                .iter()
                .map(|v| cplx(lit(to_f64(v.re)), lit(to_f64(v.im))))
                .collect(),
        }
    }

    /// Writes the binary checkpoint: magic, version, grid, `t`, step, then
    /// the amplitudes as little-endian `f64` pairs.
    pub fn write_checkpoint(&self, path: &Path, meta: CheckpointMeta) -> Result<(), TdseError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for n in self.grid.n {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        w.write_all(&to_f64(self.grid.h).to_le_bytes())?;
        for c in self.grid.center {
            w.write_all(&to_f64(c).to_le_bytes())?;
        }
        w.write_all(&meta.t.to_le_bytes())?;
        w.write_all(&meta.step.to_le_bytes())?;
        for v in &self.data {
            w.write_all(&to_f64(v.re).to_le_bytes())?;
            w.write_all(&to_f64(v.im).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_checkpoint(path: &Path) -> Result<(Self, CheckpointMeta), TdseError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(TdseError::Format(format!("{}: not a wavefunction checkpoint", path.display())));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(TdseError::Format(format!(
                "{}: checkpoint version {version}, expected {VERSION}",
                path.display()
            )));
        }
        let mut n = [0usize; 3];
        for v in &mut n {
            *v = read_u64(&mut r)? as usize;
        }
        let h = read_f64(&mut r)?;
        let mut center = [0.0; 3];
        for c in &mut center {
            *c = read_f64(&mut r)?;
        }
        let t = read_f64(&mut r)?;
        let step = read_u64(&mut r)?;
        let grid = GridSpec::new(n, lit::<T>(h), center.map(lit::<T>))?;
        let mut data = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            data.push(cplx(lit(re), lit(im)));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(TdseError::Format(format!("{}: trailing bytes", path.display())));
        }
        Ok((Wavefunction { grid, data }, CheckpointMeta { t, step }))
    }
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
