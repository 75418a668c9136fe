//! Periodic finite-difference test systems on uniform 3-D grids.
//!
//! Unknowns are ordered with x fastest, then y, then z:
//! `index = ix + nx * (iy + ny * iz)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};
use crate::sparse::{check_len, CsrMatrix};

/// Smallest line length that holds a full sixth-order stencil.
pub const MIN_POINTS: usize = 7;

/// Mesh sizes (Bohr) commonly used for real-space electronic-structure grids.
pub const MESH_COARSE: f64 = 0.486;
pub const MESH_MEDIUM: f64 = 0.216;
pub const MESH_FINE: f64 = 0.108;
/// FCC aluminium lattice constant (Bohr).
pub const AL_LATTICE_CONSTANT: f64 = 7.78;

/// Uniform periodic grid over a cuboid `[0, Lx) × [0, Ly) × [0, Lz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: [usize; 3],
    pub lengths: [f64; 3],
}

impl GridSpec {
    /// Every axis needs at least [`MIN_POINTS`] points.
    pub fn new(n: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        if n.iter().any(|&k| k < MIN_POINTS) {
            return Err(Error::InvalidGrid("each axis needs at least 7 points"));
        }
        Self::coarse(n, lengths)
    }

    /// Like [`GridSpec::new`] but accepts lines shorter than the stencil.
    /// Stencil taps that wrap onto the same point are summed.
    pub fn coarse(n: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        if n.contains(&0) {
            return Err(Error::InvalidGrid("each axis needs at least one point"));
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidGrid("side lengths must be positive and finite"));
        }
        Ok(Self { n, lengths })
    }

    /// Cubic cell of side `reps[i]` FCC aluminium lattice constants, with the
    /// point count chosen so the spacing is as close to `h` as possible.
    pub fn al_supercell(reps: [usize; 3], h: f64) -> Result<Self> {
        let lengths = reps.map(|r| r as f64 * AL_LATTICE_CONSTANT);
        let n = lengths.map(|l| libm::round(l / h).max(1.0) as usize);
        Self::new(n, lengths)
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        [0, 1, 2].map(|d| self.lengths[d] / self.n[d] as f64)
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n[0] * (iy + self.n[1] * iz)
    }

    /// Coordinates of grid point `index`.
    pub fn point(&self, index: usize) -> [f64; 3] {
        let h = self.spacing();
        let ix = index % self.n[0];
        let iy = (index / self.n[0]) % self.n[1];
        let iz = index / (self.n[0] * self.n[1]);
        [ix as f64 * h[0], iy as f64 * h[1], iz as f64 * h[2]]
    }
}

const W2: [f64; 3] = [1.0, -2.0, 1.0];
const W4: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
const W6: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

/// Central-difference weights for `d²/dx²` on offsets `−order/2..=order/2`,
/// to be scaled by `1/h²`.
pub fn fd_second_derivative_weights(order: usize) -> Result<&'static [f64]> {
    match order {
        2 => Ok(&W2),
        4 => Ok(&W4),
        6 => Ok(&W6),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// Sixth-order periodic Laplacian `∇²_h`.
pub fn periodic_laplacian(grid: &GridSpec) -> CsrMatrix<f64> {
    periodic_laplacian_of_order(grid, 6).expect("order 6 is supported")
}

pub fn periodic_laplacian_of_order(grid: &GridSpec, order: usize) -> Result<CsrMatrix<f64>> {
    let w = fd_second_derivative_weights(order)?;
    let half = (w.len() / 2) as isize;
    let h = grid.spacing();
    let [nx, ny, nz] = grid.n;
    let mut entries = Vec::with_capacity(grid.len() * (3 * w.len()));
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let row = grid.index(ix, iy, iz);
                let centre: f64 = (0..3).map(|d| w[half as usize] / (h[d] * h[d])).sum();
                entries.push((row, row, centre));
                for (k, &wk) in w.iter().enumerate() {
                    let off = k as isize - half;
                    if off == 0 {
                        continue;
                    }
                    let wrap = |i: usize, n: usize| (i as isize + off).rem_euclid(n as isize) as usize;
                    entries.push((row, grid.index(wrap(ix, nx), iy, iz), wk / (h[0] * h[0])));
                    entries.push((row, grid.index(ix, wrap(iy, ny), iz), wk / (h[1] * h[1])));
                    entries.push((row, grid.index(ix, iy, wrap(iz, nz)), wk / (h[2] * h[2])));
                }
            }
        }
    }
    let n = grid.len();
    CsrMatrix::from_triplets(n, n, &entries)
}

/// `−(1/4π) ∇²_h` with periodic wraparound, and `b = ρ − mean(ρ)`.
///
/// The periodic operator annihilates constants, so the right-hand side is
/// projected onto the zero-mean subspace to keep the system consistent.
pub fn build_poisson_system(grid: &GridSpec, rhs_density: &[f64]) -> Result<(CsrMatrix<f64>, Vec<f64>)> {
    check_len(grid.len(), rhs_density.len())?;
    let scale = -1.0 / (4.0 * PI);
    let a = periodic_laplacian(grid).map(|v| v * scale);
    let mean = rhs_density.iter().sum::<f64>() / rhs_density.len() as f64;
    let b = rhs_density.iter().map(|&v| v - mean).collect();
    Ok((a, b))
}

/// Constants of the complex-shifted kernel equation
/// `−(1/4π)∇²V + Q V = P ρ^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzConstants {
    pub alpha: f64,
    pub p: C64,
    pub q: C64,
}

impl Default for HelmholtzConstants {
    fn default() -> Self {
        Self {
            alpha: 5.0 / 6.0 + libm::sqrt(5.0) / 6.0,
            p: C64::new(0.003277, -0.009081),
            q: C64::new(-0.134992, -0.070225),
        }
    }
}

/// `A = −(1/4π)∇²_h + Q I`, `b_i = P ρ_i^α`, with the default constants.
pub fn build_helmholtz_system(grid: &GridSpec, density: &[f64]) -> Result<(CsrMatrix<C64>, Vec<C64>)> {
    build_helmholtz_system_with(grid, density, &HelmholtzConstants::default())
}

pub fn build_helmholtz_system_with(
    grid: &GridSpec,
    density: &[f64],
    constants: &HelmholtzConstants,
) -> Result<(CsrMatrix<C64>, Vec<C64>)> {
    check_len(grid.len(), density.len())?;
    if let Some(index) = density.iter().position(|&d| !(d >= 0.0 && d.is_finite())) {
        return Err(Error::NegativeDensity { index });
    }
    let scale = -1.0 / (4.0 * PI);
    let lap = periodic_laplacian(grid);
    let entries: Vec<_> = lap
        .triplets()
        .map(|(i, j, v)| {
            let mut z = C64::from_real(v * scale);
            if i == j {
                z += constants.q;
            }
            (i, j, z)
        })
        .collect();
    let n = grid.len();
    let a = CsrMatrix::from_triplets(n, n, &entries)?;
    let b = density
        .iter()
        .map(|&rho| constants.p.scale(libm::exp(constants.alpha * libm::log(rho))))
        .collect();
    Ok((a, b))
}

const GAUSSIANS: usize = 4;
const FLOOR: f64 = 0.05;

/// Smooth, strictly positive, periodic stand-in for an electron density:
/// a constant floor plus a few randomly placed periodic Gaussians, scaled
/// to unit mean. Deterministic in `seed`.
pub fn synthetic_density(grid: &GridSpec, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_len = grid.lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let bumps: Vec<([f64; 3], f64, f64)> = (0..GAUSSIANS)
        .map(|_| {
            let centre = [0, 1, 2].map(|d| rng.gen::<f64>() * grid.lengths[d]);
            let width = (0.12 + 0.13 * rng.gen::<f64>()) * min_len;
            let amp = 0.5 + rng.gen::<f64>();
            (centre, width, amp)
        })
        .collect();

    let mut rho: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let r = grid.point(idx);
            let mut v = FLOOR;
            for (c, w, amp) in &bumps {
                let mut d2 = 0.0;
                for d in 0..3 {
                    let l = grid.lengths[d];
                    let mut dx = libm::fabs(r[d] - c[d]) % l;
                    if dx > 0.5 * l {
                        dx = l - dx;
                    }
                    d2 += dx * dx;
                }
                v += amp * libm::exp(-d2 / (2.0 * w * w));
            }
            v
        })
        .collect();
    let mean = rho.iter().sum::<f64>() / rho.len() as f64;
    for v in &mut rho {
        *v /= mean;
    }
    rho
}
