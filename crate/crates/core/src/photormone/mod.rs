//! The photormone field: a decaying light signal produced by the agents.
//!
//! Production and decay are integrated with the exact exponential relaxation
//! `c ← k̂ + (c − k̂)·e^{−k₋ dt}` (with `k̂ = k₊ρ/k₋`), so a grid without
//! diffusion follows the pointwise ODE to machine precision for any `dt`.
//! Optional diffusion is an explicit five-point step applied afterwards.

mod green;
mod snapshot;

pub use green::greens_oracle;
pub use snapshot::GridSnapshot;

use crate::error::{Error, Result};
use crate::geom::{Boundary, Rect, Vec2};

/// Shape of one agent's production footprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// Indicator of the disk of the given radius (cell-centre membership).
    Disk,
    /// `exp(-d²/(2σ²))` with `σ` = radius, truncated at 4σ.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceFootprint {
    pub center: Vec2,
    pub radius: f64,
    pub profile: Profile,
}

impl SourceFootprint {
    pub fn disk(center: Vec2, radius: f64) -> Self {
        SourceFootprint {
            center,
            radius,
            profile: Profile::Disk,
        }
    }

    pub fn gaussian(center: Vec2, radius: f64) -> Self {
        SourceFootprint {
            center,
            radius,
            profile: Profile::Gaussian,
        }
    }

    fn reach(&self) -> f64 {
        match self.profile {
            Profile::Disk => self.radius,
            Profile::Gaussian => 4.0 * self.radius,
        }
    }
}

/// Gridded photormone intensity with its production/decay/diffusion constants.
///
/// Cell `(i, j)` covers `[i h, (i+1) h) × [j h, (j+1) h)`; values are stored
/// row-major with `i` fastest.
#[derive(Debug, Clone)]
pub struct PhotormoneGrid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub values: Vec<f64>,
    pub k_plus: f64,
    pub k_minus: f64,
    pub d_c: f64,
    /// Production radius used by [`PhotormoneGrid::footprints`].
    pub w: f64,
    pub profile: Profile,
    pub boundary: Boundary,
    /// Production only happens inside this rectangle when set.
    pub production_area: Option<Rect>,
    pub t: f64,
    density: Vec<f64>,
    scratch: Vec<f64>,
}

impl PhotormoneGrid {
    /// Default constants of the projected experimental field:
    /// `k₊ = 0.1 s⁻¹`, `k₋ = 0.02 s⁻¹`, no diffusion.
    pub const EXPERIMENT_K_PLUS: f64 = 0.1;
    pub const EXPERIMENT_K_MINUS: f64 = 0.02;

    pub fn new(nx: usize, ny: usize, h: f64, boundary: Boundary) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::config("grid", "needs at least one cell per axis"));
        }
        if !(h > 0.0) {
            return Err(Error::config("h", "must be positive"));
        }
        Ok(PhotormoneGrid {
            nx,
            ny,
            h,
            values: vec![0.0; nx * ny],
            k_plus: Self::EXPERIMENT_K_PLUS,
            k_minus: Self::EXPERIMENT_K_MINUS,
            d_c: 0.0,
            w: 0.0125,
            profile: Profile::Disk,
            boundary,
            production_area: None,
            t: 0.0,
            density: vec![0.0; nx * ny],
            scratch: vec![0.0; nx * ny],
        })
    }

    /// Grid covering `width × height` with cells of size close to `h`.
    pub fn covering(width: f64, height: f64, h: f64, boundary: Boundary) -> Result<Self> {
        let nx = (width / h).round().max(1.0) as usize;
        let ny = (height / h).round().max(1.0) as usize;
        // keep square cells that tile the width exactly
        let h = width / nx as f64;
        Self::new(nx, ny, h, boundary)
    }

    pub fn with_rates(mut self, k_plus: f64, k_minus: f64, d_c: f64) -> Self {
        self.k_plus = k_plus;
        self.k_minus = k_minus;
        self.d_c = d_c;
        self
    }

    pub fn with_footprint(mut self, w: f64, profile: Profile) -> Self {
        self.w = w;
        self.profile = profile;
        self
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.h
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.h
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    pub fn fill(&mut self, value: f64) {
        self.values.iter_mut().for_each(|v| *v = value);
    }

    /// `Σ c h²`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h * self.h
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// One footprint of radius `w` per position.
    pub fn footprints(&self, positions: impl IntoIterator<Item = Vec2>) -> Vec<SourceFootprint> {
        positions
            .into_iter()
            .map(|center| SourceFootprint {
                center,
                radius: self.w,
                profile: self.profile,
            })
            .collect()
    }

    /// Largest `dt` the configured diffusion tolerates.
    pub fn max_stable_dt(&self) -> f64 {
        let mut dt = f64::INFINITY;
        if self.k_minus > 0.0 {
            dt = dt.min(1.0 / self.k_minus);
        }
        if self.d_c > 0.0 {
            dt = dt.min(0.25 * self.h * self.h / self.d_c);
        }
        dt
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::config("dt", "must be positive"));
        }
        if dt * self.k_minus >= 1.0 {
            return Err(Error::config("dt", "dt·k_minus must be below 1"));
        }
        if self.d_c > 0.0 && dt * self.d_c / (self.h * self.h) > 0.25 {
            return Err(Error::config("dt", "dt·D_c/h² exceeds 0.25"));
        }
        Ok(())
    }

    /// Advance by `dt` with the given production footprints.
    pub fn step_field(&mut self, sources: &[SourceFootprint], dt: f64) -> Result<()> {
        self.check_dt(dt)?;
        let mut density = std::mem::take(&mut self.density);
        density.iter_mut().for_each(|v| *v = 0.0);
        for s in sources {
            self.rasterize(s, &mut density);
        }
        if let Some(area) = self.production_area {
            for j in 0..self.ny {
                for i in 0..self.nx {
                    if !area.contains(self.cell_center(i, j)) {
                        density[j * self.nx + i] = 0.0;
                    }
                }
            }
        }
        let res = self.step_with_density(&density, dt);
        self.density = density;
        res
    }

    /// Advance by `dt` given the agent density `ρ_a` per cell.
    pub fn step_with_density(&mut self, density: &[f64], dt: f64) -> Result<()> {
        self.check_dt(dt)?;
        if density.len() != self.values.len() {
            return Err(Error::config("density", "length must equal nx·ny"));
        }
        if self.k_minus > 0.0 {
            let decay = (-self.k_minus * dt).exp();
            let ratio = self.k_plus / self.k_minus;
            for (c, &rho) in self.values.iter_mut().zip(density) {
                let target = ratio * rho;
                *c = target + (*c - target) * decay;
            }
        } else {
            for (c, &rho) in self.values.iter_mut().zip(density) {
                *c += self.k_plus * rho * dt;
            }
        }
        if self.d_c > 0.0 {
            self.diffuse(dt);
        }
        self.t += dt;
        Ok(())
    }

    fn diffuse(&mut self, dt: f64) {
        let r = self.d_c * dt / (self.h * self.h);
        let mut next = std::mem::take(&mut self.scratch);
        laplacian_into(&self.values, self.nx, self.ny, self.boundary, &mut next);
        for (n, &c) in next.iter_mut().zip(&self.values) {
            *n = c + r * *n;
        }
        std::mem::swap(&mut self.values, &mut next);
        self.scratch = next;
    }

    fn rasterize(&self, s: &SourceFootprint, density: &mut [f64]) {
        let reach = s.reach();
        let h = self.h;
        let span = (reach / h).ceil() as i64 + 1;
        // per-axis (cell index, squared offset); the footprint weight
        // depends on the offsets only through dx² + dy²
        let axis = |center: f64, n: usize| -> Vec<(usize, f64)> {
            let c = (center / h).floor() as i64;
            let len = n as f64 * h;
            (c - span..=c + span)
                .filter_map(|i| {
                    let ii = match self.boundary {
                        Boundary::Periodic => i.rem_euclid(n as i64) as usize,
                        Boundary::Walls if i < 0 || i >= n as i64 => return None,
                        Boundary::Walls => i as usize,
                    };
                    let mut d = (ii as f64 + 0.5) * h - center;
                    if self.boundary == Boundary::Periodic {
                        d -= len * (d / len).round();
                    }
                    Some((ii, d * d))
                })
                .collect()
        };
        let xs = axis(s.center.x, self.nx);
        let ys = axis(s.center.y, self.ny);
        match s.profile {
            Profile::Gaussian => {
                let k = -0.5 / (s.radius * s.radius);
                let wx: Vec<f64> = xs.iter().map(|&(_, d2)| (k * d2).exp()).collect();
                for &(jj, dy2) in &ys {
                    let wy = (k * dy2).exp();
                    let row = jj * self.nx;
                    for (&(ii, dx2), &w) in xs.iter().zip(&wx) {
                        if dx2 + dy2 <= reach * reach {
                            density[row + ii] += w * wy;
                        }
                    }
                }
            }
            Profile::Disk => {
                let r2 = s.radius * s.radius;
                for &(jj, dy2) in &ys {
                    let row = jj * self.nx;
                    for &(ii, dx2) in &xs {
                        if dx2 + dy2 <= r2 {
                            density[row + ii] += 1.0;
                        }
                    }
                }
            }
        }
    }

    /// Bilinear interpolation between cell centres. Points outside a walls
    /// domain take the boundary value.
    pub fn sample_bilinear(&self, p: Vec2) -> f64 {
        let u = p.x / self.h - 0.5;
        let v = p.y / self.h - 0.5;
        match self.boundary {
            Boundary::Periodic => {
                let i0 = u.floor();
                let j0 = v.floor();
                let fx = u - i0;
                let fy = v - j0;
                let nx = self.nx as i64;
                let ny = self.ny as i64;
                let i0 = (i0 as i64).rem_euclid(nx) as usize;
                let j0 = (j0 as i64).rem_euclid(ny) as usize;
                let i1 = (i0 + 1) % self.nx;
                let j1 = (j0 + 1) % self.ny;
                self.blend(i0, i1, j0, j1, fx, fy)
            }
            Boundary::Walls => {
                let u = u.clamp(0.0, (self.nx - 1) as f64);
                let v = v.clamp(0.0, (self.ny - 1) as f64);
                let i0 = (u.floor() as usize).min(self.nx.saturating_sub(2));
                let j0 = (v.floor() as usize).min(self.ny.saturating_sub(2));
                let i1 = (i0 + 1).min(self.nx - 1);
                let j1 = (j0 + 1).min(self.ny - 1);
                self.blend(i0, i1, j0, j1, u - i0 as f64, v - j0 as f64)
            }
        }
    }

    fn blend(&self, i0: usize, i1: usize, j0: usize, j1: usize, fx: f64, fy: f64) -> f64 {
        let c00 = self.get(i0, j0);
        let c10 = self.get(i1, j0);
        let c01 = self.get(i0, j1);
        let c11 = self.get(i1, j1);
        (1.0 - fy) * ((1.0 - fx) * c00 + fx * c10) + fy * ((1.0 - fx) * c01 + fx * c11)
    }

    /// Read the left and right light sensors of an agent at `r` with heading
    /// `theta`: samples at `r ± (l_s/2) n̂`, left on the `+n̂` side.
    pub fn sensor_pair_read(&self, r: Vec2, theta: f64, l_s: f64) -> (f64, f64) {
        let n = Vec2::normal(theta) * (0.5 * l_s);
        (self.sample_bilinear(r + n), self.sample_bilinear(r - n))
    }

    pub fn snapshot(&self) -> GridSnapshot {
        GridSnapshot {
            nx: self.nx,
            ny: self.ny,
            h: self.h,
            t: self.t,
            values: self.values.clone(),
        }
    }
}

/// Five-point Laplacian (without the `1/h²` factor) of `src` into `dst`.
/// Walls mode uses mirrored ghost cells, i.e. zero normal flux.
pub(crate) fn laplacian_into(src: &[f64], nx: usize, ny: usize, boundary: Boundary, dst: &mut [f64]) {
    for j in 0..ny {
        let (jm, jp) = neighbours(j, ny, boundary);
        for i in 0..nx {
            let (im, ip) = neighbours(i, nx, boundary);
            let c = src[j * nx + i];
            dst[j * nx + i] =
                src[j * nx + im] + src[j * nx + ip] + src[jm * nx + i] + src[jp * nx + i] - 4.0 * c;
        }
    }
}

#[inline]
fn neighbours(k: usize, n: usize, boundary: Boundary) -> (usize, usize) {
    match boundary {
        Boundary::Periodic => ((k + n - 1) % n, (k + 1) % n),
        Boundary::Walls => (k.saturating_sub(1), (k + 1).min(n - 1)),
    }
}
