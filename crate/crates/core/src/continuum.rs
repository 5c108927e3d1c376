//! Finite-difference solver for the coupled densities of agents `ρ_a`,
//! light `c` and substrate `ρ_s` in reduced units:
//!
//! ```text
//! ∂t ρ_a + ∇·[(𝖢∇c + 𝖵(1 − ρ_s)₊ p̂) ρ_a] = ∇²ρ_a
//! ∂t c   = 𝖣_c ∇²c + k̂ ρ_a − c
//! ∂t ρ_s = (𝖪/4) ρ_s (1 + tanh α_c(c − c*)) (1 + tanh α_c(ρ_a − ρ*))
//! ```
//!
//! Cell-centred grid, explicit Euler. Agent transport is written in flux
//! form with first-order upwinding so that zero flux through the walls
//! conserves `∫ρ_a` to rounding.

use crate::error::{Error, Result};
use crate::geom::{Boundary, Vec2};
use crate::photormone::{laplacian_into, GridSnapshot};

/// Direction of self-propulsion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Orientation {
    /// Unit vector pointing at `center`.
    Inward { center: Vec2 },
    Uniform(Vec2),
}

impl Orientation {
    pub fn at(&self, p: Vec2) -> Vec2 {
        match *self {
            Orientation::Inward { center } => {
                let d = center - p;
                let n = d.norm();
                if n < 1e-12 {
                    Vec2::ZERO
                } else {
                    d / n
                }
            }
            Orientation::Uniform(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumParams {
    /// Phototaxis against diffusion, `χ c_o / D_a`.
    pub c: f64,
    /// Deposition rate, `k_s l / v_o`.
    pub k: f64,
    /// Advection against diffusion, `v_o l / D_a`.
    pub v: f64,
    pub k_hat: f64,
    pub d_c: f64,
    pub alpha_c: f64,
    pub c_star: f64,
    pub rho_a_star: f64,
    pub orientation: Orientation,
}

/// Dimensional inputs from which the reduced groups are formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalInputs {
    pub v_o: f64,
    pub chi: f64,
    pub d_a: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub d_c: f64,
    pub k_s: f64,
    pub rho_star: f64,
    pub c_star: f64,
    /// Reference agent density (peak of the initial `ρ_a`).
    pub rho_o: f64,
}

impl DimensionalInputs {
    /// Values used for both presets, with deposition rate `k_s`.
    pub fn presets(k_s: f64) -> Self {
        DimensionalInputs {
            v_o: 0.1,
            chi: 0.005,
            d_a: 0.005,
            k_plus: 1.5,
            k_minus: 1.5,
            d_c: 0.005,
            k_s,
            rho_star: 0.3,
            c_star: 0.01,
            rho_o: 1.0,
        }
    }

    /// Length unit `l = √(D_c/k₋)`.
    pub fn length_scale(&self) -> f64 {
        (self.d_c / self.k_minus).sqrt()
    }

    /// Reference intensity `c_o = k₊ ρ_o / k₋`, which makes `k̂ = 1`.
    pub fn c_o(&self) -> f64 {
        self.k_plus * self.rho_o / self.k_minus
    }

    pub fn reduce(&self, alpha_c: f64, orientation: Orientation) -> ContinuumParams {
        let l = self.length_scale();
        let c_o = self.c_o();
        ContinuumParams {
            c: self.chi * c_o / self.d_a,
            k: self.k_s * l / self.v_o,
            v: self.v_o * l / self.d_a,
            k_hat: self.k_plus * self.rho_o / (self.k_minus * c_o),
            d_c: self.d_c / (l * l * self.k_minus),
            alpha_c,
            c_star: self.c_star,
            rho_a_star: self.rho_star,
            orientation,
        }
    }
}

/// Threshold sharpness used when none is given.
pub const DEFAULT_ALPHA_C: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumFields {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub rho_a: Vec<f64>,
    pub c: Vec<f64>,
    pub rho_s: Vec<f64>,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassReport {
    pub rho_a: f64,
    pub c: f64,
    pub rho_s: f64,
}

impl ContinuumFields {
    pub fn zeros(width: f64, height: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && width > 0.0 && height > 0.0) {
            return Err(Error::config("continuum.h", "mesh and domain must be positive"));
        }
        let nx = (width / h).round() as usize;
        let ny = (height / h).round() as usize;
        if nx < 2 || ny < 2 {
            return Err(Error::config("continuum.h", "mesh too coarse for the domain"));
        }
        let h = width / nx as f64;
        let n = nx * ny;
        Ok(ContinuumFields {
            nx,
            ny,
            h,
            rho_a: vec![0.0; n],
            c: vec![0.0; n],
            rho_s: vec![0.0; n],
            t: 0.0,
        })
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    /// Fill `which` with cell averages of `f` over `sub × sub` sample points.
    pub fn fill_cell_average(&mut self, which: FieldId, sub: usize, f: impl Fn(Vec2) -> f64) {
        let sub = sub.max(1);
        let (nx, ny, h) = (self.nx, self.ny, self.h);
        let mut vals = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let mut s = 0.0;
                for b in 0..sub {
                    for a in 0..sub {
                        let p = Vec2::new(
                            (i as f64 + (a as f64 + 0.5) / sub as f64) * h,
                            (j as f64 + (b as f64 + 0.5) / sub as f64) * h,
                        );
                        s += f(p);
                    }
                }
                vals[j * nx + i] = s / (sub * sub) as f64;
            }
        }
        *self.field_mut(which) = vals;
    }

    pub fn field(&self, which: FieldId) -> &Vec<f64> {
        match which {
            FieldId::RhoA => &self.rho_a,
            FieldId::C => &self.c,
            FieldId::RhoS => &self.rho_s,
        }
    }

    fn field_mut(&mut self, which: FieldId) -> &mut Vec<f64> {
        match which {
            FieldId::RhoA => &mut self.rho_a,
            FieldId::C => &mut self.c,
            FieldId::RhoS => &mut self.rho_s,
        }
    }

    pub fn mass_report(&self) -> MassReport {
        let a = self.h * self.h;
        MassReport {
            rho_a: self.rho_a.iter().sum::<f64>() * a,
            c: self.c.iter().sum::<f64>() * a,
            rho_s: self.rho_s.iter().sum::<f64>() * a,
        }
    }

    pub fn snapshot(&self, which: FieldId) -> GridSnapshot {
        GridSnapshot {
            nx: self.nx,
            ny: self.ny,
            h: self.h,
            t: self.t,
            values: self.field(which).clone(),
        }
    }

    /// Largest transport speed `|𝖢∇c + 𝖵(1 − ρ_s)₊p̂|` over cell faces.
    pub fn max_speed(&self, p: &ContinuumParams) -> f64 {
        let mut m: f64 = 0.0;
        self.for_each_face(p, |_, _, u| m = m.max(u.abs()));
        m
    }

    /// The explicit bound `0.9 min(h²/(4 max(1, 𝖣_c)), h/max|u|)`.
    pub fn cfl_dt(&self, p: &ContinuumParams) -> f64 {
        let h = self.h;
        let diff = h * h / (4.0 * p.d_c.max(1.0));
        let u = self.max_speed(p);
        let adv = if u > 0.0 { h / u } else { f64::INFINITY };
        0.9 * diff.min(adv)
    }

    /// A step that also keeps every update a convex combination, so the
    /// densities stay nonnegative: `0.9/(4 max(1, 𝖣_c)/h² + 2 max|u|/h)`
    /// capped by the reaction rates.
    pub fn stable_dt(&self, p: &ContinuumParams) -> f64 {
        let h = self.h;
        let rate = 4.0 * p.d_c.max(1.0) / (h * h) + 2.0 * self.max_speed(p) / h;
        let react = 1.0 + p.k.abs();
        (0.9 / rate).min(0.9 / react).min(self.cfl_dt(p))
    }

    /// Calls `f(index_low, index_high, velocity)` for every interior face;
    /// the velocity is the normal component from low to high.
    fn for_each_face(&self, p: &ContinuumParams, mut f: impl FnMut(usize, usize, f64)) {
        let (nx, ny, h) = (self.nx, self.ny, self.h);
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                if i + 1 < nx {
                    let k2 = k + 1;
                    let face = Vec2::new((i as f64 + 1.0) * h, (j as f64 + 0.5) * h);
                    let speed = p.v * (1.0 - 0.5 * (self.rho_s[k] + self.rho_s[k2])).max(0.0);
                    let u = p.c * (self.c[k2] - self.c[k]) / h + speed * p.orientation.at(face).x;
                    f(k, k2, u);
                }
                if j + 1 < ny {
                    let k2 = k + nx;
                    let face = Vec2::new((i as f64 + 0.5) * h, (j as f64 + 1.0) * h);
                    let speed = p.v * (1.0 - 0.5 * (self.rho_s[k] + self.rho_s[k2])).max(0.0);
                    let u = p.c * (self.c[k2] - self.c[k]) / h + speed * p.orientation.at(face).y;
                    f(k, k2, u);
                }
            }
        }
    }

    /// Rate of change of `ρ_s` for the current fields.
    pub fn substrate_rate(&self, p: &ContinuumParams) -> Vec<f64> {
        self.rho_s
            .iter()
            .zip(&self.c)
            .zip(&self.rho_a)
            .map(|((&s, &c), &a)| {
                0.25 * p.k * s * (1.0 + (p.alpha_c * (c - p.c_star)).tanh()) * (1.0 + (p.alpha_c * (a - p.rho_a_star)).tanh())
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldId {
    RhoA,
    C,
    RhoS,
}

/// Advance all three fields by `dt`.
pub fn step_continuum(f: &mut ContinuumFields, p: &ContinuumParams, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::config("continuum.dt", "must be positive"));
    }
    let limit = f.cfl_dt(p);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::config(
            "continuum.dt",
            format!("dt = {dt} exceeds the stability limit {limit}"),
        ));
    }
    let (nx, ny, h) = (f.nx, f.ny, f.h);
    let n = nx * ny;

    // agent density: diffusion plus upwinded flux
    let mut lap = vec![0.0; n];
    laplacian_into(&f.rho_a, nx, ny, Boundary::Walls, &mut lap);
    let mut div = vec![0.0; n];
    f.for_each_face(p, |lo, hi, u| {
        let flux = if u >= 0.0 { u * f.rho_a[lo] } else { u * f.rho_a[hi] };
        div[lo] += flux / h;
        div[hi] -= flux / h;
    });
    let ds = f.substrate_rate(p);

    let mut lap_c = vec![0.0; n];
    laplacian_into(&f.c, nx, ny, Boundary::Walls, &mut lap_c);

    let inv_h2 = 1.0 / (h * h);
    for k in 0..n {
        let a = f.rho_a[k];
        f.rho_a[k] = a + dt * (lap[k] * inv_h2 - div[k]);
        f.c[k] += dt * (p.d_c * lap_c[k] * inv_h2 + p.k_hat * a - f.c[k]);
        f.rho_s[k] += dt * ds[k];
    }
    for (name, field) in [("rho_a", &mut f.rho_a), ("c", &mut f.c), ("rho_s", &mut f.rho_s)] {
        for v in field.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-12 {
                    return Err(Error::Numerical(format!("{name} went negative ({v})")));
                }
                *v = 0.0;
            }
        }
    }
    f.t += dt;
    Ok(())
}

/// Run to time `t_end` with the positivity-preserving step, calling
/// `observe` after every step.
pub fn run_continuum(
    f: &mut ContinuumFields,
    p: &ContinuumParams,
    t_end: f64,
    mut observe: impl FnMut(&ContinuumFields),
) -> Result<()> {
    while f.t < t_end - 1e-12 {
        let dt = f.stable_dt(p).min(t_end - f.t);
        step_continuum(f, p, dt)?;
        observe(f);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Construction,
    Deconstruction,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "construction" => Ok(Preset::Construction),
            "deconstruction" => Ok(Preset::Deconstruction),
            other => Err(Error::config("preset", format!("unknown preset `{other}`"))),
        }
    }
}

pub const DOMAIN: (f64, f64) = (8.0, 6.0);

fn step_fn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Initial fields and parameters of a named scenario on mesh size `h`.
pub fn load_preset(preset: Preset, h: f64) -> Result<(ContinuumFields, ContinuumParams)> {
    if h > 0.1 {
        return Err(Error::config("continuum.h", "mesh size must not exceed 0.1"));
    }
    let mut f = ContinuumFields::zeros(DOMAIN.0, DOMAIN.1, h)?;
    let sub = 8;
    let params = match preset {
        Preset::Construction => {
            let o = Vec2::new(5.0, 4.0);
            f.fill_cell_average(FieldId::RhoA, sub, |p| {
                let r = p.distance(o);
                step_fn(r - 1.0) * (1.0 - step_fn(r - 1.3))
            });
            f.fill_cell_average(FieldId::RhoS, sub, |p| step_fn(0.5 - p.distance(o)));
            DimensionalInputs::presets(2.5).reduce(DEFAULT_ALPHA_C, Orientation::Inward { center: o })
        }
        Preset::Deconstruction => {
            let o = Vec2::new(4.0, 3.5);
            let la: f64 = 0.5;
            f.fill_cell_average(FieldId::RhoA, sub, |p| (-(p - o).norm_sq() / (2.0 * la * la)).exp());
            f.fill_cell_average(FieldId::RhoS, sub, |p| step_fn(p.y - 4.0));
            DimensionalInputs::presets(-2.5).reduce(DEFAULT_ALPHA_C, Orientation::Uniform(Vec2::new(0.0, 1.0)))
        }
    };
    Ok((f, params))
}
