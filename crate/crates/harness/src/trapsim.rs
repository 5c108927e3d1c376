//! Single- and few-agent trapping runs on a periodic square, used for the
//! trapping phase diagram and for coarsening.

use stigmergy::agent::{AgentState, KinematicParams};
use stigmergy::geom::{Boundary, SimConfig, Vec2};
use stigmergy::photormone::Profile;
use stigmergy::rng::RngStream;
use stigmergy::trap::{detect_trap, TrapVerdict};
use stigmergy::world::{FieldParams, Steering, World, WorldParams};
use stigmergy::Result;

/// Everything that defines one trapping run. Gains are reduced (`𝖦 = G/v_o`),
/// lengths other than `box_size` and `h` are in units of `l_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapSetup {
    pub l_w: f64,
    pub gain: f64,
    pub n: usize,
    pub v_o: f64,
    pub l_s: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub h: f64,
    pub dt: f64,
    pub box_size: f64,
    /// Radius of the scripted warm-up orbit.
    pub warmup_radius: f64,
    /// Seconds spent on the scripted orbit before steering takes over.
    pub warmup: f64,
    /// Seconds of free motion before the detection window.
    pub settle: f64,
    pub window: f64,
    /// Spread of the agents' starting offsets around the common orbit.
    pub jitter: f64,
    pub profile: Profile,
    pub seed: u64,
}

impl Default for TrapSetup {
    fn default() -> Self {
        TrapSetup {
            l_w: 3.0,
            gain: 4.0,
            n: 1,
            v_o: 0.04,
            l_s: 0.01,
            k_plus: 1.5,
            k_minus: 1.5,
            h: 5e-4,
            dt: 5e-3,
            box_size: 0.12,
            warmup_radius: 1.0,
            warmup: 3.0,
            settle: 10.0,
            window: 30.0,
            jitter: 0.0,
            profile: Profile::Disk,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapOutcome {
    pub trapped: bool,
    /// Fitted orbit radius of agent 0 in units of `l_s`.
    pub radius: f64,
    pub verdict: TrapVerdict,
}

impl TrapSetup {
    pub fn world_params(&self) -> WorldParams {
        WorldParams {
            sim: SimConfig {
                dt: self.dt,
                total_time: self.warmup + self.settle + self.window,
                width: self.box_size,
                height: self.box_size,
                boundary: Boundary::Periodic,
                seed: self.seed,
            },
            kin: KinematicParams {
                v_o: self.v_o,
                g: self.gain * self.v_o,
                l_s: self.l_s,
                ..KinematicParams::default()
            },
            steering: Steering::Gradient,
            field: FieldParams {
                k_plus: self.k_plus,
                k_minus: self.k_minus,
                d_c: 0.0,
                w: 0.5 * self.l_w * self.l_s,
                profile: self.profile,
                h: self.h,
            },
            construction: None,
            ..WorldParams::default()
        }
    }

    /// Build the world with every agent on the warm-up orbit, field empty.
    fn start(&self) -> Result<(World, Vec<f64>)> {
        let params = self.world_params();
        let mut rng = RngStream::substream(self.seed, 0);
        let center = Vec2::new(0.5 * self.box_size, 0.5 * self.box_size);
        let rho = self.warmup_radius * self.l_s;
        // the seed places the common orbit phase relative to the grid
        let base = rng.uniform(0.0, std::f64::consts::TAU);
        let mut phases = Vec::with_capacity(self.n);
        let agents = (0..self.n)
            .map(|id| {
                let phase = if id == 0 { base } else { base + rng.normal() * self.jitter / self.warmup_radius.max(1e-9) };
                phases.push(phase);
                orbit_state(id, center, rho, phase)
            })
            .collect();
        Ok((World::new(params, agents, Vec::new())?, phases))
    }

    pub fn run(&self) -> Result<TrapOutcome> {
        Ok(self.run_traced()?.0)
    }

    /// The outcome together with agent 0's unwrapped free-flight positions
    /// and the final world.
    pub fn run_traced(&self) -> Result<(TrapOutcome, Vec<Vec2>, World)> {
        let (mut world, phases) = self.start()?;
        let center = Vec2::new(0.5 * self.box_size, 0.5 * self.box_size);
        let rho = self.warmup_radius * self.l_s;
        let omega = self.v_o / rho;
        let dt = self.dt;
        let warm_steps = (self.warmup / dt).round() as usize;
        for step in 1..=warm_steps {
            let t = step as f64 * dt;
            for (id, &phase) in phases.iter().enumerate() {
                let s = orbit_state(id, center, rho, phase + omega * t);
                world.unwrapped[id] = s.r;
                world.agents[id] = s;
            }
            let sources = world.field.footprints(world.agents.iter().map(|a| a.r));
            world.field.step_field(&sources, dt)?;
        }
        let free_steps = ((self.settle + self.window) / dt).round() as usize;
        let mut traj = Vec::with_capacity(free_steps);
        for _ in 0..free_steps {
            world.step()?;
            traj.push(world.unwrapped[0]);
        }
        let max_radius = 4.0 * self.warmup_radius.max(0.5) * self.l_s;
        let verdict = detect_trap(&traj, dt, self.window, max_radius)?;
        let outcome = TrapOutcome {
            trapped: verdict.trapped,
            radius: verdict.radius / self.l_s,
            verdict,
        };
        Ok((outcome, traj, world))
    }
}

fn orbit_state(id: usize, center: Vec2, rho: f64, phase: f64) -> AgentState {
    // counter-clockwise, heading tangent to the circle
    let r = center + Vec2::from_angle(phase) * rho;
    AgentState::new(id, r, phase + std::f64::consts::FRAC_PI_2)
}

/// Smallest gain in `[lo, hi]` that traps, by bisection on the outcome of
/// `setup` at each trial gain. Returns `None` if `hi` does not trap or `lo`
/// already does.
pub fn bisect_critical_gain(setup: &TrapSetup, lo: f64, hi: f64, rel_tol: f64) -> Result<Option<f64>> {
    let trial = |g: f64| -> Result<bool> { Ok(TrapSetup { gain: g, ..setup.clone() }.run()?.trapped) };
    if !trial(hi)? || trial(lo)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if trial(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Many agents scattered on a periodic square, started in a decaying
/// linear ramp of light. Dimensional inputs throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningSetup {
    pub n: usize,
    pub box_size: f64,
    /// Dimensional gain `G`.
    pub g: f64,
    /// Production width; the Gaussian footprint has `σ = w/2`.
    pub w: f64,
    pub v_o: f64,
    pub l_s: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub h: f64,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: f64,
    /// Height of the initial ramp across the box, relative to `k₊/k₋`.
    pub ramp: f64,
    pub seed: u64,
}

impl Default for CoarseningSetup {
    fn default() -> Self {
        CoarseningSetup {
            n: 10,
            box_size: 0.2,
            g: 0.3,
            w: 0.03,
            v_o: 0.04,
            l_s: 0.01,
            k_plus: 1.5,
            k_minus: 1.5,
            h: 2e-3,
            dt: 1e-2,
            t_end: 200.0,
            sample_every: 1.0,
            ramp: 1.0,
            seed: 0,
        }
    }
}

impl CoarseningSetup {
    pub fn world(&self) -> Result<World> {
        let params = WorldParams {
            sim: SimConfig {
                dt: self.dt,
                total_time: self.t_end,
                width: self.box_size,
                height: self.box_size,
                boundary: Boundary::Periodic,
                seed: self.seed,
            },
            kin: KinematicParams {
                v_o: self.v_o,
                g: self.g,
                l_s: self.l_s,
                ..KinematicParams::default()
            },
            steering: Steering::Gradient,
            field: FieldParams {
                k_plus: self.k_plus,
                k_minus: self.k_minus,
                d_c: 0.0,
                w: 0.5 * self.w,
                profile: Profile::Gaussian,
                h: self.h,
            },
            construction: None,
            ..WorldParams::default()
        };
        let mut rng = RngStream::substream(self.seed, 0);
        let agents = (0..self.n)
            .map(|id| {
                let r = Vec2::new(rng.uniform(0.0, self.box_size), rng.uniform(0.0, self.box_size));
                AgentState::new(id, r, rng.uniform(-std::f64::consts::PI, std::f64::consts::PI))
            })
            .collect();
        let mut world = World::new(params, agents, Vec::new())?;
        let top = self.ramp * self.k_plus / self.k_minus;
        for j in 0..world.field.ny {
            for i in 0..world.field.nx {
                let x = world.field.cell_center(i, j).x;
                let k = world.field.idx(i, j);
                world.field.values[k] = top * x / self.box_size;
            }
        }
        Ok(world)
    }

    /// `(t, mean pairwise distance)` sampled every `sample_every` seconds,
    /// starting at `t = 0`.
    pub fn run(&self) -> Result<Vec<(f64, f64)>> {
        let mut world = self.world()?;
        let torus = Some((self.box_size, self.box_size));
        let dist = |w: &World| {
            let pts: Vec<Vec2> = w.agents.iter().map(|a| a.r).collect();
            stigmergy::metrics::mean_pairwise_distance(&pts, torus).unwrap_or(0.0)
        };
        let every = (self.sample_every / self.dt).round().max(1.0) as u64;
        let mut out = vec![(0.0, dist(&world))];
        world.run_until(self.t_end, |w| {
            if w.tick % every == 0 {
                out.push((w.t, dist(w)));
            }
        })?;
        Ok(out)
    }
}
