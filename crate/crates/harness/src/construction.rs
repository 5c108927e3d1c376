//! Walled-arena runs with substrate transport: construction from a
//! boundary ring, de-construction of wall layers, and their metrics.

use stigmergy::agent::{AgentState, TrajectoryPoint};
use stigmergy::geom::{Rect, Vec2};
use stigmergy::metrics::{cluster_elements, covariance_ellipse, mean_pairwise_distance, normalized_curvature, MetricsRow};
use stigmergy::photormone::GridSnapshot;
use stigmergy::rng::RngStream;
use stigmergy::trap::trapping_radius_geometric;
use stigmergy::world::layout::{boundary_ring, layers_top, scatter_agents, wall_layers};
use stigmergy::world::{Arena, SubstrateElement, World, WorldParams};
use stigmergy::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    /// Evenly along the walls.
    Ring,
    /// Dense rows along the bottom wall.
    Layers(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionSetup {
    pub world: WorldParams,
    pub arena: Arena,
    pub n_agents: usize,
    pub n_elements: usize,
    pub layout: Layout,
    /// Diameter of the initial light seed at the top of the layers; zero
    /// for none.
    pub seed_diameter: f64,
    /// Stop once the elements in the construction area have not changed
    /// for this long. Zero disables.
    pub early_stop: f64,
    pub snapshot_every: f64,
    /// Agent states are recorded every this many seconds; zero disables.
    pub trace_every: f64,
    /// Cluster linking distance.
    pub delta: f64,
}

impl Default for ConstructionSetup {
    fn default() -> Self {
        let mut world = WorldParams::default();
        // faster light than the hardware so a 600 s run moves material
        world.field.k_plus = 0.5;
        world.field.k_minus = 0.1;
        world.behavior.c_bar = 0.5;
        world.behavior.delta_c = 0.1;
        ConstructionSetup {
            arena: Arena::default(),
            world,
            n_agents: 10,
            n_elements: 200,
            layout: Layout::Ring,
            seed_diameter: 0.0,
            early_stop: 60.0,
            snapshot_every: 10.0,
            trace_every: 0.0,
            delta: 0.025,
        }
    }
}

impl ConstructionSetup {
    /// Seven layers of elements against the bottom wall with a light seed
    /// on top, and agents that remove rather than deposit.
    pub fn deconstruction() -> Self {
        let mut s = ConstructionSetup {
            layout: Layout::Layers(7),
            seed_diameter: 0.04,
            ..ConstructionSetup::default()
        };
        s.world.behavior.k = -1.0;
        s
    }
}

/// One trace line: an agent's state and the action it took that tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub point: TrajectoryPoint,
    pub action: &'static str,
}

pub const TRACE_HEADER: &str = "t,id,x,y,theta,d,carrying,action";

impl TraceRow {
    pub fn to_csv(&self) -> String {
        let p = &self.point;
        format!("{},{},{},{},{},{},{},{}", p.t, p.id, p.r.x, p.r.y, p.theta, p.d.as_i8(), u8::from(p.carrying), self.action)
    }
}

/// Positions at a snapshot time, enough to recompute every metric.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSnapshot {
    pub t: f64,
    /// Mean curvature since the previous snapshot.
    pub kappa: f64,
    pub agents: Vec<Vec2>,
    /// Free elements anywhere in the arena.
    pub elements: Vec<Vec2>,
}

impl StateSnapshot {
    pub fn of(world: &World, kappa: f64) -> Self {
        StateSnapshot {
            t: world.t,
            kappa,
            agents: world.agents.iter().map(|a| a.r).collect(),
            elements: world.substrate.iter().filter(|e| e.is_free()).map(|e| e.pos).collect(),
        }
    }

    /// `kind,x,y` rows under a `# t=…,kappa=…` comment line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# t={},kappa={}\nkind,x,y\n", self.t, self.kappa);
        for p in &self.agents {
            out.push_str(&format!("agent,{},{}\n", p.x, p.y));
        }
        for p in &self.elements {
            out.push_str(&format!("element,{},{}\n", p.x, p.y));
        }
        out
    }

    pub fn from_csv(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        let head = lines.next()?.strip_prefix("# ")?;
        let mut t = None;
        let mut kappa = None;
        for kv in head.split(',') {
            let (k, v) = kv.split_once('=')?;
            match k {
                "t" => t = v.parse().ok(),
                "kappa" => kappa = v.parse().ok(),
                _ => {}
            }
        }
        if lines.next()? != "kind,x,y" {
            return None;
        }
        let mut snap = StateSnapshot { t: t?, kappa: kappa?, agents: Vec::new(), elements: Vec::new() };
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut f = line.split(',');
            let kind = f.next()?;
            let p = Vec2::new(f.next()?.parse().ok()?, f.next()?.parse().ok()?);
            match kind {
                "agent" => snap.agents.push(p),
                "element" => snap.elements.push(p),
                _ => return None,
            }
        }
        Some(snap)
    }
}

/// Everything a construction run produces.
#[derive(Debug, Clone)]
pub struct ConstructionRun {
    pub rows: Vec<MetricsRow>,
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<GridSnapshot>,
    pub states: Vec<StateSnapshot>,
    pub elements_start: Vec<Vec2>,
    pub elements_end: Vec<Vec2>,
    /// Free elements inside the construction area at the start and end.
    pub in_area_start: usize,
    pub in_area_end: usize,
    pub stopped_early: bool,
    pub t_end: f64,
    pub final_hash: u64,
}

impl ConstructionRun {
    /// Net number of elements brought into the construction area.
    pub fn net_influx(&self) -> i64 {
        self.in_area_end as i64 - self.in_area_start as i64
    }

    pub fn last(&self) -> MetricsRow {
        self.rows.last().copied().unwrap_or_default()
    }
}

impl ConstructionSetup {
    /// Region where structures are scored: the construction area, or for
    /// layered substrate the band the layers occupy.
    pub fn area(&self) -> Rect {
        match self.layout {
            Layout::Ring => self.world.construction.unwrap_or(self.arena.construction),
            Layout::Layers(k) => {
                let layers = wall_layers(&self.arena, self.n_elements, k, self.world.element_radius);
                Rect::new(Vec2::ZERO, Vec2::new(self.arena.width, layers_top(&layers)))
            }
        }
    }

    /// Predicted trapping radius in units of `l_s` for the configured footprint.
    pub fn r_star(&self) -> f64 {
        trapping_radius_geometric(2.0 * self.world.field.w / self.world.kin.l_s)
    }

    pub fn build(&self, seed: u64) -> Result<World> {
        let mut params = self.world.clone();
        params.sim.seed = seed;
        params.sim.width = self.arena.width;
        params.sim.height = self.arena.height;
        // layered substrate is worked where it lies, so light covers the arena
        params.construction = match self.layout {
            Layout::Ring => Some(self.arena.construction),
            Layout::Layers(_) => None,
        };
        let r = params.element_radius;
        let substrate = match self.layout {
            Layout::Ring => boundary_ring(&self.arena, self.n_elements, r),
            Layout::Layers(k) => wall_layers(&self.arena, self.n_elements, k, r),
        };
        let mut rng = RngStream::substream(seed, 0);
        let spawn = match self.layout {
            Layout::Ring => self.arena.construction,
            Layout::Layers(_) => {
                let top = layers_top(&substrate) + params.body_radius + params.ir_range;
                let c = self.arena.construction;
                Rect::new(Vec2::new(c.min.x, top.max(c.min.y)), c.max)
            }
        };
        let agents: Vec<AgentState> = scatter_agents(&spawn, self.n_agents, &mut rng);
        let mut world = World::new(params, agents, substrate)?;
        if self.seed_diameter > 0.0 {
            let top = layers_top(&world.substrate);
            let center = Vec2::new(0.5 * self.arena.width, top);
            let sat = world.field.k_plus / world.field.k_minus.max(1e-300);
            let rad = 0.5 * self.seed_diameter;
            for j in 0..world.field.ny {
                for i in 0..world.field.nx {
                    if world.field.cell_center(i, j).distance(center) <= rad {
                        let k = world.field.idx(i, j);
                        world.field.values[k] = sat;
                    }
                }
            }
        }
        Ok(world)
    }

    /// Metrics of a recorded state.
    pub fn measure(&self, state: &StateSnapshot) -> MetricsRow {
        let area = self.area();
        let inside: Vec<Vec2> = state.elements.iter().copied().filter(|&p| area.contains(p)).collect();
        let report = cluster_elements(&inside, self.world.element_radius, self.delta, &area);
        let ellipse = covariance_ellipse(&inside);
        MetricsRow {
            t: state.t,
            n_c: report.n_c,
            covered_fraction: report.covered_fraction,
            mean_relative_area: report.mean_relative_area,
            largest_relative_area: report.largest / area.area(),
            lambda_a: ellipse.map_or(f64::NAN, |e| e.lambda_a),
            lambda_b: ellipse.map_or(f64::NAN, |e| e.lambda_b),
            circumference: ellipse.map_or(f64::NAN, |e| e.circumference),
            kappa_normalized: normalized_curvature(state.kappa, self.world.kin.l_s, self.r_star()),
            mean_distance: mean_pairwise_distance(&state.agents, None).unwrap_or(f64::NAN),
            in_area: inside.len(),
        }
    }

    pub fn run(&self, seed: u64) -> Result<ConstructionRun> {
        let mut world = self.build(seed)?;
        let dt = world.params.sim.dt;
        let duration = world.params.sim.total_time;
        let every = |s: f64| if s > 0.0 { ((s / dt).round() as u64).max(1) } else { u64::MAX };
        let (snap_every, trace_every) = (every(self.snapshot_every), every(self.trace_every));
        let area = self.area();
        let in_area_start = count_in(&world, &area);
        let elements_start = positions(&world.substrate);
        let mut states = vec![StateSnapshot::of(&world, 0.0)];
        let mut rows = vec![self.measure(&states[0])];
        let mut snapshots = vec![world.field.snapshot()];
        let mut trace: Vec<TraceRow> = Vec::new();
        let record = |w: &World, trace: &mut Vec<TraceRow>| {
            for (i, a) in w.agents.iter().enumerate() {
                let action = w.last_actions.get(i).map_or("none", |x| x.name());
                trace.push(TraceRow { point: TrajectoryPoint::of(w.t, a), action });
            }
        };
        if trace_every != u64::MAX {
            record(&world, &mut trace);
        }
        let (mut turn0, mut path0) = (0.0, 0.0);
        let mut last_change = 0.0;
        let mut last_positions = area_signature(&world, &area);
        let mut stopped_early = false;
        while world.t < duration - 0.5 * dt {
            world.step()?;
            if world.tick % trace_every == 0 {
                record(&world, &mut trace);
            }
            let sig = area_signature(&world, &area);
            if sig != last_positions {
                last_positions = sig;
                last_change = world.t;
            }
            let stop = self.early_stop > 0.0 && world.t - last_change >= self.early_stop - 1e-9;
            if world.tick % snap_every == 0 || stop {
                let dpath = world.path_total - path0;
                let kappa = if dpath > 0.0 { (world.turn_total - turn0) / dpath } else { 0.0 };
                turn0 = world.turn_total;
                path0 = world.path_total;
                let state = StateSnapshot::of(&world, kappa);
                rows.push(self.measure(&state));
                states.push(state);
                snapshots.push(world.field.snapshot());
            }
            if stop {
                stopped_early = true;
                break;
            }
        }
        Ok(ConstructionRun {
            rows,
            trace,
            snapshots,
            states,
            elements_start,
            elements_end: positions(&world.substrate),
            in_area_start,
            in_area_end: count_in(&world, &area),
            stopped_early,
            t_end: world.t,
            final_hash: world.state_hash(),
        })
    }
}

fn positions(elements: &[SubstrateElement]) -> Vec<Vec2> {
    elements.iter().map(|e| e.pos).collect()
}

/// Which free elements sit in the area, and where.
fn count_in(world: &World, area: &Rect) -> usize {
    world.substrate.iter().filter(|e| e.is_free() && area.contains(e.pos)).count()
}

fn area_signature(world: &World, area: &Rect) -> Vec<(usize, u64, u64)> {
    world
        .substrate
        .iter()
        .filter(|e| e.is_free() && area.contains(e.pos))
        .map(|e| (e.id, e.pos.x.to_bits(), e.pos.y.to_bits()))
        .collect()
}
