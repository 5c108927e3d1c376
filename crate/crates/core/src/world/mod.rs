//! The discrete environment: agents, substrate elements and the photormone
//! field advanced together on a fixed tick.
//!
//! Each tick runs in phases so that the agent order only matters for
//! conflicting claims on the same element:
//!
//! 1. every agent reads its light sensors and obstacle sensor;
//! 2. every agent runs its controller;
//! 3. actions are applied in id order (the lower id wins a contested element);
//! 4. agents move, then bounce off walls or wrap;
//! 5. the field is advanced with one footprint per agent.

pub mod layout;
pub mod substrate;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use crate::agent::{advance, AgentState, Direction, KinematicParams};
use crate::controller::{behavior_tick, turning_law, Action, BehaviorParams, Senses};
use crate::error::{Error, Result};
use crate::geom::{min_image, wrap_angle, Boundary, Rect, SimConfig, Vec2};
use crate::photormone::{PhotormoneGrid, Profile};
use crate::rng::{wiener_increment, RngStream};

pub use layout::Arena;
pub use substrate::{ElementState, SubstrateElement};

/// How agents turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Steering {
    /// Full behavioural program; body turn rate is `turn_gain · Ω`.
    Behavior,
    /// Ideal phototaxis `G (c_L − c_R)/l_s`, no transport.
    Gradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldParams {
    pub k_plus: f64,
    pub k_minus: f64,
    pub d_c: f64,
    /// Production radius (disk) or width (Gaussian).
    pub w: f64,
    pub profile: Profile,
    /// Grid spacing.
    pub h: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            k_plus: PhotormoneGrid::EXPERIMENT_K_PLUS,
            k_minus: PhotormoneGrid::EXPERIMENT_K_MINUS,
            d_c: 0.0,
            w: 0.0125,
            profile: Profile::Disk,
            h: 0.0025,
        }
    }
}

impl FieldParams {
    pub fn saturation(&self) -> f64 {
        self.k_plus / self.k_minus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldParams {
    pub sim: SimConfig,
    pub kin: KinematicParams,
    pub behavior: BehaviorParams,
    pub steering: Steering,
    /// Wheel-law gain mapping the controller output to a body turn rate.
    pub turn_gain: f64,
    pub field: FieldParams,
    /// Where light is produced and structures are scored. `None` means the
    /// whole domain.
    pub construction: Option<Rect>,
    pub body_radius: f64,
    pub ir_range: f64,
    pub ir_half_angle: f64,
    pub element_radius: f64,
    pub agent_collisions: bool,
}

impl Default for WorldParams {
    fn default() -> Self {
        let arena = Arena::default();
        WorldParams {
            sim: SimConfig {
                dt: 0.05,
                total_time: 600.0,
                width: arena.width,
                height: arena.height,
                boundary: Boundary::Walls,
                seed: 0,
            },
            kin: KinematicParams::default(),
            behavior: BehaviorParams::default(),
            steering: Steering::Behavior,
            turn_gain: 1e-2,
            field: FieldParams::default(),
            construction: Some(arena.construction),
            body_radius: 0.02,
            ir_range: 0.003,
            ir_half_angle: 15f64.to_radians(),
            element_radius: SubstrateElement::DEFAULT_RADIUS,
            agent_collisions: false,
        }
    }
}

impl WorldParams {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.kin.validate()?;
        if self.steering == Steering::Behavior {
            self.behavior.validate()?;
        }
        if !(self.field.h > 0.0) {
            return Err(Error::config("field.h", "must be positive"));
        }
        if !(self.field.w > 0.0) {
            return Err(Error::config("field.w", "must be positive"));
        }
        if !(self.field.k_minus >= 0.0 && self.field.k_plus >= 0.0 && self.field.d_c >= 0.0) {
            return Err(Error::config("field.k_plus", "rates must be nonnegative"));
        }
        if let Some(area) = self.construction {
            if !self.sim.domain().contains_rect(&area) {
                return Err(Error::config("arena.construction", "must lie inside the arena"));
            }
        }
        if !(self.body_radius >= 0.0 && self.ir_range >= 0.0 && self.element_radius > 0.0) {
            return Err(Error::config("world.body_radius", "sizes must be nonnegative"));
        }
        // the field update checks its own stability limits; check early so
        // the error names the offending input before a run starts
        if self.field.k_minus * self.sim.dt >= 1.0 {
            return Err(Error::config("dt", "dt·k_minus must be below 1"));
        }
        if self.field.d_c > 0.0 && self.sim.dt * self.field.d_c / (self.field.h * self.field.h) > 0.25 {
            return Err(Error::config("dt", "dt·D_c/h² exceeds 0.25"));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<PhotormoneGrid> {
        let mut g = PhotormoneGrid::covering(self.sim.width, self.sim.height, self.field.h, self.sim.boundary)?
            .with_rates(self.field.k_plus, self.field.k_minus, self.field.d_c)
            .with_footprint(self.field.w, self.field.profile);
        g.production_area = self.construction;
        Ok(g)
    }
}

/// Result of the obstacle sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Nearest free element in the sensing cone.
    pub element: Option<usize>,
    pub wall: bool,
    /// Another agent's body in the sensing cone.
    pub agent: bool,
}

impl Detection {
    pub fn any(&self) -> bool {
        self.element.is_some() || self.wall || self.agent
    }
}

#[derive(Debug, Clone)]
pub struct World {
    pub params: WorldParams,
    pub agents: Vec<AgentState>,
    pub substrate: Vec<SubstrateElement>,
    pub field: PhotormoneGrid,
    pub t: f64,
    pub tick: u64,
    /// Positions without periodic wrapping.
    pub unwrapped: Vec<Vec2>,
    /// Action each agent took on the last tick.
    pub last_actions: Vec<Action>,
    /// Body turn rate of each agent on the last tick.
    pub last_turn_rates: Vec<f64>,
    /// Sum of `|Δθ|` over steering-only ticks, and the matching path length.
    pub turn_total: f64,
    pub path_total: f64,
    rngs: Vec<RngStream>,
}

impl World {
    pub fn new(params: WorldParams, agents: Vec<AgentState>, substrate: Vec<SubstrateElement>) -> Result<Self> {
        params.validate()?;
        let field = params.build_grid()?;
        for (i, a) in agents.iter().enumerate() {
            if a.id != i {
                return Err(Error::config("agents", "ids must be 0..n in order"));
            }
        }
        for (i, e) in substrate.iter().enumerate() {
            if e.id != i {
                return Err(Error::config("substrate", "ids must be 0..n in order"));
            }
        }
        let rngs = (0..agents.len())
            .map(|i| RngStream::substream(params.sim.seed, i as u64 + 1))
            .collect();
        let n = agents.len();
        Ok(World {
            unwrapped: agents.iter().map(|a| a.r).collect(),
            params,
            agents,
            substrate,
            field,
            t: 0.0,
            tick: 0,
            last_actions: vec![Action::None; n],
            last_turn_rates: vec![0.0; n],
            turn_total: 0.0,
            path_total: 0.0,
            rngs,
        })
    }

    pub fn bounds(&self) -> Rect {
        self.params.sim.domain()
    }

    /// Obstacle sensor of agent `id`: a cone of half-angle `ir_half_angle`
    /// from the leading edge, reaching `ir_range` beyond it.
    pub fn ir_detect(&self, id: usize) -> Detection {
        let a = &self.agents[id];
        let p = &self.params;
        let fwd = a.heading();
        let apex = a.r + fwd * p.body_radius;
        let mut best: Option<(f64, usize)> = None;
        for e in &self.substrate {
            if !e.is_free() {
                continue;
            }
            let rel = match p.sim.boundary {
                Boundary::Periodic => min_image(apex, e.pos, p.sim.width, p.sim.height),
                Boundary::Walls => e.pos - apex,
            };
            let dist = rel.norm();
            let gap = dist - e.radius;
            if gap > p.ir_range {
                continue;
            }
            let visible = if gap <= 0.0 {
                // apex inside the element: only count it if it is in front
                rel.dot(fwd) > 0.0
            } else {
                let off_axis = rel.dot(fwd).clamp(-dist, dist) / dist;
                let half_width = (e.radius / dist).min(1.0).asin();
                off_axis.acos() - half_width <= p.ir_half_angle
            };
            if visible && best.is_none_or(|(g, _)| gap < g) {
                best = Some((gap, e.id));
            }
        }
        let wall = p.sim.boundary == Boundary::Walls && {
            let tip = apex + fwd * p.ir_range;
            tip.x <= 0.0 || tip.y <= 0.0 || tip.x >= p.sim.width || tip.y >= p.sim.height
        };
        let agent = self.agents.iter().any(|b| {
            if b.id == a.id {
                return false;
            }
            let rel = self.displacement(apex, b.r);
            let dist = rel.norm();
            if dist - p.body_radius > p.ir_range || dist <= 1e-12 {
                return false;
            }
            let off_axis = (rel.dot(fwd) / dist).clamp(-1.0, 1.0);
            let half_width = (p.body_radius / dist).min(1.0).asin();
            off_axis.acos() - half_width <= p.ir_half_angle
        });
        Detection {
            element: best.map(|(_, id)| id),
            wall,
            agent,
        }
    }

    /// Bind a free element to agent `id` at its current relative position
    /// and switch the agent into reverse.
    pub fn attach(&mut self, id: usize, element: usize) -> Result<()> {
        if self.agents[id].carrying.is_some() {
            return Err(Error::Domain(format!("agent {id} already carries an element")));
        }
        let e = self
            .substrate
            .get(element)
            .ok_or_else(|| Error::Domain(format!("no element {element}")))?;
        if !e.is_free() {
            return Err(Error::Domain(format!("element {element} is not free")));
        }
        let a = &self.agents[id];
        let rel = self.displacement(a.r, e.pos);
        let offset = rel.rotate(-a.theta);
        self.substrate[element].state = ElementState::Carried { agent: id, offset };
        let a = &mut self.agents[id];
        a.carrying = Some(element);
        a.d = Direction::Reverse;
        Ok(())
    }

    /// Release whatever agent `id` holds where it currently is, nudging it
    /// off any free element it would overlap. Returns the element id.
    pub fn detach(&mut self, id: usize) -> Result<usize> {
        let element = self.agents[id]
            .carrying
            .take()
            .ok_or_else(|| Error::Domain(format!("agent {id} carries nothing")))?;
        self.place_carried(element);
        self.substrate[element].state = ElementState::Free;
        self.agents[id].d = Direction::Forward;
        for _ in 0..3 {
            substrate::nudge_out(&mut self.substrate, element, 0.1);
            let before = self.substrate[element].pos;
            self.keep_element_inside(element);
            if self.substrate[element].pos == before {
                break;
            }
        }
        Ok(element)
    }

    fn displacement(&self, from: Vec2, to: Vec2) -> Vec2 {
        match self.params.sim.boundary {
            Boundary::Periodic => min_image(from, to, self.params.sim.width, self.params.sim.height),
            Boundary::Walls => to - from,
        }
    }

    fn place_carried(&mut self, element: usize) {
        if let ElementState::Carried { agent, offset } = self.substrate[element].state {
            let a = &self.agents[agent];
            let mut p = a.r + offset.rotate(a.theta);
            if self.params.sim.boundary == Boundary::Periodic {
                p = crate::geom::wrap_or_clamp(p, &self.params.sim);
            }
            self.substrate[element].pos = p;
        }
    }

    fn keep_element_inside(&mut self, element: usize) {
        if self.params.sim.boundary != Boundary::Walls {
            return;
        }
        let (w, h) = (self.params.sim.width, self.params.sim.height);
        let e = &mut self.substrate[element];
        e.pos.x = e.pos.x.clamp(e.radius, w - e.radius);
        e.pos.y = e.pos.y.clamp(e.radius, h - e.radius);
    }

    fn sense(&self, id: usize) -> (Senses, Detection) {
        let a = &self.agents[id];
        let (c_left, c_right) = self.field.sensor_pair_read(a.r, a.theta, self.params.kin.l_s);
        let det = if a.carrying.is_some() {
            Detection { element: None, wall: false, agent: false }
        } else {
            self.ir_detect(id)
        };
        let senses = Senses {
            c_left,
            c_right,
            obstacle: a.carrying.is_some() || det.any(),
        };
        (senses, det)
    }

    /// Advance everything by one tick.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.params.sim.dt;
        let n = self.agents.len();

        // 1-2. sense and decide from the same snapshot
        let mut plans = Vec::with_capacity(n);
        for id in 0..n {
            let (senses, det) = self.sense(id);
            let (omega, action) = match self.params.steering {
                Steering::Behavior => {
                    let mut out = behavior_tick(&senses, &self.agents[id], &self.params.behavior, &mut self.rngs[id]);
                    // a wall is never fetched
                    if out.action == Action::Fetch && det.element.is_none() {
                        out.action = Action::Avoid(self.rngs[id].rotation());
                    }
                    (self.params.turn_gain * out.omega, out.action)
                }
                Steering::Gradient => {
                    let om = crate::agent::gradient_turn_rate(senses.c_left, senses.c_right, &self.params.kin);
                    (om, Action::None)
                }
            };
            plans.push((omega, action, det));
        }

        // 3. apply in id order
        for (id, (_, action, det)) in plans.iter_mut().enumerate() {
            match *action {
                Action::Fetch => {
                    let target = det.element.expect("fetch needs a target");
                    if self.attach(id, target).is_err() {
                        let phi = self.rngs[id].rotation();
                        *action = Action::Avoid(phi);
                        self.agents[id].theta = wrap_angle(self.agents[id].theta + phi);
                    }
                }
                Action::Avoid(phi) => {
                    self.agents[id].theta = wrap_angle(self.agents[id].theta + phi);
                }
                Action::Release(phi) => {
                    self.detach(id)?;
                    self.agents[id].theta = wrap_angle(self.agents[id].theta + phi);
                }
                Action::ResetForward => {
                    if self.agents[id].carrying.is_some() {
                        self.detach(id)?;
                    }
                    self.agents[id].d = Direction::Forward;
                }
                Action::None => {}
            }
            self.last_actions[id] = *action;
        }

        // 4. move
        for (id, (omega, action, _)) in plans.iter().enumerate() {
            let before = self.agents[id].r;
            let mut next = advance(&self.agents[id], *omega, &self.params.kin, dt);
            next.w += wiener_increment(&mut self.rngs[id], dt);
            self.agents[id] = next;
            self.respond_to_walls(id);
            let moved = self.displacement(before, self.agents[id].r);
            self.unwrapped[id] += moved;
            self.last_turn_rates[id] = *omega;
            if matches!(action, Action::None) {
                self.turn_total += (omega * dt).abs();
                self.path_total += self.params.kin.v_o * dt;
            }
        }
        if self.params.agent_collisions {
            self.resolve_agent_overlaps();
        }
        for e in 0..self.substrate.len() {
            if !self.substrate[e].is_free() {
                self.place_carried(e);
            }
        }

        // 5. field
        let sources = self.field.footprints(self.agents.iter().map(|a| a.r));
        self.field.step_field(&sources, dt)?;
        self.t += dt;
        self.tick += 1;
        Ok(())
    }

    fn respond_to_walls(&mut self, id: usize) {
        let p = &self.params;
        match p.sim.boundary {
            Boundary::Periodic => {
                let a = &mut self.agents[id];
                a.r = crate::geom::wrap_or_clamp(a.r, &p.sim);
            }
            Boundary::Walls => {
                let (w, h) = (p.sim.width, p.sim.height);
                let a = &mut self.agents[id];
                // the body reflects specularly: heading and direction of
                // motion mirror together
                let (lo, hi) = (p.body_radius, Vec2::new(w - p.body_radius, h - p.body_radius));
                let vel = a.heading() * a.d.sign();
                if (a.r.x < lo && vel.x < 0.0) || (a.r.x > hi.x && vel.x > 0.0) {
                    a.theta = wrap_angle(std::f64::consts::PI - a.theta);
                }
                if (a.r.y < lo && vel.y < 0.0) || (a.r.y > hi.y && vel.y > 0.0) {
                    a.theta = wrap_angle(-a.theta);
                }
                a.r.x = if a.r.x < lo { (2.0 * lo - a.r.x).min(hi.x) } else if a.r.x > hi.x { (2.0 * hi.x - a.r.x).max(lo) } else { a.r.x };
                a.r.y = if a.r.y < lo { (2.0 * lo - a.r.y).min(hi.y) } else if a.r.y > hi.y { (2.0 * hi.y - a.r.y).max(lo) } else { a.r.y };
                // a carried element swung outside pushes the agent back in
                if let Some(e) = a.carrying {
                    if let ElementState::Carried { offset, .. } = self.substrate[e].state {
                        let q = offset.rotate(a.theta);
                        let rad = self.substrate[e].radius;
                        a.r.x = a.r.x.max(rad - q.x).min(w - rad - q.x);
                        a.r.y = a.r.y.max(rad - q.y).min(h - rad - q.y);
                    }
                }
                a.r.x = a.r.x.clamp(0.0, w);
                a.r.y = a.r.y.clamp(0.0, h);
            }
        }
    }

    fn resolve_agent_overlaps(&mut self) {
        let contact = 2.0 * self.params.body_radius;
        for i in 0..self.agents.len() {
            for j in i + 1..self.agents.len() {
                let d = self.displacement(self.agents[i].r, self.agents[j].r);
                let dist = d.norm();
                if dist < contact && dist > 1e-12 {
                    let push = d * ((contact - dist) / dist * 0.5);
                    self.agents[i].r -= push;
                    self.agents[j].r += push;
                }
            }
        }
        for id in 0..self.agents.len() {
            self.respond_to_walls(id);
        }
    }

    /// Run until `t ≥ until`, calling `observe` after every tick.
    pub fn run_until(&mut self, until: f64, mut observe: impl FnMut(&World)) -> Result<()> {
        while self.t < until - 0.5 * self.params.sim.dt {
            self.step()?;
            observe(self);
        }
        Ok(())
    }

    /// Raw turn rate the behaviour law would command for agent `id` right
    /// now, before the wheel gain.
    pub fn commanded_turn(&self, id: usize) -> f64 {
        let a = &self.agents[id];
        let (cl, cr) = self.field.sensor_pair_read(a.r, a.theta, self.params.kin.l_s);
        turning_law(cl, cr, a.w, &self.params.behavior, a.d)
    }

    pub fn free_count(&self) -> usize {
        self.substrate.iter().filter(|e| e.is_free()).count()
    }

    pub fn carried_count(&self) -> usize {
        self.substrate.len() - self.free_count()
    }

    /// Free elements whose centre lies in the construction area.
    pub fn elements_in_construction(&self) -> usize {
        let area = self.params.construction.unwrap_or_else(|| self.bounds());
        self.substrate
            .iter()
            .filter(|e| e.is_free() && area.contains(e.pos))
            .count()
    }

    /// Hash of every piece of state that evolves, bit for bit.
    pub fn state_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.tick.hash(&mut h);
        self.t.to_bits().hash(&mut h);
        for a in &self.agents {
            a.r.x.to_bits().hash(&mut h);
            a.r.y.to_bits().hash(&mut h);
            a.theta.to_bits().hash(&mut h);
            a.w.to_bits().hash(&mut h);
            a.d.hash(&mut h);
            a.carrying.hash(&mut h);
        }
        for e in &self.substrate {
            e.pos.x.to_bits().hash(&mut h);
            e.pos.y.to_bits().hash(&mut h);
            e.carrier().hash(&mut h);
        }
        for v in &self.field.values {
            v.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// Advance `world` by one tick.
pub fn step_world(world: &mut World) -> Result<()> {
    world.step()
}
