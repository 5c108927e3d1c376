//! Agent kinematics and the reduced dynamics of a single phototactic agent.
//!
//! A dimensional agent moves at speed `v_o` along `d·p̂` and turns at
//! `Ω = G (∇c · n̂)`. In a cone-shaped field `c = −λ|r|` the radial
//! coordinate and the angle `ψ` between heading and radial direction obey,
//! after scaling lengths by `l` and time by `l/v_o`,
//!
//! ```text
//! ṙ = cos ψ
//! ψ̇ = (𝖦 − 1/r) sin ψ,   𝖦 = G λ l / v_o
//! ```
//!
//! with a centre at `(ψ, r) = (π/2, 1/𝖦)`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, wrap_or_clamp, SimConfig, Vec2};

/// Travel direction along the heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    #[default]
    Forward,
    Reverse,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reverse => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Direction::Forward => 1,
            Direction::Reverse => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub r: Vec2,
    /// Heading in `(−π, π]`.
    pub theta: f64,
    pub d: Direction,
    /// Substrate element held by the carrier, if any.
    pub carrying: Option<usize>,
    /// Running value of the Wiener process driving the random walk.
    pub w: f64,
}

impl AgentState {
    pub fn new(id: usize, r: Vec2, theta: f64) -> Self {
        AgentState {
            id,
            r,
            theta: wrap_angle(theta),
            d: Direction::Forward,
            carrying: None,
            w: 0.0,
        }
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }

    pub fn normal(&self) -> Vec2 {
        Vec2::normal(self.theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicParams {
    /// Base speed (m/s).
    pub v_o: f64,
    /// Rotational gain.
    pub g: f64,
    /// Sensor separation (m).
    pub l_s: f64,
    /// Wheel base (m).
    pub l_w: f64,
}

impl Default for KinematicParams {
    fn default() -> Self {
        KinematicParams {
            v_o: 0.04,
            g: 1e-2,
            l_s: 0.01,
            l_w: 0.03,
        }
    }
}

impl KinematicParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_o", self.v_o), ("l_s", self.l_s), ("l_w", self.l_w)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be positive"));
            }
        }
        if !self.g.is_finite() {
            return Err(Error::config("g", "must be finite"));
        }
        Ok(())
    }
}

/// Advance position and heading by `dt` at turn rate `omega` without any
/// boundary handling. The position update uses the midpoint heading.
pub fn advance(s: &AgentState, omega: f64, k: &KinematicParams, dt: f64) -> AgentState {
    let mid = s.theta + 0.5 * omega * dt;
    let mut next = s.clone();
    next.r = s.r + Vec2::from_angle(mid) * (s.d.sign() * k.v_o * dt);
    next.theta = wrap_angle(s.theta + omega * dt);
    next
}

/// [`advance`] followed by the periodic wrap of `cfg` (walls are handled by
/// the world).
pub fn step_kinematics(s: &AgentState, omega: f64, k: &KinematicParams, cfg: &SimConfig) -> AgentState {
    let mut next = advance(s, omega, k, cfg.dt);
    next.r = wrap_or_clamp(next.r, cfg);
    next
}

/// Finite-difference estimate of `G (∇c · n̂)` from the two sensor readings.
pub fn gradient_turn_rate(c_left: f64, c_right: f64, k: &KinematicParams) -> f64 {
    k.g * (c_left - c_right) / k.l_s
}

/// A field whose gradient is `−λ r̂` about `center`: a cone `c = c₀ − λ|x − center|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantGradient {
    pub lambda: f64,
    pub center: Vec2,
}

impl ConstantGradient {
    pub fn gradient(&self, p: Vec2) -> Vec2 {
        let d = p - self.center;
        let n = d.norm();
        if n == 0.0 {
            return Vec2::ZERO;
        }
        d * (-self.lambda / n)
    }

    /// `G (∇c · n̂)` evaluated analytically at the agent.
    pub fn turn_rate(&self, s: &AgentState, k: &KinematicParams) -> f64 {
        k.g * self.gradient(s.r).dot(s.normal())
    }

    /// Dimensional orbit radius at the centre of the reduced dynamics, `v_o / (G λ)`.
    pub fn orbit_radius(&self, k: &KinematicParams) -> f64 {
        k.v_o / (k.g * self.lambda)
    }

    /// Reduced gain `𝖦 = G λ l / v_o` for length unit `l`.
    pub fn reduced_gain(&self, k: &KinematicParams, l: f64) -> f64 {
        k.g * self.lambda * l / k.v_o
    }
}

/// One sample of an agent trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub id: usize,
    pub r: Vec2,
    pub theta: f64,
    pub d: Direction,
    pub carrying: bool,
}

impl TrajectoryPoint {
    pub fn of(t: f64, s: &AgentState) -> Self {
        TrajectoryPoint {
            t,
            id: s.id,
            r: s.r,
            theta: s.theta,
            d: s.d,
            carrying: s.carrying.is_some(),
        }
    }
}

pub const TRAJECTORY_HEADER: &str = "t,id,x,y,theta,d,carrying";

/// Write rows `t,id,x,y,theta,d,carrying` (with header).
pub fn write_trajectory_csv<W: Write>(mut out: W, points: &[TrajectoryPoint]) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.t,
            p.id,
            p.r.x,
            p.r.y,
            p.theta,
            p.d.as_i8(),
            u8::from(p.carrying)
        )?;
    }
    Ok(())
}

/// Drive one agent through a cone field for `steps` ticks and record
/// every position.
pub fn simulate_constant_gradient(
    start: AgentState,
    field: &ConstantGradient,
    k: &KinematicParams,
    dt: f64,
    steps: usize,
) -> Vec<TrajectoryPoint> {
    let mut s = start;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(TrajectoryPoint::of(0.0, &s));
    for n in 1..=steps {
        // midpoint turn rate: evaluate the field half a step ahead
        let om0 = field.turn_rate(&s, k);
        let half = advance(&s, om0, k, 0.5 * dt);
        let om = field.turn_rate(&half, k);
        s = advance(&s, om, k, dt);
        out.push(TrajectoryPoint::of(n as f64 * dt, &s));
    }
    out
}

/// Right-hand side of the reduced dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub dpsi: f64,
    pub dr: f64,
}

pub fn nondim_flow(psi: f64, r: f64, g: f64) -> Result<Flow> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    Ok(Flow {
        dpsi: (g - 1.0 / r) * psi.sin(),
        dr: psi.cos(),
    })
}

/// Classic RK4 on a small fixed-size state.
pub fn rk4<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    t0: f64,
    dt: f64,
    steps: usize,
) -> Vec<[f64; N]> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| {
        let mut r = *a;
        for i in 0..N {
            r[i] += s * b[i];
        }
        r
    };
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * dt, &axpy(&y, 0.5 * dt, &k1));
        let k3 = f(t + 0.5 * dt, &axpy(&y, 0.5 * dt, &k2));
        let k4 = f(t + dt, &axpy(&y, dt, &k3));
        for i in 0..N {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(y);
    }
    out
}

/// Integrate the reduced dynamics from `(psi0, r0)`; returns `[ψ, r]` at
/// every step.
pub fn integrate_nondim(psi0: f64, r0: f64, g: f64, dt: f64, steps: usize) -> Vec<[f64; 2]> {
    rk4(
        |_, y| {
            let r = y[1].max(1e-12);
            [(g - 1.0 / r) * y[0].sin(), y[0].cos()]
        },
        [psi0, r0],
        0.0,
        dt,
        steps,
    )
}

/// Closed-form solution of `ψ̈ = 𝖦²ψ − 2𝖦ψ̇` with `ψ(0) = a`, `ψ̇(0) = b`:
///
/// `ψ(t) = e^{−𝖦t}/(2𝖦) [√2 (b + a𝖦) sinh(√2𝖦t) + 2a𝖦 cosh(√2𝖦t)]`
pub fn psi_linearized(t: f64, a: f64, b: f64, g: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    let x = s2 * g * t;
    (-g * t).exp() / (2.0 * g) * (s2 * (b + a * g) * x.sinh() + 2.0 * a * g * x.cosh())
}

/// Largest amplitude `|2α|` accepted by [`psi_lindstedt`].
pub const LINDSTEDT_MAX_AMPLITUDE: f64 = 0.3;

/// Angular frequency `𝖦 − α²/𝖦²` of the perturbative orbit.
pub fn lindstedt_frequency(alpha: f64, g: f64) -> f64 {
    g - alpha * alpha / (g * g)
}

/// Perturbative deviation from `ψ = π/2`: `ψ̃(t) = 2α cos(β − α²t/𝖦² + 𝖦t)`.
pub fn psi_lindstedt(t: f64, alpha: f64, beta: f64, g: f64) -> Result<f64> {
    if (2.0 * alpha).abs() > LINDSTEDT_MAX_AMPLITUDE {
        return Err(Error::Domain(format!(
            "amplitude |2α| = {} exceeds {LINDSTEDT_MAX_AMPLITUDE}",
            (2.0 * alpha).abs()
        )));
    }
    Ok(2.0 * alpha * (beta + lindstedt_frequency(alpha, g) * t).cos())
}

/// Amplitude and phase `(α, β)` matching `ψ̃(0)` and `ψ̃′(0)`. The frequency
/// depends on `α`, so the two are found by fixed-point iteration.
pub fn lindstedt_params(psi0: f64, dpsi0: f64, g: f64) -> Result<(f64, f64)> {
    if !(g > 0.0) {
        return Err(Error::Domain("gain must be positive".into()));
    }
    let mut alpha = 0.5 * psi0.hypot(dpsi0 / g);
    for _ in 0..100 {
        let om = lindstedt_frequency(alpha, g);
        let next = 0.5 * psi0.hypot(dpsi0 / om);
        if (next - alpha).abs() <= 1e-15 * next.max(1e-300) {
            alpha = next;
            break;
        }
        alpha = next;
    }
    let om = lindstedt_frequency(alpha, g);
    let beta = (-dpsi0 / om).atan2(psi0);
    if (2.0 * alpha).abs() > LINDSTEDT_MAX_AMPLITUDE {
        return Err(Error::Domain(format!(
            "initial deviation too large for the perturbative form (|2α| = {})",
            2.0 * alpha
        )));
    }
    Ok((alpha, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Boundary;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn kp() -> KinematicParams {
        KinematicParams::default()
    }

    #[test]
    fn straight_line() {
        let s = AgentState::new(0, Vec2::ZERO, 0.0);
        let n = advance(&s, 0.0, &kp(), 1.0);
        assert!((n.r.x - 0.04).abs() < 1e-15 && n.r.y == 0.0);
    }

    #[test]
    fn constant_turn_closes_circle() {
        let k = kp();
        let omega = 2.0;
        let radius = k.v_o / omega;
        let dt = 1e-3;
        let period = 2.0 * PI / omega;
        let steps = (period / dt).round() as usize;
        // choose dt so the period is an integer number of steps
        let dt = period / steps as f64;
        let mut s = AgentState::new(0, Vec2::new(0.3, 0.2), 0.4);
        let start = s.r;
        for _ in 0..steps {
            s = advance(&s, omega, &k, dt);
        }
        assert!(s.r.distance(start) < 1e-6 * radius, "{}", s.r.distance(start));
    }

    #[test]
    fn reversal_negates_displacement() {
        let k = kp();
        let mut fwd = AgentState::new(0, Vec2::ZERO, 0.3);
        let mut rev = fwd.clone();
        rev.d = Direction::Reverse;
        for n in 0..50 {
            let om = (n as f64 * 0.1).sin();
            fwd = advance(&fwd, om, &k, 0.05);
            rev = advance(&rev, om, &k, 0.05);
            assert_eq!(fwd.theta, rev.theta);
            assert_eq!(fwd.r, -rev.r);
        }
    }

    #[test]
    fn step_wraps_on_torus() {
        let cfg = SimConfig {
            dt: 1.0,
            total_time: 1.0,
            width: 0.2,
            height: 0.2,
            boundary: Boundary::Periodic,
            seed: 0,
        };
        let s = AgentState::new(0, Vec2::new(0.19, 0.1), 0.0);
        let n = step_kinematics(&s, 0.0, &kp(), &cfg);
        assert!((n.r.x - 0.03).abs() < 1e-12);
    }

    #[test]
    fn turn_rate_from_sensors() {
        let k = kp();
        assert_eq!(gradient_turn_rate(0.4, 0.4, &k), 0.0);
        // c = λy sampled at ±l_s/2 along n̂ = ŷ
        let lambda = 3.0;
        let (cl, cr) = (lambda * 0.005, -lambda * 0.005);
        assert!((gradient_turn_rate(cl, cr, &k) - k.g * lambda).abs() < 1e-15);
        // mirror the field about the heading axis
        assert_eq!(gradient_turn_rate(cr, cl, &k), -gradient_turn_rate(cl, cr, &k));
    }

    #[test]
    fn flow_examples() {
        let g = 2.5;
        let f = nondim_flow(FRAC_PI_2, 1.0 / g, g).unwrap();
        assert!(f.dpsi.abs() < 1e-15 && f.dr.abs() < 1e-15);
        let f = nondim_flow(0.0, 3.0, g).unwrap();
        assert_eq!((f.dr, f.dpsi), (1.0, 0.0));
        let f = nondim_flow(PI / 4.0, 2.0, 1.0).unwrap();
        assert!((f.dr - SQRT_2 / 2.0).abs() < 1e-15);
        assert!((f.dpsi - SQRT_2 / 4.0).abs() < 1e-15);
        assert!(nondim_flow(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn linearized_initial_values() {
        assert_eq!(psi_linearized(0.0, 0.3, -0.7, 1.7), 0.3);
        for k in 0..20 {
            assert_eq!(psi_linearized(k as f64 * 0.1, 0.0, 0.0, 1.0), 0.0);
        }
        // derivative at 0 equals b
        let h = 1e-6;
        let d = (psi_linearized(h, 0.3, -0.7, 1.7) - psi_linearized(-h, 0.3, -0.7, 1.7)) / (2.0 * h);
        assert!((d + 0.7).abs() < 1e-8);
    }

    #[test]
    fn lindstedt_zero_amplitude() {
        for k in 0..10 {
            assert_eq!(psi_lindstedt(k as f64, 0.0, 0.4, 15.0).unwrap(), 0.0);
        }
        assert!(psi_lindstedt(0.0, 0.2, 0.0, 15.0).is_err());
    }

    #[test]
    fn lindstedt_params_reproduce_initial_data() {
        let g = 15.0;
        let (a, b) = lindstedt_params(0.1, 0.3, g).unwrap();
        assert!((psi_lindstedt(0.0, a, b, g).unwrap() - 0.1).abs() < 1e-14);
        let h = 1e-7;
        let d = (psi_lindstedt(h, a, b, g).unwrap() - psi_lindstedt(-h, a, b, g).unwrap()) / (2.0 * h);
        assert!((d - 0.3).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_is_stationary() {
        let g = 4.0;
        let path = integrate_nondim(FRAC_PI_2, 1.0 / g, g, 1e-3, 100_000);
        let r_end = path.last().unwrap()[1];
        assert!((r_end * g - 1.0).abs() < 1e-10);
    }

    #[test]
    fn orbit_radius_of_cone() {
        let k = kp();
        let f = ConstantGradient {
            lambda: 20.0,
            center: Vec2::ZERO,
        };
        let r = f.orbit_radius(&k);
        let s = AgentState::new(0, Vec2::new(r, 0.0), FRAC_PI_2);
        let traj = simulate_constant_gradient(s, &f, &k, 0.01, 4000);
        for p in traj {
            assert!((p.r.norm() / r - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn trajectory_csv_layout() {
        let s = AgentState::new(3, Vec2::new(0.5, 0.25), 0.0);
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[TrajectoryPoint::of(1.5, &s)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,id,x,y,theta,d,carrying\n1.5,3,0.5,0.25,0,1,0\n");
    }

    proptest! {
        #[test]
        fn psi_reflection(psi in -3.0f64..3.0, r in 0.01f64..10.0, g in 0.1f64..20.0) {
            let a = nondim_flow(psi, r, g).unwrap();
            let b = nondim_flow(-psi, r, g).unwrap();
            prop_assert_eq!(a.dr, b.dr);
            prop_assert_eq!(a.dpsi, -b.dpsi);
        }

        #[test]
        fn heading_stays_wrapped(theta in -50.0f64..50.0, omega in -100.0f64..100.0, dt in 0.0f64..1.0) {
            let s = AgentState::new(0, Vec2::ZERO, theta);
            let n = advance(&s, omega, &kp(), dt);
            prop_assert!(n.theta > -PI && n.theta <= PI);
        }
    }
}
