//! The behavioural program run by every agent on every tick.
//!
//! Heading: a blend of phototaxis and a random walk driven by a Wiener
//! process. Transport: a thresholded decision to fetch an obstacle ahead,
//! avoid it, or release a carried element.

use crate::agent::{AgentState, Direction, KinematicParams};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// How the fetch and release conditions read the photormone level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ThresholdMode {
    /// Fetch iff `K·C·c > K(c̄ + KΔc)`, release iff `K·c < C·K(c̄ − KΔc)`.
    Literal,
    /// The literal inequalities with `C` removed from both sides.
    CIndependent,
    /// Pick up in the dark and drop in the light (`K > 0`), or the reverse
    /// (`K < 0`): with `K > 0` fetch iff `c ≤ c_l` and release iff `c ≥ c_h`.
    /// `|K|` is the success probability of each attempt.
    #[default]
    Recruitment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorParams {
    /// Cooperation: weight of phototaxis against the random walk.
    pub c: f64,
    /// Deposition rate: sign picks construction or removal.
    pub k: f64,
    pub c_bar: f64,
    pub delta_c: f64,
    pub c_max: f64,
    /// Gain inside the `tanh`.
    pub alpha: f64,
    /// Random-walk amplitude.
    pub b: f64,
    pub l_s: f64,
    pub mode: ThresholdMode,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        let c_max = 5.0;
        BehaviorParams {
            c: 1.0,
            k: 1.0,
            c_bar: 0.5 * c_max,
            delta_c: 0.1 * c_max,
            c_max,
            alpha: 50.0,
            b: 0.3,
            l_s: 0.01,
            mode: ThresholdMode::default(),
        }
    }
}

impl BehaviorParams {
    pub fn c_high(&self) -> f64 {
        self.c_bar + self.delta_c
    }

    pub fn c_low(&self) -> f64 {
        self.c_bar - self.delta_c
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.c) {
            return Err(Error::config("behavior.C", "must lie in [0, 1]"));
        }
        if !(-1.0..=1.0).contains(&self.k) {
            return Err(Error::config("behavior.K", "must lie in [-1, 1]"));
        }
        if !(self.delta_c >= 0.0) {
            return Err(Error::config("behavior.delta_c", "must be nonnegative"));
        }
        if !(self.c_max > 0.0) {
            return Err(Error::config("behavior.c_max", "must be positive"));
        }
        if !(self.c_low() >= 0.0) {
            return Err(Error::config("behavior.c_bar", "c_bar - delta_c must be nonnegative"));
        }
        if !(self.l_s > 0.0) {
            return Err(Error::config("behavior.l_s", "must be positive"));
        }
        if !(self.b >= 0.0 && self.alpha >= 0.0) {
            return Err(Error::config("behavior.b", "b and alpha must be nonnegative"));
        }
        Ok(())
    }

    /// Fetch condition for an obstacle at intensity `c`.
    pub fn wants_fetch(&self, c: f64) -> bool {
        let (k, cc) = (self.k, self.c);
        match self.mode {
            ThresholdMode::Literal => k * cc * c > k * (self.c_bar + k * self.delta_c),
            ThresholdMode::CIndependent => k * c > k * (self.c_bar + k * self.delta_c),
            ThresholdMode::Recruitment => {
                if k > 0.0 {
                    c <= self.c_low()
                } else if k < 0.0 {
                    c >= self.c_high()
                } else {
                    false
                }
            }
        }
    }

    /// Release condition for a carried element at intensity `c`.
    pub fn wants_release(&self, c: f64) -> bool {
        let (k, cc) = (self.k, self.c);
        match self.mode {
            ThresholdMode::Literal => k * c < cc * k * (self.c_bar - k * self.delta_c),
            ThresholdMode::CIndependent => k * c < k * (self.c_bar - k * self.delta_c),
            ThresholdMode::Recruitment => {
                if k > 0.0 {
                    // strict so that zero thresholds mean "any light at all"
                    c > self.c_high() || (self.delta_c > 0.0 && c >= self.c_high())
                } else if k < 0.0 {
                    c <= self.c_low()
                } else {
                    true
                }
            }
        }
    }

    /// Probability that a fetch or release attempt succeeds.
    fn success_probability(&self) -> f64 {
        match self.mode {
            ThresholdMode::Recruitment => self.k.abs(),
            _ => 1.0,
        }
    }
}

/// `Ω = (C/l_s) tanh(α d K (c_L − c_R)/c_max) + ((1 − C)/l_s) b sin(πW)`.
pub fn turning_law(c_left: f64, c_right: f64, w: f64, p: &BehaviorParams, d: Direction) -> f64 {
    let taxis = (p.alpha * d.sign() * p.k * (c_left - c_right) / p.c_max).tanh();
    let walk = p.b * (std::f64::consts::PI * w).sin();
    p.c / p.l_s * taxis + (1.0 - p.c) / p.l_s * walk
}

/// Wheel speeds `ω_{L,R} = d (v₀ ∓ gain (l_w/2) Ω)`.
pub fn wheel_speeds(omega: f64, d: Direction, k: &KinematicParams, gain: f64) -> (f64, f64) {
    let half = gain * 0.5 * k.l_w * omega;
    (d.sign() * (k.v_o - half), d.sign() * (k.v_o + half))
}

/// Body speed and turn rate of a differential drive from its wheel speeds.
pub fn body_rates(omega_left: f64, omega_right: f64, l_w: f64) -> (f64, f64) {
    (0.5 * (omega_left + omega_right), (omega_right - omega_left) / l_w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    None,
    /// Engage the magnet on the obstacle ahead and reverse.
    Fetch,
    /// Turn in place by the given angle.
    Avoid(f64),
    /// Drop the carried element, go forward again, and turn in place.
    Release(f64),
    /// Nothing ahead while reversing: go forward again.
    ResetForward,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::None => "none",
            Action::Fetch => "fetch",
            Action::Avoid(_) => "avoid",
            Action::Release(_) => "release",
            Action::ResetForward => "reset_forward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub omega: f64,
    pub action: Action,
}

/// What an agent perceives at the start of a tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Senses {
    pub c_left: f64,
    pub c_right: f64,
    /// The obstacle sensor fires (an attached element counts as detected).
    pub obstacle: bool,
}

impl Senses {
    pub fn c_here(&self) -> f64 {
        0.5 * (self.c_left + self.c_right)
    }
}

/// One pass of the behavioural loop. Does not mutate the agent: the world
/// applies the returned action.
pub fn behavior_tick(senses: &Senses, s: &AgentState, p: &BehaviorParams, rng: &mut RngStream) -> ControlOutput {
    let omega = turning_law(senses.c_left, senses.c_right, s.w, p, s.d);
    let c = senses.c_here();
    let action = if senses.obstacle && s.d == Direction::Forward {
        if p.wants_fetch(c) && rng.bernoulli(p.success_probability()) {
            Action::Fetch
        } else {
            Action::Avoid(rng.rotation())
        }
    } else if !senses.obstacle {
        if s.d == Direction::Reverse {
            Action::ResetForward
        } else {
            Action::None
        }
    } else if s.d == Direction::Reverse
        && p.wants_release(c)
        && rng.bernoulli(p.success_probability())
    {
        Action::Release(rng.rotation())
    } else {
        Action::None
    };
    ControlOutput { omega, action }
}
