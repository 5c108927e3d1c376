//! When does an agent get caught in its own light, and how tight is the orbit?
//!
//! All quantities here are reduced: lengths in units of the sensor
//! separation `l_s`, time in units of `1/k₋`, gain `𝖦 = G/v_o`.
//! `𝖫_w = w/l_s` uses the production diameter `w`; `𝖫₋ = v_o/(k₋ l_s)`.

use crate::error::{Error, Result};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `𝖫₋ ≤ 𝖫_w`: light fades within one footprint.
    SmallDecayLength,
    /// Neither limit applies.
    Intermediate,
    /// `𝖫₋ ≥ 10 𝖫_w`: the trail outlives many footprints.
    LargeDecayLength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapRegime {
    pub l_w: f64,
    pub l_minus: f64,
    pub k_hat: f64,
}

/// Smallest orbit radius that still separates the two sensors' paths.
pub const MIN_ORBIT_RADIUS: f64 = 0.5;

impl TrapRegime {
    pub fn new(l_w: f64, l_minus: f64, k_hat: f64) -> Result<Self> {
        for (name, v) in [("L_w", l_w), ("L_minus", l_minus), ("k_hat", k_hat)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be positive"));
            }
        }
        Ok(TrapRegime { l_w, l_minus, k_hat })
    }

    /// From dimensional inputs; `w` is the production diameter.
    pub fn from_dimensional(w: f64, l_s: f64, v_o: f64, k_plus: f64, k_minus: f64) -> Result<Self> {
        Self::new(w / l_s, v_o / k_minus / l_s, k_plus / k_minus)
    }

    pub fn regime(&self) -> Regime {
        if self.l_minus <= self.l_w {
            Regime::SmallDecayLength
        } else if self.l_minus >= 10.0 * self.l_w {
            Regime::LargeDecayLength
        } else {
            Regime::Intermediate
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.l_w - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapPrediction {
    pub r_star: f64,
    pub g_c: f64,
    pub regime: Regime,
}

/// Orbit radius that maximises the sensed gradient: `(𝖫_w + 1)/4`.
pub fn trapping_radius_geometric(l_w: f64) -> f64 {
    (l_w + 1.0) / 4.0
}

/// Long-time value seen by the outer sensor on an orbit of radius `r_star`:
/// `k̂[1 − e^{τ₁/2}(e^{τ₂} − 1)/(e^{τ₁+τ₂} − 1)]`.
pub fn outer_sensor_concentration(r_star: f64, reg: &TrapRegime) -> Result<f64> {
    if !(r_star > 0.0) {
        return Err(Error::Domain("orbit radius must be positive".into()));
    }
    let ratio = (5.0 - reg.l_w) / (3.0 + reg.l_w);
    if ratio.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "x/R = {ratio} is outside [-1, 1]: L_w = {} is outside the geometric construction",
            reg.l_w
        )));
    }
    let total = 2.0 * std::f64::consts::PI * r_star / reg.l_minus;
    let tau1 = 2.0 * r_star * ratio.acos() / reg.l_minus;
    let tau2 = (total - tau1).max(0.0);
    let frac = (0.5 * tau1).exp() * tau2.exp_m1() / total.exp_m1();
    Ok((reg.k_hat * (1.0 - frac)).clamp(0.0, reg.k_hat))
}

/// Critical gain near `𝖫_w = 1`:
/// `2/k̂ + (𝖫_w√ε/(𝖫₋k̂)) coth(π𝖫_w/(2𝖫₋))`.
pub fn critical_gain_near_unit_width(reg: &TrapRegime) -> Result<f64> {
    let eps = reg.epsilon();
    if eps < 0.0 {
        return Err(Error::Domain("footprint narrower than the sensor pair".into()));
    }
    let coth = 1.0 / (std::f64::consts::PI * reg.l_w / (2.0 * reg.l_minus)).tanh();
    Ok(2.0 / reg.k_hat + reg.l_w * eps.sqrt() / (reg.l_minus * reg.k_hat) * coth)
}

/// Critical gain for wide footprints: `(4𝖫₋/(𝖫_w k̂)) sinh(π𝖫_w/(4𝖫₋))`.
pub fn critical_gain_wide(reg: &TrapRegime) -> f64 {
    4.0 * reg.l_minus / (reg.l_w * reg.k_hat) * (std::f64::consts::PI * reg.l_w / (4.0 * reg.l_minus)).sinh()
}

/// Critical gain from the outer-sensor value: the orbit `r*` is just
/// reachable when `r* = 1/(𝖦 (k̂ − c(R)))`.
pub fn critical_gain_general(r_star: f64, reg: &TrapRegime) -> Result<f64> {
    let c_r = outer_sensor_concentration(r_star, reg)?;
    let gap = reg.k_hat - c_r;
    if !(gap > 0.0) {
        return Err(Error::Untrappable(format!(
            "outer sensor sees the full level {c_r}: no gradient across the pair"
        )));
    }
    Ok(1.0 / (r_star * gap))
}

/// Trapping radius and critical gain for the regime `reg` falls in.
pub fn critical_gain(reg: &TrapRegime) -> Result<TrapPrediction> {
    let regime = reg.regime();
    match regime {
        Regime::SmallDecayLength => {
            let r_star = trapping_radius_geometric(reg.l_w);
            let g_c = if reg.l_w < 2.0 {
                critical_gain_near_unit_width(reg)?
            } else {
                critical_gain_wide(reg)
            };
            Ok(TrapPrediction { r_star, g_c, regime })
        }
        Regime::Intermediate => {
            let r_star = trapping_radius_geometric(reg.l_w);
            let g_c = critical_gain_general(r_star, reg)?;
            Ok(TrapPrediction { r_star, g_c, regime })
        }
        Regime::LargeDecayLength => {
            // the orbit shrinks as the gain drops; it stops being an orbit of the
            // sensor pair once it would be tighter than MIN_ORBIT_RADIUS
            let r = MIN_ORBIT_RADIUS;
            let g_c = implicit_gain(r, reg);
            Ok(TrapPrediction { r_star: r, g_c, regime })
        }
    }
}

/// Peak level on a circular orbit of radius `r` in the long-trail limit:
/// `(k̂/2)(e^{𝖫_w/𝖫₋} − 1)[coth(πr/𝖫₋) − 1]`.
pub fn steady_profile_css(r: f64, reg: &TrapRegime) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain("radius must be positive".into()));
    }
    let x = std::f64::consts::PI * r / reg.l_minus;
    // coth(x) − 1 = 2/(e^{2x} − 1), stable for large x
    let coth_m1 = 2.0 / (2.0 * x).exp_m1();
    Ok(0.5 * reg.k_hat * (reg.l_w / reg.l_minus).exp_m1() * coth_m1)
}

/// Gain at which the implicit orbit equation has root `r`.
fn implicit_gain(r: f64, reg: &TrapRegime) -> f64 {
    let s = (std::f64::consts::PI * r / reg.l_minus).sinh();
    2.0 * reg.l_minus * s * s / (std::f64::consts::PI * reg.k_hat * r * (reg.l_w / reg.l_minus).exp_m1())
}

/// `F(r) = r − (2𝖫₋/(π𝖦k̂)) sinh²(πr/𝖫₋)/(e^{𝖫_w/𝖫₋} − 1)`; its positive
/// root is the orbit radius.
pub fn implicit_residual(r: f64, g: f64, reg: &TrapRegime) -> f64 {
    let s = (std::f64::consts::PI * r / reg.l_minus).sinh();
    r - 2.0 * reg.l_minus * s * s / (std::f64::consts::PI * g * reg.k_hat * (reg.l_w / reg.l_minus).exp_m1())
}

/// Long-trail limit of the orbit radius, `𝖫_w 𝖦 k̂/(2π)`.
pub fn linear_radius(g: f64, reg: &TrapRegime) -> f64 {
    reg.l_w * g * reg.k_hat / (2.0 * std::f64::consts::PI)
}

/// Orbit radius in the long-trail regime at gain `g`.
///
/// `F` is concave with `F(0) = 0` and `F'(0) = 1`, so it has exactly one
/// positive root; it is bracketed from `MIN_ORBIT_RADIUS` upward and
/// bisected to a relative tolerance of 1e-12. A root below
/// `MIN_ORBIT_RADIUS` (including every gain near zero) means no orbit.
pub fn implicit_radius_large_decay(reg: &TrapRegime, g: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::Untrappable("gain must be positive to turn at all".into()));
    }
    let lin = linear_radius(g, reg);
    if reg.l_minus / lin > 100.0 && lin >= MIN_ORBIT_RADIUS {
        return Ok(lin);
    }
    let f = |r: f64| implicit_residual(r, g, reg);
    let mut lo = MIN_ORBIT_RADIUS;
    if f(lo) <= 0.0 {
        return Err(Error::Untrappable(format!(
            "no orbit wider than {MIN_ORBIT_RADIUS} at gain {g}"
        )));
    }
    let mut hi = 2.0 * lo;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Numerical("could not bracket the orbit radius".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares circle through `points` (algebraic fit).
pub fn fit_circle(points: &[Vec2]) -> Option<(Vec2, f64)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec2::ZERO, |a, &p| a + p) / n;
    let (mut suu, mut svv, mut suv, mut suuu, mut svvv, mut suvv, mut svuu) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let u = p.x - mean.x;
        let v = p.y - mean.y;
        suu += u * u;
        svv += v * v;
        suv += u * v;
        suuu += u * u * u;
        svvv += v * v * v;
        suvv += u * v * v;
        svuu += v * u * u;
    }
    let det = suu * svv - suv * suv;
    if det.abs() < 1e-30 * (suu + svv).powi(2).max(1e-300) {
        return None;
    }
    let b1 = 0.5 * (suuu + suvv);
    let b2 = 0.5 * (svvv + svuu);
    let uc = (b1 * svv - b2 * suv) / det;
    let vc = (b2 * suu - b1 * suv) / det;
    let radius = (uc * uc + vc * vc + (suu + svv) / n).sqrt();
    Some((mean + Vec2::new(uc, vc), radius))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapVerdict {
    pub trapped: bool,
    /// Fitted orbit radius.
    pub radius: f64,
    pub center: Vec2,
    /// Largest distance of any sample from the fitted centre.
    pub extent: f64,
    /// Distance between the centres fitted to the two halves of the window.
    pub drift: f64,
}

/// Classify the trailing `window` of a trajectory sampled every `dt`.
///
/// Trapped iff every sample lies within `max_radius` of the fitted centre
/// and the centres fitted to the first and second half of the window are
/// less than a quarter of `max_radius` apart. Positions must be unwrapped.
pub fn detect_trap(traj: &[Vec2], dt: f64, window: f64, max_radius: f64) -> Result<TrapVerdict> {
    let need = (window / dt).round() as usize;
    if need < 6 || traj.len() < need {
        return Err(Error::Indeterminate(format!(
            "need {need} samples for a {window} s window, have {}",
            traj.len()
        )));
    }
    let tail = &traj[traj.len() - need..];
    let Some((center, radius)) = fit_circle(tail) else {
        // collinear samples: a straight path is never a trap
        return Ok(TrapVerdict {
            trapped: false,
            radius: f64::INFINITY,
            center: tail[0],
            extent: f64::INFINITY,
            drift: f64::INFINITY,
        });
    };
    let extent = tail.iter().map(|p| p.distance(center)).fold(0.0, f64::max);
    let (a, b) = tail.split_at(need / 2);
    let drift = match (fit_circle(a), fit_circle(b)) {
        (Some((ca, _)), Some((cb, _))) => ca.distance(cb),
        _ => f64::INFINITY,
    };
    let trapped = extent < max_radius && drift < 0.25 * max_radius;
    Ok(TrapVerdict {
        trapped,
        radius,
        center,
        extent,
        drift,
    })
}
