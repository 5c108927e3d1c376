use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::quad;

/// Closed-form field of a point source of strength `alpha` switched on at
/// `t = 0` at the origin, in units where time is measured in `1/k₋`:
///
/// `c(x, t) = α k̂ ∫₀ᵗ e^{−s} / (4π D s) · exp(−|x|² / (4 D s)) ds`
///
/// evaluated by adaptive quadrature to a relative error below 1e-10.
/// The integrand is singular at the source, so points closer than
/// `min_radius` are rejected.
pub fn greens_oracle(
    x: Vec2,
    t: f64,
    alpha: f64,
    d_c: f64,
    k_hat: f64,
    min_radius: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain("time must be positive".into()));
    }
    if !(d_c > 0.0) {
        return Err(Error::Domain("diffusivity must be positive".into()));
    }
    let r2 = x.norm_sq();
    if r2 == 0.0 || r2.sqrt() < min_radius {
        return Err(Error::Domain(format!(
            "|x| = {} is inside the excluded radius {min_radius}",
            r2.sqrt()
        )));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let four_d = 4.0 * d_c;
    let integrand = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        (-s - r2 / (four_d * s)).exp() / (std::f64::consts::PI * four_d * s)
    };
    // the integrand peaks near s = r²/(4D); split there so the adaptive
    // rule sees the bump
    let peak = (r2 / four_d).min(t);
    let (a, _) = quad::integrate(integrand, 0.0, peak, 1e-11);
    let (b, _) = quad::integrate(integrand, peak, t, 1e-11);
    Ok(alpha * k_hat * (a + b))
}
