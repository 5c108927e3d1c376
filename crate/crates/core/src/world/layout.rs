//! Arena geometry and initial placements.

use std::f64::consts::PI;

use super::substrate::SubstrateElement;
use crate::agent::AgentState;
use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};
use crate::rng::RngStream;

/// Walled arena with a central construction area where light is projected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
    pub construction: Rect,
}

impl Default for Arena {
    fn default() -> Self {
        Arena::centered(0.67, 0.56, 0.48, 0.35)
    }
}

impl Arena {
    pub fn centered(width: f64, height: f64, cw: f64, ch: f64) -> Self {
        let outer = Rect::new(Vec2::ZERO, Vec2::new(width, height));
        Arena {
            width,
            height,
            construction: Rect::centered_in(&outer, cw, ch),
        }
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(Vec2::ZERO, Vec2::new(self.width, self.height))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::config("arena", "dimensions must be positive"));
        }
        if !self.bounds().contains_rect(&self.construction) {
            return Err(Error::config("arena.construction", "must lie inside the arena"));
        }
        Ok(())
    }
}

/// `n` elements spread evenly along the walls in as many concentric rows
/// as needed to keep neighbours from overlapping.
pub fn boundary_ring(arena: &Arena, n: usize, radius: f64) -> Vec<SubstrateElement> {
    let pitch = 2.0 * radius * 1.05;
    let mut out = Vec::with_capacity(n);
    let mut row = 0usize;
    while out.len() < n {
        let inset = radius * 1.1 + row as f64 * pitch;
        let (w, h) = (arena.width - 2.0 * inset, arena.height - 2.0 * inset);
        if w <= pitch || h <= pitch {
            break;
        }
        let sides = [w, h, w, h];
        let caps: Vec<usize> = sides.iter().map(|l| (l / pitch).floor() as usize).collect();
        let capacity: usize = caps.iter().sum();
        let remaining = n - out.len();
        // split what is left evenly over the rows still needed
        let rows_left = remaining.div_ceil(capacity);
        let take = remaining.div_ceil(rows_left).min(capacity);
        // each side starts at its corner, so neighbours across a corner
        // are at least one spacing apart
        let mut counts: Vec<usize> = sides
            .iter()
            .zip(&caps)
            .map(|(l, &c)| ((take as f64 * l / (2.0 * (w + h))).floor() as usize).min(c))
            .collect();
        let mut short = take - counts.iter().sum::<usize>();
        let mut k = 0;
        while short > 0 {
            if counts[k % 4] < caps[k % 4] {
                counts[k % 4] += 1;
                short -= 1;
            }
            k += 1;
        }
        let mut offset = 0.0;
        for (side, (&len, &count)) in sides.iter().zip(&counts).enumerate() {
            for m in 0..count {
                let s = offset + m as f64 * len / count as f64;
                let p = perimeter_point(s, w, h) + Vec2::new(inset, inset);
                out.push(SubstrateElement::free(out.len(), p, radius));
            }
            offset += sides[side];
        }
        row += 1;
    }
    out
}

fn perimeter_point(s: f64, w: f64, h: f64) -> Vec2 {
    let s = s.rem_euclid(2.0 * (w + h));
    if s < w {
        Vec2::new(s, 0.0)
    } else if s < w + h {
        Vec2::new(w, s - w)
    } else if s < 2.0 * w + h {
        Vec2::new(w - (s - w - h), h)
    } else {
        Vec2::new(0.0, h - (s - 2.0 * w - h))
    }
}

/// Dense hexagonal layers along the bottom wall.
pub fn wall_layers(arena: &Arena, n: usize, layers: usize, radius: f64) -> Vec<SubstrateElement> {
    let per_layer = n.div_ceil(layers.max(1));
    let pitch = (arena.width - 2.0 * radius) / per_layer as f64;
    let pitch = pitch.max(2.0 * radius);
    let dy = pitch * (3f64).sqrt() / 2.0;
    let mut out = Vec::with_capacity(n);
    for layer in 0..layers {
        let y = radius * 1.05 + layer as f64 * dy;
        let x0 = radius * 1.05 + if layer % 2 == 1 { 0.5 * pitch } else { 0.0 };
        for k in 0..per_layer {
            if out.len() == n {
                return out;
            }
            let x = x0 + k as f64 * pitch;
            if x > arena.width - radius {
                break;
            }
            out.push(SubstrateElement::free(out.len(), Vec2::new(x, y), radius));
        }
    }
    out
}

/// Top edge of the layered substrate, for seeding the field.
pub fn layers_top(elements: &[SubstrateElement]) -> f64 {
    elements
        .iter()
        .map(|e| e.pos.y + e.radius)
        .fold(0.0, f64::max)
}

/// Agents at uniform random positions inside `area` with random headings.
pub fn scatter_agents(area: &Rect, n: usize, rng: &mut RngStream) -> Vec<AgentState> {
    (0..n)
        .map(|id| {
            let x = rng.uniform(area.min.x, area.max.x);
            let y = rng.uniform(area.min.y, area.max.y);
            AgentState::new(id, Vec2::new(x, y), rng.uniform(-PI, PI))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::substrate::max_overlap_fraction;

    #[test]
    fn default_arena() {
        let a = Arena::default();
        assert!(a.validate().is_ok());
        assert!((a.construction.width() - 0.48).abs() < 1e-12);
        assert!((a.construction.center().x - 0.335).abs() < 1e-12);
        let bad = Arena::centered(0.3, 0.3, 0.4, 0.1);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ring_of_two_hundred() {
        let a = Arena::default();
        let els = boundary_ring(&a, 200, SubstrateElement::DEFAULT_RADIUS);
        assert_eq!(els.len(), 200);
        assert!(max_overlap_fraction(&els) < 1e-9);
        for e in &els {
            assert!(a.bounds().contains(e.pos));
            assert!(!a.construction.contains(e.pos));
        }
    }

    #[test]
    fn seven_layers() {
        let a = Arena::default();
        let els = wall_layers(&a, 200, 7, SubstrateElement::DEFAULT_RADIUS);
        assert_eq!(els.len(), 200);
        assert!(max_overlap_fraction(&els) < 1e-9);
        assert!(layers_top(&els) < 0.2);
    }
}
