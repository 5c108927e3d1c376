use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementState {
    Free,
    /// Held by `agent` at `offset`, expressed in the carrier's body frame
    /// (x along the heading).
    Carried { agent: usize, offset: Vec2 },
}

/// One cylindrical building block seen from above.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateElement {
    pub id: usize,
    pub pos: Vec2,
    pub radius: f64,
    pub state: ElementState,
}

impl SubstrateElement {
    pub const DEFAULT_RADIUS: f64 = 0.011;

    pub fn free(id: usize, pos: Vec2, radius: f64) -> Self {
        SubstrateElement {
            id,
            pos,
            radius,
            state: ElementState::Free,
        }
    }

    pub fn is_free(&self) -> bool {
        self.state == ElementState::Free
    }

    pub fn carrier(&self) -> Option<usize> {
        match self.state {
            ElementState::Carried { agent, .. } => Some(agent),
            ElementState::Free => None,
        }
    }
}

/// Push `elements[idx]` out of any free element it overlaps by more than
/// `tolerance · radius`, moving it radially to contact distance. A few
/// sweeps settle chains of contacts.
pub fn nudge_out(elements: &mut [SubstrateElement], idx: usize, tolerance: f64) {
    for _ in 0..16 {
        let mut moved = false;
        for j in 0..elements.len() {
            if j == idx || !elements[j].is_free() {
                continue;
            }
            let contact = elements[idx].radius + elements[j].radius;
            let d = elements[idx].pos - elements[j].pos;
            let dist = d.norm();
            if contact - dist > tolerance * elements[idx].radius {
                let dir = if dist > 1e-12 {
                    d / dist
                } else {
                    // exact coincidence: push along an id-dependent angle
                    Vec2::from_angle(idx as f64 * 2.399_963)
                };
                elements[idx].pos = elements[j].pos + dir * contact;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Worst overlap among free elements, as a fraction of the smaller radius.
pub fn max_overlap_fraction(elements: &[SubstrateElement]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in elements.iter().enumerate() {
        if !a.is_free() {
            continue;
        }
        for b in &elements[i + 1..] {
            if !b.is_free() {
                continue;
            }
            let overlap = a.radius + b.radius - a.pos.distance(b.pos);
            worst = worst.max(overlap / a.radius.min(b.radius));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nudge_resolves_overlap() {
        let r = SubstrateElement::DEFAULT_RADIUS;
        let mut els = vec![
            SubstrateElement::free(0, Vec2::new(0.1, 0.1), r),
            SubstrateElement::free(1, Vec2::new(0.105, 0.1), r),
        ];
        nudge_out(&mut els, 1, 0.1);
        assert!((els[1].pos.distance(els[0].pos) - 2.0 * r).abs() < 1e-12);
        assert!(els[1].pos.x > 0.1);
        assert!(max_overlap_fraction(&els) <= 1e-9);
    }

    #[test]
    fn small_overlap_left_alone() {
        let r = 0.01;
        let mut els = vec![
            SubstrateElement::free(0, Vec2::ZERO, r),
            SubstrateElement::free(1, Vec2::new(0.0195, 0.0), r),
        ];
        nudge_out(&mut els, 1, 0.1);
        assert_eq!(els[1].pos, Vec2::new(0.0195, 0.0));
    }
}
