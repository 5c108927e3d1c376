use proptest::prelude::*;
use stigmergy::rng::RngStream;
use stigmergy::world::layout::{boundary_ring, scatter_agents, Arena};
use stigmergy::world::substrate::max_overlap_fraction;
use stigmergy::world::{World, WorldParams};

fn small_world(seed: u64, c: f64, k: f64, n_agents: usize) -> World {
    let arena = Arena::default();
    let mut p = WorldParams::default();
    p.sim.seed = seed;
    p.behavior.c = c;
    p.behavior.k = k;
    // fast light so elements move within a short run
    p.field.k_plus = 0.5;
    p.field.k_minus = 0.1;
    p.behavior.c_bar = 0.5;
    p.behavior.delta_c = 0.1;
    let substrate = boundary_ring(&arena, 120, p.element_radius);
    let mut rng = RngStream::substream(seed, 0);
    let agents = scatter_agents(&arena.construction, n_agents, &mut rng);
    World::new(p, agents, substrate).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn substrate_conserved_and_agents_stay_inside(
        seed in 0u64..1000,
        c in 0.0f64..=1.0,
        k in prop_oneof![Just(1.0), Just(-1.0), Just(0.5)],
        n in 1usize..8,
    ) {
        let mut w = small_world(seed, c, k, n);
        let total = w.substrate.len();
        let (width, height) = (w.params.sim.width, w.params.sim.height);
        for _ in 0..1200 {
            w.step().unwrap();
            prop_assert_eq!(w.free_count() + w.carried_count(), total);
            for a in &w.agents {
                prop_assert!(a.r.x >= 0.0 && a.r.x <= width && a.r.y >= 0.0 && a.r.y <= height);
            }
        }
        prop_assert!(max_overlap_fraction(&w.substrate) <= 0.1 + 1e-9);
        prop_assert!(w.field.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn same_seed_same_history(seed in 0u64..1000, c in 0.0f64..=1.0) {
        let mut a = small_world(seed, c, 1.0, 4);
        let mut b = small_world(seed, c, 1.0, 4);
        for _ in 0..400 {
            a.step().unwrap();
            b.step().unwrap();
            prop_assert_eq!(a.state_hash(), b.state_hash());
        }
    }
}

#[test]
fn different_seeds_diverge() {
    let mut a = small_world(1, 0.5, 1.0, 4);
    let mut b = small_world(2, 0.5, 1.0, 4);
    for _ in 0..100 {
        a.step().unwrap();
        b.step().unwrap();
    }
    assert_ne!(a.state_hash(), b.state_hash());
}
