use stigmergy::metrics::cluster_elements;
use stigmergy_harness::construction::{ConstructionSetup, Layout};

fn largest_cluster(setup: &ConstructionSetup, seed: u64) -> usize {
    let r = setup.run(seed).unwrap();
    r.states
        .iter()
        .map(|s| {
            let rep = cluster_elements(&s.elements, setup.world.element_radius, setup.delta, &setup.area());
            rep.sizes.into_iter().max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

#[test]
fn ten_robots_build_a_cluster_within_ten_minutes() {
    let mut s = ConstructionSetup { n_agents: 10, early_stop: 0.0, ..ConstructionSetup::default() };
    s.world.behavior.k = 1.0;
    s.world.behavior.c = 1.0;
    s.world.sim.total_time = 600.0;
    let sizes: Vec<usize> = (1..=5).map(|seed| largest_cluster(&s, seed)).collect();
    let hits = sizes.iter().filter(|&&n| n >= 5).count();
    assert!(hits >= 4, "largest clusters per seed {sizes:?}");
}

#[test]
fn layered_runs_score_the_layer_band() {
    let s = ConstructionSetup::deconstruction();
    assert_eq!(s.layout, Layout::Layers(7));
    let w = s.build(1).unwrap();
    let area = s.area();
    assert_eq!(area.min.y, 0.0);
    assert!(w.substrate.iter().all(|e| area.contains(e.pos)));
    assert!(w.params.construction.is_none());
}
