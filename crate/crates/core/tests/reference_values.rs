//! Published parameter values and the numbers they imply, checked end to end
//! through the public API.

use stigmergy::agent::{Direction, KinematicParams};
use stigmergy::continuum::{load_preset, DimensionalInputs, Orientation, Preset, DEFAULT_ALPHA_C};
use stigmergy::controller::{turning_law, wheel_speeds, BehaviorParams, ThresholdMode};
use stigmergy::metrics::cluster_labels;
use stigmergy::photormone::{PhotormoneGrid, SourceFootprint};
use stigmergy::trap::{critical_gain, trapping_radius_geometric, Regime, TrapRegime};
use stigmergy::world::FieldParams;
use stigmergy::{Boundary, Vec2};

#[test]
fn hardware_field_saturates_at_five() {
    let f = FieldParams::default();
    assert_eq!((f.k_plus, f.k_minus), (0.1, 0.02));
    assert!((f.saturation() - 5.0).abs() < 1e-12);
    let mut g = PhotormoneGrid::new(40, 40, 0.0025, Boundary::Walls).unwrap();
    let src = [SourceFootprint::disk(Vec2::new(0.05, 0.05), 0.0125)];
    let at = |g: &PhotormoneGrid| g.sample_bilinear(Vec2::new(0.05, 0.05));
    for _ in 0..10_000 {
        g.step_field(&src, 0.05).unwrap();
    }
    // from an empty field the approach is 5(1 - e^{-k_- t}), still 2.3e-4
    // short after 500 s
    let exact = 5.0 * (1.0 - (-0.02f64 * 500.0).exp());
    assert!((at(&g) - exact).abs() < 1e-9, "{}", at(&g));
    for _ in 0..10_000 {
        g.step_field(&src, 0.05).unwrap();
    }
    assert!((at(&g) - 5.0).abs() < 1e-6, "{}", at(&g));
}

#[test]
fn footprint_radius_for_a_25mm_spot() {
    assert!((trapping_radius_geometric(2.5) - 0.875).abs() < 1e-12);
    // dimensional: l_s = 1 cm
    assert!((trapping_radius_geometric(0.025 / 0.01) * 0.01 - 0.00875).abs() < 1e-12);
}

#[test]
fn trapping_experiment_regime() {
    // k+ = k- = 1.5 /s, l_s = 1 cm, v_o = 4 cm/s
    let reg = TrapRegime::from_dimensional(0.03, 0.01, 0.04, 1.5, 1.5).unwrap();
    assert!((reg.l_w - 3.0).abs() < 1e-12);
    assert!((reg.l_minus - 0.04 / 1.5 / 0.01).abs() < 1e-12);
    assert_eq!(reg.k_hat, 1.0);
    let p = critical_gain(&reg).unwrap();
    assert_eq!(p.regime, Regime::SmallDecayLength);
    assert!((p.r_star - 1.0).abs() < 1e-12);
    assert!(p.g_c > 0.0 && p.g_c.is_finite());
}

#[test]
fn continuum_deposition_rates() {
    let expect = 2.5 * (0.005f64 / 1.5).sqrt() / 0.1;
    for (preset, sign) in [(Preset::Construction, 1.0), (Preset::Deconstruction, -1.0)] {
        let (_, p) = load_preset(preset, 0.1).unwrap();
        assert!((p.k - sign * expect).abs() < 1e-12);
        assert!((p.k.abs() - 1.443).abs() < 1e-3);
    }
    let reduced = DimensionalInputs::presets(2.5).reduce(DEFAULT_ALPHA_C, Orientation::Uniform(Vec2::new(0.0, 1.0)));
    assert!((reduced.c - 1.0).abs() < 1e-12);
    assert!((reduced.k_hat - 1.0).abs() < 1e-12);
}

#[test]
fn random_walk_only_without_cooperation() {
    let p = BehaviorParams { c: 0.0, ..BehaviorParams::default() };
    for (cl, cr) in [(0.0, 0.0), (5.0, 0.0), (0.3, 4.0)] {
        let om = turning_law(cl, cr, 0.5, &p, Direction::Forward);
        assert!((om - 0.3 / 0.01).abs() < 1e-12);
    }
}

#[test]
fn saturated_phototaxis() {
    let p = BehaviorParams { c: 1.0, ..BehaviorParams::default() };
    let om = turning_law(5.0, 0.0, 0.0, &p, Direction::Forward);
    assert!((om - 50f64.tanh() / 0.01).abs() < 1e-12);
    assert!((om - 100.0).abs() < 1e-9);
}

#[test]
fn wheel_speed_split() {
    let k = KinematicParams::default();
    let (l, r) = wheel_speeds(10.0, Direction::Forward, &k, 1e-2);
    assert!((l - 0.0385).abs() < 1e-15);
    assert!((r - 0.0415).abs() < 1e-15);
}

#[test]
fn literal_thresholds_fetch_and_release() {
    let p = BehaviorParams {
        c: 1.0,
        k: 1.0,
        c_bar: 0.5,
        delta_c: 0.1,
        mode: ThresholdMode::Literal,
        ..BehaviorParams::default()
    };
    assert!(p.wants_fetch(0.7));
    assert!(!p.wants_fetch(0.55));
    assert!(p.wants_release(0.3));
    assert!(!p.wants_release(0.45));
    let blind = BehaviorParams { c: 0.0, ..p };
    assert!(!blind.wants_fetch(10.0));
}

#[test]
fn cluster_linking_distance() {
    let d = 0.025;
    assert_eq!(cluster_labels(&[Vec2::ZERO, Vec2::new(0.02, 0.0)], d), vec![0, 0]);
    let chain = [Vec2::ZERO, Vec2::new(0.02, 0.0), Vec2::new(0.04, 0.0)];
    let l = cluster_labels(&chain, d);
    assert!(l[0] == l[1] && l[1] == l[2]);
    let apart = cluster_labels(&[Vec2::ZERO, Vec2::new(0.03, 0.0)], d);
    assert_ne!(apart[0], apart[1]);
}
