//! The scenario modes: their parameter sets and what a run of each writes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use anyhow::{bail, Result};
use stigmergy::agent::{simulate_constant_gradient, write_trajectory_csv, AgentState, ConstantGradient, KinematicParams};
use stigmergy::continuum::{load_preset, run_continuum, FieldId, Preset};
use stigmergy::controller::ThresholdMode;
use stigmergy::geom::Vec2;
use stigmergy::metrics::MetricsRow;
use stigmergy::photormone::Profile;
use stigmergy::trap::{critical_gain, fit_circle, Regime, TrapRegime};
use stigmergy::world::layout::Arena;
use stigmergy::Error;

use crate::config::{Mode, Params, Scenario};
use crate::construction::{ConstructionRun, ConstructionSetup, Layout, TRACE_HEADER};
use crate::output::{points_csv, RunDir, Summary};
use crate::trapsim::{bisect_critical_gain, CoarseningSetup, TrapSetup};

pub fn defaults(mode: Mode) -> Params {
    let mut p = Params::new();
    match mode {
        Mode::ConstantGradient => {
            let k = KinematicParams::default();
            p.insert("kin.v_o", k.v_o);
            p.insert("kin.g", k.g);
            p.insert("gradient.lambda_ref", 40.0);
            p.insert("gradient.lambda_factors", vec![0.25, 0.5, 1.0, 2.0, 4.0]);
            p.insert("gradient.steps_per_orbit", 400_i64);
            p.insert("gradient.orbits", 20_i64);
            p.insert("gradient.offset", 0.01);
            p.insert("gradient.trace_stride", 10_i64);
        }
        Mode::SingleTrap => {
            put_trap(&mut p, &TrapSetup::default());
            p.insert("trap.bisect", false);
            p.insert("trap.gain_lo", 0.5);
            p.insert("trap.gain_hi", 8.0);
            p.insert("trap.rel_tol", 0.02);
        }
        Mode::MultiTrapPhase => {
            put_trap(&mut p, &TrapSetup::default());
            p.insert("phase.l_w", vec![3.0]);
            p.insert("phase.gain", vec![1.0, 2.0, 3.0]);
            p.insert("phase.n", vec![1_i64, 2]);
            p.insert("phase.trials", 1_i64);
            let c = CoarseningSetup::default();
            p.insert("coarsening.enabled", true);
            p.insert("coarsening.g", vec![c.g, 0.004]);
            p.insert("coarsening.n", c.n as i64);
            p.insert("coarsening.box", c.box_size);
            p.insert("coarsening.w", c.w);
            p.insert("coarsening.v_o", c.v_o);
            p.insert("coarsening.l_s", c.l_s);
            p.insert("coarsening.k_plus", c.k_plus);
            p.insert("coarsening.k_minus", c.k_minus);
            p.insert("coarsening.h", c.h);
            p.insert("coarsening.dt", c.dt);
            p.insert("coarsening.t_end", c.t_end);
            p.insert("coarsening.sample_every", c.sample_every);
        }
        Mode::Construction => put_construction(&mut p, &ConstructionSetup::default()),
        Mode::Deconstruction => put_construction(&mut p, &ConstructionSetup::deconstruction()),
        Mode::Robustness2x2 => {
            put_construction(&mut p, &ConstructionSetup::default());
            p.insert("robustness.c_bar_off", 1e-3);
            p.insert("robustness.delta_c_off", 0.0);
        }
        Mode::Continuum => {
            let (_, c) = load_preset(Preset::Construction, 0.1).expect("preset loads at its default mesh");
            p.insert("continuum.preset", "construction");
            p.insert("continuum.h", 0.1);
            p.insert("continuum.t_end", 2.0);
            p.insert("continuum.snapshot_every", 0.5);
            p.insert("continuum.C", c.c);
            p.insert("continuum.K_scale", 1.0);
            p.insert("continuum.V", c.v);
            p.insert("continuum.k_hat", c.k_hat);
            p.insert("continuum.D_c", c.d_c);
            p.insert("continuum.alpha_c", c.alpha_c);
            p.insert("continuum.c_star", c.c_star);
            p.insert("continuum.rho_a_star", c.rho_a_star);
        }
    }
    p
}

fn profile_name(p: Profile) -> &'static str {
    match p {
        Profile::Disk => "disk",
        Profile::Gaussian => "gaussian",
    }
}

fn parse_profile(p: &Params, key: &str) -> Result<Profile> {
    match p.str(key)? {
        "disk" => Ok(Profile::Disk),
        "gaussian" => Ok(Profile::Gaussian),
        other => Err(Error::config(key, format!("expected disk or gaussian, got `{other}`")).into()),
    }
}

fn mode_name(m: ThresholdMode) -> &'static str {
    match m {
        ThresholdMode::Literal => "literal",
        ThresholdMode::CIndependent => "c_independent",
        ThresholdMode::Recruitment => "recruitment",
    }
}

fn parse_threshold_mode(p: &Params, key: &str) -> Result<ThresholdMode> {
    match p.str(key)? {
        "literal" => Ok(ThresholdMode::Literal),
        "c_independent" => Ok(ThresholdMode::CIndependent),
        "recruitment" => Ok(ThresholdMode::Recruitment),
        other => Err(Error::config(key, format!("expected literal, c_independent or recruitment, got `{other}`")).into()),
    }
}

fn put_trap(p: &mut Params, t: &TrapSetup) {
    p.insert("trap.l_w", t.l_w);
    p.insert("trap.gain", t.gain);
    p.insert("trap.n", t.n as i64);
    p.insert("trap.v_o", t.v_o);
    p.insert("trap.l_s", t.l_s);
    p.insert("trap.k_plus", t.k_plus);
    p.insert("trap.k_minus", t.k_minus);
    p.insert("trap.h", t.h);
    p.insert("trap.dt", t.dt);
    p.insert("trap.box", t.box_size);
    p.insert("trap.warmup_radius", t.warmup_radius);
    p.insert("trap.warmup", t.warmup);
    p.insert("trap.settle", t.settle);
    p.insert("trap.window", t.window);
    p.insert("trap.jitter", t.jitter);
    p.insert("trap.profile", profile_name(t.profile));
}

pub fn trap_setup(p: &Params, seed: u64) -> Result<TrapSetup> {
    Ok(TrapSetup {
        l_w: p.f64("trap.l_w")?,
        gain: p.f64("trap.gain")?,
        n: p.usize("trap.n")?,
        v_o: p.f64("trap.v_o")?,
        l_s: p.f64("trap.l_s")?,
        k_plus: p.f64("trap.k_plus")?,
        k_minus: p.f64("trap.k_minus")?,
        h: p.f64("trap.h")?,
        dt: p.f64("trap.dt")?,
        box_size: p.f64("trap.box")?,
        warmup_radius: p.f64("trap.warmup_radius")?,
        warmup: p.f64("trap.warmup")?,
        settle: p.f64("trap.settle")?,
        window: p.f64("trap.window")?,
        jitter: p.f64("trap.jitter")?,
        profile: parse_profile(p, "trap.profile")?,
        seed,
    })
}

/// The analytic prediction for a trap setup.
pub fn trap_regime(t: &TrapSetup) -> Result<TrapRegime> {
    Ok(TrapRegime::from_dimensional(t.l_w * t.l_s, t.l_s, t.v_o, t.k_plus, t.k_minus)?)
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::SmallDecayLength => "small_decay",
        Regime::Intermediate => "intermediate",
        Regime::LargeDecayLength => "large_decay",
    }
}

fn put_construction(p: &mut Params, s: &ConstructionSetup) {
    let w = &s.world;
    p.insert("sim.dt", w.sim.dt);
    p.insert("sim.total_time", w.sim.total_time);
    p.insert("kin.v_o", w.kin.v_o);
    p.insert("kin.l_s", w.kin.l_s);
    p.insert("kin.l_w", w.kin.l_w);
    let b = &w.behavior;
    p.insert("behavior.C", b.c);
    p.insert("behavior.K", b.k);
    p.insert("behavior.c_bar", b.c_bar);
    p.insert("behavior.delta_c", b.delta_c);
    p.insert("behavior.c_max", b.c_max);
    p.insert("behavior.alpha", b.alpha);
    p.insert("behavior.b", b.b);
    p.insert("behavior.mode", mode_name(b.mode));
    let f = &w.field;
    p.insert("field.k_plus", f.k_plus);
    p.insert("field.k_minus", f.k_minus);
    p.insert("field.d_c", f.d_c);
    p.insert("field.w", f.w);
    p.insert("field.profile", profile_name(f.profile));
    p.insert("field.h", f.h);
    p.insert("world.turn_gain", w.turn_gain);
    p.insert("world.body_radius", w.body_radius);
    p.insert("world.ir_range", w.ir_range);
    p.insert("world.ir_half_angle", w.ir_half_angle.to_degrees());
    p.insert("world.element_radius", w.element_radius);
    p.insert("world.agent_collisions", w.agent_collisions);
    let a = &s.arena;
    p.insert("arena.width", a.width);
    p.insert("arena.height", a.height);
    p.insert("arena.construction_width", a.construction.width());
    p.insert("arena.construction_height", a.construction.height());
    p.insert("run.n_agents", s.n_agents as i64);
    p.insert("run.n_elements", s.n_elements as i64);
    p.insert(
        "run.layers",
        match s.layout {
            Layout::Ring => 0_i64,
            Layout::Layers(k) => k as i64,
        },
    );
    p.insert("run.seed_diameter", s.seed_diameter);
    p.insert("run.early_stop", s.early_stop);
    p.insert("run.snapshot_every", s.snapshot_every);
    p.insert("run.trace_every", s.trace_every);
    p.insert("run.delta", s.delta);
}

pub fn construction_setup(p: &Params) -> Result<ConstructionSetup> {
    let mut s = ConstructionSetup::default();
    let w = &mut s.world;
    w.sim.dt = p.f64("sim.dt")?;
    w.sim.total_time = p.f64("sim.total_time")?;
    w.kin.v_o = p.f64("kin.v_o")?;
    w.kin.l_s = p.f64("kin.l_s")?;
    w.kin.l_w = p.f64("kin.l_w")?;
    let b = &mut w.behavior;
    b.c = p.f64("behavior.C")?;
    b.k = p.f64("behavior.K")?;
    b.c_bar = p.f64("behavior.c_bar")?;
    b.delta_c = p.f64("behavior.delta_c")?;
    b.c_max = p.f64("behavior.c_max")?;
    b.alpha = p.f64("behavior.alpha")?;
    b.b = p.f64("behavior.b")?;
    b.mode = parse_threshold_mode(p, "behavior.mode")?;
    // the controller senses with the same sensor pair the body carries
    b.l_s = w.kin.l_s;
    let f = &mut w.field;
    f.k_plus = p.f64("field.k_plus")?;
    f.k_minus = p.f64("field.k_minus")?;
    f.d_c = p.f64("field.d_c")?;
    f.w = p.f64("field.w")?;
    f.profile = parse_profile(p, "field.profile")?;
    f.h = p.f64("field.h")?;
    w.turn_gain = p.f64("world.turn_gain")?;
    w.body_radius = p.f64("world.body_radius")?;
    w.ir_range = p.f64("world.ir_range")?;
    w.ir_half_angle = p.f64("world.ir_half_angle")?.to_radians();
    w.element_radius = p.f64("world.element_radius")?;
    w.agent_collisions = p.bool("world.agent_collisions")?;
    s.arena = Arena::centered(
        p.f64("arena.width")?,
        p.f64("arena.height")?,
        p.f64("arena.construction_width")?,
        p.f64("arena.construction_height")?,
    );
    s.arena.validate()?;
    s.world.sim.width = s.arena.width;
    s.world.sim.height = s.arena.height;
    s.world.construction = Some(s.arena.construction);
    s.n_agents = p.usize("run.n_agents")?;
    s.n_elements = p.usize("run.n_elements")?;
    s.layout = match p.usize("run.layers")? {
        0 => Layout::Ring,
        k => Layout::Layers(k),
    };
    s.seed_diameter = p.f64("run.seed_diameter")?;
    s.early_stop = p.f64("run.early_stop")?;
    s.snapshot_every = p.f64("run.snapshot_every")?;
    s.trace_every = p.f64("run.trace_every")?;
    s.delta = p.f64("run.delta")?;
    s.world.validate()?;
    Ok(s)
}

/// Run one scenario for one seed into `target`, which is replaced
/// atomically.
pub fn run(sc: &Scenario, seed: u64, target: &Path) -> Result<Summary> {
    let dir = RunDir::create(target)?;
    dir.write("config.toml", sc.echo(seed))?;
    let mut summary = match sc.mode {
        Mode::ConstantGradient => run_constant_gradient(&sc.params, &dir)?,
        Mode::SingleTrap => run_single_trap(&sc.params, seed, &dir)?,
        Mode::MultiTrapPhase => run_phase(&sc.params, seed, &dir)?,
        Mode::Construction | Mode::Deconstruction => {
            let setup = construction_setup(&sc.params)?;
            let result = setup.run(seed)?;
            write_construction(&dir, "", &setup, &result)?;
            construction_summary(&result)
        }
        Mode::Robustness2x2 => run_robustness(&sc.params, seed, &dir)?,
        Mode::Continuum => run_continuum_mode(&sc.params, &dir)?,
    };
    summary.label("name", &sc.name).label("mode", sc.mode).num("seed", seed as f64);
    dir.write("summary.txt", summary.render())?;
    dir.commit()?;
    Ok(summary)
}

/// Orbit radii in a cone-shaped field over a range of slopes.
pub struct GradientResult {
    pub lambda: Vec<f64>,
    pub r_pred: Vec<f64>,
    pub r_fit: Vec<f64>,
    pub r_times_gain: Vec<f64>,
    pub slope: f64,
    pub finals: Vec<Vec2>,
    pub traces: Vec<Vec<stigmergy::agent::TrajectoryPoint>>,
}

pub fn constant_gradient(p: &Params) -> Result<GradientResult> {
    let k = KinematicParams {
        v_o: p.f64("kin.v_o")?,
        g: p.f64("kin.g")?,
        ..KinematicParams::default()
    };
    k.validate()?;
    let lambda_ref = p.f64("gradient.lambda_ref")?;
    let factors = p.f64_list("gradient.lambda_factors")?;
    if factors.is_empty() || factors.iter().any(|&f| !(f > 0.0)) {
        bail!(Error::config("gradient.lambda_factors", "need positive factors"));
    }
    let per_orbit = p.usize("gradient.steps_per_orbit")?;
    let orbits = p.usize("gradient.orbits")?;
    let offset = p.f64("gradient.offset")?;
    if per_orbit < 8 || orbits < 2 {
        bail!(Error::config("gradient.steps_per_orbit", "need at least 8 steps per orbit and 2 orbits"));
    }
    let mut out = GradientResult {
        lambda: Vec::new(),
        r_pred: Vec::new(),
        r_fit: Vec::new(),
        r_times_gain: Vec::new(),
        slope: f64::NAN,
        finals: Vec::new(),
        traces: Vec::new(),
    };
    for (i, f) in factors.iter().enumerate() {
        let field = ConstantGradient { lambda: f * lambda_ref, center: Vec2::ZERO };
        let r_pred = field.orbit_radius(&k);
        // tangent to the circle, counter-clockwise, slightly outside
        let start = AgentState::new(i, Vec2::new(r_pred * (1.0 + offset), 0.0), FRAC_PI_2);
        let dt = 2.0 * PI * r_pred / k.v_o / per_orbit as f64;
        let traj = simulate_constant_gradient(start, &field, &k, dt, per_orbit * orbits);
        let tail: Vec<Vec2> = traj[traj.len() / 2..].iter().map(|q| q.r).collect();
        let (_, r_fit) = fit_circle(&tail).ok_or_else(|| Error::Indeterminate("degenerate orbit".into()))?;
        out.lambda.push(field.lambda);
        out.r_pred.push(r_pred);
        out.r_fit.push(r_fit);
        out.r_times_gain.push(r_fit * k.g * field.lambda / k.v_o);
        out.finals.push(traj.last().map_or(Vec2::ZERO, |q| q.r));
        out.traces.push(traj);
    }
    out.slope = loglog_slope(&out.lambda, &out.r_fit);
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn run_constant_gradient(p: &Params, dir: &RunDir) -> Result<Summary> {
    let r = constant_gradient(p)?;
    let mut csv = String::from("lambda,r_pred,r_fit,r_times_gain\n");
    for i in 0..r.lambda.len() {
        csv.push_str(&format!("{},{},{},{}\n", r.lambda[i], r.r_pred[i], r.r_fit[i], r.r_times_gain[i]));
    }
    dir.write("radius.csv", csv)?;
    let every = p.usize("gradient.trace_stride")?.max(1);
    let mut w = dir.writer("trace.csv")?;
    let sampled: Vec<_> = r.traces.iter().flat_map(|t| t.iter().step_by(every).copied()).collect();
    write_trajectory_csv(&mut w, &sampled)?;
    let mut s = Summary::new();
    s.num("slope", r.slope);
    let worst = r.r_times_gain.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    s.num("max_abs_r_times_gain_minus_1", worst);
    for (i, q) in r.finals.iter().enumerate() {
        s.num(format!("final_x_{i}"), q.x).num(format!("final_y_{i}"), q.y);
    }
    Ok(s)
}

fn run_single_trap(p: &Params, seed: u64, dir: &RunDir) -> Result<Summary> {
    let setup = trap_setup(p, seed)?;
    let pred = critical_gain(&trap_regime(&setup)?)?;
    let (outcome, traj, world) = setup.run_traced()?;
    let mut s = Summary::new();
    s.num("trapped", f64::from(u8::from(outcome.trapped)))
        .num("radius", outcome.radius)
        .num("r_pred", pred.r_star)
        .num("g_c_pred", pred.g_c / setup.n as f64)
        .label("regime", regime_name(pred.regime));
    if p.bool("trap.bisect")? {
        let g = bisect_critical_gain(&setup, p.f64("trap.gain_lo")?, p.f64("trap.gain_hi")?, p.f64("trap.rel_tol")?)?;
        s.num("g_c_sim", g.unwrap_or(f64::NAN));
    }
    dir.write(
        "trap.csv",
        format!(
            "l_w,gain,n,trapped,radius,r_pred,g_c_pred,regime\n{},{},{},{},{},{},{},{}\n",
            setup.l_w,
            setup.gain,
            setup.n,
            u8::from(outcome.trapped),
            outcome.radius,
            pred.r_star,
            pred.g_c / setup.n as f64,
            regime_name(pred.regime)
        ),
    )?;
    let mut csv = String::from("t,x,y\n");
    for (i, q) in traj.iter().enumerate() {
        csv.push_str(&format!("{},{},{}\n", (i + 1) as f64 * setup.dt, q.x, q.y));
    }
    dir.write("trace.csv", csv)?;
    dir.write_snapshot("snapshots/field_final.bin", &world.field.snapshot())?;
    Ok(s)
}

fn run_phase(p: &Params, seed: u64, dir: &RunDir) -> Result<Summary> {
    let base = trap_setup(p, seed)?;
    let trials = p.u64("phase.trials")?.max(1);
    let mut csv = String::from("l_w,gain,n,trapped_fraction,radius_mean,g_c_pred\n");
    let mut s = Summary::new();
    let mut trapped_cells = 0.0;
    for &l_w in &p.f64_list("phase.l_w")? {
        for &n in &p.usize_list("phase.n")? {
            for &gain in &p.f64_list("phase.gain")? {
                let setup = TrapSetup { l_w, n, gain, ..base.clone() };
                let pred = critical_gain(&trap_regime(&setup)?)?;
                let (mut hits, mut radius) = (0u64, 0.0);
                for k in 0..trials {
                    let o = TrapSetup { seed: seed * trials + k, ..setup.clone() }.run()?;
                    if o.trapped {
                        hits += 1;
                        radius += o.radius;
                    }
                }
                let frac = hits as f64 / trials as f64;
                trapped_cells += frac;
                let r_mean = if hits > 0 { radius / hits as f64 } else { f64::NAN };
                csv.push_str(&format!("{l_w},{gain},{n},{frac},{r_mean},{}\n", pred.g_c / n as f64));
            }
        }
    }
    dir.write("phase.csv", csv)?;
    s.num("trapped_cells", trapped_cells);
    if p.bool("coarsening.enabled")? {
        let mut csv = String::from("g,t,mean_distance\n");
        for &g in &p.f64_list("coarsening.g")? {
            let c = coarsening_setup(p, g, seed)?;
            let series = c.run()?;
            for (t, d) in &series {
                csv.push_str(&format!("{g},{t},{d}\n"));
            }
            s.num(format!("coarsening_initial_{g}"), series.first().map_or(f64::NAN, |x| x.1));
            s.num(format!("coarsening_final_{g}"), series.last().map_or(f64::NAN, |x| x.1));
        }
        dir.write("coarsening.csv", csv)?;
    }
    Ok(s)
}

pub fn coarsening_setup(p: &Params, g: f64, seed: u64) -> Result<CoarseningSetup> {
    Ok(CoarseningSetup {
        n: p.usize("coarsening.n")?,
        box_size: p.f64("coarsening.box")?,
        g,
        w: p.f64("coarsening.w")?,
        v_o: p.f64("coarsening.v_o")?,
        l_s: p.f64("coarsening.l_s")?,
        k_plus: p.f64("coarsening.k_plus")?,
        k_minus: p.f64("coarsening.k_minus")?,
        h: p.f64("coarsening.h")?,
        dt: p.f64("coarsening.dt")?,
        t_end: p.f64("coarsening.t_end")?,
        sample_every: p.f64("coarsening.sample_every")?,
        seed,
        ..CoarseningSetup::default()
    })
}

/// Files of one construction-type run, under `prefix`.
pub fn write_construction(dir: &RunDir, prefix: &str, setup: &ConstructionSetup, r: &ConstructionRun) -> Result<()> {
    let mut csv = format!("{}\n", MetricsRow::HEADER);
    for row in &r.rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    dir.write(&format!("{prefix}metrics.csv"), csv)?;
    if setup.trace_every > 0.0 {
        let mut w = dir.writer(&format!("{prefix}trace.csv"))?;
        use std::io::Write;
        writeln!(w, "{TRACE_HEADER}")?;
        for row in &r.trace {
            writeln!(w, "{}", row.to_csv())?;
        }
        w.flush()?;
    }
    for (k, (snap, state)) in r.snapshots.iter().zip(&r.states).enumerate() {
        dir.write_snapshot(&format!("{prefix}snapshots/field_{k:04}.bin"), snap)?;
        dir.write(&format!("{prefix}snapshots/state_{k:04}.csv"), state.to_csv())?;
    }
    dir.write(&format!("{prefix}elements_start.csv"), points_csv(&r.elements_start))?;
    dir.write(&format!("{prefix}elements_final.csv"), points_csv(&r.elements_end))?;
    Ok(())
}

pub fn construction_summary(r: &ConstructionRun) -> Summary {
    let m = r.last();
    let mut s = Summary::new();
    s.num("n_c", m.n_c as f64)
        .num("covered_fraction", m.covered_fraction)
        .num("mean_relative_area", m.mean_relative_area)
        .num("largest_relative_area", m.largest_relative_area)
        .num("circumference", m.circumference)
        .num("kappa_normalized", mean_kappa(&r.rows))
        .num("mean_distance", m.mean_distance)
        .num("in_area_start", r.in_area_start as f64)
        .num("in_area_end", r.in_area_end as f64)
        .num("net_influx", r.net_influx() as f64)
        .num("t_end", r.t_end)
        .num("stopped_early", f64::from(u8::from(r.stopped_early)))
        .label("state_hash", format!("{:016x}", r.final_hash));
    s
}

/// Curvature averaged over all snapshots after the first.
pub fn mean_kappa(rows: &[MetricsRow]) -> f64 {
    let k: Vec<f64> = rows.iter().skip(1).map(|r| r.kappa_normalized).filter(|v| v.is_finite()).collect();
    if k.is_empty() {
        f64::NAN
    } else {
        k.iter().sum::<f64>() / k.len() as f64
    }
}

/// The four threshold/phototaxis combinations: `(label, threshold on, C)`.
pub const ROBUSTNESS_CASES: [(&str, bool, f64); 4] = [("A", false, 0.0), ("B", false, 1.0), ("C", true, 1.0), ("D", true, 0.0)];

pub fn robustness_setup(p: &Params, threshold: bool, c: f64) -> Result<ConstructionSetup> {
    let mut s = construction_setup(p)?;
    s.world.behavior.c = c;
    if !threshold {
        s.world.behavior.c_bar = p.f64("robustness.c_bar_off")?;
        s.world.behavior.delta_c = p.f64("robustness.delta_c_off")?;
    }
    s.world.validate()?;
    Ok(s)
}

fn run_robustness(p: &Params, seed: u64, dir: &RunDir) -> Result<Summary> {
    let mut csv = String::from("case,threshold,C,n_c,covered_fraction,largest_relative_area,circumference\n");
    let mut s = Summary::new();
    for (label, threshold, c) in ROBUSTNESS_CASES {
        let setup = robustness_setup(p, threshold, c)?;
        let r = setup.run(seed)?;
        write_construction(dir, &format!("case_{label}/"), &setup, &r)?;
        let m = r.last();
        csv.push_str(&format!(
            "{label},{},{c},{},{},{},{}\n",
            u8::from(threshold),
            m.n_c,
            m.covered_fraction,
            m.largest_relative_area,
            m.circumference
        ));
        s.num(format!("{label}_covered_fraction"), m.covered_fraction)
            .num(format!("{label}_circumference"), m.circumference)
            .num(format!("{label}_n_c"), m.n_c as f64);
    }
    dir.write("cases.csv", csv)?;
    Ok(s)
}

/// Continuum parameters and initial fields from the flat parameter set.
pub fn continuum_setup(p: &Params) -> Result<(stigmergy::continuum::ContinuumFields, stigmergy::continuum::ContinuumParams)> {
    let preset: Preset = p.parse("continuum.preset")?;
    let (f, mut c) = load_preset(preset, p.f64("continuum.h")?)?;
    c.c = p.f64("continuum.C")?;
    c.k *= p.f64("continuum.K_scale")?;
    c.v = p.f64("continuum.V")?;
    c.k_hat = p.f64("continuum.k_hat")?;
    c.d_c = p.f64("continuum.D_c")?;
    c.alpha_c = p.f64("continuum.alpha_c")?;
    c.c_star = p.f64("continuum.c_star")?;
    c.rho_a_star = p.f64("continuum.rho_a_star")?;
    Ok((f, c))
}

fn run_continuum_mode(p: &Params, dir: &RunDir) -> Result<Summary> {
    let (mut f, c) = continuum_setup(p)?;
    let t_end = p.f64("continuum.t_end")?;
    let every = p.f64("continuum.snapshot_every")?;
    let cell = f.h * f.h;
    let rate = |f: &stigmergy::continuum::ContinuumFields| f.substrate_rate(&c).iter().sum::<f64>() * cell;
    let m0 = f.mass_report();
    let mut csv = String::from("t,rho_a,c,rho_s,rho_s_rate\n");
    let mut snaps = vec![snapshot_triplet(&f)];
    let mut rates = vec![rate(&f)];
    csv.push_str(&format!("{},{},{},{},{}\n", f.t, m0.rho_a, m0.c, m0.rho_s, rates[0]));
    let mut next = every;
    let mut drift: f64 = 0.0;
    let mut fault = None;
    run_continuum(&mut f, &c, t_end, |f| {
        let m = f.mass_report();
        drift = drift.max(((m.rho_a - m0.rho_a) / m0.rho_a).abs());
        let r = rate(f);
        rates.push(r);
        if every > 0.0 && f.t >= next - 1e-12 {
            csv.push_str(&format!("{},{},{},{},{}\n", f.t, m.rho_a, m.c, m.rho_s, r));
            snaps.push(snapshot_triplet(f));
            next += every;
        }
        if !r.is_finite() && fault.is_none() {
            fault = Some(f.t);
        }
    })?;
    if let Some(t) = fault {
        bail!(Error::Numerical(format!("substrate rate not finite at t = {t}")));
    }
    dir.write("mass.csv", csv)?;
    for (k, trip) in snaps.iter().enumerate() {
        for (name, snap) in ["rho_a", "c", "rho_s"].iter().zip(trip) {
            dir.write_snapshot(&format!("snapshots/{name}_{k:04}.bin"), snap)?;
        }
    }
    let m = f.mass_report();
    let mut s = Summary::new();
    s.num("t_end", f.t)
        .num("rho_a_relative_drift", drift)
        .num("rho_s_initial", m0.rho_s)
        .num("rho_s_final", m.rho_s)
        .num("rho_s_rate_min", rates.iter().copied().fold(f64::INFINITY, f64::min))
        .num("rho_s_rate_max", rates.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .num("K", c.k)
        .num("C", c.c);
    Ok(s)
}

fn snapshot_triplet(f: &stigmergy::continuum::ContinuumFields) -> [stigmergy::photormone::GridSnapshot; 3] {
    [f.snapshot(FieldId::RhoA), f.snapshot(FieldId::C), f.snapshot(FieldId::RhoS)]
}

/// Metrics recomputed from the state snapshots of a finished construction
/// run directory; `prefix` selects a robustness case (`case_C/`).
pub fn recompute_metrics(run_dir: &Path, prefix: &str) -> Result<Vec<MetricsRow>> {
    let sc = Scenario::from_file(&run_dir.join("config.toml"))?;
    if !matches!(sc.mode, Mode::Construction | Mode::Deconstruction | Mode::Robustness2x2) {
        bail!("mode {} has no element snapshots", sc.mode);
    }
    let setup = construction_setup(&sc.params)?;
    let snap_dir = run_dir.join(prefix).join("snapshots");
    let mut files: Vec<_> = std::fs::read_dir(&snap_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("state_")))
        .collect();
    files.sort();
    let mut rows = Vec::with_capacity(files.len());
    for f in files {
        let text = std::fs::read_to_string(&f)?;
        let state = crate::construction::StateSnapshot::from_csv(&text)
            .ok_or_else(|| Error::Snapshot(format!("cannot parse {}", f.display())))?;
        rows.push(setup.measure(&state));
    }
    Ok(rows)
}
