use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use stigmergy::metrics::MetricsRow;
use stigmergy::trap::critical_gain;
use stigmergy_harness::config::{parse_assignment, Mode, Scenario};
use stigmergy_harness::scenarios::{self, regime_name, trap_regime, trap_setup};
use stigmergy_harness::sweep::run_sweep;

#[derive(Parser)]
#[command(name = "stigmergy", version, about = "Agent and continuum simulations of stigmergic construction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Parameter override, repeatable: `--set behavior.C=0.5`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output root
    #[arg(long, default_value = "runs")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario for one or more seeds
    Run {
        #[command(flatten)]
        common: Common,
        /// Base seed
        #[arg(long)]
        seed: Option<u64>,
        /// Number of consecutive seeds from the base seed
        #[arg(long)]
        replicas: Option<usize>,
    },
    /// Run every cell of a scenario's sweep grid
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<usize>,
    },
    /// Print the trapping regime, radius and critical gain
    PredictTrap {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Integrate the continuum model
    Continuum {
        #[command(flatten)]
        common: Common,
        /// construction or deconstruction
        #[arg(long)]
        preset: Option<String>,
    },
    /// Recompute metrics from the snapshots of a finished run
    Metrics {
        run_dir: PathBuf,
        /// Robustness case subdirectory, e.g. `case_C`
        #[arg(long, default_value = "")]
        case: String,
    },
}

fn load(scenario: &Option<PathBuf>, default: Mode, sets: &[String]) -> Result<Scenario> {
    let mut sc = match scenario {
        Some(p) => Scenario::from_file(p)?,
        None => Scenario::defaults(default),
    };
    for s in sets {
        let (k, v) = parse_assignment(s)?;
        sc.set(&k, v)?;
    }
    Ok(sc)
}

fn seeds(sc: &mut Scenario, seed: Option<u64>, replicas: Option<usize>) {
    if let Some(s) = seed {
        sc.seeds = vec![s];
    }
    if let Some(n) = replicas {
        sc.set_replicas(n);
    }
}

fn run_all(sc: &Scenario, out: &Path) -> Result<()> {
    for &seed in &sc.seeds {
        let target = out.join(&sc.name).join(format!("seed_{seed}"));
        let summary = scenarios::run(sc, seed, &target)?;
        println!("{}", target.display());
        print!("{}", summary.render());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { common, seed, replicas } => {
            let Some(_) = common.scenario else { bail!("`run` needs --scenario") };
            let mut sc = load(&common.scenario, Mode::Construction, &common.set)?;
            seeds(&mut sc, seed, replicas);
            run_all(&sc, &common.out)
        }
        Command::Sweep { common, seed, replicas } => {
            let Some(_) = common.scenario else { bail!("`sweep` needs --scenario") };
            let mut sc = load(&common.scenario, Mode::Construction, &common.set)?;
            seeds(&mut sc, seed, replicas);
            let out = common.out.join(&sc.name);
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let res = run_sweep(&sc, &out)?;
            let failed = res.replicas.iter().filter(|r| r.result.is_err()).count();
            println!("{} cells x {} seeds, {failed} failed", res.cells.len(), sc.seeds.len());
            println!("{}", out.join("aggregate.csv").display());
            Ok(())
        }
        Command::PredictTrap { scenario, set } => {
            let sc = load(&scenario, Mode::SingleTrap, &set)?;
            if !matches!(sc.mode, Mode::SingleTrap | Mode::MultiTrapPhase) {
                bail!("predict-trap needs a single_trap or multi_trap_phase scenario, got {}", sc.mode);
            }
            let t = trap_setup(&sc.params, 0)?;
            let reg = trap_regime(&t)?;
            let pred = critical_gain(&reg)?;
            println!("l_w={}", reg.l_w);
            println!("l_minus={}", reg.l_minus);
            println!("k_hat={}", reg.k_hat);
            println!("regime={}", regime_name(pred.regime));
            println!("r_star={}", pred.r_star);
            println!("g_c={}", pred.g_c);
            println!("n={}", t.n);
            println!("g_c_per_agent={}", pred.g_c / t.n.max(1) as f64);
            Ok(())
        }
        Command::Continuum { common, preset } => {
            let mut sc = load(&common.scenario, Mode::Continuum, &common.set)?;
            if sc.mode != Mode::Continuum {
                bail!("continuum needs a continuum scenario, got {}", sc.mode);
            }
            if let Some(p) = preset {
                sc.set("continuum.preset", toml::Value::String(p.clone()))?;
                if common.scenario.is_none() {
                    sc.name = format!("continuum_{p}");
                }
            }
            sc.seeds = vec![0];
            run_all(&sc, &common.out)
        }
        Command::Metrics { run_dir, case } => {
            let rows = scenarios::recompute_metrics(&run_dir, &case)?;
            let mut out = std::io::stdout().lock();
            let written = writeln!(out, "{}", MetricsRow::HEADER).and_then(|_| rows.iter().try_for_each(|r| writeln!(out, "{}", r.to_csv())));
            match written {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}
