use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use nlfrac::scenario::{self, presets, ScenarioConfig, Simulation};
use nlfrac::verification::{studies, suite};
use nlfrac::Error;

/// State-based peridynamic fracture simulator.
#[derive(Parser, Debug)]
#[command(name = "nlfrac", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file or built-in preset and write diagnostics.
    Run {
        /// Scenario file, or the name of a built-in preset.
        config: String,
        /// Output directory (overrides the file's `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a VTK snapshot every K steps.
        #[arg(long)]
        snapshot_stride: Option<usize>,
    },
    /// Mesh convergence study at h = eps/r for the configured ratios.
    StudySpatial {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-step convergence study against a fine reference step.
    StudyTemporal {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite (oracle, Lipschitz, projection).
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// List built-in scenarios, optionally writing each as a file.
    Presets {
        /// Directory to write `<name>.ini` files into.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn us(t: f64) -> String {
    format!("{:.3} μs", t * 1e6)
}

fn load(config: &str) -> nlfrac::Result<ScenarioConfig> {
    let path = Path::new(config);
    if path.exists() {
        return scenario::parse_config(path);
    }
    presets::by_name(config).ok_or_else(|| {
        Error::Config(format!(
            "`{config}` is neither a file nor a built-in preset (see `nlfrac presets`)"
        ))
    })
}

fn write_text(path: &Path, text: &str) -> nlfrac::Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(config: &str, out: Option<PathBuf>, snapshot_stride: Option<usize>) -> nlfrac::Result<()> {
    let mut cfg = load(config)?;
    if let Some(k) = snapshot_stride {
        if k == 0 {
            return Err(Error::Config("--snapshot-stride must be at least 1".into()));
        }
        cfg.output.snapshot_stride = k;
        cfg.output.vtk = true;
    }
    let dir = out
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    let started = Instant::now();
    let sim = Simulation::build(&cfg)?;
    println!(
        "{}: {} nodes, {} bonds, dt = {}, T = {}, {} steps",
        cfg.name,
        sim.disc.len(),
        sim.disc.active_bond_count(),
        us(cfg.dt),
        us(cfg.t_final),
        sim.plan.steps
    );
    let summary = scenario::run_to_dir(&sim, Some(&dir))?;
    if let Some(last) = summary.records.last() {
        println!(
            "t = {}: total energy {:.6e} J, max Z {:.3}, crack length {:.4} m",
            us(last.t),
            last.total,
            last.max_z,
            last.crack_length
        );
    }
    if let Some(csv) = &summary.csv {
        println!("diagnostics: {}", csv.display());
    }
    if !summary.snapshots.is_empty() {
        println!(
            "snapshots: {} files in {}",
            summary.snapshots.len(),
            dir.display()
        );
    }
    println!("wall time {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn study_spatial(config: &str, out: Option<PathBuf>) -> nlfrac::Result<()> {
    let cfg = load(config)?;
    let times = if cfg.study.times.is_empty() {
        vec![cfg.t_final]
    } else {
        cfg.study.times.clone()
    };
    let s = studies::spatial_study(&cfg, &times)?;
    println!(
        "h = {:.4e} / {:.4e} / {:.4e} m, nodes {} / {} / {}",
        s.hs[0], s.hs[1], s.hs[2], s.nodes[0], s.nodes[1], s.nodes[2]
    );
    let mut csv = String::from("t,e12,e23,alpha\n");
    for r in &s.rows {
        let alpha = if r.degenerate {
            "undefined (zero error)".to_string()
        } else {
            format!("{:.4}", r.alpha)
        };
        println!(
            "t = {}: e12 {:.6e}, e23 {:.6e}, alpha {alpha}",
            us(r.t),
            r.e12,
            r.e23
        );
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.t, r.e12, r.e23, r.alpha
        ));
    }
    if let Some(dir) = out {
        scenario::output::ensure_writable_dir(&dir)?;
        write_text(&dir.join("spatial_study.csv"), &csv)?;
    }
    Ok(())
}

fn study_temporal(config: &str, out: Option<PathBuf>) -> nlfrac::Result<()> {
    let cfg = load(config)?;
    let dt_ref = cfg
        .study
        .dt_ref
        .ok_or_else(|| Error::Config("temporal study needs study.dt_ref".into()))?;
    let s = studies::temporal_study(&cfg, &cfg.study.dt_list, dt_ref)?;
    let mut csv = String::from("dt,error,order\n");
    for r in &s.rows {
        println!(
            "dt = {}: error {:.6e}, order {:.4}",
            us(r.dt),
            r.error,
            r.order
        );
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            r.dt, r.error, r.order
        ));
    }
    println!(
        "fitted order {:.4} (reference dt = {})",
        s.fitted_order,
        us(s.dt_ref)
    );
    if let Some(dir) = out {
        scenario::output::ensure_writable_dir(&dir)?;
        write_text(&dir.join("temporal_study.csv"), &csv)?;
    }
    Ok(())
}

fn verify(seed: u64) -> nlfrac::Result<()> {
    match suite::run_all(seed) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn list_presets(write: Option<PathBuf>) -> nlfrac::Result<()> {
    if let Some(dir) = &write {
        scenario::output::ensure_writable_dir(dir)?;
    }
    for (name, cfg) in presets::catalog() {
        println!(
            "{name:<16} eps = {:.1} mm, h = {:.3} mm, T = {}",
            cfg.material.horizon * 1e3,
            cfg.h() * 1e3,
            us(cfg.t_final)
        );
        if let Some(dir) = &write {
            write_text(&dir.join(format!("{name}.ini")), &cfg.to_ini())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: could not start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Run {
            config,
            out,
            snapshot_stride,
        } => run(&config, out, snapshot_stride),
        Command::StudySpatial { config, out } => study_spatial(&config, out),
        Command::StudyTemporal { config, out } => study_temporal(&config, out),
        Command::Verify { seed } => verify(seed),
        Command::Presets { write } => list_presets(write),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
