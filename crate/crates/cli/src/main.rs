use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use benthic::coverage::{coverage_fraction, generate_tracklines, CoverageRequest};
use benthic::executive::Executive;
use benthic::geometry::Point2;
use benthic::mission::{self, load_mission, record, replay_file, Mission, RunOptions};
use benthic::planner::{make_plan, plan_report, PlanReport};
use benthic::values::ConcreteValue;
use benthic::Polygon;
use benthic_service::RunnerConfig;
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "benthic", version, about = "Run, plan and replay AUV missions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Execute a mission against the simulator and print its run record.
    Run {
        #[arg(long)]
        mission: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sim seconds per wall second; 0 runs as fast as possible.
        #[arg(long, default_value_t = 0.0)]
        speed: f64,
        /// Serve the operator API on this port until interrupted.
        #[arg(long)]
        serve: Option<u16>,
        /// Event log destination (JSON Lines).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Stop at this sim time instead of the mission's own limit.
        #[arg(long)]
        until: Option<f64>,
    },
    /// Print the plan the executive would adopt for each goal, without running.
    Plan {
        #[arg(long)]
        mission: PathBuf,
    },
    /// Trackline waypoints for a zone as CSV, followed by the coverage fraction.
    PlanCoverage {
        /// JSON file holding a polygon: a list of {"x","y"} vertices.
        #[arg(long)]
        zone: PathBuf,
        #[arg(long)]
        spacing: f64,
        #[arg(long, default_value_t = 0.0)]
        heading: f64,
    },
    /// Rebuild the final state from an event log and print its digest.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
    /// Print the stores reconstructed from an event log.
    Dump {
        #[arg(long)]
        log: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Cmd::Run {
            mission,
            seed,
            speed,
            serve,
            log,
            until,
        } => run(&mission, seed, speed, serve, log, until),
        Cmd::Plan { mission } => plan(&mission),
        Cmd::PlanCoverage { zone, spacing, heading } => plan_coverage(&zone, spacing, heading),
        Cmd::Replay { log } => replay(&log),
        Cmd::Dump { log } => dump(&log),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(path: &Path, seed: u64, speed: f64, serve: Option<u16>, log: Option<PathBuf>, until: Option<f64>) -> Result<()> {
    if speed < 0.0 {
        bail!("--speed must be non-negative");
    }
    let mission = load_mission(path)?;
    let until = until.unwrap_or(mission.spec.duration);
    if serve.is_none() && speed == 0.0 {
        let opts = RunOptions {
            seed,
            log_path: log,
            max_duration: Some(until),
        };
        let (rec, _) = mission::run_mission(&mission, &opts)?;
        return print_json(&rec);
    }
    let mut exec = mission.executive(seed)?;
    if let Some(p) = &log {
        stream_log(&mut exec, p)?;
    }
    let config = RunnerConfig {
        speed,
        until,
        stop_when_quiescent: serve.is_none(),
        linger: serve.is_some(),
    };
    let exec = match serve {
        None => {
            let (_, join) = benthic_service::spawn(exec, config);
            join.join().expect("deliberator thread panicked")?
        }
        Some(port) => serve_run(exec, config, port)?,
    };
    print_json(&record(&mission, &exec, seed, log))
}

/// Writes the lines emitted so far, then streams the rest as they happen.
fn stream_log(exec: &mut Executive, path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for line in exec.lines() {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    exec.set_sink(Box::new(LineFlush(w)));
    Ok(())
}

/// Flushes after every line so the log stays readable while the run goes on.
struct LineFlush<W: Write>(W);

impl<W: Write> Write for LineFlush<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.0.write(buf)?;
        if buf.ends_with(b"\n") {
            self.0.flush()?;
        }
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.0.flush()
    }
}

fn serve_run(exec: Executive, config: RunnerConfig, port: u16) -> Result<Executive> {
    let rt = tokio::runtime::Runtime::new()?;
    let (handle, join) = benthic_service::spawn(exec, config);
    rt.block_on(async {
        let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
        let listener = benthic_service::bind(addr).await?;
        eprintln!("serving on http://{}", listener.local_addr()?);
        benthic_service::serve(listener, handle.clone(), async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        anyhow::Ok(())
    })?;
    handle.shutdown();
    Ok(join.join().expect("deliberator thread panicked")?)
}

#[derive(Debug, Serialize)]
struct GoalPlan {
    goal_id: u64,
    condition: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<PlanReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn plan(path: &Path) -> Result<()> {
    let mission: Mission = load_mission(path)?;
    let exec = mission.executive(0)?;
    let world = exec.world();
    let state = world.stores.beliefs.state();
    let mut goals: Vec<_> = world.open_goals().collect();
    goals.sort_by_key(|g| (g.priority, std::cmp::Reverse(g.id)));
    let out: Vec<GoalPlan> = goals
        .into_iter()
        .map(|g| {
            let planned = match world.overrides.get(&g.id) {
                Some(p) => Ok(p.clone()),
                None => make_plan(g.id, &g.condition, &state, &world.stores, exec.now()),
            };
            let (plan, error) = match planned {
                Ok(p) => (Some(plan_report(&p, &world.stores)), None),
                Err(e) => (None, Some(e.to_string())),
            };
            GoalPlan {
                goal_id: g.id,
                condition: g.condition.to_string(),
                plan,
                error,
            }
        })
        .collect();
    print_json(&out)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ZoneFile {
    Vertices(Vec<Point2<f64>>),
    Value(ConcreteValue),
}

fn read_zone(path: &Path) -> Result<Polygon> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match serde_json::from_str::<ZoneFile>(&text).with_context(|| format!("parsing {}", path.display()))? {
        ZoneFile::Vertices(v) => Ok(Polygon::new(v)?),
        ZoneFile::Value(ConcreteValue::Polygon(p)) => Ok(p),
        ZoneFile::Value(_) => bail!("{} does not hold a polygon", path.display()),
    }
}

fn plan_coverage(zone: &Path, spacing: f64, heading: f64) -> Result<()> {
    let zone = read_zone(zone)?;
    let t = generate_tracklines(&CoverageRequest {
        zone: zone.clone(),
        spacing,
        heading_deg: heading,
        entry_hint: None,
    })?;
    let fraction = coverage_fraction(&zone, &t.path, spacing, spacing / 20.0)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["x_m", "y_m"])?;
    for p in &t.path {
        w.write_record([format!("{:.3}", p.x), format!("{:.3}", p.y)])?;
    }
    w.flush()?;
    drop(w);
    println!("# coverage_fraction {fraction:.6}");
    Ok(())
}

#[derive(Debug, Serialize)]
struct ReplaySummary {
    log: PathBuf,
    events: u64,
    sim_time: f64,
    final_digest: String,
}

fn replay(log: &Path) -> Result<()> {
    let world = replay_file(log)?;
    print_json(&ReplaySummary {
        log: log.to_path_buf(),
        events: world.next_seq,
        sim_time: world.exec.sim_clock,
        final_digest: world.digest(),
    })
}

fn dump(log: &Path) -> Result<()> {
    let world = replay_file(log)?;
    print_json(&world.stores.dump())
}
