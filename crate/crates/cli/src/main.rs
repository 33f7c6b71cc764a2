//! Command-line front end for the planning toolkit.

use stlplan_cli::{batch, config, io, pipeline, svg, templates};

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use stlplan_core::allocation::{allocate, AllocError, TimedWaypoint};
use stlplan_core::decomp::{decompose, preprocess_split};
use stlplan_core::geom::Vec2;
use stlplan_core::stl::dnf::to_dnf;
use stlplan_core::stl::parser::parse_formula;
use stlplan_core::stl::semantics::{eval_boolean, eval_robustness};
use stlplan_core::stl::Formula;
use stlplan_core::world::Environment;

use config::Config;
use io::EnvFile;

#[derive(Parser)]
#[command(name = "stlplan", about = "STL task planning and benchmarking")]
struct Cli {
    /// Environment JSON file; omitted = default 10x10 arena.
    #[arg(long, global = true)]
    env: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// TOML or JSON file overriding any default parameter.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for generated artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula, print its canonical form, horizon, and PNF status.
    Parse {
        #[arg(long)]
        formula: String,
    },
    /// Decompose into timed progresses (per DNF disjunct) as JSON.
    Decompose {
        #[arg(long)]
        formula: String,
    },
    /// Allocate timed waypoints for a formula or a task template.
    Allocate {
        #[arg(long, conflicts_with = "template")]
        formula: Option<String>,
        #[arg(long)]
        template: Option<u32>,
        /// Start position "x,y" (formula mode).
        #[arg(long, default_value = "1,1")]
        start: String,
        /// Include the DFS trace in the output JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Full planning pipeline; writes the planned signal and a report.
    Plan {
        #[arg(long, conflicts_with = "template")]
        formula: Option<String>,
        #[arg(long)]
        template: Option<u32>,
        #[arg(long, default_value = "1,1")]
        start: String,
    },
    /// Plan and execute with the tracking controller.
    Simulate {
        #[arg(long, conflicts_with = "template")]
        formula: Option<String>,
        #[arg(long)]
        template: Option<u32>,
        #[arg(long, default_value = "1,1")]
        start: String,
    },
    /// Evaluate a formula on a signal CSV.
    Monitor {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        signal: PathBuf,
    },
    /// Randomized benchmark campaign over task templates.
    Bench {
        /// Comma-separated ids or ranges, e.g. "1-3,7".
        #[arg(long, default_value = "1-9")]
        templates: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Render the environment and an optional signal to SVG.
    Render {
        #[arg(long)]
        signal: Option<PathBuf>,
        /// Allocation JSON (from `allocate`) whose waypoints get drawn.
        #[arg(long)]
        waypoints: Option<PathBuf>,
    },
}

/// 0 = done, 2 = the task itself is infeasible.
enum Done {
    Ok,
    Infeasible,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}

fn load_setup(cli: &Cli) -> Result<(Config, EnvFile, Environment)> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let file = match &cli.env {
        Some(p) => io::load_env_file(p)?,
        None => io::default_env_file(),
    };
    let (env, _) = io::build_env(&file)?;
    Ok((cfg, file, env))
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn parse_start(s: &str) -> Result<Vec2> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("start must be \"x,y\", got {:?}", s);
    }
    Ok(Vec2::new(
        parts[0].trim().parse().context("bad start x")?,
        parts[1].trim().parse().context("bad start y")?,
    ))
}

fn parse_with_env(formula: &str, file: &EnvFile) -> Result<Formula> {
    let (_, table) = io::build_env(file)?;
    parse_formula(formula, &table).map_err(|e| anyhow::anyhow!("{}", e))
}

/// Formula + world from either an inline formula or a template instance.
fn resolve_task(
    cli: &Cli,
    formula: &Option<String>,
    template: Option<u32>,
    start: &str,
) -> Result<(Formula, EnvFile, Environment, Vec2)> {
    let (cfg, file, env) = load_setup(cli)?;
    match (formula, template) {
        (Some(text), None) => {
            let f = parse_with_env(text, &file)?;
            Ok((f, file, env, parse_start(start)?))
        }
        (None, Some(id)) => {
            let task = templates::instantiate_template(id, &file, cli.seed, &cfg)?;
            Ok((task.formula, task.env_file, task.env, task.start))
        }
        _ => bail!("exactly one of --formula / --template is required"),
    }
}

fn parse_template_list(spec: &str) -> Result<Vec<u32>> {
    let mut ids = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once('-') {
            let a: u32 = a.trim().parse().context("bad template range")?;
            let b: u32 = b.trim().parse().context("bad template range")?;
            ids.extend(a..=b);
        } else if !part.is_empty() {
            ids.push(part.parse().context("bad template id")?);
        }
    }
    if ids.is_empty() || ids.iter().any(|&i| !(1..=9).contains(&i)) {
        bail!("template ids must lie in 1..=9, got {:?}", spec);
    }
    Ok(ids)
}

fn run(cli: &Cli) -> Result<Done> {
    let (cfg, file, _env) = load_setup(cli)?;
    match &cli.cmd {
        Cmd::Parse { formula } => {
            let f = parse_with_env(formula, &file)?;
            println!("{}", f);
            println!("horizon: {}", f.horizon());
            match f.validate_pnf() {
                Ok(()) => println!("prenex: ok"),
                Err(v) => println!("prenex: {}", v),
            }
            Ok(Done::Ok)
        }
        Cmd::Decompose { formula } => {
            let f = parse_with_env(formula, &file)?;
            f.validate_pnf().map_err(|e| anyhow::anyhow!("{}", e))?;
            let mut disjuncts = Vec::new();
            for d in to_dnf(&f) {
                let dec = decompose(&d).map_err(|e| anyhow::anyhow!("{}", e))?;
                disjuncts.push(io::split_to_json(&preprocess_split(&dec)));
            }
            let doc = serde_json::json!({ "disjuncts": disjuncts });
            emit_json(cli, "decomposition.json", &doc)?;
            Ok(Done::Ok)
        }
        Cmd::Allocate {
            formula,
            template,
            start,
            trace,
        } => {
            let (f, _envfile, env, x0) = resolve_task(cli, formula, *template, start)?;
            let predictor = cfg.predictor();
            let acfg = cfg.allocation(cli.seed);
            let mut last_err = None;
            for d in to_dnf(&f) {
                let dec = match decompose(&d) {
                    Ok(dec) => dec,
                    Err(e) => {
                        last_err = Some(format!("{}", e));
                        continue;
                    }
                };
                let split = preprocess_split(&dec);
                match allocate(&split, x0, &env, &predictor, &acfg) {
                    Ok(res) => {
                        emit_json(cli, "allocation.json", &io::allocation_to_json(&res, *trace))?;
                        return Ok(Done::Ok);
                    }
                    Err(AllocError::Infeasible) => last_err = Some("infeasible".into()),
                    Err(e) => last_err = Some(format!("{}", e)),
                }
            }
            eprintln!(
                "no feasible allocation: {}",
                last_err.unwrap_or_else(|| "no disjuncts".into())
            );
            Ok(Done::Infeasible)
        }
        Cmd::Plan {
            formula,
            template,
            start,
        }
        | Cmd::Simulate {
            formula,
            template,
            start,
        } => {
            let simulate = matches!(cli.cmd, Cmd::Simulate { .. });
            let (f, envfile, env, x0) = resolve_task(cli, formula, *template, start)?;
            let out = pipeline::run_pipeline(&f, &env, x0, &cfg, cli.seed, template.unwrap_or(0));
            let dir = out_dir(cli)?;
            std::fs::write(
                dir.join("report.json"),
                serde_json::to_string_pretty(&out.report)?,
            )?;
            if let Some(plan) = &out.plan {
                io::write_signal_csv(&dir.join("plan.csv"), &plan.signal)?;
                let wps = out
                    .allocation
                    .as_ref()
                    .map(|a| a.waypoints.clone())
                    .unwrap_or_default();
                std::fs::write(
                    dir.join("plan.svg"),
                    svg::render(&envfile, Some(&plan.signal), &wps),
                )?;
            }
            if simulate {
                if let Some(traj) = &out.trajectory {
                    io::write_trajectory_csv(&dir.join("trajectory.csv"), traj)?;
                    io::write_signal_csv(&dir.join("executed.csv"), &traj.executed_signal())?;
                }
            }
            println!("{}", serde_json::to_string_pretty(&out.report)?);
            if out.report.generation_success {
                Ok(Done::Ok)
            } else {
                Ok(Done::Infeasible)
            }
        }
        Cmd::Monitor { formula, signal } => {
            let f = parse_with_env(formula, &file)?;
            let s = io::read_signal_csv(signal)?;
            let sat = eval_boolean(&f, &s, 0).map_err(|e| anyhow::anyhow!("{}", e))?;
            let rho =
                eval_robustness(&f, &s, 0, &cfg.robustness()).map_err(|e| anyhow::anyhow!("{}", e))?;
            println!("satisfied: {}", sat);
            println!("robustness: {}", rho);
            Ok(Done::Ok)
        }
        Cmd::Bench { templates, n } => {
            let ids = parse_template_list(templates)?;
            let dir = out_dir(cli)?;
            let mut summaries = Vec::new();
            let mut all_reports = Vec::new();
            for id in ids {
                let (reports, summary) = batch::run_template(id, &file, &cfg, cli.seed, *n);
                all_reports.extend(reports);
                summaries.push(summary);
            }
            std::fs::write(dir.join("summary.csv"), batch::summary_csv(&summaries))?;
            std::fs::write(
                dir.join("reports.json"),
                serde_json::to_string_pretty(&all_reports)?,
            )?;
            print!("{}", batch::summary_table(&summaries));
            Ok(Done::Ok)
        }
        Cmd::Render { signal, waypoints } => {
            let sig = match signal {
                Some(p) => Some(io::read_signal_csv(p)?),
                None => None,
            };
            let wps: Vec<TimedWaypoint> = match waypoints {
                Some(p) => read_waypoints_json(p)?,
                None => Vec::new(),
            };
            let doc = svg::render(&file, sig.as_ref(), &wps);
            let dir = out_dir(cli)?;
            let path = dir.join("scene.svg");
            std::fs::write(&path, doc)?;
            println!("{}", path.display());
            Ok(Done::Ok)
        }
    }
}

fn read_waypoints_json(path: &Path) -> Result<Vec<TimedWaypoint>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading waypoints {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let arr = v["waypoints"]
        .as_array()
        .context("waypoints JSON needs a `waypoints` array")?;
    arr.iter()
        .map(|w| {
            Ok(TimedWaypoint {
                t: w["t"].as_i64().context("waypoint t")?,
                pos: Vec2::new(
                    w["x"].as_f64().context("waypoint x")?,
                    w["y"].as_f64().context("waypoint y")?,
                ),
                progress: w["progress"].as_u64().map(|p| p as usize),
            })
        })
        .collect()
}

fn emit_json(cli: &Cli, name: &str, doc: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    if cli.out.is_some() {
        let dir = out_dir(cli)?;
        std::fs::write(dir.join(name), &text)?;
    }
    println!("{}", text);
    Ok(())
}
