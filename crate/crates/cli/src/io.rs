//! File formats: environment JSON, signal / trajectory CSV, and the JSON
//! views of decompositions and allocations.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;

use stlplan_core::allocation::AllocationResult;
use stlplan_core::bounds::EndpointExpr;
use stlplan_core::decomp::{ProgressKind, SplitDecomposition};
use stlplan_core::geom::{Disc, Rect, Vec2};
use stlplan_core::stl::parser::PredicateTable;
use stlplan_core::stl::{Predicate, Shape, Signal};
use stlplan_core::world::{Environment, Trajectory};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionSpec {
    pub c: [f64; 2],
    pub r: f64,
    #[serde(default = "default_kind")]
    pub kind: String,
}

fn default_kind() -> String {
    "inside".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub c: [f64; 2],
    pub r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvFile {
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default)]
    pub regions: BTreeMap<String, RegionSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsSpec {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

/// The 10x10 arena with the single central obstacle.
pub fn default_env_file() -> EnvFile {
    EnvFile {
        bounds: BoundsSpec {
            min: [0.0, 0.0],
            max: [10.0, 10.0],
        },
        obstacles: vec![ObstacleSpec {
            c: [5.0, 5.0],
            r: 1.5,
        }],
        regions: BTreeMap::new(),
    }
}

pub fn load_env_file(path: &Path) -> Result<EnvFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading environment {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing environment {}", path.display()))
}

/// Splits an env file into the world geometry and the predicate table the
/// parser uses for region names.
pub fn build_env(file: &EnvFile) -> Result<(Environment, PredicateTable)> {
    let env = Environment {
        bounds: Rect::new(
            Vec2::new(file.bounds.min[0], file.bounds.min[1]),
            Vec2::new(file.bounds.max[0], file.bounds.max[1]),
        ),
        obstacles: file
            .obstacles
            .iter()
            .map(|o| Disc::new(Vec2::new(o.c[0], o.c[1]), o.r))
            .collect(),
    };
    let mut table = PredicateTable::new();
    for (name, spec) in &file.regions {
        let disc = Disc::new(Vec2::new(spec.c[0], spec.c[1]), spec.r);
        let shape = match spec.kind.as_str() {
            "inside" => Shape::CircleInside(disc),
            "outside" => Shape::CircleOutside(disc),
            other => bail!("region {}: unknown kind {:?}", name, other),
        };
        let p = Predicate::new(name.clone(), shape)
            .map_err(|e| anyhow::anyhow!("region {}: {}", name, e))?;
        table.insert(name.clone(), p);
    }
    Ok((env, table))
}

pub fn write_signal_csv(path: &Path, s: &Signal) -> Result<()> {
    let mut out = String::from("t,x,y\n");
    for (t, p) in s.states().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", t, p.x, p.y));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Reads `t,x,y[,vx,vy]` with a header line; velocities are ignored.
pub fn read_signal_csv(path: &Path) -> Result<Signal> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading signal {}", path.display()))?;
    let mut states = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            bail!("{}:{}: expected at least t,x,y", path.display(), i + 1);
        }
        let x: f64 = cols[1].trim().parse().context("bad x column")?;
        let y: f64 = cols[2].trim().parse().context("bad y column")?;
        states.push(Vec2::new(x, y));
    }
    Signal::new(states).map_err(|e| anyhow::anyhow!("{}", e))
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = String::from("t,px,py,vx,vy,ax,ay\n");
    for (i, p) in traj.points.iter().enumerate() {
        let t = i as f64 / traj.substeps as f64;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t, p.pos.x, p.pos.y, p.vel.x, p.vel.y, p.acc.x, p.acc.y
        ));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn endpoint_json(e: &EndpointExpr) -> serde_json::Value {
    json!({ "constant": e.constant, "var_ids": e.vars() })
}

pub fn split_to_json(split: &SplitDecomposition) -> serde_json::Value {
    json!({
        "progresses": split.progresses.iter().map(|p| json!({
            "id": p.id,
            "kind": match p.kind { ProgressKind::Reach => "reach", ProgressKind::Invar => "invar" },
            "a": endpoint_json(&p.a),
            "b": endpoint_json(&p.b),
            "predicate": p.predicate.to_string(),
            "display": p.to_string(),
        })).collect::<Vec<_>>(),
        "bounds": split.bounds,
        "pairs": split.pairs.iter().map(|q| json!({"head": q.head, "residual": q.residual})).collect::<Vec<_>>(),
        "source": split.source,
    })
}

pub fn allocation_to_json(res: &AllocationResult, with_trace: bool) -> serde_json::Value {
    let mut v = json!({
        "waypoints": res.waypoints.iter().map(|w| json!({
            "t": w.t, "x": w.pos.x, "y": w.pos.y, "progress": w.progress,
        })).collect::<Vec<_>>(),
        "assignment": res.assignment,
        "reach_map": res.reach_map.iter().map(|(k, i)| json!([k, i])).collect::<Vec<_>>(),
        "nodes": res.nodes,
    });
    if with_trace {
        v["trace"] = res
            .trace
            .iter()
            .map(|e| json!({"depth": e.depth, "progress": e.progress, "t": e.t, "accepted": e.accepted}))
            .collect();
    }
    v
}
