//! The nine benchmark task skeletons and their randomized instantiation.

use anyhow::{bail, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stlplan_core::geom::{Disc, Vec2};
use stlplan_core::stl::{Formula, Predicate, Shape, Step, TimeInterval};
use stlplan_core::world::Environment;

use crate::config::Config;
use crate::io::{build_env, EnvFile, RegionSpec};

/// A fully instantiated benchmark task.
#[derive(Debug, Clone)]
pub struct Task {
    pub template: u32,
    pub seed: u64,
    pub formula: Formula,
    pub env_file: EnvFile,
    pub env: Environment,
    pub start: Vec2,
}

fn iv(rng: &mut ChaCha8Rng, a_lo: Step, a_hi: Step, w_lo: Step, w_hi: Step) -> TimeInterval {
    let a = rng.random_range(a_lo..=a_hi);
    let w = rng.random_range(w_lo..=w_hi);
    TimeInterval::new(a, a + w).expect("sampled endpoints are ordered")
}

/// Disc inside the arena, clear of walls, the obstacles, and earlier regions.
fn sample_region(
    rng: &mut ChaCha8Rng,
    env: &Environment,
    taken: &[Disc],
    cfg: &Config,
) -> Result<Disc> {
    let b = &env.bounds;
    for _ in 0..256 {
        let r = cfg.region_radius_min
            + (cfg.region_radius_max - cfg.region_radius_min) * rng.random::<f64>();
        let pad = r + 0.3;
        let c = Vec2::new(
            b.min.x + pad + (b.width() - 2.0 * pad) * rng.random::<f64>(),
            b.min.y + pad + (b.height() - 2.0 * pad) * rng.random::<f64>(),
        );
        let clear_obstacles = env
            .obstacles
            .iter()
            .all(|o| c.distance(o.center) >= o.radius + r + 0.2);
        let clear_regions = taken
            .iter()
            .all(|d| c.distance(d.center) >= d.radius + r + 0.2);
        if clear_obstacles && clear_regions {
            return Ok(Disc::new(c, r));
        }
    }
    bail!("could not place a region after 256 attempts")
}

/// Disc whose center lies within `reach` of `anchor`'s center, subject to
/// the same clearance rules.
fn sample_region_near(
    rng: &mut ChaCha8Rng,
    env: &Environment,
    taken: &[Disc],
    anchor: Disc,
    reach: f64,
    cfg: &Config,
) -> Result<Disc> {
    let b = &env.bounds;
    for _ in 0..256 {
        let r = cfg.region_radius_min
            + (cfg.region_radius_max - cfg.region_radius_min) * rng.random::<f64>();
        let lo = anchor.radius + r + 0.2;
        let hi = reach.max(lo + 0.2);
        let dist = lo + (hi - lo) * rng.random::<f64>();
        let th = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let c = anchor.center + Vec2::new(dist * th.cos(), dist * th.sin());
        let pad = r + 0.3;
        let in_bounds = c.x >= b.min.x + pad
            && c.x <= b.max.x - pad
            && c.y >= b.min.y + pad
            && c.y <= b.max.y - pad;
        let clear_obstacles = env
            .obstacles
            .iter()
            .all(|o| c.distance(o.center) >= o.radius + r + 0.2);
        let clear_regions = taken
            .iter()
            .all(|d| c.distance(d.center) >= d.radius + r + 0.2);
        if in_bounds && clear_obstacles && clear_regions {
            return Ok(Disc::new(c, r));
        }
    }
    bail!("could not place a nearby region after 256 attempts")
}

fn sample_start(rng: &mut ChaCha8Rng, env: &Environment, avoid: &[Disc]) -> Result<Vec2> {
    let b = &env.bounds;
    for _ in 0..256 {
        let p = Vec2::new(
            b.min.x + 0.4 + (b.width() - 0.8) * rng.random::<f64>(),
            b.min.y + 0.4 + (b.height() - 0.8) * rng.random::<f64>(),
        );
        if env.is_free(p, 0.3) && avoid.iter().all(|d| p.distance(d.center) > d.radius + 0.1) {
            return Ok(p);
        }
    }
    bail!("could not place a start state after 256 attempts")
}

fn atom(name: &str, d: Disc) -> Formula {
    Formula::Atom(Predicate::new(name, Shape::CircleInside(d)).expect("positive radius"))
}

fn not_atom(name: &str, d: Disc) -> Formula {
    Formula::NegAtom(Predicate::new(name, Shape::CircleInside(d)).expect("positive radius"))
}

fn closed_always(avoid: Formula, horizon: Step) -> Formula {
    Formula::always(TimeInterval::new(0, horizon).unwrap(), avoid)
}

/// Instantiates template `id` (1..=9) in the base environment. Regions are
/// sampled discs named m1, m2, ...; the unbounded avoidance of templates
/// 1, 5, 6 and 7 is closed over the instantiated formula horizon.
pub fn instantiate_template(id: u32, base: &EnvFile, seed: u64, cfg: &Config) -> Result<Task> {
    let mut base = base.clone();
    base.regions.clear();
    let (env, _) = build_env(&base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e3a_91c5_u64.wrapping_mul(id as u64 + 1));

    let mut discs: Vec<Disc> = Vec::new();
    let region = |rng: &mut ChaCha8Rng, discs: &mut Vec<Disc>| -> Result<Disc> {
        let d = sample_region(rng, &env, discs, cfg)?;
        discs.push(d);
        Ok(d)
    };

    // start must not sit inside any region a top-level G or an until-left
    // forbids at step 0
    let (formula, start_avoid): (Formula, Vec<Disc>) = match id {
        1 => {
            let m1 = region(&mut rng, &mut discs)?;
            let m2 = region(&mut rng, &mut discs)?;
            let i1 = iv(&mut rng, 0, 5, 30, 50);
            let f = Formula::eventually(i1, atom("m1", m1));
            let h = f.horizon();
            (
                Formula::and(f, closed_always(not_atom("m2", m2), h)),
                vec![m2],
            )
        }
        2 => {
            let m1 = region(&mut rng, &mut discs)?;
            let m2 = region(&mut rng, &mut discs)?;
            let i1 = iv(&mut rng, 0, 5, 40, 60);
            let i2 = iv(&mut rng, 0, 5, 40, 60);
            (
                Formula::and(
                    Formula::eventually(i1, atom("m1", m1)),
                    Formula::eventually(i2, atom("m2", m2)),
                ),
                vec![],
            )
        }
        3 => {
            let m1 = region(&mut rng, &mut discs)?;
            let m2 = region(&mut rng, &mut discs)?;
            let i1 = iv(&mut rng, 0, 3, 40, 60);
            (
                Formula::and(
                    Formula::eventually(i1, atom("m1", m1)),
                    Formula::until(i1, not_atom("m1", m1), atom("m2", m2)),
                ),
                vec![m1],
            )
        }
        4 => {
            let ds: Vec<Disc> = (0..4)
                .map(|_| region(&mut rng, &mut discs))
                .collect::<Result<_>>()?;
            let mut f = atom("m4", ds[3]);
            for k in (0..4).rev() {
                let i = iv(&mut rng, 0, 2, 24, 27);
                f = if k == 3 {
                    Formula::eventually(i, f)
                } else {
                    Formula::eventually(i, Formula::and(atom(&format!("m{}", k + 1), ds[k]), f))
                };
            }
            (f, vec![])
        }
        5 => {
            let ds: Vec<Disc> = (0..4)
                .map(|_| region(&mut rng, &mut discs))
                .collect::<Result<_>>()?;
            let mut f = atom("m3", ds[2]);
            for k in (0..3).rev() {
                let i = iv(&mut rng, 0, 2, 30, 35);
                f = if k == 2 {
                    Formula::eventually(i, f)
                } else {
                    Formula::eventually(i, Formula::and(atom(&format!("m{}", k + 1), ds[k]), f))
                };
            }
            let h = f.horizon();
            (
                Formula::and(f, closed_always(not_atom("m4", ds[3]), h)),
                vec![ds[3]],
            )
        }
        6 => {
            let ds: Vec<Disc> = (0..4)
                .map(|_| region(&mut rng, &mut discs))
                .collect::<Result<_>>()?;
            let mut reach = Formula::eventually(iv(&mut rng, 0, 5, 60, 90), atom("m1", ds[0]));
            for k in 1..3 {
                reach = Formula::and(
                    reach,
                    Formula::eventually(
                        iv(&mut rng, 0, 5, 60, 90),
                        atom(&format!("m{}", k + 1), ds[k]),
                    ),
                );
            }
            let h = reach.horizon();
            (
                Formula::and(reach, closed_always(not_atom("m4", ds[3]), h)),
                vec![ds[3]],
            )
        }
        7 => {
            let m1 = region(&mut rng, &mut discs)?;
            let m2 = region(&mut rng, &mut discs)?;
            let m3 = region(&mut rng, &mut discs)?;
            let i1 = iv(&mut rng, 0, 3, 30, 40);
            let i2 = iv(&mut rng, 0, 2, 2, 6);
            let i3 = iv(&mut rng, 0, 5, 60, 90);
            let reach = Formula::and(
                Formula::eventually(i1, Formula::always(i2, atom("m1", m1))),
                Formula::eventually(i3, atom("m2", m2)),
            );
            let h = reach.horizon();
            (
                Formula::and(reach, closed_always(not_atom("m3", m3), h)),
                vec![m3],
            )
        }
        8 => {
            let m1 = region(&mut rng, &mut discs)?;
            let m2 = region(&mut rng, &mut discs)?;
            let i1 = iv(&mut rng, 0, 3, 30, 40);
            let i2 = iv(&mut rng, 0, 3, 30, 40);
            let i3 = iv(&mut rng, 0, 0, 2, 6);
            (
                Formula::eventually(
                    i1,
                    Formula::and(
                        atom("m1", m1),
                        Formula::eventually(i2, Formula::always(i3, atom("m2", m2))),
                    ),
                ),
                vec![],
            )
        }
        9 => {
            // the dwell region m4 must be reachable from m1 within I4's
            // start offset, so it is placed nearby
            let i1 = iv(&mut rng, 0, 2, 26, 30);
            let i4 = iv(&mut rng, 8, 14, 2, 5);
            let m1 = region(&mut rng, &mut discs)?;
            let m4 = sample_region_near(
                &mut rng,
                &env,
                &discs,
                m1,
                (i4.a as f64) * cfg.v_ref - 1.6,
                cfg,
            )?;
            discs.push(m4);
            let m2 = region(&mut rng, &mut discs)?;
            let m3 = region(&mut rng, &mut discs)?;
            let ds = [m1, m2, m3, m4];
            discs = ds.to_vec(); // name order m1..m4
            let after = i4.b + 2;
            let i2 = iv(&mut rng, after, after + 4, 30, 45);
            let i3 = iv(&mut rng, after, after + 4, 30, 45);
            (
                Formula::eventually(
                    i1,
                    Formula::and(
                        atom("m1", ds[0]),
                        Formula::and(
                            Formula::and(
                                Formula::eventually(i2, atom("m2", ds[1])),
                                Formula::eventually(i3, atom("m3", ds[2])),
                            ),
                            Formula::always(i4, atom("m4", ds[3])),
                        ),
                    ),
                ),
                vec![],
            )
        }
        other => bail!("unknown template id {}", other),
    };

    if formula.horizon() > cfg.horizon_budget {
        bail!(
            "template {} instantiated with horizon {} over the budget {}",
            id,
            formula.horizon(),
            cfg.horizon_budget
        );
    }
    formula
        .validate_pnf()
        .map_err(|e| anyhow::anyhow!("template {} broke the prenex form: {}", id, e))?;

    let start = sample_start(&mut rng, &env, &start_avoid)?;
    for (k, d) in discs.iter().enumerate() {
        base.regions.insert(
            format!("m{}", k + 1),
            RegionSpec {
                c: [d.center.x, d.center.y],
                r: d.radius,
                kind: "inside".into(),
            },
        );
    }
    Ok(Task {
        template: id,
        seed,
        formula,
        env_file: base,
        env,
        start,
    })
}
