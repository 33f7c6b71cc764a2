//! Random formula / signal generators shared by the oracle tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stlplan_core::geom::{Disc, Vec2};
use stlplan_core::stl::{Formula, Predicate, Shape, Signal, TimeInterval};

/// Workspace square used by the random instances.
pub const BOX: f64 = 4.0;

pub fn random_predicate(rng: &mut ChaCha8Rng) -> Predicate {
    let name = format!("q{}", rng.random_range(0..1000));
    let shape = match rng.random_range(0..3) {
        0 => Shape::CircleInside(random_disc(rng)),
        1 => Shape::CircleOutside(random_disc(rng)),
        _ => {
            let th = rng.random::<f64>() * core::f64::consts::TAU;
            let normal = Vec2::new(th.cos(), th.sin());
            let anchor = random_point(rng);
            Shape::Halfplane {
                normal,
                offset: normal.dot(anchor),
            }
        }
    };
    Predicate::new(name, shape).unwrap()
}

fn random_disc(rng: &mut ChaCha8Rng) -> Disc {
    Disc::new(random_point(rng), 0.5 + 1.5 * rng.random::<f64>())
}

pub fn random_point(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::new(rng.random::<f64>() * BOX, rng.random::<f64>() * BOX)
}

pub fn random_interval(rng: &mut ChaCha8Rng) -> TimeInterval {
    let a = rng.random_range(0..=3);
    let b = a + rng.random_range(0..=3);
    TimeInterval::new(a, b).unwrap()
}

fn random_atom(rng: &mut ChaCha8Rng) -> Formula {
    let p = random_predicate(rng);
    if rng.random::<bool>() {
        Formula::Atom(p)
    } else {
        Formula::NegAtom(p)
    }
}

/// Eventuality-free formula, legal on the left of an until.
pub fn random_invariance(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    if depth == 0 || rng.random_range(0..3) == 0 {
        return random_atom(rng);
    }
    match rng.random_range(0..2) {
        0 => Formula::and(
            random_invariance(rng, depth - 1),
            random_invariance(rng, depth - 1),
        ),
        _ => Formula::always(random_interval(rng), random_invariance(rng, depth - 1)),
    }
}

/// Random prenex formula; disjunctions appear only when `allow_or`.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: u32, allow_or: bool) -> Formula {
    if depth == 0 {
        return random_atom(rng);
    }
    let top = if allow_or { 13 } else { 11 };
    match rng.random_range(0..top) {
        0 => Formula::True,
        1 | 2 => random_atom(rng),
        3 | 4 => Formula::and(
            random_formula(rng, depth - 1, allow_or),
            random_formula(rng, depth - 1, allow_or),
        ),
        5 | 6 => Formula::eventually(random_interval(rng), random_formula(rng, depth - 1, allow_or)),
        7 | 8 => Formula::always(random_interval(rng), random_formula(rng, depth - 1, allow_or)),
        9 | 10 => Formula::until(
            random_interval(rng),
            random_invariance(rng, depth - 1),
            random_formula(rng, depth - 1, allow_or),
        ),
        _ => Formula::or(
            random_formula(rng, depth - 1, allow_or),
            random_formula(rng, depth - 1, allow_or),
        ),
    }
}

/// Independent uniform states; margins are almost surely nonzero.
pub fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Signal {
    Signal::new((0..len.max(1)).map(|_| random_point(rng)).collect()).unwrap()
}
