//! Deterministic SVG rendering of the arena, regions, and trajectories.

use std::fmt::Write as _;

use stlplan_core::allocation::TimedWaypoint;
use stlplan_core::stl::Signal;

use crate::io::EnvFile;

const SCALE: f64 = 60.0;
const PAD: f64 = 20.0;

fn fx(file: &EnvFile, x: f64) -> f64 {
    PAD + (x - file.bounds.min[0]) * SCALE
}

/// SVG y grows downward; flip so the arena reads like the plane.
fn fy(file: &EnvFile, y: f64) -> f64 {
    PAD + (file.bounds.max[1] - y) * SCALE
}

/// Renders the environment, an optional path, and optional timed waypoints.
/// Output is byte-identical for identical inputs.
pub fn render(file: &EnvFile, signal: Option<&Signal>, waypoints: &[TimedWaypoint]) -> String {
    let w = (file.bounds.max[0] - file.bounds.min[0]) * SCALE + 2.0 * PAD;
    let h = (file.bounds.max[1] - file.bounds.min[1]) * SCALE + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">",
        w, h, w, h
    );
    let _ = writeln!(
        s,
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"white\" stroke=\"black\"/>",
        PAD,
        PAD,
        w - 2.0 * PAD,
        h - 2.0 * PAD
    );
    for o in &file.obstacles {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"#888888\" stroke=\"#444444\"/>",
            fx(file, o.c[0]),
            fy(file, o.c[1]),
            o.r * SCALE
        );
    }
    // BTreeMap iteration keeps region order stable
    for (name, reg) in &file.regions {
        let fill = if reg.kind == "outside" {
            "#f4cccc"
        } else {
            "#d9ead3"
        };
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"{}\" fill-opacity=\"0.7\" stroke=\"#333333\"/>",
            fx(file, reg.c[0]),
            fy(file, reg.c[1]),
            reg.r * SCALE,
            fill
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
            fx(file, reg.c[0]),
            fy(file, reg.c[1]) + 5.0,
            name
        );
    }
    if let Some(sig) = signal {
        let mut d = String::new();
        for (i, p) in sig.states().iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{}{:.2} {:.2} ", cmd, fx(file, p.x), fy(file, p.y));
        }
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"#3366cc\" stroke-width=\"2\"/>",
            d.trim_end()
        );
    }
    for wp in waypoints {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#cc0000\"/>",
            fx(file, wp.pos.x),
            fy(file, wp.pos.y)
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#cc0000\">t={}</text>",
            fx(file, wp.pos.x) + 6.0,
            fy(file, wp.pos.y) - 6.0,
            wp.t
        );
    }
    s.push_str("</svg>\n");
    s
}
