//! Boundary samples of the projected set and its polar, as CSV and SVG.

use std::f64::consts::TAU;
use std::fmt::Write;

use invset::sampling::circle_directions;
use invset::synthesis::{maximal_polar_contains, maximal_set_contains, SynthesisProblem};
use invset::templates::{lift, SetTemplate};

use crate::CliError;

/// Resolution of the closed-form maximal set outline.
const ORACLE_RAYS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Primal,
    Polar,
}

impl Space {
    fn as_str(self) -> &'static str {
        match self {
            Space::Primal => "primal",
            Space::Polar => "polar",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryRow {
    pub space: Space,
    pub theta: f64,
    pub point: [f64; 2],
}

/// `samples` primal rows (boundary of the projection) followed by `samples`
/// polar rows (polar boundary restricted to the projection plane).
pub fn boundary_rows(template: &SetTemplate, dims: [usize; 2], samples: usize) -> Result<Vec<BoundaryRow>, CliError> {
    let solver_err = |e: invset::Error| CliError::Verification(format!("boundary sampling: {e}"));
    let dirs = circle_directions(samples);
    let theta = |w: &[f64; 2]| w[1].atan2(w[0]).rem_euclid(TAU);
    let primal = template.projection_boundary(&dirs, dims).map_err(solver_err)?;
    let n = template.dim();
    let lifted: Vec<Vec<f64>> = dirs.iter().map(|w| lift(w, dims, n)).collect();
    let polar = template.polar_boundary(&lifted);

    let mut rows = Vec::with_capacity(2 * samples);
    for (w, x) in dirs.iter().zip(&primal) {
        rows.push(BoundaryRow {
            space: Space::Primal,
            theta: theta(w),
            point: *x,
        });
    }
    for (w, y) in dirs.iter().zip(polar) {
        let y = y.map_err(solver_err)?;
        rows.push(BoundaryRow {
            space: Space::Polar,
            theta: theta(w),
            point: [y[dims[0]], y[dims[1]]],
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BoundaryRow]) -> String {
    let mut out = String::from("space,theta,x1,x2\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.space.as_str(), r.theta, r.point[0], r.point[1]).unwrap();
    }
    out
}

/// Largest `r ≤ r_max` with `contains(r·u)`, by bisection along the ray.
fn radial_boundary(u: [f64; 2], r_max: f64, contains: impl Fn(&[f64; 2]) -> bool) -> f64 {
    if contains(&[r_max * u[0], r_max * u[1]]) {
        return r_max;
    }
    let (mut lo, mut hi) = (0.0, r_max);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if contains(&[mid * u[0], mid * u[1]]) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn outline(scale: f64, contains: impl Fn(&[f64; 2]) -> bool) -> Vec<[f64; 2]> {
    (0..ORACLE_RAYS)
        .map(|k| {
            let a = TAU * k as f64 / ORACLE_RAYS as f64;
            let u = [a.cos(), a.sin()];
            let r = radial_boundary(u, 4.0, &contains);
            [scale * r * u[0], scale * r * u[1]]
        })
        .collect()
}

struct Panel {
    origin_x: f64,
    half_width: f64,
    out: String,
}

const PANEL: f64 = 400.0;

impl Panel {
    fn new(index: usize, half_width: f64, title: &str) -> Self {
        let origin_x = index as f64 * PANEL;
        let mut out = String::new();
        writeln!(
            out,
            r#"<rect x="{origin_x}" y="0" width="{PANEL}" height="{PANEL}" fill="white" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="20" font-family="sans-serif" font-size="14">{title}</text>"#,
            origin_x + 10.0
        )
        .unwrap();
        Self {
            origin_x,
            half_width,
            out,
        }
    }

    fn map(&self, p: &[f64; 2]) -> (f64, f64) {
        let k = PANEL / (2.0 * self.half_width);
        (self.origin_x + PANEL / 2.0 + k * p[0], PANEL / 2.0 - k * p[1])
    }

    fn polygon(&mut self, points: &[[f64; 2]], colour: &str) {
        let coords: Vec<String> = points
            .iter()
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(
            self.out,
            r#"<polygon points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            coords.join(" ")
        )
        .unwrap();
    }
}

/// Two panels: the projection with the safe box (green), the closed-form
/// maximal set (yellow, benchmark only), `γ·D` (red) and the result (blue);
/// and the same objects in polar space.
pub fn to_svg(rows: &[BoundaryRow], problem: &SynthesisProblem, gamma: f64) -> String {
    let dims = problem.projection_dims;
    let b = [problem.safe_box[dims[0]][1], problem.safe_box[dims[1]][1]];
    let reach = b[0].max(b[1]);
    let mut primal = Panel::new(0, 1.5 * reach, "primal");
    let mut polar = Panel::new(1, 1.5 / b[0].min(b[1]), "polar");

    primal.polygon(&[[b[0], b[1]], [-b[0], b[1]], [-b[0], -b[1]], [b[0], -b[1]]], "green");
    polar.polygon(&[[1.0 / b[0], 0.0], [0.0, 1.0 / b[1]], [-1.0 / b[0], 0.0], [0.0, -1.0 / b[1]]], "green");

    if let Some(s) = problem.oracle_scale() {
        primal.polygon(&outline(s, maximal_set_contains), "gold");
        polar.polygon(&outline(1.0 / s, maximal_polar_contains), "gold");
    }

    let d = &problem.inner_polytope;
    let scaled: Vec<[f64; 2]> = d.vertices().iter().map(|v| [gamma * v[0], gamma * v[1]]).collect();
    primal.polygon(&scaled, "red");
    if gamma > 0.0 {
        // polar of γ·D: w with γ·h_D(w) = 1
        let polar_d: Vec<[f64; 2]> = circle_directions(ORACLE_RAYS)
            .iter()
            .map(|w| {
                let h = gamma * d.support(w);
                [w[0] / h, w[1] / h]
            })
            .collect();
        polar.polygon(&polar_d, "red");
    }

    let pick = |space: Space| -> Vec<[f64; 2]> { rows.iter().filter(|r| r.space == space).map(|r| r.point).collect() };
    primal.polygon(&pick(Space::Primal), "blue");
    polar.polygon(&pick(Space::Polar), "blue");

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{PANEL}" viewBox="0 0 {} {PANEL}">"#,
        2.0 * PANEL,
        2.0 * PANEL
    )
    .unwrap();
    out.push_str(&primal.out);
    out.push_str(&polar.out);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use invset::templates::EllipsoidTemplate;
    use nalgebra::DMatrix;

    #[test]
    fn unit_ball_rows_lie_on_the_circle() {
        let ball = SetTemplate::Ellipsoid(EllipsoidTemplate::new(DMatrix::identity(3, 3)).unwrap());
        let rows = boundary_rows(&ball, [0, 1], 360).unwrap();
        assert_eq!(rows.len(), 720);
        for r in &rows {
            let radius = r.point[0].hypot(r.point[1]);
            assert!((radius - 1.0).abs() < 1e-9);
        }
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 721);
        assert_eq!(csv.lines().next(), Some("space,theta,x1,x2"));
    }

    #[test]
    fn maximal_outline_is_on_the_closed_form_boundary() {
        let pts = outline(1.0, maximal_set_contains);
        for p in pts {
            assert!(maximal_set_contains(&[p[0] * (1.0 - 1e-9), p[1] * (1.0 - 1e-9)]));
            assert!(!maximal_set_contains(&[p[0] * 1.001, p[1] * 1.001]));
        }
    }
}
