//! Closed-form normal extremals of the nilpotent approximation, their
//! vertical constants, and the cut locus along the vertical axis.
//!
//! The vertical subsystem of the approximation is linear with constant
//! `h3`, so the whole extremal integrates in elementary functions. Two
//! branches arise: a generic one (`h3 ≠ 0`, trigonometric) and a
//! degenerate one (`h3 = 0`, polynomial — straight lines with quadratic
//! drift in `y`). The trigonometric branch is evaluated in a regrouped
//! form built from `sin²(u/2)` and `u − sin u`, which stays accurate
//! arbitrarily close to the branch boundary.

use crate::models::{heis_mul, HeisenbergElement};
use crate::solver::ExtremalState;
use serde::Serialize;

/// `|h3|` below this threshold selects the degenerate branch.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// Constants of motion of the vertical subsystem, fixing an extremal
/// through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VerticalConstants {
    /// `h3 = C1 ≠ 0`; the covector rotates with frequency `C1` and
    /// `(C2, C3) = (−h2(0), h1(0))`.
    Generic { c1: f64, c2: f64, c3: f64 },
    /// `h3 = 0`; the covector is frozen at `(C1, C2) = (h1(0), h2(0))`.
    Degenerate { c1: f64, c2: f64 },
}

/// Classifies the initial covector `(h1, h2, h3)` and packs the matching
/// constants.
pub fn constants_from_initial(h: [f64; 3]) -> VerticalConstants {
    let [h1, h2, h3] = h;
    if h3.abs() < DEGENERACY_THRESHOLD {
        VerticalConstants::Degenerate { c1: h1, c2: h2 }
    } else {
        VerticalConstants::Generic {
            c1: h3,
            c2: -h2,
            c3: h1,
        }
    }
}

impl VerticalConstants {
    /// The conserved Hamiltonian `(h1² + h2²)/2`.
    pub fn hamiltonian(&self) -> f64 {
        match *self {
            VerticalConstants::Generic { c2, c3, .. } => 0.5 * (c2 * c2 + c3 * c3),
            VerticalConstants::Degenerate { c1, c2 } => 0.5 * (c1 * c1 + c2 * c2),
        }
    }

    /// Whether the projection is an arc-length parametrized curve.
    pub fn is_arclength(&self, tol: f64) -> bool {
        (2.0 * self.hamiltonian() - 1.0).abs() <= tol
    }
}

/// Vertical part `(h1, h2, h3)(t)`.
pub fn eval_vertical(c: &VerticalConstants, t: f64) -> [f64; 3] {
    match *c {
        VerticalConstants::Generic { c1, c2, c3 } => {
            let u = c1 * t;
            [
                c2 * u.sin() + c3 * u.cos(),
                c3 * u.sin() - c2 * u.cos(),
                c1,
            ]
        }
        VerticalConstants::Degenerate { c1, c2 } => [c1, c2, 0.0],
    }
}

/// Horizontal part `(x, y, θ)(t)` of the extremal through the origin.
pub fn eval_horizontal(c: &VerticalConstants, t: f64) -> [f64; 3] {
    match *c {
        VerticalConstants::Generic { c1, c2, c3 } => {
            let u = c1 * t;
            // sin²(u/2) and (u − sin u) vanish quadratically/cubically at
            // u = 0; dividing them by powers of c1 is stable, whereas the
            // expanded polynomial in cos u, cos 2u would cancel
            // catastrophically for small c1.
            let s = u.sin();
            let sh2 = {
                let v = (0.5 * u).sin();
                v * v
            };
            let x = (2.0 * c3 * sh2 - c2 * s) / c1;
            let theta = (2.0 * c2 * sh2 + c3 * s) / c1;
            let sq_sum = c2 * c2 + c3 * c3;
            let sq_diff = c2 * c2 - c3 * c3;
            let y = (sq_sum * (u - s) / 2.0 - 2.0 * c2 * c3 * u.cos() * sh2
                - sq_diff * s * sh2)
                / (c1 * c1);
            [x, y, theta]
        }
        VerticalConstants::Degenerate { c1, c2 } => {
            [c2 * t, 0.5 * c1 * c2 * t * t, c1 * t]
        }
    }
}

/// Joint state at time `t` (horizontal and vertical parts together).
pub fn eval_state(c: &VerticalConstants, t: f64) -> ExtremalState {
    let [x, y, theta] = eval_horizontal(c, t);
    let [h1, h2, h3] = eval_vertical(c, t);
    ExtremalState::new(x, y, theta, h1, h2, h3)
}

/// First cut time `2π/|C1|` of a generic extremal. `None` for the
/// degenerate branch and for the stationary case `C2 = C3 = 0`, where no
/// cut occurs.
pub fn cut_time(c: &VerticalConstants) -> Option<f64> {
    match *c {
        VerticalConstants::Generic { c1, c2, c3 } if c2 * c2 + c3 * c3 > 0.0 => {
            Some(2.0 * std::f64::consts::PI / c1.abs())
        }
        _ => None,
    }
}

/// The point reached at the cut time: on the vertical axis, at
/// `(0, sign(C1)·π(C2² + C3²)/C1², 0)`.
pub fn cut_point(c: &VerticalConstants) -> Option<[f64; 3]> {
    match *c {
        VerticalConstants::Generic { c1, c2, c3 } if c2 * c2 + c3 * c3 > 0.0 => {
            let y = c1.signum() * std::f64::consts::PI * (c2 * c2 + c3 * c3) / (c1 * c1);
            Some([0.0, y, 0.0])
        }
        _ => None,
    }
}

/// The geodesic left-translated by the group element `g`: the curve
/// `t ↦ g ∘ γ(t)` on the `(x, y, θ)` chart. Left-invariance of the
/// generating frame makes this again a geodesic, with unchanged vertical
/// part.
pub fn translated_geodesic(c: &VerticalConstants, g: HeisenbergElement, t: f64) -> [f64; 3] {
    let p = eval_horizontal(c, t);
    let moved = heis_mul(g, HeisenbergElement::from_point(&p)).to_point();
    [moved[0], moved[1], moved[2]]
}
