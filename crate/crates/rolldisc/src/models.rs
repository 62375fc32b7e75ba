//! Moving frames of the concrete kinematic systems and the Heisenberg
//! group structure underlying the nilpotent approximation.
//!
//! Chart conventions:
//! * disc and Heisenberg charts are `(x, y, θ)`;
//! * the four-dimensional disc chart is `(x, y, θ, φ)` with `φ` the
//!   rolling angle;
//! * the car chart is `(x, y, θ, φ)` with `φ` the steering angle.
//!
//! Every frame field carries an analytic Jacobian so that bracket
//! computations downstream avoid finite-difference noise where possible.

use crate::numeric;
use crate::vecfield::{VecFieldError, VectorField};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("vector does not lie in the distribution span (residual {0:.3e})")]
    NotInDistribution(f64),
    #[error(transparent)]
    Field(#[from] VecFieldError),
}

/// Residual above which a vector is rejected as outside the span of the
/// frame at a point.
pub const DISTRIBUTION_TOL: f64 = 1e-8;

/// Orthonormal frame of the rolling disc on `(x, y, θ)`:
/// `X1 = ∂θ`, `X2 = cosθ·∂x + sinθ·∂y`.
pub fn disc_frame() -> Vec<VectorField> {
    let x1 = VectorField::constant("X1", vec![0.0, 0.0, 1.0]);
    let x2 = VectorField::new(3, "X2", |p| vec![p[2].cos(), p[2].sin(), 0.0]).with_jacobian(
        |p| {
            vec![
                vec![0.0, 0.0, -p[2].sin()],
                vec![0.0, 0.0, p[2].cos()],
                vec![0.0, 0.0, 0.0],
            ]
        },
    );
    vec![x1, x2]
}

/// First bracket of the disc frame: `X12 = −sinθ·∂x + cosθ·∂y`.
pub fn disc_bracket() -> VectorField {
    VectorField::new(3, "X12", |p| vec![-p[2].sin(), p[2].cos(), 0.0]).with_jacobian(|p| {
        vec![
            vec![0.0, 0.0, -p[2].cos()],
            vec![0.0, 0.0, -p[2].sin()],
            vec![0.0, 0.0, 0.0],
        ]
    })
}

/// Generators of the disc on the full chart `(x, y, θ, φ)` that also
/// tracks the rolling angle: `Y1 = ∂θ`, `Y2 = cosθ·∂x + sinθ·∂y + ∂φ`.
pub fn disc4_frame() -> Vec<VectorField> {
    let y1 = VectorField::constant("Y1", vec![0.0, 0.0, 1.0, 0.0]);
    let y2 = VectorField::new(4, "Y2", |p| vec![p[2].cos(), p[2].sin(), 0.0, 1.0])
        .with_jacobian(|p| {
            vec![
                vec![0.0, 0.0, -p[2].sin(), 0.0],
                vec![0.0, 0.0, p[2].cos(), 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
            ]
        });
    vec![y1, y2]
}

/// Generators plus their bracket closure on the four-dimensional chart:
/// `(Y1, Y2, Y12, Y112)` with `Y12 = [Y1, Y2]` and `Y112 = [Y1, Y12]`.
/// Their Jacobi matrix has determinant 1 everywhere.
pub fn disc4_full_frame() -> Vec<VectorField> {
    let mut frame = disc4_frame();
    frame.push(
        VectorField::new(4, "Y12", |p| vec![-p[2].sin(), p[2].cos(), 0.0, 0.0]).with_jacobian(
            |p| {
                vec![
                    vec![0.0, 0.0, -p[2].cos(), 0.0],
                    vec![0.0, 0.0, -p[2].sin(), 0.0],
                    vec![0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0],
                ]
            },
        ),
    );
    frame.push(
        VectorField::new(4, "Y112", |p| vec![-p[2].cos(), -p[2].sin(), 0.0, 0.0])
            .with_jacobian(|p| {
                vec![
                    vec![0.0, 0.0, p[2].sin(), 0.0],
                    vec![0.0, 0.0, -p[2].cos(), 0.0],
                    vec![0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 0.0, 0.0, 0.0],
                ]
            }),
    );
    frame
}

/// Kinematic car with wheelbase `l` on `(x, y, θ, φ)`:
/// `Z1 = ∂φ`, `Z2 = cosθ·∂x + sinθ·∂y + (tanφ/l)·∂θ`.
///
/// At the steering pole `cosφ = 0` the frame degenerates; evaluation
/// there yields non-finite components, which `try_at` rejects.
pub fn car_frame(l: f64) -> Vec<VectorField> {
    let z1 = VectorField::constant("Z1", vec![0.0, 0.0, 0.0, 1.0]);
    let z2 = VectorField::new(4, "Z2", move |p| {
        let (theta, phi) = (p[2], p[3]);
        if phi.cos().abs() < 1e-12 {
            return vec![f64::NAN; 4];
        }
        vec![theta.cos(), theta.sin(), phi.tan() / l, 0.0]
    })
    .with_jacobian(move |p| {
        let (theta, phi) = (p[2], p[3]);
        let sec2 = 1.0 / (phi.cos() * phi.cos());
        vec![
            vec![0.0, 0.0, -theta.sin(), 0.0],
            vec![0.0, 0.0, theta.cos(), 0.0],
            vec![0.0, 0.0, 0.0, sec2 / l],
            vec![0.0, 0.0, 0.0, 0.0],
        ]
    });
    vec![z1, z2]
}

/// Car frame with frozen steering, reduced to the `(x, y, θ)` chart:
/// `Zbar1 = cosθ·∂x + sinθ·∂y`, `Zbar2 = −sinθ·∂x + cosθ·∂y − (1/l)·∂θ`.
/// Unlike the disc frame, this pair brackets to a Lie algebra isomorphic
/// to the disc's, exhibiting the two systems as locally equivalent.
pub fn car_fixed_phi_frame(l: f64) -> Vec<VectorField> {
    let z1 = VectorField::new(3, "Zbar1", |p| vec![p[2].cos(), p[2].sin(), 0.0]).with_jacobian(
        |p| {
            vec![
                vec![0.0, 0.0, -p[2].sin()],
                vec![0.0, 0.0, p[2].cos()],
                vec![0.0, 0.0, 0.0],
            ]
        },
    );
    let z2 = VectorField::new(3, "Zbar2", move |p| {
        vec![-p[2].sin(), p[2].cos(), -1.0 / l]
    })
    .with_jacobian(|p| {
        vec![
            vec![0.0, 0.0, -p[2].cos()],
            vec![0.0, 0.0, -p[2].sin()],
            vec![0.0, 0.0, 0.0],
        ]
    });
    vec![z1, z2]
}

/// Bracket of the fixed-steering frame:
/// `Zbar12 = [Zbar1, Zbar2] = −(sinθ/l)·∂x + (cosθ/l)·∂y`.
pub fn car_fixed_phi_bracket(l: f64) -> VectorField {
    VectorField::new(3, "Zbar12", move |p| {
        vec![-p[2].sin() / l, p[2].cos() / l, 0.0]
    })
    .with_jacobian(move |p| {
        vec![
            vec![0.0, 0.0, -p[2].cos() / l],
            vec![0.0, 0.0, -p[2].sin() / l],
            vec![0.0, 0.0, 0.0],
        ]
    })
}

/// Generators of the nilpotent approximation on `(x, y, θ)`:
/// `n1 = ∂θ`, `n2 = ∂x + θ·∂y`.
pub fn heis_frame() -> Vec<VectorField> {
    let n1 = VectorField::constant("n1", vec![0.0, 0.0, 1.0]);
    let n2 = VectorField::new(3, "n2", |p| vec![1.0, p[2], 0.0]).with_jacobian(|_| {
        vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
        ]
    });
    vec![n1, n2]
}

/// Generators plus their bracket `n3 = [n1, n2] = ∂y`.
pub fn heis_full_frame() -> Vec<VectorField> {
    let mut frame = heis_frame();
    frame.push(VectorField::constant("n3", vec![0.0, 1.0, 0.0]));
    frame
}

/// Right-invariant frame of the Heisenberg group on the same chart:
/// `R1 = ∂θ + x·∂y`, `R2 = ∂x`, `R3 = ∂y`, with `R3 = −[R1, R2]`.
pub fn right_invariant_frame() -> Vec<VectorField> {
    let r1 = VectorField::new(3, "R1", |p| vec![0.0, p[0], 1.0]).with_jacobian(|_| {
        vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]
    });
    let r2 = VectorField::constant("R2", vec![1.0, 0.0, 0.0]);
    let r3 = VectorField::constant("R3", vec![0.0, 1.0, 0.0]);
    vec![r1, r2, r3]
}

/// Inner product of two tangent vectors at `p` in the sub-Riemannian
/// metric that declares `frame` orthonormal. Errors if either vector
/// lies outside the span of the frame at `p`.
pub fn metric_value(
    frame: &[VectorField],
    v: &[f64],
    w: &[f64],
    p: &[f64],
) -> Result<f64, ModelError> {
    let coeffs = |vec: &[f64]| -> Result<Vec<f64>, ModelError> {
        let cols: Vec<Vec<f64>> = frame
            .iter()
            .map(|f| f.try_at(p))
            .collect::<Result<_, _>>()?;
        // Rows of the system are chart components; unknowns are frame
        // coefficients.
        let rows: Vec<Vec<f64>> = (0..p.len())
            .map(|r| cols.iter().map(|c| c[r]).collect())
            .collect();
        let (sol, residual) =
            numeric::lstsq(&rows, vec).ok_or(ModelError::NotInDistribution(f64::INFINITY))?;
        if residual > DISTRIBUTION_TOL {
            return Err(ModelError::NotInDistribution(residual));
        }
        Ok(sol)
    };
    let a = coeffs(v)?;
    let b = coeffs(w)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum())
}

/// Group element of the Heisenberg group, written `(θ, x, y)` in the
/// coordinates where the product is
/// `(θ, x, y)∘(θ̃, x̃, ỹ) = (θ + θ̃, x + x̃, y + ỹ + θ·x̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergElement {
    pub theta: f64,
    pub x: f64,
    pub y: f64,
}

impl HeisenbergElement {
    pub fn new(theta: f64, x: f64, y: f64) -> Self {
        Self { theta, x, y }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// From a chart point ordered `(x, y, θ)`.
    pub fn from_point(p: &[f64]) -> Self {
        Self::new(p[2], p[0], p[1])
    }

    /// Back to the chart order `(x, y, θ)`.
    pub fn to_point(self) -> Vec<f64> {
        vec![self.x, self.y, self.theta]
    }
}

/// Group product `a ∘ b`.
pub fn heis_mul(a: HeisenbergElement, b: HeisenbergElement) -> HeisenbergElement {
    HeisenbergElement::new(a.theta + b.theta, a.x + b.x, a.y + b.y + a.theta * b.x)
}

/// Group inverse: `(θ, x, y)⁻¹ = (−θ, −x, −y + θx)`.
pub fn heis_inv(a: HeisenbergElement) -> HeisenbergElement {
    HeisenbergElement::new(-a.theta, -a.x, -a.y + a.theta * a.x)
}

/// Change from the product coordinates above to symmetric exponential
/// coordinates: `(x, y, θ) ↦ (x, y + θx/2, θ)`.
pub fn coords_2nd_to_1st(p: &[f64]) -> Vec<f64> {
    vec![p[0], p[1] + 0.5 * p[2] * p[0], p[2]]
}

/// Inverse of [`coords_2nd_to_1st`].
pub fn coords_1st_to_2nd(p: &[f64]) -> Vec<f64> {
    vec![p[0], p[1] - 0.5 * p[2] * p[0], p[2]]
}
