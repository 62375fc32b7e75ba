//! Infinitesimal symmetries of the flat model and of the disc system,
//! their closed-form flows, and the structures they do or do not
//! preserve.
//!
//! On the `(x, y, θ)` chart the flat distribution `span(n1, n2)` admits a
//! nine-dimensional family of symmetry fields `t0 … t8`. Three nested
//! refinements cut this family down:
//!
//! * the metric refinement `dx² + dθ²` keeps `t0 … t3` (four fields);
//! * the splitting refinement (the two tautological line fields) keeps
//!   `t1 … t8` (eight fields) but loses the rotation `t0`;
//! * the disc system's own frame metric is preserved by planar motions
//!   only — the rotation analogue of `t0` fails against it.
//!
//! Every distribution symmetry is generated by a single scalar potential,
//! which [`contact_symmetry_from_potential`] turns back into a field.

use crate::models;
use crate::numeric;
use crate::vecfield::{
    lie_bracket_fd, ConfigPoint, VecFieldError, VectorField, DEFAULT_FD_STEP,
};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("`{label}` is undefined at {point:?}")]
    OutsideDomain { label: String, point: Vec<f64> },
    #[error("vector is not in the expected span (residual {0:.3e})")]
    NotInSpan(f64),
    #[error(transparent)]
    Field(#[from] VecFieldError),
}

/// Degrees of the graded fields `t1 … t8` under the dilation `t4`
/// (`t0` sits outside the grading).
pub const GRADING: [i32; 8] = [-1, -1, -2, 0, 0, 1, 1, 2];

/// The symmetry field `t_k`, `k = 0 … 8`, on the `(x, y, θ)` chart.
///
/// In coordinate components `(a_x, a_y, a_θ)`:
/// `t0 = (θ, (θ²−x²)/2, −x)`, `t1 = ∂x`, `t2 = x∂y + ∂θ`, `t3 = ∂y`,
/// `t4 = x∂x + 2y∂y + θ∂θ`, `t5 = −x∂x + θ∂θ`,
/// `t6 = (y/2)∂x − (θ²/2)∂θ`, `t7 = x²∂x + xy∂y + (y−θx)∂θ`,
/// `t8 = (xy/2)∂x + (y²/2)∂y + (θ/2)(y−θx)∂θ`.
pub fn symmetry_field(k: usize) -> VectorField {
    match k {
        0 => VectorField::new(3, "t0", |p| {
            vec![p[2], 0.5 * (p[2] * p[2] - p[0] * p[0]), -p[0]]
        }),
        1 => VectorField::constant("t1", vec![1.0, 0.0, 0.0]),
        2 => VectorField::new(3, "t2", |p| vec![0.0, p[0], 1.0]),
        3 => VectorField::constant("t3", vec![0.0, 1.0, 0.0]),
        4 => VectorField::new(3, "t4", |p| vec![p[0], 2.0 * p[1], p[2]]),
        5 => VectorField::new(3, "t5", |p| vec![-p[0], 0.0, p[2]]),
        6 => VectorField::new(3, "t6", |p| vec![0.5 * p[1], 0.0, -0.5 * p[2] * p[2]]),
        7 => VectorField::new(3, "t7", |p| {
            vec![p[0] * p[0], p[0] * p[1], p[1] - p[2] * p[0]]
        }),
        8 => VectorField::new(3, "t8", |p| {
            vec![
                0.5 * p[0] * p[1],
                0.5 * p[1] * p[1],
                0.5 * p[2] * (p[1] - p[2] * p[0]),
            ]
        }),
        _ => panic!("symmetry fields are t0 … t8, got t{k}"),
    }
}

/// The four symmetries of the flat distribution-plus-metric structure:
/// `t0, t1, t2, t3`.
pub fn metric_symmetry_fields() -> Vec<VectorField> {
    (0..=3).map(symmetry_field).collect()
}

/// The eight symmetries of the flat distribution-plus-splitting
/// structure: `t1 … t8`.
pub fn lagrangian_symmetry_fields() -> Vec<VectorField> {
    (1..=8).map(symmetry_field).collect()
}

/// Builds the distribution symmetry generated by the scalar potential
/// `f3`: with `f2 = −∂θ f3` and `f1 = θ·∂y f3 + ∂x f3`, the field has
/// coordinates `(f2, f2·θ + f3, f1)`. Partials are central differences.
pub fn contact_symmetry_from_potential(
    label: impl Into<String>,
    f3: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
) -> VectorField {
    let f3 = Arc::new(f3);
    VectorField::new(3, label, move |p| {
        let f2 = -partial(f3.as_ref(), p, 2, DEFAULT_FD_STEP);
        let f1 = p[2] * partial(f3.as_ref(), p, 1, DEFAULT_FD_STEP)
            + partial(f3.as_ref(), p, 0, DEFAULT_FD_STEP);
        vec![f2, f2 * p[2] + f3(p), f1]
    })
}

/// The potential of a distribution symmetry, recovered from its
/// coordinates: `f3 = a_y − θ·a_x`.
pub fn potential_of(v: &VectorField) -> impl Fn(&[f64]) -> f64 + Send + Sync + 'static {
    let v = v.clone();
    move |p: &[f64]| {
        let a = v.at(p);
        a[1] - p[2] * a[0]
    }
}

fn partial(f: &(impl Fn(&[f64]) -> f64 + ?Sized), p: &[f64], i: usize, step: f64) -> f64 {
    let mut hi = p.to_vec();
    let mut lo = p.to_vec();
    hi[i] += step;
    lo[i] -= step;
    (f(&hi) - f(&lo)) / (2.0 * step)
}

/// Geometric structure a field can be tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Structure {
    /// The flat distribution `span(n1, n2)` alone.
    Distribution,
    /// Flat distribution plus the metric `dx² + dθ²` on it.
    FlatMetric,
    /// Flat distribution plus its splitting into the two line fields
    /// `span(n1)` and `span(n2)`.
    Splitting,
    /// The disc's distribution `span(X1, X2)` with its frame metric.
    DiscMetric,
}

/// Outcome of testing one field against one structure over a point set.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub structure: Structure,
    pub field_label: String,
    pub max_residual: f64,
    pub points_checked: usize,
}

impl SymmetryReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual.is_finite() && self.max_residual <= tol
    }
}

/// Evaluates the infinitesimal invariance residuals of `v` for the given
/// structure at each point and reports the worst one. A true symmetry
/// yields residuals at finite-difference noise level (`≲ 1e−7`).
pub fn verify_symmetry(
    v: &VectorField,
    structure: Structure,
    points: &[ConfigPoint],
) -> Result<SymmetryReport, SymmetryError> {
    let mut max_residual = 0.0f64;
    let mut push = |r: f64| max_residual = max_residual.max(r.abs());
    for p in points {
        match structure {
            Structure::Distribution => {
                for r in distribution_residuals(v, p) {
                    push(r);
                }
            }
            Structure::FlatMetric => {
                for r in distribution_residuals(v, p) {
                    push(r);
                }
                // Killing equations of dx² + dθ² in terms of the
                // components f2 = a_x and f1 = a_θ.
                let f2 = |q: &[f64]| v.at(q)[0];
                let f1 = |q: &[f64]| v.at(q)[2];
                push(2.0 * partial(&f2, p, 0, DEFAULT_FD_STEP));
                push(2.0 * partial(&f2, p, 1, DEFAULT_FD_STEP));
                push(2.0 * (partial(&f1, p, 0, DEFAULT_FD_STEP) + partial(&f2, p, 2, DEFAULT_FD_STEP)));
                push(2.0 * partial(&f1, p, 1, DEFAULT_FD_STEP));
                push(2.0 * partial(&f1, p, 2, DEFAULT_FD_STEP));
            }
            Structure::Splitting => {
                // [v, n1] must stay in span(n1) and [v, n2] in span(n2).
                let frame = models::heis_frame();
                let b1 = lie_bracket_fd(v, &frame[0], p, DEFAULT_FD_STEP)?;
                let b2 = lie_bracket_fd(v, &frame[1], p, DEFAULT_FD_STEP)?;
                let phi = |w: &[f64]| w[1] - p[2] * w[0];
                push(phi(&b1));
                push(b1[0]);
                push(phi(&b2));
                push(b2[2]);
            }
            Structure::DiscMetric => {
                let frame = models::disc_frame();
                let full = {
                    let mut f = models::disc_frame();
                    f.push(models::disc_bracket());
                    f
                };
                let b1 = lie_bracket_fd(v, &frame[0], p, DEFAULT_FD_STEP)?;
                let b2 = lie_bracket_fd(v, &frame[1], p, DEFAULT_FD_STEP)?;
                let c1 = frame_components(&full, &b1, p)?;
                let c2 = frame_components(&full, &b2, p)?;
                // Transverse parts break the distribution…
                push(c1[2]);
                push(c2[2]);
                // …and the frame-symmetrized parts break the metric.
                push(-2.0 * c1[0]);
                push(c1[1] + c2[0]);
                push(-2.0 * c2[1]);
            }
        }
    }
    Ok(SymmetryReport {
        structure,
        field_label: v.label().to_string(),
        max_residual,
        points_checked: points.len(),
    })
}

/// Residuals of the potential equations: a field preserves the flat
/// distribution iff `f2 = −∂θ f3` and `f1 = θ·∂y f3 + ∂x f3`.
fn distribution_residuals(v: &VectorField, p: &[f64]) -> [f64; 2] {
    let a = v.at(p);
    let f3 = potential_of(v);
    let r1 = a[0] + partial(&f3, p, 2, DEFAULT_FD_STEP);
    let r2 = a[2] - p[2] * partial(&f3, p, 1, DEFAULT_FD_STEP) - partial(&f3, p, 0, DEFAULT_FD_STEP);
    [r1, r2]
}

/// Components of `w` in the given frame at `p` (square solve).
fn frame_components(
    frame: &[VectorField],
    w: &[f64],
    p: &[f64],
) -> Result<Vec<f64>, SymmetryError> {
    let vals: Vec<Vec<f64>> = frame
        .iter()
        .map(|f| f.try_at(p))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<f64>> = (0..p.len())
        .map(|r| vals.iter().map(|c| c[r]).collect())
        .collect();
    numeric::solve(&rows, w).ok_or(SymmetryError::NotInSpan(f64::INFINITY))
}

type MapFn = dyn Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync;

/// An invertible chart transformation with explicit domain: `None`
/// signals that a point is outside the domain of definition.
#[derive(Clone)]
pub struct PointTransformation {
    label: String,
    dim: usize,
    forward: Arc<MapFn>,
    inverse: Arc<MapFn>,
}

impl std::fmt::Debug for PointTransformation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PointTransformation")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .finish()
    }
}

impl PointTransformation {
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        forward: impl Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
        inverse: impl Fn(&[f64]) -> Option<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            dim,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, p: &[f64]) -> Option<Vec<f64>> {
        (self.forward)(p)
    }

    pub fn invert(&self, p: &[f64]) -> Option<Vec<f64>> {
        (self.inverse)(p)
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &PointTransformation) -> PointTransformation {
        let (f1, f2) = (other.forward.clone(), self.forward.clone());
        let (i1, i2) = (other.inverse.clone(), self.inverse.clone());
        PointTransformation::new(
            format!("{}∘{}", self.label, other.label),
            self.dim,
            move |p| f1(p).and_then(|q| f2(&q)),
            move |p| i2(p).and_then(|q| i1(&q)),
        )
    }

    /// Central-difference Jacobian of the forward map at `p`.
    pub fn fd_jacobian(&self, p: &[f64], step: f64) -> Option<Vec<Vec<f64>>> {
        let n = self.dim;
        let mut cols = Vec::with_capacity(n);
        for c in 0..n {
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[c] += step;
            lo[c] -= step;
            let a = self.apply(&hi)?;
            let b = self.apply(&lo)?;
            cols.push(
                a.iter()
                    .zip(b)
                    .map(|(u, v)| (u - v) / (2.0 * step))
                    .collect::<Vec<f64>>(),
            );
        }
        Some((0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect())
    }
}

/// One-parameter symmetry groups with elementary closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ClosedFlow {
    /// Flow of `t0`: a rotation in the `(x, θ)`-plane with a compensating
    /// drift in `y`.
    Rotation,
    /// Flow of `b1·t1 + b2·t2 + b3·t3`.
    Translation { b1: f64, b2: f64, b3: f64 },
    /// Flow of the dilation `t4`: `(x, y, θ) ↦ (eˢx, e²ˢy, eˢθ)`.
    Dilation,
    /// Flow of `t6`: a shear in `x` with a projective action on `θ`,
    /// defined where `sθ + 2 ≠ 0`.
    Projective,
}

/// Domain guard for the projective flow.
const PROJECTIVE_GUARD: f64 = 1e-12;

/// The time-`s` map of a closed-form flow.
pub fn closed_flow(flow: &ClosedFlow, s: f64) -> PointTransformation {
    match *flow {
        ClosedFlow::Rotation => {
            let fwd = move |p: &[f64], s: f64| {
                let (x, y, theta) = (p[0], p[1], p[2]);
                let (sn, cs) = s.sin_cos();
                Some(vec![
                    theta * sn + x * cs,
                    0.5 * (theta * theta - x * x) * sn * cs - x * theta * sn * sn + y,
                    theta * cs - x * sn,
                ])
            };
            PointTransformation::new(
                format!("rot[{s}]"),
                3,
                move |p| fwd(p, s),
                move |p| fwd(p, -s),
            )
        }
        ClosedFlow::Translation { b1, b2, b3 } => {
            let fwd = move |p: &[f64], s: f64| {
                Some(vec![
                    b1 * s + p[0],
                    0.5 * b1 * b2 * s * s + b2 * p[0] * s + b3 * s + p[1],
                    b2 * s + p[2],
                ])
            };
            PointTransformation::new(
                format!("trans[{s}]"),
                3,
                move |p| fwd(p, s),
                move |p| fwd(p, -s),
            )
        }
        ClosedFlow::Dilation => {
            let fwd = move |p: &[f64], s: f64| {
                Some(vec![
                    s.exp() * p[0],
                    (2.0 * s).exp() * p[1],
                    s.exp() * p[2],
                ])
            };
            PointTransformation::new(
                format!("dil[{s}]"),
                3,
                move |p| fwd(p, s),
                move |p| fwd(p, -s),
            )
        }
        ClosedFlow::Projective => {
            let fwd = move |p: &[f64], s: f64| {
                let denom = s * p[2] + 2.0;
                if denom.abs() < PROJECTIVE_GUARD {
                    return None;
                }
                Some(vec![s * p[1] / 2.0 + p[0], p[1], 2.0 * p[2] / denom])
            };
            PointTransformation::new(
                format!("proj[{s}]"),
                3,
                move |p| fwd(p, s),
                move |p| fwd(p, -s),
            )
        }
    }
}

/// The generator of a closed flow, as a vector field.
pub fn closed_flow_generator(flow: &ClosedFlow) -> VectorField {
    match *flow {
        ClosedFlow::Rotation => symmetry_field(0),
        ClosedFlow::Translation { b1, b2, b3 } => {
            VectorField::new(3, "trans", move |p| vec![b1, b2 * p[0] + b3, b2])
        }
        ClosedFlow::Dilation => symmetry_field(4),
        ClosedFlow::Projective => symmetry_field(6),
    }
}

/// Genuine pushforward of a field: `(f_* V)(p) = Df(q)·V(q)` with
/// `q = f⁻¹(p)`. Points outside the domain evaluate to NaN, which
/// `try_at` rejects.
pub fn pushforward_field(map: &PointTransformation, v: &VectorField, step: f64) -> VectorField {
    let label = format!("{}*{}", map.label(), v.label());
    let (map, v) = (map.clone(), v.clone());
    let dim = v.dim();
    VectorField::new(dim, label, move |p| {
        let bad = vec![f64::NAN; p.len()];
        let Some(q) = map.invert(p) else { return bad };
        let Some(jac) = map.fd_jacobian(&q, step) else {
            return bad;
        };
        let vq = v.at(&q);
        (0..p.len())
            .map(|r| (0..p.len()).map(|c| jac[r][c] * vq[c]).sum())
            .collect()
    })
}

/// Pushes a whole frame through a transformation.
pub fn pushforward_frame(
    map: &PointTransformation,
    fields: &[VectorField],
    step: f64,
) -> Vec<VectorField> {
    fields
        .iter()
        .map(|f| pushforward_field(map, f, step))
        .collect()
}

/// Families of metrics obtained by dragging the flat metric along the
/// closed flows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TransformedMetric {
    /// Image of `dx² + dθ²` under the projective flow at parameter `s`:
    /// `(dx − (s/2)dy)² + ((4/w²)dθ)²` with `w = sθ − 2`.
    Tau { s: f64 },
    /// Image under the dilation flow: `e²ˢ(dx² + dθ²)`.
    Mu { s: f64 },
}

impl TransformedMetric {
    /// Bilinear value on two tangent vectors at `p`.
    pub fn inner(&self, p: &[f64], u: &[f64], v: &[f64]) -> f64 {
        match *self {
            TransformedMetric::Tau { s } => {
                let w = s * p[2] - 2.0;
                let a = (u[0] - 0.5 * s * u[1]) * (v[0] - 0.5 * s * v[1]);
                let b = (16.0 / w.powi(4)) * u[2] * v[2];
                a + b
            }
            TransformedMetric::Mu { s } => (2.0 * s).exp() * (u[0] * v[0] + u[2] * v[2]),
        }
    }

    pub fn quadratic(&self, p: &[f64], v: &[f64]) -> f64 {
        self.inner(p, v, v)
    }
}

/// One curve of an orbit family: the geodesic dragged to parameter `s`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitCurve {
    pub s: f64,
    pub points: Vec<Vec<f64>>,
}

/// Applies the time-`s` maps of a closed flow to a sampled curve, one
/// output curve per entry of `s_values`.
pub fn orbit_closed(
    flow: &ClosedFlow,
    s_values: &[f64],
    base: &[Vec<f64>],
) -> Result<Vec<OrbitCurve>, SymmetryError> {
    s_values
        .iter()
        .map(|&s| {
            let map = closed_flow(flow, s);
            let points = base
                .iter()
                .map(|p| {
                    map.apply(p).ok_or_else(|| SymmetryError::OutsideDomain {
                        label: map.label().to_string(),
                        point: p.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(OrbitCurve { s, points })
        })
        .collect()
}

/// Orbit family under a numerically integrated flow, for generators
/// without a closed form (such as `t8`).
pub fn orbit_numeric(
    generator: &VectorField,
    s_values: &[f64],
    base: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<OrbitCurve>, SymmetryError> {
    s_values
        .iter()
        .map(|&s| {
            let points = base
                .iter()
                .map(|p| crate::vecfield::flow(generator, p, s, tol))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(OrbitCurve { s, points })
        })
        .collect()
}

/// Action of a grading-zero symmetry on `span(t1, t2)`, as the 2×2
/// matrix with column `j` holding the coefficients of `[a, t_j]`.
/// The coefficients are recovered by least squares against the values of
/// `t1, t2` at `p`; a large residual means the bracket left the span.
pub fn isotropy_action(a: &VectorField, p: &[f64]) -> Result<[[f64; 2]; 2], SymmetryError> {
    let t1 = symmetry_field(1);
    let t2 = symmetry_field(2);
    let basis = [t1.at(p), t2.at(p)];
    let mut m = [[0.0; 2]; 2];
    for (j, tj) in [&t1, &t2].into_iter().enumerate() {
        let b = lie_bracket_fd(a, tj, p, DEFAULT_FD_STEP)?;
        let rows: Vec<Vec<f64>> = (0..3).map(|r| vec![basis[0][r], basis[1][r]]).collect();
        let (sol, residual) =
            numeric::lstsq(&rows, &b).ok_or(SymmetryError::NotInSpan(f64::INFINITY))?;
        if residual > 1e-6 {
            return Err(SymmetryError::NotInSpan(residual));
        }
        m[0][j] = sol[0];
        m[1][j] = sol[1];
    }
    Ok(m)
}

/// Dimension of the space of symmetric bilinear forms `B` on
/// `span(t1, t2)` with `aᵀB + Ba = 0` for every supplied action matrix.
/// For the flat model's grading-zero actions this is zero: no metric on
/// the distribution is invariant under the full symmetry family.
pub fn invariant_metric_space_dim(actions: &[[[f64; 2]; 2]]) -> usize {
    // Unknowns (b11, b12, b22); each action contributes the three
    // independent entries of aᵀB + Ba.
    let mut rows = Vec::new();
    for a in actions {
        let (a11, a12, a21, a22) = (a[0][0], a[0][1], a[1][0], a[1][1]);
        rows.push(vec![2.0 * a11, 2.0 * a21, 0.0]);
        rows.push(vec![a12, a11 + a22, a21]);
        rows.push(vec![0.0, 2.0 * a12, 2.0 * a22]);
    }
    3 - numeric::rank_tol(&rows, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilgeo;
    use crate::vecfield::{flow, sample_points, DEFAULT_SEED};
    use approx::assert_abs_diff_eq;

    /// Sample points with coordinates bounded away from flow poles.
    fn pts() -> Vec<Vec<f64>> {
        sample_points(3, 6, DEFAULT_SEED)
    }

    const PASS_TOL: f64 = 1e-6;
    const FAIL_TOL: f64 = 1e-3;

    #[test]
    fn field_values_at_reference_point() {
        let p = [2.0, 3.0, 5.0];
        let expect: [[f64; 3]; 9] = [
            [5.0, 10.5, -2.0],
            [1.0, 0.0, 0.0],
            [0.0, 2.0, 1.0],
            [0.0, 1.0, 0.0],
            [2.0, 6.0, 5.0],
            [-2.0, 0.0, 5.0],
            [1.5, 0.0, -12.5],
            [4.0, 6.0, -7.0],
            [3.0, 4.5, -17.5],
        ];
        for (k, want) in expect.iter().enumerate() {
            let got = symmetry_field(k).at(&p);
            assert_eq!(got, want.to_vec(), "t{k}");
        }
    }

    #[test]
    fn every_field_comes_from_its_potential() {
        for k in 0..=8 {
            let t = symmetry_field(k);
            let rebuilt = contact_symmetry_from_potential(format!("p{k}"), potential_of(&t));
            for p in pts() {
                let a = t.at(&p);
                let b = rebuilt.at(&p);
                for (x, y) in a.iter().zip(b) {
                    assert_abs_diff_eq!(*x, y, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn dilation_grades_the_family() {
        let t4 = symmetry_field(4);
        for k in 1..=8 {
            let tk = symmetry_field(k);
            let deg = GRADING[k - 1] as f64;
            for p in pts() {
                let br = lie_bracket_fd(&t4, &tk, &p, DEFAULT_FD_STEP).unwrap();
                let want = tk.at(&p);
                for (b, w) in br.iter().zip(want) {
                    assert_abs_diff_eq!(*b, deg * w, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn distribution_admits_all_nine_fields() {
        for k in 0..=8 {
            let r = verify_symmetry(&symmetry_field(k), Structure::Distribution, &pts()).unwrap();
            assert!(r.passes(PASS_TOL), "t{k}: {r:?}");
        }
    }

    #[test]
    fn flat_metric_keeps_only_the_first_four() {
        for k in 0..=8 {
            let r = verify_symmetry(&symmetry_field(k), Structure::FlatMetric, &pts()).unwrap();
            if k <= 3 {
                assert!(r.passes(PASS_TOL), "t{k} should preserve the metric: {r:?}");
            } else {
                assert!(r.max_residual > FAIL_TOL, "t{k} should break the metric: {r:?}");
            }
        }
    }

    #[test]
    fn splitting_loses_the_rotation() {
        let r = verify_symmetry(&symmetry_field(0), Structure::Splitting, &pts()).unwrap();
        assert!(r.max_residual > FAIL_TOL, "t0 must not preserve the splitting: {r:?}");
        for k in 1..=8 {
            let r = verify_symmetry(&symmetry_field(k), Structure::Splitting, &pts()).unwrap();
            assert!(r.passes(PASS_TOL), "t{k}: {r:?}");
        }
    }

    #[test]
    fn disc_metric_admits_planar_motions_but_not_the_rotation_analogue() {
        let rot = VectorField::new(3, "rot_disc", |p| vec![-p[1], p[0], 1.0]);
        let dx = VectorField::constant("dx", vec![1.0, 0.0, 0.0]);
        let dy = VectorField::constant("dy", vec![0.0, 1.0, 0.0]);
        for f in [&rot, &dx, &dy] {
            let r = verify_symmetry(f, Structure::DiscMetric, &pts()).unwrap();
            assert!(r.passes(PASS_TOL), "{}: {r:?}", f.label());
        }
        // The flat rotation t0 is not a disc symmetry: bracketing with X1
        // leaves the distribution with transverse component sinθ − θcosθ.
        let p = vec![0.3, -0.2, 1.2];
        let r = verify_symmetry(&symmetry_field(0), Structure::DiscMetric, &[p.clone()]).unwrap();
        let predicted = (p[2].sin() - p[2] * p[2].cos()).abs();
        assert!(r.max_residual >= predicted - 1e-6, "{r:?}");
        assert!(r.max_residual > FAIL_TOL);
    }

    #[test]
    fn closed_flows_match_numeric_integration() {
        let cases = [
            (ClosedFlow::Rotation, 0.8),
            (
                ClosedFlow::Translation {
                    b1: 0.5,
                    b2: -0.3,
                    b3: 0.9,
                },
                0.7,
            ),
            (ClosedFlow::Dilation, 0.6),
            (ClosedFlow::Projective, 0.5),
        ];
        for (cf, s) in cases {
            let map = closed_flow(&cf, s);
            let gen = closed_flow_generator(&cf);
            for p in pts() {
                let via_map = map.apply(&p).unwrap();
                let via_ode = flow(&gen, &p, s, 1e-12).unwrap();
                for (a, b) in via_map.iter().zip(via_ode) {
                    assert_abs_diff_eq!(*a, b, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn flows_compose_and_invert() {
        for cf in [
            ClosedFlow::Rotation,
            ClosedFlow::Translation {
                b1: 1.0,
                b2: 0.4,
                b3: -0.2,
            },
            ClosedFlow::Dilation,
            ClosedFlow::Projective,
        ] {
            let (r, s) = (0.3, 0.5);
            let f_r = closed_flow(&cf, r);
            let f_s = closed_flow(&cf, s);
            let f_rs = closed_flow(&cf, r + s);
            for p in pts() {
                let a = f_s.apply(&f_r.apply(&p).unwrap()).unwrap();
                let b = f_rs.apply(&p).unwrap();
                for (x, y) in a.iter().zip(b) {
                    assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
                }
                let back = f_r.invert(&f_r.apply(&p).unwrap()).unwrap();
                for (x, y) in back.iter().zip(&p) {
                    assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn projective_flow_reference_point_and_domain() {
        let map = closed_flow(&ClosedFlow::Projective, 1.0);
        assert_eq!(map.apply(&[0.0, 2.0, 2.0]).unwrap(), vec![1.0, 2.0, 1.0]);
        // sθ + 2 = 0 is outside the domain.
        assert!(map.apply(&[0.0, 0.0, -2.0]).is_none());
    }

    #[test]
    fn projective_pushforward_rescales_the_frame() {
        // (f_s)_* n1 = (w²/4)·n1 and (f_s)_* n2 = −(2/w)·n2 with
        // w = s·θ − 2 read off at the target point.
        let s = 0.7;
        let map = closed_flow(&ClosedFlow::Projective, s);
        let frame = models::heis_frame();
        let pushed = pushforward_frame(&map, &frame, 1e-5);
        for p in pts() {
            let w = s * p[2] - 2.0;
            let factors = [w * w / 4.0, -2.0 / w];
            for ((orig, push), factor) in frame.iter().zip(&pushed).zip(factors) {
                let want: Vec<f64> = orig.at(&p).iter().map(|c| factor * c).collect();
                let got = push.at(&p);
                for (g, v) in got.iter().zip(want) {
                    assert_abs_diff_eq!(*g, v, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn tau_makes_the_pushed_frame_orthonormal() {
        let s = 0.7;
        let map = closed_flow(&ClosedFlow::Projective, s);
        let pushed = pushforward_frame(&map, &models::heis_frame(), 1e-5);
        let tau = TransformedMetric::Tau { s };
        for p in pts() {
            let u = pushed[0].at(&p);
            let v = pushed[1].at(&p);
            assert_abs_diff_eq!(tau.quadratic(&p, &u), 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(tau.quadratic(&p, &v), 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(tau.inner(&p, &u, &v), 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn mu_matches_the_reverse_dilation_pushforward() {
        // Dragging the frame backwards (parameter −s) produces e⁻ˢ·n_i,
        // which μ_s = e²ˢ(dx² + dθ²) declares orthonormal.
        let s = 0.9;
        let map = closed_flow(&ClosedFlow::Dilation, -s);
        let frame = models::heis_frame();
        let pushed = pushforward_frame(&map, &frame, 1e-5);
        let mu = TransformedMetric::Mu { s };
        for p in pts() {
            for (f, orig) in pushed.iter().zip(&frame) {
                let got = f.at(&p);
                let want: Vec<f64> = orig.at(&p).iter().map(|c| (-s).exp() * c).collect();
                for (g, w) in got.iter().zip(want) {
                    assert_abs_diff_eq!(*g, w, epsilon = 1e-7);
                }
            }
            let u = pushed[0].at(&p);
            let v = pushed[1].at(&p);
            assert_abs_diff_eq!(mu.quadratic(&p, &u), 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(mu.quadratic(&p, &v), 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(mu.inner(&p, &u, &v), 0.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn conjugated_rotation_fixes_the_dragged_center() {
        // t0 vanishes at (0, l, 0), so the rotation flow fixes it; the
        // conjugated flow then fixes its image (l·s/2, l, 0).
        let l = 2.0;
        let s = 1.0;
        let f = closed_flow(&ClosedFlow::Projective, s);
        let center = vec![0.0, l, 0.0];
        assert_eq!(
            symmetry_field(0).at(&center),
            vec![0.0, 0.0, 0.0],
            "t0 must vanish at the center"
        );
        let dragged = f.apply(&center).unwrap();
        assert_eq!(dragged, vec![l * s / 2.0, l, 0.0]);
        for r in [0.3, 1.0, 2.0] {
            let rot = closed_flow(&ClosedFlow::Rotation, r);
            let inv = PointTransformation::new(
                "f_inv",
                3,
                {
                    let f = f.clone();
                    move |p: &[f64]| f.invert(p)
                },
                {
                    let f = f.clone();
                    move |p: &[f64]| f.apply(p)
                },
            );
            let conjugated = f.compose(&rot.compose(&inv));
            let moved = conjugated.apply(&dragged).unwrap();
            for (a, b) in moved.iter().zip(&dragged) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn orbit_families_drag_a_geodesic() {
        let c = nilgeo::constants_from_initial([1.0, -1.0, 1.0]);
        let base: Vec<Vec<f64>> = (0..=40)
            .map(|i| nilgeo::eval_horizontal(&c, i as f64 * 0.05).to_vec())
            .collect();
        let orbits = orbit_closed(&ClosedFlow::Projective, &[0.0, 1.0, 3.0], &base).unwrap();
        assert_eq!(orbits.len(), 3);
        assert_eq!(orbits[0].points, base, "s = 0 must reproduce the base curve");
        for o in &orbits {
            assert_eq!(o.points.len(), base.len());
            for p in &o.points {
                assert!(p.iter().all(|v| v.is_finite()));
            }
        }
        // The numeric route through the generator agrees with the closed
        // form.
        let numeric = orbit_numeric(&symmetry_field(6), &[1.0], &base, 1e-11).unwrap();
        for (a, b) in numeric[0].points.iter().zip(&orbits[1].points) {
            for (x, y) in a.iter().zip(b) {
                assert_abs_diff_eq!(*x, *y, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn t8_orbit_exists_for_small_parameters() {
        let c = nilgeo::constants_from_initial([1.0, -1.0, 1.0]);
        let base: Vec<Vec<f64>> = (0..=20)
            .map(|i| nilgeo::eval_horizontal(&c, i as f64 * 0.05).to_vec())
            .collect();
        let orbits = orbit_numeric(&symmetry_field(8), &[-0.2, 0.0, 0.2], &base, 1e-10).unwrap();
        for o in &orbits {
            for p in &o.points {
                assert!(p.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn no_metric_survives_the_grading_zero_actions() {
        let p = [0.3, -0.2, 0.7];
        let a4 = isotropy_action(&symmetry_field(4), &p).unwrap();
        let a5 = isotropy_action(&symmetry_field(5), &p).unwrap();
        // [t4, t_i] = −t_i on the degree −1 fields; t5 splits them.
        assert_abs_diff_eq!(a4[0][0], -1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(a4[1][1], -1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(a4[0][1], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(a4[1][0], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(a5[0][0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(a5[1][1], -1.0, epsilon = 1e-7);
        assert_eq!(invariant_metric_space_dim(&[a4, a5]), 0);
        // Sanity: a rotation action alone leaves the multiples of the
        // identity, a one-dimensional space.
        let skew = [[0.0, -1.0], [1.0, 0.0]];
        assert_eq!(invariant_metric_space_dim(&[skew]), 1);
    }
}
