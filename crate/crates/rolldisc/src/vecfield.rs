//! Numerical vector-field calculus on coordinate charts.
//!
//! Fields are plain closures `ℝⁿ → ℝⁿ` tagged with a label; brackets and
//! pushforwards are computed by central finite differences unless a field
//! carries an analytic Jacobian. This is the workhorse behind bracket
//! cross-checks, controllability scans, and numerical flows of symmetry
//! fields.

use crate::numeric;
use crate::solver::{rkf45_raw, RawOutcome};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// A point of a coordinate chart. The disc chart orders coordinates as
/// `(x, y, θ)` with `θ` unwrapped in ℝ.
pub type ConfigPoint = Vec<f64>;

/// Central-difference step used when no analytic Jacobian is available.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Seed for reproducible sample-point generation, overridable per call.
pub const DEFAULT_SEED: u64 = 0xD15C;

/// Relative rank cutoff for controllability scans. Brackets of depth two
/// are finite differences of finite differences, so singular values below
/// this threshold are treated as noise.
pub const CONTROLLABILITY_RANK_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum VecFieldError {
    #[error("field `{label}` expects dimension {expected}, got point of length {got}")]
    DimensionMismatch {
        label: String,
        expected: usize,
        got: usize,
    },
    #[error("field `{label}` produced a non-finite value at {point:?}")]
    NonFinite { label: String, point: Vec<f64> },
    #[error("no fields supplied")]
    EmptyFields,
    #[error("flow of `{label}` failed near parameter {s}")]
    FlowFailed { label: String, s: f64 },
}

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;

/// A labelled vector field on an `n`-dimensional chart.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    label: String,
    eval: Arc<EvalFn>,
    jac: Option<Arc<JacFn>>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("analytic_jacobian", &self.jac.is_some())
            .finish()
    }
}

impl VectorField {
    pub fn new(
        dim: usize,
        label: impl Into<String>,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            label: label.into(),
            eval: Arc::new(eval),
            jac: None,
        }
    }

    /// Attaches an analytic Jacobian `J[r][c] = ∂V_r/∂x_c`; brackets and
    /// pushforwards then avoid finite differencing this field.
    pub fn with_jacobian(
        mut self,
        jac: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Arc::new(jac));
        self
    }

    /// Constant field; its Jacobian is identically zero.
    pub fn constant(label: impl Into<String>, v: Vec<f64>) -> Self {
        let dim = v.len();
        let value = v.clone();
        Self::new(dim, label, move |_| value.clone())
            .with_jacobian(move |_| vec![vec![0.0; dim]; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates at `p`. Panics on a dimension mismatch; use [`try_at`]
    /// for validated evaluation.
    ///
    /// [`try_at`]: Self::try_at
    pub fn at(&self, p: &[f64]) -> Vec<f64> {
        assert_eq!(p.len(), self.dim, "field `{}`: bad point length", self.label);
        (self.eval)(p)
    }

    pub fn try_at(&self, p: &[f64]) -> Result<Vec<f64>, VecFieldError> {
        if p.len() != self.dim {
            return Err(VecFieldError::DimensionMismatch {
                label: self.label.clone(),
                expected: self.dim,
                got: p.len(),
            });
        }
        let v = (self.eval)(p);
        if v.len() != self.dim || v.iter().any(|c| !c.is_finite()) {
            return Err(VecFieldError::NonFinite {
                label: self.label.clone(),
                point: p.to_vec(),
            });
        }
        Ok(v)
    }

    /// Jacobian at `p`: analytic if attached, otherwise central
    /// differences with the given step.
    pub fn jacobian(&self, p: &[f64], step: f64) -> Result<Vec<Vec<f64>>, VecFieldError> {
        if let Some(jac) = &self.jac {
            return Ok(jac(p));
        }
        self.fd_jacobian(p, step)
    }

    /// Central-difference Jacobian, regardless of any analytic one.
    pub fn fd_jacobian(&self, p: &[f64], step: f64) -> Result<Vec<Vec<f64>>, VecFieldError> {
        let n = self.dim;
        let mut cols = Vec::with_capacity(n);
        for c in 0..n {
            let mut plus = p.to_vec();
            let mut minus = p.to_vec();
            plus[c] += step;
            minus[c] -= step;
            let vp = self.try_at(&plus)?;
            let vm = self.try_at(&minus)?;
            cols.push(
                vp.iter()
                    .zip(vm)
                    .map(|(a, b)| (a - b) / (2.0 * step))
                    .collect::<Vec<f64>>(),
            );
        }
        Ok((0..n)
            .map(|r| (0..n).map(|c| cols[c][r]).collect())
            .collect())
    }

    /// The field scaled by a constant factor.
    pub fn scaled(&self, factor: f64) -> VectorField {
        let eval = self.eval.clone();
        let scaled_eval = move |p: &[f64]| {
            eval(p).into_iter().map(|c| factor * c).collect::<Vec<f64>>()
        };
        let mut out = VectorField::new(self.dim, format!("{}·{}", factor, self.label), scaled_eval);
        if let Some(jac) = &self.jac {
            let jac = jac.clone();
            out = out.with_jacobian(move |p: &[f64]| {
                jac(p)
                    .into_iter()
                    .map(|row| row.into_iter().map(|e| factor * e).collect())
                    .collect()
            });
        }
        out
    }
}

/// Lie bracket `[V, W](p) = J_W(p)·V(p) − J_V(p)·W(p)`.
pub fn lie_bracket_fd(
    v: &VectorField,
    w: &VectorField,
    p: &[f64],
    step: f64,
) -> Result<Vec<f64>, VecFieldError> {
    let vp = v.try_at(p)?;
    let wp = w.try_at(p)?;
    let jv = v.jacobian(p, step)?;
    let jw = w.jacobian(p, step)?;
    let n = p.len();
    Ok((0..n)
        .map(|r| {
            (0..n)
                .map(|c| jw[r][c] * vp[c] - jv[r][c] * wp[c])
                .sum()
        })
        .collect())
}

/// The bracket as a field in its own right, labelled `[v,w]`, so that it
/// can be bracketed again. Each evaluation differentiates numerically.
pub fn bracket_field(v: &VectorField, w: &VectorField, step: f64) -> VectorField {
    let label = format!("[{},{}]", v.label(), w.label());
    let (v, w) = (v.clone(), w.clone());
    let dim = v.dim();
    VectorField::new(dim, label, move |p| {
        lie_bracket_fd(&v, &w, p, step).unwrap_or_else(|_| vec![f64::NAN; p.len()])
    })
}

/// Matrix whose row `i` is `fields[i]` evaluated at `p`.
pub fn jacobi_matrix(fields: &[VectorField], p: &[f64]) -> Result<Vec<Vec<f64>>, VecFieldError> {
    if fields.is_empty() {
        return Err(VecFieldError::EmptyFields);
    }
    fields.iter().map(|f| f.try_at(p)).collect()
}

pub fn jacobi_determinant(fields: &[VectorField], p: &[f64]) -> Result<f64, VecFieldError> {
    let m = jacobi_matrix(fields, p)?;
    Ok(numeric::det(&m))
}

/// Result of a bracket-generation rank scan.
#[derive(Debug, Clone)]
pub struct ControllabilityReport {
    pub chart_dim: usize,
    pub depth: usize,
    /// Labels of every field in the generated family, brackets included.
    pub field_labels: Vec<String>,
    pub min_rank: usize,
    pub max_rank: usize,
    pub points_checked: usize,
}

impl ControllabilityReport {
    /// Whether the family spanned the whole chart at every sample point.
    pub fn full_rank_everywhere(&self) -> bool {
        self.min_rank == self.chart_dim
    }
}

/// Closes the generators under brackets up to `depth` (depth 0 keeps the
/// generators alone; depth `k` adds brackets whose operands' depths sum
/// to `k − 1`) and reports the pointwise span rank over `points`.
pub fn controllability_check(
    generators: &[VectorField],
    points: &[ConfigPoint],
    depth: usize,
) -> Result<ControllabilityReport, VecFieldError> {
    if generators.is_empty() {
        return Err(VecFieldError::EmptyFields);
    }
    let dim = generators[0].dim();
    let mut levels: Vec<Vec<VectorField>> = vec![generators.to_vec()];
    for k in 1..=depth {
        let mut level = Vec::new();
        // Unordered pairs only: [b,a] = −[a,b] spans the same line.
        for i in 0..k {
            let j = k - 1 - i;
            if i > j {
                break;
            }
            for (ai, a) in levels[i].iter().enumerate() {
                for (bi, b) in levels[j].iter().enumerate() {
                    if i == j && bi <= ai {
                        continue;
                    }
                    level.push(bracket_field(a, b, DEFAULT_FD_STEP));
                }
            }
        }
        levels.push(level);
    }
    let family: Vec<VectorField> = levels.into_iter().flatten().collect();
    let mut min_rank = usize::MAX;
    let mut max_rank = 0;
    for p in points {
        let rows = jacobi_matrix(&family, p)?;
        let r = numeric::rank_tol(&rows, CONTROLLABILITY_RANK_TOL);
        min_rank = min_rank.min(r);
        max_rank = max_rank.max(r);
    }
    Ok(ControllabilityReport {
        chart_dim: dim,
        depth,
        field_labels: family.iter().map(|f| f.label().to_string()).collect(),
        min_rank: if points.is_empty() { 0 } else { min_rank },
        max_rank,
        points_checked: points.len(),
    })
}

/// Flows `p` along `v` for parameter `s` (either sign) with the adaptive
/// integrator at relative tolerance `tol`.
pub fn flow(v: &VectorField, p: &[f64], s: f64, tol: f64) -> Result<Vec<f64>, VecFieldError> {
    if s == 0.0 {
        return Ok(p.to_vec());
    }
    let field = if s < 0.0 { v.scaled(-1.0) } else { v.clone() };
    let span = s.abs();
    let rhs = |y: &[f64], out: &mut [f64]| {
        let val = field.at(y);
        out.copy_from_slice(&val);
    };
    match rkf45_raw(&rhs, p, span, tol, tol * 1e-2, span / 10.0) {
        RawOutcome::Complete(raw) => {
            let end = raw.ys.last().expect("at least one node").clone();
            if end.iter().any(|c| !c.is_finite()) {
                return Err(VecFieldError::FlowFailed {
                    label: v.label().to_string(),
                    s,
                });
            }
            Ok(end)
        }
        RawOutcome::Underflow(raw) => Err(VecFieldError::FlowFailed {
            label: v.label().to_string(),
            s: s.signum() * raw.ts.last().copied().unwrap_or(0.0),
        }),
        RawOutcome::NonFinite { t } | RawOutcome::StepLimit { t } => {
            Err(VecFieldError::FlowFailed {
                label: v.label().to_string(),
                s: s.signum() * t,
            })
        }
    }
}

/// `n` reproducible points uniform in `[−1, 1]^dim`.
pub fn sample_points(dim: usize, n: usize, seed: u64) -> Vec<ConfigPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect()
}

/// Reduces an unwrapped angle to `(−π, π]` for display. Internal state
/// always keeps `θ` unwrapped.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = theta.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w - two_pi
    } else {
        w
    }
}
