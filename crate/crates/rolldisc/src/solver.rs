//! Normal-extremal Hamiltonian systems and an embedded
//! Runge-Kutta-Fehlberg 4(5) integrator with dense output.
//!
//! The joint state is `(x, y, θ, h1, h2, h3)`: base coordinates plus the
//! vertical coordinates pairing the covector with the moving orthonormal
//! frame. Two right-hand sides are provided: the rolling disc and its
//! nilpotent (Heisenberg) approximation. Both share the Hamiltonian
//! `H = (h1² + h2²)/2`; the disc additionally conserves `h3² − h1²` and
//! the approximation conserves `h3` itself, which the diagnostics track.

use serde::Serialize;
use std::io::{Read, Write};
use thiserror::Error;

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
/// Default cap on the internal step size, as a fraction of the horizon.
pub const DEFAULT_MAX_STEP_FRACTION: f64 = 1.0 / 50.0;

/// CSV header shared by every trajectory file the crate reads or writes.
pub const CSV_HEADER: &str = "t,x,y,theta,h1,h2,h3";

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("tolerances must be positive")]
    BadTolerance,
    #[error("step size underflow at t = {t}; returning {kept} accepted samples")]
    StepUnderflow { t: f64, kept: usize, partial: Box<Trajectory> },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("step limit exceeded at t = {t}")]
    StepLimit { t: f64 },
    #[error("trajectory CSV: {0}")]
    Csv(String),
}

/// Joint horizontal/vertical state of a normal extremal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl ExtremalState {
    pub fn new(x: f64, y: f64, theta: f64, h1: f64, h2: f64, h3: f64) -> Self {
        Self { x, y, theta, h1, h2, h3 }
    }

    /// Extremal through the origin with the given initial covector.
    pub fn from_covector(h1: f64, h2: f64, h3: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, h1, h2, h3)
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.theta, self.h1, self.h2, self.h3]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    /// `H = (h1² + h2²)/2`, conserved along both systems.
    pub fn hamiltonian(&self) -> f64 {
        0.5 * (self.h1 * self.h1 + self.h2 * self.h2)
    }

    /// Whether the projection is parametrized by arc length
    /// (`h1² + h2² = 1` within `tol`).
    pub fn is_arclength(&self, tol: f64) -> bool {
        (self.h1 * self.h1 + self.h2 * self.h2 - 1.0).abs() <= tol
    }
}

/// Which Hamiltonian system a trajectory belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SystemKind {
    Original,
    Nilpotent,
}

impl SystemKind {
    pub fn rhs(self) -> fn(&ExtremalState) -> [f64; 6] {
        match self {
            SystemKind::Original => rhs_original,
            SystemKind::Nilpotent => rhs_nilpotent,
        }
    }

    /// The second conserved quantity beside the Hamiltonian:
    /// `h3² − h1²` for the disc, `h3` for the approximation.
    pub fn invariant(self, s: &ExtremalState) -> f64 {
        match self {
            SystemKind::Original => s.h3 * s.h3 - s.h1 * s.h1,
            SystemKind::Nilpotent => s.h3,
        }
    }
}

/// Disc system: `(ẋ, ẏ, θ̇, ḣ1, ḣ2, ḣ3) =
/// (h2·cosθ, h2·sinθ, h1, −h3h2, h3h1, −h1h2)`.
pub fn rhs_original(s: &ExtremalState) -> [f64; 6] {
    [
        s.h2 * s.theta.cos(),
        s.h2 * s.theta.sin(),
        s.h1,
        -s.h3 * s.h2,
        s.h3 * s.h1,
        -s.h1 * s.h2,
    ]
}

/// Heisenberg approximation: `(ẋ, ẏ, θ̇, ḣ1, ḣ2, ḣ3) =
/// (h2, θ·h2, h1, −h3h2, h3h1, 0)`.
pub fn rhs_nilpotent(s: &ExtremalState) -> [f64; 6] {
    [s.h2, s.theta * s.h2, s.h1, -s.h3 * s.h2, s.h3 * s.h1, 0.0]
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Max |H(t) − H(0)| over the stored samples.
    pub max_hamiltonian_drift: f64,
    /// Max drift of the system-specific invariant; `None` until
    /// [`conserved_diagnostics`] is applied.
    pub max_invariant_drift: Option<f64>,
    pub step_underflow: bool,
}

impl Diagnostics {
    fn empty() -> Self {
        Self {
            accepted_steps: 0,
            rejected_steps: 0,
            max_hamiltonian_drift: 0.0,
            max_invariant_drift: None,
            step_underflow: false,
        }
    }
}

/// Integrated extremal, sampled at the union of the adaptive internal
/// steps and an optional uniform output grid.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ExtremalState>,
    pub method: &'static str,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> &ExtremalState {
        &self.states[0]
    }

    pub fn end(&self) -> &ExtremalState {
        self.states.last().expect("trajectory has ≥ 2 samples")
    }

    /// Writes the trajectory as CSV: header `t,x,y,theta,h1,h2,h3`, one
    /// row per sample, 17 significant digits (lossless for `f64`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SolverError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER.split(','))
            .map_err(|e| SolverError::Csv(e.to_string()))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let a = s.to_array();
            let mut rec = vec![format_g17(*t)];
            rec.extend(a.iter().map(|v| format_g17(*v)));
            w.write_record(&rec)
                .map_err(|e| SolverError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| SolverError::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parses a trajectory CSV produced by [`write_csv`].
    ///
    /// [`write_csv`]: Self::write_csv
    pub fn from_csv<R: Read>(input: R) -> Result<Self, SolverError> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(|e| SolverError::Csv(e.to_string()))?;
        let expected: Vec<&str> = CSV_HEADER.split(',').collect();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(SolverError::Csv(format!(
                "unexpected header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| SolverError::Csv(e.to_string()))?;
            let vals: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| SolverError::Csv(e.to_string()))?;
            if vals.len() != 7 {
                return Err(SolverError::Csv(format!("row has {} fields", vals.len())));
            }
            times.push(vals[0]);
            states.push(ExtremalState::new(
                vals[1], vals[2], vals[3], vals[4], vals[5], vals[6],
            ));
        }
        if times.len() < 2 {
            return Err(SolverError::Csv("fewer than 2 rows".into()));
        }
        Ok(Trajectory {
            times,
            states,
            method: "csv",
            rel_tol: f64::NAN,
            abs_tol: f64::NAN,
            diagnostics: Diagnostics::empty(),
        })
    }
}

/// Formats with 17 significant digits; round-trips every finite `f64`.
pub(crate) fn format_g17(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on the internal step; defaults to `t_end/50`.
    pub max_step: Option<f64>,
    /// Number of uniform output samples (including both endpoints) merged
    /// into the internal nodes; `None` keeps internal nodes only.
    pub grid: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_step: None,
            grid: None,
        }
    }
}

// Classic Fehlberg 4(5) tableau. The step advances with the fifth-order
// member (local extrapolation); the embedded fourth-order member supplies
// the error estimate.
const A: [[f64; 5]; 5] = [
    [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

pub(crate) struct RawSolution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    /// Right-hand side at each node, for Hermite dense output.
    pub fs: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
}

impl RawSolution {
    /// Cubic Hermite interpolation at `t`, which must lie within the
    /// covered interval.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.ts.len();
        debug_assert!(n >= 1);
        if t <= self.ts[0] {
            return self.ys[0].clone();
        }
        if t >= self.ts[n - 1] {
            return self.ys[n - 1].clone();
        }
        let i = match self.ts.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => return self.ys[i].clone(),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.ts[i], self.ts[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        (0..self.ys[i].len())
            .map(|d| {
                h00 * self.ys[i][d]
                    + h10 * h * self.fs[i][d]
                    + h01 * self.ys[i + 1][d]
                    + h11 * h * self.fs[i + 1][d]
            })
            .collect()
    }
}

pub(crate) enum RawOutcome {
    Complete(RawSolution),
    Underflow(RawSolution),
    NonFinite { t: f64 },
    StepLimit { t: f64 },
}

/// Adaptive Fehlberg 4(5) on a generic first-order system, from `t = 0`
/// to `t_end > 0`.
pub(crate) fn rkf45_raw(
    rhs: &dyn Fn(&[f64], &mut [f64]),
    y0: &[f64],
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
) -> RawOutcome {
    let dim = y0.len();
    let eval = |y: &[f64]| {
        let mut out = vec![0.0; dim];
        rhs(y, &mut out);
        out
    };
    let mut ts = vec![0.0];
    let mut ys = vec![y0.to_vec()];
    let mut fs = vec![eval(y0)];
    let mut t = 0.0;
    let mut y = y0.to_vec();
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let h_min = t_end * 1e-14;
    let mut h = (t_end / 100.0).min(max_step);
    let mut stages = vec![vec![0.0; dim]; 6];
    let limit = 5_000_000usize;

    while t < t_end * (1.0 - 1e-14) {
        if accepted + rejected > limit {
            return RawOutcome::StepLimit { t };
        }
        h = h.min(t_end - t).min(max_step);
        stages[0] = fs.last().expect("node recorded").clone();
        for stage in 1..6 {
            let mut arg = y.clone();
            for (d, a) in arg.iter_mut().enumerate() {
                let mut incr = 0.0;
                for (k, row) in stages.iter().enumerate().take(stage) {
                    incr += A[stage - 1][k] * row[d];
                }
                *a += h * incr;
            }
            stages[stage] = eval(&arg);
        }
        let mut y5 = y.clone();
        let mut err_sq = 0.0;
        for d in 0..dim {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for k in 0..6 {
                s5 += B5[k] * stages[k][d];
                s4 += B4[k] * stages[k][d];
            }
            y5[d] += h * s5;
            let e = h * (s5 - s4);
            let sc = abs_tol + rel_tol * y[d].abs().max(y5[d].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / dim as f64).sqrt();
        if !err.is_finite() || y5.iter().any(|v| !v.is_finite()) {
            return RawOutcome::NonFinite { t };
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            ts.push(t);
            ys.push(y.clone());
            fs.push(eval(&y));
            accepted += 1;
        } else {
            rejected += 1;
            if h <= h_min * (1.0 + 1e-9) {
                return RawOutcome::Underflow(RawSolution {
                    ts,
                    ys,
                    fs,
                    accepted,
                    rejected,
                });
            }
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * fac).max(h_min);
    }
    RawOutcome::Complete(RawSolution {
        ts,
        ys,
        fs,
        accepted,
        rejected,
    })
}

fn assemble(
    raw: RawSolution,
    t_end: f64,
    opts: &SolverOptions,
    underflow: bool,
) -> Trajectory {
    // Merge the uniform output grid (where covered) into the internal
    // nodes; dense values come from cubic Hermite interpolation.
    let mut times: Vec<f64> = raw.ts.clone();
    if let Some(n) = opts.grid {
        let n = n.max(2);
        let covered = *raw.ts.last().expect("at least the initial node");
        for i in 0..n {
            let t = t_end * i as f64 / (n - 1) as f64;
            if t <= covered {
                times.push(t);
            }
        }
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= t_end * 1e-14);
    }
    let states: Vec<ExtremalState> = times
        .iter()
        .map(|&t| {
            let v = raw.eval(t);
            ExtremalState::from_array([v[0], v[1], v[2], v[3], v[4], v[5]])
        })
        .collect();
    let h0 = states[0].hamiltonian();
    let max_h = states
        .iter()
        .map(|s| (s.hamiltonian() - h0).abs())
        .fold(0.0f64, f64::max);
    Trajectory {
        times,
        states,
        method: "rkf45",
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        diagnostics: Diagnostics {
            accepted_steps: raw.accepted,
            rejected_steps: raw.rejected,
            max_hamiltonian_drift: max_h,
            max_invariant_drift: None,
            step_underflow: underflow,
        },
    }
}

/// Integrates an extremal system from `s0` over `[0, t_end]`.
///
/// On step-size underflow the partial trajectory is attached to the error
/// and flagged in its diagnostics.
pub fn integrate_rkf45<F>(
    rhs: F,
    s0: &ExtremalState,
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Trajectory, SolverError>
where
    F: Fn(&ExtremalState) -> [f64; 6],
{
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(SolverError::BadHorizon(t_end));
    }
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) {
        return Err(SolverError::BadTolerance);
    }
    let max_step = opts
        .max_step
        .unwrap_or(t_end * DEFAULT_MAX_STEP_FRACTION)
        .min(t_end);
    let wrapped = |y: &[f64], out: &mut [f64]| {
        let d = rhs(&ExtremalState::from_array([
            y[0], y[1], y[2], y[3], y[4], y[5],
        ]));
        out.copy_from_slice(&d);
    };
    match rkf45_raw(
        &wrapped,
        &s0.to_array(),
        t_end,
        opts.rel_tol,
        opts.abs_tol,
        max_step,
    ) {
        RawOutcome::Complete(raw) => Ok(assemble(raw, t_end, opts, false)),
        RawOutcome::Underflow(raw) => {
            let t = *raw.ts.last().expect("nodes recorded");
            let kept = raw.ts.len();
            let partial = assemble(raw, t_end, opts, true);
            Err(SolverError::StepUnderflow {
                t,
                kept,
                partial: Box::new(partial),
            })
        }
        RawOutcome::NonFinite { t } => Err(SolverError::NonFinite { t }),
        RawOutcome::StepLimit { t } => Err(SolverError::StepLimit { t }),
    }
}

/// Recomputes the conservation diagnostics of a trajectory for the given
/// system: max Hamiltonian drift and max drift of the system invariant.
pub fn conserved_diagnostics(traj: &Trajectory, kind: SystemKind) -> Diagnostics {
    let h0 = traj.states[0].hamiltonian();
    let i0 = kind.invariant(&traj.states[0]);
    let mut d = traj.diagnostics.clone();
    d.max_hamiltonian_drift = 0.0;
    let mut inv = 0.0f64;
    for s in &traj.states {
        d.max_hamiltonian_drift = d.max_hamiltonian_drift.max((s.hamiltonian() - h0).abs());
        inv = inv.max((kind.invariant(s) - i0).abs());
    }
    d.max_invariant_drift = Some(inv);
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    const SQ3: f64 = 1.732_050_807_568_877_2; // √3

    fn example1() -> ExtremalState {
        ExtremalState::from_covector(0.5, SQ3 / 2.0, 2.0)
    }

    #[test]
    fn rhs_values_at_reference_states() {
        let d = rhs_original(&ExtremalState::from_covector(1.0, 0.0, 0.0));
        assert_eq!(d, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);

        let d = rhs_original(&example1());
        assert_abs_diff_eq!(d[0], SQ3 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], -SQ3, epsilon = 1e-15);
        assert_abs_diff_eq!(d[4], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[5], -SQ3 / 4.0, epsilon = 1e-15);

        let d = rhs_nilpotent(&example1());
        assert_abs_diff_eq!(d[0], SQ3 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[3], -SQ3, epsilon = 1e-15);
        assert_abs_diff_eq!(d[4], 1.0, epsilon = 1e-15);
        assert_eq!(d[5], 0.0);
    }

    #[test]
    fn equilibrium_when_h1_h2_vanish() {
        let s = ExtremalState::new(0.3, -0.2, 0.9, 0.0, 0.0, 5.0);
        assert_eq!(rhs_original(&s), [0.0; 6]);
        assert_eq!(rhs_nilpotent(&s), [0.0; 6]);
    }

    #[test]
    fn zero_rhs_gives_constant_trajectory() {
        let s0 = ExtremalState::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let traj = integrate_rkf45(|_| [0.0; 6], &s0, 1.0, &SolverOptions::default()).unwrap();
        for s in &traj.states {
            assert_eq!(*s, s0);
        }
    }

    #[test]
    fn exponential_growth_is_integrated_accurately() {
        // ẋ = x, x(0) = 1; endpoint must match e within a few ulps of the
        // requested tolerance.
        let s0 = ExtremalState::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let traj = integrate_rkf45(
            |s| [s.x, 0.0, 0.0, 0.0, 0.0, 0.0],
            &s0,
            1.0,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(traj.end().x, std::f64::consts::E, epsilon = 1e-9);
    }

    #[test]
    fn dense_output_grid_matches_exponential() {
        let s0 = ExtremalState::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let opts = SolverOptions {
            grid: Some(101),
            ..SolverOptions::default()
        };
        let traj = integrate_rkf45(|s| [s.x, 0.0, 0.0, 0.0, 0.0, 0.0], &s0, 1.0, &opts).unwrap();
        assert!(traj.len() >= 101);
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert_abs_diff_eq!(s.x, t.exp(), epsilon = 1e-8);
        }
        // Times strictly increasing.
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_eq!(traj.times[0], 0.0);
        assert_abs_diff_eq!(*traj.times.last().unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn conservation_on_reference_extremal() {
        let opts = SolverOptions::default();
        let traj = integrate_rkf45(rhs_original, &example1(), PI, &opts).unwrap();
        let diag = conserved_diagnostics(&traj, SystemKind::Original);
        assert!(diag.max_hamiltonian_drift <= 1e-8, "drift {}", diag.max_hamiltonian_drift);
        assert!(diag.max_invariant_drift.unwrap() <= 1e-8);

        let traj = integrate_rkf45(rhs_nilpotent, &example1(), PI, &opts).unwrap();
        let diag = conserved_diagnostics(&traj, SystemKind::Nilpotent);
        assert!(diag.max_hamiltonian_drift <= 1e-8);
        // h3 is carried exactly: its derivative is identically zero.
        assert!(diag.max_invariant_drift.unwrap() <= 1e-10);
    }

    #[test]
    fn arclength_condition_is_preserved() {
        let traj =
            integrate_rkf45(rhs_original, &example1(), PI, &SolverOptions::default()).unwrap();
        assert!(example1().is_arclength(1e-12));
        for s in &traj.states {
            assert!(s.is_arclength(1e-8));
        }
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let traj =
            integrate_rkf45(rhs_original, &example1(), PI, &SolverOptions::default()).unwrap();
        let end = *traj.end();
        let back = integrate_rkf45(
            |s| {
                let d = rhs_original(s);
                [-d[0], -d[1], -d[2], -d[3], -d[4], -d[5]]
            },
            &end,
            PI,
            &SolverOptions::default(),
        )
        .unwrap();
        let s0 = example1().to_array();
        let got = back.end().to_array();
        for (a, b) in s0.iter().zip(got) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn tighter_tolerance_does_not_worsen_endpoint() {
        let reference = integrate_rkf45(
            rhs_original,
            &example1(),
            PI,
            &SolverOptions {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        let ref_end = reference.end().to_array();
        let err_at = |rel: f64| {
            let traj = integrate_rkf45(
                rhs_original,
                &example1(),
                PI,
                &SolverOptions {
                    rel_tol: rel,
                    abs_tol: rel * 1e-2,
                    ..SolverOptions::default()
                },
            )
            .unwrap();
            traj.end()
                .to_array()
                .iter()
                .zip(ref_end)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        };
        let errs = [err_at(1e-5), err_at(1e-7), err_at(1e-9)];
        assert!(errs[1] <= errs[0] * 1.1, "{errs:?}");
        assert!(errs[2] <= errs[1] * 1.1, "{errs:?}");
    }

    #[test]
    fn blowup_reports_underflow_with_partial_trajectory() {
        // ẋ = x² from x(0) = 1 blows up at t = 1.
        let s0 = ExtremalState::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let result = integrate_rkf45(
            |s| [s.x * s.x, 0.0, 0.0, 0.0, 0.0, 0.0],
            &s0,
            1.2,
            &SolverOptions::default(),
        );
        match result {
            Err(SolverError::StepUnderflow { t, partial, .. }) => {
                assert!(t <= 1.01, "underflow should occur near the pole, got t = {t}");
                assert!(partial.diagnostics.step_underflow);
                assert!(partial.len() >= 2);
            }
            Err(SolverError::NonFinite { t }) => {
                assert!(t <= 1.01);
            }
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let s0 = example1();
        assert!(matches!(
            integrate_rkf45(rhs_original, &s0, 0.0, &SolverOptions::default()),
            Err(SolverError::BadHorizon(_))
        ));
        assert!(matches!(
            integrate_rkf45(rhs_original, &s0, -1.0, &SolverOptions::default()),
            Err(SolverError::BadHorizon(_))
        ));
        let bad = SolverOptions {
            rel_tol: 0.0,
            ..SolverOptions::default()
        };
        assert!(matches!(
            integrate_rkf45(rhs_original, &s0, 1.0, &bad),
            Err(SolverError::BadTolerance)
        ));
    }

    #[test]
    fn max_step_is_honored() {
        let opts = SolverOptions {
            max_step: Some(0.01),
            ..SolverOptions::default()
        };
        let traj = integrate_rkf45(rhs_original, &example1(), 1.0, &opts).unwrap();
        for w in traj.times.windows(2) {
            assert!(w[1] - w[0] <= 0.01 + 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let opts = SolverOptions {
            grid: Some(17),
            ..SolverOptions::default()
        };
        let traj = integrate_rkf45(rhs_original, &example1(), 1.0, &opts).unwrap();
        let text = traj.to_csv_string();
        assert!(text.starts_with(CSV_HEADER));
        let back = Trajectory::from_csv(text.as_bytes()).unwrap();
        assert_eq!(traj.times, back.times);
        assert_eq!(traj.states, back.states);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(Trajectory::from_csv("nonsense\n1,2\n".as_bytes()).is_err());
        let wrong_header = "t,x,y,theta,h1,h2,h4\n0,0,0,0,0,0,0\n1,0,0,0,0,0,0\n";
        assert!(Trajectory::from_csv(wrong_header.as_bytes()).is_err());
    }
}
