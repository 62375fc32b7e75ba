//! Degree-by-degree prolongation of graded Lie algebras.
//!
//! Starting from a negatively graded nilpotent algebra together with a
//! degree-zero isotropy algebra, each step adjoins the space of
//! degree-`p` derivation-compatible maps: linear `u` sending `g^d` to
//! `g^{d+p}` on the negative part with
//! `u([v, w]) = [u(v), w] + [v, u(w)]` for all negative `v, w`. The
//! negative part must be fundamental (generated by `g^-1`); then a zero
//! piece at one degree forces zero at every higher degree, so the
//! computation terminates by itself whenever the full algebra is
//! finite-dimensional.
//!
//! All linear algebra is exact over the rationals, and the assembled
//! algebra is re-validated wholesale (antisymmetry, Jacobi, grading) as
//! the final consistency gate.

use crate::exact::{self, Rat};
use crate::lie::{AlgebraElement, LieError, StructureConstants};
use crate::vecfield::VectorField;
use num_traits::Zero;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TanakaError {
    #[error("input algebra carries no grading")]
    MissingGrading,
    #[error("input degrees must be ≤ 0, found {0}")]
    PositiveInputDegree(i64),
    #[error("degree {0} is not spanned by brackets with degree -1: the negative part is not fundamental")]
    NotFundamental(i64),
    #[error("bracket [{a}, {b}] does not land in the computed algebra")]
    Unresolvable { a: String, b: String },
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// A graded algebra under construction: exact structure constants plus a
/// degree for every basis element. Elements are appended in order of
/// increasing degree as prolongation proceeds.
#[derive(Debug, Clone)]
pub struct GradedAlgebraState {
    degrees: Vec<i64>,
    labels: Vec<String>,
    c: Vec<Vec<Vec<Rat>>>,
}

impl GradedAlgebraState {
    /// Adopts a validated graded algebra with degrees in `{−μ, …, 0}`
    /// whose negative part is fundamental.
    pub fn from_structure(sc: &StructureConstants) -> Result<Self, TanakaError> {
        let grading = sc.grading().ok_or(TanakaError::MissingGrading)?;
        if let Some(&d) = grading.iter().find(|&&d| d > 0) {
            return Err(TanakaError::PositiveInputDegree(d));
        }
        let dim = sc.dim();
        let state = Self {
            degrees: grading.to_vec(),
            labels: sc.labels().to_vec(),
            c: (0..dim)
                .map(|i| (0..dim).map(|j| sc.bracket_basis(i, j).to_vec()).collect())
                .collect(),
        };
        // Fundamentality: each g^d (d < −1) must be spanned by brackets
        // of g^-1 with g^{d+1}.
        let min_deg = state.degrees.iter().copied().min().unwrap_or(0);
        for d in (min_deg..=-2).rev() {
            let piece = state.indices_of_degree(d);
            if piece.is_empty() {
                continue;
            }
            let mut spans = Vec::new();
            for &a in &state.indices_of_degree(-1) {
                for &b in &state.indices_of_degree(d + 1) {
                    spans.push(state.c[a][b].clone());
                }
            }
            if exact::rank(spans) != piece.len() {
                return Err(TanakaError::NotFundamental(d));
            }
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn indices_of_degree(&self, d: i64) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degrees[i] == d).collect()
    }

    pub fn max_degree(&self) -> i64 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    fn add_element(&mut self, degree: i64, label: String) {
        let n = self.dim();
        for row in &mut self.c {
            for cell in row.iter_mut() {
                cell.push(Rat::zero());
            }
            row.push(vec![Rat::zero(); n + 1]);
        }
        self.c.push(vec![vec![Rat::zero(); n + 1]; n + 1]);
        self.degrees.push(degree);
        self.labels.push(label);
    }

    /// Sets `[e_i, e_j]` to the given coordinate vector (and the
    /// antisymmetric partner).
    fn set_bracket(&mut self, i: usize, j: usize, v: Vec<Rat>) {
        assert_eq!(v.len(), self.dim());
        self.c[j][i] = v.iter().map(|x| -x.clone()).collect();
        self.c[i][j] = v;
    }

    /// `[e_a, w]` for a coordinate vector `w`.
    fn bracket_unit(&self, a: usize, w: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.dim()];
        for (j, wj) in w.iter().enumerate() {
            if wj.is_zero() {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                let term = wj * &self.c[a][j][k];
                *o = o.clone() + term;
            }
        }
        out
    }

    /// Full bilinear bracket of two coordinate vectors.
    fn bracket_vec(&self, x: &[Rat], y: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.dim()];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let part = self.bracket_unit(i, y);
            for (o, p) in out.iter_mut().zip(part) {
                let term = xi * &p;
                *o = o.clone() + term;
            }
        }
        out
    }

    /// Freezes the state into a fully validated structure-constant
    /// algebra.
    pub fn to_structure(&self) -> Result<StructureConstants, LieError> {
        StructureConstants::from_full_table(
            self.c.clone(),
            Some(self.labels.clone()),
            Some(self.degrees.clone()),
        )
    }
}

/// Layout of the parameter space of a degree-`p` map: one block of
/// unknowns per negative basis element, holding its image coordinates.
struct Layout {
    blocks: Vec<Block>,
    n_unknowns: usize,
}

struct Block {
    elem: usize,
    targets: Vec<usize>,
    offset: usize,
}

impl Layout {
    fn for_degree(state: &GradedAlgebraState, p: i64) -> Self {
        let mut blocks = Vec::new();
        let mut offset = 0;
        for e in (0..state.dim()).filter(|&i| state.degrees[i] < 0) {
            let targets = state.indices_of_degree(state.degrees[e] + p);
            let len = targets.len();
            blocks.push(Block {
                elem: e,
                targets,
                offset,
            });
            offset += len;
        }
        Self {
            blocks,
            n_unknowns: offset,
        }
    }

    fn block_of(&self, elem: usize) -> &Block {
        self.blocks
            .iter()
            .find(|b| b.elem == elem)
            .expect("negative element has a block")
    }

    /// The action of an existing degree-`p` element as a parameter
    /// vector in this layout.
    fn action_vector(&self, state: &GradedAlgebraState, f: usize) -> Vec<Rat> {
        let mut w = vec![Rat::zero(); self.n_unknowns];
        for b in &self.blocks {
            for (m, &t) in b.targets.iter().enumerate() {
                w[b.offset + m] = state.c[f][b.elem][t].clone();
            }
        }
        w
    }
}

/// Adjoins the next degree and returns its dimension. Brackets of the
/// new elements with negative degrees encode their defining maps;
/// brackets with degree zero follow from the derivation rule.
pub fn prolong_step(state: &mut GradedAlgebraState) -> Result<usize, TanakaError> {
    let p = state.max_degree().max(0) + 1;
    let negs: Vec<usize> = (0..state.dim()).filter(|&i| state.degrees[i] < 0).collect();
    let layout = Layout::for_degree(state, p);
    if layout.n_unknowns == 0 {
        return Ok(0);
    }

    // One vector equation per unordered negative pair.
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for (ii, &ei) in negs.iter().enumerate() {
        for &ej in &negs[ii + 1..] {
            let t_deg = state.degrees[ei] + state.degrees[ej] + p;
            let targets = state.indices_of_degree(t_deg);
            if targets.is_empty() {
                continue;
            }
            let mut eq = vec![vec![Rat::zero(); layout.n_unknowns]; targets.len()];
            // u([e_i, e_j]): the image block of each bracket component
            // shares the equation's target coordinates.
            for (k, coef) in state.c[ei][ej].clone().iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let bk = layout.block_of(k);
                for m in 0..bk.targets.len() {
                    eq[m][bk.offset + m] = eq[m][bk.offset + m].clone() + coef;
                }
            }
            // −[u(e_i), e_j] and −[e_i, u(e_j)] = +[u(e_j), e_i].
            let bi = layout.block_of(ei);
            for (m, &fm) in bi.targets.iter().enumerate() {
                for (r, &tk) in targets.iter().enumerate() {
                    let coef = &state.c[fm][ej][tk];
                    if !coef.is_zero() {
                        eq[r][bi.offset + m] = eq[r][bi.offset + m].clone() - coef;
                    }
                }
            }
            let bj = layout.block_of(ej);
            for (m, &fm) in bj.targets.iter().enumerate() {
                for (r, &tk) in targets.iter().enumerate() {
                    let coef = &state.c[fm][ei][tk];
                    if !coef.is_zero() {
                        eq[r][bj.offset + m] = eq[r][bj.offset + m].clone() + coef;
                    }
                }
            }
            rows.extend(eq);
        }
    }

    let kernel = exact::kernel_basis(&rows, layout.n_unknowns);
    let dim_new = kernel.len();
    if dim_new == 0 {
        return Ok(0);
    }
    let new_start = state.dim();
    for r in 0..dim_new {
        state.add_element(p, format!("P{p}_{r}"));
    }
    for (r, kv) in kernel.iter().enumerate() {
        let u = new_start + r;
        for b in &layout.blocks {
            let mut v = vec![Rat::zero(); state.dim()];
            for (m, &fm) in b.targets.iter().enumerate() {
                v[fm] = kv[b.offset + m].clone();
            }
            state.set_bracket(u, b.elem, v);
        }
    }

    // [a, u] for a of degree zero: the map v ↦ [a, u(v)] − u([a, v]),
    // re-expressed in the new piece.
    let kernel_cols: Vec<Vec<Rat>> = (0..layout.n_unknowns)
        .map(|i| kernel.iter().map(|kv| kv[i].clone()).collect())
        .collect();
    for a in state.indices_of_degree(0) {
        for r in 0..dim_new {
            let u = new_start + r;
            let mut w = vec![Rat::zero(); layout.n_unknowns];
            for b in &layout.blocks {
                let ue = state.c[u][b.elem].clone();
                let term1 = state.bracket_unit(a, &ue);
                let mut diff = term1;
                for (k, coef) in state.c[a][b.elem].clone().iter().enumerate() {
                    if coef.is_zero() {
                        continue;
                    }
                    for (d, uk) in diff.iter_mut().zip(&state.c[u][k]) {
                        let term = coef * uk;
                        *d = d.clone() - term;
                    }
                }
                for (m, &fm) in b.targets.iter().enumerate() {
                    w[b.offset + m] = diff[fm].clone();
                }
            }
            let lambda = exact::solve_unique(&kernel_cols, &w).ok_or_else(|| {
                TanakaError::Unresolvable {
                    a: state.labels[a].clone(),
                    b: state.labels[u].clone(),
                }
            })?;
            let mut v = vec![Rat::zero(); state.dim()];
            for (s, l) in lambda.into_iter().enumerate() {
                v[new_start + s] = l;
            }
            state.set_bracket(a, u, v);
        }
    }
    Ok(dim_new)
}

/// Fills the brackets between positive-degree pieces, in increasing
/// total degree, using the Jacobi identity against the negative part:
/// `[u, v]` acts on `e` by `[[u, e], v] + [u, [v, e]]`.
fn resolve_positive_brackets(state: &mut GradedAlgebraState) -> Result<(), TanakaError> {
    let maxd = state.max_degree();
    for total in 2..=(2 * maxd.max(0)) {
        for adeg in 1..total {
            let bdeg = total - adeg;
            if bdeg < adeg || adeg > maxd || bdeg > maxd {
                continue;
            }
            for u in state.indices_of_degree(adeg) {
                for v in state.indices_of_degree(bdeg) {
                    if adeg == bdeg && v <= u {
                        continue;
                    }
                    resolve_pair(state, u, v, total)?;
                }
            }
        }
    }
    Ok(())
}

fn resolve_pair(
    state: &mut GradedAlgebraState,
    u: usize,
    v: usize,
    total: i64,
) -> Result<(), TanakaError> {
    let layout = Layout::for_degree(state, total);
    let mut w = vec![Rat::zero(); layout.n_unknowns];
    let mut unit_v = vec![Rat::zero(); state.dim()];
    unit_v[v] = num_traits::One::one();
    for b in &layout.blocks {
        let ue = state.c[u][b.elem].clone();
        let first = state.bracket_vec(&ue, &unit_v);
        let ve = state.c[v][b.elem].clone();
        let second = state.bracket_unit(u, &ve);
        for (m, &fm) in b.targets.iter().enumerate() {
            w[b.offset + m] = first[fm].clone() + second[fm].clone();
        }
    }
    let piece = state.indices_of_degree(total);
    if piece.is_empty() {
        if w.iter().any(|x| !x.is_zero()) {
            return Err(TanakaError::Unresolvable {
                a: state.labels[u].clone(),
                b: state.labels[v].clone(),
            });
        }
        return Ok(());
    }
    let cols: Vec<Vec<Rat>> = (0..layout.n_unknowns)
        .map(|i| {
            piece
                .iter()
                .map(|&f| layout.action_vector(state, f)[i].clone())
                .collect()
        })
        .collect();
    let mu = exact::solve_unique(&cols, &w).ok_or_else(|| TanakaError::Unresolvable {
        a: state.labels[u].clone(),
        b: state.labels[v].clone(),
    })?;
    let mut out = vec![Rat::zero(); state.dim()];
    for (s, &f) in piece.iter().enumerate() {
        out[f] = mu[s].clone();
    }
    state.set_bracket(u, v, out);
    Ok(())
}

/// Outcome of a prolongation run.
#[derive(Debug, Clone)]
pub struct ProlongationResult {
    /// `(degree, dimension)` for every piece, ascending.
    pub dims_by_degree: Vec<(i64, usize)>,
    /// The completed algebra, validated wholesale. `None` when the run
    /// was truncated at `max_degree`: a truncation of an infinite-type
    /// prolongation has unresolvable high brackets and is not itself a
    /// Lie algebra.
    pub algebra: Option<StructureConstants>,
    /// Whether a vanishing piece ended the run. Once one degree is
    /// empty every later one is (the negative part is fundamental), so
    /// `true` means the full prolongation was computed.
    pub complete: bool,
}

/// Prolongs `input` degree by degree until a piece vanishes or
/// `max_degree` is reached. On termination the positive-positive
/// brackets are resolved and the whole table is validated; a truncated
/// run reports dimensions only.
pub fn prolong(input: &StructureConstants, max_degree: i64) -> Result<ProlongationResult, TanakaError> {
    let mut state = GradedAlgebraState::from_structure(input)?;
    let mut complete = false;
    while state.max_degree().max(0) < max_degree {
        if prolong_step(&mut state)? == 0 {
            complete = true;
            break;
        }
    }
    if !complete {
        // Probe one degree past the cap on a scratch copy: if that
        // piece vanishes, the cap was not actually a truncation. (A
        // zero step leaves the state untouched, so the copy is
        // discarded either way.)
        let mut probe = state.clone();
        if prolong_step(&mut probe)? == 0 {
            complete = true;
        }
    }
    let algebra = if complete {
        resolve_positive_brackets(&mut state)?;
        Some(state.to_structure()?)
    } else {
        None
    };
    let mut degrees: Vec<i64> = state.degrees.clone();
    degrees.sort_unstable();
    degrees.dedup();
    let dims_by_degree = degrees
        .into_iter()
        .map(|d| (d, state.indices_of_degree(d).len()))
        .collect();
    Ok(ProlongationResult {
        dims_by_degree,
        algebra,
        complete,
    })
}

/// The bundled graded input: the disc's nilpotent symbol with its
/// two-dimensional reduced isotropy.
pub fn bundled_symbol_input() -> StructureConstants {
    StructureConstants::from_json(include_str!("../fixtures/disc_symbol.json"))
        .expect("bundled fixture is valid")
}

/// An exact change of basis identifying a prolonged algebra with a
/// reference table.
#[derive(Debug, Clone)]
pub struct BasisMatch {
    /// Column `j` holds the coordinates of reference element `j` in the
    /// prolonged basis.
    pub matrix: Vec<Vec<Rat>>,
    /// Whether every reference bracket is reproduced exactly.
    pub verified: bool,
}

/// Matches `prolonged` against `reference`, keeping the identity on
/// non-positive degrees and solving for the positive pieces from their
/// actions on the negative part.
pub fn match_to_reference(
    prolonged: &StructureConstants,
    reference: &StructureConstants,
) -> Result<BasisMatch, TanakaError> {
    let n = reference.dim();
    if prolonged.dim() != n {
        return Err(TanakaError::Unresolvable {
            a: format!("dim {}", prolonged.dim()),
            b: format!("dim {n}"),
        });
    }
    let ref_grading = reference.grading().ok_or(TanakaError::MissingGrading)?;
    let pro_grading = prolonged.grading().ok_or(TanakaError::MissingGrading)?;
    if ref_grading != pro_grading {
        return Err(TanakaError::Unresolvable {
            a: format!("grading {pro_grading:?}"),
            b: format!("grading {ref_grading:?}"),
        });
    }
    let negatives: Vec<usize> = (0..n).filter(|&i| ref_grading[i] < 0).collect();
    // Columns of the change of basis, filled in ascending degree.
    let mut phi: Vec<Option<Vec<Rat>>> = vec![None; n];
    for (j, &d) in ref_grading.iter().enumerate() {
        if d <= 0 {
            let mut col = exact::zeros(n);
            col[j] = num_traits::One::one();
            phi[j] = Some(col);
        }
    }
    let mut positive: Vec<usize> = (0..n).filter(|&i| ref_grading[i] > 0).collect();
    positive.sort_by_key(|&i| ref_grading[i]);
    for j in positive {
        let d = ref_grading[j];
        let unknowns: Vec<usize> = (0..n).filter(|&i| pro_grading[i] == d).collect();
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        let mut rhs: Vec<Rat> = Vec::new();
        for &e in &negatives {
            // [φ(e_j), e] in the prolonged algebra must equal
            // φ([e_j, e]) computed from already-known columns.
            let mut want = exact::zeros(n);
            for (k, coef) in reference.bracket_basis(j, e).iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let col = phi[k].as_ref().ok_or_else(|| TanakaError::Unresolvable {
                    a: reference.labels()[j].clone(),
                    b: reference.labels()[k].clone(),
                })?;
                for (wc, cc) in want.iter_mut().zip(col) {
                    let term = coef * cc;
                    *wc = wc.clone() + term;
                }
            }
            for k in 0..n {
                rows.push(
                    unknowns
                        .iter()
                        .map(|&f| prolonged.constant(f, e, k).clone())
                        .collect(),
                );
                rhs.push(want[k].clone());
            }
        }
        let sol = exact::solve_unique(&rows, &rhs).ok_or_else(|| TanakaError::Unresolvable {
            a: reference.labels()[j].clone(),
            b: "action matching".into(),
        })?;
        let mut col = exact::zeros(n);
        for (s, &f) in unknowns.iter().enumerate() {
            col[f] = sol[s].clone();
        }
        phi[j] = Some(col);
    }
    let matrix: Vec<Vec<Rat>> = phi.into_iter().map(|c| c.expect("all columns solved")).collect();
    // Full bracket comparison.
    let mut verified = true;
    'outer: for i in 0..n {
        for j in i + 1..n {
            let lhs = prolonged
                .bracket(
                    &AlgebraElement::new(matrix[i].clone()),
                    &AlgebraElement::new(matrix[j].clone()),
                )?
                .coeffs;
            let mut rhs = exact::zeros(n);
            for (k, coef) in reference.bracket_basis(i, j).iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                for (rc, mc) in rhs.iter_mut().zip(&matrix[k]) {
                    let term = coef * mc;
                    *rc = rc.clone() + term;
                }
            }
            if lhs != rhs {
                verified = false;
                break 'outer;
            }
        }
    }
    Ok(BasisMatch { matrix, verified })
}

/// JSON summary of a prolongation run: dimensions per degree, the exact
/// Killing determinant, and the full bracket table when the run
/// terminated.
pub fn prolongation_report(result: &ProlongationResult) -> serde_json::Value {
    let total: usize = result.dims_by_degree.iter().map(|&(_, n)| n).sum();
    json!({
        "schema_version": 1,
        "dims_by_degree": result.dims_by_degree,
        "total_dim": total,
        "complete": result.complete,
        "killing_determinant": result
            .algebra
            .as_ref()
            .map(|a| exact::det(&a.killing_form()).to_string()),
        "algebra": result.algebra.as_ref().map(|a| {
            serde_json::from_str::<serde_json::Value>(&a.to_json())
                .expect("bracket table serializes")
        }),
    })
}

/// For each realization field, the metric-structure symmetry field it is
/// proportional to and the constant of proportionality, found by least
/// squares over the sample points (smallest residual wins).
pub fn realization_multiples(points: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let fields = realization_fields();
    fields
        .iter()
        .map(|y| {
            let mut best = (0usize, 0.0f64, f64::INFINITY);
            for k in 0..=8 {
                let t = crate::symmetry::symmetry_field(k);
                let mut num = 0.0;
                let mut den = 0.0;
                for p in points {
                    for (a, b) in y.at(p).iter().zip(t.at(p)) {
                        num += a * b;
                        den += b * b;
                    }
                }
                if den == 0.0 {
                    continue;
                }
                let c = num / den;
                let mut res = 0.0;
                for p in points {
                    for (a, b) in y.at(p).iter().zip(t.at(p)) {
                        res += (a - c * b).powi(2);
                    }
                }
                if res < best.2 {
                    best = (k, c, res);
                }
            }
            (best.0, best.1)
        })
        .collect()
}

/// Vector-field realization of the completed symmetry algebra on the
/// `(x, y, θ)` chart. Bracketing these fields reverses the sign of the
/// abstract table (the realization is an anti-homomorphism).
pub fn realization_fields() -> Vec<VectorField> {
    vec![
        VectorField::constant("Y1", vec![0.0, 1.0, 0.0]),
        VectorField::new(3, "Y2", |p| vec![0.0, p[0], 1.0]),
        VectorField::constant("Y3", vec![1.0, 0.0, 0.0]),
        VectorField::new(3, "Y4", |p| vec![p[0], 2.0 * p[1], p[2]]),
        VectorField::new(3, "Y5", |p| vec![-p[0], 0.0, p[2]]),
        VectorField::new(3, "Y6", |p| vec![-2.0 * p[1], 0.0, 2.0 * p[2] * p[2]]),
        VectorField::new(3, "Y7", |p| {
            vec![
                2.0 * p[0] * p[0],
                2.0 * p[0] * p[1],
                2.0 * p[1] - 2.0 * p[0] * p[2],
            ]
        }),
        VectorField::new(3, "Y8", |p| {
            vec![
                2.0 * p[0] * p[1],
                2.0 * p[1] * p[1],
                2.0 * p[1] * p[2] - 2.0 * p[0] * p[2] * p[2],
            ]
        }),
    ]
}
