//! Finite-dimensional Lie algebras given by exact structure constants.
//!
//! An algebra is stored as the full antisymmetric table
//! `c[i][j][k]` = coefficient of `e_k` in `[e_i, e_j]`, with rational
//! entries. Construction validates antisymmetry, the Jacobi identity, and
//! (when a grading is declared) grading compatibility, all in exact
//! arithmetic; an invalid table is unrepresentable.
//!
//! Floats enter only through the explicit `*_f64` evaluation helpers; every
//! structural query (series, Killing determinant, signature) stays exact.

use crate::exact::{
    self, format_rat, mat_mul, parse_rat, rat_int, row_space_basis, zeros, Rat,
};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("element has {got} coefficients, algebra has dimension {dim}")]
    DimensionMismatch { dim: usize, got: usize },
    #[error("bracket entry ({i},{j}) out of range for dimension {dim}")]
    IndexOutOfRange { i: usize, j: usize, dim: usize },
    #[error("bracket pair ({i},{j}) listed twice")]
    DuplicatePair { i: usize, j: usize },
    #[error("antisymmetry violated at c[{i}][{j}][{k}]")]
    Antisymmetry { i: usize, j: usize, k: usize },
    #[error("Jacobi identity fails on basis triple (e{}, e{}, e{})", i + 1, j + 1, k + 1)]
    Jacobi { i: usize, j: usize, k: usize },
    #[error("grading has {got} degrees, algebra has dimension {dim}")]
    GradingLength { dim: usize, got: usize },
    #[error(
        "bracket [e{}, e{}] has a component on e{} outside degree {deg}",
        i + 1, j + 1, k + 1
    )]
    GradingViolated { i: usize, j: usize, k: usize, deg: i64 },
    #[error("structure constant JSON: {0}")]
    Json(String),
    #[error("rational literal: {0}")]
    Rational(#[from] exact::ParseRatError),
}

/// Element of a structure-constant algebra, as exact coordinates in the
/// defining basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    pub coeffs: Vec<Rat>,
}

impl AlgebraElement {
    pub fn new(coeffs: Vec<Rat>) -> Self {
        Self { coeffs }
    }

    /// Element with integer coordinates.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&n| rat_int(n)).collect())
    }

    /// Basis element `e_idx` (0-based) in dimension `dim`.
    pub fn basis(dim: usize, idx: usize) -> Self {
        let mut coeffs = zeros(dim);
        coeffs[idx] = Rat::one();
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }
}

/// Exact bracket table of a finite-dimensional Lie algebra, with optional
/// integer grading.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    /// Full antisymmetric table: `c[i][j][k]` = coefficient of `e_k` in
    /// `[e_i, e_j]`; 0-based indices.
    c: Vec<Vec<Vec<Rat>>>,
    basis_labels: Vec<String>,
    grading: Option<Vec<i64>>,
}

/// Sparse bracket specification: `(i, j, [(k, coeff), ...])` meaning
/// `[e_i, e_j] = Σ coeff·e_k`, indices 0-based, one entry per unordered
/// pair. The antisymmetric counterpart is filled in automatically.
pub type BracketSpec<'a> = &'a [(usize, usize, &'a [(usize, Rat)])];

impl StructureConstants {
    /// Builds and validates an algebra from a sparse bracket list.
    pub fn new(
        dim: usize,
        brackets: BracketSpec,
        labels: Option<Vec<String>>,
        grading: Option<Vec<i64>>,
    ) -> Result<Self, LieError> {
        let mut c = vec![vec![zeros(dim); dim]; dim];
        let mut seen = std::collections::HashSet::new();
        for &(i, j, terms) in brackets {
            if i >= dim || j >= dim {
                return Err(LieError::IndexOutOfRange { i, j, dim });
            }
            if i == j {
                // [e_i, e_i] = 0 by antisymmetry; a nonzero entry is a typo.
                if terms.iter().any(|(_, v)| !v.is_zero()) {
                    return Err(LieError::Antisymmetry { i, j, k: terms[0].0 });
                }
                continue;
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(LieError::DuplicatePair { i, j });
            }
            for (k, v) in terms {
                if *k >= dim {
                    return Err(LieError::IndexOutOfRange { i, j: *k, dim });
                }
                c[i][j][*k] = v.clone();
                c[j][i][*k] = -v.clone();
            }
        }
        Self::from_full_table(c, labels, grading)
    }

    /// Builds and validates an algebra from a full three-index table.
    pub fn from_full_table(
        c: Vec<Vec<Vec<Rat>>>,
        labels: Option<Vec<String>>,
        grading: Option<Vec<i64>>,
    ) -> Result<Self, LieError> {
        let dim = c.len();
        let basis_labels = match labels {
            Some(l) => {
                assert_eq!(l.len(), dim, "label count must match dimension");
                l
            }
            None => (1..=dim).map(|i| format!("e{i}")).collect(),
        };
        if let Some(g) = &grading {
            if g.len() != dim {
                return Err(LieError::GradingLength { dim, got: g.len() });
            }
        }
        let alg = Self {
            dim,
            c,
            basis_labels,
            grading,
        };
        alg.validate()?;
        Ok(alg)
    }

    fn validate(&self) -> Result<(), LieError> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.c[i][j][k] != -self.c[j][i][k].clone() {
                        return Err(LieError::Antisymmetry { i, j, k });
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for l in 0..n {
                        let mut s = Rat::zero();
                        for m in 0..n {
                            s += &self.c[i][j][m] * &self.c[m][k][l]
                                + &self.c[j][k][m] * &self.c[m][i][l]
                                + &self.c[k][i][m] * &self.c[m][j][l];
                        }
                        if !s.is_zero() {
                            return Err(LieError::Jacobi { i, j, k });
                        }
                    }
                }
            }
        }
        if let Some(g) = &self.grading {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if !self.c[i][j][k].is_zero() && g[k] != g[i] + g[j] {
                            return Err(LieError::GradingViolated {
                                i,
                                j,
                                k,
                                deg: g[i] + g[j],
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn grading(&self) -> Option<&[i64]> {
        self.grading.as_deref()
    }

    /// 0-based basis indices carrying the given degree.
    pub fn indices_of_degree(&self, deg: i64) -> Vec<usize> {
        match &self.grading {
            Some(g) => (0..self.dim).filter(|&i| g[i] == deg).collect(),
            None => Vec::new(),
        }
    }

    /// Structure constant `c[i][j][k]`, 0-based.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.c[i][j][k]
    }

    /// Coordinates of `[e_i, e_j]`, 0-based.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[Rat] {
        &self.c[i][j]
    }

    fn check_len(&self, e: &AlgebraElement) -> Result<(), LieError> {
        if e.coeffs.len() != self.dim {
            return Err(LieError::DimensionMismatch {
                dim: self.dim,
                got: e.coeffs.len(),
            });
        }
        Ok(())
    }

    /// Exact bracket `[a, b]`.
    pub fn bracket(
        &self,
        a: &AlgebraElement,
        b: &AlgebraElement,
    ) -> Result<AlgebraElement, LieError> {
        self.check_len(a)?;
        self.check_len(b)?;
        let mut out = zeros(self.dim);
        for (i, ai) in a.coeffs.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let f = ai * bj;
                for k in 0..self.dim {
                    if !self.c[i][j][k].is_zero() {
                        out[k] += &f * &self.c[i][j][k];
                    }
                }
            }
        }
        Ok(AlgebraElement::new(out))
    }

    /// Bracket of float coordinate vectors, for cross-checks against the
    /// numerical modules.
    pub fn bracket_f64(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.dim);
        assert_eq!(b.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                if b[j] == 0.0 {
                    continue;
                }
                for k in 0..self.dim {
                    let cijk = &self.c[i][j][k];
                    if !cijk.is_zero() {
                        out[k] += a[i] * b[j] * rat_to_f64(cijk);
                    }
                }
            }
        }
        out
    }

    /// Matrix `M` of `ad(a)` with `[a, e_j] = Σ_k M[k][j]·e_k`: column `j`
    /// holds the coordinates of `[a, e_j]`. This row/column convention
    /// reproduces the printed adjoint matrices of the disc and Heisenberg
    /// vertical systems verbatim (see the unit tests).
    pub fn adjoint_matrix(&self, a: &AlgebraElement) -> Result<Vec<Vec<Rat>>, LieError> {
        self.check_len(a)?;
        let mut m = vec![zeros(self.dim); self.dim];
        for j in 0..self.dim {
            let col = self.bracket(a, &AlgebraElement::basis(self.dim, j))?;
            for (k, v) in col.coeffs.into_iter().enumerate() {
                m[k][j] = v;
            }
        }
        Ok(m)
    }

    /// `ad(e_i)` as an exact matrix, same convention as [`adjoint_matrix`].
    ///
    /// [`adjoint_matrix`]: Self::adjoint_matrix
    fn ad_basis(&self, i: usize) -> Vec<Vec<Rat>> {
        let mut m = vec![zeros(self.dim); self.dim];
        for j in 0..self.dim {
            for k in 0..self.dim {
                m[k][j] = self.c[i][j][k].clone();
            }
        }
        m
    }

    /// Span of `[A, B]` for subspaces given by bases of coordinate vectors.
    fn bracket_span(&self, a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
        let mut gens = Vec::new();
        for u in a {
            for v in b {
                let w = self
                    .bracket(&AlgebraElement::new(u.clone()), &AlgebraElement::new(v.clone()))
                    .expect("dimensions fixed by construction");
                if !w.is_zero() {
                    gens.push(w.coeffs);
                }
            }
        }
        row_space_basis(gens)
    }

    /// Dimensions of the derived series `g ⊇ [g,g] ⊇ [[g,g],[g,g]] ⊇ …`
    /// until stabilization.
    pub fn derived_series(&self) -> Vec<usize> {
        let mut dims = vec![self.dim];
        let mut cur: Vec<Vec<Rat>> = exact::identity(self.dim);
        loop {
            let next = self.bracket_span(&cur, &cur);
            if next.len() == *dims.last().unwrap() {
                break;
            }
            dims.push(next.len());
            if next.is_empty() {
                break;
            }
            cur = next;
        }
        dims
    }

    /// Dimensions of the lower central series `g ⊇ [g,g] ⊇ [g,[g,g]] ⊇ …`
    /// until stabilization.
    pub fn lower_central_series(&self) -> Vec<usize> {
        let full = exact::identity(self.dim);
        let mut dims = vec![self.dim];
        let mut cur = full.clone();
        loop {
            let next = self.bracket_span(&full, &cur);
            if next.len() == *dims.last().unwrap() {
                break;
            }
            dims.push(next.len());
            if next.is_empty() {
                break;
            }
            cur = next;
        }
        dims
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series().last() == Some(&0)
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().last() == Some(&0)
    }

    /// Killing form `K[i][j] = trace(ad(e_i)·ad(e_j))`, exact.
    pub fn killing_form(&self) -> Vec<Vec<Rat>> {
        let ads: Vec<Vec<Vec<Rat>>> = (0..self.dim).map(|i| self.ad_basis(i)).collect();
        let mut k = vec![zeros(self.dim); self.dim];
        for i in 0..self.dim {
            for j in i..self.dim {
                let prod = mat_mul(&ads[i], &ads[j]);
                let tr = (0..self.dim).fold(Rat::zero(), |acc, d| acc + &prod[d][d]);
                k[i][j] = tr.clone();
                k[j][i] = tr;
            }
        }
        k
    }

    /// Semisimplicity by Cartan's criterion: the Killing form is
    /// nondegenerate, decided exactly.
    pub fn is_semisimple(&self) -> bool {
        !exact::det(&self.killing_form()).is_zero()
    }

    /// Signature `(positive, negative, zero)` of the Killing form.
    pub fn killing_signature(&self) -> (usize, usize, usize) {
        exact::symmetric_signature(&self.killing_form())
    }

    /// Formats a coordinate vector as a signed combination of basis labels,
    /// e.g. `e4 + 3e5`, `-X2`, `(1/2)n3`, or `0`.
    pub fn format_combination(&self, coeffs: &[Rat]) -> String {
        let mut out = String::new();
        for (k, v) in coeffs.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let label = &self.basis_labels[k];
            let abs = v.abs();
            let mag = if abs.is_one() {
                label.clone()
            } else if abs.denom().is_one() {
                format!("{}{}", abs.numer(), label)
            } else {
                format!("({}){}", format_rat(&abs), label)
            };
            if out.is_empty() {
                if v.is_negative() {
                    out.push('-');
                }
            } else if v.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&mag);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Renders the full antisymmetric bracket table with aligned columns.
    pub fn multiplication_table(&self) -> String {
        let n = self.dim;
        let cells: Vec<Vec<String>> = (0..n)
            .map(|i| (0..n).map(|j| self.format_combination(&self.c[i][j])).collect())
            .collect();
        let head = "[.,.]";
        let label_w = self
            .basis_labels
            .iter()
            .map(String::len)
            .chain([head.len()])
            .max()
            .unwrap();
        let col_w: Vec<usize> = (0..n)
            .map(|j| {
                cells
                    .iter()
                    .map(|row| row[j].len())
                    .chain([self.basis_labels[j].len()])
                    .max()
                    .unwrap()
            })
            .collect();
        let mut out = format!("{head:<label_w$} |");
        for j in 0..n {
            out.push_str(&format!(" {:<1$}", self.basis_labels[j], col_w[j]));
        }
        out.push('\n');
        let total = label_w + 2 + col_w.iter().map(|w| w + 1).sum::<usize>();
        out.push_str(&"-".repeat(total));
        out.push('\n');
        for i in 0..n {
            out.push_str(&format!("{:<label_w$} |", self.basis_labels[i]));
            for j in 0..n {
                out.push_str(&format!(" {:<1$}", cells[i][j], col_w[j]));
            }
            out.push('\n');
        }
        out
    }

    /// Serializes to the interchange JSON format (1-based indices, one
    /// bracket entry per unordered pair, exact rational strings).
    pub fn to_json(&self) -> String {
        let mut brackets = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let terms: Vec<(usize, String)> = (0..self.dim)
                    .filter(|&k| !self.c[i][j][k].is_zero())
                    .map(|k| (k + 1, format_rat(&self.c[i][j][k])))
                    .collect();
                if !terms.is_empty() {
                    brackets.push((i + 1, j + 1, terms));
                }
            }
        }
        let doc = AlgebraJson {
            dim: self.dim,
            brackets,
            grading: self.grading.clone(),
            labels: Some(self.basis_labels.clone()),
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    /// Parses the interchange JSON format produced by [`to_json`]; the
    /// `labels` field is optional and defaults to `e1..en`.
    ///
    /// [`to_json`]: Self::to_json
    pub fn from_json(text: &str) -> Result<Self, LieError> {
        let doc: AlgebraJson =
            serde_json::from_str(text).map_err(|e| LieError::Json(e.to_string()))?;
        let mut spec: Vec<(usize, usize, Vec<(usize, Rat)>)> = Vec::new();
        for (i, j, terms) in &doc.brackets {
            if *i == 0 || *j == 0 {
                return Err(LieError::Json(format!(
                    "bracket indices are 1-based, got ({i},{j})"
                )));
            }
            let parsed: Result<Vec<(usize, Rat)>, LieError> = terms
                .iter()
                .map(|(k, s)| {
                    if *k == 0 {
                        return Err(LieError::Json(format!(
                            "component index is 1-based, got {k}"
                        )));
                    }
                    Ok((*k - 1, parse_rat(s)?))
                })
                .collect();
            spec.push((*i - 1, *j - 1, parsed?));
        }
        let borrowed: Vec<(usize, usize, &[(usize, Rat)])> = spec
            .iter()
            .map(|(i, j, t)| (*i, *j, t.as_slice()))
            .collect();
        StructureConstants::new(doc.dim, &borrowed, doc.labels, doc.grading)
    }
}

#[derive(Serialize, Deserialize)]
struct AlgebraJson {
    dim: usize,
    brackets: Vec<(usize, usize, Vec<(usize, String)>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grading: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("structure constants are small rationals")
}

fn one() -> Rat {
    Rat::one()
}

/// Controllability algebra of the 3-coordinate disc: basis `(X1, X2, X12)`
/// with `[X1,X2] = X12`, `[X1,X12] = −X2`. Solvable, not nilpotent.
pub fn disc_algebra() -> StructureConstants {
    StructureConstants::new(
        3,
        &[
            (0, 1, &[(2, one())]),
            (0, 2, &[(1, -one())]),
        ],
        Some(vec!["X1".into(), "X2".into(), "X12".into()]),
        None,
    )
    .expect("valid by inspection")
}

/// Controllability algebra of the 4-coordinate disc: basis
/// `(Y1, Y2, Y12, Y112)` with `[Y1,Y2] = Y12`, `[Y1,Y12] = Y112`,
/// `[Y1,Y112] = −Y12`, all other brackets zero.
pub fn disc4_algebra() -> StructureConstants {
    StructureConstants::new(
        4,
        &[
            (0, 1, &[(2, one())]),
            (0, 2, &[(3, one())]),
            (0, 3, &[(2, -one())]),
        ],
        Some(vec![
            "Y1".into(),
            "Y2".into(),
            "Y12".into(),
            "Y112".into(),
        ]),
        None,
    )
    .expect("valid by inspection")
}

/// Controllability algebra of the fixed-steering-angle car at `ℓ = 1`:
/// basis `(Zb1, Zb2, Zb12)` with `[Zb1,Zb2] = Zb12`, `[Zb2,Zb12] = Zb1`.
/// Isomorphic to [`disc_algebra`] (the ∂θ-carrying field is `Zb2`).
pub fn car_fixed_phi_algebra() -> StructureConstants {
    StructureConstants::new(
        3,
        &[
            (0, 1, &[(2, one())]),
            (1, 2, &[(0, one())]),
        ],
        Some(vec!["Zb1".into(), "Zb2".into(), "Zb12".into()]),
        None,
    )
    .expect("valid by inspection")
}

/// Heisenberg algebra: basis `(n1, n2, n3)`, only nonzero bracket
/// `[n1,n2] = n3`. Graded nilpotent with degrees `(−1, −1, −2)`.
pub fn heisenberg_algebra() -> StructureConstants {
    StructureConstants::new(
        3,
        &[(0, 1, &[(2, one())])],
        Some(vec!["n1".into(), "n2".into(), "n3".into()]),
        Some(vec![-1, -1, -2]),
    )
    .expect("valid by inspection")
}

/// The 8-dimensional graded symmetry algebra of the flat Lagrangian
/// contact structure, isomorphic to sl(3,ℝ). Basis `e1..e8` with degrees
/// `(−2, −1, −1, 0, 0, 1, 1, 2)`; `e4` is the grading element.
pub fn contact_symmetry_algebra() -> StructureConstants {
    let two = rat_int(2);
    let three = rat_int(3);
    StructureConstants::new(
        8,
        &[
            (1, 2, &[(0, one())]),
            (3, 0, &[(0, two.clone())]),
            (3, 1, &[(1, one())]),
            (3, 2, &[(2, one())]),
            (3, 5, &[(5, -one())]),
            (3, 6, &[(6, -one())]),
            (3, 7, &[(7, -two.clone())]),
            (4, 1, &[(1, one())]),
            (4, 2, &[(2, -one())]),
            (4, 5, &[(5, -one())]),
            (4, 6, &[(6, one())]),
            (5, 0, &[(2, -two.clone())]),
            (5, 1, &[(3, one()), (4, three.clone())]),
            (5, 6, &[(7, two.clone())]),
            (6, 0, &[(1, two.clone())]),
            (6, 2, &[(3, one()), (4, -three)]),
            (7, 0, &[(3, two)]),
            (7, 1, &[(6, one())]),
            (7, 2, &[(5, -one())]),
        ],
        None,
        Some(vec![-2, -1, -1, 0, 0, 1, 1, 2]),
    )
    .expect("satisfies Jacobi; checked at construction")
}
