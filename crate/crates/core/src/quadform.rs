//! Quadratic Hamiltonians as 4×4 complex symmetric coefficient matrices.
//!
//! Phase-space ordering is fixed globally as `z = (x₁, x₂, p₁, p₂)` and a
//! form stores `C` with `H(z) = ½ zᵀ C z`. Linear changes of variables are
//! stored row-wise: row `k` of a [`LinearCanonicalMap`] expresses the `k`-th
//! new coordinate as a combination of the old ones (`w = M z`), so the form
//! in the new variables is `M⁻ᵀ C M⁻¹`.
//!
//! Commutators are bilinear, `[w_a, w_b] = i (M J Mᵀ)_ab`, so a map preserves
//! the Heisenberg relations exactly when `M J Mᵀ = J`.

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, re, I, ONE, ZERO};
use crate::params::{classify, derive_all, permute, BranchLabel, CaseLabel, DerivedParams, ModelParams};

pub type CMat4 = Matrix4<Complex64>;
pub type CVec4 = Vector4<Complex64>;

pub const X1: usize = 0;
pub const X2: usize = 1;
pub const P1: usize = 2;
pub const P2: usize = 3;

/// Largest condition number accepted by [`apply_map`].
pub const MAX_CONDITION: f64 = 1e12;

pub const ORIGINAL_LABELS: [&str; 4] = ["x1", "x2", "p1", "p2"];
pub const INTERMEDIATE_LABELS: [&str; 4] = ["X'1", "X'2", "P'1", "P'2"];
pub const FINAL_LABELS: [&str; 4] = ["X1", "X2", "P1", "P2"];

/// The constant block matrix `J = [[0, I₂], [−I₂, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm;

impl SymplecticForm {
    pub fn matrix() -> CMat4 {
        let mut j = CMat4::zeros();
        j[(X1, P1)] = ONE;
        j[(X2, P2)] = ONE;
        j[(P1, X1)] = -ONE;
        j[(P2, X2)] = -ONE;
        j
    }
}

fn max_abs4(m: &CMat4) -> f64 {
    linalg::max_abs(m.iter())
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    c: CMat4,
    labels: [&'static str; 4],
}

impl QuadForm {
    /// Symmetrizes `c` on construction.
    pub fn new(c: CMat4, labels: [&'static str; 4]) -> Self {
        let c = (c + c.transpose()) * re(0.5);
        QuadForm { c, labels }
    }

    pub fn diagonal(diag: [Complex64; 4], labels: [&'static str; 4]) -> Self {
        QuadForm::new(CMat4::from_diagonal(&CVec4::from(diag)), labels)
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.c
    }

    pub fn labels(&self) -> [&'static str; 4] {
        self.labels
    }

    /// Coefficient of the monomial `z_i z_j` in `H`: `½C_ii` on the
    /// diagonal, `C_ij` off it.
    pub fn coefficient(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            self.c[(i, i)] * 0.5
        } else {
            self.c[(i, j)]
        }
    }

    /// `½ zᵀ C z` (bilinear, no conjugation).
    pub fn evaluate(&self, z: &CVec4) -> Complex64 {
        (z.transpose() * self.c * z)[(0, 0)] * 0.5
    }

    /// `‖C_self − C_other‖_max`.
    pub fn max_diff(&self, other: &QuadForm) -> f64 {
        max_abs4(&(self.c - other.c))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs4(&self.c)
    }

    /// Largest off-diagonal modulus.
    pub fn off_diagonal_max(&self) -> f64 {
        let mut acc = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    acc = acc.max(self.c[(i, j)].norm());
                }
            }
        }
        acc
    }

    pub fn negated(&self) -> QuadForm {
        QuadForm {
            c: -self.c,
            labels: self.labels,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCanonicalMap {
    m: CMat4,
    from: [&'static str; 4],
    to: [&'static str; 4],
}

impl LinearCanonicalMap {
    pub fn new(m: CMat4, from: [&'static str; 4], to: [&'static str; 4]) -> Self {
        LinearCanonicalMap { m, from, to }
    }

    pub fn identity(labels: [&'static str; 4]) -> Self {
        LinearCanonicalMap::new(CMat4::identity(), labels, labels)
    }

    pub fn matrix(&self) -> &CMat4 {
        &self.m
    }

    pub fn from_labels(&self) -> [&'static str; 4] {
        self.from
    }

    pub fn to_labels(&self) -> [&'static str; 4] {
        self.to
    }

    /// `‖M J Mᵀ − J‖_max`.
    pub fn symplectic_residual(&self) -> f64 {
        let j = SymplecticForm::matrix();
        max_abs4(&(self.m * j * self.m.transpose() - j))
    }

    /// `‖M J Mᵀ + J‖_max`; zero for maps that reverse every commutator sign.
    pub fn anti_symplectic_residual(&self) -> f64 {
        let j = SymplecticForm::matrix();
        max_abs4(&(self.m * j * self.m.transpose() + j))
    }

    /// 2-norm condition number.
    pub fn condition(&self) -> f64 {
        let sv = self.m.svd(false, false).singular_values;
        let smax = sv.max();
        let smin = sv.min();
        if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.m.determinant()
    }

    /// The map applying `self` first, then `next`.
    pub fn then(&self, next: &LinearCanonicalMap) -> LinearCanonicalMap {
        LinearCanonicalMap::new(next.m * self.m, self.from, next.to)
    }
}

/// Coefficient matrix of the model Hamiltonian.
pub fn hamiltonian_form(p: &ModelParams) -> QuadForm {
    let mut cm = CMat4::zeros();
    cm[(X1, X1)] = re(p.a1() * p.a1());
    cm[(X2, X2)] = re(p.a2() * p.a2());
    cm[(P1, P1)] = ONE;
    cm[(P2, P2)] = ONE;
    let coupling = I * p.coupling();
    cm[(P1, P2)] = coupling;
    cm[(P2, P1)] = coupling;
    QuadForm::new(cm, ORIGINAL_LABELS)
}

fn derived_case_i(p: &ModelParams) -> Result<DerivedParams> {
    derive_all(p)
}

/// Intermediate variables, row by row:
///
/// ```text
/// X'₁ = (a₁x₁ − α₂a₂x₂)/(α₂ − α₁)     P'₁ = (α₁/a₁)p₁ + p₂/a₂
/// X'₂ = (a₁x₁ − α₁a₂x₂)/(α₁ − α₂)     P'₂ = (α₂/a₁)p₁ + p₂/a₂
/// ```
///
/// This map is not canonical: `[X'_j, P'_k] = −iδ_jk`.
pub fn intermediate_map(p: &ModelParams) -> Result<LinearCanonicalMap> {
    let d = derived_case_i(p)?;
    Ok(intermediate_map_from(&d))
}

fn intermediate_map_from(d: &DerivedParams) -> LinearCanonicalMap {
    let a1 = re(d.params.a1());
    let a2 = re(d.params.a2());
    let (al1, al2) = (d.alpha1, d.alpha2);
    let mut m = CMat4::zeros();
    m[(0, X1)] = a1 / (al2 - al1);
    m[(0, X2)] = -al2 * a2 / (al2 - al1);
    m[(1, X1)] = a1 / (al1 - al2);
    m[(1, X2)] = -al1 * a2 / (al1 - al2);
    m[(2, P1)] = al1 / a1;
    m[(2, P2)] = ONE / a2;
    m[(3, P1)] = al2 / a1;
    m[(3, P2)] = ONE / a2;
    LinearCanonicalMap::new(m, ORIGINAL_LABELS, INTERMEDIATE_LABELS)
}

/// Diagonal rescaling of the intermediate variables into the final ones,
/// `X₁ = √(|α₁|U) X'₁`, `P₁ = √(U⁻¹/|α₁|) P'₁`, `X₂ = √(|α₂|/U) X'₂`,
/// `P₂ = √(U/|α₂|) P'₂`.
pub fn rescaling_map(p: &ModelParams) -> Result<LinearCanonicalMap> {
    let d = derived_case_i(p)?;
    Ok(rescaling_map_from(&d))
}

fn rescaling_factors(d: &DerivedParams) -> [f64; 4] {
    let (a1, a2, u) = (d.alpha1.norm(), d.alpha2.norm(), d.u);
    [
        (a1 * u).sqrt(),
        (a2 / u).sqrt(),
        (1.0 / (u * a1)).sqrt(),
        (u / a2).sqrt(),
    ]
}

fn rescaling_map_from(d: &DerivedParams) -> LinearCanonicalMap {
    let f = rescaling_factors(d);
    let m = CMat4::from_diagonal(&CVec4::new(re(f[0]), re(f[1]), re(f[2]), re(f[3])));
    LinearCanonicalMap::new(m, INTERMEDIATE_LABELS, FINAL_LABELS)
}

/// Final variables: the rescaling composed with the intermediate map, with
/// the position rows negated. The plain composition satisfies
/// `M J Mᵀ = −J`; flipping `X_j → −X_j` restores `[X_j, P_k] = iδ_jk`
/// and leaves every quadratic form in these variables unchanged.
pub fn final_map(p: &ModelParams) -> Result<LinearCanonicalMap> {
    let d = derived_case_i(p)?;
    let literal = intermediate_map_from(&d).then(&rescaling_map_from(&d));
    let orient = CMat4::from_diagonal(&CVec4::new(-ONE, -ONE, ONE, ONE));
    Ok(LinearCanonicalMap::new(orient * literal.m, ORIGINAL_LABELS, FINAL_LABELS))
}

/// Rewrites `f` in the variables defined by `m`: `C' = M⁻ᵀ C M⁻¹`.
pub fn apply_map(f: &QuadForm, m: &LinearCanonicalMap) -> Result<QuadForm> {
    let dm = DMatrix::from_fn(4, 4, |i, j| m.m[(i, j)]);
    let (inv, _cond) = linalg::inverse_checked(&dm, MAX_CONDITION)?;
    let inv = CMat4::from_fn(|i, j| inv[(i, j)]);
    let c_new = inv.transpose() * f.c * inv;
    Ok(QuadForm::new(c_new, m.to))
}

/// Closed-form coefficients of the Hamiltonian in the intermediate
/// variables: `½U⁻²ω²P'₁²/(1+α₁²) + ½(1+α₁²)X'₁² + ½U²ω²P'₂²/(1+α₂²) + ½(1+α₂²)X'₂²`.
pub fn expected_intermediate_form(p: &ModelParams) -> Result<QuadForm> {
    let d = derived_case_i(p)?;
    Ok(expected_intermediate_from(&d))
}

fn expected_intermediate_from(d: &DerivedParams) -> QuadForm {
    let k1 = d.one_plus_alpha1_sq();
    let k2 = d.one_plus_alpha2_sq();
    let (u, w) = (d.u, d.omega);
    let w2 = w * w;
    QuadForm::diagonal(
        [re(k1), re(k2), re(w2 / (u * u) / k1), re(u * u * w2 / k2)],
        INTERMEDIATE_LABELS,
    )
}

/// Closed-form branch Hamiltonian in the final variables:
/// `±U⁻¹(P₁²/2m + ½mω²X₁²) ∓ U(P₂²/2m + ½mω²X₂²)`, upper signs for
/// [`BranchLabel::Branch1`].
pub fn expected_branch_form(p: &ModelParams) -> Result<QuadForm> {
    let d = derived_case_i(p)?;
    Ok(branch_form(&d, d.branch))
}

/// Branch form with an explicitly chosen sign pattern.
pub fn branch_form(d: &DerivedParams, branch: BranchLabel) -> QuadForm {
    let s = branch.sign();
    let (u, w, m) = (d.u, d.omega, d.m);
    let mw2 = m * w * w;
    QuadForm::diagonal(
        [
            re(s * mw2 / u),
            re(-s * u * mw2),
            re(s / (u * m)),
            re(-s * u / m),
        ],
        FINAL_LABELS,
    )
}

/// Swap `(x₁ ↔ x₂, p₁ ↔ p₂)` as a 4×4 permutation.
pub fn mode_swap() -> CMat4 {
    let mut pi = CMat4::zeros();
    pi[(X1, X2)] = ONE;
    pi[(X2, X1)] = ONE;
    pi[(P1, P2)] = ONE;
    pi[(P2, P1)] = ONE;
    pi
}

/// `‖Πᵀ C(permute(p)) Π − C(p)‖_max`.
pub fn check_permutation_invariance(p: &ModelParams) -> f64 {
    let pi = mode_swap();
    let swapped = pi.transpose() * hamiltonian_form(&permute(p)).c * pi;
    max_abs4(&(swapped - hamiltonian_form(p).c))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedPermutationReport {
    pub branch: BranchLabel,
    pub permuted_branch: BranchLabel,
    /// `max(|α₁' + α₂|, |α₂' + α₁|) / max(1, |α|)`.
    pub alpha_residual: f64,
    /// Intermediate form at swapped parameters, rescaled by
    /// `X'_j → α_j X'_j`, `P'_j → P'_j/α_j`, versus the original; relative.
    pub intermediate_invariance_residual: f64,
    /// `‖B(permute(p)) + B(p)‖_max / ‖B(p)‖_max` for the branch forms `B`.
    pub branch_flip_residual: f64,
}

impl InducedPermutationReport {
    pub fn branch_flipped(&self) -> bool {
        self.permuted_branch == self.branch.opposite()
    }

    pub fn passes(&self) -> bool {
        self.branch_flipped()
            && self.alpha_residual <= 1e-12
            && self.intermediate_invariance_residual <= 1e-10
            && self.branch_flip_residual <= 1e-10
    }
}

pub fn check_induced_permutation(p: &ModelParams) -> Result<InducedPermutationReport> {
    let d = derived_case_i(p)?;
    let dq = derived_case_i(&permute(p))?;

    let scale = d.alpha1.norm().max(d.alpha2.norm()).max(1.0);
    let alpha_residual = (dq.alpha1 + d.alpha2).norm().max((dq.alpha2 + d.alpha1).norm()) / scale;

    let s = CMat4::from_diagonal(&CVec4::new(
        d.alpha1,
        d.alpha2,
        ONE / d.alpha1,
        ONE / d.alpha2,
    ));
    let original = expected_intermediate_from(&d);
    let swapped = expected_intermediate_from(&dq);
    let transformed = s.transpose() * swapped.c * s;
    let intermediate_invariance_residual = max_abs4(&(transformed - original.c)) / original.max_abs();

    let b = branch_form(&d, d.branch);
    let bq = branch_form(&dq, dq.branch);
    let branch_flip_residual = max_abs4(&(bq.c + b.c)) / b.max_abs();

    Ok(InducedPermutationReport {
        branch: d.branch,
        permuted_branch: dq.branch,
        alpha_residual,
        intermediate_invariance_residual,
        branch_flip_residual,
    })
}

/// Hamilton matrix `A = J·C` of a form (`ż = A z`).
pub fn hamilton_matrix_of(f: &QuadForm) -> CMat4 {
    SymplecticForm::matrix() * f.c
}

/// Eigenvalues of `J·C`, sorted by real then imaginary part.
pub fn classical_frequencies(f: &QuadForm) -> Result<Vec<Complex64>> {
    let a = hamilton_matrix_of(f);
    let dm = DMatrix::from_fn(4, 4, |i, j| a[(i, j)]);
    let mut ev = linalg::eigenvalues(&dm)?;
    linalg::sort_spectrum(&mut ev);
    Ok(ev)
}

/// Expected eigenvalues `±i√(ω_k²)` of the Hamilton matrix.
pub fn expected_classical_frequencies(p: &ModelParams) -> Vec<Complex64> {
    let (w1sq, w2sq) = crate::params::solve_frequencies(p, true);
    let mut out = Vec::with_capacity(4);
    for wsq in [w1sq, w2sq] {
        let w = wsq.sqrt();
        out.push(I * w);
        out.push(-I * w);
    }
    linalg::sort_spectrum(&mut out);
    out
}

/// Unmatched-distance between two multisets of four complex numbers under
/// the best pairing (brute force over permutations).
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute_indices(&mut idx, 0, &mut |perm| {
        let d = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| (a[i] - b[j]).norm())
            .fold(0.0, f64::max);
        best = best.min(d);
    });
    best
}

fn permute_indices(idx: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == idx.len() {
        f(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute_indices(idx, k + 1, f);
        idx.swap(k, i);
    }
}

/// Case label check shared by callers that need regime I.
pub fn require_case_i(p: &ModelParams) -> Result<()> {
    let case = classify(p);
    if case == CaseLabel::CaseI {
        Ok(())
    } else {
        Err(Error::WrongCase {
            expected: CaseLabel::CaseI,
            found: case,
        })
    }
}

/// Diagnostic: `c(re, im)` re-export for tests building literal maps.
#[doc(hidden)]
pub fn cplx(re_: f64, im_: f64) -> Complex64 {
    c(re_, im_)
}

#[allow(dead_code)]
fn _zero() -> Complex64 {
    ZERO
}
