//! Model parameters, regime classification and derived scalars.
//!
//! The Hamiltonian depends on three real, non-vanishing constants
//! `(a₁, a₂, a₃)` with `a₁ ≠ a₂`. Squaring the characteristic frequencies
//! gives the pair `(ω₁², ω₂²)` with
//!
//! ```text
//! ω₁² + ω₂² = a₁² + a₂²,     ω₁²·ω₂² = a₁²a₂² + a₃²/4
//! ```
//!
//! and the sign of `(a₁² − a₂²)² − a₃²` splits parameter space into three
//! regimes: real unequal roots (I), a double root (II), complex-conjugate
//! roots (III). Only regime I admits the canonical diagonalization, whose
//! auxiliary scalars (`α₁`, `α₂`, `U`, `ω`, `m`) live in [`DerivedParams`].

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Surd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseLabel {
    /// `|a₃| < |a₁² − a₂²|`: real, unequal frequencies.
    CaseI,
    /// `|a₃| = |a₁² − a₂²|`: equal frequencies.
    CaseII,
    /// `|a₃| > |a₁² − a₂²|`: complex-conjugate squared frequencies.
    CaseIII,
}

/// Sign pattern of `(1 + α₁², 1 + α₂²)` in regime I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BranchLabel {
    /// `1 + α₁² > 0`, `1 + α₂² < 0`.
    Branch1,
    /// `1 + α₁² < 0`, `1 + α₂² > 0`.
    Branch2,
}

impl BranchLabel {
    pub fn opposite(self) -> Self {
        match self {
            BranchLabel::Branch1 => BranchLabel::Branch2,
            BranchLabel::Branch2 => BranchLabel::Branch1,
        }
    }

    /// `+1` for the upper-sign form, `−1` for the lower-sign form.
    pub fn sign(self) -> f64 {
        match self {
            BranchLabel::Branch1 => 1.0,
            BranchLabel::Branch2 => -1.0,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            BranchLabel::Branch1 => 1,
            BranchLabel::Branch2 => 2,
        }
    }
}

/// The parameter triple `(a₁, a₂, a₃)`.
///
/// Construction validates `a₁, a₂, a₃ ≠ 0` and `a₁ ≠ a₂`. When the triple
/// was built from [`Surd`]s the exact squares are kept for classification.
#[derive(Debug, Clone, Serialize)]
pub struct ModelParams {
    a1: f64,
    a2: f64,
    a3: f64,
    #[serde(skip)]
    exact: Option<Box<[Surd; 3]>>,
}

impl PartialEq for ModelParams {
    fn eq(&self, other: &Self) -> bool {
        self.a1.to_bits() == other.a1.to_bits()
            && self.a2.to_bits() == other.a2.to_bits()
            && self.a3.to_bits() == other.a3.to_bits()
    }
}

fn check_nonzero_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
    }
    if v == 0.0 {
        return Err(Error::InvalidParams(format!("{name} must be non-zero")));
    }
    Ok(())
}

impl ModelParams {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        check_nonzero_finite("a1", a1)?;
        check_nonzero_finite("a2", a2)?;
        check_nonzero_finite("a3", a3)?;
        if a1 == a2 {
            return Err(Error::InvalidParams("a1 must differ from a2".into()));
        }
        Ok(ModelParams {
            a1,
            a2,
            a3,
            exact: None,
        })
    }

    /// Builds the triple from exact surds; the regime boundary is then
    /// decided in exact rational arithmetic.
    pub fn from_exact(a1: Surd, a2: Surd, a3: Surd) -> Result<Self> {
        for (name, s) in [("a1", &a1), ("a2", &a2), ("a3", &a3)] {
            if s.is_zero() {
                return Err(Error::InvalidParams(format!("{name} must be non-zero")));
            }
        }
        if a1 == a2 {
            return Err(Error::InvalidParams("a1 must differ from a2".into()));
        }
        let mut p = ModelParams::new(a1.to_f64(), a2.to_f64(), a3.to_f64())?;
        p.exact = Some(Box::new([a1, a2, a3]));
        Ok(p)
    }

    /// Uncoupled control fixture with `a₃ = 0`: a Hermitian anisotropic
    /// oscillator with frequencies `|a₁|`, `|a₂|`. Not a valid model triple;
    /// used only as a reference point for numerical checks.
    pub fn hermitian_control(a1: f64, a2: f64) -> Result<Self> {
        check_nonzero_finite("a1", a1)?;
        check_nonzero_finite("a2", a2)?;
        if a1 == a2 {
            return Err(Error::InvalidParams("a1 must differ from a2".into()));
        }
        Ok(ModelParams {
            a1,
            a2,
            a3: 0.0,
            exact: None,
        })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn a3(&self) -> f64 {
        self.a3
    }

    pub fn exact(&self) -> Option<&[Surd; 3]> {
        self.exact.as_deref()
    }

    pub fn is_hermitian_control(&self) -> bool {
        self.a3 == 0.0
    }

    /// Coefficient `c = a₃/(2a₁a₂)` of the `i·p₁p₂` coupling.
    pub fn coupling(&self) -> f64 {
        self.a3 / (2.0 * self.a1 * self.a2)
    }

    /// `a₁² + a₂²`.
    pub fn sum_sq(&self) -> f64 {
        self.a1 * self.a1 + self.a2 * self.a2
    }

    /// `a₁² − a₂²`.
    pub fn diff_sq(&self) -> f64 {
        self.a1 * self.a1 - self.a2 * self.a2
    }

    /// `a₁²a₂² + a₃²/4`.
    pub fn product_sq(&self) -> f64 {
        let p = self.a1 * self.a2;
        p * p + 0.25 * self.a3 * self.a3
    }

    /// `(a₁² − a₂²)² − a₃²`, evaluated as a product of factors to avoid
    /// cancellation near the regime boundary. Exactly zero on the boundary
    /// when exact squares are available.
    pub fn discriminant(&self) -> f64 {
        if let Some(CaseLabel::CaseII) = self.exact_case() {
            return 0.0;
        }
        let d = self.diff_sq().abs();
        let b = self.a3.abs();
        (d - b) * (d + b)
    }

    fn exact_case(&self) -> Option<CaseLabel> {
        let [s1, s2, s3] = self.exact()?;
        let diff = s1.square() - s2.square();
        let lhs = s3.square();
        let rhs = &diff * &diff;
        Some(match lhs.cmp(&rhs) {
            Ordering::Less => CaseLabel::CaseI,
            Ordering::Equal => CaseLabel::CaseII,
            Ordering::Greater => CaseLabel::CaseIII,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassifyOptions {
    /// Width of the band `||a₃| − |a₁² − a₂²|| ≤ band` reclassified as
    /// regime II. Zero disables the band.
    pub boundary_band: f64,
}

pub fn classify(p: &ModelParams) -> CaseLabel {
    classify_with(p, ClassifyOptions::default())
}

pub fn classify_with(p: &ModelParams, opts: ClassifyOptions) -> CaseLabel {
    let lhs = p.a3().abs();
    let rhs = p.diff_sq().abs();
    if opts.boundary_band > 0.0 && (lhs - rhs).abs() <= opts.boundary_band {
        return CaseLabel::CaseII;
    }
    if let Some(case) = p.exact_case() {
        return case;
    }
    match lhs.partial_cmp(&rhs).expect("finite parameters") {
        Ordering::Less => CaseLabel::CaseI,
        Ordering::Equal => CaseLabel::CaseII,
        Ordering::Greater => CaseLabel::CaseIII,
    }
}

/// Roots `(ω₁², ω₂²)` of `z² − (a₁² + a₂²)z + (a₁²a₂² + a₃²/4) = 0`.
///
/// `upper_sign` puts the `+√` root first. In regime I the smaller root is
/// obtained from the product relation to avoid cancellation.
pub fn solve_frequencies(p: &ModelParams, upper_sign: bool) -> (Complex64, Complex64) {
    let s = p.sum_sq();
    let prod = p.product_sq();
    let disc = p.discriminant();
    let (plus, minus) = if disc > 0.0 {
        let big = 0.5 * (s + disc.sqrt());
        (Complex64::new(big, 0.0), Complex64::new(prod / big, 0.0))
    } else {
        // principal complex root; i·√|disc| for disc < 0
        let root = Complex64::new(disc, 0.0).sqrt();
        let half_s = Complex64::new(0.5 * s, 0.0);
        (half_s + 0.5 * root, half_s - 0.5 * root)
    };
    if upper_sign {
        (plus, minus)
    } else {
        (minus, plus)
    }
}

/// `ω₁ ≥ ω₂ > 0` whenever both squared frequencies are real and positive
/// (regime I, including the uncoupled control).
pub fn real_frequencies(p: &ModelParams) -> Option<(f64, f64)> {
    if p.discriminant() <= 0.0 {
        return None;
    }
    let (w1sq, w2sq) = solve_frequencies(p, true);
    Some((w1sq.re.sqrt(), w2sq.re.sqrt()))
}

/// `(U, ω)` for regime I, including the uncoupled control.
pub fn scale_and_mean_frequency(p: &ModelParams) -> Option<(f64, f64)> {
    if p.discriminant() <= 0.0 {
        return None;
    }
    let root = p.discriminant().sqrt();
    let omega_sq = p.product_sq().sqrt();
    let omega = omega_sq.sqrt();
    // U⁴ = (s − root)/(s + root) = 4ω⁴/(s + root)²
    let u = (2.0 * omega_sq / (p.sum_sq() + root)).sqrt();
    Some((u, omega))
}

/// Derived regime-I scalars, computed eagerly and cross-validated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedParams {
    pub params: ModelParams,
    pub omega1_sq: Complex64,
    pub omega2_sq: Complex64,
    /// Purely imaginary.
    pub alpha1: Complex64,
    /// Purely imaginary.
    pub alpha2: Complex64,
    pub u: f64,
    pub omega: f64,
    pub m: f64,
    pub branch: BranchLabel,
}

pub fn derive_all(p: &ModelParams) -> Result<DerivedParams> {
    let case = classify(p);
    if case != CaseLabel::CaseI {
        return Err(Error::WrongCase {
            expected: CaseLabel::CaseI,
            found: case,
        });
    }
    if p.is_hermitian_control() {
        return Err(Error::InvalidParams(
            "alpha parameters are undefined for a3 = 0".into(),
        ));
    }
    let d = p.diff_sq();
    let a3 = p.a3();
    let root = p.discriminant().sqrt();
    // Numerators d ± root of the two alpha parameters; the one suffering
    // cancellation is rewritten through (d + root)(d − root) = a₃².
    let (n_plus, n_minus) = if d >= 0.0 {
        let n_plus = d + root;
        (n_plus, a3 * a3 / n_plus)
    } else {
        let n_minus = d - root;
        (a3 * a3 / n_minus, n_minus)
    };
    // x/(i·a₃) = −i·x/a₃
    let alpha1 = Complex64::new(0.0, -n_plus / a3);
    let alpha2 = Complex64::new(0.0, -n_minus / a3);

    let (u, omega) = scale_and_mean_frequency(p).expect("regime I");
    let m = 2.0 / (omega * omega) * root / a3.abs();
    let (omega1_sq, omega2_sq) = solve_frequencies(p, true);

    let one_plus_a1_sq = 1.0 + (alpha1 * alpha1).re;
    let branch = if one_plus_a1_sq > 0.0 {
        BranchLabel::Branch1
    } else {
        BranchLabel::Branch2
    };

    let derived = DerivedParams {
        params: p.clone(),
        omega1_sq,
        omega2_sq,
        alpha1,
        alpha2,
        u,
        omega,
        m,
        branch,
    };
    debug_assert!(derived.alpha_constraint_residual() <= 1e-12);
    Ok(derived)
}

impl DerivedParams {
    /// `|1 + α₁α₂|`.
    pub fn alpha_constraint_residual(&self) -> f64 {
        (Complex64::new(1.0, 0.0) + self.alpha1 * self.alpha2).norm()
    }

    /// `1 + α₁²` (real).
    pub fn one_plus_alpha1_sq(&self) -> f64 {
        1.0 + (self.alpha1 * self.alpha1).re
    }

    /// `1 + α₂²` (real).
    pub fn one_plus_alpha2_sq(&self) -> f64 {
        1.0 + (self.alpha2 * self.alpha2).re
    }

    /// `(ω₁, ω₂) = (U⁻¹ω, Uω)`.
    pub fn frequencies(&self) -> (f64, f64) {
        (self.omega / self.u, self.u * self.omega)
    }
}

pub fn permute(p: &ModelParams) -> ModelParams {
    ModelParams {
        a1: p.a2,
        a2: p.a1,
        a3: p.a3,
        exact: p
            .exact
            .as_ref()
            .map(|e| Box::new([e[1].clone(), e[0].clone(), e[2].clone()])),
    }
}

/// `(ω₁, ω₂) = (U⁻¹ω, Uω)` under the ordering `ω₁ > ω₂`, cross-checked
/// against the upper-sign roots of the frequency quadratic.
pub fn frequency_identification(d: &DerivedParams) -> Result<(f64, f64)> {
    let (w1, w2) = d.frequencies();
    let (w1sq, w2sq) = solve_frequencies(&d.params, true);
    let err1 = ((w1 * w1 - w1sq.re) / w1sq.re).abs();
    let err2 = ((w2 * w2 - w2sq.re) / w2sq.re).abs();
    if err1 > 1e-12 || err2 > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "frequency identification inconsistent: relative errors {err1:e}, {err2:e}"
        )));
    }
    Ok((w1, w2))
}

/// Relative residuals of the two defining relations for a root pair.
pub fn frequency_relation_residuals(p: &ModelParams, roots: (Complex64, Complex64)) -> (f64, f64) {
    let (r1, r2) = roots;
    let sum = p.sum_sq();
    let prod = p.product_sq();
    let sum_err = ((r1 + r2) - Complex64::new(sum, 0.0)).norm() / sum.abs();
    let prod_err = ((r1 * r2) - Complex64::new(prod, 0.0)).norm() / prod.abs();
    (sum_err, prod_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use proptest::prelude::*;

    fn worked() -> ModelParams {
        ModelParams::new(2.0, 1.0, 5f64.sqrt()).unwrap()
    }

    #[test]
    fn rejects_invalid_triples() {
        assert!(ModelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(2.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2.0, -2.0, 1.0).is_ok());
    }

    #[test]
    fn classifies_worked_triples() {
        assert_eq!(classify(&worked()), CaseLabel::CaseI);
        assert_eq!(classify(&ModelParams::new(2.0, 1.0, 3.0).unwrap()), CaseLabel::CaseII);
        assert_eq!(classify(&ModelParams::new(2.0, 1.0, 4.0).unwrap()), CaseLabel::CaseIII);
        assert_eq!(classify(&ModelParams::new(2.0, 1.0, -3.0).unwrap()), CaseLabel::CaseII);
    }

    #[test]
    fn exact_boundary_beats_rounding() {
        // a₁² = 2 is not representable; the float comparison lands in regime I
        let float = ModelParams::new(2f64.sqrt(), 1.0, 1.0).unwrap();
        assert_ne!(classify(&float), CaseLabel::CaseII);
        let exact = ModelParams::from_exact(
            "sqrt(2)".parse().unwrap(),
            "1".parse().unwrap(),
            "1".parse().unwrap(),
        )
        .unwrap();
        assert_eq!(classify(&exact), CaseLabel::CaseII);
        assert_eq!(exact.discriminant(), 0.0);
        let (r1, r2) = solve_frequencies(&exact, true);
        assert_eq!(r1, r2);
    }

    #[test]
    fn boundary_band_reclassifies() {
        let p = ModelParams::new(2.0, 1.0, 3.0 - 1e-9).unwrap();
        assert_eq!(classify(&p), CaseLabel::CaseI);
        let opts = ClassifyOptions { boundary_band: 1e-6 };
        assert_eq!(classify_with(&p, opts), CaseLabel::CaseII);
    }

    #[test]
    fn frequencies_of_worked_triples() {
        let (a, b) = solve_frequencies(&worked(), true);
        assert!((a - Complex64::new(3.5, 0.0)).norm() < 1e-14);
        assert!((b - Complex64::new(1.5, 0.0)).norm() < 1e-14);
        let (a, b) = solve_frequencies(&worked(), false);
        assert!((a.re - 1.5).abs() < 1e-14 && (b.re - 3.5).abs() < 1e-14);

        let (a, b) = solve_frequencies(&ModelParams::new(2.0, 1.0, 3.0).unwrap(), true);
        assert_eq!(a, Complex64::new(2.5, 0.0));
        assert_eq!(b, Complex64::new(2.5, 0.0));

        let (a, b) = solve_frequencies(&ModelParams::new(2.0, 1.0, 4.0).unwrap(), true);
        let s7 = 7f64.sqrt();
        assert!((a - Complex64::new(2.5, s7 / 2.0)).norm() < 1e-14);
        assert!((b - Complex64::new(2.5, -s7 / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn derived_scalars_of_worked_triple() {
        let d = derive_all(&worked()).unwrap();
        let s5 = 5f64.sqrt();
        assert!((d.alpha1 - Complex64::new(0.0, -s5)).norm() < 1e-14);
        assert!((d.alpha2 - Complex64::new(0.0, -1.0 / s5)).norm() < 1e-14);
        assert!((d.u - (3.0f64 / 7.0).powf(0.25)).abs() < 1e-14);
        assert!((d.omega - 5.25f64.powf(0.25)).abs() < 1e-14);
        assert!((d.u - 0.809107).abs() < 1e-6);
        assert!((d.omega - 1.513700).abs() < 1e-6);
        assert!((d.m - 0.780720).abs() < 1e-6);
        assert_eq!(d.branch, BranchLabel::Branch2);
        assert!((d.one_plus_alpha1_sq() + 4.0).abs() < 1e-13);
        assert!((d.one_plus_alpha2_sq() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn derive_all_rejects_other_regimes() {
        for a3 in [3.0, 4.0] {
            let err = derive_all(&ModelParams::new(2.0, 1.0, a3).unwrap()).unwrap_err();
            assert!(matches!(err, Error::WrongCase { .. }));
        }
        let control = ModelParams::hermitian_control(2.0, 1.0).unwrap();
        assert!(derive_all(&control).is_err());
    }

    #[test]
    fn permutation_flips_branch() {
        let p = worked();
        let q = permute(&p);
        assert_eq!((q.a1(), q.a2(), q.a3()), (1.0, 2.0, 5f64.sqrt()));
        assert_eq!(permute(&q), p);
        let dq = derive_all(&q).unwrap();
        assert_eq!(dq.branch, BranchLabel::Branch1);
        assert!((dq.alpha1 - Complex64::new(0.0, 1.0 / 5f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn frequency_identification_worked() {
        let d = derive_all(&worked()).unwrap();
        let (w1, w2) = frequency_identification(&d).unwrap();
        assert!((w1 - 3.5f64.sqrt()).abs() < 1e-14);
        assert!((w2 - 1.5f64.sqrt()).abs() < 1e-14);
        assert!((w1 - 1.870829).abs() < 1e-6 && (w2 - 1.224745).abs() < 1e-6);
    }

    #[test]
    fn control_frequencies() {
        let control = ModelParams::hermitian_control(2.0, 1.0).unwrap();
        assert_eq!(real_frequencies(&control), Some((2.0, 1.0)));
        assert_eq!(classify(&control), CaseLabel::CaseI);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn alpha_constraint_and_imaginarity(seed in any::<u64>()) {
            let p = sampling::case_i_from_seed(seed);
            let d = derive_all(&p).unwrap();
            prop_assert!(d.alpha_constraint_residual() <= 1e-12);
            prop_assert!(d.alpha1.re.abs() <= 1e-14 * d.alpha1.norm());
            prop_assert!(d.alpha2.re.abs() <= 1e-14 * d.alpha2.norm());
            // (1 + α₁²)/(1 + α₂²) = α₁² < 0
            let ratio = d.one_plus_alpha1_sq() / d.one_plus_alpha2_sq();
            let a1sq = (d.alpha1 * d.alpha1).re;
            prop_assert!(ratio < 0.0);
            prop_assert!(((ratio - a1sq) / a1sq).abs() <= 1e-10);
        }

        #[test]
        fn permutation_action_on_derived(seed in any::<u64>()) {
            let p = sampling::case_i_from_seed(seed);
            let d = derive_all(&p).unwrap();
            let dq = derive_all(&permute(&p)).unwrap();
            prop_assert!((dq.alpha1 + d.alpha2).norm() <= 1e-12 * d.alpha2.norm().max(1.0));
            prop_assert!((dq.alpha2 + d.alpha1).norm() <= 1e-12 * d.alpha1.norm().max(1.0));
            prop_assert_eq!(dq.u, d.u);
            prop_assert_eq!(dq.omega, d.omega);
            prop_assert_eq!(dq.m, d.m);
            prop_assert_eq!(dq.branch, d.branch.opposite());
        }

        #[test]
        fn frequency_relations_all_regimes(seed in any::<u64>()) {
            let p = sampling::any_case_from_seed(seed);
            for upper in [true, false] {
                let (s, q) = frequency_relation_residuals(&p, solve_frequencies(&p, upper));
                prop_assert!(s <= 1e-12, "sum residual {s:e} for {p:?}");
                prop_assert!(q <= 1e-12, "product residual {q:e} for {p:?}");
            }
        }

        #[test]
        fn identification_consistency(seed in any::<u64>()) {
            let p = sampling::case_i_from_seed(seed);
            let d = derive_all(&p).unwrap();
            let (w1, w2) = frequency_identification(&d).unwrap();
            prop_assert!(w1 > w2);
            prop_assert!(((w1 * w2 - d.omega * d.omega) / (d.omega * d.omega)).abs() <= 1e-14);
            prop_assert!(((w1 * w1 + w2 * w2 - p.sum_sq()) / p.sum_sq()).abs() <= 1e-12);
        }

        #[test]
        fn classify_is_total(a1 in -10.0..10.0f64, a2 in -10.0..10.0f64, a3 in -50.0..50.0f64) {
            if let Ok(p) = ModelParams::new(a1, a2, a3) {
                let case = classify(&p);
                let lhs = a3.abs();
                let rhs = (a1 * a1 - a2 * a2).abs();
                let want = match lhs.partial_cmp(&rhs).unwrap() {
                    Ordering::Less => CaseLabel::CaseI,
                    Ordering::Equal => CaseLabel::CaseII,
                    Ordering::Greater => CaseLabel::CaseIII,
                };
                prop_assert_eq!(case, want);
            }
        }
    }
}
