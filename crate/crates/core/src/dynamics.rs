//! Classical flow `ż = A z` and the fourth-order equation it implies.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, re, I};
use crate::params::{classify, solve_frequencies, CaseLabel, ModelParams};
use crate::quadform::{hamilton_matrix_of, hamiltonian_form, CMat4, CVec4, QuadForm, P1, P2, X1, X2};

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonMatrix {
    a: CMat4,
    params: ModelParams,
}

impl HamiltonMatrix {
    pub fn matrix(&self) -> &CMat4 {
        &self.a
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(self.a.iter())
    }

    pub fn trace(&self) -> Complex64 {
        self.a.trace()
    }

    pub fn propagator(&self, t: f64) -> CMat4 {
        let at = DMatrix::from_fn(4, 4, |i, j| self.a[(i, j)] * t);
        let e = linalg::expm(&at);
        CMat4::from_fn(|i, j| e[(i, j)])
    }
}

/// Rows: `ẋ₁ = p₁ + icp₂`, `ẋ₂ = p₂ + icp₁`, `ṗ₁ = −a₁²x₁`, `ṗ₂ = −a₂²x₂`.
pub fn hamilton_matrix(p: &ModelParams) -> HamiltonMatrix {
    let ic = I * p.coupling();
    let mut a = CMat4::zeros();
    a[(X1, P1)] = re(1.0);
    a[(X1, P2)] = ic;
    a[(X2, P2)] = re(1.0);
    a[(X2, P1)] = ic;
    a[(P1, X1)] = re(-p.a1() * p.a1());
    a[(P2, X2)] = re(-p.a2() * p.a2());
    let jc = hamilton_matrix_of(&hamiltonian_form(p));
    let residual = linalg::max_abs((a - jc).iter());
    assert!(residual <= 1e-14, "J·C cross-check failed: {residual:e}");
    HamiltonMatrix {
        a,
        params: p.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVec4>,
    pub params: ModelParams,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part of any component; zero for real flows.
    pub fn max_abs_imag(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|z| z.iter().map(|w| w.im.abs()))
            .fold(0.0, f64::max)
    }
}

/// Uniform grid `t₀, t₀+dt, …` with `n` points.
pub fn uniform_grid(t_end: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidGrid(format!("need n ≥ 2 and t_end > 0, got n={n}, t_end={t_end}")));
    }
    Ok((0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect())
}

fn validate_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidGrid("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("non-finite time".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("times must be strictly ascending".into()));
    }
    Ok(())
}

/// `z(t) = exp(A t) z₀` at each grid time, each exponential evaluated
/// independently.
pub fn evolve(p: &ModelParams, z0: &CVec4, times: &[f64]) -> Result<Trajectory> {
    if z0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParams("initial phase point is not finite".into()));
    }
    validate_grid(times)?;
    let a = hamilton_matrix(p);
    let states = times.iter().map(|&t| a.propagator(t) * z0).collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        params: p.clone(),
    })
}

/// Coefficients `(s, q)` of `λ⁴ + sλ² + q`: `(a₁²+a₂², a₁²a₂²+a₃²/4)`.
pub fn fourth_order_coefficients(p: &ModelParams) -> (f64, f64) {
    (p.sum_sq(), p.product_sq())
}

/// `‖A⁴ + sA² + qI‖_max`.
pub fn fourth_order_matrix_residual(a: &CMat4, s: f64, q: f64) -> f64 {
    let a2 = a * a;
    let m = a2 * a2 + a2 * re(s) + CMat4::identity() * re(q);
    linalg::max_abs(m.iter())
}

/// Cayley–Hamilton residual of the fourth-order equation; compare against
/// `1e-12·‖A‖_max⁴`.
pub fn fourth_order_residual(p: &ModelParams) -> f64 {
    let (s, q) = fourth_order_coefficients(p);
    fourth_order_matrix_residual(hamilton_matrix(p).matrix(), s, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PuComparison {
    /// `(a₁²+a₂², a₁²a₂²+a₃²/4)`.
    pub from_params: (f64, f64),
    /// `(ω₁²+ω₂², ω₁²ω₂²)` from the roots.
    pub from_frequencies: (Complex64, Complex64),
    /// Largest relative coefficient difference.
    pub residual: f64,
}

/// Rebuilds the fourth-order polynomial from the frequency roots. With
/// `require_real` the roots must be real (Cases I and II).
pub fn pu_form_residual(p: &ModelParams, require_real: bool) -> Result<PuComparison> {
    let case = classify(p);
    if require_real && case == CaseLabel::CaseIII {
        return Err(Error::WrongCase {
            expected: CaseLabel::CaseI,
            found: case,
        });
    }
    let (w1sq, w2sq) = solve_frequencies(p, true);
    let (s, q) = fourth_order_coefficients(p);
    let sum = w1sq + w2sq;
    let prod = w1sq * w2sq;
    let residual = ((sum - re(s)).norm() / s.abs()).max((prod - re(q)).norm() / q.abs());
    Ok(PuComparison {
        from_params: (s, q),
        from_frequencies: (sum, prod),
        residual,
    })
}

/// Second-order equations for the positions, `ẍ₁ = −a₁²x₁ − i(a₂a₃/2a₁)x₂`
/// and its mirror, with `ẍ` taken from `A²z`. Relative to the size of the
/// right-hand-side terms.
pub fn second_order_check(p: &ModelParams, traj: &Trajectory) -> Result<f64> {
    if traj.params != *p {
        return Err(Error::ParamsMismatch);
    }
    let a = hamilton_matrix(p);
    let a2 = a.matrix() * a.matrix();
    let (a1, b2, a3) = (p.a1(), p.a2(), p.a3());
    let k12 = c(0.0, -b2 * a3 / (2.0 * a1));
    let k21 = c(0.0, -a1 * a3 / (2.0 * b2));
    let mut worst = 0.0_f64;
    for z in &traj.states {
        let acc = a2 * z;
        let rhs1 = re(-a1 * a1) * z[X1] + k12 * z[X2];
        let rhs2 = re(-b2 * b2) * z[X2] + k21 * z[X1];
        let scale1 = a1 * a1 * z[X1].norm() + k12.norm() * z[X2].norm();
        let scale2 = b2 * b2 * z[X2].norm() + k21.norm() * z[X1].norm();
        for (lhs, rhs, scale) in [(acc[X1], rhs1, scale1), (acc[X2], rhs2, scale2)] {
            if scale > 0.0 {
                worst = worst.max((lhs - rhs).norm() / scale);
            } else {
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    Ok(worst)
}

pub fn energy(form: &QuadForm, z: &CVec4) -> Complex64 {
    form.evaluate(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDrift {
    pub initial: Complex64,
    /// `max_t |H(z(t)) − H(z₀)|`.
    pub absolute: f64,
    /// `absolute / |H(z₀)|`; `absolute` itself when `H(z₀) = 0`.
    pub relative: f64,
    /// `absolute / (‖C‖_max · max_t ‖z‖²)`, the drift in units of the
    /// rounding scale; meaningful when the trajectory grows.
    pub scaled: f64,
}

pub fn energy_drift(traj: &Trajectory) -> EnergyDrift {
    let form = hamiltonian_form(&traj.params);
    let initial = traj.states.first().map(|z| energy(&form, z)).unwrap_or_default();
    let absolute = traj
        .states
        .iter()
        .map(|z| (energy(&form, z) - initial).norm())
        .fold(0.0, f64::max);
    let relative = if initial.norm() > 0.0 {
        absolute / initial.norm()
    } else {
        absolute
    };
    let size = form.max_abs() * traj.max_norm().powi(2);
    let scaled = if size > 0.0 { absolute / size } else { absolute };
    EnergyDrift {
        initial,
        absolute,
        relative,
        scaled,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalCheck {
    /// Eigenvalues of `A`.
    pub eigenvalues: Vec<Complex64>,
    /// Distance of the eigenvalues from `{±i√(ω_k²)}`.
    pub frequency_residual: f64,
    /// `max_t ‖z(t) − V e^{Λt} V⁻¹ z₀‖ / max(1, ‖z₀‖)`.
    pub reconstruction_residual: f64,
}

/// Compares a trajectory with its expansion over the eigenvectors of `A`.
pub fn modal_check(traj: &Trajectory) -> Result<ModalCheck> {
    let a = hamilton_matrix(&traj.params);
    let am = DMatrix::from_fn(4, 4, |i, j| a.matrix()[(i, j)]);
    let (vals, vecs) = linalg::eigen(&am)?;
    let (v_inv, _) = linalg::inverse_checked(&vecs, 1e12)?;
    let z0 = traj.states.first().copied().unwrap_or_else(CVec4::zeros);
    let z0d = nalgebra::DVector::from_iterator(4, z0.iter().copied());
    let coeffs = &v_inv * z0d;
    let mut worst = 0.0_f64;
    for (t, z) in traj.times.iter().zip(&traj.states) {
        let modal = nalgebra::DVector::from_fn(4, |k, _| coeffs[k] * (vals[k] * *t).exp());
        let rebuilt = &vecs * modal;
        let diff = (0..4).map(|k| (rebuilt[k] - z[k]).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(diff);
    }
    let expected = crate::quadform::expected_classical_frequencies(&traj.params);
    Ok(ModalCheck {
        frequency_residual: crate::quadform::multiset_distance(&vals, &expected),
        eigenvalues: vals,
        reconstruction_residual: worst / z0.norm().max(1.0),
    })
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,re_x1,im_x1,re_x2,im_x2,re_p1,im_p1,re_p2,im_p2,re_H,im_H";

pub fn write_trajectory_csv(traj: &Trajectory, out: &mut impl Write) -> std::io::Result<()> {
    let form = hamiltonian_form(&traj.params);
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for (t, z) in traj.times.iter().zip(&traj.states) {
        let h = energy(&form, z);
        write!(out, "{t:.14e}")?;
        for w in z.iter().chain(std::iter::once(&h)) {
            write!(out, ",{:.14e},{:.14e}", w.re, w.im)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn worked() -> ModelParams {
        ModelParams::new(2.0, 1.0, 5f64.sqrt()).unwrap()
    }

    fn unit_x1() -> CVec4 {
        CVec4::new(re(1.0), re(0.0), re(0.0), re(0.0))
    }

    #[test]
    fn hamilton_matrix_worked() {
        let a = hamilton_matrix(&worked());
        let entry = a.matrix()[(X1, P2)];
        assert_eq!(entry.re, 0.0);
        assert!((entry.im - 0.559017).abs() < 1e-6);
        assert_eq!(a.trace(), re(0.0));
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let t = uniform_grid(10.0, 21).unwrap();
        let traj = evolve(&worked(), &CVec4::zeros(), &t).unwrap();
        assert_eq!(traj.max_norm(), 0.0);
        assert_eq!(second_order_check(&worked(), &traj).unwrap(), 0.0);
    }

    #[test]
    fn decoupled_cosine() {
        let p = ModelParams::hermitian_control(2.0, 1.0).unwrap();
        let t = uniform_grid(10.0, 101).unwrap();
        let traj = evolve(&p, &unit_x1(), &t).unwrap();
        for (t, z) in traj.times.iter().zip(&traj.states) {
            assert!((z[X1] - re((2.0 * t).cos())).norm() < 1e-12, "t={t}");
            assert!((z[P1] - re(-2.0 * (2.0 * t).sin())).norm() < 1e-12);
            assert_eq!(z[X2], re(0.0));
        }
        assert_eq!(second_order_check(&p, &traj).unwrap(), 0.0);
    }

    #[test]
    fn worked_modal_structure() {
        let t = uniform_grid(10.0, 41).unwrap();
        let traj = evolve(&worked(), &unit_x1(), &t).unwrap();
        let m = modal_check(&traj).unwrap();
        assert!(m.frequency_residual < 1e-10);
        assert!(m.reconstruction_residual < 1e-10);
        for ev in &m.eigenvalues {
            assert!(ev.re.abs() < 1e-10);
            let w = ev.im.abs();
            assert!((w - 3.5f64.sqrt()).abs() < 1e-10 || (w - 1.5f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn fourth_order_examples() {
        assert_eq!(fourth_order_coefficients(&worked()), (5.0, 5.25));
        let a = hamilton_matrix(&worked());
        assert!(fourth_order_residual(&worked()) <= 1e-12 * a.max_abs().powi(4));
        let p2 = ModelParams::new(2.0, 1.0, 3.0).unwrap();
        assert_eq!(fourth_order_coefficients(&p2), (5.0, 6.25));
        let a2 = hamilton_matrix(&p2);
        assert!(fourth_order_residual(&p2) <= 1e-12 * a2.max_abs().powi(4));
    }

    #[test]
    fn generic_matrix_fails_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = CMat4::from_fn(|_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        assert!(fourth_order_matrix_residual(&m, 5.0, 5.25) > 0.1);
    }

    #[test]
    fn pu_coefficients() {
        let r = pu_form_residual(&worked(), true).unwrap();
        assert_eq!(r.from_params, (5.0, 5.25));
        assert!(r.residual <= 1e-12);
        let r2 = pu_form_residual(&ModelParams::new(2.0, 1.0, 3.0).unwrap(), true).unwrap();
        assert_eq!(r2.from_params, (5.0, 6.25));
        assert!(r2.residual <= 1e-12);
        let p3 = ModelParams::new(2.0, 1.0, 4.0).unwrap();
        assert!(matches!(pu_form_residual(&p3, true), Err(Error::WrongCase { .. })));
        assert!(pu_form_residual(&p3, false).unwrap().residual <= 1e-12);
    }

    #[test]
    fn second_order_worked_and_mismatch() {
        let traj = evolve(&worked(), &unit_x1(), &[0.0, 1.0]).unwrap();
        assert!(second_order_check(&worked(), &traj).unwrap() <= 1e-12);
        let other = ModelParams::new(2.0, 1.0, 1.0).unwrap();
        assert_eq!(second_order_check(&other, &traj), Err(Error::ParamsMismatch));
    }

    #[test]
    fn grid_validation() {
        let z = unit_x1();
        assert!(matches!(evolve(&worked(), &z, &[]), Err(Error::InvalidGrid(_))));
        assert!(matches!(evolve(&worked(), &z, &[1.0, 1.0]), Err(Error::InvalidGrid(_))));
        assert!(matches!(evolve(&worked(), &z, &[0.0, f64::NAN]), Err(Error::InvalidGrid(_))));
        let bad = CVec4::new(re(f64::INFINITY), re(0.0), re(0.0), re(0.0));
        assert!(evolve(&worked(), &bad, &[0.0]).is_err());
        assert!(uniform_grid(0.0, 10).is_err());
    }

    #[test]
    fn energy_conserved_worked() {
        let t = uniform_grid(10.0, 201).unwrap();
        let z0 = CVec4::new(re(0.3), re(-0.7), re(0.2), re(0.5));
        let traj = evolve(&worked(), &z0, &t).unwrap();
        assert!(energy_drift(&traj).relative <= 1e-10);
        assert!(traj.max_abs_imag() > 0.0);
    }

    #[test]
    fn case_ii_growth_is_recorded() {
        let p = ModelParams::new(2.0, 1.0, 3.0).unwrap();
        let t = uniform_grid(100.0, 11).unwrap();
        let traj = evolve(&p, &unit_x1(), &t).unwrap();
        assert!(traj.max_norm().is_finite());
    }

    #[test]
    fn csv_layout() {
        let traj = evolve(&worked(), &unit_x1(), &[0.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 11);
        assert!(lines[1].starts_with("0.00000000000000e0,1.00000000000000e0,"));
    }

    fn random_real_state(rng: &mut impl Rng) -> CVec4 {
        CVec4::from_fn(|_, _| re(rng.random_range(-1.0..1.0)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn cayley_hamilton_all_regimes(seed in any::<u64>()) {
            let p = sampling::any_case_from_seed(seed);
            let a = hamilton_matrix(&p);
            prop_assert!(fourth_order_residual(&p) <= 1e-12 * a.max_abs().powi(4));
            prop_assert_eq!(a.trace(), re(0.0));
            prop_assert!(pu_form_residual(&p, false).unwrap().residual <= 1e-12);
        }

        #[test]
        fn pu_polynomial_permutation_invariant(seed in any::<u64>()) {
            let p = sampling::any_case_from_seed(seed);
            prop_assert_eq!(fourth_order_coefficients(&p), fourth_order_coefficients(&crate::params::permute(&p)));
        }

        #[test]
        fn case_i_energy_and_boundedness(seed in any::<u64>()) {
            let p = sampling::case_i_from_seed(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z0 = random_real_state(&mut rng);
            let traj = evolve(&p, &z0, &uniform_grid(10.0, 51).unwrap()).unwrap();
            let drift = energy_drift(&traj);
            prop_assert!(drift.relative <= 1e-10, "{:?}", drift);
            prop_assert!(second_order_check(&p, &traj).unwrap() <= 1e-12);
            let m = modal_check(&traj).unwrap();
            prop_assert!(m.frequency_residual <= 1e-10 * m.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max));
        }
    }

    #[test]
    fn case_i_bounded_to_t100() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let p = sampling::random_case_i(&mut rng);
            let z0 = random_real_state(&mut rng);
            let traj = evolve(&p, &z0, &uniform_grid(100.0, 101).unwrap()).unwrap();
            let m = modal_check(&traj).unwrap();
            // bounded by the modal amplitudes: Σ|c_k|·‖v_k‖
            let am = DMatrix::from_fn(4, 4, |i, j| hamilton_matrix(&p).matrix()[(i, j)]);
            let (_, vecs) = linalg::eigen(&am).unwrap();
            let (v_inv, _) = linalg::inverse_checked(&vecs, 1e12).unwrap();
            let z0d = nalgebra::DVector::from_iterator(4, z0.iter().copied());
            let coeffs = &v_inv * z0d;
            let bound: f64 = (0..4).map(|k| coeffs[k].norm() * vecs.column(k).norm()).sum();
            assert!(traj.max_norm() <= bound * (1.0 + 1e-8), "{} > {}", traj.max_norm(), bound);
            assert!(m.eigenvalues.iter().all(|z| z.re.abs() < 1e-8 * z.norm().max(1.0)));
        }
    }
}
