//! Metric forms, pseudo-expectations and the time-evolution identities of
//! pseudo-Hermitian dynamics on the truncated representation.
//!
//! For the antilinear metric `PT` the time reversal acts on the time
//! argument: a state `ψ(t)` is paired with `conj(ψ(−t))`, and an evolved
//! observable `A(t)` with `P·A(−t)ᵀ·P`. Same-time variants are computed
//! alongside and reported without being asserted.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    build_operators, hamiltonian_from, pseudo_adjoint, random_vector, EtaMetric, FockSpec, MetricName,
    OperatorSet,
};
use crate::linalg::{self, c, re, CMat, CVec, I};
use crate::params::ModelParams;

pub type StateVector = CVec;

/// Tolerance for the pseudo-Hermiticity precondition, relative to `‖H‖_max`.
pub const PSEUDO_HERMITIAN_TOL: f64 = 1e-12;

/// Observable together with its metric self-adjointness flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableMatrix {
    pub matrix: CMat,
    selfadjoint: Vec<(MetricName, bool)>,
}

impl ObservableMatrix {
    pub fn new(matrix: CMat, metrics: &[EtaMetric]) -> Result<Self> {
        let mut selfadjoint = Vec::with_capacity(metrics.len());
        for eta in metrics {
            let adj = pseudo_adjoint(&matrix, eta)?;
            selfadjoint.push((eta.name, linalg::max_abs_diff(&adj, &matrix) <= 1e-12));
        }
        Ok(ObservableMatrix { matrix, selfadjoint })
    }

    pub fn is_selfadjoint(&self, name: MetricName) -> Option<bool> {
        self.selfadjoint.iter().find(|(n, _)| *n == name).map(|(_, b)| *b)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `ψ_A†·η·ψ_B`, or `ψ_A†·M·conj(ψ_B)` for an antilinear `η = M∘conj`.
pub fn eta_form(psi_a: &StateVector, psi_b: &StateVector, eta: &EtaMetric) -> Result<Complex64> {
    let d = eta.matrix().nrows();
    check_dim(d, psi_a.len())?;
    check_dim(d, psi_b.len())?;
    Ok(eta.pairing(psi_a, psi_b))
}

/// `(⟨ψ|η|ψ⟩, |Im| ≤ 1e-12·|value|)`.
pub fn reality_check(psi: &StateVector, eta: &EtaMetric) -> Result<(Complex64, bool)> {
    let v = eta_form(psi, psi, eta)?;
    Ok((v, v.im.abs() <= 1e-12 * v.norm()))
}

/// `‖H − P·Hᵀ·P‖_max / max(1, ‖H‖_max)`.
pub fn pt_pseudo_hermiticity_residual(h: &CMat, parity: &[f64]) -> f64 {
    let adj = linalg::sandwich_diag(parity, &h.transpose());
    linalg::max_abs_diff(h, &adj) / linalg::max_abs(h.iter()).max(1.0)
}

fn require_pt_pseudo_hermitian(h: &CMat, parity: &[f64]) -> Result<()> {
    let residual = pt_pseudo_hermiticity_residual(h, parity);
    if residual <= PSEUDO_HERMITIAN_TOL {
        Ok(())
    } else {
        Err(Error::NotPseudoHermitian { residual })
    }
}

fn parity_of(eta: &EtaMetric) -> Vec<f64> {
    (0..eta.matrix().nrows())
        .map(|k| eta.matrix()[(k, k)].re)
        .collect()
}

/// `exp(−iHt)`.
pub fn schrodinger_propagator(h: &CMat, t: f64) -> CMat {
    linalg::expm(&(h * c(0.0, -t)))
}

/// `F(t) = ψ(t)†·P·conj(ψ(−t))` with `ψ(t) = exp(−iHt)ψ₀`, without the
/// precondition; used directly by negative controls.
pub fn pt_form_unchecked(h: &CMat, parity: &[f64], psi0: &StateVector, t: f64) -> Complex64 {
    let fwd = schrodinger_propagator(h, t) * psi0;
    let bwd = schrodinger_propagator(h, -t) * psi0;
    pt_pair(parity, &fwd, &bwd)
}

/// `ψ(t)†·P·conj(ψ(t))`; not conserved in general.
pub fn pt_form_same_time(h: &CMat, parity: &[f64], psi0: &StateVector, t: f64) -> Complex64 {
    let fwd = schrodinger_propagator(h, t) * psi0;
    pt_pair(parity, &fwd, &fwd)
}

fn pt_pair(parity: &[f64], a: &CVec, b: &CVec) -> Complex64 {
    a.iter()
        .zip(b.iter())
        .zip(parity)
        .map(|((x, y), &s)| x.conj() * re(s) * y.conj())
        .sum()
}

/// Conserved PT form; `H` must be PT-pseudo-Hermitian.
pub fn conserved_pt_form(h: &CMat, eta_pt: &EtaMetric, psi0: &StateVector, t: f64) -> Result<Complex64> {
    check_dim(h.nrows(), psi0.len())?;
    let parity = parity_of(eta_pt);
    require_pt_pseudo_hermitian(h, &parity)?;
    Ok(pt_form_unchecked(h, &parity, psi0, t))
}

/// `‖P·conj(exp(−iH†t))·P − exp(+iHt)‖_max`. The backward-in-time
/// propagator on the left is what the antilinear metric produces when it
/// reverses the time argument; it vanishes exactly when `P·Hᵀ·P = H`.
pub fn unitarity_operator_check(h: &CMat, parity: &[f64], t: f64) -> f64 {
    let back = linalg::expm(&(linalg::dagger(h) * c(0.0, -t)));
    let lhs = linalg::sandwich_diag(parity, &linalg::conj(&back));
    let rhs = linalg::expm(&(h * c(0.0, t)));
    linalg::max_abs_diff(&lhs, &rhs)
}

/// `⟨ψ|η|Aψ⟩`.
pub fn pseudo_expectation(a: &CMat, psi: &StateVector, eta: &EtaMetric) -> Result<Complex64> {
    check_dim(a.ncols(), psi.len())?;
    eta_form(psi, &(a * psi), eta)
}

/// `exp(+iHt)·A₀·exp(−iHt)`.
pub fn heisenberg_evolve(a0: &CMat, h: &CMat, t: f64) -> CMat {
    let fwd = linalg::expm(&(h * c(0.0, t)));
    let bwd = linalg::expm(&(h * c(0.0, -t)));
    linalg::mm(&linalg::mm(&fwd, a0), &bwd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceResidual {
    /// `‖P·A(−t)ᵀ·P − A(t)‖_max`.
    pub time_reversed: f64,
    /// `‖P·A(t)ᵀ·P − A(t)‖_max`, reported only.
    pub same_time: f64,
}

/// Checks that PT-pseudo-self-adjointness of `A₀` is carried along the
/// Heisenberg flow.
pub fn adjoint_covariance_check(a0: &CMat, h: &CMat, parity: &[f64], t: f64) -> Result<CovarianceResidual> {
    let initial = linalg::max_abs_diff(&linalg::sandwich_diag(parity, &a0.transpose()), a0);
    if initial > 1e-12 {
        return Err(Error::InitialNotSelfAdjoint { residual: initial });
    }
    Ok(covariance_unchecked(a0, h, parity, t))
}

fn covariance_unchecked(a0: &CMat, h: &CMat, parity: &[f64], t: f64) -> CovarianceResidual {
    let at = heisenberg_evolve(a0, h, t);
    let am = heisenberg_evolve(a0, h, -t);
    CovarianceResidual {
        time_reversed: linalg::max_abs_diff(&linalg::sandwich_diag(parity, &am.transpose()), &at),
        same_time: linalg::max_abs_diff(&linalg::sandwich_diag(parity, &at.transpose()), &at),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EhrenfestResidual {
    /// Central difference of `g(t) = ⟨ψ|PT|A(t)ψ⟩`.
    pub lhs: Complex64,
    /// `⟨ψ|PT|i[H, A(t)]ψ⟩`.
    pub rhs: Complex64,
    pub residual: f64,
    /// `residual / dt²`.
    pub constant: f64,
}

/// Derivative of the PT pseudo-expectation along the Heisenberg flow. The
/// factor `i` stays inside the bracket because the antilinear metric
/// conjugates scalars.
pub fn ehrenfest_check(
    a0: &CMat,
    h: &CMat,
    psi: &StateVector,
    eta_pt: &EtaMetric,
    t: f64,
    dt: f64,
) -> Result<EhrenfestResidual> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
    }
    // A(s)·v = exp(iHs)·A₀·exp(−iHs)·v, applied to vectors only
    let evolved = |s: f64, v: &CVec| -> CVec {
        let fwd = linalg::expm(&(h * c(0.0, s)));
        let bwd = linalg::expm(&(h * c(0.0, -s)));
        &fwd * (a0 * (&bwd * v))
    };
    let g = |s: f64| eta_form(psi, &evolved(s, psi), eta_pt);
    let lhs = (g(t + dt)? - g(t - dt)?) / re(2.0 * dt);
    let comm_psi = (h * evolved(t, psi) - evolved(t, &(h * psi))) * I;
    let rhs = eta_form(psi, &comm_psi, eta_pt)?;
    let residual = (lhs - rhs).norm();
    Ok(EhrenfestResidual {
        lhs,
        rhs,
        residual,
        constant: residual / (dt * dt),
    })
}

/// PT-pseudo-self-adjoint monomials `{H, p₁², p₂², x₁², x₂², x₁x₂, p₁p₂, i·p₁p₂}`.
pub fn selfadjoint_basis(ops: &OperatorSet, h: &CMat) -> Vec<(&'static str, CMat)> {
    let (x1s, x2s, p1s, p2s) = ops.squares();
    vec![
        ("H", h.clone()),
        ("p1^2", p1s),
        ("p2^2", p2s),
        ("x1^2", x1s),
        ("x2^2", x2s),
        ("x1x2", &ops.x1 * &ops.x2),
        ("p1p2", ops.p1p2()),
        ("i p1p2", ops.p1p2() * I),
    ]
}

/// Real-linear combination of the basis with coefficients in `[−1, 1)`.
pub fn random_selfadjoint(basis: &[(&'static str, CMat)], rng: &mut impl Rng) -> CMat {
    let n = basis[0].1.nrows();
    basis.iter().fold(CMat::zeros(n, n), |acc, (_, m)| {
        acc + m * re(rng.random_range(-1.0..1.0))
    })
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Normalized random combinations of the `count` lowest eigenvectors of
/// `h` with `|Im λ| < imag_tol`. Truncation also produces eigenvalues with
/// large imaginary parts; states built only from the real-spectrum modes
/// avoid their exponential growth under `exp(∓iHt)`.
pub fn physical_states(
    h: &CMat,
    count: usize,
    states: usize,
    imag_tol: f64,
    rng: &mut impl Rng,
) -> Result<Vec<StateVector>> {
    let (vals, vecs) = linalg::eigen(h)?;
    let mut idx: Vec<usize> = (0..vals.len()).filter(|&k| vals[k].im.abs() < imag_tol).collect();
    idx.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re).then(a.cmp(&b)));
    idx.truncate(count);
    if idx.is_empty() {
        return Err(Error::Eigensolver {
            dim: h.nrows(),
            max_abs: linalg::max_abs(h.iter()),
            reason: "no eigenvalues with small imaginary part".into(),
        });
    }
    let mut out = Vec::with_capacity(states);
    for _ in 0..states {
        let mut v = CVec::zeros(h.nrows());
        for &k in &idx {
            let w = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            v += vecs.column(k) * w;
        }
        let norm = v.norm();
        out.push(v / re(norm));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass when `residual ≤ tolerance`.
    AtMost,
    /// Pass when `residual > tolerance` (negative controls).
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub metric: Option<MetricName>,
    pub params: ModelParams,
    pub n_max: Option<usize>,
    pub residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub asserted: bool,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(
        check: impl Into<String>,
        metric: Option<MetricName>,
        params: &ModelParams,
        n_max: Option<usize>,
        residual: f64,
        tolerance: f64,
        comparison: Comparison,
        asserted: bool,
    ) -> Self {
        let pass = match comparison {
            Comparison::AtMost => residual <= tolerance,
            Comparison::Exceeds => residual > tolerance,
        };
        CheckRecord {
            check: check.into(),
            metric,
            params: params.clone(),
            n_max,
            residual,
            tolerance,
            comparison,
            asserted,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.records.extend(other.records);
    }

    pub fn get(&self, check: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.check == check)
    }

    pub fn count(&self, check: &str) -> usize {
        self.records.iter().filter(|r| r.check == check).count()
    }

    pub fn all_asserted_pass(&self) -> bool {
        self.records.iter().filter(|r| r.asserted).all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| r.asserted && !r.pass).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityConfig {
    pub n_max: usize,
    pub seed: u64,
    /// Random states for the linear-metric reality check.
    pub reality_samples: usize,
    /// Random `(A, ψ)` pairs for the expectation identity.
    pub expectation_samples: usize,
    pub times: Vec<f64>,
    /// Physical states used for the conserved-form check.
    pub conserved_states: usize,
    /// Number of low-lying real-spectrum modes mixed into each state.
    pub physical_modes: usize,
    pub covariance_time: f64,
    pub ehrenfest_time: f64,
    pub ehrenfest_dt: f64,
    /// Strength `ε` of the `i·ε·x₁` perturbation used by the negative
    /// controls.
    pub control_strength: f64,
    /// Run the main checks on the perturbed generator.
    pub perturb: bool,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            n_max: 10,
            seed: 20240917,
            reality_samples: 1000,
            expectation_samples: 1000,
            times: vec![0.5, 1.0, 5.0],
            conserved_states: 4,
            physical_modes: 6,
            covariance_time: 1.0,
            ehrenfest_time: 0.7,
            ehrenfest_dt: 1e-3,
            control_strength: 0.1,
            perturb: false,
        }
    }
}

pub const REALITY_TOL: f64 = 1e-12;
pub const CONSERVED_FORM_TOL: f64 = 1e-10;
pub const UNITARITY_TOL: f64 = 1e-10;
pub const EXPECTATION_TOL: f64 = 1e-12;
pub const COVARIANCE_TOL: f64 = 1e-9;
pub const EHRENFEST_TOL: f64 = 1e-5;
/// Half-width of the accepted band around 4 for the step-halving ratio.
pub const RICHARDSON_BAND: f64 = 0.5;

/// The six metric identities (reality, conserved form, unitarity,
/// expectation values, covariance, Ehrenfest) with their reported variants
/// and negative controls. Each primary check appears exactly once;
/// residuals are maxima over the sampled states, observables and times.
pub fn identity_suite(p: &ModelParams, cfg: &IdentityConfig) -> Result<VerificationReport> {
    let spec = FockSpec::new(cfg.n_max)?;
    let ops = build_operators(spec)?;
    let h_model = hamiltonian_from(p, &ops);
    let perturbed = &h_model + &ops.x1 * c(0.0, cfg.control_strength);
    let h = if cfg.perturb {
        perturbed.clone()
    } else {
        h_model.clone()
    };
    let parity = ops.parity_diag().to_vec();
    let eta_p = EtaMetric::build(MetricName::P, &ops);
    let eta_pt = EtaMetric::build(MetricName::PT, &ops);
    let d = spec.dim();
    let n = Some(cfg.n_max);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = VerificationReport::default();
    let rec = |check: &str, metric, residual, tol, cmp, asserted| {
        CheckRecord::new(check, metric, p, n, residual, tol, cmp, asserted)
    };

    // Reality: ⟨ψ|P|ψ⟩ is real; report how often ⟨ψ|PT|ψ⟩ is not.
    let mut reality = 0.0_f64;
    let mut pt_complex = 0usize;
    for _ in 0..cfg.reality_samples {
        let psi = random_vector(&mut rng, d);
        let (v, _) = reality_check(&psi, &eta_p)?;
        reality = reality.max(v.im.abs() / v.norm().max(f64::MIN_POSITIVE));
        let (_, real) = reality_check(&psi, &eta_pt)?;
        if !real {
            pt_complex += 1;
        }
    }
    report.push(rec(
        "metric.reality",
        Some(MetricName::P),
        reality,
        REALITY_TOL,
        Comparison::AtMost,
        true,
    ));
    let frac = pt_complex as f64 / cfg.reality_samples.max(1) as f64;
    report.push(rec(
        "metric.reality.pt_nonreal_fraction",
        Some(MetricName::PT),
        frac,
        0.0,
        Comparison::Exceeds,
        false,
    ));

    // Conserved PT form on real-spectrum states.
    let states = physical_states(&h, cfg.physical_modes, cfg.conserved_states, 1e-6, &mut rng)?;
    let mut conserved = 0.0_f64;
    let mut same_time = 0.0_f64;
    for psi in &states {
        let f0 = pt_form_unchecked(&h, &parity, psi, 0.0);
        for &t in &cfg.times {
            conserved = conserved.max((pt_form_unchecked(&h, &parity, psi, t) - f0).norm());
            same_time = same_time.max((pt_form_same_time(&h, &parity, psi, t) - f0).norm());
        }
    }
    report.push(rec(
        "metric.conserved_form",
        Some(MetricName::PT),
        conserved,
        CONSERVED_FORM_TOL,
        Comparison::AtMost,
        true,
    ));
    report.push(rec(
        "metric.conserved_form.same_time",
        Some(MetricName::PT),
        same_time,
        CONSERVED_FORM_TOL,
        Comparison::AtMost,
        false,
    ));
    let generic = random_vector(&mut rng, d);
    let f0 = pt_form_unchecked(&h, &parity, &generic, 0.0);
    let generic_drift = cfg
        .times
        .iter()
        .map(|&t| (pt_form_unchecked(&h, &parity, &generic, t) - f0).norm() / f0.norm().max(1.0))
        .fold(0.0, f64::max);
    report.push(rec(
        "metric.conserved_form.generic_state",
        Some(MetricName::PT),
        generic_drift,
        CONSERVED_FORM_TOL,
        Comparison::AtMost,
        false,
    ));

    // Unitarity: operator form of the conservation statement.
    let unitarity = cfg
        .times
        .iter()
        .map(|&t| unitarity_operator_check(&h, &parity, t))
        .fold(0.0, f64::max);
    report.push(rec(
        "metric.unitarity",
        Some(MetricName::PT),
        unitarity,
        UNITARITY_TOL,
        Comparison::AtMost,
        true,
    ));

    // Expectation: ⟨A^‡⟩ = ⟨A⟩ for PT and ⟨A^‡⟩ = conj⟨A⟩ for P, arbitrary A.
    let mut expectation = 0.0_f64;
    let mut expectation_linear = 0.0_f64;
    for _ in 0..cfg.expectation_samples {
        let a = random_matrix(&mut rng, d);
        let psi = random_vector(&mut rng, d);
        let lhs = pseudo_expectation(&pseudo_adjoint(&a, &eta_pt)?, &psi, &eta_pt)?;
        let rhs = pseudo_expectation(&a, &psi, &eta_pt)?;
        expectation = expectation.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        let lhs = pseudo_expectation(&pseudo_adjoint(&a, &eta_p)?, &psi, &eta_p)?;
        let rhs = pseudo_expectation(&a, &psi, &eta_p)?.conj();
        expectation_linear = expectation_linear.max((lhs - rhs).norm() / rhs.norm().max(1.0));
    }
    report.push(rec(
        "metric.expectation",
        Some(MetricName::PT),
        expectation,
        EXPECTATION_TOL,
        Comparison::AtMost,
        true,
    ));
    report.push(rec(
        "metric.expectation.linear",
        Some(MetricName::P),
        expectation_linear,
        EXPECTATION_TOL,
        Comparison::AtMost,
        true,
    ));

    // Covariance for the self-adjoint basis and a random combination.
    let mut observables = selfadjoint_basis(&ops, &h_model);
    observables.push(("random", random_selfadjoint(&observables, &mut rng)));
    let mut covariance = 0.0_f64;
    let mut covariance_same = 0.0_f64;
    for (_, a0) in &observables {
        let r = covariance_unchecked(a0, &h, &parity, cfg.covariance_time);
        covariance = covariance.max(r.time_reversed);
        covariance_same = covariance_same.max(r.same_time);
    }
    report.push(rec(
        "metric.covariance",
        Some(MetricName::PT),
        covariance,
        COVARIANCE_TOL,
        Comparison::AtMost,
        true,
    ));
    report.push(rec(
        "metric.covariance.same_time",
        Some(MetricName::PT),
        covariance_same,
        COVARIANCE_TOL,
        Comparison::AtMost,
        false,
    ));

    // Ehrenfest relation, second order in dt.
    let psi = states[0].clone();
    let mut ehrenfest = 0.0_f64;
    let mut ehrenfest_half = 0.0_f64;
    for (_, a0) in observables.iter().filter(|(name, _)| *name != "H") {
        let full = ehrenfest_check(a0, &h, &psi, &eta_pt, cfg.ehrenfest_time, cfg.ehrenfest_dt)?;
        let half = ehrenfest_check(a0, &h, &psi, &eta_pt, cfg.ehrenfest_time, cfg.ehrenfest_dt / 2.0)?;
        if full.residual > ehrenfest {
            ehrenfest = full.residual;
            ehrenfest_half = half.residual;
        }
    }
    let ratio = ehrenfest / ehrenfest_half;
    report.push(rec(
        "metric.ehrenfest",
        Some(MetricName::PT),
        ehrenfest,
        EHRENFEST_TOL,
        Comparison::AtMost,
        true,
    ));
    report.push(rec(
        "metric.ehrenfest.richardson_ratio",
        Some(MetricName::PT),
        (ratio - 4.0).abs(),
        RICHARDSON_BAND,
        Comparison::AtMost,
        true,
    ));
    let h_const = ehrenfest_check(&h_model, &h, &psi, &eta_pt, cfg.ehrenfest_time, cfg.ehrenfest_dt)?;
    report.push(rec(
        "metric.ehrenfest.hamiltonian",
        Some(MetricName::PT),
        h_const.rhs.norm(),
        1e-12 * linalg::max_abs(h_model.iter()).max(1.0),
        Comparison::AtMost,
        !cfg.perturb,
    ));

    // Negative controls: the perturbed generator must break the conserved
    // form, unitarity and covariance checks.
    let ctrl_states = physical_states(
        &perturbed,
        cfg.physical_modes,
        cfg.conserved_states,
        1e-6,
        &mut rng,
    )
    .unwrap_or_else(|_| vec![random_vector(&mut rng, d)]);
    let mut ctrl_conserved = 0.0_f64;
    for psi in &ctrl_states {
        let f0 = pt_form_unchecked(&perturbed, &parity, psi, 0.0);
        for &t in &cfg.times {
            ctrl_conserved = ctrl_conserved.max((pt_form_unchecked(&perturbed, &parity, psi, t) - f0).norm());
        }
    }
    let ctrl_unitarity = cfg
        .times
        .iter()
        .map(|&t| unitarity_operator_check(&perturbed, &parity, t))
        .fold(0.0, f64::max);
    let (x1s, _, p1s, _) = ops.squares();
    let ctrl_covariance = [p1s, x1s]
        .iter()
        .map(|a0| covariance_unchecked(a0, &perturbed, &parity, cfg.covariance_time).time_reversed)
        .fold(0.0, f64::max);
    report.push(rec(
        "metric.conserved_form.negative_control",
        Some(MetricName::PT),
        ctrl_conserved,
        CONSERVED_FORM_TOL,
        Comparison::Exceeds,
        true,
    ));
    report.push(rec(
        "metric.unitarity.negative_control",
        Some(MetricName::PT),
        ctrl_unitarity,
        UNITARITY_TOL,
        Comparison::Exceeds,
        true,
    ));
    report.push(rec(
        "metric.covariance.negative_control",
        Some(MetricName::PT),
        ctrl_covariance,
        COVARIANCE_TOL,
        Comparison::Exceeds,
        true,
    ));

    Ok(report)
}
