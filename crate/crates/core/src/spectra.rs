//! Level lattices and truncated-basis spectra.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{build_hamiltonian, FockSpec, DEFAULT_DIM_CAP};
use crate::linalg::{self, CMat};
use crate::params::{classify, derive_all, real_frequencies, BranchLabel, CaseLabel, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub n1: usize,
    pub n2: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelLattice {
    pub omega1: f64,
    pub omega2: f64,
    /// Sign pattern for the naive branch lattices; `None` for the bounded one.
    pub branch: Option<BranchLabel>,
    pub levels: Vec<Level>,
}

impl LevelLattice {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn energy(&self, n1: usize, n2: usize) -> Option<f64> {
        self.levels
            .iter()
            .find(|l| l.n1 == n1 && l.n2 == n2)
            .map(|l| l.energy)
    }

    pub fn min(&self) -> Option<f64> {
        self.levels.first().map(|l| l.energy)
    }
}

fn sort_levels(levels: &mut [Level]) {
    levels.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.n1.cmp(&b.n1))
            .then(a.n2.cmp(&b.n2))
    });
}

pub fn bounded_energy(omega1: f64, omega2: f64, n1: usize, n2: usize) -> f64 {
    (n1 as f64 + 0.5) * omega1 + (n2 as f64 + 0.5) * omega2
}

/// The `k` smallest values of `(n₁+½)ω₁ + (n₂+½)ω₂`.
pub fn closed_form_levels(omega1: f64, omega2: f64, k: usize) -> Result<LevelLattice> {
    if !(omega1 > 0.0 && omega2 > 0.0 && omega1.is_finite() && omega2.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "frequencies must be positive, got ({omega1}, {omega2})"
        )));
    }
    // Any level with n₁ ≥ k has k levels (0..k, n₂) at or below it.
    let mut levels = Vec::with_capacity(k * k);
    for n1 in 0..k {
        for n2 in 0..k {
            levels.push(Level {
                n1,
                n2,
                energy: bounded_energy(omega1, omega2, n1, n2),
            });
        }
    }
    sort_levels(&mut levels);
    levels.truncate(k);
    Ok(LevelLattice {
        omega1,
        omega2,
        branch: None,
        levels,
    })
}

/// Signed branch lattice `±(n₁+½)U⁻¹ω ∓ (n₂+½)Uω` on the grid
/// `n₁, n₂ < k` (upper signs for Branch1), sorted ascending.
pub fn naive_levels(u: f64, omega: f64, branch: BranchLabel, k: usize) -> LevelLattice {
    let s = branch.sign();
    let (w1, w2) = (omega / u, omega * u);
    let mut levels = Vec::with_capacity(k * k);
    for n1 in 0..k {
        for n2 in 0..k {
            let energy = s * ((n1 as f64 + 0.5) * w1 - (n2 as f64 + 0.5) * w2);
            levels.push(Level { n1, n2, energy });
        }
    }
    sort_levels(&mut levels);
    LevelLattice {
        omega1: w1,
        omega2: w2,
        branch: Some(branch),
        levels,
    }
}

/// All eigenvalues of `h`, sorted by real then imaginary part.
pub fn numerical_spectrum(h: &CMat) -> Result<Vec<Complex64>> {
    if h.nrows() > DEFAULT_DIM_CAP {
        return Err(Error::DimensionCap {
            dim: h.nrows(),
            cap: DEFAULT_DIM_CAP,
        });
    }
    let mut ev = linalg::eigenvalues(h)?;
    linalg::sort_spectrum(&mut ev);
    Ok(ev)
}

/// Largest distance between `values` and their complex conjugates under a
/// greedy nearest pairing.
pub fn conjugation_pairing_residual(values: &[Complex64]) -> f64 {
    let mut used = vec![false; values.len()];
    let mut worst = 0.0_f64;
    for z in values {
        let target = z.conj();
        let mut best = None;
        for (j, w) in values.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (w - target).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            used[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LatticeKind {
    /// Bounded lattice `(n₁+½)ω₁ + (n₂+½)ω₂`.
    Bounded,
    /// Signed branch lattice of either branch.
    Naive,
    None,
}

impl LatticeKind {
    pub fn csv_tag(self) -> &'static str {
        match self {
            LatticeKind::Bounded => "eq34",
            LatticeKind::Naive => "eq29",
            LatticeKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LatticeFinding {
    Bounded,
    Naive,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyOptions {
    /// Successive-truncation drift below which a level counts as converged.
    pub drift_tol: f64,
    /// `|Im λ|` below which a level counts as converged.
    pub imag_tol: f64,
    /// Relative mismatch accepted when deciding the finding.
    pub match_rel_tol: f64,
    /// Matching rejection radius as a fraction of `min(ω₁, ω₂)`.
    pub radius_fraction: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            drift_tol: 1e-4,
            imag_tol: 1e-4,
            match_rel_tol: 1e-3,
            radius_fraction: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedEigenvalue {
    pub index: usize,
    pub value: Complex64,
    pub lattice: LatticeKind,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    /// `|λ − E|` against the assigned point, `NaN` if unmatched.
    pub mismatch: f64,
    /// Distance to the nearest bounded-lattice point.
    pub bounded_distance: f64,
    /// Distance to the nearest point of either branch lattice.
    pub naive_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationResult {
    pub n_max: usize,
    pub dim: usize,
    /// Every eigenvalue, sorted.
    pub eigenvalues: Vec<Complex64>,
    /// The `k` lowest, matched.
    pub tracked: Vec<MatchedEigenvalue>,
    pub max_abs_imag_all: f64,
    pub conjugation_pairing_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackedLevel {
    pub index: usize,
    pub value: Complex64,
    /// `|λ(n_last) − λ(n_prev)|`; `NaN` with a single truncation.
    pub drift: f64,
    pub converged: bool,
    pub lattice: LatticeKind,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub mismatch: f64,
    pub relative_mismatch: f64,
    pub naive_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub params: ModelParams,
    pub case: CaseLabel,
    pub k: usize,
    pub options: StudyOptions,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub target: Vec<Level>,
    pub truncations: Vec<TruncationResult>,
    pub levels: Vec<TrackedLevel>,
    pub finding: LatticeFinding,
    pub max_mismatch: f64,
    pub max_relative_mismatch: f64,
    pub max_abs_imag: f64,
}

impl SpectrumReport {
    pub fn converged_count(&self) -> usize {
        self.levels.iter().filter(|l| l.converged).count()
    }
}

struct Lattices {
    bounded: Vec<Level>,
    naive: Vec<Level>,
    radius: f64,
}

fn build_lattices(p: &ModelParams, n_box: usize, radius_fraction: f64) -> Option<Lattices> {
    let (w1, w2) = real_frequencies(p)?;
    let mut bounded = Vec::new();
    for n1 in 0..n_box {
        for n2 in 0..n_box {
            bounded.push(Level {
                n1,
                n2,
                energy: bounded_energy(w1, w2, n1, n2),
            });
        }
    }
    sort_levels(&mut bounded);
    let naive = match derive_all(p) {
        Ok(d) => {
            let mut v = naive_levels(d.u, d.omega, BranchLabel::Branch1, n_box).levels;
            v.extend(naive_levels(d.u, d.omega, BranchLabel::Branch2, n_box).levels);
            v
        }
        // a₃ = 0 control: no branch structure
        Err(_) => Vec::new(),
    };
    Some(Lattices {
        bounded,
        naive,
        radius: radius_fraction * w1.min(w2),
    })
}

fn nearest(levels: &[Level], z: Complex64) -> f64 {
    levels
        .iter()
        .map(|l| (z - Complex64::new(l.energy, 0.0)).norm())
        .fold(f64::INFINITY, f64::min)
}

/// One-to-one greedy assignment of eigenvalues to lattice points in order
/// of increasing distance, within `radius`.
fn greedy_assign(values: &[Complex64], levels: &[Level], radius: f64) -> Vec<Option<(usize, f64)>> {
    let mut pairs = Vec::new();
    for (i, z) in values.iter().enumerate() {
        for (j, l) in levels.iter().enumerate() {
            let d = (z - Complex64::new(l.energy, 0.0)).norm();
            if d <= radius {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; values.len()];
    let mut taken = vec![false; levels.len()];
    for (d, i, j) in pairs {
        if out[i].is_none() && !taken[j] {
            out[i] = Some((j, d));
            taken[j] = true;
        }
    }
    out
}

fn match_values(values: &[Complex64], lat: Option<&Lattices>) -> Vec<MatchedEigenvalue> {
    let Some(lat) = lat else {
        return values
            .iter()
            .enumerate()
            .map(|(index, &value)| MatchedEigenvalue {
                index,
                value,
                lattice: LatticeKind::None,
                n1: None,
                n2: None,
                mismatch: f64::NAN,
                bounded_distance: f64::NAN,
                naive_distance: f64::NAN,
            })
            .collect();
    };
    let bounded = greedy_assign(values, &lat.bounded, lat.radius);
    let naive = greedy_assign(values, &lat.naive, lat.radius);
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let pick = match (bounded[index], naive[index]) {
                (Some(b), Some(n)) if n.1 < b.1 => Some((LatticeKind::Naive, &lat.naive[n.0], n.1)),
                (Some(b), _) => Some((LatticeKind::Bounded, &lat.bounded[b.0], b.1)),
                (None, Some(n)) => Some((LatticeKind::Naive, &lat.naive[n.0], n.1)),
                (None, None) => None,
            };
            let (lattice, n1, n2, mismatch) = match pick {
                Some((kind, level, d)) => (kind, Some(level.n1), Some(level.n2), d),
                None => (LatticeKind::None, None, None, f64::NAN),
            };
            MatchedEigenvalue {
                index,
                value,
                lattice,
                n1,
                n2,
                mismatch,
                bounded_distance: nearest(&lat.bounded, value),
                naive_distance: if lat.naive.is_empty() {
                    f64::NAN
                } else {
                    nearest(&lat.naive, value)
                },
            }
        })
        .collect()
}

/// The `k` eigenvalues with smallest real part from a sorted spectrum.
fn lowest(values: &[Complex64], k: usize) -> Vec<Complex64> {
    values.iter().take(k).copied().collect()
}

/// Truncated spectra for each `n_max`, tracking the `k` lowest eigenvalues
/// and matching them against the bounded and naive lattices. Outside Case I
/// (and for the `a₃ = 0` control) the naive lattice is absent; for Case
/// II/III no lattice is matched at all.
pub fn convergence_study(
    p: &ModelParams,
    n_list: &[usize],
    k: usize,
    options: StudyOptions,
) -> Result<SpectrumReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParams("empty n_max list".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    let mut n_sorted = n_list.to_vec();
    n_sorted.sort_unstable();
    n_sorted.dedup();
    let specs = n_sorted
        .iter()
        .map(|&n| FockSpec::new(n))
        .collect::<Result<Vec<_>>>()?;

    let case = classify(p);
    let n_box = n_sorted.last().copied().unwrap_or(0) + k + 1;
    let lattices = if case == CaseLabel::CaseI {
        build_lattices(p, n_box, options.radius_fraction)
    } else {
        None
    };

    let spectra: Vec<Result<Vec<Complex64>>> = specs
        .par_iter()
        .map(|&spec| numerical_spectrum(&build_hamiltonian(p, spec)?))
        .collect();

    let mut truncations = Vec::with_capacity(specs.len());
    for (spec, ev) in specs.iter().zip(spectra) {
        let ev = ev?;
        let tracked = match_values(&lowest(&ev, k), lattices.as_ref());
        truncations.push(TruncationResult {
            n_max: spec.n_max(),
            dim: spec.dim(),
            max_abs_imag_all: ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
            conjugation_pairing_residual: conjugation_pairing_residual(&ev),
            eigenvalues: ev,
            tracked,
        });
    }

    let last = truncations.last().expect("non-empty");
    let prev = truncations.len().checked_sub(2).map(|i| &truncations[i]);
    let mut levels = Vec::with_capacity(k);
    for m in &last.tracked {
        let drift = prev
            .and_then(|t| t.tracked.get(m.index))
            .map(|q| (m.value - q.value).norm())
            .unwrap_or(f64::NAN);
        let converged = drift < options.drift_tol && m.value.im.abs() < options.imag_tol;
        let scale = m.value.norm().max(f64::MIN_POSITIVE);
        levels.push(TrackedLevel {
            index: m.index,
            value: m.value,
            drift,
            converged,
            lattice: m.lattice,
            n1: m.n1,
            n2: m.n2,
            mismatch: m.mismatch,
            relative_mismatch: m.mismatch / scale,
            naive_distance: m.naive_distance,
        });
    }

    let finding = decide(&levels, k, options.match_rel_tol);
    let converged: Vec<&TrackedLevel> = levels.iter().filter(|l| l.converged).collect();
    let max_mismatch = converged.iter().map(|l| l.mismatch).fold(0.0, f64::max);
    let max_relative_mismatch = converged.iter().map(|l| l.relative_mismatch).fold(0.0, f64::max);
    let max_abs_imag = levels.iter().map(|l| l.value.im.abs()).fold(0.0, f64::max);

    let freqs = if case == CaseLabel::CaseI { real_frequencies(p) } else { None };
    let target = match freqs {
        Some((w1, w2)) => closed_form_levels(w1, w2, k)?.levels,
        None => Vec::new(),
    };

    Ok(SpectrumReport {
        params: p.clone(),
        case,
        k,
        options,
        omega1: freqs.map(|f| f.0),
        omega2: freqs.map(|f| f.1),
        target,
        truncations,
        levels,
        finding,
        max_mismatch,
        max_relative_mismatch,
        max_abs_imag,
    })
}

/// A lattice is decisive when all `k` tracked levels converged and match it
/// within `rel_tol`.
fn decide(levels: &[TrackedLevel], k: usize, rel_tol: f64) -> LatticeFinding {
    if levels.len() < k || !levels.iter().all(|l| l.converged) {
        return LatticeFinding::Undecided;
    }
    let all = |kind| {
        levels
            .iter()
            .all(|l| l.lattice == kind && l.relative_mismatch <= rel_tol)
    };
    if all(LatticeKind::Bounded) {
        LatticeFinding::Bounded
    } else if all(LatticeKind::Naive) {
        LatticeFinding::Naive
    } else {
        LatticeFinding::Undecided
    }
}

pub const SPECTRUM_CSV_HEADER: &str = "n_max,index,re,im,matched_n1,matched_n2,mismatch,lattice";

fn opt(v: Option<usize>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

/// One row per tracked eigenvalue per truncation.
pub fn write_spectrum_csv(report: &SpectrumReport, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{SPECTRUM_CSV_HEADER}")?;
    for t in &report.truncations {
        for m in &t.tracked {
            writeln!(
                out,
                "{},{},{:.14e},{:.14e},{},{},{:.14e},{}",
                t.n_max,
                m.index,
                m.value.re,
                m.value.im,
                opt(m.n1),
                opt(m.n2),
                m.mismatch,
                m.lattice.csv_tag()
            )?;
        }
    }
    Ok(())
}
