//! The five subcommands. Each returns its summary, check records and output
//! files; [`crate::execute`] wraps them into the run report.

use std::path::PathBuf;

use num_complex::Complex64;
use ptpu_core::dynamics::{
    energy_drift, evolve, fourth_order_residual, hamilton_matrix, modal_check, pu_form_residual,
    second_order_check, uniform_grid, write_trajectory_csv,
};
use ptpu_core::fock::{build_operators, check_symmetries_of, hamiltonian_from, FockSpec, MetricName};
use ptpu_core::params::{classify, derive_all, frequency_relation_residuals, permute, solve_frequencies};
use ptpu_core::pseudoherm::{identity_suite, IdentityConfig, CheckRecord, Comparison};
use ptpu_core::quadform::{
    apply_map, check_induced_permutation, check_permutation_invariance, expected_branch_form,
    expected_intermediate_form, final_map, hamiltonian_form, intermediate_map, CVec4,
};
use ptpu_core::spectra::{convergence_study, naive_levels, write_spectrum_csv, LatticeFinding, StudyOptions};
use ptpu_core::{CaseLabel, ModelParams};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{fmt15, report_file_name, to_json};
use crate::CliError;

pub const SPECTRUM_CSV: &str = "spectrum.csv";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const VERIFY_JSON: &str = "verify_checks.json";

const SYMMETRY_TOL: f64 = 1e-13;
const BREAKING_TOL: f64 = 0.1;
const PIPELINE_FORM_TOL: f64 = 1e-10;
const SYMPLECTIC_TOL: f64 = 1e-12;
const RELATION_TOL: f64 = 1e-12;
const HERMITIAN_CONTROL_TOL: f64 = 1e-10;
const DRIFT_TOL: f64 = 1e-10;
const SCALED_DRIFT_TOL: f64 = 1e-12;
const MODAL_TOL: f64 = 1e-10;

/// What a command produced, before it is wrapped into a run report.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub summary: Value,
    pub records: Vec<CheckRecord>,
    /// Entries that are not check records (used by `report`).
    pub extra_results: Vec<Value>,
    /// Files to write into the output directory, by name.
    pub files: Vec<(String, Vec<u8>)>,
    /// Lines for stdout.
    pub lines: Vec<String>,
    /// Failure not captured by a record.
    pub failed: bool,
}

impl CommandOutput {
    pub fn pass(&self) -> bool {
        !self.failed && self.records.iter().all(|r| !r.asserted || r.pass)
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn fmt_c(z: Complex64) -> String {
    format!("{} {:+.14e}i", fmt15(z.re), z.im)
}

fn record(
    check: &str,
    metric: Option<MetricName>,
    p: &ModelParams,
    n_max: Option<usize>,
    residual: f64,
    tolerance: f64,
    comparison: Comparison,
    asserted: bool,
) -> CheckRecord {
    CheckRecord::new(check, metric, p, n_max, residual, tolerance, comparison, asserted)
}

fn at_most(check: &str, p: &ModelParams, residual: f64, tolerance: f64) -> CheckRecord {
    record(check, None, p, None, residual, tolerance, Comparison::AtMost, true)
}

fn record_line(r: &CheckRecord) -> String {
    let status = match (r.asserted, r.pass) {
        (false, _) => "info",
        (true, true) => "pass",
        (true, false) => "FAIL",
    };
    let op = match r.comparison {
        Comparison::AtMost => "<=",
        Comparison::Exceeds => ">",
    };
    let metric = r.metric.map(|m| format!(" [{m}]")).unwrap_or_default();
    format!(
        "{status:4} {}{metric}: {} (tol {op} {})",
        r.check,
        fmt15(r.residual),
        fmt15(r.tolerance)
    )
}

pub fn classify_cmd(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let p = cfg.model_params()?;
    let case = classify(&p);
    let roots = solve_frequencies(&p, true);
    let (sum_err, prod_err) = frequency_relation_residuals(&p, roots);
    let mut out = CommandOutput::default();
    out.records.push(at_most("classify.sum_relation", &p, sum_err, RELATION_TOL));
    out.records.push(at_most("classify.product_relation", &p, prod_err, RELATION_TOL));
    out.lines.push(format!("case: {case:?}"));
    out.lines.push(format!("omega1^2: {}", fmt_c(roots.0)));
    out.lines.push(format!("omega2^2: {}", fmt_c(roots.1)));
    let mut summary = json!({
        "case": case,
        "omega1_sq": complex_json(roots.0),
        "omega2_sq": complex_json(roots.1),
        "discriminant": p.discriminant(),
    });
    if case == CaseLabel::CaseI {
        let d = derive_all(&p)?;
        out.records.push(at_most(
            "classify.alpha_constraint",
            &p,
            d.alpha_constraint_residual(),
            RELATION_TOL,
        ));
        let (w1, w2) = d.frequencies();
        out.lines.push(format!("alpha1: {}", fmt_c(d.alpha1)));
        out.lines.push(format!("alpha2: {}", fmt_c(d.alpha2)));
        out.lines.push(format!("U: {}", fmt15(d.u)));
        out.lines.push(format!("omega: {}", fmt15(d.omega)));
        out.lines.push(format!("m: {}", fmt15(d.m)));
        out.lines.push(format!("branch: {}", d.branch.number()));
        summary["derived"] = json!({
            "alpha1": complex_json(d.alpha1),
            "alpha2": complex_json(d.alpha2),
            "u": d.u,
            "omega": d.omega,
            "m": d.m,
            "omega1": w1,
            "omega2": w2,
            "branch": d.branch.number(),
        });
    }
    out.summary = summary;
    Ok(out)
}

pub fn spectrum_cmd(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let s = &cfg.spectrum;
    let p = cfg.model_params()?;
    let case = classify(&p);
    let opts = StudyOptions {
        drift_tol: s.drift_tol,
        imag_tol: s.imag_tol,
        match_rel_tol: s.match_rel_tol,
        ..StudyOptions::default()
    };
    let r = convergence_study(&p, &s.n_max, s.k, opts)?;
    let mut out = CommandOutput::default();
    let mut csv = Vec::new();
    write_spectrum_csv(&r, &mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    out.files.push((SPECTRUM_CSV.to_string(), csv));

    let exploratory = case != CaseLabel::CaseI;
    let n_last = r.truncations.last().map(|t| t.n_max);
    if exploratory {
        out.lines.push(format!("{case:?}: exploratory run, no lattice target and no assertions"));
    } else {
        out.lines.push(format!("finding: {:?}", r.finding));
    }
    for l in &r.levels {
        let assigned = match (l.n1, l.n2) {
            (Some(a), Some(b)) => format!("{:?}({a},{b}) mismatch {}", l.lattice, fmt15(l.mismatch)),
            _ => "unmatched".to_string(),
        };
        out.lines.push(format!(
            "level {}: {} drift {} {assigned}; naive distance {}",
            l.index,
            fmt_c(l.value),
            fmt15(l.drift),
            fmt15(l.naive_distance)
        ));
    }

    if s.hermitian_control {
        let worst = r.levels.iter().map(|l| l.mismatch).fold(0.0, f64::max);
        let mut rec = record(
            "spectrum.hermitian_control",
            None,
            &p,
            n_last,
            worst,
            HERMITIAN_CONTROL_TOL,
            Comparison::AtMost,
            true,
        );
        rec.pass &= r.levels.len() == s.k;
        out.records.push(rec);
    } else if !exploratory {
        let worst = r.levels.iter().map(|l| l.relative_mismatch).fold(0.0, f64::max);
        let mut rec = record(
            "spectrum.finding",
            None,
            &p,
            n_last,
            worst,
            s.match_rel_tol,
            Comparison::AtMost,
            true,
        );
        rec.pass &= r.finding != LatticeFinding::Undecided;
        out.records.push(rec);
    }

    let levels: Vec<Value> = r
        .levels
        .iter()
        .map(|l| {
            json!({
                "index": l.index,
                "value": complex_json(l.value),
                "drift": l.drift,
                "converged": l.converged,
                "lattice": l.lattice.csv_tag(),
                "n1": l.n1,
                "n2": l.n2,
                "mismatch": l.mismatch,
                "relative_mismatch": l.relative_mismatch,
                "naive_distance": l.naive_distance,
            })
        })
        .collect();
    let truncations: Vec<Value> = r
        .truncations
        .iter()
        .map(|t| {
            json!({
                "n_max": t.n_max,
                "dim": t.dim,
                "max_abs_imag_all": t.max_abs_imag_all,
                "conjugation_pairing_residual": t.conjugation_pairing_residual,
            })
        })
        .collect();
    out.summary = json!({
        "case": case,
        "exploratory": exploratory,
        "hermitian_control": s.hermitian_control,
        "omega1": r.omega1,
        "omega2": r.omega2,
        "finding": r.finding,
        "target": r.target.iter().map(|l| json!({"n1": l.n1, "n2": l.n2, "energy": l.energy})).collect::<Vec<_>>(),
        "levels": levels,
        "truncations": truncations,
        "max_relative_mismatch": r.max_relative_mismatch,
        "max_abs_imag": r.max_abs_imag,
    });
    Ok(out)
}

pub fn dynamics_cmd(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let s = &cfg.dynamics;
    let p = cfg.model_params()?;
    let case = classify(&p);
    let times = uniform_grid(s.t_end, s.points)?;
    let z0 = CVec4::from_fn(|i, _| Complex64::new(s.initial[i], 0.0));
    let traj = evolve(&p, &z0, &times)?;
    let mut out = CommandOutput::default();
    let mut csv = Vec::new();
    write_trajectory_csv(&traj, &mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    out.files.push((TRAJECTORY_CSV.to_string(), csv));

    let a_norm = hamilton_matrix(&p).max_abs();
    out.records.push(at_most(
        "dynamics.cayley_hamilton",
        &p,
        fourth_order_residual(&p),
        1e-12 * a_norm.powi(4),
    ));
    out.records.push(at_most(
        "dynamics.pu_coefficients",
        &p,
        pu_form_residual(&p, false)?.residual,
        RELATION_TOL,
    ));
    out.records.push(at_most(
        "dynamics.second_order",
        &p,
        second_order_check(&p, &traj)?,
        RELATION_TOL,
    ));
    // Complex frequencies make the flow grow exponentially; there the
    // relative drift measures rounding of |z|², so the scaled drift is the
    // asserted quantity.
    let growing = case == CaseLabel::CaseIII;
    let drift = energy_drift(&traj);
    out.records.push(record(
        "dynamics.energy_drift",
        None,
        &p,
        None,
        drift.relative,
        DRIFT_TOL,
        Comparison::AtMost,
        !growing,
    ));
    out.records.push(record(
        "dynamics.energy_drift_scaled",
        None,
        &p,
        None,
        drift.scaled,
        SCALED_DRIFT_TOL,
        Comparison::AtMost,
        growing,
    ));
    let mut note = None;
    if case == CaseLabel::CaseI {
        let m = modal_check(&traj)?;
        let scale = m.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
        out.records.push(at_most("dynamics.modal_frequencies", &p, m.frequency_residual, MODAL_TOL * scale));
        out.records.push(at_most("dynamics.modal_reconstruction", &p, m.reconstruction_residual, MODAL_TOL));
    } else if case == CaseLabel::CaseII {
        note = Some("equal frequencies: the flow has secular modes growing polynomially in t");
    } else {
        note = Some("complex frequencies: the flow grows exponentially");
    }
    if let Some(n) = note {
        out.lines.push(n.to_string());
    }
    out.lines.push(format!("points: {}, max |z|: {}", traj.len(), fmt15(traj.max_norm())));
    out.summary = json!({
        "case": case,
        "points": traj.len(),
        "t_end": s.t_end,
        "max_norm": traj.max_norm(),
        "max_abs_imag": traj.max_abs_imag(),
        "energy_initial": complex_json(drift.initial),
        "energy_drift_absolute": drift.absolute,
        "note": note,
    });
    Ok(out)
}

fn symmetry_records(p: &ModelParams, cfg: &RunConfig) -> Result<Vec<CheckRecord>, CliError> {
    let v = &cfg.verify;
    let ops = build_operators(FockSpec::new(v.n_max)?)?;
    let mut h = hamiltonian_from(p, &ops);
    if v.perturb {
        h += &ops.x1 * Complex64::new(0.0, v.control_strength);
    }
    let s = check_symmetries_of(&h, p, &ops)?;
    let n = Some(v.n_max);
    let mut out = vec![
        record("symmetry.hermiticity", None, p, n, s.hermiticity_residual, BREAKING_TOL, Comparison::Exceeds, true),
        record(
            "symmetry.pt_symmetry",
            Some(MetricName::PT),
            p,
            n,
            s.pt_symmetry_residual,
            BREAKING_TOL,
            Comparison::Exceeds,
            true,
        ),
        record(
            "symmetry.pt_breaking_size",
            Some(MetricName::PT),
            p,
            n,
            (s.pt_symmetry_residual - s.pt_symmetry_expected).abs(),
            1e-12 * s.pt_symmetry_expected.max(1.0),
            Comparison::AtMost,
            true,
        ),
        record("symmetry.transpose", None, p, n, s.transpose_residual, SYMMETRY_TOL, Comparison::AtMost, true),
        record(
            "symmetry.parity_commutator",
            Some(MetricName::P),
            p,
            n,
            s.parity_commutator_residual,
            SYMMETRY_TOL,
            Comparison::AtMost,
            true,
        ),
    ];
    for &(name, r) in &s.pseudo_hermiticity {
        // H is not P-pseudo-Hermitian; that entry is informational.
        let asserted = name != MetricName::P;
        out.push(record(
            "symmetry.pseudo_hermiticity",
            Some(name),
            p,
            n,
            r,
            SYMMETRY_TOL,
            Comparison::AtMost,
            asserted,
        ));
    }
    Ok(out)
}

fn pipeline_records(p: &ModelParams) -> Result<Vec<CheckRecord>, CliError> {
    let h = hamiltonian_form(p);
    let d = derive_all(p)?;
    let imap = intermediate_map(p)?;
    let inter = apply_map(&h, &imap)?;
    let fmap = final_map(p)?;
    let fin = apply_map(&h, &fmap)?;
    let perm = check_induced_permutation(p)?;
    let k = 6;
    let dp = derive_all(&permute(p))?;
    let own: Vec<f64> = naive_levels(d.u, d.omega, d.branch, k).energies();
    let mut other: Vec<f64> = naive_levels(dp.u, dp.omega, dp.branch, k).energies();
    other.reverse();
    let negation = own
        .iter()
        .zip(&other)
        .map(|(a, b)| (a + b).abs())
        .fold(0.0, f64::max);
    let scale = own.iter().map(|e| e.abs()).fold(1.0, f64::max);
    Ok(vec![
        at_most(
            "pipeline.intermediate_form",
            p,
            inter.max_diff(&expected_intermediate_form(p)?),
            PIPELINE_FORM_TOL,
        ),
        at_most("pipeline.branch_form", p, fin.max_diff(&expected_branch_form(p)?), PIPELINE_FORM_TOL),
        at_most("pipeline.symplectic", p, fmap.symplectic_residual(), SYMPLECTIC_TOL),
        // The intermediate map is not canonical; its residual is recorded only.
        record(
            "pipeline.intermediate_symplectic",
            None,
            p,
            None,
            imap.symplectic_residual(),
            SYMPLECTIC_TOL,
            Comparison::AtMost,
            false,
        ),
        at_most("pipeline.alpha_constraint", p, d.alpha_constraint_residual(), RELATION_TOL),
        at_most("permutation.hamiltonian_invariance", p, check_permutation_invariance(p), 1e-14),
        at_most("permutation.alpha_map", p, perm.alpha_residual, 1e-12),
        at_most(
            "permutation.intermediate_invariance",
            p,
            perm.intermediate_invariance_residual,
            1e-10,
        ),
        at_most(
            "permutation.branch_flip",
            p,
            if perm.branch_flipped() { perm.branch_flip_residual } else { f64::INFINITY },
            1e-10,
        ),
        at_most("permutation.naive_negation", p, negation, 1e-14 * scale),
    ])
}

fn metric_selected(cfg: &RunConfig, m: Option<MetricName>) -> bool {
    match &cfg.verify.metrics {
        None => true,
        Some(list) => m.is_some_and(|m| list.contains(&m)),
    }
}

pub fn verify_cmd(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let v = &cfg.verify;
    let p = cfg.model_params()?;
    let case = classify(&p);
    let mut records = symmetry_records(&p, cfg)?;
    let mut notes = Vec::new();
    if case == CaseLabel::CaseI {
        records.extend(pipeline_records(&p)?);
    } else {
        notes.push(format!("{case:?}: diagonalization pipeline skipped (Case I only)"));
    }
    let identities_needed = [MetricName::P, MetricName::PT]
        .iter()
        .any(|&m| metric_selected(cfg, Some(m)));
    if identities_needed {
        let acfg = IdentityConfig {
            n_max: v.n_max,
            seed: cfg.seed,
            reality_samples: v.reality_samples,
            expectation_samples: v.expectation_samples,
            times: v.times.clone(),
            control_strength: v.control_strength,
            perturb: v.perturb,
            ..IdentityConfig::default()
        };
        records.extend(identity_suite(&p, &acfg)?.records);
    }
    records.retain(|r| metric_selected(cfg, r.metric));

    let mut out = CommandOutput::default();
    out.lines.extend(notes.iter().cloned());
    out.lines.extend(records.iter().map(record_line));
    let failed: Vec<&str> = records
        .iter()
        .filter(|r| r.asserted && !r.pass)
        .map(|r| r.check.as_str())
        .collect();
    out.summary = json!({
        "case": case,
        "n_max": v.n_max,
        "perturb": v.perturb,
        "checks": records.len(),
        "asserted": records.iter().filter(|r| r.asserted).count(),
        "failed": failed,
        "notes": notes,
    });
    let checks = to_json(&records)?;
    out.files.push((VERIFY_JSON.to_string(), crate::output::json_text(&checks).into_bytes()));
    out.records = records;
    Ok(out)
}

fn default_report_files(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let own = report_file_name("report");
    let entries = std::fs::read_dir(&cfg.out_dir)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", cfg.out_dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run_") && n.ends_with(".json") && n != own)
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn report_cmd(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let files = if cfg.report_files.is_empty() {
        default_report_files(cfg)?
    } else {
        cfg.report_files.clone()
    };
    if files.is_empty() {
        return Err(CliError::Input(format!("no run reports found in {}", cfg.out_dir.display())));
    }
    let mut out = CommandOutput::default();
    let mut failing = 0usize;
    for path in &files {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{} is not a run report: {e}", path.display())))?;
        let results = v["results"].as_array().cloned().unwrap_or_default();
        let failed: Vec<Value> = results
            .iter()
            .filter(|r| r["asserted"] == json!(true) && r["pass"] == json!(false))
            .map(|r| r["check"].clone())
            .collect();
        let pass = v["pass"].as_bool().unwrap_or(false);
        if !pass {
            failing += 1;
        }
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        out.lines.push(format!(
            "{} {name}: {} ({} checks, {} failed)",
            if pass { "pass" } else { "FAIL" },
            v["command"].as_str().unwrap_or("?"),
            results.len(),
            failed.len()
        ));
        out.extra_results.push(json!({
            "file": name,
            "command": v["command"],
            "seed": v["seed"],
            "checks": results.len(),
            "failed": failed,
            "pass": pass,
        }));
    }
    out.failed = failing > 0;
    out.summary = json!({"reports": files.len(), "failing_reports": failing});
    Ok(out)
}
