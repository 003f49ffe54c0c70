//! Derived quantities against 50-digit reference values in
//! `fixtures/golden.json` (regenerate with `fixtures/generate.py`).

use num_complex::Complex64;
use ptpu_core::params::{derive_all, ModelParams};
use ptpu_core::quadform::{
    apply_map, expected_branch_form, expected_intermediate_form, final_map, hamiltonian_form,
    intermediate_map, QuadForm,
};
use ptpu_core::spectra::{bounded_energy, naive_levels};
use ptpu_core::BranchLabel;
use serde_json::Value;

const REL: f64 = 1e-14;
// Transformed forms go through a 4x4 inverse; allow for its rounding.
const FORM_REL: f64 = 1e-13;

fn fixtures() -> Vec<(String, Value)> {
    let v: Value = serde_json::from_str(include_str!("fixtures/golden.json")).unwrap();
    v.as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

fn cnum(v: &Value) -> Complex64 {
    Complex64::new(num(&v[0]), num(&v[1]))
}

fn params(v: &Value) -> ModelParams {
    let p = &v["params"];
    ModelParams::new(num(&p[0]), num(&p[1]), num(&p[2])).unwrap()
}

fn close(name: &str, key: &str, got: f64, want: f64, rel: f64) {
    let err = (got - want).abs();
    assert!(
        err <= rel * want.abs().max(1.0),
        "{name}.{key}: got {got:e}, want {want:e}, err {err:e}"
    );
}

fn cclose(name: &str, key: &str, got: Complex64, want: Complex64, rel: f64) {
    let err = (got - want).norm();
    assert!(
        err <= rel * want.norm().max(1.0),
        "{name}.{key}: got {got}, want {want}, err {err:e}"
    );
}

#[test]
fn derived_parameters_match_reference() {
    for (name, v) in fixtures() {
        let p = params(&v);
        let d = derive_all(&p).unwrap();
        close(&name, "coupling", p.coupling(), num(&v["coupling"]), REL);
        close(&name, "omega1_sq", d.omega1_sq.re, num(&v["omega1_sq"]), REL);
        close(&name, "omega2_sq", d.omega2_sq.re, num(&v["omega2_sq"]), REL);
        cclose(&name, "alpha1", d.alpha1, cnum(&v["alpha1"]), REL);
        cclose(&name, "alpha2", d.alpha2, cnum(&v["alpha2"]), REL);
        close(&name, "u", d.u, num(&v["u"]), REL);
        close(&name, "omega", d.omega, num(&v["omega"]), REL);
        close(&name, "m", d.m, num(&v["m"]), REL);
        let (w1, w2) = d.frequencies();
        close(&name, "omega1", w1, num(&v["omega1"]), REL);
        close(&name, "omega2", w2, num(&v["omega2"]), REL);
        assert_eq!(d.branch.number() as u64, v["branch"].as_u64().unwrap(), "{name}");
    }
}

#[test]
fn ground_levels_match_reference() {
    for (name, v) in fixtures() {
        let d = derive_all(&params(&v)).unwrap();
        let (w1, w2) = d.frequencies();
        close(&name, "ground_bounded", bounded_energy(w1, w2, 0, 0), num(&v["ground_bounded"]), REL);
        let naive = naive_levels(d.u, d.omega, BranchLabel::Branch1, 1);
        close(&name, "ground_naive", naive.levels[0].energy, num(&v["ground_naive_branch1"]), REL);
    }
}

#[test]
fn intermediate_map_matches_reference() {
    for (name, v) in fixtures() {
        let m = intermediate_map(&params(&v)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = cnum(&v["intermediate_map"][i][j]);
                cclose(&name, &format!("map[{i}][{j}]"), m.matrix()[(i, j)], want, REL);
            }
        }
    }
}

#[test]
fn final_map_is_composition_with_position_rows_negated() {
    for (name, v) in fixtures() {
        let m = final_map(&params(&v)).unwrap();
        for i in 0..4 {
            let sign = if i < 2 { -1.0 } else { 1.0 };
            for j in 0..4 {
                let want = cnum(&v["composed_map"][i][j]) * sign;
                cclose(&name, &format!("final[{i}][{j}]"), m.matrix()[(i, j)], want, REL);
            }
        }
    }
}

fn check_diagonal(name: &str, form: &QuadForm, want: &Value, complex: bool, rel: f64) {
    for i in 0..4 {
        let w = if complex {
            cnum(&want[i])
        } else {
            Complex64::new(num(&want[i]), 0.0)
        };
        cclose(name, &format!("coef[{i}]"), form.coefficient(i, i), w, rel);
    }
    assert!(form.off_diagonal_max() <= rel * form.max_abs(), "{name}: off-diagonal");
}

#[test]
fn transformed_forms_match_reference() {
    for (name, v) in fixtures() {
        let p = params(&v);
        let h = hamiltonian_form(&p);
        let inter = apply_map(&h, &intermediate_map(&p).unwrap()).unwrap();
        check_diagonal(&name, &inter, &v["intermediate_coefficients"], true, FORM_REL);
        check_diagonal(
            &name,
            &expected_intermediate_form(&p).unwrap(),
            &v["intermediate_coefficients"],
            true,
            REL,
        );
        let fin = apply_map(&h, &final_map(&p).unwrap()).unwrap();
        check_diagonal(&name, &fin, &v["branch_coefficients"], false, FORM_REL);
        check_diagonal(
            &name,
            &expected_branch_form(&p).unwrap(),
            &v["branch_coefficients"],
            false,
            REL,
        );
    }
}
