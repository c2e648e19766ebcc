//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function returns a flat `Float64Array`; the row layout is
//! given on the function. The plain-Rust `*_rows` versions are what the
//! bindings call and what the tests exercise.

use wasm_bindgen::prelude::*;

use vscav::materials::{builtin_exciton, builtin_material, ExcitonParams};
use vscav::polariton::{solve_variational, upper_polariton, DetuningSpec};
use vscav::stability::{dissociation_probability, dissociation_temperature, BroadeningParams};
use vscav::stackgen::DbrDesign;
use vscav::{tmm, Error};

fn exciton() -> ExcitonParams {
    builtin_exciton("GaAsQW").expect("built-in exciton")
}

fn design(cavity: &str, hi: &str, lo: &str, order: u32, lambda0_nm: f64) -> Result<DbrDesign, Error> {
    Ok(DbrDesign::new(builtin_material(cavity)?, builtin_material(hi)?, builtin_material(lo)?, order, lambda0_nm))
}

/// Rows of (λ nm, R, T), preceded by one header row
/// (λ_res nm, Q, linewidth nm); the header row is NaN when no resonance is
/// found in a 5 nm window around λ₀.
#[allow(clippy::too_many_arguments)]
pub fn spectrum_rows(
    cavity: &str,
    hi: &str,
    lo: &str,
    order: u32,
    pairs: u32,
    lambda0_nm: f64,
    lambda_min_nm: f64,
    lambda_max_nm: f64,
    points: usize,
) -> Result<Vec<f64>, Error> {
    let stack = design(cavity, hi, lo, order, lambda0_nm)?.stack(pairs, pairs)?;
    let mut out = match tmm::find_resonance(&stack, lambda0_nm, 5.0) {
        Ok(r) => vec![r.lambda_res_nm, r.q, r.linewidth_nm],
        Err(e) if e.is_numerical() => vec![f64::NAN; 3],
        Err(e) => return Err(e),
    };
    for p in tmm::spectrum(&stack, lambda_min_nm, lambda_max_nm, points)? {
        out.extend([p.lambda_nm, p.reflectance, p.transmittance]);
    }
    Ok(out)
}

/// Rows of (z nm, |E|/max, n) at λ₀.
pub fn field_rows(cavity: &str, hi: &str, lo: &str, order: u32, pairs: u32, lambda0_nm: f64) -> Result<Vec<f64>, Error> {
    let stack = design(cavity, hi, lo, order, lambda0_nm)?.stack(pairs, pairs)?;
    let prof = tmm::field_profile(&stack, lambda0_nm, 24)?;
    let peak = prof.max_amplitude();
    let mut out = Vec::with_capacity(3 * prof.z_nm.len());
    for ((z, a), n) in prof.z_nm.iter().zip(&prof.amplitude).zip(&prof.index) {
        out.extend([*z, a / peak, *n]);
    }
    Ok(out)
}

/// Rows of (g meV, E_LP meV, E_UP meV, α²_LP, λ_LP) for g from `g_max/points`
/// to `g_max`, GaAs well exciton.
pub fn branch_rows(g_max_mev: f64, delta_mev: f64, points: usize) -> Result<Vec<f64>, Error> {
    let ex = exciton();
    let det = DetuningSpec::new(delta_mev, &ex, 3.0)?;
    let mut out = Vec::with_capacity(5 * points);
    for i in 1..=points {
        let g = g_max_mev * i as f64 / points as f64;
        let gamma = g / ex.binding_energy_mev;
        let lp = solve_variational(gamma, &det, 0.0, &ex)?;
        let up = upper_polariton(gamma, &det, 0.0, &ex)?;
        out.extend([g, lp.energy_mev(&ex), up.energy_mev(&ex), lp.alpha_sq, lp.lambda]);
    }
    Ok(out)
}

/// First element T_d (K, NaN outside the search bracket), then rows of
/// (T K, P) for T = 0..=t_max in `points` steps.
pub fn dissociation_rows(g_mev: f64, q: f64, threshold: f64, t_max_k: f64, points: usize) -> Result<Vec<f64>, Error> {
    let ex = exciton();
    let det = DetuningSpec::new(0.0, &ex, 3.0)?;
    let params = BroadeningParams { q, ..BroadeningParams::default() };
    let gamma = g_mev / ex.binding_energy_mev;
    let td = match dissociation_temperature(gamma, &det, &ex, &params, threshold) {
        Ok(t) => t,
        Err(e) if e.is_numerical() => f64::NAN,
        Err(e) => return Err(e),
    };
    let lp = solve_variational(gamma, &det, 0.0, &ex)?;
    let mut out = vec![td];
    for i in 0..=points {
        let t = t_max_k * i as f64 / points.max(1) as f64;
        out.extend([t, dissociation_probability(t, &lp, &ex, &params, det.hbar_omega0_mev)?.probability]);
    }
    Ok(out)
}

fn js(r: Result<Vec<f64>, Error>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn cavity_spectrum(
    cavity: &str,
    hi: &str,
    lo: &str,
    order: u32,
    pairs: u32,
    lambda0_nm: f64,
    lambda_min_nm: f64,
    lambda_max_nm: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    js(spectrum_rows(cavity, hi, lo, order, pairs, lambda0_nm, lambda_min_nm, lambda_max_nm, points))
}

#[wasm_bindgen]
pub fn cavity_field(cavity: &str, hi: &str, lo: &str, order: u32, pairs: u32, lambda0_nm: f64) -> Result<Vec<f64>, JsError> {
    js(field_rows(cavity, hi, lo, order, pairs, lambda0_nm))
}

#[wasm_bindgen]
pub fn polariton_branches(g_max_mev: f64, delta_mev: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(branch_rows(g_max_mev, delta_mev, points))
}

#[wasm_bindgen]
pub fn dissociation_curve(g_mev: f64, q: f64, threshold: f64, t_max_k: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(dissociation_rows(g_mev, q, threshold, t_max_k, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_layout() {
        let v = spectrum_rows("GaAs", "GaAs", "AlAs", 2, 15, 850.0, 800.0, 900.0, 11).unwrap();
        assert_eq!(v.len(), 3 + 3 * 11);
        assert!((v[0] - 850.0).abs() < 0.5);
        assert!(v[1] > 1e3);
        for row in v[3..].chunks(3) {
            assert!((row[1] + row[2] - 1.0).abs() < 1e-10);
        }
        assert!(spectrum_rows("Gold", "GaAs", "AlAs", 2, 15, 850.0, 800.0, 900.0, 11).is_err());
    }

    #[test]
    fn field_is_normalized() {
        let v = field_rows("AlAs", "GaAs", "AlAs", 1, 10, 850.0).unwrap();
        assert_eq!(v.len() % 3, 0);
        let max = v.chunks(3).map(|r| r[1]).fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branches_split_around_exciton() {
        let v = branch_rows(20.0, 0.0, 8).unwrap();
        assert_eq!(v.len(), 40);
        for row in v.chunks(5) {
            assert!(row[1] < -10.0 && row[2] > row[1]);
            assert!(row[3] > 0.0 && row[3] <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn dissociation_curve_matches_threshold() {
        let v = dissociation_rows(12.0, 4000.0, 0.01, 600.0, 60).unwrap();
        let td = v[0];
        assert!(td > 100.0 && td < 600.0);
        let rows: Vec<&[f64]> = v[1..].chunks(2).collect();
        assert_eq!(rows.len(), 61);
        assert_eq!(rows[0][1], 0.0);
        assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
        let below = rows.iter().filter(|r| r[0] < td).all(|r| r[1] < 0.01);
        assert!(below);
    }
}
