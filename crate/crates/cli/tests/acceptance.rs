//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vscav::coupling::{analytic_g, effective_index_from_g, fabry_perot_g, numeric_dbr_coupling, NumericOptions};
use vscav::materials::{
    builtin_exciton, ExcitonParams, OpticalMaterial, HBAR2_OVER_2ME_MEV_NM2, HC_MEV_NM, KB_MEV_PER_K, N_ALAS,
    N_GAAS,
};
use vscav::phasediagram::{critical_density, StructureSpec};
use vscav::polariton::{solve_variational, DetuningSpec};
use vscav::stability::{
    dissociation_probability, dissociation_temperature, phonon_broadening, saturation_density, BroadeningParams,
};
use vscav::stackgen::{CavityKind, DbrDesign, Layer, LayerStack};
use vscav::tmm::reflect_transmit;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("fabry-perot anchor", c1_anchor),
        ("analytic vs numeric coupling", c2_analytic_numeric),
        ("effective-index saturation", c3_index_saturation),
        ("variational oracle", c4_variational_grid),
        ("stationarity identities", c5_identities),
        ("phonon model", c6_phonon),
        ("300 K threshold coupling", c7_threshold),
        ("three-structure headline numbers", c8_structures),
        ("transfer-matrix properties", c9_tmm),
        ("critical density", c10_critical_density),
        ("cli determinism", c11_determinism),
    ];
    // ACCEPTANCE_ONLY=4,9 runs a subset
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name} [{:.1}s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_anchor() -> Outcome {
    let g = fabry_perot_g(4, 7e16, 1.0, 850.0).unwrap();
    outcome((g - 21.3).abs() <= 0.1, format!("g = {g:.4} meV (target 21.3 +/- 0.1)"))
}

/// GaAs cavity with GaAs / AlGaAs(x) mirrors, or AlAs cavity with
/// AlGaAs(x) / AlAs mirrors; x is the Ga fraction.
fn family(kind: CavityKind, x: f64, s: u32) -> DbrDesign {
    let mixed = OpticalMaterial::algaas(x).unwrap();
    match kind {
        CavityKind::HighIndex => DbrDesign::new(OpticalMaterial::gaas(), OpticalMaterial::gaas(), mixed, s, 850.0),
        CavityKind::LowIndex => DbrDesign::new(OpticalMaterial::alas(), mixed, OpticalMaterial::alas(), s, 850.0),
    }
}

fn family_exciton(kind: CavityKind) -> ExcitonParams {
    match kind {
        CavityKind::HighIndex => builtin_exciton("InGaAsQW").unwrap(),
        CavityKind::LowIndex => builtin_exciton("GaAsQW").unwrap(),
    }
}

/// Ga fractions of the mixed mirror layer. In the AlAs family x = 0 would be
/// AlAs itself, so its grid is shifted by one step.
fn x_grid(kind: CavityKind) -> [f64; 5] {
    match kind {
        CavityKind::HighIndex => [0.0, 0.2, 0.4, 0.6, 0.8],
        CavityKind::LowIndex => [0.2, 0.4, 0.6, 0.8, 1.0],
    }
}

fn c2_analytic_numeric() -> Outcome {
    let opts = NumericOptions { field_ratio: 100.0, ..NumericOptions::default() };
    let mut errs = Vec::new();
    let mut worst = (0.0, "", 0.0, 0);
    for kind in [CavityKind::HighIndex, CavityKind::LowIndex] {
        let ex = family_exciton(kind);
        for x in x_grid(kind) {
            for s in 1..=4 {
                let d = family(kind, x, s);
                let num = numeric_dbr_coupling(&d, &ex, &opts).unwrap().coupling.g_total;
                let ana = analytic_g(d.mirror_hi.n(), d.mirror_lo.n(), kind, s, 1, ex.f_2d_per_m2, 850.0)
                    .unwrap()
                    .g_total;
                let e = rel(num, ana);
                if e > worst.0 {
                    worst = (e, if kind == CavityKind::HighIndex { "GaAs" } else { "AlAs" }, x, s);
                }
                errs.push(e);
            }
        }
    }
    errs.sort_by(f64::total_cmp);
    let median = 0.5 * (errs[errs.len() / 2 - 1] + errs[errs.len() / 2]);
    let max = *errs.last().unwrap();
    outcome(
        median < 0.03 && max < 0.08,
        format!(
            "{} points, median {:.2}%, max {:.2}% ({} cavity, x = {}, s = {}); limits 3% / 8%",
            errs.len(),
            100.0 * median,
            100.0 * max,
            worst.1,
            worst.2,
            worst.3
        ),
    )
}

fn c3_index_saturation() -> Outcome {
    let opts = NumericOptions { field_ratio: 100.0, ..NumericOptions::default() };
    let mut pass = true;
    let mut detail = Vec::new();
    for (kind, target, label) in
        [(CavityKind::HighIndex, N_GAAS, "GaAs"), (CavityKind::LowIndex, N_ALAS, "AlAs")]
    {
        let ex = family_exciton(kind);
        // lowest index contrast: the longest effective length of the family
        let x_eval = match kind {
            CavityKind::HighIndex => 0.8,
            CavityKind::LowIndex => 0.2,
        };
        for x in x_grid(kind) {
            let n: Vec<f64> = (1..=6)
                .map(|s| numeric_dbr_coupling(&family(kind, x, s), &ex, &opts).unwrap().coupling.n_eff)
                .collect();
            let dev: Vec<f64> = n.iter().map(|v| rel(*v, target)).collect();
            let monotone = dev.windows(2).all(|w| w[1] < w[0]);
            let final_dev = dev[5];
            if x == x_eval {
                pass &= monotone && final_dev < 0.02;
                detail.push(format!(
                    "{label} x={x}: n_eff {:.4} -> {:.4}, final {:.2}% off {target}, monotone {monotone}",
                    n[0],
                    n[5],
                    100.0 * final_dev
                ));
            } else {
                println!(
                    "    info {label} cavity x={x}: n_eff s=1..6 {:?}, final deviation {:.2}%, monotone {monotone}",
                    n.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
                    100.0 * final_dev
                );
            }
        }
    }
    outcome(pass, detail.join("; "))
}

/// Normalized energy of the trial state at rest, written out directly.
fn a3(alpha: f64, lambda: f64, gamma: f64, delta0: f64) -> f64 {
    let a2 = alpha * alpha;
    let beta = (1.0 - a2).max(0.0).sqrt();
    a2 * lambda * lambda - 2.0 * a2 * lambda - 2.0 * alpha * beta * gamma * lambda + (1.0 - a2) * delta0
}

/// Argmin of `a3` on an n × n grid over α ∈ (0, 1), λ ∈ (0, lmax], as
/// (E, row i, column j).
fn grid_min(gamma: f64, delta0: f64, n: usize, lmax: f64) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for i in 1..n {
        let (e, j) = row_min(i, gamma, delta0, n, lmax);
        if e < best.0 {
            best = (e, i, j);
        }
    }
    best
}

fn row_min(i: usize, gamma: f64, delta0: f64, n: usize, lmax: f64) -> (f64, usize) {
    let alpha = i as f64 / n as f64;
    let mut best = (f64::INFINITY, 0);
    for j in 1..=n {
        let e = a3(alpha, lmax * j as f64 / n as f64, gamma, delta0);
        if e < best.0 {
            best = (e, j);
        }
    }
    best
}

fn c4_variational_grid() -> Outcome {
    let ex = builtin_exciton("GaAsQW").unwrap();
    let eb = ex.binding_energy_mev;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let n = 2000;
    let (mut worst_a2, mut worst_l, mut worst_raw_l) = (0.0f64, 0.0f64, 0.0f64);
    let mut fails = 0;
    let mut above_grid = 0;
    for _ in 0..100 {
        let gamma = rng.gen_range(0.05..3.0);
        let delta = rng.gen_range(-3.0 * eb..3.0 * eb);
        let delta0 = -1.0 + delta / eb;
        // coarse pass only to size the λ window
        let coarse = grid_min(gamma, delta0, 200, 100.0);
        let lmax = 2.0 * 100.0 * coarse.2 as f64 / 200.0 + 1.0;
        let (e_grid, i, j) = grid_min(gamma, delta0, n, lmax);
        let (da, dl) = (1.0 / n as f64, lmax / n as f64);
        let (ga, gl) = (i as f64 * da, j as f64 * dl);
        // the minimum lies in a tilted valley: one α row moves the row
        // optimum by several λ cells, which is the grid's λ resolution there
        let valley_shift = [i - 1, i + 1]
            .iter()
            .filter(|&&r| r >= 1 && r < n)
            .map(|&r| (row_min(r, gamma, delta0, n, lmax).1 as f64 - j as f64).abs() * dl)
            .fold(0.0, f64::max);
        let tol_l = dl + valley_shift;
        // one cell in α maps to at most 2α·dα + dα² in α²
        let tol_a2 = 2.0 * ga * da + da * da;
        let d = DetuningSpec::new(delta, &ex, N_GAAS).unwrap();
        let sol = solve_variational(gamma, &d, 0.0, &ex).unwrap();
        let ea2 = (ga * ga - sol.alpha_sq).abs();
        let el = (gl - sol.lambda).abs();
        worst_a2 = worst_a2.max(ea2 / tol_a2);
        worst_l = worst_l.max(el / tol_l);
        worst_raw_l = worst_raw_l.max(el / dl);
        if ea2 > tol_a2 || el > tol_l {
            fails += 1;
        }
        let e_cf = a3(sol.alpha_sq.sqrt(), sol.lambda, gamma, delta0);
        if e_cf > e_grid + 1e-12 * e_grid.abs() {
            above_grid += 1;
        }
    }
    let d = DetuningSpec::new(0.0, &ex, N_GAAS).unwrap();
    let g = solve_variational(1.0, &d, 0.0, &ex).unwrap();
    let golden = (g.alpha_sq - 0.276393).abs() <= 1e-4
        && (g.lambda - 2.618034).abs() <= 1e-3
        && (g.e_over_eb + 2.618034).abs() <= 1e-6;
    outcome(
        fails == 0 && above_grid == 0 && golden,
        format!(
            "100 random points: {fails} outside grid resolution (worst {worst_a2:.2} of the alpha^2 step, \
             {worst_l:.2} of the lambda resolution, {worst_raw_l:.2} bare lambda cells), \
             {above_grid} with closed-form energy above the grid minimum; \
             golden alpha^2 = {:.6}, lambda = {:.6}, E/E_B = {:.6}",
            g.alpha_sq, g.lambda, g.e_over_eb
        ),
    )
}

fn c5_identities() -> Outcome {
    let ex = builtin_exciton("GaAsQW").unwrap();
    let eb = ex.binding_energy_mev;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let (mut worst_energy, mut worst_stationary, mut worst_quartic) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let gamma = rng.gen_range(0.01..5.0);
        let delta = rng.gen_range(-5.0 * eb..5.0 * eb);
        let d = DetuningSpec::new(delta, &ex, N_GAAS).unwrap();
        let s = solve_variational(gamma, &d, 0.0, &ex).unwrap();
        let a = s.alpha_sq.sqrt();
        let b = s.beta_sq.sqrt();
        worst_energy = worst_energy.max((s.e_over_eb + s.lambda).abs() / s.lambda);
        worst_stationary = worst_stationary.max((s.lambda - (1.0 + b * gamma / a)).abs() / s.lambda);
        let f = (gamma * gamma - delta / eb) / gamma;
        let a2 = s.alpha_sq;
        worst_quartic = worst_quartic.max(((4.0 + f * f) * a2 * a2 - (4.0 + f * f) * a2 + 1.0).abs());
    }
    outcome(
        worst_energy < 1e-9 && worst_stationary < 1e-9 && worst_quartic < 1e-9,
        format!("1000 samples: max |E/E_B + lambda| {worst_energy:.1e}, |lambda - (1 + beta gamma / alpha)| {worst_stationary:.1e}, quartic residual {worst_quartic:.1e}"),
    )
}

fn c6_phonon() -> Outcome {
    let p = BroadeningParams::default();
    let g300 = phonon_broadening(300.0, &p).unwrap();
    let ex = builtin_exciton("GaAsQW").unwrap();
    let d = DetuningSpec::new(0.0, &ex, N_GAAS).unwrap();
    let lp = solve_variational(1.2, &d, 0.0, &ex).unwrap();
    let prob = |t: f64| dissociation_probability(t, &lp, &ex, &p, d.hbar_omega0_mev).unwrap().probability;
    let ps: Vec<f64> = (0..=600).map(|i| prob(i as f64)).collect();
    let monotone = ps.windows(2).all(|w| w[1] >= w[0]) && ps[600] > ps[1];
    let p0 = prob(0.0);
    outcome(
        (g300 - 6.35).abs() <= 0.02 && monotone && p0 == 0.0,
        format!("gamma_pm(300 K) = {g300:.4} meV; P(T) monotone on 0..600 K: {monotone}; P(0) = {p0}"),
    )
}

fn c7_threshold() -> Outcome {
    let ex = builtin_exciton("GaAsQW").unwrap();
    let p = BroadeningParams { q: 4000.0, ..BroadeningParams::default() };
    let d = DetuningSpec::new(0.0, &ex, N_GAAS).unwrap();
    let td = |g: f64| dissociation_temperature(g / ex.binding_energy_mev, &d, &ex, &p, 0.01).unwrap();
    let (mut lo, mut hi) = (1.0, 40.0);
    if td(hi) < 300.0 {
        return outcome(false, format!("T_d({hi} meV) = {:.1} K never reaches 300 K", td(hi)));
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if td(mid) >= 300.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let limit = 10.0 * 1.15;
    outcome(
        hi <= limit,
        format!(
            "T_d = 300 K at g = {hi:.3} meV (limit {limit} meV); T_d(10 meV) = {:.1} K, T_d(11.5 meV) = {:.1} K",
            td(10.0),
            td(11.5)
        ),
    )
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vscav")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_cli(cmd: &str, config: &Path, out: &Path) -> Result<(), String> {
    let o = Command::new(bin())
        .args([cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("{cmd} {}: {}", config.display(), String::from_utf8_lossy(&o.stderr).trim()))
    }
}

fn read_summary(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

fn c8_structures() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    if let Err(e) = run_cli("phase-diagram", &configs().join("phase_diagram.toml"), tmp.path()) {
        return outcome(false, e);
    }
    let rows = read_summary(&tmp.path().join("summary.csv"));
    let get = |r: &BTreeMap<String, String>, k: &str| -> f64 { r[k].parse().unwrap() };
    let td_target = [261.0, 355.0, 514.0];
    let ns_target = [6.4e11, 1.4e12, 3.4e12];
    let mut pass = rows.len() == 3;
    let mut parts = Vec::new();
    let (mut tds, mut nss) = (Vec::new(), Vec::new());
    for (i, r) in rows.iter().enumerate().take(3) {
        let (g, td, ns) = (get(r, "g_meV"), get(r, "T_d_K"), get(r, "n_s_cm2"));
        let ok_td = rel(td, td_target[i]) <= 0.15;
        let ok_ns = rel(ns, ns_target[i]) <= 0.15;
        pass &= ok_td && ok_ns;
        parts.push(format!(
            "{}: g {g:.2} meV, T_d {td:.1} K vs {} ({}), n_s {ns:.3e} vs {:.1e} ({})",
            r["name"],
            td_target[i],
            if ok_td { "ok" } else { "off" },
            ns_target[i],
            if ok_ns { "ok" } else { "off" }
        ));
        tds.push(td);
        nss.push(ns);
    }
    let ordered = tds.windows(2).all(|w| w[1] > w[0]) && nss.windows(2).all(|w| w[1] > w[0]);
    pass &= ordered;
    // the saturation density scales as 1/a0^2; T_d does not depend on a0
    for r in &rows {
        let g = get(r, "g_meV");
        let sens: Vec<String> = [None, Some(10.0), Some(12.0)]
            .iter()
            .map(|a0| {
                let ex = builtin_exciton("GaAsQW").unwrap();
                let ex = match a0 {
                    Some(a) => ex.with_bohr_radius(*a).unwrap(),
                    None => ex,
                };
                let d = DetuningSpec::new(0.0, &ex, N_GAAS).unwrap();
                let lp = solve_variational(g / ex.binding_energy_mev, &d, 0.0, &ex).unwrap();
                format!("a0 {:.2} nm -> n_s {:.3e}", ex.bohr_radius_nm, saturation_density(&lp, &ex).unwrap())
            })
            .collect();
        println!("    info {} sensitivity: {}", r["name"], sens.join(", "));
    }
    outcome(pass, format!("{}; strict ordering {ordered}", parts.join("; ")))
}

fn c9_tmm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut worst_sum = 0.0f64;
    for _ in 0..50 {
        let layers: Vec<Layer> = (0..rng.gen_range(1..40))
            .map(|_| {
                Layer::new(OpticalMaterial::new("x", rng.gen_range(1.0..4.0)).unwrap(), rng.gen_range(1.0..300.0))
                    .unwrap()
            })
            .collect();
        let stack = LayerStack::new(
            layers,
            OpticalMaterial::new("front", rng.gen_range(1.0..3.7)).unwrap(),
            OpticalMaterial::new("back", rng.gen_range(1.0..3.7)).unwrap(),
        );
        for i in 0..40 {
            let (r, t) = reflect_transmit(&stack, 600.0 + 15.0 * i as f64).unwrap();
            worst_sum = worst_sum.max((r + t - 1.0).abs());
        }
    }
    // air | GaAs half-space: a GaAs film on GaAs leaves one interface
    let n = N_GAAS;
    let fresnel = ((n - 1.0) / (n + 1.0)).powi(2);
    let interface = LayerStack::new(
        vec![Layer::new(OpticalMaterial::gaas(), 123.4).unwrap()],
        OpticalMaterial::air(),
        OpticalMaterial::gaas(),
    );
    let worst_fresnel = [500.0, 850.0, 1300.0]
        .iter()
        .map(|&l| (reflect_transmit(&interface, l).unwrap().0 - fresnel).abs())
        .fold(0.0, f64::max);
    let pairs = 20;
    let (nh, nl) = (N_GAAS, N_ALAS);
    let mut layers = Vec::new();
    for _ in 0..pairs {
        layers.push(Layer::new(OpticalMaterial::gaas(), 850.0 / (4.0 * nh)).unwrap());
        layers.push(Layer::new(OpticalMaterial::alas(), 850.0 / (4.0 * nl)).unwrap());
    }
    let mirror = LayerStack::new(layers, OpticalMaterial::air(), OpticalMaterial::air());
    let b = (nl / nh).powi(2 * pairs);
    let bragg = ((1.0 - b) / (1.0 + b)).powi(2);
    let r = reflect_transmit(&mirror, 850.0).unwrap().0;
    let pass = worst_sum <= 1e-12 && worst_fresnel <= 1e-6 && (r - bragg).abs() <= 1e-6;
    outcome(
        pass,
        format!(
            "max |R+T-1| {worst_sum:.1e}; interface R - ((n-1)/(n+1))^2 = {worst_fresnel:.1e} \
             (closed form {fresnel:.7}); 20-pair R {r:.9} vs {bragg:.9}"
        ),
    )
}

/// GMR structure of the bundled phase-diagram config.
fn gmr_spec() -> (StructureSpec, f64) {
    let ex = builtin_exciton("GaAsQW").unwrap().with_bohr_radius(10.0).unwrap();
    let g = 15.8;
    let n_eff = effective_index_from_g(g, 4, ex.f_2d_per_m2, 850.0).unwrap();
    let d = DetuningSpec::new(0.0, &ex, n_eff).unwrap();
    (StructureSpec::new("gmr", g, d, ex), n_eff)
}

/// Lower eigenvalue of the exciton / photon matrix whose stationary
/// quadratic form reproduces the variational energy, in meV.
fn lp_energy_2x2(k: f64, spec: &StructureSpec, n_eff: f64) -> f64 {
    let ex = &spec.exciton;
    let eb = ex.binding_energy_mev;
    let gamma = spec.g_mev / eb;
    let hw0 = ex.bandgap_mev - eb + spec.detuning.delta_mev;
    let kz = 2.0 * std::f64::consts::PI * n_eff * hw0 / HC_MEV_NM;
    let x = HBAR2_OVER_2ME_MEV_NM2 * k * k / (ex.total_mass * eb);
    let u = k / kz;
    let y = hw0 / eb * (u * u / ((1.0 + u * u).sqrt() + 1.0));
    let delta0 = -1.0 + spec.detuning.delta_mev / eb;
    let (a, c, b) = (x - 1.0, delta0 + y - gamma * gamma, -gamma);
    let mean = 0.5 * (a + c);
    let half = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    eb * (mean - half)
}

/// Bose sum at zero chemical potential over the Dirichlet states of a square
/// box of side 2R, in cm⁻².
fn box_density(t_k: f64, spec: &StructureSpec, n_eff: f64) -> f64 {
    let side_nm = 2.0 * spec.spot_radius_um * 1e3;
    let dk = std::f64::consts::PI / side_nm;
    let kt = KB_MEV_PER_K * t_k;
    let e0 = lp_energy_2x2(0.0, spec, n_eff);
    let occ = |m: f64| -> f64 {
        let k = dk * m.sqrt();
        1.0 / ((lp_energy_2x2(k, spec, n_eff) - e0) / kt).exp_m1()
    };
    // states beyond 15 kT contribute below 1e-5 of the total
    let mut m_cut = 2u64;
    while (lp_energy_2x2(dk * (m_cut as f64).sqrt(), spec, n_eff) - e0) / kt < 15.0 {
        m_cut *= 2;
    }
    let mut lo_m = m_cut / 2;
    while m_cut - lo_m > 1 {
        let mid = (lo_m + m_cut) / 2;
        if (lp_energy_2x2(dk * (mid as f64).sqrt(), spec, n_eff) - e0) / kt < 15.0 {
            lo_m = mid;
        } else {
            m_cut = mid;
        }
    }
    // occupation tabulated on octaves of m = nx² + ny², exact below 2^BITS
    const BITS: u32 = 12;
    let direct: Vec<f64> = (0..(1u64 << BITS)).map(|m| if m == 0 { 0.0 } else { occ(m as f64) }).collect();
    let top = 64 - m_cut.leading_zeros();
    let per = 1usize << BITS;
    let mut octaves: Vec<Vec<f64>> = Vec::new();
    for level in BITS..top.max(BITS) {
        let base = 1u64 << level;
        let step = (base >> BITS) as f64;
        octaves.push((0..=per).map(|j| occ(base as f64 + step * j as f64)).collect());
    }
    let lookup = |m: u64| -> f64 {
        if m < (1u64 << BITS) {
            return direct[m as usize];
        }
        let level = 63 - m.leading_zeros();
        let shift = level - BITS;
        let off = m - (1u64 << level);
        let j = (off >> shift) as usize;
        let frac = (off & ((1u64 << shift) - 1)) as f64 / (1u64 << shift) as f64;
        let t = &octaves[(level - BITS) as usize];
        t[j] + frac * (t[j + 1] - t[j])
    };
    let mut sum = 0.0;
    let mut nx = 1u64;
    while 2 * nx * nx <= m_cut {
        // nx < ny counted twice, nx = ny once
        sum += lookup(2 * nx * nx);
        let mut row = 0.0;
        let mut ny = nx + 1;
        loop {
            let m = nx * nx + ny * ny;
            if m > m_cut {
                break;
            }
            row += lookup(m);
            ny += 1;
        }
        sum += 2.0 * row;
        nx += 1;
    }
    spec.sigma_spin * sum / (side_nm * side_nm) * 1e14
}

fn c10_critical_density() -> Outcome {
    let (spec, n_eff) = gmr_spec();
    let n = |t: f64| critical_density(t, &spec).unwrap();
    let low: Vec<f64> = [2.0, 1.0, 0.5, 0.25].iter().map(|&t| n(t)).collect();
    let n300 = n(300.0);
    let vanishing = low.windows(2).all(|w| w[1] < w[0]) && low[3] < 1e-6 * n300;
    let grid: Vec<f64> = (0..=60).map(|i| 10.0 * (60.0f64).powf(i as f64 / 60.0)).collect();
    let curve: Vec<f64> = grid.iter().map(|&t| n(t)).collect();
    let monotone = curve.windows(2).all(|w| w[1] > w[0]);
    let mut parts = vec![
        format!("n_c(0.25 K)/n_c(300 K) = {:.1e}, decreasing to 0: {vanishing}", low[3] / n300),
        format!("monotone on 10..600 K: {monotone}"),
    ];
    let mut pass = vanishing && monotone;
    for t in [50.0, 300.0] {
        let integral = n(t);
        let boxed = box_density(t, &spec, n_eff);
        let e = rel(integral, boxed);
        pass &= e <= 0.02;
        parts.push(format!("{t} K integral {integral:.4e} vs box {boxed:.4e} ({:.2}%)", 100.0 * e));
    }
    outcome(pass, parts.join("; "))
}

fn collect_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap());
    }
    out
}

fn c11_determinism() -> Outcome {
    let jobs = [
        ("spectrum", "spectrum.toml"),
        ("field", "field.toml"),
        ("coupling-sweep", "coupling_high.toml"),
        ("coupling-sweep", "coupling_low.toml"),
        ("coupling-sweep", "coupling_high_orders.toml"),
        ("coupling-sweep", "coupling_low_orders.toml"),
        ("polariton", "polariton.toml"),
        ("dissociation", "dissociation.toml"),
        ("phase-diagram", "phase_diagram.toml"),
    ];
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut csvs = 0;
    for (cmd, file) in jobs {
        let mut runs = Vec::new();
        for pass in ["a", "b"] {
            let out = tmp.path().join(pass).join(file);
            if let Err(e) = run_cli(cmd, &configs().join(file), &out) {
                return outcome(false, e);
            }
            runs.push(collect_files(&out));
        }
        csvs += runs[0].keys().filter(|k| k.ends_with(".csv")).count();
        if runs[0] != runs[1] {
            differing.push(file);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        differing.is_empty() && secs < 120.0,
        format!("{} configs, {csvs} CSVs, differing: {differing:?}, two runs in {secs:.1}s (limit 120s)", jobs.len()),
    )
}
