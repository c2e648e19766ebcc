//! Photon–exciton coupling constants: Fabry–Perot closed form, numeric
//! evaluation on transfer-matrix field profiles, and the infinite-DBR
//! analytic approximation.
//!
//! All coupling energies are ħg in meV.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::materials::{ExcitonParams, OpticalMaterial, CONSTANTS, HBAR_MEV_S};
use crate::stackgen::{self, CavityKind, DbrDesign, LayerStack, MirrorSide};
use crate::tmm::{self, FieldProfile};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingResult {
    pub g_total: f64,
    pub g_per_sheet: Vec<f64>,
    /// Single-well coupling at the global field maximum.
    pub g0: f64,
    pub l_eff_nm: f64,
    pub l_int_nm: f64,
    pub l_ext_nm: f64,
    pub n_eff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DbrEffectiveParams {
    pub f1: f64,
    pub f2: f64,
    /// Intensity attenuation exponent of the mirror (nm⁻¹).
    pub a: f64,
    pub k1: f64,
    pub k2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// ħ·√(N e² f / (n_c ε₀ m_e λ₀)) in meV.
pub fn fabry_perot_g(n_wells: u32, f_2d_per_m2: f64, n_c: f64, lambda0_nm: f64) -> Result<f64> {
    check_positive("oscillator strength", f_2d_per_m2)?;
    check_positive("cavity index", n_c)?;
    check_positive("wavelength", lambda0_nm)?;
    let c = CONSTANTS;
    let omega2 = n_wells as f64 * c.e * c.e * f_2d_per_m2 / (n_c * c.eps_0 * c.m_e * lambda0_nm * 1e-9);
    Ok(HBAR_MEV_S * omega2.sqrt())
}

/// Inverse of [`fabry_perot_g`] in the cavity index.
pub fn effective_index_from_g(g_mev: f64, n_wells: u32, f_2d_per_m2: f64, lambda0_nm: f64) -> Result<f64> {
    check_positive("coupling constant", g_mev)?;
    check_positive("oscillator strength", f_2d_per_m2)?;
    check_positive("wavelength", lambda0_nm)?;
    if n_wells == 0 {
        return Err(Error::InvalidParameter("well count must be >= 1".into()));
    }
    let c = CONSTANTS;
    let omega = g_mev / HBAR_MEV_S;
    Ok(n_wells as f64 * c.e * c.e * f_2d_per_m2 / (c.eps_0 * c.m_e * lambda0_nm * 1e-9 * omega * omega))
}

/// Coupling of one well at the field maximum of a mode with effective length
/// `l_eff_nm`, where the index is `n_c`.
pub fn single_sheet_g0(f_2d_per_m2: f64, n_c: f64, l_eff_nm: f64) -> Result<f64> {
    check_positive("oscillator strength", f_2d_per_m2)?;
    check_positive("cavity index", n_c)?;
    check_positive("effective length", l_eff_nm)?;
    let c = CONSTANTS;
    let omega2 = c.e * c.e * f_2d_per_m2 / (4.0 * c.eps_0 * n_c * n_c * c.m_e * l_eff_nm * 1e-9);
    Ok(HBAR_MEV_S * omega2.sqrt())
}

/// Coupling of every quantum-well sheet in `stack` to the mode in `profile`.
///
/// With L_eff the energy-density length and n_c the index at the energy
/// maximum, each sheet contributes gᵢ = g₀(fᵢ)·√Nᵢ·|E(zᵢ)|/max|E|, and the
/// total is their quadrature sum. n_eff inverts the Fabry–Perot formula using
/// the well count and oscillator strength of the most strongly coupled sheet.
pub fn numeric_g(stack: &LayerStack, profile: &FieldProfile) -> Result<CouplingResult> {
    if stack.sheets.is_empty() {
        return Err(Error::NoSheets);
    }
    let lengths = tmm::effective_lengths(stack, profile)?;
    let emax = profile.max_amplitude();
    let mut g_per_sheet = Vec::with_capacity(stack.sheets.len());
    let mut best: Option<(f64, &stackgen::QwSheet)> = None;
    for sheet in &stack.sheets {
        let g0 = single_sheet_g0(sheet.exciton.f_2d_per_m2, lengths.peak_index, lengths.total_nm)?;
        let g = g0 * (sheet.count as f64).sqrt() * profile.eval(sheet.z_nm) / emax;
        if best.is_none_or(|b| g > b.0) {
            best = Some((g, sheet));
        }
        g_per_sheet.push(g);
    }
    let g_total = g_per_sheet.iter().map(|g| g * g).sum::<f64>().sqrt();
    let (_, ref_sheet) = best.expect("non-empty");
    let g0 = single_sheet_g0(ref_sheet.exciton.f_2d_per_m2, lengths.peak_index, lengths.total_nm)?;
    let n_eff = if g_total > 0.0 {
        effective_index_from_g(g_total, ref_sheet.count, ref_sheet.exciton.f_2d_per_m2, profile.lambda_nm)?
    } else {
        f64::INFINITY
    };
    Ok(CouplingResult {
        g_total,
        g_per_sheet,
        g0,
        l_eff_nm: lengths.total_nm,
        l_int_nm: lengths.internal_nm,
        l_ext_nm: lengths.external_nm,
        n_eff,
    })
}

/// Length factors and attenuation of a semi-infinite quarter-wave mirror made
/// of indices n1 > n2 at design wavelength λ₀.
pub fn dbr_effective_params(n1: f64, n2: f64, lambda0_nm: f64) -> Result<DbrEffectiveParams> {
    check_positive("wavelength", lambda0_nm)?;
    if !(n1 > n2) || !(n2 > 0.0) {
        return Err(Error::IndexOrdering { n1, n2 });
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let a = 8.0 / lambda0_nm * (n1 * n2 / (n1 + n2)) * (n1 / n2).ln();
    let k1 = two_pi * n1 / lambda0_nm;
    let k2 = two_pi * n2 / lambda0_nm;
    let lambda1 = lambda0_nm / n1;
    let lambda2 = lambda0_nm / n2;
    let f1 = (-a * a + 2.0 * k1 * k1 * (a * lambda1 / 4.0).exp_m1()) / (a * (a * a + 4.0 * k1 * k1));
    let f2 = (a * a - 2.0 * k2 * k2 * (-a * lambda2 / 4.0).exp_m1()) / (a * (a * a + 4.0 * k2 * k2));
    Ok(DbrEffectiveParams { f1, f2, a, k1, k2, lambda1, lambda2 })
}

/// Total coupling of a cavity of order `s` between infinite quarter-wave
/// mirrors (indices n1 > n2), with `n_wells` wells at every antinode.
///
/// `g_per_sheet` holds the cavity and mirror contributions; L_int is the
/// cavity term of the effective length and L_ext the mirror penetration term.
pub fn analytic_g(
    n1: f64,
    n2: f64,
    kind: CavityKind,
    s: u32,
    n_wells: u32,
    f_2d_per_m2: f64,
    lambda0_nm: f64,
) -> Result<CouplingResult> {
    if s < 1 {
        return Err(Error::InvalidParameter("cavity order must be >= 1".into()));
    }
    if n_wells < 1 {
        return Err(Error::InvalidParameter("well count must be >= 1".into()));
    }
    let p = dbr_effective_params(n1, n2, lambda0_nm)?;
    let q = (n2 / n1).powi(2);
    let mirror_sum = 2.0 / (1.0 - q);
    let d = n1 * n1 - n2 * n2;
    let (l_int, l_ext, n_c, cavity_sum) = match kind {
        CavityKind::HighIndex => (
            (s as f64 - 0.5) / 2.0 * p.lambda1,
            2.0 * (n1 * n1 * p.f1 + n2 * n2 * p.f2) / d,
            n1,
            2.0 * s as f64 - 1.0,
        ),
        CavityKind::LowIndex => (
            (s as f64 - 0.5) / 2.0 * p.lambda2,
            2.0 * (n1 * n1 * p.f2 + n2 * n2 * p.f1) / d,
            n2,
            2.0 * s as f64 - 2.0,
        ),
    };
    let l_eff = l_int + l_ext;
    let g0 = single_sheet_g0(f_2d_per_m2, n_c, l_eff)?;
    let n = n_wells as f64;
    let g_cav = g0 * (n * cavity_sum).sqrt();
    let g_mir = g0 * (n * mirror_sum).sqrt();
    let g_total = g0 * (n * (cavity_sum + mirror_sum)).sqrt();
    Ok(CouplingResult {
        g_total,
        g_per_sheet: vec![g_cav, g_mir],
        g0,
        l_eff_nm: l_eff,
        l_int_nm: l_int,
        l_ext_nm: l_ext,
        n_eff: effective_index_from_g(g_total, n_wells, f_2d_per_m2, lambda0_nm)?,
    })
}

/// Settings for the numeric DBR pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericOptions {
    /// Required peak-to-boundary field ratio when pairs are chosen
    /// automatically.
    pub field_ratio: f64,
    /// Fixed pair count per mirror; overrides `field_ratio`.
    pub pairs: Option<u32>,
    pub antinode_threshold: f64,
    pub samples_per_layer: usize,
    pub side: MirrorSide,
    pub window_nm: f64,
    pub wells_per_antinode: u32,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            field_ratio: 100.0,
            pairs: None,
            antinode_threshold: stackgen::DEFAULT_ANTINODE_THRESHOLD,
            samples_per_layer: tmm::DEFAULT_SAMPLES_PER_LAYER,
            side: MirrorSide::Both,
            window_nm: 5.0,
            wells_per_antinode: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DbrCoupling {
    pub stack: LayerStack,
    pub profile: FieldProfile,
    pub pairs: u32,
    pub resonance_nm: f64,
    pub coupling: CouplingResult,
}

const MAX_PAIRS: u32 = 4096;

fn resonant_profile(design: &DbrDesign, pairs: u32, opts: &NumericOptions) -> Result<(LayerStack, FieldProfile, f64)> {
    let stack = design.stack(pairs, pairs)?;
    // a symmetric lossless stack with very few pairs can be too flat to scan
    let lambda = match tmm::locate_peak(&stack, design.lambda0_nm, opts.window_nm) {
        Ok((l, _)) => l,
        Err(Error::NoPeak { .. }) => design.lambda0_nm,
        Err(e) => return Err(e),
    };
    let profile = tmm::field_profile(&stack, lambda, opts.samples_per_layer)?;
    Ok((stack, profile, lambda))
}

fn edge_ratio(profile: &FieldProfile) -> f64 {
    let first = profile.amplitude[0];
    let last = *profile.amplitude.last().unwrap();
    profile.max_amplitude() / first.max(last)
}

/// Smallest symmetric pair count whose resonant field falls to
/// 1/`ratio` of its peak at both outer faces.
pub fn auto_pairs(design: &DbrDesign, opts: &NumericOptions) -> Result<u32> {
    let ok = |p: u32| -> Result<bool> { Ok(edge_ratio(&resonant_profile(design, p, opts)?.1) >= opts.field_ratio) };
    let mut hi = 1;
    while !ok(hi)? {
        hi *= 2;
        if hi > MAX_PAIRS {
            return Err(Error::Numerical(format!("field ratio {} not reached with {MAX_PAIRS} pairs", opts.field_ratio)));
        }
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(1);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Build the cavity, truncate its mirrors, locate the resonance, load wells
/// at the antinodes and evaluate the coupling.
pub fn numeric_dbr_coupling(design: &DbrDesign, exciton: &ExcitonParams, opts: &NumericOptions) -> Result<DbrCoupling> {
    let pairs = match opts.pairs {
        Some(p) => p,
        None => auto_pairs(design, opts)?,
    };
    let (stack, profile, resonance_nm) = resonant_profile(design, pairs, opts)?;
    let loaded = stackgen::place_qws_on_side(
        &stack,
        &profile,
        opts.wells_per_antinode,
        exciton,
        opts.antinode_threshold,
        opts.side,
    )?;
    let coupling = numeric_g(&loaded, &profile)?;
    Ok(DbrCoupling { stack: loaded, profile, pairs, resonance_nm, coupling })
}

/// The two mirror materials of a DBR family, ordered (high, low).
pub fn mirror_pair(a: &OpticalMaterial, b: &OpticalMaterial) -> Result<(OpticalMaterial, OpticalMaterial)> {
    if a.n() > b.n() {
        Ok((a.clone(), b.clone()))
    } else if b.n() > a.n() {
        Ok((b.clone(), a.clone()))
    } else {
        Err(Error::IndexOrdering { n1: a.n(), n2: b.n() })
    }
}
