//! Variational lower/upper polariton states in the very-strong coupling
//! regime.
//!
//! Trial state α|exciton(λ)⟩ + β|photon⟩, where the exciton's Bohr radius is
//! a₀/λ. Energies are in units of the binding energy E_B, measured from the
//! free electron–hole pair at rest (the bare exciton sits at −1).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::materials::{ExcitonParams, HBAR2_OVER_2ME_MEV_NM2, HC_MEV_NM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetuningSpec {
    /// Photon–exciton detuning ħω₀ − E_X (meV).
    pub delta_mev: f64,
    /// −1 + Δ/E_B.
    pub delta0: f64,
    pub hbar_omega0_mev: f64,
    pub k_z_per_nm: f64,
}

impl DetuningSpec {
    /// Detuning relative to `exciton`, with K_Z = 2π n_eff/λ for the photon
    /// wavelength λ at ħω₀.
    pub fn new(delta_mev: f64, exciton: &ExcitonParams, n_eff: f64) -> Result<Self> {
        if !(n_eff > 0.0) {
            return Err(Error::InvalidParameter(format!("effective index must be > 0, got {n_eff}")));
        }
        let hbar_omega0_mev = exciton.exciton_energy_mev() + delta_mev;
        if !(hbar_omega0_mev > 0.0) {
            return Err(Error::InvalidParameter(format!("photon energy must be > 0, got {hbar_omega0_mev} meV")));
        }
        let lambda_nm = HC_MEV_NM / hbar_omega0_mev;
        Ok(Self {
            delta_mev,
            delta0: -1.0 + delta_mev / exciton.binding_energy_mev,
            hbar_omega0_mev,
            k_z_per_nm: 2.0 * std::f64::consts::PI * n_eff / lambda_nm,
        })
    }

    pub fn with_k_z(mut self, k_z_per_nm: f64) -> Result<Self> {
        if !(k_z_per_nm > 0.0) {
            return Err(Error::InvalidParameter(format!("K_Z must be > 0, got {k_z_per_nm}")));
        }
        self.k_z_per_nm = k_z_per_nm;
        Ok(self)
    }

    /// Photon mass in units of the free-electron mass.
    pub fn photon_mass(&self) -> f64 {
        2.0 * HBAR2_OVER_2ME_MEV_NM2 * self.k_z_per_nm.powi(2) / self.hbar_omega0_mev
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Branch {
    Lp,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolaritonSolution {
    pub alpha_sq: f64,
    pub beta_sq: f64,
    pub lambda: f64,
    pub e_over_eb: f64,
    pub branch: Branch,
    pub k_r_per_nm: f64,
    /// False when the upper branch has no bound stationary point and has been
    /// placed at the free-pair continuum edge.
    pub bound: bool,
}

impl PolaritonSolution {
    pub fn energy_mev(&self, exciton: &ExcitonParams) -> f64 {
        self.e_over_eb * exciton.binding_energy_mev
    }
}

/// Exciton and photon kinetic terms (x, y) in units of E_B.
fn kinetic_terms(detuning: &DetuningSpec, k_r: f64, exciton: &ExcitonParams) -> (f64, f64) {
    let eb = exciton.binding_energy_mev;
    let x = HBAR2_OVER_2ME_MEV_NM2 * k_r * k_r / (exciton.total_mass * eb);
    let y = detuning.hbar_omega0_mev / eb * (k_r / detuning.k_z_per_nm).hypot(1.0).sub_one();
    (x, y)
}

trait SubOne {
    fn sub_one(self) -> f64;
}

impl SubOne for f64 {
    /// √(1+u²) − 1 evaluated without cancellation, given √(1+u²).
    fn sub_one(self) -> f64 {
        let u2 = self * self - 1.0;
        if u2 < 1e-6 {
            u2 / (self + 1.0)
        } else {
            self - 1.0
        }
    }
}

/// Normalized energy of the trial state with exciton amplitude `alpha`
/// (photon amplitude β = +√(1−α²)) and reduction factor `lambda`.
pub fn energy_functional(
    alpha: f64,
    lambda: f64,
    gamma: f64,
    detuning: &DetuningSpec,
    k_r: f64,
    exciton: &ExcitonParams,
) -> f64 {
    let a2 = alpha * alpha;
    let b2 = 1.0 - a2;
    let beta = b2.max(0.0).sqrt();
    let (x, y) = kinetic_terms(detuning, k_r, exciton);
    a2 * lambda * lambda - 2.0 * a2 * lambda - 2.0 * alpha * beta * gamma * lambda + b2 * detuning.delta0 + a2 * x + b2 * y
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("coupling ratio g/E_B must be > 0, got {gamma}")))
    }
}

/// f of the quartic in α; its sign fixes the root (f > 0 ⇒ α² < ½).
pub fn mixing_parameter(gamma: f64, detuning: &DetuningSpec, k_r: f64, exciton: &ExcitonParams) -> f64 {
    let (x, y) = kinetic_terms(detuning, k_r, exciton);
    (gamma * gamma - detuning.delta_mev / exciton.binding_energy_mev + x - y) / gamma
}

/// (α², β²) of the lower root, each computed without cancellation.
fn lower_fractions(f: f64) -> (f64, f64) {
    let r = (f * f + 4.0).sqrt();
    let small = 2.0 / (r * (r + f.abs()));
    let large = 1.0 - small;
    if f > 0.0 {
        (small, large)
    } else if f < 0.0 {
        (large, small)
    } else {
        (0.5, 0.5)
    }
}

/// Lower polariton: the global minimum of [`energy_functional`].
pub fn solve_variational(gamma: f64, detuning: &DetuningSpec, k_r: f64, exciton: &ExcitonParams) -> Result<PolaritonSolution> {
    check_gamma(gamma)?;
    let f = mixing_parameter(gamma, detuning, k_r, exciton);
    let (alpha_sq, beta_sq) = lower_fractions(f);
    let alpha = alpha_sq.sqrt();
    let lambda = 1.0 + beta_sq.sqrt() * gamma / alpha;
    let e = energy_functional(alpha, lambda, gamma, detuning, k_r, exciton);
    debug_assert!(
        e <= coarse_grid_minimum(gamma, detuning, k_r, exciton, lambda) + 1e-9 * e.abs().max(1.0),
        "closed-form LP is not the minimum at gamma={gamma}, delta={}",
        detuning.delta_mev
    );
    Ok(PolaritonSolution { alpha_sq, beta_sq, lambda, e_over_eb: e, branch: Branch::Lp, k_r_per_nm: k_r, bound: true })
}

fn coarse_grid_minimum(gamma: f64, detuning: &DetuningSpec, k_r: f64, exciton: &ExcitonParams, lambda_hint: f64) -> f64 {
    let n = 40;
    let lmax = 2.0 * lambda_hint + 1.0;
    let mut best = f64::INFINITY;
    for i in 1..n {
        let alpha = i as f64 / n as f64;
        for j in 1..=n {
            let lambda = lmax * j as f64 / n as f64;
            best = best.min(energy_functional(alpha, lambda, gamma, detuning, k_r, exciton));
        }
    }
    best
}

/// Upper polariton: the stationary point on the orthogonal branch,
/// λ = 1 − (β/α)γ. If that λ is not positive the state is unbound and is
/// reported at the free-pair edge E = 0.
pub fn upper_polariton(gamma: f64, detuning: &DetuningSpec, k_r: f64, exciton: &ExcitonParams) -> Result<PolaritonSolution> {
    check_gamma(gamma)?;
    let f = mixing_parameter(gamma, detuning, k_r, exciton);
    let (beta_sq, alpha_sq) = lower_fractions(f);
    let alpha = alpha_sq.sqrt();
    let beta = beta_sq.sqrt();
    let lambda = 1.0 - beta * gamma / alpha;
    let (x, y) = kinetic_terms(detuning, k_r, exciton);
    if lambda <= 0.0 {
        return Ok(PolaritonSolution {
            alpha_sq,
            beta_sq,
            lambda: 0.0,
            e_over_eb: alpha_sq * x + beta_sq * y,
            branch: Branch::Up,
            k_r_per_nm: k_r,
            bound: false,
        });
    }
    // stationary value of the functional with β → −β
    let e = -alpha_sq * lambda * lambda + beta_sq * detuning.delta0 + alpha_sq * x + beta_sq * y;
    Ok(PolaritonSolution { alpha_sq, beta_sq, lambda, e_over_eb: e, branch: Branch::Up, k_r_per_nm: k_r, bound: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopfieldPoint {
    pub gamma: f64,
    pub delta_mev: f64,
    pub alpha_sq: f64,
    pub lambda: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Lower-polariton exciton fraction and reduction factor on a
/// (γ, Δ) grid at K_R = 0, γ-major.
pub fn hopfield_map(
    gamma_range: (f64, f64),
    delta_range_mev: (f64, f64),
    grid: (usize, usize),
    exciton: &ExcitonParams,
) -> Result<Vec<HopfieldPoint>> {
    if grid.0 == 0 || grid.1 == 0 || gamma_range.1 < gamma_range.0 || delta_range_mev.1 < delta_range_mev.0 {
        return Err(Error::InvalidParameter("hopfield map needs non-empty ranges".into()));
    }
    let mut out = Vec::with_capacity(grid.0 * grid.1);
    for gamma in linspace(gamma_range.0, gamma_range.1, grid.0) {
        for delta in linspace(delta_range_mev.0, delta_range_mev.1, grid.1) {
            // K_Z is irrelevant at rest
            let d = DetuningSpec::new(delta, exciton, 1.0)?;
            let s = solve_variational(gamma, &d, 0.0, exciton)?;
            out.push(HopfieldPoint { gamma, delta_mev: delta, alpha_sq: s.alpha_sq, lambda: s.lambda });
        }
    }
    Ok(out)
}

/// Lower-polariton energy (meV from the free pair at rest) along K_R.
pub fn lp_dispersion(gamma: f64, detuning: &DetuningSpec, exciton: &ExcitonParams, k_r_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if k_r_grid.iter().any(|&k| !(k >= 0.0)) || k_r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("K_R grid must be non-negative and increasing".into()));
    }
    k_r_grid
        .iter()
        .map(|&k| Ok((k, solve_variational(gamma, detuning, k, exciton)?.energy_mev(exciton))))
        .collect()
}
