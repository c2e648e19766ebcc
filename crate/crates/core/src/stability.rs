//! Phonon-driven dissociation of the lower polariton and exciton saturation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{ExcitonParams, HBAR_MEV_S, KB_MEV_PER_K};
use crate::numerics::bisect;
use crate::polariton::{solve_variational, Branch, DetuningSpec, PolaritonSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BroadeningParams {
    /// Acoustic-phonon coefficient (μeV/K).
    pub gamma_a_uev_per_k: f64,
    /// LO-phonon coefficient (meV).
    pub gamma_lo_mev: f64,
    pub hbar_omega_lo_mev: f64,
    /// Exciton radiative full width (μeV).
    pub gamma_ex_uev: f64,
    /// Inhomogeneous broadening (meV).
    pub gamma_inh_mev: f64,
    /// Cavity quality factor; the photon width is ħω₀/Q.
    pub q: f64,
}

impl Default for BroadeningParams {
    fn default() -> Self {
        Self {
            gamma_a_uev_per_k: 4.4,
            gamma_lo_mev: 15.2,
            hbar_omega_lo_mev: 36.0,
            gamma_ex_uev: 1.3,
            gamma_inh_mev: 1.0,
            q: 4000.0,
        }
    }
}

impl BroadeningParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma_a_uev_per_k", self.gamma_a_uev_per_k),
            ("gamma_lo_mev", self.gamma_lo_mev),
            ("hbar_omega_lo_mev", self.hbar_omega_lo_mev),
            ("gamma_ex_uev", self.gamma_ex_uev),
            ("gamma_inh_mev", self.gamma_inh_mev),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.q >= 1.0) {
            return Err(Error::InvalidParameter(format!("quality factor must be >= 1, got {}", self.q)));
        }
        Ok(())
    }

    pub fn gamma_ex_mev(&self) -> f64 {
        self.gamma_ex_uev * 1e-3
    }

    pub fn gamma_pt_mev(&self, hbar_omega0_mev: f64) -> f64 {
        hbar_omega0_mev / self.q
    }
}

/// γ_A·T + γ_LO/(exp(ħω_LO/k_B T) − 1), in meV.
pub fn phonon_broadening(t_k: f64, params: &BroadeningParams) -> Result<f64> {
    if !(t_k >= 0.0) {
        return Err(Error::InvalidParameter(format!("temperature must be >= 0 K, got {t_k}")));
    }
    if t_k == 0.0 {
        return Ok(0.0);
    }
    let acoustic = params.gamma_a_uev_per_k * 1e-3 * t_k;
    let lo = params.gamma_lo_mev / (params.hbar_omega_lo_mev / (KB_MEV_PER_K * t_k)).exp_m1();
    Ok(acoustic + lo)
}

fn check_fraction(alpha_sq: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha_sq) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exciton fraction must lie in [0, 1], got {alpha_sq}")))
    }
}

/// Radiative lifetime ħ/(α²γ_ex + β²γ_pt) in seconds.
pub fn lp_lifetime(alpha_sq: f64, params: &BroadeningParams, hbar_omega0_mev: f64) -> Result<f64> {
    check_fraction(alpha_sq)?;
    let width = alpha_sq * params.gamma_ex_mev() + (1.0 - alpha_sq) * params.gamma_pt_mev(hbar_omega0_mev);
    Ok(HBAR_MEV_S / width)
}

/// α²(γ_inh + γ_pm + γ_ex) + β²γ_pt, in meV.
pub fn lp_linewidth(alpha_sq: f64, gamma_pm_mev: f64, params: &BroadeningParams, hbar_omega0_mev: f64) -> Result<f64> {
    check_fraction(alpha_sq)?;
    Ok(alpha_sq * (params.gamma_inh_mev + gamma_pm_mev + params.gamma_ex_mev())
        + (1.0 - alpha_sq) * params.gamma_pt_mev(hbar_omega0_mev))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dissociation {
    pub probability: f64,
    pub unclamped: f64,
    /// Set when the raw expression exceeded 1.
    pub clamped: bool,
    pub gamma_pm_mev: f64,
    pub tau_lp_s: f64,
    pub gamma_lp_mev: f64,
    /// LP binding depth below the free-pair continuum, λ·E_B.
    pub depth_mev: f64,
}

/// Probability that a phonon collision during the LP lifetime supplies the
/// energy to reach the free-pair continuum, for a Lorentzian LP line.
pub fn dissociation_probability(
    t_k: f64,
    solution: &PolaritonSolution,
    exciton: &ExcitonParams,
    params: &BroadeningParams,
    hbar_omega0_mev: f64,
) -> Result<Dissociation> {
    if solution.branch != Branch::Lp {
        return Err(Error::InvalidParameter("dissociation needs a lower-polariton state".into()));
    }
    let gamma_pm_mev = phonon_broadening(t_k, params)?;
    let tau_lp_s = lp_lifetime(solution.alpha_sq, params, hbar_omega0_mev)?;
    let gamma_lp_mev = lp_linewidth(solution.alpha_sq, gamma_pm_mev, params, hbar_omega0_mev)?;
    let depth_mev = solution.lambda * exciton.binding_energy_mev;
    let tail = 0.5 - (depth_mev / (0.5 * gamma_lp_mev)).atan() / std::f64::consts::PI;
    let collisions = gamma_pm_mev / HBAR_MEV_S * tau_lp_s;
    let unclamped = solution.alpha_sq * collisions * tail;
    Ok(Dissociation {
        probability: unclamped.clamp(0.0, 1.0),
        unclamped,
        clamped: unclamped > 1.0,
        gamma_pm_mev,
        tau_lp_s,
        gamma_lp_mev,
        depth_mev,
    })
}

pub const T_BRACKET_K: (f64, f64) = (1.0, 2000.0);

/// Temperature at which the dissociation probability reaches `threshold`,
/// bisected on [`T_BRACKET_K`].
pub fn dissociation_temperature(
    gamma: f64,
    detuning: &DetuningSpec,
    exciton: &ExcitonParams,
    params: &BroadeningParams,
    threshold: f64,
) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    params.validate()?;
    let lp = solve_variational(gamma, detuning, 0.0, exciton)?;
    let p = |t: f64| -> Result<f64> {
        Ok(dissociation_probability(t, &lp, exciton, params, detuning.hbar_omega0_mev)?.probability)
    };
    let (lo, hi) = T_BRACKET_K;
    let mut prev = p(lo)?;
    let n = 400;
    for i in 1..=n {
        let cur = p(lo + (hi - lo) * i as f64 / n as f64)?;
        if cur < prev - 1e-12 * prev.abs() {
            return Err(Error::Numerical("dissociation probability is not monotone in temperature".into()));
        }
        prev = cur;
    }
    let (p_lo, p_hi) = (p(lo)?, p(hi)?);
    if p_hi < threshold {
        return Err(Error::NoCrossing { threshold, t_top_k: hi, p_top: p_hi });
    }
    if p_lo > threshold {
        return Err(Error::BelowBracket { threshold, t_bottom_k: lo, p_bottom: p_lo });
    }
    bisect(|t| p(t).map(|v| v - threshold).unwrap_or(f64::NAN), lo, hi, 1e-3)
}

/// λE_B/(γ_LP/2) at temperature `t_k`.
pub fn lp_depth_to_halfwidth_ratio(
    gamma: f64,
    detuning: &DetuningSpec,
    exciton: &ExcitonParams,
    params: &BroadeningParams,
    t_k: f64,
) -> Result<f64> {
    let lp = solve_variational(gamma, detuning, 0.0, exciton)?;
    let d = dissociation_probability(t_k, &lp, exciton, params, detuning.hbar_omega0_mev)?;
    Ok(d.depth_mev / (0.5 * d.gamma_lp_mev))
}

/// Per-well saturation density λ²/(9π a₀² α²) in cm⁻².
///
/// The phase-space-filling density of the shrunken exciton, λ²/(9π a₀²), is
/// the density of excitons; the LP density at which that many excitons are
/// present is larger by 1/α².
pub fn saturation_density(solution: &PolaritonSolution, exciton: &ExcitonParams) -> Result<f64> {
    if !(solution.alpha_sq > 0.0) {
        return Err(Error::InvalidParameter("saturation density needs a non-zero exciton fraction".into()));
    }
    let a0_cm = exciton.bohr_radius_nm * 1e-7;
    Ok(solution.lambda.powi(2) / (9.0 * std::f64::consts::PI * a0_cm * a0_cm * solution.alpha_sq))
}
