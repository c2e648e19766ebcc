//! Polariton phase diagram: BEC critical density in a finite spot, bounded by
//! the dissociation temperature and the saturation density.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::materials::{ExcitonParams, KB_MEV_PER_K};
use crate::numerics::integrate;
use crate::polariton::{solve_variational, DetuningSpec, PolaritonSolution};
use crate::stability::{dissociation_temperature, saturation_density, BroadeningParams};

pub const DEFAULT_SPOT_RADIUS_UM: f64 = 50.0;
pub const DEFAULT_SIGMA_SPIN: f64 = 2.0;
pub const DEFAULT_DISSOCIATION_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureSpec {
    pub name: String,
    pub g_mev: f64,
    pub detuning: DetuningSpec,
    pub exciton: ExcitonParams,
    pub broadening: BroadeningParams,
    pub n_per_antinode: u32,
    pub total_qw_count: u32,
    pub spot_radius_um: f64,
    pub sigma_spin: f64,
    pub threshold: f64,
}

impl StructureSpec {
    pub fn new(name: impl Into<String>, g_mev: f64, detuning: DetuningSpec, exciton: ExcitonParams) -> Self {
        Self {
            name: name.into(),
            g_mev,
            detuning,
            exciton,
            broadening: BroadeningParams::default(),
            n_per_antinode: 4,
            total_qw_count: 4,
            spot_radius_um: DEFAULT_SPOT_RADIUS_UM,
            sigma_spin: DEFAULT_SIGMA_SPIN,
            threshold: DEFAULT_DISSOCIATION_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_mev > 0.0) {
            return Err(Error::InvalidParameter(format!("{}: g must be > 0, got {}", self.name, self.g_mev)));
        }
        if !(self.spot_radius_um > 0.0) {
            return Err(Error::InvalidParameter(format!("{}: spot radius must be > 0", self.name)));
        }
        if !(self.sigma_spin > 0.0) {
            return Err(Error::InvalidParameter(format!("{}: spin degeneracy must be > 0", self.name)));
        }
        self.exciton.validate()?;
        self.broadening.validate()
    }

    pub fn gamma(&self) -> f64 {
        self.g_mev / self.exciton.binding_energy_mev
    }

    pub fn k_min_per_nm(&self) -> f64 {
        std::f64::consts::PI / (self.spot_radius_um * 1e3)
    }

    fn lp_energy_mev(&self, k: f64) -> Result<f64> {
        Ok(solve_variational(self.gamma(), &self.detuning, k, &self.exciton)?.energy_mev(&self.exciton))
    }
}

const NM2_TO_CM2: f64 = 1e14;

/// Areal density (cm⁻²) of a Bose gas at zero chemical potential over the LP
/// branch, counting in-plane states from the spot cutoff k_min = π/R upward.
///
/// Occupations are referenced to the LP band bottom E_LP(0).
pub fn critical_density(t_k: f64, spec: &StructureSpec) -> Result<f64> {
    if !(t_k > 0.0) {
        return Err(Error::InvalidParameter(format!("temperature must be > 0 K, got {t_k}")));
    }
    spec.validate()?;
    let kt = KB_MEV_PER_K * t_k;
    let e0 = spec.lp_energy_mev(0.0)?;
    let k_min = spec.k_min_per_nm();
    // bracket the thermal range: occupation below e^-40 beyond k_max
    let mut k_max = 2.0 * k_min;
    while (spec.lp_energy_mev(k_max)? - e0) / kt < 40.0 {
        k_max *= 2.0;
        if k_max > 1e3 {
            return Err(Error::Numerical("LP dispersion never exceeds the thermal range".into()));
        }
    }
    let integrand = |u: f64| -> f64 {
        let k = u.exp();
        match spec.lp_energy_mev(k) {
            Ok(e) => k * k / ((e - e0) / kt).exp_m1(),
            Err(_) => f64::NAN,
        }
    };
    let mut total = integrate(integrand, k_min.ln(), k_max.ln(), 1e-9, 0.0)?;
    loop {
        let tail = integrate(integrand, k_max.ln(), (2.0 * k_max).ln(), 1e-6, 0.0)?;
        total += tail;
        k_max *= 2.0;
        if tail <= 1e-6 * total {
            break;
        }
    }
    if !total.is_finite() {
        return Err(Error::Numerical("critical-density integral did not converge".into()));
    }
    Ok(spec.sigma_spin / (2.0 * std::f64::consts::PI) * total * NM2_TO_CM2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub t_grid_k: Vec<f64>,
    pub n_crit_cm2: Vec<f64>,
    pub t_d_k: f64,
    pub n_s_per_qw_cm2: f64,
    pub n_s_total_cm2: f64,
    pub lp: PolaritonSolution,
    pub structure: StructureSpec,
}

pub fn build_phase_diagram(spec: &StructureSpec, t_grid_k: &[f64]) -> Result<PhaseDiagram> {
    spec.validate()?;
    if t_grid_k.is_empty() || t_grid_k.iter().any(|&t| !(t > 0.0)) || t_grid_k.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("temperature grid must be positive and increasing".into()));
    }
    let n_crit_cm2 = t_grid_k.iter().map(|&t| critical_density(t, spec)).collect::<Result<Vec<_>>>()?;
    let t_d_k = dissociation_temperature(spec.gamma(), &spec.detuning, &spec.exciton, &spec.broadening, spec.threshold)?;
    let lp = solve_variational(spec.gamma(), &spec.detuning, 0.0, &spec.exciton)?;
    let n_s = saturation_density(&lp, &spec.exciton)?;
    Ok(PhaseDiagram {
        t_grid_k: t_grid_k.to_vec(),
        n_crit_cm2,
        t_d_k,
        n_s_per_qw_cm2: n_s,
        n_s_total_cm2: n_s * spec.total_qw_count as f64,
        lp,
        structure: spec.clone(),
    })
}
