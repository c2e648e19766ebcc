//! Optical and excitonic material constants.
//!
//! Every physical constant used by the crate lives here. Refractive indices are
//! single room-temperature values at the 850 nm design wavelength; no dispersion
//! or absorption is modeled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values, SI units unless the name says otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub e: f64,
    pub eps_0: f64,
    pub m_e: f64,
    pub hbar: f64,
    pub k_b: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    e: 1.602_176_634e-19,
    eps_0: 8.854_187_812_8e-12,
    m_e: 9.109_383_701_5e-31,
    hbar: 1.054_571_817e-34,
    k_b: 1.380_649e-23,
};

/// ħ in meV·s.
pub const HBAR_MEV_S: f64 = 6.582_119_569e-13;
/// k_B in meV/K.
pub const KB_MEV_PER_K: f64 = 8.617_333_262e-2;
/// hc in meV·nm.
pub const HC_MEV_NM: f64 = 1.239_841_984e6;
/// ħ²/(2 m_e) in meV·nm².
pub const HBAR2_OVER_2ME_MEV_NM2: f64 = 38.099_821_2;
/// m⁻² per cm⁻².
pub const PER_CM2_TO_PER_M2: f64 = 1.0e4;

pub const N_GAAS: f64 = 3.64677;
pub const N_ALAS: f64 = 3.00153;

/// Photon energy in meV for a vacuum wavelength in nm.
pub fn photon_energy_mev(lambda_nm: f64) -> f64 {
    HC_MEV_NM / lambda_nm
}

pub fn per_cm2_to_per_m2(x: f64) -> f64 {
    x * PER_CM2_TO_PER_M2
}

pub fn per_m2_to_per_cm2(x: f64) -> f64 {
    x / PER_CM2_TO_PER_M2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalMaterial {
    pub name: String,
    pub refractive_index: f64,
}

impl OpticalMaterial {
    pub fn new(name: impl Into<String>, refractive_index: f64) -> Result<Self> {
        if !(refractive_index >= 1.0) || !refractive_index.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "refractive index must be >= 1, got {refractive_index}"
            )));
        }
        Ok(Self { name: name.into(), refractive_index })
    }

    pub fn gaas() -> Self {
        Self { name: "GaAs".into(), refractive_index: N_GAAS }
    }

    pub fn alas() -> Self {
        Self { name: "AlAs".into(), refractive_index: N_ALAS }
    }

    pub fn air() -> Self {
        Self { name: "Air".into(), refractive_index: 1.0 }
    }

    /// Al₁₋ₓGaₓAs with Ga fraction `x`: linear interpolation between the AlAs
    /// (x = 0) and GaAs (x = 1) indices.
    pub fn algaas(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!(
                "AlGaAs Ga fraction must lie in [0, 1], got {x}"
            )));
        }
        Ok(Self {
            name: format!("AlGaAs({x})"),
            refractive_index: N_ALAS + x * (N_GAAS - N_ALAS),
        })
    }

    pub fn n(&self) -> f64 {
        self.refractive_index
    }
}

const MATERIAL_NAMES: &str = "GaAs, AlAs, Air, AlGaAs(x)";

/// Looks up a registered material. `AlGaAs(x)` takes the Ga fraction `x`.
pub fn builtin_material(name: &str) -> Result<OpticalMaterial> {
    let trimmed = name.trim();
    match trimmed {
        "GaAs" => return Ok(OpticalMaterial::gaas()),
        "AlAs" => return Ok(OpticalMaterial::alas()),
        "Air" => return Ok(OpticalMaterial::air()),
        _ => {}
    }
    if let Some(arg) = trimmed.strip_prefix("AlGaAs(").and_then(|s| s.strip_suffix(')')) {
        if let Ok(x) = arg.trim().parse::<f64>() {
            return OpticalMaterial::algaas(x);
        }
    }
    Err(Error::UnknownMaterial { name: name.to_string(), available: MATERIAL_NAMES.into() })
}

/// Free-electron-mass units.
pub const DEFAULT_ELECTRON_MASS: f64 = 0.067;
pub const DEFAULT_HOLE_MASS: f64 = 0.45;
pub const DEFAULT_EPS_R: f64 = 12.9;
pub const DEFAULT_BINDING_MEV: f64 = 10.0;
pub const DEFAULT_DESIGN_WAVELENGTH_NM: f64 = 850.0;

/// Quantum-well exciton parameters.
///
/// The 2D hydrogenic relation `E_B = ħ²/(2 μ a₀²)` ties the binding energy,
/// reduced mass and Bohr radius together; every constructor derives one of the
/// three from the other two so the relation holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitonParams {
    pub name: String,
    /// Oscillator strength per unit area, m⁻².
    pub f_2d_per_m2: f64,
    pub binding_energy_mev: f64,
    pub bohr_radius_nm: f64,
    /// Reduced mass, units of m_e.
    pub reduced_mass: f64,
    /// Total (center-of-mass) mass, units of m_e.
    pub total_mass: f64,
    pub eps_r: f64,
    pub bandgap_mev: f64,
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be strictly positive, got {v}")))
    }
}

impl ExcitonParams {
    /// Builds from binding energy and reduced mass; the Bohr radius is derived.
    #[allow(clippy::too_many_arguments)]
    pub fn from_binding_and_mass(
        name: impl Into<String>,
        f_2d_per_m2: f64,
        binding_energy_mev: f64,
        reduced_mass: f64,
        total_mass: f64,
        eps_r: f64,
        bandgap_mev: f64,
    ) -> Result<Self> {
        positive("binding energy", binding_energy_mev)?;
        positive("reduced mass", reduced_mass)?;
        let a0 = (HBAR2_OVER_2ME_MEV_NM2 / (reduced_mass * binding_energy_mev)).sqrt();
        Self::checked(name.into(), f_2d_per_m2, binding_energy_mev, a0, reduced_mass, total_mass, eps_r, bandgap_mev)
    }

    /// Builds from binding energy and Bohr radius; the reduced mass is derived.
    #[allow(clippy::too_many_arguments)]
    pub fn from_binding_and_radius(
        name: impl Into<String>,
        f_2d_per_m2: f64,
        binding_energy_mev: f64,
        bohr_radius_nm: f64,
        total_mass: f64,
        eps_r: f64,
        bandgap_mev: f64,
    ) -> Result<Self> {
        positive("binding energy", binding_energy_mev)?;
        positive("Bohr radius", bohr_radius_nm)?;
        let mu = HBAR2_OVER_2ME_MEV_NM2 / (binding_energy_mev * bohr_radius_nm * bohr_radius_nm);
        Self::checked(name.into(), f_2d_per_m2, binding_energy_mev, bohr_radius_nm, mu, total_mass, eps_r, bandgap_mev)
    }

    /// Builds from Bohr radius and reduced mass; the binding energy is derived.
    #[allow(clippy::too_many_arguments)]
    pub fn from_radius_and_mass(
        name: impl Into<String>,
        f_2d_per_m2: f64,
        bohr_radius_nm: f64,
        reduced_mass: f64,
        total_mass: f64,
        eps_r: f64,
        bandgap_mev: f64,
    ) -> Result<Self> {
        positive("Bohr radius", bohr_radius_nm)?;
        positive("reduced mass", reduced_mass)?;
        let eb = HBAR2_OVER_2ME_MEV_NM2 / (reduced_mass * bohr_radius_nm * bohr_radius_nm);
        Self::checked(name.into(), f_2d_per_m2, eb, bohr_radius_nm, reduced_mass, total_mass, eps_r, bandgap_mev)
    }

    #[allow(clippy::too_many_arguments)]
    fn checked(
        name: String,
        f_2d_per_m2: f64,
        binding_energy_mev: f64,
        bohr_radius_nm: f64,
        reduced_mass: f64,
        total_mass: f64,
        eps_r: f64,
        bandgap_mev: f64,
    ) -> Result<Self> {
        positive("oscillator strength", f_2d_per_m2)?;
        positive("total mass", total_mass)?;
        positive("relative permittivity", eps_r)?;
        positive("bandgap", bandgap_mev)?;
        let p = Self {
            name,
            f_2d_per_m2,
            binding_energy_mev,
            bohr_radius_nm,
            reduced_mass,
            total_mass,
            eps_r,
            bandgap_mev,
        };
        p.validate()?;
        Ok(p)
    }

    /// Re-checks positivity and the binding-energy relation (used after
    /// deserialization).
    pub fn validate(&self) -> Result<()> {
        positive("oscillator strength", self.f_2d_per_m2)?;
        positive("binding energy", self.binding_energy_mev)?;
        positive("Bohr radius", self.bohr_radius_nm)?;
        positive("reduced mass", self.reduced_mass)?;
        positive("total mass", self.total_mass)?;
        positive("relative permittivity", self.eps_r)?;
        positive("bandgap", self.bandgap_mev)?;
        let rel = (self.consistency_binding_mev() - self.binding_energy_mev).abs() / self.binding_energy_mev;
        if rel > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "E_B = hbar^2/(2 mu a0^2) violated by {rel:.2e} (relative)"
            )));
        }
        Ok(())
    }

    /// ħ²/(2 μ a₀²) in meV.
    pub fn consistency_binding_mev(&self) -> f64 {
        HBAR2_OVER_2ME_MEV_NM2 / (self.reduced_mass * self.bohr_radius_nm * self.bohr_radius_nm)
    }

    /// Replaces the Bohr radius keeping E_B fixed; μ is recomputed.
    pub fn with_bohr_radius(&self, bohr_radius_nm: f64) -> Result<Self> {
        Self::from_binding_and_radius(
            self.name.clone(),
            self.f_2d_per_m2,
            self.binding_energy_mev,
            bohr_radius_nm,
            self.total_mass,
            self.eps_r,
            self.bandgap_mev,
        )
    }

    /// Replaces the binding energy keeping μ fixed; a₀ is recomputed.
    pub fn with_binding_energy(&self, binding_energy_mev: f64) -> Result<Self> {
        Self::from_binding_and_mass(
            self.name.clone(),
            self.f_2d_per_m2,
            binding_energy_mev,
            self.reduced_mass,
            self.total_mass,
            self.eps_r,
            self.bandgap_mev,
        )
    }

    pub fn with_oscillator_strength(&self, f_2d_per_m2: f64) -> Result<Self> {
        let mut p = self.clone();
        p.f_2d_per_m2 = f_2d_per_m2;
        p.validate()?;
        Ok(p)
    }

    /// Exciton resonance energy E_g − E_B, meV.
    pub fn exciton_energy_mev(&self) -> f64 {
        self.bandgap_mev - self.binding_energy_mev
    }
}

const EXCITON_NAMES: &str = "InGaAsQW, GaAsQW";

/// Built-in quantum-well excitons. Masses and permittivity are the standard
/// GaAs defaults; the bandgap is placed so the bare exciton is resonant with an
/// 850 nm cavity photon.
pub fn builtin_exciton(name: &str) -> Result<ExcitonParams> {
    let f_2d = match name.trim() {
        "InGaAsQW" => per_cm2_to_per_m2(4.8e12),
        "GaAsQW" => 7.0e16,
        _ => {
            return Err(Error::UnknownExciton { name: name.to_string(), available: EXCITON_NAMES.into() })
        }
    };
    let mu = 1.0 / (1.0 / DEFAULT_ELECTRON_MASS + 1.0 / DEFAULT_HOLE_MASS);
    ExcitonParams::from_binding_and_mass(
        name.trim(),
        f_2d,
        DEFAULT_BINDING_MEV,
        mu,
        DEFAULT_ELECTRON_MASS + DEFAULT_HOLE_MASS,
        DEFAULT_EPS_R,
        photon_energy_mev(DEFAULT_DESIGN_WAVELENGTH_NM) + DEFAULT_BINDING_MEV,
    )
}
