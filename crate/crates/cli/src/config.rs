//! Config files: TOML with unit-suffixed keys, `--set` overrides, and
//! resolution of material and exciton names.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use vscav::coupling::NumericOptions;
use vscav::materials::{builtin_exciton, builtin_material, ExcitonParams, OpticalMaterial};
use vscav::stackgen::{DbrDesign, LayerStack, MirrorSide};
use vscav::stability::BroadeningParams;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Parsed config plus the canonical text it was resolved from.
pub struct Loaded<T> {
    pub config: T,
    pub canonical: String,
}

impl<T> Loaded<T> {
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical.as_bytes()))
    }
}

fn parse_override(raw: &str) -> Result<(Vec<String>, toml::Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{raw}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("override `{raw}` has an empty key")));
    }
    let value = value.trim();
    // TOML literal if it parses as one, bare string otherwise
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key.split('.').map(str::to_string).collect(), parsed))
}

fn apply_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<(), CliError> {
    let (last, parents) = path.split_last().expect("non-empty key");
    let mut cur = table;
    for p in parents {
        let entry = cur.entry(p.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override path `{}` crosses a non-table key `{p}`", path.join("."))))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

pub fn load<T: DeserializeOwned>(path: &Path, overrides: &[String]) -> Result<Loaded<T>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table =
        text.parse().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for raw in overrides {
        let (key, value) = parse_override(raw)?;
        apply_override(&mut table, &key, value)?;
    }
    match table.get("schema_version") {
        Some(toml::Value::Integer(v)) if *v == SCHEMA_VERSION as i64 => {}
        Some(v) => {
            return Err(CliError::Config(format!(
                "unsupported schema_version {v} (this build reads {SCHEMA_VERSION})"
            )))
        }
        None => return Err(CliError::Config("missing field `schema_version`".into())),
    }
    let canonical = toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))?;
    let config = T::deserialize(toml::Value::Table(table))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(Loaded { config, canonical })
}

/// User-defined materials by name, refractive index as value.
pub type MaterialTable = BTreeMap<String, f64>;

pub fn material(name: &str, custom: &MaterialTable) -> Result<OpticalMaterial, CliError> {
    if let Some(&n) = custom.get(name) {
        return Ok(OpticalMaterial::new(name, n)?);
    }
    Ok(builtin_material(name)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExcitonConfig {
    Named(String),
    Custom(ExcitonOverride),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitonOverride {
    pub base: String,
    pub f_2d_per_m2: Option<f64>,
    pub binding_energy_mev: Option<f64>,
    /// Applied after the binding energy; the reduced mass absorbs the change.
    pub a0_nm: Option<f64>,
}

impl ExcitonConfig {
    pub fn resolve(&self) -> Result<ExcitonParams, CliError> {
        match self {
            ExcitonConfig::Named(name) => Ok(builtin_exciton(name)?),
            ExcitonConfig::Custom(o) => {
                let mut e = builtin_exciton(&o.base)?;
                if let Some(f) = o.f_2d_per_m2 {
                    e = e.with_oscillator_strength(f)?;
                }
                if let Some(eb) = o.binding_energy_mev {
                    e = e.with_binding_energy(eb)?;
                }
                if let Some(a0) = o.a0_nm {
                    e = e.with_bohr_radius(a0)?;
                }
                Ok(e)
            }
        }
    }
}

fn default_ambient() -> String {
    "Air".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StructureConfig {
    /// Cavity of order `order` between quarter-wave mirrors; pair counts are
    /// chosen from the field ratio when omitted.
    Dbr {
        cavity: String,
        mirror_hi: String,
        mirror_lo: String,
        order: u32,
        pairs_front: Option<u32>,
        pairs_back: Option<u32>,
        #[serde(default = "default_ambient")]
        ambient: String,
    },
    Layers {
        #[serde(default = "default_ambient")]
        ambient_front: String,
        #[serde(default = "default_ambient")]
        ambient_back: String,
        layers: Vec<LayerConfig>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub material: String,
    pub thickness_nm: f64,
}

impl StructureConfig {
    pub fn build(&self, lambda0_nm: f64, materials: &MaterialTable, field_ratio: f64) -> Result<LayerStack, CliError> {
        match self {
            StructureConfig::Dbr { cavity, mirror_hi, mirror_lo, order, pairs_front, pairs_back, ambient } => {
                let mut design = DbrDesign::new(
                    material(cavity, materials)?,
                    material(mirror_hi, materials)?,
                    material(mirror_lo, materials)?,
                    *order,
                    lambda0_nm,
                );
                design.ambient = material(ambient, materials)?;
                let (pf, pb) = match (pairs_front, pairs_back) {
                    (Some(f), Some(b)) => (*f, *b),
                    (f, b) => {
                        let opts = NumericOptions { field_ratio, ..NumericOptions::default() };
                        let auto = vscav::coupling::auto_pairs(&design, &opts)?;
                        (f.unwrap_or(auto), b.unwrap_or(auto))
                    }
                };
                Ok(design.stack(pf, pb)?)
            }
            StructureConfig::Layers { ambient_front, ambient_back, layers } => {
                let mut out = Vec::with_capacity(layers.len());
                for l in layers {
                    out.push(vscav::stackgen::Layer::new(material(&l.material, materials)?, l.thickness_nm)?);
                }
                Ok(LayerStack::new(out, material(ambient_front, materials)?, material(ambient_back, materials)?))
            }
        }
    }
}

fn default_window() -> f64 {
    5.0
}
fn default_field_ratio() -> f64 {
    100.0
}
fn default_threshold() -> f64 {
    vscav::stackgen::DEFAULT_ANTINODE_THRESHOLD
}
fn default_samples() -> usize {
    vscav::tmm::DEFAULT_SAMPLES_PER_LAYER
}
fn default_one() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub schema_version: u32,
    pub lambda0_nm: f64,
    pub lambda_min_nm: f64,
    pub lambda_max_nm: f64,
    pub points: usize,
    #[serde(default = "default_window")]
    pub resonance_window_nm: f64,
    #[serde(default = "default_field_ratio")]
    pub field_ratio: f64,
    #[serde(default)]
    pub materials: MaterialTable,
    pub structure: StructureConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub schema_version: u32,
    pub lambda0_nm: f64,
    /// Evaluate at the transmission resonance near `lambda0_nm` rather than
    /// at `lambda0_nm` itself.
    #[serde(default)]
    pub at_resonance: bool,
    #[serde(default = "default_window")]
    pub resonance_window_nm: f64,
    #[serde(default = "default_samples")]
    pub samples_per_layer: usize,
    #[serde(default)]
    pub margin_nm: f64,
    #[serde(default = "default_field_ratio")]
    pub field_ratio: f64,
    #[serde(default = "default_threshold")]
    pub antinode_threshold: f64,
    #[serde(default)]
    pub materials: MaterialTable,
    pub structure: StructureConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// GaAs cavity, GaAs / AlGaAs(x) mirrors.
    HighIndex,
    /// AlAs cavity, AlGaAs(x) / AlAs mirrors.
    LowIndex,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSweepConfig {
    pub schema_version: u32,
    pub lambda0_nm: f64,
    pub cavity_kind: FamilyKind,
    /// Ga fraction of the AlGaAs mirror layer.
    pub x_values: Vec<f64>,
    pub s_values: Vec<u32>,
    pub exciton: ExcitonConfig,
    #[serde(default = "default_one")]
    pub wells_per_antinode: u32,
    #[serde(default = "default_field_ratio")]
    pub field_ratio: f64,
    #[serde(default = "default_threshold")]
    pub antinode_threshold: f64,
    #[serde(default = "default_samples")]
    pub samples_per_layer: usize,
    #[serde(default)]
    pub mirror_side: MirrorSide,
    #[serde(default = "default_window")]
    pub resonance_window_nm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    pub gamma: f64,
    pub delta_mev: f64,
    pub n_eff: f64,
    pub k_max_per_nm: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolaritonConfig {
    pub schema_version: u32,
    pub exciton: ExcitonConfig,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_points: usize,
    pub delta_min_mev: f64,
    pub delta_max_mev: f64,
    pub delta_points: usize,
    /// Grid of γ for the zero-detuning branch energies.
    pub branch_gamma_min: f64,
    pub branch_gamma_max: f64,
    pub branch_points: usize,
    pub dispersion: Option<DispersionConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissociationConfig {
    pub schema_version: u32,
    pub exciton: ExcitonConfig,
    #[serde(default)]
    pub delta_mev: f64,
    pub threshold: f64,
    pub g_min_mev: f64,
    pub g_max_mev: f64,
    pub g_points: usize,
    /// Temperature of the depth-to-halfwidth ratio; T_d(g) when omitted.
    pub ratio_temperature_k: Option<f64>,
    #[serde(default)]
    pub broadening: BroadeningParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbrCouplingConfig {
    pub cavity: String,
    pub mirror_hi: String,
    pub mirror_lo: String,
    pub order: u32,
    #[serde(default = "default_field_ratio")]
    pub field_ratio: f64,
    #[serde(default = "default_threshold")]
    pub antinode_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureEntry {
    pub name: String,
    pub exciton: ExcitonConfig,
    #[serde(default)]
    pub delta_mev: f64,
    pub wells_per_antinode: u32,
    /// Coupling supplied directly (e.g. from an external mirror simulation).
    pub g_mev: Option<f64>,
    /// Coupling computed from a DBR cavity instead.
    pub dbr: Option<DbrCouplingConfig>,
    /// Mode effective index for the photon dispersion; from g when omitted.
    pub n_eff: Option<f64>,
    /// Total wells; counted from the loaded DBR, or `wells_per_antinode`.
    pub total_qw_count: Option<u32>,
    #[serde(default)]
    pub broadening: BroadeningParams,
}

fn default_spot() -> f64 {
    vscav::phasediagram::DEFAULT_SPOT_RADIUS_UM
}
fn default_sigma() -> f64 {
    vscav::phasediagram::DEFAULT_SIGMA_SPIN
}
fn default_dissociation_threshold() -> f64 {
    vscav::phasediagram::DEFAULT_DISSOCIATION_THRESHOLD
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub schema_version: u32,
    pub lambda0_nm: f64,
    pub t_min_k: f64,
    pub t_max_k: f64,
    pub t_points: usize,
    #[serde(default = "default_true")]
    pub t_log_spacing: bool,
    #[serde(default = "default_spot")]
    pub spot_radius_um: f64,
    #[serde(default = "default_sigma")]
    pub sigma_spin: f64,
    #[serde(default = "default_dissociation_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub materials: MaterialTable,
    pub structure: Vec<StructureEntry>,
}
