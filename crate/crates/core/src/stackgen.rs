//! DBR microcavity stacks and quantum-well sheet placement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{builtin_material, ExcitonParams, OpticalMaterial};
use crate::tmm::FieldProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub material: OpticalMaterial,
    pub thickness_nm: f64,
}

impl Layer {
    pub fn new(material: OpticalMaterial, thickness_nm: f64) -> Result<Self> {
        if !(thickness_nm > 0.0) || !thickness_nm.is_finite() {
            return Err(Error::InvalidParameter(format!("layer thickness must be > 0, got {thickness_nm}")));
        }
        Ok(Self { material, thickness_nm })
    }

    pub fn n(&self) -> f64 {
        self.material.refractive_index
    }
}

/// An infinitely thin sheet of `count` identical quantum wells at `z_nm`,
/// measured from the front face of the stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QwSheet {
    pub z_nm: f64,
    pub count: u32,
    pub exciton: ExcitonParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CavityKind {
    /// Cavity index is the higher mirror index (GaAs-type).
    HighIndex,
    /// Cavity index is the lower mirror index (AlAs-type).
    LowIndex,
}

/// Which mirrors receive quantum wells besides the cavity itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MirrorSide {
    #[default]
    Both,
    Front,
    Back,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub sheets: Vec<QwSheet>,
    pub ambient_front: OpticalMaterial,
    pub ambient_back: OpticalMaterial,
    /// Index into `layers` of the cavity spacer, when the stack has one.
    pub cavity: Option<usize>,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, ambient_front: OpticalMaterial, ambient_back: OpticalMaterial) -> Self {
        Self { layers, sheets: Vec::new(), ambient_front, ambient_back, cavity: None }
    }

    pub fn total_length_nm(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }

    /// Positions of the layer boundaries, starting at 0 and ending at the total
    /// length.
    pub fn boundaries_nm(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layers.len() + 1);
        let mut z = 0.0;
        out.push(z);
        for l in &self.layers {
            z += l.thickness_nm;
            out.push(z);
        }
        out
    }

    pub fn cavity_span_nm(&self) -> Option<(f64, f64)> {
        let i = self.cavity?;
        let b = self.boundaries_nm();
        Some((b[i], b[i + 1]))
    }

    /// Mirror image of the stack (front and back swapped).
    pub fn reversed(&self) -> Self {
        let total = self.total_length_nm();
        let mut sheets: Vec<QwSheet> = self
            .sheets
            .iter()
            .map(|s| QwSheet { z_nm: total - s.z_nm, ..s.clone() })
            .collect();
        sheets.sort_by(|a, b| a.z_nm.total_cmp(&b.z_nm));
        Self {
            layers: self.layers.iter().rev().cloned().collect(),
            sheets,
            ambient_front: self.ambient_back.clone(),
            ambient_back: self.ambient_front.clone(),
            cavity: self.cavity.map(|i| self.layers.len() - 1 - i),
        }
    }

    /// Total number of wells over all sheets.
    pub fn well_count(&self) -> u32 {
        self.sheets.iter().map(|s| s.count).sum()
    }

    /// Serializable description with material names.
    pub fn to_spec(&self) -> StackSpec {
        StackSpec {
            ambient_front: self.ambient_front.name.clone(),
            ambient_back: self.ambient_back.name.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerSpec { material: l.material.name.clone(), thickness_nm: l.thickness_nm })
                .collect(),
        }
    }
}

/// A layer as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub material: String,
    pub thickness_nm: f64,
}

/// Ordered layer list with ambient media, by material name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    #[serde(default = "default_ambient")]
    pub ambient_front: String,
    #[serde(default = "default_ambient")]
    pub ambient_back: String,
    pub layers: Vec<LayerSpec>,
}

fn default_ambient() -> String {
    "Air".into()
}

impl StackSpec {
    pub fn build(&self) -> Result<LayerStack> {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer::new(builtin_material(&l.material)?, l.thickness_nm))
            .collect::<Result<Vec<_>>>()?;
        Ok(LayerStack::new(
            layers,
            builtin_material(&self.ambient_front)?,
            builtin_material(&self.ambient_back)?,
        ))
    }
}

/// Geometry of a symmetric-design DBR cavity; pair counts are supplied when
/// the stack is built.
#[derive(Debug, Clone, PartialEq)]
pub struct DbrDesign {
    pub cavity: OpticalMaterial,
    pub mirror_hi: OpticalMaterial,
    pub mirror_lo: OpticalMaterial,
    pub order: u32,
    pub lambda0_nm: f64,
    pub ambient: OpticalMaterial,
}

impl DbrDesign {
    pub fn new(
        cavity: OpticalMaterial,
        mirror_hi: OpticalMaterial,
        mirror_lo: OpticalMaterial,
        order: u32,
        lambda0_nm: f64,
    ) -> Self {
        Self { cavity, mirror_hi, mirror_lo, order, lambda0_nm, ambient: OpticalMaterial::air() }
    }

    pub fn kind(&self) -> CavityKind {
        let nc = self.cavity.n();
        if (nc - self.mirror_hi.n()).abs() <= (nc - self.mirror_lo.n()).abs() {
            CavityKind::HighIndex
        } else {
            CavityKind::LowIndex
        }
    }

    pub fn stack(&self, pairs_front: u32, pairs_back: u32) -> Result<LayerStack> {
        let mut stack = build_dbr_cavity(
            &self.cavity,
            &self.mirror_hi,
            &self.mirror_lo,
            self.order,
            pairs_front,
            pairs_back,
            self.lambda0_nm,
        )?;
        stack.ambient_front = self.ambient.clone();
        stack.ambient_back = self.ambient.clone();
        Ok(stack)
    }
}

/// Cavity spacer of thickness `s·λ₀/(2n_c)` between quarter-wave mirrors.
///
/// The mirror layer touching the cavity has the index opposite to the cavity:
/// a high-index spacer is flanked by low-index layers and vice versa. Ambient
/// media default to air.
pub fn build_dbr_cavity(
    cavity: &OpticalMaterial,
    mirror_hi: &OpticalMaterial,
    mirror_lo: &OpticalMaterial,
    s: u32,
    pairs_front: u32,
    pairs_back: u32,
    lambda0_nm: f64,
) -> Result<LayerStack> {
    if s < 1 {
        return Err(Error::InvalidParameter("cavity order must be >= 1".into()));
    }
    if pairs_front < 1 || pairs_back < 1 {
        return Err(Error::InvalidParameter("mirror pair counts must be >= 1".into()));
    }
    if !(lambda0_nm > 0.0) {
        return Err(Error::InvalidParameter(format!("design wavelength must be > 0, got {lambda0_nm}")));
    }
    if mirror_hi.n() <= mirror_lo.n() {
        return Err(Error::IndexOrdering { n1: mirror_hi.n(), n2: mirror_lo.n() });
    }
    let quarter = |m: &OpticalMaterial| Layer::new(m.clone(), lambda0_nm / (4.0 * m.n()));
    let design = DbrDesign::new(cavity.clone(), mirror_hi.clone(), mirror_lo.clone(), s, lambda0_nm);
    let (near, far) = match design.kind() {
        CavityKind::HighIndex => (mirror_lo, mirror_hi),
        CavityKind::LowIndex => (mirror_hi, mirror_lo),
    };
    let mut layers = Vec::with_capacity(2 * (pairs_front + pairs_back) as usize + 1);
    for _ in 0..pairs_front {
        layers.push(quarter(far)?);
        layers.push(quarter(near)?);
    }
    let cavity_index = layers.len();
    layers.push(Layer::new(cavity.clone(), s as f64 * lambda0_nm / (2.0 * cavity.n()))?);
    for _ in 0..pairs_back {
        layers.push(quarter(near)?);
        layers.push(quarter(far)?);
    }
    let mut stack = LayerStack::new(layers, OpticalMaterial::air(), OpticalMaterial::air());
    stack.cavity = Some(cavity_index);
    Ok(stack)
}

/// Default relative amplitude below which antinodes are left empty.
pub const DEFAULT_ANTINODE_THRESHOLD: f64 = 0.01;

/// Local maxima of |E(z)| strictly inside the stack, refined on the exact
/// field where the profile carries one. Returned as (z, |E|) in profile units.
pub fn field_antinodes(stack: &LayerStack, field: &FieldProfile) -> Result<Vec<(f64, f64)>> {
    field.check_matches(stack)?;
    let total = stack.total_length_nm();
    // merge duplicate interface samples
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(field.z_nm.len());
    for (&z, &a) in field.z_nm.iter().zip(&field.amplitude) {
        if z < -1e-9 || z > total + 1e-9 {
            continue;
        }
        match pts.last_mut() {
            Some(last) if (z - last.0).abs() < 1e-9 => last.1 = last.1.max(a),
            _ => pts.push((z, a)),
        }
    }
    let tol_z = 1e-7 * field.lambda_nm;
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..pts.len().saturating_sub(1) {
        let (prev, cur, next) = (pts[i - 1].1, pts[i].1, pts[i + 1].1);
        if !(cur >= prev && cur > next) {
            continue;
        }
        let (lo, hi) = (pts[i - 1].0, pts[i + 1].0);
        let (z, a) = if field.has_exact_field() {
            let (z, a) = crate::numerics::golden_max(|z| field.eval(z), lo, hi, 1e-9 * field.lambda_nm);
            if a >= cur {
                (z, a)
            } else {
                pts[i]
            }
        } else {
            pts[i]
        };
        if z <= tol_z || z >= total - tol_z {
            continue;
        }
        if let Some(last) = peaks.last_mut() {
            if (z - last.0).abs() < tol_z {
                if a > last.1 {
                    *last = (z, a);
                }
                continue;
            }
        }
        peaks.push((z, a));
    }
    Ok(peaks)
}

/// One sheet of `n_per_antinode` wells at every antinode whose amplitude is at
/// least `threshold` times the largest antinode amplitude.
pub fn place_qws_at_antinodes(
    stack: &LayerStack,
    field: &FieldProfile,
    n_per_antinode: u32,
    exciton: &ExcitonParams,
    threshold: f64,
) -> Result<LayerStack> {
    place_qws_on_side(stack, field, n_per_antinode, exciton, threshold, MirrorSide::Both)
}

/// As [`place_qws_at_antinodes`], restricting mirror antinodes to `side`.
/// Antinodes inside or on the edges of the cavity layer are always filled.
pub fn place_qws_on_side(
    stack: &LayerStack,
    field: &FieldProfile,
    n_per_antinode: u32,
    exciton: &ExcitonParams,
    threshold: f64,
    side: MirrorSide,
) -> Result<LayerStack> {
    if n_per_antinode < 1 {
        return Err(Error::InvalidParameter("wells per antinode must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!("threshold must lie in [0, 1], got {threshold}")));
    }
    let peaks = field_antinodes(stack, field)?;
    let max = peaks.iter().map(|p| p.1).fold(0.0, f64::max);
    let cavity = stack.cavity_span_nm();
    let tol = 1e-6 * field.lambda_nm;
    let keep_side = |z: f64| -> bool {
        let Some((c0, c1)) = cavity else { return true };
        if z >= c0 - tol && z <= c1 + tol {
            return true;
        }
        match side {
            MirrorSide::Both => true,
            MirrorSide::Front => z < c0,
            MirrorSide::Back => z > c1,
            MirrorSide::None => false,
        }
    };
    let mut out = stack.clone();
    out.sheets = peaks
        .into_iter()
        .filter(|&(z, a)| a >= threshold * max && keep_side(z))
        .map(|(z, _)| QwSheet { z_nm: z, count: n_per_antinode, exciton: exciton.clone() })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmm;

    fn gaas_cavity(s: u32, pairs: u32) -> LayerStack {
        build_dbr_cavity(&OpticalMaterial::gaas(), &OpticalMaterial::gaas(), &OpticalMaterial::alas(), s, pairs, pairs, 850.0)
            .unwrap()
    }

    #[test]
    fn layer_thicknesses() {
        let st = gaas_cavity(1, 3);
        let c = st.cavity.unwrap();
        assert!((st.layers[c].thickness_nm - 116.541).abs() < 1e-3);
        assert!((st.layers[c - 1].thickness_nm - 70.797).abs() < 1e-3, "AlAs next to GaAs cavity");
        assert!((st.layers[c - 2].thickness_nm - 58.271).abs() < 1e-3);
        assert_eq!(st.layers.len(), 13);
        let total: f64 = st.layers.iter().map(|l| l.thickness_nm).sum();
        assert!((st.total_length_nm() - total).abs() < 1e-12);
    }

    #[test]
    fn order_scales_cavity_only() {
        let a = gaas_cavity(1, 4);
        let b = gaas_cavity(2, 4);
        let c = a.cavity.unwrap();
        assert!((b.layers[c].thickness_nm - 2.0 * a.layers[c].thickness_nm).abs() < 1e-12);
        for (i, (la, lb)) in a.layers.iter().zip(&b.layers).enumerate() {
            if i != c {
                assert_eq!(la.thickness_nm, lb.thickness_nm);
            }
        }
    }

    #[test]
    fn low_index_cavity_has_high_index_neighbours() {
        let hi = OpticalMaterial::algaas(0.8).unwrap();
        let st = build_dbr_cavity(&OpticalMaterial::alas(), &hi, &OpticalMaterial::alas(), 1, 2, 2, 850.0).unwrap();
        let c = st.cavity.unwrap();
        assert_eq!(st.layers[c].material.n(), 3.00153);
        assert!(st.layers[c - 1].n() > st.layers[c].n());
        assert!(st.layers[c + 1].n() > st.layers[c].n());
    }

    #[test]
    fn invalid_inputs() {
        let g = OpticalMaterial::gaas();
        let a = OpticalMaterial::alas();
        assert!(build_dbr_cavity(&g, &g, &a, 0, 1, 1, 850.0).is_err());
        assert!(build_dbr_cavity(&g, &g, &a, 1, 0, 1, 850.0).is_err());
        assert!(matches!(build_dbr_cavity(&g, &g, &g, 1, 1, 1, 850.0), Err(Error::IndexOrdering { .. })));
    }

    #[test]
    fn spec_round_trip_through_names() {
        let st = gaas_cavity(1, 2);
        let spec = st.to_spec();
        let rebuilt = spec.build().unwrap();
        assert_eq!(rebuilt.layers, st.layers);
    }

    fn loaded(stack: &LayerStack, threshold: f64) -> (LayerStack, FieldProfile) {
        let field = tmm::field_profile(stack, 850.0, 64).unwrap();
        let ex = crate::materials::builtin_exciton("GaAsQW").unwrap();
        (place_qws_at_antinodes(stack, &field, 1, &ex, threshold).unwrap(), field)
    }

    #[test]
    fn zero_threshold_fills_every_antinode() {
        let st = gaas_cavity(1, 6);
        let (out, field) = loaded(&st, 0.0);
        let peaks = field_antinodes(&st, &field).unwrap();
        assert_eq!(out.sheets.len(), peaks.len());
        assert!(!out.sheets.is_empty());
        assert!(st.sheets.is_empty(), "input untouched");
        assert!(out.sheets.windows(2).all(|w| w[0].z_nm < w[1].z_nm));
        assert!(out.sheets.iter().all(|s| s.z_nm > 0.0 && s.z_nm < st.total_length_nm()));
    }

    #[test]
    fn unit_threshold_keeps_global_maximum_only() {
        let hi = OpticalMaterial::gaas();
        let st = build_dbr_cavity(&OpticalMaterial::alas(), &hi, &OpticalMaterial::alas(), 1, 8, 8, 850.0).unwrap();
        let (out, field) = loaded(&st, 1.0);
        assert_eq!(out.sheets.len(), 1);
        let (c0, c1) = st.cavity_span_nm().unwrap();
        let z = out.sheets[0].z_nm;
        assert!((z - 0.5 * (c0 + c1)).abs() < 1e-3, "z = {z}");
        // grid normalization: the refined maximum may sit between samples
        let e = field.eval(z);
        assert!(e >= 1.0 - 1e-12 && e < 1.0 + 1e-3, "{e}");
    }

    #[test]
    fn mirror_antinode_spacing_is_half_wave() {
        let st = gaas_cavity(1, 10);
        let field = tmm::field_profile(&st, 850.0, 64).unwrap();
        let peaks = field_antinodes(&st, &field).unwrap();
        let (_, c1) = st.cavity_span_nm().unwrap();
        let back: Vec<f64> = peaks.iter().map(|p| p.0).filter(|&z| z >= c1 - 1e-6).collect();
        let half_period = 850.0 / (4.0 * 3.64677) + 850.0 / (4.0 * 3.00153);
        for w in back.windows(2) {
            assert!((w[1] - w[0] - half_period).abs() < 1e-3, "spacing {}", w[1] - w[0]);
        }
    }

    #[test]
    fn placement_is_idempotent() {
        let st = gaas_cavity(2, 6);
        let (once, field) = loaded(&st, 0.01);
        let ex = crate::materials::builtin_exciton("GaAsQW").unwrap();
        let twice = place_qws_at_antinodes(&once, &field, 1, &ex, 0.01).unwrap();
        assert_eq!(once.sheets, twice.sheets);
    }

    #[test]
    fn mirror_side_selection() {
        let st = gaas_cavity(1, 6);
        let field = tmm::field_profile(&st, 850.0, 64).unwrap();
        let ex = crate::materials::builtin_exciton("GaAsQW").unwrap();
        let both = place_qws_on_side(&st, &field, 1, &ex, 0.0, MirrorSide::Both).unwrap();
        let front = place_qws_on_side(&st, &field, 1, &ex, 0.0, MirrorSide::Front).unwrap();
        let back = place_qws_on_side(&st, &field, 1, &ex, 0.0, MirrorSide::Back).unwrap();
        let none = place_qws_on_side(&st, &field, 1, &ex, 0.0, MirrorSide::None).unwrap();
        assert_eq!(front.sheets.len() + back.sheets.len(), both.sheets.len() + none.sheets.len());
        assert_eq!(none.sheets.len(), 2, "GaAs half-wave cavity: antinodes on both cavity faces");
    }

    #[test]
    fn mismatched_field_rejected() {
        let a = gaas_cavity(1, 4);
        let b = gaas_cavity(1, 5);
        let field = tmm::field_profile(&b, 850.0, 16).unwrap();
        let ex = crate::materials::builtin_exciton("GaAsQW").unwrap();
        assert!(matches!(
            place_qws_at_antinodes(&a, &field, 1, &ex, 0.01),
            Err(Error::FieldMismatch(_))
        ));
    }
}
