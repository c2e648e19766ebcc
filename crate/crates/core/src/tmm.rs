//! Normal-incidence transfer-matrix engine for lossless dielectric stacks.
//!
//! Each layer carries a forward and a backward plane wave. Amplitudes are
//! obtained by propagating from the exit medium (pure transmitted wave) back to
//! the entrance medium, using continuity of E and of H ∝ n(a − b) at every
//! interface, then normalizing to unit incident amplitude.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{bisect, golden_max, trapezoid};
use crate::stackgen::LayerStack;

#[derive(Debug, Clone)]
struct Solved {
    /// Forward/backward amplitudes at the left edge of each layer.
    coeffs: Vec<(Complex64, Complex64)>,
    r: Complex64,
    t: Complex64,
}

fn wavenumber(n: f64, lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * n / lambda_nm
}

fn solve(stack: &LayerStack, lambda_nm: f64) -> Result<Solved> {
    if stack.layers.is_empty() {
        return Err(Error::EmptyStack);
    }
    if !(lambda_nm > 0.0) {
        return Err(Error::InvalidParameter(format!("wavelength must be > 0, got {lambda_nm}")));
    }
    let mut a = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    let mut n_next = stack.ambient_back.n();
    let mut coeffs = vec![(a, b); stack.layers.len()];
    for (j, layer) in stack.layers.iter().enumerate().rev() {
        let n = layer.n();
        let e = a + b;
        let h = (a - b) * n_next;
        let a_r = (e + h / n) * 0.5;
        let b_r = (e - h / n) * 0.5;
        let phase = Complex64::from_polar(1.0, wavenumber(n, lambda_nm) * layer.thickness_nm);
        a = a_r / phase;
        b = b_r * phase;
        coeffs[j] = (a, b);
        n_next = n;
    }
    let n0 = stack.ambient_front.n();
    let e = a + b;
    let h = (a - b) * n_next;
    let a_in = (e + h / n0) * 0.5;
    let b_in = (e - h / n0) * 0.5;
    for c in &mut coeffs {
        c.0 /= a_in;
        c.1 /= a_in;
    }
    Ok(Solved { coeffs, r: b_in / a_in, t: Complex64::new(1.0, 0.0) / a_in })
}

/// (R, T) at one wavelength.
pub fn reflect_transmit(stack: &LayerStack, lambda_nm: f64) -> Result<(f64, f64)> {
    let s = solve(stack, lambda_nm)?;
    let ratio = stack.ambient_back.n() / stack.ambient_front.n();
    Ok((s.r.norm_sqr(), ratio * s.t.norm_sqr()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub lambda_nm: f64,
    pub reflectance: f64,
    pub transmittance: f64,
}

pub fn spectrum(stack: &LayerStack, lambda_min_nm: f64, lambda_max_nm: f64, points: usize) -> Result<Vec<SpectrumPoint>> {
    if stack.layers.is_empty() {
        return Err(Error::EmptyStack);
    }
    if points < 2 || !(lambda_min_nm > 0.0) || !(lambda_max_nm > lambda_min_nm) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < lambda_min < lambda_max and points >= 2 (got {lambda_min_nm}, {lambda_max_nm}, {points})"
        )));
    }
    let step = (lambda_max_nm - lambda_min_nm) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let lambda_nm = lambda_min_nm + step * i as f64;
            let (reflectance, transmittance) = reflect_transmit(stack, lambda_nm)?;
            Ok(SpectrumPoint { lambda_nm, reflectance, transmittance })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceResult {
    pub lambda_res_nm: f64,
    pub q: f64,
    pub linewidth_nm: f64,
    pub peak_transmission: f64,
}

const SCAN_POINTS: usize = 2001;

/// Transmission maximum inside `guess ± window`, refined by golden-section
/// search. Returns (λ, T).
pub fn locate_peak(stack: &LayerStack, lambda_guess_nm: f64, window_nm: f64) -> Result<(f64, f64)> {
    let lo = lambda_guess_nm - window_nm;
    let hi = lambda_guess_nm + window_nm;
    if !(window_nm > 0.0) || !(lo > 0.0) {
        return Err(Error::InvalidParameter(format!("bad resonance window {lambda_guess_nm} ± {window_nm}")));
    }
    let t_at = |l: f64| reflect_transmit(stack, l).map(|x| x.1).unwrap_or(f64::NAN);
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..SCAN_POINTS {
        let t = t_at(lo + step * i as f64);
        if t > best.1 {
            best = (i, t);
        }
    }
    if best.0 == 0 || best.0 == SCAN_POINTS - 1 {
        return Err(Error::NoPeak { lo_nm: lo, hi_nm: hi });
    }
    let centre = lo + step * best.0 as f64;
    let (lambda, t) = golden_max(t_at, centre - step, centre + step, 1e-7);
    Ok((lambda, t))
}

/// Transmission resonance near `lambda_guess_nm` with Q from the FWHM.
pub fn find_resonance(stack: &LayerStack, lambda_guess_nm: f64, window_nm: f64) -> Result<ResonanceResult> {
    let (lambda, t_peak) = locate_peak(stack, lambda_guess_nm, window_nm)?;
    let half = 0.5 * t_peak;
    let t_at = |l: f64| reflect_transmit(stack, l).map(|x| x.1).unwrap_or(f64::NAN);
    let tol = 1e-10 * lambda;
    let edge = |dir: f64| -> Result<f64> {
        let mut d = (window_nm / SCAN_POINTS as f64).max(1e-6 * lambda);
        while t_at(lambda + dir * d) > half {
            d *= 2.0;
            if d > 0.5 * lambda {
                return Err(Error::Numerical("transmission peak has no half-maximum".into()));
            }
        }
        let (a, b) = if dir < 0.0 { (lambda - d, lambda) } else { (lambda, lambda + d) };
        bisect(|l| t_at(l) - half, a, b, tol)
    };
    let left = edge(-1.0)?;
    let right = edge(1.0)?;
    let linewidth_nm = right - left;
    Ok(ResonanceResult { lambda_res_nm: lambda, q: lambda / linewidth_nm, linewidth_nm, peak_transmission: t_peak })
}

#[derive(Debug, Clone)]
struct ExactField {
    bounds: Vec<f64>,
    indices: Vec<f64>,
    solved: Solved,
    n_front: f64,
    n_back: f64,
}

impl ExactField {
    fn complex_at(&self, z: f64, lambda_nm: f64) -> Complex64 {
        let total = *self.bounds.last().unwrap_or(&0.0);
        if z < 0.0 {
            let k = wavenumber(self.n_front, lambda_nm);
            return Complex64::from_polar(1.0, k * z) + self.solved.r * Complex64::from_polar(1.0, -k * z);
        }
        if z > total {
            let k = wavenumber(self.n_back, lambda_nm);
            return self.solved.t * Complex64::from_polar(1.0, k * (z - total));
        }
        let j = match self.bounds.binary_search_by(|b| b.total_cmp(&z)) {
            Ok(i) => i.min(self.indices.len() - 1),
            Err(i) => i - 1,
        };
        let (a, b) = self.solved.coeffs[j];
        let k = wavenumber(self.indices[j], lambda_nm);
        let dz = z - self.bounds[j];
        a * Complex64::from_polar(1.0, k * dz) + b * Complex64::from_polar(1.0, -k * dz)
    }
}

/// Sampled standing-wave amplitude |E(z)|, normalized to a unit maximum on the
/// grid. Profiles computed by [`field_profile`] also keep the exact layer
/// amplitudes so the field can be evaluated between samples.
#[derive(Debug, Clone)]
pub struct FieldProfile {
    pub z_nm: Vec<f64>,
    pub amplitude: Vec<f64>,
    /// Refractive index at each sample.
    pub index: Vec<f64>,
    /// Layer the sample belongs to; `None` in the ambient margins.
    pub layer: Vec<Option<usize>>,
    /// Layer boundaries of the stack the profile was computed for.
    pub bounds_nm: Vec<f64>,
    pub lambda_nm: f64,
    scale: f64,
    exact: Option<ExactField>,
}

impl FieldProfile {
    /// Profile from pre-sampled data (no exact field behind it). Samples are
    /// assigned to layers by position; `bounds_nm` are the layer boundaries.
    pub fn from_samples(z_nm: Vec<f64>, amplitude: Vec<f64>, index: Vec<f64>, bounds_nm: Vec<f64>, lambda_nm: f64) -> Result<Self> {
        if z_nm.len() != amplitude.len() || z_nm.len() != index.len() || z_nm.len() < 2 {
            return Err(Error::InvalidParameter("profile arrays must have equal length >= 2".into()));
        }
        if z_nm.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("profile grid must be non-decreasing".into()));
        }
        let max = amplitude.iter().cloned().fold(0.0, f64::max);
        if !(max > 0.0) {
            return Err(Error::InvalidParameter("profile amplitude is identically zero".into()));
        }
        let layer = z_nm
            .iter()
            .map(|&z| {
                bounds_nm.windows(2).position(|b| z >= b[0] - 1e-12 && z <= b[1] + 1e-12)
            })
            .collect();
        Ok(Self {
            amplitude: amplitude.iter().map(|a| a / max).collect(),
            z_nm,
            index,
            layer,
            bounds_nm,
            lambda_nm,
            scale: 1.0 / max,
            exact: None,
        })
    }

    pub fn has_exact_field(&self) -> bool {
        self.exact.is_some()
    }

    /// |E(z)| in the profile's normalization; linear interpolation when no
    /// exact field is attached.
    pub fn eval(&self, z: f64) -> f64 {
        if let Some(ex) = &self.exact {
            return ex.complex_at(z, self.lambda_nm).norm() * self.scale;
        }
        let i = self.z_nm.partition_point(|&x| x < z);
        if i == 0 {
            return self.amplitude[0];
        }
        if i >= self.z_nm.len() {
            return *self.amplitude.last().unwrap();
        }
        let (z0, z1) = (self.z_nm[i - 1], self.z_nm[i]);
        if z1 == z0 {
            return self.amplitude[i];
        }
        let w = (z - z0) / (z1 - z0);
        self.amplitude[i - 1] * (1.0 - w) + self.amplitude[i] * w
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitude.iter().cloned().fold(0.0, f64::max)
    }

    pub(crate) fn check_matches(&self, stack: &LayerStack) -> Result<()> {
        let b = stack.boundaries_nm();
        if b.len() != self.bounds_nm.len() {
            return Err(Error::FieldMismatch(format!(
                "profile has {} layers, stack has {}",
                self.bounds_nm.len().saturating_sub(1),
                stack.layers.len()
            )));
        }
        if let Some((x, y)) = b.iter().zip(&self.bounds_nm).find(|(x, y)| (*x - *y).abs() > 1e-9 * x.abs().max(1.0)) {
            return Err(Error::FieldMismatch(format!("boundary at {x} nm vs {y} nm")));
        }
        Ok(())
    }

    /// Samples inside layer `j`.
    pub fn layer_samples(&self, j: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut z = Vec::new();
        let mut a = Vec::new();
        let mut n = Vec::new();
        for i in 0..self.z_nm.len() {
            if self.layer[i] == Some(j) {
                z.push(self.z_nm[i]);
                a.push(self.amplitude[i]);
                n.push(self.index[i]);
            }
        }
        (z, a, n)
    }
}

/// Default number of samples per layer.
pub const DEFAULT_SAMPLES_PER_LAYER: usize = 64;

pub fn field_profile(stack: &LayerStack, lambda_nm: f64, samples_per_layer: usize) -> Result<FieldProfile> {
    field_profile_with_margin(stack, lambda_nm, samples_per_layer, 0.0)
}

/// As [`field_profile`], also sampling `margin_nm` of each ambient medium.
pub fn field_profile_with_margin(
    stack: &LayerStack,
    lambda_nm: f64,
    samples_per_layer: usize,
    margin_nm: f64,
) -> Result<FieldProfile> {
    if samples_per_layer < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples per layer".into()));
    }
    let solved = solve(stack, lambda_nm)?;
    let bounds = stack.boundaries_nm();
    let exact = ExactField {
        bounds: bounds.clone(),
        indices: stack.layers.iter().map(|l| l.n()).collect(),
        solved,
        n_front: stack.ambient_front.n(),
        n_back: stack.ambient_back.n(),
    };
    let mut z_nm = Vec::new();
    let mut index = Vec::new();
    let mut layer = Vec::new();
    let m = samples_per_layer - 1;
    if margin_nm > 0.0 {
        for i in 0..m {
            z_nm.push(-margin_nm + margin_nm * i as f64 / m as f64);
            index.push(stack.ambient_front.n());
            layer.push(None);
        }
    }
    for (j, l) in stack.layers.iter().enumerate() {
        for i in 0..=m {
            z_nm.push(bounds[j] + l.thickness_nm * i as f64 / m as f64);
            index.push(l.n());
            layer.push(Some(j));
        }
    }
    let total = bounds[bounds.len() - 1];
    if margin_nm > 0.0 {
        for i in 1..=m {
            z_nm.push(total + margin_nm * i as f64 / m as f64);
            index.push(stack.ambient_back.n());
            layer.push(None);
        }
    }
    let raw: Vec<f64> = z_nm.iter().map(|&z| exact.complex_at(z, lambda_nm).norm()).collect();
    let max = raw.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::Numerical("field vanishes everywhere".into()));
    }
    Ok(FieldProfile {
        amplitude: raw.iter().map(|a| a / max).collect(),
        z_nm,
        index,
        layer,
        bounds_nm: bounds,
        lambda_nm,
        scale: 1.0 / max,
        exact: Some(exact),
    })
}

/// Mode lengths from the electric energy density n²|E|², normalized by its
/// maximum; split into the cavity-layer part and the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveLengths {
    pub total_nm: f64,
    pub internal_nm: f64,
    pub external_nm: f64,
    /// √(max n²|E|² / max |E|²): the index seen at the field maximum.
    pub peak_index: f64,
}

fn weighted_integrals(stack: &LayerStack, profile: &FieldProfile, weight: impl Fn(f64) -> f64) -> Result<(f64, f64, f64)> {
    profile.check_matches(stack)?;
    let mut total = 0.0;
    let mut internal = 0.0;
    let mut peak: f64 = 0.0;
    for j in 0..stack.layers.len() {
        let (z, a, n) = profile.layer_samples(j);
        let y: Vec<f64> = a.iter().zip(&n).map(|(a, n)| weight(*n) * a * a).collect();
        peak = y.iter().cloned().fold(peak, f64::max);
        let v = trapezoid(&z, &y);
        total += v;
        if stack.cavity == Some(j) {
            internal = v;
        }
    }
    Ok((total, internal, peak))
}

/// Energy-density effective lengths of the mode over the stack.
pub fn effective_lengths(stack: &LayerStack, profile: &FieldProfile) -> Result<EffectiveLengths> {
    let (total, internal, peak) = weighted_integrals(stack, profile, |n| n * n)?;
    let (_, _, peak_e2) = weighted_integrals(stack, profile, |_| 1.0)?;
    Ok(EffectiveLengths {
        total_nm: total / peak,
        internal_nm: internal / peak,
        external_nm: (total - internal) / peak,
        peak_index: (peak / peak_e2).sqrt(),
    })
}

/// L_eff = ∫ n²|E|² dz / max(n²|E|²) over the stack (trapezoidal rule on the
/// profile grid). Only meaningful for a profile at resonance; nothing checks
/// that here.
pub fn mode_effective_length(stack: &LayerStack, profile: &FieldProfile) -> Result<f64> {
    Ok(effective_lengths(stack, profile)?.total_nm)
}

/// ∫ |E|² dz / max |E|² over the stack.
pub fn intensity_effective_length(stack: &LayerStack, profile: &FieldProfile) -> Result<f64> {
    let (total, _, peak) = weighted_integrals(stack, profile, |_| 1.0)?;
    Ok(total / peak)
}

/// Least-squares decay rate of ln|E|² over the antinodes behind the cavity
/// (nm⁻¹), i.e. the intensity attenuation exponent of the back mirror.
pub fn back_mirror_intensity_decay(stack: &LayerStack, profile: &FieldProfile) -> Result<f64> {
    let (_, c1) = stack
        .cavity_span_nm()
        .ok_or_else(|| Error::InvalidParameter("stack has no cavity layer".into()))?;
    let peaks: Vec<(f64, f64)> = crate::stackgen::field_antinodes(stack, profile)?
        .into_iter()
        .filter(|p| p.0 > c1 + 1e-6)
        .collect();
    if peaks.len() < 3 {
        return Err(Error::Numerical("too few mirror antinodes to fit".into()));
    }
    let n = peaks.len() as f64;
    let xs: Vec<f64> = peaks.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = peaks.iter().map(|p| (p.1 * p.1).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(-sxy / sxx)
}
