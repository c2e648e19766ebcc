use rayon::prelude::*;
use serde::Serialize;

use vscav::coupling::{analytic_g, effective_index_from_g, numeric_dbr_coupling, NumericOptions};
use vscav::materials::{ExcitonParams, OpticalMaterial};
use vscav::phasediagram::{build_phase_diagram, StructureSpec};
use vscav::polariton::{hopfield_map, lp_dispersion, solve_variational, upper_polariton, DetuningSpec};
use vscav::stability::{dissociation_temperature, lp_depth_to_halfwidth_ratio};
use vscav::stackgen::{field_antinodes, CavityKind, DbrDesign};
use vscav::{tmm, Error};

use crate::config::{self, *};
use crate::output::{num, OutDir, RunMeta};
use crate::svg::{line_plot, Series};
use crate::{CliError, Command, Common};

pub fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Spectrum(c) => with_config(c, "spectrum", spectrum),
        Command::Field(c) => with_config(c, "field", field),
        Command::CouplingSweep(c) => with_config(c, "coupling-sweep", coupling_sweep),
        Command::Polariton(c) => with_config(c, "polariton", polariton),
        Command::Dissociation(c) => with_config(c, "dissociation", dissociation),
        Command::PhaseDiagram(c) => with_config(c, "phase-diagram", phase_diagram),
    }
}

fn with_config<T, F>(common: &Common, name: &str, f: F) -> Result<(), CliError>
where
    T: serde::de::DeserializeOwned,
    F: FnOnce(&T, &OutDir, bool, &str) -> Result<(), CliError>,
{
    let loaded: config::Loaded<T> = config::load(&common.config, &common.overrides)?;
    if common.dry_run {
        print!("{}", loaded.canonical);
        return Ok(());
    }
    let out = OutDir::create(&common.out)?;
    let sha = loaded.sha256();
    f(&loaded.config, &out, common.svg, &sha)?;
    out.json("run.json", &RunMeta { command: name, version: env!("CARGO_PKG_VERSION"), config_sha256: sha })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{name}` must be a positive number, got {v}")))
    }
}

fn spectrum(cfg: &SpectrumConfig, out: &OutDir, svg: bool, _: &str) -> Result<(), CliError> {
    positive("lambda0_nm", cfg.lambda0_nm)?;
    let stack = cfg.structure.build(cfg.lambda0_nm, &cfg.materials, cfg.field_ratio)?;
    let pts = tmm::spectrum(&stack, cfg.lambda_min_nm, cfg.lambda_max_nm, cfg.points)?;
    let rows: Vec<_> =
        pts.iter().map(|p| vec![num(p.lambda_nm), num(p.reflectance), num(p.transmittance)]).collect();
    out.csv("spectrum.csv", &["lambda_nm", "R", "T"], &rows)?;
    let res = tmm::find_resonance(&stack, cfg.lambda0_nm, cfg.resonance_window_nm)?;
    out.csv(
        "resonance.csv",
        &["lambda_res_nm", "Q", "linewidth_nm", "peak_T"],
        &[vec![num(res.lambda_res_nm), num(res.q), num(res.linewidth_nm), num(res.peak_transmission)]],
    )?;
    if svg {
        let r = pts.iter().map(|p| (p.lambda_nm, p.reflectance)).collect();
        let t = pts.iter().map(|p| (p.lambda_nm, p.transmittance)).collect();
        out.text(
            "spectrum.svg",
            &line_plot(
                "Spectrum",
                "wavelength (nm)",
                "R, T",
                &[Series { label: "R", points: r }, Series { label: "T", points: t }],
                false,
            ),
        )?;
    }
    Ok(())
}

fn field(cfg: &FieldConfig, out: &OutDir, svg: bool, _: &str) -> Result<(), CliError> {
    positive("lambda0_nm", cfg.lambda0_nm)?;
    if cfg.margin_nm < 0.0 {
        return Err(CliError::Config("`margin_nm` must be >= 0".into()));
    }
    let stack = cfg.structure.build(cfg.lambda0_nm, &cfg.materials, cfg.field_ratio)?;
    let lambda = if cfg.at_resonance {
        tmm::locate_peak(&stack, cfg.lambda0_nm, cfg.resonance_window_nm)?.0
    } else {
        cfg.lambda0_nm
    };
    let prof = tmm::field_profile_with_margin(&stack, lambda, cfg.samples_per_layer, cfg.margin_nm)?;
    let peak = prof.max_amplitude();
    let rows: Vec<_> = prof
        .z_nm
        .iter()
        .zip(&prof.amplitude)
        .zip(&prof.index)
        .map(|((&z, &a), &n)| vec![num(z), num(a / peak), num(n)])
        .collect();
    out.csv("field.csv", &["z_nm", "E_abs_norm", "n"], &rows)?;
    let antinodes = field_antinodes(&stack, &prof)?;
    let top = antinodes.iter().map(|a| a.1).fold(0.0, f64::max);
    let rows: Vec<_> = antinodes
        .iter()
        .filter(|a| a.1 >= cfg.antinode_threshold * top)
        .map(|&(z, a)| vec![num(z), num(a / peak)])
        .collect();
    out.csv("antinodes.csv", &["z_nm", "E_abs_norm"], &rows)?;
    out.csv("wavelength.csv", &["lambda_nm"], &[vec![num(lambda)]])?;
    if svg {
        let e = prof.z_nm.iter().zip(&prof.amplitude).map(|(&z, &a)| (z, a / peak)).collect();
        let n = prof.z_nm.iter().zip(&prof.index).map(|(&z, &n)| (z, n / 4.0)).collect();
        out.text(
            "field.svg",
            &line_plot(
                "Field amplitude",
                "z (nm)",
                "|E| / max",
                &[Series { label: "|E|", points: e }, Series { label: "n / 4", points: n }],
                false,
            ),
        )?;
    }
    Ok(())
}

fn family_design(kind: FamilyKind, x: f64, s: u32, lambda0: f64) -> Result<DbrDesign, CliError> {
    let mixed = OpticalMaterial::algaas(x)?;
    Ok(match kind {
        FamilyKind::HighIndex => {
            DbrDesign::new(OpticalMaterial::gaas(), OpticalMaterial::gaas(), mixed, s, lambda0)
        }
        FamilyKind::LowIndex => {
            DbrDesign::new(OpticalMaterial::alas(), mixed, OpticalMaterial::alas(), s, lambda0)
        }
    })
}

fn coupling_sweep(cfg: &CouplingSweepConfig, out: &OutDir, svg: bool, _: &str) -> Result<(), CliError> {
    positive("lambda0_nm", cfg.lambda0_nm)?;
    let ex = cfg.exciton.resolve()?;
    let opts = NumericOptions {
        field_ratio: cfg.field_ratio,
        pairs: None,
        antinode_threshold: cfg.antinode_threshold,
        samples_per_layer: cfg.samples_per_layer,
        side: cfg.mirror_side,
        window_nm: cfg.resonance_window_nm,
        wells_per_antinode: cfg.wells_per_antinode,
    };
    let cases: Vec<(f64, u32)> =
        cfg.x_values.iter().flat_map(|&x| cfg.s_values.iter().map(move |&s| (x, s))).collect();
    let results: Vec<Result<Vec<f64>, CliError>> = cases
        .par_iter()
        .map(|&(x, s)| {
            let design = family_design(cfg.cavity_kind, x, s, cfg.lambda0_nm)?;
            let kind = match cfg.cavity_kind {
                FamilyKind::HighIndex => CavityKind::HighIndex,
                FamilyKind::LowIndex => CavityKind::LowIndex,
            };
            let num_c = numeric_dbr_coupling(&design, &ex, &opts)?;
            let ana = analytic_g(
                design.mirror_hi.n(),
                design.mirror_lo.n(),
                kind,
                s,
                cfg.wells_per_antinode,
                ex.f_2d_per_m2,
                cfg.lambda0_nm,
            )?;
            let c = &num_c.coupling;
            Ok(vec![num_c.pairs as f64, c.l_int_nm, c.l_ext_nm, c.l_eff_nm, c.g_total, ana.g_total, c.n_eff])
        })
        .collect();
    let mut rows = Vec::with_capacity(cases.len());
    let mut values = Vec::with_capacity(cases.len());
    for (&(x, s), r) in cases.iter().zip(results) {
        let v = r?;
        let mut row = vec![num(x), s.to_string()];
        row.extend(v[1..].iter().map(|&f| num(f)));
        row.push((v[0] as u32).to_string());
        rows.push(row);
        values.push((x, s, v));
    }
    out.csv(
        "coupling_sweep.csv",
        &["x", "s", "L_int_nm", "L_ext_nm", "L_eff_nm", "g_numeric_meV", "g_analytic_meV", "n_eff", "pairs"],
        &rows,
    )?;
    if svg {
        let labels: Vec<String> = cfg.x_values.iter().map(|x| format!("x={x}")).collect();
        let mut series = Vec::new();
        for (i, &x) in cfg.x_values.iter().enumerate() {
            let pts = values.iter().filter(|v| v.0 == x).map(|v| (v.1 as f64, v.2[4])).collect();
            series.push(Series { label: &labels[i], points: pts });
        }
        out.text("coupling_sweep.svg", &line_plot("Coupling", "cavity order s", "g (meV)", &series, false))?;
    }
    Ok(())
}

fn polariton(cfg: &PolaritonConfig, out: &OutDir, svg: bool, _: &str) -> Result<(), CliError> {
    let ex = cfg.exciton.resolve()?;
    let map = hopfield_map(
        (cfg.gamma_min, cfg.gamma_max),
        (cfg.delta_min_mev, cfg.delta_max_mev),
        (cfg.gamma_points, cfg.delta_points),
        &ex,
    )?;
    let rows: Vec<_> =
        map.iter().map(|p| vec![num(p.gamma), num(p.delta_mev), num(p.alpha_sq), num(p.lambda)]).collect();
    out.csv("hopfield_map.csv", &["gamma", "Delta_meV", "alpha_sq", "lambda"], &rows)?;

    let eb = ex.binding_energy_mev;
    let det = DetuningSpec::new(0.0, &ex, 1.0)?;
    let mut rows = Vec::new();
    let mut curves: [Vec<(f64, f64)>; 4] = Default::default();
    for gamma in linspace(cfg.branch_gamma_min, cfg.branch_gamma_max, cfg.branch_points) {
        let lp = solve_variational(gamma, &det, 0.0, &ex)?;
        let up = upper_polariton(gamma, &det, 0.0, &ex)?;
        let g = gamma * eb;
        let vals = [lp.energy_mev(&ex), up.energy_mev(&ex), -eb - g, -eb + g];
        for (c, &v) in curves.iter_mut().zip(&vals) {
            c.push((g, v));
        }
        let mut row = vec![num(g), num(gamma)];
        row.extend(vals.iter().map(|&v| num(v)));
        row.push(num(lp.alpha_sq));
        row.push(num(up.alpha_sq));
        row.push(up.bound.to_string());
        rows.push(row);
    }
    out.csv(
        "branches.csv",
        &[
            "g_meV",
            "gamma",
            "E_LP_meV",
            "E_UP_meV",
            "E_LP_standard_meV",
            "E_UP_standard_meV",
            "alpha_sq_LP",
            "alpha_sq_UP",
            "UP_bound",
        ],
        &rows,
    )?;
    if let Some(d) = &cfg.dispersion {
        positive("dispersion.n_eff", d.n_eff)?;
        let det = DetuningSpec::new(d.delta_mev, &ex, d.n_eff)?;
        let grid = linspace(0.0, d.k_max_per_nm, d.points);
        let disp = lp_dispersion(d.gamma, &det, &ex, &grid)?;
        let rows: Vec<_> = disp.iter().map(|&(k, e)| vec![num(k), num(e)]).collect();
        out.csv("dispersion.csv", &["K_R_per_nm", "E_LP_meV"], &rows)?;
        if svg {
            out.text(
                "dispersion.svg",
                &line_plot("LP dispersion", "K_R (1/nm)", "E (meV)", &[Series { label: "LP", points: disp }], false),
            )?;
        }
    }
    if svg {
        let [a, b, c, d] = curves;
        let series = [
            Series { label: "LP", points: a },
            Series { label: "UP", points: b },
            Series { label: "-E_B - g", points: c },
            Series { label: "-E_B + g", points: d },
        ];
        out.text("branches.svg", &line_plot("Branches at zero detuning", "g (meV)", "E (meV)", &series, false))?;
        let alpha: Vec<(f64, f64)> = map.iter().filter(|p| p.delta_mev == cfg.delta_min_mev).map(|p| (p.gamma, p.alpha_sq)).collect();
        out.text(
            "hopfield.svg",
            &line_plot("Exciton fraction", "gamma", "alpha^2", &[Series { label: "lowest detuning", points: alpha }], false),
        )?;
    }
    Ok(())
}

/// Outcome of a T_d search, keeping bracket failures as data.
fn td_status(r: vscav::Result<f64>) -> Result<(f64, &'static str), CliError> {
    match r {
        Ok(t) => Ok((t, "ok")),
        Err(Error::NoCrossing { .. }) => Ok((f64::INFINITY, "no_crossing")),
        Err(Error::BelowBracket { .. }) => Ok((0.0, "below_bracket")),
        Err(e) => Err(e.into()),
    }
}

fn dissociation(cfg: &DissociationConfig, out: &OutDir, svg: bool, _: &str) -> Result<(), CliError> {
    let ex = cfg.exciton.resolve()?;
    cfg.broadening.validate()?;
    let det = DetuningSpec::new(cfg.delta_mev, &ex, 1.0)?;
    let gs = linspace(cfg.g_min_mev, cfg.g_max_mev, cfg.g_points);
    let results: Vec<Result<(f64, f64, &str), CliError>> = gs
        .par_iter()
        .map(|&g| {
            positive("g", g)?;
            let gamma = g / ex.binding_energy_mev;
            let (td, status) =
                td_status(dissociation_temperature(gamma, &det, &ex, &cfg.broadening, cfg.threshold))?;
            let t_ratio = cfg.ratio_temperature_k.unwrap_or(td);
            let ratio = if t_ratio > 0.0 && t_ratio.is_finite() {
                lp_depth_to_halfwidth_ratio(gamma, &det, &ex, &cfg.broadening, t_ratio)?
            } else {
                f64::NAN
            };
            Ok((td, ratio, status))
        })
        .collect();
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    for (&g, r) in gs.iter().zip(results) {
        let (td, ratio, status) = r?;
        rows.push(vec![num(g), num(td), num(ratio), status.to_string()]);
        curve.push((g, td));
    }
    out.csv("dissociation.csv", &["g_meV", "T_d_K", "depth_to_halfwidth_ratio", "status"], &rows)?;
    if svg {
        out.text(
            "dissociation.svg",
            &line_plot("Dissociation temperature", "g (meV)", "T_d (K)", &[Series { label: "T_d", points: curve }], false),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct StructureSummary<'a> {
    name: &'a str,
    #[serde(rename = "g_meV")]
    g_mev: f64,
    gamma: f64,
    delta_mev: f64,
    n_eff: f64,
    wells_per_antinode: u32,
    total_qw_count: u32,
    dbr_pairs: Option<u32>,
    exciton: &'a ExcitonParams,
    #[serde(rename = "T_d_K")]
    t_d_k: f64,
    /// Per well.
    #[serde(rename = "n_s_cm2")]
    n_s_per_qw_cm2: f64,
    n_s_total_cm2: f64,
    alpha_sq: f64,
    lambda: f64,
}

#[derive(Serialize)]
struct PhaseSummary<'a> {
    config_sha256: &'a str,
    structures: Vec<StructureSummary<'a>>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

struct ResolvedStructure {
    spec: StructureSpec,
    n_eff: f64,
    pairs: Option<u32>,
}

fn resolve_structure(e: &StructureEntry, cfg: &PhaseDiagramConfig) -> Result<ResolvedStructure, CliError> {
    if !valid_name(&e.name) {
        return Err(CliError::Config(format!("structure name `{}` must be [A-Za-z0-9_-]+", e.name)));
    }
    let ex = e.exciton.resolve()?;
    let (g, total, pairs, coupled_n_eff) = match (&e.g_mev, &e.dbr) {
        (Some(g), None) => (*g, e.total_qw_count.unwrap_or(e.wells_per_antinode), None, None),
        (None, Some(d)) => {
            let design = DbrDesign::new(
                config::material(&d.cavity, &cfg.materials)?,
                config::material(&d.mirror_hi, &cfg.materials)?,
                config::material(&d.mirror_lo, &cfg.materials)?,
                d.order,
                cfg.lambda0_nm,
            );
            let opts = NumericOptions {
                field_ratio: d.field_ratio,
                antinode_threshold: d.antinode_threshold,
                wells_per_antinode: e.wells_per_antinode,
                ..NumericOptions::default()
            };
            let c = numeric_dbr_coupling(&design, &ex, &opts)?;
            let total = e.total_qw_count.unwrap_or_else(|| c.stack.well_count());
            (c.coupling.g_total, total, Some(c.pairs), Some(c.coupling.n_eff))
        }
        _ => {
            return Err(CliError::Config(format!(
                "structure `{}` needs exactly one of `g_mev` or `dbr`",
                e.name
            )))
        }
    };
    positive("g_mev", g)?;
    let n_eff = match (e.n_eff, coupled_n_eff) {
        (Some(n), _) => n,
        (None, Some(n)) => n,
        (None, None) => effective_index_from_g(g, e.wells_per_antinode, ex.f_2d_per_m2, cfg.lambda0_nm)?,
    };
    let det = DetuningSpec::new(e.delta_mev, &ex, n_eff)?;
    let spec = StructureSpec {
        broadening: e.broadening,
        n_per_antinode: e.wells_per_antinode,
        total_qw_count: total,
        spot_radius_um: cfg.spot_radius_um,
        sigma_spin: cfg.sigma_spin,
        threshold: cfg.threshold,
        ..StructureSpec::new(e.name.clone(), g, det, ex)
    };
    Ok(ResolvedStructure { spec, n_eff, pairs })
}

fn phase_diagram(cfg: &PhaseDiagramConfig, out: &OutDir, svg: bool, sha: &str) -> Result<(), CliError> {
    positive("lambda0_nm", cfg.lambda0_nm)?;
    positive("t_min_k", cfg.t_min_k)?;
    if cfg.t_max_k < cfg.t_min_k || cfg.t_points == 0 {
        return Err(CliError::Config("temperature grid needs t_max_k >= t_min_k and t_points >= 1".into()));
    }
    let mut names: Vec<&str> = cfg.structure.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Config("structure names must be unique".into()));
    }
    let grid = if cfg.t_log_spacing {
        logspace(cfg.t_min_k, cfg.t_max_k, cfg.t_points)
    } else {
        linspace(cfg.t_min_k, cfg.t_max_k, cfg.t_points)
    };
    let resolved: Vec<ResolvedStructure> =
        cfg.structure.par_iter().map(|e| resolve_structure(e, cfg)).collect::<Result<_, _>>()?;
    let diagrams: Vec<_> = resolved
        .par_iter()
        .map(|r| build_phase_diagram(&r.spec, &grid))
        .collect::<Result<_, _>>()?;

    let mut summary_rows = Vec::new();
    let mut summaries = Vec::new();
    let mut series = Vec::new();
    for ((e, r), d) in cfg.structure.iter().zip(&resolved).zip(&diagrams) {
        let rows: Vec<_> = d.t_grid_k.iter().zip(&d.n_crit_cm2).map(|(&t, &n)| vec![num(t), num(n)]).collect();
        out.csv(&format!("{}.csv", e.name), &["T_K", "n_crit_cm2"], &rows)?;
        let s = StructureSummary {
            name: &e.name,
            g_mev: r.spec.g_mev,
            gamma: r.spec.gamma(),
            delta_mev: e.delta_mev,
            n_eff: r.n_eff,
            wells_per_antinode: r.spec.n_per_antinode,
            total_qw_count: r.spec.total_qw_count,
            dbr_pairs: r.pairs,
            exciton: &r.spec.exciton,
            t_d_k: d.t_d_k,
            n_s_per_qw_cm2: d.n_s_per_qw_cm2,
            n_s_total_cm2: d.n_s_total_cm2,
            alpha_sq: d.lp.alpha_sq,
            lambda: d.lp.lambda,
        };
        out.json(&format!("{}.json", e.name), &s)?;
        summary_rows.push(vec![
            e.name.clone(),
            num(s.g_mev),
            num(s.gamma),
            num(s.n_eff),
            s.total_qw_count.to_string(),
            num(s.t_d_k),
            num(s.n_s_per_qw_cm2),
            num(s.n_s_total_cm2),
            num(s.alpha_sq),
            num(s.lambda),
        ]);
        series.push((e.name.as_str(), d));
        summaries.push(s);
    }
    out.csv(
        "summary.csv",
        &[
            "name",
            "g_meV",
            "gamma",
            "n_eff",
            "total_qw_count",
            "T_d_K",
            "n_s_cm2",
            "n_s_total_cm2",
            "alpha_sq",
            "lambda",
        ],
        &summary_rows,
    )?;
    out.json("summary.json", &PhaseSummary { config_sha256: sha, structures: summaries })?;
    if svg {
        let plots: Vec<Series> = series
            .iter()
            .map(|(name, d)| Series {
                label: name,
                points: d.t_grid_k.iter().copied().zip(d.n_crit_cm2.iter().copied()).collect(),
            })
            .collect();
        out.text("phase_diagram.svg", &line_plot("Critical density", "T (K)", "n_c (cm^-2)", &plots, true))?;
    }
    Ok(())
}
