//! `laser`: pump-strength sweep of a saturable-gain array. Writes the
//! sweep CSV/figure, a per-pump summary, and — at explicitly named pump
//! values — emission spectra, spatial profiles, and binary field traces.
//! A blow-up at one pump value is recorded for that value without
//! aborting the rest of the sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nh_aah::export::{emission_spectrum_csv, encode_trace, laser_sweep_csv};
use nh_aah::laser::{
    classify_lasing, integrate, output_intensity, total_emission_spectrum, GainModel, LasingReport,
    LossModulatedConfig, PumpModulatedConfig, SimConfig,
};
use nh_aah::model::{DomainSpec, LatticeSpec};
use nh_aah::svg::{line_svg, profile_svg};

use super::bad_param;
use crate::config::parse_parameters;
use crate::context::RunContext;

/// Gain-model input: a pump-modulated config, an explicit loss-modulated
/// config, or a lattice from which the loss model is derived (profile,
/// hopping, walls, and the wall-mode offset are computed).
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ModelParams {
    Pump(PumpModulatedConfig),
    Loss(LossModulatedConfig),
    LossLattice { domains: Vec<DomainSpec> },
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOverrides {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_stride: Option<usize>,
    pub init_scale: Option<f64>,
    pub average_window: Option<(f64, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserParams {
    pub model: ModelParams,
    /// Pump strengths of the sweep; run `i` seeds its noise with
    /// `seed + i`.
    pub gammas: Vec<f64>,
    /// Pump values (in addition to nothing by default) at which emission
    /// spectra, spatial profiles, and field traces are exported; these
    /// runs use the base seed.
    #[serde(default)]
    pub spectra_at: Vec<f64>,
    #[serde(default)]
    pub sim: SimOverrides,
}

/// Fully resolved laser run, embedded in every artifact: derived loss
/// models appear with their computed profile/offset/walls.
#[derive(Serialize)]
struct ResolvedLaser<'a> {
    model: &'a GainModel,
    sim: &'a SimConfig,
    gammas: &'a [f64],
    spectra_at: &'a [f64],
}

pub fn execute(raw: &serde_json::Value, ctx: &RunContext) -> anyhow::Result<String> {
    let p: LaserParams = parse_parameters(ctx.kind, raw)?;
    if p.gammas.is_empty() {
        return Err(bad_param("gammas must list at least one pump strength"));
    }
    if p.gammas.iter().chain(&p.spectra_at).any(|g| !g.is_finite() || *g < 0.0) {
        return Err(bad_param("pump strengths must be finite and non-negative"));
    }

    let model = match p.model {
        ModelParams::Pump(ref c) => GainModel::Pump(c.clone()),
        ModelParams::Loss(ref c) => GainModel::Loss(c.clone()),
        ModelParams::LossLattice { ref domains } => {
            let lattice = LatticeSpec::new(domains.clone()).map_err(bad_param)?;
            GainModel::Loss(LossModulatedConfig::from_lattice(&lattice, 0.0)?)
        }
    };
    model.validate().map_err(bad_param)?;

    let mut sim = SimConfig::with_seed(ctx.seed.unwrap_or(0));
    if let Some(dt) = p.sim.dt {
        sim.dt = dt;
    }
    if let Some(t_end) = p.sim.t_end {
        sim.t_end = t_end;
    }
    if let Some(stride) = p.sim.sample_stride {
        sim.sample_stride = stride;
    }
    if let Some(f0) = p.sim.init_scale {
        sim.init_scale = f0;
    }
    if let Some(win) = p.sim.average_window {
        sim.average_window = win;
    }
    sim.validate().map_err(bad_param)?;

    let resolved = ctx.resolved_config(&ResolvedLaser {
        model: &model,
        sim: &sim,
        gammas: &p.gammas,
        spectra_at: &p.spectra_at,
    })?;
    let meta = ctx.meta(&resolved);

    // Sweep: independent runs, blow-ups tolerated per pump value.
    let results: Vec<(f64, nh_aah::Result<LasingReport>)> = p
        .gammas
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let sim_i = SimConfig {
                seed: sim.seed.wrapping_add(i as u64),
                ..sim
            };
            (g, nh_aah::laser::lasing_report(&model.with_gamma_pump(g), &sim_i))
        })
        .collect();

    let ok_reports: Vec<LasingReport> = results
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().cloned())
        .collect();
    let mut sweep_csv = laser_sweep_csv(&meta, &ok_reports);
    for (g, r) in &results {
        if let Err(e) = r {
            sweep_csv.push_str(&format!("{g},nan,error: {}\n", e.to_string().replace(',', ";")));
        }
    }
    ctx.write_text("sweep.csv", &sweep_csv)?;
    let curve: Vec<(f64, f64)> = ok_reports.iter().map(|r| (r.gamma_pump, r.i_out)).collect();
    ctx.write_text(
        "sweep.svg",
        &line_svg("pump sweep", &curve, "gamma_pump", "output intensity"),
    )?;

    // Named pump values: full artifacts from a base-seed run each.
    let mut named_status = Vec::new();
    for &g in &p.spectra_at {
        named_status.push(export_named_run(ctx, &meta, &model, &sim, g)?);
    }

    let summary = serde_json::json!({
        "sweep": results.iter().map(|(g, r)| match r {
            Ok(rep) => serde_json::json!({
                "gamma": g,
                "status": "ok",
                "i_out": rep.i_out,
                "mode_class": rep.mode_class.to_string(),
                "probe_site": rep.probe_site,
                "peak_omega": rep.peak_omega,
            }),
            Err(e) => serde_json::json!({
                "gamma": g,
                "status": "error",
                "error": e.to_string(),
            }),
        }).collect::<Vec<_>>(),
        "named_runs": named_status,
        "config": serde_json::from_str::<serde_json::Value>(&resolved)?,
        "version": ctx.version,
    });
    ctx.write_text("summary.json", &format!("{:#}\n", summary))?;
    Ok(resolved)
}

/// Integrates at one named pump value and writes spectrum CSV, intensity
/// profile figure, and the binary field trace. Failures are reported in
/// the returned status instead of aborting the command.
fn export_named_run(
    ctx: &RunContext,
    meta: &nh_aah::export::ArtifactMeta,
    model: &GainModel,
    sim: &SimConfig,
    gamma: f64,
) -> anyhow::Result<serde_json::Value> {
    let model_g = model.with_gamma_pump(gamma);
    let trace = match integrate(&model_g, sim) {
        Ok(t) => t,
        Err(e) => {
            return Ok(serde_json::json!({
                "gamma": gamma,
                "status": "error",
                "error": e.to_string(),
            }))
        }
    };
    let i_out = output_intensity(&trace)?;
    let profile = trace.final_intensity_profile();
    let probe = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let spectrum = total_emission_spectrum(&trace)?;
    let class = classify_lasing(i_out, &spectrum);

    ctx.write_text(
        &format!("spectrum_gamma_{gamma:.4}.csv"),
        &emission_spectrum_csv(meta, &spectrum),
    )?;
    ctx.write_text(
        &format!("profile_gamma_{gamma:.4}.svg"),
        &profile_svg(
            &format!("steady intensity, gamma_pump = {gamma:.4}"),
            &[("intensity", profile.as_slice())],
            false,
        ),
    )?;
    ctx.write_bytes(&format!("trace_gamma_{gamma:.4}.bin"), &encode_trace(&trace))?;
    Ok(serde_json::json!({
        "gamma": gamma,
        "status": "ok",
        "i_out": i_out,
        "mode_class": class.to_string(),
        "probe_site": probe,
    }))
}
