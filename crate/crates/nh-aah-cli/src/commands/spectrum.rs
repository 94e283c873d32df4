//! `spectrum`: open-chain eigenvalues versus modulation phase, with
//! zero-mode flags and optional wavefunction exports at chosen phases.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nh_aah::export::{spectrum_csv, wavefunction_csv, SpectrumRow};
use nh_aah::model::{LatticeSpec, ModulationSpec, Rational, SiteIndexing};
use nh_aah::spectral::{
    default_k_samples, delta_sweep, eigendecompose, find_zero_modes, real_line_gap,
    ZeroModeCriteria, DEFAULT_EPS_GAP, DEFAULT_EPS_RE,
};
use nh_aah::svg::{profile_svg, spectrum_sweep_svg};

use super::bad_param;
use crate::config::parse_parameters;
use crate::context::RunContext;

fn default_lattice_size() -> usize {
    200
}

fn default_delta_points() -> usize {
    200
}

fn default_wavefunction_deltas() -> Vec<f64> {
    vec![0.4 * PI, 1.8 * PI]
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(rename = "V")]
    pub v: f64,
    pub q: u32,
    pub p: u32,
    #[serde(default = "default_lattice_size")]
    pub lattice_size: usize,
    /// Number of evenly spaced phases over `[0, 2 pi)`.
    #[serde(default = "default_delta_points")]
    pub delta_points: usize,
    /// Phases whose zero-mode wavefunctions are exported (one CSV per
    /// detected mode; none written where no modes exist).
    #[serde(default = "default_wavefunction_deltas")]
    pub wavefunction_deltas: Vec<f64>,
}

pub fn execute(raw: &serde_json::Value, ctx: &RunContext) -> anyhow::Result<String> {
    let p: SpectrumParams = parse_parameters(ctx.kind, raw)?;
    let alpha = Rational::new(p.q, p.p).map_err(bad_param)?;
    let m = ModulationSpec::new(p.v, alpha, 0.0).map_err(bad_param)?;
    if p.delta_points < 2 {
        return Err(bad_param("delta_points must be >= 2"));
    }
    let resolved = ctx.resolved_config(&p)?;
    let meta = ctx.meta(&resolved);

    let deltas: Vec<f64> = (0..p.delta_points)
        .map(|i| TAU * i as f64 / p.delta_points as f64)
        .collect();
    let sweep = delta_sweep(&m, p.lattice_size, &deltas)?;
    let mut rows = Vec::with_capacity(sweep.len() * p.lattice_size);
    for pt in &sweep {
        for (index, (e, &flag)) in pt.eigenvalues.iter().zip(&pt.zero_flags).enumerate() {
            rows.push(SpectrumRow {
                delta: pt.delta,
                index,
                re_e: e.re,
                im_e: e.im,
                is_zero_mode: flag,
            });
        }
    }
    ctx.write_text("spectrum.csv", &spectrum_csv(&meta, &rows))?;
    let title = format!("open-chain spectrum, alpha = {}/{}, V = {}", p.q, p.p, p.v);
    ctx.write_text("spectrum.svg", &spectrum_sweep_svg(&title, &rows))?;

    for &delta in &p.wavefunction_deltas {
        write_wavefunctions(ctx, &meta, &m, p.lattice_size, delta)?;
    }
    Ok(resolved)
}

/// Diagonalizes the chain at one phase and writes each detected zero
/// mode's wavefunction (plus one combined semi-log profile figure).
fn write_wavefunctions(
    ctx: &RunContext,
    meta: &nh_aah::export::ArtifactMeta,
    m: &ModulationSpec,
    n_sites: usize,
    delta: f64,
) -> anyhow::Result<()> {
    let md = m.with_delta(delta).map_err(bad_param)?;
    let gap = real_line_gap(&md, default_k_samples(&md), DEFAULT_EPS_GAP)?;
    let lattice = LatticeSpec::uniform(md, n_sites)?;
    let es = eigendecompose(&lattice.open_hamiltonian(SiteIndexing::DomainLocal).view())?;
    let criteria = if gap.gapped {
        ZeroModeCriteria::default()
    } else {
        ZeroModeCriteria::gapless(DEFAULT_EPS_RE)
    };
    let reports = find_zero_modes(&es, &lattice, &criteria)?;

    let mut series: Vec<(String, Vec<f64>)> = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        let psi: Vec<Complex64> = es.right_matrix().column(r.eigen_index).to_vec();
        ctx.write_text(
            &format!("zero_mode_delta_{delta:.6}_m{k}.csv"),
            &wavefunction_csv(meta, &psi),
        )?;
        series.push((
            format!("mode {k} ({})", r.anchor),
            psi.iter().map(|z| z.norm()).collect(),
        ));
    }
    if !series.is_empty() {
        let named: Vec<(&str, &[f64])> = series
            .iter()
            .map(|(name, vals)| (name.as_str(), vals.as_slice()))
            .collect();
        let title = format!("zero modes at delta = {delta:.6}");
        ctx.write_text(
            &format!("zero_modes_delta_{delta:.6}.svg"),
            &profile_svg(&title, &named, true),
        )?;
    }
    Ok(())
}
