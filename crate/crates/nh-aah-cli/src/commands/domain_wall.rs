//! `domain-wall`: diagonalize a multi-domain chain, export the complex
//! spectrum with zero modes highlighted, each zero-mode wavefunction, and
//! a summary stating whether a wall-anchored mode exists and whether it
//! carries the maximal imaginary energy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nh_aah::export::{spectrum_csv, wavefunction_csv, SpectrumRow};
use nh_aah::model::{DomainSpec, LatticeSpec, SiteIndexing};
use nh_aah::spectral::{
    default_k_samples, eigendecompose, find_zero_modes, real_line_gap, Anchor, ZeroModeCriteria,
    DEFAULT_EPS_GAP, DEFAULT_EPS_RE,
};
use nh_aah::svg::{profile_svg, scatter_svg};

use super::bad_param;
use crate::config::parse_parameters;
use crate::context::RunContext;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainWallParams {
    /// Two or more modulation domains, joined left to right.
    pub domains: Vec<DomainSpec>,
}

pub fn execute(raw: &serde_json::Value, ctx: &RunContext) -> anyhow::Result<String> {
    let p: DomainWallParams = parse_parameters(ctx.kind, raw)?;
    if p.domains.len() < 2 {
        return Err(bad_param("domain-wall experiments need at least two domains"));
    }
    let lattice = LatticeSpec::new(p.domains.clone()).map_err(bad_param)?;
    let resolved = ctx.resolved_config(&p)?;
    let meta = ctx.meta(&resolved);

    // Gapless handling: if any domain's bulk is gapless, switch the
    // zero-mode criteria to the imaginary-separation discriminator.
    let mut all_gapped = true;
    for d in lattice.domains() {
        let gap = real_line_gap(d.modulation(), default_k_samples(d.modulation()), DEFAULT_EPS_GAP)?;
        all_gapped &= gap.gapped;
    }
    let criteria = if all_gapped {
        ZeroModeCriteria::default()
    } else {
        ZeroModeCriteria::gapless(DEFAULT_EPS_RE)
    };

    let es = eigendecompose(&lattice.open_hamiltonian(SiteIndexing::DomainLocal).view())?;
    let reports = find_zero_modes(&es, &lattice, &criteria)?;
    let mut zero_flags = vec![false; es.dim()];
    for r in &reports {
        zero_flags[r.eigen_index] = true;
    }

    // Complex spectrum: CSV rows (the sweep format with delta = 0, since
    // there is no swept phase here) and a Re/Im scatter figure.
    let rows: Vec<SpectrumRow> = es
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(index, e)| SpectrumRow {
            delta: 0.0,
            index,
            re_e: e.re,
            im_e: e.im,
            is_zero_mode: zero_flags[index],
        })
        .collect();
    ctx.write_text("wall_spectrum.csv", &spectrum_csv(&meta, &rows))?;
    let scatter: Vec<(f64, f64, bool)> = rows.iter().map(|r| (r.re_e, r.im_e, r.is_zero_mode)).collect();
    ctx.write_text(
        "wall_spectrum.svg",
        &scatter_svg("multi-domain spectrum", &scatter, "Re(E)", "Im(E)"),
    )?;

    let mut series: Vec<(String, Vec<f64>)> = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        let psi: Vec<Complex64> = es.right_matrix().column(r.eigen_index).to_vec();
        ctx.write_text(&format!("zero_mode_m{k}.csv"), &wavefunction_csv(&meta, &psi))?;
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
        ctx.write_text("zero_modes.svg", &profile_svg("zero-mode profiles", &named, true))?;
    }

    // Summary: wall-mode existence and gain ranking.
    let max_im = es
        .eigenvalues()
        .iter()
        .map(|e| e.im)
        .fold(f64::NEG_INFINITY, f64::max);
    let wall_modes: Vec<&_> = reports
        .iter()
        .filter(|r| matches!(r.anchor, Anchor::Wall(_)))
        .collect();
    let wall_mode_has_max_im = wall_modes
        .iter()
        .any(|r| r.energy.im >= max_im - 1e-12 * max_im.abs().max(1.0));
    let summary = serde_json::json!({
        "wall_mode_exists": !wall_modes.is_empty(),
        "wall_mode_has_max_im": wall_mode_has_max_im,
        "zero_modes": reports.iter().map(|r| serde_json::json!({
            "anchor": r.anchor.to_string(),
            "re_E": r.energy.re,
            "im_E": r.energy.im,
            "ipr": r.ipr,
            "decay_length": r.decay_length,
        })).collect::<Vec<_>>(),
        "config": serde_json::from_str::<serde_json::Value>(&resolved)?,
        "version": ctx.version,
    });
    ctx.write_text("summary.json", &format!("{:#}\n", summary))?;
    Ok(resolved)
}
