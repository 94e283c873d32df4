//! `trajectory`: follow zero modes along the constant-gain path
//! `V sin(delta) = const` while `V cos(delta)` scans an interval. At each
//! sampled point the open chain is diagonalized, zero modes are detected
//! (with the gapless-aware criteria where the bulk gap closes), and the
//! maximal-gain mode's energy, localization, and spectral isolation from
//! the bulk are recorded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nh_aah::model::{LatticeSpec, ModulationSpec, Rational, SiteIndexing};
use nh_aah::spectral::{
    default_k_samples, eigendecompose, find_zero_modes, real_line_gap, ZeroModeCriteria,
    ZeroModeReport, DEFAULT_EPS_GAP, DEFAULT_EPS_RE,
};
use nh_aah::svg::{line_svg, scatter_svg};

use super::bad_param;
use crate::config::parse_parameters;
use crate::context::{lin_space, RunContext};

fn default_q() -> u32 {
    3
}

fn default_p() -> u32 {
    8
}

fn default_height() -> f64 {
    2.0
}

fn default_x_min() -> f64 {
    -1.5
}

fn default_x_max() -> f64 {
    1.5
}

fn default_points() -> usize {
    25
}

fn default_lattice_size() -> usize {
    200
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryParams {
    #[serde(default = "default_q")]
    pub q: u32,
    #[serde(default = "default_p")]
    pub p: u32,
    /// Held constant along the path: `V sin(delta)`.
    #[serde(default = "default_height")]
    pub v_sin_delta: f64,
    /// Scanned coordinate `x = V cos(delta)`.
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_lattice_size")]
    pub lattice_size: usize,
}

struct PointRecord {
    x: f64,
    v: f64,
    delta: f64,
    gapped: bool,
    bulk_im: Vec<f64>,
    modes: Vec<ZeroModeReport>,
}

pub fn execute(raw: &serde_json::Value, ctx: &RunContext) -> anyhow::Result<String> {
    let p: TrajectoryParams = parse_parameters(ctx.kind, raw)?;
    let alpha = Rational::new(p.q, p.p).map_err(bad_param)?;
    if p.points < 2 {
        return Err(bad_param("points must be >= 2"));
    }
    if !(p.x_min.is_finite() && p.x_max.is_finite() && p.x_min < p.x_max) {
        return Err(bad_param("x range must be finite with x_min < x_max"));
    }
    if !(p.v_sin_delta.is_finite() && p.v_sin_delta != 0.0) {
        return Err(bad_param("v_sin_delta must be finite and nonzero"));
    }
    let resolved = ctx.resolved_config(&p)?;
    let meta = ctx.meta(&resolved);

    let xs = lin_space(p.x_min, p.x_max, p.points);
    let records: Vec<PointRecord> = xs
        .par_iter()
        .map(|&x| -> nh_aah::Result<PointRecord> {
            let v = x.hypot(p.v_sin_delta);
            let delta = p.v_sin_delta.atan2(x);
            let m = ModulationSpec::new(v, alpha, delta)?;
            let gap = real_line_gap(&m, default_k_samples(&m), DEFAULT_EPS_GAP)?;
            let lattice = LatticeSpec::uniform(m, p.lattice_size)?;
            let es = eigendecompose(&lattice.open_hamiltonian(SiteIndexing::DomainLocal).view())?;
            let criteria = if gap.gapped {
                ZeroModeCriteria::default()
            } else {
                ZeroModeCriteria::gapless(DEFAULT_EPS_RE)
            };
            let modes = find_zero_modes(&es, &lattice, &criteria)?;
            let mode_idx: Vec<usize> = modes.iter().map(|r| r.eigen_index).collect();
            let bulk_im = es
                .eigenvalues()
                .iter()
                .enumerate()
                .filter(|(i, _)| !mode_idx.contains(i))
                .map(|(_, e)| e.im)
                .collect();
            Ok(PointRecord {
                x,
                v,
                delta,
                gapped: gap.gapped,
                bulk_im,
                modes,
            })
        })
        .collect::<nh_aah::Result<Vec<_>>>()?;

    let mut csv = meta.header();
    csv.push_str("x,v,delta,gapped,mode_count,re_E,im_E,ipr,min_bulk_im_gap\n");
    let mut im_scatter: Vec<(f64, f64, bool)> = Vec::new();
    let mut ipr_curve: Vec<(f64, f64)> = Vec::new();
    for r in &records {
        for &im in &r.bulk_im {
            im_scatter.push((r.x, im, false));
        }
        // Report the maximal-gain zero mode (the experimentally selected one).
        let best = r
            .modes
            .iter()
            .max_by(|a, b| a.energy.im.total_cmp(&b.energy.im));
        let (re_s, im_s, ipr_s, gap_s) = match best {
            Some(mode) => {
                let min_gap = r
                    .bulk_im
                    .iter()
                    .map(|im| (im - mode.energy.im).abs())
                    .fold(f64::INFINITY, f64::min);
                im_scatter.push((r.x, mode.energy.im, true));
                ipr_curve.push((r.x, mode.ipr));
                (
                    mode.energy.re.to_string(),
                    mode.energy.im.to_string(),
                    mode.ipr.to_string(),
                    min_gap.to_string(),
                )
            }
            None => Default::default(),
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{re_s},{im_s},{ipr_s},{gap_s}\n",
            r.x,
            r.v,
            r.delta,
            r.gapped,
            r.modes.len(),
        ));
    }
    ctx.write_text("trajectory.csv", &csv)?;
    ctx.write_text(
        "trajectory_im.svg",
        &scatter_svg(
            "imaginary spectrum along the path",
            &im_scatter,
            "V cos(delta)",
            "Im(E)",
        ),
    )?;
    ctx.write_text(
        "trajectory_ipr.svg",
        &line_svg("zero-mode localization", &ipr_curve, "V cos(delta)", "IPR"),
    )?;
    Ok(resolved)
}
