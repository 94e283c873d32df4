//! `phase-diagram`: polar (V, delta) classification grids, one CSV and one
//! SVG per modulation frequency. Cells whose classification failed are
//! recorded as gapless with a diagnostic inside the CSV/diagram data; such
//! runs still exit 0.

use serde::{Deserialize, Serialize};

use nh_aah::export::phase_diagram_csv;
use nh_aah::model::Rational;
use nh_aah::svg::polar_phase_svg;
use nh_aah::topology::phase_diagram;

use super::bad_param;
use crate::config::parse_parameters;
use crate::context::RunContext;

fn default_v_max() -> f64 {
    2.0
}

fn default_cells() -> usize {
    40
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramParams {
    /// Modulation frequencies, e.g. `[{"q": 1, "p": 4}, {"q": 3, "p": 8}]`.
    pub alphas: Vec<Rational>,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    /// Radial cell count.
    #[serde(default = "default_cells")]
    pub nv: usize,
    /// Angular cell count.
    #[serde(default = "default_cells")]
    pub ndelta: usize,
}

pub fn execute(raw: &serde_json::Value, ctx: &RunContext) -> anyhow::Result<String> {
    let p: PhaseDiagramParams = parse_parameters(ctx.kind, raw)?;
    if p.alphas.is_empty() {
        return Err(bad_param("alphas must list at least one modulation frequency"));
    }
    if !(p.v_max.is_finite() && p.v_max > 0.0) {
        return Err(bad_param("v_max must be finite and positive"));
    }
    if p.nv < 8 || p.ndelta < 8 {
        return Err(bad_param("nv and ndelta must both be >= 8"));
    }
    let resolved = ctx.resolved_config(&p)?;
    let meta = ctx.meta(&resolved);

    for &alpha in &p.alphas {
        let d = phase_diagram(alpha, p.v_max, p.nv, p.ndelta)?;
        let stem = format!("phase_diagram_{}_{}", alpha.q(), alpha.p());
        ctx.write_text(&format!("{stem}.csv"), &phase_diagram_csv(&meta, &d))?;
        ctx.write_text(&format!("{stem}.svg"), &polar_phase_svg(&d))?;
    }
    Ok(resolved)
}
