//! Biorthogonal Wilson loops over the Bloch bands: quantized polarization,
//! the global Berry phase, point classification on the (V, delta) disc, and
//! polar phase diagrams with their p-spoke structure.
//!
//! All loop quantities are built from the gauge-invariant discretization
//! `W = prod_j S_j^{-1} A_j` with `A_j = L(k_j)^dagger R(k_{j+1})` and
//! `S_j = L(k_j)^dagger R(k_j)` over a band subspace: rescaling any
//! eigenvector at any momentum cancels exactly (the `S_j` factor absorbs
//! same-k factors, the cross-k factors telescope around the closed loop).

use ndarray::Array2;
use ndarray_linalg::Determinant;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::model::{bloch_hamiltonian, ModulationSpec, Rational};
use crate::spectral::{
    default_k_samples, eigendecompose, matrix_fingerprint, real_line_gap, EigenSystem,
    DEFAULT_EPS_GAP, EXCEPTIONAL_OVERLAP_FLOOR,
};

/// Default Wilson-loop grid; convergence is verified against `2 * nk`.
pub const DEFAULT_NK: usize = 128;

/// Minimum admissible Wilson-loop grid.
pub const MIN_NK: usize = 64;

/// Half-width of the quantization windows around 0 and 1/2 used by
/// [`classify_point`].
pub const QUANTIZATION_TOL: f64 = 0.05;

/// Fixed fractional offset of the momentum grid, `k_j = 2 pi (j + o) / nk`.
///
/// An irrational offset keeps high-symmetry momenta (0, pi/2, pi, ...) off
/// the sampling grid. On special parameter circles two same-subspace bands
/// can coalesce *exactly at* such momenta (e.g. `alpha = 1/4`, `V = 1`,
/// `delta = pi/4` pins an intra-band coalescence to `k = pi/2`); sampling
/// the coalescence itself yields numerically meaningless eigenvectors,
/// while any finite distance from it is harmless.
const GRID_OFFSET: f64 = 0.381_966_011_250_105; // 2 - golden ratio

/// Polarization agreement demanded between the `nk` and `2 nk` grids.
const POLARIZATION_CONVERGENCE_TOL: f64 = 1e-6;

/// Global-phase agreement (radians) demanded between the two grids.
const PHASE_CONVERGENCE_TOL: f64 = 1e-6 * TAU;

/// Biorthogonal frames of a band subspace on the uniform momentum grid:
/// one `(left, right)` column-matrix pair per `k_j = 2 pi (j + o) / nk`
/// (see [`GRID_OFFSET`] for `o`).
pub type SubspaceFrames = Vec<(Array2<Complex64>, Array2<Complex64>)>;

/// Distance on the polarization circle `[0, 1)`.
fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Result of a converged occupied-subspace Wilson loop.
#[derive(Debug, Clone)]
pub struct WilsonLoopResult {
    /// Fractional part of `-(1/2 pi) * sum(det_track)`, in `[0, 1)`.
    pub polarization: f64,
    /// Grid the result was produced on (convergence checked against `2 nk`).
    pub nk: usize,
    /// Per-step phase increments `arg det(S_j^{-1} A_j)`.
    pub det_track: Vec<f64>,
    /// Number of occupied (`Re E < 0`) bands; `p/2` for every gapped
    /// spectrum, forced by the `E -> -E*` pairing.
    pub occupied_count: usize,
}

/// Verdict of [`classify_point`] for one `(V, delta)` sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseLabel {
    /// Gapped with polarization 1/2 (global Berry phase `2 pi`).
    Nontrivial,
    /// Gapped with polarization 0 (global Berry phase 0).
    Trivial,
    /// No real line gap at `Re E = 0` (phase boundaries and the large
    /// gapless region), or a cell whose classification failed.
    Gapless,
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseLabel::Nontrivial => write!(f, "nontrivial"),
            PhaseLabel::Trivial => write!(f, "trivial"),
            PhaseLabel::Gapless => write!(f, "gapless"),
        }
    }
}

/// Polar-grid classification of the `(V, delta)` disc for one `alpha`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub alpha: Rational,
    /// Radii, ascending, `v_max * (i + 1) / nv`.
    pub v_grid: Vec<f64>,
    /// Angles, `2 pi j / ndelta`.
    pub delta_grid: Vec<f64>,
    /// `labels[i][j]` classifies radius `v_grid[i]`, angle `delta_grid[j]`.
    pub labels: Vec<Vec<PhaseLabel>>,
    /// `(polarization, global_berry_phase)` for every gapped cell.
    pub invariants: Vec<Vec<Option<(f64, f64)>>>,
    /// Failure diagnostics for cells recorded as Gapless because their
    /// classification errored rather than because the gap closed.
    pub diagnostics: Vec<Vec<Option<String>>>,
}

/// Indices of the occupied (`Re E < 0`) Bloch bands at momentum `k`,
/// ascending in `Re E`. Errors if any band sits within the gap floor of the
/// `Re E = 0` line at this `k` (misuse on gapless input).
pub fn occupied_bands(m: &ModulationSpec, k: f64) -> Result<Vec<usize>> {
    let hk = bloch_hamiltonian(m, k);
    let es = eigendecompose(&hk.view())?;
    split_bands(&es, k).map(|(occ, _)| occ)
}

/// Splits eigenvalue indices into (occupied, unoccupied) by the sign of
/// `Re E`, enforcing the gap floor and the exact `p/2` count.
fn split_bands(es: &EigenSystem, k: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    let p = es.dim();
    let min_abs_re = es
        .eigenvalues()
        .iter()
        .map(|e| e.re.abs())
        .fold(f64::INFINITY, f64::min);
    if min_abs_re <= DEFAULT_EPS_GAP {
        return Err(Error::GapViolated {
            context: format!(" at k = {k:.6}"),
            min_abs_re,
            floor: DEFAULT_EPS_GAP,
        });
    }
    let (occ, unocc): (Vec<usize>, Vec<usize>) =
        (0..p).partition(|&j| es.eigenvalues()[j].re < 0.0);
    if occ.len() != p / 2 {
        return Err(Error::GapViolated {
            context: format!(" at k = {k:.6}: {} of {p} bands occupied", occ.len()),
            min_abs_re,
            floor: DEFAULT_EPS_GAP,
        });
    }
    Ok((occ, unocc))
}

fn column_select(src: ndarray::ArrayView2<Complex64>, cols: &[usize]) -> Array2<Complex64> {
    let mut out = Array2::zeros((src.nrows(), cols.len()));
    for (dst, &c) in cols.iter().enumerate() {
        out.column_mut(dst).assign(&src.column(c));
    }
    out
}

/// Gauge-invariant per-step phase increments `arg det(S_j^{-1} A_j)` of the
/// closed loop through `frames` (last frame wraps to the first).
pub fn loop_increments(frames: &SubspaceFrames) -> Result<Vec<f64>> {
    if frames.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "wilson loop needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    let bands = frames[0].0.ncols();
    let nk = frames.len();
    let mut increments = Vec::with_capacity(nk);
    for j in 0..nk {
        let (l, r) = &frames[j];
        let (_, r_next) = &frames[(j + 1) % nk];
        if l.dim() != r.dim() || r.dim() != r_next.dim() || l.ncols() != bands {
            return Err(Error::DimensionMismatch {
                left: l.ncols(),
                right: bands,
            });
        }
        let ldag = l.t().mapv(|z| z.conj());
        let det_s = det_of(&ldag.dot(r))?;
        if det_s.norm() < EXCEPTIONAL_OVERLAP_FLOOR {
            return Err(Error::ExceptionalPoint {
                index: j,
                overlap: det_s.norm(),
                floor: EXCEPTIONAL_OVERLAP_FLOOR,
            });
        }
        let det_a = det_of(&ldag.dot(r_next))?;
        increments.push((det_a / det_s).arg());
    }
    Ok(increments)
}

/// `frac(-(1/2 pi) * sum(increments))`, mapped into `[0, 1)`.
pub fn polarization_from_increments(increments: &[f64]) -> f64 {
    (-increments.iter().sum::<f64>() / TAU).rem_euclid(1.0)
}

fn det_of(m: &Array2<Complex64>) -> Result<Complex64> {
    m.det().map_err(|e| Error::Eigensolver {
        dim: m.nrows(),
        fingerprint: matrix_fingerprint(&m.view()),
        detail: format!("determinant failed: {e}"),
    })
}

/// Maps an angle to its principal value in `(-pi, pi]`.
fn principal_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Principal phase `arg det W` of the subspace loop `W = prod_j S_j^{-1}
/// A_j`, in `(-pi, pi]`. The determinant of the product factorizes into the
/// per-step determinant ratios, so this is exactly the increment sum
/// reduced to its principal value: the eigensolver's arbitrary per-`k`
/// frame phases enter each raw increment but cancel modulo `2 pi` around
/// the closed loop.
fn subspace_loop_phase(frames: &SubspaceFrames) -> Result<f64> {
    Ok(principal_angle(loop_increments(frames)?.iter().sum()))
}

/// One full pass over a momentum grid: occupied-loop increments and the
/// principal loop phases of both band subspaces.
struct LoopScan {
    occ_increments: Vec<f64>,
    polarization: f64,
    theta_occ: f64,
    theta_unocc: f64,
    occupied_count: usize,
}

/// Occupied-subspace biorthogonal frames on the uniform `nk`-point grid.
/// Building block of [`wilson_polarization`], exposed so gauge-invariance
/// can be exercised with externally rescaled frames.
pub fn occupied_frames(m: &ModulationSpec, nk: usize) -> Result<SubspaceFrames> {
    Ok(collect_frames(m, nk)?.0)
}

fn collect_frames(m: &ModulationSpec, nk: usize) -> Result<(SubspaceFrames, SubspaceFrames)> {
    let systems: Vec<(f64, EigenSystem)> = (0..nk)
        .into_par_iter()
        .map(|j| {
            let k = TAU * (j as f64 + GRID_OFFSET) / nk as f64;
            let hk = bloch_hamiltonian(m, k);
            Ok((k, eigendecompose(&hk.view())?))
        })
        .collect::<Result<_>>()?;
    let mut occ_frames = Vec::with_capacity(nk);
    let mut unocc_frames = Vec::with_capacity(nk);
    for (k, es) in &systems {
        let (occ, unocc) = split_bands(es, *k)?;
        if let Some(&index) = es.exceptional().first() {
            return Err(Error::ExceptionalPoint {
                index,
                overlap: 1.0 / es.biorth_condition(),
                floor: EXCEPTIONAL_OVERLAP_FLOOR,
            });
        }
        occ_frames.push((
            column_select(es.left_matrix(), &occ),
            column_select(es.right_matrix(), &occ),
        ));
        unocc_frames.push((
            column_select(es.left_matrix(), &unocc),
            column_select(es.right_matrix(), &unocc),
        ));
    }
    Ok((occ_frames, unocc_frames))
}

fn loop_scan(m: &ModulationSpec, nk: usize) -> Result<LoopScan> {
    let (occ_frames, unocc_frames) = collect_frames(m, nk)?;
    let occ_increments = loop_increments(&occ_frames)?;
    let polarization = polarization_from_increments(&occ_increments);
    let theta_occ = subspace_loop_phase(&occ_frames)?;
    let theta_unocc = subspace_loop_phase(&unocc_frames)?;
    Ok(LoopScan {
        occupied_count: occ_frames[0].0.ncols(),
        occ_increments,
        polarization,
        theta_occ,
        theta_unocc,
    })
}

fn validate_nk(nk: usize) -> Result<()> {
    if nk < MIN_NK {
        return Err(Error::InvalidInput(format!(
            "wilson loop grid nk = {nk} below minimum {MIN_NK}"
        )));
    }
    Ok(())
}

/// Runs the loop at `nk` and `2 nk` and enforces agreement of both the
/// polarization and the global phase between the two grids. Gapless input
/// is rejected up front: the loop quantities are only defined when the
/// occupied/unoccupied split exists everywhere on the Brillouin zone.
fn converged_scans(m: &ModulationSpec, nk: usize) -> Result<(LoopScan, LoopScan)> {
    validate_nk(nk)?;
    let gap = real_line_gap(m, default_k_samples(m), DEFAULT_EPS_GAP)?;
    if !gap.gapped {
        return Err(Error::GapViolated {
            context: " over the Brillouin zone".into(),
            min_abs_re: gap.min_abs_re,
            floor: DEFAULT_EPS_GAP,
        });
    }
    let coarse = loop_scan(m, nk)?;
    let fine = loop_scan(m, 2 * nk)?;
    let dp = circle_dist(coarse.polarization, fine.polarization);
    if dp > POLARIZATION_CONVERGENCE_TOL {
        return Err(Error::NonConvergence {
            what: "wilson polarization".into(),
            detail: format!(
                "p_x({nk}) = {:.9} vs p_x({}) = {:.9}, circle distance {dp:.3e} > {POLARIZATION_CONVERGENCE_TOL:.0e}",
                coarse.polarization,
                2 * nk,
                fine.polarization
            ),
        });
    }
    let dg = (global_phase_of(&coarse) - global_phase_of(&fine)).abs();
    if dg > PHASE_CONVERGENCE_TOL {
        return Err(Error::NonConvergence {
            what: "global berry phase".into(),
            detail: format!(
                "theta({nk}) = {:.9} vs theta({}) = {:.9}, difference {dg:.3e} > {PHASE_CONVERGENCE_TOL:.3e}",
                global_phase_of(&coarse),
                2 * nk,
                global_phase_of(&fine)
            ),
        });
    }
    Ok((coarse, fine))
}

/// Assembles the unreduced global phase from the two subspace principal
/// phases.
///
/// The `E -> -E*` pairing maps the occupied frames onto the unoccupied ones
/// (`R_unocc = C L_occ`, `L_unocc = C R_occ` at the same `k`), which forces
/// the two subspaces to accumulate *equal* loop phases. A single
/// determinant phase is only defined modulo `2 pi` — it cannot distinguish
/// 0 from `2 pi` — but the pairing fixes the relative branch of the two
/// halves: both contribute with the same orientation, so the total is the
/// sum of their magnitudes, `0` in the trivial and `2 pi` in the nontrivial
/// gapped phase. (Accumulating raw per-step increments over all `p` bands
/// cannot do this job: solver gauge noise makes each full-space step an
/// arbitrary value in `(-pi, pi]` no matter how fine the grid.)
fn global_phase_of(scan: &LoopScan) -> f64 {
    scan.theta_occ.abs() + scan.theta_unocc.abs()
}

/// Biorthogonal Wilson-loop polarization of the occupied (`Re E < 0`)
/// bands over the Brillouin zone, with `nk`-vs-`2 nk` convergence control.
///
/// The per-step increments are returned in `det_track`; their sum gives the
/// polarization as `frac(-(1/2 pi) * sum)`.
pub fn wilson_polarization(m: &ModulationSpec, nk: usize) -> Result<WilsonLoopResult> {
    let (coarse, _) = converged_scans(m, nk)?;
    Ok(WilsonLoopResult {
        polarization: coarse.polarization,
        nk,
        det_track: coarse.occ_increments,
        occupied_count: coarse.occupied_count,
    })
}

/// Global Berry phase accumulated over all `p` bands around the Brillouin
/// zone: the occupied- and unoccupied-subspace loop phases added with the
/// common branch fixed by the spectral pairing (see `global_phase_of`).
/// Returns a value near `2 pi` in the nontrivial gapped phase and near `0`
/// in the trivial one — deliberately *not* reduced into `(-pi, pi]`.
pub fn global_berry_phase(m: &ModulationSpec, nk: usize) -> Result<f64> {
    let (coarse, _) = converged_scans(m, nk)?;
    Ok(global_phase_of(&coarse))
}

fn summarize_track(nk: usize, increments: &[f64]) -> String {
    let sum: f64 = increments.iter().sum();
    let max = increments.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    format!(
        "nk = {nk}, {} steps, sum = {sum:.6}, max |step| = {max:.3}",
        increments.len()
    )
}

/// Classification plus the invariant pair for gapped points; shared by
/// [`classify_point`] and [`phase_diagram`].
fn classify_with_invariants(m: &ModulationSpec) -> Result<(PhaseLabel, Option<(f64, f64)>)> {
    let gap = real_line_gap(m, default_k_samples(m), DEFAULT_EPS_GAP)?;
    if !gap.gapped {
        return Ok((PhaseLabel::Gapless, None));
    }
    let (coarse, _) = converged_scans(m, DEFAULT_NK)?;
    let pol = coarse.polarization;
    let theta = global_phase_of(&coarse);
    let label = if circle_dist(pol, 0.5) < QUANTIZATION_TOL {
        PhaseLabel::Nontrivial
    } else if circle_dist(pol, 0.0) < QUANTIZATION_TOL {
        PhaseLabel::Trivial
    } else {
        return Err(Error::Unquantized {
            value: pol,
            tol: QUANTIZATION_TOL,
            track: summarize_track(DEFAULT_NK, &coarse.occ_increments),
        });
    };
    Ok((label, Some((pol, theta))))
}

/// Labels one `(V, delta)` point: Gapless when the real line gap closes,
/// otherwise Nontrivial/Trivial by the quantized polarization. A
/// polarization away from both quantized values is an error carrying the
/// accumulation track.
pub fn classify_point(m: &ModulationSpec) -> Result<PhaseLabel> {
    classify_with_invariants(m).map(|(label, _)| label)
}

/// Classifies the polar grid `{v_max (i+1)/nv} x {2 pi j / ndelta}`.
/// Cells are evaluated in parallel and merged in grid order; a cell whose
/// classification errors is recorded Gapless with the error text in
/// `diagnostics` instead of aborting the scan.
pub fn phase_diagram(
    alpha: Rational,
    v_max: f64,
    nv: usize,
    ndelta: usize,
) -> Result<PhaseDiagram> {
    if !(v_max.is_finite() && v_max > 0.0) {
        return Err(Error::InvalidInput(format!(
            "v_max must be positive and finite, got {v_max}"
        )));
    }
    if nv < 8 || ndelta < 8 {
        return Err(Error::InvalidInput(format!(
            "phase diagram grid too coarse: nv = {nv}, ndelta = {ndelta} (need >= 8 each)"
        )));
    }
    let v_grid: Vec<f64> = (0..nv)
        .map(|i| v_max * (i + 1) as f64 / nv as f64)
        .collect();
    let delta_grid: Vec<f64> = (0..ndelta)
        .map(|j| TAU * j as f64 / ndelta as f64)
        .collect();

    type Cell = (PhaseLabel, Option<(f64, f64)>, Option<String>);
    let cells: Vec<Cell> = (0..nv * ndelta)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / ndelta, idx % ndelta);
            let outcome = ModulationSpec::new(v_grid[i], alpha, delta_grid[j])
                .and_then(|m| classify_with_invariants(&m));
            match outcome {
                Ok((label, inv)) => (label, inv, None),
                Err(e) => (PhaseLabel::Gapless, None, Some(e.to_string())),
            }
        })
        .collect();

    let mut labels = Vec::with_capacity(nv);
    let mut invariants = Vec::with_capacity(nv);
    let mut diagnostics = Vec::with_capacity(nv);
    for i in 0..nv {
        let row = &cells[i * ndelta..(i + 1) * ndelta];
        labels.push(row.iter().map(|c| c.0).collect());
        invariants.push(row.iter().map(|c| c.1).collect());
        diagnostics.push(row.iter().map(|c| c.2.clone()).collect());
    }
    Ok(PhaseDiagram {
        alpha,
        v_grid,
        delta_grid,
        labels,
        invariants,
        diagnostics,
    })
}

/// Walks the delta ring nearest radius `v_ring`, counting maximal gapped
/// arcs and checking that consecutive arcs strictly alternate between
/// Nontrivial and Trivial (an arc of mixed labels fails the check). A ring
/// with no gapped cell returns `(0, true)` vacuously.
pub fn spoke_census(d: &PhaseDiagram, v_ring: f64) -> Result<(usize, bool)> {
    let Some(&v_last) = d.v_grid.last() else {
        return Err(Error::InvalidInput("phase diagram has no radii".into()));
    };
    if !v_ring.is_finite() || v_ring < 0.0 || v_ring > v_last * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "v_ring = {v_ring} outside the grid range [0, {v_last}]"
        )));
    }
    let row = d
        .v_grid
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - v_ring).abs().total_cmp(&(b.1 - v_ring).abs()))
        .map(|(i, _)| i)
        .unwrap();
    let ring = &d.labels[row];
    let n = ring.len();

    if ring.iter().all(|&l| l == PhaseLabel::Gapless) {
        return Ok((0, true));
    }
    // Fully gapped ring: a single wrap-around arc.
    if ring.iter().all(|&l| l != PhaseLabel::Gapless) {
        let uniform = ring.iter().all(|&l| l == ring[0]);
        return Ok((1, uniform));
    }

    // Start on a gapless cell so every arc is scanned contiguously.
    let start = ring.iter().position(|&l| l == PhaseLabel::Gapless).unwrap();
    let mut arcs: Vec<(PhaseLabel, bool)> = Vec::new(); // (label, uniform)
    let mut current: Option<(PhaseLabel, bool)> = None;
    for step in 1..=n {
        let l = ring[(start + step) % n];
        match (&mut current, l) {
            (cur @ None, lab) if lab != PhaseLabel::Gapless => *cur = Some((lab, true)),
            (Some(arc), lab) if lab != PhaseLabel::Gapless => {
                if lab != arc.0 {
                    arc.1 = false;
                }
            }
            (cur @ Some(_), _) => {
                arcs.push(cur.take().unwrap());
            }
            (None, _) => {}
        }
    }
    if let Some(arc) = current {
        arcs.push(arc);
    }

    let count = arcs.len();
    let mut alternating = arcs.iter().all(|a| a.1);
    if count >= 2 {
        for i in 0..count {
            if arcs[i].0 == arcs[(i + 1) % count].0 {
                alternating = false;
            }
        }
    }
    Ok((count, alternating))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::noise::SplitMix64;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn modulation(v: f64, q: u32, p: u32, delta: f64) -> ModulationSpec {
        ModulationSpec::new(v, Rational::new(q, p).unwrap(), delta).unwrap()
    }

    #[test]
    fn occupied_bands_examples() {
        let m = modulation(1.5, 1, 4, 0.45 * PI);
        for &k in &[0.0, 0.9, 2.3, 5.1] {
            let occ = occupied_bands(&m, k).unwrap();
            assert_eq!(occ.len(), 2, "k = {k}");
        }
        let m8 = modulation(1.4, 3, 8, 0.4 * PI);
        for j in 0..64 {
            let occ = occupied_bands(&m8, TAU * j as f64 / 64.0).unwrap();
            assert_eq!(occ.len(), 4);
        }
        // Free chain at k = 0: two bands sit exactly on Re E = 0.
        let free = modulation(0.0, 3, 8, 0.0);
        assert!(matches!(
            occupied_bands(&free, 0.0),
            Err(Error::GapViolated { .. })
        ));
    }

    #[test]
    fn polarization_is_quantized_at_the_anchor_points() {
        let nontrivial = modulation(1.4, 3, 8, 0.4 * PI);
        let w = wilson_polarization(&nontrivial, 64).unwrap();
        assert!(circle_dist(w.polarization, 0.5) < 1e-3, "{}", w.polarization);
        assert_eq!(w.occupied_count, 4);
        assert_eq!(w.det_track.len(), 64);

        let trivial = modulation(1.4, 3, 8, 0.4 * PI + PI / 4.0);
        let w = wilson_polarization(&trivial, 64).unwrap();
        assert!(circle_dist(w.polarization, 0.0) < 1e-3, "{}", w.polarization);
    }

    #[test]
    fn global_phase_distinguishes_the_phases() {
        let nontrivial = modulation(1.4, 3, 8, 0.4 * PI);
        let g = global_berry_phase(&nontrivial, 64).unwrap();
        assert!((g - TAU).abs() < 1e-2, "global phase {g}");

        let trivial = modulation(1.4, 3, 8, 0.4 * PI + PI / 4.0);
        let g = global_berry_phase(&trivial, 64).unwrap();
        assert!(g.abs() < 1e-2, "global phase {g}");
    }

    #[test]
    fn wilson_input_validation() {
        let m = modulation(1.4, 3, 8, 0.4 * PI);
        assert!(wilson_polarization(&m, 32).is_err());
        let gapless = modulation(0.0, 3, 8, 0.0);
        assert!(matches!(
            wilson_polarization(&gapless, 64),
            Err(Error::GapViolated { .. })
        ));
    }

    #[test]
    fn translation_by_one_site_shifts_polarization_by_half() {
        // delta -> delta + 2 pi q / p relabels the chain by one site; the
        // p/2 occupied Wannier centers each move 1/p cell, so the
        // polarization shifts by exactly 1/2 on the circle.
        for (v, q, p, delta) in [(1.4, 3, 8, 0.4 * PI), (1.5, 1, 4, 0.45 * PI)] {
            let m0 = modulation(v, q, p, delta);
            let m1 = modulation(v, q, p, delta + TAU * q as f64 / p as f64);
            let p0 = wilson_polarization(&m0, 64).unwrap().polarization;
            let p1 = wilson_polarization(&m1, 64).unwrap().polarization;
            assert!(
                circle_dist(p1, p0 + 0.5) < 1e-9,
                "pol {p0} vs shifted {p1} (alpha = {q}/{p})"
            );
        }
    }

    #[test]
    fn rescaled_frames_leave_polarization_unchanged() {
        let m = modulation(1.4, 3, 8, 0.4 * PI);
        let frames = occupied_frames(&m, 64).unwrap();
        let reference = polarization_from_increments(&loop_increments(&frames).unwrap());

        let mut rng = SplitMix64::new(0xA11CE);
        let mut scale = |c: &mut Array2<Complex64>| {
            for mut col in c.columns_mut() {
                let s = Complex64::new(rng.next_f64() * 3.0 + 0.2, rng.next_f64() * 2.0 - 1.0);
                col.mapv_inplace(|z| z * s);
            }
        };
        let rescaled: SubspaceFrames = frames
            .into_iter()
            .map(|(mut l, mut r)| {
                scale(&mut l);
                scale(&mut r);
                (l, r)
            })
            .collect();
        let shifted = polarization_from_increments(&loop_increments(&rescaled).unwrap());
        assert!(
            circle_dist(reference, shifted) < 1e-10,
            "{reference} vs {shifted}"
        );
    }

    #[test]
    fn classify_point_examples() {
        let m = modulation(1.5, 3, 8, 0.4 * PI);
        assert_eq!(classify_point(&m).unwrap(), PhaseLabel::Nontrivial);
        let m = modulation(1.5, 1, 4, -0.4 * PI);
        assert_eq!(classify_point(&m).unwrap(), PhaseLabel::Trivial);
        let m = modulation(0.0, 1, 4, 0.0);
        assert_eq!(classify_point(&m).unwrap(), PhaseLabel::Gapless);
        // alpha with p not a multiple of 4 never opens the gap.
        let m = modulation(1.0, 1, 3, 0.3);
        assert_eq!(classify_point(&m).unwrap(), PhaseLabel::Gapless);
    }

    #[test]
    fn small_quarter_flux_diagram_has_four_alternating_spokes() {
        let d = phase_diagram(Rational::new(1, 4).unwrap(), 2.0, 8, 16).unwrap();
        assert_eq!(d.v_grid.len(), 8);
        assert_eq!(d.delta_grid.len(), 16);
        assert_eq!(d.labels.len(), 8);
        assert!(d.labels.iter().all(|row| row.len() == 16));
        // Every gapped cell carries both invariants; gapless cells none.
        for i in 0..8 {
            for j in 0..16 {
                match d.labels[i][j] {
                    PhaseLabel::Gapless => assert!(d.invariants[i][j].is_none()),
                    _ => {
                        let (pol, theta) = d.invariants[i][j].unwrap();
                        assert!(circle_dist(pol, 0.0) < 0.05 || circle_dist(pol, 0.5) < 0.05);
                        assert!(theta.abs() < 0.05 * TAU || (theta - TAU).abs() < 0.05 * TAU);
                    }
                }
            }
        }
        assert!(d
            .diagnostics
            .iter()
            .flatten()
            .all(|c| c.is_none()), "unexpected cell diagnostics");
        let (count, alternating) = spoke_census(&d, 1.5).unwrap();
        assert_eq!(count, 4);
        assert!(alternating);
    }

    #[test]
    fn census_handles_synthetic_rings() {
        use PhaseLabel::{Gapless as G, Nontrivial as N, Trivial as T};
        let mk = |ring: Vec<PhaseLabel>| PhaseDiagram {
            alpha: Rational::new(1, 4).unwrap(),
            v_grid: vec![1.0],
            delta_grid: (0..ring.len()).map(|j| j as f64).collect(),
            labels: vec![ring],
            invariants: vec![vec![]],
            diagnostics: vec![vec![]],
        };
        // Wrap-around arc: the trailing N cells join the leading ones.
        let d = mk(vec![N, N, G, T, T, G, N]);
        assert_eq!(spoke_census(&d, 1.0).unwrap(), (2, true));
        // Two arcs with the same label: not alternating.
        let d = mk(vec![N, G, N, G]);
        assert_eq!(spoke_census(&d, 1.0).unwrap(), (2, false));
        // Mixed arc: not alternating.
        let d = mk(vec![N, T, G, T, G]);
        assert_eq!(spoke_census(&d, 1.0).unwrap(), (2, false));
        // All gapless: vacuous.
        let d = mk(vec![G, G, G, G]);
        assert_eq!(spoke_census(&d, 1.0).unwrap(), (0, true));
        // Out-of-range ring radius.
        assert!(spoke_census(&d, 7.0).is_err());
    }

    #[test]
    fn increments_are_small_nowhere_near_exceptional_points() {
        // Not a smallness guarantee per step (solver gauges are arbitrary);
        // just the bookkeeping identity sum(track) = -2 pi (pol + integer).
        let m = modulation(1.4, 3, 8, 0.4 * PI);
        let w = wilson_polarization(&m, 64).unwrap();
        let sum: f64 = w.det_track.iter().sum();
        let recovered = (-sum / TAU).rem_euclid(1.0);
        assert_abs_diff_eq!(recovered, w.polarization, epsilon = 1e-12);
    }
}
