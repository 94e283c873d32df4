//! Nonlinear time-domain dynamics of laser arrays with saturable gain.
//!
//! Two gain models are covered, both reducing to `i d/dt psi = H(psi) psi`
//! with unit hopping and an intensity-dependent imaginary on-site potential
//! `i V_n(psi)`:
//!
//! * pump-modulated: `V_n = Gamma lambda_n / (1 + |psi_n|^2) - gamma`, with
//!   the pump weight `lambda_n = (1 + sin(2 pi alpha n + delta)) / 2` on a
//!   uniformly lossy chain;
//! * loss-modulated: `V_n = Gamma / (1 + |psi_n|^2) + gamma_n - gamma`,
//!   uniform saturable pump against a per-domain sinusoidal loss profile
//!   `gamma_n` plus the constant offset `gamma = Im(E0) + 1/2` anchored to
//!   the domain-wall zero mode of the linear lattice.
//!
//! Fields evolve under classical fixed-step fourth-order integration from
//! small seeded complex-normal initial data, making every trace bitwise
//! reproducible from `(seed, dt, stride)`. Output intensity is the per-site
//! mean of `|psi_n|^2` time-averaged over a late window; emission spectra
//! are Hann-tapered discrete Fourier transforms `X(w) = sum psi(t) e^{+iwt}`
//! (so a mode `psi ~ e^{-iEt}` peaks at `w = Re E`, and the protected mode
//! pins to `w = 0`), peak-normalized.
//!
//! Mode classification runs on the *total* emission spectrum — per-site
//! spectral power summed over the chain before normalization. With equal
//! outcoupling from every site that sum is what a detector collecting the
//! whole array's output sees, and it is the right surface for counting
//! lasing lines: above the second threshold the competing modes burn
//! spatially disjoint gain holes, so a spectrum probed at any single site
//! (including the brightest one) can miss lines that carry order-one power
//! elsewhere in the chain.

use ndarray::Array2;
use ndarray_linalg::Eig;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::export::fnv1a64_f64s;
use crate::model::{LatticeSpec, ModulationSpec, Rational, SiteIndexing};
use crate::spectral::{eigendecompose, find_zero_modes, Anchor, ZeroModeCriteria};

/// Deterministic, cross-language-reproducible noise generation.
///
/// Initial fields are seeded with small complex Gaussian noise. So that runs
/// can be reproduced outside this crate, the generator is pinned to two
/// well-known textbook algorithms rather than any library's default:
///
/// 1. SplitMix64 drives the uniform stream: starting from the 64-bit seed,
///    each draw advances the state by `0x9E3779B97F4A7C15` and mixes it with
///    the standard two-xorshift-multiply finalizer. Uniform doubles in
///    `[0, 1)` take the top 53 bits: `(x >> 11) * 2^-53`.
/// 2. Box-Muller turns consecutive uniform pairs `(u1, u2)` into one complex
///    standard normal: `r = sqrt(-2 ln(1 - u1))`, angle `2 pi u2`, giving
///    `a = r cos(angle)` and `b = r sin(angle)`. Site `n` of a noise vector
///    consumes draws `2n` and `2n + 1`.
pub mod noise {
    use num_complex::Complex64;
    use std::f64::consts::TAU;

    /// SplitMix64 uniform generator.
    #[derive(Debug, Clone)]
    pub struct SplitMix64 {
        state: u64,
    }

    impl SplitMix64 {
        pub fn new(seed: u64) -> Self {
            Self { state: seed }
        }

        pub fn next_u64(&mut self) -> u64 {
            self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }

        /// Uniform double in `[0, 1)` from the top 53 bits.
        pub fn next_f64(&mut self) -> f64 {
            (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
        }

        /// One standard complex normal via Box-Muller (both branches used:
        /// real part from the cosine, imaginary part from the sine).
        pub fn next_complex_normal(&mut self) -> Complex64 {
            let u1 = self.next_f64();
            let u2 = self.next_f64();
            let r = (-2.0 * (1.0 - u1).ln()).sqrt();
            let angle = TAU * u2;
            Complex64::new(r * angle.cos(), r * angle.sin())
        }
    }

    /// Complex Gaussian noise vector scaled by `amplitude`.
    pub fn noise_vector(seed: u64, len: usize, amplitude: f64) -> Vec<Complex64> {
        let mut rng = SplitMix64::new(seed);
        (0..len).map(|_| rng.next_complex_normal() * amplitude).collect()
    }

}

use noise::noise_vector;

/// Default integrator step.
pub const DEFAULT_DT: f64 = 0.01;
/// Default simulated interval end.
pub const DEFAULT_T_END: f64 = 5000.0;
/// Default sampling stride (samples every `stride` steps).
pub const DEFAULT_SAMPLE_STRIDE: usize = 50;
/// Default initial noise scale `f0`.
pub const DEFAULT_INIT_SCALE: f64 = 0.01;
/// Default late-time averaging window.
pub const DEFAULT_AVERAGE_WINDOW: (f64, f64) = (2000.0, 5000.0);
/// Any `|psi_n|` beyond this aborts integration as a blow-up.
pub const BLOWUP_LIMIT: f64 = 1e6;
/// Output intensities below this floor classify as below threshold.
pub const INTENSITY_FLOOR: f64 = 1e-6;
/// A spectral local maximum counts as a lasing peak when its power exceeds
/// this fraction of the strongest peak.
pub const PEAK_FRACTION: f64 = 0.1;
/// The sampled train must resolve detunings at least this large, i.e.
/// `pi / (dt * stride) >= MIN_RESOLVED_OMEGA`.
pub const MIN_RESOLVED_OMEGA: f64 = 5.0;
/// Bisection tolerance of [`linear_threshold`] in pump strength.
pub const THRESHOLD_TOL: f64 = 1e-6;

/// Saturable gain injected through a spatially modulated pump on a chain
/// with uniform passive loss: `V_n = Gamma lambda_n / (1 + |psi_n|^2) -
/// gamma` with `lambda_n = (1 + sin(2 pi alpha n + delta)) / 2 in [0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpModulatedConfig {
    /// Overall pump strength `Gamma`.
    pub gamma_pump: f64,
    /// Pump modulation frequency `alpha = q/p`.
    pub alpha: Rational,
    /// Pump modulation phase `delta`.
    pub delta: f64,
    /// Uniform passive loss rate `gamma` (outcoupling plus dissipation).
    pub passive_loss: f64,
    /// Chain length `N` (even).
    pub lattice_size: usize,
}

impl PumpModulatedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_pump.is_finite() && self.gamma_pump >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "pump strength must be finite and non-negative, got {}",
                self.gamma_pump
            )));
        }
        if !self.passive_loss.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidInput(
                "passive loss and delta must be finite".into(),
            ));
        }
        if self.lattice_size < 2 || self.lattice_size % 2 != 0 {
            return Err(Error::OddDimension(self.lattice_size));
        }
        Ok(())
    }

    /// Pump weights `lambda_n in [0, 1]` over sites `n = 1..=N`.
    pub fn pump_weights(&self) -> Result<Vec<f64>> {
        let m = ModulationSpec::new(1.0, self.alpha, self.delta)?;
        Ok((1..=self.lattice_size as i64).map(|n| m.pump_profile(n)).collect())
    }
}

/// Uniform saturable pump against spatially modulated loss:
/// `V_n = Gamma / (1 + |psi_n|^2) + gamma_n - gamma`. The offset obeys
/// `gamma = Im(E0) + 1/2` with `E0` the wall-anchored zero mode of the
/// linear lattice that supplied `loss_profile`, which pins the linear
/// threshold of that mode to exactly `Gamma = 1/2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossModulatedConfig {
    /// Overall pump strength `Gamma`.
    pub gamma_pump: f64,
    /// Per-site modulated loss `gamma_n = V sin(2 pi alpha n + delta)`,
    /// evaluated per domain.
    pub loss_profile: Vec<f64>,
    /// Constant extra loss `gamma`.
    pub offset: f64,
    /// Nearest-neighbour hopping of the underlying lattice.
    pub hopping: f64,
    /// Global indices of domain walls (first site of each later domain).
    pub walls: Vec<usize>,
}

impl LossModulatedConfig {
    /// Builds the config from a multi-domain lattice: the loss profile is
    /// the lattice's site potentials, and the offset is computed from the
    /// lattice's wall-anchored zero mode via `gamma = Im(E0) + 1/2`.
    pub fn from_lattice(lattice: &LatticeSpec, gamma_pump: f64) -> Result<Self> {
        let e0 = wall_zero_mode_energy(lattice)?;
        let cfg = Self {
            gamma_pump,
            loss_profile: lattice.site_potentials(SiteIndexing::DomainLocal),
            offset: e0.im + 0.5,
            hopping: lattice.hopping(),
            walls: lattice.wall_indices(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_pump.is_finite() && self.gamma_pump >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "pump strength must be finite and non-negative, got {}",
                self.gamma_pump
            )));
        }
        let n = self.loss_profile.len();
        if n < 2 || n % 2 != 0 {
            return Err(Error::OddDimension(n));
        }
        if self.loss_profile.iter().any(|g| !g.is_finite()) || !self.offset.is_finite() {
            return Err(Error::InvalidInput("loss profile and offset must be finite".into()));
        }
        if !(self.hopping.is_finite() && self.hopping > 0.0) {
            return Err(Error::InvalidInput(format!(
                "hopping must be finite and positive, got {}",
                self.hopping
            )));
        }
        if self.walls.iter().any(|&w| w == 0 || w >= n) {
            return Err(Error::InvalidInput("wall index outside the chain interior".into()));
        }
        Ok(())
    }

    /// Absolute deviation between the stored offset and one recomputed from
    /// the lattice spectrum; the construction invariant keeps it below 1e-9.
    pub fn offset_deviation(&self, lattice: &LatticeSpec) -> Result<f64> {
        let e0 = wall_zero_mode_energy(lattice)?;
        Ok((self.offset - (e0.im + 0.5)).abs())
    }
}

/// Eigenenergy `E0` of the unique wall-anchored zero mode of the linear
/// lattice (the mode the loss-modulated laser is engineered to select).
pub fn wall_zero_mode_energy(lattice: &LatticeSpec) -> Result<Complex64> {
    let h = lattice.open_hamiltonian(SiteIndexing::DomainLocal);
    let es = eigendecompose(&h.view())?;
    let reports = find_zero_modes(&es, lattice, &ZeroModeCriteria::default())?;
    let wall: Vec<_> = reports
        .iter()
        .filter(|r| matches!(r.anchor, Anchor::Wall(_)))
        .collect();
    match wall.as_slice() {
        [only] => Ok(only.energy),
        [] => Err(Error::InvalidInput(
            "lattice has no wall-anchored zero mode to set the loss offset".into(),
        )),
        many => Err(Error::InvalidInput(format!(
            "expected one wall-anchored zero mode, found {}",
            many.len()
        ))),
    }
}

/// One of the two saturable-gain site-potential models.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainModel {
    Pump(PumpModulatedConfig),
    Loss(LossModulatedConfig),
}

impl GainModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            GainModel::Pump(c) => c.validate(),
            GainModel::Loss(c) => c.validate(),
        }
    }

    pub fn site_count(&self) -> usize {
        match self {
            GainModel::Pump(c) => c.lattice_size,
            GainModel::Loss(c) => c.loss_profile.len(),
        }
    }

    pub fn gamma_pump(&self) -> f64 {
        match self {
            GainModel::Pump(c) => c.gamma_pump,
            GainModel::Loss(c) => c.gamma_pump,
        }
    }

    /// Same model at a different pump strength (for sweeps).
    pub fn with_gamma_pump(&self, gamma_pump: f64) -> GainModel {
        let mut m = self.clone();
        match &mut m {
            GainModel::Pump(c) => c.gamma_pump = gamma_pump,
            GainModel::Loss(c) => c.gamma_pump = gamma_pump,
        }
        m
    }
}

/// Precomputed site data: `V_n(psi) = gamma_pump * weight_n /
/// (1 + |psi_n|^2) + constant_n` for both models.
struct Engine {
    gamma_pump: f64,
    weight: Vec<f64>,
    constant: Vec<f64>,
    hopping: f64,
}

impl Engine {
    fn new(model: &GainModel) -> Result<Self> {
        model.validate()?;
        Ok(match model {
            GainModel::Pump(c) => Engine {
                gamma_pump: c.gamma_pump,
                weight: c.pump_weights()?,
                constant: vec![-c.passive_loss; c.lattice_size],
                hopping: 1.0,
            },
            GainModel::Loss(c) => Engine {
                gamma_pump: c.gamma_pump,
                weight: vec![1.0; c.loss_profile.len()],
                constant: c.loss_profile.iter().map(|g| g - c.offset).collect(),
                hopping: c.hopping,
            },
        })
    }

    fn site_potential(&self, m: usize, intensity: f64) -> f64 {
        self.gamma_pump * self.weight[m] / (1.0 + intensity) + self.constant[m]
    }

    /// `out = -i H(psi) psi`; the imaginary diagonal becomes a real
    /// growth/decay rate.
    fn rhs_into(&self, out: &mut [Complex64], psi: &[Complex64]) {
        let n = psi.len();
        let t = self.hopping;
        for m in 0..n {
            let mut hop = Complex64::new(0.0, 0.0);
            if m > 0 {
                hop += psi[m - 1];
            }
            if m + 1 < n {
                hop += psi[m + 1];
            }
            let v = self.site_potential(m, psi[m].norm_sqr());
            out[m] = Complex64::new(0.0, -t) * hop + psi[m] * v;
        }
    }
}

/// Right-hand side `-i H(psi) psi` of the saturable-gain field equation.
pub fn nonlinear_rhs(psi: &[Complex64], model: &GainModel) -> Result<Vec<Complex64>> {
    let engine = Engine::new(model)?;
    if psi.len() != model.site_count() {
        return Err(Error::DimensionMismatch {
            left: psi.len(),
            right: model.site_count(),
        });
    }
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("field has non-finite values".into()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    engine.rhs_into(&mut out, psi);
    Ok(out)
}

/// Instantaneous Hamiltonian `H(psi)` at the given field: unit-hopping
/// tridiagonal plus the saturated imaginary diagonal `i V_n(psi)`.
pub fn instantaneous_hamiltonian(
    model: &GainModel,
    psi: &[Complex64],
) -> Result<Array2<Complex64>> {
    let engine = Engine::new(model)?;
    let n = model.site_count();
    if psi.len() != n {
        return Err(Error::DimensionMismatch {
            left: psi.len(),
            right: n,
        });
    }
    let mut h = Array2::zeros((n, n));
    for m in 0..n {
        h[(m, m)] = Complex64::new(0.0, engine.site_potential(m, psi[m].norm_sqr()));
        if m + 1 < n {
            h[(m, m + 1)] = Complex64::new(engine.hopping, 0.0);
            h[(m + 1, m)] = Complex64::new(engine.hopping, 0.0);
        }
    }
    Ok(h)
}

/// Small-signal (`psi -> 0`) limit of [`instantaneous_hamiltonian`]: the
/// linear lattice whose spectrum decides the lasing threshold.
pub fn linearized_hamiltonian(model: &GainModel) -> Result<Array2<Complex64>> {
    let zeros = vec![Complex64::new(0.0, 0.0); model.site_count()];
    instantaneous_hamiltonian(model, &zeros)
}

/// Largest `Im E` of a (small) complex matrix: the net linear gain rate.
pub fn max_imaginary_eigenvalue(h: &Array2<Complex64>) -> Result<f64> {
    let (vals, _) = h.eig().map_err(|e| Error::Eigensolver {
        dim: h.nrows(),
        fingerprint: 0,
        detail: e.to_string(),
    })?;
    Ok(vals.iter().map(|e| e.im).fold(f64::NEG_INFINITY, f64::max))
}

/// Fixed-step integration controls and sampling layout.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Integrator step (default 0.01). `t_end` must be a multiple of `dt`.
    pub dt: f64,
    /// End of the simulated interval `[0, t_end]` (default 5000).
    pub t_end: f64,
    /// Record one sample every this many steps (default 50).
    pub sample_stride: usize,
    /// Seed of the initial-noise generator.
    pub seed: u64,
    /// Initial noise scale `f0` (default 0.01).
    pub init_scale: f64,
    /// Averaging/spectral window `(t1, t2)` (default `(2000, 5000)`).
    pub average_window: (f64, f64),
}

impl SimConfig {
    /// Default layout with the given seed.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            sample_stride: DEFAULT_SAMPLE_STRIDE,
            seed,
            init_scale: DEFAULT_INIT_SCALE,
            average_window: DEFAULT_AVERAGE_WINDOW,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::InvalidInput(format!(
                "t_end must be at least one step, got {}",
                self.t_end
            )));
        }
        let ratio = self.t_end / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio.round().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "t_end = {} is not an integer multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidInput("sample_stride must be >= 1".into()));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "init_scale must be positive, got {}",
                self.init_scale
            )));
        }
        let (t1, t2) = self.average_window;
        if !(t1.is_finite() && t2.is_finite() && 0.0 <= t1 && t1 < t2 && t2 <= self.t_end) {
            return Err(Error::InvalidInput(format!(
                "averaging window ({t1}, {t2}) must satisfy 0 <= t1 < t2 <= t_end"
            )));
        }
        let sample_dt = self.dt * self.sample_stride as f64;
        if PI / sample_dt < MIN_RESOLVED_OMEGA {
            return Err(Error::InvalidInput(format!(
                "dt * stride = {sample_dt} cannot resolve |omega| = {MIN_RESOLVED_OMEGA}"
            )));
        }
        Ok(())
    }

    /// Number of integrator steps over `[0, t_end]`.
    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Number of recorded samples, `floor(t_end / (dt * stride)) + 1`.
    pub fn sample_count(&self) -> usize {
        self.step_count() / self.sample_stride + 1
    }
}

/// Sampled field history of one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    /// Sampled instants, starting at `t = 0`.
    pub times: Vec<f64>,
    /// Field snapshot per sample, `fields[s][site]`.
    pub fields: Vec<Vec<Complex64>>,
    /// Fingerprint of the producing `(model, sim)` pair.
    pub fingerprint: u64,
    /// Integrator step used.
    pub dt: f64,
    /// Steps between samples.
    pub sample_stride: usize,
    /// Averaging/spectral window inherited from the run config.
    pub average_window: (f64, f64),
}

impl TimeTrace {
    pub fn site_count(&self) -> usize {
        self.fields.first().map_or(0, Vec::len)
    }

    /// `|psi_n|^2` at the final sample.
    pub fn final_intensity_profile(&self) -> Vec<f64> {
        self.fields
            .last()
            .map(|f| f.iter().map(|z| z.norm_sqr()).collect())
            .unwrap_or_default()
    }

    /// Indices of samples falling inside the averaging window.
    fn window_samples(&self) -> Result<Vec<usize>> {
        let (t1, t2) = self.average_window;
        let have_start = self.times.first().copied().unwrap_or(f64::NAN);
        let have_end = self.times.last().copied().unwrap_or(f64::NAN);
        let idx: Vec<usize> = (0..self.times.len())
            .filter(|&s| self.times[s] >= t1 - 1e-9 && self.times[s] <= t2 + 1e-9)
            .collect();
        if idx.len() < 2 || have_start > t1 + 1e-9 || have_end < t2 - 1e-9 {
            return Err(Error::WindowNotCovered {
                t_start: t1,
                t_end: t2,
                have_start,
                have_end,
            });
        }
        Ok(idx)
    }
}

/// Fingerprint of a `(model, sim)` pair, embedded in traces and file
/// headers so artifacts can be matched to their inputs.
pub fn config_fingerprint(model: &GainModel, sim: &SimConfig) -> u64 {
    let mut vals: Vec<f64> = Vec::new();
    match model {
        GainModel::Pump(c) => {
            vals.extend([
                0.0,
                c.gamma_pump,
                c.passive_loss,
                f64::from(c.alpha.q()),
                f64::from(c.alpha.p()),
                c.delta,
                c.lattice_size as f64,
            ]);
        }
        GainModel::Loss(c) => {
            vals.extend([1.0, c.gamma_pump, c.offset, c.hopping]);
            vals.push(c.loss_profile.len() as f64);
            vals.extend(c.loss_profile.iter().copied());
            vals.extend(c.walls.iter().map(|&w| w as f64));
        }
    }
    vals.extend([
        sim.dt,
        sim.t_end,
        sim.sample_stride as f64,
        f64::from_bits(sim.seed),
        sim.init_scale,
        sim.average_window.0,
        sim.average_window.1,
    ]);
    fnv1a64_f64s(vals)
}

/// Integrates `i d/dt psi = H(psi) psi` with classical fixed-step RK4 from
/// seeded complex-normal initial data `psi_n(0) = (a_n + i b_n) f0`,
/// recording every `sample_stride`-th step (plus `t = 0`). Deterministic:
/// equal `(model, sim)` give bitwise-equal traces. Any `|psi_n| >`
/// [`BLOWUP_LIMIT`] (or non-finite) aborts with the failure time.
pub fn integrate(model: &GainModel, sim: &SimConfig) -> Result<TimeTrace> {
    sim.validate()?;
    let engine = Engine::new(model)?;
    let n = model.site_count();
    let dt = sim.dt;
    let steps = sim.step_count();

    let mut psi = noise_vector(sim.seed, n, sim.init_scale);
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();

    let mut times = Vec::with_capacity(sim.sample_count());
    let mut fields = Vec::with_capacity(sim.sample_count());
    times.push(0.0);
    fields.push(psi.clone());

    for step in 0..steps {
        engine.rhs_into(&mut k1, &psi);
        for m in 0..n {
            stage[m] = psi[m] + k1[m] * (0.5 * dt);
        }
        engine.rhs_into(&mut k2, &stage);
        for m in 0..n {
            stage[m] = psi[m] + k2[m] * (0.5 * dt);
        }
        engine.rhs_into(&mut k3, &stage);
        for m in 0..n {
            stage[m] = psi[m] + k3[m] * dt;
        }
        engine.rhs_into(&mut k4, &stage);
        for m in 0..n {
            psi[m] += (k1[m] + (k2[m] + k3[m]) * 2.0 + k4[m]) * (dt / 6.0);
        }

        let t = (step + 1) as f64 * dt;
        for (site, z) in psi.iter().enumerate() {
            let a = z.norm_sqr();
            if !(a.is_finite() && a <= BLOWUP_LIMIT * BLOWUP_LIMIT) {
                return Err(Error::BlowUp { t, site });
            }
        }
        if (step + 1) % sim.sample_stride == 0 {
            times.push(t);
            fields.push(psi.clone());
        }
    }

    Ok(TimeTrace {
        times,
        fields,
        fingerprint: config_fingerprint(model, sim),
        dt,
        sample_stride: sim.sample_stride,
        average_window: sim.average_window,
    })
}

/// Laser output: per-site mean of `|psi_n|^2`, time-averaged over the
/// trace's window (equal outcoupling from each site, normalized power
/// units).
pub fn output_intensity(trace: &TimeTrace) -> Result<f64> {
    let idx = trace.window_samples()?;
    let n = trace.site_count().max(1);
    let mut acc = 0.0;
    for &s in &idx {
        acc += trace.fields[s].iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    }
    Ok(acc / idx.len() as f64)
}

/// Shared state for windowed spectra: the window's sample indices, the Hann
/// taper, the transform plan, and each bin's detuning in natural FFT order.
struct WindowDft {
    idx: Vec<usize>,
    taper: Vec<f64>,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    omegas: Vec<f64>,
}

impl WindowDft {
    fn new(trace: &TimeTrace) -> Result<Self> {
        let idx = trace.window_samples()?;
        let m = idx.len();
        if m < 8 {
            return Err(Error::InvalidInput(format!(
                "window holds only {m} samples; need at least 8 for a spectrum"
            )));
        }
        let taper: Vec<f64> = (0..m)
            .map(|s| 0.5 * (1.0 - (TAU * s as f64 / (m - 1) as f64).cos()))
            .collect();
        let sample_dt = trace.dt * trace.sample_stride as f64;
        // Bin j of an inverse-direction transform carries the kernel
        // e^{+2 pi i j s / m}; folding j past m/2 to j - m gives the
        // negative detunings.
        let omegas: Vec<f64> = (0..m)
            .map(|j| {
                let signed = if j <= (m - 1) / 2 { j as i64 } else { j as i64 - m as i64 };
                TAU * signed as f64 / (m as f64 * sample_dt)
            })
            .collect();
        let fft = rustfft::FftPlanner::new().plan_fft_inverse(m);
        Ok(Self { idx, taper, fft, omegas })
    }

    /// Unnormalized spectral power of one site, natural bin order. The
    /// kernel is `e^{+i omega (t - t0)}`; the dropped global phase
    /// `e^{+i omega t0}` has unit modulus, so the power matches the
    /// absolute-time transform `|sum_s x_s e^{+i omega t_s}|^2`.
    fn site_power(&self, trace: &TimeTrace, site: usize) -> Vec<f64> {
        let mut buf: Vec<Complex64> = self
            .idx
            .iter()
            .zip(&self.taper)
            .map(|(&i, &w)| trace.fields[i][site] * w)
            .collect();
        self.fft.process(&mut buf);
        buf.iter().map(|x| x.norm_sqr()).collect()
    }

    /// Pairs powers with detunings, sorts by detuning, normalizes peak to 1.
    fn assemble(&self, mut power: Vec<f64>) -> Vec<(f64, f64)> {
        let peak = power.iter().copied().fold(0.0f64, f64::max);
        if peak > 0.0 {
            for p in &mut power {
                *p /= peak;
            }
        }
        let mut spectrum: Vec<(f64, f64)> =
            self.omegas.iter().copied().zip(power).collect();
        spectrum.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        spectrum
    }
}

/// Hann-tapered DFT of `psi_site(t)` over the trace's window, returned as
/// `(omega, power)` pairs in ascending detuning with peak power normalized
/// to 1. The transform uses `e^{+i omega t}`, so a stationary mode
/// `psi ~ e^{-iEt}` appears at `omega = Re E`.
pub fn emission_spectrum(trace: &TimeTrace, site: usize) -> Result<Vec<(f64, f64)>> {
    if site >= trace.site_count() {
        return Err(Error::InvalidInput(format!(
            "site {site} outside the {}-site chain",
            trace.site_count()
        )));
    }
    let dft = WindowDft::new(trace)?;
    let power = dft.site_power(trace, site);
    Ok(dft.assemble(power))
}

/// Total emission spectrum: per-site spectral power summed over the whole
/// chain, then peak-normalized. Same bins and taper as
/// [`emission_spectrum`]. With equal outcoupling from each site this is the
/// spectrum of the array's collected output, and it resolves simultaneously
/// lasing modes even when they occupy disjoint regions of the chain.
pub fn total_emission_spectrum(trace: &TimeTrace) -> Result<Vec<(f64, f64)>> {
    if trace.site_count() == 0 {
        return Err(Error::InvalidInput("trace has no sites".into()));
    }
    let dft = WindowDft::new(trace)?;
    let mut total = vec![0.0; dft.omegas.len()];
    for site in 0..trace.site_count() {
        for (acc, p) in total.iter_mut().zip(dft.site_power(trace, site)) {
            *acc += p;
        }
    }
    Ok(dft.assemble(total))
}

/// Indices of spectral peaks: local maxima whose power reaches
/// [`PEAK_FRACTION`] of the strongest bin.
pub fn spectral_peaks(spectrum: &[(f64, f64)]) -> Vec<usize> {
    let max = spectrum.iter().map(|p| p.1).fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = PEAK_FRACTION * max;
    (0..spectrum.len())
        .filter(|&j| {
            let p = spectrum[j].1;
            p >= floor
                && (j == 0 || p > spectrum[j - 1].1)
                && (j + 1 == spectrum.len() || p >= spectrum[j + 1].1)
        })
        .collect()
}

/// Lasing regime of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeClass {
    BelowThreshold,
    SingleMode,
    MultiMode,
}

impl std::fmt::Display for ModeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeClass::BelowThreshold => write!(f, "below-threshold"),
            ModeClass::SingleMode => write!(f, "single-mode"),
            ModeClass::MultiMode => write!(f, "multi-mode"),
        }
    }
}

/// Classification rule: below threshold when `i_out <` [`INTENSITY_FLOOR`];
/// single-mode when exactly one spectral peak passes the
/// [`PEAK_FRACTION`] rule; multi-mode otherwise. Pure in its inputs, so a
/// report's class is reproducible from its stored spectrum.
pub fn classify_lasing(i_out: f64, spectrum: &[(f64, f64)]) -> ModeClass {
    if i_out < INTENSITY_FLOOR {
        return ModeClass::BelowThreshold;
    }
    match spectral_peaks(spectrum).len() {
        1 => ModeClass::SingleMode,
        _ => ModeClass::MultiMode,
    }
}

/// Summary of one laser run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LasingReport {
    /// Pump strength the run used.
    pub gamma_pump: f64,
    /// Time-averaged per-site output intensity.
    pub i_out: f64,
    /// Peak-normalized total emission spectrum (power summed over sites);
    /// the classification surface.
    pub spectrum: Vec<(f64, f64)>,
    pub mode_class: ModeClass,
    /// `|psi_n|^2` at the final sample.
    pub spatial_profile: Vec<f64>,
    /// Brightest site of the final profile (the lasing mode's anchor).
    pub probe_site: usize,
    /// Detuning of the strongest spectral peak, when any power is present.
    pub peak_omega: Option<f64>,
}

/// Runs one simulation and assembles intensity, the total emission
/// spectrum, classification, and the final spatial profile.
pub fn lasing_report(model: &GainModel, sim: &SimConfig) -> Result<LasingReport> {
    let trace = integrate(model, sim)?;
    let i_out = output_intensity(&trace)?;
    let profile = trace.final_intensity_profile();
    let probe_site = profile
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let spectrum = total_emission_spectrum(&trace)?;
    let mode_class = classify_lasing(i_out, &spectrum);
    let peak_omega = spectrum
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|p| p.1 > 0.0)
        .map(|p| p.0);
    Ok(LasingReport {
        gamma_pump: model.gamma_pump(),
        i_out,
        spectrum,
        mode_class,
        spatial_profile: profile,
        probe_site,
        peak_omega,
    })
}

/// Sweeps the pump strength, one independent run per value, in parallel.
/// Run `i` uses the seed stream `sim.seed + i` so ensemble members draw
/// independent initial noise; results keep the input order.
pub fn gamma_sweep(
    model: &GainModel,
    gammas: &[f64],
    sim: &SimConfig,
) -> Result<Vec<LasingReport>> {
    gammas
        .par_iter()
        .enumerate()
        .map(|(i, &g)| {
            let sim_i = SimConfig {
                seed: sim.seed.wrapping_add(i as u64),
                ..*sim
            };
            lasing_report(&model.with_gamma_pump(g), &sim_i)
        })
        .collect()
}

/// Linear lasing threshold: bisection on `Gamma` for `max_j Im E_j = 0` of
/// the small-signal Hamiltonian, to [`THRESHOLD_TOL`]. The bracket grows
/// from `Gamma = 0` by doubling; a bracket that never changes sign is an
/// error (the array never lases, or lases already at zero pump).
pub fn linear_threshold(model: &GainModel) -> Result<f64> {
    let gain_at = |g: f64| -> Result<f64> {
        max_imaginary_eigenvalue(&linearized_hamiltonian(&model.with_gamma_pump(g))?)
    };
    let mut lo = 0.0;
    let f_lo = gain_at(lo)?;
    if f_lo >= 0.0 {
        return Err(Error::NoThresholdBracket {
            lo,
            hi: lo,
            detail: format!("net gain {f_lo:.3e} is already non-negative at zero pump"),
        });
    }
    let mut hi = 1.0;
    while gain_at(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoThresholdBracket {
                lo,
                hi,
                detail: "no net gain up to pump strength 1e6".into(),
            });
        }
    }
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if gain_at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainSpec;
    use approx::assert_abs_diff_eq;

    fn rational(q: u32, p: u32) -> Rational {
        Rational::new(q, p).unwrap()
    }

    fn pump_fig_config(gamma_pump: f64) -> GainModel {
        GainModel::Pump(PumpModulatedConfig {
            gamma_pump,
            alpha: rational(3, 8),
            delta: 0.4 * PI,
            passive_loss: 3.0,
            lattice_size: 48,
        })
    }

    /// Two-domain lattice: nontrivial 3/8 on the left, trivial 1/4 on the
    /// right, 24 sites each.
    fn wall_lattice() -> LatticeSpec {
        LatticeSpec::new(vec![
            DomainSpec::new(
                ModulationSpec::new(1.5, rational(3, 8), 0.4 * PI).unwrap(),
                24,
            )
            .unwrap(),
            DomainSpec::new(
                ModulationSpec::new(1.5, rational(1, 4), -0.4 * PI).unwrap(),
                24,
            )
            .unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn pump_profile_matches_the_sine_extremes() {
        let m = ModulationSpec::new(1.0, rational(1, 4), 0.0).unwrap();
        assert_abs_diff_eq!(m.pump_profile(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.pump_profile(1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.pump_profile(3), 0.0, epsilon = 1e-15);
        let m = ModulationSpec::new(1.0, rational(3, 8), 0.4 * PI).unwrap();
        for n in 1..=16 {
            assert_abs_diff_eq!(m.pump_profile(n), m.pump_profile(n + 8), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_field_is_a_fixed_point() {
        let zero = vec![Complex64::new(0.0, 0.0); 48];
        for model in [pump_fig_config(3.6), loss_fig_config(0.6)] {
            let rhs = nonlinear_rhs(&zero, &model).unwrap();
            assert!(rhs.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn strong_fields_saturate_to_pure_loss() {
        let model = pump_fig_config(3.6);
        let psi = vec![Complex64::new(1.0e8, 0.0); 48];
        let rhs = nonlinear_rhs(&psi, &model).unwrap();
        // V_n -> -gamma: growth term reduces to -gamma psi plus hopping.
        for m in 0..48 {
            let mut hop = Complex64::new(0.0, 0.0);
            if m > 0 {
                hop += psi[m - 1];
            }
            if m < 47 {
                hop += psi[m + 1];
            }
            let expect = Complex64::new(0.0, -1.0) * hop - psi[m] * 3.0;
            assert!(
                (rhs[m] - expect).norm() <= 1e-6 * psi[m].norm(),
                "site {m}"
            );
        }
    }

    #[test]
    fn small_signal_limit_is_the_linear_lattice() {
        let model = pump_fig_config(3.3);
        let h = linearized_hamiltonian(&model).unwrap();
        let eps = 1e-8;
        let v = noise_vector(11, 48, 1.0);
        let psi: Vec<Complex64> = v.iter().map(|z| z * eps).collect();
        let rhs = nonlinear_rhs(&psi, &model).unwrap();
        for m in 0..48 {
            let mut hv = Complex64::new(0.0, 0.0);
            for j in 0..48 {
                hv += h[(m, j)] * v[j];
            }
            let lin = Complex64::new(0.0, -1.0) * hv * eps;
            assert!((rhs[m] - lin).norm() <= 1e-6 * eps, "site {m}");
        }
    }

    #[test]
    fn rhs_rejects_bad_input() {
        let model = pump_fig_config(3.6);
        assert!(matches!(
            nonlinear_rhs(&vec![Complex64::new(0.0, 0.0); 4], &model),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut psi = vec![Complex64::new(0.0, 0.0); 48];
        psi[3] = Complex64::new(f64::NAN, 0.0);
        assert!(nonlinear_rhs(&psi, &model).is_err());
    }

    #[test]
    fn unpumped_field_decays_away() {
        let model = pump_fig_config(0.0);
        let sim = SimConfig {
            t_end: 100.0,
            average_window: (50.0, 100.0),
            ..SimConfig::with_seed(5)
        };
        let trace = integrate(&model, &sim).unwrap();
        let norm0: f64 = trace.fields[0].iter().map(|z| z.norm_sqr()).sum();
        let norm1: f64 = trace.fields.last().unwrap().iter().map(|z| z.norm_sqr()).sum();
        assert!(norm1.sqrt() < 1e-8 * norm0.sqrt(), "{norm1} vs {norm0}");
    }

    #[test]
    fn traces_are_bitwise_deterministic() {
        let model = pump_fig_config(3.6);
        let sim = SimConfig {
            t_end: 20.0,
            average_window: (10.0, 20.0),
            ..SimConfig::with_seed(33)
        };
        let a = integrate(&model, &sim).unwrap();
        let b = integrate(&model, &sim).unwrap();
        assert_eq!(a.fields, b.fields);
        assert_eq!(a.fingerprint, b.fingerprint);
        let c = integrate(
            &model,
            &SimConfig {
                seed: 34,
                ..sim
            },
        )
        .unwrap();
        assert_ne!(a.fields[0], c.fields[0]);
        assert_ne!(a.fingerprint, c.fingerprint);
    }

    #[test]
    fn sample_layout_matches_the_contract() {
        let model = GainModel::Pump(PumpModulatedConfig {
            gamma_pump: 0.0,
            alpha: rational(1, 4),
            delta: 0.0,
            passive_loss: 1.0,
            lattice_size: 2,
        });
        let sim = SimConfig::with_seed(1);
        let trace = integrate(&model, &sim).unwrap();
        let expect = (sim.t_end / (sim.dt * sim.sample_stride as f64)).floor() as usize + 1;
        assert_eq!(trace.times.len(), expect);
        assert_eq!(trace.times.len(), sim.sample_count());
        assert_eq!(trace.fields.len(), expect);
        assert_eq!(trace.times[0], 0.0);
        assert_abs_diff_eq!(*trace.times.last().unwrap(), 5000.0, epsilon = 1e-9);
    }

    #[test]
    fn runaway_gain_reports_blow_up() {
        // A strongly negative offset is unsaturated net gain everywhere.
        let model = GainModel::Loss(LossModulatedConfig {
            gamma_pump: 1.0,
            loss_profile: vec![0.0; 8],
            offset: -50.0,
            hopping: 1.0,
            walls: vec![],
        });
        let sim = SimConfig {
            t_end: 10.0,
            average_window: (5.0, 10.0),
            ..SimConfig::with_seed(2)
        };
        match integrate(&model, &sim) {
            Err(Error::BlowUp { t, .. }) => assert!(t < 1.0, "blow-up at t = {t}"),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    fn synthetic_trace(samples: Vec<Vec<Complex64>>, sample_dt: f64, window: (f64, f64)) -> TimeTrace {
        let times = (0..samples.len()).map(|s| s as f64 * sample_dt).collect();
        TimeTrace {
            times,
            fields: samples,
            fingerprint: 0,
            dt: sample_dt,
            sample_stride: 1,
            average_window: window,
        }
    }

    #[test]
    fn output_intensity_on_synthetic_traces() {
        let zero = synthetic_trace(
            vec![vec![Complex64::new(0.0, 0.0); 4]; 101],
            1.0,
            (20.0, 100.0),
        );
        assert_eq!(output_intensity(&zero).unwrap(), 0.0);

        let c = Complex64::new(0.3, 0.4); // |c| = 0.5
        let constant = synthetic_trace(vec![vec![c; 4]; 101], 1.0, (20.0, 100.0));
        assert_abs_diff_eq!(output_intensity(&constant).unwrap(), 0.25, epsilon = 1e-12);

        let short = synthetic_trace(vec![vec![c; 4]; 11], 1.0, (20.0, 100.0));
        assert!(matches!(
            output_intensity(&short),
            Err(Error::WindowNotCovered { .. })
        ));
    }

    #[test]
    fn pure_tone_peaks_at_its_detuning() {
        let sample_dt = 0.5;
        let omega0 = 0.7;
        let samples: Vec<Vec<Complex64>> = (0..=2000)
            .map(|s| {
                let t = s as f64 * sample_dt;
                vec![Complex64::from_polar(1.0, -omega0 * t)]
            })
            .collect();
        let trace = synthetic_trace(samples, sample_dt, (0.0, 1000.0));
        let spec = emission_spectrum(&trace, 0).unwrap();
        let (omega_peak, power) = *spec
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(power, 1.0);
        let bin = TAU / (spec.len() as f64 * sample_dt);
        assert!(
            (omega_peak - omega0).abs() <= bin,
            "peak at {omega_peak}, want {omega0}"
        );
        assert!(matches!(
            emission_spectrum(&trace, 3),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn total_spectrum_sees_spatially_disjoint_tones() {
        // Two equal-power tones living on different sites: each per-site
        // spectrum shows a single line, but the summed spectrum resolves
        // both, which is what the mode count must be based on.
        let sample_dt = 0.5;
        let (w0, w1) = (0.9, -1.7);
        let samples: Vec<Vec<Complex64>> = (0..=2000)
            .map(|s| {
                let t = s as f64 * sample_dt;
                vec![
                    Complex64::from_polar(1.0, -w0 * t),
                    Complex64::from_polar(1.0, -w1 * t),
                ]
            })
            .collect();
        let trace = synthetic_trace(samples, sample_dt, (0.0, 1000.0));

        assert_eq!(spectral_peaks(&emission_spectrum(&trace, 0).unwrap()).len(), 1);
        assert_eq!(spectral_peaks(&emission_spectrum(&trace, 1).unwrap()).len(), 1);

        let total = total_emission_spectrum(&trace).unwrap();
        let peaks = spectral_peaks(&total);
        assert_eq!(peaks.len(), 2, "total spectrum must carry both lines");
        let mut got: Vec<f64> = peaks.iter().map(|&j| total[j].0).collect();
        got.sort_by(f64::total_cmp);
        let bin = TAU / (total.len() as f64 * sample_dt);
        assert!((got[0] - w1).abs() <= bin && (got[1] - w0).abs() <= bin);
        assert_eq!(classify_lasing(0.5, &total), ModeClass::MultiMode);
    }

    #[test]
    fn classification_follows_the_peak_rule() {
        let single = vec![(-1.0, 0.0), (-0.5, 0.02), (0.0, 1.0), (0.5, 0.03), (1.0, 0.0)];
        assert_eq!(classify_lasing(0.5, &single), ModeClass::SingleMode);
        assert_eq!(classify_lasing(1e-9, &single), ModeClass::BelowThreshold);
        let multi = vec![(-1.0, 0.0), (-0.5, 0.4), (0.0, 0.0), (0.5, 1.0), (1.0, 0.0)];
        assert_eq!(classify_lasing(0.5, &multi), ModeClass::MultiMode);
        // Secondary bumps below 10% do not count as modes.
        let faint = vec![(-1.0, 0.0), (-0.5, 0.08), (0.0, 0.0), (0.5, 1.0), (1.0, 0.0)];
        assert_eq!(classify_lasing(0.5, &faint), ModeClass::SingleMode);
        assert_eq!(spectral_peaks(&multi), vec![1, 3]);
    }

    fn loss_fig_config(gamma_pump: f64) -> GainModel {
        GainModel::Loss(LossModulatedConfig::from_lattice(&wall_lattice(), gamma_pump).unwrap())
    }

    #[test]
    fn offset_rule_pins_the_linear_threshold_to_half() {
        let lattice = wall_lattice();
        let cfg = LossModulatedConfig::from_lattice(&lattice, 0.0).unwrap();
        assert!(cfg.offset_deviation(&lattice).unwrap() < 1e-12);
        assert_eq!(cfg.walls, vec![24]);
        // The wall mode has positive imaginary energy, so the offset
        // exceeds the bare 1/2.
        assert!(cfg.offset > 0.5);

        let model = GainModel::Loss(cfg.clone());
        let th = linear_threshold(&model).unwrap();
        assert_abs_diff_eq!(th, 0.5, epsilon = 2.0 * THRESHOLD_TOL);

        // Uniform extra loss shifts the threshold one-for-one.
        let mut shifted = cfg;
        shifted.offset += 0.1;
        let th = linear_threshold(&GainModel::Loss(shifted)).unwrap();
        assert_abs_diff_eq!(th, 0.6, epsilon = 2.0 * THRESHOLD_TOL);
    }

    #[test]
    fn pump_threshold_brackets_a_sign_change() {
        let model = pump_fig_config(0.0);
        let th = linear_threshold(&model).unwrap();
        assert!(th > 0.0 && th < 10.0, "threshold {th}");
        let below = max_imaginary_eigenvalue(
            &linearized_hamiltonian(&model.with_gamma_pump(th - 1e-3)).unwrap(),
        )
        .unwrap();
        let above = max_imaginary_eigenvalue(
            &linearized_hamiltonian(&model.with_gamma_pump(th + 1e-3)).unwrap(),
        )
        .unwrap();
        assert!(below < 0.0 && above > 0.0, "{below} vs {above}");
    }

    #[test]
    fn never_lasing_config_is_rejected() {
        // Non-finite offsets are caught by validation.
        let model = GainModel::Loss(LossModulatedConfig {
            gamma_pump: 0.0,
            loss_profile: vec![0.0; 4],
            offset: f64::INFINITY,
            hopping: 1.0,
            walls: vec![],
        });
        assert!(model.validate().is_err());
        // Already lasing at zero pump: negative offset gives net gain.
        let model = GainModel::Loss(LossModulatedConfig {
            gamma_pump: 0.0,
            loss_profile: vec![0.0; 4],
            offset: -1.0,
            hopping: 1.0,
            walls: vec![],
        });
        assert!(matches!(
            linear_threshold(&model),
            Err(Error::NoThresholdBracket { .. })
        ));
    }

    #[test]
    fn single_mode_run_selects_the_zero_mode() {
        // Full-length pump-modulated run just above the single-mode
        // threshold: one peak pinned to zero detuning, boundary-localized
        // profile, and the saturated net gain clamps to zero.
        let model = pump_fig_config(3.6);
        let sim = SimConfig::with_seed(7);
        let trace = integrate(&model, &sim).unwrap();

        let i_out = output_intensity(&trace).unwrap();
        assert!(i_out > 1e-3, "i_out = {i_out}");

        let profile = trace.final_intensity_profile();
        let probe = profile
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let edge_dist = probe.min(47 - probe);
        assert!(edge_dist <= 2, "profile anchored at site {probe}");

        let spectrum = total_emission_spectrum(&trace).unwrap();
        assert_eq!(classify_lasing(i_out, &spectrum), ModeClass::SingleMode);

        let (t1, t2) = sim.average_window;
        let resolution = 2.0 * TAU / (t2 - t1);
        let omega = spectrum
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        assert!(omega.abs() < 2.0 * resolution, "peak detuning {omega}");

        // Gain clamping at the final field.
        let h = instantaneous_hamiltonian(&model, trace.fields.last().unwrap()).unwrap();
        let gain = max_imaginary_eigenvalue(&h).unwrap();
        assert!(gain.abs() < 1e-2, "net gain {gain}");
    }
}
