//! Lattice construction: sinusoidal gain/loss modulations, open chains with
//! optional domain walls, Bloch cells in the periodic gauge, and the
//! sublattice symmetry operator `C = diag(+1, -1, +1, ...)`.
//!
//! Tight-binding convention: nearest-neighbour hopping `t` (fixed to 1, the
//! energy unit) plus a purely imaginary on-site term `i V_n` with
//! `V_n = V sin(2 pi (q/p) n + delta)`. Chain sites are enumerated from
//! `n = 1`, so the first site carries `V sin(2 pi q/p + delta)`; for
//! `alpha = 1/4` the first four sites then realize the gain/loss sequence
//! `{g1, -g2, -g1, g2}` with `g1 = V cos(delta)`, `g2 = V sin(delta)`. Site
//! phases `(q n) mod p` are reduced in integer arithmetic so the potential is
//! exactly `p`-periodic and hits quarter-period values (0, +-V) without
//! rounding error.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Greatest common divisor (Euclid).
fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `(sin, cos)` of `2 pi f` for a turn fraction `f`.
///
/// The fraction is reduced to a quarter turn first, so multiples of 1/4
/// (where the sine and cosine are 0 or +-1) are evaluated exactly. This is
/// what makes sublattice-symmetry residuals vanish identically instead of
/// merely to rounding.
fn sin_cos_two_pi(f: f64) -> (f64, f64) {
    let f = f.rem_euclid(1.0);
    let quadrant = (4.0 * f).floor();
    let r = f - 0.25 * quadrant;
    let (s, c) = (TAU * r).sin_cos();
    match quadrant as u32 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// Reduced rational modulation frequency `alpha = q/p` with `0 < q < p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRational", into = "RawRational")]
pub struct Rational {
    q: u32,
    p: u32,
}

/// Serialized form of [`Rational`]; deserialization revalidates.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRational {
    q: u32,
    p: u32,
}

impl TryFrom<RawRational> for Rational {
    type Error = Error;

    fn try_from(raw: RawRational) -> Result<Self> {
        Rational::new(raw.q, raw.p)
    }
}

impl From<Rational> for RawRational {
    fn from(r: Rational) -> Self {
        Self { q: r.q, p: r.p }
    }
}

impl Rational {
    /// Builds `q/p`, requiring `0 < q < p` and `gcd(q, p) = 1`. The
    /// denominator is the modulation period and the Bloch cell size, so a
    /// reducible fraction (whose true period is smaller) is rejected rather
    /// than silently rewritten.
    pub fn new(q: u32, p: u32) -> Result<Self> {
        if q == 0 || q >= p {
            return Err(Error::InvalidInput(format!(
                "rational frequency must satisfy 0 < q < p, got {q}/{p}"
            )));
        }
        if gcd(q, p) != 1 {
            return Err(Error::InvalidInput(format!(
                "rational frequency {q}/{p} is reducible; pass the reduced form"
            )));
        }
        Ok(Self { q, p })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Denominator: modulation period and Bloch cell dimension.
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn value(&self) -> f64 {
        f64::from(self.q) / f64::from(self.p)
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.q, self.p)
    }
}

/// On-site modulation `V_n = V sin(2 pi alpha n + delta)`.
///
/// Stored in normal form: `V >= 0` (a negative amplitude is absorbed as
/// `delta -> delta + pi`) and `delta` wrapped into `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModulation", into = "RawModulation")]
pub struct ModulationSpec {
    v: f64,
    alpha: Rational,
    delta: f64,
}

/// Wire format for [`ModulationSpec`] (flat keys `V`, `q`, `p`, `delta`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModulation {
    #[serde(rename = "V")]
    v: f64,
    q: u32,
    p: u32,
    delta: f64,
}

impl TryFrom<RawModulation> for ModulationSpec {
    type Error = Error;
    fn try_from(raw: RawModulation) -> Result<Self> {
        ModulationSpec::new(raw.v, Rational::new(raw.q, raw.p)?, raw.delta)
    }
}

impl From<ModulationSpec> for RawModulation {
    fn from(m: ModulationSpec) -> Self {
        RawModulation {
            v: m.v,
            q: m.alpha.q(),
            p: m.alpha.p(),
            delta: m.delta,
        }
    }
}

impl ModulationSpec {
    pub fn new(v: f64, alpha: Rational, delta: f64) -> Result<Self> {
        if !v.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "modulation parameters must be finite, got V = {v}, delta = {delta}"
            )));
        }
        let (v, delta) = if v < 0.0 { (-v, delta + PI) } else { (v, delta) };
        Ok(Self {
            v,
            alpha,
            delta: delta.rem_euclid(TAU),
        })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn alpha(&self) -> Rational {
        self.alpha
    }

    /// Phase offset, normalized into `[0, 2 pi)`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Returns a copy with a different phase offset (re-normalized).
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.v, self.alpha, delta)
    }

    /// `sin(2 pi alpha n + delta)`, with the rational part of the angle
    /// reduced exactly: `(q n) mod p` in integers, then one quadrant-folded
    /// sine/cosine plus the angle-addition identity for `delta`.
    pub fn profile(&self, n: i64) -> f64 {
        let p = i64::from(self.alpha.p);
        let r = (i64::from(self.alpha.q) * n).rem_euclid(p);
        let (s, c) = sin_cos_two_pi(r as f64 / p as f64);
        let (sd, cd) = self.delta.sin_cos();
        s * cd + c * sd
    }

    /// On-site modulation strength `V_n = V sin(2 pi alpha n + delta)`.
    pub fn potential_value(&self, n: i64) -> f64 {
        self.v * self.profile(n)
    }

    /// Normalized pump weight `(1 + sin(2 pi alpha n + delta)) / 2` in
    /// `[0, 1]`. Ignores the amplitude `V`; the overall pump strength is a
    /// separate knob in the field dynamics.
    pub fn pump_profile(&self, n: i64) -> f64 {
        0.5 * (1.0 + self.profile(n))
    }
}

/// One uniform stretch of lattice: a modulation pattern and a site count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain", into = "RawDomain")]
pub struct DomainSpec {
    modulation: ModulationSpec,
    length: usize,
}

/// Wire format for [`DomainSpec`]: the modulation keys plus `length`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    #[serde(rename = "V")]
    v: f64,
    q: u32,
    p: u32,
    delta: f64,
    length: usize,
}

impl TryFrom<RawDomain> for DomainSpec {
    type Error = Error;
    fn try_from(raw: RawDomain) -> Result<Self> {
        let m = ModulationSpec::new(raw.v, Rational::new(raw.q, raw.p)?, raw.delta)?;
        DomainSpec::new(m, raw.length)
    }
}

impl From<DomainSpec> for RawDomain {
    fn from(d: DomainSpec) -> Self {
        RawDomain {
            v: d.modulation.v(),
            q: d.modulation.alpha().q(),
            p: d.modulation.alpha().p(),
            delta: d.modulation.delta(),
            length: d.length,
        }
    }
}

impl DomainSpec {
    pub fn new(modulation: ModulationSpec, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidInput("domain length must be >= 1".into()));
        }
        Ok(Self { modulation, length })
    }

    pub fn modulation(&self) -> &ModulationSpec {
        &self.modulation
    }

    pub fn length(&self) -> usize {
        self.length
    }
}

/// How site indices are fed into each domain's modulation.
///
/// `DomainLocal` restarts the modulation index at 1 on every domain, which is
/// what realizes a sharp phase/frequency domain wall. `Global` threads the
/// absolute (1-based) site index through all domains, so two adjacent domains
/// with the same modulation join seamlessly into one uniform chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SiteIndexing {
    #[default]
    DomainLocal,
    Global,
}

/// An open chain assembled from one or more modulation domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLattice", into = "RawLattice")]
pub struct LatticeSpec {
    domains: Vec<DomainSpec>,
    hopping: f64,
}

/// Wire format for [`LatticeSpec`] (keys `domains`, `t`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    domains: Vec<DomainSpec>,
    t: f64,
}

impl TryFrom<RawLattice> for LatticeSpec {
    type Error = Error;
    fn try_from(raw: RawLattice) -> Result<Self> {
        let lat = LatticeSpec::new(raw.domains)?;
        if !(raw.t.is_finite() && raw.t > 0.0) {
            return Err(Error::InvalidInput(format!(
                "hopping t must be finite and positive, got {}",
                raw.t
            )));
        }
        Ok(LatticeSpec {
            hopping: raw.t,
            ..lat
        })
    }
}

impl From<LatticeSpec> for RawLattice {
    fn from(l: LatticeSpec) -> Self {
        RawLattice {
            domains: l.domains,
            t: l.hopping,
        }
    }
}

impl LatticeSpec {
    /// Multi-domain chain with unit hopping.
    pub fn new(domains: Vec<DomainSpec>) -> Result<Self> {
        if domains.is_empty() {
            return Err(Error::InvalidInput("lattice needs at least one domain".into()));
        }
        let total: usize = domains.iter().map(|d| d.length).sum();
        if total < 2 {
            return Err(Error::InvalidInput(
                "lattice needs at least two sites".into(),
            ));
        }
        Ok(Self {
            domains,
            hopping: 1.0,
        })
    }

    /// Single-domain chain of `length` sites.
    pub fn uniform(modulation: ModulationSpec, length: usize) -> Result<Self> {
        Self::new(vec![DomainSpec::new(modulation, length)?])
    }

    pub fn domains(&self) -> &[DomainSpec] {
        &self.domains
    }

    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    pub fn total_sites(&self) -> usize {
        self.domains.iter().map(|d| d.length).sum()
    }

    /// Global indices of the first site of every domain after the first:
    /// each is the left-most site across a domain wall.
    pub fn wall_indices(&self) -> Vec<usize> {
        let mut walls = Vec::new();
        let mut offset = 0;
        for (i, d) in self.domains.iter().enumerate() {
            if i > 0 {
                walls.push(offset);
            }
            offset += d.length;
        }
        walls
    }

    /// Per-site modulation index and owning domain, in site order. Modulation
    /// indices count from 1 (the first site of a fresh chain or domain is
    /// `n = 1`).
    fn site_iter(&self, indexing: SiteIndexing) -> impl Iterator<Item = (&DomainSpec, i64)> {
        self.domains.iter().flat_map(move |d| {
            (0..d.length).map(move |local| (d, local))
        }).enumerate().map(move |(global, (d, local))| {
            let n = match indexing {
                SiteIndexing::DomainLocal => local as i64 + 1,
                SiteIndexing::Global => global as i64 + 1,
            };
            (d, n)
        })
    }

    /// `V_n` for every site.
    pub fn site_potentials(&self, indexing: SiteIndexing) -> Vec<f64> {
        self.site_iter(indexing)
            .map(|(d, n)| d.modulation.potential_value(n))
            .collect()
    }

    /// Normalized pump weight for every site (see
    /// [`ModulationSpec::pump_profile`]).
    pub fn pump_profiles(&self, indexing: SiteIndexing) -> Vec<f64> {
        self.site_iter(indexing)
            .map(|(d, n)| d.modulation.pump_profile(n))
            .collect()
    }

    /// Dense open-boundary Hamiltonian: `H[n][n] = i V_n`,
    /// `H[n][n+1] = H[n+1][n] = t`.
    pub fn open_hamiltonian(&self, indexing: SiteIndexing) -> Array2<Complex64> {
        let n = self.total_sites();
        let mut h = Array2::zeros((n, n));
        for (site, v) in self.site_potentials(indexing).into_iter().enumerate() {
            h[(site, site)] = Complex64::new(0.0, v);
        }
        let t = Complex64::new(self.hopping, 0.0);
        for site in 0..n - 1 {
            h[(site, site + 1)] = t;
            h[(site + 1, site)] = t;
        }
        h
    }
}

/// Bloch Hamiltonian of the infinite chain with modulation `m`, a `p x p`
/// matrix in the periodic gauge: intra-cell bonds carry `t`, the wrap-around
/// bond carries `t e^{+ik}` (row `p-1`, column `0`) and its conjugate, and
/// the diagonal is `i V_n` for the cell sites `n = 1..=p` (the same 1-based
/// enumeration as the open chain).
///
/// `k` is reduced into `[0, 2 pi)` first, so the gauge is literally
/// periodic: `H(k + 2 pi)` matches `H(k)` up to the rounding of the shifted
/// argument itself. At `V = 0` the spectrum is the folded free band
/// `2 t cos((k + 2 pi m) / p)`.
pub fn bloch_hamiltonian(m: &ModulationSpec, k: f64) -> Array2<Complex64> {
    let p = m.alpha().p() as usize;
    let k = k.rem_euclid(TAU);
    let t = Complex64::new(1.0, 0.0);
    let phase = Complex64::from_polar(1.0, k);
    let mut h = Array2::zeros((p, p));
    for n in 0..p {
        h[(n, n)] = Complex64::new(0.0, m.potential_value(n as i64 + 1));
    }
    for n in 0..p - 1 {
        h[(n, n + 1)] += t;
        h[(n + 1, n)] += t;
    }
    h[(p - 1, 0)] += t * phase;
    h[(0, p - 1)] += t * phase.conj();
    h
}

/// Sublattice (particle-hole-like) symmetry operator
/// `C = diag(+1, -1, +1, -1, ...)` on an even number of sites.
///
/// For any chain built here, `C H* C = -H` holds entry by entry: real
/// hoppings connect opposite signs, and the purely imaginary diagonal flips
/// sign under conjugation. In momentum space the same operator gives
/// `C H_k^dagger C = -H_k`. Both residuals are exposed for verification.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOperator {
    signs: Vec<f64>,
}

impl SymmetryOperator {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::OddDimension(dim));
        }
        Ok(Self {
            signs: (0..dim)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn sign(&self, i: usize) -> f64 {
        self.signs[i]
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// `C v*` (the antiunitary action on a state vector).
    pub fn apply_conj(&self, v: &ArrayView1<Complex64>) -> Array1<Complex64> {
        Array1::from_iter(
            v.iter()
                .zip(&self.signs)
                .map(|(x, s)| Complex64::new(s * x.re, -s * x.im)),
        )
    }

    /// Max-norm residual of the real-space identity: `||C H* C + H||_max`.
    pub fn ct_residual_finite(&self, h: &ArrayView2<Complex64>) -> Result<f64> {
        self.check_dim(h)?;
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let r = (self.signs[i] * self.signs[j] * h[(i, j)].conj() + h[(i, j)]).norm();
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }

    /// Max-norm residual of the momentum-space identity:
    /// `||C H_k^dagger C + H_k||_max`.
    pub fn ct_residual_bloch(&self, hk: &ArrayView2<Complex64>) -> Result<f64> {
        self.check_dim(hk)?;
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let r = (self.signs[i] * self.signs[j] * hk[(j, i)].conj() + hk[(i, j)]).norm();
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }

    fn check_dim(&self, h: &ArrayView2<Complex64>) -> Result<()> {
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch {
                left: h.nrows(),
                right: h.ncols(),
            });
        }
        if h.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: h.nrows(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn modulation(v: f64, q: u32, p: u32, delta: f64) -> ModulationSpec {
        ModulationSpec::new(v, Rational::new(q, p).unwrap(), delta).unwrap()
    }

    #[test]
    fn rational_validation() {
        assert!(Rational::new(1, 4).is_ok());
        assert!(Rational::new(3, 8).is_ok());
        assert!(Rational::new(5, 12).is_ok());
        assert!(Rational::new(0, 4).is_err());
        assert!(Rational::new(4, 4).is_err());
        assert!(Rational::new(5, 4).is_err());
        assert!(Rational::new(2, 8).is_err(), "reducible fractions rejected");
    }

    #[test]
    fn quarter_period_values_are_exact() {
        // alpha = 1/4, delta = 0: the pattern (0, V, 0, -V) must be exact,
        // not merely close, because the symmetry residuals rely on it.
        let m = modulation(1.3, 1, 4, 0.0);
        assert_eq!(m.potential_value(0), 0.0);
        assert_eq!(m.potential_value(1), 1.3);
        assert_eq!(m.potential_value(2), 0.0);
        assert_eq!(m.potential_value(3), -1.3);
        assert_eq!(m.potential_value(4), 0.0);
        // Pump weights at the same points: (1 + sin)/2 in {1/2, 1, 1/2, 0}.
        assert_eq!(m.pump_profile(0), 0.5);
        assert_eq!(m.pump_profile(1), 1.0);
        assert_eq!(m.pump_profile(3), 0.0);
    }

    #[test]
    fn potential_matches_direct_formula() {
        let m = modulation(1.4, 3, 8, 0.4 * PI);
        for n in 0..32 {
            let direct = 1.4 * (TAU * 3.0 / 8.0 * n as f64 + 0.4 * PI).sin();
            assert_abs_diff_eq!(m.potential_value(n), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn potential_is_exactly_periodic() {
        let m = modulation(1.4, 3, 8, 0.4 * PI);
        for n in 0..16 {
            // Bitwise equality: the reduced phase (q n) mod p is identical.
            assert_eq!(m.potential_value(n), m.potential_value(n + 8));
        }
    }

    #[test]
    fn negative_amplitude_normalizes_to_phase_shift() {
        let a = modulation(-1.4, 3, 8, 0.3);
        let b = modulation(1.4, 3, 8, 0.3 + PI);
        assert_eq!(a, b);
        assert_eq!(a.v(), 1.4);
    }

    #[test]
    fn delta_wraps_into_principal_range() {
        let m = modulation(1.0, 1, 4, -0.5);
        assert!((0.0..TAU).contains(&m.delta()));
        assert_abs_diff_eq!(m.delta(), TAU - 0.5, epsilon = 1e-15);
        let m = modulation(1.0, 1, 4, TAU);
        assert_eq!(m.delta(), 0.0);
    }

    #[test]
    fn wall_indices_follow_domain_layout() {
        let m = modulation(1.5, 3, 8, 0.4 * PI);
        let lat = LatticeSpec::new(vec![
            DomainSpec::new(m, 24).unwrap(),
            DomainSpec::new(m, 24).unwrap(),
        ])
        .unwrap();
        assert_eq!(lat.total_sites(), 48);
        assert_eq!(lat.wall_indices(), vec![24]);

        let lat3 = LatticeSpec::new(vec![
            DomainSpec::new(m, 5).unwrap(),
            DomainSpec::new(m, 7).unwrap(),
            DomainSpec::new(m, 9).unwrap(),
        ])
        .unwrap();
        assert_eq!(lat3.wall_indices(), vec![5, 12]);
    }

    #[test]
    fn open_hamiltonian_layout() {
        let m = modulation(2.0, 1, 4, 0.0);
        let lat = LatticeSpec::uniform(m, 4).unwrap();
        let h = lat.open_hamiltonian(SiteIndexing::DomainLocal);
        // Sites n = 1..4: V_n = 2 sin(pi n / 2) = (2, 0, -2, 0), exact.
        assert_eq!(h[(0, 0)], Complex64::new(0.0, 2.0));
        assert_eq!(h[(1, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(h[(2, 2)], Complex64::new(0.0, -2.0));
        assert_eq!(h[(3, 3)], Complex64::new(0.0, 0.0));
        for i in 0..3 {
            assert_eq!(h[(i, i + 1)], Complex64::new(1.0, 0.0));
            assert_eq!(h[(i + 1, i)], Complex64::new(1.0, 0.0));
        }
        assert_eq!(h[(0, 2)], Complex64::new(0.0, 0.0));
        assert_eq!(h[(3, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn quarter_frequency_chain_realizes_the_four_site_gain_loss_cell() {
        // For alpha = 1/4 the first unit cell must carry the gain/loss
        // sequence {g1, -g2, -g1, g2} with g1 = V cos(delta),
        // g2 = V sin(delta) -- the standard four-site PT-laser pattern.
        let (v, delta) = (1.5, 0.37);
        let m = modulation(v, 1, 4, delta);
        let lat = LatticeSpec::uniform(m, 8).unwrap();
        let pot = lat.site_potentials(SiteIndexing::DomainLocal);
        let (g1, g2) = (v * delta.cos(), v * delta.sin());
        for (cell, expected) in [(0, [g1, -g2, -g1, g2]), (1, [g1, -g2, -g1, g2])] {
            for (i, e) in expected.iter().enumerate() {
                assert_abs_diff_eq!(pot[4 * cell + i], *e, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn domain_local_indexing_restarts_the_pattern() {
        let m = modulation(1.0, 3, 8, 0.4 * PI);
        let lat = LatticeSpec::new(vec![
            DomainSpec::new(m, 8).unwrap(),
            DomainSpec::new(m, 8).unwrap(),
        ])
        .unwrap();
        let local = lat.site_potentials(SiteIndexing::DomainLocal);
        // Restarted pattern: sites 8..16 repeat sites 0..8.
        assert_eq!(&local[..8], &local[8..]);

        // Global indexing across identical domains is the seamless chain.
        let global = lat.site_potentials(SiteIndexing::Global);
        let seamless = LatticeSpec::uniform(m, 16)
            .unwrap()
            .site_potentials(SiteIndexing::DomainLocal);
        assert_eq!(global, seamless);
    }

    #[test]
    fn finite_ct_residual_vanishes_identically() {
        let m = modulation(1.4, 3, 8, 0.4 * PI);
        let lat = LatticeSpec::uniform(m, 16).unwrap();
        let h = lat.open_hamiltonian(SiteIndexing::DomainLocal);
        let c = SymmetryOperator::new(16).unwrap();
        assert_eq!(c.ct_residual_finite(&h.view()).unwrap(), 0.0);
    }

    #[test]
    fn real_onsite_term_breaks_the_symmetry() {
        let m = modulation(1.4, 3, 8, 0.4 * PI);
        let lat = LatticeSpec::uniform(m, 16).unwrap();
        let mut h = lat.open_hamiltonian(SiteIndexing::DomainLocal);
        h[(3, 3)] += Complex64::new(0.05, 0.0);
        let c = SymmetryOperator::new(16).unwrap();
        assert!(c.ct_residual_finite(&h.view()).unwrap() > 0.04);
    }

    #[test]
    fn bloch_gauge_and_symmetry() {
        let m = modulation(1.4, 3, 8, 0.7);
        let k = 0.9;
        let h = bloch_hamiltonian(&m, k);
        assert_eq!(h[(7, 0)], Complex64::from_polar(1.0, k));
        assert_eq!(h[(0, 7)], Complex64::from_polar(1.0, k).conj());
        // Periodicity of the gauge: the only deviation is the rounding of
        // the shifted argument k + 2 pi itself.
        let h2 = bloch_hamiltonian(&m, k + TAU);
        for (a, b) in h.iter().zip(h2.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
        }
        // Momentum-space sublattice identity, exact by construction.
        let c = SymmetryOperator::new(8).unwrap();
        assert_eq!(c.ct_residual_bloch(&h.view()).unwrap(), 0.0);
    }

    #[test]
    fn bloch_handles_two_site_cell() {
        let m = modulation(0.5, 1, 2, 0.3);
        let k = 1.1;
        let h = bloch_hamiltonian(&m, k);
        // Intra-cell bond and wrap-around bond share the same matrix entry.
        let phase = Complex64::from_polar(1.0, k);
        assert_eq!(h[(1, 0)], Complex64::new(1.0, 0.0) + phase);
        assert_eq!(h[(0, 1)], Complex64::new(1.0, 0.0) + phase.conj());
    }

    #[test]
    fn symmetry_operator_requires_even_dimension() {
        assert!(SymmetryOperator::new(3).is_err());
        assert!(SymmetryOperator::new(0).is_err());
        assert!(SymmetryOperator::new(8).is_ok());
    }

    #[test]
    fn apply_conj_is_an_involution_up_to_sign_pattern() {
        let c = SymmetryOperator::new(4).unwrap();
        let v = Array1::from(vec![
            Complex64::new(0.3, -0.2),
            Complex64::new(-1.0, 0.4),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
        ]);
        let w = c.apply_conj(&c.apply_conj(&v.view()).view());
        for (a, b) in v.iter().zip(w.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lattice_spec_json_round_trip() {
        let a = modulation(1.5, 3, 8, 0.4 * PI);
        let b = modulation(1.5, 1, 4, -0.4 * PI);
        let lat = LatticeSpec::new(vec![
            DomainSpec::new(a, 24).unwrap(),
            DomainSpec::new(b, 24).unwrap(),
        ])
        .unwrap();
        let json = serde_json::to_string_pretty(&lat).unwrap();
        for key in ["\"V\"", "\"q\"", "\"p\"", "\"delta\"", "\"length\"", "\"domains\"", "\"t\""] {
            assert!(json.contains(key), "missing key {key} in {json}");
        }
        let back: LatticeSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(lat, back);
    }

    #[test]
    fn lattice_spec_rejects_unknown_fields() {
        let json = r#"{"domains":[{"V":1.0,"q":1,"p":4,"delta":0.0,"length":8}],"t":1.0,"extra":3}"#;
        assert!(serde_json::from_str::<LatticeSpec>(json).is_err());
        let json = r#"{"domains":[{"V":1.0,"q":1,"p":4,"delta":0.0,"length":8,"bogus":1}],"t":1.0}"#;
        assert!(serde_json::from_str::<LatticeSpec>(json).is_err());
    }

    #[test]
    fn lattice_spec_rejects_bad_hopping() {
        let json = r#"{"domains":[{"V":1.0,"q":1,"p":4,"delta":0.0,"length":8}],"t":-1.0}"#;
        assert!(serde_json::from_str::<LatticeSpec>(json).is_err());
    }

    proptest! {
        #[test]
        fn potential_period_divides_p(
            qp in (2u32..=16).prop_flat_map(|p| (1..p, Just(p)))
                .prop_filter("coprime", |(q, p)| gcd(*q, *p) == 1),
            v in 0.0f64..3.0,
            delta in -10.0f64..10.0,
            n in 0i64..64,
        ) {
            let (q, p) = qp;
            let m = modulation(v, q, p, delta);
            prop_assert_eq!(m.potential_value(n), m.potential_value(n + i64::from(p)));
        }

        #[test]
        fn modulation_json_round_trip(
            v in -3.0f64..3.0,
            delta in -10.0f64..10.0,
        ) {
            let m = modulation(v, 3, 8, delta);
            let json = serde_json::to_string(&m).unwrap();
            let back: ModulationSpec = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(m, back);
        }

        #[test]
        fn finite_ct_residual_zero_for_random_lattices(
            v in 0.0f64..3.0,
            delta in 0.0f64..TAU,
            cells in 1usize..6,
        ) {
            let m = modulation(v, 3, 8, delta);
            let lat = LatticeSpec::uniform(m, 8 * cells).unwrap();
            let h = lat.open_hamiltonian(SiteIndexing::DomainLocal);
            let c = SymmetryOperator::new(8 * cells).unwrap();
            prop_assert_eq!(c.ct_residual_finite(&h.view()).unwrap(), 0.0);
        }
    }
}
