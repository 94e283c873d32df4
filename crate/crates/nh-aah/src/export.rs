//! Export helpers: fingerprints, CSV tables, and binary field traces.
//!
//! Every text artifact starts with two comment lines embedding the resolved
//! run configuration (one JSON line) and the producing version, so files are
//! self-describing and reruns with equal configs are byte-identical — no
//! timestamps live here.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laser::{LasingReport, TimeTrace};
use crate::topology::PhaseDiagram;

/// FNV-1a (64-bit) over a byte stream. Used to fingerprint matrices in
/// eigensolver errors and configurations in trace headers, so failures and
/// files can be matched to their inputs without embedding the data.
pub fn fnv1a64(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Fingerprint of a sequence of doubles (little-endian byte order).
pub fn fnv1a64_f64s<I: IntoIterator<Item = f64>>(values: I) -> u64 {
    fnv1a64(values.into_iter().flat_map(|v| v.to_le_bytes()))
}

/// Provenance stamped into every artifact: the resolved config as a single
/// JSON line plus a version string.
#[derive(Debug, Clone, Copy)]
pub struct ArtifactMeta<'a> {
    pub config_json: &'a str,
    pub version: &'a str,
}

impl ArtifactMeta<'_> {
    /// The two provenance comment lines every text artifact starts with.
    pub fn header(&self) -> String {
        format!(
            "# config: {}\n# version: {}\n",
            self.config_json.replace(['\n', '\r'], " "),
            self.version
        )
    }
}

/// One row of a spectrum-sweep table.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumRow {
    pub delta: f64,
    /// Eigenvalue index within its `delta` row.
    pub index: usize,
    pub re_e: f64,
    pub im_e: f64,
    pub is_zero_mode: bool,
}

/// Spectrum sweep CSV: `delta,index,re_E,im_E,is_zero_mode`.
pub fn spectrum_csv(meta: &ArtifactMeta, rows: &[SpectrumRow]) -> String {
    let mut out = meta.header();
    out.push_str("delta,index,re_E,im_E,is_zero_mode\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.delta, r.index, r.re_e, r.im_e, r.is_zero_mode
        ));
    }
    out
}

/// Wavefunction CSV: `site,re_psi,im_psi,abs_psi` over sites `1..=N`.
pub fn wavefunction_csv(meta: &ArtifactMeta, psi: &[Complex64]) -> String {
    let mut out = meta.header();
    out.push_str("site,re_psi,im_psi,abs_psi\n");
    for (i, z) in psi.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", i + 1, z.re, z.im, z.norm()));
    }
    out
}

/// Phase-diagram CSV: `v,delta,label,polarization,global_phase`; the two
/// invariant columns are empty on gapless cells.
pub fn phase_diagram_csv(meta: &ArtifactMeta, d: &PhaseDiagram) -> String {
    let mut out = meta.header();
    out.push_str("v,delta,label,polarization,global_phase\n");
    for (i, &v) in d.v_grid.iter().enumerate() {
        for (j, &delta) in d.delta_grid.iter().enumerate() {
            let (pol, phase) = match d.invariants[i][j] {
                Some((p, g)) => (p.to_string(), g.to_string()),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!("{},{},{},{},{}\n", v, delta, d.labels[i][j], pol, phase));
        }
    }
    out
}

/// Pump-sweep CSV: `gamma,i_out,mode_class`.
pub fn laser_sweep_csv(meta: &ArtifactMeta, reports: &[LasingReport]) -> String {
    let mut out = meta.header();
    out.push_str("gamma,i_out,mode_class\n");
    for r in reports {
        out.push_str(&format!("{},{},{}\n", r.gamma_pump, r.i_out, r.mode_class));
    }
    out
}

/// Emission-spectrum CSV: `omega,power`.
pub fn emission_spectrum_csv(meta: &ArtifactMeta, spectrum: &[(f64, f64)]) -> String {
    let mut out = meta.header();
    out.push_str("omega,power\n");
    for (omega, power) in spectrum {
        out.push_str(&format!("{omega},{power}\n"));
    }
    out
}

const TRACE_MAGIC: &[u8; 8] = b"NHAATRC1";

/// Encodes a field trace into the binary columnar layout. All integers and
/// floats are little-endian:
///
/// * magic `b"NHAATRC1"`;
/// * header: config fingerprint (u64), dt (f64), sample stride (u64),
///   averaging window start/end (f64 each), site count (u64), sample
///   count (u64);
/// * body: per sample, per site, interleaved `re, im` (f64 each). Sample
///   times are implicit: `t_s = s * stride * dt`.
pub fn encode_trace(trace: &TimeTrace) -> Vec<u8> {
    let sites = trace.site_count();
    let samples = trace.fields.len();
    let mut out = Vec::with_capacity(8 + 7 * 8 + samples * sites * 16);
    out.extend_from_slice(TRACE_MAGIC);
    out.extend_from_slice(&trace.fingerprint.to_le_bytes());
    out.extend_from_slice(&trace.dt.to_le_bytes());
    out.extend_from_slice(&(trace.sample_stride as u64).to_le_bytes());
    out.extend_from_slice(&trace.average_window.0.to_le_bytes());
    out.extend_from_slice(&trace.average_window.1.to_le_bytes());
    out.extend_from_slice(&(sites as u64).to_le_bytes());
    out.extend_from_slice(&(samples as u64).to_le_bytes());
    for field in &trace.fields {
        for z in field {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::InvalidInput("trace file truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn read_u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn read_f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Decodes [`encode_trace`] output back into a trace (bit-exact round trip).
pub fn decode_trace(bytes: &[u8]) -> Result<TimeTrace> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(8)? != TRACE_MAGIC {
        return Err(Error::InvalidInput("not a field-trace file (bad magic)".into()));
    }
    let fingerprint = cur.read_u64()?;
    let dt = cur.read_f64()?;
    let sample_stride = cur.read_u64()? as usize;
    let window = (cur.read_f64()?, cur.read_f64()?);
    let sites = cur.read_u64()? as usize;
    let samples = cur.read_u64()? as usize;
    if !(dt.is_finite() && dt > 0.0) || sample_stride == 0 {
        return Err(Error::InvalidInput("trace header has invalid dt/stride".into()));
    }
    let expect = samples
        .checked_mul(sites)
        .and_then(|n| n.checked_mul(16))
        .ok_or_else(|| Error::InvalidInput("trace header sizes overflow".into()))?;
    if bytes.len() - cur.pos != expect {
        return Err(Error::InvalidInput(format!(
            "trace body holds {} bytes, header promises {expect}",
            bytes.len() - cur.pos
        )));
    }

    let sample_dt = dt * sample_stride as f64;
    let mut times = Vec::with_capacity(samples);
    let mut fields = Vec::with_capacity(samples);
    for s in 0..samples {
        times.push(s as f64 * sample_dt);
        let mut field = Vec::with_capacity(sites);
        for _ in 0..sites {
            let re = cur.read_f64()?;
            let im = cur.read_f64()?;
            field.push(Complex64::new(re, im));
        }
        fields.push(field);
    }
    Ok(TimeTrace {
        times,
        fields,
        fingerprint,
        dt,
        sample_stride,
        average_window: window,
    })
}
