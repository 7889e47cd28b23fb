//! File formats: binary fields and checkpoints, snapshot manifests, trace and
//! slice CSVs.
//!
//! Binary layouts are little-endian.
//!
//! Field (`SVFD`): magic, `u16` version, `u16` components (1 scalar, 2
//! vector), `u64` M, `f64` L, `f64` center x1, `f64` center x2, then `M²`
//! nodes in row-major order (`i` along x1), each `components` doubles.
//!
//! Checkpoint (`SVTR`): magic, `u16` version, `u16` reserved, `u64` N,
//! `u64` step, `f64` dt, `f64` t, `f64` offset x1, `f64` offset x2, then N
//! relative positions as pairs of doubles.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fields::{GridField, GridGeometry, ScalarField, VectorField, MIN_POINTS};
use crate::harness::csv_err;
use crate::infometrics::{EntropyTrace, TRACE_COLUMNS};
use crate::particles::ParticleEnsemble;
use crate::{Error, Result, Vec2};

pub const FIELD_MAGIC: &[u8; 4] = b"SVFD";
pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SVTR";
pub const FORMAT_VERSION: u16 = 1;
/// Upper bound on M accepted by the decoder.
pub const MAX_POINTS: u64 = 1 << 14;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Decode(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        let v = f64::from_le_bytes(self.take(8)?.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::Decode(format!("non-finite value at byte {}", self.pos - 8)));
        }
        Ok(v)
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let m = self.take(4)?;
        if m != expected {
            return Err(Error::Decode(format!("bad magic {m:?}")));
        }
        Ok(())
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

fn header(out: &mut Vec<u8>, geom: &GridGeometry, components: u16) {
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&components.to_le_bytes());
    out.extend_from_slice(&(geom.points as u64).to_le_bytes());
    for v in [geom.half_width, geom.center.x1, geom.center.x2] {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_scalar_field(field: &ScalarField) -> Vec<u8> {
    let mut out = Vec::with_capacity(40 + 8 * field.values.len());
    header(&mut out, &field.geom, 1);
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_vector_field(field: &VectorField) -> Vec<u8> {
    let mut out = Vec::with_capacity(40 + 16 * field.values.len());
    header(&mut out, &field.geom, 2);
    for v in &field.values {
        out.extend_from_slice(&v.x1.to_le_bytes());
        out.extend_from_slice(&v.x2.to_le_bytes());
    }
    out
}

fn decode_header(r: &mut Reader) -> Result<(GridGeometry, u16)> {
    r.magic(FIELD_MAGIC)?;
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::Decode(format!("unsupported version {version}")));
    }
    let components = r.u16()?;
    if components != 1 && components != 2 {
        return Err(Error::Decode(format!("component count {components}")));
    }
    let m = r.u64()?;
    if m < MIN_POINTS as u64 || m > MAX_POINTS {
        return Err(Error::Decode(format!("grid size {m} out of range")));
    }
    let l = r.f64()?;
    let center = Vec2::new(r.f64()?, r.f64()?);
    if !(l > 0.0) {
        return Err(Error::Decode(format!("half-width {l}")));
    }
    let geom = GridGeometry::new(center, l, m as usize).map_err(|e| Error::Decode(e.to_string()))?;
    let need = geom.len() * 8 * components as usize;
    if r.remaining() != need {
        return Err(Error::Decode(format!("payload has {} bytes, expected {need}", r.remaining())));
    }
    Ok((geom, components))
}

/// Reads the header only: geometry and component count.
pub fn peek_field(bytes: &[u8]) -> Result<(GridGeometry, u16)> {
    decode_header(&mut Reader { bytes, pos: 0 })
}

pub fn decode_scalar_field(bytes: &[u8]) -> Result<ScalarField> {
    let mut r = Reader { bytes, pos: 0 };
    let (geom, c) = decode_header(&mut r)?;
    if c != 1 {
        return Err(Error::Decode("expected a scalar field".into()));
    }
    let values = (0..geom.len()).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    GridField::from_values(geom, values)
}

pub fn decode_vector_field(bytes: &[u8]) -> Result<VectorField> {
    let mut r = Reader { bytes, pos: 0 };
    let (geom, c) = decode_header(&mut r)?;
    if c != 2 {
        return Err(Error::Decode("expected a vector field".into()));
    }
    let values = (0..geom.len()).map(|_| Ok(Vec2::new(r.f64()?, r.f64()?))).collect::<Result<Vec<_>>>()?;
    GridField::from_values(geom, values)
}

pub fn write_scalar_field(path: &Path, field: &ScalarField) -> Result<()> {
    fs::write(path, encode_scalar_field(field))?;
    Ok(())
}

pub fn read_scalar_field(path: &Path) -> Result<ScalarField> {
    decode_scalar_field(&fs::read(path)?)
}

pub fn write_vector_field(path: &Path, field: &VectorField) -> Result<()> {
    fs::write(path, encode_vector_field(field))?;
    Ok(())
}

pub fn read_vector_field(path: &Path) -> Result<VectorField> {
    decode_vector_field(&fs::read(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub dt: f64,
    pub ensemble: ParticleEnsemble,
}

pub fn encode_checkpoint(cp: &Checkpoint) -> Vec<u8> {
    let e = &cp.ensemble;
    let mut out = Vec::with_capacity(60 + 16 * e.rel.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(e.rel.len() as u64).to_le_bytes());
    out.extend_from_slice(&cp.step.to_le_bytes());
    for v in [cp.dt, e.t, e.offset.x1, e.offset.x2] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for p in &e.rel {
        out.extend_from_slice(&p.x1.to_le_bytes());
        out.extend_from_slice(&p.x2.to_le_bytes());
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { bytes, pos: 0 };
    r.magic(CHECKPOINT_MAGIC)?;
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::Decode(format!("unsupported version {version}")));
    }
    r.u16()?;
    let n = r.u64()?;
    let step = r.u64()?;
    let dt = r.f64()?;
    let t = r.f64()?;
    let offset = Vec2::new(r.f64()?, r.f64()?);
    if !(dt > 0.0) || t < 0.0 {
        return Err(Error::Decode(format!("dt = {dt}, t = {t}")));
    }
    let need = n.checked_mul(16).filter(|&b| b == r.remaining() as u64);
    if n == 0 || need.is_none() {
        return Err(Error::Decode(format!("{n} particles do not match {} payload bytes", r.remaining())));
    }
    let rel = (0..n).map(|_| Ok(Vec2::new(r.f64()?, r.f64()?))).collect::<Result<Vec<_>>>()?;
    Ok(Checkpoint { step, dt, ensemble: ParticleEnsemble { rel, offset, t } })
}

pub fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    fs::write(path, encode_checkpoint(cp))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&fs::read(path)?)
}

/// One snapshot file and the shift point `X_t` at its time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub t: f64,
    pub file: String,
    pub x1: f64,
    pub x2: f64,
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for e in entries {
        w.serialize(e).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_manifest(text: &[u8]) -> Result<Vec<ManifestEntry>> {
    let mut r = csv::Reader::from_reader(text);
    let mut out: Vec<ManifestEntry> = Vec::new();
    for rec in r.deserialize() {
        let e: ManifestEntry = rec.map_err(csv_err)?;
        if ![e.t, e.x1, e.x2].iter().all(|v| v.is_finite()) || e.t < 0.0 {
            return Err(Error::Decode(format!("bad manifest row at t = {}", e.t)));
        }
        if out.last().is_some_and(|p| p.t >= e.t) {
            return Err(Error::Decode(format!("manifest times not increasing at t = {}", e.t)));
        }
        out.push(e);
    }
    Ok(out)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    parse_manifest(&fs::read(path)?)
}

pub fn write_trace<W: std::io::Write>(out: W, trace: &EntropyTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS).map_err(csv_err)?;
    for k in 0..trace.len() {
        w.write_record(trace.row(k).iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_trace(text: &[u8]) -> Result<EntropyTrace> {
    let mut r = csv::Reader::from_reader(text);
    let head = r.headers().map_err(csv_err)?;
    if head.iter().ne(TRACE_COLUMNS.iter().copied()) {
        return Err(Error::Decode(format!("unexpected trace header {head:?}")));
    }
    let mut trace = EntropyTrace::default();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let v = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Decode(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if v.len() != TRACE_COLUMNS.len() {
            return Err(Error::Decode(format!("row with {} fields", v.len())));
        }
        trace.times.push(v[0]);
        trace.entropy.push(v[1]);
        trace.fisher.push(v[2]);
        trace.l1.push(v[3]);
        trace.kr_lo.push(v[4]);
        trace.kr_hi.push(v[5]);
        trace.qv_cum.push(v[6]);
    }
    Ok(trace)
}

pub fn write_trace_file(path: &Path, trace: &EntropyTrace) -> Result<()> {
    write_trace(fs::File::create(path)?, trace)
}

pub fn read_trace_file(path: &Path) -> Result<EntropyTrace> {
    parse_trace(&fs::read(path)?)
}

/// `x1,value` along the row `x2 = center`.
pub fn write_slice(path: &Path, field: &ScalarField) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["x1", "value"]).map_err(csv_err)?;
    for (x, v) in field.slice_x1(field.geom.points / 2) {
        w.write_record([x.to_string(), v.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScalarField {
        let g = GridGeometry::new(Vec2::new(0.5, -1.0), 3.0, 8).unwrap();
        GridField::from_fn(g, |x| x.x1 - 2.0 * x.x2)
    }

    #[test]
    fn scalar_field_roundtrip() {
        let f = sample();
        assert_eq!(decode_scalar_field(&encode_scalar_field(&f)).unwrap(), f);
    }

    #[test]
    fn vector_field_roundtrip() {
        let f = sample().map(|v| Vec2::new(v, -v));
        assert_eq!(decode_vector_field(&encode_vector_field(&f)).unwrap(), f);
    }

    #[test]
    fn truncated_field_is_rejected() {
        let b = encode_scalar_field(&sample());
        for cut in [0, 3, 20, b.len() - 1] {
            assert!(matches!(decode_scalar_field(&b[..cut]), Err(Error::Decode(_))));
        }
    }

    #[test]
    fn kind_mismatch() {
        let b = encode_scalar_field(&sample());
        assert!(decode_vector_field(&b).is_err());
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut e = ParticleEnsemble::new(vec![Vec2::new(1.0, 2.0), Vec2::new(-3.0, 0.25)]);
        e.offset = Vec2::new(0.1, 0.2);
        e.t = 0.5;
        let cp = Checkpoint { step: 500, dt: 1e-3, ensemble: e };
        assert_eq!(decode_checkpoint(&encode_checkpoint(&cp)).unwrap(), cp);
    }

    #[test]
    fn huge_particle_count_does_not_allocate() {
        let e = ParticleEnsemble::new(vec![Vec2::ZERO]);
        let mut b = encode_checkpoint(&Checkpoint { step: 0, dt: 1.0, ensemble: e });
        b[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_checkpoint(&b).is_err());
    }

    #[test]
    fn manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let e = vec![
            ManifestEntry { t: 0.0, file: "a.bin".into(), x1: 0.0, x2: 0.0 },
            ManifestEntry { t: 0.5, file: "b.bin".into(), x1: 0.3, x2: -0.1 },
        ];
        write_manifest(&p, &e).unwrap();
        assert_eq!(read_manifest(&p).unwrap(), e);
    }

    #[test]
    fn manifest_order() {
        let text = b"t,file,x1,x2\n0.5,a,0,0\n0.1,b,0,0\n";
        assert!(parse_manifest(text).is_err());
    }

    #[test]
    fn trace_roundtrip() {
        let mut t = EntropyTrace::default();
        let kr = crate::infometrics::KrBracket { lower: 0.1, upper: 0.2 };
        t.push(0.0, 0.01, 0.5, 0.1, kr, 0.0);
        t.push(0.1, 0.02, 0.4, 0.12, kr, 1e-3);
        let mut buf = Vec::new();
        write_trace(&mut buf, &t).unwrap();
        assert_eq!(parse_trace(&buf).unwrap(), t);
    }
}
