//! Binary container shared by model checkpoints and spectrogram caches.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic [8] | format_version u32 | kind u8 | body | fnv1a-64 of everything before
//! ```
//!
//! `kind` is 0 gamma, 1 gauss, 2 bern, 3 spectrogram cache. Arrays are
//! stored row-major as a u64 element count followed by f64 values.

use std::path::Path;

use ndarray::{Array1, Array2};

use super::write_atomic;
use crate::error::{Error, Result};
use crate::models::{BernRbmParams, GammaRbmParams, GaussRbmParams, ModelKind, ModelParams};
use crate::training::{NormalizationStats, TrainConfig};

pub const MAGIC: [u8; 8] = *b"GRBMCKPT";
pub const FORMAT_VERSION: u32 = 1;

const TAG_GAMMA: u8 = 0;
const TAG_GAUSS: u8 = 1;
const TAG_BERN: u8 = 2;
const TAG_SPECTROGRAM: u8 = 3;

const HEADER_LEN: usize = 8 + 4 + 1;
const CHECKSUM_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub stats: NormalizationStats,
    pub config: TrainConfig,
}

impl Checkpoint {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

/// Amplitude frames ready for training, pooled over all input files.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramCache {
    pub frames: Array2<f64>,
    pub sample_rate: u32,
    pub win_len: usize,
    pub hop: usize,
    pub silence_db: f64,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn usize(&mut self, x: usize) {
        self.u64(x as u64);
    }
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn values<'a>(&mut self, xs: impl ExactSizeIterator<Item = &'a f64>) {
        self.usize(xs.len());
        for &x in xs {
            self.f64(x);
        }
    }
    fn matrix(&mut self, m: &Array2<f64>) {
        // iter() walks in logical row-major order regardless of layout
        self.values(m.iter());
    }
    fn vector(&mut self, v: &Array1<f64>) {
        self.values(v.iter());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::CorruptPayload(format!("payload ends at byte {}, needed {n} more", self.buf.len()))
        })?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::CorruptPayload("length overflows usize".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn values(&mut self, expected: usize, what: &str) -> Result<Vec<f64>> {
        let n = self.usize()?;
        if n != expected {
            return Err(Error::CorruptPayload(format!(
                "{what}: {n} values stored, header implies {expected}"
            )));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn matrix(&mut self, rows: usize, cols: usize, what: &str) -> Result<Array2<f64>> {
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::CorruptPayload(format!("{what}: dimensions overflow")))?;
        let v = self.values(n, what)?;
        Ok(Array2::from_shape_vec((rows, cols), v).expect("length checked"))
    }
    fn vector(&mut self, len: usize, what: &str) -> Result<Array1<f64>> {
        Ok(Array1::from(self.values(len, what)?))
    }
}

fn write_config(w: &mut Writer, c: &TrainConfig) {
    w.usize(c.batch_size);
    w.f64(c.learning_rate);
    w.usize(c.epochs);
    w.usize(c.cd_k);
    w.usize(c.hidden_units);
    w.f64(c.adam_beta1);
    w.f64(c.adam_beta2);
    w.f64(c.adam_eps);
    w.u64(c.seed);
    w.f64(c.epsilon);
    w.u64(c.stream);
}

fn read_config(r: &mut Reader) -> Result<TrainConfig> {
    Ok(TrainConfig {
        batch_size: r.usize()?,
        learning_rate: r.f64()?,
        epochs: r.usize()?,
        cd_k: r.usize()?,
        hidden_units: r.usize()?,
        adam_beta1: r.f64()?,
        adam_beta2: r.f64()?,
        adam_eps: r.f64()?,
        seed: r.u64()?,
        epsilon: r.f64()?,
        stream: r.u64()?,
    })
}

fn write_stats(w: &mut Writer, s: &NormalizationStats) {
    match s {
        NormalizationStats::GammaScale { mean, alpha_norm } => {
            w.u8(0);
            w.vector(mean);
            w.f64(*alpha_norm);
        }
        NormalizationStats::GaussianStandardize { mean, std } => {
            w.u8(1);
            w.vector(mean);
            w.vector(std);
        }
        NormalizationStats::UnitRange { max } => {
            w.u8(2);
            w.vector(max);
        }
    }
}

fn read_stats(r: &mut Reader, dim: usize) -> Result<NormalizationStats> {
    Ok(match r.u8()? {
        0 => NormalizationStats::GammaScale {
            mean: r.vector(dim, "normalization mean")?,
            alpha_norm: r.f64()?,
        },
        1 => NormalizationStats::GaussianStandardize {
            mean: r.vector(dim, "normalization mean")?,
            std: r.vector(dim, "normalization std")?,
        },
        2 => NormalizationStats::UnitRange {
            max: r.vector(dim, "normalization max")?,
        },
        t => return Err(Error::CorruptPayload(format!("unknown normalization tag {t}"))),
    })
}

fn header(tag: u8) -> Writer {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(&MAGIC);
    w.u32(FORMAT_VERSION);
    w.u8(tag);
    w
}

fn finish(mut w: Writer) -> Vec<u8> {
    let sum = fnv1a(&w.0);
    w.u64(sum);
    w.0
}

pub fn encode_checkpoint(ck: &Checkpoint) -> Vec<u8> {
    let tag = match ck.params.kind() {
        ModelKind::Gamma => TAG_GAMMA,
        ModelKind::Gauss => TAG_GAUSS,
        ModelKind::Bern => TAG_BERN,
    };
    let mut w = header(tag);
    w.usize(ck.params.visible_dim());
    w.usize(ck.params.hidden_dim());
    match &ck.params {
        ModelParams::Gamma(p) => {
            w.matrix(p.w_tilde());
            w.matrix(p.v_tilde());
            w.vector(p.c());
            w.vector(p.d());
            w.f64(p.epsilon());
        }
        ModelParams::Gauss(p) => {
            w.matrix(p.w());
            w.vector(p.b());
            w.vector(p.c());
            w.vector(p.log_var());
        }
        ModelParams::Bern(p) => {
            w.matrix(p.w());
            w.vector(p.b());
            w.vector(p.c());
        }
    }
    write_stats(&mut w, &ck.stats);
    write_config(&mut w, &ck.config);
    finish(w)
}

pub fn encode_spectrogram_cache(cache: &SpectrogramCache) -> Vec<u8> {
    let mut w = header(TAG_SPECTROGRAM);
    w.usize(cache.frames.nrows());
    w.usize(cache.frames.ncols());
    w.u32(cache.sample_rate);
    w.usize(cache.win_len);
    w.usize(cache.hop);
    w.f64(cache.silence_db);
    w.matrix(&cache.frames);
    finish(w)
}

/// Validates magic, version and checksum; returns the kind tag and a
/// reader positioned at the body.
fn open(bytes: &[u8]) -> Result<(u8, Reader<'_>)> {
    if bytes.len() < 8 || bytes[..8] != MAGIC {
        return Err(Error::CorruptPayload("not a checkpoint file (bad magic)".into()));
    }
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(Error::CorruptPayload(format!("file is only {} bytes", bytes.len())));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let (body, sum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    let stored = u64::from_le_bytes(sum.try_into().expect("8 bytes"));
    if fnv1a(body) != stored {
        return Err(Error::CorruptPayload("checksum mismatch".into()));
    }
    let tag = body[12];
    Ok((
        tag,
        Reader {
            buf: body,
            at: HEADER_LEN,
        },
    ))
}

fn done(r: &Reader) -> Result<()> {
    if r.at != r.buf.len() {
        return Err(Error::CorruptPayload(format!("{} trailing bytes", r.buf.len() - r.at)));
    }
    Ok(())
}

fn corrupt(e: Error) -> Error {
    match e {
        Error::CorruptPayload(_) => e,
        other => Error::CorruptPayload(other.to_string()),
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let (tag, mut r) = open(bytes)?;
    if tag == TAG_SPECTROGRAM {
        return Err(Error::CorruptPayload(
            "file holds a spectrogram cache, not a model".into(),
        ));
    }
    let i = r.usize()?;
    let j = r.usize()?;
    let params = match tag {
        TAG_GAMMA => {
            let w = r.matrix(i, j, "W̃")?;
            let v = r.matrix(i, j, "Ṽ")?;
            let c = r.vector(j, "c")?;
            let d = r.vector(j, "d")?;
            let eps = r.f64()?;
            ModelParams::Gamma(GammaRbmParams::new(w, v, c, d, eps).map_err(corrupt)?)
        }
        TAG_GAUSS => {
            let w = r.matrix(i, j, "W")?;
            let b = r.vector(i, "b")?;
            let c = r.vector(j, "c")?;
            let lv = r.vector(i, "log_var")?;
            ModelParams::Gauss(GaussRbmParams::new(w, b, c, lv).map_err(corrupt)?)
        }
        TAG_BERN => {
            let w = r.matrix(i, j, "W")?;
            let b = r.vector(i, "b")?;
            let c = r.vector(j, "c")?;
            ModelParams::Bern(BernRbmParams::new(w, b, c).map_err(corrupt)?)
        }
        t => return Err(Error::CorruptPayload(format!("unknown kind tag {t}"))),
    };
    let stats = read_stats(&mut r, i)?;
    let config = read_config(&mut r)?;
    done(&r)?;
    Ok(Checkpoint { params, stats, config })
}

pub fn decode_spectrogram_cache(bytes: &[u8]) -> Result<SpectrogramCache> {
    let (tag, mut r) = open(bytes)?;
    if tag != TAG_SPECTROGRAM {
        return Err(Error::CorruptPayload(
            "file holds a model checkpoint, not a spectrogram cache".into(),
        ));
    }
    let n = r.usize()?;
    let i = r.usize()?;
    let sample_rate = r.u32()?;
    let win_len = r.usize()?;
    let hop = r.usize()?;
    let silence_db = r.f64()?;
    let frames = r.matrix(n, i, "frames")?;
    done(&r)?;
    Ok(SpectrogramCache {
        frames,
        sample_rate,
        win_len,
        hop,
        silence_db,
    })
}

pub fn save_checkpoint(path: impl AsRef<Path>, ck: &Checkpoint) -> Result<()> {
    write_atomic(path.as_ref(), &encode_checkpoint(ck))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    decode_checkpoint(&std::fs::read(path)?)
}

pub fn save_spectrogram_cache(path: impl AsRef<Path>, cache: &SpectrogramCache) -> Result<()> {
    write_atomic(path.as_ref(), &encode_spectrogram_cache(cache))
}

pub fn load_spectrogram_cache(path: impl AsRef<Path>) -> Result<SpectrogramCache> {
    decode_spectrogram_cache(&std::fs::read(path)?)
}
