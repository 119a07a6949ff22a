//! WAV reading and writing on top of `hound`.
//!
//! Reads 16-bit integer PCM and 32-bit float, mono or interleaved
//! multichannel; only the first channel is kept. Writes mono files.

use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{write_atomic, AudioClip};
use crate::error::{Error, Result};

/// Decoding and encoding run on in-memory buffers, so an I/O error from
/// `hound` always means the data ended early.
fn wav_error(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::MalformedHeader(format!("file ends before its declared length ({io})")),
        hound::Error::FormatError(msg) => Error::MalformedHeader(msg.into()),
        hound::Error::UnfinishedSample => Error::MalformedHeader("data ends inside a sample".into()),
        other => Error::UnsupportedEncoding(other.to_string()),
    }
}

fn first_channel<S: hound::Sample>(
    reader: WavReader<Cursor<&[u8]>>,
    channels: usize,
    scale: impl Fn(S) -> f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(reader.len() as usize / channels);
    for (k, s) in reader.into_samples::<S>().enumerate() {
        let s = s.map_err(wav_error)?;
        if k % channels == 0 {
            let x = scale(s);
            if !x.is_finite() {
                return Err(Error::UnsupportedEncoding(format!("non-finite sample at frame {}", k / channels)));
            }
            out.push(x.clamp(-1.0, 1.0));
        }
    }
    Ok(out)
}

pub fn decode_wav(bytes: &[u8], source_id: &str) -> Result<AudioClip> {
    let reader = WavReader::new(Cursor::new(bytes)).map_err(wav_error)?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.sample_rate == 0 {
        return Err(Error::MalformedHeader("zero channels or sample rate".into()));
    }
    let channels = spec.channels as usize;
    let samples = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => first_channel(reader, channels, |s: i16| s as f64 / 32768.0)?,
        (SampleFormat::Float, 32) => first_channel(reader, channels, |s: f32| s as f64)?,
        (format, bits) => {
            return Err(Error::UnsupportedEncoding(format!("{format:?} samples with {bits} bits")));
        }
    };
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }
    Ok(AudioClip {
        samples,
        sample_rate: spec.sample_rate,
        source_id: source_id.to_owned(),
    })
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = std::fs::read(path)?;
    decode_wav(&bytes, &path.display().to_string())
}

fn encode<S: hound::Sample + Copy>(samples: impl Iterator<Item = S>, spec: WavSpec) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    let mut w = WavWriter::new(&mut buf, spec).map_err(wav_error)?;
    for s in samples {
        w.write_sample(s).map_err(wav_error)?;
    }
    w.finalize().map_err(wav_error)?;
    Ok(buf.into_inner())
}

/// 16-bit PCM encoding; samples are clipped to `[−1, 1]`.
pub fn encode_wav_pcm16(samples: &[f64], sample_rate: u32) -> Result<Vec<u8>> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let quantized = samples
        .iter()
        .map(|&x| (x.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16);
    encode(quantized, spec)
}

pub fn write_wav_pcm16(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    write_atomic(path.as_ref(), &encode_wav_pcm16(samples, sample_rate)?)
}

pub fn write_wav_f32(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    write_atomic(path.as_ref(), &encode(samples.iter().map(|&x| x as f32), spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(tag: u16, channels: u16, bits: u16, data: &[u8]) -> Vec<u8> {
        let align = channels * bits / 8;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&tag.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&8000u32.to_le_bytes());
        out.extend_from_slice(&(8000 * align as u32).to_le_bytes());
        out.extend_from_slice(&align.to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn pcm16_scaling() {
        let bytes = header(1, 1, 16, &[16384i16.to_le_bytes(), (-32768i16).to_le_bytes()].concat());
        let clip = decode_wav(&bytes, "x").unwrap();
        assert_eq!(clip.samples, vec![0.5, -1.0]);
        assert_eq!(clip.sample_rate, 8000);
    }

    #[test]
    fn stereo_keeps_first_channel() {
        let data: Vec<u8> = [1000i16, -5, 2000, -5, 3000, -5]
            .iter()
            .flat_map(|s| s.to_le_bytes())
            .collect();
        let clip = decode_wav(&header(1, 2, 16, &data), "s").unwrap();
        assert_eq!(clip.samples, vec![1000.0 / 32768.0, 2000.0 / 32768.0, 3000.0 / 32768.0]);
    }

    #[test]
    fn float32() {
        let data: Vec<u8> = [0.25f32, -0.75].iter().flat_map(|s| s.to_le_bytes()).collect();
        assert_eq!(
            decode_wav(&header(3, 1, 32, &data), "f").unwrap().samples,
            vec![0.25, -0.75]
        );
    }

    #[test]
    fn error_paths() {
        let good = header(1, 1, 16, &[0, 1, 2, 3]);
        assert!(matches!(
            decode_wav(&good[..good.len() - 2], "t"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(decode_wav(&good[..20], "t"), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode_wav(b"RIFX", "t"), Err(Error::MalformedHeader(_))));
        assert!(matches!(
            decode_wav(&header(1, 1, 24, &[0; 6]), "t"),
            Err(Error::UnsupportedEncoding(_))
        ));
        assert!(matches!(
            decode_wav(&header(1, 1, 16, &[]), "t"),
            Err(Error::EmptyAudio)
        ));
    }

    #[test]
    fn pcm16_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let x: Vec<f64> = (0..1001).map(|n| (n as f64 * 0.013).sin() * 0.9).collect();
        write_wav_pcm16(&path, &x, 16_000).unwrap();
        let clip = read_wav(&path).unwrap();
        assert_eq!(clip.sample_rate, 16_000);
        assert_eq!(clip.samples.len(), x.len());
        for (a, b) in x.iter().zip(&clip.samples) {
            assert!((a - b).abs() <= 2f64.powi(-15));
        }
    }
}
