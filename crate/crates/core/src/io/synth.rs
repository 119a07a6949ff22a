//! Speech-like test signals.
//!
//! Voiced segments of 0.2 to 0.6 s alternate with silent gaps of 0.08 to
//! 0.25 s. Each voiced segment is a harmonic series whose fundamental
//! drifts inside 80 to 300 Hz, shaped by three Gaussian formant bumps on a
//! 1/k spectral tilt and by a slow amplitude modulation. A faint noise
//! floor runs underneath everything.

use std::f64::consts::PI;

use super::AudioClip;
use crate::error::{Error, Result};
use crate::math::Rng;

pub const F0_MIN: f64 = 80.0;
pub const F0_MAX: f64 = 300.0;
const NOISE_STD: f64 = 3e-5;
const PEAK: f64 = 0.9;
const FADE_SECONDS: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthTrace {
    pub clip: AudioClip,
    /// Instantaneous fundamental per sample, `0` in the gaps.
    pub f0: Vec<f64>,
}

struct Segment {
    len: usize,
    f0_base: f64,
    drift_rate: f64,
    drift_phase: f64,
    formants: [(f64, f64); 3],
    am_rate: f64,
    am_phase: f64,
}

fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

fn voiced_segment(rng: &mut Rng, sample_rate: u32) -> Segment {
    let sr = sample_rate as f64;
    Segment {
        len: (uniform(rng, 0.2, 0.6) * sr) as usize,
        f0_base: uniform(rng, 100.0, 240.0),
        drift_rate: uniform(rng, 0.5, 2.0),
        drift_phase: uniform(rng, 0.0, 2.0 * PI),
        formants: [
            (uniform(rng, 300.0, 900.0), uniform(rng, 60.0, 120.0)),
            (uniform(rng, 900.0, 2400.0), uniform(rng, 80.0, 160.0)),
            (uniform(rng, 2400.0, 3400.0), uniform(rng, 100.0, 200.0)),
        ],
        am_rate: uniform(rng, 2.0, 6.0),
        am_phase: uniform(rng, 0.0, 2.0 * PI),
    }
}

fn formant_gain(freq: f64, formants: &[(f64, f64); 3]) -> f64 {
    let bumps: f64 = formants
        .iter()
        .map(|&(centre, width)| (-0.5 * ((freq - centre) / width).powi(2)).exp())
        .sum();
    0.1 + bumps
}

pub fn synth_speechlike(rng: &mut Rng, seconds: f64, sample_rate: u32) -> Result<AudioClip> {
    Ok(synth_speechlike_traced(rng, seconds, sample_rate)?.clip)
}

/// As [`synth_speechlike`], also returning the fundamental track.
pub fn synth_speechlike_traced(rng: &mut Rng, seconds: f64, sample_rate: u32) -> Result<SynthTrace> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        return Err(Error::domain(format!("duration must be positive, got {seconds}")));
    }
    if sample_rate == 0 {
        return Err(Error::domain("sample rate must be positive"));
    }
    let sr = sample_rate as f64;
    let total = (seconds * sr).round().max(1.0) as usize;
    let nyquist = 0.45 * sr;
    let fade = ((FADE_SECONDS * sr) as usize).max(1);

    let mut out = vec![0.0; total];
    let mut f0 = vec![0.0; total];
    let mut at = 0;
    while at < total {
        let seg = voiced_segment(rng, sample_rate);
        let end = (at + seg.len).min(total);
        let mut phase = 0.0;
        for n in at..end {
            let t = (n - at) as f64 / sr;
            let fund = (seg.f0_base * (1.0 + 0.2 * (2.0 * PI * seg.drift_rate * t + seg.drift_phase).sin()))
                .clamp(F0_MIN, F0_MAX);
            f0[n] = fund;
            phase += 2.0 * PI * fund / sr;
            let mut x = 0.0;
            let mut k = 1;
            while k as f64 * fund < nyquist {
                let kf = k as f64;
                x += formant_gain(kf * fund, &seg.formants) / kf * (kf * phase).sin();
                k += 1;
            }
            let am = 0.7 + 0.3 * (2.0 * PI * seg.am_rate * t + seg.am_phase).sin();
            let edge = (n - at).min(end - 1 - n);
            let ramp = if edge < fade {
                0.5 - 0.5 * (PI * edge as f64 / fade as f64).cos()
            } else {
                1.0
            };
            out[n] = x * am * ramp;
        }
        let gap = (uniform(rng, 0.08, 0.25) * sr) as usize;
        at = end + gap;
    }

    let peak = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = if peak > 0.0 { PEAK / peak } else { 0.0 };
    for x in &mut out {
        *x = (*x * scale + NOISE_STD * rng.standard_normal()).clamp(-1.0, 1.0);
    }
    Ok(SynthTrace {
        clip: AudioClip {
            samples: out,
            sample_rate,
            source_id: format!("synth(seed={}, stream={})", rng.seed(), rng.stream_id()),
        },
        f0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{discard_silence, stft};

    #[test]
    fn fixed_seed_is_reproducible() {
        let a = synth_speechlike(&mut Rng::new(5, 0), 0.5, 16_000).unwrap();
        let b = synth_speechlike(&mut Rng::new(5, 0), 0.5, 16_000).unwrap();
        assert_eq!(a, b);
        let c = synth_speechlike(&mut Rng::new(6, 0), 0.5, 16_000).unwrap();
        assert_ne!(a.samples, c.samples);
        assert_eq!(a.samples.len(), 8000);
        assert!(a.samples.iter().all(|x| x.abs() <= 1.0));
    }

    #[test]
    fn fundamental_stays_in_range() {
        let tr = synth_speechlike_traced(&mut Rng::new(1, 0), 3.0, 16_000).unwrap();
        assert!(tr.f0.iter().all(|&f| f == 0.0 || (F0_MIN..=F0_MAX).contains(&f)));
        assert!(tr.f0.contains(&0.0));
    }

    #[test]
    fn spectral_peak_at_fundamental() {
        // A long window resolves the first harmonic even at 80 Hz.
        let sr = 16_000;
        let win = 1024;
        let tr = synth_speechlike_traced(&mut Rng::new(2, 0), 2.0, sr).unwrap();
        let spec = stft(&tr.clip.samples, win, 256, sr).unwrap();
        let bin_hz = sr as f64 / win as f64;
        let mut checked = 0;
        for t in 0..spec.num_frames() {
            let seg = &tr.f0[t * 256..t * 256 + win];
            if seg.contains(&0.0) {
                continue;
            }
            let mean = seg.iter().sum::<f64>() / win as f64;
            let row = spec.frames().row(t);
            let k0 = (mean / bin_hz).round() as usize;
            let peak = (k0.saturating_sub(1)..=k0 + 1).map(|k| row[k]).fold(0.0, f64::max);
            let between = row[(1.5 * mean / bin_hz).round() as usize];
            assert!(peak > 10.0 * between, "frame {t}: {peak} vs {between}");
            checked += 1;
        }
        assert!(checked > 5);
    }

    #[test]
    fn gaps_are_detected_as_silence() {
        let sr = 16_000;
        let tr = synth_speechlike_traced(&mut Rng::new(3, 0), 4.0, sr).unwrap();
        let spec = stft(&tr.clip.samples, 256, 64, sr).unwrap();
        let silent = (0..spec.num_frames())
            .filter(|&t| tr.f0[t * 64..t * 64 + 256].iter().all(|&f| f == 0.0))
            .count();
        assert!(silent > 0);
        let kept = discard_silence(&spec, -60.0).unwrap();
        assert!(kept.num_frames() <= spec.num_frames() - silent);
    }
}
