//! STFT analysis/synthesis for amplitude spectrograms.
//!
//! Conventions: symmetric Hamming window `0.54 − 0.46 cos(2πn/(L−1))`,
//! unnormalized forward DFT, inverse DFT scaled by `1/L`, frames taken
//! without padding at `t·hop` for every full window that fits. Synthesis is
//! weighted overlap-add normalized by the summed squared window.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Amplitude floor relative to the utterance maximum for data fed to the
/// gamma model.
pub const AMPLITUDE_FLOOR_RATIO: f64 = 1e-5;

/// Default silence threshold relative to the loudest frame, in dB.
pub const DEFAULT_SILENCE_DB: f64 = -60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    frames: Array2<f64>,
    phase: Array2<f64>,
    sample_rate: u32,
    win_len: usize,
    hop: usize,
}

pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

fn check_geometry(win_len: usize, hop: usize) -> Result<()> {
    if win_len < 2 || !win_len.is_multiple_of(2) {
        return Err(Error::Metadata(format!(
            "window length must be even and ≥ 2, got {win_len}"
        )));
    }
    if hop == 0 || hop > win_len {
        return Err(Error::Metadata(format!("hop must lie in 1..={win_len}, got {hop}")));
    }
    Ok(())
}

impl Spectrogram {
    pub fn new(frames: Array2<f64>, phase: Array2<f64>, sample_rate: u32, win_len: usize, hop: usize) -> Result<Self> {
        check_geometry(win_len, hop)?;
        if frames.ncols() != win_len / 2 + 1 {
            return Err(Error::Metadata(format!(
                "{} bins per frame, window {win_len} needs {}",
                frames.ncols(),
                win_len / 2 + 1
            )));
        }
        if phase.dim() != frames.dim() {
            return Err(Error::Metadata(format!(
                "phase is {:?} but amplitudes are {:?}",
                phase.dim(),
                frames.dim()
            )));
        }
        if sample_rate == 0 {
            return Err(Error::Metadata("sample rate must be positive".into()));
        }
        Ok(Self {
            frames,
            phase,
            sample_rate,
            win_len,
            hop,
        })
    }

    pub fn frames(&self) -> &Array2<f64> {
        &self.frames
    }

    pub fn phase(&self) -> &Array2<f64> {
        &self.phase
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn win_len(&self) -> usize {
        self.win_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn num_frames(&self) -> usize {
        self.frames.nrows()
    }

    pub fn num_bins(&self) -> usize {
        self.frames.ncols()
    }

    pub fn into_frames(self) -> Array2<f64> {
        self.frames
    }

    /// Same phase and metadata, new amplitudes.
    pub fn with_frames(&self, frames: Array2<f64>) -> Result<Self> {
        Self::new(frames, self.phase.clone(), self.sample_rate, self.win_len, self.hop)
    }

    /// Signal length covered by the frames, `(N − 1)·hop + L`.
    pub fn signal_len(&self) -> usize {
        match self.num_frames() {
            0 => 0,
            n => (n - 1) * self.hop + self.win_len,
        }
    }

    /// Per-frame energy `Σ_k |X_k|²` over the one-sided bins.
    pub fn frame_energies(&self) -> Vec<f64> {
        self.frames
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|a| a * a).sum())
            .collect()
    }

    /// Raise every amplitude to at least `ratio × max`, the maximum taken
    /// over the whole spectrogram.
    pub fn floor_amplitudes(&mut self, ratio: f64) {
        let max = self.frames.iter().copied().fold(0.0, f64::max);
        let floor = ratio * max;
        self.frames.mapv_inplace(|a| a.max(floor));
    }
}

/// Magnitude and phase of Hamming-windowed frames.
pub fn stft(signal: &[f64], win_len: usize, hop: usize, sample_rate: u32) -> Result<Spectrogram> {
    check_geometry(win_len, hop)?;
    if signal.len() < win_len {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            win_len,
        });
    }
    let n_frames = (signal.len() - win_len) / hop + 1;
    let bins = win_len / 2 + 1;
    let window = hamming(win_len);
    let fft = FftPlanner::new().plan_fft_forward(win_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); win_len];
    let mut frames = Array2::zeros((n_frames, bins));
    let mut phase = Array2::zeros((n_frames, bins));
    for t in 0..n_frames {
        let seg = &signal[t * hop..t * hop + win_len];
        for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex64::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        for k in 0..bins {
            frames[[t, k]] = buf[k].norm();
            let mut ph = buf[k].arg();
            if ph <= -PI {
                ph = PI;
            }
            phase[[t, k]] = ph;
        }
    }
    Spectrogram::new(frames, phase, sample_rate, win_len, hop)
}

/// Weighted overlap-add resynthesis; output length is
/// [`Spectrogram::signal_len`].
pub fn istft(spec: &Spectrogram) -> Result<Vec<f64>> {
    let l = spec.win_len;
    check_geometry(l, spec.hop)?;
    if spec.num_bins() != l / 2 + 1 || spec.phase.dim() != spec.frames.dim() {
        return Err(Error::Metadata("amplitude/phase shapes do not match the window".into()));
    }
    let len = spec.signal_len();
    let window = hamming(l);
    let ifft = FftPlanner::new().plan_fft_inverse(l);
    let mut out = vec![0.0; len];
    let mut norm = vec![0.0; len];
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for (t, (amp, ph)) in spec
        .frames
        .axis_iter(Axis(0))
        .zip(spec.phase.axis_iter(Axis(0)))
        .enumerate()
    {
        for k in 0..=l / 2 {
            buf[k] = Complex64::from_polar(amp[k], ph[k]);
        }
        for k in 1..l / 2 {
            buf[l - k] = buf[k].conj();
        }
        ifft.process(&mut buf);
        let start = t * spec.hop;
        for n in 0..l {
            let x = buf[n].re / l as f64;
            out[start + n] += x * window[n];
            norm[start + n] += window[n] * window[n];
        }
    }
    for (o, w) in out.iter_mut().zip(&norm) {
        if *w > 1e-12 {
            *o /= w;
        }
    }
    Ok(out)
}

/// Drop frames whose energy is more than `threshold_db` below the loudest
/// frame. Order is preserved; `−∞` keeps everything.
pub fn discard_silence(spec: &Spectrogram, threshold_db: f64) -> Result<Spectrogram> {
    let energies = spec.frame_energies();
    let max = energies.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| {
            let db = if max > 0.0 && e > 0.0 {
                10.0 * (e / max).log10()
            } else if max > 0.0 || e > 0.0 {
                f64::NEG_INFINITY
            } else {
                // all-zero spectrogram
                f64::NEG_INFINITY
            };
            db >= threshold_db
        })
        .map(|(t, _)| t)
        .collect();
    if keep.is_empty() {
        return Err(Error::AllFramesSilent);
    }
    Spectrogram::new(
        spec.frames.select(Axis(0), &keep),
        spec.phase.select(Axis(0), &keep),
        spec.sample_rate,
        spec.win_len,
        spec.hop,
    )
}
