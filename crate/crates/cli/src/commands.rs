use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ndarray::{concatenate, Array2, Axis};

use gamma_rbm::dsp::{self, AMPLITUDE_FLOOR_RATIO};
use gamma_rbm::evaluation;
use gamma_rbm::io::{self, Checkpoint, ReportRow, SpectrogramCache};
use gamma_rbm::math::Rng;
use gamma_rbm::models::ModelKind;
use gamma_rbm::training;

use crate::settings::{describe, Settings};

pub enum Source {
    WavDir(PathBuf),
    Synth {
        clips: usize,
        seconds: f64,
        sample_rate: u32,
    },
}

/// Amplitude frames of one clip after silence removal and flooring.
fn clip_frames(s: &Settings, clip: &io::AudioClip) -> Result<Array2<f64>> {
    let spec = dsp::stft(&clip.samples, s.win, s.hop, clip.sample_rate)?;
    let mut kept = dsp::discard_silence(&spec, s.silence_db)?;
    kept.floor_amplitudes(AMPLITUDE_FLOOR_RATIO);
    Ok(kept.into_frames())
}

fn wav_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    Ok(files)
}

pub fn prepare(s: &Settings, source: &Source, out: &Path) -> Result<()> {
    let mut blocks = Vec::new();
    let mut sample_rate = None;
    match source {
        Source::WavDir(dir) => {
            let files = wav_files(dir)?;
            if files.is_empty() {
                bail!("no .wav files in {}", dir.display());
            }
            for f in &files {
                let frames = io::read_wav(f).map_err(anyhow::Error::from).and_then(|clip| {
                    if let Some(sr) = sample_rate {
                        if sr != clip.sample_rate {
                            bail!("sample rate {} differs from earlier files ({sr})", clip.sample_rate);
                        }
                    }
                    let frames = clip_frames(s, &clip)?;
                    sample_rate = Some(clip.sample_rate);
                    Ok(frames)
                });
                match frames {
                    Ok(b) => blocks.push(b),
                    Err(e) => eprintln!("skipping {}: {e:#}", f.display()),
                }
            }
        }
        Source::Synth {
            clips,
            seconds,
            sample_rate: sr,
        } => {
            if *clips == 0 {
                bail!("--synth-clips must be positive");
            }
            for k in 0..*clips {
                let mut rng = Rng::new(s.train.seed, k as u64);
                let clip = io::synth_speechlike(&mut rng, *seconds, *sr)?;
                blocks.push(clip_frames(s, &clip).with_context(|| format!("synthetic clip {k}"))?);
            }
            sample_rate = Some(*sr);
        }
    }
    if blocks.is_empty() {
        bail!("no usable input files");
    }
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    let frames = concatenate(Axis(0), &views)?;
    let cache = SpectrogramCache {
        frames,
        sample_rate: sample_rate.expect("set with the first block"),
        win_len: s.win,
        hop: s.hop,
        silence_db: s.silence_db,
    };
    io::save_spectrogram_cache(out, &cache).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "wrote {} frames x {} bins to {}",
        cache.frames.nrows(),
        cache.frames.ncols(),
        out.display()
    );
    Ok(())
}

/// `run.ckpt` → `run-j200.ckpt` when sweeping.
pub fn sweep_path(path: &Path, hidden: usize, sweeping: bool) -> PathBuf {
    if !sweeping {
        return path.to_path_buf();
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-j{hidden}.{}", ext.to_string_lossy()),
        None => format!("{stem}-j{hidden}"),
    };
    path.with_file_name(name)
}

fn load_cache(path: &Path) -> Result<SpectrogramCache> {
    io::load_spectrogram_cache(path).with_context(|| format!("loading cache {}", path.display()))
}

fn load_model(path: &Path) -> Result<Checkpoint> {
    io::load_checkpoint(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

pub fn train(s: &Settings, cache_path: &Path, ckpt_path: &Path, metrics_path: &Path) -> Result<()> {
    let cache = load_cache(cache_path)?;
    let sweeping = s.hidden.len() > 1;
    for index in 0..s.hidden.len() {
        let cfg = s.train_config(index);
        let run = training::train(cache.frames.view(), None, s.model, &cfg)
            .with_context(|| format!("training {} with J={}", s.model, cfg.hidden_units))?;
        let ck_out = sweep_path(ckpt_path, cfg.hidden_units, sweeping);
        let m_out = sweep_path(metrics_path, cfg.hidden_units, sweeping);
        let mut meta = describe(s.model, &cfg);
        meta.extend([
            ("frames".to_string(), cache.frames.nrows().to_string()),
            ("bins".to_string(), cache.frames.ncols().to_string()),
            ("sample_rate".to_string(), cache.sample_rate.to_string()),
            ("win".to_string(), cache.win_len.to_string()),
            ("hop".to_string(), cache.hop.to_string()),
        ]);
        let ck = Checkpoint {
            params: run.params,
            stats: run.stats,
            config: cfg.clone(),
        };
        io::save_checkpoint(&ck_out, &ck).with_context(|| format!("writing {}", ck_out.display()))?;
        io::export_metrics(&run.log, &meta, &m_out).with_context(|| format!("writing {}", m_out.display()))?;
        let last = run.log.last().expect("nonempty");
        println!(
            "{} J={}: epoch {} mse_amp={:.6} mse_log={:.6} -> {}, {}",
            s.model,
            cfg.hidden_units,
            last.epoch,
            last.mse_amp,
            last.mse_log,
            ck_out.display(),
            m_out.display()
        );
    }
    Ok(())
}

pub fn evaluate(_s: &Settings, ckpt_path: &Path, cache_path: &Path, report: Option<&Path>) -> Result<()> {
    let ck = load_model(ckpt_path)?;
    let cache = load_cache(cache_path)?;
    let (model_i, cache_i) = (ck.params.visible_dim(), cache.frames.ncols());
    if model_i != cache_i {
        bail!("dimension mismatch: checkpoint has I={model_i} visible units, cache has I={cache_i} bins");
    }
    let rep = evaluation::evaluate(&ck.params, cache.frames.view(), &ck.stats)?;
    println!(
        "{:<6} {:>8} {:>16} {:>16} {:>14}",
        "model", "frames", "mse_amp", "mse_log", "negative_bins"
    );
    println!(
        "{:<6} {:>8} {:>16.6} {:>16.6} {:>14}",
        ck.kind().to_string(),
        rep.frames,
        rep.mse_amp,
        rep.mse_log,
        rep.negative_bin_count
    );
    let out = match report {
        Some(p) => p.to_path_buf(),
        None => ckpt_path.with_extension("eval.csv"),
    };
    let rows = [ReportRow {
        model: ck.kind().to_string(),
        report: rep,
    }];
    io::export_report(&rows, &describe(ck.kind(), &ck.config), &out)
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

pub fn reconstruct(s: &Settings, ckpt_path: &Path, wav_in: &Path, wav_out: &Path) -> Result<()> {
    let ck = load_model(ckpt_path)?;
    let win = 2 * (ck.params.visible_dim() - 1);
    if win != s.win {
        bail!(
            "window mismatch: checkpoint has I={} bins (win {win}), --win is {}",
            ck.params.visible_dim(),
            s.win
        );
    }
    let clip = io::read_wav(wav_in).with_context(|| format!("reading {}", wav_in.display()))?;
    let spec = dsp::stft(&clip.samples, win, s.hop, clip.sample_rate).context("stage stft")?;
    let mut floored = spec.clone();
    floored.floor_amplitudes(AMPLITUDE_FLOOR_RATIO);
    let normalized = ck.stats.apply(floored.frames().view()).context("stage normalize")?;
    let recon = ck.params.reconstruct(normalized.view()).context("stage reconstruct")?;
    let mut amps = ck.stats.invert(recon.view()).context("stage denormalize")?;
    if ck.kind() != ModelKind::Gamma {
        // a negative amplitude would flip the original phase
        amps.mapv_inplace(|a| a.max(0.0));
    }
    if amps.iter().any(|a| !a.is_finite()) {
        return Err(anyhow!("stage reconstruct: non-finite amplitudes"));
    }
    let resynth = spec.with_frames(amps).context("stage combine phase")?;
    let mut y = dsp::istft(&resynth).context("stage istft")?;
    y.resize(clip.samples.len(), 0.0);
    io::write_wav_pcm16(wav_out, &y, clip.sample_rate).with_context(|| format!("writing {}", wav_out.display()))?;
    println!("wrote {} samples to {}", y.len(), wav_out.display());
    Ok(())
}

pub fn synth(s: &Settings, out: &Path, seconds: f64, sample_rate: u32) -> Result<()> {
    let clip = io::synth_speechlike(&mut Rng::new(s.train.seed, 0), seconds, sample_rate)?;
    io::write_wav_pcm16(out, &clip.samples, sample_rate).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} samples to {}", clip.samples.len(), out.display());
    Ok(())
}
