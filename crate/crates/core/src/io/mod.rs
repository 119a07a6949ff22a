//! Audio files, the synthetic corpus, binary checkpoints and metric tables.

pub mod checkpoint;
pub mod metrics;
pub mod synth;
pub mod wav;

pub use checkpoint::{
    load_checkpoint, load_spectrogram_cache, save_checkpoint, save_spectrogram_cache, Checkpoint, SpectrogramCache,
    FORMAT_VERSION, MAGIC,
};
pub use metrics::{export_metrics, export_report, parse_metrics, ReportRow};
pub use synth::{synth_speechlike, synth_speechlike_traced, SynthTrace};
pub use wav::{read_wav, write_wav_f32, write_wav_pcm16};

#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    /// Samples in `[−1, 1]`.
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_id: String,
}

/// Write through a sibling temp file so a failed write never leaves a
/// truncated artifact at `path`.
pub(crate) fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> crate::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
