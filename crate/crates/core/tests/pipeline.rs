use ndarray::Array2;

use gamma_rbm::dsp::{discard_silence, istft, stft, AMPLITUDE_FLOOR_RATIO};
use gamma_rbm::evaluation::evaluate;
use gamma_rbm::io::synth_speechlike_traced;
use gamma_rbm::math::Rng;
use gamma_rbm::models::{GammaRbmParams, ModelKind, ModelParams, Rbm};
use gamma_rbm::training::{self, TrainConfig};

fn frames(seed: u64, clips: u64) -> Array2<f64> {
    let blocks: Vec<Array2<f64>> = (0..clips)
        .map(|k| {
            let tr = synth_speechlike_traced(&mut Rng::new(seed, k), 1.0, 16_000).unwrap();
            let mut s = discard_silence(&stft(&tr.clip.samples, 256, 64, 16_000).unwrap(), -60.0).unwrap();
            s.floor_amplitudes(AMPLITUDE_FLOOR_RATIO);
            s.into_frames()
        })
        .collect();
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    ndarray::concatenate(ndarray::Axis(0), &views).unwrap()
}

#[test]
fn two_synthetic_clips_frame_count() {
    let sr = 16_000;
    let mut total_kept = 0;
    let mut total_silent = 0;
    for k in 0..2 {
        let tr = synth_speechlike_traced(&mut Rng::new(0, k), 1.0, sr).unwrap();
        let spec = stft(&tr.clip.samples, 256, 64, sr).unwrap();
        assert_eq!(spec.num_frames(), (16_000 - 256) / 64 + 1);
        total_silent += (0..spec.num_frames())
            .filter(|&t| tr.f0[t * 64..t * 64 + 256].iter().all(|&f| f == 0.0))
            .count();
        total_kept += discard_silence(&spec, -60.0).unwrap().num_frames();
    }
    let all = 2 * ((16_000 - 256) / 64 + 1);
    assert!(total_kept <= all - total_silent);
    assert!(total_kept > all / 2);
}

#[test]
fn resynthesis_with_original_phase_is_finite() {
    let tr = synth_speechlike_traced(&mut Rng::new(3, 0), 1.0, 16_000).unwrap();
    let spec = stft(&tr.clip.samples, 256, 64, 16_000).unwrap();
    let y = istft(&spec).unwrap();
    assert_eq!(y.len(), spec.signal_len());
    let err: f64 = tr.clip.samples[256..y.len() - 256]
        .iter()
        .zip(&y[256..y.len() - 256])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    assert!(err < 1e-20);
}

#[test]
fn gamma_training_stays_finite_and_positive() {
    let train = frames(21, 3);
    let cfg = TrainConfig {
        hidden_units: 16,
        epochs: 100,
        seed: 4,
        ..TrainConfig::default()
    };
    let run = training::train(train.view(), None, ModelKind::Gamma, &cfg).unwrap();
    assert!(run.params.is_finite());
    assert_eq!(run.log.len(), 100);
    assert!(run.log.iter().all(|m| m.mse_amp.is_finite() && m.mse_log.is_finite()));
    assert!(run.log.iter().all(|m| m.exact_ll.is_some_and(f64::is_finite)));
    let rep = evaluate(&run.params, train.view(), &run.stats).unwrap();
    assert_eq!(rep.negative_bin_count, 0);
}

#[test]
fn likelihood_improves_over_initialization() {
    let mut rng = Rng::new(50, 0);
    let teacher = GammaRbmParams::init(4, 3, 0.01, &mut rng).unwrap();
    let data = teacher.sample_exact(2000, &mut rng).unwrap();
    let cfg = TrainConfig {
        hidden_units: 3,
        epsilon: 0.01,
        epochs: 50,
        seed: 8,
        ..TrainConfig::default()
    };
    let stats = training::NormalizationStats::fit(data.view(), training::NormalizationKind::GammaScale).unwrap();
    let normalized = stats.apply(data.view()).unwrap();
    let init = ModelParams::init(ModelKind::Gamma, 4, 3, 0.01, &mut Rng::new(8, 0)).unwrap();
    let before = init.exact_log_likelihood(normalized.view()).unwrap();
    let run = training::train(data.view(), None, ModelKind::Gamma, &cfg).unwrap();
    let after = run.log.last().unwrap().exact_ll.unwrap();
    assert!(after > before, "{before} -> {after}");
    if let ModelParams::Gamma(p) = &run.params {
        assert!(p.supports_exact_likelihood());
    }
}
