use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use voicescreen::cohort::{make_cohort, CohortSpec};
use voicescreen::ml::{
    confusion_metrics, cross_validate, fold_assignment, knn_train, lda_train, CvConfig, LdaBias,
    ModelSpec,
};
use voicescreen::periods::{segment_wm, segment_wm_pc, SegmentationConfig};
use voicescreen::pitch::{estimate_f0, F0Config};
use voicescreen::synth::{synth_voice, SynthSpec};

fn two_blobs(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<i8>) {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<i8> = (0..n).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
    let x = y
        .iter()
        .map(|&l| {
            (0..d)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z + if j == 0 { 1.2 * l as f64 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    (x, y)
}

fn affine(x: &[Vec<f64>], scale: &[f64], shift: &[f64]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|r| {
            r.iter()
                .zip(scale)
                .zip(shift)
                .map(|((v, a), c)| v * a + c)
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lda_predictions_survive_affine_rescaling(
        seed in 0u64..1000,
        scale in prop::collection::vec(0.1f64..10.0, 3),
        shift in prop::collection::vec(-50.0f64..50.0, 3),
    ) {
        let (x, y) = two_blobs(seed, 30, 3);
        let xt = affine(&x, &scale, &shift);
        for bias in [LdaBias::Prior, LdaBias::Midpoint] {
            let a = lda_train(&x, &y, bias).unwrap();
            let b = lda_train(&xt, &y, bias).unwrap();
            for (r, rt) in x.iter().zip(&xt) {
                let (sa, sb) = (a.score(r).unwrap(), b.score(rt).unwrap());
                prop_assert!((sa - sb).abs() <= 1e-7 * (1.0 + sa.abs()), "{} vs {}", sa, sb);
            }
        }
    }

    #[test]
    fn knn_predictions_survive_affine_rescaling(
        seed in 0u64..1000,
        scale in prop::collection::vec(0.1f64..10.0, 3),
        shift in prop::collection::vec(-50.0f64..50.0, 3),
    ) {
        let (x, y) = two_blobs(seed, 30, 3);
        let (q, _) = two_blobs(seed + 7, 10, 3);
        let xt = affine(&x, &scale, &shift);
        let qt = affine(&q, &scale, &shift);
        let a = knn_train(&x, &y, 3).unwrap();
        let b = knn_train(&xt, &y, 3).unwrap();
        for (r, rt) in q.iter().zip(&qt) {
            prop_assert_eq!(a.predict(r).unwrap(), b.predict(rt).unwrap());
        }
    }

    #[test]
    fn folds_partition_and_balance(n_pos in 2usize..30, n_neg in 2usize..60, folds in 2usize..8, seed in 0u64..500) {
        let y: Vec<i8> = std::iter::repeat(1).take(n_pos).chain(std::iter::repeat(-1).take(n_neg)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = fold_assignment(&y, folds, true, &mut rng);
        prop_assert_eq!(f.len(), y.len());
        let mut sizes = vec![0usize; folds];
        let mut pos = vec![0usize; folds];
        for (i, &k) in f.iter().enumerate() {
            prop_assert!(k < folds);
            sizes[k] += 1;
            if y[i] > 0 { pos[k] += 1; }
        }
        let spread = |v: &[usize]| v.iter().max().unwrap() - v.iter().min().unwrap();
        prop_assert!(spread(&sizes) <= 1);
        prop_assert!(spread(&pos) <= 1);
    }

    #[test]
    fn accuracy_lies_between_sensitivity_and_specificity(tp in 0usize..50, tn in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
        prop_assume!(tp + fn_ > 0 && tn + fp > 0);
        let m = confusion_metrics(tp, tn, fp, fn_).unwrap();
        let (s, p) = (m.sens.unwrap(), m.spec.unwrap());
        prop_assert!(m.acc >= s.min(p) - 1e-9 && m.acc <= s.max(p) + 1e-9);
        prop_assert!((m.r_avg.unwrap() - (s + p) / 2.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn segmentation_invariants(f0 in 90.0f64..260.0, jitter in 0.0f64..2.0, seed in 0u64..100) {
        let spec = SynthSpec { f0, duration_s: 1.0, jitter_pct: jitter, noise_snr_db: Some(25.0), seed, ..Default::default() };
        let w = synth_voice(&spec).unwrap().waveform;
        let c = estimate_f0(&w, &F0Config::default()).unwrap();
        let cfg = SegmentationConfig::default();
        let (lo, hi) = cfg.period_limits(w.sample_rate());
        for seg in [segment_wm_pc(&w, &c, &cfg).unwrap(), segment_wm(&w, &c, &cfg).unwrap()] {
            prop_assert!(seg.boundaries.windows(2).all(|b| b[1] > b[0]));
            prop_assert!(*seg.boundaries.last().unwrap() <= w.len());
            prop_assert_eq!(seg.periods.len(), seg.boundaries.len() - 1);
            prop_assert_eq!(seg.amplitudes.len(), seg.periods.len());
            prop_assert!(seg.periods.iter().all(|&t| t >= lo - 1.0 && t <= hi + 1.0));
        }
        prop_assert_eq!(segment_wm_pc(&w, &c, &cfg).unwrap(), segment_wm_pc(&w, &c, &cfg).unwrap());
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let d = make_cohort(&CohortSpec::default(), 4).unwrap();
    let subset = d.parse_subset("S1,S3,S11,PVI").unwrap();
    let cfg = CvConfig {
        repetitions: 12,
        seed: 9,
        ..Default::default()
    };
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    for model in [ModelSpec::lda(), ModelSpec::knn()] {
        let a = one.install(|| cross_validate(&d, &model, &subset, &cfg).unwrap());
        let b = many.install(|| cross_validate(&d, &model, &subset, &cfg).unwrap());
        assert_eq!(a, b);
    }
    let w = synth_voice(&SynthSpec {
        duration_s: 1.0,
        jitter_pct: 1.0,
        ..Default::default()
    })
    .unwrap()
    .waveform;
    let a = one.install(|| estimate_f0(&w, &F0Config::default()).unwrap());
    let b = many.install(|| estimate_f0(&w, &F0Config::default()).unwrap());
    assert_eq!(a, b);
}
