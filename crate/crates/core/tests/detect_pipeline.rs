use mdmp::synth::{fixture_anomalies, generate_fixture, AnomalySpec, SynthKind, SynthSpec};
use mdmp::{
    auc_roc, detect_semisupervised, detect_supervised, detect_unsupervised, DetectorConfig,
    DimSelect, Error, LabelVector, MultivariateSeries, ProfileVariant,
};

fn fixture(
    kind: SynthKind,
    n: usize,
    d: usize,
    m: usize,
    seed: u64,
) -> (MultivariateSeries<f64>, LabelVector) {
    let data = generate_fixture::<f64>(&SynthSpec::new(kind, n, d, m, seed)).unwrap();
    (data.series, data.labels.unwrap())
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

#[test]
fn outputs_cover_every_test_step() {
    let (train, _) = fixture(SynthKind::KofN, 1024, 2, 32, 1);
    let (test, _) = fixture(SynthKind::KofN, 900, 2, 32, 2);
    let mut cfg = DetectorConfig::unsupervised();
    cfg.m = 32;
    assert_eq!(detect_unsupervised(&test, &cfg).unwrap().len(), 900);
    let semi = DetectorConfig {
        m: 32,
        ..DetectorConfig::semisupervised()
    };
    assert_eq!(
        detect_semisupervised(&train, &test, &semi).unwrap().len(),
        900
    );
    let (train, labels) = fixture(SynthKind::KofN, 1024, 2, 32, 3);
    let grid = DetectorConfig::supervised_grid(&[16, 32], &[1], &[ProfileVariant::PRE_MAX]);
    let out = detect_supervised(&train, &labels, &test, &grid).unwrap();
    assert_eq!(out.scores.len(), 900);
    assert!(grid.contains(&out.chosen));
    assert!((0.0..=1.0).contains(&out.train_metric));
}

#[test]
fn scores_grow_with_k_before_smoothing() {
    let (test, _) = fixture(SynthKind::KofN, 1500, 3, 32, 4);
    let cfg = |k| DetectorConfig {
        m: 32,
        k,
        smooth_window: Some(0),
        ..DetectorConfig::unsupervised()
    };
    let one = detect_unsupervised(&test, &cfg(1)).unwrap();
    let two = detect_unsupervised(&test, &cfg(2)).unwrap();
    assert!(one.iter().zip(two.iter()).all(|(a, b)| b >= a));
}

#[test]
fn prepending_clean_periods_shifts_the_peak() {
    let m = 32;
    let (test, _) = fixture(SynthKind::KofN, 2048, 1, m, 5);
    let anomaly = &fixture_anomalies(&SynthSpec::new(SynthKind::KofN, 2048, 1, m, 5)).unwrap()[0];
    // Clean periods copied from a stretch far from the anomaly.
    let w = 4 * m;
    let src = if anomaly.start > 2 * w {
        0
    } else {
        test.n() - w
    };
    let warmup = test.slice(src, src + w).unwrap();
    let shifted = warmup.concat(&test).unwrap();
    let cfg = DetectorConfig {
        m,
        ..DetectorConfig::unsupervised()
    };
    let base = argmax(&detect_unsupervised(&test, &cfg).unwrap());
    let moved = argmax(&detect_unsupervised(&shifted, &cfg).unwrap());
    assert_eq!(moved, base + w);
}

#[test]
fn training_twin_suppresses_the_test_anomaly() {
    let m = 32;
    let spec = SynthSpec::new(SynthKind::TwinFreak, 2048, 1, m, 6);
    let data = generate_fixture::<f64>(&spec).unwrap();
    let layout = fixture_anomalies(&spec).unwrap();
    let split = 1024;
    assert!(layout[0].end() <= split && layout[1].start >= split);
    let train = data.series.slice(0, split).unwrap();
    let test = data.series.slice(split, 2048).unwrap();
    let labels = LabelVector(data.labels.unwrap()[..split].to_vec());

    let cfg = DetectorConfig {
        m,
        k: 1,
        ..DetectorConfig::supervised()
    };
    let sup = detect_supervised(&train, &labels, &test, &[cfg]).unwrap();
    let unsup = detect_unsupervised(
        &test,
        &DetectorConfig {
            m,
            k: 1,
            ..DetectorConfig::unsupervised()
        },
    )
    .unwrap();
    let window = layout[1].start - split..layout[1].end() - split;
    let peak = |s: &[f64]| s[window.clone()].iter().cloned().fold(f64::MIN, f64::max);
    assert!(
        peak(&sup.scores) < 0.5 * peak(&unsup),
        "{} vs {}",
        peak(&sup.scores),
        peak(&unsup)
    );
}

#[test]
fn semisupervised_detects_with_clean_training() {
    let m = 32;
    let mut spec = SynthSpec::new(SynthKind::KofN, 4096, 3, m, 7);
    spec.anomalies = vec![AnomalySpec {
        dims: vec![1],
        start: 3000,
        length: m,
    }];
    let data = generate_fixture::<f64>(&spec).unwrap();
    let train = data.series.slice(0, 2048).unwrap();
    let test = data.series.slice(2048, 4096).unwrap();
    let labels = &data.labels.unwrap()[2048..];
    let cfg = DetectorConfig {
        m,
        ..DetectorConfig::semisupervised()
    };
    let scores = detect_semisupervised(&train, &test, &cfg).unwrap();
    assert!(auc_roc(&scores, labels).unwrap() > 0.9);
}

#[test]
fn mean_selection_needs_all_columns() {
    let (test, _) = fixture(SynthKind::KofN, 1024, 3, 16, 9);
    let cfg = DetectorConfig {
        m: 16,
        dim_select: DimSelect::MeanColumns,
        ..DetectorConfig::unsupervised()
    };
    assert!(matches!(
        detect_unsupervised(&test, &cfg),
        Err(Error::RankOutOfRange { .. })
    ));
    let cfg = DetectorConfig {
        variant: ProfileVariant::PRE_SORT,
        ..cfg
    };
    assert_eq!(detect_unsupervised(&test, &cfg).unwrap().len(), 1024);
}

#[test]
fn supervised_rejects_bad_inputs() {
    let (train, labels) = fixture(SynthKind::KofN, 1024, 2, 16, 10);
    let (test, _) = fixture(SynthKind::KofN, 1024, 2, 16, 11);
    assert!(matches!(
        detect_supervised(&train, &labels, &test, &[]),
        Err(Error::EmptyGrid)
    ));
    let none = LabelVector(vec![false; 1024]);
    let grid = DetectorConfig::default_supervised_grid();
    assert!(matches!(
        detect_supervised(&train, &none, &test, &grid),
        Err(Error::NoAnomalyInTrainLabels)
    ));
    let huge = [DetectorConfig {
        m: 512,
        k: 15,
        ..DetectorConfig::supervised()
    }];
    assert!(matches!(
        detect_supervised(&train, &labels, &test, &huge),
        Err(Error::SeriesTooShort { .. })
    ));
}
