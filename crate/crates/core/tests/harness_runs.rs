use otrelax::harness::{run_experiment, summarize, ExperimentConfig};

#[test]
fn upward_shift_shrinks_with_n() {
    let config = ExperimentConfig {
        dim: 2,
        base_samples: 50,
        n_grid: vec![10, 20, 40],
        replications: 20,
        ..ExperimentConfig::desk()
    };
    let summary = summarize(&run_experiment(&config).unwrap()).unwrap();
    for pair in summary.windows(2) {
        assert!(
            pair[1].g0_empirical.mean <= pair[0].g0_empirical.mean,
            "{pair:?}"
        );
    }
    let last = summary.last().unwrap();
    assert!(last.g0_empirical.mean >= last.g0_reference.mean);
}

#[test]
fn desk_preset_timing_and_shape() {
    let start = std::time::Instant::now();
    let config = ExperimentConfig::desk();
    let rows = run_experiment(&config).unwrap();
    assert_eq!(rows.len(), 200);
    println!("desk preset: {:?}", start.elapsed());
    let summary = summarize(&rows).unwrap();
    for s in &summary {
        println!(
            "n={} g0={:.4} gd={:.4} ref={:.4} closer={}",
            s.n,
            s.g0_empirical.mean,
            s.g_delta_empirical.mean,
            s.g0_reference.mean,
            s.closer_fraction
        );
    }
}
