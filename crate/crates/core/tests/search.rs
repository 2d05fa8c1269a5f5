use dstsr_core::rng;
use dstsr_core::search::{
    consolidate, evolve, evolve_traced, multi_run, training_set_from_columns, SearchConfig, TrainingSet,
};
use rand::Rng;

fn planted(n: usize, seed: u64) -> TrainingSet {
    let mut r = rng::stream(seed);
    let dst: Vec<f64> = (0..n).map(|_| r.random_range(-200.0..=20.0)).collect();
    let ey: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..=10.0)).collect();
    let pdyn: Vec<f64> = (0..n).map(|_| r.random_range(0.5..10.0)).collect();
    let pb: Vec<f64> = (0..n).map(|_| r.random_range(0.0..0.3)).collect();
    let y = dst.iter().zip(&ey).map(|(d, e)| -0.05 * d - e).collect();
    training_set_from_columns(dst, ey, pdyn, pb, y).unwrap()
}

#[test]
fn recovers_planted_rate_at_complexity_five() {
    let train = planted(1000, 3);
    let cfg = SearchConfig {
        iterations: 200,
        population_size: 60,
        parsimony: 0.01,
        seed: 4,
        ..SearchConfig::default()
    };
    let hof = evolve(&cfg, &train).unwrap();
    let hit = hof.iter().find(|c| c.complexity <= 5 && c.loss < 1e-3);
    assert!(hit.is_some(), "best: {:?}", hof.best());
}

#[test]
fn best_fitness_never_worsens() {
    let train = planted(300, 1);
    let cfg = SearchConfig {
        iterations: 40,
        parsimony: 0.05,
        ..SearchConfig::default()
    };
    for trace in evolve_traced(&cfg, &train).unwrap() {
        assert_eq!(trace.best_fitness.len(), 41);
        assert!(trace.best_fitness.windows(2).all(|w| w[1] <= w[0]));
        assert!(trace.hall_of_fame.iter().all(|c| c.complexity <= cfg.max_complexity));
    }
}

#[test]
fn serial_and_parallel_agree() {
    let train = planted(300, 2);
    let cfg = SearchConfig {
        iterations: 20,
        seed: 9,
        ..SearchConfig::default()
    };
    let serial = SearchConfig {
        parallel: false,
        ..cfg.clone()
    };
    assert_eq!(multi_run(&cfg, 3, &train).unwrap(), multi_run(&serial, 3, &train).unwrap());
}

#[test]
fn hundred_runs_sample_in_range() {
    let train = planted(50, 5);
    let cfg = SearchConfig {
        iterations: 0,
        ..SearchConfig::default()
    };
    let ens = multi_run(&cfg, 100, &train).unwrap();
    assert_eq!(ens.runs.len(), 100);
    for run in &ens.runs {
        let h = run.hyperparameters;
        assert!((0.0..=0.9).contains(&h.parsimony));
        assert!((20..=120).contains(&h.population_size));
    }
    let ranked = consolidate(&ens);
    assert!(ranked.windows(2).all(|w| w[0].candidate.loss <= w[1].candidate.loss));
    assert!(ranked.iter().all(|c| c.candidate.complexity <= 30));
}
