//! Integration checks for the full synthetic pipeline: embedding ->
//! persistence -> descriptors -> forest under LOOCV.

use topogait::classify::ForestParams;
use topogait::descriptors::DescriptorKind;
use topogait::ingest::Variable;
use topogait::pipeline::{
    evaluate_task, run_grid, PipelineError, PipelineParams, StatePolicy, SweepSpec, TaskPair,
    TaskSpec,
};
use topogait::synthgait::{generate_cohort, ClassRecipe, SynthConfig};

fn bc_mintc_spec(policy: StatePolicy) -> TaskSpec {
    TaskSpec {
        pair: TaskPair::IpdVsVap,
        policy,
        variables: vec![Variable::MinTC],
        descriptor: DescriptorKind::BC,
    }
}

fn fast_params(seed: u64) -> PipelineParams {
    PipelineParams {
        forest: ForestParams {
            n_trees: 100,
            seed,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn separable_cohort_is_perfect() {
    let mut cfg = SynthConfig::two_class(8, 7, 21);
    cfg.recipes = vec![ClassRecipe::clean(1.0), ClassRecipe::clean(0.6)];
    let dataset = generate_cohort(&cfg).unwrap();
    let report =
        evaluate_task(&dataset, &bc_mintc_spec(StatePolicy::Off), &fast_params(1)).unwrap();
    assert_eq!(report.eval.metrics.accuracy, 1.0);
    assert_eq!(report.eval.metrics.auc, Some(1.0));
    assert_eq!(report.eval.folds, 15);
}

#[test]
fn offon_fusion_doubles_features() {
    let dataset = generate_cohort(&SynthConfig::two_class(5, 5, 2)).unwrap();
    let report = evaluate_task(
        &dataset,
        &bc_mintc_spec(StatePolicy::OffOn),
        &fast_params(1),
    )
    .unwrap();
    assert_eq!(report.feature_length, 100);
    assert_eq!(report.eval.folds, 10);
}

#[test]
fn missing_series_names_the_subject() {
    // Drop one required series and the error must point at the subject.
    let dataset = generate_cohort(&SynthConfig::two_class(4, 4, 3)).unwrap();
    let thinned: Vec<_> = dataset
        .series()
        .iter()
        .filter(|s| {
            !(s.subject_id == "IPD02"
                && s.variable == Variable::MinTC
                && s.state == topogait::ingest::State::Off)
        })
        .cloned()
        .collect();
    let dataset = topogait::ingest::GaitDataset::from_series(thinned).unwrap();
    let err =
        evaluate_task(&dataset, &bc_mintc_spec(StatePolicy::Off), &fast_params(1)).unwrap_err();
    match err {
        PipelineError::Validation(msg) => assert!(msg.contains("IPD02"), "{msg}"),
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn absent_group_is_an_early_validation_error() {
    // A two-class synthetic cohort has no controls; CO tasks must fail fast.
    let dataset = generate_cohort(&SynthConfig::two_class(4, 4, 3)).unwrap();
    let spec = TaskSpec {
        pair: TaskPair::CoVsIpd,
        policy: StatePolicy::Off,
        variables: vec![Variable::MinTC],
        descriptor: DescriptorKind::BC,
    };
    let err = evaluate_task(&dataset, &spec, &fast_params(1)).unwrap_err();
    match err {
        PipelineError::Validation(msg) => assert!(msg.contains("CO"), "{msg}"),
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn added_noise_does_not_help_auc() {
    // Mean AUC over seeds must not improve when class-B noise grows.
    let mean_auc = |noise: f64| -> f64 {
        let mut total = 0.0;
        for seed in 0..5 {
            let mut cfg = SynthConfig::two_class(6, 6, 100 + seed);
            cfg.recipes[1] = ClassRecipe::clean(0.6).with_noise(noise);
            let dataset = generate_cohort(&cfg).unwrap();
            let report = evaluate_task(
                &dataset,
                &bc_mintc_spec(StatePolicy::Off),
                &fast_params(seed),
            )
            .unwrap();
            total += report.eval.metrics.auc.unwrap();
        }
        total / 5.0
    };
    let low = mean_auc(0.0);
    let high = mean_auc(1.2);
    assert!(
        low + 0.02 >= high,
        "auc should not rise with noise: {low} -> {high}"
    );
}

#[test]
fn grid_pair_sweep_has_fifteen_cells() {
    let dataset = generate_cohort(&SynthConfig::two_class(4, 4, 5)).unwrap();
    let sweep = SweepSpec {
        sizes: vec![2],
        pool: Variable::ALL.to_vec(),
        states: vec![StatePolicy::Off],
    };
    let params = PipelineParams {
        forest: ForestParams {
            n_trees: 20,
            ..Default::default()
        },
        ..Default::default()
    };
    let cells = run_grid(
        &dataset,
        TaskPair::IpdVsVap,
        DescriptorKind::BC,
        &sweep,
        &params,
    )
    .unwrap();
    assert_eq!(cells.len(), 15);
    assert!(cells.iter().all(|c| c.outcome.is_ok()));
}

#[test]
fn empty_sweep_is_rejected() {
    let dataset = generate_cohort(&SynthConfig::two_class(4, 4, 5)).unwrap();
    let sweep = SweepSpec {
        sizes: vec![],
        pool: Variable::ALL.to_vec(),
        states: vec![StatePolicy::Off],
    };
    assert!(matches!(
        run_grid(
            &dataset,
            TaskPair::IpdVsVap,
            DescriptorKind::BC,
            &sweep,
            &PipelineParams::default()
        ),
        Err(PipelineError::Config(_))
    ));
}

#[test]
fn co_task_runs_thirty_folds() {
    let dataset = generate_cohort(&SynthConfig::three_class(15, 15, 14, 41)).unwrap();
    let spec = TaskSpec {
        pair: TaskPair::CoVsIpd,
        policy: StatePolicy::Off,
        variables: vec![Variable::MinTC],
        descriptor: DescriptorKind::BC,
    };
    let report = evaluate_task(&dataset, &spec, &fast_params(4)).unwrap();
    assert_eq!(report.eval.folds, 30);
    assert_eq!(report.eval.positive_label, "IPD");
}

#[test]
fn co_task_offon_duplicates_the_control_vector() {
    // Controls have one recording; in Off+On fusion their None-state block
    // fills both slots, so widths still line up.
    let dataset = generate_cohort(&SynthConfig::three_class(3, 3, 3, 42)).unwrap();
    let spec = TaskSpec {
        pair: TaskPair::CoVsIpd,
        policy: StatePolicy::OffOn,
        variables: vec![Variable::MinTC],
        descriptor: DescriptorKind::BC,
    };
    let featurizer =
        topogait::pipeline::TopoFeaturizer::build(&dataset, &spec, &fast_params(4)).unwrap();
    assert_eq!(featurizer.feature_length(), 100);
    let co_index = featurizer
        .subjects()
        .iter()
        .position(|s| s.id.starts_with("CO"))
        .unwrap();
    let dgms = featurizer.subject_diagrams(co_index);
    assert_eq!(dgms.len(), 2);
    assert_eq!(dgms[0], dgms[1]);
    let report = evaluate_task(&dataset, &spec, &fast_params(4)).unwrap();
    assert_eq!(report.feature_length, 100);
}

#[test]
fn standardize_toggle_changes_diagrams_not_shapes() {
    let dataset = generate_cohort(&SynthConfig::two_class(4, 4, 17)).unwrap();
    let spec = bc_mintc_spec(StatePolicy::Off);
    let raw = evaluate_task(&dataset, &spec, &fast_params(3)).unwrap();
    let mut params = fast_params(3);
    params.standardize = true;
    let scaled = evaluate_task(&dataset, &spec, &params).unwrap();
    assert_eq!(raw.feature_length, scaled.feature_length);
    // Different geometry, same contract.
    assert_ne!(
        raw.eval
            .per_subject
            .iter()
            .map(|r| r.score)
            .collect::<Vec<_>>(),
        scaled
            .eval
            .per_subject
            .iter()
            .map(|r| r.score)
            .collect::<Vec<_>>()
    );
}

#[test]
fn grid_best_row_is_the_max_auc_cell() {
    let dataset = generate_cohort(&SynthConfig::two_class(5, 5, 23)).unwrap();
    let sweep = SweepSpec {
        sizes: vec![2],
        pool: vec![Variable::MinTC, Variable::MaxTLSW, Variable::MaxHC],
        states: vec![StatePolicy::Off],
    };
    let cells = run_grid(
        &dataset,
        TaskPair::IpdVsVap,
        DescriptorKind::BC,
        &sweep,
        &fast_params(6),
    )
    .unwrap();
    let ranked = topogait::pipeline::rank_cells(&cells);
    let best = ranked[0]
        .outcome
        .as_ref()
        .unwrap()
        .eval
        .metrics
        .auc
        .unwrap();
    let max = cells
        .iter()
        .filter_map(|c| c.outcome.as_ref().ok())
        .filter_map(|r| r.eval.metrics.auc)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(best, max);
}

#[test]
fn report_is_identical_across_worker_counts() {
    let dataset = generate_cohort(&SynthConfig::two_class(6, 5, 11)).unwrap();
    let spec = bc_mintc_spec(StatePolicy::OffOn);
    let params = fast_params(9);
    let run = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        let report = pool.install(|| evaluate_task(&dataset, &spec, &params).unwrap());
        topogait::report::report_json(&params, &report)
    };
    assert_eq!(run(1), run(4));
}
