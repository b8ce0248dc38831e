//! Subcommand implementations. All file outputs go through atomic
//! write-then-rename so partial runs never leave corrupt artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use topogait::descriptors::betti_curve;
use topogait::homology::{cap_infinite, pairwise_distances, rips_persistence, write_diagram_csv};
use topogait::ingest::{load_dataset, takens_embed, write_dataset, GaitDataset, Group};
use topogait::pipeline::{evaluate_task, run_grid, SweepSpec, TaskReport, TopoFeaturizer};
use topogait::report::{
    detail_text, feature_matrix_csv, grid_csv, grid_summary, report_json, summary_table,
};
use topogait::synthgait::{generate_cohort, SynthConfig};

use crate::config::RunConfig;
use crate::util::{resolve_out_dir, write_atomic};
use crate::{
    plots, ClassifyArgs, EmbedArgs, FeaturizeArgs, GenerateArgs, GridArgs, PhArgs, ReportArgs,
};

fn apply_per_class(field: &mut [f64], values: &Option<Vec<f64>>, name: &str) -> Result<()> {
    if let Some(values) = values {
        match values.len() {
            1 => field.iter_mut().for_each(|f| *f = values[0]),
            n if n == field.len() => field.copy_from_slice(values),
            n => bail!("--{name} needs 1 or {} values, got {n}", field.len()),
        }
    }
    Ok(())
}

pub(crate) fn generate(args: GenerateArgs) -> Result<()> {
    let mut cfg = match args.classes {
        2 => SynthConfig::two_class(15, 14, args.seed),
        3 => SynthConfig::three_class(15, 15, 14, args.seed),
        n => bail!("--classes must be 2 or 3, got {n}"),
    };
    if let Some(subjects) = args.subjects {
        if subjects.len() != args.classes {
            bail!(
                "--subjects needs {} values, got {}",
                args.classes,
                subjects.len()
            );
        }
        cfg.subjects_per_class = subjects;
    }
    cfg.series_length = args.series_len;
    cfg.medication_gain = args.medication_gain;

    let k = cfg.recipes.len();
    let mut amplitude: Vec<f64> = cfg.recipes.iter().map(|r| r.amplitude).collect();
    let mut noise: Vec<f64> = cfg.recipes.iter().map(|r| r.noise).collect();
    let mut period: Vec<f64> = cfg.recipes.iter().map(|r| r.period).collect();
    let mut harmonic: Vec<f64> = cfg.recipes.iter().map(|r| r.harmonic).collect();
    let mut trend: Vec<f64> = cfg.recipes.iter().map(|r| r.trend).collect();
    apply_per_class(&mut amplitude, &args.amplitude, "amplitude")?;
    apply_per_class(&mut noise, &args.noise, "noise")?;
    apply_per_class(&mut period, &args.period, "period")?;
    apply_per_class(&mut harmonic, &args.harmonic, "harmonic")?;
    apply_per_class(&mut trend, &args.trend, "trend")?;
    for i in 0..k {
        cfg.recipes[i].amplitude = amplitude[i];
        cfg.recipes[i].noise = noise[i];
        cfg.recipes[i].period = period[i];
        cfg.recipes[i].harmonic = harmonic[i];
        cfg.recipes[i].trend = trend[i];
    }

    let dataset = generate_cohort(&cfg)?;
    let path = args
        .out
        .unwrap_or_else(|| resolve_out_dir(None).join("cohort.csv"));
    let mut buf = Vec::new();
    write_dataset(&dataset, &mut buf)?;
    write_atomic(&path, &buf)?;
    let counts = dataset.group_counts();
    println!(
        "wrote {} series for {} subjects ({}) to {}",
        dataset.series().len(),
        dataset.subjects().len(),
        counts
            .iter()
            .map(|(g, n)| format!("{g}:{n}"))
            .collect::<Vec<_>>()
            .join(", "),
        path.display()
    );
    Ok(())
}

pub(crate) fn embed(args: EmbedArgs) -> Result<()> {
    let dataset = load_dataset(&args.dataset)?;
    let mut out = String::from("subject_id,group,state,variable,point");
    for j in 0..args.dim {
        let _ = write!(out, ",c{j}");
    }
    out.push('\n');
    for series in dataset.series() {
        let cloud = takens_embed(&series.values, args.dim, args.tau)?;
        for (i, point) in cloud.points().enumerate() {
            let _ = write!(
                out,
                "{},{},{},{},{i}",
                series.subject_id, series.group, series.state, series.variable
            );
            for c in point {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
    }
    let path = args
        .out
        .unwrap_or_else(|| resolve_out_dir(None).join("embedded.csv"));
    write_atomic(&path, out.as_bytes())?;
    println!("wrote embedded clouds to {}", path.display());
    Ok(())
}

pub(crate) fn ph(args: PhArgs) -> Result<()> {
    let dataset = load_dataset(&args.dataset)?;
    let dir = resolve_out_dir(args.out);
    let mut written = 0usize;
    for series in dataset.series() {
        let cloud = takens_embed(&series.values, args.dim, args.tau)?;
        let dgm = cap_infinite(&rips_persistence(&pairwise_distances(&cloud)?, 1)?);
        let mut buf = Vec::new();
        write_diagram_csv(&dgm, &mut buf)?;
        let name = format!(
            "dgm_{}_{}_{}.csv",
            series.subject_id, series.variable, series.state
        );
        write_atomic(&dir.join(name), &buf)?;
        written += 1;
    }
    println!("wrote {written} diagrams to {}", dir.display());
    Ok(())
}

fn load_and_build(config: &RunConfig) -> Result<(GaitDataset, TopoFeaturizer)> {
    let dataset = load_dataset(&config.dataset)
        .with_context(|| format!("loading dataset {}", config.dataset))?;
    let featurizer =
        TopoFeaturizer::build(&dataset, &config.task_spec(), &config.pipeline_params())?;
    Ok((dataset, featurizer))
}

pub(crate) fn featurize(args: FeaturizeArgs) -> Result<()> {
    let config = args.experiment.resolve()?;
    let (_, featurizer) = load_and_build(&config)?;
    let csv = feature_matrix_csv(&featurizer)?;
    let path = args
        .out
        .unwrap_or_else(|| resolve_out_dir(None).join("features.csv"));
    write_atomic(&path, csv.as_bytes())?;
    println!(
        "wrote {} x {} feature matrix to {}",
        featurizer.subjects().len(),
        featurizer.feature_length(),
        path.display()
    );
    Ok(())
}

pub(crate) fn classify(args: ClassifyArgs) -> Result<()> {
    let config = args.experiment.resolve()?;
    let out_dir = resolve_out_dir(args.out);
    let (dataset, featurizer) = load_and_build(&config)?;
    let report = evaluate_task(&dataset, &config.task_spec(), &config.pipeline_params())?;

    write_atomic(
        &out_dir.join("report.json"),
        report_json(&config, &report).as_bytes(),
    )?;
    write_atomic(&out_dir.join("report.txt"), detail_text(&report).as_bytes())?;
    write_atomic(
        &out_dir.join("features.csv"),
        feature_matrix_csv(&featurizer)?.as_bytes(),
    )?;
    for (s, info) in featurizer.subjects().iter().enumerate() {
        for (b, block) in featurizer.blocks().iter().enumerate() {
            let mut buf = Vec::new();
            write_diagram_csv(&featurizer.subject_diagrams(s)[b], &mut buf)?;
            let name = format!("dgm_{}_{}_{}.csv", info.id, block.variable, block.slot);
            write_atomic(&out_dir.join("diagrams").join(name), &buf)?;
        }
    }
    emit_plots(&out_dir, &featurizer, &report)?;

    print!("{}", summary_table([&report]));
    println!(
        "report written to {}",
        out_dir.join("report.json").display()
    );
    Ok(())
}

/// Persistence scatter, per-class Betti overlays, and the confusion grid.
fn emit_plots(out_dir: &Path, featurizer: &TopoFeaturizer, report: &TaskReport) -> Result<()> {
    let plots_dir = out_dir.join("plots");

    // Scatter of the first block's diagrams, one entry per class.
    let mut by_class: BTreeMap<Group, Vec<(f64, f64, u8)>> = BTreeMap::new();
    for (s, info) in featurizer.subjects().iter().enumerate() {
        let dgm = &featurizer.subject_diagrams(s)[0];
        let sink = by_class.entry(info.group).or_default();
        for p in &dgm.h0 {
            sink.push((p.birth, p.death, 0));
        }
        for p in &dgm.h1 {
            sink.push((p.birth, p.death, 1));
        }
    }
    let scatter_data: Vec<plots::ClassPoints> = by_class
        .into_iter()
        .map(|(g, pts)| (g.to_string(), pts))
        .collect();
    write_atomic(
        &plots_dir.join("diagram_scatter.svg"),
        plots::diagram_scatter(&scatter_data).as_bytes(),
    )?;

    // Mean Betti curve per class and degree on whole-cohort grids.
    let all: Vec<usize> = (0..featurizer.subjects().len()).collect();
    let grids = featurizer.fit_block_grids(&all)?;
    let mut panels: [Vec<plots::ClassCurve>; 2] = [Vec::new(), Vec::new()];
    for degree in 0..2 {
        let grid = &grids[0][degree];
        let ts = grid.points();
        let mut sums: BTreeMap<Group, (Vec<f64>, usize)> = BTreeMap::new();
        for (s, info) in featurizer.subjects().iter().enumerate() {
            let curve = betti_curve(&featurizer.subject_diagrams(s)[0], grid);
            let entry = sums
                .entry(info.group)
                .or_insert_with(|| (vec![0.0; curve.len()], 0));
            for (acc, v) in entry.0.iter_mut().zip(&curve) {
                *acc += v;
            }
            entry.1 += 1;
        }
        panels[degree] = sums
            .into_iter()
            .map(|(g, (sum, n))| {
                let mean: Vec<(f64, f64)> = ts
                    .iter()
                    .zip(&sum)
                    .map(|(&t, &v)| (t, v / n as f64))
                    .collect();
                (g.to_string(), mean)
            })
            .collect();
    }
    write_atomic(
        &plots_dir.join("betti_overlay.svg"),
        plots::betti_overlay(&panels[0], &panels[1]).as_bytes(),
    )?;

    write_atomic(
        &plots_dir.join("confusion.svg"),
        plots::confusion_heatmap(
            &report.eval.confusion,
            &report.eval.positive_label,
            &report.eval.negative_label,
        )
        .as_bytes(),
    )?;
    Ok(())
}

pub(crate) fn grid(args: GridArgs) -> Result<()> {
    let config = args.experiment.resolve()?;
    let out_dir = resolve_out_dir(args.out);
    let dataset = load_dataset(&config.dataset)
        .with_context(|| format!("loading dataset {}", config.dataset))?;

    let sweep = SweepSpec {
        sizes: args.sizes.clone(),
        pool: args
            .pool
            .unwrap_or_else(|| topogait::ingest::Variable::ALL.to_vec()),
        states: args.states.unwrap_or_else(|| vec![config.state]),
    };
    let cells = run_grid(
        &dataset,
        config.task,
        config.descriptor,
        &sweep,
        &config.pipeline_params(),
    )?;

    for cell in &cells {
        if let Ok(report) = &cell.outcome {
            let vars = cell
                .variables
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("-");
            let state = cell.state.to_string().replace('+', "");
            let mut cell_config = config.clone();
            cell_config.variables = cell.variables.clone();
            cell_config.state = cell.state;
            write_atomic(
                &out_dir.join(format!("report_{vars}_{state}.json")),
                report_json(&cell_config, report).as_bytes(),
            )?;
        }
    }
    write_atomic(
        &out_dir.join("summary.txt"),
        grid_summary(&cells).as_bytes(),
    )?;
    write_atomic(&out_dir.join("summary.csv"), grid_csv(&cells).as_bytes())?;

    let failed = cells.iter().filter(|c| c.outcome.is_err()).count();
    print!("{}", grid_summary(&cells));
    println!(
        "{} cells ({} failed) written to {}",
        cells.len(),
        failed,
        out_dir.display()
    );
    Ok(())
}

pub(crate) fn report(args: ReportArgs) -> Result<()> {
    let mut reports = Vec::new();
    for path in &args.inputs {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading report {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing report {}", path.display()))?;
        let report_value = value.get("report").cloned().unwrap_or(value);
        let report: TaskReport = serde_json::from_value(report_value)
            .with_context(|| format!("report {} has an unexpected shape", path.display()))?;
        reports.push(report);
    }
    let table = summary_table(reports.iter());
    match args.out {
        Some(path) => {
            write_atomic(&path, table.as_bytes())?;
            println!("summary written to {}", path.display());
        }
        None => print!("{table}"),
    }
    Ok(())
}
