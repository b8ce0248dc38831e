//! Report rendering: the machine-readable JSON report file and the
//! human-readable summary tables.
//!
//! The JSON file is a pure function of (config echo, task report); nothing
//! run-dependent (timings, worker counts, hostnames) may appear in it, so
//! identical runs produce byte-identical files.

use serde::Serialize;

use crate::pipeline::{GridCell, TaskReport};

#[derive(Serialize)]
struct ReportFile<'a, C: Serialize> {
    config: &'a C,
    report: &'a TaskReport,
}

/// Serialize a report with its effective config echo. Pretty-printed JSON
/// with a trailing newline; stable field order.
pub fn report_json<C: Serialize>(config: &C, report: &TaskReport) -> String {
    let file = ReportFile { config, report };
    let mut text = serde_json::to_string_pretty(&file).expect("report serialization");
    text.push('\n');
    text
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.2}"),
        None => "--".into(),
    }
}

fn variables_label(report: &TaskReport) -> String {
    report
        .variables
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("+")
}

/// One row per report in the usual results-table layout:
/// variable(s), descriptor, state, AUC, accuracy, sensitivity, specificity.
pub fn summary_table<'a>(reports: impl IntoIterator<Item = &'a TaskReport>) -> String {
    let mut rows = vec![format!(
        "{:<32} {:<4} {:<7} {:>5} {:>5} {:>5} {:>5}",
        "Gait Variable(s)", "TD", "State", "AUC", "Accu", "Sens", "Spec"
    )];
    for r in reports {
        rows.push(format!(
            "{:<32} {:<4} {:<7} {:>5} {:>5} {:>5} {:>5}",
            variables_label(r),
            r.descriptor.to_string(),
            r.state,
            fmt_opt(r.eval.metrics.auc),
            format!("{:.2}", r.eval.metrics.accuracy),
            fmt_opt(r.eval.metrics.sensitivity),
            fmt_opt(r.eval.metrics.specificity),
        ));
    }
    rows.push(String::new());
    rows.join("\n")
}

/// Per-subject fold outcomes plus the confusion counts, appended to the
/// task summary for the human-readable report file.
pub fn detail_text(report: &TaskReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "task {} | state {} | descriptor {} | variables {} | features {}\n",
        report.task,
        report.state,
        report.descriptor,
        variables_label(report),
        report.feature_length
    ));
    let cm = &report.eval.confusion;
    out.push_str(&format!(
        "confusion (positive = {}): tp={} fn={} fp={} tn={}\n",
        report.eval.positive_label, cm.tp, cm.fn_, cm.fp, cm.tn
    ));
    out.push_str(&format!(
        "folds={} leakage_checks={}\n\n",
        report.eval.folds, report.eval.leakage_checks
    ));
    out.push_str(&summary_table([report]));
    out.push_str("\nper-subject:\n");
    for r in &report.eval.per_subject {
        out.push_str(&format!(
            "  {:<10} truth={:<4} predicted={:<4} score={:.4}\n",
            r.subject_id, r.truth, r.predicted, r.score
        ));
    }
    out
}

/// Grid sweep summary: successful cells ranked by AUC (best first), failed
/// cells listed with their errors.
pub fn grid_summary(cells: &[GridCell]) -> String {
    let ranked = crate::pipeline::rank_cells(cells);
    let mut out = String::from("rank combination ranked by AUC\n");
    out.push_str(&summary_table(
        ranked.iter().map(|c| c.outcome.as_ref().unwrap()),
    ));
    let failures: Vec<&GridCell> = cells.iter().filter(|c| c.outcome.is_err()).collect();
    if !failures.is_empty() {
        out.push_str("\nfailed cells:\n");
        for cell in failures {
            let vars = cell
                .variables
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("+");
            out.push_str(&format!(
                "  {vars} [{}]: {}\n",
                cell.state,
                cell.outcome.as_ref().unwrap_err()
            ));
        }
    }
    out
}

/// Grid sweep as CSV, one row per cell in ranked order.
pub fn grid_csv(cells: &[GridCell]) -> String {
    let mut out = String::from("variables,state,auc,accuracy,sensitivity,specificity,error\n");
    for cell in crate::pipeline::rank_cells(cells) {
        let r = cell.outcome.as_ref().unwrap();
        let m = &r.eval.metrics;
        out.push_str(&format!(
            "{},{},{},{},{},{},\n",
            variables_label(r),
            r.state,
            m.auc.map(|v| v.to_string()).unwrap_or_default(),
            m.accuracy,
            m.sensitivity.map(|v| v.to_string()).unwrap_or_default(),
            m.specificity.map(|v| v.to_string()).unwrap_or_default(),
        ));
    }
    for cell in cells.iter().filter(|c| c.outcome.is_err()) {
        let vars = cell
            .variables
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("+");
        out.push_str(&format!(
            "{vars},{},,,,,\"{}\"\n",
            cell.state,
            cell.outcome.as_ref().unwrap_err().replace('"', "'")
        ));
    }
    out
}

/// Feature-matrix dump: `subject_id,label` then one column per feature,
/// computed on grids fitted over the whole cohort.
pub fn feature_matrix_csv(
    featurizer: &crate::pipeline::TopoFeaturizer,
) -> Result<String, crate::pipeline::PipelineError> {
    let names = featurizer.feature_names();
    let rows = featurizer.featurize_all()?;
    let mut out = String::from("subject_id,label");
    for name in &names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (info, row) in featurizer.subjects().iter().zip(&rows) {
        out.push_str(&info.id);
        out.push(',');
        out.push_str(info.group.as_str());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    Ok(out)
}
