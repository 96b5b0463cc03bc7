use std::fmt::Write as _;
use std::path::Path;

use super::{write_text, ReportError};
use crate::corpus::Category;
use crate::metrics::{BinaryMetrics, MetricsReport};
use crate::Task;

/// A fraction rendered as a percentage with two decimals.
pub fn percent(value: f64) -> String {
    format!("{:.2}", value * 100.0)
}

fn header(task: Task) -> Vec<String> {
    let mut h = vec!["system".to_string()];
    match task {
        Task::Binary => h.extend(["precision", "recall", "f1"].map(String::from)),
        Task::Multilabel => {
            h.extend(Category::ALL.iter().map(|c| format!("f1_{}", c.slug())));
            h.extend(["macro_precision", "macro_recall", "macro_f1"].map(String::from));
        }
    }
    h
}

fn binary_cells(m: &BinaryMetrics) -> [String; 3] {
    [percent(m.precision), percent(m.recall), percent(m.f1)]
}

/// TSV with one row per named report. Binary tables have P, R and F1;
/// multi-label tables have per-category F1 followed by macro P, R and F1.
/// A binary report in a multi-label table leaves the category cells as `-`;
/// a multi-label report in a binary table shows its macro scores.
pub fn render_metrics_table(task: Task, rows: &[(String, MetricsReport)]) -> String {
    let mut out = header(task).join("\t");
    out.push('\n');
    for (name, report) in rows {
        let mut cells = vec![name.clone()];
        match (task, report) {
            (Task::Binary, MetricsReport::Binary(m)) => cells.extend(binary_cells(m)),
            (Task::Binary, MetricsReport::MultiLabel(m)) => {
                cells.extend([percent(m.macro_precision), percent(m.macro_recall), percent(m.macro_f1)])
            }
            (Task::Multilabel, MetricsReport::MultiLabel(m)) => {
                cells.extend(m.per_category.iter().map(|c| percent(c.f1)));
                cells.extend([percent(m.macro_precision), percent(m.macro_recall), percent(m.macro_f1)]);
            }
            (Task::Multilabel, MetricsReport::Binary(m)) => {
                cells.extend(std::iter::repeat_n("-".to_string(), Category::COUNT));
                cells.extend(binary_cells(m));
            }
        }
        let _ = writeln!(out, "{}", cells.join("\t"));
    }
    out
}

pub fn emit_metrics_table(task: Task, rows: &[(String, MetricsReport)], path: &Path) -> Result<(), ReportError> {
    write_text(path, &render_metrics_table(task, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MultiLabelMetrics;

    #[test]
    fn reported_row_renders() {
        let m = BinaryMetrics::from_precision_recall(0.6595, 0.5585);
        let table = render_metrics_table(Task::Binary, &[("model-2".into(), MetricsReport::Binary(m))]);
        assert_eq!(table, "system\tprecision\trecall\tf1\nmodel-2\t65.95\t55.85\t60.48\n");
    }

    #[test]
    fn empty_tables_are_header_only() {
        assert_eq!(render_metrics_table(Task::Binary, &[]).lines().count(), 1);
        assert_eq!(
            render_metrics_table(Task::Multilabel, &[]).trim_end().split('\t').count(),
            1 + Category::COUNT + 3
        );
    }

    #[test]
    fn multilabel_macro_column_is_the_category_mean() {
        let per: Vec<BinaryMetrics> = (0..7)
            .map(|k| BinaryMetrics::from_precision_recall(0.1 * k as f64, 0.5))
            .collect();
        let m = MultiLabelMetrics::from_per_category(per.clone());
        let table = render_metrics_table(Task::Multilabel, &[("b4mc".into(), MetricsReport::MultiLabel(m.clone()))]);
        let row: Vec<&str> = table.lines().nth(1).unwrap().split('\t').collect();
        let mean = per.iter().map(|p| p.f1).sum::<f64>() / 7.0;
        assert_eq!(row[10], percent(mean));
        assert_eq!(row[1], percent(per[0].f1));
    }
}
