use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{write_text, ReportError};
use crate::threshold::ThresholdSearchResult;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveFiles {
    pub tsv: PathBuf,
    pub svg: PathBuf,
}

/// `threshold<TAB>f1`, one row per candidate, ascending by threshold.
pub fn render_curve_tsv(result: &ThresholdSearchResult) -> String {
    let mut out = String::from("threshold\tf1\n");
    for p in &result.curve {
        let _ = writeln!(out, "{}\t{}", p.threshold, p.f1);
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn x(threshold: f64) -> f64 {
    MARGIN + threshold * (WIDTH - 2.0 * MARGIN)
}

fn y(f1: f64) -> f64 {
    HEIGHT - MARGIN - f1 * (HEIGHT - 2.0 * MARGIN)
}

/// Line chart of F1 against threshold on `[0, 1] x [0, 1]`, with the chosen
/// threshold marked.
pub fn render_curve_svg(result: &ThresholdSearchResult, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape_xml(title)
    );
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            x(0.0),
            y(v),
            x(1.0),
            y(v)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.1}</text>"#,
            x(0.0) - 6.0,
            y(v) + 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.1}</text>"#,
            x(v),
            y(0.0) + 18.0
        );
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="none" stroke="black"/>"#,
        x(0.0),
        y(1.0),
        x(0.0),
        y(0.0),
        x(1.0),
        y(0.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">threshold</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">F1</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let points: Vec<String> = result
        .curve
        .iter()
        .map(|p| format!("{:.2},{:.2}", x(p.threshold), y(p.f1)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline class="curve" points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
        points.join(" ")
    );
    let (bx, by) = (x(result.best_threshold), y(result.best_f1));
    let _ = writeln!(
        s,
        r##"<circle class="best" cx="{bx:.2}" cy="{by:.2}" r="5" fill="#d62728"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text class="best-label" x="{:.2}" y="{:.2}">best {}, F1 {:.4}</text>"#,
        bx + 8.0,
        by - 8.0,
        result.best_threshold,
        result.best_f1
    );
    s.push_str("</svg>\n");
    s
}

fn escape_xml(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<base>.tsv` and `<base>.svg`.
pub fn emit_threshold_curve(result: &ThresholdSearchResult, base: &Path, title: &str) -> Result<CurveFiles, ReportError> {
    if result.curve.is_empty() {
        return Err(ReportError::EmptyCurve);
    }
    let files = CurveFiles {
        tsv: base.with_extension("tsv"),
        svg: base.with_extension("svg"),
    };
    write_text(&files.tsv, &render_curve_tsv(result))?;
    write_text(&files.svg, &render_curve_svg(result, title))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threshold::{find_best_threshold, LabeledScores};

    fn worked_example() -> ThresholdSearchResult {
        let data = LabeledScores::new(vec![true, false, true, false], vec![0.9, 0.8, 0.7, 0.1]).unwrap();
        find_best_threshold(&data).unwrap()
    }

    #[test]
    fn worked_example_curve_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_threshold_curve(&worked_example(), &dir.path().join("curve"), "binary").unwrap();
        let tsv = std::fs::read_to_string(&files.tsv).unwrap();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "threshold\tf1");
        assert!(lines.contains(&"0.7\t0.8"));
        let svg = std::fs::read_to_string(&files.svg).unwrap();
        assert!(svg.contains(r#"class="best""#));
        assert!(svg.contains("best 0.7, F1 0.8000"));
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn single_point_and_empty_curves() {
        let data = LabeledScores::new(vec![true, false], vec![0.4, 0.4]).unwrap();
        let result = find_best_threshold(&data).unwrap();
        assert_eq!(render_curve_tsv(&result).lines().count(), 2);
        assert!(render_curve_svg(&result, "t").contains("<polyline class=\"curve\""));

        let empty = ThresholdSearchResult {
            best_threshold: 0.5,
            best_f1: 0.0,
            curve: vec![],
            fallback: true,
        };
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_threshold_curve(&empty, &dir.path().join("c"), "t"),
            Err(ReportError::EmptyCurve)
        ));
    }
}
