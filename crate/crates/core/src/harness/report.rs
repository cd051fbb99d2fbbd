//! CSV and SVG report emission.
//!
//! `accuracy.csv` holds one row per (k, M, q); `coverage.csv` maps every
//! emitted q to its coverage fraction; `accuracy_k<k>.svg` charts mean
//! accuracy against q with ±1σ whiskers. Floats are written with Rust's
//! shortest-roundtrip formatting, so identical sweeps produce byte-identical
//! files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::reduction::coverage_fraction;

use super::SweepResult;

pub fn emit_report(result: &SweepResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if result.cells.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot emit a report for an empty sweep result".into(),
        ));
    }
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut accuracy = String::from("k,M,q,mean_acc,std_acc,trials\n");
    for cell in &result.cells {
        writeln!(
            accuracy,
            "{},{},{},{:?},{:?},{}",
            cell.k, cell.m, cell.q, cell.mean_accuracy, cell.std_accuracy, cell.trials
        )
        .expect("writing to a String cannot fail");
    }
    let accuracy_path = dir.join("accuracy.csv");
    std::fs::write(&accuracy_path, accuracy)?;
    written.push(accuracy_path);

    let mut coverage = String::from("q,coverage_fraction\n");
    for cell in &result.cells {
        writeln!(
            coverage,
            "{},{:?}",
            cell.q,
            coverage_fraction(cell.q, result.n, result.t)
        )
        .expect("writing to a String cannot fail");
    }
    let coverage_path = dir.join("coverage.csv");
    std::fs::write(&coverage_path, coverage)?;
    written.push(coverage_path);

    for k in result.cells.iter().map(|c| c.k).collect::<std::collections::BTreeSet<_>>() {
        let path = dir.join(format!("accuracy_k{k}.svg"));
        std::fs::write(&path, accuracy_chart(result, k))?;
        written.push(path);
    }
    Ok(written)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;

fn accuracy_chart(result: &SweepResult, k: u32) -> String {
    let cells: Vec<_> = result.cells.iter().filter(|c| c.k == k).collect();
    let q_min = cells.iter().map(|c| c.q).min().unwrap_or(1) as f64;
    let q_max = cells.iter().map(|c| c.q).max().unwrap_or(1) as f64;
    let span = (q_max - q_min).max(1.0);
    let x = |q: f64| MARGIN_L + (q - q_min) / span * (WIDTH - MARGIN_L - MARGIN_R);
    let y = |acc: f64| HEIGHT - MARGIN_B - acc.clamp(0.0, 1.0) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">Accuracy vs number of qubits ({k} classes, M={})</text>"#,
        WIDTH / 2.0,
        cells.first().map_or(0, |c| c.m)
    );

    // Axes.
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{:.1}" stroke="black"/>"#,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );
    for tick in 0..=10 {
        let acc = tick as f64 / 10.0;
        let ty = y(acc);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{ty:.1}" x2="{MARGIN_L}" y2="{ty:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{acc:.1}</text>"#,
            MARGIN_L - 4.0,
            MARGIN_L - 8.0,
            ty + 3.5,
        );
    }
    for cell in &cells {
        let tx = x(cell.q as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{tx:.1}" y1="{:.1}" x2="{tx:.1}" y2="{:.1}" stroke="black"/><text x="{tx:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 4.0,
            HEIGHT - MARGIN_B + 16.0,
            cell.q
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">qubits q</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.1})">accuracy</text>"#,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0
    );

    // ±1σ whiskers under the mean polyline.
    for cell in &cells {
        let tx = x(cell.q as f64);
        let lo = y(cell.mean_accuracy - cell.std_accuracy);
        let hi = y(cell.mean_accuracy + cell.std_accuracy);
        let _ = writeln!(
            svg,
            r##"<line x1="{tx:.1}" y1="{hi:.1}" x2="{tx:.1}" y2="{lo:.1}" stroke="#9ecae1" stroke-width="2"/>"##
        );
    }
    let points: Vec<String> = cells
        .iter()
        .map(|c| format!("{:.1},{:.1}", x(c.q as f64), y(c.mean_accuracy)))
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#3182bd" stroke-width="2"/>"##,
        points.join(" ")
    );
    for cell in &cells {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#3182bd"/>"##,
            x(cell.q as f64),
            y(cell.mean_accuracy)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SweepCell;
    use std::collections::BTreeMap;

    fn sample_result() -> SweepResult {
        SweepResult {
            n: 64,
            t: 32,
            cells: vec![
                SweepCell {
                    k: 2,
                    m: 40,
                    q: 10,
                    mean_accuracy: 0.9375,
                    std_accuracy: 0.25,
                    trials: 4,
                    mean_shots: 20000.0,
                    wall_seconds: 1.0,
                },
                SweepCell {
                    k: 2,
                    m: 40,
                    q: 17,
                    mean_accuracy: 1.0,
                    std_accuracy: 0.0,
                    trials: 4,
                    mean_shots: 20000.0,
                    wall_seconds: 1.0,
                },
            ],
            trial_accuracies: BTreeMap::new(),
        }
    }

    #[test]
    fn csv_contents_match_cells_and_coverage() {
        let dir = tempfile::tempdir().unwrap();
        let written = emit_report(&sample_result(), dir.path()).unwrap();
        assert_eq!(written.len(), 3);

        let accuracy = std::fs::read_to_string(dir.path().join("accuracy.csv")).unwrap();
        assert_eq!(
            accuracy,
            "k,M,q,mean_acc,std_acc,trials\n2,40,10,0.9375,0.25,4\n2,40,17,1.0,0.0,4\n"
        );
        let coverage = std::fs::read_to_string(dir.path().join("coverage.csv")).unwrap();
        assert_eq!(coverage, "q,coverage_fraction\n10,0.0078125\n17,1.0\n");

        let svg = std::fs::read_to_string(dir.path().join("accuracy_k2.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn empty_result_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let empty = SweepResult {
            n: 64,
            t: 32,
            cells: vec![],
            trial_accuracies: BTreeMap::new(),
        };
        assert!(matches!(
            emit_report(&empty, dir.path()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn reports_are_byte_identical_across_emissions() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        emit_report(&sample_result(), dir_a.path()).unwrap();
        emit_report(&sample_result(), dir_b.path()).unwrap();
        for name in ["accuracy.csv", "coverage.csv", "accuracy_k2.svg"] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs");
        }
    }
}
