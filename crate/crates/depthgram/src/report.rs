//! Report serialization: analysis reports as JSON, DepthGram coordinates
//! and study tables as CSV.
//!
//! Numbers must survive a round trip exactly. JSON goes through serde_json
//! (shortest-representation printing, correctly rounded parsing); CSV cells
//! are printed as `{:.16e}` — 17 significant digits, enough to reconstruct
//! any finite `f64` bit-for-bit with Rust's correctly rounded parser.

use std::fmt::Write as _;
use std::path::Path;

use crate::engine::{AnalysisReport, DepthGram, Variant};
use crate::synth::{PooledPoint, Role, StudySummary};
use crate::Error;

/// Serializes a report as canonical compact JSON. Field order is fixed by
/// the type, so equal reports produce identical bytes — the form the
/// determinism guarantees are stated in.
pub fn report_json(report: &AnalysisReport) -> String {
    serde_json::to_string(report).expect("reports always serialize")
}

/// Writes a report as pretty-printed JSON.
pub fn write_report(report: &AnalysisReport, path: &Path) -> Result<(), Error> {
    let mut text =
        serde_json::to_string_pretty(report).expect("reports always serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a report back from JSON.
pub fn read_report(path: &Path) -> Result<AnalysisReport, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// 17-significant-digit decimal form; parses back to the identical `f64`.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// One parsed row of a DepthGram CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthGramRow {
    /// 1-based observation id.
    pub observation: usize,
    pub variant: Variant,
    pub dg1: f64,
    pub dg2: f64,
    pub d_score: f64,
    pub flagged: bool,
}

/// Writes the three DepthGrams as one CSV:
/// `observation,variant,dg1,dg2,d_score,flagged`.
pub fn write_depthgram_csv(grams: &[DepthGram], path: &Path) -> Result<(), Error> {
    let mut text = String::from("observation,variant,dg1,dg2,d_score,flagged\n");
    for gram in grams {
        for i in 0..gram.dg1.len() {
            writeln!(
                text,
                "{},{},{},{},{},{}",
                i + 1,
                gram.variant.name(),
                format_float(gram.dg1[i]),
                format_float(gram.dg2[i]),
                format_float(gram.d_scores[i]),
                gram.flagged[i]
            )
            .expect("writing to a String cannot fail");
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses a DepthGram CSV written by [`write_depthgram_csv`].
pub fn read_depthgram_csv(path: &Path) -> Result<Vec<DepthGramRow>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let csv_error = |row: usize, column: usize, message: String| Error::Csv {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };
    let mut rows = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if index == 0 {
            let expected = "observation,variant,dg1,dg2,d_score,flagged";
            if line.trim() != expected {
                return Err(csv_error(1, 1, format!("expected header `{expected}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row_no = index + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 6 {
            return Err(csv_error(row_no, 1, format!("expected 6 cells, got {}", cells.len())));
        }
        let parse_num = |col: usize| -> Result<f64, Error> {
            cells[col]
                .parse::<f64>()
                .map_err(|e| csv_error(row_no, col + 1, format!("bad number `{}`: {e}", cells[col])))
        };
        let variant = Variant::ALL
            .into_iter()
            .find(|v| v.name() == cells[1])
            .ok_or_else(|| csv_error(row_no, 2, format!("unknown variant `{}`", cells[1])))?;
        let flagged = match cells[5] {
            "true" => true,
            "false" => false,
            other => {
                return Err(csv_error(row_no, 6, format!("expected true/false, got `{other}`")))
            }
        };
        rows.push(DepthGramRow {
            observation: cells[0]
                .parse()
                .map_err(|e| csv_error(row_no, 1, format!("bad observation id: {e}")))?,
            variant,
            dg1: parse_num(2)?,
            dg2: parse_num(3)?,
            d_score: parse_num(4)?,
            flagged,
        });
    }
    Ok(rows)
}

/// Writes per-dimension screen flags as `observation,dimension,kind` rows,
/// one per flagged (observation, dimension) pair.
pub fn write_marginal_csv(
    magnitude_dims: impl Iterator<Item = (usize, Vec<u32>)>,
    shape_dims: impl Iterator<Item = (usize, Vec<u32>)>,
    path: &Path,
) -> Result<(), Error> {
    let mut text = String::from("observation,dimension,kind\n");
    let mut push = |kind: &str, pairs: &mut dyn Iterator<Item = (usize, Vec<u32>)>| {
        for (observation, dims) in pairs {
            for dim in dims {
                writeln!(text, "{observation},{dim},{kind}")
                    .expect("writing to a String cannot fail");
            }
        }
    };
    push("magnitude", &mut { magnitude_dims });
    push("shape", &mut { shape_dims });
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes a study summary as pretty-printed JSON.
pub fn write_study_json(summary: &StudySummary, path: &Path) -> Result<(), Error> {
    let mut text =
        serde_json::to_string_pretty(summary).expect("summaries always serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes a study summary as a long-format CSV:
/// `c,rule,metric,mean,sd` with one row per aggregated statistic.
pub fn write_study_csv(summary: &StudySummary, path: &Path) -> Result<(), Error> {
    let mut text = String::from("c,rule,metric,mean,sd\n");
    for row in &summary.rows {
        let mut push = |rule: &str, metric: &str, stat: crate::synth::Stat| {
            writeln!(
                text,
                "{},{rule},{metric},{},{}",
                format_float(row.c),
                format_float(stat.mean),
                format_float(stat.sd)
            )
            .expect("writing to a String cannot fail");
        };
        push("depthgram", "magnitude", row.depthgram.magnitude);
        push("depthgram", "shape", row.depthgram.shape);
        push("depthgram", "joint", row.depthgram.joint);
        push("depthgram", "false_rate", row.depthgram.false_rate);
        if let Some(marginal) = &row.marginal {
            push("marginal", "magnitude_correct", marginal.magnitude_correct);
            push("marginal", "magnitude_false", marginal.magnitude_false);
            push("marginal", "shape_correct", marginal.shape_correct);
            push("marginal", "shape_false", marginal.shape_false);
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes pooled study points as
/// `c,replicate,variant,observation,role,dg1,dg2`.
pub fn write_points_csv(points: &[PooledPoint], path: &Path) -> Result<(), Error> {
    let mut text = String::from("c,replicate,variant,observation,role,dg1,dg2\n");
    for point in points {
        writeln!(
            text,
            "{},{},{},{},{},{},{}",
            format_float(point.c),
            point.replicate,
            point.variant.name(),
            point.observation,
            role_name(point.role),
            format_float(point.dg1),
            format_float(point.dg2)
        )
        .expect("writing to a String cannot fail");
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Stable lowercase role names used in CSV and SVG output.
pub fn role_name(role: Role) -> &'static str {
    match role {
        Role::Typical => "typical",
        Role::Magnitude => "magnitude",
        Role::Shape => "shape",
        Role::Joint => "joint",
    }
}

/// Role from its lowercase name.
pub fn role_from_name(name: &str) -> Option<Role> {
    match name {
        "typical" => Some(Role::Typical),
        "magnitude" => Some(Role::Magnitude),
        "shape" => Some(Role::Shape),
        "joint" => Some(Role::Joint),
        _ => None,
    }
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{analyze, AnalyzeConfig};
    use crate::hdfd::{DatasetShape, MemoryDataset};
    use crate::synth::{run_study, Model, StudyConfig};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn small_analysis() -> crate::engine::AnalysisOutput {
        let mut rng = StdRng::seed_from_u64(17);
        let shape = DatasetShape {
            n: 8,
            p: 4,
            n_points: 6,
        };
        let values: Vec<f64> = (0..shape.p * shape.n * shape.n_points)
            .map(|_| rng.gen_range(-2.0..2.0))
            .collect();
        let data = MemoryDataset::new(shape, values, None).unwrap();
        let mut cfg = AnalyzeConfig::default();
        cfg.marginal_screen = true;
        analyze(&data, &cfg).unwrap()
    }

    #[test]
    fn report_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let output = small_analysis();
        write_report(&output.report, &path).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(report_json(&output.report), report_json(&back));
        for (a, b) in output.report.variants.iter().zip(&back.variants) {
            assert_eq!(a.flagged, b.flagged);
            assert_eq!(
                a.dg1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                b.dg1.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
        assert_eq!(output.report.outlier_union, back.outlier_union);
    }

    #[test]
    fn depthgram_csv_round_trips_bit_for_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grams.csv");
        let output = small_analysis();
        write_depthgram_csv(&output.depthgrams, &path).unwrap();
        let rows = read_depthgram_csv(&path).unwrap();
        assert_eq!(rows.len(), 3 * 8);
        for (at, row) in rows.iter().enumerate() {
            let gram = &output.depthgrams[at / 8];
            let i = at % 8;
            assert_eq!(row.observation, i + 1);
            assert_eq!(row.variant, gram.variant);
            assert_eq!(row.dg1.to_bits(), gram.dg1[i].to_bits());
            assert_eq!(row.dg2.to_bits(), gram.dg2[i].to_bits());
            assert_eq!(row.d_score.to_bits(), gram.d_scores[i].to_bits());
            assert_eq!(row.flagged, gram.flagged[i]);
        }
    }

    #[test]
    fn depthgram_csv_rejects_malformed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(
            &path,
            "observation,variant,dg1,dg2,d_score,flagged\n1,dimensions,0.5,0.5\n",
        )
        .unwrap();
        let err = read_depthgram_csv(&path).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn study_tables_round_trip_and_flatten() {
        let dir = tempfile::tempdir().unwrap();
        let config = StudyConfig {
            model: Model::One,
            n: 20,
            p: 4,
            n_points: 6,
            c_grid: vec![0.0, 1.0],
            replicates: 2,
            seed: 5,
            fence_factor: 1.5,
            marginal_rule: true,
            collect_points: true,
        };
        let output = run_study(&config).unwrap();

        let json_path = dir.path().join("summary.json");
        write_study_json(&output.summary, &json_path).unwrap();
        let text = std::fs::read_to_string(&json_path).unwrap();
        let back: StudySummary = serde_json::from_str(&text).unwrap();
        assert_eq!(
            serde_json::to_string(&output.summary).unwrap(),
            serde_json::to_string(&back).unwrap()
        );

        let csv_path = dir.path().join("summary.csv");
        write_study_csv(&output.summary, &csv_path).unwrap();
        let csv = std::fs::read_to_string(&csv_path).unwrap();
        // Header + 2 c-levels x (4 depthgram + 4 marginal) rows.
        assert_eq!(csv.lines().count(), 1 + 2 * 8);
        assert!(csv.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,depthgram,magnitude,"));

        let points_path = dir.path().join("points.csv");
        write_points_csv(&output.points, &points_path).unwrap();
        let lines = std::fs::read_to_string(&points_path).unwrap();
        assert_eq!(lines.lines().count(), 1 + output.points.len());
        assert!(lines.lines().nth(1).unwrap().contains(",typical,"));
    }

    #[test]
    fn marginal_csv_lists_flagged_pairs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("marginal.csv");
        write_marginal_csv(
            vec![(7usize, vec![2u32, 9])].into_iter(),
            vec![(3usize, vec![4u32])].into_iter(),
            &path,
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "observation,dimension,kind\n7,2,magnitude\n7,9,magnitude\n3,4,shape\n"
        );
    }

    #[test]
    fn float_format_is_lossless() {
        for &v in &[
            0.0,
            -0.0,
            1.0 / 3.0,
            2.0 / 3.0,
            -1.2345678901234567e-8,
            0.1 + 0.2,
            f64::MIN_POSITIVE,
        ] {
            let printed = format_float(v);
            let parsed: f64 = printed.parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits(), "{v} -> {printed}");
        }
    }
}
