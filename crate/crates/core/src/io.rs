//! File formats and persistence.
//!
//! Metric spaces travel in two formats:
//! * plain text: first line `n`, then `n` whitespace-separated rows;
//! * structured JSON: `{"points": [..], "dist": [row-major], "base_point": i}`.
//!
//! Readers reject asymmetry beyond the metric tolerance but accept triangle
//! failures, attaching the validation report instead. All writes are atomic
//! (write to a temp sibling, then rename).

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free::{SignedMeasure, TransportPlan};
use crate::metric::{default_labels, validate_metric, FiniteMetricSpace, ValidationReport};
use crate::scalar::Scalar;

/// Parse a plain-text matrix: `n`, then `n` rows of `n` numbers.
pub fn parse_matrix_text<S: Scalar>(input: &str) -> Result<FiniteMetricSpace<S>> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".to_string(),
    })?;
    let n: usize = header.trim().parse().map_err(|_| Error::Parse {
        line: header_line + 1,
        message: format!("expected point count, found `{}`", header.trim()),
    })?;
    if n == 0 {
        return Err(Error::Parse {
            line: header_line + 1,
            message: "point count must be positive".to_string(),
        });
    }
    let mut dist = Vec::with_capacity(n * n);
    let mut rows_read = 0;
    for (line_no, line) in lines {
        if rows_read == n {
            return Err(Error::Parse {
                line: line_no + 1,
                message: format!("expected {n} rows, found more"),
            });
        }
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != n {
            return Err(Error::Parse {
                line: line_no + 1,
                message: format!("row has {} entries, expected {n}", entries.len()),
            });
        }
        for e in entries {
            let v: f64 = e.parse().map_err(|_| Error::Parse {
                line: line_no + 1,
                message: format!("bad number `{e}`"),
            })?;
            let v = S::from_f64(v).ok_or(Error::Parse {
                line: line_no + 1,
                message: format!("value `{e}` not representable"),
            })?;
            dist.push(v);
        }
        rows_read += 1;
    }
    if rows_read != n {
        return Err(Error::Parse {
            line: input.lines().count(),
            message: format!("expected {n} rows, found {rows_read}"),
        });
    }
    let space = FiniteMetricSpace::new(default_labels(n), dist, 0)?;
    reject_asymmetry(&space)?;
    Ok(space)
}

/// Parse the structured JSON format; structural checks run inside the
/// type's deserializer.
pub fn parse_space_json<S: Scalar>(input: &str) -> Result<FiniteMetricSpace<S>> {
    let space: FiniteMetricSpace<S> = serde_json::from_str(input)?;
    reject_asymmetry(&space)?;
    Ok(space)
}

fn reject_asymmetry<S: Scalar>(space: &FiniteMetricSpace<S>) -> Result<()> {
    let n = space.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (space.dist(i, j) - space.dist(j, i)).abs();
            if gap > S::tol_metric() {
                return Err(Error::Parse {
                    line: 0,
                    message: format!(
                        "matrix asymmetric at ({i}, {j}): {} vs {}",
                        space.dist(i, j),
                        space.dist(j, i)
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Load a space from disk, sniffing JSON by a leading `{`. The validation
/// report rides along: triangle failures load fine and are reported, only
/// structural defects reject.
pub fn load_space<S: Scalar>(
    path: impl AsRef<Path>,
) -> Result<(FiniteMetricSpace<S>, ValidationReport<S>)> {
    let text = fs::read_to_string(path.as_ref())?;
    let space = if text.trim_start().starts_with('{') {
        parse_space_json(&text)?
    } else {
        parse_matrix_text(&text)?
    };
    let report = validate_metric(&space);
    Ok((space, report))
}

/// Render the plain-text matrix format (full symmetric matrix, 17 significant
/// digits so values round-trip).
pub fn render_matrix_text<S: Scalar>(space: &FiniteMetricSpace<S>) -> String {
    let n = space.len();
    let mut out = String::new();
    out.push_str(&n.to_string());
    out.push('\n');
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                let v = space.dist(i, j).to_f64().unwrap_or(f64::NAN);
                format!("{v:.17e}")
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Atomic write of arbitrary bytes: temp sibling file, then rename.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut tmp: PathBuf = path.to_path_buf();
    let file_name = tmp
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    tmp.set_file_name(format!("{file_name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn save_space_text<S: Scalar>(space: &FiniteMetricSpace<S>, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, render_matrix_text(space).as_bytes())
}

/// Atomic JSON save for any serializable artifact (spaces, reports, bundles).
pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let body = serde_json::to_string_pretty(value)?;
    write_atomic(path, body.as_bytes())
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path.as_ref())?;
    Ok(serde_json::from_str(&text)?)
}

/// Sparse measure format: a JSON array of `[label, weight]` pairs.
pub fn load_measure<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    path: impl AsRef<Path>,
) -> Result<SignedMeasure<S>> {
    let text = fs::read_to_string(path.as_ref())?;
    let pairs: Vec<(String, S)> = serde_json::from_str(&text)?;
    SignedMeasure::from_sparse(space, &pairs)
}

pub fn save_measure<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    measure: &SignedMeasure<S>,
    path: impl AsRef<Path>,
) -> Result<()> {
    save_json(&measure.to_sparse(space), path)
}

/// Plans persist as `[from_label, to_label, mass]` triples.
pub fn save_plan<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    plan: &TransportPlan<S>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let triples: Vec<(String, String, S)> = plan
        .flows
        .iter()
        .map(|f| {
            (
                space.label(f.from).to_string(),
                space.label(f.to).to_string(),
                f.mass,
            )
        })
        .collect();
    save_json(&triples, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn text_round_trip_is_bit_exact() {
        let space = FiniteMetricSpace::from_rows(
            default_labels(3),
            vec![
                vec![0.0, 1.0 / 3.0, 0.7243819202],
                vec![1.0 / 3.0, 0.0, 0.9],
                vec![0.7243819202, 0.9, 0.0],
            ],
        )
        .unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.txt");
        save_space_text(&space, &path).unwrap();
        let (loaded, report) = load_space::<f64>(&path).unwrap();
        assert_eq!(loaded.dist_slice(), space.dist_slice());
        assert!(report.is_metric());
    }

    #[test]
    fn json_round_trip_preserves_labels_and_base() {
        let space = FiniteMetricSpace::from_rows(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 2.5], vec![2.5, 0.0]],
        )
        .unwrap()
        .with_base_point(1)
        .unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_json(&space, &path).unwrap();
        let (loaded, _) = load_space::<f64>(&path).unwrap();
        assert_eq!(loaded, space);
    }

    #[test]
    fn asymmetric_matrix_is_rejected_with_indices() {
        let text = "2\n0 1.0\n1.5 0\n";
        match parse_matrix_text::<f64>(text) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("(0, 1)")),
            other => panic!("expected parse rejection, got {other:?}"),
        }
    }

    #[test]
    fn triangle_failure_loads_with_report() {
        let text = "3\n0 1 3\n1 0 1\n3 1 0\n";
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, text).unwrap();
        let (_, report) = load_space::<f64>(&path).unwrap();
        assert!(!report.is_metric());
        assert!(!report.triangle_violations.is_empty());
    }

    #[test]
    fn malformed_rows_are_diagnosed() {
        assert!(matches!(
            parse_matrix_text::<f64>("2\n0 1\n1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_matrix_text::<f64>("x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn measure_round_trip() {
        let space = FiniteMetricSpace::from_rows(
            default_labels(3),
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 1.5],
                vec![2.0, 1.5, 0.0],
            ],
        )
        .unwrap();
        let mu = SignedMeasure::new(&space, vec![-1.0, 0.25, 0.75]).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("mu.json");
        save_measure(&space, &mu, &path).unwrap();
        let loaded = load_measure::<f64>(&space, &path).unwrap();
        assert_eq!(loaded.weights(), mu.weights());
    }
}
