//! On-disk formats.
//!
//! A dataset is a CSV file `p_1,...,p_k,label,category,line_id` (line id `-1`
//! for uniform points) with JSON sidecars next to it:
//! `<csv>.meta.json` (sampler configuration and witness lines) and, when
//! solutions are stored, `<csv>.solutions.jsonl` with one record per sample
//! that carries them. Floats are written in shortest round-trip form.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classify::{AnyModel, TrainReport};
use crate::error::{Error, Result};
use crate::sampler::{Category, Dataset, LabeledSample, LineRecord, SamplerConfig};
use crate::solver::GenericStart;

pub const DATASET_SCHEMA: &str = "disclocus.dataset/1";
pub const SOLUTIONS_SCHEMA: &str = "disclocus.solutions/1";
pub const START_SCHEMA: &str = "disclocus.start/1";
pub const MODEL_SCHEMA: &str = "disclocus.model/1";

/// `<path><suffix>`, e.g. `data.csv.meta.json`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

#[derive(Serialize, Deserialize)]
struct Tagged<T> {
    schema: String,
    #[serde(flatten)]
    body: T,
}

fn write_json<T: Serialize>(path: &Path, schema: &str, body: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(
        &mut w,
        &Tagged {
            schema: schema.to_string(),
            body,
        },
    )?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path, schema: &str) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let found = value
        .get("schema")
        .and_then(|v| v.as_str())
        .unwrap_or("<none>")
        .to_string();
    if found != schema {
        return Err(Error::Schema {
            file: display(path),
            expected: schema.to_string(),
            found,
        });
    }
    let tagged: Tagged<T> = serde_json::from_value(value)?;
    Ok(tagged.body)
}

/// Everything about a dataset except its rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub model: String,
    pub k: usize,
    pub rows: usize,
    pub generic_d: usize,
    pub config: SamplerConfig,
    pub lines: Vec<LineRecord>,
    pub lines_abandoned: usize,
    pub has_solutions: bool,
}

#[derive(Serialize, Deserialize)]
struct SolutionRecord {
    row: usize,
    solutions: Vec<Vec<f64>>,
}

pub fn write_samples_csv<W: Write>(mut w: W, k: usize, samples: &[LabeledSample]) -> Result<()> {
    let mut header: Vec<String> = (1..=k).map(|j| format!("p_{j}")).collect();
    header.extend(["label".into(), "category".into(), "line_id".into()]);
    writeln!(w, "{}", header.join(","))?;
    for s in samples {
        for v in &s.p {
            write!(w, "{v},")?;
        }
        let line = s.line_id.map_or(-1, |l| l as i64);
        writeln!(w, "{},{},{}", s.label, s.category, line)?;
    }
    Ok(())
}

/// Writes the CSV, the metadata sidecar and, if any sample carries
/// solutions, the solutions sidecar.
pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let k = ds.config.omega.dim();
    let mut w = BufWriter::new(File::create(path)?);
    write_samples_csv(&mut w, k, &ds.samples)?;
    w.flush()?;

    let has_solutions = ds.samples.iter().any(|s| s.real_solutions.is_some());
    let sol_path = sidecar(path, ".solutions.jsonl");
    if has_solutions {
        let mut w = BufWriter::new(File::create(&sol_path)?);
        writeln!(w, "{}", serde_json::json!({ "schema": SOLUTIONS_SCHEMA }))?;
        for (row, s) in ds.samples.iter().enumerate() {
            if let Some(sols) = &s.real_solutions {
                serde_json::to_writer(
                    &mut w,
                    &SolutionRecord {
                        row,
                        solutions: sols.clone(),
                    },
                )?;
                writeln!(w)?;
            }
        }
        w.flush()?;
    } else if sol_path.exists() {
        fs::remove_file(&sol_path)?;
    }

    let meta = DatasetMeta {
        model: ds.model.clone(),
        k,
        rows: ds.samples.len(),
        generic_d: ds.generic_d,
        config: ds.config.clone(),
        lines: ds.lines.clone(),
        lines_abandoned: ds.lines_abandoned,
        has_solutions,
    };
    write_json(&sidecar(path, ".meta.json"), DATASET_SCHEMA, &meta)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: display(path),
        line,
        msg: msg.into(),
    }
}

/// Reads dataset rows; stored solutions are attached when the sidecar exists.
pub fn read_samples(path: &Path) -> Result<Vec<LabeledSample>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let k = cols.len().saturating_sub(3);
    let expected: Vec<String> = (1..=k)
        .map(|j| format!("p_{j}"))
        .chain(["label".into(), "category".into(), "line_id".into()])
        .collect();
    if k == 0 || cols != expected {
        return Err(parse_err(path, 1, format!("expected header '{}'", expected.join(","))));
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != k + 3 {
            return Err(parse_err(path, lineno, format!("expected {} fields, found {}", k + 3, fields.len())));
        }
        let p = fields[..k]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(path, lineno, format!("bad coordinate '{f}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let label: usize = fields[k]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad label '{}'", fields[k])))?;
        let category: Category = fields[k + 1]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad category '{}'", fields[k + 1])))?;
        let line_id: i64 = fields[k + 2]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad line id '{}'", fields[k + 2])))?;
        samples.push(LabeledSample {
            p,
            label,
            category,
            line_id: usize::try_from(line_id).ok(),
            real_solutions: None,
        });
    }

    let sol_path = sidecar(path, ".solutions.jsonl");
    if sol_path.exists() {
        let reader = BufReader::new(File::open(&sol_path)?);
        let mut lines = reader.lines();
        let head = lines.next().ok_or_else(|| parse_err(&sol_path, 1, "empty file"))??;
        let v: serde_json::Value = serde_json::from_str(&head).map_err(|e| parse_err(&sol_path, 1, e.to_string()))?;
        let found = v.get("schema").and_then(|s| s.as_str()).unwrap_or("<none>");
        if found != SOLUTIONS_SCHEMA {
            return Err(Error::Schema {
                file: display(&sol_path),
                expected: SOLUTIONS_SCHEMA.into(),
                found: found.into(),
            });
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SolutionRecord =
                serde_json::from_str(&line).map_err(|e| parse_err(&sol_path, i + 2, e.to_string()))?;
            let s = samples
                .get_mut(rec.row)
                .ok_or_else(|| parse_err(&sol_path, i + 2, format!("row {} out of range", rec.row)))?;
            s.real_solutions = Some(rec.solutions);
        }
    }
    Ok(samples)
}

pub fn read_dataset_meta(path: &Path) -> Result<DatasetMeta> {
    read_json(&sidecar(path, ".meta.json"), DATASET_SCHEMA)
}

/// Reads rows and metadata; the metadata sidecar must exist and agree.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let meta = read_dataset_meta(path)?;
    let samples = read_samples(path)?;
    if samples.len() != meta.rows || samples.iter().any(|s| s.p.len() != meta.k) {
        return Err(Error::Schema {
            file: display(path),
            expected: format!("{} rows of {} parameters", meta.rows, meta.k),
            found: format!("{} rows", samples.len()),
        });
    }
    Ok(Dataset {
        model: meta.model,
        samples,
        config: meta.config,
        generic_d: meta.generic_d,
        lines: meta.lines,
        lines_abandoned: meta.lines_abandoned,
    })
}

/// A cached generic solve, tied to the system it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartFile {
    pub system: String,
    pub start: GenericStart,
}

pub fn write_start(path: &Path, f: &StartFile) -> Result<()> {
    write_json(path, START_SCHEMA, f)
}

pub fn read_start(path: &Path) -> Result<StartFile> {
    read_json(path, START_SCHEMA)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub kind: String,
    pub model: AnyModel,
    pub train_report: Option<TrainReport>,
    pub training_data: Vec<String>,
    pub categories: Vec<Category>,
    pub training_points: usize,
}

pub fn write_model(path: &Path, f: &ModelFile) -> Result<()> {
    write_json(path, MODEL_SCHEMA, f)
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    read_json(path, MODEL_SCHEMA)
}

/// Appends `train,test,accuracy,count`, writing the header for a new file.
pub fn append_result(path: &Path, train: &str, test: &str, accuracy: f64, count: usize) -> Result<()> {
    let fresh = !path.exists() || fs::metadata(path)?.len() == 0;
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "train,test,accuracy,count")?;
    }
    writeln!(f, "{train},{test},{accuracy},{count}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::ParamBox;

    fn sample_dataset() -> Dataset {
        let cfg = SamplerConfig::new(ParamBox::new(vec![(-1.0, 1.0); 2]).unwrap(), 3);
        Dataset {
            model: "quadratic".into(),
            samples: vec![
                LabeledSample {
                    p: vec![0.1, -0.30000000000000004],
                    label: 2,
                    category: Category::Uniform,
                    line_id: None,
                    real_solutions: Some(vec![vec![0.5], vec![-0.6]]),
                },
                LabeledSample {
                    p: vec![1.0 / 3.0, 0.7],
                    label: 0,
                    category: Category::NearBoundary,
                    line_id: Some(4),
                    real_solutions: None,
                },
            ],
            config: cfg,
            generic_d: 2,
            lines: vec![],
            lines_abandoned: 0,
        }
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ds = sample_dataset();
        write_dataset(&path, &ds).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), ds);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("p_1,p_2,label,category,line_id\n"));
        assert!(text.contains(",2,uniform,-1\n"));
    }

    #[test]
    fn malformed_rows_cite_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "p_1,p_2,label,category,line_id\n0.1,0.2,2,uniform,-1\n0.1,x,2,uniform,-1\n").unwrap();
        match read_samples(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&path, "a,b\n").unwrap();
        assert!(matches!(read_samples(&path), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn schema_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_dataset(&path, &sample_dataset()).unwrap();
        let meta = sidecar(&path, ".meta.json");
        let text = fs::read_to_string(&meta).unwrap().replace(DATASET_SCHEMA, "disclocus.dataset/99");
        fs::write(&meta, text).unwrap();
        assert!(matches!(read_dataset(&path), Err(Error::Schema { .. })));
    }

    #[test]
    fn results_append() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        append_result(&path, "nb", "uniform", 0.5, 10).unwrap();
        append_result(&path, "uniform", "nb", 0.25, 4).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "train,test,accuracy,count\nnb,uniform,0.5,10\nuniform,nb,0.25,4\n");
    }
}
