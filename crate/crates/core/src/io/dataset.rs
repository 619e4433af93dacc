//! Dataset CSV with a TOML sidecar.
//!
//! The CSV has one header row, `x_m,y_m,rss_1,...,rss_N`, followed by a
//! `split` column (`train` / `test`) when the dataset is partitioned. The
//! sidecar at `<csv path>.meta` records the RSU coordinates, the channel
//! parameters when known, and the seed that produced the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fmt_f64, parse_f64, read_text};
use crate::channel::{Dataset, Deployment, LabeledSample, PathLossModel, Position, Split};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "rssloc-dataset";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub format: String,
    pub version: u32,
    pub rsu_x: Vec<f64>,
    pub rsu_y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub has_split: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmit_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_loss_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shadow_sigma_db: Option<f64>,
}

impl DatasetMeta {
    pub fn describe(ds: &Dataset, seed: Option<u64>) -> Self {
        let m = ds.model;
        Self {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            rsu_x: ds.deployment.rsus().iter().map(|p| p.x).collect(),
            rsu_y: ds.deployment.rsus().iter().map(|p| p.y).collect(),
            seed,
            has_split: ds.split.is_some(),
            transmit_power_dbm: m.map(|m| m.transmit_power_dbm),
            ref_loss_db: m.map(|m| m.ref_loss_db),
            ref_distance_m: m.map(|m| m.ref_distance_m),
            exponent: m.map(|m| m.exponent),
            shadow_sigma_db: m.map(|m| m.shadow_sigma_db),
        }
    }

    pub fn deployment(&self) -> Result<Deployment> {
        if self.rsu_x.len() != self.rsu_y.len() {
            return Err(Error::Format(format!(
                "metadata lists {} RSU x coordinates but {} y coordinates",
                self.rsu_x.len(),
                self.rsu_y.len()
            )));
        }
        Deployment::new(
            self.rsu_x
                .iter()
                .zip(&self.rsu_y)
                .map(|(&x, &y)| Position::new(x, y))
                .collect(),
        )
    }

    pub fn model(&self) -> Result<Option<PathLossModel>> {
        let fields = [
            self.transmit_power_dbm,
            self.ref_loss_db,
            self.ref_distance_m,
            self.exponent,
            self.shadow_sigma_db,
        ];
        match fields {
            [Some(transmit_power_dbm), Some(ref_loss_db), Some(ref_distance_m), Some(exponent), Some(shadow_sigma_db)] => {
                let m = PathLossModel {
                    transmit_power_dbm,
                    ref_loss_db,
                    ref_distance_m,
                    exponent,
                    shadow_sigma_db,
                };
                m.validate()?;
                Ok(Some(m))
            }
            [None, None, None, None, None] => Ok(None),
            _ => Err(Error::Format("channel parameters must be given all together or not at all".into())),
        }
    }
}

pub fn parse_metadata(text: &str) -> Result<DatasetMeta> {
    let meta: DatasetMeta = toml::from_str(text).map_err(|e| Error::Format(format!("dataset metadata: {e}")))?;
    if meta.format != FORMAT_TAG {
        return Err(Error::Format(format!("unexpected metadata format tag {:?}", meta.format)));
    }
    if meta.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported dataset version {}", meta.version)));
    }
    Ok(meta)
}

pub fn metadata_to_string(meta: &DatasetMeta) -> Result<String> {
    toml::to_string(meta).map_err(|e| Error::Format(format!("dataset metadata: {e}")))
}

fn expected_header(n: usize, with_split: bool) -> Vec<String> {
    let mut h = vec!["x_m".to_string(), "y_m".to_string()];
    h.extend((1..=n).map(|i| format!("rss_{i}")));
    if with_split {
        h.push("split".into());
    }
    h
}

pub fn dataset_to_csv(ds: &Dataset) -> Result<String> {
    let n = ds.deployment.len();
    let labels: Option<Vec<&str>> = ds.split.as_ref().map(|s| {
        let mut labels = vec!["train"; ds.len()];
        for &i in &s.test {
            labels[i] = "test";
        }
        labels
    });
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(expected_header(n, labels.is_some())).map_err(csv_err)?;
    let mut row = Vec::with_capacity(n + 3);
    for (i, s) in ds.samples.iter().enumerate() {
        row.clear();
        row.push(fmt_f64(s.position.x));
        row.push(fmt_f64(s.position.y));
        row.extend(s.rss.iter().map(|&r| fmt_f64(r)));
        if let Some(l) = &labels {
            row.push(l[i].to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Parse the CSV body against already-parsed metadata.
pub fn parse_dataset(csv_text: &str, meta: &DatasetMeta) -> Result<Dataset> {
    let deployment = meta.deployment()?;
    let model = meta.model()?;
    let n = deployment.len();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_parse_error(&e, 1))?,
        None => return Err(Error::parse(1, "missing header row")),
    };
    let header: Vec<&str> = header.iter().map(str::trim).collect();
    let want = expected_header(n, meta.has_split);
    if header != want {
        return Err(Error::parse(
            1,
            format!("header {:?} does not match expected {:?} for {n} RSUs", header.join(","), want.join(",")),
        ));
    }

    let arity = want.len();
    let mut samples = Vec::new();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for rec in records {
        let rec = rec.map_err(|e| csv_parse_error(&e, 0))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() == 1 && rec.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != arity {
            return Err(Error::parse(
                line,
                format!("expected {arity} fields, found {}", rec.len()),
            ));
        }
        let x = parse_f64(&rec[0], line, "x_m")?;
        let y = parse_f64(&rec[1], line, "y_m")?;
        let rss = (0..n)
            .map(|i| parse_f64(&rec[2 + i], line, &format!("rss_{}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        if meta.has_split {
            match rec[2 + n].trim() {
                "train" => train.push(samples.len()),
                "test" => test.push(samples.len()),
                other => return Err(Error::parse(line, format!("split must be train or test, got {other:?}"))),
            }
        }
        samples.push(LabeledSample {
            position: Position::new(x, y),
            rss,
        });
    }
    let ds = Dataset::new(deployment, model, samples)?;
    if meta.has_split {
        ds.with_split(Split { train, test })
    } else {
        Ok(ds)
    }
}

fn csv_parse_error(e: &csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    Error::parse(line, e.to_string())
}

pub fn metadata_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn write_dataset(ds: &Dataset, path: &Path, seed: Option<u64>) -> Result<()> {
    let meta = DatasetMeta::describe(ds, seed);
    std::fs::write(path, dataset_to_csv(ds)?)?;
    std::fs::write(metadata_path(path), metadata_to_string(&meta)?)?;
    Ok(())
}

/// Read a dataset and its sidecar; returns the recorded seed alongside.
pub fn read_dataset(path: &Path) -> Result<(Dataset, Option<u64>)> {
    let meta_path = metadata_path(path);
    let meta = parse_metadata(&read_text(&meta_path)?).map_err(|e| e.with_path(&meta_path))?;
    let ds = parse_dataset(&read_text(path)?, &meta).map_err(|e| e.with_path(path))?;
    Ok((ds, meta.seed))
}

/// RSU coordinate file: header `x_m,y_m`, one RSU per row.
pub fn parse_rsus(text: &str) -> Result<Deployment> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_parse_error(&e, 1))?,
        None => return Err(Error::parse(1, "missing header row")),
    };
    let header: Vec<&str> = header.iter().map(str::trim).collect();
    if header != ["x_m", "y_m"] {
        return Err(Error::parse(1, format!("expected header x_m,y_m, found {:?}", header.join(","))));
    }
    let mut rsus = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_parse_error(&e, 0))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() == 1 && rec.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::parse(line, format!("expected 2 fields, found {}", rec.len())));
        }
        rsus.push(Position::new(
            parse_f64(&rec[0], line, "x_m")?,
            parse_f64(&rec[1], line, "y_m")?,
        ));
    }
    Deployment::new(rsus)
}

pub fn rsus_to_csv(deployment: &Deployment) -> String {
    let mut out = String::from("x_m,y_m\n");
    for p in deployment.rsus() {
        out.push_str(&format!("{},{}\n", fmt_f64(p.x), fmt_f64(p.y)));
    }
    out
}

pub fn read_rsus(path: &Path) -> Result<Deployment> {
    parse_rsus(&read_text(path)?).map_err(|e| e.with_path(path))
}
