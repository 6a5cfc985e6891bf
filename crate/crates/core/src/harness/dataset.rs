use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Row-major features in `[-1, 1]` with 0-based labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub split: Split,
    n_features: usize,
    features: Vec<f32>,
    labels: Vec<usize>,
    classes: usize,
    /// Original label value of each class index, when labels were remapped.
    pub label_map: Option<Vec<i64>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        split: Split,
        n_features: usize,
        features: Vec<f32>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::Data("dataset with no features".into()));
        }
        if features.len() != n_features * labels.len() {
            return Err(Error::Data(format!(
                "{} feature values for {} rows of {n_features}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = features.iter().position(|x| !(-1.0..=1.0).contains(x)) {
            return Err(Error::Data(format!(
                "feature value {} at row {} outside [-1, 1]",
                features[i],
                i / n_features
            )));
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Self {
            name: name.into(),
            split,
            n_features,
            features,
            labels,
            classes,
            label_map: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// `max(label) + 1`.
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    /// The first `m` rows.
    pub fn truncate(&mut self, m: usize) {
        if m < self.len() {
            self.labels.truncate(m);
            self.features.truncate(m * self.n_features);
        }
    }
}

const IDX_IMAGES: u32 = 0x0000_0803;
const IDX_LABELS: u32 = 0x0000_0801;

fn read_be_u32(buf: &[u8], at: usize) -> Result<u32> {
    buf.get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Data("truncated IDX header".into()))
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    BufReader::new(File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?)
        .read_to_end(&mut buf)?;
    Ok(buf)
}

/// IDX images/labels (uncompressed). Pixels map to `2 p / 255 - 1`.
pub fn load_idx(images: &Path, labels: &Path, split: Split) -> Result<Dataset> {
    let img = read_all(images)?;
    let lab = read_all(labels)?;
    parse_idx(
        &img,
        &lab,
        split,
        &images
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    )
}

pub fn parse_idx(img: &[u8], lab: &[u8], split: Split, name: &str) -> Result<Dataset> {
    let magic = read_be_u32(img, 0)?;
    if magic != IDX_IMAGES {
        return Err(Error::Data(format!(
            "bad image magic {magic:#010x}, expected {IDX_IMAGES:#010x}"
        )));
    }
    let magic = read_be_u32(lab, 0)?;
    if magic != IDX_LABELS {
        return Err(Error::Data(format!(
            "bad label magic {magic:#010x}, expected {IDX_LABELS:#010x}"
        )));
    }
    let count = read_be_u32(img, 4)? as usize;
    let rows = read_be_u32(img, 8)? as usize;
    let cols = read_be_u32(img, 12)? as usize;
    let n_labels = read_be_u32(lab, 4)? as usize;
    if count != n_labels {
        return Err(Error::Data(format!("{count} images but {n_labels} labels")));
    }
    let n = rows * cols;
    let pixels = img
        .get(16..16 + count * n)
        .ok_or_else(|| Error::Data(format!("image payload truncated: need {} bytes", count * n)))?;
    let ys = lab
        .get(8..8 + count)
        .ok_or_else(|| Error::Data(format!("label payload truncated: need {count} bytes")))?;
    let features = pixels
        .iter()
        .map(|&p| 2.0 * f32::from(p) / 255.0 - 1.0)
        .collect();
    Dataset::new(
        name,
        split,
        n,
        features,
        ys.iter().map(|&y| y as usize).collect(),
    )
}

/// Where the label lives in each CSV row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelColumn {
    First,
    Last,
    #[serde(untagged)]
    Index(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub header: bool,
    /// Reuse a class mapping (e.g. the training split's) instead of building one.
    pub label_map: Option<Vec<i64>>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            header: false,
            label_map: None,
        }
    }
}

/// Numeric CSV. Columns with values outside `[-1, 1]` are min-max scaled
/// onto it; labels are remapped to `0..C` in ascending order of value.
pub fn load_csv(path: &Path, split: Split, opts: &CsvOptions) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(file, &name, split, opts)
}

pub fn parse_csv<R: Read>(
    reader: R,
    name: &str,
    split: Split,
    opts: &CsvOptions,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut width = None;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("row {}: {e}", r + 1)))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Data(format!(
                "row {} has {} fields, expected {w}",
                r + 1,
                rec.len()
            )));
        }
        let label_at = match opts.label_column {
            LabelColumn::First => 0,
            LabelColumn::Last => w - 1,
            LabelColumn::Index(i) if i < w => i,
            LabelColumn::Index(i) => {
                return Err(Error::Data(format!(
                    "label column {i} but rows have {w} fields"
                )))
            }
        };
        if cols.is_empty() {
            cols = vec![Vec::new(); w - 1];
        }
        let mut k = 0;
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    Error::Data(format!(
                        "non-numeric cell '{cell}' at row {}, column {}",
                        r + 1,
                        c + 1
                    ))
                })?;
            if c == label_at {
                if v.fract() != 0.0 {
                    return Err(Error::Data(format!(
                        "label {v} at row {} is not an integer",
                        r + 1
                    )));
                }
                raw_labels.push(v as i64);
            } else {
                cols[k].push(v);
                k += 1;
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::Data(format!("{name}: no data rows")));
    }
    if cols.is_empty() {
        return Err(Error::Data(format!("{name}: no feature columns")));
    }
    for col in &mut cols {
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        if lo < -1.0 || hi > 1.0 {
            let span = hi - lo;
            col.iter_mut().for_each(|x| {
                *x = if span > 0.0 {
                    2.0 * (*x - lo) / span - 1.0
                } else {
                    0.0
                }
            });
        }
    }
    let map = match &opts.label_map {
        Some(m) => m.clone(),
        None => {
            let mut m: Vec<i64> = raw_labels.clone();
            m.sort_unstable();
            m.dedup();
            m
        }
    };
    let index: BTreeMap<i64, usize> = map.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let labels = raw_labels
        .iter()
        .map(|v| {
            index
                .get(v)
                .copied()
                .ok_or_else(|| Error::Data(format!("label {v} not in the class mapping")))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = labels.len();
    let n = cols.len();
    let mut features = vec![0f32; m * n];
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            features[r * n + c] = (v as f32).clamp(-1.0, 1.0);
        }
    }
    let mut ds = Dataset::new(name, split, n, features, labels)?;
    ds.classes = ds.classes.max(map.len());
    ds.label_map = Some(map);
    Ok(ds)
}
