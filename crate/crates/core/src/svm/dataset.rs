use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::labels::check_labels;
use crate::qstate::FeatureVector9;

pub type Features = [f64; 9];

/// Column names of the dataset CSV, in order.
pub const CSV_HEADER: [&str; 10] = [
    "t11", "t12", "t13", "t21", "t22", "t23", "t31", "t32", "t33", "label",
];

/// Labeled feature vectors; `labels[i]` is `±1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    features: Vec<Features>,
    labels: Vec<i8>,
}

impl Dataset {
    pub fn new(features: Vec<Features>, labels: Vec<i8>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::domain(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        check_labels(&labels)?;
        if features.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("non-finite feature value"));
        }
        Ok(Dataset { features, labels })
    }

    pub fn from_feature_vectors(rows: &[FeatureVector9], labels: Vec<i8>) -> Result<Self> {
        Dataset::new(rows.iter().map(|r| r.0).collect(), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &[Features] {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn count(&self, label: i8) -> usize {
        self.labels.iter().filter(|&&y| y == label).count()
    }

    pub fn has_both_classes(&self) -> bool {
        self.count(1) > 0 && self.count(-1) > 0
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Dataset) -> Dataset {
        let mut out = self.clone();
        out.features.extend_from_slice(&other.features);
        out.labels.extend_from_slice(&other.labels);
        out
    }

    pub fn with_labels(&self, labels: Vec<i8>) -> Result<Dataset> {
        Dataset::new(self.features.clone(), labels)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for (x, &y) in self.features.iter().zip(&self.labels) {
            let mut rec: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
            rec.push(y.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.iter().map(str::trim).ne(CSV_HEADER) {
            return Err(Error::Parse(format!(
                "expected header {}, found {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: column {k}: {e}", line + 1)))
            };
            let mut x = [0.0; 9];
            for (k, slot) in x.iter_mut().enumerate() {
                *slot = parse(k)?;
            }
            let y: i8 = rec[9]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {}: label: {e}", line + 1)))?;
            features.push(x);
            labels.push(y);
        }
        Dataset::new(features, labels)
    }
}
