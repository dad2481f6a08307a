use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sign` with `sign(0) = +1`.
pub fn sign_label(value: f64) -> i8 {
    if value >= 0.0 {
        1
    } else {
        -1
    }
}

pub(crate) fn check_labels(labels: &[i8]) -> Result<()> {
    match labels.iter().position(|&y| y != 1 && y != -1) {
        Some(i) => Err(Error::domain(format!(
            "label {} at index {i} is not ±1",
            labels[i]
        ))),
        None => Ok(()),
    }
}

/// A vector of `±1` labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct LabelVector(Vec<i8>);

impl LabelVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        check_labels(&entries)?;
        Ok(LabelVector(entries))
    }

    pub fn from_signs(values: &[f64]) -> Self {
        LabelVector(values.iter().map(|&v| sign_label(v)).collect())
    }

    pub fn constant(len: usize, label: i8) -> Self {
        assert!(label == 1 || label == -1);
        LabelVector(vec![label; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i8> {
        self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        self.0.iter().copied()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&y| i64::from(y)).sum()
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn negated(&self) -> Self {
        LabelVector(self.0.iter().map(|&y| -y).collect())
    }

    /// `Σ_j a_j b_j`.
    pub fn dot(&self, other: &LabelVector) -> i64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| i64::from(a) * i64::from(b))
            .sum()
    }

    pub fn hamming(&self, other: &LabelVector) -> usize {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl TryFrom<Vec<i8>> for LabelVector {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        LabelVector::new(v)
    }
}

impl From<LabelVector> for Vec<i8> {
    fn from(v: LabelVector) -> Self {
        v.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_ties_are_positive() {
        assert_eq!(sign_label(0.0), 1);
        assert_eq!(sign_label(-0.0), 1);
        assert_eq!(sign_label(-1e-300), -1);
    }

    #[test]
    fn rejects_non_unit_labels() {
        assert!(LabelVector::new(vec![1, 0]).is_err());
        assert!(serde_json::from_str::<LabelVector>("[1,2]").is_err());
        let v: LabelVector = serde_json::from_str("[1,-1]").unwrap();
        assert_eq!(v.sum(), 0);
    }

    #[test]
    fn dot_and_hamming() {
        let a = LabelVector::new(vec![1, 1, -1, -1]).unwrap();
        let b = LabelVector::new(vec![1, -1, -1, 1]).unwrap();
        assert_eq!(a.dot(&b), 0);
        assert_eq!(a.hamming(&b), 2);
        assert_eq!(a.hamming(&a.negated()), 4);
    }
}
