//! Inter-annotator agreement and majority-vote precision.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Item × category counts with a constant number of raters per item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationMatrix {
    counts: Vec<Vec<usize>>,
    raters: usize,
}

impl AnnotationMatrix {
    pub fn new(counts: Vec<Vec<usize>>) -> Result<Self> {
        let k = counts.first().map_or(0, Vec::len);
        if counts.is_empty() {
            return Err(Error::InvalidInput("annotation matrix has no items".into()));
        }
        if k < 2 {
            return Err(Error::InvalidInput("annotation matrix needs at least 2 categories".into()));
        }
        let raters: usize = counts[0].iter().sum();
        for (i, row) in counts.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidInput(format!("item {} has {} categories, expected {k}", i + 1, row.len())));
            }
            let sum: usize = row.iter().sum();
            if sum != raters {
                return Err(Error::InvalidInput(format!("item {} has {sum} ratings, expected {raters}", i + 1)));
            }
        }
        if raters < 2 {
            return Err(Error::InvalidInput("at least 2 raters per item are required".into()));
        }
        Ok(AnnotationMatrix { counts, raters })
    }

    /// Counts from per-item label lists; categories are the distinct labels
    /// in sorted order (at least two columns are kept).
    pub fn from_labels<S: AsRef<str>>(items: &[Vec<S>]) -> Result<Self> {
        let mut categories: BTreeSet<&str> = items.iter().flatten().map(AsRef::as_ref).collect();
        if categories.len() < 2 {
            // a lone category still needs a second column
            categories.insert("\u{0}");
        }
        let col: BTreeMap<&str, usize> = categories.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let counts = items
            .iter()
            .map(|labels| {
                let mut row = vec![0; col.len()];
                for l in labels {
                    row[col[l.as_ref()]] += 1;
                }
                row
            })
            .collect();
        Self::new(counts)
    }

    pub fn items(&self) -> usize {
        self.counts.len()
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }
}

/// Fleiss' κ = (p_o − p_e) / (1 − p_e).
pub fn fleiss_kappa(m: &AnnotationMatrix) -> Result<f64> {
    let n = m.raters as f64;
    let items = m.counts.len() as f64;
    let k = m.counts[0].len();
    let p_o = m
        .counts
        .iter()
        .map(|row| row.iter().map(|&c| (c * c.saturating_sub(1)) as f64).sum::<f64>() / (n * (n - 1.0)))
        .sum::<f64>()
        / items;
    let p_e: f64 = (0..k)
        .map(|j| {
            let p = m.counts.iter().map(|r| r[j] as f64).sum::<f64>() / (items * n);
            p * p
        })
        .sum();
    kappa(p_o, p_e)
}

fn kappa(p_o: f64, p_e: f64) -> Result<f64> {
    if (1.0 - p_e).abs() < 1e-12 {
        return Err(Error::Undefined("expected agreement is 1 (all ratings in one category)".into()));
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Cohen's κ for two raters over the same items.
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidInput(format!("label vectors of length {} and {}", a.len(), b.len())));
    }
    let n = a.len() as f64;
    let p_o = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ma: BTreeMap<&T, f64> = BTreeMap::new();
    let mut mb: BTreeMap<&T, f64> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1.0;
        *mb.entry(y).or_default() += 1.0;
    }
    let p_e: f64 = ma.iter().map(|(c, fa)| fa * mb.get(c).copied().unwrap_or(0.0)).sum::<f64>() / (n * n);
    kappa(p_o, p_e)
}

/// Fraction of items where at least two of the three votes are true.
pub fn majority_precision(votes: &[[bool; 3]]) -> f64 {
    if votes.is_empty() {
        return 0.0;
    }
    let hits = votes.iter().filter(|v| v.iter().filter(|&&x| x).count() >= 2).count();
    hits as f64 / votes.len() as f64
}

/// Ratings table: one column per rater, one row per item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ratings {
    pub raters: Vec<String>,
    pub items: Vec<Vec<String>>,
}

pub fn read_ratings_csv(path: &Path) -> Result<Ratings> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, 0, e.to_string()))?;
    let raters: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut items = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        let row: Vec<String> = rec.iter().map(str::to_string).collect();
        if row.iter().any(String::is_empty) {
            return Err(Error::parse(path, i + 2, "empty rating"));
        }
        items.push(row);
    }
    Ok(Ratings { raters, items })
}

fn as_bool(label: &str) -> Option<bool> {
    match label.to_ascii_lowercase().as_str() {
        "t" | "true" | "y" | "yes" | "1" | "correct" => Some(true),
        "f" | "false" | "n" | "no" | "0" | "incorrect" => Some(false),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKappa {
    pub a: String,
    pub b: String,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub items: usize,
    pub raters: usize,
    pub fleiss_kappa: Option<f64>,
    pub pairwise_cohen: Vec<PairKappa>,
    pub mean_pairwise_cohen: Option<f64>,
    /// Only for three raters with boolean labels.
    pub majority_precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn agreement_report(r: &Ratings) -> Result<AgreementReport> {
    let mut notes = Vec::new();
    let m = AnnotationMatrix::from_labels(&r.items)?;
    let fleiss = match fleiss_kappa(&m) {
        Ok(k) => Some(k),
        Err(e) => {
            notes.push(format!("fleiss: {e}"));
            None
        }
    };
    let mut pairwise = Vec::new();
    for i in 0..r.raters.len() {
        for j in i + 1..r.raters.len() {
            let a: Vec<&str> = r.items.iter().map(|row| row[i].as_str()).collect();
            let b: Vec<&str> = r.items.iter().map(|row| row[j].as_str()).collect();
            let kappa = match cohen_kappa(&a, &b) {
                Ok(k) => Some(k),
                Err(e) => {
                    notes.push(format!("cohen {}/{}: {e}", r.raters[i], r.raters[j]));
                    None
                }
            };
            pairwise.push(PairKappa {
                a: r.raters[i].clone(),
                b: r.raters[j].clone(),
                kappa,
            });
        }
    }
    let defined: Vec<f64> = pairwise.iter().filter_map(|p| p.kappa).collect();
    let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    let majority = if r.raters.len() == 3 {
        r.items
            .iter()
            .map(|row| Some([as_bool(&row[0])?, as_bool(&row[1])?, as_bool(&row[2])?]))
            .collect::<Option<Vec<_>>>()
            .map(|v| majority_precision(&v))
    } else {
        None
    };
    Ok(AgreementReport {
        items: m.items(),
        raters: m.raters(),
        fleiss_kappa: fleiss,
        pairwise_cohen: pairwise,
        mean_pairwise_cohen: mean,
        majority_precision: majority,
        notes,
    })
}
