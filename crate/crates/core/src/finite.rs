//! Finite metric spaces given by a distance matrix.
//!
//! These only answer distance queries; they exist to feed the curvature
//! auditor. Points are row indices.

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::space::Metric;

/// Relative slack allowed when validating the triangle inequality.
const TRIANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteMetric {
    n: usize,
    data: Vec<f64>,
}

impl FiniteMetric {
    /// Validates symmetry, zero diagonal, positive off-diagonal entries and
    /// the triangle inequality for every triple.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(GeoError::InvalidMatrix("empty matrix".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(GeoError::InvalidMatrix(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        let m = FiniteMetric { n, data };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let d = self.get(i, j);
                if !d.is_finite() {
                    return Err(GeoError::InvalidMatrix(format!("entry ({i},{j}) is not finite")));
                }
                if i == j {
                    if d != 0.0 {
                        return Err(GeoError::InvalidMatrix(format!(
                            "diagonal entry ({i},{i}) = {d} is not zero"
                        )));
                    }
                } else {
                    if d <= 0.0 {
                        return Err(GeoError::InvalidMatrix(format!(
                            "off-diagonal entry ({i},{j}) = {d} is not positive"
                        )));
                    }
                    if d != self.get(j, i) {
                        return Err(GeoError::InvalidMatrix(format!(
                            "entries ({i},{j}) and ({j},{i}) differ"
                        )));
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = self.get(i, j);
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let via = self.get(i, k) + self.get(k, j);
                    if dij > via * (1.0 + TRIANGLE_SLACK) {
                        return Err(GeoError::InvalidMatrix(format!(
                            "triangle inequality fails: d({i},{j}) = {dij} > d({i},{k}) + d({k},{j}) = {via}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses `n` rows of `n` comma-separated decimals, no header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    s.parse::<f64>().map_err(|e| {
                        GeoError::Parse(format!("entry ({i},{j}) = {s:?}: {e}"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        FiniteMetric::new(rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| GeoError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(f)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

impl Metric for FiniteMetric {
    type Point = usize;

    fn distance(&self, a: &usize, b: &usize) -> Result<f64> {
        if *a >= self.n || *b >= self.n {
            return Err(GeoError::SpaceMismatch(format!(
                "index out of range for a {}-point space",
                self.n
            )));
        }
        Ok(self.get(*a, *b))
    }
}
