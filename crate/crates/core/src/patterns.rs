//! Rayleigh triangles and trapezoids.
//!
//! A triangle of size `n` stores rows `1..=n`; row `j` holds `j` ascending
//! values and adjacent rows interlace:
//! `row[j+1][k] <= row[j][k] <= row[j+1][k+1]`. Row `n` is the top row.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which two entries count as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

/// Interval `[a, b]` that every entry must lie in. Infinite ends are IEEE infinities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainWindow {
    pub lower: f64,
    pub upper: f64,
}

impl DomainWindow {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::Domain(format!(
                "window requires a < b, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn real_line() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn half_line() -> Self {
        Self {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

/// Outcome of [`RayleighTriangle::validate`]; positions are 1-indexed `(j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ValidationVerdict {
    Ok,
    /// Row `j` is not increasing at position `k` (`row[j][k] > row[j][k+1]`).
    NotIncreasing {
        j: usize,
        k: usize,
    },
    /// Entry `(j, k)` is not squeezed between its two neighbours in row `j + 1`.
    InterlacingViolation {
        j: usize,
        k: usize,
    },
    /// Entry `(j, k)` coincides with a neighbour within the tie tolerance.
    Tie {
        j: usize,
        k: usize,
    },
    OutOfWindow {
        j: usize,
        k: usize,
    },
}

impl ValidationVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationVerdict::Ok)
    }
}

pub(crate) fn is_tie(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * 1f64.max(x.abs()).max(y.abs())
}

fn check_rows(rows: &[Vec<f64>], base: usize) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Shape("no rows".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        let j = base + i;
        if r.len() != j {
            return Err(Error::Shape(format!(
                "row {j} has {} entries, expected {j}",
                r.len()
            )));
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::Shape(format!("row {j} contains a non-finite entry")));
        }
    }
    Ok(())
}

/// Shared validation for triangles (`base = 1`) and trapezoids.
fn validate_rows(
    rows: &[Vec<f64>],
    base: usize,
    window: &DomainWindow,
    tol: f64,
) -> ValidationVerdict {
    // order within rows first, so a permuted row is reported as such
    for (i, r) in rows.iter().enumerate() {
        for k in 0..r.len().saturating_sub(1) {
            if r[k] > r[k + 1] {
                return ValidationVerdict::NotIncreasing {
                    j: base + i,
                    k: k + 1,
                };
            }
        }
    }
    for i in 0..rows.len().saturating_sub(1) {
        let (lo, hi) = (&rows[i], &rows[i + 1]);
        let j = base + i;
        for k in 0..lo.len() {
            if !(hi[k] <= lo[k] && lo[k] <= hi[k + 1]) {
                return ValidationVerdict::InterlacingViolation { j, k: k + 1 };
            }
        }
    }
    for i in 0..rows.len().saturating_sub(1) {
        let (lo, hi) = (&rows[i], &rows[i + 1]);
        let j = base + i;
        for k in 0..lo.len() {
            if is_tie(hi[k], lo[k], tol) || is_tie(lo[k], hi[k + 1], tol) {
                return ValidationVerdict::Tie { j, k: k + 1 };
            }
        }
    }
    for (i, r) in rows.iter().enumerate() {
        for k in 0..r.len().saturating_sub(1) {
            if is_tie(r[k], r[k + 1], tol) {
                return ValidationVerdict::Tie {
                    j: base + i,
                    k: k + 1,
                };
            }
        }
    }
    for (i, r) in rows.iter().enumerate() {
        for (k, &x) in r.iter().enumerate() {
            if !window.contains(x) {
                return ValidationVerdict::OutOfWindow {
                    j: base + i,
                    k: k + 1,
                };
            }
        }
    }
    ValidationVerdict::Ok
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighTriangle {
    rows: Vec<Vec<f64>>,
}

impl RayleighTriangle {
    /// Builds a triangle from rows given in order `1..=n`. Only the shape is
    /// checked; use [`validate`](Self::validate) for the inequalities.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        check_rows(&rows, 1)?;
        Ok(Self { rows })
    }

    /// Builds a triangle from unsorted spectra, sorting each row ascending.
    pub fn from_spectra(mut rows: Vec<Vec<f64>>) -> Result<Self> {
        for r in rows.iter_mut() {
            r.sort_by(|a, b| a.total_cmp(b));
        }
        Self::new(rows)
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.rows
    }

    /// Row `j` (1-indexed).
    pub fn row(&self, j: usize) -> Result<Vec<f64>> {
        if j == 0 || j > self.rows.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                size: self.rows.len(),
            });
        }
        Ok(self.rows[j - 1].clone())
    }

    pub fn top_row(&self) -> Vec<f64> {
        self.rows[self.rows.len() - 1].clone()
    }

    /// Entry `λ_{jα}`, 1-indexed.
    pub fn entry(&self, j: usize, alpha: usize) -> f64 {
        self.rows[j - 1][alpha - 1]
    }

    pub fn validate(&self, window: &DomainWindow) -> ValidationVerdict {
        self.validate_with_tol(window, DEFAULT_TIE_TOL)
    }

    pub fn validate_with_tol(&self, window: &DomainWindow, tie_tol: f64) -> ValidationVerdict {
        validate_rows(&self.rows, 1, window, tie_tol)
    }

    /// Erases the top row.
    pub fn project(&self) -> Result<RayleighTriangle> {
        if self.rows.len() < 2 {
            return Err(Error::CannotProject);
        }
        Ok(Self {
            rows: self.rows[..self.rows.len() - 1].to_vec(),
        })
    }

    /// Keeps rows `m..=n` as a trapezoid.
    pub fn trapezoid_from(&self, m: usize) -> Result<RayleighTrapezoid> {
        if m == 0 || m > self.size() {
            return Err(Error::IndexOutOfRange {
                index: m,
                size: self.size(),
            });
        }
        RayleighTrapezoid::new(m, self.rows[m - 1..].to_vec())
    }

    /// `j,alpha,value` lines, 1-indexed, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.rows.iter().enumerate() {
            for (a, v) in r.iter().enumerate() {
                let _ = writeln!(out, "{},{},{:.16e}", i + 1, a + 1, v);
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("bad csv line `{line}`")));
            }
            let j = parts[0]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(e.to_string()))?;
            let a = parts[1]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(e.to_string()))?;
            let v = parts[2]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))?;
            entries.push((j, a, v));
        }
        let n = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let mut rows: Vec<Vec<Option<f64>>> = (1..=n).map(|j| vec![None; j]).collect();
        for (j, a, v) in entries {
            if j == 0 || a == 0 || a > j {
                return Err(Error::Shape(format!(
                    "entry ({j},{a}) outside the triangle"
                )));
            }
            rows[j - 1][a - 1] = Some(v);
        }
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().collect::<Option<Vec<f64>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Shape("missing entries".into()))?;
        Self::new(rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("triangle serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            rows: Vec<Vec<f64>>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(raw.rows)
    }
}

/// Rows `m..=n` of a Rayleigh pattern; row `j` has `j` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighTrapezoid {
    base: usize,
    rows: Vec<Vec<f64>>,
}

impl RayleighTrapezoid {
    pub fn new(base: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if base == 0 {
            return Err(Error::Shape("trapezoid base must be at least 1".into()));
        }
        check_rows(&rows, base)?;
        Ok(Self { base, rows })
    }

    pub fn base_size(&self) -> usize {
        self.base
    }

    pub fn top_size(&self) -> usize {
        self.base + self.rows.len() - 1
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn validate(&self, window: &DomainWindow) -> ValidationVerdict {
        validate_rows(&self.rows, self.base, window, DEFAULT_TIE_TOL)
    }
}

impl From<RayleighTriangle> for RayleighTrapezoid {
    fn from(t: RayleighTriangle) -> Self {
        Self {
            base: 1,
            rows: t.rows,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(rows: Vec<Vec<f64>>) -> RayleighTriangle {
        RayleighTriangle::new(rows).unwrap()
    }

    #[test]
    fn validate_examples() {
        let line = DomainWindow::real_line();
        assert_eq!(
            tri(vec![vec![1.0], vec![0.0, 2.0]]).validate(&line),
            ValidationVerdict::Ok
        );
        assert_eq!(
            tri(vec![vec![3.0], vec![0.0, 2.0]]).validate(&line),
            ValidationVerdict::InterlacingViolation { j: 1, k: 1 }
        );
        let half = DomainWindow::half_line();
        assert!(tri(vec![vec![1.0], vec![0.0, 2.0]]).validate(&half).is_ok());
        assert!(matches!(
            tri(vec![vec![-1.0], vec![-2.0, 0.0]]).validate(&half),
            ValidationVerdict::OutOfWindow { .. }
        ));
    }

    #[test]
    fn ties_are_reported_separately() {
        let line = DomainWindow::real_line();
        assert_eq!(
            tri(vec![vec![0.0], vec![0.0, 2.0]]).validate(&line),
            ValidationVerdict::Tie { j: 1, k: 1 }
        );
        let near = tri(vec![vec![1.0 + 1e-14], vec![1.0, 2.0]]);
        assert_eq!(near.validate(&line), ValidationVerdict::Tie { j: 1, k: 1 });
        assert!(near.validate_with_tol(&line, 1e-16).is_ok());
    }

    #[test]
    fn permuted_row_is_flagged() {
        let t = tri(vec![vec![1.0], vec![2.0, 0.0]]);
        assert_eq!(
            t.validate(&DomainWindow::real_line()),
            ValidationVerdict::NotIncreasing { j: 2, k: 1 }
        );
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            RayleighTriangle::new(vec![vec![1.0, 2.0]]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            RayleighTriangle::new(vec![]),
            Err(Error::Shape(_))
        ));
        assert!(DomainWindow::new(1.0, 1.0).is_err());
    }

    #[test]
    fn project_examples() {
        assert_eq!(
            tri(vec![vec![1.0], vec![0.0, 2.0]]).project().unwrap(),
            tri(vec![vec![1.0]])
        );
        let t = tri(vec![vec![0.0], vec![-1.0, 1.0], vec![-2.0, 0.5, 2.0]]);
        assert_eq!(t.project().unwrap(), tri(vec![vec![0.0], vec![-1.0, 1.0]]));
        assert_eq!(t.size(), 3);
        assert_eq!(tri(vec![vec![5.0]]).project(), Err(Error::CannotProject));
    }

    #[test]
    fn row_access() {
        let t = tri(vec![vec![1.0], vec![0.0, 2.0]]);
        assert_eq!(t.top_row(), vec![0.0, 2.0]);
        assert_eq!(t.row(1).unwrap(), vec![1.0]);
        assert!(matches!(t.row(3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn from_spectra_sorts() {
        let t = RayleighTriangle::from_spectra(vec![vec![1.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(t.top_row(), vec![0.0, 2.0]);
    }

    #[test]
    fn csv_and_json_formats() {
        let t = tri(vec![vec![0.1], vec![-1.0, 1.0 / 3.0]]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "1,1,1.0000000000000001e-1");
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(RayleighTriangle::from_csv(&csv).unwrap(), t);
        let json = t.to_json();
        assert!(json.starts_with("{\"rows\":[[0.1],"));
        assert_eq!(RayleighTriangle::from_json(&json).unwrap(), t);
    }

    #[test]
    fn trapezoid_shape() {
        let t = tri(vec![vec![0.0], vec![-1.0, 1.0], vec![-2.0, 0.5, 2.0]]);
        let z = t.trapezoid_from(2).unwrap();
        assert_eq!(z.base_size(), 2);
        assert_eq!(z.top_size(), 3);
        assert!(z.validate(&DomainWindow::real_line()).is_ok());
        assert!(RayleighTrapezoid::new(2, vec![vec![1.0]]).is_err());
    }
}
