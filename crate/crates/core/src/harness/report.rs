//! Structured experiment results, their JSON/CSV serialization and the
//! log-log least-squares fit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::grid::fmt17;

/// Where a bound comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Stated by the theory being reproduced.
    Theorem,
    /// Follows by a short computation from the construction.
    Analytic,
    /// A threshold chosen from observed behaviour.
    Empirical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    /// `|value - target| <= tolerance`.
    Near,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Key into [`Case::measured`].
    pub quantity: String,
    pub relation: Relation,
    pub target: f64,
    pub tolerance: f64,
    pub basis: Basis,
}

impl Check {
    pub fn at_most(quantity: &str, target: f64, basis: Basis) -> Self {
        Self::new(quantity, Relation::AtMost, target, 0.0, basis)
    }

    pub fn at_least(quantity: &str, target: f64, basis: Basis) -> Self {
        Self::new(quantity, Relation::AtLeast, target, 0.0, basis)
    }

    pub fn near(quantity: &str, target: f64, tolerance: f64, basis: Basis) -> Self {
        Self::new(quantity, Relation::Near, target, tolerance, basis)
    }

    fn new(quantity: &str, relation: Relation, target: f64, tolerance: f64, basis: Basis) -> Self {
        Self {
            quantity: quantity.to_string(),
            relation,
            target,
            tolerance,
            basis,
        }
    }

    pub fn holds(&self, value: f64) -> bool {
        match self.relation {
            Relation::AtMost => value <= self.target + self.tolerance,
            Relation::AtLeast => value >= self.target - self.tolerance,
            Relation::Near => (value - self.target).abs() <= self.tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub name: String,
    pub inputs_digest: String,
    pub measured: BTreeMap<String, f64>,
    /// `None` marks a reported diagnostic.
    pub check: Option<Check>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Case {
    pub fn new(name: impl Into<String>, inputs_digest: String) -> Self {
        Self {
            name: name.into(),
            inputs_digest,
            measured: BTreeMap::new(),
            check: None,
            pass: true,
            note: String::new(),
        }
    }

    pub fn value(mut self, key: &str, v: f64) -> Self {
        self.measured.insert(key.to_string(), v);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Attach `check` and evaluate it; a missing or NaN quantity fails.
    pub fn check(mut self, check: Check) -> Self {
        let v = self.measured.get(&check.quantity).copied().unwrap_or(f64::NAN);
        self.pass = !v.is_nan() && check.holds(v);
        self.check = Some(check);
        self
    }

    pub fn asserted(&self) -> bool {
        self.check.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedSlope {
    pub quantity: String,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least squares `log y = exponent * log x + intercept`.
pub fn fit_loglog(quantity: &str, xs: &[f64], ys: &[f64]) -> FittedSlope {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    FittedSlope {
        quantity: quantity.to_string(),
        exponent,
        intercept,
        r_squared,
        points: pts.len(),
    }
}

/// Hex SHA-256 (first 16 hex digits) of the JSON form of `inputs`.
pub fn digest<T: Serialize + ?Sized>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("digest inputs serialize");
    let hash = Sha256::digest(&bytes);
    hash.iter().take(8).fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// A plain numeric table written as the suite CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt17(*v),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// One row per case: every measured quantity, its check and verdict.
    pub fn from_cases(cases: &[Case]) -> Self {
        let mut t = Self::new(&[
            "case", "quantity", "value", "relation", "target", "tolerance", "basis", "pass", "digest",
        ]);
        for c in cases {
            for (q, v) in &c.measured {
                let (rel, target, tol, basis) = match &c.check {
                    Some(ch) if &ch.quantity == q => (
                        serde_plain(&ch.relation),
                        Cell::Num(ch.target),
                        Cell::Num(ch.tolerance),
                        serde_plain(&ch.basis),
                    ),
                    _ => ("reported".to_string(), Cell::Text(String::new()), Cell::Text(String::new()), String::new()),
                };
                t.push(vec![
                    c.name.as_str().into(),
                    q.as_str().into(),
                    (*v).into(),
                    rel.into(),
                    target,
                    tol,
                    basis.into(),
                    c.pass.into(),
                    c.inputs_digest.as_str().into(),
                ]);
            }
        }
        t
    }
}

fn serde_plain<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub suite_name: String,
    pub seed: u64,
    pub config_digest: String,
    pub cases: Vec<Case>,
    pub fitted_slopes: Vec<FittedSlope>,
    /// Number of samples drawn per experiment.
    pub census: BTreeMap<String, u64>,
    pub pass: bool,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn new(suite_name: &str, seed: u64, config_digest: String) -> Self {
        Self {
            suite_name: suite_name.to_string(),
            seed,
            config_digest,
            cases: Vec::new(),
            fitted_slopes: Vec::new(),
            census: BTreeMap::new(),
            pass: true,
            runtime_seconds: 0.0,
        }
    }

    pub fn push(&mut self, case: Case) {
        self.pass &= case.pass;
        self.cases.push(case);
    }

    pub fn count(&mut self, what: &str, n: usize) {
        *self.census.entry(what.to_string()).or_insert(0) += n as u64;
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let xs = [0.5, 0.25, 0.125, 0.0625];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        let f = fit_loglog("y", &xs, &ys);
        assert!((f.exponent - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn checks_evaluate() {
        let c = Case::new("a", digest("x")).value("r", 2.0);
        assert!(c.clone().check(Check::at_most("r", 2.0, Basis::Theorem)).pass);
        assert!(!c.clone().check(Check::at_least("r", 2.5, Basis::Theorem)).pass);
        assert!(c.clone().check(Check::near("r", 1.9, 0.11, Basis::Analytic)).pass);
        assert!(!c.check(Check::at_most("missing", 1.0, Basis::Empirical)).pass);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&(1, "a")), digest(&(1, "a")));
        assert_ne!(digest(&(1, "a")), digest(&(2, "a")));
        assert_eq!(digest("x").len(), 16);
    }

    #[test]
    fn report_aggregates_pass() {
        let mut r = ExperimentReport::new("s", 1, String::new());
        r.push(Case::new("ok", String::new()).value("v", 1.0));
        assert!(r.pass);
        r.push(Case::new("bad", String::new()).value("v", 1.0).check(Check::at_most("v", 0.0, Basis::Theorem)));
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        let back: ExperimentReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn case_table_lists_every_quantity() {
        let c = Case::new("a", "d".into())
            .value("r", 2.0)
            .value("s", 3.0)
            .check(Check::at_most("r", 4.0, Basis::Theorem));
        let csv = Table::from_cases(&[c]).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a,r,2.0000000000000000e0,at-most,4.0000000000000000e0,"));
        assert!(lines[2].contains(",reported,"));
    }
}
