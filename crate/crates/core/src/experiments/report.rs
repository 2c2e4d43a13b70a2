//! Report types and their CSV / JSON forms.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::ExperimentKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One asserted inequality `observed (<= | >=) bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub bound: f64,
    pub observed: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self { name: name.into(), relation: Relation::AtMost, bound, observed, passed: observed <= bound }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self { name: name.into(), relation: Relation::AtLeast, bound, observed, passed: observed >= bound }
    }

    /// Worse of two observations of the same check.
    fn merge(&mut self, other: &Check) {
        let worse = match self.relation {
            Relation::AtMost => self.observed.max(other.observed),
            Relation::AtLeast => self.observed.min(other.observed),
        };
        // NaN observations stick
        self.observed = if self.observed.is_nan() || other.observed.is_nan() { f64::NAN } else { worse };
        self.passed = self.passed && other.passed;
    }
}

fn write_table<W: Write>(
    mut out: W,
    title: &str,
    columns: &[(String, String)],
    rows: impl Iterator<Item = Vec<f64>>,
) -> io::Result<()> {
    writeln!(out, "# {title}")?;
    writeln!(out, "# columns:")?;
    for (name, doc) in columns {
        writeln!(out, "#   {name}: {doc}")?;
    }
    let names: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
    writeln!(out, "{}", names.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub s: f64,
    /// Near-field quadrature value.
    pub gagliardo: f64,
    pub tail_bracket: f64,
    /// Near field plus modelled far field.
    pub completed: f64,
    /// `(p / k(p,N))^{1/p} (1-s)^{1/p}` times `completed`.
    pub scaled: f64,
    pub target: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    /// Intercept of the linear fit of `scaled` against `1 - s` over the last three points.
    pub limit_estimate: f64,
    /// `|limit / target - 1|`.
    pub limit_error: f64,
    /// Largest `|scaled / target - 1|` over the last three points.
    pub max_deviation: f64,
    pub constants: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kind: ExperimentKind,
    pub descriptor: String,
    pub p: f64,
    pub seed: u64,
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let columns = [
            ("s", "smoothness"),
            ("gagliardo", "near-field Gagliardo seminorm"),
            ("tail_bracket", "bound on the far field beyond the cutoff"),
            ("completed", "Gagliardo seminorm including the modelled far field"),
            ("scaled", "(p/k)^(1/p) (1-s)^(1/p) completed"),
            ("target", "gradient Lp norm"),
            ("ratio", "scaled / target"),
        ];
        let columns: Vec<(String, String)> = columns.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let title = format!("{} report; descriptor={}; p={}; seed={}", self.kind.name(), self.descriptor, self.p, self.seed);
        let rows = self.records.iter().map(|r| {
            vec![r.s, r.gagliardo, r.tail_bracket, r.completed, r.scaled, r.target, r.ratio]
        });
        write_table(out, &title, &columns, rows)
    }
}

/// Per-`s` table of ratios for one test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub kind: ExperimentKind,
    pub descriptor: String,
    pub p: f64,
    pub seed: u64,
    /// `(name, description)` per column.
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
    pub constants: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl RatioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|(n, _)| n == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let title = format!("{} report; descriptor={}; p={}; seed={}", self.kind.name(), self.descriptor, self.p, self.seed);
        write_table(out, &title, &self.columns, self.rows.iter().cloned())
    }
}

/// Worst-case checks and constants over a family of reports of the same kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub kind: ExperimentKind,
    pub p: f64,
    pub members: Vec<String>,
    pub constants: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

impl FamilySummary {
    /// Constants named `*_min` take the minimum, all others the maximum.
    pub fn from_reports(kind: ExperimentKind, p: f64, reports: &[RatioReport]) -> Self {
        let mut constants: BTreeMap<String, f64> = BTreeMap::new();
        let mut checks: Vec<Check> = Vec::new();
        for report in reports {
            for (name, &v) in &report.constants {
                constants
                    .entry(name.clone())
                    .and_modify(|c| *c = if name.ends_with("_min") { c.min(v) } else { c.max(v) })
                    .or_insert(v);
            }
            for check in &report.checks {
                match checks.iter_mut().find(|c| c.name == check.name) {
                    Some(existing) => existing.merge(check),
                    None => checks.push(check.clone()),
                }
            }
        }
        Self { kind, p, members: reports.iter().map(|r| r.descriptor.clone()).collect(), constants, checks }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(name: &str, value: f64) -> RatioReport {
        RatioReport {
            kind: ExperimentKind::Embed,
            descriptor: name.into(),
            p: 2.0,
            seed: 1,
            columns: vec![("s".into(), "smoothness".into()), ("r".into(), "ratio".into())],
            rows: vec![vec![0.5, value]],
            constants: [("r_max".to_string(), value), ("r_min".to_string(), value)].into(),
            checks: vec![Check::at_most("upper", value, 10.0), Check::at_least("lower", value, 0.1)],
            warnings: vec![],
        }
    }

    #[test]
    fn family_takes_worst_case() {
        let fam = FamilySummary::from_reports(ExperimentKind::Embed, 2.0, &[report("a", 1.0), report("b", 20.0), report("c", 0.5)]);
        assert_eq!(fam.constants["r_max"], 20.0);
        assert_eq!(fam.constants["r_min"], 0.5);
        assert_eq!(fam.checks[0].observed, 20.0);
        assert!(!fam.checks[0].passed);
        assert_eq!(fam.checks[1].observed, 0.5);
        assert!(fam.checks[1].passed);
        assert!(!fam.passed());
    }

    #[test]
    fn nan_fails_checks() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Check::at_least("x", f64::NAN, 1.0).passed);
    }

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        report("a", 1.5).write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# embed report; descriptor=a"));
        assert_eq!(lines[4], "s,r");
        assert_eq!(lines[5], "0.5,1.5");
        let json = serde_json::to_string(&report("a", 1.5)).unwrap();
        let back: RatioReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report("a", 1.5));
    }
}
