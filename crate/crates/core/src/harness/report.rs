//! Check rows, CSV tables, the run report and run comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a double with 17 significant digits (`inf`, `-inf`, `nan` spelled out).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| Error::Config(format!("not a number: '{s}'"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
    /// Recorded without a verdict.
    Info,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
            Relation::Info => "info",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "<=" => Ok(Relation::AtMost),
            ">=" => Ok(Relation::AtLeast),
            "==" => Ok(Relation::Equal),
            "info" => Ok(Relation::Info),
            _ => Err(Error::Config(format!("unknown relation '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub relation: Relation,
    pub value: f64,
    pub threshold: f64,
}

impl CheckRow {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckRow { name: name.into(), relation: Relation::AtMost, value, threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckRow { name: name.into(), relation: Relation::AtLeast, value, threshold }
    }

    pub fn equal(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckRow { name: name.into(), relation: Relation::Equal, value, threshold }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        CheckRow { name: name.into(), relation: Relation::Info, value, threshold: f64::NAN }
    }

    /// Verdict from the row's own value and threshold; NaN values fail.
    pub fn verdict(&self) -> Verdict {
        let ok = match self.relation {
            Relation::Info => return Verdict::Info,
            Relation::AtMost => self.value <= self.threshold,
            Relation::AtLeast => self.value >= self.threshold,
            Relation::Equal => self.value == self.threshold,
        };
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// A CSV table written to `<name>.csv`.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column names and rows, without the header comment.
    pub fn body(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub suite: String,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckRow>,
    pub tables: Vec<Table>,
    pub wall_clock: f64,
    /// Set when the suite stopped early on its time budget.
    pub partial: bool,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| c.verdict() == Verdict::Fail).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0 && !self.partial
    }

    pub fn check(&self, name: &str) -> Option<&CheckRow> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Header comment shared by every output file of the run.
    pub fn header(&self) -> String {
        format!(
            "# schema={SCHEMA_VERSION} config_hash={} suite={} version={} seed={}\n# config {}\n",
            self.config.hash(),
            self.suite,
            env!("CARGO_PKG_VERSION"),
            self.config.seed,
            self.config.canonical()
        )
    }

    /// Body of `report.csv`.
    pub fn checks_body(&self) -> String {
        let mut out = String::from("name,relation,value,threshold,verdict\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.name,
                c.relation.symbol(),
                fmt_f64(c.value),
                fmt_f64(c.threshold),
                c.verdict().as_str()
            );
        }
        out
    }

    /// Writes `report.csv`, one CSV per table and a plain-text `summary.txt`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let header = self.header();
        let timing = format!("# wall_clock_seconds={:.3} partial={}\n", self.wall_clock, self.partial);
        std::fs::write(dir.join("report.csv"), format!("{header}{timing}{}", self.checks_body()))?;
        for t in &self.tables {
            std::fs::write(dir.join(format!("{}.csv", t.name)), format!("{header}{}", t.body()))?;
        }
        std::fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "suite {} ({} checks, {} failed{}) in {:.2} s\n",
            self.suite,
            self.checks.len(),
            self.failures(),
            if self.partial { ", partial" } else { "" },
            self.wall_clock
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {:<5} {:<40} {} {} {}",
                c.verdict().as_str(),
                c.name,
                fmt_f64(c.value),
                c.relation.symbol(),
                if c.relation == Relation::Info { String::new() } else { fmt_f64(c.threshold) }
            );
        }
        out
    }
}

/// Check rows read back from a `report.csv`.
#[derive(Debug, Clone)]
pub struct StoredReport {
    pub suite: String,
    pub config_hash: String,
    pub rows: Vec<(String, f64, String)>,
}

pub fn read_report(path: &Path) -> Result<StoredReport> {
    let path = if path.is_dir() { path.join("report.csv") } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut suite = None;
    let mut hash = String::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# schema=") {
            for field in rest.split_whitespace() {
                if let Some(s) = field.strip_prefix("suite=") {
                    suite = Some(s.to_string());
                } else if let Some(h) = field.strip_prefix("config_hash=") {
                    hash = h.to_string();
                }
            }
            continue;
        }
        if line.starts_with('#') || line.starts_with("name,") || line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Config(format!("{}: malformed row '{line}'", path.display())));
        }
        Relation::parse(cols[1])?;
        rows.push((cols[0].to_string(), parse_f64(cols[2])?, cols[4].to_string()));
    }
    let suite = suite.ok_or_else(|| Error::Config(format!("{}: missing schema header", path.display())))?;
    Ok(StoredReport { suite, config_hash: hash, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffRow {
    pub name: String,
    pub value_a: Option<f64>,
    pub value_b: Option<f64>,
    /// `b / a`; 1 when both vanish.
    pub ratio: Option<f64>,
    pub verdict_a: Option<String>,
    pub verdict_b: Option<String>,
    /// `same`, `changed`, or `absent` when the row is missing from one side.
    pub status: &'static str,
}

/// Per-row value ratios and verdict changes between two reports of the same suite.
pub fn compare_runs(a: &StoredReport, b: &StoredReport) -> Result<Vec<DiffRow>> {
    if a.suite != b.suite {
        return Err(Error::Config(format!("cannot compare suite '{}' with suite '{}'", a.suite, b.suite)));
    }
    let index = |r: &StoredReport| -> BTreeMap<String, (f64, String)> {
        r.rows.iter().map(|(n, v, d)| (n.clone(), (*v, d.clone()))).collect()
    };
    let (ia, ib) = (index(a), index(b));
    let mut names: Vec<&String> = a.rows.iter().map(|r| &r.0).collect();
    names.extend(b.rows.iter().map(|r| &r.0).filter(|n| !ia.contains_key(*n)));
    Ok(names
        .into_iter()
        .map(|name| {
            let ra = ia.get(name);
            let rb = ib.get(name);
            let ratio = match (ra, rb) {
                (Some((x, _)), Some((y, _))) => Some(if *x == *y { 1.0 } else { y / x }),
                _ => None,
            };
            let status = match (ra, rb) {
                (Some((_, va)), Some((_, vb))) => {
                    if va == vb {
                        "same"
                    } else {
                        "changed"
                    }
                }
                _ => "absent",
            };
            DiffRow {
                name: name.clone(),
                value_a: ra.map(|r| r.0),
                value_b: rb.map(|r| r.0),
                ratio,
                verdict_a: ra.map(|r| r.1.clone()),
                verdict_b: rb.map(|r| r.1.clone()),
                status,
            }
        })
        .collect())
}

/// Diff rows as CSV.
pub fn diff_table(rows: &[DiffRow]) -> Table {
    let mut t = Table::new("compare", &["name", "value_a", "value_b", "ratio", "verdict_a", "verdict_b", "status"]);
    let num = |x: Option<f64>| x.map(Cell::Num).unwrap_or_else(|| Cell::Text(String::new()));
    let txt = |x: &Option<String>| Cell::Text(x.clone().unwrap_or_default());
    for r in rows {
        t.push(vec![
            Cell::Text(r.name.clone()),
            num(r.value_a),
            num(r.value_b),
            num(r.ratio),
            txt(&r.verdict_a),
            txt(&r.verdict_b),
            Cell::Text(r.status.into()),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stored(suite: &str, rows: &[(&str, f64, &str)]) -> StoredReport {
        StoredReport {
            suite: suite.into(),
            config_hash: String::new(),
            rows: rows.iter().map(|(n, v, d)| (n.to_string(), *v, d.to_string())).collect(),
        }
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(parse_f64(&fmt_f64(x)).unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn verdicts() {
        assert_eq!(CheckRow::at_most("a", 1e-12, 1e-10).verdict(), Verdict::Pass);
        assert_eq!(CheckRow::at_most("a", f64::NAN, 1e-10).verdict(), Verdict::Fail);
        assert_eq!(CheckRow::at_least("a", 3.0, 5.0).verdict(), Verdict::Fail);
        assert_eq!(CheckRow::equal("a", 1.0, 1.0).verdict(), Verdict::Pass);
        assert_eq!(CheckRow::info("a", 2.0).verdict(), Verdict::Info);
    }

    #[test]
    fn identical_reports_have_unit_ratios() {
        let a = stored("spectral", &[("x", 2.0, "pass"), ("y", 0.0, "pass")]);
        let d = compare_runs(&a, &a).unwrap();
        assert!(d.iter().all(|r| r.ratio == Some(1.0) && r.status == "same"));
    }

    #[test]
    fn missing_rows_are_absent() {
        let a = stored("weights", &[("x", 2.0, "pass"), ("y", 1.0, "pass")]);
        let b = stored("weights", &[("x", 4.0, "fail"), ("z", 1.0, "pass")]);
        let d = compare_runs(&a, &b).unwrap();
        assert_eq!(d[0].ratio, Some(2.0));
        assert_eq!(d[0].status, "changed");
        assert_eq!(d[1].status, "absent");
        assert_eq!(d[2].name, "z");
        assert_eq!(d[2].status, "absent");
    }

    #[test]
    fn suite_mismatch_is_an_error() {
        assert!(compare_runs(&stored("a", &[]), &stored("b", &[])).is_err());
    }
}
