//! Tables, their CSV/JSON renderings, and the run manifest.

use crate::args::Format;
use crate::error::CliError;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x.into())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar results that do not fit the grid, e.g. crossovers.
    pub metadata: BTreeMap<String, Value>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metadata.insert(key.to_string(), round_json(v));
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }
}

/// Nine significant digits, '.' decimal, no grouping.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let r: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    let a = r.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_f64(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_num(x).parse::<f64>().unwrap_or(x))
    } else {
        Value::Null
    }
}

fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => round_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell_csv(c: &Cell) -> String {
    match c {
        Cell::Num(x) => fmt_num(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => csv_text(s),
        Cell::Empty => String::new(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => round_f64(*x),
        Cell::Int(i) => json!(i),
        Cell::Text(s) => json!(s),
        Cell::Empty => Value::Null,
    }
}

/// What a rendered output says about the run that produced it. Contains
/// nothing time-dependent, so equal runs render equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunHeader {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    /// File name of the sidecar manifest when writing to a file.
    pub manifest: Option<String>,
}

impl RunHeader {
    pub fn params_sha256(&self) -> String {
        let canon = serde_json::to_string(&(&self.command, &self.params, self.seed, &self.version)).unwrap_or_default();
        hex(&Sha256::digest(canon.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn render(table: &Table, header: &RunHeader, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => render_csv(table, header).into_bytes(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&to_json(table, header)).unwrap_or_default();
            s.push('\n');
            s.into_bytes()
        }
    }
}

fn render_csv(table: &Table, header: &RunHeader) -> String {
    let mut s = String::new();
    s.push_str(&format!("# fading-ic {} {}\n", header.version, header.command));
    if let Some(m) = &header.manifest {
        s.push_str(&format!("# manifest: {m}\n"));
    }
    s.push_str(&format!("# params_sha256: {}\n", header.params_sha256()));
    for (k, v) in &table.metadata {
        s.push_str(&format!("# {k}: {v}\n"));
    }
    s.push_str(&table.columns.iter().map(|c| csv_text(c)).collect::<Vec<_>>().join(","));
    s.push('\n');
    for row in &table.rows {
        s.push_str(&row.iter().map(cell_csv).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

pub fn to_json(table: &Table, header: &RunHeader) -> Value {
    let meta: Map<String, Value> = table.metadata.clone().into_iter().collect();
    json!({
        "command": header.command,
        "version": header.version,
        "params": header.params,
        "seed": header.seed,
        "manifest": header.manifest,
        "params_sha256": header.params_sha256(),
        "columns": table.columns,
        "rows": table.rows.iter().map(|r| r.iter().map(cell_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "metadata": meta,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

/// Sidecar describing one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
    pub params_sha256: String,
    pub outputs: Vec<OutputRecord>,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn partial_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Writes `bytes` under a `.partial` name and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = partial_path(path);
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn write_with_manifest(out: &Path, bytes: &[u8], header: &RunHeader) -> Result<RunManifest, CliError> {
    write_atomic(out, bytes)?;
    let manifest = RunManifest {
        command: header.command.clone(),
        params: header.params.clone(),
        seed: header.seed,
        version: header.version.clone(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        params_sha256: header.params_sha256(),
        outputs: vec![OutputRecord {
            path: out.display().to_string(),
            sha256: hex(&Sha256::digest(bytes)),
        }],
    };
    let mut text = serde_json::to_string_pretty(&manifest).unwrap_or_default();
    text.push('\n');
    write_atomic(&manifest_path(out), text.as_bytes())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> RunHeader {
        RunHeader {
            command: "dispersion".into(),
            params: BTreeMap::from([("domain".into(), "real".into())]),
            seed: None,
            version: "0.1.0".into(),
            manifest: Some("x.csv.manifest.json".into()),
        }
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.911_233_050_93), "0.911233051");
        assert_eq!(fmt_num(-1.707_546_365_655_439), "-1.70754637");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(2.8e-6), "2.8e-6");
        assert_eq!(fmt_num(1234567.0), "1234567");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert!(!fmt_num(123456789012.0).contains(','));
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "label"]);
        t.push(vec![Cell::Num(1.0 / 3.0), "a,b".into()]);
        t.push(vec![Cell::Empty, Cell::Int(7)]);
        t.meta("crossovers", vec![5.595_404_023_869_415, 15.0]);
        let s = String::from_utf8(render(&t, &header(), Format::Csv)).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[1], "# manifest: x.csv.manifest.json");
        assert_eq!(lines[3], "# crossovers: [5.59540402,15.0]");
        assert_eq!(lines[4], "x,label");
        assert_eq!(lines[5], "0.333333333,\"a,b\"");
        assert_eq!(lines[6], ",7");
    }

    #[test]
    fn json_nulls_for_non_finite() {
        let mut t = Table::new(&["v"]);
        t.push(vec![Cell::Num(f64::INFINITY)]);
        let v = to_json(&t, &header());
        assert_eq!(v["rows"][0][0], Value::Null);
        assert_eq!(v["columns"][0], "v");
    }

    #[test]
    fn atomic_write_leaves_no_partial() {
        let dir = std::env::temp_dir().join(format!("fading-ic-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("t.csv");
        let m = write_with_manifest(&out, b"a\n1\n", &header()).unwrap();
        assert!(out.exists() && manifest_path(&out).exists());
        assert!(!partial_path(&out).exists());
        assert_eq!(m.outputs[0].sha256.len(), 64);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
