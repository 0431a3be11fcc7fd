use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const CSV_HEADER: [&str; 7] = ["study", "d", "n", "h", "replicate", "statistic", "value"];

/// One line of the long-format results table. Empty `n`, `h` or
/// `replicate` fields mean the value is not specific to one of them.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub study: &'static str,
    pub d: usize,
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub replicate: Option<usize>,
    pub statistic: String,
    pub value: f64,
}

impl CsvRow {
    pub fn new(study: &'static str, d: usize, statistic: impl Into<String>, value: f64) -> Self {
        CsvRow { study, d, n: None, h: None, replicate: None, statistic: statistic.into(), value }
    }

    pub fn at(mut self, n: usize, h: f64) -> Self {
        self.n = Some(n);
        self.h = Some(h);
        self
    }

    pub fn replicate(mut self, r: usize) -> Self {
        self.replicate = Some(r);
        self
    }

    fn fields(&self) -> [String; 7] {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        [
            self.study.to_string(),
            self.d.to_string(),
            opt(&self.n),
            opt(&self.h),
            opt(&self.replicate),
            self.statistic.clone(),
            self.value.to_string(),
        ]
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for row in rows {
        w.write_record(row.fields()).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}

/// Writes the table and the JSON summary, creating parent directories.
pub fn write_outputs<S: Serialize>(csv_path: Option<&Path>, json_path: Option<&Path>, rows: &[CsvRow], summary: &S) -> Result<()> {
    if let Some(path) = csv_path {
        ensure_parent(path)?;
        let file = std::fs::File::create(path)?;
        write_csv(std::io::BufWriter::new(file), rows)?;
    }
    if let Some(path) = json_path {
        ensure_parent(path)?;
        let mut text = serde_json::to_string_pretty(summary)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(())
}

/// `base.csv` and `base.json`; a `.csv` or `.json` extension on `base` is replaced.
pub fn output_pair(base: &Path) -> (PathBuf, PathBuf) {
    let stem = match base.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("json") => base.with_extension(""),
        _ => base.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    (with("csv"), with("json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![
            CsvRow::new("rates", 1, "sup", 0.25).at(512, 0.125).replicate(3),
            CsvRow::new("rates", 1, "slope", -0.5),
        ];
        let text = csv_string(&rows).unwrap();
        assert_eq!(text, "study,d,n,h,replicate,statistic,value\nrates,1,512,0.125,3,sup,0.25\nrates,1,,,,slope,-0.5\n");
    }

    #[test]
    fn output_paths() {
        let (c, j) = output_pair(Path::new("out/report"));
        assert_eq!((c.to_str().unwrap(), j.to_str().unwrap()), ("out/report.csv", "out/report.json"));
        let (c, j) = output_pair(Path::new("r.v2.csv"));
        assert_eq!((c.to_str().unwrap(), j.to_str().unwrap()), ("r.v2.csv", "r.v2.json"));
    }
}
