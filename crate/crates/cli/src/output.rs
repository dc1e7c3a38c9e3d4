//! Tables, reports and provenance sidecars.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A rectangular result. Missing cells are `None`: empty in CSV, `null` in JSON.
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(|v| format!("{v:?}")).unwrap_or_default())
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert(name.clone(), cell.map(Value::from).unwrap_or(Value::Null));
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Destination of a command's main output.
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn new(out: Option<&Path>) -> Self {
        match out {
            Some(p) if p != Path::new("-") => Sink::File(p.to_path_buf()),
            _ => Sink::Stdout,
        }
    }

    fn open(&self) -> io::Result<Box<dyn Write>> {
        Ok(match self {
            Sink::Stdout => Box::new(BufWriter::new(io::stdout().lock())),
            Sink::File(p) => Box::new(BufWriter::new(File::create(p)?)),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            Sink::Stdout => None,
            Sink::File(p) => Some(p),
        }
    }

    pub fn write_with(&self, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
        let mut w = self.open()?;
        f(&mut w)?;
        w.flush()
    }

    pub fn write_table(&self, table: &Table, format: Format) -> io::Result<()> {
        self.write_with(|w| match format {
            Format::Csv => table.write_csv(w),
            Format::Json => write_json(w, &table.to_json()),
        })
    }

    pub fn write_report<T: Serialize>(&self, report: &T) -> io::Result<()> {
        self.write_with(|w| write_json(w, report))
    }
}

fn write_json<W: Write + ?Sized, T: Serialize + ?Sized>(w: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)
}

/// `<out>.config.json` next to `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

pub fn write_sidecar<T: Serialize>(out: &Path, config: &T) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(sidecar_path(out))?);
    write_json(&mut w, config)?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_round_trip_floats_and_empty_cells() {
        let mut t = Table::new(["x", "y"]);
        t.push(vec![Some(0.1), None]);
        t.push(vec![Some(1.0), Some(1.0 / 3.0)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "x,y\n0.1,\n1.0,0.3333333333333333\n");
        let back: f64 = s.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn json_rows_are_objects() {
        let mut t = Table::new(["x", "k"]);
        t.push(vec![Some(0.5), None]);
        assert_eq!(t.to_json().to_string(), r#"[{"k":null,"x":0.5}]"#);
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(sidecar_path(Path::new("out/s.csv")), PathBuf::from("out/s.csv.config.json"));
    }
}
