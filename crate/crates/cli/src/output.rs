//! Artifacts on disk: JSON lines, CSV, two-column plot data.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{RunConfig, VERSION};

pub struct Artifacts {
    dir: PathBuf,
    stem: String,
    hash: String,
    json: bool,
    csv: bool,
    plot: bool,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(cfg: &RunConfig) -> io::Result<Self> {
        fs::create_dir_all(&cfg.output_dir)?;
        let hash = cfg.hash();
        Ok(Self {
            dir: cfg.output_dir.clone(),
            stem: format!("{}-{hash}", cfg.command.name()),
            hash,
            json: cfg.json,
            csv: cfg.csv,
            plot: cfg.plot,
            written: Vec::new(),
        })
    }

    fn path(&mut self, suffix: &str) -> PathBuf {
        let p = self.dir.join(format!("{}{suffix}", self.stem));
        self.written.push(p.clone());
        p
    }

    /// Each record on its own line, tagged with version and config hash.
    pub fn json_records<T: Serialize>(&mut self, records: &[T]) -> io::Result<()> {
        if !self.json {
            return Ok(());
        }
        let mut out = BufWriter::new(File::create(self.path(".jsonl"))?);
        for r in records {
            let mut m = Map::new();
            m.insert("version".into(), Value::from(VERSION));
            m.insert("config_hash".into(), Value::from(self.hash.clone()));
            match serde_json::to_value(r).map_err(io::Error::other)? {
                Value::Object(fields) => m.extend(fields),
                other => {
                    m.insert("value".into(), other);
                }
            }
            serde_json::to_writer(&mut out, &m).map_err(io::Error::other)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn csv_rows<T: Serialize>(&mut self, suffix: &str, rows: &[T]) -> io::Result<()> {
        if !self.csv {
            return Ok(());
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(self.path(suffix))?;
        for r in rows {
            w.serialize(r).map_err(io::Error::other)?;
        }
        w.flush()
    }

    pub fn xy(&mut self, suffix: &str, header: (&str, &str), xs: &[f64], ys: &[f64]) -> io::Result<()> {
        if !self.plot {
            return Ok(());
        }
        let mut out = BufWriter::new(File::create(self.path(suffix))?);
        writeln!(out, "# {} {}", header.0, header.1)?;
        for (x, y) in xs.iter().zip(ys) {
            writeln!(out, "{x:.17e} {y:.17e}")?;
        }
        out.flush()
    }
}
