//! Run directories and the files inside them.
//!
//! A run is assembled in a hidden sibling directory and renamed into place
//! once complete, so a directory under its final name is always whole.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use stigmergy::photormone::GridSnapshot;

pub struct RunDir {
    target: PathBuf,
    staging: PathBuf,
}

impl RunDir {
    pub fn create(target: &Path) -> Result<RunDir> {
        let parent = target.parent().unwrap_or(Path::new("."));
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        let leaf = target.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        let staging = parent.join(format!(".{leaf}.partial-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging).with_context(|| format!("creating {}", staging.display()))?;
        Ok(RunDir { target: target.to_path_buf(), staging })
    }

    pub fn path(&self) -> &Path {
        &self.staging
    }

    pub fn write(&self, rel: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.prepare(rel)?;
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    pub fn writer(&self, rel: &str) -> Result<BufWriter<fs::File>> {
        let path = self.prepare(rel)?;
        let f = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        Ok(BufWriter::new(f))
    }

    pub fn write_snapshot(&self, rel: &str, snap: &GridSnapshot) -> Result<()> {
        let mut w = self.writer(rel)?;
        snap.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn prepare(&self, rel: &str) -> Result<PathBuf> {
        let path = self.staging.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        Ok(path)
    }

    /// Move the finished run to its final name, replacing any older run.
    pub fn commit(self) -> Result<PathBuf> {
        if self.target.exists() {
            fs::remove_dir_all(&self.target).with_context(|| format!("replacing {}", self.target.display()))?;
        }
        fs::rename(&self.staging, &self.target).with_context(|| format!("finalising {}", self.target.display()))?;
        Ok(self.target.clone())
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        // only a run that never reached commit still has its staging area
        let _ = fs::remove_dir_all(&self.staging);
    }
}

/// Scalar results of a run, written as `key=value` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub values: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
}

impl Summary {
    pub fn new() -> Self {
        Summary::default()
    }

    pub fn num(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn label(&mut self, key: impl Into<String>, v: impl ToString) -> &mut Self {
        self.labels.insert(key.into(), v.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.labels {
            out.push_str(&format!("{k}={v}\n"));
        }
        for (k, v) in &self.values {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    /// Inverse of [`Summary::render`]: numbers go to `values`, the rest to
    /// `labels`.
    pub fn parse(text: &str) -> Summary {
        let mut s = Summary::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                match v.parse::<f64>() {
                    Ok(x) => {
                        s.values.insert(k.to_string(), x);
                    }
                    Err(_) => {
                        s.labels.insert(k.to_string(), v.to_string());
                    }
                }
            }
        }
        s
    }
}

pub fn points_csv(points: &[stigmergy::geom::Vec2]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    out
}
