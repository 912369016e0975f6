use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc::{self, Sender};
use std::thread::{self, JoinHandle};

use serde::{Deserialize, Serialize};

use super::sweep::SweepSpec;
use super::SweepRecord;
use crate::error::{Error, Result};

/// A grid point that could not be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub round: usize,
    pub hx: f64,
    pub hz: f64,
    pub error: String,
}

/// One line of `records.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LedgerEntry {
    Header(Box<SweepSpec>),
    Record(Box<SweepRecord>),
    Failure(PointFailure),
}

/// Parses a ledger. A torn final line (interrupted write) is ignored; the
/// returned offset is where valid content ends.
pub(crate) fn read_ledger(path: &Path) -> Result<(Vec<LedgerEntry>, usize)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if !line.ends_with('\n') {
            break;
        }
        let body = line.trim();
        if !body.is_empty() {
            let entry = serde_json::from_str(body)
                .map_err(|e| Error::Parse(format!("{}: line {}: {e}", path.display(), entries.len() + 1)))?;
            entries.push(entry);
        }
        offset += line.len();
    }
    Ok((entries, offset))
}

/// Final records of a ledger: the highest round seen for each grid index,
/// ordered by index.
pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let (entries, _) = read_ledger(path)?;
    Ok(latest_records(entries.iter().filter_map(|e| match e {
        LedgerEntry::Record(r) => Some(r.as_ref()),
        _ => None,
    })))
}

pub(crate) fn latest_records<'a>(records: impl Iterator<Item = &'a SweepRecord>) -> Vec<SweepRecord> {
    let mut by_index: std::collections::BTreeMap<usize, &SweepRecord> = Default::default();
    for r in records {
        match by_index.get(&r.index) {
            Some(old) if old.round >= r.round => {}
            _ => {
                by_index.insert(r.index, r);
            }
        }
    }
    by_index.into_values().cloned().collect()
}

/// Single consumer appending entries to the ledger, one JSON object per line,
/// flushed per entry so an interrupted run loses at most the line in flight.
pub(crate) struct LedgerWriter {
    tx: Sender<LedgerEntry>,
    handle: JoinHandle<Result<()>>,
}

impl LedgerWriter {
    /// Opens `path` for appending after truncating it to `keep` bytes.
    pub(crate) fn open(path: &Path, keep: usize) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        file.set_len(keep as u64).map_err(|e| Error::io(path, e))?;
        let path: PathBuf = path.to_path_buf();
        let (tx, rx) = mpsc::channel::<LedgerEntry>();
        let handle = thread::spawn(move || -> Result<()> {
            let mut file = OpenOptions::new().append(true).open(&path).map_err(|e| Error::io(&path, e))?;
            for entry in rx {
                let mut line = serde_json::to_string(&entry)?;
                line.push('\n');
                file.write_all(line.as_bytes()).map_err(|e| Error::io(&path, e))?;
                file.flush().map_err(|e| Error::io(&path, e))?;
            }
            Ok(())
        });
        Ok(Self { tx, handle })
    }

    pub(crate) fn sender(&self) -> Sender<LedgerEntry> {
        self.tx.clone()
    }

    pub(crate) fn finish(self) -> Result<()> {
        drop(self.tx);
        self.handle
            .join()
            .map_err(|_| Error::Numeric("ledger writer panicked".into()))?
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `summary.csv`: one row per record.
pub fn write_summary_csv(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "index,round,family,n,p,hx,hz,cost_kind,best_cost,df,vne,e_min,e_max,degeneracy,snapped_cost")
        .map_err(io)?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.round,
            r.family.name(),
            r.n,
            r.p,
            r.hx,
            r.hz,
            r.cost_kind.name(),
            r.best_cost,
            r.df,
            r.vne,
            r.e_min,
            r.e_max,
            r.degeneracy,
            opt(r.snapped_cost)
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// `histogram.csv`: `lo,hi,count` per bin.
pub fn write_histogram_csv(path: &Path, edges: &[f64], counts: &[usize]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "lo,hi,count").map_err(io)?;
    for (k, c) in counts.iter().enumerate() {
        writeln!(w, "{},{},{}", edges[k], edges[k + 1], c).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}
