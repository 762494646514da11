use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DemonstrationBatch, SamplerError};
use crate::corpus_io::Corpus;

/// On-disk form of a batch: ids instead of row indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub round: usize,
    pub anchor_id: String,
    pub member_ids: Vec<String>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> SamplerError {
    SamplerError::Io(format!("{}: {e}", path.display()))
}

pub fn write_batches(
    path: impl AsRef<Path>,
    batches: &[DemonstrationBatch],
    corpus: &Corpus,
) -> Result<(), SamplerError> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    for b in batches {
        let id = |i: usize| corpus.records()[i].id.clone();
        let rec = BatchRecord {
            round: b.round,
            anchor_id: id(b.anchor),
            member_ids: b.members.iter().map(|&m| id(m)).collect(),
        };
        let line = serde_json::to_string(&rec).map_err(|e| io_err(path, e))?;
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a batch file and resolves ids against `corpus`.
pub fn read_batches(
    path: impl AsRef<Path>,
    corpus: &Corpus,
) -> Result<Vec<DemonstrationBatch>, SamplerError> {
    let path = path.as_ref();
    let index: std::collections::HashMap<&str, usize> = corpus
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();
    let resolve = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| SamplerError::InvalidBatch(format!("unknown record id `{id}`")))
    };
    let reader = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: BatchRecord =
            serde_json::from_str(&line).map_err(|e| io_err(path, format!("line {}: {e}", n + 1)))?;
        let members = rec
            .member_ids
            .iter()
            .map(|id| resolve(id))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(DemonstrationBatch {
            anchor: resolve(&rec.anchor_id)?,
            members,
            round: rec.round,
        });
    }
    Ok(out)
}

/// Writes `round,index,id,variance` rows, one block per snapshot.
pub fn write_variance_csv(
    path: impl AsRef<Path>,
    snapshots: &[(usize, Vec<f64>)],
    corpus: &Corpus,
) -> Result<(), SamplerError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["round", "index", "id", "variance"])
        .map_err(|e| io_err(path, e))?;
    for (round, variance) in snapshots {
        for (i, v) in variance.iter().enumerate() {
            w.write_record([
                round.to_string(),
                i.to_string(),
                corpus.records()[i].id.clone(),
                format!("{v:e}"),
            ])
            .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::TextRecord;

    #[test]
    fn batches_round_trip_through_ids() {
        let corpus = Corpus::new(
            (0..4)
                .map(|i| TextRecord::new(format!("id{i}"), "t", "p"))
                .collect(),
            None,
        )
        .unwrap();
        let batches = vec![
            DemonstrationBatch {
                anchor: 2,
                members: vec![2, 3],
                round: 0,
            },
            DemonstrationBatch {
                anchor: 0,
                members: vec![0, 1],
                round: 1,
            },
        ];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_batches(f.path(), &batches, &corpus).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert!(text.starts_with(r#"{"round":0,"anchor_id":"id2","member_ids":["id2","id3"]}"#));
        assert_eq!(read_batches(f.path(), &corpus).unwrap(), batches);
    }
}
