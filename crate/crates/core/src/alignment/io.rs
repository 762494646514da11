use std::path::Path;

use super::AlignError;
use crate::corpus_io::Corpus;

fn io_err(path: &Path, e: impl std::fmt::Display) -> AlignError {
    AlignError::Io(format!("{}: {e}", path.display()))
}

/// `record_id,omega` rows in corpus order.
pub fn write_weights_csv(
    path: impl AsRef<Path>,
    corpus: &Corpus,
    weights: &[f64],
) -> Result<(), AlignError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["record_id", "omega"])
        .map_err(|e| io_err(path, e))?;
    for (r, omega) in corpus.records().iter().zip(weights) {
        w.write_record([r.id.as_str(), &format!("{omega:e}")])
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads weights back, checking that the ids follow corpus order.
pub fn read_weights_csv(path: impl AsRef<Path>, corpus: &Corpus) -> Result<Vec<f64>, AlignError> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::with_capacity(corpus.len());
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| io_err(path, e))?;
        let expected = corpus
            .get(i)
            .ok_or_else(|| io_err(path, "more weights than records"))?;
        if &row[0] != expected.id.as_str() {
            return Err(io_err(
                path,
                format!("row {i} is `{}`, corpus has `{}`", &row[0], expected.id),
            ));
        }
        out.push(row[1].parse::<f64>().map_err(|e| io_err(path, e))?);
    }
    if out.len() != corpus.len() {
        return Err(AlignError::DimensionMismatch {
            what: "weights file",
            expected: corpus.len(),
            found: out.len(),
        });
    }
    Ok(out)
}

/// `iter,loss` rows.
pub fn write_loss_csv(path: impl AsRef<Path>, trace: &[f64]) -> Result<(), AlignError> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["iter", "loss"]).map_err(|e| io_err(path, e))?;
    for (i, l) in trace.iter().enumerate() {
        w.write_record([i.to_string(), format!("{l:e}")])
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
