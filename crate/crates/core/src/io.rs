//! Delimited-text artifacts. Every file has a header row; grid indices are
//! 1-based; reals are written in shortest round-trip form.
//!
//! | file          | columns                                        |
//! |---------------|------------------------------------------------|
//! | coefficients  | `a1,...,ad,coeff` (basis order)                |
//! | samples       | `i1,...,id,value`                              |
//! | plan          | `i1,...,id`                                    |
//! | history       | `iter,cost,eps_tensor,eps_gpc,eps_cost`        |
//! | histogram     | `left,right,density`                           |

use std::io::{Read, Write};

use crate::cptensor::TensorIndex;
use crate::error::{Error, Result};
use crate::gpc::{BasisSet, GpcExpansion, Histogram, MultiIndex};
use crate::recovery::{ConvergenceRecord, IterationRecord};
use crate::sampling::SampleData;

use std::sync::Arc;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn parse_f64(field: &str, line: u64) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: {field:?} is not a number")))
}

fn parse_usize(field: &str, line: u64) -> Result<usize> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: {field:?} is not a count")))
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn numbered(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (1..=d).map(move |k| format!("{prefix}{k}"))
}

pub fn write_coefficients<W: Write>(w: W, expansion: &GpcExpansion) -> Result<()> {
    let basis = expansion.basis();
    let mut out = writer(w);
    out.write_record(numbered("a", basis.dim()).chain(["coeff".to_string()]))?;
    for (alpha, c) in basis.indices().iter().zip(expansion.coeffs()) {
        out.write_record(
            alpha
                .to_dense()
                .iter()
                .map(|a| a.to_string())
                .chain([c.to_string()]),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Raw rows of a coefficient file: dense multi-indices and values.
pub fn read_coefficient_rows<R: Read>(r: R) -> Result<(Vec<MultiIndex>, Vec<f64>)> {
    let mut rd = reader(r);
    let width = rd.headers()?.len();
    if width < 2 {
        return Err(Error::Format(
            "coefficient file needs at least 2 columns".into(),
        ));
    }
    let (mut indices, mut values) = (Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != width {
            return Err(Error::Format(format!(
                "line {line}: expected {width} fields"
            )));
        }
        let alpha = rec
            .iter()
            .take(width - 1)
            .map(|f| parse_usize(f, line))
            .collect::<Result<Vec<_>>>()?;
        indices.push(MultiIndex::from_dense(&alpha));
        values.push(parse_f64(&rec[width - 1], line)?);
    }
    Ok((indices, values))
}

/// Reads an expansion and checks its rows against the basis order.
pub fn read_coefficients<R: Read>(r: R, basis: &Arc<BasisSet>) -> Result<GpcExpansion> {
    let (indices, values) = read_coefficient_rows(r)?;
    if indices.len() != basis.len() {
        return Err(Error::Format(format!(
            "{} coefficients, but d={} p={} has {} basis functions",
            indices.len(),
            basis.dim(),
            basis.order(),
            basis.len()
        )));
    }
    for (row, (got, want)) in indices.iter().zip(basis.indices()).enumerate() {
        if got.dim() != basis.dim() || got != want {
            return Err(Error::Format(format!(
                "row {} has index {:?}, expected {:?}",
                row + 1,
                got.to_dense(),
                want.to_dense()
            )));
        }
    }
    GpcExpansion::new(basis.clone(), values)
}

pub fn write_samples<W: Write>(w: W, d: usize, samples: &SampleData) -> Result<()> {
    let mut out = writer(w);
    out.write_record(numbered("i", d).chain(["value".to_string()]))?;
    for (idx, v) in samples.iter() {
        out.write_record(
            idx.one_based()
                .iter()
                .map(|c| c.to_string())
                .chain([v.to_string()]),
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(r: R, d: usize, n: usize) -> Result<SampleData> {
    let rows = read_index_rows(r, d, n, true)?;
    let (indices, values) = rows.into_iter().map(|(i, v)| (i, v.unwrap_or(0.0))).unzip();
    SampleData::new(indices, values)
}

pub fn write_plan<W: Write>(w: W, d: usize, indices: &[TensorIndex]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(numbered("i", d))?;
    for idx in indices {
        out.write_record(idx.one_based().iter().map(|c| c.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_plan<R: Read>(r: R, d: usize, n: usize) -> Result<Vec<TensorIndex>> {
    Ok(read_index_rows(r, d, n, false)?
        .into_iter()
        .map(|(i, _)| i)
        .collect())
}

fn read_index_rows<R: Read>(
    r: R,
    d: usize,
    n: usize,
    with_value: bool,
) -> Result<Vec<(TensorIndex, Option<f64>)>> {
    let mut rd = reader(r);
    let width = d + usize::from(with_value);
    let header = rd.headers()?.len();
    if header != width {
        return Err(Error::Format(format!(
            "expected {width} columns for d={d}, found {header}"
        )));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let comps = rec
            .iter()
            .take(d)
            .map(|f| parse_usize(f, line))
            .collect::<Result<Vec<_>>>()?;
        let idx = TensorIndex::from_one_based(&comps, n)
            .map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        let value = if with_value {
            Some(parse_f64(&rec[d], line)?)
        } else {
            None
        };
        out.push((idx, value));
    }
    Ok(out)
}

/// Row 0 holds the initial cost with infinite change metrics.
pub fn write_history<W: Write>(w: W, history: &ConvergenceRecord) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["iter", "cost", "eps_tensor", "eps_gpc", "eps_cost"])?;
    let inf = f64::INFINITY.to_string();
    out.write_record([
        "0".to_string(),
        history.initial_cost.to_string(),
        inf.clone(),
        inf.clone(),
        inf,
    ])?;
    for row in &history.rows {
        out.write_record([
            row.iteration.to_string(),
            row.cost.to_string(),
            row.eps_tensor.to_string(),
            row.eps_gpc.to_string(),
            row.eps_cost.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Inner iteration counts are not stored and come back empty.
pub fn read_history<R: Read>(r: R) -> Result<ConvergenceRecord> {
    let mut rd = reader(r);
    let mut record = ConvergenceRecord::default();
    let mut first = true;
    for rec in rd.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != 5 {
            return Err(Error::Format(format!("line {line}: expected 5 fields")));
        }
        let iteration = parse_usize(&rec[0], line)?;
        let cost = parse_f64(&rec[1], line)?;
        if first {
            if iteration != 0 {
                return Err(Error::Format("history must start at iteration 0".into()));
            }
            record.initial_cost = cost;
            first = false;
            continue;
        }
        record.rows.push(IterationRecord {
            iteration,
            cost,
            eps_tensor: parse_f64(&rec[2], line)?,
            eps_gpc: parse_f64(&rec[3], line)?,
            eps_cost: parse_f64(&rec[4], line)?,
            inner_iterations: Vec::new(),
        });
    }
    Ok(record)
}

pub fn write_histogram<W: Write>(w: W, h: &Histogram) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["left", "right", "density"])?;
    for (e, p) in h.edges.windows(2).zip(&h.density) {
        out.write_record([e[0].to_string(), e[1].to_string(), p.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_histogram<R: Read>(r: R) -> Result<Histogram> {
    let mut rd = reader(r);
    let mut edges = Vec::new();
    let mut density = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != 3 {
            return Err(Error::Format(format!("line {line}: expected 3 fields")));
        }
        let (left, right) = (parse_f64(&rec[0], line)?, parse_f64(&rec[1], line)?);
        match edges.last() {
            None => edges.push(left),
            Some(prev) if *prev != left => {
                return Err(Error::Format(format!(
                    "line {line}: bins are not contiguous"
                )))
            }
            _ => {}
        }
        edges.push(right);
        density.push(parse_f64(&rec[2], line)?);
    }
    if density.is_empty() {
        return Err(Error::Format("empty histogram".into()));
    }
    Ok(Histogram { edges, density })
}
