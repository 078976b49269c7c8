//! On-disk formats.
//!
//! * datasets: CSV with a `v0,v1,…` header, one row per unit;
//! * dense matrices (Σ, β): headerless CSV;
//! * graphs: one edge per line, `u v ->`, `u v --`, or `u v <weight>` for a
//!   weighted DAG; `#` starts a comment;
//! * block partitions: a JSON array of block sizes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use depdag_core::graphs::{Cpdag, WeightedDag};
use depdag_core::synth::{BinaryDataset, BlockPartition};
use depdag_core::Matrix;

fn reader(path: &Path, has_headers: bool) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))
}

fn read_rows(path: &Path, has_headers: bool) -> Result<Vec<Vec<f64>>> {
    let mut rdr = reader(path, has_headers)?;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}: bad number in record {}", path.display(), line + 1))?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                bail!("{}: record {} has {} fields, expected {first}", path.display(), line + 1, row.len());
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

fn rows_to_matrix(rows: &[Vec<f64>], path: &Path) -> Result<Matrix> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n == 0 || p == 0 {
        bail!("{}: no data", path.display());
    }
    Ok(Matrix::from_fn(n, p, |i, j| rows[i][j]))
}

/// Real-valued dataset (with header).
pub fn read_dataset(path: &Path) -> Result<Matrix> {
    rows_to_matrix(&read_rows(path, true)?, path)
}

/// Binary dataset (with header); every entry must be 0 or 1.
pub fn read_binary(path: &Path) -> Result<BinaryDataset> {
    let m = read_dataset(path)?;
    let mut bits = Vec::with_capacity(m.as_slice().len());
    for &v in m.as_slice() {
        match v {
            0.0 => bits.push(0),
            1.0 => bits.push(1),
            _ => bail!("{}: expected binary entries, found {v}", path.display()),
        }
    }
    Ok(BinaryDataset::from_col_major(m.rows(), m.cols(), bits)?)
}

/// Headerless dense matrix.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    rows_to_matrix(&read_rows(path, false)?, path)
}

fn header(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("v{j}")).collect()
}

fn write_rows(path: &Path, header: Option<Vec<String>>, rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let ctx = || format!("writing {}", path.display());
    if let Some(h) = header {
        w.write_record(h).with_context(ctx)?;
    }
    for r in rows {
        w.write_record(r).with_context(ctx)?;
    }
    w.flush().with_context(ctx)
}

pub fn write_dataset(path: &Path, data: &Matrix) -> Result<()> {
    let rows = (0..data.rows()).map(|i| data.row(i).iter().map(f64::to_string).collect());
    write_rows(path, Some(header(data.cols())), rows)
}

pub fn write_binary(path: &Path, data: &BinaryDataset) -> Result<()> {
    let rows = (0..data.n()).map(|i| (0..data.p()).map(|j| data.get(i, j).to_string()).collect());
    write_rows(path, Some(header(data.p())), rows)
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let rows = (0..m.rows()).map(|i| m.row(i).iter().map(f64::to_string).collect());
    write_rows(path, None, rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeMark {
    Directed,
    Undirected,
    Weighted(f64),
}

/// Parses an edge-list file into `(u, v, mark)` triples.
pub fn read_edges(path: &Path) -> Result<Vec<(usize, usize, EdgeMark)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_edges(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize, EdgeMark)>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [u, v, mark] = toks[..] else {
            bail!("line {}: expected `u v mark`, got {line:?}", k + 1);
        };
        let u: usize = u.parse().with_context(|| format!("line {}: bad node {u:?}", k + 1))?;
        let v: usize = v.parse().with_context(|| format!("line {}: bad node {v:?}", k + 1))?;
        let mark = match mark {
            "->" => EdgeMark::Directed,
            "--" => EdgeMark::Undirected,
            w => EdgeMark::Weighted(w.parse().map_err(|_| anyhow!("line {}: bad edge mark {w:?}", k + 1))?),
        };
        out.push((u, v, mark));
    }
    Ok(out)
}

/// Reads a (partially) directed graph; weights count as directed edges.
pub fn read_cpdag(path: &Path, p: usize) -> Result<Cpdag> {
    let edges = read_edges(path)?;
    let directed = edges.iter().filter(|e| e.2 != EdgeMark::Undirected).map(|&(u, v, _)| (u, v));
    let undirected = edges.iter().filter(|e| e.2 == EdgeMark::Undirected).map(|&(u, v, _)| (u, v));
    Cpdag::from_parts(p, directed, undirected).with_context(|| format!("graph in {}", path.display()))
}

/// Reads a weighted DAG; every line must carry a numeric weight.
pub fn read_weighted_dag(path: &Path, p: usize) -> Result<WeightedDag> {
    let mut weighted = Vec::new();
    for (u, v, mark) in read_edges(path)? {
        match mark {
            EdgeMark::Weighted(w) => weighted.push((u, v, w)),
            _ => bail!("{}: edge {u} {v} has no weight", path.display()),
        }
    }
    WeightedDag::from_weighted_edges(p, &weighted).with_context(|| format!("DAG in {}", path.display()))
}

pub fn format_cpdag(g: &Cpdag) -> String {
    let mut s = String::new();
    for &(u, v) in g.directed() {
        let _ = writeln!(s, "{u} {v} ->");
    }
    for &(u, v) in g.undirected() {
        let _ = writeln!(s, "{u} {v} --");
    }
    s
}

pub fn format_weighted_dag(dag: &WeightedDag) -> String {
    let mut s = String::new();
    for (u, v) in dag.edges() {
        let _ = writeln!(s, "{u} {v} {}", dag.weight(u, v));
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_blocks(path: &Path) -> Result<BlockPartition> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let sizes: Vec<usize> =
        serde_json::from_str(&text).with_context(|| format!("{}: expected a JSON array of block sizes", path.display()))?;
    Ok(BlockPartition::from_sizes(sizes)?)
}

pub fn write_blocks(path: &Path, partition: &BlockPartition) -> Result<()> {
    write_text(path, &serde_json::to_string(partition.sizes())?)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}
