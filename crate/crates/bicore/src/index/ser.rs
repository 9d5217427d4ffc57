//! On-disk index format. One header for every kind:
//!
//! ```text
//! "BCIX" | version u16 | kind u8 | graph checksum u64 | payload
//! ```
//!
//! All integers little-endian. The checksum is FNV-1a over the graph's
//! sorted edge list, so a loaded index refuses to serve a different graph.
//! Strength-table kinds store their table runs; the AB kind stores its two
//! degree ladders. Derived structures (block chains) are rebuilt on load.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::decomp::{DecompResult, TauRun};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::hash::fnv1a_64;
use crate::index::twod::{build_2d_index, TwoDIndex, TwoDKind};
use crate::index::{build_total_index, TotalIndex};

const MAGIC: &[u8; 4] = b"BCIX";
const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Total,
    Ab,
    Bt,
    At,
}

impl IndexKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IndexKind::Total => "total",
            IndexKind::Ab => "ab",
            IndexKind::Bt => "bt",
            IndexKind::At => "at",
        }
    }

    fn to_byte(self) -> u8 {
        match self {
            IndexKind::Total => 0,
            IndexKind::Ab => 1,
            IndexKind::Bt => 2,
            IndexKind::At => 3,
        }
    }

    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(IndexKind::Total),
            1 => Ok(IndexKind::Ab),
            2 => Ok(IndexKind::Bt),
            3 => Ok(IndexKind::At),
            other => Err(Error::Corrupt(format!("unknown index kind byte {other}"))),
        }
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(IndexKind::Total),
            "ab" => Ok(IndexKind::Ab),
            "bt" => Ok(IndexKind::Bt),
            "at" => Ok(IndexKind::At),
            other => Err(Error::Usage(format!(
                "unknown index kind '{other}' (expected total, ab, bt, or at)"
            ))),
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A built index of any kind, ready to query or save.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoredIndex {
    Total(TotalIndex),
    TwoD(TwoDIndex),
}

impl StoredIndex {
    pub fn build(g: &BipartiteGraph, kind: IndexKind) -> Self {
        match kind {
            IndexKind::Total => StoredIndex::Total(TotalIndex::build(g)),
            IndexKind::Ab => StoredIndex::TwoD(build_2d_index(g, TwoDKind::Ab)),
            IndexKind::Bt => StoredIndex::TwoD(build_2d_index(g, TwoDKind::Bt)),
            IndexKind::At => StoredIndex::TwoD(build_2d_index(g, TwoDKind::At)),
        }
    }

    pub fn kind(&self) -> IndexKind {
        match self {
            StoredIndex::Total(_) => IndexKind::Total,
            StoredIndex::TwoD(t) => match t.kind() {
                TwoDKind::Ab => IndexKind::Ab,
                TwoDKind::Bt => IndexKind::Bt,
                TwoDKind::At => IndexKind::At,
            },
        }
    }
}

/// Identifies the graph an index was built from: FNV-1a over the sorted
/// internal edge list, each endpoint as u32 little-endian.
pub fn graph_checksum(g: &BipartiteGraph) -> u64 {
    fnv1a_64(g.edges().iter().flat_map(|&(u, v)| {
        let ub = u.to_le_bytes();
        let vb = v.to_le_bytes();
        [ub[0], ub[1], ub[2], ub[3], vb[0], vb[1], vb[2], vb[3]]
    }))
}

pub fn save_index(path: &Path, idx: &StoredIndex, g: &BipartiteGraph) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    w_u16(&mut buf, VERSION);
    buf.push(idx.kind().to_byte());
    w_u64(&mut buf, graph_checksum(g));
    match idx {
        StoredIndex::Total(t) => write_table(&mut buf, t.table()),
        StoredIndex::TwoD(t) => {
            if let Some(table) = t.axis_table() {
                write_table(&mut buf, table);
            } else {
                let (upper, lower) = t.ab_tables().unwrap();
                write_ladder(&mut buf, upper);
                write_ladder(&mut buf, lower);
            }
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_index(path: &Path, g: &BipartiteGraph) -> Result<StoredIndex> {
    let bytes = std::fs::read(path)?;
    let mut r = Reader::new(&bytes);
    let magic = r.bytes(4)?;
    if magic != MAGIC {
        return Err(Error::Corrupt("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::IncompatibleIndex(format!(
            "index version {version}, this build reads {VERSION}"
        )));
    }
    let kind = IndexKind::from_byte(r.u8()?)?;
    let checksum = r.u64()?;
    let here = graph_checksum(g);
    if checksum != here {
        return Err(Error::IncompatibleIndex(format!(
            "index was built from a different graph (checksum {checksum:#018x}, graph is {here:#018x})"
        )));
    }
    let idx = match kind {
        IndexKind::Total => StoredIndex::Total(build_total_index(read_table(&mut r)?)),
        IndexKind::Bt => StoredIndex::TwoD(TwoDIndex::from_axis(TwoDKind::Bt, read_table(&mut r)?)),
        IndexKind::At => StoredIndex::TwoD(TwoDIndex::from_axis(TwoDKind::At, read_table(&mut r)?)),
        IndexKind::Ab => {
            let upper = read_ladder(&mut r)?;
            let lower = read_ladder(&mut r)?;
            StoredIndex::TwoD(TwoDIndex::from_ab(upper, lower))
        }
    };
    r.finish()?;
    Ok(idx)
}

/// Load and additionally require a specific kind.
pub fn load_index_expecting(
    path: &Path,
    g: &BipartiteGraph,
    kind: IndexKind,
) -> Result<StoredIndex> {
    let idx = load_index(path, g)?;
    if idx.kind() != kind {
        return Err(Error::IncompatibleIndex(format!(
            "expected a {kind} index, file holds {}",
            idx.kind()
        )));
    }
    Ok(idx)
}

fn write_table(buf: &mut Vec<u8>, t: &DecompResult) {
    w_u32(buf, t.runs.len() as u32);
    for per_beta in &t.runs {
        w_u32(buf, per_beta.len() as u32);
        for runs in per_beta {
            w_u32(buf, runs.len() as u32);
            for run in runs {
                w_u32(buf, run.tau);
                w_u32(buf, run.verts.len() as u32);
                for &x in &run.verts {
                    w_u32(buf, x);
                }
            }
        }
    }
}

fn read_table(r: &mut Reader) -> Result<DecompResult> {
    let alpha_max = r.u32()?;
    let mut runs = Vec::with_capacity(cap(alpha_max));
    let mut beta_max_of = Vec::with_capacity(cap(alpha_max));
    for _ in 0..alpha_max {
        let beta_max = r.u32()?;
        beta_max_of.push(beta_max);
        let mut per_beta = Vec::with_capacity(cap(beta_max));
        for _ in 0..beta_max {
            let n_runs = r.u32()?;
            let mut rs = Vec::with_capacity(cap(n_runs));
            for _ in 0..n_runs {
                let tau = r.u32()?;
                let n = r.u32()?;
                let mut verts = Vec::with_capacity(cap(n));
                for _ in 0..n {
                    verts.push(r.u32()?);
                }
                rs.push(TauRun { tau, verts });
            }
            per_beta.push(rs);
        }
        runs.push(per_beta);
    }
    Ok(DecompResult {
        alpha_max,
        beta_max_of,
        runs,
    })
}

fn write_ladder(buf: &mut Vec<u8>, rows: &[Vec<Vec<u32>>]) {
    w_u32(buf, rows.len() as u32);
    for row in rows {
        w_u32(buf, row.len() as u32);
        for cell in row {
            w_u32(buf, cell.len() as u32);
            for &x in cell {
                w_u32(buf, x);
            }
        }
    }
}

fn read_ladder(r: &mut Reader) -> Result<Vec<Vec<Vec<u32>>>> {
    let n_rows = r.u32()?;
    let mut rows = Vec::with_capacity(cap(n_rows));
    for _ in 0..n_rows {
        let n_cells = r.u32()?;
        let mut row = Vec::with_capacity(cap(n_cells));
        for _ in 0..n_cells {
            let n = r.u32()?;
            let mut cell = Vec::with_capacity(cap(n));
            for _ in 0..n {
                cell.push(r.u32()?);
            }
            row.push(cell);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Pre-allocation clamp so a corrupt length field cannot ask for gigabytes;
/// the element reads themselves fail fast on truncated input.
fn cap(n: u32) -> usize {
    n.min(1 << 16) as usize
}

pub(crate) fn w_u16(buf: &mut Vec<u8>, x: u16) {
    buf.extend_from_slice(&x.to_le_bytes());
}

pub(crate) fn w_u32(buf: &mut Vec<u8>, x: u32) {
    buf.extend_from_slice(&x.to_le_bytes());
}

pub(crate) fn w_u64(buf: &mut Vec<u8>, x: u64) {
    buf.extend_from_slice(&x.to_le_bytes());
}

pub(crate) fn w_f64(buf: &mut Vec<u8>, x: f64) {
    buf.extend_from_slice(&x.to_le_bytes());
}

pub(crate) struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(b: &'a [u8]) -> Self {
        Self { b, pos: 0 }
    }

    pub(crate) fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.b.len() {
            return Err(Error::Corrupt("unexpected end of file".into()));
        }
        let s = &self.b[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes(2)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.b.len() {
            return Err(Error::Corrupt(format!(
                "{} trailing bytes after payload",
                self.b.len() - self.pos
            )));
        }
        Ok(())
    }
}
