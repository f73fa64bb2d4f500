//! Batch-wise shuffling.
//!
//! Destroying the information in a feature without changing its marginal
//! distribution: rows of each shuffle unit are permuted independently within
//! the mini-batch, so every column keeps its exact multiset of values while
//! losing its alignment with the labels. Permutations come from drawing one
//! uniform key per row and argsorting, which costs `O(u * B log B)` for `u`
//! units and batch size `B` and is fully determined by the generator state.

use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShuffleKind {
    /// All columns of a field move together under one permutation per field.
    PerFieldRows,
    /// Column groups of `chunk` adjacent columns move independently, never
    /// straddling a field boundary.
    PerColumnRows,
}

/// What moves together when a batch is shuffled.
#[derive(Debug, Clone)]
pub struct ShuffleUnit {
    pub kind: ShuffleKind,
    /// Column span of each field over the full width; spans must be
    /// non-empty, contiguous, and start at column 0.
    pub column_ranges: Vec<Range<usize>>,
    /// Column-group width for [`ShuffleKind::PerColumnRows`].
    pub chunk: usize,
}

impl ShuffleUnit {
    pub fn per_field(column_ranges: Vec<Range<usize>>) -> Result<Self> {
        let unit = ShuffleUnit { kind: ShuffleKind::PerFieldRows, column_ranges, chunk: 1 };
        unit.validate()?;
        Ok(unit)
    }

    pub fn per_column(column_ranges: Vec<Range<usize>>, chunk: usize) -> Result<Self> {
        let unit = ShuffleUnit { kind: ShuffleKind::PerColumnRows, column_ranges, chunk };
        unit.validate()?;
        Ok(unit)
    }

    fn validate(&self) -> Result<()> {
        if self.column_ranges.is_empty() {
            return Err(Error::Contract("shuffle unit needs at least one field range".into()));
        }
        let mut expect = 0usize;
        for r in &self.column_ranges {
            if r.start != expect || r.is_empty() {
                return Err(Error::Contract(format!(
                    "field ranges must tile the width contiguously; got {:?}",
                    self.column_ranges
                )));
            }
            expect = r.end;
        }
        if self.kind == ShuffleKind::PerColumnRows {
            if self.chunk == 0 {
                return Err(Error::Contract("chunk must be positive".into()));
            }
            for r in &self.column_ranges {
                if r.len() % self.chunk != 0 {
                    return Err(Error::Contract(format!(
                        "chunk {} does not divide field width {}",
                        self.chunk,
                        r.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total column count covered by the unit description.
    pub fn width(&self) -> usize {
        self.column_ranges.last().map(|r| r.end).unwrap_or(0)
    }

    /// Concrete column spans that each receive an independent permutation.
    pub fn unit_spans(&self) -> Vec<Range<usize>> {
        match self.kind {
            ShuffleKind::PerFieldRows => self.column_ranges.clone(),
            ShuffleKind::PerColumnRows => {
                let mut spans = Vec::new();
                for r in &self.column_ranges {
                    let mut c = r.start;
                    while c < r.end {
                        spans.push(c..c + self.chunk);
                        c += self.chunk;
                    }
                }
                spans
            }
        }
    }
}

/// `count` independent permutations of `0..batch`, each obtained by drawing
/// uniform keys and argsorting them. Stable sort, so the (measure-zero) key
/// ties resolve by row index.
pub fn make_permutations(rng: &mut ChaCha8Rng, count: usize, batch: usize) -> Vec<Vec<u32>> {
    (0..count)
        .map(|_| {
            let keys: Vec<f64> = (0..batch).map(|_| rng.gen::<f64>()).collect();
            let mut order: Vec<u32> = (0..batch as u32).collect();
            order.sort_by(|&a, &b| keys[a as usize].partial_cmp(&keys[b as usize]).unwrap());
            order
        })
        .collect()
}

/// Shuffle a `batch x width` row-major matrix: each unit span gets its own
/// permutation, applied as `out[r] = in[perm[r]]` over that span's columns.
///
/// The result is plain data with no gradient history; callers that mix it
/// into a differentiable graph re-register it as a constant.
pub fn batch_shuffle<S: Real>(
    data: &[S],
    batch: usize,
    unit: &ShuffleUnit,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<S>> {
    let width = unit.width();
    if data.len() != batch * width {
        return Err(Error::Dimension(format!(
            "batch_shuffle: {} values against batch {} x width {}",
            data.len(),
            batch,
            width
        )));
    }
    let spans = unit.unit_spans();
    let perms = make_permutations(rng, spans.len(), batch);
    let mut out = data.to_vec();
    for (span, perm) in spans.iter().zip(&perms) {
        for (r, &src) in perm.iter().enumerate() {
            let src = src as usize;
            out[r * width + span.start..r * width + span.end]
                .copy_from_slice(&data[src * width + span.start..src * width + span.end]);
        }
    }
    Ok(out)
}

/// Permute one column of a `rows x cols` integer matrix, leaving the rest
/// untouched. Used at field granularity, where shuffling happens on raw
/// category indices before the embedding lookup.
pub fn shuffle_indices(
    x: &[u32],
    rows: usize,
    cols: usize,
    field: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u32>> {
    if x.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "shuffle_indices: {} values against {} x {}",
            x.len(),
            rows,
            cols
        )));
    }
    if field >= cols {
        return Err(Error::Contract(format!("field {} out of {} columns", field, cols)));
    }
    let perm = make_permutations(rng, 1, rows).pop().unwrap();
    let mut out = x.to_vec();
    for (r, &src) in perm.iter().enumerate() {
        out[r * cols + field] = x[src as usize * cols + field];
    }
    Ok(out)
}
