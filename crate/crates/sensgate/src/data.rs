//! Datasets: synthetic generation with known field roles, strict CSV
//! ingestion, deterministic splitting and batching.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::backbone::{FieldSchema, FieldSpec};
use crate::error::{Error, Result};
use crate::seeds;

/// Embedding width given to schemas built from raw datasets; runs override
/// it through [`Dataset::schema_with_dim`].
pub const DEFAULT_EMBED_DIM: usize = 8;

/// Ground-truth relationship between a synthetic field and the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRole {
    /// Carries an additive per-category effect on the label logit.
    Informative,
    /// A fixed bijective recoding of field `of`; same information, new ids.
    Redundant { of: usize },
    /// Sampled independently of the label.
    Noise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// An in-memory categorical dataset, immutable once built.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    /// Row-major `N x F` category ids.
    pub x: Vec<u32>,
    pub y: Vec<u8>,
    pub schema: FieldSchema,
    pub roles: Option<Vec<FieldRole>>,
    pub splits: Option<Splits>,
}

/// Recipe for a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_informative: usize,
    pub n_redundant: usize,
    pub n_noise: usize,
    pub vocab: usize,
    /// Standard deviation of the per-category logit effects.
    pub effect_scale: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_informative: 5,
            n_redundant: 2,
            n_noise: 5,
            vocab: 100,
            effect_scale: 1.0,
            n_samples: 200_000,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_informative == 0 {
            return Err(Error::Config("need at least one informative field".into()));
        }
        if self.vocab < 2 {
            return Err(Error::Config("vocabulary size must be at least 2".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        if !self.effect_scale.is_finite() || self.effect_scale < 0.0 {
            return Err(Error::Config("effect_scale must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn n_fields(&self) -> usize {
        self.n_informative + self.n_redundant + self.n_noise
    }
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_fields(&self) -> usize {
        self.schema.n_fields()
    }

    /// The stored schema with every embedding width replaced by `dim`.
    pub fn schema_with_dim(&self, dim: usize) -> Result<FieldSchema> {
        FieldSchema::new(
            self.schema
                .fields
                .iter()
                .map(|f| FieldSpec { dim, ..f.clone() })
                .collect(),
        )
    }

    /// Gather rows by index into a dense `(x, y)` pair.
    pub fn gather(&self, indices: &[usize]) -> (Vec<u32>, Vec<u8>) {
        let f = self.n_fields();
        let mut x = Vec::with_capacity(indices.len() * f);
        let mut y = Vec::with_capacity(indices.len());
        for &i in indices {
            x.extend_from_slice(&self.x[i * f..(i + 1) * f]);
            y.push(self.y[i]);
        }
        (x, y)
    }

    pub fn split_indices(&self, split: Split) -> Result<&[usize]> {
        let splits = self
            .splits
            .as_ref()
            .ok_or_else(|| Error::State("dataset has no split assignment".into()))?;
        Ok(match split {
            Split::Train => &splits.train,
            Split::Val => &splits.val,
            Split::Test => &splits.test,
        })
    }

    /// Assign an 8:1:1 train/validation/test split by seeded shuffle and
    /// contiguous cuts at 80% and 90%.
    pub fn split(&mut self, seed: u64) -> Result<()> {
        let n = self.n_rows();
        if n < 10 {
            return Err(Error::Config(format!("split needs at least 10 rows, got {n}")));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = seeds::rng(seed, seeds::SPLIT, 0);
        shuffle_in_place(&mut idx, &mut rng);
        let a = n * 8 / 10;
        let b = n * 9 / 10;
        self.splits = Some(Splits {
            train: idx[..a].to_vec(),
            val: idx[a..b].to_vec(),
            test: idx[b..].to_vec(),
        });
        Ok(())
    }

    /// Seeded minibatches over one split. Each epoch reshuffles; the last
    /// partial batch is kept.
    pub fn batches(
        &self,
        split: Split,
        batch_size: usize,
        seed: u64,
        epoch: u64,
    ) -> Result<BatchIter<'_>> {
        if batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        let mut order = self.split_indices(split)?.to_vec();
        let mut rng = seeds::rng(seed, seeds::BATCH, epoch);
        shuffle_in_place(&mut order, &mut rng);
        Ok(BatchIter { ds: self, order, batch_size, cursor: 0 })
    }

    /// Replace ids outside a field's vocabulary with id 0. Applied when a
    /// model evaluates rows whose categories it never saw.
    pub fn clamp_to_vocab(x: &mut [u32], schema: &FieldSchema) {
        let f = schema.n_fields();
        for row in x.chunks_mut(f) {
            for (v, spec) in row.iter_mut().zip(&schema.fields) {
                if *v as usize >= spec.vocab {
                    *v = 0;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

pub struct BatchIter<'a> {
    ds: &'a Dataset,
    order: Vec<usize>,
    batch_size: usize,
    cursor: usize,
}

impl Iterator for BatchIter<'_> {
    type Item = (Vec<u32>, Vec<u8>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.cursor >= self.order.len() {
            return None;
        }
        let end = (self.cursor + self.batch_size).min(self.order.len());
        let batch = self.ds.gather(&self.order[self.cursor..end]);
        self.cursor = end;
        Some(batch)
    }
}

fn shuffle_in_place(idx: &mut [usize], rng: &mut ChaCha8Rng) {
    // Fisher-Yates with f64 draws, matching the draw-then-convert pattern
    // used everywhere else so streams are precision-independent.
    for i in (1..idx.len()).rev() {
        let j = (rng.gen::<f64>() * (i + 1) as f64) as usize;
        idx.swap(i, j.min(i));
    }
}

// ── Synthetic generation ───────────────────────────────────────────────

/// Build a dataset where the label depends on the informative fields only:
/// each informative category carries an additive logit effect, redundant
/// fields recode an informative source through a random bijection, and noise
/// fields are independent draws. An intercept found by bisection centers the
/// base rate at 0.5.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = seeds::rng(spec.seed, seeds::DATA, 0);
    let n = spec.n_samples;
    let f = spec.n_fields();

    let effects: Vec<Vec<f64>> = if spec.effect_scale == 0.0 {
        vec![vec![0.0; spec.vocab]; spec.n_informative]
    } else {
        let dist = Normal::new(0.0, spec.effect_scale)
            .map_err(|e| Error::Config(format!("effect distribution: {e}")))?;
        (0..spec.n_informative)
            .map(|_| (0..spec.vocab).map(|_| dist.sample(&mut rng)).collect())
            .collect()
    };

    // One random bijection of category ids per redundant field; sources
    // cycle through the informative fields.
    let bijections: Vec<Vec<u32>> = (0..spec.n_redundant)
        .map(|_| {
            let mut map: Vec<u32> = (0..spec.vocab as u32).collect();
            let mut view: Vec<usize> = (0..spec.vocab).collect();
            shuffle_in_place(&mut view, &mut rng);
            for (slot, &v) in view.iter().enumerate() {
                map[slot] = v as u32;
            }
            map
        })
        .collect();

    let mut x = vec![0u32; n * f];
    let mut logits = vec![0.0f64; n];
    for (row, logit) in logits.iter_mut().enumerate() {
        let base = row * f;
        for k in 0..spec.n_informative {
            let c = rng.gen_range(0..spec.vocab);
            x[base + k] = c as u32;
            *logit += effects[k][c];
        }
        for r in 0..spec.n_redundant {
            let src = r % spec.n_informative;
            let col = spec.n_informative + r;
            x[base + col] = bijections[r][x[base + src] as usize];
        }
        for k in 0..spec.n_noise {
            let col = spec.n_informative + spec.n_redundant + k;
            x[base + col] = rng.gen_range(0..spec.vocab) as u32;
        }
    }

    let bias = calibrate_bias(&logits, 0.5);
    let mut y = vec![0u8; n];
    for (label, &s) in y.iter_mut().zip(&logits) {
        let p = crate::scalar::sigmoid(s + bias);
        *label = (rng.gen::<f64>() < p) as u8;
    }

    let mut names = Vec::with_capacity(f);
    let mut roles = Vec::with_capacity(f);
    for k in 0..spec.n_informative {
        names.push(format!("inf_{k}"));
        roles.push(FieldRole::Informative);
    }
    for r in 0..spec.n_redundant {
        names.push(format!("red_{r}"));
        roles.push(FieldRole::Redundant { of: r % spec.n_informative });
    }
    for k in 0..spec.n_noise {
        names.push(format!("noise_{k}"));
        roles.push(FieldRole::Noise);
    }
    let schema = FieldSchema::uniform(&names, spec.vocab, DEFAULT_EMBED_DIM)?;
    Ok(Dataset { x, y, schema, roles: Some(roles), splits: None })
}

/// Intercept `b` such that `mean(sigmoid(logit + b))` hits `target`, by
/// bisection on the (monotone) expected rate.
fn calibrate_bias(logits: &[f64], target: f64) -> f64 {
    let rate = |b: f64| -> f64 {
        logits.iter().map(|&s| crate::scalar::sigmoid(s + b)).sum::<f64>() / logits.len() as f64
    };
    let (mut lo, mut hi) = (-30.0, 30.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ── CSV ────────────────────────────────────────────────────────────────

/// Read a strict CSV: UTF-8, comma separators, one header row, no quoting
/// or escapes. Integer-coded columns keep their ids; any column with a
/// non-integer value is recoded to dense ids in first-seen order. The label
/// column must be 0/1.
pub fn load_csv(path: &Path, label_column: &str) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    let header: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
    let label_idx = header
        .iter()
        .position(|&h| h == label_column)
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("no column named {label_column:?} in header"),
        })?;
    let feat_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let f = feat_names.len();
    if f == 0 {
        return Err(Error::Parse { line: 1, msg: "no feature columns".into() });
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); f];
    let mut y = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() && i + 1 == text.lines().count() {
            break;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("{} cells, header has {}", cells.len(), header.len()),
            });
        }
        match cells[label_idx] {
            "0" => y.push(0u8),
            "1" => y.push(1u8),
            other => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("label {other:?} is not 0 or 1"),
                })
            }
        }
        let mut k = 0;
        for (ci, cell) in cells.iter().enumerate() {
            if ci == label_idx {
                continue;
            }
            raw[k].push(cell.to_string());
            k += 1;
        }
    }
    if y.is_empty() {
        return Err(Error::Parse { line: 2, msg: "no data rows".into() });
    }

    let n = y.len();
    let mut x = vec![0u32; n * f];
    let mut vocabs = vec![0usize; f];
    for (col, values) in raw.iter().enumerate() {
        let as_ints: Option<Vec<u32>> =
            values.iter().map(|v| v.parse::<u32>().ok()).collect();
        let ids = match as_ints {
            Some(ids) => ids,
            None => {
                let mut seen: HashMap<&str, u32> = HashMap::new();
                values
                    .iter()
                    .map(|v| {
                        let next = seen.len() as u32;
                        *seen.entry(v.as_str()).or_insert(next)
                    })
                    .collect()
            }
        };
        vocabs[col] = ids.iter().copied().max().unwrap() as usize + 1;
        for (row, &id) in ids.iter().enumerate() {
            x[row * f + col] = id;
        }
    }

    let schema = FieldSchema::new(
        feat_names
            .iter()
            .enumerate()
            .map(|(i, name)| FieldSpec {
                name: name.clone(),
                vocab: vocabs[i],
                dim: DEFAULT_EMBED_DIM,
                source_col: i,
            })
            .collect(),
    )?;
    Ok(Dataset { x, y, schema, roles: None, splits: None })
}

/// Write the dataset as integer-coded CSV readable by [`load_csv`].
pub fn save_csv(ds: &Dataset, path: &Path, label_column: &str) -> Result<()> {
    use std::io::Write;
    let f = ds.n_fields();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header: Vec<&str> = ds.schema.fields.iter().map(|s| s.name.as_str()).collect();
    header.push(label_column);
    writeln!(out, "{}", header.join(","))?;
    for row in 0..ds.n_rows() {
        let mut cells: Vec<String> =
            ds.x[row * f..(row + 1) * f].iter().map(u32::to_string).collect();
        cells.push(ds.y[row].to_string());
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SyntheticSpec {
        SyntheticSpec {
            n_informative: 3,
            n_redundant: 1,
            n_noise: 2,
            vocab: 20,
            effect_scale: 1.0,
            n_samples: 20_000,
            seed: 7,
        }
    }

    #[test]
    fn spec_validation_catches_degenerate_recipes() {
        let mut s = small_spec();
        s.n_informative = 0;
        assert!(matches!(generate_synthetic(&s), Err(Error::Config(_))));
        let mut s = small_spec();
        s.vocab = 1;
        assert!(matches!(generate_synthetic(&s), Err(Error::Config(_))));
        let mut s = small_spec();
        s.effect_scale = -1.0;
        assert!(matches!(generate_synthetic(&s), Err(Error::Config(_))));
    }

    #[test]
    fn labels_are_balanced_across_effect_scales() {
        for scale in [0.5, 1.0, 2.0] {
            let spec = SyntheticSpec { effect_scale: scale, ..small_spec() };
            let ds = generate_synthetic(&spec).unwrap();
            let rate = ds.y.iter().map(|&v| v as f64).sum::<f64>() / ds.n_rows() as f64;
            assert!(
                (0.45..=0.55).contains(&rate),
                "base rate {rate} at effect_scale {scale}"
            );
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = generate_synthetic(&small_spec()).unwrap();
        let b = generate_synthetic(&small_spec()).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);
        let c = generate_synthetic(&SyntheticSpec { seed: 8, ..small_spec() }).unwrap();
        assert_ne!(a.x, c.x);
    }

    /// Plug-in mutual information between a category column and the labels,
    /// in bits.
    fn mutual_information(col: impl Iterator<Item = u32>, y: &[u8], vocab: usize) -> f64 {
        let mut joint = vec![[0usize; 2]; vocab];
        for (c, &l) in col.zip(y) {
            joint[c as usize][l as usize] += 1;
        }
        let n = y.len() as f64;
        let p1 = y.iter().map(|&v| v as f64).sum::<f64>() / n;
        let py = [1.0 - p1, p1];
        let mut mi = 0.0;
        for counts in &joint {
            let pc = (counts[0] + counts[1]) as f64 / n;
            if pc == 0.0 {
                continue;
            }
            for l in 0..2 {
                let pj = counts[l] as f64 / n;
                if pj > 0.0 {
                    mi += pj * (pj / (pc * py[l])).log2();
                }
            }
        }
        mi
    }

    #[test]
    fn noise_columns_share_no_information_with_labels() {
        let spec = SyntheticSpec { n_samples: 50_000, ..small_spec() };
        let ds = generate_synthetic(&spec).unwrap();
        let f = ds.n_fields();
        let roles = ds.roles.as_ref().unwrap();
        for (k, role) in roles.iter().enumerate() {
            if *role != FieldRole::Noise {
                continue;
            }
            let mi = mutual_information(
                (0..ds.n_rows()).map(|r| ds.x[r * f + k]),
                &ds.y,
                spec.vocab,
            );
            assert!(mi < 0.01, "noise field {k} leaks {mi} bits");
        }
        // Sanity: informative columns do carry signal at this effect scale.
        let mi0 = mutual_information((0..ds.n_rows()).map(|r| ds.x[r * f]), &ds.y, spec.vocab);
        assert!(mi0 > 0.02, "informative field carries only {mi0} bits");
    }

    #[test]
    fn zero_effect_scale_detaches_labels_from_every_column() {
        let spec = SyntheticSpec { effect_scale: 0.0, n_samples: 50_000, ..small_spec() };
        let ds = generate_synthetic(&spec).unwrap();
        let f = ds.n_fields();
        for k in 0..f {
            let mi = mutual_information(
                (0..ds.n_rows()).map(|r| ds.x[r * f + k]),
                &ds.y,
                spec.vocab,
            );
            assert!(mi < 0.01, "column {k} leaks {mi} bits with zero effect scale");
        }
    }

    #[test]
    fn redundant_columns_are_bijections_of_their_source() {
        let ds = generate_synthetic(&small_spec()).unwrap();
        let f = ds.n_fields();
        let roles = ds.roles.as_ref().unwrap();
        for (k, role) in roles.iter().enumerate() {
            let FieldRole::Redundant { of } = *role else { continue };
            let mut forward: HashMap<u32, u32> = HashMap::new();
            let mut inverse: HashMap<u32, u32> = HashMap::new();
            for r in 0..ds.n_rows() {
                let s = ds.x[r * f + of];
                let d = ds.x[r * f + k];
                assert_eq!(*forward.entry(s).or_insert(d), d, "not a function at {s}");
                assert_eq!(*inverse.entry(d).or_insert(s), s, "not injective at {d}");
            }
            // Round-trip every row through the recovered inverse.
            for r in 0..ds.n_rows() {
                assert_eq!(inverse[&ds.x[r * f + k]], ds.x[r * f + of]);
            }
        }
    }

    #[test]
    fn split_cuts_eight_one_one_and_partitions_rows() {
        let mut ds = generate_synthetic(&SyntheticSpec { n_samples: 10, ..small_spec() }).unwrap();
        ds.split(3).unwrap();
        let s = ds.splits.as_ref().unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 1, 1));

        let mut ds = generate_synthetic(&SyntheticSpec { n_samples: 103, ..small_spec() }).unwrap();
        ds.split(3).unwrap();
        let s = ds.splits.clone().unwrap();
        let mut all: Vec<usize> =
            s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..103).collect::<Vec<_>>());

        let mut again = ds.clone();
        again.split(3).unwrap();
        assert_eq!(ds.splits, again.splits);
        let mut other = ds.clone();
        other.split(4).unwrap();
        assert_ne!(ds.splits, other.splits);

        let mut tiny =
            generate_synthetic(&SyntheticSpec { n_samples: 9, ..small_spec() }).unwrap();
        assert!(matches!(tiny.split(0), Err(Error::Config(_))));
    }

    #[test]
    fn batches_cover_the_split_exactly_once() {
        let mut ds = generate_synthetic(&SyntheticSpec { n_samples: 50, ..small_spec() }).unwrap();
        ds.split(1).unwrap();
        let train = ds.split_indices(Split::Train).unwrap().to_vec();
        let sizes: Vec<usize> =
            ds.batches(Split::Train, 16, 1, 0).unwrap().map(|(_, y)| y.len()).collect();
        assert_eq!(sizes, vec![16, 16, 8]);

        // One epoch's labels, re-sorted, match the split's labels.
        let mut seen: Vec<u8> =
            ds.batches(Split::Train, 16, 1, 0).unwrap().flat_map(|(_, y)| y).collect();
        let mut expect: Vec<u8> = train.iter().map(|&i| ds.y[i]).collect();
        seen.sort_unstable();
        expect.sort_unstable();
        assert_eq!(seen, expect);

        let a: Vec<_> = ds.batches(Split::Train, 16, 1, 2).unwrap().collect();
        let b: Vec<_> = ds.batches(Split::Train, 16, 1, 2).unwrap().collect();
        assert_eq!(a, b);
        let c: Vec<_> = ds.batches(Split::Train, 16, 1, 3).unwrap().collect();
        assert_ne!(a, c);

        let whole: Vec<_> = ds.batches(Split::Val, 1000, 1, 0).unwrap().collect();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].1.len(), 5);
    }

    #[test]
    fn csv_round_trip_preserves_rows_and_labels() {
        let ds = generate_synthetic(&SyntheticSpec { n_samples: 200, ..small_spec() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        save_csv(&ds, &path, "label").unwrap();
        let back = load_csv(&path, "label").unwrap();
        assert_eq!(back.x, ds.x);
        assert_eq!(back.y, ds.y);
        assert_eq!(
            back.schema.fields.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
            ds.schema.fields.iter().map(|f| f.name.clone()).collect::<Vec<_>>()
        );
    }

    fn write_csv(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, content).unwrap();
        (dir, path)
    }

    #[test]
    fn csv_strings_code_in_first_seen_order() {
        let (_d, path) = write_csv("a,b,label\nx,0,1\ny,3,0\nx,2,1\n");
        let ds = load_csv(&path, "label").unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.n_fields(), 2);
        // Column a is string-coded: x -> 0, y -> 1. Column b keeps raw ids.
        assert_eq!(ds.x, vec![0, 0, 1, 3, 0, 2]);
        assert_eq!(ds.y, vec![1, 0, 1]);
        assert_eq!(ds.schema.fields[0].vocab, 2);
        assert_eq!(ds.schema.fields[1].vocab, 4);
    }

    #[test]
    fn csv_errors_name_the_offending_line() {
        let (_d, path) = write_csv("a,label\n0,1\n1,2\n");
        let err = load_csv(&path, "label").unwrap_err();
        let Error::Parse { line, msg } = err else { panic!("wrong error {err}") };
        assert_eq!(line, 3);
        assert!(msg.contains('2'));

        let (_d, path) = write_csv("a,b,label\n0,1\n");
        let err = load_csv(&path, "label").unwrap_err();
        let Error::Parse { line, .. } = err else { panic!("wrong error {err}") };
        assert_eq!(line, 2);

        let (_d, path) = write_csv("a,b,target\n0,1,1\n");
        let err = load_csv(&path, "label").unwrap_err();
        let Error::Parse { line, .. } = err else { panic!("wrong error {err}") };
        assert_eq!(line, 1);
    }

    #[test]
    fn out_of_vocabulary_ids_clamp_to_zero() {
        let schema = FieldSchema::uniform(&["a".to_string(), "b".to_string()], 4, 2).unwrap();
        let mut x = vec![3, 9, 1, 4];
        Dataset::clamp_to_vocab(&mut x, &schema);
        assert_eq!(x, vec![3, 0, 1, 0]);
    }
}
