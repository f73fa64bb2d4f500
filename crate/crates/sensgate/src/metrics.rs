//! Evaluation metrics: ranking quality, compression ratios, agreement, and
//! gate polarization summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model quality on one declared split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub auc: f64,
    pub logloss: f64,
    pub n: usize,
}

/// Mann-Whitney AUC from scores and binary labels. Ties earn half credit;
/// computed from average ranks in `O(n log n)`.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores against {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Domain("AUC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Average ranks over tie groups, 1-based.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

/// Mean binary cross-entropy of probabilities against labels, clamped away
/// from 0 and 1 so degenerate predictions stay finite.
pub fn logloss(probs: &[f64], labels: &[u8]) -> Result<f64> {
    if probs.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} probabilities against {} labels",
            probs.len(),
            labels.len()
        )));
    }
    if probs.is_empty() {
        return Err(Error::Domain("logloss of an empty set".into()));
    }
    let sum: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(1e-12, 1.0 - 1e-12);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(sum / probs.len() as f64)
}

pub fn evaluate(probs: &[f64], labels: &[u8]) -> Result<EvalResult> {
    Ok(EvalResult {
        auc: auc(probs, labels)?,
        logloss: logloss(probs, labels)?,
        n: labels.len(),
    })
}

/// Normalized AUC over a methods-by-datasets table: each column is divided
/// by its maximum, then rows are averaged. The per-method result is 1
/// exactly when the method attains the column max on every dataset.
pub fn s_auc(table: &[Vec<f64>]) -> Result<Vec<f64>> {
    if table.is_empty() || table[0].is_empty() {
        return Err(Error::Domain("normalized AUC of an empty table".into()));
    }
    let d = table[0].len();
    for row in table {
        if row.len() != d {
            return Err(Error::Domain(format!(
                "ragged table: row of {} cells, expected {}",
                row.len(),
                d
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite AUC cell".into()));
        }
    }
    let col_max: Vec<f64> = (0..d)
        .map(|j| table.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    if col_max.iter().any(|&m| m <= 0.0) {
        return Err(Error::Domain("column maximum must be positive".into()));
    }
    Ok(table
        .iter()
        .map(|row| row.iter().zip(&col_max).map(|(v, m)| v / m).sum::<f64>() / d as f64)
        .collect())
}

/// Fraction of fields kept after pruning.
pub fn feature_retention(kept: usize, total: usize) -> Result<f64> {
    ratio(kept, total)
}

/// Fraction of embedding dimensions kept after pruning.
pub fn dimension_reduction(kept_dims: usize, total_dims: usize) -> Result<f64> {
    ratio(kept_dims, total_dims)
}

fn ratio(kept: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(Error::Domain("ratio over an empty total".into()));
    }
    if kept > total {
        return Err(Error::Contract(format!("kept {kept} exceeds total {total}")));
    }
    Ok(kept as f64 / total as f64)
}

/// Kendall rank correlation between two orderings of the same items.
/// Inputs are item sequences from most to least important; ties must be
/// broken before calling.
pub fn kendall_tau(order_a: &[u64], order_b: &[u64]) -> Result<f64> {
    let n = order_a.len();
    if n != order_b.len() {
        return Err(Error::Domain(format!(
            "orderings of {} and {} items",
            n,
            order_b.len()
        )));
    }
    if n < 2 {
        return Err(Error::Domain("rank correlation needs at least 2 items".into()));
    }
    let mut pos_b = std::collections::HashMap::with_capacity(n);
    for (p, &item) in order_b.iter().enumerate() {
        if pos_b.insert(item, p).is_some() {
            return Err(Error::Domain(format!("duplicate item {item} in ordering")));
        }
    }
    // Positions in B of items taken in A's order; each non-inversion is a
    // concordant pair.
    let seq: Vec<usize> = order_a
        .iter()
        .map(|item| {
            pos_b
                .get(item)
                .copied()
                .ok_or_else(|| Error::Domain(format!("item {item} missing from one ordering")))
        })
        .collect::<Result<_>>()?;
    if seq.len() != pos_b.len() {
        return Err(Error::Domain("orderings cover different items".into()));
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            if seq[i] < seq[j] {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    Ok((concordant - discordant) as f64 / (n * (n - 1) / 2) as f64)
}

/// Unit indices ordered by descending value; equal values keep ascending
/// index order, so rankings are deterministic.
pub fn ranking_desc(values: &[f64]) -> Vec<u64> {
    let mut idx: Vec<u64> = (0..values.len() as u64).collect();
    idx.sort_by(|&a, &b| {
        values[b as usize]
            .partial_cmp(&values[a as usize])
            .expect("finite values")
            .then(a.cmp(&b))
    });
    idx
}

/// How far a gate population has polarized toward {0, 1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationReport {
    /// Fraction of gates below `epsilon`.
    pub frac_low: f64,
    /// Fraction of gates above `1 - delta`.
    pub frac_high: f64,
    /// Fraction strictly inside (0.3, 0.7), the undecided band.
    pub mid_band_mass: f64,
    /// `min(gates >= 0.5) - max(gates < 0.5)`; absent when the 0.5 threshold
    /// does not split the population.
    pub margin: Option<f64>,
}

pub fn polarization_report(gates: &[f64], epsilon: f64, delta: f64) -> Result<PolarizationReport> {
    if gates.is_empty() {
        return Err(Error::Domain("polarization of an empty gate set".into()));
    }
    for bound in [epsilon, delta] {
        if !(0.0..0.5).contains(&bound) || bound == 0.0 {
            return Err(Error::Domain(format!("band bound {bound} outside (0, 0.5)")));
        }
    }
    let n = gates.len() as f64;
    let frac_low = gates.iter().filter(|&&g| g < epsilon).count() as f64 / n;
    let frac_high = gates.iter().filter(|&&g| g > 1.0 - delta).count() as f64 / n;
    let mid_band_mass =
        gates.iter().filter(|&&g| g > 0.3 && g < 0.7).count() as f64 / n;
    let min_kept = gates.iter().filter(|&&g| g >= 0.5).fold(f64::INFINITY, |a, &b| a.min(b));
    let max_pruned = gates.iter().filter(|&&g| g < 0.5).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let margin = if min_kept.is_finite() && max_pruned.is_finite() {
        Some(min_kept - max_pruned)
    } else {
        None
    };
    Ok(PolarizationReport { frac_low, frac_high, mid_band_mass, margin })
}
