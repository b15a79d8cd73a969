//! Adaptive intermediate thresholds.

use crate::error::{Error, Result};

/// `n * p0` as an integer seed count, validated.
pub(crate) fn seed_count(n: usize, p0: f64) -> Result<usize> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::invalid("p0", "must lie in (0, 1)"));
    }
    let exact = n as f64 * p0;
    let m = exact.round();
    if (exact - m).abs() > 1e-9 * m.max(1.0) {
        return Err(Error::invalid("p0", format!("n * p0 = {exact} is not an integer")));
    }
    let m = m as usize;
    if m < 1 || m >= n {
        return Err(Error::invalid("p0", format!("n * p0 = {m} must lie in [1, n)")));
    }
    Ok(m)
}

/// Indices ordered by value, largest first; equal values keep index order.
pub(crate) fn descending_order(g: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g[b].total_cmp(&g[a]).then(a.cmp(&b)));
    order
}

/// Midpoint of the `n p0`-th and `n p0 + 1`-th largest values, and the
/// indices of the `n p0` largest.
pub fn intermediate_threshold(g_values: &[f64], p0: f64) -> Result<(f64, Vec<usize>)> {
    let m = seed_count(g_values.len(), p0)?;
    let order = descending_order(g_values);
    let (upper, lower) = (g_values[order[m - 1]], g_values[order[m]]);
    if upper == lower {
        return Err(Error::DegenerateThreshold(format!(
            "order statistics {m} and {} are both {upper}",
            m + 1
        )));
    }
    Ok((0.5 * (upper + lower), order[..m].to_vec()))
}

/// A level cut that tolerates ties at the boundary.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LevelCut {
    pub threshold: f64,
    /// Seed indices, largest value first. Every seed strictly exceeds `threshold`.
    pub seeds: Vec<usize>,
    pub tie_resolved: bool,
}

/// Like [`intermediate_threshold`], but when equal values straddle the cut
/// the whole tie cluster joins the seeds and the threshold moves to the gap
/// below it. When the cluster reaches the smallest value the cluster is
/// dropped instead and the threshold sits in the gap above it, capped at
/// `cap`. Fails only when every value is equal.
pub(crate) fn level_cut(g: &[f64], p0: f64, cap: f64) -> Result<LevelCut> {
    let n = g.len();
    let m = seed_count(n, p0)?;
    let order = descending_order(g);
    let at = |k: usize| g[order[k]];
    if at(m - 1) > at(m) {
        return Ok(LevelCut {
            threshold: 0.5 * (at(m - 1) + at(m)),
            seeds: order[..m].to_vec(),
            tie_resolved: false,
        });
    }
    let tied = at(m - 1);
    let above = order.iter().take_while(|&&i| g[i] > tied).count();
    let through = order.iter().take_while(|&&i| g[i] >= tied).count();
    let (threshold, count) = if through < n {
        (0.5 * (tied + at(through)), through)
    } else if above > 0 {
        let t = (0.5 * (tied + at(above - 1))).min(cap);
        (t, order.iter().take_while(|&&i| g[i] > t).count())
    } else {
        return Err(Error::DegenerateThreshold(format!("all {n} level values equal {tied}")));
    };
    if count == 0 {
        return Err(Error::DegenerateThreshold(format!("no sample exceeds {threshold}")));
    }
    Ok(LevelCut {
        threshold,
        seeds: order[..count].to_vec(),
        tie_resolved: true,
    })
}
