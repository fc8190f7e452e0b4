//! Two-group permutation test on coherence curves.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::replicate_rng;
use crate::spectrum::{CoherenceSurface, ScalePair};

/// Outcome of a label-permutation test on the squared distance between
/// two group median curves.
#[derive(Debug, Clone)]
pub struct PermutationResult {
    pub t_observed: f64,
    pub t_permuted: Vec<f64>,
    /// Add-one rule: `(1 + #{T_perm >= T_obs}) / (n_perm + 1)`, in (0, 1].
    pub p_value: f64,
    pub n_perm: usize,
    pub seed: u64,
    /// Grid points excluded from the statistic because a median was
    /// undefined there.
    pub excluded_points: usize,
}

/// Pointwise median over curves, ignoring undefined values; a point is
/// undefined only when every input is undefined there.
pub fn median_curve(group: &[&CoherenceSurface], pair: &ScalePair) -> Result<Vec<Option<f64>>> {
    if group.is_empty() {
        return Err(Error::EmptyGroup("median of an empty group".into()));
    }
    for s in &group[1..] {
        if !group[0].grid_matches(s) {
            return Err(Error::ConfigMismatch(
                "surfaces in the group have different grids".into(),
            ));
        }
    }
    let curves: Vec<&[Option<f64>]> = group
        .iter()
        .map(|s| s.values(pair))
        .collect::<Result<Vec<_>>>()?;
    Ok(median_of_curves(&curves))
}

fn median_of_curves(curves: &[&[Option<f64>]]) -> Vec<Option<f64>> {
    let len = curves[0].len();
    let mut out = Vec::with_capacity(len);
    let mut buf = Vec::with_capacity(curves.len());
    for i in 0..len {
        buf.clear();
        for c in curves {
            if let Some(v) = c[i] {
                buf.push(v);
            }
        }
        if buf.is_empty() {
            out.push(None);
            continue;
        }
        buf.sort_by(f64::total_cmp);
        let n = buf.len();
        let med = if n % 2 == 1 {
            buf[n / 2]
        } else {
            0.5 * (buf[n / 2 - 1] + buf[n / 2])
        };
        out.push(Some(med));
    }
    out
}

// Squared distance between median curves over points where both are
// defined; also returns the number of excluded points.
fn statistic(a: &[&[Option<f64>]], b: &[&[Option<f64>]]) -> (f64, usize) {
    let med_a = median_of_curves(a);
    let med_b = median_of_curves(b);
    let mut t = 0.0;
    let mut excluded = 0;
    for (x, y) in med_a.iter().zip(&med_b) {
        match (x, y) {
            (Some(x), Some(y)) => t += (x - y) * (x - y),
            _ => excluded += 1,
        }
    }
    (t, excluded)
}

/// Permutation test on the statistic `T = sum_t (medA(t) - medB(t))^2`.
///
/// Group labels are shuffled `n_perm` times preserving group sizes;
/// draws run in parallel with per-draw derived seeds, so the result does
/// not depend on worker scheduling. The pooled curves are canonically
/// ordered by content before permuting, so swapping the two input groups
/// yields the identical p-value.
pub fn permutation_test(
    group_a: &[&CoherenceSurface],
    group_b: &[&CoherenceSurface],
    pair: &ScalePair,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationResult> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(Error::EmptyGroup("permutation test needs both groups".into()));
    }
    if n_perm == 0 {
        return Err(Error::InvalidParameter(
            "number of permutations must be positive".into(),
        ));
    }
    let all: Vec<&CoherenceSurface> = group_a.iter().chain(group_b.iter()).copied().collect();
    for s in &all[1..] {
        if !all[0].grid_matches(s) {
            return Err(Error::ConfigMismatch(
                "groups have mismatched coherence grids".into(),
            ));
        }
    }
    let curves: Vec<&[Option<f64>]> = all
        .iter()
        .map(|s| s.values(pair))
        .collect::<Result<Vec<_>>>()?;
    let n_a = group_a.len();
    let (t_observed, excluded_points) = statistic(&curves[..n_a], &curves[n_a..]);

    // Canonical pool order, invariant under exchanging the input groups.
    let mut pool: Vec<&[Option<f64>]> = curves.clone();
    pool.sort_by(|x, y| {
        for (a, b) in x.iter().zip(y.iter()) {
            let ord = match (a, b) {
                (None, None) => std::cmp::Ordering::Equal,
                (None, Some(_)) => std::cmp::Ordering::Less,
                (Some(_), None) => std::cmp::Ordering::Greater,
                (Some(a), Some(b)) => a.total_cmp(b),
            };
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    });

    let subset = n_a.min(group_b.len());
    let n = pool.len();
    let t_permuted: Vec<f64> = (0..n_perm as u64)
        .into_par_iter()
        .map(|draw| {
            let mut rng = replicate_rng(seed, draw);
            // Partial Fisher-Yates: the first `subset` entries form one
            // group, the rest the other.
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..subset {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
            }
            let first: Vec<&[Option<f64>]> = idx[..subset].iter().map(|i| pool[*i]).collect();
            let rest: Vec<&[Option<f64>]> = idx[subset..].iter().map(|i| pool[*i]).collect();
            statistic(&first, &rest).0
        })
        .collect();

    let exceed = t_permuted.iter().filter(|t| **t >= t_observed).count();
    let p_value = (1 + exceed) as f64 / (n_perm + 1) as f64;
    Ok(PermutationResult {
        t_observed,
        t_permuted,
        p_value,
        n_perm,
        seed,
        excluded_points,
    })
}
