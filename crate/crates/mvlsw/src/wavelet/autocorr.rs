//! Cross-scale autocorrelation wavelets.

use crate::wavelet::DiscreteWaveletSet;

/// One lag-indexed sequence stored with its support offset.
#[derive(Debug, Clone)]
struct LagSeq {
    min_lag: isize,
    values: Vec<f64>,
}

impl LagSeq {
    fn get(&self, tau: isize) -> f64 {
        let idx = tau - self.min_lag;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }
}

/// Table of cross-scale autocorrelation wavelets
/// `Psi_{jj'}(tau) = sum_m psi_j(m) psi_{j'}(m + tau)`, computed exactly
/// over the finite supports.
#[derive(Debug, Clone)]
pub struct AutocorrTable {
    levels: usize,
    entries: Vec<LagSeq>,
}

impl AutocorrTable {
    pub fn new(wavelets: &DiscreteWaveletSet) -> Self {
        let levels = wavelets.levels();
        let mut entries = Vec::with_capacity(levels * levels);
        for j in 1..=levels {
            for jp in 1..=levels {
                let a = wavelets.wavelet(j);
                let b = wavelets.wavelet(jp);
                let min_lag = -(a.len() as isize - 1);
                let max_lag = b.len() as isize - 1;
                let mut values = Vec::with_capacity((max_lag - min_lag + 1) as usize);
                for tau in min_lag..=max_lag {
                    let mut acc = 0.0;
                    for (m, &av) in a.iter().enumerate() {
                        let idx = m as isize + tau;
                        if idx >= 0 && (idx as usize) < b.len() {
                            acc += av * b[idx as usize];
                        }
                    }
                    values.push(acc);
                }
                entries.push(LagSeq { min_lag, values });
            }
        }
        Self { levels, entries }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// `Psi_{jj'}(tau)`, zero outside the joint support (scales 1-based).
    pub fn get(&self, j: usize, jp: usize, tau: isize) -> f64 {
        self.entries[(j - 1) * self.levels + (jp - 1)].get(tau)
    }

    /// Inclusive lag range carrying nonzero support for the pair.
    pub fn lag_range(&self, j: usize, jp: usize) -> (isize, isize) {
        let e = &self.entries[(j - 1) * self.levels + (jp - 1)];
        (e.min_lag, e.min_lag + e.values.len() as isize - 1)
    }

    /// `sum_tau |Psi_{jj}(tau)|` for the growth check.
    pub fn abs_lag_sum(&self, j: usize) -> f64 {
        self.entries[(j - 1) * self.levels + (j - 1)]
            .values
            .iter()
            .map(|v| v.abs())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::QuadratureMirrorPair;

    fn table(order: usize, levels: usize) -> AutocorrTable {
        let f = QuadratureMirrorPair::daubechies(order).unwrap();
        let w = DiscreteWaveletSet::new(&f, levels).unwrap();
        AutocorrTable::new(&w)
    }

    #[test]
    fn unit_norm_at_lag_zero() {
        let t = table(2, 5);
        for j in 1..=5 {
            assert!((t.get(j, j, 0) - 1.0).abs() < 1e-10, "scale {j}");
        }
    }

    #[test]
    fn haar_lag_one_is_minus_half() {
        let t = table(1, 1);
        assert!((t.get(1, 1, 1) + 0.5).abs() < 1e-12);
        assert!((t.get(1, 1, -1) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn transpose_symmetry_in_scale_and_lag() {
        let t = table(3, 4);
        for j in 1..=4 {
            for jp in 1..=4 {
                let (lo, hi) = t.lag_range(j, jp);
                for tau in lo..=hi {
                    let a = t.get(j, jp, tau);
                    let b = t.get(jp, j, -tau);
                    assert!((a - b).abs() < 1e-12, "({j},{jp},{tau}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn zero_outside_joint_support() {
        let t = table(2, 2);
        let (lo, hi) = t.lag_range(1, 2);
        assert_eq!(t.get(1, 2, lo - 1), 0.0);
        assert_eq!(t.get(1, 2, hi + 1), 0.0);
    }

    #[test]
    fn absolute_lag_sums_grow_like_two_to_the_scale() {
        // A single constant per family bounds sum_tau |Psi_jj| / 2^j over j = 1..6.
        for order in [1usize, 2, 4] {
            let t = table(order, 6);
            let c: f64 = (1..=6)
                .map(|j| t.abs_lag_sum(j) / 2f64.powi(j as i32))
                .fold(0.0, f64::max);
            for j in 1..=6 {
                assert!(
                    t.abs_lag_sum(j) <= c * 2f64.powi(j as i32) + 1e-12,
                    "db{order} scale {j}"
                );
            }
            // The bound must be meaningful: the ratio stays of order one.
            assert!(c < 2.0, "db{order}: growth constant {c}");
        }
    }
}
