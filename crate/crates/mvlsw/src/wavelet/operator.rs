//! Lagged inner-product operators over scale pairs and their inverses.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::wavelet::AutocorrTable;

/// Condition numbers above this are treated as numerically singular.
pub const CONDITION_LIMIT: f64 = 1e8;

/// The `J^2 x J^2` operator
/// `A^delta[(j,j'),(l,l')] = sum_tau Psi_{jj'}(tau) Psi_{ll'}(tau + delta)`
/// with rows and columns indexed by scale pairs in row-major order.
#[derive(Debug, Clone)]
pub struct InnerProductOperator {
    levels: usize,
    lag: isize,
    matrix: DMatrix<f64>,
    condition_number: f64,
}

impl InnerProductOperator {
    /// Exact finite sums over the joint autocorrelation supports.
    pub fn new(table: &AutocorrTable, lag: isize) -> Self {
        let levels = table.levels();
        let n = levels * levels;
        let mut matrix = DMatrix::zeros(n, n);
        for j in 1..=levels {
            for jp in 1..=levels {
                let row = (j - 1) * levels + (jp - 1);
                let (row_lo, row_hi) = table.lag_range(j, jp);
                for l in 1..=levels {
                    for lp in 1..=levels {
                        let col = (l - 1) * levels + (lp - 1);
                        // Nonzero only where both sequences are supported.
                        let (col_lo, col_hi) = table.lag_range(l, lp);
                        let lo = row_lo.max(col_lo - lag);
                        let hi = row_hi.min(col_hi - lag);
                        let mut acc = 0.0;
                        for tau in lo..=hi {
                            acc += table.get(j, jp, tau) * table.get(l, lp, tau + lag);
                        }
                        matrix[(row, col)] = acc;
                    }
                }
            }
        }
        let condition_number = condition(&matrix);
        Self {
            levels,
            lag,
            matrix,
            condition_number,
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn lag(&self) -> isize {
        self.lag
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// Row/column index of the scale pair `(j, j')` (1-based scales).
    pub fn pair_index(&self, j: usize, jp: usize) -> usize {
        (j - 1) * self.levels + (jp - 1)
    }

    /// Entry `A^delta[(j,j'),(l,l')]`.
    pub fn entry(&self, j: usize, jp: usize, l: usize, lp: usize) -> f64 {
        self.matrix[(self.pair_index(j, jp), self.pair_index(l, lp))]
    }

    /// Inverse by LU factorization.
    ///
    /// Ill-conditioning is an error, not a silent pseudo-inverse: callers
    /// get the measured condition number back.
    pub fn invert(&self) -> Result<DMatrix<f64>> {
        if !self.condition_number.is_finite() || self.condition_number > CONDITION_LIMIT {
            return Err(Error::SingularOperator {
                condition: self.condition_number,
            });
        }
        self.matrix
            .clone()
            .try_inverse()
            .ok_or(Error::SingularOperator {
                condition: self.condition_number,
            })
    }
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
