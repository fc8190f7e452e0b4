//! Monte-Carlo inference: null thresholds for coherence and the
//! two-group permutation test.

mod null;
mod perm;

pub use null::{
    null_distribution, null_pairs, significance_mask, NullConfig, NullDistribution,
    SignificanceMask,
};
pub use perm::{median_curve, permutation_test, PermutationResult};
