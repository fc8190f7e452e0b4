//! Wavelet construction layer: filters, discrete non-decimated wavelets,
//! multiresolution analysis, autocorrelation wavelets and inner-product
//! operators.

mod autocorr;
mod discrete;
mod filter;
mod operator;

pub use autocorr::AutocorrTable;
pub use discrete::{
    mra_decompose, mra_decompose_with, nondecimated_transform, nondecimated_transform_with,
    DiscreteWaveletSet, MraDecomposition,
};
pub use filter::QuadratureMirrorPair;
pub use operator::{InnerProductOperator, CONDITION_LIMIT};

pub(crate) use discrete::circular_convolve;
