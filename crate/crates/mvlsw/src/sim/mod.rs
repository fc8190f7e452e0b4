//! Process simulation: MvLSW realizations with cross-scale-dependent
//! innovations, AR(2) latent designs, and the exact spectra/coherence a
//! specification implies.

mod ar2;
mod realize;
mod spec;
mod truth;

pub use ar2::{
    mix_timevarying, simulate_ar2, simulate_tri_band, tri_band_design, Ar2LatentSpec,
    MixingSchedule, AR2_BURN_IN,
};
pub use realize::{simulate_mvlsw, Realization};
pub use spec::{CorrModel, Level, MvLswSpec, MvLswSpecFile, TransferModel};
pub use truth::{true_coherence, true_cross_spectrum};
