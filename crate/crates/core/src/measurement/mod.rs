//! Observables: threshold decisions, readout fidelity and post-measurement coherence.

mod coherence;
mod decide;
mod ramsey;

pub use coherence::{
    dephasing_from_trajectories, dephasing_ideal, integrated_separation, scheduled_backaction, write_coherence_csv,
    CoherencePoint,
};
pub use decide::{choose_threshold, readout_fidelity, threshold_decide, HistogramPair, MIN_SHOTS_PER_PREP};
pub use ramsey::{
    coherence_ratio, fit_fringe, fit_fringe_fixed, fringe_probabilities, measurement_coherence,
    measurement_coherence_with, ramsey_coherence, sample_fringe, FringeFit, RamseyCoherence,
};
