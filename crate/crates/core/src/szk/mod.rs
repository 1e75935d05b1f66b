//! Circuit output distributions and their Qsamples, plus the Hadamard-test
//! deciders built on top of them.

mod deciders;
mod distribution;
pub mod numbers;

pub use deciders::{
    dlp_decider, dlp_overlap_min, dlp_promise_ranges, dlp_states, hadamard_test,
    hadamard_test_probability, power_circuit, qr_decider, qr_overlap_bound, qr_states, sd_decider,
    sd_far_ceiling, sd_threshold, shifted_pair, shots_for, square_circuit, DlpDecision, DlpStates,
    PromiseInstance, QrDecision, QrStates, SdDecision, MAX_MODULUS, SD_CLOSE_FLOOR,
};
pub use distribution::{
    distribution_of, fidelity, qsample_exact, variation, ClassicalCircuit, OutputDistribution,
    MAX_DOMAIN, MAX_QSAMPLE_BITS,
};
