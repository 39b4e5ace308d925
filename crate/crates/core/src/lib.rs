pub mod closed_form;
pub mod error;
pub mod matrix;
pub mod qobjects;
pub mod sdp;

pub use closed_form::{
    entangled_collapse, helstrom, helstrom_povm, noisy_z_bias_lower,
    noisy_z_difference_eigenvalues, noisy_z_difference_operator, noisy_z_locc_success,
    noisy_z_measurement_success, noisy_z_optimal_success, optimal_sequential_strategy,
    orthogonal_qubit, projective_advantage, projective_instrument_success,
    projective_measurement_success, sequential_success, NoisyZParams, ProjectivePair,
    SequentialStrategy,
};
pub use error::{CoreError, Result};
pub use matrix::{
    eig_hermitian, kron, max_entangled, partial_trace, psd_sqrt, trace_norm, universal_not,
    CMatrix, HermitianOperator, PureState, SystemDims, C64,
};
pub use sdp::{
    diamond_distance, instrument_advantage, luders_distance, measurement_distance,
    optimize_tester, optimize_tester_with, tester_success, validate_tester, Ensemble, SdpReport,
    SdpStatus, SolverOptions, Tester, TesterReport,
};

pub use qobjects::{
    instrument_povm, luders_channel_choi, luders_instrument, luders_post_state, mp_channel_choi,
    noisy_z_povm, parse_povm_ensemble, projective_qubit_povm, theta_states, trine_povm,
    validate_povm, ChoiOperator, LudersInstrument, Povm, PovmEnsemble, PovmReport,
};
