//! Shared fixtures for the benchmark targets.

use luderscope_core::{
    luders_channel_choi, mp_channel_choi, projective_qubit_povm, Ensemble, Povm, PureState, C64,
};

pub fn zx_povms() -> (Povm, Povm) {
    let z = PureState::basis(2, 0);
    let s = 1.0 / 2.0f64.sqrt();
    let x = PureState::new(vec![C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
    (
        projective_qubit_povm(&z).unwrap(),
        projective_qubit_povm(&x).unwrap(),
    )
}

pub fn zx_ensemble(instrument: bool) -> Ensemble {
    let (a, b) = zx_povms();
    let chois = if instrument {
        vec![
            luders_channel_choi(&a).unwrap(),
            luders_channel_choi(&b).unwrap(),
        ]
    } else {
        vec![mp_channel_choi(&a), mp_channel_choi(&b)]
    };
    Ensemble::new(vec![0.5, 0.5], chois).unwrap()
}
