//! Simulations of slicing, starfish syndrome extraction, surgery and effective distance.

pub mod slicing;
pub mod starfish;
pub mod surgery;
pub mod tableau;

pub use slicing::{
    effective_distance_bell, ghz_logical_group, slice_protocol, slice_setup, twisted_slice_logicals, EffectiveDistanceReport,
    FaultConfig, SignedLogical, SliceReport, SliceSetup,
};
pub use starfish::{
    adversarial_order, circuit_distance, hook_propagation, starfish_circuit, starfish_order, Circuit, HookRow, Op,
};
pub use surgery::{boundary_distance, boundary_distance_from_systole, css_at_degree, surgery_measure, SurgeryReport};
pub use tableau::{random_state, Basis, Measurement, PauliOp, StabilizerState};
