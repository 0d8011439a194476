//! The three-compartment inferior-olive cell.

pub mod cell;
pub mod kinetics;
pub mod params;
pub mod state;
pub mod stimulus;

pub use cell::{cell_derivatives, cell_derivatives_into, NeuronParams};
pub use kinetics::{
    channel_current, compartment_current, gate_derivative, na_axon_kinetics, GateInput,
    GateKinetics, Kinetics, GATES,
};
pub use params::{
    CalciumDynamics, Capacitances, CellParameters, Conductances, Coupling, ReversalPotentials,
    DEFAULT_G_GJ,
};
pub use state::{initial_state, initial_state_at, row, RestingState, StateMatrix, STATE_VARS};
pub use stimulus::{Pulse, StimulusSchedule};
