//! Geodesic and variational flows, parallel frames, and event detection.

pub mod accumulation;
pub mod dop853;
pub mod flow;
pub mod frame;
pub mod initial;
pub mod trace;

pub use accumulation::{asymptotic_accumulation, AccumulationReport};
pub use trace::{
    integrate_geodesic, ConservationLedger, EventLedger, GeodesicTrace, InitialData, JacobiBundle, StopRule,
    TraceOptions, TurnEvent, TurnKind, ZeroEvent,
};
