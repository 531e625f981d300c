//! Batched parametric max-flow over knitted grid supergraphs.

pub mod graph;
pub mod harness;
pub mod maxflow;
pub mod netproto;
pub mod parametric;
pub mod scheduler;
pub mod supergraph;
