//! Typed concept graphs, node-map transformations over them, and a coherence
//! audit (`chi`) deciding whether a transformation keeps a graph well formed.
//!
//! On top of that sit embeddings and spans for moving transformations between
//! graphs, a functional instance type (`fmi`) with a gated, reversible move log,
//! reification of move logs into higher-order graphs, and a seeded multi-agent
//! simulator that measures drift and repair. The `examples/` directory walks
//! through each piece.

mod ids;
pub mod space;
pub mod moves;
pub mod transform;
pub mod coherence;
pub mod embedding;
pub mod fmi;
pub mod runtime;
pub mod recursion;
pub mod sim;
pub mod fixtures;
pub mod cli;
