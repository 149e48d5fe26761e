//! Causal topology of dynamic graphs.
//!
//! The crate covers the whole path from time-stamped edge lists to node
//! classification:
//!
//! * [`temporal`]: dynamic graph model, edge-list ingestion, coarsening and
//!   time aggregation.
//! * [`walks`]: exact counting of time-respecting (causal) walks.
//! * [`debruijn`]: higher-order De Bruijn graphs built from walk statistics.
//! * [`order`]: likelihood-ratio based selection of the De Bruijn order.
//! * [`numerics`]: dense matrices, activations, loss, Adam, chi-squared CDF.
//! * [`dbgnn`]: the De Bruijn graph neural network and a GCN baseline.
//! * [`experiment`]: training loop, metrics, embedding export.
//! * [`synthetic`]: the temporal-clusters generator.

pub mod dbgnn;
pub mod debruijn;
pub mod error;
pub mod experiment;
pub mod numerics;
pub mod order;
pub mod synthetic;
pub mod temporal;
pub mod walks;

pub use dbgnn::{Aggregator, DbgnnConfig, DbgnnModel, GcnModel, NodeClassifier};
pub use debruijn::{BipartiteProjection, DeBruijnGraph};
pub use error::{Error, Result};
pub use experiment::{Metrics, TrainConfig};
pub use numerics::Matrix;
pub use order::OrderSelectionResult;
pub use temporal::{ColumnOrder, NodeId, StaticWeightedGraph, TemporalEdge, TemporalGraph};
pub use walks::WalkBag;
