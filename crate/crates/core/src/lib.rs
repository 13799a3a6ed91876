//! Causal structure discovery from conditional-independence tests by
//! greedy growth of ancestrally closed node sets.
//!
//! - [`graph`]: DAGs, partially directed graphs, d-separation, cliques
//! - [`cpdag`]: v-structures, Meek rules, essential graphs, SHD
//! - [`citest`]: oracle and Fisher-z testers with call accounting
//! - [`synth`]: random DAGs and linear Gaussian SEMs
//! - [`gas`]: the search itself and its refined variant
//! - [`pc`]: PC-stable baseline
//! - [`lowerbound`]: indistinguishable graph pairs for query lower bounds
//! - [`bench`](mod@bench): experiment grid runner

pub mod bench;
pub mod citest;
pub mod cpdag;
pub mod edgelist;
pub mod error;
pub mod gas;
pub mod graph;
pub mod lowerbound;
pub mod pc;
pub mod synth;

pub use citest::{CachedTester, CiQuery, CiStats, CiTester, DSepOracle, FisherZ};
pub use cpdag::{essential_graph, meek_closure, same_mec, shd};
pub use gas::{run_gas, run_gas_plus, GasResult};
pub use graph::{Dag, NodeId, NodeSet, Pdag};
pub use pc::run_pc;
