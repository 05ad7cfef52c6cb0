//! Topology/circuit co-design toolkit: learn a qubit-connectivity graph
//! tailored to a circuit with reward-replay PPO, score candidate topologies
//! with a built-in SWAP router, and emit a manufacturable grid layout of the
//! winner.

pub mod circuit;
pub mod env;
pub mod layout;
pub mod ppo;
pub mod replay;
pub mod router;
pub mod topology;
