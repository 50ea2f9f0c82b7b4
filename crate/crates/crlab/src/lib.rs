//! Common randomness (CR) over finite two-way channels: exact information
//! measures, channel models whose output laws factor given the input pair,
//! interactive strategy simulation with uniformity statistics, reference
//! generation schemes, and a numerical max-min outer bound on the CR rate
//! with the matching benchmark capacity for decomposing channels.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod infomeasures;
pub mod protocols;
pub mod simulator;
