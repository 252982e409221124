//! Controller placement for software-defined networks.
//!
//! The crate models a network as a latency-weighted undirected graph,
//! evaluates controller placements by average-case latency, worst-case
//! latency and coverage within a latency bound, and provides exact and
//! heuristic placement solvers, controller-count selection from the
//! diminishing-returns curve, and failure analysis of the resulting control
//! network.
//!
//! ```
//! use ctrlplace::metrics::{avg_latency, DistanceMatrix};
//! use ctrlplace::solvers::solve_kmedoids;
//! use ctrlplace::topology::bundled_example;
//!
//! let net = bundled_example();
//! let dist = DistanceMatrix::from_topology(&net.topology).unwrap();
//! let result = solve_kmedoids(&dist, 4, 42, 100).unwrap();
//! assert_eq!(result.placement.k(), 4);
//! assert_eq!(result.objective_value, avg_latency(&dist, &result.placement));
//! ```

pub mod cli;
pub mod k_selection;
pub mod metrics;
pub mod reliability;
pub mod solvers;
pub mod topology;

/// Derives an independent sub-seed for stream `stream` from a base seed
/// (SplitMix64 finalizer over the combined input).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
