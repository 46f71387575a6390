//! Problem families expressed as recursive solvers.

pub mod knapsack;
pub mod min_cost_flow;
pub mod shortest_path;
pub mod vertex_cover;

pub use knapsack::{brute_ks, Knapsack};
pub use min_cost_flow::{brute_mcfp, max_flow, FlowSolution, FlowTermination, MinCostFlow};
pub use shortest_path::{brute_spp, ShortestPath};
pub use vertex_cover::{brute_mcvc, VertexCover};
