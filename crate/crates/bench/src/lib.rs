//! Shared fixtures for the benchmarks.

use hybrid_ik::benchmark::generate_queries;
use hybrid_ik::{IkQuery, RobotKind, RobotModel};

pub const FIXTURE_SEED: u64 = 7;

/// A model and a fixed batch of reachable queries for it.
pub fn fixture(kind: RobotKind, n: usize) -> (RobotModel, Vec<IkQuery>) {
    let model = RobotModel::builtin(kind);
    let queries = generate_queries(&model, n, FIXTURE_SEED)
        .expect("built-in models generate queries")
        .queries;
    (model, queries)
}
