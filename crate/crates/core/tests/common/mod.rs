//! Shared instance and program generators for the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superhedge::cli::InstanceFile;
use superhedge::lp::{Bounds, LinearProgram, Relation, Sense};
use superhedge::models::{self, IntervalParams};
use superhedge::{Claim, Instance, NodeId, Strategy};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn load_file(name: &str) -> InstanceFile {
    let path = data_path(name);
    let text = std::fs::read_to_string(&path).unwrap();
    InstanceFile::parse(&text, name).unwrap()
}

pub fn load(name: &str) -> Instance {
    load_file(name).instance().unwrap()
}

/// Generator parameters derived from `seed`: horizon 1..=3, branching 2..=3,
/// 1..=4 models, a ratio interval around 1.
pub fn params(seed: u64, max_horizon: usize) -> IntervalParams {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ seed);
    IntervalParams {
        horizon: rng.gen_range(1..=max_horizon),
        lo: rng.gen_range(0.3..0.95),
        hi: rng.gen_range(1.05..2.5),
        branching: rng.gen_range(2..=3),
        models: rng.gen_range(1..=4),
        seed,
    }
}

/// A generated instance; every fourth seed also forbids one leaf, so that
/// polar sets show up in the population.
pub fn generated(seed: u64, max_horizon: usize) -> Instance {
    let p = params(seed, max_horizon);
    if seed % 4 == 3 {
        let tree = models::interval_tree(p.horizon, p.lo, p.hi, p.branching).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leaves: Vec<NodeId> = tree.leaves().collect();
        let forbidden: BTreeSet<NodeId> = [leaves[rng.gen_range(0..leaves.len())]].into_iter().collect();
        if let Ok(inst) = models::gen_nullset_instance(tree, &forbidden, p.models, p.seed) {
            return inst;
        }
    }
    models::gen_interval_instance(&p).unwrap()
}

pub fn random_strategy(inst: &Instance, rng: &mut impl Rng) -> Strategy {
    let tree = inst.tree();
    let values = tree.interior().map(|n| (n, rng.gen_range(-3.0..3.0))).collect();
    Strategy::new(tree, values).unwrap()
}

pub fn random_claim(inst: &Instance, rng: &mut impl Rng) -> Claim {
    Claim::from_fn(inst.tree(), |_| rng.gen_range(-2.0..2.0))
}

/// Small LP with integer data: up to `max_vars` variables and `max_rows` rows,
/// mixed relations and a mix of free, signed and boxed variables.
pub fn random_lp(rng: &mut impl Rng, max_vars: usize, max_rows: usize) -> LinearProgram<f64> {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(0..=max_rows);
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let objective = (0..n).map(|_| rng.gen_range(-4..=4) as f64).collect();
    let mut lp = LinearProgram::new(sense, objective);
    for _ in 0..m {
        let row = (0..n)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-5..=5) as f64 })
            .collect();
        let relation = match rng.gen_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        lp.add_constraint(row, relation, rng.gen_range(-6..=6) as f64);
    }
    let bounds = (0..n)
        .map(|_| match rng.gen_range(0..4) {
            0 => Bounds::free(),
            1 => Bounds::non_negative(),
            2 => Bounds::between(rng.gen_range(-3..=0) as f64, rng.gen_range(0..=3) as f64),
            _ => Bounds {
                lower: None,
                upper: Some(rng.gen_range(-2..=3) as f64),
            },
        })
        .collect();
    lp.with_bounds(bounds)
}
