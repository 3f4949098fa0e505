//! Instance generation and JSON persistence.
//!
//! Two generators cover the experiments: [`gen_random`] scatters links in a
//! square world for average-case runs, and [`gen_blocker_cluster`] builds
//! the adversarial configuration where one long link can suppress a whole
//! cluster of short ones — the instance family on which the no-regret
//! outcome and the optimal schedule differ as much as possible.
//!
//! The on-disk format is a small JSON document:
//!
//! ```json
//! {
//!   "space": {"kind": "euclidean2d", "points": [[0.0, 0.0], [1.0, 0.0]]},
//!   "links": [{"s": 0, "r": 1}]
//! }
//! ```
//!
//! with `{"kind": "matrix", "d": [[...]]}` as the alternative space form.
//! Loading re-runs full metric validation, so a hand-edited file that
//! breaks symmetry or the triangle inequality is rejected with a witness.

use crate::metric::{Instance, MetricError, MetricSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::Path;

/// Parameters for [`gen_random`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    /// Number of links.
    pub n: usize,
    /// Maximum sender-receiver distance; lengths are uniform on (0, d_max].
    pub d_max: f64,
    /// Side length of the square the senders are drawn from.
    #[serde(default = "default_world")]
    pub world: f64,
    pub seed: u64,
}

fn default_world() -> f64 {
    100.0
}

#[derive(Debug)]
pub enum InstanceError {
    BadConfig(&'static str),
    Metric(MetricError),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::BadConfig(msg) => write!(f, "bad generator config: {msg}"),
            InstanceError::Metric(e) => write!(f, "invalid instance: {e}"),
            InstanceError::Io(e) => write!(f, "i/o error: {e}"),
            InstanceError::Json(e) => write!(f, "malformed instance file: {e}"),
        }
    }
}

impl std::error::Error for InstanceError {}

impl From<MetricError> for InstanceError {
    fn from(e: MetricError) -> Self {
        InstanceError::Metric(e)
    }
}

impl From<std::io::Error> for InstanceError {
    fn from(e: std::io::Error) -> Self {
        InstanceError::Io(e)
    }
}

impl From<serde_json::Error> for InstanceError {
    fn from(e: serde_json::Error) -> Self {
        InstanceError::Json(e)
    }
}

/// Draws `n` links with senders uniform in a `world`-sided square and
/// receivers at a uniform angle and uniform distance in (0, d_max] from
/// their sender. Receivers may land outside the square; only the sender
/// positions are confined.
pub fn gen_random(config: &GenConfig) -> Result<Instance, InstanceError> {
    if !(config.d_max.is_finite() && config.d_max > 0.0) {
        return Err(InstanceError::BadConfig("d_max must be finite and positive"));
    }
    if !(config.world.is_finite() && config.world > 0.0) {
        return Err(InstanceError::BadConfig("world must be finite and positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut points = Vec::with_capacity(2 * config.n);
    let mut pairs = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let sx = rng.gen_range(0.0..config.world);
        let sy = rng.gen_range(0.0..config.world);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let radius = loop {
            // gen_range samples the half-open [0, d_max); rejecting an exact
            // zero keeps every link length positive, and a redraw is all but
            // unreachable in practice.
            let r = rng.gen_range(0.0..config.d_max);
            if r > 0.0 {
                break r;
            }
        };
        let s = points.len();
        points.push([sx, sy]);
        points.push([sx + radius * angle.cos(), sy + radius * angle.sin()]);
        pairs.push((s, s + 1));
    }
    Ok(Instance::new(MetricSpace::euclidean(points)?, &pairs)?)
}

/// Builds the worst-case cluster: link 0 has length `d` and
/// `floor((d/3)^alpha)` unit-length links sit with their senders at
/// distance `d/2` from link 0's sender.
///
/// Distances not pinned by the construction are shortest paths through the
/// pinned ones, which keeps the table a genuine metric. The resulting
/// geometry, under full path-loss-compensating power, lets link 0 alone
/// knock out every short link while the short links coexist with each
/// other — so the whole cluster is simultaneously feasible, yet any round
/// in which link 0 transmits wipes it out.
pub fn gen_blocker_cluster(d: f64, alpha: f64) -> Result<Instance, InstanceError> {
    if !(d.is_finite() && d >= 3.0) {
        return Err(InstanceError::BadConfig("blocker length must be finite and at least 3"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(InstanceError::BadConfig("alpha must be finite and positive"));
    }
    let k = (d / 3.0).powf(alpha).floor() as usize;
    // Points: 0 = s_0, 1 = r_0, then (2i, 2i+1) = (s_i, r_i) per short link.
    let n_points = 2 + 2 * k;
    let inf = f64::INFINITY;
    let mut table = vec![vec![inf; n_points]; n_points];
    let set = |t: &mut Vec<Vec<f64>>, i: usize, j: usize, v: f64| {
        t[i][j] = v;
        t[j][i] = v;
    };
    for (i, row) in table.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    set(&mut table, 0, 1, d);
    for i in 0..k {
        let s = 2 + 2 * i;
        set(&mut table, s, s + 1, 1.0);
        set(&mut table, 0, s, d / 2.0);
    }
    // Shortest-path closure fills in the unpinned pairs.
    for m in 0..n_points {
        for i in 0..n_points {
            for j in 0..n_points {
                let via = table[i][m] + table[m][j];
                if via < table[i][j] {
                    table[i][j] = via;
                }
            }
        }
    }
    let mut pairs = vec![(0, 1)];
    pairs.extend((0..k).map(|i| (2 + 2 * i, 3 + 2 * i)));
    Ok(Instance::new(MetricSpace::from_table(table)?, &pairs)?)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SpaceJson {
    Euclidean2d { points: Vec<[f64; 2]> },
    Matrix { d: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
struct LinkJson {
    s: usize,
    r: usize,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    space: SpaceJson,
    links: Vec<LinkJson>,
}

pub fn save_instance(path: &Path, inst: &Instance) -> Result<(), InstanceError> {
    let space = match inst.space() {
        MetricSpace::Euclidean2d { points } => SpaceJson::Euclidean2d { points: points.clone() },
        MetricSpace::Matrix { d } => SpaceJson::Matrix { d: d.clone() },
    };
    let links = inst
        .links()
        .iter()
        .map(|l| LinkJson { s: l.sender, r: l.receiver })
        .collect();
    let doc = InstanceJson { space, links };
    fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// Reads an instance back, re-validating the metric and the link endpoints.
pub fn load_instance(path: &Path) -> Result<Instance, InstanceError> {
    let doc: InstanceJson = serde_json::from_str(&fs::read_to_string(path)?)?;
    let space = match doc.space {
        SpaceJson::Euclidean2d { points } => MetricSpace::euclidean(points)?,
        SpaceJson::Matrix { d } => MetricSpace::from_table(d)?,
    };
    let pairs: Vec<(usize, usize)> = doc.links.iter().map(|l| (l.s, l.r)).collect();
    Ok(Instance::new(space, &pairs)?)
}
