//! One-shot scheduling baselines to compare the game dynamics against.
//!
//! Three families:
//!
//! * a greedy pass in non-decreasing length order that admits a link when
//!   the affectance it receives from the already-admitted set stays under a
//!   threshold `c`, plus the closed-form threshold for which the greedy is
//!   known to be safe at `alpha > 2`;
//! * a derived variant that searches over thresholds, keeping the best
//!   SINR-feasible set the greedy produces — useful when the closed-form
//!   constant is too conservative or `alpha <= 2` puts it out of reach;
//! * exact baselines: exhaustive search over subsets (fixed power scheme),
//!   and over subsets times a geometric power grid.
//!
//! Every result reports the SINR feasibility of the returned set as
//! checked, not assumed, so a caller can always trust `feasible`.

use crate::metric::Instance;
use crate::sinr::{
    assign_power, AffectanceTable, PowerAssignment, PowerScheme, SinrError, SinrParams,
};
use std::fmt;

/// Hard cap for [`brute_force_opt`]: 2^20 subsets is where exhaustive
/// search stops being interactive.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Hard cap for [`brute_force_opt_power`]: each link multiplies the search
/// by (grid levels + 1).
pub const BRUTE_FORCE_POWER_LIMIT: usize = 8;

/// Number of power levels in the [`brute_force_opt_power`] grid:
/// `p_max * 2^0 ..= p_max * 2^-10`.
pub const POWER_GRID_LEVELS: u32 = 11;

#[derive(Debug)]
pub enum ScheduleError {
    /// Exhaustive search refused: the instance exceeds the stated limit.
    TooLarge { n: usize, limit: usize },
    /// The closed-form admission threshold needs `alpha > 2`.
    ThresholdUndefined { alpha: f64 },
    Sinr(SinrError),
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::TooLarge { n, limit } => {
                write!(f, "exhaustive search limited to {limit} links, got {n}")
            }
            ScheduleError::ThresholdUndefined { alpha } => {
                write!(f, "admission threshold requires alpha > 2, got {alpha}")
            }
            ScheduleError::Sinr(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ScheduleError {}

impl From<SinrError> for ScheduleError {
    fn from(e: SinrError) -> Self {
        ScheduleError::Sinr(e)
    }
}

/// Outcome of a scheduling baseline.
#[derive(Debug, Clone)]
pub struct ScheduleResult {
    /// Admitted link ids, ascending.
    pub active: Vec<usize>,
    /// The power assignment the schedule was evaluated under.
    pub power: PowerAssignment,
    /// Whether `active` passes the SINR test under `power` — checked on the
    /// actual result, never assumed from the construction.
    pub feasible: bool,
    /// The admission threshold that produced this set, when one was used.
    pub threshold: Option<f64>,
}

/// Closed-form admission threshold that makes the greedy pass safe.
///
/// `c = 1 / (2 + max(2, (2^6 * 3 * beta * (alpha-1)/(alpha-2))^(1/alpha)))^alpha`,
/// defined for `alpha > 2`. The constant is deliberately conservative; the
/// threshold search below usually finds a far more permissive value.
pub fn admission_threshold(alpha: f64, beta: f64) -> Result<f64, ScheduleError> {
    if !(alpha.is_finite() && alpha > 2.0) {
        return Err(ScheduleError::ThresholdUndefined { alpha });
    }
    let inner = (64.0 * 3.0 * beta * (alpha - 1.0) / (alpha - 2.0)).powf(1.0 / alpha);
    Ok((2.0 + inner.max(2.0)).powf(alpha).recip())
}

/// Greedy admission in non-decreasing length order (ties by id): a link
/// joins when the total clipped affectance it receives from the links
/// admitted so far is at most `c`.
pub fn hw_greedy(
    inst: &Instance,
    params: &SinrParams,
    scheme: &PowerScheme,
    c: f64,
) -> Result<ScheduleResult, ScheduleError> {
    let power = assign_power(scheme, inst, params)?;
    let table = AffectanceTable::new(inst, &power, params)?;
    let mut order: Vec<usize> = (0..inst.len()).collect();
    order.sort_by(|&a, &b| {
        table.length(a).partial_cmp(&table.length(b)).unwrap().then(a.cmp(&b))
    });
    let mut active: Vec<usize> = Vec::new();
    for v in order {
        let incoming: f64 = active.iter().map(|&w| table.clipped(w, v)).sum();
        if incoming <= c {
            active.push(v);
        }
    }
    active.sort_unstable();
    let feasible = table.is_feasible(&active);
    Ok(ScheduleResult { active, power, feasible, threshold: Some(c) })
}

/// Runs the greedy across a grid of thresholds and refines around the best
/// one, returning the largest SINR-feasible set seen.
///
/// The grid is 25 points log-spaced on [1e-6, 1], plus the closed-form
/// constant when it is defined. Refinement bisects (in log space) the two
/// grid gaps flanking the winner for 20 more evaluations. The admitted-set
/// size is a step function of the threshold, so this is a heuristic sweep
/// rather than a convergent search — but only feasibility-checked sets are
/// ever returned, making the output safe for any threshold.
pub fn hw_binary_search(
    inst: &Instance,
    params: &SinrParams,
    scheme: &PowerScheme,
) -> Result<ScheduleResult, ScheduleError> {
    const GRID: usize = 25;
    const REFINE: usize = 20;
    let mut candidates: Vec<f64> = (0..GRID)
        .map(|i| {
            let t = i as f64 / (GRID - 1) as f64;
            10f64.powf(-6.0 * (1.0 - t))
        })
        .collect();
    if let Ok(c) = admission_threshold(params.alpha, params.beta) {
        if (1e-6..=1.0).contains(&c) {
            candidates.push(c);
        }
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut best: Option<ScheduleResult> = None;
    let mut best_idx = 0usize;
    for (i, &c) in candidates.iter().enumerate() {
        let r = hw_greedy(inst, params, scheme, c)?;
        if r.feasible && best.as_ref().is_none_or(|b| r.active.len() > b.active.len()) {
            best = Some(r);
            best_idx = i;
        }
    }

    if best.is_some() {
        let lo = if best_idx == 0 { 1e-7 } else { candidates[best_idx - 1] };
        let hi = if best_idx + 1 == candidates.len() {
            1.0
        } else {
            candidates[best_idx + 1]
        };
        let (llo, lhi) = (lo.ln(), hi.ln());
        for j in 1..=REFINE {
            let c = (llo + (lhi - llo) * j as f64 / (REFINE + 1) as f64).exp();
            let r = hw_greedy(inst, params, scheme, c)?;
            if r.feasible && r.active.len() > best.as_ref().unwrap().active.len() {
                best = Some(r);
            }
        }
    }

    Ok(best.unwrap_or_else(|| {
        // Even a single link can be infeasible (noise-dominated), in which
        // case the empty schedule is the only safe answer.
        ScheduleResult {
            active: Vec::new(),
            power: PowerAssignment {
                scheme: scheme.clone(),
                powers: vec![params.p_max; inst.len()],
            },
            feasible: true,
            threshold: None,
        }
    }))
}

/// Received power at `v`'s receiver from `w`'s sender per unit of transmit
/// power, pre-clipping. Multiply by the transmit power, then apply the
/// bounded-model cap if active.
fn unit_gain_table(inst: &Instance, params: &SinrParams) -> Vec<Vec<f64>> {
    let n = inst.len();
    let mut g = vec![vec![0.0; n]; n];
    for (w, row) in g.iter_mut().enumerate() {
        for (v, cell) in row.iter_mut().enumerate() {
            if w != v {
                *cell = inst.cross_distance(w, v).powf(params.alpha).recip();
            }
        }
    }
    g
}

struct SubsetSearch<'a> {
    table: &'a AffectanceTable,
    beta: f64,
    noise: f64,
    n: usize,
    best: Vec<usize>,
}

impl SubsetSearch<'_> {
    /// Depth-first over include/exclude decisions in id order, include
    /// first. `interf` carries the interference every link would receive
    /// from the current set, so both pruning checks are incremental:
    /// interference only grows along a branch, and a branch dies as soon as
    /// the remaining links cannot beat the incumbent.
    fn dfs(&mut self, i: usize, current: &mut Vec<usize>, interf: &mut Vec<f64>) {
        if current.len() + (self.n - i) <= self.best.len() {
            return;
        }
        if i == self.n {
            // Guarded above: reaching here means strictly larger.
            self.best = current.clone();
            return;
        }
        // Include i if every admitted link, i itself included, still meets
        // the SINR condition with i's interference added.
        let ok = self.table.signal(i) >= self.beta * (interf[i] + self.noise)
            && current.iter().all(|&v| {
                self.table.signal(v)
                    >= self.beta * (interf[v] + self.table.recv(i, v) + self.noise)
            });
        if ok {
            for (u, acc) in interf.iter_mut().enumerate() {
                *acc += self.table.recv(i, u);
            }
            current.push(i);
            self.dfs(i + 1, current, interf);
            current.pop();
            for (u, acc) in interf.iter_mut().enumerate() {
                *acc -= self.table.recv(i, u);
            }
        }
        self.dfs(i + 1, current, interf);
    }
}

/// Exhaustive maximum feasible subset under a fixed power scheme.
///
/// Returns the first maximum-cardinality set in include-first DFS order,
/// which makes the result deterministic. Instances above
/// [`BRUTE_FORCE_LIMIT`] links are refused.
pub fn brute_force_opt(
    inst: &Instance,
    params: &SinrParams,
    scheme: &PowerScheme,
) -> Result<ScheduleResult, ScheduleError> {
    let n = inst.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(ScheduleError::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let power = assign_power(scheme, inst, params)?;
    let table = AffectanceTable::new(inst, &power, params)?;
    let mut search = SubsetSearch {
        table: &table,
        beta: params.beta,
        noise: params.noise,
        n,
        best: Vec::new(),
    };
    search.dfs(0, &mut Vec::new(), &mut vec![0.0; n]);
    let active = search.best;
    let feasible = table.is_feasible(&active);
    Ok(ScheduleResult { active, power, feasible, threshold: None })
}

struct PowerSearch<'a> {
    inst: &'a Instance,
    params: &'a SinrParams,
    gain: Vec<Vec<f64>>,
    levels: Vec<f64>,
    n: usize,
    best: Vec<Option<f64>>,
    best_count: usize,
}

impl PowerSearch<'_> {
    fn signal(&self, v: usize, p: f64) -> f64 {
        let raw = p * self.inst.links()[v].length.powf(self.params.alpha).recip();
        match self.params.model {
            crate::sinr::Model::Bounded => raw.min(1.0),
            crate::sinr::Model::Unbounded => raw,
        }
    }

    fn recv(&self, w: usize, v: usize, p: f64) -> f64 {
        let raw = p * self.gain[w][v];
        match self.params.model {
            crate::sinr::Model::Bounded => raw.min(1.0),
            crate::sinr::Model::Unbounded => raw,
        }
    }

    fn dfs(&mut self, i: usize, chosen: &mut Vec<Option<f64>>, interf: &mut Vec<f64>) {
        let on_so_far = chosen.iter().flatten().count();
        if on_so_far + (self.n - i) <= self.best_count {
            return;
        }
        if i == self.n {
            self.best = chosen.clone();
            self.best_count = on_so_far;
            return;
        }
        for li in 0..self.levels.len() {
            let p = self.levels[li];
            let ok = self.signal(i, p) >= self.params.beta * (interf[i] + self.params.noise)
                && chosen.iter().enumerate().all(|(v, &pv)| match pv {
                    Some(pv) => {
                        self.signal(v, pv)
                            >= self.params.beta
                                * (interf[v] + self.recv(i, v, p) + self.params.noise)
                    }
                    None => true,
                });
            if ok {
                for (u, acc) in interf.iter_mut().enumerate() {
                    *acc += self.recv(i, u, p);
                }
                chosen.push(Some(p));
                self.dfs(i + 1, chosen, interf);
                chosen.pop();
                for (u, acc) in interf.iter_mut().enumerate() {
                    *acc -= self.recv(i, u, p);
                }
            }
        }
        chosen.push(None);
        self.dfs(i + 1, chosen, interf);
        chosen.pop();
    }
}

/// Exhaustive maximum feasible subset when every link may also pick its
/// transmit power from the geometric grid `p_max * 2^0 ..= 2^-10`.
///
/// The grid discretizes a continuous choice, so the result is a certified
/// lower bound on the true power-controlled optimum — good enough to
/// demonstrate separations from fixed-power scheduling. Powers are tried
/// high to low, then "off"; the first maximum found wins, keeping the
/// result deterministic. Links left off are reported at `p_max` in the
/// returned assignment but are not part of `active`.
pub fn brute_force_opt_power(
    inst: &Instance,
    params: &SinrParams,
) -> Result<ScheduleResult, ScheduleError> {
    let n = inst.len();
    if n > BRUTE_FORCE_POWER_LIMIT {
        return Err(ScheduleError::TooLarge { n, limit: BRUTE_FORCE_POWER_LIMIT });
    }
    params.validate()?;
    let levels: Vec<f64> =
        (0..POWER_GRID_LEVELS).map(|k| params.p_max * 0.5f64.powi(k as i32)).collect();
    let mut search = PowerSearch {
        inst,
        params,
        gain: unit_gain_table(inst, params),
        levels,
        n,
        best: vec![None; n],
        best_count: 0,
    };
    search.dfs(0, &mut Vec::new(), &mut vec![0.0; n]);

    let active: Vec<usize> =
        (0..n).filter(|&v| search.best.get(v).copied().flatten().is_some()).collect();
    let powers: Vec<f64> = (0..n)
        .map(|v| search.best.get(v).copied().flatten().unwrap_or(params.p_max))
        .collect();
    let power = assign_power(&PowerScheme::Explicit(powers), inst, params)?;
    let table = AffectanceTable::new(inst, &power, params)?;
    let feasible = table.is_feasible(&active);
    Ok(ScheduleResult { active, power, feasible, threshold: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_blocker_cluster, gen_random, GenConfig};
    use crate::metric::MetricSpace;
    use crate::sinr::is_feasible;

    fn line_instance() -> Instance {
        // Three links on a line with lengths 1, 2, 4. Chosen so that, at
        // threshold 1/2 with uniform power (alpha 2, beta 1, no noise), the
        // greedy admits link 0, rejects link 1 (incoming load exactly 1),
        // and admits link 2 (incoming load (4/6)^2 ~ 0.44).
        let pts = vec![
            [0.0, 0.0],
            [1.0, 0.0], // link 0: length 1
            [4.0, 0.0],
            [2.0, 0.0], // link 1: length 2, receiver 2 from s_0
            [10.0, 0.0],
            [6.0, 0.0], // link 2: length 4, receiver 6 from s_0
        ];
        Instance::new(MetricSpace::euclidean(pts).unwrap(), &[(0, 1), (2, 3), (4, 5)]).unwrap()
    }

    fn p(alpha: f64, beta: f64) -> SinrParams {
        SinrParams { alpha, beta, noise: 0.0, ..SinrParams::default() }
    }

    #[test]
    fn threshold_matches_closed_form() {
        // alpha=3, beta=1: (64*3*2/1)^(1/3) = 384^(1/3), c = (2 + 384^(1/3))^-3.
        let c = admission_threshold(3.0, 1.0).unwrap();
        let expect = (2.0 + 384f64.powf(1.0 / 3.0)).powi(-3);
        assert!((c - expect).abs() < 1e-18);
        assert!((1.2e-3..1.3e-3).contains(&c), "c = {c}");
        // Low beta floors the inner term at 2.
        let tiny = admission_threshold(3.0, 1e-9).unwrap();
        assert_eq!(tiny, 4f64.powi(-3));
        assert!(matches!(
            admission_threshold(2.0, 1.0),
            Err(ScheduleError::ThresholdUndefined { .. })
        ));
    }

    #[test]
    fn greedy_admits_by_length_order_and_incoming_load() {
        let inst = line_instance();
        let params = p(2.0, 1.0);
        let r = hw_greedy(&inst, &params, &PowerScheme::Uniform, 0.5).unwrap();
        assert_eq!(r.active, vec![0, 2]);
        assert!(r.feasible);
        assert_eq!(r.threshold, Some(0.5));
        // A permissive threshold admits everything; the result is then
        // honestly reported as infeasible.
        let all = hw_greedy(&inst, &params, &PowerScheme::Uniform, 2.0).unwrap();
        assert_eq!(all.active, vec![0, 1, 2]);
        assert!(!all.feasible);
        // A zero threshold admits only the first link in length order.
        let one = hw_greedy(&inst, &params, &PowerScheme::Uniform, 0.0).unwrap();
        assert_eq!(one.active, vec![0]);
        assert!(one.feasible);
    }

    #[test]
    fn brute_force_finds_the_two_link_optimum() {
        let inst = line_instance();
        let params = p(2.0, 1.0);
        let r = brute_force_opt(&inst, &params, &PowerScheme::Uniform).unwrap();
        // {0,1} and {0,2} are both feasible maxima; include-first DFS finds
        // {0,1} first and only strict improvements replace it.
        assert_eq!(r.active, vec![0, 1]);
        assert!(r.feasible);
        assert!(is_feasible(&r.active, &inst, &r.power, &params));
    }

    #[test]
    fn brute_force_respects_the_power_scheme() {
        let inst = gen_blocker_cluster(9.0, 2.0).unwrap();
        let params = p(2.0, 1.0);
        let r = brute_force_opt(&inst, &params, &PowerScheme::Linear).unwrap();
        // The blocker suppresses every short link, so the optimum is all
        // nine shorts without it.
        assert_eq!(r.active, (1..=9).collect::<Vec<_>>());
        assert!(r.feasible);
    }

    #[test]
    fn brute_force_handles_blockers_and_empty() {
        // Mutual blockers: only one can live.
        let table = vec![
            vec![0.0, 1.0, 0.5, 0.5],
            vec![1.0, 0.0, 0.5, 0.5],
            vec![0.5, 0.5, 0.0, 1.0],
            vec![0.5, 0.5, 1.0, 0.0],
        ];
        let inst =
            Instance::new(MetricSpace::from_table(table).unwrap(), &[(0, 1), (2, 3)]).unwrap();
        let params = p(2.0, 1.0);
        let r = brute_force_opt(&inst, &params, &PowerScheme::Uniform).unwrap();
        assert_eq!(r.active, vec![0]);
        let empty = Instance::new(MetricSpace::euclidean(vec![]).unwrap(), &[]).unwrap();
        let r = brute_force_opt(&empty, &params, &PowerScheme::Uniform).unwrap();
        assert!(r.active.is_empty());
        assert!(r.feasible);
    }

    #[test]
    fn exhaustive_searches_refuse_large_instances() {
        let inst = gen_random(&GenConfig { n: 21, d_max: 10.0, world: 100.0, seed: 0 }).unwrap();
        assert!(matches!(
            brute_force_opt(&inst, &p(2.1, 0.5), &PowerScheme::Uniform),
            Err(ScheduleError::TooLarge { n: 21, limit: 20 })
        ));
        let inst9 = gen_random(&GenConfig { n: 9, d_max: 10.0, world: 100.0, seed: 0 }).unwrap();
        assert!(matches!(
            brute_force_opt_power(&inst9, &p(2.1, 0.5)),
            Err(ScheduleError::TooLarge { n: 9, limit: 8 })
        ));
    }

    /// Two identical well-separated clusters, each holding a short link and
    /// a long link whose receiver sits close to the short link's sender.
    /// Under any uniform power only one link per cluster survives, but
    /// turning the short links down to p_max/128 lets all four coexist.
    fn power_separation_instance() -> Instance {
        let mut pts = Vec::new();
        for off in [0.0, 10_000.0] {
            pts.push([off, 0.0]);
            pts.push([off + 1.0, 0.0]); // short link, length 1
            pts.push([off + 21.0, 0.0]);
            pts.push([off + 2.0, 0.0]); // long link, length 19
        }
        let pairs = vec![(0, 1), (2, 3), (4, 5), (6, 7)];
        Instance::new(MetricSpace::euclidean(pts).unwrap(), &pairs).unwrap()
    }

    #[test]
    fn power_control_beats_every_uniform_level() {
        let inst = power_separation_instance();
        let params = p(2.0, 1.0);
        let uni = brute_force_opt(&inst, &params, &PowerScheme::Uniform).unwrap();
        assert_eq!(uni.active.len(), 2);
        let pc = brute_force_opt_power(&inst, &params).unwrap();
        assert_eq!(pc.active, vec![0, 1, 2, 3]);
        assert!(pc.feasible);
        // The short links run well below the long ones.
        assert!(pc.power.powers[0] < pc.power.powers[1]);
        assert!(pc.power.powers[2] < pc.power.powers[3]);
    }

    #[test]
    fn threshold_search_never_loses_to_the_closed_form_greedy() {
        let params = p(3.1, 1.0);
        let c = admission_threshold(3.1, 1.0).unwrap();
        for seed in 0..20 {
            let inst =
                gen_random(&GenConfig { n: 12, d_max: 10.0, world: 100.0, seed }).unwrap();
            let fixed = hw_greedy(&inst, &params, &PowerScheme::Mean, c).unwrap();
            let searched = hw_binary_search(&inst, &params, &PowerScheme::Mean).unwrap();
            assert!(searched.feasible);
            let fixed_count = if fixed.feasible { fixed.active.len() } else { 0 };
            assert!(
                searched.active.len() >= fixed_count,
                "seed {seed}: search {} < fixed {}",
                searched.active.len(),
                fixed_count
            );
        }
    }

    #[test]
    fn threshold_search_stays_at_or_below_brute_force() {
        let params = p(2.5, 1.0);
        for seed in 100..120 {
            let inst =
                gen_random(&GenConfig { n: 10, d_max: 10.0, world: 60.0, seed }).unwrap();
            let searched = hw_binary_search(&inst, &params, &PowerScheme::Uniform).unwrap();
            let opt = brute_force_opt(&inst, &params, &PowerScheme::Uniform).unwrap();
            assert!(searched.active.len() <= opt.active.len(), "seed {seed}");
            assert!(searched.feasible);
        }
    }
}
