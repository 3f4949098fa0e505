//! Numeric checkers for the structural guarantees the simulation relies on.
//!
//! Each check returns a [`Report`] instead of asserting, so the same code
//! backs unit tests, the acceptance suite, and the CLI's verification
//! subcommand. A failing report always carries concrete witnesses — the
//! links or pairs that broke the claim — and every report carries the key
//! quantities it measured, pass or fail.

use crate::game::GameStats;
use crate::metric::Instance;
use crate::sinr::AffectanceTable;

/// Slack allowed on the failure-fraction bound: the overload counter uses
/// the clipped affectance form, which can undercount SINR failures by the
/// rounds that sit exactly on the clipping boundary.
pub const FAILURE_TOL: f64 = 0.05;

/// Below this many rounds the tail statistics are noise; the
/// failure-fraction check reports instead of judging.
pub const MIN_ROUNDS_FOR_TAIL: usize = 200;

#[derive(Debug, Clone)]
pub struct Report {
    pub name: &'static str,
    pub pass: bool,
    /// Human-readable descriptions of every violation found; non-empty
    /// whenever `pass` is false.
    pub witnesses: Vec<String>,
    /// Named quantities measured during the check.
    pub metrics: Vec<(String, f64)>,
    pub note: Option<String>,
}

impl Report {
    fn finish(name: &'static str, witnesses: Vec<String>, metrics: Vec<(String, f64)>) -> Self {
        Report { name, pass: witnesses.is_empty(), witnesses, metrics, note: None }
    }

    /// The single number a CSV row summarizes this report by.
    pub fn key_metric(&self) -> f64 {
        self.metrics.first().map(|(_, v)| *v).unwrap_or(f64::NAN)
    }
}

/// At least half of any feasible set consists of links whose *outgoing*
/// affectance within the set is at most 2.
///
/// Feasibility bounds every link's incoming load by 1, so the total
/// affectance mass in the set is at most `|set|`, and by Markov's
/// inequality fewer than half the links can emit more than 2 of it.
pub fn check_half_set(set: &[usize], table: &AffectanceTable) -> Report {
    let mut witnesses = Vec::new();
    if !table.is_feasible(set) {
        witnesses.push("input set is not SINR-feasible; claim does not apply".into());
        return Report::finish("half_set", witnesses, vec![("set_size".into(), set.len() as f64)]);
    }
    let mut quiet = 0usize;
    let mut max_outgoing: f64 = 0.0;
    for &u in set {
        let outgoing = table.load_from(u, set);
        max_outgoing = max_outgoing.max(outgoing);
        if outgoing <= 2.0 {
            quiet += 1;
        }
    }
    if quiet * 2 < set.len() {
        witnesses.push(format!(
            "only {quiet} of {} links have outgoing affectance <= 2",
            set.len()
        ));
    }
    Report::finish(
        "half_set",
        witnesses,
        vec![
            ("half_set_size".into(), quiet as f64),
            ("set_size".into(), set.len() as f64),
            ("max_outgoing".into(), max_outgoing),
        ],
    )
}

/// Pairwise sender-receiver separation inside strengthened groups.
///
/// When a group passes the `q^alpha`-signal test and `beta >= 1`, each
/// cross affectance is at most `q^-alpha` unclipped, and multiplying the
/// two directions cancels the powers: `d(u->v) * d(v->u) >= q^2 *
/// l_u * l_v` for every pair in the group. This only holds with `beta >=
/// 1` (the affectance prefactor must be at least 1), so the check refuses
/// weaker configurations rather than reporting a vacuous pass.
pub fn check_separation(
    inst: &Instance,
    beta: f64,
    groups: &[Vec<usize>],
    q: f64,
) -> Report {
    let mut witnesses = Vec::new();
    let mut min_ratio = f64::INFINITY;
    if beta < 1.0 {
        witnesses.push(format!("separation bound needs beta >= 1, got {beta}"));
        return Report::finish("separation", witnesses, vec![("min_ratio".into(), f64::NAN)]);
    }
    for group in groups {
        for (i, &u) in group.iter().enumerate() {
            for &v in &group[i + 1..] {
                let bound = q * q * inst.links()[u].length * inst.links()[v].length;
                let prod = inst.cross_distance(u, v) * inst.cross_distance(v, u);
                min_ratio = min_ratio.min(prod / bound);
                if prod < bound * (1.0 - 1e-12) {
                    witnesses.push(format!(
                        "links {u} and {v}: distance product {prod:.6} < bound {bound:.6}"
                    ));
                }
            }
        }
    }
    if min_ratio.is_infinite() {
        min_ratio = f64::NAN; // no pair to measure
    }
    Report::finish("separation", witnesses, vec![("min_ratio".into(), min_ratio)])
}

/// The regret ledger adds up: total shortfall `Q - 2X` never exceeds the
/// summed regrets, which never exceed `n` times the worst link's regret.
pub fn check_sandwich(stats: &GameStats) -> Report {
    let n = stats.per_link.len() as f64;
    let total: f64 = stats.per_link.iter().map(|s| s.regret).sum();
    let worst = stats.per_link.iter().map(|s| s.regret).fold(0.0f64, f64::max);
    let shortfall = stats.q_total - 2.0 * stats.x_total;
    let mut witnesses = Vec::new();
    if shortfall > total + 1e-9 {
        witnesses.push(format!("shortfall Q-2X = {shortfall:.9} exceeds total regret {total:.9}"));
    }
    if total > n * worst + 1e-9 {
        witnesses.push(format!(
            "total regret {total:.9} exceeds n * max regret = {:.9}",
            n * worst
        ));
    }
    Report::finish(
        "sandwich",
        witnesses,
        vec![
            ("total_regret".into(), total),
            ("shortfall".into(), shortfall),
            ("max_regret".into(), worst),
        ],
    )
}

/// Low-regret links either transmit often or drown often: every link with
/// `q_u < 1/2 - regret_u` must see an overloaded round at least a quarter
/// of the time (minus [`FAILURE_TOL`] for the clipped-form undercount).
///
/// With fewer than [`MIN_ROUNDS_FOR_TAIL`] rounds the report always passes
/// but says so in its note — short horizons make the bound vacuous.
pub fn check_failure_fraction(stats: &GameStats, rounds: usize) -> Report {
    let mut witnesses = Vec::new();
    let mut high_q = 0usize;
    let mut min_f_rest = f64::INFINITY;
    for s in &stats.per_link {
        if s.q >= 0.5 - s.regret - 1e-12 {
            high_q += 1;
        } else {
            min_f_rest = min_f_rest.min(s.f);
            if s.f < 0.25 - FAILURE_TOL {
                witnesses.push(format!(
                    "link {}: q = {:.4}, regret = {:.4}, but failure fraction {:.4} < 0.2",
                    s.link, s.q, s.regret, s.f
                ));
            }
        }
    }
    if min_f_rest.is_infinite() {
        min_f_rest = f64::NAN;
    }
    let metrics = vec![
        ("high_q_links".into(), high_q as f64),
        ("min_failure_fraction_rest".into(), min_f_rest),
    ];
    if rounds < MIN_ROUNDS_FOR_TAIL {
        let mut r = Report::finish("failure_fraction", Vec::new(), metrics);
        r.note = Some(format!(
            "only {rounds} rounds (< {MIN_ROUNDS_FOR_TAIL}); tail statistics not judged"
        ));
        return r;
    }
    Report::finish("failure_fraction", witnesses, metrics)
}

/// Informational comparison of realized game throughput against the
/// exhaustive optimum, scaled by the diversity term the capacity bounds
/// are stated in.
///
/// `x_total` is the game's average successful transmissions per round and
/// `opt` the maximum simultaneous feasible set under the same power
/// scheme. The reference yardstick is `opt / max(1, log2(diversity))`.
/// Always passes — it measures, it does not judge.
pub fn opt_ratio_report(inst: &Instance, x_total: f64, opt: usize) -> Report {
    let delta = inst.delta();
    let log_delta = delta.log2().max(1.0);
    let yardstick = opt as f64 / log_delta;
    let ratio = if opt > 0 { x_total / opt as f64 } else { f64::NAN };
    Report {
        name: "opt_ratio",
        pass: true,
        witnesses: Vec::new(),
        metrics: vec![
            ("throughput_over_opt".into(), ratio),
            ("opt".into(), opt as f64),
            ("x_total".into(), x_total),
            ("log2_diversity".into(), log_delta),
            ("yardstick".into(), yardstick),
        ],
        note: Some("informational; no pass/fail judgement".into()),
    }
}
