//! The physical interference model: power assignments, affectance,
//! feasibility, and signal strengthening.
//!
//! A transmission on link `v` with power `P_v` succeeds against a
//! transmitting set `S` when
//!
//! ```text
//!     S_v / (sum_{w in S \ {v}} I_w(v)  +  N)  >=  beta
//! ```
//!
//! where `S_v` is the signal power received on `v` (`P_v / len_v^alpha`) and
//! `I_w(v)` is the interference power `w`'s sender delivers to `v`'s receiver
//! (`P_w / d_wv^alpha`, with `d_wv` the sender-of-`w` to receiver-of-`v`
//! distance). Ties count as success. Under the *bounded* signal model every
//! received power is additionally capped at 1 before use.
//!
//! The same condition has a useful additive form. Define the **affectance**
//! of `w` on `v`
//!
//! ```text
//!     a_w(v) = min{ 1, c_v * I_w(v) / S_v },    c_v = beta / (1 - beta*N/S_v),
//! ```
//!
//! with `a_v(v) = 0`. Without the clipping, `sum_{w in S} a_w(v) <= 1` is
//! *exactly* the SINR condition; a clipped term means some single interferer
//! already exceeds the budget, so the set is infeasible either way. A set is
//! a `delta`-signal set when every member's incoming affectance load is at
//! most `1/delta`; feasible = 1-signal.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metric::Instance;

/// Whether received powers are used as-is or capped at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Unbounded,
    Bounded,
}

/// Global model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrParams {
    /// Path-loss exponent, > 0.
    pub alpha: f64,
    /// Success threshold, > 0 (values below 1 are accepted).
    pub beta: f64,
    /// Ambient noise power, >= 0.
    #[serde(default)]
    pub noise: f64,
    /// Maximum transmission power, > 0.
    #[serde(default = "default_p_max")]
    pub p_max: f64,
    #[serde(default)]
    pub model: Model,
    /// When set, [`c_factor`] rejects links whose noise headroom is below
    /// half the budget (`c_v > 2*beta`). Off by default.
    #[serde(default)]
    pub strict_margin: bool,
}

fn default_p_max() -> f64 {
    1.0
}

impl Default for SinrParams {
    /// The canonical simulation setup: `alpha = 2.1`, `beta = 0.5`, zero
    /// noise, unit power cap, unbounded model.
    fn default() -> Self {
        SinrParams {
            alpha: 2.1,
            beta: 0.5,
            noise: 0.0,
            p_max: 1.0,
            model: Model::Unbounded,
            strict_margin: false,
        }
    }
}

impl SinrParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        SinrParams { alpha, beta, ..SinrParams::default() }
    }

    pub fn validate(&self) -> Result<(), SinrError> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(SinrError::BadParams("alpha must be finite and > 0"));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(SinrError::BadParams("beta must be finite and > 0"));
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return Err(SinrError::BadParams("noise must be finite and >= 0"));
        }
        if !self.p_max.is_finite() || self.p_max <= 0.0 {
            return Err(SinrError::BadParams("p_max must be finite and > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SinrError {
    BadParams(&'static str),
    /// Explicit power outside `(0, p_max]`.
    PowerOutOfRange { link: usize, value: f64, p_max: f64 },
    /// Explicit power vector length does not match the instance.
    PowerCountMismatch { expected: usize, got: usize },
    /// `beta * noise >= S_v`: the link cannot clear the threshold even alone,
    /// and its affectance factor `c_v` is undefined.
    NoiseInfeasible { link: usize },
    /// Strict mode only: `c_v` exceeds `2*beta`.
    MarginExceeded { link: usize, c: f64, limit: f64 },
    /// `strengthen` requires a feasible input set.
    InfeasibleInput,
    /// `strengthen` requires a factor `t >= 1`.
    BadFactor { t: f64 },
}

impl fmt::Display for SinrError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SinrError::BadParams(msg) => write!(f, "invalid parameters: {msg}"),
            SinrError::PowerOutOfRange { link, value, p_max } => {
                write!(f, "power {value} for link {link} is outside (0, {p_max}]")
            }
            SinrError::PowerCountMismatch { expected, got } => {
                write!(f, "expected {expected} powers, got {got}")
            }
            SinrError::NoiseInfeasible { link } => {
                write!(f, "link {link} cannot overcome ambient noise even without interference")
            }
            SinrError::MarginExceeded { link, c, limit } => {
                write!(f, "link {link} has affectance factor {c} above the strict limit {limit}")
            }
            SinrError::InfeasibleInput => write!(f, "input set is not feasible"),
            SinrError::BadFactor { t } => write!(f, "strengthening factor {t} must be >= 1"),
        }
    }
}

impl std::error::Error for SinrError {}

/// How per-link transmission powers are chosen.
///
/// The two length-compensating schemes scale with the path loss: `Linear`
/// cancels it completely (`P ∝ len^alpha`, every link receives the same
/// signal power), `Mean` cancels half the exponent (`P ∝ len^(alpha/2)`, the
/// geometric middle between `Uniform` and `Linear`). Both are normalized so
/// the longest link transmits at `p_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerScheme {
    Uniform,
    Linear,
    Mean,
    Explicit(Vec<f64>),
}

impl PowerScheme {
    /// Stable lowercase tag for file output.
    pub fn name(&self) -> &'static str {
        match self {
            PowerScheme::Uniform => "uniform",
            PowerScheme::Linear => "linear",
            PowerScheme::Mean => "mean",
            PowerScheme::Explicit(_) => "explicit",
        }
    }
}

/// Per-link powers, all in `(0, p_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAssignment {
    pub scheme: PowerScheme,
    pub powers: Vec<f64>,
}

/// Evaluates a scheme on an instance.
pub fn assign_power(
    scheme: &PowerScheme,
    instance: &Instance,
    params: &SinrParams,
) -> Result<PowerAssignment, SinrError> {
    params.validate()?;
    let n = instance.len();
    let l_max = instance.l_max();
    let powers: Vec<f64> = match scheme {
        PowerScheme::Uniform => vec![params.p_max; n],
        PowerScheme::Linear => instance
            .links()
            .iter()
            .map(|l| params.p_max * (l.length / l_max).powf(params.alpha))
            .collect(),
        PowerScheme::Mean => instance
            .links()
            .iter()
            .map(|l| params.p_max * (l.length / l_max).powf(params.alpha / 2.0))
            .collect(),
        PowerScheme::Explicit(p) => {
            if p.len() != n {
                return Err(SinrError::PowerCountMismatch { expected: n, got: p.len() });
            }
            for (i, &v) in p.iter().enumerate() {
                if !v.is_finite() || v <= 0.0 || v > params.p_max {
                    return Err(SinrError::PowerOutOfRange { link: i, value: v, p_max: params.p_max });
                }
            }
            p.clone()
        }
    };
    Ok(PowerAssignment { scheme: scheme.clone(), powers })
}

/// Received power of a transmission with power `p` over distance `d`.
/// Distance zero yields `+inf` (unbounded) or the cap 1 (bounded).
fn received(p: f64, d: f64, alpha: f64, model: Model) -> f64 {
    let r = p / d.powf(alpha);
    match model {
        Model::Unbounded => r,
        Model::Bounded => r.min(1.0),
    }
}

/// The affectance scaling factor `c_v = beta / (1 - beta*N/S_v)`.
///
/// Errors when the denominator is not positive (the link cannot beat the
/// noise floor alone) and, in strict mode, when `c_v > 2*beta` (less than
/// half the signal budget left over the noise).
pub fn c_factor(
    v: usize,
    instance: &Instance,
    power: &PowerAssignment,
    params: &SinrParams,
) -> Result<f64, SinrError> {
    params.validate()?;
    let link = &instance.links()[v];
    let signal = received(power.powers[v], link.length, params.alpha, params.model);
    let denom = 1.0 - params.beta * params.noise / signal;
    if denom <= 0.0 {
        return Err(SinrError::NoiseInfeasible { link: v });
    }
    let c = params.beta / denom;
    if params.strict_margin && c > 2.0 * params.beta {
        return Err(SinrError::MarginExceeded { link: v, c, limit: 2.0 * params.beta });
    }
    Ok(c)
}

/// Affectance of `w` on `v`: `min{1, c_v * I_w(v)/S_v}`, zero for `w == v`.
pub fn affectance(
    w: usize,
    v: usize,
    instance: &Instance,
    power: &PowerAssignment,
    params: &SinrParams,
) -> Result<f64, SinrError> {
    if w == v {
        return Ok(0.0);
    }
    let c = c_factor(v, instance, power, params)?;
    let link_v = &instance.links()[v];
    let signal = received(power.powers[v], link_v.length, params.alpha, params.model);
    let interf = received(power.powers[w], instance.cross_distance(w, v), params.alpha, params.model);
    Ok((c * (interf / signal)).min(1.0))
}

/// Total incoming affectance on `v` from a transmitting set (members equal to
/// `v` contribute zero).
pub fn affectance_load(
    v: usize,
    set: &[usize],
    instance: &Instance,
    power: &PowerAssignment,
    params: &SinrParams,
) -> Result<f64, SinrError> {
    let mut sum = 0.0;
    for &u in set {
        sum += affectance(u, v, instance, power, params)?;
    }
    Ok(sum)
}

/// SINR of `v` against the transmitting set `set` (which must contain `v`).
/// `+inf` when there is neither interference nor noise.
pub fn sinr_ratio(
    v: usize,
    set: &[usize],
    instance: &Instance,
    power: &PowerAssignment,
    params: &SinrParams,
) -> f64 {
    debug_assert!(set.contains(&v), "sinr_ratio: v must be in the transmitting set");
    let link_v = &instance.links()[v];
    let signal = received(power.powers[v], link_v.length, params.alpha, params.model);
    let mut interf = 0.0;
    for &w in set {
        if w != v {
            interf += received(power.powers[w], instance.cross_distance(w, v), params.alpha, params.model);
        }
    }
    signal / (interf + params.noise)
}

/// Whether every member of `set` clears the SINR threshold when the whole set
/// transmits. The empty set is vacuously feasible.
pub fn is_feasible(
    set: &[usize],
    instance: &Instance,
    power: &PowerAssignment,
    params: &SinrParams,
) -> bool {
    set.iter().all(|&v| {
        let link_v = &instance.links()[v];
        let signal = received(power.powers[v], link_v.length, params.alpha, params.model);
        let mut interf = 0.0;
        for &w in set {
            if w != v {
                interf +=
                    received(power.powers[w], instance.cross_distance(w, v), params.alpha, params.model);
            }
        }
        signal >= params.beta * (interf + params.noise)
    })
}

/// Length diversity used by diversity-dependent bounds: `l_max / l_min`
/// unbounded, `l_max / max(1, l_min)` bounded.
pub fn effective_delta(instance: &Instance, params: &SinrParams) -> f64 {
    match params.model {
        Model::Unbounded => instance.delta(),
        Model::Bounded => instance.l_max() / instance.l_min().max(1.0),
    }
}

/// Precomputed pairwise tables for one `(instance, power, params)` triple.
///
/// Read-only after construction; all the batch code paths (game rounds,
/// greedy admission, checkers) share one table instead of recomputing
/// `O(n^2)` distances per query. Links that cannot beat the noise floor get
/// `c = +inf` so their incoming raw affectance is infinite; feasibility
/// queries go through the received-power form and stay exact.
pub struct AffectanceTable {
    n: usize,
    beta: f64,
    noise: f64,
    /// Link lengths, for length-ordered algorithms.
    lengths: Vec<f64>,
    /// Received signal power `S_v`.
    signal: Vec<f64>,
    /// `c_v`, or `+inf` when `beta*noise >= S_v`.
    c: Vec<f64>,
    /// Row-major `I_w(v)`: `recv[w*n + v]`, diagonal zero.
    recv: Vec<f64>,
    /// Row-major unclipped affectance `a_w(v)` before the `min{1,·}`.
    raw: Vec<f64>,
}

impl AffectanceTable {
    pub fn new(
        instance: &Instance,
        power: &PowerAssignment,
        params: &SinrParams,
    ) -> Result<Self, SinrError> {
        params.validate()?;
        let n = instance.len();
        if power.powers.len() != n {
            return Err(SinrError::PowerCountMismatch { expected: n, got: power.powers.len() });
        }
        for (i, &p) in power.powers.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(SinrError::PowerOutOfRange { link: i, value: p, p_max: params.p_max });
            }
        }
        let mut signal = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        let mut lengths = Vec::with_capacity(n);
        for (v, link) in instance.links().iter().enumerate() {
            let s = received(power.powers[v], link.length, params.alpha, params.model);
            let denom = 1.0 - params.beta * params.noise / s;
            c.push(if denom > 0.0 { params.beta / denom } else { f64::INFINITY });
            signal.push(s);
            lengths.push(link.length);
        }
        let mut recv = vec![0.0; n * n];
        let mut raw = vec![0.0; n * n];
        for w in 0..n {
            for v in 0..n {
                if w == v {
                    continue;
                }
                let i_wv = received(
                    power.powers[w],
                    instance.cross_distance(w, v),
                    params.alpha,
                    params.model,
                );
                recv[w * n + v] = i_wv;
                raw[w * n + v] = c[v] * (i_wv / signal[v]);
            }
        }
        Ok(AffectanceTable {
            n,
            beta: params.beta,
            noise: params.noise,
            lengths,
            signal,
            c,
            recv,
            raw,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Length of link `v`.
    pub fn length(&self, v: usize) -> f64 {
        self.lengths[v]
    }

    /// Success threshold the table was built with.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn signal(&self, v: usize) -> f64 {
        self.signal[v]
    }

    /// `c_v`; `+inf` for noise-infeasible links.
    pub fn c(&self, v: usize) -> f64 {
        self.c[v]
    }

    /// Unclipped affectance of `w` on `v`.
    pub fn raw(&self, w: usize, v: usize) -> f64 {
        self.raw[w * self.n + v]
    }

    /// Received power at `v`'s receiver from `w`'s sender (0 for `w == v`),
    /// with the bounded-model cap already applied.
    pub fn recv(&self, w: usize, v: usize) -> f64 {
        self.recv[w * self.n + v]
    }

    /// Affectance of `w` on `v` (clipped at 1).
    pub fn clipped(&self, w: usize, v: usize) -> f64 {
        self.raw[w * self.n + v].min(1.0)
    }

    /// Incoming affectance load on `v` from `set`.
    pub fn load_on(&self, v: usize, set: &[usize]) -> f64 {
        set.iter().map(|&u| self.clipped(u, v)).sum()
    }

    /// Outgoing affectance of `u` summed over `set`.
    pub fn load_from(&self, u: usize, set: &[usize]) -> f64 {
        set.iter().map(|&v| self.clipped(u, v)).sum()
    }

    /// True when some single member of `set` already clips on `v`.
    pub fn any_clipped_on(&self, v: usize, set: &[usize]) -> bool {
        set.iter().any(|&u| self.raw(u, v) > 1.0)
    }

    /// Interference power at `v`'s receiver from `set` (skipping `v` itself).
    pub fn interference(&self, v: usize, set: &[usize]) -> f64 {
        set.iter().filter(|&&w| w != v).map(|&w| self.recv[w * self.n + v]).sum()
    }

    /// SINR success test for `v` against interference from `others` (any
    /// occurrence of `v` in `others` is ignored). Ties succeed.
    pub fn would_succeed(&self, v: usize, others: &[usize]) -> bool {
        self.signal[v] >= self.beta * (self.interference(v, others) + self.noise)
    }

    /// SINR of `v` within the transmitting set `set` (must contain `v`).
    pub fn sinr_ratio(&self, v: usize, set: &[usize]) -> f64 {
        debug_assert!(set.contains(&v));
        self.signal[v] / (self.interference(v, set) + self.noise)
    }

    /// Every member clears the threshold when the whole set transmits.
    pub fn is_feasible(&self, set: &[usize]) -> bool {
        set.iter().all(|&v| self.would_succeed(v, set))
    }

    /// Every member's incoming load is at most `1/delta`.
    pub fn is_delta_signal(&self, set: &[usize], delta: f64) -> bool {
        debug_assert!(delta > 0.0);
        let budget = 1.0 / delta;
        set.iter().all(|&v| self.load_on(v, set) <= budget)
    }

    /// Maximum incoming load over the set's members.
    pub fn max_load(&self, set: &[usize]) -> f64 {
        set.iter().map(|&v| self.load_on(v, set)).fold(0.0, f64::max)
    }
}

/// Result of [`strengthen`]: disjoint groups covering the input set.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub groups: Vec<Vec<usize>>,
    /// The guaranteed-sufficient bin count `ceil(2*t/beta)`.
    pub target_count: usize,
    /// Set when first-fit used more groups than `target_count`.
    pub over_target: bool,
}

/// Splits a feasible set into `t`-signal groups (per-member in-group load at
/// most `1/t`).
///
/// Links are placed first-fit in non-increasing length order (ties by id);
/// each candidate group is accepted only if *every* member's in-group load,
/// including the newcomer's, stays within `1/t` — checked incrementally. The
/// number of groups is compared against `ceil(2*t/beta)` and reported, not
/// asserted.
pub fn strengthen(
    set: &[usize],
    t: f64,
    table: &AffectanceTable,
) -> Result<Partition, SinrError> {
    if !t.is_finite() || t < 1.0 {
        return Err(SinrError::BadFactor { t });
    }
    if !table.is_feasible(set) {
        return Err(SinrError::InfeasibleInput);
    }
    let budget = 1.0 / t;
    let target_count = (2.0 * t / table.beta).ceil() as usize;

    let mut order: Vec<usize> = set.to_vec();
    order.sort_by(|&a, &b| {
        // Non-increasing length, ties by ascending id.
        table.length(b).partial_cmp(&table.length(a)).unwrap().then(a.cmp(&b))
    });

    // Each group carries its members and their current in-group loads.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut loads: Vec<Vec<f64>> = Vec::new();
    'links: for &x in &order {
        for (g, members) in groups.iter_mut().enumerate() {
            let load_x: f64 = members.iter().map(|&v| table.clipped(v, x)).sum();
            if load_x > budget {
                continue;
            }
            if members
                .iter()
                .enumerate()
                .any(|(i, &v)| loads[g][i] + table.clipped(x, v) > budget)
            {
                continue;
            }
            for (i, &v) in members.iter().enumerate() {
                loads[g][i] += table.clipped(x, v);
            }
            members.push(x);
            loads[g].push(load_x);
            continue 'links;
        }
        groups.push(vec![x]);
        loads.push(vec![0.0]);
    }
    let over_target = groups.len() > target_count;
    Ok(Partition { groups, target_count, over_target })
}
