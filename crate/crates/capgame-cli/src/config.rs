//! Experiment configuration: JSON file, flag overrides, validation.

use capgame::sinr::{PowerScheme, SinrParams};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Per-iteration success series on one instance, averaged over replicates.
    Convergence,
    /// Final-window averages across instance sizes.
    SweepN,
    /// Final-window averages across link-length caps.
    SweepDmax,
    /// The adversarial long-blocker instance: equilibrium vs optimum.
    Tight,
    /// Structural checkers over freshly generated instances.
    VerifySuite,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::SweepN => "sweep_n",
            ExperimentKind::SweepDmax => "sweep_dmax",
            ExperimentKind::Tight => "tight",
            ExperimentKind::VerifySuite => "verify_suite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
#[value(rename_all = "lowercase")]
pub enum SchemeToken {
    Uniform,
    Mean,
    Linear,
}

impl SchemeToken {
    pub fn to_scheme(self) -> PowerScheme {
        match self {
            SchemeToken::Uniform => PowerScheme::Uniform,
            SchemeToken::Mean => PowerScheme::Mean,
            SchemeToken::Linear => PowerScheme::Linear,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeToken::Uniform => "uniform",
            SchemeToken::Mean => "mean",
            SchemeToken::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Algorithm {
    GameRwm,
    GameExp3,
    Hw,
    HwBsearch,
    Brute,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::GameRwm => "game_rwm",
            Algorithm::GameExp3 => "game_exp3",
            Algorithm::Hw => "hw",
            Algorithm::HwBsearch => "hw_bsearch",
            Algorithm::Brute => "brute",
        }
    }

    pub fn is_game(&self) -> bool {
        matches!(self, Algorithm::GameRwm | Algorithm::GameExp3)
    }
}

/// Everything an experiment needs; a pure function of this struct plus its
/// seed decides every output byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub params: SinrParams,
    /// Links per generated instance.
    pub n: usize,
    /// Length cap for generated links.
    pub d_max: f64,
    /// Side of the square senders are placed in.
    pub world: f64,
    /// Use this saved instance instead of generating one (convergence only).
    pub instance: Option<PathBuf>,
    pub schemes: Vec<SchemeToken>,
    pub algorithms: Vec<Algorithm>,
    /// Rounds per game run.
    pub rounds: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Output directory; created if missing. Excluded from the provenance
    /// line so results don't differ just because they were written elsewhere.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    /// Instance sizes for `sweep_n`.
    pub n_values: Vec<usize>,
    /// Length caps for `sweep_dmax`.
    pub dmax_values: Vec<f64>,
    /// Blocker length for `tight`.
    pub tight_d: f64,
    /// Instances checked by `verify_suite`.
    pub verify_instances: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Convergence,
            params: SinrParams::default(),
            n: 200,
            d_max: 10.0,
            world: 100.0,
            instance: None,
            schemes: vec![SchemeToken::Uniform, SchemeToken::Mean, SchemeToken::Linear],
            algorithms: vec![Algorithm::GameRwm],
            rounds: 100,
            replicates: 10,
            seed: 0,
            out: PathBuf::from("out"),
            n_values: vec![25, 50, 100, 200],
            dmax_values: vec![2.0, 5.0, 10.0, 20.0, 40.0],
            tight_d: 9.0,
            verify_instances: 50,
        }
    }
}

/// A config rejection, naming the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field '{}': {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError { field, message: message.into() }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params
            .validate()
            .map_err(|e| err("params", e.to_string()))?;
        if self.n == 0 {
            return Err(err("n", "need at least one link"));
        }
        if !(self.d_max.is_finite() && self.d_max > 0.0) {
            return Err(err("d_max", "must be finite and positive"));
        }
        if !(self.world.is_finite() && self.world > 0.0) {
            return Err(err("world", "must be finite and positive"));
        }
        if self.schemes.is_empty() {
            return Err(err("schemes", "need at least one power scheme"));
        }
        if self.algorithms.is_empty() {
            return Err(err("algorithms", "need at least one algorithm"));
        }
        if self.rounds == 0 {
            return Err(err("rounds", "need at least one round"));
        }
        if self.replicates == 0 {
            return Err(err("replicates", "need at least one replicate"));
        }
        if self.instance.is_some() && self.kind != ExperimentKind::Convergence {
            return Err(err(
                "instance",
                format!("a saved instance only applies to 'convergence', not '{}'", self.kind.name()),
            ));
        }
        let threshold_algos = self.algorithms.contains(&Algorithm::Hw);
        if threshold_algos && self.params.alpha <= 2.0 {
            return Err(err(
                "algorithms",
                format!(
                    "'hw' needs its closed-form threshold, which requires alpha > 2 \
                     (config has alpha = {})",
                    self.params.alpha
                ),
            ));
        }
        let brute = self.algorithms.contains(&Algorithm::Brute);
        match self.kind {
            ExperimentKind::Convergence => {
                if !self.algorithms.iter().any(|a| a.is_game()) {
                    return Err(err(
                        "algorithms",
                        "convergence traces need a game algorithm (game_rwm or game_exp3)",
                    ));
                }
                if brute && self.n > capgame::schedule::BRUTE_FORCE_LIMIT {
                    return Err(err("n", brute_msg(self.n)));
                }
            }
            ExperimentKind::SweepN => {
                if self.n_values.is_empty() {
                    return Err(err("n_values", "need at least one size"));
                }
                if self.n_values.contains(&0) {
                    return Err(err("n_values", "sizes must be positive"));
                }
                if brute {
                    if let Some(&bad) = self
                        .n_values
                        .iter()
                        .find(|&&n| n > capgame::schedule::BRUTE_FORCE_LIMIT)
                    {
                        return Err(err("n_values", brute_msg(bad)));
                    }
                }
            }
            ExperimentKind::SweepDmax => {
                if self.dmax_values.is_empty() {
                    return Err(err("dmax_values", "need at least one length cap"));
                }
                if self.dmax_values.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
                    return Err(err("dmax_values", "length caps must be finite and positive"));
                }
                if brute && self.n > capgame::schedule::BRUTE_FORCE_LIMIT {
                    return Err(err("n", brute_msg(self.n)));
                }
            }
            ExperimentKind::Tight => {
                if !(self.tight_d.is_finite() && self.tight_d >= 3.0) {
                    return Err(err("tight_d", "blocker length must be at least 3"));
                }
                let shorts = (self.tight_d / 3.0).powf(self.params.alpha).floor() as usize;
                if 1 + shorts > capgame::schedule::BRUTE_FORCE_LIMIT {
                    return Err(err(
                        "tight_d",
                        format!(
                            "a blocker of length {} packs {} short links, beyond the \
                             exhaustive-search cap of {}",
                            self.tight_d,
                            shorts,
                            capgame::schedule::BRUTE_FORCE_LIMIT - 1
                        ),
                    ));
                }
                if !self.algorithms.iter().any(|a| a.is_game()) {
                    return Err(err(
                        "algorithms",
                        "the tight experiment plays a game; include game_rwm or game_exp3",
                    ));
                }
            }
            ExperimentKind::VerifySuite => {
                if self.verify_instances == 0 {
                    return Err(err("verify_instances", "need at least one instance"));
                }
                if self.n > capgame::schedule::BRUTE_FORCE_LIMIT {
                    return Err(err(
                        "n",
                        format!(
                            "verify_suite cross-checks against exhaustive search, \
                             so n must be at most {} (got {})",
                            capgame::schedule::BRUTE_FORCE_LIMIT,
                            self.n
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The provenance line embedded in every output file.
    pub fn provenance(&self) -> String {
        // Struct field order is fixed, so this serialization is stable and
        // reruns stay byte-identical.
        serde_json::to_string(self).expect("config serializes")
    }
}

fn brute_msg(n: usize) -> String {
    format!(
        "brute-force needs n <= {} (got {})",
        capgame::schedule::BRUTE_FORCE_LIMIT,
        n
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn json_round_trips_and_rejects_unknown_fields() {
        let config = ExperimentConfig::default();
        let json = serde_json::to_string(&config).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.provenance(), config.provenance());
        let with_typo = json.replace("\"rounds\"", "\"round\"");
        assert!(serde_json::from_str::<ExperimentConfig>(&with_typo).is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"kind":"sweep_n","seed":7}"#).unwrap();
        assert_eq!(c.kind, ExperimentKind::SweepN);
        assert_eq!(c.seed, 7);
        assert_eq!(c.replicates, 10);
        assert_eq!(c.n_values, vec![25, 50, 100, 200]);
        c.validate().unwrap();
    }

    #[test]
    fn validation_names_the_failing_field() {
        fn field_of(c: ExperimentConfig) -> &'static str {
            c.validate().unwrap_err().field
        }
        let base = ExperimentConfig::default;

        assert_eq!(field_of(ExperimentConfig { rounds: 0, ..base() }), "rounds");
        assert_eq!(field_of(ExperimentConfig { schemes: vec![], ..base() }), "schemes");
        // Default alpha is 2.1 > 2, fine; drop it below the threshold bound.
        assert_eq!(
            field_of(ExperimentConfig {
                algorithms: vec![Algorithm::Hw],
                params: SinrParams { alpha: 2.0, ..SinrParams::default() },
                ..base()
            }),
            "algorithms"
        );
        // Default sizes reach 200, beyond the exhaustive-search cap.
        assert_eq!(
            field_of(ExperimentConfig {
                kind: ExperimentKind::SweepN,
                algorithms: vec![Algorithm::GameRwm, Algorithm::Brute],
                ..base()
            }),
            "n_values"
        );
        assert_eq!(
            field_of(ExperimentConfig { kind: ExperimentKind::VerifySuite, ..base() }),
            "n"
        );
        assert_eq!(
            field_of(ExperimentConfig {
                kind: ExperimentKind::Tight,
                tight_d: 2.0,
                ..base()
            }),
            "tight_d"
        );
        assert_eq!(
            field_of(ExperimentConfig {
                kind: ExperimentKind::SweepN,
                instance: Some(PathBuf::from("inst.json")),
                ..base()
            }),
            "instance"
        );
    }

    #[test]
    fn scheme_and_algorithm_tokens_parse_from_json() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"schemes":["mean","linear"],"algorithms":["game_exp3","hw_bsearch"]}"#,
        )
        .unwrap();
        assert_eq!(c.schemes, vec![SchemeToken::Mean, SchemeToken::Linear]);
        assert_eq!(c.algorithms, vec![Algorithm::GameExp3, Algorithm::HwBsearch]);
    }
}
