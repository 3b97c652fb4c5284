//! Run configuration: where the R-matrix comes from and which field the
//! checks run over.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hecke_lab::field::DEFAULT_PRIME;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("bad --builtin value {0:?}: expected std:N or perm:N with 2 <= N <= 4")]
    Builtin(String),
    #[error("bad --field value {0:?}: expected symbolic, sampled:K or modular:P")]
    Field(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinKind {
    Std,
    Perm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Builtin { kind: BuiltinKind, n: usize },
    File(PathBuf),
}

impl FromStr for Source {
    type Err = ConfigError;

    /// Parses the `--builtin` argument.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let err = || ConfigError::Builtin(s.to_string());
        let (kind, n) = s.split_once(':').ok_or_else(err)?;
        let kind = match kind {
            "std" => BuiltinKind::Std,
            "perm" => BuiltinKind::Perm,
            _ => return Err(err()),
        };
        let n: usize = n.parse().map_err(|_| err())?;
        if !(2..=4).contains(&n) {
            return Err(err());
        }
        Ok(Source::Builtin { kind, n })
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Builtin { kind: BuiltinKind::Std, n } => write!(f, "builtin:std:{n}"),
            Source::Builtin { kind: BuiltinKind::Perm, n } => write!(f, "builtin:perm:{n}"),
            Source::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// How scalars are represented during a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldStrategy {
    /// Exact over `Q(q)`.
    Symbolic,
    /// Exact over `Q` at `k` seeded rational values of `q`.
    Sampled { points: usize },
    /// Over `F_p` at `points` seeded residues of `q`.
    Modular { prime: u64, points: usize },
}

/// Number of residues drawn in modular mode.
pub const MODULAR_POINTS: usize = 5;

/// Default number of rational samples.
pub const SAMPLED_POINTS: usize = 5;

impl FromStr for FieldStrategy {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let err = || ConfigError::Field(s.to_string());
        let (mode, arg) = match s.split_once(':') {
            Some((m, a)) => (m, Some(a)),
            None => (s, None),
        };
        match (mode, arg) {
            ("symbolic", None) => Ok(FieldStrategy::Symbolic),
            ("sampled", None) => Ok(FieldStrategy::Sampled { points: SAMPLED_POINTS }),
            ("sampled", Some(k)) => match k.parse() {
                Ok(k) if k >= 1 => Ok(FieldStrategy::Sampled { points: k }),
                _ => Err(err()),
            },
            ("modular", None) => Ok(FieldStrategy::Modular { prime: DEFAULT_PRIME, points: MODULAR_POINTS }),
            ("modular", Some(p)) => {
                let prime: u64 = p.parse().map_err(|_| err())?;
                if !hecke_lab::field::is_prime(prime) || !(11..1 << 63).contains(&prime) {
                    return Err(ConfigError::Invalid(format!("modulus {p} must be a prime in [11, 2^63)")));
                }
                Ok(FieldStrategy::Modular { prime, points: MODULAR_POINTS })
            }
            _ => Err(err()),
        }
    }
}

impl fmt::Display for FieldStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldStrategy::Symbolic => f.write_str("symbolic"),
            FieldStrategy::Sampled { points } => write!(f, "sampled:{points}"),
            FieldStrategy::Modular { prime, .. } => write!(f, "modular:{prime}"),
        }
    }
}

impl FieldStrategy {
    /// The default for an `N`-dimensional space: symbolic, sampled, then modular.
    pub fn auto(n: usize) -> Self {
        match n {
            0..=2 => FieldStrategy::Symbolic,
            3 => FieldStrategy::Sampled { points: SAMPLED_POINTS },
            _ => FieldStrategy::Modular { prime: DEFAULT_PRIME, points: MODULAR_POINTS },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Validate,
    Rank,
    Structure,
    Newton,
    CayleyHamilton,
    Charpoly,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Rank => "rank",
            Command::Structure => "structure",
            Command::Newton => "newton",
            Command::CayleyHamilton => "cayley-hamilton",
            Command::Charpoly => "charpoly",
        }
    }
}

/// Everything a run depends on. Identical configs give identical reports.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub source: Source,
    /// `None` selects by dimension.
    pub field: Option<FieldStrategy>,
    pub seed: u64,
    pub rank_bound: usize,
    /// Number of random test operators for the trace identities.
    pub samples: usize,
    /// Cap on monomials per ideal component.
    pub column_cap: usize,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_RANK_BOUND: usize = 8;
pub const DEFAULT_SAMPLES: usize = 10;

impl RunConfig {
    pub fn new(command: Command, source: Source) -> Self {
        RunConfig {
            command,
            source,
            field: None,
            seed: DEFAULT_SEED,
            rank_bound: DEFAULT_RANK_BOUND,
            samples: DEFAULT_SAMPLES,
            column_cap: hecke_lab::ncalgebra::DEFAULT_COLUMN_CAP,
        }
    }

    pub fn with_field(mut self, field: FieldStrategy) -> Self {
        self.field = Some(field);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_rank_bound(mut self, bound: usize) -> Self {
        self.rank_bound = bound;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sources() {
        assert_eq!("std:3".parse::<Source>().unwrap(), Source::Builtin { kind: BuiltinKind::Std, n: 3 });
        assert_eq!("perm:2".parse::<Source>().unwrap(), Source::Builtin { kind: BuiltinKind::Perm, n: 2 });
        for bad in ["std", "std:5", "std:x", "foo:2", "std:1"] {
            assert!(bad.parse::<Source>().is_err(), "{bad}");
        }
    }

    #[test]
    fn parses_fields() {
        assert_eq!("symbolic".parse::<FieldStrategy>().unwrap(), FieldStrategy::Symbolic);
        assert_eq!("sampled:3".parse::<FieldStrategy>().unwrap(), FieldStrategy::Sampled { points: 3 });
        assert_eq!("sampled".parse::<FieldStrategy>().unwrap(), FieldStrategy::Sampled { points: 5 });
        assert_eq!(
            "modular:1000003".parse::<FieldStrategy>().unwrap(),
            FieldStrategy::Modular { prime: 1_000_003, points: MODULAR_POINTS }
        );
        for bad in ["sampled:0", "modular:12", "modular:x", "exact", "symbolic:2"] {
            assert!(bad.parse::<FieldStrategy>().is_err(), "{bad}");
        }
    }

    #[test]
    fn auto_strategy_by_dimension() {
        assert_eq!(FieldStrategy::auto(2), FieldStrategy::Symbolic);
        assert_eq!(FieldStrategy::auto(3), FieldStrategy::Sampled { points: 5 });
        assert!(matches!(FieldStrategy::auto(4), FieldStrategy::Modular { .. }));
    }
}
