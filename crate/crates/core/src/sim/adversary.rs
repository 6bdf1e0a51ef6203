use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// RNG stream for follower-type draws.
const ADVERSARY_STREAM: u64 = 2;

/// How the oblivious adversary picks follower types. Type indices are
/// zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdversaryKind {
    /// Uniform over the `K` types, independently each round.
    Stoc,
    /// Round robin holding each type for `L` rounds: at round `t` (from 1)
    /// the type is `floor(t / L) mod K`, so the first block is one round
    /// short.
    Cyc(usize),
    /// A given sequence, at least `H` long.
    Fixed(Vec<usize>),
}

impl FromStr for AdversaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            None if s == "stoc" => Ok(AdversaryKind::Stoc),
            Some(("cyc", l)) => l
                .trim()
                .parse()
                .map(AdversaryKind::Cyc)
                .map_err(|_| Error::Config(format!("bad cycle length `{l}`"))),
            Some(("fixed", list)) => list
                .split(',')
                .map(|k| {
                    k.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad type index `{k}`")))
                })
                .collect::<Result<Vec<_>>>()
                .map(AdversaryKind::Fixed),
            _ => Err(Error::Config(format!("unknown adversary `{s}`"))),
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryKind::Stoc => write!(f, "stoc"),
            AdversaryKind::Cyc(l) => write!(f, "cyc:{l}"),
            AdversaryKind::Fixed(seq) => {
                write!(f, "fixed:")?;
                for (i, k) in seq.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub seed: u64,
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind, seed: u64) -> Self {
        AdversarySpec { kind, seed }
    }

    /// The first `horizon` follower types against `types` possible types.
    pub fn sequence(&self, types: usize, horizon: usize) -> Result<Vec<usize>> {
        if types == 0 {
            return Err(Error::Config("need at least one follower type".into()));
        }
        match &self.kind {
            AdversaryKind::Stoc => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(ADVERSARY_STREAM);
                Ok((0..horizon).map(|_| rng.random_range(0..types)).collect())
            }
            AdversaryKind::Cyc(0) => Err(Error::Config("cycle length must be at least 1".into())),
            AdversaryKind::Cyc(l) => Ok((1..=horizon).map(|t| (t / l) % types).collect()),
            AdversaryKind::Fixed(seq) => {
                if seq.len() < horizon {
                    return Err(Error::Config(format!(
                        "fixed adversary has {} rounds, horizon is {horizon}",
                        seq.len()
                    )));
                }
                if let Some(&bad) = seq.iter().find(|&&k| k >= types) {
                    return Err(Error::TypeIndex { index: bad, types });
                }
                Ok(seq[..horizon].to_vec())
            }
        }
    }
}
