//! Batch configuration files (TOML or JSON).
//!
//! ```toml
//! game = "game.json"          # path relative to this file, or "appendixC"
//! algorithm = "ftpl-memory"   # or "ftpl-memoryless"
//! response = "qr"             # or "br"
//! adversary = "cyc:5"         # "stoc", "cyc:L", "fixed:0,3,1,..."
//! memory = "fm:10"            # "none", "fm:B", "dm:gamma", "custom:a0,a1,..."
//! horizon = 200
//! iterations = 50
//! seed = 0
//! # epsilon, nu and output are optional
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameInstance, ResponseMode};
use crate::learner::{nu_memory, nu_memoryless, Algorithm};
use crate::memory::MemoryModel;
use crate::presets::reference_game;
use crate::sim::{AdversaryKind, EpisodeSpec};

/// Config value naming the built-in 3x3 game; `appendix-c` is also accepted.
const REFERENCE_GAME: &str = "appendixC";
const REFERENCE_GAME_ALIAS: &str = "appendix-c";

#[derive(Debug, Clone, PartialEq)]
pub enum GameSource {
    Reference,
    Path(PathBuf),
}

impl GameSource {
    pub fn load(&self) -> Result<GameInstance> {
        match self {
            GameSource::Reference => Ok(reference_game()),
            GameSource::Path(p) => GameInstance::load(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub game: GameSource,
    pub algorithm: Algorithm,
    pub response: ResponseMode,
    pub adversary: AdversaryKind,
    pub memory: MemoryModel,
    pub horizon: usize,
    pub iterations: usize,
    /// Oracle tolerance; defaults to `1/sqrt(H)`.
    pub epsilon: Option<f64>,
    /// Perturbation scale; defaults to the schedule of the chosen algorithm.
    pub nu: Option<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    name: Option<String>,
    game: String,
    algorithm: String,
    response: String,
    adversary: String,
    #[serde(default)]
    memory: Option<String>,
    horizon: usize,
    #[serde(default)]
    iterations: Option<usize>,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    nu: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output: Option<String>,
}

impl RunConfig {
    /// Reads a config file; `.json` is parsed as JSON, anything else as TOML.
    /// Relative paths inside the file resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let raw: RawConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        let default_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into());
        Self::from_raw(raw, base, default_name)
    }

    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw, base, "run".into())
    }

    fn from_raw(raw: RawConfig, base: &Path, default_name: String) -> Result<Self> {
        let game = if raw.game == REFERENCE_GAME || raw.game == REFERENCE_GAME_ALIAS {
            GameSource::Reference
        } else {
            GameSource::Path(base.join(&raw.game))
        };
        let cfg = RunConfig {
            name: raw.name.unwrap_or(default_name),
            game,
            algorithm: raw.algorithm.parse()?,
            response: raw.response.parse()?,
            adversary: raw.adversary.parse()?,
            memory: raw.memory.as_deref().unwrap_or("none").parse()?,
            horizon: raw.horizon,
            iterations: raw.iterations.unwrap_or(1),
            epsilon: raw.epsilon,
            nu: raw.nu,
            seed: raw.seed.unwrap_or(0),
            output: raw.output.map(|o| base.join(o)),
        };
        cfg.check_static()?;
        Ok(cfg)
    }

    /// Checks that do not need the game.
    pub fn check_static(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        for (what, v) in [("epsilon", self.epsilon), ("nu", self.nu)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Config(format!("{what} must be positive, got {v}")));
                }
            }
        }
        self.memory.validate()?;
        if !self.memory.is_memoryless()
            && (self.algorithm != Algorithm::FtplMemory || self.response != ResponseMode::Qr)
        {
            return Err(Error::Config(
                "followers with memory require algorithm ftpl-memory and response qr".into(),
            ));
        }
        if let AdversaryKind::Fixed(seq) = &self.adversary {
            if seq.len() < self.horizon {
                return Err(Error::Config(format!(
                    "fixed adversary has {} rounds, horizon is {}",
                    seq.len(),
                    self.horizon
                )));
            }
        }
        if let AdversaryKind::Cyc(0) = self.adversary {
            return Err(Error::Config("cycle length must be at least 1".into()));
        }
        Ok(())
    }

    pub fn epsilon_or_default(&self) -> f64 {
        self.epsilon.unwrap_or(1.0 / (self.horizon as f64).sqrt())
    }

    /// Resolves defaults against `game` and checks the pieces that depend
    /// on it.
    pub fn episode_spec(&self, game: &GameInstance) -> Result<EpisodeSpec> {
        self.check_static()?;
        if let AdversaryKind::Fixed(seq) = &self.adversary {
            if let Some(&bad) = seq.iter().find(|&&k| k >= game.k()) {
                return Err(Error::TypeIndex {
                    index: bad,
                    types: game.k(),
                });
            }
        }
        let nu = match (self.nu, self.algorithm) {
            (Some(nu), _) => nu,
            (None, Algorithm::FtplMemoryless) => nu_memoryless(game.k(), self.horizon),
            (None, Algorithm::FtplMemory) => {
                nu_memory(game, game.n(), self.horizon, self.memory.theta_h(self.horizon))
            }
        };
        Ok(EpisodeSpec {
            algorithm: self.algorithm,
            mode: self.response,
            epsilon: self.epsilon_or_default(),
            nu,
            memory: self.memory.clone(),
            horizon: self.horizon,
        })
    }

    /// TOML with every field spelled out. Paths are made absolute so the
    /// file still loads from another directory.
    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            name: Some(self.name.clone()),
            game: match &self.game {
                GameSource::Reference => REFERENCE_GAME.into(),
                GameSource::Path(p) => std::path::absolute(p).unwrap_or_else(|_| p.clone()).display().to_string(),
            },
            algorithm: self.algorithm.to_string(),
            response: self.response.to_string(),
            adversary: self.adversary.to_string(),
            memory: Some(self.memory.to_string()),
            horizon: self.horizon,
            iterations: Some(self.iterations),
            epsilon: self.epsilon,
            nu: self.nu,
            seed: Some(self.seed),
            output: self.output.as_ref().map(|p| std::path::absolute(p).unwrap_or_else(|_| p.clone()).display().to_string()),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
game = "appendixC"
algorithm = "ftpl-memory"
response = "qr"
adversary = "cyc:5"
memory = "dm:0.9"
horizon = 20
iterations = 3
seed = 7
"#;

    #[test]
    fn parses_toml() {
        let c = RunConfig::from_toml_str(BASIC, Path::new("/tmp")).unwrap();
        assert_eq!(c.game, GameSource::Reference);
        assert_eq!(c.adversary, AdversaryKind::Cyc(5));
        assert_eq!(c.memory, MemoryModel::Discounted(0.9));
        assert_eq!(c.iterations, 3);
        assert_eq!(c.seed, 7);
        assert_eq!(c.epsilon_or_default(), 1.0 / 20f64.sqrt());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::from_toml_str(BASIC, Path::new("/tmp")).unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml(), Path::new("/tmp")).unwrap();
        assert_eq!(again.name, "run");
        assert_eq!(RunConfig { name: "run".into(), ..c }, again);
    }

    #[test]
    fn game_path_is_relative_to_file() {
        let dir = tempfile::tempdir().unwrap();
        reference_game().save(&dir.path().join("g.json")).unwrap();
        let text = BASIC.replace("appendixC", "g.json");
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, text).unwrap();
        let c = RunConfig::from_file(&path).unwrap();
        assert_eq!(c.name, "exp");
        assert_eq!(c.game, GameSource::Path(dir.path().join("g.json")));
        assert_eq!(c.game.load().unwrap().k(), 6);
    }

    #[test]
    fn json_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"game":"appendix-c","algorithm":"ftpl-memoryless","response":"br","adversary":"stoc","horizon":5}"#,
        )
        .unwrap();
        let c = RunConfig::from_file(&path).unwrap();
        assert_eq!(c.memory, MemoryModel::Memoryless);
        assert_eq!(c.iterations, 1);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = Path::new("/tmp");
        let bad = [
            BASIC.replace("ftpl-memory\"", "ftpl-memoryless\""),
            BASIC.replace("\"qr\"", "\"br\""),
            BASIC.replace("horizon = 20", "horizon = 0"),
            BASIC.replace("cyc:5", "cyc:0"),
            BASIC.replace("dm:0.9", "dm:1.5"),
            format!("{BASIC}bogus = 1\n"),
            BASIC.replace("cyc:5", "fixed:0,1"),
        ];
        for text in bad {
            assert!(
                matches!(RunConfig::from_toml_str(&text, base), Err(e) if e.is_input_error()),
                "accepted:\n{text}"
            );
        }
        let out_of_range = BASIC.replace("cyc:5", "fixed:0,9,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0");
        let c = RunConfig::from_toml_str(&out_of_range, base).unwrap();
        assert!(c.episode_spec(&reference_game()).is_err());
    }
}
