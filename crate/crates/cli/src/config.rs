use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use hybridcs::dictionary::{build_mub, build_random_dictionary, build_two_onb};
use hybridcs::io::{load_dictionary_with, LoadOptions};
use hybridcs::model::{MagnitudeLaw, SupportStrategy};
use hybridcs::recovery::BpSolverConfig;
use hybridcs::Dictionary;
use serde::{Deserialize, Serialize};

/// Where the dictionary comes from. Relative file paths in a config file are
/// resolved against the directory holding that file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DictionarySource {
    File {
        path: PathBuf,
        #[serde(default)]
        renormalize: bool,
    },
    Mub {
        p: usize,
    },
    TwoOnb {
        m: usize,
    },
    Random {
        m: usize,
        #[serde(rename = "N")]
        n: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl DictionarySource {
    pub fn load(&self) -> hybridcs::Result<Dictionary> {
        match self {
            DictionarySource::File { path, renormalize } => {
                load_dictionary_with(path, LoadOptions { renormalize: *renormalize })
            }
            DictionarySource::Mub { p } => build_mub(*p),
            DictionarySource::TwoOnb { m } => build_two_onb(*m),
            DictionarySource::Random { m, n, seed } => build_random_dictionary(*m, *n, *seed),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SolverSettings {
    pub step_parameter: Option<f64>,
    pub max_iterations: Option<usize>,
    pub primal_tolerance: Option<f64>,
    pub dual_tolerance: Option<f64>,
}

impl SolverSettings {
    pub fn resolve(&self) -> BpSolverConfig<f64> {
        let d = BpSolverConfig::default();
        BpSolverConfig {
            step: self.step_parameter.unwrap_or(d.step),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            primal_tolerance: self.primal_tolerance.unwrap_or(d.primal_tolerance),
            dual_tolerance: self.dual_tolerance.unwrap_or(d.dual_tolerance),
        }
    }
}

/// Experiment configuration file. Every field is optional; command-line flags
/// take precedence over the file, and built-in defaults apply last.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dictionary: Option<DictionarySource>,
    /// Overrides the stored `Na` of the dictionary.
    pub split: Option<usize>,
    pub strategy: Option<String>,
    pub strategies: Option<Vec<String>>,
    pub na: Option<usize>,
    pub nb: Option<usize>,
    pub na_range: Option<[usize; 2]>,
    pub nb_range: Option<[usize; 2]>,
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_grid: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub magnitude: Option<MagnitudeLaw>,
    pub solver: Option<SolverSettings>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if let Some(DictionarySource::File { path, .. }) = &mut cfg.dictionary {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(dir) = &mut cfg.output_dir {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials == Some(0) {
            bail!("trials must be >= 1");
        }
        for (name, range) in [("naRange", self.na_range), ("nbRange", self.nb_range)] {
            if let Some([lo, hi]) = range {
                if lo > hi {
                    bail!("{name} [{lo}, {hi}] is empty");
                }
            }
        }
        if matches!(&self.strategies, Some(list) if list.is_empty()) {
            bail!("strategies must be non-empty");
        }
        if matches!(&self.q, Some(list) if list.is_empty()) {
            bail!("q must be non-empty");
        }
        Ok(())
    }

    /// The flag wins over the file.
    pub fn dictionary_source(&self, flag: Option<&Path>) -> anyhow::Result<DictionarySource> {
        match (flag, &self.dictionary) {
            (Some(path), _) => Ok(DictionarySource::File { path: path.to_path_buf(), renormalize: false }),
            (None, Some(src)) => Ok(src.clone()),
            (None, None) => bail!("no dictionary given: pass --dict or set \"dictionary\" in the config"),
        }
    }

    pub fn strategy(&self, flag: Option<&str>) -> anyhow::Result<SupportStrategy> {
        let text = flag.or(self.strategy.as_deref()).unwrap_or("spread");
        Ok(text.parse()?)
    }

    pub fn strategies(&self, flag: &[String]) -> anyhow::Result<Vec<SupportStrategy>> {
        let list: Vec<String> = if !flag.is_empty() {
            flag.to_vec()
        } else if let Some(list) = &self.strategies {
            list.clone()
        } else {
            vec!["first-n".into(), "spread".into(), "random".into()]
        };
        list.iter().map(|s| Ok(s.parse()?)).collect()
    }
}

/// Parses `lo:hi` (inclusive) or a single value.
pub fn parse_range(text: &str) -> Result<[usize; 2], String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad range bound '{t}': {e}"));
    let (lo, hi) = match text.split_once(':') {
        Some((lo, hi)) => (parse(lo)?, parse(hi)?),
        None => {
            let v = parse(text)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("range {lo}:{hi} is empty"));
    }
    Ok([lo, hi])
}
