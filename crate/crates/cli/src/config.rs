//! JSON experiment configuration.
//!
//! Keys mirror the fields of [`ExperimentConfig`]; any key left out keeps
//! the preset's value, except `seed`, which must come from the file or the
//! command line.

use std::path::Path;

use otrelax::harness::ExperimentConfig;
use otrelax::CostSpec;
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dim: Option<usize>,
    pub base_samples: Option<usize>,
    pub rho: Option<f64>,
    pub n_grid: Option<Vec<usize>>,
    pub delta_exponent: Option<f64>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    /// `euclid`, `sqeuclid` or `power:K`.
    pub cost: Option<String>,
    pub resample: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
    }

    /// Overlays the file on `base`. The seed is `seed_override`, else the
    /// file's, else an error.
    pub fn apply(
        self,
        mut base: ExperimentConfig,
        seed_override: Option<u64>,
    ) -> Result<ExperimentConfig> {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    base.$field = v;
                }
            )*};
        }
        take!(
            dim,
            base_samples,
            rho,
            n_grid,
            delta_exponent,
            replications,
            resample
        );
        if let Some(cost) = self.cost {
            base.cost = cost.parse::<CostSpec>()?;
        }
        base.seed = seed_override.or(self.seed).ok_or_else(|| {
            CliError::Usage(
                "experiment needs a seed: pass --seed or set \"seed\" in the config".into(),
            )
        })?;
        base.validate()?;
        Ok(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_and_seed_rules() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"dim": 4, "n_grid": [5, 9], "cost": "euclid"}"#).unwrap();
        let config = file.apply(ExperimentConfig::desk(), Some(11)).unwrap();
        assert_eq!(config.dim, 4);
        assert_eq!(config.n_grid, vec![5, 9]);
        assert_eq!(config.cost, CostSpec::EUCLIDEAN);
        assert_eq!(config.seed, 11);
        assert_eq!(config.base_samples, 50);

        let no_seed = ConfigFile::default().apply(ExperimentConfig::desk(), None);
        assert!(matches!(no_seed, Err(CliError::Usage(_))));
        let with_seed: ConfigFile = serde_json::from_str(r#"{"seed": 3}"#).unwrap();
        assert_eq!(
            with_seed
                .apply(ExperimentConfig::desk(), None)
                .unwrap()
                .seed,
            3
        );
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"dims": 3}"#).is_err());
        let bad: ConfigFile = serde_json::from_str(r#"{"n_grid": [9, 5], "seed": 1}"#).unwrap();
        assert!(bad.apply(ExperimentConfig::desk(), None).is_err());
    }
}
