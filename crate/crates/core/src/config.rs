//! Structured text configuration for arch runs.
//!
//! ```toml
//! gravity = 9.81
//!
//! [arch]
//! span = 2.08
//! height = 1.93
//! n_bricks = 25
//!
//! [joint]
//! k_linear = 1.0e8
//! k_rotational = 9.0e5
//! rigid_factor = 1.0e4
//! ```
//!
//! Every table and key is optional; missing values take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{parse_vault_specs, vault_test_specs, ArchConfig, VaultTestSpec};
use crate::model::{JointSpec, DEFAULT_GRAVITY};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub gravity: f64,
    pub arch: ArchConfig,
    pub joint: JointSpec,
    /// CSV of vault tests, same columns as the bundled table.
    pub vault_table: Option<String>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            gravity: DEFAULT_GRAVITY,
            arch: ArchConfig::default(),
            joint: JointSpec::default(),
            vault_table: None,
        }
    }
}

impl RunSettings {
    pub fn from_toml(text: &str) -> Result<Self> {
        let settings: RunSettings =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        settings.validate()?;
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize to toml")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gravity >= 0.0 && self.gravity.is_finite()) {
            return Err(Error::Config(format!("gravity must be non-negative, got {}", self.gravity)));
        }
        self.arch.validate()?;
        self.joint.validate()
    }

    /// Vault tests from `vault_table` if set, else the bundled ones.
    pub fn vault_specs(&self) -> Result<Vec<VaultTestSpec>> {
        match &self.vault_table {
            None => Ok(vault_test_specs()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
                parse_vault_specs(&text)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunSettings::from_toml("").unwrap(), RunSettings::default());
    }

    #[test]
    fn partial_tables_merge_with_defaults() {
        let s = RunSettings::from_toml("[arch]\nn_bricks = 7\n[joint]\nrigid_factor = 1e5\n").unwrap();
        assert_eq!(s.arch.n_bricks, 7);
        assert_eq!(s.arch.span, ArchConfig::default().span);
        assert_eq!(s.joint.rigid_factor, 1e5);
        assert_eq!(s.joint.k_linear, JointSpec::default().k_linear);
    }

    #[test]
    fn round_trips() {
        let mut s = RunSettings::default();
        s.arch.n_bricks = 11;
        s.joint.k_rotational = 2.5e5;
        assert_eq!(RunSettings::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunSettings::from_toml("[arch]\nn_bricks = 0\n").is_err());
        assert!(RunSettings::from_toml("[joint]\nk_linear = -1.0\n").is_err());
        assert!(RunSettings::from_toml("gravity = -9.81\n").is_err());
        assert!(RunSettings::from_toml("bricks = 3\n").is_err());
    }
}
