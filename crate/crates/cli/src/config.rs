//! Scenario description: which topologies, movement models and seeds to run.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use mobisim::handoff::HandoffConfig;
use mobisim::movement::{MovementKind, DEFAULT_CLUSTER_RADIUS};
use mobisim::topology::{generate, load_edge_list, GeneratorParams};
use mobisim::{PathOracle, Topology};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    /// Defaults to the generator's name or the file stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Grouping label for aggregation; defaults to the generator prefix
    /// (`r`, `ts`, `ti`) or `measured` for files.
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub topology_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorParams>,
}

impl TopologySpec {
    pub fn generated(params: GeneratorParams) -> Self {
        TopologySpec {
            name: None,
            topology_type: None,
            file: None,
            generator: Some(params),
        }
    }

    pub fn resolved_name(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match (&self.generator, &self.file) {
            (Some(g), _) => g.default_name(),
            (None, Some(f)) => f
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| f.display().to_string()),
            (None, None) => String::new(),
        }
    }

    pub fn resolved_type(&self) -> String {
        match (&self.topology_type, &self.generator) {
            (Some(t), _) => t.clone(),
            (None, Some(g)) => g.kind.prefix().to_string(),
            (None, None) => "measured".to_string(),
        }
    }
}

fn default_models() -> Vec<MovementKind> {
    MovementKind::ALL.to_vec()
}

fn default_moves() -> usize {
    100
}

fn default_seeds() -> usize {
    10
}

fn default_true() -> bool {
    true
}

fn default_radius() -> usize {
    DEFAULT_CLUSTER_RADIUS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topologies: Vec<TopologySpec>,
    #[serde(default = "default_models")]
    pub models: Vec<MovementKind>,
    #[serde(default = "default_moves")]
    pub moves_per_run: usize,
    #[serde(default = "default_seeds")]
    pub seeds_per_scenario: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Draw CN and HA afresh for every run; otherwise once per topology.
    #[serde(default = "default_true")]
    pub redraw_endpoints_per_seed: bool,
    #[serde(default = "default_radius")]
    pub cluster_radius: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handoff: Option<HandoffConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn new(topologies: Vec<TopologySpec>) -> Self {
        ScenarioConfig {
            topologies,
            models: default_models(),
            moves_per_run: default_moves(),
            seeds_per_scenario: default_seeds(),
            master_seed: 0,
            redraw_endpoints_per_seed: true,
            cluster_radius: DEFAULT_CLUSTER_RADIUS,
            handoff: None,
            output_dir: None,
        }
    }

    /// Parses and validates; relative topology files resolve against the
    /// config's directory.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for spec in &mut cfg.topologies {
            if let Some(f) = &spec.file {
                if f.is_relative() {
                    spec.file = Some(base_dir.join(f));
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.topologies.is_empty() {
            return bad("at least one topology is required".into());
        }
        if self.models.is_empty() {
            return bad("at least one movement model is required".into());
        }
        if self.moves_per_run == 0 {
            return bad("moves_per_run must be at least 1".into());
        }
        if self.seeds_per_scenario == 0 {
            return bad("seeds_per_scenario must be at least 1".into());
        }
        if self.cluster_radius == 0 {
            return bad("cluster_radius must be at least 1".into());
        }
        let models: BTreeSet<_> = self.models.iter().collect();
        if models.len() != self.models.len() {
            return bad("movement models must not repeat".into());
        }
        let mut names = BTreeSet::new();
        for (i, spec) in self.topologies.iter().enumerate() {
            match (&spec.file, &spec.generator) {
                (Some(_), None) => {}
                (None, Some(g)) => g
                    .validate()
                    .map_err(|e| CliError::Config(format!("topology {i}: {e}")))?,
                _ => {
                    return bad(format!(
                        "topology {i}: give exactly one of file or generator"
                    ))
                }
            }
            let name = spec.resolved_name();
            if name.is_empty() || name.contains(['/', '\\', ',']) {
                return bad(format!("topology {i}: unusable name {name:?}"));
            }
            if !names.insert(name.clone()) {
                return bad(format!("duplicate topology name {name:?}"));
            }
        }
        if let Some(h) = &self.handoff {
            h.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn load_topologies(&self) -> Result<Vec<LoadedTopology>, CliError> {
        self.topologies.iter().map(LoadedTopology::load).collect()
    }
}

/// A topology ready for simulation, with its distance table.
#[derive(Debug, Clone)]
pub struct LoadedTopology {
    pub name: String,
    pub topology_type: String,
    pub topology: Topology,
    pub oracle: PathOracle,
}

impl LoadedTopology {
    pub fn load(spec: &TopologySpec) -> Result<Self, CliError> {
        let name = spec.resolved_name();
        let topology = match (&spec.file, &spec.generator) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::Topology {
                    name: name.clone(),
                    reason: format!("{}: {e}", path.display()),
                })?;
                load_edge_list(&name, &text)
            }
            (None, Some(params)) => generate(params).map(|t| t.with_name(&name)),
            (None, None) => return Err(CliError::Config(format!("topology {name} has no source"))),
        }
        .map_err(|e| CliError::topology(&name, e))?;
        let oracle = PathOracle::new(&topology);
        Ok(LoadedTopology {
            name,
            topology_type: spec.resolved_type(),
            topology,
            oracle,
        })
    }
}
