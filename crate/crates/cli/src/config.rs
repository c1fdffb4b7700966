//! Experiment configuration read from TOML.
//!
//! A run is described by one `ExperimentConfig`. Presets are TOML documents
//! of the same shape; a user file is merged on top of the preset table by
//! table, so only the keys that differ need to be given.

use clap::ValueEnum;
use infolat::chain::{ChainSpec, FermiLead, ReservoirSpec};
use infolat::dynamics::OpenChain;
use infolat::negativity::Bipartition;
use infolat::CorrelationMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Task {
    Ness,
    Evolve,
    InfoLattice,
    InfoCurrents,
    NoiseLattice,
    Negativity,
    Trajectories,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Ness => "ness",
            Task::Evolve => "evolve",
            Task::InfoLattice => "info_lattice",
            Task::InfoCurrents => "info_currents",
            Task::NoiseLattice => "noise_lattice",
            Task::Negativity => "negativity",
            Task::Trajectories => "trajectories",
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub chain: ChainConfig,
    pub reservoir: ReservoirConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negativity: Option<NegativityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<TrajectoryConfig>,
    /// Each entry overrides scalar parameters; the task runs once per entry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub n_sites: usize,
    /// Uniform hopping `J`, the unit of energy.
    #[serde(default = "one")]
    pub hopping: f64,
    /// Uniform onsite energy.
    #[serde(default)]
    pub onsite: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_defect: Option<SiteDefect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bond_defect: Option<BondDefect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteDefect {
    pub site: usize,
    /// Onsite energy of `site`, replacing the uniform value.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondDefect {
    /// Bond between `bond` and `bond + 1`.
    pub bond: usize,
    pub hopping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReservoirConfig {
    LargeBias {
        g: f64,
        #[serde(default)]
        delta: f64,
    },
    LinearResponse {
        g: f64,
        #[serde(default)]
        delta: f64,
        phi: f64,
    },
    Fermi {
        left: LeadConfig,
        right: LeadConfig,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadConfig {
    pub g: f64,
    pub mu: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Empty,
    Filled,
    MaximallyMixed,
    /// Steady state of the same chain with some parameters replaced, the
    /// starting point of a quench.
    Ness {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        defect_energy: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_sample_every() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativityMode {
    #[default]
    Ness,
    Quench,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativityConfig {
    pub a1: Vec<usize>,
    pub a2: Vec<usize>,
    #[serde(default)]
    pub mode: NegativityMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

/// Names of the sweep parameters in output-column order.
pub const SWEEP_KEYS: [&str; 4] = ["delta", "defect_energy", "phi", "g"];

impl SweepPoint {
    pub fn get(&self, key: &str) -> Option<f64> {
        match key {
            "delta" => self.delta,
            "defect_energy" => self.defect_energy,
            "phi" => self.phi,
            "g" => self.g,
            _ => None,
        }
    }
}

fn config_error<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

/// Recursive merge of `overlay` into `base`. A table whose `regime` or
/// `kind` tag changes is replaced instead of merged, so keys of the old
/// variant do not leak into the new one.
pub fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                let retagged = ["regime", "kind"]
                    .iter()
                    .any(|tag| o.get(*tag).is_some_and(|t| b.get(*tag) != Some(t)));
                if retagged {
                    *b = o;
                } else {
                    merge_tables(b, o);
                }
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

pub fn parse_table(text: &str, origin: &str) -> CliResult<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

impl ExperimentConfig {
    pub fn from_table(table: toml::Table) -> CliResult<Self> {
        let cfg: ExperimentConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.chain.n_sites == 0 {
            return config_error("chain.n_sites must be positive");
        }
        if let Some(t) = self.time {
            if !(t.dt.is_finite() && t.dt > 0.0) || t.sample_every == 0 {
                return config_error("time.dt and time.sample_every must be positive");
            }
        }
        for point in &self.sweep {
            self.with_overrides(point)?;
        }
        self.chain_spec()?;
        Ok(())
    }

    pub fn chain_spec(&self) -> CliResult<ChainSpec> {
        let c = &self.chain;
        let mut chain = ChainSpec::uniform(c.n_sites, c.hopping, c.onsite).context("chain")?;
        if let Some(d) = c.site_defect {
            chain = chain.with_site_defect(d.site, d.energy).context("chain.site_defect")?;
        }
        if let Some(b) = c.bond_defect {
            chain = chain.with_bond_defect(b.bond, b.hopping).context("chain.bond_defect")?;
        }
        Ok(chain)
    }

    pub fn reservoir_spec(&self, chain: &ChainSpec) -> CliResult<ReservoirSpec> {
        let n = self.chain.n_sites;
        match self.reservoir {
            ReservoirConfig::LargeBias { g, delta } => ReservoirSpec::large_bias(n, g, delta),
            ReservoirConfig::LinearResponse { g, delta, phi } => {
                ReservoirSpec::linear_response(n, g, delta, phi)
            }
            ReservoirConfig::Fermi { left, right } => {
                let lead = |l: LeadConfig| FermiLead {
                    coupling: l.g,
                    chemical_potential: l.mu,
                    temperature: l.temperature,
                };
                ReservoirSpec::from_fermi(
                    n,
                    lead(left),
                    lead(right),
                    chain.onsite()[0],
                    chain.onsite()[n - 1],
                )
            }
        }
        .context("reservoir")
    }

    pub fn model(&self) -> CliResult<OpenChain> {
        let chain = self.chain_spec()?;
        let res = self.reservoir_spec(&chain)?;
        OpenChain::from_chain(&chain, res).context("model")
    }

    /// Copy with the parameters of a sweep point replaced.
    pub fn with_overrides(&self, point: &SweepPoint) -> CliResult<Self> {
        let mut cfg = self.clone();
        cfg.sweep.clear();
        if let Some(e) = point.defect_energy {
            match cfg.chain.site_defect.as_mut() {
                Some(d) => d.energy = e,
                None => return config_error("defect_energy override needs chain.site_defect"),
            }
        }
        match &mut cfg.reservoir {
            ReservoirConfig::LargeBias { g, delta } => {
                if point.phi.is_some() {
                    return config_error("phi override needs the linear_response regime");
                }
                *delta = point.delta.unwrap_or(*delta);
                *g = point.g.unwrap_or(*g);
            }
            ReservoirConfig::LinearResponse { g, delta, phi } => {
                *delta = point.delta.unwrap_or(*delta);
                *g = point.g.unwrap_or(*g);
                *phi = point.phi.unwrap_or(*phi);
            }
            ReservoirConfig::Fermi { .. } => {
                if point.delta.is_some() || point.phi.is_some() || point.g.is_some() {
                    return config_error("delta, phi and g overrides do not apply to fermi leads");
                }
            }
        }
        Ok(cfg)
    }

    /// Value of a sweep parameter in this configuration.
    pub fn parameter(&self, key: &str) -> Option<f64> {
        match (key, &self.reservoir) {
            ("defect_energy", _) => self.chain.site_defect.map(|d| d.energy),
            ("delta", ReservoirConfig::LargeBias { delta, .. })
            | ("delta", ReservoirConfig::LinearResponse { delta, .. }) => Some(*delta),
            ("g", ReservoirConfig::LargeBias { g, .. })
            | ("g", ReservoirConfig::LinearResponse { g, .. }) => Some(*g),
            ("phi", ReservoirConfig::LinearResponse { phi, .. }) => Some(*phi),
            _ => None,
        }
    }

    pub fn bipartition(&self) -> CliResult<Bipartition> {
        let neg = self
            .negativity
            .as_ref()
            .ok_or_else(|| CliError::Config("the negativity task needs a [negativity] table".into()))?;
        Bipartition::new(neg.a1.clone(), neg.a2.clone(), self.chain.n_sites).context("negativity")
    }

    pub fn time(&self) -> CliResult<TimeConfig> {
        self.time
            .ok_or_else(|| CliError::Config("this task needs a [time] table".into()))
    }

    /// Initial correlation matrix for time evolution.
    pub fn initial_state(&self) -> CliResult<CorrelationMatrix> {
        let n = self.chain.n_sites;
        match self.initial.clone().unwrap_or(InitialConfig::Empty) {
            InitialConfig::Empty => Ok(CorrelationMatrix::empty(n)),
            InitialConfig::Filled => Ok(CorrelationMatrix::filled(n)),
            InitialConfig::MaximallyMixed => Ok(CorrelationMatrix::maximally_mixed(n)),
            InitialConfig::Ness {
                delta,
                defect_energy,
            } => {
                let pre = self.with_overrides(&SweepPoint {
                    delta,
                    defect_energy,
                    ..SweepPoint::default()
                })?;
                pre.model()?.solve_ness().context("initial state")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        [chain]
        n_sites = 7
        site_defect = { site = 4, energy = 3.0 }

        [reservoir]
        regime = "large_bias"
        g = 1.0
        delta = 0.75
    "#;

    #[test]
    fn parses_and_builds_model() {
        let cfg = ExperimentConfig::from_table(parse_table(BASE, "test").unwrap()).unwrap();
        assert_eq!(cfg.chain.hopping, 1.0);
        let m = cfg.model().unwrap();
        assert_eq!(m.n_sites(), 7);
        assert_eq!(m.reservoirs().inject_at(1), 1.75);
        assert_eq!(m.hamiltonian()[(3, 3)].re, 3.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{BASE}\nextra = 1\n");
        assert!(ExperimentConfig::from_table(parse_table(&text, "t").unwrap()).is_err());
        let text = BASE.replace("delta = 0.75", "delta = 0.75\nphi = 0.1");
        assert!(ExperimentConfig::from_table(parse_table(&text, "t").unwrap()).is_err());
    }

    #[test]
    fn overlay_replaces_keys_and_variants() {
        let mut base = parse_table(BASE, "base").unwrap();
        merge_tables(&mut base, parse_table("[reservoir]\ndelta = 0.1", "o").unwrap());
        let cfg = ExperimentConfig::from_table(base.clone()).unwrap();
        assert_eq!(cfg.parameter("delta"), Some(0.1));
        assert_eq!(cfg.parameter("defect_energy"), Some(3.0));
        merge_tables(
            &mut base,
            parse_table("[reservoir]\nregime = \"linear_response\"\ng = 1.0\nphi = 0.1", "o").unwrap(),
        );
        let cfg = ExperimentConfig::from_table(base).unwrap();
        assert_eq!(cfg.parameter("delta"), Some(0.0));
        assert_eq!(cfg.parameter("phi"), Some(0.1));
    }

    #[test]
    fn sweep_overrides_are_checked() {
        let text = format!("{BASE}\n[[sweep]]\nphi = 0.1\n");
        assert!(ExperimentConfig::from_table(parse_table(&text, "t").unwrap()).is_err());
        let text = format!("{BASE}\n[[sweep]]\ndefect_energy = 1.0\ndelta = 0.0\n");
        let cfg = ExperimentConfig::from_table(parse_table(&text, "t").unwrap()).unwrap();
        let point = cfg.with_overrides(&cfg.sweep[0]).unwrap();
        assert_eq!(point.parameter("defect_energy"), Some(1.0));
        assert_eq!(point.parameter("delta"), Some(0.0));
        assert!(point.sweep.is_empty());
    }
}
