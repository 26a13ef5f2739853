//! Run configuration: a TOML file of flat `key = value` sections.
//!
//! `[physics]` and `[contacts]` must list every key; the remaining sections
//! are optional and fall back to defaults. Unknown keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contacts::{Contact, ContactModel, ElasticReservoir, MinibandAlignment, MinibandLevel, MinibandSpec, ReservoirParams, Side};
use crate::device::Device;
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::grids::GridSpec;
use crate::params::PhysicalParams;
use crate::steady::SolverConfig;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Gaussian,
    Elastic,
}

/// Side-prefixed reservoir keys. Energies in meV, Γ in ps⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactsSection {
    #[serde(rename = "left_E0")]
    pub left_e0: f64,
    pub left_mu: f64,
    #[serde(rename = "left_Gamma")]
    pub left_gamma: f64,
    pub left_sigma: f64,
    #[serde(rename = "right_E0")]
    pub right_e0: f64,
    pub right_mu: f64,
    #[serde(rename = "right_Gamma")]
    pub right_gamma: f64,
    pub right_sigma: f64,
    #[serde(default)]
    pub alignment: MinibandAlignment,
    #[serde(default)]
    pub backend: Backend,
    /// Miniband levels of the elastic backend.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub left_levels: Vec<MinibandLevel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub right_levels: Vec<MinibandLevel>,
}

impl ContactsSection {
    pub fn reference_default(e12: f64) -> Self {
        let l = ReservoirParams::reference_default(Side::Left, e12);
        let r = ReservoirParams::reference_default(Side::Right, e12);
        Self {
            left_e0: l.e0,
            left_mu: l.mu,
            left_gamma: l.gamma_amp,
            left_sigma: l.sigma,
            right_e0: r.e0,
            right_mu: r.mu,
            right_gamma: r.gamma_amp,
            right_sigma: r.sigma,
            alignment: MinibandAlignment::default(),
            backend: Backend::default(),
            left_levels: Vec::new(),
            right_levels: Vec::new(),
        }
    }

    pub fn reservoir(&self, side: Side) -> ReservoirParams {
        let (e0, mu, gamma_amp, sigma) = match side {
            Side::Left => (self.left_e0, self.left_mu, self.left_gamma, self.left_sigma),
            Side::Right => (self.right_e0, self.right_mu, self.right_gamma, self.right_sigma),
        };
        ReservoirParams {
            side,
            e0,
            mu,
            gamma_amp,
            sigma,
        }
    }

    pub fn model(&self) -> Result<ContactModel> {
        for side in [Side::Left, Side::Right] {
            let r = self.reservoir(side);
            let tag = if side == Side::Left { "left" } else { "right" };
            let bad = |k: &str, why: &str| Err(Error::Config(format!("[contacts] {tag}_{k}: {why}")));
            if !(r.e0.is_finite() && r.mu.is_finite()) {
                return bad("E0/mu", "must be finite");
            }
            if !(r.gamma_amp.is_finite() && r.gamma_amp >= 0.0) {
                return bad("Gamma", "must be finite and >= 0");
            }
            if !(r.sigma.is_finite() && r.sigma > 0.0) {
                return bad("sigma", "must be finite and > 0");
            }
        }
        let contact = |side: Side, levels: &Vec<MinibandLevel>| -> Result<Contact> {
            let r = self.reservoir(side);
            Ok(match self.backend {
                Backend::Gaussian => Contact::Gaussian {
                    params: r,
                    alignment: self.alignment,
                },
                Backend::Elastic => {
                    if levels.is_empty() {
                        return Err(Error::Config(format!(
                            "[contacts] backend = \"elastic\" needs {}_levels",
                            if side == Side::Left { "left" } else { "right" }
                        )));
                    }
                    Contact::Elastic(ElasticReservoir {
                        side,
                        mu: r.mu,
                        miniband: MinibandSpec { levels: levels.clone() },
                    })
                }
            })
        };
        Ok(ContactModel {
            left: contact(Side::Left, &self.left_levels)?,
            right: contact(Side::Right, &self.right_levels)?,
        })
    }
}

/// Bias sweep, qV in meV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub v_start: f64,
    pub v_stop: f64,
    pub v_step: f64,
    /// Also write the state CSV of every converged point.
    pub dump_states: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            v_start: 30.0,
            v_stop: 180.0,
            v_step: 3.0,
            dump_states: false,
        }
    }
}

impl SweepSection {
    pub fn voltages(&self) -> Result<Vec<f64>> {
        if !(self.v_step > 0.0 && self.v_stop >= self.v_start && self.v_start.is_finite() && self.v_stop.is_finite()) {
            return Err(Error::Config(format!(
                "[sweep] needs v_step > 0 and v_stop >= v_start (got {}..{} step {})",
                self.v_start, self.v_stop, self.v_step
            )));
        }
        let n = ((self.v_stop - self.v_start) / self.v_step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.v_start + i as f64 * self.v_step).collect())
    }
}

/// Spectrum and anticrossing map. Frequencies in units of ω₁₂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// qV of the emitting state (meV); defaults to E₁₂/2.
    pub v: Option<f64>,
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub n_omega: usize,
    /// Cavity-frequency range and count of the map rows.
    pub mode_lo: f64,
    pub mode_hi: f64,
    pub n_modes: usize,
    pub normalize: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            v: None,
            omega_lo: 0.5,
            omega_hi: 1.5,
            n_omega: 1001,
            mode_lo: 0.6,
            mode_hi: 1.4,
            n_modes: 81,
            normalize: false,
        }
    }
}

/// Efficiency study at a single bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EfficiencySection {
    /// qV (meV); defaults to E₁₂.
    pub v: Option<f64>,
    /// Multipliers of χ. When empty, `n_chi` log-spaced values over
    /// [chi_min, chi_max] are used.
    pub chi_scales: Vec<f64>,
    pub chi_min: f64,
    pub chi_max: f64,
    pub n_chi: usize,
    /// Multipliers of the nonradiative lifetime τ.
    pub tau_factors: Vec<f64>,
    /// Γ_X = Γ_Y values (units of ω₁₂) to compare; empty keeps [physics].
    pub gamma_xy: Vec<f64>,
}

impl Default for EfficiencySection {
    fn default() -> Self {
        Self {
            v: None,
            chi_scales: Vec::new(),
            chi_min: 0.003,
            chi_max: 30.0,
            n_chi: 25,
            tau_factors: vec![0.5, 1.0, 2.0],
            gamma_xy: Vec::new(),
        }
    }
}

impl EfficiencySection {
    pub fn scales(&self) -> Result<Vec<f64>> {
        let s = if self.chi_scales.is_empty() {
            if !(self.chi_min > 0.0 && self.chi_max > self.chi_min && self.n_chi >= 2) {
                return Err(Error::Config("[efficiency] needs 0 < chi_min < chi_max and n_chi >= 2".into()));
            }
            let (a, b) = (self.chi_min.ln(), self.chi_max.ln());
            (0..self.n_chi)
                .map(|i| (a + (b - a) * i as f64 / (self.n_chi - 1) as f64).exp())
                .collect()
        } else {
            self.chi_scales.clone()
        };
        if s.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Config("[efficiency] chi scales must be finite and > 0".into()));
        }
        if self.tau_factors.is_empty() || self.tau_factors.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Config("[efficiency] tau_factors must be nonempty, finite and > 0".into()));
        }
        if self.gamma_xy.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::Config("[efficiency] gamma_xy values must be finite and > 0".into()));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputSection {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physics: PhysicalParams,
    pub contacts: ContactsSection,
    #[serde(default)]
    pub grids: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub dynamics: IntegratorConfig,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub efficiency: EfficiencySection,
    #[serde(default)]
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let physics = PhysicalParams::default();
        Self {
            contacts: ContactsSection::reference_default(physics.e12),
            physics,
            grids: GridSpec::default(),
            solver: SolverConfig::default(),
            dynamics: IntegratorConfig::default(),
            sweep: SweepSection::default(),
            spectrum: SpectrumSection::default(),
            efficiency: EfficiencySection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Parses a TOML scalar the way it would appear on the right of `=`; bare
/// words become strings.
fn parse_scalar(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text` after applying `section.key=value` overrides.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            let (path, raw) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not of the form section.key=value")))?;
            let (section, key) = path
                .trim()
                .split_once('.')
                .ok_or_else(|| Error::Config(format!("override `{o}` needs a section, e.g. physics.T=300")))?;
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            match entry {
                toml::Value::Table(t) => {
                    t.insert(key.to_string(), parse_scalar(raw.trim()));
                }
                _ => return Err(Error::Config(format!("`{section}` is not a section"))),
            }
        }
        let cfg: RunConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.validate().map_err(|e| Error::Config(format!("[physics] {e}")))?;
        self.contacts.model()?;
        if self.grids.nk < 8 || self.grids.nq < 4 {
            return Err(Error::Config("[grids] needs nk >= 8 and nq >= 4".into()));
        }
        if let Some(e) = self.grids.eps_max {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::Config("[grids] eps_max must be finite and > 0".into()));
            }
        }
        if !(self.grids.omega_lo > 0.0 && self.grids.omega_hi > self.grids.omega_lo) {
            return Err(Error::Config("[grids] needs 0 < omega_lo < omega_hi".into()));
        }
        let s = &self.solver;
        if s.max_iter == 0 || !(s.residual_tol > 0.0) || !(s.backtrack > 0.0 && s.backtrack < 1.0) {
            return Err(Error::Config("[solver] needs max_iter > 0, residual_tol > 0, 0 < backtrack < 1".into()));
        }
        if !(s.min_step > 0.0 && s.initial_step >= s.min_step && s.fd_step > 0.0 && s.continuation_dv > 0.0) {
            return Err(Error::Config("[solver] step parameters must be positive".into()));
        }
        let d = &self.dynamics;
        if !(d.dt > 0.0 && d.t_max > 0.0 && d.tol > 0.0) {
            return Err(Error::Config("[dynamics] needs dt, t_max, tol > 0".into()));
        }
        self.sweep.voltages()?;
        let sp = &self.spectrum;
        if !(sp.omega_hi > sp.omega_lo && sp.n_omega >= 3 && sp.mode_hi >= sp.mode_lo && sp.mode_lo > 0.0 && sp.n_modes >= 1) {
            return Err(Error::Config("[spectrum] inconsistent ranges".into()));
        }
        self.efficiency.scales()?;
        Ok(())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// SHA-256 of the canonical serialization (hex). The output directory
    /// is left out so that reruns into different places stay comparable.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir = String::new();
        let text = c.to_toml_string().unwrap_or_default();
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn device(&self) -> Result<Device> {
        Device::new(self.physics.clone(), &self.grids)
    }

    pub fn contact_model(&self) -> Result<ContactModel> {
        self.contacts.model()
    }
}
