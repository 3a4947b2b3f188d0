//! JSON run configuration: strict keys, built-in defaults for anything
//! missing.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fsge_core::simulation::Scenario;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Export {
    pub csv: bool,
    /// Legacy ASCII structured-grid files of the final wall (and flow).
    pub vtk: bool,
}

impl Default for Export {
    fn default() -> Self {
        Self { csv: true, vtk: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub output_dir: PathBuf,
    pub export: Export,
    /// Worker threads; 0 uses all cores. Results do not depend on it.
    pub workers: usize,
    /// Always true: runs are bitwise reproducible.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            output_dir: PathBuf::from("fsge-out"),
            export: Export::default(),
            workers: 0,
            deterministic: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.deterministic {
            bail!("deterministic: cannot be turned off");
        }
        self.scenario.validate().context("scenario")?;
        Ok(())
    }
}

/// Parses a config document; errors carry the offending field path.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        anyhow::anyhow!("config error at `{path}` (line {}, column {}): {inner}", inner.line(), inner.column())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a config file. An empty file gives the defaults.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim().is_empty() {
        return Ok(RunConfig::default());
    }
    parse_config_str(&text).with_context(|| format!("in {}", path.display()))
}

/// Short descriptions for `print-config --annotate`.
fn describe(path: &str) -> &'static str {
    match path.rsplit('.').next().unwrap_or(path) {
        "mode" => "gr (solid only) or fsge (coupled)",
        "gain_ratio" => "shear-to-intramural gain ratio K_o",
        "a_o" => "inner radius [mm]",
        "h_o" => "wall thickness [mm]",
        "l_o" => "vessel length [mm]",
        "phi_e_o" | "phi_m_o" | "phi_c_o" => "original mass fraction",
        "beta_theta" | "beta_z" | "beta_d" => "collagen orientation fraction",
        "alpha_0" => "diagonal collagen angle [rad]",
        "c_e" => "elastin stiffness [kPa]",
        "c1_m" | "c1_c" => "fiber stiffness [kPa]",
        "c2_m" | "c2_c" => "fiber exponent",
        "g_e_theta" | "g_e_z" | "g_e_r" | "g_m" | "g_c" => "deposition stretch",
        "eta" => "muscle-to-collagen turnover ratio (1 only)",
        "k_tau_sigma_o" => "overridden by gain_ratio",
        "k_support" => "perivascular support [kPa/mm]",
        "mu" => "viscosity [kg/(mm s)]",
        "rho" => "density [kg/mm^3]",
        "u_in" => "peak inflow velocity [mm/s]",
        "p_out" => "outlet pressure [kPa], or \"<x> mmHg\"",
        "theta_od" => "insult circumferential extent [rad]",
        "nu_theta" | "nu_z" => "insult decay exponent",
        "z_od" => "insult axial extent [mm]",
        "phi_e_hm" => "maximum elastin degradation",
        "t_max" => "load steps",
        "axisymmetric" => "drop the circumferential insult factor",
        "n_theta" | "n_z" => "solid patches",
        "fluid_n_z" | "fluid_n_r" => "fluid cells",
        "scheme" => "iqn-ils | aitken | static | gauss-seidel",
        "omega" => "static relaxation",
        "q" => "IQN-ILS history columns",
        "eps_qr" => "QR filter tolerance (relative)",
        "eps0" => "coupling tolerance",
        "k_max" => "coupling evaluations per step",
        "warmup_static_iters" => "static iterations at t = 1",
        "tol" => "flow residual tolerance",
        "max_newton" => "flow Newton steps",
        "output_dir" => "output directory",
        "csv" | "vtk" => "export toggle",
        "workers" => "threads, 0 = all",
        "deterministic" => "always true",
        _ => "",
    }
}

fn leaves(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                leaves(&p, x, out);
            }
        }
        _ => out.push((prefix.to_string(), v.clone())),
    }
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |cur, key| cur.get(key))
}

/// One line per setting: `path = value  # description (default|set)`.
/// `user` is the raw document the config came from, if any.
pub fn annotate(cfg: &RunConfig, user: Option<&Value>) -> Result<String> {
    let v = serde_json::to_value(cfg)?;
    let mut all = Vec::new();
    leaves("", &v, &mut all);
    let mut out = String::new();
    for (path, value) in all {
        let origin = match user.and_then(|u| lookup(u, &path)) {
            Some(_) => "set",
            None => "default",
        };
        out.push_str(&format!("{path} = {value}  # {} ({origin})\n", describe(&path)));
    }
    Ok(out)
}
