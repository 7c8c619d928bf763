//! Scenario files: a human-writable TOML document binding path sets, array
//! geometries and a link budget into one experiment.
//!
//! Angles can be given either in `grid` units (fractional beam indices on the
//! owning array's grid, so integer values land exactly in one beamspace bin)
//! or in `radians`. Each path leg interprets `theta_t` on its source array
//! and `theta_r` on its destination array.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use std::path::Path;

use ris_sparse::Complex64;

use ris_sparse::alloc::SolverConfig;
use ris_sparse::channel::{ArrayGeometry, PathDescriptor};
use ris_sparse::direct::LinkBudget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnits {
    Grid,
    Radians,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    n_elements: usize,
    #[serde(default = "default_spacing")]
    spacing_over_lambda: f64,
}

fn default_spacing() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    magnitude: f64,
    #[serde(default)]
    phase_deg: f64,
    theta_t: f64,
    theta_r: f64,
    #[serde(default)]
    tau: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    #[serde(default = "one")]
    noise_power: f64,
    #[serde(default = "one")]
    bandwidth: f64,
    #[serde(default = "one")]
    p_max: f64,
    #[serde(default = "one")]
    total_power: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for RawBudget {
    fn default() -> Self {
        Self {
            noise_power: 1.0,
            bandwidth: 1.0,
            p_max: 1.0,
            total_power: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default = "default_eps")]
    eps_conv: f64,
    #[serde(default = "default_max_iterations")]
    max_iterations: usize,
}

fn default_eps() -> f64 {
    1e-4
}

fn default_max_iterations() -> usize {
    1000
}

impl Default for RawSolver {
    fn default() -> Self {
        Self {
            eps_conv: default_eps(),
            max_iterations: default_max_iterations(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_units")]
    angle_units: AngleUnits,
    tx: RawArray,
    rx: RawArray,
    #[serde(default)]
    ris: Option<RawArray>,
    #[serde(default)]
    budget: RawBudget,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    paths_tx_ris: Vec<RawPath>,
    #[serde(default)]
    paths_ris_rx: Vec<RawPath>,
    #[serde(default)]
    paths_direct: Vec<RawPath>,
}

fn default_units() -> AngleUnits {
    AngleUnits::Grid
}

/// A validated scenario, in core types.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub tx: ArrayGeometry,
    pub rx: ArrayGeometry,
    pub ris: Option<ArrayGeometry>,
    pub budget: LinkBudget,
    pub solver: SolverConfig,
    pub paths_tx_ris: Vec<PathDescriptor>,
    pub paths_ris_rx: Vec<PathDescriptor>,
    pub paths_direct: Vec<PathDescriptor>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario> {
        let raw: RawScenario = toml::from_str(text).context("failed to parse scenario")?;
        Scenario::validate(raw)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read scenario file {}", path.display()))?;
        let mut scenario = Scenario::from_toml(&text)?;
        if scenario.name.is_empty() {
            scenario.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".into());
        }
        Ok(scenario)
    }

    pub fn has_reflected_route(&self) -> bool {
        !self.paths_tx_ris.is_empty() && !self.paths_ris_rx.is_empty()
    }

    fn validate(raw: RawScenario) -> Result<Scenario> {
        let tx = ArrayGeometry::new(raw.tx.n_elements, raw.tx.spacing_over_lambda)
            .map_err(|e| anyhow!("tx array: {e}"))?;
        let rx = ArrayGeometry::new(raw.rx.n_elements, raw.rx.spacing_over_lambda)
            .map_err(|e| anyhow!("rx array: {e}"))?;
        let ris = raw
            .ris
            .map(|a| {
                ArrayGeometry::new(a.n_elements, a.spacing_over_lambda)
                    .map_err(|e| anyhow!("ris array: {e}"))
            })
            .transpose()?;

        let has_leg1 = !raw.paths_tx_ris.is_empty();
        let has_leg2 = !raw.paths_ris_rx.is_empty();
        if has_leg1 != has_leg2 {
            bail!("a reflected route needs paths on both legs (paths_tx_ris and paths_ris_rx)");
        }
        if !has_leg1 && raw.paths_direct.is_empty() {
            bail!("scenario has no paths: provide paths_direct and/or both reflected legs");
        }
        if has_leg1 && ris.is_none() {
            bail!("reflected paths given but no [ris] array");
        }

        let budget = LinkBudget::new(
            raw.budget.noise_power,
            raw.budget.bandwidth,
            raw.budget.p_max,
            raw.budget.total_power,
        )
        .map_err(|e| anyhow!("budget: {e}"))?;
        let solver = SolverConfig::new(raw.solver.eps_conv, raw.solver.max_iterations)
            .map_err(|e| anyhow!("solver: {e}"))?;

        let ris_n = ris.as_ref().map(|g| g.n_elements()).unwrap_or(0);
        let convert = |paths: &[RawPath], n_t: usize, n_r: usize, leg: &str| -> Result<Vec<PathDescriptor>> {
            paths
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    if !(p.magnitude > 0.0 && p.magnitude.is_finite()) {
                        bail!("{leg} path {i}: magnitude must be positive, got {}", p.magnitude);
                    }
                    let beta = Complex64::from_polar(p.magnitude, p.phase_deg.to_radians());
                    let path = match raw.angle_units {
                        AngleUnits::Grid => {
                            PathDescriptor::on_grid(beta, p.theta_t, n_t, p.theta_r, n_r)
                        }
                        AngleUnits::Radians => {
                            PathDescriptor::new(beta, p.theta_t, p.theta_r, p.tau)
                        }
                    };
                    path.map_err(|e| anyhow!("{leg} path {i}: {e}"))
                })
                .collect()
        };

        let paths_tx_ris = convert(&raw.paths_tx_ris, tx.n_elements(), ris_n, "tx-ris")?;
        let paths_ris_rx = convert(&raw.paths_ris_rx, ris_n, rx.n_elements(), "ris-rx")?;
        let paths_direct = convert(&raw.paths_direct, tx.n_elements(), rx.n_elements(), "direct")?;

        Ok(Scenario {
            name: raw.name.unwrap_or_default(),
            seed: raw.seed,
            tx,
            rx,
            ris,
            budget,
            solver,
            paths_tx_ris,
            paths_ris_rx,
            paths_direct,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_direct_scenario_parses() {
        let text = r#"
            [tx]
            n_elements = 8
            [rx]
            n_elements = 8
            [[paths_direct]]
            magnitude = 1.0
            theta_t = 2.0
            theta_r = 3.0
        "#;
        let s = Scenario::from_toml(text).unwrap();
        assert_eq!(s.tx.n_elements(), 8);
        assert_eq!(s.paths_direct.len(), 1);
        assert!(!s.has_reflected_route());
        assert_eq!(s.budget.noise_power(), 1.0);
    }

    #[test]
    fn single_leg_rejected() {
        let text = r#"
            [tx]
            n_elements = 8
            [rx]
            n_elements = 8
            [ris]
            n_elements = 8
            [[paths_tx_ris]]
            magnitude = 1.0
            theta_t = 2.0
            theta_r = 3.0
        "#;
        let err = Scenario::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("both legs"), "{err}");
    }

    #[test]
    fn empty_scenario_rejected() {
        let text = "[tx]\nn_elements = 4\n[rx]\nn_elements = 4\n";
        assert!(Scenario::from_toml(text).is_err());
    }

    #[test]
    fn reflected_route_requires_ris_array() {
        let text = r#"
            [tx]
            n_elements = 8
            [rx]
            n_elements = 8
            [[paths_tx_ris]]
            magnitude = 1.0
            theta_t = 1.0
            theta_r = 2.0
            [[paths_ris_rx]]
            magnitude = 1.0
            theta_t = 3.0
            theta_r = 4.0
        "#;
        let err = Scenario::from_toml(text).unwrap_err();
        assert!(err.to_string().contains("[ris]"), "{err}");
    }

    #[test]
    fn radian_units_respected() {
        let text = r#"
            angle_units = "radians"
            [tx]
            n_elements = 8
            [rx]
            n_elements = 8
            [[paths_direct]]
            magnitude = 2.0
            phase_deg = 90.0
            theta_t = 1.5
            theta_r = 0.25
        "#;
        let s = Scenario::from_toml(text).unwrap();
        let p = s.paths_direct[0];
        assert!((p.theta_t - 1.5).abs() < 1e-15);
        assert!((p.theta_r - 0.25).abs() < 1e-15);
        assert!((p.beta.re).abs() < 1e-12 && (p.beta.im - 2.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_grid_angle_rejected() {
        let text = r#"
            [tx]
            n_elements = 8
            [rx]
            n_elements = 8
            [[paths_direct]]
            magnitude = 1.0
            theta_t = 8.0
            theta_r = 3.0
        "#;
        assert!(Scenario::from_toml(text).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"
            [tx]
            n_elements = 8
            antenna_count = 8
            [rx]
            n_elements = 8
            [[paths_direct]]
            magnitude = 1.0
            theta_t = 1.0
            theta_r = 1.0
        "#;
        assert!(Scenario::from_toml(text).is_err());
    }
}
