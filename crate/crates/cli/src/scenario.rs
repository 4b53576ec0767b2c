//! Scenario files: TOML with the potential as a table, a JSON string or a file
//! reference.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use terrace_core::pdesim::{auto_dt, cfl_check, SimConfig};
use terrace_core::potential::PotentialSpec;

use crate::report::Failure;

/// Safety factor for `dt = "auto"`.
pub const AUTO_DT_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialField {
    Json(String),
    File { file: PathBuf },
    Inline(PotentialSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Fixed(f64),
    Auto(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    #[serde(default = "auto")]
    pub dt: TimeStep,
}

fn auto() -> TimeStep {
    TimeStep::Auto("auto".into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    /// Plateau values left to right.
    pub plateaus: Vec<Vec<f64>>,
    #[serde(default)]
    pub interfaces: Vec<f64>,
    #[serde(default = "one")]
    pub width: f64,
    /// Replace each plateau by the nearest minimum of the potential.
    #[serde(default = "yes")]
    pub snap_to_minima: bool,
    /// Amplitude of seeded uniform noise added near the interfaces.
    #[serde(default)]
    pub noise: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshots {
    pub every: Option<f64>,
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameToggle {
    pub c: f64,
    #[serde(default)]
    pub t_init: f64,
    #[serde(default)]
    pub x_init: f64,
    #[serde(default)]
    pub z_init: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    #[serde(default)]
    pub scalar_every: usize,
    /// Point near the invaded minimum to track; defaults to the right plateau.
    pub track: Option<Vec<f64>>,
    /// `x_hom` sits this far inside the right end of the domain.
    #[serde(default = "five")]
    pub x_hom_margin: f64,
    /// Centre half-width rates for terrace fits; empty picks one from the fronts.
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub frames: Vec<FrameToggle>,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            scalar_every: 0,
            track: None,
            x_hom_margin: five(),
            eps: Vec::new(),
            frames: Vec::new(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn five() -> f64 {
    5.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub t_final: f64,
    pub potential: PotentialField,
    pub grid: Option<Grid>,
    pub initial: Option<Initial>,
    #[serde(default)]
    pub snapshots: Snapshots,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::invalid("scenario", msg)
}

impl Scenario {
    pub fn load(path: &Path) -> Result<(Scenario, PotentialSpec), Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let sc: Scenario = toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let v = sc.resolve_potential(base)?;
        sc.check_basic()?;
        Ok((sc, v))
    }

    fn resolve_potential(&self, base: &Path) -> Result<PotentialSpec, Failure> {
        match &self.potential {
            PotentialField::Inline(v) => Ok(v.clone()),
            PotentialField::Json(s) => serde_json::from_str(s).map_err(|e| invalid(format!("potential: {e}"))),
            PotentialField::File { file } => {
                let p = base.join(file);
                let s = std::fs::read_to_string(&p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&s).map_err(|e| invalid(format!("{}: {e}", p.display())))
            }
        }
    }

    fn check_basic(&self) -> Result<(), Failure> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(invalid(format!("t_final must be >= 0, got {}", self.t_final)));
        }
        if let Some(e) = self.snapshots.every {
            if !(e > 0.0) {
                return Err(invalid("snapshots.every must be positive"));
            }
        }
        if self.diagnostics.eps.iter().any(|e| !(*e >= 0.0)) {
            return Err(invalid("diagnostics.eps entries must be >= 0"));
        }
        Ok(())
    }

    /// Simulation grid, with `dt = "auto"` resolved and the step checked.
    pub fn sim_config(&self, lambda_max: f64) -> Result<SimConfig, Failure> {
        let g = self.grid.as_ref().ok_or_else(|| invalid("missing [grid]"))?;
        let dt = match &g.dt {
            TimeStep::Fixed(dt) => *dt,
            TimeStep::Auto(s) if s == "auto" => auto_dt(self.alpha, g.dx, Some(lambda_max), AUTO_DT_SAFETY),
            TimeStep::Auto(s) => return Err(invalid(format!("grid.dt must be a number or \"auto\", got \"{s}\""))),
        };
        if !(g.dx > 0.0 && dt > 0.0 && g.x_max > g.x_min) {
            return Err(invalid("grid needs dx > 0, dt > 0 and x_max > x_min"));
        }
        let cfl = cfl_check(self.alpha, g.dx, dt, Some(lambda_max));
        if !cfl.ok {
            return Err(invalid(format!("dt = {dt} exceeds the stability bound {}", cfl.dt_max)));
        }
        Ok(SimConfig {
            alpha: self.alpha,
            x_min: g.x_min,
            x_max: g.x_max,
            dx: g.dx,
            dt,
            lambda_max: Some(lambda_max),
            boundary_tol: Some(terrace_core::pdesim::DEFAULT_BOUNDARY_TOL),
        })
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        if let Some(ts) = &self.snapshots.times {
            let mut ts: Vec<f64> = ts.iter().copied().filter(|t| *t >= 0.0 && *t <= self.t_final).collect();
            ts.sort_by(f64::total_cmp);
            return ts;
        }
        let every = self.snapshots.every.unwrap_or(1.0);
        let k = (self.t_final / every + 1e-9).floor() as usize;
        (0..=k).map(|i| i as f64 * every).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Scenario {
        toml::from_str(text).unwrap()
    }

    const BASE: &str = r#"
name = "t"
t_final = 2.0
[grid]
x_min = -10.0
x_max = 10.0
dx = 0.1
"#;

    #[test]
    fn potential_forms_agree() {
        let table = parse(&format!("{BASE}\n[potential]\nbuiltin = \"nagumo\"\nparams = {{ a = 0.25 }}\n"));
        let json = parse(&format!(
            "potential = '{{\"builtin\": \"nagumo\", \"params\": {{\"a\": 0.25}}}}'\n{BASE}"
        ));
        let a = table.resolve_potential(Path::new(".")).unwrap();
        let b = json.resolve_potential(Path::new(".")).unwrap();
        for u in [-0.3, 0.2, 0.9, 1.4] {
            assert_eq!(a.value(&[u]), b.value(&[u]));
        }
    }

    #[test]
    fn auto_step_passes_the_stability_check() {
        let sc = parse(&format!("potential = '{{\"builtin\": \"allen_cahn\"}}'\n{BASE}"));
        let cfg = sc.sim_config(2.0).unwrap();
        assert!(cfl_check(1.0, 0.1, cfg.dt, Some(2.0)).ok);
        assert_eq!(cfg.dt, auto_dt(1.0, 0.1, Some(2.0), AUTO_DT_SAFETY));
    }

    #[test]
    fn bad_step_is_invalid_input() {
        let sc = parse(&format!("potential = '{{\"builtin\": \"allen_cahn\"}}'\n{}", BASE.replace("dx = 0.1", "dx = 0.1\ndt = \"fast\"")));
        let e = sc.sim_config(2.0).unwrap_err();
        assert!(e.invalid_input);
        let sc = parse(&format!("potential = '{{\"builtin\": \"allen_cahn\"}}'\n{}", BASE.replace("dx = 0.1", "dx = 0.1\ndt = 0.5")));
        assert!(sc.sim_config(2.0).unwrap_err().invalid_input);
    }

    #[test]
    fn snapshot_schedule() {
        let mut sc = parse(&format!("potential = '{{\"builtin\": \"allen_cahn\"}}'\n{BASE}"));
        assert_eq!(sc.snapshot_times(), vec![0.0, 1.0, 2.0]);
        sc.snapshots.every = Some(0.5);
        assert_eq!(sc.snapshot_times().len(), 5);
        sc.snapshots.times = Some(vec![3.0, 1.5, 0.0]);
        assert_eq!(sc.snapshot_times(), vec![0.0, 1.5]);
        sc.t_final = 0.0;
        assert_eq!(sc.snapshot_times(), vec![0.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Scenario>(&format!("potential = '{{}}'\nbogus = 1\n{BASE}")).is_err());
    }
}
