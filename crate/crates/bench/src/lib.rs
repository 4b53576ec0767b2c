//! Fixtures shared by the benchmarks.

use terrace_core::pdesim::{init_state, FieldState, InitialCondition, InitialData, SimConfig, Snapshot};
use terrace_core::potential::{analyze, PotentialAnalysis, PotentialSpec};

pub fn nagumo() -> (PotentialSpec, PotentialAnalysis) {
    let v = PotentialSpec::nagumo(0.25).expect("nagumo");
    let a = analyze(&v).expect("analysis");
    (v, a)
}

/// Step data `1 | 0` on `[-half, half]` with `dx = 0.05`, `dt = 0.01`.
pub fn step_state(v: &PotentialSpec, a: &PotentialAnalysis, half: f64) -> FieldState {
    let cfg = SimConfig {
        alpha: 1.0,
        x_min: -half,
        x_max: half,
        dx: 0.05,
        dt: 0.01,
        lambda_max: Some(a.lambda_max),
        boundary_tol: None,
    };
    let ic = InitialCondition {
        plateaus: vec![vec![1.0], vec![0.0]],
        interfaces: vec![0.0],
        width: 1.0,
    };
    init_state(v, &cfg, &InitialData::Plateaus(ic)).expect("state")
}

pub fn step_snapshot(half: f64) -> Snapshot {
    let (v, a) = nagumo();
    step_state(&v, &a, half).snapshot(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_grid() {
        let s = step_snapshot(10.0);
        assert_eq!(s.len(), 401);
        assert!((s.u_at(0)[0] - 1.0).abs() < 1e-8);
    }
}
