use proptest::prelude::*;
use terrace_core::frontsolver::solve_front;
use terrace_core::pdesim::{
    escape_from_right, front_field, init_state, run, step, InitialCondition, InitialData, RunOptions, SimConfig,
};
use terrace_core::potential::{analyze, PotentialSpec};

fn cfg(alpha: f64, half: f64, dx: f64, dt: f64) -> SimConfig {
    SimConfig {
        alpha,
        x_min: -half,
        x_max: half,
        dx,
        dt,
        lambda_max: Some(2.0),
        boundary_tol: None,
    }
}

/// Worst `|(E(t+dt) - E(t-dt)) / 2dt + int u_t^2|` over a Nagumo step run.
fn identity_residual(half: f64, t_final: f64, dx: f64, dt: f64) -> f64 {
    let v = PotentialSpec::nagumo(0.25).unwrap();
    let c = cfg(1.0, half, dx, dt);
    let ic = InitialCondition { plateaus: vec![vec![1.0], vec![0.0]], interfaces: vec![0.0], width: 1.0 };
    let mut st = init_state(&v, &c, &InitialData::Plateaus(ic)).unwrap();
    let opts = RunOptions { t_final, scalar_every: 1, ..Default::default() };
    let rec = run(&mut st, &v, &opts).unwrap();
    let s = &rec.scalars;
    (1..s.len() - 1)
        .map(|k| ((s[k + 1].energy - s[k - 1].energy) / (2.0 * dt) + s[k].dissipation).abs())
        .fold(0.0, f64::max)
}

#[test]
fn energy_identity_is_second_order() {
    let levels = [(0.1, 0.02), (0.05, 0.01), (0.025, 0.005)];
    let h2 = |(dx, dt): (f64, f64)| dx * dx + dt * dt;
    let res: Vec<f64> = levels.iter().map(|&(dx, dt)| identity_residual(40.0, 10.0, dx, dt)).collect();
    for w in res.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "observed order {order:.3} ({res:?})");
    }
    // C calibrated once on the study (with a factor 2 margin), then applied to a
    // longer run on a wider domain
    let c = 2.0 * res.iter().zip(levels).map(|(r, l)| r / h2(l)).fold(0.0, f64::max);
    let r = identity_residual(100.0, 50.0, 0.05, 0.01);
    assert!(r <= c * h2((0.05, 0.01)), "residual {r:.3e} above {:.3e}", c * h2((0.05, 0.01)));
}

fn wall_field(len: usize, dx: f64, centre: usize) -> (Vec<f64>, Vec<f64>) {
    let u = (0..len).map(|j| ((j as f64 - centre as f64) * dx / 2f64.sqrt()).tanh() * 0.9).collect();
    (u, vec![0.0; len])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn translation_by_grid_steps_is_exact(k in 1usize..40) {
        let v = PotentialSpec::allen_cahn();
        let c = cfg(1.0, 40.0, 0.05, 0.01);
        let len = c.len();
        let mid = len / 2;
        let (u0, ut0) = wall_field(len, c.dx, mid);
        let (u1, ut1) = wall_field(len, c.dx, mid + k);
        let mut a = init_state(&v, &c, &InitialData::Field { u: u0, ut: ut0 }).unwrap();
        let mut b = init_state(&v, &c, &InitialData::Field { u: u1, ut: ut1 }).unwrap();
        for _ in 0..200 {
            step(&mut a, &v).unwrap();
            step(&mut b, &v).unwrap();
        }
        // stay clear of the mirror boundaries, which differ between the two runs
        for j in 300..len - 300 - k {
            prop_assert_eq!(a.u[j], b.u[j + k]);
        }
    }

    #[test]
    fn mirror_symmetric_data_stays_symmetric(gap in 5.0f64..15.0) {
        let v = PotentialSpec::allen_cahn();
        let c = cfg(1.0, 40.0, 0.05, 0.01);
        let len = c.len();
        let mut u = vec![0.0; len];
        for j in 0..=len / 2 {
            let x = c.x(j).abs();
            let val = ((x - gap) / 2f64.sqrt()).tanh();
            u[j] = -val;
            u[len - 1 - j] = -val;
        }
        let mut st = init_state(&v, &c, &InitialData::Field { u, ut: vec![0.0; len] }).unwrap();
        for _ in 0..1000 {
            step(&mut st, &v).unwrap();
        }
        for j in 0..len {
            prop_assert!((st.u[j] - st.u[len - 1 - j]).abs() <= 1e-12);
        }
    }
}

#[test]
fn front_position_converges_at_second_order() {
    let v = PotentialSpec::nagumo(0.25).unwrap();
    let a = analyze(&v).unwrap();
    let p = solve_front(&v, &a, &[1.0], &[0.0]).unwrap();
    let pos: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&dx| {
            let c = cfg(1.0, 40.0, dx, 0.2 * dx);
            let (u, ut) = front_field(&p, &c, -10.0);
            let mut st = init_state(&v, &c, &InitialData::Field { u, ut }).unwrap();
            let rec = run(&mut st, &v, &RunOptions { t_final: 20.0, snapshot_times: vec![20.0], ..Default::default() })
                .unwrap();
            escape_from_right(&rec.snapshots[0], &[0.0], a.d_esc)
        })
        .collect();
    let order = ((pos[0] - pos[1]) / (pos[1] - pos[2])).abs().log2();
    assert!(order >= 1.8, "positions {pos:?}, observed order {order:.3}");
}
