use proptest::prelude::*;
use terrace_core::diagnostics::constants::compute_constants;
use terrace_core::diagnostics::firewall::{coercivity_tally, exp_filter, exp_filter_direct, firewall_q0_f0, q0_controls_u};
use terrace_core::diagnostics::frame::{frame_series, relaxation_inequality, FrameSpec};
use terrace_core::diagnostics::standing::StandingFrame;
use terrace_core::frontsolver::solve_front;
use terrace_core::pdesim::{front_field, init_state, run, InitialData, RunOptions, SimConfig, Snapshot};
use terrace_core::potential::{analyze, PotentialSpec};

/// Smooth field from a few random Fourier modes, bounded by `amp`.
fn field(len: usize, dx: f64, modes: &[(f64, f64, f64)], amp: f64) -> Vec<f64> {
    let total: f64 = modes.iter().map(|m| m.0.abs()).sum::<f64>().max(1e-12);
    (0..len)
        .map(|k| {
            let x = dx * k as f64;
            amp * modes.iter().map(|(a, f, p)| a * (f * x + p).sin()).sum::<f64>() / total
        })
        .collect()
}

fn modes() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, 0.05f64..3.0, 0.0f64..6.3), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn recursive_filter_equals_direct_sum(
        g in prop::collection::vec(-5.0f64..5.0, 20..200),
        rate in 0.01f64..3.0,
        dx in 0.01f64..0.5,
    ) {
        let f = exp_filter(&g, dx, rate);
        for j in 0..g.len() {
            let d = exp_filter_direct(&g, dx, rate, j);
            let scale: f64 = g.iter().map(|x| x.abs()).sum::<f64>() * dx;
            prop_assert!((f[j] - d).abs() <= 1e-10 * scale.max(1e-300), "j = {j}: {} vs {d}", f[j]);
        }
    }

    #[test]
    fn firewall_lemmas_hold_on_arbitrary_fields(mu in modes(), mt in modes(), amp in 0.05f64..1.4, which in 0usize..2) {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let c = compute_constants(&v, &a, 1.0).unwrap();
        let (len, dx) = (801, 0.05);
        let u = field(len, dx, &mu, amp);
        let ut = field(len, dx, &mt, 0.5);
        let snap = Snapshot { t: 0.0, x0: 0.0, dx, n: 1, u, ut };
        let m = &a.minima[which];
        let fw = firewall_q0_f0(&snap, &v, m, 1.0, c.kappa0, a.d_esc);
        let q = q0_controls_u(&snap, &fw, m, a.d_esc);
        prop_assert_eq!(q.violations, 0);
        let t = coercivity_tally(&fw, c.eps_f0_coerc, c.k_f0_coerc, 1e-12);
        prop_assert_eq!(t.violations, 0, "worst excess {}", t.worst_excess);
    }

    #[test]
    fn travelling_weight_ratio_is_log_derivative(y in -30.0f64..30.0, s in 0.0f64..200.0, z0 in 0.0f64..5.0) {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let c = compute_constants(&v, &a, 1.0).unwrap();
        let f = FrameSpec::new(&c, 0.5, 0.0, 0.0, z0).unwrap();
        let z = f.cutoff(s);
        prop_assume!((y - z).abs() > 1e-3);
        let h = 1e-6;
        let (_, p0, r) = f.weights(y, s);
        let (_, pm, _) = f.weights(y - h, s);
        let (_, pp, _) = f.weights(y + h, s);
        let fd = (pp.ln() - pm.ln()) / (2.0 * h);
        prop_assert!((fd - r).abs() < 1e-6, "{fd} vs {r}");
        prop_assert!(p0 > 0.0);
    }

    #[test]
    fn standing_weight_ratios_are_log_derivatives(y in -30.0f64..30.0, t in 1.0f64..500.0) {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let c = compute_constants(&v, &a, 1.0).unwrap();
        let f = StandingFrame::new(&c, c.c_cut / 6.0, c.c_cut).unwrap();
        let edge = f.c_cut0 * t;
        prop_assume!((y.abs() - edge).abs() > 1e-3);
        let h = 1e-6;
        let w0 = f.weights(y, t);
        let wm = f.weights(y - h, t);
        let wp = f.weights(y + h, t);
        let fp = (wp.1.ln() - wm.1.ln()) / (2.0 * h);
        let fm = (wp.3.ln() - wm.3.ln()) / (2.0 * h);
        prop_assert!((fp - w0.2).abs() < 1e-6);
        prop_assert!((fm - w0.4).abs() < 1e-6);
    }
}

#[test]
fn relaxation_inequality_on_perturbed_front() {
    let v = PotentialSpec::nagumo(0.25).unwrap();
    let a = analyze(&v).unwrap();
    let c = compute_constants(&v, &a, 1.0).unwrap();
    let p = solve_front(&v, &a, &[1.0], &[0.0]).unwrap();
    let cfg = SimConfig {
        alpha: 1.0,
        x_min: -40.0,
        x_max: 60.0,
        dx: 0.05,
        dt: 0.01,
        lambda_max: Some(a.lambda_max),
        boundary_tol: None,
    };
    let (mut u, ut) = front_field(&p, &cfg, 0.0);
    for (k, uk) in u.iter_mut().enumerate() {
        let x = cfg.x(k);
        *uk += 0.1 * (-(x + 3.0) * (x + 3.0)).exp();
    }
    let mut st = init_state(&v, &cfg, &InitialData::Field { u, ut }).unwrap();
    let times: Vec<f64> = (0..=100).map(|i| 0.2 * i as f64).collect();
    let rec = run(&mut st, &v, &RunOptions { t_final: 20.0, snapshot_times: times, ..Default::default() }).unwrap();
    let frame = FrameSpec::new(&c, p.c, 0.0, 0.0, 0.0).unwrap();
    let reps = frame_series(&rec.snapshots, &v, &[0.0], a.d_esc, &frame, None).unwrap();
    let (lhs, rhs) = relaxation_inequality(&reps, &frame, &c);
    assert!(lhs > 0.0);
    // quadrature in s is trapezoidal on 0.2 steps; allow a relative 1e-3 of the dissipated amount
    assert!(lhs <= rhs + 1e-3 * lhs, "{lhs} > {rhs}");
}
