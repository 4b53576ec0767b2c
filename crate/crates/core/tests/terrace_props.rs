use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use terrace_core::frontsolver::physical_speed;
use terrace_core::pdesim::Snapshot;
use terrace_core::potential::{analyze, PotentialAnalysis, PotentialSpec};
use terrace_core::terrace::{eval_terrace, fit_terrace, Direction, FitOptions, FrontLibrary, Terrace, TerraceFront};

struct Setup {
    v: PotentialSpec,
    a: PotentialAnalysis,
    lib: FrontLibrary,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let v = PotentialSpec::triple_well(0.08, 0.02).unwrap();
        let a = analyze(&v).unwrap();
        let lib = FrontLibrary::build(&v, &a);
        Setup { v, a, lib }
    })
}

fn minimum_near(a: &PotentialAnalysis, x: f64) -> Vec<f64> {
    a.minima
        .iter()
        .min_by(|p, q| (p[0] - x).abs().total_cmp(&(q[0] - x).abs()))
        .unwrap()
        .clone()
}

/// Two-front terrace 0 <- 1 <- 2 travelling in `dir`.
fn synthetic(dir: Direction, x1: f64, x2: f64) -> Terrace {
    let s = setup();
    let m: Vec<Vec<f64>> = [0.0, 1.0, 2.0].iter().map(|&x| minimum_near(&s.a, x)).collect();
    let front = |lo: &[f64], hi: &[f64], x0: f64| {
        let p = s.lib.fronts.iter().find(|f| f.lower == lo && f.upper == hi).unwrap().profile.clone();
        TerraceFront { c: p.c, s: physical_speed(p.c, 1.0), x0, profile: p }
    };
    Terrace {
        direction: dir,
        alpha: 1.0,
        fronts: vec![front(&m[1], &m[0], x1), front(&m[2], &m[1], x2)],
        minima: m,
    }
}

fn sample(t_: &Terrace, times: &[f64], noise: f64, seed: u64) -> Vec<Snapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x0, dx, len) = (-260.0, 0.1, 5201);
    times
        .iter()
        .map(|&t| {
            let u: Vec<f64> = (0..len)
                .map(|k| eval_terrace(t_, x0 + dx * k as f64, t)[0] + noise * rng.gen_range(-1.0..1.0))
                .collect();
            Snapshot { t, x0, dx, n: 1, u, ut: vec![0.0; len] }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fit_recovers_synthetic_terrace(
        x2 in 15.0f64..30.0,
        gap in 20.0f64..40.0,
        noise in 0.0f64..1e-3,
        seed in any::<u64>(),
        left in any::<bool>(),
    ) {
        let s = setup();
        let dir = if left { Direction::Left } else { Direction::Right };
        let sign = if left { -1.0 } else { 1.0 };
        let truth = synthetic(dir, sign * (x2 + gap), sign * x2);
        let times: Vec<f64> = (0..=20).map(|i| 100.0 + 5.0 * i as f64).collect();
        let snaps = sample(&truth, &times, noise, seed);
        let fit = fit_terrace(&snaps, &s.v, &s.a, &s.lib, 1.0, dir, &FitOptions::new(0.05)).unwrap();
        prop_assert!(fit.pass, "{:?}", fit.invariant_violations);
        prop_assert_eq!(fit.terrace.q(), 2);
        prop_assert!(fit.global_residual <= 0.02);
        for (got, want) in fit.terrace.fronts.iter().zip(&truth.fronts) {
            prop_assert_eq!(got.c, want.c);
            prop_assert!((got.x0 - want.x0).abs() < 0.05, "x0 {} vs {}", got.x0, want.x0);
        }
        prop_assert!(fit.terrace.invariant_violations(&s.v).is_empty());

        // refitting data generated from the fit gives the same terrace
        let again = fit_terrace(&sample(&fit.terrace, &times, 0.0, 0), &s.v, &s.a, &s.lib, 1.0, dir, &FitOptions::new(0.05)).unwrap();
        for (p, q) in again.terrace.fronts.iter().zip(&fit.terrace.fronts) {
            prop_assert_eq!(p.c, q.c);
            prop_assert!((p.x0 - q.x0).abs() < 0.01);
        }
    }
}

#[test]
fn single_front_terrace_is_the_front() {
    let s = setup();
    let full = synthetic(Direction::Right, 3.0, 0.0);
    let one = Terrace {
        direction: Direction::Right,
        alpha: 1.0,
        minima: full.minima[..2].to_vec(),
        fronts: full.fronts[..1].to_vec(),
    };
    let f = &one.fronts[0];
    let k = (1.0 + f.c * f.c).sqrt();
    for i in 0..200 {
        let x = -20.0 + 0.37 * i as f64;
        let t = 4.0;
        let want = f.profile.eval(k * (x - 3.0 - f.s * t)).0;
        let got = eval_terrace(&one, x, t);
        assert!((got[0] - want[0]).abs() < 1e-14);
    }
    assert!(one.invariant_violations(&s.v).is_empty());
}

#[test]
fn broken_speed_order_is_reported() {
    let s = setup();
    let mut t_ = synthetic(Direction::Right, 40.0, 0.0);
    t_.fronts.swap(0, 1);
    assert!(!t_.invariant_violations(&s.v).is_empty());
}
