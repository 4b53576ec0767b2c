//! The bundled acceptance campaign: five simulation runs, a front library per
//! potential, and eleven pass/fail checks evaluated on them.
//!
//! Every tolerance lives in [`tol`]. The campaign is computed once per process
//! and shared ([`campaign`]).

use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::constants::{compute_constants, kappa0, Constants};
use crate::diagnostics::firewall::{
    coercivity_tally, decrease_tally, firewall_q0_f0, growth_tally, q0_controls_u, Firewall, LemmaTally,
};
use crate::diagnostics::frame::{energy_derivative, frame_series, FrameSpec};
use crate::diagnostics::speed::estimate_invasion_speed;
use crate::diagnostics::standing::{standing_relaxation_report, StandingFrame};
use crate::error::{Error, Result};
use crate::frontsolver::{physical_speed, solve_front, tail_decay_rate, FrontProfile, TailEnd};
use crate::pdesim::{
    auto_dt, escape_from_left, escape_from_right, front_field, global_energy, init_state, run, InitialCondition,
    InitialData, RunOptions, RunRecord, SimConfig, Snapshot, DEFAULT_BOUNDARY_TOL,
};
use crate::potential::{analyze, PotentialAnalysis, PotentialSpec};
use crate::terrace::{center_report, fit_terrace, behind_levels_match, Direction, FitOptions, FrontLibrary, TerraceFit};

/// Pinned tolerances and thresholds.
pub mod tol {
    /// 1: relative residual of the discrete energy identity.
    pub const ENERGY_IDENTITY: f64 = 1e-3;
    pub const ENERGY_IDENTITY_FRACTION: f64 = 0.99;
    pub const ENERGY_RUN_SECONDS: f64 = 60.0;
    /// 2: relative speed error, and the hyperbolic/parabolic conversion gap.
    pub const SPEED_REL: f64 = 0.01;
    pub const CONVERSION: f64 = 1e-2;
    pub const SPEED_RUN_SECONDS: f64 = 180.0;
    /// 3: relative error of the wall energy.
    pub const WALL_ENERGY_REL: f64 = 5e-3;
    /// 5: additive margin over the subsonic cap.
    pub const SUBSONIC_MARGIN: f64 = 0.01;
    /// 6: exact co-moving front on the refined grid.
    pub const FRAME_DEDS: f64 = 1e-4;
    pub const FRAME_D: f64 = 1e-6;
    /// 6: allowed increase of E between consecutive reports of the perturbed
    /// run, as a multiple of the largest increase seen for the unperturbed
    /// front on the same grid (grid-locking oscillation).
    pub const FRAME_MONOTONE_SAFETY: f64 = 2.0;
    /// 7, 8: terrace fit residual, centre dissipation.
    pub const FIT_RESIDUAL: f64 = 0.02;
    pub const CENTER_DISSIPATION: f64 = 1e-4;
    pub const TWO_FRONT_SECONDS: f64 = 600.0;
    /// 9: relative error of the residual energy, and its floor.
    pub const RESIDUAL_ENERGY_REL: f64 = 0.02;
    pub const RESIDUAL_ENERGY_FLOOR: f64 = -5e-3;
    pub const BEHIND_LEVELS: f64 = 1e-8;
    /// 10: slacks of the firewall inequalities and the pass fraction.
    pub const COERCIVITY_SLACK: f64 = 1e-9;
    pub const DECREASE_SLACK: f64 = 1e-9;
    pub const GROWTH_SLACK: f64 = 0.0;
    pub const ENVELOPE_SLACK: f64 = 1e-9;
    pub const LEMMA_FRACTION: f64 = 0.99;
    /// 11: tail rate against the speed, and against the linearisation root.
    pub const TAIL_VS_SPEED: f64 = 1e-3;
    pub const TAIL_REL: f64 = 0.01;
}

/// Nagumo detuning used throughout.
pub const NAGUMO_A: f64 = 0.25;
/// Triple-well depths, tuned so the upper front outruns the lower one.
pub const TRIPLE_WELL_H1: f64 = 0.08;
pub const TRIPLE_WELL_H2: f64 = 0.02;
/// Half-width of the snapshot triples used for time derivatives.
const CLUSTER_HALF: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub expected: String,
    pub seconds: f64,
    pub details: Vec<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2}  {:<34} measured {}  expected {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.expected
        )
    }
}

/// Potential with its analysis and solved fronts.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: &'static str,
    pub v: PotentialSpec,
    pub analysis: PotentialAnalysis,
    pub library: FrontLibrary,
}

impl Model {
    fn new(name: &'static str, v: PotentialSpec) -> Result<Self> {
        let analysis = analyze(&v)?;
        let library = FrontLibrary::build(&v, &analysis);
        Ok(Model { name, v, analysis, library })
    }

    fn minimum_near(&self, x: f64) -> Vec<f64> {
        self.analysis.minima[self.analysis.nearest_minimum(&[x]).0].clone()
    }
}

#[derive(Debug, Clone)]
pub struct BundledRun {
    pub name: &'static str,
    pub model: usize,
    pub alpha: f64,
    pub snap_every: f64,
    pub record: RunRecord,
    /// Centres of the `(t - h, t, t + h)` snapshot triples.
    pub clusters: Vec<f64>,
}

impl BundledRun {
    fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        let tol = 0.25 * self.record.dt;
        self.record.snapshots.iter().find(|s| (s.t - t).abs() <= tol)
    }

    /// Snapshots on the regular schedule (cluster neighbours excluded).
    pub fn regular(&self, every: f64) -> Vec<&Snapshot> {
        let tol = 0.25 * self.record.dt;
        self.record
            .snapshots
            .iter()
            .filter(|s| {
                let r = s.t / every;
                (r - r.round()).abs() * every <= tol
            })
            .collect()
    }
}

struct RunPlan {
    name: &'static str,
    model: usize,
    alpha: f64,
    x_min: f64,
    x_max: f64,
    dx: f64,
    /// `None` picks the automatic step.
    dt: Option<f64>,
    t_final: f64,
    plateaus: Vec<f64>,
    interfaces: Vec<f64>,
    snap_every: f64,
    cluster_every: Option<f64>,
    scalar_every: usize,
}

fn schedule(t_final: f64, every: f64, cluster_every: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut times: Vec<f64> = (0..=(t_final / every).round() as usize).map(|i| i as f64 * every).collect();
    let mut clusters = Vec::new();
    if let Some(ce) = cluster_every {
        let mut t = ce;
        while t + CLUSTER_HALF <= t_final + 1e-9 {
            times.push(t - CLUSTER_HALF);
            times.push(t);
            times.push(t + CLUSTER_HALF);
            clusters.push(t);
            t += ce;
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    (times, clusters)
}

fn execute(plan: &RunPlan, models: &[Model]) -> Result<BundledRun> {
    let m = &models[plan.model];
    let lmax = Some(m.analysis.lambda_max);
    let dt = plan.dt.unwrap_or_else(|| auto_dt(plan.alpha, plan.dx, lmax, 0.9));
    let cfg = SimConfig {
        alpha: plan.alpha,
        x_min: plan.x_min,
        x_max: plan.x_max,
        dx: plan.dx,
        dt,
        lambda_max: lmax,
        boundary_tol: Some(DEFAULT_BOUNDARY_TOL),
    };
    let ic = InitialCondition {
        plateaus: plan.plateaus.iter().map(|&p| m.minimum_near(p)).collect(),
        interfaces: plan.interfaces.clone(),
        width: 1.0,
    };
    let mut st = init_state(&m.v, &cfg, &InitialData::Plateaus(ic))?;
    let (snapshot_times, clusters) = schedule(plan.t_final, plan.snap_every, plan.cluster_every);
    let opts = RunOptions {
        t_final: plan.t_final,
        snapshot_times,
        scalar_every: plan.scalar_every,
        escape: None,
        sup_bound: Some(m.analysis.r_att),
    };
    let record = run(&mut st, &m.v, &opts)?;
    Ok(BundledRun {
        name: plan.name,
        model: plan.model,
        alpha: plan.alpha,
        snap_every: plan.snap_every,
        record,
        clusters,
    })
}

pub const MODEL_NAGUMO: usize = 0;
pub const MODEL_TRIPLE: usize = 1;
pub const MODEL_ALLEN_CAHN: usize = 2;

pub const RUN_ENERGY: usize = 0;
pub const RUN_NAGUMO: usize = 1;
pub const RUN_PARABOLIC: usize = 2;
pub const RUN_TRIPLE: usize = 3;
pub const RUN_DOUBLE_WALL: usize = 4;

fn plans() -> Vec<RunPlan> {
    vec![
        RunPlan {
            name: "nagumo-energy",
            model: MODEL_NAGUMO,
            alpha: 1.0,
            x_min: -100.0,
            x_max: 100.0,
            dx: 0.05,
            dt: Some(0.01),
            t_final: 50.0,
            plateaus: vec![1.0, 0.0],
            interfaces: vec![0.0],
            snap_every: 0.5,
            cluster_every: Some(5.0),
            scalar_every: 1,
        },
        RunPlan {
            name: "nagumo-hyperbolic",
            model: MODEL_NAGUMO,
            alpha: 1.0,
            x_min: -40.0,
            x_max: 160.0,
            dx: 0.05,
            dt: Some(0.01),
            t_final: 300.0,
            plateaus: vec![1.0, 0.0],
            interfaces: vec![0.0],
            snap_every: 1.0,
            cluster_every: Some(10.0),
            scalar_every: 0,
        },
        RunPlan {
            name: "nagumo-parabolic",
            model: MODEL_NAGUMO,
            alpha: 0.0,
            x_min: -40.0,
            x_max: 160.0,
            dx: 0.1,
            dt: None,
            t_final: 300.0,
            plateaus: vec![1.0, 0.0],
            interfaces: vec![0.0],
            snap_every: 1.0,
            cluster_every: None,
            scalar_every: 0,
        },
        RunPlan {
            name: "triple-well",
            model: MODEL_TRIPLE,
            alpha: 1.0,
            x_min: -40.0,
            x_max: 200.0,
            dx: 0.05,
            dt: Some(0.01),
            t_final: 200.0,
            plateaus: vec![2.0, 0.0],
            interfaces: vec![0.0],
            snap_every: 1.0,
            cluster_every: Some(10.0),
            scalar_every: 0,
        },
        RunPlan {
            name: "allen-cahn-double-wall",
            model: MODEL_ALLEN_CAHN,
            alpha: 1.0,
            x_min: -60.0,
            x_max: 60.0,
            dx: 0.05,
            dt: Some(0.01),
            t_final: 100.0,
            plateaus: vec![-1.0, 1.0, -1.0],
            interfaces: vec![-10.0, 10.0],
            snap_every: 1.0,
            cluster_every: Some(10.0),
            scalar_every: 0,
        },
    ]
}

/// Everything the checks read.
#[derive(Debug)]
pub struct Campaign {
    pub models: Vec<Model>,
    pub runs: Vec<std::result::Result<BundledRun, Error>>,
    pub results: Vec<CriterionResult>,
    pub seconds: f64,
}

impl Campaign {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            out.push_str(&r.line());
            out.push('\n');
        }
        let passed = self.results.iter().filter(|r| r.pass).count();
        out.push_str(&format!(
            "{passed}/{} criteria passed in {:.1} s\n",
            self.results.len(),
            self.seconds
        ));
        out
    }

    pub fn result(&self, id: u32) -> &CriterionResult {
        self.results.iter().find(|r| r.id == id).expect("criterion id")
    }
}

static CAMPAIGN: OnceLock<Campaign> = OnceLock::new();

/// The campaign, computed on first use.
pub fn campaign() -> &'static Campaign {
    CAMPAIGN.get_or_init(run_campaign)
}

pub fn run_campaign() -> Campaign {
    let start = Instant::now();
    let defs: Vec<(&'static str, std::result::Result<PotentialSpec, Error>)> = vec![
        ("nagumo", PotentialSpec::nagumo(NAGUMO_A).map_err(Error::from)),
        (
            "triple_well",
            PotentialSpec::triple_well(TRIPLE_WELL_H1, TRIPLE_WELL_H2).map_err(Error::from),
        ),
        ("allen_cahn", Ok(PotentialSpec::allen_cahn())),
    ];
    let models: Vec<Model> = defs
        .into_par_iter()
        .map(|(name, v)| Model::new(name, v.expect("bundled potential")).expect("bundled potential analysis"))
        .collect();
    let runs: Vec<std::result::Result<BundledRun, Error>> =
        plans().par_iter().map(|p| execute(p, &models)).collect();

    type Check = fn(&[Model], &[std::result::Result<BundledRun, Error>]) -> CriterionResult;
    let checks: Vec<Check> = vec![
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
        criterion_9, criterion_10, criterion_11,
    ];
    let mut results: Vec<CriterionResult> = checks
        .par_iter()
        .map(|f| {
            let t0 = Instant::now();
            let mut r = f(&models, &runs);
            r.seconds = t0.elapsed().as_secs_f64();
            r
        })
        .collect();
    results.sort_by_key(|r| r.id);
    Campaign {
        models,
        runs,
        results,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn failed(id: u32, name: &'static str, expected: String, err: impl std::fmt::Display) -> CriterionResult {
    CriterionResult {
        id,
        name,
        pass: false,
        measured: format!("error: {err}"),
        expected,
        seconds: 0.0,
        details: Vec::new(),
    }
}

macro_rules! need_run {
    ($runs:expr, $i:expr, $id:expr, $name:expr, $exp:expr) => {
        match &$runs[$i] {
            Ok(r) => r,
            Err(e) => return failed($id, $name, $exp, format!("run {} failed: {e}", plans()[$i].name)),
        }
    };
}

fn constants(m: &Model, alpha: f64) -> Result<Constants> {
    Ok(compute_constants(&m.v, &m.analysis, alpha)?)
}

fn criterion_1(models: &[Model], runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (1, "energy dissipation identity");
    let expected = format!(
        "|dE/dt + D| <= {:.0e} max(1, D) at >= {:.0}% of steps, run < {:.0} s",
        tol::ENERGY_IDENTITY,
        100.0 * tol::ENERGY_IDENTITY_FRACTION,
        tol::ENERGY_RUN_SECONDS
    );
    let r = need_run!(runs, RUN_ENERGY, id, name, expected);
    let _ = models;
    let sc = &r.record.scalars;
    let dt = r.record.dt;
    let mut ok = 0usize;
    let mut total = 0usize;
    let mut worst = 0.0f64;
    for k in 1..sc.len().saturating_sub(1) {
        let de = (sc[k + 1].energy - sc[k - 1].energy) / (2.0 * dt);
        let d = sc[k].dissipation;
        let rel = (de + d).abs() / d.max(1.0);
        worst = worst.max(rel);
        total += 1;
        if rel <= tol::ENERGY_IDENTITY {
            ok += 1;
        }
    }
    let frac = if total > 0 { ok as f64 / total as f64 } else { 0.0 };
    let secs = r.record.wall_seconds;
    CriterionResult {
        id,
        name,
        pass: total > 0 && frac >= tol::ENERGY_IDENTITY_FRACTION && secs < tol::ENERGY_RUN_SECONDS,
        measured: format!("{:.2}% within, worst {worst:.2e}, run {secs:.1} s", 100.0 * frac),
        expected,
        seconds: 0.0,
        details: vec![format!("{total} sampled steps")],
    }
}

/// Rightmost escape from the right end state, one sample per regular snapshot.
fn right_track(run: &BundledRun, m: &[f64], d: f64) -> Vec<(f64, f64)> {
    run.regular(1.0).iter().map(|s| (s.t, escape_from_right(s, m, d))).collect()
}

fn criterion_2(models: &[Model], runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (2, "front speed and conversion");
    let a = NAGUMO_A;
    let c_exact = (1.0 - 2.0 * a) / 2f64.sqrt();
    let s_exact = physical_speed(c_exact, 1.0);
    let expected = format!(
        "s = {s_exact:.6} +-1%, c = {c_exact:.6} +-1%, |s - c/sqrt(1+c^2)| <= {:.0e}",
        tol::CONVERSION
    );
    let h = need_run!(runs, RUN_NAGUMO, id, name, expected);
    let p = need_run!(runs, RUN_PARABOLIC, id, name, expected);
    let m = &models[MODEL_NAGUMO];
    let d = m.analysis.d_esc;
    let zero = m.minimum_near(0.0);
    let sh = estimate_invasion_speed(&right_track(h, &zero, d));
    let sp = estimate_invasion_speed(&right_track(p, &zero, d));
    let (sh, sp) = match (sh, sp) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return failed(id, name, expected, e),
    };
    let s_fit = sh.s_fit;
    let c_fit = sp.s_fit;
    let conv = (s_fit - physical_speed(c_fit, 1.0)).abs();
    let secs = h.record.wall_seconds.max(p.record.wall_seconds);
    let pass = (s_fit - s_exact).abs() <= tol::SPEED_REL * s_exact
        && (c_fit - c_exact).abs() <= tol::SPEED_REL * c_exact
        && conv <= tol::CONVERSION
        && secs < tol::SPEED_RUN_SECONDS;
    CriterionResult {
        id,
        name,
        pass,
        measured: format!("s = {s_fit:.6}, c = {c_fit:.6}, gap {conv:.2e}, run {secs:.1} s"),
        expected,
        seconds: 0.0,
        details: vec![
            format!("hyperbolic windowed speeds [{:.6}, {:.6}]", sh.s_inf, sh.s_sup),
            format!("parabolic windowed speeds [{:.6}, {:.6}]", sp.s_inf, sp.s_sup),
        ],
    }
}

/// Profile sampled on a grid as a motionless snapshot.
fn profile_snapshot(p: &FrontProfile, half: f64, dx: f64) -> Snapshot {
    let len = (2.0 * half / dx).round() as usize + 1;
    let mut u = Vec::with_capacity(len * p.n);
    for k in 0..len {
        u.extend(p.eval(-half + dx * k as f64).0);
    }
    Snapshot {
        t: 0.0,
        x0: -half,
        dx,
        n: p.n,
        ut: vec![0.0; u.len()],
        u,
    }
}

fn standing_wall(m: &Model) -> Result<FrontProfile> {
    Ok(solve_front(&m.v, &m.analysis, &[-1.0], &[1.0])?)
}

fn criterion_3(models: &[Model], _runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (3, "standing wall energy");
    let exact = 2.0 * 2f64.sqrt() / 3.0;
    let expected = format!("{exact:.6} +-{:.1}%", 100.0 * tol::WALL_ENERGY_REL);
    let m = &models[MODEL_ALLEN_CAHN];
    let p = match standing_wall(m) {
        Ok(p) => p,
        Err(e) => return failed(id, name, expected, e),
    };
    let e = global_energy(&profile_snapshot(&p, 30.0, 0.01), &m.v, 1.0);
    CriterionResult {
        id,
        name,
        pass: (e - exact).abs() <= tol::WALL_ENERGY_REL * exact,
        measured: format!("{e:.6} (c = {:.1e})", p.c),
        expected,
        seconds: 0.0,
        details: Vec::new(),
    }
}

fn firewalls(run: &BundledRun, m: &Model, snaps: &[&Snapshot], min: &[f64]) -> Vec<Firewall> {
    let k0 = kappa0(m.analysis.lambda_min, run.alpha);
    snaps
        .par_iter()
        .map(|s| firewall_q0_f0(s, &m.v, min, run.alpha, k0, m.analysis.d_esc))
        .collect()
}

fn criterion_4(models: &[Model], runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (4, "Q0 controls u");
    let expected = "0 counterexamples".to_string();
    let mut tally = LemmaTally::new();
    let mut details = Vec::new();
    for i in [RUN_ENERGY, RUN_NAGUMO, RUN_PARABOLIC] {
        let r = need_run!(runs, i, id, name, expected);
        let m = &models[r.model];
        let snaps: Vec<&Snapshot> = r.record.snapshots.iter().collect();
        for min in &m.analysis.minima {
            let fws = firewalls(r, m, &snaps, min);
            let mut t = LemmaTally::new();
            for (s, fw) in snaps.iter().zip(&fws) {
                t.merge(&q0_controls_u(s, fw, min, m.analysis.d_esc));
            }
            details.push(format!("{} m = {:?}: {} samples, {} violations", r.name, min, t.samples, t.violations));
            tally.merge(&t);
        }
    }
    CriterionResult {
        id,
        name,
        pass: tally.violations == 0 && tally.samples > 0,
        measured: format!("{} counterexamples in {} samples", tally.violations, tally.samples),
        expected,
        seconds: 0.0,
        details,
    }
}

fn criterion_5(models: &[Model], runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (5, "invasion speed is subsonic");
    let expected = format!("s <= c_max/sqrt(1 + alpha c_max^2) + {}", tol::SUBSONIC_MARGIN);
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    let mut details = Vec::new();
    for r in runs {
        let r = match r {
            Ok(r) => r,
            Err(e) => return failed(id, name, expected, e),
        };
        let m = &models[r.model];
        let a = &m.analysis;
        let cm = crate::diagnostics::constants::c_max(a.delta_v, a.lambda_min, a.d_esc);
        let cap = cm / (1.0 + r.alpha * cm * cm).sqrt();
        let snaps = r.regular(r.snap_every);
        let first = snaps[0];
        let left = first.u_at(0).to_vec();
        let right = first.u_at(first.len() - 1).to_vec();
        // invasion of the right end state moves right, of the left end state moves left
        let tr: Vec<(f64, f64)> = snaps.iter().map(|s| (s.t, escape_from_right(s, &right, a.d_esc))).collect();
        let tl: Vec<(f64, f64)> = snaps.iter().map(|s| (s.t, -escape_from_left(s, &left, a.d_esc))).collect();
        for (side, tr) in [("right", tr), ("left", tl)] {
            if tr.iter().all(|p| !p.1.is_finite()) {
                details.push(format!("{} {side}: end state never left", r.name));
                continue;
            }
            match estimate_invasion_speed(&tr) {
                Ok(s) => {
                    worst = worst.max(s.s_sup - cap);
                    pass &= s.s_sup <= cap + tol::SUBSONIC_MARGIN;
                    details.push(format!("{} {side}: s_sup = {:.5}, cap = {cap:.5}", r.name, s.s_sup));
                }
                Err(e) => {
                    pass = false;
                    details.push(format!("{} {side}: {e}", r.name));
                }
            }
        }
    }
    CriterionResult {
        id,
        name,
        pass,
        measured: format!("max(s_sup - cap) = {worst:.4}"),
        expected,
        seconds: 0.0,
        details,
    }
}

struct FrameRun {
    dedsmax: f64,
    dmax: f64,
    d_integral: f64,
    max_rise: f64,
}

fn frame_run(m: &Model, consts: &Constants, prof: &FrontProfile, dx: f64, bump: f64) -> Result<FrameRun> {
    let cfg = SimConfig {
        alpha: 1.0,
        x_min: -40.0,
        x_max: 60.0,
        dx,
        dt: 0.2 * dx,
        lambda_max: Some(m.analysis.lambda_max),
        boundary_tol: Some(DEFAULT_BOUNDARY_TOL),
    };
    let (mut u, ut) = front_field(prof, &cfg, 0.0);
    for k in 0..cfg.len() {
        let x = cfg.x(k);
        u[k] += bump * (-(x + 5.0) * (x + 5.0)).exp();
    }
    let mut st = init_state(&m.v, &cfg, &InitialData::Field { u, ut })?;
    let t_final = 20.0;
    let opts = RunOptions {
        t_final,
        snapshot_times: (0..=40).map(|i| 0.5 * i as f64).collect(),
        ..Default::default()
    };
    let rec = run(&mut st, &m.v, &opts)?;
    let frame = FrameSpec::new(consts, prof.c, 0.0, 0.0, 0.0)?;
    let reps = frame_series(&rec.snapshots, &m.v, &prof.m_plus, m.analysis.d_esc, &frame, None)?;
    let dedsmax = energy_derivative(&reps).iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let dmax = reps.iter().map(|r| r.d).fold(0.0, f64::max);
    let d_integral = reps.windows(2).map(|w| 0.5 * (w[1].s - w[0].s) * (w[0].d + w[1].d)).sum();
    let max_rise = reps.windows(2).map(|w| w[1].e - w[0].e).fold(f64::NEG_INFINITY, f64::max);
    Ok(FrameRun { dedsmax, dmax, d_integral, max_rise })
}

fn criterion_6(models: &[Model], _runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (6, "travelling-frame energy decay");
    let expected = format!(
        "exact: |dE/ds| <= {:.0e}, D <= {:.0e} (refined); bump: int D > 0, E non-increasing within {}x the exact-run rise",
        tol::FRAME_DEDS,
        tol::FRAME_D,
        tol::FRAME_MONOTONE_SAFETY
    );
    let m = &models[MODEL_NAGUMO];
    let attempt = || -> Result<[FrameRun; 4]> {
        let consts = constants(m, 1.0)?;
        let prof = m
            .library
            .fronts
            .first()
            .map(|f| f.profile.clone())
            .ok_or_else(|| Error::Io("no Nagumo front in the library".into()))?;
        Ok([
            frame_run(m, &consts, &prof, 0.05, 0.0)?,
            frame_run(m, &consts, &prof, 0.025, 0.0)?,
            frame_run(m, &consts, &prof, 0.05, 0.05)?,
            frame_run(m, &consts, &prof, 0.025, 0.05)?,
        ])
    };
    let [coarse, fine, bump_coarse, bump_fine] = match attempt() {
        Ok(x) => x,
        Err(e) => return failed(id, name, expected, e),
    };
    let slack = tol::FRAME_MONOTONE_SAFETY * fine.max_rise.max(0.0);
    let pass = fine.dedsmax <= tol::FRAME_DEDS
        && fine.dmax <= tol::FRAME_D
        && bump_fine.d_integral > 0.0
        && bump_fine.max_rise <= slack;
    CriterionResult {
        id,
        name,
        pass,
        measured: format!(
            "refined |dE/ds| {:.2e}, D {:.2e}; bump int D {:.3e}, max rise {:.2e} vs slack {slack:.2e}",
            fine.dedsmax, fine.dmax, bump_fine.d_integral, bump_fine.max_rise
        ),
        expected,
        seconds: 0.0,
        details: vec![
            format!("coarse exact |dE/ds| {:.2e}, D {:.2e}, max rise {:.2e}", coarse.dedsmax, coarse.dmax, coarse.max_rise),
            format!("coarse bump int D {:.3e}, max rise {:.2e}", bump_coarse.d_integral, bump_coarse.max_rise),
        ],
    }
}

/// Fits both sides on the second half of the run, with `eps` from a first
/// pass (or the given value).
fn fit_sides(
    m: &Model,
    run: &BundledRun,
    eps: Option<f64>,
) -> std::result::Result<(TerraceFit, TerraceFit, f64), Error> {
    let snaps: Vec<Snapshot> = run
        .regular(1.0)
        .into_iter()
        .filter(|s| s.t >= 0.5 * run.record.snapshots.last().map_or(0.0, |l| l.t))
        .cloned()
        .collect();
    let fit = |eps: f64, side| fit_terrace(&snaps, &m.v, &m.analysis, &m.library, run.alpha, side, &FitOptions::new(eps));
    let eps = match eps {
        Some(e) => e,
        None => {
            let r = fit(0.0, Direction::Right)?;
            let l = fit(0.0, Direction::Left)?;
            let s_min = r
                .terrace
                .fronts
                .iter()
                .chain(&l.terrace.fronts)
                .map(|f| f.s)
                .fold(f64::INFINITY, f64::min);
            if s_min.is_finite() {
                0.05 * s_min
            } else {
                0.0
            }
        }
    };
    Ok((fit(eps, Direction::Left)?, fit(eps, Direction::Right)?, eps))
}

fn fit_summary(f: &TerraceFit) -> String {
    let cs: Vec<String> = f.terrace.fronts.iter().map(|x| format!("{:.5}", x.c)).collect();
    format!(
        "{:?}: q = {}, c = [{}], residual {:.2e}, gap slopes {:?}, pass {}",
        f.terrace.direction,
        f.terrace.q(),
        cs.join(", "),
        f.global_residual,
        f.gap_slopes,
        f.pass
    )
}

fn criterion_7(models: &[Model], runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (7, "single-front terrace");
    let expected = format!(
        "right q = 1 PASS, residual < {}, centre dissipation at T < {:.0e}",
        tol::FIT_RESIDUAL,
        tol::CENTER_DISSIPATION
    );
    let r = need_run!(runs, RUN_NAGUMO, id, name, expected);
    let m = &models[MODEL_NAGUMO];
    let (left, right, eps) = match fit_sides(m, r, None) {
        Ok(x) => x,
        Err(e) => return failed(id, name, expected, e),
    };
    let behind = right.terrace.minima.last().unwrap().clone();
    let h = m.v.value(&behind);
    let snaps: Vec<Snapshot> = r.regular(1.0).into_iter().cloned().collect();
    let center = match center_report(&snaps, &m.v, eps, h, &[&left, &right]) {
        Ok(c) => c,
        Err(e) => return failed(id, name, expected, e),
    };
    let last = center.samples.last().unwrap().sup_dissipation;
    let pass = right.pass
        && right.terrace.q() == 1
        && right.global_residual < tol::FIT_RESIDUAL
        && last < tol::CENTER_DISSIPATION;
    CriterionResult {
        id,
        name,
        pass,
        measured: format!(
            "q = {}, residual {:.2e}, pass {}, centre {last:.2e}",
            right.terrace.q(),
            right.global_residual,
            right.pass
        ),
        expected,
        seconds: 0.0,
        details: vec![fit_summary(&left), fit_summary(&right), format!("eps = {eps:.4}")],
    }
}

fn criterion_8(models: &[Model], runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (8, "two-front terrace");
    let expected = format!("right q = 2 PASS, c1 >= c2, gap growing, run < {:.0} s", tol::TWO_FRONT_SECONDS);
    let r = need_run!(runs, RUN_TRIPLE, id, name, expected);
    let m = &models[MODEL_TRIPLE];
    let (left, right, _) = match fit_sides(m, r, None) {
        Ok(x) => x,
        Err(e) => return failed(id, name, expected, e),
    };
    let q = right.terrace.q();
    let ordered = q == 2 && right.terrace.fronts[0].c >= right.terrace.fronts[1].c;
    let growing = right.gap_slopes.first().is_some_and(|g| *g > 0.0);
    let secs = r.record.wall_seconds;
    let pass = right.pass && q == 2 && ordered && growing && secs < tol::TWO_FRONT_SECONDS;
    let cs: Vec<String> = right.terrace.fronts.iter().map(|f| format!("{:.4}", f.c)).collect();
    CriterionResult {
        id,
        name,
        pass,
        measured: format!(
            "q = {q}, c = [{}], gap slope {:?}, residual {:.2e}, run {secs:.1} s",
            cs.join(", "),
            right.gap_slopes,
            right.global_residual
        ),
        expected,
        seconds: 0.0,
        details: vec![
            fit_summary(&left),
            fit_summary(&right),
            format!("library failures: {}", m.library.failures.len()),
        ],
    }
}

/// Centre width used for the double wall, wide enough to hold both walls late in the run.
pub const DOUBLE_WALL_EPS: f64 = 0.25;

fn criterion_9(models: &[Model], runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (9, "residual asymptotic energy");
    let exact = 2.0 * (2.0 * 2f64.sqrt() / 3.0);
    let expected = format!(
        "tail {exact:.4} +-{:.0}%, min >= {}",
        100.0 * tol::RESIDUAL_ENERGY_REL,
        tol::RESIDUAL_ENERGY_FLOOR
    );
    let r = need_run!(runs, RUN_DOUBLE_WALL, id, name, expected);
    let m = &models[MODEL_ALLEN_CAHN];
    let (left, right, eps) = match fit_sides(m, r, Some(DOUBLE_WALL_EPS)) {
        Ok(x) => x,
        Err(e) => return failed(id, name, expected, e),
    };
    let snaps: Vec<Snapshot> = r.regular(1.0).into_iter().cloned().collect();
    let h = m.v.value(right.terrace.minima.last().unwrap());
    let center = match center_report(&snaps, &m.v, eps, h, &[&left, &right]) {
        Ok(c) => c,
        Err(e) => return failed(id, name, expected, e),
    };
    let last = snaps.last().unwrap();
    let mid = last.u_at(last.index_of(0.0))[0];
    let walls = (mid - 1.0).abs() < m.analysis.d_esc;
    let levels = behind_levels_match(&m.v, &left, &right, tol::BEHIND_LEVELS);
    let mut details = vec![format!("u(0, T) = {mid:.6}, behind levels match {levels}")];
    let mut floor_ok = center.min_energy >= tol::RESIDUAL_ENERGY_FLOOR;
    // the sign condition on the other terrace runs
    for (i, mi) in [(RUN_NAGUMO, MODEL_NAGUMO), (RUN_TRIPLE, MODEL_TRIPLE)] {
        let Ok(ri) = &runs[i] else { continue };
        let mm = &models[mi];
        match fit_sides(mm, ri, None) {
            Ok((l, rr, e)) => {
                let hh = mm.v.value(rr.terrace.minima.last().unwrap());
                let ss: Vec<Snapshot> = ri.regular(1.0).into_iter().cloned().collect();
                match center_report(&ss, &mm.v, e, hh, &[&l, &rr]) {
                    Ok(c) => {
                        floor_ok &= c.tail_energy >= tol::RESIDUAL_ENERGY_FLOOR;
                        details.push(format!("{}: tail residual energy {:.3e}", ri.name, c.tail_energy));
                    }
                    Err(e) => details.push(format!("{}: {e}", ri.name)),
                }
            }
            Err(e) => details.push(format!("{}: {e}", ri.name)),
        }
    }
    let pass = (center.tail_energy - exact).abs() <= tol::RESIDUAL_ENERGY_REL * exact && floor_ok && walls && levels;
    CriterionResult {
        id,
        name,
        pass,
        measured: format!("tail {:.4}, min {:.3e}", center.tail_energy, center.min_energy),
        expected,
        seconds: 0.0,
        details,
    }
}

fn criterion_10(models: &[Model], runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (10, "firewall lemmas and envelope");
    let expected = format!(
        ">= {:.0}% per inequality, envelope never above slack {:.0e}",
        100.0 * tol::LEMMA_FRACTION,
        tol::ENVELOPE_SLACK
    );
    let mut coerc = LemmaTally::new();
    let mut decr = LemmaTally::new();
    let mut growth = LemmaTally::new();
    let mut details = Vec::new();
    for i in [RUN_ENERGY, RUN_NAGUMO, RUN_TRIPLE, RUN_DOUBLE_WALL] {
        let r = need_run!(runs, i, id, name, expected);
        let m = &models[r.model];
        let c = match constants(m, r.alpha) {
            Ok(c) => c,
            Err(e) => return failed(id, name, expected, e),
        };
        let snaps: Vec<&Snapshot> = r.record.snapshots.iter().collect();
        for min in &m.analysis.minima {
            let fws = firewalls(r, m, &snaps, min);
            let mut tc = LemmaTally::new();
            for fw in &fws {
                tc.merge(&coercivity_tally(fw, c.eps_f0_coerc, c.k_f0_coerc, tol::COERCIVITY_SLACK));
            }
            let mut td = LemmaTally::new();
            let mut tg = LemmaTally::new();
            let find = |t: f64| r.snapshot_at(t).and_then(|s| snaps.iter().position(|x| std::ptr::eq(*x, s)));
            for &tc_ in &r.clusters {
                if let (Some(a), Some(b), Some(z)) =
                    (find(tc_ - CLUSTER_HALF), find(tc_), find(tc_ + CLUSTER_HALF))
                {
                    td.merge(&decrease_tally(&fws[a], &fws[b], &fws[z], c.eps_f0_decr, c.k_f0_decr, tol::DECREASE_SLACK));
                    tg.merge(&growth_tally(&fws[a], &fws[z], c.k_q0_growth, tol::GROWTH_SLACK));
                }
            }
            details.push(format!(
                "{} m = {:?}: coercivity {}/{} (worst {:.2e}), decrease {}/{} (worst {:.2e}), growth {}/{} (worst {:.2e})",
                r.name,
                min,
                tc.violations,
                tc.samples,
                tc.worst_excess,
                td.violations,
                td.samples,
                td.worst_excess,
                tg.violations,
                tg.samples,
                tg.worst_excess
            ));
            coerc.merge(&tc);
            decr.merge(&td);
            growth.merge(&tg);
        }
    }

    let r = need_run!(runs, RUN_DOUBLE_WALL, id, name, expected);
    let m = &models[MODEL_ALLEN_CAHN];
    let envelope = constants(m, r.alpha).and_then(|c| {
        let frame = StandingFrame::new(&c, 0.0, c.c_cut)?;
        let snaps: Vec<Snapshot> = r.regular(1.0).into_iter().cloned().collect();
        let out = m.minimum_near(-1.0);
        Ok(standing_relaxation_report(&snaps, &m.v, &out, &out, &c, &frame, tol::ENVELOPE_SLACK)?)
    });
    let (env_ok, env_msg) = match envelope {
        Ok(rep) => (
            rep.envelope_violations == 0,
            format!("envelope violations {}, worst {:.2e}", rep.envelope_violations, rep.worst_envelope_excess),
        ),
        Err(e) => (false, format!("envelope: {e}")),
    };
    details.push(env_msg.clone());
    let f = |t: &LemmaTally| t.samples > 0 && t.pass_fraction() >= tol::LEMMA_FRACTION;
    CriterionResult {
        id,
        name,
        pass: f(&coerc) && f(&decr) && f(&growth) && env_ok,
        measured: format!(
            "coercivity {:.4}, decrease {:.4}, growth {:.4}, {env_msg}",
            coerc.pass_fraction(),
            decr.pass_fraction(),
            growth.pass_fraction()
        ),
        expected,
        seconds: 0.0,
        details,
    }
}

fn criterion_11(models: &[Model], _runs: &[std::result::Result<BundledRun, Error>]) -> CriterionResult {
    let (id, name) = (11, "front tail asymptotics");
    let expected = format!(
        "rate >= c - {:.0e}, within {:.0}% of the linear root",
        tol::TAIL_VS_SPEED,
        100.0 * tol::TAIL_REL
    );
    let mut fronts: Vec<(&Model, FrontProfile)> = Vec::new();
    for m in models {
        for f in &m.library.fronts {
            fronts.push((m, f.profile.clone()));
        }
    }
    match standing_wall(&models[MODEL_ALLEN_CAHN]) {
        Ok(p) => fronts.push((&models[MODEL_ALLEN_CAHN], p)),
        Err(e) => return failed(id, name, expected, e),
    }
    let mut pass = !fronts.is_empty();
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (m, p) in &fronts {
        match tail_decay_rate(p, &m.v, TailEnd::Plus) {
            Ok(fit) => {
                let ok = fit.rate >= p.c - tol::TAIL_VS_SPEED && fit.rel_err <= tol::TAIL_REL;
                pass &= ok;
                worst = worst.max(fit.rel_err);
                details.push(format!(
                    "{} {:?} -> {:?}: c = {:.5}, rate {:.5}, root {:.5}",
                    m.name, p.m_minus, p.m_plus, p.c, fit.rate, fit.predicted
                ));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{} {:?} -> {:?}: {e}", m.name, p.m_minus, p.m_plus));
            }
        }
    }
    CriterionResult {
        id,
        name,
        pass,
        measured: format!("{} fronts, worst relative error {worst:.2e}", fronts.len()),
        expected,
        seconds: 0.0,
        details,
    }
}
