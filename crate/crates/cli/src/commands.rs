//! One function per subcommand. Each writes into `out` and returns whether the
//! run passed its own checks.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use terrace_core::acceptance::{self, tol, CriterionResult};
use terrace_core::diagnostics::constants::{compute_constants, Constants};
use terrace_core::diagnostics::escape::{escape_points, Hulls};
use terrace_core::diagnostics::firewall::{coercivity_tally, firewall_q0_f0, q0_controls_u, LemmaTally};
use terrace_core::diagnostics::frame::{frame_series, FrameSpec};
use terrace_core::diagnostics::speed::{dissipation_delta, estimate_invasion_speed, InvasionSpeed, MIN_SERIES};
use terrace_core::io::{
    write_diagnostics_csv, write_json, write_profile, write_scalars_csv, write_snapshots_ndjson, DiagnosticRow,
};
use terrace_core::pdesim::{
    dissipation_rate, escape_from_right, global_energy, init_state, run, EscapeTracking, InitialCondition,
    InitialData, RunOptions, RunRecord, Snapshot,
};
use terrace_core::potential::{analyze, PotentialAnalysis, PotentialSpec};
use terrace_core::terrace::{center_report, fit_terrace, Direction, FitOptions, FrontLibrary, TerraceFit};

use crate::report::Failure;
use crate::scenario::Scenario;

pub struct Ctx {
    pub out: PathBuf,
    pub strict: bool,
}

fn ensure_dir(p: &Path) -> Result<(), Failure> {
    fs::create_dir_all(p).map_err(|e| Failure::invalid("io", format!("{}: {e}", p.display())))
}

fn analysis_of(v: &PotentialSpec) -> Result<PotentialAnalysis, Failure> {
    analyze(v).map_err(|e| Failure::from(e).in_op("analyze"))
}

#[derive(Serialize)]
struct AnalysisOutput<'a> {
    analysis: &'a PotentialAnalysis,
    constants: Option<Constants>,
}

pub fn analyze_potential(sc: &Scenario, v: &PotentialSpec, ctx: &Ctx) -> Result<bool, Failure> {
    ensure_dir(&ctx.out)?;
    let a = analysis_of(v)?;
    let constants = if sc.alpha > 0.0 {
        Some(compute_constants(v, &a, sc.alpha).map_err(|e| Failure::from(e).in_op("compute_constants"))?)
    } else {
        None
    };
    write_json(&ctx.out.join("analysis.json"), &AnalysisOutput { analysis: &a, constants })?;
    println!("minima        {:?}", a.minima);
    println!("V at minima   {:?}", a.minima_values);
    println!("lambda_min    {:.6}", a.lambda_min);
    println!("lambda_max    {:.6}", a.lambda_max);
    println!("Delta_V       {:.12}", a.delta_v);
    println!("d_Esc         {:.6}", a.d_esc);
    println!("R_att         {:.6}", a.r_att);
    Ok(true)
}

#[derive(Serialize)]
struct LibraryEntry {
    lower: Vec<f64>,
    upper: Vec<f64>,
    c: f64,
    s: f64,
    csv: String,
}

#[derive(Serialize)]
struct LibraryFailure {
    lower: Vec<f64>,
    upper: Vec<f64>,
    reason: String,
}

#[derive(Serialize)]
struct LibraryOutput {
    alpha: f64,
    fronts: Vec<LibraryEntry>,
    failures: Vec<LibraryFailure>,
}

pub fn solve_front(sc: &Scenario, v: &PotentialSpec, ctx: &Ctx) -> Result<bool, Failure> {
    ensure_dir(&ctx.out)?;
    let a = analysis_of(v)?;
    let lib = FrontLibrary::build(v, &a);
    let mut fronts = Vec::new();
    for (k, f) in lib.fronts.iter().enumerate() {
        let name = format!("front_{k}.csv");
        write_profile(&ctx.out.join(&name), &f.profile)?;
        let s = f.profile.physical_speed(sc.alpha);
        println!("{:?} -> {:?}: c = {:.8}, s = {:.8}  ({name})", f.lower, f.upper, f.profile.c, s);
        fronts.push(LibraryEntry {
            lower: f.lower.clone(),
            upper: f.upper.clone(),
            c: f.profile.c,
            s,
            csv: name,
        });
    }
    let failures: Vec<LibraryFailure> = lib
        .failures
        .iter()
        .map(|(lo, hi, r)| {
            println!("{lo:?} -> {hi:?}: no front ({r})");
            LibraryFailure {
                lower: lo.clone(),
                upper: hi.clone(),
                reason: r.clone(),
            }
        })
        .collect();
    write_json(
        &ctx.out.join("library.json"),
        &LibraryOutput {
            alpha: sc.alpha,
            fronts,
            failures,
        },
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct LemmaSummary {
    minimum: Vec<f64>,
    q0_controls_u: LemmaTally,
    coercivity: Option<LemmaTally>,
}

#[derive(Serialize)]
struct RunSummary {
    scenario: String,
    alpha: f64,
    dx: f64,
    dt: f64,
    steps: u64,
    snapshots: usize,
    max_abs_u: f64,
    within_sup_bound: Option<bool>,
    tracked_minimum: Vec<f64>,
    invasion_speed: Option<InvasionSpeed>,
    lemmas: Vec<LemmaSummary>,
    slack_breaches: usize,
}

pub struct Simulated {
    pub analysis: PotentialAnalysis,
    pub record: RunRecord,
    pub pass: bool,
}

fn initial_data(sc: &Scenario, a: &PotentialAnalysis) -> Result<InitialCondition, Failure> {
    let init = sc.initial.as_ref().ok_or_else(|| Failure::invalid("scenario", "missing [initial]"))?;
    let plateaus = if init.snap_to_minima {
        init.plateaus
            .iter()
            .map(|p| {
                if p.len() != a.n {
                    return Err(Failure::invalid("scenario", format!("plateau {p:?} has the wrong dimension")));
                }
                Ok(a.minima[a.nearest_minimum(p).0].clone())
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        init.plateaus.clone()
    };
    Ok(InitialCondition {
        plateaus,
        interfaces: init.interfaces.clone(),
        width: init.width,
    })
}

pub fn simulate_only(sc: &Scenario, v: &PotentialSpec) -> Result<Simulated, Failure> {
    let a = analysis_of(v)?;
    let cfg = sc.sim_config(a.lambda_max)?;
    let ic = initial_data(sc, &a)?;
    // validates the plateau data and the domain before any noise is added
    let mut st = init_state(v, &cfg, &InitialData::Plateaus(ic.clone())).map_err(|e| Failure::from(e).in_op("init_state"))?;
    let noise = sc.initial.as_ref().map_or(0.0, |i| i.noise);
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        let reach = 10.0 * ic.width;
        let n = a.n;
        let mut u = Vec::with_capacity(cfg.len() * n);
        for k in 0..cfg.len() {
            let x = cfg.x(k);
            let near = ic.interfaces.iter().any(|xi| (x - xi).abs() < reach);
            for ui in ic.value_at(x) {
                u.push(if near { ui + noise * rng.gen_range(-1.0..1.0) } else { ui });
            }
        }
        let ut = vec![0.0; u.len()];
        st = init_state(v, &cfg, &InitialData::Field { u, ut }).map_err(|e| Failure::from(e).in_op("init_state"))?;
    }
    let (ml, mr) = (ic.plateaus[0].clone(), ic.plateaus[ic.plateaus.len() - 1].clone());
    let opts = RunOptions {
        t_final: sc.t_final,
        snapshot_times: sc.snapshot_times(),
        scalar_every: sc.diagnostics.scalar_every,
        escape: Some(EscapeTracking {
            d_esc: a.d_esc,
            m_left: ml,
            m_right: mr,
        }),
        sup_bound: Some(a.r_att),
    };
    let record = run(&mut st, v, &opts).map_err(|e| Failure::from(e).in_op("run"))?;
    Ok(Simulated {
        analysis: a,
        record,
        pass: true,
    })
}

fn diagnostic_rows(
    snaps: &[Snapshot],
    v: &PotentialSpec,
    a: &PotentialAnalysis,
    m: &[f64],
    consts: Option<&Constants>,
    alpha: f64,
    margin: f64,
) -> Vec<DiagnosticRow> {
    let hulls = consts.map(Hulls::from_constants);
    let mut rows: Vec<DiagnosticRow> = snaps
        .iter()
        .map(|s| {
            let mut row = DiagnosticRow {
                t: s.t,
                e: global_energy(s, v, alpha),
                d: dissipation_rate(s),
                f0_at_xesc: f64::NAN,
                q0_at_xesc: f64::NAN,
                x_big: escape_from_right(s, m, a.d_esc),
                x_small: f64::NAN,
                s_fit: f64::NAN,
                delta_dissip: f64::NAN,
            };
            if let (Some(c), Some(h)) = (consts, hulls.as_ref()) {
                let fw = firewall_q0_f0(s, v, m, alpha, c.kappa0, a.d_esc);
                let x_hom = s.x(s.len() - 1) - margin;
                if let Ok(ep) = escape_points(s, &fw, m, a.d_esc, h, x_hom) {
                    row.x_big = ep.x_big;
                    row.x_small = ep.x_small;
                    let k = s.index_of(ep.x_small);
                    row.f0_at_xesc = fw.f0[k];
                    row.q0_at_xesc = fw.q0[k];
                }
            }
            row
        })
        .collect();
    for i in 0..rows.len() {
        let series: Vec<(f64, f64)> = rows[..=i].iter().map(|r| (r.t, r.x_small)).collect();
        if series.iter().filter(|p| p.1.is_finite()).count() >= MIN_SERIES {
            if let Ok(sp) = estimate_invasion_speed(&series) {
                rows[i].s_fit = sp.s_fit;
            }
        }
        let r = rows[i];
        if r.s_fit.is_finite() && r.x_small.is_finite() {
            if let Ok(d) = dissipation_delta(snaps, r.t, r.x_small, r.s_fit) {
                rows[i].delta_dissip = d.delta;
            }
        }
    }
    rows
}

pub fn simulate(sc: &Scenario, v: &PotentialSpec, ctx: &Ctx) -> Result<Simulated, Failure> {
    ensure_dir(&ctx.out)?;
    let mut sim = simulate_only(sc, v)?;
    let a = &sim.analysis;
    let rec = &sim.record;
    write_snapshots_ndjson(&ctx.out.join("snapshots.ndjson"), &rec.snapshots)?;
    write_scalars_csv(&ctx.out.join("scalars.csv"), &rec.scalars)?;

    let consts = if sc.alpha > 0.0 {
        Some(compute_constants(v, a, sc.alpha).map_err(|e| Failure::from(e).in_op("compute_constants"))?)
    } else {
        None
    };
    let ic = initial_data(sc, a)?;
    let m = match &sc.diagnostics.track {
        Some(p) if p.len() == a.n => a.minima[a.nearest_minimum(p).0].clone(),
        Some(p) => return Err(Failure::invalid("scenario", format!("track point {p:?} has the wrong dimension"))),
        None => ic.plateaus[ic.plateaus.len() - 1].clone(),
    };
    let rows = diagnostic_rows(&rec.snapshots, v, a, &m, consts.as_ref(), sc.alpha, sc.diagnostics.x_hom_margin);
    write_diagnostics_csv(&ctx.out.join("diagnostics.csv"), &rows)?;

    let mut lemmas = Vec::new();
    let mut breaches = 0;
    if let Some(c) = &consts {
        for min in &a.minima {
            let mut q = LemmaTally::new();
            let mut co = LemmaTally::new();
            for s in &rec.snapshots {
                let fw = firewall_q0_f0(s, v, min, sc.alpha, c.kappa0, a.d_esc);
                q.merge(&q0_controls_u(s, &fw, min, a.d_esc));
                co.merge(&coercivity_tally(&fw, c.eps_f0_coerc, c.k_f0_coerc, tol::COERCIVITY_SLACK));
            }
            breaches += q.violations + co.violations;
            lemmas.push(LemmaSummary {
                minimum: min.clone(),
                q0_controls_u: q,
                coercivity: Some(co),
            });
        }
        for (k, f) in sc.diagnostics.frames.iter().enumerate() {
            let frame = FrameSpec::new(c, f.c, f.t_init, f.x_init, f.z_init).map_err(|e| Failure::from(e).in_op("frame"))?;
            let snaps: Vec<Snapshot> = rec.snapshots.iter().filter(|s| s.t >= f.t_init).cloned().collect();
            let reps = frame_series(&snaps, v, &m, a.d_esc, &frame, None).map_err(|e| Failure::from(e).in_op("frame"))?;
            write_json(&ctx.out.join(format!("frame_{k}.json")), &reps)?;
        }
    }

    let track: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.x_big)).collect();
    let summary = RunSummary {
        scenario: sc.name.clone(),
        alpha: sc.alpha,
        dx: rec.snapshots.first().map_or(f64::NAN, |s| s.dx),
        dt: rec.dt,
        steps: rec.steps,
        snapshots: rec.snapshots.len(),
        max_abs_u: rec.max_abs_u,
        within_sup_bound: rec.within_sup_bound,
        tracked_minimum: m,
        invasion_speed: estimate_invasion_speed(&track).ok(),
        lemmas,
        slack_breaches: breaches,
    };
    write_json(&ctx.out.join("run.json"), &summary)?;
    println!(
        "{}: {} steps, {} snapshots, max |u| = {:.4}",
        sc.name, rec.steps, rec.snapshots.len(), rec.max_abs_u
    );
    if let Some(sp) = summary.invasion_speed {
        println!("invasion speed s_fit = {:.6} (windowed [{:.6}, {:.6}])", sp.s_fit, sp.s_inf, sp.s_sup);
    }
    if breaches > 0 {
        println!("{breaches} inequality samples exceed their slack");
        if ctx.strict {
            sim.pass = false;
        }
    }
    if rec.within_sup_bound == Some(false) {
        sim.pass = false;
    }
    Ok(sim)
}

fn fit_side(
    snaps: &[Snapshot],
    v: &PotentialSpec,
    a: &PotentialAnalysis,
    lib: &FrontLibrary,
    alpha: f64,
    side: Direction,
    eps: f64,
) -> Result<TerraceFit, Failure> {
    fit_terrace(snaps, v, a, lib, alpha, side, &FitOptions::new(eps)).map_err(|e| Failure::from(e).in_op("fit_terrace"))
}

pub fn fit(sc: &Scenario, v: &PotentialSpec, ctx: &Ctx) -> Result<bool, Failure> {
    let sim = simulate(sc, v, ctx)?;
    let a = &sim.analysis;
    let lib = FrontLibrary::build(v, a);
    let t_end = sim.record.snapshots.last().map_or(0.0, |s| s.t);
    let late: Vec<Snapshot> = sim.record.snapshots.iter().filter(|s| s.t >= 0.5 * t_end).cloned().collect();
    let eps = match sc.diagnostics.eps.first() {
        Some(&e) => e,
        None => {
            // first pass without a centre region, then a twentieth of the slowest front
            let s_min = [Direction::Left, Direction::Right]
                .into_iter()
                .filter_map(|d| fit_side(&late, v, a, &lib, sc.alpha, d, 0.0).ok())
                .flat_map(|f| f.terrace.fronts.into_iter().map(|x| x.s))
                .fold(f64::INFINITY, f64::min);
            if s_min.is_finite() {
                0.05 * s_min
            } else {
                0.0
            }
        }
    };
    let mut pass = sim.pass;
    let mut first_err = None;
    let mut fits = Vec::new();
    for (side, name) in [(Direction::Left, "left"), (Direction::Right, "right")] {
        match fit_side(&late, v, a, &lib, sc.alpha, side, eps) {
            Ok(f) => {
                println!(
                    "{name}: q = {}, c = {:?}, residual {:.3e}, {}",
                    f.terrace.q(),
                    f.terrace.fronts.iter().map(|x| x.c).collect::<Vec<_>>(),
                    f.global_residual,
                    if f.pass { "PASS" } else { "FAIL" }
                );
                pass &= f.pass;
                write_json(&ctx.out.join(format!("terrace_{name}.json")), &f)?;
                fits.push(f);
            }
            Err(e) => {
                println!("{name}: {}", e.message);
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    let behind = |f: &TerraceFit| v.value(f.terrace.minima.last().expect("terrace minima"));
    let h = behind(&fits[0]).max(behind(&fits[1]));
    let refs: Vec<&TerraceFit> = fits.iter().collect();
    let center = center_report(&late, v, eps, h, &refs).map_err(|e| Failure::from(e).in_op("center_report"))?;
    println!(
        "centre: eps = {eps:.4}, tail dissipation {:.3e}, tail energy {:.4}",
        center.tail_dissipation, center.tail_energy
    );
    write_json(&ctx.out.join("center.json"), &center)?;
    Ok(pass)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    all_pass: bool,
    seconds: f64,
    results: &'a [CriterionResult],
}

pub fn verify(out: Option<&Path>) -> Result<bool, Failure> {
    let c = acceptance::run_campaign();
    print!("{}", c.table());
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_json(
            &dir.join("verify.json"),
            &VerifyOutput {
                all_pass: c.all_pass(),
                seconds: c.seconds,
                results: &c.results,
            },
        )?;
    }
    Ok(c.all_pass())
}
