//! Stacked families of bistable fronts: evaluation, fitting to simulated
//! data, and the centre-region quantities left behind by the two terraces.

use serde::{Deserialize, Serialize};

use crate::diagnostics::speed::ls_slope;
use crate::error::{FrontError, TerraceError};
use crate::frontsolver::{parabolic_speed, physical_speed, solve_front, FrontProfile};
use crate::pdesim::{trapezoid_weight, Snapshot};
use crate::potential::{PotentialAnalysis, PotentialSpec};

pub const DEFAULT_FIT_TOL: f64 = 0.02;
pub const DEFAULT_SPEED_TOL: f64 = 5e-3;
pub const MIN_PLATEAU_RUN: usize = 10;
const SAME_POINT: f64 = 1e-6;
/// Length over which a flat stretch away from all minima counts as a plateau.
const FLAT_LENGTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerraceFront {
    /// Parabolic speed.
    pub c: f64,
    /// Physical speed, positive.
    pub s: f64,
    /// Lab position at t = 0 of the affine track.
    pub x0: f64,
    /// Profile with the deeper state at -inf, invaded state at +inf.
    pub profile: FrontProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terrace {
    pub direction: Direction,
    pub alpha: f64,
    /// `m_0` (invaded) first.
    pub minima: Vec<Vec<f64>>,
    pub fronts: Vec<TerraceFront>,
}

impl Terrace {
    pub fn q(&self) -> usize {
        self.fronts.len()
    }

    /// Lab position of front i (0-based) at time t.
    pub fn position(&self, i: usize, t: f64) -> f64 {
        let f = &self.fronts[i];
        match self.direction {
            Direction::Right => f.x0 + f.s * t,
            Direction::Left => f.x0 - f.s * t,
        }
    }

    /// Violated structural conditions, empty when the terrace is well formed.
    pub fn invariant_violations(&self, v: &PotentialSpec) -> Vec<String> {
        let mut out = Vec::new();
        for w in self.minima.windows(2) {
            if !(v.value(&w[0]) > v.value(&w[1])) {
                out.push(format!("V not decreasing along the chain at {:?} -> {:?}", w[0], w[1]));
            }
        }
        for (i, w) in self.fronts.windows(2).enumerate() {
            if w[0].c < w[1].c {
                out.push(format!("speed order broken: c{} = {} < c{} = {}", i + 1, w[0].c, i + 2, w[1].c));
            }
        }
        for (i, f) in self.fronts.iter().enumerate() {
            if !(f.c > 0.0) {
                out.push(format!("front {} has non-positive speed {}", i + 1, f.c));
            }
        }
        out
    }
}

/// `m_0 + sum_i (phi_i[sqrt(1 + alpha c_i^2)(x - x_i(t))] - m_{i-1})`, mirrored for
/// left-travelling terraces.
pub fn eval_terrace(t_: &Terrace, x: f64, t: f64) -> Vec<f64> {
    let n = t_.minima[0].len();
    let mut out = t_.minima[0].clone();
    let mut phi = vec![0.0; n];
    let mut dphi = vec![0.0; n];
    for (i, f) in t_.fronts.iter().enumerate() {
        let k = (1.0 + t_.alpha * f.c * f.c).sqrt();
        let xi = match t_.direction {
            Direction::Right => k * (x - t_.position(i, t)),
            Direction::Left => k * (t_.position(i, t) - x),
        };
        f.profile.eval_into(xi, &mut phi, &mut dphi);
        for j in 0..n {
            out[j] += phi[j] - t_.minima[i][j];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryFront {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub profile: FrontProfile,
}

/// Solved fronts between minima, deeper state behind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontLibrary {
    pub fronts: Vec<LibraryFront>,
    /// Pairs the solver could not connect, with the reason.
    pub failures: Vec<(Vec<f64>, Vec<f64>, String)>,
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= SAME_POINT)
}

impl FrontLibrary {
    /// Tries every pair of minima with strictly different depth.
    pub fn build(v: &PotentialSpec, a: &PotentialAnalysis) -> Self {
        let mut lib = FrontLibrary::default();
        for (i, lo) in a.minima.iter().enumerate() {
            for (j, hi) in a.minima.iter().enumerate() {
                if a.minima_values[i] < a.minima_values[j] {
                    match solve_front(v, a, lo, hi) {
                        Ok(p) => lib.fronts.push(LibraryFront {
                            lower: lo.clone(),
                            upper: hi.clone(),
                            profile: p,
                        }),
                        Err(e) => lib.failures.push((lo.clone(), hi.clone(), e.to_string())),
                    }
                }
            }
        }
        lib
    }

    pub fn insert(&mut self, profile: FrontProfile) {
        self.fronts.push(LibraryFront {
            lower: profile.m_minus.clone(),
            upper: profile.m_plus.clone(),
            profile,
        });
    }

    /// Nearest-speed profile between the two states within `tol`.
    pub fn lookup(&self, lower: &[f64], upper: &[f64], c: f64, tol: f64) -> Result<&FrontProfile, TerraceError> {
        self.fronts
            .iter()
            .filter(|f| close(&f.lower, lower) && close(&f.upper, upper))
            .map(|f| &f.profile)
            .filter(|p| (p.c - c).abs() <= tol)
            .min_by(|a, b| (a.c - c).abs().total_cmp(&(b.c - c).abs()))
            .ok_or(TerraceError::NoLibraryFront {
                lower: lower.to_vec(),
                upper: upper.to_vec(),
                c,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub eps: f64,
    pub fit_tol: f64,
    pub speed_tol: f64,
    pub min_run: usize,
}

impl FitOptions {
    pub fn new(eps: f64) -> Self {
        FitOptions {
            eps,
            fit_tol: DEFAULT_FIT_TOL,
            speed_tol: DEFAULT_SPEED_TOL,
            min_run: MIN_PLATEAU_RUN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontResidual {
    /// Sup-norm misfit near the front after shifting the profile onto the measured crossing.
    pub alignment: f64,
    pub s_measured: f64,
    pub c_measured: f64,
    pub s_profile: f64,
    pub speed_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerraceFit {
    pub terrace: Terrace,
    pub eps: f64,
    pub fronts: Vec<FrontResidual>,
    /// Sup-norm misfit on the side region at the last snapshot.
    pub global_residual: f64,
    pub residual_series: Vec<(f64, f64)>,
    /// Measured crossings per front, lab coordinates.
    pub tracks: Vec<Vec<(f64, f64)>>,
    /// Distance between consecutive fronts grows (slope of each gap series).
    pub gap_slopes: Vec<f64>,
    pub invariant_violations: Vec<String>,
    pub snapshots_used: usize,
    pub snapshots_skipped: usize,
    pub pass: bool,
}

/// Side region of a snapshot in mirrored coordinates where the terrace moves right.
struct SideView {
    t: f64,
    n: usize,
    xs: Vec<f64>,
    us: Vec<f64>,
}

impl SideView {
    fn new(snap: &Snapshot, side: Direction, eps: f64) -> Self {
        let n = snap.n;
        let edge = eps * snap.t;
        let mut xs = Vec::new();
        let mut us = Vec::new();
        match side {
            Direction::Right => {
                for k in 0..snap.len() {
                    if snap.x(k) >= edge {
                        xs.push(snap.x(k));
                        us.extend_from_slice(snap.u_at(k));
                    }
                }
            }
            Direction::Left => {
                for k in (0..snap.len()).rev() {
                    if snap.x(k) <= -edge {
                        xs.push(-snap.x(k));
                        us.extend_from_slice(snap.u_at(k));
                    }
                }
            }
        }
        SideView { t: snap.t, n, xs, us }
    }

    fn len(&self) -> usize {
        self.xs.len()
    }

    fn u(&self, k: usize) -> &[f64] {
        &self.us[k * self.n..(k + 1) * self.n]
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Plateau chain (right to left, as minimum indices) and the crossings between
/// consecutive plateaus, in mirrored coordinates.
fn read_plateaus(
    view: &SideView,
    a: &PotentialAnalysis,
    min_run: usize,
) -> Result<(Vec<usize>, Vec<f64>), TerraceError> {
    let len = view.len();
    let half = a.d_esc / 2.0;
    let near: Vec<(usize, f64)> = (0..len).map(|k| a.nearest_minimum(view.u(k))).collect();

    // flat stretches far from every minimum, long enough to rule out front tails
    let dx = if len > 1 { (view.xs[1] - view.xs[0]).abs() } else { 1.0 };
    let win = min_run.max((FLAT_LENGTH / dx).ceil() as usize);
    if len >= win {
        for s in 0..=len - win {
            if near[s..s + win].iter().all(|&(_, d)| d >= a.d_esc) {
                let span = (0..view.n)
                    .map(|j| {
                        let vals = (s..s + win).map(|k| view.u(k)[j]);
                        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
                        hi - lo
                    })
                    .fold(0.0f64, f64::max);
                if span < a.d_esc / 4.0 {
                    return Err(TerraceError::UnknownPlateau(view.u(s + win / 2).to_vec()));
                }
            }
        }
    }

    // runs: (minimum index, first k, last k)
    let mut runs: Vec<(usize, usize, usize)> = Vec::new();
    let mut k = 0;
    while k < len {
        let (idx, d) = near[k];
        if d < half {
            let start = k;
            while k + 1 < len && near[k + 1].0 == idx && near[k + 1].1 < half {
                k += 1;
            }
            if k + 1 - start >= min_run {
                runs.push((idx, start, k));
            }
        }
        k += 1;
    }
    // merge neighbours on the same minimum, then read right to left
    let mut merged: Vec<(usize, usize, usize)> = Vec::new();
    for r in runs {
        match merged.last_mut() {
            Some(last) if last.0 == r.0 => last.2 = r.2,
            _ => merged.push(r),
        }
    }
    merged.reverse();
    let chain: Vec<usize> = merged.iter().map(|r| r.0).collect();
    let mut crossings = Vec::new();
    for w in merged.windows(2) {
        let (ahead, behind) = (&w[0], &w[1]);
        let m_up = &a.minima[ahead.0];
        let mut x = view.xs[behind.2];
        for k in (behind.2..ahead.1).rev() {
            let dk = dist(view.u(k), m_up);
            if dk >= a.d_esc {
                let dn = dist(view.u(k + 1), m_up);
                let f = if dk > dn { (dk - a.d_esc) / (dk - dn) } else { 0.0 };
                x = view.xs[k] + f * (view.xs[k + 1] - view.xs[k]);
                break;
            }
        }
        crossings.push(x);
    }
    Ok((chain, crossings))
}

/// Least-squares track `x0 + s t` aligning the profile with the data inside the
/// given windows (mirrored coordinates); `s` stays fixed unless `fit_speed`.
fn align_track(
    views: &[SideView],
    windows: &[(usize, f64, f64)],
    prof: &FrontProfile,
    k_str: f64,
    mut x0: f64,
    mut s: f64,
    fit_speed: bool,
) -> (f64, f64) {
    let n = prof.n;
    let mut phi = vec![0.0; n];
    let mut dphi = vec![0.0; n];
    let tm = if windows.is_empty() {
        0.0
    } else {
        windows.iter().map(|w| views[w.0].t).sum::<f64>() / windows.len() as f64
    };
    for _ in 0..20 {
        // unknowns: position at the mean time and speed, for conditioning
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(vi, lo, hi) in windows {
            let view = &views[vi];
            let tc = view.t - tm;
            for k in 0..view.len() {
                let x = view.xs[k];
                if x < lo || x > hi {
                    continue;
                }
                prof.eval_into(k_str * (x - x0 - s * view.t), &mut phi, &mut dphi);
                for j in 0..n {
                    let r = view.u(k)[j] - phi[j];
                    let g = -k_str * dphi[j];
                    a11 += g * g;
                    a12 += g * g * tc;
                    a22 += g * g * tc * tc;
                    b1 += g * r;
                    b2 += g * r * tc;
                }
            }
        }
        let (dp, ds) = if fit_speed {
            let det = a11 * a22 - a12 * a12;
            if !(det.abs() > 0.0) {
                break;
            }
            ((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det)
        } else if a11 > 0.0 {
            (b1 / a11, 0.0)
        } else {
            break;
        };
        // g is d phi / d p = -d r / d p, so the solve above is already the Gauss-Newton step
        x0 += dp - ds * tm;
        s += ds;
        if dp.abs() < 1e-12 && ds.abs() < 1e-14 {
            break;
        }
    }
    (x0, s)
}

/// Fits the terrace on one side of a run from late snapshots.
pub fn fit_terrace(
    snaps: &[Snapshot],
    v: &PotentialSpec,
    a: &PotentialAnalysis,
    lib: &FrontLibrary,
    alpha: f64,
    side: Direction,
    opts: &FitOptions,
) -> Result<TerraceFit, TerraceError> {
    if snaps.is_empty() {
        return Err(TerraceError::Invalid("no snapshots".into()));
    }
    let views: Vec<SideView> = snaps.iter().map(|s| SideView::new(s, side, opts.eps)).collect();
    let last = views.last().unwrap();
    let (chain, _) = read_plateaus(last, a, opts.min_run)?;
    if chain.is_empty() {
        return Err(TerraceError::Invalid("no plateau in the side region".into()));
    }
    let q = chain.len() - 1;
    let mut tracks: Vec<Vec<(f64, f64)>> = vec![Vec::new(); q];
    let mut skipped = 0;
    let mut matched = Vec::new();
    for (vi, view) in views.iter().enumerate() {
        match read_plateaus(view, a, opts.min_run) {
            Ok((c, xs)) if c == chain => {
                matched.push(vi);
                for (i, x) in xs.into_iter().enumerate() {
                    tracks[i].push((view.t, x));
                }
            }
            Ok(_) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let used = views.len() - skipped;

    let minima: Vec<Vec<f64>> = chain.iter().map(|&i| a.minima[i].clone()).collect();
    let mut fronts = Vec::with_capacity(q);
    let mut residuals = Vec::with_capacity(q);
    for i in 0..q {
        let (ts, xs): (Vec<f64>, Vec<f64>) = tracks[i].iter().copied().unzip();
        let s_cross = if ts.len() >= 2 { ls_slope(&ts, &xs) } else { f64::NAN };
        let upper = &minima[i];
        let lower = &minima[i + 1];
        let c_cross = parabolic_speed(s_cross, alpha).map_err(|e: FrontError| {
            TerraceError::Invalid(format!("front {}: {e}", i + 1))
        })?;
        let prof = lib.lookup(lower, upper, c_cross, opts.speed_tol)?;
        let s = physical_speed(prof.c, alpha);
        let k_str = (1.0 + alpha * prof.c * prof.c).sqrt();
        // fitting windows: halfway to the neighbouring crossings, at most 10 units
        let windows: Vec<(usize, f64, f64)> = matched
            .iter()
            .enumerate()
            .map(|(j, &vi)| {
                let xc = tracks[i][j].1;
                let ahead = if i == 0 { f64::INFINITY } else { tracks[i - 1][j].1 };
                let behind = if i + 1 < q { tracks[i + 1][j].1 } else { f64::NEG_INFINITY };
                (vi, (0.5 * (xc + behind)).max(xc - 10.0), (0.5 * (xc + ahead)).min(xc + 10.0))
            })
            .collect();
        let x0c = ts.iter().zip(&xs).map(|(t, x)| x - s * t).sum::<f64>() / ts.len() as f64;
        let (x0m, _) = align_track(&views, &windows, prof, k_str, x0c, s, false);
        let x0j = ts.iter().zip(&xs).map(|(t, x)| x - s_cross * t).sum::<f64>() / ts.len() as f64;
        let (_, s_meas) = align_track(&views, &windows, prof, k_str, x0j, s_cross, true);
        let c_meas = parabolic_speed(s_meas, alpha).unwrap_or(c_cross);
        fronts.push(TerraceFront {
            c: prof.c,
            s,
            x0: match side {
                Direction::Right => x0m,
                Direction::Left => -x0m,
            },
            profile: prof.clone(),
        });
        residuals.push(FrontResidual {
            alignment: 0.0,
            s_measured: s_meas,
            c_measured: c_meas,
            s_profile: s,
            speed_residual: (s_meas - s).abs(),
        });
    }
    let terrace = Terrace {
        direction: side,
        alpha,
        minima,
        fronts,
    };

    let n = a.n;
    let mut residual_series = Vec::with_capacity(views.len());
    for view in &views {
        let mut r = 0.0f64;
        for k in 0..view.len() {
            let x = match side {
                Direction::Right => view.xs[k],
                Direction::Left => -view.xs[k],
            };
            r = r.max(dist(view.u(k), &eval_terrace(&terrace, x, view.t)));
        }
        residual_series.push((view.t, r));
    }
    let global_residual = residual_series.last().map(|p| p.1).unwrap_or(f64::NAN);

    // alignment at the last snapshot, window bounded by the neighbouring crossings
    let mut phi = vec![0.0; n];
    let mut dphi = vec![0.0; n];
    for i in 0..q {
        let Some(&(_, xc)) = tracks[i].last() else { continue };
        let ahead = if i == 0 { f64::INFINITY } else { tracks[i - 1].last().map_or(f64::INFINITY, |p| p.1) };
        let behind = tracks.get(i + 1).and_then(|t| t.last()).map_or(f64::NEG_INFINITY, |p| p.1);
        let hi = (0.5 * (xc + ahead)).min(xc + 20.0);
        let lo = (0.5 * (xc + behind)).max(xc - 20.0);
        let f = &terrace.fronts[i];
        let k_str = (1.0 + alpha * f.c * f.c).sqrt();
        let mut r = 0.0f64;
        for k in 0..last.len() {
            let x = last.xs[k];
            if x < lo || x > hi {
                continue;
            }
            f.profile.eval_into(k_str * (x - xc), &mut phi, &mut dphi);
            r = r.max(dist(last.u(k), &phi));
        }
        residuals[i].alignment = r;
    }

    let mut violations = terrace.invariant_violations(v);
    let mut gap_slopes = Vec::new();
    for i in 0..q.saturating_sub(1) {
        let mut ts = Vec::new();
        let mut gs = Vec::new();
        for (p, r) in tracks[i].iter().zip(&tracks[i + 1]) {
            ts.push(p.0);
            gs.push(p.1 - r.1);
        }
        let g = if ts.len() >= 2 { ls_slope(&ts, &gs) } else { f64::NAN };
        if !(g > 0.0) {
            violations.push(format!("gap between fronts {} and {} not growing (slope {g})", i + 1, i + 2));
        }
        gap_slopes.push(g);
    }
    let lab_tracks = tracks
        .into_iter()
        .map(|tr| {
            tr.into_iter()
                .map(|(t, x)| (t, if side == Direction::Left { -x } else { x }))
                .collect()
        })
        .collect();
    let pass = global_residual < opts.fit_tol && violations.is_empty();
    Ok(TerraceFit {
        terrace,
        eps: opts.eps,
        fronts: residuals,
        global_residual,
        residual_series,
        tracks: lab_tracks,
        gap_slopes,
        invariant_violations: violations,
        snapshots_used: used,
        snapshots_skipped: skipped,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterSample {
    pub t: f64,
    /// `sup_{x in [-eps t, eps t]} int_x^{x+1} |u_t|^2`.
    pub sup_dissipation: f64,
    /// `int_{-eps t}^{eps t} (|u_x|^2/2 + V(u) - h)`.
    pub residual_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterReport {
    pub eps: f64,
    pub h: f64,
    pub samples: Vec<CenterSample>,
    /// Means over the last fifth of the samples.
    pub tail_dissipation: f64,
    pub tail_energy: f64,
    pub min_energy: f64,
}

pub fn center_sample(snap: &Snapshot, v: &PotentialSpec, eps: f64, h: f64) -> CenterSample {
    let n = snap.n;
    let len = snap.len();
    let half = eps * snap.t;
    let ux = snap.ux();
    // cumulative trapezoid of |u_t|^2
    let mut cum = vec![0.0; len];
    let ut2 = |k: usize| snap.ut_at(k).iter().map(|x| x * x).sum::<f64>();
    for k in 1..len {
        cum[k] = cum[k - 1] + 0.5 * snap.dx * (ut2(k - 1) + ut2(k));
    }
    let step = (1.0 / snap.dx).round() as usize;
    let mut sup = 0.0f64;
    let mut energy = 0.0;
    let inside: Vec<usize> = (0..len).filter(|&k| snap.x(k).abs() <= half).collect();
    for &k in &inside {
        if k + step < len {
            sup = sup.max(cum[k + step] - cum[k]);
        }
    }
    if let (Some(&k0), Some(&k1)) = (inside.first(), inside.last()) {
        for k in k0..=k1 {
            let mut dens = v.value(snap.u_at(k)) - h;
            for i in 0..n {
                dens += 0.5 * ux[k * n + i] * ux[k * n + i];
            }
            let w = if k1 == k0 { 0.0 } else { trapezoid_weight(k - k0, k1 - k0 + 1) };
            energy += w * dens * snap.dx;
        }
    }
    CenterSample {
        t: snap.t,
        sup_dissipation: sup,
        residual_energy: energy,
    }
}

/// Centre-region dissipation and residual energy relative to the plateau level `h`.
/// Fronts of the given fits must stay outside `[-eps t, eps t]` over the late
/// snapshots.
pub fn center_report(
    snaps: &[Snapshot],
    v: &PotentialSpec,
    eps: f64,
    h: f64,
    fits: &[&TerraceFit],
) -> Result<CenterReport, TerraceError> {
    if snaps.is_empty() {
        return Err(TerraceError::Invalid("no snapshots".into()));
    }
    let t_end = snaps.last().unwrap().t;
    for fit in fits {
        for i in 0..fit.terrace.q() {
            for s in snaps.iter().filter(|s| s.t >= 2.0 * t_end / 3.0) {
                let x = fit.terrace.position(i, s.t);
                if x.abs() <= eps * s.t {
                    return Err(TerraceError::CenterContaminated(s.t));
                }
            }
        }
    }
    let samples: Vec<CenterSample> = snaps.iter().map(|s| center_sample(s, v, eps, h)).collect();
    let tail = (samples.len() / 5).max(1);
    let tail_s = &samples[samples.len() - tail..];
    Ok(CenterReport {
        eps,
        h,
        tail_dissipation: tail_s.iter().map(|s| s.sup_dissipation).sum::<f64>() / tail as f64,
        tail_energy: tail_s.iter().map(|s| s.residual_energy).sum::<f64>() / tail as f64,
        min_energy: samples.iter().map(|s| s.residual_energy).fold(f64::INFINITY, f64::min),
        samples,
    })
}

/// The two behind-states left by the terraces must have equal potential.
pub fn behind_levels_match(v: &PotentialSpec, left: &TerraceFit, right: &TerraceFit, tol: f64) -> bool {
    let l = left.terrace.minima.last().unwrap();
    let r = right.terrace.minima.last().unwrap();
    (v.value(l) - v.value(r)).abs() <= tol
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianProfile {
    pub t: f64,
    pub x0: f64,
    pub dx: f64,
    /// `|u_x|^2/2 - V(u)`.
    pub h: Vec<f64>,
    /// `d_x H - u_x . u_t` for parabolic runs; `d_x H - u_x . (u_xx - grad V)` otherwise.
    pub residual: Vec<f64>,
    pub parabolic: bool,
}

pub fn hamiltonian_profile(snap: &Snapshot, v: &PotentialSpec, alpha: f64) -> HamiltonianProfile {
    let n = snap.n;
    let len = snap.len();
    let ux = snap.ux();
    let dx = snap.dx;
    let h: Vec<f64> = (0..len)
        .map(|k| {
            let s: f64 = (0..n).map(|i| 0.5 * ux[k * n + i] * ux[k * n + i]).sum();
            s - v.value(snap.u_at(k))
        })
        .collect();
    let mut residual = vec![0.0; len];
    let mut g = vec![0.0; n];
    for k in 1..len.saturating_sub(1) {
        let dh = (h[k + 1] - h[k - 1]) / (2.0 * dx);
        let mut rhs = 0.0;
        if alpha == 0.0 {
            for i in 0..n {
                rhs += ux[k * n + i] * snap.ut[k * n + i];
            }
        } else {
            v.gradient_into(snap.u_at(k), &mut g);
            for i in 0..n {
                let uxx = (snap.u[(k + 1) * n + i] - 2.0 * snap.u[k * n + i] + snap.u[(k - 1) * n + i]) / (dx * dx);
                rhs += ux[k * n + i] * (uxx - g[i]);
            }
        }
        residual[k] = dh - rhs;
    }
    HamiltonianProfile {
        t: snap.t,
        x0: snap.x0,
        dx,
        h,
        residual,
        parabolic: alpha == 0.0,
    }
}
