//! Damped leapfrog for `alpha u_tt + u_t = u_xx - grad V(u)` on a bounded
//! interval with mirror (Neumann) boundaries. `alpha = 0` switches to explicit
//! Euler for the parabolic limit.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::frontsolver::FrontProfile;
use crate::potential::PotentialSpec;

/// Fraction of the domain at each end watched for boundary breaches.
pub const BOUNDARY_LAYER: f64 = 0.05;
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-3;
/// Interfaces must sit at least this many widths away from the boundary.
pub const INTERFACE_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub alpha: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dt: f64,
    /// Stiffness bound used by the stability check.
    pub lambda_max: Option<f64>,
    /// `None` disables the boundary-breach check.
    pub boundary_tol: Option<f64>,
}

impl SimConfig {
    pub fn len(&self) -> usize {
        ((self.x_max - self.x_min) / self.dx).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x_min + self.dx * k as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CflReport {
    pub ok: bool,
    pub dt: f64,
    pub dt_max: f64,
    pub wave_bound: Option<f64>,
    pub reaction_bound: Option<f64>,
    pub diffusion_bound: Option<f64>,
}

/// Stability bounds: `dt <= 0.9 dx sqrt(alpha)` and `dt <= 0.2 / lambda_max`
/// for the leapfrog, `dt <= 0.45 dx^2` for explicit Euler.
pub fn cfl_check(alpha: f64, dx: f64, dt: f64, lambda_max: Option<f64>) -> CflReport {
    let mut rep = CflReport {
        ok: true,
        dt,
        dt_max: f64::INFINITY,
        wave_bound: None,
        reaction_bound: None,
        diffusion_bound: None,
    };
    if alpha > 0.0 {
        let w = 0.9 * dx * alpha.sqrt();
        rep.wave_bound = Some(w);
        rep.dt_max = w;
        if let Some(l) = lambda_max {
            if l > 0.0 {
                let r = 0.2 / l;
                rep.reaction_bound = Some(r);
                rep.dt_max = rep.dt_max.min(r);
            }
        }
    } else {
        let d = 0.45 * dx * dx;
        rep.diffusion_bound = Some(d);
        rep.dt_max = d;
    }
    rep.ok = dt > 0.0 && dt <= rep.dt_max * (1.0 + 1e-12);
    rep
}

/// Safety-scaled time step from the tightest bound.
pub fn auto_dt(alpha: f64, dx: f64, lambda_max: Option<f64>, safety: f64) -> f64 {
    safety * cfl_check(alpha, dx, 1.0, lambda_max).dt_max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    /// Plateau values from left to right, `interfaces.len() + 1` of them.
    pub plateaus: Vec<Vec<f64>>,
    pub interfaces: Vec<f64>,
    pub width: f64,
}

impl InitialCondition {
    pub fn value_at(&self, x: f64) -> Vec<f64> {
        let mut u = self.plateaus[0].clone();
        for (i, xi) in self.interfaces.iter().enumerate() {
            let s = 0.5 * (1.0 + ((x - xi) / self.width).tanh());
            for (j, uj) in u.iter_mut().enumerate() {
                *uj += (self.plateaus[i + 1][j] - self.plateaus[i][j]) * s;
            }
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialData {
    Plateaus(InitialCondition),
    /// Sampled fields on the simulation grid, row-major `len * n`.
    Field { u: Vec<f64>, ut: Vec<f64> },
}

/// Samples `phi(k (x - x_front))` with `k = sqrt(1 + alpha c^2)` and the matching
/// travelling velocity `-s k phi'`.
pub fn front_field(profile: &FrontProfile, cfg: &SimConfig, x_front: f64) -> (Vec<f64>, Vec<f64>) {
    let n = profile.n;
    let len = cfg.len();
    let k = (1.0 + cfg.alpha * profile.c * profile.c).sqrt();
    let s = profile.physical_speed(cfg.alpha);
    let mut u = vec![0.0; len * n];
    let mut ut = vec![0.0; len * n];
    let mut p = vec![0.0; n];
    let mut d = vec![0.0; n];
    for j in 0..len {
        profile.eval_into(k * (cfg.x(j) - x_front), &mut p, &mut d);
        for i in 0..n {
            u[j * n + i] = p[i];
            ut[j * n + i] = -s * k * d[i];
        }
    }
    (u, ut)
}

#[derive(Debug, Clone)]
pub struct FieldState {
    pub n: usize,
    pub x0: f64,
    pub dx: f64,
    pub len: usize,
    pub alpha: f64,
    pub dt: f64,
    pub t: f64,
    pub steps: u64,
    pub u: Vec<f64>,
    pub u_prev: Vec<f64>,
    scratch: Vec<f64>,
    end_left: Vec<f64>,
    end_right: Vec<f64>,
    boundary_tol: Option<f64>,
}

impl FieldState {
    pub fn x(&self, k: usize) -> f64 {
        self.x0 + self.dx * k as f64
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len - 1)
    }

    pub fn end_states(&self) -> (&[f64], &[f64]) {
        (&self.end_left, &self.end_right)
    }

    pub fn parabolic(&self) -> bool {
        self.alpha == 0.0
    }

    /// `u_xx - grad V(u)` with mirror ghosts.
    pub fn forcing_into(&self, v: &PotentialSpec, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let len = self.len;
        let inv = 1.0 / (self.dx * self.dx);
        if n == 1 {
            let poly = v.poly();
            for k in 0..len {
                let l = if k == 0 { u[1] } else { u[k - 1] };
                let r = if k == len - 1 { u[len - 2] } else { u[k + 1] };
                out[k] = ((l + r) - 2.0 * u[k]) * inv - poly.derivative_1d(u[k]);
            }
            return;
        }
        let mut g = vec![0.0; n];
        for k in 0..len {
            let kl = if k == 0 { 1 } else { k - 1 };
            let kr = if k == len - 1 { len - 2 } else { k + 1 };
            v.gradient_into(&u[k * n..(k + 1) * n], &mut g);
            for i in 0..n {
                out[k * n + i] =
                    ((u[kl * n + i] + u[kr * n + i]) - 2.0 * u[k * n + i]) * inv - g[i];
            }
        }
    }

    fn advance_into(&self, v: &PotentialSpec, out: &mut [f64]) {
        self.forcing_into(v, &self.u, out);
        let dt = self.dt;
        if self.parabolic() {
            for (o, u) in out.iter_mut().zip(&self.u) {
                *o = u + dt * *o;
            }
        } else {
            let a = self.alpha;
            let inv = 1.0 / (a + 0.5 * dt);
            let dt2 = dt * dt;
            for ((o, u), up) in out.iter_mut().zip(&self.u).zip(&self.u_prev) {
                *o = (dt2 * *o + a * (2.0 * u - up) + 0.5 * dt * up) * inv;
            }
        }
    }

    /// Time derivative at the current level: centred `(u+ - u-) / 2dt` for the
    /// leapfrog, the PDE right-hand side in the parabolic case.
    pub fn velocity(&self, v: &PotentialSpec) -> Vec<f64> {
        let mut out = vec![0.0; self.u.len()];
        if self.parabolic() {
            self.forcing_into(v, &self.u, &mut out);
            return out;
        }
        self.advance_into(v, &mut out);
        let inv = 0.5 / self.dt;
        for (o, up) in out.iter_mut().zip(&self.u_prev) {
            *o = (*o - up) * inv;
        }
        out
    }

    pub fn snapshot(&self, v: &PotentialSpec) -> Snapshot {
        Snapshot {
            t: self.t,
            x0: self.x0,
            dx: self.dx,
            n: self.n,
            u: self.u.clone(),
            ut: self.velocity(v),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.n;
        (0..self.len)
            .map(|k| {
                self.u[k * n..(k + 1) * n]
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Builds the initial state; the leapfrog start level `u(-dt)` comes from a
/// second-order Taylor expansion that uses the PDE for `u_tt`.
pub fn init_state(
    v: &PotentialSpec,
    cfg: &SimConfig,
    data: &InitialData,
) -> Result<FieldState, SimError> {
    let n = v.dim();
    if !(cfg.dx > 0.0) || !(cfg.dt > 0.0) || !(cfg.x_max > cfg.x_min) || cfg.alpha < 0.0 {
        return Err(SimError::Invalid("need dx, dt > 0, x_max > x_min, alpha >= 0".into()));
    }
    let cfl = cfl_check(cfg.alpha, cfg.dx, cfg.dt, cfg.lambda_max);
    if !cfl.ok {
        return Err(SimError::Cfl(format!(
            "dt = {} exceeds the bound {}",
            cfg.dt, cfl.dt_max
        )));
    }
    let len = cfg.len();
    if len < 8 {
        return Err(SimError::Invalid("grid needs at least 8 nodes".into()));
    }
    let (u, u1) = match data {
        InitialData::Plateaus(ic) => {
            if ic.plateaus.len() != ic.interfaces.len() + 1
                || ic.plateaus.iter().any(|p| p.len() != n)
                || !(ic.width > 0.0)
            {
                return Err(SimError::Invalid("malformed plateau initial condition".into()));
            }
            if ic.interfaces.windows(2).any(|w| w[1] <= w[0]) {
                return Err(SimError::Invalid("interfaces must increase".into()));
            }
            let margin = INTERFACE_MARGIN * ic.width;
            for &xi in &ic.interfaces {
                if xi - cfg.x_min < margin || cfg.x_max - xi < margin {
                    return Err(SimError::DomainTooSmall { x: xi, margin });
                }
            }
            let mut u = Vec::with_capacity(len * n);
            for k in 0..len {
                u.extend(ic.value_at(cfg.x(k)));
            }
            (u, vec![0.0; len * n])
        }
        InitialData::Field { u, ut } => {
            if u.len() != len * n || ut.len() != len * n {
                return Err(SimError::Invalid(format!(
                    "field data has {} / {} values, grid needs {}",
                    u.len(),
                    ut.len(),
                    len * n
                )));
            }
            (u.clone(), ut.clone())
        }
    };
    if let Some(k) = u.iter().chain(&u1).position(|x| !x.is_finite()) {
        return Err(SimError::NonFinite { x: cfg.x((k % (len * n)) / n), t: 0.0 });
    }
    let mut st = FieldState {
        n,
        x0: cfg.x_min,
        dx: cfg.dx,
        len,
        alpha: cfg.alpha,
        dt: cfg.dt,
        t: 0.0,
        steps: 0,
        end_left: u[..n].to_vec(),
        end_right: u[(len - 1) * n..].to_vec(),
        u: u.clone(),
        u_prev: u.clone(),
        scratch: vec![0.0; len * n],
        boundary_tol: cfg.boundary_tol,
    };
    if cfg.alpha > 0.0 {
        let mut f = vec![0.0; len * n];
        st.forcing_into(v, &u, &mut f);
        let dt = cfg.dt;
        for j in 0..len * n {
            let utt = (f[j] - u1[j]) / cfg.alpha;
            st.u_prev[j] = u[j] - dt * u1[j] + 0.5 * dt * dt * utt;
        }
    }
    Ok(st)
}

fn check_boundary(st: &FieldState) -> Result<(), SimError> {
    let tol = match st.boundary_tol {
        Some(t) => t,
        None => return Ok(()),
    };
    let n = st.n;
    let layer = ((BOUNDARY_LAYER * st.len as f64).ceil() as usize).max(1);
    for (side, range, end) in [
        ("left", 0..layer, &st.end_left),
        ("right", st.len - layer..st.len, &st.end_right),
    ] {
        let mut worst: f64 = 0.0;
        for k in range {
            for i in 0..n {
                worst = worst.max((st.u[k * n + i] - end[i]).abs());
            }
        }
        if worst > tol {
            return Err(SimError::BoundaryBreach {
                t: st.t,
                side,
                deviation: worst,
            });
        }
    }
    Ok(())
}

/// One time step.
pub fn step(st: &mut FieldState, v: &PotentialSpec) -> Result<(), SimError> {
    let mut next = std::mem::take(&mut st.scratch);
    st.advance_into(v, &mut next);
    if let Some(k) = next.iter().position(|x| !x.is_finite()) {
        let x = st.x(k / st.n);
        st.scratch = next;
        return Err(SimError::NonFinite { x, t: st.t + st.dt });
    }
    std::mem::swap(&mut st.u_prev, &mut st.u);
    std::mem::swap(&mut st.u, &mut next);
    st.scratch = next;
    st.steps += 1;
    st.t = st.steps as f64 * st.dt;
    check_boundary(st)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

impl Snapshot {
    pub fn len(&self) -> usize {
        self.u.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + self.dx * k as f64
    }

    pub fn u_at(&self, k: usize) -> &[f64] {
        &self.u[k * self.n..(k + 1) * self.n]
    }

    pub fn ut_at(&self, k: usize) -> &[f64] {
        &self.ut[k * self.n..(k + 1) * self.n]
    }

    /// Centred `u_x`, zero at the mirror boundaries.
    pub fn ux(&self) -> Vec<f64> {
        let n = self.n;
        let len = self.len();
        let mut out = vec![0.0; len * n];
        for k in 1..len - 1 {
            for i in 0..n {
                out[k * n + i] = (self.u[(k + 1) * n + i] - self.u[(k - 1) * n + i]) / (2.0 * self.dx);
            }
        }
        out
    }

    /// Grid index nearest to x, clamped.
    pub fn index_of(&self, x: f64) -> usize {
        let k = ((x - self.x0) / self.dx).round();
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }
}

/// Trapezoid weights on a uniform grid.
pub fn trapezoid_weight(k: usize, len: usize) -> f64 {
    if k == 0 || k == len - 1 {
        0.5
    } else {
        1.0
    }
}

/// `E = int alpha |u_t|^2/2 + |u_x|^2/2 + V(u)` by the trapezoid rule.
pub fn global_energy(snap: &Snapshot, v: &PotentialSpec, alpha: f64) -> f64 {
    let n = snap.n;
    let len = snap.len();
    let ux = snap.ux();
    let mut e = 0.0;
    for k in 0..len {
        let mut dens = v.value(snap.u_at(k));
        for i in 0..n {
            let a = snap.ut[k * n + i];
            let b = ux[k * n + i];
            dens += 0.5 * alpha * a * a + 0.5 * b * b;
        }
        e += trapezoid_weight(k, len) * dens;
    }
    e * snap.dx
}

/// `D = int |u_t|^2`.
pub fn dissipation_rate(snap: &Snapshot) -> f64 {
    let n = snap.n;
    let len = snap.len();
    let mut d = 0.0;
    for k in 0..len {
        let s: f64 = snap.ut_at(k).iter().map(|x| x * x).sum();
        d += trapezoid_weight(k, len) * s;
    }
    let _ = n;
    d * snap.dx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeTracking {
    pub d_esc: f64,
    pub m_left: Vec<f64>,
    pub m_right: Vec<f64>,
}

/// Rightmost position where `|u - m| >= d` (linear interpolation of the
/// distance between nodes), or -inf when u stays within d of m.
pub fn escape_from_right(snap: &Snapshot, m: &[f64], d: f64) -> f64 {
    let len = snap.len();
    let dist = |k: usize| {
        snap.u_at(k)
            .iter()
            .zip(m)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    for k in (0..len).rev() {
        let dk = dist(k);
        if dk >= d {
            if k == len - 1 {
                return snap.x(k);
            }
            let dn = dist(k + 1);
            let f = (dk - d) / (dk - dn);
            return snap.x(k) + f * snap.dx;
        }
    }
    f64::NEG_INFINITY
}

/// Leftmost position where `|u - m| >= d`, or +inf.
pub fn escape_from_left(snap: &Snapshot, m: &[f64], d: f64) -> f64 {
    let len = snap.len();
    let dist = |k: usize| {
        snap.u_at(k)
            .iter()
            .zip(m)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    for k in 0..len {
        let dk = dist(k);
        if dk >= d {
            if k == 0 {
                return snap.x(0);
            }
            let dp = dist(k - 1);
            let f = (dk - d) / (dk - dp);
            return snap.x(k) - f * snap.dx;
        }
    }
    f64::INFINITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarSample {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub x_esc_left: f64,
    pub x_esc_right: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
    /// Record a scalar sample every this many steps (0 = never).
    pub scalar_every: usize,
    pub escape: Option<EscapeTracking>,
    /// Attracting-ball radius to monitor against.
    pub sup_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub alpha: f64,
    pub dt: f64,
    pub steps: u64,
    pub snapshots: Vec<Snapshot>,
    pub scalars: Vec<ScalarSample>,
    pub max_abs_u: f64,
    pub within_sup_bound: Option<bool>,
    pub wall_seconds: f64,
}

fn scalar_sample(st: &FieldState, v: &PotentialSpec, esc: Option<&EscapeTracking>) -> ScalarSample {
    let snap = st.snapshot(v);
    let (l, r) = match esc {
        Some(e) => (
            escape_from_left(&snap, &e.m_left, e.d_esc),
            escape_from_right(&snap, &e.m_right, e.d_esc),
        ),
        None => (f64::NAN, f64::NAN),
    };
    ScalarSample {
        t: st.t,
        energy: global_energy(&snap, v, st.alpha),
        dissipation: dissipation_rate(&snap),
        x_esc_left: l,
        x_esc_right: r,
    }
}

/// Advances to `t_final`, taking snapshots at the requested times (rounded to
/// the nearest step) and scalar samples at a fixed stride.
pub fn run(st: &mut FieldState, v: &PotentialSpec, opts: &RunOptions) -> Result<RunRecord, SimError> {
    let start = Instant::now();
    let t0 = st.t;
    let total = ((opts.t_final - t0) / st.dt).round().max(0.0) as u64 + st.steps;
    let mut snap_steps: Vec<u64> = opts
        .snapshot_times
        .iter()
        .filter(|&&t| t >= t0 - 1e-12 && t <= opts.t_final + 1e-12)
        .map(|&t| (t / st.dt).round() as u64)
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();
    let mut next_snap = 0;
    let mut rec = RunRecord {
        alpha: st.alpha,
        dt: st.dt,
        steps: 0,
        snapshots: Vec::new(),
        scalars: Vec::new(),
        max_abs_u: st.max_abs(),
        within_sup_bound: None,
        wall_seconds: 0.0,
    };
    loop {
        while next_snap < snap_steps.len() && snap_steps[next_snap] <= st.steps {
            if snap_steps[next_snap] == st.steps {
                rec.snapshots.push(st.snapshot(v));
            }
            next_snap += 1;
        }
        if opts.scalar_every > 0 && st.steps % opts.scalar_every as u64 == 0 {
            rec.scalars.push(scalar_sample(st, v, opts.escape.as_ref()));
            rec.max_abs_u = rec.max_abs_u.max(st.max_abs());
        }
        if st.steps >= total {
            break;
        }
        step(st, v)?;
    }
    rec.max_abs_u = rec.max_abs_u.max(st.max_abs());
    rec.within_sup_bound = opts.sup_bound.map(|r| rec.max_abs_u <= r);
    rec.steps = st.steps;
    rec.wall_seconds = start.elapsed().as_secs_f64();
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alpha: f64, l: f64, dx: f64, dt: f64) -> SimConfig {
        SimConfig {
            alpha,
            x_min: -l,
            x_max: l,
            dx,
            dt,
            lambda_max: Some(2.0),
            boundary_tol: Some(DEFAULT_BOUNDARY_TOL),
        }
    }

    #[test]
    fn cfl_examples() {
        assert!(cfl_check(1.0, 0.05, 0.01, Some(1.0)).ok);
        let r = cfl_check(0.01, 0.05, 0.01, None);
        assert!(!r.ok);
        assert!((r.dt_max - 0.0045).abs() < 1e-15);
        let p = cfl_check(0.0, 0.1, 0.004, None);
        assert!(p.ok);
        assert!(!cfl_check(0.0, 0.1, 0.005, None).ok);
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let v = PotentialSpec::allen_cahn();
        let c = cfg(1.0, 10.0, 0.05, 0.01);
        let ic = InitialCondition { plateaus: vec![vec![1.0]], interfaces: vec![], width: 1.0 };
        let mut st = init_state(&v, &c, &InitialData::Plateaus(ic)).unwrap();
        for _ in 0..1000 {
            step(&mut st, &v).unwrap();
        }
        assert!(st.u.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn interface_too_close_to_boundary() {
        let v = PotentialSpec::allen_cahn();
        let c = cfg(1.0, 10.0, 0.05, 0.01);
        let ic = InitialCondition {
            plateaus: vec![vec![-1.0], vec![1.0]],
            interfaces: vec![5.0],
            width: 1.0,
        };
        assert!(matches!(
            init_state(&v, &c, &InitialData::Plateaus(ic)),
            Err(SimError::DomainTooSmall { .. })
        ));
    }

    #[test]
    fn breach_is_detected() {
        let v = PotentialSpec::nagumo(0.25).unwrap();
        let c = cfg(1.0, 20.0, 0.05, 0.01);
        let ic = InitialCondition {
            plateaus: vec![vec![1.0], vec![0.0]],
            interfaces: vec![-5.0],
            width: 0.5,
        };
        let mut st = init_state(&v, &c, &InitialData::Plateaus(ic)).unwrap();
        let opts = RunOptions { t_final: 200.0, ..Default::default() };
        assert!(matches!(run(&mut st, &v, &opts), Err(SimError::BoundaryBreach { side: "right", .. })));
    }

    #[test]
    fn reflection_symmetry_is_exact() {
        let v = PotentialSpec::allen_cahn();
        let c = cfg(1.0, 30.0, 0.05, 0.01);
        let ic = InitialCondition {
            plateaus: vec![vec![-1.0], vec![1.0], vec![-1.0], vec![1.0]],
            interfaces: vec![-9.0, 0.0, 9.0],
            width: 1.0,
        };
        let mut st = init_state(&v, &c, &InitialData::Plateaus(ic)).unwrap();
        // the tanh ramps are odd about 0 up to rounding; symmetrise explicitly
        let len = st.len;
        for k in 0..len / 2 {
            let a = st.u[k];
            st.u[len - 1 - k] = -a;
            let b = st.u_prev[k];
            st.u_prev[len - 1 - k] = -b;
        }
        st.u[len / 2] = 0.0;
        st.u_prev[len / 2] = 0.0;
        for _ in 0..2000 {
            step(&mut st, &v).unwrap();
        }
        for k in 0..len {
            assert!((st.u[k] + st.u[len - 1 - k]).abs() <= 1e-12);
        }
    }
}
