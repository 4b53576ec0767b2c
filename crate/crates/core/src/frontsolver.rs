//! Travelling-front profiles `phi'' = -c phi' + grad V(phi)` connecting two minima.
//!
//! Two independent routes: scalar shooting with bisection on `c`, and a 4th-order
//! collocation with damped Newton that also handles systems. Profiles are stored
//! on a uniform `xi` grid together with `phi'`.

use serde::{Deserialize, Serialize};

use crate::error::FrontError;
use crate::linalg::BandMatrix;
use crate::potential::{PotentialAnalysis, PotentialSpec};

pub const NOISE_FLOOR: f64 = 1e-12;
const TAIL_LENGTH_FACTOR: f64 = 25.0;
const ENDPOINT_TOL: f64 = 1e-5;

/// Parabolic speed c -> physical speed s = c / sqrt(1 + alpha c^2).
pub fn physical_speed(c: f64, alpha: f64) -> f64 {
    c / (1.0 + alpha * c * c).sqrt()
}

/// Physical speed s -> parabolic speed c = s / sqrt(1 - alpha s^2).
pub fn parabolic_speed(s: f64, alpha: f64) -> Result<f64, FrontError> {
    let q = 1.0 - alpha * s * s;
    if q <= 0.0 {
        return Err(FrontError::SupersonicSpeed {
            s,
            alpha,
            limit: 1.0 / alpha.sqrt(),
        });
    }
    Ok(s / q.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontProfile {
    pub n: usize,
    pub c: f64,
    pub m_minus: Vec<f64>,
    pub m_plus: Vec<f64>,
    pub xi0: f64,
    pub dxi: f64,
    /// Row-major samples, `len * n`.
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// Shift applied by normalisation (original xi = stored xi + offset).
    pub offset: f64,
    pub method: String,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl FrontProfile {
    pub fn len(&self) -> usize {
        self.phi.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn xi(&self, k: usize) -> f64 {
        self.xi0 + self.dxi * k as f64
    }

    pub fn xi_max(&self) -> f64 {
        self.xi(self.len() - 1)
    }

    pub fn phi_at(&self, k: usize) -> &[f64] {
        &self.phi[k * self.n..(k + 1) * self.n]
    }

    pub fn dphi_at(&self, k: usize) -> &[f64] {
        &self.dphi[k * self.n..(k + 1) * self.n]
    }

    pub fn physical_speed(&self, alpha: f64) -> f64 {
        physical_speed(self.c, alpha)
    }

    /// Cubic Hermite interpolation of (phi, phi'); constant continuation by the
    /// endpoint states outside the sampled range.
    pub fn eval_into(&self, xi: f64, phi: &mut [f64], dphi: &mut [f64]) {
        let n = self.n;
        let len = self.len();
        let pos = (xi - self.xi0) / self.dxi;
        if pos < 0.0 {
            phi[..n].copy_from_slice(&self.m_minus);
            dphi[..n].iter_mut().for_each(|d| *d = 0.0);
            return;
        }
        if pos > (len - 1) as f64 {
            phi[..n].copy_from_slice(&self.m_plus);
            dphi[..n].iter_mut().for_each(|d| *d = 0.0);
            return;
        }
        if pos == (len - 1) as f64 {
            phi[..n].copy_from_slice(self.phi_at(len - 1));
            dphi[..n].copy_from_slice(self.dphi_at(len - 1));
            return;
        }
        let k = pos.floor() as usize;
        let t = pos - k as f64;
        let h = self.dxi;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let (a, b) = (self.phi_at(k), self.phi_at(k + 1));
        let (da, db) = (self.dphi_at(k), self.dphi_at(k + 1));
        for i in 0..n {
            phi[i] = h00 * a[i] + h10 * h * da[i] + h01 * b[i] + h11 * h * db[i];
            dphi[i] = d00 * a[i] + d10 * da[i] + d01 * b[i] + d11 * db[i];
        }
    }

    pub fn eval(&self, xi: f64) -> (Vec<f64>, Vec<f64>) {
        let mut p = vec![0.0; self.n];
        let mut d = vec![0.0; self.n];
        self.eval_into(xi, &mut p, &mut d);
        (p, d)
    }

    /// Max over interior samples of |phi'' + c phi' - grad V(phi)| with phi''
    /// from 4th-order central differences of the samples.
    pub fn ode_residual(&self, v: &PotentialSpec) -> f64 {
        let n = self.n;
        let h2 = 12.0 * self.dxi * self.dxi;
        let mut g = vec![0.0; n];
        let mut worst: f64 = 0.0;
        for k in 2..self.len().saturating_sub(2) {
            v.gradient_into(self.phi_at(k), &mut g);
            for i in 0..n {
                let f = |m: usize| self.phi[m * n + i];
                let d2 = (-f(k - 2) + 16.0 * f(k - 1) - 30.0 * f(k) + 16.0 * f(k + 1) - f(k + 2)) / h2;
                worst = worst.max((d2 + self.c * self.dphi_at(k)[i] - g[i]).abs());
            }
        }
        worst
    }

    /// (c * int |phi'|^2, V(m_plus) - V(m_minus)); the two agree for a true front.
    pub fn energy_speed_identity(&self, v: &PotentialSpec) -> (f64, f64) {
        let len = self.len();
        let mut s = 0.0;
        for k in 0..len {
            let w = if k == 0 || k == len - 1 { 0.5 } else { 1.0 };
            s += w * self.dphi_at(k).iter().map(|x| x * x).sum::<f64>();
        }
        (self.c * s * self.dxi, v.value(&self.m_plus) - v.value(&self.m_minus))
    }

    pub fn endpoint_errors(&self) -> (f64, f64) {
        (
            dist(self.phi_at(0), &self.m_minus),
            dist(self.phi_at(self.len() - 1), &self.m_plus),
        )
    }
}

// ---------------------------------------------------------------------------
// Shooting

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    pub bracket: (f64, f64),
    pub tol: f64,
    pub launch_offset: f64,
    pub step: f64,
    pub xi_max: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            bracket: (0.0, 10.0),
            tol: 1e-10,
            launch_offset: 1e-6,
            step: 5e-3,
            xi_max: 800.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Over,
    Under,
}

struct Shot {
    outcome: Outcome,
    traj: Vec<(f64, f64)>,
}

fn shoot(
    v: &PotentialSpec,
    m_minus: f64,
    m_plus: f64,
    c: f64,
    opts: &ShootingOptions,
    record: bool,
) -> Result<Shot, FrontError> {
    let poly = v.poly();
    let dir = (m_plus - m_minus).signum();
    let lam = poly.second_derivative_1d(m_minus);
    let mu = 0.5 * (-c + (c * c + 4.0 * lam).sqrt());
    let mut x = m_minus + dir * opts.launch_offset;
    let mut p = mu * dir * opts.launch_offset;
    let h = opts.step;
    let f = |x: f64, p: f64| (p, -c * p + poly.derivative_1d(x));
    let mut traj = Vec::new();
    if record {
        traj.push((x, p));
    }
    let steps = (opts.xi_max / h).ceil() as usize;
    let blow = 1e3 * (1.0 + m_minus.abs().max(m_plus.abs()));
    for k in 0..steps {
        let (k1x, k1p) = f(x, p);
        let (k2x, k2p) = f(x + 0.5 * h * k1x, p + 0.5 * h * k1p);
        let (k3x, k3p) = f(x + 0.5 * h * k2x, p + 0.5 * h * k2p);
        let (k4x, k4p) = f(x + h * k3x, p + h * k3p);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !x.is_finite() || !p.is_finite() || x.abs() > blow {
            return Err(FrontError::IntegrationBlowup {
                xi: (k + 1) as f64 * h,
                c,
            });
        }
        if record {
            traj.push((x, p));
        }
        if dir * (x - m_plus) > 0.0 {
            return Ok(Shot { outcome: Outcome::Over, traj });
        }
        if dir * p < 0.0 {
            return Ok(Shot { outcome: Outcome::Under, traj });
        }
    }
    // Undecided within xi_max: compare the Hamiltonian with its value at m_plus.
    let ham = 0.5 * p * p - poly.value_1d(x);
    let outcome = if ham > -poly.value_1d(m_plus) {
        Outcome::Over
    } else {
        Outcome::Under
    };
    Ok(Shot { outcome, traj })
}

fn profile_from_traj(traj: &[(f64, f64)], m_plus: f64, m_minus: f64, c: f64, h: f64) -> FrontProfile {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, (x, _)) in traj.iter().enumerate() {
        let d = (x - m_plus).abs();
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    let cut = &traj[..=best];
    FrontProfile {
        n: 1,
        c,
        m_minus: vec![m_minus],
        m_plus: vec![m_plus],
        xi0: 0.0,
        dxi: h,
        phi: cut.iter().map(|t| t.0).collect(),
        dphi: cut.iter().map(|t| t.1).collect(),
        offset: 0.0,
        method: "shooting".into(),
    }
}

/// Scalar bistable speed by shooting from the unstable manifold of `m_minus`
/// (the deeper state) and bisecting on `c` between overshoot and undershoot.
pub fn find_bistable_speed_scalar(
    v: &PotentialSpec,
    m_minus: f64,
    m_plus: f64,
    opts: &ShootingOptions,
) -> Result<FrontProfile, FrontError> {
    if v.dim() != 1 {
        return Err(FrontError::Invalid("shooting needs n = 1".into()));
    }
    let poly = v.poly();
    for m in [m_minus, m_plus] {
        if poly.derivative_1d(m).abs() > 1e-9 || poly.second_derivative_1d(m) <= 0.0 {
            return Err(FrontError::Invalid(format!("{m} is not a nondegenerate minimum")));
        }
    }
    let dv = poly.value_1d(m_plus) - poly.value_1d(m_minus);
    let scale = 1e-13 * (1.0 + poly.value_1d(m_plus).abs());
    if dv < -scale {
        return Err(FrontError::Invalid(
            "m_minus must be the deeper minimum (V(m_minus) <= V(m_plus))".into(),
        ));
    }
    if dv.abs() <= scale {
        let shot = shoot(v, m_minus, m_plus, 0.0, opts, true)?;
        return Ok(profile_from_traj(&shot.traj, m_plus, m_minus, 0.0, opts.step));
    }
    let (mut lo, mut hi) = opts.bracket;
    let olo = shoot(v, m_minus, m_plus, lo, opts, false)?.outcome;
    let ohi = shoot(v, m_minus, m_plus, hi, opts, false)?.outcome;
    if olo == ohi {
        return Err(FrontError::NoSignChange { lo, hi });
    }
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        let o = shoot(v, m_minus, m_plus, mid, opts, false)?.outcome;
        if o == olo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let shot = shoot(v, m_minus, m_plus, c, opts, true)?;
    Ok(profile_from_traj(&shot.traj, m_plus, m_minus, c, opts.step))
}

// ---------------------------------------------------------------------------
// Collocation

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpeedSpec {
    Fixed(f64),
    Free(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollocationOptions {
    pub nodes: usize,
    pub half_length: Option<f64>,
    /// Phase condition |phi(0) - m_plus| = d_esc.
    pub d_esc: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub refine_tol: f64,
    pub max_nodes: usize,
}

impl CollocationOptions {
    pub fn new(d_esc: f64) -> Self {
        CollocationOptions {
            nodes: 2001,
            half_length: None,
            d_esc,
            newton_tol: 1e-9,
            max_iter: 60,
            refine_tol: 1e-8,
            max_nodes: 64001,
        }
    }
}

// 4th-order stencils, coefficients to be divided by 12h (first) or 12h^2 (second).
fn d1_stencil(k: usize, len: usize) -> (usize, [f64; 5]) {
    if k == 0 {
        (0, [-25.0, 48.0, -36.0, 16.0, -3.0])
    } else if k == 1 {
        (0, [-3.0, -10.0, 18.0, -6.0, 1.0])
    } else if k == len - 2 {
        (len - 5, [-1.0, 6.0, -18.0, 10.0, 3.0])
    } else if k == len - 1 {
        (len - 5, [3.0, -16.0, 36.0, -48.0, 25.0])
    } else {
        (k - 2, [1.0, -8.0, 0.0, 8.0, -1.0])
    }
}

fn d2_stencil(k: usize, len: usize) -> (usize, Vec<f64>) {
    if k == 1 {
        (0, vec![10.0, -15.0, -4.0, 14.0, -6.0, 1.0])
    } else if k == len - 2 {
        (len - 6, vec![1.0, -6.0, 14.0, -4.0, -15.0, 10.0])
    } else {
        (k - 2, vec![-1.0, 16.0, -30.0, 16.0, -1.0])
    }
}

struct Collocation<'a> {
    v: &'a PotentialSpec,
    n: usize,
    len: usize,
    h: f64,
    k0: usize,
    m_minus: Vec<f64>,
    m_plus: Vec<f64>,
    eig_minus: (Vec<f64>, Vec<f64>),
    eig_plus: (Vec<f64>, Vec<f64>),
    d: f64,
}

impl<'a> Collocation<'a> {
    fn w(&self) -> usize {
        self.n + 1
    }

    fn residual_and_jacobian(&self, x: &[f64], want_jac: bool) -> (Vec<f64>, Option<BandMatrix>) {
        let n = self.n;
        let w = self.w();
        let len = self.len;
        let dim = len * w;
        let band = 6 * w;
        let mut f = vec![0.0; dim];
        let mut jac = if want_jac { Some(BandMatrix::zeros(dim, band, band)) } else { None };
        let phi = |k: usize, i: usize| x[k * w + i];
        let p = |k: usize| x[k * w + n];
        let h1 = 12.0 * self.h;
        let h2 = 12.0 * self.h * self.h;
        let mut g = vec![0.0; n];
        let mut u = vec![0.0; n];

        // boundary rows
        for (end, k) in [(0usize, 0usize), (1, len - 1)] {
            let c = p(k);
            let (lams, vecs) = if end == 0 { &self.eig_minus } else { &self.eig_plus };
            let m = if end == 0 { &self.m_minus } else { &self.m_plus };
            let (start, st) = d1_stencil(k, len);
            for j in 0..n {
                let lam = lams[j];
                let root = (c * c + 4.0 * lam).sqrt();
                let (mu, dmu) = if end == 0 {
                    (0.5 * (-c + root), 0.5 * (-1.0 + c / root))
                } else {
                    (0.5 * (-c - root), 0.5 * (-1.0 - c / root))
                };
                let row = k * w + j;
                let mut r = 0.0;
                let mut proj = 0.0;
                for i in 0..n {
                    let e = vecs[i * n + j];
                    let mut dphi = 0.0;
                    for (s, cw) in st.iter().enumerate() {
                        dphi += cw * phi(start + s, i);
                    }
                    dphi /= h1;
                    r += e * dphi;
                    proj += e * (phi(k, i) - m[i]);
                }
                f[row] = r - mu * proj;
                if let Some(jm) = jac.as_mut() {
                    for i in 0..n {
                        let e = vecs[i * n + j];
                        for (s, cw) in st.iter().enumerate() {
                            jm.add(row, (start + s) * w + i, e * cw / h1);
                        }
                        jm.add(row, k * w + i, -mu * e);
                    }
                    jm.add(row, k * w + n, -dmu * proj);
                }
            }
        }

        // interior ODE rows
        for k in 1..len - 1 {
            let c = p(k);
            for i in 0..n {
                u[i] = phi(k, i);
            }
            self.v.gradient_into(&u, &mut g);
            let hess = if want_jac { Some(self.v.hessian(&u)) } else { None };
            let (s1, st1) = d1_stencil(k, len);
            let (s2, st2) = d2_stencil(k, len);
            for i in 0..n {
                let row = k * w + i;
                let mut d1 = 0.0;
                for (s, cw) in st1.iter().enumerate() {
                    d1 += cw * phi(s1 + s, i);
                }
                d1 /= h1;
                let mut d2 = 0.0;
                for (s, cw) in st2.iter().enumerate() {
                    d2 += cw * phi(s2 + s, i);
                }
                d2 /= h2;
                f[row] = d2 + c * d1 - g[i];
                if let Some(jm) = jac.as_mut() {
                    for (s, cw) in st2.iter().enumerate() {
                        jm.add(row, (s2 + s) * w + i, cw / h2);
                    }
                    for (s, cw) in st1.iter().enumerate() {
                        jm.add(row, (s1 + s) * w + i, c * cw / h1);
                    }
                    let hs = hess.as_ref().unwrap();
                    for i2 in 0..n {
                        jm.add(row, k * w + i2, -hs[i * n + i2]);
                    }
                    jm.add(row, k * w + n, d1);
                }
            }
        }

        // speed links and phase condition
        for k in 0..len {
            let row = k * w + n;
            if k < self.k0 {
                f[row] = p(k) - p(k + 1);
                if let Some(jm) = jac.as_mut() {
                    jm.add(row, k * w + n, 1.0);
                    jm.add(row, (k + 1) * w + n, -1.0);
                }
            } else if k > self.k0 {
                f[row] = p(k) - p(k - 1);
                if let Some(jm) = jac.as_mut() {
                    jm.add(row, k * w + n, 1.0);
                    jm.add(row, (k - 1) * w + n, -1.0);
                }
            } else {
                let mut s = 0.0;
                for i in 0..n {
                    let dlt = phi(k, i) - self.m_plus[i];
                    s += dlt * dlt;
                    if let Some(jm) = jac.as_mut() {
                        jm.add(row, k * w + i, 2.0 * dlt);
                    }
                }
                f[row] = s - self.d * self.d;
            }
        }
        (f, jac)
    }

    fn newton(&self, mut x: Vec<f64>, tol: f64, max_iter: usize) -> Result<Vec<f64>, FrontError> {
        let norm = |f: &[f64]| f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let (mut f, _) = self.residual_and_jacobian(&x, false);
        let mut fn0 = norm(&f);
        for _ in 0..max_iter {
            if fn0 <= tol {
                return Ok(x);
            }
            let (_, jac) = self.residual_and_jacobian(&x, true);
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let dx = jac
                .unwrap()
                .solve(rhs)
                .ok_or_else(|| FrontError::NewtonStall("singular Jacobian".into()))?;
            let mut lam = 1.0;
            loop {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + lam * b).collect();
                let (ft, _) = self.residual_and_jacobian(&trial, false);
                let fnt = norm(&ft);
                if fnt.is_finite() && fnt < (1.0 - 1e-4 * lam) * fn0 {
                    x = trial;
                    f = ft;
                    fn0 = fnt;
                    break;
                }
                lam *= 0.5;
                if lam < 1.0 / 4096.0 {
                    if fn0 <= 1e3 * tol {
                        return Ok(x);
                    }
                    return Err(FrontError::NewtonStall(format!(
                        "line search failed at residual {fn0:.3e}"
                    )));
                }
            }
        }
        if fn0 <= tol {
            Ok(x)
        } else {
            Err(FrontError::NewtonStall(format!(
                "no convergence in {max_iter} iterations (residual {fn0:.3e})"
            )))
        }
    }
}

/// Slowest decay rates of the linearisation at both ends for speed c.
pub fn linear_tail_rates(v: &PotentialSpec, m_minus: &[f64], m_plus: &[f64], c: f64) -> (f64, f64) {
    let lm = v.hessian_eigenvalues(m_minus);
    let lp = v.hessian_eigenvalues(m_plus);
    let minus = lm
        .iter()
        .map(|l| 0.5 * (-c + (c * c + 4.0 * l).sqrt()))
        .fold(f64::INFINITY, f64::min);
    let plus = lp
        .iter()
        .map(|l| 0.5 * (c + (c * c + 4.0 * l).sqrt()))
        .fold(f64::INFINITY, f64::min);
    (minus, plus)
}

fn tanh_guess(m_minus: &[f64], m_plus: &[f64], xi: f64, width: f64, shift: f64) -> Vec<f64> {
    let s = 0.5 * (1.0 + ((xi + shift) / width).tanh());
    m_minus.iter().zip(m_plus).map(|(a, b)| a + (b - a) * s).collect()
}

/// Collocation solve on [-L, L] with projected boundary conditions and the
/// phase condition at xi = 0. The mesh is halved until c settles.
pub fn solve_profile_system(
    v: &PotentialSpec,
    m_minus: &[f64],
    m_plus: &[f64],
    speed: SpeedSpec,
    guess: Option<&FrontProfile>,
    opts: &CollocationOptions,
) -> Result<FrontProfile, FrontError> {
    let n = v.dim();
    if m_minus.len() != n || m_plus.len() != n {
        return Err(FrontError::Invalid("endpoint dimension mismatch".into()));
    }
    if opts.nodes < 11 || !(opts.d_esc > 0.0) {
        return Err(FrontError::Invalid("need at least 11 nodes and d_esc > 0".into()));
    }
    for m in [m_minus, m_plus] {
        let g = v.gradient(m);
        if g.iter().any(|x| x.abs() > 1e-8) || v.hessian_eigenvalues(m)[0] <= 0.0 {
            return Err(FrontError::Invalid(format!("{m:?} is not a nondegenerate minimum")));
        }
    }
    let sep = dist(m_minus, m_plus);
    if opts.d_esc >= sep {
        return Err(FrontError::Invalid("d_esc exceeds the distance between minima".into()));
    }
    let c_guess = match (speed, guess) {
        (SpeedSpec::Fixed(c), _) => c,
        (SpeedSpec::Free(_), Some(g)) => g.c,
        (SpeedSpec::Free(c), None) => c,
    };
    if let Some(g) = guess {
        if g.n != n {
            return Err(FrontError::Invalid("guess dimension mismatch".into()));
        }
        let (e0, e1) = (dist(g.phi_at(0), m_minus), dist(g.phi_at(g.len() - 1), m_plus));
        if e0 > 0.5 * sep || e1 > 0.5 * sep {
            return Err(FrontError::WrongEndpoint(format!(
                "initial guess ends at distance {e0:.3e} / {e1:.3e} from the requested minima"
            )));
        }
    }
    let (rm, rp) = linear_tail_rates(v, m_minus, m_plus, c_guess.max(0.0));
    let half = opts
        .half_length
        .unwrap_or(TAIL_LENGTH_FACTOR / rm.min(rp));
    let mut len = opts.nodes | 1;
    let lam_mean = 0.5 * (v.hessian_eigenvalues(m_minus)[0] + v.hessian_eigenvalues(m_plus)[0]);
    let width = 2.0 / lam_mean.sqrt();
    let shift = width * (1.0 - 2.0 * opts.d_esc / sep).atanh();

    let mut prev: Option<FrontProfile> = None;
    loop {
        let h = 2.0 * half / (len - 1) as f64;
        let col = Collocation {
            v,
            n,
            len,
            h,
            k0: (len - 1) / 2,
            m_minus: m_minus.to_vec(),
            m_plus: m_plus.to_vec(),
            eig_minus: v.hessian_eigen(m_minus),
            eig_plus: v.hessian_eigen(m_plus),
            d: opts.d_esc,
        };
        let w = n + 1;
        let mut x = vec![0.0; len * w];
        let c0 = prev.as_ref().map(|p| p.c).unwrap_or(c_guess);
        for k in 0..len {
            let xi = -half + h * k as f64;
            let val = match (&prev, guess) {
                (Some(p), _) => p.eval(xi).0,
                (None, Some(g)) => g.eval(xi).0,
                (None, None) => tanh_guess(m_minus, m_plus, xi, width, shift),
            };
            x[k * w..k * w + n].copy_from_slice(&val);
            x[k * w + n] = c0;
        }
        let x = col.newton(x, opts.newton_tol, opts.max_iter)?;
        let c = x[n];
        let mut phi = vec![0.0; len * n];
        let mut dphi = vec![0.0; len * n];
        for k in 0..len {
            let (s, st) = d1_stencil(k, len);
            for i in 0..n {
                phi[k * n + i] = x[k * w + i];
                let mut d = 0.0;
                for (j, cw) in st.iter().enumerate() {
                    d += cw * x[(s + j) * w + i];
                }
                dphi[k * n + i] = d / (12.0 * h);
            }
        }
        let prof = FrontProfile {
            n,
            c,
            m_minus: m_minus.to_vec(),
            m_plus: m_plus.to_vec(),
            xi0: -half,
            dxi: h,
            phi,
            dphi,
            offset: 0.0,
            method: "collocation".into(),
        };
        let (e0, e1) = prof.endpoint_errors();
        if e0 > ENDPOINT_TOL.max(1e-3 * sep) || e1 > ENDPOINT_TOL.max(1e-3 * sep) {
            return Err(FrontError::WrongEndpoint(format!(
                "converged profile ends at distance {e0:.3e} / {e1:.3e} from the minima"
            )));
        }
        let done = match &prev {
            Some(p) => (p.c - c).abs() < opts.refine_tol,
            None => false,
        };
        if done || 2 * len - 1 > opts.max_nodes {
            if let SpeedSpec::Fixed(cf) = speed {
                if (c - cf).abs() > 1e-6 {
                    return Err(FrontError::NewtonStall(format!(
                        "no front at the fixed speed {cf}; the profile equation selects c = {c:.8}"
                    )));
                }
            }
            return Ok(prof);
        }
        prev = Some(prof);
        len = 2 * len - 1;
    }
}

/// Shift xi so that the last crossing of |phi - m_plus| = d_esc sits at xi = 0.
pub fn normalize_profile(profile: &FrontProfile, d_esc: f64) -> Result<FrontProfile, FrontError> {
    let len = profile.len();
    let d = |k: usize| dist(profile.phi_at(k), &profile.m_plus);
    let mut last = None;
    for k in (0..len).rev() {
        if d(k) >= d_esc {
            last = Some(k);
            break;
        }
    }
    let k = match last {
        Some(k) if k + 1 < len => k,
        _ => return Err(FrontError::NoCrossing),
    };
    let (mut a, mut b) = (profile.xi(k), profile.xi(k + 1));
    let f = |xi: f64| dist(&profile.eval(xi).0, &profile.m_plus) - d_esc;
    if f(a) == 0.0 {
        b = a;
    }
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if f(mid) >= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    let mut out = profile.clone();
    out.xi0 -= root;
    out.offset += root;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailEnd {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub end: TailEnd,
    pub rate: f64,
    pub predicted_rates: Vec<f64>,
    pub predicted: f64,
    pub rel_err: f64,
    pub samples: usize,
    pub amplitude_range: (f64, f64),
}

/// Least-squares slope of log|phi - m| over the last clean decade of the tail.
pub fn tail_decay_rate(
    profile: &FrontProfile,
    v: &PotentialSpec,
    end: TailEnd,
) -> Result<TailFit, FrontError> {
    let len = profile.len();
    let m = match end {
        TailEnd::Plus => &profile.m_plus,
        TailEnd::Minus => &profile.m_minus,
    };
    let order: Vec<usize> = match end {
        TailEnd::Plus => (0..len).rev().collect(),
        TailEnd::Minus => (0..len).collect(),
    };
    let amp = |k: usize| dist(profile.phi_at(k), m);
    // monotone part of the tail, walking inward from the end
    let mut tail = vec![order[0]];
    for w in order.windows(2) {
        if amp(w[1]) >= amp(w[0]) {
            tail.push(w[1]);
        } else {
            break;
        }
    }
    let clean_floor = 100.0 * NOISE_FLOOR;
    let clean: Vec<usize> = tail.into_iter().filter(|&k| amp(k) >= clean_floor).collect();
    if clean.is_empty() {
        return Err(FrontError::TailTooShort("no samples above the noise floor".into()));
    }
    let a_lo = clean.iter().map(|&k| amp(k)).fold(f64::INFINITY, f64::min);
    let a_hi = clean.iter().map(|&k| amp(k)).fold(0.0, f64::max);
    if a_hi < 10.0 * a_lo {
        return Err(FrontError::TailTooShort(format!(
            "clean tail spans only [{a_lo:.2e}, {a_hi:.2e}]"
        )));
    }
    let window: Vec<usize> = clean.into_iter().filter(|&k| amp(k) <= 10.0 * a_lo).collect();
    if window.len() < 4 {
        return Err(FrontError::TailTooShort(format!(
            "only {} samples in the last decade",
            window.len()
        )));
    }
    let xs: Vec<f64> = window.iter().map(|&k| profile.xi(k)).collect();
    let ys: Vec<f64> = window.iter().map(|&k| amp(k).ln()).collect();
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let rate = match end {
        TailEnd::Plus => -slope,
        TailEnd::Minus => slope,
    };
    let c = profile.c;
    let predicted_rates: Vec<f64> = v
        .hessian_eigenvalues(m)
        .iter()
        .map(|l| match end {
            TailEnd::Plus => 0.5 * (c + (c * c + 4.0 * l).sqrt()),
            TailEnd::Minus => 0.5 * (-c + (c * c + 4.0 * l).sqrt()),
        })
        .collect();
    let predicted = predicted_rates.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(TailFit {
        end,
        rate,
        rel_err: (rate - predicted).abs() / predicted,
        predicted_rates,
        predicted,
        samples: window.len(),
        amplitude_range: (a_lo, 10.0 * a_lo),
    })
}

/// Front between two minima of an analysed potential: shooting for n = 1
/// polished by collocation, collocation from a tanh guess otherwise.
/// Returns a normalised profile. `m_lo` must be the deeper minimum.
pub fn solve_front(
    v: &PotentialSpec,
    analysis: &PotentialAnalysis,
    m_lo: &[f64],
    m_hi: &[f64],
) -> Result<FrontProfile, FrontError> {
    let d = analysis.d_esc;
    let opts = CollocationOptions::new(d);
    let prof = if v.dim() == 1 {
        let sh = find_bistable_speed_scalar(v, m_lo[0], m_hi[0], &ShootingOptions::default())?;
        let shn = normalize_profile(&sh, d)?;
        solve_profile_system(v, m_lo, m_hi, SpeedSpec::Free(shn.c), Some(&shn), &opts)?
    } else {
        let mut last_err = None;
        let mut found = None;
        for &cg in &[0.0, 0.1, 0.3, 1.0] {
            match solve_profile_system(v, m_lo, m_hi, SpeedSpec::Free(cg), None, &opts) {
                Ok(p) => {
                    found = Some(p);
                    break;
                }
                Err(e) => last_err = Some(e),
            }
        }
        match found {
            Some(p) => p,
            None => return Err(last_err.unwrap()),
        }
    };
    normalize_profile(&prof, d)
}
