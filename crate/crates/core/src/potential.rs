//! Polynomial potentials: builtins, critical points, the escape distance and the
//! scalar constants every other module reads.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::PotentialError;
use crate::polynomial::{Polynomial, Term};

const DEDUP_TOL: f64 = 1e-6;
const DEGENERATE_TOL: f64 = 1e-8;
const NEWTON_TOL: f64 = 1e-11;
const NEWTON_MAX_ITER: usize = 400;
const ESCAPE_BISECTION_ITERS: usize = 60;
const ESCAPE_REFINE_TOL: f64 = 1e-4;

/// How a potential was written down. Serialized back verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialDef {
    Builtin {
        builtin: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Terms { n: usize, terms: Vec<Term> },
}

#[derive(Debug, Clone)]
pub struct PotentialSpec {
    def: PotentialDef,
    poly: Polynomial,
}

impl Serialize for PotentialSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.def.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PotentialSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let def = PotentialDef::deserialize(d)?;
        PotentialSpec::from_def(def).map_err(serde::de::Error::custom)
    }
}

fn param(params: &BTreeMap<String, f64>, key: &str) -> Result<f64, PotentialError> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| PotentialError::Invalid(format!("missing parameter '{key}'")))
}

fn t1(coeff: f64, p: u32) -> Term {
    Term { coeff, powers: vec![p] }
}

/// Coefficients (s, p) of (u - a1)(u - a2) = u^2 - s u + p for the triple well
/// V' = u(u-1)(u-2)(u^2 - s u + p), chosen so that V(1) = -h1, V(2) = -h1 - h2.
pub fn triple_well_roots(h1: f64, h2: f64) -> (f64, f64) {
    // V(2) = -8/15 + 4s/15, V(1) = 1/15 - 7s/60 + p/4
    let s = 2.0 - 15.0 * (h1 + h2) / 4.0;
    let p = 4.0 * (-h1 - 1.0 / 15.0 + 7.0 * s / 60.0);
    (s, p)
}

impl PotentialSpec {
    pub fn from_def(def: PotentialDef) -> Result<Self, PotentialError> {
        let poly = match &def {
            PotentialDef::Terms { n, terms } => {
                Polynomial::new(*n, terms.clone()).map_err(PotentialError::Invalid)?
            }
            PotentialDef::Builtin { builtin, params } => match builtin.as_str() {
                "allen_cahn" => Polynomial::new(1, vec![t1(0.25, 4), t1(-0.5, 2), t1(0.25, 0)])
                    .map_err(PotentialError::Invalid)?,
                "nagumo" => {
                    let a = param(params, "a")?;
                    if !(a > 0.0 && a < 1.0) {
                        return Err(PotentialError::Invalid(format!(
                            "nagumo needs 0 < a < 1, got {a}"
                        )));
                    }
                    Polynomial::new(
                        1,
                        vec![t1(0.25, 4), t1(-(1.0 + a) / 3.0, 3), t1(a / 2.0, 2)],
                    )
                    .map_err(PotentialError::Invalid)?
                }
                "triple_well" => {
                    let h1 = param(params, "h1")?;
                    let h2 = param(params, "h2")?;
                    if !(h1 > 0.0 && h2 > 0.0) {
                        return Err(PotentialError::Invalid(
                            "triple_well needs h1 > 0 and h2 > 0".into(),
                        ));
                    }
                    let (s, p) = triple_well_roots(h1, h2);
                    let disc = s * s - 4.0 * p;
                    if disc <= 0.0 {
                        return Err(PotentialError::Invalid(format!(
                            "triple_well(h1={h1}, h2={h2}) has no real barrier points"
                        )));
                    }
                    let a1 = (s - disc.sqrt()) / 2.0;
                    let a2 = (s + disc.sqrt()) / 2.0;
                    if !(a1 > 0.0 && a1 < 1.0 && a2 > 1.0 && a2 < 2.0) {
                        return Err(PotentialError::Invalid(format!(
                            "triple_well(h1={h1}, h2={h2}) puts barriers at {a1:.4}, {a2:.4}"
                        )));
                    }
                    Polynomial::new(
                        1,
                        vec![
                            t1(1.0 / 6.0, 6),
                            t1((-s - 3.0) / 5.0, 5),
                            t1((p + 3.0 * s + 2.0) / 4.0, 4),
                            t1((-3.0 * p - 2.0 * s) / 3.0, 3),
                            t1(p, 2),
                        ],
                    )
                    .map_err(PotentialError::Invalid)?
                }
                other => {
                    return Err(PotentialError::Invalid(format!("unknown builtin '{other}'")))
                }
            },
        };
        if !poly.looks_coercive() {
            return Err(PotentialError::Invalid(
                "leading part must have even degree and be positive".into(),
            ));
        }
        Ok(PotentialSpec { def, poly })
    }

    pub fn builtin(name: &str, params: &[(&str, f64)]) -> Result<Self, PotentialError> {
        Self::from_def(PotentialDef::Builtin {
            builtin: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        })
    }

    pub fn allen_cahn() -> Self {
        Self::builtin("allen_cahn", &[]).expect("allen_cahn is valid")
    }

    pub fn nagumo(a: f64) -> Result<Self, PotentialError> {
        Self::builtin("nagumo", &[("a", a)])
    }

    pub fn triple_well(h1: f64, h2: f64) -> Result<Self, PotentialError> {
        Self::builtin("triple_well", &[("h1", h1), ("h2", h2)])
    }

    pub fn from_json(text: &str) -> Result<Self, PotentialError> {
        let def: PotentialDef =
            serde_json::from_str(text).map_err(|e| PotentialError::Invalid(e.to_string()))?;
        Self::from_def(def)
    }

    pub fn def(&self) -> &PotentialDef {
        &self.def
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    #[inline]
    pub fn value(&self, u: &[f64]) -> f64 {
        self.poly.value(u)
    }

    #[inline]
    pub fn gradient_into(&self, u: &[f64], out: &mut [f64]) {
        self.poly.gradient_into(u, out)
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        self.poly.gradient(u)
    }

    pub fn hessian(&self, u: &[f64]) -> Vec<f64> {
        self.poly.hessian(u)
    }

    /// Ascending eigenvalues and matching unit eigenvectors (column j of the
    /// row-major n x n output) of the Hessian at u.
    pub fn hessian_eigen(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        sym_eigen(self.dim(), &self.hessian(u))
    }

    pub fn hessian_eigenvalues(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![self.poly.second_derivative_1d(u[0])];
        }
        self.hessian_eigen(u).0
    }
}

/// Ascending eigen-decomposition of a symmetric row-major matrix.
pub fn sym_eigen(n: usize, h: &[f64]) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![h[0]], vec![1.0]);
    }
    let m = DMatrix::from_row_slice(n, n, h);
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (j, &i) in idx.iter().enumerate() {
        for r in 0..n {
            vecs[r * n + j] = eig.eigenvectors[(r, i)];
        }
    }
    (vals, vecs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Minimum,
    Saddle,
    Maximum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Vec<f64>,
    pub value: f64,
    pub eigenvalues: Vec<f64>,
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub seeds_per_axis: usize,
}

impl SearchBox {
    pub fn cube(n: usize, half_width: f64, seeds_per_axis: usize) -> Self {
        SearchBox {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
            seeds_per_axis,
        }
    }

    /// Default box for a potential: [-3, 3]^n shifted to cover [0, 2] for the triple well.
    pub fn default_for(v: &PotentialSpec) -> Self {
        let n = v.dim();
        let seeds = match n {
            1 => 61,
            2 => 21,
            _ => 9,
        };
        let mut b = SearchBox::cube(n, 3.0, seeds);
        if let PotentialDef::Builtin { builtin, .. } = v.def() {
            if builtin == "triple_well" {
                b.lo = vec![-2.0];
                b.hi = vec![4.0];
            }
        }
        b
    }
}

fn solve_small(n: usize, h: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    if n == 1 {
        if h[0].abs() < 1e-300 {
            return None;
        }
        return Some(vec![rhs[0] / h[0]]);
    }
    let m = DMatrix::from_row_slice(n, n, h);
    let b = nalgebra::DVector::from_row_slice(rhs);
    m.lu().solve(&b).map(|x| x.iter().copied().collect())
}

fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn newton_critical(v: &PotentialSpec, seed: &[f64]) -> Option<Vec<f64>> {
    // No early exit on a gradient tolerance: iterating until the step stalls
    // drives degenerate roots (linear convergence) close enough to expose a
    // vanishing eigenvalue.
    let n = v.dim();
    let mut u = seed.to_vec();
    let mut g = v.gradient(&u);
    for _ in 0..NEWTON_MAX_ITER {
        let gn = norm_inf(&g);
        if gn == 0.0 {
            break;
        }
        let h = v.hessian(&u);
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let step = match solve_small(n, &h, &neg) {
            Some(s) => s,
            None => break,
        };
        if norm_inf(&step) <= 1e-15 * (1.0 + norm_inf(&u)) {
            break;
        }
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + lam * b).collect();
            let gt = v.gradient(&trial);
            if norm_inf(&gt) < gn {
                u = trial;
                g = gt;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
        if !u.iter().all(|x| x.is_finite()) || norm_inf(&u) > 1e6 {
            return None;
        }
    }
    if norm_inf(&g) <= NEWTON_TOL * (1.0 + norm_inf(&u)) {
        Some(u)
    } else {
        None
    }
}

fn classify(n: usize, eig: &[f64]) -> CriticalKind {
    let index = eig.iter().filter(|&&l| l < 0.0).count();
    if index == 0 {
        CriticalKind::Minimum
    } else if index == n && n >= 2 {
        CriticalKind::Maximum
    } else {
        CriticalKind::Saddle
    }
}

/// Newton from every node of the seed lattice, deduplicated and classified.
/// Sorted by increasing V, ties broken by location.
pub fn find_critical_points(
    v: &PotentialSpec,
    sbox: &SearchBox,
) -> Result<Vec<CriticalPoint>, PotentialError> {
    let n = v.dim();
    if sbox.lo.len() != n || sbox.hi.len() != n || sbox.seeds_per_axis < 2 {
        return Err(PotentialError::Invalid("search box does not match n".into()));
    }
    let k = sbox.seeds_per_axis;
    let total = k.pow(n as u32);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for idx in 0..total {
        let mut rem = idx;
        let seed: Vec<f64> = (0..n)
            .map(|i| {
                let j = rem % k;
                rem /= k;
                sbox.lo[i] + (sbox.hi[i] - sbox.lo[i]) * j as f64 / (k - 1) as f64
            })
            .collect();
        if let Some(u) = newton_critical(v, &seed) {
            let dup = found.iter().any(|f| {
                let d: Vec<f64> = f.iter().zip(&u).map(|(a, b)| a - b).collect();
                norm2(&d) < DEDUP_TOL
            });
            if !dup {
                found.push(u);
            }
        }
    }
    let mut out = Vec::with_capacity(found.len());
    for u in found {
        let eig = v.hessian_eigenvalues(&u);
        if let Some(l) = eig.iter().find(|l| l.abs() < DEGENERATE_TOL) {
            return Err(PotentialError::DegenerateCriticalPoint {
                point: u,
                eigenvalue: *l,
            });
        }
        let kind = classify(n, &eig);
        out.push(CriticalPoint {
            value: v.value(&u),
            location: u,
            eigenvalues: eig,
            kind,
        });
    }
    out.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| a.location.partial_cmp(&b.location).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(out)
}

/// Deterministic unit directions: +-1 for n = 1, evenly spaced angles for n = 2,
/// a Fibonacci sphere in the first three coordinates otherwise.
pub fn unit_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
            let mut dirs = Vec::with_capacity(count + 2 * n);
            for k in 0..count {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * k as f64;
                let mut d = vec![0.0; n];
                d[0] = r * th.cos();
                d[1] = r * th.sin();
                d[2] = z;
                dirs.push(d);
            }
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                dirs.push(e.clone());
                e[i] = -1.0;
                dirs.push(e);
            }
            dirs
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeOptions {
    pub safety: f64,
    pub d_max: f64,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        EscapeOptions {
            safety: 0.5,
            d_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeDistance {
    pub d_esc: f64,
    pub d_raw: f64,
    pub safety: f64,
    pub hit_cap: bool,
}

fn ball_condition(
    v: &PotentialSpec,
    minima: &[CriticalPoint],
    d: f64,
    lo: f64,
    hi: f64,
    shells: usize,
    dirs: &[Vec<f64>],
) -> bool {
    let n = v.dim();
    let mut u = vec![0.0; n];
    for m in minima {
        for k in 1..=shells {
            let r = d * k as f64 / shells as f64;
            for dir in dirs {
                for i in 0..n {
                    u[i] = m.location[i] + r * dir[i];
                }
                let eig = v.hessian_eigenvalues(&u);
                if eig[0] < lo || eig[eig.len() - 1] > hi {
                    return false;
                }
            }
        }
    }
    true
}

fn bisect_escape(
    v: &PotentialSpec,
    minima: &[CriticalPoint],
    lmin: f64,
    lmax: f64,
    d_max: f64,
    shells: usize,
    dirs: &[Vec<f64>],
) -> (f64, bool) {
    let (lo_b, hi_b) = (lmin / 2.0, 2.0 * lmax);
    if ball_condition(v, minima, d_max, lo_b, hi_b, shells, dirs) {
        return (d_max, true);
    }
    let (mut lo, mut hi) = (0.0, d_max);
    for _ in 0..ESCAPE_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if ball_condition(v, minima, mid, lo_b, hi_b, shells, dirs) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, false)
}

/// Largest radius around every minimum on which the Hessian spectrum stays in
/// [lambda_min/2, 2 lambda_max], times the safety factor.
pub fn compute_escape_distance(
    v: &PotentialSpec,
    minima: &[CriticalPoint],
    lambda_min: f64,
    lambda_max: f64,
    opts: EscapeOptions,
) -> Result<EscapeDistance, PotentialError> {
    if minima.is_empty() {
        return Err(PotentialError::NoMinima);
    }
    if !(opts.safety > 0.0 && opts.safety <= 1.0) || !(opts.d_max > 0.0) {
        return Err(PotentialError::Invalid("escape options out of range".into()));
    }
    let n = v.dim();
    let mut shells = 64;
    let mut ndir = 64;
    let (mut d, mut cap) = bisect_escape(
        v,
        minima,
        lambda_min,
        lambda_max,
        opts.d_max,
        shells,
        &unit_directions(n, ndir),
    );
    for _ in 0..4 {
        shells *= 2;
        if n > 1 {
            ndir *= 2;
        }
        let (d2, cap2) = bisect_escape(
            v,
            minima,
            lambda_min,
            lambda_max,
            opts.d_max,
            shells,
            &unit_directions(n, ndir),
        );
        let change = (d2 - d).abs();
        d = d2;
        cap = cap2;
        if change < ESCAPE_REFINE_TOL {
            break;
        }
    }
    Ok(EscapeDistance {
        d_esc: opts.safety * d,
        d_raw: d,
        safety: opts.safety,
        hit_cap: cap,
    })
}

/// Sample points of the closed ball |u| <= r, including the boundary sphere.
pub fn ball_samples(n: usize, r: f64) -> Vec<Vec<f64>> {
    let k: usize = match n {
        1 => 20001,
        2 => 301,
        _ => 41,
    };
    let mut pts = Vec::new();
    let total = k.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let p: Vec<f64> = (0..n)
            .map(|_| {
                let j = rem % k;
                rem /= k;
                -r + 2.0 * r * j as f64 / (k - 1) as f64
            })
            .collect();
        if norm2(&p) <= r * (1.0 + 1e-12) {
            pts.push(p);
        }
    }
    if n > 1 {
        for d in unit_directions(n, 512) {
            pts.push(d.iter().map(|x| x * r).collect());
        }
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialAnalysis {
    pub potential: PotentialDef,
    pub n: usize,
    pub critical_points: Vec<CriticalPoint>,
    pub minima: Vec<Vec<f64>>,
    pub minima_values: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub d_esc: f64,
    pub d_esc_raw: f64,
    pub d_esc_safety: f64,
    pub d_esc_hit_cap: bool,
    pub delta_v: f64,
    pub eps_coerc: f64,
    pub r_coerc: f64,
    pub r_att: f64,
    pub q_hull: f64,
    pub grad_sup: f64,
}

impl PotentialAnalysis {
    /// Index of the minimum closest to u.
    pub fn nearest_minimum(&self, u: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, m) in self.minima.iter().enumerate() {
            let d = norm2(&m.iter().zip(u).map(|(a, b)| a - b).collect::<Vec<_>>());
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub escape: EscapeOptions,
    /// Outer radius of the coercivity scan; defaults to 4 max|crit| + 4.
    pub r_probe: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            escape: EscapeOptions::default(),
            r_probe: None,
        }
    }
}

fn radial_margin(v: &PotentialSpec, r: f64, dirs: &[Vec<f64>]) -> f64 {
    let mut worst = f64::INFINITY;
    for d in dirs {
        let u: Vec<f64> = d.iter().map(|x| x * r).collect();
        let g = v.gradient(&u);
        let dot: f64 = u.iter().zip(&g).map(|(a, b)| a * b).sum();
        worst = worst.min(dot / (r * r));
    }
    worst
}

/// Full scalar analysis: critical points, spectrum bounds, escape distance,
/// depth spread, coercivity data and q_hull.
pub fn compute_scalars(
    v: &PotentialSpec,
    sbox: &SearchBox,
    opts: AnalysisOptions,
) -> Result<PotentialAnalysis, PotentialError> {
    let n = v.dim();
    let crit = find_critical_points(v, sbox)?;
    let minima: Vec<CriticalPoint> = crit
        .iter()
        .filter(|c| c.kind == CriticalKind::Minimum)
        .cloned()
        .collect();
    if minima.is_empty() {
        return Err(PotentialError::NoMinima);
    }
    let lambda_min = minima
        .iter()
        .map(|m| m.eigenvalues[0])
        .fold(f64::INFINITY, f64::min);
    let lambda_max = minima
        .iter()
        .map(|m| m.eigenvalues[n - 1])
        .fold(f64::NEG_INFINITY, f64::max);
    let esc = compute_escape_distance(v, &minima, lambda_min, lambda_max, opts.escape)?;
    let vmax = minima.iter().map(|m| m.value).fold(f64::NEG_INFINITY, f64::max);
    let vmin = minima.iter().map(|m| m.value).fold(f64::INFINITY, f64::min);
    let delta_v = vmax - vmin;

    let crit_norm = crit
        .iter()
        .map(|c| norm2(&c.location))
        .fold(0.0, f64::max);
    let r_probe = opts.r_probe.unwrap_or(4.0 * crit_norm + 4.0);
    let dirs = unit_directions(n, 128);
    let shells = 400;
    let mut r0 = None;
    for k in (1..=shells).rev() {
        let r = r_probe * k as f64 / shells as f64;
        if radial_margin(v, r, &dirs) > 0.0 {
            r0 = Some(r);
        } else {
            break;
        }
    }
    let r0 = r0.ok_or(PotentialError::NotCoercive(r_probe))?;
    let r_coerc = 1.25 * r0.max(crit_norm).max(0.8);
    let eps_coerc = (0..=64)
        .map(|k| radial_margin(v, r_coerc * (1.0 + 3.0 * k as f64 / 64.0), &dirs))
        .fold(f64::INFINITY, f64::min);
    if eps_coerc <= 0.0 {
        return Err(PotentialError::NotCoercive(r_coerc));
    }
    let r_att = 2.0 * r_coerc;

    let ball = ball_samples(n, r_att);
    let mut q_hull = f64::NEG_INFINITY;
    let mut grad_sup: f64 = 0.0;
    for u in &ball {
        let vu = v.value(u);
        grad_sup = grad_sup.max(norm2(&v.gradient(u)));
        for m in &minima {
            let d2: f64 = u
                .iter()
                .zip(&m.location)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 > 1e-12 {
                q_hull = q_hull.max((vu - m.value) / d2);
            }
        }
    }

    Ok(PotentialAnalysis {
        potential: v.def().clone(),
        n,
        minima: minima.iter().map(|m| m.location.clone()).collect(),
        minima_values: minima.iter().map(|m| m.value).collect(),
        critical_points: crit,
        lambda_min,
        lambda_max,
        d_esc: esc.d_esc,
        d_esc_raw: esc.d_raw,
        d_esc_safety: esc.safety,
        d_esc_hit_cap: esc.hit_cap,
        delta_v,
        eps_coerc,
        r_coerc,
        r_att,
        q_hull,
        grad_sup,
    })
}

/// Convenience wrapper with the default box and options.
pub fn analyze(v: &PotentialSpec) -> Result<PotentialAnalysis, PotentialError> {
    compute_scalars(v, &SearchBox::default_for(v), AnalysisOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allen_cahn_critical_points() {
        let v = PotentialSpec::allen_cahn();
        let cps = find_critical_points(&v, &SearchBox::default_for(&v)).unwrap();
        assert_eq!(cps.len(), 3);
        let mins: Vec<f64> = cps
            .iter()
            .filter(|c| c.kind == CriticalKind::Minimum)
            .map(|c| c.location[0])
            .collect();
        assert_eq!(mins.len(), 2);
        assert!(mins.iter().any(|&x| (x + 1.0).abs() < 1e-12));
        assert!(mins.iter().any(|&x| (x - 1.0).abs() < 1e-12));
        let s: Vec<&CriticalPoint> = cps.iter().filter(|c| c.kind == CriticalKind::Saddle).collect();
        assert_eq!(s.len(), 1);
        assert!(s[0].location[0].abs() < 1e-12);
        for m in cps.iter().filter(|c| c.kind == CriticalKind::Minimum) {
            assert!((m.eigenvalues[0] - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn allen_cahn_escape_distance_closed_form() {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        // V'' = 3u^2 - 1 >= 1 on [1 - d, 1 + d] first fails at u = sqrt(2/3)
        let expected = 0.5 * (1.0 - (2.0f64 / 3.0).sqrt());
        assert!((a.d_esc - expected).abs() < 1e-8, "{} vs {}", a.d_esc, expected);
        assert!((a.lambda_min - 2.0).abs() < 1e-10);
        assert!((a.lambda_max - 2.0).abs() < 1e-10);
        assert!(a.delta_v.abs() < 1e-14);
    }

    #[test]
    fn quadratic_well_escape_hits_cap() {
        let v = PotentialSpec::from_json(
            r#"{"n": 1, "terms": [{"coeff": 0.5, "powers": [2]}]}"#,
        )
        .unwrap();
        let a = analyze(&v).unwrap();
        assert!(a.d_esc_hit_cap);
        assert!((a.d_esc_raw - 10.0).abs() < 1e-12);
        assert!(a.eps_coerc >= 1.0 - 1e-12);
    }

    #[test]
    fn nagumo_depth_and_spectrum() {
        let v = PotentialSpec::nagumo(0.25).unwrap();
        let a = analyze(&v).unwrap();
        assert_eq!(a.minima.len(), 2);
        assert!((a.delta_v - 1.0 / 24.0).abs() < 1e-12);
        assert!((a.lambda_min - 0.25).abs() < 1e-10);
        assert!((a.lambda_max - 0.75).abs() < 1e-10);
        // V''(u) = 3u^2 - 2.5u + 0.25 reaches lambda_min/2 at the smaller root
        let root = (2.5 - (6.25f64 - 1.5).sqrt()) / 6.0;
        assert!((a.d_esc_raw - root).abs() < 1e-8);
    }

    #[test]
    fn degenerate_quartic_is_rejected() {
        let v = PotentialSpec::from_json(r#"{"n": 1, "terms": [{"coeff": 1.0, "powers": [4]}]}"#)
            .unwrap();
        let err = find_critical_points(&v, &SearchBox::default_for(&v)).unwrap_err();
        assert!(matches!(err, PotentialError::DegenerateCriticalPoint { .. }));
    }

    #[test]
    fn triple_well_depths_match_parameters() {
        let (h1, h2) = (0.05, 0.01);
        let v = PotentialSpec::triple_well(h1, h2).unwrap();
        assert!(v.value(&[0.0]).abs() < 1e-15);
        assert!((v.value(&[1.0]) + h1).abs() < 1e-12);
        assert!((v.value(&[2.0]) + h1 + h2).abs() < 1e-12);
        for x in [0.0, 1.0, 2.0] {
            assert!(v.gradient(&[x])[0].abs() < 1e-12);
        }
        let a = analyze(&v).unwrap();
        assert_eq!(a.minima.len(), 3);
    }

    #[test]
    fn json_round_trip() {
        let v = PotentialSpec::nagumo(0.3).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        let w: PotentialSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(v.value(&[0.7]), w.value(&[0.7]));
    }

    #[test]
    fn rejects_non_coercive() {
        assert!(PotentialSpec::from_json(r#"{"n": 1, "terms": [{"coeff": -1.0, "powers": [4]}]}"#)
            .is_err());
        assert!(PotentialSpec::builtin("nope", &[]).is_err());
    }
}
