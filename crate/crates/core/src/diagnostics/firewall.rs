//! Standing-frame firewall `F_0` and quadratic functional `Q_0`, evaluated for
//! every centre on the grid at once.

use serde::{Deserialize, Serialize};

use crate::pdesim::{trapezoid_weight, Snapshot};
use crate::potential::PotentialSpec;

/// `out_j = sum_k w_k g_k exp(-rate |x_k - x_j|)` with trapezoid weights,
/// by a forward and a backward first-order recursion.
pub fn exp_filter(g: &[f64], dx: f64, rate: f64) -> Vec<f64> {
    let len = g.len();
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    let q = (-rate * dx).exp();
    let wg: Vec<f64> = (0..len).map(|k| trapezoid_weight(k, len) * dx * g[k]).collect();
    let mut acc = 0.0;
    for k in 0..len {
        acc = acc * q + wg[k];
        out[k] = acc;
    }
    acc = 0.0;
    for k in (0..len).rev() {
        acc = acc * q + wg[k];
        out[k] += acc - wg[k];
    }
    out
}

/// Direct O(N^2) version of [`exp_filter`] at one centre.
pub fn exp_filter_direct(g: &[f64], dx: f64, rate: f64, j: usize) -> f64 {
    let len = g.len();
    (0..len)
        .map(|k| {
            let d = (k as f64 - j as f64).abs() * dx;
            trapezoid_weight(k, len) * dx * g[k] * (-rate * d).exp()
        })
        .sum()
}

pub(crate) fn dist2(a: &[f64], m: &[f64]) -> f64 {
    a.iter().zip(m).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Firewall {
    pub t: f64,
    pub x0: f64,
    pub dx: f64,
    pub q0: Vec<f64>,
    pub f0: Vec<f64>,
    /// Filtered indicator of `|u - m| > d_Esc`.
    pub pollution: Vec<f64>,
}

impl Firewall {
    pub fn x(&self, k: usize) -> f64 {
        self.x0 + self.dx * k as f64
    }
}

/// `F_0(xi)` and `Q_0(xi)` relative to the minimum `m` for every grid centre xi.
pub fn firewall_q0_f0(
    snap: &Snapshot,
    v: &PotentialSpec,
    m: &[f64],
    alpha: f64,
    kappa0: f64,
    d_esc: f64,
) -> Firewall {
    let n = snap.n;
    let len = snap.len();
    let ux = snap.ux();
    let vm = v.value(m);
    let mut fq = vec![0.0; len];
    let mut ff = vec![0.0; len];
    let mut fp = vec![0.0; len];
    for k in 0..len {
        let u = snap.u_at(k);
        let ut = snap.ut_at(k);
        let (mut ut2, mut ux2, mut w2, mut wut) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let w = u[i] - m[i];
            let x = ux[k * n + i];
            ut2 += ut[i] * ut[i];
            ux2 += x * x;
            w2 += w * w;
            wut += w * ut[i];
        }
        let dv = v.value(u) - vm;
        ff[k] = alpha * alpha * ut2 + alpha * ux2 + 2.0 * alpha * dv + alpha * wut + 0.5 * w2;
        fq[k] = alpha * ut2 + ux2 + w2;
        fp[k] = if w2 > d_esc * d_esc { 1.0 } else { 0.0 };
    }
    Firewall {
        t: snap.t,
        x0: snap.x0,
        dx: snap.dx,
        q0: exp_filter(&fq, snap.dx, kappa0),
        f0: exp_filter(&ff, snap.dx, kappa0),
        pollution: exp_filter(&fp, snap.dx, kappa0),
    }
}

/// Tally of a pointwise inequality over (xi, t) samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaTally {
    pub samples: usize,
    pub violations: usize,
    /// Largest excess of the left side over the right side (negative when all hold).
    pub worst_excess: f64,
}

impl LemmaTally {
    pub fn new() -> Self {
        LemmaTally {
            samples: 0,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
        }
    }

    /// Records `lhs <= rhs + slack`.
    pub fn record(&mut self, lhs: f64, rhs: f64, slack: f64) {
        self.samples += 1;
        let ex = lhs - rhs;
        self.worst_excess = self.worst_excess.max(ex);
        if !(ex <= slack) {
            self.violations += 1;
        }
    }

    pub fn merge(&mut self, o: &LemmaTally) {
        self.samples += o.samples;
        self.violations += o.violations;
        self.worst_excess = self.worst_excess.max(o.worst_excess);
    }

    pub fn pass_fraction(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            1.0 - self.violations as f64 / self.samples as f64
        }
    }
}

/// Wherever `Q_0(xi) <= d^2`, `|u(xi) - m| <= d` must hold. Returns the tally
/// with `lhs = |u - m|`, `rhs = d`, restricted to those centres.
pub fn q0_controls_u(snap: &Snapshot, fw: &Firewall, m: &[f64], d_esc: f64) -> LemmaTally {
    let mut t = LemmaTally::new();
    for k in 0..snap.len() {
        if fw.q0[k] <= d_esc * d_esc {
            t.record(dist2(snap.u_at(k), m).sqrt(), d_esc, 0.0);
        }
    }
    t
}

/// `F_0 >= eps Q_0 - K P` at every centre, recorded as `eps Q_0 - K P <= F_0`.
pub fn coercivity_tally(fw: &Firewall, eps: f64, k: f64, slack: f64) -> LemmaTally {
    let mut t = LemmaTally::new();
    for j in 0..fw.q0.len() {
        t.record(eps * fw.q0[j] - k * fw.pollution[j], fw.f0[j], slack);
    }
    t
}

/// Centred difference `(F_0(t+) - F_0(t-)) / (t+ - t-) <= -eps F_0(t) + K P(t)`.
pub fn decrease_tally(
    before: &Firewall,
    mid: &Firewall,
    after: &Firewall,
    eps: f64,
    k: f64,
    slack: f64,
) -> LemmaTally {
    let dt = after.t - before.t;
    let mut t = LemmaTally::new();
    for j in 0..mid.f0.len() {
        let d = (after.f0[j] - before.f0[j]) / dt;
        t.record(d, -eps * mid.f0[j] + k * mid.pollution[j], slack);
    }
    t
}

/// `(Q_0(t+) - Q_0(t-)) / (t+ - t-) <= K_Q0growth`.
pub fn growth_tally(before: &Firewall, after: &Firewall, k: f64, slack: f64) -> LemmaTally {
    let dt = after.t - before.t;
    let mut t = LemmaTally::new();
    for j in 0..before.q0.len() {
        t.record((after.q0[j] - before.q0[j]) / dt, k, slack);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recursive_filter_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g: Vec<f64> = (0..2000).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let out = exp_filter(&g, 0.05, 0.37);
        for _ in 0..10 {
            let j = rng.gen_range(0..g.len());
            let d = exp_filter_direct(&g, 0.05, 0.37, j);
            assert!((out[j] - d).abs() <= 1e-10 * d.abs().max(1e-300), "{} vs {d}", out[j]);
        }
    }

    #[test]
    fn constant_equilibrium_gives_zero() {
        let v = PotentialSpec::allen_cahn();
        let snap = Snapshot {
            t: 0.0,
            x0: -10.0,
            dx: 0.1,
            n: 1,
            u: vec![1.0; 201],
            ut: vec![0.0; 201],
        };
        let fw = firewall_q0_f0(&snap, &v, &[1.0], 1.0, 0.5, 0.1);
        assert!(fw.q0.iter().all(|&q| q == 0.0));
        assert!(fw.f0.iter().all(|&f| f == 0.0));
        assert!(fw.pollution.iter().all(|&p| p == 0.0));
    }
}
