//! Mean invasion speed of a tracked point and the dissipation measure around it.

use serde::{Deserialize, Serialize};

use crate::error::DiagError;
use crate::pdesim::{trapezoid_weight, Snapshot};

pub const MIN_SERIES: usize = 100;
pub const MIN_WINDOW_SNAPSHOTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvasionSpeed {
    pub s_inf: f64,
    pub s_sup: f64,
    pub s_fit: f64,
    pub gap: f64,
}

fn interp(ts: &[f64], xs: &[f64], t: f64) -> f64 {
    let i = ts.partition_point(|&s| s <= t);
    if i == 0 {
        return xs[0];
    }
    if i >= ts.len() {
        return xs[ts.len() - 1];
    }
    let f = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    xs[i - 1] + f * (xs[i] - xs[i - 1])
}

/// Least-squares slope.
pub fn ls_slope(ts: &[f64], xs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let xm = xs.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, x) in ts.iter().zip(xs) {
        num += (t - tm) * (x - xm);
        den += (t - tm) * (t - tm);
    }
    num / den
}

/// Speeds over the last half of a `(t, x)` series, with windowed mean slopes
/// over windows of a tenth of the total span.
pub fn estimate_invasion_speed(series: &[(f64, f64)]) -> Result<InvasionSpeed, DiagError> {
    let good: Vec<(f64, f64)> = series.iter().copied().filter(|(t, x)| t.is_finite() && x.is_finite()).collect();
    if good.len() < MIN_SERIES {
        return Err(DiagError::SeriesTooShort(format!(
            "{} finite samples, need {MIN_SERIES}",
            good.len()
        )));
    }
    let (ts, xs): (Vec<f64>, Vec<f64>) = good.into_iter().unzip();
    let (t0, t1) = (ts[0], ts[ts.len() - 1]);
    if !(t1 > t0) || ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DiagError::SeriesTooShort("times must increase".into()));
    }
    let w = (t1 - t0) / 10.0;
    let half = t0 + (t1 - t0) / 2.0;
    let start = ts.partition_point(|&t| t < half);
    let mut s_inf = f64::INFINITY;
    let mut s_sup = f64::NEG_INFINITY;
    for i in start..ts.len() {
        if ts[i] + w > t1 * (1.0 + 1e-12) + 1e-12 {
            break;
        }
        let s = (interp(&ts, &xs, ts[i] + w) - xs[i]) / w;
        s_inf = s_inf.min(s);
        s_sup = s_sup.max(s);
    }
    let s_fit = ls_slope(&ts[start..], &xs[start..]);
    Ok(InvasionSpeed {
        s_inf,
        s_sup,
        s_fit,
        gap: s_sup - s_inf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationDelta {
    pub t: f64,
    /// Smallest eps = 2^-k, k in -10..=20, passing the test; infinite if none.
    pub delta: f64,
    pub k: Option<i32>,
    pub snapshots: usize,
}

/// `int_{t-1}^{t+1} int_{|x| <= 1/eps} |u_t + s u_x|^2 (x_esc + x, t') dx dt'`.
pub fn windowed_dissipation(window: &[&Snapshot], x_esc: f64, s: f64, eps: f64) -> f64 {
    let r = 1.0 / eps;
    let vals: Vec<f64> = window
        .iter()
        .map(|snap| {
            let n = snap.n;
            let len = snap.len();
            let ux = snap.ux();
            let mut acc = 0.0;
            for k in 0..len {
                if (snap.x(k) - x_esc).abs() > r {
                    continue;
                }
                let mut g = 0.0;
                for i in 0..n {
                    let z = snap.ut[k * n + i] + s * ux[k * n + i];
                    g += z * z;
                }
                acc += trapezoid_weight(k, len) * g;
            }
            acc * snap.dx
        })
        .collect();
    window
        .windows(2)
        .zip(vals.windows(2))
        .map(|(w, v)| 0.5 * (w[1].t - w[0].t) * (v[0] + v[1]))
        .sum()
}

pub fn dissipation_delta(
    snaps: &[Snapshot],
    t: f64,
    x_esc: f64,
    s_esc: f64,
) -> Result<DissipationDelta, DiagError> {
    let tol = 1e-9;
    let window: Vec<&Snapshot> = snaps
        .iter()
        .filter(|s| s.t >= t - 1.0 - tol && s.t <= t + 1.0 + tol)
        .collect();
    let covered = window.first().is_some_and(|s| s.t <= t - 1.0 + tol)
        && window.last().is_some_and(|s| s.t >= t + 1.0 - tol);
    if !covered || window.len() < MIN_WINDOW_SNAPSHOTS {
        return Err(DiagError::WindowIncomplete(format!(
            "{} snapshots in [{}, {}]",
            window.len(),
            t - 1.0,
            t + 1.0
        )));
    }
    // the integral shrinks as eps grows, so the passing set is an upper range
    for k in (-10..=20).rev() {
        let eps = 2f64.powi(-k);
        if windowed_dissipation(&window, x_esc, s_esc, eps) <= eps {
            return Ok(DissipationDelta {
                t,
                delta: eps,
                k: Some(k),
                snapshots: window.len(),
            });
        }
    }
    Ok(DissipationDelta {
        t,
        delta: f64::INFINITY,
        k: None,
        snapshots: window.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_track() {
        let s: Vec<(f64, f64)> = (0..400).map(|i| (i as f64 * 0.5, 0.3 * i as f64 * 0.5)).collect();
        let r = estimate_invasion_speed(&s).unwrap();
        for x in [r.s_inf, r.s_sup, r.s_fit] {
            assert!((x - 0.3).abs() < 1e-12);
        }
        assert!(r.gap.abs() < 1e-12);
    }

    #[test]
    fn short_series_rejected() {
        let s: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, 0.0)).collect();
        assert!(matches!(estimate_invasion_speed(&s), Err(DiagError::SeriesTooShort(_))));
    }

    fn frozen(t: f64) -> Snapshot {
        let len = 801;
        let dx = 0.05;
        let x0 = -20.0;
        let u: Vec<f64> = (0..len).map(|k| (x0 + dx * k as f64).tanh()).collect();
        Snapshot { t, x0, dx, n: 1, u, ut: vec![0.0; len] }
    }

    #[test]
    fn frozen_field_against_direct_quadrature() {
        let snaps: Vec<Snapshot> = (0..=40).map(|i| frozen(9.0 + 0.05 * i as f64)).collect();
        let s = 0.2;
        let d = dissipation_delta(&snaps, 10.0, 0.0, s).unwrap();
        let k = d.k.unwrap();
        // direct: 2 s^2 int_{-r}^{r} sech^4 = 2 s^2 (2 tanh r - 2 tanh^3 r / 3)
        let direct = |eps: f64| {
            let r: f64 = (1.0 / eps).min(20.0);
            let th = r.tanh();
            2.0 * s * s * (2.0 * th - 2.0 * th.powi(3) / 3.0)
        };
        let eps = 2f64.powi(-k);
        assert!(direct(eps) <= eps * (1.0 + 1e-3));
        assert!(direct(eps / 2.0) > eps / 2.0 * (1.0 - 1e-3));
    }

    #[test]
    fn co_moving_window_hits_floor() {
        let snaps: Vec<Snapshot> = (0..=40).map(|i| frozen(9.0 + 0.05 * i as f64)).collect();
        let d = dissipation_delta(&snaps, 10.0, 0.0, 0.0).unwrap();
        assert!(d.delta <= 2f64.powi(-20));
    }

    #[test]
    fn incomplete_window() {
        let snaps: Vec<Snapshot> = (0..=10).map(|i| frozen(9.0 + 0.05 * i as f64)).collect();
        assert!(matches!(
            dissipation_delta(&snaps, 10.0, 0.0, 0.1),
            Err(DiagError::WindowIncomplete(_))
        ));
    }
}
