//! Three-interval weighted energy and the two firewalls in a standing (or
//! slowly moving) frame, for solutions that do not invade either end state.

use serde::{Deserialize, Serialize};

use super::constants::Constants;
use super::firewall::dist2;
use crate::error::DiagError;
use crate::pdesim::{escape_from_left, escape_from_right, trapezoid_weight, Snapshot};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandingFrame {
    pub alpha: f64,
    pub c: f64,
    pub kappa: f64,
    pub c_cut0: f64,
}

impl StandingFrame {
    pub fn new(consts: &Constants, c: f64, c_cut0: f64) -> Result<Self, DiagError> {
        let k = consts.kappa;
        let ok = c.abs() <= k / 6.0
            && c.abs() <= consts.c_max
            && c * c * consts.alpha <= 1.0
            && c.abs() <= c_cut0 / 6.0
            && c_cut0 > 0.0
            && c_cut0 <= consts.c_cut;
        if !ok {
            return Err(DiagError::FrameOutOfRange(format!(
                "standing frame needs |c| <= min(kappa, c_cut0)/6 and 0 < c_cut0 <= c_cut; got c = {c}, c_cut0 = {c_cut0}"
            )));
        }
        Ok(StandingFrame {
            alpha: consts.alpha,
            c,
            kappa: k,
            c_cut0,
        })
    }

    fn stretch(&self) -> f64 {
        (1.0 + self.alpha * self.c * self.c).sqrt()
    }

    /// `(chi, psi_+, d_y psi_+ / psi_+, psi_-, d_y psi_- / psi_-)`.
    pub fn weights(&self, y: f64, t: f64) -> (f64, f64, f64, f64, f64) {
        let (c, k, a) = (self.c, self.kappa, self.c_cut0 * t);
        let left = (-c * a + k * (y + a)).exp();
        let right = (c * a - k * (y - a)).exp();
        let chi = if y <= -a {
            left
        } else if y >= a {
            right
        } else {
            (c * y).exp()
        };
        let (pp, rp) = if y < a { ((c * a + k * (y - a)).exp(), k) } else { (right, -k) };
        let (pm, rm) = if y > -a { ((-c * a - k * (y + a)).exp(), -k) } else { (left, k) };
        (chi, pp, rp, pm, rm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandingSample {
    pub t: f64,
    pub e0: f64,
    pub d0: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub q_plus: f64,
    pub q_minus: f64,
    pub x_esc_plus: f64,
    pub x_esc_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandingReport {
    pub samples: Vec<StandingSample>,
    /// Mean of `E0` over the last fifth of the samples.
    pub asymptotic_energy: f64,
    pub envelope_rate: f64,
    pub envelope_offset: f64,
    pub envelope_violations: usize,
    pub worst_envelope_excess: f64,
    pub escape_speed_plus: f64,
    pub escape_speed_minus: f64,
}

fn slope(ts: &[f64], xs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let xm = xs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, x) in ts.iter().zip(xs) {
        num += (t - tm) * (x - xm);
        den += (t - tm) * (t - tm);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn standing_sample(
    snap: &Snapshot,
    v: &PotentialSpec,
    m_minus: &[f64],
    m_plus: &[f64],
    d_esc: f64,
    frame: &StandingFrame,
) -> StandingSample {
    let n = snap.n;
    let len = snap.len();
    let a = frame.alpha;
    let k_str = frame.stretch();
    let sigma = frame.c / k_str;
    let (vm, vp) = (v.value(m_minus), v.value(m_plus));
    let h = vm.max(vp);
    let ux = snap.ux();
    let dy = k_str * snap.dx;
    let mut out = StandingSample {
        t: snap.t,
        e0: 0.0,
        d0: 0.0,
        f_plus: 0.0,
        f_minus: 0.0,
        q_plus: 0.0,
        q_minus: 0.0,
        x_esc_plus: escape_from_right(snap, m_plus, d_esc),
        x_esc_minus: escape_from_left(snap, m_minus, d_esc),
    };
    for k in 0..len {
        let y = k_str * snap.x(k) - frame.c * snap.t;
        let (chi, pp, rp, pm, rm) = frame.weights(y, snap.t);
        let u = snap.u_at(k);
        let ut = snap.ut_at(k);
        let (mut vt2, mut vy2, mut wpt, mut wmt) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let uxi = ux[k * n + i];
            let vt = ut[i] + sigma * uxi;
            let vy = uxi / k_str;
            vt2 += vt * vt;
            vy2 += vy * vy;
            wpt += (u[i] - m_plus[i]) * vt;
            wmt += (u[i] - m_minus[i]) * vt;
        }
        let vu = v.value(u);
        let wp2 = dist2(u, m_plus);
        let wm2 = dist2(u, m_minus);
        let tw = trapezoid_weight(k, len) * dy;
        out.e0 += tw * chi * (0.5 * a * vt2 + 0.5 * vy2 + vu - h);
        out.d0 += tw * chi * vt2;
        let fp = a * a * vt2 + a * vy2 + 2.0 * a * (vu - vp) + a * wpt + (0.5 + a * frame.c * rp) * wp2;
        let fm = a * a * vt2 + a * vy2 + 2.0 * a * (vu - vm) + a * wmt + (0.5 + a * frame.c * rm) * wm2;
        out.f_plus += tw * pp * fp;
        out.f_minus += tw * pm * fm;
        out.q_plus += tw * pp * (vt2 + vy2 + wp2);
        out.q_minus += tw * pm * (vt2 + vy2 + wm2);
    }
    out
}

/// Series of standing-frame functionals with the dichotomy envelope check.
/// `slack` is added to the envelope bound.
#[allow(clippy::too_many_arguments)]
pub fn standing_relaxation_report(
    snaps: &[Snapshot],
    v: &PotentialSpec,
    m_minus: &[f64],
    m_plus: &[f64],
    consts: &Constants,
    frame: &StandingFrame,
    slack: f64,
) -> Result<StandingReport, DiagError> {
    if snaps.len() < 2 {
        return Err(DiagError::SeriesTooShort(format!("{} snapshots", snaps.len())));
    }
    let t0 = snaps[0].t;
    let samples: Vec<StandingSample> = snaps
        .iter()
        .map(|s| standing_sample(s, v, m_minus, m_plus, consts.d_esc, frame))
        .collect();

    let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let speed = |xs: Vec<f64>| -> f64 {
        let pairs: Vec<(f64, f64)> = ts.iter().copied().zip(xs).filter(|(_, x)| x.is_finite()).collect();
        if pairs.len() < 2 {
            return 0.0;
        }
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        slope(&a, &b)
    };
    let sp = speed(samples.iter().map(|s| s.x_esc_plus).collect());
    let sm = speed(samples.iter().map(|s| s.x_esc_minus).collect());
    let cap = frame.c_cut0 / 6.0;
    if sp > cap || sm < -cap {
        return Err(DiagError::HypothesisFailure(format!(
            "escape speeds ({sp:.3e}, {sm:.3e}) exceed c_cut0/6 = {cap:.3e}"
        )));
    }

    let rate = consts.eps_f_decr.min(frame.kappa * frame.c_cut0 / 4.0);
    let offset = 4.0 * consts.k_f_decr / (frame.kappa * frame.kappa * frame.c_cut0);
    let (fp0, fm0) = (samples[0].f_plus, samples[0].f_minus);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for s in &samples {
        let decay = (-rate * (s.t - t0)).exp();
        for (f, f0) in [(s.f_plus, fp0), (s.f_minus, fm0)] {
            let ex = f - (f0 + offset) * decay;
            worst = worst.max(ex);
            if ex > slack {
                violations += 1;
            }
        }
    }
    let tail = (samples.len() / 5).max(1);
    let asym = samples[samples.len() - tail..].iter().map(|s| s.e0).sum::<f64>() / tail as f64;
    Ok(StandingReport {
        samples,
        asymptotic_energy: asym,
        envelope_rate: rate,
        envelope_offset: offset,
        envelope_violations: violations,
        worst_envelope_excess: worst,
        escape_speed_plus: sp,
        escape_speed_minus: sm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::constants::compute_constants;
    use crate::potential::analyze;

    #[test]
    fn equilibrium_has_zero_energy() {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let c = compute_constants(&v, &a, 1.0).unwrap();
        let f = StandingFrame::new(&c, 0.0, c.c_cut).unwrap();
        let snaps: Vec<Snapshot> = (0..5)
            .map(|i| Snapshot {
                t: i as f64,
                x0: -20.0,
                dx: 0.1,
                n: 1,
                u: vec![-1.0; 401],
                ut: vec![0.0; 401],
            })
            .collect();
        let r = standing_relaxation_report(&snaps, &v, &[-1.0], &[-1.0], &c, &f, 0.0).unwrap();
        for s in &r.samples {
            assert!(s.e0.abs() < 1e-14 && s.f_plus.abs() < 1e-14 && s.f_minus.abs() < 1e-14);
        }
        assert_eq!(r.envelope_violations, 0);
    }

    #[test]
    fn weights_are_continuous() {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let c = compute_constants(&v, &a, 1.0).unwrap();
        let f = StandingFrame::new(&c, c.kappa / 10.0 * (c.c_cut / c.kappa).min(1.0) / 2.0, c.c_cut).unwrap();
        let t = 30.0;
        let a0 = f.c_cut0 * t;
        for y in [-a0, a0] {
            let p = f.weights(y - 1e-11, t);
            let q = f.weights(y + 1e-11, t);
            for (x, z) in [(p.0, q.0), (p.1, q.1), (p.3, q.3)] {
                assert!((x - z).abs() < 1e-9 * x.max(z), "{x} vs {z} at {y}");
            }
        }
    }
}
