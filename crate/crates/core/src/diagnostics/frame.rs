//! Weighted energy and firewall functionals in a frame travelling at
//! physical speed `sigma = c / sqrt(1 + alpha c^2)`.

use serde::{Deserialize, Serialize};

use super::constants::Constants;
use super::firewall::dist2;
use crate::error::DiagError;
use crate::pdesim::{trapezoid_weight, Snapshot};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub alpha: f64,
    /// Parabolic speed.
    pub c: f64,
    /// Physical speed.
    pub sigma: f64,
    pub t_init: f64,
    pub x_init: f64,
    /// Cutoff position at `s = 0`.
    pub z_init: f64,
    pub c_cut: f64,
    pub kappa: f64,
}

impl FrameSpec {
    pub fn new(
        consts: &Constants,
        c: f64,
        t_init: f64,
        x_init: f64,
        z_init: f64,
    ) -> Result<Self, DiagError> {
        let f = FrameSpec {
            alpha: consts.alpha,
            c,
            sigma: c / (1.0 + consts.alpha * c * c).sqrt(),
            t_init,
            x_init,
            z_init,
            c_cut: consts.c_cut,
            kappa: consts.kappa,
        };
        if !(t_init >= 0.0 && c > 0.0 && c <= consts.c_max && z_init >= 0.0) {
            return Err(DiagError::FrameOutOfRange(format!(
                "need t_init >= 0, 0 < c <= c_max = {}, z_init >= 0; got t_init = {t_init}, c = {c}, z_init = {z_init}",
                consts.c_max
            )));
        }
        Ok(f)
    }

    /// `sqrt(1 + alpha c^2)`.
    pub fn stretch(&self) -> f64 {
        (1.0 + self.alpha * self.c * self.c).sqrt()
    }

    pub fn y_of(&self, x: f64, t: f64) -> f64 {
        self.stretch() * (x - self.x_init - self.sigma * (t - self.t_init))
    }

    pub fn cutoff(&self, s: f64) -> f64 {
        self.z_init + self.c_cut * s
    }

    /// `chi / e^{c z_init}` and `psi / e^{c z_init}` with `psi_y / psi`.
    pub fn weights(&self, y: f64, s: f64) -> (f64, f64, f64) {
        let (c, k) = (self.c, self.kappa);
        let z = self.cutoff(s);
        let r = self.z_init;
        if y <= z {
            let chi = (c * (y - r)).exp();
            let psi = ((c + k) * y - k * z - c * r).exp();
            (chi, psi, c + k)
        } else {
            let chi = ((c + k) * z - k * y - c * r).exp();
            (chi, chi, -k)
        }
    }
}

/// Positions in the laboratory frame mapped to frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Markers {
    pub x_hom: f64,
    pub x_esc: f64,
    pub x_big: f64,
}

/// Weighted integrals in the travelling frame. All weighted quantities are
/// divided by `exp(log_scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub s: f64,
    pub log_scale: f64,
    pub e: f64,
    pub d: f64,
    pub f: f64,
    pub q: f64,
    pub g: f64,
    pub g_back: f64,
    pub g_front: f64,
    pub y_hom: f64,
    pub y_esc: f64,
    pub y_big: f64,
}

/// Report for one snapshot. `m` is the invaded minimum.
pub fn traveling_frame_report(
    snap: &Snapshot,
    v: &PotentialSpec,
    m: &[f64],
    d_esc: f64,
    frame: &FrameSpec,
    markers: Option<Markers>,
) -> Result<EnergyReport, DiagError> {
    let n = snap.n;
    let len = snap.len();
    let s = snap.t - frame.t_init;
    let k_str = frame.stretch();
    let y_lo = frame.y_of(snap.x(0), snap.t);
    let y_hi = frame.y_of(snap.x(len - 1), snap.t);
    let z = frame.cutoff(s);
    if s < 0.0 || z < y_lo || z > y_hi {
        return Err(DiagError::FrameOutOfRange(format!(
            "cutoff {z} outside the grid image [{y_lo}, {y_hi}] at s = {s}"
        )));
    }
    let (a, c) = (frame.alpha, frame.c);
    let vm = v.value(m);
    let ux = snap.ux();
    let dy = k_str * snap.dx;
    let mut rep = EnergyReport {
        t: snap.t,
        s,
        log_scale: c * frame.z_init,
        e: 0.0,
        d: 0.0,
        f: 0.0,
        q: 0.0,
        g: 0.0,
        g_back: 0.0,
        g_front: 0.0,
        y_hom: f64::NAN,
        y_esc: f64::NAN,
        y_big: f64::NAN,
    };
    if let Some(mk) = markers {
        rep.y_hom = frame.y_of(mk.x_hom, snap.t);
        rep.y_esc = frame.y_of(mk.x_esc, snap.t);
        rep.y_big = frame.y_of(mk.x_big, snap.t);
    }
    for k in 0..len {
        let y = frame.y_of(snap.x(k), snap.t);
        let (chi, psi, ratio) = frame.weights(y, s);
        let u = snap.u_at(k);
        let ut = snap.ut_at(k);
        let (mut vs2, mut vy2, mut w2, mut wvs) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let uxi = ux[k * n + i];
            let vs = ut[i] + frame.sigma * uxi;
            let vy = uxi / k_str;
            let w = u[i] - m[i];
            vs2 += vs * vs;
            vy2 += vy * vy;
            w2 += w * w;
            wvs += w * vs;
        }
        let dv = v.value(u) - vm;
        let tw = trapezoid_weight(k, len) * dy;
        rep.e += tw * chi * (0.5 * a * vs2 + 0.5 * vy2 + dv);
        rep.d += tw * chi * vs2;
        rep.f += tw
            * psi
            * (a * a * vs2 + a * vy2 + 2.0 * a * dv + a * wvs + (0.5 + a * c * ratio) * w2);
        rep.q += tw * psi * (vs2 + vy2 + w2);
        if dist2(u, m) > d_esc * d_esc {
            rep.g += tw * psi;
        }
        if markers.is_some() {
            if y <= rep.y_esc {
                rep.g_back += tw * psi;
            }
            if y >= rep.y_hom {
                rep.g_front += tw * psi;
            }
        }
    }
    Ok(rep)
}

/// Lab-frame escape markers, one per snapshot, for reports over a run.
pub fn frame_series(
    snaps: &[Snapshot],
    v: &PotentialSpec,
    m: &[f64],
    d_esc: f64,
    frame: &FrameSpec,
    markers: Option<&[Markers]>,
) -> Result<Vec<EnergyReport>, DiagError> {
    snaps
        .iter()
        .enumerate()
        .map(|(i, s)| traveling_frame_report(s, v, m, d_esc, frame, markers.map(|mk| mk[i])))
        .collect()
}

/// Centred `dE/ds` at the interior reports.
pub fn energy_derivative(reports: &[EnergyReport]) -> Vec<(f64, f64)> {
    reports
        .windows(3)
        .map(|w| (w[1].s, (w[2].e - w[0].e) / (w[2].s - w[0].s)))
        .collect()
}

/// Both sides of `(1 + alpha c^2) int D <= E(0) - E(s_fin) + K_EF int F + K_EEsc int G`.
pub fn relaxation_inequality(
    reports: &[EnergyReport],
    frame: &FrameSpec,
    consts: &Constants,
) -> (f64, f64) {
    let trap = |f: &dyn Fn(&EnergyReport) -> f64| -> f64 {
        reports
            .windows(2)
            .map(|w| 0.5 * (w[1].s - w[0].s) * (f(&w[0]) + f(&w[1])))
            .sum()
    };
    let lhs = (1.0 + frame.alpha * frame.c * frame.c) * trap(&|r| r.d);
    let (first, last) = (&reports[0], &reports[reports.len() - 1]);
    let rhs = first.e - last.e + consts.k_ef * trap(&|r| r.f) + consts.k_eesc * trap(&|r| r.g);
    (lhs, rhs)
}

/// Analytic bound on `G_back`, divided by `exp(c z_init)` like the report.
pub fn g_back_bound(frame: &FrameSpec, y_esc: f64, s: f64) -> f64 {
    let (c, k) = (frame.c, frame.kappa);
    ((c + k) * y_esc - k * frame.z_init - k * frame.c_cut * s - c * frame.z_init).exp() / k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeEnergyCheck {
    /// `int_{-inf}^{y0+1} e^{c (y - y0)} (|w'|^2/2 + V(w) - V(m)) dy`.
    pub lhs: f64,
    /// `E_esc`.
    pub rhs: f64,
    pub holds: bool,
}

/// Weighted energy up to one unit past a point where the field leaves the
/// `d_Esc`-ball around `m`. `w` is sampled on `y_k = y0_grid + k dy`.
#[allow(clippy::too_many_arguments)]
pub fn positive_energy_at_escape_check(
    w: &[f64],
    n: usize,
    y_first: f64,
    dy: f64,
    y0: f64,
    c: f64,
    v: &PotentialSpec,
    m: &[f64],
    consts: &Constants,
) -> Result<EscapeEnergyCheck, DiagError> {
    if c < consts.c_max {
        return Err(DiagError::PreconditionUnmet(format!(
            "speed {c} below c_max = {}",
            consts.c_max
        )));
    }
    let len = w.len() / n;
    let d = consts.d_esc;
    let y_end = y0 + 1.0;
    let k0 = ((y0 - y_first) / dy).round();
    let k1 = ((y_end - y_first) / dy).round();
    if k0 < 0.0 || k1 as usize >= len {
        return Err(DiagError::PreconditionUnmet("window [y0, y0+1] not sampled".into()));
    }
    let (k0, k1) = (k0 as usize, k1 as usize);
    let at = |k: usize| &w[k * n..(k + 1) * n];
    let tol = 1e-6 * d;
    if (dist2(at(k0), m).sqrt() - d).abs() > tol.max(1e-3 * d) {
        return Err(DiagError::PreconditionUnmet(format!(
            "|w(y0) - m| = {} differs from d_Esc = {d}",
            dist2(at(k0), m).sqrt()
        )));
    }
    if (k0..=k1).any(|k| dist2(at(k), m).sqrt() > d + tol) {
        return Err(DiagError::PreconditionUnmet("|w - m| exceeds d_Esc on [y0, y0+1]".into()));
    }
    let vm = v.value(m);
    let mut lhs = 0.0;
    for k in 0..=k1 {
        let y = y_first + dy * k as f64;
        let mut g2 = 0.0;
        for i in 0..n {
            let g = if k == 0 {
                (w[n + i] - w[i]) / dy
            } else if k == len - 1 {
                (w[k * n + i] - w[(k - 1) * n + i]) / dy
            } else {
                (w[(k + 1) * n + i] - w[(k - 1) * n + i]) / (2.0 * dy)
            };
            g2 += g * g;
        }
        let tw = if k == 0 || k == k1 { 0.5 } else { 1.0 } * dy;
        lhs += tw * (c * (y - y0)).exp() * (0.5 * g2 + v.value(at(k)) - vm);
    }
    let rhs = consts.e_esc;
    Ok(EscapeEnergyCheck { lhs, rhs, holds: lhs >= rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::constants::compute_constants;
    use crate::potential::analyze;

    #[test]
    fn weights_are_continuous_at_cutoff() {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let consts = compute_constants(&v, &a, 1.0).unwrap();
        let f = FrameSpec::new(&consts, 0.5, 0.0, 0.0, 3.0).unwrap();
        let z = f.cutoff(2.0);
        let (c1, p1, _) = f.weights(z, 2.0);
        let (c2, p2, _) = f.weights(z + 1e-12, 2.0);
        assert!((c1 - c2).abs() < 1e-9 * c1);
        assert!((p1 - p2).abs() < 1e-9 * p1);
        assert!(p1 <= c1 * (1.0 + 1e-12));
        assert!((f.sigma - 0.5 / 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn frame_rejects_bad_parameters() {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let consts = compute_constants(&v, &a, 1.0).unwrap();
        assert!(FrameSpec::new(&consts, 2.0, 0.0, 0.0, 0.0).is_err());
        assert!(FrameSpec::new(&consts, 0.5, 0.0, 0.0, -1.0).is_err());
        assert!(FrameSpec::new(&consts, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn constant_escape_window_holds() {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let consts = compute_constants(&v, &a, 1.0).unwrap();
        let d = consts.d_esc;
        // w = m + d on [0, 2], w = m before
        let dy = 0.001;
        let w: Vec<f64> = (0..=4000)
            .map(|k| {
                let y = -2.0 + dy * k as f64;
                if y >= 0.0 { 1.0 - d } else { 1.0 }
            })
            .collect();
        let r = positive_energy_at_escape_check(&w, 1, -2.0, dy, 0.0, consts.c_max, &v, &[1.0], &consts)
            .unwrap();
        assert!(r.holds, "{r:?}");
        let low = positive_energy_at_escape_check(&w, 1, -2.0, dy, 0.0, 0.5, &v, &[1.0], &consts);
        assert!(matches!(low, Err(DiagError::PreconditionUnmet(_))));
    }
}
