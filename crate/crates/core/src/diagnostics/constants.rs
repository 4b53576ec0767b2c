//! Explicit constants of the relaxation and firewall arguments.

use serde::{Deserialize, Serialize};

use crate::error::DiagError;
use crate::potential::{ball_samples, PotentialAnalysis, PotentialSpec};

/// kappa_0 = min(sqrt(lambda_min / 2), 1/2, 1/(2 alpha)); the last term drops for alpha = 0.
pub fn kappa0(lambda_min: f64, alpha: f64) -> f64 {
    let k = (lambda_min / 2.0).sqrt().min(0.5);
    if alpha > 0.0 {
        k.min(1.0 / (2.0 * alpha))
    } else {
        k
    }
}

/// Speed cap `1 + 4 Delta_V / (min(1/2, lambda_min/4) d_Esc^2)`.
pub fn c_max(delta_v: f64, lambda_min: f64, d_esc: f64) -> f64 {
    1.0 + 4.0 * delta_v / (0.5f64.min(lambda_min / 4.0) * d_esc * d_esc)
}

/// Energy floor at the escape point, `min(1/2, lambda_min/4) d_Esc^2 / 4`.
pub fn e_esc(lambda_min: f64, d_esc: f64) -> f64 {
    0.5f64.min(lambda_min / 4.0) * d_esc * d_esc / 4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub alpha: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub d_esc: f64,
    pub delta_v: f64,
    pub q_hull: f64,
    pub r_att: f64,
    pub grad_sup: f64,

    pub kappa0: f64,
    pub c_max: f64,
    pub e_esc: f64,
    pub kappa: f64,
    pub c_cut: f64,
    pub c_cut0: f64,

    pub d_esc_q0: f64,
    pub d_esc_f0: f64,
    pub l_hull: f64,
    pub s_noesc: f64,
    pub eps_f0_coerc: f64,
    pub k_f0_coerc: f64,
    pub eps_f0: f64,
    pub k_f0_decr: f64,
    pub c_f0: f64,
    pub eps_f0_decr: f64,
    pub k_q0_growth: f64,

    pub eps_f_coerc: f64,
    pub k_f_coerc: f64,
    pub k_eq: f64,
    pub k_eesc1: f64,
    pub k_ef: f64,
    pub k_eesc: f64,
    pub eps_f: f64,
    pub k_f_decr: f64,
    pub c_f: f64,
    pub eps_f_decr: f64,
}

/// Maximum over the attracting ball and over all minima m of `f(u - m, V(u) - V(m), grad V(u))`.
fn ball_max<F>(v: &PotentialSpec, a: &PotentialAnalysis, f: F) -> f64
where
    F: Fn(&[f64], f64, &[f64]) -> f64,
{
    let pts = ball_samples(a.n, a.r_att);
    let mut best = f64::NEG_INFINITY;
    let mut w = vec![0.0; a.n];
    for u in &pts {
        let vu = v.value(u);
        let g = v.gradient(u);
        for (m, vm) in a.minima.iter().zip(&a.minima_values) {
            for i in 0..a.n {
                w[i] = u[i] - m[i];
            }
            best = best.max(f(&w, vu - vm, &g));
        }
    }
    best
}

fn sq(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum()
}

impl Constants {
    /// Named inequalities the construction guarantees; all must hold.
    pub fn properties(&self) -> Vec<(&'static str, f64, f64)> {
        let (k, cm, cc, a) = (self.kappa, self.c_max, self.c_cut, self.alpha);
        let (lmin, lmax) = (self.lambda_min, self.lambda_max);
        let k0 = self.kappa0;
        let e1 = (self.k_f0_coerc / self.eps_f0_coerc) * (2.0 / k0) * (-k0 * self.l_hull).exp();
        let e2 = self.k_f0_decr * (2.0 / k0) * (-k0 * self.l_hull).exp();
        vec![
            ("kappa0 <= sqrt(lambda_min/2)", k0, (lmin / 2.0).sqrt()),
            ("kappa0 <= 1/2", k0, 0.5),
            ("2 alpha kappa0 <= 1", 2.0 * a * k0, 1.0),
            ("kappa c_max / 2 <= lambda_min / 8", k * cm / 2.0, lmin / 8.0),
            ("2 alpha kappa (c_max + kappa) <= 1/4", 2.0 * a * k * (cm + k), 0.25),
            ("kappa/2 (c_max + kappa) <= lambda_min / 8", k / 2.0 * (cm + k), lmin / 8.0),
            ("c_cut (alpha + 1/2)(c_max + kappa) <= 1/4", cc * (a + 0.5) * (cm + k), 0.25),
            ("alpha c_cut (c_max + kappa)(c_max + 1) <= 1/4", a * cc * (cm + k) * (cm + 1.0), 0.25),
            (
                "(c_max + kappa) c_cut (1/2 + alpha (1/2 + c_max + 2 lambda_max)) <= lambda_min / 8",
                (cm + k) * cc * (0.5 + a * (0.5 + cm + 2.0 * lmax)),
                lmin / 8.0,
            ),
            ("L property 1", e1, self.d_esc_q0 * self.d_esc_q0 / 8.0),
            ("L property 2", e2, self.eps_f0_decr * self.d_esc_f0 * self.d_esc_f0 / 4.0),
        ]
    }

    pub fn check(&self) -> Result<(), DiagError> {
        for (name, lhs, rhs) in self.properties() {
            if !(lhs <= rhs * (1.0 + 1e-12) + 1e-300) {
                return Err(DiagError::ConstraintViolation(format!(
                    "{name}: {lhs:.6e} > {rhs:.6e}"
                )));
            }
        }
        let positive = [
            ("kappa0", self.kappa0),
            ("kappa", self.kappa),
            ("c_cut", self.c_cut),
            ("eps_F0coerc", self.eps_f0_coerc),
            ("eps_F0decr", self.eps_f0_decr),
            ("eps_Fcoerc", self.eps_f_coerc),
            ("eps_Fdecr", self.eps_f_decr),
            ("L", self.l_hull),
            ("d_escF0", self.d_esc_f0),
        ];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(DiagError::ConstraintViolation(format!("{name} = {x} is not positive")));
            }
        }
        Ok(())
    }

    /// Replaces c_cut0 by min(c_cut, s_hom+/2, |s_hom-|/2).
    pub fn with_hom_speeds(mut self, s_hom_plus: f64, s_hom_minus: f64) -> Self {
        self.c_cut0 = self.c_cut.min(s_hom_plus / 2.0).min(s_hom_minus.abs() / 2.0);
        self
    }

    /// Decay rate of the dichotomy envelope, min(eps_Fdecr, kappa c_cut0 / 4).
    pub fn envelope_rate(&self) -> f64 {
        self.eps_f_decr.min(self.kappa * self.c_cut0 / 4.0)
    }
}

/// All constants for a potential at damping `alpha > 0`.
pub fn compute_constants(
    v: &PotentialSpec,
    a: &PotentialAnalysis,
    alpha: f64,
) -> Result<Constants, DiagError> {
    if !(alpha > 0.0) {
        return Err(DiagError::ConstraintViolation(
            "the hyperbolic constants need alpha > 0".into(),
        ));
    }
    let (lmin, lmax) = (a.lambda_min, a.lambda_max);
    let d = a.d_esc;
    let k0 = kappa0(lmin, alpha);
    let cm = c_max(a.delta_v, lmin, d);
    let kappa = 1.0f64
        .min(1.0 / (8.0 * alpha * (cm + 1.0)))
        .min(lmin / (4.0 * (cm + 1.0)));
    let c_cut = (1.0 / (4.0 * (alpha + 0.5) * (cm + 1.0).powi(2)))
        .min(lmin / (8.0 * (cm + 1.0) * (0.5 + alpha * (0.5 + cm + 2.0 * lmax))));

    // firewall in the laboratory frame
    let eps_f0_coerc = 0.5f64.min(alpha).min(alpha * lmin / 2.0);
    let k_f0_coerc = ball_max(v, a, |w, dv, _| -2.0 * alpha * (dv - lmin / 4.0 * sq(w))).max(0.0);
    let eps_f0 = 0.5f64.min(lmin / 4.0);
    let k_f0_decr = ball_max(v, a, |w, _, g| {
        lmin / 2.0 * sq(w) - w.iter().zip(g).map(|(x, y)| x * y).sum::<f64>()
    })
    .max(0.0);
    let c_f0 = (1.5 * alpha).max(alpha).max(1.0 + 2.0 * alpha * a.q_hull);
    let eps_f0_decr = eps_f0 / c_f0;
    let d_esc_q0 = d;
    let d_esc_f0 = (eps_f0_coerc / 8.0).sqrt() * d_esc_q0;
    let arg = ((16.0 / k0) * (k_f0_coerc / eps_f0_coerc) / (d_esc_q0 * d_esc_q0))
        .max((8.0 / k0) * k_f0_decr / (eps_f0_decr * d_esc_f0 * d_esc_f0));
    // the log formula can go negative when both K vanish; any larger L also works
    let l_hull = (arg.ln() / k0).max(1.0);
    let r = a.r_att;
    let k_q0_growth = 2.0 * (2.0 / k0) * (r * (r + a.grad_sup) + r * r * (2.0 + k0));
    let s_noesc = 4.0 * l_hull * k_q0_growth / (d_esc_q0 * d_esc_q0);

    // travelling frame
    let eps_f_coerc = (alpha * alpha / 2.0).min(alpha).min(alpha * lmin / 4.0);
    let k_f_coerc = ball_max(v, a, |w, dv, _| {
        -alpha * (2.0 * dv - kappa * cm * sq(w) - lmin / 4.0 * sq(w))
    })
    .max(0.0);
    let k_eq = (cm + kappa)
        * (alpha * c_cut / 2.0 + alpha * cm + 0.5)
            .max(c_cut / 2.0 + 0.5)
            .max(c_cut * lmax);
    let k_eesc1 = ball_max(v, a, |w, dv, _| (cm + kappa) * c_cut * (dv - lmax * sq(w))).max(0.0);
    let k_ef = k_eq / eps_f_coerc;
    let k_eesc = k_eesc1 + k_eq * k_f_coerc / eps_f_coerc;
    let eps_f = (alpha / 2.0).min(0.25).min(lmin / 4.0);
    let k_f_decr = ball_max(v, a, |w, dv, g| {
        lmin / 2.0 * sq(w) - w.iter().zip(g).map(|(x, y)| x * y).sum::<f64>()
            + 2.0 * alpha * c_cut * (cm + kappa) * (dv.abs() - lmax * sq(w))
    })
    .max(0.0);
    let c_f = (1.5 * alpha * alpha)
        .max(alpha * (1.0 + cm))
        .max(2.0 * alpha * a.q_hull + 1.0 + alpha * cm);
    let eps_f_decr = eps_f / c_f;

    let consts = Constants {
        alpha,
        lambda_min: lmin,
        lambda_max: lmax,
        d_esc: d,
        delta_v: a.delta_v,
        q_hull: a.q_hull,
        r_att: r,
        grad_sup: a.grad_sup,
        kappa0: k0,
        c_max: cm,
        e_esc: e_esc(lmin, d),
        kappa,
        c_cut,
        c_cut0: c_cut,
        d_esc_q0,
        d_esc_f0,
        l_hull,
        s_noesc,
        eps_f0_coerc,
        k_f0_coerc,
        eps_f0,
        k_f0_decr,
        c_f0,
        eps_f0_decr,
        k_q0_growth,
        eps_f_coerc,
        k_f_coerc,
        k_eq,
        k_eesc1,
        k_ef,
        k_eesc,
        eps_f,
        k_f_decr,
        c_f,
        eps_f_decr,
    };
    consts.check()?;
    Ok(consts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::analyze;

    #[test]
    fn c_max_hand_value() {
        // Nagumo a = 1/4 with d_Esc = 0.1
        let cm = c_max(1.0 / 24.0, 0.25, 0.1);
        let hand = 1.0 + 4.0 * (1.0 / 24.0) / (0.0625 * 0.01);
        assert!((cm - hand).abs() < 1e-12);
        assert!((cm - 267.666_666_666_666_7).abs() < 1e-9);
    }

    #[test]
    fn kappa0_cases() {
        assert_eq!(kappa0(2.0, 1.0), 0.5);
        assert_eq!(kappa0(2.0, 4.0), 0.125);
        assert!((kappa0(0.25, 1.0) - 0.125f64.sqrt()).abs() < 1e-15);
        assert_eq!(kappa0(2.0, 0.0), 0.5);
    }

    #[test]
    fn allen_cahn_constants_hold() {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        let c = compute_constants(&v, &a, 1.0).unwrap();
        assert!((c.kappa0 - 0.5).abs() < 1e-15);
        assert!((c.c_max - 1.0).abs() < 1e-12);
        assert!((c.kappa - 1.0 / 16.0).abs() < 1e-15);
        // c_cut = min(1/(4 * 1.5 * 4), 2 / (8 * 2 * (1/2 + 1/2 + 1 + 4)))
        assert!((c.c_cut - (1.0f64 / 24.0).min(2.0 / 96.0)).abs() < 1e-15);
        for (name, lhs, rhs) in c.properties() {
            assert!(lhs <= rhs * (1.0 + 1e-12), "{name}");
        }
        assert!(c.l_hull > 0.0);
        assert!(c.s_noesc > 0.0);
    }

    #[test]
    fn rejects_parabolic_limit() {
        let v = PotentialSpec::allen_cahn();
        let a = analyze(&v).unwrap();
        assert!(matches!(
            compute_constants(&v, &a, 0.0),
            Err(DiagError::ConstraintViolation(_))
        ));
    }
}
