//! Escape points left of the homogeneous marker `x_hom`.

use serde::{Deserialize, Serialize};

use super::constants::Constants;
use super::firewall::{dist2, Firewall};
use crate::error::DiagError;
use crate::pdesim::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hulls {
    pub d_q0: f64,
    pub d_f0: f64,
    pub l: f64,
}

impl Hulls {
    pub fn from_constants(c: &Constants) -> Self {
        Hulls {
            d_q0: c.d_esc_q0,
            d_f0: c.d_esc_f0,
            l: c.l_hull,
        }
    }

    pub fn q0(&self, x: f64) -> f64 {
        let d2 = self.d_q0 * self.d_q0;
        if x < 0.0 {
            f64::INFINITY
        } else if x <= self.l {
            d2 / 2.0 * (1.0 - x / (2.0 * self.l))
        } else {
            d2 / 4.0
        }
    }

    pub fn f0(&self, x: f64) -> f64 {
        if x < self.l {
            f64::INFINITY
        } else {
            self.d_f0 * self.d_f0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapePoints {
    /// Rightmost grid point at or left of `x_hom` with `|u - m| >= d_Esc`; -inf if none.
    pub x_big: f64,
    /// Infimum of the admissible left edges on the grid.
    pub x_small: f64,
    pub x_hom: f64,
}

/// Grid-resolved escape points for one snapshot and its firewall functions.
pub fn escape_points(
    snap: &Snapshot,
    fw: &Firewall,
    m: &[f64],
    d_esc: f64,
    hulls: &Hulls,
    x_hom: f64,
) -> Result<EscapePoints, DiagError> {
    let len = snap.len();
    let x_last = snap.x(len - 1);
    if !(x_hom >= snap.x0 + 1.0 && x_hom <= x_last) {
        return Err(DiagError::PreconditionUnmet(format!(
            "x_hom = {x_hom} outside [{}, {x_last}]",
            snap.x0 + 1.0
        )));
    }
    let tol = 1e-9 * snap.dx;
    let mut x_big = f64::NEG_INFINITY;
    for k in (0..len).rev() {
        if snap.x(k) <= x_hom + tol && dist2(snap.u_at(k), m) >= d_esc * d_esc {
            x_big = snap.x(k);
            break;
        }
    }

    let top = ((x_hom - 1.0 - snap.x0 + tol) / snap.dx).floor() as usize;
    // every centre either satisfies the x_hom-anchored hull or imposes a lower
    // bound on the admissible left edge; the bounds combine by max
    let d2 = hulls.d_q0 * hulls.d_q0;
    let mut lowest = 0usize;
    for k in 0..len {
        let xk = snap.x(k);
        let anchored = x_hom - xk;
        if fw.q0[k] > hulls.q0(anchored) {
            let q = fw.q0[k];
            let j = if q <= d2 / 4.0 {
                0
            } else if q <= d2 / 2.0 {
                let reach = 2.0 * hulls.l * (1.0 - 2.0 * q / d2);
                ((xk - reach - snap.x0 - tol) / snap.dx).ceil().max(0.0) as usize
            } else {
                k + 1
            };
            lowest = lowest.max(j);
        }
        if fw.f0[k] > hulls.f0(anchored) && fw.f0[k] > hulls.d_f0 * hulls.d_f0 {
            // need x_k - x_l < L
            let j = ((xk - hulls.l - snap.x0) / snap.dx + tol / snap.dx).floor() + 1.0;
            lowest = lowest.max(j.max(0.0) as usize);
        }
    }
    if lowest > top {
        return Err(DiagError::HullViolationAtHom { t: snap.t });
    }
    Ok(EscapePoints {
        x_big,
        x_small: snap.x(lowest),
        x_hom,
    })
}

/// Literal membership test of a left edge in the admissible set.
pub fn admissible_left_edge(fw: &Firewall, hulls: &Hulls, x_l: f64, x_hom: f64) -> bool {
    (0..fw.q0.len()).all(|k| {
        let x = fw.x(k);
        fw.q0[k] <= hulls.q0(x - x_l).max(hulls.q0(x_hom - x))
            && fw.f0[k] <= hulls.f0(x - x_l).max(hulls.f0(x_hom - x))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(len: usize, dx: f64) -> Snapshot {
        Snapshot {
            t: 0.0,
            x0: 0.0,
            dx,
            n: 1,
            u: vec![0.0; len],
            ut: vec![0.0; len],
        }
    }

    #[test]
    fn equilibrium_gives_left_edge() {
        let snap = flat(401, 0.1);
        let fw = Firewall {
            t: 0.0,
            x0: 0.0,
            dx: 0.1,
            q0: vec![0.0; 401],
            f0: vec![0.0; 401],
            pollution: vec![0.0; 401],
        };
        let h = Hulls { d_q0: 0.1, d_f0: 0.02, l: 3.0 };
        let e = escape_points(&snap, &fw, &[0.0], 0.1, &h, 30.0).unwrap();
        assert_eq!(e.x_big, f64::NEG_INFINITY);
        assert_eq!(e.x_small, 0.0);
    }

    #[test]
    fn linear_scan_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = Hulls { d_q0: 0.2, d_f0: 0.05, l: 2.5 };
        let d2 = h.d_q0 * h.d_q0;
        for case in 0..200 {
            let len = 300;
            let dx = 0.1;
            let snap = flat(len, dx);
            // mostly quiet, with a few excursions of random height
            let mut q0 = vec![0.0; len];
            let mut f0 = vec![0.0; len];
            for k in 0..len {
                if rng.gen_bool(0.05) {
                    q0[k] = rng.gen_range(0.0..1.2) * d2;
                }
                if rng.gen_bool(0.03) {
                    f0[k] = rng.gen_range(0.0..2.0) * h.d_f0 * h.d_f0;
                }
            }
            let fw = Firewall { t: 0.0, x0: 0.0, dx, q0, f0, pollution: vec![0.0; len] };
            let x_hom = 25.0;
            let got = escape_points(&snap, &fw, &[0.0], 0.2, &h, x_hom);
            let top = ((x_hom - 1.0) / dx + 1e-9).floor() as usize;
            let first = (0..=top).find(|&j| admissible_left_edge(&fw, &h, fw.x(j), x_hom));
            match (got, first) {
                (Ok(e), Some(j)) => {
                    assert!((e.x_small - fw.x(j)).abs() < 1e-12, "case {case}");
                    // the admissible set is an upper interval
                    assert!((j..=top).all(|i| admissible_left_edge(&fw, &h, fw.x(i), x_hom)));
                }
                (Err(DiagError::HullViolationAtHom { .. }), None) => {}
                (g, f) => panic!("case {case}: {g:?} vs {f:?}"),
            }
        }
    }

    #[test]
    fn escape_point_precedes_escape_marker() {
        let len = 400;
        let mut snap = flat(len, 0.1);
        for k in 0..150 {
            snap.u[k] = 1.0;
        }
        let fw = super::super::firewall::firewall_q0_f0(
            &snap,
            &crate::potential::PotentialSpec::allen_cahn(),
            &[0.0],
            1.0,
            0.5,
            0.2,
        );
        let h = Hulls { d_q0: 0.2, d_f0: 0.05, l: 2.0 };
        let e = escape_points(&snap, &fw, &[0.0], 0.2, &h, 35.0).unwrap();
        assert!((e.x_big - 14.9).abs() < 1e-9);
        assert!(e.x_big <= e.x_small && e.x_small <= 34.0 + 1e-9);
    }
}
