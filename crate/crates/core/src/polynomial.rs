//! Sparse multivariate polynomials with exact gradients and Hessians.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// A polynomial V: R^n -> R stored as a list of monomials, with the derivative
/// polynomials precomputed at construction.
#[derive(Debug, Clone)]
pub struct Polynomial {
    n: usize,
    degree: u32,
    terms: Vec<Term>,
    grad: Vec<Vec<Term>>,
    hess: Vec<Vec<Vec<Term>>>,
    // dense coefficients of V, V', V'' when n == 1
    dense: Option<[Vec<f64>; 3]>,
}

fn differentiate(terms: &[Term], i: usize) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for t in terms {
        let p = t.powers[i];
        if p == 0 || t.coeff == 0.0 {
            continue;
        }
        let mut powers = t.powers.clone();
        powers[i] -= 1;
        let coeff = t.coeff * p as f64;
        if let Some(existing) = out.iter_mut().find(|e| e.powers == powers) {
            existing.coeff += coeff;
        } else {
            out.push(Term { coeff, powers });
        }
    }
    out
}

fn to_dense(terms: &[Term], degree: u32) -> Vec<f64> {
    let mut c = vec![0.0; degree as usize + 1];
    for t in terms {
        c[t.powers[0] as usize] += t.coeff;
    }
    c
}

#[inline]
fn horner(c: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &a in c.iter().rev() {
        acc = acc * x + a;
    }
    acc
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self, String> {
        if n == 0 {
            return Err("dimension n must be at least 1".into());
        }
        let mut merged: Vec<Term> = Vec::new();
        for t in terms {
            if t.powers.len() != n {
                return Err(format!(
                    "term has {} powers but n = {}",
                    t.powers.len(),
                    n
                ));
            }
            if !t.coeff.is_finite() {
                return Err("non-finite coefficient".into());
            }
            if let Some(e) = merged.iter_mut().find(|e| e.powers == t.powers) {
                e.coeff += t.coeff;
            } else {
                merged.push(t);
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        let degree = merged
            .iter()
            .map(|t| t.powers.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        let grad: Vec<Vec<Term>> = (0..n).map(|i| differentiate(&merged, i)).collect();
        let hess: Vec<Vec<Vec<Term>>> = grad
            .iter()
            .map(|g| (0..n).map(|j| differentiate(g, j)).collect())
            .collect();
        let dense = if n == 1 {
            Some([
                to_dense(&merged, degree),
                to_dense(&grad[0], degree),
                to_dense(&hess[0][0], degree),
            ])
        } else {
            None
        };
        Ok(Polynomial {
            n,
            degree,
            terms: merged,
            grad,
            hess,
            dense,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn eval_terms(&self, terms: &[Term], u: &[f64]) -> f64 {
        let mut s = 0.0;
        for t in terms {
            let mut m = t.coeff;
            for (x, &p) in u.iter().zip(&t.powers) {
                if p > 0 {
                    m *= x.powi(p as i32);
                }
            }
            s += m;
        }
        s
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        match &self.dense {
            Some(d) => horner(&d[0], u[0]),
            None => self.eval_terms(&self.terms, u),
        }
    }

    pub fn gradient_into(&self, u: &[f64], out: &mut [f64]) {
        match &self.dense {
            Some(d) => out[0] = horner(&d[1], u[0]),
            None => {
                for (i, g) in self.grad.iter().enumerate() {
                    out[i] = self.eval_terms(g, u);
                }
            }
        }
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        self.gradient_into(u, &mut g);
        g
    }

    /// Row-major n x n Hessian.
    pub fn hessian(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut h = vec![0.0; n * n];
        if let Some(d) = &self.dense {
            h[0] = horner(&d[2], u[0]);
            return h;
        }
        for i in 0..n {
            for j in i..n {
                let v = self.eval_terms(&self.hess[i][j], u);
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        h
    }

    /// Scalar fast path for n == 1.
    #[inline]
    pub fn value_1d(&self, x: f64) -> f64 {
        match &self.dense {
            Some(d) => horner(&d[0], x),
            None => self.value(&[x]),
        }
    }

    #[inline]
    pub fn derivative_1d(&self, x: f64) -> f64 {
        match &self.dense {
            Some(d) => horner(&d[1], x),
            None => self.gradient(&[x])[0],
        }
    }

    #[inline]
    pub fn second_derivative_1d(&self, x: f64) -> f64 {
        match &self.dense {
            Some(d) => horner(&d[2], x),
            None => self.hessian(&[x])[0],
        }
    }

    /// Cheap structural check: even total degree, and the restriction to each
    /// coordinate axis has a positive even-degree leading term.
    pub fn looks_coercive(&self) -> bool {
        if self.degree < 2 || self.degree % 2 == 1 {
            return false;
        }
        (0..self.n).all(|i| {
            let axis: Vec<&Term> = self
                .terms
                .iter()
                .filter(|t| t.powers.iter().enumerate().all(|(j, &p)| j == i || p == 0))
                .collect();
            match axis.iter().map(|t| t.powers[i]).max() {
                Some(d) if d >= 2 && d % 2 == 0 => axis
                    .iter()
                    .filter(|t| t.powers[i] == d)
                    .map(|t| t.coeff)
                    .sum::<f64>()
                    > 0.0,
                _ => false,
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly2() -> Polynomial {
        // V = x^2 y + 3 y^4 - 2 x
        Polynomial::new(
            2,
            vec![
                Term { coeff: 1.0, powers: vec![2, 1] },
                Term { coeff: 3.0, powers: vec![0, 4] },
                Term { coeff: -2.0, powers: vec![1, 0] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn gradient_and_hessian_are_exact() {
        let p = poly2();
        let u = [0.7, -1.3];
        let (x, y) = (u[0], u[1]);
        assert!((p.value(&u) - (x * x * y + 3.0 * y.powi(4) - 2.0 * x)).abs() < 1e-14);
        let g = p.gradient(&u);
        assert!((g[0] - (2.0 * x * y - 2.0)).abs() < 1e-14);
        assert!((g[1] - (x * x + 12.0 * y.powi(3))).abs() < 1e-13);
        let h = p.hessian(&u);
        assert!((h[0] - 2.0 * y).abs() < 1e-14);
        assert!((h[1] - 2.0 * x).abs() < 1e-14);
        assert_eq!(h[1], h[2]);
        assert!((h[3] - 36.0 * y * y).abs() < 1e-12);
    }

    #[test]
    fn dense_path_matches_terms() {
        let p = Polynomial::new(
            1,
            vec![
                Term { coeff: 0.25, powers: vec![4] },
                Term { coeff: -0.5, powers: vec![2] },
                Term { coeff: 0.25, powers: vec![0] },
            ],
        )
        .unwrap();
        for &x in &[-1.5, -0.3, 0.0, 0.9, 2.0] {
            let v = (x * x - 1.0f64).powi(2) / 4.0;
            assert!((p.value_1d(x) - v).abs() < 1e-14);
            assert!((p.derivative_1d(x) - (x * x * x - x)).abs() < 1e-14);
            assert!((p.second_derivative_1d(x) - (3.0 * x * x - 1.0)).abs() < 1e-14);
        }
        assert!(p.looks_coercive());
    }

    #[test]
    fn rejects_mismatched_powers() {
        assert!(Polynomial::new(2, vec![Term { coeff: 1.0, powers: vec![2] }]).is_err());
    }
}
