//! Banded linear solve with partial pivoting, used by the collocation Newton step.

/// Square band matrix with `kl` sub- and `ku` super-diagonals. Each row keeps a
/// window of width `2 kl + ku + 1` starting at column `i - kl`, wide enough to
/// absorb fill-in from row swaps.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let off = j as isize - i as isize + self.kl as isize;
        debug_assert!(off >= 0 && (off as usize) < self.width, "({i},{j}) outside band");
        i * self.width + off as usize
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        let d = j as isize - i as isize;
        d >= -(self.kl as isize) && d <= self.ku as isize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i},{j}) outside declared band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                *yi += self.get(i, j) * xj;
            }
        }
        y
    }

    /// Gaussian elimination with partial pivoting. Consumes the matrix.
    /// Returns None when a pivot vanishes.
    pub fn solve(mut self, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let reach = self.kl + self.ku;
        let mut scale = 0.0f64;
        for v in &self.data {
            scale = scale.max(v.abs());
        }
        if scale == 0.0 {
            return None;
        }
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 || best < 1e-14 * scale * f64::EPSILON {
                return None;
            }
            if p != k {
                for j in k..=last_col {
                    let a = self.get(k, j);
                    let c = if j <= (p + reach).min(n - 1) && j + self.kl >= p {
                        self.get(p, j)
                    } else {
                        0.0
                    };
                    let sk = self.slot(k, j);
                    self.data[sk] = c;
                    let sp = self.slot(p, j);
                    self.data[sp] = a;
                }
                b.swap(k, p);
            }
            let piv = self.get(k, k);
            for i in k + 1..=last_row {
                let f = self.get(i, k) / piv;
                if f == 0.0 {
                    continue;
                }
                for j in k..=last_col {
                    let v = self.get(k, j);
                    if v != 0.0 {
                        let s = self.slot(i, j);
                        self.data[s] -= f * v;
                    }
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut s = b[k];
            for (j, xj) in x.iter().enumerate().take(last_col + 1).skip(k + 1) {
                s -= self.get(k, j) * xj;
            }
            x[k] = s / self.get(k, k);
            if !x[k].is_finite() {
                return None;
            }
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let v = nalgebra::DVector::from_row_slice(b);
        m.lu().solve(&v).unwrap().iter().copied().collect()
    }

    #[test]
    fn matches_dense_lu_with_pivoting() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, kl, ku) in &[(12usize, 2usize, 3usize), (40, 5, 5), (9, 1, 0), (30, 0, 4)] {
            let mut band = BandMatrix::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if band.in_band(i, j) {
                        // small diagonal forces row swaps
                        let v: f64 = rng.gen_range(-1.0..1.0) * if i == j { 0.01 } else { 1.0 };
                        band.add(i, j, v);
                        dense[i][j] = v;
                    }
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = band.clone().solve(b.clone()).unwrap();
            let xd = dense_solve(&dense, &b);
            for (a, c) in x.iter().zip(&xd) {
                assert!((a - c).abs() < 1e-8 * (1.0 + c.abs()), "{a} vs {c}");
            }
            let r = band.mul_vec(&x);
            let xmax = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for (ri, bi) in r.iter().zip(&b) {
                assert!((ri - bi).abs() < 1e-12 * xmax * n as f64);
            }
        }
    }

    #[test]
    fn singular_returns_none() {
        let band = BandMatrix::zeros(4, 1, 1);
        assert!(band.solve(vec![1.0; 4]).is_none());
    }
}
