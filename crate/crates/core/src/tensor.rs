//! Small dense tensors for desk-scale index gymnastics (n ≤ 6).
//!
//! Everything is a flat `Vec<f64>` with closure builders in the style of
//! `t2(n, |i, j| ...)`.  Contractions are written as explicit loops at the
//! call sites; only the handful of reductions used everywhere live here.

/// Rank-1 tensor (vector / covector — placement is tracked by the caller).
pub type Ten1 = Vec<f64>;

/// Rank-2 tensor, row-major `n × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ten2 {
    pub n: usize,
    pub a: Vec<f64>,
}

/// Rank-3 tensor, `n × n × n`, index order `(i, j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ten3 {
    pub n: usize,
    pub a: Vec<f64>,
}

pub fn t1(n: usize, f: impl FnMut(usize) -> f64) -> Ten1 {
    (0..n).map(f).collect()
}

pub fn t2(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Ten2 {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = f(i, j);
        }
    }
    Ten2 { n, a }
}

pub fn t3(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Ten3 {
    let mut a = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                a[(i * n + j) * n + k] = f(i, j, k);
            }
        }
    }
    Ten3 { n, a }
}

impl Ten2 {
    pub fn zeros(n: usize) -> Self {
        Ten2 {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        t2(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    /// `(A·v)_i = A_ij v_j`.
    pub fn mul_vec(&self, v: &[f64]) -> Ten1 {
        t1(self.n, |i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
    }

    /// `v_i A_ij w_j`.
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += v[i] * self.get(i, j) * w[j];
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, o: &Ten2) -> Ten2 {
        t2(self.n, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn matmul(&self, o: &Ten2) -> Ten2 {
        t2(self.n, |i, j| {
            (0..self.n).map(|k| self.get(i, k) * o.get(k, j)).sum()
        })
    }
}

impl Ten3 {
    pub fn zeros(n: usize) -> Self {
        Ten3 {
            n,
            a: vec![0.0; n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.a[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.a[(i * self.n + j) * self.n + k] = v;
    }

    /// Contraction on the last slot: `(T·v)_ij = T_ijk v_k`.
    pub fn dot_last(&self, v: &[f64]) -> Ten2 {
        t2(self.n, |i, j| {
            (0..self.n).map(|k| self.get(i, j, k) * v[k]).sum()
        })
    }

    /// Contraction on the first slot: `(v·T)_jk = v_i T_ijk`.
    pub fn dot_first(&self, v: &[f64]) -> Ten2 {
        t2(self.n, |j, k| {
            (0..self.n).map(|i| v[i] * self.get(i, j, k)).sum()
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, o: &Ten3) -> Ten3 {
        t3(self.n, |i, j, k| self.get(i, j, k) - o.get(i, j, k))
    }
}

pub fn dot(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(a, b)| a * b).sum()
}

pub fn max_abs_vec(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub_vec(v: &[f64], w: &[f64]) -> Ten1 {
    v.iter().zip(w).map(|(a, b)| a - b).collect()
}

/// Relative max-norm gap used by the two-route checks: `‖a−b‖∞ / max(1, ‖b‖∞)`.
pub fn rel_gap(diff_max: f64, ref_max: f64) -> f64 {
    diff_max / ref_max.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_and_contractions() {
        let a = t2(2, |i, j| (i * 2 + j) as f64);
        assert_eq!(a.get(1, 0), 2.0);
        let v = vec![1.0, 2.0];
        assert_eq!(a.mul_vec(&v), vec![2.0, 8.0]);
        assert_eq!(
            a.bilinear(&v, &v),
            1.0 * 0.0 + 2.0 * 1.0 + 2.0 * 2.0 + 4.0 * 3.0
        );

        let c = t3(2, |i, j, k| (i + j + k) as f64);
        let d = c.dot_last(&v);
        assert_eq!(d.get(0, 1), 1.0 * 1.0 + 2.0 * 2.0);
    }
}
