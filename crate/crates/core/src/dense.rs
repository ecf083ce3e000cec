//! Small dense square matrices, used for oracles and the exact semigroup
//! `e^{t(kL_k + kV_k)}` at small `k`.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a == T::zero() {
                    continue;
                }
                let row = &other.data[l * n..(l + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d = *d + a * *b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.n, x.len());
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| *v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn add_diagonal(&self, s: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] = m.data[i * self.n + i] + s;
        }
        m
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, j).abs()))
            .fold(T::zero(), T::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// `e^A` by scaling and squaring: scale so `‖A/2^s‖₁ ≤ 1/2`, sum a
    /// degree-18 Taylor polynomial (truncation below `1e-22`), square `s` times.
    pub fn expm(&self) -> Self {
        let norm = self.norm1();
        let mut squarings = 0u32;
        let half = T::lit(0.5);
        let mut scaled_norm = norm;
        while scaled_norm > half {
            scaled_norm = scaled_norm * half;
            squarings += 1;
        }
        let a = self.scale(T::lit(0.5f64.powi(squarings as i32)));
        // Horner: I + A(I + A/2(I + A/3(...)))
        const DEGREE: usize = 18;
        let mut acc = Self::identity(self.n);
        for m in (1..=DEGREE).rev() {
            acc = a.mul(&acc).scale(T::one() / T::from_count(m)).add_diagonal(T::one());
        }
        for _ in 0..squarings {
            acc = acc.mul(&acc);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let a = DenseMatrix::from_fn(3, |i, j| if i == j { [-3.0, 0.5, 2.0][i] } else { 0.0 });
        let e = a.expm();
        for (i, d) in [-3.0f64, 0.5, 2.0].iter().enumerate() {
            assert!((e.get(i, i) - d.exp()).abs() < 1e-13 * d.exp().max(1.0));
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 2.5f64;
        let a = DenseMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => -t,
            (1, 0) => t,
            _ => 0.0,
        });
        let e = a.expm();
        assert!((e.get(0, 0) - t.cos()).abs() < 1e-13);
        assert!((e.get(1, 0) - t.sin()).abs() < 1e-13);
    }

    #[test]
    fn expm_of_generator_is_stochastic() {
        let l = crate::lattice::build_generator::<f64>(6).unwrap().to_dense().scale(3.7);
        let p = l.expm();
        for i in 0..6 {
            let s: f64 = (0..6).map(|j| p.get(i, j)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
