//! The discretisations `Γ_k = {0, 1/k, …, (k−1)/k}` of the circle, functions
//! on them, and the nearest-neighbour generators.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::scalar::Real;

/// `k` equally spaced sites `j / k` on `[0, 1)`. Site arithmetic is mod `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lattice {
    k: usize,
}

impl Lattice {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidLattice { k });
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn site<T: Real>(&self, j: usize) -> T {
        T::from_count(j % self.k) / T::from_count(self.k)
    }

    #[inline]
    pub fn next(&self, j: usize) -> usize {
        if j + 1 == self.k {
            0
        } else {
            j + 1
        }
    }

    #[inline]
    pub fn prev(&self, j: usize) -> usize {
        if j == 0 {
            self.k - 1
        } else {
            j - 1
        }
    }

    pub fn wrap(&self, j: i64) -> usize {
        j.rem_euclid(self.k as i64) as usize
    }
}

/// Real values indexed by the sites of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    lattice: Lattice,
    values: Vec<T>,
    probability: bool,
}

impl<T: Real> GridFunction<T> {
    pub fn new(lattice: Lattice, values: Vec<T>) -> Result<Self> {
        if values.len() != lattice.k() {
            return Err(Error::InvalidInput(format!(
                "grid function has {} values for a lattice of {} sites",
                values.len(),
                lattice.k()
            )));
        }
        Ok(Self {
            lattice,
            values,
            probability: false,
        })
    }

    /// A probability vector: entries `≥ 0` summing to one within `1e-12`.
    pub fn probability(lattice: Lattice, values: Vec<T>) -> Result<Self> {
        let mut f = Self::new(lattice, values)?;
        if let Some(j) = f.values.iter().position(|v| !(*v >= T::zero())) {
            return Err(Error::InvalidInput(format!(
                "probability vector has negative entry {} at site {j}",
                f.values[j]
            )));
        }
        let total: T = f.values.iter().copied().sum();
        if (total - T::one()).abs() > Self::probability_tolerance() {
            return Err(Error::InvalidInput(format!("probability vector sums to {total}")));
        }
        f.probability = true;
        Ok(f)
    }

    pub(crate) fn probability_tolerance() -> T {
        T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
    }

    pub fn constant(lattice: Lattice, c: T) -> Self {
        Self {
            lattice,
            values: vec![c; lattice.k()],
            probability: false,
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn k(&self) -> usize {
        self.lattice.k()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = j;
            }
        }
        best
    }
}

impl<T> std::ops::Index<usize> for GridFunction<T> {
    type Output = T;
    fn index(&self, j: usize) -> &T {
        &self.values[j]
    }
}

/// Values on the uniform fine grid `i / n`, `i = 0..n`, of `[0, 1)`,
/// evaluated off-grid by periodic linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct FineGrid<T> {
    values: Vec<T>,
}

impl<T: Real> FineGrid<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput("fine grid needs at least 2 points".into()));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(T) -> T) -> Result<Self> {
        let nn = T::from_count(n);
        Self::new((0..n).map(|i| f(T::from_count(i) / nn)).collect())
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> T {
        T::from_count(i) / T::from_count(self.values.len())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.values.len();
        let s = T::wrap_unit(x) * T::from_count(n);
        let i = s.floor().to_usize().unwrap_or(0).min(n - 1);
        let t = s - T::from_count(i);
        let j = if i + 1 == n { 0 } else { i + 1 };
        self.values[i] + t * (self.values[j] - self.values[i])
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn shifted(&self, by: T) -> Self {
        Self {
            values: self.values.iter().map(|v| *v + by).collect(),
        }
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len(), "fine grids of different size");
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// Circulant tridiagonal matrix: `diag[j]` at `(j, j)`, `upper[j]` at
/// `(j, j+1 mod k)` and `lower[j]` at `(j, j−1 mod k)`. The periodic corner
/// couplings are `upper[k−1]` and `lower[0]`. For `k = 2` both couplings of a
/// row hit the same column and are summed.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix<T> {
    lattice: Lattice,
    diag: Vec<T>,
    upper: Vec<T>,
    lower: Vec<T>,
}

impl<T: Real> GeneratorMatrix<T> {
    pub fn from_parts(lattice: Lattice, diag: Vec<T>, upper: Vec<T>, lower: Vec<T>) -> Result<Self> {
        let k = lattice.k();
        if diag.len() != k || upper.len() != k || lower.len() != k {
            return Err(Error::InvalidInput("generator band lengths must equal k".into()));
        }
        Ok(Self {
            lattice,
            diag,
            upper,
            lower,
        })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn k(&self) -> usize {
        self.lattice.k()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    /// Dense entry `(i, j)`, summing couplings that land on the same column.
    pub fn entry(&self, i: usize, j: usize) -> T {
        let l = self.lattice;
        let mut e = T::zero();
        if i == j {
            e = e + self.diag[i];
        }
        if l.next(i) == j {
            e = e + self.upper[i];
        }
        if l.prev(i) == j {
            e = e + self.lower[i];
        }
        e
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.k(), |i, j| self.entry(i, j))
    }

    /// `y = A x`
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let l = self.lattice;
        (0..self.k())
            .map(|j| self.diag[j] * x[j] + self.upper[j] * x[l.next(j)] + self.lower[j] * x[l.prev(j)])
            .collect()
    }

    /// `y = Aᵀ x`
    pub fn apply_transpose(&self, x: &[T]) -> Vec<T> {
        let l = self.lattice;
        // column j collects upper[j-1] (row j-1) and lower[j+1] (row j+1)
        (0..self.k())
            .map(|j| {
                self.diag[j] * x[j] + self.upper[l.prev(j)] * x[l.prev(j)] + self.lower[l.next(j)] * x[l.next(j)]
            })
            .collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.k())
            .map(|j| self.diag[j] + self.upper[j] + self.lower[j])
            .collect()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        let l = self.lattice;
        (0..self.k()).all(|j| (self.upper[j] - self.lower[l.next(j)]).abs() <= tol)
    }

    /// `A + shift·I`
    pub fn shifted(&self, shift: T) -> Self {
        let mut m = self.clone();
        m.diag.iter_mut().for_each(|d| *d = *d + shift);
        m
    }
}

/// `L_k`: diagonal `−2`, nearest-neighbour and corner couplings `1`.
pub fn build_generator<T: Real>(k: usize) -> Result<GeneratorMatrix<T>> {
    let lattice = Lattice::new(k)?;
    Ok(GeneratorMatrix {
        lattice,
        diag: vec![-T::lit(2.0); k],
        upper: vec![T::one(); k],
        lower: vec![T::one(); k],
    })
}

/// `V_k(j/k) = V(j/k)`.
pub fn restrict_potential<T: Real>(potential: &Potential<T>, k: usize) -> Result<GridFunction<T>> {
    let lattice = Lattice::new(k)?;
    let values = (0..k).map(|j| potential.eval(lattice.site(j))).collect();
    GridFunction::new(lattice, values)
}

/// `k·L_k + k·diag(V_k)`.
pub fn schrodinger_matrix<T: Real>(k: usize, potential: &Potential<T>) -> Result<GeneratorMatrix<T>> {
    let v = restrict_potential(potential, k)?;
    schrodinger_from_restricted(&v)
}

pub(crate) fn schrodinger_from_restricted<T: Real>(v: &GridFunction<T>) -> Result<GeneratorMatrix<T>> {
    let k = v.k();
    let kk = T::from_count(k);
    Ok(GeneratorMatrix {
        lattice: v.lattice(),
        diag: v.values().iter().map(|vj| kk * (*vj - T::lit(2.0))).collect(),
        upper: vec![kk; k],
        lower: vec![kk; k],
    })
}

/// `⌊k x⌋ mod k`, the lattice site at or to the left of `x`.
pub fn nearest_site<T: Real>(x: T, k: usize) -> usize {
    let s = (T::wrap_unit(x) * T::from_count(k)).floor();
    s.to_usize().unwrap_or(0) % k.max(1)
}

/// Periodic piecewise-linear extension of site values to `fine_n` uniform points.
/// Exact at the sites whenever `k` divides `fine_n`.
pub fn extend_profile<T: Real>(f: &GridFunction<T>, fine_n: usize) -> Result<FineGrid<T>> {
    let k = f.k();
    if fine_n < k {
        return Err(Error::InvalidResolution { fine_n, k });
    }
    let values = (0..fine_n)
        .map(|i| {
            // position i/fine_n in site units is (i·k)/fine_n, split exactly in integers
            let num = i * k;
            let j = num / fine_n;
            let frac = T::from_count(num % fine_n) / T::from_count(fine_n);
            let a = f[j];
            let b = f[(j + 1) % k];
            if frac == T::zero() {
                a
            } else {
                a + frac * (b - a)
            }
        })
        .collect();
    FineGrid::new(values)
}
