//! Perron eigen-data of `k L_k + k V_k`, the Gibbs chain obtained by
//! Doob-normalising its semigroup, the stationary measure `π = u·μ`,
//! log-profiles and the relative entropy of the Gibbs state.

use crate::error::{Error, Result};
use crate::lattice::{
    extend_profile, restrict_potential, schrodinger_from_restricted, FineGrid, GeneratorMatrix,
    GridFunction, Lattice,
};
use crate::potential::Potential;
use crate::scalar::Real;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Stationarity residual above which eigen-data are rejected.
const STATIONARITY_REJECT: f64 = 1e-6;

/// Eigenvalue `λ_k`, positive right eigenvector `u` and left probability
/// eigenvector `μ` of `k L_k + k V_k`, normalised so `Σ_j u_j μ_j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronData<T> {
    lambda: T,
    u: GridFunction<T>,
    mu: GridFunction<T>,
    residual: T,
    iterations: usize,
    potential: GridFunction<T>,
    potential_id: String,
}

impl<T: Real> PerronData<T> {
    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn u(&self) -> &GridFunction<T> {
        &self.u
    }

    pub fn mu(&self) -> &GridFunction<T> {
        &self.mu
    }

    /// `max(‖S u − λ u‖∞, ‖Sᵀ μ − λ μ‖∞·‖u‖∞/‖μ‖∞) / ‖u‖∞` for `S = k L_k + k V_k`.
    pub fn residual(&self) -> T {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn k(&self) -> usize {
        self.u.k()
    }

    pub fn lattice(&self) -> Lattice {
        self.u.lattice()
    }

    /// The restricted potential `V_k` the data were computed for.
    pub fn potential_values(&self) -> &GridFunction<T> {
        &self.potential
    }

    pub fn potential_id(&self) -> &str {
        &self.potential_id
    }

    /// `log π_j = log u_j + log μ_j`, without forming `π` (which may underflow).
    pub fn log_stationary(&self) -> Vec<T> {
        self.u
            .values()
            .iter()
            .zip(self.mu.values())
            .map(|(u, m)| u.ln() + m.ln())
            .collect()
    }

    /// `diag(u)⁻¹ (S − λ I) diag(u)` in circulant band storage.
    pub fn doob_transform(&self) -> GeneratorMatrix<T> {
        let s = schrodinger_from_restricted(&self.potential).expect("lattice already validated");
        let l = self.lattice();
        let u = self.u.values();
        let k = l.k();
        let diag = (0..k).map(|j| s.diag()[j] - self.lambda).collect();
        let upper = (0..k).map(|j| s.upper()[j] * u[l.next(j)] / u[j]).collect();
        let lower = (0..k).map(|j| s.lower()[j] * u[l.prev(j)] / u[j]).collect();
        GeneratorMatrix::from_parts(l, diag, upper, lower).expect("band lengths match")
    }
}

/// Dominant eigenpair of `m` (or `mᵀ`) by power iteration on `m + shift·I`,
/// which must be entrywise nonnegative. Convergence is declared on the
/// eigen-residual `‖(m − λ) w‖∞ / ‖w‖∞`, with `λ` the Rayleigh quotient of
/// the current iterate.
fn power_iteration<T: Real>(
    m: &GeneratorMatrix<T>,
    shift: T,
    transpose: bool,
    tol: T,
    max_iters: usize,
) -> Result<(T, Vec<T>, T, usize)> {
    let b = m.shifted(shift);
    let k = m.k();
    let mut w = vec![T::one(); k];
    let mut residual = T::infinity();
    for it in 0..max_iters.max(1) {
        let y = if transpose { b.apply_transpose(&w) } else { b.apply(&w) };
        let (num, den) = w
            .iter()
            .zip(&y)
            .fold((T::zero(), T::zero()), |(n, d), (wi, yi)| (n + *wi * *yi, d + *wi * *wi));
        let rq = num / den;
        // w is max-normalised, so ‖w‖∞ = 1
        residual = w
            .iter()
            .zip(&y)
            .fold(T::zero(), |r, (wi, yi)| r.max((*yi - rq * *wi).abs()));
        if residual <= tol {
            return Ok((rq - shift, w, residual, it + 1));
        }
        let top = y.iter().copied().fold(T::zero(), T::max);
        if !(top > T::zero()) || !top.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "power iterate collapsed (max entry {top})"
            )));
        }
        w = y.into_iter().map(|v| v / top).collect();
    }
    Err(Error::IterationLimit {
        iterations: max_iters,
        residual: residual.to_f64_lossy(),
    })
}

/// Shift making `k L_k + k V_k + s I` entrywise nonnegative.
fn nonnegative_shift<T: Real>(v: &GridFunction<T>) -> T {
    let vmax = v.values().iter().fold(T::zero(), |m, x| m.max(x.abs()));
    T::from_count(v.k()) * (T::lit(2.0) + vmax)
}

fn check_positive<T: Real>(u: &[T]) -> Result<()> {
    match u.iter().position(|x| !(*x > T::zero()) || !x.is_finite()) {
        Some(site) => Err(Error::IrreducibilityViolation { site }),
        None => Ok(()),
    }
}

fn eigen_residual<T: Real>(s: &GeneratorMatrix<T>, lambda: T, u: &[T], transpose: bool) -> T {
    let su = if transpose { s.apply_transpose(u) } else { s.apply(u) };
    let norm = u.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    su.iter()
        .zip(u)
        .fold(T::zero(), |r, (a, b)| r.max((*a - lambda * *b).abs()))
        / norm
}

/// Perron eigen-data of `k L_k + k V_k`.
///
/// The matrix is symmetric, so a single power iteration gives `u`; then
/// `μ = u / Σu` and `u` is rescaled so that `Σu² = Σu`, which enforces
/// `Σ u μ = 1`.
///
/// Eigenvector entries decay like `e^{−k I(x)/2}` away from the maximiser of
/// `V`; for large `k·(max V − min V)` they can underflow, which is reported
/// as [`Error::IrreducibilityViolation`].
pub fn perron_solve<T: Real>(
    k: usize,
    potential: &Potential<T>,
    tol: T,
    max_iters: usize,
) -> Result<PerronData<T>> {
    let v = restrict_potential(potential, k)?;
    perron_solve_restricted(&v, potential.id(), tol, max_iters)
}

/// [`perron_solve`] for an already restricted potential `V_k`.
pub fn perron_solve_restricted<T: Real>(
    v: &GridFunction<T>,
    potential_id: &str,
    tol: T,
    max_iters: usize,
) -> Result<PerronData<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let s = schrodinger_from_restricted(v)?;
    let shift = nonnegative_shift(v);
    let (lambda, w, _, iterations) = power_iteration(&s, shift, false, tol, max_iters)?;
    check_positive(&w)?;
    let sum_w: T = w.iter().copied().sum();
    let sum_w2: T = w.iter().map(|x| *x * *x).sum();
    let scale = sum_w / sum_w2;
    let u: Vec<T> = w.iter().map(|x| *x * scale).collect();
    check_positive(&u)?;
    let mu: Vec<T> = w.iter().map(|x| *x / sum_w).collect();
    let lattice = v.lattice();
    let residual = eigen_residual(&s, lambda, &u, false);
    Ok(PerronData {
        lambda,
        u: GridFunction::new(lattice, u)?,
        mu: GridFunction::probability(lattice, mu)?,
        residual,
        iterations,
        potential: v.clone(),
        potential_id: potential_id.to_string(),
    })
}

/// Perron data from separate right and left power iterations, without using
/// the symmetry of `k L_k + k V_k`. Only used to cross-check the default path.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn perron_solve_two_sided<T: Real>(
    v: &GridFunction<T>,
    tol: T,
    max_iters: usize,
) -> Result<PerronData<T>> {
    let s = schrodinger_from_restricted(v)?;
    let shift = nonnegative_shift(v);
    let (lambda, right, _, it_r) = power_iteration(&s, shift, false, tol, max_iters)?;
    let (_, left, _, it_l) = power_iteration(&s, shift, true, tol, max_iters)?;
    check_positive(&right)?;
    check_positive(&left)?;
    let sum_left: T = left.iter().copied().sum();
    let mu: Vec<T> = left.iter().map(|x| *x / sum_left).collect();
    let pairing: T = right.iter().zip(&mu).map(|(a, b)| *a * *b).sum();
    let u: Vec<T> = right.iter().map(|x| *x / pairing).collect();
    let lattice = v.lattice();
    let residual = eigen_residual(&s, lambda, &u, false).max(eigen_residual(&s, lambda, &mu, true));
    Ok(PerronData {
        lambda,
        u: GridFunction::new(lattice, u)?,
        mu: GridFunction::probability(lattice, mu)?,
        residual,
        iterations: it_r.max(it_l),
        potential: v.clone(),
        potential_id: String::new(),
    })
}

/// `(1/k)·∫ψ (k L_k + k V_k) ψ dπ_k` with `π_k` uniform and `ψ` rescaled to
/// `√((1/k)Σψ²) = 1`; equivalently `(Σ V_j ψ_j² − Σ (ψ_{j+1} − ψ_j)²) / Σ ψ_j²`.
pub fn rayleigh_quotient<T: Real>(psi: &GridFunction<T>, k: usize, potential: &Potential<T>) -> Result<T> {
    if psi.k() != k {
        return Err(Error::InvalidInput(format!(
            "test function lives on {} sites, expected {k}",
            psi.k()
        )));
    }
    let l = psi.lattice();
    let p = psi.values();
    let norm2: T = p.iter().map(|x| *x * *x).sum();
    if !(norm2 > T::zero()) {
        return Err(Error::InvalidInput("test function is identically zero".into()));
    }
    let v = restrict_potential(potential, k)?;
    let mut dirichlet = T::zero();
    let mut weighted = T::zero();
    for j in 0..k {
        let d = p[l.next(j)] - p[j];
        dirichlet = dirichlet + d * d;
        weighted = weighted + v[j] * p[j] * p[j];
    }
    Ok((weighted - dirichlet) / norm2)
}

/// Continuous-time Gibbs chain: jumps `j → j±1` at rate `k·u_{j±1}/u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsChain<T> {
    lattice: Lattice,
    rates_right: Vec<T>,
    rates_left: Vec<T>,
}

impl<T: Real> GibbsChain<T> {
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn rates_right(&self) -> &[T] {
        &self.rates_right
    }

    pub fn rates_left(&self) -> &[T] {
        &self.rates_left
    }

    /// Rate matrix; the diagonal is minus the total exit rate.
    pub fn generator(&self) -> GeneratorMatrix<T> {
        let diag = self
            .rates_right
            .iter()
            .zip(&self.rates_left)
            .map(|(r, l)| -(*r + *l))
            .collect();
        GeneratorMatrix::from_parts(self.lattice, diag, self.rates_right.clone(), self.rates_left.clone())
            .expect("band lengths match")
    }
}

pub fn gibbs_generator<T: Real>(pd: &PerronData<T>) -> GibbsChain<T> {
    let l = pd.lattice();
    let kk = T::from_count(l.k());
    let u = pd.u.values();
    let rates_right = (0..l.k()).map(|j| kk * u[l.next(j)] / u[j]).collect();
    let rates_left = (0..l.k()).map(|j| kk * u[l.prev(j)] / u[j]).collect();
    GibbsChain {
        lattice: l,
        rates_right,
        rates_left,
    }
}

/// `π_j = u_j μ_j`, stationary for the Gibbs chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMeasure<T> {
    pi: GridFunction<T>,
    potential_id: String,
    stationarity_residual: T,
}

impl<T: Real> StationaryMeasure<T> {
    pub fn pi(&self) -> &GridFunction<T> {
        &self.pi
    }

    pub fn k(&self) -> usize {
        self.pi.k()
    }

    pub fn potential_id(&self) -> &str {
        &self.potential_id
    }

    /// `‖πᵀ G‖∞` for the Gibbs generator `G`.
    pub fn stationarity_residual(&self) -> T {
        self.stationarity_residual
    }
}

pub fn stationary_measure<T: Real>(pd: &PerronData<T>) -> Result<StationaryMeasure<T>> {
    let pi: Vec<T> = pd
        .u
        .values()
        .iter()
        .zip(pd.mu.values())
        .map(|(a, b)| *a * *b)
        .collect();
    let g = gibbs_generator(pd).generator();
    let residual = g
        .apply_transpose(&pi)
        .into_iter()
        .fold(T::zero(), |m, x| m.max(x.abs()));
    if !(residual <= T::lit(STATIONARITY_REJECT)) {
        return Err(Error::InconsistentEigendata {
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(StationaryMeasure {
        pi: GridFunction::probability(pd.lattice(), pi)?,
        potential_id: pd.potential_id.clone(),
        stationarity_residual: residual,
    })
}

/// `((1/k) log u, (1/k) log μ)` extended to `fine_n` points.
pub fn log_profiles<T: Real>(pd: &PerronData<T>, fine_n: usize) -> Result<(FineGrid<T>, FineGrid<T>)> {
    let kk = T::from_count(pd.k());
    let logs = |f: &GridFunction<T>| -> Result<GridFunction<T>> {
        if let Some(j) = f.values().iter().position(|x| !(*x > T::zero())) {
            return Err(Error::Domain(format!("log of non-positive entry at site {j}")));
        }
        GridFunction::new(f.lattice(), f.values().iter().map(|x| x.ln() / kk).collect())
    };
    let z = extend_profile(&logs(&pd.u)?, fine_n)?;
    let p = extend_profile(&logs(&pd.mu)?, fine_n)?;
    Ok((z, p))
}

/// Relative entropy of the stationary Gibbs path measure with respect to the
/// free walk started from `π`: `Σ_j k V_k(j/k) π_j − λ_k`.
pub fn entropy<T: Real>(
    pd: &PerronData<T>,
    sm: &StationaryMeasure<T>,
    k: usize,
    potential: &Potential<T>,
) -> Result<T> {
    if pd.k() != k || sm.k() != k {
        return Err(Error::InvalidInput(format!(
            "entropy inputs disagree on k ({}, {}, {k})",
            pd.k(),
            sm.k()
        )));
    }
    let v = restrict_potential(potential, k)?;
    let kk = T::from_count(k);
    let mean: T = v
        .values()
        .iter()
        .zip(sm.pi.values())
        .map(|(vj, pj)| kk * *vj * *pj)
        .sum();
    Ok(mean - pd.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;

    fn solve(k: usize, v: &Potential<f64>) -> PerronData<f64> {
        perron_solve(k, v, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap()
    }

    #[test]
    fn free_walk_is_exact() {
        for k in [2, 3, 4, 17, 64] {
            let pd = solve(k, &Potential::zero());
            assert_eq!(pd.lambda(), 0.0);
            assert!(pd.u().values().iter().all(|x| *x == 1.0));
            assert!(pd.mu().values().iter().all(|x| (*x - 1.0 / k as f64).abs() < 1e-16));
            assert_eq!(pd.residual(), 0.0);
        }
    }

    #[test]
    fn constant_potential_shifts_eigenvalue() {
        let pd = solve(16, &Potential::constant(0.75));
        assert!((pd.lambda() - 12.0).abs() < 1e-10);
        assert!(pd.u().values().iter().all(|x| (*x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn normalisation_holds() {
        let pd = solve(128, &Potential::cosine(1.0));
        let pairing: f64 = pd.u().values().iter().zip(pd.mu().values()).map(|(a, b)| a * b).sum();
        assert!((pairing - 1.0).abs() < 1e-10);
        assert!(pd.residual() <= DEFAULT_TOL);
        assert!(pd.mu().is_probability());
    }

    #[test]
    fn two_sided_matches_symmetric_path() {
        let pots = [Potential::cosine(1.0f64), Potential::bump(0.3, 0.1, 2.0).unwrap()];
        for v in &pots {
            for k in [4, 9, 32] {
                let vk = restrict_potential(v, k).unwrap();
                let a = perron_solve_restricted(&vk, "", 1e-12, DEFAULT_MAX_ITERS).unwrap();
                let b = perron_solve_two_sided(&vk, 1e-12, DEFAULT_MAX_ITERS).unwrap();
                assert!((a.lambda() - b.lambda()).abs() < 1e-9);
                for j in 0..k {
                    assert!((a.u()[j] - b.u()[j]).abs() < 1e-8 * a.u().max());
                    assert!((a.mu()[j] - b.mu()[j]).abs() < 1e-8 * a.mu().max());
                }
            }
        }
    }

    #[test]
    fn iteration_limit_reports_residual() {
        match perron_solve(64, &Potential::cosine(1.0), 1e-12, 3) {
            Err(Error::IterationLimit { iterations: 3, residual }) => assert!(residual > 0.0),
            other => panic!("{other:?}"),
        }
        assert!(perron_solve(8, &Potential::cosine(1.0), 0.0, 10).is_err());
    }

    #[test]
    fn rayleigh_examples() {
        let l = Lattice::new(16).unwrap();
        let ones = GridFunction::constant(l, 1.0);
        assert_eq!(rayleigh_quotient(&ones, 16, &Potential::zero()).unwrap(), 0.0);
        assert!(rayleigh_quotient(&ones, 16, &Potential::cosine(1.0f64)).unwrap().abs() < 1e-15);
        let zero = GridFunction::constant(l, 0.0);
        assert!(rayleigh_quotient(&zero, 16, &Potential::cosine(1.0)).is_err());
        assert!(rayleigh_quotient(&ones, 8, &Potential::cosine(1.0)).is_err());
    }

    #[test]
    fn eigenvector_attains_rayleigh_sup() {
        let v = Potential::cosine(1.0);
        let pd = solve(64, &v);
        let q = rayleigh_quotient(pd.u(), 64, &v).unwrap();
        assert!((q - pd.lambda() / 64.0).abs() < 1e-10);
        // √π ∝ u in the symmetric case
        let sm = stationary_measure(&pd).unwrap();
        let root_pi = GridFunction::new(pd.lattice(), sm.pi().values().iter().map(|p| p.sqrt()).collect()).unwrap();
        let q = rayleigh_quotient(&root_pi, 64, &v).unwrap();
        assert!((q - pd.lambda() / 64.0).abs() < 1e-6);
        let root_u = GridFunction::new(pd.lattice(), pd.u().values().iter().map(|p| p.sqrt()).collect()).unwrap();
        assert!(rayleigh_quotient(&root_u, 64, &v).unwrap() < pd.lambda() / 64.0);
    }

    #[test]
    fn gibbs_rates_free_walk() {
        let pd = solve(10, &Potential::zero());
        let g = gibbs_generator(&pd);
        assert!(g.rates_right().iter().chain(g.rates_left()).all(|r| *r == 10.0));
    }

    #[test]
    fn gibbs_generator_rows_and_doob_identity() {
        let v = Potential::shifted_cosine(0.7, 0.2, 0.1);
        let pd = solve(48, &v);
        let g = gibbs_generator(&pd).generator();
        assert!(g.row_sums().iter().all(|s| s.abs() < 1e-10));
        let doob = pd.doob_transform();
        // the diagonal agrees up to the eigen-residual, amplified by max u / min u
        let tol = 10.0 * pd.residual() * pd.u().max() / pd.u().min() + 1e-12;
        for i in 0..48 {
            for j in 0..48 {
                assert!((g.entry(i, j) - doob.entry(i, j)).abs() < tol, "({i},{j})");
            }
        }
    }

    #[test]
    fn stationary_measure_properties() {
        let sm = stationary_measure(&solve(12, &Potential::zero())).unwrap();
        assert!(sm.pi().values().iter().all(|p| (p - 1.0 / 12.0).abs() < 1e-15));

        let pd = solve(64, &Potential::bump(0.3, 0.1, 2.0).unwrap());
        let sm = stationary_measure(&pd).unwrap();
        let total: f64 = pd.u().values().iter().sum();
        for j in 0..64 {
            assert!((sm.pi()[j] - pd.u()[j] * pd.u()[j] / total).abs() < 1e-10);
        }
        assert!(sm.stationarity_residual() <= 1e-8);
        assert_eq!(sm.pi().argmax(), crate::lattice::nearest_site(0.3, 64));
    }

    #[test]
    fn log_profiles_free_walk() {
        let pd = solve(8, &Potential::zero());
        let (z, p) = log_profiles(&pd, 64).unwrap();
        assert!(z.values().iter().all(|x| *x == 0.0));
        let expected = -(8f64).ln() / 8.0;
        assert!(p.values().iter().all(|x| (x - expected).abs() < 1e-15));
    }

    #[test]
    fn entropy_vanishes_for_constant_potentials() {
        for v in [Potential::zero(), Potential::constant(1.5)] {
            let pd = solve(32, &v);
            let sm = stationary_measure(&pd).unwrap();
            assert!(entropy(&pd, &sm, 32, &v).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_is_nonnegative() {
        let v = Potential::cosine(1.0);
        let pd = solve(32, &v);
        let sm = stationary_measure(&pd).unwrap();
        assert!(entropy(&pd, &sm, 32, &v).unwrap() >= 0.0);
        assert!(entropy(&pd, &sm, 16, &v).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let pd = perron_solve(16, &Potential::<f32>::cosine(1.0), 1e-3, 100_000).unwrap();
        let pd64 = solve(16, &Potential::cosine(1.0));
        assert!((pd.lambda() as f64 - pd64.lambda()).abs() < 1e-3);
    }
}
