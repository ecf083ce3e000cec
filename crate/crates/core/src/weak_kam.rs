//! Aubry-Mather objects for the Lagrangian `L^V(x, v) = −V(x) + L(v)` on the
//! circle: critical value, Mañé potential, Peierls barrier, weak KAM
//! solutions and the deviation function `I^V = u₊ + u₋`.
//!
//! Along a minimiser of `∫ (L^V + c)` travelling at energy `c = max V`, the
//! action per unit length is the momentum `g(x)` solving
//! `H(x, g) = V(x) + e^g + e^{−g} − 2 = c`, i.e.
//! `g(x) = arccosh(1 + (c − V(x))/2)`. On the circle the Mañé potential is
//! then the smaller of the two arc integrals of `g`. The closed-form
//! solutions built from it are cross-checked against a dynamic-programming
//! discretisation of the Lax-Oleinik semigroups.
//!
//! Sign conventions: `u₋ = Φ(x₀, ·)` is the fixed point of the backward
//! (inf-type) semigroup, `𝒯⁻_t u₋ = u₋ − c t`. The forward (sup-type)
//! semigroup has the fixed point `−Φ(·, x₀)`; `u₊` denotes its negative,
//! `u₊ = Φ(·, x₀)`, so that both solutions vanish at `x₀` and
//! `I^V = u₊ + u₋ ≥ 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::FineGrid;
use crate::potential::{Maximizers, Potential};
use crate::quadrature::gauss_legendre8;
use crate::rate::{cumulant_h, legendre_l};
use crate::scalar::Real;

const MIN_GRID: usize = 16;
/// Time step of the dynamic-programming Lax-Oleinik discretisation.
const DP_STEP: f64 = 0.01;
pub const DEFAULT_VELOCITY_SAMPLES: usize = 129;
pub const DEFAULT_MAX_SWEEPS: usize = 200_000;

/// Which Lax-Oleinik semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `𝒯⁺_t u(x) = sup_{γ(0)=x} { u(γ(t)) − ∫₀ᵗ L^V(γ, γ') }`
    Plus,
    /// `𝒯⁻_t u(x) = inf_{γ(t)=x} { u(γ(0)) + ∫₀ᵗ L^V(γ, γ') }`
    Minus,
}

/// `c(L) = sup V`.
pub fn critical_value<T: Real>(potential: &Potential<T>) -> T {
    potential.max_value()
}

/// `arccosh(1 + d/2)` written as `log1p(y + √(y(y+2)))`, `y = d/2`, to keep
/// accuracy near the maximiser where `d → 0`.
fn momentum_for_gap<T: Real>(gap: T) -> T {
    let y = gap * T::lit(0.5);
    (y + (y * (y + T::lit(2.0))).sqrt()).ln_1p()
}

/// Tolerance for `V(x)` exceeding the computed critical value.
fn gap_guard<T: Real>(c: T) -> T {
    T::lit(1e-9) * (T::one() + c.abs())
}

fn momentum_at<T: Real>(potential: &Potential<T>, c: T, x: T) -> Result<T> {
    let gap = c - potential.eval(x);
    if gap < -gap_guard(c) {
        return Err(Error::Domain(format!(
            "V({x}) exceeds the critical value {c} by {}",
            -gap
        )));
    }
    Ok(momentum_for_gap(gap.max(T::zero())))
}

/// `g(x) = arccosh(1 + (c − V(x))/2)` on the grid `i / n`.
pub fn momentum_profile<T: Real>(potential: &Potential<T>, n: usize) -> Result<FineGrid<T>> {
    if n < MIN_GRID {
        return Err(Error::InvalidResolution { fine_n: n, k: MIN_GRID });
    }
    let c = critical_value(potential);
    let nn = T::from_count(n);
    let values = (0..n)
        .map(|i| momentum_at(potential, c, T::from_count(i) / nn))
        .collect::<Result<Vec<_>>>()?;
    FineGrid::new(values)
}

/// Mañé potential `Φ(x, y)` of the critical Lagrangian.
///
/// Holds the primitive `P(s) = ∫_{x₀}^{x₀+s} g` on `n` panels aligned with
/// the maximiser `x₀` (where `g` has its kink), each integrated with an
/// 8-point Gauss-Legendre rule.
#[derive(Debug, Clone)]
pub struct ManePotential<T> {
    potential: Potential<T>,
    c: T,
    anchor: T,
    n: usize,
    cumulative: Vec<T>,
}

impl<T: Real> ManePotential<T> {
    pub fn new(potential: &Potential<T>, n: usize) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::InvalidResolution { fine_n: n, k: MIN_GRID });
        }
        let c = critical_value(potential);
        let anchor = match potential.maximizers() {
            Maximizers::Unique(x) => x,
            Maximizers::Multiple(xs) => xs[0],
            Maximizers::Everywhere => T::zero(),
        };
        let mut pot = Self {
            potential: potential.clone(),
            c,
            anchor,
            n,
            cumulative: Vec::with_capacity(n + 1),
        };
        let h = T::one() / T::from_count(n);
        let mut acc = T::zero();
        pot.cumulative.push(acc);
        for i in 0..n {
            let a = anchor + T::from_count(i) * h;
            acc = acc + pot.panel_integral(a, a + h)?;
            pot.cumulative.push(acc);
        }
        Ok(pot)
    }

    fn panel_integral(&self, a: T, b: T) -> Result<T> {
        // screen the endpoints, the interior nodes are covered by continuity
        momentum_at(&self.potential, self.c, a)?;
        momentum_at(&self.potential, self.c, b)?;
        let guard = gap_guard(self.c);
        let v = gauss_legendre8(a, b, |x| {
            let gap = self.c - self.potential.eval(x);
            if gap < -guard {
                T::nan()
            } else {
                momentum_for_gap(gap.max(T::zero()))
            }
        });
        if v.is_nan() {
            return Err(Error::Domain(format!("V exceeds the critical value inside [{a}, {b}]")));
        }
        Ok(v)
    }

    pub fn critical_value(&self) -> T {
        self.c
    }

    pub fn anchor(&self) -> T {
        self.anchor
    }

    /// `∮ g`, the action of one full turn.
    pub fn total(&self) -> T {
        self.cumulative[self.n]
    }

    fn offset(&self, x: T) -> T {
        T::wrap_unit(x - self.anchor)
    }

    /// `∫_{x₀}^{x₀+s} g` for `s ∈ [0, 1)`.
    fn primitive_at_offset(&self, s: T) -> T {
        let nn = T::from_count(self.n);
        let i = (s * nn).floor().to_usize().unwrap_or(0).min(self.n - 1);
        let a = self.anchor + T::from_count(i) / nn;
        let b = self.anchor + s;
        if b <= a {
            return self.cumulative[i];
        }
        // endpoints were screened during construction
        self.cumulative[i] + self.panel_integral(a, b).unwrap_or(T::zero())
    }

    /// `∫ g` along the counter-clockwise (increasing) arc from `x` to `y`.
    pub fn ccw_arc(&self, x: T, y: T) -> T {
        let (sx, sy) = (self.offset(x), self.offset(y));
        let (px, py) = (self.primitive_at_offset(sx), self.primitive_at_offset(sy));
        if sy >= sx {
            py - px
        } else {
            self.total() - (px - py)
        }
    }

    /// `Φ(x, y)`: the cheaper of the two arcs.
    pub fn eval(&self, x: T, y: T) -> T {
        let ccw = self.ccw_arc(x, y);
        ccw.min(self.total() - ccw).max(T::zero())
    }

    /// Point where the two arcs from `x₀` have equal action; the smallest
    /// such coordinate (measured from `x₀`) when they tie on an interval.
    /// `None` when `g ≡ 0`.
    pub fn cut_point(&self) -> Option<T> {
        let half = self.total() * T::lit(0.5);
        if !(half > T::zero()) {
            return None;
        }
        // smallest panel whose right end reaches half
        let i = self.cumulative.partition_point(|c| *c < half).max(1) - 1;
        let nn = T::from_count(self.n);
        let (mut lo, mut hi) = (T::from_count(i) / nn, T::from_count(i + 1) / nn);
        for _ in 0..80 {
            let mid = (lo + hi) * T::lit(0.5);
            if self.primitive_at_offset(mid) < half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(T::wrap_unit(self.anchor + hi))
    }
}

/// `Φ(x, y)` with `n` quadrature panels.
pub fn mane_potential<T: Real>(x: T, y: T, potential: &Potential<T>, n: usize) -> Result<T> {
    Ok(ManePotential::new(potential, n)?.eval(x, y))
}

/// The unique static point, or `None` for a constant potential. Several
/// maximisers are rejected: selecting among them is not attempted.
fn static_point<T: Real>(potential: &Potential<T>) -> Result<Option<T>> {
    match potential.maximizers() {
        Maximizers::Unique(x) => Ok(Some(x)),
        Maximizers::Everywhere => Ok(None),
        Maximizers::Multiple(xs) => Err(Error::Unsupported(format!(
            "potential {} attains its maximum at {} points; weak KAM selection is not defined here",
            potential.id(),
            xs.len()
        ))),
    }
}

/// `h(x, y) = Φ(x, x₀) + Φ(x₀, y)` for a potential with a single static point `x₀`.
pub fn peierls_barrier<T: Real>(x: T, y: T, potential: &Potential<T>, n: usize) -> Result<T> {
    let Some(x0) = static_point(potential)? else {
        return Ok(T::zero());
    };
    let mane = ManePotential::new(potential, n)?;
    Ok(mane.eval(x, x0) + mane.eval(x0, y))
}

/// A weak KAM solution sampled on the uniform grid `i / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakKamSolution<T> {
    values: FineGrid<T>,
    sign: Direction,
    c: T,
    kink_locations: Vec<T>,
    static_point: Option<T>,
}

impl<T: Real> WeakKamSolution<T> {
    pub fn values(&self) -> &FineGrid<T> {
        &self.values
    }

    pub fn sign(&self) -> Direction {
        self.sign
    }

    pub fn critical_value(&self) -> T {
        self.c
    }

    pub fn kink_locations(&self) -> &[T] {
        &self.kink_locations
    }

    pub fn static_point(&self) -> Option<T> {
        self.static_point
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max_i |H(x_i, D u(x_i)) − c|` with centred differences, skipping grid
    /// points within `exclude` cells (circularly) of a kink.
    pub fn hj_residual(&self, potential: &Potential<T>, exclude: usize) -> Result<T> {
        let n = self.values.len();
        let nn = T::from_count(n);
        let u = self.values.values();
        let kink_cells: Vec<T> = self.kink_locations.iter().map(|x| *x * nn).collect();
        let mut worst = T::zero();
        for i in 0..n {
            let near_kink = kink_cells.iter().any(|kc| {
                let d = (T::from_count(i) - *kc).abs();
                d.min(nn - d) <= T::from_count(exclude)
            });
            if near_kink {
                continue;
            }
            let slope = (u[(i + 1) % n] - u[(i + n - 1) % n]) * nn * T::lit(0.5);
            let h = potential.eval(T::from_count(i) / nn) + cumulant_h(slope)?;
            worst = worst.max((h - self.c).abs());
        }
        Ok(worst)
    }

    /// Largest difference quotient between neighbouring grid points.
    pub fn lipschitz_estimate(&self) -> T {
        let u = self.values.values();
        let n = u.len();
        let nn = T::from_count(n);
        (0..n).fold(T::zero(), |m, i| m.max((u[(i + 1) % n] - u[i]).abs() * nn))
    }
}

fn closed_form_solution<T: Real>(potential: &Potential<T>, n: usize, sign: Direction) -> Result<WeakKamSolution<T>> {
    let x0 = static_point(potential)?;
    let c = critical_value(potential);
    let Some(x0) = x0 else {
        return Ok(WeakKamSolution {
            values: FineGrid::constant(n.max(MIN_GRID), T::zero())?,
            sign,
            c,
            kink_locations: Vec::new(),
            static_point: None,
        });
    };
    let mane = ManePotential::new(potential, n)?;
    let nn = T::from_count(n);
    let values = (0..n)
        .map(|i| {
            let x = T::from_count(i) / nn;
            match sign {
                Direction::Minus => mane.eval(x0, x),
                Direction::Plus => mane.eval(x, x0),
            }
        })
        .collect();
    Ok(WeakKamSolution {
        values: FineGrid::new(values)?,
        sign,
        c,
        kink_locations: mane.cut_point().into_iter().collect(),
        static_point: Some(x0),
    })
}

/// `u₋(x) = Φ(x₀, x)`: `𝒯⁻_t u₋ = u₋ − c t`.
pub fn weak_kam_minus<T: Real>(potential: &Potential<T>, n: usize) -> Result<WeakKamSolution<T>> {
    closed_form_solution(potential, n, Direction::Minus)
}

/// `u₊(x) = Φ(x, x₀)`, the negative of the forward fixed point:
/// `𝒯⁺_t(−u₊) = −u₊ + c t`.
pub fn weak_kam_plus<T: Real>(potential: &Potential<T>, n: usize) -> Result<WeakKamSolution<T>> {
    closed_form_solution(potential, n, Direction::Plus)
}

/// Output of [`lax_oleinik_apply`].
#[derive(Debug, Clone, PartialEq)]
pub struct LaxOleinikResult<T> {
    pub values: FineGrid<T>,
    /// Set when some optimum sat on the boundary of the velocity window, so
    /// `v_max` may have clipped the supremum.
    pub clipped: bool,
}

/// `2·arccosh(1 + (c − min V)/2) + 1`: twice the largest weak KAM slope plus margin.
pub fn default_velocity_bound<T: Real>(potential: &Potential<T>) -> T {
    let c = critical_value(potential);
    T::lit(2.0) * momentum_for_gap((c - potential.min_value()).max(T::zero())) + T::one()
}

struct DpKernel<T> {
    velocities: Vec<T>,
    running_cost: Vec<T>,
    v_grid: Vec<T>,
    delta: T,
}

impl<T: Real> DpKernel<T> {
    fn new(potential: &Potential<T>, n: usize, delta: T, v_max: T, m: usize) -> Self {
        let velocities: Vec<T> = (0..m)
            .map(|j| -v_max + T::lit(2.0) * v_max * T::from_count(j) / T::from_count(m - 1))
            .collect();
        let running_cost = velocities.iter().map(|v| delta * legendre_l(*v)).collect();
        let nn = T::from_count(n);
        let v_grid = (0..n).map(|i| potential.eval(T::from_count(i) / nn)).collect();
        Self {
            velocities,
            running_cost,
            v_grid,
            delta,
        }
    }

    /// One step of length `δ`; returns the new values and whether any optimum
    /// used an extreme velocity.
    fn step(&self, u: &[T], direction: Direction) -> (Vec<T>, bool) {
        let n = u.len();
        let nn = T::from_count(n);
        let half = T::lit(0.5);
        let m = self.velocities.len();
        let results: Vec<(T, bool)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let vi = self.v_grid[i];
                let mut best = match direction {
                    Direction::Plus => T::neg_infinity(),
                    Direction::Minus => T::infinity(),
                };
                let mut best_j = 0;
                for (j, v) in self.velocities.iter().enumerate() {
                    // + : γ(0) = x, γ(δ) = x + vδ.  − : γ(δ) = x, γ(0) = x − vδ.
                    let disp = match direction {
                        Direction::Plus => *v * self.delta,
                        Direction::Minus => -*v * self.delta,
                    };
                    let s = disp * nn;
                    let fl = s.floor();
                    let frac = s - fl;
                    let shift = fl.to_i64().unwrap_or(0);
                    let a = (i as i64 + shift).rem_euclid(n as i64) as usize;
                    let b = if a + 1 == n { 0 } else { a + 1 };
                    let uy = u[a] + frac * (u[b] - u[a]);
                    let vy = self.v_grid[a] + frac * (self.v_grid[b] - self.v_grid[a]);
                    let v_integral = self.delta * half * (vi + vy);
                    match direction {
                        Direction::Plus => {
                            let cand = uy - self.running_cost[j] + v_integral;
                            if cand > best {
                                best = cand;
                                best_j = j;
                            }
                        }
                        Direction::Minus => {
                            let cand = uy + self.running_cost[j] - v_integral;
                            if cand < best {
                                best = cand;
                                best_j = j;
                            }
                        }
                    }
                }
                (best, best_j == 0 || best_j == m - 1)
            })
            .collect();
        let clipped = results.iter().any(|r| r.1);
        (results.into_iter().map(|r| r.0).collect(), clipped)
    }
}

fn time_steps<T: Real>(t: T) -> (usize, T) {
    let steps = (t / T::lit(DP_STEP)).ceil().to_usize().unwrap_or(1).max(1);
    (steps, t / T::from_count(steps))
}

/// Dynamic-programming approximation of `𝒯^±_t u` on the grid of `u`:
/// `t` is split into steps `δ = t / ⌈t / 0.01⌉`; each step optimises over `m`
/// velocities in `[−v_max, v_max]`, interpolating `u` linearly and
/// integrating `V` by the trapezoid rule along the straight segment.
pub fn lax_oleinik_apply<T: Real>(
    u: &FineGrid<T>,
    t: T,
    direction: Direction,
    potential: &Potential<T>,
    v_max: T,
    m: usize,
) -> Result<LaxOleinikResult<T>> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("time must be positive, got {t}")));
    }
    if !(v_max > T::zero()) || !v_max.is_finite() {
        return Err(Error::InvalidInput(format!("velocity bound must be positive, got {v_max}")));
    }
    if m < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 velocity samples, got {m}")));
    }
    let (steps, delta) = time_steps(t);
    let kernel = DpKernel::new(potential, u.len(), delta, v_max, m);
    let mut values = u.values().to_vec();
    let mut clipped = false;
    for _ in 0..steps {
        let (next, c) = kernel.step(&values, direction);
        values = next;
        clipped |= c;
    }
    Ok(LaxOleinikResult {
        values: FineGrid::new(values)?,
        clipped,
    })
}

/// Output of [`lax_oleinik_fixed_point`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<T> {
    /// Forward fixed point, normalised to `max = 0` (so `−values` is `u₊`
    /// normalised to `min = 0`).
    pub values: FineGrid<T>,
    pub c_estimate: T,
    pub sweeps: usize,
    pub clipped: bool,
}

/// Value iteration `u ← 𝒯⁺_δ u`, re-centred to `max u = 0` after every sweep,
/// with `c` estimated as the mean increment per unit time. Stops once
/// successive iterates agree to `tol` in sup norm.
pub fn lax_oleinik_fixed_point<T: Real>(potential: &Potential<T>, n: usize, tol: T) -> Result<FixedPoint<T>> {
    lax_oleinik_fixed_point_with(
        potential,
        n,
        tol,
        default_velocity_bound(potential),
        DEFAULT_VELOCITY_SAMPLES,
        DEFAULT_MAX_SWEEPS,
    )
}

pub fn lax_oleinik_fixed_point_with<T: Real>(
    potential: &Potential<T>,
    n: usize,
    tol: T,
    v_max: T,
    m: usize,
    max_sweeps: usize,
) -> Result<FixedPoint<T>> {
    if n < MIN_GRID {
        return Err(Error::InvalidResolution { fine_n: n, k: MIN_GRID });
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if m < 3 || !(v_max > T::zero()) {
        return Err(Error::InvalidInput("need m >= 3 velocity samples and v_max > 0".into()));
    }
    let delta = T::lit(DP_STEP);
    let kernel = DpKernel::new(potential, n, delta, v_max, m);
    let nn = T::from_count(n);
    let mut u = vec![T::zero(); n];
    let mut c_estimate = T::zero();
    let mut change = T::infinity();
    for sweep in 1..=max_sweeps {
        let (w, clipped) = kernel.step(&u, Direction::Plus);
        let increment: T = w.iter().zip(&u).map(|(a, b)| *a - *b).sum::<T>() / nn;
        c_estimate = increment / delta;
        let top = w.iter().copied().fold(T::neg_infinity(), T::max);
        let w: Vec<T> = w.into_iter().map(|x| x - top).collect();
        change = w.iter().zip(&u).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        u = w;
        if change <= tol {
            return Ok(FixedPoint {
                values: FineGrid::new(u)?,
                c_estimate,
                sweeps: sweep,
                clipped,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_sweeps,
        change: change.to_f64_lossy(),
        c_estimate: c_estimate.to_f64_lossy(),
    })
}

/// `I^V = u₊ + u₋` on the grid `i / n`, shifted so that its minimum is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationFunction<T> {
    values: FineGrid<T>,
    minimizer: T,
}

impl<T: Real> DeviationFunction<T> {
    pub fn values(&self) -> &FineGrid<T> {
        &self.values
    }

    /// The maximiser `x₀` of `V` (0 for a constant potential).
    pub fn minimizer(&self) -> T {
        self.minimizer
    }

    pub fn eval(&self, x: T) -> T {
        self.values.eval(x)
    }

    /// `min_{x ∈ [a, b]} I^V(x)` over the grid points in the interval and its
    /// two endpoints.
    pub fn min_over(&self, a: T, b: T) -> T {
        let n = self.values.len();
        let nn = T::from_count(n);
        let first = (a * nn).ceil().to_usize().unwrap_or(0);
        let mut best = self.eval(a).min(self.eval(b));
        let mut i = first;
        while i < n && T::from_count(i) / nn <= b {
            best = best.min(self.values.values()[i]);
            i += 1;
        }
        best
    }
}

pub fn deviation_function<T: Real>(potential: &Potential<T>, n: usize) -> Result<DeviationFunction<T>> {
    let plus = weak_kam_plus(potential, n)?;
    let minus = weak_kam_minus(potential, n)?;
    let sum: Vec<T> = plus
        .values()
        .values()
        .iter()
        .zip(minus.values().values())
        .map(|(a, b)| *a + *b)
        .collect();
    let floor = sum.iter().copied().fold(T::infinity(), T::min);
    Ok(DeviationFunction {
        values: FineGrid::new(sum.into_iter().map(|x| x - floor).collect())?,
        minimizer: plus.static_point().unwrap_or(T::zero()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos() -> Potential<f64> {
        Potential::cosine(1.0)
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_value(&Potential::<f64>::zero()), 0.0);
        assert_eq!(critical_value(&cos()), 1.0);
        assert_eq!(critical_value(&Potential::bump(0.3, 0.1, 2.0).unwrap()), 2.0);
    }

    #[test]
    fn momentum_examples() {
        let g = momentum_profile(&cos(), 64).unwrap();
        assert_eq!(g.values()[0], 0.0);
        assert!((g.values()[32] - 2f64.acosh()).abs() < 1e-15);
        assert!(g.values().iter().all(|x| *x >= 0.0));
        let z = momentum_profile(&Potential::<f64>::zero(), 32).unwrap();
        assert!(z.values().iter().all(|x| *x == 0.0));
        assert!(momentum_profile(&cos(), 8).is_err());
    }

    #[test]
    fn momentum_guard_rejects_values_above_c() {
        assert!(momentum_at(&cos(), 0.5, 0.0).is_err());
        assert!(momentum_at(&cos(), 1.0 - 1e-12, 0.0).is_ok());
    }

    #[test]
    fn mane_basics() {
        let v = cos();
        let mane = ManePotential::new(&v, 1000).unwrap();
        assert_eq!(mane.eval(0.3, 0.3), 0.0);
        let a = mane.ccw_arc(0.0, 0.5);
        let b = mane.ccw_arc(0.5, 0.0);
        assert!((a - b).abs() < 1e-12);
        assert!((mane.eval(0.2, 0.7) - mane.eval(0.7, 0.2)).abs() < 1e-12);
        assert_eq!(mane_potential(0.1, 0.9, &Potential::zero(), 64).unwrap(), 0.0);
        let cut = mane.cut_point().unwrap();
        assert!((cut - 0.5).abs() < 1e-12, "{cut}");
    }

    #[test]
    fn peierls_examples() {
        let v = Potential::bump(0.3f64, 0.1, 2.0).unwrap();
        assert_eq!(peierls_barrier(0.3, 0.3, &v, 256).unwrap(), 0.0);
        let h = peierls_barrier(0.3, 0.8, &v, 256).unwrap();
        assert!((h - mane_potential(0.3, 0.8, &v, 256).unwrap()).abs() < 1e-14);
        let two = Potential::tabulated(
            (0..64).map(|j| (2.0 * std::f64::consts::TAU * j as f64 / 64.0).cos()).collect(),
        )
        .unwrap();
        assert!(matches!(peierls_barrier(0.1, 0.2, &two, 64), Err(Error::Unsupported(_))));
        assert!(matches!(weak_kam_minus(&two, 64), Err(Error::Unsupported(_))));
        assert!(matches!(deviation_function(&two, 64), Err(Error::Unsupported(_))));
    }

    #[test]
    fn weak_kam_examples() {
        let um = weak_kam_minus(&cos(), 1000).unwrap();
        assert_eq!(um.values().values()[0], 0.0);
        assert_eq!(um.kink_locations().len(), 1);
        let up = weak_kam_plus(&cos(), 1000).unwrap();
        assert_eq!(up.values().values()[0], 0.0);
        assert!(up.values().sup_distance(um.values()) < 1e-12);
        let flat = weak_kam_minus(&Potential::<f64>::zero(), 100).unwrap();
        assert!(flat.values().values().iter().all(|x| *x == 0.0));
        assert!(flat.kink_locations().is_empty());
    }

    #[test]
    fn hj_residual_is_small_away_from_kink() {
        let v = cos();
        let um = weak_kam_minus(&v, 10_000).unwrap();
        assert!(um.hj_residual(&v, 5).unwrap() <= 1e-3);
        // but not at the kink itself
        assert!(um.hj_residual(&v, 0).unwrap() > 1e-2);
        let lip = um.lipschitz_estimate();
        assert!(lip <= 2f64.acosh() + 1e-3);
    }

    #[test]
    fn deviation_function_examples() {
        let dev = deviation_function(&cos(), 512).unwrap();
        assert_eq!(dev.values().values()[0], 0.0);
        assert_eq!(dev.minimizer(), 0.0);
        let flat = deviation_function(&Potential::<f64>::zero(), 64).unwrap();
        assert!(flat.values().values().iter().all(|x| *x == 0.0));
        assert!(dev.min_over(0.4, 0.6) > 0.0);
        assert_eq!(dev.min_over(0.9, 0.999), dev.eval(0.999).min(dev.min_over(0.999, 0.999)));
    }

    #[test]
    fn lax_oleinik_trivial_cases() {
        let zero = FineGrid::constant(128, 0.0).unwrap();
        let r = lax_oleinik_apply(&zero, 0.37, Direction::Plus, &Potential::zero(), 2.0, 33).unwrap();
        assert!(r.values.values().iter().all(|x| *x == 0.0));
        assert!(!r.clipped);
        let c = 0.8f64;
        let u = FineGrid::constant(128, 3.0).unwrap();
        let r = lax_oleinik_apply(&u, 0.25, Direction::Plus, &Potential::constant(c), 2.0, 33).unwrap();
        assert!(r.values.values().iter().all(|x| (x - (3.0 + 0.25 * c)).abs() < 1e-13));
        let r = lax_oleinik_apply(&u, 0.25, Direction::Minus, &Potential::constant(c), 2.0, 33).unwrap();
        assert!(r.values.values().iter().all(|x| (x - (3.0 - 0.25 * c)).abs() < 1e-13));
        assert!(lax_oleinik_apply(&u, 0.0, Direction::Plus, &Potential::zero(), 2.0, 33).is_err());
        assert!(lax_oleinik_apply(&u, 1.0, Direction::Plus, &Potential::zero(), 2.0, 2).is_err());
    }

    #[test]
    fn lax_oleinik_fixed_point_free_case() {
        let fp = lax_oleinik_fixed_point(&Potential::<f64>::zero(), 64, 1e-12).unwrap();
        assert_eq!(fp.c_estimate, 0.0);
        assert!(fp.values.values().iter().all(|x| *x == 0.0));
    }
}
