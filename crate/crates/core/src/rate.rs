//! Scalar large-deviation calculus of the speed-`k` walk.
//!
//! * cumulant `H(λ) = e^λ + e^{−λ} − 2`
//! * its Legendre transform `L(v) = v·log((v + √(v²+4))/2) − √(v²+4) + 2`
//! * the maximiser `λ_v = log((v + √(v²+4))/2) = asinh(v/2)`
//! * Lagrangian `L^V(x, v) = −V(x) + L(v)` and Hamiltonian
//!   `H(x, p) = V(x) + e^p + e^{−p} − 2`
//! * path functionals `I_T(γ) = ∫ L(γ')` and `∫ (L^V(γ, γ') + c)`.

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quadrature::{gauss_legendre8, golden_section_max};
use crate::scalar::Real;

/// Largest `|λ|` accepted by [`cumulant_h`].
fn cumulant_limit<T: Real>() -> T {
    // 700 for f64; for narrower types stay below exp overflow
    T::lit(700.0).min(T::max_value().ln() - T::lit(2.0))
}

/// `H(λ) = e^λ + e^{−λ} − 2`, evaluated as `4 sinh²(λ/2)`.
pub fn cumulant_h<T: Real>(lambda: T) -> Result<T> {
    if !lambda.is_finite() || lambda.abs() > cumulant_limit::<T>() {
        return Err(Error::Range {
            value: lambda.to_f64_lossy(),
        });
    }
    let s = (lambda * T::lit(0.5)).sinh();
    Ok(T::lit(4.0) * s * s)
}

/// `λ_v = log((v + √(v²+4))/2)`, the unique solution of `e^λ − e^{−λ} = v`.
pub fn optimal_tilt<T: Real>(v: T) -> T {
    (v * T::lit(0.5)).asinh()
}

/// Legendre transform of [`cumulant_h`].
pub fn legendre_l<T: Real>(v: T) -> T {
    let two = T::lit(2.0);
    let root = v.hypot(two);
    // √(v²+4) − 2 without cancellation near v = 0
    let excess = if v.abs() < T::one() { v * v / (root + two) } else { root - two };
    v * optimal_tilt(v) - excess
}

/// `L^V(x, v) = −V(x) + L(v)`.
pub fn lagrangian<T: Real>(x: T, v: T, potential: &Potential<T>) -> T {
    legendre_l(v) - potential.eval(x)
}

/// `H(x, p) = V(x) + e^p + e^{−p} − 2`, the convex dual of [`lagrangian`] in `v`.
pub fn hamiltonian<T: Real>(x: T, p: T, potential: &Potential<T>) -> Result<T> {
    Ok(potential.eval(x) + cumulant_h(p)?)
}

/// `sup_x [slope·x − f(x)]` for concave `slope·x − f` by a uniform scan of
/// `[lo, hi]` followed by golden-section refinement around the best node.
pub fn conjugate_by_search<T: Real>(slope: T, lo: T, hi: T, nodes: usize, f: impl Fn(T) -> T) -> T {
    let nodes = nodes.max(3);
    let step = (hi - lo) / T::from_count(nodes - 1);
    let obj = |x: T| slope * x - f(x);
    let best = (0..nodes)
        .map(|i| lo + step * T::from_count(i))
        .map(|x| (x, obj(x)))
        .fold((lo, T::neg_infinity()), |b, c| if c.1 > b.1 { c } else { b });
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    let (_, val) = golden_section_max(a, b, T::epsilon().sqrt() * step, obj);
    val.max(best.1)
}

/// Largest discrepancies `(|L − H*|, |H − L*|)` over the grids
/// `v ∈ {−5, −4.9, …, 5}` and `p ∈ {−3, −2.9, …, 3}`, the conjugates being
/// computed by [`conjugate_by_search`].
pub fn duality_gaps<T: Real>() -> (T, T) {
    let gap_l = (0..=100)
        .map(|i| T::lit(-5.0 + 0.1 * i as f64))
        .map(|v| {
            let dual = conjugate_by_search(v, T::lit(-10.0), T::lit(10.0), 2001, |l| {
                cumulant_h(l).unwrap_or(T::infinity())
            });
            (legendre_l(v) - dual).abs()
        })
        .fold(T::zero(), T::max);
    let gap_h = (0..=60)
        .map(|i| T::lit(-3.0 + 0.1 * i as f64))
        .map(|p| {
            let dual = conjugate_by_search(p, T::lit(-50.0), T::lit(50.0), 4001, legendre_l);
            (cumulant_h(p).unwrap_or(T::infinity()) - dual).abs()
        })
        .fold(T::zero(), T::max);
    (gap_l, gap_h)
}

fn validate_breakpoints<T: Real>(times: &[T], values: usize, what: &str) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::InvalidInput(format!("{what} needs at least two breakpoints")));
    }
    if values != times.len() {
        return Err(Error::InvalidInput(format!(
            "{what}: {} times but {values} values",
            times.len()
        )));
    }
    if times[0] != T::zero() {
        return Err(Error::InvalidInput(format!("{what} must start at time 0")));
    }
    if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidInput(format!("{what}: times must be finite and strictly increasing")));
    }
    Ok(())
}

/// Continuous piecewise-linear path `[0, T] → ℝ` through `(times[i], positions[i])`.
/// Positions are lifted to the real line; project with `wrap_unit` to read
/// them on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePath<T> {
    times: Vec<T>,
    positions: Vec<T>,
}

impl<T: Real> PiecewisePath<T> {
    pub fn new(times: Vec<T>, positions: Vec<T>) -> Result<Self> {
        validate_breakpoints(&times, positions.len(), "path")?;
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("path positions must be finite".into()));
        }
        Ok(Self { times, positions })
    }

    pub fn constant(x: T, horizon: T) -> Result<Self> {
        Self::new(vec![T::zero(), horizon], vec![x, x])
    }

    pub fn line(start: T, slope: T, horizon: T) -> Result<Self> {
        Self::new(vec![T::zero(), horizon], vec![start, start + slope * horizon])
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn horizon(&self) -> T {
        self.times[self.times.len() - 1]
    }

    /// `(t_start, t_end, x_start, x_end)` per segment.
    pub fn segments(&self) -> impl Iterator<Item = (T, T, T, T)> + '_ {
        self.times
            .windows(2)
            .zip(self.positions.windows(2))
            .map(|(t, x)| (t[0], t[1], x[0], x[1]))
    }

    pub fn slopes(&self) -> Vec<T> {
        self.segments().map(|(t0, t1, x0, x1)| (x1 - x0) / (t1 - t0)).collect()
    }

    /// Lifted position at time `t` (clamped to `[0, T]`).
    pub fn position_at(&self, t: T) -> T {
        let t = t.max(T::zero()).min(self.horizon());
        let i = match self.times.iter().position(|s| *s > t) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => self.times.len() - 2,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (x0, x1) = (self.positions[i], self.positions[i + 1]);
        x0 + (x1 - x0) * (t - t0) / (t1 - t0)
    }

    /// Same path with every segment split into `parts` equal pieces.
    pub fn refined(&self, parts: usize) -> Self {
        let parts = parts.max(1);
        let mut times = vec![T::zero()];
        let mut positions = vec![self.positions[0]];
        for (t0, t1, x0, x1) in self.segments() {
            for p in 1..=parts {
                let f = T::from_count(p) / T::from_count(parts);
                times.push(if p == parts { t1 } else { t0 + (t1 - t0) * f });
                positions.push(if p == parts { x1 } else { x0 + (x1 - x0) * f });
            }
        }
        Self { times, positions }
    }
}

/// Tilt schedule `λ(t)`: linear on each `[t_i, t_{i+1}]`, possibly
/// discontinuous at the breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TiltSchedule<T> {
    times: Vec<T>,
    /// `(λ(t_i+), λ(t_{i+1}−))` per segment
    segments: Vec<(T, T)>,
}

impl<T: Real> TiltSchedule<T> {
    pub fn constant(value: T, horizon: T) -> Result<Self> {
        Self::piecewise_constant(vec![T::zero(), horizon], vec![value])
    }

    /// Continuous polygonal schedule through `(times[i], values[i])`.
    pub fn polygonal(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        validate_breakpoints(&times, values.len(), "tilt schedule")?;
        let segments = values.windows(2).map(|w| (w[0], w[1])).collect();
        Self::checked(times, segments)
    }

    /// `values[i]` on `[times[i], times[i+1])`.
    pub fn piecewise_constant(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        validate_breakpoints(&times, values.len() + 1, "tilt schedule")?;
        let segments = values.iter().map(|v| (*v, *v)).collect();
        Self::checked(times, segments)
    }

    /// `λ_γ(s) = optimal_tilt(γ'(s))`: the tilt under which `γ` is the
    /// typical trajectory.
    pub fn optimal_for(path: &PiecewisePath<T>) -> Result<Self> {
        let values = path.slopes().into_iter().map(optimal_tilt).collect();
        Self::piecewise_constant(path.times().to_vec(), values)
    }

    fn checked(times: Vec<T>, segments: Vec<(T, T)>) -> Result<Self> {
        if segments.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidInput("tilt values must be finite".into()));
        }
        Ok(Self { times, segments })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn horizon(&self) -> T {
        self.times[self.times.len() - 1]
    }

    /// `(t_start, t_end, λ_start, λ_end)` per segment.
    pub fn segments(&self) -> impl Iterator<Item = (T, T, T, T)> + '_ {
        self.times
            .windows(2)
            .zip(self.segments.iter())
            .map(|(t, (a, b))| (t[0], t[1], *a, *b))
    }

    /// Right-continuous value at `t`.
    pub fn value_at(&self, t: T) -> T {
        for (t0, t1, a, b) in self.segments() {
            if t < t1 {
                return a + (b - a) * ((t - t0) / (t1 - t0)).max(T::zero());
            }
        }
        self.segments[self.segments.len() - 1].1
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|(a, b)| *a == T::zero() && *b == T::zero())
    }
}

/// `I_T(γ) = ∫₀ᵀ L(γ'(s)) ds`, exact for piecewise-linear `γ`.
pub fn path_rate<T: Real>(gamma: &PiecewisePath<T>) -> T {
    gamma
        .segments()
        .map(|(t0, t1, x0, x1)| (t1 - t0) * legendre_l((x1 - x0) / (t1 - t0)))
        .fold(T::zero(), |a, b| a + b)
}

/// `∫₀ᵀ L^V(γ(s), γ'(s)) ds + c·T`, with 8-point Gauss-Legendre on each segment.
pub fn action_functional<T: Real>(gamma: &PiecewisePath<T>, potential: &Potential<T>, c: T) -> T {
    gamma
        .segments()
        .map(|(t0, t1, x0, x1)| {
            let dt = t1 - t0;
            let slope = (x1 - x0) / dt;
            let v_integral = gauss_legendre8(t0, t1, |s| potential.eval(T::wrap_unit(x0 + slope * (s - t0))));
            dt * legendre_l(slope) - v_integral
        })
        .fold(T::zero(), |a, b| a + b)
        + c * gamma.horizon()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulant_examples() {
        assert_eq!(cumulant_h(0.0f64).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((cumulant_h(1.0f64).unwrap() - (e + 1.0 / e - 2.0)).abs() < 1e-15);
        for l in [0.1, 1.7, 12.0, 300.0] {
            assert_eq!(cumulant_h(l).unwrap(), cumulant_h(-l).unwrap());
        }
        assert!(matches!(cumulant_h(701.0f64), Err(Error::Range { .. })));
        assert!(cumulant_h(f64::NAN).is_err());
        assert!(cumulant_h(700.0f64).unwrap().is_finite());
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_l(0.0f64), 0.0);
        for v in [0.3, 1.0, 4.5, 1e3] {
            assert_eq!(legendre_l(v), legendre_l(-v));
        }
        let v = 1.5f64;
        let direct = v * ((v + (v * v + 4.0).sqrt()) / 2.0).ln() - (v * v + 4.0).sqrt() + 2.0;
        assert!((legendre_l(v) - direct).abs() < 1e-14);
        assert!(legendre_l(1e200f64).is_finite());
    }

    #[test]
    fn optimal_tilt_examples() {
        assert_eq!(optimal_tilt(0.0f64), 0.0);
        assert!((optimal_tilt(2.0f64) - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-15);
        for i in -50..=50 {
            let v = i as f64 * 0.2;
            let l = optimal_tilt(v);
            assert!((l.exp() - (-l).exp() - v).abs() < 1e-12, "v = {v}");
        }
    }

    #[test]
    fn lagrangian_and_hamiltonian_examples() {
        let v = Potential::cosine(1.0f64);
        assert_eq!(lagrangian(0.0, 0.0, &v), -1.0);
        assert!((lagrangian(0.25, 1.0, &v) - legendre_l(1.0)).abs() < 1e-15);
        assert_eq!(hamiltonian(0.4, 0.0, &v).unwrap(), v.eval(0.4));
        for (x, vel) in [(0.1, 0.7), (0.6, -2.0), (0.9, 3.3)] {
            let p = optimal_tilt(vel);
            let lhs = p * vel - lagrangian(x, vel, &v);
            assert!((lhs - hamiltonian(x, p, &v).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn path_rate_examples() {
        let t = 0.8f64;
        assert_eq!(path_rate(&PiecewisePath::constant(0.3, t).unwrap()), 0.0);
        let line = PiecewisePath::line(0.0, 1.7, t).unwrap();
        assert!((path_rate(&line) - t * legendre_l(1.7)).abs() < 1e-15);
        let zigzag = PiecewisePath::new(vec![0.0, t / 2.0, t], vec![0.0, t / 2.0, 0.0]).unwrap();
        assert!((path_rate(&zigzag) - t * legendre_l(1.0)).abs() < 1e-15);
        assert!((path_rate(&zigzag.refined(7)) - path_rate(&zigzag)).abs() < 1e-14);
    }

    #[test]
    fn path_validation() {
        assert!(PiecewisePath::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]).is_err());
        assert!(PiecewisePath::new(vec![0.1, 1.0], vec![0.0, 1.0]).is_err());
        assert!(PiecewisePath::new(vec![0.0], vec![0.0]).is_err());
        assert!(PiecewisePath::<f64>::new(vec![0.0, 1.0], vec![0.0]).is_err());
        let p = PiecewisePath::new(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.position_at(2.0), 0.5);
        assert_eq!(p.position_at(5.0), 0.0);
    }

    #[test]
    fn action_examples() {
        let v = Potential::cosine(1.0f64);
        assert_eq!(action_functional(&PiecewisePath::constant(0.0, 2.0).unwrap(), &v, 1.0), 0.0);
        let a = action_functional(&PiecewisePath::constant(0.4, 2.0).unwrap(), &v, 1.0);
        assert!((a - 2.0 * (1.0 - v.eval(0.4))).abs() < 1e-14);
    }

    #[test]
    fn tilt_schedule_evaluation() {
        let s = TiltSchedule::polygonal(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, -1.0]).unwrap();
        assert_eq!(s.value_at(0.5), 0.5);
        assert_eq!(s.value_at(1.5), 0.0);
        assert_eq!(s.value_at(2.0), -1.0);
        let c = TiltSchedule::constant(0.3, 1.0).unwrap();
        assert!(!c.is_zero());
        assert!(TiltSchedule::constant(0.0, 1.0).unwrap().is_zero());
        let opt = TiltSchedule::optimal_for(&PiecewisePath::line(0.0, 2.0, 1.0).unwrap()).unwrap();
        assert!((opt.value_at(0.3) - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-15);
    }

    #[test]
    fn duality_gaps_are_small() {
        let (gl, gh) = duality_gaps::<f64>();
        assert!(gl < 1e-8, "{gl}");
        assert!(gh < 1e-6, "{gh}");
    }
}
