//! Exact simulation of the speed-`k` walk and its tilted versions, the
//! exponential martingale, Feynman-Kac estimators and empirical LDP checks.
//!
//! Every path is drawn from its own ChaCha8 stream keyed by `(seed, index)`,
//! so parallel sampling gives the same numbers as sequential sampling and
//! reductions run in path-index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::lattice::{nearest_site, restrict_potential, schrodinger_matrix, FineGrid, Lattice};
use crate::perron::{log_profiles, perron_solve, PerronData, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::potential::Potential;
use crate::rate::{PiecewisePath, TiltSchedule};
use crate::weak_kam::DeviationFunction;

/// Largest `k` accepted by the dense Feynman-Kac oracle.
pub const EXACT_ORACLE_MAX_K: usize = 64;
pub const MIN_FK_SAMPLES: usize = 1000;

/// A right-continuous jump path on `Γ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    k: usize,
    jump_times: Vec<f64>,
    states: Vec<usize>,
    moves: Vec<i8>,
    horizon: f64,
    seed: u64,
    stream: u64,
}

impl CadlagPath {
    /// Builds a path from its start site and signed moves, checking the
    /// invariants.
    pub fn from_moves(k: usize, start: usize, jump_times: Vec<f64>, moves: Vec<i8>, horizon: f64) -> Result<Self> {
        let lattice = Lattice::new(k)?;
        if start >= k {
            return Err(Error::InvalidInput(format!("start site {start} outside a lattice of {k} sites")));
        }
        if jump_times.len() != moves.len() {
            return Err(Error::InvalidInput("one move per jump time is required".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        let mut prev = 0.0;
        for (i, t) in jump_times.iter().enumerate() {
            if !(*t > prev || (i == 0 && *t >= 0.0)) || *t > horizon {
                return Err(Error::InvalidInput(format!("jump time {t} out of order or beyond the horizon")));
            }
            prev = *t;
        }
        let mut states = Vec::with_capacity(moves.len() + 1);
        states.push(start);
        for m in &moves {
            let s = *states.last().expect("nonempty");
            states.push(match m {
                1 => lattice.next(s),
                -1 => lattice.prev(s),
                _ => return Err(Error::InvalidInput(format!("moves must be ±1, got {m}"))),
            });
        }
        Ok(Self {
            k,
            jump_times,
            states,
            moves,
            horizon,
            seed: 0,
            stream: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// `+1` for a jump to the right, `−1` to the left.
    pub fn moves(&self) -> &[i8] {
        &self.moves
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }

    pub fn start_state(&self) -> usize {
        self.states[0]
    }

    pub fn terminal_state(&self) -> usize {
        self.states[self.states.len() - 1]
    }

    /// Net number of lattice steps taken.
    pub fn net_steps(&self) -> i64 {
        self.moves.iter().map(|m| *m as i64).sum()
    }

    /// Lifted displacement `(X(T) − X(0))` in circle units, without wrapping.
    pub fn displacement(&self) -> f64 {
        self.net_steps() as f64 / self.k as f64
    }

    pub fn state_at(&self, t: f64) -> usize {
        let n = self.jump_times.partition_point(|s| *s <= t);
        self.states[n]
    }

    /// Positions on the universal cover, starting at `start / k`.
    pub fn lifted_positions(&self) -> Vec<f64> {
        let kk = self.k as f64;
        let mut steps = self.states[0] as i64;
        let mut out = Vec::with_capacity(self.states.len());
        out.push(steps as f64 / kk);
        for m in &self.moves {
            steps += *m as i64;
            out.push(steps as f64 / kk);
        }
        out
    }

    /// `∫₀ᵀ f(X_s) ds` over the holding intervals, written as
    /// `f(X_T)·T − Σ tᵢ (f(X_{tᵢ}) − f(X_{tᵢ−}))` so that constant `f`
    /// integrates to exactly `f·T`.
    pub fn time_integral(&self, site_values: &[f64]) -> f64 {
        let mut acc = site_values[self.terminal_state()] * self.horizon;
        for (i, t) in self.jump_times.iter().enumerate() {
            acc -= t * (site_values[self.states[i + 1]] - site_values[self.states[i]]);
        }
        acc
    }

    /// Whether `sup_t d(X_t, γ(t)) ≤ δ` with the circular distance. Between
    /// merged breakpoints `X` is constant and `γ` linear; for `δ < 1/2` the
    /// lifted difference must then stay within `δ` of one integer, and by
    /// convexity checking both ends of the piece is exact.
    pub fn in_tube(&self, gamma: &PiecewisePath<f64>, delta: f64) -> bool {
        if delta >= 0.5 {
            return true;
        }
        let lifted = self.lifted_positions();
        let mut breaks: Vec<f64> = gamma
            .times()
            .iter()
            .copied()
            .filter(|t| *t > 0.0 && *t < self.horizon)
            .chain(self.jump_times.iter().copied())
            .collect();
        breaks.sort_by(f64::total_cmp);
        let mut jump = 0;
        let mut t_prev = 0.0;
        for t in breaks.into_iter().chain(std::iter::once(self.horizon)) {
            let x = lifted[jump];
            let d0 = x - gamma.position_at(t_prev);
            let d1 = x - gamma.position_at(t);
            let winding = d0.round();
            if (d0 - winding).abs() > delta || (d1 - winding).abs() > delta {
                return false;
            }
            if jump < self.jump_times.len() && self.jump_times[jump] == t {
                jump += 1;
            }
            t_prev = t;
        }
        true
    }
}

/// `min(|d|, 1 − |d|)` for `d = x − y` reduced mod 1.
pub fn circular_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_walk_args(k: usize, horizon: f64) -> Result<()> {
    Lattice::new(k)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    Ok(())
}

/// Free walk with generator `k L_k` on `[0, T]`, from `nearest_site(x0, k)`.
pub fn simulate_walk(k: usize, horizon: f64, x0: f64, seed: u64) -> Result<CadlagPath> {
    simulate_walk_indexed(k, horizon, x0, seed, 0)
}

/// As [`simulate_walk`], drawing from stream `index` of `seed`.
pub fn simulate_walk_indexed(k: usize, horizon: f64, x0: f64, seed: u64, index: u64) -> Result<CadlagPath> {
    check_walk_args(k, horizon)?;
    let mut rng = stream_rng(seed, index);
    let holding = Exp::new(2.0 * k as f64).expect("positive rate");
    let mut jump_times = Vec::new();
    let mut moves = Vec::new();
    let mut t = 0.0;
    loop {
        t += holding.sample(&mut rng);
        if t > horizon {
            break;
        }
        jump_times.push(t);
        moves.push(if rng.random::<bool>() { 1 } else { -1 });
    }
    let mut path = CadlagPath::from_moves(k, nearest_site(x0, k), jump_times, moves, horizon)?;
    path.seed = seed;
    path.stream = index;
    Ok(path)
}

/// Walk with time-dependent rates `k e^{λ(t)}` to the right and
/// `k e^{−λ(t)}` to the left, sampled by thinning against the constant
/// envelope `k (e^{max λ} + e^{−min λ})` on each schedule segment.
pub fn simulate_tilted(k: usize, horizon: f64, x0: f64, lambda: &TiltSchedule<f64>, seed: u64) -> Result<CadlagPath> {
    simulate_tilted_indexed(k, horizon, x0, lambda, seed, 0)
}

pub fn simulate_tilted_indexed(
    k: usize,
    horizon: f64,
    x0: f64,
    lambda: &TiltSchedule<f64>,
    seed: u64,
    index: u64,
) -> Result<CadlagPath> {
    check_walk_args(k, horizon)?;
    check_horizons(lambda.horizon(), horizon)?;
    let kk = k as f64;
    let mut rng = stream_rng(seed, index);
    let mut jump_times = Vec::new();
    let mut moves = Vec::new();
    for (t0, t1, a, b) in lambda.segments() {
        let t1 = t1.min(horizon);
        if t0 >= t1 {
            continue;
        }
        let envelope = kk * (a.max(b).exp() + (-a.min(b)).exp());
        let holding = Exp::new(envelope).map_err(|_| Error::InvalidInput(format!("tilt too large on [{t0}, {t1}]")))?;
        let mut t = t0;
        loop {
            t += holding.sample(&mut rng);
            if t >= t1 {
                break;
            }
            let l = a + (b - a) * (t - t0) / (t1 - t0);
            let right = kk * l.exp();
            let left = kk * (-l).exp();
            let w = rng.random::<f64>() * envelope;
            if w < right {
                jump_times.push(t);
                moves.push(1);
            } else if w < right + left {
                jump_times.push(t);
                moves.push(-1);
            }
        }
    }
    let mut path = CadlagPath::from_moves(k, nearest_site(x0, k), jump_times, moves, horizon)?;
    path.seed = seed;
    path.stream = index;
    Ok(path)
}

fn check_horizons(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
        return Err(Error::InvalidInput(format!("horizon mismatch: schedule ends at {a}, path at {b}")));
    }
    Ok(())
}

/// `sinh(h)/h − 1` without cancellation for small `h`.
fn sinhc_minus_one(h: f64) -> f64 {
    if h.abs() < 1e-3 {
        let h2 = h * h;
        h2 / 6.0 + h2 * h2 / 120.0
    } else {
        h.sinh() / h - 1.0
    }
}

/// `∫ H(λ(s)) ds` for `λ` linear from `a` to `b` over a time `dt`:
/// `2 dt (cosh(m) sinhc(h) − 1)` with `m`, `h` the midpoint and half-width.
fn integrated_cumulant(a: f64, b: f64, dt: f64) -> f64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let cosh_minus_one = 2.0 * (0.5 * m).sinh().powi(2);
    let sc = sinhc_minus_one(h);
    2.0 * dt * (cosh_minus_one * (1.0 + sc) + sc)
}

/// `log M^k_T = Σ_jumps ±λ(τᵢ) − k ∫₀ᵀ H(λ(s)) ds`; summing `±λ` over the
/// jumps is the same as the boundary terms `λ X |` minus `∫ λ' X` taken
/// segment by segment.
pub fn log_exp_martingale(path: &CadlagPath, lambda: &TiltSchedule<f64>) -> Result<f64> {
    check_horizons(lambda.horizon(), path.horizon())?;
    let mut jumps = 0.0;
    for (t, m) in path.jump_times().iter().zip(path.moves()) {
        jumps += *m as f64 * lambda.value_at(*t);
    }
    let mut compensator = 0.0;
    for (t0, t1, a, b) in lambda.segments() {
        compensator += integrated_cumulant(a, b, t1 - t0);
    }
    Ok(jumps - path.k() as f64 * compensator)
}

/// `M^k_T = exp(log M^k_T)`.
pub fn exp_martingale(path: &CadlagPath, lambda: &TiltSchedule<f64>) -> Result<f64> {
    Ok(log_exp_martingale(path, lambda)?.exp())
}

/// A Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Sample mean and standard error, summed in index order.
pub fn mean_estimate(samples: &[f64], seed: u64) -> McEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        n_samples: samples.len(),
        seed,
    }
}

/// `f` applied to `n` independent free walks, in parallel, collected by index.
pub fn map_walks<F>(k: usize, horizon: f64, x0: f64, seed: u64, n: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&CadlagPath) -> Result<f64> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_walk_indexed(k, horizon, x0, seed, i).and_then(|p| f(&p)))
        .collect()
}

/// `f` applied to `n` independent tilted walks, in parallel, collected by index.
pub fn map_tilted<F>(
    k: usize,
    horizon: f64,
    x0: f64,
    lambda: &TiltSchedule<f64>,
    seed: u64,
    n: usize,
    f: F,
) -> Result<Vec<f64>>
where
    F: Fn(&CadlagPath) -> Result<f64> + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_tilted_indexed(k, horizon, x0, lambda, seed, i).and_then(|p| f(&p)))
        .collect()
}

/// Sample mean of `M^k_T` over `n` free walks.
pub fn martingale_mean(
    k: usize,
    horizon: f64,
    x0: f64,
    lambda: &TiltSchedule<f64>,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    let samples = map_walks(k, horizon, x0, seed, n, |p| exp_martingale(p, lambda))?;
    Ok(mean_estimate(&samples, seed))
}

/// Fraction of `n` paths tilted by `λ_γ` that stay in the `δ`-tube around `γ`.
pub fn tube_fraction(k: usize, gamma: &PiecewisePath<f64>, delta: f64, n: usize, seed: u64) -> Result<f64> {
    let lambda = TiltSchedule::optimal_for(gamma)?;
    let x0 = gamma.positions()[0];
    let hits = map_tilted(k, gamma.horizon(), x0, &lambda, seed, n, |p| {
        Ok(if p.in_tube(gamma, delta) { 1.0 } else { 0.0 })
    })?;
    Ok(hits.iter().sum::<f64>() / n as f64)
}

/// Doubles `k` from `k_start` until the tube fraction exceeds `threshold`;
/// returns `(k, fraction)` or `None` past `k_max`.
pub fn concentration_search(
    gamma: &PiecewisePath<f64>,
    delta: f64,
    threshold: f64,
    k_start: usize,
    k_max: usize,
    n: usize,
    seed: u64,
) -> Result<Option<(usize, f64)>> {
    let mut k = k_start.max(2);
    while k <= k_max {
        let frac = tube_fraction(k, gamma, delta, n, seed)?;
        if frac > threshold {
            return Ok(Some((k, frac)));
        }
        k *= 2;
    }
    Ok(None)
}

/// `(1/k) log Ê[exp(k (∫₀ᵀ V(X_s) ds + u(X_T)))]` over `n_samples` walks.
///
/// Uses log-sum-exp around the largest exponent; the standard error comes
/// from the delta method, `sd(w) / (k w̄ √n)` for the shifted weights `w`.
pub fn feynman_kac(
    k: usize,
    horizon: f64,
    x0: f64,
    potential: &Potential<f64>,
    u: &FineGrid<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < MIN_FK_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "Feynman-Kac needs at least {MIN_FK_SAMPLES} samples, got {n_samples}"
        )));
    }
    let vk = restrict_potential(potential, k)?;
    let kk = k as f64;
    let site_u: Vec<f64> = (0..k).map(|j| u.eval(j as f64 / kk)).collect();
    let actions = map_walks(k, horizon, x0, seed, n_samples, |p| {
        Ok(p.time_integral(vk.values()) + site_u[p.terminal_state()])
    })?;
    if actions.iter().any(|a| !a.is_finite()) {
        return Err(Error::NumericalDegeneracy("non-finite path action".into()));
    }
    let top = actions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = actions.iter().map(|a| (kk * (a - top)).exp()).collect();
    let w = mean_estimate(&weights, seed);
    if !(w.value > 0.0) || !w.value.is_finite() {
        return Err(Error::NumericalDegeneracy(
            "all Feynman-Kac weights underflowed; use more samples or a smaller k".into(),
        ));
    }
    Ok(McEstimate {
        value: top + w.value.ln() / kk,
        std_error: w.std_error / (w.value * kk),
        n_samples,
        seed,
    })
}

/// `(1/k) log (e^{T(kL_k + kV_k)} e^{ku})(x0)` by a dense matrix exponential.
pub fn feynman_kac_exact(k: usize, horizon: f64, x0: f64, potential: &Potential<f64>, u: &FineGrid<f64>) -> Result<f64> {
    if k > EXACT_ORACLE_MAX_K {
        return Err(Error::Unsupported(format!(
            "the dense Feynman-Kac oracle is limited to k <= {EXACT_ORACLE_MAX_K}, got {k}"
        )));
    }
    check_walk_args(k, horizon)?;
    let kk = k as f64;
    let s = schrodinger_matrix(k, potential)?.to_dense();
    // e^{T(S − σ)} stays bounded for σ = k max V
    let sigma = kk * potential.max_value();
    let a = DenseMatrix::from_fn(k, |i, j| {
        horizon * (s.get(i, j) - if i == j { sigma } else { 0.0 })
    });
    let e = a.expm();
    let site_u: Vec<f64> = (0..k).map(|j| u.eval(j as f64 / kk)).collect();
    let u_max = site_u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f: Vec<f64> = site_u.iter().map(|x| (kk * (x - u_max)).exp()).collect();
    let row = nearest_site(x0, k);
    let value = e.mul_vec(&f)[row];
    if !(value > 0.0) {
        return Err(Error::NumericalDegeneracy("semigroup value underflowed".into()));
    }
    Ok(value.ln() / kk + horizon * potential.max_value() + u_max)
}

/// `(1/k) log π_{k,V}[a, b]` from already computed eigen-data.
pub fn empirical_ldp_from(pd: &PerronData<f64>, a: f64, b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&a) || !(a < b && b < 1.0) {
        return Err(Error::UndefinedInterval { a, b });
    }
    let k = pd.k();
    let kk = k as f64;
    let logs = pd.log_stationary();
    let selected: Vec<f64> = (0..k)
        .filter(|j| {
            let x = *j as f64 / kk;
            a <= x && x <= b
        })
        .map(|j| logs[j])
        .collect();
    if selected.is_empty() {
        return Err(Error::UndefinedInterval { a, b });
    }
    let top = selected.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = selected.iter().map(|l| (l - top).exp()).sum();
    Ok((top + sum.ln()) / kk)
}

/// `(1/k) log Σ_{a ≤ j/k ≤ b} π_j`.
pub fn empirical_ldp(k: usize, potential: &Potential<f64>, a: f64, b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&a) || !(a < b && b < 1.0) {
        return Err(Error::UndefinedInterval { a, b });
    }
    let pd = perron_solve(k, potential, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    empirical_ldp_from(&pd, a, b)
}

/// `−(1/k) log π_{k,V}` extended to `fine_n` points and re-centred to `min = 0`.
pub fn ldp_profile(pd: &PerronData<f64>, fine_n: usize) -> Result<FineGrid<f64>> {
    let (z, p) = log_profiles(pd, fine_n)?;
    let raw: Vec<f64> = z.values().iter().zip(p.values()).map(|(a, b)| -(a + b)).collect();
    let floor = raw.iter().copied().fold(f64::INFINITY, f64::min);
    FineGrid::new(raw.into_iter().map(|x| x - floor).collect())
}

/// Sup-norm distance between [`ldp_profile`] and `I^V` on the grid of `dev`.
pub fn ldp_profile_gap(pd: &PerronData<f64>, dev: &DeviationFunction<f64>) -> Result<f64> {
    Ok(ldp_profile(pd, dev.values().len())?.sup_distance(dev.values()))
}
