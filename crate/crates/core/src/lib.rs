//! Speed-`k` nearest-neighbour random walks on the circle perturbed by a
//! potential `V`, and the objects that describe their `k -> ∞` limit.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] and [`potential`]: the discretisations `Γ_k`, potentials,
//!   grid functions and the circulant tridiagonal generators `L_k`.
//! * [`perron`]: the Perron eigen-data of `k L_k + k V_k`, the Doob-normalised
//!   Gibbs chain, its stationary measure, log-profiles and entropy.
//! * [`rate`]: the cumulant `H`, its Legendre transform `L`, the Lagrangian and
//!   Hamiltonian, and path rate/action functionals.
//! * [`weak_kam`]: critical value, Mañé potential, Peierls barrier, weak KAM
//!   solutions (closed form and Lax-Oleinik value iteration) and the
//!   deviation function `I^V`.
//! * [`sim`]: exact Gillespie simulation of the free and tilted walks,
//!   exponential martingales, Feynman-Kac estimators and LDP checks.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what every
//! tolerance in the test-suite assumes. Simulation code is `f64` only.

pub mod dense;
pub mod error;
pub mod lattice;
pub mod perron;
pub mod potential;
pub mod quadrature;
pub mod rate;
pub mod scalar;
pub mod sim;
pub mod weak_kam;

pub use error::{Error, Result};
pub use lattice::{
    build_generator, extend_profile, nearest_site, restrict_potential, schrodinger_matrix,
    FineGrid, GeneratorMatrix, GridFunction, Lattice,
};
pub use perron::{
    entropy, gibbs_generator, log_profiles, perron_solve, rayleigh_quotient, stationary_measure,
    GibbsChain, PerronData, StationaryMeasure, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
pub use potential::{Maximizers, Potential, PotentialKind};
pub use rate::{
    action_functional, cumulant_h, hamiltonian, lagrangian, legendre_l, optimal_tilt, path_rate,
    PiecewisePath, TiltSchedule,
};
pub use scalar::Real;
pub use sim::{
    empirical_ldp, exp_martingale, feynman_kac, feynman_kac_exact, simulate_tilted, simulate_walk, CadlagPath,
    McEstimate,
};
pub use weak_kam::{
    critical_value, deviation_function, lax_oleinik_apply, lax_oleinik_fixed_point, mane_potential,
    momentum_profile, peierls_barrier, weak_kam_minus, weak_kam_plus, DeviationFunction, Direction,
    FixedPoint, LaxOleinikResult, WeakKamSolution,
};

pub type Potential64 = Potential<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type FineGrid64 = FineGrid<f64>;
pub type GeneratorMatrix64 = GeneratorMatrix<f64>;
pub type PerronData64 = PerronData<f64>;
pub type GibbsChain64 = GibbsChain<f64>;
pub type StationaryMeasure64 = StationaryMeasure<f64>;
pub type PiecewisePath64 = PiecewisePath<f64>;
pub type TiltSchedule64 = TiltSchedule<f64>;
pub type WeakKamSolution64 = WeakKamSolution<f64>;
pub type DeviationFunction64 = DeviationFunction<f64>;

pub type Potential32 = Potential<f32>;
pub type PerronData32 = PerronData<f32>;
