//! Potentials on the circle `[0, 1)`.
//!
//! Built-in kinds are smooth, 1-periodic and have a maximiser known in
//! closed form. Tabulated potentials are interpolated with a periodic cubic
//! spline, which is `C²`.
//!
//! Textual grammar (used by configuration files and the CLI):
//!
//! ```text
//! cos(a)                  a·cos(2πx)
//! cos(a,phase)            a·cos(2π(x − phase))
//! cos(a,phase,offset)     a·cos(2π(x − phase)) + offset
//! bump(center,width,h)    h·exp((cos(2π(x − center)) − 1) / (2π·width)²)
//! const(c)                constant c
//! zero                    constant 0
//! table:<path>            one sample per line, uniformly spaced on [0, 1)
//! ```

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quadrature::golden_section_max;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind<T> {
    /// `amplitude · cos(2πx)`
    Cosine { amplitude: T },
    /// `amplitude · cos(2π(x − phase)) + offset`
    ShiftedCosine { amplitude: T, phase: T, offset: T },
    /// Periodic von Mises bump of standard deviation ≈ `width` peaking at `center`.
    SmoothBump { center: T, width: T, height: T },
    Tabulated(PeriodicSpline<T>),
}

/// Where a potential attains its maximum.
#[derive(Debug, Clone, PartialEq)]
pub enum Maximizers<T> {
    Unique(T),
    /// Constant potential: every point is a maximiser.
    Everywhere,
    Multiple(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential<T> {
    kind: PotentialKind<T>,
    id: String,
}

impl<T: Real> Potential<T> {
    pub fn cosine(amplitude: T) -> Self {
        Self {
            id: format!("cos({amplitude})"),
            kind: PotentialKind::Cosine { amplitude },
        }
    }

    pub fn shifted_cosine(amplitude: T, phase: T, offset: T) -> Self {
        Self {
            id: format!("cos({amplitude},{phase},{offset})"),
            kind: PotentialKind::ShiftedCosine {
                amplitude,
                phase: T::wrap_unit(phase),
                offset,
            },
        }
    }

    pub fn constant(c: T) -> Self {
        Self {
            id: format!("const({c})"),
            kind: PotentialKind::ShiftedCosine {
                amplitude: T::zero(),
                phase: T::zero(),
                offset: c,
            },
        }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn bump(center: T, width: T, height: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::PotentialSpec(format!("bump width must be positive, got {width}")));
        }
        Ok(Self {
            id: format!("bump({center},{width},{height})"),
            kind: PotentialKind::SmoothBump {
                center: T::wrap_unit(center),
                width,
                height,
            },
        })
    }

    /// Samples at `j / n`, `j = 0..n`.
    pub fn tabulated(samples: Vec<T>) -> Result<Self> {
        let spline = PeriodicSpline::new(samples)?;
        Ok(Self {
            id: format!("table[{}]", spline.samples.len()),
            kind: PotentialKind::Tabulated(spline),
        })
    }

    /// Parses the textual grammar described in the module docs.
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if let Some(path) = s.strip_prefix("table:") {
            let mut pot = Self::from_table_file(Path::new(path.trim()))?;
            pot.id = s.to_string();
            return Ok(pot);
        }
        if s == "zero" {
            return Ok(Self::zero());
        }
        let open = s
            .find('(')
            .ok_or_else(|| Error::PotentialSpec(format!("cannot parse `{s}`")))?;
        if !s.ends_with(')') {
            return Err(Error::PotentialSpec(format!("missing `)` in `{s}`")));
        }
        let name = s[..open].trim();
        let args: Vec<T> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::PotentialSpec(format!("bad number `{}` in `{s}`", a.trim())))
            })
            .collect::<Result<_>>()?;
        let mut pot = match (name, args.as_slice()) {
            ("cos", [a]) => Self::cosine(*a),
            ("cos", [a, p]) if *p == T::zero() => Self::cosine(*a),
            ("cos", [a, p]) => Self::shifted_cosine(*a, *p, T::zero()),
            ("cos", [a, p, o]) => Self::shifted_cosine(*a, *p, *o),
            ("bump", [c, w, h]) => Self::bump(*c, *w, *h)?,
            ("const", [c]) => Self::constant(*c),
            _ => {
                return Err(Error::PotentialSpec(format!(
                    "unknown potential `{name}` with {} argument(s)",
                    args.len()
                )))
            }
        };
        pot.id = s.to_string();
        Ok(pot)
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::PotentialSpec(format!("reading {}: {e}", path.display())))?;
        let samples = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::PotentialSpec(format!("bad sample `{l}` in {}", path.display())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::tabulated(samples)
    }

    pub fn kind(&self) -> &PotentialKind<T> {
        &self.kind
    }

    /// Stable identifier (the grammar string it was built from, when parsed).
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, x: T) -> T {
        let tau = T::two_pi();
        match &self.kind {
            PotentialKind::Cosine { amplitude } => *amplitude * (tau * x).cos(),
            PotentialKind::ShiftedCosine {
                amplitude,
                phase,
                offset,
            } => {
                if *amplitude == T::zero() {
                    *offset
                } else {
                    *amplitude * (tau * (x - *phase)).cos() + *offset
                }
            }
            PotentialKind::SmoothBump {
                center,
                width,
                height,
            } => {
                let scale = tau * *width;
                *height * (((tau * (x - *center)).cos() - T::one()) / (scale * scale)).exp()
            }
            PotentialKind::Tabulated(s) => s.eval(x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.maximizers(), Maximizers::Everywhere)
    }

    pub fn maximizers(&self) -> Maximizers<T> {
        let half = T::lit(0.5);
        match &self.kind {
            PotentialKind::Cosine { amplitude } => sign_maximizer(*amplitude, T::zero()),
            PotentialKind::ShiftedCosine {
                amplitude, phase, ..
            } => sign_maximizer(*amplitude, *phase),
            PotentialKind::SmoothBump { center, height, .. } => {
                if *height == T::zero() {
                    Maximizers::Everywhere
                } else if *height > T::zero() {
                    Maximizers::Unique(*center)
                } else {
                    Maximizers::Unique(T::wrap_unit(*center + half))
                }
            }
            PotentialKind::Tabulated(s) => s.maximizers(),
        }
    }

    pub fn unique_max(&self) -> bool {
        matches!(self.maximizers(), Maximizers::Unique(_))
    }

    /// `sup V` (closed form for built-ins).
    pub fn max_value(&self) -> T {
        match &self.kind {
            PotentialKind::Cosine { amplitude } => amplitude.abs(),
            PotentialKind::ShiftedCosine {
                amplitude, offset, ..
            } => amplitude.abs() + *offset,
            PotentialKind::SmoothBump { width, height, .. } => {
                if *height >= T::zero() {
                    *height
                } else {
                    *height * bump_floor(*width)
                }
            }
            PotentialKind::Tabulated(s) => s.extremum(true).1,
        }
    }

    /// `inf V` (closed form for built-ins).
    pub fn min_value(&self) -> T {
        match &self.kind {
            PotentialKind::Cosine { amplitude } => -amplitude.abs(),
            PotentialKind::ShiftedCosine {
                amplitude, offset, ..
            } => *offset - amplitude.abs(),
            PotentialKind::SmoothBump { width, height, .. } => {
                if *height >= T::zero() {
                    *height * bump_floor(*width)
                } else {
                    *height
                }
            }
            PotentialKind::Tabulated(s) => s.extremum(false).1,
        }
    }
}

impl<T: Real> fmt::Display for Potential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

fn sign_maximizer<T: Real>(amplitude: T, phase: T) -> Maximizers<T> {
    if amplitude == T::zero() {
        Maximizers::Everywhere
    } else if amplitude > T::zero() {
        Maximizers::Unique(T::wrap_unit(phase))
    } else {
        Maximizers::Unique(T::wrap_unit(phase + T::lit(0.5)))
    }
}

/// Value of the unit-height bump at the antipode of its centre.
fn bump_floor<T: Real>(width: T) -> T {
    let scale = T::two_pi() * width;
    (-T::lit(2.0) / (scale * scale)).exp()
}

/// Periodic cubic spline through uniformly spaced samples on `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline<T> {
    samples: Vec<T>,
    second: Vec<T>,
}

impl<T: Real> PeriodicSpline<T> {
    pub fn new(samples: Vec<T>) -> Result<Self> {
        let n = samples.len();
        if n < 4 {
            return Err(Error::PotentialSpec(format!(
                "tabulated potential needs at least 4 samples, got {n}"
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::PotentialSpec("tabulated potential has non-finite samples".into()));
        }
        let h_inv2 = T::from_count(n) * T::from_count(n);
        let six = T::lit(6.0);
        let rhs: Vec<T> = (0..n)
            .map(|i| {
                let prev = samples[(i + n - 1) % n];
                let next = samples[(i + 1) % n];
                six * h_inv2 * (next - T::lit(2.0) * samples[i] + prev)
            })
            .collect();
        let second = solve_cyclic_tridiagonal(T::one(), T::lit(4.0), T::one(), &rhs);
        Ok(Self { samples, second })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.samples.len();
        let s = T::wrap_unit(x) * T::from_count(n);
        let i = s.floor().to_usize().unwrap_or(0).min(n - 1);
        let t = s - T::from_count(i);
        let j = (i + 1) % n;
        let h = T::one() / T::from_count(n);
        let u = T::one() - t;
        let six = T::lit(6.0);
        u * self.samples[i]
            + t * self.samples[j]
            + h * h / six * ((u * u * u - u) * self.second[i] + (t * t * t - t) * self.second[j])
    }

    /// Refined global max (`want_max`) or min, as `(argument, value)`.
    fn extremum(&self, want_max: bool) -> (T, T) {
        let sign = if want_max { T::one() } else { -T::one() };
        let n = self.samples.len();
        let best = (0..n)
            .max_by(|&a, &b| {
                (sign * self.samples[a])
                    .partial_cmp(&(sign * self.samples[b]))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        self.refine(best, sign)
    }

    fn refine(&self, i: usize, sign: T) -> (T, T) {
        let n = T::from_count(self.samples.len());
        let c = T::from_count(i) / n;
        let h = T::one() / n;
        let (x, fx) = golden_section_max(c - h, c + h, T::epsilon().sqrt() * h, |x| {
            sign * self.eval(x)
        });
        (T::wrap_unit(x), sign * fx)
    }

    fn maximizers(&self) -> Maximizers<T> {
        let n = self.samples.len();
        let (lo, hi) = self
            .samples
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let scale = T::one() + hi.abs().max(lo.abs());
        if hi - lo <= T::lit(1e-12) * scale {
            return Maximizers::Everywhere;
        }
        // candidate peaks: sample-local maxima, refined on the spline
        let mut peaks: Vec<(T, T)> = (0..n)
            .filter(|&i| {
                let v = self.samples[i];
                v >= self.samples[(i + n - 1) % n] && v > self.samples[(i + 1) % n]
            })
            .map(|i| self.refine(i, T::one()))
            .collect();
        let top = peaks.iter().fold(T::neg_infinity(), |m, p| m.max(p.1));
        peaks.retain(|p| p.1 >= top - T::lit(1e-9) * scale);
        if peaks.len() == 1 {
            Maximizers::Unique(peaks[0].0)
        } else {
            Maximizers::Multiple(peaks.into_iter().map(|p| p.0).collect())
        }
    }
}

/// Solves the constant-coefficient cyclic tridiagonal system
/// `lower·x[i−1] + diag·x[i] + upper·x[i+1] = rhs[i]` (indices mod n)
/// by Sherman-Morrison on top of the Thomas algorithm.
fn solve_cyclic_tridiagonal<T: Real>(lower: T, diag: T, upper: T, rhs: &[T]) -> Vec<T> {
    let n = rhs.len();
    let gamma = -diag;
    let mut b = vec![diag; n];
    b[0] = diag - gamma;
    b[n - 1] = diag - lower * upper / gamma;
    let x = thomas(lower, &b, upper, rhs);
    let mut u = vec![T::zero(); n];
    u[0] = gamma;
    // corners: A[0][n-1] = lower, A[n-1][0] = upper
    u[n - 1] = upper;
    let z = thomas(lower, &b, upper, &u);
    let fact = (x[0] + lower * x[n - 1] / gamma) / (T::one() + z[0] + lower * z[n - 1] / gamma);
    x.iter().zip(z.iter()).map(|(&xi, &zi)| xi - fact * zi).collect()
}

fn thomas<T: Real>(lower: T, diag: &[T], upper: T, rhs: &[T]) -> Vec<T> {
    let n = rhs.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = upper / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower * c[i - 1];
        c[i] = upper / m;
        d[i] = (rhs[i] - lower * d[i - 1]) / m;
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
