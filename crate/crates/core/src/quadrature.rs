//! Small numerical helpers: fixed-order Gauss-Legendre rules and
//! golden-section search.

use crate::scalar::Real;

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre8<T: Real>(a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut acc = T::zero();
    for (&x, &w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        let dx = half * T::lit(x);
        acc = acc + T::lit(w) * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximises a unimodal `f` on `[lo, hi]`; returns `(argmax, max)`.
pub fn golden_section_max<T: Real>(
    mut lo: T,
    mut hi: T,
    tol: T,
    mut f: impl FnMut(T) -> T,
) -> (T, T) {
    let r = T::lit(INV_PHI);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut guard = 0;
    while hi - lo > tol && guard < 300 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
        guard += 1;
    }
    let (mut best_x, mut best_f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl8_integrates_degree_15_exactly() {
        let v = gauss_legendre8(0.0f64, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(-3.0f64, 5.0, 1e-12, |x| -(x - 1.3).powi(2) + 2.0);
        assert!((x - 1.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-13);
    }
}
