//! Trapezoid quadrature on sampled data.

use std::ops::{Add, Mul};

/// Trapezoid rule on an arbitrary ascending grid.
pub fn trapezoid<T>(xs: &[f64], ys: &[T]) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    assert_eq!(xs.len(), ys.len());
    let mut acc = T::default();
    for k in 1..xs.len() {
        acc = acc + (ys[k] + ys[k - 1]) * (0.5 * (xs[k] - xs[k - 1]));
    }
    acc
}

/// Trapezoid rule with uniform spacing `h`.
pub fn trapezoid_uniform<T>(h: f64, ys: &[T]) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default,
{
    match ys.len() {
        0 | 1 => T::default(),
        n => {
            let inner = ys[1..n - 1].iter().fold(T::default(), |a, &y| a + y);
            (inner + (ys[0] + ys[n - 1]) * 0.5) * h
        }
    }
}

/// Uniform trapezoid on the full grid and on every second point; returns
/// `(fine, |fine − coarse|)`. The grid must have an odd number of points.
pub fn trapezoid_with_check<T>(h: f64, ys: &[T]) -> (T, T)
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T> + Default + std::ops::Sub<Output = T>,
{
    let fine = trapezoid_uniform(h, ys);
    let coarse: Vec<T> = ys.iter().step_by(2).copied().collect();
    let coarse = trapezoid_uniform(2.0 * h, &coarse);
    (fine, fine - coarse)
}

/// `∫ f` over `[a, b]` with `n` uniform panels.
pub fn integrate_fn<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let ys: Vec<f64> = (0..=n).map(|k| f(a + h * k as f64)).collect();
    trapezoid_uniform(h, &ys)
}
