//! Gauss-Legendre rules and small quadrature helpers.

use std::f64::consts::PI;

/// Nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|v| v * h).collect(),
    )
}

/// Uniform trapezoid nodes on [a, b] with spacing at most `h`.
pub fn trapezoid(a: f64, b: f64, h: f64) -> (Vec<f64>, Vec<f64>) {
    if b <= a {
        return (vec![a], vec![0.0]);
    }
    let n = ((b - a) / h).ceil().max(1.0) as usize;
    let dx = (b - a) / n as f64;
    let x: Vec<f64> = (0..=n).map(|k| a + dx * k as f64).collect();
    let mut w = vec![dx; n + 1];
    w[0] *= 0.5;
    w[n] *= 0.5;
    (x, w)
}

/// Rule on [a, b] that absorbs inverse square-root singularities at both ends:
/// x = a + (b - a)(3s^2 - 2s^3) with Gauss-Legendre in s.
pub fn endpoint_graded(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (s, ws) = gauss_legendre_on(n, 0.0, 1.0);
    let len = b - a;
    let x = s.iter().map(|s| a + len * s * s * (3.0 - 2.0 * s)).collect();
    let w = s.iter().zip(&ws).map(|(s, w)| w * 6.0 * len * s * (1.0 - s)).collect();
    (x, w)
}
