//! Fermi function, complete Fermi-Dirac integrals of order -1/2 and 1/2,
//! and bulk charge neutrality.

use std::f64::consts::PI;

use crate::quad::gauss_legendre;
use crate::units::{effective_dos, thermal_2d};

/// Occupation 1/(1 + exp((E - mu)/kT)), stable for any argument.
pub fn fermi(mu: f64, energy: f64, kt: f64) -> f64 {
    let x = (energy - mu) / kt;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Order {
    MinusHalf,
    Half,
}

const GL_POINTS: usize = 10;

fn series(order: Order, x: f64) -> f64 {
    let p = match order {
        Order::MinusHalf => 0.5,
        Order::Half => 1.5,
    };
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (kf * x).exp() / kf.powf(p);
        sum += sign * term;
        if term < 1e-18 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    sum
}

/// Integral over u in [a, b] of u^power / (exp(u^2 - x) + 1).
fn panel_sum(x: f64, power: i32, edges: &[f64], nodes: &[f64], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut s = 0.0;
        for (t, wt) in nodes.iter().zip(weights) {
            let u = c + h * t;
            let arg = u * u - x;
            let occ = if arg > 0.0 {
                let e = (-arg).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + arg.exp())
            };
            s += wt * u.powi(power) * occ;
        }
        total += h * s;
    }
    total
}

fn quadrature(order: Order, x: f64) -> f64 {
    thread_local! {
        static RULE: (Vec<f64>, Vec<f64>) = gauss_legendre(GL_POINTS);
    }
    let u0 = x.max(0.0).sqrt();
    let u_max = (x.max(0.0) + 64.0).sqrt();
    // fine panels where the occupation drops, coarse ones elsewhere
    let fine = 0.5 / (2.0 * u0 + 1.0);
    let lo = (u0 - 24.0 * fine).max(0.0);
    let hi = (u0 + 24.0 * fine).min(u_max);
    let mut edges = Vec::new();
    let mut push_range = |a: f64, b: f64, h: f64| {
        if b <= a {
            return;
        }
        let n = ((b - a) / h).ceil().max(1.0) as usize;
        for k in 0..n {
            edges.push(a + (b - a) * k as f64 / n as f64);
        }
    };
    push_range(0.0, lo, 0.5);
    push_range(lo, hi, fine);
    push_range(hi, u_max, 0.5);
    edges.push(u_max);
    RULE.with(|(nodes, weights)| match order {
        Order::MinusHalf => 2.0 / PI.sqrt() * panel_sum(x, 0, &edges, nodes, weights),
        Order::Half => 4.0 / PI.sqrt() * panel_sum(x, 2, &edges, nodes, weights),
    })
}

fn fd(order: Order, x: f64) -> f64 {
    if x < -1.0 {
        series(order, x)
    } else {
        quadrature(order, x)
    }
}

/// Normalized Fermi-Dirac integral of order -1/2.
pub fn fd_half_neg(x: f64) -> f64 {
    fd(Order::MinusHalf, x)
}

/// Normalized Fermi-Dirac integral of order 1/2.
pub fn fd_half(x: f64) -> f64 {
    fd(Order::Half, x)
}

/// Solves fd_half(x) = y for y > 0.
pub fn fd_half_inverse(y: f64) -> f64 {
    assert!(y > 0.0, "fd_half_inverse needs a positive argument");
    let mut x = if y < 1.0 { y.ln() } else { (0.75 * PI.sqrt() * y).powf(2.0 / 3.0) };
    for _ in 0..60 {
        let f = fd_half(x);
        let step = (f.ln() - y.ln()) * f / fd_half_neg(x);
        x -= step.clamp(-5.0, 5.0);
        if step.abs() < 1e-13 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Electron occupation summed over the free transverse direction, nm^-1.
pub fn transverse_electrons(mu: f64, energy: f64, mass: f64, kt: f64) -> f64 {
    thermal_2d(mass, kt).sqrt() * fd_half_neg((mu - energy) / kt)
}

/// Hole occupation summed over the free transverse direction, nm^-1.
pub fn transverse_holes(mu: f64, energy: f64, mass: f64, kt: f64) -> f64 {
    thermal_2d(mass, kt).sqrt() * fd_half_neg((energy - mu) / kt)
}

/// Parabolic-band bulk material at temperature kT.
#[derive(Clone, Copy, Debug)]
pub struct BulkBands {
    pub bandgap: f64,
    pub electron_mass: f64,
    pub hole_mass: f64,
    pub kt: f64,
}

impl BulkBands {
    /// Electron density in cm^-3 with the Fermi level `delta` eV below Ec.
    pub fn electrons(&self, delta: f64) -> f64 {
        effective_dos(self.electron_mass, self.kt) * fd_half(-delta / self.kt)
    }

    /// Hole density in cm^-3 with the Fermi level `delta` eV below Ec.
    pub fn holes(&self, delta: f64) -> f64 {
        effective_dos(self.hole_mass, self.kt) * fd_half((delta - self.bandgap) / self.kt)
    }

    /// Ec - mu (eV) at which the bulk is neutral for net doping `net` (cm^-3).
    pub fn neutral_offset(&self, net: f64) -> f64 {
        let g = |d: f64| self.electrons(d) - self.holes(d) - net;
        let (mut lo, mut hi) = (-1.0, self.bandgap + 1.0);
        while g(lo) < 0.0 {
            lo -= 1.0;
        }
        while g(hi) > 0.0 {
            hi += 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn intrinsic_density(&self) -> f64 {
        (effective_dos(self.electron_mass, self.kt) * effective_dos(self.hole_mass, self.kt)).sqrt()
            * (-self.bandgap / (2.0 * self.kt)).exp()
    }

    /// dn/dV and -dp/dV (cm^-3 per volt) of bulk carriers reproducing the given
    /// densities, with Ec = -chi - V.
    pub fn response(&self, n: f64, p: f64) -> (f64, f64) {
        let nc = effective_dos(self.electron_mass, self.kt);
        let nv = effective_dos(self.hole_mass, self.kt);
        let dn = if n > 0.0 { nc * fd_half_neg(fd_half_inverse(n / nc)) / self.kt } else { 0.0 };
        let dp = if p > 0.0 { nv * fd_half_neg(fd_half_inverse(p / nv)) / self.kt } else { 0.0 };
        (dn, dp)
    }
}
