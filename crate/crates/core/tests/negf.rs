use std::f64::consts::PI;

use proptest::prelude::*;

use tfet_negf::device::Mesh2D;
use tfet_negf::hamiltonian::DeviceHamiltonian;
use tfet_negf::negf::dense::dense_greens;
use tfet_negf::negf::{recursive_greens, truncated_spectral, OpenSystem, Want};

/// Bumpy potential and mass on a small strip; leads see flat columns.
fn bumpy(nx: usize, ny: usize, seed: u64) -> DeviceHamiltonian {
    let mesh = Mesh2D::new(nx, ny, 0.5, 0.5).unwrap();
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut u = vec![0.0; mesh.len()];
    let mut m = vec![0.2; mesh.len()];
    for p in 0..mesh.len() {
        let (i, _) = mesh.ij(p);
        if i > 0 && i < nx {
            u[p] = 0.4 * next() - 0.1;
            m[p] = 0.15 + 0.2 * next();
        }
    }
    DeviceHamiltonian::from_slices(mesh, &u, &m).unwrap()
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

#[test]
fn recursive_matches_dense_inverse() {
    let h = bumpy(12, 4, 7);
    for e in [0.05, 0.3, 0.9, 1.7] {
        let sys = OpenSystem::new(&h, e, 1e-6).unwrap();
        let dense = dense_greens(&sys).unwrap();
        let rgf = recursive_greens(&sys, Want::ALL).unwrap();
        let t = dense.transmission(&sys);
        assert!(rel(rgf.transmission(&sys), t, 1e-12) < 1e-9, "E = {e}");
        let (a1, a2) = dense.ldos(&sys);
        let (b1, b2) = rgf.ldos(&sys);
        let scale = a1.iter().chain(&a2).copied().fold(0.0, f64::max);
        for (x, y) in a1.iter().zip(&b1).chain(a2.iter().zip(&b2)) {
            assert!((x - y).abs() < 1e-9 * scale, "E = {e}: {x} {y}");
        }
        for (x, y) in dense.spectral_diag().iter().zip(rgf.spectral_diag()) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1e-9), "E = {e}: {x} {y}");
        }
    }
}

#[test]
fn lead_resolved_ldos_sums_to_spectral_function() {
    let h = bumpy(10, 3, 11);
    let eta = 1e-7;
    let norm = 1.0 / (PI * h.mesh.ax * h.mesh.ay);
    for e in [0.8, 1.5] {
        let sys = OpenSystem::new(&h, e, eta).unwrap();
        assert!(sys.source.propagating() > 0 && sys.drain.propagating() > 0);
        let g = recursive_greens(&sys, Want::ALL).unwrap();
        let (d1, d2) = g.ldos(&sys);
        let a = g.spectral_diag();
        let scale = a.iter().copied().fold(0.0, f64::max) * norm;
        for k in 0..a.len() {
            // the broadening inside the device adds 2 eta G G^dagger
            assert!((d1[k] + d2[k] - a[k] * norm).abs() < 1e-4 * scale, "E = {e}, node {k}");
        }
    }
}

#[test]
fn full_rank_truncation_is_exact() {
    let h = bumpy(19, 4, 3);
    assert_eq!(h.mesh.cols() * h.mesh.rows(), 100);
    for e in [0.1, 0.6, 1.4] {
        let sys = OpenSystem::new(&h, e, 1e-6).unwrap();
        let dense = dense_greens(&sys).unwrap();
        let full = truncated_spectral(&sys, h.mesh.rows()).unwrap();
        assert!(rel(full.transmission, dense.transmission(&sys), 1e-12) < 1e-8);
        let (d1, _) = dense.ldos(&sys);
        let scale = d1.iter().copied().fold(0.0, f64::max);
        for (x, y) in full.d1.iter().zip(&d1) {
            assert!((x - y).abs() < 1e-8 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transmission_is_reciprocal_and_bounded(seed in 0u64..1000, e in 0.0f64..2.5) {
        let h = bumpy(8, 2, seed);
        let sys = OpenSystem::new(&h, e, 1e-6).unwrap();
        let g = recursive_greens(&sys, Want::LDOS).unwrap();
        let t = g.transmission(&sys);
        let open = sys.source.propagating().min(sys.drain.propagating()) as f64;
        // evanescent leads pass a little transmission through the broadening
        prop_assert!(t >= -1e-12 && t <= open + 1e-6, "T = {} with {} open channels", t, open);
        prop_assert!((t - g.transmission_reverse(&sys)).abs() < 1e-9 * t.max(1e-12));
    }
}
