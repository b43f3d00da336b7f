//! Test-only oracles, independent of the alternating ascent.

#![allow(dead_code)]

use num_complex::Complex64;
use unimod_core::lp_geometry::lp_norm_real;
use unimod_core::{ExtendedExponent, FormInstance};

/// Real 2×… bilinear norm by brute force over slot 0.
///
/// Directions come from a Fibonacci lattice of `points` points on the unit
/// 2-sphere (slot 0 must have dimension 3), are rescaled onto the `ℓ_{p0}`
/// sphere, and the inner supremum over slot 1 is the `ℓ_{p1*}` norm of
/// `Mᵀx`. The best lattice points are then polished by a compass search in
/// spherical coordinates.
pub fn grid_bilinear_norm(f: &FormInstance, points: usize) -> f64 {
    assert_eq!(f.order(), 2);
    assert_eq!(f.dims()[0], 3, "grid oracle discretizes the 2-sphere");
    let cols = f.dims()[1];
    let m: Vec<f64> = f.tensor().to_complex().iter().map(|z| z.re).collect();
    let p0 = f.exponent(0).to_f64();
    let q1 = f.exponent(1).conjugate().to_f64();
    let objective = |theta: f64, phi: f64| -> f64 {
        let dir = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let scale = lp_norm_real(&dir, p0);
        let x: Vec<f64> = dir.iter().map(|d| d / scale).collect();
        let y: Vec<f64> = (0..cols).map(|j| (0..3).map(|i| m[i * cols + j] * x[i]).sum()).collect();
        lp_norm_real(&y, q1)
    };

    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut scored: Vec<(f64, f64, f64)> = (0..points)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / points as f64;
            let theta = z.acos();
            let phi = golden * i as f64;
            (objective(theta, phi), theta, phi)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best = scored[0].0;
    for &(mut value, mut theta, mut phi) in scored.iter().take(8) {
        let mut step = 0.05;
        while step > 1e-12 {
            let mut moved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = objective(theta + dt, phi + dp);
                if v > value {
                    value = v;
                    theta += dt;
                    phi += dp;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.max(value);
    }
    best
}

pub fn p(s: &str) -> ExtendedExponent {
    s.parse().unwrap()
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
