//! `ℓ_p` norms and the extremal vectors of Hölder's inequality.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::exponents::ExtendedExponent;
use crate::rng;
use crate::tensors::Field;

/// An exponent and its conjugate as floats, precomputed for inner loops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PNorm {
    pub p: f64,
    pub dual: f64,
}

impl PNorm {
    pub fn new(p: &ExtendedExponent) -> Self {
        PNorm { p: p.to_f64(), dual: p.conjugate().to_f64() }
    }

    /// The same pair with the roles of `p` and `p*` exchanged.
    pub fn conjugate(self) -> Self {
        PNorm { p: self.dual, dual: self.p }
    }

    pub fn norm(self, v: &[Complex64]) -> f64 {
        norm_of_moduli(v.iter().map(|z| z.norm()), self.p)
    }

    pub fn dual_norm(self, v: &[Complex64]) -> f64 {
        norm_of_moduli(v.iter().map(|z| z.norm()), self.dual)
    }
}

impl From<&ExtendedExponent> for PNorm {
    fn from(p: &ExtendedExponent) -> Self {
        PNorm::new(p)
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// `ℓ_p` norm of a sequence of moduli, scaled by the largest modulus so large
/// exponents neither overflow nor underflow.
pub(crate) fn norm_of_moduli(moduli: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    let top = moduli.clone().fold(0.0_f64, f64::max);
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    if p == 1.0 {
        return compensated_sum(moduli);
    }
    let s = if p == 2.0 {
        compensated_sum(moduli.map(|a| (a / top) * (a / top)))
    } else {
        compensated_sum(moduli.map(|a| (a / top).powf(p)))
    };
    top * s.powf(1.0 / p)
}

/// `(Σ|v_j|^p)^{1/p}`, or `max_j |v_j|` for `p = ∞`.
pub fn lp_norm(v: &[Complex64], p: &ExtendedExponent) -> f64 {
    PNorm::new(p).norm(v)
}

pub fn lp_norm_real(v: &[f64], p: f64) -> f64 {
    norm_of_moduli(v.iter().map(|x| x.abs()), p)
}

/// Unit vector attaining Hölder's inequality against a coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityMaximizer {
    pub x: Vec<Complex64>,
    /// `Σ_j c_j x_j`, which equals `‖c‖_{p*}`.
    pub value: f64,
}

/// The `x` with `‖x‖_p = 1` maximizing `Re Σ_j c_j x_j`; the pairing then equals `‖c‖_{p*}`.
///
/// Coordinates where `c_j = 0` get weight zero. For `p = 1` the mass goes to the
/// lowest index attaining `max_j |c_j|`. An all-zero `c` returns `e_1` with value 0.
pub fn duality_maximizer(c: &[Complex64], p: &ExtendedExponent) -> DualityMaximizer {
    duality_maximizer_with(c, PNorm::new(p))
}

pub fn duality_maximizer_with(c: &[Complex64], p: PNorm) -> DualityMaximizer {
    let n = c.len();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let top = c.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if top == 0.0 {
        if n > 0 {
            x[0] = Complex64::new(1.0, 0.0);
        }
        return DualityMaximizer { x, value: 0.0 };
    }
    let phase = |z: Complex64| {
        let r = z.norm();
        Complex64::new(z.re / r, -z.im / r)
    };
    if p.p == 1.0 {
        let j0 = c.iter().position(|z| z.norm() == top).expect("maximum is attained");
        x[j0] = phase(c[j0]);
        return DualityMaximizer { x, value: top };
    }
    let value = p.dual_norm(c);
    if p.p.is_infinite() {
        for (xj, cj) in x.iter_mut().zip(c) {
            if cj.norm() > 0.0 {
                *xj = phase(*cj);
            }
        }
    } else {
        let expo = p.dual - 1.0;
        for (xj, cj) in x.iter_mut().zip(c) {
            let r = cj.norm();
            if r > 0.0 {
                *xj = phase(*cj) * (r / value).powf(expo);
            }
        }
    }
    DualityMaximizer { x, value }
}

/// A point on the unit sphere of `ℓ_p^n`: a Gaussian direction (real or complex
/// according to `field`) rescaled to `ℓ_p` norm one.
pub fn ball_sample(n: usize, p: &ExtendedExponent, field: Field, seed: u64) -> Vec<Complex64> {
    let mut rng = rng::generator(seed);
    let pn = PNorm::new(p);
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = match field {
                    Field::Real => 0.0,
                    Field::Complex => StandardNormal.sample(&mut rng),
                };
                Complex64::new(re, im)
            })
            .collect();
        let norm = pn.norm(&v);
        if norm > 0.0 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// `(1, …, 1) / n^{1/p}`.
pub fn uniform_unit(n: usize, p: &ExtendedExponent) -> Vec<Complex64> {
    let scale = 1.0 / PNorm::new(p).norm(&vec![Complex64::new(1.0, 0.0); n]);
    vec![Complex64::new(scale, 0.0); n]
}

pub fn basis_vector(n: usize, j: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[j] = Complex64::new(1.0, 0.0);
    e
}
