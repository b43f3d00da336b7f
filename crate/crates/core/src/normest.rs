//! Operator norms `‖A‖ = sup |A(x_1, …, x_m)|` over products of unit balls.
//!
//! Alternating ascent only certifies lower bounds. Exact values come from the
//! vertex oracle (sign tensors whose slots are all `ℓ_1`/`ℓ_∞` except one) and
//! the singular-value oracle (`ℓ_2 × ℓ_2`). Every [`NormEstimate`] carries its
//! method tag.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::exponents::{ExtendedExponent, Real};
use crate::lp_geometry::{self, basis_vector, duality_maximizer_with, lp_norm_real, uniform_unit, PNorm};
use crate::rng;
use crate::tensors::{Field, FormInstance, DomainSpec};

/// Default cap on vertex configurations enumerated by [`exact_vertex_norm`].
pub const DEFAULT_VERTEX_LIMIT: u64 = 1 << 24;

/// Slots up to this dimension get one basis-vector start per coordinate.
pub const STRUCTURED_START_MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Alternating,
    VertexExact,
    SingularValue,
    BasisCertificate,
}

impl Method {
    pub fn is_exact(self) -> bool {
        matches!(self, Method::VertexExact | Method::SingularValue)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// `|A(witness)|`, a certified lower bound for `‖A‖`.
    pub lower: f64,
    pub witness: Vec<Vec<Complex64>>,
    pub upper: Option<f64>,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
}

impl NormEstimate {
    /// The upper bound when exact, otherwise the lower bound.
    pub fn value(&self) -> f64 {
        self.upper.unwrap_or(self.lower)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentSettings {
    /// Stop once a full cycle improves the objective by less than `tol · value`.
    pub tol: f64,
    /// Maximum number of full cycles.
    pub max_iter: usize,
}

impl Default for AscentSettings {
    fn default() -> Self {
        AscentSettings { tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    /// Random starts, in addition to the structured ones.
    pub starts: usize,
    pub seed: u64,
    pub ascent: AscentSettings,
    pub vertex_limit: u64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings { starts: 16, seed: 0, ascent: AscentSettings::default(), vertex_limit: DEFAULT_VERTEX_LIMIT }
    }
}

fn norms_of(f: &FormInstance) -> Vec<PNorm> {
    (0..f.order()).map(|k| PNorm::new(f.exponent(k))).collect()
}

fn finish(f: &FormInstance, witness: Vec<Vec<Complex64>>, upper: Option<f64>, method: Method, iterations: usize, converged: bool) -> NormEstimate {
    let lower = f.evaluate(&witness).expect("witness shape matches form").norm();
    let upper = upper.map(|u| u.max(lower));
    NormEstimate { lower, witness, upper, method, iterations, converged }
}

/// Cyclic exact maximization over one slot at a time.
///
/// The objective `|A(x_1, …, x_m)|` never decreases; a slot update is only
/// accepted when it strictly improves the value.
pub fn alternating_ascent(f: &FormInstance, start: &[Vec<Complex64>], settings: AscentSettings) -> Result<NormEstimate> {
    alternating_ascent_traced(f, start, settings, &mut Vec::new())
}

/// As [`alternating_ascent`], pushing the objective after every slot update onto `trace`.
pub fn alternating_ascent_traced(
    f: &FormInstance,
    start: &[Vec<Complex64>],
    settings: AscentSettings,
    trace: &mut Vec<f64>,
) -> Result<NormEstimate> {
    if !(settings.tol > 0.0) || settings.max_iter == 0 {
        return argument("ascent needs tol > 0 and max_iter >= 1");
    }
    let norms = norms_of(f);
    if start.len() != f.order() {
        return argument(format!("start has {} vectors, form has {} slots", start.len(), f.order()));
    }
    for (k, (x, &n)) in start.iter().zip(f.dims()).enumerate() {
        if x.len() != n {
            return argument(format!("start vector {k} has length {}, expected {n}", x.len()));
        }
        let norm = norms[k].norm(x);
        if (norm - 1.0).abs() > 1e-8 {
            return argument(format!("start vector {k} has norm {norm}, expected 1"));
        }
    }

    let mut x = start.to_vec();
    let v0 = f.evaluate(&x)?;
    let mut value = v0.norm();
    if value > 0.0 {
        let phase = v0.conj() / value;
        x[0].iter_mut().for_each(|z| *z *= phase);
    }
    trace.push(value);

    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=settings.max_iter {
        iterations = iter;
        let before = value;
        for k in 0..f.order() {
            let c = f.partial_coefficients(&x, k)?;
            let best = duality_maximizer_with(&c, norms[k]);
            if best.value > value {
                x[k] = best.x;
                value = best.value;
            }
            trace.push(value);
        }
        if value - before <= settings.tol * value {
            converged = true;
            break;
        }
    }
    Ok(finish(f, x, None, Method::Alternating, iterations, converged))
}

/// Unit vector per slot: the basis certificate's witness, followed by the structured starts.
fn structured_starts(f: &FormInstance) -> Vec<Vec<Vec<Complex64>>> {
    let ps: Vec<ExtendedExponent> = f.domain().exponents();
    let uniform: Vec<Vec<Complex64>> = f.dims().iter().zip(&ps).map(|(&n, p)| uniform_unit(n, p)).collect();
    let mut starts = vec![basis_certificate(f).witness, uniform.clone()];
    for (k, &n) in f.dims().iter().enumerate() {
        if n <= STRUCTURED_START_MAX_DIM {
            for j in 0..n {
                let mut s = uniform.clone();
                s[k] = basis_vector(n, j);
                starts.push(s);
            }
        }
    }
    starts
}

fn random_start(f: &FormInstance, seed: u64) -> Vec<Vec<Complex64>> {
    f.dims()
        .iter()
        .enumerate()
        .map(|(k, &n)| lp_geometry::ball_sample(n, f.exponent(k), f.field(), rng::split_seed(seed, k as u64)))
        .collect()
}

/// Best of the structured starts and `settings.starts` random starts.
///
/// Starts run in parallel; the reducer keeps the first start attaining the
/// maximum, so the result is independent of scheduling.
pub fn multi_start_estimate(f: &FormInstance, settings: &EstimatorSettings) -> NormEstimate {
    let mut starts = structured_starts(f);
    starts.extend((0..settings.starts as u64).map(|i| random_start(f, rng::split_seed(settings.seed, i))));
    let runs: Vec<NormEstimate> = starts
        .par_iter()
        .map(|s| alternating_ascent(f, s, settings.ascent).expect("starts are unit vectors of the right shape"))
        .collect();
    runs.into_iter()
        .reduce(|best, r| if r.lower > best.lower { r } else { best })
        .expect("at least one start")
}

fn is_vertex_slot(p: &ExtendedExponent) -> bool {
    p.is_infinite() || *p == ExtendedExponent::one()
}

/// Exact norm of a sign tensor when every slot but at most one is `ℓ_∞` or `ℓ_1`.
///
/// A multilinear form attains its maximum over a product of balls at extreme
/// points, so those slots range over `±1` vectors (`ℓ_∞`) or `±e_j` (`ℓ_1`),
/// one sign per slot fixed by symmetry; the free slot is solved by the
/// duality maximizer.
pub fn exact_vertex_norm(f: &FormInstance, limit: u64) -> Result<NormEstimate> {
    if f.field() != Field::Real {
        return Err(Error::Capability("vertex oracle requires real signs".into()));
    }
    let m = f.order();
    let others: Vec<usize> = (0..m).filter(|&k| !is_vertex_slot(f.exponent(k))).collect();
    let free = match others.as_slice() {
        [] => m - 1,
        [k] => *k,
        _ => {
            return Err(Error::Capability(format!(
                "vertex oracle needs all but one slot in l_1 or l_inf, slots {others:?} are not"
            )))
        }
    };
    let enumerated: Vec<usize> = (0..m).filter(|&k| k != free).collect();
    let mut count: u64 = 1;
    for &k in &enumerated {
        let n = f.dims()[k] as u32;
        let choices = if f.exponent(k).is_infinite() { 1u64.checked_shl(n - 1).filter(|_| n <= 64) } else { Some(u64::from(n)) };
        count = choices.and_then(|c| count.checked_mul(c)).filter(|&c| c <= limit).ok_or_else(|| {
            Error::Capability(format!("vertex enumeration exceeds the limit of {limit} configurations"))
        })?;
    }

    let free_norm = PNorm::new(f.exponent(free));
    let tensor = f.tensor();
    let (best_value, best_vertices) = if let [l] = enumerated.as_slice() {
        single_slot_vertex_search(f, *l, free_norm)
    } else {
        let mut best = (-1.0, Vec::new());
        let mut vertices: Vec<Vec<f64>> = enumerated.iter().map(|&k| first_vertex(f.dims()[k], f.exponent(k).is_infinite())).collect();
        loop {
            let mut slots: Vec<Option<&[f64]>> = vec![None; m];
            for (v, &k) in vertices.iter().zip(&enumerated) {
                slots[k] = Some(v.as_slice());
            }
            let c = tensor.contract_real(&slots).expect("real tensor");
            let value = lp_norm_real(&c, free_norm.dual);
            if value > best.0 {
                best = (value, vertices.clone());
            }
            if !advance_vertices(f, &enumerated, &mut vertices) {
                break;
            }
        }
        best
    };

    let mut witness: Vec<Vec<Complex64>> = vec![Vec::new(); m];
    for (v, &k) in best_vertices.iter().zip(&enumerated) {
        witness[k] = v.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    }
    let c = f.partial_coefficients(&witness, free)?;
    witness[free] = duality_maximizer_with(&c, free_norm).x;
    Ok(finish(f, witness, Some(best_value), Method::VertexExact, count as usize, true))
}

fn first_vertex(n: usize, infinite: bool) -> Vec<f64> {
    if infinite {
        vec![1.0; n]
    } else {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        v
    }
}

/// Odometer over vertex classes. `ℓ_∞` slots count in binary over the signs of
/// coordinates `1..n` (coordinate 0 stays `+1`); `ℓ_1` slots walk `e_0 … e_{n−1}`.
fn advance_vertices(f: &FormInstance, enumerated: &[usize], vertices: &mut [Vec<f64>]) -> bool {
    for (v, &k) in vertices.iter_mut().zip(enumerated).rev() {
        if f.exponent(k).is_infinite() {
            for s in v.iter_mut().skip(1) {
                if *s == 1.0 {
                    *s = -1.0;
                    return true;
                }
                *s = 1.0;
            }
        } else {
            let j = v.iter().position(|&s| s != 0.0).expect("basis vertex");
            v[j] = 0.0;
            if j + 1 < v.len() {
                v[j + 1] = 1.0;
                return true;
            }
            v[0] = 1.0;
        }
    }
    false
}

/// One enumerated slot `l`: the free coefficients are `c = Σ_i s_i R_i` with
/// `R_i` the fiber at `e_i`. `ℓ_∞` slots walk a Gray code so each step is one row update.
fn single_slot_vertex_search(f: &FormInstance, l: usize, free_norm: PNorm) -> (f64, Vec<Vec<f64>>) {
    let n = f.dims()[l];
    let tensor = f.tensor();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let mut slots: Vec<Option<&[f64]>> = vec![None; f.order()];
            slots[l] = Some(e.as_slice());
            tensor.contract_real(&slots).expect("real tensor")
        })
        .collect();
    if !f.exponent(l).is_infinite() {
        let (j, value) = rows
            .iter()
            .map(|r| lp_norm_real(r, free_norm.dual))
            .enumerate()
            .fold((0, -1.0), |best, (j, v)| if v > best.1 { (j, v) } else { best });
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        return (value, vec![e]);
    }
    let width = rows[0].len();
    let mut signs = vec![1.0; n];
    let mut c: Vec<f64> = (0..width).map(|t| rows.iter().map(|r| r[t]).sum()).collect();
    let mut best = (lp_norm_real(&c, free_norm.dual), signs.clone());
    for g in 1u64..(1u64 << (n - 1)) {
        let i = g.trailing_zeros() as usize + 1;
        let s = signs[i];
        for (ct, rt) in c.iter_mut().zip(&rows[i]) {
            *ct -= 2.0 * s * rt;
        }
        signs[i] = -s;
        let value = lp_norm_real(&c, free_norm.dual);
        if value > best.0 {
            best = (value, signs.clone());
        }
    }
    (best.0, vec![best.1])
}

/// Largest singular value for `ℓ_2 × ℓ_2` bilinear forms, by power iteration on `M^*M`.
pub fn bilinear_l2_norm(f: &FormInstance, seed: u64) -> Result<NormEstimate> {
    let two = ExtendedExponent::two();
    if f.order() != 2 || *f.exponent(0) != two || *f.exponent(1) != two {
        return argument("singular-value oracle needs a bilinear form on l_2 x l_2");
    }
    let (rows, cols) = (f.dims()[0], f.dims()[1]);
    let a = f.tensor().to_complex();
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        (0..rows).map(|i| a[i * cols..(i + 1) * cols].iter().zip(v).map(|(x, y)| x * y).sum()).collect()
    };
    let apply_adjoint = |u: &[Complex64]| -> Vec<Complex64> {
        let mut w = vec![Complex64::new(0.0, 0.0); cols];
        for (i, ui) in u.iter().enumerate() {
            for (wj, aij) in w.iter_mut().zip(&a[i * cols..(i + 1) * cols]) {
                *wj += aij.conj() * ui;
            }
        }
        w
    };
    let l2 = |v: &[Complex64]| lp_geometry::lp_norm(v, &two);

    let mut v = lp_geometry::ball_sample(cols, &two, f.field(), seed);
    let mut sigma = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    for iter in 1..=10_000 {
        iterations = iter;
        let u = apply(&v);
        let next_sigma = l2(&u);
        let w = apply_adjoint(&u);
        let wn = l2(&w);
        let settled = wn == 0.0 || (next_sigma - sigma).abs() <= 1e-10 * next_sigma;
        sigma = next_sigma;
        if wn > 0.0 {
            v = w.into_iter().map(|z| z / wn).collect();
        }
        if settled {
            converged = true;
            break;
        }
    }
    let u = apply(&v);
    let un = l2(&u);
    let x = if un > 0.0 { u.iter().map(|z| z.conj() / un).collect() } else { basis_vector(rows, 0) };
    let mut est = finish(f, vec![x, v], None, Method::SingularValue, iterations, converged);
    est.upper = Some(est.lower);
    Ok(est)
}

/// Basis-vector certificate as an estimate: the best fiber norm with its witness.
///
/// For each slot `k` and each choice of basis vectors in the other slots, the
/// fiber of coefficients along `k` has `ℓ_{p_k*}` norm at most `‖A‖`.
pub fn basis_certificate(f: &FormInstance) -> NormEstimate {
    let dims = f.dims();
    let m = f.order();
    let entries = f.tensor().to_complex();
    let mut best: Option<(f64, usize, usize, usize)> = None; // (value, slot, outer, inner)
    for k in 0..m {
        let n = dims[k];
        let outer: usize = dims[..k].iter().product();
        let inner: usize = dims[k + 1..].iter().product();
        let pn = PNorm::new(f.exponent(k));
        let mut fiber = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for t in 0..inner {
                for (j, z) in fiber.iter_mut().enumerate() {
                    *z = entries[(o * n + j) * inner + t];
                }
                let value = pn.dual_norm(&fiber);
                if best.map_or(true, |b| value > b.0) {
                    best = Some((value, k, o, t));
                }
            }
        }
    }
    let (_, k, o, t) = best.expect("forms have at least one slot");
    let mut witness = Vec::with_capacity(m);
    // Decode the outer/inner offsets back into basis indices for the other slots.
    let mut outer_idx = vec![0; k];
    let mut rem = o;
    for l in (0..k).rev() {
        outer_idx[l] = rem % dims[l];
        rem /= dims[l];
    }
    let mut inner_idx = vec![0; m - k - 1];
    let mut rem = t;
    for l in (0..m - k - 1).rev() {
        inner_idx[l] = rem % dims[k + 1 + l];
        rem /= dims[k + 1 + l];
    }
    for l in 0..m {
        if l < k {
            witness.push(basis_vector(dims[l], outer_idx[l]));
        } else if l > k {
            witness.push(basis_vector(dims[l], inner_idx[l - k - 1]));
        } else {
            witness.push(Vec::new());
        }
    }
    let c = f.partial_coefficients(&witness, k).expect("shapes match");
    witness[k] = duality_maximizer_with(&c, PNorm::new(f.exponent(k))).x;
    finish(f, witness, None, Method::BasisCertificate, 1, true)
}

/// `max_k sup_{basis indices} ‖fiber‖_{p_k*}`, a lower bound for `‖A‖`.
pub fn basis_lower_bound(f: &FormInstance) -> f64 {
    basis_certificate(f).lower
}

/// Multi-start estimate of the `(m−1)`-linear form obtained by fixing slot `k`
/// at `e_1`. The witness is padded back with `e_1` so it certifies the full form.
pub fn restriction_estimate(f: &FormInstance, k: usize, settings: &EstimatorSettings) -> Result<NormEstimate> {
    if f.order() < 2 {
        return argument("restriction needs a form with at least two slots");
    }
    let frozen = f.freeze_at_basis(k, 0)?;
    let est = multi_start_estimate(&frozen, settings);
    let mut witness = est.witness;
    witness.insert(k, basis_vector(f.dims()[k], 0));
    Ok(finish(f, witness, None, est.method, est.iterations, est.converged))
}

pub fn restriction_lower_bound(f: &FormInstance, k: usize, settings: &EstimatorSettings) -> Result<f64> {
    Ok(restriction_estimate(f, k, settings)?.lower)
}

/// `(Σ n_k)^{1/ρ} · ∏ n_k^{max{1/2 − 1/p_k, 0}}`, the upper estimate with its constant `C(m)` dropped.
pub fn theorem1_upper_value(domain: &DomainSpec) -> f64 {
    let ps = domain.exponents();
    let inv_rho = crate::exponents::rho(&ps).expect("domains are nonempty").reciprocal().to_f64();
    let total: usize = domain.dims().iter().sum();
    let product: f64 = domain
        .factors()
        .iter()
        .map(|fac| {
            let e = (&Real::half() - &fac.p.reciprocal()).max(Real::zero()).to_f64();
            (fac.n as f64).powf(e)
        })
        .product();
    (total as f64).powf(inv_rho) * product
}

/// Norm engine selection for [`estimate_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    /// Strongest applicable oracle, falling back to multi-start ascent.
    Auto,
    Alternating,
    Vertex,
    SingularValue,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "alternating" => Ok(MethodChoice::Alternating),
            "vertex" => Ok(MethodChoice::Vertex),
            "sv" => Ok(MethodChoice::SingularValue),
            _ => argument(format!("unknown method '{s}' (expected auto, alternating, vertex, sv)")),
        }
    }
}

pub fn estimate_norm(f: &FormInstance, choice: MethodChoice, settings: &EstimatorSettings) -> Result<NormEstimate> {
    match choice {
        MethodChoice::Alternating => Ok(multi_start_estimate(f, settings)),
        MethodChoice::Vertex => exact_vertex_norm(f, settings.vertex_limit),
        MethodChoice::SingularValue => bilinear_l2_norm(f, settings.seed),
        MethodChoice::Auto => {
            if let Ok(est) = bilinear_l2_norm(f, settings.seed) {
                return Ok(est);
            }
            match exact_vertex_norm(f, settings.vertex_limit) {
                Ok(est) => Ok(est),
                Err(Error::Capability(_)) => Ok(multi_start_estimate(f, settings)),
                Err(e) => Err(e),
            }
        }
    }
}
