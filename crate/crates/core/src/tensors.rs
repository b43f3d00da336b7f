//! Unimodular coefficient tensors and the multilinear forms they define.
//!
//! Storage is dense and row-major with 0-based offsets. The Fourier generator
//! follows the 1-based convention `a_ij = e^{2πi·ij/n}` for `i, j ∈ {1..n}`, so
//! storage offset `(r, s)` holds `e^{2πi·(r+1)(s+1)/n}`.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::ops::{Add, Mul};
use std::path::Path;

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::exponents::ExtendedExponent;
use crate::rng;

/// Tolerance on `| |entry| − 1 |` accepted when loading or constructing tensors.
pub const UNIMODULAR_TOLERANCE: f64 = 1e-9;

/// Scalar field of a tensor. Real-sign forms are optimized over real vectors,
/// complex ones over complex vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Rademacher,
    Steinhaus,
    Fourier,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: GeneratorKind,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    /// Exact signs, each `+1` or `-1`.
    Real(Vec<i8>),
    Complex(Vec<Complex64>),
}

impl Entries {
    fn len(&self) -> usize {
        match self {
            Entries::Real(v) => v.len(),
            Entries::Complex(v) => v.len(),
        }
    }
}

/// Dense `n_1 × ⋯ × n_m` array whose entries all have modulus one.
#[derive(Clone, Debug, PartialEq)]
pub struct UnimodularTensor {
    dims: Vec<usize>,
    entries: Entries,
    provenance: Provenance,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return argument("tensor needs at least one dimension");
    }
    if dims.contains(&0) {
        return argument(format!("zero dimension in {dims:?}"));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Argument(format!("dimensions {dims:?} overflow")))
}

impl UnimodularTensor {
    pub fn from_signs(dims: Vec<usize>, signs: Vec<i8>, provenance: Provenance) -> Result<Self> {
        let len = check_dims(&dims)?;
        if signs.len() != len {
            return argument(format!("expected {len} entries, got {}", signs.len()));
        }
        if let Some(bad) = signs.iter().find(|s| **s != 1 && **s != -1) {
            return argument(format!("real entries must be +1 or -1, got {bad}"));
        }
        Ok(UnimodularTensor { dims, entries: Entries::Real(signs), provenance })
    }

    pub fn from_complex(dims: Vec<usize>, entries: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        let len = check_dims(&dims)?;
        if entries.len() != len {
            return argument(format!("expected {len} entries, got {}", entries.len()));
        }
        if let Some((i, z)) = entries.iter().enumerate().find(|(_, z)| (z.norm() - 1.0).abs() > UNIMODULAR_TOLERANCE) {
            return argument(format!("entry {i} = {z} is not unimodular"));
        }
        Ok(UnimodularTensor { dims, entries: Entries::Complex(entries), provenance })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of slots `m`.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn field(&self) -> Field {
        match self.entries {
            Entries::Real(_) => Field::Real,
            Entries::Complex(_) => Field::Complex,
        }
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn signs(&self) -> Option<&[i8]> {
        match &self.entries {
            Entries::Real(v) => Some(v),
            Entries::Complex(_) => None,
        }
    }

    /// Row-major offset of a 0-based multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| {
            debug_assert!(i < n);
            acc * n + i
        })
    }

    pub fn entry_at(&self, offset: usize) -> Complex64 {
        match &self.entries {
            Entries::Real(v) => Complex64::new(f64::from(v[offset]), 0.0),
            Entries::Complex(v) => v[offset],
        }
    }

    /// Entry at a 0-based multi-index.
    pub fn entry(&self, index: &[usize]) -> Complex64 {
        self.entry_at(self.offset(index))
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.entry_at(i)).collect()
    }

    /// Largest `| |entry| − 1 |`.
    pub fn unimodularity_defect(&self) -> f64 {
        match &self.entries {
            Entries::Real(_) => 0.0,
            Entries::Complex(v) => v.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max),
        }
    }

    /// Leading sub-tensor of shape `new_dims`.
    pub fn restrict(&self, new_dims: &[usize]) -> Result<Self> {
        check_dims(new_dims)?;
        if new_dims.len() != self.dims.len() || new_dims.iter().zip(&self.dims).any(|(a, b)| a > b) {
            return argument(format!("cannot restrict {:?} to {new_dims:?}", self.dims));
        }
        let mut offsets = Vec::with_capacity(new_dims.iter().product());
        for_each_index(new_dims, |idx| offsets.push(self.offset(idx)));
        Ok(self.gather(new_dims.to_vec(), &offsets))
    }

    /// The `(m−1)`-slot tensor obtained by fixing slot `k` at `index`.
    pub fn slice(&self, k: usize, index: usize) -> Result<Self> {
        if self.order() < 2 {
            return argument("cannot slice a tensor with a single slot");
        }
        if k >= self.order() || index >= self.dims[k] {
            return argument(format!("slice ({k}, {index}) out of range for {:?}", self.dims));
        }
        let mut dims = self.dims.clone();
        dims.remove(k);
        let mut offsets = Vec::with_capacity(dims.iter().product());
        let mut full = vec![0; self.order()];
        for_each_index(&dims, |idx| {
            full[..k].copy_from_slice(&idx[..k]);
            full[k] = index;
            full[k + 1..].copy_from_slice(&idx[k..]);
            offsets.push(self.offset(&full));
        });
        Ok(self.gather(dims, &offsets))
    }

    fn gather(&self, dims: Vec<usize>, offsets: &[usize]) -> Self {
        let entries = match &self.entries {
            Entries::Real(v) => Entries::Real(offsets.iter().map(|&o| v[o]).collect()),
            Entries::Complex(v) => Entries::Complex(offsets.iter().map(|&o| v[o]).collect()),
        };
        UnimodularTensor { dims, entries, provenance: self.provenance }
    }

    /// Contracts every slot `k` with `vectors[k]` when it is `Some`; the `None`
    /// slots survive, in order, row-major.
    pub fn contract(&self, vectors: &[Option<&[Complex64]>]) -> Vec<Complex64> {
        match &self.entries {
            Entries::Real(v) => contract_with(v, |s: i8| Complex64::new(f64::from(s), 0.0), &self.dims, vectors),
            Entries::Complex(v) => contract_with(v, |z| z, &self.dims, vectors),
        }
    }

    /// Real version of [`contract`](Self::contract) for sign tensors.
    pub fn contract_real(&self, vectors: &[Option<&[f64]>]) -> Option<Vec<f64>> {
        self.signs().map(|v| contract_with(v, f64::from, &self.dims, vectors))
    }

    /// Serializes to the tensor JSON format, floats with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let dims = self.dims.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let field = match self.field() {
            Field::Real => "real",
            Field::Complex => "complex",
        };
        write!(out, "{{\"dims\":[{dims}],\"field\":\"{field}\",\"entries\":[").unwrap();
        match &self.entries {
            Entries::Real(v) => {
                let body = v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
                out.push_str(&body);
            }
            Entries::Complex(v) => {
                let body = v
                    .iter()
                    .map(|z| format!("[{:.16e},{:.16e}]", z.re, z.im))
                    .collect::<Vec<_>>()
                    .join(",");
                out.push_str(&body);
            }
        }
        out.push_str("],\"provenance\":");
        out.push_str(&serde_json::to_string(&self.provenance).expect("provenance serializes"));
        out.push('}');
        out
    }

    /// Parses the tensor JSON format, rejecting entries whose modulus is off by more than 1e-9.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct TensorFile {
            dims: Vec<usize>,
            field: Field,
            entries: Vec<serde_json::Value>,
            provenance: Option<Provenance>,
        }
        let file: TensorFile = serde_json::from_str(text)?;
        let provenance = file.provenance.unwrap_or(Provenance { kind: GeneratorKind::File, seed: None });
        match file.field {
            Field::Real => {
                let signs = file
                    .entries
                    .iter()
                    .map(|v| match v.as_f64() {
                        Some(x) if x == 1.0 => Ok(1),
                        Some(x) if x == -1.0 => Ok(-1),
                        _ => Err(Error::Schema(format!("real entry {v} is not +1 or -1"))),
                    })
                    .collect::<Result<Vec<i8>>>()?;
                Self::from_signs(file.dims, signs, provenance)
            }
            Field::Complex => {
                let entries = file
                    .entries
                    .iter()
                    .map(|v| {
                        let pair = v.as_array().filter(|a| a.len() == 2);
                        match pair.map(|a| (a[0].as_f64(), a[1].as_f64())) {
                            Some((Some(re), Some(im))) => Ok(Complex64::new(re, im)),
                            _ => Err(Error::Schema(format!("complex entry {v} is not a [re, im] pair"))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::from_complex(file.dims, entries, provenance)
            }
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// Visits every 0-based multi-index of `dims` in row-major order.
pub(crate) fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.iter().any(|&d| d == 0) {
        return;
    }
    let mut idx = vec![0; dims.len()];
    loop {
        f(&idx);
        let mut k = dims.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Contracts slots from the last to the first. The working buffer has logical
/// shape `(outer, dims[l], inner)`, where `inner` collects the surviving slots.
fn contract_with<E, T>(entries: &[E], lift: impl Fn(E) -> T, dims: &[usize], vectors: &[Option<&[T]>]) -> Vec<T>
where
    E: Copy,
    T: Copy + Zero + Add<Output = T> + Mul<Output = T>,
{
    assert_eq!(vectors.len(), dims.len(), "one vector slot per tensor slot");
    let mut buf: Option<Vec<T>> = None;
    let mut inner = 1usize;
    let mut outer: usize = dims.iter().product();
    for l in (0..dims.len()).rev() {
        let n = dims[l];
        outer /= n;
        let Some(v) = vectors[l] else {
            inner *= n;
            continue;
        };
        assert_eq!(v.len(), n, "vector length mismatch in slot {l}");
        let mut next = vec![T::zero(); outer * inner];
        match &buf {
            None => {
                for o in 0..outer {
                    for (j, &vj) in v.iter().enumerate() {
                        let base = (o * n + j) * inner;
                        let row = &mut next[o * inner..(o + 1) * inner];
                        for (t, acc) in row.iter_mut().enumerate() {
                            *acc = *acc + lift(entries[base + t]) * vj;
                        }
                    }
                }
            }
            Some(b) => {
                for o in 0..outer {
                    for (j, &vj) in v.iter().enumerate() {
                        let base = (o * n + j) * inner;
                        let row = &mut next[o * inner..(o + 1) * inner];
                        for (t, acc) in row.iter_mut().enumerate() {
                            *acc = *acc + b[base + t] * vj;
                        }
                    }
                }
            }
        }
        buf = Some(next);
    }
    buf.unwrap_or_else(|| entries.iter().map(|&e| lift(e)).collect())
}

/// `dims` with i.i.d. uniform `±1` entries from the ChaCha8 stream of `seed`.
pub fn rademacher(dims: &[usize], seed: u64) -> Result<UnimodularTensor> {
    let len = check_dims(dims)?;
    let mut rng = rng::generator(seed);
    let signs = (0..len).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    UnimodularTensor::from_signs(dims.to_vec(), signs, Provenance { kind: GeneratorKind::Rademacher, seed: Some(seed) })
}

/// `dims` with i.i.d. entries uniform on the unit circle.
pub fn steinhaus(dims: &[usize], seed: u64) -> Result<UnimodularTensor> {
    let len = check_dims(dims)?;
    let mut rng = rng::generator(seed);
    let entries = (0..len).map(|_| Complex64::from_polar(1.0, TAU * rng.gen::<f64>())).collect();
    UnimodularTensor::from_complex(dims.to_vec(), entries, Provenance { kind: GeneratorKind::Steinhaus, seed: Some(seed) })
}

/// `e^{2πi·k/n}`, exact at multiples of a quarter turn.
fn root_of_unity(k: usize, n: usize) -> Complex64 {
    let k = k % n;
    if (4 * k) % n == 0 {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * k as f64 / n as f64)
}

/// The `n × n` character matrix `a_ij = e^{2πi·ij/n}`, `i, j ∈ {1..n}`.
pub fn fourier_matrix(n: usize) -> Result<UnimodularTensor> {
    if n == 0 {
        return argument("fourier matrix needs n >= 1");
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            entries.push(root_of_unity((i % n) * (j % n), n));
        }
    }
    UnimodularTensor::from_complex(vec![n, n], entries, Provenance { kind: GeneratorKind::Fourier, seed: None })
}

/// `max_{r,s} |Σ_t a_rt·conj(a_st) − n·δ_rs|` for a square matrix.
pub fn orthogonality_defect(t: &UnimodularTensor) -> Result<f64> {
    let &[n, n2] = t.dims() else {
        return argument(format!("orthogonality defect needs a matrix, got dims {:?}", t.dims()));
    };
    if n != n2 {
        return argument(format!("orthogonality defect needs a square matrix, got {n}x{n2}"));
    }
    let a = t.to_complex();
    let mut worst = 0.0_f64;
    for r in 0..n {
        let row_r = &a[r * n..(r + 1) * n];
        for s in 0..n {
            let row_s = &a[s * n..(s + 1) * n];
            let dot: Complex64 = row_r.iter().zip(row_s).map(|(x, y)| x * y.conj()).sum();
            let target = if r == s { n as f64 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub n: usize,
    pub p: ExtendedExponent,
}

/// The domain `ℓ_{p_1}^{n_1} × ⋯ × ℓ_{p_m}^{n_m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    factors: Vec<Factor>,
}

impl DomainSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return argument("domain needs at least one factor");
        }
        if factors.iter().any(|f| f.n == 0) {
            return argument("domain dimensions must be positive");
        }
        Ok(DomainSpec { factors })
    }

    /// Pairs `dims[k]` with `ps[k]`; the lists must have equal length.
    pub fn from_parts(dims: &[usize], ps: &[ExtendedExponent]) -> Result<Self> {
        if dims.len() != ps.len() {
            return argument(format!("{} dimensions but {} exponents", dims.len(), ps.len()));
        }
        Self::new(dims.iter().zip(ps).map(|(&n, p)| Factor { n, p: p.clone() }).collect())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.n).collect()
    }

    pub fn exponents(&self) -> Vec<ExtendedExponent> {
        self.factors.iter().map(|f| f.p.clone()).collect()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }
}

/// A unimodular tensor read as an `m`-linear form on a mixed `ℓ_p` domain.
#[derive(Clone, Debug, PartialEq)]
pub struct FormInstance {
    tensor: UnimodularTensor,
    domain: DomainSpec,
}

impl FormInstance {
    pub fn new(tensor: UnimodularTensor, domain: DomainSpec) -> Result<Self> {
        if tensor.dims() != domain.dims().as_slice() {
            return argument(format!("tensor dims {:?} do not match domain dims {:?}", tensor.dims(), domain.dims()));
        }
        Ok(FormInstance { tensor, domain })
    }

    /// Form on `ℓ_{p_1}^{n_1} × ⋯` with the tensor's own dimensions.
    pub fn with_exponents(tensor: UnimodularTensor, ps: &[ExtendedExponent]) -> Result<Self> {
        let domain = DomainSpec::from_parts(tensor.dims(), ps)?;
        Ok(FormInstance { tensor, domain })
    }

    pub fn tensor(&self) -> &UnimodularTensor {
        &self.tensor
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    pub fn dims(&self) -> &[usize] {
        self.tensor.dims()
    }

    pub fn exponent(&self, k: usize) -> &ExtendedExponent {
        &self.domain.factors[k].p
    }

    pub fn field(&self) -> Field {
        self.tensor.field()
    }

    fn check_vectors(&self, vectors: &[Vec<Complex64>], skip: Option<usize>) -> Result<()> {
        if vectors.len() != self.order() {
            return argument(format!("expected {} vectors, got {}", self.order(), vectors.len()));
        }
        for (k, (v, &n)) in vectors.iter().zip(self.dims()).enumerate() {
            if Some(k) != skip && v.len() != n {
                return argument(format!("vector {k} has length {}, expected {n}", v.len()));
            }
        }
        Ok(())
    }

    /// `Σ_j entry(j)·∏_k vectors[k][j_k]`.
    pub fn evaluate(&self, vectors: &[Vec<Complex64>]) -> Result<Complex64> {
        self.check_vectors(vectors, None)?;
        let slots: Vec<_> = vectors.iter().map(|v| Some(v.as_slice())).collect();
        Ok(self.tensor.contract(&slots)[0])
    }

    /// Coefficients `c` of the linear functional `x ↦ A(…, x at slot k, …)`.
    /// `vectors[k]` is ignored and may have any length.
    pub fn partial_coefficients(&self, vectors: &[Vec<Complex64>], k: usize) -> Result<Vec<Complex64>> {
        if k >= self.order() {
            return argument(format!("slot {k} out of range for an order-{} form", self.order()));
        }
        self.check_vectors(vectors, Some(k))?;
        let slots: Vec<_> = vectors
            .iter()
            .enumerate()
            .map(|(l, v)| (l != k).then_some(v.as_slice()))
            .collect();
        Ok(self.tensor.contract(&slots))
    }

    /// The form restricted to the leading coordinates `new_dims`.
    pub fn restrict(&self, new_dims: &[usize]) -> Result<Self> {
        let tensor = self.tensor.restrict(new_dims)?;
        let domain = DomainSpec::from_parts(new_dims, &self.domain.exponents())?;
        Ok(FormInstance { tensor, domain })
    }

    /// The `(m−1)`-linear form obtained by fixing slot `k` at `e_{index}`.
    pub fn freeze_at_basis(&self, k: usize, index: usize) -> Result<Self> {
        let tensor = self.tensor.slice(k, index)?;
        let mut factors = self.domain.factors.clone();
        factors.remove(k);
        Ok(FormInstance { tensor, domain: DomainSpec::new(factors)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ones(dims: &[usize]) -> UnimodularTensor {
        let len = dims.iter().product();
        UnimodularTensor::from_signs(dims.to_vec(), vec![1; len], Provenance { kind: GeneratorKind::File, seed: None }).unwrap()
    }

    fn inf2() -> Vec<ExtendedExponent> {
        vec![ExtendedExponent::INFINITY, ExtendedExponent::INFINITY]
    }

    #[test]
    fn rademacher_is_deterministic() {
        assert_eq!(rademacher(&[2, 2], 99).unwrap(), rademacher(&[2, 2], 99).unwrap());
        let t = rademacher(&[1], 5).unwrap();
        assert!(matches!(t.signs().unwrap()[0], 1 | -1));
        assert!(rademacher(&[2, 0], 1).is_err());
        assert!(rademacher(&[], 1).is_err());
    }

    #[test]
    fn steinhaus_is_unimodular_and_deterministic() {
        let t = steinhaus(&[2, 2], 4).unwrap();
        assert!(t.unimodularity_defect() <= 1e-12);
        assert_eq!(steinhaus(&[3], 8).unwrap(), steinhaus(&[3], 8).unwrap());
    }

    #[test]
    fn fourier_examples() {
        assert_eq!(fourier_matrix(1).unwrap().to_complex(), vec![c(1.0, 0.0)]);
        assert_eq!(fourier_matrix(4).unwrap().entry(&[0, 0]), c(0.0, 1.0));
        assert_eq!(
            fourier_matrix(2).unwrap().to_complex(),
            vec![c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]
        );
        assert!(fourier_matrix(0).is_err());
    }

    #[test]
    fn orthogonality_examples() {
        assert!(orthogonality_defect(&fourier_matrix(8).unwrap()).unwrap() <= 8e-9);
        assert_eq!(orthogonality_defect(&ones(&[2, 2])).unwrap(), 2.0);
        assert_eq!(orthogonality_defect(&fourier_matrix(1).unwrap()).unwrap(), 0.0);
        assert!(orthogonality_defect(&ones(&[2, 3])).is_err());
        assert!(orthogonality_defect(&ones(&[2, 2, 2])).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let f = FormInstance::with_exponents(ones(&[2, 2]), &inf2()).unwrap();
        let one = vec![c(1.0, 0.0); 2];
        assert_eq!(f.evaluate(&[one.clone(), one.clone()]).unwrap(), c(4.0, 0.0));
        assert!(f.evaluate(&[one.clone(), vec![c(1.0, 0.0)]]).is_err());

        let g = FormInstance::with_exponents(fourier_matrix(2).unwrap(), &inf2()).unwrap();
        let v = g.evaluate(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn partial_coefficient_examples() {
        let g = FormInstance::with_exponents(fourier_matrix(2).unwrap(), &inf2()).unwrap();
        let coeffs = g.partial_coefficients(&[vec![c(1.0, 0.0); 2], vec![]], 1).unwrap();
        assert_eq!(coeffs, vec![c(0.0, 0.0), c(2.0, 0.0)]);

        let h = FormInstance::with_exponents(fourier_matrix(4).unwrap(), &inf2()).unwrap();
        let row = h.partial_coefficients(&[vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], vec![]], 1).unwrap();
        let expected: Vec<_> = (0..4).map(|j| h.tensor().entry(&[1, j])).collect();
        assert_eq!(row, expected);
        assert!(h.partial_coefficients(&[vec![], vec![]], 2).is_err());
    }

    #[test]
    fn three_slot_contraction_matches_direct_sum() {
        let t = steinhaus(&[2, 3, 4], 17).unwrap();
        let vs: Vec<Vec<Complex64>> = t
            .dims()
            .iter()
            .enumerate()
            .map(|(k, &n)| (0..n).map(|j| c(1.0 + j as f64, k as f64 - 0.5 * j as f64)).collect())
            .collect();
        let mut direct = c(0.0, 0.0);
        for_each_index(t.dims(), |idx| {
            let w: Complex64 = idx.iter().enumerate().map(|(k, &j)| vs[k][j]).product();
            direct += t.entry(idx) * w;
        });
        let ps = vec![ExtendedExponent::two(); 3];
        let f = FormInstance::with_exponents(t, &ps).unwrap();
        assert_abs_diff_eq!((f.evaluate(&vs).unwrap() - direct).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn restrict_and_slice() {
        let f4 = fourier_matrix(4).unwrap();
        let col = f4.restrict(&[4, 1]).unwrap();
        let expected: Vec<_> = (0..4).map(|i| f4.entry(&[i, 0])).collect();
        assert_eq!(col.to_complex(), expected);
        assert_eq!(f4.restrict(&[4, 4]).unwrap(), f4);
        assert!(f4.restrict(&[5, 1]).is_err());
        assert!(f4.restrict(&[4]).is_err());

        let t = rademacher(&[2, 3, 2], 3).unwrap();
        let s = t.slice(1, 2).unwrap();
        assert_eq!(s.dims(), &[2, 2]);
        assert_eq!(s.entry(&[1, 0]), t.entry(&[1, 2, 0]));
        assert!(rademacher(&[3], 1).unwrap().slice(0, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = rademacher(&[3, 2], 12).unwrap();
        assert_eq!(UnimodularTensor::from_json(&t.to_json()).unwrap(), t);
        let s = steinhaus(&[2, 3], 12).unwrap();
        assert_eq!(UnimodularTensor::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn reader_rejects_defects() {
        let bad = r#"{"dims":[2],"field":"complex","entries":[[1.0,0.0],[0.5,0.0]],"provenance":{"kind":"file","seed":null}}"#;
        assert!(UnimodularTensor::from_json(bad).is_err());
        let bad = r#"{"dims":[2],"field":"real","entries":[1,0]}"#;
        assert!(UnimodularTensor::from_json(bad).is_err());
        let short = r#"{"dims":[3],"field":"real","entries":[1,-1]}"#;
        assert!(UnimodularTensor::from_json(short).is_err());
        let ok = r#"{"dims":[2],"field":"real","entries":[1,-1]}"#;
        let t = UnimodularTensor::from_json(ok).unwrap();
        assert_eq!(t.provenance().kind, GeneratorKind::File);
    }

    #[test]
    fn form_requires_matching_dims() {
        let d = DomainSpec::from_parts(&[2, 3], &inf2()).unwrap();
        assert!(FormInstance::new(ones(&[2, 2]), d).is_err());
        assert!(DomainSpec::from_parts(&[2], &inf2()).is_err());
        assert!(DomainSpec::from_parts(&[0, 1], &inf2()).is_err());
    }
}
