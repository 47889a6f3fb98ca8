//! Complex linear algebra for small quantum registers.
//!
//! Everything here is dense and sized for at most a few hundred amplitudes.
//! Qubit 0 is the least significant bit of a basis-state index, and in a
//! Kronecker product the left factor occupies the more significant qubits.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Input hermiticity tolerance (max-abs deviation of `M - M†`).
pub const HERMITIAN_INPUT_TOL: f64 = 1e-8;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Number of qubits for a power-of-two dimension.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch {
            expected: dim.next_power_of_two(),
            actual: dim,
        });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// A dense complex vector. Used for state vectors, `|b⟩`, `|x⟩` and eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVec {
    amps: Vec<C64>,
}

impl ComplexVec {
    pub fn new(amps: Vec<C64>) -> Self {
        assert!(!amps.is_empty(), "vector must have positive dimension");
        Self { amps }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![ZERO; dim])
    }

    /// Computational basis state `|index⟩` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut v = Self::zeros(dim);
        v.amps[index] = ONE;
        v
    }

    /// `|0…0⟩` on `qubits` qubits.
    pub fn zero_state(qubits: usize) -> Self {
        Self::basis(1 << qubits, 0)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn qubits(&self) -> Result<usize> {
        qubit_count(self.dim())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Unit-length copy. Fails on a (numerically) zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::ZeroProbability { norm: n });
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self::new(self.amps.iter().map(|a| a * s).collect())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_dim(other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`; the global-phase-free comparison used throughout.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Kronecker product; `self` becomes the more significant factor.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                out.push(a * b);
            }
        }
        Self::new(out)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|self⟩⟨self|`.
    pub fn outer(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.data[i * d + j] = self.amps[i] * self.amps[j].conj();
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: dim,
            });
        }
        Ok(())
    }
}

impl fmt::Display for ComplexVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.qubits().unwrap_or(0);
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 1e-24 {
                writeln!(f, "|{i:0width$b}⟩  {:+.6} {:+.6}i", a.re, a.im)?;
            }
        }
        Ok(())
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&v| C64::new(v, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let d = values.len();
        let mut m = Self::zeros(d, d);
        for (i, v) in values.iter().enumerate() {
            m.data[i * d + i] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> ComplexVec {
        ComplexVec::new((0..self.rows).map(|r| self.get(r, c)).collect())
    }

    pub fn from_columns(cols: &[ComplexVec]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, ComplexVec::dim);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            if col.dim() != r {
                return Err(Error::DimensionMismatch {
                    expected: r,
                    actual: col.dim(),
                });
            }
            for i in 0..r {
                m.set(i, j, col.amplitudes()[i]);
            }
        }
        Ok(m)
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    m.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(m)
    }

    pub fn apply(&self, v: &ComplexVec) -> Result<ComplexVec> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.dim(),
            });
        }
        Ok(ComplexVec::new(
            (0..self.rows)
                .map(|r| {
                    self.row(r)
                        .iter()
                        .zip(v.amplitudes())
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        ))
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    /// Max-abs entrywise difference; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Max-abs entry of `M - M†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Max-abs entry of `M†M - I`.
    pub fn unitary_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.dagger().matmul(self).expect("square");
        prod.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation() <= tol
    }

    /// Kronecker product; `self` becomes the more significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut m = Self::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        m.data[(r1 * other.rows + r2) * cols + c1 * other.cols + c2] =
                            a * other.get(r2, c2);
                    }
                }
            }
        }
        m
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// Kronecker product of two vectors or two matrices.
pub trait Tensor {
    fn tensor_with(&self, other: &Self) -> Self;
}

impl Tensor for ComplexVec {
    fn tensor_with(&self, other: &Self) -> Self {
        self.tensor(other)
    }
}

impl Tensor for ComplexMatrix {
    fn tensor_with(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

/// `a ⊗ b` with `a` on the more significant qubits.
pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor_with(b)
}

/// Spectrum of a Hermitian matrix: ascending eigenvalues, eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> ComplexVec {
        self.eigenvectors.column(j)
    }

    /// `Σ f(λ_j) |u_j⟩⟨u_j|`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for r in 0..d {
                let vr = v.get(r, j) * w;
                for c in 0..d {
                    m.data[r * d + c] += vr * v.get(c, j).conj();
                }
            }
        }
        m
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.spectral_map(|l| C64::new(l, 0.0))
    }
}

/// Eigen-decomposition of a Hermitian matrix.
pub fn eigh(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = m
        .add(&m.dagger())
        .expect("square")
        .scaled(C64::new(0.5, 0.0));
    let eig = SymmetricEigen::new(sym.to_nalgebra());

    let d = m.rows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..d {
            eigenvectors.set(r, dst, eig.eigenvectors[(r, src)]);
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `e^{iAt}` for Hermitian `A`, computed from the spectrum.
pub fn exp_unitary(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let spectrum = eigh(a)?;
    Ok(exp_from_spectrum(&spectrum, t))
}

pub(crate) fn exp_from_spectrum(spectrum: &EigenDecomposition, t: f64) -> ComplexMatrix {
    spectrum.spectral_map(|l| C64::from_polar(1.0, l * t))
}

/// Mixed state on `qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    qubits: usize,
}

impl DensityMatrix {
    /// Validates shape, hermiticity and unit trace.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                actual: matrix.cols(),
            });
        }
        let qubits = qubit_count(matrix.rows())?;
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_INPUT_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > 1e-8 {
            return Err(Error::NotNormalized { norm: tr.re });
        }
        Ok(Self { matrix, qubits })
    }

    pub(crate) fn from_raw(matrix: ComplexMatrix) -> Self {
        let qubits = matrix.rows().trailing_zeros() as usize;
        Self { matrix, qubits }
    }

    pub fn from_pure(state: &ComplexVec) -> Result<Self> {
        let qubits = state.qubits()?;
        Ok(Self {
            matrix: state.outer(),
            qubits,
        })
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        let d = 1 << qubits;
        Self {
            matrix: ComplexMatrix::identity(d).scaled(C64::new(1.0 / d as f64, 0.0)),
            qubits,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.matrix
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).expect("square").trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix)
            .map(|e| e.eigenvalues)
            .unwrap_or_default()
    }

    /// Trace one, Hermitian and no eigenvalue below `-tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol
            && self.matrix.is_hermitian(tol)
            && self.eigenvalues().iter().all(|&l| l >= -tol)
    }

    /// Probability that `qubit` reads `outcome`.
    pub fn probability(&self, qubit: usize, outcome: bool) -> f64 {
        let mask = 1 << qubit;
        (0..self.dim())
            .filter(|i| (i & mask != 0) == outcome)
            .map(|i| self.matrix.get(i, i).re)
            .sum()
    }

    pub fn scaled_to_unit_trace(&self) -> Result<Self> {
        let tr = self.trace();
        if tr.abs() < 1e-28 {
            return Err(Error::ZeroProbability {
                norm: tr.max(0.0).sqrt(),
            });
        }
        Ok(Self::from_raw(self.matrix.scaled(C64::new(1.0 / tr, 0.0))))
    }
}

/// `⟨x|ρ|x⟩`, clamped into `[0, 1]`.
pub fn fidelity(pure: &ComplexVec, rho: &DensityMatrix) -> Result<f64> {
    if pure.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: pure.dim(),
        });
    }
    let rx = rho.matrix().apply(pure)?;
    Ok(pure.inner(&rx)?.re.clamp(0.0, 1.0))
}

/// Reduced state on `keep`. Kept qubits are renumbered in ascending order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let q = rho.qubits();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= q) {
        return Err(Error::BadIndex {
            index: bad,
            qubits: q,
        });
    }
    let traced: Vec<usize> = (0..q).filter(|i| !keep.contains(i)).collect();

    let scatter = |bits: usize, positions: &[usize]| -> usize {
        positions
            .iter()
            .enumerate()
            .filter(|(b, _)| bits >> b & 1 == 1)
            .map(|(_, &p)| 1 << p)
            .sum()
    };

    let dk = 1 << keep.len();
    let dt = 1 << traced.len();
    let keep_idx: Vec<usize> = (0..dk).map(|i| scatter(i, &keep)).collect();
    let trace_idx: Vec<usize> = (0..dt).map(|t| scatter(t, &traced)).collect();

    let m = rho.matrix();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let s: C64 = trace_idx
                .iter()
                .map(|&t| m.get(keep_idx[i] | t, keep_idx[j] | t))
                .sum();
            out.set(i, j, s);
        }
    }
    Ok(DensityMatrix::from_raw(out))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexRepr> for C64 {
    fn from(r: ComplexRepr) -> Self {
        match r {
            ComplexRepr::Real(re) => C64::new(re, 0.0),
            ComplexRepr::Pair([re, im]) => C64::new(re, im),
        }
    }
}

/// Complex number as `[re, im]`.
pub(crate) fn complex_pair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

impl Serialize for ComplexVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.amps.iter().map(|&a| complex_pair(a)))
    }
}

impl<'de> Deserialize<'de> for ComplexVec {
    /// Accepts `[re, im]` pairs or bare reals.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<ComplexRepr>::deserialize(d)?;
        if raw.is_empty() {
            return Err(serde::de::Error::custom("empty vector"));
        }
        Ok(ComplexVec::new(raw.into_iter().map(C64::from).collect()))
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq((0..self.rows).map(|r| {
            self.row(r)
                .iter()
                .map(|&a| complex_pair(a))
                .collect::<Vec<_>>()
        }))
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Vec<ComplexRepr>>::deserialize(d)?;
        let rows = raw
            .into_iter()
            .map(|row| row.into_iter().map(C64::from).collect())
            .collect();
        ComplexMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance_a() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.5, 0.5], &[0.5, 1.5]]).unwrap()
    }

    #[test]
    fn eigh_instance_matrix() {
        let e = eigh(&instance_a()).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 2.0).abs() < 1e-12);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexVec::from_real(&[s, s]);
        let minus = ComplexVec::from_real(&[s, -s]);
        assert!((e.eigenvector(1).overlap(&plus).unwrap() - 1.0).abs() < 1e-12);
        assert!((e.eigenvector(0).overlap(&minus).unwrap() - 1.0).abs() < 1e-12);
        // A·u = λ·u by direct multiplication
        for j in 0..2 {
            let u = e.eigenvector(j);
            let au = instance_a().apply(&u).unwrap();
            let lu = u.scaled(C64::new(e.eigenvalues[j], 0.0));
            assert!(au.max_abs_diff(&lu) < 1e-10);
        }
    }

    #[test]
    fn eigh_identity_gives_orthonormal_basis() {
        let e = eigh(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e.eigenvalues.len(), 2);
        assert!(e.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-12));
        assert!(e.eigenvectors.is_unitary(1e-10));
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exp_unitary_instance_matrix() {
        let full = exp_unitary(&instance_a(), 2.0 * std::f64::consts::PI).unwrap();
        assert!(full.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);

        let half = exp_unitary(&instance_a(), std::f64::consts::PI).unwrap();
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(half.max_abs_diff(&x) < 1e-10);

        let zero = exp_unitary(&instance_a(), 0.0).unwrap();
        assert!(zero.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn exp_unitary_matches_projector_oracle() {
        // P± projectors onto (1,±1)/√2, built by hand
        let p_plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let p_minus = ComplexMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]).unwrap();
        let t = 0.7;
        let oracle = p_plus
            .scaled(C64::from_polar(1.0, 2.0 * t))
            .add(&p_minus.scaled(C64::from_polar(1.0, t)))
            .unwrap();
        let u = exp_unitary(&instance_a(), t).unwrap();
        assert!(u.max_abs_diff(&oracle) < 1e-12);
        assert!(u.is_unitary(1e-10));
    }

    #[test]
    fn fidelity_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexVec::from_real(&[s, s]);
        let x = ComplexVec::from_real(&[3.0, -1.0]).normalized().unwrap();

        let self_rho = DensityMatrix::from_pure(&x).unwrap();
        assert!((fidelity(&x, &self_rho).unwrap() - 1.0).abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(1);
        assert!((fidelity(&x, &mixed).unwrap() - 0.5).abs() < 1e-12);

        let rho_plus = DensityMatrix::from_pure(&plus).unwrap();
        assert!((fidelity(&x, &rho_plus).unwrap() - 0.2).abs() < 1e-12);

        let wrong = ComplexVec::zero_state(2);
        assert!(matches!(
            fidelity(&wrong, &mixed),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tensor_ordering() {
        let zero = ComplexVec::basis(2, 0);
        let one = ComplexVec::basis(2, 1);
        assert_eq!(tensor(&zero, &one), ComplexVec::basis(4, 1));
        assert_eq!(tensor(&one, &zero), ComplexVec::basis(4, 2));

        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let xi = tensor(&x, &ComplexMatrix::identity(2));
        assert_eq!(
            xi.apply(&ComplexVec::basis(4, 0)).unwrap(),
            ComplexVec::basis(4, 2)
        );
    }

    #[test]
    fn partial_trace_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ComplexVec::from_real(&[s, s]);
        let product = tensor(&ComplexVec::basis(2, 0), &plus);
        let rho = DensityMatrix::from_pure(&product).unwrap();
        let low = partial_trace(&rho, &[0]).unwrap();
        assert!(low.matrix().max_abs_diff(&plus.outer()) < 1e-12);

        let bell = ComplexVec::from_real(&[s, 0.0, 0.0, s]);
        let rho = DensityMatrix::from_pure(&bell).unwrap();
        let half = DensityMatrix::maximally_mixed(1);
        for k in 0..2 {
            let r = partial_trace(&rho, &[k]).unwrap();
            assert!(r.matrix().max_abs_diff(half.matrix()) < 1e-12);
        }

        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::BadIndex {
                index: 2,
                qubits: 2
            })
        ));
    }

    #[test]
    fn partial_trace_ghz4_against_brute_force() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![0.0; 16];
        amps[0] = s;
        amps[15] = s;
        let ghz = ComplexVec::from_real(&amps);
        let rho = DensityMatrix::from_pure(&ghz).unwrap();
        for keep in 0..4 {
            // brute force: sum ρ over the 8 configurations of the other three qubits
            let mut oracle = [[ZERO; 2]; 2];
            for a in 0..2usize {
                for b in 0..2usize {
                    for rest in 0..8usize {
                        let spread = |bit: usize| {
                            let low = rest & ((1 << keep) - 1);
                            let high = (rest >> keep) << (keep + 1);
                            high | (bit << keep) | low
                        };
                        oracle[a][b] += rho.matrix().get(spread(a), spread(b));
                    }
                }
            }
            let r = partial_trace(&rho, &[keep]).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    assert!((r.matrix().get(a, b) - oracle[a][b]).norm() < 1e-12);
                }
            }
            assert!((r.matrix().get(0, 0).re - 0.5).abs() < 1e-12);
            assert!(r.matrix().get(0, 1).norm() < 1e-12);
        }
    }

    #[test]
    fn serde_uses_pairs_and_accepts_reals() {
        let v = ComplexVec::new(vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, "[[1.0,-2.0],[0.5,0.0]]");
        let back: ComplexVec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);

        let m: ComplexMatrix = serde_json::from_str("[[1.5, 0.5], [[0.5, 0.0], 1.5]]").unwrap();
        assert_eq!(m, instance_a());
        assert!(serde_json::from_str::<ComplexMatrix>("[[1.0],[1.0, 2.0]]").is_err());
    }
}
