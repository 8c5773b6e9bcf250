//! Small dense complex matrices.
//!
//! Everything in this crate lives in dimension 2 (qubit states and Kraus
//! operators) or 4 (superoperators, Choi matrices, the two-qubit oracle), so
//! the kernel is a plain row-major `Vec<Complex64>` with direct algorithms:
//! closed-form eigenvalues for 2x2 Hermitian matrices, cyclic Jacobi sweeps
//! for larger ones, and Gauss-Jordan elimination with partial pivoting for
//! inverses.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Numerical tolerances shared by the kernel and the layers above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max |m - m†| entry accepted as Hermitian input to the eigensolver.
    pub hermitian_input: f64,
    /// Max |ρ - ρ†| entry accepted for a density matrix.
    pub hermitian_state: f64,
    /// Max |Tr ρ - 1| accepted for a density matrix.
    pub trace: f64,
    /// Most negative eigenvalue accepted for a PSD state.
    pub psd_slack: f64,
    /// Jacobi residual bound ‖A v - λ v‖.
    pub eigen_residual: f64,
    /// Relative pivot threshold below which a matrix counts as singular.
    pub singular_pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian_input: 1e-10,
            hermitian_state: 1e-12,
            trace: 1e-12,
            psd_slack: 1e-10,
            eigen_residual: 1e-11,
            singular_pivot: 1e-13,
        }
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Build from row-major entries; the length must be a perfect square.
    pub fn from_vec(data: Vec<Complex64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != data.len() {
            return Err(Error::InvalidShape(format!(
                "{} entries is not a square matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("CMatrix::from_vec"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        Self {
            dim: N,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Self {
            dim: N,
            data: rows
                .into_iter()
                .flatten()
                .map(|x| Complex64::new(x, 0.0))
                .collect(),
        }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let vals: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diag(&vals)
    }

    /// |ψ⟩⟨ψ| for an (unnormalized) vector ψ.
    pub fn outer(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise |a - b|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on mismatched dims");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Verify Hermiticity within `tol` and return the symmetrized (m + m†)/2.
    pub fn hermitian_part(&self, tol: f64) -> Result<Self> {
        let deviation = self.hermitian_deviation();
        if deviation.is_nan() || deviation > tol {
            return Err(Error::NotHermitian {
                deviation,
                tolerance: tol,
            });
        }
        Ok((self + &self.adjoint()).scale_real(0.5))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "add on mismatched dims");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "sub on mismatched dims");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "mul on mismatched dims");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Kronecker product: `out[(i*db + k, j*db + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (da, db) = (a.dim, b.dim);
    let mut out = CMatrix::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
///
/// A pivot smaller than `tol.singular_pivot * max|m|` makes the matrix
/// singular; the error carries that pivot but no time (callers attach one).
pub fn invert(m: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let n = m.dim;
    let scale = m.max_abs();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::SingularMap {
            time: None,
            pivot: 0.0,
        });
    }
    let threshold = tol.singular_pivot * scale;
    let mut a = m.clone();
    let mut inv = CMatrix::identity(n);

    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_mag < threshold {
            return Err(Error::SingularMap {
                time: None,
                pivot: pivot_mag,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                a.data.swap(col * n + j, pivot_row * n + j);
                inv.data.swap(col * n + j, pivot_row * n + j);
            }
        }
        let p = a[(col, col)].inv();
        for j in 0..n {
            a[(col, j)] *= p;
            inv[(col, j)] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[(r, col)];
            if factor == ZERO {
                continue;
            }
            for j in 0..n {
                let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                a[(r, j)] -= factor * ac;
                inv[(r, j)] -= factor * ic;
            }
        }
    }
    if !inv.is_finite() {
        return Err(Error::NonFinite("invert"));
    }
    Ok(inv)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Unitary whose column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let h = m.hermitian_part(tol.hermitian_input)?;
    if h.dim == 2 {
        return Ok(eigenvalues_2x2(&h).to_vec());
    }
    Ok(jacobi_eigen(&h, tol)?.values)
}

/// Full Hermitian eigendecomposition (cyclic Jacobi, any dimension).
pub fn hermitian_eigen(m: &CMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    let h = m.hermitian_part(tol.hermitian_input)?;
    jacobi_eigen(&h, tol)
}

/// Σ|λᵢ| of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eigenvalues(m, tol)?.iter().map(|l| l.abs()).sum())
}

fn eigenvalues_2x2(h: &CMatrix) -> [f64; 2] {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_gap = (0.5 * (a - d)).hypot(b.norm());
    [mean + half_gap, mean - half_gap]
}

const MAX_SWEEPS: usize = 64;

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.dim {
        for j in 0..a.dim {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigen(h: &CMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    let n = h.dim;
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let frob = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 4.0 * f64::EPSILON * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase e^{-iφ} on q makes the (p,q) entry real, then a real rotation zeroes it.
                let phase = apq.conj() / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let mut u = CMatrix::identity(n);
                u[(p, p)] = Complex64::new(c, 0.0);
                u[(p, q)] = Complex64::new(s, 0.0);
                u[(q, p)] = Complex64::new(-s, 0.0) * phase;
                u[(q, q)] = Complex64::new(c, 0.0) * phase;
                a = &(&u.adjoint() * &a) * &u;
                // Exact zeros keep the sweep monotone.
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                v = &v * &u;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, k)] = v[(row, src)];
        }
    }

    let residual = eigen_residual(h, &values, &vectors);
    let bound = tol.eigen_residual * frob.max(1.0);
    if residual.is_nan() || residual > bound {
        return Err(Error::NoConvergence { residual });
    }
    Ok(HermitianEigen { values, vectors })
}

fn eigen_residual(h: &CMatrix, values: &[f64], vectors: &CMatrix) -> f64 {
    let n = h.dim;
    let mut worst = 0.0_f64;
    for (k, &lam) in values.iter().enumerate() {
        let col: Vec<Complex64> = (0..n).map(|r| vectors[(r, k)]).collect();
        let hv = h.matvec(&col);
        let res = hv
            .iter()
            .zip(&col)
            .map(|(a, b)| (a - b * lam).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res);
    }
    worst
}

/// Validated density matrix (Hermitian, unit trace, PSD within tolerance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        if m.dim != 2 && m.dim != 4 {
            return Err(Error::InvalidDensityMatrix(format!(
                "dimension {} (expected 2 or 4)",
                m.dim
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("DensityMatrix::new"));
        }
        let herm = m.hermitian_deviation();
        if herm > tol.hermitian_state {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermitian deviation {herm:.3e}"
            )));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min_eig = hermitian_eigenvalues(&m, tol)?
            .last()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -tol.psd_slack {
            return Err(Error::InvalidDensityMatrix(format!(
                "min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// Normalized pure state |ψ⟩⟨ψ|.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        let mut m = CMatrix::outer(&unit);
        // Exact Hermiticity and unit diagonal sum after normalization round-off.
        m = (&m + &m.adjoint()).scale_real(0.5);
        let tr = m.trace().re;
        Self::new(m.scale_real(1.0 / tr))
    }

    pub fn ket0() -> Self {
        Self(CMatrix::real_diag(&[1.0, 0.0]))
    }

    pub fn ket1() -> Self {
        Self(CMatrix::real_diag(&[0.0, 1.0]))
    }

    pub fn plus() -> Self {
        Self(CMatrix::from_real_rows([[0.5, 0.5], [0.5, 0.5]]))
    }

    pub fn minus() -> Self {
        Self(CMatrix::from_real_rows([[0.5, -0.5], [-0.5, 0.5]]))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_z() -> CMatrix {
        CMatrix::real_diag(&[1.0, -1.0])
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let tol = Tolerances::default();
        assert_eq!(
            hermitian_eigenvalues(&CMatrix::identity(2), &tol).unwrap(),
            vec![1.0, 1.0]
        );
        assert_eq!(hermitian_eigenvalues(&sigma_z(), &tol).unwrap(), vec![1.0, -1.0]);
        // |0><0| - |1><1|
        let diff = &DensityMatrix::ket0().into_matrix() - &DensityMatrix::ket1().into_matrix();
        assert_eq!(hermitian_eigenvalues(&diff, &tol).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn jacobi_on_4x4_matches_trace_and_residual() {
        let tol = Tolerances::default();
        let m = CMatrix::from_rows([
            [c(2.0, 0.0), c(0.3, 0.4), c(0.0, -1.0), c(0.1, 0.0)],
            [c(0.3, -0.4), c(-1.0, 0.0), c(0.5, 0.5), c(0.0, 0.2)],
            [c(0.0, 1.0), c(0.5, -0.5), c(0.5, 0.0), c(-0.7, 0.0)],
            [c(0.1, 0.0), c(0.0, -0.2), c(-0.7, 0.0), c(1.5, 0.0)],
        ]);
        let eig = hermitian_eigen(&m, &tol).unwrap();
        let sum: f64 = eig.values.iter().sum();
        assert!((sum - m.trace().re).abs() < 1e-10);
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        // V diag(λ) V† reconstructs m
        let recon = &(&eig.vectors * &CMatrix::real_diag(&eig.values)) * &eig.vectors.adjoint();
        assert!(recon.max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn jacobi_handles_degenerate_and_diagonal() {
        let tol = Tolerances::default();
        let vals = hermitian_eigenvalues(&CMatrix::real_diag(&[0.0, 3.0, 3.0, -1.0]), &tol).unwrap();
        assert_eq!(vals, vec![3.0, 3.0, 0.0, -1.0]);
        let bell = CMatrix::outer(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let vals = hermitian_eigenvalues(&bell, &tol).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-14);
        assert!(vals[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let tol = Tolerances::default();
        let m = CMatrix::from_real_rows([[1.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(
            hermitian_eigenvalues(&m, &tol),
            Err(Error::NotHermitian { .. })
        ));
        assert!(trace_norm(&m, &tol).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        let tol = Tolerances::default();
        assert_eq!(trace_norm(&CMatrix::zeros(2), &tol).unwrap(), 0.0);
        assert_eq!(trace_norm(&sigma_z(), &tol).unwrap(), 2.0);
        let v = trace_norm(&CMatrix::real_diag(&[0.7, -0.3]), &tol).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kron_examples() {
        assert_eq!(
            kron(&CMatrix::identity(2), &CMatrix::identity(2)),
            CMatrix::identity(4)
        );
        assert_eq!(
            kron(&sigma_z(), &CMatrix::identity(2)),
            CMatrix::real_diag(&[1.0, 1.0, -1.0, -1.0])
        );
        let k = kron(
            DensityMatrix::ket0().matrix(),
            DensityMatrix::ket1().matrix(),
        );
        assert_eq!(k, CMatrix::real_diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn invert_examples() {
        let tol = Tolerances::default();
        assert_eq!(invert(&CMatrix::identity(4), &tol).unwrap(), CMatrix::identity(4));
        let inv = invert(&CMatrix::real_diag(&[2.0, 2.0, 0.5, 0.5]), &tol).unwrap();
        assert!(inv.max_abs_diff(&CMatrix::real_diag(&[0.5, 0.5, 2.0, 2.0])) < 1e-15);
    }

    #[test]
    fn invert_detects_singular() {
        let tol = Tolerances::default();
        let m = CMatrix::real_diag(&[1.0, 0.0, 1.0, 1.0]);
        let err = invert(&m, &tol).unwrap_err();
        assert!(matches!(err, Error::SingularMap { time: None, .. }));
        assert!(matches!(
            err.at_time(2.5),
            Error::SingularMap { time: Some(t), .. } if t == 2.5
        ));
        assert!(invert(&CMatrix::zeros(4), &tol).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(CMatrix::real_diag(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(CMatrix::real_diag(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(CMatrix::from_real_rows([[0.5, 0.1], [0.0, 0.5]])).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(3).scale_real(1.0 / 3.0)).is_err());
        let plus = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(plus.matrix().max_abs_diff(DensityMatrix::plus().matrix()) < 1e-15);
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(4).into_matrix()).is_ok());
    }

    #[test]
    fn from_vec_rejects_bad_shapes() {
        assert!(CMatrix::from_vec(vec![ONE; 3]).is_err());
        assert!(CMatrix::from_vec(vec![Complex64::new(f64::NAN, 0.0); 4]).is_err());
        assert_eq!(CMatrix::from_vec(vec![ONE; 4]).unwrap().dim(), 2);
    }
}
