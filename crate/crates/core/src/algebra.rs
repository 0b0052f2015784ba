//! Dense complex matrices over `M_d(ℂ)`, linear functionals given by trace
//! pairing, and states.
//!
//! A functional `ψ` on `M_d` is stored through its pairing matrix `P`, with
//! `ψ(x) = tr(P x)`. Its dual norm is the trace norm of `P`. Vectorization is
//! column-major everywhere: `vec(x)[i + j·d] = x[i, j]`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Relative accuracy requested from singular value computations.
pub const NORM_RTOL: f64 = 1e-10;

/// Dense complex square matrix with finite entries and dimension at least 1.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix(DMatrix<C64>);

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SquareMatrix({}x{}) ", self.dim(), self.dim())?;
        f.debug_list()
            .entries(self.0.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()))
            .finish()
    }
}

impl SquareMatrix {
    /// Wraps a nalgebra matrix after checking shape and finiteness.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(LabError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(LabError::EmptyMatrix);
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(LabError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(SquareMatrix(m))
    }

    pub(crate) fn from_inner(m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        SquareMatrix(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        for r in rows {
            if r.len() != d {
                return Err(LabError::NotSquare {
                    rows: d,
                    cols: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        SquareMatrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        SquareMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        SquareMatrix(DMatrix::zeros(dim, dim))
    }

    /// Matrix unit `e_ij` (zero-based indices).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = ONE;
        SquareMatrix(m)
    }

    pub fn diag(entries: &[C64]) -> Self {
        SquareMatrix(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let e: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&e)
    }

    /// All `d²` matrix units in column-major order of their position.
    pub fn units(dim: usize) -> Vec<SquareMatrix> {
        let mut out = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                out.push(Self::unit(dim, i, j));
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        SquareMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        SquareMatrix(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        SquareMatrix(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        SquareMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        SquareMatrix(self.0.map(|z| z * s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Column-major vectorization.
    pub fn vec(&self) -> DVector<C64> {
        DVector::from_column_slice(self.0.as_slice())
    }

    pub fn from_vec(dim: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), dim * dim, "vector length must be dim²");
        SquareMatrix(DMatrix::from_column_slice(dim, dim, v))
    }

    /// Hermitian part `(x + x*)/2`.
    pub fn hermitian_part(&self) -> Self {
        SquareMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// `(x − x*)/(2i)`, so that `x = re + i·im` with both parts Hermitian.
    pub fn anti_hermitian_part(&self) -> Self {
        SquareMatrix((&self.0 - self.0.adjoint()) * C64::new(0.0, -0.5))
    }
}

impl Add for &SquareMatrix {
    type Output = SquareMatrix;
    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;
    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &SquareMatrix {
    type Output = SquareMatrix;
    fn neg(self) -> SquareMatrix {
        SquareMatrix(-&self.0)
    }
}

// Matrix literal: array of rows, each entry a [re, im] pair.
impl Serialize for SquareMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        let mut seq = serializer.serialize_seq(Some(d))?;
        for i in 0..d {
            let row: Vec<[f64; 2]> = (0..d)
                .map(|j| {
                    let z = self.0[(i, j)];
                    [z.re, z.im]
                })
                .collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        SquareMatrix::from_rows(&rows).map_err(de::Error::custom)
    }
}

/// Kronecker product `a ⊗ b`, basis ordered `|i, k⟩ ↦ i·dim(b) + k`.
pub fn kron(a: &SquareMatrix, b: &SquareMatrix) -> SquareMatrix {
    SquareMatrix(a.0.kronecker(&b.0))
}

pub fn singular_values(a: &SquareMatrix) -> Vec<f64> {
    SVD::new(a.0.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// Largest singular value.
pub fn operator_norm(a: &SquareMatrix) -> f64 {
    let scale = a.0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    // Rescale before the SVD so tiny and huge matrices are handled alike.
    let m = a.0.map(|z| z / scale);
    let svd = SVD::try_new(m, false, false, NORM_RTOL * 1e-6, 0)
        .expect("SVD with unbounded iterations always converges");
    svd.singular_values.iter().copied().fold(0.0, f64::max) * scale
}

/// Sum of singular values (dual of the operator norm).
pub fn trace_norm(a: &SquareMatrix) -> f64 {
    singular_values(a).iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(a: &SquareMatrix) -> (Vec<f64>, DMatrix<C64>) {
    let h = a.hermitian_part();
    let eig = SymmetricEigen::new(h.0);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.dim(), a.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(a: &SquareMatrix) -> f64 {
    let (vals, _) = hermitian_eigen(a);
    vals[0]
}

/// Eigenvalues of a general complex matrix via its Schur form.
pub fn eigenvalues(a: &SquareMatrix) -> Result<Vec<C64>> {
    let d = a.dim();
    let schur = Schur::try_new(a.0.clone(), f64::EPSILON, 0)
        .ok_or_else(|| LabError::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(d);
    let mut k = 0;
    while k < d {
        // Guard against a residual 2×2 bump on the diagonal.
        if k + 1 < d && t[(k + 1, k)].norm() > 1e-14 * (t[(k, k)].norm() + t[(k + 1, k + 1)].norm() + 1.0)
        {
            let (a11, a12, a21, a22) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
            let mean = (a11 + a22) * 0.5;
            let disc = ((a11 - a22) * 0.5 * ((a11 - a22) * 0.5) + a12 * a21).sqrt();
            out.push(mean + disc);
            out.push(mean - disc);
            k += 2;
        } else {
            out.push(t[(k, k)]);
            k += 1;
        }
    }
    Ok(out)
}

/// Orthonormal basis (columns) of the approximate null space of a general
/// matrix: right singular vectors whose singular value is at most
/// `tol · max(1, σ_max)`.
pub fn null_space(a: &DMatrix<C64>, tol: f64) -> DMatrix<C64> {
    let n = a.ncols();
    let svd = SVD::new(a.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    let cols: Vec<DVector<C64>> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cutoff)
        .map(|k| v_t.row(k).adjoint())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &SquareMatrix) -> SquareMatrix {
    let d = a.dim();
    let norm1 = (0..d)
        .map(|j| (0..d).map(|i| a.0[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.5 {
        squarings = (norm1 / 0.5).log2().ceil() as u32;
    }
    let scaled = &a.0 * C64::new(0.5f64.powi(squarings as i32), 0.0);
    let mut sum = DMatrix::<C64>::identity(d, d);
    let mut term = DMatrix::<C64>::identity(d, d);
    for k in 1..=30 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    SquareMatrix(sum)
}

/// Linear functional `ψ(x) = tr(P x)` on `M_d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    pairing: SquareMatrix,
}

impl Functional {
    pub fn new(pairing: SquareMatrix) -> Self {
        Functional { pairing }
    }

    pub fn zero(dim: usize) -> Self {
        Functional::new(SquareMatrix::zeros(dim))
    }

    /// The functional `x ↦ x_{ij}`, i.e. pairing `e_ji`.
    pub fn entry(dim: usize, i: usize, j: usize) -> Self {
        Functional::new(SquareMatrix::unit(dim, j, i))
    }

    pub fn dim(&self) -> usize {
        self.pairing.dim()
    }

    pub fn pairing(&self) -> &SquareMatrix {
        &self.pairing
    }

    pub fn apply(&self, x: &SquareMatrix) -> Result<C64> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &SquareMatrix) -> C64 {
        let p = &self.pairing.0;
        let x = &x.0;
        let d = p.nrows();
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += p[(i, j)] * x[(j, i)];
            }
        }
        acc
    }

    /// Row vector `w` with `ψ(x) = w · vec(x)`.
    pub fn row(&self) -> DVector<C64> {
        self.pairing.transpose().vec()
    }

    /// Dual norm `‖ψ‖₁`, the trace norm of the pairing.
    pub fn norm(&self) -> f64 {
        trace_norm(&self.pairing)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.pairing.is_hermitian(tol)
    }

    pub fn scale(&self, s: C64) -> Functional {
        Functional::new(self.pairing.scale(s))
    }

    pub fn add(&self, other: &Functional) -> Functional {
        Functional::new(&self.pairing + &other.pairing)
    }
}

/// Positive functional with `ψ(1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct State(Functional);

/// Tolerance for positivity and normalization when validating states.
pub const STATE_TOL: f64 = 1e-10;

impl State {
    pub fn new(pairing: SquareMatrix) -> Result<Self> {
        Self::with_tolerance(pairing, STATE_TOL)
    }

    pub fn with_tolerance(pairing: SquareMatrix, tol: f64) -> Result<Self> {
        if !pairing.is_hermitian(tol) {
            return Err(LabError::InvalidState("pairing is not Hermitian".into()));
        }
        let tr = pairing.trace();
        if (tr - ONE).norm() > tol {
            return Err(LabError::InvalidState(format!(
                "trace of pairing is {tr}, expected 1"
            )));
        }
        let min = min_eigenvalue(&pairing);
        if min < -tol {
            return Err(LabError::InvalidState(format!(
                "pairing has negative eigenvalue {min:e}"
            )));
        }
        Ok(State(Functional::new(pairing.hermitian_part())))
    }

    /// Normalized trace `τ = tr(·)/d`.
    pub fn normalized_trace(dim: usize) -> Self {
        State(Functional::new(
            SquareMatrix::identity(dim).scale_real(1.0 / dim as f64),
        ))
    }

    /// Vector state `x ↦ x_{kk}`.
    pub fn basis_vector(dim: usize, k: usize) -> Self {
        State(Functional::new(SquareMatrix::unit(dim, k, k)))
    }

    pub fn functional(&self) -> &Functional {
        &self.0
    }

    pub fn pairing(&self) -> &SquareMatrix {
        self.0.pairing()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn apply(&self, x: &SquareMatrix) -> Result<C64> {
        self.0.apply(x)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let f = Functional::deserialize(deserializer)?;
        State::new(f.pairing).map_err(de::Error::custom)
    }
}

/// `ψ(x) = tr(P x)`.
pub fn functional_apply(psi: &Functional, x: &SquareMatrix) -> Result<C64> {
    psi.apply(x)
}

/// Jordan-type split `ψ = (h₁ − h₂) + i(h₃ − h₄)` with every `hⱼ` positive.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanParts {
    pub real_pos: Functional,
    pub real_neg: Functional,
    pub imag_pos: Functional,
    pub imag_neg: Functional,
}

impl JordanParts {
    pub fn recompose(&self) -> Functional {
        let re = &self.real_pos.pairing - &self.real_neg.pairing;
        let im = &self.imag_pos.pairing - &self.imag_neg.pairing;
        Functional::new(&re + &im.scale(I))
    }

    pub fn parts(&self) -> [&Functional; 4] {
        [&self.real_pos, &self.real_neg, &self.imag_pos, &self.imag_neg]
    }
}

/// Positive and negative parts of a Hermitian matrix.
pub fn positive_negative_parts(h: &SquareMatrix) -> (SquareMatrix, SquareMatrix) {
    let d = h.dim();
    let (vals, vecs) = hermitian_eigen(h);
    let mut pos = DMatrix::<C64>::zeros(d, d);
    let mut neg = DMatrix::<C64>::zeros(d, d);
    for (k, &lambda) in vals.iter().enumerate() {
        let v = vecs.column(k);
        let proj = &v * v.adjoint();
        if lambda > 0.0 {
            pos += proj * C64::new(lambda, 0.0);
        } else if lambda < 0.0 {
            neg += proj * C64::new(-lambda, 0.0);
        }
    }
    // Exact Hermitian symmetry for downstream PSD checks.
    let pos = SquareMatrix(pos).hermitian_part();
    let neg = SquareMatrix(neg).hermitian_part();
    (pos, neg)
}

pub fn hermitian_decompose(psi: &Functional) -> JordanParts {
    let p = psi.pairing();
    let (rp, rn) = positive_negative_parts(&p.hermitian_part());
    let (ip, inn) = positive_negative_parts(&p.anti_hermitian_part());
    JordanParts {
        real_pos: Functional::new(rp),
        real_neg: Functional::new(rn),
        imag_pos: Functional::new(ip),
        imag_neg: Functional::new(inn),
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(LabError::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(&SquareMatrix::identity(2), &SquareMatrix::identity(2));
        assert_eq!(k, SquareMatrix::identity(4));
    }

    #[test]
    fn kron_of_matrix_units_swaps_12_and_21() {
        // Basis order |11>,|12>,|21>,|22> (zero-based 0..4).
        let k = kron(&SquareMatrix::unit(2, 0, 1), &SquareMatrix::unit(2, 1, 0));
        let mut expected = SquareMatrix::zeros(4);
        // |2,1> is index 2, |1,2> is index 1.
        expected.set(1, 2, ONE);
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_of_diagonals() {
        let k = kron(
            &SquareMatrix::diag_real(&[1.0, 2.0]),
            &SquareMatrix::diag_real(&[3.0, 4.0]),
        );
        assert_eq!(k, SquareMatrix::diag_real(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn operator_norm_examples() {
        for d in 1..5 {
            assert!((operator_norm(&SquareMatrix::identity(d)) - 1.0).abs() < 1e-12);
        }
        assert!((operator_norm(&SquareMatrix::unit(2, 0, 1)) - 1.0).abs() < 1e-12);
        let m = SquareMatrix::diag(&[c(3.0, 0.0), c(0.0, -4.0)]);
        assert!((operator_norm(&m) - 4.0).abs() < 1e-12);
        assert_eq!(operator_norm(&SquareMatrix::zeros(3)), 0.0);
    }

    #[test]
    fn functional_apply_examples() {
        let tau = State::normalized_trace(2);
        let v = tau.apply(&SquareMatrix::unit(2, 0, 0)).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        assert!((tau.apply(&SquareMatrix::identity(2)).unwrap() - ONE).norm() < 1e-15);
        let f = Functional::new(SquareMatrix::unit(2, 1, 0));
        assert_eq!(f.apply(&SquareMatrix::unit(2, 0, 1)).unwrap(), ONE);
        assert!(matches!(
            f.apply(&SquareMatrix::identity(3)),
            Err(LabError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn entry_functional_reads_entry() {
        let x = SquareMatrix::from_fn(3, |i, j| c(i as f64, j as f64));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(Functional::entry(3, i, j).apply(&x).unwrap(), x.get(i, j));
            }
        }
    }

    #[test]
    fn decompose_state_is_itself() {
        let phi = State::normalized_trace(2);
        let parts = hermitian_decompose(phi.functional());
        assert!(parts.real_pos.pairing().max_abs_diff(phi.pairing()) < 1e-12);
        for p in [&parts.real_neg, &parts.imag_pos, &parts.imag_neg] {
            assert!(p.pairing().frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn decompose_imaginary_identity() {
        let f = Functional::new(SquareMatrix::identity(2).scale(I));
        let parts = hermitian_decompose(&f);
        assert!(parts.real_pos.pairing().frobenius_norm() < 1e-12);
        assert!(parts.real_neg.pairing().frobenius_norm() < 1e-12);
        assert!(parts.imag_pos.pairing().max_abs_diff(&SquareMatrix::identity(2)) < 1e-12);
        assert!(parts.imag_neg.pairing().frobenius_norm() < 1e-12);
    }

    #[test]
    fn decompose_signed_diagonal() {
        let f = Functional::new(SquareMatrix::diag_real(&[1.0, -1.0]));
        let parts = hermitian_decompose(&f);
        assert!(parts.real_pos.pairing().max_abs_diff(&SquareMatrix::unit(2, 0, 0)) < 1e-12);
        assert!(parts.real_neg.pairing().max_abs_diff(&SquareMatrix::unit(2, 1, 1)) < 1e-12);
        assert!(parts.imag_pos.pairing().frobenius_norm() < 1e-12);
    }

    #[test]
    fn state_validation() {
        assert!(State::new(SquareMatrix::diag_real(&[0.5, 0.5])).is_ok());
        assert!(matches!(
            State::new(SquareMatrix::diag_real(&[1.5, -0.5])),
            Err(LabError::InvalidState(_))
        ));
        assert!(matches!(
            State::new(SquareMatrix::diag_real(&[0.5, 0.6])),
            Err(LabError::InvalidState(_))
        ));
        assert!(State::new(SquareMatrix::unit(2, 0, 1)).is_err());
    }

    #[test]
    fn matrix_literal_round_trip() {
        let json = "[[[1,0],[0,0]],[[0,0],[1,0]]]";
        let m: SquareMatrix = serde_json::from_str(json).unwrap();
        assert_eq!(m, SquareMatrix::identity(2));
        let m = SquareMatrix::from_fn(2, |i, j| c(i as f64 + 0.5, -(j as f64)));
        let s = serde_json::to_string(&m).unwrap();
        let back: SquareMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_literal_rejects_ragged() {
        let json = "[[[1,0],[0,0]],[[0,0]]]";
        assert!(serde_json::from_str::<SquareMatrix>(json).is_err());
    }

    #[test]
    fn new_rejects_non_finite() {
        let mut m = DMatrix::<C64>::identity(2, 2);
        m[(1, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(
            SquareMatrix::new(m),
            Err(LabError::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn vec_is_column_major() {
        let x = SquareMatrix::from_fn(2, |i, j| c((i + 2 * j) as f64, 0.0));
        let v = x.vec();
        for k in 0..4 {
            assert_eq!(v[k].re, k as f64);
        }
        assert_eq!(SquareMatrix::from_vec(2, v.as_slice()), x);
    }

    #[test]
    fn eigenvalues_of_triangular_and_rotation() {
        let m = SquareMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let mut e: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|z| z.re).collect();
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
        // Real rotation by 90 degrees has eigenvalues ±i.
        let r = SquareMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let e = eigenvalues(&r).unwrap();
        assert!(e.iter().any(|z| (z - I).norm() < 1e-12));
        assert!(e.iter().any(|z| (z + I).norm() < 1e-12));
    }

    #[test]
    fn expm_of_nilpotent_and_diagonal() {
        let n = SquareMatrix::unit(2, 0, 1).scale_real(3.0);
        let e = expm(&n);
        let expected = &SquareMatrix::identity(2) + &n;
        assert!(e.max_abs_diff(&expected) < 1e-14);
        let d = SquareMatrix::diag(&[c(2.0, 0.0), c(0.0, std::f64::consts::PI)]);
        let e = expm(&d);
        assert!((e.get(0, 0).re - 2f64.exp()).abs() < 1e-12);
        assert!((e.get(1, 1) + ONE).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_projector() {
        let p = SquareMatrix::diag_real(&[1.0, 0.0, 0.0]);
        let ns = null_space(p.inner(), 1e-10);
        assert_eq!(ns.ncols(), 2);
    }
}
