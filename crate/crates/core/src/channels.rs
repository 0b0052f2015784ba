//! Unital completely positive maps on `M_d` in Kraus form.
//!
//! Heisenberg picture throughout: `T(x) = Σᵢ Vᵢ x Vᵢ*`, unital when
//! `Σᵢ Vᵢ Vᵢ* = 1`. The transfer matrix acts on column-major vectorizations,
//! `vec(T(x)) = (Σᵢ conj(Vᵢ) ⊗ Vᵢ) vec(x)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    check_dim, expm, kron, min_eigenvalue, operator_norm, Functional, SquareMatrix, C64,
};
use crate::error::{LabError, Result};

/// Unitality and Choi-positivity tolerance for constructed channels.
pub const CHANNEL_TOL: f64 = 1e-10;

/// Tolerance on `‖ℰ(VV*) − 1‖` accepted by [`build_tv`].
pub const TV_PRECONDITION_TOL: f64 = 1e-8;

/// A ucp map given by a nonempty Kraus family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<SquareMatrix>,
}

/// JSON channel description `{ "dim": d, "kraus": [matrix, ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub dim: usize,
    pub kraus: Vec<SquareMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<SquareMatrix>) -> Result<Self> {
        Self::with_tolerance(kraus, CHANNEL_TOL)
    }

    /// Builds a channel, accepting a unitality defect up to `tol`.
    pub fn with_tolerance(kraus: Vec<SquareMatrix>, tol: f64) -> Result<Self> {
        let first = kraus.first().ok_or(LabError::NoKrausOperators)?;
        let dim = first.dim();
        for v in &kraus {
            check_dim(dim, v.dim())?;
        }
        let ch = KrausChannel { dim, kraus };
        let defect = ch.unitality_defect();
        if defect > tol {
            return Err(LabError::NotUnital { defect });
        }
        Ok(ch)
    }

    pub fn from_config(cfg: ChannelConfig) -> Result<Self> {
        for v in &cfg.kraus {
            check_dim(cfg.dim, v.dim())?;
        }
        Self::new(cfg.kraus)
    }

    pub fn to_config(&self) -> ChannelConfig {
        ChannelConfig {
            dim: self.dim,
            kraus: self.kraus.clone(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            dim,
            kraus: vec![SquareMatrix::identity(dim)],
        }
    }

    /// `x ↦ τ(x)·1` with Kraus operators `e_ij/√d`.
    pub fn trace(dim: usize) -> Self {
        let s = 1.0 / (dim as f64).sqrt();
        let mut kraus = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                kraus.push(SquareMatrix::unit(dim, i, j).scale_real(s));
            }
        }
        KrausChannel { dim, kraus }
    }

    /// `x ↦ U x U*`; fails unless `U` is unitary.
    pub fn unitary(u: SquareMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `T_{V_β}` of the matrix-algebra example.
    pub fn v_beta(beta: f64) -> Result<Self> {
        build_tv(&build_v_beta(beta))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[SquareMatrix] {
        &self.kraus
    }

    /// `‖Σ VᵢVᵢ* − 1‖`.
    pub fn unitality_defect(&self) -> f64 {
        let mut sum = SquareMatrix::zeros(self.dim);
        for v in &self.kraus {
            sum = &sum + &(v * &v.adjoint());
        }
        operator_norm(&(&sum - &SquareMatrix::identity(self.dim)))
    }

    pub fn apply(&self, x: &SquareMatrix) -> Result<SquareMatrix> {
        check_dim(self.dim, x.dim())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &SquareMatrix) -> SquareMatrix {
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        for v in &self.kraus {
            out += v.inner() * x.inner() * v.inner().adjoint();
        }
        SquareMatrix::from_inner(out)
    }

    /// Predual action on pairings, `P ↦ Σ Vᵢ* P Vᵢ`, so that
    /// `ψ∘T` has pairing `dual_apply(P)`.
    pub fn dual_apply(&self, pairing: &SquareMatrix) -> Result<SquareMatrix> {
        check_dim(self.dim, pairing.dim())?;
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        for v in &self.kraus {
            out += v.inner().adjoint() * pairing.inner() * v.inner();
        }
        Ok(SquareMatrix::from_inner(out))
    }

    /// `ψ ∘ T`.
    pub fn pull_back(&self, psi: &Functional) -> Result<Functional> {
        Ok(Functional::new(self.dual_apply(psi.pairing())?))
    }

    /// `Σ_{ij} e_ij ⊗ T(e_ij)`.
    pub fn choi_matrix(&self) -> SquareMatrix {
        let d = self.dim;
        let mut out = SquareMatrix::zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                let e = SquareMatrix::unit(d, i, j);
                let block = kron(&e, &self.apply_unchecked(&e));
                out = &out + &block;
            }
        }
        out
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.choi_matrix())
    }

    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.choi_min_eigenvalue() >= -tol
    }

    pub fn transfer_matrix(&self) -> TransferMatrix {
        let n = self.dim * self.dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for v in &self.kraus {
            m += v.inner().map(|z| z.conj()).kronecker(v.inner());
        }
        TransferMatrix {
            dim: self.dim,
            matrix: SquareMatrix::from_inner(m),
        }
    }

    /// Transfer matrix of the Schrödinger-picture map `ρ ↦ Σ Vᵢ* ρ Vᵢ`.
    pub fn dual_channel(&self) -> TransferMatrix {
        let n = self.dim * self.dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for v in &self.kraus {
            m += v.inner().transpose().kronecker(&v.inner().adjoint());
        }
        TransferMatrix {
            dim: self.dim,
            matrix: SquareMatrix::from_inner(m),
        }
    }

    /// `T ∘ S`, Kraus family `{Vᵢ Wⱼ}`.
    pub fn compose(&self, other: &KrausChannel) -> Result<KrausChannel> {
        check_dim(self.dim, other.dim)?;
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for v in &self.kraus {
            for w in &other.kraus {
                kraus.push(v * w);
            }
        }
        Ok(KrausChannel {
            dim: self.dim,
            kraus,
        })
    }

    /// `T ⊗ H`, Kraus family `{Vᵢ ⊗ Wⱼ}`.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for v in &self.kraus {
            for w in &other.kraus {
                kraus.push(kron(v, w));
            }
        }
        KrausChannel {
            dim: self.dim * other.dim,
            kraus,
        }
    }
}

pub fn apply(t: &KrausChannel, x: &SquareMatrix) -> Result<SquareMatrix> {
    t.apply(x)
}

pub fn choi_matrix(t: &KrausChannel) -> SquareMatrix {
    t.choi_matrix()
}

pub fn transfer_matrix(t: &KrausChannel) -> TransferMatrix {
    t.transfer_matrix()
}

pub fn dual_channel(t: &KrausChannel) -> TransferMatrix {
    t.dual_channel()
}

pub fn compose(t: &KrausChannel, s: &KrausChannel) -> Result<KrausChannel> {
    t.compose(s)
}

pub fn tensor_channel(t: &KrausChannel, h: &KrausChannel) -> KrausChannel {
    t.tensor(h)
}

/// Linear map on `M_d` as a `d² × d²` matrix on column-major vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    dim: usize,
    matrix: SquareMatrix,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &SquareMatrix) -> Result<SquareMatrix> {
        check_dim(self.dim, x.dim())?;
        let v = self.matrix.inner() * x.vec();
        Ok(SquareMatrix::from_vec(self.dim, v.as_slice()))
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        crate::algebra::eigenvalues(&self.matrix)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    pub fn compose(&self, other: &TransferMatrix) -> Result<TransferMatrix> {
        check_dim(self.dim, other.dim)?;
        Ok(TransferMatrix {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }
}

/// Normalized partial trace over the second tensor factor,
/// `ℰ(x ⊗ y) = τ(y)·x`.
pub fn conditional_expectation(z: &SquareMatrix, d: usize) -> Result<SquareMatrix> {
    if d == 0 || d * d != z.dim() {
        return Err(LabError::NotPerfectSquare(z.dim()));
    }
    let s = 1.0 / d as f64;
    Ok(SquareMatrix::from_fn(d, |i, k| {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..d {
            acc += z.get(i * d + j, k * d + j);
        }
        acc * s
    }))
}

/// Returns `d` when `n = d²`.
pub fn perfect_square_root(n: usize) -> Result<usize> {
    let d = (n as f64).sqrt().round() as usize;
    if d * d == n && d > 0 {
        Ok(d)
    } else {
        Err(LabError::NotPerfectSquare(n))
    }
}

/// The flip-type generator `e₁₂⊗e₂₁ + e₂₁⊗e₁₂` on `M₂ ⊗ M₂`.
pub fn v_beta_generator() -> SquareMatrix {
    let e12 = SquareMatrix::unit(2, 0, 1);
    let e21 = SquareMatrix::unit(2, 1, 0);
    &kron(&e12, &e21) + &kron(&e21, &e12)
}

/// `V_β = √(2/(1+cosh 2β)) · exp(β(e₁₂⊗e₂₁ + e₂₁⊗e₁₂))`.
pub fn build_v_beta(beta: f64) -> SquareMatrix {
    let coeff = (2.0 / (1.0 + (2.0 * beta).cosh())).sqrt();
    let x = v_beta_generator().scale_real(beta);
    expm(&x).scale_real(coeff)
}

/// Closed form of `exp(βX)` using `X³ = X`:
/// `1 + (cosh β − 1)·X² + sinh β·X`.
pub fn v_beta_exponential_closed_form(beta: f64) -> SquareMatrix {
    let x = v_beta_generator();
    let p = &x * &x;
    let one = SquareMatrix::identity(4);
    &(&one + &p.scale_real(beta.cosh() - 1.0)) + &x.scale_real(beta.sinh())
}

/// `T_V(x) = ℰ(V(1⊗x)V*)` for `V ∈ M_d ⊗ M_d`.
///
/// Kraus operators are the second-factor slices of `V`:
/// `K_{kj}[i, l] = V[(i,k), (j,l)] / √d`.
pub fn build_tv(v: &SquareMatrix) -> Result<KrausChannel> {
    let d = perfect_square_root(v.dim())?;
    let vv = v * &v.adjoint();
    let defect = operator_norm(&(&conditional_expectation(&vv, d)? - &SquareMatrix::identity(d)));
    if defect > TV_PRECONDITION_TOL {
        return Err(LabError::ConditionalExpectationDefect { defect });
    }
    let s = 1.0 / (d as f64).sqrt();
    let mut kraus = Vec::with_capacity(d * d);
    for k in 0..d {
        for j in 0..d {
            let op = SquareMatrix::from_fn(d, |i, l| v.get(i * d + k, j * d + l) * s);
            if op.frobenius_norm() > 0.0 {
                kraus.push(op);
            }
        }
    }
    if kraus.is_empty() {
        return Err(LabError::NoKrausOperators);
    }
    // The unitality defect equals the precondition defect above.
    KrausChannel::with_tolerance(kraus, TV_PRECONDITION_TOL)
}

/// Direct evaluation of `ℰ(V(1⊗x)V*)`, independent of the Kraus extraction.
pub fn tv_direct(v: &SquareMatrix, x: &SquareMatrix) -> Result<SquareMatrix> {
    let d = perfect_square_root(v.dim())?;
    check_dim(d, x.dim())?;
    let lifted = kron(&SquareMatrix::identity(d), x);
    conditional_expectation(&(&(v * &lifted) * &v.adjoint()), d)
}

/// `U` with `U U* = 1` within `tol`.
pub fn is_unitary(u: &SquareMatrix, tol: f64) -> bool {
    (u * &u.adjoint()).max_abs_diff(&SquareMatrix::identity(u.dim())) <= tol
}
