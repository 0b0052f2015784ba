//! Irrational rotation of the circle on trigonometric polynomials, and its
//! square acting on the torus.
//!
//! The Lebesgue pairing is coefficient extraction: `∫ z^m dλ = δ_{m,0}`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::algebra::{C64, ONE, ZERO};
use crate::error::{LabError, Result};

pub const DEFAULT_DEGREE: usize = 16;

/// Tolerance for `|ω| = 1` in point evaluations.
pub const CIRCLE_TOL: f64 = 1e-12;

/// Fractional part of `α·k`, with the product's rounding error recovered via
/// an fma so that large `k` keeps full precision.
pub fn frac_product(alpha: f64, k: i64) -> f64 {
    let kf = k as f64;
    let p = alpha * kf;
    let err = alpha.mul_add(kf, -p);
    let f = (p - p.floor()) + err;
    f - f.floor()
}

/// `exp(2πi·turns)`, represented by a float pair whose computed modulus is
/// exactly 1 (at most one ulp away from the rounded cosine and sine).
pub fn unit_phase(turns: f64) -> C64 {
    let theta = 2.0 * PI * turns;
    let (s, c) = theta.sin_cos();
    if c.hypot(s) == 1.0 {
        return C64::new(c, s);
    }
    let moves: [fn(f64) -> f64; 3] = [|x| x, f64::next_up, f64::next_down];
    for (mc, ms) in [(0, 1), (0, 2), (1, 0), (2, 0), (1, 1), (1, 2), (2, 1), (2, 2)] {
        let (cc, ss) = (moves[mc](c), moves[ms](s));
        if cc.hypot(ss) == 1.0 {
            return C64::new(cc, ss);
        }
    }
    C64::new(c, s)
}

/// `f(z) = Σ_{|k| ≤ N} f̂_k z^k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigPolynomial {
    degree: usize,
    /// `coeffs[k + N] = f̂_k`.
    coeffs: Vec<C64>,
}

impl TrigPolynomial {
    pub fn new(degree: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 2 * degree + 1 {
            return Err(LabError::DimensionMismatch {
                expected: 2 * degree + 1,
                found: coeffs.len(),
            });
        }
        Ok(TrigPolynomial { degree, coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        TrigPolynomial {
            degree,
            coeffs: vec![ZERO; 2 * degree + 1],
        }
    }

    pub fn constant(degree: usize, c: C64) -> Self {
        let mut p = Self::zero(degree);
        p.coeffs[degree] = c;
        p
    }

    /// `c·z^m`; `|m|` must not exceed the degree.
    pub fn monomial(degree: usize, m: i64, c: C64) -> Result<Self> {
        if m.unsigned_abs() as usize > degree {
            return Err(LabError::DimensionMismatch {
                expected: degree,
                found: m.unsigned_abs() as usize,
            });
        }
        let mut p = Self::zero(degree);
        p.coeffs[(m + degree as i64) as usize] = c;
        Ok(p)
    }

    pub fn from_fn(degree: usize, mut f: impl FnMut(i64) -> C64) -> Self {
        let n = degree as i64;
        TrigPolynomial {
            degree,
            coeffs: (-n..=n).map(&mut f).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `f̂_k`, zero outside the support.
    pub fn coeff(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.degree {
            ZERO
        } else {
            self.coeffs[(k + self.degree as i64) as usize]
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `(k, f̂_k)` for `k = −N..=N`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let n = self.degree as i64;
        (-n..=n).zip(self.coeffs.iter().copied())
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.terms()
            .all(|(k, c)| (self.coeff(-k) - c.conj()).norm() <= tol)
    }

    /// `Σ f̂_k z^k` at any complex `z ≠ 0`.
    pub fn evaluate(&self, z: C64) -> C64 {
        self.terms().map(|(k, c)| c * z.powi(k as i32)).sum()
    }

    /// Maximum of `|f|` over `points` equispaced points of the circle.
    pub fn grid_sup(&self, points: usize) -> f64 {
        (0..points)
            .map(|j| self.evaluate(unit_phase(j as f64 / points as f64)).norm())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &TrigPolynomial) -> TrigPolynomial {
        let deg = self.degree.max(other.degree);
        TrigPolynomial::from_fn(deg, |k| self.coeff(k) - other.coeff(k))
    }
}

/// `T_α f(z) = f(az)` with `a = exp(2πiα)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationSystem {
    pub alpha: f64,
    /// Irrationality cannot be represented in floating point; this records
    /// that the caller intends `alpha` as irrational.
    pub assumed_irrational: bool,
    pub a: C64,
    pub degree: usize,
}

impl RotationSystem {
    pub fn new(alpha: f64, assumed_irrational: bool, degree: usize) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..1.0).contains(&alpha) {
            return Err(LabError::Parse(format!("alpha must lie in [0, 1), got {alpha}")));
        }
        Ok(RotationSystem {
            alpha,
            assumed_irrational,
            a: unit_phase(alpha),
            degree,
        })
    }

    /// `α = (√5 − 1)/2`.
    pub fn golden(degree: usize) -> Self {
        Self::new((5f64.sqrt() - 1.0) / 2.0, true, degree).expect("golden conjugate in [0, 1)")
    }

    /// `α = √2 − 1`.
    pub fn sqrt2(degree: usize) -> Self {
        Self::new(2f64.sqrt() - 1.0, true, degree).expect("√2 − 1 in [0, 1)")
    }

    /// `"golden"`, `"sqrt2"`, or a decimal (flagged as not assumed irrational).
    pub fn from_name(name: &str, degree: usize) -> Result<Self> {
        match name {
            "golden" => Ok(Self::golden(degree)),
            "sqrt2" => Ok(Self::sqrt2(degree)),
            other => {
                let alpha: f64 = other
                    .parse()
                    .map_err(|_| LabError::Parse(format!("unknown alpha {other:?}")))?;
                Self::new(alpha, false, degree)
            }
        }
    }

    /// `a^k`, exactly unimodular in floating point.
    pub fn power(&self, k: i64) -> C64 {
        unit_phase(frac_product(self.alpha, k))
    }
}

/// `f̂_k ↦ a^k f̂_k`.
pub fn rotate(sys: &RotationSystem, f: &TrigPolynomial) -> TrigPolynomial {
    rotate_by(sys, f, 1)
}

/// `T_α^n f`, coefficients `f̂_k ↦ a^{kn} f̂_k`.
pub fn rotate_by(sys: &RotationSystem, f: &TrigPolynomial, n: i64) -> TrigPolynomial {
    TrigPolynomial::from_fn(f.degree(), |k| {
        if k == 0 {
            f.coeff(0)
        } else {
            sys.power(k * n) * f.coeff(k)
        }
    })
}

/// `φ_λ(f) = f̂_0`.
pub fn lebesgue_state(f: &TrigPolynomial) -> C64 {
    f.coeff(0)
}

/// `f(ω)` for `|ω| = 1`.
pub fn point_evaluation(omega: C64, f: &TrigPolynomial) -> Result<C64> {
    if (omega.norm() - 1.0).abs() > CIRCLE_TOL {
        return Err(LabError::OffCircle {
            re: omega.re,
            im: omega.im,
        });
    }
    Ok(f.evaluate(omega))
}

/// `h(f) = ∫ z f(z) dλ = f̂_{−1}`.
pub fn h_functional(f: &TrigPolynomial) -> C64 {
    f.coeff(-1)
}

/// Ratio `h(T_α f)/h(f)` measured on `f = z^{−1}`.
pub fn h_eigenvalue(sys: &RotationSystem) -> C64 {
    let f = TrigPolynomial::monomial(sys.degree.max(1), -1, ONE).expect("degree ≥ 1");
    h_functional(&rotate(sys, &f)) / h_functional(&f)
}

/// One row of the unique-ergodicity witness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UeRow {
    pub n: usize,
    pub m: i64,
    /// `‖(1/n) Σ_{k<n} T_α^k(z^m) − φ_λ(z^m)‖_∞` by explicit summation.
    pub deviation: f64,
    /// `|a^{mn} − 1| / (n |a^m − 1|)`, or 0 for `m = 0`.
    pub closed_form: f64,
}

/// Cesàro deviations of every monomial `z^m`, `|m| ≤ N`, for `n ≤ n_max`.
pub fn uniquely_ergodic_witness(sys: &RotationSystem, n_max: usize) -> Vec<UeRow> {
    let deg = sys.degree as i64;
    let mut rows = Vec::with_capacity(n_max * (2 * sys.degree + 1));
    for m in -deg..=deg {
        let mut sum = ZERO;
        let denom = (sys.power(m) - ONE).norm();
        for n in 1..=n_max {
            // The average of T^k(z^m) is c·z^m with c the running mean; its
            // sup-norm is |c|, and φ_λ(z^m) = δ_{m,0}.
            sum += sys.power(m * (n as i64 - 1));
            let avg = sum / n as f64;
            let (deviation, closed_form) = if m == 0 {
                ((avg - ONE).norm(), 0.0)
            } else {
                (
                    avg.norm(),
                    (sys.power(m * n as i64) - ONE).norm() / (n as f64 * denom),
                )
            };
            rows.push(UeRow {
                n,
                m,
                deviation,
                closed_form,
            });
        }
    }
    rows
}

/// Functional probing the strict-weak-mixing sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Probe {
    PointEvaluation(C64),
    Lebesgue,
}

impl Probe {
    fn apply(&self, f: &TrigPolynomial) -> Result<C64> {
        match *self {
            Probe::PointEvaluation(w) => point_evaluation(w, f),
            Probe::Lebesgue => Ok(lebesgue_state(f)),
        }
    }
}

/// `S_n = (1/n) Σ_{k<n} |ψ(T_α^k f) − ψ(1)φ_λ(f)|` for `n = 1..=n_max`.
pub fn swm_sums(
    sys: &RotationSystem,
    psi: Probe,
    f: &TrigPolynomial,
    n_max: usize,
) -> Result<Vec<f64>> {
    let one = TrigPolynomial::constant(f.degree(), ONE);
    let offset = psi.apply(&one)? * lebesgue_state(f);
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let term = rotate_by(sys, f, n as i64 - 1);
        acc += (psi.apply(&term)? - offset).norm();
        out.push(acc / n as f64);
    }
    Ok(out)
}

/// Failure of strict weak mixing: `ψ` = evaluation at 1, `f(z) = z`.
/// Every term is `|a^k| = 1`.
pub fn swm_failure_witness(sys: &RotationSystem, n_max: usize) -> Vec<(usize, f64)> {
    let z = TrigPolynomial::monomial(sys.degree.max(1), 1, ONE).expect("degree ≥ 1");
    swm_sums(sys, Probe::PointEvaluation(ONE), &z, n_max)
        .expect("1 lies on the circle")
        .into_iter()
        .enumerate()
        .map(|(k, s)| (k + 1, s))
        .collect()
}

/// `g(x, y) = Σ ĝ_{k,l} x^k y^l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TorusPolynomial {
    degrees: (usize, usize),
    /// Row-major in `k`, then `l`.
    coeffs: Vec<C64>,
}

impl TorusPolynomial {
    pub fn zero(n1: usize, n2: usize) -> Self {
        TorusPolynomial {
            degrees: (n1, n2),
            coeffs: vec![ZERO; (2 * n1 + 1) * (2 * n2 + 1)],
        }
    }

    fn index(&self, k: i64, l: i64) -> Option<usize> {
        let (n1, n2) = (self.degrees.0 as i64, self.degrees.1 as i64);
        if k.abs() > n1 || l.abs() > n2 {
            return None;
        }
        Some(((k + n1) * (2 * n2 + 1) + (l + n2)) as usize)
    }

    /// `c·x^k y^l`.
    pub fn monomial(n1: usize, n2: usize, k: i64, l: i64, c: C64) -> Result<Self> {
        let mut g = Self::zero(n1, n2);
        let i = g.index(k, l).ok_or(LabError::DimensionMismatch {
            expected: n1.max(n2),
            found: k.unsigned_abs().max(l.unsigned_abs()) as usize,
        })?;
        g.coeffs[i] = c;
        Ok(g)
    }

    pub fn degrees(&self) -> (usize, usize) {
        self.degrees
    }

    pub fn coeff(&self, k: i64, l: i64) -> C64 {
        self.index(k, l).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), C64)> + '_ {
        let (n1, n2) = (self.degrees.0 as i64, self.degrees.1 as i64);
        (-n1..=n1)
            .flat_map(move |k| (-n2..=n2).map(move |l| (k, l)))
            .zip(self.coeffs.iter().copied())
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.terms()
            .all(|((k, l), c)| (self.coeff(-k, -l) - c.conj()).norm() <= tol)
    }

    /// True when every coefficient except `ĝ_{0,0}` vanishes.
    pub fn is_scalar(&self) -> bool {
        self.terms().all(|((k, l), c)| (k == 0 && l == 0) || c == ZERO)
    }

    pub fn evaluate(&self, x: C64, y: C64) -> C64 {
        self.terms()
            .map(|((k, l), c)| c * x.powi(k as i32) * y.powi(l as i32))
            .sum()
    }
}

/// `(T_α ⊗ T_α) g (x, y) = g(ax, ay)`: `ĝ_{k,l} ↦ a^{k+l} ĝ_{k,l}`.
pub fn rotate_torus(sys: &RotationSystem, g: &TorusPolynomial) -> TorusPolynomial {
    let mut out = g.clone();
    for (slot, ((k, l), c)) in out.coeffs.iter_mut().zip(g.terms()) {
        *slot = sys.power(k + l) * c;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct TorusFixedPoint {
    pub g: TorusPolynomial,
    pub image: TorusPolynomial,
    /// ℓ¹ norm of the coefficients of `(T_α ⊗ T_α)g − g`, an upper bound for
    /// the sup-norm residual.
    pub residual: f64,
    pub is_scalar: bool,
    /// A non-scalar exact fixed point: the square is neither uniquely
    /// ergodic nor ergodic.
    pub certifies_non_ergodic: bool,
}

pub fn torus_fixed_point_check(sys: &RotationSystem, g: TorusPolynomial) -> TorusFixedPoint {
    let image = rotate_torus(sys, &g);
    let residual = g
        .terms()
        .zip(image.terms())
        .map(|((_, a), (_, b))| (b - a).norm())
        .sum();
    let is_scalar = g.is_scalar();
    TorusFixedPoint {
        certifies_non_ergodic: residual == 0.0 && !is_scalar,
        g,
        image,
        residual,
        is_scalar,
    }
}

/// The fixed point `g(x, y) = x/y` of the torus square.
pub fn torus_square_fixed_point(sys: &RotationSystem) -> TorusFixedPoint {
    let g = TorusPolynomial::monomial(1, 1, 1, -1, ONE).expect("degree 1");
    torus_fixed_point_check(sys, g)
}
