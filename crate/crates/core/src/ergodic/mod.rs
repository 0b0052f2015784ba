//! Cesàro averages, invariant states, the four mixing tests and the
//! tensor-product verifiers.

pub mod classify;
pub mod decay;
pub mod empirical;
pub mod spectral;
pub mod tensor;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{
    check_dim, null_space, operator_norm, Functional, SquareMatrix, State, C64, ONE, ZERO,
};
use crate::channels::KrausChannel;
use crate::error::{LabError, Result};

pub use classify::{classify, classify_with, ClassifyOptions, MixingFlags, MixingReport};
pub use decay::{ConvergenceRule, DecayFit};
pub use spectral::{peripheral_spectrum, EigenCluster, PERIPHERAL_TOL};
pub use tensor::{tensor_theorem_check, tensor_theorem_check_with, ImplicationCheck, TensorReport};

/// `‖φ∘T − φ‖₁` above this rejects `φ` as an invariant state.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// Default eigenspace tolerance for [`invariant_states`].
pub const INVARIANT_STATE_TOL: f64 = 1e-8;

/// Partial Cesàro averages `A_n(x)` for `n = 1..=n_max`, with deviations
/// from `φ(x)·1` when a reference state is known.
#[derive(Clone, Debug, Serialize)]
pub struct CesaroTrail {
    pub n_max: usize,
    /// `averages[n - 1] = A_n(x)`.
    pub averages: Vec<SquareMatrix>,
    /// `φ(x)·1`.
    pub limit: Option<SquareMatrix>,
    /// `deviations[n - 1] = ‖A_n(x) − φ(x)·1‖`.
    pub deviations: Option<Vec<f64>>,
    /// `sup_{1 ≤ m < n_max} k_m / m` for subsequential averages.
    pub index_ratio: Option<f64>,
}

impl CesaroTrail {
    pub fn average(&self, n: usize) -> &SquareMatrix {
        &self.averages[n - 1]
    }

    pub fn deviation(&self, n: usize) -> Option<f64> {
        self.deviations.as_ref().map(|d| d[n - 1])
    }

    pub fn fit(&self) -> Option<DecayFit> {
        self.deviations.as_deref().map(decay::fit_trail)
    }
}

pub(crate) fn build_trail(
    n_max: usize,
    sums: Vec<SquareMatrix>,
    x: &SquareMatrix,
    phi: Option<&State>,
    index_ratio: Option<f64>,
) -> Result<CesaroTrail> {
    let averages: Vec<SquareMatrix> = sums
        .into_iter()
        .enumerate()
        .map(|(k, s)| s.scale_real(1.0 / (k + 1) as f64))
        .collect();
    let (limit, deviations) = match phi {
        Some(phi) => {
            let limit = SquareMatrix::identity(x.dim()).scale(phi.apply(x)?);
            let dev = averages
                .iter()
                .map(|a| operator_norm(&(a - &limit)))
                .collect();
            (Some(limit), Some(dev))
        }
        None => (None, None),
    };
    Ok(CesaroTrail {
        n_max,
        averages,
        limit,
        deviations,
        index_ratio,
    })
}

/// Cesàro trail measured against the unique invariant state, if there is one.
pub fn cesaro(t: &KrausChannel, x: &SquareMatrix, n_max: usize) -> Result<CesaroTrail> {
    check_dim(t.dim(), x.dim())?;
    let phi = unique_invariant_state(t);
    cesaro_against(t, x, n_max, phi.as_ref())
}

/// Cesàro trail measured against a caller-supplied state.
pub fn cesaro_against(
    t: &KrausChannel,
    x: &SquareMatrix,
    n_max: usize,
    phi: Option<&State>,
) -> Result<CesaroTrail> {
    check_dim(t.dim(), x.dim())?;
    if n_max == 0 {
        return Err(LabError::InvalidHorizon { min: 1, found: 0 });
    }
    let sums = accumulate(t, x, n_max, None);
    build_trail(n_max, sums, x, phi, None)
}

/// Partial sums `Σ_{k<n} b_k T^k(x)` for `n = 1..=n_max`, in ascending `k`.
/// Unit weights add the term unscaled, so `b ≡ 1` reproduces the unweighted
/// sums exactly.
pub(crate) fn accumulate(
    t: &KrausChannel,
    x: &SquareMatrix,
    n_max: usize,
    weights: Option<&[C64]>,
) -> Vec<SquareMatrix> {
    let mut sums = Vec::with_capacity(n_max);
    let mut term = x.clone();
    let mut sum = SquareMatrix::zeros(x.dim());
    for k in 0..n_max {
        match weights.map(|b| b[k]) {
            Some(b) if b != ONE => sum = &sum + &term.scale(b),
            _ => sum = &sum + &term,
        }
        sums.push(sum.clone());
        term = t.apply_unchecked(&term);
    }
    sums
}

fn check_increasing(k_seq: &[usize]) -> Result<()> {
    match k_seq.windows(2).position(|w| w[1] <= w[0]) {
        Some(p) => Err(LabError::NotIncreasing { position: p + 1 }),
        None => Ok(()),
    }
}

/// Subsequential averages `(1/n) Σ_{m<n} T^{k_m}(x)`.
pub fn subsequence_cesaro(
    t: &KrausChannel,
    x: &SquareMatrix,
    k_seq: &[usize],
    n_max: usize,
) -> Result<CesaroTrail> {
    let phi = unique_invariant_state(t);
    subsequence_cesaro_against(t, x, k_seq, n_max, phi.as_ref())
}

pub fn subsequence_cesaro_against(
    t: &KrausChannel,
    x: &SquareMatrix,
    k_seq: &[usize],
    n_max: usize,
    phi: Option<&State>,
) -> Result<CesaroTrail> {
    check_dim(t.dim(), x.dim())?;
    if n_max == 0 {
        return Err(LabError::InvalidHorizon { min: 1, found: 0 });
    }
    if k_seq.len() < n_max {
        return Err(LabError::SequenceTooShort {
            needed: n_max,
            found: k_seq.len(),
        });
    }
    let k_seq = &k_seq[..n_max];
    check_increasing(k_seq)?;
    let ratio = k_seq
        .iter()
        .enumerate()
        .skip(1)
        .map(|(m, &k)| k as f64 / m as f64)
        .fold(0.0, f64::max);

    let mut sums = Vec::with_capacity(n_max);
    let mut power = 0usize;
    let mut term = x.clone();
    let mut sum = SquareMatrix::zeros(x.dim());
    for &k in k_seq {
        while power < k {
            term = t.apply_unchecked(&term);
            power += 1;
        }
        sum = &sum + &term;
        sums.push(sum.clone());
    }
    build_trail(n_max, sums, x, phi, Some(ratio))
}

/// Candidate states whose images under the fixed-point projection span the
/// whole invariant subspace: `e_ii` and the pure states on `(e_i + e_j)/√2`,
/// `(e_i + i e_j)/√2`.
fn candidate_states(d: usize) -> Vec<SquareMatrix> {
    let mut out: Vec<SquareMatrix> = (0..d).map(|i| SquareMatrix::unit(d, i, i)).collect();
    for i in 0..d {
        for j in (i + 1)..d {
            for phase in [ONE, C64::new(0.0, 1.0)] {
                let mut v = vec![ZERO; d];
                v[i] = ONE;
                v[j] = phase;
                out.push(SquareMatrix::from_fn(d, |a, b| v[a] * v[b].conj() * 0.5));
            }
        }
    }
    out
}

/// Fixed-point projection of the predual map on vectorized pairings.
fn dual_fixed_projection(t: &KrausChannel, tol: f64) -> (DMatrix<C64>, usize) {
    let md = t.dual_channel().matrix().inner().clone();
    let r = null_space(&spectral::shifted(&md, ONE), tol).ncols().max(1);
    match spectral::spectral_projection(&md, ONE) {
        Some(p) => (p, r),
        None => {
            // Fall back to a long Cesàro average of the predual map.
            const STEPS: usize = 4096;
            let n = md.nrows();
            let mut acc = DMatrix::<C64>::zeros(n, n);
            let mut pow = DMatrix::<C64>::identity(n, n);
            for _ in 0..STEPS {
                acc += &pow;
                pow = &md * pow;
            }
            (acc / C64::from(STEPS as f64), r)
        }
    }
}

/// A basis of invariant states: images of simple states under the dual
/// fixed-point projection, kept greedily while linearly independent.
pub fn invariant_states(t: &KrausChannel, tol: f64) -> Vec<State> {
    let d = t.dim();
    let (proj, r) = dual_fixed_projection(t, tol);
    let mut chosen: Vec<State> = Vec::new();
    let mut columns: Vec<nalgebra::DVector<C64>> = Vec::new();
    for c in candidate_states(d) {
        if chosen.len() == r {
            break;
        }
        let img = SquareMatrix::from_vec(d, (&proj * c.vec()).as_slice()).hermitian_part();
        let tr = img.trace().re;
        if tr <= 0.5 {
            continue;
        }
        let img = img.scale_real(1.0 / tr);
        let Ok(state) = State::with_tolerance(img.clone(), INVARIANCE_TOL) else {
            continue;
        };
        let mut trial = columns.clone();
        trial.push(img.vec());
        let stacked = DMatrix::from_columns(&trial);
        let rank = stacked.ncols() - null_space(&stacked, 1e-6).ncols();
        if rank == trial.len() {
            columns = trial;
            chosen.push(state);
        }
    }
    if chosen.is_empty() {
        chosen.push(State::normalized_trace(d));
    }
    chosen
}

/// The invariant state when it is unique.
pub fn unique_invariant_state(t: &KrausChannel) -> Option<State> {
    let mut states = invariant_states(t, INVARIANT_STATE_TOL);
    if states.len() == 1 {
        states.pop()
    } else {
        None
    }
}

/// Uniform mixture of an invariant-state basis; invariant whenever each
/// basis element is.
pub fn mixture_state(states: &[State]) -> Result<State> {
    let d = states[0].dim();
    let mut p = SquareMatrix::zeros(d);
    for s in states {
        p = &p + s.pairing();
    }
    State::with_tolerance(p.scale_real(1.0 / states.len() as f64), INVARIANCE_TOL)
}

/// `‖φ∘T − φ‖₁`.
pub fn invariance_defect(t: &KrausChannel, phi: &State) -> Result<f64> {
    let pulled = t.dual_apply(phi.pairing())?;
    Ok(crate::algebra::trace_norm(&(&pulled - phi.pairing())))
}

fn check_invariant(t: &KrausChannel, phi: &State) -> Result<()> {
    let defect = invariance_defect(t, phi)?;
    if defect > INVARIANCE_TOL {
        return Err(LabError::NotInvariant { defect });
    }
    Ok(())
}

fn check_horizon(n: usize) -> Result<()> {
    if n == 0 {
        Err(LabError::InvalidHorizon { min: 1, found: 0 })
    } else {
        Ok(())
    }
}

/// `(1/n) Σ_{k<n} |ψ(T^k(x)) − ψ(1)φ(x)|`.
pub fn strict_weak_mixing_sum(
    t: &KrausChannel,
    phi: &State,
    psi: &Functional,
    x: &SquareMatrix,
    n: usize,
) -> Result<f64> {
    let d = t.dim();
    check_dim(d, phi.dim())?;
    check_dim(d, psi.dim())?;
    check_dim(d, x.dim())?;
    check_horizon(n)?;
    check_invariant(t, phi)?;
    let offset = psi.apply_unchecked(&SquareMatrix::identity(d)) * phi.functional().apply_unchecked(x);
    let mut term = x.clone();
    let mut acc = 0.0;
    for _ in 0..n {
        acc += (psi.apply_unchecked(&term) - offset).norm();
        term = t.apply_unchecked(&term);
    }
    Ok(acc / n as f64)
}

/// Correlation deviations `φ(y T^k(x)) − φ(y)φ(x)` for `k < n`.
fn correlation_deviations(
    t: &KrausChannel,
    phi: &State,
    x: &SquareMatrix,
    y: &SquareMatrix,
    n: usize,
) -> Result<Vec<C64>> {
    let d = t.dim();
    check_dim(d, phi.dim())?;
    check_dim(d, x.dim())?;
    check_dim(d, y.dim())?;
    check_horizon(n)?;
    check_invariant(t, phi)?;
    let f = phi.functional();
    let offset = f.apply_unchecked(y) * f.apply_unchecked(x);
    let mut term = x.clone();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(f.apply_unchecked(&(y * &term)) - offset);
        term = t.apply_unchecked(&term);
    }
    Ok(out)
}

/// `(1/n) Σ_{k<n} (φ(y T^k(x)) − φ(y)φ(x))`.
pub fn ergodicity_sum(
    t: &KrausChannel,
    phi: &State,
    x: &SquareMatrix,
    y: &SquareMatrix,
    n: usize,
) -> Result<C64> {
    let dev = correlation_deviations(t, phi, x, y, n)?;
    Ok(dev.iter().sum::<C64>() / n as f64)
}

/// `(1/n) Σ_{k<n} |φ(y T^k(x)) − φ(y)φ(x)|`.
pub fn weak_mixing_sum(
    t: &KrausChannel,
    phi: &State,
    x: &SquareMatrix,
    y: &SquareMatrix,
    n: usize,
) -> Result<f64> {
    let dev = correlation_deviations(t, phi, x, y, n)?;
    Ok(dev.iter().map(|z| z.norm()).sum::<f64>() / n as f64)
}

/// Verdicts of both routes for unique ergodicity.
#[derive(Clone, Debug, Serialize)]
pub struct UniqueErgodicityEvidence {
    pub spectral: bool,
    pub empirical: bool,
    pub fixed_space_dim: usize,
    pub invariant_states: usize,
    pub decay: DecayFit,
}

/// Unique ergodicity by both routes; errors when they disagree.
pub fn unique_ergodicity_test(
    t: &KrausChannel,
    n_max: usize,
) -> Result<(bool, UniqueErgodicityEvidence)> {
    let report = classify_with(
        t,
        &ClassifyOptions {
            n_max,
            ..ClassifyOptions::default()
        },
    )?;
    let ev = UniqueErgodicityEvidence {
        spectral: report.spectral_flags.uniquely_ergodic,
        empirical: report.empirical_flags.uniquely_ergodic,
        fixed_space_dim: report.fixed_space_dim,
        invariant_states: report.invariant_state.states().len(),
        decay: report.empirical_decay[classify::TEST_UE].fit,
    };
    if ev.spectral != ev.empirical {
        return Err(LabError::RouteDisagreement {
            test: classify::TEST_UE.into(),
            spectral: ev.spectral,
            empirical: ev.empirical,
        });
    }
    Ok((ev.spectral, ev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::I;
    use proptest::prelude::*;

    fn e(d: usize, i: usize, j: usize) -> SquareMatrix {
        SquareMatrix::unit(d, i, j)
    }

    #[test]
    fn identity_channel_trail_is_constant() {
        let x = SquareMatrix::from_fn(2, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let trail = cesaro(&KrausChannel::identity(2), &x, 50).unwrap();
        for n in 1..=50 {
            assert!(trail.average(n).max_abs_diff(&x) < 1e-14);
        }
        assert!(trail.deviations.is_none());
    }

    #[test]
    fn trace_channel_trail_matches_closed_form() {
        let d = 3;
        let x = SquareMatrix::from_fn(d, |i, j| C64::new((i * d + j) as f64, (i as f64) - (j as f64)));
        let tau = x.trace() / d as f64;
        let centered = &x - &SquareMatrix::identity(d).scale(tau);
        let c = operator_norm(&centered);
        let trail = cesaro(&KrausChannel::trace(d), &x, 200).unwrap();
        for n in 1..=200 {
            let expected = (&x + &SquareMatrix::identity(d).scale(tau * (n - 1) as f64))
                .scale_real(1.0 / n as f64);
            assert!(trail.average(n).max_abs_diff(&expected) < 1e-12);
            assert!((trail.deviation(n).unwrap() - c / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn tv_trail_decays_like_inverse_n() {
        let t = KrausChannel::v_beta(1.0).unwrap();
        let trail = cesaro(&t, &e(2, 0, 0), 2000).unwrap();
        let devs = trail.deviations.as_ref().unwrap();
        // Fitted constant from the tail; the whole trail must respect it.
        let c = (1000..=2000).map(|n| devs[n - 1] * n as f64).fold(0.0, f64::max);
        assert!(c > 0.0 && c < 10.0);
        for n in 100..=2000 {
            assert!(devs[n - 1] <= 1.01 * c / n as f64);
        }
        assert!(ConvergenceRule::default().converged(&trail.fit().unwrap(), 1.0));
    }

    #[test]
    fn zero_horizon_rejected() {
        let r = cesaro(&KrausChannel::trace(2), &e(2, 0, 0), 0);
        assert!(matches!(r, Err(LabError::InvalidHorizon { .. })));
    }

    #[test]
    fn cesaro_dimension_mismatch() {
        let r = cesaro(&KrausChannel::trace(2), &e(3, 0, 0), 5);
        assert!(matches!(r, Err(LabError::DimensionMismatch { .. })));
    }

    #[test]
    fn identity_channel_has_many_invariant_states() {
        let states = invariant_states(&KrausChannel::identity(2), INVARIANT_STATE_TOL);
        assert_eq!(states.len(), 4);
        assert!(states[0].pairing().max_abs_diff(&e(2, 0, 0)) < 1e-10);
        assert!(states[1].pairing().max_abs_diff(&e(2, 1, 1)) < 1e-10);
    }

    #[test]
    fn trace_and_tv_have_tau_only() {
        for t in [KrausChannel::trace(3), KrausChannel::v_beta(1.0).unwrap()] {
            let states = invariant_states(&t, INVARIANT_STATE_TOL);
            assert_eq!(states.len(), 1);
            let tau = State::normalized_trace(t.dim());
            assert!(states[0].pairing().max_abs_diff(tau.pairing()) < 1e-9);
        }
    }

    #[test]
    fn swm_sum_of_identity_is_zero() {
        let t = KrausChannel::v_beta(0.5).unwrap();
        let tau = State::normalized_trace(2);
        let psi = Functional::new(SquareMatrix::from_fn(2, |i, j| C64::new(1.0 + i as f64, j as f64)));
        for n in [1, 7, 40] {
            let s = strict_weak_mixing_sum(&t, &tau, &psi, &SquareMatrix::identity(2), n).unwrap();
            assert!(s < 1e-12, "{s}");
        }
    }

    #[test]
    fn swm_sum_trace_channel() {
        let t = KrausChannel::trace(2);
        let tau = State::normalized_trace(2);
        let psi = State::new(SquareMatrix::diag_real(&[0.8, 0.2])).unwrap();
        for n in [1, 5, 100] {
            let s = strict_weak_mixing_sum(&t, &tau, psi.functional(), &e(2, 0, 0), n).unwrap();
            assert!((s - 0.3 / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn swm_sum_rotation_is_one() {
        let t = KrausChannel::unitary(SquareMatrix::diag(&[ONE, I])).unwrap();
        let tau = State::normalized_trace(2);
        let psi = Functional::new(e(2, 1, 0));
        for n in [1, 10, 333] {
            let s = strict_weak_mixing_sum(&t, &tau, &psi, &e(2, 0, 1), n).unwrap();
            assert!((s - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn swm_sum_rejects_non_invariant_state() {
        let v = KrausChannel::v_beta(1.0).unwrap();
        let phi = State::basis_vector(2, 0);
        let r = strict_weak_mixing_sum(&v, &phi, &Functional::entry(2, 0, 0), &e(2, 0, 0), 5);
        assert!(matches!(r, Err(LabError::NotInvariant { .. })));
    }

    #[test]
    fn correlation_sums_with_identity_vanish() {
        let t = KrausChannel::v_beta(2.0).unwrap();
        let tau = State::normalized_trace(2);
        let x = SquareMatrix::from_fn(2, |i, j| C64::new(i as f64 - 0.3, j as f64 + 0.1));
        let one = SquareMatrix::identity(2);
        for n in [1, 9, 50] {
            assert!(ergodicity_sum(&t, &tau, &one, &x, n).unwrap().norm() < 1e-14);
            assert!(weak_mixing_sum(&t, &tau, &x, &one, n).unwrap() < 1e-14);
        }
    }

    #[test]
    fn correlation_sums_trace_channel() {
        let t = KrausChannel::trace(2);
        let phi = State::normalized_trace(2);
        let x = SquareMatrix::from_fn(2, |i, j| C64::new(1.0 + i as f64, 2.0 * j as f64));
        let y = SquareMatrix::from_fn(2, |i, j| C64::new(j as f64, 1.0 - i as f64));
        let px = phi.apply(&x).unwrap();
        let centered = &x - &SquareMatrix::identity(2).scale(px);
        let expected = phi.apply(&(&y * &centered)).unwrap();
        for n in [1, 4, 64] {
            let erg = ergodicity_sum(&t, &phi, &x, &y, n).unwrap();
            let wm = weak_mixing_sum(&t, &phi, &x, &y, n).unwrap();
            assert!((erg - expected / n as f64).norm() < 1e-14);
            assert!((wm - expected.norm() / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn subsequence_identity_indices_reproduce_cesaro() {
        let t = KrausChannel::v_beta(1.0).unwrap();
        let x = e(2, 0, 1);
        let direct = cesaro(&t, &x, 300).unwrap();
        let ks: Vec<usize> = (0..300).collect();
        let sub = subsequence_cesaro(&t, &x, &ks, 300).unwrap();
        for n in 1..=300 {
            assert_eq!(direct.average(n), sub.average(n));
        }
        assert_eq!(direct.deviations, sub.deviations);
    }

    #[test]
    fn subsequence_even_indices_tv_decays() {
        let t = KrausChannel::v_beta(1.0).unwrap();
        let ks: Vec<usize> = (0..3000).map(|m| 2 * m).collect();
        let trail = subsequence_cesaro(&t, &e(2, 0, 1), &ks, 3000).unwrap();
        assert_eq!(trail.index_ratio, Some(2.0));
        let fit = trail.fit().unwrap();
        assert!(ConvergenceRule::default().converged(&fit, 1.0), "{fit:?}");
    }

    #[test]
    fn subsequence_even_indices_flip_is_constant() {
        let t = KrausChannel::unitary(SquareMatrix::diag_real(&[1.0, -1.0])).unwrap();
        let ks: Vec<usize> = (0..100).map(|m| 2 * m).collect();
        let tau = State::normalized_trace(2);
        let x = e(2, 0, 1);
        let trail = subsequence_cesaro_against(&t, &x, &ks, 100, Some(&tau)).unwrap();
        for n in 1..=100 {
            assert!(trail.average(n).max_abs_diff(&x) < 1e-15);
            assert!((trail.deviation(n).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn subsequence_rejects_non_increasing() {
        let t = KrausChannel::trace(2);
        let r = subsequence_cesaro(&t, &e(2, 0, 0), &[0, 2, 2, 5], 4);
        assert!(matches!(r, Err(LabError::NotIncreasing { position: 2 })));
        let r = subsequence_cesaro(&t, &e(2, 0, 0), &[0, 2], 4);
        assert!(matches!(r, Err(LabError::SequenceTooShort { .. })));
    }

    #[test]
    fn unique_ergodicity_examples() {
        let (ue, _) = unique_ergodicity_test(&KrausChannel::identity(2), 200).unwrap();
        assert!(!ue);
        let (ue, _) = unique_ergodicity_test(&KrausChannel::trace(2), 200).unwrap();
        assert!(ue);
        let v = KrausChannel::v_beta(1.0).unwrap();
        let (ue, ev) = unique_ergodicity_test(&v.tensor(&v), 2000).unwrap();
        assert!(ue && ev.spectral && ev.empirical);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn cesaro_recursion_holds(beta in 0.1f64..3.0, re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let t = KrausChannel::v_beta(beta).unwrap();
            let x = SquareMatrix::from_fn(2, |i, j| C64::new(re + i as f64, im * j as f64));
            let trail = cesaro(&t, &x, 60).unwrap();
            prop_assert!(trail.average(1).max_abs_diff(&x) == 0.0);
            let mut power = x.clone();
            for n in 1..60 {
                power = t.apply(&power).unwrap();
                let rec = (&trail.average(n).scale_real(n as f64) + &power)
                    .scale_real(1.0 / (n + 1) as f64);
                prop_assert!(trail.average(n + 1).max_abs_diff(&rec) < 1e-12);
            }
        }
    }
}
