//! Weighted Cesàro averages `(1/n) Σ_{k<n} b_k T^k(x)` with weights drawn
//! from orbits of a rotation system.

use serde::Serialize;

use crate::algebra::{check_dim, operator_norm, SquareMatrix, C64, ONE};
use crate::channels::KrausChannel;
use crate::ergodic::classify::{classify_with, ClassifyOptions};
use crate::ergodic::decay::{fit_trail, tail_samples, ConvergenceRule, DecayFit};
use crate::ergodic::{accumulate, build_trail, unique_invariant_state};
use crate::error::{LabError, Result};
use crate::rotation::{lebesgue_state, point_evaluation, rotate_by, RotationSystem, TrigPolynomial, CIRCLE_TOL};

/// Orbit data `(T₁, f₀, ω₀)` producing weights `b_k = (T₁^k f₀)(ω₀)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesicovitchGenerator {
    pub system: RotationSystem,
    pub f0: TrigPolynomial,
    pub omega0: C64,
}

impl BesicovitchGenerator {
    pub fn new(system: RotationSystem, f0: TrigPolynomial, omega0: C64) -> Result<Self> {
        if !system.assumed_irrational {
            return Err(LabError::GeneratorNotUniquelyErgodic {
                alpha: system.alpha,
            });
        }
        if (omega0.norm() - 1.0).abs() > CIRCLE_TOL {
            return Err(LabError::OffCircle {
                re: omega0.re,
                im: omega0.im,
            });
        }
        Ok(BesicovitchGenerator {
            system,
            f0,
            omega0,
        })
    }

    /// `f₀ = z^m`, `ω₀ = 1`.
    pub fn monomial(system: RotationSystem, m: i64) -> Result<Self> {
        let f0 = TrigPolynomial::monomial(m.unsigned_abs().max(1) as usize, m, ONE)?;
        Self::new(system, f0, ONE)
    }

    /// Parses `zm:<m>` as [`Self::monomial`] over the golden rotation.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let m = spec
            .strip_prefix("zm:")
            .and_then(|m| m.parse::<i64>().ok())
            .ok_or_else(|| LabError::Parse(format!("unknown generator {spec:?}")))?;
        Self::monomial(RotationSystem::golden(m.unsigned_abs().max(1) as usize), m)
    }

    /// `(T₁^k f₀)(ω₀)`.
    pub fn orbit_value(&self, k: usize) -> C64 {
        let f = rotate_by(&self.system, &self.f0, k as i64);
        point_evaluation(self.omega0, &f).expect("ω₀ checked on construction")
    }

    /// `ν(f₀)`, the Lebesgue mean of `f₀`.
    pub fn mean(&self) -> C64 {
        lebesgue_state(&self.f0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightProvenance {
    Generator,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightSequence {
    pub values: Vec<C64>,
    /// `sup |b_k|`.
    pub bound: f64,
    pub provenance: WeightProvenance,
}

impl WeightSequence {
    fn build(values: Vec<C64>, provenance: WeightProvenance) -> Result<Self> {
        if let Some(k) = values.iter().position(|b| !(b.re.is_finite() && b.im.is_finite())) {
            return Err(LabError::Parse(format!("weight b_{k} is not finite")));
        }
        let bound = values.iter().map(|b| b.norm()).fold(0.0, f64::max);
        Ok(WeightSequence {
            values,
            bound,
            provenance,
        })
    }

    pub fn explicit(values: Vec<C64>) -> Result<Self> {
        Self::build(values, WeightProvenance::Explicit)
    }

    pub fn ones(n: usize) -> Self {
        Self::build(vec![ONE; n], WeightProvenance::Explicit).expect("finite")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() < n {
            return Err(LabError::WeightsTooShort {
                needed: n,
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

pub fn weights_from_generator(gen: &BesicovitchGenerator, n: usize) -> WeightSequence {
    let values = (0..n).map(|k| gen.orbit_value(k)).collect();
    WeightSequence::build(values, WeightProvenance::Generator).expect("unimodular orbit of a polynomial")
}

/// Running distances `D_j = (1/j) Σ_{k<j} |b_k − (T₁^k f₀)(ω₀)|`, `j = 1..=n`.
pub fn besicovitch_profile(b: &WeightSequence, gen: &BesicovitchGenerator, n: usize) -> Result<Vec<f64>> {
    b.check_len(n)?;
    let mut acc = 0.0;
    Ok((0..n)
        .map(|k| {
            acc += (b.values[k] - gen.orbit_value(k)).norm();
            acc / (k + 1) as f64
        })
        .collect())
}

/// `D_n`.
pub fn besicovitch_distance(b: &WeightSequence, gen: &BesicovitchGenerator, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(LabError::InvalidHorizon { min: 1, found: 0 });
    }
    Ok(*besicovitch_profile(b, gen, n)?.last().expect("n ≥ 1"))
}

/// Largest `D_j` over the last half of the horizon, standing in for the
/// `limsup`.
pub fn besicovitch_limsup(b: &WeightSequence, gen: &BesicovitchGenerator, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(LabError::InvalidHorizon { min: 1, found: 0 });
    }
    let profile = besicovitch_profile(b, gen, n)?;
    Ok(profile[(n - 1) / 2..].iter().copied().fold(0.0, f64::max))
}

/// `‖W_n − W_m‖` on a dyadic pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CauchyIncrement {
    pub n: usize,
    pub m: usize,
    pub increment: f64,
}

/// Where the weighted averages must end up: `center ± radius` in norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesicovitchBand {
    /// Empirical `limsup` distance of the weights from the generator orbit.
    pub epsilon: f64,
    pub center: SquareMatrix,
    /// `ε · ‖x‖`.
    pub radius: f64,
    /// Largest `‖W_n − center‖` over the last half of the horizon.
    pub tail_max_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightedTrail {
    pub n_max: usize,
    /// `averages[n - 1] = W_n`.
    pub averages: Vec<SquareMatrix>,
    /// `‖W_n‖`.
    pub norms: Vec<f64>,
    pub cauchy: Vec<CauchyIncrement>,
    /// Classifier verdict; the convergence guarantee only applies when true.
    pub strictly_weak_mixing: bool,
    pub limit: Option<SquareMatrix>,
    /// `‖W_n − limit‖`.
    pub residuals: Option<Vec<f64>>,
    pub band: Option<BesicovitchBand>,
}

impl WeightedTrail {
    pub fn average(&self, n: usize) -> &SquareMatrix {
        &self.averages[n - 1]
    }

    /// Fit of the residuals when a limit is known, else of `‖W_n‖`.
    pub fn fit(&self) -> DecayFit {
        fit_trail(self.residuals.as_deref().unwrap_or(&self.norms))
    }

    pub fn norm_fit(&self) -> DecayFit {
        fit_trail(&self.norms)
    }

    pub fn converged(&self, rule: &ConvergenceRule, scale: f64) -> bool {
        rule.converged(&self.fit(), scale)
    }

    /// Whether every dyadic pair with both indices `≥ n0` has increment at
    /// most `bound`.
    pub fn cauchy_holds(&self, n0: usize, bound: f64) -> bool {
        self.cauchy
            .iter()
            .filter(|c| c.n >= n0 && c.m >= n0)
            .all(|c| c.increment <= bound)
    }

    fn set_limit(&mut self, limit: SquareMatrix) {
        self.residuals = Some(
            self.averages
                .iter()
                .map(|w| operator_norm(&(w - &limit)))
                .collect(),
        );
        self.limit = Some(limit);
    }
}

fn dyadic_grid(n_max: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |n| n.checked_mul(2))
        .take_while(|&n| n <= n_max)
        .collect();
    if grid.last() != Some(&n_max) {
        grid.push(n_max);
    }
    grid
}

fn is_strictly_weak_mixing(t: &KrausChannel) -> Result<bool> {
    Ok(classify_with(t, &ClassifyOptions::default())?.flags.strictly_weak_mixing)
}

fn weighted_trail(
    t: &KrausChannel,
    x: &SquareMatrix,
    b: &WeightSequence,
    n_max: usize,
    strictly_weak_mixing: bool,
) -> Result<WeightedTrail> {
    check_dim(t.dim(), x.dim())?;
    if n_max == 0 {
        return Err(LabError::InvalidHorizon { min: 1, found: 0 });
    }
    b.check_len(n_max)?;
    let sums = accumulate(t, x, n_max, Some(&b.values[..n_max]));
    let averages = build_trail(n_max, sums, x, None, None)?.averages;
    let norms = averages.iter().map(operator_norm).collect();
    let grid = dyadic_grid(n_max);
    let mut cauchy = Vec::new();
    for (i, &n) in grid.iter().enumerate() {
        for &m in &grid[i + 1..] {
            cauchy.push(CauchyIncrement {
                n,
                m,
                increment: operator_norm(&(&averages[n - 1] - &averages[m - 1])),
            });
        }
    }
    Ok(WeightedTrail {
        n_max,
        averages,
        norms,
        cauchy,
        strictly_weak_mixing,
        limit: None,
        residuals: None,
        band: None,
    })
}

/// Weighted trail for arbitrary weights, with the classifier verdict recorded.
pub fn weighted_cesaro(
    t: &KrausChannel,
    x: &SquareMatrix,
    b: &WeightSequence,
    n_max: usize,
) -> Result<WeightedTrail> {
    let swm = is_strictly_weak_mixing(t)?;
    weighted_trail(t, x, b, n_max, swm)
}

fn oracle(t: &KrausChannel, gen: &BesicovitchGenerator, x: &SquareMatrix) -> Result<SquareMatrix> {
    let phi = unique_invariant_state(t).ok_or_else(|| LabError::NotStrictlyWeakMixing {
        what: "limit_oracle".into(),
    })?;
    Ok(SquareMatrix::identity(x.dim()).scale(gen.mean() * phi.apply(x)?))
}

/// `ν(f₀) φ(x) 1`.
pub fn limit_oracle(t: &KrausChannel, gen: &BesicovitchGenerator, x: &SquareMatrix) -> Result<SquareMatrix> {
    check_dim(t.dim(), x.dim())?;
    if !is_strictly_weak_mixing(t)? {
        return Err(LabError::NotStrictlyWeakMixing {
            what: "limit_oracle".into(),
        });
    }
    oracle(t, gen, x)
}

/// Weighted trail for weights `b` (the generator orbit itself when `None`),
/// with residuals against the oracle limit and the band `ε‖x‖` around it
/// when the channel is strictly weak mixing.
pub fn weighted_run(
    t: &KrausChannel,
    x: &SquareMatrix,
    gen: &BesicovitchGenerator,
    b: Option<&WeightSequence>,
    n_max: usize,
) -> Result<WeightedTrail> {
    let own;
    let b = match b {
        Some(b) => b,
        None => {
            own = weights_from_generator(gen, n_max);
            &own
        }
    };
    let swm = is_strictly_weak_mixing(t)?;
    let mut trail = weighted_trail(t, x, b, n_max, swm)?;
    if swm {
        let center = oracle(t, gen, x)?;
        trail.set_limit(center.clone());
        let epsilon = besicovitch_limsup(b, gen, n_max)?;
        let residuals = trail.residuals.as_ref().expect("limit set");
        let tail_max_residual = tail_samples(n_max)
            .into_iter()
            .map(|n| residuals[n - 1])
            .fold(0.0, f64::max);
        trail.band = Some(BesicovitchBand {
            epsilon,
            center,
            radius: epsilon * operator_norm(x),
            tail_max_residual,
        });
    }
    Ok(trail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic::cesaro;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn golden_zm(m: i64) -> BesicovitchGenerator {
        BesicovitchGenerator::monomial(RotationSystem::golden(4), m).unwrap()
    }

    fn v1() -> KrausChannel {
        KrausChannel::v_beta(1.0).unwrap()
    }

    #[test]
    fn constant_generator_gives_ones() {
        let gen = BesicovitchGenerator::new(
            RotationSystem::golden(2),
            TrigPolynomial::constant(2, ONE),
            ONE,
        )
        .unwrap();
        let b = weights_from_generator(&gen, 50);
        assert!(b.values.iter().all(|&v| v == ONE));
        assert_eq!(b.provenance, WeightProvenance::Generator);
    }

    #[test]
    fn monomial_generator_gives_powers_exactly() {
        for m in [1, 2, -3] {
            let gen = golden_zm(m);
            let b = weights_from_generator(&gen, 500);
            for (k, &v) in b.values.iter().enumerate() {
                assert_eq!(v, gen.system.power(k as i64 * m));
            }
            assert_eq!(b.bound, 1.0);
        }
    }

    #[test]
    fn sum_generator_is_linear() {
        let sys = RotationSystem::golden(2);
        let f0 = TrigPolynomial::from_fn(2, |k| if k == 1 || k == 2 { ONE } else { C64::new(0.0, 0.0) });
        let gen = BesicovitchGenerator::new(sys.clone(), f0, ONE).unwrap();
        let b = weights_from_generator(&gen, 200);
        for (k, v) in b.values.iter().enumerate() {
            let k = k as i64;
            assert!((v - (sys.power(k) + sys.power(2 * k))).norm() < 1e-14);
        }
    }

    #[test]
    fn generator_rejects_bad_inputs() {
        let rational = RotationSystem::new(0.25, false, 2).unwrap();
        assert!(matches!(
            BesicovitchGenerator::monomial(rational, 1),
            Err(LabError::GeneratorNotUniquelyErgodic { .. })
        ));
        let f0 = TrigPolynomial::constant(1, ONE);
        assert!(matches!(
            BesicovitchGenerator::new(RotationSystem::golden(1), f0, C64::new(1.1, 0.0)),
            Err(LabError::OffCircle { .. })
        ));
        assert!(BesicovitchGenerator::from_spec("zm:2").is_ok());
        assert!(BesicovitchGenerator::from_spec("z:2").is_err());
    }

    #[test]
    fn distance_to_own_orbit_is_zero() {
        let gen = golden_zm(1);
        let b = weights_from_generator(&gen, 300);
        assert_eq!(besicovitch_distance(&b, &gen, 300).unwrap(), 0.0);
        assert!(matches!(
            besicovitch_distance(&b, &gen, 301),
            Err(LabError::WeightsTooShort { needed: 301, found: 300 })
        ));
    }

    #[test]
    fn noisy_weights_stay_within_half_epsilon() {
        let gen = golden_zm(1);
        let eps = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values = (0..1000)
            .map(|k| {
                let r: f64 = rand::Rng::random_range(&mut rng, 0.0..eps / 2.0);
                let th: f64 = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
                gen.orbit_value(k) + C64::from_polar(r, th)
            })
            .collect();
        let b = WeightSequence::explicit(values).unwrap();
        assert!(besicovitch_limsup(&b, &gen, 1000).unwrap() <= eps / 2.0);
    }

    #[test]
    fn ones_against_rotation_tend_to_mean_chord() {
        // ∫ |1 − e^{iθ}| dθ/2π by midpoint quadrature.
        let q = 100_000;
        let oracle: f64 = (0..q)
            .map(|j| {
                let th = std::f64::consts::TAU * (j as f64 + 0.5) / q as f64;
                (ONE - C64::from_polar(1.0, th)).norm()
            })
            .sum::<f64>()
            / q as f64;
        assert!((oracle - 4.0 / std::f64::consts::PI).abs() < 1e-9);
        let gen = golden_zm(1);
        let d = besicovitch_distance(&WeightSequence::ones(20_000), &gen, 20_000).unwrap();
        assert!((d - oracle).abs() < 1e-3, "{d} vs {oracle}");
    }

    #[test]
    fn unit_weights_reproduce_cesaro_bitwise() {
        let t = v1();
        let x = SquareMatrix::unit(2, 0, 1);
        let plain = cesaro(&t, &x, 500).unwrap();
        let w = weighted_cesaro(&t, &x, &WeightSequence::ones(500), 500).unwrap();
        assert!(w.strictly_weak_mixing);
        for n in 1..=500 {
            assert_eq!(plain.average(n), w.average(n));
        }
    }

    #[test]
    fn rotation_weights_kill_v1_averages() {
        let t = v1();
        for m in [1, 2] {
            let gen = golden_zm(m);
            for x in [SquareMatrix::unit(2, 0, 0), SquareMatrix::unit(2, 1, 0)] {
                let trail = weighted_run(&t, &x, &gen, None, 10_000).unwrap();
                let limit = trail.limit.as_ref().unwrap();
                assert_eq!(limit, &SquareMatrix::zeros(2));
                let fit = trail.norm_fit();
                assert!(fit.final_value < 1e-2 && fit.slope <= -0.9, "{fit:?}");
                let band = trail.band.as_ref().unwrap();
                assert_eq!(band.epsilon, 0.0);
                assert!(band.tail_max_residual < 1e-2);
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let t = v1();
        let x = SquareMatrix::diag_real(&[2.0, 4.0]);
        let sys = RotationSystem::golden(1);
        let c = BesicovitchGenerator::new(sys.clone(), TrigPolynomial::constant(1, ONE), ONE).unwrap();
        let three_plus_z = TrigPolynomial::from_fn(1, |k| match k {
            0 => C64::new(3.0, 0.0),
            1 => ONE,
            _ => C64::new(0.0, 0.0),
        });
        let g = BesicovitchGenerator::new(sys, three_plus_z, ONE).unwrap();
        let diff = |a: &SquareMatrix, b: &SquareMatrix| a.max_abs_diff(b);
        assert!(diff(&limit_oracle(&t, &c, &x).unwrap(), &SquareMatrix::identity(2).scale_real(3.0)) < 1e-12);
        assert!(diff(&limit_oracle(&t, &g, &x).unwrap(), &SquareMatrix::identity(2).scale_real(9.0)) < 1e-12);
        assert_eq!(limit_oracle(&t, &golden_zm(2), &x).unwrap(), SquareMatrix::zeros(2));
        assert!(matches!(
            limit_oracle(&KrausChannel::identity(2), &c, &SquareMatrix::identity(2)),
            Err(LabError::NotStrictlyWeakMixing { .. })
        ));
    }

    #[test]
    fn generator_weights_converge_to_oracle() {
        let t = v1();
        let x = SquareMatrix::from_fn(2, |i, j| C64::new(1.0 + i as f64, j as f64));
        let sys = RotationSystem::golden(1);
        let f0 = TrigPolynomial::from_fn(1, |k| match k {
            0 => C64::new(0.5, 0.0),
            -1 => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        });
        let gen = BesicovitchGenerator::new(sys, f0, C64::from_polar(1.0, 0.3)).unwrap();
        let trail = weighted_run(&t, &x, &gen, None, 10_000).unwrap();
        let b = weights_from_generator(&gen, 1);
        let scale = operator_norm(&x) * b.bound.max(1.5);
        assert!(trail.residuals.unwrap()[9_999] < 1e-2 * scale);
    }

    #[test]
    fn cauchy_increments_shrink() {
        let t = v1();
        let x = SquareMatrix::unit(2, 0, 0);
        let gen = golden_zm(1);
        let trail = weighted_run(&t, &x, &gen, None, 4096).unwrap();
        let bound = 0.01 * (2.0 * operator_norm(&x) + 1.0);
        assert!(trail.cauchy_holds(1024, bound));
        assert!(!trail.cauchy_holds(1, bound));
    }

    #[test]
    fn identity_channel_weighted_by_rotation() {
        let x = SquareMatrix::unit(2, 0, 0);
        let gen = golden_zm(1);
        let b = weights_from_generator(&gen, 2000);
        let trail = weighted_cesaro(&KrausChannel::identity(2), &x, &b, 2000).unwrap();
        assert!(!trail.strictly_weak_mixing);
        for n in [10, 100, 2000] {
            let geo: C64 = b.values[..n].iter().sum::<C64>() / n as f64;
            assert!(trail.average(n).max_abs_diff(&x.scale(geo)) < 1e-12);
        }
        assert!(trail.norm_fit().final_value < 1e-2);
    }

    #[test]
    fn short_weights_rejected() {
        let r = weighted_cesaro(&v1(), &SquareMatrix::identity(2), &WeightSequence::ones(5), 6);
        assert!(matches!(r, Err(LabError::WeightsTooShort { needed: 6, found: 5 })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn linear_in_weights(
            alpha in (-2.0f64..2.0, -2.0f64..2.0),
            beta in (-2.0f64..2.0, -2.0f64..2.0),
            seed in 0u64..1000,
        ) {
            let (alpha, beta) = (C64::new(alpha.0, alpha.1), C64::new(beta.0, beta.1));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = |n: usize| -> Vec<C64> {
                (0..n).map(|_| C64::new(rand::Rng::random_range(&mut rng, -1.0..1.0), rand::Rng::random_range(&mut rng, -1.0..1.0))).collect()
            };
            let n = 60;
            let (bv, cv) = (draw(n), draw(n));
            let mix: Vec<C64> = bv.iter().zip(&cv).map(|(b, c)| alpha * b + beta * c).collect();
            let t = v1();
            let x = SquareMatrix::from_fn(2, |i, j| C64::new(i as f64 - 0.5, j as f64));
            let run = |v: Vec<C64>| weighted_trail(&t, &x, &WeightSequence::explicit(v).unwrap(), n, true).unwrap();
            let (wb, wc, wm) = (run(bv), run(cv), run(mix));
            for k in 1..=n {
                let lhs = wm.average(k);
                let rhs = &wb.average(k).scale(alpha) + &wc.average(k).scale(beta);
                prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }
}
