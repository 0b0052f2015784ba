//! Empirical route: Cesàro sums of the four mixing tests, evaluated on the
//! matrix-unit basis by iterating powers of the transfer matrix.
//!
//! With `P_k = M^k` and `w` the row of the reference state, the deviation
//! matrix `Δ_k = P_k − vec(1)·w` carries every test:
//! - column `j` of `Σ Δ_k`, reshaped, is `n·(A_n(e_j) − φ(e_j)1)`;
//! - entry `(i, j)` is `ψ_i(T^k e_j) − ψ_i(1)φ(e_j)` for the entry functionals;
//! - `(reshape(Δ_k[:, j]) Q)_{ba} = φ(e_ab T^k e_j) − φ(e_ab)φ(e_j)`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::algebra::{operator_norm, trace_norm, Functional, SquareMatrix, C64};

use super::decay::tail_samples;

/// `max |P_{k+1} − P_k|` below this freezes the power sequence.
pub const STATIONARY_TOL: f64 = 1e-13;

/// Sampled trails of the four tests, each the worst case over its pairs.
#[derive(Clone, Debug, Default, Serialize)]
pub struct EmpiricalTrails {
    pub unique_ergodicity: Vec<(usize, f64)>,
    pub ergodicity: Vec<(usize, f64)>,
    pub weak_mixing: Vec<(usize, f64)>,
    pub strict_weak_mixing: Vec<(usize, f64)>,
    pub strict_weak_mixing_random: Vec<(usize, f64)>,
    /// First `k` with `P_{k+1} = P_k` to [`STATIONARY_TOL`], if reached.
    pub stationary_at: Option<usize>,
}

/// `count` Hermitian functionals with trace-norm 1 drawn from a seeded
/// Gaussian ensemble.
pub fn random_hermitian_functionals(d: usize, count: usize, seed: u64) -> Vec<Functional> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g = SquareMatrix::from_fn(d, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            });
            let h = g.hermitian_part();
            let n = trace_norm(&h);
            Functional::new(h.scale_real(1.0 / n))
        })
        .collect()
}

/// Running sums over `k`; one instance also serves as a single-step increment.
#[derive(Clone)]
struct Sums {
    delta: DMatrix<C64>,
    abs_delta: DMatrix<f64>,
    random: Vec<DVector<f64>>,
    corr: Vec<DMatrix<C64>>,
    abs_corr: Vec<DMatrix<f64>>,
}

impl Sums {
    fn zeros(d: usize, randoms: usize) -> Self {
        let n = d * d;
        Sums {
            delta: DMatrix::zeros(n, n),
            abs_delta: DMatrix::zeros(n, n),
            random: vec![DVector::zeros(n); randoms],
            corr: vec![DMatrix::zeros(d, d); n],
            abs_corr: vec![DMatrix::zeros(d, d); n],
        }
    }

    fn add_step(&mut self, delta: &DMatrix<C64>, d: usize, q: &DMatrix<C64>, rows: &[DVector<C64>]) {
        self.delta += delta;
        self.abs_delta.zip_apply(delta, |a, z| *a += z.norm());
        for (acc, r) in self.random.iter_mut().zip(rows) {
            let v = r.transpose() * delta;
            for (a, z) in acc.iter_mut().zip(v.iter()) {
                *a += z.norm();
            }
        }
        for j in 0..d * d {
            let z = DMatrix::from_column_slice(d, d, delta.column(j).as_slice());
            let c = z * q;
            self.corr[j] += &c;
            self.abs_corr[j].zip_apply(&c, |a, z| *a += z.norm());
        }
    }

    fn plus_scaled(&self, inc: &Sums, times: f64) -> Sums {
        let c = C64::from(times);
        Sums {
            delta: &self.delta + &inc.delta * c,
            abs_delta: &self.abs_delta + &inc.abs_delta * times,
            random: self
                .random
                .iter()
                .zip(&inc.random)
                .map(|(a, b)| a + b * times)
                .collect(),
            corr: self
                .corr
                .iter()
                .zip(&inc.corr)
                .map(|(a, b)| a + b * c)
                .collect(),
            abs_corr: self
                .abs_corr
                .iter()
                .zip(&inc.abs_corr)
                .map(|(a, b)| a + b * times)
                .collect(),
        }
    }

    /// `[ue, erg, wm, swm, swm_random]` at horizon `n`.
    fn evaluate(&self, n: usize, d: usize) -> [f64; 5] {
        let inv = 1.0 / n as f64;
        let ue = (0..d * d)
            .map(|j| {
                let a = DMatrix::from_column_slice(d, d, self.delta.column(j).as_slice());
                operator_norm(&SquareMatrix::from_inner(a))
            })
            .fold(0.0, f64::max);
        let erg = self
            .corr
            .iter()
            .flat_map(|m| m.iter().map(|z| z.norm()))
            .fold(0.0, f64::max);
        let wm = self
            .abs_corr
            .iter()
            .flat_map(|m| m.iter().copied())
            .fold(0.0, f64::max);
        let swm = self.abs_delta.iter().copied().fold(0.0, f64::max);
        let swm_r = self
            .random
            .iter()
            .flat_map(|v| v.iter().copied())
            .fold(0.0, f64::max);
        [ue * inv, erg * inv, wm * inv, swm * inv, swm_r * inv]
    }
}

/// Runs the four tests against reference pairing `q` up to `n_max`.
pub fn run(
    transfer: &SquareMatrix,
    d: usize,
    q: &SquareMatrix,
    functionals: &[Functional],
    n_max: usize,
) -> EmpiricalTrails {
    let m = transfer.inner();
    let n = d * d;
    let w = Functional::new(q.clone()).row();
    let vec_one = SquareMatrix::identity(d).vec();
    let offset = &vec_one * w.transpose();
    let rows: Vec<DVector<C64>> = functionals.iter().map(|f| f.row()).collect();
    let qm = q.inner().clone();

    let samples = tail_samples(n_max);
    let mut next_sample = samples.iter().copied().peekable();
    let mut out = EmpiricalTrails::default();
    let record = |out: &mut EmpiricalTrails, n: usize, v: [f64; 5]| {
        out.unique_ergodicity.push((n, v[0]));
        out.ergodicity.push((n, v[1]));
        out.weak_mixing.push((n, v[2]));
        out.strict_weak_mixing.push((n, v[3]));
        out.strict_weak_mixing_random.push((n, v[4]));
    };

    let mut sums = Sums::zeros(d, rows.len());
    let mut power = DMatrix::<C64>::identity(n, n);
    for k in 0..n_max {
        let delta = &power - &offset;
        sums.add_step(&delta, d, &qm, &rows);
        let horizon = k + 1;
        if next_sample.peek() == Some(&horizon) {
            record(&mut out, horizon, sums.evaluate(horizon, d));
            next_sample.next();
        }
        if horizon == n_max {
            break;
        }
        let next = &power * m;
        let change = (&next - &power).iter().map(|z| z.norm()).fold(0.0, f64::max);
        power = next;
        if change <= STATIONARY_TOL {
            // Every later step adds the same increment.
            out.stationary_at = Some(horizon);
            let mut inc = Sums::zeros(d, rows.len());
            inc.add_step(&(&power - &offset), d, &qm, &rows);
            for s in next_sample.by_ref() {
                let total = sums.plus_scaled(&inc, (s - horizon) as f64);
                record(&mut out, s, total.evaluate(s, d));
            }
            break;
        }
    }
    out
}
