//! Built-in channels and seeded random unital channels.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{hermitian_eigen, SquareMatrix, C64, ONE, ZERO};
use crate::channels::KrausChannel;
use crate::error::Result;

fn ginibre<R: Rng>(d: usize, rng: &mut R) -> SquareMatrix {
    SquareMatrix::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` divided out.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> SquareMatrix {
    let qr = ginibre(d, rng).into_inner().qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                ONE
            }
        } else {
            ZERO
        }
    });
    SquareMatrix::new(q * phases).expect("finite unitary")
}

/// Unital channel with `kraus_count` Kraus operators `S^{-1/2} A_i`, where
/// the `A_i` are Ginibre and `S = Σ A_i A_i*`.
pub fn random_unital_channel<R: Rng>(d: usize, kraus_count: usize, rng: &mut R) -> Result<KrausChannel> {
    let a: Vec<SquareMatrix> = (0..kraus_count).map(|_| ginibre(d, rng)).collect();
    let mut s = SquareMatrix::zeros(d);
    for ai in &a {
        s = &s + &(ai * &ai.adjoint());
    }
    let (vals, vecs) = hermitian_eigen(&s);
    let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        vals.iter().map(|&v| C64::from(1.0 / v.sqrt())),
    ));
    let s_inv_half = SquareMatrix::new(&vecs * inv_sqrt * vecs.adjoint())?;
    KrausChannel::new(a.iter().map(|ai| &s_inv_half * ai).collect())
}

/// Classical cyclic shift on the diagonal: Kraus operators `e_{σ(i), i}`
/// with `σ(i) = i + 1 mod d`. Off-diagonal entries are killed.
pub fn periodic_channel(d: usize) -> KrausChannel {
    let kraus = (0..d)
        .map(|i| SquareMatrix::unit(d, (i + 1) % d, i))
        .collect();
    KrausChannel::new(kraus).expect("permutation Kraus family is unital")
}

/// A named channel.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub channel: KrausChannel,
}

fn entry(name: impl Into<String>, channel: KrausChannel) -> CorpusEntry {
    CorpusEntry {
        name: name.into(),
        channel,
    }
}

fn phase(turns: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * turns)
}

pub fn builtins() -> Vec<CorpusEntry> {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let unitary = |diag: &[C64]| KrausChannel::unitary(SquareMatrix::diag(diag)).expect("diagonal unitary");
    vec![
        entry("identity:2", KrausChannel::identity(2)),
        entry("identity:3", KrausChannel::identity(3)),
        entry("trace:2", KrausChannel::trace(2)),
        entry("trace:3", KrausChannel::trace(3)),
        entry("v_beta:0.5", KrausChannel::v_beta(0.5).expect("valid beta")),
        entry("v_beta:1", KrausChannel::v_beta(1.0).expect("valid beta")),
        entry("v_beta:2", KrausChannel::v_beta(2.0).expect("valid beta")),
        entry("diag(1,i)", unitary(&[ONE, C64::new(0.0, 1.0)])),
        entry("diag(1,-1)", unitary(&[ONE, -ONE])),
        entry("diag(1,golden)", unitary(&[ONE, phase(golden)])),
        entry("periodic:2", periodic_channel(2)),
        entry("periodic:3", periodic_channel(3)),
    ]
}

/// `count` random unital channels with dimensions cycling through `dims`
/// and 2–4 Kraus operators each.
pub fn random_corpus(count: usize, dims: &[usize], seed: u64) -> Result<Vec<CorpusEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let d = dims[k % dims.len()];
            let kraus = rng.random_range(2..=4);
            let ch = random_unital_channel(d, kraus, &mut rng)?;
            Ok(entry(format!("random:{k}:d{d}:k{kraus}"), ch))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{is_unitary, CHANNEL_TOL};

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..=5 {
            assert!(is_unitary(&random_unitary(d, &mut rng), 1e-12));
        }
    }

    #[test]
    fn random_channels_are_unital_and_cp() {
        for e in random_corpus(30, &[2, 3, 4], 11).unwrap() {
            assert!(e.channel.unitality_defect() < CHANNEL_TOL, "{}", e.name);
            assert!(e.channel.is_completely_positive(CHANNEL_TOL));
            let n = e.channel.kraus().len();
            assert!((2..=4).contains(&n));
        }
    }

    #[test]
    fn corpus_is_seeded() {
        let a = random_corpus(4, &[2, 3], 5).unwrap();
        let b = random_corpus(4, &[2, 3], 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.channel, y.channel);
        }
    }

    #[test]
    fn periodic_channel_action() {
        let t = periodic_channel(3);
        let x = SquareMatrix::from_fn(3, |i, j| C64::new((3 * i + j) as f64, 0.0));
        let y = t.apply(&x).unwrap();
        let expected = SquareMatrix::diag_real(&[8.0, 0.0, 4.0]);
        assert!(y.max_abs_diff(&expected) < 1e-15);
    }
}
