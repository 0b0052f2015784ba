//! Spectral route: peripheral eigenvalues of the transfer matrix, their
//! eigenspaces, and spectral projections.

use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::algebra::{eigenvalues, null_space, SquareMatrix, C64, ONE};
use crate::channels::KrausChannel;
use crate::error::Result;

/// `|λ| ≥ 1 − PERIPHERAL_TOL` counts as peripheral.
pub const PERIPHERAL_TOL: f64 = 1e-8;

/// Eigenvalues closer than this are reported as one cluster.
pub const CLUSTER_RADIUS: f64 = 1e-8;

/// Relative singular-value cutoff for eigenspace (null space) dimensions.
pub const EIGENSPACE_TOL: f64 = 1e-8;

/// A cluster of eigenvalues with its algebraic and geometric multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenCluster {
    pub value: C64,
    pub algebraic: usize,
    pub geometric: usize,
}

impl EigenCluster {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    pub fn is_one(&self) -> bool {
        (self.value - ONE).norm() <= CLUSTER_RADIUS
    }

    pub fn is_semisimple(&self) -> bool {
        self.algebraic == self.geometric
    }
}

impl Serialize for EigenCluster {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EigenCluster", 5)?;
        st.serialize_field("re", &self.value.re)?;
        st.serialize_field("im", &self.value.im)?;
        st.serialize_field("modulus", &self.modulus())?;
        st.serialize_field("multiplicity", &self.algebraic)?;
        st.serialize_field("geometric_multiplicity", &self.geometric)?;
        st.end()
    }
}

/// Full spectrum of a transfer matrix plus the peripheral clusters.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    pub peripheral: Vec<EigenCluster>,
    /// `1 − max |λ|` over non-peripheral eigenvalues (1 when there are none).
    pub gap: f64,
}

impl SpectralData {
    pub fn fixed_cluster(&self) -> Option<&EigenCluster> {
        self.peripheral.iter().find(|c| c.is_one())
    }

    /// Geometric multiplicity of eigenvalue 1.
    pub fn fixed_dim(&self) -> usize {
        self.fixed_cluster().map_or(0, |c| c.geometric)
    }

    pub fn has_jordan_defect(&self) -> bool {
        self.peripheral.iter().any(|c| !c.is_semisimple())
    }

    /// Peripheral eigenvalues repeated by algebraic multiplicity.
    pub fn peripheral_values(&self) -> Vec<C64> {
        self.peripheral
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.algebraic))
            .collect()
    }
}

/// Groups eigenvalues greedily into clusters of radius [`CLUSTER_RADIUS`].
fn cluster(values: &[C64]) -> Vec<(C64, usize)> {
    let mut clusters: Vec<(C64, Vec<C64>)> = Vec::new();
    for &z in values {
        match clusters
            .iter_mut()
            .find(|(rep, _)| (rep - z).norm() <= CLUSTER_RADIUS)
        {
            Some((_, members)) => members.push(z),
            None => clusters.push((z, vec![z])),
        }
    }
    let mut out: Vec<(C64, usize)> = clusters
        .into_iter()
        .map(|(_, m)| {
            let mean = m.iter().sum::<C64>() / m.len() as f64;
            (mean, m.len())
        })
        .collect();
    // Eigenvalue 1 first, then by argument.
    out.sort_by(|a, b| {
        let ka = ((a.0 - ONE).norm() > CLUSTER_RADIUS, a.0.arg());
        let kb = ((b.0 - ONE).norm() > CLUSTER_RADIUS, b.0.arg());
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

pub(crate) fn shifted(m: &DMatrix<C64>, z: C64) -> DMatrix<C64> {
    let mut a = m.clone();
    for k in 0..a.nrows() {
        a[(k, k)] -= z;
    }
    a
}

/// Spectral analysis of a transfer matrix.
pub fn analyze(m: &SquareMatrix, tol: f64) -> Result<SpectralData> {
    let eig = eigenvalues(m)?;
    let (peri, rest): (Vec<C64>, Vec<C64>) = eig.iter().partition(|z| z.norm() >= 1.0 - tol);
    let gap = 1.0 - rest.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let peripheral = cluster(&peri)
        .into_iter()
        .map(|(value, algebraic)| {
            let geometric = null_space(&shifted(m.inner(), value), EIGENSPACE_TOL).ncols();
            EigenCluster {
                value,
                algebraic,
                geometric,
            }
        })
        .collect();
    Ok(SpectralData {
        eigenvalues: eig,
        peripheral,
        gap,
    })
}

/// Peripheral spectrum `{λ : |λ| ≥ 1 − tol}` of the transfer matrix.
pub fn peripheral_spectrum(t: &KrausChannel, tol: f64) -> Result<Vec<EigenCluster>> {
    Ok(analyze(t.transfer_matrix().matrix(), tol)?.peripheral)
}

/// Right eigenvectors (columns) of `m` at `z`.
pub fn eigenspace(m: &DMatrix<C64>, z: C64) -> DMatrix<C64> {
    null_space(&shifted(m, z), EIGENSPACE_TOL)
}

/// Left eigenvectors of `m` at `z`, as rows: `w m = z w`.
pub fn left_eigenspace(m: &DMatrix<C64>, z: C64) -> DMatrix<C64> {
    null_space(&shifted(m, z).transpose(), EIGENSPACE_TOL).transpose()
}

/// Spectral projection `R (W R)⁻¹ W` onto the `z`-eigenspace along the
/// complementary invariant subspace. Valid for semisimple `z`.
pub fn spectral_projection(m: &DMatrix<C64>, z: C64) -> Option<DMatrix<C64>> {
    let r = eigenspace(m, z);
    if r.ncols() == 0 {
        return None;
    }
    let w = left_eigenspace(m, z);
    if w.nrows() != r.ncols() {
        return None;
    }
    let inv = (&w * &r).try_inverse()?;
    Some(&r * inv * w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::I;

    fn sorted_multiset(v: &[C64]) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = v.iter().map(|z| (z.re, z.im)).collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    #[test]
    fn diag_one_i_has_four_peripheral() {
        let t = KrausChannel::unitary(SquareMatrix::diag(&[ONE, I])).unwrap();
        let p = peripheral_spectrum(&t, PERIPHERAL_TOL).unwrap();
        let one = p.iter().find(|c| c.is_one()).unwrap();
        assert_eq!((one.algebraic, one.geometric), (2, 2));
        let all: Vec<C64> = p
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.algebraic))
            .collect();
        let got = sorted_multiset(&all);
        let expected = sorted_multiset(&[ONE, ONE, I, -I]);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_channel_peripheral_is_one() {
        let p = peripheral_spectrum(&KrausChannel::trace(3), PERIPHERAL_TOL).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0].is_one());
        assert_eq!((p[0].algebraic, p[0].geometric), (1, 1));
    }

    #[test]
    fn tv_one_peripheral_is_simple_one() {
        let t = KrausChannel::v_beta(1.0).unwrap();
        let data = analyze(t.transfer_matrix().matrix(), PERIPHERAL_TOL).unwrap();
        assert_eq!(data.peripheral.len(), 1);
        assert!(data.peripheral[0].is_one());
        assert_eq!(data.peripheral[0].algebraic, 1);
        assert!(data.gap > 0.0);
    }

    #[test]
    fn projection_of_trace_channel_is_transfer_itself() {
        let m = KrausChannel::trace(2).transfer_matrix();
        let p = spectral_projection(m.matrix().inner(), ONE).unwrap();
        let diff = (&p - m.matrix().inner()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
}
