//! The classifier: spectral verdicts cross-checked against the empirical
//! Cesàro sums.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::algebra::{SquareMatrix, State, C64, ONE};
use crate::channels::KrausChannel;
use crate::error::Result;

use super::decay::{fit_decay, ConvergenceRule, DecayFit};
use super::empirical::{self, random_hermitian_functionals, EmpiricalTrails};
use super::spectral::{self, EigenCluster, SpectralData, PERIPHERAL_TOL};
use super::{invariant_states, mixture_state, INVARIANT_STATE_TOL};

pub const TEST_UE: &str = "unique_ergodicity";
pub const TEST_ERG: &str = "ergodicity";
pub const TEST_WM: &str = "weak_mixing";
pub const TEST_SWM: &str = "strict_weak_mixing";
pub const TEST_SWM_RANDOM: &str = "strict_weak_mixing_random";

/// Entries below this count as zero in the spectral projections.
pub const SPECTRAL_ZERO_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub n_max: usize,
    pub seed: u64,
    pub random_functionals: usize,
    pub peripheral_tol: f64,
    pub rule: ConvergenceRule,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            n_max: 2000,
            seed: 0x5eed,
            random_functionals: 20,
            peripheral_tol: PERIPHERAL_TOL,
            rule: ConvergenceRule::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MixingFlags {
    pub uniquely_ergodic: bool,
    pub ergodic: bool,
    pub weakly_mixing: bool,
    pub strictly_weak_mixing: bool,
}

impl MixingFlags {
    /// Statements of the hierarchy that these flags break.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.strictly_weak_mixing && !self.uniquely_ergodic {
            out.push("strictly weak mixing => uniquely ergodic");
        }
        if self.uniquely_ergodic && !self.ergodic {
            out.push("uniquely ergodic => ergodic");
        }
        if self.strictly_weak_mixing && !self.weakly_mixing {
            out.push("strictly weak mixing => weakly mixing");
        }
        if self.weakly_mixing && !self.ergodic {
            out.push("weakly mixing => ergodic");
        }
        out
    }
}

/// The unique invariant state, or a basis of invariant states.
#[derive(Clone, Debug)]
pub enum InvariantStateInfo {
    Unique(State),
    NonUnique(Vec<State>),
}

impl InvariantStateInfo {
    pub fn unique(&self) -> Option<&State> {
        match self {
            InvariantStateInfo::Unique(s) => Some(s),
            InvariantStateInfo::NonUnique(_) => None,
        }
    }

    pub fn states(&self) -> &[State] {
        match self {
            InvariantStateInfo::Unique(s) => std::slice::from_ref(s),
            InvariantStateInfo::NonUnique(v) => v,
        }
    }
}

impl Serialize for InvariantStateInfo {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InvariantStateInfo::Unique(state) => state.pairing().serialize(s),
            InvariantStateInfo::NonUnique(_) => s.serialize_str("non-unique"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictSource {
    #[serde(rename = "spectral")]
    Spectral,
    #[serde(rename = "empirical")]
    Empirical,
    #[serde(rename = "both-agree")]
    BothAgree,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayEvidence {
    #[serde(flatten)]
    pub fit: DecayFit,
    pub converged: bool,
    /// Sampled `(n, value)` pairs over the last half of the horizon.
    pub samples: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    pub dim: usize,
    pub n_max: usize,
    #[serde(flatten)]
    pub flags: MixingFlags,
    pub spectral_flags: MixingFlags,
    pub empirical_flags: MixingFlags,
    pub verdict_source: VerdictSource,
    pub routes_agree: bool,
    pub invariant_state: InvariantStateInfo,
    pub invariant_state_basis: Vec<SquareMatrix>,
    pub peripheral_eigenvalues: Vec<EigenCluster>,
    pub spectral_gap: f64,
    pub fixed_space_dim: usize,
    pub jordan_defect: bool,
    pub stationary_at: Option<usize>,
    pub empirical_decay: BTreeMap<String, DecayEvidence>,
}

impl MixingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Rows `n,test_name,value` of every sampled trail.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,test_name,value\n");
        for (name, ev) in &self.empirical_decay {
            for (n, v) in &ev.samples {
                let _ = writeln!(out, "{n},{name},{v:e}");
            }
        }
        out
    }
}

fn reshape(col: nalgebra::DVectorView<'_, C64>, d: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(d, d, col.as_slice())
}

fn max_abs<R: nalgebra::Dim, K: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, K>>(
    m: &nalgebra::Matrix<C64, R, K, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct SpectralVerdict {
    flags: MixingFlags,
    /// A projection could not be formed, so the spectral verdict is unreliable.
    defect: bool,
}

fn spectral_verdict(
    m: &DMatrix<C64>,
    d: usize,
    data: &SpectralData,
    states: usize,
    q: &SquareMatrix,
) -> SpectralVerdict {
    let vec_one = SquareMatrix::identity(d).vec();
    let identity_fixed = max_abs(&(m * &vec_one - &vec_one)) <= SPECTRAL_ZERO_TOL;
    let fixed_dim = data.fixed_dim();
    let uniquely_ergodic = fixed_dim == 1 && identity_fixed && states == 1;
    let strictly_weak_mixing = uniquely_ergodic
        && data.peripheral.len() == 1
        && data.peripheral[0].is_one()
        && data.peripheral[0].algebraic == 1;

    let mut defect = data.has_jordan_defect();
    let qm = q.inner();
    let w = crate::algebra::Functional::new(q.clone()).row();
    let ergodic = match spectral::spectral_projection(m, ONE) {
        Some(p1) => (0..d * d).all(|j| {
            let mut e = reshape(p1.column(j), d);
            for i in 0..d {
                e[(i, i)] -= w[j];
            }
            max_abs(&(e * qm)) <= SPECTRAL_ZERO_TOL
        }),
        None => {
            defect = true;
            false
        }
    };
    let mut weakly_mixing = ergodic;
    for c in data.peripheral.iter().filter(|c| !c.is_one()) {
        match spectral::spectral_projection(m, c.value) {
            Some(pz) => {
                if (0..d * d).any(|j| max_abs(&(reshape(pz.column(j), d) * qm)) > SPECTRAL_ZERO_TOL) {
                    weakly_mixing = false;
                }
            }
            None => {
                defect = true;
                weakly_mixing = false;
            }
        }
    }
    SpectralVerdict {
        flags: MixingFlags {
            uniquely_ergodic,
            ergodic,
            weakly_mixing,
            strictly_weak_mixing,
        },
        defect,
    }
}

fn evidence(samples: Vec<(usize, f64)>, rule: &ConvergenceRule) -> DecayEvidence {
    let fit = fit_decay(&samples);
    DecayEvidence {
        fit,
        converged: rule.converged(&fit, 1.0),
        samples,
    }
}

pub fn classify(t: &KrausChannel, n_max: usize) -> Result<MixingReport> {
    classify_with(
        t,
        &ClassifyOptions {
            n_max,
            ..ClassifyOptions::default()
        },
    )
}

pub fn classify_with(t: &KrausChannel, opts: &ClassifyOptions) -> Result<MixingReport> {
    if opts.n_max == 0 {
        return Err(crate::error::LabError::InvalidHorizon { min: 1, found: 0 });
    }
    let d = t.dim();
    let transfer = t.transfer_matrix();
    let m = transfer.matrix().inner();
    let data = spectral::analyze(transfer.matrix(), opts.peripheral_tol)?;

    let states = invariant_states(t, INVARIANT_STATE_TOL);
    let info = if states.len() == 1 {
        InvariantStateInfo::Unique(states[0].clone())
    } else {
        InvariantStateInfo::NonUnique(states.clone())
    };
    let reference = match &info {
        InvariantStateInfo::Unique(s) => s.clone(),
        InvariantStateInfo::NonUnique(v) => mixture_state(v)?,
    };

    let sv = spectral_verdict(m, d, &data, states.len(), reference.pairing());

    let functionals = random_hermitian_functionals(d, opts.random_functionals, opts.seed);
    let EmpiricalTrails {
        unique_ergodicity,
        ergodicity,
        weak_mixing,
        strict_weak_mixing,
        strict_weak_mixing_random,
        stationary_at,
    } = empirical::run(transfer.matrix(), d, reference.pairing(), &functionals, opts.n_max);

    let mut decay = BTreeMap::new();
    decay.insert(TEST_UE.to_string(), evidence(unique_ergodicity, &opts.rule));
    decay.insert(TEST_ERG.to_string(), evidence(ergodicity, &opts.rule));
    decay.insert(TEST_WM.to_string(), evidence(weak_mixing, &opts.rule));
    decay.insert(TEST_SWM.to_string(), evidence(strict_weak_mixing, &opts.rule));
    decay.insert(
        TEST_SWM_RANDOM.to_string(),
        evidence(strict_weak_mixing_random, &opts.rule),
    );
    let empirical_flags = MixingFlags {
        uniquely_ergodic: decay[TEST_UE].converged,
        ergodic: decay[TEST_ERG].converged,
        weakly_mixing: decay[TEST_WM].converged,
        strictly_weak_mixing: decay[TEST_SWM].converged && decay[TEST_SWM_RANDOM].converged,
    };

    let routes_agree = sv.flags == empirical_flags;
    let (flags, verdict_source) = if sv.defect {
        (empirical_flags, VerdictSource::Empirical)
    } else if routes_agree {
        (sv.flags, VerdictSource::BothAgree)
    } else {
        (sv.flags, VerdictSource::Spectral)
    };

    Ok(MixingReport {
        dim: d,
        n_max: opts.n_max,
        flags,
        spectral_flags: sv.flags,
        empirical_flags,
        verdict_source,
        routes_agree,
        invariant_state_basis: states.iter().map(|s| s.pairing().clone()).collect(),
        invariant_state: info,
        fixed_space_dim: data.fixed_dim(),
        jordan_defect: data.has_jordan_defect(),
        spectral_gap: data.gap,
        peripheral_eigenvalues: data.peripheral,
        stationary_at,
        empirical_decay: decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{I, ONE};

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    #[test]
    fn identity_channel_is_not_ergodic() {
        for d in [2, 3] {
            let r = classify(&KrausChannel::identity(d), 200).unwrap();
            assert!(!r.flags.uniquely_ergodic);
            assert!(!r.flags.ergodic);
            assert!(!r.flags.weakly_mixing);
            assert!(!r.flags.strictly_weak_mixing);
            assert!(r.invariant_state.unique().is_none());
            assert_eq!(r.verdict_source, VerdictSource::BothAgree);
        }
    }

    #[test]
    fn tv_is_strictly_weak_mixing() {
        let r = classify(&KrausChannel::v_beta(1.0).unwrap(), 10_000).unwrap();
        let all = MixingFlags {
            uniquely_ergodic: true,
            ergodic: true,
            weakly_mixing: true,
            strictly_weak_mixing: true,
        };
        assert_eq!(r.spectral_flags, all);
        assert_eq!(r.empirical_flags, all);
        assert_eq!(r.verdict_source, VerdictSource::BothAgree);
        let tau = State::normalized_trace(2);
        assert!(r.invariant_state.unique().unwrap().pairing().max_abs_diff(tau.pairing()) < 1e-9);
    }

    #[test]
    fn irrational_phase_is_not_uniquely_ergodic() {
        let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * golden());
        let t = KrausChannel::unitary(SquareMatrix::diag(&[ONE, phase])).unwrap();
        let r = classify(&t, 2000).unwrap();
        assert!(!r.flags.uniquely_ergodic);
        assert_eq!(r.fixed_space_dim, 2);
        assert!(r.routes_agree);
    }

    #[test]
    fn diag_one_i_flags() {
        let t = KrausChannel::unitary(SquareMatrix::diag(&[ONE, I])).unwrap();
        let r = classify(&t, 2000).unwrap();
        assert!(!r.flags.uniquely_ergodic && !r.flags.strictly_weak_mixing);
        assert!(r.routes_agree, "{:?} vs {:?}", r.spectral_flags, r.empirical_flags);
        assert_eq!(r.peripheral_eigenvalues.len(), 3);
    }

    #[test]
    fn report_serializes_with_expected_fields() {
        let r = classify(&KrausChannel::trace(2), 1000).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["strictly_weak_mixing"], true);
        assert_eq!(v["verdict_source"], "both-agree");
        assert_eq!(v["peripheral_eigenvalues"][0]["multiplicity"], 1);
        assert!(v["empirical_decay"]["strict_weak_mixing"]["slope"].is_number());
        let id = classify(&KrausChannel::identity(2), 50).unwrap();
        let v: serde_json::Value = serde_json::from_str(&id.to_json()).unwrap();
        assert_eq!(v["invariant_state"], "non-unique");
        assert_eq!(v["invariant_state_basis"].as_array().unwrap().len(), 4);
        let csv = id.to_csv();
        assert!(csv.starts_with("n,test_name,value\n"));
        assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 3));
    }

    #[test]
    fn violations_detected() {
        let f = MixingFlags {
            uniquely_ergodic: false,
            ergodic: false,
            weakly_mixing: true,
            strictly_weak_mixing: true,
        };
        assert_eq!(f.violations().len(), 2);
        assert!(MixingFlags::default().violations().is_empty());
    }
}
