//! Verifiers for the tensor-product theorems.
//!
//! In finite dimensions the dual of `A ⊗ B` is `A* ⊗ B*`, so every
//! implication below is checked as a biconditional.

use serde::Serialize;

use crate::channels::KrausChannel;
use crate::error::{LabError, Result};

use super::classify::{classify_with, ClassifyOptions, MixingReport};

#[derive(Clone, Debug, Serialize)]
pub struct ImplicationCheck {
    pub statement: String,
    pub holds: bool,
    pub evidence: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorReport {
    pub first: MixingReport,
    pub second: MixingReport,
    pub product: MixingReport,
    /// Present when both factors are the same channel; then `product` is
    /// `T ⊗ T`.
    pub is_square: bool,
    pub checks: Vec<ImplicationCheck>,
}

fn check(statement: &str, holds: bool, evidence: String) -> ImplicationCheck {
    ImplicationCheck {
        statement: statement.to_string(),
        holds,
        evidence,
    }
}

pub fn tensor_theorem_check(t: &KrausChannel, h: &KrausChannel, n_max: usize) -> Result<TensorReport> {
    tensor_theorem_check_with(
        t,
        h,
        &ClassifyOptions {
            n_max,
            ..ClassifyOptions::default()
        },
    )
}

pub fn tensor_theorem_check_with(
    t: &KrausChannel,
    h: &KrausChannel,
    opts: &ClassifyOptions,
) -> Result<TensorReport> {
    let first = classify_with(t, opts)?;
    let is_square = t == h;
    let second = if is_square {
        first.clone()
    } else {
        classify_with(h, opts)?
    };
    let product = classify_with(&t.tensor(h), opts)?;

    let (ft, fh, fp) = (first.flags, second.flags, product.flags);
    let mut checks = vec![check(
        "SWM(T) and SWM(H) <=> SWM(T (x) H)",
        (ft.strictly_weak_mixing && fh.strictly_weak_mixing) == fp.strictly_weak_mixing,
        format!(
            "SWM(T)={}, SWM(H)={}, SWM(T (x) H)={}",
            ft.strictly_weak_mixing, fh.strictly_weak_mixing, fp.strictly_weak_mixing
        ),
    )];
    checks.push(check(
        "SWM(T) and UE(H) => UE(T (x) H)",
        !(ft.strictly_weak_mixing && fh.uniquely_ergodic) || fp.uniquely_ergodic,
        format!(
            "SWM(T)={}, UE(H)={}, UE(T (x) H)={}",
            ft.strictly_weak_mixing, fh.uniquely_ergodic, fp.uniquely_ergodic
        ),
    ));
    checks.push(check(
        "UE(T (x) H) => UE(T) and UE(H)",
        !fp.uniquely_ergodic || (ft.uniquely_ergodic && fh.uniquely_ergodic),
        format!(
            "UE(T (x) H)={}, UE(T)={}, UE(H)={}",
            fp.uniquely_ergodic, ft.uniquely_ergodic, fh.uniquely_ergodic
        ),
    ));
    if is_square {
        let (ue2, swm, swm2) = (
            fp.uniquely_ergodic,
            ft.strictly_weak_mixing,
            fp.strictly_weak_mixing,
        );
        checks.push(check(
            "UE(T (x) T) <=> SWM(T) <=> SWM(T (x) T)",
            ue2 == swm && swm == swm2,
            format!("UE(T (x) T)={ue2}, SWM(T)={swm}, SWM(T (x) T)={swm2}"),
        ));
    }
    for (name, r) in [("T", &first), ("H", &second), ("T (x) H", &product)] {
        for v in r.flags.violations() {
            checks.push(check(v, false, format!("flags of {name}: {:?}", r.flags)));
        }
    }

    if let Some(bad) = checks.iter().find(|c| !c.holds) {
        return Err(LabError::ImplicationViolated {
            statement: bad.statement.clone(),
            evidence: bad.evidence.clone(),
        });
    }
    Ok(TensorReport {
        first,
        second,
        product,
        is_square,
        checks,
    })
}
