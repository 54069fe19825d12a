//! Douglas–Rachford solutions against a dense primal–dual oracle.
mod common;

use common::oracle_case;
use s2mri::sparsity::BasisKind;

fn check(kind: BasisKind, noisy: bool) {
    let (rel, feasible) = oracle_case(kind, noisy);
    assert!(
        rel < 1e-6,
        "{kind} noisy={noisy}: relative difference {rel:e}"
    );
    assert!(feasible);
}

#[test]
fn dirac_noiseless() {
    check(BasisKind::Dirac, false);
}

#[test]
fn dirac_noisy() {
    check(BasisKind::Dirac, true);
}

#[test]
fn haar_noisy() {
    check(BasisKind::Haar, true);
}
