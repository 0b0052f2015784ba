use ergolab::algebra::{hermitian_decompose, kron, min_eigenvalue, operator_norm, Functional};
use ergolab::channels::{conditional_expectation, CHANNEL_TOL};
use ergolab::corpus::{random_unital_channel, random_unitary};
use ergolab::ergodic::spectral::eigenspace;
use ergolab::ergodic::{classify, peripheral_spectrum, PERIPHERAL_TOL};
use ergolab::{KrausChannel, SquareMatrix, State, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn matrix(d: usize, r: &mut ChaCha8Rng) -> SquareMatrix {
    SquareMatrix::from_fn(d, |_, _| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn channel(d: usize, r: &mut ChaCha8Rng) -> KrausChannel {
    let k = r.random_range(1..=3);
    random_unital_channel(d, k, r).unwrap()
}

/// Greedy nearest matching of two multisets; returns the worst distance.
fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for z in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_norm_is_multiplicative(seed in any::<u64>(), d1 in 1usize..4, d2 in 1usize..4) {
        let mut r = rng(seed);
        let (a, b) = (matrix(d1, &mut r), matrix(d2, &mut r));
        let lhs = operator_norm(&kron(&a, &b));
        prop_assert!((lhs - operator_norm(&a) * operator_norm(&b)).abs() < 1e-9);
    }

    #[test]
    fn functionals_are_linear(seed in any::<u64>(), d in 1usize..5) {
        let mut r = rng(seed);
        let psi = Functional::new(matrix(d, &mut r));
        let (x, y) = (matrix(d, &mut r), matrix(d, &mut r));
        let (al, be) = (C64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)), C64::new(0.5, -1.5));
        let lhs = psi.apply(&(&x.scale(al) + &y.scale(be))).unwrap();
        let rhs = al * psi.apply(&x).unwrap() + be * psi.apply(&y).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hermitian_decomposition_reconstructs(seed in any::<u64>(), d in 1usize..5) {
        let mut r = rng(seed);
        let psi = Functional::new(matrix(d, &mut r));
        let parts = hermitian_decompose(&psi);
        prop_assert!(parts.recompose().pairing().max_abs_diff(psi.pairing()) < 1e-12);
        for p in parts.parts() {
            prop_assert!(min_eigenvalue(p.pairing()) >= -1e-10);
        }
    }

    #[test]
    fn states_are_positive(seed in any::<u64>(), d in 1usize..5) {
        let mut r = rng(seed);
        let a = matrix(d, &mut r);
        let rho = &a * &a.adjoint();
        let phi = State::new(rho.scale_real(1.0 / rho.trace().re)).unwrap();
        prop_assert!((phi.pairing().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(min_eigenvalue(phi.pairing()) >= -1e-10);
        let x = matrix(d, &mut r);
        prop_assert!(phi.apply(&(&x.adjoint() * &x)).unwrap().re >= -1e-10);
    }

    #[test]
    fn random_channels_are_ucp(seed in any::<u64>(), d in 1usize..5) {
        let t = channel(d, &mut rng(seed));
        prop_assert!(t.unitality_defect() < CHANNEL_TOL);
        prop_assert!(t.choi_min_eigenvalue() >= -CHANNEL_TOL);
    }

    #[test]
    fn transfer_agrees_with_apply(seed in any::<u64>(), d in 1usize..4) {
        let t = channel(d, &mut rng(seed));
        let m = t.transfer_matrix();
        for x in SquareMatrix::units(d) {
            prop_assert!(m.apply(&x).unwrap().max_abs_diff(&t.apply(&x).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn transfer_of_composition_is_product(seed in any::<u64>(), d in 1usize..4) {
        let mut r = rng(seed);
        let (t, s) = (channel(d, &mut r), channel(d, &mut r));
        let lhs = t.compose(&s).unwrap().transfer_matrix();
        let rhs = t.transfer_matrix().compose(&s.transfer_matrix()).unwrap();
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) < 1e-10);
    }

    #[test]
    fn duality_of_pull_back(seed in any::<u64>(), d in 1usize..4) {
        let mut r = rng(seed);
        let t = channel(d, &mut r);
        let psi = Functional::new(matrix(d, &mut r));
        let x = matrix(d, &mut r);
        let lhs = psi.apply(&t.apply(&x).unwrap()).unwrap();
        let rhs = t.pull_back(&psi).unwrap().apply(&x).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn conditional_expectation_properties(seed in any::<u64>(), d in 1usize..4) {
        let mut r = rng(seed);
        let x = matrix(d, &mut r);
        let one = SquareMatrix::identity(d);
        prop_assert!(conditional_expectation(&kron(&x, &one), d).unwrap().max_abs_diff(&x) < 1e-12);
        prop_assert!(conditional_expectation(&SquareMatrix::identity(d * d), d).unwrap().max_abs_diff(&one) < 1e-15);
        let a = matrix(d * d, &mut r);
        let p = &a * &a.adjoint();
        prop_assert!(min_eigenvalue(&conditional_expectation(&p, d).unwrap()) >= -1e-10);
    }

    #[test]
    fn schwarz_step_holds(seed in any::<u64>(), n in 1usize..200) {
        let mut r = rng(seed);
        let (t, h) = (channel(2, &mut r), channel(3, &mut r));
        let (psi, phi) = (Functional::new(matrix(2, &mut r)), Functional::new(matrix(3, &mut r)));
        let (mut x, mut y) = (matrix(2, &mut r), matrix(3, &mut r));
        let (mut mixed, mut a2, mut b2) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (a, b) = (psi.apply(&x).unwrap().norm(), phi.apply(&y).unwrap().norm());
            mixed += a * b;
            a2 += a * a;
            b2 += b * b;
            x = t.apply(&x).unwrap();
            y = h.apply(&y).unwrap();
        }
        let nf = n as f64;
        prop_assert!(mixed / nf <= (a2 / nf).sqrt() * (b2 / nf).sqrt() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn tensor_spectrum_is_pairwise_products(seed in any::<u64>(), d2 in 1usize..4) {
        let mut r = rng(seed);
        let (t, h) = (channel(2, &mut r), channel(d2, &mut r));
        let et = t.transfer_matrix().eigenvalues().unwrap();
        let eh = h.transfer_matrix().eigenvalues().unwrap();
        let products: Vec<C64> = et.iter().flat_map(|a| eh.iter().map(move |b| a * b)).collect();
        let joint = t.tensor(&h).transfer_matrix().eigenvalues().unwrap();
        prop_assert!(multiset_distance(&products, &joint) < 1e-8);
    }

    #[test]
    fn hierarchy_on_random_channels(seed in any::<u64>(), d in 2usize..5) {
        let t = channel(d, &mut rng(seed));
        let report = classify(&t, 2000).unwrap();
        prop_assert!(report.flags.violations().is_empty(), "{:?}", report.flags);
        prop_assert!(report.routes_agree);
    }

    #[test]
    fn swm_excludes_other_peripheral_points(seed in any::<u64>(), d in 2usize..4, unitary in any::<bool>()) {
        let mut r = rng(seed);
        let t = if unitary {
            KrausChannel::unitary(random_unitary(d, &mut r)).unwrap()
        } else {
            channel(d, &mut r)
        };
        let report = classify(&t, 2000).unwrap();
        let periph = peripheral_spectrum(&t, PERIPHERAL_TOL).unwrap();
        let off_one = periph.iter().any(|c| (c.value - C64::new(1.0, 0.0)).norm() > PERIPHERAL_TOL);
        if report.flags.strictly_weak_mixing {
            prop_assert!(!off_one);
        }
        if off_one {
            prop_assert!(!report.flags.strictly_weak_mixing);
        }
    }

    #[test]
    fn interior_eigenvectors_decay_geometrically(seed in any::<u64>(), d in 2usize..4) {
        let t = channel(d, &mut rng(seed));
        let m = t.transfer_matrix();
        for z in m.eigenvalues().unwrap() {
            if z.norm() > 0.9 || z.norm() < 1e-3 {
                continue;
            }
            let space = eigenspace(m.matrix().inner(), z);
            if space.ncols() == 0 {
                continue;
            }
            let v: Vec<C64> = space.column(0).iter().copied().collect();
            let mut x = SquareMatrix::from_vec(d, &v);
            let x0 = operator_norm(&x);
            for k in 1..=30 {
                x = t.apply(&x).unwrap();
                let expected = z.norm().powi(k) * x0;
                prop_assert!((operator_norm(&x) - expected).abs() <= 1e-6 * x0);
            }
        }
    }
}
