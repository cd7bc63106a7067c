use hamforge::encodings::{
    attach_states, check_locality, complex_to_real_enc, complex_to_real_local, compose, identity,
    identity_local, qudit_to_qubit, subspace_encoding, verify_encoding_axioms, Attachment,
    Encoding,
};
use hamforge::hamcore::linalg::{
    c, eigvalsh, evolution, eye, herm_fn, kron, max_abs, max_abs_diff, partial_trace_keep, trace,
    zeros, Mat, Vector, ONE,
};
use hamforge::hamcore::random::{random_density, random_hermitian, seeded};
use hamforge::Pauli;

fn samples(dim: usize, count: usize, seed: u64) -> Vec<Mat> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| random_hermitian(dim, &mut rng))
        .collect()
}

fn dense_only(e: &Encoding) -> Encoding {
    Encoding {
        locality: None,
        ..e.clone()
    }
}

fn mediator_encoding() -> Encoding {
    // qubit 0 keeps a |0⟩ mediator at site 2, qubit 1 a |+⟩ mediator at site 3
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = Attachment {
        owner: 0,
        sites: vec![2],
        state: Vector::from_vec(vec![ONE, c(0.0)]),
    };
    let b = Attachment {
        owner: 1,
        sites: vec![3],
        state: Vector::from_vec(vec![c(s), c(s)]),
    };
    attach_states(2, 4, &[a, b]).unwrap()
}

#[test]
fn identity_is_a_no_op() {
    let e = identity(4);
    let m = &samples(4, 1, 1)[0];
    assert!(max_abs_diff(&e.apply(m).unwrap(), m) < 1e-14);
    let r = verify_encoding_axioms(&e, &samples(4, 20, 2));
    assert!(r.pass, "{:?}", r.failures);
    assert!(r.worst_deviation <= 1e-9);
}

#[test]
fn antistandard_identity_conjugates() {
    let e = Encoding::new(eye(2), 2, zeros(1, 1), eye(1)).unwrap();
    let y = Pauli::Y.matrix();
    assert!(max_abs_diff(&e.apply(&y).unwrap(), &(-y)) < 1e-15);
    assert!(!e.standard());
}

#[test]
fn complex_to_real_maps_sigma_y_to_yy() {
    let e = complex_to_real_enc(1).unwrap();
    let y = Pauli::Y.matrix();
    let got = e.apply(&y).unwrap();
    assert!(max_abs_diff(&got, &kron(&y, &y)) < 1e-15);
    assert!(got.iter().all(|z| z.im.abs() < 1e-15));
}

#[test]
fn complex_to_real_outputs_are_real_with_doubled_spectrum() {
    let e = complex_to_real_enc(2).unwrap();
    for h in samples(4, 5, 3) {
        let out = e.apply(&h).unwrap();
        assert!(out.iter().all(|z| z.im.abs() < 1e-14));
        let mut want: Vec<f64> = eigvalsh(&h).into_iter().flat_map(|l| [l, l]).collect();
        want.sort_by(f64::total_cmp);
        let got = eigvalsh(&out);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }
    let mut rng = seeded(4);
    let real = hamforge::hamcore::random::random_real_symmetric(4, &mut rng);
    let out = e.apply(&real).unwrap();
    // ancilla first: both diagonal ancilla blocks equal H, off-diagonal blocks vanish
    let top = out.view((0, 0), (4, 4)).into_owned();
    let bottom = out.view((4, 4), (4, 4)).into_owned();
    assert!(max_abs_diff(&top, &real) < 1e-14 && max_abs_diff(&bottom, &real) < 1e-14);
    assert!(max_abs(&out.view((0, 4), (4, 4)).into_owned()) < 1e-14);
}

#[test]
fn constructed_encodings_satisfy_axioms() {
    let encs: Vec<(&str, Encoding)> = vec![
        ("c2r", complex_to_real_enc(2).unwrap()),
        ("c2r local", complex_to_real_local(2).unwrap()),
        ("qutrits", qudit_to_qubit(2, 3).unwrap()),
        ("mediators", mediator_encoding()),
        ("identity local", identity_local(2, 2)),
    ];
    for (name, e) in encs {
        let r = verify_encoding_axioms(&e, &samples(e.dim_in, 20, 5));
        assert!(r.pass, "{name}: {:?}", r.failures);
        assert!(!r.isometry_violation);
    }
}

#[test]
fn corrupted_isometry_is_flagged() {
    let mut e = complex_to_real_enc(1).unwrap();
    e.v[(0, 0)] += c(0.3);
    let r = verify_encoding_axioms(&e, &samples(2, 20, 6));
    assert!(!r.pass);
    assert!(r.isometry_violation);
    assert!(r
        .failures
        .iter()
        .any(|f| f.starts_with("IsometryViolation")));
}

#[test]
fn encoded_expectations_match() {
    let mut rng = seeded(7);
    for e in [
        complex_to_real_enc(2).unwrap(),
        complex_to_real_local(2).unwrap(),
        mediator_encoding(),
    ] {
        let sigma = e.default_ancilla_state();
        for _ in 0..5 {
            let a = random_hermitian(4, &mut rng);
            let rho = random_density(4, &mut rng);
            let st = e.estate(&rho, &sigma).unwrap();
            let lhs = trace(&(e.apply(&a).unwrap() * &st));
            let rhs = trace(&(&a * &rho));
            assert!((lhs - rhs).norm() < 1e-10);
            assert!((trace(&st) - ONE).norm() < 1e-12);
            let (f, b) = e.fb_maps(&st).unwrap();
            assert!(max_abs_diff(&f, &rho) < 1e-12);
            assert!(max_abs(&b) < 1e-12);
        }
    }
}

#[test]
fn estate_rejects_ancilla_outside_p() {
    let e = complex_to_real_enc(1).unwrap();
    let mut rho = zeros(2, 2);
    rho[(0, 0)] = ONE;
    let mut bad = zeros(2, 2);
    bad[(1, 1)] = ONE;
    assert!(e.estate(&rho, &bad).is_err());
}

#[test]
fn local_complex_to_real_state_lives_on_plus_y() {
    let e = complex_to_real_local(2).unwrap();
    let mut rng = seeded(8);
    let rho = random_density(4, &mut rng);
    let st = e.estate(&rho, &e.default_ancilla_state()).unwrap();
    // ancilla qubits 2, 3 hold |+y⟩⟨+y| each
    let anc = partial_trace_keep(&st, &[2, 2, 2, 2], &[2, 3]);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = Mat::from_column_slice(2, 1, &[c(s), hamforge::hamcore::linalg::I * s]);
    let py = &plus * plus.adjoint();
    assert!(max_abs_diff(&anc, &kron(&py, &py)) < 1e-12);
    let sys = partial_trace_keep(&st, &[2, 2, 2, 2], &[0, 1]);
    assert!(max_abs_diff(&sys, &rho) < 1e-12);
}

#[test]
fn orthogonal_state_has_no_preimage() {
    let e = mediator_encoding();
    // site 2 in |1⟩ is outside the encoded subspace
    let mut rho = zeros(16, 16);
    rho[(2, 2)] = ONE;
    let (f, b) = e.fb_maps(&rho).unwrap();
    assert!(max_abs(&f) < 1e-15 && max_abs(&b) < 1e-15);
}

#[test]
fn time_evolution_commutes_with_encoding() {
    let mut rng = seeded(9);
    for e in [
        complex_to_real_enc(2).unwrap(),
        complex_to_real_local(2).unwrap(),
    ] {
        let h = random_hermitian(4, &mut rng);
        let rho = random_density(4, &mut rng);
        let sigma = e.default_ancilla_state();
        let hp = e.apply(&h).unwrap();
        for t in [0.3, 2.0, 10.0] {
            let u = evolution(&h, t);
            let up = evolution(&hp, t);
            let lhs = &up * e.estate(&rho, &sigma).unwrap() * up.adjoint();
            let rhs = e.estate(&(&u * &rho * u.adjoint()), &sigma).unwrap();
            assert!(max_abs_diff(&lhs, &rhs) < 1e-8);
            let (f, _) = e.fb_maps(&lhs).unwrap();
            assert!(max_abs_diff(&f, &(&u * &rho * u.adjoint())) < 1e-8);
        }
    }
}

#[test]
fn gibbs_maps() {
    let mut rng = seeded(10);
    let e = complex_to_real_enc(2).unwrap();
    let h = random_hermitian(4, &mut rng);
    let g = herm_fn(&h, |l| c((-l).exp()));
    let gibbs = &g / trace(&g);
    let hp = e.apply(&h).unwrap();
    let gp = e.restrict(&herm_fn(&hp, |l| c((-l).exp())));
    let gp = &gp / trace(&gp);
    assert!(max_abs_diff(&e.restrict(&e.estate_gibbs(&gibbs).unwrap()), &gp) < 1e-12);
    for _ in 0..5 {
        let a = random_hermitian(4, &mut rng);
        let rho = random_density(4, &mut rng);
        let lhs = trace(&(e.emeas_gibbs(&a).unwrap() * e.estate_gibbs(&rho).unwrap()));
        assert!((lhs - trace(&(&a * &rho))).norm() < 1e-9);
    }
    let id = identity(4);
    let rho = random_density(4, &mut rng);
    assert!(max_abs_diff(&id.estate_gibbs(&rho).unwrap(), &rho) < 1e-15);
    assert!(max_abs_diff(&id.emeas_gibbs(&rho).unwrap(), &rho) < 1e-15);
}

#[test]
fn channels_stay_trace_preserving() {
    let mut rng = seeded(11);
    let e = complex_to_real_local(2).unwrap();
    // Kraus pair from a random unitary split by a projector
    let u = hamforge::hamcore::random::random_unitary(4, &mut rng);
    let mut pr = zeros(4, 4);
    pr[(0, 0)] = ONE;
    pr[(3, 3)] = ONE;
    let k1 = &pr * &u;
    let k2 = (eye(4) - &pr) * &u;
    let mut sum = zeros(e.dim_out(), e.dim_out());
    for k in [&k1, &k2] {
        let ek = e.apply(k).unwrap();
        sum += ek.adjoint() * ek;
    }
    let b = e.encoded_basis();
    assert!(max_abs_diff(&(b.adjoint() * sum * &b), &eye(b.ncols())) < 1e-9);
}

#[test]
fn composition_matches_sequential_application() {
    let inner = complex_to_real_enc(1).unwrap();
    let outer = complex_to_real_enc(2).unwrap();
    let ee = compose(&outer, &inner).unwrap();
    assert_eq!((ee.p, ee.q), (2, 2));
    for h in samples(2, 5, 12) {
        let seq = outer.apply(&inner.apply(&h).unwrap()).unwrap();
        assert!(max_abs_diff(&ee.apply(&h).unwrap(), &seq) < 1e-9);
    }
    let id = compose(&identity(3), &identity(3)).unwrap();
    assert!(max_abs_diff(&id.v, &eye(3)) < 1e-15);
    assert_eq!((id.p, id.q), (1, 0));
}

#[test]
fn local_composition_agrees_with_dense() {
    let inner = complex_to_real_local(2).unwrap();
    let outer = identity_local(4, 2);
    let outer = compose(&mediator_widened(), &outer).unwrap();
    let local = compose(&outer, &inner).unwrap();
    let dense = compose(&dense_only(&outer), &dense_only(&inner)).unwrap();
    assert!(local.locality.is_some());
    assert!(check_locality(&local).unwrap() < 1e-12);
    for h in samples(4, 5, 13) {
        assert!(max_abs_diff(&local.apply(&h).unwrap(), &dense.apply(&h).unwrap()) < 1e-10);
    }
    let r = verify_encoding_axioms(&local, &samples(4, 20, 14));
    assert!(r.pass, "{:?}", r.failures);
}

fn mediator_widened() -> Encoding {
    // four original qubits; qubit 0 and 3 each get a |0⟩ mediator
    let zero = Vector::from_vec(vec![ONE, c(0.0)]);
    let a = Attachment {
        owner: 0,
        sites: vec![4],
        state: zero.clone(),
    };
    let b = Attachment {
        owner: 3,
        sites: vec![5],
        state: zero,
    };
    attach_states(4, 6, &[a, b]).unwrap()
}

#[test]
fn local_encodings_act_on_declared_sites() {
    let n = 3;
    let e = complex_to_real_local(n).unwrap();
    let loc = e.locality.clone().unwrap();
    assert!(check_locality(&e).unwrap() < 1e-12);
    let mut rng = seeded(15);
    let y = Pauli::Y.matrix();
    for site in 0..n {
        let a = random_hermitian(2, &mut rng);
        let mut mats = vec![eye(2); n];
        mats[site] = a.clone();
        let full = mats
            .iter()
            .skip(1)
            .fold(mats[0].clone(), |acc, m| kron(&acc, m));
        let enc = e.apply(&full).unwrap();
        // on the encoded subspace the image is Re A ⊗ 1 + i Im A ⊗ Y on (site, its ancilla)
        let re = a.map(|z| c(z.re));
        let im = a.map(|z| c(z.im)) * hamforge::hamcore::linalg::I;
        let local = kron(&re, &eye(2)) + kron(&im, &y);
        let declared = &loc.blocks[site].sim_sites;
        assert_eq!(declared, &vec![site, n + site]);
        let rebuilt = hamforge::hamcore::embed(&local, declared, 2 * n, 2);
        assert!(
            max_abs_diff(&e.restrict(&enc), &e.restrict(&rebuilt)) < 1e-12,
            "site {site}"
        );
        assert!(rebuilt.iter().all(|z| z.im.abs() < 1e-15));
    }
}

#[test]
fn subspace_encoding_embeds_basis() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // singlet and |00⟩ as a logical qubit on two physical qubits
    let mut basis = zeros(4, 2);
    basis[(1, 0)] = c(s);
    basis[(2, 0)] = c(-s);
    basis[(0, 1)] = ONE;
    let e = subspace_encoding(&[vec![0, 1], vec![2, 3]], 4, &basis).unwrap();
    let r = verify_encoding_axioms(&e, &samples(4, 20, 16));
    assert!(r.pass, "{:?}", r.failures);
    assert!(check_locality(&e).unwrap() < 1e-12);
}
