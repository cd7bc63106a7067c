use hamforge::gadgets::{
    build_simulator, c2r_cutoff, c2r_delta, c2r_gadget, effective_hamiltonian, one_local_deletion,
    pauli_one_norm, phi_local, DeletionForm, Subspace3, Subspace3Kind,
};
use hamforge::hamcore::linalg::{c, eigvalsh, is_real, kron, max_abs, max_abs_diff, Mat};
use hamforge::hamcore::random::{random_hermitian, seeded};
use hamforge::hamcore::{heisenberg_block, pauli_expand, Hamiltonian, Pauli};
use hamforge::simcheck::verify_simulation;
use hamforge::Error;

fn pp(p: Pauli, q: Pauli) -> Mat {
    kron(&p.matrix(), &q.matrix())
}

fn coef(m: &Mat, p: Pauli, q: Pauli) -> f64 {
    (pp(p, q) * m).trace().re / 4.0
}

const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

#[test]
fn deletion_forms_are_detected() {
    let sym = heisenberg_block() + pp(Pauli::Z, Pauli::I) + pp(Pauli::I, Pauli::Z);
    assert_eq!(DeletionForm::detect(&sym).unwrap(), DeletionForm::Symmetric);
    let anti = pp(Pauli::X, Pauli::Z) - pp(Pauli::Z, Pauli::X)
        + (pp(Pauli::X, Pauli::I) - pp(Pauli::I, Pauli::X)) * c(0.3);
    assert_eq!(
        DeletionForm::detect(&anti).unwrap(),
        DeletionForm::Antisymmetric
    );
    let bad = pp(Pauli::X, Pauli::Y) + pp(Pauli::Z, Pauli::I);
    assert!(matches!(DeletionForm::detect(&bad), Err(Error::BadForm(_))));
    let uneven = heisenberg_block() + pp(Pauli::Z, Pauli::I);
    assert!(matches!(
        one_local_deletion(&uneven),
        Err(Error::BadForm(_))
    ));
}

#[test]
fn deletion_removes_fields_from_heisenberg() {
    let h = heisenberg_block() + pp(Pauli::Z, Pauli::I) + pp(Pauli::I, Pauli::Z);
    let g = one_local_deletion(&h).unwrap();
    assert_eq!(g.n_sim(), 10);
    let eff = effective_hamiltonian(&g).unwrap();
    for p in XYZ {
        assert!(coef(&eff, p, Pauli::I).abs() <= 1e-6 && coef(&eff, Pauli::I, p).abs() <= 1e-6);
        for q in XYZ {
            let want = if p == q { 1.0 } else { 0.0 };
            assert!((coef(&eff, p, q) - want).abs() < 1e-9);
        }
    }
    assert!(max_abs_diff(&eff, &g.encoded_target().unwrap()) < 1e-9);
}

#[test]
fn deletion_without_fields_keeps_h() {
    let h =
        pp(Pauli::X, Pauli::X) + pp(Pauli::Y, Pauli::Y) * c(0.5) - pp(Pauli::Z, Pauli::Z) * c(0.8);
    let g = one_local_deletion(&h).unwrap();
    let eff = effective_hamiltonian(&g).unwrap();
    assert!(max_abs_diff(&eff, &h) < 1e-9);
}

#[test]
fn deletion_of_antisymmetric_interaction() {
    let h = pp(Pauli::X, Pauli::Z) - pp(Pauli::Z, Pauli::X)
        + (pp(Pauli::Z, Pauli::I) - pp(Pauli::I, Pauli::Z)) * c(0.7);
    let g = one_local_deletion(&h).unwrap();
    let eff = effective_hamiltonian(&g).unwrap();
    let want = pp(Pauli::X, Pauli::Z) - pp(Pauli::Z, Pauli::X);
    assert!(max_abs_diff(&eff, &want) < 1e-9);
}

#[test]
fn deletion_quadruple_has_unique_ground_state() {
    let h = heisenberg_block() + pp(Pauli::X, Pauli::I) + pp(Pauli::I, Pauli::X);
    let g = one_local_deletion(&h).unwrap();
    let hamforge::gadgets::Ground::Mediators(att) = &g.ground else {
        panic!("mediator gadget")
    };
    let mut quad = Hamiltonian::qubits(10);
    for t in
        g.h0.terms.iter().filter(|t| {
            t.support().iter().all(|s| att[0].sites.contains(s)) && !t.support().is_empty()
        })
    {
        quad.push(t.clone());
    }
    let l = eigvalsh(&quad.assemble().unwrap());
    // each eigenvalue of the quadruple appears 2^6 times on the register
    assert!(l[64] - l[63] > 0.5);
}

#[test]
fn subspace3_kind1_doublet() {
    let s = Subspace3::new(Subspace3Kind::Xy { alpha: 0.5 }).unwrap();
    let l = eigvalsh(&s.h0);
    assert!(l[0].abs() < 1e-12 && l[1].abs() < 1e-12 && (l[2] - 1.0).abs() < 1e-12);
    let r = s.realize().unwrap();
    assert!(r.residual < 1e-9, "{r:?}");
    let want = pp(Pauli::X, Pauli::X) + pp(Pauli::Y, Pauli::Y);
    let two_local = &r.effective - Mat::identity(4, 4) * c((r.effective.trace() / c(4.0)).re);
    assert!(max_abs_diff(&two_local, &want) < 1e-9);
}

#[test]
fn subspace3_kind2_records_alpha_prime() {
    let s = Subspace3::new(Subspace3Kind::Xyz {
        alpha: 0.5,
        beta: 0.3,
    })
    .unwrap();
    let r = s.realize().unwrap();
    let a = r.alpha_prime.unwrap();
    assert!(a.is_finite() && a != 0.0);
    assert!(r.residual < 1e-9, "{r:?}");
    assert!((r.correlations[0][0] - 1.0).abs() < 1e-9 && r.correlations[2][2].abs() < 1e-9);
}

#[test]
fn subspace3_kind3_gives_xx_plus_yy() {
    let s = Subspace3::new(Subspace3Kind::Antisym).unwrap();
    let r = s.realize().unwrap();
    assert!(r.residual < 1e-9, "{r:?}");
    // proportional to XX + YY for every single coupling that has an XX part
    for i in 0..3 {
        for j in 0..3 {
            let m = s.coupling(i, j).unwrap();
            assert!((coef(&m, Pauli::X, Pauli::X) - coef(&m, Pauli::Y, Pauli::Y)).abs() < 1e-9);
            assert!(coef(&m, Pauli::Z, Pauli::Z).abs() < 1e-9);
        }
    }
}

#[test]
fn subspace3_encoding_is_ground_space() {
    let s = Subspace3::new(Subspace3Kind::Xy { alpha: -0.7 }).unwrap();
    let e = s.encoding(2).unwrap();
    assert_eq!(e.dim_out(), 64);
    let b = &s.basis;
    assert!(max_abs(&(&s.h0 * b)) < 1e-10);
}

#[test]
fn subspace3_rejects_bad_parameters() {
    for k in [
        Subspace3Kind::Xy { alpha: 0.0 },
        Subspace3Kind::Xy { alpha: f64::NAN },
        Subspace3Kind::Xyz {
            alpha: 1.0,
            beta: 0.0,
        },
    ] {
        assert!(matches!(Subspace3::new(k), Err(Error::BadKind(_))));
    }
    assert!(matches!(
        Subspace3::new(Subspace3Kind::Antisym)
            .unwrap()
            .coupling(3, 0),
        Err(Error::BadPair(3, 0))
    ));
}

#[test]
fn phi_local_is_real_and_y_paired() {
    let h = Hamiltonian::from_paulis(2, &[("Y0 X1", 0.5), ("Y0 Y1", -1.0), ("Z0", 0.3)]).unwrap();
    let p = phi_local(&h).unwrap();
    assert!(is_real(&p.assemble().unwrap()));
    let labels: Vec<String> = p.pauli_terms().unwrap().iter().map(|t| t.label()).collect();
    assert!(labels.contains(&"Y0 X1 Y2".to_string()));
    assert!(labels.contains(&"Y0 Y1 Y2 Y3".to_string()));
    assert!((pauli_one_norm(&h).unwrap() - 1.8).abs() < 1e-12);
}

#[test]
fn c2r_gadget_is_exact() {
    let mut rng = seeded(31);
    for n in [1, 2] {
        let m = random_hermitian(1 << n, &mut rng);
        let mut h = Hamiltonian::qubits(n);
        for t in pauli_expand(&m, n, 1e-14) {
            h.push(t);
        }
        let g = c2r_gadget(&h).unwrap();
        let eff = effective_hamiltonian(&g).unwrap();
        assert!(max_abs_diff(&eff, &g.encoded_target().unwrap()) < 1e-10);
        let delta = c2r_delta(&h).unwrap();
        let sim = build_simulator(&g, delta);
        assert!(is_real(&sim.assemble().unwrap()));
        let r =
            verify_simulation(&h, &sim, &g.encoding().unwrap(), c2r_cutoff(&h).unwrap()).unwrap();
        assert!(
            r.eps_measured < 1e-9 && r.eta_measured < 1e-9,
            "{}",
            r.to_text()
        );
    }
}

#[test]
fn c2r_rejects_qutrits() {
    let h = Hamiltonian::new(1, 3);
    assert!(matches!(c2r_gadget(&h), Err(Error::NotQubit(3))));
}
