use hamforge::gadgets::{
    build_simulator, delta_for, effective_hamiltonian, first_order_table, heisenberg_first_order,
    heisenberg_pass, heisenberg_second_order, k4_h0, logical_pauli, second_order_closed_form,
    solve_pair_weights, table2_rows, Interaction, LogicalQubitGadget,
};
use hamforge::hamcore::linalg::{eigvalsh, eye, kron, max_abs, max_abs_diff, Mat};
use hamforge::hamcore::{diagonalize, embed, Hamiltonian, Pauli};
use hamforge::simcheck::verify_simulation;
use hamforge::Error;
use proptest::prelude::*;

const S3: f64 = 0.577_350_269_189_625_8; // 1/√3

fn pauli_coef(m: &Mat, p: Pauli, q: Pauli) -> f64 {
    (kron(&p.matrix(), &q.matrix()) * m).trace().re / 4.0
}

fn counts(l: &[f64]) -> Vec<(i64, usize)> {
    let mut out: Vec<(i64, usize)> = vec![];
    for &x in l {
        let k = x.round() as i64;
        assert!((x - k as f64).abs() < 1e-9, "non-integer level {x}");
        match out.last_mut() {
            Some((v, n)) if *v == k => *n += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

#[test]
fn k4_spectra() {
    assert_eq!(
        counts(&eigvalsh(&k4_h0(Interaction::Heisenberg))),
        vec![(0, 2), (4, 9), (12, 5)]
    );
    assert_eq!(
        counts(&eigvalsh(&k4_h0(Interaction::Xy))),
        vec![(0, 2), (4, 6), (8, 5), (20, 2), (24, 1)]
    );
}

#[test]
fn logical_basis_is_the_ground_space() {
    for inter in [Interaction::Heisenberg, Interaction::Xy] {
        let g = LogicalQubitGadget::new([0, 1, 2, 3], inter).unwrap();
        let b = &g.logical_basis;
        assert!(max_abs_diff(&(b.adjoint() * b), &eye(2)) < 1e-12);
        assert!(max_abs(&(g.h0() * b)) < 1e-12);
    }
    assert!(LogicalQubitGadget::new([0, 1, 1, 3], Interaction::Heisenberg).is_err());
}

#[test]
fn first_order_table_values() {
    // (I, X, Y, Z) of Π X_iX_j Π, 0-based pairs
    let want = [
        ((0, 1), [-1.0 / 3.0, -S3, 0.0, 1.0 / 3.0]),
        ((0, 2), [-1.0 / 3.0, 0.0, 0.0, -2.0 / 3.0]),
        ((0, 3), [-1.0 / 3.0, S3, 0.0, 1.0 / 3.0]),
        ((1, 2), [-1.0 / 3.0, S3, 0.0, 1.0 / 3.0]),
        ((1, 3), [-1.0 / 3.0, 0.0, 0.0, -2.0 / 3.0]),
        ((2, 3), [-1.0 / 3.0, -S3, 0.0, 1.0 / 3.0]),
    ];
    let table = first_order_table(Interaction::Heisenberg);
    for ((pair, got), (wpair, w)) in table.iter().zip(want) {
        assert_eq!(*pair, wpair);
        for k in 0..4 {
            assert!((got[k] - w[k]).abs() < 1e-12, "{pair:?}: {got:?}");
        }
    }
    for ((_, xy), (_, h)) in first_order_table(Interaction::Xy).iter().zip(&table) {
        for k in 0..4 {
            assert!((xy[k] - 2.0 / 3.0 * h[k]).abs() < 1e-12);
        }
    }
    assert!(matches!(
        heisenberg_first_order(1, 1, Interaction::Heisenberg),
        Err(Error::BadPair(1, 1))
    ));
    assert!(matches!(
        heisenberg_first_order(0, 4, Interaction::Heisenberg),
        Err(Error::BadPair(0, 4))
    ));
}

#[test]
fn same_letter_projections_agree_and_cross_letters_vanish() {
    let b = LogicalQubitGadget::basis();
    let proj = |p: Pauli, q: Pauli, i: usize, j: usize| {
        b.adjoint() * embed(&kron(&p.matrix(), &q.matrix()), &[i, j], 4, 2) * &b
    };
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let xx = proj(Pauli::X, Pauli::X, i, j);
            assert!(max_abs_diff(&xx, &proj(Pauli::Y, Pauli::Y, i, j)) < 1e-12);
            assert!(max_abs_diff(&xx, &proj(Pauli::Z, Pauli::Z, i, j)) < 1e-12);
            for (p, q) in [
                (Pauli::X, Pauli::Y),
                (Pauli::X, Pauli::Z),
                (Pauli::Y, Pauli::Z),
            ] {
                assert!(max_abs(&proj(p, q, i, j)) < 1e-10);
                assert!(max_abs(&proj(q, p, i, j)) < 1e-10);
            }
        }
    }
}

#[test]
fn single_paulis_raise_into_the_level_four() {
    for inter in [Interaction::Heisenberg, Interaction::Xy] {
        let spec = diagonalize(&k4_h0(inter)).unwrap();
        let b = LogicalQubitGadget::basis();
        let letters: &[Pauli] = if inter == Interaction::Xy {
            &[Pauli::X, Pauli::Y]
        } else {
            &[Pauli::X, Pauli::Y, Pauli::Z]
        };
        for i in 0..4 {
            for &p in letters {
                let moved = embed(&p.matrix(), &[i], 4, 2) * &b;
                let amp = spec.eigenvectors.adjoint() * &moved;
                for (k, &l) in spec.eigenvalues.iter().enumerate() {
                    if (l - 4.0).abs() > 1e-9 {
                        assert!(
                            amp.row(k).norm() < 1e-10,
                            "{inter:?} {p:?}{i} reaches level {l}"
                        );
                    }
                }
                // full column rank inside the level-4 space
                let sv = moved.clone().svd(false, false).singular_values;
                assert!(sv.iter().all(|&s| s > 0.5));
            }
        }
    }
}

#[test]
fn xy_gap_after_normalization() {
    let l = eigvalsh(&k4_h0(Interaction::Xy));
    assert!(l[0].abs() < 1e-12 && l[2] >= 1.0);
}

fn sample_alpha(seed: u64) -> [[f64; 4]; 4] {
    let mut x = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    std::array::from_fn(|_| {
        std::array::from_fn(|_| {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    })
}

#[test]
fn closed_form_matches_oracle() {
    for inter in [Interaction::Heisenberg, Interaction::Xy] {
        for seed in 0..3 {
            let a = sample_alpha(seed);
            let oracle = heisenberg_second_order(&a, inter).unwrap();
            let closed = second_order_closed_form(&a, inter);
            assert!(
                max_abs_diff(&oracle, &closed) < 1e-9,
                "{inter:?} seed {seed}"
            );
        }
    }
}

/// Largest 2-local coefficient other than the row's own coupling.
fn off_type(m: &Mat, keep: (Pauli, Pauli)) -> f64 {
    let xyz = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut worst = 0.0f64;
    for p in xyz {
        for q in xyz {
            if (p, q) != keep {
                worst = worst.max(pauli_coef(m, p, q).abs());
            }
        }
    }
    worst
}

#[test]
fn table2_rows_give_their_couplings() {
    // strengths of the intended coupling measured on the 256-dimensional oracle
    let golden = [1.0 / 3.0, -1.0 / 3.0, S3, -S3, 1.0, -80.0];
    for (row, g) in table2_rows().iter().zip(golden) {
        let eff = heisenberg_second_order(&row.alpha, Interaction::Heisenberg).unwrap();
        let (p, q) = row.coupling;
        let v = pauli_coef(&eff, p, q);
        assert!(v * row.sign > 0.0, "{}: {v}", row.label);
        assert!((v - g).abs() < 1e-9, "{}: {v}", row.label);
        assert!(off_type(&eff, row.coupling) < 1e-9, "{}", row.label);
        let xy = heisenberg_second_order(&row.alpha, Interaction::Xy).unwrap();
        assert!((pauli_coef(&xy, p, q) - 2.0 / 3.0 * v).abs() < 1e-9);
    }
}

#[test]
fn pair_solver_hits_mixed_targets() {
    for (j, inter) in [
        ([[0.7, 0.0], [0.0, -0.4]], Interaction::Heisenberg),
        ([[-1.0, 0.3], [0.5, 0.2]], Interaction::Heisenberg),
        ([[0.0, -0.8], [0.0, 0.0]], Interaction::Xy),
        ([[0.0, 0.0], [0.0, 0.0]], Interaction::Xy),
    ] {
        let s = solve_pair_weights(&j, inter).unwrap();
        let eff = second_order_closed_form(&s.alpha, inter);
        let want = [
            [(Pauli::X, Pauli::X), (Pauli::X, Pauli::Z)],
            [(Pauli::Z, Pauli::X), (Pauli::Z, Pauli::Z)],
        ];
        for a in 0..2 {
            for b in 0..2 {
                let (p, q) = want[a][b];
                assert!((pauli_coef(&eff, p, q) - j[a][b]).abs() < 1e-9, "{j:?}");
            }
        }
        for (p, q) in [
            (Pauli::X, Pauli::Y),
            (Pauli::Y, Pauli::Y),
            (Pauli::Y, Pauli::Z),
        ] {
            assert!(pauli_coef(&eff, p, q).abs() < 1e-12);
        }
    }
}

fn two_qubit_target() -> Hamiltonian {
    Hamiltonian::from_paulis(
        2,
        &[
            ("X0 X1", 0.7),
            ("Z0 Z1", -0.4),
            ("Z0 X1", 0.3),
            ("X0", 0.2),
            ("Z1", -0.5),
            ("I", 1.0),
        ],
    )
    .unwrap()
}

#[test]
fn heisenberg_pass_effective_is_exact() {
    let g = heisenberg_pass(&two_qubit_target(), Interaction::Heisenberg).unwrap();
    assert_eq!(g.n_sim(), 8);
    let eff = effective_hamiltonian(&g).unwrap();
    assert!(max_abs_diff(&eff, &g.encoded_target().unwrap()) < 1e-9);
    // the simulator uses only the interaction itself and the identity
    for t in build_simulator(&g, 10.0).terms {
        match t {
            hamforge::Term::Local(l) => {
                assert!(max_abs_diff(&l.block, &hamforge::hamcore::heisenberg_block()) < 1e-15)
            }
            hamforge::Term::Pauli(p) => assert!(p.is_identity()),
        }
    }
}

#[test]
fn xy_pass_effective_is_exact() {
    let g = heisenberg_pass(&two_qubit_target(), Interaction::Xy).unwrap();
    let eff = effective_hamiltonian(&g).unwrap();
    assert!(max_abs_diff(&eff, &g.encoded_target().unwrap()) < 1e-9);
}

#[test]
fn heisenberg_pass_verifies() {
    let t = Hamiltonian::from_paulis(2, &[("X0 X1", 0.5), ("Z0", 0.3)]).unwrap();
    let g = heisenberg_pass(&t, Interaction::Heisenberg).unwrap();
    let d = delta_for(&g, 0.2, 0.2).unwrap();
    let r = verify_simulation(
        &g.target,
        &build_simulator(&g, d),
        &g.encoding().unwrap(),
        d / 2.0,
    )
    .unwrap();
    assert!(
        r.eps_measured <= 0.2 && r.eta_measured <= 0.2,
        "{}",
        r.to_text()
    );
}

#[test]
fn heisenberg_pass_rejects_y_terms() {
    let t = Hamiltonian::from_paulis(2, &[("Y0 Y1", 1.0)]).unwrap();
    assert!(matches!(
        heisenberg_pass(&t, Interaction::Heisenberg),
        Err(Error::UnsupportedFamily(_))
    ));
}

#[test]
fn logical_pauli_reads_coefficients() {
    let m = Pauli::X.matrix() * hamforge::hamcore::linalg::c(0.25) + eye(2);
    assert_eq!(logical_pauli(&m), [1.0, 0.25, 0.0, 0.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solver_reaches_random_couplings(xx in -2.0f64..2.0, xz in -2.0f64..2.0, zx in -2.0f64..2.0, zz in -2.0f64..2.0) {
        let j = [[xx, xz], [zx, zz]];
        let s = solve_pair_weights(&j, Interaction::Heisenberg).unwrap();
        let eff = second_order_closed_form(&s.alpha, Interaction::Heisenberg);
        prop_assert!((pauli_coef(&eff, Pauli::X, Pauli::X) - xx).abs() < 1e-9);
        prop_assert!((pauli_coef(&eff, Pauli::X, Pauli::Z) - xz).abs() < 1e-9);
        prop_assert!((pauli_coef(&eff, Pauli::Z, Pauli::X) - zx).abs() < 1e-9);
        prop_assert!((pauli_coef(&eff, Pauli::Z, Pauli::Z) - zz).abs() < 1e-9);
    }
}
