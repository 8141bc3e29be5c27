use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use stabflow::code::{code_parameters, hamiltonian_description, logicals, syndrome_of, validate, CodeError, Distance, StabilizerCode};
use stabflow::constructors::{
    field_code, hypergraph_product, ising_code, ising_toric, repetition_code, toric_code, ClassicalCode, Graph, ToricLattice,
};
use stabflow::gf2::min_support_solution;
use stabflow::operator::symmetric_eigenvalues;
use stabflow::pauli::{Letter, PauliString};

fn p(s: &str) -> PauliString {
    s.parse().unwrap()
}

fn letter_matrix(l: Letter) -> DMatrix<Complex64> {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    match l {
        Letter::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Letter::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Letter::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Letter::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product of single-qubit matrices, qubit 0 most significant.
fn dense(p: &PauliString) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, Complex64::new(f64::from(p.sign()), 0.0));
    for q in 0..p.n() {
        m = m.kronecker(&letter_matrix(p.letter(q)));
    }
    m
}

fn all_paulis(n: usize) -> Vec<PauliString> {
    (0..4usize.pow(n as u32))
        .map(|mut code| {
            let mut p = PauliString::identity(n);
            for q in 0..n {
                p.set_letter(q, [Letter::I, Letter::X, Letter::Y, Letter::Z][code % 4]);
                code /= 4;
            }
            p
        })
        .collect()
}

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0usize..4, n).prop_map(move |letters| {
        let mut p = PauliString::identity(n);
        for (q, l) in letters.into_iter().enumerate() {
            p.set_letter(q, [Letter::I, Letter::X, Letter::Y, Letter::Z][l]);
        }
        p
    })
}

/// `H₀` assembled densely from its term list.
fn dense_h0(code: &StabilizerCode) -> DMatrix<f64> {
    let dim = 1usize << code.n();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let id = DMatrix::<Complex64>::identity(dim, dim);
    for t in hamiltonian_description(code) {
        h += (&id - dense(&t.check)).scale(0.5 * t.lambda);
    }
    h.map(|c| c.re)
}

fn codes() -> Vec<StabilizerCode> {
    vec![
        repetition_code(5).unwrap(),
        ising_code(&Graph::cycle(4)).unwrap(),
        field_code(3).unwrap(),
        toric_code(2).unwrap(),
        toric_code(3).unwrap(),
        ising_toric(2).unwrap(),
        hypergraph_product(&ClassicalCode::repetition_path(3), &ClassicalCode::repetition_path(3)).unwrap(),
    ]
}

#[test]
fn commutation_examples() {
    assert!(!p("XXI").commutes(&p("IZZ")).unwrap());
    let q = p("XYZIY");
    assert!(q.commutes(&q).unwrap());
    let code = toric_code(3).unwrap();
    let lat = ToricLattice { l: 3 };
    for (vx, vy) in (0..3).flat_map(|x| (0..3).map(move |y| (x, y))) {
        for (fx, fy) in (0..3).flat_map(|x| (0..3).map(move |y| (x, y))) {
            assert!(lat.vertex_check(vx, vy).commutes(&lat.face_check(fx, fy)).unwrap());
        }
    }
    assert!(p("XX").commutes(&p("ZZZ")).is_err());
    assert_eq!(code.n(), 18);
}

#[test]
fn symplectic_commutation_matches_dense_matrices() {
    for n in 1..=4 {
        let ps = all_paulis(n);
        let mats: Vec<_> = ps.iter().map(dense).collect();
        for (a, ma) in ps.iter().zip(&mats) {
            for (b, mb) in ps.iter().zip(&mats) {
                let dense_commutes = (ma * mb - mb * ma).iter().all(|c| c.norm() < 1e-12);
                assert_eq!(a.commutes(b).unwrap(), dense_commutes, "{a} {b}");
            }
        }
    }
}

#[test]
fn multiplication_examples() {
    let a = p("XYZ");
    assert_eq!(a.multiply(&PauliString::identity(3)).unwrap(), a);
    let sq = a.multiply(&a).unwrap();
    assert!(sq.is_identity_up_to_sign());
    assert!(!sq.is_negative());
    let lat = ToricLattice { l: 3 };
    let prod = lat.face_check(0, 0).multiply(&lat.face_check(1, 0)).unwrap();
    assert_eq!(prod.weight(), 6);
    assert!(prod.is_z_type());
}

#[test]
fn products_match_dense_matrices() {
    let ps = all_paulis(2);
    for a in &ps {
        for b in &ps {
            if let Ok(c) = a.multiply(b) {
                let diff = dense(a) * dense(b) - dense(&c);
                assert!(diff.iter().all(|x| x.norm() < 1e-12), "{a} {b}");
            }
        }
    }
}

#[test]
fn syndrome_examples() {
    let code = repetition_code(7).unwrap();
    assert!(syndrome_of(&code, &PauliString::identity(7)).is_zero());
    let s = syndrome_of(&code, &PauliString::x_on(7, &[3]));
    assert_eq!(s.iter_ones().collect::<Vec<_>>(), vec![2, 3]);
    assert!(syndrome_of(&code, &PauliString::x_on(7, &[0, 1, 2, 3, 4, 5, 6])).is_zero());
}

#[test]
fn validate_examples() {
    let m = validate(&toric_code(3).unwrap()).unwrap();
    assert_eq!((m.q, m.q_prime), (4, 4));
    let m = validate(&repetition_code(5).unwrap()).unwrap();
    assert_eq!((m.q, m.q_prime), (2, 2));
    match StabilizerCode::new(1, vec![p("X"), p("Z")]) {
        Err(CodeError::Anticommuting { .. }) => {}
        other => panic!("expected an anticommuting pair, got {other:?}"),
    }
}

#[test]
fn graph_metrics_respect_degree_bounds() {
    for code in codes() {
        let m = validate(&code).unwrap();
        assert!(m.delta < m.q * m.q_prime);
        for i in 0..code.n() {
            for r in 0..4 {
                assert!(m.gamma_shell(i, r) <= m.gamma_ball(i, r));
                assert!(m.gamma_shell(i, r) <= m.delta.pow(r as u32));
                assert!(m.gamma_ball(i, r) <= (m.delta + 1).pow(r as u32));
            }
        }
    }
}

#[test]
fn logical_examples() {
    let rep = logicals(&repetition_code(5).unwrap());
    assert_eq!(rep.len(), 1);
    assert_eq!(rep[0].0, p("XXXXX"));
    assert_eq!(rep[0].1.weight(), 1);
    assert!(rep[0].1.is_z_type());

    let trivial = field_code(4).unwrap();
    assert!(logicals(&trivial).is_empty());
    assert_eq!(trivial.k(), 0);

    let pairs = logicals(&toric_code(2).unwrap());
    assert_eq!(pairs.len(), 2);
    for (i, (x, z)) in pairs.iter().enumerate() {
        assert!(x.anticommutes(z).unwrap());
        for (j, (x2, z2)) in pairs.iter().enumerate() {
            if i != j {
                assert!(x.commutes(x2).unwrap() && x.commutes(z2).unwrap() && z.commutes(z2).unwrap());
            }
        }
    }
}

#[test]
fn logicals_are_not_stabilizers() {
    for code in codes() {
        let a = code.check_matrix();
        for (x, z) in logicals(&code) {
            for l in [x, z] {
                assert!(syndrome_of(&code, &l).is_zero());
                let b = l.x_bits().concat(l.z_bits());
                assert!(min_support_solution(&a, &b, code.num_checks()).unwrap().is_none());
            }
        }
    }
}

#[test]
fn parameter_examples() {
    let rep = code_parameters(&repetition_code(5).unwrap(), 5);
    assert_eq!((rep.n, rep.k), (5, 1));
    assert_eq!(rep.d_x, Some(Distance::Exact(5)));
    assert_eq!(rep.d_z, Some(Distance::Exact(1)));

    let t2 = code_parameters(&toric_code(2).unwrap(), 8);
    assert_eq!((t2.n, t2.k, t2.d), (8, 2, Some(Distance::Exact(2))));

    let t3 = code_parameters(&toric_code(3).unwrap(), 8);
    assert_eq!((t3.n, t3.k, t3.d), (18, 2, Some(Distance::Exact(3))));

    let hgp = hypergraph_product(&ClassicalCode::repetition_path(3), &ClassicalCode::repetition_path(3)).unwrap();
    let h = code_parameters(&hgp, 8);
    assert_eq!((h.n, h.k, h.d), (13, 1, Some(Distance::Exact(3))));
}

#[test]
fn low_search_cap_gives_a_lower_bound() {
    let t3 = code_parameters(&toric_code(3).unwrap(), 2);
    assert_eq!(t3.d, Some(Distance::AtLeast(3)));
}

#[test]
fn hamiltonian_examples() {
    assert!(hamiltonian_description(&StabilizerCode::new(3, vec![]).unwrap()).is_empty());
    let two = hamiltonian_description(&repetition_code(2).unwrap());
    assert_eq!(two.len(), 1);
    assert_eq!((two[0].lambda, two[0].check.clone()), (1.0, p("ZZ")));

    let code = toric_code(2).unwrap();
    assert_eq!(hamiltonian_description(&code).len(), 8);
    let levels = symmetric_eigenvalues(&dense_h0(&code));
    assert!(levels[..4].iter().all(|l| l.abs() < 1e-10));
    assert!((levels[4] - 2.0).abs() < 1e-10);
}

#[test]
fn code_space_dimension_is_two_to_the_k() {
    for code in codes().into_iter().filter(|c| c.n() <= 10) {
        let levels = symmetric_eigenvalues(&dense_h0(&code));
        let zeros = levels.iter().filter(|l| l.abs() < 1e-9).count();
        assert_eq!(zeros, 1 << code.k(), "n = {}", code.n());
        assert!(levels[zeros] >= 1.0 - 1e-9);
    }
}

#[test]
fn rank_and_k_account_for_every_qubit() {
    for code in codes() {
        assert_eq!(code.k() + code.rank(), code.n());
    }
}

proptest! {
    #[test]
    fn syndromes_add_under_products(a in pauli_strategy(6), b in pauli_strategy(6)) {
        let code = repetition_code(6).unwrap();
        let (_, prod) = a.mul_phase(&b).unwrap();
        prop_assert_eq!(syndrome_of(&code, &prod), syndrome_of(&code, &a).xor(&syndrome_of(&code, &b)));
    }

    #[test]
    fn toric_syndromes_add_under_products(a in pauli_strategy(8), b in pauli_strategy(8)) {
        let code = toric_code(2).unwrap();
        let (_, prod) = a.mul_phase(&b).unwrap();
        prop_assert_eq!(syndrome_of(&code, &prod), syndrome_of(&code, &a).xor(&syndrome_of(&code, &b)));
    }
}
