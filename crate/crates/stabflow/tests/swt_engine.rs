use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabflow::code::StabilizerCode;
use stabflow::constructors::{field_code, repetition_code, toric_code};
use stabflow::inequalities::{cluster_expansion_bounds, commutator_bound, generator_bounds, generator_small, projection_contraction};
use stabflow::operator::{hermitian_eigenvalues, op_norm, PauliSum};
use stabflow::pauli::{Letter, PauliString};
use stabflow::perturbations::{two_body, uniform_field};
use stabflow::swt::{
    block_split, decompose, generator_residual, initial_split, kappa_norm, patch_norm, random_local_operator, solve_generator,
    split_blocks, swt_run, swt_step, CodeContext, QuasiLocalOperator, SwtError,
};

fn p(s: &str) -> PauliString {
    s.parse().unwrap()
}

fn ctx(code: &StabilizerCode) -> CodeContext {
    CodeContext::new(code).unwrap()
}

fn close(a: &PauliSum, b: &PauliSum, tol: f64) -> bool {
    a.minus(b).max_coeff() <= tol
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn random_v(code: &StabilizerCode, seed: u64, terms: usize, max_weight: usize) -> PauliSum {
    random_local_operator(&ctx(code), &mut ChaCha8Rng::seed_from_u64(seed), terms, max_weight)
}

#[test]
fn decompose_examples() {
    let rep = repetition_code(5).unwrap();
    let c = ctx(&rep);
    let id = decompose(&PauliSum::identity(5), &c).unwrap();
    let terms: Vec<_> = id.terms().collect();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0].support, 0);
    assert!(terms[0].syndrome.is_zero());

    let x2 = decompose(&PauliSum::from_pauli(&p("IIXII"), 1.0), &c).unwrap();
    let t = x2.terms().next().unwrap();
    assert_eq!(t.support, 0b01110);
    assert_eq!(t.syndrome.iter_ones().collect::<Vec<_>>(), vec![1, 2]);

    let field = ctx(&field_code(3).unwrap());
    let eps = 0.1;
    let v = PauliSum::from_pauli(&p("XXI"), eps).plus(&PauliSum::from_pauli(&p("ZZI"), eps));
    let q = decompose(&v, &field).unwrap();
    let mut keys: Vec<(u64, Vec<usize>)> = q.terms().map(|t| (t.support, t.syndrome.iter_ones().collect())).collect();
    keys.sort();
    assert_eq!(keys, vec![(0b011, vec![]), (0b011, vec![0, 1])]);

    assert!(matches!(
        decompose(&PauliSum::identity(4), &c),
        Err(SwtError::LengthMismatch { expected: 5, found: 4 })
    ));
}

#[test]
fn kappa_norm_examples() {
    let c = ctx(&repetition_code(5).unwrap());
    let x2 = decompose(&PauliSum::from_pauli(&p("IIXII"), 1.0), &c).unwrap();
    for kappa in [0.5, 1.0, 2.0] {
        let got = kappa_norm(&x2, kappa).unwrap();
        assert!((got - (3.0 * kappa).exp()).abs() < 1e-12 * got);
    }
    assert_eq!(kappa_norm(&QuasiLocalOperator::zero(5), 1.0).unwrap(), 0.0);
}

#[test]
fn local_projector_examples() {
    let toric = toric_code(2).unwrap();
    let c = ctx(&toric);
    assert!(close(&c.local_projector(0), &PauliSum::identity(8), 0.0));
    let full = c.local_projector(0xff);
    assert!((full.to_dense().trace().re - 4.0).abs() < 1e-10);
    for mask in [0xff, 0x0f, 0b1011_0110] {
        let proj = c.local_projector(mask);
        assert!(close(&proj.mul(&proj), &proj, 1e-12), "mask {mask:#x}");
        assert!(proj.is_hermitian(1e-14));
    }
}

#[test]
fn block_split_on_a_flipped_pair() {
    let c = ctx(&field_code(2).unwrap());
    let eps = 0.3;
    let v = decompose(&PauliSum::from_pauli(&p("XX"), eps), &c).unwrap();
    let t = v.terms().next().unwrap();
    let (diag, off) = block_split(&t, &c);
    // |00⟩⟨11| + |11⟩⟨00| = (XX − YY)/2 couples the code state to the
    // doubly-excited one; |01⟩⟨10| + h.c. = (XX + YY)/2 stays excited.
    let xx = PauliSum::from_pauli(&p("XX"), eps / 2.0);
    let yy = PauliSum::from_pauli(&p("YY"), eps / 2.0);
    assert!(close(&off, &xx.minus(&yy), 1e-14));
    assert!(close(&diag, &xx.plus(&yy), 1e-14));
    let od = off.to_dense();
    assert!((od[(0, 3)].re - eps).abs() < 1e-14 && od[(1, 2)].norm() < 1e-14);
    let dd = diag.to_dense();
    assert!((dd[(1, 2)].re - eps).abs() < 1e-14 && dd[(0, 3)].norm() < 1e-14);
}

#[test]
fn stabilizer_payloads_are_diagonal() {
    let c = ctx(&field_code(2).unwrap());
    let v = decompose(&PauliSum::from_pauli(&p("ZZ"), 0.7).plus(&PauliSum::from_pauli(&p("ZI"), -0.2)), &c).unwrap();
    let (_, off) = split_blocks(&v, &c);
    assert!(off.total().max_coeff() == 0.0);
    let toric = toric_code(2).unwrap();
    let ct = ctx(&toric);
    let star = decompose(&PauliSum::from_pauli(&toric.checks()[0], 1.0), &ct).unwrap();
    let (diag, off) = split_blocks(&star, &ct);
    assert!(off.total().max_coeff() == 0.0);
    assert!(close(&diag.total(), &star.total(), 0.0));
}

#[test]
fn generator_examples() {
    let c = ctx(&field_code(3).unwrap());
    let diag_only = decompose(&uniform_field(3, Letter::Z).scaled_re(0.1), &c).unwrap();
    assert!(solve_generator(&c, &diag_only).unwrap().total().max_coeff() == 0.0);

    let eps = 0.05;
    let v = decompose(&PauliSum::from_pauli(&p("XXI"), eps), &c).unwrap();
    let a = solve_generator(&c, &v).unwrap();
    let dense = a.total().to_dense();
    assert!((op_norm(&dense) - eps / 2.0).abs() < 1e-12);
    assert!(frobenius(&(&dense + dense.adjoint())) < 1e-14);
    assert!(generator_residual(&c, &v, &a) <= 1e-10);
    for t in a.terms() {
        assert!((patch_norm(&t.payload, t.support).unwrap() - eps / 2.0).abs() < 1e-12);
    }
}

#[test]
fn zero_perturbation_step_is_the_identity() {
    let c = ctx(&repetition_code(4).unwrap());
    let zero = QuasiLocalOperator::zero(4);
    let e = DMatrix::<Complex64>::zeros(16, 16);
    let out = swt_step(&c, &zero, &zero, &e, 5).unwrap();
    assert!(out.d.is_empty() && out.v.is_empty() && out.a.is_empty());
    assert!(frobenius(&(out.exp_a - DMatrix::<Complex64>::identity(16, 16))) < 1e-14);
    assert_eq!(frobenius(&out.e), 0.0);
}

#[test]
fn first_step_keeps_the_zz_couplings() {
    let n = 6;
    let eps = 0.02;
    let c = ctx(&field_code(n).unwrap());
    let v = two_body(n, 3).scaled_re(eps);
    let (d, v1, e) = initial_split(&c, &v, n + 1).unwrap();
    let out = swt_step(&c, &d, &v1, &e, n + 1).unwrap();
    let d2 = out.d.total();
    for i in 0..n {
        for j in i + 1..n {
            let zz = PauliString::z_on(n, &[i, j]).masks();
            assert!((d2.coeff(zz) - v.coeff(zz)).norm() < 1e-15);
        }
    }
    // The remaining parts of D₂ live on the excited block: D₂|0⟩ = ⟨D₂⟩|0⟩.
    let code_value: f64 = v.iter().filter(|(k, _)| k.0 == 0).map(|(_, c)| c.re).sum();
    let column = d2.to_dense().column(0).into_owned();
    assert!((column[0].re - code_value).abs() < 1e-14);
    assert!(column.iter().skip(1).all(|x| x.norm() < 1e-14));
    assert!(out.conjugation_error <= 1e-9);
    assert!(out.generator_residual <= 1e-10);
}

#[test]
fn second_order_remainder_scales_quadratically() {
    let n = 6;
    let code = field_code(n).unwrap();
    let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eps| {
            let run = swt_run(&code, &two_body(n, 1).scaled_re(eps), 2, n + 1, 1.0).unwrap();
            run.orders[1].v / (eps * eps)
        })
        .collect();
    assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 1.1, "{ratios:?}");
}

#[test]
fn remainders_shrink_geometrically() {
    let n = 6;
    let code = field_code(n).unwrap();
    let run = swt_run(&code, &two_body(n, 5).scaled_re(0.02), 6, n + 1, 1.0).unwrap();
    assert!(!run.diverged);
    let v: Vec<f64> = run.orders.iter().map(|o| o.v).collect();
    for w in v.windows(2) {
        assert!(w[1] < 0.5 * w[0], "{v:?}");
    }
    assert!(run.schedule_sup <= 2.0 * run.epsilon);
}

#[test]
fn single_order_run_returns_the_input_split() {
    let code = repetition_code(4).unwrap();
    let v = uniform_field(4, Letter::X).scaled_re(0.1);
    let run = swt_run(&code, &v, 1, 5, 1.0).unwrap();
    assert_eq!(run.orders.len(), 1);
    assert_eq!(run.unitaries.len(), 1);
    assert!(close(&run.v.total(), &v, 1e-15));
    assert!(run.d.is_empty());
    assert!(run.generators.is_empty());
}

#[test]
fn conjugated_hamiltonian_matches_the_bookkeeping() {
    let cases = [
        (repetition_code(5).unwrap(), uniform_field(5, Letter::X).scaled_re(0.05)),
        (field_code(5).unwrap(), two_body(5, 2).scaled_re(0.05)),
        (toric_code(2).unwrap(), uniform_field(8, Letter::X).scaled_re(0.05)),
    ];
    for (code, v) in cases {
        let n = code.n();
        let c = ctx(&code);
        let run = swt_run(&code, &v, 4, n + 1, 1.0).unwrap();
        assert!(run.unitarity_error <= 1e-10);
        let h = c.hamiltonian().plus(&v).to_dense();
        let u = run.unitary();
        let dressed = u.adjoint() * &h * u;
        let pieces = c.hamiltonian().to_dense() + run.d.total().to_dense() + run.v.total().to_dense() + &run.e;
        assert!(frobenius(&(&dressed - pieces)) <= 1e-9, "n = {n}");
        let (a, b) = (hermitian_eigenvalues(&h), hermitian_eigenvalues(&dressed));
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
    }
}

#[test]
fn running_d_is_the_sum_of_diagonal_parts() {
    let code = repetition_code(4).unwrap();
    let c = ctx(&code);
    let v = uniform_field(4, Letter::X).scaled_re(0.1);
    let (mut d, mut vm, mut e) = initial_split(&c, &v, 5).unwrap();
    let mut sum = PauliSum::zero(4);
    for _ in 0..3 {
        sum = sum.plus(&split_blocks(&vm, &c).0.total());
        let out = swt_step(&c, &d, &vm, &e, 5).unwrap();
        assert!(close(&out.d.total(), &sum, 1e-13));
        (d, vm, e) = (out.d, out.v, out.e);
    }
}

#[test]
fn operator_norm_inequalities_on_samples() {
    let codes = [repetition_code(6).unwrap(), toric_code(2).unwrap()];
    let (kappa, dk) = (1.0, 0.2);
    for code in &codes {
        let c = ctx(code);
        for seed in 0..5 {
            let v = decompose(&random_v(code, seed, 4, 3).scaled_re(1e-5), &c).unwrap();
            for chk in projection_contraction(&c, &v).unwrap() {
                assert!(chk.holds, "{chk:?}");
            }
            for chk in generator_bounds(&c, &v, kappa).unwrap() {
                assert!(chk.holds, "{chk:?}");
            }
            let a = solve_generator(&c, &v).unwrap();
            let d = split_blocks(&decompose(&random_v(code, seed + 100, 3, 3), &c).unwrap(), &c).0;
            let chk = commutator_bound(&d, &a, kappa, dk).unwrap();
            assert!(chk.holds, "{chk:?}");
            assert!(generator_small(&a, kappa, dk).unwrap());
            for chk in cluster_expansion_bounds(&c, &a, &d, kappa, dk).unwrap() {
                assert!(chk.holds, "{chk:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_reconstructs_the_operator(seed in any::<u64>(), terms in 1usize..8, w in 1usize..4) {
        let code = repetition_code(6).unwrap();
        let c = ctx(&code);
        let v = random_v(&code, seed, terms, w);
        let q = decompose(&v, &c).unwrap();
        prop_assert!(close(&q.total(), &v, 1e-14));
        for t in q.terms() {
            for (k, _) in t.payload.iter() {
                prop_assert_eq!(c.syndrome(k), t.syndrome.clone());
                prop_assert_eq!((k.0 | k.1) & !t.support, 0);
            }
        }
    }

    #[test]
    fn block_split_is_exact(seed in any::<u64>(), terms in 1usize..6) {
        let code = toric_code(2).unwrap();
        let c = ctx(&code);
        let q = decompose(&random_v(&code, seed, terms, 3), &c).unwrap();
        for t in q.terms() {
            let (diag, off) = block_split(&t, &c);
            prop_assert!(close(&diag.plus(&off), &t.payload, 1e-13));
            let proj = c.local_projector(t.support);
            prop_assert!(proj.commutator(&diag).max_coeff() < 1e-12);
            prop_assert!(proj.mul(&off).mul(&proj).max_coeff() < 1e-12);
        }
    }

    #[test]
    fn kappa_norm_is_monotone(seed in any::<u64>(), k in 0.05f64..3.0) {
        let code = repetition_code(6).unwrap();
        let q = decompose(&random_v(&code, seed, 5, 3), &ctx(&code)).unwrap();
        prop_assert!(kappa_norm(&q, k).unwrap() <= kappa_norm(&q, k * 1.3).unwrap());
    }

    #[test]
    fn generator_solves_the_defining_equation(seed in any::<u64>(), n in 3usize..9) {
        let code = repetition_code(n).unwrap();
        let c = ctx(&code);
        let v = decompose(&random_v(&code, seed, 6, 3), &c).unwrap();
        let a = solve_generator(&c, &v).unwrap();
        prop_assert!(generator_residual(&c, &v, &a) <= 1e-10);
    }
}
