use proptest::prelude::*;
use stabflow::code::Sector;
use stabflow::constructors::{repetition_code, toric_code, ToricLattice};
use stabflow::gf2::{min_support_solution, min_weight_codeword, rank, solve_affine, BitMatrix, BitVector};

fn identity(n: usize) -> BitMatrix {
    BitMatrix::from_rows(n, (0..n).map(|i| BitVector::from_indices(n, &[i])).collect()).unwrap()
}

fn toric2_z() -> BitMatrix {
    toric_code(2).unwrap().sector_matrix(Sector::Z)
}

/// Weight of the lightest `x` with `xᵀA = b`, by trying every `x`.
fn brute_min_support(a: &BitMatrix, b: &BitVector) -> Option<usize> {
    let rows = a.nrows();
    (0u64..1 << rows)
        .filter(|&mask| a.combine_rows(&BitVector::from_word(rows, mask)) == *b)
        .map(|mask| mask.count_ones() as usize)
        .min()
}

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), c), r)
            .prop_map(move |rows| BitMatrix::from_rows(c, rows.iter().map(|b| BitVector::from_bools(b)).collect()).unwrap())
    })
}

#[test]
fn rank_examples() {
    assert_eq!(rank(&identity(3)), 3);
    assert_eq!(rank(&BitMatrix::zeros(4, 5)), 0);
    let z = toric2_z();
    assert_eq!((z.nrows(), z.ncols()), (4, 8));
    assert_eq!(rank(&z), 3);
}

#[test]
fn rank_leaves_input_alone() {
    let z = toric2_z();
    let copy = z.clone();
    let _ = rank(&z);
    assert_eq!(z, copy);
}

#[test]
fn solve_affine_examples() {
    let b = BitVector::from_indices(5, &[0, 2, 3]);
    let sol = solve_affine(&identity(5), &b).unwrap().unwrap();
    assert_eq!(sol.particular, b);
    assert!(sol.nullspace.is_empty());

    let none = solve_affine(&BitMatrix::zeros(3, 3), &BitVector::from_indices(3, &[1])).unwrap();
    assert!(none.is_none());

    let z = toric2_z();
    let lat = ToricLattice { l: 2 };
    let target = BitVector::from_indices(8, &lat.plaquette(0, 0)).xor(&BitVector::from_indices(8, &lat.plaquette(1, 0)));
    let sol = solve_affine(&z, &target).unwrap().unwrap();
    assert_eq!(z.combine_rows(&sol.particular), target);
    let lightest = std::iter::once(sol.particular.clone())
        .chain(sol.nullspace.iter().map(|n| n.xor(&sol.particular)))
        .map(|x| x.weight())
        .min()
        .unwrap();
    assert_eq!(lightest, 2);
}

#[test]
fn solve_affine_rejects_wrong_length() {
    assert!(solve_affine(&identity(3), &BitVector::zeros(4)).is_err());
}

#[test]
fn min_support_examples() {
    let z = toric2_z();
    assert_eq!(min_support_solution(&z, &BitVector::zeros(8), 4).unwrap().unwrap().weight, 0);
    assert_eq!(min_support_solution(&z, z.row(2), 4).unwrap().unwrap().weight, 1);
    let target = z.row(0).xor(z.row(1));
    let best = min_support_solution(&z, &target, 4).unwrap().unwrap();
    assert_eq!(best.weight, 2);
    assert_eq!(brute_min_support(&z, &target), Some(2));
    assert!(min_support_solution(&z, &target, 1).unwrap().is_none());
}

#[test]
fn min_weight_codeword_examples() {
    let ones = BitMatrix::from_rows(5, vec![BitVector::ones(5)]).unwrap();
    assert_eq!(min_weight_codeword(&ones, &BitVector::zeros(5), 5).unwrap().unwrap().weight, 5);
    assert!(min_weight_codeword(&ones, &BitVector::zeros(5), 4).unwrap().is_none());
    assert_eq!(min_weight_codeword(&ones, &BitVector::ones(5), 5).unwrap().unwrap().weight, 0);

    let rep = repetition_code(5).unwrap().sector_matrix(Sector::Z);
    let single = BitVector::from_indices(5, &[2]);
    assert_eq!(min_weight_codeword(&rep, &single, 5).unwrap().unwrap().weight, 1);
}

#[test]
fn min_support_matches_enumeration_on_toric_sectors() {
    let code = toric_code(3).unwrap();
    let z = code.sector_matrix(Sector::Z);
    for mask in [0b1u64, 0b11, 0b101, 0b1_1000_0011, 0b1_1111_1110, 0b0_1010_1010] {
        let x = BitVector::from_word(z.nrows(), mask);
        let b = z.combine_rows(&x);
        let found = min_support_solution(&z, &b, z.nrows()).unwrap().map(|m| m.weight);
        assert_eq!(found, brute_min_support(&z, &b), "mask {mask:b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solutions_satisfy_the_system(a in matrix_strategy(10, 10), seed in any::<u64>()) {
        let x = BitVector::from_word(a.nrows(), seed & ((1u64 << a.nrows()) - 1));
        let b = a.combine_rows(&x);
        let sol = solve_affine(&a, &b).unwrap().expect("b is in the image by construction");
        prop_assert_eq!(a.combine_rows(&sol.particular), b);
        for n in &sol.nullspace {
            prop_assert!(a.combine_rows(n).is_zero());
        }
        prop_assert_eq!(rank(&a) + sol.nullspace.len(), a.nrows());
    }

    #[test]
    fn min_support_is_exact(a in matrix_strategy(12, 8), seed in any::<u64>()) {
        let x = BitVector::from_word(a.nrows(), seed & ((1u64 << a.nrows()) - 1));
        let b = a.combine_rows(&x);
        let found = min_support_solution(&a, &b, a.nrows()).unwrap().map(|m| m.weight);
        prop_assert_eq!(found, brute_min_support(&a, &b));
    }

    #[test]
    fn xor_is_an_involution(bits in prop::collection::vec(any::<bool>(), 1..150)) {
        let v = BitVector::from_bools(&bits);
        prop_assert_eq!(v.xor(&v).weight(), 0);
        prop_assert_eq!(v.weight(), bits.iter().filter(|&&b| b).count());
    }
}
