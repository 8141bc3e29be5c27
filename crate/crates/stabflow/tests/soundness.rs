use std::collections::HashMap;

use stabflow::code::{validate, Sector, StabilizerCode};
use stabflow::constructors::{hypergraph_product, ising_toric, repetition_code, toric_code, ClassicalCode, ToricLattice};
use stabflow::gf2::BitVector;
use stabflow::pauli::PauliString;
use stabflow::soundness::{
    expansion_profile, group_distances, min_expansion, soundness_profile, soundness_sum, tilde_f_eval, tilde_f_sequence, Growth,
    ProfileMode, SoundnessError, SoundnessFunction,
};

const BUDGET: usize = 1 << 20;

/// Fewest generators per group element, by trying every subset.
fn exhaustive_distances(gens: &[BitVector], len: usize) -> HashMap<BitVector, u32> {
    let mut best: HashMap<BitVector, u32> = HashMap::new();
    for mask in 0u64..1 << gens.len() {
        let mut v = BitVector::zeros(len);
        for (i, g) in gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v.xor_assign(g);
            }
        }
        let e = best.entry(v).or_insert(u32::MAX);
        *e = (*e).min(mask.count_ones());
    }
    best
}

/// Worst minimal count per weight, as a running maximum.
fn oracle_profile(dist: &HashMap<BitVector, u32>, weight: impl Fn(&BitVector) -> usize, m_max: usize) -> Vec<usize> {
    let mut worst = vec![0usize; m_max + 1];
    for (v, &d) in dist {
        let w = weight(v);
        if w <= m_max {
            worst[w] = worst[w].max(d as usize);
        }
    }
    let mut run = 0;
    worst
        .into_iter()
        .map(|w| {
            run = run.max(w);
            run
        })
        .collect()
}

fn hgp_rep3() -> StabilizerCode {
    hypergraph_product(&ClassicalCode::repetition_path(3), &ClassicalCode::repetition_path(3)).unwrap()
}

#[test]
fn min_expansion_examples() {
    let code = toric_code(2).unwrap();
    for c in code.checks() {
        assert_eq!(min_expansion(&code, c, 8).unwrap().unwrap().count, 1);
    }
    assert_eq!(min_expansion(&code, &PauliString::identity(8), 8).unwrap().unwrap().count, 0);
    let lat = ToricLattice { l: 2 };
    let pair = lat.face_check(0, 0).multiply(&lat.face_check(1, 0)).unwrap();
    let e = min_expansion(&code, &pair, 8).unwrap().unwrap();
    assert_eq!(e.count, 2);
    assert_eq!(code.product_of(&e.checks), pair);
}

#[test]
fn non_stabilizers_are_rejected() {
    let code = toric_code(2).unwrap();
    let single = PauliString::z_on(8, &[0]);
    assert!(matches!(min_expansion(&code, &single, 8), Err(SoundnessError::NotAStabilizer(_))));
    let flipped = code.checks()[0].clone().negated();
    assert!(matches!(min_expansion(&code, &flipped, 8), Err(SoundnessError::NotAStabilizer(_))));
    assert!(matches!(
        min_expansion(&code, &PauliString::identity(3), 8),
        Err(SoundnessError::LengthMismatch { .. })
    ));
}

#[test]
fn every_check_and_the_identity_are_trivial() {
    let codes = [repetition_code(6).unwrap(), toric_code(3).unwrap(), ising_toric(3).unwrap(), hgp_rep3()];
    for code in codes {
        assert_eq!(min_expansion(&code, &PauliString::identity(code.n()), 4).unwrap().unwrap().count, 0);
        for c in code.checks() {
            assert_eq!(min_expansion(&code, c, 4).unwrap().unwrap().count, 1);
        }
    }
}

#[test]
fn repetition_end_to_end_stabilizer() {
    for n in [5usize, 8] {
        let code = repetition_code(n).unwrap();
        let zz = PauliString::z_on(n, &[0, n - 1]);
        assert_eq!(min_expansion(&code, &zz, n).unwrap().unwrap().count, n - 1);
    }
    let profile = soundness_profile(&repetition_code(5).unwrap(), 2, BUDGET, 0, 0);
    assert_eq!(profile.mode, ProfileMode::FullGroup);
    assert_eq!(profile.f(2), 4);
    assert_eq!(profile.rows[2].witness.as_deref(), Some("+ZIIIZ"));
}

#[test]
fn toric_profiles_are_quadratic() {
    for l in [2usize, 3] {
        let code = toric_code(l).unwrap();
        let profile = soundness_profile(&code, 2 * l * l, BUDGET, 0, 0);
        assert!(profile.certified);
        assert_eq!(profile.mode, ProfileMode::FullGroup);
        for row in &profile.rows {
            assert!(row.f_emp <= row.m * row.m, "L = {l}, M = {}", row.m);
        }
    }
}

#[test]
fn hgp_sectors_meet_the_quarter_square_bound() {
    let profile = soundness_profile(&hgp_rep3(), 13, BUDGET, 0, 0);
    for rows in [profile.x_sector.unwrap(), profile.z_sector.unwrap()] {
        for row in rows {
            assert!(4 * row.f_emp <= row.m * row.m, "M = {}, f = {}", row.m, row.f_emp);
        }
    }
}

#[test]
fn profiles_match_subset_enumeration() {
    let cases = [toric_code(2).unwrap(), repetition_code(8).unwrap(), ising_toric(2).unwrap(), hgp_rep3()];
    for code in cases {
        let n = code.n();
        let m_max = n;
        let profile = soundness_profile(&code, m_max, BUDGET, 0, 0);
        let dist = exhaustive_distances(code.check_matrix().rows(), 2 * n);
        let oracle = oracle_profile(&dist, |v| v.slice(0, n).or(&v.slice(n, 2 * n)).weight(), m_max);
        let got: Vec<usize> = profile.rows.iter().map(|r| r.f_emp).collect();
        assert_eq!(got, oracle, "n = {n}");
        for (sector, rows) in [(Sector::X, &profile.x_sector), (Sector::Z, &profile.z_sector)] {
            let h = code.sector_matrix(sector);
            if h.nrows() == 0 {
                continue;
            }
            let dist = exhaustive_distances(h.rows(), n);
            let oracle = oracle_profile(&dist, BitVector::weight, m_max);
            let got: Vec<usize> = rows.as_ref().unwrap().iter().map(|r| r.f_emp).collect();
            assert_eq!(got, oracle, "n = {n}, {sector:?}");
        }
    }
}

#[test]
fn breadth_first_search_matches_enumeration() {
    let codes = [toric_code(2).unwrap(), hgp_rep3(), ising_toric(2).unwrap(), repetition_code(9).unwrap()];
    for code in codes {
        let a = code.check_matrix();
        assert!(a.nrows() <= 16);
        let bfs = group_distances(a.rows(), a.ncols(), BUDGET).unwrap();
        assert_eq!(bfs.len(), 1 << code.rank());
        let exhaustive = exhaustive_distances(a.rows(), a.ncols());
        assert_eq!(bfs.len(), exhaustive.len());
        for (v, d) in &exhaustive {
            assert_eq!(bfs[v], *d);
        }
    }
}

#[test]
fn group_search_respects_budget() {
    let code = toric_code(3).unwrap();
    assert!(group_distances(code.check_matrix().rows(), 36, 1000).is_none());
}

#[test]
fn profiles_are_monotone() {
    for code in [toric_code(3).unwrap(), ising_toric(3).unwrap(), hgp_rep3()] {
        let profile = soundness_profile(&code, 12, BUDGET, 0, 0);
        assert!(profile.rows.windows(2).all(|w| w[0].f_emp <= w[1].f_emp));
    }
}

#[test]
fn ising_toric_weight_four_expansion_grows_with_size() {
    let small = soundness_profile(&ising_toric(2).unwrap(), 4, BUDGET, 0, 0);
    let large = soundness_profile(&ising_toric(4).unwrap(), 4, BUDGET, 0, 0);
    assert!(small.certified && large.certified);
    assert!(large.f(4) > small.f(4), "{} vs {}", large.f(4), small.f(4));
}

#[test]
fn sampled_profiles_are_flagged() {
    let code = ising_toric(3).unwrap();
    let sampled = soundness_profile(&code, 8, 16, 200, 5);
    assert_eq!(sampled.mode, ProfileMode::Sampled);
    assert!(!sampled.certified && sampled.rows.iter().all(|r| !r.certified));
    assert_eq!(sampled, soundness_profile(&code, 8, 16, 200, 5));
}

#[test]
fn expansion_examples() {
    let rep = repetition_code(6).unwrap();
    let single = expansion_profile(&rep, 1, 0, 0);
    assert!(single.certified);
    assert_eq!(single.eta_emp, 2.0);
    let pair = expansion_profile(&rep, 2, 0, 0);
    assert_eq!(pair.eta_emp, 1.0);
    assert_eq!(rep.product_of(&[0, 1]).weight(), 2);

    let code = ising_toric(3).unwrap();
    let lat = ToricLattice { l: 3 };
    let pair = |a: (usize, usize), b: (usize, usize)| {
        let want = lat.face_check(a.0, a.1).multiply(&lat.face_check(b.0, b.1)).unwrap();
        code.checks().iter().position(|c| *c == want).unwrap()
    };
    let chain = [pair((0, 0), (1, 0)), pair((1, 0), (1, 1))];
    assert_eq!(code.product_of(&chain).weight(), 8);
    let long = ising_toric(6).unwrap();
    let lat6 = ToricLattice { l: 6 };
    let idx: Vec<usize> = (0..4)
        .map(|x| {
            let want = lat6.face_check(x, 0).multiply(&lat6.face_check(x + 1, 0)).unwrap();
            long.checks().iter().position(|c| *c == want).unwrap()
        })
        .collect();
    assert_eq!(long.product_of(&idx).weight(), 8);
    let sampled = expansion_profile(&long, 6, 2000, 3);
    assert!(!sampled.certified);
    assert!(sampled.eta_emp <= 8.0 / 2.0);
}

#[test]
fn tilde_f_examples() {
    let linear = SoundnessFunction::new(1.0, 1.0, None).unwrap();
    for r in 1..12 {
        let want = (4.0f64 / 3.0).powi(r as i32 - 1);
        assert!((tilde_f_eval(&linear, 3, r) - want).abs() <= 1e-12 * want);
    }
    let quad = SoundnessFunction::new(0.25, 0.0, Some(50.0)).unwrap();
    assert!((tilde_f_eval(&quad, 4, 1) - quad.inverse(1.0)).abs() < 1e-15);
    assert_eq!(tilde_f_eval(&quad, 4, 1), 2.0);
    let seq = tilde_f_sequence(&quad, 4, 40);
    assert_eq!(seq[0], 0.0);
    assert!(seq.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn soundness_sum_examples() {
    let linear = SoundnessFunction::new(1.0, 1.0, None).unwrap();
    let big = soundness_sum(&linear, 200.0, Growth::Envelope { delta: 3 }).unwrap();
    assert!((big.sum - 1.0).abs() < 1e-12);
    let unit = soundness_sum(&linear, 1.0, Growth::Envelope { delta: 3 }).unwrap();
    assert!(unit.sum.is_finite() && unit.holds, "{} vs {}", unit.sum, unit.bound);
    let flat = SoundnessFunction::new(1.0, 0.0, None).unwrap();
    assert!(matches!(
        soundness_sum(&flat, 1.0, Growth::Envelope { delta: 3 }),
        Err(SoundnessError::NonConvergent(_))
    ));
    assert!(soundness_sum(&linear, 0.0, Growth::Envelope { delta: 3 }).is_err());
}

#[test]
fn soundness_sum_holds_on_code_graphs() {
    let linear = SoundnessFunction::new(1.0, 1.0, None).unwrap();
    let quad = SoundnessFunction::new(1.0, 0.5, None).unwrap();
    let metrics = validate(&toric_code(4).unwrap()).unwrap();
    for f in [linear, quad] {
        for dk in [0.5, 1.0, 2.0] {
            let graph = soundness_sum(&f, dk, Growth::Graph(&metrics)).unwrap();
            assert!(graph.holds, "β = {}, δκ = {dk}: {} > {}", f.beta, graph.sum, graph.bound);
            let env = soundness_sum(&f, dk, Growth::Envelope { delta: metrics.delta }).unwrap();
            assert!(env.holds, "β = {}, δκ = {dk}: {} > {}", f.beta, env.sum, env.bound);
        }
    }
}
