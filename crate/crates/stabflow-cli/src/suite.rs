//! The acceptance suite. Each criterion returns a pass flag, the measured
//! values and its wall time; nothing but the timing depends on the clock.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use stabflow::code::StabilizerCode;
use stabflow::constructors::{
    cyclic_product_to_toric, field_code, hypergraph_product, ising_toric, repetition_code, toric_code, ClassicalCode, ToricLattice,
};
use stabflow::flow::{
    check_lemma_bounds, delta_kappa, epsilon_zero_search, flow_step, kappa_m, run_flow, FlowConstants, FlowState,
};
use stabflow::inequalities::{
    cluster_expansion_bounds, commutator_bound, generator_bounds, generator_small, projection_contraction, InequalityCheck,
};
use stabflow::lto::{check_with_checks, checks_touching, in_stabilizer_group, local_indistinguishability_check};
use stabflow::operator::PauliSum;
use stabflow::pauli::{Letter, PauliString};
use stabflow::perturbations::{plaquette_sum, uniform_field};
use stabflow::soundness::{min_expansion, soundness_profile};
use stabflow::spectrum::{spectral_report, SpectralReport, SpectrumMode};
use stabflow::swt::{decompose, generator_residual, kappa_norm, random_local_operator, solve_generator, split_blocks, CodeContext};

use crate::error::CliError;

pub const CRITERIA: [&str; 11] = ["1", "2", "3a", "3b", "4a", "4b", "5", "6", "7", "8", "9"];

/// Criteria that cannot pass as specified; see the README.
pub const KNOWN_UNATTAINABLE: [&str; 1] = ["4b"];

const GAP_EPS: [f64; 2] = [0.05, 0.1];
const SPLIT_EPS: f64 = 0.1;
const CONTROL_EPS: f64 = 0.05;
const PROFILE_BUDGET: usize = 1 << 20;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub summary: String,
    pub values: Value,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub passed: usize,
    pub failed: Vec<String>,
    pub total_seconds: f64,
}

/// Expands `--only` selectors (ids such as `3a`, bare numbers such as `3`,
/// or names such as `soundness`) into criterion ids.
///
/// # Errors
///
/// Unknown selectors are usage errors.
pub fn select(only: &[String]) -> Result<Vec<&'static str>, CliError> {
    if only.is_empty() {
        return Ok(CRITERIA.to_vec());
    }
    let mut chosen = BTreeSet::new();
    for sel in only {
        let ids: Vec<&str> = match sel.as_str() {
            "swt" | "generator" => vec!["1"],
            "gap" => vec!["2"],
            "splitting" => vec!["3a", "3b"],
            "controls" | "negative" => vec!["4a", "4b"],
            "soundness" => vec!["5"],
            "flow" => vec!["6"],
            "inequalities" => vec!["7"],
            "lto" => vec!["8"],
            "oracles" => vec!["9"],
            other => CRITERIA.iter().copied().filter(|c| *c == other || c.trim_end_matches(['a', 'b']) == other).collect(),
        };
        if ids.is_empty() {
            return Err(CliError::Usage(format!("unknown criterion {sel:?}")));
        }
        chosen.extend(ids);
    }
    Ok(CRITERIA.iter().copied().filter(|c| chosen.contains(c)).collect())
}

/// Shared state across criteria: the seed and cached sparse spectra.
pub struct Suite {
    pub seed: u64,
    spectra: Mutex<HashMap<(String, u64), SpectralReport>>,
}

impl Suite {
    #[must_use]
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            spectra: Mutex::new(HashMap::new()),
        }
    }

    /// Runs the selected criteria in order.
    #[must_use]
    pub fn run(&self, ids: &[&str]) -> SuiteReport {
        let start = Instant::now();
        let criteria: Vec<CriterionResult> = ids.iter().map(|id| self.criterion(id)).collect();
        let failed = criteria.iter().filter(|c| !c.passed).map(|c| c.id.clone()).collect();
        SuiteReport {
            seed: self.seed,
            passed: criteria.iter().filter(|c| c.passed).count(),
            failed,
            criteria,
            total_seconds: start.elapsed().as_secs_f64(),
        }
    }

    /// # Panics
    ///
    /// Panics on an id outside [`CRITERIA`].
    #[must_use]
    pub fn criterion(&self, id: &str) -> CriterionResult {
        let start = Instant::now();
        let (title, outcome) = match id {
            "1" => ("SWT defining equation", self.c1()),
            "2" => ("gap stability", self.c2()),
            "3a" => ("repetition splitting slope", self.c3a()),
            "3b" => ("toric splitting shrinks with L", self.c3b()),
            "4a" => ("longitudinal field breaks the repetition pair", self.c4a()),
            "4b" => ("ising_toric plaquette perturbation splits the ground space", self.c4b()),
            "5" => ("soundness certification", self.c5()),
            "6" => ("flow-equation fidelity", self.c6()),
            "7" => ("operator-norm inequalities", self.c7()),
            "8" => ("local indistinguishability", self.c8()),
            "9" => ("oracle equivalences", self.c9()),
            other => panic!("unknown criterion {other}"),
        };
        let (passed, summary, values) = outcome.unwrap_or_else(|e| (false, format!("error: {e}"), Value::Null));
        CriterionResult {
            id: id.to_string(),
            title: title.to_string(),
            passed,
            summary,
            values,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn spectrum(&self, name: &str, code: &StabilizerCode, v: &PauliSum, eps: f64) -> Result<SpectralReport, CliError> {
        let key = (name.to_string(), eps.to_bits());
        if let Some(r) = self.spectra.lock().expect("cache lock").get(&key) {
            return Ok(r.clone());
        }
        let r = spectral_report(code, v, eps, (1 << code.k()) + 4, SpectrumMode::auto(code.n()), self.seed)?;
        self.spectra.lock().expect("cache lock").insert(key, r.clone());
        Ok(r)
    }

    fn toric_x(&self, l: usize, eps: f64) -> Result<SpectralReport, CliError> {
        let code = toric_code(l)?;
        self.spectrum(&format!("toric{l}-x"), &code, &uniform_field(code.n(), Letter::X), eps)
    }

    fn c1(&self) -> Outcome {
        let residuals: Vec<f64> = (0..50u64)
            .into_par_iter()
            .map(|i| -> Result<f64, CliError> {
                let code = if i % 2 == 0 { repetition_code(3 + (i as usize / 2) % 6)? } else { toric_code(2)? };
                let ctx = CodeContext::new(&code)?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(1_000).wrapping_add(i));
                let terms = rng.gen_range(1..=8);
                let v = decompose(&random_local_operator(&ctx, &mut rng, terms, 4), &ctx)?;
                let a = solve_generator(&ctx, &v)?;
                Ok(generator_residual(&ctx, &v, &a))
            })
            .collect::<Result<_, _>>()?;
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        Ok((
            worst <= 1e-10,
            format!("max residual {worst:.3e} over 50 perturbations (tol 1e-10)"),
            json!({ "max_residual": worst, "count": residuals.len() }),
        ))
    }

    fn c2(&self) -> Outcome {
        let mut rows = Vec::new();
        let mut ok = true;
        for l in [2, 3] {
            let grid: &[f64] = if l == 2 { &GAP_EPS } else { &GAP_EPS[1..] };
            for &eps in grid {
                let r = self.toric_x(l, eps)?;
                ok &= r.cluster_size == 4 && r.gap > 0.5;
                rows.push(json!({ "L": l, "epsilon": eps, "mode": r.mode, "cluster_size": r.cluster_size, "gap": r.gap, "splitting": r.splitting }));
            }
        }
        let min_gap = rows.iter().map(|r| r["gap"].as_f64().unwrap_or(0.0)).fold(f64::INFINITY, f64::min);
        Ok((ok, format!("4-state clusters, min gap {min_gap:.4} (> 0.5)"), Value::Array(rows)))
    }

    fn c3a(&self) -> Outcome {
        let mut points = Vec::new();
        for n in [4usize, 6, 8] {
            // Domain walls cost 2 so the n-th order splitting scales as ε^n.
            let code = repetition_code(n)?.reweighted(vec![2.0; n - 1])?;
            let r = spectral_report(&code, &uniform_field(n, Letter::X), SPLIT_EPS, 6, SpectrumMode::Dense, self.seed)?;
            points.push((n as f64, r.lowest_spread));
        }
        let slope = least_squares_slope(&points.iter().map(|&(n, s)| (n, s.ln())).collect::<Vec<_>>());
        let target = SPLIT_EPS.ln();
        let rel = ((slope - target) / target).abs();
        Ok((
            rel <= 0.25,
            format!("slope {slope:.6} vs log ε = {target:.6} (rel. diff {rel:.2e}, tol 0.25)"),
            json!({ "slope": slope, "target": target, "splittings": points }),
        ))
    }

    fn c3b(&self) -> Outcome {
        let (two, three) = (self.toric_x(2, SPLIT_EPS)?, self.toric_x(3, SPLIT_EPS)?);
        Ok((
            three.splitting < two.splitting,
            format!("δE(L=3) = {:.4e} < δE(L=2) = {:.4e} at ε = {SPLIT_EPS}", three.splitting, two.splitting),
            json!({ "epsilon": SPLIT_EPS, "L2": two.splitting, "L3": three.splitting }),
        ))
    }

    fn c4a(&self) -> Outcome {
        let code = repetition_code(6)?;
        let bad = spectral_report(&code, &uniform_field(6, Letter::Z), CONTROL_EPS, 6, SpectrumMode::Dense, self.seed)?;
        let sound = spectral_report(&code, &uniform_field(6, Letter::X), CONTROL_EPS, 6, SpectrumMode::Dense, self.seed)?;
        Ok(control_outcome(bad.lowest_spread, sound.lowest_spread, CONTROL_EPS))
    }

    fn c4b(&self) -> Outcome {
        let code = ising_toric(3)?;
        let bad = self.spectrum("ising_toric3-plaquettes", &code, &plaquette_sum(3), SPLIT_EPS)?;
        let sound = self.toric_x(3, SPLIT_EPS)?;
        Ok(control_outcome(bad.lowest_spread, sound.splitting, SPLIT_EPS))
    }

    fn c5(&self) -> Outcome {
        let mut ok = true;
        let mut values = BTreeMap::new();
        for l in [2usize, 3] {
            let p = soundness_profile(&toric_code(l)?, 2 * l * l, PROFILE_BUDGET, 0, self.seed);
            let holds = p.certified && p.rows.iter().all(|r| r.f_emp <= r.m * r.m);
            ok &= holds;
            values.insert(format!("toric_L{l}"), json!({ "certified": p.certified, "holds": holds, "f": p.rows.iter().map(|r| r.f_emp).collect::<Vec<_>>() }));
        }
        let rep3 = ClassicalCode::repetition_path(3);
        let hgp = soundness_profile(&hypergraph_product(&rep3, &rep3)?, 13, PROFILE_BUDGET, 0, self.seed);
        let sectors = [hgp.x_sector.clone(), hgp.z_sector.clone()];
        let hgp_ok = sectors.iter().all(|s| s.as_ref().is_some_and(|rows| rows.iter().all(|r| 4 * r.f_emp <= r.m * r.m)));
        ok &= hgp_ok;
        values.insert("hgp_rep3".into(), json!({ "holds": hgp_ok }));
        let rep = repetition_code(8)?;
        let count = min_expansion(&rep, &PauliString::z_on(8, &[0, 7]), 8)?.map(|e| e.count);
        ok &= count == Some(7);
        values.insert("rep8_z1z8".into(), json!(count));
        Ok((ok, format!("toric f ≤ M², HGP 4f ≤ M² per sector, rep-8 Z₁Z₈ needs {} checks (want 7)", count.map_or("no".into(), |c| c.to_string())), json!(values)))
    }

    fn c6(&self) -> Outcome {
        let mut ok = true;
        let mut values = Vec::new();
        for cfp in [0.1, 0.5] {
            let c = reference_constants(cfp);
            let e0 = epsilon_zero_search(&c, 10_000)?;
            let traj = run_flow(&c, e0.epsilon0, 200);
            let check = check_lemma_bounds(&traj, c.kappa1, e0.c_iter.c_iter, e0.epsilon0, 1e-10);
            let eps = e0.epsilon0;
            let s2 = flow_step(&FlowState::initial(c.kappa1, eps), &c);
            let hand = 27.0 * eps * eps / (kappa_m(c.kappa1, 2) * delta_kappa(c.kappa1, 1));
            let step_err = ((s2.v_tilde - hand) / hand).abs();
            ok &= check.holds && step_err <= 1e-12;
            values.push(json!({ "c_f_prime": cfp, "c_iter": e0.c_iter.c_iter, "epsilon0": eps, "lemma_holds": check.holds, "worst": check.worst, "step_rel_err": step_err }));
        }
        Ok((ok, "lemma bounds hold for m ≤ 200 at ε₀; step 1 matches to 1e-12".into(), Value::Array(values)))
    }

    fn c7(&self) -> Outcome {
        let (kappa, dk) = (1.0, 0.2);
        let per_pair: Vec<(bool, f64, usize)> = (0..100u64)
            .into_par_iter()
            .map(|i| -> Result<(bool, f64, usize), CliError> {
                let code = match i % 4 {
                    0 => repetition_code(4 + (i as usize / 4) % 5)?,
                    1 => toric_code(2)?,
                    2 => field_code(6)?,
                    _ => repetition_code(8)?,
                };
                let ctx = CodeContext::new(&code)?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(7_919).wrapping_add(i));
                let (tv, td) = (rng.gen_range(2..=6), rng.gen_range(1..=4));
                let raw = decompose(&random_local_operator(&ctx, &mut rng, tv, 3), &ctx)?;
                let d = split_blocks(&decompose(&random_local_operator(&ctx, &mut rng, td, 3), &ctx)?, &ctx).0;
                // Shrink V until the generator meets ‖A‖_κ <= δκ/3.
                let a_unit = kappa_norm(&solve_generator(&ctx, &raw)?, kappa)?;
                let scale = if a_unit > 0.0 { (0.9 * dk / (3.0 * a_unit)).min(1.0) } else { 1.0 };
                let v = raw.scaled_re(scale);
                let a = solve_generator(&ctx, &v)?;
                let mut checks: Vec<InequalityCheck> = projection_contraction(&ctx, &v)?;
                checks.extend(generator_bounds(&ctx, &v, kappa)?);
                checks.push(commutator_bound(&d, &a, kappa, dk)?);
                let hypothesis = generator_small(&a, kappa, dk)?;
                if hypothesis {
                    checks.extend(cluster_expansion_bounds(&ctx, &a, &d, kappa, dk)?);
                }
                let margin = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
                Ok((hypothesis && checks.iter().all(|c| c.holds), margin, checks.len()))
            })
            .collect::<Result<_, _>>()?;
        let failures = per_pair.iter().filter(|p| !p.0).count();
        let margin = per_pair.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let total: usize = per_pair.iter().map(|p| p.2).sum();
        Ok((
            failures == 0,
            format!("{total} inequalities on 100 pairs, {failures} failing pairs, min margin {margin:.3e}"),
            json!({ "pairs": 100, "inequalities": total, "failing_pairs": failures, "min_margin": margin }),
        ))
    }

    fn c8(&self) -> Outcome {
        let lat = ToricLattice { l: 4 };
        let code = toric_code(4)?;
        let hole: Vec<PauliString> = [(1, 1), (2, 1), (1, 2), (2, 2)].iter().map(|&(x, y)| lat.face_check(x, y)).collect();
        let loop_op = hole.iter().skip(1).try_fold(hole[0].clone(), |acc, f| acc.multiply(f)).expect("same length");
        let s = loop_op.support();
        let hole_idx: Vec<usize> = hole.iter().filter_map(|f| code.checks().iter().position(|c| c == f)).collect();
        let unfilled: Vec<usize> = checks_touching(&code, &s).into_iter().filter(|c| !hole_idx.contains(c)).collect();
        let open = check_with_checks(&code, &s, &unfilled, 0, self.seed);
        let z_loop = open
            .counterexample
            .as_deref()
            .and_then(|w| w.parse::<PauliString>().ok())
            .is_some_and(|w| w.is_z_type() && w.weight() == s.len() && in_stabilizer_group(&code, &w));
        let filled = local_indistinguishability_check(&code, &s, 1, 0, self.seed);
        Ok((
            !open.holds && z_loop && filled.holds,
            format!(
                "unfilled annulus: counterexample {}; filled: {}",
                open.counterexample.as_deref().unwrap_or("none"),
                if filled.holds { "holds" } else { "fails" }
            ),
            json!({ "unfilled": open, "filled": filled }),
        ))
    }

    fn c9(&self) -> Outcome {
        let pairs = dense_commutation_mismatches(5);
        let mut expansion_mismatches = 0;
        let mut compared = 0;
        let rep3 = ClassicalCode::repetition_path(3);
        for code in [repetition_code(8)?, toric_code(2)?, ising_toric(2)?, hypergraph_product(&rep3, &rep3)?] {
            let (m, c) = expansion_mismatches_for(&code)?;
            expansion_mismatches += m;
            compared += c;
        }
        let mut iso = true;
        for l in [2, 3] {
            let rep = ClassicalCode::repetition_cyclic(l);
            let hgp = hypergraph_product(&rep, &rep)?;
            let map = cyclic_product_to_toric(l);
            let moved: BTreeSet<String> = hgp.checks().iter().map(|c| relabel(c, &map).to_string()).collect();
            let toric: BTreeSet<String> = toric_code(l)?.checks().iter().map(ToString::to_string).collect();
            iso &= moved == toric;
        }
        Ok((
            pairs.0 == 0 && expansion_mismatches == 0 && iso,
            format!(
                "{} Pauli pairs ({} mismatches); {compared} stabilizers ({expansion_mismatches} mismatches); HGP ≅ toric: {iso}",
                pairs.1, pairs.0
            ),
            json!({ "pauli_pairs": pairs.1, "pauli_mismatches": pairs.0, "stabilizers": compared, "expansion_mismatches": expansion_mismatches, "hgp_isomorphic": iso }),
        ))
    }
}

type Outcome = Result<(bool, String, Value), CliError>;

/// Flow constants used for the fidelity check: κ₁ = 1, Δ = 5, c_f″ = 1,
/// α = 1, c̃_f″ = 2.
#[must_use]
pub fn reference_constants(c_f_prime: f64) -> FlowConstants {
    FlowConstants {
        kappa1: 1.0,
        delta: 5,
        c_f_prime,
        c_f_dblprime: 1.0,
        alpha: 1.0,
        c_tilde_f_dblprime: 2.0,
    }
}

fn control_outcome(split: f64, sound: f64, eps: f64) -> (bool, String, Value) {
    let ratio = split / eps;
    (
        ratio > 0.5 && split > 10.0 * sound,
        format!("δE/ε = {ratio:.4e} (need > 0.5), δE = {split:.4e} (need > 10 × sound splitting {sound:.4e})"),
        json!({ "epsilon": eps, "splitting": split, "ratio": ratio, "sound_splitting": sound }),
    )
}

#[must_use]
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    num / den
}

fn relabel(p: &PauliString, map: &[usize]) -> PauliString {
    let mut out = PauliString::identity(p.n());
    for q in 0..p.n() {
        out.set_letter(map[q], p.letter(q));
    }
    out.with_sign(p.is_negative())
}

/// Compares symplectic commutation with dense matrix products for every
/// pair of Paulis on up to `n_max` qubits. Returns (mismatches, pairs).
fn dense_commutation_mismatches(n_max: usize) -> (usize, usize) {
    let mut mismatches = 0;
    let mut pairs = 0;
    for n in 1..=n_max {
        let paulis: Vec<PauliString> = (0..4usize.pow(n as u32))
            .map(|mut code| {
                let mut p = PauliString::identity(n);
                for q in 0..n {
                    p.set_letter(q, [Letter::I, Letter::X, Letter::Y, Letter::Z][code % 4]);
                    code /= 4;
                }
                p
            })
            .collect();
        let mats: Vec<_> = paulis.iter().map(|p| PauliSum::from_pauli(p, 1.0).to_dense()).collect();
        // AB and BA agree on the first basis vector exactly when they commute,
        // since Pauli products are invertible and AB = ±BA.
        let cols: Vec<_> = mats.iter().map(|m| m.column(0).into_owned()).collect();
        let bad: usize = (0..paulis.len())
            .into_par_iter()
            .map(|i| {
                (0..paulis.len())
                    .filter(|&j| {
                        let ab = &mats[i] * &cols[j];
                        let ba = &mats[j] * &cols[i];
                        let dense = (ab - ba).norm() < 1e-12;
                        paulis[i].commutes(&paulis[j]).expect("same length") != dense
                    })
                    .count()
            })
            .sum();
        mismatches += bad;
        pairs += paulis.len() * paulis.len();
    }
    (mismatches, pairs)
}

/// Runs `min_expansion` on every stabilizer and compares with the fewest
/// checks over all `2^m` subsets. Returns (mismatches, stabilizers).
fn expansion_mismatches_for(code: &StabilizerCode) -> Result<(usize, usize), CliError> {
    let m = code.num_checks();
    assert!(m <= 16, "exhaustive enumeration is limited to 16 checks");
    let masks: Vec<(u64, u64)> = code.checks().iter().map(PauliString::masks).collect();
    let mut best: HashMap<(u64, u64), (u32, u32)> = HashMap::new();
    for subset in 0u32..(1 << m) {
        let key = (0..m).filter(|&i| subset >> i & 1 == 1).fold((0, 0), |acc, i| (acc.0 ^ masks[i].0, acc.1 ^ masks[i].1));
        let e = best.entry(key).or_insert((subset.count_ones(), subset));
        if subset.count_ones() < e.0 {
            *e = (subset.count_ones(), subset);
        }
    }
    let results: Vec<bool> = best
        .par_iter()
        .map(|(_, &(count, subset))| -> Result<bool, CliError> {
            let idx: Vec<usize> = (0..m).filter(|&i| subset >> i & 1 == 1).collect();
            let stab = code.product_of(&idx);
            let found = min_expansion(code, &stab, m)?.map(|e| e.count);
            Ok(found == Some(count as usize))
        })
        .collect::<Result<_, _>>()?;
    Ok((results.iter().filter(|ok| !**ok).count(), results.len()))
}
