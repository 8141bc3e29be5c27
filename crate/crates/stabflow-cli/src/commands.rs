use std::fmt::Write as _;
use std::io::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use stabflow::code::{code_parameters, StabilizerCode};
use stabflow::flow::{check_lemma_bounds, run_flow, smallest_valid_n, stability_certificate, FlowConstants};
use stabflow::operator::PauliSum;
use stabflow::soundness::{expansion_profile, soundness_profile};
use stabflow::spectrum::{projector_distances, relative_bound_estimate, spectral_report, SpectrumMode};
use stabflow::swt::swt_run;

use crate::artifact::CodeArtifact;
use crate::cli::{
    BuildArgs, CodeArgs, Common, Family, FamilyArgs, FlowArgs, Format, ModeArg, ParamsArgs, PerturbationArgs, PerturbationKind,
    SoundnessArgs, SpectrumArgs, SuiteArgs, SwtArgs,
};
use crate::error::CliError;
use crate::spec::{ClassicalSpec, CodeSpec, PerturbationSpec};
use crate::suite::{select, Suite};

/// Writes to `--out` or stdout.
///
/// # Errors
///
/// Propagates I/O failures.
pub fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn to_json(v: &impl Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn missing(flag: &str, family: Family) -> CliError {
    CliError::Usage(format!("{flag} is required for {family:?}"))
}

/// # Errors
///
/// Missing family parameters are usage errors.
pub fn family_spec(family: Family, p: &FamilyArgs) -> Result<CodeSpec, CliError> {
    let n = || p.n.ok_or_else(|| missing("--n", family));
    let l = || p.l.ok_or_else(|| missing("--L", family));
    Ok(match family {
        Family::Rep => CodeSpec::Repetition { n: n()? },
        Family::Cycle => CodeSpec::Cycle { n: n()? },
        Family::Field => CodeSpec::Field { n: n()? },
        Family::Toric => CodeSpec::Toric { l: l()? },
        Family::IsingToric => CodeSpec::IsingToric { l: l()? },
        Family::Hgp => CodeSpec::Hgp {
            left: ClassicalSpec::Alist {
                path: p.left.clone().ok_or_else(|| missing("--left", family))?,
            },
            right: ClassicalSpec::Alist {
                path: p.right.clone().ok_or_else(|| missing("--right", family))?,
            },
        },
    })
}

/// # Errors
///
/// Fails without `--code` or `--family`, or when construction fails.
pub fn resolve_code(args: &CodeArgs) -> Result<(CodeSpec, StabilizerCode), CliError> {
    if let Some(path) = &args.code {
        let artifact = CodeArtifact::load(path)?;
        let code = artifact.code()?;
        return Ok((artifact.input, code));
    }
    let family = args.family.ok_or_else(|| CliError::Usage("either --code or --family is required".into()))?;
    let spec = family_spec(family, &args.params)?;
    let code = spec.build()?;
    Ok((spec, code))
}

fn perturbation_spec(args: &PerturbationArgs, n: usize, seed: u64) -> Result<PerturbationSpec, CliError> {
    Ok(match args.perturbation {
        PerturbationKind::XField => PerturbationSpec::XField,
        PerturbationKind::ZField => PerturbationSpec::ZField,
        PerturbationKind::TwoBody => PerturbationSpec::TwoBody { seed },
        PerturbationKind::Plaquettes => {
            let l = (1..=n).find(|l| 2 * l * l >= n).unwrap_or(0);
            PerturbationSpec::Plaquettes { l }
        }
        PerturbationKind::Paulis => {
            if args.paulis.is_empty() {
                return Err(CliError::Usage("--perturbation paulis needs at least one --pauli".into()));
            }
            PerturbationSpec::Paulis { terms: args.paulis.clone() }
        }
    })
}

/// # Errors
///
/// Invalid parameters are usage errors.
pub fn build(common: &Common, args: &BuildArgs) -> Result<(), CliError> {
    let spec = family_spec(args.family, &args.params)?;
    let code = spec.build()?;
    let artifact = CodeArtifact::new(spec, &code, args.w_max)?;
    let text = match common.format {
        Format::Json => to_json(&artifact)?,
        Format::Csv => {
            let mut s = String::from("check,lambda\n");
            for (c, l) in artifact.checks.iter().zip(&artifact.lambdas) {
                writeln!(s, "{c},{l}").expect("string write");
            }
            s
        }
    };
    emit(common, &text)?;
    eprintln!("{} {}", artifact.summary(), if artifact.d_certified { "(d exact)" } else { "(d lower bound)" });
    Ok(())
}

/// # Errors
///
/// Fails when the code cannot be resolved.
pub fn params(common: &Common, args: &ParamsArgs) -> Result<(), CliError> {
    let (spec, code) = resolve_code(&args.code)?;
    let artifact = CodeArtifact::new(spec.clone(), &code, args.w_max)?;
    let p = code_parameters(&code, args.w_max);
    let text = match common.format {
        Format::Json => to_json(&json!({ "input": { "code": spec, "w_max": args.w_max }, "parameters": p, "summary": artifact.summary(), "d_certified": artifact.d_certified }))?,
        Format::Csv => format!(
            "n,k,d,d_certified\n{},{},{},{}\n",
            p.n,
            p.k,
            p.d.map_or(String::new(), |d| d.value().to_string()),
            artifact.d_certified
        ),
    };
    emit(common, &text)
}

/// # Errors
///
/// Fails when the code cannot be resolved.
pub fn soundness(common: &Common, args: &SoundnessArgs) -> Result<(), CliError> {
    let (spec, code) = resolve_code(&args.code)?;
    let m_max = args.m_max.unwrap_or(code.n());
    let profile = soundness_profile(&code, m_max, args.budget, args.samples, common.seed);
    let expansion = expansion_profile(&code, args.size_max.max(1), args.samples, common.seed);
    let quadratic = profile.rows.iter().all(|r| r.f_emp <= r.m * r.m);
    let text = match common.format {
        Format::Json => to_json(&json!({
            "input": { "code": spec, "m_max": m_max, "budget": args.budget, "samples": args.samples, "size_max": args.size_max, "seed": common.seed },
            "n": code.n(),
            "profile": profile,
            "expansion": expansion,
            "quadratic_envelope_holds": quadratic,
        }))?,
        Format::Csv => {
            let mut s = String::from("M,f_emp,certified,witness\n");
            for r in &profile.rows {
                writeln!(s, "{},{},{},{}", r.m, r.f_emp, r.certified, r.witness.as_deref().unwrap_or("")).expect("string write");
            }
            s
        }
    };
    emit(common, &text)
}

fn trajectory_csv(rows: &[Value]) -> String {
    let mut s = String::from("m,kappa_m,v,v_tilde,d,d_tilde,within_bounds\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r["m"], r["kappa_m"], r["v"], r["v_tilde"], r["d"], r["d_tilde"], r["within_bounds"]
        )
        .expect("string write");
    }
    s
}

/// # Errors
///
/// Invalid constants or an infeasible ε₀ are numeric failures.
pub fn flow(common: &Common, args: &FlowArgs) -> Result<(), CliError> {
    let consts = FlowConstants {
        kappa1: args.kappa1,
        delta: args.delta,
        c_f_prime: args.c_f_prime,
        c_f_dblprime: args.c_f_dblprime,
        alpha: args.alpha,
        c_tilde_f_dblprime: args.c_tilde_f_dblprime,
    };
    consts.validate()?;
    if !(args.eps >= 0.0) || args.n == 0 {
        return Err(CliError::Usage("--eps must be non-negative and --n positive".into()));
    }
    let d_s = match args.c_d {
        Some(c_d) => (c_d * (args.n as f64).ln()).ceil().max(1.0) as usize,
        None => args.d_s,
    };
    let mut cert = stability_certificate(&consts, args.n, d_s, args.eps, args.c1, args.m_check)?;
    if let Some(c_d) = args.c_d {
        if args.kappa1 * c_d <= 2.0 {
            cert.reasons.push(format!("κ₁ c_d = {} does not exceed 2", args.kappa1 * c_d));
            cert.valid = false;
        }
    }
    let traj = run_flow(&consts, args.eps, args.orders.max(1));
    let lemma = check_lemma_bounds(&traj, args.kappa1, cert.c_iter, args.eps, 1e-10);
    let rows: Vec<Value> = traj
        .iter()
        .map(|s| {
            let ok = check_lemma_bounds(std::slice::from_ref(s), args.kappa1, cert.c_iter, args.eps, 1e-10).holds;
            json!({ "m": s.m, "kappa_m": s.kappa_m, "v": s.v, "v_tilde": s.v_tilde, "d": s.d, "d_tilde": s.d_tilde, "within_bounds": ok })
        })
        .collect();
    if let Some(path) = &args.trajectory {
        std::fs::write(path, trajectory_csv(&rows))?;
    }
    let text = match common.format {
        Format::Json => to_json(&json!({
            "input": { "constants": consts, "epsilon": args.eps, "n": args.n, "d_s": d_s, "c_d": args.c_d, "c1": args.c1, "orders": args.orders, "m_check": args.m_check },
            "certificate": cert,
            "smallest_valid_n": args.c_d.and_then(|c_d| smallest_valid_n(args.kappa1, c_d, args.eps)),
            "lemma": lemma,
            "trajectory": rows,
        }))?,
        Format::Csv => trajectory_csv(&rows),
    };
    emit(common, &text)
}

/// # Errors
///
/// Fails beyond the dense limit or when the conjugation identity breaks.
pub fn swt(common: &Common, args: &SwtArgs) -> Result<(), CliError> {
    let (spec, code) = resolve_code(&args.code)?;
    let pspec = perturbation_spec(&args.perturbation, code.n(), common.seed)?;
    let v = pspec.build(code.n())?.scaled_re(args.eps);
    let d_s = args.d_s.unwrap_or(code.n() + 1);
    let run = swt_run(&code, &v, args.orders.max(1), d_s, args.kappa1)?;
    let distances = projector_distances(&code, &v, &run)?;
    let bound = relative_bound_estimate(&code, &run.d.total().to_dense())?;
    let text = match common.format {
        Format::Json => to_json(&json!({
            "input": { "code": spec, "perturbation": pspec, "epsilon": args.eps, "orders": args.orders, "d_s": d_s, "kappa1": args.kappa1, "seed": common.seed },
            "epsilon_kappa": run.epsilon,
            "orders": run.orders,
            "projector_distances": distances,
            "schedule_sup": run.schedule_sup,
            "diverged": run.diverged,
            "unitarity_error": run.unitarity_error,
            "relative_bound": bound,
        }))?,
        Format::Csv => {
            let mut s = String::from("m,kappa,v,v_tilde,a,d,e_norm,generator_residual,conjugation_error,projector_distance\n");
            for (o, dist) in run.orders.iter().zip(&distances) {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    o.m, o.kappa, o.v, o.v_tilde, o.a, o.d, o.e_norm, o.generator_residual, o.conjugation_error, dist
                )
                .expect("string write");
            }
            s
        }
    };
    emit(common, &text)
}

#[derive(Serialize)]
struct SpectrumRow {
    epsilon: f64,
    cluster_size: Option<usize>,
    splitting: Option<f64>,
    lowest_spread: Option<f64>,
    gap: Option<f64>,
    separation: Option<f64>,
    resolved: Option<bool>,
    weyl_holds: Option<bool>,
    eigenvalues: Vec<f64>,
    swt_v_last: Option<f64>,
    projector_distance_last: Option<f64>,
    error: Option<String>,
}

fn spectrum_point(code: &StabilizerCode, v: &PauliSum, eps: f64, args: &SpectrumArgs, mode: SpectrumMode, seed: u64) -> SpectrumRow {
    let mut row = SpectrumRow {
        epsilon: eps,
        cluster_size: None,
        splitting: None,
        lowest_spread: None,
        gap: None,
        separation: None,
        resolved: None,
        weyl_holds: None,
        eigenvalues: Vec::new(),
        swt_v_last: None,
        projector_distance_last: None,
        error: None,
    };
    match spectral_report(code, v, eps, args.num_eigs, mode, seed) {
        Ok(r) => {
            row.cluster_size = Some(r.cluster_size);
            row.splitting = Some(r.splitting);
            row.lowest_spread = Some(r.lowest_spread);
            row.gap = Some(r.gap);
            row.separation = Some(r.separation);
            row.resolved = Some(r.resolved);
            row.weyl_holds = Some(r.weyl.holds);
            row.eigenvalues = r.eigenvalues;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    if let Some(m) = args.swt_orders {
        let scaled = v.scaled_re(eps);
        let outcome = swt_run(code, &scaled, m.max(1), code.n() + 1, 1.0)
            .map_err(|e| e.to_string())
            .and_then(|run| projector_distances(code, &scaled, &run).map(|d| (run, d)).map_err(|e| e.to_string()));
        match outcome {
            Ok((run, d)) => {
                row.swt_v_last = run.orders.last().map(|o| o.v);
                row.projector_distance_last = d.last().copied();
            }
            Err(e) => row.error = Some(row.error.take().map_or(e.clone(), |prev| format!("{prev}; {e}"))),
        }
    }
    row
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// # Errors
///
/// Writes every row first; flagged rows then give a numeric failure.
pub fn spectrum(common: &Common, args: &SpectrumArgs) -> Result<(), CliError> {
    let (spec, code) = resolve_code(&args.code)?;
    let pspec = perturbation_spec(&args.perturbation, code.n(), common.seed)?;
    let v = pspec.build(code.n())?;
    let mode = match args.mode {
        ModeArg::Auto => SpectrumMode::auto(code.n()),
        ModeArg::Dense => SpectrumMode::Dense,
        ModeArg::Sparse => SpectrumMode::Sparse,
    };
    let rows: Vec<SpectrumRow> = args.eps.par_iter().map(|&eps| spectrum_point(&code, &v, eps, args, mode, common.seed)).collect();
    let flagged = rows.iter().filter(|r| r.error.is_some()).count();
    let text = match common.format {
        Format::Json => to_json(&json!({
            "input": { "code": spec, "perturbation": pspec, "epsilon": args.eps, "num_eigs": args.num_eigs, "mode": mode, "swt_orders": args.swt_orders, "seed": common.seed },
            "rows": rows,
        }))?,
        Format::Csv => {
            let mut s = String::from(
                "epsilon,cluster_size,splitting,lowest_spread,gap,separation,resolved,weyl_holds,swt_v_last,projector_distance_last,error\n",
            );
            for r in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.epsilon,
                    opt(r.cluster_size),
                    opt(r.splitting),
                    opt(r.lowest_spread),
                    opt(r.gap),
                    opt(r.separation),
                    opt(r.resolved),
                    opt(r.weyl_holds),
                    opt(r.swt_v_last),
                    opt(r.projector_distance_last),
                    r.error.as_deref().unwrap_or("").replace(',', ";")
                )
                .expect("string write");
            }
            s
        }
    };
    emit(common, &text)?;
    if flagged > 0 {
        return Err(CliError::Numeric(format!("{flagged} grid point(s) failed")));
    }
    Ok(())
}

/// # Errors
///
/// Any failed criterion is an acceptance failure, reported after the
/// summary is written.
pub fn suite(common: &Common, args: &SuiteArgs) -> Result<(), CliError> {
    let ids = select(&args.only)?;
    let report = Suite::new(common.seed).run(&ids);
    for c in &report.criteria {
        eprintln!("{} {:>3} {} ({:.1} s): {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.title, c.seconds, c.summary);
    }
    let text = match common.format {
        Format::Json => to_json(&json!({ "input": { "only": ids, "seed": common.seed }, "report": report }))?,
        Format::Csv => {
            let mut s = String::from("id,passed,seconds,summary\n");
            for c in &report.criteria {
                writeln!(s, "{},{},{:.3},\"{}\"", c.id, c.passed, c.seconds, c.summary.replace('"', "'")).expect("string write");
            }
            s
        }
    };
    emit(common, &text)?;
    if report.failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(format!("failed: {}", report.failed.join(", "))))
    }
}
