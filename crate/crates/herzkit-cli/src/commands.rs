use herzkit::hardy::{
    atom_check, atomic_decompose, molecule_check, molecule_to_atoms, n_index, random_atom, residual_report,
    AtomSpec, AtomicDecomposition, MoleculeSpec, SchwartzWindow,
};
use herzkit::herz::{block_decompose, block_synthesize, herz_norm_report, BlockDecomposition};
use herzkit::littlewood_paley::{g_function, g_star, lusin_area, LPKernel};
use herzkit::operators::{
    commutator_apply, cz_apply, fractional_integral, hl_maximal, BallFamily, Operator, OperatorReport,
    StandardKernel,
};
use herzkit::verify::{run_suite, Suite, VerifyOptions};
use herzkit::{
    mixed_lebesgue_norm, AnisotropyVector, DyadicWindow, Error, ExponentVector, HerzParams, HerzSpace, Result,
    SampledFunction,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cli::{Command, DecompositionKind, Family, HerzArgs, Output, RatioArgs, SquareFunction};
use crate::report::Report;
use crate::source::{parse_exponents, parse_list, parse_number, read_function};

/// What a command produced: the report, an optional grid-valued result
/// and whether a strict truncation check or a verification failed.
pub struct Outcome {
    pub report: Report,
    pub grid_output: Option<SampledFunction>,
    pub truncation_breach: bool,
    pub checks_failed: bool,
}

impl Outcome {
    fn new(report: Report) -> Self {
        Self {
            report,
            grid_output: None,
            truncation_breach: false,
            checks_failed: false,
        }
    }
}

pub fn output_of(cmd: &Command) -> &Output {
    match cmd {
        Command::Norm { out, .. }
        | Command::Herz { out, .. }
        | Command::Maximal { out, .. }
        | Command::Fractional { out, .. }
        | Command::Cz { out, .. }
        | Command::Lp { out, .. }
        | Command::Decompose { out, .. }
        | Command::Atoms { out, .. }
        | Command::Verify { out, .. }
        | Command::Synthesize { out, .. } => out,
    }
}

fn herz_params(h: &HerzArgs, a: &AnisotropyVector) -> Result<HerzParams> {
    let mut params = HerzParams::new(h.alpha, parse_number(&h.p)?, parse_exponents(&h.q)?, a.clone())?;
    if h.non_homogeneous {
        params = params.non_homogeneous();
    }
    if h.k_min.is_some() || h.k_max.is_some() {
        let d = params.window;
        params = params.with_window(DyadicWindow::new(h.k_min.unwrap_or(d.k_min), h.k_max.unwrap_or(d.k_max))?);
    }
    params.validate()?;
    Ok(params)
}

fn herz_summary(p: &HerzParams) -> Value {
    json!({
        "alpha": p.alpha,
        "p": if p.p.is_infinite() { json!("inf") } else { json!(p.p) },
        "q": p.q.to_string(),
        "homogeneous": p.homogeneous,
        "k_min": p.window.k_min,
        "k_max": p.window.k_max,
    })
}

/// The `k` with `2^{k−1} ≤ r₀ < 2^k` for the smallest nonzero quasi-norm
/// `r₀ = min_i h_i^{1/a_i}` on the grid, so every annulus from `k` on holds
/// grid points.
fn finest_resolved_shell(f: &SampledFunction, a: &AnisotropyVector) -> i32 {
    let r0 = f
        .grid()
        .spacing()
        .iter()
        .zip(a.exponents())
        .map(|(h, ai)| h.powf(1.0 / ai))
        .fold(f64::INFINITY, f64::min);
    r0.log2().floor() as i32 + 1
}

/// The norm used by operator ratios.
type NormFn = Box<dyn Fn(&SampledFunction) -> Result<f64>>;

fn ratio_norm(r: &RatioArgs, f: &SampledFunction, a: &AnisotropyVector) -> Result<(NormFn, Value)> {
    let q = match &r.norm_q {
        Some(s) => parse_exponents(s)?,
        None => ExponentVector::uniform(f.dim(), 2.0)?,
    };
    match &r.herz {
        None => {
            let summary = json!({ "norm": "mixed", "q": q.to_string() });
            Ok((Box::new(move |g| mixed_lebesgue_norm(g, &q)), summary))
        }
        Some(spec) => {
            let v = parse_list(spec)?;
            if v.len() != 2 {
                return Err(Error::Parse(format!("--herz expects alpha,p, got {spec:?}")));
            }
            let params = HerzParams::new(v[0], v[1], q, a.clone())?;
            let summary = json!({ "norm": "herz", "params": herz_summary(&params) });
            let space = HerzSpace::new(params, f.grid())?;
            Ok((Box::new(move |g| space.norm(g)), summary))
        }
    }
}

fn operator_outcome(
    mut report: Report,
    name: &str,
    f: &SampledFunction,
    tf: SampledFunction,
    ratio: &RatioArgs,
    a: &AnisotropyVector,
    params: Value,
) -> Result<Outcome> {
    let (norm, norm_summary) = ratio_norm(ratio, f, a)?;
    let r = OperatorReport::new(name, params.clone(), norm(f)?, norm(&tf)?, None);
    report.parameters = json!({ "operator": params, "ratio_norm": norm_summary });
    report.results = json!({
        "operator": r.operator,
        "input_norm": r.input_norm,
        "output_norm": r.output_norm,
        "ratio": r.ratio,
        "max_abs": tf.max_abs(),
        "output": tf,
    });
    let mut o = Outcome::new(report);
    o.grid_output = Some(tf);
    Ok(o)
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    let out = output_of(cmd);
    let seed = out.seed;
    match cmd {
        Command::Norm { source, q, .. } => {
            let q = parse_exponents(q)?;
            let src = source.resolve(Some(q.dim()))?;
            let mut report = Report::new("norm", seed);
            report.input = src.summary;
            report.parameters = json!({ "q": q.to_string() });
            report.results = json!({ "mixed_norm": mixed_lebesgue_norm(&src.f, &q)? });
            report.tolerances = json!({ "quadrature": "iterated trapezoid, exact on the grid" });
            Ok(Outcome::new(report))
        }
        Command::Herz { source, herz, .. } => {
            let q = parse_exponents(&herz.q)?;
            let src = source.resolve(Some(q.dim()))?;
            let params = herz_params(herz, &src.a)?;
            let r = herz_norm_report(&src.f, &params)?;
            let breach = r.truncation_exceeds(out.truncation_threshold);
            let mut report = Report::new("herz", seed);
            report.input = src.summary;
            report.parameters = herz_summary(&params);
            report.results = json!({ "herz_norm": r.value, "terms": r.terms });
            report.tolerances = json!({ "truncation_threshold": out.truncation_threshold });
            report.diagnostics = json!({
                "truncation": r.truncation,
                "origin_fraction": r.origin_fraction,
                "truncation_warning": breach,
                "strict": out.strict,
            });
            let mut o = Outcome::new(report);
            o.truncation_breach = breach && out.strict;
            Ok(o)
        }
        Command::Maximal { source, family, levels, ratio, .. } => {
            let src = source.resolve(None)?;
            let fam = match family {
                Family::Covering => BallFamily::covering(src.f.grid(), &src.a)?,
                Family::Dyadic => BallFamily::dyadic(src.f.grid(), &src.a, *levels)?,
            };
            let mf = hl_maximal(&src.f, &fam)?;
            let mut report = Report::new("maximal", seed);
            report.input = src.summary;
            let params = json!({ "family": format!("{family:?}").to_lowercase(), "levels": levels, "summary": fam.summary() });
            operator_outcome(report, "M", &src.f, mf, ratio, &src.a, params)
        }
        Command::Fractional { source, order, ratio, .. } => {
            let src = source.resolve(None)?;
            let tf = fractional_integral(&src.f, *order)?;
            let mut report = Report::new("fractional", seed);
            report.input = src.summary;
            operator_outcome(report, "I_alpha", &src.f, tf, ratio, &src.a, json!({ "order": order }))
        }
        Command::Cz { source, commutator, ratio, .. } => {
            let src = source.resolve(None)?;
            let mut kernel = StandardKernel::hilbert();
            let validation = kernel.validate(src.f.grid())?;
            let mut report = Report::new("cz", seed);
            report.input = src.summary;
            report.diagnostics = json!({ "kernel_validation": validation });
            match commutator {
                None => {
                    let tf = cz_apply(&kernel, &src.f)?;
                    operator_outcome(report, "hilbert", &src.f, tf, ratio, &src.a, json!({ "kernel": "hilbert" }))
                }
                Some(spec) => {
                    let b = spec.parse::<herzkit::builtins::Builtin>()?.sample(src.f.grid(), &src.a)?;
                    let tf = commutator_apply(&b, &Operator::Cz(kernel), &src.f)?;
                    let params = json!({ "kernel": "hilbert", "commutator": spec });
                    operator_outcome(report, "[b,hilbert]", &src.f, tf, ratio, &src.a, params)
                }
            }
        }
        Command::Lp { source, kind, aperture, lambda, j_min, j_max, ratio, .. } => {
            let src = source.resolve(None)?;
            let mut k = LPKernel::mexican_hat(src.f.dim()).fitted_to(src.f.grid());
            if j_min.is_some() || j_max.is_some() {
                let (lo, hi) = k.scale_range();
                k = k.with_scales(j_min.unwrap_or(lo), j_max.unwrap_or(hi))?;
            }
            let tf = match kind {
                SquareFunction::G => g_function(&src.f, &k)?,
                SquareFunction::Area => lusin_area(&src.f, &k, *aperture)?,
                SquareFunction::GStar => g_star(&src.f, &k, *lambda)?,
            };
            let (lo, hi) = k.scale_range();
            let mut report = Report::new("lp", seed);
            report.input = src.summary;
            let params = json!({
                "kind": format!("{kind:?}").to_lowercase(),
                "kernel": k.name(),
                "j_min": lo,
                "j_max": hi,
                "aperture": aperture,
                "lambda": lambda,
            });
            operator_outcome(report, "square function", &src.f, tf, ratio, &src.a, params)
        }
        Command::Decompose { source, kind, herz, window, epsilon, .. } => {
            let q = parse_exponents(&herz.q)?;
            let src = source.resolve(Some(q.dim()))?;
            let mut params = herz_params(herz, &src.a)?;
            if *kind != DecompositionKind::Block && herz.k_min.is_none() {
                let k_max = params.window.k_max;
                let k_min = finest_resolved_shell(&src.f, &src.a).min(k_max);
                params = params.with_window(DyadicWindow::new(k_min, k_max)?);
            }
            let mut report = Report::new("decompose", seed);
            report.input = src.summary;
            report.parameters = json!({
                "kind": format!("{kind:?}").to_lowercase(),
                "herz": herz_summary(&params),
            });
            report.tolerances = json!({ "truncation_threshold": out.truncation_threshold });
            let breach;
            match kind {
                DecompositionKind::Block => {
                    let d = block_decompose(&src.f, &params)?;
                    let r = herz_norm_report(&src.f, &params)?;
                    breach = r.truncation_exceeds(out.truncation_threshold);
                    report.results = json!({
                        "kind": "block",
                        "lambdas": d.lambdas(),
                        "lambda_norm": d.lambda_norm(),
                        "herz_norm": r.value,
                        "decomposition": d,
                    });
                    report.diagnostics = json!({
                        "truncation": r.truncation,
                        "origin_fraction": r.origin_fraction,
                        "truncation_warning": breach,
                    });
                }
                DecompositionKind::Atomic | DecompositionKind::Molecule => {
                    let d = if *kind == DecompositionKind::Atomic {
                        let scales = DyadicWindow::new(window.window_min, window.window_max)?;
                        let w = SchwartzWindow::gaussian(src.a.clone(), n_index(&params.q, &src.a) as usize, scales);
                        report.parameters["window"] = w.summary();
                        atomic_decompose(&src.f, &params, &w)?
                    } else {
                        let mut spec = MoleculeSpec::new(params.alpha, params.q.clone(), 0, *epsilon, src.a.clone())?;
                        spec.p = params.p;
                        report.parameters["epsilon"] = json!(epsilon);
                        molecule_to_atoms(&src.f, &spec)?
                    };
                    breach = d.residual_report.tail_fraction > out.truncation_threshold;
                    report.results = json!({
                        "kind": format!("{kind:?}").to_lowercase(),
                        "lambdas1": d.lambdas1(),
                        "lambdas2": d.lambdas2(),
                        "construction": d.construction,
                        "residual_report": d.residual_report,
                        "decomposition": d,
                    });
                    report.diagnostics = json!({
                        "tail_fraction": d.residual_report.tail_fraction,
                        "truncation_warning": breach,
                    });
                }
            }
            report.diagnostics["strict"] = json!(out.strict);
            let mut o = Outcome::new(report);
            o.truncation_breach = breach && out.strict;
            Ok(o)
        }
        Command::Atoms { source, alpha, q, s, k, epsilon, restricted, generate, .. } => {
            let q = parse_exponents(q)?;
            let src = source.resolve(Some(q.dim()))?;
            let spec = AtomSpec {
                alpha: *alpha,
                q: q.clone(),
                s: *s,
                k: *k,
                anisotropy: src.a.clone(),
                restricted: *restricted,
            };
            let f = if *generate {
                random_atom(src.f.grid(), &spec, &mut ChaCha8Rng::seed_from_u64(seed))?
            } else {
                src.f.clone()
            };
            let atom = atom_check(&f, &spec)?;
            let molecule = molecule_check(&f, &MoleculeSpec::new(*alpha, q, *s, *epsilon, src.a.clone())?)?;
            let mut report = Report::new("atoms", seed);
            report.input = if *generate { json!({ "source": "generated", "grid": f.grid() }) } else { src.summary };
            report.parameters = json!({ "atom": spec, "epsilon": epsilon });
            report.results = json!({ "atom_check": atom, "molecule_check": molecule });
            report.tolerances = json!({
                "moment": herzkit::hardy::MOMENT_TOL,
                "size": herzkit::hardy::SIZE_TOL,
            });
            let mut o = Outcome::new(report);
            o.grid_output = Some(f);
            Ok(o)
        }
        Command::Verify { suite, b, k, .. } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                suite.split(',').map(|s| s.trim().parse()).collect::<Result<_>>()?
            };
            let opts = VerifyOptions {
                seed,
                b: if b == "auto" { None } else { Some(parse_number(b)?) },
                k: *k,
            };
            let reports = suites.iter().map(|&s| run_suite(s, &opts)).collect::<Result<Vec<_>>>()?;
            let passed = reports.iter().all(|r| r.passed);
            let mut report = Report::new("verify", seed);
            report.parameters = json!({ "suites": suites, "B": opts.b.map_or(json!("auto"), |b| json!(b)), "K": k });
            report.results = json!({ "passed": passed, "suites": reports });
            if !passed {
                report.status = "checks-failed".into();
            }
            let mut o = Outcome::new(report);
            o.checks_failed = !passed;
            Ok(o)
        }
        Command::Synthesize { input, reference, with_remainder, .. } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", input.display())))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("decompose report: {e}")))?;
            let results = v.get("results").unwrap_or(&v);
            let kind = results
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Parse("decompose report has no results.kind".into()))?
                .to_string();
            let raw = results
                .get("decomposition")
                .cloned()
                .ok_or_else(|| Error::Parse("decompose report has no results.decomposition".into()))?;
            let reference = reference.as_deref().map(read_function).transpose()?;
            let mut report = Report::new("synthesize", seed);
            report.input = json!({ "source": input.display().to_string(), "kind": kind });
            report.parameters = json!({ "with_remainder": with_remainder });
            let s = if kind == "block" {
                let d: BlockDecomposition =
                    serde_json::from_value(raw).map_err(|e| Error::Parse(format!("block decomposition: {e}")))?;
                let s = block_synthesize(&d)?;
                if let Some(f) = &reference {
                    let diff = f.sub(&s)?;
                    let l2 = ExponentVector::uniform(f.dim(), 2.0)?;
                    let nf = mixed_lebesgue_norm(f, &l2)?;
                    report.results["l2_residual"] = json!(if nf > 0.0 { mixed_lebesgue_norm(&diff, &l2)? / nf } else { 0.0 });
                    report.results["max_abs_residual"] = json!(diff.max_abs());
                }
                s
            } else {
                let d: AtomicDecomposition =
                    serde_json::from_value(raw).map_err(|e| Error::Parse(format!("atomic decomposition: {e}")))?;
                let s = if *with_remainder { d.synthesize_with_remainder() } else { d.synthesize() };
                if let Some(f) = &reference {
                    let r = residual_report(
                        f,
                        &d.synthesize(),
                        d.residual_report.remainder_mass,
                        d.residual_report.tail_fraction,
                        d.residual_report.lambda_p_sum,
                    );
                    report.results["residual_report"] = json!(r);
                    report.results["reported_residual_report"] = json!(d.residual_report);
                }
                s
            };
            report.results["output"] = json!(s);
            let mut o = Outcome::new(report);
            o.grid_output = Some(s);
            Ok(o)
        }
    }
}
