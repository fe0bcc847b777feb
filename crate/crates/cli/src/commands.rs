use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use msl_core::algebra::{
    delta0_hyperfinite, delta_capacity, fdim, format_rational, rational_to_f64, FiniteDimAlgebra, HyperfiniteSpec,
    SpecDocument,
};
use msl_core::embed::{build_embedding, conjugate_representations, Representation};
use msl_core::geometry::{
    ball_volume_theta, estimate_opnorm_ball_volume, quotient_distance_d2, quotient_distance_dinf,
    scalar_quotient_distance, torus_metric, HaarSampler, PackingResult, PointCloud, TorusSampler, TractableSubgroup,
};
use msl_core::linalg::io::matrix_from_json;
use msl_core::linalg::{diag_real, haar_unitary, CMat, RngSeed, Tolerances};
use msl_core::microstates::asymptotic_freeness_experiment;
use msl_core::suite::{run_criterion, SuiteConfig, CRITERIA};

use crate::args::{
    Cli, Command, ConjugateArgs, EmbedArgs, Format, FreenessArgs, PackArgs, QuotientArgs, SpecArgs, SubgroupKind,
    SuiteArgs, Target, VolumeArgs,
};
use crate::report::{csv_table, decimal15, rational_json, rational_text, write_artifacts, Failure, Outcome};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let tolerances = tolerances(cli.common.tol.as_deref())?;
    let seed = cli.common.seed;
    let name = command_name(&cli.command);
    let rng_seed = RngSeed::new(seed, name);
    let outcome = match &cli.command {
        Command::Delta0(a) => delta0(a, false)?,
        Command::Fdim(a) => delta0(a, true)?,
        Command::Capacity(a) => capacity(a)?,
        Command::Embed(a) => embed(a)?,
        Command::Conjugate(a) => conjugate(a, &rng_seed)?,
        Command::QuotientDist(a) => quotient(a, &rng_seed)?,
        Command::Pack(a) => pack(a, &rng_seed)?,
        Command::Volume(a) => volume(a, &rng_seed)?,
        Command::Freeness(a) => freeness(a, &rng_seed)?,
        Command::Suite(a) => suite(a, seed, tolerances)?,
    };
    let report = json!({
        "command": name,
        "version": msl_core::VERSION,
        "seed": seed,
        "tolerances": { "metric": tolerances.metric, "algebraic": tolerances.algebraic },
        "config": cli,
        "result": outcome.result,
    });
    if let Some(dir) = &cli.common.out {
        write_artifacts(dir, name, &report, &outcome.csv)?;
    }
    let body = match cli.common.format {
        Format::Text => outcome.text,
        Format::Csv => outcome.csv,
        Format::Json => serde_json::to_string_pretty(&report).map_err(|e| Failure::Usage(e.to_string()))? + "\n",
    };
    // a closed pipe (e.g. `| head`) is not an error
    let _ = std::io::stdout().lock().write_all(body.as_bytes());
    match outcome.violation {
        Some(msg) => Err(Failure::Violation(msg)),
        None => Ok(()),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Delta0(_) => "delta0",
        Command::Fdim(_) => "fdim",
        Command::Capacity(_) => "capacity",
        Command::Embed(_) => "embed",
        Command::Conjugate(_) => "conjugate",
        Command::QuotientDist(_) => "quotient-dist",
        Command::Pack(_) => "pack",
        Command::Volume(_) => "volume",
        Command::Freeness(_) => "freeness",
        Command::Suite(_) => "suite",
    }
}

fn tolerances(flag: Option<&str>) -> Result<Tolerances, Failure> {
    let base = Tolerances::from_env()?;
    Ok(match flag {
        Some(t) => base.parse_override(t)?,
        None => base,
    })
}

fn read_document(path: &Path) -> Result<SpecDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(SpecDocument::from_json(&text)?)
}

fn read_spec(path: &Path) -> Result<HyperfiniteSpec, Failure> {
    Ok(read_document(path)?.to_spec()?)
}

fn read_algebra(path: &Path) -> Result<FiniteDimAlgebra, Failure> {
    Ok(read_document(path)?.to_algebra()?)
}

fn delta0(a: &SpecArgs, as_fdim: bool) -> Result<Outcome, Failure> {
    let spec = read_spec(&a.spec)?;
    let (label, value) = if as_fdim {
        ("fdim", fdim(&spec))
    } else {
        ("delta0", delta0_hyperfinite(&spec))
    };
    Ok(Outcome {
        result: json!({ label: rational_json(&value), "spec": SpecDocument::from(&spec) }),
        text: format!("{}\n", rational_text(&value)),
        csv: csv_table(
            &["quantity", "value"],
            &[vec![label.into(), rational_to_f64(&value).to_string()]],
        )?,
        violation: None,
    })
}

fn capacity(a: &SpecArgs) -> Result<Outcome, Failure> {
    let algebra = read_algebra(&a.spec)?;
    let value = delta_capacity(&algebra);
    Ok(Outcome {
        result: json!({ "capacity": rational_json(&value), "algebra": SpecDocument::from(&algebra) }),
        text: format!("{}\n", rational_text(&value)),
        csv: csv_table(
            &["quantity", "value"],
            &[vec!["capacity".into(), rational_to_f64(&value).to_string()]],
        )?,
        violation: None,
    })
}

fn embed(a: &EmbedArgs) -> Result<Outcome, Failure> {
    let algebra = read_algebra(&a.algebra)?;
    let e = build_embedding(&algebra, a.k, a.r)?;
    let mult = e.representation.multiplicities();
    let null = e.representation.null_dim();
    let violation = (e.above_threshold && !(e.trace_error_ok() && e.bounds_ok())).then(|| {
        format!(
            "k = {} > k0 = {} but trace error {} or quotient_dim {} outside ({}, {})",
            e.k, e.k0, e.trace_error, e.quotient_dim, e.bounds.0, e.bounds.1
        )
    });
    let mut text = format!(
        "k {} (k0 {}, {} threshold)\nmultiplicities {:?}\nnull {}\ntrace_error {}\nquotient_dim {} in ({}, {})\n",
        e.k,
        e.k0,
        if e.above_threshold { "above" } else { "below" },
        mult,
        null,
        rational_text(&e.trace_error),
        e.quotient_dim,
        decimal15(e.bounds.0),
        decimal15(e.bounds.1),
    );
    if !e.above_threshold {
        text.push_str("note: guarantees only apply above k0\n");
    }
    let mult_str = mult.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(";");
    let csv = csv_table(
        &[
            "k",
            "k0",
            "multiplicities",
            "null_dim",
            "trace_error",
            "quotient_dim",
            "lower_bound",
            "upper_bound",
        ],
        &[vec![
            e.k.to_string(),
            e.k0.to_string(),
            mult_str,
            null.to_string(),
            rational_to_f64(&e.trace_error).to_string(),
            e.quotient_dim.to_string(),
            e.bounds.0.to_string(),
            e.bounds.1.to_string(),
        ]],
    )?;
    Ok(Outcome {
        result: e.to_json(),
        text,
        csv,
        violation,
    })
}

fn conjugate(a: &ConjugateArgs, seed: &RngSeed) -> Result<Outcome, Failure> {
    let algebra = read_algebra(&a.algebra)?;
    if a.trials == 0 {
        return Err(Failure::Usage("trials must be ≥ 1".into()));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut text = String::new();
    for t in 0..a.trials {
        let mut rng = seed.rng(t);
        let s1 = Representation::random(&algebra, a.k, &mut rng)?;
        let s2 = Representation::random(&algebra, a.k, &mut rng)?;
        let c = conjugate_representations(&s1, &s2)?;
        text.push_str(&format!(
            "trial {t}: multiplicities {:?} vs {:?}, ε² = {}, max ratio {} ≤ {}\n",
            s1.multiplicities(),
            s2.multiplicities(),
            format_rational(&c.epsilon_sq),
            decimal15(c.max_ratio),
            decimal15(c.bound()),
        ));
        rows.push(vec![
            t.to_string(),
            rational_to_f64(&c.epsilon_sq).to_string(),
            c.max_ratio.to_string(),
            c.bound().to_string(),
        ]);
        records.push(json!({
            "trial": t,
            "multiplicities": [s1.multiplicities(), s2.multiplicities()],
            "epsilon_sq": rational_json(&c.epsilon_sq),
            "ratios": c.ratios,
            "max_ratio": c.max_ratio,
            "bound": c.bound(),
        }));
    }
    Ok(Outcome {
        result: json!({ "k": a.k, "trials": records }),
        text,
        csv: csv_table(&["trial", "epsilon_sq", "max_ratio", "bound"], &rows)?,
        violation: None,
    })
}

fn read_matrix(path: &Path) -> Result<CMat, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(matrix_from_json(&text)?)
}

fn quotient(a: &QuotientArgs, seed: &RngSeed) -> Result<Outcome, Failure> {
    let h = match a.subgroup {
        SubgroupKind::Scalar => TractableSubgroup::scalars(a.k)?,
        SubgroupKind::Torus => TractableSubgroup::torus(a.k)?,
        SubgroupKind::Full => TractableSubgroup::full(a.k)?,
    };
    let mut rng = seed.rng(0);
    let u = match &a.u {
        Some(p) => read_matrix(p)?,
        None => haar_unitary(a.k, &mut rng),
    };
    let v = match &a.v {
        Some(p) => read_matrix(p)?,
        None => haar_unitary(a.k, &mut rng),
    };
    let d2 = quotient_distance_d2(&u, &v, &h)?;
    let dinf = quotient_distance_dinf(&u, &v, &h, a.budget)?;
    Ok(Outcome {
        result: json!({
            "k": a.k,
            "subgroup": h.factors(),
            "quotient_dim": h.quotient_dim(),
            "d2": d2.distance,
            "dinf_lower": dinf.lower,
            "dinf_upper": dinf.upper,
        }),
        text: format!(
            "d2 {}\nd_inf in [{}, {}]\n",
            decimal15(d2.distance),
            decimal15(dinf.lower),
            decimal15(dinf.upper)
        ),
        csv: csv_table(
            &["d2", "dinf_lower", "dinf_upper"],
            &[vec![
                d2.distance.to_string(),
                dinf.lower.to_string(),
                dinf.upper.to_string(),
            ]],
        )?,
        violation: None,
    })
}

fn pack(a: &PackArgs, seed: &RngSeed) -> Result<Outcome, Failure> {
    let mut eps = a.eps.clone();
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Failure::Usage("radii must be positive".into()));
    }
    eps.sort_by(|x, y| y.total_cmp(x));
    eps.dedup();
    let result = match a.target {
        Target::Torus => {
            if a.m == 0 {
                return Err(Failure::Usage("m must be ≥ 1".into()));
            }
            let s = TorusSampler {
                m: a.m,
                seed: seed.child("torus"),
            };
            let cloud = PointCloud::sample(&s, a.budget);
            PackingResult::compute(
                &cloud,
                |x: &Vec<f64>, y: &Vec<f64>| torus_metric(x, y),
                &eps,
                s.seed.clone(),
            )?
        }
        Target::U2 => {
            let s = HaarSampler {
                k: 2,
                seed: seed.child("u2"),
            };
            let cloud = PointCloud::sample(&s, a.budget);
            PackingResult::compute(&cloud, scalar_quotient_distance, &eps, s.seed.clone())?
        }
    };
    let violation = (!result.duality_holds()).then(|| "packing/covering duality failed on the grid".to_string());
    let mut text = String::from("epsilon  pack  cover\n");
    for ((e, p), c) in result
        .epsilons
        .iter()
        .zip(&result.packing_counts)
        .zip(&result.covering_counts)
    {
        text.push_str(&format!("{e:<8} {p:>5} {c:>6}\n"));
    }
    if result.fitted_exponent.is_finite() {
        text.push_str(&format!("fitted exponent {}\n", decimal15(result.fitted_exponent)));
    }
    Ok(Outcome {
        result: serde_json::to_value(&result).map_err(|e| Failure::Usage(e.to_string()))?,
        text,
        csv: result.to_csv_string()?,
        violation,
    })
}

fn volume(a: &VolumeArgs, seed: &RngSeed) -> Result<Outcome, Failure> {
    let est = estimate_opnorm_ball_volume(a.d, a.budget, seed)?;
    let theta = ball_volume_theta(a.d)?;
    Ok(Outcome {
        result: serde_json::to_value(&est).map_err(|e| Failure::Usage(e.to_string()))?,
        text: format!(
            "theta {}\nlambda {} ± {}\nratio {}\n",
            decimal15(theta),
            decimal15(est.estimate),
            decimal15(est.stderr),
            decimal15(est.fraction)
        ),
        csv: csv_table(
            &["d", "samples", "theta", "estimate", "stderr"],
            &[vec![
                a.d.to_string(),
                a.budget.to_string(),
                theta.to_string(),
                est.estimate.to_string(),
                est.stderr.to_string(),
            ]],
        )?,
        violation: None,
    })
}

fn freeness(a: &FreenessArgs, seed: &RngSeed) -> Result<Outcome, Failure> {
    if a.k < 2 {
        return Err(Failure::Usage("k must be ≥ 2".into()));
    }
    let p = diag_real(
        &(0..a.k)
            .map(|i| if i < a.k / 2 { 1.0 } else { 0.0 })
            .collect::<Vec<_>>(),
    );
    let e = asymptotic_freeness_experiment(
        std::slice::from_ref(&p),
        std::slice::from_ref(&p),
        a.trials,
        a.m,
        a.gamma,
        seed,
    )?;
    let worst = e.trials.iter().map(|t| t.defect).fold(0.0, f64::max);
    Ok(Outcome {
        result: json!({
            "k": e.k,
            "m": e.m,
            "gamma": e.gamma,
            "trials": e.trials.len(),
            "frequency": e.frequency(),
            "max_defect": worst,
        }),
        text: format!(
            "{} of {} trials within γ = {} (frequency {}), max defect {}\n",
            e.trials.iter().filter(|t| t.member).count(),
            e.trials.len(),
            e.gamma,
            decimal15(e.frequency()),
            decimal15(worst)
        ),
        csv: e.to_csv_string()?,
        violation: None,
    })
}

fn suite(a: &SuiteArgs, seed: u64, tolerances: Tolerances) -> Result<Outcome, Failure> {
    if let Some(bad) = a.only.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(Failure::Usage(format!("unknown criterion {bad}")));
    }
    let cfg = SuiteConfig { seed, tolerances };
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut outcomes: Vec<Value> = Vec::new();
    let mut failed = Vec::new();
    for &(id, _) in CRITERIA.iter().filter(|c| a.only.is_empty() || a.only.contains(&c.0)) {
        let out = run_criterion(id, &cfg).expect("known criterion");
        text.push_str(&format!("{out}\n"));
        if !out.passed {
            failed.push(id);
        }
        // timings stay out of the table so it is reproducible
        rows.push(vec![
            id.to_string(),
            out.name.to_string(),
            out.passed.to_string(),
            out.detail.clone(),
        ]);
        outcomes.push(serde_json::to_value(&out).map_err(|e| Failure::Usage(e.to_string()))?);
    }
    text.push_str(&if failed.is_empty() {
        "all criteria passed\n".to_string()
    } else {
        format!("{} criteria failed\n", failed.len())
    });
    Ok(Outcome {
        result: json!({ "criteria": outcomes, "failed": failed }),
        text,
        csv: csv_table(&["id", "name", "passed", "detail"], &rows)?,
        violation: (!failed.is_empty()).then(|| format!("criteria {failed:?} failed")),
    })
}
