use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use mcorder::kernel::{renormalize_rows, TOL_CENTER};
use mcorder::{
    asymptotic_variance_autocov, asymptotic_variance_spectral, check_irreducible, compute_period,
    efficiency_dominates_with, eigendecompose_restricted, empirical_vs_spectral, is_antithetic,
    partial_order_diagram_with, peskun_dominates, sample_chain, validate_kernel, BatchMethod,
    DominanceOptions, Relation, SimulationOptions, SquareMatrix, StationaryDistribution,
};
use serde_json::{json, Value};

use crate::problem::{self, ProblemFile};
use crate::report::{default_tolerances, to_text, Report};
use crate::{
    CompareArgs, Demo, DemoArgs, EstimatorArg, MethodArg, OrderArgs, PruneArgs, SimulateArgs,
    SpectrumArgs, ValidateArgs, VarianceArgs,
};

fn emit(report: &Value) -> Result<()> {
    std::io::stdout()
        .write_all(to_text(report).as_bytes())
        .context("writing report")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn with_tolerance(key: &str, value: f64) -> Value {
    let mut t = default_tolerances();
    t[key] = json!(value);
    t
}

struct Checked {
    passed: bool,
    detail: Value,
}

fn check(m: &SquareMatrix, pi: &StationaryDistribution) -> Checked {
    match validate_kernel(m.clone(), pi) {
        Ok(k) => {
            let c = k.checks();
            let irreducible = check_irreducible(&k);
            let period = compute_period(&k).ok().map(|r| r.period);
            let mut problems = Vec::new();
            if !c.stationary {
                problems.push(format!(
                    "pi is not stationary (residual {:e})",
                    k.stationarity_residual(pi)
                ));
            }
            if !c.reversible {
                problems.push(format!(
                    "detailed balance fails (relative residual {:e})",
                    k.detailed_balance_residual(pi)
                ));
            }
            if !irreducible {
                problems.push("kernel is not irreducible".to_string());
            }
            Checked {
                passed: c.all() && irreducible,
                detail: json!({
                    "stochastic": c.stochastic,
                    "stationary": c.stationary,
                    "reversible": c.reversible,
                    "irreducible": irreducible,
                    "period": period,
                    "stationarity_residual": k.stationarity_residual(pi),
                    "detailed_balance_residual": k.detailed_balance_residual(pi),
                    "problems": problems,
                }),
            }
        }
        Err(e) => Checked {
            passed: false,
            detail: json!({
                "stochastic": false,
                "stationary": null,
                "reversible": null,
                "irreducible": null,
                "period": null,
                "problems": [e.to_string()],
            }),
        },
    }
}

pub fn validate(a: &ValidateArgs) -> Result<u8> {
    let loaded = problem::load(&a.file)?;
    let file = &loaded.problem;
    let pi = file.stationary()?;
    let mut passed = true;
    let mut kernels = Vec::new();
    for (name, m) in &file.kernels {
        let original = check(m, &pi);
        let entry = if a.repair {
            let repaired = check(&renormalize_rows(m), &pi);
            passed &= repaired.passed;
            json!({
                "name": name,
                "passed": repaired.passed,
                "checks": repaired.detail,
                "before_repair": original.detail,
            })
        } else {
            passed &= original.passed;
            json!({ "name": name, "passed": original.passed, "checks": original.detail })
        };
        kernels.push(entry);
    }
    let observables: Vec<Value> = file
        .observables
        .iter()
        .map(|(name, f)| {
            let mean = pi.mean(f);
            let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            json!({ "name": name, "mean": mean, "centered": mean.abs() <= TOL_CENTER * scale })
        })
        .collect();
    let report = Report::new("validate", a, vec![loaded.digest]).finish(
        json!({ "passed": passed, "kernels": kernels, "observables": observables }),
        default_tolerances(),
    );
    emit(&report)?;
    Ok(if passed { 0 } else { 1 })
}

pub fn spectrum(a: &SpectrumArgs) -> Result<u8> {
    let loaded = problem::load(&a.file)?;
    let file = &loaded.problem;
    let pi = file.stationary()?;
    let k = file.kernel(&a.kernel, &pi)?;
    let dec = eigendecompose_restricted(&k, &pi)?;
    let period = compute_period(&k).ok();
    let result = json!({
        "kernel": a.kernel,
        "eigenvalues": dec.eigenvalues,
        "spectral_gap": dec.spectral_gap(),
        "spectral_radius": dec.spectral_radius(),
        "residual": dec.residual,
        "antithetic": is_antithetic(&k, &pi)?,
        "irreducible": period.is_some(),
        "period": period.as_ref().map(|p| p.period),
        "cyclic_classes": period.filter(|p| p.period > 1).map(|p| p.classes),
    });
    emit(&Report::new("spectrum", a, vec![loaded.digest]).finish(result, default_tolerances()))?;
    Ok(0)
}

pub fn variance(a: &VarianceArgs) -> Result<u8> {
    let loaded = problem::load(&a.file)?;
    let file = &loaded.problem;
    let pi = file.stationary()?;
    let k = file.kernel(&a.kernel, &pi)?;
    let f = file.observable(&a.observable)?;
    let mut results = Vec::new();
    if a.method != MethodArg::Autocov {
        results.push(asymptotic_variance_spectral(&f, &k, &pi)?);
    }
    if a.method != MethodArg::Spectral {
        results.push(asymptotic_variance_autocov(&f, &k, &pi, a.tail_tol)?);
    }
    let mut result = json!({
        "kernel": a.kernel,
        "observable": a.observable,
        "observable_mean": pi.mean(f.values()),
        "results": results,
    });
    if a.method == MethodArg::Both {
        let delta = match (results[0].value.finite(), results[1].value.finite()) {
            (Some(s), Some(t)) => json!((s - t).abs()),
            _ => Value::Null,
        };
        result["agreement_delta"] = delta;
    }
    let report = Report::new("variance", a, vec![loaded.digest])
        .finish(result, with_tolerance("tail_tol", a.tail_tol));
    emit(&report)?;
    Ok(0)
}

fn relation_code(r: Relation) -> u8 {
    match r {
        Relation::Dominates => 0,
        Relation::Dominated => 2,
        Relation::Incomparable => 3,
        Relation::Equal => 4,
    }
}

pub fn compare(a: &CompareArgs) -> Result<u8> {
    let loaded = problem::load(&a.file)?;
    let file = &loaded.problem;
    let pi = file.stationary()?;
    let p = file.kernel(&a.p, &pi)?;
    let q = file.kernel(&a.q, &pi)?;
    let opts = DominanceOptions {
        tol_pos: a.tol,
        check_hypotheses: !a.unchecked,
    };
    let eff = efficiency_dominates_with(&p, &q, &pi, &opts)?;
    let mut result = json!({
        "p": a.p,
        "q": a.q,
        "relation": eff.relation,
        "summary": eff.efficiency_summary(),
        "efficiency": eff,
    });
    if a.peskun {
        let pk = peskun_dominates(&p, &q, &pi)?;
        result["peskun"] = json!({
            "dominates": pk.dominates(),
            "relation": pk.relation,
            "witness": pk.witness,
        });
    }
    let report = Report::new("compare", a, vec![loaded.digest])
        .finish(result, with_tolerance("tol_pos", a.tol));
    emit(&report)?;
    Ok(relation_code(eff.relation))
}

pub fn order(a: &OrderArgs) -> Result<u8> {
    let loaded = problem::load(&a.file)?;
    let file = &loaded.problem;
    let pi = file.stationary()?;
    let names: Vec<String> = if a.kernels.is_empty() {
        file.kernels.iter().map(|(n, _)| n.clone()).collect()
    } else {
        a.kernels.clone()
    };
    let kernels = names
        .iter()
        .map(|n| Ok((n.clone(), file.kernel(n, &pi)?)))
        .collect::<Result<Vec<_>>>()?;
    let opts = DominanceOptions {
        tol_pos: a.tol,
        ..Default::default()
    };
    let h = partial_order_diagram_with(&kernels, &pi, &opts)?;
    let edge_list = h.edge_list();
    if let Some(path) = &a.edges {
        write_file(path, &edge_list)?;
    }
    let edges: Vec<Value> = h
        .edges
        .iter()
        .map(|&(x, y)| json!({ "from": h.nodes[x].label(), "to": h.nodes[y].label() }))
        .collect();
    let result = json!({
        "kernels": names,
        "nodes": h.nodes.iter().map(|n| n.label()).collect::<Vec<_>>(),
        "edges": edges,
        "edge_list": edge_list,
        "diagnostics": h.diagnostics,
    });
    emit(
        &Report::new("order", a, vec![loaded.digest])
            .finish(result, with_tolerance("tol_pos", a.tol)),
    )?;
    Ok(0)
}

pub fn simulate(a: &SimulateArgs) -> Result<u8> {
    let loaded = problem::load(&a.file)?;
    let file = &loaded.problem;
    let pi = file.stationary()?;
    let k = file.kernel(&a.kernel, &pi)?;
    let f = file.observable(&a.observable)?;
    let method = match a.estimator {
        EstimatorArg::Bm => BatchMethod::BatchMeans,
        EstimatorArg::Obm => BatchMethod::OverlappingBatch,
    };
    let opts = SimulationOptions {
        n_steps: a.n_steps,
        replicates: a.reps,
        seed: a.seed,
        batch_len: a.batch_len,
        method,
    };
    let cmp = empirical_vs_spectral(&f, &k, &pi, &opts)?;
    if let Some(path) = &a.path_out {
        // replicate 0 draws from stream 0, which is what sample_chain uses
        write_file(path, &sample_chain(&k, &pi, a.n_steps, a.seed)?.to_lines())?;
    }
    let tripped = cmp.z.abs() > 5.0;
    let result = json!({
        "kernel": a.kernel,
        "observable": a.observable,
        "comparison": cmp,
        "tripwire": tripped,
    });
    emit(&Report::new("simulate", a, vec![loaded.digest]).finish(result, default_tolerances()))?;
    Ok(if tripped { 1 } else { 0 })
}

fn write_problem(file: &ProblemFile, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&file.to_json())?;
    text.push('\n');
    match out {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing problem file"),
    }
}

pub fn demo(a: &DemoArgs) -> Result<u8> {
    let file = match &a.which {
        Demo::TwoState { p } => crate::demo::two_state(p)?,
        Demo::CycleWalk { n, beta } => crate::demo::cycle_walk(*n, *beta)?,
        Demo::MhDiscrete { n, width } => crate::demo::mh_discrete(*n, *width)?,
        Demo::MixtureCounterexample => crate::demo::mixture_counterexample()?,
    };
    write_problem(&file, a.out.as_deref())?;
    Ok(0)
}

pub fn prune(a: &PruneArgs) -> Result<u8> {
    let loaded = problem::load(&a.file)?;
    let (pruned, removed) = loaded.problem.pruned();
    if !removed.is_empty() {
        eprintln!("removed zero-mass states {removed:?}");
    }
    write_problem(&pruned, a.out.as_deref())?;
    Ok(0)
}
