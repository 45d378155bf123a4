use crate::args::{BoundKind, BoundsArgs, ConfigArgs, DistanceArgs, DistanceLoss, Global, OutFormat, SuiteArg, ThresholdArgs, VerifyArgs};
use crate::output::{num, opt, point, Table};
use crate::CliError;
use predens::config::{fresh_seed, ExperimentConfig, Format, OutputSpec};
use predens::metrics::{l1_distance, l2_general_distance, l2_normal_distance};
use predens::risk::{baranchik_cap, l1_baranchik_bound, l1_bound_normal, l1_general_bound, l2_dual_mixture_bound, threshold_k, threshold_ka, BoundReport, NormalModel};
use predens::sim::dominance::point_seed;
use predens::sim::{dominance_scan, mc_risk};
use predens::verify::{Outcome, Suite, DEFAULT_SEED};
use predens::{MixingLaw, SmnDensity};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// What a command produced, and whether it counts as a pass.
pub struct Run {
    pub table: Table,
    pub pass: bool,
    pub csv: bool,
    pub out: Option<PathBuf>,
}

fn announce(resolved: &Value) {
    eprintln!("resolved config:\n{}", serde_json::to_string_pretty(resolved).expect("json values serialise"));
}

fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn csv_flag(global: &Global) -> bool {
    global.format == Some(OutFormat::Csv)
}

fn format_name(csv: bool) -> &'static str {
    if csv {
        "csv"
    } else {
        "json"
    }
}

/// Loads a scenario and fills in the seed and output settings from the
/// command line, printing the result.
fn resolve_config(global: &Global, args: &ConfigArgs) -> Result<(ExperimentConfig, bool, Option<PathBuf>), CliError> {
    let mut cfg = load(&args.config)?.resolve(global.seed)?;
    let csv = match global.format {
        Some(f) => f == OutFormat::Csv,
        None => cfg.output.format == Format::Csv,
    };
    let out = global.out.clone().or_else(|| cfg.output.path.clone());
    cfg.output = OutputSpec { format: if csv { Format::Csv } else { Format::Json }, path: out.clone() };
    announce(&serde_json::to_value(&cfg)?);
    Ok((cfg, csv, out))
}

fn threads() -> usize {
    rayon::current_num_threads()
}

pub fn risk(global: &Global, args: &ConfigArgs) -> Result<Run, CliError> {
    let (cfg, csv, out) = resolve_config(global, args)?;
    let model = cfg.model.build()?;
    let seed = cfg.seed().expect("resolved configs carry a seed");
    let ests = cfg.estimators.iter().map(|e| e.build(&model)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (i, mu) in cfg.grid().iter().enumerate() {
        for (spec, est) in cfg.estimators.iter().zip(&ests) {
            let label = spec.display_label(&model);
            let closed = spec.closed_form_risk(&cfg.model, &cfg.loss)?;
            let r = mc_risk(&model, est, &cfg.loss, mu, cfg.n, point_seed(seed, i))?;
            rows.push(vec![
                cfg.scenario.clone(),
                label.clone(),
                point(mu),
                opt(closed),
                num(r.mean),
                num(r.se),
                r.n.to_string(),
                r.seed.to_string(),
            ]);
            records.push(json!({
                "estimator": label, "mu": mu, "closed_form": closed,
                "mc_mean": r.mean, "se": r.se, "n": r.n, "seed": r.seed,
            }));
        }
    }
    let json = json!({ "scenario": cfg.scenario, "loss": cfg.loss.id(), "seed": seed, "rows": records });
    let header = vec!["scenario", "estimator", "mu", "closed_form", "mc_mean", "se", "n", "seed"];
    Ok(Run { table: Table { json, header, rows }, pass: true, csv, out })
}

pub fn dominance(global: &Global, args: &ConfigArgs) -> Result<Run, CliError> {
    let (cfg, csv, out) = resolve_config(global, args)?;
    if cfg.estimators.len() != 2 {
        return Err(CliError::Usage(format!(
            "a dominance scan compares exactly two estimators, the config lists {}",
            cfg.estimators.len()
        )));
    }
    let model = cfg.model.build()?;
    let seed = cfg.seed().expect("resolved configs carry a seed");
    let e1 = cfg.estimators[0].build(&model)?;
    let e2 = cfg.estimators[1].build(&model)?;
    let rep = dominance_scan(&e1, &e2, &cfg.loss, &model, &cfg.grid(), cfg.n, seed)?;
    let verdict = serde_json::to_value(rep.verdict)?.as_str().unwrap_or_default().to_string();
    let rows = rep
        .points
        .iter()
        .map(|pt| {
            vec![
                cfg.scenario.clone(),
                point(&pt.mu),
                num(pt.risk1),
                num(pt.se1),
                num(pt.risk2),
                num(pt.se2),
                num(pt.diff),
                num(pt.diff_se),
                serde_json::to_value(pt.comparison).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                verdict.clone(),
            ]
        })
        .collect();
    let json = json!({ "scenario": cfg.scenario, "report": rep });
    let header = vec!["scenario", "mu", "risk1", "se1", "risk2", "se2", "diff", "diff_se", "comparison", "verdict"];
    Ok(Run { table: Table { json, header, rows }, pass: true, csv, out })
}

pub fn threshold(global: &Global, args: &ThresholdArgs) -> Result<Run, CliError> {
    let csv = csv_flag(global);
    announce(&json!({
        "command": "threshold", "p": args.p, "r": args.r, "a": args.a,
        "format": format_name(csv), "out": global.out, "threads": threads(),
    }));
    let shrinks: Vec<Option<f64>> = if args.a.is_empty() { vec![None] } else { args.a.iter().copied().map(Some).collect() };
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for &p in &args.p {
        for &r in &args.r {
            for &a in &shrinks {
                let rep = match a {
                    None => threshold_k(p, r)?,
                    Some(a) => threshold_ka(p, r, a)?,
                };
                rows.push(vec![
                    rep.equation_id.clone(),
                    p.to_string(),
                    num(r),
                    num(a.unwrap_or(1.0)),
                    num(rep.value),
                    num(rep.residual),
                    num(rep.bracket.0),
                    num(rep.bracket.1),
                    rep.note.clone().unwrap_or_default(),
                ]);
                reports.push(rep);
            }
        }
    }
    let header = vec!["equation_id", "p", "r", "a", "value", "residual", "bracket_lo", "bracket_hi", "note"];
    Ok(Run { table: Table { json: serde_json::to_value(&reports)?, header, rows }, pass: true, csv, out: global.out.clone() })
}

pub fn distance(global: &Global, args: &DistanceArgs) -> Result<Run, CliError> {
    let csv = csv_flag(global);
    let v2 = args.v2.unwrap_or(args.v1);
    let family = match args.nu {
        Some(nu) => format!("student(nu={nu})"),
        None => "normal".into(),
    };
    let loss = match args.loss {
        DistanceLoss::L1 => "l1",
        DistanceLoss::L2 => "l2",
    };
    announce(&json!({
        "command": "distance", "loss": loss, "p": args.p, "delta": args.delta, "v1": args.v1, "v2": v2,
        "family": family, "format": format_name(csv), "out": global.out, "threads": threads(),
    }));
    if args.p == 0 {
        return Err(CliError::Usage("dimension must be at least 1".into()));
    }
    let density = |v: f64| match args.nu {
        Some(nu) => SmnDensity::student(args.p, nu, v.sqrt()),
        None => SmnDensity::normal(args.p, v),
    };
    let mut shift = vec![0.0; args.p];
    shift[0] = args.delta;
    let value = match args.loss {
        DistanceLoss::L1 => {
            if v2 != args.v1 {
                return Err(CliError::Usage("the L1 identity needs a location family: v2 must equal v1".into()));
            }
            l1_distance(&density(args.v1)?, args.delta)?
        }
        DistanceLoss::L2 => match args.nu {
            None => l2_normal_distance(&vec![0.0; args.p], args.v1, &shift, v2)?,
            Some(_) => l2_general_distance(&density(v2)?, &density(args.v1)?, &shift)?,
        },
    };
    let json = json!({ "loss": loss, "family": family, "p": args.p, "delta": args.delta, "v1": args.v1, "v2": v2, "value": value });
    let rows = vec![vec![loss.into(), family, args.p.to_string(), num(args.delta), num(args.v1), num(v2), num(value)]];
    let header = vec!["loss", "family", "p", "delta", "v1", "v2", "value"];
    Ok(Run { table: Table { json, header, rows }, pass: true, csv, out: global.out.clone() })
}

fn parse_law(text: Option<&str>, fallback: f64) -> Result<MixingLaw, CliError> {
    match text {
        Some(t) => serde_json::from_str(t).map_err(|e| CliError::Usage(format!("bad mixing law {t}: {e}"))),
        None => Ok(MixingLaw::point(fallback)?),
    }
}

fn closed_bound(id: &str, inputs: &[(&str, f64)], value: f64) -> BoundReport {
    BoundReport {
        equation_id: id.into(),
        inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        value,
        se: 0.0,
        moments: BTreeMap::new(),
        ess: None,
        exact: true,
    }
}

pub fn bounds(global: &Global, args: &BoundsArgs) -> Result<Run, CliError> {
    let csv = csv_flag(global);
    let g = parse_law(args.g.as_deref(), args.sx2)?;
    let h = parse_law(args.h.as_deref(), args.sy2)?;
    let sampled = matches!(args.kind, BoundKind::L2Dual | BoundKind::L1Dual);
    let seed = if sampled { Some(global.seed.unwrap_or_else(fresh_seed)) } else { None };
    let kind = format!("{:?}", args.kind).to_lowercase();
    announce(&json!({
        "command": "bounds", "kind": kind, "p": args.p, "g": g, "h": h,
        "n": if sampled { Some(args.n) } else { None }, "seed": seed,
        "format": format_name(csv), "out": global.out, "threads": threads(),
    }));
    let p = args.p;
    let reports = match args.kind {
        BoundKind::Normal => {
            let inputs = [("p", p as f64), ("sx2", args.sx2), ("sy2", args.sy2)];
            let mut v = vec![closed_bound("l2_normal_baranchik_cap", &inputs, baranchik_cap(p, args.sx2, args.sy2)?)];
            if p >= 4 {
                let b = l1_bound_normal(&NormalModel::<f64>::new(p, args.sx2, args.sy2)?)?;
                v.push(closed_bound("l1_normal_general_cap", &inputs, b.general_route));
                v.push(closed_bound("l1_normal_dual_cap", &inputs, b.dual_route));
            }
            v
        }
        BoundKind::L2Dual => vec![l2_dual_mixture_bound(&g, &h, p, args.n, seed.expect("sampled"))?],
        BoundKind::L1Dual => vec![l1_baranchik_bound(&g, &h, p, args.n, seed.expect("sampled"))?],
        BoundKind::L1General => {
            let value = l1_general_bound(&SmnDensity::new(p, g.clone())?, &SmnDensity::new(p, h.clone())?, p)?;
            vec![closed_bound("l1_general_cap", &[("p", p as f64), ("mean_g", g.mean()), ("mean_h", h.mean())], value)]
        }
    };
    let rows = reports
        .iter()
        .map(|b| {
            vec![
                b.equation_id.clone(),
                p.to_string(),
                num(b.value),
                num(b.se),
                opt(b.ess),
                b.exact.to_string(),
            ]
        })
        .collect();
    let header = vec!["equation_id", "p", "value", "se", "ess", "exact"];
    Ok(Run { table: Table { json: serde_json::to_value(&reports)?, header, rows }, pass: true, csv, out: global.out.clone() })
}

pub fn verify(global: &Global, args: &VerifyArgs) -> Result<Run, CliError> {
    let csv = csv_flag(global);
    let seed = global.seed.unwrap_or(DEFAULT_SEED);
    let suite = match args.suite {
        SuiteArg::Identities => Suite::Identities,
        SuiteArg::Thresholds => Suite::Thresholds,
        SuiteArg::Dominance => Suite::Dominance,
        SuiteArg::Bounds => Suite::Bounds,
        SuiteArg::All => Suite::All,
    };
    announce(&json!({
        "command": "verify", "suite": suite, "seed": seed,
        "format": format_name(csv), "out": global.out, "threads": threads(),
    }));
    let mut outcomes: Vec<Outcome> = Vec::new();
    for check in suite.checks() {
        let o = check.run(seed);
        eprintln!("{}", serde_json::to_string(&o)?);
        eprintln!("criterion {} {}: {} ({:.1}s)", o.criterion, o.name, if o.pass { "PASS" } else { "FAIL" }, o.elapsed_secs);
        outcomes.push(o);
    }
    let pass = outcomes.iter().all(|o| o.pass);
    let rows = outcomes
        .iter()
        .map(|o| {
            vec![
                o.criterion.to_string(),
                serde_json::to_value(o.check).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                o.name.clone(),
                if o.pass { "PASS" } else { "FAIL" }.into(),
                format!("{:.3}", o.elapsed_secs),
                o.within_budget.to_string(),
            ]
        })
        .collect();
    let json = json!({ "suite": suite, "seed": seed, "pass": pass, "checks": outcomes });
    let header = vec!["criterion", "check", "name", "result", "elapsed_secs", "within_budget"];
    Ok(Run { table: Table { json, header, rows }, pass, csv, out: global.out.clone() })
}
