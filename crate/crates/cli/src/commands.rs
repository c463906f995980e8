use serde::Serialize;
use serde_json::json;

use embezzlemeter::conversion::purified_optimum;
use embezzlemeter::families::{default_y_schedule, integral_asymptotics, power_sweep};
use embezzlemeter::io::{fmt_num, parse_ensemble_json, parse_probvec, parse_table_csv};
use embezzlemeter::majorization::{oracle_min_l1_over_majorizing, OracleMethod};
use embezzlemeter::{
    analytic_limit_power, embezzle_scan, ensemble_convertible, geometric_schedule, star_distance,
    ConversionReport, Error, FamilySpec, Normalization, ProbVec,
};

use crate::manifest::RunManifest;
use crate::{
    CliError, DstarArgs, EmbezzleScanArgs, EnsembleArgs, FamilyLimitArgs, Figure1Args, OracleKind,
    PairArgs,
};

pub enum Output {
    Json(serde_json::Value),
    /// CSV body without the manifest line.
    Csv(String),
}

impl Output {
    pub fn render(&self, manifest: &RunManifest) -> String {
        match self {
            Output::Json(report) => {
                let doc = json!({ "manifest": manifest, "report": report });
                serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n"
            }
            Output::Csv(body) => {
                let m = serde_json::to_string(manifest).expect("manifest serializes");
                format!("# manifest {m}\n{body}")
            }
        }
    }
}

fn to_json(v: impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn policy(renormalize: bool) -> Normalization {
    if renormalize {
        Normalization::Renormalize
    } else {
        Normalization::Strict
    }
}

fn read_state(
    manifest: &mut RunManifest,
    path: &str,
    renormalize: bool,
) -> Result<ProbVec, CliError> {
    let body = manifest.read_input(path)?;
    parse_probvec(&body, policy(renormalize)).map_err(|e| CliError::Core(prefix(path, e)))
}

fn prefix(path: &str, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("{path}: {m}")),
        Error::Parse(m) => Error::Parse(format!("{path}: {m}")),
        other => other,
    }
}

/// Loads `--family`, hashing the table file of `custom:` families.
fn read_family(manifest: &mut RunManifest, text: &str) -> Result<FamilySpec, CliError> {
    match text.trim().strip_prefix("custom:") {
        Some(path) => {
            let body = manifest.read_input(path)?;
            let points = parse_table_csv(&body).map_err(|e| prefix(path, e))?;
            Ok(FamilySpec::named_table(path, points)?)
        }
        None => Ok(FamilySpec::parse(text)?),
    }
}

#[derive(Serialize)]
struct OracleValue {
    method: &'static str,
    value: f64,
}

#[derive(Serialize)]
struct DstarReport {
    #[serde(flatten)]
    report: ConversionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleValue>,
}

pub fn dstar(args: &DstarArgs, manifest: &mut RunManifest) -> Result<Output, CliError> {
    let p = read_state(manifest, &args.pair.psi, args.pair.renormalize)?;
    let q = read_state(manifest, &args.pair.phi, args.pair.renormalize)?;
    let mut report = star_distance(&p, &q);
    if args.purified {
        manifest.param("tol", args.tol).param("budget", args.budget);
        let opt = purified_optimum(&p, &q, args.tol, args.budget)?;
        report.d_star_purified = Some(opt.distance);
    }
    if let Some(d) = args.d_value {
        manifest.param("d_value", d);
        report = report.with_discrimination_input(d);
    }
    let oracle = match args.oracle {
        None => None,
        Some(kind) => {
            manifest.param("oracle", format!("{kind:?}").to_lowercase());
            let (method, label) = match kind {
                OracleKind::Grid => {
                    let dim = p.dim().max(q.dim());
                    let m = match args.resolution {
                        Some(resolution) => OracleMethod::Grid { resolution },
                        None => OracleMethod::default_grid(dim),
                    };
                    if let OracleMethod::Grid { resolution } = m {
                        manifest.param("resolution", resolution);
                    }
                    (m, "grid")
                }
                OracleKind::Lp => (OracleMethod::Lp, "lp"),
            };
            let value = oracle_min_l1_over_majorizing(&p, &q, method)?;
            Some(OracleValue {
                method: label,
                value,
            })
        }
    };
    Ok(Output::Json(to_json(DstarReport { report, oracle })))
}

pub fn nielsen(args: &PairArgs, manifest: &mut RunManifest) -> Result<Output, CliError> {
    let p = read_state(manifest, &args.psi, args.renormalize)?;
    let q = read_state(manifest, &args.phi, args.renormalize)?;
    let report = star_distance(&p, &q);
    Ok(Output::Json(json!({
        "convertible": report.d_star == 0.0,
        "d_star": report.d_star,
        "argmax_k": report.argmax_k,
    })))
}

pub fn ensemble_check(args: &EnsembleArgs, manifest: &mut RunManifest) -> Result<Output, CliError> {
    let p = read_state(manifest, &args.psi, args.renormalize)?;
    let body = manifest.read_input(&args.ensemble)?;
    let ens = parse_ensemble_json(&body).map_err(|e| prefix(&args.ensemble, e))?;
    Ok(Output::Json(to_json(ensemble_convertible(&p, &ens))))
}

/// `geometric:start,factor,count` or an explicit comma-separated list.
fn parse_schedule(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "bad schedule `{text}` (expected geometric:start,factor,count or n1,n2,…)"
        ))
    };
    if let Some(rest) = text.strip_prefix("geometric:") {
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        let [start, factor, count] = parts[..] else {
            return Err(bad());
        };
        let start: f64 = start.parse().map_err(|_| bad())?;
        let factor: f64 = factor.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        return Ok(geometric_schedule(start, factor, count)?);
    }
    text.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

fn parse_y_schedule(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "bad y schedule `{text}` (expected geometric:start,factor,count or y1,y2,…)"
        ))
    };
    if let Some(rest) = text.strip_prefix("geometric:") {
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        let [start, factor, count] = parts[..] else {
            return Err(bad());
        };
        let start: f64 = start.parse().map_err(|_| bad())?;
        let factor: f64 = factor.parse().map_err(|_| bad())?;
        let count: i32 = count.parse().map_err(|_| bad())?;
        return Ok((0..count).map(|j| start * factor.powi(j)).collect());
    }
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

pub fn embezzle_scan_cmd(
    args: &EmbezzleScanArgs,
    manifest: &mut RunManifest,
) -> Result<Output, CliError> {
    let family = read_family(manifest, &args.family)?;
    let schedule = parse_schedule(&args.schedule)?;
    let results = embezzle_scan(&family, args.m, &schedule)?;
    let with_bound = family.finite_n_bound(1, args.m).is_some();
    let mut out = String::from("n,d_star,criterion,p1");
    out.push_str(if with_bound { ",bound\n" } else { "\n" });
    for (&n, r) in schedule.iter().zip(results) {
        match r {
            Ok(e) => {
                let mut row = [
                    n.to_string(),
                    fmt_num(e.d_star_value),
                    fmt_num(e.criterion_value),
                    fmt_num(e.p1),
                ]
                .join(",");
                if let Some(b) = family.finite_n_bound(n, args.m) {
                    row.push(',');
                    row.push_str(&fmt_num(b));
                }
                out.push_str(&row);
                out.push('\n');
            }
            Err(e) => out.push_str(&format!("# error n={n}: {e}\n")),
        }
    }
    Ok(Output::Csv(out))
}

pub fn family_limit(
    args: &FamilyLimitArgs,
    manifest: &mut RunManifest,
) -> Result<Output, CliError> {
    let family = read_family(manifest, &args.family)?;
    let mut report = if args.numeric {
        let ys = match &args.y_schedule {
            Some(s) => parse_y_schedule(s)?,
            None => default_y_schedule(),
        };
        integral_asymptotics(&family, args.m, &ys, args.quad_tol)?
    } else {
        match family.power_exponent() {
            Some(alpha) => analytic_limit_power(alpha, args.m)?,
            None => {
                // Non-power families only have numeric trajectories.
                let mut r = integral_asymptotics(&family, args.m, &[], args.quad_tol)?;
                r.warnings
                    .push("no closed-form limit for this family; pass --numeric for M(y)".into());
                r
            }
        }
    };
    report.family = family.label();
    if let Some(s) = &args.schedule {
        report = report.with_finite_tail(&family, &parse_schedule(s)?)?;
    }
    Ok(Output::Json(to_json(report)))
}

/// `start:step:end`, traversed from `start` towards `end`; the sign of `step` is ignored.
pub fn parse_alphas(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("bad α range `{text}`: {why}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad("expected start:step:end"))?;
    let [start, step, end] = parts[..] else {
        return Err(bad("expected start:step:end"));
    };
    if !(start.is_finite() && end.is_finite() && step.is_finite()) {
        return Err(bad("values must be finite"));
    }
    let step = step.abs();
    let span = (end - start).abs();
    if step == 0.0 {
        return if span == 0.0 {
            Ok(vec![round12(start)])
        } else {
            Err(bad("step must be non-zero"))
        };
    }
    let count = (span / step + 1e-9).floor() + 1.0;
    if count > 1e6 {
        return Err(bad("more than 10^6 values"));
    }
    let dir = if end >= start { 1.0 } else { -1.0 };
    Ok((0..count as usize)
        .map(|i| round12(start + dir * step * i as f64))
        .collect())
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12 + 0.0
}

pub fn figure1(args: &Figure1Args, _manifest: &mut RunManifest) -> Result<Output, CliError> {
    let alphas = parse_alphas(&args.alphas)?;
    let ns = parse_schedule(&args.n)?;
    let rows = power_sweep(args.m, &alphas, &ns)?;
    let mut out = String::from("alpha,limit_or_nan,lower,upper");
    for n in &ns {
        out.push_str(&format!(",finite_n_estimate_{n}"));
    }
    out.push('\n');
    for row in rows {
        let mut fields = vec![
            fmt_num(row.alpha),
            fmt_num(row.limits.limit.unwrap_or(f64::NAN)),
            fmt_num(row.limits.lower),
            fmt_num(row.limits.upper),
        ];
        let mut errors = Vec::new();
        for (n, r) in &row.finite {
            match r {
                Ok(d) => fields.push(fmt_num(*d)),
                Err(e) => {
                    fields.push(fmt_num(f64::NAN));
                    errors.push(format!("# error alpha={} n={n}: {e}\n", fmt_num(row.alpha)));
                }
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
        errors.iter().for_each(|e| out.push_str(e));
    }
    Ok(Output::Csv(out))
}
