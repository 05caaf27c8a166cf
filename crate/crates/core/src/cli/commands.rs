//! One function per subcommand. Each returns a structured result, optional
//! rows for CSV, and the seed it used.

use num_traits::Signed;
use rayon::prelude::*;
use serde_json::{json, Value};

use invset_core::bell::{
    a_prime_gap, a_prime_gap_bound, chsh_sweep, run_chsh_experiment, AStatus, Convention,
    CorrelationRecord, ExperimentConfig, InvariantSetRule, Orientation,
};
use invset_core::cantor::{
    cantor_distance, cantor_encode, cantor_membership, classify_perturbation, construct_iterate,
    construction_dimension_for_level, euclidean_distance, hausdorff_dimension,
    quoted_dimension_expression, CantorPoint, DIMENSION_PRECISION,
};
use invset_core::interval::DEFAULT_BITS;
use invset_core::padic::{embed, padic_distance, PAdicNorm, PAdicRational};
use invset_core::rational::{parse_rational, to_f64};
use invset_core::trig::{
    admissible_third_side, incompatibility_search, is_rational, max_snap_error, search_size,
    snap_cosine, snap_phase, snap_theta, third_side, PhaseAngle, PhaseRange, Rationality,
    TripleRecord,
};
use invset_core::BigRational;

use super::output::{CommandOutput, Table};
use super::{
    CantorCmd, ChshArgs, CliError, Command, PadicArgs, PadicOp, PhaseRangeArg, SnapArgs,
    SweepArgs, SweepKind, TriangleCmd,
};

/// θ-grid size for the snap-error sweep.
pub const SNAP_GRID_POINTS: u32 = 10_000;

pub fn execute(cmd: &Command) -> Result<(CommandOutput, Option<u64>), CliError> {
    match cmd {
        Command::Padic(a) => padic(a).map(|o| (o, None)),
        Command::Cantor(c) => cantor(c).map(|o| (o, None)),
        Command::Triangle(t) => triangle(t).map(|o| (o, None)),
        Command::Chsh(a) => chsh(a).map(|o| (o, Some(a.seed))),
        Command::Snap(a) => snap(a).map(|o| (o, None)),
        Command::Sweep(a) => sweep(a).map(|o| (o, None)),
        Command::Replay(_) => unreachable!("replay is resolved before dispatch"),
    }
}

fn plain(result: Value) -> CommandOutput {
    CommandOutput {
        result,
        table: None,
    }
}

fn q(s: &str) -> Result<BigRational, CliError> {
    Ok(parse_rational(s)?)
}

fn norm_json(n: &PAdicNorm) -> Value {
    json!({ "value": n.to_rational().to_string(), "exponent": n.exponent() })
}

fn padic_json(x: &PAdicRational) -> Value {
    json!({
        "display": x.to_string(),
        "valuation": x.valuation(),
        "unit_digits": x.unit().map(|u| u.digits().to_vec()).unwrap_or_default(),
        "precision": x.precision(),
        "absolute_precision": x.absolute_precision(),
        "truncated_value": x.to_rational().to_string(),
    })
}

fn point_json(pt: &CantorPoint) -> Value {
    let iv = pt.enclosing_interval();
    json!({
        "p": pt.p(),
        "address": pt.address(),
        "coordinate": pt.coordinate().to_string(),
        "approx": to_f64(pt.coordinate()),
        "interval": [iv.lo.to_string(), iv.hi.to_string()],
    })
}

fn padic(a: &PadicArgs) -> Result<CommandOutput, CliError> {
    let operands: Vec<&String> = std::iter::once(&a.x).chain(&a.y).collect();
    let want = match a.op {
        PadicOp::Norm => 1,
        _ => 2,
    };
    if operands.len() != want {
        return Err(CliError::Usage(format!(
            "{:?} takes {want} operand(s), got {}",
            a.op,
            operands.len()
        )));
    }
    let qs: Vec<BigRational> = operands.iter().map(|s| q(s)).collect::<Result<_, _>>()?;
    let xs: Vec<PAdicRational> = qs
        .iter()
        .map(|v| embed(v, a.p, a.k))
        .collect::<Result<_, _>>()?;
    let base = json!({ "p": a.p, "k": a.k, "operands": operands });
    let extra = match a.op {
        PadicOp::Norm => {
            let n = xs[0].norm();
            json!({ "op": "norm", "value": n.to_rational().to_string(), "exponent": n.exponent(), "padic": padic_json(&xs[0]) })
        }
        PadicOp::Dist => {
            let d = padic_distance(&xs[0], &xs[1])?;
            json!({ "op": "dist", "value": d.to_rational().to_string(), "exponent": d.exponent() })
        }
        PadicOp::Add => {
            let s = xs[0].add(&xs[1])?;
            json!({ "op": "add", "value": (&qs[0] + &qs[1]).to_string(), "norm": norm_json(&s.norm()), "padic": padic_json(&s) })
        }
        PadicOp::Mul => {
            let m = xs[0].mul(&xs[1])?;
            json!({ "op": "mul", "value": (&qs[0] * &qs[1]).to_string(), "norm": norm_json(&m.norm()), "padic": padic_json(&m) })
        }
    };
    Ok(plain(merge(base, extra)))
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(m), Value::Object(n)) = (&mut a, b) {
        m.extend(n);
    }
    a
}

fn cantor(c: &CantorCmd) -> Result<CommandOutput, CliError> {
    match c {
        CantorCmd::Iterate {
            p,
            depth,
            all_levels,
        } => {
            let mut table = Table::new(&["level", "interval_index", "lo_num", "lo_den", "hi_num", "hi_den"]);
            let mut levels = Vec::new();
            let first = if *all_levels { 0 } else { *depth };
            for level in first..=*depth {
                let ivs = construct_iterate(*p, level)?;
                for (i, iv) in ivs.iter().enumerate() {
                    table.push(vec![
                        level.to_string(),
                        i.to_string(),
                        iv.lo.numer().to_string(),
                        iv.lo.denom().to_string(),
                        iv.hi.numer().to_string(),
                        iv.hi.denom().to_string(),
                    ]);
                }
                let pairs: Vec<[String; 2]> = ivs.iter().map(|iv| [iv.lo.to_string(), iv.hi.to_string()]).collect();
                levels.push(json!({ "level": level, "count": ivs.len(), "intervals": pairs }));
            }
            Ok(CommandOutput {
                result: json!({ "p": p, "depth": depth, "levels": levels }),
                table: Some(table),
            })
        }
        CantorCmd::Encode { x, p, depth } => {
            let pt = cantor_encode(&embed(&q(x)?, *p, *depth)?)?;
            Ok(plain(merge(
                json!({ "x": x, "depth": depth }),
                point_json(&pt),
            )))
        }
        CantorCmd::Member { point, p, depth } => {
            let m = cantor_membership(&q(point)?, *p, *depth)?;
            Ok(plain(json!({ "point": point, "p": p, "depth": depth, "membership": m })))
        }
        CantorCmd::Dist { x, y, p, depth } => {
            let y1 = cantor_encode(&embed(&q(x)?, *p, *depth)?)?;
            let y2 = cantor_encode(&embed(&q(y)?, *p, *depth)?)?;
            let d = cantor_distance(&y1, &y2)?;
            let e = euclidean_distance(&y1, &y2);
            Ok(plain(json!({
                "p": p,
                "depth": depth,
                "y1": point_json(&y1),
                "y2": point_json(&y2),
                "d": norm_json(&d),
                "e": e.to_string(),
                "e_approx": to_f64(&e),
            })))
        }
        CantorCmd::Perturb { x, delta, p, depth } => {
            let base = embed(&q(x)?, *p, *depth)?;
            let class = classify_perturbation(&base, &q(delta)?, *p, *depth)?;
            Ok(plain(json!({
                "x": x,
                "delta": delta,
                "p": p,
                "tag": class.tag,
                "d": norm_json(&class.d_magnitude),
                "base": point_json(&cantor_encode(&base)?),
                "perturbed": class.perturbed.as_ref().map(point_json),
            })))
        }
        CantorCmd::Dim { p, level } => {
            let dim = hausdorff_dimension(*p)?;
            let mut r = json!({ "p": p, "dimension": dim, "precision": DIMENSION_PRECISION });
            if let Some(n) = level {
                let quoted = quoted_dimension_expression(*n);
                r = merge(
                    r,
                    json!({
                        "N": n,
                        "quoted_expression": quoted,
                        "construction_dimension": construction_dimension_for_level(*n),
                        "discrepancy": (construction_dimension_for_level(*n) - quoted).abs(),
                    }),
                );
            }
            Ok(plain(r))
        }
    }
}

fn verdict_json(v: &Rationality) -> Value {
    match v {
        Rationality::Rational(r) => json!({ "verdict": "rational", "value": r.to_string() }),
        Rationality::Irrational => json!({ "verdict": "irrational", "value": null }),
    }
}

fn triple_row(r: &TripleRecord) -> Vec<String> {
    let (verdict, value) = match &r.verdict {
        Rationality::Rational(v) => ("rational", v.to_string()),
        Rationality::Irrational => ("irrational", String::new()),
    };
    vec![
        r.cos_ac.to_string(),
        r.cos_bc.to_string(),
        r.phase_fraction.to_string(),
        verdict.into(),
        value,
        r.admissible.to_string(),
        r.is_degenerate().to_string(),
    ]
}

fn triangle(t: &TriangleCmd) -> Result<CommandOutput, CliError> {
    match t {
        TriangleCmd::Third {
            cos_ac,
            cos_bc,
            phase,
        } => {
            let phase = PhaseAngle::new(q(phase)?)?;
            let ac = third_side(&q(cos_ac)?, &q(cos_bc)?, &phase)?;
            let v = is_rational(&ac);
            let enc = ac.enclosure(DEFAULT_BITS);
            Ok(plain(merge(
                json!({
                    "cos_ac": cos_ac,
                    "cos_bc": cos_bc,
                    "phase_fraction": phase.fraction().to_string(),
                    "r1": ac.r1.to_string(),
                    "r2": ac.r2.to_string(),
                    "approx": enc.to_f64(),
                    "precision": to_f64(&enc.width()),
                }),
                verdict_json(&v),
            )))
        }
        TriangleCmd::Check {
            cos_ac,
            cos_bc,
            phase,
            level,
        } => {
            let phase = PhaseAngle::new(q(phase)?)?;
            let (a, b) = (q(cos_ac)?, q(cos_bc)?);
            let ok = admissible_third_side(&a, &b, &phase, *level)?;
            let v = is_rational(&third_side(&a, &b, &phase)?);
            Ok(plain(merge(
                json!({
                    "cos_ac": cos_ac,
                    "cos_bc": cos_bc,
                    "phase_fraction": phase.fraction().to_string(),
                    "N": level,
                    "admissible": ok,
                    "status": if ok { "admissible" } else { "inadmissible" },
                }),
                verdict_json(&v),
            )))
        }
        TriangleCmd::Search {
            level,
            range,
            budget,
        } => {
            let range = match range {
                PhaseRangeArg::Open => PhaseRange::Open,
                PhaseRangeArg::WithRightAngle => PhaseRange::WithRightAngle,
                PhaseRangeArg::Full => PhaseRange::Full,
            };
            let report = incompatibility_search(*level, range, *budget)?;
            let mut table = Table::new(&[
                "cos_ac",
                "cos_bc",
                "phase_fraction",
                "verdict",
                "value",
                "admissible",
                "degenerate",
            ]);
            for r in report.admissible_triples.iter().chain(&report.degenerate_triples) {
                table.push(triple_row(r));
            }
            let listed: Vec<Value> = report
                .admissible_triples
                .iter()
                .map(|r| {
                    merge(
                        json!({
                            "cos_ac": r.cos_ac.to_string(),
                            "cos_bc": r.cos_bc.to_string(),
                            "phase_fraction": r.phase_fraction.to_string(),
                        }),
                        verdict_json(&r.verdict),
                    )
                })
                .collect();
            Ok(CommandOutput {
                result: json!({
                    "N": level,
                    "phase_range": range,
                    "budget": budget,
                    "count_searched": report.count_searched,
                    "search_size": search_size(*level, range),
                    "admissible_nondegenerate": report.admissible_triples.len(),
                    "degenerate": report.degenerate_triples.len(),
                    "admissible_triples": listed,
                }),
                table: Some(table),
            })
        }
    }
}

fn orientation(s: &str) -> Result<Orientation, CliError> {
    Ok(Orientation::new(q(s)?))
}

fn chsh(a: &ChshArgs) -> Result<CommandOutput, CliError> {
    let mut cfg = ExperimentConfig::standard(a.level);
    if !a.standard {
        let get = |o: &Option<String>| orientation(o.as_deref().unwrap_or_default());
        cfg.a = [get(&a.a1)?, get(&a.a2)?];
        cfg.b = [get(&a.b1)?, get(&a.b2)?];
    }
    let bad_pair = || CliError::Usage(format!("--realized expects `i,j`, got {:?}", a.realized));
    let (i, j) = a.realized.split_once(',').ok_or_else(bad_pair)?;
    cfg.realized_pair = (
        i.trim().parse().map_err(|_| bad_pair())?,
        j.trim().parse().map_err(|_| bad_pair())?,
    );
    cfg.snap = !a.no_snap;
    cfg.convention = if a.singlet {
        Convention::Singlet
    } else {
        Convention::Cosine
    };
    cfg.resolution = a.resolution;
    let rule = if a.no_is_rule {
        InvariantSetRule::Disabled
    } else {
        InvariantSetRule::Enforced
    };
    let report = run_chsh_experiment(&cfg, a.n, a.seed, rule)?;

    let mut table = Table::new(&CorrelationRecord::CSV_HEADER.split(',').collect::<Vec<_>>());
    for r in &report.records {
        table.push(vec![
            r.label.to_string(),
            r.n_trials.to_string(),
            r.sum_products.to_string(),
            r.a_plus.to_string(),
            r.estimate.to_string(),
            r.exact_correlation.to_string(),
            format!("{:e}", r.standard_error),
        ]);
    }
    let diagnostics = match &report.a_status {
        AStatus::Undefined { diagnostics } => json!(diagnostics),
        AStatus::Value { .. } => json!([]),
    };
    let config = json!({
        "a1": cfg.a[0].angle().to_string(),
        "a2": cfg.a[1].angle().to_string(),
        "b1": cfg.b[0].angle().to_string(),
        "b2": cfg.b[1].angle().to_string(),
        "angle_unit": "pi",
        "realized_pair": [cfg.realized_pair.0, cfg.realized_pair.1],
        "snap": cfg.snap,
    });
    let result = merge(
        json!({ "config": config, "diagnostics": diagnostics }),
        serde_json::to_value(&report).map_err(|e| CliError::Domain(e.to_string()))?,
    );
    Ok(CommandOutput {
        result,
        table: Some(table),
    })
}

fn snap(a: &SnapArgs) -> Result<CommandOutput, CliError> {
    let n = a.level;
    if let Some(theta) = a.theta {
        let s = snap_theta(theta, n)?;
        return Ok(plain(json!({
            "theta": theta,
            "N": n,
            "cosine": s.cosine.to_string(),
            "snapped_theta": s.snapped_theta,
            "error": s.error,
            "bound": 2f64.powf(-(n as f64 - 1.0) / 2.0),
            "precision": f64::EPSILON,
        })));
    }
    let (kind, input, snapped) = if let Some(c) = &a.cosine {
        ("cosine", c, snap_cosine(&q(c)?, n)?.to_rational())
    } else {
        let f = a.phase.as_ref().expect("clap requires one target");
        ("phase", f, snap_phase(&q(f)?, n)?.fraction().clone())
    };
    let err = (&snapped - q(input)?).abs();
    Ok(plain(json!({
        "kind": kind,
        "input": input,
        "N": n,
        "snapped": snapped.to_string(),
        "error": err.to_string(),
        "error_approx": to_f64(&err),
    })))
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u64>, CliError> {
    let bad = || CliError::Usage(format!("range must look like `a..b`, got {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    Ok(lo.trim().parse().map_err(|_| bad())?..=hi.trim().parse().map_err(|_| bad())?)
}

fn level_of(v: u64) -> Result<u32, CliError> {
    u32::try_from(v).map_err(|_| CliError::Usage(format!("level {v} too large")))
}

fn sweep(a: &SweepArgs) -> Result<CommandOutput, CliError> {
    let values: Vec<u64> = parse_range(&a.range)?.collect();
    // Points run in parallel; collect() keeps parameter order.
    let table = match a.experiment {
        SweepKind::ChshVsN => {
            let mut t = Table::new(&["N", "a_prime_exact", "a_prime_approx", "gap_approx", "gap_bound"]);
            let rows: Vec<Vec<String>> = values
                .par_iter()
                .map(|&v| {
                    let n = level_of(v)?;
                    let (_, ap) = chsh_sweep([n])?.remove(0);
                    Ok(vec![
                        n.to_string(),
                        ap.to_string(),
                        to_f64(&ap).to_string(),
                        format!("{:e}", a_prime_gap(&ap).to_f64()),
                        a_prime_gap_bound(n).to_string(),
                    ])
                })
                .collect::<Result<_, CliError>>()?;
            t.rows = rows;
            t
        }
        SweepKind::DimVsP => {
            let mut t = Table::new(&["p", "dimension", "precision"]);
            t.rows = values
                .par_iter()
                .map(|&p| {
                    Ok(vec![
                        p.to_string(),
                        hausdorff_dimension(p)?.to_string(),
                        format!("{DIMENSION_PRECISION:e}"),
                    ])
                })
                .collect::<Result<_, CliError>>()?;
            t
        }
        SweepKind::SnapErrorVsN => {
            let mut t = Table::new(&["N", "max_error", "bound", "grid_points"]);
            t.rows = values
                .par_iter()
                .map(|&v| {
                    let n = level_of(v)?;
                    Ok(vec![
                        n.to_string(),
                        format!("{:e}", max_snap_error(n, SNAP_GRID_POINTS)),
                        format!("{:e}", 2.0 * 2f64.powf(-(n as f64 - 1.0) / 2.0)),
                        SNAP_GRID_POINTS.to_string(),
                    ])
                })
                .collect::<Result<_, CliError>>()?;
            t
        }
    };
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|r| {
            Value::Object(
                table
                    .header
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|c| Value::String(c.clone())))
                    .collect(),
            )
        })
        .collect();
    Ok(CommandOutput {
        result: json!({ "experiment": a.experiment, "range": a.range, "rows": rows }),
        table: Some(table),
    })
}
