//! JSON and CSV rendering of library results.
//!
//! Floats are written with 17 significant digits so every value round-trips
//! and the output is byte-stable.

use std::str::FromStr;

use num_complex::Complex64;
use serde_json::{json, Number, Value};

use spiderlift::spider_combinatorics::{LegKey, SpiderKind};
use spiderlift::spider_dynamics::{exp_chain_residual, poly_chain_residual, Approximation};
use spiderlift::{OrbitPortrait, SolveReport, SpiderGraph};

/// `x` with 17 significant digits, or `null` when not finite.
pub fn float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    Value::Number(Number::from_str(&text).expect("formatted float is a JSON number"))
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": float(z.re), "im": float(z.im) })
}

pub fn pretty(doc: &Value) -> String {
    serde_json::to_string_pretty(doc).expect("JSON values serialize")
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(T::to_string).collect()
}

/// Residual of the preimage-chain identities at the final configuration.
pub fn chain_residual(r: &SolveReport) -> f64 {
    match r.degree {
        Some(d) => poly_chain_residual(d, &r.config),
        None => exp_chain_residual(&r.config),
    }
}

pub fn report_json(r: &SolveReport, history: bool) -> Value {
    let mut doc = json!({
        "degree": r.degree,
        "lambda": complex(r.lambda),
        "c_selected": r.c_selected.map(complex),
        "c_candidates": r.c_candidates.iter().copied().map(complex).collect::<Vec<_>>(),
        "iterations": r.iterations,
        "residual": float(r.residual),
        "chain_residual": float(chain_residual(r)),
        "collisions": r.collisions,
        "predicted_collisions": r.predicted_collisions,
        "collisions_match_prediction": r.collisions_match_prediction(),
        "warm_start_degree": r.warm_start_degree,
        "points": r.config.points.iter().copied().map(complex).collect::<Vec<_>>(),
        "digits": r.config.digits,
    });
    if history {
        doc["residual_history"] = r.residual_history.iter().copied().map(float).collect();
    }
    doc
}

pub fn portrait_json(p: &OrbitPortrait) -> Value {
    json!({
        "d": p.d,
        "classes": p.classes.iter().map(|c| strings(c)).collect::<Vec<_>>(),
        "characteristic_pair": [p.characteristic_pair.0.to_string(), p.characteristic_pair.1.to_string()],
    })
}

pub fn spider_json(s: &SpiderGraph) -> Value {
    let kind = match &s.kind {
        SpiderKind::Polynomial { d, theta } => {
            json!({ "polynomial": { "d": d, "theta": theta.to_string() } })
        }
        SpiderKind::Exponential { address } => {
            json!({ "exponential": { "address": address.to_string() } })
        }
    };
    let legs: Vec<Value> = s
        .legs
        .iter()
        .map(|leg| {
            let key = match &leg.key {
                LegKey::Angle(t) => json!({ "angle": t.to_string() }),
                LegKey::Address(a) => json!({ "address": a.to_string() }),
            };
            json!({ "index": leg.index, "key": key })
        })
        .collect();
    json!({
        "kind": kind,
        "preperiod": s.preperiod,
        "period": s.period,
        "legs": legs,
        "cyclic_order": s.cyclic_order,
        "endpoint_classes": s.endpoint_classes,
    })
}

pub fn approximation_json(a: &Approximation, history: bool) -> Value {
    let limit = a.exponential.as_ref().ok().map(|r| r.lambda);
    let rows: Vec<Value> = a
        .rows
        .iter()
        .map(|(d, row)| match row {
            Ok(row) => json!({
                "d": d,
                "theta": row.theta.to_string(),
                "distance_to_limit": limit.map(|l| float((row.report.lambda - l).norm())),
                "report": report_json(&row.report, history),
            }),
            Err(e) => json!({ "d": d, "error": e.to_string() }),
        })
        .collect();
    let exponential = match &a.exponential {
        Ok(r) => report_json(r, history),
        Err(e) => json!({ "error": e.to_string() }),
    };
    json!({
        "address": a.plan.address.to_string(),
        "min_degree": a.plan.min_degree,
        "j": a.plan.j,
        "rows": rows,
        "exponential": exponential,
    })
}

/// One row per degree. The limit itself is only in the JSON form; here it
/// enters through `distance_to_limit`.
pub fn approximation_csv(a: &Approximation) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| e.to_string();
    w.write_record([
        "d",
        "theta_num",
        "theta_den",
        "lambda_re",
        "lambda_im",
        "c_re",
        "c_im",
        "iterations",
        "residual",
        "distance_to_limit",
        "error",
    ])
    .map_err(err)?;
    let text = |x: f64| format!("{x:.16e}");
    let limit = a.exponential.as_ref().ok().map(|r| r.lambda);
    for (d, row) in &a.rows {
        let mut record = vec![String::new(); 11];
        record[0] = d.to_string();
        match row {
            Ok(row) => {
                let r = &row.report;
                let c = r.c_selected.unwrap_or_default();
                record[1] = row.theta.numer().to_string();
                record[2] = row.theta.denom().to_string();
                record[3] = text(r.lambda.re);
                record[4] = text(r.lambda.im);
                record[5] = text(c.re);
                record[6] = text(c.im);
                record[7] = r.iterations.to_string();
                record[8] = text(r.residual);
                record[9] = limit
                    .map(|l| text((r.lambda - l).norm()))
                    .unwrap_or_default();
            }
            Err(e) => record[10] = e.to_string(),
        }
        w.write_record(&record).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}
