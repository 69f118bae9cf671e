//! Flat-file exports of iteration runs: a per-step CSV trace and a compact
//! JSON result.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::FamilyParams;
use crate::pullback::{min_spherical_gap, IterationResult, IterationTrace, Status};
use crate::sphere::{Finite, Infinity};

/// The JSON summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub status: Status,
    pub params: Option<FamilyParams>,
    pub steps: usize,
    /// Minimum spherical gap of the last configuration.
    pub final_gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl ResultSummary {
    pub fn from_result(result: &IterationResult) -> Self {
        let trace = &result.trace;
        let final_gap = match trace.steps.last() {
            Some(rec) => rec.diagnostics.min_gap,
            None => min_spherical_gap(&trace.initial).unwrap_or(0.0),
        };
        ResultSummary {
            status: result.status,
            params: result.params,
            steps: trace.steps.len(),
            final_gap,
            message: result.message.clone(),
        }
    }
}

fn param_columns(params: &FamilyParams) -> (Vec<&'static str>, Vec<f64>) {
    match *params {
        FamilyParams::Exp { lambda } | FamilyParams::Pexp { lambda, .. } => {
            (vec!["lambda_re", "lambda_im"], vec![lambda.re, lambda.im])
        }
        FamilyParams::Av2 { alpha, beta } => (
            vec!["alpha_re", "alpha_im", "beta_re", "beta_im"],
            vec![alpha.re, alpha.im, beta.re, beta.im],
        ),
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes one row per pullback step. Points at `∞` are written as `inf` in both
/// of their columns.
pub fn write_trace_csv<W: Write>(trace: &IterationTrace, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Other(format!("writing trace: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let points = trace.initial.len();
    let mut header = vec!["step".to_string()];
    let names = match trace.steps.first() {
        Some(rec) => param_columns(&rec.params).0,
        None => vec![],
    };
    header.extend(names.iter().map(|s| s.to_string()));
    for k in 0..points {
        header.push(format!("z{k}_re"));
        header.push(format!("z{k}_im"));
    }
    for name in ["min_gap", "param_modulus", "eta_n", "displacement"] {
        header.push(name.into());
    }
    w.write_record(&header).map_err(io)?;
    for rec in &trace.steps {
        let mut row = vec![rec.step.to_string()];
        row.extend(param_columns(&rec.params).1.into_iter().map(num));
        for p in &rec.config.positions {
            match p.normalized() {
                Finite(z) => {
                    row.push(num(z.re));
                    row.push(num(z.im));
                }
                Infinity => {
                    row.push("inf".into());
                    row.push("inf".into());
                }
            }
        }
        let d = &rec.diagnostics;
        row.extend([d.min_gap, d.param_modulus, d.eta_n, d.displacement].map(num));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Other(format!("writing trace: {e}")))?;
    Ok(())
}

pub fn trace_csv_string(trace: &IterationTrace) -> Result<String> {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Other(e.to_string()))
}
