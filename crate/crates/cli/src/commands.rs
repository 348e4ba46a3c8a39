//! The four subcommands and their JSON reports.

use std::collections::BTreeMap;
use std::path::PathBuf;

use painleve::balance::{Balance, EllipsoidPoint};
use painleve::ellipsoid::{
    enumerate_points, modular_obstruction, secant_family, ObstructionVerdict, QuadricSpec, SecantFamily,
};
use painleve::numeric::{eval_series, integrate, validate, Tolerances, ValidationOptions, ValidationReport};
use painleve::rational::{int, parse_rational_list, serde_q, serde_q_map, serde_q_vec, Rational};
use painleve::recursion::{
    resonance_parameter, resonance_report, run, RecursionError, ResonanceRoot, SeriesSolution,
};
use painleve::QPolynomial;
use serde::{Deserialize, Serialize};

use crate::request::{parse_dims, AnalysisRequest};
use crate::CliError;

pub const SCHEMA: u32 = 1;

fn recursion_error(e: RecursionError) -> CliError {
    match e {
        RecursionError::Incompatible { .. }
        | RecursionError::ConstraintResidual { .. }
        | RecursionError::NotAffine
        | RecursionError::Degenerate => CliError::Compatibility(e.to_string()),
        other => CliError::Invalid(other.to_string()),
    }
}

/// Family identifier and leading data of a balance.
#[derive(Debug, Clone, Serialize)]
pub struct BalanceSummary {
    pub family: String,
    pub variables: Vec<String>,
    #[serde(with = "serde_q_vec")]
    pub exponents: Vec<Rational>,
    #[serde(with = "serde_q_vec")]
    pub leading_coefficients: Vec<Rational>,
    #[serde(with = "serde_q")]
    pub q: Rational,
    pub free_parameters: Vec<String>,
    /// Input factor index of each factor in the balance's ordering.
    pub permutation: Vec<usize>,
}

fn summarize(bal: &Balance, params: &BTreeMap<String, Rational>) -> Result<BalanceSummary, CliError> {
    let sys = bal.build_system().map_err(|e| CliError::Invalid(e.to_string()))?;
    let leading = bal
        .coefficients
        .iter()
        .map(|c| c.value(params).map_err(|name| CliError::Invalid(format!("free parameter {name} is not bound"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BalanceSummary {
        family: bal.family.label(),
        variables: sys.variables.clone(),
        exponents: bal.exponents.clone(),
        leading_coefficients: leading,
        q: bal.q.clone(),
        free_parameters: bal.free_parameters.clone(),
        permutation: bal.permutation.clone(),
    })
}

// ---------------------------------------------------------------- resonances

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceOutput {
    pub schema: u32,
    pub command: &'static str,
    pub request: AnalysisRequest,
    #[serde(with = "serde_q_map")]
    pub params: BTreeMap<String, Rational>,
    pub balance: BalanceSummary,
    /// `det X(iota)` coefficients, constant term first.
    pub det: QPolynomial,
    pub det_expanded: String,
    pub factorization: String,
    pub roots: Vec<ResonanceRoot>,
    /// Factor without rational roots, left unfactored.
    pub residual: String,
}

/// `c (iota - r1)^m1 ... (p(iota))` with the rational roots split off.
pub fn factorization_string(roots: &[ResonanceRoot], residual: &QPolynomial) -> String {
    let mut parts = Vec::new();
    let lead_only = residual.degree() == Some(0);
    if lead_only {
        let c = &residual.coeffs()[0];
        if *c != int(1) {
            parts.push(c.to_string());
        }
    }
    for r in roots {
        let base = if r.iota == int(0) {
            "iota".to_string()
        } else if r.iota > int(0) {
            format!("(iota - {})", r.iota)
        } else {
            format!("(iota + {})", -&r.iota)
        };
        parts.push(if r.multiplicity > 1 {
            format!("{base}^{}", r.multiplicity)
        } else {
            base
        });
    }
    if !lead_only {
        parts.push(format!("({})", residual.to_string_in("iota")));
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

pub fn cmd_resonances(req: &AnalysisRequest) -> Result<ResonanceOutput, CliError> {
    let bal = req.balance()?;
    let params = req.params(&bal);
    let report = resonance_report(&bal, &params).map_err(recursion_error)?;
    Ok(ResonanceOutput {
        schema: SCHEMA,
        command: "resonances",
        request: req.clone(),
        balance: summarize(&bal, &params)?,
        det_expanded: report.det.to_string_in("iota"),
        factorization: factorization_string(&report.roots, &report.residual),
        residual: report.residual.to_string_in("iota"),
        det: report.det,
        roots: report.roots,
        params,
    })
}

// -------------------------------------------------------------------- series

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub variable: String,
    pub step: usize,
    #[serde(with = "serde_q")]
    pub exponent: Rational,
    #[serde(with = "serde_q")]
    pub coeff: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintRow {
    #[serde(with = "serde_q")]
    pub exponent: Rational,
    #[serde(with = "serde_q")]
    pub coeff: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesOutput {
    pub schema: u32,
    pub command: &'static str,
    pub request: AnalysisRequest,
    pub truncation: usize,
    pub h0: bool,
    #[serde(skip_serializing_if = "Option::is_none", with = "painleve::rational::serde_q_opt")]
    pub perturb_lambda: Option<Rational>,
    pub balance: BalanceSummary,
    pub coefficients: Vec<CoefficientRow>,
    pub constraint: Vec<ConstraintRow>,
    pub series: SeriesSolution,
}

/// Series options beyond the balance selector.
#[derive(Debug, Clone)]
pub struct SeriesOptions {
    pub truncation: Option<usize>,
    pub h0: bool,
    pub perturb_lambda: Option<Rational>,
}

pub fn compute_series(req: &AnalysisRequest, opts: &SeriesOptions) -> Result<SeriesSolution, CliError> {
    let bal = req.balance()?;
    let params = req.params(&bal);
    let n = opts
        .truncation
        .unwrap_or_else(|| painleve::recursion::default_truncation(&bal.q));
    let sol = run(&bal, &params, n, opts.h0).map_err(recursion_error)?;
    let Some(delta) = &opts.perturb_lambda else {
        return Ok(sol);
    };
    if !opts.h0 {
        return Err(CliError::Invalid("--perturb-lambda needs --h0".into()));
    }
    // keep the projection claim so validation can expose the shift
    let top = resonance_report(&bal, &params)
        .map_err(recursion_error)?
        .top_step()
        .ok_or_else(|| CliError::Invalid("no top resonance".into()))?;
    let lambda = sol.lambda.clone().unwrap_or_default() + delta;
    let mut shifted = params;
    shifted.insert(resonance_parameter(top, 0), lambda.clone());
    let mut out = run(&bal, &shifted, n, false).map_err(recursion_error)?;
    out.h0_projected = true;
    out.lambda = Some(lambda);
    Ok(out)
}

pub fn cmd_series(req: &AnalysisRequest, opts: &SeriesOptions) -> Result<SeriesOutput, CliError> {
    let sol = compute_series(req, opts)?;
    let bal = req.balance()?;
    let coefficients = sol
        .variables
        .iter()
        .flat_map(|v| {
            v.terms.iter().enumerate().map(move |(step, t)| CoefficientRow {
                variable: v.name.clone(),
                step,
                exponent: t.exponent.clone(),
                coeff: t.coeff.clone(),
            })
        })
        .collect();
    let constraint = sol
        .constraint_series(sol.truncation)
        .map_err(|e| CliError::Invalid(e.to_string()))?
        .into_iter()
        .map(|(exponent, coeff)| ConstraintRow { exponent, coeff })
        .collect();
    Ok(SeriesOutput {
        schema: SCHEMA,
        command: "series",
        request: req.clone(),
        truncation: sol.truncation,
        h0: opts.h0,
        perturb_lambda: opts.perturb_lambda.clone(),
        balance: summarize(&bal, &sol.params)?,
        coefficients,
        constraint,
        series: sol,
    })
}

// ------------------------------------------------------------------ validate

#[derive(Debug, Clone, Serialize)]
pub struct ValidateOutput {
    pub schema: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub request: Option<AnalysisRequest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    pub family: String,
    #[serde(with = "serde_q_map")]
    pub params: BTreeMap<String, Rational>,
    pub report: ValidationReport,
    pub pass: bool,
}

/// A series JSON file: either a `series` report or a bare series.
pub fn load_series(path: &PathBuf) -> Result<SeriesSolution, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let series = value.get("series").cloned().unwrap_or(value);
    serde_json::from_value(series).map_err(|e| CliError::Invalid(format!("{}: not a series: {e}", path.display())))
}

pub fn cmd_validate(
    sol: &SeriesSolution,
    request: Option<AnalysisRequest>,
    input: Option<String>,
    csv: Option<&PathBuf>,
) -> Result<ValidateOutput, CliError> {
    let opts = ValidationOptions::default();
    let report = validate(sol, &opts).map_err(|e| CliError::Invalid(e.to_string()))?;
    if let Some(path) = csv {
        let sys = sol.system().map_err(|e| CliError::Invalid(e.to_string()))?;
        let t0 = opts.seed_times[0];
        let y0 = eval_series(sol, t0).map_err(|e| CliError::Invalid(e.to_string()))?;
        let traj = integrate(&sys, &y0, (t0, opts.t_end), Tolerances::uniform(opts.tolerance));
        std::fs::write(path, traj.to_csv())
            .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(ValidateOutput {
        schema: SCHEMA,
        command: "validate",
        request,
        input,
        family: sol.balance.family.label(),
        params: sol.params.clone(),
        pass: report.pass,
        report,
    })
}

// ----------------------------------------------------------------- ellipsoid

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionRow {
    pub modulus: u32,
    pub verdict: ObstructionVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipsoidOutput {
    pub schema: u32,
    pub command: &'static str,
    pub dims: Vec<u32>,
    pub bound: u32,
    pub count: usize,
    pub points: Vec<EllipsoidPoint>,
    /// Rational points dropped because a coordinate vanishes.
    pub with_zero_coordinate: usize,
    pub obstructions: Vec<ObstructionRow>,
    pub obstructed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secant: Option<SecantFamily>,
}

#[derive(Debug, Clone)]
pub struct SecantRequest {
    pub base: String,
    pub direction: String,
    pub count: usize,
}

pub fn cmd_ellipsoid(
    dims: &str,
    bound: u32,
    moduli: &[u32],
    secant: Option<&SecantRequest>,
) -> Result<EllipsoidOutput, CliError> {
    let dims = parse_dims(dims)?;
    let spec = QuadricSpec::new(&dims).map_err(|e| CliError::Invalid(e.to_string()))?;
    let search = enumerate_points(&spec, bound);
    let obstructions = moduli
        .iter()
        .map(|&m| {
            modular_obstruction(&spec, m)
                .map(|verdict| ObstructionRow { modulus: m, verdict })
                .map_err(|e| CliError::Invalid(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let secant = match secant {
        None => None,
        Some(s) => {
            let base = parse_rational_list(&s.base).map_err(|e| CliError::Invalid(format!("--secant-base: {e}")))?;
            let dir = parse_rational_list(&s.direction)
                .map_err(|e| CliError::Invalid(format!("--secant-direction: {e}")))?;
            Some(
                secant_family(&spec, &EllipsoidPoint::new(base), &dir, s.count)
                    .map_err(|e| CliError::Invalid(e.to_string()))?,
            )
        }
    };
    Ok(EllipsoidOutput {
        schema: SCHEMA,
        command: "ellipsoid",
        count: search.points.len(),
        dims,
        bound,
        points: search.points,
        with_zero_coordinate: search.with_zero_coordinate,
        obstructed: obstructions
            .iter()
            .any(|o| o.verdict == ObstructionVerdict::Obstructed),
        obstructions,
        secant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compatibility_failures_map_to_exit_three() {
        for e in [
            RecursionError::Incompatible { step: 2 },
            RecursionError::ConstraintResidual {
                exponent: int(0),
                value: int(1),
            },
            RecursionError::NotAffine,
            RecursionError::Degenerate,
        ] {
            assert!(matches!(recursion_error(e), CliError::Compatibility(_)));
        }
    }

    #[test]
    fn other_recursion_errors_are_invalid_input() {
        for e in [
            RecursionError::UnboundParameter("b0".into()),
            RecursionError::NoTopResonance,
            RecursionError::NoConstantTerm,
        ] {
            assert!(matches!(recursion_error(e), CliError::Invalid(_)));
        }
    }
}
