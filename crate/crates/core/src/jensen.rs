//! End-to-end check of `f(x*) <= sum_i w_i f(x_i) - (alpha/2) V*` for an
//! `alpha`-convex `f` and a barycenter `x*`, with a per-point diagnostic
//! based on the gradient of `-f` at `x*`.

use serde::{Deserialize, Serialize};

use crate::barycenter::{solve_barycenter, variance, BarycenterOptions, DiscreteMeasure};
use crate::error::{GeoError, Result};
use crate::semiconcave::{
    certify_alpha, gradient, CertifyOptions, Certification, Convexity, GradientOptions, Negated,
    ScalarField, ScalarFn,
};
use crate::space::{Point, TangentVector};

/// Relative slack on the gap: `gap >= -GAP_TOL (1 + |bound|)`.
pub const GAP_TOL: f64 = 1e-7;
/// Lower tolerance on each per-point residual.
pub const RESIDUAL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JensenOptions {
    pub barycenter: BarycenterOptions,
    pub certify: CertifyOptions,
    pub gradient: GradientOptions,
    /// Run the per-point linearization diagnostic.
    pub diagnostics: bool,
}

impl Default for JensenOptions {
    fn default() -> Self {
        JensenOptions {
            barycenter: BarycenterOptions::default(),
            certify: CertifyOptions::default(),
            gradient: GradientOptions::default(),
            diagnostics: true,
        }
    }
}

/// A fully instantiated problem.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub measure: DiscreteMeasure,
    pub field: ScalarField,
    pub options: JensenOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    AlphaRefuted,
    /// The pipeline raised an error; see the report's `error`.
    Failed,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::AlphaRefuted => "alpha_refuted",
            Verdict::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    pub index: usize,
    pub weight: f64,
    /// `f(x_i) + <log_{x*} x_i, grad(-f)(x*)> - (alpha/2) d^2(x*, x_i) - f(x*)`
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub residuals: Vec<PointResidual>,
    pub min_residual: f64,
    pub weighted_sum: f64,
    /// `|grad(-f)(x*)|`
    pub gradient_norm: f64,
    /// Every residual is at least `-RESIDUAL_TOL` and the weighted sum
    /// matches the gap within `RESIDUAL_TOL + audit |grad|`.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JensenReport {
    pub space: String,
    pub kappa: f64,
    pub dim: usize,
    pub field: String,
    pub alpha: f64,
    pub alpha_certified: bool,
    pub certification: Option<Certification>,
    pub barycenter: Option<Point>,
    pub f_at_barycenter: Option<f64>,
    pub integral_f: Option<f64>,
    pub variance_star: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub barycenter_iterations: Option<usize>,
    pub first_order_audit: Option<f64>,
    pub per_point_checks: Option<Diagnostic>,
    pub verdict: Verdict,
    pub error: Option<String>,
}

impl JensenReport {
    fn empty(s: &Scenario) -> Self {
        let space = s.measure.space;
        JensenReport {
            space: space.name().to_string(),
            kappa: space.kappa(),
            dim: space.dim(),
            field: s.field.name().to_string(),
            alpha: s.field.alpha_claim,
            alpha_certified: false,
            certification: None,
            barycenter: None,
            f_at_barycenter: None,
            integral_f: None,
            variance_star: None,
            bound: None,
            gap: None,
            barycenter_iterations: None,
            first_order_audit: None,
            per_point_checks: None,
            verdict: Verdict::Failed,
            error: None,
        }
    }

    /// Report for a pipeline error, keeping whatever was computed.
    pub fn failed(s: &Scenario, err: &GeoError) -> Self {
        let mut r = Self::empty(s);
        r.error = Some(err.to_string());
        r
    }
}

/// Ball around the support point of least variance covering the support.
fn covering_ball(mu: &DiscreteMeasure) -> Result<(Point, f64)> {
    let space = mu.space;
    let mut best = (f64::INFINITY, 0);
    for (i, y) in mu.support().iter().enumerate() {
        let v = variance(mu, y)?;
        if v < best.0 {
            best = (v, i);
        }
    }
    let center = mu.support()[best.1].clone();
    let mut r: f64 = 0.0;
    for y in mu.support() {
        r = r.max(space.distance(&center, y)?);
    }
    Ok((center, r))
}

/// Certify, solve, audit and compare.
pub fn jensen_check(s: &Scenario) -> Result<JensenReport> {
    let mu = &s.measure;
    let f = &s.field;
    if f.space != mu.space {
        return Err(GeoError::SpaceMismatch("field and measure live in different spaces".into()));
    }
    let alpha = f.alpha_claim;
    let mut report = JensenReport::empty(s);

    let (center, radius) = covering_ball(mu)?;
    let cert = certify_alpha(f, &center, radius, alpha, Convexity::Convex, &s.options.certify)?;
    report.alpha_certified = cert.is_certified();
    report.certification = Some(cert);
    if !report.alpha_certified {
        report.verdict = Verdict::AlphaRefuted;
        return Ok(report);
    }

    let bary = solve_barycenter(mu, &s.options.barycenter)?;
    let f_star = f.value(&bary.point)?;
    let integral = mu.integrate(|x| f.value(x))?;
    let v_star = bary.variance_at_point;
    let bound = integral - 0.5 * alpha * v_star;
    let gap = bound - f_star;
    report.barycenter = Some(bary.point.clone());
    report.f_at_barycenter = Some(f_star);
    report.integral_f = Some(integral);
    report.variance_star = Some(v_star);
    report.bound = Some(bound);
    report.gap = Some(gap);
    report.barycenter_iterations = Some(bary.iterations);
    report.first_order_audit = Some(bary.first_order_report);
    report.verdict = if gap >= -GAP_TOL * (1.0 + bound.abs()) {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    if s.options.diagnostics {
        report.per_point_checks = Some(linearization_diagnostic(s, &report)?);
    }
    Ok(report)
}

/// Residuals of the per-point inequality
/// `f(x*) <= f(x) + <log_{x*} x, grad(-f)(x*)> - (alpha/2) d^2(x*, x)`,
/// whose weighted sum reproduces the gap up to the first-order term.
pub fn linearization_diagnostic(s: &Scenario, report: &JensenReport) -> Result<Diagnostic> {
    let (x_star, f_star, gap, audit) = match (
        &report.barycenter,
        report.f_at_barycenter,
        report.gap,
        report.first_order_audit,
    ) {
        (Some(x), Some(f), Some(g), Some(a)) => (x, f, g, a),
        _ => {
            return Err(GeoError::InvalidArgument(
                "diagnostic needs a completed report".into(),
            ))
        }
    };
    let space = s.measure.space;
    let f = &s.field;
    let alpha = f.alpha_claim;
    // -f is (-alpha)-concave
    let neg = Negated(f.clone());
    let g: TangentVector = gradient(&neg, x_star, -alpha, &s.options.gradient)?.gradient;
    let gradient_norm = space.tangent_norm(&g.vector);

    let mut residuals = Vec::with_capacity(s.measure.len());
    for (i, (x, w)) in s.measure.iter().enumerate() {
        let l = space.log(x_star, x)?;
        let d = space.tangent_norm(&l.vector);
        let r = f.value(x)? + space.inner(&l.vector, &g.vector) - 0.5 * alpha * d * d - f_star;
        residuals.push(PointResidual {
            index: i,
            weight: w,
            residual: r,
        });
    }
    let weighted_sum: f64 = residuals.iter().map(|r| r.weight * r.residual).sum();
    let min_residual = residuals
        .iter()
        .map(|r| r.residual)
        .fold(f64::INFINITY, f64::min);
    let consistent = min_residual >= -RESIDUAL_TOL
        && (weighted_sum - gap).abs() <= RESIDUAL_TOL + audit * gradient_norm;
    Ok(Diagnostic {
        residuals,
        min_residual,
        weighted_sum,
        gradient_norm,
        consistent,
    })
}
