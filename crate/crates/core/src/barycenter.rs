//! Finitely supported measures, the variance functional and barycenters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::linalg::scale;
use crate::space::{ModelSpace, Point, TangentVector};

/// Allowed deviation of the total mass from 1.
pub const MASS_TOL: f64 = 1e-12;

/// A probability measure with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteMeasure {
    pub space: ModelSpace,
    #[serde(rename = "points")]
    support: Vec<Point>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasure {
    space: ModelSpace,
    points: Vec<Point>,
    weights: Option<Vec<f64>>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = GeoError;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        match raw.weights {
            Some(w) => DiscreteMeasure::new(raw.space, raw.points, w),
            None => DiscreteMeasure::uniform(raw.space, raw.points),
        }
    }
}

impl DiscreteMeasure {
    pub fn new(space: ModelSpace, support: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(GeoError::InvalidArgument("measure has empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(GeoError::InvalidArgument(format!(
                "{} points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(GeoError::InvalidArgument(format!("weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(GeoError::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        for p in &support {
            space.check_point(p)?;
        }
        Ok(DiscreteMeasure {
            space,
            support,
            weights,
        })
    }

    pub fn uniform(space: ModelSpace, support: Vec<Point>) -> Result<Self> {
        let n = support.len().max(1);
        Self::new(space, support, vec![1.0 / n as f64; n])
    }

    /// Rescales positive `raw` weights to total mass 1.
    pub fn normalized(space: ModelSpace, support: Vec<Point>, raw: Vec<f64>) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(GeoError::InvalidArgument("weights must have positive total".into()));
        }
        Self::new(space, support, raw.into_iter().map(|w| w / total).collect())
    }

    pub fn dirac(space: ModelSpace, point: Point) -> Result<Self> {
        Self::new(space, vec![point], vec![1.0])
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.support.iter().zip(self.weights.iter().copied())
    }

    /// `sum_i w_i g(x_i)`.
    pub fn integrate<G: FnMut(&Point) -> Result<f64>>(&self, mut g: G) -> Result<f64> {
        self.iter().map(|(x, w)| Ok(w * g(x)?)).sum()
    }

    /// Largest pairwise distance in the support.
    pub fn support_diameter(&self) -> Result<f64> {
        let mut d: f64 = 0.0;
        for (i, a) in self.support.iter().enumerate() {
            for b in &self.support[i + 1..] {
                d = d.max(self.space.distance(a, b)?);
            }
        }
        Ok(d)
    }
}

/// `V(x) = sum_i w_i d^2(x, x_i)`.
pub fn variance(mu: &DiscreteMeasure, x: &Point) -> Result<f64> {
    mu.integrate(|y| {
        let d = mu.space.distance(x, y)?;
        Ok(d * d)
    })
}

/// `sum_i w_i log_x(x_i)`, the negative half-gradient of the variance.
pub fn mean_log(mu: &DiscreteMeasure, x: &Point) -> Result<TangentVector> {
    let space = mu.space;
    space.check_point(x)?;
    let mut m = vec![0.0; space.ambient_dim()];
    for (y, w) in mu.iter() {
        let l = space.log_unchecked(&x.coords, &y.coords)?;
        for (mi, li) in m.iter_mut().zip(&l) {
            *mi += w * li;
        }
    }
    Ok(TangentVector::new(x.clone(), m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BarycenterOptions {
    /// Starting point; defaults to the support point of least variance.
    pub x0: Option<Point>,
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Random probes for the first-order audit of the result.
    pub audit_probes: usize,
    pub audit_seed: u64,
    /// Keep `V(x_k)` for every iterate.
    pub record_trace: bool,
}

impl Default for BarycenterOptions {
    fn default() -> Self {
        BarycenterOptions {
            x0: None,
            step: 1.0,
            tol: 1e-10,
            max_iter: 10_000,
            audit_probes: 64,
            audit_seed: 0,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarycenterResult {
    pub point: Point,
    pub variance_at_point: f64,
    pub iterations: usize,
    /// `|sum_i w_i log_x(x_i)|` at the returned point.
    pub residual: f64,
    /// Worst probed `|sum_i w_i <log_x(x_i), u>|` over unit `u`.
    pub first_order_report: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub variance_trace: Vec<f64>,
}

/// Rejects spherical supports that cannot sit inside a ball of radius
/// `D/4` (diameter at least `D/2`).
fn check_safe_zone(mu: &DiscreteMeasure) -> Result<()> {
    if let ModelSpace::Sphere { .. } = mu.space {
        let diam = mu.support_diameter()?;
        let limit = 0.5 * mu.space.diameter();
        if diam >= limit {
            return Err(GeoError::SafeZone(format!(
                "support diameter {diam} is not below {limit}"
            )));
        }
    }
    Ok(())
}

/// Fixed-point iteration `x <- exp_x(step * sum_i w_i log_x(x_i))`.
///
/// Returns a critical point of the variance; for supports inside the safe
/// zone this is the unique minimizer.
pub fn solve_barycenter(mu: &DiscreteMeasure, opts: &BarycenterOptions) -> Result<BarycenterResult> {
    let space = mu.space;
    check_safe_zone(mu)?;
    if !(opts.step > 0.0 && opts.tol > 0.0) {
        return Err(GeoError::InvalidArgument("step and tol must be positive".into()));
    }
    let mut x = match &opts.x0 {
        Some(p) => {
            space.check_point(p)?;
            p.clone()
        }
        None => {
            let mut best = (f64::INFINITY, 0);
            for (i, y) in mu.support().iter().enumerate() {
                let v = variance(mu, y)?;
                if v < best.0 {
                    best = (v, i);
                }
            }
            mu.support()[best.1].clone()
        }
    };
    let far = 0.5 * space.diameter();
    let mut trace = Vec::new();
    for k in 0..=opts.max_iter {
        let m = mean_log(mu, &x)?;
        let residual = space.tangent_norm(&m.vector);
        if opts.record_trace {
            trace.push(variance(mu, &x)?);
        }
        if residual <= opts.tol {
            let first_order_report = first_order_audit(mu, &x, opts.audit_probes, opts.audit_seed)?;
            return Ok(BarycenterResult {
                variance_at_point: variance(mu, &x)?,
                point: x,
                iterations: k,
                residual,
                first_order_report,
                variance_trace: trace,
            });
        }
        if k == opts.max_iter {
            return Err(GeoError::MaxIterations {
                iterations: k,
                residual,
            });
        }
        x = space.exp_at(&x, &scale(&m.vector, opts.step))?;
        if far.is_finite() {
            for y in mu.support() {
                if space.distance(&x, y)? >= far {
                    return Err(GeoError::SafeZone(
                        "iterate drifted half a diameter away from the support".into(),
                    ));
                }
            }
        }
    }
    unreachable!("loop returns on the last iteration")
}

/// Largest `|sum_i w_i <log_x(x_i), u>_x|` over `probes` random unit `u` and
/// the `+-` vectors of an orthonormal frame of `T_x`.
pub fn first_order_audit(mu: &DiscreteMeasure, x: &Point, probes: usize, seed: u64) -> Result<f64> {
    let space = mu.space;
    space.check_point(x)?;
    let logs: Vec<Vec<f64>> = mu
        .support()
        .iter()
        .map(|y| space.log_unchecked(&x.coords, &y.coords))
        .collect::<Result<_>>()?;
    let probe = |u: &[f64]| -> f64 {
        logs.iter()
            .zip(mu.weights())
            .map(|(l, w)| w * space.inner(l, u))
            .sum::<f64>()
            .abs()
    };
    let mut worst: f64 = 0.0;
    for e in space.tangent_basis(x) {
        worst = worst.max(probe(&e));
        let neg: Vec<f64> = e.iter().map(|v| -v).collect();
        worst = worst.max(probe(&neg));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        let u = space.random_unit_tangent(x, &mut rng);
        worst = worst.max(probe(&u));
    }
    Ok(worst)
}

/// Euclidean weighted mean, as a reference.
pub fn weighted_mean(mu: &DiscreteMeasure) -> Vec<f64> {
    let n = mu.space.ambient_dim();
    let mut m = vec![0.0; n];
    for (y, w) in mu.iter() {
        for (mi, yi) in m.iter_mut().zip(&y.coords) {
            *mi += w * yi;
        }
    }
    m
}
