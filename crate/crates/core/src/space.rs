//! Model spaces of constant curvature and their exact geometry.
//!
//! Three families are supported, all in extrinsic coordinates so that
//! `exp` and `log` have closed forms:
//!
//! - `Euclidean { dim }`: `R^dim`, curvature 0.
//! - `Sphere { dim, kappa }`: the sphere of radius `1/sqrt(kappa)` in
//!   `R^(dim+1)`.
//! - `Hyperbolic { dim, kappa }`: the upper sheet `<x,x>_M = 1/kappa`,
//!   `x0 > 0`, of the hyperboloid in Minkowski space `R^(1,dim)`.
//!
//! Tangent vectors are ambient vectors orthogonal to their base point
//! (Euclidean orthogonality on spheres, Minkowski orthogonality on the
//! hyperboloid). Finite metric spaces live in [`crate::finite`].

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::linalg::{add, dot, lincomb, minkowski, norm, scale, sub};

/// Tolerance for on-manifold and tangency checks.
pub const MANIFOLD_TOL: f64 = 1e-10;

/// Anything with a distance function.
pub trait Metric {
    type Point;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64>;
}

/// A simply connected space form, described by its kind, intrinsic
/// dimension and curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawSpace")]
pub enum ModelSpace {
    Euclidean { dim: usize },
    Sphere { dim: usize, kappa: f64 },
    Hyperbolic { dim: usize, kappa: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawSpace {
    Euclidean {
        dim: usize,
        #[serde(default)]
        kappa: Option<f64>,
    },
    Sphere {
        dim: usize,
        kappa: f64,
    },
    Hyperbolic {
        dim: usize,
        kappa: f64,
    },
}

impl TryFrom<RawSpace> for ModelSpace {
    type Error = GeoError;

    fn try_from(raw: RawSpace) -> Result<Self> {
        match raw {
            RawSpace::Euclidean { dim, kappa } => {
                if let Some(k) = kappa {
                    if k != 0.0 {
                        return Err(GeoError::InvalidSpace(format!(
                            "euclidean space requires kappa = 0, got {k}"
                        )));
                    }
                }
                ModelSpace::euclidean(dim)
            }
            RawSpace::Sphere { dim, kappa } => ModelSpace::sphere(dim, kappa),
            RawSpace::Hyperbolic { dim, kappa } => ModelSpace::hyperbolic(dim, kappa),
        }
    }
}

/// A point given by its ambient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

/// A tangent vector: an ambient vector together with its base point.
///
/// The zero vector is the tip `0_p` of the tangent cone at `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: Point,
    pub vector: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: Point, vector: Vec<f64>) -> Self {
        TangentVector { base, vector }
    }

    /// The cone tip `0_p`.
    pub fn tip(base: &Point) -> Self {
        TangentVector {
            vector: vec![0.0; base.coords.len()],
            base: base.clone(),
        }
    }

    pub fn is_tip(&self) -> bool {
        self.vector.iter().all(|&x| x == 0.0)
    }

    /// Positive scaling `lambda u`.
    pub fn scaled(&self, lambda: f64) -> Self {
        TangentVector {
            base: self.base.clone(),
            vector: scale(&self.vector, lambda),
        }
    }
}

/// Constant-speed geodesic `t -> exp_base(t * velocity)` on `[0, tau]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    space: ModelSpace,
    base: Point,
    velocity: Vec<f64>,
    tau: f64,
}

impl ModelSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GeoError::InvalidSpace("dimension must be positive".into()));
        }
        Ok(ModelSpace::Euclidean { dim })
    }

    pub fn sphere(dim: usize, kappa: f64) -> Result<Self> {
        if dim == 0 {
            return Err(GeoError::InvalidSpace("dimension must be positive".into()));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(GeoError::InvalidSpace(format!(
                "sphere requires kappa > 0, got {kappa}"
            )));
        }
        Ok(ModelSpace::Sphere { dim, kappa })
    }

    pub fn hyperbolic(dim: usize, kappa: f64) -> Result<Self> {
        if dim == 0 {
            return Err(GeoError::InvalidSpace("dimension must be positive".into()));
        }
        if !(kappa < 0.0 && kappa.is_finite()) {
            return Err(GeoError::InvalidSpace(format!(
                "hyperbolic space requires kappa < 0, got {kappa}"
            )));
        }
        Ok(ModelSpace::Hyperbolic { dim, kappa })
    }

    /// Space form of curvature `kappa` and the given dimension.
    pub fn with_curvature(dim: usize, kappa: f64) -> Result<Self> {
        if kappa > 0.0 {
            Self::sphere(dim, kappa)
        } else if kappa < 0.0 {
            Self::hyperbolic(dim, kappa)
        } else {
            Self::euclidean(dim)
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ModelSpace::Euclidean { dim }
            | ModelSpace::Sphere { dim, .. }
            | ModelSpace::Hyperbolic { dim, .. } => dim,
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            ModelSpace::Euclidean { .. } => 0.0,
            ModelSpace::Sphere { kappa, .. } | ModelSpace::Hyperbolic { kappa, .. } => kappa,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpace::Euclidean { .. } => "euclidean",
            ModelSpace::Sphere { .. } => "sphere",
            ModelSpace::Hyperbolic { .. } => "hyperbolic",
        }
    }

    /// Length of coordinate vectors.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ModelSpace::Euclidean { dim } => dim,
            ModelSpace::Sphere { dim, .. } | ModelSpace::Hyperbolic { dim, .. } => dim + 1,
        }
    }

    /// `D_kappa`: `pi / sqrt(kappa)` on spheres, infinite otherwise.
    pub fn diameter(&self) -> f64 {
        diameter(self.kappa())
    }

    /// Radius of curvature `1 / sqrt(|kappa|)` (infinite when flat).
    fn radius(&self) -> f64 {
        match *self {
            ModelSpace::Euclidean { .. } => f64::INFINITY,
            ModelSpace::Sphere { kappa, .. } => 1.0 / kappa.sqrt(),
            ModelSpace::Hyperbolic { kappa, .. } => 1.0 / (-kappa).sqrt(),
        }
    }

    /// Canonical base point: the origin, or `(R, 0, ..., 0)`.
    pub fn origin(&self) -> Point {
        let mut c = vec![0.0; self.ambient_dim()];
        if !matches!(self, ModelSpace::Euclidean { .. }) {
            c[0] = self.radius();
        }
        Point::new(c)
    }

    /// Validates coordinates and wraps them as a point.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        let p = Point::new(coords);
        self.check_point(&p)?;
        Ok(p)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        let c = &p.coords;
        if c.len() != self.ambient_dim() {
            return Err(GeoError::SpaceMismatch(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(GeoError::OffManifold("non-finite coordinate".into()));
        }
        match *self {
            ModelSpace::Euclidean { .. } => Ok(()),
            ModelSpace::Sphere { kappa, .. } => {
                let n2 = dot(c, c);
                let target = 1.0 / kappa;
                if (n2 - target).abs() > MANIFOLD_TOL * target.max(1.0) {
                    return Err(GeoError::OffManifold(format!(
                        "|x|^2 = {n2}, expected {target}"
                    )));
                }
                Ok(())
            }
            ModelSpace::Hyperbolic { kappa, .. } => {
                let m = minkowski(c, c);
                let target = 1.0 / kappa;
                let scale = dot(c, c).max(1.0);
                if (m - target).abs() > MANIFOLD_TOL * scale || c[0] <= 0.0 {
                    return Err(GeoError::OffManifold(format!(
                        "<x,x>_M = {m}, expected {target} on the upper sheet"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Pulls coordinates back onto the manifold after rounding drift.
    pub fn renormalize(&self, c: &mut [f64]) {
        match *self {
            ModelSpace::Euclidean { .. } => {}
            ModelSpace::Sphere { .. } => {
                let n = norm(c);
                if n > 0.0 {
                    let s = self.radius() / n;
                    c.iter_mut().for_each(|x| *x *= s);
                }
            }
            ModelSpace::Hyperbolic { .. } => {
                let r = self.radius();
                c[0] = (r * r + dot(&c[1..], &c[1..])).sqrt();
            }
        }
    }

    /// Riemannian inner product of two ambient tangent vectors.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            ModelSpace::Hyperbolic { .. } => minkowski(u, v),
            _ => dot(u, v),
        }
    }

    pub fn tangent_norm(&self, v: &[f64]) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// Orthogonal projection of an ambient vector onto `T_p`.
    pub fn project_tangent(&self, p: &Point, v: &[f64]) -> Vec<f64> {
        match *self {
            ModelSpace::Euclidean { .. } => v.to_vec(),
            ModelSpace::Sphere { kappa, .. } => {
                let c = dot(v, &p.coords) * kappa;
                lincomb(1.0, v, -c, &p.coords)
            }
            ModelSpace::Hyperbolic { kappa, .. } => {
                // <p,p>_M = 1/kappa
                let c = minkowski(v, &p.coords) * kappa;
                lincomb(1.0, v, -c, &p.coords)
            }
        }
    }

    pub fn check_tangent(&self, v: &TangentVector) -> Result<()> {
        self.check_point(&v.base)?;
        if v.vector.len() != self.ambient_dim() {
            return Err(GeoError::SpaceMismatch(format!(
                "tangent vector has {} components, expected {}",
                v.vector.len(),
                self.ambient_dim()
            )));
        }
        let defect = match self {
            ModelSpace::Euclidean { .. } => 0.0,
            ModelSpace::Sphere { .. } => dot(&v.vector, &v.base.coords),
            ModelSpace::Hyperbolic { .. } => minkowski(&v.vector, &v.base.coords),
        };
        let scale = norm(&v.vector).max(1.0) * norm(&v.base.coords).max(1.0);
        if defect.abs() > MANIFOLD_TOL * scale {
            return Err(GeoError::OffManifold(format!(
                "vector is not tangent at its base (defect {defect:e})"
            )));
        }
        Ok(())
    }

    fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            ModelSpace::Euclidean { .. } => norm(&sub(a, b)),
            ModelSpace::Sphere { .. } => {
                // Chord form of arccos(kappa <a,b>): 2 asin(|a-b| / 2R) for
                // acute pairs, pi - 2 asin(|a+b| / 2R) for obtuse ones.
                let r = self.radius();
                let chord = norm(&sub(a, b)) / r;
                let theta = if chord <= std::f64::consts::SQRT_2 {
                    2.0 * (0.5 * chord).min(1.0).asin()
                } else {
                    let anti = norm(&add(a, b)) / r;
                    std::f64::consts::PI - 2.0 * (0.5 * anti).min(1.0).asin()
                };
                r * theta
            }
            ModelSpace::Hyperbolic { .. } => {
                // <a-b, a-b>_M = 4 R^2 sinh^2(d / 2R), exact form of
                // R arccosh(-kappa <a,b>_M) without cancellation.
                let r = self.radius();
                let diff = sub(a, b);
                let q = minkowski(&diff, &diff).max(0.0);
                2.0 * r * (q.sqrt() / (2.0 * r)).asinh()
            }
        }
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.distance_unchecked(&a.coords, &b.coords))
    }

    /// `exp_p(v)`; errors on spheres when `|v| >= D_kappa`.
    pub fn exp_at(&self, p: &Point, v: &[f64]) -> Result<Point> {
        if v.len() != self.ambient_dim() || p.coords.len() != self.ambient_dim() {
            return Err(GeoError::SpaceMismatch("dimension mismatch in exp".into()));
        }
        let n = self.tangent_norm(v);
        let mut out = match *self {
            ModelSpace::Euclidean { .. } => add(&p.coords, v),
            ModelSpace::Sphere { .. } => {
                let d = self.diameter();
                if n >= d {
                    return Err(GeoError::BeyondConjugate { norm: n, diameter: d });
                }
                if n == 0.0 {
                    return Ok(p.clone());
                }
                let r = self.radius();
                let th = n / r;
                lincomb(th.cos(), &p.coords, r * th.sin() / n, v)
            }
            ModelSpace::Hyperbolic { .. } => {
                if n == 0.0 {
                    return Ok(p.clone());
                }
                let r = self.radius();
                let th = n / r;
                lincomb(th.cosh(), &p.coords, r * th.sinh() / n, v)
            }
        };
        self.renormalize(&mut out);
        Ok(Point::new(out))
    }

    pub fn exp(&self, v: &TangentVector) -> Result<Point> {
        self.check_tangent(v)?;
        self.exp_at(&v.base, &v.vector)
    }

    /// `log_p(x)`: initial velocity of the unit-time geodesic from `p` to `x`.
    pub fn log(&self, p: &Point, x: &Point) -> Result<TangentVector> {
        self.check_point(p)?;
        self.check_point(x)?;
        let v = self.log_unchecked(&p.coords, &x.coords)?;
        Ok(TangentVector::new(p.clone(), v))
    }

    pub(crate) fn log_unchecked(&self, p: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let delta = sub(x, p);
        match *self {
            ModelSpace::Euclidean { .. } => Ok(delta),
            ModelSpace::Sphere { kappa, .. } => {
                let d = self.distance_unchecked(p, x);
                if d == 0.0 {
                    return Ok(vec![0.0; p.len()]);
                }
                let diam = self.diameter();
                if diam - d <= 1e-10 * diam {
                    return Err(GeoError::Antipodal { distance: d, diameter: diam });
                }
                // component of x - p orthogonal to p
                let c = dot(&delta, p) * kappa;
                let u = lincomb(1.0, &delta, -c, p);
                let un = norm(&u);
                if un == 0.0 {
                    return Err(GeoError::Antipodal { distance: d, diameter: diam });
                }
                Ok(scale(&u, d / un))
            }
            ModelSpace::Hyperbolic { kappa, .. } => {
                let d = self.distance_unchecked(p, x);
                if d == 0.0 {
                    return Ok(vec![0.0; p.len()]);
                }
                let c = minkowski(&delta, p) * kappa;
                let u = lincomb(1.0, &delta, -c, p);
                let un = minkowski(&u, &u).max(0.0).sqrt();
                if un == 0.0 {
                    return Ok(vec![0.0; p.len()]);
                }
                Ok(scale(&u, d / un))
            }
        }
    }

    /// Geodesic midpoint of `a` and `b`.
    pub fn midpoint(&self, a: &Point, b: &Point) -> Result<Point> {
        let v = self.log(a, b)?;
        self.exp_at(a, &scale(&v.vector, 0.5))
    }

    /// Orthonormal basis of `T_p` (Gram-Schmidt on projected axes).
    pub fn tangent_basis(&self, p: &Point) -> Vec<Vec<f64>> {
        let n = self.ambient_dim();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.dim());
        // Project axes in order of how much of them survives the projection.
        let mut axes: Vec<(f64, Vec<f64>)> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let t = self.project_tangent(p, &e);
                (self.tangent_norm(&t), t)
            })
            .collect();
        axes.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (_, mut v) in axes {
            for b in &basis {
                let c = self.inner(&v, b);
                v = lincomb(1.0, &v, -c, b);
            }
            // re-orthogonalize once for stability
            for b in &basis {
                let c = self.inner(&v, b);
                v = lincomb(1.0, &v, -c, b);
            }
            let vn = self.tangent_norm(&v);
            if vn > 1e-6 {
                basis.push(scale(&v, 1.0 / vn));
            }
            if basis.len() == self.dim() {
                break;
            }
        }
        basis
    }

    /// Uniformly distributed unit tangent vector at `p`.
    pub fn random_unit_tangent<R: Rng + ?Sized>(&self, p: &Point, rng: &mut R) -> Vec<f64> {
        let basis = self.tangent_basis(p);
        loop {
            let coeffs: Vec<f64> = (0..basis.len()).map(|_| rng.sample(StandardNormal)).collect();
            let n = norm(&coeffs);
            if n > 1e-12 {
                let mut v = vec![0.0; self.ambient_dim()];
                for (c, b) in coeffs.iter().zip(&basis) {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi += c / n * bi;
                    }
                }
                return v;
            }
        }
    }

    /// Random point in the geodesic ball `B(center, radius)`, uniform in
    /// geodesic polar coordinates with radial density `r^(dim-1)`.
    pub fn random_point_in_ball<R: Rng + ?Sized>(
        &self,
        center: &Point,
        radius: f64,
        rng: &mut R,
    ) -> Result<Point> {
        if !(radius >= 0.0) || radius >= self.diameter() {
            return Err(GeoError::InvalidArgument(format!(
                "ball radius {radius} must lie in [0, D_kappa)"
            )));
        }
        let u = self.random_unit_tangent(center, rng);
        let s: f64 = rng.random();
        let r = radius * s.powf(1.0 / self.dim() as f64);
        self.exp_at(center, &scale(&u, r))
    }
}

impl Metric for ModelSpace {
    type Point = Point;

    fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        ModelSpace::distance(self, a, b)
    }
}

/// `D_kappa` for an arbitrary curvature.
pub fn diameter(kappa: f64) -> f64 {
    if kappa > 0.0 {
        std::f64::consts::PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

impl Geodesic {
    /// Geodesic with initial velocity `velocity` on `[0, tau]`.
    pub fn new(space: ModelSpace, velocity: TangentVector, tau: f64) -> Result<Self> {
        space.check_tangent(&velocity)?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(GeoError::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        let length = space.tangent_norm(&velocity.vector) * tau;
        let diam = space.diameter();
        if length >= diam {
            return Err(GeoError::BeyondConjugate { norm: length, diameter: diam });
        }
        Ok(Geodesic {
            space,
            base: velocity.base,
            velocity: velocity.vector,
            tau,
        })
    }

    /// The geodesic `[0, 1] -> M` from `a` to `b`.
    pub fn between(space: ModelSpace, a: &Point, b: &Point) -> Result<Self> {
        let v = space.log(a, b)?;
        Geodesic::new(space, v, 1.0)
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn initial_tangent(&self) -> TangentVector {
        TangentVector::new(self.base.clone(), self.velocity.clone())
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Metric speed `|gamma'|`.
    pub fn speed(&self) -> f64 {
        self.space.tangent_norm(&self.velocity)
    }

    pub fn length(&self) -> f64 {
        self.speed() * self.tau
    }

    /// `gamma(t)` for `t` in `[0, tau]`.
    pub fn at(&self, t: f64) -> Result<Point> {
        if !(0.0..=self.tau).contains(&t) {
            return Err(GeoError::OutsideDomain { t, tau: self.tau });
        }
        self.space.exp_at(&self.base, &scale(&self.velocity, t))
    }

    pub fn endpoint(&self) -> Result<Point> {
        self.at(self.tau)
    }

    /// Same path traversed `lambda` times faster (domain `[0, tau/lambda]`).
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(GeoError::InvalidArgument("speed factor must be positive".into()));
        }
        Ok(Geodesic {
            space: self.space,
            base: self.base.clone(),
            velocity: scale(&self.velocity, lambda),
            tau: self.tau / lambda,
        })
    }
}

/// Polyline length of an ordered sample of points: a lower bound for the
/// length of any path through them.
pub fn path_length<M: Metric>(space: &M, samples: &[M::Point]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(GeoError::InvalidArgument(
            "path length needs at least two points".into(),
        ));
    }
    samples
        .windows(2)
        .map(|w| space.distance(&w[0], &w[1]))
        .sum()
}
