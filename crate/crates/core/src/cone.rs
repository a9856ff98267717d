//! Tangent cone arithmetic.
//!
//! On model spaces a tangent vector is stored as an ambient vector, so the
//! cone inner product `<u, v>_p = s t cos(angle)` is the Riemannian one.
//! [`ConePoint`] and [`cone_distance`] describe the Euclidean cone over an
//! abstract space of directions and are usable without any manifold.
//!
//! The limits along pairs of geodesics are evaluated on the diagonal
//! `s = t = t0 2^-k` and Richardson-extrapolated; see [`crate::limits`].

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::comparison::comparison_angle;
use crate::error::{GeoError, Result};
use crate::limits::{extrapolate_to_zero, LimitOptions};
use crate::space::{Geodesic, ModelSpace, Point, TangentVector};

/// An element `[direction, radius]` of a Euclidean cone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConePoint<L> {
    pub direction: L,
    pub radius: f64,
}

impl<L> ConePoint<L> {
    pub fn new(direction: L, radius: f64) -> Self {
        ConePoint { direction, radius }
    }

    pub fn is_tip(&self) -> bool {
        self.radius == 0.0
    }
}

/// All tips are identified regardless of direction.
impl<L: PartialEq> PartialEq for ConePoint<L> {
    fn eq(&self, other: &Self) -> bool {
        (self.is_tip() && other.is_tip())
            || (self.radius == other.radius && self.direction == other.direction)
    }
}

/// `sqrt(s^2 - 2 s t cos(angle) + t^2)` for radii `s`, `t` and the angular
/// distance between their directions.
pub fn cone_distance<L>(a: &ConePoint<L>, b: &ConePoint<L>, angular_distance: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&angular_distance) {
        return Err(GeoError::InvalidArgument(format!(
            "angular distance {angular_distance} outside [0, pi]"
        )));
    }
    let (s, t) = (a.radius, b.radius);
    if !(s >= 0.0 && t >= 0.0) {
        return Err(GeoError::InvalidArgument("cone radii must be nonnegative".into()));
    }
    // (s - t)^2 + 4 s t sin^2(angle / 2) avoids cancellation near angle 0.
    let h = (0.5 * angular_distance).sin();
    Ok(((s - t) * (s - t) + 4.0 * s * t * h * h).sqrt())
}

fn same_base(a: &Point, b: &Point) -> bool {
    a.coords.len() == b.coords.len()
        && a.coords
            .iter()
            .zip(&b.coords)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0))
}

/// `<u, v>_p`.
pub fn inner_product(space: &ModelSpace, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if !same_base(&u.base, &v.base) {
        return Err(GeoError::BaseMismatch);
    }
    space.check_tangent(u)?;
    space.check_tangent(v)?;
    Ok(space.inner(&u.vector, &v.vector))
}

/// `|u|_p`, the distance from `u` to the tip.
pub fn norm(space: &ModelSpace, u: &TangentVector) -> Result<f64> {
    space.check_tangent(u)?;
    Ok(space.tangent_norm(&u.vector))
}

/// `|u - v|_p = sqrt(|u|^2 - 2<u,v> + |v|^2)`.
pub fn tangent_distance(space: &ModelSpace, u: &TangentVector, v: &TangentVector) -> Result<f64> {
    let uv = inner_product(space, u, v)?;
    let q = space.inner(&u.vector, &u.vector) - 2.0 * uv + space.inner(&v.vector, &v.vector);
    Ok(q.max(0.0).sqrt())
}

fn common_domain(g1: &Geodesic, g2: &Geodesic) -> Result<LimitOptions> {
    if g1.space() != g2.space() {
        return Err(GeoError::SpaceMismatch("geodesics live in different spaces".into()));
    }
    if !same_base(g1.base(), g2.base()) {
        return Err(GeoError::BaseMismatch);
    }
    Ok(LimitOptions::for_domain(g1.tau().min(g2.tau())))
}

fn nontrivial(g: &Geodesic) -> Result<()> {
    if g.speed() == 0.0 {
        return Err(GeoError::Degenerate("constant geodesic has no direction".into()));
    }
    Ok(())
}

/// Angle at the common base point, as the limit of Euclidean comparison
/// angles `angle~0_p(g1(t), g2(t))`.
pub fn angle_between_geodesics(g1: &Geodesic, g2: &Geodesic) -> Result<f64> {
    let opts = common_domain(g1, g2)?;
    nontrivial(g1)?;
    nontrivial(g2)?;
    let space = *g1.space();
    let p = g1.base();
    let est = extrapolate_to_zero(
        |t| {
            let x = g1.at(t)?;
            let y = g2.at(t)?;
            let a = space.distance(p, &x)?;
            let b = space.distance(p, &y)?;
            let c = space.distance(&x, &y)?;
            comparison_angle(0.0, a, b, c)?
                .ok_or_else(|| GeoError::Degenerate("flat comparison angle undefined".into()))
        },
        &opts,
    )?;
    Ok(est.value.clamp(0.0, PI))
}

/// `lim d(g1(t), g2(t)) / t`.
pub fn geodesic_separation_rate(g1: &Geodesic, g2: &Geodesic) -> Result<f64> {
    let opts = common_domain(g1, g2)?;
    let space = *g1.space();
    let est = extrapolate_to_zero(
        |t| Ok(space.distance(&g1.at(t)?, &g2.at(t)?)? / t),
        &opts,
    )?;
    Ok(est.value.max(0.0))
}

/// `4 lim d^2(p, m_t) / t^2` where `m_t` is the midpoint of `g1(t)`, `g2(t)`.
pub fn midpoint_limit(g1: &Geodesic, g2: &Geodesic) -> Result<f64> {
    let opts = common_domain(g1, g2)?;
    let space = *g1.space();
    let p = g1.base();
    let est = extrapolate_to_zero(
        |t| {
            let m = space.midpoint(&g1.at(t)?, &g2.at(t)?)?;
            let d = space.distance(p, &m)?;
            Ok(4.0 * d * d / (t * t))
        },
        &opts,
    )?;
    Ok(est.value.max(0.0))
}
