//! Comparison geometry against the model plane `M^2_kappa`.
//!
//! Comparison angles are computed from the half-angle form of the
//! `kappa`-law of cosines,
//!
//! ```text
//! sin^2(C/2) s(a) s(b) = s(c/2)^2 - s((a-b)/2)^2
//! cos^2(C/2) s(a) s(b) = s((a+b)/2)^2 - s(c/2)^2
//! ```
//!
//! with `s = s_kappa`. Both right-hand sides factor through
//! `s(x) - s(y) = 2 c((x+y)/2) s((x-y)/2)`, so the degenerate factors
//! `c - |a-b|` and `a + b - c` are taken straight from the side lengths.
//! This is algebraically the same angle as
//! `cos C = (c(c) - c(a) c(b)) / (kappa s(a) s(b))` but keeps full precision
//! for angles near `0` and `pi` and is continuous through `kappa = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{GeoError, Result};
use crate::space::{diameter, Geodesic, Metric, ModelSpace, Point};

/// Absolute slack on the angle sum in the four-point condition.
pub const ANGLE_SUM_TOL: f64 = 1e-9;

/// Slack for [`side_comparison_check`].
pub const SIDE_TOL: f64 = 1e-9;

/// Relative slack on triangle inequalities for measured side lengths.
const TRIANGLE_SLACK: f64 = 1e-12;

/// `s_kappa(r)`: `sin(r sqrt k)/sqrt k`, `sinh(r sqrt -k)/sqrt -k`, or `r`.
pub fn s_kappa(kappa: f64, r: f64) -> f64 {
    if kappa > 0.0 {
        let k = kappa.sqrt();
        (r * k).sin() / k
    } else if kappa < 0.0 {
        let k = (-kappa).sqrt();
        (r * k).sinh() / k
    } else {
        r
    }
}

/// `c_kappa(r) = s_kappa'(r)`.
pub fn c_kappa(kappa: f64, r: f64) -> f64 {
    if kappa > 0.0 {
        (r * kappa.sqrt()).cos()
    } else if kappa < 0.0 {
        (r * (-kappa).sqrt()).cosh()
    } else {
        1.0
    }
}

/// `s(x)^2 - s(y)^2` in product form.
fn s_sq_diff(kappa: f64, x: f64, y: f64, x_minus_y: f64) -> f64 {
    let diff = 2.0 * c_kappa(kappa, 0.5 * (x + y)) * s_kappa(kappa, 0.5 * x_minus_y);
    diff * (s_kappa(kappa, x) + s_kappa(kappa, y))
}

fn check_triangle(a: f64, b: f64, c: f64) -> Result<()> {
    if [a, b, c].iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(GeoError::InvalidArgument(format!(
            "side lengths must be finite and nonnegative: ({a}, {b}, {c})"
        )));
    }
    let slack = TRIANGLE_SLACK * (a + b + c);
    if c > a + b + slack || a > b + c + slack || b > a + c + slack {
        return Err(GeoError::TriangleInequality(a, b, c));
    }
    Ok(())
}

/// Comparison angle at `p` for sides `d(p,x)`, `d(p,y)`, `d(x,y)`.
///
/// `Ok(None)` when the perimeter is at least `2 D_kappa`.
pub fn comparison_angle(kappa: f64, dpx: f64, dpy: f64, dxy: f64) -> Result<Option<f64>> {
    check_triangle(dpx, dpy, dxy)?;
    if dpx == 0.0 || dpy == 0.0 {
        return Err(GeoError::Degenerate(
            "comparison angle needs p distinct from x and y".into(),
        ));
    }
    if dpx + dpy + dxy >= 2.0 * diameter(kappa) {
        return Ok(None);
    }
    Ok(Some(half_angle_form(kappa, dpx, dpy, dxy)))
}

fn half_angle_form(kappa: f64, a: f64, b: f64, c: f64) -> f64 {
    let ab = (a - b).abs();
    let sin_part = s_sq_diff(kappa, 0.5 * c, 0.5 * ab, 0.5 * (c - ab)).max(0.0);
    let cos_part = s_sq_diff(kappa, 0.5 * (a + b), 0.5 * c, 0.5 * (a + b - c)).max(0.0);
    2.0 * sin_part.sqrt().atan2(cos_part.sqrt())
}

/// Isometric copy of a triangle in the model plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTriangle {
    pub kappa: f64,
    /// `(d(p,x), d(p,y), d(x,y))`
    pub sides: [f64; 3],
    /// `(p, x, y)` in the model plane.
    pub vertices: [Point; 3],
    pub plane: ModelSpace,
}

/// Realizes side lengths `(d(p,x), d(p,y), d(x,y))` in `M^2_kappa`.
pub fn build_comparison_triangle(kappa: f64, sides: [f64; 3]) -> Result<ComparisonTriangle> {
    let [a, b, c] = sides;
    check_triangle(a, b, c)?;
    let diam = diameter(kappa);
    if a + b + c >= 2.0 * diam {
        return Err(GeoError::PerimeterTooLarge {
            perimeter: a + b + c,
            diameter: diam,
        });
    }
    let plane = ModelSpace::with_curvature(2, kappa)?;
    let p = plane.origin();
    let frame = plane.tangent_basis(&p);
    let (e1, e2) = (&frame[0], &frame[1]);
    let angle = if a > 0.0 && b > 0.0 {
        half_angle_form(kappa, a, b, c)
    } else {
        0.0
    };
    let vx: Vec<f64> = e1.iter().map(|v| a * v).collect();
    let vy: Vec<f64> = e1
        .iter()
        .zip(e2)
        .map(|(u, w)| b * (angle.cos() * u + angle.sin() * w))
        .collect();
    let x = plane.exp_at(&p, &vx)?;
    let y = plane.exp_at(&p, &vy)?;
    Ok(ComparisonTriangle {
        kappa,
        sides,
        vertices: [p, x, y],
        plane,
    })
}

/// Outcome of the four-point condition at one quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FourPoint {
    Pass { angle_sum: f64 },
    Fail { angle_sum: f64, excess: f64 },
    /// Some comparison angle is undefined.
    Inconclusive,
}

impl FourPoint {
    pub fn is_fail(&self) -> bool {
        matches!(self, FourPoint::Fail { .. })
    }
}

/// Four-point condition from the six pairwise distances of `(p, x, y, z)`.
pub fn four_point_from_distances(
    kappa: f64,
    dpx: f64,
    dpy: f64,
    dpz: f64,
    dxy: f64,
    dxz: f64,
    dyz: f64,
) -> Result<FourPoint> {
    if dpx == 0.0 || dpy == 0.0 || dpz == 0.0 {
        return Err(GeoError::Degenerate("apex coincides with x, y or z".into()));
    }
    let angles = [
        comparison_angle(kappa, dpx, dpy, dxy)?,
        comparison_angle(kappa, dpx, dpz, dxz)?,
        comparison_angle(kappa, dpy, dpz, dyz)?,
    ];
    let mut sum = 0.0;
    for a in angles {
        match a {
            Some(a) => sum += a,
            None => return Ok(FourPoint::Inconclusive),
        }
    }
    if sum <= TAU + ANGLE_SUM_TOL {
        Ok(FourPoint::Pass { angle_sum: sum })
    } else {
        Ok(FourPoint::Fail {
            angle_sum: sum,
            excess: sum - TAU,
        })
    }
}

/// Checks `angle_p(x,y) + angle_p(x,z) + angle_p(y,z) <= 2 pi` at curvature
/// `kappa`.
pub fn four_point_check<M: Metric>(
    space: &M,
    kappa: f64,
    p: &M::Point,
    x: &M::Point,
    y: &M::Point,
    z: &M::Point,
) -> Result<FourPoint> {
    let d = |a: &M::Point, b: &M::Point| space.distance(a, b);
    four_point_from_distances(kappa, d(p, x)?, d(p, y)?, d(p, z)?, d(x, y)?, d(x, z)?, d(y, z)?)
}

/// Outcome of the side (point-on-sides) comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SideComparison {
    Pass { actual: f64, model: f64 },
    Fail { actual: f64, model: f64, deficit: f64 },
}

impl SideComparison {
    pub fn passed(&self) -> bool {
        matches!(self, SideComparison::Pass { .. })
    }
}

/// Compares `d(gamma_x(s), gamma_y(t))` in `space` against the same
/// quantity on a comparison triangle in `M^2_kappa`.
pub fn side_comparison_check(
    space: &ModelSpace,
    kappa: f64,
    p: &Point,
    x: &Point,
    y: &Point,
    s: f64,
    t: f64,
) -> Result<SideComparison> {
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
        return Err(GeoError::InvalidArgument(format!(
            "parameters must lie in [0, 1], got s = {s}, t = {t}"
        )));
    }
    let a = space.distance(p, x)?;
    let b = space.distance(p, y)?;
    let c = space.distance(x, y)?;
    if a == 0.0 || b == 0.0 {
        return Err(GeoError::Degenerate("p must differ from x and y".into()));
    }
    let diam = diameter(kappa);
    if a + b + c >= 2.0 * diam {
        return Err(GeoError::PerimeterTooLarge {
            perimeter: a + b + c,
            diameter: diam,
        });
    }
    let gx = Geodesic::between(*space, p, x)?;
    let gy = Geodesic::between(*space, p, y)?;
    let actual = space.distance(&gx.at(s)?, &gy.at(t)?)?;

    let tri = build_comparison_triangle(kappa, [a, b, c])?;
    let [pb, xb, yb] = &tri.vertices;
    let gxb = Geodesic::between(tri.plane, pb, xb)?;
    let gyb = Geodesic::between(tri.plane, pb, yb)?;
    let model = tri.plane.distance(&gxb.at(s)?, &gyb.at(t)?)?;

    if actual >= model - SIDE_TOL {
        Ok(SideComparison::Pass { actual, model })
    } else {
        Ok(SideComparison::Fail {
            actual,
            model,
            deficit: model - actual,
        })
    }
}

/// Quadruple search settings for [`estimate_curvature_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    /// Random quadruples per curvature candidate (sampled mode).
    pub budget: usize,
    pub seed: u64,
    /// Bisection stops once the bracket is narrower than this.
    pub resolution: f64,
    /// Samples below this size are checked exhaustively.
    pub exhaustive_below: usize,
    /// Violations kept in the report.
    pub max_reported: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            budget: 50_000,
            seed: 0,
            resolution: 1e-3,
            exhaustive_below: 15,
            max_reported: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// `[p, x, y, z]` sample indices, apex first.
    pub quadruple: [usize; 4],
    pub angle_sum: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureAuditReport {
    /// Curvature at which `violations` were recorded: the smallest failing
    /// candidate, or `kappa_hi` when nothing failed.
    pub kappa_tested: f64,
    pub quadruples_checked: usize,
    pub inconclusive: usize,
    pub violations: Vec<Violation>,
    pub violations_total: usize,
    /// Largest tested curvature with no violation.
    pub kappa_max_estimate: f64,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub candidates_evaluated: usize,
}

struct CandidateResult {
    conclusive: usize,
    inconclusive: usize,
    violations: Vec<Violation>,
}

fn evaluate_candidate(dm: &[Vec<f64>], quads: &[[usize; 4]], kappa: f64) -> Result<CandidateResult> {
    let mut out = CandidateResult {
        conclusive: 0,
        inconclusive: 0,
        violations: Vec::new(),
    };
    for &[p, x, y, z] in quads {
        let r = four_point_from_distances(
            kappa, dm[p][x], dm[p][y], dm[p][z], dm[x][y], dm[x][z], dm[y][z],
        )?;
        match r {
            FourPoint::Pass { .. } => out.conclusive += 1,
            FourPoint::Inconclusive => out.inconclusive += 1,
            FourPoint::Fail { angle_sum, excess } => {
                out.conclusive += 1;
                out.violations.push(Violation {
                    quadruple: [p, x, y, z],
                    angle_sum,
                    excess,
                });
            }
        }
    }
    out.violations.sort_by_key(|a| a.quadruple);
    Ok(out)
}

fn quadruples(n: usize, opts: &AuditOptions) -> Vec<[usize; 4]> {
    if n < opts.exhaustive_below {
        let mut q = Vec::new();
        for p in 0..n {
            let others: Vec<usize> = (0..n).filter(|&i| i != p).collect();
            for (i, &x) in others.iter().enumerate() {
                for (j, &y) in others.iter().enumerate().skip(i + 1) {
                    for &z in others.iter().skip(j + 1) {
                        q.push([p, x, y, z]);
                    }
                }
            }
        }
        q
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.budget)
            .map(|_| {
                let p = rng.random_range(0..n);
                let mut pick = || loop {
                    let i = rng.random_range(0..n);
                    if i != p {
                        break i;
                    }
                };
                let (x, y, z) = (pick(), pick(), pick());
                [p, x, y, z]
            })
            .collect()
    }
}

/// Bisects for the largest `kappa` in `[kappa_lo, kappa_hi]` at which the
/// sample satisfies the four-point condition on every checked quadruple.
pub fn estimate_curvature_lower_bound<M: Metric>(
    space: &M,
    samples: &[M::Point],
    kappa_lo: f64,
    kappa_hi: f64,
    opts: &AuditOptions,
) -> Result<CurvatureAuditReport> {
    let n = samples.len();
    let mut dm = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.distance(&samples[i], &samples[j])?;
            dm[i][j] = d;
            dm[j][i] = d;
        }
    }
    audit_distance_matrix(&dm, kappa_lo, kappa_hi, opts)
}

/// Same as [`estimate_curvature_lower_bound`] on a precomputed matrix.
pub fn audit_distance_matrix(
    dm: &[Vec<f64>],
    kappa_lo: f64,
    kappa_hi: f64,
    opts: &AuditOptions,
) -> Result<CurvatureAuditReport> {
    let n = dm.len();
    if n < 4 {
        return Err(GeoError::InvalidArgument("need at least 4 sample points".into()));
    }
    if !(kappa_lo < kappa_hi) {
        return Err(GeoError::InvalidArgument(format!(
            "empty curvature range [{kappa_lo}, {kappa_hi}]"
        )));
    }
    if !(opts.resolution > 0.0) {
        return Err(GeoError::InvalidArgument("resolution must be positive".into()));
    }
    // Apex must be distinct from the other three points.
    for (i, row) in dm.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if i != j && d == 0.0 {
                return Err(GeoError::Degenerate(format!("samples {i} and {j} coincide")));
            }
        }
    }
    let quads = quadruples(n, opts);
    let mut evaluated = 0;
    let mut eval = |kappa: f64| -> Result<CandidateResult> {
        evaluated += 1;
        let r = evaluate_candidate(dm, &quads, kappa)?;
        if r.conclusive == 0 {
            return Err(GeoError::Audit(format!(
                "every quadruple is inconclusive at kappa = {kappa}"
            )));
        }
        Ok(r)
    };

    let lo = eval(kappa_lo)?;
    if !lo.violations.is_empty() {
        return Err(GeoError::Audit(format!(
            "four-point condition already fails at kappa_lo = {kappa_lo} ({} violations)",
            lo.violations.len()
        )));
    }
    let mut pass_kappa = kappa_lo;
    let mut pass_inconclusive = lo.inconclusive;
    let hi = eval(kappa_hi)?;
    let (fail_kappa, failing) = if hi.violations.is_empty() {
        pass_kappa = kappa_hi;
        pass_inconclusive = hi.inconclusive;
        (kappa_hi, hi)
    } else {
        let mut fail_kappa = kappa_hi;
        let mut failing = hi;
        while fail_kappa - pass_kappa > opts.resolution {
            let mid = 0.5 * (pass_kappa + fail_kappa);
            let r = eval(mid)?;
            if r.violations.is_empty() {
                pass_kappa = mid;
                pass_inconclusive = r.inconclusive;
            } else {
                fail_kappa = mid;
                failing = r;
            }
        }
        (fail_kappa, failing)
    };

    let total = failing.violations.len();
    let mut violations = failing.violations;
    violations.truncate(opts.max_reported);
    Ok(CurvatureAuditReport {
        kappa_tested: fail_kappa,
        quadruples_checked: quads.len(),
        inconclusive: if total == 0 { pass_inconclusive } else { failing.inconclusive },
        violations,
        violations_total: total,
        kappa_max_estimate: pass_kappa,
        kappa_lo,
        kappa_hi,
        candidates_evaluated: evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::FiniteMetric;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    /// Direct cosine form, used as an independent oracle.
    fn direct_angle(kappa: f64, a: f64, b: f64, c: f64) -> f64 {
        let cos = if kappa == 0.0 {
            (a * a + b * b - c * c) / (2.0 * a * b)
        } else {
            (c_kappa(kappa, c) - c_kappa(kappa, a) * c_kappa(kappa, b))
                / (kappa * s_kappa(kappa, a) * s_kappa(kappa, b))
        };
        cos.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn s_kappa_examples() {
        assert!((s_kappa(1.0, FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert_eq!(s_kappa(0.0, 3.7), 3.7);
        assert!((s_kappa(-1.0, 1.0) - 1f64.sinh()).abs() < 1e-15);
        assert!((s_kappa(-1.0, 1.0) - 1.1752).abs() < 1e-4);
        assert!((c_kappa(1.0, 0.3) - 0.3f64.cos()).abs() < 1e-15);
        assert_eq!(c_kappa(0.0, 5.0), 1.0);
    }

    #[test]
    fn c_kappa_is_derivative_of_s_kappa() {
        for kappa in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            for r in [0.1, 0.5, 1.2] {
                let h = 1e-6;
                let fd = (s_kappa(kappa, r + h) - s_kappa(kappa, r - h)) / (2.0 * h);
                assert!((fd - c_kappa(kappa, r)).abs() < 1e-8, "kappa {kappa} r {r}");
            }
        }
    }

    #[test]
    fn comparison_angle_examples() {
        let a = comparison_angle(0.0, 1.0, 1.0, SQRT_2).unwrap().unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-15);
        let a = comparison_angle(1.0, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2).unwrap().unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(comparison_angle(1.0, 2.5, 2.5, 2.5).unwrap(), None);
    }

    #[test]
    fn comparison_angle_errors() {
        assert!(matches!(
            comparison_angle(0.0, 0.0, 1.0, 1.0),
            Err(GeoError::Degenerate(_))
        ));
        assert!(matches!(
            comparison_angle(0.0, 1.0, 1.0, 3.0),
            Err(GeoError::TriangleInequality(..))
        ));
    }

    #[test]
    fn half_angle_form_matches_direct_cosine_form() {
        for kappa in [-3.0, -1.0, -0.1, 0.0, 0.2, 1.0, 2.5] {
            for &(a, b, c) in &[
                (0.3, 0.4, 0.5),
                (1.0, 0.7, 0.9),
                (0.5, 0.5, 0.2),
                (0.8, 0.3, 0.6),
            ] {
                let want = direct_angle(kappa, a, b, c);
                let got = comparison_angle(kappa, a, b, c).unwrap().unwrap();
                assert!((want - got).abs() < 1e-10, "kappa {kappa}: {want} vs {got}");
            }
        }
    }

    #[test]
    fn angle_is_continuous_in_kappa() {
        for &(a, b, c) in &[(0.3, 0.4, 0.5), (1.0, 1.2, 0.4), (2.0, 1.5, 3.0)] {
            let flat = comparison_angle(0.0, a, b, c).unwrap().unwrap();
            for k in [1e-6, -1e-6] {
                let bent = comparison_angle(k, a, b, c).unwrap().unwrap();
                assert!((flat - bent).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn angle_grows_with_curvature() {
        let grid = [0.2, 0.5, 0.8, 1.0];
        for &a in &grid {
            for &b in &grid {
                for &c in &grid {
                    if c > a + b || a > b + c || b > a + c {
                        continue;
                    }
                    let flat = comparison_angle(0.0, a, b, c).unwrap().unwrap();
                    let round = comparison_angle(1.0, a, b, c).unwrap().unwrap();
                    assert!(round >= flat - 1e-12, "({a},{b},{c})");
                }
            }
        }
    }

    #[test]
    fn degenerate_sides_give_straight_and_zero_angles() {
        for kappa in [-1.0, 0.0, 1.0] {
            let straight = comparison_angle(kappa, 0.4, 0.6, 1.0).unwrap().unwrap();
            assert!((straight - PI).abs() < 1e-7);
            let zero = comparison_angle(kappa, 0.4, 0.4, 0.0).unwrap().unwrap();
            assert_eq!(zero, 0.0);
        }
    }

    #[test]
    fn comparison_triangle_examples() {
        let t = build_comparison_triangle(0.0, [3.0, 4.0, 5.0]).unwrap();
        let [p, x, y] = &t.vertices;
        let d = |a, b| t.plane.distance(a, b).unwrap();
        assert!((d(p, x) - 3.0).abs() < 1e-12);
        assert!((d(p, y) - 4.0).abs() < 1e-12);
        assert!((d(x, y) - 5.0).abs() < 1e-12);

        let t = build_comparison_triangle(1.0, [FRAC_PI_2; 3]).unwrap();
        let [p, x, y] = &t.vertices;
        // octant: mutually orthogonal unit vectors
        let dot = |a: &Point, b: &Point| a.coords.iter().zip(&b.coords).map(|(u, v)| u * v).sum::<f64>();
        assert!(dot(p, x).abs() < 1e-15 && dot(p, y).abs() < 1e-15 && dot(x, y).abs() < 1e-15);

        // kappa = -1, unit equilateral: cos C = (cosh^2 1 - cosh 1) / sinh^2 1
        let t = build_comparison_triangle(-1.0, [1.0, 1.0, 1.0]).unwrap();
        let [p, x, y] = &t.vertices;
        let d = |a, b| t.plane.distance(a, b).unwrap();
        for v in [d(p, x), d(p, y), d(x, y)] {
            assert!((v - 1.0).abs() < 1e-10);
        }
        let want = ((1f64.cosh().powi(2) - 1f64.cosh()) / 1f64.sinh().powi(2)).acos();
        let got = comparison_angle(-1.0, 1.0, 1.0, 1.0).unwrap().unwrap();
        assert!((want - got).abs() < 1e-12);
    }

    #[test]
    fn comparison_triangle_errors() {
        assert!(matches!(
            build_comparison_triangle(1.0, [3.0, 3.0, 1.0]),
            Err(GeoError::PerimeterTooLarge { .. })
        ));
        assert!(matches!(
            build_comparison_triangle(0.0, [1.0, 1.0, 5.0]),
            Err(GeoError::TriangleInequality(..))
        ));
    }

    #[test]
    fn four_point_planar_interior_apex() {
        let e2 = ModelSpace::euclidean(2).unwrap();
        let h = 3f64.sqrt() / 2.0;
        let p = Point::new(vec![0.0, 0.0]);
        let x = Point::new(vec![1.0, 0.0]);
        let y = Point::new(vec![-0.5, h]);
        let z = Point::new(vec![-0.5, -h]);
        match four_point_check(&e2, 0.0, &p, &x, &y, &z).unwrap() {
            FourPoint::Pass { angle_sum } => assert!((angle_sum - TAU).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(four_point_check(&e2, 0.0, &p, &p, &y, &z).is_err());
    }

    #[test]
    fn four_point_square_with_center() {
        // centre + 4 vertices of a unit square
        let r = SQRT_2 / 2.0;
        let rows = vec![
            vec![0.0, r, r, r, r],
            vec![r, 0.0, 1.0, SQRT_2, 1.0],
            vec![r, 1.0, 0.0, 1.0, SQRT_2],
            vec![r, SQRT_2, 1.0, 0.0, 1.0],
            vec![r, 1.0, SQRT_2, 1.0, 0.0],
        ];
        let m = FiniteMetric::new(rows).unwrap();
        let flat = four_point_check(&m, 0.0, &0, &1, &2, &3).unwrap();
        assert!(matches!(flat, FourPoint::Pass { .. }), "{flat:?}");
        let bent = four_point_check(&m, 0.1, &0, &1, &2, &3).unwrap();
        assert!(bent.is_fail(), "{bent:?}");
    }

    #[test]
    fn four_point_undefined_angles_are_inconclusive() {
        let r = four_point_from_distances(1.0, 2.5, 2.5, 0.5, 2.5, 2.2, 2.2).unwrap();
        assert_eq!(r, FourPoint::Inconclusive);
    }

    #[test]
    fn side_comparison_flat_is_equality() {
        let e2 = ModelSpace::euclidean(2).unwrap();
        let p = Point::new(vec![0.3, -0.2]);
        let x = Point::new(vec![1.5, 0.4]);
        let y = Point::new(vec![-0.7, 1.1]);
        for s in [0.0, 0.25, 0.5, 1.0] {
            for t in [0.0, 0.3, 0.9, 1.0] {
                match side_comparison_check(&e2, 0.0, &p, &x, &y, s, t).unwrap() {
                    SideComparison::Pass { actual, model } => {
                        assert!((actual - model).abs() < 1e-12)
                    }
                    other => panic!("{other:?}"),
                }
            }
        }
    }

    #[test]
    fn side_comparison_endpoints_and_sphere_midpoints() {
        let s2 = ModelSpace::sphere(2, 1.0).unwrap();
        let p = Point::new(vec![1.0, 0.0, 0.0]);
        let x = Point::new(vec![0.0, 1.0, 0.0]);
        let y = Point::new(vec![0.0, 0.0, 1.0]);
        // s = 0: both sides reduce to d(p, gamma_y(t))
        match side_comparison_check(&s2, 0.0, &p, &x, &y, 0.0, 0.7).unwrap() {
            SideComparison::Pass { actual, model } => {
                assert!((actual - 0.7 * FRAC_PI_2).abs() < 1e-12);
                assert!((model - 0.7 * FRAC_PI_2).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        // Sphere octant vs flat comparison at the side midpoints. The sphere
        // midpoints are (1,1,0)/sqrt2 and (1,0,1)/sqrt2 at angle pi/3; the flat
        // comparison triangle is equilateral with side pi/2, so the midpoint
        // distance is pi/4.
        match side_comparison_check(&s2, 0.0, &p, &x, &y, 0.5, 0.5).unwrap() {
            SideComparison::Pass { actual, model } => {
                assert!((actual - PI / 3.0).abs() < 1e-12);
                assert!((model - PI / 4.0).abs() < 1e-12);
                assert!(actual > model);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn side_comparison_errors() {
        let s2 = ModelSpace::sphere(2, 1.0).unwrap();
        let p = Point::new(vec![1.0, 0.0, 0.0]);
        let x = Point::new(vec![0.0, 1.0, 0.0]);
        assert!(matches!(
            side_comparison_check(&s2, 0.0, &p, &p, &x, 0.5, 0.5),
            Err(GeoError::Degenerate(_))
        ));
        let y = Point::new(vec![-0.6, -0.8, 0.0]);
        assert!(matches!(
            side_comparison_check(&s2, 1.0, &p, &x, &y, 0.5, 0.5),
            Err(GeoError::PerimeterTooLarge { .. })
        ));
    }

    #[test]
    fn audit_square_brackets_zero() {
        // A planar configuration with an interior apex has kappa_max = 0.
        let r = SQRT_2 / 2.0;
        let dm = vec![
            vec![0.0, r, r, r, r],
            vec![r, 0.0, 1.0, SQRT_2, 1.0],
            vec![r, 1.0, 0.0, 1.0, SQRT_2],
            vec![r, SQRT_2, 1.0, 0.0, 1.0],
            vec![r, 1.0, SQRT_2, 1.0, 0.0],
        ];
        let rep = audit_distance_matrix(&dm, -1.0, 1.0, &AuditOptions::default()).unwrap();
        assert!(rep.kappa_max_estimate <= 0.0 && rep.kappa_max_estimate > -1e-3);
        assert!(rep.kappa_tested - rep.kappa_max_estimate <= 1e-3);
        assert!(!rep.violations.is_empty());
        assert_eq!(rep.quadruples_checked, 5 * 4);
        assert!(rep.violations.iter().all(|v| v.excess > ANGLE_SUM_TOL));
    }

    #[test]
    fn audit_rejects_bad_ranges() {
        let dm = vec![vec![0.0, 1.0, 1.0, 1.0]; 4]
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r[i] = 0.0;
                r
            })
            .collect::<Vec<_>>();
        assert!(audit_distance_matrix(&dm, 1.0, 0.0, &AuditOptions::default()).is_err());
        assert!(audit_distance_matrix(&dm[..3], -1.0, 0.0, &AuditOptions::default()).is_err());
    }
}
