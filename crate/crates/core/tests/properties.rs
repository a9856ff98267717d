use std::f64::consts::PI;

use alexgeo::barycenter::{solve_barycenter, BarycenterOptions};
use alexgeo::comparison::{build_comparison_triangle, comparison_angle};
use alexgeo::cone::{cone_distance, inner_product, ConePoint};
use alexgeo::jensen::{jensen_check, JensenOptions};
use alexgeo::semiconcave::{certify_alpha, differential_along, gradient, CertifyOptions, Convexity, GradientOptions};
use alexgeo::{DiscreteMeasure, FieldKind, Geodesic, ModelSpace, Point, ScalarField, TangentVector, Verdict};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn make_space(kind: u8, dim: usize, k: f64) -> ModelSpace {
    match kind {
        0 => ModelSpace::euclidean(dim).unwrap(),
        1 => ModelSpace::sphere(dim, k).unwrap(),
        _ => ModelSpace::hyperbolic(dim, -k).unwrap(),
    }
}

fn any_space() -> impl Strategy<Value = ModelSpace> {
    (0u8..3, 1usize..=4, 0.25f64..4.0).prop_map(|(kind, dim, k)| make_space(kind, dim, k))
}

/// A geodesic radius that stays well inside the diameter for spheres and
/// keeps hyperbolic coordinates moderate.
fn scale_of(space: &ModelSpace) -> f64 {
    if space.kappa() > 0.0 {
        space.diameter()
    } else {
        2.0 / space.kappa().abs().sqrt().max(1.0)
    }
}

fn tangent(space: &ModelSpace, p: &Point, len: f64, r: &mut ChaCha8Rng) -> TangentVector {
    let u = space.random_unit_tangent(p, r);
    TangentVector::new(p.clone(), u.iter().map(|c| c * len).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exp_inverts_log(space in any_space(), seed: u64, a in 0.0f64..0.45, b in 0.0f64..0.9) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let s = scale_of(&space);
        let p = space.exp(&tangent(&space, &space.origin(), a * s, &mut r)).unwrap();
        let x = space.exp(&tangent(&space, &p, b * s, &mut r)).unwrap();
        let back = space.exp(&space.log(&p, &x).unwrap()).unwrap();
        let err = space.distance(&back, &x).unwrap();
        prop_assert!(err <= 1e-9, "round trip error {err}");
    }

    #[test]
    fn geodesics_have_constant_speed(space in any_space(), seed: u64, len in 0.01f64..0.95, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let tau = 1.0;
        let p = space.origin();
        let g = Geodesic::new(space, tangent(&space, &p, len * scale_of(&space), &mut r), tau).unwrap();
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let lhs = space.distance(&g.at(s).unwrap(), &g.at(t).unwrap()).unwrap() * tau;
        let rhs = (t - s) * space.distance(&g.at(0.0).unwrap(), &g.endpoint().unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn sphere_distances_respect_diameter(dim in 1usize..=4, k in 0.25f64..4.0, seed: u64) {
        let space = ModelSpace::sphere(dim, k).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let raw = |r: &mut ChaCha8Rng| {
            let mut c: Vec<f64> = (0..dim + 1).map(|_| r.random_range(-1.0..1.0)).collect();
            space.renormalize(&mut c);
            Point::new(c)
        };
        let a = raw(&mut r);
        // the antipode of a, and a random point
        let anti = Point::new(a.coords.iter().map(|c| -c).collect());
        for b in [anti, raw(&mut r)] {
            let d = space.distance(&a, &b).unwrap();
            prop_assert!(d <= PI / k.sqrt() + 1e-12);
        }
    }

    #[test]
    fn comparison_triangle_reproduces_sides(k in -4.0f64..4.0, a in 0.01f64..1.0, b in 0.01f64..1.0, frac in 0.01f64..0.99) {
        let lo = (a - b).abs();
        let c = lo + frac * (a + b - lo);
        prop_assume!(a + b + c < 2.0 * alexgeo::space::diameter(k));
        let tri = build_comparison_triangle(k, [a, b, c]).unwrap();
        let [x, y, z] = &tri.vertices;
        let plane = tri.plane;
        let measured = [
            plane.distance(x, y).unwrap(),
            plane.distance(x, z).unwrap(),
            plane.distance(y, z).unwrap(),
        ];
        for (m, want) in measured.iter().zip(tri.sides) {
            prop_assert!((m - want).abs() <= 1e-9, "{measured:?} vs {:?}", tri.sides);
        }
    }

    #[test]
    fn comparison_angle_is_continuous_at_zero(a in 0.05f64..1.0, b in 0.05f64..1.0, frac in 0.01f64..0.99) {
        let lo = (a - b).abs();
        let c = lo + frac * (a + b - lo);
        let flat = comparison_angle(0.0, a, b, c).unwrap().unwrap();
        for k in [1e-6, -1e-6] {
            let near = comparison_angle(k, a, b, c).unwrap().unwrap();
            prop_assert!((near - flat).abs() <= 1e-4);
        }
        let round = comparison_angle(1.0, a, b, c).unwrap().unwrap();
        prop_assert!(round >= flat - 1e-12);
    }

    #[test]
    fn cone_inner_product_is_symmetric_and_homogeneous(space in any_space(), seed: u64, lam in 0.0f64..5.0) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = space.origin();
        let u = tangent(&space, &p, r.random_range(0.0..2.0), &mut r);
        let v = tangent(&space, &p, r.random_range(0.0..2.0), &mut r);
        let uv = inner_product(&space, &u, &v).unwrap();
        prop_assert!((uv - inner_product(&space, &v, &u).unwrap()).abs() <= 1e-12);
        let scaled = inner_product(&space, &u.scaled(lam), &v).unwrap();
        prop_assert!((scaled - lam * uv).abs() <= 1e-12 * (1.0 + lam));
    }

    #[test]
    fn cone_distance_grows_with_angle(s in 0.0f64..3.0, t in 0.0f64..3.0, a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = ConePoint::new((), s);
        let y = ConePoint::new((), t);
        let d_lo = cone_distance(&x, &y, lo.min(PI)).unwrap();
        let d_hi = cone_distance(&x, &y, hi.min(PI)).unwrap();
        prop_assert!(d_lo <= d_hi + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_is_unique_across_seeds(kind in 0u8..3, dim in 2usize..=3, seed: u64) {
        let space = make_space(kind, dim, 1.0);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let o = space.origin();
        let y = space.random_point_in_ball(&o, 0.5, &mut r).unwrap();
        let p = space.random_point_in_ball(&o, 0.5, &mut r).unwrap();
        let alpha = if space.kappa() > 0.0 { 0.0 } else { -2.0 };
        let f = ScalarField::new(space, FieldKind::NegSquaredDistanceTo { anchor: y }, alpha).unwrap();
        let g1 = gradient(&f, &p, alpha, &GradientOptions { seed, ..Default::default() }).unwrap();
        let g2 = gradient(&f, &p, alpha, &GradientOptions { seed: seed ^ 0x9e37, ..Default::default() }).unwrap();
        let diff: Vec<f64> = g1.gradient.vector.iter().zip(&g2.gradient.vector).map(|(a, b)| a - b).collect();
        prop_assert!(space.tangent_norm(&diff) <= 1e-5);
    }

    #[test]
    fn differential_respects_lipschitz_estimate(kind in 0u8..3, dim in 1usize..=3, seed: u64) {
        let space = make_space(kind, dim, 1.0);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let o = space.origin();
        let y = space.random_point_in_ball(&o, 0.5, &mut r).unwrap();
        let p = space.random_point_in_ball(&o, 0.5, &mut r).unwrap();
        let base = ScalarField::new(space, FieldKind::SquaredDistanceTo { anchor: y }, 2.0).unwrap();
        let lip = base.lipschitz_near(&p, 0.1).unwrap();
        let f = base.with_lipschitz(lip);
        let w = tangent(&space, &p, 1.0, &mut r);
        // Hess d^2 <= 2 d coth d stays below 10 on this region
        let d = differential_along(&f, &w, 10.0, 0.1).unwrap();
        prop_assert!(d.abs() <= f.lipschitz_estimate.unwrap() + 1e-9);
    }

    #[test]
    fn certified_modulus_stays_certified_below(kind in 0u8..3, seed: u64, alpha in -1.0f64..2.0, drop in 0.0f64..3.0) {
        let space = make_space(kind, 2, 1.0);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let o = space.origin();
        let y = space.random_point_in_ball(&o, 0.3, &mut r).unwrap();
        let f = ScalarField::new(space, FieldKind::SquaredDistanceTo { anchor: y }, alpha).unwrap();
        let opts = CertifyOptions { budget: 40, seed, ..Default::default() };
        let hi = certify_alpha(&f, &o, 0.5, alpha, Convexity::Convex, &opts).unwrap();
        if hi.is_certified() {
            let lo = certify_alpha(&f, &o, 0.5, alpha - drop, Convexity::Convex, &opts).unwrap();
            prop_assert!(lo.is_certified());
        }
    }

    #[test]
    fn karcher_descent_is_monotone(kind in 0u8..3, dim in 1usize..=4, n in 2usize..=12, seed: u64) {
        let space = make_space(kind, dim, 1.0);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let o = space.origin();
        let radius = if space.kappa() > 0.0 { 0.7 } else { 0.9 };
        let pts: Vec<Point> = (0..n).map(|_| space.random_point_in_ball(&o, radius, &mut r).unwrap()).collect();
        let mu = DiscreteMeasure::uniform(space, pts).unwrap();
        let res = solve_barycenter(&mu, &BarycenterOptions { record_trace: true, ..Default::default() }).unwrap();
        for w in res.variance_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn euclidean_barycenter_scales(dim in 1usize..=4, n in 1usize..=10, lam in 0.1f64..10.0, seed: u64) {
        let space = ModelSpace::euclidean(dim).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new((0..dim).map(|_| r.random_range(-3.0..3.0)).collect()))
            .collect();
        let w: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
        let scaled: Vec<Point> = pts.iter().map(|p| Point::new(p.coords.iter().map(|c| lam * c).collect())).collect();
        let opts = BarycenterOptions::default();
        let a = solve_barycenter(&DiscreteMeasure::normalized(space, pts, w.clone()).unwrap(), &opts).unwrap();
        let b = solve_barycenter(&DiscreteMeasure::normalized(space, scaled, w).unwrap(), &opts).unwrap();
        for (x, y) in a.point.coords.iter().zip(&b.point.coords) {
            prop_assert!((lam * x - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn gap_decreases_in_alpha(kind in 0u8..3, seed: u64, a1 in -3.0f64..0.0, step in 0.0f64..2.0) {
        let space = make_space(kind, 2, 1.0);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let o = space.origin();
        let pts: Vec<Point> = (0..6).map(|_| space.random_point_in_ball(&o, 0.3, &mut r).unwrap()).collect();
        let mu = DiscreteMeasure::uniform(space, pts).unwrap();
        let anchor = space.random_point_in_ball(&o, 0.3, &mut r).unwrap();
        let run = |alpha: f64| {
            let field = ScalarField::new(space, FieldKind::SquaredDistanceTo { anchor: anchor.clone() }, alpha).unwrap();
            jensen_check(&alexgeo::Scenario { measure: mu.clone(), field, options: JensenOptions::default() }).unwrap()
        };
        let (r1, r2) = (run(a1), run(a1 + step));
        if r1.verdict == Verdict::Holds && r2.verdict == Verdict::Holds {
            let v = r1.variance_star.unwrap();
            prop_assert_eq!(r1.variance_star, r2.variance_star);
            prop_assert!(r1.gap.unwrap() >= r2.gap.unwrap());
            prop_assert!((r1.gap.unwrap() - r2.gap.unwrap() - 0.5 * step * v).abs() <= 1e-12);
        }
    }
}
