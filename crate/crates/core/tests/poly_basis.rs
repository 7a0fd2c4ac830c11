use hho_stokes::basis::{dim_p2, l2_project_element, l2_project_face, ElementBasis, FaceBasis};
use hho_stokes::mesh::{gen_quad_family, Point, QuadKind};
use hho_stokes::quadrature::{polygon_rule, segment_rule, triangle_rule};
use proptest::prelude::*;

fn trapezoid() -> Vec<Point> {
    vec![[0.0, 0.0], [1.0, 0.1], [1.0, 0.9], [0.0, 1.2]]
}

fn centroid(pts: &[Point]) -> Point {
    let n = pts.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let w = p[0] * q[1] - q[0] * p[1];
        a += 0.5 * w;
        cx += (p[0] + q[0]) * w;
        cy += (p[1] + q[1]) * w;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

#[test]
fn segment_midpoint_rule() {
    let r = segment_rule([0.0, 0.0], [1.0, 0.0], 1);
    assert_eq!(r.len(), 1);
    assert!((r.integrate(|p| p[0]) - 0.5).abs() < 1e-15);
}

#[test]
fn triangle_x_squared() {
    let r = triangle_rule([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], 2);
    assert!((r.integrate(|p| p[0] * p[0]) - 1.0 / 12.0).abs() < 1e-14);
    assert!((r.measure() - 0.5).abs() < 1e-15);
}

#[test]
fn square_measure_and_exactness() {
    let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    for deg in 0..14 {
        let r = polygon_rule(&sq, [0.5, 0.5], deg).unwrap();
        assert!((r.measure() - 1.0).abs() < 1e-14);
        for a in 0..=deg {
            let b = deg - a;
            let exact = 1.0 / ((a + 1) as f64 * (b + 1) as f64);
            let v = r.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
            assert!((v - exact).abs() < 1e-12 * exact.max(1e-3), "deg {deg} a {a}: {v} vs {exact}");
        }
    }
}

#[test]
fn non_star_shaped_rejected() {
    // an arrow shape whose area centroid sees an edge from behind
    let pts = [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [3.9, 0.2], [0.0, 4.0]];
    assert!(polygon_rule(&pts, centroid(&pts), 2).is_err());
}

#[test]
fn degree_zero_is_inverse_sqrt_area() {
    let pts = trapezoid();
    let b = ElementBasis::new(&pts, centroid(&pts), 0).unwrap();
    let area = polygon_rule(&pts, centroid(&pts), 0).unwrap().measure();
    let mut v = [0.0];
    b.eval([0.3, 0.4], &mut v);
    assert!((v[0] - 1.0 / area.sqrt()).abs() < 1e-14);
}

#[test]
fn gram_identity_on_trapezoid() {
    let pts = trapezoid();
    let c = centroid(&pts);
    for k in [2, 4, 6] {
        let b = ElementBasis::new(&pts, c, k).unwrap();
        let r = polygon_rule(&pts, c, 2 * k + 2).unwrap();
        let n = b.dim();
        let t = b.tabulate(&r, n);
        for i in 0..n {
            for j in 0..n {
                let g: f64 = (0..r.len()).map(|q| r.weights[q] * t[q * n + i] * t[q * n + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-10, "k {k} ({i},{j}) = {g}");
            }
        }
    }
}

#[test]
fn hierarchy_is_bitwise() {
    let pts = trapezoid();
    let c = centroid(&pts);
    let b6 = ElementBasis::new(&pts, c, 6).unwrap();
    for k in 0..6 {
        let bk = ElementBasis::new(&pts, c, k).unwrap();
        for i in 0..dim_p2(k) {
            assert_eq!(&bk.coeff_row(i)[..=i], &b6.coeff_row(i)[..=i]);
        }
    }
}

#[test]
fn coarse_fine_mass_is_padded_identity() {
    let m = gen_quad_family(4, 0.2, QuadKind::Trapezoidal).unwrap();
    let t = 5;
    let fine = ElementBasis::for_element(&m, t, 3).unwrap();
    let coarse = ElementBasis::for_element(&m, t, 1).unwrap();
    let r = polygon_rule(&m.element_vertices(t), m.centroid[t], 8).unwrap();
    let (nf, nc) = (fine.dim(), coarse.dim());
    let tf = fine.tabulate(&r, nf);
    let tc = coarse.tabulate(&r, nc);
    for i in 0..nc {
        for j in 0..nf {
            let g: f64 = (0..r.len()).map(|q| r.weights[q] * tc[q * nc + i] * tf[q * nf + j]).sum();
            assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
    }
}

#[test]
fn gradient_matches_finite_difference() {
    let pts = trapezoid();
    let b = ElementBasis::new(&pts, centroid(&pts), 4).unwrap();
    let n = b.dim();
    let p = [0.4, 0.5];
    let (mut v, mut g) = (vec![0.0; n], vec![[0.0; 2]; n]);
    b.eval_grad(p, &mut v, &mut g);
    let eps = 1e-6;
    let (mut vp, mut vm) = (vec![0.0; n], vec![0.0; n]);
    for d in 0..2 {
        let mut pp = p;
        let mut pm = p;
        pp[d] += eps;
        pm[d] -= eps;
        b.eval(pp, &mut vp);
        b.eval(pm, &mut vm);
        for i in 0..n {
            let fd = (vp[i] - vm[i]) / (2.0 * eps);
            assert!((fd - g[i][d]).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }
}

#[test]
fn constant_projection() {
    let pts = trapezoid();
    let c = centroid(&pts);
    let b = ElementBasis::new(&pts, c, 3).unwrap();
    let r = polygon_rule(&pts, c, 8).unwrap();
    let coef = l2_project_element(&b, &r, b.dim(), |_| 2.5);
    assert!((coef[0] - 2.5 * r.measure().sqrt()).abs() < 1e-12);
    assert!(coef[1..].iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn face_x_squared_onto_p1() {
    let fb = FaceBasis::new([-1.0, 0.0], [1.0, 0.0], 1);
    let r = segment_rule([-1.0, 0.0], [1.0, 0.0], 4);
    let c = l2_project_face(&fb, &r, 2, |p| p[0] * p[0]);
    let mut v = [0.0; 2];
    for x in [-0.7, 0.0, 0.5] {
        fb.eval([x, 0.0], &mut v);
        assert!((c[0] * v[0] + c[1] * v[1] - 1.0 / 3.0).abs() < 1e-14);
    }
}

#[test]
fn face_basis_orthonormal() {
    let (a, b) = ([0.2, 0.1], [0.9, -0.4]);
    let fb = FaceBasis::new(a, b, 7);
    let r = segment_rule(a, b, 16);
    let t = fb.tabulate(&r, 8);
    for i in 0..8 {
        for j in 0..8 {
            let g: f64 = (0..r.len()).map(|q| r.weights[q] * t[q * 8 + i] * t[q * 8 + j]).sum();
            assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn projection_reproduces_polynomials(coefs in proptest::collection::vec(-2.0f64..2.0, 10), k in 0usize..4) {
        let pts = trapezoid();
        let c = centroid(&pts);
        let b = ElementBasis::new(&pts, c, 3).unwrap();
        let r = polygon_rule(&pts, c, 10).unwrap();
        let exps = hho_stokes::basis::monomial_exponents(k);
        let f = |p: Point| exps.iter().zip(&coefs).map(|(&(a, bb), w)| w * p[0].powi(a as i32) * p[1].powi(bb as i32)).sum::<f64>();
        let m = dim_p2(k);
        let pc = l2_project_element(&b, &r, m, f);
        let t = b.tabulate(&r, m);
        let mut err = 0.0;
        let mut nrm = 0.0;
        for q in 0..r.len() {
            let ph: f64 = (0..m).map(|i| pc[i] * t[q * m + i]).sum();
            err += r.weights[q] * (ph - f(r.points[q])).powi(2);
            nrm += r.weights[q] * f(r.points[q]).powi(2);
        }
        prop_assert!(err.sqrt() <= 1e-10 * nrm.sqrt().max(1e-3));
        // idempotence
        let pc2 = l2_project_element(&b, &r, m, |p| {
            let mut v = vec![0.0; m];
            b.eval(p, &mut v);
            v.iter().zip(&pc).map(|(a, b)| a * b).sum()
        });
        for i in 0..m {
            prop_assert!((pc2[i] - pc[i]).abs() < 1e-12 * (1.0 + pc[i].abs()));
        }
    }
}
