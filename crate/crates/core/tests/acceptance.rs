//! Acceptance harness: one PASS/FAIL line per criterion.
//! Set ACCEPTANCE_STRICT=1 to exit nonzero when any criterion fails.

mod common;

use std::time::Instant;

use common::{dense, galerkin_vcond_oracle, rel_diff};
use hho_sparse::{gmres, CsrMatrix, Ilu0};
use hho_stokes::assembly::{assemble, AssemblyOptions};
use hho_stokes::basis::{dim_p2, l2_project_element, monomial_exponents, ElementBasis};
use hho_stokes::condense::{condense_dense, Strategy};
use hho_stokes::config::{FileConfig, Settings};
use hho_stokes::dg::{dg_bases, discrete_gradient, lifting};
use hho_stokes::driver::{build_mesh, convergence_study, run, Family, MeshParams, RunConfig, StudyReport};
use hho_stokes::hho::{HhoElement, HhoVariant};
use hho_stokes::layout::{DofLayout, Scheme};
use hho_stokes::mesh::{Mesh, Point};
use hho_stokes::plevels::{prolong_vector, restrict_vector, Hierarchy, LevelConfig};
use hho_stokes::problem::Manufactured2D;
use hho_stokes::quadrature::{polygon_rule, segment_rule};
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn config(scheme: Scheme, strategy: Strategy, k: usize) -> RunConfig {
    let c = FileConfig { scheme: Some(scheme.name().into()), strategy: Some(strategy.name().into()), k: Some(k), ..Default::default() };
    Settings::resolve(&c).expect("valid configuration").run
}

fn trapz(n: usize) -> Mesh {
    build_mesh(Family::Trapz, n, &MeshParams::default()).expect("trapezoidal mesh")
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn last_rates(rep: &StudyReport) -> Result<(f64, f64, f64), String> {
    for r in &rep.rows {
        match &r.result {
            Ok(res) if !res.converged => return Err(format!("n={} did not converge", r.n)),
            Err(e) => return Err(format!("n={} failed: {e}", r.n)),
            _ => {}
        }
    }
    let last = rep.rows.last().ok_or("empty study")?;
    match (last.rate_u, last.rate_gu, last.rate_p) {
        (Some(u), Some(g), Some(p)) => Ok((u, g, p)),
        _ => Err("final-interval rate unavailable".into()),
    }
}

fn c1_dof_counts() -> Outcome {
    let mesh = trapz(128);
    let expect = [
        (Scheme::HhoDp, Strategy::Uncond, 755712),
        (Scheme::HhoDp, Strategy::VpCond, 280576),
        (Scheme::HhoDp, Strategy::VCond, 428032),
        (Scheme::HhoHp, Strategy::HpFull, 396288),
        (Scheme::Dg, Strategy::Uncond, 491520),
    ];
    let mut parts = vec![format!("{} elements", mesh.n_elements())];
    let mut ok = mesh.n_elements() == 16384;
    for (scheme, strategy, e) in expect {
        let n = DofLayout::for_mesh(&mesh, scheme, strategy, 3).map_err(|e| e.to_string())?.n_dofs();
        ok &= n == e;
        parts.push(format!("{}/{}={n}", scheme.name(), strategy.name()));
    }
    check(ok, parts.join(", "))
}

fn c2_hho_rates() -> Outcome {
    let sizes = [2, 4, 8, 16, 32];
    let mut parts = Vec::new();
    let mut ok = true;
    for (scheme, strategy) in [(Scheme::HhoDp, Strategy::VCond), (Scheme::HhoHp, Strategy::HpFull)] {
        let rep = convergence_study(Family::Trapz, &sizes, &MeshParams::default(), &config(scheme, strategy, 3), &Manufactured2D);
        let (u, g, p) = last_rates(&rep)?;
        ok &= u >= 4.7 && g >= 3.8 && p >= 3.8;
        parts.push(format!("{}: u {u:.2}, Gu {g:.2}, p {p:.2}", scheme.name()));
    }
    check(ok, parts.join("; "))
}

fn c3_dg_rates() -> Outcome {
    let rep = convergence_study(Family::Trapz, &[2, 4, 8, 16, 32], &MeshParams::default(), &config(Scheme::Dg, Strategy::Uncond, 3), &Manufactured2D);
    let (u, g, p) = last_rates(&rep)?;
    check(u >= 3.7 && g >= 2.8 && p >= 2.8, format!("dg: u {u:.2}, Gu {g:.2}, p {p:.2}"))
}

fn c4_high_order() -> Outcome {
    let cfg = config(Scheme::HhoDp, Strategy::VCond, 6);
    let mut errs = Vec::new();
    for n in [2, 4, 8] {
        let r = run(&trapz(n), &cfg, &Manufactured2D).map_err(|e| e.to_string())?;
        if !r.converged {
            return Err(format!("n={n} did not converge"));
        }
        errs.push(r.errors.e_u);
    }
    let mut ok = true;
    for w in errs.windows(2) {
        if w[0] < 1e-11 {
            break;
        }
        ok &= w[0] / w[1] >= 64.0;
    }
    let s: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    let f: Vec<String> = errs.windows(2).map(|w| format!("{:.0}", w[0] / w[1])).collect();
    check(ok, format!("e_u {} (factors {}, required 64)", s.join(" -> "), f.join(", ")))
}

fn c5_hp_divergence() -> Outcome {
    let cfg = config(Scheme::HhoHp, Strategy::HpFull, 3);
    let mut worst = 0.0f64;
    let mut runs = 0;
    for family in [Family::Quad, Family::Trapz, Family::SplitTri, Family::Delaunay] {
        for n in [2, 4, 8, 16] {
            let mesh = build_mesh(family, n, &MeshParams::default()).map_err(|e| e.to_string())?;
            let r = run(&mesh, &cfg, &Manufactured2D).map_err(|e| e.to_string())?;
            if !r.converged {
                return Err(format!("{}:{n} did not converge", family.name()));
            }
            worst = worst.max(r.errors.e_du);
            runs += 1;
        }
    }
    check(worst <= 1e-10, format!("max |div u_T| {worst:.2e} over {runs} solves on quad, trapz, tri, delaunay"))
}

fn c6_condensation_equivalence() -> Outcome {
    let mesh = trapz(4);
    let mut norms = Vec::new();
    for strategy in [Strategy::Uncond, Strategy::VCond, Strategy::VpCond] {
        let r = run(&mesh, &config(Scheme::HhoDp, strategy, 3), &Manufactured2D).map_err(|e| e.to_string())?;
        if !r.converged {
            return Err(format!("{} did not converge", strategy.name()));
        }
        let e = r.errors;
        norms.push([e.e_u, e.e_gu, e.e_p, e.e_du]);
    }
    let mut worst = 0.0f64;
    for other in &norms[1..] {
        for i in 0..4 {
            worst = worst.max((other[i] - norms[0][i]).abs() / norms[0][i]);
        }
    }
    check(worst <= 1e-9, format!("{} elements, max relative spread of the four norms {worst:.2e}", mesh.n_elements()))
}

fn c7_galerkin_inheritance() -> Outcome {
    let mesh = trapz(4);
    let sys = assemble(&mesh, Scheme::HhoDp, Strategy::VCond, 3, &Manufactured2D, &AssemblyOptions::default()).map_err(|e| e.to_string())?;
    let h = Hierarchy::new(&sys.layout, sys.matrix.clone(), &LevelConfig::default_for(3, Scheme::HhoDp)).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut info = Vec::new();
    for (l, kc) in [(1, 2), (2, 1)] {
        let inherited = dense(&h.levels[l].matrix);
        worst = worst.max(rel_diff(&inherited, &galerkin_vcond_oracle(&mesh, 3, kc, &Manufactured2D)));
        let fresh = assemble(&mesh, Scheme::HhoDp, Strategy::VCond, kc, &Manufactured2D, &AssemblyOptions::default()).map_err(|e| e.to_string())?;
        info.push(format!("k={kc} {:.1e}", rel_diff(&inherited, &dense(&fresh.matrix))));
    }
    check(
        worst <= 1e-10,
        format!("levels k=2,1 vs condensed R A P: {worst:.2e} (info: vs fresh degree-k assembly {})", info.join(", ")),
    )
}

fn c8_uniformity() -> Outcome {
    let cfg = config(Scheme::HhoDp, Strategy::VCond, 3);
    let mut its = Vec::new();
    for n in [2, 4, 8, 16, 32, 64] {
        let r = run(&trapz(n), &cfg, &Manufactured2D).map_err(|e| e.to_string())?;
        if !r.converged {
            return Err(format!("n={n} did not converge"));
        }
        its.push(r.its);
    }
    let (lo, hi) = (*its.iter().min().unwrap(), *its.iter().max().unwrap());
    check(hi <= 10 && hi - lo <= 3, format!("ITs {its:?} for n=2..64"))
}

fn c9_degree_robustness() -> Outcome {
    let mesh = trapz(16);
    let r3 = run(&mesh, &config(Scheme::HhoDp, Strategy::VCond, 3), &Manufactured2D).map_err(|e| e.to_string())?;
    let r6 = run(&mesh, &config(Scheme::HhoDp, Strategy::VCond, 6), &Manufactured2D).map_err(|e| e.to_string())?;
    let ok = r3.converged && r6.converged && r6.its <= r3.its + 4;
    check(ok, format!("n=16: k=3 {} ITs, k=6 (levels 6/3/1) {} ITs", r3.its, r6.its))
}

fn c10_graded_contrast() -> Outcome {
    let mesh = build_mesh(Family::GradedTri, 32, &MeshParams::default()).map_err(|e| e.to_string())?;
    let rv = run(&mesh, &config(Scheme::HhoDp, Strategy::VCond, 3), &Manufactured2D).map_err(|e| e.to_string())?;
    if !rv.converged || rv.its > 30 {
        return Err(format!("v-cond: {} ITs, converged {}", rv.its, rv.converged));
    }
    let mut cfg = config(Scheme::HhoDp, Strategy::VpCond, 3);
    // not converging within 2·ITs(v) already establishes the contrast
    cfg.solver.outer_maxit = 2 * rv.its;
    let rvp = run(&mesh, &cfg, &Manufactured2D).map_err(|e| e.to_string())?;
    let ok = !rvp.converged || rvp.its >= 2 * rv.its;
    let vp = if rvp.converged { format!("{} ITs", rvp.its) } else { format!("not converged within {} ITs", rvp.its) };
    check(ok, format!("{} elements: v-cond {} ITs, v&p-cond {vp}", mesh.n_elements(), rv.its))
}

fn poly(exps: &[(usize, usize)], c: &[f64]) -> impl Fn(Point) -> f64 {
    let (exps, c) = (exps.to_vec(), c.to_vec());
    move |p: Point| exps.iter().zip(&c).map(|(&(a, b), w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum()
}

fn c11_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mesh = build_mesh(Family::Delaunay, 3, &MeshParams::default()).map_err(|e| e.to_string())?;
    let mut worst = [0.0f64; 8];
    for _ in 0..20 {
        let t = rng.random_range(0..mesh.n_elements());
        let k = rng.random_range(0..4usize);
        let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], 2 * k + 8).map_err(|e| e.to_string())?;
        // poly_basis: reproduction of P^k and idempotence of the projector
        let exps = monomial_exponents(k);
        let c: Vec<f64> = (0..exps.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = poly(&exps, &c);
        let basis = ElementBasis::for_element(&mesh, t, k + 1).map_err(|e| e.to_string())?;
        let m = dim_p2(k);
        let pc = l2_project_element(&basis, &rule, m, &f);
        let tab = basis.tabulate(&rule, m);
        let ph = |p: usize| (0..m).map(|i| pc[i] * tab[p * m + i]).sum::<f64>();
        let err = (0..rule.len()).map(|q| rule.weights[q] * (ph(q) - f(rule.points[q])).powi(2)).sum::<f64>().sqrt();
        let pp = l2_project_table_again(&rule, &tab, m, &ph);
        worst[0] = worst[0].max(err).max(pp.iter().zip(&pc).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        // hho_local: reconstruction and face residuals exact on P^{k+1}
        let exps1 = monomial_exponents(k + 1);
        let c1: Vec<f64> = (0..exps1.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = poly(&exps1, &c1);
        for variant in [HhoVariant::Dp, HhoVariant::Hp] {
            let el = HhoElement::new(&mesh, t, variant, k).map_err(|e| e.to_string())?;
            let v = el.interpolate_scalar(&q);
            let r = el.potential_reconstruction(&v);
            let n = el.n_rec();
            let e = (0..el.rule.len())
                .map(|i| el.rule.weights[i] * ((0..n).map(|a| r[a] * el.psi[i * n + a]).sum::<f64>() - q(el.rule.points[i])).powi(2))
                .sum::<f64>()
                .sqrt();
            worst[1] = worst[1].max(e);
            for j in 0..el.faces.len() {
                worst[1] = worst[1].max(el.face_residual(j, &v).iter().fold(0.0, |a, x| a.max(x.abs())));
            }
        }
    }
    // dg_local: lifting moment identity and zero-jump discrete gradient
    let k = 2;
    let bases = dg_bases(&mesh, k).map_err(|e| e.to_string())?;
    let trace = |p: Point| [p[0] * p[1] + 1.0, p[0] - p[1] * p[1]];
    let aff = |p: Point| [0.5 + p[0] - 2.0 * p[1], 1.5 * p[0] + 0.25 * p[1]];
    let grad = [[1.0, -2.0], [1.5, 0.25]];
    let mut u = Vec::new();
    for t in 0..mesh.n_elements() {
        let b = &bases[t];
        let n = b.dim();
        let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], 2 * k + 4).map_err(|e| e.to_string())?;
        let tab = b.tabulate(&rule, n);
        let mut c = vec![0.0; 2 * n];
        for (qi, p) in rule.points.iter().enumerate() {
            for mm in 0..n {
                c[mm] += rule.weights[qi] * tab[qi * n + mm] * aff(*p)[0];
                c[n + mm] += rule.weights[qi] * tab[qi * n + mm] * aff(*p)[1];
            }
        }
        u.push(c);
        for (fi, ef) in mesh.element_faces[t].iter().enumerate() {
            let l = lifting(&mesh, b, t, fi, trace);
            let nrm = mesh.normal_out(*ef);
            let [a, bb] = mesh.face_points(ef.face);
            let fr = segment_rule(a, bb, 16);
            let mut vals = vec![0.0; n];
            for mm in 0..n {
                for i in 0..2 {
                    for j in 0..2 {
                        let rhs: f64 = fr
                            .points
                            .iter()
                            .zip(&fr.weights)
                            .map(|(p, w)| {
                                b.eval(*p, &mut vals);
                                0.5 * w * trace(*p)[i] * nrm[j] * vals[mm]
                            })
                            .sum();
                        worst[2] = worst[2].max((l[mm][i][j] - rhs).abs());
                    }
                }
            }
        }
    }
    for t in 0..mesh.n_elements() {
        let g = discrete_gradient(&mesh, &bases, t, &u, aff);
        let b = &bases[t];
        let rule = polygon_rule(&mesh.element_vertices(t), mesh.centroid[t], 2 * k + 2).map_err(|e| e.to_string())?;
        let tab = b.tabulate(&rule, b.dim());
        for mm in 0..b.dim() {
            let s: f64 = (0..rule.len()).map(|q| rule.weights[q] * tab[q * b.dim() + mm]).sum();
            for i in 0..2 {
                for j in 0..2 {
                    worst[3] = worst[3].max((g[mm][i][j] - grad[i][j] * s).abs());
                }
            }
        }
    }
    // condense: Schur complement against full dense elimination
    for n in [6usize, 11] {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = &g * g.transpose() + DMatrix::identity(n, n) * n as f64;
        let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let elim: Vec<usize> = (0..n).filter(|i| i % 3 != 0).collect();
        let c = condense_dense(&a, &b, &elim, 0, "property").map_err(|e| e.to_string())?;
        let x = a.clone().lu().solve(&b).ok_or("singular test matrix")?;
        let xr = DVector::from_fn(c.retained.len(), |i, _| x[c.retained[i]]);
        worst[4] = worst[4].max((&c.schur * &xr - &c.rhs).amax());
        let full = c.recover(xr.as_slice()).map_err(|e| e.to_string())?;
        worst[4] = worst[4].max(full.iter().zip(x.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max));
    }
    // sparse_la: GMRES residual monotonicity and ILU(0) exactness without fill
    let n = 40;
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, i, 3.0 + rng.random_range(0.0..1.0)));
        if i > 0 {
            trip.push((i, i - 1, rng.random_range(-1.0..1.0)));
            trip.push((i - 1, i, rng.random_range(-1.0..1.0)));
        }
    }
    let a = CsrMatrix::from_triplets(n, &trip).map_err(|e| e.to_string())?;
    let ilu = Ilu0::new(&a).map_err(|e| e.to_string())?;
    worst[5] = ilu.lu_product_dense().iter().zip(a.to_dense()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let sys = assemble(&mesh, Scheme::HhoDp, Strategy::VCond, 2, &Manufactured2D, &AssemblyOptions::default()).map_err(|e| e.to_string())?;
    let ilu = Ilu0::new(&sys.matrix).map_err(|e| e.to_string())?;
    let mut x = vec![0.0; sys.rhs.len()];
    let rep = gmres(&sys.matrix, &ilu, &sys.rhs, &mut x, 60, 1e-12);
    let monotone = rep.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    // plevels: adjointness and restrict∘prolong identity
    let fine = &sys.layout;
    for kc in [0, 1] {
        let coarse = fine.at_degree(kc).map_err(|e| e.to_string())?;
        let map = fine.coarse_map(&coarse).map_err(|e| e.to_string())?;
        let xf: Vec<f64> = (0..fine.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let yc: Vec<f64> = (0..coarse.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pr = prolong_vector(&map, &yc, fine.n_dofs());
        let lhs: f64 = restrict_vector(&map, &xf).iter().zip(&yc).map(|(p, q)| p * q).sum();
        let rhs: f64 = xf.iter().zip(&pr).map(|(p, q)| p * q).sum();
        worst[6] = worst[6].max((lhs - rhs).abs());
        if restrict_vector(&map, &pr) != yc {
            worst[7] = f64::INFINITY;
        }
    }
    let tol = [1e-10, 1e-10, 1e-10, 1e-11, 1e-10, 1e-13, 1e-13, 0.0];
    let names = ["projector", "reconstruction", "lifting", "zero-jump gradient", "Schur", "ILU(0)", "adjointness", "restrict-prolong"];
    let mut ok = monotone;
    let mut parts = vec![format!("GMRES monotone {monotone}")];
    for i in 0..8 {
        ok &= worst[i] <= tol[i];
        parts.push(format!("{} {:.1e}", names[i], worst[i]));
    }
    check(ok, parts.join(", "))
}

fn l2_project_table_again(rule: &hho_stokes::quadrature::QuadratureRule, tab: &[f64], m: usize, f: &dyn Fn(usize) -> f64) -> Vec<f64> {
    let mut c = vec![0.0; m];
    for q in 0..rule.len() {
        for (i, ci) in c.iter_mut().enumerate() {
            *ci += rule.weights[q] * f(q) * tab[q * m + i];
        }
    }
    c
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("DOF counts on the 16384-element trapezoidal mesh", c1_dof_counts),
        ("HHO k=3 rates, trapezoidal n=2..32", c2_hho_rates),
        ("DG k=3 rates, trapezoidal n=2..32", c3_dg_rates),
        ("HHO k=6 error reduction, trapezoidal n=2..8", c4_high_order),
        ("HHO-hp divergence-free velocity", c5_hp_divergence),
        ("condensation equivalence, 16 elements k=3", c6_condensation_equivalence),
        ("Galerkin inheritance of coarse operators", c7_galerkin_inheritance),
        ("solver uniformity, trapezoidal n=2..64", c8_uniformity),
        ("degree robustness k=3 to k=6, n=16", c9_degree_robustness),
        ("graded triangular v-cond vs v&p-cond", c10_graded_contrast),
        ("property suites", c11_properties),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}: {name}: {detail} [{:.1} s]", i + 1, t.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
