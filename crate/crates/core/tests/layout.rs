use hho_stokes::assembly::{assemble, AssemblyOptions};
use hho_stokes::basis::dim_p2;
use hho_stokes::condense::Strategy;
use hho_stokes::driver::{build_mesh, count, Family, MeshParams};
use hho_stokes::layout::*;
use hho_stokes::mesh::{gen_quad_family, Mesh, QuadKind, Side};
use hho_stokes::problem::Manufactured2D;

const COMBOS: [(Scheme, Strategy); 5] = [
    (Scheme::HhoDp, Strategy::Uncond),
    (Scheme::HhoDp, Strategy::VpCond),
    (Scheme::HhoDp, Strategy::VCond),
    (Scheme::HhoHp, Strategy::HpFull),
    (Scheme::Dg, Strategy::Uncond),
];

fn trapz(n: usize) -> Mesh {
    gen_quad_family(n, 0.1, QuadKind::Trapezoidal).unwrap().classify_boundary(Some(Side::Right)).unwrap()
}

#[test]
fn trapezoidal_16384_dimensions() {
    let mesh = trapz(128);
    let expect = [755712, 280576, 428032, 396288, 491520];
    for ((scheme, strategy), e) in COMBOS.iter().zip(expect) {
        assert_eq!(DofLayout::for_mesh(&mesh, *scheme, *strategy, 3).unwrap().n_dofs(), e, "{scheme:?} {strategy:?}");
        assert_eq!(formula_dofs(*scheme, *strategy, 3, mesh.n_faces(), mesh.n_elements()).unwrap(), e);
    }
}

#[test]
fn lowest_order_condensations_coincide() {
    let mesh = trapz(4);
    let v = DofLayout::for_mesh(&mesh, Scheme::HhoDp, Strategy::VCond, 0).unwrap();
    let vp = DofLayout::for_mesh(&mesh, Scheme::HhoDp, Strategy::VpCond, 0).unwrap();
    assert_eq!(v.n_dofs(), vp.n_dofs());
}

#[test]
fn single_element_dg_block() {
    let mesh = trapz(1);
    assert_eq!(DofLayout::for_mesh(&mesh, Scheme::Dg, Strategy::Uncond, 1).unwrap().n_dofs(), 9);
    assert!(DofLayout::for_mesh(&mesh, Scheme::Dg, Strategy::Uncond, 0).is_err());
    assert!(DofLayout::for_mesh(&mesh, Scheme::HhoDp, Strategy::HpFull, 1).is_err());
}

#[test]
fn symbolic_count_equals_assembled_pattern() {
    for family in [Family::Trapz, Family::Delaunay] {
        let mesh = build_mesh(family, 3, &MeshParams::default()).unwrap();
        for (scheme, strategy) in COMBOS {
            for k in [1, 2] {
                let sys = assemble(&mesh, scheme, strategy, k, &Manufactured2D, &AssemblyOptions::default()).unwrap();
                let r = count(&mesh, scheme, strategy, k).unwrap();
                assert_eq!(r.dofs, sys.matrix.n());
                assert_eq!(r.mnzs, sys.matrix.nnz(), "{family:?} {scheme:?} {strategy:?} k={k}");
            }
        }
    }
}

#[test]
fn dg_formula_differs_from_actual_by_boundary_faces_only() {
    for family in [Family::Quad, Family::SplitTri, Family::Delaunay, Family::GradedTri] {
        let mesh = build_mesh(family, 5, &MeshParams::default()).unwrap();
        for k in 1..4 {
            let r = count(&mesh, Scheme::Dg, Strategy::Uncond, k).unwrap();
            let p = dim_p2(k);
            assert_eq!(r.mnzs_formula - r.mnzs, mesh.boundary_face_count() * 7 * p * p);
        }
    }
}

#[test]
fn coarse_map_selects_leading_modes() {
    let mesh = trapz(2);
    let fine = DofLayout::for_mesh(&mesh, Scheme::HhoDp, Strategy::VCond, 3).unwrap();
    let coarse = fine.at_degree(1).unwrap();
    let map = fine.coarse_map(&coarse).unwrap();
    assert_eq!(map.len(), coarse.n_dofs());
    assert!(map.windows(2).all(|w| w[0] < w[1]));
    // first face: x modes 0,1 then y modes 4,5 of the fine block
    assert_eq!(&map[..4], &[0, 1, 4, 5]);
    let e0 = coarse.elem_offset(0);
    assert_eq!(&map[e0..e0 + 3], &[fine.elem_offset(0), fine.elem_offset(0) + 1, fine.elem_offset(0) + 2]);
    let other = DofLayout::for_mesh(&mesh, Scheme::HhoDp, Strategy::Uncond, 1).unwrap();
    assert!(fine.coarse_map(&other).is_err());
    assert!(coarse.coarse_map(&fine).is_err());
}

#[test]
fn break_even_ratio() {
    let mesh = trapz(16);
    let r = count(&mesh, Scheme::HhoDp, Strategy::VCond, 3).unwrap();
    assert!((r.break_even_ratio - 2.5).abs() < 1e-15);
    assert!((r.face_element_ratio - mesh.n_faces() as f64 / 256.0).abs() < 1e-15);
}

#[test]
fn scheme_and_strategy_names_parse() {
    for (scheme, strategy) in COMBOS {
        assert_eq!(scheme.name().parse::<Scheme>().unwrap(), scheme);
        assert_eq!(strategy.name().parse::<Strategy>().unwrap(), strategy);
    }
    assert!("hho".parse::<Scheme>().is_err());
    assert!("full".parse::<Strategy>().is_err());
}
