use std::f64::consts::{FRAC_PI_2, PI};

use holonomy_core::connection::{dark_state_section, wilczek_zee_field, wz_connection};
use holonomy_core::field::AbelianField;
use holonomy_core::linalg::{self, re, CMatrix};
use holonomy_core::model::{dark_states, HamiltonianFamily};
use holonomy_core::spectral::{FramePathOptions, Selection};
use holonomy_core::transport::{
    holonomy_by_transport, line_integral_abelian, path_ordered_exp, surface_integral_abelian, ParamPath,
    SignConvention, SurfacePatch,
};

const GRID_STEP: f64 = 2.0 * PI / 20.0;

fn quarter_rectangle(fam: &HamiltonianFamily) -> ParamPath {
    ParamPath::rectangle(fam.schema(), "theta3", (0.0, FRAC_PI_2), "theta4", (0.0, FRAC_PI_2), &[0.0, 0.0]).unwrap()
}

/// Loop unitary frozen from a 10⁴-step run of both algorithms: identity on
/// the first pair and a real quarter turn on the second.
fn frozen_holonomy() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = re(1.0);
    m[(1, 1)] = re(1.0);
    m[(2, 3)] = re(1.0);
    m[(3, 2)] = re(-1.0);
    m
}

#[test]
fn connection_entries_on_grid() {
    let fam = HamiltonianFamily::dark_restricted(1.0, 1.0);
    let sec = dark_state_section();
    for i in 0..20 {
        for j in 0..20 {
            let (t3, t4) = (-PI + GRID_STEP * i as f64, -PI + GRID_STEP * j as f64);
            let p = fam.point(&[t3, t4]).unwrap();
            let a3 = wz_connection(&fam, &sec, &p, "theta3").unwrap();
            let a4 = wz_connection(&fam, &sec, &p, "theta4").unwrap();
            assert!(linalg::max_abs(&a3) <= 1e-10);
            assert!((a4[(2, 3)] - re(-t3.sin())).norm() <= 1e-8);
            assert!((a4[(3, 2)] - re(t3.sin())).norm() <= 1e-8);
            let mut rest = a4.clone();
            rest[(2, 3)] = re(0.0);
            rest[(3, 2)] = re(0.0);
            assert!(linalg::max_abs(&rest) <= 1e-10);
        }
    }
}

#[test]
fn both_algorithms_reproduce_frozen_unitary() {
    let fam = HamiltonianFamily::dark_restricted(1.0, 1.0);
    let path = quarter_rectangle(&fam);
    let field = wilczek_zee_field(&fam, &dark_state_section()).unwrap();
    let wilson = path_ordered_exp(&field, &path, 1.0, SignConvention::MinusI, 10_000).unwrap();
    let opts = FramePathOptions {
        initial_basis: Some(dark_states(0.0, 0.0).to_vec()),
        ..Default::default()
    };
    let transport = holonomy_by_transport(&fam, &path, &Selection::Indices(vec![1, 2, 3, 4]), 10_000, &opts).unwrap();
    let frozen = frozen_holonomy();
    assert!(linalg::max_diff(&wilson.unitary, &frozen) < 1e-6);
    assert!(linalg::max_diff(&transport.unitary, &frozen) < 1e-6);
    assert!(linalg::max_diff(&wilson.unitary, &transport.unitary) < 1e-6);
}

#[test]
fn enclosed_flux_by_stokes() {
    let names = ["theta3", "theta4"];
    let a = AbelianField::new("sin", &names, |x| vec![0.0, x[0].sin()]);
    let patch = SurfacePatch::new("theta3", (0.0, FRAC_PI_2), "theta4", (0.0, FRAC_PI_2), (20_000, 20), Vec::new())
        .unwrap();
    let line = line_integral_abelian(&a, &patch.boundary().unwrap(), 1.0, 40_000).unwrap();
    let surface = surface_integral_abelian(|x| x[0].cos(), &patch);
    assert!((line - surface).abs() < 1e-6, "line {line} surface {surface}");
    assert!((surface - FRAC_PI_2).abs() < 1e-8);
}
