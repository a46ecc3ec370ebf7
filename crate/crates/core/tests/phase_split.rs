use std::f64::consts::PI;

use holonomy_core::linalg::wrap_phase;
use holonomy_core::transport::{
    phase_decomposition, schrodinger_evolve, two_level_drive, two_level_lower_reference, PhaseDecomposition,
};

/// Drive the lower two-level state once around the circle with `ωT = omega_t`
/// (`ω = 2r`, `r = 1`).
fn driven(omega_t: f64, steps: usize) -> PhaseDecomposition {
    let t = omega_t / 2.0;
    let h = two_level_drive(1.0, t);
    let reference = two_level_lower_reference(t);
    let psi0 = reference(0.0);
    let trajectory = schrodinger_evolve(&h, &psi0, t, steps).unwrap();
    phase_decomposition(&trajectory, &h, &reference).unwrap()
}

#[test]
fn phase_identity_and_removal() {
    for (omega_t, steps) in [(50.0, 50_000), (200.0, 100_000)] {
        let d = driven(omega_t, steps);
        assert!(d.identity_residual < 1e-6, "ωT={omega_t}: {}", d.identity_residual);
        assert!(d.removed_dynamical.abs() < 1e-6);
        assert!((d.total - (d.dynamical - d.geometric)).abs() < 1e-6);
    }
}

#[test]
fn geometric_part_approaches_half_turn() {
    // frozen from runs at 1e5 and 2e5 steps: (F - π)·ωT ≈ -29.7
    let mut previous = f64::INFINITY;
    for (omega_t, steps) in [(200.0, 100_000), (2000.0, 200_000)] {
        let d = driven(omega_t, steps);
        let offset = wrap_phase(d.geometric - PI);
        assert!((offset * omega_t + 29.7).abs() < 0.3, "ωT={omega_t}: offset {offset}");
        assert!(offset.abs() < previous);
        previous = offset.abs();
        assert!(d.leakage < 1e-3);
    }
}
