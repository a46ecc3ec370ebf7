use holonomy_core::connection::{
    curvature_abelian, curvature_covariance_check, curvature_nonabelian, gauge_transform_nonabelian,
    GaugeTransform, CURVATURE_STEP,
};
use holonomy_core::field::{AbelianField, MatrixField};
use holonomy_core::linalg::{self, commutator, re, CMatrix, I};
use holonomy_core::model::GateMatrix;

fn paulis() -> [CMatrix; 3] {
    [
        GateMatrix::pauli_x().into_matrix(),
        GateMatrix::pauli_y().into_matrix(),
        GateMatrix::pauli_z().into_matrix(),
    ]
}

fn smooth_field() -> MatrixField {
    let [x, y, z] = paulis();
    MatrixField::new("smooth", &["u", "v"], 2, move |p| {
        Ok(vec![
            &x * re(p[1].sin()) + &z * re(0.4 * p[0]),
            &y * re(p[0] * p[1]) + &x * re(0.3) + &z * re(p[1].cos()),
        ])
    })
}

/// Hermitian generator `Λ(u, v)` scaled by `eps`.
fn lambda(eps: f64) -> impl Fn(&[f64]) -> CMatrix + Clone + Send + Sync {
    let [x, y, z] = paulis();
    move |p: &[f64]| (&x * re(p[0].cos()) + &y * re(p[0] * p[1]) + &z * re(0.5 + p[1])) * re(eps)
}

/// `A' - (A + ∂Λ + i g [Λ, A])` at one point, largest entry.
fn first_order_residual(eps: f64, g: f64, p: &[f64]) -> f64 {
    let field = smooth_field();
    let gen = lambda(eps);
    let gen_s = gen.clone();
    let s = GaugeTransform::new(move |x| linalg::expm_i_hermitian(&gen_s(x), g));
    let transformed = gauge_transform_nonabelian(&field, &s, g);
    let a = field.eval(p).unwrap();
    let a_prime = transformed.eval(p).unwrap();
    let lam = gen(p);
    let h = 1e-6;
    (0..2)
        .map(|mu| {
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[mu] += h;
            lo[mu] -= h;
            let d_lam = (gen(&hi) - gen(&lo)) / re(2.0 * h);
            let predicted = &a[mu] + d_lam + commutator(&lam, &a[mu]) * (I * g);
            linalg::max_diff(&a_prime[mu], &predicted)
        })
        .fold(0.0, f64::max)
}

#[test]
fn infinitesimal_transform_is_first_order() {
    let p = [0.35, -0.7];
    let r1 = first_order_residual(1e-4, 1.0, &p);
    let r2 = first_order_residual(5e-5, 1.0, &p);
    assert!(r1 < 1e-7, "residual {r1}");
    // quadratic in |Λ|
    let order = (r1 / r2).log2();
    assert!((order - 2.0).abs() < 0.2, "order {order}");
    assert!(first_order_residual(1e-4, 0.6, &p) < 1e-7);
}

#[test]
fn covariance_under_point_dependent_unitary() {
    let [x, _, z] = paulis();
    let s = GaugeTransform::new(move |p| linalg::expm_i_hermitian(&(&z * re(p[0]) + &x * re(0.3 * p[1])), 1.0));
    for p in [[0.1, 0.2], [-0.8, 0.5], [1.3, -1.1]] {
        for g in [1.0, 0.5] {
            let r = curvature_covariance_check(&smooth_field(), &s, g, &p, 0, 1, CURVATURE_STEP).unwrap();
            assert!(r <= 1e-5, "p={p:?} g={g} residual {r}");
        }
    }
}

#[test]
fn commuting_components_reduce_entrywise() {
    let [_, _, z] = paulis();
    let a = AbelianField::new("a", &["u", "v"], |p| vec![p[1].powi(2) * p[0], (p[0] * p[1]).sin()]);
    let a2 = a.clone();
    let along_z = MatrixField::new("z", &["u", "v"], 2, move |p| {
        Ok(a2.eval(p)?.into_iter().map(|c| &z * re(c)).collect())
    });
    for p in [[0.2, 0.9], [-1.4, 0.3]] {
        let f = curvature_nonabelian(&along_z, &p, 0, 1, 1.0, CURVATURE_STEP).unwrap();
        let fa = curvature_abelian(&a, &p, 0, 1, CURVATURE_STEP).unwrap();
        assert!((f[(0, 0)] - re(fa)).norm() < 1e-8);
        assert!((f[(1, 1)] + re(fa)).norm() < 1e-8);
        assert!(f[(0, 1)].norm() < 1e-12 && f[(1, 0)].norm() < 1e-12);
    }
}
