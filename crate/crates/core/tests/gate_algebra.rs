use holonomy_core::linalg::{self, CMatrix, C64};
use holonomy_core::model::{qubit, standard_gates, tensor_product, GateMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unitary(rng: &mut ChaCha8Rng) -> GateMatrix {
    let mut h = CMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            h[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    GateMatrix::new(linalg::expm_i_hermitian(&h, 1.0)).unwrap()
}

#[test]
fn mixed_product_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let [a, b, c, d] = std::array::from_fn(|_| random_unitary(&mut rng));
        let lhs = tensor_product(&a, &b).compose(&tensor_product(&c, &d));
        let rhs = tensor_product(&a.compose(&c), &b.compose(&d));
        assert!(linalg::max_diff(lhs.matrix(), rhs.matrix()) <= 1e-12);
    }
}

#[test]
fn involutions_and_basis() {
    let gates = standard_gates(0.9);
    let id4 = GateMatrix::identity(4);
    for (name, g) in &gates {
        if matches!(*name, "CNOT" | "SWAP") {
            assert_eq!(g.compose(g), id4, "{name}");
        }
    }
    let p = GateMatrix::phase(0.9).compose(&GateMatrix::phase(-0.9));
    assert!(linalg::max_diff(p.matrix(), id4.matrix()) == 0.0);
    for (k, (a, b)) in [(false, false), (false, true), (true, false), (true, true)].into_iter().enumerate() {
        let v = tensor_product(&qubit(a), &qubit(b));
        for j in 0..4 {
            assert_eq!(v.as_vector()[j], C64::new(if j == k { 1.0 } else { 0.0 }, 0.0));
        }
    }
}
