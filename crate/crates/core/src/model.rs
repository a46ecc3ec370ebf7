//! Parametrized Hamiltonian families, the closed-form dark states of the
//! restricted (5+1) system, and the gate matrix library.
//!
//! Basis ordering for the (5+1) system is `|e>, |g1>, ..., |g5>`, so the
//! excited level sits at index 0 and `|gk>` at index `k`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, CVector, C64, I};

/// Default central-difference step for Hamiltonian gradients.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Hermiticity tolerance, relative to the largest entry.
const HERMITIAN_TOL: f64 = 1e-12;

/// A point in parameter space: named coordinates in a fixed order.
#[derive(Clone, PartialEq)]
pub struct ParameterPoint {
    names: Arc<[String]>,
    values: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(pairs: &[(&str, f64)]) -> Result<Self> {
        let names: Arc<[String]> = pairs.iter().map(|(n, _)| n.to_string()).collect();
        Self::from_values(names, pairs.iter().map(|(_, v)| *v).collect())
    }

    pub fn from_values(names: Arc<[String]>, values: Vec<f64>) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} names but {} values",
                names.len(),
                values.len()
            )));
        }
        for (n, v) in names.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::NonFinite(n.clone()));
            }
        }
        Ok(ParameterPoint { names, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(self.values[self.index_of(name)?])
    }

    /// Copy of this point with one coordinate replaced.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let idx = self.index_of(name)?;
        self.with_index(idx, value)
    }

    pub fn with_index(&self, idx: usize, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite(self.names[idx].clone()));
        }
        let mut values = self.values.clone();
        values[idx] = value;
        Ok(ParameterPoint {
            names: self.names.clone(),
            values,
        })
    }

    /// Copy of this point with coordinate `idx` shifted by `delta`.
    pub fn shifted(&self, idx: usize, delta: f64) -> Result<Self> {
        self.with_index(idx, self.values[idx] + delta)
    }
}

impl fmt::Debug for ParameterPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.names.iter().zip(self.values.iter()))
            .finish()
    }
}

/// A validated Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&m);
        if defect > HERMITIAN_TOL * linalg::max_abs(&m).max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(HermitianOperator(m))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianOperator(CMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Largest singular value, i.e. max |E|.
    pub fn spectral_norm(&self) -> f64 {
        linalg::singular_values(&self.0)
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &StateVector) -> CVector {
        &self.0 * v.as_vector()
    }

    pub fn expectation(&self, v: &StateVector) -> f64 {
        v.as_vector().dotc(&(&self.0 * v.as_vector())).re
    }
}

/// A complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(v: CVector) -> Self {
        StateVector(v)
    }

    pub fn from_real(entries: &[f64]) -> Self {
        StateVector(CVector::from_iterator(entries.len(), entries.iter().map(|&x| re(x))))
    }

    pub fn from_complex(entries: &[C64]) -> Self {
        StateVector(CVector::from_column_slice(entries))
    }

    /// Unit vector along basis index `k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[k] = re(1.0);
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Self {
        StateVector(self.0.normalize())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        StateVector(&self.0 * factor)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-10
    }
}

impl From<CVector> for StateVector {
    fn from(v: CVector) -> Self {
        StateVector(v)
    }
}

/// A unitary gate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix(CMatrix);

impl GateMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "gate must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = linalg::unitarity_defect(&m);
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
        Ok(GateMatrix(m))
    }

    fn from_real_rows(n: usize, rows: &[f64]) -> Self {
        GateMatrix(CMatrix::from_iterator(
            n,
            n,
            (0..n * n).map(|k| re(rows[(k % n) * n + k / n])),
        ))
    }

    pub fn identity(n: usize) -> Self {
        GateMatrix(CMatrix::identity(n, n))
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> Self {
        GateMatrix(CMatrix::from_row_slice(2, 2, &[re(0.0), -I, I, re(0.0)]))
    }

    pub fn pauli_z() -> Self {
        Self::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn cnot() -> Self {
        #[rustfmt::skip]
        let rows = [
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
        ];
        Self::from_real_rows(4, &rows)
    }

    pub fn swap() -> Self {
        #[rustfmt::skip]
        let rows = [
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ];
        Self::from_real_rows(4, &rows)
    }

    /// Two-qubit phase gate: `exp(i·phi)` on `|11>`, identity elsewhere.
    pub fn phase(phi: f64) -> Self {
        let mut m = CMatrix::identity(4, 4);
        m[(3, 3)] = C64::from_polar(1.0, phi);
        GateMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn compose(&self, other: &GateMatrix) -> GateMatrix {
        GateMatrix(&self.0 * &other.0)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector(&self.0 * v.as_vector())
    }
}

/// `I, σ1, σ2, σ3, CNOT, SWAP, PHASE(phi)` by name.
pub fn standard_gates(phase: f64) -> Vec<(&'static str, GateMatrix)> {
    vec![
        ("I", GateMatrix::identity(2)),
        ("sigma1", GateMatrix::pauli_x()),
        ("sigma2", GateMatrix::pauli_y()),
        ("sigma3", GateMatrix::pauli_z()),
        ("CNOT", GateMatrix::cnot()),
        ("SWAP", GateMatrix::swap()),
        ("PHASE", GateMatrix::phase(phase)),
    ]
}

/// Single-qubit computational basis state `|0>` or `|1>`.
pub fn qubit(bit: bool) -> StateVector {
    StateVector::basis(2, bit as usize)
}

/// Kronecker product of two operands of the same kind.
pub trait TensorProduct {
    fn tensor(&self, other: &Self) -> Self;
}

impl TensorProduct for GateMatrix {
    fn tensor(&self, other: &Self) -> Self {
        GateMatrix(self.0.kronecker(&other.0))
    }
}

impl TensorProduct for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        StateVector(self.0.kronecker(&other.0))
    }
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> T {
    a.tensor(b)
}

type Evaluator = dyn Fn(&[f64]) -> CMatrix + Send + Sync;
type Derivative = dyn Fn(&[f64], usize) -> CMatrix + Send + Sync;

/// A named family `lambda -> H(lambda)` of Hermitian matrices.
#[derive(Clone)]
pub struct HamiltonianFamily {
    id: String,
    dimension: usize,
    schema: Arc<[String]>,
    constants: Vec<(String, f64)>,
    evaluator: Arc<Evaluator>,
    derivative: Option<Arc<Derivative>>,
    fd_step: f64,
}

impl fmt::Debug for HamiltonianFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianFamily")
            .field("id", &self.id)
            .field("dimension", &self.dimension)
            .field("schema", &self.schema)
            .field("constants", &self.constants)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

/// Registry entry describing a built-in family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInfo {
    pub id: &'static str,
    pub dimension: usize,
    pub parameters: &'static [&'static str],
    /// Constants with their default values.
    pub constants: &'static [(&'static str, f64)],
    pub description: &'static str,
}

pub const TWO_LEVEL: &str = "two_level";
pub const DARK_RESTRICTED: &str = "dark_5p1_restricted";
pub const DARK_FULL: &str = "dark_5p1_full";

const DARK_FULL_PARAMS: [&str; 8] = [
    "theta1", "theta2", "theta3", "theta4", "phi2", "phi3", "phi4", "phi5",
];

pub fn registered_families() -> Vec<FamilyInfo> {
    vec![
        FamilyInfo {
            id: TWO_LEVEL,
            dimension: 2,
            parameters: &["r", "phi"],
            constants: &[],
            description: "r [[cos phi, sin phi], [sin phi, -cos phi]]",
        },
        FamilyInfo {
            id: DARK_RESTRICTED,
            dimension: 6,
            parameters: &["theta3", "theta4"],
            constants: &[("epsilon", 1.0), ("omega", 1.0)],
            description: "(5+1) dark-state system with theta1 = theta2 = 0 and all phases zero",
        },
        FamilyInfo {
            id: DARK_FULL,
            dimension: 6,
            parameters: &DARK_FULL_PARAMS,
            constants: &[("epsilon", 1.0), ("omega", 1.0)],
            description: "(5+1) dark-state system over the full spherical parametrization",
        },
    ]
}

fn schema_of(names: &[&str]) -> Arc<[String]> {
    names.iter().map(|s| s.to_string()).collect()
}

impl HamiltonianFamily {
    /// Family with a caller-supplied evaluator. The evaluator receives the
    /// coordinate values in schema order.
    pub fn custom<F>(id: &str, dimension: usize, parameters: &[&str], evaluator: F) -> Self
    where
        F: Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
    {
        HamiltonianFamily {
            id: id.to_string(),
            dimension,
            schema: schema_of(parameters),
            constants: Vec::new(),
            evaluator: Arc::new(evaluator),
            derivative: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Attach an analytic derivative `(values, parameter index) -> dH`.
    pub fn with_derivative<D>(mut self, derivative: D) -> Self
    where
        D: Fn(&[f64], usize) -> CMatrix + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// `H = r [[cos phi, sin phi], [sin phi, -cos phi]]`.
    pub fn two_level() -> Self {
        Self::custom(TWO_LEVEL, 2, &["r", "phi"], |x| {
            let (r, phi) = (x[0], x[1]);
            let (s, c) = phi.sin_cos();
            CMatrix::from_row_slice(2, 2, &[re(r * c), re(r * s), re(r * s), re(-r * c)])
        })
        .with_derivative(|x, k| {
            let (r, phi) = (x[0], x[1]);
            let (s, c) = phi.sin_cos();
            match k {
                0 => CMatrix::from_row_slice(2, 2, &[re(c), re(s), re(s), re(-c)]),
                _ => CMatrix::from_row_slice(2, 2, &[re(-r * s), re(r * c), re(r * c), re(r * s)]),
            }
        })
    }

    /// Dark-state family on the slice theta1 = theta2 = phi_k = 0, so only
    /// Omega3..Omega5 are non-zero and real.
    pub fn dark_restricted(epsilon: f64, omega: f64) -> Self {
        let lift = |x: &[f64]| -> [f64; 8] { [0.0, 0.0, x[0], x[1], 0.0, 0.0, 0.0, 0.0] };
        let mut fam = Self::custom(DARK_RESTRICTED, 6, &["theta3", "theta4"], move |x| {
            dark_hamiltonian(epsilon, &dark_couplings(omega, &lift(x)))
        })
        .with_derivative(move |x, k| {
            dark_coupling_derivative(&dark_coupling_gradient(omega, &lift(x), k + 2))
        });
        fam.constants = vec![("epsilon".into(), epsilon), ("omega".into(), omega)];
        fam
    }

    /// Dark-state family over theta1..theta4 and phi2..phi5.
    pub fn dark_full(epsilon: f64, omega: f64) -> Self {
        let mut fam = Self::custom(DARK_FULL, 6, &DARK_FULL_PARAMS, move |x| {
            dark_hamiltonian(epsilon, &dark_couplings(omega, x.try_into().expect("8 angles")))
        })
        .with_derivative(move |x, k| {
            dark_coupling_derivative(&dark_coupling_gradient(
                omega,
                x.try_into().expect("8 angles"),
                k,
            ))
        });
        fam.constants = vec![("epsilon".into(), epsilon), ("omega".into(), omega)];
        fam
    }

    /// Look up a built-in family. Constants not supplied take their defaults;
    /// unknown constant names are rejected.
    pub fn by_id(id: &str, constants: &[(String, f64)]) -> Result<Self> {
        let infos = registered_families();
        let Some(info) = infos.iter().find(|f| f.id == id) else {
            return Err(Error::UnknownFamily {
                id: id.to_string(),
                registered: infos.iter().map(|f| f.id).collect::<Vec<_>>().join(", "),
            });
        };
        for (name, value) in constants {
            if !info.constants.iter().any(|(c, _)| c == name) {
                return Err(Error::UnknownParameter(format!("{id}.{name}")));
            }
            if !value.is_finite() {
                return Err(Error::NonFinite(name.clone()));
            }
        }
        let get = |name: &str| {
            constants
                .iter()
                .find(|(c, _)| c == name)
                .map(|(_, v)| *v)
                .or_else(|| info.constants.iter().find(|(c, _)| *c == name).map(|(_, v)| *v))
                .expect("registered constant")
        };
        Ok(match id {
            TWO_LEVEL => Self::two_level(),
            DARK_RESTRICTED => Self::dark_restricted(get("epsilon"), get("omega")),
            _ => Self::dark_full(get("epsilon"), get("omega")),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn constants(&self) -> &[(String, f64)] {
        &self.constants
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Point with the given values in schema order.
    pub fn point(&self, values: &[f64]) -> Result<ParameterPoint> {
        ParameterPoint::from_values(self.schema.clone(), values.to_vec())
    }

    fn check_point(&self, point: &ParameterPoint) -> Result<()> {
        if point.names() != &*self.schema {
            return Err(Error::SchemaMismatch {
                expected: self.schema.to_vec(),
                found: point.names().to_vec(),
            });
        }
        Ok(())
    }

    fn parameter_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    /// `H(point)`.
    pub fn hamiltonian(&self, point: &ParameterPoint) -> Result<HermitianOperator> {
        self.check_point(point)?;
        let m = (self.evaluator)(point.values());
        if m.nrows() != self.dimension || m.ncols() != self.dimension {
            return Err(Error::Dimension(format!(
                "family `{}` produced a {}x{} matrix, expected {}",
                self.id,
                m.nrows(),
                m.ncols(),
                self.dimension
            )));
        }
        HermitianOperator::new(m)
    }

    /// `dH/d(param)`: analytic when the family carries a derivative, central
    /// differences with the family step otherwise.
    pub fn gradient(&self, point: &ParameterPoint, param: &str) -> Result<HermitianOperator> {
        self.check_point(point)?;
        let k = self.parameter_index(param)?;
        match &self.derivative {
            Some(d) => HermitianOperator::new(d(point.values(), k)),
            None => self.gradient_fd(point, param, self.fd_step),
        }
    }

    /// Central finite-difference `dH/d(param)` with step `h`.
    pub fn gradient_fd(&self, point: &ParameterPoint, param: &str, h: f64) -> Result<HermitianOperator> {
        self.check_point(point)?;
        let k = self.parameter_index(param)?;
        let plus = self.hamiltonian(&point.shifted(k, h)?)?;
        let minus = self.hamiltonian(&point.shifted(k, -h)?)?;
        let mut d = (plus.into_matrix() - minus.into_matrix()) / re(2.0 * h);
        // symmetrise away rounding
        d = (&d + d.adjoint()) * re(0.5);
        HermitianOperator::new(d)
    }
}

/// Couplings `Omega_1..Omega_5` from the spherical angles
/// `[theta1, theta2, theta3, theta4, phi2, phi3, phi4, phi5]`.
pub fn dark_couplings(omega: f64, angles: &[f64; 8]) -> [C64; 5] {
    let [t1, t2, t3, t4, p2, p3, p4, p5] = *angles;
    let phase = |p: f64| C64::from_polar(1.0, -p);
    let c12 = t1.cos() * t2.cos();
    [
        re(omega * t1.sin()),
        omega * t1.cos() * t2.sin() * phase(p2),
        omega * c12 * t3.sin() * phase(p3),
        omega * c12 * t3.cos() * t4.sin() * phase(p4),
        omega * c12 * t3.cos() * t4.cos() * phase(p5),
    ]
}

/// Partial derivatives of the five couplings with respect to angle `k`.
fn dark_coupling_gradient(omega: f64, angles: &[f64; 8], k: usize) -> [C64; 5] {
    let [t1, t2, t3, t4, p2, p3, p4, p5] = *angles;
    let phase = |p: f64| C64::from_polar(1.0, -p);
    let (s1, c1) = t1.sin_cos();
    let (s2, c2) = t2.sin_cos();
    let (s3, c3) = t3.sin_cos();
    let (s4, c4) = t4.sin_cos();
    // each coupling is a product of trig factors times a phase; differentiate
    // the factor that depends on angle k
    let z = re(0.0);
    match k {
        0 => [
            re(omega * c1),
            omega * -s1 * s2 * phase(p2),
            omega * -s1 * c2 * s3 * phase(p3),
            omega * -s1 * c2 * c3 * s4 * phase(p4),
            omega * -s1 * c2 * c3 * c4 * phase(p5),
        ],
        1 => [
            z,
            omega * c1 * c2 * phase(p2),
            omega * c1 * -s2 * s3 * phase(p3),
            omega * c1 * -s2 * c3 * s4 * phase(p4),
            omega * c1 * -s2 * c3 * c4 * phase(p5),
        ],
        2 => [
            z,
            z,
            omega * c1 * c2 * c3 * phase(p3),
            omega * c1 * c2 * -s3 * s4 * phase(p4),
            omega * c1 * c2 * -s3 * c4 * phase(p5),
        ],
        3 => [
            z,
            z,
            z,
            omega * c1 * c2 * c3 * c4 * phase(p4),
            omega * c1 * c2 * c3 * -s4 * phase(p5),
        ],
        _ => {
            let all = dark_couplings(omega, angles);
            let mut g = [z; 5];
            // d/dphi_j of Omega_j = -i Omega_j
            let j = k - 3;
            g[j] = -I * all[j];
            g
        }
    }
}

/// Coupling matrix: `epsilon` on `|e><e|`, couplings in the first
/// column and their conjugates in the first row.
pub fn dark_hamiltonian(epsilon: f64, couplings: &[C64; 5]) -> CMatrix {
    let mut h = CMatrix::zeros(6, 6);
    h[(0, 0)] = re(epsilon);
    for (k, w) in couplings.iter().enumerate() {
        h[(k + 1, 0)] = *w;
        h[(0, k + 1)] = w.conj();
    }
    h
}

fn dark_coupling_derivative(d_couplings: &[C64; 5]) -> CMatrix {
    dark_hamiltonian(0.0, d_couplings)
}

/// The four zero-energy states of the restricted family, in closed form.
pub fn dark_states(theta3: f64, theta4: f64) -> [StateVector; 4] {
    let (s3, c3) = theta3.sin_cos();
    let (s4, c4) = theta4.sin_cos();
    [
        StateVector::basis(6, 1),
        StateVector::basis(6, 2),
        StateVector::from_real(&[0.0, 0.0, 0.0, c3, -s3 * s4, -s3 * c4]),
        StateVector::from_real(&[0.0, 0.0, 0.0, 0.0, -c4, s4]),
    ]
}

/// Closed-form partial derivatives of [`dark_states`]: index 0 is d/dtheta3,
/// index 1 is d/dtheta4.
pub fn dark_state_derivatives(theta3: f64, theta4: f64) -> [[StateVector; 4]; 2] {
    let (s3, c3) = theta3.sin_cos();
    let (s4, c4) = theta4.sin_cos();
    let zero = StateVector::from_real(&[0.0; 6]);
    [
        [
            zero.clone(),
            zero.clone(),
            StateVector::from_real(&[0.0, 0.0, 0.0, -s3, -c3 * s4, -c3 * c4]),
            zero.clone(),
        ],
        [
            zero.clone(),
            zero,
            StateVector::from_real(&[0.0, 0.0, 0.0, 0.0, -s3 * c4, s3 * s4]),
            StateVector::from_real(&[0.0, 0.0, 0.0, 0.0, s4, c4]),
        ],
    ]
}

/// Eigenvectors of the two-level family in the double-valued real gauge:
/// `(chi_plus, chi_minus)` for energies `+r` and `-r`.
pub fn two_level_eigenstates(phi: f64) -> (StateVector, StateVector) {
    let (s, c) = (phi / 2.0).sin_cos();
    (
        StateVector::from_real(&[c, s]),
        StateVector::from_real(&[-s, c]),
    )
}

/// `|X_-> = |chi_-> exp(i phi/2)`, single-valued around the phi circle.
pub fn two_level_single_valued(phi: f64) -> StateVector {
    two_level_eigenstates(phi)
        .1
        .scaled(C64::from_polar(1.0, phi / 2.0))
}
