//! Berry and Wilczek-Zee connections, Abelian and non-Abelian curvatures, and
//! gauge transformations.
//!
//! Two conventions coexist. The raw Wilczek-Zee matrix `<psi_a|d psi_b>` is
//! anti-Hermitian; the Hermitian potential is `(1/i)<psi_a|d psi_b>`, which is
//! what [`MatrixField`] and the Berry connection carry. Curvatures follow
//! `f_{mu nu} = d_nu a_mu - d_mu a_nu`, the opposite of the usual
//! electromagnetic sign.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{AbelianField, MatrixField};
use crate::linalg::{self, re, CMatrix, CVector, C64, I};
use crate::model::{dark_state_derivatives, dark_states, HamiltonianFamily, ParameterPoint};
use crate::spectral::{self, DEFAULT_TAU_DEG};

/// Default step for derivatives of connection fields.
pub const CURVATURE_STEP: f64 = 1e-4;
/// Default step for five-point derivatives of frames and gauge functions.
pub const FRAME_STEP: f64 = 1e-3;

const ORTHONORMAL_TOL: f64 = 1e-10;
const EIGENSPACE_TOL: f64 = 1e-8;

/// Fourth-order central difference of a matrix-valued function along `mu`.
pub fn five_point<F>(f: F, x: &[f64], mu: usize, h: f64) -> Result<CMatrix>
where
    F: Fn(&[f64]) -> Result<CMatrix>,
{
    let at = |k: f64| {
        let mut y = x.to_vec();
        y[mu] += k * h;
        f(&y)
    };
    let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
    Ok((m2 - p2 + (p1 - m1) * re(8.0)) / re(12.0 * h))
}

fn central<F>(f: F, x: &[f64], mu: usize, h: f64) -> Result<CMatrix>
where
    F: Fn(&[f64]) -> Result<CMatrix>,
{
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[mu] += h;
    minus[mu] -= h;
    Ok((f(&plus)? - f(&minus)?) / re(2.0 * h))
}

type FrameFn = dyn Fn(&[f64]) -> CMatrix + Send + Sync;
type FrameDerivFn = dyn Fn(&[f64], usize) -> CMatrix + Send + Sync;

/// A smooth choice of `n x k` orthonormal frame over parameter space.
#[derive(Clone)]
pub struct Section {
    names: Arc<[String]>,
    eval: Arc<FrameFn>,
    derivative: Option<Arc<FrameDerivFn>>,
    step: f64,
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Section")
            .field("names", &self.names)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("step", &self.step)
            .finish()
    }
}

impl Section {
    pub fn new<F>(names: &[&str], eval: F) -> Self
    where
        F: Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
    {
        Section {
            names: names.iter().map(|s| s.to_string()).collect(),
            eval: Arc::new(eval),
            derivative: None,
            step: FRAME_STEP,
        }
    }

    pub fn with_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(&[f64], usize) -> CMatrix + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Drop any analytic derivative so frames are differenced numerically.
    pub fn numerical(mut self, step: f64) -> Self {
        self.derivative = None;
        self.step = step;
        self
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn frame(&self, x: &[f64]) -> CMatrix {
        (self.eval)(x)
    }

    pub fn derivative(&self, x: &[f64], mu: usize) -> CMatrix {
        match &self.derivative {
            Some(d) => d(x, mu),
            None => five_point(|y| Ok((self.eval)(y)), x, mu, self.step)
                .expect("frame evaluation is infallible"),
        }
    }
}

/// The four closed-form dark states over `(theta3, theta4)`.
pub fn dark_state_section() -> Section {
    let cols = |states: &[crate::model::StateVector]| {
        spectral::states_to_matrix(states)
    };
    Section::new(&["theta3", "theta4"], move |x| cols(&dark_states(x[0], x[1])))
        .with_derivative(move |x, mu| cols(&dark_state_derivatives(x[0], x[1])[mu]))
}

/// Raw matrix `<psi_a|d_mu psi_b>` of a section, without eigenspace checks.
pub fn section_connection_raw(section: &Section, x: &[f64], mu: usize) -> Result<CMatrix> {
    if mu >= section.names.len() {
        return Err(Error::InvalidArgument(format!("direction {mu} out of range")));
    }
    let v = section.frame(x);
    let defect = linalg::unitarity_defect(&v);
    if defect > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal(defect));
    }
    Ok(v.adjoint() * section.derivative(x, mu))
}

/// `(1/i)<psi|d_mu psi>` of a one-dimensional section.
pub fn section_connection(section: &Section, x: &[f64], mu: usize) -> Result<f64> {
    let raw = section_connection_raw(section, x, mu)?;
    if raw.ncols() != 1 {
        return Err(Error::Dimension(format!(
            "Abelian connection needs a one-dimensional section, got {}",
            raw.ncols()
        )));
    }
    Ok((-I * raw[(0, 0)]).re)
}

fn direction_index(names: &[String], direction: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == direction)
        .ok_or_else(|| Error::UnknownParameter(direction.to_string()))
}

/// Check that the columns of `v` are orthonormal and span a degenerate
/// eigenspace of `h`.
pub fn check_eigenspace(h: &CMatrix, v: &CMatrix) -> Result<f64> {
    let defect = linalg::unitarity_defect(v);
    if defect > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal(defect));
    }
    let projected = v.adjoint() * h * v;
    let k = v.ncols() as f64;
    let energy = projected.trace().re / k;
    let residual = (h * v - v * re(energy)).norm();
    let scale = linalg::max_abs(h).max(1.0);
    if residual > EIGENSPACE_TOL * scale {
        return Err(Error::NotEigenspace(residual));
    }
    Ok(energy)
}

/// Wilczek-Zee matrix `<psi_a|d_mu psi_b>` (anti-Hermitian) in the gauge the
/// section carries.
pub fn wz_connection(
    family: &HamiltonianFamily,
    section: &Section,
    point: &ParameterPoint,
    direction: &str,
) -> Result<CMatrix> {
    if section.names() != point.names() {
        return Err(Error::SchemaMismatch {
            expected: point.names().to_vec(),
            found: section.names().to_vec(),
        });
    }
    let mu = direction_index(section.names(), direction)?;
    let h = family.hamiltonian(point)?;
    check_eigenspace(h.matrix(), &section.frame(point.values()))?;
    section_connection_raw(section, point.values(), mu)
}

/// `(1/i)` times [`wz_connection`]: the Hermitian potential.
pub fn wz_connection_hermitian(
    family: &HamiltonianFamily,
    section: &Section,
    point: &ParameterPoint,
    direction: &str,
) -> Result<CMatrix> {
    Ok(wz_connection(family, section, point, direction)? * (-I))
}

/// Hermitian Wilczek-Zee potential as a field over the section's parameters.
pub fn wilczek_zee_field(family: &HamiltonianFamily, section: &Section) -> Result<MatrixField> {
    if section.names() != family.schema() {
        return Err(Error::SchemaMismatch {
            expected: family.schema().to_vec(),
            found: section.names().to_vec(),
        });
    }
    let names: Vec<&str> = section.names.iter().map(|s| s.as_str()).collect();
    let k = section.frame(&vec![0.0; names.len()]).ncols();
    let family = family.clone();
    let section = section.clone();
    Ok(MatrixField::new("wilczek-zee", &names, k, move |x| {
        let point = family.point(x)?;
        check_eigenspace(family.hamiltonian(&point)?.matrix(), &section.frame(x))?;
        (0..x.len())
            .map(|mu| Ok(section_connection_raw(&section, x, mu)? * (-I)))
            .collect()
    }))
}

type PhaseFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Extra phase `alpha(lambda)` multiplying a state, `psi -> psi e^{i alpha}`.
#[derive(Clone)]
pub struct GaugePhase {
    eval: Arc<PhaseFn>,
}

impl fmt::Debug for GaugePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GaugePhase")
    }
}

impl GaugePhase {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        GaugePhase { eval: Arc::new(f) }
    }

    /// `alpha = coefficient · lambda[index]`.
    pub fn linear(index: usize, coefficient: f64) -> Self {
        Self::new(move |x| coefficient * x[index])
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn gradient(&self, x: &[f64], mu: usize) -> f64 {
        five_point(|y| Ok(CMatrix::from_element(1, 1, re(self.value(y)))), x, mu, FRAME_STEP)
            .expect("phase evaluation is infallible")[(0, 0)]
            .re
    }
}

/// Phase convention for a non-degenerate eigenvector.
#[derive(Debug, Clone)]
pub enum Gauge {
    /// Parallel-transport gauge: `<psi|d psi> = 0` locally.
    Transport,
    /// Component `component` real and positive.
    Anchored { component: usize },
    /// Anchored, then multiplied by `e^{i alpha}`.
    Phased { component: usize, phase: GaugePhase },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// First-order perturbation theory with `dH/d lambda`.
    Analytic,
    FiniteDifference { step: f64 },
}

fn selected_state(
    family: &HamiltonianFamily,
    point: &ParameterPoint,
    index: usize,
) -> Result<(spectral::EigenFrame, CVector)> {
    let frame = spectral::decompose_at(family, point, DEFAULT_TAU_DEG)?;
    if index >= frame.dim() {
        return Err(Error::InvalidArgument(format!(
            "eigen index {index} out of range for dimension {}",
            frame.dim()
        )));
    }
    let size = frame.group_of(index).len();
    if size > 1 {
        return Err(Error::Degenerate { index, size });
    }
    let v = frame.eigenvectors.column(index).into_owned();
    Ok((frame, v))
}

fn anchor(v: &CVector, component: usize) -> Result<CVector> {
    if component >= v.len() {
        return Err(Error::InvalidArgument(format!(
            "anchor component {component} out of range"
        )));
    }
    let c = v[component];
    if c.norm() < 1e-8 {
        return Err(Error::GaugeSingular {
            component,
            magnitude: c.norm(),
        });
    }
    Ok(v * (c.conj() / c.norm()))
}

/// State `index` of the family at `x`, in `gauge`. For the transport gauge the
/// phase is fixed against `reference`.
fn gauged_state(
    family: &HamiltonianFamily,
    x: &[f64],
    index: usize,
    gauge: &Gauge,
    reference: Option<&CVector>,
) -> Result<CVector> {
    let (_, v) = selected_state(family, &family.point(x)?, index)?;
    match gauge {
        Gauge::Transport => match reference {
            Some(r) => {
                let o = r.dotc(&v);
                if o.norm() < spectral::DEFAULT_TAU_OVERLAP {
                    return Err(Error::NearOrthogonal {
                        overlap: o.norm(),
                        threshold: spectral::DEFAULT_TAU_OVERLAP,
                    });
                }
                Ok(v * (o.conj() / o.norm()))
            }
            None => Ok(v),
        },
        Gauge::Anchored { component } => anchor(&v, *component),
        Gauge::Phased { component, phase } => {
            Ok(anchor(&v, *component)? * C64::from_polar(1.0, phase.value(x)))
        }
    }
}

/// Berry connection `(1/i)<psi|d_mu psi>` of eigenstate `index` (ascending
/// order) in the requested gauge.
pub fn berry_connection(
    family: &HamiltonianFamily,
    point: &ParameterPoint,
    index: usize,
    direction: &str,
    gauge: &Gauge,
    method: Method,
) -> Result<f64> {
    let mu = direction_index(family.schema(), direction)?;
    match method {
        Method::Analytic => {
            let (frame, v) = selected_state(family, point, index)?;
            let v = match gauge {
                Gauge::Transport => v,
                Gauge::Anchored { component } | Gauge::Phased { component, .. } => {
                    anchor(&v, *component)?
                }
            };
            let dh = family.gradient(point, direction)?;
            let dh_v = dh.matrix() * &v;
            let e_n = frame.eigenvalues[index];
            let mut u = CVector::zeros(v.len());
            for m in 0..frame.dim() {
                if m == index {
                    continue;
                }
                let vm = frame.eigenvectors.column(m);
                u += vm * (vm.dotc(&dh_v) / re(e_n - frame.eigenvalues[m]));
            }
            // u is orthogonal to v: this is the transport-gauge derivative
            let mut a = (-I * v.dotc(&u)).re;
            if let Gauge::Anchored { component } | Gauge::Phased { component, .. } = gauge {
                a += -u[*component].im / v[*component].re;
            }
            if let Gauge::Phased { phase, .. } = gauge {
                a += phase.gradient(point.values(), mu);
            }
            Ok(a)
        }
        Method::FiniteDifference { step } => {
            let x = point.values();
            let centre = gauged_state(family, x, index, gauge, None)?;
            let shifted = |d: f64| {
                let mut y = x.to_vec();
                y[mu] += d;
                gauged_state(family, &y, index, gauge, Some(&centre))
            };
            let (plus, minus) = (shifted(step)?, shifted(-step)?);
            Ok((centre.dotc(&plus) - centre.dotc(&minus)).im / (2.0 * step))
        }
    }
}

/// `f_{mu nu} = d_nu a_mu - d_mu a_nu` by central differences.
pub fn curvature_abelian(
    field: &AbelianField,
    x: &[f64],
    mu: usize,
    nu: usize,
    h: f64,
) -> Result<f64> {
    field.check_dim(x)?;
    let d = |comp: usize, dir: usize| -> Result<f64> {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[dir] += h;
        m[dir] -= h;
        Ok((field.eval(&p)?[comp] - field.eval(&m)?[comp]) / (2.0 * h))
    };
    if mu == nu {
        return Ok(0.0);
    }
    Ok(d(mu, nu)? - d(nu, mu)?)
}

/// `F_{mu nu} = d_nu A_mu - d_mu A_nu + i g [A_mu, A_nu]`.
pub fn curvature_nonabelian(
    field: &MatrixField,
    x: &[f64],
    mu: usize,
    nu: usize,
    g: f64,
    h: f64,
) -> Result<CMatrix> {
    let a = field.eval(x)?;
    if mu >= a.len() || nu >= a.len() {
        return Err(Error::InvalidArgument(format!(
            "directions ({mu}, {nu}) out of range for {} components",
            a.len()
        )));
    }
    if a[mu].shape() != a[nu].shape() {
        return Err(Error::Dimension(format!(
            "components {mu} and {nu} have shapes {:?} and {:?}",
            a[mu].shape(),
            a[nu].shape()
        )));
    }
    let d_nu_a_mu = central(|y| Ok(field.eval(y)?.swap_remove(mu)), x, nu, h)?;
    let d_mu_a_nu = central(|y| Ok(field.eval(y)?.swap_remove(nu)), x, mu, h)?;
    Ok(d_nu_a_mu - d_mu_a_nu + linalg::commutator(&a[mu], &a[nu]) * (I * g))
}

/// `a' = a + grad alpha`, with a five-point gradient.
pub fn gauge_transform_abelian<F>(field: &AbelianField, alpha: F) -> AbelianField
where
    F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    let names: Vec<&str> = field.names().iter().map(|s| s.as_str()).collect();
    let phase = GaugePhase::new(alpha);
    let n = names.len();
    let gradient = AbelianField::new("gradient", &names, move |x| {
        (0..n).map(|mu| phase.gradient(x, mu)).collect()
    });
    field.plus(&gradient).expect("same schema")
}

type UnitaryFn = dyn Fn(&[f64]) -> CMatrix + Send + Sync;

/// Point-dependent unitary `S(lambda)`.
#[derive(Clone)]
pub struct GaugeTransform {
    eval: Arc<UnitaryFn>,
    step: f64,
}

impl fmt::Debug for GaugeTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeTransform").field("step", &self.step).finish()
    }
}

impl GaugeTransform {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
    {
        GaugeTransform {
            eval: Arc::new(f),
            step: FRAME_STEP,
        }
    }

    /// Step of the five-point derivative of `S`.
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn constant(s: CMatrix) -> Self {
        Self::new(move |_| s.clone())
    }

    /// `S = exp(i g alpha)` in one dimension.
    pub fn abelian<F>(alpha: F, g: f64) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(move |x| CMatrix::from_element(1, 1, C64::from_polar(1.0, g * alpha(x))))
    }

    /// `S(x)`, checked for unitarity.
    pub fn at(&self, x: &[f64]) -> Result<CMatrix> {
        let s = (self.eval)(x);
        let defect = linalg::unitarity_defect(&s);
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
        Ok(s)
    }

    pub fn derivative(&self, x: &[f64], mu: usize) -> Result<CMatrix> {
        five_point(|y| Ok((self.eval)(y)), x, mu, self.step)
    }
}

/// `A'_mu = S A_mu S^-1 - (i/g)(d_mu S) S^-1`.
pub fn gauge_transform_nonabelian(
    field: &MatrixField,
    s: &GaugeTransform,
    g: f64,
) -> MatrixField {
    let names: Vec<&str> = field.names().iter().map(|n| n.as_str()).collect();
    let (inner, s) = (field.clone(), s.clone());
    MatrixField::new(
        &format!("{}'", field.label()),
        &names,
        field.dim(),
        move |x| {
            let u = s.at(x)?;
            if u.nrows() != inner.dim() {
                return Err(Error::Dimension(format!(
                    "gauge transform is {}x{}, field is {}x{}",
                    u.nrows(),
                    u.ncols(),
                    inner.dim(),
                    inner.dim()
                )));
            }
            let u_inv = u.adjoint();
            inner
                .eval(x)?
                .into_iter()
                .enumerate()
                .map(|(mu, a)| {
                    let ds = s.derivative(x, mu)?;
                    Ok(&u * a * &u_inv - ds * &u_inv * (I / g))
                })
                .collect()
        },
    )
}

/// Frobenius norm of `F'_{mu nu} - S F_{mu nu} S^-1`.
pub fn curvature_covariance_check(
    field: &MatrixField,
    s: &GaugeTransform,
    g: f64,
    x: &[f64],
    mu: usize,
    nu: usize,
    h: f64,
) -> Result<f64> {
    let f = curvature_nonabelian(field, x, mu, nu, g, h)?;
    let transformed = gauge_transform_nonabelian(field, s, g);
    let f_prime = curvature_nonabelian(&transformed, x, mu, nu, g, h)?;
    let u = s.at(x)?;
    Ok((f_prime - &u * f * u.adjoint()).norm())
}
