//! Paths and surfaces in parameter space, Abelian line and surface integrals,
//! path-ordered exponentials, the Aharonov-Bohm solenoid, Schrödinger
//! evolution and the dynamical/geometric phase split.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::connection::gauge_transform_abelian;
use crate::error::{Error, Result};
use crate::field::{AbelianField, MatrixField};
use crate::linalg::{self, re, wrap_phase, CMatrix, CVector, C64};
use crate::model::{HamiltonianFamily, ParameterPoint};
use crate::spectral::{frame_path, FramePathOptions, Selection};

const CLOSURE_TOL: f64 = 1e-12;

type CurveFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum Shape {
    Polyline(Vec<Vec<f64>>),
    Curve(Arc<CurveFn>),
}

/// A curve in parameter space: a polyline through waypoints, or an analytic
/// curve `t -> lambda(t)` on `[0, 1]`.
#[derive(Clone)]
pub struct ParamPath {
    names: Arc<[String]>,
    shape: Shape,
    closed: bool,
    /// Parameter that winds by a full period along a closed curve.
    cyclic: Option<(usize, f64)>,
}

impl fmt::Debug for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("ParamPath");
        d.field("names", &self.names).field("closed", &self.closed);
        match &self.shape {
            Shape::Polyline(p) => d.field("waypoints", p),
            Shape::Curve(_) => d.field("curve", &"<fn>"),
        };
        d.field("cyclic", &self.cyclic).finish()
    }
}

fn to_names<S: AsRef<str>>(names: &[S]) -> Arc<[String]> {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl ParamPath {
    /// Polyline through `points`. A closed path must end where it starts.
    pub fn waypoints<S: AsRef<str>>(names: &[S], points: Vec<Vec<f64>>, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "need at least 2 waypoints, got {}",
                points.len()
            )));
        }
        for (k, p) in points.iter().enumerate() {
            if p.len() != names.len() {
                return Err(Error::InvalidPath(format!(
                    "waypoint {k} has {} coordinates, expected {}",
                    p.len(),
                    names.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPath(format!("waypoint {k} is not finite")));
            }
        }
        let last = points.len() - 1;
        if closed && distance(&points[0], &points[last]) > CLOSURE_TOL {
            return Err(Error::InvalidPath(format!(
                "closed path: waypoint {last} {:?} differs from waypoint 0 {:?}",
                points[last], points[0]
            )));
        }
        Ok(ParamPath {
            names: to_names(names),
            shape: Shape::Polyline(points),
            closed,
            cyclic: None,
        })
    }

    /// Analytic curve on `t in [0, 1]`.
    pub fn curve<S, F>(names: &[S], curve: F, closed: bool) -> Result<Self>
    where
        S: AsRef<str>,
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        let (a, b) = (curve(0.0), curve(1.0));
        if a.len() != names.len() {
            return Err(Error::InvalidPath(format!(
                "curve has {} coordinates, expected {}",
                a.len(),
                names.len()
            )));
        }
        if closed && distance(&a, &b) > CLOSURE_TOL {
            return Err(Error::InvalidPath(format!(
                "closed curve ends at {b:?}, starts at {a:?}"
            )));
        }
        Ok(ParamPath {
            names: to_names(names),
            shape: Shape::Curve(Arc::new(curve)),
            closed,
            cyclic: None,
        })
    }

    /// Loop that advances `param` from `start` by one `period` with the other
    /// coordinates held at `base`.
    pub fn cyclic_sweep<S: AsRef<str>>(
        names: &[S],
        base: &[f64],
        param: &str,
        start: f64,
        period: f64,
    ) -> Result<Self> {
        let names = to_names(names);
        let idx = names
            .iter()
            .position(|n| n == param)
            .ok_or_else(|| Error::UnknownParameter(param.to_string()))?;
        if base.len() != names.len() {
            return Err(Error::InvalidPath(format!(
                "base point has {} coordinates, expected {}",
                base.len(),
                names.len()
            )));
        }
        if !(period.is_finite() && period != 0.0 && start.is_finite()) {
            return Err(Error::InvalidPath(format!("bad sweep {start} + {period}")));
        }
        let base = base.to_vec();
        Ok(ParamPath {
            names,
            shape: Shape::Curve(Arc::new(move |t| {
                let mut p = base.clone();
                p[idx] = start + t * period;
                p
            })),
            closed: true,
            cyclic: Some((idx, period)),
        })
    }

    /// Counterclockwise circle in the `(p1, p2)` plane.
    pub fn circle<S: AsRef<str>>(
        names: &[S],
        p1: &str,
        p2: &str,
        center: (f64, f64),
        radius: f64,
        base: &[f64],
    ) -> Result<Self> {
        let names = to_names(names);
        let (i, j) = (Self::find(&names, p1)?, Self::find(&names, p2)?);
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidPath(format!("radius must be positive, got {radius}")));
        }
        let base = base.to_vec();
        let mut path = Self::curve(
            &names,
            move |t| {
                let mut p = base.clone();
                let (s, c) = (TAU * t).sin_cos();
                p[i] = center.0 + radius * c;
                p[j] = center.1 + radius * s;
                p
            },
            false,
        )?;
        path.closed = true;
        Ok(path)
    }

    /// Counterclockwise rectangle `[a1, b1] x [a2, b2]` in the `(p1, p2)`
    /// plane, starting at `(a1, a2)`.
    pub fn rectangle<S: AsRef<str>>(
        names: &[S],
        p1: &str,
        (a1, b1): (f64, f64),
        p2: &str,
        (a2, b2): (f64, f64),
        base: &[f64],
    ) -> Result<Self> {
        let names = to_names(names);
        let (i, j) = (Self::find(&names, p1)?, Self::find(&names, p2)?);
        let corner = |x: f64, y: f64| {
            let mut p = base.to_vec();
            p[i] = x;
            p[j] = y;
            p
        };
        Self::waypoints(
            &names,
            vec![
                corner(a1, a2),
                corner(b1, a2),
                corner(b1, b2),
                corner(a1, b2),
                corner(a1, a2),
            ],
            true,
        )
    }

    fn find(names: &[String], p: &str) -> Result<usize> {
        names
            .iter()
            .position(|n| n == p)
            .ok_or_else(|| Error::UnknownParameter(p.to_string()))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Winding parameter and period, if the path was built as a sweep.
    pub fn cyclic(&self) -> Option<(usize, f64)> {
        self.cyclic
    }

    fn polyline_counts(points: &[Vec<f64>], steps: usize) -> Vec<usize> {
        let lengths: Vec<f64> = points.windows(2).map(|w| distance(&w[0], &w[1])).collect();
        let total: f64 = lengths.iter().sum();
        lengths
            .iter()
            .map(|l| {
                let share = if total > 0.0 { l / total } else { 1.0 / lengths.len() as f64 };
                ((steps as f64 * share).round() as usize).max(1)
            })
            .collect()
    }

    /// Points along the path, both ends included. Polylines spread `steps`
    /// over their legs in proportion to length, at least one per leg.
    pub fn discretize(&self, steps: usize) -> Result<Vec<Vec<f64>>> {
        if steps == 0 {
            return Err(Error::InvalidArgument("step count must be at least 1".into()));
        }
        Ok(match &self.shape {
            Shape::Polyline(points) => {
                let counts = Self::polyline_counts(points, steps);
                let mut out = vec![points[0].clone()];
                for (w, &n) in points.windows(2).zip(&counts) {
                    for s in 1..=n {
                        let t = s as f64 / n as f64;
                        out.push(w[0].iter().zip(&w[1]).map(|(a, b)| a + t * (b - a)).collect());
                    }
                }
                if self.closed {
                    *out.last_mut().unwrap() = points[0].clone();
                }
                out
            }
            Shape::Curve(f) => {
                let mut out: Vec<Vec<f64>> =
                    (0..=steps).map(|k| f(k as f64 / steps as f64)).collect();
                if self.closed && self.cyclic.is_none() {
                    out[steps] = out[0].clone();
                }
                out
            }
        })
    }

    pub fn points(&self, steps: usize) -> Result<Vec<ParameterPoint>> {
        self.discretize(steps)?
            .into_iter()
            .map(|v| ParameterPoint::from_values(self.names.clone(), v))
            .collect()
    }

    /// `(midpoint, displacement)` per segment. Curves are sampled at the
    /// parameter midpoint.
    pub fn segments(&self, steps: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let pts = self.discretize(steps)?;
        let n = pts.len() - 1;
        Ok((0..n)
            .map(|k| {
                let dx: Vec<f64> = pts[k + 1].iter().zip(&pts[k]).map(|(b, a)| b - a).collect();
                let mid = match &self.shape {
                    Shape::Curve(f) => f((k as f64 + 0.5) / n as f64),
                    Shape::Polyline(_) => {
                        pts[k].iter().zip(&pts[k + 1]).map(|(a, b)| 0.5 * (a + b)).collect()
                    }
                };
                (mid, dx)
            })
            .collect())
    }

    fn check_names(&self, names: &[String]) -> Result<()> {
        if *self.names != *names {
            return Err(Error::SchemaMismatch {
                expected: names.to_vec(),
                found: self.names.to_vec(),
            });
        }
        Ok(())
    }
}

/// Rectangular grid over two parameters, others held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatch {
    pub names: [String; 2],
    pub range1: (f64, f64),
    pub range2: (f64, f64),
    pub cells: (usize, usize),
    pub fixed: Vec<(String, f64)>,
}

impl SurfacePatch {
    pub fn new(
        p1: &str,
        range1: (f64, f64),
        p2: &str,
        range2: (f64, f64),
        cells: (usize, usize),
        fixed: Vec<(String, f64)>,
    ) -> Result<Self> {
        if cells.0 == 0 || cells.1 == 0 {
            return Err(Error::InvalidArgument(format!("cell counts must be positive, got {cells:?}")));
        }
        let bounds = [range1.0, range1.1, range2.0, range2.1];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument(format!("bounds must be finite, got {bounds:?}")));
        }
        Ok(SurfacePatch {
            names: [p1.to_string(), p2.to_string()],
            range1,
            range2,
            cells,
            fixed,
        })
    }

    /// Coordinate names in the order integrands receive them.
    pub fn point_names(&self) -> Vec<String> {
        let mut v = self.names.to_vec();
        v.extend(self.fixed.iter().map(|(n, _)| n.clone()));
        v
    }

    fn point(&self, x: f64, y: f64) -> Vec<f64> {
        let mut v = vec![x, y];
        v.extend(self.fixed.iter().map(|(_, val)| *val));
        v
    }

    /// Counterclockwise boundary, oriented consistently with the surface
    /// element `d p1 ^ d p2`.
    pub fn boundary(&self) -> Result<ParamPath> {
        let names = self.point_names();
        let base = self.point(0.0, 0.0);
        ParamPath::rectangle(&names, &self.names[0], self.range1, &self.names[1], self.range2, &base)
    }
}

/// `e · sum a(mid)·dx` along the path (midpoint rule).
pub fn line_integral_abelian(field: &AbelianField, path: &ParamPath, charge: f64, steps: usize) -> Result<f64> {
    path.check_names(field.names())?;
    for p in path.discretize(steps)? {
        field.check_regular(&p)?;
    }
    let terms = path
        .segments(steps)?
        .into_par_iter()
        .map(|(mid, dx)| {
            let a = field.eval(&mid)?;
            Ok(a.iter().zip(&dx).map(|(ai, di)| ai * di).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(charge * terms.iter().sum::<f64>())
}

/// Midpoint-rule `∬ f dp1 dp2` over the patch.
pub fn surface_integral_abelian<F>(integrand: F, patch: &SurfacePatch) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (n1, n2) = patch.cells;
    let h1 = (patch.range1.1 - patch.range1.0) / n1 as f64;
    let h2 = (patch.range2.1 - patch.range2.0) / n2 as f64;
    let rows: Vec<f64> = (0..n1)
        .into_par_iter()
        .map(|i| {
            let x = patch.range1.0 + (i as f64 + 0.5) * h1;
            (0..n2)
                .map(|j| integrand(&patch.point(x, patch.range2.0 + (j as f64 + 0.5) * h2)))
                .sum::<f64>()
        })
        .collect();
    rows.iter().sum::<f64>() * h1 * h2
}

/// Sign in `exp(sign · i g A dx)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignConvention {
    PlusI,
    MinusI,
}

impl SignConvention {
    pub fn factor(self) -> f64 {
        match self {
            SignConvention::PlusI => 1.0,
            SignConvention::MinusI => -1.0,
        }
    }
}

/// Loop unitary with its phase bookkeeping.
#[derive(Debug, Clone)]
pub struct HolonomyResult {
    pub unitary: CMatrix,
    /// Accumulated phase for one-dimensional holonomies, otherwise the phase
    /// of `det U`.
    pub phase: f64,
    pub phase_mod_2pi: f64,
    /// Whole turns in `phase`, when it was accumulated continuously.
    pub winding: Option<i64>,
    pub steps: usize,
    /// Richardson estimate from a half-resolution rerun.
    pub error_estimate: f64,
}

impl HolonomyResult {
    fn new(unitary: CMatrix, accumulated: Option<f64>, steps: usize, error_estimate: f64) -> Self {
        let det_phase = unitary.determinant().arg();
        let phase = accumulated.unwrap_or(det_phase);
        let phase_mod_2pi = wrap_phase(phase);
        let winding = accumulated.map(|p| ((p - phase_mod_2pi) / TAU).round() as i64);
        HolonomyResult {
            unitary,
            phase,
            phase_mod_2pi,
            winding,
            steps,
            error_estimate,
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.unitary)
    }
}

fn ordered_product(
    field: &MatrixField,
    path: &ParamPath,
    g: f64,
    sign: SignConvention,
    steps: usize,
) -> Result<(CMatrix, Option<f64>, usize)> {
    let segments = path.segments(steps)?;
    let k = field.dim();
    let scale = sign.factor() * g;
    let factors = segments
        .par_iter()
        .map(|(mid, dx)| {
            let a = field.eval(mid)?;
            let mut m = CMatrix::zeros(k, k);
            for (a_mu, d) in a.iter().zip(dx) {
                m += a_mu * re(*d);
            }
            let m = (&m + m.adjoint()) * re(0.5);
            Ok((linalg::expm_i_hermitian(&m, scale), if k == 1 { m[(0, 0)].re } else { 0.0 }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut u = CMatrix::identity(k, k);
    let mut accumulated = 0.0;
    for (f, a) in &factors {
        u = f * u;
        accumulated += a;
    }
    Ok((u, (k == 1).then_some(scale * accumulated), segments.len()))
}

/// Wilson loop `Π exp(sign · i g A(mid)·dx)` with later segments on the left.
pub fn path_ordered_exp(
    field: &MatrixField,
    path: &ParamPath,
    g: f64,
    sign: SignConvention,
    steps: usize,
) -> Result<HolonomyResult> {
    if !path.is_closed() {
        return Err(Error::OpenPath("Wilson loop needs a closed path".into()));
    }
    path.check_names(field.names())?;
    let (u, acc, n) = ordered_product(field, path, g, sign, steps)?;
    let error = if steps >= 2 {
        let (half, _, _) = ordered_product(field, path, g, sign, steps / 2)?;
        linalg::max_diff(&u, &half) / 3.0
    } else {
        f64::NAN
    };
    Ok(HolonomyResult::new(u, acc, n, error))
}

fn transport_closure(
    family: &HamiltonianFamily,
    path: &ParamPath,
    selection: &Selection,
    steps: usize,
    options: &FramePathOptions,
) -> Result<CMatrix> {
    let fp = frame_path(family, path, steps, selection, options)?;
    Ok(fp.closure.expect("closed path has a closure"))
}

/// Closure unitary `V_0^dagger V_N` of the parallel-transported eigenframe.
pub fn holonomy_by_transport(
    family: &HamiltonianFamily,
    path: &ParamPath,
    selection: &Selection,
    steps: usize,
    options: &FramePathOptions,
) -> Result<HolonomyResult> {
    if !path.is_closed() {
        return Err(Error::OpenPath("holonomy needs a closed path".into()));
    }
    path.check_names(family.schema())?;
    let u = transport_closure(family, path, selection, steps, options)?;
    let error = if steps >= 2 {
        let half = transport_closure(family, path, selection, steps / 2, options)?;
        linalg::max_diff(&u, &half) / 3.0
    } else {
        f64::NAN
    };
    let n = path.segments(steps)?.len();
    Ok(HolonomyResult::new(u, None, n, error))
}

/// Gauge choice for the solenoid potential.
pub type GaugeFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum SolenoidGauge {
    Azimuthal,
    /// Azimuthal plus the gradient of a smooth `alpha(x, y)`.
    WithGradient(Arc<GaugeFn>),
}

impl fmt::Debug for SolenoidGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolenoidGauge::Azimuthal => f.write_str("Azimuthal"),
            SolenoidGauge::WithGradient(_) => f.write_str("WithGradient"),
        }
    }
}

/// Exclusion radius around an infinitely thin solenoid.
pub const SOLENOID_MARGIN: f64 = 1e-6;

/// Planar potential `a = Φ/(2π r²) (-y, x)` of a thin solenoid at the origin.
pub fn ab_solenoid_field(flux: f64, gauge: SolenoidGauge) -> AbelianField {
    let base = AbelianField::new("solenoid", &["x", "y"], move |p| {
        let r2 = p[0] * p[0] + p[1] * p[1];
        let k = flux / (TAU * r2);
        vec![-k * p[1], k * p[0]]
    })
    .with_singularity(vec![0.0, 0.0], SOLENOID_MARGIN);
    match gauge {
        SolenoidGauge::Azimuthal => base,
        SolenoidGauge::WithGradient(alpha) => gauge_transform_abelian(&base, move |x| alpha(x)),
    }
}

/// States at `times[k]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &CVector {
        self.states.last().expect("trajectory is non-empty")
    }
}

/// Fixed-step RK4 integration of `dψ/dt = -i H(t) ψ` on `[0, t_total]`.
pub fn schrodinger_evolve<H>(h: H, psi0: &CVector, t_total: f64, steps: usize) -> Result<Trajectory>
where
    H: Fn(f64) -> CMatrix,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("step count must be at least 1".into()));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "initial state has norm {}",
            psi0.norm()
        )));
    }
    let dt = t_total / steps as f64;
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |t: f64, v: &CVector| (h(t) * v) * minus_i;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut psi = psi0.clone();
    let mut drift: f64 = 0.0;
    times.push(0.0);
    states.push(psi.clone());
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rhs(t, &psi);
        let k2 = rhs(t + 0.5 * dt, &(&psi + &k1 * re(0.5 * dt)));
        let k3 = rhs(t + 0.5 * dt, &(&psi + &k2 * re(0.5 * dt)));
        let k4 = rhs(t + dt, &(&psi + &k3 * re(dt)));
        psi += (k1 + (k2 + k3) * re(2.0) + k4) * re(dt / 6.0);
        drift = drift.max((psi.norm() - 1.0).abs());
        times.push((k + 1) as f64 * dt);
        states.push(psi.clone());
    }
    if drift > 1e-6 {
        return Err(Error::NormDrift(drift));
    }
    Ok(Trajectory {
        times,
        states,
        max_norm_drift: drift,
    })
}

/// Composite Simpson on a uniform grid; a trailing odd interval is closed
/// with the trapezoid rule.
fn simpson(values: &[f64], dt: f64) -> f64 {
    let n = values.len() - 1;
    let even = n - n % 2;
    let mut s = 0.0;
    for k in (0..even).step_by(2) {
        s += values[k] + 4.0 * values[k + 1] + values[k + 2];
    }
    s *= dt / 3.0;
    if n % 2 == 1 {
        s += 0.5 * dt * (values[n - 1] + values[n]);
    }
    s
}

/// Sum of `arg<v_k|v_{k+1}>`: the discrete `(1/i)∮<v|dv>`.
pub fn pancharatnam_sum(states: &[CVector]) -> f64 {
    states.windows(2).map(|w| w[0].dotc(&w[1]).arg()).sum()
}

#[derive(Debug, Clone)]
pub struct PhaseDecomposition {
    /// `Δλ`.
    pub total: f64,
    /// `f = -∫<H> dt`.
    pub dynamical: f64,
    /// `F = (1/i)∮<χ|dχ>`.
    pub geometric: f64,
    /// `|Δλ - (f - F)|`.
    pub identity_residual: f64,
    /// Largest population outside the reference state.
    pub leakage: f64,
    /// `ψ(t) exp(i∫<H>)`.
    pub removed: Trajectory,
    /// `(1/i)∮<ψ̃|dψ̃>` of the removed-phase trajectory.
    pub removed_dynamical: f64,
}

/// Split the phase of an evolved trajectory. `reference(t)` is a single-valued
/// frame fixing `λ = arg<χ_ref|ψ>`.
pub fn phase_decomposition<H, R>(
    trajectory: &Trajectory,
    h: H,
    reference: R,
) -> Result<PhaseDecomposition>
where
    H: Fn(f64) -> CMatrix,
    R: Fn(f64) -> CVector,
{
    let n = trajectory.states.len();
    if n < 2 {
        return Err(Error::InvalidArgument("trajectory needs at least two states".into()));
    }
    let (t0, t1) = (trajectory.times[0], trajectory.times[n - 1]);
    let mismatch = (reference(t1) - reference(t0)).norm();
    if mismatch > 1e-8 {
        return Err(Error::NotSingleValued(mismatch));
    }
    let dt = (t1 - t0) / (n - 1) as f64;

    let energies: Vec<f64> = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, psi)| psi.dotc(&(h(t) * psi)).re)
        .collect();
    let dynamical = -simpson(&energies, dt);

    let mut lambda = Vec::with_capacity(n);
    let mut leakage: f64 = 0.0;
    for (&t, psi) in trajectory.times.iter().zip(&trajectory.states) {
        let o = reference(t).dotc(psi);
        if o.norm() < 1e-8 {
            return Err(Error::NearOrthogonal {
                overlap: o.norm(),
                threshold: 1e-8,
            });
        }
        leakage = leakage.max(1.0 - o.norm_sqr() / psi.norm_squared());
        let raw = o.arg();
        let l = match lambda.last() {
            Some(&prev) => prev + wrap_phase(raw - prev),
            None => raw,
        };
        lambda.push(l);
    }
    let total = lambda[n - 1] - lambda[0];
    let chi: Vec<CVector> = trajectory
        .states
        .iter()
        .zip(&lambda)
        .map(|(psi, &l)| psi * C64::from_polar(1.0, -l))
        .collect();
    let geometric = pancharatnam_sum(&chi);

    // cumulative trapezoid of <H>
    let mut integral = 0.0;
    let mut removed_states = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            integral += 0.5 * dt * (energies[k - 1] + energies[k]);
        }
        removed_states.push(&trajectory.states[k] * C64::from_polar(1.0, integral));
    }
    let removed_dynamical = pancharatnam_sum(&removed_states);

    Ok(PhaseDecomposition {
        total,
        dynamical,
        geometric,
        identity_residual: (total - (dynamical - geometric)).abs(),
        leakage,
        removed: Trajectory {
            times: trajectory.times.clone(),
            states: removed_states,
            max_norm_drift: trajectory.max_norm_drift,
        },
        removed_dynamical,
    })
}

/// Two-level Hamiltonian driven around the `phi` circle in time `t_total`.
pub fn two_level_drive(r: f64, t_total: f64) -> impl Fn(f64) -> CMatrix + Clone {
    move |t| {
        let phi = TAU * t / t_total;
        let (s, c) = phi.sin_cos();
        CMatrix::from_row_slice(2, 2, &[re(r * c), re(r * s), re(r * s), re(-r * c)])
    }
}

/// The single-valued lower eigenvector `(-sin, cos)(phi/2) e^{i phi/2}` of
/// [`two_level_drive`].
pub fn two_level_lower_reference(t_total: f64) -> impl Fn(f64) -> CVector + Clone {
    move |t| {
        let phi = TAU * t / t_total;
        let (s, c) = (phi / 2.0).sin_cos();
        CVector::from_vec(vec![re(-s), re(c)]) * C64::from_polar(1.0, phi / 2.0)
    }
}

/// Half-turn helper used by reports: `x / π`.
pub fn in_units_of_pi(x: f64) -> f64 {
    x / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{dark_state_section, wilczek_zee_field};
    use crate::model::{dark_states, GateMatrix};
    use std::f64::consts::FRAC_PI_2;

    fn xy() -> [&'static str; 2] {
        ["x", "y"]
    }

    #[test]
    fn closed_path_validation() {
        let err = ParamPath::waypoints(&xy(), vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]], true)
            .unwrap_err();
        assert!(err.to_string().contains("waypoint 2"));
        assert!(ParamPath::waypoints(&xy(), vec![vec![0.0, 0.0]], false).is_err());
    }

    #[test]
    fn rectangle_legs_share_steps() {
        let r = ParamPath::rectangle(&xy(), "x", (0.0, 1.0), "y", (0.0, 1.0), &[0.0, 0.0]).unwrap();
        let pts = r.discretize(8).unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[2], vec![1.0, 0.0]);
        assert_eq!(pts[4], vec![1.0, 1.0]);
        assert_eq!(pts[8], vec![0.0, 0.0]);
    }

    #[test]
    fn solenoid_enclosed_and_not() {
        let f = ab_solenoid_field(2.5, SolenoidGauge::Azimuthal);
        let inside = ParamPath::circle(&xy(), "x", "y", (0.0, 0.0), 1.0, &[0.0, 0.0]).unwrap();
        let phase = line_integral_abelian(&f, &inside, 1.0, 200_000).unwrap();
        assert!((phase - 2.5).abs() < 1e-9, "{phase}");
        let outside = ParamPath::circle(&xy(), "x", "y", (3.0, 0.0), 1.0, &[0.0, 0.0]).unwrap();
        assert!(line_integral_abelian(&f, &outside, 1.0, 200_000).unwrap().abs() < 1e-9);
        let zero = ab_solenoid_field(0.0, SolenoidGauge::Azimuthal);
        assert_eq!(zero.eval(&[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn path_through_solenoid_rejected() {
        let f = ab_solenoid_field(1.0, SolenoidGauge::Azimuthal);
        let p = ParamPath::waypoints(&xy(), vec![vec![-1.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        assert!(matches!(line_integral_abelian(&f, &p, 1.0, 10), Err(Error::Singular { .. })));
    }

    #[test]
    fn solenoid_gauge_shift_invariant() {
        let bump = Arc::new(|p: &[f64]| (-(p[0] - 0.5).powi(2) - p[1].powi(2)).exp());
        let f = ab_solenoid_field(2.5, SolenoidGauge::Azimuthal);
        let g = ab_solenoid_field(2.5, SolenoidGauge::WithGradient(bump));
        let c = ParamPath::circle(&xy(), "x", "y", (0.0, 0.0), 1.0, &[0.0, 0.0]).unwrap();
        let a = line_integral_abelian(&f, &c, 1.0, 200_000).unwrap();
        let b = line_integral_abelian(&g, &c, 1.0, 200_000).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn solenoid_curl_free() {
        let f = ab_solenoid_field(1.3, SolenoidGauge::Azimuthal);
        for p in [[0.5f64, 0.2], [-1.0, 2.0], [0.1, -0.05]] {
            // step scaled to the distance from the flux line
            let h = 1e-5 * p[0].hypot(p[1]);
            let c = crate::connection::curvature_abelian(&f, &p, 0, 1, h).unwrap();
            assert!(c.abs() < 1e-8, "{c}");
        }
    }

    #[test]
    fn cos_surface_and_stokes() {
        let patch = SurfacePatch::new("theta3", (0.0, FRAC_PI_2), "theta4", (0.0, FRAC_PI_2), (20_000, 20), vec![])
            .unwrap();
        let s = surface_integral_abelian(|x| x[0].cos(), &patch);
        assert!((s - FRAC_PI_2).abs() < 1e-8, "{}", s - FRAC_PI_2);
        assert_eq!(surface_integral_abelian(|_| 0.0, &patch), 0.0);
        // a = (0, sin theta3): d_3 a_4 - d_4 a_3 = cos theta3
        let a = AbelianField::new("a", &["theta3", "theta4"], |x| vec![0.0, x[0].sin()]);
        let line = line_integral_abelian(&a, &patch.boundary().unwrap(), 1.0, 4000).unwrap();
        assert!((line - s).abs() < 1e-6);
    }

    #[test]
    fn scalar_wilson_loop_is_exp_of_line_integral() {
        let a = AbelianField::new("a", &["x", "y"], |x| vec![-x[1] * 0.7, x[0] * 0.7 + x[1]]);
        let c = ParamPath::circle(&xy(), "x", "y", (0.2, 0.0), 1.0, &[0.0, 0.0]).unwrap();
        let li = line_integral_abelian(&a, &c, 1.0, 1000).unwrap();
        for sign in [SignConvention::PlusI, SignConvention::MinusI] {
            let h = path_ordered_exp(&MatrixField::from_abelian(&a), &c, 1.0, sign, 1000).unwrap();
            assert!((h.unitary[(0, 0)] - C64::from_polar(1.0, sign.factor() * li)).norm() < 1e-12);
            assert!((h.phase - sign.factor() * li).abs() < 1e-12);
        }
        let zero = path_ordered_exp(&MatrixField::zero(&["x", "y"], 3), &c, 1.0, SignConvention::PlusI, 10).unwrap();
        assert_eq!(zero.unitary, CMatrix::identity(3, 3));
    }

    #[test]
    fn open_path_rejected() {
        let p = ParamPath::waypoints(&xy(), vec![vec![0.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        assert!(matches!(
            path_ordered_exp(&MatrixField::zero(&["x", "y"], 1), &p, 1.0, SignConvention::PlusI, 10),
            Err(Error::OpenPath(_))
        ));
    }

    #[test]
    fn ordering_is_later_on_left() {
        let sx = GateMatrix::pauli_x().into_matrix();
        let sz = GateMatrix::pauli_z().into_matrix();
        // A_x = σ1 on the first leg, A_y = σ3 on the second
        let field = MatrixField::constant(&["x", "y"], vec![sx.clone(), sz.clone()]).unwrap();
        let p = ParamPath::waypoints(&xy(), vec![vec![0.0, 0.0], vec![0.3, 0.0], vec![0.3, 0.4], vec![0.0, 0.4], vec![0.0, 0.0]], true).unwrap();
        let h = path_ordered_exp(&field, &p, 1.0, SignConvention::PlusI, 4).unwrap();
        let e = |m: &CMatrix, s: f64| linalg::expm_i_hermitian(m, s);
        let expected = e(&sz, -0.4) * e(&sx, -0.3) * e(&sz, 0.4) * e(&sx, 0.3);
        assert!(linalg::max_diff(&h.unitary, &expected) < 1e-13);
    }

    #[test]
    fn dark_loop_methods_agree() {
        let fam = HamiltonianFamily::dark_restricted(1.0, 1.0);
        let loop_ = ParamPath::rectangle(fam.schema(), "theta3", (0.0, FRAC_PI_2), "theta4", (0.0, FRAC_PI_2), &[0.0, 0.0]).unwrap();
        let field = wilczek_zee_field(&fam, &dark_state_section()).unwrap();
        let w = path_ordered_exp(&field, &loop_, 1.0, SignConvention::MinusI, 2000).unwrap();
        let opts = FramePathOptions {
            initial_basis: Some(dark_states(0.0, 0.0).to_vec()),
            ..Default::default()
        };
        let t = holonomy_by_transport(&fam, &loop_, &Selection::Indices(vec![1, 2, 3, 4]), 2000, &opts).unwrap();
        assert!(linalg::max_diff(&w.unitary, &t.unitary) < 1e-4);
        assert!(w.unitarity_defect() < 1e-8 && t.unitarity_defect() < 1e-8);
    }

    #[test]
    fn constant_hamiltonian_loop_is_identity() {
        let fam = HamiltonianFamily::custom("const", 2, &["x", "y"], |_| {
            CMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
        });
        let c = ParamPath::circle(fam.schema(), "x", "y", (0.0, 0.0), 1.0, &[0.0, 0.0]).unwrap();
        let h = holonomy_by_transport(&fam, &c, &Selection::Indices(vec![0]), 100, &Default::default()).unwrap();
        assert!((h.unitary[(0, 0)] - re(1.0)).norm() < 1e-14);
    }

    #[test]
    fn evolve_cases() {
        let psi0 = CVector::from_vec(vec![re(1.0), re(1.0)]) / re(2f64.sqrt());
        let tr = schrodinger_evolve(|_| CMatrix::zeros(2, 2), &psi0, 3.0, 10).unwrap();
        assert_eq!(tr.final_state(), &psi0);
        let sz = GateMatrix::pauli_z().into_matrix();
        let tr = schrodinger_evolve(|_| sz.clone(), &psi0, FRAC_PI_2, 2000).unwrap();
        let expected = CVector::from_vec(vec![C64::from_polar(1.0, -FRAC_PI_2), C64::from_polar(1.0, FRAC_PI_2)])
            / re(2f64.sqrt());
        assert!((tr.final_state() - expected).norm() < 1e-8);
        let e0 = CVector::from_vec(vec![re(1.0), re(0.0)]);
        let tr = schrodinger_evolve(|_| sz.clone() * re(0.8), &e0, 5.0, 2000).unwrap();
        assert!((tr.final_state() - &e0 * C64::from_polar(1.0, -4.0)).norm() < 1e-8);
        assert!(matches!(
            schrodinger_evolve(|_| sz.clone() * re(50.0), &e0, 10.0, 20),
            Err(Error::NormDrift(_))
        ));
    }

    #[test]
    fn static_decomposition() {
        let (e, t) = (0.7, 4.0);
        let h = move |_: f64| CMatrix::from_row_slice(2, 2, &[re(e), re(0.0), re(0.0), re(-1.0)]);
        let e0 = CVector::from_vec(vec![re(1.0), re(0.0)]);
        let tr = schrodinger_evolve(h, &e0, t, 4000).unwrap();
        let d = phase_decomposition(&tr, h, |_| e0.clone()).unwrap();
        assert!((d.dynamical + e * t).abs() < 1e-10);
        assert!(d.geometric.abs() < 1e-10);
        assert!((d.total + e * t).abs() < 1e-8);
        assert!(d.removed_dynamical.abs() < 1e-8);
    }

    #[test]
    fn non_single_valued_reference_rejected() {
        let t = 10.0;
        let h = two_level_drive(1.0, t);
        let tr = schrodinger_evolve(&h, &two_level_lower_reference(t)(0.0), t, 1000).unwrap();
        let bad = move |s: f64| {
            let phi = TAU * s / t;
            CVector::from_vec(vec![re(-(phi / 2.0).sin()), re((phi / 2.0).cos())])
        };
        assert!(matches!(phase_decomposition(&tr, &h, bad), Err(Error::NotSingleValued(_))));
    }
}
