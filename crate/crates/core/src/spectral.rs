//! Eigendecomposition with degeneracy grouping, and gauge alignment of
//! eigenframes along paths (discrete parallel transport).

use crate::error::{Error, Result};
use crate::linalg::{self, re, CMatrix, CVector, C64};
use crate::model::{HamiltonianFamily, HermitianOperator, ParameterPoint, StateVector};
use crate::transport::ParamPath;

pub const DEFAULT_TAU_DEG: f64 = 1e-8;
pub const DEFAULT_TAU_OVERLAP: f64 = 1e-8;

/// Spectrum of a Hermitian matrix at one point, with degenerate clusters.
#[derive(Debug, Clone)]
pub struct EigenFrame {
    pub point: Option<ParameterPoint>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
    /// Consecutive index runs of (near-)equal eigenvalues.
    pub groups: Vec<Vec<usize>>,
}

impl EigenFrame {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> StateVector {
        StateVector::new(self.eigenvectors.column(k).into_owned())
    }

    /// The cluster containing index `k`.
    pub fn group_of(&self, k: usize) -> &[usize] {
        self.groups
            .iter()
            .find(|g| g.contains(&k))
            .map(|g| g.as_slice())
            .expect("every index belongs to a group")
    }

    /// Columns `indices` as an `n x k` matrix.
    pub fn columns(&self, indices: &[usize]) -> CMatrix {
        let cols: Vec<CVector> = indices
            .iter()
            .map(|&k| self.eigenvectors.column(k).into_owned())
            .collect();
        linalg::columns_to_matrix(&cols)
    }
}

fn group_levels(values: &[f64], tau_deg: f64) -> Vec<Vec<usize>> {
    let scale = values.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, e) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (e - values[*g.last().unwrap()]).abs() < tau_deg * scale => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}

pub fn decompose(h: &HermitianOperator, tau_deg: f64) -> EigenFrame {
    let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(h.matrix());
    let groups = group_levels(&eigenvalues, tau_deg);
    EigenFrame {
        point: None,
        eigenvalues,
        eigenvectors,
        groups,
    }
}

/// [`decompose`] on a raw matrix, rejecting non-Hermitian input.
pub fn decompose_matrix(m: &CMatrix, tau_deg: f64) -> Result<EigenFrame> {
    Ok(decompose(&HermitianOperator::new(m.clone())?, tau_deg))
}

/// Decomposition of a family at a point, with the point recorded.
pub fn decompose_at(
    family: &HamiltonianFamily,
    point: &ParameterPoint,
    tau_deg: f64,
) -> Result<EigenFrame> {
    let mut frame = decompose(&family.hamiltonian(point)?, tau_deg);
    frame.point = Some(point.clone());
    Ok(frame)
}

/// Orthonormal basis of the eigenspace with `|E| < tau_deg·max(1, |E|max)`.
pub fn kernel_basis(h: &HermitianOperator, tau_deg: f64) -> Vec<StateVector> {
    let frame = decompose(h, tau_deg);
    let scale = frame.eigenvalues.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    frame
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, e)| e.abs() < tau_deg * scale)
        .map(|(k, _)| frame.vector(k))
        .collect()
}

/// `e^{i delta} v` with `<reference|e^{i delta} v>` real and positive.
pub fn align_phase(reference: &StateVector, v: &StateVector) -> Result<StateVector> {
    align_phase_with(reference, v, DEFAULT_TAU_OVERLAP)
}

pub fn align_phase_with(
    reference: &StateVector,
    v: &StateVector,
    tau_overlap: f64,
) -> Result<StateVector> {
    let overlap = reference.inner(v);
    if overlap.norm() <= tau_overlap {
        return Err(Error::NearOrthogonal {
            overlap: overlap.norm(),
            threshold: tau_overlap,
        });
    }
    if overlap.arg().abs() <= 1e-14 {
        return Ok(v.clone());
    }
    Ok(v.scaled(overlap.conj() / overlap.norm()))
}

/// Rotate `basis` (columns) within its span so that the overlap matrix with
/// `reference` becomes Hermitian positive-definite. Returns the rotated basis
/// and the applied unitary `W`.
pub fn align_subspace_matrix(
    reference: &CMatrix,
    basis: &CMatrix,
    tau_overlap: f64,
) -> Result<(CMatrix, CMatrix)> {
    if reference.shape() != basis.shape() {
        return Err(Error::Dimension(format!(
            "reference is {:?}, basis is {:?}",
            reference.shape(),
            basis.shape()
        )));
    }
    let m = reference.adjoint() * basis;
    let smallest = linalg::singular_values(&m)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if smallest <= tau_overlap {
        return Err(Error::NearOrthogonal {
            overlap: smallest,
            threshold: tau_overlap,
        });
    }
    let w = linalg::polar_unitary(&m.adjoint());
    Ok((basis * &w, w))
}

pub fn align_subspace(
    reference: &[StateVector],
    basis: &[StateVector],
) -> Result<Vec<StateVector>> {
    if reference.len() != basis.len() {
        return Err(Error::Dimension(format!(
            "reference has {} vectors, basis has {}",
            reference.len(),
            basis.len()
        )));
    }
    let (aligned, _) = align_subspace_matrix(
        &states_to_matrix(reference),
        &states_to_matrix(basis),
        DEFAULT_TAU_OVERLAP,
    )?;
    Ok(matrix_to_states(&aligned))
}

pub fn states_to_matrix(states: &[StateVector]) -> CMatrix {
    let cols: Vec<CVector> = states.iter().map(|s| s.as_vector().clone()).collect();
    linalg::columns_to_matrix(&cols)
}

pub fn matrix_to_states(m: &CMatrix) -> Vec<StateVector> {
    linalg::matrix_to_columns(m)
        .into_iter()
        .map(StateVector::new)
        .collect()
}

/// Which eigenvectors to follow along a path.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    /// Fixed positions in the ascending spectrum.
    Indices(Vec<usize>),
    /// All levels with `min <= E <= max`.
    Window { min: f64, max: f64 },
}

#[derive(Debug, Clone)]
pub struct FramePathOptions {
    pub tau_deg: f64,
    pub tau_overlap: f64,
    /// Gauge for the first frame; the computed subspace is aligned to it.
    pub initial_basis: Option<Vec<StateVector>>,
}

impl Default for FramePathOptions {
    fn default() -> Self {
        FramePathOptions {
            tau_deg: DEFAULT_TAU_DEG,
            tau_overlap: DEFAULT_TAU_OVERLAP,
            initial_basis: None,
        }
    }
}

/// Per-step unitaries applied while aligning frames.
#[derive(Debug, Clone, Default)]
pub struct GaugeLog {
    pub rotations: Vec<CMatrix>,
}

impl GaugeLog {
    pub fn max_unitarity_defect(&self) -> f64 {
        self.rotations
            .iter()
            .map(linalg::unitarity_defect)
            .fold(0.0, f64::max)
    }
}

/// Gauge-aligned frames along a discretized path.
#[derive(Debug, Clone)]
pub struct FramePath {
    pub points: Vec<ParameterPoint>,
    /// `n x k` aligned basis per point.
    pub bases: Vec<CMatrix>,
    /// Selected eigenvalues per point.
    pub eigenvalues: Vec<Vec<f64>>,
    pub gauge_log: GaugeLog,
    /// `V_0^dagger V_N` for closed paths.
    pub closure: Option<CMatrix>,
    pub closed: bool,
}

impl FramePath {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn subspace_dim(&self) -> usize {
        self.bases.first().map_or(0, |b| b.ncols())
    }
}

fn selected_indices(frame: &EigenFrame, selection: &Selection, step: usize) -> Result<Vec<usize>> {
    let indices: Vec<usize> = match selection {
        Selection::Indices(ix) => {
            if let Some(&bad) = ix.iter().find(|&&k| k >= frame.dim()) {
                return Err(Error::InvalidArgument(format!(
                    "eigen index {bad} out of range for dimension {}",
                    frame.dim()
                )));
            }
            ix.clone()
        }
        Selection::Window { min, max } => frame
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, e)| (*min..=*max).contains(*e))
            .map(|(k, _)| k)
            .collect(),
    };
    if indices.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "selection {selection:?} is empty at step {step}"
        )));
    }
    for &k in &indices {
        let group = frame.group_of(k);
        if group.iter().any(|j| !indices.contains(j)) {
            return Err(Error::DegeneracyChange {
                step,
                detail: format!(
                    "selection {indices:?} splits the degenerate cluster {group:?} (eigenvalues {:?})",
                    group.iter().map(|&j| frame.eigenvalues[j]).collect::<Vec<_>>()
                ),
            });
        }
    }
    Ok(indices)
}

/// Follow the selected eigenspace along `path` (discretized into `steps`
/// segments), aligning each frame to its predecessor.
pub fn frame_path(
    family: &HamiltonianFamily,
    path: &ParamPath,
    steps: usize,
    selection: &Selection,
    options: &FramePathOptions,
) -> Result<FramePath> {
    let points = path.points(steps)?;
    let mut bases: Vec<CMatrix> = Vec::with_capacity(points.len());
    let mut eigenvalues = Vec::with_capacity(points.len());
    let mut log = GaugeLog::default();
    let mut cluster_sizes: Option<Vec<usize>> = None;

    for (step, point) in points.iter().enumerate() {
        let frame = decompose_at(family, point, options.tau_deg)?;
        let indices = selected_indices(&frame, selection, step)?;
        let sizes: Vec<usize> = indices.iter().map(|&k| frame.group_of(k).len()).collect();
        match &cluster_sizes {
            Some(prev) if *prev != sizes => {
                return Err(Error::DegeneracyChange {
                    step,
                    detail: format!("selected cluster sizes changed from {prev:?} to {sizes:?}"),
                })
            }
            None => cluster_sizes = Some(sizes),
            _ => {}
        }
        let raw = frame.columns(&indices);
        let reference = match bases.last() {
            Some(prev) => Some(prev.clone()),
            None => options
                .initial_basis
                .as_ref()
                .map(|b| states_to_matrix(b)),
        };
        let aligned = match reference {
            Some(r) => {
                let (aligned, w) = align_subspace_matrix(&r, &raw, options.tau_overlap)
                    .map_err(|e| match e {
                        Error::NearOrthogonal { overlap, threshold } => Error::DegeneracyChange {
                            step,
                            detail: format!(
                                "overlap with previous frame {overlap:.3e} below {threshold:.1e}"
                            ),
                        },
                        other => other,
                    })?;
                log.rotations.push(w);
                aligned
            }
            None => raw,
        };
        eigenvalues.push(indices.iter().map(|&k| frame.eigenvalues[k]).collect());
        bases.push(aligned);
    }

    let closure = if path.is_closed() {
        Some(bases[0].adjoint() * bases.last().expect("non-empty path"))
    } else {
        None
    };
    Ok(FramePath {
        points,
        bases,
        eigenvalues,
        gauge_log: log,
        closure,
        closed: path.is_closed(),
    })
}

/// Frames made single-valued around a loop, and the connection this induces.
#[derive(Debug, Clone)]
pub struct SingleValuedFrames {
    pub frames: Vec<CMatrix>,
    /// Phase `theta` with `X_k = psi_k e^{i theta s_k}`.
    pub theta: f64,
    /// Induced `(1/i)<X|dX/dparam>` along the winding parameter.
    pub connection: f64,
    /// `exp(i ∮ A)`, equal to the transport closure phase.
    pub loop_phase: C64,
}

/// Remove the closure phase of a transported one-dimensional frame by a
/// linear phase ramp in the winding parameter.
pub fn single_valued_correction(path: &FramePath, param: &str) -> Result<SingleValuedFrames> {
    let closure = path
        .closure
        .as_ref()
        .ok_or_else(|| Error::OpenPath("single-valued correction needs a closed loop".into()))?;
    if closure.ncols() != 1 {
        return Err(Error::Dimension(format!(
            "single-valued correction is defined for one-dimensional frames, got {}",
            closure.ncols()
        )));
    }
    let idx = path.points[0].index_of(param)?;
    let start = path.points[0].values()[idx];
    let span = path.points.last().unwrap().values()[idx] - start;
    if span == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "parameter `{param}` does not wind along the loop"
        )));
    }
    let c = closure[(0, 0)];
    // <psi_N|psi_0> = conj(c); a phase of exactly -pi is reported as +pi
    let mut theta = (-c.arg()).rem_euclid(std::f64::consts::TAU);
    if theta > std::f64::consts::PI + 1e-9 {
        theta -= std::f64::consts::TAU;
    }
    if c.im.abs() <= 1e-9 * c.norm() && c.re < 0.0 {
        theta = std::f64::consts::PI;
    }
    let frames = path
        .bases
        .iter()
        .zip(&path.points)
        .map(|(b, p)| {
            let s = (p.values()[idx] - start) / span;
            b * C64::from_polar(1.0, theta * s)
        })
        .collect();
    let connection = theta / span;
    Ok(SingleValuedFrames {
        frames,
        theta,
        connection,
        loop_phase: C64::from_polar(1.0, connection * span),
    })
}

/// `|<a|b>|` for normalized vectors.
pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm()
}

/// Residual `max_k |H v_k - E_k v_k|`.
pub fn eigen_residual(h: &HermitianOperator, frame: &EigenFrame) -> f64 {
    (0..frame.dim())
        .map(|k| {
            let v = frame.eigenvectors.column(k);
            (h.matrix() * v - v * re(frame.eigenvalues[k])).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_i_hermitian, max_diff, I};
    use crate::model::{dark_states, two_level_eigenstates};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn hermitian(a: &[f64; 4]) -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[re(a[0]), C64::new(a[1], a[2]), C64::new(a[1], -a[2]), re(a[3])],
        )
    }

    #[test]
    fn two_level_spectrum() {
        let fam = HamiltonianFamily::two_level();
        let p = fam.point(&[2.0, 0.3]).unwrap();
        let frame = decompose_at(&fam, &p, DEFAULT_TAU_DEG).unwrap();
        assert!((frame.eigenvalues[0] + 2.0).abs() < 1e-12);
        assert!((frame.eigenvalues[1] - 2.0).abs() < 1e-12);
        let (plus, minus) = two_level_eigenstates(0.3);
        assert!(fidelity(&frame.vector(0), &minus) >= 1.0 - 1e-10);
        assert!(fidelity(&frame.vector(1), &plus) >= 1.0 - 1e-10);
    }

    #[test]
    fn dark_restricted_spectrum() {
        let (eps, om) = (1.0, 1.0);
        let fam = HamiltonianFamily::dark_restricted(eps, om);
        let frame = decompose_at(&fam, &fam.point(&[0.5, 0.9]).unwrap(), DEFAULT_TAU_DEG).unwrap();
        let root = ((eps / 2.0f64).powi(2) + om * om).sqrt();
        assert!((frame.eigenvalues[0] - (eps / 2.0 - root)).abs() < 1e-12);
        assert!((frame.eigenvalues[5] - (eps / 2.0 + root)).abs() < 1e-12);
        assert_eq!(frame.groups, vec![vec![0], vec![1, 2, 3, 4], vec![5]]);
    }

    #[test]
    fn diagonal_is_standard_basis() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![re(3.0), re(1.0), re(2.0)]));
        let frame = decompose_matrix(&m, DEFAULT_TAU_DEG).unwrap();
        assert_eq!(frame.eigenvalues, vec![1.0, 2.0, 3.0]);
        for (col, basis) in [(0, 1), (1, 2), (2, 0)] {
            assert!((frame.eigenvectors[(basis, col)].norm() - 1.0).abs() < 1e-15);
        }
        assert!(matches!(
            decompose_matrix(&hermitian(&[0.0, 1.0, 0.0, 0.0]).transpose().map(|z| z * I), 1e-8),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn kernel_dimensions() {
        let fam = HamiltonianFamily::dark_restricted(1.0, 1.0);
        let h = fam.hamiltonian(&fam.point(&[1.3, -0.4]).unwrap()).unwrap();
        assert_eq!(kernel_basis(&h, DEFAULT_TAU_DEG).len(), 4);
        // uncoupled system: only the excited level has energy
        let h0 = HamiltonianFamily::dark_restricted(0.8, 0.0)
            .hamiltonian(&fam.point(&[0.2, 0.1]).unwrap())
            .unwrap();
        assert_eq!(kernel_basis(&h0, DEFAULT_TAU_DEG).len(), 5);
        let id = HermitianOperator::new(CMatrix::identity(3, 3)).unwrap();
        assert!(kernel_basis(&id, DEFAULT_TAU_DEG).is_empty());
    }

    #[test]
    fn align_phase_cases() {
        let r = StateVector::from_complex(&[C64::new(0.6, 0.1), C64::new(0.2, -0.3)]).normalized();
        assert_eq!(align_phase(&r, &r).unwrap(), r);
        for alpha in [0.3, -2.0, PI, 5.5] {
            let v = r.scaled(C64::from_polar(1.0, alpha));
            let a = align_phase(&r, &v).unwrap();
            assert!((a.as_vector() - r.as_vector()).norm() < 1e-12);
        }
        let orth = StateVector::from_complex(&[-r.as_vector()[1].conj(), r.as_vector()[0].conj()]);
        assert!(matches!(align_phase(&r, &orth), Err(Error::NearOrthogonal { .. })));
    }

    #[test]
    fn align_subspace_removes_rotation() {
        let reference = dark_states(0.4, 0.7).to_vec();
        let drift = align_subspace(&reference, &reference)
            .unwrap()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a.as_vector() - b.as_vector()).norm())
            .fold(0.0, f64::max);
        assert!(drift <= 1e-12, "{drift}");
        let mut g = CMatrix::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                g[(r, c)] = C64::new(((r * 7 + c * 3) % 5) as f64 * 0.1, (r as f64 - c as f64) * 0.2);
            }
        }
        let herm = (&g + g.adjoint()) * re(0.5);
        let rot = expm_i_hermitian(&herm, 1.0);
        let rotated = states_to_matrix(&reference) * rot;
        let aligned = align_subspace(&reference, &matrix_to_states(&rotated)).unwrap();
        assert!(max_diff(&states_to_matrix(&aligned), &states_to_matrix(&reference)) < 1e-10);
    }

    #[test]
    fn aligned_dark_frames_have_small_antihermitian_overlap() {
        let d = 1e-3;
        let a = states_to_matrix(&dark_states(0.6, 0.3));
        let fam = HamiltonianFamily::dark_restricted(1.0, 1.0);
        let h = fam.hamiltonian(&fam.point(&[0.6 + d, 0.3 + d]).unwrap()).unwrap();
        let raw = states_to_matrix(&kernel_basis(&h, DEFAULT_TAU_DEG));
        let (b, _) = align_subspace_matrix(&a, &raw, DEFAULT_TAU_OVERLAP).unwrap();
        let m = a.adjoint() * b;
        // anti-Hermitian part (m - m^dagger)/2
        let defect = linalg::hermiticity_defect(&m) / 2.0;
        assert!(defect <= d * d, "{defect}");
    }

    #[test]
    fn two_level_loop_changes_sign() {
        let fam = HamiltonianFamily::two_level();
        let path = ParamPath::cyclic_sweep(fam.schema(), &[1.0, 0.0], "phi", 0.0, TAU).unwrap();
        let fp = frame_path(&fam, &path, 2000, &Selection::Indices(vec![0]), &Default::default()).unwrap();
        let c = fp.closure.unwrap()[(0, 0)];
        assert!((c + re(1.0)).norm() < 1e-6);
        assert!(fp.gauge_log.max_unitarity_defect() < 1e-10);
    }

    #[test]
    fn constant_loop_closes_trivially() {
        let fam = HamiltonianFamily::two_level();
        let p = vec![1.0, 0.4];
        let path = ParamPath::waypoints(fam.schema(), vec![p.clone(), p.clone(), p], true).unwrap();
        let fp = frame_path(&fam, &path, 10, &Selection::Indices(vec![0]), &Default::default()).unwrap();
        assert!((fp.closure.unwrap()[(0, 0)] - re(1.0)).norm() < 1e-14);
    }

    #[test]
    fn refinement_converges() {
        let fam = HamiltonianFamily::two_level();
        let path = ParamPath::cyclic_sweep(fam.schema(), &[1.0, 0.0], "phi", 0.0, TAU).unwrap();
        let mut prev = f64::INFINITY;
        for n in [250, 500, 1000, 2000] {
            let fp = frame_path(&fam, &path, n, &Selection::Indices(vec![0]), &Default::default()).unwrap();
            let err = (fp.closure.unwrap()[(0, 0)] + re(1.0)).norm();
            assert!(err <= (prev / 2.0).max(1e-12), "n={n} err={err}");
            prev = err;
        }
    }

    #[test]
    fn selection_splitting_a_cluster_is_rejected() {
        let fam = HamiltonianFamily::dark_restricted(1.0, 1.0);
        let path = ParamPath::rectangle(fam.schema(), "theta3", (0.0, 0.5), "theta4", (0.0, 0.5), &[0.0, 0.0]).unwrap();
        let err = frame_path(&fam, &path, 40, &Selection::Indices(vec![1, 2]), &Default::default()).unwrap_err();
        assert!(matches!(err, Error::DegeneracyChange { step: 0, .. }));
    }

    #[test]
    fn degeneracy_change_mid_path() {
        // levels cross at t = 0.5
        let fam = HamiltonianFamily::custom("crossing", 2, &["t"], |x| {
            CMatrix::from_row_slice(2, 2, &[re(x[0] - 0.5), re(0.0), re(0.0), re(0.5 - x[0])])
        });
        let path = ParamPath::waypoints(fam.schema(), vec![vec![0.0], vec![1.0]], false).unwrap();
        let err = frame_path(&fam, &path, 10, &Selection::Indices(vec![0]), &Default::default()).unwrap_err();
        assert!(matches!(err, Error::DegeneracyChange { step: 5, .. }), "{err:?}");
    }

    #[test]
    fn single_valued_two_level() {
        let fam = HamiltonianFamily::two_level();
        let path = ParamPath::cyclic_sweep(fam.schema(), &[1.0, 0.0], "phi", 0.0, TAU).unwrap();
        let fp = frame_path(&fam, &path, 2000, &Selection::Indices(vec![0]), &Default::default()).unwrap();
        let sv = single_valued_correction(&fp, "phi").unwrap();
        assert!((sv.connection - 0.5).abs() < 1e-9);
        let first = &sv.frames[0];
        let last = sv.frames.last().unwrap();
        assert!(max_diff(first, last) < 1e-6);
        assert!((sv.loop_phase - fp.closure.unwrap()[(0, 0)]).norm() < 1e-6);
    }

    #[test]
    fn single_valued_trivial_holonomy() {
        // phi winds but the Hamiltonian only depends on r
        let fam = HamiltonianFamily::custom("flat", 2, &["r", "phi"], |x| {
            CMatrix::from_row_slice(2, 2, &[re(x[0]), re(0.0), re(0.0), re(-x[0])])
        });
        let path = ParamPath::cyclic_sweep(fam.schema(), &[1.0, 0.0], "phi", 0.0, TAU).unwrap();
        let fp = frame_path(&fam, &path, 50, &Selection::Indices(vec![0]), &Default::default()).unwrap();
        let sv = single_valued_correction(&fp, "phi").unwrap();
        assert!(sv.theta.abs() < 1e-14);
        assert!(sv.connection.abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn eigen_residual_small(a in proptest::array::uniform4(-5.0f64..5.0)) {
            let h = HermitianOperator::new(hermitian(&a)).unwrap();
            let f = decompose(&h, DEFAULT_TAU_DEG);
            prop_assert!(eigen_residual(&h, &f) <= 1e-9 * h.spectral_norm().max(1e-300));
        }

        #[test]
        fn align_phase_idempotent(re1 in -1.0f64..1.0, im1 in -1.0f64..1.0, re2 in -1.0f64..1.0,
                                  alpha in -7.0f64..7.0) {
            let r = StateVector::from_complex(&[C64::new(re1, im1), C64::new(re2, 0.5)]).normalized();
            let v = StateVector::from_complex(&[C64::new(im1, re2), C64::new(0.3, re1)]).normalized()
                .scaled(C64::from_polar(1.0, alpha));
            prop_assume!(r.inner(&v).norm() > 1e-6);
            let once = align_phase(&r, &v).unwrap();
            let twice = align_phase(&r, &once).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
