//! Job execution: each [`JobConfig`] becomes one [`JobReport`].

use std::f64::consts::PI;
use std::time::Instant;

use holonomy_core::anyons::{
    density_profile, effective_charge, flux_ratio, landau_relations, metropolis_sample, quasihole_berry_phase,
    BerryPhaseMode, DensityEstimate, DensityOptions, LaughlinConfig, RadialGrid,
};
use holonomy_core::connection::{
    berry_connection, dark_state_section, wilczek_zee_field, wz_connection, Gauge, GaugePhase, Method,
};
use holonomy_core::linalg::{self, re, CMatrix, C64, I};
use holonomy_core::model::{
    dark_states, qubit, standard_gates, tensor_product, GateMatrix, HamiltonianFamily, DARK_RESTRICTED,
};
use holonomy_core::spectral::{frame_path, single_valued_correction, FramePathOptions, Selection};
use holonomy_core::transport::{
    holonomy_by_transport, path_ordered_exp, phase_decomposition, schrodinger_evolve, two_level_drive,
    two_level_lower_reference, HolonomyResult, ParamPath, SignConvention,
};
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::{
    job_table, AnyonJob, ConnectionJob, ConnectionTarget, EstimatedAnyon, EvolveJob, GatesJob, GaugeSpec,
    HolonomyJob, HolonomyMethod, JobConfig, JobSpec, LandauJob, MethodSpec, PathSpec, SelectionSpec, TargetGate,
};

/// Largest unitarity defect accepted for a reported loop unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum JobError {
    #[error("job `{job}` ({kind}): {source}")]
    Numerical {
        job: String,
        kind: &'static str,
        #[source]
        source: holonomy_core::Error,
    },
    #[error("job `{job}` ({kind}): {message}")]
    Check {
        job: String,
        kind: &'static str,
        message: String,
    },
}

/// Plain numeric table, written as CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobReport {
    pub name: String,
    pub kind: &'static str,
    /// The job as run, with defaults filled in.
    pub job: Value,
    pub results: Value,
    pub diagnostics: Value,
    pub tables: Vec<DataTable>,
    /// Excluded from determinism comparisons.
    pub wall_time_s: f64,
}

impl JobReport {
    /// Report without the timing field.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("wall_time_s");
        v
    }
}

struct Ctx<'a> {
    job: &'a JobConfig,
}

impl Ctx<'_> {
    fn num(&self, source: holonomy_core::Error) -> JobError {
        JobError::Numerical {
            job: self.job.name.clone(),
            kind: self.job.spec.kind(),
            source,
        }
    }
}

pub fn matrix_json(m: &CMatrix) -> Value {
    let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    json!({ "re": rows(|c| c.re), "im": rows(|c| c.im) })
}

pub fn phase_json(x: f64) -> Value {
    json!({ "radians": x, "pi_multiple": x / PI })
}

fn table_json(t: &DataTable) -> Value {
    json!({ "columns": t.columns, "rows": t.rows })
}

/// Run one job. Timing is measured around the whole computation.
pub fn run_job(job: &JobConfig) -> Result<JobReport, JobError> {
    let start = Instant::now();
    let ctx = Ctx { job };
    let (results, diagnostics, tables) = match &job.spec {
        JobSpec::Connection(c) => run_connection(&ctx, c),
        JobSpec::Holonomy(h) => run_holonomy(&ctx, h),
        JobSpec::Evolve(e) => run_evolve(&ctx, e),
        JobSpec::Anyon(a) => run_anyon(&ctx, a),
        JobSpec::Gates(g) => Ok(run_gates(g)),
        JobSpec::Landau(l) => run_landau(&ctx, l),
    }?;
    let echo = serde_json::to_value(job_table(job)).expect("toml tables map to json");
    Ok(JobReport {
        name: job.name.clone(),
        kind: job.spec.kind(),
        job: echo,
        results,
        diagnostics,
        tables,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn family(ctx: &Ctx<'_>, system: &crate::config::SystemSpec) -> Result<HamiltonianFamily, JobError> {
    HamiltonianFamily::by_id(&system.id, &system.constants_vec()).map_err(|e| ctx.num(e))
}

pub fn build_path(schema: &[String], spec: &PathSpec) -> holonomy_core::Result<ParamPath> {
    match spec {
        PathSpec::Waypoints { points, closed } => ParamPath::waypoints(schema, points.clone(), *closed),
        PathSpec::Circle { p1, p2, center, radius, base } => {
            ParamPath::circle(schema, p1, p2, (center[0], center[1]), *radius, base)
        }
        PathSpec::Rectangle { p1, range1, p2, range2, base } => {
            ParamPath::rectangle(schema, p1, (range1[0], range1[1]), p2, (range2[0], range2[1]), base)
        }
        PathSpec::Sweep { param, start, period, base } => ParamPath::cyclic_sweep(schema, base, param, *start, *period),
    }
}

fn run_connection(ctx: &Ctx<'_>, c: &ConnectionJob) -> Result<(Value, Value, Vec<DataTable>), JobError> {
    let fam = family(ctx, &c.system)?;
    let mut values = Vec::with_capacity(c.points.len());
    match &c.target {
        ConnectionTarget::Berry { index, gauge, method } => {
            let gauge = match gauge {
                GaugeSpec::Transport => Gauge::Transport,
                GaugeSpec::Anchored { component } => Gauge::Anchored { component: *component },
                GaugeSpec::Phased { component, param, coefficient } => {
                    let idx = fam.schema().iter().position(|n| n == param).expect("validated parameter");
                    Gauge::Phased {
                        component: *component,
                        phase: GaugePhase::linear(idx, *coefficient),
                    }
                }
            };
            let method = match method {
                MethodSpec::Analytic => Method::Analytic,
                MethodSpec::FiniteDifference { h } => Method::FiniteDifference { step: *h },
            };
            for x in &c.points {
                let p = fam.point(x).map_err(|e| ctx.num(e))?;
                let a = berry_connection(&fam, &p, *index, &c.direction, &gauge, method).map_err(|e| ctx.num(e))?;
                values.push(json!({ "point": x, "connection": a }));
            }
        }
        ConnectionTarget::WilczekZee => {
            let section = dark_state_section();
            for x in &c.points {
                let p = fam.point(x).map_err(|e| ctx.num(e))?;
                let a = wz_connection(&fam, &section, &p, &c.direction).map_err(|e| ctx.num(e))?;
                values.push(json!({
                    "point": x,
                    "overlap_matrix": matrix_json(&a),
                    "anti_hermiticity_defect": linalg::anti_hermiticity_defect(&a),
                }));
            }
        }
    }
    let results = json!({ "direction": c.direction, "values": values });
    Ok((results, json!({ "points": c.points.len() }), Vec::new()))
}

fn target_matrix(t: TargetGate) -> CMatrix {
    match t {
        TargetGate::Identity => CMatrix::identity(4, 4),
        TargetGate::Cnot => GateMatrix::cnot().into_matrix(),
        TargetGate::HolonomicCnot => holonomic_cnot(),
    }
}

/// Identity on the first pair and `i σ1` on the second.
pub fn holonomic_cnot() -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m[(2, 2)] = re(0.0);
    m[(3, 3)] = re(0.0);
    m[(2, 3)] = I;
    m[(3, 2)] = I;
    m
}

/// Largest difference between `|u_ij|` and `|t_ij|`.
pub fn modulus_pattern_deviation(u: &CMatrix, t: &CMatrix) -> f64 {
    u.iter().zip(t.iter()).map(|(a, b)| (a.norm() - b.norm()).abs()).fold(0.0, f64::max)
}

fn holonomy_json(h: &HolonomyResult) -> Value {
    json!({
        "unitary": matrix_json(&h.unitary),
        "phase": phase_json(h.phase),
        "phase_mod_2pi": phase_json(h.phase_mod_2pi),
        "winding": h.winding,
        "steps": h.steps,
        "error_estimate": h.error_estimate,
        "unitarity_defect": h.unitarity_defect(),
    })
}

fn run_holonomy(ctx: &Ctx<'_>, h: &HolonomyJob) -> Result<(Value, Value, Vec<DataTable>), JobError> {
    let fam = family(ctx, &h.system)?;
    let path = build_path(fam.schema(), &h.path).map_err(|e| ctx.num(e))?;
    let selection = match &h.selection {
        SelectionSpec::Indices(ix) => Selection::Indices(ix.clone()),
        SelectionSpec::Window { min, max } => Selection::Window { min: *min, max: *max },
    };
    let start = path.discretize(1).map_err(|e| ctx.num(e))?.remove(0);
    let mut options = FramePathOptions {
        tau_deg: h.tau_deg,
        ..Default::default()
    };
    // The closed-form dark states fix the frame of the kernel at the start.
    let kernel = matches!(&h.selection, SelectionSpec::Indices(ix) if ix == &[1, 2, 3, 4])
        || matches!(h.selection, SelectionSpec::Window { min, max } if min <= 0.0 && 0.0 <= max);
    if fam.id() == DARK_RESTRICTED && kernel {
        options.initial_basis = Some(dark_states(start[0], start[1]).to_vec());
    }

    let mut results = Map::new();
    let mut diagnostics = Map::new();
    let mut unitaries = Vec::new();
    if matches!(h.method, HolonomyMethod::Transport | HolonomyMethod::Both) {
        let t = holonomy_by_transport(&fam, &path, &selection, h.steps, &options).map_err(|e| ctx.num(e))?;
        let frames = frame_path(&fam, &path, h.steps, &selection, &options).map_err(|e| ctx.num(e))?;
        diagnostics.insert(
            "gauge_rotation_max_unitarity_defect".into(),
            json!(frames.gauge_log.max_unitarity_defect()),
        );
        if let Some(param) = &h.single_valued {
            let sv = single_valued_correction(&frames, param).map_err(|e| ctx.num(e))?;
            results.insert(
                "single_valued".into(),
                json!({
                    "parameter": param,
                    "ramp_phase": phase_json(sv.theta),
                    "connection": sv.connection,
                    "loop_phase": { "re": sv.loop_phase.re, "im": sv.loop_phase.im },
                }),
            );
        }
        results.insert("transport".into(), holonomy_json(&t));
        unitaries.push(("transport", t.unitary));
    }
    if matches!(h.method, HolonomyMethod::Wilson | HolonomyMethod::Both) {
        let field = wilczek_zee_field(&fam, &dark_state_section()).map_err(|e| ctx.num(e))?;
        let w = path_ordered_exp(&field, &path, h.g, h.sign, h.steps).map_err(|e| ctx.num(e))?;
        results.insert("wilson".into(), holonomy_json(&w));
        results.insert(
            "sign_convention".into(),
            json!(match h.sign {
                SignConvention::MinusI => "minus_i",
                SignConvention::PlusI => "plus_i",
            }),
        );
        unitaries.push(("wilson", w.unitary));
    }
    for (method, u) in &unitaries {
        let defect = linalg::unitarity_defect(u);
        if defect > UNITARITY_TOLERANCE {
            return Err(JobError::Check {
                job: ctx.job.name.clone(),
                kind: ctx.job.spec.kind(),
                message: format!("{method} loop unitary has unitarity defect {defect:.3e}"),
            });
        }
    }
    if let [(_, a), (_, b)] = unitaries.as_slice() {
        results.insert("method_agreement".into(), json!(linalg::max_diff(a, b)));
    }
    if let Some(target) = h.target {
        let t = target_matrix(target);
        let mut cmp = Map::new();
        for (method, u) in &unitaries {
            if u.shape() != t.shape() {
                return Err(JobError::Check {
                    job: ctx.job.name.clone(),
                    kind: ctx.job.spec.kind(),
                    message: format!("{method} unitary is {}x{}, target is 4x4", u.nrows(), u.ncols()),
                });
            }
            cmp.insert(
                (*method).into(),
                json!({
                    "max_entry_deviation": linalg::max_diff(u, &t),
                    "modulus_pattern_deviation": modulus_pattern_deviation(u, &t),
                }),
            );
        }
        cmp.insert("matrix".into(), matrix_json(&t));
        results.insert("target".into(), Value::Object(cmp));
    }
    diagnostics.insert("steps".into(), json!(h.steps));
    diagnostics.insert("tau_deg".into(), json!(h.tau_deg));
    Ok((Value::Object(results), Value::Object(diagnostics), Vec::new()))
}

fn run_evolve(ctx: &Ctx<'_>, e: &EvolveJob) -> Result<(Value, Value, Vec<DataTable>), JobError> {
    let t_total = e.omega_t / (2.0 * e.r);
    let h = two_level_drive(e.r, t_total);
    let reference = two_level_lower_reference(t_total);
    let psi0 = reference(0.0);
    let traj = schrodinger_evolve(&h, &psi0, t_total, e.steps).map_err(|err| ctx.num(err))?;
    let d = phase_decomposition(&traj, &h, &reference).map_err(|err| ctx.num(err))?;
    // adiabatic oracle: transported lower eigenstate around the same loop
    let fam = HamiltonianFamily::two_level();
    let path = ParamPath::cyclic_sweep(fam.schema(), &[e.r, 0.0], "phi", 0.0, 2.0 * PI).map_err(|err| ctx.num(err))?;
    let oracle = holonomy_by_transport(&fam, &path, &Selection::Indices(vec![0]), 2000, &Default::default())
        .map_err(|err| ctx.num(err))?;
    let oracle_phase = -oracle.unitary[(0, 0)].arg();
    let results = json!({
        "total": phase_json(d.total),
        "dynamical": phase_json(d.dynamical),
        "geometric": phase_json(d.geometric),
        "geometric_mod_2pi": phase_json(linalg::wrap_phase(d.geometric)),
        "transport_geometric": phase_json(oracle_phase),
        "geometric_deviation_from_transport": linalg::wrap_phase(d.geometric - oracle_phase).abs(),
        "removed_trajectory_dynamical": d.removed_dynamical,
    });
    let diagnostics = json!({
        "identity_residual": d.identity_residual,
        "leakage": d.leakage,
        "max_norm_drift": traj.max_norm_drift,
        "duration": t_total,
        "steps": e.steps,
    });
    Ok((results, diagnostics, Vec::new()))
}

fn density_table(name: &str, est: &DensityEstimate) -> DataTable {
    let rows = est
        .bin_centers()
        .iter()
        .zip(est.density.iter().zip(&est.stderr))
        .map(|(c, (d, s))| vec![c / est.l0, *d, *s])
        .collect();
    DataTable {
        name: name.into(),
        columns: vec!["bin_center_in_l0".into(), "density".into(), "stderr".into()],
        rows,
    }
}

/// Ground-state and quasihole chains of an estimated-mode anyon job.
pub struct AnyonRun {
    pub ground: DensityEstimate,
    pub hole: DensityEstimate,
    pub ground_acceptance: f64,
    pub hole_acceptance: f64,
}

/// Sample both chains; the quasihole sits on the loop at `(radius, 0)`.
pub fn sample_anyon(a: &EstimatedAnyon, seed: u64) -> holonomy_core::Result<AnyonRun> {
    let cfg = LaughlinConfig::new(a.electrons, a.m, a.l0, seed)?;
    let hole_cfg = LaughlinConfig {
        seed: seed.wrapping_add(1),
        ..cfg
    };
    let grid = RadialGrid::uniform(a.r_max * a.l0, a.bins)?;
    let options = DensityOptions {
        batches: a.batches,
        far_field_annulus: None,
    };
    let origin = C64::new(0.0, 0.0);
    let z0 = C64::new(a.radius, 0.0);
    let step = a.step * a.l0;
    let chain = |cfg: &LaughlinConfig, hole: Option<C64>| -> holonomy_core::Result<(DensityEstimate, f64)> {
        let (samples, rate) = metropolis_sample(cfg, hole, a.samples, a.burn_in, step)?;
        Ok((density_profile(&samples, &grid, origin, a.l0, &options)?, rate))
    };
    let (ground, hole) = rayon::join(|| chain(&cfg, None), || chain(&hole_cfg, Some(z0)));
    let (ground, ground_acceptance) = ground?;
    let (hole, hole_acceptance) = hole?;
    Ok(AnyonRun {
        ground,
        hole,
        ground_acceptance,
        hole_acceptance,
    })
}

fn run_anyon(ctx: &Ctx<'_>, a: &AnyonJob) -> Result<(Value, Value, Vec<DataTable>), JobError> {
    match a {
        AnyonJob::Uniform { nu, radius, l0 } => {
            let phi = flux_ratio(*radius, *l0);
            let gamma = quasihole_berry_phase(BerryPhaseMode::Uniform { nu: *nu }, *radius, *l0)
                .map_err(|e| ctx.num(e))?;
            let charge = if phi > 0.0 {
                json!(effective_charge(gamma, phi).map_err(|e| ctx.num(e))?)
            } else {
                Value::Null
            };
            let results = json!({
                "flux_ratio": phi,
                "berry_phase": phase_json(gamma),
                "effective_charge": charge,
            });
            Ok((results, json!({ "mode": "uniform" }), Vec::new()))
        }
        AnyonJob::Estimated(e) => {
            let run = sample_anyon(e, ctx.job.seed).map_err(|err| ctx.num(err))?;
            let nu = 1.0 / e.m as f64;
            let target = nu / (2.0 * PI * e.l0 * e.l0);
            let (bulk, bulk_err) = run.ground.disk_average(e.bulk_radius * e.l0).map_err(|err| ctx.num(err))?;
            let phi = flux_ratio(e.radius, e.l0);
            let gamma = quasihole_berry_phase(BerryPhaseMode::Estimated(&run.hole), e.radius, e.l0)
                .map_err(|err| ctx.num(err))?;
            let (enclosed, enclosed_err) = run.hole.enclosed_count(e.radius).map_err(|err| ctx.num(err))?;
            let uniform = quasihole_berry_phase(BerryPhaseMode::Uniform { nu }, e.radius, e.l0)
                .map_err(|err| ctx.num(err))?;
            let charge = if phi > 0.0 {
                json!(effective_charge(gamma, phi).map_err(|err| ctx.num(err))?)
            } else {
                Value::Null
            };
            let ground_table = density_table("density", &run.ground);
            let hole_table = density_table("density_quasihole", &run.hole);
            let results = json!({
                "bulk_density": bulk,
                "bulk_density_stderr": bulk_err,
                "bulk_density_target": target,
                "bulk_z_score": (bulk - target) / bulk_err,
                "flux_ratio": phi,
                "enclosed_count": enclosed,
                "enclosed_count_stderr": enclosed_err,
                "berry_phase": phase_json(gamma),
                "berry_phase_uniform": phase_json(uniform),
                "effective_charge": charge,
                "effective_charge_target": -nu,
                "density": table_json(&ground_table),
                "density_quasihole": table_json(&hole_table),
            });
            let diagnostics = json!({
                "acceptance_rate": run.ground_acceptance,
                "acceptance_rate_quasihole": run.hole_acceptance,
                "samples": e.samples,
                "empty_bins": run.ground.empty_bins,
                "empty_bins_quasihole": run.hole.empty_bins,
                "far_field_density": run.ground.far_field,
                "far_field_density_stderr": run.ground.far_field_stderr,
            });
            Ok((results, diagnostics, vec![ground_table, hole_table]))
        }
    }
}

fn run_gates(g: &GatesJob) -> (Value, Value, Vec<DataTable>) {
    let mut mats = Map::new();
    for (name, m) in standard_gates(g.phase) {
        mats.insert(name.into(), matrix_json(m.matrix()));
    }
    let id4 = GateMatrix::identity(4);
    let cnot = GateMatrix::cnot();
    let swap = GateMatrix::swap();
    let inverse = GateMatrix::phase(g.phase).compose(&GateMatrix::phase(-g.phase));
    let basis: Vec<Value> = [(false, false), (false, true), (true, false), (true, true)]
        .iter()
        .map(|&(a, b)| {
            let v = tensor_product(&qubit(a), &qubit(b));
            json!({
                "label": format!("|{}{}>", a as u8, b as u8),
                "re": v.as_vector().iter().map(|c| c.re).collect::<Vec<_>>(),
                "im": v.as_vector().iter().map(|c| c.im).collect::<Vec<_>>(),
            })
        })
        .collect();
    let results = json!({
        "gates": mats,
        "basis": basis,
        "cnot_squared_is_identity": cnot.compose(&cnot) == id4,
        "swap_squared_is_identity": swap.compose(&swap) == id4,
        "phase_inverse_deviation": linalg::max_diff(inverse.matrix(), id4.matrix()),
    });
    (results, json!({ "phase": g.phase }), Vec::new())
}

fn run_landau(ctx: &Ctx<'_>, l: &LandauJob) -> Result<(Value, Value, Vec<DataTable>), JobError> {
    let r = landau_relations(l.area, l.l0, l.electrons, l.b).map_err(|e| ctx.num(e))?;
    let results = json!({
        "degeneracy": r.degeneracy,
        "filling": r.filling,
        "filling_from_density": r.filling_from_density,
        "flux_ratio_direct": r.flux_ratio_direct,
        "flux_ratio_chain": r.flux_ratio_chain,
        "enclosed_direct": r.enclosed_direct,
        "enclosed_chain": r.enclosed_chain,
    });
    Ok((results, json!({ "l0_mismatch": r.l0_mismatch }), Vec::new()))
}
