//! Built-in acceptance suite: ten numerical checks, each with its own
//! tolerance and time budget.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;
use std::time::{Duration, Instant};

use holonomy_core::anyons::{effective_charge, flux_ratio, quasihole_berry_phase, BerryPhaseMode};
use holonomy_core::connection::{
    berry_connection, curvature_abelian, curvature_covariance_check, curvature_nonabelian, dark_state_section,
    gauge_transform_nonabelian, wilczek_zee_field, wz_connection, Gauge, GaugePhase, GaugeTransform, Method,
    CURVATURE_STEP,
};
use holonomy_core::field::{AbelianField, MatrixField};
use holonomy_core::linalg::{self, commutator, re, CMatrix, CVector, C64, I};
use holonomy_core::model::{dark_states, qubit, standard_gates, tensor_product, GateMatrix, HamiltonianFamily};
use holonomy_core::spectral::{FramePathOptions, Selection};
use holonomy_core::transport::{
    ab_solenoid_field, holonomy_by_transport, line_integral_abelian, path_ordered_exp, phase_decomposition,
    schrodinger_evolve, surface_integral_abelian, two_level_drive, two_level_lower_reference, ParamPath,
    SignConvention, SolenoidGauge, SurfacePatch,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::EstimatedAnyon;
use crate::jobs::{holonomic_cnot, modulus_pattern_deviation, sample_anyon};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CriterionResult {
    /// One line: `[PASS] 3 title (0.12 s): detail`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

pub const TITLES: [&str; 10] = [
    "two-level sign change",
    "single-valued gauge connection",
    "dark-state connection entries",
    "holonomic CNOT loop",
    "Stokes and Aharonov-Bohm",
    "non-Abelian gauge structure",
    "phase decomposition",
    "anyon closed forms",
    "anyon Monte Carlo",
    "gate library",
];

/// Collects named sub-checks into one verdict.
struct Checks {
    parts: Vec<String>,
    passed: bool,
}

impl Checks {
    fn new() -> Self {
        Checks {
            parts: Vec::new(),
            passed: true,
        }
    }

    fn check(&mut self, ok: bool, text: String) {
        self.passed &= ok;
        self.parts.push(format!("{}{text}", if ok { "" } else { "FAILED " }));
    }

    fn within(&mut self, label: &str, value: f64, tol: f64) {
        self.check(value <= tol, format!("{label} {value:.3e} (tol {tol:.0e})"));
    }

    fn budget(&mut self, start: Instant, limit: f64) {
        let t = start.elapsed().as_secs_f64();
        self.check(t < limit, format!("runtime {t:.2} s (limit {limit} s)"));
    }

    fn error(&mut self, what: &str, e: impl std::fmt::Display) {
        self.check(false, format!("{what}: {e}"));
    }
}

/// Run criterion `id` (1 to 10).
pub fn run_criterion(id: u8) -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    match id {
        1 => sign_change(&mut c, start),
        2 => single_valued(&mut c),
        3 => dark_entries(&mut c),
        4 => holonomic_gate(&mut c, start),
        5 => stokes(&mut c),
        6 => gauge_structure(&mut c),
        7 => phase_split(&mut c, start),
        8 => anyon_closed_forms(&mut c),
        9 => anyon_monte_carlo(&mut c, start),
        10 => gates(&mut c),
        _ => c.check(false, format!("no criterion {id}")),
    }
    CriterionResult {
        id,
        title: TITLES.get(id as usize - 1).copied().unwrap_or("unknown"),
        passed: c.passed,
        detail: c.parts.join("; "),
        elapsed: start.elapsed(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=10).map(run_criterion).collect()
}

fn sign_change(c: &mut Checks, start: Instant) {
    let fam = HamiltonianFamily::two_level();
    let result = ParamPath::cyclic_sweep(fam.schema(), &[1.0, 0.0], "phi", 0.0, TAU)
        .and_then(|p| holonomy_by_transport(&fam, &p, &Selection::Indices(vec![0]), 2000, &Default::default()));
    match result {
        Ok(h) => c.within("|closure + 1|", (h.unitary[(0, 0)] + 1.0).norm(), 1e-6),
        Err(e) => c.error("transport", e),
    }
    c.budget(start, 1.0);
}

fn single_valued(c: &mut Checks) {
    let fam = HamiltonianFamily::two_level();
    let gauge = Gauge::Phased {
        component: 1,
        phase: GaugePhase::linear(1, 0.5),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut analytic, mut fd): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let phi = rng.random_range(-PI..PI);
        let p = match fam.point(&[1.0, phi]) {
            Ok(p) => p,
            Err(e) => return c.error("point", e),
        };
        let a = berry_connection(&fam, &p, 0, "phi", &gauge, Method::Analytic);
        let f = berry_connection(&fam, &p, 0, "phi", &gauge, Method::FiniteDifference { step: 1e-5 });
        match (a, f) {
            (Ok(a), Ok(f)) => {
                analytic = analytic.max((a - 0.5).abs());
                fd = fd.max((f - 0.5).abs());
            }
            (Err(e), _) | (_, Err(e)) => return c.error("connection", e),
        }
    }
    c.within("analytic |A - 1/2|", analytic, 1e-8);
    c.within("finite-difference |A - 1/2|", fd, 1e-5);
}

fn dark_entries(c: &mut Checks) {
    let fam = HamiltonianFamily::dark_restricted(1.0, 1.0);
    let sec = dark_state_section();
    let (mut vanishing, mut offdiag): (f64, f64) = (0.0, 0.0);
    for i in 0..20 {
        for j in 0..20 {
            let t3 = -PI + TAU * (i as f64 + 0.5) / 20.0;
            let t4 = -PI + TAU * (j as f64 + 0.5) / 20.0;
            let r = fam.point(&[t3, t4]).and_then(|p| {
                Ok((wz_connection(&fam, &sec, &p, "theta3")?, wz_connection(&fam, &sec, &p, "theta4")?))
            });
            let (a3, mut a4) = match r {
                Ok(v) => v,
                Err(e) => return c.error("connection", e),
            };
            offdiag = offdiag
                .max((a4[(2, 3)] + t3.sin()).norm())
                .max((a4[(3, 2)] - t3.sin()).norm());
            a4[(2, 3)] = re(0.0);
            a4[(3, 2)] = re(0.0);
            vanishing = vanishing.max(linalg::max_abs(&a3)).max(linalg::max_abs(&a4));
        }
    }
    c.within("vanishing entries", vanishing, 1e-10);
    c.within("(3,4)/(4,3) vs -/+ sin theta3", offdiag, 1e-8);
}

fn holonomic_gate(c: &mut Checks, start: Instant) {
    let fam = HamiltonianFamily::dark_restricted(1.0, 1.0);
    let run = || -> holonomy_core::Result<(CMatrix, CMatrix)> {
        let path = ParamPath::rectangle(fam.schema(), "theta3", (0.0, FRAC_PI_2), "theta4", (0.0, FRAC_PI_2), &[0.0, 0.0])?;
        let field = wilczek_zee_field(&fam, &dark_state_section())?;
        let w = path_ordered_exp(&field, &path, 1.0, SignConvention::MinusI, 10_000)?;
        let options = FramePathOptions {
            initial_basis: Some(dark_states(0.0, 0.0).to_vec()),
            ..Default::default()
        };
        let t = holonomy_by_transport(&fam, &path, &Selection::Indices(vec![1, 2, 3, 4]), 10_000, &options)?;
        Ok((w.unitary, t.unitary))
    };
    let (w, t) = match run() {
        Ok(v) => v,
        Err(e) => return c.error("holonomy", e),
    };
    let target = holonomic_cnot();
    c.within("path-ordered vs target", linalg::max_diff(&w, &target), 1e-4);
    c.within("transport vs target", linalg::max_diff(&t, &target), 1e-4);
    c.within("method agreement", linalg::max_diff(&w, &t), 1e-4);
    let cnot = GateMatrix::cnot().into_matrix();
    let pattern = |u: &CMatrix| u.iter().zip(cnot.iter()).all(|(a, b)| (a.norm() > 0.5) == (b.norm() > 0.5));
    c.check(
        pattern(&w) && pattern(&t),
        format!("|entries| pattern of CNOT (modulus deviation {:.3e})", modulus_pattern_deviation(&w, &cnot)),
    );
    c.budget(start, 10.0);
}

fn stokes(c: &mut Checks) {
    let names = ["theta3", "theta4"];
    let a = AbelianField::new("sin", &names, |x| vec![0.0, x[0].sin()]);
    let xy = ["x", "y"];
    let bump = Arc::new(|p: &[f64]| (-(p[0] - 0.5).powi(2) - p[1].powi(2)).exp());
    let run = || -> holonomy_core::Result<(f64, f64, f64, f64)> {
        let patch = SurfacePatch::new("theta3", (0.0, FRAC_PI_2), "theta4", (0.0, FRAC_PI_2), (20_000, 20), vec![])?;
        let line = line_integral_abelian(&a, &patch.boundary()?, 1.0, 40_000)?;
        let surface = surface_integral_abelian(|x| x[0].cos(), &patch);
        let circle = ParamPath::circle(&xy, "x", "y", (0.0, 0.0), 1.0, &[0.0, 0.0])?;
        let plain = line_integral_abelian(&ab_solenoid_field(2.5, SolenoidGauge::Azimuthal), &circle, 1.0, 200_000)?;
        let shifted = line_integral_abelian(
            &ab_solenoid_field(2.5, SolenoidGauge::WithGradient(bump)),
            &circle,
            1.0,
            200_000,
        )?;
        Ok((line, surface, plain, shifted))
    };
    match run() {
        Ok((line, surface, plain, shifted)) => {
            c.within("|line - surface|", (line - surface).abs(), 1e-6);
            c.within("|solenoid phase - flux|", (plain - 2.5).abs(), 1e-9);
            c.within("gauge-shift change", (plain - shifted).abs(), 1e-9);
        }
        Err(e) => c.error("integral", e),
    }
}

fn pauli() -> [CMatrix; 3] {
    [
        GateMatrix::pauli_x().into_matrix(),
        GateMatrix::pauli_y().into_matrix(),
        GateMatrix::pauli_z().into_matrix(),
    ]
}

fn smooth_field() -> MatrixField {
    let [x, y, z] = pauli();
    MatrixField::new("smooth", &["u", "v"], 2, move |p| {
        Ok(vec![
            &x * re(p[1].sin()) + &z * re(0.4 * p[0]),
            &y * re(p[0] * p[1]) + &x * re(0.3) + &z * re(p[1].cos()),
        ])
    })
}

/// Residual of `A' = A + ∂Λ + i g [Λ, A]` for `S = exp(i g Λ)`, `|Λ| ~ eps`.
fn infinitesimal_residual(eps: f64, p: &[f64]) -> holonomy_core::Result<f64> {
    let [x, y, z] = pauli();
    let gen = move |q: &[f64]| (&x * re(q[0].cos()) + &y * re(q[0] * q[1]) + &z * re(0.5 + q[1])) * re(eps);
    let gen_s = gen.clone();
    let s = GaugeTransform::new(move |q| linalg::expm_i_hermitian(&gen_s(q), 1.0));
    let field = smooth_field();
    let a = field.eval(p)?;
    let a_prime = gauge_transform_nonabelian(&field, &s, 1.0).eval(p)?;
    let lam = gen(p);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for mu in 0..2 {
        let (mut hi, mut lo) = (p.to_vec(), p.to_vec());
        hi[mu] += h;
        lo[mu] -= h;
        let d_lam = (gen(&hi) - gen(&lo)) / re(2.0 * h);
        let predicted = &a[mu] + d_lam + commutator(&lam, &a[mu]) * I;
        worst = worst.max(linalg::max_diff(&a_prime[mu], &predicted));
    }
    Ok(worst)
}

fn gauge_structure(c: &mut Checks) {
    let [_, _, z] = pauli();
    let z2 = z.clone();
    let s = GaugeTransform::new(move |q| linalg::expm_i_hermitian(&z2, q[0]));
    let p = [0.4, -0.6];
    match curvature_covariance_check(&smooth_field(), &s, 1.0, &p, 0, 1, CURVATURE_STEP) {
        Ok(r) => c.within("covariance residual", r, 1e-5),
        Err(e) => c.error("covariance", e),
    }
    match (infinitesimal_residual(1e-4, &p), infinitesimal_residual(5e-5, &p)) {
        (Ok(r1), Ok(r2)) => {
            let order = (r1 / r2).log2();
            c.check(
                (order - 2.0).abs() < 0.25 && r1 < 1e-6,
                format!("infinitesimal transform residual {r1:.3e} at |Λ| = 1e-4, order {order:.2}"),
            );
        }
        (Err(e), _) | (_, Err(e)) => c.error("infinitesimal transform", e),
    }
    let a = AbelianField::new("a", &["u", "v"], |q| vec![q[1].powi(2) * q[0], (q[0] * q[1]).sin()]);
    let a2 = a.clone();
    let along_z = MatrixField::new("z", &["u", "v"], 2, move |q| {
        Ok(a2.eval(q)?.into_iter().map(|v| &z * re(v)).collect())
    });
    let r = curvature_nonabelian(&along_z, &p, 0, 1, 1.0, CURVATURE_STEP)
        .and_then(|f| Ok((f, curvature_abelian(&a, &p, 0, 1, CURVATURE_STEP)?)));
    match r {
        Ok((f, fa)) => {
            let dev = (f[(0, 0)] - re(fa)).norm().max((f[(1, 1)] + re(fa)).norm());
            c.within("commuting field vs Abelian curvature", dev, 1e-8);
        }
        Err(e) => c.error("curvature", e),
    }
}

fn phase_split(c: &mut Checks, start: Instant) {
    // static eigenstate, then the circular drive at two adiabaticities
    let e0 = 0.7;
    let h_static = move |_: f64| CMatrix::from_diagonal(&CVector::from_vec(vec![re(e0), re(-e0)]));
    let reference = |_: f64| CVector::from_vec(vec![re(1.0), re(0.0)]);
    let mut worst_identity: f64 = 0.0;
    let mut worst_removed: f64 = 0.0;
    match schrodinger_evolve(h_static, &reference(0.0), 3.0, 20_000)
        .and_then(|tr| phase_decomposition(&tr, h_static, reference))
    {
        Ok(d) => {
            worst_identity = worst_identity.max(d.identity_residual);
            worst_removed = worst_removed.max(d.removed_dynamical.abs());
        }
        Err(e) => return c.error("static evolution", e),
    }
    let mut adiabatic = f64::NAN;
    for (omega_t, steps) in [(50.0, 50_000), (200.0, 100_000)] {
        let t = omega_t / 2.0;
        let h = two_level_drive(1.0, t);
        let reference = two_level_lower_reference(t);
        match schrodinger_evolve(&h, &reference(0.0), t, steps).and_then(|tr| phase_decomposition(&tr, &h, &reference)) {
            Ok(d) => {
                worst_identity = worst_identity.max(d.identity_residual);
                worst_removed = worst_removed.max(d.removed_dynamical.abs());
                if omega_t == 200.0 {
                    adiabatic = linalg::wrap_phase(d.geometric - PI).abs();
                }
            }
            Err(e) => return c.error("driven evolution", e),
        }
    }
    c.within("|Δλ - (f - F)|", worst_identity, 1e-6);
    c.within("|f| after removal", worst_removed, 1e-6);
    c.within("|F - π| at ωT = 200", adiabatic, 0.05);
    c.budget(start, 30.0);
}

fn anyon_closed_forms(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut gamma_err, mut charge_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let nu = rng.random_range(0.01..=1.0);
        let radius = rng.random_range(0.1..10.0);
        let l0 = rng.random_range(0.5..2.0);
        let phi = flux_ratio(radius, l0);
        let expected = -TAU * nu * phi;
        match quasihole_berry_phase(BerryPhaseMode::Uniform { nu }, radius, l0)
            .and_then(|g| Ok((g, effective_charge(g, phi)?)))
        {
            Ok((g, q)) => {
                gamma_err = gamma_err.max((g - expected).abs() / expected.abs());
                charge_err = charge_err.max((q + nu).abs() / nu);
            }
            Err(e) => return c.error("closed form", e),
        }
    }
    c.within("relative γ error", gamma_err, 4.0 * f64::EPSILON);
    c.within("relative e*/e error", charge_err, 4.0 * f64::EPSILON);
}

/// Settings of the Monte Carlo criterion.
pub fn monte_carlo_settings() -> EstimatedAnyon {
    EstimatedAnyon {
        electrons: 6,
        m: 3,
        l0: 1.0,
        samples: 100_000,
        burn_in: 2000,
        step: 1.5,
        radius: 3.0,
        r_max: 8.0,
        bins: 80,
        batches: 50,
        bulk_radius: 1.0,
    }
}

fn anyon_monte_carlo(c: &mut Checks, start: Instant) {
    let settings = monte_carlo_settings();
    let seed = 2024;
    let (first, second) = rayon::join(|| sample_anyon(&settings, seed), || sample_anyon(&settings, seed));
    let (run, again) = match (first, second) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return c.error("sampling", e),
    };
    c.check(
        run.ground.batch_counts == again.ground.batch_counts && run.hole.batch_counts == again.hole.batch_counts,
        "same seed reproduces the chains".into(),
    );
    let target = 1.0 / (6.0 * PI);
    match run.ground.disk_average(settings.bulk_radius) {
        Ok((rho, err)) => c.check(
            (rho - target).abs() <= 3.0 * err,
            format!("bulk density {rho:.5} ± {err:.5} vs {target:.5}"),
        ),
        Err(e) => c.error("bulk density", e),
    }
    let phi = flux_ratio(settings.radius, settings.l0);
    match quasihole_berry_phase(BerryPhaseMode::Estimated(&run.hole), settings.radius, settings.l0)
        .and_then(|g| effective_charge(g, phi))
    {
        Ok(q) => {
            let rel = (q.abs() * 3.0 - 1.0).abs();
            c.check(rel <= 0.2, format!("e*/e = {q:.4} ({:.1}% from 1/3)", 100.0 * rel));
        }
        Err(e) => c.error("charge", e),
    }
    c.check(
        (0.05..=0.95).contains(&run.ground_acceptance),
        format!("acceptance {:.3}", run.ground_acceptance),
    );
    c.budget(start, 300.0);
}

fn gates(c: &mut Checks) {
    let o = re(0.0);
    let l = re(1.0);
    let m = |v: [C64; 16]| CMatrix::from_row_slice(4, 4, &v);
    let m2 = |v: [C64; 4]| CMatrix::from_row_slice(2, 2, &v);
    let phi = 0.73;
    let expected = [
        ("I", m2([l, o, o, l])),
        ("sigma1", m2([o, l, l, o])),
        ("sigma2", m2([o, -I, I, o])),
        ("sigma3", m2([l, o, o, -l])),
        ("CNOT", m([l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o])),
        ("SWAP", m([l, o, o, o, o, o, l, o, o, l, o, o, o, o, o, l])),
        (
            "PHASE",
            m([l, o, o, o, o, l, o, o, o, o, l, o, o, o, o, C64::from_polar(1.0, phi)]),
        ),
    ];
    let gates = standard_gates(phi);
    let exact = expected
        .iter()
        .all(|(name, want)| gates.iter().any(|(n, g)| n == name && g.matrix() == want));
    c.check(exact, "gate matrices bit-exact".into());
    let id4 = GateMatrix::identity(4);
    let (cnot, swap) = (GateMatrix::cnot(), GateMatrix::swap());
    c.check(
        cnot.compose(&cnot) == id4 && swap.compose(&swap) == id4,
        "CNOT² = SWAP² = I exactly".into(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let worst = (0..20)
        .map(|_| {
            let p = rng.random_range(-PI..PI);
            linalg::max_diff(GateMatrix::phase(p).compose(&GateMatrix::phase(-p)).matrix(), id4.matrix())
        })
        .fold(0.0, f64::max);
    c.within("PHASE(φ)·PHASE(-φ) - I", worst, 2.0 * f64::EPSILON);
    let basis_ok = [(false, false), (false, true), (true, false), (true, true)]
        .iter()
        .enumerate()
        .all(|(k, &(a, b))| {
            let v = tensor_product(&qubit(a), &qubit(b));
            (0..4).all(|j| v.as_vector()[j] == if j == k { l } else { o })
        });
    c.check(basis_ok, "two-qubit basis |ab> = e_(2a+b) exactly".into());
}
