use std::collections::BTreeMap;
use std::f64::consts::TAU;

use holonomy_cli::config::*;
use holonomy_core::transport::SignConvention;
use proptest::prelude::*;

fn two_level() -> SystemSpec {
    SystemSpec {
        id: "two_level".into(),
        constants: BTreeMap::new(),
    }
}

fn name() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_-]{0,12}"
}

fn path() -> impl Strategy<Value = PathSpec> {
    prop_oneof![
        (0.1..5.0f64, -3.0..3.0f64, 0.1..TAU).prop_map(|(r, start, period)| PathSpec::Sweep {
            param: "phi".into(),
            start,
            period,
            base: vec![r, 0.0],
        }),
        (1.0..4.0f64, 0.1..0.9f64).prop_map(|(cx, radius)| PathSpec::Circle {
            p1: "r".into(),
            p2: "phi".into(),
            center: [cx, 0.0],
            radius,
            base: vec![0.0, 0.0],
        }),
        (0.5..2.0f64, 2.5..4.0f64, 0.0..1.0f64, 1.5..3.0f64).prop_map(|(a, b, c, d)| PathSpec::Rectangle {
            p1: "r".into(),
            range1: [a, b],
            p2: "phi".into(),
            range2: [c, d],
            base: vec![0.0, 0.0],
        }),
    ]
}

fn spec() -> impl Strategy<Value = JobSpec> {
    prop_oneof![
        (path(), 2usize..5000, any::<bool>(), 0.5..2.0f64, 1e-12..1e-3f64).prop_map(|(path, steps, plus, g, tau_deg)| {
            JobSpec::Holonomy(HolonomyJob {
                system: two_level(),
                path,
                steps,
                selection: SelectionSpec::Indices(vec![0]),
                method: HolonomyMethod::Transport,
                sign: if plus { SignConvention::PlusI } else { SignConvention::MinusI },
                g,
                tau_deg,
                single_valued: None,
                target: None,
            })
        }),
        (0.1..3.0f64, 1.0..1e4f64, 2usize..100_000)
            .prop_map(|(r, omega_t, steps)| JobSpec::Evolve(EvolveJob { r, omega_t, steps })),
        (0.01..1.0f64, 0.0..10.0f64, 0.1..3.0f64)
            .prop_map(|(nu, radius, l0)| JobSpec::Anyon(AnyonJob::Uniform { nu, radius, l0 })),
        (2usize..20, 0u32..4, 0.5..2.0f64, 1000usize..50_000, 0.0..4.0f64).prop_map(
            |(electrons, k, l0, samples, radius)| {
                JobSpec::Anyon(AnyonJob::Estimated(EstimatedAnyon {
                    electrons,
                    m: 2 * k + 1,
                    l0,
                    samples,
                    burn_in: 100,
                    step: 1.5,
                    radius,
                    r_max: 8.0,
                    bins: 40,
                    batches: 20,
                    bulk_radius: 1.0,
                }))
            }
        ),
        (-10.0..10.0f64).prop_map(|phase| JobSpec::Gates(GatesJob { phase })),
        (1.0..1e3f64, 0.1..3.0f64, 1.0..100.0f64, 0.1..10.0f64)
            .prop_map(|(area, l0, electrons, b)| JobSpec::Landau(LandauJob { area, l0, electrons, b })),
        (0.1..3.0f64, 0.0..TAU, 1e-7..1e-2f64).prop_map(|(r, phi, h)| JobSpec::Connection(ConnectionJob {
            system: two_level(),
            points: vec![vec![r, phi]],
            direction: "phi".into(),
            target: ConnectionTarget::Berry {
                index: 1,
                gauge: GaugeSpec::Phased {
                    component: 0,
                    param: "phi".into(),
                    coefficient: -0.5,
                },
                method: MethodSpec::FiniteDifference { h },
            },
        })),
    ]
}

fn config() -> impl Strategy<Value = Config> {
    prop::collection::vec((name(), 0u64..=i64::MAX as u64, spec()), 1..5).prop_map(|jobs| {
        let jobs = jobs
            .into_iter()
            .enumerate()
            .map(|(i, (n, seed, spec))| JobConfig {
                name: format!("{n}{i}"),
                seed,
                spec,
            })
            .collect();
        Config { jobs }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn emitted_config_parses_back(c in config()) {
        let text = emit_config(&c);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, c);
    }
}

#[test]
fn dark_system_gets_default_constants() {
    let text = r#"
[[job]]
kind = "holonomy"
system = "dark_5p1_restricted"
window = [-0.5, 0.5]
[job.path]
shape = "rectangle"
p1 = "theta3"
range1 = [0.0, 1.5]
p2 = "theta4"
range2 = [0.0, 1.5]
"#;
    let c = parse_config(text).unwrap();
    let JobSpec::Holonomy(h) = &c.jobs[0].spec else { panic!("wrong kind") };
    assert_eq!(h.selection, SelectionSpec::Window { min: -0.5, max: 0.5 });
    assert_eq!(parse_config(&emit_config(&c)).unwrap(), c);
}

#[test]
fn bad_system_does_not_cascade() {
    let text = r#"
[[job]]
kind = "holonomy"
system = "nope"
indices = [0]
[job.path]
shape = "sweep"
param = "phi"
"#;
    let errs = parse_config(text).unwrap_err().0;
    assert_eq!(errs.len(), 1, "{errs:?}");
    assert_eq!(errs[0].path, "job[0].system");
}
