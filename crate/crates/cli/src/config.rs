//! Job files: TOML with one `[[job]]` table per computation.
//!
//! Parsing never stops at the first problem. Every error carries the dotted
//! path of the offending field, e.g. `job[1].path.radius`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;

use holonomy_core::model::{registered_families, FamilyInfo, DARK_RESTRICTED};
use holonomy_core::transport::SignConvention;
use toml::{Table, Value};

pub const DEFAULT_HOLONOMY_STEPS: usize = 2000;
pub const DEFAULT_EVOLVE_STEPS: usize = 100_000;
pub const MAX_STEPS: usize = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// All problems found in one config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} config error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub jobs: Vec<JobConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub name: String,
    pub seed: u64,
    pub spec: JobSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobSpec {
    Connection(ConnectionJob),
    Holonomy(HolonomyJob),
    Evolve(EvolveJob),
    Anyon(AnyonJob),
    Gates(GatesJob),
    Landau(LandauJob),
}

impl JobSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            JobSpec::Connection(_) => "connection",
            JobSpec::Holonomy(_) => "holonomy",
            JobSpec::Evolve(_) => "evolve",
            JobSpec::Anyon(_) => "anyon",
            JobSpec::Gates(_) => "gates",
            JobSpec::Landau(_) => "landau",
        }
    }
}

pub const KINDS: [&str; 6] = ["connection", "holonomy", "evolve", "anyon", "gates", "landau"];

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub id: String,
    pub constants: BTreeMap<String, f64>,
}

impl SystemSpec {
    pub fn constants_vec(&self) -> Vec<(String, f64)> {
        self.constants.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathSpec {
    Waypoints { points: Vec<Vec<f64>>, closed: bool },
    Circle { p1: String, p2: String, center: [f64; 2], radius: f64, base: Vec<f64> },
    Rectangle { p1: String, range1: [f64; 2], p2: String, range2: [f64; 2], base: Vec<f64> },
    /// One parameter advanced by `period`, the others held at `base`.
    Sweep { param: String, start: f64, period: f64, base: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaugeSpec {
    Transport,
    Anchored { component: usize },
    /// Anchored, then multiplied by `exp(i · coefficient · param)`.
    Phased { component: usize, param: String, coefficient: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    Analytic,
    FiniteDifference { h: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConnectionTarget {
    Berry { index: usize, gauge: GaugeSpec, method: MethodSpec },
    WilczekZee,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionJob {
    pub system: SystemSpec,
    pub points: Vec<Vec<f64>>,
    pub direction: String,
    pub target: ConnectionTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionSpec {
    Indices(Vec<usize>),
    Window { min: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolonomyMethod {
    Transport,
    Wilson,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetGate {
    Identity,
    Cnot,
    /// Identity on the first pair, `i σ1` on the second.
    HolonomicCnot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyJob {
    pub system: SystemSpec,
    pub path: PathSpec,
    pub steps: usize,
    pub selection: SelectionSpec,
    pub method: HolonomyMethod,
    pub sign: SignConvention,
    pub g: f64,
    pub tau_deg: f64,
    pub single_valued: Option<String>,
    pub target: Option<TargetGate>,
}

/// Two-level drive around the `phi` circle.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveJob {
    pub r: f64,
    pub omega_t: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyonJob {
    Uniform { nu: f64, radius: f64, l0: f64 },
    Estimated(EstimatedAnyon),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedAnyon {
    pub electrons: usize,
    pub m: u32,
    pub l0: f64,
    pub samples: usize,
    pub burn_in: usize,
    pub step: f64,
    pub radius: f64,
    pub r_max: f64,
    pub bins: usize,
    pub batches: usize,
    pub bulk_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatesJob {
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandauJob {
    pub area: f64,
    pub l0: f64,
    pub electrons: f64,
    pub b: f64,
}

/// Field reader that records every problem instead of returning early.
struct Reader<'a> {
    table: &'a Table,
    path: String,
    used: BTreeSet<String>,
}

impl<'a> Reader<'a> {
    fn new(table: &'a Table, path: String) -> Self {
        Reader {
            table,
            path,
            used: BTreeSet::new(),
        }
    }

    fn at(&self, key: &str) -> String {
        format!("{}.{key}", self.path)
    }

    fn err(&self, errs: &mut Vec<ConfigError>, key: &str, message: impl Into<String>) {
        errs.push(ConfigError {
            path: self.at(key),
            message: message.into(),
        });
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        self.used.insert(key.to_string());
        self.table.get(key)
    }

    /// Mark keys as seen without checking them.
    fn skip(&mut self, keys: &[&str]) {
        self.used.extend(keys.iter().map(|k| k.to_string()));
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn opt_str(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Option<String> {
        match self.raw(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.err(errs, key, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn req_str(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Option<String> {
        let v = self.opt_str(key, errs);
        if v.is_none() && !self.has(key) {
            self.err(errs, key, "missing required field");
        }
        v
    }

    fn opt_f64(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Option<f64> {
        let v = match self.raw(key)? {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            other => {
                self.err(errs, key, format!("expected a number, found {}", other.type_str()));
                return None;
            }
        };
        if !v.is_finite() {
            self.err(errs, key, "must be finite");
            return None;
        }
        Some(v)
    }

    fn req_f64(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Option<f64> {
        let v = self.opt_f64(key, errs);
        if v.is_none() && !self.has(key) {
            self.err(errs, key, "missing required field");
        }
        v
    }

    /// Number inside `check`, or the default when absent.
    fn f64_in(
        &mut self,
        key: &str,
        default: Option<f64>,
        check: (fn(f64) -> bool, &str),
        errs: &mut Vec<ConfigError>,
    ) -> Option<f64> {
        let v = match default {
            Some(d) => {
                if !self.has(key) {
                    self.used.insert(key.to_string());
                    return Some(d);
                }
                self.opt_f64(key, errs)?
            }
            None => self.req_f64(key, errs)?,
        };
        if !(check.0)(v) {
            self.err(errs, key, format!("{v} is out of range: must be {}", check.1));
            return None;
        }
        Some(v)
    }

    fn opt_int(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Option<i64> {
        match self.raw(key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.err(errs, key, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn uint_in(
        &mut self,
        key: &str,
        default: Option<u64>,
        (lo, hi): (u64, u64),
        errs: &mut Vec<ConfigError>,
    ) -> Option<u64> {
        let v = if !self.has(key) {
            self.used.insert(key.to_string());
            match default {
                Some(d) => return Some(d),
                None => {
                    self.err(errs, key, "missing required field");
                    return None;
                }
            }
        } else {
            self.opt_int(key, errs)?
        };
        if v < lo as i64 || (v as u64) > hi {
            self.err(errs, key, format!("{v} is out of range [{lo}, {hi}]"));
            return None;
        }
        Some(v as u64)
    }

    fn opt_bool(&mut self, key: &str, default: bool, errs: &mut Vec<ConfigError>) -> bool {
        match self.raw(key) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(other) => {
                self.err(errs, key, format!("expected a boolean, found {}", other.type_str()));
                default
            }
        }
    }

    fn f64_list(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Option<Vec<f64>> {
        let v = self.raw(key)?;
        let Value::Array(items) = v else {
            self.err(errs, key, format!("expected an array of numbers, found {}", v.type_str()));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match item {
                Value::Float(f) if f.is_finite() => out.push(*f),
                Value::Integer(n) => out.push(*n as f64),
                _ => {
                    errs.push(ConfigError {
                        path: format!("{}[{i}]", self.at(key)),
                        message: "expected a finite number".into(),
                    });
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn pair(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Option<[f64; 2]> {
        let present = self.has(key);
        let v = self.f64_list(key, errs);
        match v {
            Some(v) if v.len() == 2 => Some([v[0], v[1]]),
            Some(v) => {
                self.err(errs, key, format!("expected 2 numbers, found {}", v.len()));
                None
            }
            None => {
                if !present {
                    self.err(errs, key, "missing required field");
                }
                None
            }
        }
    }

    fn sub_table(&mut self, key: &str, errs: &mut Vec<ConfigError>) -> Option<&'a Table> {
        match self.raw(key)? {
            Value::Table(t) => Some(t),
            other => {
                self.err(errs, key, format!("expected a table, found {}", other.type_str()));
                None
            }
        }
    }

    fn finish(self, errs: &mut Vec<ConfigError>) {
        for key in self.table.keys() {
            if !self.used.contains(key) {
                errs.push(ConfigError {
                    path: self.at(key),
                    message: "unknown field".into(),
                });
            }
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0
}

fn non_negative(x: f64) -> bool {
    x >= 0.0
}

fn any(_: f64) -> bool {
    true
}

fn family_info(id: &str) -> Option<FamilyInfo> {
    registered_families().into_iter().find(|f| f.id == id)
}

fn read_system(r: &mut Reader<'_>, errs: &mut Vec<ConfigError>) -> Option<(SystemSpec, FamilyInfo)> {
    let id = r.req_str("system", errs);
    let constants_table = r.sub_table("constants", errs);
    let id = id?;
    let Some(info) = family_info(&id) else {
        let names: Vec<_> = registered_families().iter().map(|f| f.id).collect();
        r.err(
            errs,
            "system",
            format!("unknown system `{id}`; registered systems: {}", names.join(", ")),
        );
        return None;
    };
    let mut constants = BTreeMap::new();
    if let Some(t) = constants_table {
        let mut c = Reader::new(t, r.at("constants"));
        for (name, _) in info.constants {
            if let Some(v) = c.opt_f64(name, errs) {
                constants.insert(name.to_string(), v);
            }
        }
        c.finish(errs);
    }
    Some((SystemSpec { id, constants }, info))
}

fn param_in(r: &Reader<'_>, key: &str, name: &str, info: &FamilyInfo, errs: &mut Vec<ConfigError>) -> bool {
    if info.parameters.contains(&name) {
        return true;
    }
    r.err(
        errs,
        key,
        format!(
            "`{name}` is not a parameter of `{}` (parameters: {})",
            info.id,
            info.parameters.join(", ")
        ),
    );
    false
}

fn point_of_len(r: &Reader<'_>, key: &str, p: &[f64], info: &FamilyInfo, errs: &mut Vec<ConfigError>) -> bool {
    if p.len() == info.parameters.len() {
        return true;
    }
    r.err(
        errs,
        key,
        format!(
            "expected {} coordinates ({}), found {}",
            info.parameters.len(),
            info.parameters.join(", "),
            p.len()
        ),
    );
    false
}

fn read_points(r: &mut Reader<'_>, key: &str, info: &FamilyInfo, errs: &mut Vec<ConfigError>) -> Option<Vec<Vec<f64>>> {
    let Some(v) = r.raw(key) else {
        r.err(errs, key, "missing required field");
        return None;
    };
    let Value::Array(items) = v else {
        r.err(errs, key, format!("expected an array of points, found {}", v.type_str()));
        return None;
    };
    if items.is_empty() {
        r.err(errs, key, "needs at least one point");
        return None;
    }
    let mut out = Vec::new();
    let mut ok = true;
    for (i, item) in items.iter().enumerate() {
        let path = format!("{}[{i}]", r.at(key));
        let coords: Option<Vec<f64>> = match item {
            Value::Array(cs) => cs
                .iter()
                .map(|c| match c {
                    Value::Float(f) if f.is_finite() => Some(*f),
                    Value::Integer(n) => Some(*n as f64),
                    _ => None,
                })
                .collect(),
            _ => None,
        };
        match coords {
            Some(c) if c.len() == info.parameters.len() => out.push(c),
            Some(c) => {
                errs.push(ConfigError {
                    path,
                    message: format!(
                        "expected {} coordinates ({}), found {}",
                        info.parameters.len(),
                        info.parameters.join(", "),
                        c.len()
                    ),
                });
                ok = false;
            }
            None => {
                errs.push(ConfigError {
                    path,
                    message: "expected an array of finite numbers".into(),
                });
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

fn read_base(r: &mut Reader<'_>, info: &FamilyInfo, errs: &mut Vec<ConfigError>) -> Option<Vec<f64>> {
    if !r.has("base") {
        r.used.insert("base".into());
        return Some(vec![0.0; info.parameters.len()]);
    }
    let base = r.f64_list("base", errs)?;
    point_of_len(r, "base", &base, info, errs).then_some(base)
}

fn read_path(r: &mut Reader<'_>, info: &FamilyInfo, errs: &mut Vec<ConfigError>) -> Option<PathSpec> {
    let Some(t) = r.sub_table("path", errs) else {
        if !r.has("path") {
            r.err(errs, "path", "missing required field");
        }
        return None;
    };
    let mut p = Reader::new(t, r.at("path"));
    let shape = p.req_str("shape", errs);
    let spec = match shape.as_deref() {
        Some("waypoints") => {
            let closed = p.opt_bool("closed", true, errs);
            let points = read_points(&mut p, "points", info, errs);
            match points {
                Some(points) if points.len() < 2 => {
                    p.err(errs, "points", "needs at least two waypoints");
                    None
                }
                Some(points) => {
                    let (first, last) = (&points[0], &points[points.len() - 1]);
                    if closed && first != last {
                        errs.push(ConfigError {
                            path: format!("{}[{}]", p.at("points"), points.len() - 1),
                            message: format!(
                                "closed loop must end where it starts: waypoint {} is {last:?} but waypoint 0 is {first:?}",
                                points.len() - 1
                            ),
                        });
                        None
                    } else {
                        Some(PathSpec::Waypoints { points, closed })
                    }
                }
                None => None,
            }
        }
        Some("circle") => {
            let p1 = p.req_str("p1", errs);
            let p2 = p.req_str("p2", errs);
            let center = p.pair("center", errs);
            let radius = p.f64_in("radius", None, (positive, "> 0"), errs);
            let base = read_base(&mut p, info, errs);
            let (p1, p2) = (p1?, p2?);
            let ok = param_in(&p, "p1", &p1, info, errs) & param_in(&p, "p2", &p2, info, errs);
            if ok && p1 == p2 {
                p.err(errs, "p2", "must differ from p1");
                return None;
            }
            ok.then_some(PathSpec::Circle { p1, p2, center: center?, radius: radius?, base: base? })
        }
        Some("rectangle") => {
            let p1 = p.req_str("p1", errs);
            let range1 = p.pair("range1", errs);
            let p2 = p.req_str("p2", errs);
            let range2 = p.pair("range2", errs);
            let base = read_base(&mut p, info, errs);
            for (key, range) in [("range1", range1), ("range2", range2)] {
                if let Some([a, b]) = range {
                    if a == b {
                        p.err(errs, key, "range has zero width");
                    }
                }
            }
            let (p1, p2) = (p1?, p2?);
            let ok = param_in(&p, "p1", &p1, info, errs) & param_in(&p, "p2", &p2, info, errs);
            if ok && p1 == p2 {
                p.err(errs, "p2", "must differ from p1");
                return None;
            }
            let (range1, range2) = (range1?, range2?);
            if range1[0] == range1[1] || range2[0] == range2[1] {
                return None;
            }
            ok.then_some(PathSpec::Rectangle { p1, range1, p2, range2, base: base? })
        }
        Some("sweep") => {
            let param = p.req_str("param", errs);
            let start = p.f64_in("start", Some(0.0), (any, "finite"), errs);
            let period = p.f64_in("period", Some(TAU), (|x| x != 0.0, "non-zero"), errs);
            let base = read_base(&mut p, info, errs);
            let param = param?;
            param_in(&p, "param", &param, info, errs).then_some(())?;
            Some(PathSpec::Sweep { param, start: start?, period: period?, base: base? })
        }
        Some(other) => {
            p.err(
                errs,
                "shape",
                format!("unknown shape `{other}`; expected waypoints, circle, rectangle or sweep"),
            );
            p.used.extend(t.keys().cloned());
            None
        }
        None => {
            p.used.extend(t.keys().cloned());
            None
        }
    };
    p.finish(errs);
    spec
}

fn read_selection(r: &mut Reader<'_>, info: &FamilyInfo, errs: &mut Vec<ConfigError>) -> Option<SelectionSpec> {
    let has_indices = r.has("indices");
    let has_window = r.has("window");
    if has_indices && has_window {
        r.err(errs, "window", "give either `indices` or `window`, not both");
        r.used.insert("indices".into());
        r.used.insert("window".into());
        return None;
    }
    if has_window {
        let [min, max] = r.pair("window", errs)?;
        if min > max {
            r.err(errs, "window", format!("empty window [{min}, {max}]"));
            return None;
        }
        return Some(SelectionSpec::Window { min, max });
    }
    if !has_indices {
        r.used.insert("indices".into());
        return Some(SelectionSpec::Indices(vec![0]));
    }
    let v = r.raw("indices")?;
    let items: Option<Vec<i64>> = match v {
        Value::Array(a) => a.iter().map(|x| x.as_integer()).collect(),
        _ => None,
    };
    match items {
        Some(ix) if !ix.is_empty() && ix.iter().all(|&k| k >= 0 && (k as usize) < info.dimension) => {
            let mut ix: Vec<usize> = ix.into_iter().map(|k| k as usize).collect();
            ix.sort_unstable();
            ix.dedup();
            Some(SelectionSpec::Indices(ix))
        }
        _ => {
            r.err(
                errs,
                "indices",
                format!("expected a non-empty array of level indices below {}", info.dimension),
            );
            None
        }
    }
}

fn read_connection(r: &mut Reader<'_>, errs: &mut Vec<ConfigError>) -> Option<JobSpec> {
    let system = read_system(r, errs);
    let target = r.opt_str("target", errs).unwrap_or_else(|| "berry".into());
    let direction = r.req_str("direction", errs);
    let Some((system, info)) = system else {
        r.skip(&["points", "direction", "index", "method", "h", "gauge", "anchor", "phase_param", "phase_coefficient"]);
        return None;
    };
    let points = read_points(r, "points", &info, errs);
    let direction = direction?;
    param_in(r, "direction", &direction, &info, errs).then_some(())?;
    let target = match target.as_str() {
        "berry" => {
            let index = r.uint_in("index", Some(0), (0, info.dimension as u64 - 1), errs);
            let method = match r.opt_str("method", errs).as_deref() {
                None | Some("analytic") => Some(MethodSpec::Analytic),
                Some("finite_difference") => r
                    .f64_in("h", Some(1e-5), (|h| h > 0.0 && h <= 0.1, "in (0, 0.1]"), errs)
                    .map(|h| MethodSpec::FiniteDifference { h }),
                Some(other) => {
                    r.err(errs, "method", format!("unknown method `{other}`; expected analytic or finite_difference"));
                    None
                }
            };
            let gauge = match r.opt_str("gauge", errs).as_deref() {
                None | Some("transport") => Some(GaugeSpec::Transport),
                Some("anchored") => r
                    .uint_in("anchor", Some(0), (0, info.dimension as u64 - 1), errs)
                    .map(|c| GaugeSpec::Anchored { component: c as usize }),
                Some("phased") => {
                    let component = r.uint_in("anchor", Some(0), (0, info.dimension as u64 - 1), errs);
                    let param = r.req_str("phase_param", errs);
                    let coefficient = r.f64_in("phase_coefficient", None, (any, "finite"), errs);
                    let param = param.filter(|p| param_in(r, "phase_param", p, &info, errs));
                    Some(GaugeSpec::Phased {
                        component: component? as usize,
                        param: param?,
                        coefficient: coefficient?,
                    })
                }
                Some(other) => {
                    r.err(errs, "gauge", format!("unknown gauge `{other}`; expected transport, anchored or phased"));
                    None
                }
            };
            ConnectionTarget::Berry {
                index: index? as usize,
                gauge: gauge?,
                method: method?,
            }
        }
        "wilczek_zee" => {
            if info.id != DARK_RESTRICTED {
                r.err(
                    errs,
                    "target",
                    format!("wilczek_zee needs the closed-form dark-state section of `{DARK_RESTRICTED}`"),
                );
                return None;
            }
            ConnectionTarget::WilczekZee
        }
        other => {
            r.err(errs, "target", format!("unknown target `{other}`; expected berry or wilczek_zee"));
            return None;
        }
    };
    Some(JobSpec::Connection(ConnectionJob {
        system,
        points: points?,
        direction,
        target,
    }))
}

fn read_holonomy(r: &mut Reader<'_>, errs: &mut Vec<ConfigError>) -> Option<JobSpec> {
    let system = read_system(r, errs);
    let steps = r.uint_in("steps", Some(DEFAULT_HOLONOMY_STEPS as u64), (1, MAX_STEPS as u64), errs);
    let g = r.f64_in("g", Some(1.0), (|g| g != 0.0, "non-zero"), errs);
    let tau_deg = r.f64_in("tau_deg", Some(1e-8), (|t| t > 0.0 && t <= 1e-2, "in (0, 1e-2]"), errs);
    let sign = match r.opt_str("sign_convention", errs).as_deref() {
        None | Some("minus_i") => Some(SignConvention::MinusI),
        Some("plus_i") => Some(SignConvention::PlusI),
        Some(other) => {
            r.err(errs, "sign_convention", format!("unknown sign convention `{other}`; expected minus_i or plus_i"));
            None
        }
    };
    let method = match r.opt_str("method", errs).as_deref() {
        None | Some("transport") => Some(HolonomyMethod::Transport),
        Some("wilson") => Some(HolonomyMethod::Wilson),
        Some("both") => Some(HolonomyMethod::Both),
        Some(other) => {
            r.err(errs, "method", format!("unknown method `{other}`; expected transport, wilson or both"));
            None
        }
    };
    let target = match r.opt_str("target", errs).as_deref() {
        None => Some(None),
        Some("identity") => Some(Some(TargetGate::Identity)),
        Some("cnot") => Some(Some(TargetGate::Cnot)),
        Some("holonomic_cnot") => Some(Some(TargetGate::HolonomicCnot)),
        Some(other) => {
            r.err(errs, "target", format!("unknown target `{other}`; expected identity, cnot or holonomic_cnot"));
            None
        }
    };
    let single_valued = r.opt_str("single_valued", errs);
    let Some((system, info)) = system else {
        // these depend on the family schema
        r.skip(&["path", "indices", "window", "single_valued"]);
        return None;
    };
    let path = read_path(r, &info, errs);
    let selection = read_selection(r, &info, errs);
    let method = method?;
    if method != HolonomyMethod::Transport && info.id != DARK_RESTRICTED {
        r.err(
            errs,
            "method",
            format!("wilson loops need the closed-form dark-state section of `{DARK_RESTRICTED}`"),
        );
        return None;
    }
    if let Some(p) = &single_valued {
        param_in(r, "single_valued", p, &info, errs).then_some(())?;
    }
    if let (Some(Some(_)), Some(SelectionSpec::Indices(ix))) = (&target, &selection) {
        if ix.len() != 4 {
            r.err(errs, "target", "gate targets compare 4x4 loop unitaries; select four levels");
            return None;
        }
    }
    Some(JobSpec::Holonomy(HolonomyJob {
        system,
        path: path?,
        steps: steps? as usize,
        selection: selection?,
        method,
        sign: sign?,
        g: g?,
        tau_deg: tau_deg?,
        single_valued,
        target: target?,
    }))
}

fn read_evolve(r: &mut Reader<'_>, errs: &mut Vec<ConfigError>) -> Option<JobSpec> {
    let drive = r.opt_str("drive", errs);
    if let Some(d) = &drive {
        if d != "two_level_circle" {
            r.err(errs, "drive", format!("unknown drive `{d}`; expected two_level_circle"));
        }
    }
    let radius = r.f64_in("r", Some(1.0), (positive, "> 0"), errs);
    let omega_t = r.f64_in("omega_t", None, (positive, "> 0"), errs);
    let steps = r.uint_in("steps", Some(DEFAULT_EVOLVE_STEPS as u64), (2, MAX_STEPS as u64), errs);
    if drive.is_some_and(|d| d != "two_level_circle") {
        return None;
    }
    Some(JobSpec::Evolve(EvolveJob {
        r: radius?,
        omega_t: omega_t?,
        steps: steps? as usize,
    }))
}

fn read_anyon(r: &mut Reader<'_>, errs: &mut Vec<ConfigError>) -> Option<JobSpec> {
    let mode = r.opt_str("mode", errs).unwrap_or_else(|| "uniform".into());
    let l0 = r.f64_in("l0", Some(1.0), (positive, "> 0"), errs);
    let radius = r.f64_in("radius", None, (non_negative, ">= 0"), errs);
    match mode.as_str() {
        "uniform" => {
            let nu = r.f64_in("nu", None, (|n| n > 0.0 && n <= 1.0, "in (0, 1]"), errs);
            Some(JobSpec::Anyon(AnyonJob::Uniform {
                nu: nu?,
                radius: radius?,
                l0: l0?,
            }))
        }
        "estimated" => {
            let electrons = r.uint_in("electrons", None, (2, 200), errs);
            let m = r.uint_in("m", Some(3), (1, 15), errs);
            let samples = r.uint_in("samples", Some(100_000), (1000, MAX_STEPS as u64), errs);
            let burn_in = r.uint_in("burn_in", Some(2000), (0, MAX_STEPS as u64), errs);
            let step = r.f64_in("step", Some(1.5), (positive, "> 0"), errs);
            let bins = r.uint_in("bins", Some(80), (1, 100_000), errs);
            let batches = r.uint_in("batches", Some(50), (2, 10_000), errs);
            let r_max = r.f64_in("r_max", Some(8.0), (positive, "> 0"), errs);
            let bulk_radius = r.f64_in("bulk_radius", Some(1.0), (positive, "> 0"), errs);
            if let Some(m) = m {
                if m % 2 == 0 {
                    r.err(errs, "m", format!("{m} is even; the exponent must be odd"));
                    return None;
                }
            }
            let l0 = l0?;
            let (radius, r_max) = (radius?, r_max?);
            if radius > r_max * l0 {
                r.err(errs, "radius", format!("{radius} exceeds the density grid radius {}", r_max * l0));
                return None;
            }
            Some(JobSpec::Anyon(AnyonJob::Estimated(EstimatedAnyon {
                electrons: electrons? as usize,
                m: m? as u32,
                l0,
                samples: samples? as usize,
                burn_in: burn_in? as usize,
                step: step?,
                radius,
                r_max,
                bins: bins? as usize,
                batches: batches? as usize,
                bulk_radius: bulk_radius?,
            })))
        }
        other => {
            r.err(errs, "mode", format!("unknown mode `{other}`; expected uniform or estimated"));
            None
        }
    }
}

fn read_job(table: &Table, index: usize, errs: &mut Vec<ConfigError>) -> Option<JobConfig> {
    let mut r = Reader::new(table, format!("job[{index}]"));
    let kind = r.req_str("kind", errs);
    let name = r.opt_str("name", errs);
    let seed = r.uint_in("seed", Some(0), (0, i64::MAX as u64), errs);
    let spec = match kind.as_deref() {
        Some("connection") => read_connection(&mut r, errs),
        Some("holonomy") => read_holonomy(&mut r, errs),
        Some("evolve") => read_evolve(&mut r, errs),
        Some("anyon") => read_anyon(&mut r, errs),
        Some("gates") => r
            .f64_in("phase", Some(0.0), (any, "finite"), errs)
            .map(|phase| JobSpec::Gates(GatesJob { phase })),
        Some("landau") => {
            let area = r.f64_in("area", None, (positive, "> 0"), errs);
            let l0 = r.f64_in("l0", Some(1.0), (positive, "> 0"), errs);
            let electrons = r.f64_in("electrons", None, (positive, "> 0"), errs);
            let b = r.f64_in("b", None, (positive, "> 0"), errs);
            Some(JobSpec::Landau(LandauJob {
                area: area?,
                l0: l0?,
                electrons: electrons?,
                b: b?,
            }))
        }
        Some(other) => {
            r.err(errs, "kind", format!("unknown job kind `{other}`; expected one of {}", KINDS.join(", ")));
            r.used.extend(table.keys().cloned());
            None
        }
        None => {
            r.used.extend(table.keys().cloned());
            None
        }
    };
    r.finish(errs);
    let spec = spec?;
    let name = name.unwrap_or_else(|| format!("{}-{}", spec.kind(), index + 1));
    Some(JobConfig {
        name,
        seed: seed?,
        spec,
    })
}

/// Parse and validate a job file.
pub fn parse_config(text: &str) -> Result<Config, ConfigErrors> {
    let root: Table = toml::from_str(text).map_err(|e| {
        ConfigErrors(vec![ConfigError {
            path: "<toml>".into(),
            message: e.to_string().trim_end().to_string(),
        }])
    })?;
    let mut errs = Vec::new();
    let mut jobs = Vec::new();
    for key in root.keys().filter(|k| *k != "job") {
        errs.push(ConfigError {
            path: key.clone(),
            message: "unknown top-level key; jobs go in [[job]] tables".into(),
        });
    }
    match root.get("job") {
        None => errs.push(ConfigError {
            path: "job".into(),
            message: "no [[job]] tables".into(),
        }),
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                match item {
                    Value::Table(t) => {
                        if let Some(job) = read_job(t, i, &mut errs) {
                            jobs.push(job);
                        }
                    }
                    _ => errs.push(ConfigError {
                        path: format!("job[{i}]"),
                        message: "expected a table".into(),
                    }),
                }
            }
        }
        Some(_) => errs.push(ConfigError {
            path: "job".into(),
            message: "expected an array of tables ([[job]])".into(),
        }),
    }
    let mut seen = BTreeMap::new();
    for (i, job) in jobs.iter().enumerate() {
        if let Some(first) = seen.insert(job.name.clone(), i) {
            errs.push(ConfigError {
                path: format!("job[{i}].name"),
                message: format!("duplicate job name `{}` (also job[{first}])", job.name),
            });
        }
    }
    if errs.is_empty() {
        Ok(Config { jobs })
    } else {
        Err(ConfigErrors(errs))
    }
}

fn float(x: f64) -> Value {
    Value::Float(x)
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(float).collect())
}

fn string(s: &str) -> Value {
    Value::String(s.to_string())
}

fn int(x: u64) -> Value {
    Value::Integer(x as i64)
}

fn system_table(t: &mut Table, s: &SystemSpec) {
    t.insert("system".into(), string(&s.id));
    if !s.constants.is_empty() {
        let c: Table = s.constants.iter().map(|(k, v)| (k.clone(), float(*v))).collect();
        t.insert("constants".into(), Value::Table(c));
    }
}

fn path_table(p: &PathSpec) -> Table {
    let mut t = Table::new();
    match p {
        PathSpec::Waypoints { points, closed } => {
            t.insert("shape".into(), string("waypoints"));
            t.insert("closed".into(), Value::Boolean(*closed));
            t.insert("points".into(), Value::Array(points.iter().map(|q| floats(q)).collect()));
        }
        PathSpec::Circle { p1, p2, center, radius, base } => {
            t.insert("shape".into(), string("circle"));
            t.insert("p1".into(), string(p1));
            t.insert("p2".into(), string(p2));
            t.insert("center".into(), floats(center));
            t.insert("radius".into(), float(*radius));
            t.insert("base".into(), floats(base));
        }
        PathSpec::Rectangle { p1, range1, p2, range2, base } => {
            t.insert("shape".into(), string("rectangle"));
            t.insert("p1".into(), string(p1));
            t.insert("range1".into(), floats(range1));
            t.insert("p2".into(), string(p2));
            t.insert("range2".into(), floats(range2));
            t.insert("base".into(), floats(base));
        }
        PathSpec::Sweep { param, start, period, base } => {
            t.insert("shape".into(), string("sweep"));
            t.insert("param".into(), string(param));
            t.insert("start".into(), float(*start));
            t.insert("period".into(), float(*period));
            t.insert("base".into(), floats(base));
        }
    }
    t
}

/// Job as a TOML table with every default written out.
pub fn job_table(job: &JobConfig) -> Table {
    let mut t = Table::new();
    t.insert("name".into(), string(&job.name));
    t.insert("kind".into(), string(job.spec.kind()));
    t.insert("seed".into(), int(job.seed));
    match &job.spec {
        JobSpec::Connection(c) => {
            system_table(&mut t, &c.system);
            t.insert("direction".into(), string(&c.direction));
            t.insert("points".into(), Value::Array(c.points.iter().map(|q| floats(q)).collect()));
            match &c.target {
                ConnectionTarget::WilczekZee => {
                    t.insert("target".into(), string("wilczek_zee"));
                }
                ConnectionTarget::Berry { index, gauge, method } => {
                    t.insert("target".into(), string("berry"));
                    t.insert("index".into(), int(*index as u64));
                    match method {
                        MethodSpec::Analytic => {
                            t.insert("method".into(), string("analytic"));
                        }
                        MethodSpec::FiniteDifference { h } => {
                            t.insert("method".into(), string("finite_difference"));
                            t.insert("h".into(), float(*h));
                        }
                    }
                    match gauge {
                        GaugeSpec::Transport => {
                            t.insert("gauge".into(), string("transport"));
                        }
                        GaugeSpec::Anchored { component } => {
                            t.insert("gauge".into(), string("anchored"));
                            t.insert("anchor".into(), int(*component as u64));
                        }
                        GaugeSpec::Phased { component, param, coefficient } => {
                            t.insert("gauge".into(), string("phased"));
                            t.insert("anchor".into(), int(*component as u64));
                            t.insert("phase_param".into(), string(param));
                            t.insert("phase_coefficient".into(), float(*coefficient));
                        }
                    }
                }
            }
        }
        JobSpec::Holonomy(h) => {
            system_table(&mut t, &h.system);
            t.insert("steps".into(), int(h.steps as u64));
            t.insert("g".into(), float(h.g));
            t.insert("tau_deg".into(), float(h.tau_deg));
            let sign = match h.sign {
                SignConvention::MinusI => "minus_i",
                SignConvention::PlusI => "plus_i",
            };
            t.insert("sign_convention".into(), string(sign));
            let method = match h.method {
                HolonomyMethod::Transport => "transport",
                HolonomyMethod::Wilson => "wilson",
                HolonomyMethod::Both => "both",
            };
            t.insert("method".into(), string(method));
            match &h.selection {
                SelectionSpec::Indices(ix) => {
                    t.insert("indices".into(), Value::Array(ix.iter().map(|&k| int(k as u64)).collect()));
                }
                SelectionSpec::Window { min, max } => {
                    t.insert("window".into(), floats(&[*min, *max]));
                }
            }
            if let Some(p) = &h.single_valued {
                t.insert("single_valued".into(), string(p));
            }
            if let Some(target) = h.target {
                let name = match target {
                    TargetGate::Identity => "identity",
                    TargetGate::Cnot => "cnot",
                    TargetGate::HolonomicCnot => "holonomic_cnot",
                };
                t.insert("target".into(), string(name));
            }
            t.insert("path".into(), Value::Table(path_table(&h.path)));
        }
        JobSpec::Evolve(e) => {
            t.insert("drive".into(), string("two_level_circle"));
            t.insert("r".into(), float(e.r));
            t.insert("omega_t".into(), float(e.omega_t));
            t.insert("steps".into(), int(e.steps as u64));
        }
        JobSpec::Anyon(AnyonJob::Uniform { nu, radius, l0 }) => {
            t.insert("mode".into(), string("uniform"));
            t.insert("nu".into(), float(*nu));
            t.insert("radius".into(), float(*radius));
            t.insert("l0".into(), float(*l0));
        }
        JobSpec::Anyon(AnyonJob::Estimated(a)) => {
            t.insert("mode".into(), string("estimated"));
            t.insert("electrons".into(), int(a.electrons as u64));
            t.insert("m".into(), int(a.m as u64));
            t.insert("l0".into(), float(a.l0));
            t.insert("samples".into(), int(a.samples as u64));
            t.insert("burn_in".into(), int(a.burn_in as u64));
            t.insert("step".into(), float(a.step));
            t.insert("radius".into(), float(a.radius));
            t.insert("r_max".into(), float(a.r_max));
            t.insert("bins".into(), int(a.bins as u64));
            t.insert("batches".into(), int(a.batches as u64));
            t.insert("bulk_radius".into(), float(a.bulk_radius));
        }
        JobSpec::Gates(g) => {
            t.insert("phase".into(), float(g.phase));
        }
        JobSpec::Landau(l) => {
            t.insert("area".into(), float(l.area));
            t.insert("l0".into(), float(l.l0));
            t.insert("electrons".into(), float(l.electrons));
            t.insert("b".into(), float(l.b));
        }
    }
    t
}

/// Write `config` back out as a job file.
pub fn emit_config(config: &Config) -> String {
    let jobs = config.jobs.iter().map(|j| Value::Table(job_table(j))).collect();
    let mut root = Table::new();
    root.insert("job".into(), Value::Array(jobs));
    toml::to_string(&root).expect("tables of plain values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[[job]]
kind = "holonomy"
system = "two_level"
[job.path]
shape = "sweep"
param = "phi"
base = [1.0, 0.0]
"#;

    #[test]
    fn minimal_job_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        let JobSpec::Holonomy(h) = &c.jobs[0].spec else {
            panic!("wrong kind")
        };
        assert_eq!(c.jobs[0].name, "holonomy-1");
        assert_eq!(c.jobs[0].seed, 0);
        assert_eq!(h.steps, DEFAULT_HOLONOMY_STEPS);
        assert_eq!(h.selection, SelectionSpec::Indices(vec![0]));
        assert_eq!(h.sign, SignConvention::MinusI);
        assert_eq!(h.tau_deg, 1e-8);
        assert_eq!(
            h.path,
            PathSpec::Sweep {
                param: "phi".into(),
                start: 0.0,
                period: TAU,
                base: vec![1.0, 0.0]
            }
        );
    }

    #[test]
    fn open_loop_names_the_waypoint() {
        let text = r#"
[[job]]
kind = "holonomy"
system = "two_level"
[job.path]
shape = "waypoints"
closed = true
points = [[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]
"#;
        let errs = parse_config(text).unwrap_err().0;
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].path, "job[0].path.points[2]");
        assert!(errs[0].message.contains("waypoint 2"), "{}", errs[0].message);
    }

    #[test]
    fn unknown_family_lists_registered() {
        let text = MINIMAL.replace("two_level", "three_level");
        let errs = parse_config(&text).unwrap_err().0;
        assert_eq!(errs[0].path, "job[0].system");
        for id in ["two_level", "dark_5p1_restricted", "dark_5p1_full"] {
            assert!(errs[0].message.contains(id));
        }
    }

    #[test]
    fn all_errors_reported() {
        let text = r#"
[[job]]
kind = "holonomy"
system = "two_level"
steps = 0
tau_deg = 5.0
colour = "red"
[job.path]
shape = "circle"
p1 = "r"
p2 = "psi"
center = [0.0]
radius = -1.0

[[job]]
kind = "teleport"

[[job]]
kind = "anyon"
mode = "estimated"
electrons = 6
m = 4
radius = 3.0
"#;
        let errs = parse_config(text).unwrap_err().0;
        let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
        for p in [
            "job[0].steps",
            "job[0].tau_deg",
            "job[0].colour",
            "job[0].path.p2",
            "job[0].path.center",
            "job[0].path.radius",
            "job[1].kind",
            "job[2].m",
        ] {
            assert!(paths.contains(&p), "missing {p} in {paths:?}");
        }
    }

    #[test]
    fn syntax_error_has_location() {
        let errs = parse_config("[[job]\nkind = ").unwrap_err().0;
        assert_eq!(errs[0].path, "<toml>");
        assert!(errs[0].message.contains("line"), "{}", errs[0].message);
    }

    #[test]
    fn wilson_needs_dark_section() {
        let text = MINIMAL.replace("system = \"two_level\"", "system = \"two_level\"\nmethod = \"both\"");
        let errs = parse_config(&text).unwrap_err().0;
        assert_eq!(errs[0].path, "job[0].method");
    }
}
