//! Commands behind the `opdisk` binary: instance I/O, reports, and the
//! seeded verification suites.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use opdisk_core::bundle::{verify_coro, verify_el_teo};
use opdisk_core::cross_ratio::{cr, cr0, cross_ratio_set, endo_norm, geodesic_tuple};
use opdisk_core::disk::{
    dist, geodesic, limit_points, mobius, translate_to_origin, DiskPoint,
};
use opdisk_core::error::Error;
use opdisk_core::line::{lift, project, q_projection, Line, QProjection};
use opdisk_core::matrix::{op_norm, ComplexMatrix, Tolerances};
use opdisk_core::pair::{
    borel_element, borel_factor, g_z, theta_unitary_residual, BlockMatrix, BorelParams,
};
use opdisk_core::sample::{self, rng_for};
use opdisk_core::trace::{verify_commutative, verify_tracial, BlockAlgebra, BlockElement};

/// Exit-code classes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("suite {suite} failed at instance {index}: {detail}")]
    SuiteFailure {
        suite: String,
        index: u64,
        detail: String,
        max_residual: f64,
        eps_check: f64,
        report: Box<Report>,
        instance: Box<Value>,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Core(_) => 2,
            CliError::SuiteFailure { .. } => 3,
            CliError::Internal(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub dim: usize,
    pub seed: u64,
    pub samples: usize,
    pub eps_rank: f64,
    pub eps_check: f64,
    pub norm_cap: f64,
    pub allow_nonunique: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tol = Tolerances::default();
        RunConfig {
            dim: 2,
            seed: 0,
            samples: 100,
            eps_rank: tol.eps_rank,
            eps_check: tol.eps_check,
            norm_cap: 0.9,
            allow_nonunique: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<Tolerances> {
        if !(1..=64).contains(&self.dim) {
            return Err(CliError::Validation(format!("dim must be in 1..=64, got {}", self.dim)));
        }
        if !(self.norm_cap > 0.0 && self.norm_cap < 1.0) {
            return Err(CliError::Validation(format!(
                "norm cap must lie in (0, 1), got {}",
                self.norm_cap
            )));
        }
        if self.samples == 0 {
            return Err(CliError::Validation("samples must be positive".into()));
        }
        Ok(Tolerances::new(self.eps_rank, self.eps_check)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub inputs: Value,
    pub outputs: Value,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub elapsed_ms: f64,
}

impl Report {
    fn new(command: &str, inputs: Value, outputs: Value, residuals: Vec<f64>, start: Instant) -> Self {
        Report {
            command: command.into(),
            theorem: None,
            n: None,
            samples: None,
            inputs,
            outputs,
            max_residual: residuals.iter().copied().fold(0.0, f64::max),
            residuals,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    }

    /// `key,value` rows for scalar outputs, then one row per residual.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let _ = writeln!(out, "command,{}", self.command);
        if let Value::Object(map) = &self.outputs {
            for (k, v) in map {
                if k != "max_residual" && (v.is_number() || v.is_boolean() || v.is_string()) {
                    let _ = writeln!(out, "{k},{}", v.to_string().trim_matches('"'));
                }
            }
        }
        for (i, r) in self.residuals.iter().enumerate() {
            let _ = writeln!(out, "residual_{i},{}", Value::from(*r));
        }
        let _ = writeln!(out, "max_residual,{}", Value::from(self.max_residual));
        out
    }
}

pub fn parse_matrix(text: &str) -> CliResult<ComplexMatrix> {
    serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid matrix JSON: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn cmd_distance(z1: &DiskPoint, z2: &DiskPoint, tol: &Tolerances) -> CliResult<Report> {
    let start = Instant::now();
    let d = dist(z1, z2, tol)?;
    let w = translate_to_origin(z1, z2, tol)?;
    let symmetry = (d - dist(z2, z1, tol)?).abs();
    Ok(Report::new(
        "distance",
        json!({ "z1": z1, "z2": z2 }),
        json!({ "distance": d, "w": w }),
        vec![symmetry],
        start,
    ))
}

fn csv_header(n: usize) -> String {
    let mut h = String::from("t");
    for part in ["re", "im"] {
        for i in 0..n {
            for j in 0..n {
                let _ = write!(h, ",{part}_{i}{j}");
            }
        }
    }
    h
}

fn csv_row(label: &str, m: &ComplexMatrix) -> String {
    let (re, im) = m.to_parts();
    let mut row = label.to_string();
    for part in [re, im] {
        for v in part.iter().flatten() {
            let _ = write!(row, ",{v}");
        }
    }
    row
}

/// `steps` samples of the geodesic over `[t_min, t_max]`, framed by the
/// boundary limits at `t = −inf` and `t = +inf`.
pub fn cmd_geodesic(
    z0: &DiskPoint,
    z1: &DiskPoint,
    t_min: f64,
    t_max: f64,
    steps: usize,
    tol: &Tolerances,
) -> CliResult<String> {
    if steps < 2 {
        return Err(CliError::Validation("steps must be at least 2".into()));
    }
    if !(t_min.is_finite() && t_max.is_finite() && t_min <= t_max) {
        return Err(CliError::Validation("need finite t_min ≤ t_max".into()));
    }
    let (minus, plus) = limit_points(z0, z1, tol)?;
    let geo = geodesic(z0, z1, tol)?;
    let mut out = csv_header(z0.n());
    out.push('\n');
    out.push_str(&csv_row("-inf", minus.matrix()));
    out.push('\n');
    for k in 0..steps {
        let t = t_min + (t_max - t_min) * k as f64 / (steps - 1) as f64;
        out.push_str(&csv_row(&t.to_string(), &geo.sample(t)?));
        out.push('\n');
    }
    out.push_str(&csv_row("+inf", plus.matrix()));
    out.push('\n');
    Ok(out)
}

pub fn cmd_crossratio(z0: &DiskPoint, z1: &DiskPoint, tol: &Tolerances) -> CliResult<Report> {
    let start = Instant::now();
    let e = cr(z0, z1, tol)?;
    let norm = endo_norm(&e);
    let d = dist(z0, z1, tol)?;
    Ok(Report::new(
        "crossratio",
        json!({ "z0": z0, "z1": z1 }),
        json!({ "cross_ratio": e, "endo_norm": norm, "distance": d }),
        vec![(norm.ln() - 2.0 * d).abs()],
        start,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ElTeo,
    ElCoro,
    Invariance,
    Fibration,
    Commutative,
    Tracial,
    CrossratioSet,
    Borel,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::ElTeo,
        Suite::ElCoro,
        Suite::Invariance,
        Suite::Fibration,
        Suite::Commutative,
        Suite::Tracial,
        Suite::CrossratioSet,
        Suite::Borel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ElTeo => "el_teo",
            Suite::ElCoro => "el_coro",
            Suite::Invariance => "invariance",
            Suite::Fibration => "fibration",
            Suite::Commutative => "commutative",
            Suite::Tracial => "tracial",
            Suite::CrossratioSet => "crossratio_set",
            Suite::Borel => "borel",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Serialize, Deserialize)]
struct PointData {
    z: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct PairData {
    z0: ComplexMatrix,
    z1: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct InvarianceData {
    g: BlockMatrix,
    z1: ComplexMatrix,
    z2: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct FibrationData {
    z: ComplexMatrix,
    g: BlockMatrix,
}

#[derive(Serialize, Deserialize)]
struct TracialData {
    z0: BlockElement,
    z1: BlockElement,
}

#[derive(Serialize, Deserialize)]
struct BorelData {
    g: ComplexMatrix,
    x: ComplexMatrix,
    z: ComplexMatrix,
}

/// A reproducible suite instance; fed back through `verify --replay`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub suite: String,
    pub seed: u64,
    pub index: u64,
    pub dim: usize,
    pub eps_rank: f64,
    pub eps_check: f64,
    pub allow_nonunique: bool,
    pub data: Value,
}

/// Blocks of size two, plus a trailing `1×1` block for odd `n`.
fn tracial_blocks(n: usize) -> Vec<usize> {
    let mut b = vec![2; n / 2];
    if n % 2 == 1 {
        b.push(1);
    }
    b
}

fn generate(suite: Suite, cfg: &RunConfig, index: u64, tol: &Tolerances) -> CliResult<Value> {
    let rng = &mut rng_for(cfg.seed, index);
    let (n, cap) = (cfg.dim, cfg.norm_cap);
    let point = |rng: &mut _| sample::disk_point(rng, n, cap, tol).map(DiskPoint::into_matrix);
    let data = match suite {
        Suite::ElTeo => to_value(&PointData { z: point(rng)? })?,
        Suite::ElCoro => to_value(&PairData {
            z0: point(rng)?,
            z1: point(rng)?,
        })?,
        Suite::Invariance => to_value(&InvarianceData {
            g: sample::theta_unitary(rng, n, tol)?,
            z1: point(rng)?,
            z2: point(rng)?,
        })?,
        Suite::Fibration => to_value(&FibrationData {
            z: point(rng)?,
            g: sample::theta_unitary(rng, n, tol)?,
        })?,
        Suite::Commutative => to_value(&PairData {
            z0: sample::diagonal_disk_point(rng, n, cap, tol)?.into_matrix(),
            z1: sample::diagonal_disk_point(rng, n, cap, tol)?.into_matrix(),
        })?,
        Suite::Tracial => {
            let alg = BlockAlgebra::new(tracial_blocks(n))?;
            let elem = |rng: &mut _| -> CliResult<BlockElement> {
                Ok(BlockElement {
                    blocks: alg.block_dims().to_vec(),
                    data: sample::block_disk_point(rng, &alg, cap, tol)?.into_matrix(),
                })
            };
            to_value(&TracialData {
                z0: elem(rng)?,
                z1: elem(rng)?,
            })?
        }
        Suite::CrossratioSet => to_value(&PointData {
            z: sample::invertible_disk_point(rng, n, 0.05 * cap, cap, tol)?.into_matrix(),
        })?,
        Suite::Borel => {
            let p = sample::borel_params(rng, n, tol)?;
            to_value(&BorelData {
                g: p.g,
                x: p.x,
                z: point(rng)?,
            })?
        }
    };
    Ok(data)
}

fn parse<T: for<'de> Deserialize<'de>>(data: &Value) -> CliResult<T> {
    T::deserialize(data).map_err(|e| CliError::Validation(format!("invalid instance data: {e}")))
}

fn disk(m: ComplexMatrix, tol: &Tolerances) -> CliResult<DiskPoint> {
    Ok(DiskPoint::new(m, tol)?)
}

fn diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    op_norm(&(a - b))
}

/// Residual of one instance.
pub fn evaluate(suite: Suite, data: &Value, tol: &Tolerances, allow_nonunique: bool) -> CliResult<f64> {
    let r = match suite {
        Suite::ElTeo => {
            let d: PointData = parse(data)?;
            verify_el_teo(&disk(d.z, tol)?, tol)?
        }
        Suite::ElCoro => {
            let d: PairData = parse(data)?;
            verify_coro(&disk(d.z0, tol)?, &disk(d.z1, tol)?, tol)?
        }
        Suite::Invariance => {
            let d: InvarianceData = parse(data)?;
            let (z1, z2) = (disk(d.z1, tol)?, disk(d.z2, tol)?);
            let before = dist(&z1, &z2, tol)?;
            let after = dist(&mobius(&d.g, &z1, tol)?, &mobius(&d.g, &z2, tol)?, tol)?;
            (before - after).abs()
        }
        Suite::Fibration => {
            let d: FibrationData = parse(data)?;
            let z = disk(d.z, tol)?;
            let x = lift(&z, tol)?;
            let section = diff(project(x.vector(), tol)?.matrix(), z.matrix());
            let line = Line::from_generator(&d.g.apply(x.vector()), tol)?;
            let equivariance = diff(line.point(tol)?.matrix(), mobius(&d.g, &z, tol)?.matrix());
            let q = QProjection::residuals(&q_projection(&Line::from_kpoint(x), tol)?.p);
            let positivity = if q.rho_reflection_min_eig > 0.0 { 0.0 } else { 1.0 };
            section
                .max(equivariance)
                .max(q.idempotency)
                .max(q.theta_selfadjoint)
                .max(positivity)
        }
        Suite::Commutative => {
            let d: PairData = parse(data)?;
            verify_commutative(&disk(d.z0, tol)?, &disk(d.z1, tol)?, tol)?
        }
        Suite::Tracial => {
            let d: TracialData = parse(data)?;
            let (alg, z0) = d.z0.into_parts(tol)?;
            let (alg1, z1) = d.z1.into_parts(tol)?;
            if alg != alg1 {
                return Err(CliError::Validation("instance points use different block patterns".into()));
            }
            verify_tracial(&alg, &disk(z0, tol)?, &disk(z1, tol)?, tol)?
        }
        Suite::CrossratioSet => {
            let d: PointData = parse(data)?;
            let z = disk(d.z, tol)?;
            let e = cross_ratio_set(&geodesic_tuple(&z, tol)?, tol, allow_nonunique)?;
            let c = cr0(&z, tol)?;
            diff(&e.coefficient_in(c.line.generator(), tol)?, &c.coefficient)
        }
        Suite::Borel => {
            let d: BorelData = parse(data)?;
            let p = BorelParams::new(d.g, d.x, tol)?;
            let back = borel_factor(&borel_element(&p, tol)?, tol)?;
            let round_trip = diff(&back.g, &p.g).max(diff(&back.x, &p.x));
            let z = disk(d.z, tol)?;
            let g = g_z(&z, tol)?;
            let origin = diff(mobius(&g, &DiskPoint::origin(z.n()), tol)?.matrix(), z.matrix());
            round_trip.max(theta_unitary_residual(&g)).max(origin)
        }
    };
    Ok(r)
}

fn instance(suite: Suite, cfg: &RunConfig, index: u64, data: Value) -> Instance {
    Instance {
        suite: suite.name().into(),
        seed: cfg.seed,
        index,
        dim: cfg.dim,
        eps_rank: cfg.eps_rank,
        eps_check: cfg.eps_check,
        allow_nonunique: cfg.allow_nonunique,
        data,
    }
}

struct Outcome {
    index: u64,
    residual: Option<f64>,
    error: Option<String>,
    data: Value,
}

/// Runs `samples` instances (or the single `only` index), in parallel and
/// merged by index.
pub fn cmd_verify(suite: Suite, cfg: &RunConfig, only: Option<u64>) -> CliResult<Report> {
    let start = Instant::now();
    let tol = cfg.validate()?;
    let indices: Vec<u64> = match only {
        Some(i) => vec![i],
        None => (0..cfg.samples as u64).collect(),
    };
    let outcomes: Vec<Outcome> = indices
        .par_iter()
        .map(|&index| -> CliResult<Outcome> {
            let data = generate(suite, cfg, index, &tol)?;
            let (residual, error) = match evaluate(suite, &data, &tol, cfg.allow_nonunique) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok(Outcome {
                index,
                residual,
                error,
                data,
            })
        })
        .collect::<CliResult<_>>()?;
    finish(suite, cfg, &tol, outcomes, start)
}

/// Reruns a single serialized instance.
pub fn cmd_replay(inst: &Instance) -> CliResult<Report> {
    let start = Instant::now();
    let suite = Suite::from_name(&inst.suite)
        .ok_or_else(|| CliError::Validation(format!("unknown suite {:?}", inst.suite)))?;
    let cfg = RunConfig {
        dim: inst.dim,
        seed: inst.seed,
        samples: 1,
        eps_rank: inst.eps_rank,
        eps_check: inst.eps_check,
        allow_nonunique: inst.allow_nonunique,
        ..RunConfig::default()
    };
    let tol = Tolerances::new(cfg.eps_rank, cfg.eps_check)?;
    let (residual, error) = match evaluate(suite, &inst.data, &tol, cfg.allow_nonunique) {
        Ok(r) => (Some(r), None),
        Err(CliError::Validation(m)) => return Err(CliError::Validation(m)),
        Err(e) => (None, Some(e.to_string())),
    };
    let outcome = Outcome {
        index: inst.index,
        residual,
        error,
        data: inst.data.clone(),
    };
    finish(suite, &cfg, &tol, vec![outcome], start)
}

fn finish(
    suite: Suite,
    cfg: &RunConfig,
    tol: &Tolerances,
    outcomes: Vec<Outcome>,
    start: Instant,
) -> CliResult<Report> {
    let residuals: Vec<f64> = outcomes.iter().filter_map(|o| o.residual).collect();
    let errors: Vec<Value> = outcomes
        .iter()
        .filter_map(|o| o.error.as_ref().map(|e| json!({ "index": o.index, "error": e })))
        .collect();
    // worst instance: any error first, then the largest residual
    let worst = outcomes
        .iter()
        .filter(|o| o.error.is_some())
        .chain(outcomes.iter().filter(|o| o.residual.is_some_and(|r| r > tol.eps_check)))
        .max_by(|a, b| {
            let key = |o: &Outcome| o.residual.unwrap_or(f64::INFINITY);
            key(a).total_cmp(&key(b)).then(b.index.cmp(&a.index))
        });
    let mut report = Report::new(
        "verify",
        to_value(cfg)?,
        json!({
            "theorem": suite.name(),
            "n": cfg.dim,
            "samples": outcomes.len(),
            "max_residual": residuals.iter().copied().fold(0.0, f64::max),
            "errors": errors,
            "passed": worst.is_none(),
        }),
        residuals,
        start,
    );
    report.theorem = Some(suite.name().into());
    report.n = Some(cfg.dim);
    report.samples = Some(outcomes.len());
    match worst {
        None => Ok(report),
        Some(o) => Err(CliError::SuiteFailure {
            suite: suite.name().into(),
            index: o.index,
            detail: match (&o.error, o.residual) {
                (Some(e), _) => e.clone(),
                (None, r) => format!("residual {:e} exceeds {:e}", r.unwrap_or(f64::NAN), tol.eps_check),
            },
            max_residual: report.max_residual,
            eps_check: tol.eps_check,
            instance: Box::new(to_value(&instance(suite, cfg, o.index, o.data.clone()))?),
            report: Box::new(report),
        }),
    }
}
