use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::format::{sha256_hex, to_json, DomainDoc, FieldDoc};
use crate::approximate::{
    build_k, pl_snap, ApproxError, ApproximantG, BudgetLedger, PartitionOfUnity, SnapOptions,
};
use crate::domain::{BoxRegion, DomainE, FieldSpec, GridFace, LipschitzBound, LipschitzMethod};
use crate::simplicial::{Point, Vector};
use crate::triangulate::{
    base_triangulation, build_cover, classify_simplices, repair_bad_simplices,
    ClassifiedTriangulation, Cover, Label, TriangulateError, DEFAULT_MAX_SIMPLICES,
};
use crate::verify::{
    boundary_samples, brute_force_avoidance_check, e_grid_samples, e_random_samples,
    oracle_sup_error, oracle_zero_scan, partition_sum_check, q_samples, stage_rng, Extremum,
    IndependentEvaluator, OracleCheck, OracleReport,
};
use crate::zerofree::{
    assemble_zero_free, choose_avoidance_constant, eval_final, AvoidanceOptions, ZeroFreeError,
    ZeroFreeMap,
};

pub const RESULT_FORMAT: &str = "zerofree-result/1";

/// Smallest number of triangulation cells per domain cell.
pub const MIN_SUBDIVISIONS: i64 = 5;

const VERIFY_RANDOM: usize = 10_000;
const VERIFY_BOUNDARY: usize = 2_000;
const VERIFY_Q: usize = 1_000;
const AVOIDANCE_RESOLUTION: u32 = 16;
const SNAP_RANDOM: usize = 10;

// Generator streams derived from the run seed.
const STREAM_PRECONDITION: u64 = 1;
const STREAM_SNAP: u64 = 2;
const STREAM_AVOIDANCE: u64 = 3;
const STREAM_VERIFY: u64 = 4;
const STREAM_BOUNDARY: u64 = 5;
const STREAM_Q: u64 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Parse,
    Precondition,
    Lipschitz,
    CellSize,
    Triangulate,
    Cover,
    Classify,
    Repair,
    BuildK,
    Snap,
    Avoidance,
    Assemble,
    Verify,
    Emit,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Precondition => "precondition",
            Stage::Lipschitz => "lipschitz",
            Stage::CellSize => "cell-size",
            Stage::Triangulate => "triangulate",
            Stage::Cover => "cover",
            Stage::Classify => "classify",
            Stage::Repair => "repair",
            Stage::BuildK => "build-k",
            Stage::Snap => "snap",
            Stage::Avoidance => "avoidance",
            Stage::Assemble => "assemble",
            Stage::Verify => "verify",
            Stage::Emit => "emit",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureClass {
    /// f vanishes in the interior of E.
    Precondition,
    ResourceCap,
    Input,
    Certificate,
}

impl FailureClass {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureClass::Precondition => 2,
            FailureClass::ResourceCap => 3,
            FailureClass::Input => 4,
            FailureClass::Certificate => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub class: FailureClass,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, class: FailureClass, message: impl Into<String>) -> Self {
        Self {
            stage,
            class,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

fn from_triangulate(stage: Stage, e: TriangulateError) -> PipelineError {
    let class = match e {
        TriangulateError::ResourceCap { .. } => FailureClass::ResourceCap,
        _ => FailureClass::Certificate,
    };
    PipelineError::new(stage, class, e.to_string())
}

fn from_approx(stage: Stage, e: ApproxError) -> PipelineError {
    let class = match e {
        ApproxError::SnapCap { .. } | ApproxError::SubdivisionCap { .. } => {
            FailureClass::ResourceCap
        }
        ApproxError::Eval(_) => FailureClass::Input,
        _ => FailureClass::Certificate,
    };
    PipelineError::new(stage, class, e.to_string())
}

fn from_zero_free(stage: Stage, e: ZeroFreeError) -> PipelineError {
    match e {
        ZeroFreeError::KeepRegionNotZeroFree { .. } => {
            PipelineError::new(stage, FailureClass::Precondition, e.to_string())
        }
        ZeroFreeError::Approx(a) => from_approx(stage, a),
        _ => PipelineError::new(stage, FailureClass::Certificate, e.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub epsilon: f64,
    /// Requested triangulation cell size; refined if too coarse for ε.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_size: Option<f64>,
    pub levels_cap: u32,
    pub seed: u64,
    /// Verification grid spacing is the domain spacing divided by this.
    pub verify_resolution: u32,
    /// Cap on top simplices of the base triangulation and of K̂.
    pub max_simplices: u64,
}

impl RunConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            cell_size: None,
            levels_cap: 3,
            seed: 0,
            verify_resolution: 4,
            max_simplices: DEFAULT_MAX_SIMPLICES as u64,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::new(Stage::Parse, FailureClass::Input, m));
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be a positive finite number");
        }
        if let Some(s) = self.cell_size {
            if !(s.is_finite() && s > 0.0) {
                return bad("cell size must be a positive finite number");
            }
        }
        if self.verify_resolution == 0 {
            return bad("verify resolution must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputEcho {
    pub domain: DomainDoc,
    pub field: FieldDoc,
    pub domain_sha256: String,
    pub field_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub run: RunConfig,
    /// Triangulation cells per domain cell along each axis.
    pub subdivisions: i64,
    pub cell_size: f64,
    /// Edgewise subdivision levels of K̂ over K.
    pub levels: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangulationStats {
    pub top_simplices: usize,
    pub keep_before_repair: usize,
    pub keep: usize,
    pub discard: usize,
    pub perturbations: usize,
    pub halvings: usize,
    pub cover_members: usize,
    pub cover_radius: f64,
}

/// K̂ in flat arrays: vertex coordinates, then vertex ids of the n-simplices
/// (A, from Keep simplices) and of the lower maximal (n-1)-simplices (B,
/// from Discard facets).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub n: usize,
    pub vertices: Vec<f64>,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
}

impl ComplexDoc {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len() / self.n.max(1)
    }

    pub fn a_count(&self) -> usize {
        self.a.len() / (self.n + 1)
    }

    pub fn b_count(&self) -> usize {
        self.b.len() / self.n.max(1)
    }

    pub fn vertex(&self, v: u32) -> Point {
        let i = v as usize * self.n;
        Point::new(&self.vertices[i..i + self.n]).expect("dimension checked on load")
    }

    /// Vertex ids of maximal simplex `i` in certificate order (A then B).
    pub fn maximal(&self, i: usize) -> &[u32] {
        let a = self.a_count();
        if i < a {
            &self.a[i * (self.n + 1)..(i + 1) * (self.n + 1)]
        } else {
            let j = i - a;
            &self.b[j * self.n..(j + 1) * self.n]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificates {
    /// Minimum of |ĝ| over the A simplices; absent when A is empty.
    pub m_a: Option<f64>,
    pub mu: f64,
    pub threshold: f64,
    /// Certified min |ĥ| per maximal simplex, A then B.
    pub margins: Vec<f64>,
    pub avoidance_radius: f64,
    pub avoidance_draws: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub format: String,
    pub input: InputEcho,
    pub config: ConfigEcho,
    pub lipschitz: LipschitzBound,
    pub triangulation: TriangulationStats,
    pub complex: ComplexDoc,
    /// ĝ at the vertices of K̂, before adding c.
    pub g_values: Vec<f64>,
    pub c: Vec<f64>,
    pub certificates: Certificates,
    pub ledger: BudgetLedger,
    /// Witness points of the Discard simplices of the base triangulation.
    pub witnesses: Vec<f64>,
    pub oracle: OracleReport,
}

impl ResultDocument {
    pub fn epsilon(&self) -> f64 {
        self.config.run.epsilon
    }

    pub fn succeeded(&self) -> bool {
        self.certificates.mu > 0.0
            && self.oracle.sup_error.value < self.epsilon()
            && self.oracle.all_passed()
    }

    pub fn exit_code(&self) -> i32 {
        if self.succeeded() {
            0
        } else {
            FailureClass::Certificate.exit_code()
        }
    }
}

pub struct RunOutcome {
    pub document: ResultDocument,
    pub timings: Vec<(Stage, Duration)>,
}

struct Clock {
    last: Instant,
    timings: Vec<(Stage, Duration)>,
}

impl Clock {
    fn new() -> Self {
        Self {
            last: Instant::now(),
            timings: Vec::new(),
        }
    }

    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        self.timings.push((stage, now - self.last));
        self.last = now;
    }
}

fn derived_seed(seed: u64, stream: u64) -> u64 {
    stage_rng(seed, stream).random()
}

/// Parsed and cross-checked inputs.
pub struct Inputs {
    pub domain: DomainE,
    pub field: FieldSpec,
}

pub fn load_inputs(domain_doc: &DomainDoc, field_doc: &FieldDoc) -> Result<Inputs, PipelineError> {
    let input = |m: String| PipelineError::new(Stage::Parse, FailureClass::Input, m);
    let domain = domain_doc
        .to_domain()
        .map_err(|e| input(format!("domain: {e}")))?;
    let field = field_doc
        .to_field()
        .map_err(|e| input(format!("field: {e}")))?;
    if field.n() != domain.n() {
        return Err(input(format!(
            "field has {} components but the domain has dimension {}",
            field.n(),
            domain.n()
        )));
    }
    if domain.cells().is_empty() && domain.lower_faces().is_empty() {
        return Err(input("domain is empty".into()));
    }
    Ok(Inputs { domain, field })
}

/// Minimum of |f| over E° samples (grid at the verification resolution plus
/// seeded random points) and the scale-aware rejection threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteriorScan {
    pub min: Extremum,
    pub threshold: f64,
    pub samples: usize,
}

pub fn interior_zero_scan(
    inputs: &Inputs,
    cfg: &RunConfig,
) -> Result<Option<InteriorScan>, PipelineError> {
    let d = &inputs.domain;
    if !d.has_interior() {
        return Ok(None);
    }
    let mut rng = stage_rng(cfg.seed, STREAM_PRECONDITION);
    let mut samples: Vec<Point> = e_grid_samples(d, cfg.verify_resolution);
    samples.extend(e_random_samples(d, &mut rng, VERIFY_RANDOM));
    samples.retain(|p| d.point_in_interior(p));
    let mut scale = 0.0f64;
    for p in &samples {
        let v = inputs.field.eval(p).map_err(|e| {
            PipelineError::new(
                Stage::Precondition,
                FailureClass::Input,
                format!("field at {p:?}: {e}"),
            )
        })?;
        scale = scale.max(v.norm());
    }
    let min = oracle_zero_scan(|p| inputs.field.eval(p).ok(), &samples);
    let scan = InteriorScan {
        min,
        threshold: 1e-12 * (1.0 + scale),
        samples: samples.len(),
    };
    if min.value <= scan.threshold {
        let at = min
            .at
            .map_or_else(String::new, |p| format!(" at {:?}", p.coords()));
        return Err(PipelineError::new(
            Stage::Precondition,
            FailureClass::Precondition,
            format!(
                "f vanishes in the interior of E{at} (|f| = {:e})",
                min.value
            ),
        ));
    }
    Ok(Some(scan))
}

/// Largest Lipschitz bound of f over the elements of E, each grown by one
/// grid spacing.
pub fn local_lipschitz(inputs: &Inputs) -> Result<LipschitzBound, PipelineError> {
    let d = &inputs.domain;
    let n = d.n();
    let h = d.spacing();
    let mut faces: Vec<GridFace> = d
        .cells()
        .iter()
        .map(|c| GridFace {
            anchor: *c,
            mask: (1 << n) - 1,
        })
        .collect();
    faces.extend_from_slice(d.lower_faces());
    let (lo, hi) = d.bounding_box();
    let mut out = LipschitzBound {
        value: 0.0,
        region: BoxRegion::new(lo, hi).inflate(h),
        method: LipschitzMethod::SymbolicInterval,
    };
    for f in faces {
        let (a, b) = f.bounds(d.grid());
        let bound = inputs
            .field
            .lipschitz_bound(&BoxRegion::new(a, b).inflate(h))
            .map_err(|e| {
                PipelineError::new(Stage::Lipschitz, FailureClass::Input, e.to_string())
            })?;
        out.value = out.value.max(bound.value);
        if !bound.is_certified() {
            out.method = LipschitzMethod::SampledFallback;
        }
    }
    Ok(out)
}

/// Cells per domain cell so that `L sqrt(n) (1.5 s + 3 s) < ε / 4` with
/// `s = h / k`.
pub fn required_subdivisions(n: usize, lipschitz: f64, h: f64, epsilon: f64) -> f64 {
    let k = (18.0 * (n as f64).sqrt() * lipschitz * h / epsilon).floor() + 1.0;
    k.max(MIN_SUBDIVISIONS as f64)
}

pub fn choose_subdivisions(
    inputs: &Inputs,
    lipschitz: f64,
    cfg: &RunConfig,
) -> Result<i64, PipelineError> {
    let d = &inputs.domain;
    let h = d.spacing();
    let mut k = required_subdivisions(d.n(), lipschitz, h, cfg.epsilon);
    if let Some(s) = cfg.cell_size {
        k = k.max((h / s * (1.0 - 1e-12)).ceil());
    }
    let per_cell = k.powi(d.n() as i32) * if d.n() == 3 { 6.0 } else { 2.0 };
    if !k.is_finite() || per_cell > cfg.max_simplices as f64 {
        return Err(PipelineError::new(
            Stage::CellSize,
            FailureClass::ResourceCap,
            format!(
                "{k} subdivisions per domain cell need {per_cell:e} simplices per cell, cap is {}",
                cfg.max_simplices
            ),
        ));
    }
    Ok(k as i64)
}

fn flat_points<'a>(points: impl Iterator<Item = &'a Point>) -> Vec<f64> {
    points.flat_map(|p| p.coords().iter().copied()).collect()
}

fn finite_or_max(mut e: Extremum) -> Extremum {
    if !e.value.is_finite() {
        e.value = f64::MAX;
    }
    e
}

pub fn run_pipeline(
    domain_doc: &DomainDoc,
    field_doc: &FieldDoc,
    cfg: &RunConfig,
) -> Result<RunOutcome, PipelineError> {
    let mut clock = Clock::new();
    cfg.validate()?;
    let inputs = load_inputs(domain_doc, field_doc)?;
    clock.lap(Stage::Parse);
    interior_zero_scan(&inputs, cfg)?;
    clock.lap(Stage::Precondition);
    let lipschitz = local_lipschitz(&inputs)?;
    clock.lap(Stage::Lipschitz);
    let k = choose_subdivisions(&inputs, lipschitz.value, cfg)?;
    clock.lap(Stage::CellSize);

    let domain = &inputs.domain;
    let field = &inputs.field;
    let n = domain.n();
    let tri = base_triangulation(domain, k, cfg.max_simplices as u128)
        .map_err(|e| from_triangulate(Stage::Triangulate, e))?;
    let s = tri.lattice.spacing;
    let top_simplices = tri.top_count();
    clock.lap(Stage::Triangulate);
    let cover = build_cover(&tri, domain).map_err(|e| from_triangulate(Stage::Cover, e))?;
    clock.lap(Stage::Cover);
    let ct = classify_simplices(tri, domain).map_err(|e| from_triangulate(Stage::Classify, e))?;
    clock.lap(Stage::Classify);
    let (ct, repair) =
        repair_bad_simplices(ct, domain, &cover).map_err(|e| from_triangulate(Stage::Repair, e))?;
    clock.lap(Stage::Repair);
    let kc = build_k(&ct, domain).map_err(|e| from_approx(Stage::BuildK, e))?;
    clock.lap(Stage::BuildK);

    let mut ledger = BudgetLedger::new(cfg.epsilon, lipschitz.value, n, s);
    let pu = PartitionOfUnity::new(&ct, &cover, domain);
    let snap = SnapOptions {
        levels_cap: cfg.levels_cap,
        budget: ledger.snap_budget,
        seed: derived_seed(cfg.seed, STREAM_SNAP),
        random_samples: SNAP_RANDOM,
        max_simplices: cfg.max_simplices as u128,
    };
    let g = pl_snap(&kc, &pu, field, &snap).map_err(|e| from_approx(Stage::Snap, e))?;
    ledger.record_snap(g.snap_error);
    clock.lap(Stage::Snap);

    let avoid_opts = AvoidanceOptions::new(
        ledger.constant_budget,
        derived_seed(cfg.seed, STREAM_AVOIDANCE),
    );
    let avoid = choose_avoidance_constant(&g, &avoid_opts)
        .map_err(|e| from_zero_free(Stage::Avoidance, e))?;
    ledger.record_constant(avoid.c.norm());
    clock.lap(Stage::Avoidance);
    let g_values: Vec<f64> = flat_points(g.values.iter());
    let zf = assemble_zero_free(g, &avoid).map_err(|e| from_zero_free(Stage::Assemble, e))?;
    clock.lap(Stage::Assemble);

    let oracle = verify_run(&inputs, &ct, &cover, &zf, cfg);
    clock.lap(Stage::Verify);

    let document = ResultDocument {
        format: RESULT_FORMAT.to_string(),
        input: InputEcho {
            domain: domain_doc.clone(),
            field: field_doc.clone(),
            domain_sha256: sha256_hex(&to_json(domain_doc)),
            field_sha256: sha256_hex(&to_json(field_doc)),
        },
        config: ConfigEcho {
            run: cfg.clone(),
            subdivisions: k,
            cell_size: s,
            levels: zf.map.levels,
        },
        lipschitz,
        triangulation: TriangulationStats {
            top_simplices,
            keep_before_repair: repair.keep_before,
            keep: repair.keep,
            discard: repair.discard,
            perturbations: repair.perturbations.len(),
            halvings: repair.halvings,
            cover_members: cover.members.len(),
            cover_radius: cover.radius,
        },
        complex: complex_doc(&zf.map),
        g_values,
        c: zf.c.coords().to_vec(),
        certificates: Certificates {
            m_a: zf.m_a.is_finite().then_some(zf.m_a),
            mu: zf.mu,
            threshold: zf.threshold,
            margins: zf.margins.clone(),
            avoidance_radius: avoid.radius,
            avoidance_draws: avoid.draws,
        },
        ledger,
        witnesses: flat_points(ct.labels.iter().filter_map(|l| match l {
            Label::Discard(w) => Some(w),
            _ => None,
        })),
        oracle,
    };
    clock.lap(Stage::Emit);
    Ok(RunOutcome {
        document,
        timings: clock.timings,
    })
}

fn complex_doc(g: &ApproximantG) -> ComplexDoc {
    let c = g.complex();
    let n = g.n();
    let a = (0..g.a_count())
        .flat_map(|i| c.simplex(n, i).iter().copied())
        .collect();
    let b = g
        .lower_maximal
        .iter()
        .flat_map(|&i| c.simplex(n - 1, i as usize).iter().copied())
        .collect();
    ComplexDoc {
        n,
        vertices: flat_points(c.vertices().iter()),
        a,
        b,
    }
}

fn check(name: &str, passed: bool, detail: String) -> OracleCheck {
    OracleCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Re-checks the run with the independent oracles.
pub fn verify_run(
    inputs: &Inputs,
    ct: &ClassifiedTriangulation,
    cover: &Cover,
    zf: &ZeroFreeMap,
    cfg: &RunConfig,
) -> OracleReport {
    let domain = &inputs.domain;
    let field = &inputs.field;
    let grid = e_grid_samples(domain, cfg.verify_resolution);
    let random = e_random_samples(
        domain,
        &mut stage_rng(cfg.seed, STREAM_VERIFY),
        VERIFY_RANDOM,
    );
    let boundary = boundary_samples(
        domain,
        &mut stage_rng(cfg.seed, STREAM_BOUNDARY),
        VERIFY_BOUNDARY,
    );
    let q = q_samples(ct, &mut stage_rng(cfg.seed, STREAM_Q), VERIFY_Q);
    let mut all = grid.clone();
    all.extend_from_slice(&random);
    all.extend_from_slice(&boundary);

    let ev = IndependentEvaluator::new(ct, zf);
    let sup_error = finite_or_max(oracle_sup_error(field, |z| ev.eval(z), &all));
    let min_norm = finite_or_max(oracle_zero_scan(|z| ev.eval(z), &all));
    let scale = zf.map.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut checks = Vec::new();
    checks.push(check(
        "certificate-positive",
        zf.mu > 0.0,
        format!("mu = {:e}", zf.mu),
    ));
    checks.push(check(
        "sup-error-below-epsilon",
        sup_error.value < cfg.epsilon,
        format!(
            "sampled sup |f - F| = {:e}, epsilon = {:e}",
            sup_error.value, cfg.epsilon
        ),
    ));
    checks.push(check(
        "sampled-min-above-certificate",
        min_norm.value >= zf.mu - 1e-9,
        format!("sampled min |F| = {:e}, mu = {:e}", min_norm.value, zf.mu),
    ));

    let mut disagreement = 0.0f64;
    for z in &random {
        let d = match (eval_final(zf, ct, domain, z), ev.eval(z)) {
            (Ok(a), Some(b)) => (a - b).norm(),
            _ => f64::INFINITY,
        };
        disagreement = disagreement.max(d);
    }
    let tol = 1e-9 * (1.0 + scale);
    checks.push(check(
        "retraction-agreement",
        disagreement <= tol,
        format!(
            "max |F_pipeline - F_oracle| = {disagreement:e} over {} points",
            random.len()
        ),
    ));

    let a = zf.map.a_count();
    if zf.map.lower_maximal.is_empty() {
        checks.push(check(
            "avoidance-brute-force",
            true,
            "empty lower skeleton".into(),
        ));
    } else {
        let certified = zf.margins[a..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let (brute, at) =
            brute_force_avoidance_check(&zf.map, &Vector::zero(domain.n()), AVOIDANCE_RESOLUTION);
        checks.push(check(
            "avoidance-brute-force",
            brute > 0.0 && brute >= certified - 1e-12 * (1.0 + scale),
            format!("sampled min {brute:e} (lower simplex {at:?}), certified {certified:e}"),
        ));
    }

    let pu = PartitionOfUnity::new(ct, cover, domain);
    let mut partition_samples = random.clone();
    partition_samples.extend_from_slice(&q);
    partition_samples.extend_from_slice(&boundary);
    let partition_deviation = partition_sum_check(&pu, &partition_samples);
    checks.push(check(
        "partition-sum",
        partition_deviation < 1e-9,
        format!(
            "worst |1 - sum| = {partition_deviation:e} over {} points",
            partition_samples.len()
        ),
    ));
    let q_bad = q
        .iter()
        .filter(|x| pu.eval(x).map_or(true, |p| p.w != 1.0))
        .count();
    checks.push(check(
        "partition-w-on-q",
        q_bad == 0,
        format!("{q_bad} of {} Q samples with phi_W != 1", q.len()),
    ));
    let b_bad = boundary
        .iter()
        .filter(|x| pu.eval(x).map_or(true, |p| p.w != 0.0))
        .count();
    checks.push(check(
        "partition-w-on-boundary",
        b_bad == 0,
        format!(
            "{b_bad} of {} boundary samples with phi_W != 0",
            boundary.len()
        ),
    ));

    OracleReport {
        seed: cfg.seed,
        resolution: cfg.verify_resolution,
        grid_samples: grid.len(),
        random_samples: random.len() + boundary.len(),
        sup_error,
        min_norm,
        partition_deviation,
        checks,
    }
}

/// What `validate` reports: the parsed inputs and the triangulation size
/// the run would use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub n: usize,
    pub cells: usize,
    pub lower_faces: usize,
    pub has_interior: bool,
    pub field_components: usize,
    pub lipschitz: LipschitzBound,
    pub subdivisions: i64,
    pub cell_size: f64,
    pub estimated_simplices: u64,
    /// Sampled minimum of |f| over the interior, when E has one.
    pub interior_min: Option<Extremum>,
}

/// Runs the stages before triangulation.
pub fn validate_inputs(
    domain_doc: &DomainDoc,
    field_doc: &FieldDoc,
    cfg: &RunConfig,
) -> Result<ValidationSummary, PipelineError> {
    cfg.validate()?;
    let inputs = load_inputs(domain_doc, field_doc)?;
    let scan = interior_zero_scan(&inputs, cfg)?;
    let lipschitz = local_lipschitz(&inputs)?;
    let k = choose_subdivisions(&inputs, lipschitz.value, cfg)?;
    let d = &inputs.domain;
    let per_cell = (k as u64).pow(d.n() as u32) * if d.n() == 3 { 6 } else { 2 };
    Ok(ValidationSummary {
        n: d.n(),
        cells: d.cells().len(),
        lower_faces: d.lower_faces().len(),
        has_interior: d.has_interior(),
        field_components: inputs.field.n(),
        lipschitz,
        subdivisions: k,
        cell_size: d.spacing() / k as f64,
        estimated_simplices: per_cell.saturating_mul(d.cells().len().max(1) as u64),
        interior_min: scan.map(|s| s.min),
    })
}
