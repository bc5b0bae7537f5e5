//! Experiment drivers over the full pipeline: single-point runs, input
//! averaging, (mu, nu) sweeps, detector characterization tables, and the
//! validation suite shared by the CLI and the acceptance tests.
//!
//! Averaging runs Gauss-Legendre quadrature in u = cos(theta), which is the
//! Haar weight sin(theta)/2 on [0, pi]. Pipeline observables do not depend
//! on the azimuth delta (checked by `validation::phase_independence`), so
//! the azimuth average is evaluated at delta = 0. Fidelity averages are
//! averages of per-theta ratios, not ratios of averaged counts.
//!
//! Characterization tables follow the counting procedure of a four-fold
//! coincidence measurement: trigger arm, herald, a photon-number gate per
//! output mode, and one analysis arm per output mode. Dark counts inflate
//! raw coincidences but not the calibrated acceptance, so fidelity columns
//! divide each theta's conditional counts by the same-kind, same-efficiency,
//! zero-dark-count acceptance; success columns are raw averages.

use crate::analytic::{self, CloneParameter, FidelityReport, InputQubit};
use crate::detectors::{
    self, exclusive_one_weight, gate_weight, CoincidenceTable, DetectorModel,
};
use crate::error::{Error, Result};
use crate::fock::{Caps, ModeTransform, Polarization, PureState, SpatialMode};
use crate::optics::{
    self, conditional_groups, FeedforwardConfig, PdbsConfig, SpdcConfig,
};
use crate::quad;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

/// Rule choosing the clone-overlap parameter for each input colatitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClonerKind {
    /// Fixed lambda = sqrt(2/3); fidelity 5/6 for every input.
    Universal,
    /// Fixed lambda = 1/sqrt(2); optimal on the equator.
    PhaseCovariant,
    /// lambda follows the feasibility-optimal curve lambda(theta).
    MirrorAdaptive,
    /// Fixed lambda chosen from a target second Legendre moment.
    FixedA2(f64),
}

impl ClonerKind {
    pub fn clone_parameter(&self, theta: f64) -> Result<CloneParameter> {
        match *self {
            ClonerKind::Universal => Ok(CloneParameter::universal()),
            ClonerKind::PhaseCovariant => Ok(CloneParameter::equatorial()),
            ClonerKind::MirrorAdaptive => Ok(analytic::lambda_from_theta(theta)),
            ClonerKind::FixedA2(a2) => analytic::lambda_from_a2(a2),
        }
    }
}

/// Full machine description for one pipeline run. The same detector model
/// serves the trigger, the herald, and both analysis stations.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub spdc: SpdcConfig,
    pub pdbs: PdbsConfig,
    pub cloner: ClonerKind,
    pub detector: DetectorModel,
}

impl PipelineConfig {
    pub fn caps(&self) -> Caps {
        self.spdc.recommended_caps()
    }
}

fn staged_state(
    source: &PureState,
    splitter: &ModeTransform,
    q: &InputQubit,
) -> Result<PureState> {
    optics::prepare_input(source, q)?.apply_mode_transform(splitter)
}

fn run_prepared(
    cfg: &PipelineConfig,
    source: &PureState,
    splitter: &ModeTransform,
    q: &InputQubit,
    kappa: f64,
) -> Result<CoincidenceTable> {
    let psi = staged_state(source, splitter, q)?;
    let ff = FeedforwardConfig::new(kappa)?;
    let rho = optics::feedforward_output(&psi, &ff, &cfg.detector, &cfg.detector)?;
    detectors::coincidences(&rho, q, &cfg.detector)
}

/// Runs the pipeline for one input state and reports both clone fidelities
/// and the acceptance probability.
pub fn run_point(cfg: &PipelineConfig, q: &InputQubit) -> Result<FidelityReport> {
    let p = cfg.cloner.clone_parameter(q.theta())?;
    let kappa = optics::kappa_for(&p, &cfg.pdbs)?;
    let source = optics::spdc_state(&cfg.spdc, cfg.caps())?;
    let splitter = optics::pdbs(&cfg.pdbs)?;
    let t = run_prepared(cfg, &source, &splitter, q, kappa)?;
    detectors::fidelities_from_coincidences(&t)
}

/// Input-state average of `run_point` under the cloner's natural input
/// class: the whole sphere for the universal and adaptive rules, the
/// equator point for the phase-covariant rule, and the matching mirror
/// pair for a fixed second-moment rule.
pub fn average_over_inputs(
    cfg: &PipelineConfig,
    quadrature_points: usize,
) -> Result<FidelityReport> {
    if quadrature_points < 16 {
        return Err(Error::Domain {
            param: "quadrature_points",
            value: quadrature_points as f64,
            allowed: ">= 16",
        });
    }
    match cfg.cloner {
        ClonerKind::PhaseCovariant => {
            run_point(cfg, &InputQubit::polar(std::f64::consts::FRAC_PI_2)?)
        }
        ClonerKind::FixedA2(a2) => {
            let cos2 = (2.0 * a2 + 1.0) / 3.0;
            let theta = cos2.max(0.0).sqrt().acos();
            let north = run_point(cfg, &InputQubit::polar(theta)?)?;
            let south = run_point(cfg, &InputQubit::polar(std::f64::consts::PI - theta)?)?;
            Ok(FidelityReport::new(
                0.5 * (north.f1 + south.f1),
                0.5 * (north.f2 + south.f2),
                0.5 * (north.p_success + south.p_success),
            ))
        }
        ClonerKind::Universal | ClonerKind::MirrorAdaptive => {
            let source = optics::spdc_state(&cfg.spdc, cfg.caps())?;
            let splitter = optics::pdbs(&cfg.pdbs)?;
            let (nodes, weights) = quad::gauss_legendre(quadrature_points);
            let mut f1 = 0.0;
            let mut f2 = 0.0;
            let mut p = 0.0;
            for (&u, &w) in nodes.iter().zip(&weights) {
                let q = InputQubit::polar(u.acos())?;
                let cp = cfg.cloner.clone_parameter(q.theta())?;
                let kappa = optics::kappa_for(&cp, &cfg.pdbs)?;
                let t = run_prepared(cfg, &source, &splitter, &q, kappa)?;
                let report = detectors::fidelities_from_coincidences(&t)?;
                let haar = 0.5 * w;
                f1 += haar * report.f1;
                f2 += haar * report.f2;
                p += haar * report.p_success;
            }
            Ok(FidelityReport::new(f1, f2, p))
        }
    }
}

// ---------------------------------------------------------------------------
// Sweep plumbing

/// Inclusive linear grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + step * i as f64).collect()
    }
}

fn default_surface_grid() -> GridSpec {
    GridSpec { min: 0.0, max: 1.0, points: 81 }
}

fn default_gamma_squared() -> f64 {
    0.01
}

fn default_quad_points() -> usize {
    64
}

/// Grid description for a transmittance sweep. Unknown keys are rejected so
/// config typos surface as parse errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_surface_grid")]
    pub mu: GridSpec,
    #[serde(default = "default_surface_grid")]
    pub nu: GridSpec,
    #[serde(default = "default_gamma_squared")]
    pub gamma_squared: f64,
    #[serde(default = "default_quad_points")]
    pub quadrature_points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            mu: default_surface_grid(),
            nu: default_surface_grid(),
            gamma_squared: default_gamma_squared(),
            quadrature_points: default_quad_points(),
        }
    }
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        for (name, grid) in [("mu", &self.mu), ("nu", &self.nu)] {
            if grid.points == 0 {
                return Err(Error::Domain { param: "points", value: 0.0, allowed: ">= 1" });
            }
            if !(0.0..=1.0).contains(&grid.min)
                || !(0.0..=1.0).contains(&grid.max)
                || grid.min > grid.max
            {
                return Err(Error::Domain {
                    param: name,
                    value: grid.min,
                    allowed: "0 <= min <= max <= 1",
                });
            }
        }
        if self.quadrature_points < 16 {
            return Err(Error::Domain {
                param: "quadrature_points",
                value: self.quadrature_points as f64,
                allowed: ">= 16",
            });
        }
        if !(self.gamma_squared > 0.0 && self.gamma_squared <= 0.1) {
            return Err(Error::Domain {
                param: "gamma_squared",
                value: self.gamma_squared,
                allowed: "(0, 0.1]",
            });
        }
        Ok(())
    }
}

/// One coordinate of a sweep row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for PointValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointValue::Number(x) => write!(f, "{x}"),
            PointValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: Vec<(String, PointValue)>,
    pub f1: f64,
    pub f2: f64,
    pub f_avg: f64,
    pub p_success: f64,
    #[serde(default)]
    pub note: String,
}

impl SweepRow {
    pub fn coordinate(&self, name: &str) -> Option<&PointValue> {
        self.point.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn number(&self, name: &str) -> Option<f64> {
        match self.coordinate(name) {
            Some(PointValue::Number(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        match self.coordinate(name) {
            Some(PointValue::Text(s)) => Some(s.as_str()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub config_hash: String,
    pub tolerances: Vec<(String, f64)>,
    pub generated_unix_secs: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

fn fnv1a64(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn metadata_for(canonical_config: &str, tolerances: Vec<(String, f64)>) -> SweepMetadata {
    SweepMetadata {
        config_hash: format!("{:016x}", fnv1a64(canonical_config)),
        tolerances,
        generated_unix_secs: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    }
}

impl SweepResult {
    /// One row per line, header first, shortest round-trip float formatting.
    /// Metadata is deliberately excluded so identical configurations produce
    /// byte-identical files.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let Some(first) = self.rows.first() else {
            return out;
        };
        for (name, _) in &first.point {
            out.push_str(name);
            out.push(',');
        }
        out.push_str("f1,f2,f_avg,p_success,note\n");
        for row in &self.rows {
            for (_, value) in &row.point {
                out.push_str(&value.to_string());
                out.push(',');
            }
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.f1, row.f2, row.f_avg, row.p_success, row.note
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep results are plain data")
    }
}

/// Transmittance surface sweep under the adaptive cloner, order-2 source,
/// perfect detectors. Feedforward attenuations that would exceed unit
/// magnitude are clamped to the unit interval boundary and the row is
/// marked `clamped`. Rows whose acceptance vanishes at every quadrature
/// node keep zero fidelity fields and are marked `blocked`; `partial` marks
/// rows where only some nodes accept.
pub fn sweep_mu_nu(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let spdc = SpdcConfig::new(spec.gamma_squared, 0.0, 2)?;
    let caps = spdc.recommended_caps();
    let source = optics::spdc_state(&spdc, caps)?;
    let perfect = DetectorModel::perfect();
    let (nodes, weights) = quad::gauss_legendre(spec.quadrature_points);

    struct NodeContext {
        haar: f64,
        q: InputQubit,
        prepared: PureState,
        parameter: CloneParameter,
    }
    let contexts: Vec<NodeContext> = nodes
        .iter()
        .zip(&weights)
        .map(|(&u, &w)| {
            let q = InputQubit::polar(u.acos())?;
            Ok(NodeContext {
                haar: 0.5 * w,
                prepared: optics::prepare_input(&source, &q)?,
                parameter: analytic::lambda_from_theta(q.theta()),
                q,
            })
        })
        .collect::<Result<_>>()?;

    let mus = spec.mu.values();
    let nus = spec.nu.values();
    let rows: Vec<SweepRow> = (0..mus.len() * nus.len())
        .into_par_iter()
        .map(|idx| -> Result<SweepRow> {
            let mu = mus[idx / nus.len()];
            let nu = nus[idx % nus.len()];
            let pdbs_cfg = PdbsConfig::new(mu, nu)?;
            let splitter = optics::pdbs(&pdbs_cfg)?;
            let mut f1 = 0.0;
            let mut f2 = 0.0;
            let mut p = 0.0;
            let mut accepted_mass = 0.0;
            let mut blocked_nodes = 0usize;
            let mut clamped_any = false;
            for ctx in &contexts {
                let (kappa, clamped) = optics::kappa_clamped(&ctx.parameter, &pdbs_cfg);
                clamped_any |= clamped;
                let psi = ctx.prepared.apply_mode_transform(&splitter)?;
                let ff = FeedforwardConfig::new(kappa)?;
                let rho = optics::feedforward_output(&psi, &ff, &perfect, &perfect)?;
                let t = detectors::coincidences(&rho, &ctx.q, &perfect)?;
                let total = t.total();
                p += ctx.haar * total;
                if total > 0.0 {
                    f1 += ctx.haar * (t.c11 + t.c10) / total;
                    f2 += ctx.haar * (t.c11 + t.c01) / total;
                    accepted_mass += ctx.haar;
                } else {
                    blocked_nodes += 1;
                }
            }
            let mut tags: Vec<&str> = Vec::new();
            if clamped_any {
                tags.push("clamped");
            }
            if blocked_nodes == contexts.len() {
                tags.push("blocked");
                f1 = 0.0;
                f2 = 0.0;
            } else {
                if blocked_nodes > 0 {
                    tags.push("partial");
                }
                f1 /= accepted_mass;
                f2 /= accepted_mass;
            }
            Ok(SweepRow {
                point: vec![
                    ("mu".into(), PointValue::Number(mu)),
                    ("nu".into(), PointValue::Number(nu)),
                ],
                f1,
                f2,
                f_avg: 0.5 * (f1 + f2),
                p_success: p,
                note: tags.join("+"),
            })
        })
        .collect::<Result<_>>()?;

    let canonical = format!(
        "sweep_mu_nu mu={:?} nu={:?} gamma2={} quad={}",
        spec.mu, spec.nu, spec.gamma_squared, spec.quadrature_points
    );
    Ok(SweepResult {
        metadata: metadata_for(&canonical, vec![("quadrature".into(), 1e-6)]),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Characterization tables

/// Quadrature order for the characterization tables.
pub const TABLE_QUAD_POINTS: usize = 48;

/// Efficiency column of the published operating-point characterization.
pub const TABLE_ETAS: [f64; 8] = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3];

/// Dark-count column of the published operating-point characterization.
pub const TABLE_ZETAS: [f64; 6] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

/// Detector-independent per-node event weights: everything about one
/// quadrature node except the detector response. `weight` is the squared
/// amplitude of one post-analysis basis ket within one trigger branch.
struct SkeletonEntry {
    fired: u32,
    silent: u32,
    herald: u32,
    h1: u32,
    v1: u32,
    h2: u32,
    v2: u32,
    weight: f64,
}

struct ThetaSkeleton {
    haar: f64,
    entries: Vec<SkeletonEntry>,
}

fn clone_skeletons(gamma_squared: f64) -> Result<Vec<ThetaSkeleton>> {
    let spdc = SpdcConfig::new(gamma_squared, 0.0, 3)?;
    let caps = spdc.recommended_caps();
    let pdbs_cfg = PdbsConfig::optimal();
    let splitter = optics::pdbs(&pdbs_cfg)?;
    let source = optics::spdc_state(&spdc, caps)?;
    let (nodes, weights) = quad::gauss_legendre(TABLE_QUAD_POINTS);
    let mixed = [SpatialMode::Mixed1, SpatialMode::Mixed2];

    nodes
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&u, &w)| -> Result<ThetaSkeleton> {
            let q = InputQubit::polar(u.acos())?;
            let parameter = analytic::lambda_from_theta(q.theta());
            let ff = FeedforwardConfig::new(optics::kappa_for(&parameter, &pdbs_cfg)?)?;
            let psi = staged_state(&source, &splitter, &q)?;
            let rotation = detectors::analysis_rotation(&q, &mixed);
            let mut acc: BTreeMap<[u32; 7], f64> = BTreeMap::new();
            for group in conditional_groups(&psi) {
                let n0h = group.control_h();
                let n0v = group.control_v();
                let herald = group.herald_total();
                for (fired, silent, pol) in
                    [(n0h, n0v, Polarization::H), (n0v, n0h, Polarization::V)]
                {
                    let damped =
                        optics::damping_operator(&ff, pol).apply_to_state(&group.state);
                    if damped.is_empty() {
                        continue;
                    }
                    let rotated = damped.apply_mode_transform(&rotation)?;
                    for (ket, amp) in rotated.amplitudes() {
                        let weight = amp.norm_sqr();
                        if weight < 1e-30 {
                            continue;
                        }
                        let key = [
                            fired,
                            silent,
                            herald,
                            ket.occupation(SpatialMode::Mixed1.h()) as u32,
                            ket.occupation(SpatialMode::Mixed1.v()) as u32,
                            ket.occupation(SpatialMode::Mixed2.h()) as u32,
                            ket.occupation(SpatialMode::Mixed2.v()) as u32,
                        ];
                        *acc.entry(key).or_insert(0.0) += weight;
                    }
                }
            }
            Ok(ThetaSkeleton {
                haar: 0.5 * w,
                entries: acc
                    .into_iter()
                    .map(|(k, weight)| SkeletonEntry {
                        fired: k[0],
                        silent: k[1],
                        herald: k[2],
                        h1: k[3],
                        v1: k[4],
                        h2: k[5],
                        v2: k[6],
                        weight,
                    })
                    .collect(),
            })
        })
        .collect()
}

fn eval_skeleton(sk: &ThetaSkeleton, d: &DetectorModel) -> CoincidenceTable {
    let mut t = CoincidenceTable::default();
    for e in &sk.entries {
        let accept = exclusive_one_weight(d, e.fired, e.silent)
            * gate_weight(d, e.herald)
            * gate_weight(d, e.h1 + e.v1)
            * gate_weight(d, e.h2 + e.v2)
            * e.weight;
        if accept == 0.0 {
            continue;
        }
        let one1 = exclusive_one_weight(d, e.h1, e.v1);
        let zero1 = exclusive_one_weight(d, e.v1, e.h1);
        let one2 = exclusive_one_weight(d, e.h2, e.v2);
        let zero2 = exclusive_one_weight(d, e.v2, e.h2);
        t.c11 += accept * one1 * one2;
        t.c10 += accept * one1 * zero2;
        t.c01 += accept * zero1 * one2;
        t.c00 += accept * zero1 * zero2;
    }
    t
}

fn detector_for(kind: &str, eta: f64, zeta: f64) -> Result<DetectorModel> {
    match kind {
        "counter" => DetectorModel::single_photon_counter(eta, zeta),
        "onoff" => DetectorModel::on_off(eta, zeta),
        other => Err(Error::InvalidDetectorModel {
            expected: "counter or onoff",
            got: other.to_string(),
        }),
    }
}

/// Detector kinds covered by the characterization tables, in row order.
pub const TABLE_KINDS: [&str; 2] = ["counter", "onoff"];

fn table_rows(
    skeletons: &[ThetaSkeleton],
    cells: &[(&'static str, f64, f64)],
) -> Result<Vec<SweepRow>> {
    cells
        .iter()
        .map(|&(kind, eta, zeta)| -> Result<SweepRow> {
            let d = detector_for(kind, eta, zeta)?;
            let calibration = detector_for(kind, eta, 0.0)?;
            let mut p = 0.0;
            let mut f1 = 0.0;
            let mut f2 = 0.0;
            for sk in skeletons {
                let t = eval_skeleton(sk, &d);
                p += sk.haar * t.total();
                let c0 = if zeta == 0.0 {
                    t.total()
                } else {
                    eval_skeleton(sk, &calibration).total()
                };
                if c0 > 0.0 {
                    f1 += sk.haar * (t.c11 + t.c10) / c0;
                    f2 += sk.haar * (t.c11 + t.c01) / c0;
                }
            }
            Ok(SweepRow {
                point: vec![
                    ("kind".into(), PointValue::Text(kind.into())),
                    ("eta".into(), PointValue::Number(eta)),
                    ("zeta".into(), PointValue::Number(zeta)),
                ],
                f1,
                f2,
                f_avg: 0.5 * (f1 + f2),
                p_success: p,
                note: String::new(),
            })
        })
        .collect()
}

/// Averaged acceptance and fidelities versus detector efficiency, for both
/// detector kinds, at a fixed dark-count rate (0 or the 1e-6 floor).
pub fn table_detector_efficiency(
    etas: &[f64],
    gamma_squared: f64,
    zeta: f64,
) -> Result<SweepResult> {
    let skeletons = clone_skeletons(gamma_squared)?;
    let mut cells = Vec::new();
    for &kind in &TABLE_KINDS {
        for &eta in etas {
            cells.push((kind, eta, zeta));
        }
    }
    let rows = table_rows(&skeletons, &cells)?;
    let canonical = format!(
        "table_detector_efficiency etas={etas:?} gamma2={gamma_squared} zeta={zeta} quad={TABLE_QUAD_POINTS}"
    );
    Ok(SweepResult {
        metadata: metadata_for(
            &canonical,
            vec![
                ("fidelity".into(), reference::TOLERANCE_FIDELITY),
                ("success".into(), reference::TOLERANCE_SUCCESS),
            ],
        ),
        rows,
    })
}

/// Averaged acceptance and fidelities versus dark-count rate at unit
/// efficiency, for both detector kinds.
pub fn table_dark_counts(zetas: &[f64], gamma_squared: f64) -> Result<SweepResult> {
    let skeletons = clone_skeletons(gamma_squared)?;
    let mut cells = Vec::new();
    for &kind in &TABLE_KINDS {
        for &zeta in zetas {
            cells.push((kind, 1.0, zeta));
        }
    }
    let rows = table_rows(&skeletons, &cells)?;
    let canonical =
        format!("table_dark_counts zetas={zetas:?} gamma2={gamma_squared} quad={TABLE_QUAD_POINTS}");
    Ok(SweepResult {
        metadata: metadata_for(
            &canonical,
            vec![
                ("fidelity".into(), reference::TOLERANCE_FIDELITY),
                ("success".into(), reference::TOLERANCE_SUCCESS),
            ],
        ),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Reference data

/// Golden characterization values and their comparison tolerances.
pub mod reference {
    /// Absolute tolerance on fidelity columns.
    pub const TOLERANCE_FIDELITY: f64 = 0.002;
    /// Absolute tolerance on the success-probability column.
    pub const TOLERANCE_SUCCESS: f64 = 0.005;

    #[derive(Debug, Clone, Copy)]
    pub struct TableCell {
        pub kind: &'static str,
        pub eta: f64,
        pub zeta: f64,
        pub p_success: f64,
        pub f1: f64,
        pub f2: f64,
    }

    /// Efficiency characterization at gamma^2 = 0.01, dark counts neglected.
    pub const EFFICIENCY_TABLE: [TableCell; 16] = [
        TableCell { kind: "counter", eta: 1.0, zeta: 0.0, p_success: 0.2552, f1: 0.8594, f2: 0.8594 },
        TableCell { kind: "counter", eta: 0.9, zeta: 0.0, p_success: 0.1357, f1: 0.8591, f2: 0.8592 },
        TableCell { kind: "counter", eta: 0.8, zeta: 0.0, p_success: 0.0671, f1: 0.8588, f2: 0.8589 },
        TableCell { kind: "counter", eta: 0.7, zeta: 0.0, p_success: 0.0302, f1: 0.8583, f2: 0.8584 },
        TableCell { kind: "counter", eta: 0.6, zeta: 0.0, p_success: 0.0120, f1: 0.8576, f2: 0.8578 },
        TableCell { kind: "counter", eta: 0.5, zeta: 0.0, p_success: 0.0041, f1: 0.8567, f2: 0.8569 },
        TableCell { kind: "counter", eta: 0.4, zeta: 0.0, p_success: 0.0011, f1: 0.8555, f2: 0.8558 },
        TableCell { kind: "counter", eta: 0.3, zeta: 0.0, p_success: 0.0002, f1: 0.8540, f2: 0.8543 },
        TableCell { kind: "onoff", eta: 1.0, zeta: 0.0, p_success: 0.2598, f1: 0.8567, f2: 0.8569 },
        TableCell { kind: "onoff", eta: 0.9, zeta: 0.0, p_success: 0.1387, f1: 0.8562, f2: 0.8564 },
        TableCell { kind: "onoff", eta: 0.8, zeta: 0.0, p_success: 0.0688, f1: 0.8555, f2: 0.8558 },
        TableCell { kind: "onoff", eta: 0.7, zeta: 0.0, p_success: 0.0311, f1: 0.8548, f2: 0.8551 },
        TableCell { kind: "onoff", eta: 0.6, zeta: 0.0, p_success: 0.0124, f1: 0.8540, f2: 0.8543 },
        TableCell { kind: "onoff", eta: 0.5, zeta: 0.0, p_success: 0.0042, f1: 0.8531, f2: 0.8534 },
        TableCell { kind: "onoff", eta: 0.4, zeta: 0.0, p_success: 0.0011, f1: 0.8521, f2: 0.8524 },
        TableCell { kind: "onoff", eta: 0.3, zeta: 0.0, p_success: 0.0002, f1: 0.8510, f2: 0.8513 },
    ];

    /// Dark-count characterization at gamma^2 = 0.01, unit efficiency.
    pub const DARK_COUNT_TABLE: [TableCell; 12] = [
        TableCell { kind: "counter", eta: 1.0, zeta: 1e-6, p_success: 0.2552, f1: 0.8594, f2: 0.8594 },
        TableCell { kind: "counter", eta: 1.0, zeta: 1e-5, p_success: 0.2552, f1: 0.8594, f2: 0.8594 },
        TableCell { kind: "counter", eta: 1.0, zeta: 1e-4, p_success: 0.2550, f1: 0.8589, f2: 0.8589 },
        TableCell { kind: "counter", eta: 1.0, zeta: 1e-3, p_success: 0.2536, f1: 0.8543, f2: 0.8543 },
        TableCell { kind: "counter", eta: 1.0, zeta: 1e-2, p_success: 0.2403, f1: 0.8094, f2: 0.8094 },
        TableCell { kind: "counter", eta: 1.0, zeta: 1e-1, p_success: 0.1409, f1: 0.4724, f2: 0.4724 },
        TableCell { kind: "onoff", eta: 1.0, zeta: 1e-6, p_success: 0.2598, f1: 0.8567, f2: 0.8569 },
        TableCell { kind: "onoff", eta: 1.0, zeta: 1e-5, p_success: 0.2598, f1: 0.8567, f2: 0.8569 },
        TableCell { kind: "onoff", eta: 1.0, zeta: 1e-4, p_success: 0.2598, f1: 0.8566, f2: 0.8568 },
        TableCell { kind: "onoff", eta: 1.0, zeta: 1e-3, p_success: 0.2600, f1: 0.8557, f2: 0.8559 },
        TableCell { kind: "onoff", eta: 1.0, zeta: 1e-2, p_success: 0.2620, f1: 0.8470, f2: 0.8472 },
        TableCell { kind: "onoff", eta: 1.0, zeta: 1e-1, p_success: 0.2718, f1: 0.7818, f2: 0.7820 },
    ];
}

/// One golden-cell comparison.
#[derive(Debug, Clone)]
pub struct CellDiff {
    pub kind: String,
    pub eta: f64,
    pub zeta: f64,
    pub column: &'static str,
    pub got: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl CellDiff {
    pub fn passed(&self) -> bool {
        (self.got - self.expected).abs() <= self.tolerance
    }
}

impl fmt::Display for CellDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} eta={} zeta={} {}: got {:.4}, expected {:.4}, |diff| {:.4} (tol {})",
            if self.passed() { "ok  " } else { "MISS" },
            self.kind,
            self.eta,
            self.zeta,
            self.column,
            self.got,
            self.expected,
            (self.got - self.expected).abs(),
            self.tolerance,
        )
    }
}

/// Compares computed table rows against golden cells, matching rows by
/// detector kind and parameters. The dark-count column of the computed rows
/// may differ from the golden `zeta` when the table was generated at the
/// zero-dark-count limit; matching tolerates that by pairing rows in order
/// within each (kind, eta) stratum.
pub fn compare_table(result: &SweepResult, golden: &[reference::TableCell]) -> Vec<CellDiff> {
    let mut diffs = Vec::new();
    for cell in golden {
        let row = result.rows.iter().find(|r| {
            r.text("kind") == Some(cell.kind)
                && r.number("eta").map(|e| (e - cell.eta).abs() < 1e-12) == Some(true)
                && r.number("zeta")
                    .map(|z| (z - cell.zeta).abs() <= 1e-12 + 1e-6 * cell.zeta.max(1.0))
                    == Some(true)
        });
        let Some(row) = row else {
            diffs.push(CellDiff {
                kind: cell.kind.into(),
                eta: cell.eta,
                zeta: cell.zeta,
                column: "missing row",
                got: f64::NAN,
                expected: cell.p_success,
                tolerance: 0.0,
            });
            continue;
        };
        for (column, got, expected, tolerance) in [
            ("p_success", row.p_success, cell.p_success, reference::TOLERANCE_SUCCESS),
            ("f1", row.f1, cell.f1, reference::TOLERANCE_FIDELITY),
            ("f2", row.f2, cell.f2, reference::TOLERANCE_FIDELITY),
        ] {
            diffs.push(CellDiff {
                kind: cell.kind.into(),
                eta: cell.eta,
                zeta: cell.zeta,
                column,
                got,
                expected,
                tolerance,
            });
        }
    }
    diffs
}

// ---------------------------------------------------------------------------
// Validation suite

/// Named invariant checks shared by the CLI `validate` command and the
/// acceptance tests.
pub mod validation {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[derive(Debug, Clone)]
    pub struct Check {
        pub name: &'static str,
        pub passed: bool,
        /// Marks demonstrations whose point is to show a property failing
        /// off its stated preconditions.
        pub expected_fail: bool,
        pub detail: String,
    }

    impl Check {
        fn judged(name: &'static str, passed: bool, detail: String) -> Self {
            Check { name, passed, expected_fail: false, detail }
        }
    }

    fn mpcc_order2() -> PipelineConfig {
        PipelineConfig {
            spdc: SpdcConfig::new(0.01, 0.0, 2).expect("valid source"),
            pdbs: PdbsConfig::optimal(),
            cloner: ClonerKind::MirrorAdaptive,
            detector: DetectorModel::perfect(),
        }
    }

    /// 200 random transmittance pairs: the splitter passes the library's
    /// column-orthonormality gate and preserves the norm of a random
    /// two-photon product state.
    pub fn splitter_unitarity(seed: u64, trials: usize) -> Check {
        let mut rng = StdRng::seed_from_u64(seed);
        let caps = Caps::default();
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let cfg = match PdbsConfig::new(rng.gen(), rng.gen()) {
                Ok(c) => c,
                Err(e) => return Check::judged("splitter_unitarity", false, e.to_string()),
            };
            let splitter = match optics::pdbs(&cfg) {
                Ok(t) => t,
                Err(e) => return Check::judged("splitter_unitarity", false, e.to_string()),
            };
            let (a, b): (f64, f64) = (rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
            let (c, d): (f64, f64) = (rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
            let n1 = (a * a + b * b).sqrt().max(1e-9);
            let n2 = (c * c + d * d).sqrt().max(1e-9);
            let r1 = SpatialMode::Input1;
            let r2 = SpatialMode::Input2;
            let state = PureState::from_amplitudes(
                [
                    (
                        crate::fock::FockBasisState::from_occupations([(r1.h(), 1), (r2.h(), 1)]),
                        Complex64::new(a / n1 * c / n2, 0.0),
                    ),
                    (
                        crate::fock::FockBasisState::from_occupations([(r1.h(), 1), (r2.v(), 1)]),
                        Complex64::new(a / n1 * d / n2, 0.0),
                    ),
                    (
                        crate::fock::FockBasisState::from_occupations([(r1.v(), 1), (r2.h(), 1)]),
                        Complex64::new(b / n1 * c / n2, 0.0),
                    ),
                    (
                        crate::fock::FockBasisState::from_occupations([(r1.v(), 1), (r2.v(), 1)]),
                        Complex64::new(b / n1 * d / n2, 0.0),
                    ),
                ],
                caps,
            )
            .expect("in-cap product state");
            match state.apply_mode_transform(&splitter) {
                Ok(out) => worst = worst.max((out.norm_sqr() - 1.0).abs()),
                Err(e) => return Check::judged("splitter_unitarity", false, e.to_string()),
            }
        }
        Check::judged(
            "splitter_unitarity",
            worst < 1e-12,
            format!("worst norm deviation {worst:.3e} over {trials} random splitters"),
        )
    }

    /// POVM completeness and eigenvalue range per photon-number level.
    pub fn povm_completeness() -> Check {
        let mut worst: f64 = 0.0;
        for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for zeta in [0.0, 0.01, 0.1, 0.2] {
                let spc = DetectorModel::single_photon_counter(eta, zeta).expect("valid");
                let onoff = DetectorModel::on_off(eta, zeta).expect("valid");
                for povm in [
                    detectors::spc_povm(&spc, 8).expect("right kind"),
                    detectors::onoff_povm(&onoff, 8).expect("right kind"),
                ] {
                    for m in 0..=8usize {
                        let sum: f64 = povm.iter().map(|e| e.weights[m]).sum();
                        worst = worst.max((sum - 1.0).abs());
                        for e in &povm {
                            worst = worst.max((-e.weights[m]).max(e.weights[m] - 1.0).max(0.0));
                        }
                    }
                }
            }
        }
        Check::judged(
            "povm_completeness",
            worst < 1e-12,
            format!("worst completeness/range deviation {worst:.3e}"),
        )
    }

    /// Order-2 pipeline with perfect detectors against the closed-form
    /// fidelity and acceptance on a 25-point colatitude grid.
    pub fn oracle_agreement() -> Check {
        let cfg = mpcc_order2();
        let mut worst_f: f64 = 0.0;
        let mut worst_p: f64 = 0.0;
        for k in 0..25 {
            let theta = std::f64::consts::PI * k as f64 / 24.0;
            let q = InputQubit::polar(theta).expect("in range");
            let report = match run_point(&cfg, &q) {
                Ok(r) => r,
                Err(e) => return Check::judged("oracle_agreement", false, e.to_string()),
            };
            let p = analytic::lambda_from_theta(theta);
            let f_formula = analytic::single_copy_fidelity(theta, &p);
            let p_formula = analytic::success_probability_ideal(&p);
            worst_f = worst_f
                .max((report.f1 - f_formula).abs())
                .max((report.f2 - f_formula).abs());
            worst_p = worst_p.max((report.p_success - p_formula).abs());
        }
        Check::judged(
            "oracle_agreement",
            worst_f < 1e-9 && worst_p < 1e-9,
            format!("max |F - formula| {worst_f:.3e}, max |P - formula| {worst_p:.3e}"),
        )
    }

    /// Along mu + nu = 1 inside the feasibility band the averaged fidelity
    /// is flat while the acceptance follows (1-2 mu)^2 times the averaged
    /// 1/(2 lambda^2).
    pub fn robustness_plateau() -> Check {
        let quad_points = 48;
        let (nodes, weights) = quad::gauss_legendre(quad_points);
        let mean_inv_two_lambda_sq: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&u, &w)| {
                let p = analytic::lambda_from_theta(u.acos());
                0.5 * w / (2.0 * p.lambda() * p.lambda())
            })
            .sum();
        let mut f_values = Vec::new();
        let mut worst_p: f64 = 0.0;
        for &mu in &[0.23, 0.29, 0.35, 0.41, 0.47, 0.53, 0.59, 0.65, 0.71, 0.77] {
            let mut cfg = mpcc_order2();
            cfg.pdbs = match PdbsConfig::new(mu, 1.0 - mu) {
                Ok(c) => c,
                Err(e) => return Check::judged("robustness_plateau", false, e.to_string()),
            };
            let report = match average_over_inputs(&cfg, quad_points) {
                Ok(r) => r,
                Err(e) => return Check::judged("robustness_plateau", false, e.to_string()),
            };
            f_values.push(0.5 * (report.f1 + report.f2));
            let expected = (1.0 - 2.0 * mu).powi(2) * mean_inv_two_lambda_sq;
            worst_p = worst_p.max((report.p_success - expected).abs());
        }
        let spread = f_values.iter().cloned().fold(f64::MIN, f64::max)
            - f_values.iter().cloned().fold(f64::MAX, f64::min);
        Check::judged(
            "robustness_plateau",
            spread < 1e-6 && worst_p < 1e-6,
            format!("fidelity spread {spread:.3e}, max |P - (1-2mu)^2<1/(2L^2)>| {worst_p:.3e}"),
        )
    }

    /// Balanced splitter sends identically polarized photon pairs into the
    /// same output rail; the split amplitude vanishes identically.
    pub fn hom_null() -> Check {
        let caps = Caps::default();
        let pair = PureState::vacuum(caps)
            .create(SpatialMode::Input1.h())
            .expect("in cap")
            .create(SpatialMode::Input2.h())
            .expect("in cap");
        let splitter = match optics::pdbs(&PdbsConfig::new(0.5, 0.5).expect("valid")) {
            Ok(t) => t,
            Err(e) => return Check::judged("hom_null", false, e.to_string()),
        };
        let out = match pair.apply_mode_transform(&splitter) {
            Ok(s) => s,
            Err(e) => return Check::judged("hom_null", false, e.to_string()),
        };
        let split = crate::fock::FockBasisState::from_occupations([
            (SpatialMode::Mixed1.h(), 1),
            (SpatialMode::Mixed2.h(), 1),
        ]);
        let residual = out.amplitude(&split).norm();
        Check::judged(
            "hom_null",
            residual <= 1e-15,
            format!("split amplitude {residual:.3e}"),
        )
    }

    /// Azimuth independence: fidelities and acceptance agree across delta.
    pub fn phase_independence() -> Check {
        let cfg = mpcc_order2();
        let theta = 1.0;
        let mut reports = Vec::new();
        for delta in [0.0, 0.9, 2.2, 4.5, 5.9] {
            let q = match InputQubit::new(theta, delta) {
                Ok(q) => q,
                Err(e) => return Check::judged("phase_independence", false, e.to_string()),
            };
            match run_point(&cfg, &q) {
                Ok(r) => reports.push(r),
                Err(e) => return Check::judged("phase_independence", false, e.to_string()),
            }
        }
        let base = &reports[0];
        let worst = reports
            .iter()
            .map(|r| {
                (r.f1 - base.f1)
                    .abs()
                    .max((r.f2 - base.f2).abs())
                    .max((r.p_success - base.p_success).abs())
            })
            .fold(0.0, f64::max);
        Check::judged(
            "phase_independence",
            worst < 1e-9,
            format!("max spread across azimuths {worst:.3e}"),
        )
    }

    /// Mirror symmetry of the adaptive cloner: theta and pi - theta give
    /// the same fidelities and acceptance.
    pub fn mirror_symmetry() -> Check {
        let cfg = mpcc_order2();
        let mut worst: f64 = 0.0;
        for theta in [0.3, 0.8, 1.2] {
            let north = run_point(&cfg, &InputQubit::polar(theta).expect("in range"));
            let south = run_point(&cfg, &InputQubit::polar(std::f64::consts::PI - theta).expect("in range"));
            match (north, south) {
                (Ok(n), Ok(s)) => {
                    worst = worst
                        .max((n.f_avg - s.f_avg).abs())
                        .max((n.p_success - s.p_success).abs());
                }
                (Err(e), _) | (_, Err(e)) => {
                    return Check::judged("mirror_symmetry", false, e.to_string())
                }
            }
        }
        Check::judged(
            "mirror_symmetry",
            worst < 1e-9,
            format!("max |north - south| {worst:.3e}"),
        )
    }

    /// The universal rule yields fidelity 5/6 for every input colatitude.
    pub fn universal_flatness() -> Check {
        let mut cfg = mpcc_order2();
        cfg.cloner = ClonerKind::Universal;
        let mut worst: f64 = 0.0;
        for theta in [0.2, 0.7, 1.1, std::f64::consts::FRAC_PI_2, 2.3, 2.9] {
            match run_point(&cfg, &InputQubit::polar(theta).expect("in range")) {
                Ok(r) => {
                    worst = worst
                        .max((r.f1 - 5.0 / 6.0).abs())
                        .max((r.f2 - 5.0 / 6.0).abs());
                }
                Err(e) => return Check::judged("universal_flatness", false, e.to_string()),
            }
        }
        Check::judged(
            "universal_flatness",
            worst < 1e-12,
            format!("max |F - 5/6| {worst:.3e}"),
        )
    }

    /// No fixed overlap beats the adaptive curve on its own colatitude.
    pub fn optimality(seed: u64) -> Check {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut counterexamples = 0u32;
        let mut worst_gap: f64 = 0.0;
        for k in 0..20 {
            let theta = std::f64::consts::PI * (k as f64 + 1.0) / 21.0;
            let adaptive = analytic::lambda_from_theta(theta);
            let best = analytic::single_copy_fidelity(theta, &adaptive);
            for _ in 0..100 {
                let lambda = std::f64::consts::FRAC_1_SQRT_2
                    + rng.gen::<f64>() * (1.0 - std::f64::consts::FRAC_1_SQRT_2);
                let rival = CloneParameter::new(lambda).expect("in range");
                let f = analytic::single_copy_fidelity(theta, &rival);
                if f > best + 1e-12 {
                    counterexamples += 1;
                    worst_gap = worst_gap.max(f - best);
                }
            }
        }
        Check::judged(
            "optimality",
            counterexamples == 0,
            format!("{counterexamples} counterexamples, worst gap {worst_gap:.3e}"),
        )
    }

    /// Counter and ON/OFF models agree with exact projectors on the
    /// post-selected order-2 pipeline at unit efficiency, zero dark counts.
    pub fn detector_agreement() -> Check {
        let cfg = mpcc_order2();
        let source = match optics::spdc_state(&cfg.spdc, cfg.caps()) {
            Ok(s) => s,
            Err(e) => return Check::judged("detector_agreement", false, e.to_string()),
        };
        let splitter = match optics::pdbs(&cfg.pdbs) {
            Ok(t) => t,
            Err(e) => return Check::judged("detector_agreement", false, e.to_string()),
        };
        let mut worst: f64 = 0.0;
        for theta in [0.7, 1.9] {
            let q = InputQubit::polar(theta).expect("in range");
            let p = analytic::lambda_from_theta(theta);
            let kappa = match optics::kappa_for(&p, &cfg.pdbs) {
                Ok(k) => k,
                Err(e) => return Check::judged("detector_agreement", false, e.to_string()),
            };
            let mut tables = Vec::new();
            for d in [
                DetectorModel::perfect(),
                DetectorModel::single_photon_counter(1.0, 0.0).expect("valid"),
                DetectorModel::on_off(1.0, 0.0).expect("valid"),
            ] {
                let mut local = cfg.clone();
                local.detector = d;
                match run_prepared(&local, &source, &splitter, &q, kappa) {
                    Ok(t) => tables.push(t),
                    Err(e) => return Check::judged("detector_agreement", false, e.to_string()),
                }
            }
            for t in &tables[1..] {
                worst = worst
                    .max((t.c00 - tables[0].c00).abs())
                    .max((t.c01 - tables[0].c01).abs())
                    .max((t.c10 - tables[0].c10).abs())
                    .max((t.c11 - tables[0].c11).abs());
            }
        }
        Check::judged(
            "detector_agreement",
            worst < 1e-10,
            format!("max coincidence deviation {worst:.3e}"),
        )
    }

    /// Pipeline outputs are Hermitian positive operators with trace in (0, 1].
    pub fn output_state_sanity() -> Check {
        let mut worst_herm: f64 = 0.0;
        let mut worst_eig: f64 = 0.0;
        for (mu, order) in [(0.3, 2u8), (mu_opt(), 3), (0.7, 2)] {
            let cfg = PipelineConfig {
                spdc: SpdcConfig::new(0.01, 0.4, order).expect("valid"),
                pdbs: PdbsConfig::new(mu, 1.0 - mu).expect("valid"),
                cloner: ClonerKind::MirrorAdaptive,
                detector: DetectorModel::perfect(),
            };
            for theta in [0.6, 2.1] {
                let q = InputQubit::new(theta, 0.3).expect("in range");
                let p = analytic::lambda_from_theta(theta);
                let kappa = match optics::kappa_for(&p, &cfg.pdbs) {
                    Ok(k) => k,
                    Err(e) => return Check::judged("output_state_sanity", false, e.to_string()),
                };
                let prepared = optics::spdc_state(&cfg.spdc, cfg.caps())
                    .and_then(|s| optics::prepare_input(&s, &q))
                    .and_then(|s| {
                        s.apply_mode_transform(&optics::pdbs(&cfg.pdbs).expect("valid"))
                    });
                let psi = match prepared {
                    Ok(s) => s,
                    Err(e) => return Check::judged("output_state_sanity", false, e.to_string()),
                };
                let ff = FeedforwardConfig::new(kappa).expect("in range");
                let perfect = DetectorModel::perfect();
                match optics::feedforward_output(&psi, &ff, &perfect, &perfect) {
                    Ok(rho) => {
                        worst_herm = worst_herm.max(rho.max_hermiticity_violation());
                        worst_eig = worst_eig.max((-rho.smallest_eigenvalue()).max(0.0));
                        let trace = rho.trace();
                        if !(trace > 0.0 && trace <= 1.0 + 1e-12) {
                            return Check::judged(
                                "output_state_sanity",
                                false,
                                format!("trace out of range: {trace}"),
                            );
                        }
                    }
                    Err(e) => return Check::judged("output_state_sanity", false, e.to_string()),
                }
            }
        }
        Check::judged(
            "output_state_sanity",
            worst_herm < 1e-10 && worst_eig < 1e-10,
            format!("hermiticity {worst_herm:.3e}, most negative eigenvalue {worst_eig:.3e}"),
        )
    }

    fn mu_opt() -> f64 {
        optics::mu_optimal()
    }

    /// Off the mu + nu = 1 line the two clones receive different
    /// fidelities. This check passes when the asymmetry shows up.
    pub fn asymmetric_config_demo() -> Check {
        let mut cfg = mpcc_order2();
        cfg.pdbs = PdbsConfig::new(0.3, 0.5).expect("valid");
        let q = InputQubit::polar(std::f64::consts::FRAC_PI_2).expect("in range");
        match run_point(&cfg, &q) {
            Ok(r) => {
                let gap = (r.f1 - r.f2).abs();
                Check {
                    name: "asymmetric_config_demo",
                    passed: gap > 1e-6,
                    expected_fail: true,
                    detail: format!("F1 {:.6}, F2 {:.6}, gap {gap:.3e}", r.f1, r.f2),
                }
            }
            Err(e) => Check {
                name: "asymmetric_config_demo",
                passed: false,
                expected_fail: true,
                detail: e.to_string(),
            },
        }
    }

    /// A strongly reflective splitter needs more than unit attenuation:
    /// the strict constructor refuses and the sweeping variant clamps.
    pub fn clamp_demo() -> Check {
        let p = CloneParameter::new(0.99).expect("in range");
        let cfg = PdbsConfig::new(0.0045, 0.9955).expect("valid");
        let strict = optics::kappa_for(&p, &cfg);
        let (clamped, flagged) = optics::kappa_clamped(&p, &cfg);
        let infeasible = matches!(strict, Err(Error::InfeasibleConfiguration { .. }));
        Check {
            name: "clamp_demo",
            passed: infeasible && flagged && clamped.abs() <= 1.0,
            expected_fail: true,
            detail: format!("strict: {strict:?}, clamped to {clamped}"),
        }
    }

    /// Deterministic full suite, in reporting order.
    pub fn run_all(seed: u64) -> Vec<Check> {
        vec![
            splitter_unitarity(seed, 200),
            povm_completeness(),
            oracle_agreement(),
            robustness_plateau(),
            hom_null(),
            phase_independence(),
            mirror_symmetry(),
            universal_flatness(),
            optimality(seed),
            detector_agreement(),
            output_state_sanity(),
            asymmetric_config_demo(),
            clamp_demo(),
        ]
    }
}
