//! The two-step NoCurl learner, its ablation variants, and the
//! augmented-Lagrangian baseline it is compared against.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dag::{closed_form_w, gamma_parts, incremental_threshold, is_dag, threshold, topo_potential, SkewParams};
use crate::error::{arg_err, Error, Result};
use crate::flow::{EdgeFlow, Potential};
use crate::lbfgs::{minimize, OptimOptions, OptimReport};
use crate::matrix::DenseMatrix;
use crate::objective::{
    augmented_lagrangian_objective, h_value, joint_objective, step1_objective, w_objective, Dataset, HKind,
};
use crate::rng::Rng;

/// Step size of the incremental threshold used by the `_s` variants.
pub const INCREMENTAL_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Nocurl1,
    Nocurl2,
    Nocurl1S,
    Nocurl2S,
    Nocurl1Minus,
    Nocurl2Minus,
    Nocurl1Plus,
    Nocurl2Plus,
    RandInit,
    RandP,
}

impl Variant {
    pub const ALL: [Variant; 10] = [
        Variant::Nocurl1,
        Variant::Nocurl2,
        Variant::Nocurl1S,
        Variant::Nocurl2S,
        Variant::Nocurl1Minus,
        Variant::Nocurl2Minus,
        Variant::Nocurl1Plus,
        Variant::Nocurl2Plus,
        Variant::RandInit,
        Variant::RandP,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Nocurl1 => "nocurl1",
            Variant::Nocurl2 => "nocurl2",
            Variant::Nocurl1S => "nocurl1_s",
            Variant::Nocurl2S => "nocurl2_s",
            Variant::Nocurl1Minus => "nocurl1_minus",
            Variant::Nocurl2Minus => "nocurl2_minus",
            Variant::Nocurl1Plus => "nocurl1_plus",
            Variant::Nocurl2Plus => "nocurl2_plus",
            Variant::RandInit => "rand_init",
            Variant::RandP => "rand_p",
        }
    }

    /// Penalty schedule used when none is given.
    pub fn default_lambdas(self) -> Vec<f64> {
        match self {
            Variant::Nocurl2 | Variant::Nocurl2S | Variant::Nocurl2Minus | Variant::Nocurl2Plus => vec![10.0, 1000.0],
            _ => vec![100.0],
        }
    }

    fn uses_step1(self) -> bool {
        !matches!(self, Variant::RandInit | Variant::RandP)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoCurlConfig {
    pub variant: Variant,
    pub lambdas: Vec<f64>,
    pub threshold_eps: f64,
    pub h_kind: HKind,
    pub optim: OptimOptions,
    pub seed: u64,
}

impl NoCurlConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            lambdas: variant.default_lambdas(),
            threshold_eps: 0.3,
            h_kind: HKind::Poly,
            optim: OptimOptions::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optim.validate()?;
        if !(self.threshold_eps >= 0.0) || !self.threshold_eps.is_finite() {
            return arg_err(format!("threshold must be a finite non-negative number, got {}", self.threshold_eps));
        }
        if !self.variant.uses_step1() {
            return Ok(());
        }
        validate_lambdas(&self.lambdas)
    }
}

fn validate_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return arg_err("at least one penalty coefficient is required");
    }
    if lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return arg_err(format!("penalty coefficients must be positive, got {lambdas:?}"));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return arg_err(format!("penalty coefficients must be strictly increasing, got {lambdas:?}"));
    }
    Ok(())
}

/// One accepted subproblem of the augmented-Lagrangian baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotearsStep {
    pub rho: f64,
    pub alpha: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    /// Method tag: a variant tag or `notears`.
    pub method: String,
    pub lambdas: Vec<f64>,
    /// Final thresholded DAG.
    pub a_hat: DenseMatrix,
    /// Thresholded Step-1 solution, when the method has a Step 1.
    pub a_pre: Option<DenseMatrix>,
    pub p_tilde: Option<Potential>,
    pub w_tilde: Option<EdgeFlow>,
    /// `h` of `a_hat` under the configured acyclicity measure.
    pub final_h: f64,
    pub wall_time: f64,
    pub optim_reports: Vec<OptimReport>,
    pub final_threshold: f64,
    /// The incremental threshold ran out of edges.
    pub exhausted: bool,
    pub notears_trace: Vec<NotearsStep>,
}

fn run_step1(data: &Dataset, lambdas: &[f64], h_kind: HKind, optim: &OptimOptions) -> Result<(DenseMatrix, Vec<OptimReport>)> {
    validate_lambdas(lambdas)?;
    let d = data.d();
    let mut x = vec![0.0; d * d];
    let mut reports = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let report = minimize(|a| step1_objective(a, data, lambda, h_kind), &x, optim)?;
        x.clone_from(&report.x_final);
        reports.push(report);
    }
    Ok((DenseMatrix::from_vec(d, d, x)?, reports))
}

/// Solves the penalized problem once per `lambda`, each solve warm-started
/// from the previous one and the first from zero, then thresholds at `eps`.
/// The result may still contain cycles.
pub fn step1(data: &Dataset, lambdas: &[f64], h_kind: HKind, eps: f64, optim: &OptimOptions) -> Result<DenseMatrix> {
    Ok(threshold(&run_step1(data, lambdas, h_kind, optim)?.0, eps))
}

fn fit_w(w0: &EdgeFlow, p: &Potential, data: &Dataset, optim: &OptimOptions) -> Result<(EdgeFlow, OptimReport)> {
    let d = data.d();
    let x0 = SkewParams::pack(w0).into_vec();
    let report = minimize(|u| w_objective(&SkewParams::from_vec(d, u.to_vec())?, p, data), &x0, optim)?;
    let w = SkewParams::from_vec(d, report.x_final.clone())?.unpack();
    Ok((w, report))
}

fn fit_joint(
    w0: &EdgeFlow,
    p0: &Potential,
    data: &Dataset,
    optim: &OptimOptions,
) -> Result<(EdgeFlow, Potential, OptimReport)> {
    let d = data.d();
    let m = SkewParams::len_for(d);
    let mut x0 = SkewParams::pack(w0).into_vec();
    x0.extend_from_slice(p0.values());
    let split = |u: &[f64]| -> Result<(SkewParams, Potential)> {
        Ok((SkewParams::from_vec(d, u[..m].to_vec())?, Potential::new(u[m..].to_vec())?))
    };
    let report = minimize(
        |u| {
            let (w, p) = split(u)?;
            joint_objective(&w, &p, data)
        },
        &x0,
        optim,
    )?;
    let (w, p) = split(&report.x_final)?;
    Ok((w.unpack(), p, report))
}

/// Projects `a_pre` onto the DAG space: `p` from its connectivity, then `W`
/// fitted to the data with `p` fixed, starting from the closed-form lift of
/// `a_pre`. Returns `(p, W, gamma(W, p))` before the final threshold.
pub fn step2(a_pre: &DenseMatrix, data: &Dataset, optim: &OptimOptions) -> Result<(Potential, EdgeFlow, DenseMatrix)> {
    let (p, w, a, _) = step2_report(a_pre, data, optim)?;
    Ok((p, w, a))
}

fn step2_report(
    a_pre: &DenseMatrix,
    data: &Dataset,
    optim: &OptimOptions,
) -> Result<(Potential, EdgeFlow, DenseMatrix, OptimReport)> {
    if !a_pre.is_square() || a_pre.rows() != data.d() {
        return Err(Error::Dimension(format!(
            "A_pre is {}x{} but the data has {} variables",
            a_pre.rows(),
            a_pre.cols(),
            data.d()
        )));
    }
    let p = topo_potential(a_pre)?;
    let w0 = closed_form_w(a_pre, &p)?;
    let (w, report) = fit_w(&w0, &p, data, optim)?;
    let a = gamma_parts(&w, &p);
    Ok((p, w, a, report))
}

fn uniform_params(d: usize, rng: &mut Rng) -> Result<(EdgeFlow, Potential)> {
    let w = EdgeFlow::from_upper_fn(d, |_, _| rng.unit());
    let p = Potential::new((0..d).map(|_| rng.unit()).collect())?;
    Ok((w, p))
}

/// Runs one NoCurl variant end to end. The returned graph is always a DAG.
pub fn nocurl_run(data: &Dataset, config: &NoCurlConfig) -> Result<LearnResult> {
    config.validate()?;
    let start = Instant::now();
    let d = data.d();
    let eps = config.threshold_eps;
    let opt = &config.optim;
    let v = config.variant;
    let mut rng = Rng::new(config.seed);

    let mut reports = Vec::new();
    let mut a_pre = None;
    let mut p_tilde = None;
    let mut w_tilde = None;
    let mut final_threshold = eps;
    let mut exhausted = false;

    let a_hat = match v {
        Variant::RandInit | Variant::RandP => {
            let (w0, p0) = uniform_params(d, &mut rng)?;
            let w0 = if v == Variant::RandP {
                let (w, r) = fit_w(&w0, &p0, data, opt)?;
                reports.push(r);
                w
            } else {
                w0
            };
            let (w, p, r) = fit_joint(&w0, &p0, data, opt)?;
            reports.push(r);
            let a = threshold(&gamma_parts(&w, &p), eps);
            p_tilde = Some(p);
            w_tilde = Some(w);
            a
        }
        _ => {
            let (raw, r1) = run_step1(data, &config.lambdas, config.h_kind, opt)?;
            reports.extend(r1);
            let pre = threshold(&raw, eps);
            a_pre = Some(pre.clone());
            match v {
                Variant::Nocurl1S | Variant::Nocurl2S => {
                    let it = incremental_threshold(&raw, eps, INCREMENTAL_STEP)?;
                    final_threshold = it.eps;
                    exhausted = it.exhausted;
                    it.matrix
                }
                Variant::Nocurl1Minus | Variant::Nocurl2Minus => {
                    let p = topo_potential(&pre)?;
                    let w = closed_form_w(&pre, &p)?;
                    let a = threshold(&gamma_parts(&w, &p), eps);
                    p_tilde = Some(p);
                    w_tilde = Some(w);
                    a
                }
                _ => {
                    let (mut p, mut w, mut a, r2) = step2_report(&pre, data, opt)?;
                    reports.push(r2);
                    if matches!(v, Variant::Nocurl1Plus | Variant::Nocurl2Plus) {
                        let (w3, p3, r3) = fit_joint(&w, &p, data, opt)?;
                        reports.push(r3);
                        a = gamma_parts(&w3, &p3);
                        p = p3;
                        w = w3;
                    }
                    p_tilde = Some(p);
                    w_tilde = Some(w);
                    threshold(&a, eps)
                }
            }
        }
    };

    if !is_dag(&a_hat) {
        return Err(Error::Invariant(format!("{v} produced a cyclic graph")));
    }
    let final_h = h_value(&a_hat, config.h_kind)?;
    Ok(LearnResult {
        method: v.tag().to_string(),
        lambdas: if v.uses_step1() { config.lambdas.clone() } else { Vec::new() },
        a_hat,
        a_pre,
        p_tilde,
        w_tilde,
        final_h,
        wall_time: start.elapsed().as_secs_f64(),
        optim_reports: reports,
        final_threshold,
        exhausted,
        notears_trace: Vec::new(),
    })
}

/// Schedule constants of the augmented-Lagrangian baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotearsConfig {
    pub rho_init: f64,
    pub rho_factor: f64,
    /// Required shrink factor of `h` between accepted subproblems.
    pub progress: f64,
    pub rho_max: f64,
    pub h_tol: f64,
}

impl Default for NotearsConfig {
    fn default() -> Self {
        Self { rho_init: 1.0, rho_factor: 10.0, progress: 0.25, rho_max: 1e16, h_tol: 1e-8 }
    }
}

/// NOTEARS-style learner: minimizes `F + (rho/2) h^2 + alpha h` repeatedly,
/// raising `rho` until `h` shrinks by the progress factor, then updating the
/// multiplier. Thresholds at `eps`; if that leaves a cycle, the threshold is
/// raised in steps until the graph is acyclic.
pub fn notears_baseline(data: &Dataset, h_kind: HKind, eps: f64, optim: &OptimOptions) -> Result<LearnResult> {
    notears_with(data, h_kind, eps, optim, &NotearsConfig::default())
}

pub fn notears_with(
    data: &Dataset,
    h_kind: HKind,
    eps: f64,
    optim: &OptimOptions,
    cfg: &NotearsConfig,
) -> Result<LearnResult> {
    optim.validate()?;
    if !(eps >= 0.0) {
        return arg_err(format!("threshold must be non-negative, got {eps}"));
    }
    let start = Instant::now();
    let d = data.d();
    let mut x = vec![0.0; d * d];
    let (mut rho, mut alpha, mut h) = (cfg.rho_init, 0.0, f64::INFINITY);
    let mut reports = Vec::new();
    let mut trace = Vec::new();

    while h > cfg.h_tol && rho <= cfg.rho_max {
        let mut accepted = None;
        while rho <= cfg.rho_max {
            let report = minimize(|a| augmented_lagrangian_objective(a, data, rho, alpha, h_kind), &x, optim)?;
            let h_new = h_value(&DenseMatrix::from_vec(d, d, report.x_final.clone())?, h_kind)?;
            let next = report.x_final.clone();
            reports.push(report);
            if h_new > cfg.progress * h {
                rho *= cfg.rho_factor;
            } else {
                accepted = Some((next, h_new));
                break;
            }
        }
        let Some((next, h_new)) = accepted else { break };
        x = next;
        h = h_new;
        alpha += rho * h;
        trace.push(NotearsStep { rho, alpha, h });
    }

    let raw = DenseMatrix::from_vec(d, d, x)?;
    let mut a_hat = threshold(&raw, eps);
    let mut final_threshold = eps;
    let mut exhausted = false;
    if !is_dag(&a_hat) {
        let it = incremental_threshold(&raw, eps, INCREMENTAL_STEP)?;
        a_hat = it.matrix;
        final_threshold = it.eps;
        exhausted = it.exhausted;
    }
    if !is_dag(&a_hat) {
        return Err(Error::Invariant("baseline produced a cyclic graph".into()));
    }
    let final_h = h_value(&a_hat, h_kind)?;
    Ok(LearnResult {
        method: "notears".into(),
        lambdas: Vec::new(),
        a_hat,
        a_pre: None,
        p_tilde: None,
        w_tilde: None,
        final_h,
        wall_time: start.elapsed().as_secs_f64(),
        optim_reports: reports,
        final_threshold,
        exhausted,
        notears_trace: trace,
    })
}

/// A learner selectable from the command line or a bench config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    NoCurl(Variant),
    Notears,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::NoCurl(v) => v.tag(),
            Method::Notears => "notears",
        }
    }

    /// Runs the method with default hyperparameters and the given seed.
    pub fn run(self, data: &Dataset, h_kind: HKind, eps: f64, optim: &OptimOptions, seed: u64) -> Result<LearnResult> {
        match self {
            Method::NoCurl(v) => {
                let cfg = NoCurlConfig { h_kind, threshold_eps: eps, optim: *optim, seed, ..NoCurlConfig::new(v) };
                nocurl_run(data, &cfg)
            }
            Method::Notears => notears_baseline(data, h_kind, eps, optim),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "notears" {
            Ok(Method::Notears)
        } else {
            s.parse().map(Method::NoCurl)
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
