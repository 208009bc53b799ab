//! Monte Carlo average run length of the BCC, RCC, BRCC and BRCC_C charts
//! under the six simulation scenarios, with mean or dispersion shifts.
//!
//! Each replication draws an in-control Phase I sample at fixed covariates,
//! fits the chart's model, then scores a shifted sample drawn at the same
//! covariates. An observation signals when its two-sided tail probability
//! under the fitted model, 2·min(F(y), 1 − F(y)), is at most the chart's
//! false-alarm level; this is the same event as y falling on or outside the
//! α/2 and 1 − α/2 quantile limits, without inverting F.
//!
//! Limits at α = 1/ARL₀ computed from estimated parameters do not give an
//! in-control ARL of ARL₀ (estimation error widens the tails, and BRCC_C and
//! RCC are misspecified). By default each chart's level is therefore
//! calibrated: α is set to the 1/ARL₀ quantile of the pooled tail
//! probabilities over an independent set of in-control replications.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent f64 methods when std is linked
use num_traits::Float;
use rand::distr::Open01;
use rand::Rng;

use crate::betadist::{BetaSampler, MuSigma};
use crate::charts::ChartKind;
use crate::error::{Error, Result};
use crate::fit::{fit_betareg_with, fit_ols, Dataset, Design, FitOptions, ModelSpec};
use crate::links::LinkKind;
use crate::specfun::reg_inc_beta;
use crate::stream::{purpose_tag, stream};

/// Parameter values of one simulation scenario with its nominal
/// approximate mean and dispersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPreset {
    pub id: u8,
    pub beta: [f64; 3],
    pub gamma: [f64; 3],
    pub approx_mean: f64,
    pub approx_sigma: f64,
}

pub const PRESETS: [ScenarioPreset; 6] = [
    ScenarioPreset { id: 1, beta: [-1.35, 1.00, 1.00], gamma: [-1.40, 1.00, -1.25], approx_mean: 0.40, approx_sigma: 0.156 },
    ScenarioPreset { id: 2, beta: [-1.35, 1.00, 1.00], gamma: [-1.00, -1.10, -1.00], approx_mean: 0.40, approx_sigma: 0.099 },
    ScenarioPreset { id: 3, beta: [-1.35, 1.00, 1.00], gamma: [-1.15, -1.20, -1.20], approx_mean: 0.40, approx_sigma: 0.070 },
    ScenarioPreset { id: 4, beta: [-0.10, -1.35, -1.40], gamma: [-1.15, -1.20, -1.20], approx_mean: 0.20, approx_sigma: 0.070 },
    ScenarioPreset { id: 5, beta: [1.50, 1.00, -1.00], gamma: [-1.15, -1.20, -1.20], approx_mean: 0.80, approx_sigma: 0.070 },
    ScenarioPreset { id: 6, beta: [-1.00, -1.50, -1.50], gamma: [-1.15, -1.20, -1.20], approx_mean: 0.08, approx_sigma: 0.070 },
];

pub const MIN_SCENARIO_N: usize = 50;
pub const MIN_REPS: u64 = 100;
/// Largest share of replications whose fit may fail before the whole
/// simulation is rejected.
pub const MAX_FAILURE_SHARE: f64 = 0.05;

/// Logit mean and dispersion structures with two uniform covariates each.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub beta: [f64; 3],
    pub gamma: [f64; 3],
    pub n: usize,
    pub master_seed: u64,
}

impl Scenario {
    pub fn new(beta: [f64; 3], gamma: [f64; 3], n: usize, master_seed: u64) -> Result<Self> {
        if n < MIN_SCENARIO_N {
            return Err(Error::Usage(alloc::format!("scenario size must be at least {MIN_SCENARIO_N}, got {n}")));
        }
        if beta.iter().chain(&gamma).any(|v| !v.is_finite()) {
            return Err(Error::Usage("scenario parameters must be finite".into()));
        }
        Ok(Self { beta, gamma, n, master_seed })
    }

    pub fn preset(id: u8, n: usize, master_seed: u64) -> Result<Self> {
        let p = PRESETS
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| Error::Usage(alloc::format!("no scenario {id}; presets are 1 to 6")))?;
        Self::new(p.beta, p.gamma, n, master_seed)
    }
}

const TAG_COVARIATES: u64 = 0x636f_7661_7269_6174;
const TAG_PHASE1: u64 = 0x7068_6173_6531;
const TAG_PHASE2: u64 = 0x7068_6173_6532;
const TAG_CALIBRATION: u64 = 0x6361_6c69_6272;

/// n×3 mean and dispersion designs: an intercept column followed by two
/// columns of U(0, 1) draws. Fixed for the whole experiment given the seed.
pub fn gen_covariates(n: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = stream(seed, purpose_tag(&[TAG_COVARIATES]), 0);
    let mut x = DMatrix::from_element(n, 3, 1.0);
    let mut z = DMatrix::from_element(n, 3, 1.0);
    for t in 0..n {
        x[(t, 1)] = rng.sample(Open01);
        x[(t, 2)] = rng.sample(Open01);
    }
    for t in 0..n {
        z[(t, 1)] = rng.sample(Open01);
        z[(t, 2)] = rng.sample(Open01);
    }
    (x, z)
}

fn linear(m: &DMatrix<f64>, coef: &[f64; 3], shift: f64) -> Vec<f64> {
    (0..m.nrows())
        .map(|t| shift + (0..3).map(|i| m[(t, i)] * coef[i]).sum::<f64>())
        .collect()
}

/// Averages of μₜ and σₜ over the scenario's covariates.
pub fn scenario_characteristics(s: &Scenario) -> (f64, f64) {
    let (x, z) = gen_covariates(s.n, s.master_seed);
    let n = s.n as f64;
    let mu = linear(&x, &s.beta, 0.0).into_iter().map(|e| LinkKind::Logit.inv(e)).sum::<f64>() / n;
    let sigma = linear(&z, &s.gamma, 0.0).into_iter().map(|e| LinkKind::Logit.inv(e)).sum::<f64>() / n;
    (mu, sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ShiftTarget {
    Mean,
    Dispersion,
}

/// δ added to the mean or dispersion linear predictor of the Phase II data.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShiftSpec {
    pub target: ShiftTarget,
    pub delta: f64,
}

pub const MAX_MEAN_SHIFT: f64 = 0.15;

impl ShiftSpec {
    pub fn new(target: ShiftTarget, delta: f64) -> Result<Self> {
        let ok = match target {
            ShiftTarget::Mean => delta.abs() <= MAX_MEAN_SHIFT + 1e-12,
            ShiftTarget::Dispersion => (0.0..=MAX_MEAN_SHIFT + 1e-12).contains(&delta),
        };
        if !ok {
            return Err(Error::Usage(alloc::format!(
                "shift {delta} out of range: mean shifts lie in [-0.15, 0.15], dispersion shifts in [0, 0.15]"
            )));
        }
        Ok(Self { target, delta })
    }

    pub fn none() -> Self {
        Self { target: ShiftTarget::Mean, delta: 0.0 }
    }

    pub fn mean(delta: f64) -> Result<Self> {
        Self::new(ShiftTarget::Mean, delta)
    }

    pub fn dispersion(delta: f64) -> Result<Self> {
        Self::new(ShiftTarget::Dispersion, delta)
    }
}

/// How exceedances become an ARL.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ArlMode {
    /// ARL = 1 / pooled exceedance fraction over reps × n Phase II points.
    Pooled,
    /// Mean of per-replication run lengths, observing Phase II points in
    /// covariate order (cycling) until the first signal or `cap`.
    RunLength { cap: u64 },
}

/// Whether the chart is built from estimates or the true parameters.
/// Known parameters are available for BRCC only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ParameterMode {
    Estimated,
    Known,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArlConfig {
    pub arl0_target: f64,
    pub reps: u64,
    pub calibrate: bool,
    /// Replications used for calibration; defaults to `reps`.
    pub calibration_reps: Option<u64>,
    pub mode: ArlMode,
    pub parameters: ParameterMode,
}

impl Default for ArlConfig {
    fn default() -> Self {
        Self {
            arl0_target: 200.0,
            reps: 2000,
            calibrate: true,
            calibration_reps: None,
            mode: ArlMode::Pooled,
            parameters: ParameterMode::Estimated,
        }
    }
}

impl ArlConfig {
    fn validate(&self) -> Result<()> {
        if !(self.arl0_target > 1.0 && self.arl0_target.is_finite()) {
            return Err(Error::Usage(alloc::format!("ARL0 target must exceed 1, got {}", self.arl0_target)));
        }
        if self.reps < MIN_REPS || self.calibration_reps.is_some_and(|c| c < MIN_REPS) {
            return Err(Error::Usage(alloc::format!("at least {MIN_REPS} replications are required")));
        }
        if let ArlMode::RunLength { cap } = self.mode {
            if cap == 0 {
                return Err(Error::Usage("run-length cap must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArlEstimate {
    pub chart_kind: ChartKind,
    pub target: ShiftTarget,
    pub delta: f64,
    pub arl: f64,
    pub mc_std_error: f64,
    /// Replications that contributed (failed fits excluded).
    pub replications: u64,
    pub failed: u64,
    pub outside_fraction: f64,
    /// False-alarm level the chart was run at (calibrated or 1/ARL₀).
    pub alpha: f64,
    /// No exceedance was observed (pooled), or some run hit the cap; `arl`
    /// is then a lower bound.
    pub capped: bool,
}

/// Executes independent replications. Results come back in index order,
/// so aggregation does not depend on scheduling.
pub trait ReplicationRunner {
    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ReplicationRunner for Sequential {
    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Scenario state shared by every replication.
struct Experiment {
    design: Arc<Design>,
    design_const: Arc<Design>,
    eta: Vec<f64>,
    zeta: Vec<f64>,
    in_control: Vec<BetaSampler>,
    seed: u64,
}

impl Experiment {
    fn new(s: &Scenario) -> Result<Self> {
        let (x, z) = gen_covariates(s.n, s.master_seed);
        let design = Arc::new(Design::new(x.clone(), z.clone())?);
        let design_const = Arc::new(design.constant_dispersion()?);
        let eta = linear(&x, &s.beta, 0.0);
        let zeta = linear(&z, &s.gamma, 0.0);
        let in_control = samplers(&eta, &zeta, 0.0, 0.0)?;
        Ok(Self { design, design_const, eta, zeta, in_control, seed: s.master_seed })
    }

    fn n(&self) -> usize {
        self.eta.len()
    }

    fn shifted(&self, shift: &ShiftSpec) -> Result<Vec<BetaSampler>> {
        match shift.target {
            ShiftTarget::Mean => samplers(&self.eta, &self.zeta, shift.delta, 0.0),
            ShiftTarget::Dispersion => samplers(&self.eta, &self.zeta, 0.0, shift.delta),
        }
    }

    fn true_model(&self) -> Result<TailModel> {
        let shapes = self
            .eta
            .iter()
            .zip(&self.zeta)
            .map(|(&e, &z)| shape(LinkKind::Logit.inv(e), LinkKind::Logit.inv(z)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TailModel::Beta(shapes))
    }

    /// Fits the chart's model to a Phase I sample.
    fn fit(&self, kind: ChartKind, y: &[f64], params: ParameterMode) -> Result<TailModel> {
        if params == ParameterMode::Known {
            return self.true_model();
        }
        let opts = FitOptions { compute_vcov: false, ..FitOptions::default() };
        match kind {
            ChartKind::Rcc => {
                let data = Dataset::with_design(y.to_vec(), self.design.clone())?;
                let ols = fit_ols(&data)?;
                if ols.degenerate {
                    return Err(Error::DegenerateChart("zero residual variance".into()));
                }
                Ok(TailModel::Normal { fitted: ols.fitted, sd: ols.resid_sd })
            }
            ChartKind::Bcc => {
                let ones = DMatrix::from_element(y.len(), 1, 1.0);
                let data = Dataset::new(y.to_vec(), ones.clone(), ones)?;
                let fit = fit_betareg_with(&ModelSpec::intercept_only(), &data, &opts)?;
                let s = shape(fit.mu_hat[0], fit.sigma_hat[0])?;
                Ok(TailModel::Beta(vec![s; y.len()]))
            }
            ChartKind::Brcc | ChartKind::BrccC => {
                let (design, spec) = if kind == ChartKind::Brcc {
                    (self.design.clone(), scenario_spec(3))
                } else {
                    (self.design_const.clone(), scenario_spec(1))
                };
                let data = Dataset::with_design(y.to_vec(), design)?;
                let fit = fit_betareg_with(&spec, &data, &opts)?;
                let shapes = fit
                    .mu_hat
                    .iter()
                    .zip(&fit.sigma_hat)
                    .map(|(&m, &s)| shape(m, s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TailModel::Beta(shapes))
            }
        }
    }
}

fn scenario_spec(s: usize) -> ModelSpec {
    use alloc::string::ToString;
    let mean = ["(Intercept)", "x1", "x2"].iter().map(|c| c.to_string()).collect();
    let disp = ["(Intercept)", "z1", "z2"][..s].iter().map(|c| c.to_string()).collect();
    ModelSpec::new(mean, disp)
}

fn shape(mu: f64, sigma: f64) -> Result<(f64, f64)> {
    let p = MuSigma::new(mu, sigma)?;
    let phi = p.precision();
    Ok((mu * phi, (1.0 - mu) * phi))
}

fn samplers(eta: &[f64], zeta: &[f64], d_mean: f64, d_disp: f64) -> Result<Vec<BetaSampler>> {
    eta.iter()
        .zip(zeta)
        .map(|(&e, &z)| {
            let p = MuSigma::new(LinkKind::Logit.inv(e + d_mean), LinkKind::Logit.inv(z + d_disp))?;
            Ok(BetaSampler::new(p))
        })
        .collect()
}

/// Fitted law per observation, used to turn a response into a two-sided
/// tail probability.
enum TailModel {
    Beta(Vec<(f64, f64)>),
    Normal { fitted: Vec<f64>, sd: f64 },
}

impl TailModel {
    fn tail(&self, t: usize, y: f64) -> f64 {
        match self {
            TailModel::Beta(shapes) => {
                let (a, b) = shapes[t];
                // a, b > 0 and y in (0, 1) by construction
                let u = reg_inc_beta(y, a, b).unwrap_or(0.5);
                2.0 * u.min(1.0 - u)
            }
            TailModel::Normal { fitted, sd } => {
                let z = (y - fitted[t]).abs() / sd;
                libm::erfc(z / core::f64::consts::SQRT_2)
            }
        }
    }
}

fn draw(samplers: &[BetaSampler], rng: &mut impl Rng) -> Vec<f64> {
    samplers.iter().map(|s| s.draw(rng)).collect()
}

fn failure_check(failed: u64, attempted: u64) -> Result<()> {
    if (failed as f64) > MAX_FAILURE_SHARE * attempted as f64 {
        return Err(Error::Simulation { failed, attempted });
    }
    Ok(())
}

/// Calibrated false-alarm level of `kind`: the 1/ARL₀ quantile of pooled
/// in-control tail probabilities, each replication fitting a fresh Phase I
/// sample and scoring a fresh in-control sample.
pub fn calibrate_alpha<R: ReplicationRunner>(s: &Scenario, kind: ChartKind, cfg: &ArlConfig, runner: &R) -> Result<f64> {
    cfg.validate()?;
    let exp = Experiment::new(s)?;
    calibrate_with(&exp, kind, cfg, runner)
}

fn calibrate_with<R: ReplicationRunner>(exp: &Experiment, kind: ChartKind, cfg: &ArlConfig, runner: &R) -> Result<f64> {
    check_parameters(kind, cfg.parameters)?;
    let reps = cfg.calibration_reps.unwrap_or(cfg.reps);
    let tag1 = purpose_tag(&[TAG_CALIBRATION, TAG_PHASE1]);
    let tag2 = purpose_tag(&[TAG_CALIBRATION, TAG_PHASE2]);
    let results = runner.map(reps, |r| {
        let y0 = draw(&exp.in_control, &mut stream(exp.seed, tag1, r));
        let model = exp.fit(kind, &y0, cfg.parameters).ok()?;
        let y1 = draw(&exp.in_control, &mut stream(exp.seed, tag2, r));
        Some(y1.iter().enumerate().map(|(t, &y)| model.tail(t, y)).collect::<Vec<f64>>())
    });
    let failed = results.iter().filter(|r| r.is_none()).count() as u64;
    failure_check(failed, reps)?;
    let mut pooled: Vec<f64> = results.into_iter().flatten().flatten().collect();
    let k = ((pooled.len() as f64 / cfg.arl0_target).ceil() as usize).clamp(1, pooled.len());
    let (_, kth, _) = pooled.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    Ok(*kth)
}

fn check_parameters(kind: ChartKind, params: ParameterMode) -> Result<()> {
    if params == ParameterMode::Known && kind != ChartKind::Brcc {
        return Err(Error::Usage(alloc::format!(
            "known-parameter runs are defined for BRCC only, not {kind}"
        )));
    }
    Ok(())
}

/// ARL of one chart under one shift.
pub fn simulate_arl<R: ReplicationRunner>(
    s: &Scenario,
    kind: ChartKind,
    shift: ShiftSpec,
    cfg: &ArlConfig,
    runner: &R,
) -> Result<ArlEstimate> {
    let mut out = arl_curve(s, &[kind], shift.target, &[shift.delta], cfg, runner)?;
    Ok(out.remove(0))
}

/// One estimate per (chart, δ), charts in the order given. Each chart is
/// fitted once per replication and scored against every δ; Phase II samples
/// for replication r come from the same stream for every chart and δ, so
/// an entry equals the corresponding [`simulate_arl`] result.
pub fn arl_curve<R: ReplicationRunner>(
    s: &Scenario,
    charts: &[ChartKind],
    target: ShiftTarget,
    grid: &[f64],
    cfg: &ArlConfig,
    runner: &R,
) -> Result<Vec<ArlEstimate>> {
    cfg.validate()?;
    let shifts = grid.iter().map(|&d| ShiftSpec::new(target, d)).collect::<Result<Vec<_>>>()?;
    let exp = Experiment::new(s)?;
    let shifted = shifts.iter().map(|sh| exp.shifted(sh)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(charts.len() * grid.len());
    for &kind in charts {
        check_parameters(kind, cfg.parameters)?;
        let alpha = if cfg.calibrate {
            calibrate_with(&exp, kind, cfg, runner)?
        } else {
            1.0 / cfg.arl0_target
        };
        let per_rep = runner.map(cfg.reps, |r| replicate(&exp, kind, cfg, &shifted, alpha, r));
        let failed = per_rep.iter().filter(|r| r.is_none()).count() as u64;
        failure_check(failed, cfg.reps)?;
        let ok: Vec<Vec<RepOutcome>> = per_rep.into_iter().flatten().collect();
        for (j, sh) in shifts.iter().enumerate() {
            let outcomes = ok.iter().map(|v| v[j]);
            let mut est = match cfg.mode {
                ArlMode::Pooled => pooled_estimate(outcomes),
                ArlMode::RunLength { cap } => run_length_estimate(outcomes, cap),
            };
            est.chart_kind = kind;
            est.target = sh.target;
            est.delta = sh.delta;
            est.replications = ok.len() as u64;
            est.failed = failed;
            est.alpha = alpha;
            out.push(est);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
enum RepOutcome {
    Count { exceed: u64, total: u64 },
    Run { length: u64, capped: bool },
}

fn replicate(
    exp: &Experiment,
    kind: ChartKind,
    cfg: &ArlConfig,
    shifted: &[Vec<BetaSampler>],
    alpha: f64,
    r: u64,
) -> Option<Vec<RepOutcome>> {
    let y0 = draw(&exp.in_control, &mut stream(exp.seed, purpose_tag(&[TAG_PHASE1]), r));
    let model = exp.fit(kind, &y0, cfg.parameters).ok()?;
    let tag2 = purpose_tag(&[TAG_PHASE2]);
    let n = exp.n();
    let out = shifted
        .iter()
        .map(|samp| {
            let mut rng = stream(exp.seed, tag2, r);
            match cfg.mode {
                ArlMode::Pooled => {
                    let exceed = (0..n).filter(|&t| model.tail(t, samp[t].draw(&mut rng)) <= alpha).count() as u64;
                    RepOutcome::Count { exceed, total: n as u64 }
                }
                ArlMode::RunLength { cap } => {
                    for i in 0..cap {
                        let t = (i % n as u64) as usize;
                        if model.tail(t, samp[t].draw(&mut rng)) <= alpha {
                            return RepOutcome::Run { length: i + 1, capped: false };
                        }
                    }
                    RepOutcome::Run { length: cap, capped: true }
                }
            }
        })
        .collect();
    Some(out)
}

fn blank() -> ArlEstimate {
    ArlEstimate {
        chart_kind: ChartKind::Brcc,
        target: ShiftTarget::Mean,
        delta: 0.0,
        arl: 0.0,
        mc_std_error: 0.0,
        replications: 0,
        failed: 0,
        outside_fraction: 0.0,
        alpha: 0.0,
        capped: false,
    }
}

/// ARL = 1/p̂ with se(ARL) = se(p̂)/p̂² and se(p̂) = √(p̂(1 − p̂)/N).
fn pooled_estimate(outcomes: impl Iterator<Item = RepOutcome>) -> ArlEstimate {
    let (mut exceed, mut total) = (0u64, 0u64);
    for o in outcomes {
        if let RepOutcome::Count { exceed: e, total: t } = o {
            exceed += e;
            total += t;
        }
    }
    let mut est = blank();
    let total_f = total as f64;
    if exceed == 0 {
        est.arl = total_f.max(1.0);
        est.mc_std_error = est.arl;
        est.outside_fraction = 0.0;
        est.capped = true;
        return est;
    }
    let p = exceed as f64 / total_f;
    est.outside_fraction = p;
    est.arl = 1.0 / p;
    est.mc_std_error = (p * (1.0 - p) / total_f).sqrt() / (p * p);
    est
}

fn run_length_estimate(outcomes: impl Iterator<Item = RepOutcome>, cap: u64) -> ArlEstimate {
    let mut lengths = Vec::new();
    let mut capped = false;
    for o in outcomes {
        if let RepOutcome::Run { length, capped: c } = o {
            lengths.push(length as f64);
            capped |= c;
        }
    }
    let mut est = blank();
    let m = lengths.len() as f64;
    if lengths.is_empty() {
        est.arl = cap as f64;
        est.mc_std_error = est.arl;
        est.capped = true;
        return est;
    }
    let mean = lengths.iter().sum::<f64>() / m;
    let var = lengths.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (m - 1.0).max(1.0);
    est.arl = mean;
    est.mc_std_error = (var / m).sqrt().max(f64::MIN_POSITIVE);
    est.outside_fraction = 1.0 / mean;
    est.capped = capped;
    est
}
