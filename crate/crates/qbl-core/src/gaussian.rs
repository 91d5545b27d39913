//! Gaussian constants by log-determinant ratio maximization.
//!
//! For a datum with inverse exponents w_j and arrow multiplicities alpha_j,
//! the Gaussian constant is
//!
//! `C^{1/2} * sup [ prod_j det(A_j)^{alpha_j w_j} / prod_i det(M_i) ]^{1/2}`
//!
//! over positive definite A_j, where `M_i = sum over arrows i -> j of
//! alpha_j w_j B_a^T A_j B_a` and `C = prod_j alpha_j^{alpha_j w_j e_j}`.
//! The optimizer maximizes the log of the bracket by gradient ascent on a
//! Cholesky chart or by a fixed-point iteration on the stationarity
//! condition, with restarts; an objective exceeding `log_cap` or an iterate
//! with condition number beyond `cond_cap` while the objective rises is
//! reported as diverging (the supremum is infinite up to numerics).

use nalgebra::DMatrix;
use num::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::datum::QuiverDatum;
use crate::error::{Error, Result};
use crate::numerics::exact::{rat_to_f64, Rat};
use crate::numerics::spd::{cond_symmetric, logdet_spd, spd_inverse, SpdMatrix};

/// One SPD matrix per target. Targets with w_j = 0 are frozen at identity:
/// they contribute neither a determinant term nor a source-form term.
#[derive(Debug, Clone)]
pub struct GaussianPoint {
    mats: Vec<SpdMatrix>,
}

impl GaussianPoint {
    pub fn identity(datum: &QuiverDatum) -> Self {
        GaussianPoint {
            mats: (0..datum.num_targets())
                .map(|j| SpdMatrix::identity(datum.target_dim(j)))
                .collect(),
        }
    }

    pub fn new(datum: &QuiverDatum, mats: Vec<SpdMatrix>) -> Result<Self> {
        if mats.len() != datum.num_targets() {
            return Err(Error::DimensionMismatch {
                what: "GaussianPoint".to_string(),
                expected: datum.num_targets(),
                got: mats.len(),
            });
        }
        for (j, m) in mats.iter().enumerate() {
            if m.dim() != datum.target_dim(j) {
                return Err(Error::DimensionMismatch {
                    what: format!("GaussianPoint target {}", j + 1),
                    expected: datum.target_dim(j),
                    got: m.dim(),
                });
            }
        }
        Ok(GaussianPoint { mats })
    }

    pub fn mats(&self) -> &[SpdMatrix] {
        &self.mats
    }

    pub fn mat(&self, j: usize) -> &SpdMatrix {
        &self.mats[j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptStatus {
    Converged,
    Diverging,
    MaxedOut,
}

impl OptStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OptStatus::Converged => "converged",
            OptStatus::Diverging => "diverging",
            OptStatus::MaxedOut => "max-iters",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GradientAscent,
    FixedPoint,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    pub tol_grad: f64,
    /// Relative objective-change tolerance.
    pub tol_obj: f64,
    pub max_iters: usize,
    /// Total optimization runs, including the identity start.
    pub restarts: usize,
    pub seed: u64,
    /// Objective value beyond which a rising trace is declared diverging.
    pub log_cap: f64,
    pub cond_cap: f64,
    pub method: Method,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            tol_grad: 1e-9,
            tol_obj: 1e-12,
            max_iters: 10_000,
            restarts: 8,
            seed: 0,
            log_cap: 60.0,
            cond_cap: 1e12,
            method: Method::FixedPoint,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstantEstimate {
    /// C^{1/2} * exp(best log objective); +infinity when diverging.
    pub value: f64,
    pub status: OptStatus,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    /// Objective trace of the reported restart.
    pub log_objective_trace: Vec<f64>,
    /// Whether the exact scaling identity holds for the datum.
    pub scaling_ok: bool,
    /// Final point of the reported restart, when not diverging.
    pub argmax: Option<GaussianPoint>,
}

struct CompiledArrow {
    source: usize,
    target: usize,
    mat: DMatrix<f64>,
}

/// Float view of a datum, built once so the optimization loops never touch
/// exact arithmetic.
struct Compiled {
    source_dims: Vec<usize>,
    target_dims: Vec<usize>,
    /// alpha_j * w_j per target.
    lambda: Vec<f64>,
    active: Vec<bool>,
    arrows: Vec<CompiledArrow>,
    by_source: Vec<Vec<usize>>,
    by_target: Vec<Vec<usize>>,
}

impl Compiled {
    fn new(datum: &QuiverDatum) -> Self {
        let lambda: Vec<f64> = datum
            .alphas()
            .iter()
            .zip(datum.inv_exponents())
            .map(|(&alpha, w)| alpha as f64 * rat_to_f64(w))
            .collect();
        let active = datum.inv_exponents().iter().map(|w| !w.is_zero()).collect();
        let arrows: Vec<CompiledArrow> = datum
            .arrows()
            .iter()
            .map(|a| CompiledArrow {
                source: a.source,
                target: a.target,
                mat: a.matrix.to_f64(),
            })
            .collect();
        let mut by_source = vec![Vec::new(); datum.num_sources()];
        let mut by_target = vec![Vec::new(); datum.num_targets()];
        for (k, a) in arrows.iter().enumerate() {
            by_source[a.source].push(k);
            by_target[a.target].push(k);
        }
        Compiled {
            source_dims: datum.source_dims().to_vec(),
            target_dims: datum.target_dims().to_vec(),
            lambda,
            active,
            arrows,
            by_source,
            by_target,
        }
    }

    /// M_i = sum over arrows i -> j with w_j > 0 of alpha_j w_j B^T A_j B.
    fn source_form(&self, point: &GaussianPoint, i: usize) -> DMatrix<f64> {
        let d = self.source_dims[i];
        let mut m = DMatrix::<f64>::zeros(d, d);
        for &k in &self.by_source[i] {
            let a = &self.arrows[k];
            let l = self.lambda[a.target];
            if l == 0.0 {
                continue;
            }
            m += (a.mat.transpose() * point.mat(a.target).as_matrix() * &a.mat) * l;
        }
        m
    }

    fn log_objective(&self, point: &GaussianPoint) -> Result<f64> {
        let mut acc = 0.0;
        for (j, &l) in self.lambda.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            acc += l * point.mat(j).logdet()?;
        }
        for i in 0..self.source_dims.len() {
            let m = self.source_form(point, i);
            acc -= logdet_spd(&m).map_err(|_| Error::not_pd(format!("source form {}", i + 1)))?;
        }
        Ok(0.5 * acc)
    }

    fn inverse_forms(&self, point: &GaussianPoint) -> Result<Vec<DMatrix<f64>>> {
        (0..self.source_dims.len())
            .map(|i| {
                spd_inverse(&self.source_form(point, i))
                    .map_err(|_| Error::not_pd(format!("source form {}", i + 1)))
            })
            .collect()
    }

    fn gradient(&self, point: &GaussianPoint) -> Result<Vec<DMatrix<f64>>> {
        let inv_forms = self.inverse_forms(point)?;
        let mut grads: Vec<DMatrix<f64>> = self
            .target_dims
            .iter()
            .map(|&e| DMatrix::zeros(e, e))
            .collect();
        for (j, &l) in self.lambda.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let mut g = spd_inverse(point.mat(j).as_matrix())?;
            for &k in &self.by_target[j] {
                let a = &self.arrows[k];
                g -= &a.mat * &inv_forms[a.source] * a.mat.transpose();
            }
            grads[j] = g * (0.5 * l);
        }
        Ok(grads)
    }

    fn fixed_point(&self, point: &GaussianPoint) -> Result<GaussianPoint> {
        let inv_forms = self.inverse_forms(point)?;
        let mut mats = Vec::with_capacity(self.target_dims.len());
        for (j, &e) in self.target_dims.iter().enumerate() {
            if !self.active[j] {
                mats.push(point.mat(j).clone());
                continue;
            }
            let mut acc = DMatrix::<f64>::zeros(e, e);
            for &k in &self.by_target[j] {
                let a = &self.arrows[k];
                acc += &a.mat * &inv_forms[a.source] * a.mat.transpose();
            }
            let inv = spd_inverse(&acc)
                .map_err(|_| Error::not_pd(format!("fixed-point target {}", j + 1)))?;
            mats.push(SpdMatrix::new(inv)?);
        }
        Ok(GaussianPoint { mats })
    }

    fn max_condition(&self, point: &GaussianPoint) -> f64 {
        let mut worst: f64 = 1.0;
        for (j, &is_active) in self.active.iter().enumerate() {
            if is_active {
                worst = worst.max(cond_symmetric(point.mat(j).as_matrix()));
            }
        }
        worst
    }

    /// Rescales active targets by a common factor so their log-determinants
    /// sum to zero. Under the exact scaling identity this leaves the
    /// objective unchanged; it only tames the scale drift of the fixed-point
    /// orbit.
    fn renormalize(&self, point: GaussianPoint) -> Result<GaussianPoint> {
        let mut total_logdet = 0.0;
        let mut total_dim = 0usize;
        for (j, &is_active) in self.active.iter().enumerate() {
            if is_active {
                total_logdet += point.mat(j).logdet()?;
                total_dim += self.target_dims[j];
            }
        }
        if total_dim == 0 {
            return Ok(point);
        }
        let t = (-total_logdet / total_dim as f64).exp();
        let mats = point
            .mats
            .iter()
            .enumerate()
            .map(|(j, m)| {
                if self.active[j] {
                    SpdMatrix::new(m.as_matrix() * t)
                } else {
                    Ok(m.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GaussianPoint { mats })
    }
}

/// (1/2) [ sum_j alpha_j w_j logdet A_j - sum_i logdet M_i ].
pub fn log_objective(datum: &QuiverDatum, point: &GaussianPoint) -> Result<f64> {
    datum.ensure_valid()?;
    Compiled::new(datum).log_objective(point)
}

/// G_j = (1/2) alpha_j w_j [ A_j^{-1} - sum over arrows i -> j of
/// B_a M_i^{-1} B_a^T ]; the zero matrix for frozen targets.
pub fn gradient_log_objective(datum: &QuiverDatum, point: &GaussianPoint) -> Result<Vec<DMatrix<f64>>> {
    datum.ensure_valid()?;
    Compiled::new(datum).gradient(point)
}

/// Stationarity update: A_j <- (sum over arrows i -> j of B_a M_i^{-1}
/// B_a^T)^{-1} for active targets; frozen targets pass through.
pub fn fixed_point_step(datum: &QuiverDatum, point: &GaussianPoint) -> Result<GaussianPoint> {
    datum.ensure_valid()?;
    Compiled::new(datum).fixed_point(point)
}

fn grad_frobenius(grads: &[DMatrix<f64>]) -> f64 {
    grads
        .iter()
        .map(|g| g.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

struct RestartOutcome {
    status: OptStatus,
    best_obj: f64,
    iterations: usize,
    final_grad_norm: f64,
    trace: Vec<f64>,
    point: Option<GaussianPoint>,
}

fn diverged(trace: Vec<f64>, iterations: usize) -> RestartOutcome {
    RestartOutcome {
        status: OptStatus::Diverging,
        best_obj: f64::INFINITY,
        iterations,
        final_grad_norm: f64::NAN,
        trace,
        point: None,
    }
}

fn initial_point(compiled: &Compiled, config: &OptimizerConfig, restart: usize) -> GaussianPoint {
    let identity = GaussianPoint {
        mats: compiled
            .target_dims
            .iter()
            .map(|&e| SpdMatrix::identity(e))
            .collect(),
    };
    if restart == 0 {
        return identity;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let mats = compiled
        .target_dims
        .iter()
        .enumerate()
        .map(|(j, &e)| {
            if !compiled.active[j] {
                return SpdMatrix::identity(e);
            }
            let g = DMatrix::<f64>::from_fn(e, e, |_, _| StandardNormal.sample(&mut rng));
            let m = DMatrix::<f64>::identity(e, e) + (&g * g.transpose()) * 0.1;
            SpdMatrix::new(m).expect("identity plus Gram matrix is SPD")
        })
        .collect();
    GaussianPoint { mats }
}

fn run_fixed_point(
    compiled: &Compiled,
    config: &OptimizerConfig,
    scaling_ok: bool,
    start: GaussianPoint,
) -> RestartOutcome {
    let mut point = start;
    let Ok(mut f_prev) = compiled.log_objective(&point) else {
        return diverged(Vec::new(), 0);
    };
    let mut trace = vec![f_prev];
    let mut grad_norm = match compiled.gradient(&point) {
        Ok(g) => grad_frobenius(&g),
        Err(_) => return diverged(trace, 0),
    };
    for iter in 1..=config.max_iters {
        let Ok(mut next) = compiled.fixed_point(&point) else {
            return diverged(trace, iter);
        };
        if scaling_ok {
            match compiled.renormalize(next) {
                Ok(p) => next = p,
                Err(_) => return diverged(trace, iter),
            }
        }
        let Ok(f) = compiled.log_objective(&next) else {
            return diverged(trace, iter);
        };
        trace.push(f);
        if !f.is_finite() {
            return diverged(trace, iter);
        }
        grad_norm = match compiled.gradient(&next) {
            Ok(g) => grad_frobenius(&g),
            Err(_) => return diverged(trace, iter),
        };
        let rising = f > f_prev;
        if rising && f > config.log_cap {
            return diverged(trace, iter);
        }
        if rising && compiled.max_condition(&next) > config.cond_cap {
            return diverged(trace, iter);
        }
        let small_change = (f - f_prev).abs() <= config.tol_obj * f.abs().max(1.0);
        point = next;
        f_prev = f;
        if small_change && grad_norm <= config.tol_grad {
            return RestartOutcome {
                status: OptStatus::Converged,
                best_obj: f,
                iterations: iter,
                final_grad_norm: grad_norm,
                trace,
                point: Some(point),
            };
        }
    }
    RestartOutcome {
        status: OptStatus::MaxedOut,
        best_obj: f_prev,
        iterations: config.max_iters,
        final_grad_norm: grad_norm,
        trace,
        point: Some(point),
    }
}

/// Cholesky chart: per active target, the strictly-lower entries of L and the
/// logs of its diagonal, concatenated. A = L L^T stays SPD for any chart
/// value.
struct Chart<'a> {
    compiled: &'a Compiled,
}

impl Chart<'_> {
    fn theta_from_point(&self, point: &GaussianPoint) -> Result<Vec<f64>> {
        let mut theta = Vec::new();
        for (j, &e) in self.compiled.target_dims.iter().enumerate() {
            if !self.compiled.active[j] {
                continue;
            }
            let chol = nalgebra::linalg::Cholesky::new(point.mat(j).as_matrix().clone())
                .ok_or_else(|| Error::not_pd("chart point"))?;
            let l = chol.l();
            for r in 0..e {
                for c in 0..r {
                    theta.push(l[(r, c)]);
                }
                theta.push(l[(r, r)].ln());
            }
        }
        Ok(theta)
    }

    fn factors_from_theta(&self, theta: &[f64]) -> Vec<Option<DMatrix<f64>>> {
        let mut factors = Vec::with_capacity(self.compiled.target_dims.len());
        let mut pos = 0usize;
        for (j, &e) in self.compiled.target_dims.iter().enumerate() {
            if !self.compiled.active[j] {
                factors.push(None);
                continue;
            }
            let mut l = DMatrix::<f64>::zeros(e, e);
            for r in 0..e {
                for c in 0..r {
                    l[(r, c)] = theta[pos];
                    pos += 1;
                }
                l[(r, r)] = theta[pos].exp();
                pos += 1;
            }
            factors.push(Some(l));
        }
        factors
    }

    fn point_from_theta(&self, theta: &[f64]) -> GaussianPoint {
        let mats = self
            .factors_from_theta(theta)
            .into_iter()
            .enumerate()
            .map(|(j, l)| match l {
                Some(l) => {
                    let a = &l * l.transpose();
                    SpdMatrix::new(a).expect("L L^T is SPD")
                }
                None => SpdMatrix::identity(self.compiled.target_dims[j]),
            })
            .collect();
        GaussianPoint { mats }
    }

    /// Chain rule: df/dL = 2 G L on the lower triangle; diagonal entries are
    /// additionally scaled by L_kk for the log parameterization.
    fn theta_gradient(&self, theta: &[f64], grads: &[DMatrix<f64>]) -> Vec<f64> {
        let mut out = Vec::with_capacity(theta.len());
        for (j, l) in self.factors_from_theta(theta).into_iter().enumerate() {
            let Some(l) = l else { continue };
            let e = l.nrows();
            let gl = &grads[j] * &l * 2.0;
            for r in 0..e {
                for c in 0..r {
                    out.push(gl[(r, c)]);
                }
                out.push(gl[(r, r)] * l[(r, r)]);
            }
        }
        out
    }
}

fn run_gradient_ascent(
    compiled: &Compiled,
    config: &OptimizerConfig,
    start: GaussianPoint,
) -> RestartOutcome {
    let chart = Chart { compiled };
    let Ok(mut theta) = chart.theta_from_point(&start) else {
        return diverged(Vec::new(), 0);
    };
    let mut point = chart.point_from_theta(&theta);
    let Ok(mut f_prev) = compiled.log_objective(&point) else {
        return diverged(Vec::new(), 0);
    };
    let mut trace = vec![f_prev];
    let mut grad_norm = f64::NAN;
    for iter in 1..=config.max_iters {
        let grads = match compiled.gradient(&point) {
            Ok(g) => g,
            Err(_) => return diverged(trace, iter),
        };
        grad_norm = grad_frobenius(&grads);
        if grad_norm <= config.tol_grad {
            return RestartOutcome {
                status: OptStatus::Converged,
                best_obj: f_prev,
                iterations: iter,
                final_grad_norm: grad_norm,
                trace,
                point: Some(point),
            };
        }
        let tgrad = chart.theta_gradient(&theta, &grads);
        let dir_sq: f64 = tgrad.iter().map(|v| v * v).sum();
        // Backtracking line search with the Armijo condition.
        let mut step = 1.0f64;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = theta
                .iter()
                .zip(tgrad.iter())
                .map(|(t, g)| t + step * g)
                .collect();
            let trial_point = chart.point_from_theta(&trial);
            let f_trial = compiled.log_objective(&trial_point).unwrap_or(f64::INFINITY);
            if f_trial >= f_prev + 1e-4 * step * dir_sq {
                accepted = Some((trial, trial_point, f_trial));
                break;
            }
            step *= 0.5;
        }
        let Some((new_theta, new_point, f)) = accepted else {
            // No improving step: stationary to working precision.
            return RestartOutcome {
                status: OptStatus::MaxedOut,
                best_obj: f_prev,
                iterations: iter,
                final_grad_norm: grad_norm,
                trace,
                point: Some(point),
            };
        };
        if new_theta == theta {
            // The backtracked step underflowed against the iterate: no
            // representable move improves the objective, so the run is done.
            return RestartOutcome {
                status: OptStatus::MaxedOut,
                best_obj: f_prev,
                iterations: iter,
                final_grad_norm: grad_norm,
                trace,
                point: Some(point),
            };
        }
        trace.push(f);
        if !f.is_finite() {
            return diverged(trace, iter);
        }
        let rising = f > f_prev;
        if rising && f > config.log_cap {
            return diverged(trace, iter);
        }
        if rising && compiled.max_condition(&new_point) > config.cond_cap {
            return diverged(trace, iter);
        }
        let small_change = (f - f_prev).abs() <= config.tol_obj * f.abs().max(1.0);
        theta = new_theta;
        point = new_point;
        f_prev = f;
        if small_change && grad_norm <= config.tol_grad {
            return RestartOutcome {
                status: OptStatus::Converged,
                best_obj: f,
                iterations: iter,
                final_grad_norm: grad_norm,
                trace,
                point: Some(point),
            };
        }
    }
    RestartOutcome {
        status: OptStatus::MaxedOut,
        best_obj: f_prev,
        iterations: config.max_iters,
        final_grad_norm: grad_norm,
        trace,
        point: Some(point),
    }
}

/// Maximizes the log objective over `config.restarts` independent starts and
/// reports C^{1/2} * exp(best). Any diverging restart marks the whole
/// estimate diverging (an unbounded ascent direction was found). The result
/// is deterministic given the seed: restarts are combined in index order
/// regardless of scheduling.
pub fn optimize_gaussian_constant(
    datum: &QuiverDatum,
    config: &OptimizerConfig,
) -> Result<ConstantEstimate> {
    datum.ensure_valid()?;
    let (scaling_ok, _, _) = crate::conditions::check_scaling(datum);
    let compiled = Compiled::new(datum);
    let restarts = config.restarts.max(1);
    let outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let start = initial_point(&compiled, config, k);
            match config.method {
                Method::FixedPoint => run_fixed_point(&compiled, config, scaling_ok, start),
                Method::GradientAscent => run_gradient_ascent(&compiled, config, start),
            }
        })
        .collect();

    if let Some(k) = outcomes.iter().position(|o| o.status == OptStatus::Diverging) {
        let o = &outcomes[k];
        return Ok(ConstantEstimate {
            value: f64::INFINITY,
            status: OptStatus::Diverging,
            iterations: o.iterations,
            final_gradient_norm: o.final_grad_norm,
            log_objective_trace: o.trace.clone(),
            scaling_ok,
            argmax: None,
        });
    }
    let pick = |status: OptStatus| -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, o) in outcomes.iter().enumerate() {
            if o.status != status {
                continue;
            }
            match best {
                None => best = Some(k),
                Some(b) if o.best_obj > outcomes[b].best_obj => best = Some(k),
                _ => {}
            }
        }
        best
    };
    let k = pick(OptStatus::Converged)
        .or_else(|| pick(OptStatus::MaxedOut))
        .expect("at least one restart ran");
    let o = &outcomes[k];
    Ok(ConstantEstimate {
        value: (0.5 * datum.log_c_constant() + o.best_obj).exp(),
        status: o.status,
        iterations: o.iterations,
        final_gradient_norm: o.final_grad_norm,
        log_objective_trace: o.trace.clone(),
        scaling_ok,
        argmax: o.point.clone(),
    })
}

/// Full inequality constant for subspace quivers (one source, one arrow per
/// target), where the Gaussian supremum equals the general constant and
/// C = 1.
pub fn subspace_bl_constant(datum: &QuiverDatum, config: &OptimizerConfig) -> Result<ConstantEstimate> {
    datum.ensure_valid()?;
    if !datum.is_subspace_quiver() {
        let reason = if datum.num_sources() != 1 {
            format!("{} sources, expected 1", datum.num_sources())
        } else {
            format!("target multiplicities {:?}, expected all 1", datum.alphas())
        };
        return Err(Error::NonSubspaceQuiver { reason });
    }
    optimize_gaussian_constant(datum, config)
}

/// Closed form for the three-function convolution datum on R^d with inverse
/// exponents summing to 2:
/// `value = prod_j [ w_j^{-w_j} (1-w_j)^{1-w_j} ]^{d/2}`, with 0^0 = 1.
pub fn young_closed_form(ws: &[Rat], d: usize) -> Result<f64> {
    if ws.len() != 3 {
        return Err(Error::param(format!(
            "expected 3 inverse exponents, got {}",
            ws.len()
        )));
    }
    for w in ws {
        if w.is_negative() || w > &Rat::one() {
            return Err(Error::param("inverse exponents must lie in [0, 1]".to_string()));
        }
    }
    let total: Rat = ws.iter().cloned().fold(Rat::zero(), |acc, w| acc + w);
    let two = Rat::from_integer(2.into());
    if total != two {
        return Err(Error::ScalingViolated {
            lhs: crate::numerics::rational_to_string(&total),
            rhs: "2".to_string(),
        });
    }
    let mut log_acc = 0.0;
    for w in ws {
        let wf = rat_to_f64(w);
        let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
        log_acc += -xlogx(wf) + xlogx(1.0 - wf);
    }
    Ok((0.5 * d as f64 * log_acc).exp())
}

#[derive(Debug, Clone)]
pub struct PartEstimate {
    pub source: usize,
    pub estimate: ConstantEstimate,
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub parts: Vec<PartEstimate>,
    /// Product over split parts; an estimate of the per-arrow constant.
    pub bl_value: f64,
    pub status: OptStatus,
    pub alphas: Vec<usize>,
    /// prod_j alpha_j^{alpha_j}.
    pub alpha_power_product: f64,
    /// Bracket [bl / prod alpha^alpha, bl] for the joint constant.
    pub lower: f64,
    pub upper: f64,
}

/// Estimates the per-arrow constant as the product over split parts of their
/// subspace constants, and reports the implied bracket on the joint constant.
pub fn sandwich_bounds(datum: &QuiverDatum, config: &OptimizerConfig) -> Result<SandwichReport> {
    let parts = datum.split_sources()?;
    let mut estimates = Vec::with_capacity(parts.len());
    let mut bl_log = 0.0f64;
    let mut status = OptStatus::Converged;
    for part in &parts {
        let est = subspace_bl_constant(&part.datum, config)?;
        match est.status {
            OptStatus::Diverging => status = OptStatus::Diverging,
            OptStatus::MaxedOut if status == OptStatus::Converged => status = OptStatus::MaxedOut,
            _ => {}
        }
        bl_log += est.value.ln();
        estimates.push(PartEstimate {
            source: part.source,
            estimate: est,
        });
    }
    let bl_value = if status == OptStatus::Diverging {
        f64::INFINITY
    } else {
        bl_log.exp()
    };
    let alphas = datum.alphas();
    let alpha_power_product: f64 = alphas.iter().map(|&a| (a as f64).powi(a as i32)).product();
    Ok(SandwichReport {
        parts: estimates,
        bl_value,
        status,
        alphas,
        alpha_power_product,
        lower: bl_value / alpha_power_product,
        upper: bl_value,
    })
}

/// Maps an optimizer point to the per-arrow Gaussian test functions that
/// realize the same ratio: A_a = alpha_j w_j * A_j for the arrow's target.
/// Requires every target active.
pub fn ratio_functions_from_argmax(datum: &QuiverDatum, point: &GaussianPoint) -> Result<Vec<SpdMatrix>> {
    let compiled = Compiled::new(datum);
    if compiled.lambda.contains(&0.0) {
        return Err(Error::param(
            "argmax-to-ratio mapping needs every target exponent finite".to_string(),
        ));
    }
    datum
        .arrows()
        .iter()
        .map(|a| SpdMatrix::new(point.mat(a.target).as_matrix() * compiled.lambda[a.target]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::exact::{rat_frac, rat_int, RatMatrix};
    use approx::assert_relative_eq;

    fn two_scalings() -> QuiverDatum {
        QuiverDatum::new(
            vec![1],
            vec![1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1]])),
                (0, 0, RatMatrix::from_i64_rows(&[&[2]])),
            ],
            vec![rat_frac(1, 2)],
        )
    }

    fn two_functionals() -> QuiverDatum {
        QuiverDatum::new(
            vec![2],
            vec![1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[2, 0]])),
                (0, 0, RatMatrix::from_i64_rows(&[&[0, 3]])),
            ],
            vec![rat_int(1)],
        )
    }

    fn overlapping_projections() -> QuiverDatum {
        QuiverDatum::new(
            vec![3],
            vec![2],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 1, 0]])),
                (0, 0, RatMatrix::from_i64_rows(&[&[0, 1, 0], &[0, 0, 1]])),
            ],
            vec![rat_frac(3, 4)],
        )
    }

    fn doubled_identity() -> QuiverDatum {
        QuiverDatum::new(
            vec![1],
            vec![1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1]])),
                (0, 0, RatMatrix::from_i64_rows(&[&[1]])),
            ],
            vec![rat_frac(1, 2)],
        )
    }

    fn young_d1() -> QuiverDatum {
        QuiverDatum::new(
            vec![2],
            vec![1, 1, 1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1, 0]])),
                (0, 1, RatMatrix::from_i64_rows(&[&[0, 1]])),
                (0, 2, RatMatrix::from_i64_rows(&[&[1, -1]])),
            ],
            vec![rat_frac(2, 3), rat_frac(2, 3), rat_frac(2, 3)],
        )
    }

    #[test]
    fn log_objective_matches_hand_values() {
        let d = two_scalings();
        let f = log_objective(&d, &GaussianPoint::identity(&d)).unwrap();
        // alpha w = 1, M = 1*1*1 + 1*2*2 = 5.
        assert_relative_eq!(f, -0.5 * 5.0f64.ln(), epsilon = 1e-14);

        // Scale invariance in the scaling-balanced case.
        let scaled = GaussianPoint::new(
            &d,
            vec![SpdMatrix::new(DMatrix::from_element(1, 1, 3.7)).unwrap()],
        )
        .unwrap();
        let f2 = log_objective(&d, &scaled).unwrap();
        assert_relative_eq!(f, f2, epsilon = 1e-12);
    }

    #[test]
    fn log_objective_identity_pair_gives_constant_one() {
        let d = QuiverDatum::new(
            vec![2],
            vec![1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1, 0]])),
                (0, 0, RatMatrix::from_i64_rows(&[&[0, 1]])),
            ],
            vec![rat_int(1)],
        );
        let f = log_objective(&d, &GaussianPoint::identity(&d)).unwrap();
        assert_relative_eq!(f, -(2.0f64.ln()), epsilon = 1e-14);
        // C^{1/2} = 2, so the constant is 2 * exp(-log 2) = 1 = 1/|det B|.
        assert_relative_eq!(d.c_constant().sqrt() * f.exp(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_stationary_identity() {
        for d in [two_scalings(), young_d1(), overlapping_projections()] {
            let g = gradient_log_objective(&d, &GaussianPoint::identity(&d)).unwrap();
            assert!(grad_frobenius(&g) < 1e-12, "gradient at identity for {d:?}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = young_d1();
        let point = GaussianPoint::new(
            &d,
            vec![
                SpdMatrix::new(DMatrix::from_element(1, 1, 1.3)).unwrap(),
                SpdMatrix::new(DMatrix::from_element(1, 1, 0.8)).unwrap(),
                SpdMatrix::new(DMatrix::from_element(1, 1, 1.1)).unwrap(),
            ],
        )
        .unwrap();
        let grads = gradient_log_objective(&d, &point).unwrap();
        let h = 1e-5;
        for (j, grad) in grads.iter().enumerate() {
            let perturb = |delta: f64| {
                let mats: Vec<SpdMatrix> = (0..3)
                    .map(|k| {
                        let v = point.mat(k).as_matrix()[(0, 0)] + if k == j { delta } else { 0.0 };
                        SpdMatrix::new(DMatrix::from_element(1, 1, v)).unwrap()
                    })
                    .collect();
                log_objective(&d, &GaussianPoint::new(&d, mats).unwrap()).unwrap()
            };
            let fd = (perturb(h) - perturb(-h)) / (2.0 * h);
            assert_relative_eq!(grad[(0, 0)], fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn fixed_point_step_is_stationary_on_balanced_data() {
        // Both the two-scalings datum and the doubled-identity datum are
        // fixed at A = 1.
        for d in [two_scalings(), doubled_identity()] {
            let p0 = GaussianPoint::identity(&d);
            let p1 = fixed_point_step(&d, &p0).unwrap();
            assert_relative_eq!(p1.mat(0).as_matrix()[(0, 0)], 1.0, epsilon = 1e-12);
            let f0 = log_objective(&d, &p0).unwrap();
            let f1 = log_objective(&d, &p1).unwrap();
            assert_relative_eq!(f0, f1, epsilon = 1e-12);
        }
    }

    #[test]
    fn optimizer_reproduces_closed_forms() {
        let config = OptimizerConfig::default();
        // sqrt(2/5) for scalings (1, 2).
        let est = optimize_gaussian_constant(&two_scalings(), &config).unwrap();
        assert_eq!(est.status, OptStatus::Converged);
        assert_relative_eq!(est.value, (2.0f64 / 5.0).sqrt(), epsilon = 1e-9);
        assert!(est.scaling_ok);
        assert!(est.final_gradient_norm <= config.tol_grad);

        // 1/|det B| = 1/6 for functionals (2,0), (0,3).
        let est = optimize_gaussian_constant(&two_functionals(), &config).unwrap();
        assert_eq!(est.status, OptStatus::Converged);
        assert_relative_eq!(est.value, 1.0 / 6.0, epsilon = 1e-9);

        // Doubled identity arrow: constant 1.
        let est = optimize_gaussian_constant(&doubled_identity(), &config).unwrap();
        assert_eq!(est.status, OptStatus::Converged);
        assert_relative_eq!(est.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn optimizer_converges_on_overlapping_projections() {
        // Joint-image feasibility makes this supremum finite even though the
        // per-arrow condition fails; value derived by hand: 2 * (2/3)^{3/2}.
        let est =
            optimize_gaussian_constant(&overlapping_projections(), &OptimizerConfig::default())
                .unwrap();
        assert_eq!(est.status, OptStatus::Converged);
        assert_relative_eq!(est.value, 2.0 * (2.0f64 / 3.0).powf(1.5), epsilon = 1e-8);
    }

    #[test]
    fn both_methods_agree() {
        let fp = OptimizerConfig::default();
        let ga = OptimizerConfig {
            method: Method::GradientAscent,
            ..fp
        };
        for d in [two_scalings(), two_functionals(), young_d1(), doubled_identity()] {
            let a = optimize_gaussian_constant(&d, &fp).unwrap();
            let b = optimize_gaussian_constant(&d, &ga).unwrap();
            assert_eq!(a.status, OptStatus::Converged);
            assert_eq!(b.status, OptStatus::Converged);
            assert_relative_eq!(a.value, b.value, max_relative = 1e-6);
        }
    }

    #[test]
    fn divergence_detected_on_split_infeasible_part() {
        // The split part of the overlapping-projections datum keeps w = 3/4
        // per copy; its per-arrow condition fails, so the supremum is
        // infinite and the iteration must diverge.
        let parts = overlapping_projections().split_sources().unwrap();
        let est = subspace_bl_constant(&parts[0].datum, &OptimizerConfig::default()).unwrap();
        assert_eq!(est.status, OptStatus::Diverging);
        assert!(est.value.is_infinite());
        assert!(est.argmax.is_none());
    }

    #[test]
    fn subspace_constant_rejects_multiplicities() {
        let err = subspace_bl_constant(&two_scalings(), &OptimizerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonSubspaceQuiver { .. }));
    }

    #[test]
    fn young_datum_matches_closed_form() {
        let est = subspace_bl_constant(&young_d1(), &OptimizerConfig::default()).unwrap();
        assert_eq!(est.status, OptStatus::Converged);
        let closed =
            young_closed_form(&[rat_frac(2, 3), rat_frac(2, 3), rat_frac(2, 3)], 1).unwrap();
        assert_relative_eq!(closed, 3.0f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(est.value, closed, epsilon = 1e-9);
    }

    #[test]
    fn young_closed_form_conventions() {
        assert_relative_eq!(
            young_closed_form(&[rat_int(1), rat_int(1), rat_int(0)], 1).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert!(matches!(
            young_closed_form(&[rat_frac(1, 2), rat_frac(1, 2), rat_frac(1, 2)], 1),
            Err(Error::ScalingViolated { .. })
        ));
        assert!(young_closed_form(&[rat_int(1), rat_int(1)], 1).is_err());
    }

    #[test]
    fn sandwich_on_doubled_identity() {
        let report = sandwich_bounds(&doubled_identity(), &OptimizerConfig::default()).unwrap();
        assert_eq!(report.status, OptStatus::Converged);
        assert_relative_eq!(report.bl_value, 1.0, epsilon = 1e-9);
        assert_eq!(report.alphas, vec![2]);
        assert_relative_eq!(report.alpha_power_product, 4.0);
        assert_relative_eq!(report.lower, 0.25, epsilon = 1e-9);
        assert_relative_eq!(report.upper, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sandwich_diverges_on_overlapping_projections() {
        let report =
            sandwich_bounds(&overlapping_projections(), &OptimizerConfig::default()).unwrap();
        assert_eq!(report.status, OptStatus::Diverging);
        assert!(report.bl_value.is_infinite());
    }

    #[test]
    fn sandwich_bracket_collapses_on_subspace_quivers() {
        let report = sandwich_bounds(&young_d1(), &OptimizerConfig::default()).unwrap();
        assert_relative_eq!(report.alpha_power_product, 1.0);
        assert_relative_eq!(report.lower, report.upper);
    }

    #[test]
    fn determinism_across_runs() {
        let config = OptimizerConfig {
            restarts: 4,
            ..OptimizerConfig::default()
        };
        let d = young_d1();
        let a = optimize_gaussian_constant(&d, &config).unwrap();
        let b = optimize_gaussian_constant(&d, &config).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.log_objective_trace, b.log_objective_trace);
    }
}
