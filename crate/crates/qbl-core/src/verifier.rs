//! Numerical evaluation of both sides of the inequality for concrete test
//! functions: closed-form Gaussian ratios, exact slice integration for box
//! indicators on the chain datum, the power-law family on the line, a
//! stratified Monte Carlo fallback, and blow-up constructions from
//! dimension-condition witnesses.

use nalgebra::{DMatrix, DVector};
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conditions::SubspaceFamily;
use crate::datum::QuiverDatum;
use crate::error::{Error, Result};
use crate::numerics::exact::{rat_int, rat_to_f64, Rat, Subspace};
use crate::numerics::spd::{logdet_spd, spd_inverse, SpdMatrix};

/// Axis-aligned box with rational corners, nondegenerate on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RatBox {
    lo: Vec<Rat>,
    hi: Vec<Rat>,
}

impl RatBox {
    pub fn new(lo: Vec<Rat>, hi: Vec<Rat>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::param("box corners must have equal positive length".to_string()));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if l >= h {
                return Err(Error::param("box is degenerate: lo must be below hi on every axis".to_string()));
            }
        }
        Ok(RatBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Rat] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rat] {
        &self.hi
    }

    pub fn volume(&self) -> Rat {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h.clone() - l.clone())
            .fold(Rat::one(), |acc, side| acc * side)
    }

    fn contains_f64(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= rat_to_f64(l) && *v <= rat_to_f64(h))
    }
}

/// A test function attached to one arrow, living on that arrow's target.
#[derive(Debug, Clone)]
pub enum TestFunction {
    /// x -> exp(-pi <Ax, x>).
    Gaussian { form: SpdMatrix },
    /// Indicator of a union of axis-aligned boxes.
    BoxUnion { boxes: Vec<RatBox> },
    /// One-dimensional |x|^{-p/2} on |x| >= 1, zero inside; needs p > 1.
    PowerLaw { p: f64 },
}

impl TestFunction {
    pub fn dim(&self) -> Option<usize> {
        match self {
            TestFunction::Gaussian { form } => Some(form.dim()),
            TestFunction::BoxUnion { boxes } => boxes.first().map(RatBox::dim),
            TestFunction::PowerLaw { .. } => Some(1),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Gaussian { form } => {
                let v = DVector::from_column_slice(x);
                let q = (form.as_matrix() * &v).dot(&v);
                (-std::f64::consts::PI * q).exp()
            }
            TestFunction::BoxUnion { boxes } => {
                if boxes.iter().any(|b| b.contains_f64(x)) {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::PowerLaw { p } => {
                let t = x[0].abs();
                if t >= 1.0 {
                    t.powf(-p / 2.0)
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioMethod {
    ClosedForm,
    ExactSlice,
    MonteCarlo,
}

impl RatioMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RatioMethod::ClosedForm => "closed-form",
            RatioMethod::ExactSlice => "exact-slice",
            RatioMethod::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub method: RatioMethod,
    /// Standard error of the LHS estimate divided by the RHS; present
    /// exactly when the method is Monte Carlo.
    pub stderr: Option<f64>,
}

/// L^p norm of x -> exp(-pi <Ax, x>) with p = 1/w: det(pA)^{-1/(2p)};
/// the sup norm (w = 0) is 1.
fn gaussian_norm(form: &SpdMatrix, w: &Rat) -> Result<f64> {
    if w.is_zero() {
        return Ok(1.0);
    }
    let wf = rat_to_f64(w);
    let p = 1.0 / wf;
    let scaled = form.as_matrix() * p;
    let logdet = logdet_spd(&scaled)?;
    Ok((-0.5 * wf * logdet).exp())
}

/// Both sides of the inequality for an all-Gaussian assignment, one function
/// per arrow. The left side is exact per source:
/// det(sum of B_a^T A_a B_a)^{-1/2}; a singular form means the left side is
/// infinite and surfaces as NotPositiveDefinite.
pub fn ratio_gaussian(datum: &QuiverDatum, functions: &[TestFunction]) -> Result<RatioReport> {
    datum.ensure_valid()?;
    let forms = gaussian_forms(datum, functions)?;
    let mut log_lhs = 0.0;
    for i in 0..datum.num_sources() {
        let d = datum.source_dim(i);
        let mut q = DMatrix::<f64>::zeros(d, d);
        for a in datum.arrows_from(i) {
            let b = a.matrix.to_f64();
            q += b.transpose() * forms[a.id].as_matrix() * b;
        }
        let logdet = logdet_spd(&q)
            .map_err(|_| Error::not_pd(format!("source {} integral diverges", i + 1)))?;
        log_lhs -= 0.5 * logdet;
    }
    let mut log_rhs = 0.0;
    for a in datum.arrows() {
        log_rhs += gaussian_norm(&forms[a.id], datum.inv_exponent(a.target))?.ln();
    }
    let lhs = log_lhs.exp();
    let rhs = log_rhs.exp();
    Ok(RatioReport {
        lhs,
        rhs,
        ratio: (log_lhs - log_rhs).exp(),
        method: RatioMethod::ClosedForm,
        stderr: None,
    })
}

fn gaussian_forms(datum: &QuiverDatum, functions: &[TestFunction]) -> Result<Vec<SpdMatrix>> {
    if functions.len() != datum.arrows().len() {
        return Err(Error::DimensionMismatch {
            what: "test functions".to_string(),
            expected: datum.arrows().len(),
            got: functions.len(),
        });
    }
    datum
        .arrows()
        .iter()
        .zip(functions)
        .map(|(a, f)| match f {
            TestFunction::Gaussian { form } if form.dim() == datum.target_dim(a.target) => {
                Ok(form.clone())
            }
            TestFunction::Gaussian { form } => Err(Error::DimensionMismatch {
                what: format!("Gaussian on arrow {}", a.id + 1),
                expected: datum.target_dim(a.target),
                got: form.dim(),
            }),
            _ => Err(Error::param(format!(
                "arrow {} carries a non-Gaussian function",
                a.id + 1
            ))),
        })
        .collect()
}

/// Sorted union length of 1-D rational intervals.
fn union_length(mut intervals: Vec<(Rat, Rat)>) -> Rat {
    intervals.retain(|(l, h)| l < h);
    intervals.sort();
    let mut total = Rat::zero();
    let mut current: Option<(Rat, Rat)> = None;
    for (l, h) in intervals {
        match current.take() {
            None => current = Some((l, h)),
            Some((cl, ch)) => {
                if l <= ch {
                    current = Some((cl, ch.max(h)));
                } else {
                    total += ch - cl;
                    current = Some((l, h));
                }
            }
        }
    }
    if let Some((cl, ch)) = current {
        total += ch - cl;
    }
    total
}

/// Length of { u : (u, t) in union } for 2-D boxes, as a step function of t:
/// breakpoints paired with the constant length on each strip.
fn slice_profile(boxes: &[RatBox], slice_axis: usize) -> Vec<(Rat, Rat, Rat)> {
    let other = 1 - slice_axis;
    let mut cuts: Vec<Rat> = boxes
        .iter()
        .flat_map(|b| [b.lo[slice_axis].clone(), b.hi[slice_axis].clone()])
        .collect();
    cuts.sort();
    cuts.dedup();
    let mut strips = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let mid = (lo.clone() + hi.clone()) / rat_int(2);
        let intervals: Vec<(Rat, Rat)> = boxes
            .iter()
            .filter(|b| b.lo[slice_axis] <= mid && mid < b.hi[slice_axis])
            .map(|b| (b.lo[other].clone(), b.hi[other].clone()))
            .collect();
        strips.push((lo.clone(), hi.clone(), union_length(intervals)));
    }
    strips
}

/// Exact area of a union of boxes: interval union in 1-D, slice integration
/// in 2-D.
fn union_volume(boxes: &[RatBox]) -> Result<Rat> {
    let Some(first) = boxes.first() else {
        return Ok(Rat::zero());
    };
    let dim = first.dim();
    if boxes.iter().any(|b| b.dim() != dim) {
        return Err(Error::param("boxes in one union must share a dimension".to_string()));
    }
    match dim {
        1 => Ok(union_length(
            boxes.iter().map(|b| (b.lo[0].clone(), b.hi[0].clone())).collect(),
        )),
        2 => Ok(slice_profile(boxes, 1)
            .into_iter()
            .map(|(lo, hi, len)| (hi - lo) * len)
            .fold(Rat::zero(), |acc, a| acc + a)),
        _ => Err(Error::param(
            "exact union volume is implemented for 1-D and 2-D boxes only".to_string(),
        )),
    }
}

/// Exact evaluation for the chain datum (one source R^3, two projections to
/// adjacent coordinate pairs, w = 3/4) with the cross-shaped indicator
/// 1_S, S = [0,N]x[0,1] union [0,1]x[0,N], on both arrows.
#[derive(Debug, Clone)]
pub struct BoxesChainRatio {
    /// Integral of 1_S(x1,x2) 1_S(x2,x3), by exact slice integration.
    pub lhs_exact: Rat,
    /// |S|.
    pub area_exact: Rat,
    /// RHS^2 = |S|^3, exact; RHS itself is irrational.
    pub rhs_squared_exact: Rat,
    pub report: RatioReport,
}

pub fn ratio_boxes_chain(n: &Rat) -> Result<BoxesChainRatio> {
    if n < &Rat::one() {
        return Err(Error::param("chain cross needs N >= 1".to_string()));
    }
    let boxes = cross_boxes(n);
    // Shared coordinate x2 = t: the integrand factors into
    // len{x1 : (x1,t) in S} * len{x3 : (t,x3) in S}. Both profiles are step
    // functions of t; integrate their product strip by strip.
    let by_second = slice_profile(&boxes, 1);
    let by_first = slice_profile(&boxes, 0);
    let mut cuts: Vec<Rat> = by_second
        .iter()
        .chain(by_first.iter())
        .flat_map(|(lo, hi, _)| [lo.clone(), hi.clone()])
        .collect();
    cuts.sort();
    cuts.dedup();
    let value_at = |profile: &[(Rat, Rat, Rat)], mid: &Rat| -> Rat {
        profile
            .iter()
            .find(|(lo, hi, _)| lo <= mid && mid < hi)
            .map(|(_, _, len)| len.clone())
            .unwrap_or_else(Rat::zero)
    };
    let mut lhs_exact = Rat::zero();
    for w in cuts.windows(2) {
        let mid = (w[0].clone() + w[1].clone()) / rat_int(2);
        let g = value_at(&by_second, &mid);
        let h = value_at(&by_first, &mid);
        lhs_exact += (w[1].clone() - w[0].clone()) * g * h;
    }
    let area_exact = union_volume(&boxes)?;
    let rhs_squared_exact = area_exact.clone() * area_exact.clone() * area_exact.clone();
    let lhs = rat_to_f64(&lhs_exact);
    let rhs = rat_to_f64(&rhs_squared_exact).sqrt();
    Ok(BoxesChainRatio {
        lhs_exact,
        area_exact,
        rhs_squared_exact,
        report: RatioReport {
            lhs,
            rhs,
            ratio: lhs / rhs,
            method: RatioMethod::ExactSlice,
            stderr: None,
        },
    })
}

/// The two target boxes realizing the chain ratio at breadth n: an n x 1
/// strip and a 1 x n strip sharing the unit-square corner.
pub fn cross_boxes(n: &Rat) -> Vec<RatBox> {
    let zero = Rat::zero();
    let one = Rat::one();
    if n == &one {
        // The cross collapses to the unit square.
        return vec![RatBox::new(vec![zero.clone(), zero], vec![one.clone(), one]).unwrap()];
    }
    vec![
        RatBox::new(vec![zero.clone(), zero.clone()], vec![n.clone(), one.clone()]).unwrap(),
        RatBox::new(vec![zero.clone(), zero], vec![one, n.clone()]).unwrap(),
    ]
}

/// Exact ratio for the two-scalings datum with f = |x|^{-p/2} 1_{|x|>=1} on
/// both arrows: |b1 b2|^{-p/2} |b1|^{p-1} for |b1| <= |b2|. The L^2 norm
/// squared 2/(p-1) appears on both sides.
pub fn ratio_powerlaw(b1: f64, b2: f64, p: f64) -> Result<RatioReport> {
    if p <= 1.0 {
        return Err(Error::param("power-law family needs p > 1".to_string()));
    }
    if b1 == 0.0 || b2 == 0.0 || !b1.is_finite() || !b2.is_finite() {
        return Err(Error::param("scaling coefficients must be nonzero".to_string()));
    }
    let (s, l) = if b1.abs() <= b2.abs() {
        (b1.abs(), b2.abs())
    } else {
        (b2.abs(), b1.abs())
    };
    let norm_sq = 2.0 / (p - 1.0);
    let ratio = (s * l).powf(-p / 2.0) * s.powf(p - 1.0);
    Ok(RatioReport {
        lhs: ratio * norm_sq,
        rhs: norm_sq,
        ratio,
        method: RatioMethod::ClosedForm,
        stderr: None,
    })
}

/// Effective support box of a single function on its target space, or None
/// when no box exists (power laws). Gaussians use the superlevel set
/// exp(-pi q) >= exp(-16 pi), whose mass outside is far below Monte Carlo
/// resolution.
fn target_support_box(f: &TestFunction, dim: usize) -> Result<Option<Vec<(f64, f64)>>> {
    match f {
        TestFunction::Gaussian { form } => {
            let inv = spd_inverse(form.as_matrix())?;
            Ok(Some(
                (0..dim)
                    .map(|r| {
                        let half = 4.0 * inv[(r, r)].sqrt();
                        (-half, half)
                    })
                    .collect(),
            ))
        }
        TestFunction::BoxUnion { boxes } => {
            if boxes.is_empty() {
                // Empty union: the zero function, supported anywhere.
                return Ok(Some(vec![(0.0, 0.0); dim]));
            }
            Ok(Some(
                (0..dim)
                    .map(|k| {
                        let lo = boxes.iter().map(|b| rat_to_f64(&b.lo[k])).fold(f64::INFINITY, f64::min);
                        let hi = boxes.iter().map(|b| rat_to_f64(&b.hi[k])).fold(f64::NEG_INFINITY, f64::max);
                        (lo, hi)
                    })
                    .collect(),
            ))
        }
        TestFunction::PowerLaw { .. } => Ok(None),
    }
}

/// Bounding box for the integrand of one source: a product of Gaussians gets
/// the combined quadratic form's superlevel box; box constraints propagate
/// through matrix rows with a single nonzero entry. Coordinates no
/// constraint can reach make the support effectively unbounded.
fn source_sampling_box(
    datum: &QuiverDatum,
    functions: &[TestFunction],
    source: usize,
) -> Result<Vec<(f64, f64)>> {
    let d = datum.source_dim(source);
    let mut bounds: Vec<Option<(f64, f64)>> = vec![None; d];
    let arrows: Vec<_> = datum.arrows_from(source).collect();

    if arrows
        .iter()
        .all(|a| matches!(functions[a.id], TestFunction::Gaussian { .. }))
    {
        let mut q = DMatrix::<f64>::zeros(d, d);
        for a in &arrows {
            if let TestFunction::Gaussian { form } = &functions[a.id] {
                let b = a.matrix.to_f64();
                q += b.transpose() * form.as_matrix() * b;
            }
        }
        if let Ok(inv) = spd_inverse(&q) {
            for (k, slot) in bounds.iter_mut().enumerate() {
                let half = 4.0 * inv[(k, k)].sqrt();
                *slot = Some((-half, half));
            }
        }
    }

    for a in &arrows {
        let e = datum.target_dim(a.target);
        let Some(target_box) = target_support_box(&functions[a.id], e)? else {
            return Err(Error::param(format!(
                "arrow {} has unbounded support and no bounding box; Monte Carlo needs box or Gaussian functions",
                a.id + 1
            )));
        };
        for (r, (box_lo, box_hi)) in target_box.iter().enumerate().take(e) {
            let row = a.matrix.row_vec(r);
            let nonzero: Vec<usize> = (0..d).filter(|&c| !row[c].is_zero()).collect();
            if nonzero.len() != 1 {
                continue;
            }
            let c = nonzero[0];
            let coef = rat_to_f64(&row[c]);
            let (mut lo, mut hi) = (box_lo / coef, box_hi / coef);
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            bounds[c] = Some(match bounds[c] {
                None => (lo, hi),
                Some((l, h)) => (l.max(lo), h.min(hi)),
            });
        }
    }

    bounds
        .into_iter()
        .enumerate()
        .map(|(k, b)| {
            b.ok_or_else(|| {
                Error::param(format!(
                    "source {} coordinate {} has unbounded effective support; Monte Carlo cannot bound the integral",
                    source + 1,
                    k + 1
                ))
            })
        })
        .collect()
}

/// Closed-form (or exact) L^{p_j} norm of one arrow's function for the
/// Monte Carlo right-hand side.
fn arrow_norm(datum: &QuiverDatum, functions: &[TestFunction], arrow_id: usize) -> Result<f64> {
    let a = &datum.arrows()[arrow_id];
    let w = datum.inv_exponent(a.target);
    match &functions[arrow_id] {
        TestFunction::Gaussian { form } => gaussian_norm(form, w),
        TestFunction::BoxUnion { boxes } => {
            let vol = union_volume(boxes)?;
            if w.is_zero() {
                return Ok(if vol.is_zero() { 0.0 } else { 1.0 });
            }
            Ok(rat_to_f64(&vol).powf(rat_to_f64(w)))
        }
        TestFunction::PowerLaw { .. } => Err(Error::param(
            "Monte Carlo right-hand side for power laws is not closed form; use the power-law ratio".to_string(),
        )),
    }
}

/// Stratified Monte Carlo estimate of the ratio: the left side is sampled
/// per source over a derived bounding box; the right side uses exact norms.
/// Deterministic for a given seed and budget, independent of thread count.
pub fn ratio_monte_carlo(
    datum: &QuiverDatum,
    functions: &[TestFunction],
    budget: usize,
    seed: u64,
) -> Result<RatioReport> {
    datum.ensure_valid()?;
    if budget == 0 {
        return Err(Error::param("sample budget must be positive".to_string()));
    }
    if functions.len() != datum.arrows().len() {
        return Err(Error::DimensionMismatch {
            what: "test functions".to_string(),
            expected: datum.arrows().len(),
            got: functions.len(),
        });
    }

    let mut lhs = 1.0f64;
    let mut var_product = 1.0f64; // prod (est^2 + se^2), for the product-variance rule
    for i in 0..datum.num_sources() {
        let bx = source_sampling_box(datum, functions, i)?;
        let volume: f64 = bx.iter().map(|(l, h)| h - l).product();
        let (est, se) = if volume == 0.0 {
            (0.0, 0.0)
        } else {
            sample_source(datum, functions, i, &bx, budget, seed)?
        };
        lhs *= est;
        var_product *= est * est + se * se;
    }
    let se_lhs = (var_product - lhs * lhs).max(0.0).sqrt();

    let mut rhs = 1.0f64;
    for k in 0..datum.arrows().len() {
        rhs *= arrow_norm(datum, functions, k)?;
    }

    let ratio = lhs / rhs;
    let stderr = se_lhs / rhs;
    Ok(RatioReport {
        lhs,
        rhs,
        ratio,
        method: RatioMethod::MonteCarlo,
        stderr: Some(stderr),
    })
}

fn sample_source(
    datum: &QuiverDatum,
    functions: &[TestFunction],
    source: usize,
    bx: &[(f64, f64)],
    budget: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let d = bx.len();
    // Axis strata: the largest grid whose cell count stays within both the
    // budget and a fixed cap, so each cell gets several samples.
    let cap = (budget.min(1 << 20)) as f64;
    let mut grid = cap.powf(1.0 / d as f64).floor() as usize;
    grid = grid.clamp(1, 64);
    let cells = grid.pow(d as u32);
    let per_cell = (budget / cells).max(1);
    let volume: f64 = bx.iter().map(|(l, h)| h - l).product();

    let arrows: Vec<_> = datum.arrows_from(source).collect();
    let mats: Vec<DMatrix<f64>> = arrows.iter().map(|a| a.matrix.to_f64()).collect();

    let partials: Vec<(f64, f64)> = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((source as u64) << 32) | cell as u64);
            let mut idx = vec![0usize; d];
            let mut rest = cell;
            for slot in idx.iter_mut() {
                *slot = rest % grid;
                rest /= grid;
            }
            let mut sum = 0.0f64;
            let mut sumsq = 0.0f64;
            let mut x = vec![0.0f64; d];
            for _ in 0..per_cell {
                for (k, slot) in x.iter_mut().enumerate() {
                    let (l, h) = bx[k];
                    let u: f64 = rng.random_range(0.0..1.0);
                    *slot = l + (idx[k] as f64 + u) * (h - l) / grid as f64;
                }
                let mut value = 1.0f64;
                for (a, b) in arrows.iter().zip(&mats) {
                    let y = b * DVector::from_column_slice(&x);
                    value *= functions[a.id].eval(y.as_slice());
                    if value == 0.0 {
                        break;
                    }
                }
                sum += value;
                sumsq += value * value;
            }
            (sum, sumsq)
        })
        .collect();

    let n = (cells * per_cell) as f64;
    let (sum, sumsq) = partials
        .into_iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let mean = sum / n;
    let var = (sumsq / n - mean * mean).max(0.0);
    Ok((volume * mean, volume * (var / n).sqrt()))
}

/// Radii sweep for the blow-up construction: grow the outer radius R with
/// the inner radius fixed, or shrink the inner radius r with the outer
/// fixed.
#[derive(Debug, Clone)]
pub enum ParamSweep {
    OuterRadius { r_small: f64, values: Vec<f64> },
    InnerRadius { r_large: f64, values: Vec<f64> },
}

impl ParamSweep {
    fn validate(&self) -> Result<()> {
        let (fixed_ok, values) = match self {
            ParamSweep::OuterRadius { r_small, values } => {
                (*r_small > 0.0 && *r_small <= 1.0, values)
            }
            ParamSweep::InnerRadius { r_large, values } => (*r_large >= 1.0, values),
        };
        if !fixed_ok {
            return Err(Error::param("fixed radius out of range: need r in (0,1] and R >= 1".to_string()));
        }
        if values.len() < 2 {
            return Err(Error::param("radius sweep needs at least two grid points".to_string()));
        }
        let in_range = |v: &f64| match self {
            ParamSweep::OuterRadius { .. } => *v >= 1.0,
            ParamSweep::InnerRadius { .. } => *v > 0.0 && *v <= 1.0,
        };
        if !values.iter().all(in_range) {
            return Err(Error::param("swept radii out of range: need r in (0,1] and R >= 1".to_string()));
        }
        Ok(())
    }

    fn pairs(&self) -> Vec<(f64, f64, f64)> {
        // (swept value, R, r)
        match self {
            ParamSweep::OuterRadius { r_small, values } => {
                values.iter().map(|&v| (v, v, *r_small)).collect()
            }
            ParamSweep::InnerRadius { r_large, values } => {
                values.iter().map(|&v| (v, *r_large, v)).collect()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrowthPoint {
    /// The swept radius.
    pub param: f64,
    /// Natural log of the product of witness-box volumes (lower bound for
    /// the left side).
    pub log_lhs: f64,
    /// Natural log of the product of per-arrow norms.
    pub log_rhs: f64,
}

impl GrowthPoint {
    pub fn log_ratio(&self) -> f64 {
        self.log_lhs - self.log_rhs
    }
}

#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub points: Vec<GrowthPoint>,
    /// Least-squares slope of log(lhs/rhs) against log(swept radius).
    pub fitted_slope: f64,
    /// The exact exponent the construction realizes; a positive value
    /// certifies blow-up.
    pub expected_slope: Rat,
    /// Shrink factor c actually used after containment checks.
    pub shrink: f64,
    /// True when every sampled box vertex passed the containment check
    /// B_a S_i inside 2 S^a.
    pub containment_verified: bool,
}

struct SourceGeometry {
    onb_v: Vec<DVector<f64>>,
    onb_perp: Vec<DVector<f64>>,
}

struct ArrowGeometry {
    mat: DMatrix<f64>,
    onb_w: Vec<DVector<f64>>,
    onb_w_perp: Vec<DVector<f64>>,
    dim_w: usize,
}

fn gram_schmidt(columns: Vec<DVector<f64>>, keep_tol: f64) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in columns {
        let scale = v.norm().max(1.0);
        for b in &basis {
            let coef = v.dot(b);
            v -= b * coef;
        }
        // Second pass tightens orthogonality against rounding.
        for b in &basis {
            let coef = v.dot(b);
            v -= b * coef;
        }
        if v.norm() > keep_tol * scale {
            let n = v.norm();
            basis.push(v / n);
        }
    }
    basis
}

fn orthonormal_split(sub: &Subspace) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let d = sub.ambient();
    let cols: Vec<DVector<f64>> = (0..sub.dim())
        .map(|c| {
            DVector::from_iterator(d, sub.basis().col_vec(c).iter().map(rat_to_f64))
        })
        .collect();
    let onb_v = gram_schmidt(cols, 1e-10);
    let mut extended = onb_v.clone();
    for k in 0..d {
        let mut e = DVector::zeros(d);
        e[k] = 1.0;
        let mut v = e;
        for b in &extended {
            let coef = v.dot(b);
            v -= b * coef;
        }
        for b in &extended {
            let coef = v.dot(b);
            v -= b * coef;
        }
        if v.norm() > 1e-10 {
            let n = v.norm();
            extended.push(v / n);
        }
    }
    let onb_perp = extended.split_off(onb_v.len());
    (onb_v, onb_perp)
}

fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Builds the blow-up family from a witness: box S_i with radii cR along
/// V_i and cr across it per source, indicator of 2 S^a on each arrow with
/// radii 2R along W^a = B_a V_i and 2r across it. Reports the growth of the
/// volume bound prod |S_i| against the norm product prod |2 S^a|^{w}, whose
/// exact exponent in the swept radius is positive precisely when the
/// witness violates the per-arrow dimension count.
pub fn counterexample_from_witness(
    datum: &QuiverDatum,
    family: &SubspaceFamily,
    sweep: &ParamSweep,
) -> Result<GrowthReport> {
    datum.ensure_valid()?;
    sweep.validate()?;
    if family.subspaces.is_empty() {
        return Err(Error::param("witness family is empty".to_string()));
    }
    if family.subspaces.len() != datum.num_sources() {
        return Err(Error::DimensionMismatch {
            what: "subspace family".to_string(),
            expected: datum.num_sources(),
            got: family.subspaces.len(),
        });
    }
    for (i, v) in family.subspaces.iter().enumerate() {
        if v.ambient() != datum.source_dim(i) {
            return Err(Error::DimensionMismatch {
                what: format!("family member {}", i + 1),
                expected: datum.source_dim(i),
                got: v.ambient(),
            });
        }
        if datum.source_dim(i) > 16 {
            return Err(Error::param(
                "blow-up construction checks all box vertices; sources beyond dimension 16 are not supported".to_string(),
            ));
        }
    }

    let sources: Vec<SourceGeometry> = family
        .subspaces
        .iter()
        .map(|v| {
            let (onb_v, onb_perp) = orthonormal_split(v);
            SourceGeometry { onb_v, onb_perp }
        })
        .collect();
    let arrows: Vec<ArrowGeometry> = datum
        .arrows()
        .iter()
        .map(|a| {
            let image = family.subspaces[a.source].image(&a.matrix);
            let (onb_w, onb_w_perp) = orthonormal_split(&image);
            ArrowGeometry {
                mat: a.matrix.to_f64(),
                dim_w: image.dim(),
                onb_w,
                onb_w_perp,
            }
        })
        .collect();

    // Exact exponent of the swept radius in the ratio.
    let mut expected_slope = Rat::zero();
    match sweep {
        ParamSweep::OuterRadius { .. } => {
            for (i, v) in family.subspaces.iter().enumerate() {
                let _ = i;
                expected_slope += rat_int(v.dim() as i64);
            }
            for (a, geo) in datum.arrows().iter().zip(&arrows) {
                expected_slope -= datum.inv_exponent(a.target) * rat_int(geo.dim_w as i64);
            }
        }
        ParamSweep::InnerRadius { .. } => {
            for (i, v) in family.subspaces.iter().enumerate() {
                expected_slope += rat_int((datum.source_dim(i) - v.dim()) as i64);
            }
            for (a, geo) in datum.arrows().iter().zip(&arrows) {
                let codim = datum.target_dim(a.target) - geo.dim_w;
                expected_slope -= datum.inv_exponent(a.target) * rat_int(codim as i64);
            }
        }
    }

    let max_opnorm = arrows.iter().map(|g| operator_norm(&g.mat)).fold(1e-12, f64::max);
    let mut shrink = 1.0 / (2.0 * max_opnorm);
    let pairs = sweep.pairs();
    let mut containment_verified = false;
    'shrinking: for _ in 0..60 {
        for &(_, big_r, small_r) in &pairs {
            for (i, geo) in sources.iter().enumerate() {
                if !vertices_contained(datum, &arrows, geo, i, shrink, big_r, small_r) {
                    shrink *= 0.5;
                    continue 'shrinking;
                }
            }
        }
        containment_verified = true;
        break;
    }
    if !containment_verified {
        return Err(Error::param(
            "containment check failed to certify a shrink factor".to_string(),
        ));
    }

    let points: Vec<GrowthPoint> = pairs
        .iter()
        .map(|&(param, big_r, small_r)| {
            let mut log_lhs = 0.0;
            for (i, v) in family.subspaces.iter().enumerate() {
                let dim = v.dim() as f64;
                let codim = (datum.source_dim(i) - v.dim()) as f64;
                log_lhs += dim * (2.0 * shrink * big_r).ln() + codim * (2.0 * shrink * small_r).ln();
            }
            let mut log_rhs = 0.0;
            for (a, geo) in datum.arrows().iter().zip(&arrows) {
                let w = rat_to_f64(datum.inv_exponent(a.target));
                let dim = geo.dim_w as f64;
                let codim = (datum.target_dim(a.target) - geo.dim_w) as f64;
                log_rhs += w * (dim * (4.0 * big_r).ln() + codim * (4.0 * small_r).ln());
            }
            GrowthPoint {
                param,
                log_lhs,
                log_rhs,
            }
        })
        .collect();

    let fitted_slope = fit_slope(
        &points
            .iter()
            .map(|p| (p.param.ln(), p.log_ratio()))
            .collect::<Vec<_>>(),
    );
    Ok(GrowthReport {
        points,
        fitted_slope,
        expected_slope,
        shrink,
        containment_verified,
    })
}

fn vertices_contained(
    datum: &QuiverDatum,
    arrows: &[ArrowGeometry],
    geo: &SourceGeometry,
    source: usize,
    shrink: f64,
    big_r: f64,
    small_r: f64,
) -> bool {
    let d = geo.onb_v.len() + geo.onb_perp.len();
    let axes: Vec<(&DVector<f64>, f64)> = geo
        .onb_v
        .iter()
        .map(|u| (u, shrink * big_r))
        .chain(geo.onb_perp.iter().map(|u| (u, shrink * small_r)))
        .collect();
    let tol = 1e-9;
    for mask in 0..(1usize << d) {
        let mut x = DVector::<f64>::zeros(d);
        for (k, (axis, radius)) in axes.iter().enumerate() {
            let sign = if mask >> k & 1 == 1 { 1.0 } else { -1.0 };
            x += *axis * (sign * radius);
        }
        for (a, g) in datum.arrows().iter().zip(arrows) {
            if a.source != source {
                continue;
            }
            let y = &g.mat * &x;
            for u in &g.onb_w {
                if y.dot(u).abs() > 2.0 * big_r * (1.0 + tol) + tol {
                    return false;
                }
            }
            for u in &g.onb_w_perp {
                if y.dot(u).abs() > 2.0 * small_r * (1.0 + tol) + tol {
                    return false;
                }
            }
        }
    }
    true
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{evaluate_dimension_inequality, Variant};
    use crate::gaussian::{
        optimize_gaussian_constant, ratio_functions_from_argmax, OptStatus, OptimizerConfig,
    };
    use crate::numerics::exact::{rat_frac, RatMatrix};
    use approx::assert_relative_eq;
    use num::Signed;

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

    fn identity_pair() -> QuiverDatum {
        QuiverDatum::new(
            vec![2],
            vec![1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1, 0]])),
                (0, 0, RatMatrix::from_i64_rows(&[&[0, 1]])),
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

    fn unit_gaussians(datum: &QuiverDatum) -> Vec<TestFunction> {
        datum
            .arrows()
            .iter()
            .map(|a| TestFunction::Gaussian {
                form: SpdMatrix::identity(datum.target_dim(a.target)),
            })
            .collect()
    }

    #[test]
    fn gaussian_ratio_on_two_scalings() {
        let d = two_scalings();
        let rep = ratio_gaussian(&d, &unit_gaussians(&d)).unwrap();
        assert_relative_eq!(rep.lhs, 1.0 / 5.0f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(rep.rhs, 1.0 / 2.0f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(rep.ratio, (2.0f64 / 5.0).sqrt(), epsilon = 1e-12);
        assert_eq!(rep.method, RatioMethod::ClosedForm);
        assert!(rep.stderr.is_none());
    }

    #[test]
    fn gaussian_ratio_identity_pair_is_one() {
        let d = identity_pair();
        let rep = ratio_gaussian(&d, &unit_gaussians(&d)).unwrap();
        assert_relative_eq!(rep.ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussians_stay_below_the_gaussian_constant_on_the_chain() {
        let d = overlapping_projections();
        let constant = 2.0 * (2.0f64 / 3.0).powf(1.5);
        let mut prev = f64::INFINITY;
        for t in [1.0f64, 10.0, 100.0] {
            let f = TestFunction::Gaussian {
                form: SpdMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
                    t,
                    1.0 / t,
                ])))
                .unwrap(),
            };
            let rep = ratio_gaussian(&d, &[f.clone(), f]).unwrap();
            assert!(rep.ratio <= constant * (1.0 + 1e-9), "t = {t}");
            assert!(rep.ratio <= prev, "ratio should fall as t grows");
            prev = rep.ratio;
        }
        // At t = 1 the assignment is the extremizer up to scaling.
        let f = TestFunction::Gaussian {
            form: SpdMatrix::identity(2),
        };
        let rep = ratio_gaussian(&d, &[f.clone(), f]).unwrap();
        assert_relative_eq!(rep.ratio, constant, epsilon = 1e-9);
    }

    #[test]
    fn argmax_functions_reproduce_the_optimized_constant() {
        for d in [two_scalings(), young_d1(), doubled_identity()] {
            let est = optimize_gaussian_constant(&d, &OptimizerConfig::default()).unwrap();
            assert_eq!(est.status, OptStatus::Converged);
            let forms = ratio_functions_from_argmax(&d, est.argmax.as_ref().unwrap()).unwrap();
            let fns: Vec<TestFunction> = forms
                .into_iter()
                .map(|form| TestFunction::Gaussian { form })
                .collect();
            let rep = ratio_gaussian(&d, &fns).unwrap();
            assert_relative_eq!(rep.ratio, est.value, max_relative = 1e-6);
        }
    }

    #[test]
    fn singular_gaussian_assignment_is_rejected() {
        // Two functionals (2,0), (0,3) with a Gaussian only "seeing" one
        // direction per arrow still give an SPD source form; instead kill
        // integrability with a single arrow on a 2-D source.
        let d = QuiverDatum::new(
            vec![2],
            vec![1],
            vec![
                (0, 0, RatMatrix::from_i64_rows(&[&[1, 0]])),
                (0, 0, RatMatrix::from_i64_rows(&[&[1, 0]])),
            ],
            vec![rat_frac(1, 2)],
        );
        let err = ratio_gaussian(&d, &unit_gaussians(&d)).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn boxes_chain_matches_symbolic_identities() {
        for n in [rat_int(1), rat_frac(5, 2), rat_int(10), rat_int(100)] {
            let rep = ratio_boxes_chain(&n).unwrap();
            let expected_lhs = n.clone() * n.clone() + n.clone() - Rat::one();
            let expected_area = rat_int(2) * n.clone() - Rat::one();
            assert_eq!(rep.lhs_exact, expected_lhs, "lhs at N = {n}");
            assert_eq!(rep.area_exact, expected_area, "area at N = {n}");
            assert_eq!(
                rep.rhs_squared_exact,
                expected_area.clone() * expected_area.clone() * expected_area.clone()
            );
        }
        let rep = ratio_boxes_chain(&rat_int(100)).unwrap();
        assert_relative_eq!(rep.report.lhs, 10099.0, epsilon = 1e-9);
        assert_relative_eq!(rep.report.rhs, 199.0f64.powf(1.5), epsilon = 1e-6);
        assert_relative_eq!(rep.report.ratio, 10099.0 / 199.0f64.powf(1.5), epsilon = 1e-9);
        assert!(ratio_boxes_chain(&rat_frac(1, 2)).is_err());
    }

    #[test]
    fn boxes_chain_grows_like_sqrt_n() {
        let mut pts = Vec::new();
        for exp in [2i32, 3, 4] {
            let n = rat_int(10i64.pow(exp as u32));
            let rep = ratio_boxes_chain(&n).unwrap();
            pts.push(((10.0f64).powi(exp).ln(), rep.report.ratio.ln()));
        }
        let slope = fit_slope(&pts);
        assert!((slope - 0.5).abs() < 0.02, "slope {slope}");
        // ratio / sqrt(N) approaches 2^{-3/2}.
        let n = 10_000.0f64;
        let rep = ratio_boxes_chain(&rat_int(10_000)).unwrap();
        assert_relative_eq!(
            rep.report.ratio / n.sqrt(),
            2.0f64.powf(-1.5),
            max_relative = 1e-2
        );
    }

    #[test]
    fn powerlaw_ratio_matches_closed_form() {
        for p in [1.5f64, 2.0, 3.0] {
            let rep = ratio_powerlaw(1.0, 1.0, p).unwrap();
            assert_relative_eq!(rep.ratio, 1.0, epsilon = 1e-12);
        }
        let rep = ratio_powerlaw(1.0, 2.0, 1.01).unwrap();
        assert_relative_eq!(rep.ratio, 2.0f64.powf(-0.505), epsilon = 1e-12);
        assert!((rep.ratio - 1.0 / 2.0f64.sqrt()).abs() / (1.0 / 2.0f64.sqrt()) < 0.005);

        let rep = ratio_powerlaw(1.0, 2.0, 2.0).unwrap();
        assert_relative_eq!(rep.ratio, 0.5, epsilon = 1e-12);
        assert_relative_eq!(rep.rhs, 2.0, epsilon = 1e-12);

        // Swapping the coefficients changes nothing.
        let a = ratio_powerlaw(2.0, 1.0, 1.7).unwrap();
        let b = ratio_powerlaw(1.0, 2.0, 1.7).unwrap();
        assert_relative_eq!(a.ratio, b.ratio, epsilon = 1e-15);

        assert!(ratio_powerlaw(1.0, 2.0, 1.0).is_err());
        assert!(ratio_powerlaw(0.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn powerlaw_approaches_the_cauchy_schwarz_limit() {
        let limit = 1.0 / 2.0f64.sqrt();
        let near = ratio_powerlaw(1.0, 2.0, 1.001).unwrap().ratio;
        assert!((near - limit).abs() / limit < 0.01);
        let mut prev = near;
        for p in [1.2f64, 1.5, 2.0, 3.0] {
            let r = ratio_powerlaw(1.0, 2.0, p).unwrap().ratio;
            assert!(r < prev, "ratio should decrease in p");
            prev = r;
        }
    }

    #[test]
    fn monte_carlo_covers_the_gaussian_closed_form() {
        let d = two_scalings();
        let rep = ratio_monte_carlo(&d, &unit_gaussians(&d), 1_000_000, 7).unwrap();
        let exact = (2.0f64 / 5.0).sqrt();
        let se = rep.stderr.unwrap();
        assert!(se > 0.0 && se < 0.01);
        assert!(
            (rep.ratio - exact).abs() <= 3.0 * se,
            "mc {} vs exact {exact} with se {se}",
            rep.ratio
        );
        assert_eq!(rep.method, RatioMethod::MonteCarlo);
    }

    #[test]
    fn monte_carlo_matches_exact_slices_on_the_chain() {
        let d = overlapping_projections();
        let n = rat_int(10);
        let exact = ratio_boxes_chain(&n).unwrap();
        let f = TestFunction::BoxUnion {
            boxes: cross_boxes(&n),
        };
        let rep = ratio_monte_carlo(&d, &[f.clone(), f], 1_000_000, 11).unwrap();
        let se = rep.stderr.unwrap();
        assert!(
            (rep.ratio - exact.report.ratio).abs() <= 3.0 * se,
            "mc {} vs exact {} with se {se}",
            rep.ratio,
            exact.report.ratio
        );
    }

    #[test]
    fn monte_carlo_determinism_and_degenerate_cases() {
        let d = two_scalings();
        let a = ratio_monte_carlo(&d, &unit_gaussians(&d), 40_000, 3).unwrap();
        let b = ratio_monte_carlo(&d, &unit_gaussians(&d), 40_000, 3).unwrap();
        assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());

        // All-zero function: 0/0 is reported as NaN, not an error.
        let zero = TestFunction::BoxUnion { boxes: vec![] };
        let rep = ratio_monte_carlo(&d, &[zero.clone(), zero], 10_000, 3).unwrap();
        assert_eq!(rep.rhs, 0.0);
        assert!(rep.ratio.is_nan());

        assert!(ratio_monte_carlo(&d, &unit_gaussians(&d), 0, 3).is_err());
        let pl = TestFunction::PowerLaw { p: 2.0 };
        assert!(ratio_monte_carlo(&d, &[pl.clone(), pl], 1_000, 3).is_err());
    }

    #[test]
    fn witness_growth_matches_the_exact_exponent() {
        let d = overlapping_projections();
        let family = SubspaceFamily {
            subspaces: vec![Subspace::coordinate(3, &[0])],
        };
        let sweep = ParamSweep::OuterRadius {
            r_small: 1.0,
            values: vec![1e2, 1e3, 1e4, 1e5, 1e6],
        };
        let rep = counterexample_from_witness(&d, &family, &sweep).unwrap();
        assert!(rep.containment_verified);
        assert_eq!(rep.expected_slope, rat_frac(1, 4));
        assert!((rep.fitted_slope - 0.25).abs() < 0.01, "slope {}", rep.fitted_slope);

        // The exact exponent equals the gap of the per-arrow inequality.
        let (lhs, rhs) = evaluate_dimension_inequality(&d, &family, Variant::PerArrow).unwrap();
        assert_eq!(rep.expected_slope, lhs - rhs);

        // The bound truly grows: the last point beats the first.
        assert!(rep.points.last().unwrap().log_ratio() > rep.points[0].log_ratio());
    }

    #[test]
    fn feasible_datum_shows_no_growth() {
        let d = doubled_identity();
        for family in [
            SubspaceFamily {
                subspaces: vec![Subspace::full(1)],
            },
            SubspaceFamily {
                subspaces: vec![Subspace::zero(1)],
            },
        ] {
            let sweep = ParamSweep::OuterRadius {
                r_small: 1.0,
                values: vec![1e2, 1e4, 1e6],
            };
            let rep = counterexample_from_witness(&d, &family, &sweep).unwrap();
            assert!(rep.fitted_slope.abs() < 0.01, "slope {}", rep.fitted_slope);
            assert!(!rep.expected_slope.is_positive());
        }
    }

    #[test]
    fn full_family_realizes_the_scaling_identity() {
        let d = young_d1();
        let family = SubspaceFamily {
            subspaces: vec![Subspace::full(2)],
        };
        let sweep = ParamSweep::OuterRadius {
            r_small: 1.0,
            values: vec![10.0, 100.0, 1000.0],
        };
        let rep = counterexample_from_witness(&d, &family, &sweep).unwrap();
        assert!(rep.expected_slope.is_zero());
        assert!(rep.fitted_slope.abs() < 0.01);
    }

    #[test]
    fn inner_radius_sweep_uses_codimensions() {
        // V = ker B2 = span{(1,0,0)}: shrinking r with R fixed grows the
        // ratio at exponent codim V - w * (codims of images) summed.
        let d = overlapping_projections();
        let family = SubspaceFamily {
            subspaces: vec![Subspace::coordinate(3, &[0])],
        };
        let sweep = ParamSweep::InnerRadius {
            r_large: 1.0,
            values: vec![1.0, 0.1, 0.01, 0.001],
        };
        let rep = counterexample_from_witness(&d, &family, &sweep).unwrap();
        // codim V = 2; images have dims 1 and 0, so codims 1 and 2:
        // 2 - (3/4)(1 + 2) = -1/4.
        assert_eq!(rep.expected_slope, rat_frac(-1, 4));
        assert!((rep.fitted_slope - (-0.25)).abs() < 0.01);
    }

    #[test]
    fn witness_validation_errors() {
        let d = overlapping_projections();
        let sweep = ParamSweep::OuterRadius {
            r_small: 1.0,
            values: vec![10.0, 100.0],
        };
        let empty = SubspaceFamily { subspaces: vec![] };
        assert!(counterexample_from_witness(&d, &empty, &sweep).is_err());
        let wrong_ambient = SubspaceFamily {
            subspaces: vec![Subspace::full(2)],
        };
        assert!(counterexample_from_witness(&d, &wrong_ambient, &sweep).is_err());
        let bad_sweep = ParamSweep::OuterRadius {
            r_small: 2.0,
            values: vec![10.0, 100.0],
        };
        let family = SubspaceFamily {
            subspaces: vec![Subspace::coordinate(3, &[0])],
        };
        assert!(counterexample_from_witness(&d, &family, &bad_sweep).is_err());
        let single_point = ParamSweep::OuterRadius {
            r_small: 1.0,
            values: vec![10.0],
        };
        assert!(counterexample_from_witness(&d, &family, &single_point).is_err());
    }

    #[test]
    fn union_volume_handles_overlaps_exactly() {
        let b1 = RatBox::new(vec![rat_int(0)], vec![rat_int(2)]).unwrap();
        let b2 = RatBox::new(vec![rat_int(1)], vec![rat_int(4)]).unwrap();
        assert_eq!(union_volume(&[b1, b2]).unwrap(), rat_int(4));

        let c = cross_boxes(&rat_int(10));
        assert_eq!(union_volume(&c).unwrap(), rat_int(19));

        let cube = RatBox::new(vec![rat_int(0); 3], vec![rat_int(1); 3]).unwrap();
        assert!(union_volume(&[cube]).is_err());
    }
}
