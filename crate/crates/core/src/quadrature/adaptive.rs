//! Globally adaptive bisection with paired Gauss rules, plus a tanh-sinh
//! ladder used when no endpoint behaviour is declared and bisection stalls.

use super::rules::cached_rule;
use super::{pairwise_sum, Node, QuadResult, QuadSpec};
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct EndpointWeights {
    pub left: Option<f64>,
    pub right: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    inner: f64,
    converged: bool,
}

#[derive(PartialEq)]
struct Queued {
    error: f64,
    index: usize,
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then(other.index.cmp(&self.index))
    }
}

struct RuleSum {
    value: f64,
    inner: f64,
    nodes: usize,
    converged: bool,
}

#[allow(clippy::too_many_arguments)]
fn apply_rule<F>(
    f: &mut F,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    left: Option<f64>,
    right: Option<f64>,
    m: usize,
) -> Result<RuleSum>
where
    F: FnMut(Node) -> Result<QuadResult>,
{
    // Jacobi convention: α sits on (1 − t), i.e. the right end
    let rule = cached_rule(m, right.unwrap_or(0.0), left.unwrap_or(0.0));
    let half = 0.5 * (hi - lo);
    let scale = half.powf(1.0 + left.unwrap_or(0.0) + right.unwrap_or(0.0));
    let mut terms = Vec::with_capacity(m);
    let mut inner = 0.0;
    let mut nodes = 0;
    let mut converged = true;
    for i in 0..rule.nodes.len() {
        let off_lo = half * rule.one_plus[i];
        let off_hi = half * rule.one_minus[i];
        let x = if rule.nodes[i] <= 0.0 { lo + off_lo } else { hi - off_hi };
        let node = Node { x, from_left: (lo - a) + off_lo, from_right: (b - hi) + off_hi };
        let r = f(node)?;
        if !r.value.is_finite() {
            return Err(Error::NonFiniteSample(x));
        }
        let mut weight = 1.0;
        if let Some(e) = left {
            weight *= off_lo.powf(e);
        }
        if let Some(e) = right {
            weight *= off_hi.powf(e);
        }
        let g = r.value / weight;
        if !g.is_finite() {
            return Err(Error::NonFiniteSample(x));
        }
        terms.push(rule.weights[i] * g);
        inner += rule.weights[i] * r.error_estimate / weight;
        nodes += r.nodes_used;
        converged &= r.converged;
    }
    Ok(RuleSum { value: pairwise_sum(&mut terms) * scale, inner: inner * scale, nodes, converged })
}

#[allow(clippy::too_many_arguments)]
fn eval_panel<F>(
    f: &mut F,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    w: EndpointWeights,
    m: usize,
    nodes: &mut usize,
    evals: &mut usize,
) -> Result<Panel>
where
    F: FnMut(Node) -> Result<QuadResult>,
{
    let left = if lo == a { w.left } else { None };
    let right = if hi == b { w.right } else { None };
    let coarse = apply_rule(f, a, b, lo, hi, left, right, m)?;
    let fine = apply_rule(f, a, b, lo, hi, left, right, 2 * m)?;
    *nodes += coarse.nodes + fine.nodes;
    *evals += 3 * m;
    Ok(Panel {
        lo,
        hi,
        value: fine.value,
        error: (fine.value - coarse.value).abs(),
        inner: fine.inner,
        converged: coarse.converged && fine.converged,
    })
}

/// Adaptive integration of f over the finite interval [a, b].
pub(crate) fn adaptive<F>(
    f: &mut F,
    a: f64,
    b: f64,
    w: EndpointWeights,
    spec: &QuadSpec,
) -> Result<QuadResult>
where
    F: FnMut(Node) -> Result<QuadResult>,
{
    let m = spec.order;
    // nodes_used includes nested evaluations; the budget counts this pass only
    let mut nodes = 0usize;
    let mut evals = 0usize;
    let mut panels = vec![eval_panel(f, a, b, a, b, w, m, &mut nodes, &mut evals)?];
    let mut heap = BinaryHeap::new();
    heap.push(Queued { error: panels[0].error, index: 0 });
    let mut total_value = panels[0].value;
    let mut total_error = panels[0].error;
    let mut total_inner = panels[0].inner;
    let per_split = 6 * m;
    let converged = loop {
        let tol = spec.tolerance_for(total_value);
        if total_error + total_inner <= tol {
            break true;
        }
        if total_inner > tol || evals + per_split > spec.max_nodes {
            break false;
        }
        let Some(Queued { index, .. }) = heap.pop() else { break false };
        let p = panels[index];
        let mid = p.lo + 0.5 * (p.hi - p.lo);
        if !(mid > p.lo && mid < p.hi) {
            // cannot refine further; leave the panel out of the queue
            continue;
        }
        let left = eval_panel(f, a, b, p.lo, mid, w, m, &mut nodes, &mut evals)?;
        let right = eval_panel(f, a, b, mid, p.hi, w, m, &mut nodes, &mut evals)?;
        total_value += left.value + right.value - p.value;
        total_error += left.error + right.error - p.error;
        total_inner += left.inner + right.inner - p.inner;
        panels[index] = left;
        heap.push(Queued { error: left.error, index });
        panels.push(right);
        heap.push(Queued { error: right.error, index: panels.len() - 1 });
    };
    panels.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut values: Vec<f64> = panels.iter().map(|p| p.value).collect();
    let mut errors: Vec<f64> = panels.iter().map(|p| p.error + p.inner).collect();
    Ok(QuadResult {
        value: pairwise_sum(&mut values),
        error_estimate: pairwise_sum(&mut errors),
        nodes_used: nodes,
        converged: converged && panels.iter().all(|p| p.converged),
    })
}

/// Deepest tanh-sinh level; the step is 2^-level.
const TANH_SINH_MAX_LEVEL: u32 = 12;
/// Truncation of the transformed axis; node gaps reach about 1e-19 of the
/// half-width there.
const TANH_SINH_TMAX: f64 = 3.4;

/// Double-exponential quadrature on [a, b] with level doubling.
pub(crate) fn tanh_sinh<F>(f: &mut F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult>
where
    F: FnMut(Node) -> Result<QuadResult>,
{
    let half = 0.5 * (b - a);
    let mut nodes = 0usize;
    let mut evals = 0usize;
    let mut sample = |t: f64, nodes: &mut usize, evals: &mut usize| -> Result<(f64, f64, bool)> {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // distances to the near and far ends, free of cancellation
        let near = half * 2.0 * e / (1.0 + e);
        let far = half * 2.0 / (1.0 + e);
        let (from_left, from_right) = if u < 0.0 { (near, far) } else { (far, near) };
        let x = if u < 0.0 { a + from_left } else { b - from_right };
        let ch = u.cosh();
        let w = half * std::f64::consts::FRAC_PI_2 * t.cosh() / (ch * ch);
        if w == 0.0 || from_left == 0.0 || from_right == 0.0 {
            return Ok((0.0, 0.0, true));
        }
        let r = f(Node { x, from_left, from_right })?;
        *nodes += r.nodes_used;
        *evals += 1;
        if !r.value.is_finite() {
            return Err(Error::NonFiniteSample(x));
        }
        Ok((w * r.value, w * r.error_estimate, r.converged))
    };
    let mut terms = Vec::new();
    let mut inner = Vec::new();
    let mut all_converged = true;
    // level 0: step 1
    let steps = TANH_SINH_TMAX as i64;
    for k in -steps..=steps {
        let (v, e, ok) = sample(k as f64, &mut nodes, &mut evals)?;
        terms.push(v);
        inner.push(e);
        all_converged &= ok;
    }
    let mut h = 1.0;
    let mut previous = pairwise_sum(&mut terms.clone()) * h;
    let mut result = QuadResult {
        value: previous,
        error_estimate: f64::INFINITY,
        nodes_used: nodes,
        converged: false,
    };
    for _level in 1..=TANH_SINH_MAX_LEVEL {
        h *= 0.5;
        let count = (TANH_SINH_TMAX / h) as i64;
        for j in (1..=count).step_by(2) {
            for t in [-(j as f64) * h, j as f64 * h] {
                let (v, e, ok) = sample(t, &mut nodes, &mut evals)?;
                terms.push(v);
                inner.push(e);
                all_converged &= ok;
            }
        }
        let value = pairwise_sum(&mut terms.clone()) * h;
        let inner_err = pairwise_sum(&mut inner.clone()).abs() * h;
        let error = (value - previous).abs() + inner_err;
        previous = value;
        result = QuadResult { value, error_estimate: error, nodes_used: nodes, converged: false };
        if error <= spec.tolerance_for(value) {
            result.converged = all_converged;
            break;
        }
        if evals > spec.max_nodes {
            break;
        }
    }
    Ok(result)
}
