//! Composite Gauss-Legendre rules over panel breakpoints.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

/// Nodes and weights on [-1, 1].
pub fn gl_rule(n: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("rule order must be positive"));
            let mut v: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(v)
        })
        .clone()
}

/// A refinement request: panels inside `[lo, hi]` are at most `width` wide.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refine {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("panel budget exceeded: {needed} > {budget}")]
pub struct PanelBudget {
    pub needed: usize,
    pub budget: usize,
}

/// Breakpoints covering `[lo, hi]`: `base_panels` equal panels, subdivided
/// further wherever refinement requests apply.
pub fn breakpoints(
    lo: f64,
    hi: f64,
    base_panels: usize,
    refine: &[Refine],
    budget: usize,
) -> Result<Vec<f64>, PanelBudget> {
    if !(hi > lo) {
        return Ok(vec![]);
    }
    let base = (hi - lo) / base_panels.max(1) as f64;
    let mut crit = vec![lo, hi];
    for r in refine {
        for p in [r.lo, r.hi] {
            if p > lo && p < hi {
                crit.push(p);
            }
        }
    }
    crit.sort_by(f64::total_cmp);
    crit.dedup();
    let mut out = vec![lo];
    for w in crit.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let mut width = base;
        for r in refine {
            if mid >= r.lo && mid <= r.hi && r.width > 0.0 {
                width = width.min(r.width);
            }
        }
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        if out.len() + n > budget {
            return Err(PanelBudget { needed: out.len() + n, budget });
        }
        for i in 1..=n {
            out.push(if i == n { b } else { a + (b - a) * i as f64 / n as f64 });
        }
    }
    Ok(out)
}

/// Breakpoints for `[lo, hi]` with panels of width `h` on `[-core, core]`,
/// growing geometrically by `ratio` outside, then refined as requested.
pub fn graded_breakpoints(
    lo: f64,
    hi: f64,
    h: f64,
    core: f64,
    ratio: f64,
    refine: &[Refine],
    budget: usize,
) -> Result<Vec<f64>, PanelBudget> {
    if !(hi > lo) {
        return Ok(vec![]);
    }
    let mut crit = vec![lo, hi];
    let (c0, c1) = (lo.max(-core), hi.min(core));
    if c1 > c0 {
        let n = ((c1 - c0) / h).ceil() as usize;
        crit.extend((1..n).map(|i| c0 + (c1 - c0) * i as f64 / n as f64));
        crit.push(c0);
        crit.push(c1);
    }
    let mut w = h;
    let mut t = core;
    while t < hi.abs().max(lo.abs()) {
        w *= ratio;
        t += w;
        crit.push(t);
        crit.push(-t);
    }
    crit.retain(|p| *p >= lo && *p <= hi);
    if crit.len() == 2 {
        crit.extend((1..8).map(|i| lo + (hi - lo) * i as f64 / 8.0));
    }
    for r in refine {
        crit.push(r.lo);
        crit.push(r.hi);
    }
    crit.retain(|p| p.is_finite() && *p >= lo && *p <= hi);
    crit.sort_by(f64::total_cmp);
    crit.dedup();
    let mut out = vec![lo];
    for w in crit.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let mut width = f64::INFINITY;
        for r in refine {
            if mid >= r.lo && mid <= r.hi && r.width > 0.0 {
                width = width.min(r.width);
            }
        }
        let n = if width.is_finite() { ((b - a) / width).ceil().max(1.0) as usize } else { 1 };
        if out.len() + n > budget {
            return Err(PanelBudget { needed: out.len() + n, budget });
        }
        for i in 1..=n {
            out.push(if i == n { b } else { a + (b - a) * i as f64 / n as f64 });
        }
    }
    Ok(out)
}

/// Split every panel in two.
pub fn bisect(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * breaks.len());
    for (i, w) in breaks.windows(2).enumerate() {
        if i == 0 {
            out.push(w[0]);
        }
        out.push(0.5 * (w[0] + w[1]));
        out.push(w[1]);
    }
    out
}

/// Absolute nodes and weights of the composite rule.
pub fn composite_nodes(breaks: &[f64], order: usize) -> Vec<(f64, f64)> {
    let rule = gl_rule(order);
    let mut out = Vec::with_capacity(breaks.len().saturating_sub(1) * order);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        for &(x, wt) in rule.iter() {
            out.push((c + h * x, h * wt));
        }
    }
    out
}

pub fn integrate<F: FnMut(f64) -> f64>(breaks: &[f64], order: usize, mut f: F) -> f64 {
    composite_nodes(breaks, order).into_iter().map(|(x, w)| w * f(x)).sum()
}
