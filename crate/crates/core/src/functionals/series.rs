//! Series of delta functionals and the Taylor expansion of `delta_[eps]`.

use serde::{Deserialize, Serialize};

use super::{Context, FunctionalError, Result};
use crate::asymptotics::{DecayClass, DecayEstimate, EpsNet};
use crate::genfun::{cube, seminorm_net, GenFunError, GenFunction};
use crate::quadrature;
use crate::scalars::GenPoint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub q: u32,
    pub last: u32,
    pub estimate: DecayEstimate,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDeltaReport {
    pub terms: Vec<DecayClass>,
    /// First index after which every term vanishes identically.
    pub horizon: Option<u32>,
    pub tails: Vec<TailRow>,
}

/// Partial sums of `sum_n delta_{x_n}(u)`. The tail `sum_{n=q+N}^{q+N+span}`
/// is expected to have order at least `q` when `(1+|x|)^N |u_eps|` is
/// bounded; the bound is checked with half an order of slack.
pub fn series_delta<P>(points: P, u: &GenFunction, growth: u32, q_probe: u32, span: u32, ctx: &Context) -> Result<SeriesDeltaReport>
where
    P: Fn(u32) -> GenPoint,
{
    let last = q_probe + growth + span;
    let mut terms = Vec::new();
    let mut nets = Vec::new();
    for n in 0..=last {
        let p = points(n);
        let net = EpsNet::sample_real(&ctx.grid, |e| u.value(e, &p.at(e)));
        if net.values.iter().any(|v| !v.re.is_finite()) {
            return Err(GenFunError::NonFinite { eps: f64::NAN }.into());
        }
        terms.push(net.estimate(&ctx.asym)?.class);
        nets.push(net);
    }
    let horizon = (0..=last).find(|&n| terms[n as usize..].iter().all(|c| *c == DecayClass::IdenticallyZero));
    let mut tails = Vec::new();
    for q in 1..=q_probe {
        let first = (q + growth) as usize;
        let mut sum = nets[first].clone();
        for net in &nets[first + 1..] {
            sum = sum.zip_with(net, |a, b| a + b)?;
        }
        let estimate = sum.estimate(&ctx.asym)?;
        let bound = q as f64 - 0.5;
        let pass = estimate.class.order_lower_bound().is_some_and(|b| b >= bound);
        tails.push(TailRow { q, last, estimate, bound, pass });
    }
    Ok(SeriesDeltaReport { terms, horizon, tails })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorRow {
    pub q: usize,
    /// `u(eps) - sum_{i <= q} eps^i / i! u^(i)(0)`.
    pub defect: DecayEstimate,
    /// Growth order of `u^(q+1)` near the origin.
    pub growth: f64,
    pub bound: f64,
    pub meets_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    /// Class of each coefficient net `eps^i / i! u^(i)(0)`.
    pub coefficients: Vec<DecayClass>,
    pub rows: Vec<TaylorRow>,
    #[serde(skip)]
    pub defects: Vec<EpsNet>,
}

/// Per-eps Taylor defect through the integral remainder
/// `eps^{q+1}/q! int_0^1 (1-t)^q u^(q+1)(t eps) dt`.
fn taylor_defect(u: &GenFunction, q: usize, eps: f64) -> Result<f64> {
    let gl = quadrature::gl_rule(16);
    let fact: f64 = (1..=q).map(|i| i as f64).product();
    let dfact = fact * (q + 1) as f64;
    let mut acc = 0.0;
    for &(tn, tw) in gl.iter() {
        let t = 0.5 * (tn + 1.0);
        let s = u.rep().line_series(eps, &[t * eps], q + 1)?;
        acc += 0.5 * tw * (1.0 - t).powi(q as i32) * s[q + 1] * dfact;
    }
    Ok(eps.powi(q as i32 + 1) / fact * acc)
}

pub fn taylor_delta_series(u: &GenFunction, q_max: usize, ctx: &Context) -> Result<TaylorReport> {
    if u.dim() != 1 {
        return Err(GenFunError::BadDimension(u.dim()).into());
    }
    if q_max + 1 > ctx.genfun.max_order {
        return Err(FunctionalError::GenFun(GenFunError::OrderTooHigh(q_max + 1)));
    }
    let mut coefficients = Vec::new();
    for i in 0..=q_max {
        let net = EpsNet::try_sample_real(&ctx.grid, |e| -> Result<f64> {
            let s = u.rep().line_series(e, &[0.0], i)?;
            Ok(e.powi(i as i32) * s[i])
        })?;
        coefficients.push(net.estimate(&ctx.asym)?.class);
    }
    let k = cube(1, -1.0, 1.0);
    let mut rows = Vec::new();
    let mut defects = Vec::new();
    for q in 0..=q_max {
        let net = EpsNet::try_sample_real(&ctx.grid, |e| taylor_defect(u, q, e))?;
        let defect = net.estimate(&ctx.asym)?;
        let g = seminorm_net(u, &k, q + 1, &ctx.grid, &ctx.genfun)?.estimate(&ctx.asym)?;
        let growth = match g.class {
            DecayClass::Order(a) => (-a).max(0.0),
            DecayClass::BeyondOrder(_) | DecayClass::IdenticallyZero => 0.0,
            DecayClass::Ambiguous => f64::NAN,
        };
        let bound = q as f64 + 1.0 - growth;
        let meets_bound = defect.class.order_lower_bound().is_some_and(|b| b >= bound - 0.5);
        rows.push(TaylorRow { q, defect, growth, bound, meets_bound });
        defects.push(net);
    }
    Ok(TaylorReport { coefficients, rows, defects })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{Region, SmoothRep, SpaceTag};
    use crate::mollifier::Cutoff;

    fn x() -> SmoothRep {
        SmoothRep::var(0)
    }

    #[test]
    fn series_tails() {
        let ctx = Context::default();
        let u = GenFunction::new((1.0 + x().powi(2)).powf(-0.5), 1).unwrap().with_tag(SpaceTag::GTau);
        let r = series_delta(|n| GenPoint::dilated(&[1.0], n as f64), &u, 0, 4, 4, &ctx).unwrap();
        assert!(r.tails.iter().all(|t| t.pass), "{:?}", r.tails);
        let psi = Cutoff::centered(0.0, 9.0, 10.0);
        let c = GenFunction::new(SmoothRep::cutoff(&psi, x()) * x().cos(), 1)
            .unwrap()
            .with_support(Region::interval(0, -10.0, 10.0))
            .with_tag(SpaceTag::Gc);
        let r = series_delta(|n| GenPoint::dilated(&[1.0], n as f64), &c, 0, 2, 2, &ctx).unwrap();
        assert_eq!(r.horizon, Some(1));
        assert!(r.terms[1..].iter().all(|t| *t == DecayClass::IdenticallyZero));
    }

    #[test]
    fn taylor_rows() {
        let ctx = Context::default();
        let u = GenFunction::new(x().sin() + (x() * 0.5).exp(), 1).unwrap();
        let r = taylor_delta_series(&u, 4, &ctx).unwrap();
        let row = &r.rows[4];
        assert!(row.defect.slope.unwrap() >= 4.5, "{row:?}");
        assert!(r.rows.iter().all(|r| r.meets_bound));
        let osc = GenFunction::new((x() / SmoothRep::eps()).sin() * (-(x().powi(2))).exp(), 1).unwrap();
        let r = taylor_delta_series(&osc, 6, &ctx).unwrap();
        for row in &r.rows {
            assert!(row.defect.slope.unwrap() <= 0.1, "{row:?}");
        }
        let c = GenFunction::constant(2.0, 1);
        let r = taylor_delta_series(&c, 3, &ctx).unwrap();
        assert!(r.coefficients[1..].iter().all(|c| *c == DecayClass::IdenticallyZero));
        assert!(r.rows.iter().all(|r| r.defect.class == DecayClass::IdenticallyZero));
        assert!(taylor_delta_series(&c, 8, &ctx).is_err());
    }
}
