//! Probing the support of a functional with families of bumps.

use super::{Context, Functional, Result};
use crate::asymptotics::{is_negligible, EpsNet};
use crate::genfun::{GenFunction, Region, SmoothRep, SpaceTag};
use crate::mollifier::Cutoff;

/// `t^power psi(t)` with `t = (y - c) / h`, `psi = 1` on `|t| <= 1` and
/// `0` beyond `|t| = 1.5`.
pub fn probe_bump(c: f64, h: f64, power: i32) -> GenFunction {
    let psi = Cutoff::centered(0.0, 1.0, 1.5);
    let t = SmoothRep::affine(0, SmoothRep::constant(c), SmoothRep::constant(h));
    let rep = if power == 0 { SmoothRep::cutoff(&psi, t) } else { t.powi(power) * SmoothRep::cutoff(&psi, t) };
    GenFunction::new(rep, 1)
        .unwrap()
        .with_support(Region::interval(0, c - 1.5 * h, c + 1.5 * h))
        .with_tag(SpaceTag::Gc)
}

fn vanishes(net: &EpsNet, ctx: &Context) -> bool {
    // an ambiguous net that is not below the envelope counts as non-zero
    is_negligible(net, &ctx.asym).unwrap_or(false)
}

fn cell_active(t: &Functional, c: f64, h: f64, ctx: &Context) -> Result<bool> {
    for power in 0..3 {
        let net = t.apply_net(&probe_bump(c, h, power), ctx)?;
        if !vanishes(&net, ctx) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Points of `[lo, hi]` near which `t` does not vanish, resolved at `radius`.
///
/// The window is cut into 16 cells; every cell whose probes are not all
/// negligible is bisected until the cell half-width is at most `radius / 2`.
/// Surviving cells are clustered greedily from the left, a cluster spanning
/// at most `radius`; each cluster is reported by its mean, so an interval
/// of support comes back as points spaced about `radius` apart.
pub fn support_probe(t: &Functional, window: (f64, f64), radius: f64, ctx: &Context) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    let n0 = 16;
    let mut h = 0.5 * (hi - lo) / n0 as f64;
    let mut cells: Vec<f64> = (0..n0).map(|i| lo + (2 * i + 1) as f64 * h).collect();
    loop {
        let mut live = Vec::new();
        for &c in &cells {
            if cell_active(t, c, h, ctx)? {
                live.push(c);
            }
        }
        if h <= 0.5 * radius || live.is_empty() {
            cells = live;
            break;
        }
        h *= 0.5;
        cells = live.iter().flat_map(|&c| [c - h, c + h]).collect();
    }
    let mut out = Vec::new();
    let mut group: Vec<f64> = Vec::new();
    for c in cells {
        if group.first().is_some_and(|&p| c - p > radius) {
            out.push(group.iter().sum::<f64>() / group.len() as f64);
            group.clear();
        }
        group.push(c);
    }
    if !group.is_empty() {
        out.push(group.iter().sum::<f64>() / group.len() as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::delta;
    use crate::scalars::GenPoint;

    #[test]
    fn supports_of_deltas() {
        let ctx = Context::default();
        let d = delta(&GenPoint::constant(&[0.7]), &ctx).unwrap();
        let s = support_probe(&d, (-3.0, 3.0), 1e-3, &ctx).unwrap();
        assert_eq!(s.len(), 1, "{s:?}");
        assert!((s[0] - 0.7).abs() <= 1e-3);
        let far = delta(&GenPoint::dilated(&[0.7], 1.0), &ctx).unwrap();
        assert!(support_probe(&far, (-3.0, 3.0), 1e-3, &ctx).unwrap().is_empty());
    }
}
