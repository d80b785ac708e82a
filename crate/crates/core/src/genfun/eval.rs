//! Pointwise values and Taylor jets of expression trees.

use super::expr::{Convolution, Node, SmoothRep, Unary};
use super::GenFunError;
use crate::jet::{self, Jet};
use crate::mollifier::MAX_ORDER;
use crate::quadrature;

/// Below this ratio `|direct defect| / scale` the direct quadrature is
/// dominated by cancellation and the remainder route is used.
pub const DIRECT_RATIO: f64 = 1e-6;

/// Taylor order of the remainder route; defects smaller than
/// `O(s^REMAINDER_ORDER)` are not resolved beyond that order.
pub const REMAINDER_ORDER: usize = 12;

/// Nodes of the inner remainder integral over `t in [0, 1]`.
const REMAINDER_T_NODES: usize = 10;

fn x_at(x: &[f64], i: usize) -> f64 {
    x.get(i).copied().unwrap_or(0.0)
}

impl SmoothRep {
    /// Value of an eps-only expression.
    pub fn scalar(&self, eps: f64) -> f64 {
        self.value(eps, &[0.0, 0.0])
    }

    pub fn value(&self, eps: f64, x: &[f64]) -> f64 {
        match self.node() {
            Node::Const(c) => *c,
            Node::Eps => eps,
            Node::Var(i) => x_at(x, *i),
            Node::Coord(p, i) => p.coord(eps, *i),
            Node::Add(a, b) => a.value(eps, x) + b.value(eps, x),
            Node::Sub(a, b) => a.value(eps, x) - b.value(eps, x),
            Node::Mul(a, b) => {
                let va = a.value(eps, x);
                if va == 0.0 {
                    return 0.0;
                }
                va * b.value(eps, x)
            }
            Node::Div(a, b) => {
                let va = a.value(eps, x);
                if va == 0.0 {
                    return 0.0;
                }
                va / b.value(eps, x)
            }
            Node::Neg(a) => -a.value(eps, x),
            Node::Powi(a, n) => a.value(eps, x).powi(*n),
            Node::Powf(a, r) => a.value(eps, x).powf(*r),
            Node::Unary(u, a) => {
                let v = a.value(eps, x);
                match u {
                    Unary::Exp => v.exp(),
                    Unary::Expm1 => v.exp_m1(),
                    Unary::Ln => v.ln(),
                    Unary::Sin => v.sin(),
                    Unary::Cos => v.cos(),
                }
            }
            Node::Affine { axis, center, scale } => (x_at(x, *axis) - center.scalar(eps)) / scale.scalar(eps),
            Node::Cutoff(c, a) => c.eval(a.value(eps, x)),
            Node::Profile(p, a) => p.chi(a.value(eps, x)),
            Node::Mollifier(m, a) => m.eval(a.value(eps, x)),
            Node::Convolve(c) => conv_series(c, eps, x, 0).map(|s| s[0]).unwrap_or(f64::NAN),
        }
    }

    /// Jet of the expression when variable `i` is replaced by `seeds[i]`.
    pub fn jet(&self, eps: f64, seeds: &[Jet]) -> Result<Jet, GenFunError> {
        let s0 = &seeds[0];
        let (dim, order) = (s0.dim(), s0.order());
        if self.is_eps_only() {
            return Ok(Jet::constant(dim, order, self.scalar(eps)));
        }
        let j = match self.node() {
            Node::Const(_) | Node::Eps | Node::Coord(..) => unreachable!(),
            Node::Var(i) => seeds.get(*i).cloned().ok_or(GenFunError::BadDimension(*i + 1))?,
            Node::Add(a, b) => a.jet(eps, seeds)?.add(&b.jet(eps, seeds)?),
            Node::Sub(a, b) => a.jet(eps, seeds)?.sub(&b.jet(eps, seeds)?),
            Node::Mul(a, b) => {
                if a.is_eps_only() {
                    b.jet(eps, seeds)?.scale(a.scalar(eps))
                } else if b.is_eps_only() {
                    a.jet(eps, seeds)?.scale(b.scalar(eps))
                } else {
                    let ja = a.jet(eps, seeds)?;
                    if ja.coeffs().iter().all(|&v| v == 0.0) {
                        return Ok(ja);
                    }
                    ja.mul(&b.jet(eps, seeds)?)
                }
            }
            Node::Div(a, b) => {
                let ja = a.jet(eps, seeds)?;
                if b.is_eps_only() {
                    ja.scale(1.0 / b.scalar(eps))
                } else if ja.coeffs().iter().all(|&v| v == 0.0) {
                    ja
                } else {
                    ja.div(&b.jet(eps, seeds)?)
                }
            }
            Node::Neg(a) => a.jet(eps, seeds)?.neg(),
            Node::Powi(a, n) => a.jet(eps, seeds)?.powi(*n),
            Node::Powf(a, r) => {
                let ja = a.jet(eps, seeds)?;
                let ser = jet::series_powf(ja.value(), *r, order);
                ja.compose(&ser)
            }
            Node::Unary(u, a) => {
                let ja = a.jet(eps, seeds)?;
                let v = ja.value();
                let ser = match u {
                    Unary::Exp => jet::series_exp(v, order),
                    Unary::Expm1 => jet::series_expm1(v, order),
                    Unary::Ln => jet::series_ln(v, order),
                    Unary::Sin => jet::series_sin(v, order),
                    Unary::Cos => jet::series_cos(v, order),
                };
                ja.compose(&ser)
            }
            Node::Affine { axis, center, scale } => {
                let s = seeds.get(*axis).ok_or(GenFunError::BadDimension(*axis + 1))?;
                s.add_scalar(-center.scalar(eps)).scale(1.0 / scale.scalar(eps))
            }
            Node::Cutoff(c, a) => {
                let ja = a.jet(eps, seeds)?;
                let ser = c.series(ja.value(), order);
                if ser.iter().all(|&v| v == 0.0) {
                    return Ok(Jet::constant(dim, order, 0.0));
                }
                ja.compose(&ser)
            }
            Node::Profile(p, a) => {
                let ja = a.jet(eps, seeds)?;
                ja.compose(&p.chi_series(ja.value(), order))
            }
            Node::Mollifier(m, a) => {
                let ja = a.jet(eps, seeds)?;
                let ser = m.taylor(ja.value(), order).map_err(|_| GenFunError::OrderTooHigh(order))?;
                ja.compose(&ser)
            }
            Node::Convolve(c) => {
                if dim > 1 && c.body.vars() & !1 != 0 {
                    return Err(GenFunError::Unsupported("jets of a convolution in two variables".into()));
                }
                let x: Vec<f64> = seeds.iter().map(|s| s.value()).collect();
                let ser = conv_series(c, eps, &x, order)?;
                s0.compose(&ser)
            }
        };
        Ok(j)
    }

    /// Jet at the point `x` in `dim` variables.
    pub fn jet_at(&self, eps: f64, x: &[f64], dim: usize, order: usize) -> Result<Jet, GenFunError> {
        let seeds: Vec<Jet> = (0..dim).map(|i| Jet::variable(dim, order, i, x_at(x, i))).collect();
        self.jet(eps, &seeds)
    }

    /// Taylor coefficients in the first variable at `x`, other variables
    /// held fixed.
    pub fn line_series(&self, eps: f64, x: &[f64], order: usize) -> Result<Vec<f64>, GenFunError> {
        let seeds = [Jet::variable(1, order, 0, x_at(x, 0)), Jet::constant(1, order, x_at(x, 1))];
        Ok(self.jet(eps, &seeds)?.coeffs().to_vec())
    }
}

/// Taylor coefficients of `x0 -> conv(x0, x1)` up to order `m`.
fn conv_series(c: &Convolution, eps: f64, x: &[f64], m: usize) -> Result<Vec<f64>, GenFunError> {
    let s = c.scale.scalar(eps);
    let x0 = x_at(x, 0);
    let x1 = x_at(x, 1);
    let fine = c.kernel.fine_rule();
    let body_at = |y: f64, order: usize| -> Result<Vec<f64>, GenFunError> {
        if order == 0 {
            Ok(vec![c.body.value(eps, &[y, x1])])
        } else {
            c.body.line_series(eps, &[y, x1], order)
        }
    };
    let mut direct = vec![0.0; m + 1];
    let mut scale = 0.0;
    for ((&z, &w), &aw) in fine.nodes.iter().zip(&fine.weights).zip(&fine.abs_weights) {
        if w == 0.0 {
            continue;
        }
        let b = body_at(x0 - s * z, m)?;
        for k in 0..=m {
            direct[k] += w * b[k];
        }
        scale += aw * b[0].abs();
    }
    let q = match c.defect {
        None => return Ok(direct),
        Some(q) => q,
    };
    // terms m_k (-s)^k b^(k)(x) / k!, subtracted for k < q and restored on
    // the remainder route for q <= k < big_q
    let big_q = REMAINDER_ORDER.max(q);
    let moments: Vec<f64> = (0..big_q).map(|k| c.kernel.moment(k)).collect();
    let top = moments.iter().rposition(|&v| v != 0.0).unwrap_or(0);
    if top + m > MAX_ORDER + 8 {
        return Err(GenFunError::OrderTooHigh(top + m));
    }
    let t = body_at(x0, top + m)?;
    let term = |k: usize, beta: usize| moments[k] * (-s).powi(k as i32) * binom(k + beta, beta) * t[k + beta];
    for k in 0..q.min(top + 1) {
        if moments[k] != 0.0 {
            for (beta, d) in direct.iter_mut().enumerate() {
                *d -= term(k, beta);
            }
            scale += term(k, 0).abs();
        }
    }
    if direct[0].abs() >= DIRECT_RATIO * scale || scale == 0.0 {
        return Ok(direct);
    }
    let mut out = remainder_series(c, eps, s, x0, x1, big_q, m)?;
    for k in q..=top {
        if moments[k] != 0.0 {
            for (beta, o) in out.iter_mut().enumerate() {
                *o += term(k, beta);
            }
        }
    }
    Ok(out)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |r, i| r * (n - i) as f64 / (i + 1) as f64)
}

/// `int K(z) R_q(x0, s z) dz` with the integral-form Taylor remainder
/// `R_q(x, h) = (-h)^q / (q-1)! int_0^1 (1-t)^(q-1) b^(q)(x - t h) dt`.
fn remainder_series(
    c: &Convolution,
    eps: f64,
    s: f64,
    x0: f64,
    x1: f64,
    q: usize,
    m: usize,
) -> Result<Vec<f64>, GenFunError> {
    if q == 0 {
        return Err(GenFunError::Unsupported("remainder of order 0".into()));
    }
    if q + m > MAX_ORDER + 8 {
        return Err(GenFunError::OrderTooHigh(q + m));
    }
    let coarse = c.kernel.coarse_rule();
    let mags: Vec<f64> = coarse.nodes.iter().zip(&coarse.abs_weights).map(|(z, a)| a * z.abs().powi(q as i32)).collect();
    let total: f64 = mags.iter().sum();
    let tq = quadrature::gl_rule(REMAINDER_T_NODES);
    let fact: f64 = (1..q).map(|k| k as f64).product();
    let mut out = vec![0.0; m + 1];
    for ((&z, &w), &mag) in coarse.nodes.iter().zip(&coarse.weights).zip(&mags) {
        if mag < 1e-18 * total {
            continue;
        }
        let h = s * z;
        let lead = (-h).powi(q as i32) / fact;
        for &(tn, tw) in tq.iter() {
            let tt = 0.5 * (tn + 1.0);
            let wt = 0.5 * tw * (1.0 - tt).powi(q as i32 - 1);
            let ser = c.body.line_series(eps, &[x0 - tt * h, x1], q + m)?;
            for beta in 0..=m {
                // coefficient beta of b^(q) is (q+beta)!/beta! T[q+beta]
                let d = ser[q + beta] * falling(q + beta, q);
                out[beta] += w * lead * wt * d;
            }
        }
    }
    Ok(out)
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |r, i| r * (n - i) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::{KernelProfile, Mollifier, MollifierParams};

    #[test]
    fn jets_match_values() {
        let x = SmoothRep::var(0);
        let f = (x.clone() * 3.0).cos() * (-(x.clone() * x.clone()) * 0.5).exp();
        let j = f.jet_at(0.1, &[0.4], 1, 2).unwrap();
        let h = 1e-4;
        let fd = (f.value(0.1, &[0.4 + h]) - f.value(0.1, &[0.4 - h])) / (2.0 * h);
        assert!((j.value() - f.value(0.1, &[0.4])).abs() < 1e-15);
        assert!((j.derivative(&[1]) - fd).abs() < 1e-7);
    }

    #[test]
    fn gaussian_convolution_of_quadratic() {
        // rho_s * y^2 = x^2 + s^2, and the order-2 defect is s^2 exactly
        let k = KernelProfile::gaussian();
        let body = SmoothRep::var(0).powi(2);
        let conv = SmoothRep::convolve(k.clone(), SmoothRep::eps(), body.clone());
        assert!((conv.value(0.5, &[1.5]) - 2.5).abs() < 1e-12);
        let d = SmoothRep::convolve_defect(k, SmoothRep::eps(), body, 2);
        assert!((d.value(0.5, &[1.5]) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn remainder_route_sees_below_roundoff() {
        // rho_s * cos = exp(-s^2/2) cos, so the order-4 defect is
        // cos(x)(exp(-s^2/2) - 1 + s^2/2)
        let k = KernelProfile::gaussian();
        let body = SmoothRep::var(0).cos();
        let d = SmoothRep::convolve_defect(k, SmoothRep::eps(), body, 4);
        let s: f64 = 1.0 / 256.0;
        let exact = 0.3f64.cos() * ((-s * s / 2.0).exp_m1() + s * s / 2.0);
        let got = d.value(s, &[0.3]);
        assert!(((got - exact) / exact).abs() < 1e-6, "{got} {exact}");
    }

    #[test]
    fn mollifier_defect_is_tiny_for_smooth_bodies() {
        let mol = Mollifier::build(MollifierParams::default()).unwrap();
        let k = KernelProfile::mollifier(mol);
        let body = SmoothRep::var(0).sin();
        let d = SmoothRep::convolve_defect(k, SmoothRep::eps(), body, 12);
        let a = d.value(1.0 / 64.0, &[0.2]).abs();
        let b = d.value(1.0 / 128.0, &[0.2]).abs();
        assert!(a < 1e-18, "{a}");
        assert!(b < a * 1e-2 || b < 1e-30, "{a} {b}");
    }
}
