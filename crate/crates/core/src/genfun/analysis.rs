//! Static analysis of expression trees at a fixed eps: support boxes and
//! regions that need finer sampling.

use super::expr::{Node, SmoothRep, Unary};
use crate::quadrature::Refine;

/// Axis-aligned box; empty when some `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Region {
    pub const FULL: Region = Region { lo: [f64::NEG_INFINITY; 2], hi: [f64::INFINITY; 2] };
    pub const EMPTY: Region = Region { lo: [f64::INFINITY; 2], hi: [f64::NEG_INFINITY; 2] };

    pub fn interval(axis: usize, lo: f64, hi: f64) -> Region {
        let mut b = Region::FULL;
        b.lo[axis] = lo;
        b.hi[axis] = hi;
        b
    }

    pub fn is_empty(&self) -> bool {
        (0..2).any(|i| self.lo[i] > self.hi[i])
    }

    pub fn intersect(&self, o: &Region) -> Region {
        let mut b = *self;
        for i in 0..2 {
            b.lo[i] = b.lo[i].max(o.lo[i]);
            b.hi[i] = b.hi[i].min(o.hi[i]);
        }
        if b.is_empty() {
            Region::EMPTY
        } else {
            b
        }
    }

    pub fn hull(&self, o: &Region) -> Region {
        if self.is_empty() {
            return *o;
        }
        if o.is_empty() {
            return *self;
        }
        let mut b = *self;
        for i in 0..2 {
            b.lo[i] = b.lo[i].min(o.lo[i]);
            b.hi[i] = b.hi[i].max(o.hi[i]);
        }
        b
    }

    pub fn expand(&self, axis: usize, r: f64) -> Region {
        if self.is_empty() {
            return *self;
        }
        let mut b = *self;
        b.lo[axis] -= r;
        b.hi[axis] += r;
        b
    }

    pub fn is_bounded(&self, dim: usize) -> bool {
        self.is_empty() || (0..dim).all(|i| self.lo[i].is_finite() && self.hi[i].is_finite())
    }
}

/// `a * x_axis + b`, or an eps-only constant when `axis` is `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linear {
    pub axis: Option<usize>,
    pub a: f64,
    pub b: f64,
}

impl Linear {
    /// Preimage of the interval `[t0, t1]` on the axis.
    fn preimage(&self, t0: f64, t1: f64) -> (f64, f64) {
        let u = (t0 - self.b) / self.a;
        let v = (t1 - self.b) / self.a;
        (u.min(v), u.max(v))
    }
}

impl SmoothRep {
    /// Detects arguments that are affine in a single variable.
    pub fn linear(&self, eps: f64) -> Option<Linear> {
        if self.is_eps_only() {
            return Some(Linear { axis: None, a: 0.0, b: self.scalar(eps) });
        }
        let join = |p: Linear, q: Linear, sign: f64| -> Option<Linear> {
            let axis = match (p.axis, q.axis) {
                (Some(i), Some(j)) if i != j => return None,
                (Some(i), _) | (_, Some(i)) => Some(i),
                _ => None,
            };
            Some(Linear { axis, a: p.a + sign * q.a, b: p.b + sign * q.b })
        };
        match self.node() {
            Node::Var(i) => Some(Linear { axis: Some(*i), a: 1.0, b: 0.0 }),
            Node::Affine { axis, center, scale } => {
                let s = scale.scalar(eps);
                Some(Linear { axis: Some(*axis), a: 1.0 / s, b: -center.scalar(eps) / s })
            }
            Node::Add(p, q) => join(p.linear(eps)?, q.linear(eps)?, 1.0),
            Node::Sub(p, q) => join(p.linear(eps)?, q.linear(eps)?, -1.0),
            Node::Neg(p) => {
                let l = p.linear(eps)?;
                Some(Linear { a: -l.a, b: -l.b, ..l })
            }
            Node::Mul(p, q) => {
                let (l, c) = if p.is_eps_only() { (q.linear(eps)?, p.scalar(eps)) } else if q.is_eps_only() {
                    (p.linear(eps)?, q.scalar(eps))
                } else {
                    return None;
                };
                Some(Linear { a: l.a * c, b: l.b * c, ..l })
            }
            Node::Div(p, q) if q.is_eps_only() => {
                let l = p.linear(eps)?;
                let c = q.scalar(eps);
                Some(Linear { a: l.a / c, b: l.b / c, ..l })
            }
            _ => None,
        }
    }

    /// A box containing the support at this eps.
    pub fn support_box(&self, eps: f64) -> Region {
        match self.node() {
            Node::Const(c) => {
                if *c == 0.0 {
                    Region::EMPTY
                } else {
                    Region::FULL
                }
            }
            Node::Eps | Node::Coord(..) => {
                if self.scalar(eps) == 0.0 {
                    Region::EMPTY
                } else {
                    Region::FULL
                }
            }
            Node::Var(_) | Node::Affine { .. } => Region::FULL,
            Node::Add(a, b) | Node::Sub(a, b) => a.support_box(eps).hull(&b.support_box(eps)),
            Node::Mul(a, b) => a.support_box(eps).intersect(&b.support_box(eps)),
            Node::Div(a, _) | Node::Neg(a) => a.support_box(eps),
            Node::Powi(a, n) if *n > 0 => a.support_box(eps),
            Node::Powf(a, r) if *r > 0.0 => a.support_box(eps),
            Node::Powi(..) | Node::Powf(..) => Region::FULL,
            Node::Unary(Unary::Sin | Unary::Expm1, a) => a.support_box(eps),
            Node::Unary(..) => Region::FULL,
            Node::Cutoff(c, a) => mapped(a, eps, c.outer.0, c.outer.1),
            Node::Profile(p, a) => mapped(a, eps, -p.r_out, p.r_out),
            Node::Mollifier(m, a) => mapped(a, eps, -m.radius(), m.radius()),
            Node::Convolve(c) => {
                let s = c.scale.scalar(eps).abs();
                c.body.support_box(eps).expand(0, s * c.kernel.radius())
            }
        }
    }

    /// Refinement requests, per axis, for the features of the expression.
    pub fn features(&self, eps: f64) -> [Vec<Refine>; 2] {
        let mut out = [Vec::new(), Vec::new()];
        self.collect_features(eps, &mut out);
        out
    }

    fn collect_features(&self, eps: f64, out: &mut [Vec<Refine>; 2]) {
        let mut push = |arg: &SmoothRep, t0: f64, t1: f64, width: f64| {
            if let Some(l @ Linear { axis: Some(i), .. }) = arg.linear(eps) {
                if l.a != 0.0 && i < 2 {
                    let (lo, hi) = l.preimage(t0, t1);
                    out[i].push(Refine { lo, hi, width: width / l.a.abs() });
                }
            }
        };
        match self.node() {
            Node::Cutoff(c, a) => {
                let w0 = c.inner.0 - c.outer.0;
                let w1 = c.outer.1 - c.inner.1;
                push(a, c.outer.0, c.inner.0, w0 / 8.0);
                push(a, c.inner.1, c.outer.1, w1 / 8.0);
            }
            Node::Profile(p, a) => {
                let w = (p.r_out - p.r_in) / 16.0;
                push(a, p.r_in, p.r_out, w);
                push(a, -p.r_out, -p.r_in, w);
            }
            Node::Mollifier(m, a) => {
                let r = m.radius();
                push(a, -r, r, 0.3 * std::f64::consts::PI / m.params().r_out);
            }
            Node::Unary(u, a) => {
                let w = match u {
                    Unary::Sin | Unary::Cos => 0.5 * std::f64::consts::PI,
                    _ => 1.0,
                };
                push(a, f64::NEG_INFINITY, f64::INFINITY, w);
            }
            _ => {}
        }
        match self.node() {
            Node::Const(_) | Node::Eps | Node::Var(_) | Node::Coord(..) | Node::Affine { .. } => {}
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_features(eps, out);
                b.collect_features(eps, out);
            }
            Node::Neg(a)
            | Node::Powi(a, _)
            | Node::Powf(a, _)
            | Node::Unary(_, a)
            | Node::Cutoff(_, a)
            | Node::Profile(_, a)
            | Node::Mollifier(_, a) => a.collect_features(eps, out),
            Node::Convolve(c) => c.body.collect_features(eps, out),
        }
    }
}

fn mapped(arg: &SmoothRep, eps: f64, t0: f64, t1: f64) -> Region {
    match arg.linear(eps) {
        Some(l @ Linear { axis: Some(i), .. }) if l.a != 0.0 && i < 2 => {
            let (lo, hi) = l.preimage(t0, t1);
            Region::interval(i, lo, hi)
        }
        Some(Linear { axis: None, b, .. }) => {
            if b > t0 && b < t1 {
                Region::FULL
            } else {
                Region::EMPTY
            }
        }
        _ => Region::FULL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::Cutoff;

    #[test]
    fn cutoff_support_maps_back() {
        let psi = Cutoff::centered(0.0, 1.0, 2.0);
        let x = SmoothRep::var(0);
        let u = SmoothRep::cutoff(&psi, (x.clone() - 1.0) / SmoothRep::eps()) * x.cos();
        let b = u.support_box(0.5);
        assert_eq!((b.lo[0], b.hi[0]), (0.0, 2.0));
        assert!(b.lo[1].is_infinite());
        let f = u.features(0.5);
        assert_eq!(f[0].len(), 3);
        let e = (SmoothRep::var(1) * 0.0 + 0.0).support_box(0.1);
        assert!(e.is_empty());
    }
}
