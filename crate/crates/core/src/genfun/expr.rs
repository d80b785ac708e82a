//! Expression trees for smooth representatives `(eps, x) -> u_eps(x)`.

use std::fmt;
use std::ops;
use std::sync::Arc;

use crate::mollifier::{Cutoff, KernelProfile, Mollifier, SpectralProfile};
use crate::scalars::GenPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unary {
    Exp,
    Expm1,
    Ln,
    Sin,
    Cos,
}

/// Convolution in the first variable:
/// `int K(z) body(x - s z) dz`, or, when `defect` is set, that integral
/// minus `sum_{k < Q} m_k (-s)^k body^(k)(x) / k!` with the kernel's exact
/// moments `m_k`.
#[derive(Clone, Debug)]
pub struct Convolution {
    pub kernel: KernelProfile,
    pub scale: SmoothRep,
    pub body: SmoothRep,
    pub defect: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum Node {
    Const(f64),
    Eps,
    Var(usize),
    Coord(GenPoint, usize),
    Add(SmoothRep, SmoothRep),
    Sub(SmoothRep, SmoothRep),
    Mul(SmoothRep, SmoothRep),
    Div(SmoothRep, SmoothRep),
    Neg(SmoothRep),
    Powi(SmoothRep, i32),
    Powf(SmoothRep, f64),
    Unary(Unary, SmoothRep),
    /// `(x_axis - center) / scale`, both eps-only.
    Affine { axis: usize, center: SmoothRep, scale: SmoothRep },
    Cutoff(Arc<Cutoff>, SmoothRep),
    Profile(Arc<SpectralProfile>, SmoothRep),
    Mollifier(Arc<Mollifier>, SmoothRep),
    Convolve(Box<Convolution>),
}

/// Shared, immutable expression node.
#[derive(Clone, Debug)]
pub struct SmoothRep(pub(crate) Arc<Node>);

impl SmoothRep {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(n: Node) -> SmoothRep {
        SmoothRep(Arc::new(n))
    }

    pub fn constant(c: f64) -> SmoothRep {
        SmoothRep::wrap(Node::Const(c))
    }

    pub fn eps() -> SmoothRep {
        SmoothRep::wrap(Node::Eps)
    }

    pub fn var(i: usize) -> SmoothRep {
        SmoothRep::wrap(Node::Var(i))
    }

    pub fn coord(p: &GenPoint, i: usize) -> SmoothRep {
        SmoothRep::wrap(Node::Coord(p.clone(), i))
    }

    /// `eps^r`.
    pub fn eps_pow(r: f64) -> SmoothRep {
        if r == 1.0 {
            return SmoothRep::eps();
        }
        SmoothRep::eps().powf(r)
    }

    pub fn powi(&self, n: i32) -> SmoothRep {
        SmoothRep::wrap(Node::Powi(self.clone(), n))
    }

    pub fn powf(&self, r: f64) -> SmoothRep {
        SmoothRep::wrap(Node::Powf(self.clone(), r))
    }

    pub fn sqrt(&self) -> SmoothRep {
        self.powf(0.5)
    }

    fn unary(&self, u: Unary) -> SmoothRep {
        SmoothRep::wrap(Node::Unary(u, self.clone()))
    }

    pub fn exp(&self) -> SmoothRep {
        self.unary(Unary::Exp)
    }

    pub fn expm1(&self) -> SmoothRep {
        self.unary(Unary::Expm1)
    }

    pub fn ln(&self) -> SmoothRep {
        self.unary(Unary::Ln)
    }

    pub fn sin(&self) -> SmoothRep {
        self.unary(Unary::Sin)
    }

    pub fn cos(&self) -> SmoothRep {
        self.unary(Unary::Cos)
    }

    pub fn affine(axis: usize, center: SmoothRep, scale: SmoothRep) -> SmoothRep {
        SmoothRep::wrap(Node::Affine { axis, center, scale })
    }

    pub fn cutoff(c: &Cutoff, arg: SmoothRep) -> SmoothRep {
        SmoothRep::wrap(Node::Cutoff(Arc::new(c.clone()), arg))
    }

    pub fn profile(p: &SpectralProfile, arg: SmoothRep) -> SmoothRep {
        SmoothRep::wrap(Node::Profile(Arc::new(p.clone()), arg))
    }

    pub fn mollifier(m: &Arc<Mollifier>, arg: SmoothRep) -> SmoothRep {
        SmoothRep::wrap(Node::Mollifier(m.clone(), arg))
    }

    pub fn convolve(kernel: KernelProfile, scale: SmoothRep, body: SmoothRep) -> SmoothRep {
        SmoothRep::wrap(Node::Convolve(Box::new(Convolution { kernel, scale, body, defect: None })))
    }

    pub fn convolve_defect(kernel: KernelProfile, scale: SmoothRep, body: SmoothRep, order: usize) -> SmoothRep {
        SmoothRep::wrap(Node::Convolve(Box::new(Convolution { kernel, scale, body, defect: Some(order) })))
    }

    /// Bit set of the variables the expression depends on.
    pub fn vars(&self) -> u8 {
        match self.node() {
            Node::Const(_) | Node::Eps | Node::Coord(..) => 0,
            Node::Var(i) => 1 << i,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.vars() | b.vars(),
            Node::Neg(a) | Node::Powi(a, _) | Node::Powf(a, _) | Node::Unary(_, a) => a.vars(),
            Node::Affine { axis, .. } => 1 << axis,
            Node::Cutoff(_, a) | Node::Profile(_, a) | Node::Mollifier(_, a) => a.vars(),
            Node::Convolve(c) => c.body.vars() | 1,
        }
    }

    pub fn is_eps_only(&self) -> bool {
        self.vars() == 0
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        8 - self.vars().leading_zeros() as usize
    }

    /// Replace `Var(axis)` by `with`.
    pub fn substitute(&self, axis: usize, with: &SmoothRep) -> SmoothRep {
        let s = |r: &SmoothRep| r.substitute(axis, with);
        let n = match self.node() {
            Node::Var(i) if *i == axis => return with.clone(),
            Node::Const(_) | Node::Eps | Node::Var(_) | Node::Coord(..) => return self.clone(),
            Node::Add(a, b) => Node::Add(s(a), s(b)),
            Node::Sub(a, b) => Node::Sub(s(a), s(b)),
            Node::Mul(a, b) => Node::Mul(s(a), s(b)),
            Node::Div(a, b) => Node::Div(s(a), s(b)),
            Node::Neg(a) => Node::Neg(s(a)),
            Node::Powi(a, k) => Node::Powi(s(a), *k),
            Node::Powf(a, r) => Node::Powf(s(a), *r),
            Node::Unary(u, a) => Node::Unary(*u, s(a)),
            Node::Affine { axis: ax, center, scale } if *ax == axis => {
                return (with.clone() - center.clone()) / scale.clone();
            }
            Node::Affine { .. } => return self.clone(),
            Node::Cutoff(c, a) => Node::Cutoff(c.clone(), s(a)),
            Node::Profile(p, a) => Node::Profile(p.clone(), s(a)),
            Node::Mollifier(m, a) => Node::Mollifier(m.clone(), s(a)),
            Node::Convolve(_) => return self.clone(),
        };
        SmoothRep::wrap(n)
    }
}

impl From<f64> for SmoothRep {
    fn from(c: f64) -> SmoothRep {
        SmoothRep::constant(c)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $node:ident) => {
        impl ops::$tr<SmoothRep> for SmoothRep {
            type Output = SmoothRep;
            fn $m(self, o: SmoothRep) -> SmoothRep {
                SmoothRep::wrap(Node::$node(self, o))
            }
        }
        impl ops::$tr<&SmoothRep> for &SmoothRep {
            type Output = SmoothRep;
            fn $m(self, o: &SmoothRep) -> SmoothRep {
                SmoothRep::wrap(Node::$node(self.clone(), o.clone()))
            }
        }
        impl ops::$tr<f64> for SmoothRep {
            type Output = SmoothRep;
            fn $m(self, o: f64) -> SmoothRep {
                SmoothRep::wrap(Node::$node(self, SmoothRep::constant(o)))
            }
        }
        impl ops::$tr<SmoothRep> for f64 {
            type Output = SmoothRep;
            fn $m(self, o: SmoothRep) -> SmoothRep {
                SmoothRep::wrap(Node::$node(SmoothRep::constant(self), o))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for SmoothRep {
    type Output = SmoothRep;
    fn neg(self) -> SmoothRep {
        SmoothRep::wrap(Node::Neg(self))
    }
}

impl fmt::Display for SmoothRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Eps => write!(f, "eps"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Coord(p, i) => write!(f, "{}[{i}]", p.label()),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/{b}"),
            Node::Neg(a) => write!(f, "-{a}"),
            Node::Powi(a, n) => write!(f, "{a}^{n}"),
            Node::Powf(a, r) => write!(f, "{a}^{r}"),
            Node::Unary(u, a) => {
                let name = match u {
                    Unary::Exp => "exp",
                    Unary::Expm1 => "expm1",
                    Unary::Ln => "ln",
                    Unary::Sin => "sin",
                    Unary::Cos => "cos",
                };
                write!(f, "{name}({a})")
            }
            Node::Affine { axis, center, scale } => write!(f, "((x{axis} - {center})/{scale})"),
            Node::Cutoff(c, a) => write!(f, "psi[{:?}]({a})", c.inner),
            Node::Profile(_, a) => write!(f, "chi({a})"),
            Node::Mollifier(_, a) => write!(f, "phi({a})"),
            Node::Convolve(c) => match c.defect {
                Some(q) => write!(f, "convdefect[{q}]({}, {})", c.scale, c.body),
                None => write!(f, "conv({}, {})", c.scale, c.body),
            },
        }
    }
}
