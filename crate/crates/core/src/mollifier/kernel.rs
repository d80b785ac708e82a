//! One-dimensional convolution kernels with known moments, and quadrature
//! rules that carry the kernel inside their weights.

use std::sync::Arc;

use super::Mollifier;
use crate::quadrature;

/// Standard normal density; its transform is `exp(-xi^2 / 2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianKernel;

impl GaussianKernel {
    /// Integration is truncated here (`rho(12) ~ 2e-32`).
    pub const RADIUS: f64 = 12.0;

    pub fn eval(&self, z: f64) -> f64 {
        (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }

    pub fn transform(&self, xi: f64) -> f64 {
        (-0.5 * xi * xi).exp()
    }

    /// `int z^k rho(z) dz`.
    pub fn moment(&self, k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        (1..k).step_by(2).map(|j| j as f64).product()
    }
}

#[derive(Clone, Debug)]
pub enum KernelShape {
    Mollifier(Arc<Mollifier>),
    /// `z^power phi(z)`.
    Weighted { mollifier: Arc<Mollifier>, power: u32 },
    Gaussian(GaussianKernel),
}

/// Nodes with weights that already include the kernel values.
#[derive(Clone, Debug, Default)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub abs_weights: Vec<f64>,
}

/// A kernel `K` on the line, possibly reflected (`K(-z)`).
#[derive(Clone, Debug)]
pub struct KernelProfile {
    shape: KernelShape,
    reflect: bool,
    fine: Arc<QuadRule>,
    coarse: Arc<QuadRule>,
}

impl KernelProfile {
    pub fn new(shape: KernelShape, reflect: bool) -> KernelProfile {
        let mut k = KernelProfile { shape, reflect, fine: Default::default(), coarse: Default::default() };
        let (fine, coarse) = k.build_rules();
        k.fine = Arc::new(fine);
        k.coarse = Arc::new(coarse);
        k
    }

    pub fn mollifier(m: Arc<Mollifier>) -> KernelProfile {
        KernelProfile::new(KernelShape::Mollifier(m), false)
    }

    pub fn gaussian() -> KernelProfile {
        KernelProfile::new(KernelShape::Gaussian(GaussianKernel), false)
    }

    pub fn reflected(&self) -> KernelProfile {
        KernelProfile::new(self.shape.clone(), !self.reflect)
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    pub fn is_reflected(&self) -> bool {
        self.reflect
    }

    pub fn radius(&self) -> f64 {
        match &self.shape {
            KernelShape::Mollifier(m) | KernelShape::Weighted { mollifier: m, .. } => m.radius(),
            KernelShape::Gaussian(_) => GaussianKernel::RADIUS,
        }
    }

    fn bandwidth(&self) -> f64 {
        match &self.shape {
            KernelShape::Mollifier(m) | KernelShape::Weighted { mollifier: m, .. } => m.params().r_out,
            KernelShape::Gaussian(_) => 4.0,
        }
    }

    fn raw(&self, z: f64) -> f64 {
        match &self.shape {
            KernelShape::Mollifier(m) => m.eval(z),
            KernelShape::Weighted { mollifier, power } => z.powi(*power as i32) * mollifier.eval(z),
            KernelShape::Gaussian(g) => g.eval(z),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.raw(if self.reflect { -z } else { z })
    }

    /// Exact moment `int z^k K(z) dz` of the ideal kernel (vanishing moments
    /// hold by construction, not by quadrature).
    pub fn moment(&self, k: usize) -> f64 {
        let m = match &self.shape {
            KernelShape::Mollifier(_) => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelShape::Weighted { .. } => 0.0,
            KernelShape::Gaussian(g) => g.moment(k),
        };
        if self.reflect && k % 2 == 1 {
            -m
        } else {
            m
        }
    }

    /// Rule resolving the kernel's oscillations.
    pub fn fine_rule(&self) -> &QuadRule {
        &self.fine
    }

    /// Product-integration rule: exact for `K` times piecewise polynomials of
    /// degree 7 on panels of width 2. Suited to smooth integrands only.
    pub fn coarse_rule(&self) -> &QuadRule {
        &self.coarse
    }

    fn build_rules(&self) -> (QuadRule, QuadRule) {
        let r = self.radius();
        let width = 0.6 * std::f64::consts::PI / self.bandwidth();
        let panels = (2.0 * r / width).ceil() as usize;
        let b = quadrature::breakpoints(-r, r, panels, &[], usize::MAX).unwrap();
        let mut fine = QuadRule::default();
        for (z, w) in quadrature::composite_nodes(&b, 12) {
            let k = self.eval(z);
            fine.nodes.push(z);
            fine.weights.push(w * k);
            fine.abs_weights.push(w * k.abs());
        }
        let coarse_panels = (2.0 * r / 2.0).ceil() as usize;
        let cb = quadrature::breakpoints(-r, r, coarse_panels, &[], usize::MAX).unwrap();
        let gl = quadrature::gl_rule(8);
        let mut coarse = QuadRule::default();
        for w in cb.windows(2) {
            let (a, c) = (w[0], w[1]);
            let h = 0.5 * (c - a);
            let mid = 0.5 * (a + c);
            let pts: Vec<f64> = gl.iter().map(|&(x, _)| mid + h * x).collect();
            let sub = quadrature::breakpoints(a, c, (2.0 * h / width).ceil() as usize, &[], usize::MAX).unwrap();
            let fine_nodes = quadrature::composite_nodes(&sub, 12);
            for (j, &zj) in pts.iter().enumerate() {
                let mut wj = 0.0;
                let mut aj = 0.0;
                for &(z, wt) in &fine_nodes {
                    let mut l = 1.0;
                    for (i, &zi) in pts.iter().enumerate() {
                        if i != j {
                            l *= (z - zi) / (zj - zi);
                        }
                    }
                    let k = self.eval(z);
                    wj += wt * k * l;
                    aj += wt * (k * l).abs();
                }
                coarse.nodes.push(zj);
                coarse.weights.push(wj);
                coarse.abs_weights.push(aj);
            }
        }
        (fine, coarse)
    }
}
