//! Vanishing-moment mollifier `phi` with `phi^ = chi`, tabulated by FFT.
//!
//! Since `chi == 1` near the origin every moment `int y^a phi` with `a >= 1`
//! vanishes exactly; the tables are certified against that numerically,
//! together with a tail bound from integrating the Fourier integral by parts.

mod kernel;
mod profile;

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kernel::{GaussianKernel, KernelProfile, KernelShape, QuadRule};
pub use profile::{smoothstep, smoothstep_series, Cutoff, SpectralProfile};

use crate::quadrature;

/// Highest derivative order available from the tables.
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MollifierError {
    #[error("moment certification failed: |moment {alpha:?}| + tail = {bound:e} > {tol:e}")]
    MomentCertificationFailed { alpha: Vec<usize>, bound: f64, tol: f64 },
    #[error("tail bound {bound:e} at radius {radius} exceeds {tol:e}")]
    TailBoundViolated { bound: f64, radius: f64, tol: f64 },
    #[error("mass {mass} differs from 1 by more than {tol:e}")]
    MassMismatch { mass: f64, tol: f64 },
    #[error("derivative order {0} exceeds {MAX_ORDER}")]
    OrderTooHigh(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("table parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierParams {
    pub dim: usize,
    pub r_in: f64,
    pub r_out: f64,
    #[serde(default)]
    pub skew: f64,
    pub fft_size: usize,
    pub radius: f64,
    #[serde(default = "default_alpha_max")]
    pub alpha_max: usize,
    #[serde(default = "default_moment_tol")]
    pub moment_tol: f64,
}

fn default_alpha_max() -> usize {
    6
}

fn default_moment_tol() -> f64 {
    1e-6
}

impl Default for MollifierParams {
    fn default() -> Self {
        MollifierParams {
            dim: 1,
            r_in: 1.0,
            r_out: 21.0,
            skew: 0.0,
            fft_size: 1 << 18,
            radius: 40.0,
            alpha_max: 6,
            moment_tol: 1e-6,
        }
    }
}

impl MollifierParams {
    pub fn validate(&self) -> Result<(), MollifierError> {
        let bad = |m: &str| Err(MollifierError::InvalidParams(m.to_string()));
        if self.dim != 1 && self.dim != 2 {
            return bad("dimension must be 1 or 2");
        }
        if SpectralProfile::new(self.r_in, self.r_out, self.skew).is_none() {
            return bad("need 0 < r_in < r_out");
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < 1024 {
            return bad("fft_size must be a power of two >= 1024");
        }
        if !(self.radius > 0.0) {
            return bad("radius must be positive");
        }
        // frequency spacing 2 pi / (4 R) must resolve the ramp, and the
        // grid must reach past r_out
        let nyquist = std::f64::consts::PI * self.fft_size as f64 / (4.0 * self.radius);
        if nyquist < 2.0 * self.r_out {
            return bad("fft_size too small for r_out");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub alpha: Vec<usize>,
    pub value: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mass: f64,
    pub moments: Vec<MomentEntry>,
    pub max_moment_bound: f64,
    /// Bound on `|phi(x)|` for `|x| >= radius`.
    pub tail_sup_bound: f64,
    pub l2_spatial: f64,
    pub l2_spectral: f64,
    pub phi0: f64,
    pub certified: bool,
}

/// One-dimensional factor tables; the n-dimensional kernel is the tensor
/// product of the factor.
#[derive(Debug)]
pub struct Mollifier {
    params: MollifierParams,
    profile: SpectralProfile,
    dx: f64,
    half: usize,
    tables: Vec<Vec<f64>>,
    // derivative L1 norms of the profile, index k
    profile_l1: Vec<f64>,
    report: Option<MomentReport>,
}

impl Mollifier {
    /// Build and certify. Certification failures are errors.
    pub fn build(params: MollifierParams) -> Result<Arc<Mollifier>, MollifierError> {
        let mut m = Mollifier::build_uncertified(params)?;
        let report = m.certify()?;
        m.report = Some(report);
        Ok(Arc::new(m))
    }

    pub fn build_uncertified(params: MollifierParams) -> Result<Mollifier, MollifierError> {
        params.validate()?;
        let profile = SpectralProfile::new(params.r_in, params.r_out, params.skew).unwrap();
        let n = params.fft_size;
        let period = 4.0 * params.radius;
        let dx = period / n as f64;
        let dxi = 2.0 * std::f64::consts::PI / period;
        let half = (params.radius / dx).round() as usize;
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_inverse(n);
        let base: Vec<Complex64> = (0..n)
            .map(|j| {
                let xi = if j < n / 2 { j as f64 * dxi } else { (j as f64 - n as f64) * dxi };
                profile.eval(xi)
            })
            .collect();
        let mut tables = Vec::with_capacity(MAX_ORDER + 2);
        for k in 0..=MAX_ORDER + 1 {
            let mut buf: Vec<Complex64> = base
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let xi = if j < n / 2 { j as f64 * dxi } else { (j as f64 - n as f64) * dxi };
                    v * Complex64::new(0.0, xi).powu(k as u32)
                })
                .collect();
            fft.process(&mut buf);
            let mut t = Vec::with_capacity(2 * half + 1);
            for i in 0..=2 * half {
                let m = i as i64 - half as i64;
                let idx = if m >= 0 { m as usize } else { (n as i64 + m) as usize };
                t.push(buf[idx].re / period);
            }
            tables.push(t);
        }
        let profile_l1 = profile_derivative_l1(&profile, MAX_ORDER + 4);
        Ok(Mollifier { params, profile, dx, half, tables, profile_l1, report: None })
    }

    pub fn params(&self) -> &MollifierParams {
        &self.params
    }

    pub fn profile(&self) -> &SpectralProfile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn radius(&self) -> f64 {
        self.params.radius
    }

    pub fn spacing(&self) -> f64 {
        self.dx
    }

    pub fn report(&self) -> Option<&MomentReport> {
        self.report.as_ref()
    }

    pub fn is_even(&self) -> bool {
        self.params.skew == 0.0
    }

    /// `phi^(k)(x)` of the one-dimensional factor, zero outside the radius.
    pub fn eval_deriv(&self, x: f64, k: usize) -> f64 {
        assert!(k <= MAX_ORDER, "order {k} exceeds {MAX_ORDER}");
        let r = self.params.radius;
        if !(x.abs() <= r) {
            return 0.0;
        }
        let u = (x + r) / self.dx;
        let i = (u.floor() as usize).min(2 * self.half - 1);
        let t = u - i as f64;
        let f = &self.tables[k];
        let g = &self.tables[k + 1];
        let (f0, f1) = (f[i], f[i + 1]);
        let (d0, d1) = (g[i] * self.dx, g[i + 1] * self.dx);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * f0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * f1
            + (t3 - t2) * d1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_deriv(x, 0)
    }

    /// Taylor coefficients of the factor at `x` up to order `m`.
    pub fn taylor(&self, x: f64, m: usize) -> Result<Vec<f64>, MollifierError> {
        if m > MAX_ORDER {
            return Err(MollifierError::OrderTooHigh(m));
        }
        let mut f = 1.0;
        Ok((0..=m)
            .map(|k| {
                if k > 0 {
                    f /= k as f64;
                }
                self.eval_deriv(x, k) * f
            })
            .collect())
    }

    /// `phi(x)` in n dimensions.
    pub fn eval_n(&self, x: &[f64]) -> f64 {
        x.iter().take(self.params.dim).map(|&v| self.eval(v)).product()
    }

    /// `phi_eps(x) = eps^-n phi(x / eps)` with derivative multi-index `alpha`.
    pub fn scaled_eval(&self, eps: f64, x: &[f64], alpha: &[usize]) -> f64 {
        let n = self.params.dim;
        let mut v = 1.0;
        for i in 0..n {
            let a = alpha.get(i).copied().unwrap_or(0);
            v *= self.eval_deriv(x[i] / eps, a) * eps.powi(-(1 + a as i32));
        }
        v
    }

    /// `||d^k chi||_1` over the real line.
    pub fn profile_l1(&self, k: usize) -> f64 {
        self.profile_l1[k]
    }

    /// Bound on `|phi(x)|` at `|x|`, minimised over the integration-by-parts order.
    pub fn tail_bound(&self, x: f64) -> f64 {
        let ax = x.abs();
        (1..self.profile_l1.len())
            .map(|k| self.profile_l1[k] / (2.0 * std::f64::consts::PI * ax.powi(k as i32)))
            .fold(self.profile_l1[0] / (2.0 * std::f64::consts::PI), f64::min)
    }

    /// Bound on `int_{|x| > R} |x|^a |phi(x)| dx` for the factor.
    pub fn tail_moment_bound(&self, a: usize) -> f64 {
        let r = self.params.radius;
        let mut best = f64::INFINITY;
        for k in (a + 2)..self.profile_l1.len() {
            let b = self.profile_l1[k] * r.powi(a as i32 + 1 - k as i32)
                / (std::f64::consts::PI * (k - a - 1) as f64);
            best = best.min(b);
        }
        best
    }

    fn factor_rule(&self) -> Vec<(f64, f64)> {
        let r = self.params.radius;
        let panels = (2.0 * r / (0.6 / self.params.r_out.max(1.0) * std::f64::consts::PI)).ceil() as usize;
        let b = quadrature::breakpoints(-r, r, panels, &[], usize::MAX).unwrap();
        quadrature::composite_nodes(&b, 12)
    }

    /// `int y^a phi(y) dy` of the factor over the table range.
    pub fn factor_moment(&self, a: usize) -> f64 {
        self.factor_rule().iter().map(|&(y, w)| w * y.powi(a as i32) * self.eval(y)).sum()
    }

    /// `int y^a phi(y)^2 dy` of the factor.
    pub fn factor_square_moment(&self, a: usize) -> f64 {
        self.factor_rule().iter().map(|&(y, w)| w * y.powi(a as i32) * self.eval(y).powi(2)).sum()
    }

    fn certify(&self) -> Result<MomentReport, MollifierError> {
        let p = &self.params;
        let mass1 = self.factor_moment(0);
        let mass = mass1.powi(p.dim as i32);
        let mut moments = Vec::new();
        let m1: Vec<f64> = (0..=p.alpha_max).map(|a| self.factor_moment(a)).collect();
        let t1: Vec<f64> = (0..=p.alpha_max).map(|a| self.tail_moment_bound(a)).collect();
        let abs1: Vec<f64> = (0..=p.alpha_max)
            .map(|a| self.factor_rule().iter().map(|&(y, w)| w * y.abs().powi(a as i32) * self.eval(y).abs()).sum())
            .collect();
        let mut worst = 0.0f64;
        for d in 1..=p.alpha_max {
            for alpha in crate::jet::multi_indices(p.dim, d) {
                let alpha = alpha[..p.dim].to_vec();
                let (value, tail) = if p.dim == 1 {
                    (m1[alpha[0]], t1[alpha[0]])
                } else {
                    let (a, b) = (alpha[0], alpha[1]);
                    (m1[a] * m1[b], t1[a] * (abs1[b] + t1[b]) + t1[b] * (abs1[a] + t1[a]))
                };
                let bound = value.abs() + tail;
                if bound > p.moment_tol {
                    return Err(MollifierError::MomentCertificationFailed { alpha, bound, tol: p.moment_tol });
                }
                worst = worst.max(bound);
                moments.push(MomentEntry { alpha, value, tail_bound: tail });
            }
        }
        if (mass - 1.0).abs() > 1e-8 {
            return Err(MollifierError::MassMismatch { mass, tol: 1e-8 });
        }
        let tail_sup_bound = self.tail_bound(p.radius);
        if tail_sup_bound > p.moment_tol {
            return Err(MollifierError::TailBoundViolated { bound: tail_sup_bound, radius: p.radius, tol: p.moment_tol });
        }
        let l2_1 = self.factor_square_moment(0);
        let l2_spec_1 = profile_l2(&self.profile) / (2.0 * std::f64::consts::PI);
        Ok(MomentReport {
            mass,
            moments,
            max_moment_bound: worst,
            tail_sup_bound,
            l2_spatial: l2_1.powi(p.dim as i32),
            l2_spectral: l2_spec_1.powi(p.dim as i32),
            phi0: self.eval(0.0).powi(p.dim as i32),
            certified: true,
        })
    }

    /// Moment check up to `alpha_max` without failing on the first violation.
    pub fn check_moments(&self, alpha_max: usize) -> Vec<MomentEntry> {
        let dim = self.params.dim;
        let mut out = Vec::new();
        for d in 1..=alpha_max {
            for alpha in crate::jet::multi_indices(dim, d) {
                let alpha = alpha[..dim].to_vec();
                let value: f64 = alpha.iter().map(|&a| self.factor_moment(a)).product();
                let tail = alpha.iter().map(|&a| self.tail_moment_bound(a)).fold(0.0, f64::max);
                out.push(MomentEntry { alpha, value, tail_bound: tail });
            }
        }
        out
    }

    /// Text export: a header with the build parameters, then one sample per
    /// line `x phi phi' ...` for derivative orders `0..=orders`.
    pub fn export_text(&self, orders: usize, stride: usize) -> String {
        let orders = orders.min(MAX_ORDER);
        let stride = stride.max(1);
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# mollifier dim={} r_in={} r_out={} skew={} fft_size={} radius={} dx={:e} orders={} stride={}",
            p.dim, p.r_in, p.r_out, p.skew, p.fft_size, p.radius, self.dx, orders, stride
        );
        for i in (0..=2 * self.half).step_by(stride) {
            let x = (i as f64 - self.half as f64) * self.dx;
            let _ = write!(s, "{x:.12e}");
            for k in 0..=orders {
                let _ = write!(s, " {:.16e}", self.tables[k][i]);
            }
            s.push('\n');
        }
        s
    }

    /// Parameters recorded in an exported table header.
    pub fn params_from_text(text: &str) -> Result<MollifierParams, MollifierError> {
        let header = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# mollifier "))
            .ok_or_else(|| MollifierError::Parse("missing header".into()))?;
        let mut p = MollifierParams::default();
        for kv in header.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| MollifierError::Parse(kv.into()))?;
            let num = |v: &str| v.parse::<f64>().map_err(|e| MollifierError::Parse(format!("{k}: {e}")));
            match k {
                "dim" => p.dim = num(v)? as usize,
                "r_in" => p.r_in = num(v)?,
                "r_out" => p.r_out = num(v)?,
                "skew" => p.skew = num(v)?,
                "fft_size" => p.fft_size = num(v)? as usize,
                "radius" => p.radius = num(v)?,
                _ => {}
            }
        }
        p.validate()?;
        Ok(p)
    }
}

fn profile_rule(p: &SpectralProfile) -> Vec<(f64, f64)> {
    let b = quadrature::breakpoints(p.r_in, p.r_out, 256, &[], usize::MAX).unwrap();
    quadrature::composite_nodes(&b, 16)
}

/// `||d^k phi^||_1` over the real line for `k = 0..=kmax` (both parts of a
/// skewed profile).
fn profile_derivative_l1(p: &SpectralProfile, kmax: usize) -> Vec<f64> {
    let mut acc = vec![0.0; kmax + 1];
    for (x, w) in profile_rule(p) {
        let c = p.chi_series(x, kmax);
        let e = p.eta_series(x, kmax);
        let mut fact = 1.0;
        for k in 0..=kmax {
            if k > 0 {
                fact *= k as f64;
            }
            acc[k] += w * fact * if k == 0 { p.eval(x).norm() } else { c[k].abs() + e[k].abs() };
        }
    }
    acc[0] += p.r_in;
    acc.iter().map(|v| 2.0 * v).collect()
}

/// `int |phi^|^2 d xi` over the real line.
fn profile_l2(p: &SpectralProfile) -> f64 {
    let ramp: f64 = profile_rule(p).iter().map(|&(x, w)| w * p.eval(x).norm_sqr()).sum();
    2.0 * (p.r_in + ramp)
}
