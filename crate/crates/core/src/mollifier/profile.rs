//! Smooth ramps built from `exp(-1/t)`: the step `s`, plateau cutoffs and
//! the spectral profile of the mollifier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::jet::{series_exp, series_recip, Jet};

/// Taylor coefficients of `s(t) = f(t) / (f(t) + f(1 - t))`, `f(t) = exp(-1/t)`.
pub fn smoothstep_series(t: f64, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m + 1];
    if t <= 0.0 {
        return out;
    }
    if t >= 1.0 {
        out[0] = 1.0;
        return out;
    }
    let flat = |x: &Jet| -> Jet {
        if x.value() < 1e-3 {
            return Jet::constant(1, m, 0.0);
        }
        let inv = x.compose(&series_recip(x.value(), m)).neg();
        inv.compose(&series_exp(inv.value(), m))
    };
    let tj = Jet::variable(1, m, 0, t);
    let a = flat(&tj);
    let b = flat(&tj.neg().add_scalar(1.0));
    let s = a.div(&a.add(&b));
    out.copy_from_slice(s.coeffs());
    out
}

pub fn smoothstep(t: f64) -> f64 {
    smoothstep_series(t, 0)[0]
}

/// Plateau cutoff: 1 on `[inner.0, inner.1]`, 0 outside `(outer.0, outer.1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub inner: (f64, f64),
    pub outer: (f64, f64),
}

impl Cutoff {
    pub fn new(inner: (f64, f64), outer: (f64, f64)) -> Option<Cutoff> {
        let ok = outer.0 < inner.0 && inner.0 <= inner.1 && inner.1 < outer.1;
        ok.then_some(Cutoff { inner, outer })
    }

    /// Symmetric cutoff around `center`.
    pub fn centered(center: f64, plateau: f64, support: f64) -> Cutoff {
        Cutoff::new((center - plateau, center + plateau), (center - support, center + support))
            .expect("plateau must be strictly inside the support")
    }

    pub fn series(&self, t: f64, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m + 1];
        if t <= self.outer.0 || t >= self.outer.1 {
            return out;
        }
        if t >= self.inner.0 && t <= self.inner.1 {
            out[0] = 1.0;
            return out;
        }
        let (tau, w, sign) = if t < self.inner.0 {
            let w = self.inner.0 - self.outer.0;
            ((t - self.outer.0) / w, w, 1.0)
        } else {
            let w = self.outer.1 - self.inner.1;
            ((self.outer.1 - t) / w, w, -1.0)
        };
        let s = smoothstep_series(tau, m);
        let mut f = 1.0;
        for k in 0..=m {
            out[k] = s[k] * f;
            f *= sign / w;
        }
        out
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.series(t, 0)[0]
    }
}

/// `chi(xi) = 1` for `|xi| <= r_in`, 0 for `|xi| >= r_out`, with a smooth
/// ramp between. The optional skew adds `i kappa sgn(xi) chi (1 - chi)`,
/// which keeps the inverse transform real and the profile flat at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub r_in: f64,
    pub r_out: f64,
    pub skew: f64,
}

impl SpectralProfile {
    pub fn new(r_in: f64, r_out: f64, skew: f64) -> Option<SpectralProfile> {
        (r_in > 0.0 && r_out > r_in && skew.is_finite()).then_some(SpectralProfile { r_in, r_out, skew })
    }

    fn ramp_series(&self, a: f64, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m + 1];
        if a <= self.r_in {
            out[0] = 1.0;
            return out;
        }
        if a >= self.r_out {
            return out;
        }
        let w = self.r_out - self.r_in;
        let s = smoothstep_series((a - self.r_in) / w, m);
        let mut f = 1.0;
        for k in 0..=m {
            out[k] = -s[k] * f;
            f /= w;
        }
        out[0] += 1.0;
        out
    }

    /// Taylor coefficients of the even part `chi` at `xi`.
    pub fn chi_series(&self, xi: f64, m: usize) -> Vec<f64> {
        let mut s = self.ramp_series(xi.abs(), m);
        if xi < 0.0 {
            for (k, v) in s.iter_mut().enumerate() {
                if k % 2 == 1 {
                    *v = -*v;
                }
            }
        }
        s
    }

    /// Taylor coefficients of the odd part `kappa sgn(xi) chi (1 - chi)`.
    pub fn eta_series(&self, xi: f64, m: usize) -> Vec<f64> {
        if self.skew == 0.0 || xi.abs() <= self.r_in || xi.abs() >= self.r_out {
            return vec![0.0; m + 1];
        }
        let c = Jet::from_coeffs(&self.ramp_series(xi.abs(), m));
        let e = c.mul(&c.neg().add_scalar(1.0)).scale(self.skew);
        let mut s = e.coeffs().to_vec();
        if xi < 0.0 {
            for (k, v) in s.iter_mut().enumerate() {
                if k % 2 == 0 {
                    *v = -*v;
                }
            }
        }
        s
    }

    pub fn chi(&self, xi: f64) -> f64 {
        self.chi_series(xi, 0)[0]
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        Complex64::new(self.chi(xi), self.eta_series(xi, 0)[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_symmetry() {
        for &t in &[0.1, 0.3, 0.5, 0.77] {
            assert!((smoothstep(t) + smoothstep(1.0 - t) - 1.0).abs() < 1e-15);
        }
        assert_eq!(smoothstep(0.5), 0.5);
        let s = smoothstep_series(0.4, 3);
        let h = 1e-5;
        let fd = (smoothstep(0.4 + h) - smoothstep(0.4 - h)) / (2.0 * h);
        assert!((s[1] - fd).abs() < 1e-8);
    }

    #[test]
    fn cutoff_plateau_exact() {
        let c = Cutoff::centered(0.0, 1.0, 2.0);
        assert_eq!(c.series(0.5, 6), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.eval(2.5), 0.0);
        assert!(c.eval(1.5) > 0.0 && c.eval(1.5) < 1.0);
        assert!((c.eval(-1.5) - c.eval(1.5)).abs() < 1e-15);
        let h = 1e-6;
        let d = c.series(1.3, 1)[1];
        assert!((d - (c.eval(1.3 + h) - c.eval(1.3 - h)) / (2.0 * h)).abs() < 1e-7);
    }

    #[test]
    fn profile_shape() {
        let p = SpectralProfile::new(1.0, 17.0, 0.5).unwrap();
        assert_eq!(p.chi(0.7), 1.0);
        assert_eq!(p.chi(-17.5), 0.0);
        assert!((p.chi(9.0) - 0.5).abs() < 1e-15);
        assert_eq!(p.eval(0.5).im, 0.0);
        let z = p.eval(5.0);
        let w = p.eval(-5.0);
        assert!((z - w.conj()).norm() < 1e-15);
        let h = 1e-5;
        let s = p.chi_series(-4.0, 1);
        assert!((s[1] - (p.chi(-4.0 + h) - p.chi(-4.0 - h)) / (2.0 * h)).abs() < 1e-8);
        let e = p.eta_series(-4.0, 1);
        let fd = (p.eval(-4.0 + h).im - p.eval(-4.0 - h).im) / (2.0 * h);
        assert!((e[1] - fd).abs() < 1e-8);
    }
}
