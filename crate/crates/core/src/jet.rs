//! Truncated Taylor polynomials in one or two variables.
//!
//! `c` holds Taylor coefficients `d^a f / a!`. In two variables the layout
//! is graded: total degree `d` occupies `d(d+1)/2 .. (d+1)(d+2)/2`, and
//! within a block the index is the power of the second variable.

use smallvec::{smallvec, SmallVec};

pub const MAX_DIM: usize = 2;

type Coeffs = SmallVec<[f64; 24]>;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    dim: usize,
    order: usize,
    c: Coeffs,
}

#[inline]
fn idx2(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

pub fn jet_len(dim: usize, order: usize) -> usize {
    match dim {
        1 => order + 1,
        2 => (order + 1) * (order + 2) / 2,
        _ => panic!("unsupported dimension {dim}"),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Multi-indices of total degree exactly `d` in `dim` variables.
pub fn multi_indices(dim: usize, d: usize) -> Vec<[usize; MAX_DIM]> {
    match dim {
        1 => vec![[d, 0]],
        2 => (0..=d).map(|b| [d - b, b]).collect(),
        _ => panic!("unsupported dimension {dim}"),
    }
}

impl Jet {
    pub fn constant(dim: usize, order: usize, v: f64) -> Jet {
        let mut c: Coeffs = smallvec![0.0; jet_len(dim, order)];
        c[0] = v;
        Jet { dim, order, c }
    }

    /// The coordinate function `x_axis` expanded at a point whose `axis`
    /// coordinate is `v`.
    pub fn variable(dim: usize, order: usize, axis: usize, v: f64) -> Jet {
        let mut j = Jet::constant(dim, order, v);
        if order > 0 {
            let k = if dim == 1 { 1 } else { 1 + axis };
            j.c[k] = 1.0;
        }
        j
    }

    /// A 1-variable jet from explicit coefficients.
    pub fn from_coeffs(coeffs: &[f64]) -> Jet {
        Jet { dim: 1, order: coeffs.len() - 1, c: coeffs.iter().copied().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    fn index(&self, alpha: &[usize]) -> Option<usize> {
        let total: usize = alpha.iter().take(self.dim).sum();
        if total > self.order {
            return None;
        }
        Some(if self.dim == 1 { alpha[0] } else { idx2(alpha[0], alpha[1]) })
    }

    /// Taylor coefficient at `alpha` (zero beyond the truncation order).
    pub fn coeff(&self, alpha: &[usize]) -> f64 {
        self.index(alpha).map_or(0.0, |i| self.c[i])
    }

    /// `d^alpha f` at the expansion point.
    pub fn derivative(&self, alpha: &[usize]) -> f64 {
        let fact: f64 = alpha.iter().take(self.dim).map(|&a| factorial(a)).product();
        self.coeff(alpha) * fact
    }

    /// Largest `|d^alpha f|` over `|alpha| <= m`.
    pub fn max_derivative(&self, m: usize) -> f64 {
        let mut best: f64 = 0.0;
        for d in 0..=m.min(self.order) {
            for a in multi_indices(self.dim, d) {
                best = best.max(self.derivative(&a).abs());
            }
        }
        best
    }

    fn same_shape(&self, o: &Jet) {
        debug_assert_eq!(self.dim, o.dim);
        debug_assert_eq!(self.order, o.order);
    }

    pub fn add(&self, o: &Jet) -> Jet {
        self.same_shape(o);
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect();
        Jet { dim: self.dim, order: self.order, c }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.same_shape(o);
        let c = self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect();
        Jet { dim: self.dim, order: self.order, c }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { dim: self.dim, order: self.order, c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.c[0] += s;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        self.same_shape(o);
        let m = self.order;
        let mut out: Coeffs = smallvec![0.0; self.c.len()];
        if self.dim == 1 {
            for (i, &a) in self.c.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, &b) in o.c[..=m - i].iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
        } else {
            for d1 in 0..=m {
                for b1 in 0..=d1 {
                    let a = self.c[idx2(d1 - b1, b1)];
                    if a == 0.0 {
                        continue;
                    }
                    for d2 in 0..=m - d1 {
                        let base = (d1 + d2) * (d1 + d2 + 1) / 2 + b1;
                        let src = d2 * (d2 + 1) / 2;
                        for b2 in 0..=d2 {
                            out[base + b2] += a * o.c[src + b2];
                        }
                    }
                }
            }
        }
        Jet { dim: self.dim, order: m, c: out }
    }

    /// `f(self)` where `series[k]` is the k-th Taylor coefficient of `f`
    /// at `self.value()`.
    pub fn compose(&self, series: &[f64]) -> Jet {
        let m = self.order.min(series.len() - 1);
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut r = Jet::constant(self.dim, self.order, series[m]);
        for k in (0..m).rev() {
            r = r.mul(&delta);
            r.c[0] += series[k];
        }
        r
    }

    pub fn recip(&self) -> Jet {
        self.compose(&series_recip(self.value(), self.order))
    }

    pub fn div(&self, o: &Jet) -> Jet {
        self.mul(&o.recip())
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self.clone();
        let mut acc = Jet::constant(self.dim, self.order, 1.0);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// The jet of `d^alpha f` truncated at `out_order`; requires
    /// `|alpha| + out_order <= self.order`.
    pub fn derivative_jet(&self, alpha: &[usize], out_order: usize) -> Jet {
        let a_tot: usize = alpha.iter().take(self.dim).sum();
        assert!(a_tot + out_order <= self.order, "jet order too low");
        let mut out = Jet::constant(self.dim, out_order, 0.0);
        for d in 0..=out_order {
            for beta in multi_indices(self.dim, d) {
                let mut g = [0usize; MAX_DIM];
                let mut w = 1.0;
                for i in 0..self.dim {
                    g[i] = alpha[i] + beta[i];
                    w *= binomial(g[i], beta[i]);
                }
                let src = self.coeff(&g);
                let dst = out.index(&beta).unwrap();
                out.c[dst] = w * src * factorial_ratio(alpha, self.dim);
            }
        }
        out
    }

    /// Restrict to a lower truncation order.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order);
        if self.dim == 1 {
            return Jet { dim: 1, order, c: self.c[..=order].iter().copied().collect() };
        }
        Jet { dim: 2, order, c: self.c[..jet_len(2, order)].iter().copied().collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

// coefficient of d^alpha f at beta is binom(alpha+beta, beta) alpha! T[alpha+beta]
fn factorial_ratio(alpha: &[usize], dim: usize) -> f64 {
    alpha.iter().take(dim).map(|&a| factorial(a)).product()
}

pub fn series_exp(a: f64, m: usize) -> Vec<f64> {
    let e = a.exp();
    let mut s = Vec::with_capacity(m + 1);
    let mut f = 1.0;
    for k in 0..=m {
        if k > 0 {
            f /= k as f64;
        }
        s.push(e * f);
    }
    s
}

pub fn series_expm1(a: f64, m: usize) -> Vec<f64> {
    let mut s = series_exp(a, m);
    s[0] = a.exp_m1();
    s
}

pub fn series_sin(a: f64, m: usize) -> Vec<f64> {
    let (sa, ca) = a.sin_cos();
    let cyc = [sa, ca, -sa, -ca];
    let mut f = 1.0;
    (0..=m)
        .map(|k| {
            if k > 0 {
                f /= k as f64;
            }
            cyc[k % 4] * f
        })
        .collect()
}

pub fn series_cos(a: f64, m: usize) -> Vec<f64> {
    let (sa, ca) = a.sin_cos();
    let cyc = [ca, -sa, -ca, sa];
    let mut f = 1.0;
    (0..=m)
        .map(|k| {
            if k > 0 {
                f /= k as f64;
            }
            cyc[k % 4] * f
        })
        .collect()
}

pub fn series_ln(a: f64, m: usize) -> Vec<f64> {
    let mut s = vec![a.ln()];
    let mut p = 1.0;
    for k in 1..=m {
        p /= a;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        s.push(sign * p / k as f64);
    }
    s
}

pub fn series_recip(a: f64, m: usize) -> Vec<f64> {
    let mut s = Vec::with_capacity(m + 1);
    let mut v = 1.0 / a;
    for _ in 0..=m {
        s.push(v);
        v *= -1.0 / a;
    }
    s
}

pub fn series_powf(a: f64, r: f64, m: usize) -> Vec<f64> {
    let mut s = vec![a.powf(r)];
    for k in 1..=m {
        let prev = s[k - 1];
        s.push(prev * (r - (k - 1) as f64) / (k as f64 * a));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_sin_derivatives() {
        let x = Jet::variable(1, 4, 0, 0.3);
        let f = x.compose(&series_sin(0.3, 4));
        let g = f.compose(&series_exp(f.value(), 4));
        let (s, c) = 0.3f64.sin_cos();
        let e = s.exp();
        assert_relative_eq!(g.derivative(&[1]), e * c, epsilon = 1e-14);
        assert_relative_eq!(g.derivative(&[2]), e * (c * c - s), epsilon = 1e-14);
    }

    #[test]
    fn bivariate_product() {
        let x = Jet::variable(2, 3, 0, 1.0);
        let y = Jet::variable(2, 3, 1, 2.0);
        let p = x.mul(&x).mul(&y);
        assert_eq!(p.derivative(&[0, 0]), 2.0);
        assert_eq!(p.derivative(&[1, 0]), 4.0);
        assert_eq!(p.derivative(&[0, 1]), 1.0);
        assert_eq!(p.derivative(&[2, 1]), 2.0);
        assert_eq!(p.derivative(&[1, 1]), 2.0);
        assert_eq!(p.derivative(&[3, 0]), 0.0);
    }

    #[test]
    fn powers_at_origin_are_exact() {
        let x = Jet::variable(1, 8, 0, 0.0);
        let p = x.powi(5);
        for k in 0..=8 {
            let want = if k == 5 { 1.0 } else { 0.0 };
            assert_eq!(p.coeff(&[k]), want);
        }
    }

    #[test]
    fn derivative_jet_shifts() {
        let x = Jet::variable(1, 6, 0, 0.5);
        let f = x.compose(&series_exp(0.5, 6));
        let d2 = f.derivative_jet(&[2], 3);
        for k in 0..=3 {
            assert_relative_eq!(d2.derivative(&[k]), 0.5f64.exp(), epsilon = 1e-13);
        }
        let x = Jet::variable(2, 5, 0, 0.2);
        let y = Jet::variable(2, 5, 1, -0.4);
        let g = x.mul(&y).compose(&series_sin(x.value() * y.value(), 5));
        let d = g.derivative_jet(&[1, 1], 2);
        assert_relative_eq!(d.derivative(&[0, 0]), g.derivative(&[1, 1]), epsilon = 1e-12);
        assert_relative_eq!(d.derivative(&[1, 1]), g.derivative(&[2, 2]), epsilon = 1e-12);
        assert_relative_eq!(d.derivative(&[0, 2]), g.derivative(&[1, 3]), epsilon = 1e-12);
    }

    #[test]
    fn powf_and_ln() {
        let x = Jet::variable(1, 3, 0, 2.0);
        let r = x.compose(&series_powf(2.0, 0.5, 3));
        assert_relative_eq!(r.derivative(&[1]), 0.5 / 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r.derivative(&[3]), 3.0 / 8.0 * 2f64.powf(-2.5), epsilon = 1e-14);
        let l = x.compose(&series_ln(2.0, 3));
        assert_relative_eq!(l.derivative(&[3]), 2.0 / 8.0, epsilon = 1e-14);
        let q = x.recip();
        assert_relative_eq!(q.derivative(&[2]), 2.0 / 8.0, epsilon = 1e-14);
    }
}
