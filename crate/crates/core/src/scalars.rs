//! Generalized numbers and points as sampled nets.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::asymptotics::{AsymptoticsConfig, AsymptoticsError, DecayEstimate, EpsGrid, EpsNet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("net is not moderate: |x| = {value:e} exceeds eps^-{n_max} at eps = {eps:e}")]
    NotModerate { eps: f64, value: f64, n_max: f64 },
    #[error("non-finite value at eps = {0:e}")]
    NonFinite(f64),
    #[error("dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
}

fn check_moderate(net: &EpsNet, cfg: &AsymptoticsConfig) -> Result<(), ScalarError> {
    let eps = net.eps();
    for (j, v) in net.values.iter().enumerate() {
        let m = v.norm();
        if !m.is_finite() {
            return Err(ScalarError::NonFinite(eps[j]));
        }
        if j >= net.grid.tail_start() && m > eps[j].powf(-cfg.n_max) {
            return Err(ScalarError::NotModerate { eps: eps[j], value: m, n_max: cfg.n_max });
        }
    }
    Ok(())
}

/// Element of the ring of generalized numbers, held as its sampled net.
#[derive(Clone, Debug, PartialEq)]
pub struct GenNumber {
    net: EpsNet,
}

impl GenNumber {
    /// Wrap a net after checking moderateness on the tail.
    pub fn from_net(net: EpsNet, cfg: &AsymptoticsConfig) -> Result<GenNumber, ScalarError> {
        check_moderate(&net, cfg)?;
        Ok(GenNumber { net })
    }

    /// Wrap a net produced by an operation that preserves moderateness.
    pub fn from_net_unchecked(net: EpsNet) -> GenNumber {
        GenNumber { net }
    }

    pub fn sample<F: FnMut(f64) -> f64>(grid: &EpsGrid, f: F, cfg: &AsymptoticsConfig) -> Result<GenNumber, ScalarError> {
        GenNumber::from_net(EpsNet::sample_real(grid, f), cfg)
    }

    pub fn constant(grid: &EpsGrid, c: f64) -> GenNumber {
        GenNumber { net: EpsNet::sample_real(grid, |_| c) }
    }

    pub fn net(&self) -> &EpsNet {
        &self.net
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.net.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.net.values
    }

    pub fn re(&self) -> Vec<f64> {
        self.net.values.iter().map(|v| v.re).collect()
    }

    fn zip(&self, o: &GenNumber, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<GenNumber, ScalarError> {
        Ok(GenNumber { net: self.net.zip_with(&o.net, f)? })
    }

    pub fn add(&self, o: &GenNumber) -> Result<GenNumber, ScalarError> {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &GenNumber) -> Result<GenNumber, ScalarError> {
        self.zip(o, |a, b| a - b)
    }

    pub fn mul(&self, o: &GenNumber) -> Result<GenNumber, ScalarError> {
        self.zip(o, |a, b| a * b)
    }

    pub fn neg(&self) -> GenNumber {
        GenNumber { net: self.net.map(|a| -a) }
    }

    pub fn scale(&self, s: f64) -> GenNumber {
        GenNumber { net: self.net.map(|a| a * s) }
    }

    pub fn conj(&self) -> GenNumber {
        GenNumber { net: self.net.map(|a| a.conj()) }
    }

    /// Multiply sample-wise by `eps^p`.
    pub fn scale_eps_pow(&self, p: f64) -> GenNumber {
        let eps = self.net.eps();
        let values = self.net.values.iter().zip(eps).map(|(v, e)| v * e.powf(p)).collect();
        GenNumber { net: EpsNet { grid: self.net.grid.clone(), values } }
    }

    pub fn valuation(&self, cfg: &AsymptoticsConfig) -> Result<DecayEstimate, ScalarError> {
        Ok(self.net.estimate(cfg)?)
    }

    pub fn ultra_norm(&self, cfg: &AsymptoticsConfig) -> Result<f64, ScalarError> {
        Ok(crate::asymptotics::ultra_norm(&self.net.estimate(cfg)?)?)
    }

    pub fn is_negligible(&self, cfg: &AsymptoticsConfig) -> Result<bool, ScalarError> {
        Ok(crate::asymptotics::is_negligible(&self.net, cfg)?)
    }

    /// Equality in the ring: the difference is negligible.
    pub fn equals(&self, o: &GenNumber, cfg: &AsymptoticsConfig) -> Result<bool, ScalarError> {
        self.sub(o)?.is_negligible(cfg)
    }

    /// Bitwise sample equality.
    pub fn identical(&self, o: &GenNumber) -> bool {
        self.net.grid == o.net.grid
            && self.net.values.iter().zip(&o.net.values).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    }
}

type Trajectory = dyn Fn(f64) -> [f64; 2] + Send + Sync;

/// Generalized point: a net of points in R^n (n <= 2), kept as a closure so
/// it can be sampled off the grid.
#[derive(Clone)]
pub struct GenPoint {
    dim: usize,
    label: String,
    f: Arc<Trajectory>,
}

impl fmt::Debug for GenPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenPoint({})", self.label)
    }
}

impl PartialEq for GenPoint {
    fn eq(&self, o: &GenPoint) -> bool {
        Arc::ptr_eq(&self.f, &o.f)
    }
}

impl GenPoint {
    pub fn from_fn<F>(dim: usize, label: impl Into<String>, f: F) -> Result<GenPoint, ScalarError>
    where
        F: Fn(f64) -> [f64; 2] + Send + Sync + 'static,
    {
        if dim != 1 && dim != 2 {
            return Err(ScalarError::BadDimension(dim));
        }
        Ok(GenPoint { dim, label: label.into(), f: Arc::new(f) })
    }

    pub fn constant(x: &[f64]) -> GenPoint {
        let mut p = [0.0; 2];
        p[..x.len()].copy_from_slice(x);
        let label = format!("{x:?}");
        GenPoint::from_fn(x.len(), label, move |_| p).unwrap()
    }

    /// `x0 + c eps^r` in every coordinate.
    pub fn shifted(x0: &[f64], c: f64, r: f64) -> GenPoint {
        let mut p = [0.0; 2];
        p[..x0.len()].copy_from_slice(x0);
        let label = format!("{x0:?}+{c}eps^{r}");
        GenPoint::from_fn(x0.len(), label, move |e| {
            let d = c * e.powf(r);
            [p[0] + d, p[1] + d]
        })
        .unwrap()
    }

    /// `eps^-r x0`.
    pub fn dilated(x0: &[f64], r: f64) -> GenPoint {
        let mut p = [0.0; 2];
        p[..x0.len()].copy_from_slice(x0);
        let label = format!("eps^-{r}*{x0:?}");
        GenPoint::from_fn(x0.len(), label, move |e| {
            let s = e.powf(-r);
            [p[0] * s, p[1] * s]
        })
        .unwrap()
    }

    /// One-dimensional point equal to `seq(n)` for `eps` in `(1/(n+2), 1/(n+1)]`.
    pub fn piecewise<F>(label: impl Into<String>, seq: F) -> GenPoint
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        GenPoint::from_fn(1, label, move |e| {
            let n = ((1.0 / e).floor() - 1.0).max(0.0) as u64;
            [seq(n), 0.0]
        })
        .unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, eps: f64) -> [f64; 2] {
        (self.f)(eps)
    }

    pub fn coord(&self, eps: f64, i: usize) -> f64 {
        self.at(eps)[i]
    }

    /// `|x_eps|` on the grid.
    pub fn norm_net(&self, grid: &EpsGrid) -> EpsNet {
        EpsNet::sample_real(grid, |e| {
            let p = self.at(e);
            p[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt()
        })
    }

    pub fn is_moderate(&self, grid: &EpsGrid, cfg: &AsymptoticsConfig) -> bool {
        check_moderate(&self.norm_net(grid), cfg).is_ok()
    }

    /// Largest coordinate magnitude over the tail half of the grid.
    pub fn tail_extent(&self, grid: &EpsGrid) -> [(f64, f64); 2] {
        let mut out = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for e in &grid.values()[grid.tail_start()..] {
            let p = self.at(*e);
            for i in 0..self.dim {
                out[i].0 = out[i].0.min(p[i]);
                out[i].1 = out[i].1.max(p[i]);
            }
        }
        out
    }

    /// Bounded along the tail: the second half of the tail never exceeds
    /// twice the first half's extent (or 1).
    pub fn is_compactly_supported(&self, grid: &EpsGrid) -> bool {
        let tail = &grid.values()[grid.tail_start()..];
        let mid = tail.len() / 2;
        let sup = |s: &[f64]| {
            s.iter()
                .map(|e| self.at(*e)[..self.dim].iter().fold(0.0f64, |a, v| a.max(v.abs())))
                .fold(0.0f64, f64::max)
        };
        let first = sup(&tail[..mid]).max(1.0);
        let second = sup(&tail[mid..]);
        second.is_finite() && second <= 2.0 * first
    }

    /// Bounding box of the tail trajectory, when it stays bounded.
    pub fn compact_box(&self, grid: &EpsGrid) -> Option<Window> {
        self.is_compactly_supported(grid).then(|| self.tail_extent(grid))
    }
}

/// Axis-aligned box `[lo_i, hi_i]`.
pub type Window = [(f64, f64); 2];

fn in_window(p: &[f64; 2], w: &Window, dim: usize) -> bool {
    (0..dim).all(|i| p[i] >= w[i].0 && p[i] <= w[i].1)
}

fn clusters(points: &[[f64; 2]], dim: usize, radius: f64) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut seeds: Vec<([f64; 2], [f64; 2], usize)> = Vec::new();
    for p in pts {
        let hit = seeds.iter_mut().find(|(s, _, _)| (0..dim).all(|i| (s[i] - p[i]).abs() <= radius));
        match hit {
            Some((_, sum, n)) => {
                sum[0] += p[0];
                sum[1] += p[1];
                *n += 1;
            }
            None => seeds.push((p, p, 1)),
        }
    }
    seeds.into_iter().map(|(_, s, n)| [s[0] / n as f64, s[1] / n as f64]).collect()
}

/// Accumulation set of the trajectory inside `window`, resolved at `radius`.
///
/// The last four exponent steps of the grid are each sampled densely; a
/// cluster of trajectory points counts only if it recurs in every segment.
pub fn point_support(x: &GenPoint, grid: &EpsGrid, window: &Window, radius: f64) -> Vec<Vec<f64>> {
    const SEGMENTS: u32 = 4;
    const PER_SEGMENT: usize = 512;
    let dim = x.dim();
    let per_segment: Vec<Vec<[f64; 2]>> = (0..SEGMENTS)
        .map(|s| {
            let k0 = (grid.k_max - SEGMENTS + s) as f64;
            let pts: Vec<[f64; 2]> = (0..PER_SEGMENT)
                .map(|j| {
                    let k = k0 + (j as f64 + 0.5) / PER_SEGMENT as f64;
                    x.at(grid.base.powf(-k))
                })
                .filter(|p| in_window(p, window, dim))
                .collect();
            clusters(&pts, dim, radius)
        })
        .collect();
    let last = per_segment.last().unwrap();
    let mut out: Vec<Vec<f64>> = last
        .iter()
        .filter(|c| {
            per_segment.iter().all(|seg| seg.iter().any(|d| (0..dim).all(|i| (c[i] - d[i]).abs() <= 2.0 * radius)))
        })
        .map(|c| c[..dim].to_vec())
        .collect();
    out.sort_by(|a, b| a[0].total_cmp(&b[0]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> AsymptoticsConfig {
        AsymptoticsConfig::default()
    }

    #[test]
    fn arithmetic_and_valuation() {
        let g = EpsGrid::default();
        let a = GenNumber::sample(&g, |e| e * e, &cfg()).unwrap();
        let b = GenNumber::sample(&g, |e| 3.0 / e, &cfg()).unwrap();
        let p = a.mul(&b).unwrap();
        match p.valuation(&cfg()).unwrap().class {
            crate::asymptotics::DecayClass::Order(s) => assert!((s - 1.0).abs() < 1e-9),
            c => panic!("{c:?}"),
        }
        assert!(a.sub(&a).unwrap().is_negligible(&cfg()).unwrap());
    }

    #[test]
    fn equality_modulo_negligible() {
        let g = EpsGrid::default();
        let a = GenNumber::sample(&g, |e| 1.0 + e, &cfg()).unwrap();
        assert!(a.equals(&a, &cfg()).unwrap());
        let zero = GenNumber::constant(&g, 0.0);
        let eps = GenNumber::sample(&g, |e| e, &cfg()).unwrap();
        assert!(!eps.equals(&zero, &cfg()).unwrap());
        let flat = GenNumber::sample(&g, |e| (-1.0 / e).exp(), &cfg()).unwrap();
        assert!(flat.equals(&zero, &cfg()).unwrap());
        let minus = GenNumber::sample(&g, |e| -e, &cfg()).unwrap();
        assert!(eps.add(&minus).unwrap().is_negligible(&cfg()).unwrap());
        let cube = GenNumber::sample(&g, |e| e.powi(3), &cfg()).unwrap();
        let est = cube.scale_eps_pow(-3.0).valuation(&cfg()).unwrap();
        assert!(matches!(est.class, crate::asymptotics::DecayClass::Order(s) if s.abs() < 1e-9));
    }

    #[test]
    fn rejects_non_moderate() {
        let g = EpsGrid::default();
        assert!(matches!(
            GenNumber::sample(&g, |e| (1.0 / e).exp().min(1e300), &cfg()),
            Err(ScalarError::NotModerate { .. })
        ));
        assert!(GenNumber::sample(&g, |e| e.powi(-11), &cfg()).is_ok());
    }

    #[test]
    fn supports_of_three_points() {
        let g = EpsGrid::default();
        let w: Window = [(-10.0, 10.0), (0.0, 0.0)];
        let c = GenPoint::constant(&[0.4]);
        let s = point_support(&c, &g, &w, 1e-3);
        assert_eq!(s.len(), 1);
        assert!((s[0][0] - 0.4).abs() < 1e-3);
        let d = GenPoint::dilated(&[0.4], 1.0);
        assert!(point_support(&d, &g, &w, 1e-3).is_empty());
        assert!(!d.is_compactly_supported(&g));
        assert!(c.is_compactly_supported(&g));
        let n = GenPoint::piecewise("seq", |n| (n % 7) as f64 + 1.0 / (n as f64 + 1.0));
        let w5: Window = [(-0.5, 5.5), (0.0, 0.0)];
        let s = point_support(&n, &g, &w5, 1e-3);
        let ints: Vec<f64> = s.iter().map(|p| p[0].round()).collect();
        assert_eq!(ints, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        for p in &s {
            assert!((p[0] - p[0].round()).abs() < 1e-3);
        }
    }

    #[test]
    fn piecewise_windows() {
        let n = GenPoint::piecewise("id", |n| n as f64);
        assert_eq!(n.at(1.0)[0], 0.0);
        assert_eq!(n.at(0.4)[0], 1.0);
        assert_eq!(n.at(1.0 / 3.5)[0], 2.0);
    }
}
