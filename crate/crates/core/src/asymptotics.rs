//! Asymptotic scale: geometric ε grids, sampled nets and valuation estimates.
//!
//! A net is only ever seen through its samples on a finite grid, so every
//! statement here is a surrogate: "order a" means the log-log fit over the
//! tail half of the grid has slope a and a small residual.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Magnitudes below this are treated as underflowed.
pub const UNDERFLOW_FLOOR: f64 = 1e-290;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("non-finite sample at eps={eps}")]
    NonFiniteSample { eps: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("valuation is ambiguous (residual {residual:.3} > {tol})")]
    AmbiguousValuation { residual: f64, tol: f64 },
    #[error("grids differ")]
    GridMismatch,
}

fn one() -> u32 {
    1
}

/// `eps_j = base^(-k)` for `k = k_min, k_min + 1/per_step, ..., k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    pub base: f64,
    pub k_min: u32,
    pub k_max: u32,
    #[serde(default = "one")]
    pub per_step: u32,
}

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid { base: 2.0, k_min: 6, k_max: 40, per_step: 1 }
    }
}

impl EpsGrid {
    pub fn new(base: f64, k_min: u32, k_max: u32) -> Result<Self, AsymptoticsError> {
        let g = EpsGrid { base, k_min, k_max, per_step: 1 };
        g.validate()?;
        Ok(g)
    }

    pub fn with_kmax(&self, k_max: u32) -> Self {
        EpsGrid { k_max, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), AsymptoticsError> {
        if !(self.base > 1.0) || !self.base.is_finite() {
            return Err(AsymptoticsError::InvalidGrid(format!("base {} must exceed 1", self.base)));
        }
        if self.per_step == 0 {
            return Err(AsymptoticsError::InvalidGrid("per_step must be positive".into()));
        }
        if self.k_max <= self.k_min {
            return Err(AsymptoticsError::InvalidGrid("k_max must exceed k_min".into()));
        }
        if self.len() < 8 {
            return Err(AsymptoticsError::TooFewSamples { needed: 8, got: self.len() });
        }
        let smallest = self.base.powf(-(self.k_max as f64));
        if !(smallest > UNDERFLOW_FLOOR) {
            return Err(AsymptoticsError::InvalidGrid(format!(
                "base^-k_max = {smallest:e} is below the underflow floor"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.k_max - self.k_min) * self.per_step + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exponent(&self, j: usize) -> f64 {
        self.k_min as f64 + j as f64 / self.per_step as f64
    }

    /// Grid values in decreasing order.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.base.powf(-self.exponent(j))).collect()
    }

    /// Index of the first sample in the tail half.
    pub fn tail_start(&self) -> usize {
        self.len() / 2
    }

    pub fn log2_values(&self) -> Vec<f64> {
        (0..self.len()).map(|j| -self.exponent(j) * self.base.log2()).collect()
    }
}

/// Sampled representative of a net, one value per grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsNet {
    pub grid: EpsGrid,
    pub values: Vec<Complex64>,
}

impl EpsNet {
    pub fn sample<F: FnMut(f64) -> Complex64>(grid: &EpsGrid, mut f: F) -> Self {
        let values = grid.values().into_iter().map(&mut f).collect();
        EpsNet { grid: grid.clone(), values }
    }

    pub fn sample_real<F: FnMut(f64) -> f64>(grid: &EpsGrid, mut f: F) -> Self {
        Self::sample(grid, |e| Complex64::new(f(e), 0.0))
    }

    pub fn try_sample_real<E, F: FnMut(f64) -> Result<f64, E>>(
        grid: &EpsGrid,
        mut f: F,
    ) -> Result<Self, E> {
        let mut values = Vec::with_capacity(grid.len());
        for e in grid.values() {
            values.push(Complex64::new(f(e)?, 0.0));
        }
        Ok(EpsNet { grid: grid.clone(), values })
    }

    pub fn eps(&self) -> Vec<f64> {
        self.grid.values()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.eps().into_iter().zip(self.magnitudes()).collect()
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        EpsNet { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        other: &EpsNet,
        f: F,
    ) -> Result<Self, AsymptoticsError> {
        if self.grid != other.grid {
            return Err(AsymptoticsError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(EpsNet { grid: self.grid.clone(), values })
    }

    pub fn estimate(&self, cfg: &AsymptoticsConfig) -> Result<DecayEstimate, AsymptoticsError> {
        estimate_valuation(&self.pairs(), cfg)
    }

    /// Mean of `Re(x_eps) / eps^a` over the tail half.
    pub fn leading_constant(&self, a: f64) -> f64 {
        let eps = self.eps();
        let start = self.grid.tail_start();
        let n = (self.values.len() - start) as f64;
        (start..self.values.len()).map(|j| self.values[j].re / eps[j].powf(a)).sum::<f64>() / n
    }

    /// `log2 |x_eps|` per sample, with underflowed samples reported at the floor.
    pub fn log2_magnitudes(&self) -> Vec<f64> {
        self.magnitudes().into_iter().map(|m| m.max(UNDERFLOW_FLOOR).log2()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsConfig {
    pub residual_tol: f64,
    pub q_max: f64,
    pub n_max: f64,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        AsymptoticsConfig { residual_tol: 0.25, q_max: 10.0, n_max: 12.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum DecayClass {
    Order(f64),
    BeyondOrder(f64),
    IdenticallyZero,
    Ambiguous,
}

impl DecayClass {
    pub fn label(&self) -> String {
        match self {
            DecayClass::Order(a) => format!("Order({a:.3})"),
            DecayClass::BeyondOrder(q) => format!("BeyondOrder({q})"),
            DecayClass::IdenticallyZero => "IdenticallyZero".into(),
            DecayClass::Ambiguous => "Ambiguous".into(),
        }
    }

    pub fn is_negligible_class(&self) -> bool {
        matches!(self, DecayClass::BeyondOrder(_) | DecayClass::IdenticallyZero)
    }

    /// Lower bound on the order: `+inf` for negligible classes.
    pub fn order_lower_bound(&self) -> Option<f64> {
        match self {
            DecayClass::Order(a) => Some(*a),
            DecayClass::BeyondOrder(_) | DecayClass::IdenticallyZero => Some(f64::INFINITY),
            DecayClass::Ambiguous => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    pub class: DecayClass,
    /// Fitted slope of `ln|x|` against `ln eps`; absent when nothing could be fitted.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    /// Some tail samples fell below [`UNDERFLOW_FLOOR`].
    pub underflow: bool,
    /// Every tail sample lies below `eps^q_max`.
    pub below_envelope: bool,
    pub tail_samples: usize,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Estimate `val(x) = sup{b : |x_eps| = O(eps^b)}` from `(eps, |x_eps|)` samples.
///
/// Samples are sorted by decreasing eps; the fit uses the tail half.
/// `IdenticallyZero` needs every sample to be exactly zero; a net that only
/// vanishes (or underflows) on the tail is `BeyondOrder`.
pub fn estimate_valuation(
    samples: &[(f64, f64)],
    cfg: &AsymptoticsConfig,
) -> Result<DecayEstimate, AsymptoticsError> {
    if samples.len() < 8 {
        return Err(AsymptoticsError::TooFewSamples { needed: 8, got: samples.len() });
    }
    for &(e, m) in samples {
        if !e.is_finite() || !m.is_finite() || e <= 0.0 {
            return Err(AsymptoticsError::NonFiniteSample { eps: e });
        }
    }
    let mut sorted: Vec<(f64, f64)> = samples.iter().map(|&(e, m)| (e, m.abs())).collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let tail = &sorted[sorted.len() / 2..];

    let below_envelope = tail.iter().all(|&(e, m)| m <= e.powf(cfg.q_max));
    let mut est = DecayEstimate {
        class: DecayClass::Ambiguous,
        slope: None,
        intercept: None,
        residual: None,
        underflow: false,
        below_envelope,
        tail_samples: tail.len(),
    };
    if sorted.iter().all(|&(_, m)| m == 0.0) {
        est.class = DecayClass::IdenticallyZero;
        return Ok(est);
    }
    let live: Vec<(f64, f64)> = tail.iter().copied().filter(|&(_, m)| m >= UNDERFLOW_FLOOR).collect();
    est.underflow = live.len() < tail.len();
    if live.len() < 2 {
        est.class = DecayClass::BeyondOrder(cfg.q_max);
        return Ok(est);
    }
    let x: Vec<f64> = live.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = live.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    est.slope = Some(slope);
    est.intercept = Some(intercept);
    est.residual = Some(residual);
    est.class = if slope >= cfg.q_max {
        DecayClass::BeyondOrder(cfg.q_max)
    } else if residual <= cfg.residual_tol {
        DecayClass::Order(slope)
    } else {
        DecayClass::Ambiguous
    };
    Ok(est)
}

/// `e^{-val}`; zero for negligible nets.
pub fn ultra_norm(est: &DecayEstimate) -> Result<f64, AsymptoticsError> {
    match est.class {
        DecayClass::Order(a) => Ok((-a).exp()),
        DecayClass::BeyondOrder(_) | DecayClass::IdenticallyZero => Ok(0.0),
        DecayClass::Ambiguous => Err(AsymptoticsError::AmbiguousValuation {
            residual: est.residual.unwrap_or(f64::NAN),
            tol: f64::NAN,
        }),
    }
}

/// Negligibility at order `q_max`. Ambiguous nets count as negligible only
/// when every tail sample sits below `eps^q_max`.
pub fn is_negligible(net: &EpsNet, cfg: &AsymptoticsConfig) -> Result<bool, AsymptoticsError> {
    let est = net.estimate(cfg)?;
    match est.class {
        DecayClass::BeyondOrder(_) | DecayClass::IdenticallyZero => Ok(true),
        DecayClass::Order(_) => Ok(false),
        DecayClass::Ambiguous if est.below_envelope => Ok(true),
        DecayClass::Ambiguous => Err(AsymptoticsError::AmbiguousValuation {
            residual: est.residual.unwrap_or(f64::NAN),
            tol: cfg.residual_tol,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(f: impl Fn(f64) -> f64) -> EpsNet {
        EpsNet::sample_real(&EpsGrid::default(), f)
    }

    #[test]
    fn grid_defaults() {
        let g = EpsGrid::default();
        assert_eq!(g.len(), 35);
        assert_eq!(g.values()[0], 2f64.powi(-6));
        assert_eq!(*g.values().last().unwrap(), 2f64.powi(-40));
        assert_eq!(g.tail_start(), 17);
    }

    #[test]
    fn pure_powers() {
        let cfg = AsymptoticsConfig::default();
        let e = net(|e| e * e).estimate(&cfg).unwrap();
        match e.class {
            DecayClass::Order(a) => assert!((a - 2.0).abs() < 1e-9),
            c => panic!("{c:?}"),
        }
        let e = net(|e| 3.0 / e).estimate(&cfg).unwrap();
        match e.class {
            DecayClass::Order(a) => assert!((a + 1.0).abs() < 1e-9),
            c => panic!("{c:?}"),
        }
        assert!((ultra_norm(&net(|e| e * e).estimate(&cfg).unwrap()).unwrap() - (-2f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn exp_neg_inv_is_beyond_order() {
        let cfg = AsymptoticsConfig::default();
        let e = net(|e| (-1.0 / e).exp()).estimate(&cfg).unwrap();
        assert_eq!(e.class, DecayClass::BeyondOrder(10.0));
        assert!(e.below_envelope);
        assert!(e.underflow);
        let short = EpsNet::sample_real(&EpsGrid::new(2.0, 2, 12).unwrap(), |e| (-1.0 / e).exp());
        assert_eq!(short.estimate(&cfg).unwrap().class, DecayClass::BeyondOrder(10.0));
    }

    #[test]
    fn oscillating_envelope_not_misread() {
        let cfg = AsymptoticsConfig::default();
        let e = net(|e| e * e * (1.0 / e).sin()).estimate(&cfg).unwrap();
        match e.class {
            DecayClass::Ambiguous => {}
            DecayClass::Order(a) => assert!((a - 2.0).abs() < 0.05, "{a}"),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn zero_and_underflow() {
        let cfg = AsymptoticsConfig::default();
        assert_eq!(net(|_| 0.0).estimate(&cfg).unwrap().class, DecayClass::IdenticallyZero);
        let e = net(|_| 1e-300).estimate(&cfg).unwrap();
        assert_eq!(e.class, DecayClass::BeyondOrder(10.0));
        assert!(e.underflow);
        assert!(is_negligible(&net(|e| e.powi(11)), &cfg).unwrap());
        assert!(!is_negligible(&net(|e| e.powi(9)), &cfg).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = AsymptoticsConfig::default();
        assert!(matches!(
            estimate_valuation(&[(0.5, 1.0); 4], &cfg),
            Err(AsymptoticsError::TooFewSamples { .. })
        ));
        let mut s: Vec<(f64, f64)> = (0..10).map(|k| (2f64.powi(-k), 1.0)).collect();
        s[3].1 = f64::NAN;
        assert!(matches!(estimate_valuation(&s, &cfg), Err(AsymptoticsError::NonFiniteSample { .. })));
        assert!(EpsGrid::new(2.0, 6, 2000).is_err());
        assert!(EpsGrid::new(1.0, 6, 20).is_err());
    }

    #[test]
    fn leading_constant_recovers_coefficient() {
        let n = net(|e| -0.75 / e);
        assert!((n.leading_constant(-1.0) + 0.75).abs() < 1e-12);
    }
}
