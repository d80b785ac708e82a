//! Continuous linear functionals on the algebras, as maps from generalized
//! functions to generalized numbers.

mod corpus;
mod kernels;
mod series;
mod support;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use corpus::{negligible_corpus, probe_family, regular_corpus, Probe, CORPUS_VERSION};
pub use kernels::{
    delta_kernel, delta_kernel_global, regularization_sequence, smoothing_defect, smoothing_sequence, SmoothingKernel,
};
pub use series::{series_delta, taylor_delta_series, SeriesDeltaReport, TailRow, TaylorReport, TaylorRow};
pub use support::{probe_bump, support_probe};

use crate::asymptotics::{AsymptoticsConfig, AsymptoticsError, EpsGrid, EpsNet};
use crate::genfun::{
    pair_at, point_value_net, GenFunConfig, GenFunError, GenFunction, KernelForm, Region, SmoothRep, SpaceTag,
};
use crate::mollifier::{Cutoff, KernelProfile, Mollifier};
use crate::scalars::{GenNumber, GenPoint, ScalarError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),
    #[error("cutoff plateau does not cover the tail of {0}")]
    CutoffDoesNotCoverTail(String),
    #[error("cutoff plateau does not cover the probed support {0:?}")]
    CutoffDoesNotCoverSupport(Vec<f64>),
    #[error("input tagged {tag:?} is outside the domain {domain:?}")]
    NotInDomain { tag: SpaceTag, domain: SpaceTag },
    #[error("input support leaves the restriction window")]
    OutsideWindow,
    #[error("point {0} is not moderate")]
    NotModerate(String),
    #[error("coefficient grid differs from the evaluation grid")]
    GridMismatch,
    #[error("order {0} out of range")]
    BadOrder(usize),
    #[error(transparent)]
    GenFun(#[from] GenFunError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
}

type Result<T> = std::result::Result<T, FunctionalError>;

/// Sampling grid and numerical settings shared by evaluations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub grid: EpsGrid,
    pub asym: AsymptoticsConfig,
    pub genfun: GenFunConfig,
}

impl Context {
    pub fn with_grid(&self, grid: EpsGrid) -> Context {
        Context { grid, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Delta { point: String },
    DirectDistribution { spec: String },
    IntegralKernel { kernel: String },
    Series { terms: Vec<Provenance> },
    Restriction { parent: Box<Provenance>, window: [(f64, f64); 2] },
    Extension { parent: Box<Provenance>, plateau: (f64, f64) },
}

pub type Evaluator = dyn Fn(&GenFunction, &Context) -> Result<EpsNet> + Send + Sync;

#[derive(Clone)]
pub struct Functional {
    eval: Arc<Evaluator>,
    domain: SpaceTag,
    provenance: Provenance,
    window: Region,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Functional({:?} on {:?})", self.provenance, self.domain)
    }
}

/// Whether a functional on `domain` accepts inputs tagged `tag`.
pub fn accepts(domain: SpaceTag, tag: SpaceTag) -> bool {
    match domain {
        SpaceTag::G | SpaceTag::GInf => true,
        SpaceTag::Gc | SpaceTag::GcInf => tag.is_compact(),
        SpaceTag::GS | SpaceTag::GSInf | SpaceTag::GTau => tag.is_global(),
    }
}

fn inside(b: &Region, w: &Region, dim: usize) -> bool {
    b.is_empty() || (0..dim).all(|i| b.lo[i] >= w.lo[i] && b.hi[i] <= w.hi[i])
}

impl Functional {
    pub fn new<F>(eval: F, domain: SpaceTag, provenance: Provenance) -> Functional
    where
        F: Fn(&GenFunction, &Context) -> Result<EpsNet> + Send + Sync + 'static,
    {
        Functional { eval: Arc::new(eval), domain, provenance, window: Region::FULL }
    }

    pub fn domain(&self) -> SpaceTag {
        self.domain
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn window(&self) -> &Region {
        &self.window
    }

    /// The representative net `(T(u)_eps)` on the context grid.
    pub fn apply_net(&self, u: &GenFunction, ctx: &Context) -> Result<EpsNet> {
        if !accepts(self.domain, u.tag()) {
            return Err(FunctionalError::NotInDomain { tag: u.tag(), domain: self.domain });
        }
        if self.window != Region::FULL {
            for e in ctx.grid.values() {
                if !inside(&u.support_at(e), &self.window, u.dim()) {
                    return Err(FunctionalError::OutsideWindow);
                }
            }
        }
        (self.eval)(u, ctx)
    }

    pub fn apply(&self, u: &GenFunction, ctx: &Context) -> Result<GenNumber> {
        Ok(GenNumber::from_net(self.apply_net(u, ctx)?, &ctx.asym)?)
    }
}

/// `delta_x(u) = u(x)`.
pub fn delta(x: &GenPoint, ctx: &Context) -> Result<Functional> {
    if !x.is_moderate(&ctx.grid, &ctx.asym) {
        return Err(FunctionalError::NotModerate(x.label().into()));
    }
    let domain = if x.is_compactly_supported(&ctx.grid) { SpaceTag::G } else { SpaceTag::GS };
    let p = x.clone();
    Ok(Functional::new(
        move |u, ctx| Ok(point_value_net(u, &p, &ctx.grid)?),
        domain,
        Provenance::Delta { point: x.label().into() },
    ))
}

/// Distributions that can be applied to representatives directly.
#[derive(Clone, Debug)]
pub enum DistributionSpec {
    /// `delta_{x0}^(k)`.
    DeltaDerivative { order: usize, point: f64 },
    /// Density `f`, with its support when compact.
    Regular { density: SmoothRep, support: Option<(f64, f64)> },
}

pub const MAX_DELTA_ORDER: usize = 6;

impl DistributionSpec {
    fn label(&self) -> String {
        match self {
            DistributionSpec::DeltaDerivative { order, point } => format!("delta^({order})_{point}"),
            DistributionSpec::Regular { density, .. } => format!("{density}"),
        }
    }

    fn density(&self) -> Option<GenFunction> {
        match self {
            DistributionSpec::Regular { density, support } => {
                let f = GenFunction::new(density.clone(), 1).ok()?;
                Some(match support {
                    Some((a, b)) => f.with_support(Region::interval(0, *a, *b)).with_tag(SpaceTag::Gc),
                    None => f.with_tag(SpaceTag::GTau),
                })
            }
            _ => None,
        }
    }
}

/// `u -> [(w(u_eps))]`.
pub fn embed_distribution_direct(w: &DistributionSpec) -> Result<Functional> {
    match w {
        DistributionSpec::DeltaDerivative { order, point } => {
            let (k, x0) = (*order, *point);
            if k > MAX_DELTA_ORDER {
                return Err(FunctionalError::UnsupportedDistribution(format!("derivative order {k}")));
            }
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            Ok(Functional::new(
                move |u, ctx| {
                    if u.dim() != 1 {
                        return Err(GenFunError::BadDimension(u.dim()).into());
                    }
                    Ok(EpsNet::try_sample_real(&ctx.grid, |e| -> Result<f64> {
                        if k == 0 {
                            return Ok(u.value(e, &[x0]));
                        }
                        let s = u.rep().line_series(e, &[x0], k)?;
                        Ok(sign * fact * s[k])
                    })?)
                },
                SpaceTag::G,
                Provenance::DirectDistribution { spec: w.label() },
            ))
        }
        DistributionSpec::Regular { .. } => {
            let f = w.density().ok_or_else(|| FunctionalError::UnsupportedDistribution(w.label()))?;
            let mut t = embed_genfunction(&f);
            t.provenance = Provenance::DirectDistribution { spec: w.label() };
            Ok(t)
        }
    }
}

/// `u -> int v u`.
pub fn embed_genfunction(v: &GenFunction) -> Functional {
    // rapidly decreasing kernels are applied to anything; the pairing
    // itself decides whether the integral can be truncated
    let domain = if v.tag().is_global() {
        SpaceTag::G
    } else if v.tag() == SpaceTag::GTau {
        SpaceTag::GS
    } else {
        SpaceTag::Gc
    };
    let label = format!("{}", v.rep());
    let v = v.clone();
    Functional::new(
        move |u, ctx| Ok(EpsNet::try_sample_real(&ctx.grid, |e| pair_at(u, &v, e, &ctx.genfun))?),
        domain,
        Provenance::IntegralKernel { kernel: label },
    )
}

/// `w * phi_eps` as a generalized function in one variable.
pub fn iota(w: &DistributionSpec, phi: &Arc<Mollifier>) -> Result<GenFunction> {
    match w {
        DistributionSpec::DeltaDerivative { order: 0, point } => {
            let form = KernelForm {
                kernel: KernelProfile::mollifier(phi.clone()).reflected(),
                center: GenPoint::constant(&[*point]),
                scale: SmoothRep::eps(),
                amplitude: SmoothRep::constant(1.0),
                cutoff: None,
            };
            Ok(GenFunction::from_kernel(form, SpaceTag::GS))
        }
        DistributionSpec::DeltaDerivative { order, .. } => {
            Err(FunctionalError::UnsupportedDistribution(format!("convolution of a derivative of order {order}")))
        }
        DistributionSpec::Regular { density, support } => {
            let c = SmoothRep::convolve(KernelProfile::mollifier(phi.clone()), SmoothRep::eps(), density.clone());
            let g = GenFunction::new(c, 1)?;
            Ok(match support {
                Some(_) => g.with_tag(SpaceTag::Gc),
                None => g.with_tag(SpaceTag::GTau),
            })
        }
    }
}

/// `u -> int (w * phi_eps) u`.
pub fn iota_prime(w: &DistributionSpec, phi: &Arc<Mollifier>) -> Result<Functional> {
    let mut t = embed_genfunction(&iota(w, phi)?);
    if matches!(w, DistributionSpec::DeltaDerivative { .. }) {
        t.domain = SpaceTag::G;
    }
    t.provenance = Provenance::IntegralKernel { kernel: format!("({}) * phi_eps", w.label()) };
    Ok(t)
}

/// `sum c_i T_i` with generalized-number coefficients.
pub fn linear_combination(terms: Vec<(GenNumber, Functional)>) -> Functional {
    let domain = terms.iter().fold(SpaceTag::G, |d, (_, t)| if accepts(d, t.domain) { t.domain } else { d });
    let provenance = Provenance::Series { terms: terms.iter().map(|(_, t)| t.provenance.clone()).collect() };
    Functional::new(
        move |u, ctx| {
            let mut acc = EpsNet::sample_real(&ctx.grid, |_| 0.0);
            for (c, t) in &terms {
                if c.grid() != &ctx.grid {
                    return Err(FunctionalError::GridMismatch);
                }
                let v = t.apply_net(u, ctx)?;
                acc.values.iter_mut().zip(&v.values).zip(c.values()).for_each(|((a, v), c)| *a += c * v);
            }
            Ok(acc)
        },
        domain,
        provenance,
    )
}

/// `T|_V`: the same evaluator, accepting only inputs supported in `V`.
pub fn restrict(t: &Functional, v: &Region) -> Functional {
    let window = t.window.intersect(v);
    Functional {
        eval: t.eval.clone(),
        domain: t.domain,
        provenance: Provenance::Restriction {
            parent: Box::new(t.provenance.clone()),
            window: [(window.lo[0], window.hi[0]), (window.lo[1], window.hi[1])],
        },
        window,
    }
}

fn cutoff_function(chi: &Cutoff) -> GenFunction {
    GenFunction::new(SmoothRep::cutoff(chi, SmoothRep::var(0)), 1)
        .unwrap()
        .with_support(Region::interval(0, chi.outer.0, chi.outer.1))
        .with_tag(SpaceTag::Gc)
}

/// `T'(u) = T(chi u)`, defined once the probed support of `T` on `window`
/// sits inside the plateau of `chi` with `radius` to spare.
pub fn cutoff_extension(
    t: &Functional,
    chi: &Cutoff,
    window: (f64, f64),
    radius: f64,
    ctx: &Context,
) -> Result<Functional> {
    let supp = support_probe(t, window, radius, ctx)?;
    if supp.iter().any(|&p| p <= chi.inner.0 + radius || p >= chi.inner.1 - radius) {
        return Err(FunctionalError::CutoffDoesNotCoverSupport(supp));
    }
    let inner = t.clone();
    let cut = cutoff_function(chi);
    Ok(Functional::new(
        move |u, ctx| inner.apply_net(&cut.mul(u), ctx),
        SpaceTag::G,
        Provenance::Extension { parent: Box::new(t.provenance.clone()), plateau: chi.inner },
    ))
}

/// `T((chi - 1) u)`, which equals `T'(u) - T(u)` by linearity.
pub fn extension_defect(t: &Functional, chi: &Cutoff, u: &GenFunction, ctx: &Context) -> Result<EpsNet> {
    let w = GenFunction::new(SmoothRep::cutoff(chi, SmoothRep::var(0)) - 1.0, 1)?;
    t.apply_net(&w.mul(u), ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::DecayClass;
    use crate::genfun::{cube, integrate_pair};
    use crate::mollifier::MollifierParams;

    fn x() -> SmoothRep {
        SmoothRep::var(0)
    }

    #[test]
    fn delta_examples() {
        let ctx = Context::default();
        let d = delta(&GenPoint::shifted(&[0.3], 1.0, 1.0), &ctx).unwrap();
        let one = GenFunction::constant(1.0, 1);
        assert!(d.apply(&one, &ctx).unwrap().re().iter().all(|&v| v == 1.0));
        assert_eq!(d.domain(), SpaceTag::G);
        let far = delta(&GenPoint::dilated(&[2.0], 1.0), &ctx).unwrap();
        assert_eq!(far.domain(), SpaceTag::GS);
        let psi = Cutoff::centered(0.0, 9.0, 10.0);
        let u = GenFunction::new(SmoothRep::cutoff(&psi, x()) * x().cos(), 1).unwrap().with_tag(SpaceTag::Gc);
        let est = far.apply(&u, &ctx).unwrap().valuation(&ctx.asym).unwrap();
        assert_eq!(est.class, DecayClass::IdenticallyZero);
        let g = GenFunction::new(x().cos(), 1).unwrap();
        assert!(matches!(far.apply(&g, &ctx), Err(FunctionalError::NotInDomain { .. })));
    }

    #[test]
    fn direct_embeddings() {
        let ctx = Context::default();
        let u = GenFunction::new((x() * 2.0).sin() + x().cos(), 1).unwrap();
        let d0 = embed_distribution_direct(&DistributionSpec::DeltaDerivative { order: 0, point: 0.0 }).unwrap();
        let dd = delta(&GenPoint::constant(&[0.0]), &ctx).unwrap();
        assert_eq!(d0.apply_net(&u, &ctx).unwrap(), dd.apply_net(&u, &ctx).unwrap());
        let d1 = embed_distribution_direct(&DistributionSpec::DeltaDerivative { order: 1, point: 0.0 }).unwrap();
        assert!(d1.apply_net(&u, &ctx).unwrap().values.iter().all(|v| (v.re + 2.0).abs() < 1e-14));
        let d2 = embed_distribution_direct(&DistributionSpec::DeltaDerivative { order: 2, point: 0.0 }).unwrap();
        assert!(d2.apply_net(&u, &ctx).unwrap().values.iter().all(|v| (v.re + 1.0).abs() < 1e-13));
        assert!(embed_distribution_direct(&DistributionSpec::DeltaDerivative { order: 7, point: 0.0 }).is_err());
        let psi = Cutoff::centered(0.0, 1.0, 2.0);
        let f = SmoothRep::cutoff(&psi, x()) * x();
        let w = DistributionSpec::Regular { density: f.clone(), support: Some((-2.0, 2.0)) };
        let t = embed_distribution_direct(&w).unwrap();
        let fg = GenFunction::new(f, 1).unwrap().with_tag(SpaceTag::Gc);
        let a = t.apply_net(&u, &ctx).unwrap();
        let b = integrate_pair(&fg, &u, &ctx.grid, &ctx.genfun, &ctx.asym).unwrap();
        for (p, q) in a.values.iter().zip(b.values()) {
            assert!((p.re - q.re).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_constant_integrates_bump() {
        let ctx = Context::default();
        let one = GenFunction::constant(1.0, 1);
        let t = embed_genfunction(&one);
        assert_eq!(t.domain(), SpaceTag::Gc);
        let bump = Cutoff::centered(0.0, 1.0, 2.0);
        let b = GenFunction::new(SmoothRep::cutoff(&bump, x()), 1).unwrap().with_tag(SpaceTag::Gc);
        let c = crate::genfun::integrate_at(b.rep(), 1, &cube(1, -2.0, 2.0), 0.5, &ctx.genfun).unwrap();
        assert!(t.apply_net(&b, &ctx).unwrap().values.iter().all(|v| (v.re - c).abs() < 1e-12));
    }

    #[test]
    fn restriction_and_extension() {
        let ctx = Context::default();
        let d = delta(&GenPoint::constant(&[0.5]), &ctx).unwrap();
        let v = Region::interval(0, -2.0, 2.0);
        let w = Region::interval(0, -1.0, 1.0);
        let rw = restrict(&d, &w);
        let rvw = restrict(&restrict(&d, &v), &w);
        let p = probe_bump(0.4, 0.1, 0);
        assert_eq!(rw.apply_net(&p, &ctx).unwrap(), rvw.apply_net(&p, &ctx).unwrap());
        let outside = probe_bump(1.5, 0.1, 0);
        assert_eq!(rw.apply_net(&outside, &ctx), Err(FunctionalError::OutsideWindow));
        let chi = Cutoff::centered(0.0, 2.0, 3.0);
        let e = cutoff_extension(&d, &chi, (-3.0, 3.0), 1e-2, &ctx).unwrap();
        let g = GenFunction::new(x().cos(), 1).unwrap();
        let diff = e.apply_net(&g, &ctx).unwrap().zip_with(&d.apply_net(&g, &ctx).unwrap(), |a, b| a - b).unwrap();
        assert!(diff.values.iter().all(|v| v.re == 0.0));
        let narrow = Cutoff::centered(-1.0, 0.5, 1.0);
        assert!(matches!(
            cutoff_extension(&d, &narrow, (-3.0, 3.0), 1e-2, &ctx),
            Err(FunctionalError::CutoffDoesNotCoverSupport(_))
        ));
    }

    #[test]
    fn iota_prime_of_delta_matches_kernel() {
        let ctx = Context::default();
        let phi = Mollifier::build(MollifierParams::default()).unwrap();
        let w = DistributionSpec::DeltaDerivative { order: 0, point: 0.0 };
        let tp = iota_prime(&w, &phi).unwrap();
        let td = embed_distribution_direct(&w).unwrap();
        let u = GenFunction::new(x().cos() * (x() * 0.5).exp(), 1).unwrap();
        let a = tp.apply_net(&u, &ctx).unwrap();
        let b = td.apply_net(&u, &ctx).unwrap();
        let d = a.zip_with(&b, |p, q| p - q).unwrap();
        assert!(d.estimate(&ctx.asym).unwrap().class.is_negligible_class());
    }

    #[test]
    fn linear_combination_of_deltas() {
        let ctx = Context::default();
        let d0 = delta(&GenPoint::constant(&[0.0]), &ctx).unwrap();
        let d1 = delta(&GenPoint::constant(&[1.0]), &ctx).unwrap();
        let a = GenNumber::sample(&ctx.grid, |e| e, &ctx.asym).unwrap();
        let b = GenNumber::constant(&ctx.grid, -2.0);
        let t = linear_combination(vec![(a, d0), (b, d1)]);
        let u = GenFunction::new(x() + 1.0, 1).unwrap();
        let net = t.apply_net(&u, &ctx).unwrap();
        for (v, e) in net.values.iter().zip(ctx.grid.values()) {
            assert!((v.re - (e - 4.0)).abs() < 1e-14);
        }
    }
}
