//! Kernels reproducing point values, and the regularization devices.

use std::sync::Arc;

use super::{Context, FunctionalError, Result};
use crate::genfun::{GenFunction, KernelForm, Region, SmoothRep, SpaceTag};
use crate::mollifier::{Cutoff, KernelProfile, Mollifier};
use crate::scalars::GenPoint;

/// `v = psi(y) phi_eps(x_eps - y)`. The plateau of `psi` must contain a
/// neighbourhood of the tail box of `x`.
pub fn delta_kernel(x: &GenPoint, psi: &Cutoff, phi: &Arc<Mollifier>, ctx: &Context) -> Result<GenFunction> {
    let b = x.compact_box(&ctx.grid).ok_or_else(|| FunctionalError::CutoffDoesNotCoverTail(x.label().into()))?;
    if x.dim() != 1 || !(psi.inner.0 < b[0].0 && b[0].1 < psi.inner.1) {
        return Err(FunctionalError::CutoffDoesNotCoverTail(x.label().into()));
    }
    let form = KernelForm {
        kernel: KernelProfile::mollifier(phi.clone()),
        center: x.clone(),
        scale: SmoothRep::eps(),
        amplitude: SmoothRep::constant(1.0),
        cutoff: Some(SmoothRep::cutoff(psi, SmoothRep::var(0))),
    };
    Ok(GenFunction::from_kernel(form, SpaceTag::Gc).with_support(Region::interval(0, psi.outer.0, psi.outer.1)))
}

/// `v = phi_eps(x_eps - y)` without a cutoff.
pub fn delta_kernel_global(x: &GenPoint, phi: &Arc<Mollifier>, ctx: &Context) -> Result<GenFunction> {
    if x.dim() != 1 {
        return Err(FunctionalError::GenFun(crate::genfun::GenFunError::BadDimension(x.dim())));
    }
    if !x.is_moderate(&ctx.grid, &ctx.asym) {
        return Err(FunctionalError::NotModerate(x.label().into()));
    }
    let form = KernelForm {
        kernel: KernelProfile::mollifier(phi.clone()),
        center: x.clone(),
        scale: SmoothRep::eps(),
        amplitude: SmoothRep::constant(1.0),
        cutoff: None,
    };
    Ok(GenFunction::from_kernel(form, SpaceTag::GS))
}

/// `v_{x,q} = rho_{eps^q}(x_eps - y)`.
pub fn regularization_sequence(x: &GenPoint, rho: &KernelProfile, q: u32) -> Result<GenFunction> {
    if q == 0 {
        return Err(FunctionalError::BadOrder(0));
    }
    let form = KernelForm {
        kernel: rho.clone(),
        center: x.clone(),
        scale: SmoothRep::eps_pow(q as f64),
        amplitude: SmoothRep::constant(1.0),
        cutoff: None,
    };
    Ok(GenFunction::from_kernel(form, SpaceTag::GS))
}

/// Kernels with a closed-form transform for the smoothing device.
#[derive(Clone, Debug)]
pub enum SmoothingKernel {
    Gaussian,
    /// Vanishing-moment mollifier; its transform is the spectral profile.
    Mollifier(Arc<Mollifier>),
}

impl SmoothingKernel {
    fn profile(&self) -> KernelProfile {
        match self {
            SmoothingKernel::Gaussian => KernelProfile::gaussian(),
            SmoothingKernel::Mollifier(m) => KernelProfile::mollifier(m.clone()),
        }
    }

    /// `rho_hat(arg)` and `rho_hat(arg) - 1`.
    fn transform(&self, arg: SmoothRep) -> (SmoothRep, SmoothRep) {
        match self {
            SmoothingKernel::Gaussian => {
                let e = -(arg.powi(2)) * 0.5;
                (e.exp(), e.expm1())
            }
            SmoothingKernel::Mollifier(m) => {
                let c = SmoothRep::profile(m.profile(), arg);
                (c.clone(), c - 1.0)
            }
        }
    }
}

fn check_smoothing(u: &GenFunction, q: u32) -> Result<()> {
    if q == 0 {
        return Err(FunctionalError::BadOrder(0));
    }
    if u.dim() != 1 {
        return Err(FunctionalError::GenFun(crate::genfun::GenFunError::BadDimension(u.dim())));
    }
    Ok(())
}

/// `u_q = rho_hat(eps^q x) (rho_{eps^q} * u_eps)(x)`.
pub fn smoothing_sequence(u: &GenFunction, rho: &SmoothingKernel, q: u32) -> Result<GenFunction> {
    check_smoothing(u, q)?;
    let s = SmoothRep::eps_pow(q as f64);
    let (hat, _) = rho.transform(s.clone() * SmoothRep::var(0));
    let conv = SmoothRep::convolve(rho.profile(), s, u.rep().clone());
    Ok(GenFunction::new(hat * conv, 1)?.with_tag(SpaceTag::GS))
}

/// `u_q - u`, written as `rho_hat (rho * u - u) + (rho_hat - 1) u` so that
/// both pieces are resolved below roundoff.
pub fn smoothing_defect(u: &GenFunction, rho: &SmoothingKernel, q: u32) -> Result<GenFunction> {
    check_smoothing(u, q)?;
    let s = SmoothRep::eps_pow(q as f64);
    let (hat, hat_m1) = rho.transform(s.clone() * SmoothRep::var(0));
    let d = SmoothRep::convolve_defect(rho.profile(), s, u.rep().clone(), 1);
    Ok(GenFunction::new(hat * d + hat_m1 * u.rep().clone(), 1)?.with_tag(SpaceTag::GTau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{DecayClass, EpsNet};
    use crate::functionals::{delta, embed_genfunction};
    use crate::genfun::{point_value_net, weighted_sup_net, GenFunConfig};
    use crate::mollifier::MollifierParams;

    fn x() -> SmoothRep {
        SmoothRep::var(0)
    }

    fn defect(ctx: &Context, v: &GenFunction, p: &GenPoint, u: &GenFunction) -> EpsNet {
        let a = embed_genfunction(v).apply_net(u, ctx).unwrap();
        let b = point_value_net(u, p, &ctx.grid).unwrap();
        a.zip_with(&b, |s, t| s - t).unwrap()
    }

    #[test]
    fn delta_kernel_reproduces_point_values() {
        let ctx = Context::default();
        let phi = Mollifier::build(MollifierParams::default()).unwrap();
        let psi = Cutoff::centered(0.0, 2.0, 3.0);
        let p = GenPoint::shifted(&[0.3], 1.0, 1.0);
        let v = delta_kernel(&p, &psi, &phi, &ctx).unwrap();
        let u = GenFunction::new(x().cos(), 1).unwrap();
        let est = defect(&ctx, &v, &p, &u).estimate(&ctx.asym).unwrap();
        assert!(est.class.order_lower_bound().unwrap() >= 8.0, "{est:?}");
        let one = GenFunction::constant(1.0, 1);
        let est = defect(&ctx, &v, &p, &one).estimate(&ctx.asym).unwrap();
        assert!(est.class.is_negligible_class(), "{est:?}");
        let off = GenPoint::constant(&[2.5]);
        assert!(matches!(delta_kernel(&off, &psi, &phi, &ctx), Err(FunctionalError::CutoffDoesNotCoverTail(_))));
    }

    #[test]
    fn regularization_defect_orders() {
        let ctx = Context::default();
        let p = GenPoint::constant(&[0.3]);
        let u = GenFunction::new(x().sin(), 1).unwrap();
        let v = regularization_sequence(&p, &KernelProfile::gaussian(), 3).unwrap();
        let est = defect(&ctx, &v, &p, &u).estimate(&ctx.asym).unwrap();
        assert!(est.class.order_lower_bound().unwrap() >= 2.5, "{est:?}");
        let one = GenFunction::constant(1.0, 1);
        let v1 = regularization_sequence(&p, &KernelProfile::gaussian(), 1).unwrap();
        let est = defect(&ctx, &v1, &p, &one).estimate(&ctx.asym).unwrap();
        assert_eq!(est.class, DecayClass::IdenticallyZero);
        let big = u.scale_eps_pow(-2.0);
        let a = defect(&ctx, &v1, &p, &u).estimate(&ctx.asym).unwrap().slope.unwrap();
        let b = defect(&ctx, &v1, &p, &big).estimate(&ctx.asym).unwrap().slope.unwrap();
        assert!((a - b - 2.0).abs() < 0.1, "{a} {b}");
        assert!(delta(&p, &ctx).is_ok());
    }

    #[test]
    fn smoothing_defects() {
        let ctx = Context::default();
        let cfg = GenFunConfig { sup_points: 128, ..Default::default() };
        let u = GenFunction::new(x(), 1).unwrap().with_tag(SpaceTag::GTau);
        let d = smoothing_defect(&u, &SmoothingKernel::Gaussian, 2).unwrap();
        let net = weighted_sup_net(&d, 2.0, 1, 50.0, &ctx.grid, &cfg).unwrap();
        let est = net.estimate(&ctx.asym).unwrap();
        assert!(est.class.order_lower_bound().unwrap() >= 1.5, "{est:?}");
        let phi = Mollifier::build(MollifierParams::default()).unwrap();
        let one = GenFunction::constant(1.0, 1);
        let d = smoothing_defect(&one, &SmoothingKernel::Mollifier(phi), 1).unwrap();
        let k = crate::genfun::cube(1, -5.0, 5.0);
        let net = crate::genfun::seminorm_net(&d, &k, 0, &ctx.grid, &cfg).unwrap();
        let est = net.estimate(&ctx.asym).unwrap();
        assert!(est.class.is_negligible_class(), "{est:?}");
    }
}
