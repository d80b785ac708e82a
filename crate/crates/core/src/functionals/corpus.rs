//! The fixed input families standing in for "all u".

use std::sync::Arc;

use crate::genfun::{GenFunction, Region, SmoothRep, SpaceTag};
use crate::mollifier::{Cutoff, Mollifier};

pub const CORPUS_VERSION: &str = "corpus-v1";

#[derive(Clone, Debug)]
pub struct Probe {
    pub name: String,
    pub u: GenFunction,
}

fn probe(name: &str, rep: SmoothRep, tag: SpaceTag) -> Probe {
    Probe { name: name.into(), u: GenFunction::new(rep, 1).unwrap().with_tag(tag) }
}

fn x() -> SmoothRep {
    SmoothRep::var(0)
}

/// Ten regular one-variable inputs: constant nets plus two with a mild
/// eps dependence.
pub fn regular_corpus() -> Vec<Probe> {
    let gauss = (-(x().powi(2))).exp();
    let cut = Cutoff::centered(0.0, 2.0, 4.0);
    vec![
        probe("one", SmoothRep::constant(1.0), SpaceTag::GInf),
        probe("cos", x().cos(), SpaceTag::GInf),
        probe("sin2x", (x() * 2.0).sin(), SpaceTag::GInf),
        probe("poly", 1.0 + x() - x().powi(2) * 0.5 + x().powi(3) * 0.25, SpaceTag::GInf),
        probe("gauss", gauss.clone(), SpaceTag::GSInf),
        probe("lorentz", 1.0 / (1.0 + x().powi(2)), SpaceTag::GInf),
        probe("expcos", (x() * 0.5).exp() * (x() * 3.0).cos(), SpaceTag::GInf),
        probe("cubic_cut", x().powi(3) * SmoothRep::cutoff(&cut, x() * 0.5), SpaceTag::GcInf),
        probe("eps_inv_cos", x().cos() / SmoothRep::eps(), SpaceTag::GInf),
        probe("shifted_sin", (x() + SmoothRep::eps()).sin() * gauss, SpaceTag::GSInf),
    ]
}

/// Compactly supported probes on `[lo, hi]`: bumps, cut Gaussians and
/// polynomial-cut products at three scales and five translations.
pub fn probe_family(lo: f64, hi: f64) -> Vec<Probe> {
    let w = hi - lo;
    let psi = Cutoff::centered(0.0, 0.5, 1.0);
    let mut out = Vec::new();
    for (si, &h) in [w / 10.0, w / 20.0, w / 40.0].iter().enumerate() {
        for i in 0..5 {
            let c = lo + (i as f64 + 0.5) * w / 5.0;
            let t = SmoothRep::affine(0, SmoothRep::constant(c), SmoothRep::constant(h));
            let bump = SmoothRep::cutoff(&psi, t.clone());
            let supp = Region::interval(0, c - h, c + h);
            let shapes = [
                ("bump", bump.clone()),
                ("gauss", (-(t.powi(2)) * 2.0).exp() * bump.clone()),
                ("poly", (1.0 + t.clone() - t.powi(2) * 2.0) * bump),
            ];
            for (kind, rep) in shapes {
                out.push(Probe {
                    name: format!("{kind}-s{si}-t{i}"),
                    u: GenFunction::new(rep, 1).unwrap().with_support(supp).with_tag(SpaceTag::Gc),
                });
            }
        }
    }
    out
}

/// Negligible nets that are moderate in every Schwartz seminorm; one
/// non-negligible control comes last.
pub fn negligible_corpus(phi: &Arc<Mollifier>) -> Vec<Probe> {
    let e = SmoothRep::eps();
    let fast = (-1.0 / e.clone()).exp();
    let g = (-(x().powi(2))).exp();
    vec![
        probe("osc", fast.clone() * (x() / e.clone()).sin() * g.clone(), SpaceTag::GS),
        probe("flat", fast.clone() * g.clone(), SpaceTag::GS),
        probe("root", (-1.0 / e.sqrt()).exp() * x().cos() * (-(x().powi(2)) * 0.5).exp(), SpaceTag::GS),
        probe("growing", fast.clone() * e.powi(-3) * x() * g.clone(), SpaceTag::GS),
        probe(
            "mollified",
            fast / e.clone() * SmoothRep::mollifier(phi, x() / e.clone()),
            SpaceTag::GS,
        ),
        probe("control", e.powi(2) * g, SpaceTag::GS),
    ]
}
