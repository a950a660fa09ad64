//! Closed-form geometries: flat asymptotic models and the explicit
//! gravitational-instanton families, exposed as samplers of Brill data.
//!
//! Every sampler returns the metric data of the submersion form
//!
//!   g = e^{2 alpha} (d rho^2 + dz^2) + G_ij (d phi^i + A^i) (d phi^j + A^j)
//!
//! at a point of the (rho, z) half-plane. All shipped families have A = 0.

mod chenteo;
mod curved;
mod flat;
mod prolate;
mod weyl;

pub use chenteo::ChenTeoData;
pub use curved::{ChargedTaubBolt, Kerr, ReissnerNordstrom};
pub use prolate::{newton_invert_2d, Prolate, ProlatePoint};
pub use weyl::{ReissnerNordstromWeyl, SchwarzschildWeyl};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Sym2;
use crate::rod::{RodDataSet, RodStructure};

/// Asymptotic model class of an end, with its moduli.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClassKind {
    /// Flat cone over L(p, q); Hopf chart with theta in [0, pi/2].
    Ale { p: u64, q: i64 },
    /// Circle bundle of Euler number -k over the 2-sphere, fiber size ell.
    Alf { k: u64, ell: f64 },
    /// S^1 x S^2 end with twist beta and circle size ell.
    Af { beta: f64, ell: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticClass {
    pub kind: ClassKind,
    /// Decay rate kappa of |g - b| relative to the model; fit hint only.
    pub kappa: f64,
}

impl AsymptoticClass {
    pub fn ale(p: u64, q: i64, kappa: f64) -> Self {
        AsymptoticClass { kind: ClassKind::Ale { p, q }, kappa }
    }

    pub fn alf(k: u64, ell: f64, kappa: f64) -> Self {
        AsymptoticClass { kind: ClassKind::Alf { k, ell }, kappa }
    }

    pub fn af(beta: f64, ell: f64, kappa: f64) -> Self {
        AsymptoticClass { kind: ClassKind::Af { beta, ell }, kappa }
    }

    /// Twist constant beta*ell selecting the reduction branch; 0 off AF.
    pub fn beta_ell(&self) -> f64 {
        match self.kind {
            ClassKind::Af { beta, ell } => beta * ell,
            _ => 0.0,
        }
    }

    pub fn ell(&self) -> Option<f64> {
        match self.kind {
            ClassKind::Ale { .. } => None,
            ClassKind::Alf { ell, .. } | ClassKind::Af { ell, .. } => Some(ell),
        }
    }

    /// Same class up to floating-point slack in the moduli.
    pub fn compatible(&self, other: &AsymptoticClass) -> bool {
        fn close(a: f64, b: f64) -> bool {
            (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
        }
        match (self.kind, other.kind) {
            (ClassKind::Ale { p, q }, ClassKind::Ale { p: p2, q: q2 }) => p == p2 && q == q2,
            (ClassKind::Alf { k, ell }, ClassKind::Alf { k: k2, ell: e2 }) => {
                k == k2 && close(ell, e2)
            }
            (ClassKind::Af { beta, ell }, ClassKind::Af { beta: b2, ell: e2 }) => {
                close(beta, b2) && close(ell, e2)
            }
            _ => false,
        }
    }

    /// Half-plane image of the model polar chart.
    ///
    /// ALE: (rho, z) = (r^2/2p)(sin 2theta, cos 2theta); ALF/AF: ell r (sin, cos).
    pub fn model_to_half_plane(&self, r: f64, theta: f64) -> (f64, f64) {
        match self.kind {
            ClassKind::Ale { p, .. } => {
                let w = r * r / (2.0 * p as f64);
                let (s, c) = (2.0 * theta).sin_cos();
                (w * s, w * c)
            }
            ClassKind::Alf { ell, .. } | ClassKind::Af { ell, .. } => {
                let (s, c) = theta.sin_cos();
                (ell * r * s, ell * r * c)
            }
        }
    }

    /// Upper limit of the model polar angle.
    pub fn theta_max(&self) -> f64 {
        match self.kind {
            ClassKind::Ale { .. } => std::f64::consts::FRAC_PI_2,
            _ => std::f64::consts::PI,
        }
    }

    /// Conformal factor J^2 with d rho^2 + dz^2 = J^2 (dr^2 + r^2 dtheta^2).
    pub fn conformal_j2(&self, r: f64) -> f64 {
        match self.kind {
            ClassKind::Ale { p, .. } => r * r / ((p * p) as f64),
            ClassKind::Alf { ell, .. } | ClassKind::Af { ell, .. } => ell * ell,
        }
    }

    /// d(log rho)/dr at fixed theta in the model chart.
    pub fn dlog_rho_dr(&self, r: f64) -> f64 {
        match self.kind {
            ClassKind::Ale { .. } => 2.0 / r,
            _ => 1.0 / r,
        }
    }

    /// Area element of the r-level set per unit d theta (torus angles integrated out
    /// contribute the closed-form 4 pi^2 separately).
    pub fn area_element(&self, r: f64, theta: f64) -> f64 {
        match self.kind {
            ClassKind::Ale { p, .. } => r.powi(3) / (2.0 * p as f64) * (2.0 * theta).sin(),
            ClassKind::Alf { ell, .. } | ClassKind::Af { ell, .. } => {
                ell * r * r * theta.sin()
            }
        }
    }

    /// Orbit-space conformal exponent alpha_b of the model.
    pub fn model_alpha(&self, r: f64) -> f64 {
        match self.kind {
            ClassKind::Ale { p, .. } => -(r / p as f64).ln(),
            ClassKind::Alf { ell, .. } | ClassKind::Af { ell, .. } => -ell.ln(),
        }
    }

    /// Torus fiber matrix G_b of the model at (r, theta).
    pub fn model_torus_matrix(&self, r: f64, theta: f64) -> Sym2 {
        match self.kind {
            ClassKind::Ale { p, q } => flat::ale_torus_matrix(p as f64, q as f64, r, theta),
            ClassKind::Alf { k, ell } => flat::alf_torus_matrix(k as f64, ell, 0.0, r, theta),
            ClassKind::Af { beta, ell } => flat::af_torus_matrix(beta, ell, r, theta),
        }
    }

    /// Analytic r-derivative of the model torus matrix at fixed theta.
    pub fn model_torus_matrix_dr(&self, r: f64, theta: f64) -> Sym2 {
        match self.kind {
            ClassKind::Ale { p, q } => {
                // All entries scale as r^2.
                flat::ale_torus_matrix(p as f64, q as f64, r, theta).scale(2.0 / r)
            }
            ClassKind::Alf { k, ell } => flat::alf_torus_matrix_dr(k as f64, ell, 0.0, r, theta),
            ClassKind::Af { beta, ell } => flat::af_torus_matrix_dr(beta, ell, r, theta),
        }
    }
}

/// Brill metric data at one half-plane point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BrillSample {
    pub rho: f64,
    pub z: f64,
    pub alpha: f64,
    pub g: Sym2,
    /// Connection coefficients A^i_a, identically zero for shipped families.
    pub a_conn: [[f64; 2]; 2],
}

impl BrillSample {
    pub fn new(rho: f64, z: f64, alpha: f64, g: Sym2) -> Self {
        BrillSample { rho, z, alpha, g, a_conn: [[0.0; 2]; 2] }
    }
}

/// Anything that can be sampled as Brill data over the half-plane.
pub trait BrillField: Sync {
    fn class(&self) -> AsymptoticClass;
    fn rod_data(&self) -> Result<RodDataSet>;
    fn sample(&self, rho: f64, z: f64) -> Result<BrillSample>;

    fn beta_ell(&self) -> f64 {
        self.class().beta_ell()
    }
}

/// Parameter records for the shipped closed-form families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyParams {
    FlatAle { p: u64, q: i64 },
    FlatAlf { k: u64, ell: f64, beta: f64 },
    FlatAf { beta: f64, ell: f64 },
    EuclideanR4,
    Kerr { r_plus: f64, a: f64 },
    Schwarzschild { m: f64 },
    ReissnerNordstrom { r_plus: f64, c1: f64 },
    TaubNut { ell: f64 },
    TaubBolt { ell: f64 },
    ChargedTaubBolt { r_plus: f64, ell: f64 },
    EguchiHanson { a: f64 },
    ChenTeoAsymptotic { kappa: f64, xi: f64 },
}

impl FamilyParams {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyParams::FlatAle { .. } => "flat-ale",
            FamilyParams::FlatAlf { .. } => "flat-alf",
            FamilyParams::FlatAf { .. } => "flat-af",
            FamilyParams::EuclideanR4 => "euclidean-r4",
            FamilyParams::Kerr { .. } => "kerr",
            FamilyParams::Schwarzschild { .. } => "schwarzschild",
            FamilyParams::ReissnerNordstrom { .. } => "reissner-nordstrom",
            FamilyParams::TaubNut { .. } => "taub-nut",
            FamilyParams::TaubBolt { .. } => "taub-bolt",
            FamilyParams::ChargedTaubBolt { .. } => "charged-taub-bolt",
            FamilyParams::EguchiHanson { .. } => "eguchi-hanson",
            FamilyParams::ChenTeoAsymptotic { .. } => "chen-teo",
        }
    }

    /// Check the parameter-domain invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        match *self {
            FamilyParams::FlatAle { p, q } => {
                if p < 1 {
                    return fail("flat-ale requires p >= 1".into());
                }
                if !RodStructure::new(p as i64, q).is_valid() {
                    return fail(format!("flat-ale requires gcd(p, q) = 1, got ({p}, {q})"));
                }
            }
            FamilyParams::FlatAlf { k, ell, .. } => {
                if k < 1 {
                    return fail("flat-alf requires k >= 1".into());
                }
                if ell <= 0.0 {
                    return fail("flat-alf requires ell > 0".into());
                }
            }
            FamilyParams::FlatAf { ell, .. } => {
                if ell <= 0.0 {
                    return fail("flat-af requires ell > 0".into());
                }
            }
            FamilyParams::EuclideanR4 => {}
            FamilyParams::Kerr { r_plus, a } => {
                if !(a >= 0.0) {
                    return fail("kerr requires a >= 0".into());
                }
                if !(r_plus > a) {
                    return fail(format!(
                        "kerr requires r_plus > a for positive-definiteness, got r_plus={r_plus}, a={a}"
                    ));
                }
            }
            FamilyParams::Schwarzschild { m } => {
                if !(m > 0.0) {
                    return fail("schwarzschild requires m > 0".into());
                }
            }
            FamilyParams::ReissnerNordstrom { r_plus, c1 } => {
                if !(r_plus > 0.0) {
                    return fail("reissner-nordstrom requires r_plus > 0".into());
                }
                if !(r_plus * r_plus > c1) {
                    return fail(format!(
                        "reissner-nordstrom requires r_plus^2 > c1, got r_plus={r_plus}, c1={c1}"
                    ));
                }
            }
            FamilyParams::TaubNut { ell } | FamilyParams::TaubBolt { ell } => {
                if !(ell > 0.0) {
                    return fail("taub families require ell > 0".into());
                }
            }
            FamilyParams::ChargedTaubBolt { r_plus, ell } => {
                if !(ell > 0.0) {
                    return fail("charged-taub-bolt requires ell > 0".into());
                }
                if !(r_plus > ell / 4.0) {
                    return fail(format!(
                        "charged-taub-bolt requires r_plus > ell/4, got r_plus={r_plus}, ell={ell}"
                    ));
                }
            }
            FamilyParams::EguchiHanson { a } => {
                if !(a > 0.0) {
                    return fail("eguchi-hanson requires a > 0".into());
                }
            }
            FamilyParams::ChenTeoAsymptotic { kappa, xi } => {
                if !(kappa > 0.0) {
                    return fail("chen-teo requires kappa > 0".into());
                }
                let hi = 1.0 / 2f64.sqrt();
                if !(xi > 0.5 && xi < hi) {
                    return fail(format!("chen-teo requires xi in (1/2, 1/sqrt(2)), got {xi}"));
                }
            }
        }
        Ok(())
    }

    /// Closed-form mass.
    pub fn exact_mass(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            FamilyParams::FlatAle { .. }
            | FamilyParams::FlatAlf { .. }
            | FamilyParams::FlatAf { .. }
            | FamilyParams::EuclideanR4
            | FamilyParams::EguchiHanson { .. } => 0.0,
            FamilyParams::Kerr { r_plus, a } => {
                let k = curved::Kerr::new(r_plus, a);
                let by_params = 4.0 * PI * (r_plus * r_plus - a * a).powi(2)
                    / (r_plus * r_plus + a * a);
                let by_moduli = 4.0 * PI * k.m * k.ell;
                debug_assert!((by_params - by_moduli).abs() <= 1e-12 * by_params.abs().max(1.0));
                by_moduli
            }
            FamilyParams::Schwarzschild { m } => 16.0 * PI * m * m,
            FamilyParams::ReissnerNordstrom { r_plus, c1 } => {
                let rn = curved::ReissnerNordstrom::new(r_plus, c1);
                4.0 * PI * rn.m * rn.ell
            }
            FamilyParams::TaubNut { ell } => PI * ell * ell,
            FamilyParams::TaubBolt { ell } => 1.25 * PI * ell * ell,
            FamilyParams::ChargedTaubBolt { r_plus, ell } => {
                let c = r_plus + ell / 16.0 - r_plus * r_plus / ell;
                4.0 * PI * ell * c
            }
            FamilyParams::ChenTeoAsymptotic { kappa, xi } => {
                ChenTeoData::new(kappa, xi).mass_from_ell()
            }
        }
    }

    /// Family chart transform (r, theta) -> (rho, z); errors below the
    /// horizon or bolt radius.
    pub fn chart_to_half_plane(&self, r: f64, theta: f64) -> Result<(f64, f64)> {
        let bad = |reason: &str| Error::OutsideDomain {
            rho: f64::NAN,
            z: f64::NAN,
            reason: format!("r = {r}: {reason}"),
        };
        match *self {
            FamilyParams::FlatAle { .. }
            | FamilyParams::FlatAlf { .. }
            | FamilyParams::FlatAf { .. }
            | FamilyParams::EuclideanR4 => Ok(self.class().model_to_half_plane(r, theta)),
            FamilyParams::Kerr { .. }
            | FamilyParams::Schwarzschild { .. }
            | FamilyParams::ReissnerNordstrom { .. }
            | FamilyParams::TaubBolt { .. }
            | FamilyParams::ChargedTaubBolt { .. } => {
                let (pr, shift) = self.prolate_chart().unwrap();
                let u = r - shift;
                if u < pr.s {
                    return Err(bad("below the horizon/bolt radius"));
                }
                Ok(pr.forward(u, theta))
            }
            FamilyParams::TaubNut { ell } => {
                if r < 0.0 {
                    return Err(bad("needs r >= 0"));
                }
                let (s, c) = theta.sin_cos();
                Ok((ell * r * s, ell * r * c))
            }
            FamilyParams::EguchiHanson { a } => {
                if r < a {
                    return Err(bad("below the bolt radius a"));
                }
                let (s2, c2) = (2.0 * theta).sin_cos();
                let rho = 0.25 * (r.powi(4) - a.powi(4)).sqrt() * s2;
                Ok((rho, 0.25 * r * r * c2))
            }
            FamilyParams::ChenTeoAsymptotic { .. } => {
                Err(Error::InvalidParams("chen-teo ships asymptotic data only".into()))
            }
        }
    }

    /// Prolate-spheroidal chart (when the family has one) and the radial shift
    /// with u = r - shift.
    fn prolate_chart(&self) -> Option<(Prolate, f64)> {
        match *self {
            FamilyParams::Kerr { r_plus, a } => {
                let k = curved::Kerr::new(r_plus, a);
                Some((Prolate::new(k.ell, k.s), k.m))
            }
            FamilyParams::Schwarzschild { m } => {
                let rn = curved::ReissnerNordstrom::new(2.0 * m, 0.0);
                Some((Prolate::new(rn.ell, rn.s), rn.m))
            }
            FamilyParams::ReissnerNordstrom { r_plus, c1 } => {
                let rn = curved::ReissnerNordstrom::new(r_plus, c1);
                Some((Prolate::new(rn.ell, rn.s), rn.m))
            }
            FamilyParams::TaubBolt { ell } => {
                Some((Prolate::new(ell, 3.0 * ell / 16.0), 5.0 * ell / 16.0))
            }
            FamilyParams::ChargedTaubBolt { r_plus, ell } => {
                let c = curved::ChargedTaubBolt::new(r_plus, ell);
                Some((Prolate::new(ell, c.s), c.mid))
            }
            _ => None,
        }
    }

    /// Resolved derived constants for the CLI echo.
    pub fn derived_constants(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        match *self {
            FamilyParams::Kerr { r_plus, a } => {
                let k = curved::Kerr::new(r_plus, a);
                out.push(("m".into(), k.m));
                out.push(("ell".into(), k.ell));
                out.push(("beta".into(), k.beta));
            }
            FamilyParams::Schwarzschild { m } => {
                out.push(("m".into(), m));
                out.push(("ell".into(), 4.0 * m));
            }
            FamilyParams::ReissnerNordstrom { r_plus, c1 } => {
                let rn = curved::ReissnerNordstrom::new(r_plus, c1);
                out.push(("m".into(), rn.m));
                out.push(("ell".into(), rn.ell));
                let _ = c1;
            }
            FamilyParams::ChargedTaubBolt { r_plus, ell } => {
                out.push(("c".into(), r_plus + ell / 16.0 - r_plus * r_plus / ell));
            }
            FamilyParams::ChenTeoAsymptotic { kappa, xi } => {
                let ct = ChenTeoData::new(kappa, xi);
                out.push(("ell".into(), ct.ell));
                out.push(("beta".into(), ct.beta));
            }
            _ => {}
        }
        if let Ok(rods) = self.rod_data() {
            for (i, z) in rods.turning_points.iter().enumerate() {
                out.push((format!("z{}", i + 1), *z));
            }
        }
        out
    }
}

impl BrillField for FamilyParams {
    fn class(&self) -> AsymptoticClass {
        match *self {
            FamilyParams::FlatAle { p, q } => AsymptoticClass::ale(p, q, 3.0),
            FamilyParams::EuclideanR4 => AsymptoticClass::ale(1, 0, 3.0),
            FamilyParams::EguchiHanson { .. } => AsymptoticClass::ale(2, 1, 3.0),
            FamilyParams::FlatAlf { k, ell, .. } => AsymptoticClass::alf(k, ell, 0.5),
            FamilyParams::TaubNut { ell }
            | FamilyParams::TaubBolt { ell }
            | FamilyParams::ChargedTaubBolt { ell, .. } => AsymptoticClass::alf(1, ell, 0.5),
            FamilyParams::FlatAf { beta, ell } => AsymptoticClass::af(beta, ell, 0.5),
            FamilyParams::Kerr { r_plus, a } => {
                let k = curved::Kerr::new(r_plus, a);
                AsymptoticClass::af(k.beta, k.ell, 0.5)
            }
            FamilyParams::Schwarzschild { m } => AsymptoticClass::af(0.0, 4.0 * m, 0.5),
            FamilyParams::ReissnerNordstrom { r_plus, c1 } => {
                let rn = curved::ReissnerNordstrom::new(r_plus, c1);
                AsymptoticClass::af(0.0, rn.ell, 0.5)
            }
            FamilyParams::ChenTeoAsymptotic { kappa, xi } => {
                let ct = ChenTeoData::new(kappa, xi);
                AsymptoticClass::af(ct.beta, ct.ell, 0.5)
            }
        }
    }

    fn rod_data(&self) -> Result<RodDataSet> {
        let v = RodStructure::new;
        match *self {
            FamilyParams::FlatAle { p, q } => Ok(RodDataSet::new(
                vec![0.0],
                vec![v(0, 1), v(p as i64, -q)],
            )),
            FamilyParams::EuclideanR4 => {
                Ok(RodDataSet::new(vec![0.0], vec![v(0, 1), v(1, 0)]))
            }
            FamilyParams::FlatAlf { k, .. } => {
                Ok(RodDataSet::new(vec![0.0], vec![v(1, 0), v(-1, k as i64)]))
            }
            FamilyParams::FlatAf { .. } => Ok(RodDataSet::new(vec![], vec![v(1, 0)])),
            FamilyParams::Kerr { .. }
            | FamilyParams::Schwarzschild { .. }
            | FamilyParams::ReissnerNordstrom { .. } => {
                let (pr, _) = self.prolate_chart().unwrap();
                let z2 = pr.ell * pr.s;
                Ok(RodDataSet::new(vec![-z2, z2], vec![v(1, 0), v(0, 1), v(1, 0)]))
            }
            FamilyParams::TaubNut { .. } => {
                Ok(RodDataSet::new(vec![0.0], vec![v(1, 0), v(1, -1)]))
            }
            FamilyParams::TaubBolt { .. } | FamilyParams::ChargedTaubBolt { .. } => {
                let (pr, _) = self.prolate_chart().unwrap();
                let z2 = pr.ell * pr.s;
                Ok(RodDataSet::new(vec![-z2, z2], vec![v(1, 0), v(0, 1), v(1, -1)]))
            }
            FamilyParams::EguchiHanson { a } => {
                let z2 = a * a / 4.0;
                Ok(RodDataSet::new(vec![-z2, z2], vec![v(0, 1), v(1, 0), v(2, -1)]))
            }
            FamilyParams::ChenTeoAsymptotic { .. } => Err(Error::InvalidParams(
                "chen-teo ships asymptotic data only; no rod data".into(),
            )),
        }
    }

    fn sample(&self, rho: f64, z: f64) -> Result<BrillSample> {
        if rho < 0.0 {
            return Err(Error::OutsideDomain { rho, z, reason: "rho must be >= 0".into() });
        }
        match *self {
            FamilyParams::FlatAle { p, q } => flat::sample_ale(p as f64, q as f64, rho, z),
            FamilyParams::EuclideanR4 => flat::sample_ale(1.0, 0.0, rho, z),
            FamilyParams::FlatAlf { k, ell, beta } => {
                flat::sample_alf(k as f64, ell, beta, rho, z)
            }
            FamilyParams::FlatAf { beta, ell } => flat::sample_af(beta, ell, rho, z),
            FamilyParams::Kerr { r_plus, a } => curved::Kerr::new(r_plus, a).sample(rho, z),
            FamilyParams::Schwarzschild { m } => {
                curved::ReissnerNordstrom::new(2.0 * m, 0.0).sample(rho, z)
            }
            FamilyParams::ReissnerNordstrom { r_plus, c1 } => {
                curved::ReissnerNordstrom::new(r_plus, c1).sample(rho, z)
            }
            FamilyParams::TaubNut { ell } => curved::sample_taub_nut(ell, rho, z),
            FamilyParams::TaubBolt { ell } => curved::sample_taub_bolt(ell, rho, z),
            FamilyParams::ChargedTaubBolt { r_plus, ell } => {
                curved::ChargedTaubBolt::new(r_plus, ell).sample(rho, z)
            }
            FamilyParams::EguchiHanson { a } => curved::sample_eguchi_hanson(a, rho, z),
            FamilyParams::ChenTeoAsymptotic { .. } => Err(Error::InvalidParams(
                "chen-teo ships asymptotic data only; no Brill sampler".into(),
            )),
        }
    }
}
