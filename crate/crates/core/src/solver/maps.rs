//! Reference maps into the hyperbolic plane: closed-form model maps with
//! the prescribed rod singularities, maps reduced from Brill samplers, and
//! compactly supported perturbations.

use crate::error::{Error, Result};
use crate::families::{AsymptoticClass, BrillField, ClassKind, FamilyParams};
use crate::geometry::{fermi_coordinates, HyperbolicPoint};
use crate::rod::RodDataSet;

/// A map (V, W): half-plane -> H^2 with optional analytic derivatives.
pub trait MapField: Sync {
    fn point(&self, rho: f64, z: f64) -> HyperbolicPoint;

    fn grad_v(&self, rho: f64, z: f64) -> (f64, f64) {
        fd_grad(&|r, zz| self.point(r, zz).v, rho, z)
    }

    fn grad_w(&self, rho: f64, z: f64) -> (f64, f64) {
        fd_grad(&|r, zz| self.point(r, zz).w, rho, z)
    }

    /// Axisymmetric flat Laplacian of V.
    fn laplacian_v(&self, rho: f64, z: f64) -> f64 {
        fd_laplacian(&|r, zz| self.point(r, zz).v, rho, z)
    }

    fn laplacian_w(&self, rho: f64, z: f64) -> f64 {
        fd_laplacian(&|r, zz| self.point(r, zz).w, rho, z)
    }

    /// Exactly harmonic by construction (flat/Ricci-flat closed forms).
    fn is_exactly_harmonic(&self) -> bool {
        false
    }
}

fn fd_grad(f: &dyn Fn(f64, f64) -> f64, rho: f64, z: f64) -> (f64, f64) {
    let h = 1e-6 * (1.0 + rho.abs().max(z.abs()));
    let h = h.min(0.25 * rho.abs().max(1e-12));
    (
        (f(rho + h, z) - f(rho - h, z)) / (2.0 * h),
        (f(rho, z + h) - f(rho, z - h)) / (2.0 * h),
    )
}

fn fd_laplacian(f: &dyn Fn(f64, f64) -> f64, rho: f64, z: f64) -> f64 {
    let h = 1e-4 * (1.0 + rho.abs().max(z.abs()));
    let h = h.min(0.25 * rho.abs().max(1e-12));
    let c = f(rho, z);
    (f(rho + h, z) + f(rho - h, z) - 2.0 * c) / (h * h)
        + (f(rho + h, z) - f(rho - h, z)) / (2.0 * h * rho)
        + (f(rho, z + h) + f(rho, z - h) - 2.0 * c) / (h * h)
}

/// AF_0 model map with Weyl rod potentials:
/// V = log(rho/ell^2) + sum_n log((sigma_n + L_n)/(sigma_n - L_n)), W = 0.
///
/// Each rod potential is the classical harmonic rod potential, so the sum
/// is exactly harmonic and carries case-II0 behavior on each listed rod.
#[derive(Debug, Clone)]
pub struct WeylRodMap {
    pub ell: f64,
    /// (z_start, z_end) of each (0, 1)-structure rod.
    pub rods: Vec<(f64, f64)>,
}

impl WeylRodMap {
    pub fn new(ell: f64, rods: Vec<(f64, f64)>) -> Self {
        WeylRodMap { ell, rods }
    }

    fn rod_sigma(rod: &(f64, f64), rho: f64, z: f64) -> (f64, f64, f64, f64) {
        let r1 = rho.hypot(z - rod.0);
        let r2 = rho.hypot(z - rod.1);
        let sigma = r1 + r2;
        let big_l = rod.1 - rod.0;
        (r1, r2, sigma, big_l)
    }

    /// sigma^2 - L^2 without near-rod cancellation.
    fn sigma2_minus_l2(rod: &(f64, f64), rho: f64, z: f64) -> f64 {
        let a = z - rod.0;
        let b = z - rod.1;
        let p = a * b;
        let q = rho.hypot(a) * rho.hypot(b);
        let qp = if p >= 0.0 {
            q + p
        } else {
            rho * rho * (rho * rho + a * a + b * b) / (q - p)
        };
        2.0 * (rho * rho + qp)
    }
}

impl MapField for WeylRodMap {
    fn point(&self, rho: f64, z: f64) -> HyperbolicPoint {
        let mut v = (rho / (self.ell * self.ell)).ln();
        for rod in &self.rods {
            let (_, _, sigma, big_l) = Self::rod_sigma(rod, rho, z);
            let s2l2 = Self::sigma2_minus_l2(rod, rho, z);
            // log((sigma + L)/(sigma - L)) = log((sigma + L)^2 / (sigma^2 - L^2)).
            v += ((sigma + big_l) * (sigma + big_l) / s2l2).ln();
        }
        HyperbolicPoint::new(v, 0.0)
    }

    fn grad_v(&self, rho: f64, z: f64) -> (f64, f64) {
        let mut g = (1.0 / rho, 0.0);
        for rod in &self.rods {
            let (r1, r2, _, big_l) = Self::rod_sigma(rod, rho, z);
            let s2l2 = Self::sigma2_minus_l2(rod, rho, z);
            let dsig = (rho / r1 + rho / r2, (z - rod.0) / r1 + (z - rod.1) / r2);
            let coef = -2.0 * big_l / s2l2;
            g.0 += coef * dsig.0;
            g.1 += coef * dsig.1;
        }
        g
    }

    fn grad_w(&self, _rho: f64, _z: f64) -> (f64, f64) {
        (0.0, 0.0)
    }

    fn laplacian_v(&self, _rho: f64, _z: f64) -> f64 {
        0.0
    }

    fn laplacian_w(&self, _rho: f64, _z: f64) -> f64 {
        0.0
    }

    fn is_exactly_harmonic(&self) -> bool {
        true
    }
}

/// Map reduced from a Brill sampler with a fixed branch constant.
pub struct SampledMap<F: BrillField> {
    pub field: F,
    pub beta_ell: f64,
    harmonic: bool,
}

impl<F: BrillField> SampledMap<F> {
    pub fn new(field: F, harmonic: bool) -> Self {
        let beta_ell = field.beta_ell();
        SampledMap { field, beta_ell, harmonic }
    }
}

impl<F: BrillField> MapField for SampledMap<F> {
    fn point(&self, rho: f64, z: f64) -> HyperbolicPoint {
        match self.field.sample(rho, z) {
            Ok(s) => {
                let det = s.g.det();
                fermi_coordinates(&s.g.scale(1.0 / det.sqrt()), self.beta_ell)
            }
            Err(_) => HyperbolicPoint::new(f64::NAN, f64::NAN),
        }
    }

    fn is_exactly_harmonic(&self) -> bool {
        self.harmonic
    }
}

/// Smooth compact bump amp * (1 - (d/radius)^2)^4 inside d < radius.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    pub center: (f64, f64),
    pub radius: f64,
    pub amp_v: f64,
    pub amp_w: f64,
}

impl Bump {
    fn profile(&self, rho: f64, z: f64) -> (f64, (f64, f64), f64) {
        let dx = rho - self.center.0;
        let dz = z - self.center.1;
        let d = dx.hypot(dz);
        let t = d / self.radius;
        if t >= 1.0 {
            return (0.0, (0.0, 0.0), 0.0);
        }
        let u = 1.0 - t * t;
        let psi = u.powi(4);
        // d psi/dt = -8 t u^3; d2 psi/dt2 = -8 u^3 + 48 t^2 u^2.
        let dpsi = -8.0 * t * u.powi(3);
        let d2psi = -8.0 * u.powi(3) + 48.0 * t * t * u * u;
        let grad = if d < 1e-300 {
            (0.0, 0.0)
        } else {
            (dpsi * dx / (d * self.radius), dpsi * dz / (d * self.radius))
        };
        // Axisymmetric flat Laplacian of psi(d/r).
        let lap = if d < 1e-12 {
            2.0 * d2psi / (self.radius * self.radius)
        } else {
            d2psi / (self.radius * self.radius)
                + dpsi / self.radius * (1.0 / d + dx / (rho * d))
        };
        (psi, grad, lap)
    }
}

/// Base map plus compact (V, W) bumps; used to seed perturbed states and as
/// analytic test data, with derivatives carried through exactly.
pub struct BumpedMap<M: MapField> {
    pub base: M,
    pub bumps: Vec<Bump>,
}

impl<M: MapField> BumpedMap<M> {
    pub fn new(base: M, bumps: Vec<Bump>) -> Self {
        BumpedMap { base, bumps }
    }
}

impl<M: MapField> MapField for BumpedMap<M> {
    fn point(&self, rho: f64, z: f64) -> HyperbolicPoint {
        let mut p = self.base.point(rho, z);
        for b in &self.bumps {
            let (psi, _, _) = b.profile(rho, z);
            p.v += b.amp_v * psi;
            p.w += b.amp_w * psi;
        }
        p
    }

    fn grad_v(&self, rho: f64, z: f64) -> (f64, f64) {
        let mut g = self.base.grad_v(rho, z);
        for b in &self.bumps {
            let (_, gr, _) = b.profile(rho, z);
            g.0 += b.amp_v * gr.0;
            g.1 += b.amp_v * gr.1;
        }
        g
    }

    fn grad_w(&self, rho: f64, z: f64) -> (f64, f64) {
        let mut g = self.base.grad_w(rho, z);
        for b in &self.bumps {
            let (_, gr, _) = b.profile(rho, z);
            g.0 += b.amp_w * gr.0;
            g.1 += b.amp_w * gr.1;
        }
        g
    }

    fn laplacian_v(&self, rho: f64, z: f64) -> f64 {
        let mut l = self.base.laplacian_v(rho, z);
        for b in &self.bumps {
            let (_, _, lap) = b.profile(rho, z);
            l += b.amp_v * lap;
        }
        l
    }

    fn laplacian_w(&self, rho: f64, z: f64) -> f64 {
        let mut l = self.base.laplacian_w(rho, z);
        for b in &self.bumps {
            let (_, _, lap) = b.profile(rho, z);
            l += b.amp_w * lap;
        }
        l
    }
}

/// A model map with its rod data and class.
pub struct ModelMap {
    pub map: Box<dyn MapField>,
    pub rods: RodDataSet,
    pub class: AsymptoticClass,
    pub exactly_harmonic: bool,
}

/// Build the reference map realizing the rod singularities of `rods` with
/// the asymptotics of `class`.
///
/// Supported: AF_0 data with alternating (1,0)/(0,1) structures (exact Weyl
/// superposition); ALF k=1 data of Taub-NUT or Taub-Bolt type; ALE(p, q)
/// with no finite rods, and the Eguchi-Hanson data for ALE(2, 1). All are
/// exactly harmonic closed forms.
// TODO: blended model maps for ALF data with several finite rods.
pub fn build_model_map(rods: &RodDataSet, class: &AsymptoticClass) -> Result<ModelMap> {
    let report = rods.validate();
    if !report.is_valid() {
        return Err(Error::InvalidRodData(format!("{:?}", report.violations)));
    }
    let unsupported = |msg: &str| Err(Error::InvalidRodData(format!("model map: {msg}")));
    let mk = |map: Box<dyn MapField>| {
        Ok(ModelMap { map, rods: rods.clone(), class: *class, exactly_harmonic: true })
    };
    match class.kind {
        ClassKind::Af { beta, ell } => {
            if beta != 0.0 {
                return unsupported("AF twist beta != 0 is outside relaxation v1");
            }
            let mut finite = Vec::new();
            for (n, v) in rods.rods.iter().enumerate() {
                let nv = v.normalized_sign();
                let (lo, hi) = rods.rod_interval(n);
                match (nv.v1, nv.v2) {
                    (1, 0) => {}
                    (0, 1) => {
                        if !(lo.is_finite() && hi.is_finite()) {
                            return unsupported("semi-infinite (0,1) rod in AF data");
                        }
                        finite.push((lo, hi));
                    }
                    _ => return unsupported("AF model maps need (1,0)/(0,1) structures"),
                }
            }
            mk(Box::new(WeylRodMap::new(ell, finite)))
        }
        ClassKind::Alf { k, ell } => {
            if k != 1 {
                return unsupported("ALF model maps ship for k = 1 only");
            }
            let shapes: Vec<(i64, i64)> = rods
                .rods
                .iter()
                .map(|v| {
                    let n = v.normalized_sign();
                    (n.v1, n.v2)
                })
                .collect();
            if shapes == [(1, 0), (1, -1)] && rods.turning_points.len() == 1 {
                let fam = FamilyParams::TaubNut { ell };
                return mk(Box::new(SampledMap::new(fam, true)));
            }
            if shapes == [(1, 0), (0, 1), (1, -1)] && rods.turning_points.len() == 2 {
                let d = rods.turning_points[1];
                if (rods.turning_points[0] + d).abs() > 1e-12 * d.abs() {
                    return unsupported("ALF bolt data must be symmetric about z = 0");
                }
                // Taub-Bolt pins d = 3 ell^2 / 16; other combinations need a
                // blended construction that does not ship yet.
                let ell_induced = (16.0 * d / 3.0).sqrt();
                if (ell_induced - ell).abs() > 1e-9 * ell {
                    return unsupported("rod length incompatible with Taub-Bolt at this ell");
                }
                let fam = FamilyParams::TaubBolt { ell };
                return mk(Box::new(SampledMap::new(fam, true)));
            }
            unsupported("unrecognized ALF rod data")
        }
        ClassKind::Ale { p, q } => {
            let shapes: Vec<(i64, i64)> = rods
                .rods
                .iter()
                .map(|v| {
                    let n = v.normalized_sign();
                    (n.v1, n.v2)
                })
                .collect();
            if rods.turning_points.len() == 1 && shapes == [(0, 1), (p as i64, -q)] {
                let fam = FamilyParams::FlatAle { p, q };
                return mk(Box::new(SampledMap::new(fam, true)));
            }
            if (p, q) == (2, 1) && shapes == [(0, 1), (1, 0), (2, -1)] {
                let z2 = rods.turning_points[1];
                let a = (4.0 * z2).sqrt();
                let fam = FamilyParams::EguchiHanson { a };
                return mk(Box::new(SampledMap::new(fam, true)));
            }
            unsupported("unrecognized ALE rod data")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn af0_trivial_model_map() {
        let fam = FamilyParams::FlatAf { beta: 0.0, ell: 2.0 };
        let rods = fam.rod_data().unwrap();
        let model = build_model_map(&rods, &fam.class()).unwrap();
        let p = model.map.point(1.0, 0.5);
        assert!((p.v - (1.0f64 / 4.0).ln()).abs() < 1e-14);
        assert_eq!(p.w, 0.0);
        assert!(model.exactly_harmonic);
    }

    #[test]
    fn rn_rod_data_model_is_schwarzschild_map() {
        // RN rod data: the model map equals the exact Schwarzschild map of
        // matching rod length.
        let rn = FamilyParams::ReissnerNordstrom { r_plus: 1.0, c1: -3.0 };
        let rods = rn.rod_data().unwrap();
        let model = build_model_map(&rods, &rn.class()).unwrap();
        // Exact Schwarzschild Weyl map with the same ell and rod.
        let sw = crate::families::SchwarzschildWeyl::new(2.0, 0.5);
        let sm = SampledMap::new(sw, true);
        for (rho, z) in [(0.5, 0.3), (2.0, -1.0), (1e-3, 0.0)] {
            let a = model.map.point(rho, z);
            let b = sm.point(rho, z);
            assert!((a.v - b.v).abs() < 1e-9, "V {} vs {}", a.v, b.v);
            assert!((a.w - b.w).abs() < 1e-12);
        }
    }

    #[test]
    fn weyl_map_is_discretely_harmonic() {
        let m = WeylRodMap::new(0.5, vec![(-1.0, 1.0)]);
        for (rho, z) in [(0.4, 0.0), (1.0, 2.0), (3.0, -1.5)] {
            let lap = fd_laplacian(&|r, zz| m.point(r, zz).v, rho, z);
            assert!(lap.abs() < 1e-6, "lap {lap} at ({rho}, {z})");
            // Analytic gradient matches FD.
            let g = m.grad_v(rho, z);
            let gfd = fd_grad(&|r, zz| m.point(r, zz).v, rho, z);
            assert!((g.0 - gfd.0).abs() < 1e-6);
            assert!((g.1 - gfd.1).abs() < 1e-6);
        }
    }

    #[test]
    fn bump_derivatives_match_fd() {
        let base = WeylRodMap::new(1.0, vec![]);
        let b = BumpedMap::new(
            base,
            vec![Bump { center: (1.5, 0.3), radius: 0.8, amp_v: 0.2, amp_w: -0.1 }],
        );
        for (rho, z) in [(1.2, 0.1), (1.8, 0.6), (1.5, 0.3)] {
            let g = b.grad_v(rho, z);
            let gfd = fd_grad(&|r, zz| b.point(r, zz).v, rho, z);
            assert!((g.0 - gfd.0).abs() < 1e-6);
            assert!((g.1 - gfd.1).abs() < 1e-6);
            let l = b.laplacian_w(rho, z);
            let lfd = fd_laplacian(&|r, zz| b.point(r, zz).w, rho, z);
            assert!((l - lfd).abs() < 1e-4, "lap {l} vs {lfd}");
        }
    }

    #[test]
    fn unsupported_model_data_is_rejected() {
        // Kerr-type AF data with beta != 0 is excluded from relaxation v1.
        let kerr = FamilyParams::Kerr { r_plus: 2.0, a: 1.0 };
        let rods = kerr.rod_data().unwrap();
        assert!(build_model_map(&rods, &kerr.class()).is_err());
    }
}
