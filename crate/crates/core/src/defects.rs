//! Logarithmic angle defects on axis rods, their rod integrals, the
//! integrated defect term of the comparison inequality, and the corner-flux
//! vanishing check.
//!
//! Each defect is computed two ways and cross-checked: (a) the Richardson
//! limit of (1/2) log(rho^2 e^{2 alpha} / G_ij v^i v^j) as rho -> 0, and
//! (b) the case-resolved axis identity
//!
//!   -2 alpha + Z = log rho - log(Phi_ij v^i v^j) - 2 theta
//!
//! with log(Phi v v) replaced by its case I/II/III axis form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::BrillField;
use crate::geometry::reduce_torus_matrix;
use crate::mass::pair_x_vector;
use crate::quad::{fit_decay, gauss_legendre, neville_at_zero};
use crate::rod::{RodDataSet, RodStructure};

/// Axis-behavior case of a rod structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RodCase {
    /// v = (1, 0).
    I,
    /// v = (0, 1), beta = 0.
    II0,
    /// v = (0, 1), beta != 0.
    IIBeta,
    /// Both components nonzero.
    III,
}

/// Exhaustive and exclusive case detection after sign normalization.
pub fn detect_case(v: &RodStructure, beta_ell: f64) -> Result<RodCase> {
    let n = v.normalized_sign();
    if !n.is_valid() {
        return Err(Error::CaseDetection(v.v1, v.v2));
    }
    match (n.v1, n.v2) {
        (1, 0) => Ok(RodCase::I),
        (0, 1) => {
            if beta_ell == 0.0 {
                Ok(RodCase::II0)
            } else {
                Ok(RodCase::IIBeta)
            }
        }
        (a, b) if a != 0 && b != 0 => Ok(RodCase::III),
        _ => Err(Error::CaseDetection(v.v1, v.v2)),
    }
}

/// Options for the rho -> 0 limits.
#[derive(Debug, Clone)]
pub struct DefectOptions {
    /// Radii of the Richardson samples.
    pub rho_samples: Vec<f64>,
    /// Cross-check tolerance between the two routes.
    pub agree_tol: f64,
}

impl Default for DefectOptions {
    fn default() -> Self {
        DefectOptions { rho_samples: vec![1e-2, 1e-3, 1e-4], agree_tol: 1e-6 }
    }
}

/// The two defect evaluations at one axis point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DefectValue {
    pub via_limit: f64,
    pub via_identity: f64,
    pub case: RodCase,
}

impl DefectValue {
    /// The limit-route value after a successful cross-check.
    pub fn checked(&self, tol: f64) -> Result<f64> {
        if (self.via_limit - self.via_identity).abs() > tol {
            return Err(Error::DefectDisagreement {
                limit: self.via_limit,
                identity: self.via_identity,
                tol,
            });
        }
        Ok(self.via_limit)
    }
}

/// Angle defect of `field` at interior axis point z of a rod with
/// structure v, by both routes.
pub fn angle_defect_at(
    field: &dyn BrillField,
    v: &RodStructure,
    z: f64,
    opts: &DefectOptions,
) -> Result<DefectValue> {
    let beta_ell = field.beta_ell();
    let case = detect_case(v, beta_ell)?;
    let vn = v.normalized_sign();
    let vv = (vn.v1 as f64, vn.v2 as f64);

    let mut limit_samples = Vec::with_capacity(opts.rho_samples.len());
    let mut ident_samples = Vec::with_capacity(opts.rho_samples.len());
    for &rho in &opts.rho_samples {
        let s = field.sample(rho, z)?;
        let gv = s.g.quad_form(vv);
        if gv <= 0.0 {
            return Err(Error::OutsideDomain {
                rho,
                z,
                reason: format!("G v v = {gv} not positive near rod {vn}"),
            });
        }
        limit_samples.push((rho, 0.5 * (2.0 * rho.ln() + 2.0 * s.alpha - gv.ln())));

        let (red, p) = reduce_torus_matrix(&s.g, rho, beta_ell)?;
        let t_case = match case {
            RodCase::I => p.v,
            RodCase::II0 => -p.v,
            RodCase::IIBeta => p.w + (2.0 * beta_ell).ln(),
            RodCase::III => {
                // log(Phi v v) -> -V - log cosh W + 2 log |v2|;
                // V + log cosh W = log Phi11 exactly.
                -p.v - p.w.cosh().ln() + 2.0 * (vn.v2.abs() as f64).ln()
            }
        };
        ident_samples.push((rho, 0.5 * (rho.ln() + 2.0 * s.alpha - red.z - t_case)));
    }
    Ok(DefectValue {
        via_limit: neville_at_zero(&limit_samples),
        via_identity: neville_at_zero(&ident_samples),
        case,
    })
}

/// Defect samples along one rod and their integral.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefectProfile {
    pub rod_index: usize,
    pub interval: (f64, f64),
    pub case: RodCase,
    /// (z, theta) at the quadrature nodes, strictly inside the rod.
    pub samples: Vec<(f64, f64)>,
    /// Matching quadrature weights (already scaled to the interval).
    pub weights: Vec<f64>,
    /// integral of theta dz over the (truncated) rod.
    pub integral: f64,
}

/// Truncation of semi-infinite rods for profile quadrature.
pub const SEMI_INFINITE_CUTOFF: f64 = 1e3;

/// Build the defect profile of one rod with an n-point Gauss rule
/// (semi-infinite rods are truncated at |z| = 1e3).
pub fn defect_profile(
    field: &dyn BrillField,
    rods: &RodDataSet,
    rod_index: usize,
    n_points: usize,
    opts: &DefectOptions,
) -> Result<DefectProfile> {
    let (lo, hi) = rods.rod_interval(rod_index);
    let (a, b) = (lo.max(-SEMI_INFINITE_CUTOFF), hi.min(SEMI_INFINITE_CUTOFF));
    if !(a < b) {
        return Err(Error::BadDomain(format!("empty rod interval [{a}, {b}]")));
    }
    let v = rods.rods[rod_index];
    let case = detect_case(&v, field.beta_ell())?;
    let (xs, ws) = gauss_legendre(n_points);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut samples = Vec::with_capacity(n_points);
    let mut weights = Vec::with_capacity(n_points);
    let mut integral = 0.0;
    for (x, w) in xs.iter().zip(ws.iter()) {
        let z = mid + half * x;
        let d = angle_defect_at(field, &v, z, opts)?;
        let theta = d.checked(opts.agree_tol)?;
        samples.push((z, theta));
        weights.push(w * half);
        integral += w * half * theta;
    }
    Ok(DefectProfile { rod_index, interval: (lo, hi), case, samples, weights, integral })
}

/// Profiles over every rod of the data set.
pub fn defect_profiles(
    field: &dyn BrillField,
    rods: &RodDataSet,
    n_points: usize,
    opts: &DefectOptions,
) -> Result<Vec<DefectProfile>> {
    (0..rods.rod_count())
        .map(|n| defect_profile(field, rods, n, n_points, opts))
        .collect()
}

/// The integrated defect term 2 pi sum_n int_{rod n} (theta - theta_o) dz.
///
/// Finite rods integrate directly; semi-infinite rods contribute their
/// truncated difference only when the tail is integrable (fitted decay
/// faster than 1/z), and error out otherwise.
pub fn defect_term(g_profiles: &[DefectProfile], o_profiles: &[DefectProfile]) -> Result<f64> {
    if g_profiles.len() != o_profiles.len() {
        return Err(Error::RodMismatch(format!(
            "{} rods vs {}",
            g_profiles.len(),
            o_profiles.len()
        )));
    }
    let mut total = 0.0;
    for (pg, po) in g_profiles.iter().zip(o_profiles.iter()) {
        if pg.interval != po.interval || pg.samples.len() != po.samples.len() {
            return Err(Error::RodMismatch(format!(
                "rod {} intervals {:?} vs {:?}",
                pg.rod_index, pg.interval, po.interval
            )));
        }
        let mut rod_sum = 0.0;
        let mut diffs = Vec::with_capacity(pg.samples.len());
        for ((sg, so), w) in pg.samples.iter().zip(po.samples.iter()).zip(pg.weights.iter()) {
            debug_assert!((sg.0 - so.0).abs() < 1e-12 * (1.0 + sg.0.abs()));
            let d = sg.1 - so.1;
            diffs.push((sg.0, d));
            rod_sum += w * d;
        }
        let semi_infinite = pg.interval.0.is_infinite() || pg.interval.1.is_infinite();
        if semi_infinite {
            let scale = diffs.iter().map(|d| d.1.abs()).fold(0.0f64, f64::max);
            if scale > 1e-10 {
                // Tail integrability: |theta - theta_o| must decay faster
                // than 1/|z| toward the infinite end.
                let mut zs: Vec<f64> = diffs.iter().map(|d| d.0.abs()).collect();
                let mut vs: Vec<f64> = diffs.iter().map(|d| d.1.abs()).collect();
                if pg.interval.0.is_infinite() {
                    zs.reverse();
                    vs.reverse();
                }
                let tail_n = zs.len() / 2;
                let fit = fit_decay(&zs[tail_n..], &vs[tail_n..]);
                if !(fit.limit.abs() < 1e-8 * scale.max(1.0) && fit.exponent > 1.0) {
                    return Err(Error::RodMismatch(format!(
                        "rod {}: defect difference tail not integrable (limit {:.3e}, exponent {:.3})",
                        pg.rod_index, fit.limit, fit.exponent
                    )));
                }
            }
        }
        total += rod_sum;
    }
    Ok(2.0 * std::f64::consts::PI * total)
}

/// Integral of X(nu) over the flat sphere of radius varsigma_2 around the
/// corner (0, z_n), with nu the Omega-outer normal (pointing at the corner).
pub fn corner_flux(
    g: &dyn BrillField,
    g_o: &dyn BrillField,
    corner_z: f64,
    varsigma2: f64,
    quad_points: usize,
) -> Result<f64> {
    let (xs, ws) = gauss_legendre(quad_points);
    let mut sum = 0.0;
    for (x, w) in xs.iter().zip(ws.iter()) {
        let theta = 0.5 * std::f64::consts::PI * (1.0 + x);
        let (st, ct) = theta.sin_cos();
        let rho = varsigma2 * st;
        let z = corner_z + varsigma2 * ct;
        let xv = pair_x_vector(g, g_o, rho, z)?;
        let xnu = -(xv.0 * st + xv.1 * ct);
        sum += w * xnu * varsigma2 * varsigma2 * st;
    }
    Ok(2.0 * std::f64::consts::PI * sum * 0.5 * std::f64::consts::PI)
}

/// Axis combination X_axis = lim rho X(nu) at an interior rod point; equals
/// -2 (theta - theta_o) for a matched pair.
pub fn x_axis_combination(
    g: &dyn BrillField,
    g_o: &dyn BrillField,
    z: f64,
    opts: &DefectOptions,
) -> Result<f64> {
    let mut samples = Vec::with_capacity(opts.rho_samples.len());
    for &rho in &opts.rho_samples {
        let xv = pair_x_vector(g, g_o, rho, z)?;
        // nu = -d_rho on the axis cylinder.
        samples.push((rho, -rho * xv.0));
    }
    Ok(neville_at_zero(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{FamilyParams, ReissnerNordstromWeyl, SchwarzschildWeyl};

    #[test]
    fn case_detection_table() {
        assert_eq!(detect_case(&RodStructure::new(1, 0), 0.0).unwrap(), RodCase::I);
        assert_eq!(detect_case(&RodStructure::new(-1, 0), 0.5).unwrap(), RodCase::I);
        assert_eq!(detect_case(&RodStructure::new(0, 1), 0.0).unwrap(), RodCase::II0);
        assert_eq!(detect_case(&RodStructure::new(0, -1), 0.3).unwrap(), RodCase::IIBeta);
        assert_eq!(detect_case(&RodStructure::new(1, -1), 0.0).unwrap(), RodCase::III);
        assert_eq!(detect_case(&RodStructure::new(2, -1), 0.0).unwrap(), RodCase::III);
        assert!(detect_case(&RodStructure::new(0, 0), 0.0).is_err());
        assert!(detect_case(&RodStructure::new(2, 4), 0.0).is_err());
    }

    #[test]
    fn flat_af_semi_infinite_defect_vanishes() {
        let fam = FamilyParams::FlatAf { beta: 0.0, ell: 2.0 };
        let d = angle_defect_at(&fam, &RodStructure::new(1, 0), 1.5, &DefectOptions::default())
            .unwrap();
        assert!(d.via_limit.abs() < 1e-10);
        assert!(d.via_identity.abs() < 1e-10);
    }

    #[test]
    fn schwarzschild_bolt_defect_vanishes_at_regular_ell() {
        let fam = FamilyParams::Schwarzschild { m: 1.0 };
        let d = angle_defect_at(&fam, &RodStructure::new(0, 1), 0.7, &DefectOptions::default())
            .unwrap();
        assert!(d.via_limit.abs() < 1e-8, "limit {}", d.via_limit);
        assert!(d.checked(1e-6).is_ok());
    }

    #[test]
    fn weyl_partner_bolt_defect_matches_closed_form() {
        // SchwarzschildWeyl(2, 1/2): defect log(4 m / ell) = log 16.
        let w = SchwarzschildWeyl::new(2.0, 0.5);
        let d = angle_defect_at(&w, &RodStructure::new(0, 1), 0.3, &DefectOptions::default())
            .unwrap();
        let expect = 16f64.ln();
        assert!((d.via_limit - expect).abs() < 1e-8);
        assert!((d.via_identity - expect).abs() < 1e-8);
    }

    #[test]
    fn rn_comparison_form_defect_is_two_log_three() {
        let w = ReissnerNordstromWeyl::new(1.0, -3.0);
        let d = angle_defect_at(&w, &RodStructure::new(0, 1), 0.25, &DefectOptions::default())
            .unwrap();
        let expect = 2.0 * 3f64.ln();
        assert!((d.via_limit - expect).abs() < 1e-7, "limit {}", d.via_limit);
        assert!((d.via_identity - expect).abs() < 1e-7);
        assert!((d.via_limit - d.via_identity).abs() < 1e-6);
    }

    #[test]
    fn defect_term_constant_difference() {
        // Constant difference c over a rod of length L contributes 2 pi c L.
        let g = SchwarzschildWeyl::new(2.0, 0.5);
        let o = SchwarzschildWeyl::new(2.0, 0.5);
        let rods = crate::families::BrillField::rod_data(&g).unwrap();
        let opts = DefectOptions::default();
        let mut pg = defect_profiles(&g, &rods, 16, &opts).unwrap();
        let po = defect_profiles(&o, &rods, 16, &opts).unwrap();
        // Shift the finite-rod profile by a constant c = 0.3.
        for s in pg[1].samples.iter_mut() {
            s.1 += 0.3;
        }
        let term = defect_term(&pg, &po).unwrap();
        let rod_len = rods.turning_points[1] - rods.turning_points[0];
        assert!((term - 2.0 * std::f64::consts::PI * 0.3 * rod_len).abs() < 1e-10);
    }

    #[test]
    fn identical_profiles_give_zero_term() {
        let g = SchwarzschildWeyl::new(1.0, 4.0);
        let rods = crate::families::BrillField::rod_data(&g).unwrap();
        let opts = DefectOptions::default();
        let pg = defect_profiles(&g, &rods, 8, &opts).unwrap();
        let po = defect_profiles(&g, &rods, 8, &opts).unwrap();
        assert!(defect_term(&pg, &po).unwrap().abs() < 1e-12);
    }

    #[test]
    fn corner_flux_of_identical_pair_vanishes() {
        let g = FamilyParams::EuclideanR4;
        for vs in [0.1, 0.05, 0.025] {
            let f = corner_flux(&g, &g, 0.0, vs, 48).unwrap();
            assert!(f.abs() < 1e-12);
        }
    }
}
