//! Relaxation of the axisymmetric harmonic-map equations into H^2 with
//! prescribed rod singularities.
//!
//! Unknowns are the differences (V - Vbar, W - Wbar) against an analytic
//! model map, which stay bounded at the axis. The discretization is the
//! gradient of a discrete energy: the grid is uniform in a graded
//! coordinate xi with rho = rho(xi), and each edge carries
//!
//!   (kappa_e / 2) [cosh^2(W_e) (DVbar_e + dv_e)^2 + (DWbar_e + dw_e)^2],
//!
//! with the model contribution DVbar_e evaluated analytically at face
//! midpoints (finite even where Vbar ~ log rho). Pointwise damped Newton
//! sweeps in red-black order then both decrease the energy monotonically
//! and drive the gradient (the PDE residual) to zero.

pub mod functionals;
pub mod io;
pub mod maps;

pub use maps::{build_model_map, Bump, BumpedMap, MapField, ModelMap, SampledMap, WeylRodMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defects::{detect_case, RodCase};
use crate::error::{Error, Result};
use crate::geometry::{h2_distance, HyperbolicPoint};

/// Tensor-product grid: nodes (rho_i, z_j) with rho graded toward the axis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    /// Node count in rho, including the axis row and the outer boundary.
    pub n_rho: usize,
    /// Node count in z.
    pub n_z: usize,
    pub rho_max: f64,
    /// Domain is z in [-z_max, z_max].
    pub z_max: f64,
    /// Exponential grading strength; 0 gives a uniform grid.
    pub grading: f64,
}

impl GridSpec {
    pub fn h_xi(&self) -> f64 {
        1.0 / (self.n_rho - 1) as f64
    }

    pub fn h_z(&self) -> f64 {
        2.0 * self.z_max / (self.n_z - 1) as f64
    }

    pub fn rho_of_xi(&self, xi: f64) -> f64 {
        if self.grading == 0.0 {
            self.rho_max * xi
        } else {
            let c = self.grading;
            self.rho_max * ((c * xi).exp() - 1.0) / (c.exp() - 1.0)
        }
    }

    pub fn drho_dxi(&self, xi: f64) -> f64 {
        if self.grading == 0.0 {
            self.rho_max
        } else {
            let c = self.grading;
            self.rho_max * c * (c * xi).exp() / (c.exp() - 1.0)
        }
    }

    pub fn z_at(&self, j: usize) -> f64 {
        -self.z_max + j as f64 * self.h_z()
    }
}

/// Relaxation parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sup-norm residual target.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor in (0, 2).
    pub omega: f64,
    /// Inner Newton iterations per node per sweep.
    pub newton_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tolerance: 1e-8, max_sweeps: 10_000, omega: 1.9, newton_iters: 5 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::BadDomain("solver tolerance must be positive".into()));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::BadDomain(format!(
                "relaxation factor omega = {} outside the stable range (0, 2)",
                self.omega
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    /// Both components unknown.
    Interior,
    /// Axis, cases I/II0: v unknown (even reflection), w pinned to 0.
    AxisNeumannV,
    /// Axis, case III: v pinned to 0, w unknown.
    AxisNeumannW,
    /// Dirichlet data = model.
    Fixed,
}

/// Discretized map with model singularities removed.
pub struct HyperbolicField {
    pub spec: GridSpec,
    pub model: ModelMap,
    /// Difference V - Vbar at nodes, row-major i * n_z + j.
    pub v: Vec<f64>,
    /// Difference W - Wbar at nodes.
    pub w: Vec<f64>,
    rho: Vec<f64>,
    zs: Vec<f64>,
    kind: Vec<NodeKind>,
    // rho-edges (i, j) -> (i+1, j): i < n_rho-1.
    re_kappa: Vec<f64>,
    re_dv: Vec<f64>,
    re_dw: Vec<f64>,
    re_wbar: Vec<f64>,
    // z-edges (i, j) -> (i, j+1): j < n_z-1.
    ze_kappa: Vec<f64>,
    ze_dv: Vec<f64>,
    ze_dw: Vec<f64>,
    ze_wbar: Vec<f64>,
    /// Cell measure (integral of rho d rho dz) per node.
    vol: Vec<f64>,
    /// Linear energy terms carrying the model's axis line-source flux
    /// (lim rho cosh^2 W dV/drho per unit z at Neumann axis nodes).
    lin_v: Vec<f64>,
    lin_w: Vec<f64>,
}

/// Outcome of a relaxation run; never silently succeeds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub converged: bool,
    pub sweeps: usize,
    pub final_residual: f64,
    pub energy_history: Vec<f64>,
}

impl HyperbolicField {
    pub fn new(spec: GridSpec, model: ModelMap) -> Result<Self> {
        if spec.n_rho < 3 || spec.n_z < 3 {
            return Err(Error::BadDomain("grid needs at least 3 nodes per direction".into()));
        }
        let (nr, nz) = (spec.n_rho, spec.n_z);
        let h_xi = spec.h_xi();
        let h_z = spec.h_z();
        let rho: Vec<f64> = (0..nr).map(|i| spec.rho_of_xi(i as f64 * h_xi)).collect();
        let zs: Vec<f64> = (0..nz).map(|j| spec.z_at(j)).collect();

        // Axis case per z node.
        let beta_ell = model.class.beta_ell();
        let mut kind = vec![NodeKind::Interior; nr * nz];
        for j in 0..nz {
            for i in 0..nr {
                let k = if i == nr - 1 || j == 0 || j == nz - 1 {
                    NodeKind::Fixed
                } else if i == 0 {
                    let rod_idx = rod_at(&model.rods, zs[j]);
                    match detect_case(&model.rods.rods[rod_idx], beta_ell)? {
                        RodCase::I | RodCase::II0 => NodeKind::AxisNeumannV,
                        RodCase::III => NodeKind::AxisNeumannW,
                        RodCase::IIBeta => {
                            return Err(Error::InvalidRodData(
                                "case II with beta != 0 is outside relaxation v1".into(),
                            ))
                        }
                    }
                } else {
                    NodeKind::Interior
                };
                kind[i * nz + j] = k;
            }
        }

        // rho-edge data.
        let map = model.map.as_ref();
        let mut re_kappa = vec![0.0; (nr - 1) * nz];
        let mut re_dv = vec![0.0; (nr - 1) * nz];
        let mut re_dw = vec![0.0; (nr - 1) * nz];
        let mut re_wbar = vec![0.0; (nr - 1) * nz];
        for i in 0..nr - 1 {
            let xi_f = (i as f64 + 0.5) * h_xi;
            let rho_f = spec.rho_of_xi(xi_f);
            let dr = spec.drho_dxi(xi_f);
            let a = rho_f / dr;
            for j in 0..nz {
                let wz = if j == 0 || j == nz - 1 { 0.5 * h_z } else { h_z };
                let e = i * nz + j;
                re_kappa[e] = a * wz / h_xi;
                let gv = map.grad_v(rho_f, zs[j]);
                let gw = map.grad_w(rho_f, zs[j]);
                re_dv[e] = h_xi * dr * gv.0;
                re_dw[e] = h_xi * dr * gw.0;
                re_wbar[e] = map.point(rho_f, zs[j]).w;
            }
        }

        // z-edge data. Coefficients are the exact column measures
        // int rho d rho between half-faces, so the axis column carries its
        // half-cell weight and the model's z-flux there is not lost; the
        // model is sampled at the measure midpoint of the column.
        let mut ze_kappa = vec![0.0; nr * (nz - 1)];
        let mut ze_dv = vec![0.0; nr * (nz - 1)];
        let mut ze_dw = vec![0.0; nr * (nz - 1)];
        let mut ze_wbar = vec![0.0; nr * (nz - 1)];
        for i in 0..nr {
            let lo = if i == 0 { 0.0 } else { spec.rho_of_xi((i as f64 - 0.5) * h_xi) };
            let hi = if i == nr - 1 {
                spec.rho_max
            } else {
                spec.rho_of_xi((i as f64 + 0.5) * h_xi)
            };
            let measure = 0.5 * (hi * hi - lo * lo);
            // Measure midpoint: mean of rho^2 under rho d rho.
            let rho_hat = (0.5 * (hi * hi + lo * lo)).sqrt();
            for j in 0..nz - 1 {
                let e = i * (nz - 1) + j;
                ze_kappa[e] = measure / h_z;
                // Exact model differences along z: faithful across the
                // log-singular corners, where a midpoint derivative badly
                // misrepresents the edge jump.
                let z_f = 0.5 * (zs[j] + zs[j + 1]);
                let p_lo = map.point(rho_hat, zs[j]);
                let p_hi = map.point(rho_hat, zs[j + 1]);
                ze_dv[e] = p_hi.v - p_lo.v;
                ze_dw[e] = p_hi.w - p_lo.w;
                ze_wbar[e] = map.point(rho_hat, z_f).w;
            }
        }

        // Node cell measures int rho d rho = rho^2/2 between half-faces.
        let mut vol = vec![0.0; nr * nz];
        for i in 0..nr {
            let lo = if i == 0 { 0.0 } else { spec.rho_of_xi((i as f64 - 0.5) * h_xi) };
            let hi = if i == nr - 1 {
                spec.rho_max
            } else {
                spec.rho_of_xi((i as f64 + 0.5) * h_xi)
            };
            let measure = 0.5 * (hi * hi - lo * lo);
            for j in 0..nz {
                let wz = if j == 0 || j == nz - 1 { 0.5 * h_z } else { h_z };
                vol[i * nz + j] = measure * wz;
            }
        }

        // Axis sources: the model's rod singularity carries flux onto the
        // axis (rho dV/drho -> +-1 on log rho rods); the discrete axis
        // equations balance against it through a linear energy term.
        let mut lin_v = vec![0.0; nr * nz];
        let mut lin_w = vec![0.0; nr * nz];
        let rho_probe = 1e-6 * spec.rho_max.max(1.0);
        for j in 0..nz {
            let n = j; // i = 0
            let wz = if j == 0 || j == nz - 1 { 0.5 * h_z } else { h_z };
            match kind[n] {
                NodeKind::AxisNeumannV => {
                    let p = map.point(rho_probe, zs[j]);
                    let gv = map.grad_v(rho_probe, zs[j]);
                    lin_v[n] = wz * rho_probe * p.w.cosh().powi(2) * gv.0;
                }
                NodeKind::AxisNeumannW => {
                    let gw = map.grad_w(rho_probe, zs[j]);
                    lin_w[n] = wz * rho_probe * gw.0;
                }
                _ => {}
            }
        }

        Ok(HyperbolicField {
            spec,
            model,
            v: vec![0.0; nr * nz],
            w: vec![0.0; nr * nz],
            rho,
            zs,
            kind,
            re_kappa,
            re_dv,
            re_dw,
            re_wbar,
            ze_kappa,
            ze_dv,
            ze_dw,
            ze_wbar,
            vol,
            lin_v,
            lin_w,
        })
    }

    pub fn rho_at(&self, i: usize) -> f64 {
        self.rho[i]
    }

    pub fn z_at(&self, j: usize) -> f64 {
        self.zs[j]
    }

    /// Seed the difference variables at updatable nodes; Dirichlet nodes
    /// stay pinned to the model.
    pub fn set_difference<F: Fn(f64, f64) -> (f64, f64)>(&mut self, f: F) {
        let nz = self.spec.n_z;
        for i in 0..self.spec.n_rho {
            for j in 0..nz {
                let n = i * nz + j;
                let (dv, dw) = f(self.rho[i], self.zs[j]);
                match self.kind[n] {
                    NodeKind::Interior => {
                        self.v[n] = dv;
                        self.w[n] = dw;
                    }
                    NodeKind::AxisNeumannV => self.v[n] = dv,
                    NodeKind::AxisNeumannW => self.w[n] = dw,
                    NodeKind::Fixed => {}
                }
            }
        }
    }

    /// Total map value at a node.
    pub fn point_at(&self, i: usize, j: usize) -> HyperbolicPoint {
        let n = i * self.spec.n_z + j;
        let base = self.model.map.point(self.rho[i], self.zs[j]);
        HyperbolicPoint::new(base.v + self.v[n], base.w + self.w[n])
    }

    /// Bilinear interpolation of the difference variables.
    pub fn difference_at(&self, rho: f64, z: f64) -> (f64, f64) {
        let nz = self.spec.n_z;
        let mut i = match self.rho.partition_point(|&r| r <= rho) {
            0 => 0,
            k => k - 1,
        };
        i = i.min(self.spec.n_rho - 2);
        let mut j = match self.zs.partition_point(|&zz| zz <= z) {
            0 => 0,
            k => k - 1,
        };
        j = j.min(nz - 2);
        let tx = ((rho - self.rho[i]) / (self.rho[i + 1] - self.rho[i])).clamp(0.0, 1.0);
        let tz = ((z - self.zs[j]) / (self.zs[j + 1] - self.zs[j])).clamp(0.0, 1.0);
        let lerp = |f: &[f64]| {
            let f00 = f[i * nz + j];
            let f10 = f[(i + 1) * nz + j];
            let f01 = f[i * nz + j + 1];
            let f11 = f[(i + 1) * nz + j + 1];
            f00 * (1.0 - tx) * (1.0 - tz)
                + f10 * tx * (1.0 - tz)
                + f01 * (1.0 - tx) * tz
                + f11 * tx * tz
        };
        (lerp(&self.v), lerp(&self.w))
    }

    /// Discrete energy (without the 2 pi azimuth factor), Kahan-summed.
    pub fn discrete_energy(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut add = |x: f64| {
            let y = x - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        };
        let nz = self.spec.n_z;
        for i in 0..self.spec.n_rho - 1 {
            for j in 0..nz {
                let e = i * nz + j;
                let (a, b) = (i * nz + j, (i + 1) * nz + j);
                let we = self.re_wbar[e] + 0.5 * (self.w[a] + self.w[b]);
                let av = self.re_dv[e] + self.v[b] - self.v[a];
                let aw = self.re_dw[e] + self.w[b] - self.w[a];
                add(0.5 * self.re_kappa[e] * (we.cosh().powi(2) * av * av + aw * aw));
            }
        }
        for i in 0..self.spec.n_rho {
            for j in 0..nz - 1 {
                let e = i * (nz - 1) + j;
                let (a, b) = (i * nz + j, i * nz + j + 1);
                let we = self.ze_wbar[e] + 0.5 * (self.w[a] + self.w[b]);
                let av = self.ze_dv[e] + self.v[b] - self.v[a];
                let aw = self.ze_dw[e] + self.w[b] - self.w[a];
                add(0.5 * self.ze_kappa[e] * (we.cosh().powi(2) * av * av + aw * aw));
            }
        }
        for n in 0..self.v.len() {
            if self.lin_v[n] != 0.0 {
                add(self.lin_v[n] * self.v[n]);
            }
            if self.lin_w[n] != 0.0 {
                add(self.lin_w[n] * self.w[n]);
            }
        }
        sum
    }

    /// Incident edges of a node as (kappa, dbar_v, dbar_w, wbar, other, sign).
    #[inline]
    fn incident_edges(&self, i: usize, j: usize) -> [Option<(f64, f64, f64, f64, usize, f64)>; 4] {
        let nz = self.spec.n_z;
        let mut out = [None; 4];
        if i >= 1 {
            let e = (i - 1) * nz + j;
            out[0] = Some((
                self.re_kappa[e],
                self.re_dv[e],
                self.re_dw[e],
                self.re_wbar[e],
                (i - 1) * nz + j,
                1.0,
            ));
        }
        if i + 1 < self.spec.n_rho {
            let e = i * nz + j;
            out[1] = Some((
                self.re_kappa[e],
                self.re_dv[e],
                self.re_dw[e],
                self.re_wbar[e],
                (i + 1) * nz + j,
                -1.0,
            ));
        }
        if j >= 1 {
            let e = i * (nz - 1) + (j - 1);
            out[2] = Some((
                self.ze_kappa[e],
                self.ze_dv[e],
                self.ze_dw[e],
                self.ze_wbar[e],
                i * nz + j - 1,
                1.0,
            ));
        }
        if j + 1 < self.spec.n_z {
            let e = i * (nz - 1) + j;
            out[3] = Some((
                self.ze_kappa[e],
                self.ze_dv[e],
                self.ze_dw[e],
                self.ze_wbar[e],
                i * nz + j + 1,
                -1.0,
            ));
        }
        out
    }

    /// Local energy restricted to edges incident at node n (for guards).
    fn local_energy(&self, i: usize, j: usize, vn: f64, wn: f64) -> f64 {
        let n = i * self.spec.n_z + j;
        let mut sum = self.lin_v[n] * vn + self.lin_w[n] * wn;
        for edge in self.incident_edges(i, j).into_iter().flatten() {
            let (kappa, dv, dw, wbar, other, sign) = edge;
            // sign = +1 when n is the higher-index endpoint.
            let (va, wa, vb, wb) = if sign > 0.0 {
                (self.v[other], self.w[other], vn, wn)
            } else {
                (vn, wn, self.v[other], self.w[other])
            };
            let we = wbar + 0.5 * (wa + wb);
            let av = dv + vb - va;
            let aw = dw + wb - wa;
            sum += 0.5 * kappa * (we.cosh().powi(2) * av * av + aw * aw);
            let _ = n;
        }
        sum
    }

    /// Gradient of the discrete energy at node n wrt (v_n, w_n).
    fn local_gradient(&self, i: usize, j: usize, vn: f64, wn: f64) -> (f64, f64) {
        let n0 = i * self.spec.n_z + j;
        let mut gv = self.lin_v[n0];
        let mut gw = self.lin_w[n0];
        for edge in self.incident_edges(i, j).into_iter().flatten() {
            let (kappa, dv, dw, wbar, other, sign) = edge;
            let (av, aw, we);
            if sign > 0.0 {
                av = dv + vn - self.v[other];
                aw = dw + wn - self.w[other];
                we = wbar + 0.5 * (self.w[other] + wn);
            } else {
                av = dv + self.v[other] - vn;
                aw = dw + self.w[other] - wn;
                we = wbar + 0.5 * (wn + self.w[other]);
            }
            let c2 = we.cosh().powi(2);
            gv += sign * kappa * c2 * av;
            gw += sign * kappa * aw + 0.25 * kappa * (2.0 * we).sinh() * av * av;
        }
        (gv, gw)
    }

    /// One damped pointwise update; returns the proposed (v, w).
    fn node_update(&self, i: usize, j: usize, cfg: &SolverConfig) -> (f64, f64) {
        let n = i * self.spec.n_z + j;
        let kind = self.kind[n];
        let (mut vn, mut wn) = (self.v[n], self.w[n]);
        let update_v = matches!(kind, NodeKind::Interior | NodeKind::AxisNeumannV);
        let update_w = matches!(kind, NodeKind::Interior | NodeKind::AxisNeumannW);
        if !update_v && !update_w {
            return (vn, wn);
        }
        let e0 = self.local_energy(i, j, vn, wn);
        for _ in 0..cfg.newton_iters.max(1) {
            // Exact coordinate minimization in v (local energy is quadratic).
            if update_v {
                let mut num = self.lin_v[n];
                let mut den = 0.0;
                for edge in self.incident_edges(i, j).into_iter().flatten() {
                    let (kappa, dv, _, wbar, other, sign) = edge;
                    let we = wbar + 0.5 * (wn + self.w[other]);
                    let c2 = we.cosh().powi(2);
                    // A = dv + sign*(vn - v_other): minimize sum k c2 A^2 / 2.
                    let a0 = dv - sign * self.v[other];
                    num += kappa * c2 * sign * a0;
                    den += kappa * c2;
                }
                if den > 0.0 {
                    vn = -num / den;
                }
            }
            // Guarded Newton in w (local energy is convex in w_n).
            if update_w {
                let (_, gw) = self.local_gradient_at(i, j, vn, wn);
                let mut hww = 0.0;
                for edge in self.incident_edges(i, j).into_iter().flatten() {
                    let (kappa, dv, _, wbar, other, sign) = edge;
                    let we = wbar + 0.5 * (wn + self.w[other]);
                    let av = if sign > 0.0 {
                        dv + vn - self.v[other]
                    } else {
                        dv + self.v[other] - vn
                    };
                    hww += kappa + 0.25 * kappa * (2.0 * we).cosh() * av * av;
                }
                if hww > 0.0 {
                    let mut step = -gw / hww;
                    let base = self.local_energy_vw(i, j, vn, wn);
                    for _ in 0..20 {
                        if self.local_energy_vw(i, j, vn, wn + step) <= base + 1e-18 {
                            break;
                        }
                        step *= 0.5;
                    }
                    wn += step;
                }
            } else {
                break;
            }
        }
        // Over-relaxation blend, guarded against local energy growth.
        let bv = if update_v { self.v[n] + cfg.omega * (vn - self.v[n]) } else { self.v[n] };
        let bw = if update_w { self.w[n] + cfg.omega * (wn - self.w[n]) } else { self.w[n] };
        if self.local_energy_vw(i, j, bv, bw) <= e0 + 1e-16 * (1.0 + e0.abs()) {
            (bv, bw)
        } else {
            (if update_v { vn } else { self.v[n] }, if update_w { wn } else { self.w[n] })
        }
    }

    fn local_energy_vw(&self, i: usize, j: usize, vn: f64, wn: f64) -> f64 {
        self.local_energy(i, j, vn, wn)
    }

    fn local_gradient_at(&self, i: usize, j: usize, vn: f64, wn: f64) -> (f64, f64) {
        let nz = self.spec.n_z;
        let n = i * nz + j;
        // Temporarily evaluate the gradient with hypothetical node values.
        let mut gv = self.lin_v[n];
        let mut gw = self.lin_w[n];
        for edge in self.incident_edges(i, j).into_iter().flatten() {
            let (kappa, dv, dw, wbar, other, sign) = edge;
            let (vo, wo) = if other == n { (vn, wn) } else { (self.v[other], self.w[other]) };
            let av = if sign > 0.0 { dv + vn - vo } else { dv + vo - vn };
            let aw = if sign > 0.0 { dw + wn - wo } else { dw + wo - wn };
            let we = wbar + 0.5 * (wn + wo);
            let c2 = we.cosh().powi(2);
            gv += sign * kappa * c2 * av;
            gw += sign * kappa * aw + 0.25 * kappa * (2.0 * we).sinh() * av * av;
        }
        (gv, gw)
    }

    /// PDE residual grids: the energy gradient scaled by the cell measure.
    /// Fixed components report zero.
    pub fn residual(&self) -> (Vec<f64>, Vec<f64>) {
        let nz = self.spec.n_z;
        let nr = self.spec.n_rho;
        let mut rv = vec![0.0; nr * nz];
        let mut rw = vec![0.0; nr * nz];
        let rows: Vec<usize> = (0..nr).collect();
        let results: Vec<Vec<(usize, f64, f64)>> = rows
            .par_iter()
            .map(|&i| {
                let mut out = Vec::new();
                for j in 0..nz {
                    let n = i * nz + j;
                    let kind = self.kind[n];
                    if kind == NodeKind::Fixed {
                        continue;
                    }
                    let (gv, gw) = self.local_gradient(i, j, self.v[n], self.w[n]);
                    let vol = self.vol[n].max(1e-300);
                    let r_v = if matches!(kind, NodeKind::Interior | NodeKind::AxisNeumannV) {
                        -gv / vol
                    } else {
                        0.0
                    };
                    let r_w = if matches!(kind, NodeKind::Interior | NodeKind::AxisNeumannW) {
                        -gw / vol
                    } else {
                        0.0
                    };
                    out.push((n, r_v, r_w));
                }
                out
            })
            .collect();
        for row in results {
            for (n, a, b) in row {
                rv[n] = a;
                rw[n] = b;
            }
        }
        (rv, rw)
    }

    pub fn sup_residual(&self) -> f64 {
        let (rv, rw) = self.residual();
        rv.iter()
            .chain(rw.iter())
            .fold(0.0f64, |m, r| m.max(r.abs()))
    }

    /// Red-black damped Newton relaxation until the sup residual meets the
    /// tolerance; the energy history is nonincreasing by construction.
    pub fn relax(&mut self, cfg: &SolverConfig) -> Result<SolveOutcome> {
        cfg.validate()?;
        let nz = self.spec.n_z;
        let nr = self.spec.n_rho;
        let mut energy_history = vec![self.discrete_energy()];
        let mut residual = self.sup_residual();
        let mut sweeps = 0;
        while residual > cfg.tolerance && sweeps < cfg.max_sweeps {
            for color in 0..2usize {
                let updates: Vec<(usize, f64, f64)> = (0..nr)
                    .into_par_iter()
                    .flat_map_iter(|i| {
                        let field = &*self;
                        (0..nz).filter_map(move |j| {
                            if (i + j) % 2 != color {
                                return None;
                            }
                            let n = i * nz + j;
                            if field.kind[n] == NodeKind::Fixed {
                                return None;
                            }
                            let (nv, nw) = field.node_update(i, j, cfg);
                            Some((n, nv, nw))
                        })
                    })
                    .collect();
                for (n, nv, nw) in updates {
                    self.v[n] = nv;
                    self.w[n] = nw;
                }
            }
            sweeps += 1;
            energy_history.push(self.discrete_energy());
            residual = self.sup_residual();
        }
        Ok(SolveOutcome {
            converged: residual <= cfg.tolerance,
            sweeps,
            final_residual: residual,
            energy_history,
        })
    }

    /// Sup hyperbolic distance to an analytic map over off-axis nodes.
    pub fn sup_distance_to(&self, exact: &dyn MapField) -> f64 {
        let nz = self.spec.n_z;
        let mut sup = 0.0f64;
        for i in 1..self.spec.n_rho {
            for j in 0..nz {
                let p = self.point_at(i, j);
                let q = exact.point(self.rho[i], self.zs[j]);
                sup = sup.max(h2_distance(&p, &q));
            }
        }
        sup
    }

    /// Quadrature of the energy over edges inside a margin-respecting box
    /// (times the 2 pi azimuth factor). Errors when the box touches the axis.
    pub fn energy_in(&self, rho_range: (f64, f64), z_range: (f64, f64)) -> Result<f64> {
        if rho_range.0 <= 0.0 {
            return Err(Error::BadDomain(
                "energy domain must avoid the axis (rho_min > 0)".into(),
            ));
        }
        let nz = self.spec.n_z;
        let inside = |i: usize, j: usize| {
            self.rho[i] >= rho_range.0
                && self.rho[i] <= rho_range.1
                && self.zs[j] >= z_range.0
                && self.zs[j] <= z_range.1
        };
        let mut sum = 0.0;
        for i in 0..self.spec.n_rho - 1 {
            for j in 0..nz {
                if inside(i, j) && inside(i + 1, j) {
                    let e = i * nz + j;
                    let (a, b) = (i * nz + j, (i + 1) * nz + j);
                    let we = self.re_wbar[e] + 0.5 * (self.w[a] + self.w[b]);
                    let av = self.re_dv[e] + self.v[b] - self.v[a];
                    let aw = self.re_dw[e] + self.w[b] - self.w[a];
                    sum += 0.5 * self.re_kappa[e] * (we.cosh().powi(2) * av * av + aw * aw);
                }
            }
        }
        for i in 1..self.spec.n_rho {
            for j in 0..nz - 1 {
                if inside(i, j) && inside(i, j + 1) {
                    let e = i * (nz - 1) + j;
                    let (a, b) = (i * nz + j, i * nz + j + 1);
                    let we = self.ze_wbar[e] + 0.5 * (self.w[a] + self.w[b]);
                    let av = self.ze_dv[e] + self.v[b] - self.v[a];
                    let aw = self.ze_dw[e] + self.w[b] - self.w[a];
                    sum += 0.5 * self.ze_kappa[e] * (we.cosh().powi(2) * av * av + aw * aw);
                }
            }
        }
        Ok(2.0 * std::f64::consts::PI * sum)
    }
}

fn rod_at(rods: &crate::rod::RodDataSet, z: f64) -> usize {
    for n in 0..rods.rod_count() {
        let (lo, hi) = rods.rod_interval(n);
        if z >= lo && z < hi {
            return n;
        }
    }
    rods.rod_count() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{BrillField, FamilyParams};

    fn schwarzschild_setup(n_rho: usize, n_z: usize) -> HyperbolicField {
        let fam = FamilyParams::Schwarzschild { m: 1.0 };
        let rods = fam.rod_data().unwrap();
        let model = build_model_map(&rods, &fam.class()).unwrap();
        let spec =
            GridSpec { n_rho, n_z, rho_max: 30.0, z_max: 30.0, grading: 2.0 };
        HyperbolicField::new(spec, model).unwrap()
    }

    #[test]
    fn model_truncation_is_second_order_in_smooth_regions() {
        // Residual of the exact map = local truncation; quarter per halving
        // away from the corners where derivatives stay bounded.
        let sup_in = |field: &HyperbolicField| {
            let (rv, rw) = field.residual();
            let nz = field.spec.n_z;
            let mut sup = 0.0f64;
            for i in 0..field.spec.n_rho {
                for j in 0..nz {
                    let (rho, z) = (field.rho_at(i), field.z_at(j));
                    let near_corner =
                        rho.hypot(z - 4.0) < 2.0 || rho.hypot(z + 4.0) < 2.0;
                    if !near_corner {
                        sup = sup.max(rv[i * nz + j].abs()).max(rw[i * nz + j].abs());
                    }
                }
            }
            sup
        };
        let coarse = sup_in(&schwarzschild_setup(33, 65));
        let fine = sup_in(&schwarzschild_setup(65, 129));
        assert!(
            fine <= coarse / 4.0 * 1.6,
            "truncation {coarse} -> {fine} not near second order"
        );
    }

    #[test]
    fn af0_trivial_data_fixed_in_one_sweep() {
        let fam = FamilyParams::FlatAf { beta: 0.0, ell: 2.0 };
        let rods = fam.rod_data().unwrap();
        let model = build_model_map(&rods, &fam.class()).unwrap();
        let spec = GridSpec { n_rho: 17, n_z: 33, rho_max: 10.0, z_max: 10.0, grading: 1.0 };
        let mut field = HyperbolicField::new(spec, model).unwrap();
        let out = field.relax(&SolverConfig::default()).unwrap();
        assert!(out.converged);
        assert!(out.sweeps <= 1);
    }

    #[test]
    fn bump_relaxes_back_to_schwarzschild() {
        let mut field = schwarzschild_setup(33, 65);
        let bump = Bump { center: (8.0, 0.0), radius: 4.0, amp_v: 0.1, amp_w: 0.0 };
        field.set_difference(|rho, z| {
            let d = (rho - bump.center.0).hypot(z - bump.center.1) / bump.radius;
            if d < 1.0 {
                (bump.amp_v * (1.0 - d * d).powi(4), 0.0)
            } else {
                (0.0, 0.0)
            }
        });
        let cfg = SolverConfig { tolerance: 1e-10, max_sweeps: 4000, omega: 1.8, newton_iters: 3 };
        let out = field.relax(&cfg).unwrap();
        assert!(out.converged, "residual {}", out.final_residual);
        // Energy history monotone nonincreasing.
        for k in 1..out.energy_history.len() {
            assert!(
                out.energy_history[k]
                    <= out.energy_history[k - 1] + 1e-12 * (1.0 + out.energy_history[k - 1].abs()),
                "energy rose at sweep {k}"
            );
        }
        // The difference collapses to the discretization level of the grid.
        let sup = field.v.iter().chain(field.w.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(sup < 5e-3, "sup difference {sup}");
    }

    #[test]
    fn residual_localizes_under_compact_perturbation() {
        // The operator is local: perturbing inside a compact support changes
        // the residual only within one stencil width of the support.
        let base = schwarzschild_setup(33, 65);
        let (rv0, _) = base.residual();
        let mut field = schwarzschild_setup(33, 65);
        field.set_difference(|rho, z| {
            let d = (rho - 10.0f64).hypot(z - 5.0) / 3.0;
            if d < 1.0 {
                (0.05 * (1.0 - d * d).powi(4), 0.0)
            } else {
                (0.0, 0.0)
            }
        });
        let (rv, _) = field.residual();
        let nz = field.spec.n_z;
        let mut far = 0.0f64;
        let mut near = 0.0f64;
        for i in 0..field.spec.n_rho {
            for j in 0..nz {
                let d = (field.rho_at(i) - 10.0f64).hypot(field.z_at(j) - 5.0);
                let change = (rv[i * nz + j] - rv0[i * nz + j]).abs();
                if d > 4.5 {
                    far = far.max(change);
                } else {
                    near = near.max(change);
                }
            }
        }
        assert!(near > 1e-4, "perturbation produced no residual: {near}");
        assert!(far < 1e-12, "residual leaked outside support: {far}");
    }
}
