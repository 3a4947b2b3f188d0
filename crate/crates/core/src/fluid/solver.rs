//! Steady axisymmetric Navier–Stokes in stream-function/vorticity form.
//!
//! With u_z = ψ_r/r, u_r = −ψ_z/r and ω = ∂u_r/∂z − ∂u_z/∂r:
//!   ψ_zz + ψ_rr − ψ_r/r = −r ω
//!   u_z ω_z + u_r ω_r − u_r ω/r = ν (ω_zz + ω_rr + ω_r/r − ω/r²)
//! discretized with second-order differences on the mapped grid
//! (ξ = z, η = r/a(z)) and solved by Newton with a banded LU.

use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use super::grid::AxisymGrid;
use super::params::FluidParams;
use crate::{Error, Result};

/// Newton controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Target for the largest scaled equation residual.
    pub tol: f64,
    pub max_newton: usize,
    /// Accepted residual when the line search can no longer reduce it
    /// (roundoff floor on coarse or strongly dilated grids).
    pub stall_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton: 50,
            stall_tol: 1e-8,
        }
    }
}

/// Converged flow on a grid. Node fields are indexed i·(n_r + 1) + j.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub grid: AxisymGrid,
    pub u_z: Vec<f64>,
    pub u_r: Vec<f64>,
    pub p: Vec<f64>,
    pub psi: Vec<f64>,
    pub omega: Vec<f64>,
    /// Largest scaled residual at return.
    pub converged_residual: f64,
    pub residual_history: Vec<f64>,
    /// |τ_w| per axial node [kPa].
    pub wall_shear: Vec<f64>,
    /// Wall pressure per axial node [kPa].
    pub wall_pressure: Vec<f64>,
}

impl FlowSolution {
    /// Volumetric flux through station i, 2π(ψ_wall − ψ_axis).
    pub fn flux(&self, i: usize) -> f64 {
        let nr = self.grid.n_r;
        let k = i * (nr + 1);
        2.0 * std::f64::consts::PI * (self.psi[k + nr] - self.psi[k])
    }

    pub fn centerline_velocity(&self) -> Vec<f64> {
        (0..=self.grid.n_z).map(|i| self.u_z[i * (self.grid.n_r + 1)]).collect()
    }
}

/// Three-point first-derivative weights on a nonuniform stencil.
fn d1(hm: f64, hp: f64) -> [f64; 3] {
    [-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))]
}

/// Three-point second-derivative weights.
fn d2(hm: f64, hp: f64) -> [f64; 3] {
    [2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))]
}

/// One-sided second-order first derivative at x0 from (x0, x1, x2).
fn d1_one_sided(x0: f64, x1: f64, x2: f64) -> [f64; 3] {
    let (h1, h2) = (x1 - x0, x2 - x0);
    [
        -(h1 + h2) / (h1 * h2),
        h2 / (h1 * (h2 - h1)),
        -h1 / (h2 * (h2 - h1)),
    ]
}

/// Wall slope and curvature a', a'' at every axial node.
fn wall_derivatives(g: &AxisymGrid) -> (Vec<f64>, Vec<f64>) {
    let (z, a, n) = (&g.z_nodes, &g.wall_radius, g.n_z);
    let mut da = vec![0.0; n + 1];
    let mut dda = vec![0.0; n + 1];
    for i in 1..n {
        let (hm, hp) = (z[i] - z[i - 1], z[i + 1] - z[i]);
        let w1 = d1(hm, hp);
        let w2 = d2(hm, hp);
        da[i] = w1[0] * a[i - 1] + w1[1] * a[i] + w1[2] * a[i + 1];
        dda[i] = w2[0] * a[i - 1] + w2[1] * a[i] + w2[2] * a[i + 1];
    }
    let w = d1_one_sided(z[0], z[1], z[2]);
    da[0] = w[0] * a[0] + w[1] * a[1] + w[2] * a[2];
    let w = d1_one_sided(z[n], z[n - 1], z[n - 2]);
    da[n] = w[0] * a[n] + w[1] * a[n - 1] + w[2] * a[n - 2];
    dda[0] = dda[1];
    dda[n] = dda[n - 1];
    (da, dda)
}

/// Stencils on the 3×3 neighbourhood of an interior node, [p][q] ↔ (i+p−1, j+q−1).
type Stencil = [[f64; 3]; 3];

struct NodeOps {
    r: f64,
    sz: Stencil,
    sr: Stencil,
    lap_psi: Stencil,
    lap_omega: Stencil,
}

struct Discretization<'a> {
    g: &'a AxisymGrid,
    f: &'a FluidParams,
    da: Vec<f64>,
    dda: Vec<f64>,
    a_in: f64,
    psi_wall: f64,
    s_psi: f64,
    s_omega: f64,
    s_bc_psi: f64,
    s_bc_omega: f64,
    nu: f64,
}

impl<'a> Discretization<'a> {
    fn new(g: &'a AxisymGrid, f: &'a FluidParams, rho_scale: f64) -> Self {
        let (da, dda) = wall_derivatives(g);
        let a_in = g.wall_radius[0];
        let a_ref = a_in;
        let nu = f.mu / (f.rho * rho_scale);
        Self {
            g,
            f,
            da,
            dda,
            a_in,
            psi_wall: f.u_in * a_in * a_in / 4.0,
            s_psi: f.u_in,
            s_omega: nu * f.u_in / a_ref.powi(3),
            s_bc_psi: f.u_in * a_ref * a_ref,
            s_bc_omega: f.u_in / a_ref,
            nu,
        }
    }

    #[inline]
    fn node(&self, i: usize, j: usize) -> usize {
        i * (self.g.n_r + 1) + j
    }

    #[inline]
    fn var(&self, i: usize, j: usize, v: usize) -> usize {
        2 * self.node(i, j) + v
    }

    fn inlet(&self, j: usize) -> (f64, f64) {
        let e = self.g.eta[j];
        let u = self.f.u_in;
        let a = self.a_in;
        (u * a * a * (0.5 * e * e - 0.25 * e.powi(4)), 2.0 * u * e / a)
    }

    fn ops(&self, i: usize, j: usize) -> NodeOps {
        let g = self.g;
        let (z, eta) = (&g.z_nodes, &g.eta);
        let a = g.wall_radius[i];
        let (ap, app) = (self.da[i], self.dda[i]);
        let e = eta[j];
        let r = e * a;
        let gz = e * ap / a;
        let c1 = -e * (app / a - 2.0 * ap * ap / (a * a));
        let wz = d1(z[i] - z[i - 1], z[i + 1] - z[i]);
        let wzz = d2(z[i] - z[i - 1], z[i + 1] - z[i]);
        let we = d1(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);
        let wee = d2(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);

        let mut sz = [[0.0; 3]; 3];
        let mut sr = [[0.0; 3]; 3];
        let mut szz = [[0.0; 3]; 3];
        let mut srr = [[0.0; 3]; 3];
        for k in 0..3 {
            sz[k][1] += wz[k];
            sz[1][k] -= gz * we[k];
            sr[1][k] = we[k] / a;
            szz[k][1] += wzz[k];
            szz[1][k] += gz * gz * wee[k] + c1 * we[k];
            srr[1][k] = wee[k] / (a * a);
            for q in 0..3 {
                szz[k][q] -= 2.0 * gz * wz[k] * we[q];
            }
        }
        let mut lap_psi = [[0.0; 3]; 3];
        let mut lap_omega = [[0.0; 3]; 3];
        for p in 0..3 {
            for q in 0..3 {
                lap_psi[p][q] = szz[p][q] + srr[p][q] - sr[p][q] / r;
                lap_omega[p][q] = szz[p][q] + srr[p][q] + sr[p][q] / r;
            }
        }
        lap_omega[1][1] -= 1.0 / (r * r);
        NodeOps {
            r,
            sz,
            sr,
            lap_psi,
            lap_omega,
        }
    }

    fn apply(&self, s: &Stencil, x: &[f64], i: usize, j: usize, v: usize) -> f64 {
        let mut acc = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                if s[p][q] != 0.0 {
                    acc += s[p][q] * x[self.var(i + p - 1, j + q - 1, v)];
                }
            }
        }
        acc
    }

    /// Second η-derivative of ψ at the wall from ψ_η = 0 and two inner nodes.
    fn wall_psi_etaeta(&self, j: usize) -> [f64; 3] {
        let eta = &self.g.eta;
        let h1 = eta[j] - eta[j - 1];
        let h2 = eta[j] - eta[j - 2];
        let den = h1 * h1 * h2 * h2 * (h2 - h1);
        // Weights on (ψ_N, ψ_{N−1}, ψ_{N−2}).
        let w1 = 2.0 * h2.powi(3) / den;
        let w2 = -2.0 * h1.powi(3) / den;
        [-(w1 + w2), w1, w2]
    }

    /// Residual vector and, when requested, the Jacobian.
    fn assemble(&self, x: &[f64], mut jac: Option<&mut BandMatrix>) -> Vec<f64> {
        let (nz, nr) = (self.g.n_z, self.g.n_r);
        let mut res = vec![0.0; x.len()];
        macro_rules! put {
            ($row:expr, $col:expr, $v:expr) => {
                if let Some(m) = jac.as_deref_mut() {
                    m.add($row, $col, $v);
                }
            };
        }
        for i in 0..=nz {
            for j in 0..=nr {
                let rp = self.var(i, j, 0);
                let rw = self.var(i, j, 1);
                if j == 0 {
                    res[rp] = x[rp] / self.s_bc_psi;
                    res[rw] = x[rw] / self.s_bc_omega;
                    put!(rp, rp, 1.0 / self.s_bc_psi);
                    put!(rw, rw, 1.0 / self.s_bc_omega);
                } else if i == 0 {
                    let (ps, om) = self.inlet(j);
                    res[rp] = (x[rp] - ps) / self.s_bc_psi;
                    res[rw] = (x[rw] - om) / self.s_bc_omega;
                    put!(rp, rp, 1.0 / self.s_bc_psi);
                    put!(rw, rw, 1.0 / self.s_bc_omega);
                } else if j == nr {
                    let a = self.g.wall_radius[i];
                    let ap = self.da[i];
                    res[rp] = (x[rp] - self.psi_wall) / self.s_bc_psi;
                    put!(rp, rp, 1.0 / self.s_bc_psi);
                    let w = self.wall_psi_etaeta(j);
                    let c = (1.0 + ap * ap) / a.powi(3);
                    let cols = [self.var(i, j, 0), self.var(i, j - 1, 0), self.var(i, j - 2, 0)];
                    let pee: f64 = (0..3).map(|k| w[k] * x[cols[k]]).sum();
                    res[rw] = (x[rw] + c * pee) / self.s_bc_omega;
                    put!(rw, rw, 1.0 / self.s_bc_omega);
                    for k in 0..3 {
                        put!(rw, cols[k], c * w[k] / self.s_bc_omega);
                    }
                } else if i == nz {
                    for v in 0..2 {
                        let row = self.var(i, j, v);
                        let back = self.var(i - 1, j, v);
                        let s = if v == 0 { self.s_bc_psi } else { self.s_bc_omega };
                        res[row] = (x[row] - x[back]) / s;
                        put!(row, row, 1.0 / s);
                        put!(row, back, -1.0 / s);
                    }
                } else {
                    let o = self.ops(i, j);
                    let r = o.r;
                    // Stream function.
                    let lp = self.apply(&o.lap_psi, x, i, j, 0);
                    res[rp] = (lp + r * x[rw]) / self.s_psi;
                    // Vorticity transport.
                    let psi_r = self.apply(&o.sr, x, i, j, 0);
                    let psi_z = self.apply(&o.sz, x, i, j, 0);
                    let om_r = self.apply(&o.sr, x, i, j, 1);
                    let om_z = self.apply(&o.sz, x, i, j, 1);
                    let om = x[rw];
                    let lw = self.apply(&o.lap_omega, x, i, j, 1);
                    let conv = (psi_r * om_z - psi_z * om_r) / r + psi_z * om / (r * r);
                    res[rw] = (self.nu * lw - conv) / self.s_omega;
                    if jac.is_some() {
                        put!(rp, rw, r / self.s_psi);
                        for p in 0..3 {
                            for q in 0..3 {
                                let cp = self.var(i + p - 1, j + q - 1, 0);
                                let cw = cp + 1;
                                let (sz, sr) = (o.sz[p][q], o.sr[p][q]);
                                if o.lap_psi[p][q] != 0.0 {
                                    put!(rp, cp, o.lap_psi[p][q] / self.s_psi);
                                }
                                let dpsi = -(sr * om_z - sz * om_r) / r - sz * om / (r * r);
                                let mut dom = self.nu * o.lap_omega[p][q] - (psi_r * sz - psi_z * sr) / r;
                                if p == 1 && q == 1 {
                                    dom -= psi_z / (r * r);
                                }
                                if dpsi != 0.0 {
                                    put!(rw, cp, dpsi / self.s_omega);
                                }
                                if dom != 0.0 {
                                    put!(rw, cw, dom / self.s_omega);
                                }
                            }
                        }
                    }
                }
            }
        }
        res
    }

    fn bandwidth(&self) -> usize {
        2 * (self.g.n_r + 1) + 3
    }

    fn initial_guess(&self) -> Vec<f64> {
        let (nz, nr) = (self.g.n_z, self.g.n_r);
        let mut x = vec![0.0; 2 * (nz + 1) * (nr + 1)];
        for i in 0..=nz {
            let a = self.g.wall_radius[i];
            for j in 0..=nr {
                let e = self.g.eta[j];
                x[self.var(i, j, 0)] = self.psi_wall * (2.0 * e * e - e.powi(4));
                x[self.var(i, j, 1)] = 8.0 * self.psi_wall * e / a.powi(3);
            }
        }
        x
    }

    fn newton(&self, mut x: Vec<f64>, opts: &SolverOptions, history: &mut Vec<f64>) -> std::result::Result<(Vec<f64>, f64), f64> {
        let n = x.len();
        let bw = self.bandwidth();
        let mut res = self.assemble(&x, None);
        let mut norm = inf_norm(&res);
        history.push(norm);
        for _ in 0..opts.max_newton {
            if norm < opts.tol {
                return Ok((x, norm));
            }
            let mut jac = BandMatrix::zeros(n, bw, bw);
            self.assemble(&x, Some(&mut jac));
            if jac.factor().is_err() {
                return Err(norm);
            }
            let mut dx: Vec<f64> = res.iter().map(|v| -v).collect();
            jac.solve(&mut dx);
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let xt: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + step * b).collect();
                let rt = self.assemble(&xt, None);
                let nt = inf_norm(&rt);
                if nt.is_finite() && nt < norm {
                    x = xt;
                    res = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            history.push(norm);
            if !accepted {
                return if norm < opts.stall_tol.max(opts.tol) { Ok((x, norm)) } else { Err(norm) };
            }
        }
        if norm < opts.tol {
            Ok((x, norm))
        } else {
            Err(norm)
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

/// Solves the steady flow on `grid`. `warm` supplies (ψ, ω) node fields of a
/// previous solution on a grid of the same size.
pub fn solve_steady_flow(
    grid: &AxisymGrid,
    params: &FluidParams,
    opts: &SolverOptions,
    warm: Option<&FlowSolution>,
) -> Result<FlowSolution> {
    params.validate()?;
    if grid.n_z < 8 || grid.n_r < 8 {
        return Err(Error::param("grid", "need at least 8 cells in each direction"));
    }
    if grid.wall_radius.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::DegenerateGeometry("nonpositive wall radius".into()));
    }
    let mut history = Vec::new();
    let full = Discretization::new(grid, params, 1.0);
    let start = warm
        .filter(|w| w.grid.n_z == grid.n_z && w.grid.n_r == grid.n_r)
        .map(|w| w.psi.iter().zip(&w.omega).flat_map(|(p, o)| [*p, *o]).collect::<Vec<_>>());
    let mut attempt = match start {
        Some(x0) => full.newton(x0, opts, &mut history),
        None => Err(f64::INFINITY),
    };
    if attempt.is_err() {
        attempt = full.newton(full.initial_guess(), opts, &mut history);
    }
    let (x, norm) = match attempt {
        Ok(v) => v,
        Err(_) => {
            // Continuation in inertia from Stokes flow.
            let mut x = full.initial_guess();
            let mut out = None;
            for &s in &[1e-6, 0.25, 0.5, 0.75, 1.0] {
                let d = Discretization::new(grid, params, s);
                match d.newton(x.clone(), opts, &mut history) {
                    Ok((xs, n)) => {
                        x = xs;
                        out = Some(n);
                    }
                    Err(n) => {
                        return Err(Error::NotConverged {
                            what: "steady flow".into(),
                            iterations: history.len(),
                            residual: n,
                        })
                    }
                }
            }
            (x, out.unwrap_or(f64::NAN))
        }
    };
    Ok(postprocess(&full, x, norm, history))
}

fn postprocess(d: &Discretization, x: Vec<f64>, norm: f64, history: Vec<f64>) -> FlowSolution {
    let g = d.g;
    let (nz, nr) = (g.n_z, g.n_r);
    let nn = (nz + 1) * (nr + 1);
    let psi: Vec<f64> = (0..nn).map(|k| x[2 * k]).collect();
    let omega: Vec<f64> = (0..nn).map(|k| x[2 * k + 1]).collect();
    let at = |f: &Vec<f64>, i: usize, j: usize| f[i * (nr + 1) + j];
    let eta = &g.eta;
    let z = &g.z_nodes;

    // Derivative in ξ at node i along a fixed-η line.
    let dxi = |f: &Vec<f64>, i: usize, j: usize| -> f64 {
        if i == 0 {
            let w = d1_one_sided(z[0], z[1], z[2]);
            w[0] * at(f, 0, j) + w[1] * at(f, 1, j) + w[2] * at(f, 2, j)
        } else if i == nz {
            let w = d1_one_sided(z[nz], z[nz - 1], z[nz - 2]);
            w[0] * at(f, nz, j) + w[1] * at(f, nz - 1, j) + w[2] * at(f, nz - 2, j)
        } else {
            let w = d1(z[i] - z[i - 1], z[i + 1] - z[i]);
            w[0] * at(f, i - 1, j) + w[1] * at(f, i, j) + w[2] * at(f, i + 1, j)
        }
    };
    let deta = |f: &Vec<f64>, i: usize, j: usize| -> f64 {
        if j == 0 {
            let w = d1_one_sided(eta[0], eta[1], eta[2]);
            w[0] * at(f, i, 0) + w[1] * at(f, i, 1) + w[2] * at(f, i, 2)
        } else if j == nr {
            let w = d1_one_sided(eta[nr], eta[nr - 1], eta[nr - 2]);
            w[0] * at(f, i, nr) + w[1] * at(f, i, nr - 1) + w[2] * at(f, i, nr - 2)
        } else {
            let w = d1(eta[j] - eta[j - 1], eta[j + 1] - eta[j]);
            w[0] * at(f, i, j - 1) + w[1] * at(f, i, j) + w[2] * at(f, i, j + 1)
        }
    };

    let mut u_z = vec![0.0; nn];
    let mut u_r = vec![0.0; nn];
    for i in 0..=nz {
        let a = g.wall_radius[i];
        let gz_fac = d.da[i] / a;
        for j in 0..nr {
            let k = i * (nr + 1) + j;
            if j == 0 {
                // ψ ≈ c₂η² + c₄η⁴ near the axis; u_z = 2c₂/a².
                let (e1, e2) = (eta[1], eta[2]);
                let (p1, p2) = (at(&psi, i, 1), at(&psi, i, 2));
                let c2 = (p1 * e2.powi(4) - p2 * e1.powi(4)) / (e1 * e1 * e2.powi(4) - e2 * e2 * e1.powi(4));
                u_z[k] = 2.0 * c2 / (a * a);
            } else {
                let e = eta[j];
                let r = e * a;
                let pe = deta(&psi, i, j);
                u_z[k] = pe / (a * r);
                u_r[k] = -(dxi(&psi, i, j) - e * gz_fac * pe) / r;
            }
        }
    }

    let mut wall_shear = vec![0.0; nz + 1];
    let mut grad = vec![0.0; nz + 1];
    for i in 0..=nz {
        let a = g.wall_radius[i];
        let ap = d.da[i];
        let w = at(&omega, i, nr);
        wall_shear[i] = d.f.mu * w.abs();
        let w_eta = deta(&omega, i, nr);
        let w_xi = dxi(&omega, i, nr);
        grad[i] = d.f.mu * (-(1.0 + ap * ap) * w_eta / a - w / a + ap * w_xi);
    }
    let mut wall_pressure = vec![0.0; nz + 1];
    wall_pressure[nz] = d.f.p_out;
    for i in (0..nz).rev() {
        wall_pressure[i] = wall_pressure[i + 1] - 0.5 * (grad[i] + grad[i + 1]) * (z[i + 1] - z[i]);
    }

    // Interior pressure from the radial momentum balance, integrated inward.
    let rho = d.f.rho;
    let mut p = vec![0.0; nn];
    for i in 0..=nz {
        let a = g.wall_radius[i];
        let gz_fac = d.da[i] / a;
        let dpdr = |j: usize| -> f64 {
            let e = eta[j];
            let urr = deta(&u_r, i, j) / a;
            let urz = dxi(&u_r, i, j) - e * gz_fac * deta(&u_r, i, j);
            let wz = dxi(&omega, i, j) - e * gz_fac * deta(&omega, i, j);
            let k = i * (nr + 1) + j;
            -rho * (u_r[k] * urr + u_z[k] * urz) + d.f.mu * wz
        };
        p[i * (nr + 1) + nr] = wall_pressure[i];
        let mut prev = dpdr(nr);
        for j in (0..nr).rev() {
            let cur = dpdr(j);
            let dr = (eta[j + 1] - eta[j]) * a;
            p[i * (nr + 1) + j] = p[i * (nr + 1) + j + 1] - 0.5 * (prev + cur) * dr;
            prev = cur;
        }
    }

    FlowSolution {
        grid: g.clone(),
        u_z,
        u_r,
        p,
        psi,
        omega,
        converged_residual: norm,
        residual_history: history,
        wall_shear,
        wall_pressure,
    }
}
