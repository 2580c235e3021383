use std::io::Write;

use serde::Serialize;

use super::mesh::Mesh;
use super::sparse::{pcg, Pattern};
use crate::bounds::conjugate;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::parallel::WeightProfile;

/// Accepted exponent range for the solver.
pub const P_MIN: f64 = 1.1;
pub const P_MAX: f64 = 10.0;
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_NEWTON: usize = 200;
/// Regularization `ε` relative to the RMS gradient of the starting field.
const EPS_REL: f64 = 1e-10;

/// Per-triangle data: area and basis gradients.
struct Elements {
    area: Vec<f64>,
    grad: Vec<[Point; 3]>,
}

impl Elements {
    fn new(mesh: &Mesh) -> Self {
        let mut area = Vec::with_capacity(mesh.triangles.len());
        let mut grad = Vec::with_capacity(mesh.triangles.len());
        for t in &mesh.triangles {
            let (a, b, c) = (mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
            let two_a = (b - a).cross(c - a);
            let g = |p: Point, q: Point| Point::new((p.y - q.y) / two_a, (q.x - p.x) / two_a);
            area.push(0.5 * two_a);
            grad.push([g(b, c), g(c, a), g(a, b)]);
        }
        Elements { area, grad }
    }

    #[inline]
    fn gradient(&self, mesh: &Mesh, k: usize, u: &[f64]) -> Point {
        let t = mesh.triangles[k];
        let g = &self.grad[k];
        g[0] * u[t[0]] + g[1] * u[t[1]] + g[2] * u[t[2]]
    }

    /// Nodal load vector `b_i = ∫ f(d) φ_i`, by the edge-midpoint rule, zero on the boundary.
    fn load(&self, mesh: &Mesh, f: &WeightProfile) -> Vec<f64> {
        let lines = mesh.domain.edge_lines();
        let weight = |x: Point| f.value(lines.iter().map(|l| l.inner_distance(x)).fold(f64::INFINITY, f64::min).max(0.0));
        let mut b = vec![0.0; mesh.nodes.len()];
        for (k, t) in mesh.triangles.iter().enumerate() {
            // φ_i is 1/2 at the midpoints of the two edges through node i and 0 at the third
            let mid = |i: usize, j: usize| weight((mesh.nodes[t[i]] + mesh.nodes[t[j]]) * 0.5);
            let m = [mid(1, 2), mid(2, 0), mid(0, 1)];
            for (j, &i) in t.iter().enumerate() {
                if !mesh.boundary[i] {
                    b[i] += self.area[k] / 6.0 * (m[(j + 1) % 3] + m[(j + 2) % 3]);
                }
            }
        }
        b
    }

    fn gradient_power(&self, mesh: &Mesh, u: &[f64], p: f64) -> f64 {
        (0..self.area.len())
            .map(|k| self.area[k] * self.gradient(mesh, k, u).norm().powf(p))
            .sum()
    }
}

/// Discrete solution of `-Δ_p u = f(d(x, ∂Ω))`, `u = 0` on `∂Ω`.
#[derive(Debug, Clone)]
pub struct TorsionResult {
    pub mesh: Mesh,
    pub u: Vec<f64>,
    pub p: f64,
    pub weight: WeightProfile,
    /// `J(u) = (1/p)∫|∇u|^p - ∫ f u`.
    pub energy: f64,
    /// `T = ∫ f u`.
    pub torsion: f64,
    /// `∫|∇u|^p`.
    pub gradient_power: f64,
    /// Newton steps (p ≠ 2) or conjugate gradient steps (p = 2).
    pub iterations: usize,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveSummary {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub iters: usize,
    pub grad_norm: f64,
    pub h: f64,
    pub p: f64,
}

impl TorsionResult {
    /// Relative defect of `T = -(p/(p-1)) J`.
    pub fn energy_identity_defect(&self) -> f64 {
        let q = conjugate(self.p);
        (self.torsion + q * self.energy).abs() / self.torsion.abs().max(f64::MIN_POSITIVE)
    }

    /// Smallest nodal value over interior nodes.
    pub fn min_interior_value(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.mesh.boundary)
            .filter(|(_, &b)| !b)
            .map(|(&v, _)| v)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            t: self.torsion,
            j: self.energy,
            iters: self.iterations,
            grad_norm: self.grad_norm,
            h: self.mesh.h,
            p: self.p,
        }
    }

    /// Writes `x,y,u` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,u")?;
        for (p, u) in self.mesh.nodes.iter().zip(&self.u) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", p.x, p.y, u)?;
        }
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if (P_MIN..=P_MAX).contains(&p) {
        Ok(())
    } else {
        Err(Error::BadExponent { p, expected: "1.1 <= p <= 10" })
    }
}

fn cg_cap(n: usize) -> usize {
    50 * (n as f64).sqrt() as usize + 500
}

fn scatter(free: &[Option<usize>], x: &[f64], u: &mut [f64]) {
    for (i, fi) in free.iter().enumerate() {
        u[i] = fi.map_or(0.0, |j| x[j]);
    }
}

fn gather(free: &[Option<usize>], u: &[f64], n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (i, fi) in free.iter().enumerate() {
        if let Some(j) = fi {
            x[*j] = u[i];
        }
    }
    x
}

struct Problem<'a> {
    mesh: &'a Mesh,
    el: Elements,
    pat: Pattern,
    /// Load on all nodes.
    b: Vec<f64>,
    p: f64,
    eps2: f64,
    /// Lower bound on the Hessian weight `(|∇u|² + ε²)^{(p-2)/2}` for `p > 2`, where the true
    /// Hessian degenerates on flat regions of `u`.
    hess_floor: f64,
}

impl Problem<'_> {
    fn energy(&self, u: &[f64]) -> f64 {
        let p = self.p;
        let mut e = 0.0;
        for k in 0..self.el.area.len() {
            let g = self.el.gradient(self.mesh, k, u);
            e += self.el.area[k] * (g.norm_sq() + self.eps2).powf(0.5 * p) / p;
        }
        e - dot(&self.b, u)
    }

    /// Gradient of the regularized energy on the free unknowns.
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let p = self.p;
        let mut r = vec![0.0; self.pat.n];
        for (k, t) in self.mesh.triangles.iter().enumerate() {
            let g = self.el.gradient(self.mesh, k, u);
            let a = self.el.area[k] * (g.norm_sq() + self.eps2).powf(0.5 * (p - 2.0));
            for (j, &i) in t.iter().enumerate() {
                if let Some(fi) = self.pat.free[i] {
                    r[fi] += a * self.el.grad[k][j].dot(g);
                }
            }
        }
        for (i, fi) in self.pat.free.iter().enumerate() {
            if let Some(fi) = fi {
                r[*fi] -= self.b[i];
            }
        }
        r
    }

    fn assemble_hessian(&mut self, u: &[f64]) {
        let p = self.p;
        self.pat.matrix.clear();
        for k in 0..self.el.area.len() {
            let g = self.el.gradient(self.mesh, k, u);
            let s = g.norm_sq() + self.eps2;
            let a = s.powf(0.5 * (p - 2.0)).max(self.hess_floor);
            let c = (p - 2.0) * s.powf(0.5 * (p - 4.0));
            let gr = self.el.grad[k];
            let mut local = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] = self.el.area[k] * (a * gr[i].dot(gr[j]) + c * gr[i].dot(g) * gr[j].dot(g));
                }
            }
            self.pat.add_local(k, &local);
        }
    }

    fn assemble_stiffness(&mut self) {
        self.pat.matrix.clear();
        for k in 0..self.el.area.len() {
            let gr = self.el.grad[k];
            let mut local = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    local[i][j] = self.el.area[k] * gr[i].dot(gr[j]);
                }
            }
            self.pat.add_local(k, &local);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Linear (`p = 2`) solve; returns nodal values and the CG step count.
fn solve_linear(pb: &mut Problem<'_>, tol: f64) -> Result<(Vec<f64>, usize, f64)> {
    pb.assemble_stiffness();
    let rhs = gather(&pb.pat.free, &pb.b, pb.pat.n);
    let mut x = vec![0.0; pb.pat.n];
    let out = pcg(&pb.pat.matrix, &rhs, &mut x, tol, cg_cap(pb.pat.n));
    if !out.converged {
        return Err(Error::NoConvergence { iterations: out.iterations, grad_norm: out.residual });
    }
    let mut u = vec![0.0; pb.mesh.nodes.len()];
    scatter(&pb.pat.free, &x, &mut u);
    Ok((u, out.iterations, out.residual))
}

/// Damped Newton iterations on the regularized energy at the current `ε`.
///
/// Stops when the squared Newton decrement is at most `tol·|J|` and `|⟨∇J(u), u⟩|` is at most
/// `identity_tol·∫ f u`, or when `J` decreased by less than `tol·|J|` over the last 10 steps.
/// Returns the step count and the final gradient norm.
fn newton(pb: &mut Problem<'_>, u: &mut Vec<f64>, tol: f64, identity_tol: f64) -> Result<(usize, f64)> {
    let n = pb.pat.n;
    let mut energy = pb.energy(u);
    let mut r = pb.residual(u);
    let r0 = norm(&r).max(f64::MIN_POSITIVE);
    let mut full = vec![0.0; u.len()];
    let mut trial = u.clone();
    let mut history = vec![energy];
    for it in 1..=MAX_NEWTON {
        let rn = norm(&r);
        if pb.p > 2.0 {
            let area: f64 = pb.el.area.iter().sum();
            let mean = (0..pb.el.area.len())
                .map(|k| {
                    let s = pb.el.gradient(pb.mesh, k, u).norm_sq() + pb.eps2;
                    pb.el.area[k] * s.powf(0.5 * (pb.p - 2.0))
                })
                .sum::<f64>()
                / area;
            pb.hess_floor = 1e-3 * mean;
        }
        pb.assemble_hessian(u);
        let eta = (rn / r0).clamp(1e-12, 1e-2);
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let mut dx = vec![0.0; n];
        pcg(&pb.pat.matrix, &neg, &mut dx, eta, cg_cap(n));
        let decrement = -dot(&r, &dx);
        let load = dot(&pb.b, u);
        let identity = dot(&r, &gather(&pb.pat.free, u, n)).abs();
        if decrement <= tol * energy.abs() && identity <= identity_tol * load.abs() {
            return Ok((it, rn));
        }
        if decrement <= 0.0 {
            // The inexact step is not a descent direction: fall back to steepest descent.
            dx = neg;
        }
        let slope = dot(&r, &dx);
        scatter(&pb.pat.free, &dx, &mut full);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..u.len() {
                trial[i] = u[i] + step * full[i];
            }
            let e = pb.energy(&trial);
            if e <= energy + 1e-4 * step * slope {
                accepted = e < energy || step == 1.0;
                energy = e;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No representable decrease is left: accept if already at roundoff level.
            if decrement <= 1e-8 * energy.abs() {
                return Ok((it, rn));
            }
            return Err(Error::NoConvergence { iterations: it, grad_norm: rn });
        }
        std::mem::swap(u, &mut trial);
        r = pb.residual(u);
        history.push(energy);
        // Stagnation: relative energy decrease below `tol` over 10 successive steps.
        if history.len() > 10 && history[history.len() - 11] - energy <= tol * energy.abs() {
            return Ok((it, norm(&r)));
        }
    }
    Err(Error::NoConvergence { iterations: MAX_NEWTON, grad_norm: norm(&r) })
}

/// Minimizes `J(u) = (1/p)∫(|∇u|² + ε²)^{p/2} - ∫ f(d) u` over continuous piecewise-linear
/// fields vanishing on the boundary, with `ε` a `1e-10` fraction of the RMS gradient.
///
/// For `p = 2` the linear system is solved by Jacobi-preconditioned conjugate gradients to
/// relative residual `tol`. Otherwise damped Newton steps with Armijo backtracking are taken
/// from the rescaled `p = 2` solution until the squared Newton decrement falls below
/// `tol·|J|` and the discrete Euler–Lagrange identity `∫|∇u|^p = ∫ f u` holds to `1e-9`.
pub fn solve_torsion(mesh: &Mesh, f: &WeightProfile, p: f64, tol: f64) -> Result<TorsionResult> {
    check_p(p)?;
    if !(tol > 0.0) {
        return Err(Error::BadParameter(format!("tolerance must be positive, got {tol}")));
    }
    let el = Elements::new(mesh);
    let b = el.load(mesh, f);
        let pat = Pattern::new(mesh);
    let mut pb = Problem { mesh, el, pat, b, p, eps2: 0.0, hess_floor: 0.0 };

    let lin_tol = if p == 2.0 { tol } else { 1e-8 };
    let (mut u, cg_iters, cg_res) = solve_linear(&mut pb, lin_tol)?;
    let mut iterations = cg_iters;
    let mut grad_norm = cg_res;

    if p != 2.0 {
        // Best multiple of the linear solution: s^{p-1} = ∫ f u / ∫|∇u|^p.
        let work = pb.el.gradient_power(mesh, &u, p);
        let load = dot(&pb.b, &u);
        if work > 0.0 && load > 0.0 {
            let s = (load / work).powf(1.0 / (p - 1.0));
            u.iter_mut().for_each(|v| *v *= s);
        }
        // ε is taken relative to the RMS gradient of the starting field, so that it stays
        // negligible even when T is tiny (p close to 1).
        let area: f64 = pb.el.area.iter().sum();
        let typical = (pb.el.gradient_power(mesh, &u, 2.0) / area).sqrt();
        let target = (EPS_REL * typical).powi(2).max(f64::MIN_POSITIVE);
        iterations = 0;
        // For p < 2 the Hessian weight blows up where ∇u vanishes; approach the target
        // regularization through a decreasing sequence of ε, warm-starting each stage.
        if p < 2.0 {
            let mut eps = 1e-2 * typical;
            while eps * eps > 100.0 * target {
                pb.eps2 = eps * eps;
                iterations += newton(&mut pb, &mut u, 1e-6, f64::INFINITY)?.0;
                eps *= 0.1;
            }
        }
        pb.eps2 = target;
        let (its, gn) = newton(&mut pb, &mut u, tol, 1e-9)?;
        iterations += its;
        grad_norm = gn;
    }

    let torsion = dot(&pb.b, &u);
    let gradient_power = pb.el.gradient_power(mesh, &u, p);
    Ok(TorsionResult {
        mesh: mesh.clone(),
        energy: gradient_power / p - torsion,
        torsion,
        gradient_power,
        u,
        p,
        weight: *f,
        iterations,
        grad_norm,
    })
}

/// `(∫ f u)^q / (∫|∇u|^p)^{1/(p-1)}` for the discrete field `u`.
pub fn rayleigh_quotient(mesh: &Mesh, u: &[f64], f: &WeightProfile, p: f64) -> f64 {
    let el = Elements::new(mesh);
    let b = el.load(mesh, f);
    let num = dot(&b, u);
    let den = el.gradient_power(mesh, u, p);
    num.powf(conjugate(p)) / den.powf(1.0 / (p - 1.0))
}

/// Rayleigh quotient of a converged result; equal to its `T` up to solver tolerance.
pub fn rayleigh_check(result: &TorsionResult, f: &WeightProfile, p: f64) -> f64 {
    rayleigh_quotient(&result.mesh, &result.u, f, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolygon;
    use crate::solver::mesh::triangulate;
    use std::f64::consts::PI;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::from_vertices(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    fn regular(k: usize) -> ConvexPolygon {
        let pts: Vec<(f64, f64)> = (0..k)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / k as f64;
                (a.cos(), a.sin())
            })
            .collect();
        ConvexPolygon::from_vertices(&pts).unwrap()
    }

    #[test]
    fn square_p2() {
        let mesh = triangulate(&unit_square(), 1.0 / 32.0).unwrap();
        let r = solve_torsion(&mesh, &WeightProfile::UNIT, 2.0, 1e-10).unwrap();
        assert!((r.torsion - 0.035144).abs() < 0.01 * 0.035144, "{}", r.torsion);
        assert!(r.torsion < 0.0351442);
        assert!(r.energy_identity_defect() < 1e-6);
        assert!(r.min_interior_value() >= -1e-12);
        let q = rayleigh_check(&r, &WeightProfile::UNIT, 2.0);
        assert!((q - r.torsion).abs() < 1e-6 * r.torsion);
    }

    #[test]
    fn quotient_is_zero_homogeneous() {
        let mesh = triangulate(&unit_square(), 0.1).unwrap();
        let r = solve_torsion(&mesh, &WeightProfile::UNIT, 3.0, 1e-12).unwrap();
        let doubled: Vec<f64> = r.u.iter().map(|v| 2.0 * v).collect();
        let a = rayleigh_quotient(&mesh, &r.u, &WeightProfile::UNIT, 3.0);
        let b = rayleigh_quotient(&mesh, &doubled, &WeightProfile::UNIT, 3.0);
        assert!((a - b).abs() < 1e-12 * a);
        assert!((a - r.torsion).abs() < 1e-6 * a);
    }

    #[test]
    fn disk_p3_radial_oracle() {
        // u(r) = (2/3) 2^{-1/2} (1 - r^{3/2}),  T = 2π (2/3) 2^{-1/2} (1/2 - 2/7)
        let exact = 2.0 * PI * (2.0 / 3.0) * 0.5f64.sqrt() * (0.5 - 2.0 / 7.0);
        let mesh = triangulate(&regular(128), 0.05).unwrap();
        let r = solve_torsion(&mesh, &WeightProfile::UNIT, 3.0, 1e-12).unwrap();
        assert!((r.torsion - exact).abs() < 0.02 * exact, "{} vs {exact}", r.torsion);
        assert!(r.energy_identity_defect() < 1e-6);
    }

    #[test]
    fn p_below_two_converges() {
        let mesh = triangulate(&unit_square(), 0.05).unwrap();
        let r = solve_torsion(&mesh, &WeightProfile::UNIT, 1.5, 1e-12).unwrap();
        assert!(r.energy_identity_defect() < 1e-6);
        assert!(r.min_interior_value() >= -1e-12);
    }

    #[test]
    fn exponent_range_enforced() {
        let mesh = triangulate(&unit_square(), 0.25).unwrap();
        assert!(solve_torsion(&mesh, &WeightProfile::UNIT, 1.05, 1e-8).is_err());
        assert!(solve_torsion(&mesh, &WeightProfile::UNIT, 11.0, 1e-8).is_err());
    }

    #[test]
    fn summary_json() {
        let mesh = triangulate(&unit_square(), 0.25).unwrap();
        let r = solve_torsion(&mesh, &WeightProfile::UNIT, 2.0, 1e-10).unwrap();
        let v = serde_json::to_value(r.summary()).unwrap();
        for k in ["T", "J", "iters", "grad_norm", "h", "p"] {
            assert!(v.get(k).is_some());
        }
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,y,u\n"));
    }
}
