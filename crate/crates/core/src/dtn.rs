//! Per-mode radial extension problems and their Dirichlet-to-Neumann values.
//!
//! For a separated boundary mode the extension u(r) solves
//! a [u'' + p u' - q u] - t nu u = 0 on (0, end], regular at r = 0. The solver
//! works in s = ln r with the scaled log-derivative w = r u'/u, which obeys
//! dw/ds = w - (r p) w + r^2 (q + tau) - w^2 with tau = t nu / a.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{FactorRole, FlatProfiles, GeometryModel, SpectrumSource};
use crate::jacobi::BoundaryMode;
use crate::ode::{self, Options, GAUSS5};

/// Relative start of the integration interval.
pub const START_FRACTION: f64 = 1e-6;
/// Default relative tolerance for DtN values.
pub const DEFAULT_TOL: f64 = 1e-9;
/// e-folds of contraction required before the quasi-static start is trusted.
const DAMPING_BUDGET: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialKind {
    /// Density sin^n r; collapsing unit S^n with radius sin r.
    Cap { n: usize },
    /// Density sinh^m r; collapsing unit S^m with radius sinh r.
    Ball { m: usize },
    /// Density f psi^{m-1}; collapsing circle f(r), warped fiber psi(r).
    Flat { m: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGeometry {
    pub kind: RadialKind,
    /// Newton-tensor block on the radial factor.
    pub a: f64,
    /// Newton-tensor block on the transverse factor.
    pub t: f64,
    pub domain_end: f64,
    /// Physical radius per model radius (1 unless the metric was dilated).
    #[serde(default = "one")]
    pub length_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl RadialGeometry {
    /// Dimension of the collapsing factor.
    pub fn collapse_dim(&self) -> usize {
        match self.kind {
            RadialKind::Cap { n } => n,
            RadialKind::Ball { m } => m,
            RadialKind::Flat { .. } => 1,
        }
    }

    /// r p(r): radius times the log-derivative of the volume density.
    pub fn r_density_logderiv(&self, r: f64) -> f64 {
        match self.kind {
            RadialKind::Cap { n } => n as f64 * r / r.tan(),
            RadialKind::Ball { m } => m as f64 * r / r.tanh(),
            RadialKind::Flat { m } => {
                let mr = m as f64 * r;
                mr / mr.tanh()
            }
        }
    }

    /// p(r), the log-derivative of the volume density.
    pub fn density_logderiv(&self, r: f64) -> f64 {
        self.r_density_logderiv(r) / r
    }

    /// r^2 / (radius of the collapsing factor)^2.
    pub fn r2_collapse_inv_sq(&self, r: f64) -> f64 {
        match self.kind {
            RadialKind::Cap { .. } => (r / r.sin()).powi(2),
            RadialKind::Ball { .. } => (r / r.sinh()).powi(2),
            RadialKind::Flat { m } => {
                let prof = FlatProfiles { m };
                (2.0 * (r.ln() - prof.ln_f(r))).exp()
            }
        }
    }

    /// 1 / psi(r)^2 for the warped fiber (zero when absent).
    pub fn warp_inv_sq(&self, r: f64) -> f64 {
        match self.kind {
            RadialKind::Flat { m } => (-2.0 * FlatProfiles { m }.ln_psi(r)).exp(),
            _ => 0.0,
        }
    }

    pub fn ln_density(&self, r: f64) -> f64 {
        match self.kind {
            RadialKind::Cap { n } => n as f64 * r.sin().ln(),
            RadialKind::Ball { m } => m as f64 * crate::families::ln_sinh(r),
            RadialKind::Flat { m } => {
                let prof = FlatProfiles { m };
                prof.ln_f(r) + (m as f64 - 1.0) * prof.ln_psi(r)
            }
        }
    }

    /// (d, p1, w0) with r p = d + p1 r^2 + ... and r^2/radius^2 = 1 + w0 r^2 + ...
    fn series(&self) -> (f64, f64, f64) {
        match self.kind {
            RadialKind::Cap { n } => (n as f64, -(n as f64) / 3.0, 1.0 / 3.0),
            RadialKind::Ball { m } => (m as f64, m as f64 / 3.0, -1.0 / 3.0),
            RadialKind::Flat { m } => {
                let mf = m as f64;
                (1.0, mf * mf / 3.0, -mf * mf / 12.0 - mf * (2.0 - mf) / 4.0)
            }
        }
    }
}

/// One separated extension problem in model coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub geometry: RadialGeometry,
    /// Unit-metric eigenvalue on the collapsing factor.
    pub collapse_mu: f64,
    /// Unit-metric eigenvalue on the warped fiber.
    pub warped_mu: f64,
    /// t * nu, with nu the physical transverse eigenvalue.
    pub transverse: f64,
    pub frobenius_exp: u64,
}

impl RadialProblem {
    /// Problem with only a transverse eigenvalue (constant on the collapsing factor).
    pub fn transverse_only(geometry: RadialGeometry, nu: f64) -> Self {
        RadialProblem { geometry, collapse_mu: 0.0, warped_mu: 0.0, transverse: geometry.t * nu, frobenius_exp: 0 }
    }

    /// Problem for degree `j` on the collapsing factor plus a warped eigenvalue.
    pub fn with_degree(geometry: RadialGeometry, j: u64, warped_mu: f64, nu: f64) -> Self {
        let d = geometry.collapse_dim() as f64;
        let jf = j as f64;
        RadialProblem {
            geometry,
            collapse_mu: jf * (jf + d - 1.0),
            warped_mu,
            transverse: geometry.t * nu,
            frobenius_exp: j,
        }
    }

    pub fn is_zero_mode(&self) -> bool {
        self.collapse_mu == 0.0 && self.warped_mu == 0.0 && self.transverse == 0.0
    }

    /// tau = t nu / a in model units.
    pub fn tau(&self) -> f64 {
        self.transverse / self.geometry.a * self.geometry.length_scale.powi(2)
    }

    /// q(r) in model coordinates.
    pub fn mode_potential(&self, r: f64) -> f64 {
        (self.collapse_mu * self.geometry.r2_collapse_inv_sq(r)) / (r * r)
            + self.warped_mu * self.geometry.warp_inv_sq(r)
    }

    /// r^2 (q + tau).
    fn r2_total(&self, r: f64) -> f64 {
        self.collapse_mu * self.geometry.r2_collapse_inv_sq(r)
            + r * r * (self.warped_mu * self.geometry.warp_inv_sq(r) + self.tau())
    }

    fn rhs(&self, s: f64, w: f64) -> f64 {
        let r = s.exp();
        w - self.geometry.r_density_logderiv(r) * w + self.r2_total(r) - w * w
    }

    fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if !(g.a > 0.0 && g.a.is_finite()) {
            return Err(Error::invalid(format!("radial coefficient a must be positive, got {}", g.a)));
        }
        if !(g.domain_end > 0.0 && g.domain_end.is_finite()) || !(g.length_scale > 0.0) {
            return Err(Error::invalid("domain end and length scale must be positive"));
        }
        if let RadialKind::Cap { .. } = g.kind {
            if g.domain_end >= std::f64::consts::PI {
                return Err(Error::invalid("cap domain must end before the antipode"));
            }
        }
        if !(self.collapse_mu >= 0.0 && self.warped_mu >= 0.0 && self.transverse.is_finite()) {
            return Err(Error::invalid("mode eigenvalues must be nonnegative and finite"));
        }
        Ok(())
    }

    /// Two-term Frobenius value of w at radius r.
    fn frobenius_w(&self, r: f64) -> f64 {
        let (d, p1, w0) = self.geometry.series();
        let g = self.frobenius_exp as f64;
        let q0 = self.collapse_mu * w0 + self.warped_mu;
        let c1 = (q0 + self.tau() - g * p1) / (4.0 * g + 2.0 + 2.0 * d);
        g + 2.0 * c1 * r * r / (1.0 + c1 * r * r)
    }

    /// Stable positive root of w^2 + (r p - 1) w - r^2 (q + tau) = 0.
    fn quasi_static_w(&self, r: f64) -> f64 {
        let b = self.geometry.r_density_logderiv(r) - 1.0;
        let c = self.r2_total(r).max(0.0);
        let disc = (b * b + 4.0 * c).sqrt();
        if b > 0.0 {
            2.0 * c / (b + disc)
        } else {
            (disc - b) / 2.0
        }
    }

    /// Start point (s, w). Starts on the attracting quasi-static branch once
    /// the remaining contraction and volume weight each exceed the budget;
    /// otherwise at the series start near the origin.
    fn start(&self) -> (f64, f64) {
        let end = self.geometry.domain_end;
        let s_end = end.ln();
        let r0 = START_FRACTION * end;
        let s0 = r0.ln();
        let series = (s0, self.frobenius_w(r0));
        let (mut contraction, mut weight) = (0.0, 0.0);
        let mut s = s_end;
        while s > s0 {
            let r = s.exp();
            let wq = self.quasi_static_w(r);
            let rp = self.geometry.r_density_logderiv(r);
            let g1 = 2.0 * wq + rp - 1.0;
            let g2 = 2.0 * wq - rp;
            let h = (0.5 / g1.abs().max(g2.abs()).max(1.0)).min(0.02).min(s - s0);
            let mid = (s - 0.5 * h).exp();
            let wm = self.quasi_static_w(mid);
            let rpm = self.geometry.r_density_logderiv(mid);
            contraction += (2.0 * wm + rpm - 1.0) * h;
            weight += (2.0 * wm - rpm) * h;
            s -= h;
            if contraction >= DAMPING_BUDGET && weight >= DAMPING_BUDGET {
                return (s, self.quasi_static_w(s.exp()));
            }
        }
        let (_, w) = series;
        if !w.is_finite() || (w - self.frobenius_exp as f64).abs() > 0.5 {
            // series badly off at r0; the quasi-static value is the better seed
            return (s0, self.quasi_static_w(r0));
        }
        series
    }

    fn scale_out(&self, w_end: f64) -> f64 {
        self.geometry.a * w_end / (self.geometry.length_scale * self.geometry.domain_end)
    }
}

/// Which formulation produced a DtN value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtnMethod {
    Exact,
    Riccati,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtnSolution {
    pub value: f64,
    pub method: DtnMethod,
    /// Difference between the two certification runs, relative.
    pub agreement: f64,
}

fn riccati_end(prob: &RadialProblem, rtol: f64) -> Result<f64> {
    let (s_start, w_start) = prob.start();
    let s_end = prob.geometry.domain_end.ln();
    let opts = Options::new(rtol, [1e-200]);
    let out = ode::integrate(|s, y: &[f64; 1]| [prob.rhs(s, y[0])], s_start, [w_start], s_end, &opts, |_, _| {})?;
    Ok(out.y[0])
}

/// Integrate the linear form d/ds (u, v) = (v, r^2 (q + tau) u + (1 - r p) v)
/// with v = r u', starting from the series seed scaled by `seed_scale`.
fn linear_end(prob: &RadialProblem, rtol: f64, seed_scale: f64) -> Result<f64> {
    let end = prob.geometry.domain_end;
    let r0 = START_FRACTION * end;
    let w0 = prob.frobenius_w(r0);
    let seed = [seed_scale, seed_scale * w0];
    let opts = Options::new(rtol, [1e-300; 2]);
    let rhs = |s: f64, y: &[f64; 2]| {
        let r = s.exp();
        [y[1], prob.r2_total(r) * y[0] + (1.0 - prob.geometry.r_density_logderiv(r)) * y[1]]
    };
    let out = ode::integrate(rhs, r0.ln(), seed, end.ln(), &opts, |_, y| {
        let m = y[0].abs().max(y[1].abs());
        if m > 1e100 || m < 1e-100 {
            y[0] /= m;
            y[1] /= m;
        }
    })?;
    let (u, v) = (out.y[0], out.y[1]);
    if !(u > 0.0) {
        return Err(Error::numerical(format!("extension value u(end) = {u:e} is not positive")));
    }
    Ok(v / u)
}

fn certify(tol: f64, mut run: impl FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut rtol = (tol / 10.0).max(1e-14);
    let mut prev = run(rtol)?;
    for _ in 0..4 {
        rtol = (rtol / 32.0).max(1e-14);
        let next = run(rtol)?;
        let diff = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        if diff <= tol || (next - prev).abs() <= 1e-300 {
            return Ok((next, diff));
        }
        if rtol <= 1e-14 {
            return Err(Error::Certificate(format!(
                "DtN runs disagree by {diff:e} relative at the tightest tolerance"
            )));
        }
        prev = next;
    }
    Err(Error::Certificate(format!("DtN value did not settle to relative tolerance {tol:e}")))
}

/// DtN value a u'(end)/u(end) with method and certification data.
pub fn solve_dtn_detailed(prob: &RadialProblem, tol: f64) -> Result<DtnSolution> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    prob.validate()?;
    if prob.is_zero_mode() {
        return Ok(DtnSolution { value: 0.0, method: DtnMethod::Exact, agreement: 0.0 });
    }
    match certify(tol, |rt| riccati_end(prob, rt)) {
        Ok((w, agreement)) if w.is_finite() => {
            Ok(DtnSolution { value: prob.scale_out(w), method: DtnMethod::Riccati, agreement })
        }
        _ => {
            let (w, agreement) = certify(tol, |rt| linear_end(prob, rt, 1.0))?;
            Ok(DtnSolution { value: prob.scale_out(w), method: DtnMethod::Linear, agreement })
        }
    }
}

pub fn solve_dtn(prob: &RadialProblem, tol: f64) -> Result<f64> {
    Ok(solve_dtn_detailed(prob, tol)?.value)
}

/// DtN value from the linear formulation only, with a scaled series seed.
pub fn solve_dtn_linear(prob: &RadialProblem, tol: f64, seed_scale: f64) -> Result<f64> {
    prob.validate()?;
    if !(seed_scale > 0.0) {
        return Err(Error::invalid("seed scale must be positive"));
    }
    let (w, _) = certify(tol, |rt| linear_end(prob, rt, seed_scale))?;
    Ok(prob.scale_out(w))
}

/// Accumulates sum exp(e_i) g_i without overflow.
#[derive(Default)]
struct LogSum {
    max_e: f64,
    sum: f64,
    any: bool,
}

impl LogSum {
    fn add(&mut self, e: f64, g: f64) {
        if !self.any {
            self.max_e = e;
            self.any = true;
        }
        if e > self.max_e {
            self.sum *= (self.max_e - e).exp();
            self.max_e = e;
        }
        self.sum += g * (e - self.max_e).exp();
    }

    /// Total times exp(-shift).
    fn value_shifted(&self, shift: f64) -> f64 {
        if !self.any {
            return 0.0;
        }
        self.sum * (self.max_e - shift).exp()
    }
}

/// Relative mismatch of the energy identity
/// a u'(end) u(end) rho(end) = int_0^end [a(u'^2 + q u^2) + t nu u^2] rho dr,
/// with the volume integral cut at `r_stop`.
pub fn greens_residual_to(prob: &RadialProblem, tol: f64, r_stop: f64) -> Result<f64> {
    prob.validate()?;
    if prob.is_zero_mode() {
        return Ok(0.0);
    }
    let g = prob.geometry;
    let (s_start, w_start) = prob.start();
    let s_end = g.domain_end.ln();
    let s_stop = r_stop.min(g.domain_end).ln();
    let opts = Options::new((tol / 10.0).max(1e-14), [1e-200, tol / 10.0]);
    let rhs = |s: f64, y: &[f64; 2]| [prob.rhs(s, y[0]), y[0]];
    // exponent of u^2 rho / r in terms of s
    let expo = |s: f64, lnu: f64| 2.0 * lnu + g.ln_density(s.exp()) - s;
    let mut acc = LogSum::default();
    let mut step_err: Option<Error> = None;
    let out = ode::integrate(rhs, s_start, [w_start, 0.0], s_end, &opts, |st, _| {
        let lo = st.s0;
        let hi = st.s1().min(s_stop);
        if hi <= lo {
            return;
        }
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, wt) in GAUSS5 {
            let s = mid + half * x;
            let y = st.eval(s);
            let r = s.exp();
            let integrand = y[0] * y[0] + prob.r2_total(r);
            if !integrand.is_finite() && step_err.is_none() {
                step_err = Some(Error::numerical("non-finite quadrature value"));
            }
            acc.add(expo(s, y[1]), wt * half * integrand);
        }
    })?;
    if let Some(e) = step_err {
        return Err(e);
    }
    let boundary = out.y[0];
    let volume = acc.value_shifted(expo(s_end, out.y[1]));
    let scale = boundary.abs().max(volume.abs());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((boundary - volume).abs() / scale)
}

pub fn greens_residual(prob: &RadialProblem, tol: f64) -> Result<f64> {
    greens_residual_to(prob, tol, prob.geometry.domain_end)
}

/// Relative mismatch of the two-mode identity
/// [rho a (u1 u2' - u2 u1')]_end = int rho u1 u2 [(a q2 + t nu2) - (a q1 + t nu1)] dr
/// for problems sharing one geometry.
pub fn cross_greens_residual(p1: &RadialProblem, p2: &RadialProblem, tol: f64) -> Result<f64> {
    p1.validate()?;
    p2.validate()?;
    if p1.geometry != p2.geometry {
        return Err(Error::invalid("cross residual needs a shared radial geometry"));
    }
    let g = p1.geometry;
    let s_end = g.domain_end.ln();
    let s0 = (START_FRACTION * g.domain_end).ln();
    let (a1, w1) = p1.start();
    let (a2, w2) = p2.start();
    let s_start = a1.min(a2);
    let r_start = s_start.exp();
    let init = |p: &RadialProblem, own_start: f64, w_own: f64| {
        if own_start == s_start {
            w_own
        } else if s_start <= s0 {
            p.frobenius_w(r_start)
        } else {
            p.quasi_static_w(r_start)
        }
    };
    let y0 = [init(p1, a1, w1), 0.0, init(p2, a2, w2), 0.0];
    let rt = (tol / 10.0).max(1e-14);
    let opts = Options::new(rt, [1e-200, rt, 1e-200, rt]);
    let rhs = |s: f64, y: &[f64; 4]| [p1.rhs(s, y[0]), y[0], p2.rhs(s, y[2]), y[2]];
    let expo = |s: f64, l1: f64, l2: f64| l1 + l2 + g.ln_density(s.exp()) - s;
    let mut acc = LogSum::default();
    if s_start <= s0 {
        // [0, r_start] with the integrand's leading power law r^alpha; for a
        // one-dimensional collapsing factor this decays only like r
        let diff = |r: f64| p2.r2_total(r) - p1.r2_total(r);
        let d0 = diff(r_start);
        let d1 = diff(r_start * (-1e-3f64).exp());
        if d0 != 0.0 && d1 != 0.0 && d0.signum() == d1.signum() {
            let alpha = y0[0] + y0[2] + g.r_density_logderiv(r_start) - 1.0 + (d0.abs().ln() - d1.abs().ln()) / 1e-3;
            if alpha > 0.0 {
                acc.add(expo(s_start, 0.0, 0.0), d0 / alpha);
            }
        }
    }
    let out = ode::integrate(rhs, s_start, y0, s_end, &opts, |st, _| {
        let (mid, half) = (0.5 * (st.s0 + st.s1()), 0.5 * st.h);
        for (x, wt) in GAUSS5 {
            let s = mid + half * x;
            let y = st.eval(s);
            let r = s.exp();
            acc.add(expo(s, y[1], y[3]), wt * half * (p2.r2_total(r) - p1.r2_total(r)));
        }
    })?;
    let lhs = out.y[2] - out.y[0];
    let rhs_val = acc.value_shifted(expo(s_end, out.y[1], out.y[3]));
    let scale = lhs.abs().max(rhs_val.abs());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((lhs - rhs_val).abs() / scale)
}

/// Second-order finite-difference DtN on a uniform grid of `gridpoints`
/// intervals, with u(end) = 1 and a regularity closure at r = 0.
pub fn dtn_oracle_fd(prob: &RadialProblem, gridpoints: usize) -> Result<f64> {
    prob.validate()?;
    if gridpoints < 100 {
        return Err(Error::invalid(format!("finite differences need at least 100 grid intervals, got {gridpoints}")));
    }
    let g = prob.geometry;
    let n = gridpoints;
    let h = g.domain_end / n as f64;
    let regular_origin = prob.frobenius_exp == 0;
    // unknowns u_0..u_{n-1} (u_0 pinned to zero unless the mode is regular there)
    let first = if regular_origin { 0 } else { 1 };
    let size = n - first;
    let mut lower = vec![0.0; size];
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let mut rhs = vec![0.0; size];
    for row in 0..size {
        let i = row + first;
        if i == 0 {
            let d = g.collapse_dim() as f64;
            let q0 = prob.warped_mu * g.warp_inv_sq(0.0) + prob.tau();
            let c = 2.0 * (1.0 + d) / (h * h);
            diag[row] = -c - q0;
            upper[row] = c;
            continue;
        }
        let r = i as f64 * h;
        let p = g.density_logderiv(r);
        let q = prob.r2_total(r) / (r * r);
        lower[row] = 1.0 / (h * h) - p / (2.0 * h);
        diag[row] = -2.0 / (h * h) - q;
        upper[row] = 1.0 / (h * h) + p / (2.0 * h);
    }
    // u_n = 1 moves to the right-hand side
    rhs[size - 1] = -upper[size - 1];
    upper[size - 1] = 0.0;
    let u = thomas(&lower, &diag, &upper, &rhs)?;
    let at = |i: usize| if i < first { 0.0 } else { u[i - first] };
    let deriv = (3.0 - 4.0 * at(n - 1) + at(n - 2)) / (2.0 * h);
    Ok(g.a * deriv / g.length_scale)
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::numerical("singular finite-difference system"));
    }
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::numerical("singular finite-difference system"));
        }
        c[i] = upper[i] / denom;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Radial problem for a boundary mode of a family model.
pub fn build_radial_problem(model: &GeometryModel, mode: &BoundaryMode) -> Result<RadialProblem> {
    let factors = &model.boundary_factors;
    if mode.degrees.len() != factors.len() || mode.unit_lambdas.len() != factors.len() {
        return Err(Error::invalid(format!(
            "mode has {} components, model has {} boundary factors",
            mode.degrees.len(),
            factors.len()
        )));
    }
    let mut prob = RadialProblem {
        geometry: model.radial,
        collapse_mu: 0.0,
        warped_mu: 0.0,
        transverse: 0.0,
        frobenius_exp: 0,
    };
    for (i, f) in factors.iter().enumerate() {
        let mu = mode.unit_lambdas[i];
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::invalid(format!("mode eigenvalue {mu} on {} is not admissible", f.name)));
        }
        if let SpectrumSource::ClosedFormSphere { dim, .. } = f.spectrum.source {
            let expect = crate::families::sphere_eigenvalue(dim, mode.degrees[i]);
            if (expect - mu).abs() > 1e-9 * expect.max(1.0) {
                return Err(Error::invalid(format!(
                    "eigenvalue {mu} is not degree {} on {}",
                    mode.degrees[i], f.name
                )));
            }
        }
        match f.role {
            FactorRole::Collapsing => {
                prob.collapse_mu = mu;
                prob.frobenius_exp = mode.degrees[i];
            }
            FactorRole::Warped => prob.warped_mu = mu,
            FactorRole::Transverse => prob.transverse += model.radial.t * mu / (f.scale * f.scale),
        }
    }
    Ok(prob)
}
