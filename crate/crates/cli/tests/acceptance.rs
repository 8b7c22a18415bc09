//! Acceptance criteria, one printed PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the summary is always shown.
//! Exits nonzero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use sigmak_core::boundary::{self, boundary_invariants, reference_values};
use sigmak_core::dtn::{self, RadialProblem};
use sigmak_core::families::{
    self, build_model, einstein_defect, einstein_defect_of, product_dims, product_table, FactorSpectrum, FamilyKind,
    FamilySpec, FlatProfiles, GeometryModel,
};
use sigmak_core::jacobi::{mode_at, morse_index, scan, IndexOptions, ScanResult};
use sigmak_core::symalg::{self, newton, newton_mixed, sigma, sigma_mixed, DenseSym, IsoSpectrum};

// ---------------------------------------------------------------------------
// pinned tolerances and budgets
// ---------------------------------------------------------------------------

const C1_BUDGET: Duration = Duration::from_secs(1);
const C2_BUDGET: Duration = Duration::from_secs(30);
const C2_ORACLE_CASES: usize = 200;
const C2_ORACLE_MAX_DIM: usize = 6;
const C2_FLOAT_CASES: usize = 1000;
const C2_FLOAT_TOL: f64 = 1e-12;
const C3_BUDGET: Duration = Duration::from_secs(10);
const C3_SAMPLES: usize = 20;
const C3_MAX_ELL: u32 = 6;
const C3_SLOPE_TOL: f64 = 0.05;
const C3_EPS_RANGE: (f64, f64) = (1e-3, 1e-2);
const C4_BUDGET: Duration = Duration::from_secs(5);
const C4_DEFECT_TOL: f64 = 1e-8;
const C4_DEFECT_RANGE: (f64, f64) = (0.1, 10.0);
const C4_IDENTITY_TOL: f64 = 1e-12;
const C4_LIMIT_R: f64 = 30.0;
const C4_LIMIT_VALUE: f64 = 10.0 / 7.0;
const C4_LIMIT_TOL: f64 = 1e-3;
const C5_BUDGET: Duration = Duration::from_secs(60);
const C5_CHAIN_LEVELS: u64 = 25;
const C5_ZERO_TOL: f64 = 1e-12;
const C5_GREEN_TOL: f64 = 1e-7;
const C5_ORDER: f64 = 2.0;
const C5_ORDER_TOL: f64 = 0.3;
const C5_DECAY_RANGE: (f64, f64) = (5.0, 30.0);
const C5_DECAY_FACTOR: f64 = 10.0;
const C6_BUDGET: Duration = Duration::from_secs(300);
const C6_STEPS: usize = 200;
const C6_BRACKET_WIDTH: f64 = 1e-4;
const C6_CONSTANT_TOL: f64 = 1e-10;
const C6_MIN_JUMPS: usize = 2;
/// Thin flat circle as the Ricci-flat fiber of the warped family.
const C6_FLAT_FIBER_PERIOD: f64 = 1e-9;
/// Absolute degeneracy band and DtN tolerance for the warped scan, where
/// consecutive circle modes crowd below the default band at large R.
const C6_FLAT_TOL: f64 = 2e-11;
const C6_FLAT_DTN_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// harness
// ---------------------------------------------------------------------------

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, summary: String::new(), details: Vec::new() }
    }

    /// Record one sub-check.
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.details.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
        self.pass &= ok;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.details.push(format!("     {}", what.into()));
    }
}

fn run_criterion(id: &str, name: &str, f: fn(&mut Outcome)) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    let result = panic::catch_unwind(AssertUnwindSafe(|| f(&mut out)));
    if let Err(e) = result {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        out.check(false, format!("panicked: {msg}"));
    }
    let failed = out.details.iter().filter(|d| d.starts_with("FAIL")).count();
    out.summary = format!("{} checks, {failed} failed", out.details.iter().filter(|d| !d.starts_with("    ")).count());
    println!(
        "[{}] {id} {name} ({}; {:.2}s)",
        if out.pass { "PASS" } else { "FAIL" },
        out.summary,
        start.elapsed().as_secs_f64()
    );
    for d in &out.details {
        println!("       {d}");
    }
    out.pass
}

fn main() {
    panic::set_hook(Box::new(|_| {}));
    let criteria: [(&str, &str, fn(&mut Outcome)); 7] = [
        ("C1", "Einstein-product table in exact arithmetic", c1_product_table),
        ("C2", "symmetric-function oracle and identities", c2_oracle),
        ("C3", "boundary invariants against closed forms", c3_boundary),
        ("C4", "warped-family geometry", c4_flat_geometry),
        ("C5", "Dirichlet-to-Neumann solver", c5_dtn),
        ("C6", "index pipeline and jump scans", c6_index),
        ("C7", "CLI determinism", c7_determinism),
    ];
    // ACCEPTANCE_ONLY=C5,C6 restricts the run
    let only = std::env::var("ACCEPTANCE_ONLY").ok();
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        if only.as_deref().is_some_and(|o| !o.split(',').any(|x| x.trim() == id)) {
            continue;
        }
        if !run_criterion(id, name, f) {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {}", failed.join(", "));
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// C1
// ---------------------------------------------------------------------------

fn c1_product_table(out: &mut Outcome) {
    let start = Instant::now();
    let mut compared = 0;
    for case in 1..=3u32 {
        for ell in 1..=6u32 {
            let (pos, neg) = product_dims(case, ell).unwrap();
            let table = product_table(case, ell).unwrap();
            let b = IsoSpectrum::new(vec![(q(1, 2), pos), (q(-1, 2), neg)]);
            for (j, want) in table.sigmas.iter().enumerate() {
                let got = sigma(j + 1, &b);
                if got != *want {
                    out.check(false, format!("case {case} ell {ell}: sigma_{} = {got}, table {want}", j + 1));
                }
                compared += 1;
            }
            let t = newton(table.k - 1, &b);
            if t != table.newton {
                out.check(false, format!("case {case} ell {ell}: T_{} = {:?}", table.k - 1, t.values()));
            }
            compared += 2;
        }
    }
    out.check(out.pass, format!("{compared} table entries equal exactly (cases 1-3, ell 1-6)"));
    let took = start.elapsed();
    out.check(took < C1_BUDGET, format!("runtime {:.3}s < {:?}", took.as_secs_f64(), C1_BUDGET));
}

// ---------------------------------------------------------------------------
// C2
// ---------------------------------------------------------------------------

fn c2_oracle(out: &mut Outcome) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut mismatches = 0;
    for case in 0..C2_ORACLE_CASES {
        let dim = 1 + case % C2_ORACLE_MAX_DIM;
        let mults = random_blocks(&mut rng, dim);
        let b = rational_spectrum(&mut rng, &mults);
        let c = rational_spectrum(&mut rng, &mults);
        let k = rng.gen_range(1..=dim);
        let l = rng.gen_range(0..=k);
        // dense conjugation up to d = 5; d = 6 stays diagonal to bound the factorial cost
        let qm = if dim < C2_ORACLE_MAX_DIM { rational_orthogonal(&mut rng, dim) } else { identity(dim) };
        let (db, dc) = (conjugated(&qm, &b), conjugated(&qm, &c));
        if symalg::sigma_oracle(k, &db, &dc, l).unwrap() != sigma_mixed(k, l, &b, &c).unwrap() {
            mismatches += 1;
        }
        if k < dim {
            let fast = newton_mixed(k, l, &b, &c).unwrap();
            let diag = IsoSpectrum::new(fast.blocks.iter().map(|x| (x.value.clone(), x.mult)).collect());
            let expect = dense_entries(&conjugated(&qm, &diag));
            let got = if dim <= 4 {
                dense_entries(&symalg::newton_oracle(k, &db, &dc, l).unwrap())
            } else {
                let plain =
                    symalg::newton_oracle(k, &DenseSym::from_spectrum(&b), &DenseSym::from_spectrum(&c), l).unwrap();
                conjugate_dense(&qm, &dense_entries(&plain))
            };
            if got != expect {
                mismatches += 1;
            }
        }
    }
    out.check(mismatches == 0, format!("{C2_ORACLE_CASES} rational instances (d <= {C2_ORACLE_MAX_DIM}): {mismatches} oracle mismatches"));

    let mut worst_newton = 0.0f64;
    let mut worst_trace = 0.0f64;
    for _ in 0..C2_FLOAT_CASES {
        let dim = rng.gen_range(1..=10);
        let mults = random_blocks(&mut rng, dim);
        let b = IsoSpectrum::new(mults.iter().map(|&m| (rng.gen_range(-2.0..2.0), m)).collect());
        let p = |i: usize| -> f64 { b.blocks.iter().map(|x| x.mult as f64 * f64::powi(x.value, i as i32)).sum() };
        for k in 1..=dim {
            let terms: Vec<f64> =
                (1..=k).map(|i| if i % 2 == 1 { 1.0 } else { -1.0 } * sigma(k - i, &b) * p(i)).collect();
            let scale = terms.iter().map(|t| t.abs()).sum::<f64>().max(1.0);
            let err = (k as f64 * sigma(k, &b) - terms.iter().sum::<f64>()).abs() / scale;
            worst_newton = worst_newton.max(err);
        }
        for k in 0..dim {
            let t = newton(k, &b);
            let tr_b: f64 = t.blocks.iter().zip(&b.blocks).map(|(x, y)| x.mult as f64 * x.value * y.value).sum();
            let scale = t.blocks.iter().map(|x| x.mult as f64 * x.value.abs() * 2.0).sum::<f64>().max(1.0);
            let e1 = (t.trace() - (dim - k) as f64 * sigma(k, &b)).abs() / scale;
            let e2 = (tr_b - (k + 1) as f64 * sigma(k + 1, &b)).abs() / scale;
            worst_trace = worst_trace.max(e1).max(e2);
        }
    }
    out.check(worst_newton <= C2_FLOAT_TOL, format!("Newton identities, {C2_FLOAT_CASES} float instances: worst scaled error {worst_newton:e}"));
    out.check(worst_trace <= C2_FLOAT_TOL, format!("trace identities, {C2_FLOAT_CASES} float instances: worst scaled error {worst_trace:e}"));
    let took = start.elapsed();
    out.check(took < C2_BUDGET, format!("runtime {:.2}s < {:?}", took.as_secs_f64(), C2_BUDGET));
}

// ---------------------------------------------------------------------------
// C3
// ---------------------------------------------------------------------------

fn curvature_samples(kind: FamilyKind) -> Vec<BigRational> {
    (0..C3_SAMPLES as i64)
        .map(|i| match kind {
            // cot eps ranges over (0, inf)
            FamilyKind::SphereHyperbolic => q(i + 1, 3),
            // coth eps > 1
            FamilyKind::SphereSphere => q(i + 6, 5),
            // tanh(mR/2) in (0, 1)
            FamilyKind::FlatWarped => q(i + 1, C3_SAMPLES as i64 + 2),
        })
        .collect()
}

fn configurations(kind: FamilyKind) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for (k, case) in [(2u32, 1u32), (3, 2), (3, 3)] {
        for ell in 1..=C3_MAX_ELL {
            if families::dims(kind, k, ell, case).is_ok() {
                out.push((k, ell, case));
            }
        }
    }
    out
}

fn c3_boundary(out: &mut Outcome) {
    let start = Instant::now();
    for kind in [FamilyKind::SphereHyperbolic, FamilyKind::SphereSphere, FamilyKind::FlatWarped] {
        let (mut total, mut equal) = (0usize, 0usize);
        let mut first_bad = None;
        for (k, ell, case) in configurations(kind) {
            let (n, m) = families::dims(kind, k, ell, case).unwrap();
            for curv in curvature_samples(kind) {
                let (p, a) = families::boundary_blocks::<BigRational>(kind, n, m, &curv);
                let got = boundary_invariants(k as usize, &p, &a).unwrap();
                let want = reference_values(kind, k as usize, n, m, &curv).unwrap();
                total += 1;
                if got == want {
                    equal += 1;
                } else if first_bad.is_none() {
                    first_bad = Some(format!(
                        "k={k} ell={ell} case={case} curv={curv}: H direct {} vs closed form {}",
                        symalg::Scalar::to_f64(&got.h_k),
                        symalg::Scalar::to_f64(&want.h_k)
                    ));
                }
            }
        }
        out.check(equal == total && total > 0, format!("{}: {equal}/{total} exact matches of H_k and S_(k-1)", kind.id()));
        if let Some(bad) = first_bad {
            out.note(format!("first mismatch: {bad}"));
        }
    }

    let (lo, hi) = C3_EPS_RANGE;
    let eps: Vec<f64> = (0..20).map(|i| lo * (hi / lo).powf(i as f64 / 19.0)).collect();
    let mut worst = (0.0f64, String::new());
    let mut fits = 0;
    for kind in [FamilyKind::SphereHyperbolic, FamilyKind::SphereSphere] {
        for (k, ell, case) in configurations(kind) {
            let spec = FamilySpec::new(kind, k, ell, case, 0.5);
            let h: Vec<f64> = eps.iter().map(|&e| boundary::family_invariants(&spec.with_param(e)).unwrap().h_k).collect();
            if h.iter().any(|v| *v <= 0.0) {
                continue;
            }
            let x: Vec<f64> = eps.iter().map(|&e| families::kappa(&spec.with_param(e)).unwrap().ln()).collect();
            let y: Vec<f64> = h.iter().map(|v| v.ln()).collect();
            let dev = (fit_slope(&x, &y) - (2 * k - 1) as f64).abs();
            fits += 1;
            if dev > worst.0 {
                worst = (dev, format!("{} k={k} ell={ell} case={case}", kind.id()));
            }
        }
    }
    out.check(
        worst.0 <= C3_SLOPE_TOL && fits > 0,
        format!("log-log slope of H_k vs kappa on eps in [{lo}, {hi}]: {fits} fits, worst |slope - (2k-1)| = {:.2e} ({})", worst.0, worst.1),
    );
    let took = start.elapsed();
    out.check(took < C3_BUDGET, format!("runtime {:.2}s < {:?}", took.as_secs_f64(), C3_BUDGET));
}

// ---------------------------------------------------------------------------
// C4
// ---------------------------------------------------------------------------

fn c4_flat_geometry(out: &mut Outcome) {
    let start = Instant::now();
    let (lo, hi) = C4_DEFECT_RANGE;
    let grid: Vec<f64> = (0..400).map(|i| lo + (hi - lo) * i as f64 / 399.0).collect();
    for m in [2usize, 5, 9] {
        let d = einstein_defect(m, &grid).unwrap();
        out.check(d < C4_DEFECT_TOL, format!("Einstein defect m={m} on [{lo}, {hi}]: {d:e}"));
    }
    // the defect detects a perturbed psi value
    let prof = FlatProfiles::new(5).unwrap();
    let mut v = prof.values(2.0);
    v.psi *= 1.01;
    let perturbed = einstein_defect_of(5, &v);
    out.check(perturbed > 1e-4, format!("perturbed psi (x1.01) raises the defect to {perturbed:e}"));

    let mut worst = 0.0f64;
    for m in [2usize, 3, 5, 9] {
        for i in 1..=300 {
            let x = 0.05 * i as f64;
            let t = x.tanh();
            let csch2 = 1.0 / (2.0 * x).sinh();
            let a = t + m as f64 * csch2;
            let b = 1.0 / t + (m as f64 - 2.0) * csch2;
            // boundary_blocks uses t = tanh(mR/2), so R = 2x/m
            let (_, blocks) = families::boundary_blocks::<f64>(FamilyKind::FlatWarped, 4, m, &t);
            let c = blocks.blocks[1].value;
            let scale = a.abs().max(1.0);
            worst = worst.max((a - b).abs() / scale).max((c - b).abs() / scale);
        }
    }
    out.check(worst <= C4_IDENTITY_TOL, format!("tanh x + m csch 2x = coth x + (m-2) csch 2x = circle block of A: worst {worst:e}"));

    let spec = FamilySpec::k2(FamilyKind::FlatWarped, 2, C4_LIMIT_R);
    let h = boundary::family_invariants(&spec).unwrap().h_k;
    out.check(
        (h - C4_LIMIT_VALUE).abs() <= C4_LIMIT_TOL,
        format!("H_2(R = {C4_LIMIT_R}) for ell = 2 is {h:.10}; expected {C4_LIMIT_VALUE:.10} within {C4_LIMIT_TOL:e}"),
    );
    if (h - C4_LIMIT_VALUE).abs() > C4_LIMIT_TOL {
        let reference = boundary::reference_for(&spec).unwrap().h_k;
        out.note(format!("closed-form assembly gives {reference:.10}; direct evaluation gives {h:.10} (ratio {:.6})", reference / h));
    }
    let took = start.elapsed();
    out.check(took < C4_BUDGET, format!("runtime {:.2}s < {:?}", took.as_secs_f64(), C4_BUDGET));
}

// ---------------------------------------------------------------------------
// C5
// ---------------------------------------------------------------------------

fn c5_models() -> Vec<GeometryModel> {
    [
        FamilySpec::k2(FamilyKind::SphereSphere, 3, 0.5),
        FamilySpec::k2(FamilyKind::SphereSphere, 4, 0.1),
        FamilySpec::k2(FamilyKind::SphereHyperbolic, 2, 0.4),
        FamilySpec::k2(FamilyKind::SphereHyperbolic, 3, 1.2),
        FamilySpec::k2(FamilyKind::FlatWarped, 2, 2.0),
        FamilySpec::k2(FamilyKind::FlatWarped, 3, 5.0),
        FamilySpec::new(FamilyKind::SphereSphere, 3, 3, 2, 0.7),
    ]
    .iter()
    .map(|s| build_model(s).unwrap())
    .collect()
}

fn problem(model: &GeometryModel, degrees: &[u64]) -> RadialProblem {
    dtn::build_radial_problem(model, &mode_at(model, degrees).unwrap()).unwrap()
}

fn c5_dtn(out: &mut Outcome) {
    let start = Instant::now();
    let models = c5_models();

    let mut worst_zero = 0.0f64;
    for model in &models {
        let p = problem(model, &vec![0; model.boundary_factors.len()]);
        worst_zero = worst_zero.max(dtn::solve_dtn(&p, 1e-10).unwrap().abs());
    }
    out.check(worst_zero <= C5_ZERO_TOL, format!("constant-mode DtN, {} models: max |value| {worst_zero:e}", models.len()));

    let (mut chains, mut violations) = (0, Vec::new());
    for model in &models {
        let nf = model.boundary_factors.len();
        for f in 0..nf {
            for base in [0u64, 1] {
                let mut prev = -1.0f64;
                for j in 0..C5_CHAIN_LEVELS {
                    let mut deg = vec![base; nf];
                    deg[f] = j;
                    let v = dtn::solve_dtn(&problem(model, &deg), 1e-10).unwrap();
                    if v < 0.0 || v < prev {
                        violations.push(format!("{} {deg:?}: {v} after {prev}", model.spec.kind.id()));
                    }
                    prev = v;
                }
                chains += 1;
            }
        }
    }
    out.check(violations.is_empty(), format!("nonnegative and nondecreasing along {chains} eigenvalue chains of {C5_CHAIN_LEVELS} levels"));
    for v in violations.iter().take(3) {
        out.note(v.clone());
    }

    let (mut worst_green, mut worst_cross, mut count) = (0.0f64, 0.0f64, 0);
    for model in &models {
        let nf = model.boundary_factors.len();
        let mut modes = Vec::new();
        for f in 0..nf {
            for j in [1u64, 2, 7] {
                let mut deg = vec![0u64; nf];
                deg[f] = j;
                modes.push(deg);
            }
        }
        modes.push(vec![1; nf]);
        for a in &modes {
            worst_green = worst_green.max(dtn::greens_residual(&problem(model, a), 1e-10).unwrap());
            count += 1;
            for b in &modes {
                if a < b {
                    let r = dtn::cross_greens_residual(&problem(model, a), &problem(model, b), 1e-10).unwrap();
                    worst_cross = worst_cross.max(r);
                }
            }
        }
    }
    out.check(worst_green < C5_GREEN_TOL, format!("Green's identity, {count} modes: worst residual {worst_green:e}"));
    out.check(worst_cross < C5_GREEN_TOL, format!("cross-mode Green's identity: worst residual {worst_cross:e}"));

    let grids = [200usize, 400, 800, 1600];
    let mut slopes = Vec::new();
    for model in models.iter().filter(|m| m.radial.domain_end <= 2.5) {
        let nf = model.boundary_factors.len();
        let mut collapse_two = vec![0u64; nf];
        collapse_two[model.collapsing_factor()] = 2;
        for deg in [vec![1u64; nf], collapse_two] {
            let p = problem(model, &deg);
            let exact = dtn::solve_dtn(&p, 1e-12).unwrap();
            let x: Vec<f64> = grids.iter().map(|&n| (1.0 / n as f64).ln()).collect();
            let y: Vec<f64> =
                grids.iter().map(|&n| (dtn::dtn_oracle_fd(&p, n).unwrap() - exact).abs().ln()).collect();
            slopes.push(fit_slope(&x, &y));
        }
    }
    let worst = slopes.iter().map(|s| (s - C5_ORDER).abs()).fold(0.0, f64::max);
    out.check(
        worst <= C5_ORDER_TOL && !slopes.is_empty(),
        format!("finite-difference oracle, {} problems: observed orders {:.2}..{:.2}", slopes.len(),
            slopes.iter().cloned().fold(f64::INFINITY, f64::min), slopes.iter().cloned().fold(0.0, f64::max)),
    );

    let (lo, hi) = C5_DECAY_RANGE;
    let radii: Vec<f64> = (0..=50).map(|i| lo + (hi - lo) * i as f64 / 50.0).collect();
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let model = build_model(&FamilySpec::k2(FamilyKind::FlatWarped, 2, r)).unwrap();
            dtn::solve_dtn(&problem(&model, &[0, 1, 0]), 1e-10).unwrap() / model.radial.a
        })
        .collect();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let ratio = values[0] / values[values.len() - 1];
    out.check(decreasing, format!("warped circle mode U'/U strictly decreasing on R in [{lo}, {hi}] ({} radii)", radii.len()));
    out.check(ratio >= C5_DECAY_FACTOR, format!("U'/U(R={lo}) / U'/U(R={hi}) = {ratio:.3e} >= {C5_DECAY_FACTOR}"));

    let took = start.elapsed();
    out.check(took < C5_BUDGET, format!("runtime {:.2}s < {:?}", took.as_secs_f64(), C5_BUDGET));
}

// ---------------------------------------------------------------------------
// C6
// ---------------------------------------------------------------------------

struct ScanCase {
    label: &'static str,
    spec: FamilySpec,
    range: (f64, f64),
    opts: IndexOptions,
    /// Index should not increase with the parameter (true for eps families).
    nonincreasing: bool,
}

fn scan_cases() -> Vec<ScanCase> {
    vec![
        ScanCase {
            label: "sphere-sphere k=2 ell=3",
            spec: FamilySpec::k2(FamilyKind::SphereSphere, 3, 0.5),
            range: (0.05, 1.5),
            opts: IndexOptions::default(),
            nonincreasing: true,
        },
        ScanCase {
            label: "sphere-hyperbolic k=2 ell=2 (synthetic Weyl spectrum)",
            spec: FamilySpec::k2(FamilyKind::SphereHyperbolic, 2, 0.5),
            range: (0.05, 1.5),
            opts: IndexOptions::default(),
            nonincreasing: true,
        },
        ScanCase {
            label: "flat-warped ell=2 (thin torus fiber)",
            spec: FamilySpec::k2(FamilyKind::FlatWarped, 2, 2.0)
                .with_factor_spectrum(FactorSpectrum::flat_torus(vec![C6_FLAT_FIBER_PERIOD]).unwrap()),
            range: (2.0, 20.0),
            opts: IndexOptions { tol: Some(C6_FLAT_TOL), margin: 1e-4, dtn_tol: C6_FLAT_DTN_TOL },
            nonincreasing: false,
        },
    ]
}

fn check_scan(out: &mut Outcome, case: &ScanCase, result: &ScanResult) {
    let s = &result.samples;
    let ordered = s.windows(2).all(|w| if case.nonincreasing { w[1].index <= w[0].index } else { w[1].index >= w[0].index });
    let direction = if case.nonincreasing { "nonincreasing" } else { "nondecreasing" };
    out.check(ordered, format!("{}: index {direction} across {} samples ({} -> {})", case.label, s.len(), s[0].index, s[s.len() - 1].index));
    if !ordered {
        let bad = s.windows(2).find(|w| if case.nonincreasing { w[1].index > w[0].index } else { w[1].index < w[0].index }).unwrap();
        out.note(format!("first reversal between param {:.6} (index {}) and {:.6} (index {})", bad[0].param, bad[0].index, bad[1].param, bad[1].index));
        let prefix_end = s.windows(2).position(|w| w[1].index > w[0].index).map(|i| s[i].param).unwrap_or(case.range.1);
        out.note(format!("monotone on [{:.3}, {prefix_end:.4}]; index there falls to {}", case.range.0,
            s.iter().filter(|x| x.param <= prefix_end).map(|x| x.index).min().unwrap_or(0)));
        let tail: Vec<String> = s.iter().step_by(20).map(|x| format!("{:.3}:{}", x.param, x.index)).collect();
        out.note(format!("samples (param:index) {}", tail.join(" ")));
    }
    let jumps = result.jump_brackets.len();
    out.check(jumps >= C6_MIN_JUMPS, format!("{}: {jumps} index jumps (need >= {C6_MIN_JUMPS})", case.label));
    let narrow = result.jump_brackets.iter().filter(|b| b.resolved && b.width() < C6_BRACKET_WIDTH).count();
    out.check(narrow == jumps, format!("{}: {narrow}/{jumps} brackets resolved with width < {C6_BRACKET_WIDTH:e}", case.label));
    // endpoints recomputed independently
    let mut bad_ends = 0;
    for b in &result.jump_brackets {
        for (p, idx) in [(b.param_lo, b.index_lo), (b.param_hi, b.index_hi)] {
            let r = morse_index(&case.spec.with_param(p), &case.opts).unwrap();
            if r.is_degenerate() || r.index != idx {
                bad_ends += 1;
            }
        }
    }
    out.check(bad_ends == 0, format!("{}: {bad_ends} bracket endpoints degenerate or inconsistent on recomputation", case.label));
}

fn check_certificates(out: &mut Outcome, case: &ScanCase, result: &ScanResult) {
    let (mut bad_bound, mut bad_margin, mut bad_const, mut min_bound) = (0, 0, 0, f64::INFINITY);
    for sample in &result.samples {
        let spec = case.spec.with_param(sample.param);
        let r = morse_index(&spec, &case.opts).unwrap();
        let doubled = morse_index(&spec, &IndexOptions { margin: 2.0 * case.opts.margin, ..case.opts }).unwrap();
        min_bound = min_bound.min(r.truncation_bound).min(doubled.truncation_bound);
        if !(r.truncation_bound > 0.0 && doubled.truncation_bound > 0.0) {
            bad_bound += 1;
        }
        if r.index != doubled.index || r.index != sample.index {
            bad_margin += 1;
        }
        let expect = -(2.0 * spec.k as f64 - 1.0) * r.h_k;
        let constant = r.entries.iter().find(|e| e.mode.is_constant()).map(|e| e.lambda_df);
        let excluded = r.index
            == r.entries.iter().filter(|e| !e.mode.is_constant() && e.lambda_df < -r.tol).map(|e| e.mode.mult).sum::<u128>()
                + r.runs.iter().map(|x| x.index_contribution).sum::<u128>();
        if (r.constant_lambda - expect).abs() > C6_CONSTANT_TOL
            || constant.map_or(true, |c| (c - expect).abs() > C6_CONSTANT_TOL)
            || !excluded
        {
            bad_const += 1;
        }
    }
    let n = result.samples.len();
    out.check(bad_bound == 0, format!("{}: truncation certificate positive in {}/{n} runs (min {min_bound:.3e})", case.label, n - bad_bound));
    out.check(bad_margin == 0, format!("{}: index unchanged by margin doubling in {}/{n} runs", case.label, n - bad_margin));
    out.check(bad_const == 0, format!("{}: constant mode = -(2k-1)H_k within {C6_CONSTANT_TOL:e} and excluded in {}/{n} runs", case.label, n - bad_const));
}

fn c6_index(out: &mut Outcome) {
    let start = Instant::now();
    for case in scan_cases() {
        let t = Instant::now();
        let result = scan(&case.spec, case.range.0, case.range.1, C6_STEPS, &case.opts).unwrap();
        out.note(format!("{}: scan of [{}, {}] with {C6_STEPS} steps took {:.1}s", case.label, case.range.0, case.range.1, t.elapsed().as_secs_f64()));
        check_scan(out, &case, &result);
        check_certificates(out, &case, &result);
    }
    let took = start.elapsed();
    out.check(took < C6_BUDGET, format!("runtime {:.1}s < {:?}", took.as_secs_f64(), C6_BUDGET));
}

// ---------------------------------------------------------------------------
// C7
// ---------------------------------------------------------------------------

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn c7_determinism(out: &mut Outcome) {
    let dir = tempfile::tempdir().unwrap();
    let mut spectrum = String::from("[{\"lambda\": 0, \"mult\": 1}");
    for i in 1..=500 {
        spectrum.push_str(&format!(",\n {{\"lambda\": {}, \"mult\": {}}}", 0.37 * i as f64, 1 + i % 3));
    }
    spectrum.push_str("]\n");
    write(dir.path(), "hyperbolic.json", &spectrum);
    let configs = [
        write(dir.path(), "ss.json", r#"{"schema_version":1,"family":{"kind":"sphere-sphere","ell":3,"param":0.3},
            "scan":{"param_lo":0.2,"param_hi":0.4,"steps":9},"dtn":{"degrees":[2,3]}}"#),
        write(dir.path(), "sh.json", r#"{"schema_version":1,"family":{"kind":"sphere-hyperbolic","ell":2,"param":0.4},
            "spectrum_file":"hyperbolic.json","scan":{"param_lo":0.3,"param_hi":0.6,"steps":7},"dtn":{"degrees":[1,4]}}"#),
        write(dir.path(), "fw.json", r#"{"schema_version":1,"family":{"kind":"flat-warped","ell":2,"param":3.0},
            "scan":{"param_lo":2.0,"param_hi":2.4,"steps":2},"dtn":{"degrees":[1,2,1]}}"#),
    ];
    let (mut runs, mut identical, mut nonempty) = (0, 0, 0);
    for cfg in &configs {
        for cmd in ["verify", "index", "scan", "dtn"] {
            for fmt in ["json", "csv"] {
                let go = || Command::new(env!("CARGO_BIN_EXE_sigmak")).args([cmd, "--config", cfg, "--format", fmt]).output().unwrap();
                let (a, b) = (go(), go());
                runs += 1;
                if a.stdout == b.stdout && a.status.code() == b.status.code() {
                    identical += 1;
                }
                if !a.stdout.is_empty() {
                    nonempty += 1;
                }
            }
        }
    }
    out.check(identical == runs, format!("{identical}/{runs} command/format/config combinations byte-identical across two runs"));
    out.check(nonempty == runs, format!("{nonempty}/{runs} runs produced output"));
}
