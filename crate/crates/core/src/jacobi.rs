//! Mode-by-mode Jacobi operator, Morse index with a truncation certificate,
//! and parameter scans for index jumps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtn::{self, DtnMethod};
use crate::error::{Error, Result};
use crate::families::{self, build_model, FactorRole, FamilyKind, FamilySpec, GeometryModel, SpectrumSource};
use crate::symalg::IsoSpectrum;

/// Collapsing-degree chains longer than this are summarized by bisection.
pub const CHAIN_LIMIT: u64 = 64;
/// Smallest admissible enumeration margin.
pub const MIN_MARGIN: f64 = 1e-6;
/// Relative degeneracy band: |Lambda| <= this * (2k-1) H_k.
pub const DEFAULT_TOL_REL: f64 = 1e-8;
/// Scan brackets are refined below this width.
pub const BRACKET_WIDTH: f64 = 1e-4;
/// Degenerate endpoints are nudged until the bracket is this narrow.
pub const NUDGE_WIDTH: f64 = 1e-6;

/// A product of factor eigenfunctions on the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMode {
    /// Level index per factor (harmonic degree on spheres).
    pub degrees: Vec<u64>,
    /// Eigenvalues in the unit metric of each factor.
    pub unit_lambdas: Vec<f64>,
    /// Eigenvalues in the induced boundary metric.
    pub lambdas: Vec<f64>,
    pub mult: u128,
    pub frobenius_exp: u64,
}

impl BoundaryMode {
    pub fn is_constant(&self) -> bool {
        self.lambdas.iter().all(|&l| l == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub mode: BoundaryMode,
    pub dtn: f64,
    pub lambda_df: f64,
    pub degenerate: bool,
}

/// Modes j = 1..=j_last on the collapsing factor with every other factor fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeChain {
    /// Mode at collapsing degree 0; the other factors stay fixed along the chain.
    pub base: BoundaryMode,
    pub factor: usize,
    pub j_last: u64,
}

/// Result of evaluating a compressed chain; Lambda is increasing in the degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeRun {
    pub base_degrees: Vec<u64>,
    pub factor: usize,
    pub j_last: u64,
    /// Largest degree with Lambda < -tol (0 when none).
    pub negative_through: u64,
    /// Smallest degree with Lambda > tol, if inside the chain.
    pub positive_from: Option<u64>,
    pub index_contribution: u128,
    pub degenerate_count: u128,
    /// Every mode evaluated by the bisection, by degree.
    pub probes: Vec<ModeEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeEnumeration {
    pub modes: Vec<BoundaryMode>,
    pub chains: Vec<ModeChain>,
    /// (2k-1) H_k + margin.
    pub cutoff: f64,
    /// min over the first omitted modes of s.lambda - (2k-1) H_k.
    pub truncation_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Degeneracy band; `None` selects 1e-8 (2k-1) H_k.
    pub tol: Option<f64>,
    pub margin: f64,
    pub dtn_tol: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { tol: None, margin: 1e-4, dtn_tol: dtn::DEFAULT_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiReport {
    pub family: FamilyKind,
    pub k: u32,
    pub ell: u32,
    pub case_index: u32,
    pub param: f64,
    pub spectrum_source: String,
    pub h_k: f64,
    pub s_blocks: IsoSpectrum<f64>,
    pub tol: f64,
    pub margin: f64,
    pub dtn_tol: f64,
    /// Lambda of the constant mode, -(2k-1) H_k.
    pub constant_lambda: f64,
    pub entries: Vec<ModeEntry>,
    pub runs: Vec<ModeRun>,
    pub index: u128,
    /// Smallest |Lambda| over evaluated nonconstant modes.
    pub min_abs_nonconst: Option<f64>,
    pub degenerate_modes: u128,
    pub truncation_bound: f64,
}

impl JacobiReport {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_modes > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub param: f64,
    pub index: u128,
    pub min_abs_nonconst: Option<f64>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpBracket {
    pub param_lo: f64,
    pub param_hi: f64,
    pub index_lo: u128,
    pub index_hi: u128,
    /// False when no nondegenerate endpoints were found above the nudge width.
    pub resolved: bool,
}

impl JumpBracket {
    pub fn width(&self) -> f64 {
        self.param_hi - self.param_lo
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub family: FamilyKind,
    pub k: u32,
    pub ell: u32,
    pub case_index: u32,
    pub spectrum_source: String,
    pub samples: Vec<ScanSample>,
    pub jump_brackets: Vec<JumpBracket>,
}

fn check_positive_h(model: &GeometryModel) -> Result<()> {
    if !(model.h_k > 0.0) {
        return Err(Error::NonPositiveH { k: model.spec.k, value: model.h_k });
    }
    Ok(())
}

fn jacobi_shift(model: &GeometryModel) -> f64 {
    (2.0 * model.spec.k as f64 - 1.0) * model.h_k
}

/// Largest j with s * j(j+d-1) / rho^2 <= budget.
fn sphere_degree_cap(dim: usize, rho: f64, s: f64, budget: f64) -> u64 {
    let x = budget * rho * rho / s;
    let b = dim as f64 - 1.0;
    let mut j = ((-b + (b * b + 4.0 * x).sqrt()) / 2.0).max(0.0).floor() as u64;
    let fits = |j: u64| s * families::sphere_eigenvalue(dim, j) / (rho * rho) <= budget;
    while j > 0 && !fits(j) {
        j -= 1;
    }
    while fits(j + 1) {
        j += 1;
    }
    j
}

struct Partial {
    degrees: Vec<u64>,
    unit: Vec<f64>,
    phys: Vec<f64>,
    mult: u128,
    cost: f64,
}

fn mode_from(model: &GeometryModel, order: &[usize], p: &Partial) -> BoundaryMode {
    let nf = model.boundary_factors.len();
    let mut mode = BoundaryMode {
        degrees: vec![0; nf],
        unit_lambdas: vec![0.0; nf],
        lambdas: vec![0.0; nf],
        mult: p.mult,
        frobenius_exp: 0,
    };
    for (slot, &f) in order.iter().enumerate() {
        mode.degrees[f] = p.degrees[slot];
        mode.unit_lambdas[f] = p.unit[slot];
        mode.lambdas[f] = p.phys[slot];
        if model.boundary_factors[f].role == FactorRole::Collapsing {
            mode.frobenius_exp = p.degrees[slot];
        }
    }
    mode
}

/// All product modes with s.lambda <= (2k-1) H_k + margin.
pub fn enumerate_model_modes(model: &GeometryModel, margin: f64) -> Result<ModeEnumeration> {
    if !(margin >= MIN_MARGIN) {
        return Err(Error::invalid(format!("margin must be at least {MIN_MARGIN:e}, got {margin}")));
    }
    check_positive_h(model)?;
    let s = model.s_blocks.values();
    if let Some(bad) = s.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Certificate(format!(
            "S block {bad} has value {} <= 0; omitted modes cannot be bounded",
            s[bad]
        )));
    }
    let shift = jacobi_shift(model);
    let cutoff = shift + margin;
    let collapse = model.collapsing_factor();
    // collapsing factor last so its degree can form a chain
    let mut order: Vec<usize> = (0..model.boundary_factors.len()).filter(|&i| i != collapse).collect();
    order.push(collapse);

    let mut modes = Vec::new();
    let mut chains = Vec::new();
    let mut frontier = f64::INFINITY;
    let mut stack = vec![Partial { degrees: vec![], unit: vec![], phys: vec![], mult: 1, cost: 0.0 }];
    while let Some(p) = stack.pop() {
        let slot = p.degrees.len();
        let f = order[slot];
        let factor = &model.boundary_factors[f];
        let rho2 = factor.scale * factor.scale;
        let budget = cutoff - p.cost;
        let extend = |j: u64, unit: f64, mult: u128| -> Result<Partial> {
            let mut q = Partial {
                degrees: p.degrees.clone(),
                unit: p.unit.clone(),
                phys: p.phys.clone(),
                mult: p.mult.checked_mul(mult).ok_or_else(|| Error::numerical("mode multiplicity overflow"))?,
                cost: p.cost + s[f] * unit / rho2,
            };
            q.degrees.push(j);
            q.unit.push(unit);
            q.phys.push(unit / rho2);
            Ok(q)
        };
        if slot + 1 == order.len() {
            let dim = match factor.spectrum.source {
                SpectrumSource::ClosedFormSphere { dim, .. } => dim,
                _ => return Err(Error::Family("collapsing factor must be a round sphere".into())),
            };
            let j_cap = sphere_degree_cap(dim, factor.scale, s[f], budget);
            let next = families::sphere_eigenvalue(dim, j_cap + 1) / rho2;
            frontier = frontier.min(p.cost + s[f] * next);
            let explicit_to = if j_cap > CHAIN_LIMIT { 0 } else { j_cap };
            for j in 0..=explicit_to {
                let mult = families::sphere_mult(dim, j).ok_or_else(|| Error::numerical("multiplicity overflow"))?;
                let q = extend(j, families::sphere_eigenvalue(dim, j), mult)?;
                modes.push(mode_from(model, &order, &q));
            }
            if j_cap > CHAIN_LIMIT {
                let q = extend(0, 0.0, 1)?;
                chains.push(ModeChain { base: mode_from(model, &order, &q), factor: f, j_last: j_cap });
            }
        } else {
            let unit_bound = budget * rho2 / s[f];
            let levels = factor.spectrum.levels_up_to(unit_bound)?;
            for lv in levels.iter().rev() {
                let cost = s[f] * lv.lambda / rho2;
                if p.cost + cost > cutoff {
                    frontier = frontier.min(p.cost + cost);
                    continue;
                }
                stack.push(extend(lv.index, lv.lambda, lv.mult)?);
            }
        }
    }
    // deterministic order: by degrees in factor order
    modes.sort_by(|a, b| a.degrees.cmp(&b.degrees));
    chains.sort_by(|a, b| a.base.degrees.cmp(&b.base.degrees));
    let truncation_bound = frontier - shift;
    if !(truncation_bound > 0.0) {
        return Err(Error::Certificate(format!("truncation bound {truncation_bound} is not positive")));
    }
    Ok(ModeEnumeration { modes, chains, cutoff, truncation_bound })
}

pub fn enumerate_modes(spec: &FamilySpec, margin: f64) -> Result<ModeEnumeration> {
    enumerate_model_modes(&build_model(spec)?, margin)
}

/// (DtN, Lambda) for one mode.
pub fn jacobi_eigenvalue(model: &GeometryModel, mode: &BoundaryMode, dtn_tol: f64) -> Result<(f64, f64)> {
    let shift = jacobi_shift(model);
    if mode.is_constant() {
        return Ok((0.0, -shift));
    }
    let prob = dtn::build_radial_problem(model, mode)?;
    let sol = dtn::solve_dtn_detailed(&prob, dtn_tol)?;
    if sol.method == DtnMethod::Linear && !(sol.value >= 0.0) {
        return Err(Error::numerical("negative DtN value for a nonnegative potential"));
    }
    let tangential: f64 = model.s_blocks.values().iter().zip(&mode.lambdas).map(|(s, l)| s * l).sum();
    Ok((sol.value, sol.value + tangential - shift))
}

/// The product mode with the given level index on each factor, in factor order.
pub fn mode_at(model: &GeometryModel, degrees: &[u64]) -> Result<BoundaryMode> {
    let nf = model.boundary_factors.len();
    if degrees.len() != nf {
        return Err(Error::invalid(format!("expected {nf} level indices, got {}", degrees.len())));
    }
    let mut mode = BoundaryMode {
        degrees: degrees.to_vec(),
        unit_lambdas: vec![0.0; nf],
        lambdas: vec![0.0; nf],
        mult: 1,
        frobenius_exp: 0,
    };
    for (f, factor) in model.boundary_factors.iter().enumerate() {
        let want = degrees[f];
        let mut bound = 1.0;
        let level = loop {
            let levels = factor.spectrum.levels_up_to(bound)?;
            if let Some(lv) = levels.iter().find(|l| l.index == want) {
                break *lv;
            }
            if bound > 1e300 {
                return Err(Error::invalid(format!("factor {f} has no level {want}")));
            }
            bound *= 4.0;
        };
        mode.unit_lambdas[f] = level.lambda;
        mode.lambdas[f] = level.lambda / (factor.scale * factor.scale);
        mode.mult = mode.mult.checked_mul(level.mult).ok_or_else(|| Error::numerical("mode multiplicity overflow"))?;
        if factor.role == FactorRole::Collapsing {
            mode.frobenius_exp = want;
        }
    }
    Ok(mode)
}

fn chain_mode(model: &GeometryModel, chain: &ModeChain, j: u64) -> Result<BoundaryMode> {
    let f = chain.factor;
    let factor = &model.boundary_factors[f];
    let dim = match factor.spectrum.source {
        SpectrumSource::ClosedFormSphere { dim, .. } => dim,
        _ => return Err(Error::Family("collapsing factor must be a round sphere".into())),
    };
    let mut mode = chain.base.clone();
    let unit = families::sphere_eigenvalue(dim, j);
    mode.degrees[f] = j;
    mode.unit_lambdas[f] = unit;
    mode.lambdas[f] = unit / (factor.scale * factor.scale);
    mode.frobenius_exp = j;
    let m = families::sphere_mult(dim, j).ok_or_else(|| Error::numerical("multiplicity overflow"))?;
    mode.mult = chain.base.mult.checked_mul(m).ok_or_else(|| Error::numerical("multiplicity overflow"))?;
    Ok(mode)
}

fn evaluate_chain(model: &GeometryModel, chain: &ModeChain, tol: f64, dtn_tol: f64) -> Result<ModeRun> {
    let dim = model.boundary_factors[chain.factor].spectrum.source.clone();
    let dim = match dim {
        SpectrumSource::ClosedFormSphere { dim, .. } => dim,
        _ => unreachable!("checked in enumeration"),
    };
    let mut probes: Vec<ModeEntry> = Vec::new();
    let mut eval = |j: u64| -> Result<f64> {
        if let Some(e) = probes.iter().find(|e| e.mode.degrees[chain.factor] == j) {
            return Ok(e.lambda_df);
        }
        let mode = chain_mode(model, chain, j)?;
        let (d, l) = jacobi_eigenvalue(model, &mode, dtn_tol)?;
        probes.push(ModeEntry { mode, dtn: d, lambda_df: l, degenerate: l.abs() <= tol });
        Ok(l)
    };
    let last = chain.j_last;
    // largest j with Lambda(j) < -tol
    let negative_through = if eval(1)? >= -tol {
        0
    } else if eval(last)? < -tol {
        last
    } else {
        let (mut lo, mut hi) = (1u64, last);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if eval(mid)? < -tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    // smallest j with Lambda(j) > tol
    let positive_from = if negative_through == last {
        None
    } else {
        let first = negative_through + 1;
        if eval(first)? > tol {
            Some(first)
        } else if eval(last)? <= tol {
            None
        } else {
            let (mut lo, mut hi) = (first, last);
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if eval(mid)? > tol {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(hi)
        }
    };
    let cum = |j: u64| families::sphere_mult_cumulative(dim, j).ok_or_else(|| Error::numerical("multiplicity overflow"));
    let base = chain.base.mult;
    let index_contribution = if negative_through == 0 { 0 } else { base * (cum(negative_through)? - 1) };
    let deg_end = positive_from.map(|p| p - 1).unwrap_or(last);
    let degenerate_count =
        if deg_end > negative_through { base * (cum(deg_end)? - cum(negative_through)?) } else { 0 };
    probes.sort_by_key(|e| e.mode.degrees[chain.factor]);
    Ok(ModeRun {
        base_degrees: chain.base.degrees.clone(),
        factor: chain.factor,
        j_last: last,
        negative_through,
        positive_from,
        index_contribution,
        degenerate_count,
        probes,
    })
}

/// Morse index of the Jacobi operator on mean-zero functions for a model.
pub fn morse_index_model(model: &GeometryModel, opts: &IndexOptions) -> Result<JacobiReport> {
    check_positive_h(model)?;
    let shift = jacobi_shift(model);
    let tol = opts.tol.unwrap_or(DEFAULT_TOL_REL * shift);
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("degeneracy tolerance must be positive, got {tol}")));
    }
    let en = enumerate_model_modes(model, opts.margin)?;
    let entries: Vec<ModeEntry> = en
        .modes
        .par_iter()
        .map(|mode| {
            let (d, l) = jacobi_eigenvalue(model, mode, opts.dtn_tol)?;
            let degenerate = !mode.is_constant() && l.abs() <= tol;
            Ok(ModeEntry { mode: mode.clone(), dtn: d, lambda_df: l, degenerate })
        })
        .collect::<Result<_>>()?;
    let runs: Vec<ModeRun> =
        en.chains.par_iter().map(|c| evaluate_chain(model, c, tol, opts.dtn_tol)).collect::<Result<_>>()?;

    let mut index: u128 = 0;
    let mut degenerate_modes: u128 = 0;
    let mut min_abs: Option<f64> = None;
    let mut note = |v: f64| min_abs = Some(min_abs.map_or(v.abs(), |m: f64| m.min(v.abs())));
    for e in entries.iter().filter(|e| !e.mode.is_constant()) {
        note(e.lambda_df);
        if e.lambda_df < -tol {
            index += e.mode.mult;
        } else if e.degenerate {
            degenerate_modes += e.mode.mult;
        }
    }
    for r in &runs {
        index += r.index_contribution;
        degenerate_modes += r.degenerate_count;
        for p in &r.probes {
            note(p.lambda_df);
        }
    }
    Ok(JacobiReport {
        family: model.spec.kind,
        k: model.spec.k,
        ell: model.spec.ell,
        case_index: model.spec.case_index,
        param: model.spec.param,
        spectrum_source: model.spectrum_label(),
        h_k: model.h_k,
        s_blocks: model.s_blocks.clone(),
        tol,
        margin: opts.margin,
        dtn_tol: opts.dtn_tol,
        constant_lambda: -shift,
        entries,
        runs,
        index,
        min_abs_nonconst: min_abs,
        degenerate_modes,
        truncation_bound: en.truncation_bound,
    })
}

pub fn morse_index(spec: &FamilySpec, opts: &IndexOptions) -> Result<JacobiReport> {
    morse_index_model(&build_model(spec)?, opts)
}

fn sample_at(spec: &FamilySpec, param: f64, opts: &IndexOptions) -> Result<ScanSample> {
    let r = morse_index(&spec.with_param(param), opts)?;
    Ok(ScanSample { param, index: r.index, min_abs_nonconst: r.min_abs_nonconst, degenerate: r.is_degenerate() })
}

/// Move a degenerate endpoint toward `toward` until it is nondegenerate.
fn nudge(
    spec: &FamilySpec,
    s: ScanSample,
    toward: f64,
    opts: &IndexOptions,
) -> Result<Option<ScanSample>> {
    if !s.degenerate {
        return Ok(Some(s));
    }
    let mut step = NUDGE_WIDTH;
    loop {
        let p = s.param + (toward - s.param).signum() * step;
        if (toward - p).abs() < NUDGE_WIDTH || (p - s.param).abs() >= (toward - s.param).abs() {
            return Ok(None);
        }
        let cand = sample_at(spec, p, opts)?;
        if !cand.degenerate {
            return Ok(Some(cand));
        }
        step *= 2.0;
    }
}

fn refine(spec: &FamilySpec, lo: ScanSample, hi: ScanSample, opts: &IndexOptions) -> Result<JumpBracket> {
    let unresolved = |lo: &ScanSample, hi: &ScanSample| JumpBracket {
        param_lo: lo.param,
        param_hi: hi.param,
        index_lo: lo.index,
        index_hi: hi.index,
        resolved: false,
    };
    let (Some(mut a), Some(mut b)) = (nudge(spec, lo.clone(), hi.param, opts)?, nudge(spec, hi.clone(), lo.param, opts)?)
    else {
        return Ok(unresolved(&lo, &hi));
    };
    if a.index == b.index {
        return Ok(unresolved(&lo, &hi));
    }
    while b.param - a.param >= BRACKET_WIDTH {
        let mid = 0.5 * (a.param + b.param);
        let mut m = sample_at(spec, mid, opts)?;
        if m.degenerate {
            match nudge(spec, m.clone(), a.param, opts)? {
                Some(x) => m = x,
                None => match nudge(spec, m, b.param, opts)? {
                    Some(x) => m = x,
                    None => return Ok(unresolved(&a, &b)),
                },
            }
        }
        if m.index == a.index {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(JumpBracket { param_lo: a.param, param_hi: b.param, index_lo: a.index, index_hi: b.index, resolved: true })
}

/// Sample the index on `steps` evenly spaced parameters and bracket every
/// grid interval across which it changes.
pub fn scan(spec: &FamilySpec, param_lo: f64, param_hi: f64, steps: usize, opts: &IndexOptions) -> Result<ScanResult> {
    if steps < 2 || !(param_hi > param_lo) {
        return Err(Error::invalid("scan needs steps >= 2 and param_hi > param_lo"));
    }
    spec.with_param(param_lo).validate()?;
    spec.with_param(param_hi).validate()?;
    let grid: Vec<f64> = (0..steps)
        .map(|i| if i + 1 == steps { param_hi } else { param_lo + (param_hi - param_lo) * i as f64 / (steps - 1) as f64 })
        .collect();
    let samples: Vec<ScanSample> = grid.par_iter().map(|&p| sample_at(spec, p, opts)).collect::<Result<_>>()?;
    let pairs: Vec<(ScanSample, ScanSample)> = samples
        .windows(2)
        .filter(|w| w[0].index != w[1].index)
        .map(|w| (w[0].clone(), w[1].clone()))
        .collect();
    let jump_brackets: Vec<JumpBracket> =
        pairs.into_par_iter().map(|(a, b)| refine(spec, a, b, opts)).collect::<Result<_>>()?;
    let model = build_model(&spec.with_param(param_lo))?;
    Ok(ScanResult {
        family: spec.kind,
        k: spec.k,
        ell: spec.ell,
        case_index: spec.case_index,
        spectrum_source: model.spectrum_label(),
        samples,
        jump_brackets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_cap_is_tight() {
        for (dim, rho, s, budget) in [(5usize, 0.3, 2.0, 100.0), (1, 1e4, 0.1, 3.0), (10, 1.0, 7.0, 50.0)] {
            let j = sphere_degree_cap(dim, rho, s, budget);
            let cost = |j: u64| s * families::sphere_eigenvalue(dim, j) / (rho * rho);
            assert!(cost(j) <= budget);
            assert!(cost(j + 1) > budget);
        }
    }

    #[test]
    fn constant_mode_value() {
        let spec = FamilySpec::k2(FamilyKind::SphereSphere, 3, 1.0);
        let r = morse_index(&spec, &IndexOptions::default()).unwrap();
        let c = r.entries.iter().find(|e| e.mode.is_constant()).unwrap();
        assert_eq!(c.lambda_df, -3.0 * r.h_k);
        assert!(r.truncation_bound > 0.0);
    }

    #[test]
    fn margin_below_floor_rejected() {
        let spec = FamilySpec::k2(FamilyKind::SphereSphere, 3, 1.0);
        assert!(enumerate_modes(&spec, 1e-9).is_err());
    }

    #[test]
    fn enumeration_grows_as_eps_shrinks() {
        let spec = FamilySpec::k2(FamilyKind::SphereSphere, 3, 1.0);
        let counts: Vec<usize> = [0.5, 0.1, 0.05]
            .iter()
            .map(|&e| enumerate_modes(&spec.with_param(e), 1e-4).unwrap().modes.len())
            .collect();
        assert!(counts[0] < counts[1] && counts[1] < counts[2], "{counts:?}");
    }

    #[test]
    fn mode_at_rebuilds_enumerated_modes() {
        for spec in [
            FamilySpec::k2(FamilyKind::SphereSphere, 3, 0.4),
            FamilySpec::k2(FamilyKind::SphereHyperbolic, 2, 0.3),
            FamilySpec::k2(FamilyKind::FlatWarped, 2, 1.5),
        ] {
            let model = build_model(&spec).unwrap();
            let en = enumerate_model_modes(&model, 1e-4).unwrap();
            for mode in en.modes.iter().take(40) {
                assert_eq!(&mode_at(&model, &mode.degrees).unwrap(), mode);
            }
        }
    }
}
