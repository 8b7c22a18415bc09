//! Boundary invariants H_k and S_{k-1} from their polynomial definitions, and
//! the closed forms of the example families used to cross-check them.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{self, FamilyKind, FamilySpec};
use crate::symalg::{self, binomial, double_factorial, factorial, IsoSpectrum, Scalar};

/// Largest k for which the invariants are implemented.
pub const MAX_K: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryInvariants<S = f64> {
    pub h_k: S,
    pub s_blocks: IsoSpectrum<S>,
    /// Total boundary dimension (dim X - 1).
    pub n_boundary: usize,
}

fn check_inputs<S: Scalar>(k: usize, p: &IsoSpectrum<S>, a: &IsoSpectrum<S>, n: usize) -> Result<()> {
    if k == 0 || k > MAX_K {
        return Err(Error::invalid(format!("k must be in 1..={MAX_K}, got {k}")));
    }
    if p.mults() != a.mults() {
        return Err(Error::BlockMismatch { left: p.mults(), right: a.mults() });
    }
    if p.total_dim() != n {
        return Err(Error::invalid(format!("blocks span {} dimensions, expected n = {n}", p.total_dim())));
    }
    if n + 1 < 2 * k {
        return Err(Error::invalid(format!("boundary dimension {n} too small for k = {k}")));
    }
    Ok(())
}

fn frac<S: Scalar>(num: BigInt, den: BigInt) -> S {
    S::from_bigint(&num) / S::from_bigint(&den)
}

/// Coefficient of sigma_{2k-j-1, j} in H_k.
pub fn h_coefficient<S: Scalar>(k: usize, j: usize, n: usize) -> S {
    let num = factorial(2 * k - j - 1) * factorial(n + 1 + j - 2 * k);
    let den = factorial(j) * factorial(n + 1 - k) * double_factorial(2 * k as i64 - 2 * j as i64 - 1);
    frac(num, den)
}

/// Coefficient of T_{2k-j-3, j} in S_{k-1}.
pub fn s_coefficient<S: Scalar>(k: usize, j: usize, n: usize) -> S {
    let num = factorial(2 * k - j - 3) * factorial(n + 2 + j - 2 * k);
    let den = factorial(j) * factorial(n + 1 - k) * double_factorial(2 * k as i64 - 2 * j as i64 - 3);
    frac(num, den)
}

/// H_k of a boundary with restricted Schouten blocks `p` and second
/// fundamental form blocks `a`; `n` is the boundary dimension.
pub fn h_k<S: Scalar>(k: usize, p: &IsoSpectrum<S>, a: &IsoSpectrum<S>, n: usize) -> Result<S> {
    check_inputs(k, p, a, n)?;
    let mut acc = S::zero();
    for j in 0..k {
        let s = symalg::sigma_mixed(2 * k - j - 1, j, p, a)?;
        acc = acc + h_coefficient::<S>(k, j, n) * s;
    }
    Ok(acc)
}

/// S_{k-1} as block values; the empty sum (k = 1) gives zero blocks.
pub fn s_km1<S: Scalar>(k: usize, p: &IsoSpectrum<S>, a: &IsoSpectrum<S>, n: usize) -> Result<IsoSpectrum<S>> {
    check_inputs(k, p, a, n)?;
    let mut acc = p.map(|_| S::zero());
    for j in 0..k.saturating_sub(1) {
        let t = symalg::newton_mixed(2 * k - j - 3, j, p, a)?;
        acc = acc.combine(&S::one(), &t, &s_coefficient::<S>(k, j, n))?;
    }
    Ok(acc)
}

pub fn boundary_invariants<S: Scalar>(
    k: usize,
    p: &IsoSpectrum<S>,
    a: &IsoSpectrum<S>,
) -> Result<BoundaryInvariants<S>> {
    let n = p.total_dim();
    Ok(BoundaryInvariants { h_k: h_k(k, p, a, n)?, s_blocks: s_km1(k, p, a, n)?, n_boundary: n })
}

/// Invariants of a family from the defining formulas, in floating point.
pub fn family_invariants(spec: &FamilySpec) -> Result<BoundaryInvariants<f64>> {
    spec.validate()?;
    let (n, m) = families::dims(spec.kind, spec.k, spec.ell, spec.case_index)?;
    let curv = families::curvature_parameter(spec)?;
    let (p, a) = families::boundary_blocks::<f64>(spec.kind, n, m, &curv);
    boundary_invariants(spec.k as usize, &p, &a)
}

// ---------------------------------------------------------------------------
// Closed forms of the example families
// ---------------------------------------------------------------------------

/// The mixed symmetric functions of (P, A) that enter H_2 and H_3, from the
/// family closed forms.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForms<S> {
    /// sigma_{j,0} for j = 0..=5 (index j).
    pub sigma_j0: Vec<S>,
    /// sigma_{j,1} for j = 0..=4 (index j; entry 0 unused).
    pub sigma_j1: Vec<S>,
    pub sigma_32: S,
    /// T_{j,0} blocks for j = 0..=3.
    pub newton_j0: Vec<IsoSpectrum<S>>,
    pub newton_21: IsoSpectrum<S>,
}

fn binom<S: Scalar>(n: usize, k: usize) -> S {
    S::from_bigint(&binomial(n, k))
}

fn cap_forms<S: Scalar>(n: usize, m: usize, kappa: &S) -> ClosedForms<S> {
    let (ni, mi) = (n as i64, m as i64);
    let sigma_j0 = (0..=5).map(|j| binom::<S>(n, j) * kappa.powi(j)).collect();
    let sigma_j1 = (0..=4)
        .map(|j| {
            if j == 0 {
                return S::zero();
            }
            S::ratio(ni - mi + 1 - j as i64, 2 * j as i64) * binom::<S>(n, j - 1) * kappa.powi(j - 1)
        })
        .collect();
    let sigma_32 = S::ratio(ni * (ni * ni - 2 * mi * ni + mi * mi - 3 * ni + mi + 2), 24) * kappa.clone();
    let newton_j0 = (0..=3)
        .map(|j| {
            IsoSpectrum::new(vec![
                (binom::<S>(n - 1, j) * kappa.powi(j), n),
                (binom::<S>(n, j) * kappa.powi(j), m),
            ])
        })
        .collect();
    let newton_21 = IsoSpectrum::new(vec![
        (S::ratio((ni - 1) * (ni - mi - 2), 4) * kappa.clone(), n),
        (S::ratio(ni * (ni - mi), 4) * kappa.clone(), m),
    ]);
    ClosedForms { sigma_j0, sigma_j1, sigma_32, newton_j0, newton_21 }
}

fn ball_forms<S: Scalar>(n: usize, m: usize, kappa: &S) -> ClosedForms<S> {
    let (ni, mi) = (n as i64, m as i64);
    let sigma_j0 = (0..=5).map(|j| binom::<S>(m, j) * kappa.powi(j)).collect();
    let sigma_j1 = (0..=4)
        .map(|j| {
            if j == 0 {
                return S::zero();
            }
            S::ratio(ni - mi - 1 + j as i64, 2 * j as i64) * binom::<S>(m, j - 1) * kappa.powi(j - 1)
        })
        .collect();
    let sigma_32 = S::ratio(mi * (ni * ni - 2 * mi * ni + mi * mi + ni - 3 * mi + 2), 24) * kappa.clone();
    let newton_j0 = (0..=3)
        .map(|j| {
            IsoSpectrum::new(vec![
                (binom::<S>(m, j) * kappa.powi(j), n),
                (binom::<S>(m - 1, j) * kappa.powi(j), m),
            ])
        })
        .collect();
    let newton_21 = IsoSpectrum::new(vec![
        (S::ratio(mi * (ni - mi), 4) * kappa.clone(), n),
        (S::ratio((mi - 1) * (ni - mi + 2), 4) * kappa.clone(), m),
    ]);
    ClosedForms { sigma_j0, sigma_j1, sigma_32, newton_j0, newton_21 }
}

/// Warped family, in terms of t = tanh(mR/2):
/// coth(mR) = (1 + t^2)/(2t), sech^2(mR/2) = 1 - t^2.
///
/// Only the quantities entering H_2 and S_1 are populated.
fn flat_forms<S: Scalar>(n: usize, m: usize, t: &S) -> ClosedForms<S> {
    let (ni, mi) = (n as i64, m as i64);
    let one = S::one();
    let two = S::from_i64(2);
    let coth_mr = (one.clone() + t.clone() * t.clone()) / (two.clone() * t.clone());
    let sech2 = one.clone() - t.clone() * t.clone();
    let sigma_30 = binom::<S>(m - 1, 3) * t.powi(3)
        + binom::<S>(m - 1, 2) * (one.clone() + S::ratio(mi - 2, 2) * sech2) * t.clone();
    let sigma_21 = S::ratio(mi * (ni - mi + 1), 2) * coth_mr.clone();
    let circle = families::boundary_blocks::<S>(FamilyKind::FlatWarped, n, m, t).1.blocks[1].value.clone();
    let newton_10 = IsoSpectrum::new(vec![
        (S::from_i64(mi) * coth_mr, n),
        (S::from_i64(mi - 1) * t.clone(), 1),
        (circle + S::from_i64(mi - 2) * t.clone(), m - 1),
    ]);
    let zero3 = IsoSpectrum::new(vec![(S::zero(), n), (S::zero(), 1), (S::zero(), m - 1)]);
    ClosedForms {
        sigma_j0: vec![S::one(), S::zero(), S::zero(), sigma_30, S::zero(), S::zero()],
        sigma_j1: vec![S::zero(), S::zero(), sigma_21, S::zero(), S::zero()],
        sigma_32: S::zero(),
        newton_j0: vec![zero3.clone(), newton_10, zero3.clone(), zero3.clone()],
        newton_21: zero3,
    }
}

pub fn closed_forms<S: Scalar>(kind: FamilyKind, n: usize, m: usize, curv: &S) -> ClosedForms<S> {
    match kind {
        FamilyKind::SphereHyperbolic => cap_forms(n, m, curv),
        FamilyKind::SphereSphere => ball_forms(n, m, curv),
        FamilyKind::FlatWarped => flat_forms(n, m, curv),
    }
}

/// H_k and S_{k-1} assembled from the family closed forms with the explicit
/// k = 2, 3 coefficients, independently of the mixed-polynomial evaluation.
pub fn reference_values<S: Scalar>(
    kind: FamilyKind,
    k: usize,
    n: usize,
    m: usize,
    curv: &S,
) -> Result<BoundaryInvariants<S>> {
    if kind == FamilyKind::FlatWarped && k != 2 {
        return Err(Error::Family("flat-warped closed forms exist only for k = 2".into()));
    }
    let cf = closed_forms(kind, n, m, curv);
    let nb = (n + m) as i64;
    let (h, s) = match k {
        2 => {
            let h = S::ratio(2, (nb - 1) * (nb - 2)) * cf.sigma_j0[3].clone()
                + S::ratio(2, nb - 1) * cf.sigma_j1[2].clone();
            let s = cf.newton_j0[1].map(|v| v.clone() * S::ratio(1, nb - 1));
            (h, s)
        }
        3 => {
            let h = S::ratio(8, (nb - 2) * (nb - 3) * (nb - 4)) * cf.sigma_j0[5].clone()
                + S::ratio(8, (nb - 2) * (nb - 3)) * cf.sigma_j1[4].clone()
                + S::ratio(3, nb - 2) * cf.sigma_32.clone();
            let s = cf.newton_j0[3].combine(
                &S::ratio(2, (nb - 2) * (nb - 3)),
                &cf.newton_21,
                &S::ratio(2, nb - 2),
            )?;
            (h, s)
        }
        _ => return Err(Error::invalid(format!("closed forms cover k = 2, 3 only, got {k}"))),
    };
    Ok(BoundaryInvariants { h_k: h, s_blocks: s, n_boundary: n + m })
}

/// Floating-point reference values for a family at its parameter.
pub fn reference_for(spec: &FamilySpec) -> Result<BoundaryInvariants<f64>> {
    spec.validate()?;
    let (n, m) = families::dims(spec.kind, spec.k, spec.ell, spec.case_index)?;
    let curv = families::curvature_parameter(spec)?;
    reference_values(spec.kind, spec.k as usize, n, m, &curv)
}
