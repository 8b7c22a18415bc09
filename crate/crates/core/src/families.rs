//! The three explicit product geometries: dimension rules, Schouten and
//! second-fundamental-form blocks, warping profiles and boundary factor
//! spectra.

use std::f64::consts::PI;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::boundary;
use crate::dtn::{RadialGeometry, RadialKind};
use crate::error::{Error, Result};
use crate::symalg::{self, IsoSpectrum, Scalar};

/// Default number of synthetic eigenvalues for the hyperbolic factor.
pub const DEFAULT_WEYL_COUNT: usize = 20_000;

/// Upper limit on materialized lattice points / levels for one factor.
pub const LEVEL_BUDGET: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Spherical cap S^{n+1}_eps times a closed hyperbolic manifold H^m.
    #[serde(rename = "sphere-hyperbolic")]
    SphereHyperbolic,
    /// Round S^n times a geodesic ball of radius eps in hyperbolic space H^{m+1}.
    #[serde(rename = "sphere-sphere")]
    SphereSphere,
    /// Round S^n times the Einstein warped product B_R x F^{m-1}.
    #[serde(rename = "flat-warped")]
    FlatWarped,
}

impl FamilyKind {
    pub fn id(&self) -> &'static str {
        match self {
            FamilyKind::SphereHyperbolic => "sphere-hyperbolic",
            FamilyKind::SphereSphere => "sphere-sphere",
            FamilyKind::FlatWarped => "flat-warped",
        }
    }
}

/// Which dimension rule of the Einstein-product table is in force.
///
/// Case 1 pairs with k = 2, cases 2 and 3 with k = 3.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub k: u32,
    pub ell: u32,
    pub case_index: u32,
    /// eps for the sphere families, R for the warped family.
    pub param: f64,
    /// Spectrum of the closed factor without a closed form (hyperbolic
    /// manifold, or the Ricci-flat F). `None` selects the default.
    pub factor_spectrum: Option<FactorSpectrum>,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, k: u32, ell: u32, case_index: u32, param: f64) -> Self {
        FamilySpec { kind, k, ell, case_index, param, factor_spectrum: None }
    }

    /// The k = 2 instance of a family (case 1).
    pub fn k2(kind: FamilyKind, ell: u32, param: f64) -> Self {
        Self::new(kind, 2, ell, 1, param)
    }

    pub fn with_param(&self, param: f64) -> Self {
        FamilySpec { param, ..self.clone() }
    }

    pub fn with_factor_spectrum(mut self, spectrum: FactorSpectrum) -> Self {
        self.factor_spectrum = Some(spectrum);
        self
    }

    /// Check (kind, k, ell, case, param) against the family rules.
    pub fn validate(&self) -> Result<()> {
        dims(self.kind, self.k, self.ell, self.case_index)?;
        let p = self.param;
        match self.kind {
            FamilyKind::SphereHyperbolic => {
                if !(p > 0.0 && p < PI / 2.0) {
                    return Err(Error::Family(format!("cap radius eps must lie in (0, pi/2), got {p}")));
                }
            }
            FamilyKind::SphereSphere | FamilyKind::FlatWarped => {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::Family(format!("parameter must be positive and finite, got {p}")));
                }
            }
        }
        if self.kind == FamilyKind::SphereSphere && self.factor_spectrum.is_some() {
            return Err(Error::Family("sphere-sphere has only closed-form factors; no factor spectrum accepted".into()));
        }
        Ok(())
    }
}

/// Factor dimensions of the Einstein-product table: (positive factor, negative factor).
pub fn product_dims(case_index: u32, ell: u32) -> Result<(usize, usize)> {
    let l = ell as usize;
    if l == 0 {
        return Err(Error::Family("ell must be positive".into()));
    }
    match case_index {
        1 => Ok(((l + 1) * (l + 2) / 2, l * (l + 1) / 2)),
        2 => Ok(((l + 1) * (3 * l + 2) / 2, l * (3 * l - 1) / 2)),
        3 => Ok(((l + 1) * (3 * l + 4) / 2, l * (3 * l + 1) / 2)),
        _ => Err(Error::Family(format!("case index must be 1, 2 or 3, got {case_index}"))),
    }
}

/// Closed-form entries of the Einstein-product table for one case.
pub struct ProductTable {
    pub k: usize,
    pub pos_dim: usize,
    pub neg_dim: usize,
    /// sigma_1, ..., sigma_k as stated (sigma_k = 0).
    pub sigmas: Vec<BigRational>,
    /// T_{k-1} on (positive factor, negative factor).
    pub newton: IsoSpectrum<BigRational>,
}

/// The stated rational values for the product of an Einstein manifold with
/// Ric = (n-1)g and one with Ric = -(m-1)g in the special dimensions.
pub fn product_table(case_index: u32, ell: u32) -> Result<ProductTable> {
    let (pos, neg) = product_dims(case_index, ell)?;
    let l = ell as i64;
    let q = symalg::rat;
    let (k, sigmas, newton) = match case_index {
        1 => (2, vec![q(l + 1, 2), q(0, 1)], vec![q(l, 2), q(l + 2, 2)]),
        2 => (
            3,
            vec![q(3 * l + 1, 2), q(l * (3 * l + 2), 4), q(0, 1)],
            vec![q(l * (3 * l - 1), 4), q((l + 1) * (3 * l + 2), 4)],
        ),
        _ => (
            3,
            vec![q(3 * l + 2, 2), q((l + 1) * (3 * l + 1), 4), q(0, 1)],
            vec![q(l * (3 * l + 1), 4), q((l + 1) * (3 * l + 4), 4)],
        ),
    };
    Ok(ProductTable {
        k,
        pos_dim: pos,
        neg_dim: neg,
        sigmas,
        newton: IsoSpectrum::new(vec![(newton[0].clone(), pos), (newton[1].clone(), neg)]),
    })
}

/// Boundary factor dimensions (n, m) for a family.
///
/// Sphere-hyperbolic: boundary S^n x H^m of the cap S^{n+1} x H^m.
/// Sphere-sphere: boundary S^n x S^m of S^n x H^{m+1}.
/// Flat-warped: boundary S^n x S^1 x F^{m-1} of S^n x N^{m+1}.
pub fn dims(kind: FamilyKind, k: u32, ell: u32, case_index: u32) -> Result<(usize, usize)> {
    let expected_case_ok = matches!((k, case_index), (2, 1) | (3, 2) | (3, 3));
    if !expected_case_ok {
        return Err(Error::Family(format!(
            "k={k} with case {case_index} is not covered (k=2 uses case 1, k=3 uses cases 2 and 3)"
        )));
    }
    let (pos, neg) = product_dims(case_index, ell)?;
    match kind {
        FamilyKind::SphereHyperbolic => Ok((pos - 1, neg)),
        FamilyKind::SphereSphere => {
            let min_ell = if case_index == 3 { 2 } else { 3 };
            if ell < min_ell {
                return Err(Error::Family(format!(
                    "sphere-sphere case {case_index} requires ell >= {min_ell}, got {ell}"
                )));
            }
            Ok((pos, neg - 1))
        }
        FamilyKind::FlatWarped => {
            if k != 2 {
                return Err(Error::Family("flat-warped exists only for k = 2".into()));
            }
            if ell < 2 {
                return Err(Error::Family(format!("flat-warped requires ell >= 2, got {ell}")));
            }
            Ok((pos, neg - 1))
        }
    }
}

/// Mean curvature parameter: cot eps (cap) or coth eps (geodesic sphere).
pub fn kappa(spec: &FamilySpec) -> Result<f64> {
    match spec.kind {
        FamilyKind::SphereHyperbolic => {
            let e = spec.param;
            if !(e > 0.0 && e < PI / 2.0) {
                return Err(Error::Family(format!("cap radius eps must lie in (0, pi/2), got {e}")));
            }
            Ok(1.0 / e.tan())
        }
        FamilyKind::SphereSphere => {
            let e = spec.param;
            if !(e > 0.0) {
                return Err(Error::Family(format!("eps must be positive, got {e}")));
            }
            Ok(1.0 / e.tanh())
        }
        FamilyKind::FlatWarped => Err(Error::Family("kappa is not defined for the flat-warped family".into())),
    }
}

/// The scalar that parameterizes the boundary curvature: kappa for the sphere
/// families, tanh(mR/2) for the warped family.
pub fn curvature_parameter(spec: &FamilySpec) -> Result<f64> {
    match spec.kind {
        FamilyKind::FlatWarped => {
            let (_, m) = dims(spec.kind, spec.k, spec.ell, spec.case_index)?;
            Ok((m as f64 * spec.param / 2.0).tanh())
        }
        _ => kappa(spec),
    }
}

/// Interior g^{-1}P blocks: 1/2 on the positive factor, -1/2 on the negative.
pub fn interior_schouten<S: Scalar>(kind: FamilyKind, n: usize, m: usize) -> IsoSpectrum<S> {
    let (pos, neg) = match kind {
        FamilyKind::SphereHyperbolic => (n + 1, m),
        FamilyKind::SphereSphere | FamilyKind::FlatWarped => (n, m + 1),
    };
    IsoSpectrum::new(vec![(S::ratio(1, 2), pos), (S::ratio(-1, 2), neg)])
}

/// Boundary (h^{-1} P, h^{-1} A) blocks in factor order.
///
/// `curv` is kappa for the sphere families and t = tanh(mR/2) for the warped
/// family, so that rational `curv` gives rational blocks.
pub fn boundary_blocks<S: Scalar>(
    kind: FamilyKind,
    n: usize,
    m: usize,
    curv: &S,
) -> (IsoSpectrum<S>, IsoSpectrum<S>) {
    let half = S::ratio(1, 2);
    match kind {
        FamilyKind::SphereHyperbolic => (
            IsoSpectrum::new(vec![(half.clone(), n), (-half, m)]),
            IsoSpectrum::new(vec![(curv.clone(), n), (S::zero(), m)]),
        ),
        FamilyKind::SphereSphere => (
            IsoSpectrum::new(vec![(half.clone(), n), (-half, m)]),
            IsoSpectrum::new(vec![(S::zero(), n), (curv.clone(), m)]),
        ),
        FamilyKind::FlatWarped => {
            let t = curv.clone();
            // f'/f = 1/t + (m-2)(1-t^2)/(2t) in terms of t = tanh(mR/2)
            let circle = S::one() / t.clone()
                + S::from_i64(m as i64 - 2) * (S::one() - t.clone() * t.clone()) / (S::from_i64(2) * t.clone());
            (
                IsoSpectrum::new(vec![(half.clone(), n), (-half.clone(), 1), (-half, m - 1)]),
                IsoSpectrum::new(vec![(S::zero(), n), (circle, 1), (t, m - 1)]),
            )
        }
    }
}

// ---------------------------------------------------------------------------
// Warped profiles of the Einstein metric on B_R x F
// ---------------------------------------------------------------------------

/// ln cosh x without overflow.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// ln sinh x for x > 0 without overflow.
pub fn ln_sinh(x: f64) -> f64 {
    if x < 1.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
    }
}

/// Profiles f, psi of dr^2 + f^2 dtheta^2 + psi^2 g_F with Ric = -m g.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatProfiles {
    pub m: usize,
}

/// Pointwise values of a doubly warped profile and its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarpValues {
    pub f: f64,
    pub df: f64,
    pub ddf: f64,
    pub psi: f64,
    pub dpsi: f64,
    pub ddpsi: f64,
}

impl FlatProfiles {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("warped profile needs m >= 2, got {m}")));
        }
        Ok(FlatProfiles { m })
    }

    fn alpha(&self) -> f64 {
        (2.0 - self.m as f64) / self.m as f64
    }

    fn x(&self, r: f64) -> f64 {
        self.m as f64 * r / 2.0
    }

    /// f(r) = (2/m) cosh^{(2-m)/m}(mr/2) sinh(mr/2)
    pub fn f(&self, r: f64) -> f64 {
        let x = self.x(r);
        2.0 / self.m as f64 * x.cosh().powf(self.alpha()) * x.sinh()
    }

    /// psi(r) = cosh^{2/m}(mr/2)
    pub fn psi(&self, r: f64) -> f64 {
        self.x(r).cosh().powf(2.0 / self.m as f64)
    }

    pub fn df(&self, r: f64) -> f64 {
        let x = self.x(r);
        let (s, c) = (x.sinh(), x.cosh());
        c.powf(self.alpha() - 1.0) * (self.alpha() * s * s + c * c)
    }

    pub fn ddf(&self, r: f64) -> f64 {
        let x = self.x(r);
        let (s, c) = (x.sinh(), x.cosh());
        let a = self.alpha();
        self.m as f64 / 2.0 * c.powf(a - 2.0) * s * ((a - 1.0) * (a * s * s + c * c) + 2.0 * (a + 1.0) * c * c)
    }

    pub fn dpsi(&self, r: f64) -> f64 {
        let x = self.x(r);
        x.cosh().powf(2.0 / self.m as f64 - 1.0) * x.sinh()
    }

    pub fn ddpsi(&self, r: f64) -> f64 {
        let x = self.x(r);
        let (s, c) = (x.sinh(), x.cosh());
        let b = 2.0 / self.m as f64;
        self.m as f64 / 2.0 * c.powf(b - 2.0) * ((b - 1.0) * s * s + c * c)
    }

    pub fn values(&self, r: f64) -> WarpValues {
        WarpValues {
            f: self.f(r),
            df: self.df(r),
            ddf: self.ddf(r),
            psi: self.psi(r),
            dpsi: self.dpsi(r),
            ddpsi: self.ddpsi(r),
        }
    }

    /// ln f, stable for large r.
    pub fn ln_f(&self, r: f64) -> f64 {
        let x = self.x(r);
        (2.0 / self.m as f64).ln() + self.alpha() * ln_cosh(x) + ln_sinh(x)
    }

    /// ln psi, stable for large r.
    pub fn ln_psi(&self, r: f64) -> f64 {
        2.0 / self.m as f64 * ln_cosh(self.x(r))
    }

    /// f'/f = coth x + (m-2) csch(2x) with x = mr/2.
    pub fn f_logderiv(&self, r: f64) -> f64 {
        let x = self.x(r);
        let t = x.tanh();
        self.m as f64 / 2.0 * (self.alpha() * t + 1.0 / t)
    }

    /// psi'/psi = tanh(mr/2).
    pub fn psi_logderiv(&self, r: f64) -> f64 {
        self.x(r).tanh()
    }
}

/// max |Ric + m g| over the three Ricci eigendirections, from raw profile values.
pub fn einstein_defect_of(m: usize, v: &WarpValues) -> f64 {
    let mf = m as f64;
    let radial = -v.ddf / v.f - (mf - 1.0) * v.ddpsi / v.psi + mf;
    let circle = -v.ddf / v.f - (mf - 1.0) * v.df * v.dpsi / (v.f * v.psi) + mf;
    let lp = v.dpsi / v.psi;
    let fiber = -v.ddpsi / v.psi - (mf - 2.0) * lp * lp - v.df * v.dpsi / (v.f * v.psi) + mf;
    radial.abs().max(circle.abs()).max(fiber.abs())
}

/// Einstein defect of the closed-form profiles over a radial grid.
pub fn einstein_defect(m: usize, r_grid: &[f64]) -> Result<f64> {
    let prof = FlatProfiles::new(m)?;
    let mut worst = 0.0f64;
    for &r in r_grid {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("einstein_defect needs r > 0, got {r}")));
        }
        worst = worst.max(einstein_defect_of(m, &prof.values(r)));
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Factor spectra
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumSource {
    ClosedFormSphere { dim: usize, radius: f64 },
    FlatTorus { periods: Vec<f64> },
    UserSupplied { label: String },
    SyntheticWeyl { dim: usize, volume: f64, count: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub mult: u64,
}

/// One distinct eigenvalue of a factor with its position in the level list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub index: u64,
    pub lambda: f64,
    pub mult: u128,
}

/// Laplace spectrum of a closed factor in its unit (unscaled) metric.
///
/// Closed-form sources generate levels on demand; list sources carry their
/// entries and can only certify completeness below their last eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSpectrum {
    pub source: SpectrumSource,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<SpectrumEntry>,
}

/// j(j + d - 1): eigenvalue of degree-j harmonics on the unit S^d.
pub fn sphere_eigenvalue(dim: usize, j: u64) -> f64 {
    let j = j as f64;
    j * (j + dim as f64 - 1.0)
}

fn binom_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Multiplicity of degree-j harmonics on S^d: C(d+j, j) - C(d+j-2, j-2).
pub fn sphere_mult(dim: usize, j: u64) -> Option<u128> {
    let d = dim as u64;
    let a = binom_u128(d + j, j)?;
    let b = if j >= 2 { binom_u128(d + j - 2, j - 2)? } else { 0 };
    Some(a - b)
}

/// Total multiplicity of degrees 0..=j on S^d: C(d+j, d) + C(d+j-1, d).
pub fn sphere_mult_cumulative(dim: usize, j: u64) -> Option<u128> {
    let d = dim as u64;
    let a = binom_u128(d + j, d)?;
    let b = if j >= 1 { binom_u128(d + j - 1, d)? } else { 0 };
    a.checked_add(b)
}

/// Volume of the unit ball in R^d.
fn unit_ball_volume(d: usize) -> f64 {
    let mut w = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

impl FactorSpectrum {
    pub fn sphere(dim: usize, radius: f64) -> Self {
        FactorSpectrum { source: SpectrumSource::ClosedFormSphere { dim, radius }, entries: Vec::new() }
    }

    pub fn flat_torus(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() || periods.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::Spectrum { line: None, message: "torus periods must be positive".into() });
        }
        Ok(FactorSpectrum { source: SpectrumSource::FlatTorus { periods }, entries: Vec::new() })
    }

    /// Eigenvalues placed by the Weyl law N(lambda) = omega_d V lambda^{d/2} / (2 pi)^d,
    /// each with multiplicity one, after the constant mode.
    pub fn synthetic_weyl(dim: usize, volume: f64, count: usize) -> Result<Self> {
        if dim == 0 || !(volume > 0.0) || count == 0 {
            return Err(Error::Spectrum {
                line: None,
                message: "synthetic spectrum needs dim >= 1, volume > 0, count >= 1".into(),
            });
        }
        let scale = unit_ball_volume(dim) * volume;
        let mut entries = vec![SpectrumEntry { lambda: 0.0, mult: 1 }];
        for i in 1..=count {
            let lambda = (2.0 * PI).powi(2) * (i as f64 / scale).powf(2.0 / dim as f64);
            entries.push(SpectrumEntry { lambda, mult: 1 });
        }
        Ok(FactorSpectrum { source: SpectrumSource::SyntheticWeyl { dim, volume, count }, entries })
    }

    pub fn from_entries(label: &str, entries: Vec<SpectrumEntry>) -> Result<Self> {
        if let Some((i, message)) = validate_entries(&entries) {
            return Err(Error::Spectrum { line: None, message: format!("entry {i}: {message}") });
        }
        Ok(FactorSpectrum { source: SpectrumSource::UserSupplied { label: label.to_string() }, entries })
    }

    /// Parse a JSON array of {"lambda": number, "mult": integer}.
    pub fn from_json(label: &str, text: &str) -> Result<Self> {
        let entries: Vec<SpectrumEntry> = serde_json::from_str(text).map_err(|e| Error::Spectrum {
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        if let Some((i, message)) = validate_entries(&entries) {
            return Err(Error::Spectrum { line: object_line(text, i), message: format!("entry {i}: {message}") });
        }
        Ok(FactorSpectrum { source: SpectrumSource::UserSupplied { label: label.to_string() }, entries })
    }

    /// Short tag for reports.
    pub fn label(&self) -> String {
        match &self.source {
            SpectrumSource::ClosedFormSphere { .. } => "closed_form_sphere".into(),
            SpectrumSource::FlatTorus { .. } => "flat_torus".into(),
            SpectrumSource::UserSupplied { label } => format!("user_supplied:{label}"),
            SpectrumSource::SyntheticWeyl { .. } => "synthetic_weyl".into(),
        }
    }

    /// Same factor with every eigenvalue multiplied by `factor` (metric scaled by 1/factor).
    pub fn rescaled(&self, factor: f64) -> Self {
        let shrink = factor.sqrt();
        let source = match &self.source {
            SpectrumSource::ClosedFormSphere { dim, radius } => {
                SpectrumSource::ClosedFormSphere { dim: *dim, radius: radius / shrink }
            }
            SpectrumSource::FlatTorus { periods } => {
                SpectrumSource::FlatTorus { periods: periods.iter().map(|p| p / shrink).collect() }
            }
            other => other.clone(),
        };
        FactorSpectrum {
            source,
            entries: self
                .entries
                .iter()
                .map(|e| SpectrumEntry { lambda: e.lambda * factor, mult: e.mult })
                .collect(),
        }
    }

    /// All levels with lambda <= bound, followed by the first level above it.
    pub fn levels_up_to(&self, bound: f64) -> Result<Vec<Level>> {
        match &self.source {
            SpectrumSource::ClosedFormSphere { dim, radius } => {
                let mut out = Vec::new();
                let r2 = radius * radius;
                let mut j = 0u64;
                loop {
                    let lambda = sphere_eigenvalue(*dim, j) / r2;
                    let mult = sphere_mult(*dim, j)
                        .ok_or_else(|| Error::numerical(format!("sphere multiplicity overflow at degree {j}")))?;
                    out.push(Level { index: j, lambda, mult });
                    if lambda > bound {
                        return Ok(out);
                    }
                    if out.len() > LEVEL_BUDGET {
                        return Err(Error::numerical("sphere level budget exceeded"));
                    }
                    j += 1;
                }
            }
            SpectrumSource::FlatTorus { periods } => torus_levels(periods, bound),
            _ => {
                let mut out = Vec::new();
                for (i, e) in self.entries.iter().enumerate() {
                    out.push(Level { index: i as u64, lambda: e.lambda, mult: e.mult as u128 });
                    if e.lambda > bound {
                        return Ok(out);
                    }
                }
                Err(Error::Spectrum {
                    line: None,
                    message: format!(
                        "{} list ends at lambda = {} but completeness is needed up to {bound}",
                        self.label(),
                        self.entries.last().map(|e| e.lambda).unwrap_or(0.0)
                    ),
                })
            }
        }
    }
}

fn validate_entries(entries: &[SpectrumEntry]) -> Option<(usize, String)> {
    if entries.is_empty() {
        return Some((0, "spectrum is empty".into()));
    }
    if entries[0].lambda != 0.0 || entries[0].mult != 1 {
        return Some((0, "first entry must be the constant mode (lambda 0, mult 1)".into()));
    }
    for (i, e) in entries.iter().enumerate().skip(1) {
        if !e.lambda.is_finite() || e.lambda <= 0.0 {
            return Some((i, format!("lambda must be finite and positive, got {}", e.lambda)));
        }
        if e.mult == 0 {
            return Some((i, "mult must be at least 1".into()));
        }
        if e.lambda < entries[i - 1].lambda {
            return Some((i, "lambda values must be nondecreasing".into()));
        }
    }
    None
}

/// 1-based line of the `index`-th object in a top-level JSON array.
fn object_line(text: &str, index: usize) -> Option<usize> {
    let mut depth = 0i32;
    let mut line = 1usize;
    let mut seen = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for ch in text.chars() {
        if ch == '\n' {
            line += 1;
        }
        if in_string {
            match ch {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match ch {
            '"' => in_string = true,
            '[' | '{' => {
                if ch == '{' && depth == 1 {
                    if seen == index {
                        return Some(line);
                    }
                    seen += 1;
                }
                depth += 1;
            }
            ']' | '}' => depth -= 1,
            _ => {}
        }
    }
    None
}

fn torus_levels(periods: &[f64], bound: f64) -> Result<Vec<Level>> {
    let freqs: Vec<f64> = periods.iter().map(|p| (2.0 * PI / p).powi(2)).collect();
    let fmax = freqs.iter().cloned().fold(0.0, f64::max);
    // a level above `bound` always exists below this search radius
    let search = 2.0 * bound.max(0.0) + 2.0 * fmax;
    let mut values: Vec<f64> = Vec::new();
    let mut budget = LEVEL_BUDGET;
    torus_rec(&freqs, 0, 0.0, search, &mut values, &mut budget)?;
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<Level> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some(last) if (v - last.lambda).abs() <= 1e-12 * v.max(1.0) => last.mult += 1,
            _ => {
                if out.last().map(|l| l.lambda > bound).unwrap_or(false) {
                    break;
                }
                out.push(Level { index: out.len() as u64, lambda: v, mult: 1 });
            }
        }
    }
    Ok(out)
}

fn torus_rec(freqs: &[f64], axis: usize, acc: f64, search: f64, out: &mut Vec<f64>, budget: &mut usize) -> Result<()> {
    if axis == freqs.len() {
        if *budget == 0 {
            return Err(Error::numerical("torus lattice budget exceeded; reduce the torus or the parameter"));
        }
        *budget -= 1;
        out.push(acc);
        return Ok(());
    }
    let vmax = ((search - acc) / freqs[axis]).max(0.0).sqrt().floor() as i64;
    for v in -vmax..=vmax {
        let next = acc + freqs[axis] * (v * v) as f64;
        if next <= search {
            torus_rec(freqs, axis + 1, next, search, out, budget)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Geometry model
// ---------------------------------------------------------------------------

/// How a boundary factor enters the radial extension problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorRole {
    /// The sphere (or circle) that shrinks to a point at r = 0; its degree is
    /// the Frobenius exponent.
    Collapsing,
    /// A tangential factor warped by a nonvanishing profile.
    Warped,
    /// A factor orthogonal to the radial direction (enters as t * nu).
    Transverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFactor {
    pub name: String,
    pub role: FactorRole,
    /// Spectrum in the unit metric of the factor.
    pub spectrum: FactorSpectrum,
    /// Metric scale: boundary eigenvalue = unit eigenvalue / scale^2.
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryModel {
    pub spec: FamilySpec,
    pub n: usize,
    pub m: usize,
    pub n_boundary: usize,
    pub interior_schouten: IsoSpectrum<f64>,
    pub interior_newton: IsoSpectrum<f64>,
    pub boundary_schouten: IsoSpectrum<f64>,
    pub second_fund: IsoSpectrum<f64>,
    /// One factor per boundary block, in block order.
    pub boundary_factors: Vec<BoundaryFactor>,
    pub radial: RadialGeometry,
    pub h_k: f64,
    pub s_blocks: IsoSpectrum<f64>,
}

impl GeometryModel {
    /// Position of the collapsing factor.
    pub fn collapsing_factor(&self) -> usize {
        self.boundary_factors
            .iter()
            .position(|f| f.role == FactorRole::Collapsing)
            .expect("every family has a collapsing factor")
    }

    /// The same geometry with the interior metric scaled by e^{2c}.
    pub fn dilated(&self, c: f64) -> GeometryModel {
        let k = self.spec.k as f64;
        let by = |p: f64| (p * c).exp();
        let mut out = self.clone();
        for f in &mut out.boundary_factors {
            f.scale *= by(1.0);
        }
        out.interior_schouten = self.interior_schouten.map(|v| v * by(-2.0));
        out.interior_newton = self.interior_newton.map(|v| v * by(-2.0 * (k - 1.0)));
        out.boundary_schouten = self.boundary_schouten.map(|v| v * by(-2.0));
        out.second_fund = self.second_fund.map(|v| v * by(-1.0));
        out.h_k = self.h_k * by(-(2.0 * k - 1.0));
        out.s_blocks = self.s_blocks.map(|v| v * by(-(2.0 * k - 3.0)));
        out.radial.a *= by(-2.0 * (k - 1.0));
        out.radial.t *= by(-2.0 * (k - 1.0));
        out.radial.length_scale *= by(1.0);
        out
    }

    pub fn spectrum_label(&self) -> String {
        self.boundary_factors
            .iter()
            .filter(|f| !matches!(f.spectrum.source, SpectrumSource::ClosedFormSphere { .. }))
            .map(|f| f.spectrum.label())
            .next()
            .unwrap_or_else(|| "closed_form_sphere".into())
    }
}

/// Default spectrum for the factor without a closed form.
pub fn default_factor_spectrum(kind: FamilyKind, m: usize) -> Result<Option<FactorSpectrum>> {
    match kind {
        FamilyKind::SphereHyperbolic => Ok(Some(FactorSpectrum::synthetic_weyl(m, 1.0, DEFAULT_WEYL_COUNT)?)),
        FamilyKind::FlatWarped => Ok(Some(FactorSpectrum::flat_torus(vec![2.0 * PI; m - 1])?)),
        FamilyKind::SphereSphere => Ok(None),
    }
}

pub fn build_model(spec: &FamilySpec) -> Result<GeometryModel> {
    spec.validate()?;
    let k = spec.k as usize;
    let (n, m) = dims(spec.kind, spec.k, spec.ell, spec.case_index)?;
    let interior = interior_schouten::<f64>(spec.kind, n, m);
    let interior_newton = symalg::newton(k - 1, &interior);
    let curv = curvature_parameter(spec)?;
    let (p_bdry, a_bdry) = boundary_blocks::<f64>(spec.kind, n, m, &curv);
    let inv = boundary::boundary_invariants(k, &p_bdry, &a_bdry)?;
    let free = match &spec.factor_spectrum {
        Some(s) => Some(s.clone()),
        None => default_factor_spectrum(spec.kind, m)?,
    };
    let eps = spec.param;
    let (factors, radial) = match spec.kind {
        FamilyKind::SphereHyperbolic => {
            let hyper = free.expect("default exists");
            if let SpectrumSource::ClosedFormSphere { .. } = hyper.source {
                return Err(Error::Family("hyperbolic factor cannot carry a sphere spectrum".into()));
            }
            (
                vec![
                    BoundaryFactor {
                        name: format!("S^{n} (cap boundary)"),
                        role: FactorRole::Collapsing,
                        spectrum: FactorSpectrum::sphere(n, 1.0),
                        scale: eps.sin(),
                    },
                    BoundaryFactor {
                        name: format!("H^{m}"),
                        role: FactorRole::Transverse,
                        spectrum: hyper,
                        scale: 1.0,
                    },
                ],
                RadialGeometry {
                    kind: RadialKind::Cap { n },
                    a: interior_newton.blocks[0].value,
                    t: interior_newton.blocks[1].value,
                    domain_end: eps,
                    length_scale: 1.0,
                },
            )
        }
        FamilyKind::SphereSphere => (
            vec![
                BoundaryFactor {
                    name: format!("S^{n}"),
                    role: FactorRole::Transverse,
                    spectrum: FactorSpectrum::sphere(n, 1.0),
                    scale: 1.0,
                },
                BoundaryFactor {
                    name: format!("S^{m} (geodesic sphere)"),
                    role: FactorRole::Collapsing,
                    spectrum: FactorSpectrum::sphere(m, 1.0),
                    scale: eps.sinh(),
                },
            ],
            RadialGeometry {
                kind: RadialKind::Ball { m },
                a: interior_newton.blocks[1].value,
                t: interior_newton.blocks[0].value,
                domain_end: eps,
                length_scale: 1.0,
            },
        ),
        FamilyKind::FlatWarped => {
            let prof = FlatProfiles::new(m)?;
            let fiber = free.expect("default exists");
            (
                vec![
                    BoundaryFactor {
                        name: format!("S^{n}"),
                        role: FactorRole::Transverse,
                        spectrum: FactorSpectrum::sphere(n, 1.0),
                        scale: 1.0,
                    },
                    BoundaryFactor {
                        name: "S^1".into(),
                        role: FactorRole::Collapsing,
                        spectrum: FactorSpectrum::sphere(1, 1.0),
                        scale: prof.ln_f(eps).exp(),
                    },
                    BoundaryFactor {
                        name: format!("F^{}", m - 1),
                        role: FactorRole::Warped,
                        spectrum: fiber,
                        scale: prof.ln_psi(eps).exp(),
                    },
                ],
                RadialGeometry {
                    kind: RadialKind::Flat { m },
                    a: interior_newton.blocks[1].value,
                    t: interior_newton.blocks[0].value,
                    domain_end: eps,
                    length_scale: 1.0,
                },
            )
        }
    };
    Ok(GeometryModel {
        spec: spec.clone(),
        n,
        m,
        n_boundary: n + m,
        interior_schouten: interior,
        interior_newton,
        boundary_schouten: p_bdry,
        second_fund: a_bdry,
        boundary_factors: factors,
        radial,
        h_k: inv.h_k,
        s_blocks: inv.s_blocks,
    })
}
