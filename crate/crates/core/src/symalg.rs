//! Elementary symmetric functions, Newton tensors and their polarizations on
//! block-diagonal ("iso-spectral") data, plus a brute-force Kronecker-delta
//! oracle for small dense inputs.
//!
//! Everything is generic over [`Scalar`] so the same code runs in exact
//! rational arithmetic and in `f64`.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign band used when comparing floats against zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

/// Field operations shared by exact rationals and floats.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn from_rational(v: &BigRational) -> Self;
    /// Sign relative to zero; floats use a band of [`FLOAT_ZERO_TOL`].
    fn sign(&self) -> Ordering;
    fn to_f64(&self) -> f64;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn powi(&self, e: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
    }
    fn from_rational(v: &BigRational) -> Self {
        ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
    }
    fn sign(&self) -> Ordering {
        if self.abs() <= FLOAT_ZERO_TOL {
            Ordering::Equal
        } else if *self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
    fn from_rational(v: &BigRational) -> Self {
        v.clone()
    }
    fn sign(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Shorthand for an exact rational `num/den`.
pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Binomial coefficient C(n, k); zero when k > n.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Double factorial with the convention (-1)!! = 0!! = 1.
pub fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = n;
    while i > 1 {
        acc *= BigInt::from(i);
        i -= 2;
    }
    acc
}

// ---------------------------------------------------------------------------
// Block spectra
// ---------------------------------------------------------------------------

/// One eigenvalue with its multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block<S> {
    pub value: S,
    pub mult: usize,
}

/// A diagonal endomorphism stored as (eigenvalue, multiplicity) blocks.
///
/// Blocks are kept in the order given; equal values in different blocks are
/// not merged because block position carries geometric meaning (factor).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoSpectrum<S> {
    pub blocks: Vec<Block<S>>,
}

impl<S: Scalar> IsoSpectrum<S> {
    pub fn new(blocks: Vec<(S, usize)>) -> Self {
        IsoSpectrum {
            blocks: blocks
                .into_iter()
                .map(|(value, mult)| Block { value, mult })
                .collect(),
        }
    }

    /// The identity on `dim` dimensions, as a single block.
    pub fn identity(dim: usize) -> Self {
        Self::new(vec![(S::one(), dim)])
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.mult).sum()
    }

    pub fn mults(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.mult).collect()
    }

    pub fn values(&self) -> Vec<S> {
        self.blocks.iter().map(|b| b.value.clone()).collect()
    }

    pub fn trace(&self) -> S {
        self.blocks.iter().fold(S::zero(), |acc, b| {
            acc + b.value.clone() * S::from_i64(b.mult as i64)
        })
    }

    /// Same spectrum with one index of block `r` removed.
    pub fn without_one(&self, r: usize) -> Self {
        let mut out = self.clone();
        out.blocks[r].mult = out.blocks[r].mult.saturating_sub(1);
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> IsoSpectrum<T> {
        IsoSpectrum {
            blocks: self
                .blocks
                .iter()
                .map(|b| Block { value: f(&b.value), mult: b.mult })
                .collect(),
        }
    }

    pub fn to_f64(&self) -> IsoSpectrum<f64> {
        self.map(|v| v.to_f64())
    }

    /// Blockwise linear combination `alpha * self + beta * other`.
    pub fn combine(&self, alpha: &S, other: &Self, beta: &S) -> Result<Self> {
        check_same_blocks(self, other)?;
        Ok(IsoSpectrum {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| Block {
                    value: alpha.clone() * a.value.clone() + beta.clone() * b.value.clone(),
                    mult: a.mult,
                })
                .collect(),
        })
    }

    /// Per-index values, blocks expanded in order.
    pub fn expanded(&self) -> Vec<S> {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat(b.value.clone()).take(b.mult))
            .collect()
    }
}

fn check_same_blocks<S: Scalar>(b: &IsoSpectrum<S>, c: &IsoSpectrum<S>) -> Result<()> {
    if b.mults() != c.mults() {
        return Err(Error::BlockMismatch { left: b.mults(), right: c.mults() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Generating-function evaluation
// ---------------------------------------------------------------------------

/// k-th elementary symmetric function of the eigenvalues.
///
/// Coefficient of t^k in prod_b (1 + v_b t)^{m_b}; zero when k exceeds the
/// dimension, one when k = 0.
pub fn sigma<S: Scalar>(k: usize, b: &IsoSpectrum<S>) -> S {
    let mut coeffs = vec![S::zero(); k + 1];
    coeffs[0] = S::one();
    for block in &b.blocks {
        let top = block.mult.min(k);
        // factor[i] = C(m, i) v^i
        let mut factor = Vec::with_capacity(top + 1);
        let mut pow = S::one();
        for i in 0..=top {
            factor.push(S::from_bigint(&binomial(block.mult, i)) * pow.clone());
            pow = pow * block.value.clone();
        }
        let mut next = vec![S::zero(); k + 1];
        for (d, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, f) in factor.iter().enumerate() {
                if d + i > k {
                    break;
                }
                next[d + i] = next[d + i].clone() + c.clone() * f.clone();
            }
        }
        coeffs = next;
    }
    coeffs.pop().unwrap_or_else(S::zero)
}

/// Newton tensor T_k as block values: block r carries sigma_k of the spectrum
/// with one index of block r removed.
pub fn newton<S: Scalar>(k: usize, b: &IsoSpectrum<S>) -> IsoSpectrum<S> {
    IsoSpectrum {
        blocks: (0..b.blocks.len())
            .map(|r| Block { value: sigma(k, &b.without_one(r)), mult: b.blocks[r].mult })
            .collect(),
    }
}

/// Polarized elementary symmetric function sigma_{k,l}(B, C): `l` slots of B
/// and `k - l` slots of C.
///
/// On commuting blocks this is the coefficient of s^l t^{k-l} in
/// prod_i (1 + b_i s + c_i t) divided by C(k, l).
pub fn sigma_mixed<S: Scalar>(k: usize, l: usize, b: &IsoSpectrum<S>, c: &IsoSpectrum<S>) -> Result<S> {
    if l > k {
        return Err(Error::invalid(format!("sigma_mixed needs l <= k, got l={l}, k={k}")));
    }
    check_same_blocks(b, c)?;
    let kc = k - l;
    // poly[p][q] multiplies s^p t^q
    let mut poly = vec![vec![S::zero(); kc + 1]; l + 1];
    poly[0][0] = S::one();
    for (bb, cb) in b.blocks.iter().zip(&c.blocks) {
        let m = bb.mult;
        let mut factor = vec![vec![S::zero(); kc + 1]; l + 1];
        let mut bp = S::one();
        for p in 0..=l.min(m) {
            let mut cq = S::one();
            for q in 0..=kc.min(m - p) {
                let coef = binomial(m, p) * binomial(m - p, q);
                factor[p][q] = S::from_bigint(&coef) * bp.clone() * cq.clone();
                cq = cq * cb.value.clone();
            }
            bp = bp * bb.value.clone();
        }
        let mut next = vec![vec![S::zero(); kc + 1]; l + 1];
        for p1 in 0..=l {
            for q1 in 0..=kc {
                if poly[p1][q1].is_zero() {
                    continue;
                }
                for p2 in 0..=(l - p1) {
                    for q2 in 0..=(kc - q1) {
                        if factor[p2][q2].is_zero() {
                            continue;
                        }
                        next[p1 + p2][q1 + q2] = next[p1 + p2][q1 + q2].clone()
                            + poly[p1][q1].clone() * factor[p2][q2].clone();
                    }
                }
            }
        }
        poly = next;
    }
    Ok(poly[l][kc].clone() / S::from_bigint(&binomial(k, l)))
}

/// Polarized Newton tensor T_{k,l}(B, C) as block values ("omit one slot").
pub fn newton_mixed<S: Scalar>(
    k: usize,
    l: usize,
    b: &IsoSpectrum<S>,
    c: &IsoSpectrum<S>,
) -> Result<IsoSpectrum<S>> {
    if l > k {
        return Err(Error::invalid(format!("newton_mixed needs l <= k, got l={l}, k={k}")));
    }
    check_same_blocks(b, c)?;
    let mut blocks = Vec::with_capacity(b.blocks.len());
    for r in 0..b.blocks.len() {
        let value = sigma_mixed(k, l, &b.without_one(r), &c.without_one(r))?;
        blocks.push(Block { value, mult: b.blocks[r].mult });
    }
    Ok(IsoSpectrum { blocks })
}

/// Position relative to the positive k-cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeStatus {
    Inside,
    Boundary,
    Outside,
}

/// Classify against {sigma_1, ..., sigma_k > 0} and its closure.
pub fn in_positive_cone<S: Scalar>(k: usize, b: &IsoSpectrum<S>) -> ConeStatus {
    let mut any_zero = false;
    for j in 1..=k {
        match sigma(j, b).sign() {
            Ordering::Less => return ConeStatus::Outside,
            Ordering::Equal => any_zero = true,
            Ordering::Greater => {}
        }
    }
    if any_zero {
        ConeStatus::Boundary
    } else {
        ConeStatus::Inside
    }
}

// ---------------------------------------------------------------------------
// Dense oracle
// ---------------------------------------------------------------------------

/// Largest dimension the factorial-cost oracle accepts.
pub const ORACLE_MAX_DIM: usize = 7;

/// Dense symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSym<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> DenseSym<S> {
    pub fn new(dim: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::invalid(format!("expected {} entries, got {}", dim * dim, data.len())));
        }
        for i in 0..dim {
            for j in 0..i {
                if (data[i * dim + j].clone() - data[j * dim + i].clone()).sign() != Ordering::Equal {
                    return Err(Error::invalid(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DenseSym { dim, data })
    }

    pub fn from_spectrum(b: &IsoSpectrum<S>) -> Self {
        let diag = b.expanded();
        let dim = diag.len();
        let mut data = vec![S::zero(); dim * dim];
        for (i, v) in diag.into_iter().enumerate() {
            data[i * dim + i] = v;
        }
        DenseSym { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.dim + j]
    }
}

/// sigma_{k,l}(B, C) by literal summation of the generalized Kronecker delta:
/// (1/k!) sum over index tuples of delta^{j_1..j_k}_{i_1..i_k} B..B C..C.
pub fn sigma_oracle<S: Scalar>(k: usize, b: &DenseSym<S>, c: &DenseSym<S>, l: usize) -> Result<S> {
    let mats = oracle_slots(k, l, b, c)?;
    let d = b.dim;
    let mut total = S::zero();
    let mut lower = Vec::with_capacity(k);
    let mut used = vec![false; d];
    for_each_distinct_tuple(d, k, &mut lower, &mut used, &mut |lower: &[usize]| {
        total = total.clone() + permutation_sum(&mats, lower, 0, None);
    });
    Ok(total / S::from_bigint(&factorial(k)))
}

/// T_{k,l}(B, C) by literal summation of the (k+1)-slot Kronecker delta with
/// the first slot left free.
pub fn newton_oracle<S: Scalar>(k: usize, b: &DenseSym<S>, c: &DenseSym<S>, l: usize) -> Result<DenseSym<S>> {
    let mats = oracle_slots(k, l, b, c)?;
    let d = b.dim;
    let kf = S::from_bigint(&factorial(k));
    let mut data = vec![S::zero(); d * d];
    for i in 0..d {
        for j in 0..d {
            let mut total = S::zero();
            let mut lower = vec![i];
            let mut used = vec![false; d];
            used[i] = true;
            for_each_distinct_tuple(d, k + 1, &mut lower, &mut used, &mut |lower: &[usize]| {
                total = total.clone() + permutation_sum(&mats, lower, 1, Some(j));
            });
            data[i * d + j] = total / kf.clone();
        }
    }
    Ok(DenseSym { dim: d, data })
}

fn oracle_slots<'a, S: Scalar>(
    k: usize,
    l: usize,
    b: &'a DenseSym<S>,
    c: &'a DenseSym<S>,
) -> Result<Vec<&'a DenseSym<S>>> {
    if l > k {
        return Err(Error::invalid(format!("oracle needs l <= k, got l={l}, k={k}")));
    }
    if b.dim != c.dim {
        return Err(Error::invalid("oracle matrices differ in dimension"));
    }
    if b.dim > ORACLE_MAX_DIM {
        return Err(Error::invalid(format!(
            "oracle limited to dimension {ORACLE_MAX_DIM}, got {}",
            b.dim
        )));
    }
    Ok((0..k).map(|s| if s < l { b } else { c }).collect())
}

/// Visit every ordered tuple of `len` distinct indices below `d` extending `prefix`.
fn for_each_distinct_tuple(
    d: usize,
    len: usize,
    prefix: &mut Vec<usize>,
    used: &mut [bool],
    visit: &mut dyn FnMut(&[usize]),
) {
    if prefix.len() == len {
        visit(prefix);
        return;
    }
    for i in 0..d {
        if used[i] {
            continue;
        }
        used[i] = true;
        prefix.push(i);
        for_each_distinct_tuple(d, len, prefix, used, visit);
        prefix.pop();
        used[i] = false;
    }
}

/// Sum over permutations pi of the lower tuple of sgn(pi) * prod_s M_s[lower_s][lower_pi(s)].
///
/// `offset` slots at the front carry no matrix; with `free_upper = Some(j)` the
/// first upper index is pinned to `j`.
fn permutation_sum<S: Scalar>(mats: &[&DenseSym<S>], lower: &[usize], offset: usize, free_upper: Option<usize>) -> S {
    let n = lower.len();
    let mut taken = vec![false; n];
    let mut placed: Vec<usize> = Vec::with_capacity(n);
    fn rec<S: Scalar>(
        mats: &[&DenseSym<S>],
        lower: &[usize],
        offset: usize,
        free_upper: Option<usize>,
        pos: usize,
        taken: &mut [bool],
        placed: &mut Vec<usize>,
        acc: S,
        negative: bool,
    ) -> S {
        let n = lower.len();
        if pos == n {
            return if negative { -acc } else { acc };
        }
        let mut total = S::zero();
        for t in 0..n {
            if taken[t] {
                continue;
            }
            let upper = lower[t];
            let factor = if pos < offset {
                match free_upper {
                    Some(j) if upper != j => continue,
                    _ => S::one(),
                }
            } else {
                mats[pos - offset].get(lower[pos], upper).clone()
            };
            if factor.is_zero() {
                continue;
            }
            let inversions = placed.iter().filter(|&&p| p > t).count();
            taken[t] = true;
            placed.push(t);
            total = total
                + rec(
                    mats,
                    lower,
                    offset,
                    free_upper,
                    pos + 1,
                    taken,
                    placed,
                    acc.clone() * factor,
                    negative ^ (inversions % 2 == 1),
                );
            placed.pop();
            taken[t] = false;
        }
        total
    }
    rec(mats, lower, offset, free_upper, 0, &mut taken, &mut placed, S::one(), false)
}
