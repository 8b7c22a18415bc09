//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use sigmak_core::symalg::{DenseSym, IsoSpectrum};

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    q(rng.gen_range(-9..=9), rng.gen_range(1..=5))
}

/// Random block spectrum of total dimension `dim`.
pub fn random_blocks<R: Rng>(rng: &mut R, dim: usize) -> Vec<usize> {
    let mut mults = Vec::new();
    let mut left = dim;
    while left > 0 {
        let m = rng.gen_range(1..=left);
        mults.push(m);
        left -= m;
    }
    mults
}

pub fn rational_spectrum<R: Rng>(rng: &mut R, mults: &[usize]) -> IsoSpectrum<BigRational> {
    IsoSpectrum::new(mults.iter().map(|&m| (random_rational(rng), m)).collect())
}

pub type Mat = Vec<Vec<BigRational>>;

pub fn identity(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect()
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).fold(BigRational::zero(), |acc, k| acc + a[i][k].clone() * b[k][j].clone()))
                .collect()
        })
        .collect()
}

fn transpose(a: &Mat) -> Mat {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].clone()).collect()).collect()
}

/// Gauss-Jordan inverse; panics on singular input.
fn inverse(a: &Mat) -> Mat {
    let d = a.len();
    let mut m = a.clone();
    let mut inv = identity(d);
    for col in 0..d {
        let piv = (col..d).find(|&r| !m[r][col].is_zero()).expect("nonsingular");
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col].clone();
        for j in 0..d {
            m[col][j] = m[col][j].clone() / p.clone();
            inv[col][j] = inv[col][j].clone() / p.clone();
        }
        for r in 0..d {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..d {
                    m[r][j] = m[r][j].clone() - f.clone() * m[col][j].clone();
                    inv[r][j] = inv[r][j].clone() - f.clone() * inv[col][j].clone();
                }
            }
        }
    }
    inv
}

/// Rational orthogonal matrix from the Cayley transform of a random skew matrix.
pub fn rational_orthogonal<R: Rng>(rng: &mut R, d: usize) -> Mat {
    let mut skew = vec![vec![BigRational::zero(); d]; d];
    for i in 0..d {
        for j in 0..i {
            let v = q(rng.gen_range(-2..=2), rng.gen_range(1..=2));
            skew[i][j] = v.clone();
            skew[j][i] = -v;
        }
    }
    let id = identity(d);
    let minus: Mat = (0..d).map(|i| (0..d).map(|j| id[i][j].clone() - skew[i][j].clone()).collect()).collect();
    let plus: Mat = (0..d).map(|i| (0..d).map(|j| id[i][j].clone() + skew[i][j].clone()).collect()).collect();
    matmul(&minus, &inverse(&plus))
}

/// Q diag(spectrum) Q^T as a dense symmetric matrix.
pub fn conjugated(qm: &Mat, b: &IsoSpectrum<BigRational>) -> DenseSym<BigRational> {
    let diag = b.expanded();
    let d = diag.len();
    let mut dm = vec![vec![BigRational::zero(); d]; d];
    for (i, v) in diag.into_iter().enumerate() {
        dm[i][i] = v;
    }
    let full = matmul(&matmul(qm, &dm), &transpose(qm));
    DenseSym::new(d, full.into_iter().flatten().collect()).unwrap()
}

pub fn dense_entries(m: &DenseSym<BigRational>) -> Mat {
    let d = m.dim();
    (0..d).map(|i| (0..d).map(|j| m.get(i, j).clone()).collect()).collect()
}

pub fn conjugate_dense(qm: &Mat, m: &Mat) -> Mat {
    matmul(&matmul(qm, m), &transpose(qm))
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
