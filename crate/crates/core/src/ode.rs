//! Adaptive Dormand-Prince 5(4) integrator with dense output, for small
//! fixed-size systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Shampine's dense output coefficients
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug)]
pub struct Options<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    pub max_steps: usize,
    /// Initial step as a fraction of the interval.
    pub first_step: f64,
}

impl<const N: usize> Options<N> {
    pub fn new(rtol: f64, atol: [f64; N]) -> Self {
        Options { rtol, atol, max_steps: 2_000_000, first_step: 1e-3 }
    }
}

/// One accepted step with its continuous extension.
pub struct Step<const N: usize> {
    pub s0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn s1(&self) -> f64 {
        self.s0 + self.h
    }

    /// Dense output at `s` inside the step.
    pub fn eval(&self, s: f64) -> [f64; N] {
        let th = (s - self.s0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Outcome<const N: usize> {
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrate y' = f(s, y) from `s0` to `s1` (s1 > s0).
///
/// `observer` sees every accepted step and may rewrite the new state (for
/// example to renormalize a linear system); the derivative is then
/// re-evaluated.
pub fn integrate<const N: usize, F, O>(
    f: F,
    s0: f64,
    y0: [f64; N],
    s1: f64,
    opts: &Options<N>,
    mut observer: O,
) -> Result<Outcome<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    O: FnMut(&Step<N>, &mut [f64; N]),
{
    let span = s1 - s0;
    if !(span > 0.0) {
        return Err(Error::invalid("integration interval must have positive length"));
    }
    let min_h = 1e-14 * span.max(s0.abs()).max(s1.abs()).max(1.0);
    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, &y);
    if !finite(&k1) || !finite(&y) {
        return Err(Error::numerical("non-finite initial state"));
    }
    let mut h = (opts.first_step * span).max(min_h);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut last_rejected = false;
    while s < s1 {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::numerical(format!("step limit {} reached at s = {s}", opts.max_steps)));
        }
        let last = s + h >= s1 || s1 - (s + h) < min_h;
        if last {
            h = s1 - s;
        }
        let k2 = f(s + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(s + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(s + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(s + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(s + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let s_new = if last { s1 } else { s + h };
        let k7 = f(s_new, &y_new);

        let mut err = 0.0;
        let mut ok = finite(&y_new) && finite(&k7);
        if ok {
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol[i] + opts.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            err = (err / N as f64).sqrt();
            ok = err.is_finite();
        }
        if !ok {
            rejected += 1;
            h *= 0.25;
            last_rejected = true;
            if h < min_h {
                return Err(Error::numerical(format!("non-finite right-hand side near s = {s}")));
            }
            continue;
        }
        if err <= 1.0 {
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let step = Step { s0: s, h, rcont };
            let mut y_obs = y_new;
            observer(&step, &mut y_obs);
            s = s_new;
            if y_obs != y_new {
                y = y_obs;
                k1 = f(s, &y);
            } else {
                y = y_new;
                k1 = k7;
            }
            accepted += 1;
            let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h *= fac;
        } else {
            rejected += 1;
            last_rejected = true;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            if h < min_h {
                return Err(Error::numerical(format!("step size underflow near s = {s}")));
            }
        }
    }
    Ok(Outcome { y, accepted, rejected })
}

/// Five-point Gauss-Legendre nodes and weights on [-1, 1].
pub const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = Options::new(1e-10, [1e-14]);
        let out = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 3.0, &opts, |_, _| {}).unwrap();
        assert!((out.y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let opts = Options::new(1e-11, [1e-14; 2]);
        let mut worst = 0.0f64;
        let out = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &opts,
            |st, _| {
                for k in 1..4 {
                    let s = st.s0 + st.h * k as f64 / 4.0;
                    worst = worst.max((st.eval(s)[0] - s.sin()).abs());
                }
            },
        )
        .unwrap();
        assert!((out.y[0] - 10f64.sin()).abs() < 1e-9);
        assert!(worst < 1e-8, "dense output error {worst}");
    }

    #[test]
    fn gauss5_integrates_degree_9() {
        let approx: f64 = GAUSS5.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert!((approx - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_interval() {
        let opts = Options::new(1e-8, [1e-12]);
        assert!(integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], 1.0, &opts, |_, _| {}).is_err());
    }
}
