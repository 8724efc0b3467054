//! Gamma function, Pochhammer symbol and the Gauss hypergeometric function
//! on the negative real axis.
//!
//! `hyp2f1` is evaluated in three regions:
//!
//! * `z ∈ (-0.5, 0]`: the defining series.
//! * `z ∈ [-4, -0.5]`: Pfaff, `F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1))`.
//! * `z < -4`: the `1/(1-z)` connection formula, two series in `w = 1/(1-z)`.
//!
//! The Pfaff series alone converges like `(z/(z-1))^k`, which needs far more
//! than the 10 000 term budget when `|z|` reaches the thousands (a small gap
//! with a large offset). The connection formula needs `a - b` non-integral;
//! when it is (nearly) integral the Pfaff branch is used instead and may
//! report non-convergence for very negative `z`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::f64::consts::PI;

pub const MAX_TERMS: usize = 10_000;
pub const SERIES_RTOL: f64 = 1e-16;

const PFAFF_BELOW: f64 = -0.5;
const CONNECTION_BELOW: f64 = -4.0;

/// Parameters of `2F1(a, b; c; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for any real x that is not a non-positive integer.
pub(crate) fn gamma_real(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_real(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // t^(x+1/2) e^-t split in two to keep the power in range for large x.
    let h = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * h * (h * (-t).exp()) * acc
}

pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    if x == x.floor() && x <= 171.0 {
        // exact factorials for integer arguments
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    Ok(gamma_real(x))
}

/// Rising factorial `(a)_k = a (a+1) ... (a+k-1)`.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    let mut p = 1.0;
    for i in 0..k {
        p *= a + i as f64;
    }
    p
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-7
}

/// Plain series `sum (a)_k (b)_k / ((c)_k k!) z^k` with the relative tail test.
fn series<S: Scalar>(a: f64, b: f64, c: f64, z: S) -> Result<S> {
    let mut term = S::one();
    let mut sum = S::one();
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term = term * z * ((a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)));
        sum += term;
        if term.re().abs() <= SERIES_RTOL * sum.re().abs() || term.re() == 0.0 {
            // keep the imaginary part honest for complex-step evaluation too
            let tz = term - S::from_f64(term.re());
            let sz = sum - S::from_f64(sum.re());
            if abs_im(tz) <= SERIES_RTOL * (abs_im(sz) + sum.re().abs()) {
                return Ok(sum);
            }
        }
    }
    Err(Error::NonConvergence {
        terms: MAX_TERMS,
        z: z.re(),
    })
}

/// Magnitude of `v - re(v)` as a real number. For `f64` this is zero.
fn abs_im<S: Scalar>(v: S) -> f64 {
    // (v - re v) is purely imaginary; its square is -|im|^2.
    let sq = (v * v).re();
    (-sq).max(0.0).sqrt()
}

/// Precomputed evaluator for a fixed parameter triple.
///
/// The ISSIP evaluates the same three triples at every pair, so the gamma
/// ratios of the connection formula are computed once.
#[derive(Debug, Clone, Copy)]
pub struct Hyp2F1 {
    a: f64,
    b: f64,
    c: f64,
    conn: Option<[f64; 2]>,
}

impl Hyp2F1 {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if is_nonpositive_integer(c) {
            return Err(Error::Domain(format!("c = {c} is a non-positive integer")));
        }
        let conn = if near_integer(a - b)
            || is_nonpositive_integer(a)
            || is_nonpositive_integer(b)
            || is_nonpositive_integer(c - a)
            || is_nonpositive_integer(c - b)
        {
            None
        } else {
            let gc = gamma_real(c);
            Some([
                gc * gamma_real(b - a) / (gamma_real(b) * gamma_real(c - a)),
                gc * gamma_real(a - b) / (gamma_real(a) * gamma_real(c - b)),
            ])
        };
        Ok(Hyp2F1 { a, b, c, conn })
    }

    pub fn params(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    pub fn eval<S: Scalar>(&self, z: S) -> Result<S> {
        let zr = z.re();
        if !(zr <= 0.0) {
            return Err(Error::Domain(format!("hyp2f1 requires z <= 0, got {zr}")));
        }
        if zr > PFAFF_BELOW {
            self.direct(z)
        } else if zr >= CONNECTION_BELOW || self.conn.is_none() {
            self.pfaff(z)
        } else {
            self.connection(z)
        }
    }

    pub(crate) fn direct<S: Scalar>(&self, z: S) -> Result<S> {
        series(self.a, self.b, self.c, z)
    }

    pub(crate) fn pfaff<S: Scalar>(&self, z: S) -> Result<S> {
        let one_minus = S::one() - z;
        let w = z / (z - S::one());
        Ok(one_minus.powf(-self.a) * series(self.a, self.c - self.b, self.c, w)?)
    }

    pub(crate) fn connection<S: Scalar>(&self, z: S) -> Result<S> {
        let [ca, cb] = self.conn.ok_or_else(|| {
            Error::Domain("connection formula needs non-integral a - b".into())
        })?;
        let (a, b, c) = (self.a, self.b, self.c);
        let one_minus = S::one() - z;
        let w = one_minus.recip();
        let fa = series(a, c - b, a - b + 1.0, w)?;
        let fb = series(b, c - a, b - a + 1.0, w)?;
        Ok(one_minus.powf(-a) * fa * ca + one_minus.powf(-b) * fb * cb)
    }
}

pub fn hyp2f1(p: Hyp2F1Params) -> Result<f64> {
    if !p.z.is_finite() || !p.a.is_finite() || !p.b.is_finite() || !p.c.is_finite() {
        return Err(Error::Domain("hyp2f1 arguments must be finite".into()));
    }
    Hyp2F1::new(p.a, p.b, p.c)?.eval(p.z)
}
