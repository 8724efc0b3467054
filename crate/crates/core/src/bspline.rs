//! B-spline basis functions on clamped knot vectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    degree: usize,
    knots: Vec<f64>,
}

/// Active basis functions at one parameter value.
///
/// `ders[k][j]` is the k-th derivative of basis function `first + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValues {
    pub first: usize,
    pub ders: Vec<Vec<f64>>,
}

impl BSplineBasis {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if degree < 1 {
            return Err(Error::Domain("degree must be at least 1".into()));
        }
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::Domain(format!(
                "need at least {} knots for degree {degree}",
                2 * (degree + 1)
            )));
        }
        if knots.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::Domain("knot vector must be non-decreasing".into()));
        }
        let n = knots.len();
        let clamped = knots[..=degree].iter().all(|&k| k == knots[0])
            && knots[n - degree - 1..].iter().all(|&k| k == knots[n - 1]);
        if !clamped || knots[0] == knots[n - 1] {
            return Err(Error::Domain("knot vector must be clamped (open)".into()));
        }
        Ok(BSplineBasis { degree, knots })
    }

    /// Open uniform knots on `[0, 1]` for `n_functions` functions.
    pub fn clamped_uniform(degree: usize, n_functions: usize) -> Result<Self> {
        if n_functions < degree + 1 {
            return Err(Error::Domain(format!(
                "need at least {} control points for degree {degree}",
                degree + 1
            )));
        }
        let n_el = n_functions - degree;
        let mut knots = vec![0.0; degree + 1];
        for i in 1..n_el {
            knots.push(i as f64 / n_el as f64);
        }
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn num_functions(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Non-empty knot spans as `(start, end)` pairs.
    pub fn elements(&self) -> Vec<(f64, f64)> {
        self.knots
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Averaged knots; control points placed there reproduce linear maps exactly.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.num_functions())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    fn find_span(&self, xi: f64) -> usize {
        let n = self.num_functions();
        if xi >= self.knots[n] {
            return n - 1;
        }
        let (mut lo, mut hi) = (self.degree, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if xi < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Values and derivatives up to `order` of the `p+1` active functions.
    pub fn eval(&self, xi: f64, order: usize) -> Result<BasisValues> {
        let (lo, hi) = self.domain();
        let tol = 1e-12 * (hi - lo);
        if !(xi >= lo - tol && xi <= hi + tol) {
            return Err(Error::OutOfRange(format!("xi = {xi} outside [{lo}, {hi}]")));
        }
        let xi = xi.clamp(lo, hi);
        let p = self.degree;
        let span = self.find_span(xi);
        let u = &self.knots;

        // Cox-de Boor table with derivatives (Piegl & Tiller A2.3).
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = xi - u[span + 1 - j];
            right[j] = u[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let nd = order.min(p);
        let mut ders = vec![vec![0.0; p + 1]; order + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nd {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for k in 1..=nd {
            for v in ders[k].iter_mut() {
                *v *= fac;
            }
            fac *= (p - k) as f64;
        }
        Ok(BasisValues {
            first: span - p,
            ders,
        })
    }
}
