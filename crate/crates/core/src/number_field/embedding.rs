//! Floating-point root isolation used only to propose candidates that are
//! verified exactly afterwards.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use super::{NFElem, NumberField};
use crate::poly::Poly;
use crate::scalar::Rational;

/// All complex roots of a polynomial (coefficients from degree 0 upwards)
/// by the Durand-Kerner iteration.
pub(crate) fn complex_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * z + k);
    let radius = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius.min(2.0)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-12, 0.0);
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    // Newton polish
    let dcoef: Vec<Complex64> = (1..=n).map(|k| monic[k] * k as f64).collect();
    let deval = |x: Complex64| dcoef.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * x + k);
    for zi in &mut z {
        for _ in 0..5 {
            let d = deval(*zi);
            if d.norm() == 0.0 {
                break;
            }
            *zi -= eval(*zi) / d;
        }
    }
    z
}

/// Continued-fraction reconstruction with bounded denominator.
pub(crate) fn rationalize(x: f64, max_den: i64) -> Option<Rational> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= 1e-9 * (1.0 + x.abs()) {
            return Some(Rational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 != 0 && ((h1 as f64 / k1 as f64) - x).abs() <= 1e-9 * (1.0 + x.abs()) {
        Some(Rational::new(BigInt::from(h1), BigInt::from(k1)))
    } else {
        None
    }
}

const MAX_COMBINATIONS: usize = 200_000;

/// Candidate roots in `K` of a square-free polynomial over `K`.
pub(crate) fn candidates(p: &Poly<NFElem>, field: &Arc<NumberField>) -> Vec<NFElem> {
    let n = field.degree();
    let per_embedding: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let c: Vec<Complex64> = p.coeffs().iter().map(|x| x.embed(j)).collect();
            complex_roots(&c)
        })
        .collect();
    let mut out = Vec::new();
    if n == 1 {
        for z in &per_embedding[0] {
            if z.im.abs() <= 1e-7 * (1.0 + z.re.abs()) {
                if let Some(q) = rationalize(z.re, 1_000_000) {
                    out.push(NFElem::from_rational(field, q));
                }
            }
        }
        return out;
    }
    let thetas = field.embeddings();
    // Vandermonde system V x = z with V[j][i] = theta_j^i
    let vand: Vec<Vec<Complex64>> = thetas.iter().map(|t| (0..n).map(|i| t.powu(i as u32)).collect()).collect();
    let Some(vinv) = invert_complex(&vand) else { return out };
    let d = per_embedding[0].len();
    let total = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    let limit = total.min(MAX_COMBINATIONS);
    let mut idx = vec![0usize; n];
    for _ in 0..limit {
        let z: Vec<Complex64> = (0..n).map(|j| per_embedding[j][idx[j]]).collect();
        let x: Vec<Complex64> =
            (0..n).map(|i| (0..n).fold(Complex64::new(0.0, 0.0), |acc, j| acc + vinv[i][j] * z[j])).collect();
        if x.iter().all(|c| c.im.abs() <= 1e-6 * (1.0 + c.re.abs())) {
            let coords: Option<Vec<Rational>> = x.iter().map(|c| rationalize(c.re, 1_000_000)).collect();
            if let Some(coords) = coords {
                if let Ok(e) = NFElem::new(field, coords) {
                    out.push(e);
                }
            }
        }
        // odometer
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < d {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    out
}

fn invert_complex(m: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Complex64::one() } else { Complex64::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].norm().total_cmp(&a[y][c].norm()))?;
        if a[p][c].norm() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        let inv = Complex64::one() / a[c][c];
        for v in a[c].iter_mut() {
            *v *= inv;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                if f.norm() != 0.0 {
                    let row_c = a[c].clone();
                    for (v, rc) in a[i].iter_mut().zip(row_c) {
                        *v -= f * rc;
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn roots_of_unity() {
        let r = complex_roots(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        for z in r {
            assert!((z.powu(3) - Complex64::one()).norm() < 1e-10);
        }
    }

    #[test]
    fn rational_reconstruction() {
        assert_eq!(rationalize(0.375, 1000), Some(rat(3, 8)));
        assert_eq!(rationalize(-9.0, 1000), Some(rat(-9, 1)));
    }
}
