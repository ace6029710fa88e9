//! Irreducibility over Q for small degrees: factor-degree patterns modulo
//! primes, then rational-root and Kronecker searches for whatever degrees
//! the patterns cannot exclude.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{Rational, Ring};

pub const IRREDUCIBILITY_CHECK_LIMIT: usize = 24;

const KRONECKER_BUDGET: u64 = 400_000;

/// Fails with [`Error::Reducible`] when a factor is found.
pub(crate) fn check(monic: &[Rational]) -> Result<()> {
    let n = monic.len() - 1;
    if n <= 1 {
        return Ok(());
    }
    let g = integral_monic(monic);
    if g[0].is_zero() {
        return Err(Error::Reducible("X divides the minimal polynomial".into()));
    }
    let possible = modular_degree_sets(&g);
    for d in 1..=n / 2 {
        if !possible[d] {
            continue;
        }
        if d == 1 {
            if let Some(r) = integer_root(&g) {
                return Err(Error::Reducible(format!("rational root {r} after rescaling")));
            }
        } else if let Some(h) = kronecker_factor(&g, d)? {
            return Err(Error::Reducible(format!("factor of degree {} found", h.len() - 1)));
        }
    }
    Ok(())
}

/// `D^n f(X/D)` with integer coefficients.
fn integral_monic(f: &[Rational]) -> Vec<BigInt> {
    let n = f.len() - 1;
    let d = f.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    (0..=n)
        .map(|i| {
            let scaled = &f[i] * Rational::from_integer(num_traits::pow(d.clone(), n - i));
            scaled.to_integer()
        })
        .collect()
}

const PRIMES: [u64; 40] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179,
];

/// `possible[d]` is false when no factor of degree `d` can exist.
fn modular_degree_sets(g: &[BigInt]) -> Vec<bool> {
    let n = g.len() - 1;
    let mut possible = vec![true; n + 1];
    for &p in &PRIMES {
        let fp: Vec<u64> = g.iter().map(|c| c.mod_floor(&BigInt::from(p)).to_u64().unwrap_or(0)).collect();
        let Some(degs) = ddf(&fp, p) else { continue };
        let mut sums = vec![false; n + 1];
        sums[0] = true;
        for d in degs {
            for s in (d..=n).rev() {
                if sums[s - d] {
                    sums[s] = true;
                }
            }
        }
        for d in 0..=n {
            possible[d] &= sums[d];
        }
        if (1..n).all(|d| !possible[d]) {
            break;
        }
    }
    possible
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
    if a.is_empty() {
        a.push(0);
    }
    a
}

fn deg(a: &[u64]) -> Option<usize> {
    if a.len() == 1 && a[0] == 0 {
        None
    } else {
        Some(a.len() - 1)
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = deg(b).expect("non-zero divisor");
    let inv = inv_mod(b[db], p);
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let c = r[dr] * inv % p;
        for i in 0..=db {
            let idx = dr - db + i;
            r[idx] = (r[idx] + p - c * b[i] % p) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_div(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = deg(b).expect("non-zero divisor");
    let inv = inv_mod(b[db], p);
    let mut q = vec![0u64; a.len().saturating_sub(db).max(1)];
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let c = r[dr] * inv % p;
        q[dr - db] = c;
        for i in 0..=db {
            let idx = dr - db + i;
            r[idx] = (r[idx] + p - c * b[i] % p) % p;
        }
        r = trim(r);
    }
    trim(q)
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    poly_rem(&trim(out), m, p)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while deg(&b).is_some() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Factor degrees of a square-free polynomial mod `p`, or `None` when the
/// reduction is not square-free or drops degree.
fn ddf(f: &[u64], p: u64) -> Option<Vec<usize>> {
    let f = trim(f.to_vec());
    let n = deg(&f)?;
    if n + 1 != f.len() || f[n] == 0 {
        return None;
    }
    let df: Vec<u64> = (1..=n).map(|i| f[i] * (i as u64 % p) % p).collect();
    let g = poly_gcd(&f, &trim(df), p);
    if deg(&g) != Some(0) {
        return None;
    }
    let mut rem = f.clone();
    let mut h = vec![0u64, 1];
    let mut degs = Vec::new();
    let mut k = 1;
    loop {
        let dr = deg(&rem).unwrap_or(0);
        if dr == 0 {
            break;
        }
        if 2 * k > dr {
            degs.push(dr);
            break;
        }
        // h <- h^p mod rem
        let mut acc = vec![1u64];
        let mut base = poly_rem(&h, &rem, p);
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mul_mod(&acc, &base, &rem, p);
            }
            base = poly_mul_mod(&base, &base, &rem, p);
            e >>= 1;
        }
        h = acc;
        let mut hx = h.clone();
        hx.resize(hx.len().max(2), 0);
        hx[1] = (hx[1] + p - 1) % p;
        let g = poly_gcd(&rem, &trim(hx), p);
        if let Some(dg) = deg(&g) {
            if dg > 0 {
                degs.extend(std::iter::repeat_n(k, dg / k));
                rem = poly_div(&rem, &g, p);
                h = poly_rem(&h, &rem, p);
            }
        }
        k += 1;
    }
    Some(degs)
}

fn eval_int(g: &[BigInt], x: &BigInt) -> BigInt {
    g.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs();
    let m = n.to_u64()?;
    if m > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= m {
        if m % d == 0 {
            out.push(BigInt::from(d));
            if d * d != m {
                out.push(BigInt::from(m / d));
            }
        }
        d += 1;
    }
    out.sort();
    Some(out)
}

fn integer_root(g: &[BigInt]) -> Option<BigInt> {
    let divs = divisors(&g[0])?;
    for d in divs {
        for s in [d.clone(), -d] {
            if eval_int(g, &s).is_zero() {
                return Some(s);
            }
        }
    }
    None
}

/// Kronecker's method for a monic factor of degree `d`.
fn kronecker_factor(g: &[BigInt], d: usize) -> Result<Option<Vec<Rational>>> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut x = 0i64;
    while points.len() <= d {
        let xb = BigInt::from(x);
        let v = eval_int(g, &xb);
        if v.is_zero() {
            return Ok(Some(vec![Rational::from_integer(-xb), Rational::one()]));
        }
        points.push(xb);
        values.push(v);
        x = if x > 0 { -x } else { 1 - x };
    }
    let mut divs = Vec::new();
    let mut total: u64 = 1;
    for v in &values {
        let ds = divisors(v).ok_or_else(|| {
            Error::InvalidField("irreducibility undecided: values too large; attest irreducibility".into())
        })?;
        total = total.saturating_mul(2 * ds.len() as u64);
        divs.push(ds);
    }
    if total > KRONECKER_BUDGET {
        return Err(Error::InvalidField("irreducibility undecided within search budget; attest irreducibility".into()));
    }
    let zero = Rational::zero();
    let gpoly = Poly::new(g.iter().map(|c| Rational::from_integer(c.clone())).collect(), zero.clone());
    let mut idx = vec![0usize; d + 1];
    let sizes: Vec<usize> = divs.iter().enumerate().map(|(i, ds)| if i == 0 { ds.len() } else { 2 * ds.len() }).collect();
    loop {
        let vals: Vec<Rational> = (0..=d)
            .map(|i| {
                let ds = &divs[i];
                let k = idx[i];
                let v = if i == 0 { ds[k].clone() } else if k < ds.len() { ds[k].clone() } else { -ds[k - ds.len()].clone() };
                Rational::from_integer(v)
            })
            .collect();
        let h = interpolate(&points, &vals);
        if h.degree() == Some(d) && h.coeffs().iter().all(|c| c.is_integer()) {
            let lead = h.leading();
            if lead.abs().is_one() {
                let h = h.scale(&lead);
                if let Some(q) = gpoly.div_exact(&h) {
                    if q.coeffs().iter().all(|c| c.is_integer()) {
                        return Ok(Some(h.coeffs().to_vec()));
                    }
                }
            }
        }
        let mut k = 0;
        while k <= d {
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k > d {
            return Ok(None);
        }
    }
}

fn interpolate(xs: &[BigInt], ys: &[Rational]) -> Poly<Rational> {
    let zero = Rational::zero();
    let mut acc = Poly::zero(&zero);
    for (i, yi) in ys.iter().enumerate() {
        let mut basis = Poly::constant(Rational::one());
        let mut denom = Rational::one();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                let xj = Rational::from_integer(xj.clone());
                basis = basis.times(&Poly::new(vec![-xj.clone(), Rational::one()], zero.clone()));
                denom *= Rational::from_integer(xs[i].clone()) - xj;
            }
        }
        acc = acc.plus(&basis.scale(&(yi / denom)));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rint;

    fn v(c: &[i64]) -> Vec<Rational> {
        c.iter().map(|&x| rint(x)).collect()
    }

    #[test]
    fn cyclotomic_five_irreducible() {
        assert!(check(&v(&[1, 1, 1, 1, 1])).is_ok());
    }

    #[test]
    fn product_of_quadratics_detected() {
        // (X^2 + X + 1)(X^2 + 2)
        assert!(check(&v(&[2, 2, 3, 1, 1])).is_err());
    }

    #[test]
    fn rational_root_detected() {
        assert!(check(&v(&[-8, 0, 0, 1])).is_err());
    }
}
