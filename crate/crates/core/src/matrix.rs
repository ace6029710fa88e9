//! Dense matrices over a [`Ring`] with fraction-free elimination.
//!
//! Entries of Levi-Civita or polynomial type only admit cheap exact division
//! in special cases, so every rank, kernel and determinant routine avoids
//! inverses: elimination is Bareiss-style when exact division is available
//! and plain cross-multiplication otherwise.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{Field, Ring};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S: Ring> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
    zero: S,
}

/// Result of a fraction-free Gauss-Jordan reduction.
#[derive(Clone, Debug)]
pub struct Reduction<S: Ring> {
    /// Reduced matrix: pivot rows first, each pivot column cleared elsewhere.
    pub reduced: Matrix<S>,
    /// `(row, column)` of each pivot, in order.
    pub pivots: Vec<(usize, usize)>,
}

impl<S: Ring> Reduction<S> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Product of the pivots: a non-zero element certifying the rank.
    pub fn certificate(&self) -> S {
        let mut acc = self.reduced.zero.one_like();
        for &(r, c) in &self.pivots {
            acc = acc.times(self.reduced.get(r, c));
        }
        acc
    }
}

impl<S: Ring> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize, proto: &S) -> Self {
        let zero = proto.zero_like();
        Matrix { rows, cols, data: vec![zero.clone(); rows * cols], zero }
    }

    pub fn identity(n: usize, proto: &S) -> Self {
        let mut m = Matrix::zeros(n, n, proto);
        for i in 0..n {
            m.set(i, i, proto.one_like());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>, proto: &S) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect(), zero: proto.zero_like() })
    }

    pub fn from_fn(rows: usize, cols: usize, proto: &S, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data, zero: proto.zero_like() }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<S>], nrows: usize, proto: &S) -> Self {
        Matrix::from_fn(nrows, cols.len(), proto, |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn proto(&self) -> &S {
        &self.zero
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<S> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<S>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn map<T: Ring>(&self, proto: &T, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect(), zero: proto.zero_like() }
    }

    pub fn try_map<T: Ring>(&self, proto: &T, f: impl Fn(&S) -> Result<T>) -> Result<Matrix<T>> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Matrix { rows: self.rows, cols: self.cols, data, zero: proto.zero_like() })
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, &self.zero, |i, j| self.get(j, i).clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Matrix::from_fn(rows.len(), cols.len(), &self.zero, |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn principal(&self, idx: &[usize]) -> Self {
        self.submatrix(idx, idx)
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!("hstack {} vs {} rows", self.rows, other.rows)));
        }
        Ok(Matrix::from_fn(self.rows, self.cols + other.cols, &self.zero, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip(other, |a, b| a.plus(b)))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.zip(other, |a, b| a.minus(b)))
    }

    fn zip(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
            zero: self.zero.clone(),
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(&self.zero, |x| x.times(c))
    }

    pub fn times(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!("product {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut out = Matrix::zeros(self.rows, other.cols, &self.zero);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if is_exact_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if is_exact_zero(b) {
                        continue;
                    }
                    let v = out.get(i, j).plus(&a.times(b));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = self.zero.clone();
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if is_exact_zero(a) || is_exact_zero(x) {
                        continue;
                    }
                    acc = acc.plus(&a.times(x));
                }
                acc
            })
            .collect())
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("power of a non-square matrix".into()));
        }
        let mut acc = Matrix::identity(self.rows, &self.zero);
        for _ in 0..e {
            acc = acc.times(self)?;
        }
        Ok(acc)
    }

    /// `self - c * I`.
    pub fn minus_scalar(&self, c: &S) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("shift of a non-square matrix".into()));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            let v = out.get(i, i).minus(c);
            out.set(i, i, v);
        }
        Ok(out)
    }

    pub fn is_zero_matrix(&self) -> Result<bool> {
        for x in &self.data {
            if !x.try_is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Monic characteristic polynomial `det(X I - A)` by Berkowitz's
    /// division-free algorithm.
    pub fn charpoly(&self) -> Result<Poly<S>> {
        if !self.is_square() {
            return Err(Error::Shape("characteristic polynomial of a non-square matrix".into()));
        }
        let n = self.rows;
        let one = self.zero.one_like();
        if n == 0 {
            return Ok(Poly::constant(one));
        }
        // coefficient vectors run from the leading coefficient downwards
        let mut vec = vec![one.clone(), self.get(n - 1, n - 1).negated()];
        for k in (0..n - 1).rev() {
            let m = n - 1 - k;
            let a = self.get(k, k);
            let r: Vec<S> = (k + 1..n).map(|j| self.get(k, j).clone()).collect();
            let mut v: Vec<S> = (k + 1..n).map(|i| self.get(i, k).clone()).collect();
            let mut t = Vec::with_capacity(m + 2);
            t.push(one.clone());
            t.push(a.negated());
            for _ in 0..m {
                let rv = dot(&r, &v, &self.zero);
                t.push(rv.negated());
                v = (0..m)
                    .map(|i| {
                        let mut acc = self.zero.clone();
                        for (j, vj) in v.iter().enumerate() {
                            let aij = self.get(k + 1 + i, k + 1 + j);
                            if is_exact_zero(aij) || is_exact_zero(vj) {
                                continue;
                            }
                            acc = acc.plus(&aij.times(vj));
                        }
                        acc
                    })
                    .collect();
            }
            let mut next = Vec::with_capacity(m + 2);
            for i in 0..m + 2 {
                let mut acc = self.zero.clone();
                for (j, vj) in vec.iter().enumerate().take(i.min(m) + 1) {
                    let tij = &t[i - j];
                    if is_exact_zero(tij) || is_exact_zero(vj) {
                        continue;
                    }
                    acc = acc.plus(&tij.times(vj));
                }
                next.push(acc);
            }
            vec = next;
        }
        vec.reverse();
        Ok(Poly::new(vec, self.zero.clone()))
    }

    /// Determinant without division.
    pub fn det_division_free(&self) -> Result<S> {
        let p = self.charpoly()?;
        let c0 = p.coeff(0);
        Ok(if self.rows % 2 == 0 { c0 } else { c0.negated() })
    }

    /// Fraction-free Gauss-Jordan reduction.
    pub fn reduce(&self) -> Result<Reduction<S>> {
        match self.reduce_mode(true) {
            Ok(Some(r)) => Ok(r),
            Ok(None) => Ok(self.reduce_mode(false)?.expect("division-free mode always completes")),
            Err(e) => Err(e),
        }
    }

    fn reduce_mode(&self, bareiss: bool) -> Result<Option<Reduction<S>>> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut prev = self.zero.one_like();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut found = None;
            for i in r..self.rows {
                if !m.get(i, c).try_is_zero()? {
                    found = Some(i);
                    break;
                }
            }
            let Some(p) = found else { continue };
            m.swap_rows(r, p);
            let piv = m.get(r, c).clone();
            // fraction-free Gauss-Jordan clears above the pivot as well
            let targets: Vec<usize> = if bareiss { (0..self.rows).filter(|&i| i != r).collect() } else { (r + 1..self.rows).collect() };
            for i in targets {
                if i < r && bareiss {
                    let f = m.get(i, c).clone();
                    for j in 0..self.cols {
                        if j == c {
                            continue;
                        }
                        let v = piv.times(m.get(i, j)).minus(&f.times(m.get(r, j)));
                        match v.div_exact(&prev) {
                            Some(q) => m.set(i, j, q),
                            None => return Ok(None),
                        }
                    }
                    m.set(i, c, self.zero.clone());
                    continue;
                }
                let f = m.get(i, c).clone();
                let f_zero = f.try_is_zero()?;
                if f_zero && !bareiss {
                    continue;
                }
                for j in c + 1..self.cols {
                    let mut v = piv.times(m.get(i, j));
                    if !f_zero {
                        v = v.minus(&f.times(m.get(r, j)));
                    }
                    if bareiss {
                        match v.div_exact(&prev) {
                            Some(q) => v = q,
                            None => return Ok(None),
                        }
                    }
                    m.set(i, j, v);
                }
                m.set(i, c, self.zero.clone());
            }
            if bareiss {
                prev = piv;
            }
            pivots.push((r, c));
            r += 1;
        }
        if bareiss {
            return Ok(Some(Reduction { reduced: m, pivots }));
        }
        // clear above the pivots
        for idx in (0..pivots.len()).rev() {
            let (pr, pc) = pivots[idx];
            let piv = m.get(pr, pc).clone();
            for i in 0..pr {
                let f = m.get(i, pc).clone();
                if f.try_is_zero()? {
                    continue;
                }
                for j in 0..self.cols {
                    let v = piv.times(m.get(i, j)).minus(&f.times(m.get(pr, j)));
                    m.set(i, j, v);
                }
            }
        }
        Ok(Some(Reduction { reduced: m, pivots }))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.reduce()?.rank())
    }

    /// Basis of the right kernel, each vector with entries in the ring.
    pub fn kernel(&self) -> Result<Vec<Vec<S>>> {
        let red = self.reduce()?;
        let pivot_cols: Vec<usize> = red.pivots.iter().map(|&(_, c)| c).collect();
        let mut out = Vec::new();
        for f in 0..self.cols {
            if pivot_cols.contains(&f) {
                continue;
            }
            let mut v = vec![self.zero.clone(); self.cols];
            let first = red.pivots.first().map(|&(r, c)| red.reduced.get(r, c).clone());
            if let Some(p) = first.filter(|p| red.pivots.iter().all(|&(r, c)| red.reduced.get(r, c) == p)) {
                // equal pivots: no cross products needed
                v[f] = p;
                for &(r, c) in &red.pivots {
                    v[c] = red.reduced.get(r, f).negated();
                }
                out.push(simplify_vector(v));
                continue;
            }
            let mut prod_all = self.zero.one_like();
            for &(r, c) in &red.pivots {
                prod_all = prod_all.times(red.reduced.get(r, c));
            }
            v[f] = prod_all;
            for (k, &(r, c)) in red.pivots.iter().enumerate() {
                let u = red.reduced.get(r, f);
                if u.try_is_zero()? {
                    continue;
                }
                let mut others = self.zero.one_like();
                for (l, &(rr, cc)) in red.pivots.iter().enumerate() {
                    if l != k {
                        others = others.times(red.reduced.get(rr, cc));
                    }
                }
                v[c] = u.times(&others).negated();
            }
            out.push(simplify_vector(v));
        }
        Ok(out)
    }

    /// Connected components of the symmetric non-zero pattern; entries whose
    /// vanishing is undecidable count as non-zero.
    pub fn block_components(&self) -> Vec<Vec<usize>> {
        let n = self.rows.min(self.cols);
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !matches!(self.get(i, j).try_is_zero(), Ok(true)) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut index_of = vec![usize::MAX; n];
        for i in 0..n {
            let root = find(&mut parent, i);
            if index_of[root] == usize::MAX {
                index_of[root] = comps.len();
                comps.push(Vec::new());
            }
            comps[index_of[root]].push(i);
        }
        comps
    }
}

/// Divides a vector by its first non-zero entry when that keeps every entry
/// exact, which tames coefficient growth from cross-multiplication.
pub fn simplify_vector<S: Ring>(v: Vec<S>) -> Vec<S> {
    let Some(lead) = v.iter().find(|x| matches!(x.try_is_zero(), Ok(false))).cloned() else {
        return v;
    };
    let mut out = Vec::with_capacity(v.len());
    for x in &v {
        match x.div_exact(&lead) {
            Some(q) => out.push(q),
            None => return v,
        }
    }
    out
}

fn is_exact_zero<S: Ring>(x: &S) -> bool {
    matches!(x.try_is_zero(), Ok(true))
}

pub fn dot<S: Ring>(a: &[S], b: &[S], zero: &S) -> S {
    let mut acc = zero.zero_like();
    for (x, y) in a.iter().zip(b) {
        if is_exact_zero(x) || is_exact_zero(y) {
            continue;
        }
        acc = acc.plus(&x.times(y));
    }
    acc
}

impl<S: Field> Matrix<S> {
    /// Determinant by Gaussian elimination over a field.
    pub fn det(&self) -> Result<S> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = self.zero.one_like();
        for c in 0..n {
            let mut p = None;
            for i in c..n {
                if !m.get(i, c).try_is_zero()? {
                    p = Some(i);
                    break;
                }
            }
            let Some(p) = p else { return Ok(self.zero.clone()) };
            if p != c {
                m.swap_rows(p, c);
                det = det.negated();
            }
            let piv = m.get(c, c).clone();
            det = det.times(&piv);
            let inv = piv.inv()?;
            for i in c + 1..n {
                let f = m.get(i, c).times(&inv);
                if f.try_is_zero()? {
                    continue;
                }
                for j in c..n {
                    let v = m.get(i, j).minus(&f.times(m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = self.hstack(&Matrix::identity(n, &self.zero))?;
        for c in 0..n {
            let mut p = None;
            for i in c..n {
                if !aug.get(i, c).try_is_zero()? {
                    p = Some(i);
                    break;
                }
            }
            let p = p.ok_or_else(|| Error::NotInvertible("singular matrix".into()))?;
            aug.swap_rows(p, c);
            let inv = aug.get(c, c).inv()?;
            for j in 0..2 * n {
                let v = aug.get(c, j).times(&inv);
                aug.set(c, j, v);
            }
            for i in 0..n {
                if i == c {
                    continue;
                }
                let f = aug.get(i, c).clone();
                if f.try_is_zero()? {
                    continue;
                }
                for j in 0..2 * n {
                    let v = aug.get(i, j).minus(&f.times(aug.get(c, j)));
                    aug.set(i, j, v);
                }
            }
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(aug.submatrix(&rows, &cols))
    }

    /// Solves `self * x = b` for square invertible `self`.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        self.inverse()?.apply(b)
    }
}

impl<S: Ring + fmt::Display> fmt::Display for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> =
            (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect()).collect();
        let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
        for row in cells {
            let padded: Vec<String> = row.iter().map(|s| format!("{s:>width$}")).collect();
            writeln!(f, "[ {} ]", padded.join("  "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rint, Rational};

    fn m(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rint(x)).collect()).collect(), &rint(0)).unwrap()
    }

    #[test]
    fn charpoly_of_companion() {
        // companion of X^3 - 2X + 5
        let a = m(&[&[0, 0, -5], &[1, 0, 2], &[0, 1, 0]]);
        let p = a.charpoly().unwrap();
        assert_eq!(p.coeffs(), &[rint(5), rint(-2), rint(0), rint(1)]);
    }

    #[test]
    fn det_agrees() {
        let a = m(&[&[2, 1, 3], &[0, -1, 4], &[5, 2, 1]]);
        assert_eq!(a.det().unwrap(), a.det_division_free().unwrap());
    }

    #[test]
    fn kernel_and_rank() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank().unwrap(), 2);
        let k = a.kernel().unwrap();
        assert_eq!(k.len(), 1);
        assert!(a.apply(&k[0]).unwrap().iter().all(|x| *x == rint(0)));
    }

    #[test]
    fn components_split_blocks() {
        let a = m(&[&[1, 0, 0], &[0, 0, 2], &[0, 3, 0]]);
        assert_eq!(a.block_components(), vec![vec![0], vec![1, 2]]);
    }
}
