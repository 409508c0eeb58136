//! Exact rational arithmetic: vectors tagged by lattice side, linear solves,
//! primitive lattice vectors, univariate polynomials with Sturm root
//! isolation, and small integer-lattice utilities.

use std::cmp::Ordering;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Index, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

/// `n/d` as a rational. Panics on `d == 0`.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("cannot parse rational {0:?} (expected \"p\" or \"p/q\")")]
    Parse(String),
    #[error("the zero vector has no primitive representative")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let t = s.trim();
    let bad = || ExactError::Parse(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => BigInt::from_str(t)
            .map(Rational::from_integer)
            .map_err(|_| bad()),
    }
}

/// Marker for one side of a dual pair of lattices.
pub trait Space: Clone + fmt::Debug + Eq + Ord + std::hash::Hash + Send + Sync + 'static {
    type Dual: Space<Dual = Self>;
    const NAME: &'static str;
}

/// The weight lattice side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum M {}
/// The valuation (coweight) lattice side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum N {}

impl Space for M {
    type Dual = N;
    const NAME: &'static str = "M";
}
impl Space for N {
    type Dual = M;
    const NAME: &'static str = "N";
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector<S> {
    coords: Vec<Rational>,
    _space: PhantomData<fn() -> S>,
}

pub type MVec = Vector<M>;
pub type NVec = Vector<N>;

impl<S: Space> Vector<S> {
    pub fn new(coords: Vec<Rational>) -> Self {
        Vector { coords, _space: PhantomData }
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Self::new(v.iter().map(|&x| int(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![Rational::zero(); dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coords[i] = Rational::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coords.iter().map(|x| x * c).collect())
    }

    /// Reinterpret the coordinates on the other side (used for Gram-matrix identifications).
    pub fn retag<T: Space>(&self) -> Vector<T> {
        Vector::new(self.coords.clone())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }

    /// Primitive integer vector on the same ray.
    pub fn primitive(&self) -> Result<Self, ExactError> {
        let p = primitive(&self.coords)?;
        Ok(Self::new(p.into_iter().map(Rational::from_integer).collect()))
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }
}

impl<S> Index<usize> for Vector<S> {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.coords[i]
    }
}

impl<S: Space> Add for &Vector<S> {
    type Output = Vector<S>;
    fn add(self, o: &Vector<S>) -> Vector<S> {
        assert_eq!(self.dim(), o.dim(), "vector dimension mismatch");
        Vector::new(self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect())
    }
}

impl<S: Space> Sub for &Vector<S> {
    type Output = Vector<S>;
    fn sub(self, o: &Vector<S>) -> Vector<S> {
        assert_eq!(self.dim(), o.dim(), "vector dimension mismatch");
        Vector::new(self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect())
    }
}

impl<S: Space> Neg for &Vector<S> {
    type Output = Vector<S>;
    fn neg(self) -> Vector<S> {
        Vector::new(self.coords.iter().map(|a| -a).collect())
    }
}

impl<S: Space> fmt::Debug for Vector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", S::NAME, self)
    }
}

impl<S> fmt::Display for Vector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The natural pairing between a vector and one from the dual lattice.
pub fn pair<S: Space>(a: &Vector<S>, b: &Vector<S::Dual>) -> Rational {
    assert_eq!(a.dim(), b.dim(), "pairing dimension mismatch");
    dot(a.coords(), b.coords())
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator or denominator overflowed f64 on its own
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        let shift = (n - d).clamp(-1000, 1000);
        let scaled = if shift >= 0 {
            x / Rational::from_integer(BigInt::one() << shift as usize)
        } else {
            x * Rational::from_integer(BigInt::one() << (-shift) as usize)
        };
        scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
    })
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

// ---------------------------------------------------------------------------
// Dense linear algebra over Q

/// Reduced row echelon form; returns the reduced rows and pivot columns.
pub fn rref(rows: &[Vec<Rational>], ncols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..ncols {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : rows·x = 0}`.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r[i][f].clone();
            }
            v
        })
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearError {
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("linear system is underdetermined")]
    Underdetermined {
        particular: Vec<Rational>,
        /// A nonzero kernel vector: every `particular + s·direction` solves the system.
        direction: Vec<Rational>,
    },
}

/// Solve `rows·x = rhs` exactly, requiring a unique solution.
pub fn solve_linear(rows: &[Vec<Rational>], rhs: &[Rational]) -> Result<Vec<Rational>, LinearError> {
    assert_eq!(rows.len(), rhs.len(), "rhs length must match row count");
    let ncols = rows.first().map_or(0, Vec::len);
    let aug: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let (red, pivots) = rref(&aug, ncols + 1);
    if pivots.contains(&ncols) {
        return Err(LinearError::Inconsistent);
    }
    let mut x = vec![Rational::zero(); ncols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = red[i][ncols].clone();
    }
    if pivots.len() < ncols {
        let direction = nullspace(rows, ncols).swap_remove(0);
        return Err(LinearError::Underdetermined { particular: x, direction });
    }
    Ok(x)
}

pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &a[c][j] * &f;
                a[i][j] -= t;
            }
        }
    }
    det
}

pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let aug: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            v
        })
        .collect();
    let (red, pivots) = rref(&aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn transpose(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let ncols = m.first().map_or(0, Vec::len);
    (0..ncols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|r| dot(r, v)).collect()
}

// ---------------------------------------------------------------------------
// Primitive vectors

/// The primitive integer vector on the ray through `v`.
pub fn primitive(v: &[Rational]) -> Result<Vec<BigInt>, ExactError> {
    if v.iter().all(Zero::is_zero) {
        return Err(ExactError::ZeroVector);
    }
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    Ok(ints.into_iter().map(|x| x / &g).collect())
}

// ---------------------------------------------------------------------------
// Univariate polynomials

/// Dense univariate polynomial, coefficients from the constant term up.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| int(x)).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `a + b·t`
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(
            (0..n)
                .map(|i| {
                    let a = self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    let b = o.coeffs.get(i).cloned().unwrap_or_else(Rational::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(Rational::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Self {
        let mut c = vec![Rational::zero()];
        c.extend(self.coeffs.iter().enumerate().map(|(i, a)| a / int(i as i64 + 1)));
        Self::new(c)
    }

    /// Euclidean division `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.coeffs.len() - 1;
        let lead_inv = d.leading().recip();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quo = vec![Rational::zero(); r.len() - dd];
        for k in (0..quo.len()).rev() {
            let c = &r[k + dd] * &lead_inv;
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    let t = &c * dj;
                    r[k + j] -= t;
                }
            }
            quo[k] = c;
        }
        r.truncate(dd);
        (Self::new(quo), Self::new(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&self.leading().recip())
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Divides out `f` as many times as it divides exactly; returns the quotient and the count.
    pub fn strip_factor(&self, f: &Self) -> (Self, usize) {
        let mut cur = self.clone();
        let mut k = 0;
        if f.degree().unwrap_or(0) == 0 || cur.is_zero() {
            return (cur, 0);
        }
        loop {
            let (quo, r) = cur.div_rem(f);
            if !r.is_zero() {
                return (cur, k);
            }
            cur = quo;
            k += 1;
        }
    }

    pub fn square_free(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Primitive integer coefficient vector with positive leading coefficient.
    pub fn content_normalized(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return vec![];
        }
        let mut ints = primitive(&self.coeffs).expect("nonzero polynomial");
        if ints.last().is_some_and(|c| c.is_negative()) {
            ints.iter_mut().for_each(|c| *c = -&*c);
        }
        ints
    }

    pub fn sturm_sequence(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                return seq;
            }
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            if r.is_zero() {
                return seq;
            }
            seq.push(r.scale(&-Rational::one()));
        }
    }

    /// Open intervals `(lo, hi)` with rational endpoints that are not roots,
    /// each containing exactly one distinct positive real root.
    pub fn isolate_positive_roots(&self) -> Vec<(Rational, Rational)> {
        if self.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let mut p = self.square_free();
        if p.eval(&Rational::zero()).is_zero() {
            p = p.div_rem(&UniPoly::linear(Rational::zero(), Rational::one())).0;
        }
        if p.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let seq = p.sturm_sequence();
        let lead = p.leading();
        let bound = p.coeffs.iter().map(|c| (c / &lead).abs()).max().unwrap() + Rational::one();
        let mut out = Vec::new();
        let mut stack = vec![(Rational::zero(), bound)];
        while let Some((a, b)) = stack.pop() {
            let count = sign_changes(&seq, &a) - sign_changes(&seq, &b);
            match count.cmp(&1) {
                Ordering::Less => {}
                Ordering::Equal => out.push((a, b)),
                Ordering::Greater => {
                    let mid = split_point(&p, &a, &b);
                    stack.push((mid.clone(), b));
                    stack.push((a, mid));
                }
            }
        }
        out.sort();
        out
    }

    /// Shrink an isolating interval of a simple root to width at most `width`.
    /// Returns `(r, r)` if an exact rational root is hit.
    pub fn refine_root(&self, lo: &Rational, hi: &Rational, width: &Rational) -> (Rational, Rational) {
        let p = self.square_free();
        let (mut a, mut b) = (lo.clone(), hi.clone());
        let sa = p.eval(&a).signum();
        while &b - &a > *width {
            let m = (&a + &b) / int(2);
            let v = p.eval(&m);
            if v.is_zero() {
                return (m.clone(), m);
            }
            if v.signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        (a, b)
    }
}

fn split_point(p: &UniPoly, a: &Rational, b: &Rational) -> Rational {
    let mut m = (a + b) / int(2);
    let mut k = 3;
    while p.eval(&m).is_zero() {
        m = a + (b - a) / int(k);
        k += 1;
    }
    m
}

fn sign_changes(seq: &[UniPoly], x: &Rational) -> usize {
    let signs: Vec<i32> = seq
        .iter()
        .map(|s| s.eval(x))
        .filter(|v| !v.is_zero())
        .map(|v| if v.is_positive() { 1 } else { -1 })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{i}")?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Rational rounding

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued fractions with semiconvergents).
pub fn best_rational(x: f64, max_den: u64) -> Rational {
    assert!(x.is_finite());
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let max_den = max_den as u128;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e30 {
            break;
        }
        let a = a as u128;
        let q2 = a * q1 + q0;
        if q2 > max_den {
            let k = (max_den - q0) / q1;
            let (ps, qs) = (k * p1 + p0, k * q1 + q0);
            let cand_semi = ps as f64 / qs as f64;
            let cand_conv = p1 as f64 / q1 as f64;
            if (cand_semi - x.abs()).abs() < (cand_conv - x.abs()).abs() {
                p1 = ps;
                q1 = qs;
            }
            break;
        }
        let p2 = a * p1 + p0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - v.floor();
        if frac < 1e-18 {
            break;
        }
        v = 1.0 / frac;
    }
    let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -r
    } else {
        r
    }
}

/// The rational with the smallest denominator in the closed interval `[lo, hi]`.
pub fn simplest_rational_in(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi);
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return Rational::zero();
    }
    if hi.is_negative() {
        return -simplest_rational_in(&-hi, &-lo);
    }
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    if &(&fl + Rational::one()) <= hi {
        return fl + Rational::one();
    }
    // lo and hi share the integer part; recurse on reciprocals of the fractional parts
    let inner = simplest_rational_in(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

// ---------------------------------------------------------------------------
// Integer lattices

/// A unimodular integer matrix `u` (rows are basis vectors) whose first row
/// pairs to 1 with the primitive vector `v` and whose other rows pair to 0.
pub fn unimodular_completion(v: &[BigInt]) -> Result<Vec<Vec<BigInt>>, ExactError> {
    let r = v.len();
    if v.iter().all(Zero::is_zero) {
        return Err(ExactError::ZeroVector);
    }
    // Column operations on the row vector w = v·U, tracking U; rows of U^T are the basis.
    let mut w = v.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..r)
        .map(|i| (0..r).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    // u[k] is the k-th column of U stored as a vector in Z^r.
    loop {
        let nz: Vec<usize> = (0..r).filter(|&i| !w[i].is_zero()).collect();
        if nz.len() == 1 {
            break;
        }
        let piv = *nz.iter().min_by_key(|&&i| w[i].abs()).unwrap();
        for &i in &nz {
            if i == piv {
                continue;
            }
            let f = w[i].div_floor(&w[piv]);
            let step = &f * &w[piv];
            w[i] -= step;
            let col_p = u[piv].clone();
            for (x, y) in u[i].iter_mut().zip(&col_p) {
                *x -= &f * y;
            }
        }
    }
    let piv = (0..r).find(|&i| !w[i].is_zero()).unwrap();
    if w[piv].abs() != BigInt::one() {
        // v was not primitive
        return Err(ExactError::ZeroVector);
    }
    if w[piv].is_negative() {
        u[piv].iter_mut().for_each(|x| *x = -&*x);
    }
    let mut rows = vec![u[piv].clone()];
    rows.extend((0..r).filter(|&i| i != piv).map(|i| u[i].clone()));
    Ok(rows)
}

/// Row-style Hermite normal form of an integer matrix of full row rank.
pub fn hermite_normal_form(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut a = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        loop {
            let nz: Vec<usize> = (r..a.len()).filter(|&i| !a[i][c].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| a[i][c].abs()).unwrap();
            a.swap(r, p);
            let mut done = true;
            for i in r + 1..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].div_floor(&a[r][c]);
                let pr = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < a.len() && !a[r][c].is_zero() {
            if a[r][c].is_negative() {
                a[r].iter_mut().for_each(|x| *x = -&*x);
            }
            for i in 0..r {
                let f = a[i][c].div_floor(&a[r][c]);
                if !f.is_zero() {
                    let pr = a[r].clone();
                    for (x, y) in a[i].iter_mut().zip(&pr) {
                        *x -= &f * y;
                    }
                }
            }
            r += 1;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qv(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(n, d)| q(n, d)).collect()
    }

    #[test]
    fn parse_round_trip() {
        for s in ["3", "-7/4", "0", "12345678901234567890/7"] {
            let x = parse_rational(s).unwrap();
            assert_eq!(x.to_string(), s);
        }
        assert_eq!(parse_rational(" 6/4 ").unwrap(), q(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.5").is_err());
    }

    #[test]
    fn primitive_examples() {
        let p = primitive(&qv(&[(1, 2), (3, 4)])).unwrap();
        assert_eq!(p, vec![BigInt::from(2), BigInt::from(3)]);
        let p = primitive(&qv(&[(-3, 1), (6, 1)])).unwrap();
        assert_eq!(p, vec![BigInt::from(-1), BigInt::from(2)]);
        assert_eq!(primitive(&qv(&[(0, 1), (0, 1)])), Err(ExactError::ZeroVector));
    }

    #[test]
    fn inconsistent_systems() {
        let rows = vec![qv(&[(1, 1), (0, 1)]), qv(&[(1, 1), (0, 1)])];
        assert_eq!(solve_linear(&rows, &[int(1), int(2)]), Err(LinearError::Inconsistent));
        let rows = vec![qv(&[(2, 1), (1, 1)]), qv(&[(1, 1), (1, 1)]), qv(&[(0, 1), (1, 1)])];
        assert_eq!(solve_linear(&rows, &[int(2), int(1), int(1)]), Err(LinearError::Inconsistent));
    }

    #[test]
    fn underdetermined_reports_direction() {
        let rows = vec![qv(&[(1, 1), (1, 1)])];
        match solve_linear(&rows, &[int(3)]) {
            Err(LinearError::Underdetermined { particular, direction }) => {
                assert_eq!(dot(&rows[0], &particular), int(3));
                assert_eq!(dot(&rows[0], &direction), int(0));
                assert!(direction.iter().any(|x| !x.is_zero()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn determinant_and_inverse() {
        let m = vec![qv(&[(2, 1), (1, 1)]), qv(&[(1, 1), (1, 1)])];
        assert_eq!(determinant(&m), int(1));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, vec![qv(&[(1, 1), (-1, 1)]), qv(&[(-1, 1), (2, 1)])]);
        assert!(inverse(&[qv(&[(1, 1), (2, 1)]), qv(&[(2, 1), (4, 1)])]).is_none());
    }

    #[test]
    fn isolates_two_rational_roots() {
        let p = UniPoly::new(vec![q(3, 4), int(-2), int(1)]);
        let iv = p.isolate_positive_roots();
        assert_eq!(iv.len(), 2);
        assert!(iv[0].0 < q(1, 2) && q(1, 2) < iv[0].1);
        assert!(iv[1].0 < q(3, 2) && q(3, 2) < iv[1].1);
    }

    #[test]
    fn no_positive_roots() {
        assert!(UniPoly::from_ints(&[1, 1]).isolate_positive_roots().is_empty());
        let g2 = UniPoly::from_ints(&[2376, 9225, 13407, 9357, 3179, 424]);
        assert!(g2.isolate_positive_roots().is_empty());
        // a double root at 2 is reported once
        let d = UniPoly::from_ints(&[-2, 1]).pow(2).mul(&UniPoly::from_ints(&[1, 1]));
        assert_eq!(d.isolate_positive_roots().len(), 1);
    }

    #[test]
    fn refine_hits_exact_root() {
        let p = UniPoly::from_ints(&[-1, 4]);
        let iv = p.isolate_positive_roots();
        let (a, b) = p.refine_root(&iv[0].0, &iv[0].1, &q(1, 1000));
        assert!(a <= q(1, 4) && q(1, 4) <= b);
    }

    #[test]
    fn polynomial_division() {
        let a = UniPoly::from_ints(&[5, 3, 0, 1]);
        let d = UniPoly::from_ints(&[1, 2]);
        let (quo, r) = a.div_rem(&d);
        assert_eq!(quo.mul(&d).add(&r), a);
        assert!(r.degree().unwrap_or(0) == 0);
        let f = UniPoly::from_ints(&[5, 3]);
        let (s, k) = f.pow(3).mul(&a).strip_factor(&f);
        assert_eq!((s, k), (a, 3));
    }

    #[test]
    fn rational_rounding() {
        assert_eq!(best_rational(std::f64::consts::PI, 1000), q(355, 113));
        assert_eq!(best_rational(0.25, 1_000_000), q(1, 4));
        assert_eq!(best_rational(-1.0 / 3.0, 1_000_000), q(-1, 3));
        assert_eq!(simplest_rational_in(&q(3, 10), &q(4, 10)), q(1, 3));
        assert_eq!(simplest_rational_in(&q(1, 5), &q(1, 5)), q(1, 5));
        assert_eq!(simplest_rational_in(&q(-7, 5), &q(-6, 5)), q(-4, 3));
    }

    #[test]
    fn completion_is_unimodular() {
        let v: Vec<BigInt> = [6, -10, 15].iter().map(|&x| BigInt::from(x)).collect();
        let u = unimodular_completion(&v).unwrap();
        let dotz = |a: &[BigInt], b: &[BigInt]| a.iter().zip(b).fold(BigInt::zero(), |s, (x, y)| s + x * y);
        assert_eq!(dotz(&u[0], &v), BigInt::one());
        for row in &u[1..] {
            assert!(dotz(row, &v).is_zero());
        }
        let m: Vec<Vec<Rational>> =
            u.iter().map(|r| r.iter().cloned().map(Rational::from_integer).collect()).collect();
        assert_eq!(determinant(&m).abs(), int(1));
    }

    #[test]
    fn hnf_is_canonical() {
        let a = vec![vec![BigInt::from(2), BigInt::from(4)], vec![BigInt::from(1), BigInt::from(3)]];
        let b = vec![vec![BigInt::from(3), BigInt::from(7)], vec![BigInt::from(1), BigInt::from(3)]];
        assert_eq!(hermite_normal_form(&a), hermite_normal_form(&b));
    }
}
