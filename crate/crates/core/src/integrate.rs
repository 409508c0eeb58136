//! Exact integration of polynomials over rational polytopes and cones.
//!
//! Polytopes are triangulated by a pulling triangulation of the cone over
//! their vertices; each simplex is integrated in barycentric coordinates with
//! the Dirichlet formula. Cone Laplace integrals use the same triangulation
//! and the closed form for simplicial cones.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::cones::{double_description, PolyCone};
use crate::exactnum::{determinant, pair, rank, Rational, Vector, M, N};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MultiPolynomial {
    pub fn zero(nvars: usize) -> Self {
        MultiPolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    /// `c0 + sum coeffs[i] x_i`
    pub fn linear(coeffs: &[Rational], c0: Rational) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c0);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.nvars, Rational::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.nvars);
        self.terms.iter().fold(Rational::zero(), |acc, (e, c)| {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            acc + t
        })
    }

    /// Substitute `x_i -> images[i]`, where the images share a common variable set.
    pub fn compose(&self, images: &[MultiPolynomial]) -> MultiPolynomial {
        assert_eq!(images.len(), self.nvars);
        let m = images.first().map_or(0, |p| p.nvars);
        // cache powers of each image
        let maxdeg: Vec<u32> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<MultiPolynomial>> = images
            .iter()
            .zip(&maxdeg)
            .map(|(img, &d)| {
                let mut v = vec![MultiPolynomial::constant(m, Rational::one())];
                for k in 1..=d as usize {
                    let next = v[k - 1].mul(img);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = MultiPolynomial::zero(m);
        for (e, c) in &self.terms {
            let mut t = MultiPolynomial::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&powers[i][k as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }
}

impl fmt::Debug for MultiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mon: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
                    .collect();
                if mon.is_empty() {
                    c.to_string()
                } else {
                    format!("{c}*{}", mon.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntegrateError {
    #[error("density has nonpositive total mass {0} on the polytope")]
    NonPositiveMass(Rational),
    #[error("density is not homogeneous")]
    NotHomogeneous,
    #[error("the linear form is not positive on the cone, so the integral diverges")]
    NotReeb,
    #[error("variable count {got} does not match ambient dimension {expected}")]
    Dimension { expected: usize, got: usize },
}

// ---------------------------------------------------------------------------
// Polytopes

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vector<M>>,
}

#[derive(Debug, Clone)]
pub enum Measure {
    /// Lebesgue measure of the ambient coordinates.
    Ambient,
    /// The measure on the hyperplane `<p, xi> = level` with `d(ambient) = d(slice) ^ d<p, xi>`.
    SliceOf { xi: Vector<N>, level: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Integral {
    pub value: Rational,
    /// Set when the polytope is lower-dimensional than the measure expects; the value is then zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub enum SliceResult {
    Bounded(Polytope),
    Unbounded,
}

impl SliceResult {
    pub fn bounded(self) -> Option<Polytope> {
        match self {
            SliceResult::Bounded(p) => Some(p),
            SliceResult::Unbounded => None,
        }
    }
}

fn lift(v: &Vector<M>) -> Vec<Rational> {
    let mut c = v.coords().to_vec();
    c.push(Rational::one());
    c
}

impl Polytope {
    /// Convex hull of the points; only extreme points are kept, in sorted order.
    pub fn new(dim: usize, points: &[Vector<M>]) -> Self {
        let lifted: Vec<Vec<Rational>> = points.iter().map(lift).collect();
        let (facets, eqs) = double_description(dim + 1, &lifted, &[]);
        let (rays, _) = double_description(dim + 1, &facets, &eqs);
        let vertices = rays
            .into_iter()
            .map(|r| {
                let h = r[dim].clone();
                Vector::new(r[..dim].iter().map(|x| x / &h).collect())
            })
            .collect();
        Polytope { dim, vertices }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector<M>] {
        &self.vertices
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        let lifted: Vec<Vec<Rational>> = self.vertices.iter().map(lift).collect();
        rank(&lifted, self.dim + 1).saturating_sub(1)
    }

    /// Simplices of a pulling triangulation, as lists of vertex indices.
    pub fn triangulation(&self) -> Vec<Vec<usize>> {
        let lifted: Vec<Vec<Rational>> = self.vertices.iter().map(lift).collect();
        triangulate_cone(&lifted)
    }

    pub fn integrate(&self, f: &MultiPolynomial, measure: &Measure) -> Result<Integral, IntegrateError> {
        let m = self.moments(f, measure, 0)?;
        Ok(Integral { value: m.mass, degenerate: m.degenerate })
    }

    /// Integrals of `f`, `x_j f` and (for `order >= 2`) `x_j x_k f`.
    pub fn moments(&self, f: &MultiPolynomial, measure: &Measure, order: u32) -> Result<Moments, IntegrateError> {
        if f.nvars() != self.dim {
            return Err(IntegrateError::Dimension { expected: self.dim, got: f.nvars() });
        }
        let expected_dim = match measure {
            Measure::Ambient => self.dim,
            Measure::SliceOf { .. } => self.dim - 1,
        };
        if self.affine_dim() < expected_dim || self.vertices.is_empty() {
            return Ok(Moments::zero(self.dim, true));
        }
        let simplices = self.triangulation();
        let parts: Vec<Moments> = simplices
            .par_iter()
            .map(|s| {
                let verts: Vec<&Vector<M>> = s.iter().map(|&i| &self.vertices[i]).collect();
                simplex_moments(&verts, f, measure, order)
            })
            .collect();
        let mut total = Moments::zero(self.dim, false);
        for p in parts {
            total.accumulate(&p);
        }
        Ok(total)
    }

    pub fn weighted_barycenter(&self, density: &MultiPolynomial, measure: &Measure) -> Result<Vector<M>, IntegrateError> {
        let m = self.moments(density, measure, 1)?;
        if !m.mass.is_positive() {
            return Err(IntegrateError::NonPositiveMass(m.mass));
        }
        Ok(Vector::new(m.first.iter().map(|x| x / &m.mass).collect()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Moments {
    pub mass: Rational,
    pub first: Vec<Rational>,
    pub second: Vec<Vec<Rational>>,
    pub degenerate: bool,
}

impl Moments {
    fn zero(d: usize, degenerate: bool) -> Self {
        Moments {
            mass: Rational::zero(),
            first: vec![Rational::zero(); d],
            second: vec![vec![Rational::zero(); d]; d],
            degenerate,
        }
    }

    fn accumulate(&mut self, o: &Moments) {
        self.mass += &o.mass;
        for (a, b) in self.first.iter_mut().zip(&o.first) {
            *a += b;
        }
        for (ra, rb) in self.second.iter_mut().zip(&o.second) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `int over the standard k-simplex of g(lambda_0..lambda_k)`, normalized so the simplex has mass 1/k!.
fn dirichlet_sum(g: &MultiPolynomial, k: u32) -> Rational {
    g.terms().fold(Rational::zero(), |acc, (e, c)| {
        let num = e.iter().fold(BigInt::one(), |a, &b| a * factorial(b));
        let total: u32 = e.iter().sum();
        acc + c * Rational::new(num, factorial(total + k))
    })
}

fn simplex_moments(verts: &[&Vector<M>], f: &MultiPolynomial, measure: &Measure, order: u32) -> Moments {
    let d = verts[0].dim();
    let k = verts.len() - 1;
    // |simplex| * k!
    let scaled_vol = match measure {
        Measure::Ambient => {
            let rows: Vec<Vec<Rational>> = verts[1..].iter().map(|v| (*v - verts[0]).into_coords()).collect();
            determinant(&rows).abs()
        }
        Measure::SliceOf { level, .. } => {
            let rows: Vec<Vec<Rational>> = verts.iter().map(|v| v.coords().to_vec()).collect();
            determinant(&rows).abs() / level
        }
    };
    // x_j as linear forms in barycentric coordinates
    let coords: Vec<MultiPolynomial> = (0..d)
        .map(|j| {
            let c: Vec<Rational> = verts.iter().map(|v| v[j].clone()).collect();
            MultiPolynomial::linear(&c, Rational::zero())
        })
        .collect();
    let g = f.compose(&coords);
    let ku = k as u32;
    let mut m = Moments::zero(d, false);
    m.mass = &scaled_vol * dirichlet_sum(&g, ku);
    if order >= 1 {
        for j in 0..d {
            let gj = g.mul(&coords[j]);
            m.first[j] = &scaled_vol * dirichlet_sum(&gj, ku);
            if order >= 2 {
                for l in j..d {
                    let v = &scaled_vol * dirichlet_sum(&gj.mul(&coords[l]), ku);
                    m.second[l][j] = v.clone();
                    m.second[j][l] = v;
                }
            }
        }
    }
    m
}

/// Pulling triangulation of the pointed cone spanned by `rays` (all extreme).
/// Returns simplicial cones as index lists.
pub fn triangulate_cone(rays: &[Vec<Rational>]) -> Vec<Vec<usize>> {
    if rays.is_empty() {
        return vec![];
    }
    let ambient = rays[0].len();
    let d = rank(rays, ambient);
    if rays.len() == d {
        return vec![(0..rays.len()).collect()];
    }
    let (facets, _) = double_description(ambient, rays, &[]);
    let mut out = Vec::new();
    for f in &facets {
        let on: Vec<usize> = (0..rays.len())
            .filter(|&i| crate::exactnum::dot(f, &rays[i]).is_zero())
            .collect();
        if on.contains(&0) {
            continue;
        }
        let sub: Vec<Vec<Rational>> = on.iter().map(|&i| rays[i].clone()).collect();
        for s in triangulate_cone(&sub) {
            let mut simplex = vec![0];
            simplex.extend(s.iter().map(|&i| on[i]));
            out.push(simplex);
        }
    }
    out
}

/// `{p in cone_dual : <p, xi> = level}`; unbounded unless `xi` is strictly positive on the cone.
pub fn slice(cone_dual: &PolyCone<M>, xi: &Vector<N>, level: &Rational) -> SliceResult {
    assert!(level.is_positive(), "slice level must be positive");
    if !cone_dual.is_pointed() || cone_dual.rays().iter().any(|r| !pair(r, xi).is_positive()) {
        return SliceResult::Unbounded;
    }
    let verts: Vec<Vector<M>> = cone_dual
        .rays()
        .iter()
        .map(|r| r.scale(&(level / pair(r, xi))))
        .collect();
    SliceResult::Bounded(Polytope::new(cone_dual.ambient_dim(), &verts))
}

/// `int over cone_dual of exp(-<p, xi>) density(p) dp`.
pub fn laplace_volume(cone_dual: &PolyCone<M>, density: &MultiPolynomial, xi: &Vector<N>) -> Result<Rational, IntegrateError> {
    if !density.is_homogeneous() {
        return Err(IntegrateError::NotHomogeneous);
    }
    if density.nvars() != cone_dual.ambient_dim() {
        return Err(IntegrateError::Dimension { expected: cone_dual.ambient_dim(), got: density.nvars() });
    }
    if !cone_dual.is_pointed() || !cone_dual.is_full_dimensional() || cone_dual.rays().iter().any(|r| !pair(r, xi).is_positive()) {
        return Err(IntegrateError::NotReeb);
    }
    let rays: Vec<Vec<Rational>> = cone_dual.rays().iter().map(|r| r.coords().to_vec()).collect();
    let d = cone_dual.ambient_dim();
    let parts: Vec<Rational> = triangulate_cone(&rays)
        .par_iter()
        .map(|s| {
            let vs: Vec<&Vec<Rational>> = s.iter().map(|&i| &rays[i]).collect();
            let det = determinant(&vs.iter().map(|v| (*v).clone()).collect::<Vec<_>>()).abs();
            let a: Vec<Rational> = vs.iter().map(|v| crate::exactnum::dot(v, xi.coords())).collect();
            let coords: Vec<MultiPolynomial> = (0..d)
                .map(|j| {
                    let c: Vec<Rational> = vs.iter().map(|v| v[j].clone()).collect();
                    MultiPolynomial::linear(&c, Rational::zero())
                })
                .collect();
            let g = density.compose(&coords);
            let sum = g.terms().fold(Rational::zero(), |acc, (e, c)| {
                let mut t = c.clone();
                for (ai, &b) in a.iter().zip(e) {
                    t *= Rational::from_integer(factorial(b));
                    for _ in 0..=b {
                        t /= ai;
                    }
                }
                acc + t
            });
            det * sum
        })
        .collect();
    Ok(parts.into_iter().fold(Rational::zero(), |a, b| a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{mvec, nvec};
    use crate::exactnum::{int, q};

    fn unit_simplex(d: usize) -> Polytope {
        let mut pts = vec![Vector::zeros(d)];
        pts.extend((0..d).map(|i| Vector::unit(d, i)));
        Polytope::new(d, &pts)
    }

    #[test]
    fn unit_simplex_volumes() {
        for d in 1..=4usize {
            let one = MultiPolynomial::constant(d, int(1));
            let v = unit_simplex(d).integrate(&one, &Measure::Ambient).unwrap();
            let fact: i64 = (1..=d as i64).product();
            assert_eq!(v.value, q(1, fact));
            assert!(!v.degenerate);
        }
    }

    #[test]
    fn dirichlet_example() {
        let xy = MultiPolynomial::variable(2, 0).mul(&MultiPolynomial::variable(2, 1));
        assert_eq!(unit_simplex(2).integrate(&xy, &Measure::Ambient).unwrap().value, q(1, 24));
    }

    #[test]
    fn segment_integral() {
        let seg = Polytope::new(1, &[mvec(&[-1]), mvec(&[1])]);
        let p = MultiPolynomial::variable(1, 0);
        let f = p.mul(&p.add(&MultiPolynomial::constant(1, int(1))));
        assert_eq!(seg.integrate(&f, &Measure::Ambient).unwrap().value, q(2, 3));
    }

    #[test]
    fn hull_drops_interior_points() {
        let sq = Polytope::new(2, &[mvec(&[0, 0]), mvec(&[2, 0]), mvec(&[0, 2]), mvec(&[2, 2]), mvec(&[1, 1])]);
        assert_eq!(sq.vertices().len(), 4);
        assert_eq!(sq.triangulation().len(), 2);
        let one = MultiPolynomial::constant(2, int(1));
        assert_eq!(sq.integrate(&one, &Measure::Ambient).unwrap().value, int(4));
    }

    #[test]
    fn degenerate_polytope_flagged() {
        let seg = Polytope::new(2, &[mvec(&[0, 0]), mvec(&[1, 1])]);
        let one = MultiPolynomial::constant(2, int(1));
        let r = seg.integrate(&one, &Measure::Ambient).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.value, int(0));
    }

    #[test]
    fn barycenters() {
        let sq = Polytope::new(2, &[mvec(&[-1, -1]), mvec(&[1, -1]), mvec(&[-1, 1]), mvec(&[1, 1])]);
        let one = MultiPolynomial::constant(2, int(3));
        assert_eq!(sq.weighted_barycenter(&one, &Measure::Ambient).unwrap(), mvec(&[0, 0]));
        let seg = Polytope::new(1, &[mvec(&[0]), mvec(&[5])]);
        let p = MultiPolynomial::variable(1, 0);
        assert_eq!(seg.weighted_barycenter(&p, &Measure::Ambient).unwrap(), Vector::new(vec![q(10, 3)]));
        let neg = p.scale(&int(-1));
        assert!(matches!(seg.weighted_barycenter(&neg, &Measure::Ambient), Err(IntegrateError::NonPositiveMass(_))));
    }

    #[test]
    fn orthant_slice_is_scaled_simplex() {
        let d = 3;
        let orth = PolyCone::<M>::from_generators(d, &(0..d).map(|i| Vector::unit(d, i)).collect::<Vec<_>>(), &[]);
        let poly = slice(&orth, &nvec(&[1, 1, 1]), &int(3)).bounded().unwrap();
        let mut verts = poly.vertices().to_vec();
        verts.sort();
        assert_eq!(verts, vec![mvec(&[0, 0, 3]), mvec(&[0, 3, 0]), mvec(&[3, 0, 0])]);
        assert!(matches!(slice(&orth, &nvec(&[1, 1, 0]), &int(3)), SliceResult::Unbounded));
    }

    #[test]
    fn laplace_examples() {
        let ray = PolyCone::<M>::from_generators(1, &[mvec(&[1])], &[]);
        let one1 = MultiPolynomial::constant(1, int(1));
        assert_eq!(laplace_volume(&ray, &one1, &Vector::new(vec![q(5, 2)])).unwrap(), q(2, 5));
        let orth = PolyCone::<M>::from_generators(2, &[mvec(&[1, 0]), mvec(&[0, 1])], &[]);
        let one2 = MultiPolynomial::constant(2, int(1));
        let t = q(3, 7);
        assert_eq!(laplace_volume(&orth, &one2, &Vector::new(vec![t.clone(), t.clone()])).unwrap(), (&t * &t).recip());
        let p1 = MultiPolynomial::variable(2, 0);
        assert_eq!(laplace_volume(&orth, &p1, &nvec(&[1, 1])).unwrap(), int(1));
        let inhom = p1.add(&one2);
        assert_eq!(laplace_volume(&orth, &inhom, &nvec(&[1, 1])), Err(IntegrateError::NotHomogeneous));
    }

    #[test]
    fn triangulation_additivity() {
        // integral over a hexagon equals the sum over a fan from another vertex
        let pts: Vec<Vector<M>> =
            [[2, 0], [1, 2], [-1, 2], [-2, 0], [-1, -2], [1, -2]].iter().map(|v| mvec(v)).collect();
        let hex = Polytope::new(2, &pts);
        let f = MultiPolynomial::from_terms(2, [(vec![2, 1], int(1)), (vec![0, 0], int(3)), (vec![1, 0], q(1, 2))]);
        let total = hex.integrate(&f, &Measure::Ambient).unwrap().value;
        let centre = mvec(&[0, 0]);
        let mut fan = Rational::zero();
        let n = pts.len();
        for i in 0..n {
            let tri = Polytope::new(2, &[centre.clone(), pts[i].clone(), pts[(i + 1) % n].clone()]);
            fan += tri.integrate(&f, &Measure::Ambient).unwrap().value;
        }
        assert_eq!(total, fan);
    }
}
