//! Polyhedral cones over Q and the colored-cone data model.
//!
//! A cone is stored in both representations. The generator side keeps a
//! lineality basis plus primitive extreme rays of the pointed part (taken
//! orthogonal to the lineality in the standard coordinates); the inequality
//! side keeps facet normals plus a basis of equations cutting out the span.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::exactnum::{
    self, dot, nullspace, pair, rank, rref, transpose, Rational, Space, Vector, M, N,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Closed,
    Interior,
    RelativeInterior,
}

#[derive(Clone, PartialEq, Eq)]
pub struct PolyCone<S: Space> {
    dim: usize,
    rays: Vec<Vector<S>>,
    lineality: Vec<Vector<S>>,
    facets: Vec<Vector<S::Dual>>,
    equations: Vec<Vector<S::Dual>>,
}

impl<S: Space> fmt::Debug for PolyCone<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolyCone")
            .field("dim", &self.dim)
            .field("rays", &self.rays)
            .field("lineality", &self.lineality)
            .finish()
    }
}

impl<S: Space> PolyCone<S> {
    /// The cone `cone(generators) + span(lineality)`.
    pub fn from_generators(dim: usize, generators: &[Vector<S>], lineality: &[Vector<S>]) -> Self {
        check_dims(dim, generators.iter().chain(lineality).map(Vector::dim));
        let (facets, equations) = double_description(dim, &raw(generators), &raw(lineality));
        let (rays, lin) = double_description(dim, &facets, &equations);
        Self::assemble(dim, rays, lin, facets, equations)
    }

    /// The cone `{x : <f, x> >= 0 for f in inequalities, <e, x> = 0 for e in equations}`.
    pub fn from_inequalities(dim: usize, inequalities: &[Vector<S::Dual>], equations: &[Vector<S::Dual>]) -> Self {
        check_dims(dim, inequalities.iter().chain(equations).map(Vector::dim));
        let (rays, lin) = double_description(dim, &raw(inequalities), &raw(equations));
        let (facets, eqs) = double_description(dim, &rays, &lin);
        Self::assemble(dim, rays, lin, facets, eqs)
    }

    pub fn whole_space(dim: usize) -> Self {
        let basis: Vec<Vector<S>> = (0..dim).map(|i| Vector::unit(dim, i)).collect();
        Self::from_generators(dim, &[], &basis)
    }

    pub fn origin(dim: usize) -> Self {
        Self::from_generators(dim, &[], &[])
    }

    fn assemble(
        dim: usize,
        rays: Vec<Vec<Rational>>,
        lin: Vec<Vec<Rational>>,
        facets: Vec<Vec<Rational>>,
        equations: Vec<Vec<Rational>>,
    ) -> Self {
        PolyCone {
            dim,
            rays: rays.into_iter().map(Vector::new).collect(),
            lineality: lin.into_iter().map(Vector::new).collect(),
            facets: facets.into_iter().map(Vector::new).collect(),
            equations: equations.into_iter().map(Vector::new).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Extreme rays of the pointed part, primitive and sorted.
    pub fn rays(&self) -> &[Vector<S>] {
        &self.rays
    }

    pub fn lineality(&self) -> &[Vector<S>] {
        &self.lineality
    }

    pub fn facets(&self) -> &[Vector<S::Dual>] {
        &self.facets
    }

    pub fn equations(&self) -> &[Vector<S::Dual>] {
        &self.equations
    }

    /// Dimension of the linear span.
    pub fn cone_dim(&self) -> usize {
        self.dim - self.equations.len()
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn is_linear_subspace(&self) -> bool {
        self.rays.is_empty()
    }

    /// Generators of the cone as a monoid: the rays plus both signs of each lineality vector.
    pub fn generating_set(&self) -> Vec<Vector<S>> {
        let mut out = self.rays.clone();
        for l in &self.lineality {
            out.push(l.clone());
            out.push(-l);
        }
        out
    }

    pub fn dual(&self) -> PolyCone<S::Dual> {
        PolyCone {
            dim: self.dim,
            rays: self.facets.clone(),
            lineality: self.equations.clone(),
            facets: self.rays.clone(),
            equations: self.lineality.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        let rays: Vec<Vector<S>> = self.rays.iter().map(|r| -r).collect();
        Self::from_generators(self.dim, &rays, &self.lineality)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut ineq = self.facets.clone();
        ineq.extend(other.facets.iter().cloned());
        let mut eqs = self.equations.clone();
        eqs.extend(other.equations.iter().cloned());
        Self::from_inequalities(self.dim, &ineq, &eqs)
    }

    pub fn contains(&self, p: &Vector<S>, mode: Membership) -> bool {
        assert_eq!(p.dim(), self.dim, "membership dimension mismatch");
        let on_span = self.equations.iter().all(|e| pair(p, e).is_zero());
        if !on_span {
            return false;
        }
        match mode {
            Membership::Closed => self.facets.iter().all(|f| !pair(p, f).is_negative()),
            Membership::Interior => {
                self.is_full_dimensional() && self.facets.iter().all(|f| pair(p, f).is_positive())
            }
            Membership::RelativeInterior => self.facets.iter().all(|f| pair(p, f).is_positive()),
        }
    }

    pub fn in_span(&self, p: &Vector<S>) -> bool {
        self.equations.iter().all(|e| pair(p, e).is_zero())
    }

    pub fn in_lineality(&self, p: &Vector<S>) -> bool {
        self.in_span(p) && self.facets.iter().all(|f| pair(p, f).is_zero())
    }

    pub fn same_set(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.generating_set().iter().all(|g| other.contains(g, Membership::Closed))
            && other.generating_set().iter().all(|g| self.contains(g, Membership::Closed))
    }

    /// A point in the relative interior: the sum of the extreme rays.
    pub fn relative_interior_point(&self) -> Vector<S> {
        self.rays.iter().fold(Vector::zeros(self.dim), |acc, r| &acc + r)
    }
}

fn check_dims(dim: usize, dims: impl Iterator<Item = usize>) {
    for d in dims {
        assert_eq!(d, dim, "cone generator has wrong dimension");
    }
}

fn raw<S: Space>(v: &[Vector<S>]) -> Vec<Vec<Rational>> {
    v.iter().map(|x| x.coords().to_vec()).collect()
}

fn primitive_q(v: &[Rational]) -> Vec<Rational> {
    exactnum::primitive(v)
        .expect("nonzero")
        .into_iter()
        .map(Rational::from_integer)
        .collect()
}

/// Canonical basis of a subspace: reduced row echelon rows scaled to primitive integers.
fn canonical_basis(vs: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    rref(vs, dim).0.iter().map(|r| primitive_q(r)).collect()
}

fn project_off(v: &[Rational], basis: &[Vec<Rational>]) -> Vec<Rational> {
    if basis.is_empty() {
        return v.to_vec();
    }
    // v - L (L^T L)^{-1} L^T v with L's columns the basis vectors
    let gram: Vec<Vec<Rational>> = basis.iter().map(|a| basis.iter().map(|b| dot(a, b)).collect()).collect();
    let rhs: Vec<Rational> = basis.iter().map(|a| dot(a, v)).collect();
    let c = exactnum::solve_linear(&gram, &rhs).expect("basis is independent");
    let mut out = v.to_vec();
    for (ci, b) in c.iter().zip(basis) {
        for (o, x) in out.iter_mut().zip(b) {
            *o -= ci * x;
        }
    }
    out
}

/// Generators of `{x : A x >= 0, B x = 0}` in `Q^dim`: primitive extreme rays of the
/// pointed part (orthogonal to the lineality) and a canonical lineality basis.
pub(crate) fn double_description(
    dim: usize,
    ineqs: &[Vec<Rational>],
    eqs: &[Vec<Rational>],
) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    // x = W y with W's columns a basis of ker B
    let w_cols = nullspace(eqs, dim);
    let k = w_cols.len();
    if k == 0 {
        return (vec![], vec![]);
    }
    let to_x = |y: &[Rational]| -> Vec<Rational> {
        (0..dim)
            .map(|i| w_cols.iter().zip(y).fold(Rational::zero(), |acc, (c, yj)| acc + &c[i] * yj))
            .collect()
    };
    let a_y: Vec<Vec<Rational>> = ineqs
        .iter()
        .map(|a| w_cols.iter().map(|c| dot(a, c)).collect())
        .filter(|r: &Vec<Rational>| r.iter().any(|x| !x.is_zero()))
        .collect();
    let lin_y = nullspace(&a_y, k);
    let lin_x: Vec<Vec<Rational>> = lin_y.iter().map(|y| to_x(y)).collect();
    let lineality = canonical_basis(&lin_x, dim);

    // pointed part: y = U z with U's columns spanning the row space of a_y
    let (row_basis, _) = rref(&a_y, k);
    let kp = row_basis.len();
    let mut rays = Vec::new();
    if kp > 0 {
        let a_z: Vec<Vec<Rational>> = a_y
            .iter()
            .map(|a| row_basis.iter().map(|u| dot(a, u)).collect())
            .collect();
        for z in pointed_rays(&a_z, kp) {
            let y: Vec<Rational> = (0..k)
                .map(|i| row_basis.iter().zip(&z).fold(Rational::zero(), |acc, (u, zj)| acc + &u[i] * zj))
                .collect();
            let x = project_off(&to_x(&y), &lineality);
            rays.push(primitive_q(&x));
        }
    }
    let set: BTreeSet<Vec<Rational>> = rays.into_iter().collect();
    (set.into_iter().collect(), lineality)
}

/// Extreme rays of `{z : A z >= 0}` where `A` has full column rank `k`.
fn pointed_rays(a: &[Vec<Rational>], k: usize) -> Vec<Vec<Rational>> {
    // start from k independent rows
    let mut basis_rows: Vec<usize> = Vec::new();
    for i in 0..a.len() {
        let mut trial: Vec<Vec<Rational>> = basis_rows.iter().map(|&j| a[j].clone()).collect();
        trial.push(a[i].clone());
        if rank(&trial, k) == trial.len() {
            basis_rows.push(i);
            if basis_rows.len() == k {
                break;
            }
        }
    }
    let sub: Vec<Vec<Rational>> = basis_rows.iter().map(|&j| a[j].clone()).collect();
    let inv = exactnum::inverse(&sub).expect("independent rows");
    let mut rays: Vec<Vec<Rational>> = transpose(&inv);
    let mut processed: Vec<usize> = basis_rows.clone();

    for i in 0..a.len() {
        if processed.contains(&i) {
            continue;
        }
        let vals: Vec<Rational> = rays.iter().map(|r| dot(&a[i], r)).collect();
        let mut next: Vec<Vec<Rational>> = Vec::new();
        for (r, v) in rays.iter().zip(&vals) {
            if !v.is_negative() {
                next.push(r.clone());
            }
        }
        for (pi, p) in rays.iter().enumerate() {
            if !vals[pi].is_positive() {
                continue;
            }
            for (ni, n) in rays.iter().enumerate() {
                if !vals[ni].is_negative() {
                    continue;
                }
                if adjacent(a, &processed, p, n, k) {
                    let r: Vec<Rational> = p
                        .iter()
                        .zip(n)
                        .map(|(pc, nc)| &vals[pi] * nc - &vals[ni] * pc)
                        .collect();
                    next.push(primitive_q(&r));
                }
            }
        }
        processed.push(i);
        let set: BTreeSet<Vec<Rational>> = next.into_iter().map(|r| primitive_q(&r)).collect();
        rays = set.into_iter().collect();
    }
    rays
}

fn adjacent(a: &[Vec<Rational>], processed: &[usize], p: &[Rational], n: &[Rational], k: usize) -> bool {
    let common: Vec<Vec<Rational>> = processed
        .iter()
        .filter(|&&j| dot(&a[j], p).is_zero() && dot(&a[j], n).is_zero())
        .map(|&j| a[j].clone())
        .collect();
    k >= 2 && rank(&common, k) == k - 2
}

// ---------------------------------------------------------------------------
// Colored cones

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Color {
    pub label: String,
    pub image: Vector<N>,
    /// Coefficient of this color in the anticanonical divisor.
    pub a_d: Rational,
}

/// One linear factor `<form, p>^multiplicity` of the Duistermaat–Heckman density.
/// For a root `beta` the form is its Killing-form dual, so it lives in `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DhFactor {
    pub form: Vector<N>,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredConeData {
    pub lattice_rank: usize,
    pub cone: PolyCone<N>,
    pub invariant_rays: Vec<Vector<N>>,
    pub colors: Vec<Color>,
    pub valuation_cone: PolyCone<N>,
    pub dh_roots: Vec<DhFactor>,
    pub dimension_n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DimensionMismatch { what: String, expected: usize, got: usize },
    ConeNotFullDimensional { cone_dim: usize },
    ConeNotStrictlyConvex,
    RayNotPrimitive { index: usize },
    RayNotExtreme { index: usize },
    RayIsColorImage { index: usize },
    RayOutsideValuationCone { index: usize },
    ZeroColorImage { label: String },
    ZeroDhForm { index: usize },
    DimensionBookkeeping { expected: usize, declared: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { what, expected, got } => {
                write!(f, "{what} has dimension {got}, expected {expected}")
            }
            Violation::ConeNotFullDimensional { cone_dim } => {
                write!(f, "colored cone is not of maximal dimension (dimension {cone_dim})")
            }
            Violation::ConeNotStrictlyConvex => write!(f, "colored cone is not strictly convex"),
            Violation::RayNotPrimitive { index } => write!(f, "invariant ray {index} is not primitive"),
            Violation::RayNotExtreme { index } => write!(f, "invariant ray {index} is not an extreme ray of the cone"),
            Violation::RayIsColorImage { index } => write!(f, "invariant ray {index} coincides with a color image direction"),
            Violation::RayOutsideValuationCone { index } => write!(f, "invariant ray {index} is outside the valuation cone"),
            Violation::ZeroColorImage { label } => write!(f, "color {label} has zero image"),
            Violation::ZeroDhForm { index } => write!(f, "DH factor {index} has a zero linear form"),
            Violation::DimensionBookkeeping { expected, declared } => write!(
                f,
                "dimension {declared} does not equal lattice rank plus DH multiplicities ({expected})"
            ),
        }
    }
}

/// Checks every structural invariant of the data and returns all failures.
pub fn validate_colored_cone(d: &ColoredConeData) -> Result<(), Vec<Violation>> {
    let r = d.lattice_rank;
    let mut bad = Vec::new();
    let mut dim_ok = true;
    let mut check = |what: String, got: usize, bad: &mut Vec<Violation>| {
        if got != r {
            dim_ok = false;
            bad.push(Violation::DimensionMismatch { what, expected: r, got });
        }
    };
    check("cone".into(), d.cone.ambient_dim(), &mut bad);
    check("valuation cone".into(), d.valuation_cone.ambient_dim(), &mut bad);
    for (i, v) in d.invariant_rays.iter().enumerate() {
        check(format!("invariant ray {i}"), v.dim(), &mut bad);
    }
    for c in &d.colors {
        check(format!("color {}", c.label), c.image.dim(), &mut bad);
    }
    for (i, f) in d.dh_roots.iter().enumerate() {
        check(format!("DH factor {i}"), f.form.dim(), &mut bad);
    }
    if !dim_ok {
        return Err(bad);
    }

    if !d.cone.is_full_dimensional() {
        bad.push(Violation::ConeNotFullDimensional { cone_dim: d.cone.cone_dim() });
    }
    if !d.cone.is_pointed() {
        bad.push(Violation::ConeNotStrictlyConvex);
    }
    for c in &d.colors {
        if c.image.is_zero() {
            bad.push(Violation::ZeroColorImage { label: c.label.clone() });
        }
    }
    let color_dirs: Vec<Vector<N>> = d
        .colors
        .iter()
        .filter(|c| !c.image.is_zero())
        .map(|c| c.image.primitive().expect("nonzero"))
        .collect();
    for (i, v) in d.invariant_rays.iter().enumerate() {
        if v.is_zero() || v.primitive().as_ref() != Ok(v) {
            bad.push(Violation::RayNotPrimitive { index: i });
        }
        if v.is_zero() {
            continue;
        }
        let dir = v.primitive().expect("nonzero");
        if !d.cone.rays().contains(&dir) {
            bad.push(Violation::RayNotExtreme { index: i });
        }
        if color_dirs.contains(&dir) {
            bad.push(Violation::RayIsColorImage { index: i });
        }
        if !d.valuation_cone.contains(v, Membership::Closed) {
            bad.push(Violation::RayOutsideValuationCone { index: i });
        }
    }
    for (i, f) in d.dh_roots.iter().enumerate() {
        if f.form.is_zero() {
            bad.push(Violation::ZeroDhForm { index: i });
        }
    }
    let expected = r + d.dh_roots.iter().map(|f| f.multiplicity as usize).sum::<usize>();
    if expected != d.dimension_n {
        bad.push(Violation::DimensionBookkeeping { expected, declared: d.dimension_n });
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

impl ColoredConeData {
    /// The moment cone: the dual of the colored cone, living in `M`.
    pub fn moment_cone(&self) -> PolyCone<M> {
        self.cone.dual()
    }

    /// `Sigma = (-V)^dual`, the cone where the barycenter offset must lie for stability.
    pub fn sigma(&self) -> PolyCone<M> {
        self.valuation_cone.neg().dual()
    }

    /// The closure of the Reeb cone: colored cone intersected with the lineality of `V`.
    pub fn reeb_cone(&self) -> PolyCone<N> {
        let lin = PolyCone::from_generators(self.lattice_rank, &[], self.valuation_cone.lineality());
        self.cone.intersect(&lin)
    }

    /// Reeb vectors are the elements of `lin(V)` in the interior of the colored cone;
    /// exactly these give bounded moment slices and come from the automorphism torus.
    pub fn is_reeb(&self, xi: &Vector<N>) -> bool {
        self.valuation_cone.in_lineality(xi) && self.cone.contains(xi, Membership::Interior)
    }

    /// Horospherical data has the whole lattice as valuation cone.
    pub fn is_horospherical(&self) -> bool {
        self.valuation_cone.lineality().len() == self.lattice_rank
    }

    /// Reeb cone in the sign convention of the right torus action on a horospherical cone:
    /// the negated interior of the colored cone.
    pub fn horospherical_reeb_cone(&self) -> Option<PolyCone<N>> {
        self.is_horospherical().then(|| self.cone.neg())
    }

    pub fn valuation_lineality_dim(&self) -> usize {
        self.valuation_cone.lineality().len()
    }
}

/// Convenience for tests and catalog code: `Vector<N>` from integers.
pub fn nvec(v: &[i64]) -> Vector<N> {
    Vector::from_ints(v)
}

pub fn mvec(v: &[i64]) -> Vector<M> {
    Vector::from_ints(v)
}
