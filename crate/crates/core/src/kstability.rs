//! Angle weights, volumes, Futaki invariants, the K-stability verdict and
//! the Reeb vector solver for polarized spherical log cones.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cones::{validate_colored_cone, ColoredConeData, Membership, PolyCone, Violation};
use crate::exactnum::{
    self, best_rational, from_f64, int, pair, q, simplest_rational_in, to_f64, LinearError, Rational, UniPoly,
    Vector, M, N,
};
use crate::integrate::{slice, IntegrateError, Measure, MultiPolynomial, Polytope, SliceResult};
use crate::rootdata::DhDensity;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KError {
    #[error("invalid colored cone data: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidData(Vec<Violation>),
    #[error("angles do not define an R-Cartier divisor: {0}")]
    NotRCartier(String),
    #[error("angle system is underdetermined along {direction}")]
    UnderdeterminedAngles { direction: Vector<M> },
    #[error("invalid angles: {0}")]
    InvalidAngles(String),
    #[error("invalid polarization: {0}")]
    InvalidPolarization(String),
    #[error("{nu} is not in the valuation cone, so it defines no test configuration")]
    NoSuchConfiguration { nu: Vector<N> },
    #[error("DH density is negative at slice vertex {vertex}")]
    NegativeDensity { vertex: Vector<M> },
    #[error("the Reeb family does not apply: {0}")]
    FamilyNotApplicable(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// The angle `gamma` of each invariant divisor, aligned with `invariant_rays`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Angles(pub Vec<Rational>);

impl Angles {
    pub fn trivial(data: &ColoredConeData) -> Self {
        Angles(vec![Rational::one(); data.invariant_rays.len()])
    }
}

/// Solve `<w, nu> = gamma_nu` for invariant rays and `<w, rho(d)> = a_d` for colors.
pub fn angle_weight(data: &ColoredConeData, angles: &Angles) -> Result<Vector<M>, KError> {
    if angles.0.len() != data.invariant_rays.len() {
        return Err(KError::InvalidAngles(format!(
            "{} angles given for {} invariant rays",
            angles.0.len(),
            data.invariant_rays.len()
        )));
    }
    for (i, g) in angles.0.iter().enumerate() {
        if !g.is_positive() || *g > Rational::one() {
            return Err(KError::InvalidAngles(format!("angle {i} = {g} is outside (0, 1]")));
        }
    }
    let mut rows: Vec<Vec<Rational>> = data.invariant_rays.iter().map(|v| v.coords().to_vec()).collect();
    let mut rhs: Vec<Rational> = angles.0.clone();
    for c in &data.colors {
        rows.push(c.image.coords().to_vec());
        rhs.push(c.a_d.clone());
    }
    let w = match exactnum::solve_linear(&rows, &rhs) {
        Ok(x) => Vector::new(x),
        Err(LinearError::Inconsistent) => {
            return Err(KError::NotRCartier(
                "no linear function takes the prescribed values on the invariant rays and colors".into(),
            ))
        }
        Err(LinearError::Underdetermined { direction, .. }) => {
            return Err(KError::UnderdeterminedAngles { direction: Vector::new(direction) })
        }
    };
    if !data.moment_cone().contains(&w, Membership::Interior) {
        return Err(KError::InvalidAngles(format!("angle weight {w} is not in the interior of the moment cone")));
    }
    Ok(w)
}

pub fn density_polynomial(data: &ColoredConeData) -> MultiPolynomial {
    DhDensity { factors: data.dh_roots.clone() }.to_polynomial(data.lattice_rank)
}

#[derive(Debug, Clone)]
struct SliceData {
    polytope: Polytope,
    mass: Rational,
    barycenter: Vector<M>,
}

/// Colored cone data with angles and a Reeb vector.
#[derive(Debug, Clone)]
pub struct PolarizedLogCone {
    data: ColoredConeData,
    angles: Angles,
    reeb: Vector<N>,
    angle_weight: Vector<M>,
    density: MultiPolynomial,
    slice: OnceLock<Result<SliceData, KError>>,
}

impl PolarizedLogCone {
    pub fn new(data: ColoredConeData, angles: Angles, reeb: Vector<N>) -> Result<Self, KError> {
        validate_colored_cone(&data).map_err(KError::InvalidData)?;
        let angle_weight = angle_weight(&data, &angles)?;
        if reeb.dim() != data.lattice_rank {
            return Err(KError::InvalidPolarization(format!("Reeb vector {reeb} has the wrong dimension")));
        }
        if !data.valuation_cone.in_lineality(&reeb) {
            return Err(KError::InvalidPolarization(format!(
                "Reeb vector {reeb} is not in the linear part of the valuation cone"
            )));
        }
        if !data.cone.contains(&reeb, Membership::Interior) {
            return Err(KError::InvalidPolarization(format!(
                "Reeb vector {reeb} is not in the interior of the colored cone"
            )));
        }
        let density = density_polynomial(&data);
        Ok(PolarizedLogCone { data, angles, reeb, angle_weight, density, slice: OnceLock::new() })
    }

    pub fn data(&self) -> &ColoredConeData {
        &self.data
    }

    pub fn angles(&self) -> &Angles {
        &self.angles
    }

    pub fn reeb(&self) -> &Vector<N> {
        &self.reeb
    }

    pub fn angle_weight(&self) -> &Vector<M> {
        &self.angle_weight
    }

    pub fn density(&self) -> &MultiPolynomial {
        &self.density
    }

    pub fn dimension(&self) -> usize {
        self.data.dimension_n
    }

    /// Same cone and angles with another Reeb vector.
    pub fn with_reeb(&self, reeb: Vector<N>) -> Result<Self, KError> {
        Self::new(self.data.clone(), self.angles.clone(), reeb)
    }

    /// Rescale the Reeb vector so that `<angle_weight, xi> = n`.
    pub fn normalized(&self) -> Self {
        let a = log_discrepancy(self, &self.reeb);
        let c = int(self.dimension() as i64) / a;
        let mut out = self.clone();
        out.reeb = self.reeb.scale(&c);
        out.slice = OnceLock::new();
        out
    }

    fn level(&self) -> Rational {
        int(self.dimension() as i64)
    }

    pub fn measure(&self) -> Measure {
        Measure::SliceOf { xi: self.reeb.clone(), level: self.level() }
    }

    /// The moment slice at level `n`.
    pub fn moment_slice(&self) -> Result<Polytope, KError> {
        self.slice_data().map(|s| s.polytope.clone())
    }

    fn slice_data(&self) -> Result<&SliceData, KError> {
        self.slice
            .get_or_init(|| {
                let poly = match slice(&self.data.moment_cone(), &self.reeb, &self.level()) {
                    SliceResult::Bounded(p) => p,
                    SliceResult::Unbounded => {
                        return Err(KError::InvalidPolarization(format!("moment slice at {} is unbounded", self.reeb)))
                    }
                };
                for v in poly.vertices() {
                    if self.density.eval(v.coords()).is_negative() {
                        return Err(KError::NegativeDensity { vertex: v.clone() });
                    }
                }
                let m = poly.moments(&self.density, &self.measure(), 1)?;
                if !m.mass.is_positive() {
                    return Err(IntegrateError::NonPositiveMass(m.mass).into());
                }
                let barycenter = Vector::new(m.first.iter().map(|x| x / &m.mass).collect());
                Ok(SliceData { polytope: poly, mass: m.mass, barycenter })
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// `A(v) = <angle_weight, v>`.
pub fn log_discrepancy(p: &PolarizedLogCone, v: &Vector<N>) -> Rational {
    pair(&p.angle_weight, v)
}

fn factorial(n: usize) -> Rational {
    Rational::from_integer((1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k)))
}

/// `vol(xi) = n! * integral of the DH density over the level-n slice`.
pub fn volume(p: &PolarizedLogCone) -> Result<Rational, KError> {
    Ok(factorial(p.dimension()) * &p.slice_data()?.mass)
}

pub fn normalized_volume(p: &PolarizedLogCone) -> Result<Rational, KError> {
    let a = log_discrepancy(p, &p.reeb);
    let mut an = Rational::one();
    for _ in 0..p.dimension() {
        an *= &a;
    }
    Ok(an * volume(p)?)
}

/// DH barycenter of the level-n slice.
pub fn barycenter(p: &PolarizedLogCone) -> Result<Vector<M>, KError> {
    Ok(p.slice_data()?.barycenter.clone())
}

/// Futaki invariant of the test configuration along `nu`:
/// `<w - (<w, xi>/n) bar, nu>`.
pub fn futaki(p: &PolarizedLogCone, nu: &Vector<N>) -> Result<Rational, KError> {
    if !p.data.valuation_cone.contains(nu, Membership::Closed) {
        return Err(KError::NoSuchConfiguration { nu: nu.clone() });
    }
    futaki_unchecked(p, nu)
}

fn futaki_unchecked(p: &PolarizedLogCone, nu: &Vector<N>) -> Result<Rational, KError> {
    let bar = barycenter(p)?;
    let scale = log_discrepancy(p, &p.reeb) / p.level();
    Ok(pair(&p.angle_weight, nu) - scale * pair(&bar, nu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    KStable,
    KSemistableNotStable,
    KUnstable,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::KStable => "KStable",
            Verdict::KSemistableNotStable => "KSemistableNotStable",
            Verdict::KUnstable => "KUnstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayFutaki {
    /// A generator of `-V`; the test configuration is along its negative.
    pub ray: Vector<N>,
    pub in_lineality: bool,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictReport {
    pub verdict: Verdict,
    /// The Reeb vector rescaled so that `<angle_weight, xi> = n`.
    pub normalized_reeb: Vector<N>,
    pub barycenter: Vector<M>,
    pub angle_weight: Vector<M>,
    /// `barycenter - angle_weight` at the normalized Reeb vector.
    pub offset: Vector<M>,
    pub futaki_on_rays: Vec<RayFutaki>,
    pub destabilizer: Option<Vector<N>>,
    /// Verdict recomputed from membership of `offset` in `Sigma = (-V)^dual`.
    pub membership_verdict: Verdict,
}

impl VerdictReport {
    pub fn paths_agree(&self) -> bool {
        self.verdict == self.membership_verdict
    }
}

/// Decide K-stability from Futaki signs on the generators of `-V`, and
/// independently from the position of the barycenter offset in `Sigma`.
pub fn verdict(p: &PolarizedLogCone) -> Result<VerdictReport, KError> {
    let np = p.normalized();
    let bar = barycenter(&np)?;
    let offset = &bar - &np.angle_weight;
    let minus_v = np.data.valuation_cone.neg();

    let mut futaki_on_rays = Vec::new();
    for l in minus_v.lineality() {
        for g in [l.clone(), -l] {
            let value = futaki(&np, &-&g)?;
            futaki_on_rays.push(RayFutaki { ray: g, in_lineality: true, value });
        }
    }
    for g in minus_v.rays() {
        let value = futaki(&np, &-g)?;
        futaki_on_rays.push(RayFutaki { ray: g.clone(), in_lineality: false, value });
    }
    let destabilizer = futaki_on_rays.iter().find(|r| r.value.is_negative()).map(|r| r.ray.clone());
    let verdict = if destabilizer.is_some() {
        Verdict::KUnstable
    } else if futaki_on_rays.iter().any(|r| !r.in_lineality && r.value.is_zero()) {
        Verdict::KSemistableNotStable
    } else {
        Verdict::KStable
    };

    let sigma = np.data.sigma();
    let membership_verdict = if sigma.contains(&offset, Membership::RelativeInterior) {
        Verdict::KStable
    } else if sigma.contains(&offset, Membership::Closed) {
        Verdict::KSemistableNotStable
    } else {
        Verdict::KUnstable
    };

    Ok(VerdictReport {
        verdict,
        normalized_reeb: np.reeb.clone(),
        barycenter: bar,
        angle_weight: np.angle_weight.clone(),
        offset,
        futaki_on_rays,
        destabilizer,
        membership_verdict,
    })
}

// ---------------------------------------------------------------------------
// Reeb solver

/// The line of Reeb vectors `xi(t) = xi0 + t * xi1`, searched over `t > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReebFamily {
    pub xi0: Vector<N>,
    pub xi1: Vector<N>,
}

impl ReebFamily {
    pub fn at(&self, t: &Rational) -> Vector<N> {
        &self.xi0 + &self.xi1.scale(t)
    }

    pub fn at_f64(&self, t: f64) -> Vec<f64> {
        self.xi0.to_f64().iter().zip(self.xi1.to_f64()).map(|(a, b)| a + t * b).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    UniqueRay,
    Univariate,
    Numeric,
}

/// An algebraic family parameter given by an isolating interval of a square-free polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraicRoot {
    pub polynomial: UniPoly,
    pub lo: Rational,
    pub hi: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Obstruction {
    /// No root of the stationarity polynomial lies in the searched domain.
    NoAdmissibleRoot { polynomial: UniPoly, family: ReebFamily },
    /// The volume minimizer has a negative Futaki invariant along a pointed ray.
    NegativeFutaki { xi: Vector<N>, ray: Vector<N>, value: Rational },
    EmptyReebCone,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReebOutcome {
    /// Exact rational minimizer (normalized) with its verdict.
    Found { xi: Vector<N>, report: Box<VerdictReport> },
    /// Minimizer at an irrational family parameter; Futaki vanishing is certified by the sign change.
    FoundIrrational { root: AlgebraicRoot, family: ReebFamily, xi_approx: Vec<f64> },
    /// Numeric minimizer whose rational rounding failed exact certification.
    Approximate { xi: Vector<N>, residual: f64 },
    NoStableReeb(Obstruction),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReebSolution {
    pub method: SolverMethod,
    pub outcome: ReebOutcome,
    /// The stationarity polynomial when the univariate path ran.
    pub polynomial: Option<UniPoly>,
    pub trace: Vec<String>,
}

impl ReebSolution {
    pub fn xi(&self) -> Option<&Vector<N>> {
        match &self.outcome {
            ReebOutcome::Found { xi, .. } => Some(xi),
            _ => None,
        }
    }
}

/// Find the K-semistable Reeb vector: the minimizer of the volume on
/// `{xi in Reeb cone : <angle_weight, xi> = n}`.
pub fn reeb_solve(data: &ColoredConeData, angles: &Angles, family: Option<&ReebFamily>) -> Result<ReebSolution, KError> {
    validate_colored_cone(data).map_err(KError::InvalidData)?;
    let w = angle_weight(data, angles)?;
    let n = int(data.dimension_n as i64);
    let reeb_cone = data.reeb_cone();
    let reeb_dim = reeb_cone.cone_dim();
    let mut trace = Vec::new();

    let nonempty = data.is_reeb(&reeb_cone.relative_interior_point());
    if !nonempty || reeb_dim == 0 {
        return Ok(ReebSolution {
            method: SolverMethod::UniqueRay,
            outcome: ReebOutcome::NoStableReeb(Obstruction::EmptyReebCone),
            polynomial: None,
            trace,
        });
    }

    if reeb_dim == 1 && family.is_none() {
        let r = &reeb_cone.rays()[0];
        let xi = r.scale(&(&n / pair(&w, r)));
        trace.push(format!("one-dimensional Reeb cone spanned by {r}"));
        let p = PolarizedLogCone::new(data.clone(), angles.clone(), xi.clone())?;
        let outcome = found_or_obstructed(&p)?;
        return Ok(ReebSolution { method: SolverMethod::UniqueRay, outcome, polynomial: None, trace });
    }

    if data.lattice_rank == 2 && reeb_dim == 2 {
        let fam = match family {
            Some(f) => f.clone(),
            None => {
                let rays = data.cone.rays();
                ReebFamily { xi0: rays[0].clone(), xi1: rays[1].clone() }
            }
        };
        return univariate_solve(data, angles, &w, &fam, trace);
    }
    if family.is_some() {
        return Err(KError::FamilyNotApplicable(format!(
            "families are supported for rank-2 lattices with a two-dimensional Reeb cone (rank {}, Reeb cone dimension {reeb_dim})",
            data.lattice_rank
        )));
    }
    numeric_solve(data, angles, &w, &reeb_cone, trace)
}

fn found_or_obstructed(p: &PolarizedLogCone) -> Result<ReebOutcome, KError> {
    let report = verdict(p)?;
    if let Some(ray) = &report.destabilizer {
        let value = report.futaki_on_rays.iter().find(|r| &r.ray == ray).map(|r| r.value.clone()).unwrap();
        return Ok(ReebOutcome::NoStableReeb(Obstruction::NegativeFutaki {
            xi: report.normalized_reeb.clone(),
            ray: ray.clone(),
            value,
        }));
    }
    Ok(ReebOutcome::Found { xi: report.normalized_reeb.clone(), report: Box::new(report) })
}

/// The stationarity condition along a rank-2 family, as a polynomial in `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationarityPolynomial {
    /// Numerator after clearing the endpoint denominators.
    pub raw: UniPoly,
    /// `raw` with the endpoint denominators and the segment-length factor divided out.
    pub reduced: UniPoly,
    /// `reduced` as a primitive integer vector with positive leading coefficient.
    pub normalized: Vec<BigInt>,
    /// Linear polynomials whose sign changes mark the boundary of the Reeb cone along the family.
    pub walls: Vec<UniPoly>,
}

/// `integral over the segment through w in direction delta(t) of p * P(w + p delta(t)) dp`,
/// with `delta(t)` the slice direction orthogonal to `xi(t)`.
pub fn stationarity_polynomial(data: &ColoredConeData, w: &Vector<M>, fam: &ReebFamily) -> Result<StationarityPolynomial, KError> {
    if data.lattice_rank != 2 {
        return Err(KError::FamilyNotApplicable("stationarity polynomials need a rank-2 lattice".into()));
    }
    // delta(t) = rot(xi(t)) = delta0 + t delta1
    let rot = |x: &Vector<N>| -> Vector<M> { Vector::new(vec![-x[1].clone(), x[0].clone()]) };
    let d0 = rot(&fam.xi0);
    let d1 = rot(&fam.xi1);
    // bivariate polynomials in (p, t)
    let mut dens = MultiPolynomial::constant(2, Rational::one());
    for f in &data.dh_roots {
        let lin = MultiPolynomial::from_terms(
            2,
            [
                (vec![0, 0], pair(w, &f.form)),
                (vec![1, 0], pair(&d0, &f.form)),
                (vec![1, 1], pair(&d1, &f.form)),
            ],
        );
        dens = dens.mul(&lin.pow(f.multiplicity));
    }
    let integrand = dens.mul(&MultiPolynomial::variable(2, 0));
    // antiderivative in p, collected as coefficients a_k(t)
    let mut coeffs: Vec<Vec<Rational>> = Vec::new();
    for (e, c) in integrand.terms() {
        let k = e[0] as usize + 1;
        let j = e[1] as usize;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, Vec::new());
        }
        if coeffs[k].len() <= j {
            coeffs[k].resize(j + 1, Rational::zero());
        }
        coeffs[k][j] += c / int(k as i64);
    }
    let a: Vec<UniPoly> = coeffs.into_iter().map(UniPoly::new).collect();
    let kmax = a.len() - 1;

    let rays = data.cone.rays();
    if rays.len() != 2 {
        return Err(KError::FamilyNotApplicable("colored cone must have two rays".into()));
    }
    // endpoint j: p_j = -c_j / D_j(t)
    let c: Vec<Rational> = rays.iter().map(|g| pair(w, g)).collect();
    let dj: Vec<UniPoly> = rays.iter().map(|g| UniPoly::linear(pair(&d0, g), pair(&d1, g))).collect();
    let eval_end = |j: usize, other: usize| -> UniPoly {
        let mut acc = UniPoly::zero();
        let minus_c = -c[j].clone();
        for (k, ak) in a.iter().enumerate() {
            if ak.is_zero() {
                continue;
            }
            let mut ck = Rational::one();
            for _ in 0..k {
                ck *= &minus_c;
            }
            let term = ak
                .mul(&dj[j].pow((kmax - k) as u32))
                .mul(&dj[other].pow(kmax as u32))
                .scale(&ck);
            acc = acc.add(&term);
        }
        acc
    };
    let raw = eval_end(0, 1).sub(&eval_end(1, 0));
    let length = dj[0].scale(&c[1]).sub(&dj[1].scale(&c[0]));
    let mut reduced = raw.clone();
    for f in [&dj[0], &dj[1], &length] {
        reduced = reduced.strip_factor(f).0;
    }
    let normalized = reduced.content_normalized();
    let walls = data
        .cone
        .facets()
        .iter()
        .map(|f| UniPoly::linear(pair(f, &fam.xi0), pair(f, &fam.xi1)))
        .collect();
    Ok(StationarityPolynomial { raw, reduced, normalized, walls })
}

fn in_domain(walls: &[UniPoly], t: &Rational) -> bool {
    t.is_positive() && walls.iter().all(|w| w.eval(t).is_positive())
}

fn univariate_solve(
    data: &ColoredConeData,
    angles: &Angles,
    w: &Vector<M>,
    fam: &ReebFamily,
    mut trace: Vec<String>,
) -> Result<ReebSolution, KError> {
    let sp = stationarity_polynomial(data, w, fam)?;
    let poly = sp.reduced.clone();
    trace.push(format!("stationarity polynomial {poly}"));
    let breakpoints: Vec<Rational> = sp
        .walls
        .iter()
        .filter(|l| l.degree() == Some(1))
        .map(|l| -&l.coeffs()[0] / &l.coeffs()[1])
        .collect();

    let mut admissible = Vec::new();
    for (lo, hi) in poly.isolate_positive_roots() {
        let (mut lo, mut hi) = (lo, hi);
        // shrink until no wall crossing lies inside
        let mut exact = None;
        while breakpoints.iter().any(|b| *b > lo && *b < hi) {
            let (a, b) = poly.refine_root(&lo, &hi, &((&hi - &lo) / int(4)));
            if a == b {
                exact = Some(a);
                break;
            }
            lo = a;
            hi = b;
        }
        let probe = exact.clone().unwrap_or_else(|| (&lo + &hi) / int(2));
        if in_domain(&sp.walls, &probe) {
            admissible.push((lo, hi, exact));
        } else {
            trace.push(format!("root in ({lo}, {hi}) lies outside the Reeb cone"));
        }
    }

    let method = SolverMethod::Univariate;
    let Some((lo, hi, exact)) = admissible.into_iter().next() else {
        trace.push("no admissible positive root".into());
        return Ok(ReebSolution {
            method,
            outcome: ReebOutcome::NoStableReeb(Obstruction::NoAdmissibleRoot { polynomial: poly.clone(), family: fam.clone() }),
            polynomial: Some(poly),
            trace,
        });
    };

    let root = match exact {
        Some(r) => Some(r),
        None => rational_root_in(&poly, &lo, &hi),
    };
    let outcome = match root {
        Some(t) => {
            trace.push(format!("exact rational parameter t = {t}"));
            let xi = fam.at(&t);
            let p = PolarizedLogCone::new(data.clone(), angles.clone(), xi)?;
            found_or_obstructed(&p)?
        }
        None => {
            let (a, b) = poly.refine_root(&lo, &hi, &q(1, 1_000_000_000_000));
            let mid = to_f64(&((&a + &b) / int(2)));
            trace.push(format!("irrational parameter isolated in ({lo}, {hi})"));
            ReebOutcome::FoundIrrational {
                root: AlgebraicRoot { polynomial: poly.clone(), lo, hi },
                family: fam.clone(),
                xi_approx: fam.at_f64(mid),
            }
        }
    };
    Ok(ReebSolution { method, outcome, polynomial: Some(poly), trace })
}

/// The rational root inside an isolating interval, if there is one.
/// A root `a/b` in lowest terms has `b` dividing the leading coefficient `L`,
/// so once the interval is shorter than `1/L^2` the simplest rational in it is the only candidate.
fn rational_root_in(poly: &UniPoly, lo: &Rational, hi: &Rational) -> Option<Rational> {
    let ints = poly.content_normalized();
    let lead = Rational::from_integer(ints.last()?.abs());
    let width = (&lead * &lead).recip() / int(2);
    let (a, b) = poly.refine_root(lo, hi, &width);
    if a == b {
        return Some(a);
    }
    let s = simplest_rational_in(&a, &b);
    poly.eval(&s).is_zero().then_some(s)
}

fn numeric_solve(
    data: &ColoredConeData,
    angles: &Angles,
    w: &Vector<M>,
    reeb_cone: &PolyCone<N>,
    mut trace: Vec<String>,
) -> Result<ReebSolution, KError> {
    let n = data.dimension_n as i64;
    let method = SolverMethod::Numeric;
    // affine slice: xi = xi0 + sum s_i b_i with <w, b_i> = 0 and b_i in lin(V)
    let start = reeb_cone.relative_interior_point();
    let xi0 = start.scale(&(int(n) / pair(w, &start)));
    let mut rows: Vec<Vec<Rational>> = reeb_cone.equations().iter().map(|e| e.coords().to_vec()).collect();
    rows.push(w.coords().to_vec());
    let basis: Vec<Vector<N>> = exactnum::nullspace(&rows, data.lattice_rank).into_iter().map(Vector::new).collect();
    let density = density_polynomial(data);
    let moment_cone = data.moment_cone();
    let level = int(n);

    let eval = |xi: &Vector<N>, order: u32| -> Result<Option<(f64, Vec<f64>, Vec<Vec<f64>>)>, KError> {
        if !data.is_reeb(xi) {
            return Ok(None);
        }
        let poly = slice(&moment_cone, xi, &level).bounded().expect("Reeb vector gives a bounded slice");
        let m = poly.moments(&density, &Measure::SliceOf { xi: xi.clone(), level: level.clone() }, order)?;
        let mass = to_f64(&m.mass);
        let bar: Vec<Rational> = m.first.iter().map(|x| x / &m.mass).collect();
        let grad: Vec<f64> = basis.iter().map(|b| -to_f64(&exactnum::dot(&bar, b.coords()))).collect();
        let mut hess = vec![vec![0.0; basis.len()]; basis.len()];
        if order >= 2 {
            let nf = Rational::from_integer(BigInt::from(n));
            let ratio = (&nf + Rational::one()) / &nf;
            let d = data.lattice_rank;
            let cov: Vec<Vec<Rational>> = (0..d)
                .map(|i| (0..d).map(|j| &ratio * (&m.second[i][j] / &m.mass) - &bar[i] * &bar[j]).collect())
                .collect();
            for (a, ba) in basis.iter().enumerate() {
                for (b, bb) in basis.iter().enumerate() {
                    let v = exactnum::dot(ba.coords(), &exactnum::mat_vec(&cov, bb.coords()));
                    hess[a][b] = to_f64(&v);
                }
            }
        }
        Ok(Some((mass.ln(), grad, hess)))
    };
    let round = |s: &[f64]| -> Vector<N> {
        basis.iter().zip(s).fold(xi0.clone(), |acc, (b, &si)| &acc + &b.scale(&best_rational(si, 1_000_000_000)))
    };

    let k = basis.len();
    let mut s = vec![0.0; k];
    let mut converged = false;
    for iter in 0..200 {
        let xi = round(&s);
        let (f, g, h) = eval(&xi, 2)?.expect("iterate stays in the Reeb cone");
        let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        trace.push(format!("iteration {iter}: log-mass {f:.15}, gradient norm {gnorm:.3e}"));
        if gnorm < 1e-12 {
            converged = true;
            break;
        }
        let step = solve_f64(&h, &g.iter().map(|x| -x).collect::<Vec<_>>());
        let mut tau = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = s.iter().zip(&step).map(|(a, b)| a + tau * b).collect();
            if let Some((fc, _, _)) = eval(&round(&cand), 0)? {
                if fc <= f + 1e-4 * tau * g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>() || gnorm < 1e-9 {
                    s = cand;
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    trace.push(format!("numeric minimization {}", if converged { "converged" } else { "stopped" }));

    // certify at a nearby rational point
    let approx = round(&s).to_f64();
    let cand: Vec<Rational> = approx.iter().map(|&x| best_rational(x, 1_000_000)).collect();
    let cand = Vector::<N>::new(cand);
    let cand = cand.scale(&(int(n) / pair(w, &cand)));
    if data.is_reeb(&cand) {
        let p = PolarizedLogCone::new(data.clone(), angles.clone(), cand.clone())?;
        let stationary = data
            .valuation_cone
            .lineality()
            .iter()
            .map(|l| futaki_unchecked(&p, l))
            .collect::<Result<Vec<_>, _>>()?;
        if stationary.iter().all(Zero::is_zero) {
            trace.push(format!("rounded point {cand} certified exactly"));
            let outcome = found_or_obstructed(&p)?;
            return Ok(ReebSolution { method, outcome, polynomial: None, trace });
        }
        let residual = stationary.iter().map(|x| to_f64(x).abs()).fold(0.0, f64::max);
        trace.push(format!("rounded point {cand} has Futaki residual {residual:.3e}"));
        return Ok(ReebSolution { method, outcome: ReebOutcome::Approximate { xi: cand, residual }, polynomial: None, trace });
    }
    let xi = Vector::new(approx.iter().map(|&x| from_f64(x)).collect());
    Ok(ReebSolution { method, outcome: ReebOutcome::Approximate { xi, residual: f64::NAN }, polynomial: None, trace })
}

fn solve_f64(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| {
        let mut row = r.clone();
        row.push(bi);
        row
    }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        if piv.abs() < 1e-300 {
            continue;
        }
        for i in 0..n {
            if i != c {
                let f = m[i][c] / piv;
                for j in c..=n {
                    m[i][j] -= f * m[c][j];
                }
            }
        }
    }
    (0..n).map(|i| if m[i][i] == 0.0 { 0.0 } else { m[i][n] / m[i][i] }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{mvec, nvec, Color, DhFactor};

    fn toric(rays: &[Vector<N>], n: usize) -> ColoredConeData {
        let r = rays[0].dim();
        ColoredConeData {
            lattice_rank: r,
            cone: PolyCone::from_generators(r, rays, &[]),
            invariant_rays: rays.to_vec(),
            colors: vec![],
            valuation_cone: PolyCone::whole_space(r),
            dh_roots: vec![],
            dimension_n: n,
        }
    }

    fn orthant(d: usize) -> ColoredConeData {
        toric(&(0..d).map(|i| Vector::unit(d, i)).collect::<Vec<_>>(), d)
    }

    fn sl2() -> ColoredConeData {
        ColoredConeData {
            lattice_rank: 2,
            cone: PolyCone::from_generators(2, &[nvec(&[1, 1]), nvec(&[-1, 1])], &[]),
            invariant_rays: vec![nvec(&[-1, 1])],
            colors: vec![Color { label: "d".into(), image: nvec(&[2, 2]), a_d: int(2) }],
            valuation_cone: PolyCone::from_inequalities(2, &[mvec(&[-1, 0])], &[]),
            dh_roots: vec![DhFactor { form: nvec(&[1, 1]), multiplicity: 1 }],
            dimension_n: 3,
        }
    }

    #[test]
    fn c2_angle_weight() {
        let d = orthant(2);
        assert_eq!(angle_weight(&d, &Angles::trivial(&d)).unwrap(), mvec(&[1, 1]));
    }

    #[test]
    fn inconsistent_angles_are_not_cartier() {
        let d = toric(&[nvec(&[1, 1, 1]), nvec(&[-1, 1, 1]), nvec(&[1, -1, 1]), nvec(&[-1, -1, 1])], 3);
        assert_eq!(angle_weight(&d, &Angles::trivial(&d)).unwrap(), mvec(&[0, 0, 1]));
        let bad = Angles(vec![int(1), int(1), int(1), q(1, 2)]);
        assert!(matches!(angle_weight(&d, &bad), Err(KError::NotRCartier(_))));
    }

    #[test]
    fn angles_out_of_range() {
        let d = orthant(2);
        assert!(matches!(angle_weight(&d, &Angles(vec![int(0), int(1)])), Err(KError::InvalidAngles(_))));
    }

    #[test]
    fn sl2_barycenter() {
        let p = PolarizedLogCone::new(sl2(), Angles(vec![int(1)]), nvec(&[0, 3])).unwrap();
        assert_eq!(barycenter(&p).unwrap(), Vector::new(vec![q(1, 3), int(1)]));
        let r = verdict(&p).unwrap();
        assert_eq!(r.verdict, Verdict::KStable);
        assert!(r.paths_agree());
        assert_eq!(futaki(&p, &nvec(&[-1, 0])).unwrap(), q(1, 3));
    }

    #[test]
    fn reeb_outside_cone_is_rejected() {
        let e = PolarizedLogCone::new(sl2(), Angles(vec![int(1)]), nvec(&[0, -1]));
        assert!(matches!(e, Err(KError::InvalidPolarization(_))));
        let e = PolarizedLogCone::new(sl2(), Angles(vec![int(1)]), nvec(&[1, 3]));
        assert!(matches!(e, Err(KError::InvalidPolarization(_))));
    }

    #[test]
    fn futaki_outside_valuation_cone() {
        let p = PolarizedLogCone::new(sl2(), Angles(vec![int(1)]), nvec(&[0, 3])).unwrap();
        assert!(matches!(futaki(&p, &nvec(&[1, 0])), Err(KError::NoSuchConfiguration { .. })));
    }

    #[test]
    fn futaki_scale_invariance_and_lineality() {
        let d = orthant(3);
        let p = PolarizedLogCone::new(d.clone(), Angles::trivial(&d), nvec(&[1, 1, 1])).unwrap();
        let p3 = p.with_reeb(nvec(&[3, 3, 3])).unwrap();
        for nu in [nvec(&[1, 0, 0]), nvec(&[2, -1, 5])] {
            assert_eq!(futaki(&p, &nu).unwrap(), futaki(&p3, &nu).unwrap());
            assert!(futaki(&p, &nu).unwrap().is_zero());
        }
    }

    #[test]
    fn orthant_volume_and_scaling() {
        // the Laplace integral of the orthant is 1 / (xi_1 xi_2 xi_3); vol carries the factor n^n
        let d = orthant(3);
        let p = PolarizedLogCone::new(d.clone(), Angles::trivial(&d), nvec(&[1, 2, 3])).unwrap();
        assert_eq!(volume(&p).unwrap(), q(27, 6));
        let p2 = p.with_reeb(nvec(&[2, 4, 6])).unwrap();
        assert_eq!(volume(&p2).unwrap(), q(27, 48));
        assert_eq!(normalized_volume(&p).unwrap(), normalized_volume(&p2).unwrap());
    }

    #[test]
    fn toric_c3_numeric_minimizer() {
        let d = orthant(3);
        let angles = Angles(vec![int(1), q(1, 2), int(1)]);
        let s = reeb_solve(&d, &angles, None).unwrap();
        assert_eq!(s.method, SolverMethod::Numeric);
        assert_eq!(s.xi(), Some(&nvec(&[1, 2, 1])));
    }

    #[test]
    fn unique_ray_solver() {
        let s = reeb_solve(&sl2(), &Angles(vec![int(1)]), None).unwrap();
        assert_eq!(s.method, SolverMethod::UniqueRay);
        assert_eq!(s.xi(), Some(&nvec(&[0, 3])));
    }

    #[test]
    fn family_rejected_when_reeb_cone_is_a_ray() {
        let fam = ReebFamily { xi0: nvec(&[0, 1]), xi1: nvec(&[1, 0]) };
        assert!(matches!(reeb_solve(&sl2(), &Angles(vec![int(1)]), Some(&fam)), Err(KError::FamilyNotApplicable(_))));
    }

    #[test]
    fn rank_two_univariate_orthant() {
        // C^2 with angles (1, 1/2): the minimizer is xi = (1, 2)
        let d = orthant(2);
        let s = reeb_solve(&d, &Angles(vec![int(1), q(1, 2)]), None).unwrap();
        assert_eq!(s.method, SolverMethod::Univariate);
        assert_eq!(s.xi(), Some(&nvec(&[1, 2])));
    }
}
