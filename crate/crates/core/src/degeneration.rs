//! Equivariant degenerations of spherical cones: central fibers of test
//! configurations, the one-step K-stable degeneration, the horospherical
//! degeneration and the crepant resolution search for the G2 cone.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::cones::{Color, ColoredConeData, DhFactor, Membership, PolyCone};
use crate::exactnum::{self, hermite_normal_form, unimodular_completion, Rational, Vector, M, N};
use crate::kstability::{verdict, Angles, KError, PolarizedLogCone, Verdict, VerdictReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DegenerationError {
    #[error("{nu} is not in the valuation cone, so it defines no test configuration")]
    NoSuchConfiguration { nu: Vector<N> },
    #[error("the zero vector defines no test configuration")]
    ZeroDirection,
    #[error("input is K-unstable (destabilized along {destabilizer}); there is no K-stable degeneration")]
    NotSemistable { destabilizer: Vector<N> },
    #[error("the valuation cone has empty interior")]
    EmptyInterior,
    #[error("central fiber has verdict {0:?} instead of KStable")]
    NotStableAfterStep(Verdict),
    #[error(transparent)]
    K(#[from] KError),
}

/// The central fiber of the test configuration along `direction`.
///
/// The fiber is written in the lattice `M0 = (nu^perp ∩ M) ⊕ Z chi`. Row `i`
/// of `lattice_iso` is the `i`-th basis vector of `M0` expressed in `M`; the
/// last row is `chi`, so `direction` becomes the last unit vector of `N0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerationStep {
    pub direction: Vector<N>,
    pub is_trivial: bool,
    pub horospherical: bool,
    pub central_fiber: ColoredConeData,
    pub lattice_iso: Vec<Vec<BigInt>>,
    /// Set when the requested direction was not primitive: the factor it was divided by.
    pub rescaled: Option<Rational>,
}

impl DegenerationStep {
    fn basis(&self) -> Vec<Vec<Rational>> {
        self.lattice_iso
            .iter()
            .map(|r| r.iter().cloned().map(Rational::from_integer).collect())
            .collect()
    }

    pub fn n_to_fiber(&self, v: &Vector<N>) -> Vector<N> {
        Vector::new(exactnum::mat_vec(&self.basis(), v.coords()))
    }

    pub fn n_from_fiber(&self, v: &Vector<N>) -> Vector<N> {
        let inv = exactnum::inverse(&self.basis()).expect("lattice_iso is unimodular");
        Vector::new(exactnum::mat_vec(&inv, v.coords()))
    }

    pub fn m_from_fiber(&self, v: &Vector<M>) -> Vector<M> {
        Vector::new(exactnum::mat_vec(&exactnum::transpose(&self.basis()), v.coords()))
    }

    pub fn m_to_fiber(&self, v: &Vector<M>) -> Vector<M> {
        let inv = exactnum::inverse(&exactnum::transpose(&self.basis())).expect("lattice_iso is unimodular");
        Vector::new(exactnum::mat_vec(&inv, v.coords()))
    }

    /// The fiber's moment cone carried back to `M`.
    pub fn moment_cone_in_source(&self) -> PolyCone<M> {
        let dual = self.central_fiber.moment_cone();
        let rays: Vec<Vector<M>> = dual.rays().iter().map(|r| self.m_from_fiber(r)).collect();
        let lin: Vec<Vector<M>> = dual.lineality().iter().map(|r| self.m_from_fiber(r)).collect();
        PolyCone::from_generators(self.central_fiber.lattice_rank, &rays, &lin)
    }
}

fn lattice_basis(nu: &[BigInt]) -> Result<Vec<Vec<BigInt>>, DegenerationError> {
    let u = unimodular_completion(nu).map_err(|_| DegenerationError::ZeroDirection)?;
    let mut chi = u[0].clone();
    let kernel = hermite_normal_form(&u[1..]);
    // reduce chi against the echelon pivots of the kernel basis
    for row in &kernel {
        if let Some(c) = row.iter().position(|x| !x.is_zero()) {
            let f = chi[c].div_floor(&row[c]);
            for (x, y) in chi.iter_mut().zip(row) {
                *x -= &f * y;
            }
        }
    }
    let mut basis = kernel;
    basis.push(chi);
    Ok(basis)
}

/// Central fiber of the test configuration along `nu`: same moment cone,
/// valuation cone `R nu + V`, lattice re-expressed in the basis adapted to `nu`.
/// Color images are carried over unchanged.
pub fn central_fiber(data: &ColoredConeData, nu: &Vector<N>) -> Result<DegenerationStep, DegenerationError> {
    if nu.is_zero() {
        return Err(DegenerationError::ZeroDirection);
    }
    if nu.dim() != data.lattice_rank || !data.valuation_cone.contains(nu, Membership::Closed) {
        return Err(DegenerationError::NoSuchConfiguration { nu: nu.clone() });
    }
    let prim = nu.primitive().expect("nonzero");
    let rescaled = (prim != *nu).then(|| &nu[first_nonzero(nu)] / &prim[first_nonzero(nu)]);
    let ints: Vec<BigInt> = prim.coords().iter().map(|c| c.to_integer()).collect();
    let basis = lattice_basis(&ints)?;
    let is_trivial = data.valuation_cone.in_lineality(&prim);

    let mut step = DegenerationStep {
        direction: prim.clone(),
        is_trivial,
        horospherical: false,
        central_fiber: data.clone(),
        lattice_iso: basis,
        rescaled,
    };
    let t = |v: &Vector<N>| step.n_to_fiber(v);
    let r = data.lattice_rank;
    let cone_rays: Vec<Vector<N>> = data.cone.rays().iter().map(t).collect();
    let v_rays: Vec<Vector<N>> = data.valuation_cone.rays().iter().map(t).collect();
    let mut v_lin: Vec<Vector<N>> = data.valuation_cone.lineality().iter().map(t).collect();
    v_lin.push(t(&prim));
    let fiber = ColoredConeData {
        lattice_rank: r,
        cone: PolyCone::from_generators(r, &cone_rays, &[]),
        invariant_rays: data.invariant_rays.iter().map(t).collect(),
        colors: data
            .colors
            .iter()
            .map(|c| Color { label: c.label.clone(), image: t(&c.image), a_d: c.a_d.clone() })
            .collect(),
        valuation_cone: PolyCone::from_generators(r, &v_rays, &v_lin),
        dh_roots: data
            .dh_roots
            .iter()
            .map(|f| DhFactor { form: t(&f.form), multiplicity: f.multiplicity })
            .collect(),
        dimension_n: data.dimension_n,
    };
    step.horospherical = fiber.is_horospherical();
    step.central_fiber = fiber;
    Ok(step)
}

fn first_nonzero(v: &Vector<N>) -> usize {
    v.coords().iter().position(|c| !c.is_zero()).expect("nonzero")
}

#[derive(Debug, Clone, PartialEq)]
pub struct KStableDegeneration {
    pub steps: Vec<DegenerationStep>,
    /// The Reeb vector in the coordinates of the last fiber.
    pub reeb: Vector<N>,
    pub report: VerdictReport,
}

/// Degenerate a K-semistable polarized cone along the relative interior of
/// its Futaki vanishing face. The result is checked to be K-stable.
pub fn kstable_degeneration(
    data: &ColoredConeData,
    angles: &Angles,
    xi: &Vector<N>,
) -> Result<KStableDegeneration, DegenerationError> {
    let p = PolarizedLogCone::new(data.clone(), angles.clone(), xi.clone())?;
    let rep = verdict(&p)?;
    if let Some(d) = rep.destabilizer {
        return Err(DegenerationError::NotSemistable { destabilizer: d });
    }
    let zero_rays: Vec<&Vector<N>> = rep
        .futaki_on_rays
        .iter()
        .filter(|r| !r.in_lineality && r.value.is_zero())
        .map(|r| &r.ray)
        .collect();
    let nu = if zero_rays.is_empty() {
        data.valuation_cone.lineality()[0].clone()
    } else {
        // the face is spanned by the negated -V rays
        -&zero_rays.iter().fold(Vector::zeros(data.lattice_rank), |acc, g| &acc + *g)
    };
    let step = central_fiber(data, &nu)?;
    let reeb = step.n_to_fiber(xi);
    let fiber = PolarizedLogCone::new(step.central_fiber.clone(), angles.clone(), reeb.clone())?;
    let report = verdict(&fiber)?;
    if report.verdict != Verdict::KStable {
        return Err(DegenerationError::NotStableAfterStep(report.verdict));
    }
    Ok(KStableDegeneration { steps: vec![step], reeb, report })
}

/// Degenerate along the sum of the generators of the valuation cone, an
/// interior point; the central fiber is horospherical.
pub fn horospherical_degeneration(data: &ColoredConeData) -> Result<DegenerationStep, DegenerationError> {
    let v = &data.valuation_cone;
    if !v.is_full_dimensional() {
        return Err(DegenerationError::EmptyInterior);
    }
    let nu = if v.rays().is_empty() {
        v.lineality()[0].clone()
    } else {
        v.rays().iter().fold(Vector::zeros(data.lattice_rank), |acc, g| &acc + g)
    };
    central_fiber(data, &nu)
}

// ---------------------------------------------------------------------------
// Crepant resolutions of the G2 cone

/// Rational roots of `x^2 + b x + c`.
pub fn rational_roots_monic(b: &Rational, c: &Rational) -> Vec<Rational> {
    let disc = b * b - Rational::from_integer(BigInt::from(4)) * c;
    if disc.is_negative() {
        return vec![];
    }
    let (num, den) = (disc.numer().clone(), disc.denom().clone());
    let (sn, sd) = (num.sqrt(), den.sqrt());
    if &sn * &sn != num || &sd * &sd != den {
        return vec![];
    }
    let s = Rational::new(sn, sd);
    let two = Rational::from_integer(BigInt::from(2));
    let mut out = vec![(-b - &s) / &two, (-b + &s) / &two];
    out.dedup();
    out
}

/// Positive rational `x` with `x^2 - x (2m + 3y) + 6my + 3y^2 = 0`.
pub fn crepant_roots(m: u32, y: &Rational) -> Vec<Rational> {
    let m = Rational::from_integer(BigInt::from(m));
    let three = Rational::from_integer(BigInt::from(3));
    let six = Rational::from_integer(BigInt::from(6));
    let b = -(Rational::from_integer(BigInt::from(2)) * &m + &three * y);
    let c = six * &m * y + three * y * y;
    rational_roots_monic(&b, &c).into_iter().filter(|x| x.is_positive()).collect()
}

/// `d = x alpha_1 + y alpha_2` with positive rational coordinates solving the crepancy equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrepantSolution {
    pub x: Rational,
    pub y: Rational,
}

impl CrepantSolution {
    /// Whether `d` is a lattice point, as a divisor of a resolution requires.
    pub fn is_lattice(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrepantWitness {
    pub m: u32,
    /// Every `y = a/b` in lowest terms with `1 <= a, b <= bound` was tested.
    pub bound: u64,
    pub pairs_checked: u64,
    /// Solutions that exist over the rationals but miss the lattice.
    pub rational_solutions: Vec<CrepantSolution>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrepantOutcome {
    NoCrepantResolution(CrepantWitness),
    Candidate { x: Rational, y: Rational, witness: CrepantWitness },
}

pub const DEFAULT_CREPANT_BOUND: u64 = 200;

/// Exhaustive search of `y = a/b` with `a, b <= bound`: the discriminant
/// `4m^2 - 12my - 3y^2` must be a rational square for `x` to be rational,
/// and only lattice solutions give a candidate divisor.
pub fn crepant_check(m: u32, bound: u64) -> CrepantOutcome {
    let mi = i128::from(m);
    let per_b: Vec<(u64, Vec<CrepantSolution>)> = (1..=bound)
        .into_par_iter()
        .map(|b| {
            let bi = i128::from(b);
            let mut count = 0;
            let mut found = Vec::new();
            for a in 1..=bound {
                if a.gcd(&b) != 1 {
                    continue;
                }
                count += 1;
                let ai = i128::from(a);
                // b^2 times the discriminant
                let d = 4 * mi * mi * bi * bi - 12 * mi * ai * bi - 3 * ai * ai;
                if d < 0 {
                    continue;
                }
                let s = d.sqrt();
                if s * s != d {
                    continue;
                }
                let y = Rational::new(BigInt::from(a), BigInt::from(b));
                found.extend(crepant_roots(m, &y).into_iter().map(|x| CrepantSolution { x, y: y.clone() }));
            }
            (count, found)
        })
        .collect();
    let pairs_checked = per_b.iter().map(|(c, _)| c).sum();
    let mut rational_solutions: Vec<CrepantSolution> = per_b.into_iter().flat_map(|(_, f)| f).collect();
    rational_solutions.sort_by(|p, q| p.y.cmp(&q.y).then_with(|| p.x.cmp(&q.x)));
    let lattice = rational_solutions.iter().find(|s| s.is_lattice()).cloned();
    let witness = CrepantWitness { m, bound, pairs_checked, rational_solutions };
    match lattice {
        Some(s) => CrepantOutcome::Candidate { x: s.x, y: s.y, witness },
        None => CrepantOutcome::NoCrepantResolution(witness),
    }
}

/// Largest `y` with a nonnegative discriminant, as a float, for reporting.
pub fn crepant_y_limit(m: u32) -> f64 {
    let m = m.to_f64().unwrap_or(0.0);
    m * (-12.0 + 192f64.sqrt()) / 6.0
}
