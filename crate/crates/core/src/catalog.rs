//! Ready-made colored cone data for the worked examples, plus two
//! parametric families of rank-one horosymmetric cones.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cones::{nvec, validate_colored_cone, Color, ColoredConeData, DhFactor, PolyCone, Violation};
use crate::exactnum::{int, pair, q, Rational, Vector, M, N};
use crate::integrate::{slice, SliceResult};
use crate::kstability::{
    reeb_solve, stationarity_polynomial, verdict, Angles, KError, Obstruction, PolarizedLogCone, ReebFamily, ReebOutcome,
    ReebSolution, VerdictReport,
};
use crate::rootdata::{RootError, RootSystemData, RootType};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown catalog id {0:?}")]
    UnknownId(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("catalog data failed validation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    K(#[from] KError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootLength {
    Long,
    Short,
}

impl FromStr for RootLength {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "long" => Ok(RootLength::Long),
            "short" => Ok(RootLength::Short),
            other => Err(CatalogError::InvalidParams(format!("root must be long or short, got {other:?}"))),
        }
    }
}

impl fmt::Display for RootLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootLength::Long => "long",
            RootLength::Short => "short",
        })
    }
}

/// One density factor `(c0 + c1 u)^multiplicity` of a rank-one horosymmetric cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFactor {
    pub c0: Rational,
    pub c1: Rational,
    pub multiplicity: u32,
}

/// A rank-one horosymmetric cone: the moment polytope of the base is the
/// segment `[q_minus, q_plus]` (with `q_minus < 0 < q_plus`) carrying the
/// density `prod (c0 + c1 u)^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HorosymParams {
    pub q_minus: Rational,
    pub q_plus: Rational,
    pub factors: Vec<LinearFactor>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogId {
    Sl2RankOne,
    G2Cone { m: u32 },
    C3Module,
    A1TimesC,
    HorosymRankOne(HorosymParams),
    BoundaryDivisorCone { kind: RootType, root: RootLength, m: u32 },
}

impl CatalogId {
    pub fn name(&self) -> &'static str {
        match self {
            CatalogId::Sl2RankOne => "sl2_rank_one",
            CatalogId::G2Cone { .. } => "g2_cone",
            CatalogId::C3Module => "c3_module",
            CatalogId::A1TimesC => "a1_times_c",
            CatalogId::HorosymRankOne(_) => "horosym_rank_one",
            CatalogId::BoundaryDivisorCone { .. } => "boundary_divisor_cone",
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogId::G2Cone { m } => write!(f, "g2_cone(m={m})"),
            CatalogId::HorosymRankOne(p) => {
                write!(f, "horosym_rank_one(q-={}, q+={}, factors=[", p.q_minus, p.q_plus)?;
                for (i, fa) in p.factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({} + {} u)^{}", fa.c0, fa.c1, fa.multiplicity)?;
                }
                write!(f, "])")
            }
            CatalogId::BoundaryDivisorCone { kind, root, m } => {
                write!(f, "boundary_divisor_cone({kind}, {root}, m={m})")
            }
            other => f.write_str(other.name()),
        }
    }
}

/// How an entry is polarized by default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Polarization {
    Reeb(Vector<N>),
    Family(ReebFamily),
    /// Let the Reeb solver pick its own search space.
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Value printed in a published worked example.
    Published,
    /// Value obtained by a separate symbolic computation, named by the string.
    Oracle(&'static str),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Published => f.write_str("published worked example"),
            Provenance::Oracle(name) => write!(f, "oracle: {name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub quantity: &'static str,
    pub value: String,
    pub source: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: CatalogId,
    pub description: String,
    pub data: ColoredConeData,
    pub angles: Angles,
    pub polarization: Polarization,
    pub expected: Vec<Expectation>,
}

fn expect(quantity: &'static str, value: impl Into<String>, source: Provenance) -> Expectation {
    Expectation { quantity, value: value.into(), source }
}

/// Ids accepted by [`parse_id`] and the CLI, with a one-line summary each.
pub fn list() -> Vec<(&'static str, &'static str)> {
    vec![
        ("sl2_rank_one", "cone over the rank-one SL2/N(T) compactification"),
        ("g2_cone", "horospherical asymptotic cone of G2 symmetric spaces (m = 1 or 2)"),
        ("c3_module", "C^3 as a spherical SO3 x C* module"),
        ("a1_times_c", "A1 x C, the horospherical central fiber of C^3"),
        ("horosym_rank_one", "rank-one horosymmetric cone from a weighted segment"),
        ("boundary_divisor_cone", "cone over a boundary divisor of a rank-two canonical compactification"),
    ]
}

/// Build an id from its name and the optional parameters the CLI exposes.
pub fn parse_id(
    name: &str,
    m: Option<u32>,
    kind: Option<RootType>,
    root: Option<RootLength>,
    horosym: Option<HorosymParams>,
) -> Result<CatalogId, CatalogError> {
    Ok(match name {
        "sl2_rank_one" => CatalogId::Sl2RankOne,
        "g2_cone" => CatalogId::G2Cone { m: m.unwrap_or(1) },
        "c3_module" => CatalogId::C3Module,
        "a1_times_c" => CatalogId::A1TimesC,
        "horosym_rank_one" => CatalogId::HorosymRankOne(horosym.unwrap_or_else(sl2_params)),
        "boundary_divisor_cone" => CatalogId::BoundaryDivisorCone {
            kind: kind.unwrap_or(RootType::G2),
            root: root.unwrap_or(RootLength::Long),
            m: m.unwrap_or(1),
        },
        other => return Err(CatalogError::UnknownId(other.to_string())),
    })
}

/// Segment `[-1, 1]` with density `1 + u`: the SL2 example in segment form.
pub fn sl2_params() -> HorosymParams {
    HorosymParams {
        q_minus: int(-1),
        q_plus: int(1),
        factors: vec![LinearFactor { c0: int(1), c1: int(1), multiplicity: 1 }],
    }
}

pub fn build(id: &CatalogId) -> Result<CatalogEntry, CatalogError> {
    let entry = match id {
        CatalogId::Sl2RankOne => sl2_rank_one(),
        CatalogId::G2Cone { m } => g2_cone(*m)?,
        CatalogId::C3Module => c3_module(),
        CatalogId::A1TimesC => a1_times_c(),
        CatalogId::HorosymRankOne(p) => horosym_rank_one(p)?,
        CatalogId::BoundaryDivisorCone { kind, root, m } => boundary_divisor_cone(*kind, *root, *m)?,
    };
    validate_colored_cone(&entry.data).map_err(CatalogError::Invalid)?;
    Ok(entry)
}

/// Every fixed entry, with both G2 multiplicities and both boundary divisors.
pub fn all_entries() -> Vec<CatalogEntry> {
    let mut ids = vec![CatalogId::Sl2RankOne, CatalogId::G2Cone { m: 1 }, CatalogId::G2Cone { m: 2 }, CatalogId::C3Module, CatalogId::A1TimesC];
    for m in [1, 2] {
        for root in [RootLength::Long, RootLength::Short] {
            ids.push(CatalogId::BoundaryDivisorCone { kind: RootType::G2, root, m });
        }
    }
    ids.push(CatalogId::HorosymRankOne(sl2_params()));
    ids.iter().map(|id| build(id).expect("catalog entries are valid")).collect()
}

fn half_plane() -> PolyCone<N> {
    PolyCone::from_inequalities(2, &[Vector::<M>::from_ints(&[-1, 0])], &[])
}

// N coordinates are (alpha^vee / 2, dual of eta); the unique color maps to alpha^vee.
fn sl2_rank_one() -> CatalogEntry {
    let data = ColoredConeData {
        lattice_rank: 2,
        cone: PolyCone::from_generators(2, &[nvec(&[1, 1]), nvec(&[-1, 1])], &[]),
        invariant_rays: vec![nvec(&[-1, 1])],
        colors: vec![Color { label: "d_alpha".into(), image: nvec(&[2, 2]), a_d: int(2) }],
        valuation_cone: half_plane(),
        dh_roots: vec![DhFactor { form: nvec(&[1, 1]), multiplicity: 1 }],
        dimension_n: 3,
    };
    let angles = Angles::trivial(&data);
    CatalogEntry {
        id: CatalogId::Sl2RankOne,
        description: "Fano cone over the rank-one compactification of SL2/N(T); Q_X = [-1, 1] alpha^vee/2".into(),
        data,
        angles,
        polarization: Polarization::Solve,
        expected: vec![
            expect("barycenter pairing with alpha^vee/2", "1/3", Provenance::Published),
            expect("verdict", "KStable", Provenance::Published),
        ],
    }
}

fn g2_system(m: u32) -> Result<RootSystemData, CatalogError> {
    Ok(RootSystemData::new(RootType::G2)?.with_uniform_multiplicity(m))
}

/// M has the simple-root basis (alpha_1 short); the valuation cone is all of N.
fn g2_cone(m: u32) -> Result<CatalogEntry, CatalogError> {
    if !(1..=2).contains(&m) {
        return Err(CatalogError::InvalidParams(format!("g2_cone needs m in {{1, 2}}, got {m}")));
    }
    let sys = g2_system(m)?;
    let factor = int(if m == 1 { 2 } else { 1 });
    let mut colors = Vec::new();
    for i in 0..2 {
        let image = sys.coroot(&sys.simple_root(i))?.scale(&factor);
        colors.push(Color { label: format!("d_{}", i + 1), image, a_d: int(4) });
    }
    let gens: Vec<Vector<N>> = colors.iter().map(|c| c.image.clone()).collect();
    let dh_roots = sys
        .roots_with_multiplicity()
        .into_iter()
        .map(|(r, mult)| DhFactor { form: sys.kappa_form(&r), multiplicity: mult })
        .collect::<Vec<_>>();
    let dimension_n = 2 + dh_roots.iter().map(|f| f.multiplicity as usize).sum::<usize>();
    let data = ColoredConeData {
        lattice_rank: 2,
        cone: PolyCone::from_generators(2, &gens, &[]),
        invariant_rays: vec![],
        colors,
        valuation_cone: PolyCone::whole_space(2),
        dh_roots,
        dimension_n,
    };
    let expected_poly = if m == 1 {
        "2376 + 9225 t + 13407 t^2 + 9357 t^3 + 3179 t^4 + 424 t^5"
    } else {
        "20558772 + 134444448 t + 374274594 t^2 + 590688162 t^3 + 587394519 t^4 + 383740299 t^5 + 165293858 t^6 + 45384306 t^7 + 7221048 t^8 + 507988 t^9"
    };
    Ok(CatalogEntry {
        id: CatalogId::G2Cone { m },
        description: format!("horospherical asymptotic cone of the G2 symmetric spaces with root multiplicity {m}"),
        data,
        angles: Angles(vec![]),
        polarization: Polarization::Family(g2_family()),
        expected: vec![
            expect("angle weight", format!("({}, {})", 10 * m, 6 * m), Provenance::Published),
            expect("stationarity polynomial", expected_poly, Provenance::Published),
            expect("outcome", "NoStableReeb", Provenance::Published),
        ],
    })
}

/// `xi(t) = alpha_1-dual + t alpha_2-dual`, whose Killing-orthogonal slice direction is `alpha_2 - t alpha_1`.
pub fn g2_family() -> ReebFamily {
    ReebFamily { xi0: nvec(&[1, 0]), xi1: nvec(&[0, 1]) }
}

/// The stationarity polynomial of the G2 cone along [`g2_family`], as
/// primitive integer coefficients in increasing degree.
pub fn g2_reeb_polynomial(m: u32) -> Result<Vec<BigInt>, CatalogError> {
    let entry = g2_cone(m)?;
    let w = crate::kstability::angle_weight(&entry.data, &entry.angles)?;
    Ok(stationarity_polynomial(&entry.data, &w, &g2_family())?.normalized)
}

// N coordinates are (alpha^vee / 2, chi-dual): z_h has weight (1/2, 1/2) and q weight (0, 1).
fn c3_module() -> CatalogEntry {
    let data = ColoredConeData {
        lattice_rank: 2,
        cone: PolyCone::from_generators(2, &[nvec(&[1, 0]), nvec(&[-1, 1])], &[]),
        invariant_rays: vec![nvec(&[-1, 1])],
        colors: vec![Color { label: "d_alpha".into(), image: nvec(&[2, 0]), a_d: int(1) }],
        valuation_cone: half_plane(),
        dh_roots: vec![DhFactor { form: nvec(&[1, 0]), multiplicity: 1 }],
        dimension_n: 3,
    };
    let angles = Angles::trivial(&data);
    CatalogEntry {
        id: CatalogId::C3Module,
        description: "C^3 as the spherical SO3 x C* module".into(),
        data,
        angles,
        polarization: Polarization::Reeb(nvec(&[0, 2])),
        expected: vec![
            expect("angle weight", "(1/2, 3/2)", Provenance::Oracle("weights of z and q")),
            expect("verdict at the flat Reeb vector (0, 2)", "KStable", Provenance::Oracle("barycenter offset (1/2, 0)")),
        ],
    }
}

/// The horospherical central fiber of [`c3_module`], written in the same N coordinates.
fn a1_times_c() -> CatalogEntry {
    let mut data = c3_module().data;
    data.valuation_cone = PolyCone::whole_space(2);
    let angles = Angles::trivial(&data);
    CatalogEntry {
        id: CatalogId::A1TimesC,
        description: "A1 x C, central fiber of the horospherical degeneration of C^3".into(),
        data,
        angles,
        polarization: Polarization::Solve,
        expected: vec![
            expect("K-stable Reeb vector (normalized)", "(3, 1)", Provenance::Oracle("Laplace volume 1/(y (x + y)^2)")),
            expect("K-stable Reeb vector direction", "(1, 1)", Provenance::Published),
        ],
    }
}

/// Moment cone `cone{(q_minus, 1), (q_plus, 1)}` in M coordinates `(u, w)`.
fn horosym_rank_one(p: &HorosymParams) -> Result<CatalogEntry, CatalogError> {
    if !(p.q_minus.is_negative() && p.q_plus.is_positive()) {
        return Err(CatalogError::InvalidParams(format!(
            "need q_minus < 0 < q_plus, got [{}, {}]",
            p.q_minus, p.q_plus
        )));
    }
    if p.factors.is_empty() {
        return Err(CatalogError::InvalidParams("at least one density factor is required".into()));
    }
    let color = Vector::<N>::new(vec![int(1), -p.q_minus.clone()]).primitive().expect("nonzero");
    let ray = Vector::<N>::new(vec![int(-1), p.q_plus.clone()]).primitive().expect("nonzero");
    // <w, ray> = 1 for w = (0, 1/ray_w)
    let w = Vector::<M>::new(vec![Rational::zero(), ray[1].recip()]);
    let a_d = pair(&w, &color);
    let mut dh_roots = Vec::new();
    for f in &p.factors {
        let form = Vector::<N>::new(vec![f.c1.clone(), f.c0.clone()]);
        if form.is_zero() || f.multiplicity == 0 {
            return Err(CatalogError::InvalidParams("density factors must be nonzero".into()));
        }
        for end in [&p.q_minus, &p.q_plus] {
            if (&f.c0 + &f.c1 * end).is_negative() {
                return Err(CatalogError::InvalidParams(format!(
                    "factor {} + {} u is negative at u = {end}",
                    f.c0, f.c1
                )));
            }
        }
        dh_roots.push(DhFactor { form, multiplicity: f.multiplicity });
    }
    let dimension_n = 2 + p.factors.iter().map(|f| f.multiplicity as usize).sum::<usize>();
    let data = ColoredConeData {
        lattice_rank: 2,
        cone: PolyCone::from_generators(2, &[color.clone(), ray.clone()], &[]),
        invariant_rays: vec![ray],
        colors: vec![Color { label: "d".into(), image: color, a_d }],
        valuation_cone: half_plane(),
        dh_roots,
        dimension_n,
    };
    let angles = Angles::trivial(&data);
    Ok(CatalogEntry {
        id: CatalogId::HorosymRankOne(p.clone()),
        description: "rank-one horosymmetric cone over a weighted segment".into(),
        data,
        angles,
        polarization: Polarization::Solve,
        expected: vec![],
    })
}

/// The segment parameters of the Fano blowdown of a boundary divisor:
/// the line `rho + t alpha` between the two walls of the Weyl chamber,
/// with density `prod kappa(beta, rho + t alpha)^m`.
pub fn boundary_divisor_params(kind: RootType, root: RootLength, m: u32) -> Result<HorosymParams, CatalogError> {
    if m == 0 {
        return Err(CatalogError::InvalidParams("multiplicity must be positive".into()));
    }
    let sys = RootSystemData::new(kind)?.with_uniform_multiplicity(m);
    if sys.rank != 2 {
        return Err(CatalogError::InvalidParams(format!("{kind} is not of rank two")));
    }
    let (a0, a1) = (sys.simple_root(0), sys.simple_root(1));
    let (l0, l1) = (sys.kappa(&a0, &a0), sys.kappa(&a1, &a1));
    if l0 == l1 {
        return Err(CatalogError::InvalidParams(format!("{kind} has no long and short simple roots")));
    }
    let long_first = l0 > l1;
    let (alpha, other) = match (root, long_first) {
        (RootLength::Long, true) | (RootLength::Short, false) => (a0, a1),
        _ => (a1, a0),
    };
    let rho = sys.half_sum();
    let lower = -sys.kappa(&rho, &alpha) / sys.kappa(&alpha, &alpha);
    let upper = -sys.kappa(&rho, &other) / sys.kappa(&alpha, &other);
    let factors = sys
        .roots_with_multiplicity()
        .into_iter()
        .map(|(beta, mult)| LinearFactor { c0: sys.kappa(&beta, &rho), c1: sys.kappa(&beta, &alpha), multiplicity: mult })
        .collect();
    Ok(HorosymParams { q_minus: lower, q_plus: upper, factors })
}

fn boundary_divisor_cone(kind: RootType, root: RootLength, m: u32) -> Result<CatalogEntry, CatalogError> {
    let params = boundary_divisor_params(kind, root, m)?;
    let mut entry = horosym_rank_one(&params)?;
    entry.id = CatalogId::BoundaryDivisorCone { kind, root, m };
    entry.description = format!("Fano cone over the blowdown of the {root}-root boundary divisor, {kind} restricted roots, multiplicity {m}");
    if kind == RootType::G2 {
        let v = match root {
            RootLength::Long => "KUnstable",
            RootLength::Short => "KStable",
        };
        entry.expected.push(expect("verdict", v, Provenance::Published));
    }
    Ok(entry)
}

/// The three segments attached to a rank-one cone whose valuation cone is `{x <= 0}`:
/// `Q_X` (in units of the first N coordinate), its dual `Q_X*`, and `Q_X* + shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankOnePolytopes {
    pub q_x: (Rational, Rational),
    pub q_x_dual: (Rational, Rational),
    pub delta_x: (Rational, Rational),
}

/// Height functions are the second coordinates: `Q_X` is the cone cut at
/// height one in N, `Q_X*` the moment cone cut at height one in M.
pub fn rank_one_polytopes(data: &ColoredConeData, shift: &Rational) -> Option<RankOnePolytopes> {
    if data.lattice_rank != 2 {
        return None;
    }
    let mut q: Vec<Rational> = data
        .cone
        .rays()
        .iter()
        .filter(|r| r[1].is_positive())
        .map(|r| &r[0] / &r[1])
        .collect();
    q.sort();
    let height = Vector::<N>::new(vec![Rational::zero(), Rational::one()]);
    let SliceResult::Bounded(seg) = slice(&data.moment_cone(), &height, &Rational::one()) else {
        return None;
    };
    let mut d: Vec<Rational> = seg.vertices().iter().map(|v| v[0].clone()).collect();
    d.sort();
    if q.len() != 2 || d.len() != 2 {
        return None;
    }
    Some(RankOnePolytopes {
        q_x: (q[0].clone(), q[1].clone()),
        q_x_dual: (d[0].clone(), d[1].clone()),
        delta_x: (&d[0] + shift, &d[1] + shift),
    })
}

/// Everything `catalog run` reports.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogRun {
    pub id: CatalogId,
    pub solution: Option<ReebSolution>,
    pub report: Option<VerdictReport>,
    /// `<bar - angle_weight, e_1>`, the stability margin of rank-one cones.
    pub coroot_pairing: Option<Rational>,
    /// Primitive integer coefficients of the obstruction when no admissible root exists.
    pub obstruction_polynomial: Option<Vec<BigInt>>,
}

pub fn run(entry: &CatalogEntry) -> Result<CatalogRun, CatalogError> {
    let (solution, report) = match &entry.polarization {
        Polarization::Reeb(xi) => {
            let p = PolarizedLogCone::new(entry.data.clone(), entry.angles.clone(), xi.clone())?;
            (None, Some(verdict(&p)?))
        }
        Polarization::Family(f) => {
            let s = reeb_solve(&entry.data, &entry.angles, Some(f))?;
            let r = solution_report(entry, &s)?;
            (Some(s), r)
        }
        Polarization::Solve => {
            let s = reeb_solve(&entry.data, &entry.angles, None)?;
            let r = solution_report(entry, &s)?;
            (Some(s), r)
        }
    };
    let rank_one = entry.data.lattice_rank == 2 && entry.data.valuation_cone.same_set(&half_plane());
    let coroot_pairing = match (&report, rank_one) {
        (Some(r), true) => Some(r.offset[0].clone()),
        _ => None,
    };
    let obstruction_polynomial = solution.as_ref().and_then(|s| match &s.outcome {
        ReebOutcome::NoStableReeb(Obstruction::NoAdmissibleRoot { polynomial, .. }) => {
            Some(polynomial.content_normalized())
        }
        _ => None,
    });
    Ok(CatalogRun { id: entry.id.clone(), solution, report, coroot_pairing, obstruction_polynomial })
}

/// The verdict behind a solver outcome: the report at the minimizer, or at the
/// unique candidate when that candidate was destabilized.
fn solution_report(entry: &CatalogEntry, s: &ReebSolution) -> Result<Option<VerdictReport>, CatalogError> {
    match &s.outcome {
        ReebOutcome::Found { report, .. } => Ok(Some((**report).clone())),
        ReebOutcome::NoStableReeb(Obstruction::NegativeFutaki { xi, .. }) => {
            let p = PolarizedLogCone::new(entry.data.clone(), entry.angles.clone(), xi.clone())?;
            Ok(Some(verdict(&p)?))
        }
        _ => Ok(None),
    }
}

/// Strictly semistable angles for [`c3_module`]: the invariant divisor gets angle 1/4.
pub fn c3_semistable_angles() -> Angles {
    Angles(vec![q(1, 4)])
}
