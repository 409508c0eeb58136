//! Root systems of types A, B, C, D and G2 in simple-root coordinates,
//! Killing-form pairings, coroots and the Duistermaat–Heckman density.
//!
//! Roots are vectors of `M` written in the basis of simple roots. The
//! Killing form is the Gram matrix of the simple roots, normalized so that
//! a short root has square length 1. G2 has no rational Euclidean model with
//! that normalization, which is why the simple-root basis is used throughout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::cones::DhFactor;
use crate::exactnum::{dot, int, mat_vec, pair, q, Rational, Vector, M, N};
use crate::integrate::MultiPolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootType {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
    G2,
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootType::A(n) => write!(f, "A{n}"),
            RootType::B(n) => write!(f, "B{n}"),
            RootType::C(n) => write!(f, "C{n}"),
            RootType::D(n) => write!(f, "D{n}"),
            RootType::G2 => write!(f, "G2"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("unsupported root system {0}")]
    Unsupported(String),
    #[error("{0} is not a root of the system")]
    NotARoot(String),
    #[error("DH factor {0} is zero")]
    ZeroRoot(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSystemData {
    pub kind: RootType,
    pub rank: usize,
    /// Killing form on simple roots.
    pub gram: Vec<Vec<Rational>>,
    /// Restricted-root multiplicities; roots not listed have multiplicity 1.
    pub multiplicities: BTreeMap<Vector<M>, u32>,
}

impl RootSystemData {
    pub fn new(kind: RootType) -> Result<Self, RootError> {
        let rank = match kind {
            RootType::A(n) if n >= 1 => n,
            RootType::B(n) if n >= 2 => n,
            RootType::C(n) if n >= 2 => n,
            RootType::D(n) if n >= 4 => n,
            RootType::G2 => 2,
            other => return Err(RootError::Unsupported(other.to_string())),
        };
        let mut g = vec![vec![Rational::zero(); rank]; rank];
        let chain = |g: &mut Vec<Vec<Rational>>, i: usize, j: usize, v: Rational| {
            g[i][j] = v.clone();
            g[j][i] = v;
        };
        match kind {
            RootType::A(_) => {
                for i in 0..rank {
                    g[i][i] = int(1);
                }
                for i in 0..rank - 1 {
                    chain(&mut g, i, i + 1, q(-1, 2));
                }
            }
            RootType::B(_) => {
                // alpha_1 .. alpha_{n-1} long, alpha_n short
                for i in 0..rank - 1 {
                    g[i][i] = int(2);
                    chain(&mut g, i, i + 1, int(-1));
                }
                g[rank - 1][rank - 1] = int(1);
            }
            RootType::C(_) => {
                // alpha_1 .. alpha_{n-1} short, alpha_n long
                for i in 0..rank - 1 {
                    g[i][i] = int(1);
                }
                for i in 0..rank.saturating_sub(2) {
                    chain(&mut g, i, i + 1, q(-1, 2));
                }
                g[rank - 1][rank - 1] = int(2);
                chain(&mut g, rank - 2, rank - 1, int(-1));
            }
            RootType::D(_) => {
                for i in 0..rank {
                    g[i][i] = int(1);
                }
                for i in 0..rank - 2 {
                    chain(&mut g, i, i + 1, q(-1, 2));
                }
                chain(&mut g, rank - 3, rank - 1, q(-1, 2));
            }
            RootType::G2 => {
                // alpha_1 short with square length 1, alpha_2 long with square length 3
                g[0][0] = int(1);
                g[1][1] = int(3);
                chain(&mut g, 0, 1, q(-3, 2));
            }
        }
        Ok(RootSystemData { kind, rank, gram: g, multiplicities: BTreeMap::new() })
    }

    /// Every positive root gets multiplicity `m`.
    pub fn with_uniform_multiplicity(mut self, m: u32) -> Self {
        for r in self.positive_roots() {
            self.multiplicities.insert(r, m);
        }
        self
    }

    /// Rescale the Killing form by a positive constant.
    pub fn rescaled(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        out.gram = self.gram.iter().map(|r| r.iter().map(|x| x * c).collect()).collect();
        out
    }

    pub fn multiplicity(&self, root: &Vector<M>) -> u32 {
        self.multiplicities.get(root).copied().unwrap_or(1)
    }

    pub fn simple_root(&self, i: usize) -> Vector<M> {
        Vector::unit(self.rank, i)
    }

    pub fn kappa(&self, a: &Vector<M>, b: &Vector<M>) -> Rational {
        dot(a.coords(), &mat_vec(&self.gram, b.coords()))
    }

    /// The linear form `p -> kappa(a, p)` as an element of `N`.
    pub fn kappa_form(&self, a: &Vector<M>) -> Vector<N> {
        Vector::new(mat_vec(&self.gram, a.coords()))
    }

    /// Identify a form in `N` with the element of `M` it is the Killing dual of.
    pub fn kappa_dual(&self, f: &Vector<N>) -> Vector<M> {
        let x = crate::exactnum::solve_linear(&self.gram, f.coords()).expect("Killing form is nondegenerate");
        Vector::new(x)
    }

    pub fn cartan_matrix(&self) -> Vec<Vec<Rational>> {
        (0..self.rank)
            .map(|i| {
                (0..self.rank)
                    .map(|j| int(2) * &self.gram[i][j] / &self.gram[j][j])
                    .collect()
            })
            .collect()
    }

    fn reflect(&self, beta: &Vector<M>, i: usize) -> Vector<M> {
        let ai = self.simple_root(i);
        let c = int(2) * self.kappa(beta, &ai) / self.kappa(&ai, &ai);
        beta - &ai.scale(&c)
    }

    /// Positive roots, sorted by height and then lexicographically.
    pub fn positive_roots(&self) -> Vec<Vector<M>> {
        let mut seen: BTreeSet<Vector<M>> = (0..self.rank).map(|i| self.simple_root(i)).collect();
        let mut frontier: Vec<Vector<M>> = seen.iter().cloned().collect();
        while let Some(b) = frontier.pop() {
            for i in 0..self.rank {
                let r = self.reflect(&b, i);
                let positive = r.coords().iter().all(|c| *c >= Rational::zero());
                if positive && !r.is_zero() && seen.insert(r.clone()) {
                    frontier.push(r);
                }
            }
        }
        let mut out: Vec<Vector<M>> = seen.into_iter().collect();
        out.sort_by(|a, b| {
            let ha: Rational = a.coords().iter().sum();
            let hb: Rational = b.coords().iter().sum();
            ha.cmp(&hb).then_with(|| b.cmp(a))
        });
        out
    }

    pub fn is_root(&self, a: &Vector<M>) -> bool {
        let pos = self.positive_roots();
        pos.contains(a) || pos.contains(&-a)
    }

    /// The coroot as a linear form on `M`: `beta -> 2 kappa(beta, a) / kappa(a, a)`.
    pub fn coroot(&self, a: &Vector<M>) -> Result<Vector<N>, RootError> {
        if !self.is_root(a) {
            return Err(RootError::NotARoot(a.to_string()));
        }
        let c = int(2) / self.kappa(a, a);
        Ok(self.kappa_form(a).scale(&c))
    }

    /// The scalar `c` with `a^vee = c * a` under the Killing identification of `N` with `M`.
    pub fn coroot_scale(&self, a: &Vector<M>) -> Result<Rational, RootError> {
        if !self.is_root(a) {
            return Err(RootError::NotARoot(a.to_string()));
        }
        Ok(int(2) / self.kappa(a, a))
    }

    /// `(root, multiplicity)` for every positive root.
    pub fn roots_with_multiplicity(&self) -> Vec<(Vector<M>, u32)> {
        self.positive_roots().into_iter().map(|r| {
            let m = self.multiplicity(&r);
            (r, m)
        }).collect()
    }

    /// Sum of the positive roots weighted by multiplicity, halved.
    pub fn half_sum(&self) -> Vector<M> {
        self.roots_with_multiplicity()
            .iter()
            .fold(Vector::zeros(self.rank), |acc, (r, m)| &acc + &r.scale(&int(*m as i64)))
            .scale(&q(1, 2))
    }

    /// Expected number of positive roots for the type.
    pub fn expected_positive_root_count(&self) -> usize {
        match self.kind {
            RootType::A(n) => n * (n + 1) / 2,
            RootType::B(n) | RootType::C(n) => n * n,
            RootType::D(n) => n * (n - 1),
            RootType::G2 => 6,
        }
    }
}

/// Product of linear forms with exponents: the Duistermaat–Heckman density.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DhDensity {
    pub factors: Vec<DhFactor>,
}

impl DhDensity {
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.multiplicity).sum()
    }

    pub fn eval(&self, p: &Vector<M>) -> Rational {
        self.factors
            .iter()
            .fold(Rational::one(), |acc, f| {
                let v = pair(p, &f.form);
                let mut t = Rational::one();
                for _ in 0..f.multiplicity {
                    t *= &v;
                }
                acc * t
            })
    }

    pub fn to_polynomial(&self, nvars: usize) -> MultiPolynomial {
        let mut acc = MultiPolynomial::constant(nvars, Rational::one());
        for f in &self.factors {
            let lin = MultiPolynomial::linear(f.form.coords(), Rational::zero());
            acc = acc.mul(&lin.pow(f.multiplicity));
        }
        acc
    }
}

/// Build the density `prod <kappa(root, .)>^mult` from roots in `M`.
pub fn dh_density(system: &RootSystemData, roots: &[(Vector<M>, u32)]) -> Result<DhDensity, RootError> {
    let mut factors = Vec::new();
    for (i, (r, m)) in roots.iter().enumerate() {
        if r.is_zero() {
            return Err(RootError::ZeroRoot(i));
        }
        factors.push(DhFactor { form: system.kappa_form(r), multiplicity: *m });
    }
    Ok(DhDensity { factors })
}
