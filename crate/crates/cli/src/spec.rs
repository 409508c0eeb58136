//! The JSON cone specification format. Every number that carries exact
//! data is a string holding an integer or a fraction `p/q`.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use konic::cones::{Color, ColoredConeData, DhFactor, PolyCone};
use konic::exactnum::{parse_rational, Rational, Space, Vector, N};
use konic::kstability::{Angles, ReebFamily};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpecFile {
    pub schema_version: String,
    pub lattice_rank: usize,
    pub cone_generators: Vec<Vec<String>>,
    #[serde(default)]
    pub invariant_rays: Vec<Vec<String>>,
    #[serde(default)]
    pub colors: Vec<ColorSpec>,
    pub valuation_cone: ValuationConeSpec,
    #[serde(default)]
    pub dh_roots: Vec<DhRootSpec>,
    /// Angle per invariant ray index; missing entries mean angle 1.
    #[serde(default)]
    pub angles: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reeb: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    pub dimension_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorSpec {
    pub label: String,
    pub image: Vec<String>,
    pub a_d: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationConeSpec {
    #[serde(default)]
    pub generators: Vec<Vec<String>>,
    #[serde(default)]
    pub lineality: Vec<Vec<String>>,
}

/// A DH factor given by its linear form on the moment side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhRootSpec {
    pub root: Vec<String>,
    pub mult: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub xi0: Vec<String>,
    pub xi1: Vec<String>,
}

/// A parsed specification.
#[derive(Debug, Clone)]
pub struct ConeSpec {
    pub data: ColoredConeData,
    pub angles: Angles,
    pub reeb: Option<Vector<N>>,
    pub family: Option<ReebFamily>,
}

pub fn rational(s: &str, field: &str) -> Result<Rational> {
    parse_rational(s).map_err(|e| anyhow!("{field}: {e}"))
}

pub fn vector<S: Space>(v: &[String], rank: usize, field: &str) -> Result<Vector<S>> {
    if v.len() != rank {
        bail!("{field}: expected {rank} coordinates, got {}", v.len());
    }
    let coords = v
        .iter()
        .enumerate()
        .map(|(i, s)| rational(s, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Vector::new(coords))
}

fn vectors<S: Space>(vs: &[Vec<String>], rank: usize, field: &str) -> Result<Vec<Vector<S>>> {
    vs.iter().enumerate().map(|(i, v)| vector(v, rank, &format!("{field}[{i}]"))).collect()
}

/// Parse a comma-separated vector such as `-1,0` or `1/2, 3`.
pub fn parse_cli_vector(s: &str, rank: usize) -> Result<Vector<N>> {
    let parts: Vec<String> = s.split(',').map(|p| p.trim().to_string()).collect();
    vector(&parts, rank, "--nu")
}

pub fn strings<S: Space>(v: &Vector<S>) -> Vec<String> {
    v.coords().iter().map(ToString::to_string).collect()
}

impl ConeSpecFile {
    pub fn parse_str(text: &str) -> Result<ConeSpecFile> {
        let file: ConeSpecFile = serde_json::from_str(text).context("malformed cone specification")?;
        if file.schema_version != SCHEMA_VERSION {
            bail!("schema_version: unsupported version {:?}, expected {SCHEMA_VERSION:?}", file.schema_version);
        }
        Ok(file)
    }

    pub fn to_spec(&self) -> Result<ConeSpec> {
        let r = self.lattice_rank;
        let gens: Vec<Vector<N>> = vectors(&self.cone_generators, r, "cone_generators")?;
        let invariant_rays = vectors(&self.invariant_rays, r, "invariant_rays")?;
        let colors = self
            .colors
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Ok(Color {
                    label: c.label.clone(),
                    image: vector(&c.image, r, &format!("colors[{i}].image"))?,
                    a_d: rational(&c.a_d, &format!("colors[{i}].a_d"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let v_gens = vectors(&self.valuation_cone.generators, r, "valuation_cone.generators")?;
        let v_lin = vectors(&self.valuation_cone.lineality, r, "valuation_cone.lineality")?;
        let dh_roots = self
            .dh_roots
            .iter()
            .enumerate()
            .map(|(i, d)| Ok(DhFactor { form: vector(&d.root, r, &format!("dh_roots[{i}].root"))?, multiplicity: d.mult }))
            .collect::<Result<Vec<_>>>()?;
        let mut angles = vec![Rational::from_integer(1.into()); invariant_rays.len()];
        for (k, v) in &self.angles {
            let i: usize = k.parse().map_err(|_| anyhow!("angles: key {k:?} is not a ray index"))?;
            if i >= angles.len() {
                bail!("angles: ray index {i} out of range ({} invariant rays)", angles.len());
            }
            angles[i] = rational(v, &format!("angles[{k}]"))?;
        }
        let reeb = self.reeb.as_ref().map(|v| vector(v, r, "reeb")).transpose()?;
        let family = self
            .family
            .as_ref()
            .map(|f| -> Result<ReebFamily> {
                Ok(ReebFamily { xi0: vector(&f.xi0, r, "family.xi0")?, xi1: vector(&f.xi1, r, "family.xi1")? })
            })
            .transpose()?;
        let data = ColoredConeData {
            lattice_rank: r,
            cone: PolyCone::from_generators(r, &gens, &[]),
            invariant_rays,
            colors,
            valuation_cone: PolyCone::from_generators(r, &v_gens, &v_lin),
            dh_roots,
            dimension_n: self.dimension_n,
        };
        Ok(ConeSpec { data, angles: Angles(angles), reeb, family })
    }

    pub fn from_data(data: &ColoredConeData, angles: &Angles, reeb: Option<&Vector<N>>, family: Option<&ReebFamily>) -> Self {
        let one = Rational::from_integer(1.into());
        ConeSpecFile {
            schema_version: SCHEMA_VERSION.into(),
            lattice_rank: data.lattice_rank,
            cone_generators: data.cone.rays().iter().map(strings).collect(),
            invariant_rays: data.invariant_rays.iter().map(strings).collect(),
            colors: data
                .colors
                .iter()
                .map(|c| ColorSpec { label: c.label.clone(), image: strings(&c.image), a_d: c.a_d.to_string() })
                .collect(),
            valuation_cone: ValuationConeSpec {
                generators: data.valuation_cone.rays().iter().map(strings).collect(),
                lineality: data.valuation_cone.lineality().iter().map(strings).collect(),
            },
            dh_roots: data.dh_roots.iter().map(|f| DhRootSpec { root: strings(&f.form), mult: f.multiplicity }).collect(),
            angles: angles
                .0
                .iter()
                .enumerate()
                .filter(|(_, g)| **g != one)
                .map(|(i, g)| (i.to_string(), g.to_string()))
                .collect(),
            reeb: reeb.map(strings),
            family: family.map(|f| FamilySpec { xi0: strings(&f.xi0), xi1: strings(&f.xi1) }),
            dimension_n: data.dimension_n,
        }
    }
}
