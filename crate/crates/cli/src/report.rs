//! JSON report assembly. Exact values are always strings.

use serde_json::{json, Map, Value};

use konic::catalog::{CatalogEntry, CatalogRun, Expectation};
use konic::degeneration::{CrepantOutcome, CrepantWitness, DegenerationStep, KStableDegeneration};
use konic::exactnum::UniPoly;
use konic::kstability::{Angles, Obstruction, ReebOutcome, ReebSolution, VerdictReport};

use crate::spec::{strings, ConeSpecFile, SCHEMA_VERSION};

pub fn with_header(command: &str, input: Option<&ConeSpecFile>, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    map.insert("command".into(), json!(command));
    if let Some(i) = input {
        map.insert("input".into(), json!(i));
    }
    if let Value::Object(b) = body {
        map.extend(b);
    }
    Value::Object(map)
}

fn poly(p: &UniPoly) -> Value {
    json!(p.coeffs().iter().map(ToString::to_string).collect::<Vec<_>>())
}

pub fn verdict(r: &VerdictReport) -> Value {
    json!({
        "verdict": r.verdict.name(),
        "membership_verdict": r.membership_verdict.name(),
        "paths_agree": r.paths_agree(),
        "reeb": strings(&r.normalized_reeb),
        "barycenter": strings(&r.barycenter),
        "angle_weight": strings(&r.angle_weight),
        "offset": strings(&r.offset),
        "futaki": r.futaki_on_rays.iter().map(|f| json!({
            "ray": strings(&f.ray),
            "in_lineality": f.in_lineality,
            "value": f.value.to_string(),
        })).collect::<Vec<_>>(),
        "destabilizer": r.destabilizer.as_ref().map(strings),
    })
}

fn outcome(o: &ReebOutcome) -> Value {
    match o {
        ReebOutcome::Found { xi, report } => json!({
            "status": "Found",
            "xi": strings(xi),
            "report": verdict(report),
        }),
        ReebOutcome::FoundIrrational { root, family, xi_approx } => json!({
            "status": "FoundIrrational",
            "root_polynomial": poly(&root.polynomial),
            "interval": [root.lo.to_string(), root.hi.to_string()],
            "family": { "xi0": strings(&family.xi0), "xi1": strings(&family.xi1) },
            "xi_approx": xi_approx,
        }),
        ReebOutcome::Approximate { xi, residual } => json!({
            "status": "Approximate",
            "xi": strings(xi),
            "residual": if residual.is_finite() { json!(residual) } else { Value::Null },
        }),
        ReebOutcome::NoStableReeb(ob) => {
            let detail = match ob {
                Obstruction::NoAdmissibleRoot { polynomial, family } => json!({
                    "kind": "NoAdmissibleRoot",
                    "polynomial": poly(polynomial),
                    "normalized": polynomial.content_normalized().iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "family": { "xi0": strings(&family.xi0), "xi1": strings(&family.xi1) },
                }),
                Obstruction::NegativeFutaki { xi, ray, value } => json!({
                    "kind": "NegativeFutaki",
                    "xi": strings(xi),
                    "ray": strings(ray),
                    "value": value.to_string(),
                }),
                Obstruction::EmptyReebCone => json!({ "kind": "EmptyReebCone" }),
            };
            json!({ "status": "NoStableReeb", "obstruction": detail })
        }
    }
}

pub fn solution(s: &ReebSolution) -> Value {
    json!({
        "method": format!("{:?}", s.method),
        "outcome": outcome(&s.outcome),
        "polynomial": s.polynomial.as_ref().map(poly),
        "trace": s.trace,
    })
}

pub fn step(s: &DegenerationStep, angles: &Angles) -> Value {
    let fiber = ConeSpecFile::from_data(&s.central_fiber, angles, None, None);
    json!({
        "direction": strings(&s.direction),
        "is_trivial": s.is_trivial,
        "horospherical": s.horospherical,
        "rescaled": s.rescaled.as_ref().map(ToString::to_string),
        "lattice_iso": s.lattice_iso.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "central_fiber": fiber,
        "colors_carried_over": true,
    })
}

pub fn kstable_degeneration(d: &KStableDegeneration, angles: &Angles) -> Value {
    json!({
        "steps": d.steps.iter().map(|s| step(s, angles)).collect::<Vec<_>>(),
        "reeb_on_fiber": strings(&d.reeb),
        "final": verdict(&d.report),
    })
}

fn witness(w: &CrepantWitness) -> Value {
    json!({
        "m": w.m,
        "bound": w.bound,
        "pairs_checked": w.pairs_checked,
        "rational_non_lattice_solutions": w.rational_solutions.iter()
            .map(|s| json!({ "x": s.x.to_string(), "y": s.y.to_string() }))
            .collect::<Vec<_>>(),
    })
}

pub fn crepant(o: &CrepantOutcome) -> Value {
    match o {
        CrepantOutcome::NoCrepantResolution(w) => json!({
            "result": "NoCrepantResolution",
            "statement": format!("no lattice solution with numerator and denominator of y at most {}", w.bound),
            "witness": witness(w),
        }),
        CrepantOutcome::Candidate { x, y, witness: w } => json!({
            "result": "Candidate",
            "x": x.to_string(),
            "y": y.to_string(),
            "witness": witness(w),
        }),
    }
}

pub fn expectations(e: &[Expectation]) -> Value {
    json!(e
        .iter()
        .map(|x| json!({ "quantity": x.quantity, "value": x.value, "source": x.source.to_string() }))
        .collect::<Vec<_>>())
}

pub fn catalog_run(e: &CatalogEntry, r: &CatalogRun) -> Value {
    json!({
        "id": e.id.to_string(),
        "description": e.description,
        "verdict": r.report.as_ref().map(|x| x.verdict.name()),
        "report": r.report.as_ref().map(verdict),
        "barycenter_pairing": r.coroot_pairing.as_ref().map(ToString::to_string),
        "solution": r.solution.as_ref().map(solution),
        "obstruction_polynomial": r.obstruction_polynomial.as_ref()
            .map(|c| c.iter().map(ToString::to_string).collect::<Vec<_>>()),
        "expected": expectations(&e.expected),
    })
}
