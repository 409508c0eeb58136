//! Acceptance checks. Runs as a plain binary (`harness = false`) so that every
//! criterion prints a single PASS or FAIL line into the test log.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use konic::catalog::{self, c3_semistable_angles, g2_reeb_polynomial, CatalogEntry, CatalogId, RootLength};
use konic::cones::{ColoredConeData, Membership, PolyCone};
use konic::degeneration::{
    central_fiber, crepant_check, horospherical_degeneration, kstable_degeneration, CrepantOutcome, DEFAULT_CREPANT_BOUND,
};
use konic::exactnum::{int, pair, q, to_f64, Rational, UniPoly, Vector, M, N};
use konic::integrate::{laplace_volume, slice, Measure, SliceResult};
use konic::kstability::{
    density_polynomial, futaki, reeb_solve, verdict, volume, Angles, PolarizedLogCone, ReebOutcome, SolverMethod, Verdict,
};
use konic::rootdata::RootType;

const SEED: u64 = 0x6b_6f6e_6963;
const FUBINI_SAMPLES: usize = 20;
const DEGENERATION_SAMPLES: usize = 10;
const VERDICT_SAMPLES: usize = 5;
const SCALE_FACTORS: [(i64, i64); 3] = [(2, 1), (3, 1), (7, 2)];
const FD_FIRST_STEP: (i64, i64) = (1, 8);
const FD_HALVINGS: u32 = 3;
const FD_MIN_RATIO: f64 = 3.5;

const LIMIT_SL2: Duration = Duration::from_secs(1);
const LIMIT_G2_POLY: Duration = Duration::from_secs(10);
const LIMIT_ROOTS: Duration = Duration::from_secs(1);
const LIMIT_BOUNDARY: Duration = Duration::from_secs(10);
const LIMIT_C3: Duration = Duration::from_secs(5);
const LIMIT_CREPANT: Duration = Duration::from_secs(30);
const LIMIT_SUITE: Duration = Duration::from_secs(300);

/// Checks that fail for a documented reason; see the README.
const KNOWN_UNATTAINABLE: &[&str] = &["5a"];

const G2_M1: [i64; 6] = [2376, 9225, 13407, 9357, 3179, 424];
const G2_M2: [i64; 10] = [
    20558772, 134444448, 374274594, 590688162, 587394519, 383740299, 165293858, 45384306, 7221048, 507988,
];

struct Check {
    id: String,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Log(Vec<Check>);

impl Log {
    fn record(&mut self, id: &str, pass: bool, detail: impl Into<String>) {
        let detail = detail.into();
        let tag = match (pass, KNOWN_UNATTAINABLE.contains(&id)) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
            (true, true) => "PASS (listed as known failure)",
        };
        println!("{tag} [{id}] {detail}");
        self.0.push(Check { id: id.into(), pass, detail });
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

fn entry(id: CatalogId) -> CatalogEntry {
    catalog::build(&id).expect("catalog entry builds")
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn proportional(a: &Vector<N>, b: &Vector<N>) -> bool {
    let ratio = a.coords().iter().zip(b.coords()).find(|(_, y)| !y.is_zero()).map(|(x, y)| x / y);
    match ratio {
        Some(r) if r.is_positive() => b.scale(&r) == *a,
        _ => false,
    }
}

fn random_positive(rng: &mut ChaCha8Rng) -> Rational {
    q(rng.gen_range(1..=9), rng.gen_range(1..=5))
}

/// A random point of the relative interior of a pointed cone.
fn random_interior<S: konic::exactnum::Space>(rng: &mut ChaCha8Rng, cone: &PolyCone<S>) -> Vector<S> {
    cone.rays()
        .iter()
        .fold(Vector::zeros(cone.ambient_dim()), |acc, r| &acc + &r.scale(&random_positive(rng)))
}

fn random_valuation(rng: &mut ChaCha8Rng, v: &PolyCone<N>) -> Vector<N> {
    loop {
        let mut x = Vector::zeros(v.ambient_dim());
        for r in v.rays() {
            x = &x + &r.scale(&int(rng.gen_range(0..=3)));
        }
        for l in v.lineality() {
            x = &x + &l.scale(&int(rng.gen_range(-3..=3)));
        }
        if !x.is_zero() {
            return x;
        }
    }
}

fn reeb_point(rng: &mut ChaCha8Rng, data: &ColoredConeData) -> Vector<N> {
    random_interior(rng, &data.reeb_cone())
}

fn fubini_sides(data: &ColoredConeData, xi: &Vector<N>) -> (Rational, Rational) {
    let cone = data.moment_cone();
    let density = density_polynomial(data);
    let n = data.dimension_n;
    let level = int(n as i64);
    let SliceResult::Bounded(polytope) = slice(&cone, xi, &level) else { panic!("interior xi gives a bounded slice") };
    let mass = polytope.integrate(&density, &Measure::SliceOf { xi: xi.clone(), level }).unwrap().value;
    let factorial: Rational = (1..=n as i64).map(int).fold(Rational::one(), |a, b| a * b);
    let power = (0..n).fold(Rational::one(), |a, _| a * int(n as i64));
    (factorial * mass, power * laplace_volume(&cone, &density, xi).unwrap())
}

/// Errors of the centered difference of `log vol` along `nu` at `h, h/2, ...`.
fn finite_difference_errors(data: &ColoredConeData, xi: &Vector<N>, nu: &Vector<N>) -> Vec<f64> {
    let cone = data.moment_cone();
    let density = density_polynomial(data);
    let level = int(data.dimension_n as i64);
    let SliceResult::Bounded(polytope) = slice(&cone, xi, &level) else { panic!("bounded") };
    let bar = polytope.weighted_barycenter(&density, &Measure::SliceOf { xi: xi.clone(), level }).unwrap();
    let target = -to_f64(&pair(&bar, nu));
    let mut h = q(FD_FIRST_STEP.0, FD_FIRST_STEP.1);
    let mut errs = Vec::new();
    for _ in 0..=FD_HALVINGS {
        let up = laplace_volume(&cone, &density, &(xi + &nu.scale(&h))).unwrap();
        let down = laplace_volume(&cone, &density, &(xi - &nu.scale(&h))).unwrap();
        let fd = to_f64(&(up / down)).ln() / (2.0 * to_f64(&h));
        errs.push((fd - target).abs());
        h /= int(2);
    }
    errs
}

fn fits_inside(cone: &PolyCone<M>, xi: &Vector<N>, nu: &Vector<N>, h: &Rational) -> bool {
    cone.rays().iter().all(|r| (pair(r, xi) - pair(r, nu).abs() * h).is_positive())
}

fn main() -> ExitCode {
    let suite = Instant::now();
    let mut log = Log::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let entries = catalog::all_entries();

    // 1. SL2 rank-one barycenter
    let (run, t) = timed(|| catalog::run(&entry(CatalogId::Sl2RankOne)).unwrap());
    let pairing = run.coroot_pairing.clone();
    let v = run.report.as_ref().map(|r| r.verdict);
    log.record(
        "1",
        pairing == Some(q(1, 3)) && v == Some(Verdict::KStable) && t < LIMIT_SL2,
        format!("sl2_rank_one: pairing {:?}, verdict {:?}, {} (limit {})", pairing.map(|x| x.to_string()), v, secs(t), secs(LIMIT_SL2)),
    );

    // 2. G2 stationarity polynomials
    let mut polys = Vec::new();
    for (m, want) in [(1, ints(&G2_M1)), (2, ints(&G2_M2))] {
        let want = UniPoly::new(want.into_iter().map(Rational::from_integer).collect()).content_normalized();
        let (got, t) = timed(|| g2_reeb_polynomial(m).unwrap());
        log.record(
            &format!("2.m{m}"),
            got == want && t < LIMIT_G2_POLY,
            format!("g2_reeb_polynomial({m}) = {:?}, {} (limit {})", got.iter().map(ToString::to_string).collect::<Vec<_>>(), secs(t), secs(LIMIT_G2_POLY)),
        );
        polys.push((m, got));
    }

    // 3. no positive roots
    for (m, coeffs) in &polys {
        let p = UniPoly::new(coeffs.iter().cloned().map(Rational::from_integer).collect());
        let (roots, t) = timed(|| p.isolate_positive_roots());
        log.record(
            &format!("3.m{m}"),
            roots.is_empty() && t < LIMIT_ROOTS,
            format!("positive roots of the m={m} polynomial: {}, {} (limit {})", roots.len(), secs(t), secs(LIMIT_ROOTS)),
        );
    }

    // 4. boundary divisor verdicts
    for m in [1, 2] {
        for (root, want) in [(RootLength::Long, Verdict::KUnstable), (RootLength::Short, Verdict::KStable)] {
            let (rep, t) = timed(|| {
                let e = entry(CatalogId::BoundaryDivisorCone { kind: RootType::G2, root, m });
                catalog::run(&e).unwrap().report.expect("rank-one solve gives a report")
            });
            log.record(
                &format!("4.m{m}.{root}"),
                rep.verdict == want && rep.paths_agree() && t < LIMIT_BOUNDARY,
                format!("G2 {root} root, m={m}: {:?} (expected {want:?}), {} (limit {})", rep.verdict, secs(t), secs(LIMIT_BOUNDARY)),
            );
        }
    }

    // 5. C3 pipeline
    let c3 = entry(CatalogId::C3Module).data;
    let ((step, sol), t) = timed(|| {
        let step = horospherical_degeneration(&c3).unwrap();
        let fiber = &step.central_fiber;
        let sol = reeb_solve(fiber, &Angles::trivial(fiber), None).unwrap();
        (step, sol)
    });
    match &sol.outcome {
        ReebOutcome::Found { xi, report } => {
            let source = step.n_from_fiber(xi);
            let one_one = Vector::<N>::from_ints(&[1, 1]);
            log.record(
                "5a",
                proportional(xi, &one_one) || proportional(&source, &one_one),
                format!("xi* = {xi} on the fiber, {source} in source coordinates; the claimed direction is (1, 1)"),
            );
            log.record(
                "5b",
                proportional(&source, &Vector::from_ints(&[3, 1])) && report.verdict == Verdict::KStable,
                format!("xi* is proportional to (3, 1) and the fiber is {:?}", report.verdict),
            );
            log.record(
                "5c",
                c3.valuation_cone.contains(&-&source, Membership::Interior),
                format!("-xi* = {} lies in the interior of the valuation cone", -&source),
            );
            log.record(
                "5d",
                sol.method == SolverMethod::Univariate && step.horospherical && t < LIMIT_C3,
                format!("solver {:?}, horospherical fiber, {} (limit {})", sol.method, secs(t), secs(LIMIT_C3)),
            );
        }
        other => log.record("5", false, format!("reeb_solve on the fiber gave {other:?}")),
    }

    // 6. crepant check
    for m in [1, 2] {
        let (out, t) = timed(|| crepant_check(m, DEFAULT_CREPANT_BOUND));
        let detail = match &out {
            CrepantOutcome::NoCrepantResolution(w) => format!(
                "NoCrepantResolution after {} pairs ({} rational non-lattice solutions)",
                w.pairs_checked,
                w.rational_solutions.len()
            ),
            CrepantOutcome::Candidate { x, y, .. } => format!("Candidate x={x}, y={y}"),
        };
        log.record(
            &format!("6.m{m}"),
            matches!(out, CrepantOutcome::NoCrepantResolution(_)) && t < LIMIT_CREPANT,
            format!("crepant-check --m {m} --bound {DEFAULT_CREPANT_BOUND}: {detail}, {} (limit {})", secs(t), secs(LIMIT_CREPANT)),
        );
    }

    // 7a. Fubini identity
    let mut bad = Vec::new();
    for e in &entries {
        for _ in 0..FUBINI_SAMPLES {
            let xi = random_interior(&mut rng, &e.data.cone);
            let (lhs, rhs) = fubini_sides(&e.data, &xi);
            if lhs != rhs {
                bad.push(format!("{} at {xi}", e.id));
            }
        }
    }
    log.record("7.fubini", bad.is_empty(), format!("n! slice = n^n Laplace at {FUBINI_SAMPLES} points per cone; mismatches {bad:?}"));

    // 7b. volume scaling
    let mut bad = Vec::new();
    for e in &entries {
        let xi = reeb_point(&mut rng, &e.data);
        let p = PolarizedLogCone::new(e.data.clone(), e.angles.clone(), xi.clone()).unwrap();
        let base = volume(&p).unwrap();
        for (a, b) in SCALE_FACTORS {
            let c = q(a, b);
            let scaled = volume(&p.with_reeb(xi.scale(&c)).unwrap()).unwrap();
            let factor = (0..e.data.dimension_n).fold(Rational::one(), |acc, _| acc * &c);
            if scaled * factor != base {
                bad.push(format!("{} c={c}", e.id));
            }
        }
    }
    log.record("7.scaling", bad.is_empty(), format!("vol(c xi) = c^-n vol(xi) for c in 2, 3, 7/2; mismatches {bad:?}"));

    // 7c. finite differences of log vol
    let mut bad = Vec::new();
    let mut worst = f64::INFINITY;
    let h0 = q(FD_FIRST_STEP.0, FD_FIRST_STEP.1);
    for e in &entries {
        let cone = e.data.moment_cone();
        let xi = random_interior(&mut rng, &e.data.cone);
        let nu = loop {
            let nu = Vector::<N>::new((0..e.data.lattice_rank).map(|_| int(rng.gen_range(-2..=2))).collect());
            if !nu.is_zero() && fits_inside(&cone, &xi, &nu, &h0) {
                break nu;
            }
        };
        let errs = finite_difference_errors(&e.data, &xi, &nu);
        let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
        worst = ratios.iter().copied().fold(worst, f64::min);
        let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
        if !decreasing || ratios.iter().any(|&r| r < FD_MIN_RATIO) {
            bad.push(format!("{}: errors {errs:?}", e.id));
        }
    }
    log.record(
        "7.finite_difference",
        bad.is_empty(),
        format!("{FD_HALVINGS} halvings from h={h0}, smallest ratio {worst:.3} (minimum {FD_MIN_RATIO}); failures {bad:?}"),
    );

    // 7d. Futaki scale invariance and lineality
    let mut semistable: Vec<(String, PolarizedLogCone)> = Vec::new();
    for e in &entries {
        let run = catalog::run(e).unwrap();
        if let Some(r) = &run.report {
            if r.verdict != Verdict::KUnstable {
                let p = PolarizedLogCone::new(e.data.clone(), e.angles.clone(), r.normalized_reeb.clone()).unwrap();
                semistable.push((e.id.to_string(), p));
            }
        }
    }
    semistable.push((
        "c3_module with angle 1/4".into(),
        PolarizedLogCone::new(c3.clone(), c3_semistable_angles(), Vector::from_ints(&[0, 1])).unwrap(),
    ));
    let mut bad = Vec::new();
    for (name, p) in &semistable {
        let v = &p.data().valuation_cone;
        let mut tests: Vec<Vector<N>> = v.rays().to_vec();
        tests.push(random_valuation(&mut rng, v));
        for nu in &tests {
            let base = futaki(p, nu).unwrap();
            for (a, b) in SCALE_FACTORS {
                let scaled = p.with_reeb(p.reeb().scale(&q(a, b))).unwrap();
                if futaki(&scaled, nu).unwrap() != base {
                    bad.push(format!("{name}: scale at {nu}"));
                }
            }
        }
        for l in v.lineality() {
            if !futaki(p, l).unwrap().is_zero() {
                bad.push(format!("{name}: lineality {l}"));
            }
        }
    }
    log.record(
        "7.futaki",
        bad.is_empty(),
        format!("{} semistable polarizations; failures {bad:?}", semistable.len()),
    );

    // 7e. verdict path equivalence
    let mut bad = Vec::new();
    let mut count = 0;
    for e in &entries {
        let mut points: Vec<Vector<N>> = (0..VERDICT_SAMPLES).map(|_| reeb_point(&mut rng, &e.data)).collect();
        if let Some(r) = catalog::run(e).unwrap().report {
            points.push(r.normalized_reeb);
        }
        for xi in points {
            let p = PolarizedLogCone::new(e.data.clone(), e.angles.clone(), xi.clone()).unwrap();
            let r = verdict(&p).unwrap();
            count += 1;
            if !r.paths_agree() {
                bad.push(format!("{} at {xi}", e.id));
            }
        }
    }
    log.record("7.verdict_paths", bad.is_empty(), format!("{count} polarizations; disagreements {bad:?}"));

    // 7f. degeneration invariance
    let mut bad = Vec::new();
    for e in &entries {
        let xi = reeb_point(&mut rng, &e.data);
        let src = PolarizedLogCone::new(e.data.clone(), e.angles.clone(), xi.clone()).unwrap();
        let mut tests: Vec<Vector<N>> = e.data.valuation_cone.rays().to_vec();
        tests.extend(e.data.valuation_cone.lineality().iter().cloned());
        for _ in 0..DEGENERATION_SAMPLES {
            let nu = random_valuation(&mut rng, &e.data.valuation_cone);
            let step = central_fiber(&e.data, &nu).unwrap();
            if !step.moment_cone_in_source().same_set(&e.data.moment_cone()) {
                bad.push(format!("{}: moment cone along {nu}", e.id));
            }
            let dst = PolarizedLogCone::new(step.central_fiber.clone(), e.angles.clone(), step.n_to_fiber(&xi)).unwrap();
            for mu in tests.iter().chain(std::iter::once(&nu)) {
                if futaki(&src, mu).unwrap() != futaki(&dst, &step.n_to_fiber(mu)).unwrap() {
                    bad.push(format!("{}: futaki at {mu} along {nu}", e.id));
                }
            }
        }
    }
    log.record("7.degeneration", bad.is_empty(), format!("{DEGENERATION_SAMPLES} directions per cone; failures {bad:?}"));

    // 7g. K-stable degeneration of a strictly semistable C3 polarization
    let out = kstable_degeneration(&c3, &c3_semistable_angles(), &Vector::from_ints(&[0, 1]));
    let detail = match &out {
        Ok(d) => format!("{} step(s), first nontrivial: {}, final {:?}", d.steps.len(), !d.steps[0].is_trivial, d.report.verdict),
        Err(e) => format!("error {e}"),
    };
    let ok = matches!(&out, Ok(d) if d.steps.len() == 1 && !d.steps[0].is_trivial && d.report.verdict == Verdict::KStable);
    log.record("7.kstable_degeneration", ok, detail);

    let total = suite.elapsed();
    log.record("7.runtime", total < LIMIT_SUITE, format!("whole suite {} (limit {})", secs(total), secs(LIMIT_SUITE)));

    let unexpected: Vec<&Check> =
        log.0.iter().filter(|c| c.pass == KNOWN_UNATTAINABLE.contains(&c.id.as_str())).collect();
    let passed = log.0.iter().filter(|c| c.pass).count();
    println!("{passed}/{} checks passed, {} known failure(s)", log.0.len(), KNOWN_UNATTAINABLE.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for c in unexpected {
            println!("unexpected result for [{}]: {}", c.id, c.detail);
        }
        ExitCode::FAILURE
    }
}
