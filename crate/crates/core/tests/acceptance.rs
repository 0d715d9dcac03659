//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A criterion reported as FAIL with `known:` has every attainable check
//! passing and one stated claim that the shipped data contradicts; the run
//! still succeeds. Any other failure makes the run exit nonzero.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use frankl_core::certify::{
    brute_force_classify, brute_force_separation, feasible_families, text::parse_row, verify_document, verify_fc,
    ColumnConvention, CertificateDocument, FamilySpec, FcProofFixture, NonFcFixture,
};
use frankl_core::driver::{
    certify_weights, classify, poonen_row, witness_row_name, ClassificationCertificate, ClassifyOptions, MasterMode,
    WeightsVerdict, NORMALIZATION_ROW,
};
use frankl_core::family::{ElementSet, SetFamily};
use frankl_core::io::parse_family;
use frankl_core::lp::{int, lcm_scale, parse_rational, verify_farkas, Rational, Relation};
use frankl_core::separation::{build_model, solve_separation_with, ProofNode, SeparationOutcome, SolveOptions, WeightVector};
use frankl_core::structure::{
    morris_system, morris_z_nonempty, regularity_check, satisfies, smaller_g_implication, vaughan_solve,
    VaughanOutcome, ZOutcome,
};
use num_traits::{Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

enum Status {
    Pass(String),
    Known { attained: String, contradicted: String },
}

type Outcome = Result<Status, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn family_file(name: &str) -> SetFamily {
    parse_family(&read(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn non_fc_fixture(name: &str) -> NonFcFixture {
    match CertificateDocument::from_json(&read(name)).unwrap() {
        CertificateDocument::NonFcFixture(f) => f,
        _ => panic!("{name} is not a Non-FC fixture"),
    }
}

fn fc_proof_fixture(name: &str) -> FcProofFixture {
    match CertificateDocument::from_json(&read(name)).unwrap() {
        CertificateDocument::FcProofFixture(f) => f,
        _ => panic!("{name} is not an FC proof fixture"),
    }
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn printed_duals(f: &NonFcFixture) -> Result<Vec<Rational>, String> {
    let duals = f.duals().map_err(s)?;
    let mut out = vec![duals[NORMALIZATION_ROW].clone()];
    for k in 1..=f.witnesses.len() {
        out.push(duals[&witness_row_name(k)].clone());
    }
    Ok(out)
}

fn six_element_witness_certificate() -> Outcome {
    let start = Instant::now();
    let f = non_fc_fixture("six_element_non_fc.json");
    let report = f.verify().map_err(s)?;
    ensure(report.passed(), format!("{report}"))?;
    let witnesses = f.witnesses().map_err(s)?;
    ensure(witnesses.len() == 6, "expected six witnesses")?;
    let doubled: Vec<Rational> = poonen_row(&witnesses[0], "w").coeffs.iter().map(|c| c * int(2)).collect();
    ensure(doubled == ints(&[22, 46, 50, 50, 46, 46]), "first recomputed row differs from 22,46,50,50,46,46")?;
    ensure(printed_duals(&f)? == ints(&[-7190, 30, 9, 44, 21, 32, 32]), "duals differ from the printed ones")?;
    let deltas = report.notes.iter().filter(|n| n.contains("delta")).count();
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:.2?}"))?;
    Ok(Status::Pass(format!(
        "six witnesses closed under the family, recomputed rows match, duals -7190,30,9,44,21,32,32 exact, {deltas} rhs deltas, {elapsed:.2?}"
    )))
}

fn six_element_weights_and_two_leaf_proof() -> Outcome {
    let start = Instant::now();
    let s_prime = family_file("s_prime.fam");
    let c = WeightVector::new(vec![16, 8, 12, 20, 17, 15]).map_err(s)?;
    let proof = match certify_weights(&s_prime, &c, &SolveOptions::default()).map_err(s)? {
        WeightsVerdict::Certified { proof } => proof,
        WeightsVerdict::Refuted { objective, .. } => return Err(format!("weights refuted by {objective}")),
    };
    let report = verify_fc(&s_prime, &c, &proof).map_err(s)?;
    ensure(report.passed(), format!("own proof: {report}"))?;

    let fixture = fc_proof_fixture("six_element_fc_proof.json");
    let (a, w, printed) = fixture.to_proof().map_err(s)?;
    ensure(a.add_empty() == s_prime.add_empty(), "fixture family differs")?;
    ensure(w == c, "fixture weights differ")?;
    ensure(printed.leaf_count() == 2, "expected two leaves")?;
    let x0 = ColumnConvention::Complemented.to_mask(0, 6);
    ensure(matches!(printed.root, ProofNode::Branch { var, .. } if var == x0), "root does not branch on x0")?;
    let duals: Vec<Rational> = printed.root.leaves().iter().flat_map(|l| l.duals.values().cloned()).collect();
    for want in ["-186.5", "-0.5"] {
        let want = parse_rational(want).map_err(s)?;
        ensure(duals.contains(&want), "printed dual missing")?;
    }
    let chains: usize = fixture.leaves.iter().flat_map(|l| &l.rows).map(|r| r.chains.len()).sum();
    ensure(chains > 0, "no explicit chains in the fixture")?;
    let report = verify_fc(&a, &w, &printed).map_err(s)?;
    ensure(report.passed(), format!("two-leaf proof: {report}"))?;
    let corrected = fixture.corrections().len();
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:.2?}"))?;
    Ok(Status::Pass(format!(
        "separation empty for (16,8,12,20,17,15) with a {}-leaf proof; two-leaf proof with {chains} explicit chains verifies ({corrected} misprinted FS row corrected), {elapsed:.2?}",
        proof.leaf_count()
    )))
}

fn verify_classification(family: &SetFamily, certificate: ClassificationCertificate) -> Result<(), String> {
    let doc = CertificateDocument::Classification {
        schema_version: frankl_core::certify::SCHEMA_VERSION,
        family: family.clone(),
        certificate,
        history: Vec::new(),
    };
    let report = verify_document(&doc).map_err(s)?;
    ensure(report.passed(), format!("{report}"))
}

fn counterexample_pipeline() -> Outcome {
    let start = Instant::now();
    let opts = ClassifyOptions::default();
    let s_family = family_file("s.fam");
    let base = classify(&s_family, &opts).map_err(s)?;
    ensure(!base.certificate.is_fc(), "six-element family classified FC")?;
    verify_classification(&s_family, base.certificate)?;
    let s_prime = family_file("s_prime.fam");
    let enlarged = classify(&s_prime, &opts).map_err(s)?;
    ensure(enlarged.certificate.is_fc(), "enlarged family classified Non-FC")?;
    verify_classification(&s_prime, enlarged.certificate)?;
    let generators = s_family.minimal_generator().map_err(s)?;
    let report = regularity_check(&generators, &opts).map_err(s)?;
    ensure(!report.regular, "generator reported regular")?;
    let target = (ElementSet::from_elements([1, 2, 3, 4]), 5);
    ensure(report.witnesses.contains(&target), "(1234, 5) is not among the FC perturbations")?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(600), format!("took {elapsed:.2?}"))?;
    let shown: Vec<String> = report.witnesses.iter().map(|(a, i)| format!("{a}+{i}")).collect();
    Ok(Status::Pass(format!(
        "Non-FC then FC, both certificates verify; not regular, FC perturbations {}, {elapsed:.2?}",
        shown.join(" ")
    )))
}

fn dense_rows(rows: &Value, prefix: &str, n: usize) -> Result<Vec<(Vec<Rational>, Relation, Rational)>, String> {
    rows.as_array()
        .ok_or("rows missing")?
        .iter()
        .map(|r| {
            let parsed = parse_row(r.as_str().ok_or("row is not a string")?)?;
            Ok((parsed.dense(prefix, 1, n)?, parsed.relation, parsed.rhs))
        })
        .collect()
}

fn seven_element_relaxations() -> Outcome {
    let start = Instant::now();
    let data: Value = serde_json::from_str(&read("seven_element_relaxations.json")).map_err(s)?;
    let d = family_file("d.fam");
    let spec: FamilySpec = serde_json::from_value(data["family"].clone()).map_err(s)?;
    ensure(spec.build(7).map_err(s)? == d, "relaxation fixture family differs from d.fam")?;

    // Generated Z rows against the printed system.
    let morris = morris_system(&d).map_err(s)?;
    let printed = dense_rows(&data["morris_rows"], "z", 7)?;
    let generated: Vec<_> = morris.family_rows().collect();
    ensure(generated.len() == 7 && printed.len() == 7, "expected seven rows")?;
    for (k, (row, (coeffs, rel, rhs))) in generated.iter().zip(&printed).enumerate() {
        ensure(
            row.coeffs == *coeffs && row.relation == *rel && row.rhs == *rhs,
            format!("row {} differs from the printed row", k + 1),
        )?;
    }
    let point: Vec<Rational> = ints(&[7, 5, 12, 12, 10, 14, 16]);
    ensure(satisfies(&morris, &point), "(7,5,12,12,10,14,16) violates the system")?;

    // Classification and the printed certificate with the modified family row.
    let result = classify(&d, &ClassifyOptions::default()).map_err(s)?;
    ensure(!result.certificate.is_fc(), "seven-element family classified FC")?;
    verify_classification(&d, result.certificate)?;
    let f = non_fc_fixture("seven_element_non_fc.json");
    let report = f.verify().map_err(s)?;
    ensure(report.passed(), format!("{report}"))?;
    ensure(printed_duals(&f)? == ints(&[1, 19, 2, 109, 16, 20, 40]), "duals differ from the printed ones")?;

    // Equation system.
    let (vsys, outcome) = vaughan_solve(&d).map_err(s)?;
    let exact = match outcome {
        VaughanOutcome::Feasible { point, l1_sum, strictly_below_one } => {
            ensure(strictly_below_one, "solver point does not sum below one")?;
            (point, l1_sum)
        }
        VaughanOutcome::Empty { .. } => return Err("equation system reported infeasible".into()),
    };
    let printed_eq = dense_rows(&data["vaughan_rows"], "y", 7)?;
    for (k, (row, (coeffs, rel, rhs))) in vsys.family_rows().zip(&printed_eq).enumerate() {
        let doubled: Vec<Rational> = row.coeffs.iter().map(|c| c * int(2)).collect();
        ensure(
            doubled == *coeffs && *rel == Relation::Eq && row.rhs.clone() * int(2) == *rhs,
            format!("equation {} differs from the printed one", k + 1),
        )?;
    }
    let lhs = |coeffs: &[Rational], p: &[Rational]| coeffs.iter().zip(p).map(|(a, b)| a * b).sum::<Rational>();
    ensure(printed_eq.iter().all(|(c, _, rhs)| lhs(c, &exact.0) == *rhs), "solver point misses a printed equation")?;
    let printed_point: Vec<Rational> = data["vaughan_point"]
        .as_array()
        .ok_or("point missing")?
        .iter()
        .map(|v| parse_rational(v.as_str().unwrap_or("")).map_err(s))
        .collect::<Result<_, _>>()?;
    let printed_sum = parse_rational(data["vaughan_sum"].as_str().ok_or("sum missing")?).map_err(s)?;
    let point_sum: Rational = printed_point.iter().sum();
    ensure(point_sum == printed_sum, "printed point does not sum to the printed fraction")?;
    ensure(printed_sum < int(1), "printed sum is not below one")?;
    ensure(printed_point.iter().all(|v| !v.is_negative()), "printed point has a negative entry")?;
    let residuals: Vec<Rational> = printed_eq.iter().map(|(c, _, rhs)| lhs(c, &printed_point) - rhs).collect();
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(600), format!("took {elapsed:.2?}"))?;
    let attained = format!(
        "seven Z rows match the printed ones and hold at (7,5,12,12,10,14,16); Non-FC and the printed certificate (duals 1,19,2,109,16,20,40) verify; \
         equations feasible at an exact point with sum {} < 1; printed point sums exactly to the printed fraction < 1, {elapsed:.2?}",
        frankl_core::lp::format_rational(&exact.1)
    );
    if residuals.iter().all(Zero::is_zero) {
        return Ok(Status::Pass(format!("{attained}; printed point satisfies all seven equations")));
    }
    let worst = residuals.iter().filter_map(|r| r.abs().to_f64()).fold(0.0, f64::max);
    let missed = residuals.iter().filter(|r| !r.is_zero()).count();
    Ok(Status::Known {
        attained,
        contradicted: format!(
            "the printed rational point is rounded: it misses {missed} of 7 equations by up to {worst:.1e}, so it is not an exact solution"
        ),
    })
}

fn five_element_z_relaxation() -> Outcome {
    let a = SetFamily::from_digit_strings(5, &["empty", "123", "145", "1234", "1235", "1245"])
        .and_then(|f| f.union_closure())
        .map_err(s)?;
    let (sys, outcome) = morris_z_nonempty(&a).map_err(s)?;
    match outcome {
        ZOutcome::Empty { duals } => {
            let report = verify_farkas(&sys.system, &duals).map_err(s)?;
            ensure(report.passed(), format!("emptiness certificate: {report}"))?;
        }
        ZOutcome::Feasible { .. } => return Err("Z is nonempty with ∅".into()),
    }
    let without = a.drop_empty();
    let (sys, outcome) = morris_z_nonempty(&without).map_err(s)?;
    ensure(matches!(outcome, ZOutcome::Feasible { .. }), "Z is empty without ∅")?;
    ensure(satisfies(&sys, &ints(&[1; 5])), "all-ones violates the system without ∅")?;
    Ok(Status::Pass("empty with ∅ (Farkas certificate verified); all-ones feasible without ∅".into()))
}

/// Rows of the weight tables whose printed weights are refuted by an explicit family.
const MISPRINTED_TABLE_ROWS: [usize; 9] = [2, 3, 4, 7, 39, 40, 41, 42, 43];

fn weight_tables() -> Outcome {
    let data: Value = serde_json::from_str(&read("weight_tables.json")).map_err(s)?;
    let rows = data["rows"].as_array().ok_or("rows missing")?;
    let (mut certified, mut by_n, mut slowest) = (0, [0usize; 2], Duration::ZERO);
    for (k, row) in rows.iter().enumerate() {
        let n = row["n"].as_u64().ok_or("n missing")? as usize;
        let generators: Vec<&str> =
            row["generators"].as_array().ok_or("generators missing")?.iter().filter_map(Value::as_str).collect();
        let a = SetFamily::from_digit_strings(n, &generators).and_then(|f| f.union_closure()).map_err(s)?;
        let weights: Vec<u64> = row["weights"].as_array().ok_or("weights missing")?.iter().filter_map(Value::as_u64).collect();
        let c = WeightVector::new(weights).map_err(s)?;
        let start = Instant::now();
        let verdict = certify_weights(&a, &c, &SolveOptions::default()).map_err(|e| format!("row {k}: {e}"))?;
        slowest = slowest.max(start.elapsed());
        match verdict {
            WeightsVerdict::Certified { proof } => {
                ensure(!MISPRINTED_TABLE_ROWS.contains(&k), format!("row {k} now certifies"))?;
                let report = verify_fc(&a, &c, &proof).map_err(s)?;
                ensure(report.passed(), format!("row {k}: {report}"))?;
                certified += 1;
                by_n[usize::from(n == 7)] += 1;
            }
            WeightsVerdict::Refuted { family, objective } => {
                ensure(MISPRINTED_TABLE_ROWS.contains(&k), format!("row {k} refuted by {objective}"))?;
                let model = build_model(&a.add_empty(), &c).map_err(s)?;
                let masks: Vec<u32> = family.masks().collect();
                ensure(
                    model.is_feasible_family(&family) && model.objective(&masks) == objective && objective >= 1,
                    format!("row {k}: refutation does not check"),
                )?;
            }
        }
    }
    ensure(certified >= 10 && by_n[0] > 0 && by_n[1] > 0, "too few certified rows")?;
    ensure(slowest < Duration::from_secs(300), format!("slowest row took {slowest:.2?}"))?;
    Ok(Status::Pass(format!(
        "{certified} of {} rows certified with proofs re-verified ({} on [6], {} on [7]); {} misprinted rows refuted by checked violating families; slowest {slowest:.2?}",
        rows.len(),
        by_n[0],
        by_n[1],
        MISPRINTED_TABLE_ROWS.len()
    )))
}

fn is_classifiable(f: &SetFamily) -> bool {
    f.union_all().mask() == f.ground().full_mask() && f.sets().iter().any(|s| !s.is_empty())
}

fn oracle_agreement() -> Outcome {
    let opts = ClassifyOptions::default();
    let compare = |f: &SetFamily| -> Result<Option<bool>, String> {
        let oracle = brute_force_classify(f);
        let engine = classify(f, &opts);
        match (oracle, engine) {
            (Ok(o), Ok(e)) => {
                ensure(o.is_fc() == e.certificate.is_fc(), format!("verdicts differ on {f:?}"))?;
                Ok(Some(o.is_fc()))
            }
            (Err(_), Err(_)) => Ok(None),
            (o, e) => Err(format!("only one side rejected {f:?}: {:?} / {:?}", o.err(), e.err())),
        }
    };
    let all3 = feasible_families(&SetFamily::from_masks(3, [0]).map_err(s)?).map_err(s)?;
    let mut decided3 = 0;
    for f in &all3 {
        decided3 += usize::from(compare(f)?.is_some());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut all4: Vec<SetFamily> =
        feasible_families(&SetFamily::from_masks(4, [0]).map_err(s)?).map_err(s)?.into_iter().filter(is_classifiable).collect();
    all4.shuffle(&mut rng);
    let mut fc4 = 0;
    for f in all4.iter().take(150) {
        fc4 += usize::from(compare(f)? == Some(true));
    }
    let mut instances = 0;
    let mut violated = 0;
    let pool: Vec<SetFamily> = (2..=4)
        .flat_map(|n| feasible_families(&SetFamily::from_masks(n, [0]).unwrap()).unwrap())
        .filter(is_classifiable)
        .collect();
    while instances < 80 {
        let a = pool.choose(&mut rng).ok_or("empty pool")?;
        let entries: Vec<u64> = (0..a.n()).map(|_| rng.gen_range(0..=6)).collect();
        let Ok(c) = WeightVector::new(entries) else { continue };
        let brute = brute_force_separation(a, &c).map_err(s)?;
        let model = build_model(&a.add_empty(), &c).map_err(s)?;
        let engine = solve_separation_with(&model, &SolveOptions::default()).map_err(s)?;
        match (&brute, &engine) {
            (None, SeparationOutcome::Empty { .. }) => {}
            (Some((v, _)), SeparationOutcome::Violating { objective, .. }) if v == objective => violated += 1,
            _ => return Err(format!("separation differs on {a:?} with {c:?}: {brute:?}")),
        }
        instances += 1;
    }
    Ok(Status::Pass(format!(
        "all {} UC families on [3] agree ({decided3} classifiable); 150 random on [4] agree ({fc4} FC); {instances} separation maxima match ({violated} violated)",
        all3.len()
    )))
}

fn uc_family(min_n: usize, max_n: usize, force_empty: bool) -> impl Strategy<Value = SetFamily> {
    (min_n..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(1u32..(1u32 << n), 1..6), any::<bool>()))
        .prop_map(move |(n, masks, with_empty)| {
            let f = SetFamily::from_masks(n, masks).unwrap().union_closure().unwrap();
            if with_empty || force_empty {
                f.add_empty()
            } else {
                f
            }
        })
        .prop_filter("spanning", is_classifiable)
}

fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<bool, TestCaseError>,
) -> Result<(u32, u32), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let hits = std::cell::Cell::new(0u32);
    runner
        .run(&strategy, |v| {
            if test(v)? {
                hits.set(hits.get() + 1);
            }
            Ok(())
        })
        .map_err(s)?;
    Ok((cases, hits.get()))
}

fn verdict(f: &SetFamily, master: MasterMode) -> Result<bool, TestCaseError> {
    let opts = ClassifyOptions { master, ..ClassifyOptions::default() };
    classify(f, &opts).map(|c| c.certificate.is_fc()).map_err(|e| TestCaseError::fail(e.to_string()))
}

/// Every single-field edit of a fixture: a dual, a number in a printed row,
/// a column bit, a generator element, a weight, a branch fixing or a row kind.
fn mutations(doc: &Value) -> Vec<(Vec<String>, Value, Value)> {
    let n = doc["n"].as_u64().unwrap_or(7) as u8;
    let mut leaves = Vec::new();
    collect(&mut Vec::new(), doc, &mut leaves);
    let mut out = Vec::new();
    for (path, v) in leaves {
        let key = path.last().map(String::as_str).unwrap_or("");
        let parent = path.len().checked_sub(2).map(|i| path[i].as_str()).unwrap_or("");
        let grand = path.len().checked_sub(3).map(|i| path[i].as_str()).unwrap_or("");
        let mut edits: Vec<Value> = Vec::new();
        match (key, &v) {
            ("dual", Value::String(d)) => {
                let x = parse_rational(d).unwrap();
                let half = Rational::new(1.into(), 2.into());
                for e in [&x + int(1), &x - int(1), &x + half, -x.clone(), Rational::zero()] {
                    if e != x {
                        edits.push(Value::String(frankl_core::lp::format_rational(&e)));
                    }
                }
            }
            ("row", Value::String(r)) => {
                for (a, b) in number_spans(r) {
                    let x: i64 = r[a..b].parse().unwrap_or(0);
                    for e in [x + 1, x - 1].into_iter().filter(|&e| e >= 0) {
                        edits.push(Value::String(format!("{}{e}{}", &r[..a], &r[b..])));
                    }
                }
            }
            ("kind", Value::String(k)) if !parent.is_empty() && grand == "rows" => {
                for other in ["uc", "fs", "fc", "fc_chain", "wv", "fixing"] {
                    if other != k {
                        edits.push(Value::String(other.into()));
                    }
                }
            }
            (_, Value::String(col)) if parent == "columns" => {
                for i in 0..col.len() {
                    let mut bytes = col.clone().into_bytes();
                    bytes[i] = if bytes[i] == b'0' { b'1' } else { b'0' };
                    edits.push(Value::String(String::from_utf8(bytes).unwrap()));
                }
            }
            (_, Value::String(g)) if (parent == "generators" || parent == "extra") && g != "empty" => {
                for e in 1..=n {
                    let ch = char::from(b'0' + e);
                    if g.contains(ch) {
                        let t: String = g.chars().filter(|&c| c != ch).collect();
                        if !t.is_empty() {
                            edits.push(Value::String(t));
                        }
                    } else {
                        edits.push(Value::String(format!("{g}{ch}")));
                    }
                }
            }
            (_, Value::Number(x)) if parent == "weights" || parent == "avoid" || grand == "fixed" => {
                let x = x.as_u64().unwrap();
                if grand == "fixed" && key == "1" {
                    edits.push(Value::from(1 - x.min(1)));
                } else {
                    edits.push(Value::from(x + 1));
                    if x > 0 {
                        edits.push(Value::from(x - 1));
                    }
                }
            }
            _ => {}
        }
        for e in edits {
            let mut m = doc.clone();
            *pointer(&mut m, &path) = e.clone();
            out.push((path.clone(), e, m));
        }
    }
    out
}

fn collect(path: &mut Vec<String>, v: &Value, out: &mut Vec<(Vec<String>, Value)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                path.push(k.clone());
                collect(path, x, out);
                path.pop();
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                path.push(i.to_string());
                collect(path, x, out);
                path.pop();
            }
        }
        _ => out.push((path.clone(), v.clone())),
    }
}

fn pointer<'a>(root: &'a mut Value, path: &[String]) -> &'a mut Value {
    path.iter().fold(root, |cur, p| match cur {
        Value::Object(m) => m.get_mut(p).unwrap(),
        Value::Array(a) => &mut a[p.parse::<usize>().unwrap()],
        _ => unreachable!(),
    })
}

/// Integer digit runs in a printed row: coefficients, right-hand sides and
/// variable indices. Decimal numbers are left alone.
fn number_spans(row: &str) -> Vec<(usize, usize)> {
    let b = row.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if !b[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i < b.len() && b[i] == b'.' {
            while i < b.len() && (b[i] == b'.' || b[i].is_ascii_digit()) {
                i += 1;
            }
            continue;
        }
        out.push((start, i));
    }
    out
}

fn still_verifies(doc: &Value) -> bool {
    CertificateDocument::from_json(&doc.to_string())
        .ok()
        .and_then(|d| verify_document(&d).ok())
        .is_some_and(|r| r.passed())
}

/// Dual and generator edits that leave a valid certificate: the Farkas
/// combination has slack, or the proof never uses the changed generator.
const VALID_EDITS: [&str; 18] = [
    "six_element_non_fc: family/generators/3 -> \"12564\"",
    "six_element_non_fc: normalization/dual -> \"-7191\"",
    "six_element_fc_proof: family/generators/4 -> \"2345\"",
    "six_element_fc_proof: family/generators/4 -> \"1245\"",
    "six_element_fc_proof: family/generators/4 -> \"1235\"",
    "six_element_fc_proof: leaves/0/rows/0/dual -> \"-375/2\"",
    "six_element_fc_proof: leaves/0/rows/22/dual -> \"-27/2\"",
    "six_element_fc_proof: leaves/0/rows/25/dual -> \"-2\"",
    "six_element_fc_proof: leaves/0/rows/26/dual -> \"-8\"",
    "six_element_fc_proof: leaves/0/rows/28/dual -> \"-13/2\"",
    "six_element_fc_proof: leaves/0/rows/29/dual -> \"-13/2\"",
    "six_element_fc_proof: leaves/1/rows/0/dual -> \"45\"",
    "six_element_fc_proof: leaves/1/rows/0/dual -> \"89/2\"",
    "six_element_fc_proof: leaves/1/rows/18/dual -> \"-1\"",
    "six_element_fc_proof: leaves/1/rows/26/dual -> \"-13\"",
    "six_element_fc_proof: leaves/1/rows/34/dual -> \"-17\"",
    "seven_element_non_fc: normalization/dual -> \"2\"",
    "seven_element_non_fc: normalization/dual -> \"3/2\"",
];

/// Why an edit that still verifies yields a valid certificate, if it does.
fn explain_survivor(label: &str, doc: &Value, path: &[String], edit: &Value) -> Option<&'static str> {
    let key = path.last()?.as_str();
    let entry = pointer_ref(doc, &path[..path.len() - 1]);
    if key == "kind" && entry["kind"] == "fs" && edit == "fc" {
        return Some("an FS row is an FC row with one set inside the other");
    }
    if key == "row" && entry["dual"] == "0" {
        return Some("the edited row has dual zero");
    }
    VALID_EDITS.contains(&label).then_some("listed dual or generator edit")
}

fn pointer_ref<'a>(root: &'a Value, path: &[String]) -> &'a Value {
    path.iter().fold(root, |cur, p| match cur {
        Value::Object(m) => &m[p],
        Value::Array(a) => &a[p.parse::<usize>().unwrap()],
        _ => &Value::Null,
    })
}

struct MutationScan {
    total: usize,
    survivors: Vec<(String, &'static str)>,
    unexplained: Vec<String>,
}

fn mutation_scan() -> Result<MutationScan, String> {
    let mut scan = MutationScan { total: 0, survivors: Vec::new(), unexplained: Vec::new() };
    for name in ["six_element_non_fc", "six_element_fc_proof", "seven_element_non_fc"] {
        let doc: Value = serde_json::from_str(&read(&format!("{name}.json"))).map_err(s)?;
        ensure(still_verifies(&doc), format!("{name} does not verify unmutated"))?;
        for (path, edit, mutated) in mutations(&doc) {
            scan.total += 1;
            if still_verifies(&mutated) {
                let label = format!("{name}: {} -> {edit}", path.join("/"));
                match explain_survivor(&label, &doc, &path, &edit) {
                    Some(why) => scan.survivors.push((label, why)),
                    None => scan.unexplained.push(label),
                }
            }
        }
    }
    Ok(scan)
}

fn property_suites() -> Outcome {
    let (c1, _) = run_property(300, uc_family(1, 5, false), |f| {
        let with = verdict(&f, MasterMode::LpNormalized)?;
        let without = verdict(&f.drop_empty(), MasterMode::LpNormalized)?;
        prop_assert_eq!(with, without);
        if f.n() <= 4 {
            let oracle = brute_force_classify(&f.drop_empty()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(oracle.is_fc(), with);
        }
        Ok(with)
    })?;
    let (c2, feasible2) = run_property(300, uc_family(2, 6, true), |f| {
        let (_, outcome) = vaughan_solve(&f).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let VaughanOutcome::Feasible { point, .. } = outcome else { return Ok(false) };
        let scaled: Vec<Rational> =
            lcm_scale(&point).map_err(|e| TestCaseError::fail(e.to_string()))?.into_iter().map(Rational::from_integer).collect();
        let z = morris_system(&f).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(satisfies(&z, &scaled), "scaled point violates Z for {:?}", f);
        Ok(true)
    })?;
    let (c3, feasible3) = run_property(300, uc_family(2, 6, true), |f| {
        let check = smaller_g_implication(&f).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(check.g_rows_hold, "G rows fail for {:?}", f);
        Ok(!check.z_point.is_empty())
    })?;
    let (c4, fc4) = run_property(200, uc_family(2, 5, false), |f| {
        let lp = verdict(&f, MasterMode::LpNormalized)?;
        let ip = verdict(&f, MasterMode::IpL1Min)?;
        prop_assert_eq!(lp, ip);
        Ok(lp)
    })?;
    let cases = c1 + c2 + c3 + c4;
    ensure(cases >= 1000, "fewer than 1000 property cases")?;
    let scan = mutation_scan()?;
    ensure(scan.unexplained.is_empty(), format!("edits that should fail still verify: {:?}", scan.unexplained))?;
    let attained = format!(
        "{cases} property cases: empty-set invariance, equations imply Z ({feasible2} feasible), Z implies G ({feasible3} nonempty), lp/ip agree ({fc4} FC); \
         {} of {} single-field fixture edits fail verification",
        scan.total - scan.survivors.len(),
        scan.total
    );
    if scan.survivors.is_empty() {
        return Ok(Status::Pass(attained));
    }
    let count = |why: &str| scan.survivors.iter().filter(|(_, w)| *w == why).count();
    Ok(Status::Known {
        attained,
        contradicted: format!(
            "{} edits still verify and each yields another valid certificate ({} FS rows relabelled FC, {} edits of rows with dual zero, {} dual or generator edits with slack)",
            scan.survivors.len(),
            count("an FS row is an FC row with one set inside the other"),
            count("the edited row has dual zero"),
            count("listed dual or generator edit"),
        ),
    })
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("six-element Non-FC certificate replay", six_element_witness_certificate),
        ("six-element weights and two-leaf proof", six_element_weights_and_two_leaf_proof),
        ("counterexample pipeline", counterexample_pipeline),
        ("seven-element relaxations", seven_element_relaxations),
        ("five-element Z relaxation", five_element_z_relaxation),
        ("weight table regression", weight_tables),
        ("oracle equivalence", oracle_agreement),
        ("property suites", property_suites),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(k + 1)) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|m| m.to_string())).unwrap_or_default())
        });
        match result {
            Ok(Status::Pass(detail)) => println!("criterion {}: PASS {title}: {detail}", k + 1),
            Ok(Status::Known { attained, contradicted }) => {
                println!("criterion {}: FAIL {title}: known: {contradicted}; otherwise {attained}", k + 1)
            }
            Err(e) => {
                unexpected += 1;
                println!("criterion {}: FAIL {title}: {e}", k + 1);
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
