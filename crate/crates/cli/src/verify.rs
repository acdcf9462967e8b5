//! Verification suites: each one drives a structural module against the
//! exhaustive oracle (or an independent identity) and reports pass/fail with
//! a counterexample payload on failure. The process exit code is nonzero iff
//! any selected check fails.

use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};

use borel_orbits::census;
use borel_orbits::covers;
use borel_orbits::form::{GroupElement, Permutation, QuadraticForm};
use borel_orbits::normal::{normalize, NormalForm};
use borel_orbits::oracle;
use borel_orbits::parabolic::p_orbit_decompose;
use borel_orbits::tower::FieldElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// normalize is constant on exhaustive B(F)-orbits; image count = census
    Fibers,
    /// randomized Borel orbit invariance of normalize
    Invariance,
    /// parabolic orbit decompositions match the brute-force P_i(F)-orbits
    Parabolic,
    /// stabilizer presentations solve to the brute-forced stabilizers
    Stabilizers,
    /// cover counts, bijection round trips
    Covers,
    /// involution/commutation/braid laws of the label action
    Weyl,
    /// case classification of the label action vs the parabolic classes
    Knop,
    /// Catalan triangle identity and b(n,f) agreement
    Triangle,
    /// torus projection sizes confirm B-ranks
    Brank,
    /// is_nondegenerate agrees with the radical computation
    Nondegeneracy,
    All,
}

pub struct CheckReport {
    pub name: String,
    pub scope: String,
    pub pass: bool,
    pub detail: String,
}

fn report(out: &mut Vec<CheckReport>, name: &str, scope: String, pass: bool, detail: String) {
    out.push(CheckReport { name: name.into(), scope, pass, detail });
}

fn normal_forms(n: usize) -> Vec<NormalForm> {
    census::enumerate_normal_forms(n).expect("guarded by callers")
}

fn suite_fibers(n: usize, level: u8, out: &mut Vec<CheckReport>) {
    match oracle::fiber_check(n, level) {
        Ok(r) => {
            let census_count = normal_forms(n).len();
            let pass = r.passed(census_count);
            report(
                out,
                "fibers",
                format!("n={n} level={level}"),
                pass,
                format!(
                    "{} forms checked, {} orbits, {} distinct images, census {}, {} violations",
                    r.forms_checked,
                    r.orbit_count,
                    r.distinct_images,
                    census_count,
                    r.violations.len()
                ),
            );
        }
        Err(e) => report(out, "fibers", format!("n={n} level={level}"), false, e.to_string()),
    }
}

fn suite_invariance(n: usize, out: &mut Vec<CheckReport>) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0b0e1);
    let mut failures = 0usize;
    let samples = 1000usize;
    for _ in 0..samples {
        let mut q = QuadraticForm::zero(n);
        for i in 1..=n {
            for j in i..=n {
                q.set_coef(i, j, FieldElement::from_bits(1, rng.gen_range(0..4))).unwrap();
            }
        }
        let mut entries = vec![FieldElement::zero(0); n * n];
        for r in 1..=n {
            for c in r..=n {
                let bits = if r == c { rng.gen_range(1..4) } else { rng.gen_range(0..4) };
                entries[(r - 1) * n + (c - 1)] = FieldElement::from_bits(1, bits);
            }
        }
        let b = GroupElement::borel(n, entries).unwrap();
        let lhs = normalize(&q.act(&b)).unwrap().nf;
        let rhs = normalize(&q).unwrap().nf;
        if lhs != rhs {
            failures += 1;
        }
    }
    report(
        out,
        "invariance",
        format!("n={n} level=1"),
        failures == 0,
        format!("{samples} random Borel actions, {failures} failures"),
    );
}

fn suite_parabolic(n: usize, level: u8, out: &mut Vec<CheckReport>) {
    let table = match oracle::enumerate_b_orbits(n, level) {
        Ok(t) => t,
        Err(e) => {
            report(out, "parabolic", format!("n={n} level={level}"), false, e.to_string());
            return;
        }
    };
    let mut checked = 0usize;
    let mut split_orbits = 0usize;
    let mut bad = Vec::new();
    for q in normal_forms(n) {
        for i in 1..n {
            let d = p_orbit_decompose(&q, i);
            let rep_ids: BTreeSet<usize> = d
                .reps
                .iter()
                .map(|r| table.orbit_id_of_form(&r.as_form()).expect("0/1 coefficients"))
                .collect();
            if rep_ids.len() != d.reps.len() {
                bad.push(format!("{q} i={i}: representatives share an orbit"));
                continue;
            }
            match oracle::parabolic_bruteforce(&table, &q, i) {
                Ok(ids) => {
                    // Each representative's orbit is in the P-orbit …
                    if !rep_ids.is_subset(&ids) {
                        bad.push(format!("{q} i={i}: rep orbit outside the P-orbit"));
                    }
                    // … and the P-orbit's F-points normalize exactly onto
                    // the representative set (an orbit over the closure may
                    // shadow as several F-orbits when a repair step needs a
                    // root from a higher field).
                    let fibers: BTreeSet<NormalForm> = ids
                        .iter()
                        .map(|&id| {
                            normalize(&table.representative_form(id)).expect("desk-scale").nf
                        })
                        .collect();
                    let reps: BTreeSet<NormalForm> = d.reps.iter().cloned().collect();
                    if fibers != reps {
                        bad.push(format!("{q} i={i}: fibers {fibers:?} vs reps {reps:?}"));
                    }
                    split_orbits += ids.len() - rep_ids.len().min(ids.len());
                }
                Err(e) => bad.push(format!("{q} i={i}: {e}")),
            }
            checked += 1;
        }
    }
    report(
        out,
        "parabolic",
        format!("n={n} level={level}"),
        bad.is_empty(),
        if bad.is_empty() {
            format!("{checked} decompositions match the oracle ({split_orbits} field-split orbit shadows)")
        } else {
            bad.join("; ")
        },
    );
}

fn suite_stabilizers(n: usize, out: &mut Vec<CheckReport>) {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for q in census::enumerate_max_rank(n) {
        let presentation = covers::stabilizer_presentation(&q).expect("max-rank");
        for level in [0u8, 1] {
            let brute = match oracle::stabilizer_bruteforce(&q, level) {
                Ok(b) => b,
                Err(e) => {
                    bad.push(format!("{q} level {level}: {e}"));
                    continue;
                }
            };
            let derived = presentation.solutions(level).expect("level <= 1");
            let a: BTreeSet<Vec<u8>> = brute.iter().cloned().collect();
            let b: BTreeSet<Vec<u8>> = derived.into_iter().collect();
            if a != b {
                bad.push(format!("{q} level {level}: solution sets differ"));
            }
            checked += 1;
        }
        match (oracle::stabilizer_cardinality_fit(&q), covers::component_count(&q)) {
            (Ok((c, _)), Ok(expected)) if c == expected => {}
            (fit, expected) => bad.push(format!("{q}: fit {fit:?} vs count {expected:?}")),
        }
        // φ-additivity on every brute-forced pair over F_4
        let field = oracle::SmallField::new(1).unwrap();
        if let Ok(stab) = oracle::stabilizer_bruteforce(&q, 1) {
            for u in &stab {
                for v in &stab {
                    let w = oracle::umatrix_mul(&field, q.n(), u, v);
                    let eu = presentation.phi_epsilon(&field, u);
                    let ev = presentation.phi_epsilon(&field, v);
                    let ew = presentation.phi_epsilon(&field, &w);
                    let sum: Vec<u8> =
                        eu.iter().zip(&ev).map(|(a, b)| field.add(*a, *b)).collect();
                    if ew != sum {
                        bad.push(format!("{q}: phi not additive"));
                    }
                }
            }
        }
    }
    report(
        out,
        "stabilizers",
        format!("n={n} levels=0,1"),
        bad.is_empty(),
        if bad.is_empty() { format!("{checked} solution-set comparisons") } else { bad.join("; ") },
    );
}

fn suite_covers(n: usize, out: &mut Vec<CheckReport>) {
    let mut bad = Vec::new();
    let total: u64 =
        census::enumerate_max_rank(n).iter().map(|q| covers::covers(q).unwrap().len() as u64).sum();
    let expect = census::binomial(n, n / 2);
    if num_bigint::BigUint::from(total) != expect {
        bad.push(format!("cover total {total} != binom({n},{})", n / 2));
    }
    for m in covers::all_cover_labels(n) {
        match covers::pi_inv(&m) {
            Ok(z) => match covers::pi(&z) {
                Ok(back) if back == m => {}
                other => bad.push(format!("round trip failed at {m}: {other:?}")),
            },
            Err(e) => bad.push(format!("{m}: {e}")),
        }
    }
    report(
        out,
        "covers",
        format!("n={n}"),
        bad.is_empty(),
        if bad.is_empty() {
            format!("{total} covers, all round trips hold")
        } else {
            bad.join("; ")
        },
    );
}

fn suite_weyl(n: usize, out: &mut Vec<CheckReport>) {
    let labels = covers::all_cover_labels(n);
    let mut bad = Vec::new();
    for i in 1..n {
        let si = Permutation::simple_reflection(n, i);
        for m in &labels {
            if covers::weyl_apply(&si, &covers::weyl_apply(&si, m)) != *m {
                bad.push(format!("s{i} not an involution at {m}"));
            }
        }
        for j in 1..n {
            let sj = Permutation::simple_reflection(n, j);
            for m in &labels {
                if i.abs_diff(j) >= 2 {
                    let a = covers::weyl_apply(&sj, &covers::weyl_apply(&si, m));
                    let b = covers::weyl_apply(&si, &covers::weyl_apply(&sj, m));
                    if a != b {
                        bad.push(format!("commutation fails at ({i},{j}) on {m}"));
                    }
                } else if i.abs_diff(j) == 1 {
                    let a = covers::weyl_apply(
                        &si,
                        &covers::weyl_apply(&sj, &covers::weyl_apply(&si, m)),
                    );
                    let b = covers::weyl_apply(
                        &sj,
                        &covers::weyl_apply(&si, &covers::weyl_apply(&sj, m)),
                    );
                    if a != b {
                        bad.push(format!("braid fails at ({i},{j}) on {m}"));
                    }
                }
            }
        }
    }
    report(
        out,
        "weyl",
        format!("n={n}"),
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} labels, all group laws hold", labels.len())
        } else {
            bad.join("; ")
        },
    );
}

fn suite_knop(n: usize, out: &mut Vec<CheckReport>) {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for m in covers::all_cover_labels(n) {
        for i in 1..n {
            let r = covers::knop_case(&m, i).expect("labels decode");
            if !r.consistent {
                bad.push(format!("label {m}, i={i}: {:?} with phi {}", r.case, r.phi));
            }
            checked += 1;
        }
    }
    report(
        out,
        "knop",
        format!("n={n}"),
        bad.is_empty(),
        if bad.is_empty() { format!("{checked} (label, reflection) cases") } else { bad.join("; ") },
    );
}

fn suite_triangle(n: usize, out: &mut Vec<CheckReport>) {
    let r = census::verify_triangle_identity(n as i64);
    let mut bad: Vec<String> =
        r.failures.iter().map(|f| format!("C({},{}) {} != {}", f.n, f.k, f.lhs, f.rhs)).collect();
    for half in 1..=(n / 2).min(7) {
        for f in 1..=half {
            let direct = census::b_count_direct(2 * half, f);
            let rec = census::b_count_recursive(2 * half, f);
            let tri = census::catalan_triangle(half as i64 - 1, (half - f) as i64);
            if direct != rec || direct != tri {
                bad.push(format!("b({},{f}): {direct}/{rec}/{tri}", 2 * half));
            }
        }
    }
    report(
        out,
        "triangle",
        format!("n<={n}"),
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} triangle cells and b-counts agree", r.checked)
        } else {
            bad.join("; ")
        },
    );
}

fn suite_brank(n: usize, out: &mut Vec<CheckReport>) {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for q in normal_forms(n) {
        match oracle::torus_projection_size(&q, 1) {
            Ok(size) => {
                let expect = 3usize.pow((n - q.brank()) as u32);
                if size != expect {
                    bad.push(format!("{q}: |pi(B_q)| = {size}, expected {expect}"));
                }
                checked += 1;
            }
            Err(e) => bad.push(format!("{q}: {e}")),
        }
    }
    report(
        out,
        "brank",
        format!("n={n} level=1"),
        bad.is_empty(),
        if bad.is_empty() { format!("{checked} torus projections confirm B-ranks") } else { bad.join("; ") },
    );
}

fn suite_nondegeneracy(n: usize, out: &mut Vec<CheckReport>) {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for q in normal_forms(n) {
        for level in [0u8, 1] {
            match oracle::nondegeneracy_bruteforce(&q.as_form(), level) {
                Ok(brute) => {
                    if brute != q.is_nondegenerate() {
                        bad.push(format!("{q} at level {level}"));
                    }
                    checked += 1;
                }
                Err(e) => bad.push(format!("{q}: {e}")),
            }
        }
    }
    report(
        out,
        "nondegeneracy",
        format!("n={n} levels=0,1"),
        bad.is_empty(),
        if bad.is_empty() { format!("{checked} radical computations agree") } else { bad.join("; ") },
    );
}

pub fn run(suites: &[Suite], n: usize, field_level: u8) -> ExitCode {
    let selected: Vec<Suite> = if suites.is_empty() || suites.contains(&Suite::All) {
        vec![
            Suite::Fibers,
            Suite::Invariance,
            Suite::Parabolic,
            Suite::Stabilizers,
            Suite::Covers,
            Suite::Weyl,
            Suite::Knop,
            Suite::Triangle,
            Suite::Brank,
            Suite::Nondegeneracy,
        ]
    } else {
        suites.to_vec()
    };
    let mut reports = Vec::new();
    for suite in selected {
        match suite {
            Suite::Fibers => suite_fibers(n, field_level, &mut reports),
            Suite::Invariance => suite_invariance(n, &mut reports),
            Suite::Parabolic => suite_parabolic(n, field_level, &mut reports),
            Suite::Stabilizers => suite_stabilizers(n, &mut reports),
            Suite::Covers => suite_covers(n, &mut reports),
            Suite::Weyl => suite_weyl(n, &mut reports),
            Suite::Knop => suite_knop(n, &mut reports),
            Suite::Triangle => suite_triangle(n, &mut reports),
            Suite::Brank => suite_brank(n, &mut reports),
            Suite::Nondegeneracy => suite_nondegeneracy(n, &mut reports),
            Suite::All => unreachable!("expanded above"),
        }
    }
    let mut failures = 0usize;
    for r in &reports {
        println!(
            "[{}] {} ({}): {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.scope,
            r.detail
        );
        if !r.pass {
            failures += 1;
        }
    }
    let summary = serde_json::json!({
        "checks": reports.len(),
        "failures": failures,
        "results": reports.iter().map(|r| serde_json::json!({
            "name": r.name,
            "scope": r.scope,
            "pass": r.pass,
        })).collect::<Vec<_>>(),
    });
    println!("{summary}");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
