//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use contfrac::identities::verify::entry13_even_closed_forms;
use contfrac::{
    approximants, bernoulli_cf, cf_source, determinant_residual, entry13_footnote, euler_cf, even_part, extend,
    hill_ratio, hyp2f1_partial_sum, lange_find_params, lange_sandwich, odd_part, params, proof_extension,
    to_unit_numerators, verify, worpitzky_check, CoefficientSource, ExtensionScheme, IdentityId, Mode, Scalar, VerifyOptions, Witness,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(s: &str) -> Scalar {
    Scalar::parse(s, 50).expect("literal")
}

fn c50() -> Mode {
    Mode::complex(50).expect("digits")
}

fn below(x: &Scalar, tol: &str) -> bool {
    x.cmp_abs(&q(tol)) == std::cmp::Ordering::Less
}

fn random_rational(rng: &mut ChaCha8Rng, bound: i64, nonzero: bool) -> Scalar {
    loop {
        let den = rng.random_range(1..=3i64);
        let num = rng.random_range(-bound * den..=bound * den);
        if nonzero && num == 0 {
            continue;
        }
        return Scalar::from_ratio(num, den, Mode::Rational);
    }
}

/// Rational sources with every coefficient in `[-5, 5]` and nonzero.
fn corpus(seed: u64, count: usize, len: usize) -> Vec<CoefficientSource> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let b0 = random_rational(&mut rng, 5, false);
            let terms = (0..len)
                .map(|_| (random_rational(&mut rng, 5, true), random_rational(&mut rng, 5, true)))
                .collect();
            CoefficientSource::from_terms(b0, terms)
        })
        .collect()
}

fn opts(depth: usize, digits: u32, tol: &str, mode: Option<Mode>) -> VerifyOptions {
    VerifyOptions { depth, digits, tol: tol.into(), mode, override_predicate: false }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sources = corpus(1, 500, 15);
    for (i, src) in sources.iter().enumerate() {
        let full = approximants(src, 15).map_err(|e| format!("source {i}: {e}"))?;
        let even = approximants(&even_part(src), 7).map_err(|e| format!("source {i}: {e}"))?;
        let odd_src = odd_part(src).map_err(|e| format!("source {i}: {e}"))?;
        let odd = approximants(&odd_src, 7).map_err(|e| format!("source {i}: {e}"))?;
        for k in 0..=7 {
            ensure(even[k] == full[2 * k], || format!("source {i}: even part differs at k = {k}"))?;
            ensure(odd[k] == full[2 * k + 1], || format!("source {i}: odd part differs at k = {k}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("500 sources, 15 terms, exact, {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let targets = corpus(2, 200, 10);
    for (i, t) in targets.iter().enumerate() {
        for scheme in [ExtensionScheme::Cor1, ExtensionScheme::Cor2] {
            let ext = extend(t, &scheme).map_err(|e| e.to_string())?;
            let back = even_part(&ext);
            ensure(back.len() == Some(10), || format!("target {i}: {scheme:?} length {:?}", back.len()))?;
            let diff = back.first_difference(t, 10).map_err(|e| e.to_string())?;
            ensure(diff.is_none(), || format!("target {i}: {scheme:?} differs at {diff:?}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for i in 0..200 {
        let b0 = random_rational(&mut rng, 5, true);
        let one = Scalar::one(Mode::Rational);
        let terms = (0..10).map(|_| (random_rational(&mut rng, 5, true), one.clone())).collect();
        let t = CoefficientSource::from_terms(b0, terms);
        let ext = extend(&t, &ExtensionScheme::Cor7).map_err(|e| e.to_string())?;
        let back = odd_part(&ext).map_err(|e| e.to_string())?;
        let diff = back.first_difference(&t, 10).map_err(|e| e.to_string())?;
        ensure(diff.is_none(), || format!("cor7 target {i} differs at {diff:?}"))?;
    }
    Ok("cor1, cor2 and cor7 on 200 targets each, exact".into())
}

fn criterion_3() -> Outcome {
    let sources = corpus(3, 200, 25);
    for (i, src) in sources.iter().enumerate() {
        for n in 1..=25 {
            let (r1, r2) = determinant_residual(src, n).map_err(|e| e.to_string())?;
            ensure(r1.is_zero() && r2.is_zero(), || format!("source {i}, N = {n}: residuals ({r1}, {r2})"))?;
        }
    }
    Ok("200 sources, N <= 25, residuals exactly zero".into())
}

fn criterion_4() -> Outcome {
    for x in ["1", "1/2", "2+i"] {
        let r = verify(IdentityId::Entry7, &params(&[("x", x)]), &opts(40, 50, "1e-20", Some(c50())))
            .map_err(|e| e.to_string())?;
        ensure(r.passed() && below(&r.abs_diff, "1e-20"), || format!("entry7 x = {x}: {}", r.to_json()))?;
    }
    let sequences = [
        params(&[("y1", "1/2"), ("step", "2")]),
        params(&[("y1", "2"), ("ratio", "3")]),
        params(&[("y1", "1+i"), ("step", "1")]),
        params(&[("y1", "-3"), ("ratio", "4/3")]),
    ];
    for p in &sequences {
        let r = verify(IdentityId::Entry7a, p, &opts(40, 50, "1e-20", Some(c50()))).map_err(|e| e.to_string())?;
        ensure(r.passed() && below(&r.abs_diff, "1e-20"), || format!("entry7a {p:?}: {}", r.to_json()))?;
    }
    for p in [&sequences[0], &sequences[1], &sequences[3]] {
        let ext = proof_extension(IdentityId::Entry7a, p, Mode::Rational).map_err(|e| e.to_string())?.source;
        let vals = approximants(&ext, 81).map_err(|e| e.to_string())?;
        for n in (1..=81).step_by(2) {
            ensure(vals[n] == Some(q("1")), || format!("entry7a {p:?}: odd approximant {n} is {:?}", vals[n]))?;
        }
    }
    Ok("entry7 at 3 points, entry7a on 4 sequences, odd approximants exactly 1 to 81".into())
}

fn criterion_5() -> Outcome {
    let grid = [("1", "2"), ("2", "1/3"), ("1/2", "3"), ("3", "-1/2"), ("-1/2", "7/3"), ("1+i", "0.5")];
    for (a, x) in grid {
        let r = verify(IdentityId::Entry9, &params(&[("a", a), ("x", x)]), &opts(500, 50, "1e-15", None))
            .map_err(|e| e.to_string())?;
        ensure(r.passed() && below(&r.abs_diff, "1e-15"), || format!("entry9 a = {a}, x = {x}: {}", r.to_json()))?;
    }
    let r = verify(IdentityId::Entry9, &params(&[("a", "0"), ("x", "2")]), &opts(500, 50, "1e-15", None))
        .map_err(|e| e.to_string())?;
    ensure(r.passed(), || format!("entry9 a = 0, x = 2: {}", r.to_json()))?;
    ensure(r.notes.iter().any(|n| n.contains("empirically")), || "a = 0 case not flagged".into())?;
    Ok("6 grid pairs and the a = 0, x = 2 case at depth 500".into())
}

fn criterion_6() -> Outcome {
    for n in 1..=6 {
        let r = verify(IdentityId::Entry10, &params(&[("n", &n.to_string())]), &opts(100, 50, "1e-20", None))
            .map_err(|e| e.to_string())?;
        ensure(r.passed() && below(&r.abs_diff, "1e-20"), || format!("n = {n}: {}", r.to_json()))?;
        ensure(r.diagnostics.last_index == r.diagnostics.depth, || format!("n = {n}: final approximant infinite"))?;
    }
    Ok("n = 1..6 at depth 100".into())
}

fn criterion_7() -> Outcome {
    for (a, x) in [("1", "1"), ("2", "1/2"), ("1", "1+i")] {
        let r = verify(IdentityId::Entry12, &params(&[("a", a), ("x", x)]), &opts(300, 50, "1e-15", None))
            .map_err(|e| e.to_string())?;
        ensure(r.passed() && below(&r.abs_diff, "1e-15"), || format!("entry12 a = {a}, x = {x}: {}", r.to_json()))?;
    }
    for (a, x) in [("1", "1"), ("2", "1/2")] {
        let p = params(&[("a", a), ("x", x)]);
        let ext = proof_extension(IdentityId::Entry12, &p, Mode::Rational).map_err(|e| e.to_string())?.source;
        let den = to_unit_numerators(&ext);
        let vals = approximants(&den, 81).map_err(|e| e.to_string())?;
        for n in (1..=81).step_by(2) {
            ensure(vals[n] == Some(q("1")), || format!("a = {a}, x = {x}: odd approximant {n} is {:?}", vals[n]))?;
        }
    }
    Ok("3 parameter pairs at depth 300, unit-numerator odd approximants exactly 1 to 81".into())
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    for (a, b, d, tol) in [("1", "2", "1", "1e-3"), ("1", "3", "2", "1e-3"), ("1", "1", "1", "1e-10"), ("1", "2", "0", "1e-10")] {
        let r = verify(IdentityId::Entry13, &params(&[("a", a), ("b", b), ("d", d)]), &opts(10_000, 50, tol, None))
            .map_err(|e| e.to_string())?;
        if !(r.passed() && below(&r.abs_diff, tol)) {
            failures.push(format!(
                "(a, b, d) = ({a}, {b}, {d}): |estimate - a| = {} not below {tol}, decay {}",
                r.abs_diff.to_report_string(4, 0),
                r.diagnostics.decay.label()
            ));
        }
    }
    let r = entry13_footnote(10_000, 50, "1e-3").map_err(|e| e.to_string())?;
    let to_b = (&r.estimate - &Scalar::one(r.mode)).abs();
    if !below(&to_b, "1e-3") {
        failures.push(format!("footnote case: |estimate - b| = {}", to_b.to_report_string(4, 0)));
    }
    if below(&r.abs_diff, "1e-3") {
        failures.push("footnote case converged to a".into());
    }
    // independent closed forms agree with the recursion for k <= 50
    for (a, b, d) in [("1", "2", "1"), ("1", "1", "1"), ("1", "2", "0")] {
        let src = cf_source(IdentityId::Entry13, &params(&[("a", a), ("b", b), ("d", d)]), Mode::Rational)
            .map_err(|e| e.to_string())?;
        let closed = entry13_even_closed_forms(&q(a), &q(b), &q(d), 50).map_err(|e| e.to_string())?;
        let direct = approximants(&src, 50).map_err(|e| e.to_string())?;
        if (1..=50).any(|k| direct[k].as_ref() != Some(&closed[k - 1])) {
            failures.push(format!("closed-form approximants differ for ({a}, {b}, {d})"));
        }
    }
    if failures.is_empty() {
        Ok("Richardson cases within 1e-3, a = b and d = 0 within 1e-10, footnote case converges to b".into())
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_9() -> Outcome {
    for qv in ["0.1", "-0.4", "0.3+0.2i"] {
        for alpha in ["0", "1/2", "i/2"] {
            let p = params(&[("q", qv), ("alpha", alpha)]);
            let r = verify(IdentityId::Bb, &p, &opts(200, 50, "1e-30", None)).map_err(|e| e.to_string())?;
            ensure(r.passed() && below(&r.abs_diff, "1e-30"), || format!("q = {qv}, alpha = {alpha}: {}", r.to_json()))?;
            let bb = cf_source(IdentityId::Bb, &p, c50()).map_err(|e| e.to_string())?;
            let ev = cf_source(IdentityId::BbEven, &p, c50()).map_err(|e| e.to_string())?;
            let diff = even_part(&bb).first_difference(&ev, 40).map_err(|e| e.to_string())?;
            ensure(diff.is_none(), || format!("q = {qv}, alpha = {alpha}: even part differs at {diff:?}"))?;
        }
    }
    Ok("9 (q, alpha) pairs below 1e-30, even part matches for 40 terms".into())
}

fn criterion_10() -> Outcome {
    for a in ["1/4", "-1/4"] {
        let src = contfrac::build_family("constant", &params(&[("a", a)]), None, Mode::Rational)
            .map_err(|e| e.to_string())?;
        match worpitzky_check(&src, 200).map_err(|e| e.to_string())? {
            Ok(cert) => match cert.witness {
                Witness::Worpitzky { max_abs_approximant, .. } => {
                    ensure(below(&max_abs_approximant, "1/2"), || format!("a = {a}: disc claim fails"))?
                }
                other => return Err(format!("a = {a}: unexpected witness {other:?}")),
            },
            Err(refusal) => return Err(format!("a = {a}: refused {refusal}")),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut sampled = 0;
    while sampled < 100 {
        let (re, im): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        if im == 0.0 && re <= 0.0 {
            continue;
        }
        let a = Scalar::from_f64_parts(re, im, 50);
        let lp = lange_find_params(&a, 50).map_err(|e| e.to_string())?;
        ensure(lange_sandwich(&lp.alpha, &lp.rho), || format!("sandwich fails at a = {re} + {im}i"))?;
        sampled += 1;
    }
    let e9 = lange_find_params(&q("1"), 50).map_err(|e| e.to_string())?;
    ensure(e9.alpha == q("1/2") && e9.rho_sq == q("5/4"), || format!("a = 1: alpha {}, rho^2 {}", e9.alpha, e9.rho_sq))?;
    let sqrt5_half = Scalar::from_f64_parts(5f64.sqrt() / 2.0, 0.0, 50);
    ensure(e9.rho.rel_close(&sqrt5_half, -15.0), || format!("a = 1: rho {}", e9.rho))?;
    let e10 = lange_find_params(&q("2"), 50).map_err(|e| e.to_string())?;
    ensure(e10.alpha == q("1/4") && e10.rho == q("3/4"), || format!("m = 3: alpha {}, rho {}", e10.alpha, e10.rho))?;
    Ok("worpitzky at +-1/4, 100 sandwich samples, both worked parameterizations".into())
}

/// `sum_{i<=k} (a)_i (b)_i / ((c)_i i!)` with every Pochhammer product rebuilt from scratch.
fn direct_hyp_sum(a: &Scalar, b: &Scalar, c: &Scalar, k: usize) -> Scalar {
    let poch = |x: &Scalar, i: usize| -> Scalar {
        (0..i).fold(Scalar::one(Mode::Rational), |acc, j| &acc * &(x + &Scalar::from_i64(j as i64, Mode::Rational)))
    };
    let fact = |i: usize| -> Scalar {
        (1..=i).fold(Scalar::one(Mode::Rational), |acc, j| &acc * &Scalar::from_i64(j as i64, Mode::Rational))
    };
    (0..=k).fold(Scalar::zero(Mode::Rational), |s, i| {
        &s + &(&(&poch(a, i) * &poch(b, i)) / &(&poch(c, i) * &fact(i)))
    })
}

fn criterion_11() -> Outcome {
    let mut failures = Vec::new();
    for (a, b, c) in [("1", "2", "2"), ("1", "1", "2")] {
        let r = hill_ratio(&q(a), &q(b), &q(c), 10_000).map_err(|e| e.to_string())?;
        if (r - 1.0).norm() >= 0.05 {
            failures.push(format!("hill_ratio({a}, {b}, {c}, 1e4) = {:.5}", r.re));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..50 {
        let pick = |rng: &mut ChaCha8Rng| Scalar::from_ratio(rng.random_range(1..=20), rng.random_range(1..=4), Mode::Rational);
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let k = rng.random_range(0..=100usize);
        let fast = hyp2f1_partial_sum(&a, &b, &c, k).map_err(|e| e.to_string())?;
        if fast != direct_hyp_sum(&a, &b, &c, k) {
            failures.push(format!("sample {i}: partial sum mismatch for ({a}, {b}, {c}), k = {k}"));
        }
    }
    if failures.is_empty() {
        Ok("both regimes within 0.05, 50 partial sums match direct summation".into())
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..100 {
        let terms: Vec<Scalar> = (0..12).map(|_| random_rational(&mut rng, 5, true)).collect();
        let mut sums = Vec::with_capacity(terms.len());
        let mut acc = Scalar::zero(Mode::Rational);
        for t in &terms {
            acc = &acc + t;
            sums.push(acc.clone());
        }
        let euler = approximants(&euler_cf(&terms).map_err(|e| e.to_string())?, 11).map_err(|e| e.to_string())?;
        let bern = approximants(&bernoulli_cf(&sums).map_err(|e| e.to_string())?, 11).map_err(|e| e.to_string())?;
        for n in 0..=11 {
            ensure(euler[n].as_ref() == Some(&sums[n]), || format!("series {i}: euler approximant {n}"))?;
            ensure(bern[n].as_ref() == Some(&sums[n]), || format!("series {i}: bernoulli approximant {n}"))?;
        }
        let seq: Vec<Scalar> = (0..12).map(|_| random_rational(&mut rng, 5, false)).collect();
        if seq.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let vals = approximants(&bernoulli_cf(&seq).map_err(|e| e.to_string())?, 11).map_err(|e| e.to_string())?;
        for n in 0..=11 {
            ensure(vals[n].as_ref() == Some(&seq[n]), || format!("sequence {i}: approximant {n}"))?;
        }
    }
    Ok("100 random series: Bernoulli, Euler and their agreement exact".into())
}

fn cf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cf")).args(args).output().expect("run cf")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

fn criterion_13() -> Outcome {
    let dir = std::env::temp_dir().join(format!("cf-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let spec = dir.join("job.json");
    std::fs::write(&spec, r#"{"action":"verify","id":"entry9","params":{"a":"1","x":"2"},"depth":120}"#)
        .map_err(|e| e.to_string())?;
    let spec = spec.to_string_lossy().to_string();

    let first = cf(&["--spec", &spec]);
    let second = cf(&["--spec", &spec]);
    ensure(first.status.code() == Some(0), || format!("spec run exit {:?}", first.status.code()))?;
    ensure(first.stdout == second.stdout, || "repeated runs differ".into())?;
    let sweep = ["sweep", "--id", "bb", "--grid", "q=0.1,0.2,0.3", "--grid", "alpha=0,1/2,i/2", "--no-header"];
    let s1 = cf(&[&["--jobs", "1"][..], &sweep[..]].concat());
    let s4 = cf(&[&["--jobs", "4"][..], &sweep[..]].concat());
    ensure(s1.stdout == s4.stdout, || "sweep output depends on --jobs".into())?;
    let lines = records(&s4);
    ensure(lines.len() == 9, || format!("sweep produced {} lines", lines.len()))?;
    ensure(lines.iter().all(|r| r["verdict"] == "pass"), || "sweep has a failing cell".into())?;
    ensure(s4.status.code() == Some(0), || format!("sweep exit {:?}", s4.status.code()))?;

    let e10 = cf(&["verify", "--id", "entry10", "--param", "n=3", "--depth", "100", "--tol", "1e-20", "--no-header"]);
    ensure(e10.status.code() == Some(0), || format!("entry10 exit {:?}", e10.status.code()))?;
    let rec = &records(&e10)[0];
    ensure(rec["verdict"] == "pass" && rec["mode"] == "rational", || format!("entry10 record {rec}"))?;
    let diff = Scalar::parse(rec["abs_diff"].as_str().unwrap_or("1"), 50).map_err(|e| e.to_string())?;
    ensure(below(&diff, "1e-20"), || format!("entry10 abs_diff {diff}"))?;

    let refuse = cf(&["certify", "--criterion", "worpitzky", "--family", "constant", "--param", "a=0.3", "--no-header"]);
    ensure(refuse.status.code() == Some(1), || format!("worpitzky refusal exit {:?}", refuse.status.code()))?;
    let rec = &records(&refuse)[0];
    ensure(rec["refusal"]["index"] == 1, || format!("refusal record {rec}"))?;

    let matrix: [(&[&str], i32); 6] = [
        (&["verify", "--id", "entry13", "--param", "a=2", "--param", "b=1", "--param", "d=1", "--override", "--depth", "400", "--tol", "1e-3"], 1),
        (&["verify", "--id", "entry13", "--param", "a=2", "--param", "b=1", "--param", "d=1"], 2),
        (&["eval", "--source", r#"{"b0":"0","terms":[["1","1"]]}"#, "--depth", "5"], 0),
        (&["eval", "--family", "nosuch"], 2),
        (&["verify", "--id", "entry9", "--param", "a=1"], 2),
        (&["contract", "--kind", "even", "--source", r#"{"b0":"0","family":"golden"}"#, "--terms", "5"], 0),
    ];
    for (args, code) in matrix {
        let out = cf(args);
        ensure(out.status.code() == Some(code), || {
            format!("{args:?}: exit {:?}, expected {code}; stderr {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
        })?;
    }
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"action":"eval","source":{"b0":"0","terms":[["1","1"]]},"depth":"5"}"#)
        .map_err(|e| e.to_string())?;
    let out = cf(&["--spec", &bad.to_string_lossy()]);
    ensure(out.status.code() == Some(2), || format!("string depth exit {:?}", out.status.code()))?;
    ensure(String::from_utf8_lossy(&out.stderr).contains("/depth"), || "string depth error lacks pointer".into())?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok("repeat runs byte-identical, sweep order independent of --jobs, exit codes 0/1/2".into())
}

fn main() {
    let criteria: [Criterion; 13] = [
        (1, "contraction subsequences", criterion_1),
        (2, "extension round trips", criterion_2),
        (3, "determinant identity", criterion_3),
        (4, "entries 7 and 7a", criterion_4),
        (5, "entry 9", criterion_5),
        (6, "entry 10", criterion_6),
        (7, "entry 12", criterion_7),
        (8, "entry 13", criterion_8),
        (9, "generalized Rogers-Ramanujan", criterion_9),
        (10, "convergence certificates", criterion_10),
        (11, "hypergeometric asymptotics", criterion_11),
        (12, "Bernoulli and Euler transforms", criterion_12),
        (13, "cli determinism and exit codes", criterion_13),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    panic::set_hook(Box::new(|_| {}));
    for (n, name, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {n:>2} ({name}): {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n:>2} ({name}): {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
