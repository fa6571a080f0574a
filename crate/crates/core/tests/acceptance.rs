//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bhcore::atoms_tree::{build_tree, AtomTree};
use bhcore::kuznetsov::{kuznetsov_decide_with, replay, Certificate, Mode, Outcome};
use bhcore::piecewise::{compose_prefix_maps, invert_prefix_map, prefix_map_to_transducer, random_prefix_map, PrefixMap};
use bhcore::presentation::{
    check_dehn_condition, circular_relators, dehn_solve, random_presentation, DehnSolver, DehnStep, Letter,
    Presentation, Rational, Word,
};
use bhcore::transducer::{
    all_words, boundary_equal, compose, nucleus, random_synchronous, BoundaryEquality, NucleusResult, Transducer,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../data");
    p.push(name);
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

const WORKED_WORD: &str = "d^-1 a c d c^-1 d^-1 a b a^-1 a^-1 b^-1 c d c^-1";

fn c1_worked_example() -> Check {
    let p = Presentation::from_json(&data("surface2.json")).map_err(|e| e.to_string())?;
    let w = p.parse_word(WORKED_WORD).unwrap();
    let start = Instant::now();
    let solver = DehnSolver::new(&p).map_err(|e| e.to_string())?;
    let solved = solver.solve(&w);
    let trace = solver.trace(&w);
    let elapsed = start.elapsed();
    ensure(solved, || "word not reduced to the empty word".into())?;
    let words = |ss: &[&str]| ss.iter().map(|s| p.parse_word(s).unwrap()).collect::<Vec<_>>();
    let results: Vec<Word> = trace.iter().map(|s| s.result().clone()).collect();
    let expected = words(&[
        "d^-1 a c d c^-1 d^-1 a b a^-1 b^-1 a^-1 d",
        "d^-1 a a^-1 d",
        "d^-1 d",
        "",
    ]);
    ensure(results == expected, || format!("trace {results:?}"))?;
    let replaced: Vec<(Word, Word)> = trace
        .iter()
        .filter_map(|s| match s {
            DehnStep::Replace { removed, inserted, .. } => Some((removed.clone(), inserted.clone())),
            DehnStep::Cancel { .. } => None,
        })
        .collect();
    let cancels = trace.iter().filter(|s| matches!(s, DehnStep::Cancel { .. })).count();
    let expected_replacements = vec![
        (
            p.parse_word("a^-1 b^-1 c d c^-1").unwrap(),
            p.parse_word("b^-1 a^-1 d").unwrap(),
        ),
        (p.parse_word("c d c^-1 d^-1 a b a^-1 b^-1").unwrap(), Word::empty()),
    ];
    ensure(replaced == expected_replacements, || format!("replacements {replaced:?}"))?;
    ensure(cancels == 2, || format!("{cancels} cancellations"))?;
    ensure(elapsed < Duration::from_millis(10), || format!("took {elapsed:?}"))?;
    Ok(format!("2 replacements, 2 cancellations in {elapsed:?}"))
}

fn c2_overlap_ratio() -> Check {
    let p = Presentation::surface_genus2();
    let r = check_dehn_condition(&p, Rational::new(1, 2)).map_err(|e| e.to_string())?;
    ensure(r.max_overlap_ratio == Rational::new(1, 8), || {
        format!("ratio {}", r.max_overlap_ratio)
    })?;
    ensure(r.passes, || "1/8 not below 1/2".into())?;
    Ok("max overlap ratio exactly 1/8".into())
}

fn random_reduced<R: Rng>(rank: u16, len: usize, rng: &mut R) -> Word {
    let mut w = Word::empty();
    while w.len() < len {
        let l = Letter::new(rng.gen_range(0..rank), rng.gen());
        if w.last().is_some_and(|x| x.cancels(l)) {
            continue;
        }
        w.push(l);
    }
    w
}

/// True if some subword is more than half of a circular relator.
fn has_long_piece(w: &Word, p: &Presentation) -> bool {
    let circ = circular_relators(p);
    for r in circ.words() {
        let n = r.len();
        for off in 0..n {
            let rot = r.rotation(off);
            for m in (n / 2 + 1)..=n.min(w.len()) {
                let sub = rot.slice(0, m);
                if w.letters().windows(m).any(|x| x == sub.letters()) {
                    return true;
                }
            }
        }
    }
    false
}

fn c3_dehn_soundness() -> Check {
    let p = Presentation::surface_genus2();
    let solver = DehnSolver::new(&p).map_err(|e| e.to_string())?;
    let rel = p.relators()[0].word().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    for i in 0..1000 {
        let k = rng.gen_range(1..=5);
        let mut w = Word::empty();
        for _ in 0..k {
            let len = rng.gen_range(0..=4);
            let u = random_reduced(4, len, &mut rng);
            let r = if rng.gen() { rel.clone() } else { rel.inverse() };
            w = w.mul(&u.mul(&r).mul(&u.inverse()));
        }
        ensure(solver.solve(&w), || format!("product #{i} {} not identity", p.format_word(&w)))?;
        ensure(dehn_solve(&w, &p).unwrap(), || format!("product #{i} rejected"))?;
    }
    let mut checked = 0;
    while checked < 1000 {
        let len = rng.gen_range(1..=6);
        let w = random_reduced(4, len, &mut rng);
        if has_long_piece(&w, &p) {
            continue;
        }
        ensure(!solver.solve(&w), || format!("{} wrongly identity", p.format_word(&w)))?;
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 identities, 1000 non-identities in {elapsed:?}"))
}

fn c4_sample_transducer() -> Check {
    let t = Transducer::from_json(&data("sample_machine.json")).map_err(|e| e.to_string())?;
    for (input, output) in [(&[0u8, 0][..], &[0u8][..]), (&[0, 1], &[1, 0]), (&[1], &[1, 1])] {
        let got = t.run(input);
        ensure(got == output, || format!("run({input:?}) = {got:?}"))?;
    }
    let b = t.local_action(&[0]).state;
    ensure(t.names()[b] == "b", || format!("local action of 0 is {}", t.names()[b]))?;
    let core: BTreeSet<&str> = t.core().states.iter().map(|&s| t.names()[s].as_str()).collect();
    ensure(core == BTreeSet::from(["a", "b"]), || format!("core {core:?}"))?;
    Ok("runs, local action and core match".into())
}

fn c5_transducer_algebra() -> Check {
    let start = Instant::now();
    let id = Transducer::identity(2);
    let words: Vec<Vec<u8>> = all_words(2, 12).collect();
    let equal = |a: &Transducer, b: &Transducer, what: &str| -> Result<(), String> {
        let e = boundary_equal(a, b, 12).map_err(|e| e.to_string())?;
        ensure(e == BoundaryEquality::Equal, || format!("{what}: {e:?}"))?;
        for w in &words {
            ensure(a.run(w) == b.run(w), || format!("{what}: outputs differ on {w:?}"))?;
        }
        Ok(())
    };
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_synchronous(2, 4, &mut rng);
        let g = random_synchronous(2, 4, &mut rng);
        let h = random_synchronous(2, 4, &mut rng);
        let c = |x: &Transducer, y: &Transducer| compose(x, y).map_err(|e| e.to_string());
        let inv = |x: &Transducer| x.inverse().map_err(|e| e.to_string());
        let fg = c(&f, &g)?;
        for w in &words {
            ensure(fg.run(w) == g.run(&f.run(w)), || format!("seed {seed}: composition on {w:?}"))?;
        }
        equal(&c(&fg, &h)?, &c(&f, &c(&g, &h)?)?, "associativity")?;
        equal(&c(&id, &f)?, &f, "left identity")?;
        equal(&c(&f, &id)?, &f, "right identity")?;
        equal(&c(&f, &inv(&f)?)?, &id, "right inverse")?;
        equal(&c(&inv(&f)?, &f)?, &id, "left inverse")?;
        equal(&inv(&fg)?, &c(&inv(&g)?, &inv(&f)?)?, "inverse of product")?;
        let m = fg.minimize().map_err(|e| e.to_string())?;
        equal(&m, &fg, "minimization")?;
        ensure(m.minimize().unwrap().state_count() == m.state_count(), || "minimize not idempotent".into())?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("100 machine triples in {elapsed:?}"))
}

/// Grigorchuk restrictions computed from the wreath recursion, elements
/// compared by their action on words of length 8.
fn grigorchuk_oracle() -> BTreeSet<Vec<Vec<u8>>> {
    fn rec(g: char) -> (bool, char, char) {
        match g {
            'a' => (true, 'e', 'e'),
            'b' => (false, 'a', 'c'),
            'c' => (false, 'a', 'd'),
            'd' => (false, 'e', 'b'),
            _ => (false, 'e', 'e'),
        }
    }
    fn act1(g: char, x: &[u8]) -> Vec<u8> {
        match x.split_first() {
            None => vec![],
            Some((&h, rest)) => {
                let (sw, r0, r1) = rec(g);
                let mut out = vec![if sw { 1 - h } else { h }];
                out.extend(act1(if h == 0 { r0 } else { r1 }, rest));
                out
            }
        }
    }
    fn act(word: &[char], x: &[u8]) -> Vec<u8> {
        word.iter().rev().fold(x.to_vec(), |cur, &g| act1(g, &cur))
    }
    fn restrict(word: &[char], x: u8) -> Vec<char> {
        let mut out = Vec::new();
        let mut cur = x;
        for &g in word.iter().rev() {
            let (sw, r0, r1) = rec(g);
            out.push(if cur == 0 { r0 } else { r1 });
            if sw {
                cur = 1 - cur;
            }
        }
        out.reverse();
        out.retain(|&c| c != 'e');
        out
    }
    let mut words: BTreeSet<Vec<char>> = BTreeSet::from([vec![]]);
    for _ in 0..4 {
        let mut next = words.clone();
        for w in &words {
            for l in ['a', 'b', 'c', 'd'] {
                let mut v = w.clone();
                v.push(l);
                next.insert(v);
            }
        }
        words = next;
    }
    let mut out = BTreeSet::new();
    for w in &words {
        let mut level = vec![w.clone()];
        for _ in 0..6 {
            level = level.iter().flat_map(|u| [restrict(u, 0), restrict(u, 1)]).collect();
        }
        for u in level {
            out.insert(all_words(2, 8).map(|x| act(&u, &x)).collect());
        }
    }
    out
}

fn c6_nucleus() -> Check {
    let start = Instant::now();
    let load = |f: &str| Transducer::all_states_from_json(&data(f)).map_err(|e| e.to_string());
    let NucleusResult::Nucleus(g) = nucleus(&load("grigorchuk.json")?, 64).map_err(|e| e.to_string())? else {
        return Err("Grigorchuk closure did not terminate".into());
    };
    ensure(g.len() == 5, || format!("Grigorchuk nucleus has {} machines", g.len()))?;
    let actions: BTreeSet<Vec<Vec<u8>>> = g
        .iter()
        .map(|m| all_words(2, 8).map(|x| m.run(&x)).collect())
        .collect();
    let oracle = grigorchuk_oracle();
    ensure(actions == oracle, || format!("oracle has {} elements", oracle.len()))?;
    let NucleusResult::Nucleus(o) = nucleus(&load("odometer.json")?, 64).map_err(|e| e.to_string())? else {
        return Err("odometer closure did not terminate".into());
    };
    ensure(o.len() == 3, || format!("odometer nucleus has {} machines", o.len()))?;
    let l = nucleus(&load("lamplighter.json")?, 64).map_err(|e| e.to_string())?;
    ensure(matches!(l, NucleusResult::BudgetExceeded { .. }), || "lamplighter closure terminated".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("5 / 3 / BudgetExceeded in {elapsed:?}"))
}

fn fields(t: &AtomTree) -> Vec<Vec<String>> {
    t.levels()
        .iter()
        .map(|l| l.iter().map(|a| a.field.encode()).collect())
        .collect()
}

fn c7_tree_of_atoms() -> Check {
    let start = Instant::now();
    let z = Presentation::from_json(&data("z.json")).unwrap();
    let f2 = Presentation::from_json(&data("f2.json")).unwrap();
    let err = |e: bhcore::Error| e.to_string();
    for n in 1..=5 {
        let t = build_tree(&z, n, 2 * n + 4).map_err(err)?;
        for (lvl, l) in t.levels().iter().enumerate().skip(1) {
            ensure(l.len() == 2, || format!("Z depth {n}: level {lvl} has {} nodes", l.len()))?;
        }
        let wider = build_tree(&z, n, 2 * n + 6).map_err(err)?;
        ensure(fields(&t) == fields(&wider), || format!("Z depth {n} changes with the horizon"))?;
    }
    for n in 1..=3u32 {
        let t = build_tree(&f2, n as usize, 10).map_err(err)?;
        let rays = t.rays().len();
        ensure(rays == 4 * 3usize.pow(n - 1), || format!("F2 depth {n}: {rays} rays"))?;
        let wider = build_tree(&f2, n as usize, 12).map_err(err)?;
        ensure(fields(&t) == fields(&wider), || format!("F2 depth {n} changes with the horizon"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("Z: 2 per level, F2: 4, 12, 36 rays, stable at +2, in {elapsed:?}"))
}

fn c8_kuznetsov() -> Check {
    let start = Instant::now();
    let p = Presentation::from_json(&data("c5.json")).unwrap();
    for k in 1..=12i64 {
        let w = Word::power(0, k);
        let a = kuznetsov_decide_with(&p, &w, 2000, Mode::Interleaved).map_err(|e| e.to_string())?;
        let b = kuznetsov_decide_with(&p, &w, 2000, Mode::TwoWorkers).map_err(|e| e.to_string())?;
        let expect = if k.rem_euclid(5) == 0 { Outcome::Identity } else { Outcome::NotIdentity };
        ensure(a.outcome == expect, || format!("x^{k}: {:?}", a.outcome))?;
        ensure(a.outcome == b.outcome && a.steps == b.steps, || format!("x^{k}: modes disagree"))?;
        match &a.certificate {
            Certificate::Identity(fs) => {
                ensure(replay(fs, &a.relators) == w, || format!("x^{k}: bad certificate"))?
            }
            Certificate::NotIdentity(ds) => {
                for d in ds {
                    ensure(replay(&d.factors, &a.relators) == Word::letter(d.found), || {
                        format!("x^{k}: bad generator derivation")
                    })?;
                }
            }
            Certificate::None => return Err(format!("x^{k}: no certificate")),
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("x^1..x^12 match C5, both modes, in {elapsed:?}"))
}

/// Complete binary antichains with `n` leaves, in lexicographic order.
fn trees(n: usize) -> Vec<Vec<Vec<u8>>> {
    if n == 1 {
        return vec![vec![vec![]]];
    }
    let mut out = Vec::new();
    for k in 1..n {
        for l in trees(k) {
            for r in trees(n - k) {
                let mut t: Vec<Vec<u8>> = l.iter().map(|p| [&[0u8][..], p].concat()).collect();
                t.extend(r.iter().map(|p| [&[1u8][..], p].concat()));
                out.push(t);
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn check_against_oracle(f: &PrefixMap, g: &PrefixMap, words: &[Vec<u8>]) -> Result<(), String> {
    let composed = compose_prefix_maps(f, g).map_err(|e| e.to_string())?;
    let (tf, tg) = (prefix_map_to_transducer(f), prefix_map_to_transducer(g));
    let oracle = compose(&tf, &tg).map_err(|e| e.to_string())?;
    let inv = invert_prefix_map(f);
    let tinv = prefix_map_to_transducer(&inv);
    for w in words {
        let by_machine = oracle.run(w);
        match composed.apply(w) {
            Some(x) => ensure(x == by_machine, || format!("composition differs on {w:?}"))?,
            None => ensure(w.is_empty(), || format!("composition undefined on {w:?}"))?,
        }
        let back = tinv.run(&tf.run(w));
        ensure(w.starts_with(&back) || back.starts_with(w), || format!("inverse conflicts on {w:?}"))?;
        if let Some(x) = f.apply(w).and_then(|y| inv.apply(&y)) {
            ensure(&x == w, || format!("inverse fails on {w:?}"))?;
        }
    }
    ensure(
        compose_prefix_maps(f, &inv).unwrap() == PrefixMap::identity(2),
        || "f then f^-1 is not the identity".into(),
    )
}

fn c9_prefix_maps() -> Check {
    let start = Instant::now();
    let words: Vec<Vec<u8>> = all_words(2, 12).collect();
    let sample = PrefixMap::from_json(&data("sample_map.json")).map_err(|e| e.to_string())?;
    check_against_oracle(&sample, &sample, &words)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..200 {
        let f = random_prefix_map(2, 8, &mut rng);
        let g = random_prefix_map(2, 8, &mut rng);
        check_against_oracle(&f, &g, &words).map_err(|e| format!("map #{i}: {e}"))?;
    }
    // Canonical forms. Every domain prefix of a map with at most 6 pairs has
    // length at most 5, so the images of all length-6 words determine the
    // homeomorphism. Each canonical form must induce the same map as its
    // source and be reduced; no two distinct reduced maps may induce the same
    // map. Reduced maps are bucketed by a hash of their expansion and every
    // bucket is then compared exactly.
    let small: Vec<(Vec<Vec<Vec<u8>>>, Vec<Vec<usize>>)> = (1..=6).map(|n| (trees(n), permutations(n))).collect();
    let build = |n: usize, d: usize, r: usize, q: usize| {
        let (ts, perms) = &small[n - 1];
        let pairs = ts[d].iter().cloned().zip(perms[q].iter().map(|&j| ts[r][j].clone())).collect();
        PrefixMap::new(2, pairs).expect("complete antichains")
    };
    let mut reduced: Vec<(u64, [usize; 4])> = Vec::new();
    let mut total = 0usize;
    for n in 1..=6 {
        let (ts, perms) = &small[n - 1];
        for d in 0..ts.len() {
            for r in 0..ts.len() {
                for q in 0..perms.len() {
                    let f = build(n, d, r, q);
                    let canon = f.canonical();
                    let key = f.expand(6);
                    total += 1;
                    ensure(canon.expand(6) == key, || format!("canonical form of {f:?} changes the map"))?;
                    ensure(canon.canonical() == canon, || format!("canonical form of {f:?} not reduced"))?;
                    let mut sorted = f.pairs().to_vec();
                    sorted.sort();
                    if canon.pairs() == sorted.as_slice() {
                        let mut h = DefaultHasher::new();
                        key.hash(&mut h);
                        reduced.push((h.finish(), [n, d, r, q]));
                    }
                }
            }
        }
    }
    reduced.sort_unstable();
    let reduced_count = reduced.len();
    for bucket in reduced.chunk_by(|x, y| x.0 == y.0).filter(|b| b.len() > 1) {
        let maps: Vec<PrefixMap> = bucket.iter().map(|(_, [n, d, r, q])| build(*n, *d, *r, *q)).collect();
        for i in 0..maps.len() {
            for j in i + 1..maps.len() {
                ensure(maps[i].expand(6) != maps[j].expand(6), || {
                    format!("{:?} and {:?} are both reduced and equal", maps[i], maps[j])
                })?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "sample map + 200 random pairs; {total} maps with at most 6 pairs, {reduced_count} reduced, in {elapsed:?}"
    ))
}

fn pass_rate(length: usize, samples: u64) -> Result<f64, String> {
    let sixth = Rational::new(1, 6);
    let mut pass = 0;
    for seed in 0..samples {
        let p = random_presentation(2, 1, length, seed).map_err(|e| e.to_string())?;
        if check_dehn_condition(&p, sixth).map_err(|e| e.to_string())?.passes {
            pass += 1;
        }
    }
    Ok(pass as f64 / samples as f64)
}

fn c10_random_model() -> Check {
    let start = Instant::now();
    let rates: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&l| pass_rate(l, 500))
        .collect::<Result<_, _>>()?;
    ensure(rates[2] >= 0.95, || format!("length 200 pass rate {}", rates[2]))?;
    ensure(rates.windows(2).all(|w| w[0] <= w[1]), || format!("rates not monotone: {rates:?}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "C'(1/6) pass rates {:.3} / {:.3} / {:.3} at lengths 50 / 100 / 200, in {elapsed:?}",
        rates[0], rates[1], rates[2]
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("worked Dehn example", c1_worked_example),
        ("genus-2 overlap ratio", c2_overlap_ratio),
        ("Dehn soundness", c3_dehn_soundness),
        ("sample transducer", c4_sample_transducer),
        ("transducer algebra", c5_transducer_algebra),
        ("nucleus", c6_nucleus),
        ("tree of atoms", c7_tree_of_atoms),
        ("Kuznetsov on C5", c8_kuznetsov),
        ("prefix maps", c9_prefix_maps),
        ("random model", c10_random_model),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
