//! Acceptance criteria 1–11, one line per criterion.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use branchkit::construction::{delta, is_proper_delta, GammaSpec, Membership};
use branchkit::permgroup::{non_normal_maximal, normalizer, tau_action};
use branchkit::scenario::{catalog_group, Scenario, ScenarioDoc};
use branchkit::tree::Vertex;
use branchkit::treeaut::TreeAut;
use branchkit::verify::{
    admissible_conjugators, layer_action, spinal_product_components, verify_fin_in_gamma, verify_injectivity,
    verify_layered_witness, verify_rist_witness, verify_spherical, wreath_order, VerifyConfig, Walkthrough,
};
use branchkit::{Limits, Permutation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn reference() -> Scenario {
    let text = std::fs::read_to_string(scenario_path("a5_diagonal.json")).unwrap();
    Scenario::load(&text, Limits::default()).unwrap()
}

fn limits() -> Limits {
    Limits::default()
}

fn criterion_1() -> Outcome {
    let mut degrees = Vec::new();
    for name in ["A5", "A6", "PSL27"] {
        let start = Instant::now();
        let g = ok(catalog_group(name))?;
        let tau = ok(tau_action(&g, limits()))?;
        let image = ok(tau.image_group())?;
        ensure(start.elapsed() < Duration::from_secs(5), format!("{name} took {:?}", start.elapsed()))?;
        ensure(tau.is_faithful() && image.order() == g.order(), format!("{name}: not faithful"))?;
        ensure(ok(tau.is_transitive())? && !ok(tau.is_regular())?, format!("{name}: not transitive non-regular"))?;
        ensure(tau.point_count() >= 5, format!("{name}: degree {}", tau.point_count()))?;
        degrees.push(format!("{name}:{}", tau.point_count()));
    }
    ensure(degrees[0] == "A5:5", "A5 action is not of degree 5")?;
    Ok(degrees.join(" "))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let rep = reference().spec.rep().clone();
    ok(rep.check_subdirect())?;
    ok(rep.check_infinitary())?;
    ensure(rep.tail_kernel().len() == 1, "tail kernel is not trivial")?;
    let seeded = std::fs::read_to_string(scenario_path("a5_not_subdirect.json")).unwrap();
    let bad = ok(ok(ScenarioDoc::parse(&seeded))?.representation(limits()))?;
    ensure(bad.check_subdirect().is_err(), "seeded non-subdirect map accepted")?;
    ensure(Scenario::load(&seeded, limits()).is_err(), "seeded scenario loads")?;
    ensure(start.elapsed() < Duration::from_secs(1), format!("took {:?}", start.elapsed()))?;
    Ok("diagonal accepted, seeded map rejected".into())
}

fn criterion_3() -> Outcome {
    let spec = reference().spec;
    let report = ok(verify_spherical(&spec, 4, &VerifyConfig::default()))?;
    let sizes: Vec<u64> = report.checks.iter().map(|c| c.certificate["orbit_size"].as_u64().unwrap()).collect();
    ensure(report.passed(), "suite failed")?;
    ensure(sizes == [5, 25, 125, 625], format!("orbit sizes {sizes:?}"))?;
    Ok(format!("orbits {sizes:?}"))
}

fn criterion_4() -> Outcome {
    let spec = reference().spec;
    let report = ok(verify_fin_in_gamma(&spec, 2, &VerifyConfig::default()))?;
    ensure(report.passed(), "suite failed")?;
    let q1 = ok(ok(layer_action(&spec, &spec.generators(), 1))?.exact_order())?;
    let q2 = ok(layer_action(&spec, &spec.generators(), 2))?;
    let o2 = ok(q2.exact_order())?;
    ensure(q1 == 60, format!("|Γ mod St(1)| = {q1}"))?;
    ensure(q2.degree() == 25, "level-2 action not on 25 points")?;
    ensure(o2 == 46_656_000_000 && o2 == 60u128.pow(6), format!("|Γ mod St(2)| = {o2}"))?;
    ensure(wreath_order(&spec, 2) == Some(o2), "wreath order differs")?;
    Ok(format!("orders {q1}, {o2}"))
}

fn criterion_5() -> Outcome {
    let spec = reference().spec;
    let ss = ok(admissible_conjugators(&spec))?;
    let u1 = spec.ray().step(0);
    let x1 = spec.spinal().step(0);
    let brute: Vec<Permutation> = ok(spec.level_group(0).group.elements(limits()))?
        .into_iter()
        .filter(|s| s.image(x1) == x1 && s.image(u1) != u1)
        .collect();
    ensure(ss == brute && !ss.is_empty(), "admissible set differs")?;
    let report = ok(verify_rist_witness(&spec, 4))?;
    ensure(report.passed(), format!("{} failures", report.failures().count()))?;
    ensure(report.checks.len() == 1 + 3 * 4 * ss.len(), format!("{} checks", report.checks.len()))?;
    Ok(format!("4 pairs × {} conjugators, {} checks", ss.len(), report.checks.len()))
}

fn criterion_6() -> Outcome {
    let spec = reference().spec;
    let report = ok(verify_layered_witness(&spec, 3, 4))?;
    ensure(report.passed(), "suite failed")?;
    ensure(report.checks.len() == 2 * 4, format!("{} checks", report.checks.len()))?;
    Ok(format!("{} checks", report.checks.len()))
}

fn criterion_7() -> Outcome {
    let spec = reference().spec;
    let elements = ok(spec.group().elements(limits()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let g = &elements[rng.gen_range(0..elements.len())];
        let h = &elements[rng.gen_range(0..elements.len())];
        ensure(ok(spinal_product_components(&spec, g, h))?, format!("s_{g} s_{h} ≠ s_(gh)"))?;
    }
    Ok("20 pairs".into())
}

fn ceil_log2(n: usize) -> usize {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
}

fn random_gamma_word(spec: &GammaSpec, rng: &mut ChaCha8Rng) -> TreeAut {
    let gens = spec.generators();
    let len = rng.gen_range(1..=12);
    let mut w = TreeAut::identity(spec.frame(), 0);
    for _ in 0..len {
        let g = &gens[rng.gen_range(0..gens.len())];
        let g = if rng.gen_bool(0.5) { g.inverse() } else { g.clone() };
        w = w.multiply(&g).unwrap();
    }
    w
}

fn criterion_8() -> Outcome {
    let spec = reference().spec;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut deepest = 0;
    for _ in 0..100 {
        let w = random_gamma_word(&spec, &mut rng);
        let bound = ceil_log2(w.len() + 1) + w.settling_depth();
        let c = ok(spec.classify(&w))?;
        ensure(c.depth <= bound, format!("k = {} exceeds bound {bound}", c.depth))?;
        deepest = deepest.max(c.depth);
    }
    let rooted = ok(spec.level_group(0).group.elements(limits()))?;
    let elements = ok(spec.group().elements(limits()))?;
    for m in 1..=12 {
        for _ in 0..10 {
            let mut w = TreeAut::rooted(spec.frame(), 0, rooted[rng.gen_range(0..rooted.len())].clone()).unwrap();
            for _ in 0..m {
                let g = &elements[rng.gen_range(1..elements.len())];
                let a = &rooted[rng.gen_range(1..rooted.len())];
                w = w.multiply(&spec.spinal_at(0, g)).unwrap();
                w = w.multiply(&TreeAut::rooted(spec.frame(), 0, a.clone()).unwrap()).unwrap();
            }
            for x in 0..spec.frame().arity(0) {
                let count = ok(w.section(&Vertex::root().child(x)))?.spinal_factor_count();
                ensure(count <= (m + 2) / 2, format!("m = {m}: section with {count} spinal factors"))?;
            }
        }
    }
    Ok(format!("100 words, deepest k = {deepest}; halving for m ≤ 12"))
}

/// Every subgroup of a group with at most 64 elements, as element bitsets:
/// cyclic subgroups closed under joins.
fn lattice_oracle(elements: &[Permutation]) -> BTreeSet<u64> {
    let index = |p: &Permutation| elements.iter().position(|q| q == p).unwrap();
    let table: Vec<Vec<usize>> = elements.iter().map(|a| elements.iter().map(|b| index(&a.then(b))).collect()).collect();
    let close = |mut set: u64| loop {
        let members: Vec<usize> = (0..elements.len()).filter(|i| set >> i & 1 == 1).collect();
        let mut next = set;
        for &i in &members {
            for &j in &members {
                next |= 1 << table[i][j];
            }
        }
        if next == set {
            return set;
        }
        set = next;
    };
    let mut all: BTreeSet<u64> = (0..elements.len()).map(|i| close(1 << i)).collect();
    loop {
        let list: Vec<u64> = all.iter().copied().collect();
        let before = all.len();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                all.insert(close(a | b));
            }
        }
        if all.len() == before {
            return all;
        }
    }
}

fn criterion_9() -> Outcome {
    let s = reference();
    let spec = &s.spec;
    let g = spec.group();
    let elements = ok(g.elements(limits()))?;
    ensure(elements.len() <= 64, "group too large for the oracle")?;
    let full = (1u64 << elements.len()) - 1;
    let lattice = lattice_oracle(&elements);
    let bits = |m: &branchkit::PermutationGroup| -> u64 {
        m.elements(limits()).unwrap().iter().map(|p| 1u64 << elements.iter().position(|q| q == p).unwrap()).sum()
    };
    let maximal: Vec<u64> = lattice
        .iter()
        .copied()
        .filter(|&h| h != full && !lattice.iter().any(|&k| k != full && k != h && k & h == h))
        .collect();
    let conj = |h: u64, x: &Permutation| -> u64 {
        (0..elements.len())
            .filter(|i| h >> i & 1 == 1)
            .map(|i| 1u64 << elements.iter().position(|q| *q == elements[i].conjugate_by(x)).unwrap())
            .sum()
    };
    let oracle: BTreeSet<u64> = maximal.into_iter().filter(|&h| elements.iter().any(|x| conj(h, x) != h)).collect();
    let maxes = ok(non_normal_maximal(g, limits()))?;
    let found: BTreeSet<u64> = maxes.iter().map(bits).collect();
    ensure(found.len() == maxes.len() && found == oracle, "Max(A5) differs from the lattice oracle")?;
    let mut orders: Vec<u128> = maxes.iter().map(|m| m.order()).collect();
    orders.sort();
    let count = |o| orders.iter().filter(|&&x| x == o).count();
    ensure(maxes.len() == 21 && count(12) == 5 && count(10) == 6 && count(6) == 10, format!("orders {orders:?}"))?;
    for m in &maxes {
        ensure(ok(is_proper_delta(spec, m))?.proper, "Δ(M) not proper")?;
    }
    let report = ok(verify_injectivity(spec))?;
    let pairs = &report.checks[1..];
    ensure(report.passed() && pairs.len() == 21 * 20, format!("{} pair checks", pairs.len()))?;
    ensure(pairs.iter().all(|c| c.certificate.get("vertex").is_some()), "certificate missing")?;
    let deltas: Vec<_> = maxes.iter().map(|m| delta(spec, m).unwrap()).collect();
    for (i, mi) in maxes.iter().enumerate() {
        for (j, mj) in maxes.iter().enumerate().filter(|(j, _)| *j != i) {
            let m = ok(mi.elements(limits()))?.into_iter().find(|x| !mj.contains(x).unwrap()).unwrap();
            let w = spec.spinal_at(0, &m);
            match ok(deltas[j].member(&w))? {
                Membership::No(cert) => ensure(ok(cert.verify(&deltas[j], &w))?, "certificate does not verify")?,
                _ => return Err(format!("s_{m} ∈ Δ(M{j})")),
            }
        }
    }
    Ok(format!("{} subgroups of {} in the lattice, 420 No certificates", maxes.len(), lattice.len()))
}

fn criterion_10() -> Outcome {
    let spec = reference().spec;
    let g = spec.group();
    let elements = ok(g.elements(limits()))?;
    let maxes = ok(non_normal_maximal(g, limits()))?;
    let mut pairs = 0;
    for m in &maxes {
        ensure(ok(normalizer(g, m, limits()))?.order() == m.order(), "M is not self-normalising")?;
        let walk = ok(Walkthrough::new(&spec, m))?;
        for w in elements.iter().filter(|w| !m.contains(w).unwrap()) {
            let report = ok(walk.run(&spec.spinal_at(0, w), 4))?;
            let steps: BTreeSet<char> = report.checks.iter().filter_map(|c| c.description.chars().nth(1)).collect();
            ensure(report.passed(), format!("walkthrough failed for w = {w}"))?;
            ensure(steps == BTreeSet::from(['1', '2', '3', '4', '5']), format!("steps {steps:?}"))?;
            let step = |p: &str| report.checks.iter().find(|c| c.description.starts_with(p)).unwrap();
            let norm: u128 = step("(2)").certificate["normalizer_order"].as_str().unwrap().parse().unwrap();
            let gen: u128 = step("(5a)").certificate["order"].as_str().unwrap().parse().unwrap();
            ensure(norm == m.order() && gen == 60, "certificate orders differ")?;
            pairs += 1;
        }
    }
    ensure(pairs == 5 * 48 + 6 * 50 + 10 * 54, format!("{pairs} pairs"))?;
    Ok(format!("{pairs} (M, w) pairs"))
}

fn criterion_11() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_branchkit");
    let scenario = scenario_path("a5_diagonal.json");
    let s = scenario.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["tau", "A5"],
        vec!["check-rep", s],
        vec!["build", s],
        vec!["portrait", s, "sG1 r2", "--depth", "3"],
        vec!["act", s, "sG1", "1.0"],
        vec!["section", s, "sG1 r1 sG2^-1", "0", "--depth", "2"],
        vec!["classify", s, "r1 sG1 r2 sG2 r1^-1 sG1"],
        vec!["member", s, "sG1 r2 sG2"],
        vec!["quotient", s, "--level", "2"],
        vec!["max", "A5"],
        vec!["verify", s, "--suite", "all"],
    ];
    for args in &commands {
        let run = || Command::new(bin).arg("--json").args(args).output().unwrap();
        let (a, b) = (run(), run());
        ensure(a.status.success(), format!("{} exited with {}", args[0], a.status))?;
        ensure(a.stdout == b.stdout && !a.stdout.is_empty(), format!("{} output differs", args[0]))?;
        ok(serde_json::from_slice::<Value>(&a.stdout))?;
    }
    Ok(format!("{} commands", commands.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("tau-finder", criterion_1, 15),
        ("residual representation checks", criterion_2, 1),
        ("spherical transitivity", criterion_3, 30),
        ("Fin at truncation", criterion_4, 60),
        ("rigid-stabiliser witness", criterion_5, 30),
        ("layered witness", criterion_6, 10),
        ("spinal product law", criterion_7, 5),
        ("contraction", criterion_8, 60),
        ("properness and injectivity", criterion_9, 120),
        ("maximality walkthrough", criterion_10, 120),
        ("determinism", criterion_11, 600),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|d| {
            if elapsed <= Duration::from_secs(*limit) {
                Ok(d)
            } else {
                Err(format!("{d}; exceeded {limit} s"))
            }
        });
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(e) => {
                failed += 1;
                ("FAIL", e)
            }
        };
        println!("criterion {:>2} {status} {name}: {detail} ({:.2} s)", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
