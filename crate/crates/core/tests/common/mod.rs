#![allow(dead_code)]

use branchkit::construction::GammaSpec;
use branchkit::scenario::Scenario;
use branchkit::treeaut::TreeAut;
use branchkit::Permutation;
use rand::Rng;

pub fn reference() -> GammaSpec {
    Scenario::reference().spec
}

pub fn cyc(s: &str) -> Permutation {
    Permutation::parse_cycles(s, 5).unwrap()
}

/// Product of generators of `Γ.σ^level` and their inverses, chosen by `picks`.
pub fn word_at(spec: &GammaSpec, level: usize, picks: &[(usize, bool)]) -> TreeAut {
    let rooted: Vec<TreeAut> = spec
        .level_group(level)
        .generators()
        .iter()
        .map(|p| TreeAut::rooted(spec.frame(), level, p.clone()).unwrap())
        .collect();
    let spinal: Vec<TreeAut> = spec
        .group()
        .generators()
        .iter()
        .map(|g| spec.spinal_at(level, g))
        .collect();
    let pool: Vec<&TreeAut> = rooted.iter().chain(spinal.iter()).collect();
    let mut out = TreeAut::identity(spec.frame(), level);
    for &(i, inv) in picks {
        let g = pool[i % pool.len()];
        let g = if inv { g.inverse() } else { g.clone() };
        out = out.multiply(&g).unwrap();
    }
    out
}

pub fn random_word<R: Rng>(spec: &GammaSpec, rng: &mut R, max_len: usize) -> TreeAut {
    let len = rng.gen_range(1..=max_len);
    let picks: Vec<(usize, bool)> = (0..len).map(|_| (rng.gen_range(0..64), rng.gen_bool(0.5))).collect();
    word_at(spec, 0, &picks)
}
