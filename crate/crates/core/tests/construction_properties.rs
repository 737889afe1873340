mod common;

use branchkit::construction::{delta, is_proper_delta, reindex_infinitary, Membership, SectionKind};
use branchkit::permgroup::subgroups_2gen;
use branchkit::scenario::{Scenario, ScenarioDoc};
use branchkit::tree::Vertex;
use branchkit::treeaut::{FinitaryLabels, TreeAut};
use branchkit::verify::{layer_action, wreath_order};
use branchkit::{Limits, Permutation};
use common::{random_word, reference};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario_text(name: &str) -> String {
    let path = format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn random_labels<R: Rng>(spec: &branchkit::construction::GammaSpec, rng: &mut R, level: usize, depth: usize) -> FinitaryLabels {
    let mut labels = Vec::new();
    for n in 0..depth {
        let gens = spec.level_group(level + n).group.elements(Limits::default()).unwrap();
        for v in spec.valency().layer(level, n) {
            labels.push((v, gens[rng.gen_range(0..gens.len())].clone()));
        }
    }
    FinitaryLabels::new(labels)
}

fn finitary_at(spec: &branchkit::construction::GammaSpec, level: usize, labels: FinitaryLabels) -> TreeAut {
    if labels.is_empty() {
        TreeAut::identity(spec.frame(), level)
    } else {
        TreeAut::finitary(spec.frame(), level, labels).unwrap()
    }
}

#[test]
fn finitary_quotients_are_iterated_wreath_products() {
    let spec = reference();
    let q1 = layer_action(&spec, &spec.fin_generators(1), 1).unwrap();
    let q2 = layer_action(&spec, &spec.fin_generators(2), 2).unwrap();
    assert_eq!(q1.exact_order().unwrap(), 60);
    assert_eq!(q2.degree(), 25);
    assert_eq!(q2.exact_order().unwrap(), 60u128.pow(6));
    assert_eq!(wreath_order(&spec, 2), Some(60u128.pow(6)));
}

#[test]
fn delta_of_whole_group_has_gamma_quotients() {
    let spec = reference();
    let d = delta(&spec, spec.group()).unwrap();
    for n in 1..=3 {
        let a = layer_action(&spec, &d.generators(n), n).unwrap();
        let b = layer_action(&spec, &spec.generators(), n).unwrap();
        assert!(a.contains_group(&b) && b.contains_group(&a), "level {n}");
        if n <= 2 {
            assert_eq!(a.exact_order().unwrap(), b.exact_order().unwrap());
        }
    }
}

#[test]
fn normal_form_reconstructs_the_word() {
    let spec = reference();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let w = random_word(&spec, &mut rng, 12);
        let c = spec.classify(&w).unwrap();
        let k = c.depth;
        let mut rebuilt = TreeAut::identity(spec.frame(), 0);
        for (v, kind) in &c.sections {
            let level = v.len();
            let fin = finitary_at(&spec, level, kind.finitary_part().clone());
            let section = match kind {
                SectionKind::Spinal { component, .. } => spec.spinal_at(level, component).multiply(&fin).unwrap(),
                SectionKind::Finitary(_) => fin,
            };
            rebuilt = rebuilt.multiply(&TreeAut::insert(v, &section).unwrap()).unwrap();
        }
        let top: Vec<(Vertex, Permutation)> = w
            .portrait(k)
            .labels
            .into_iter()
            .filter(|(_, p)| !p.is_identity())
            .collect();
        let rebuilt = rebuilt.multiply(&finitary_at(&spec, 0, FinitaryLabels::new(top))).unwrap();
        assert!(w.equal_to_depth(&rebuilt, k + 4).unwrap());
        assert!(spec.exact_equal(&w, &rebuilt).unwrap());
    }
}

#[test]
fn finitary_conjugates_of_spinal_elements_stay_in_normal_form() {
    let spec = reference();
    let elements = spec.group().elements(Limits::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let g = &elements[rng.gen_range(1..elements.len())];
        let n = rng.gen_range(1..=2);
        let a = finitary_at(&spec, 0, random_labels(&spec, &mut rng, 0, n));
        let b = spec.spinal_at(0, g).conjugate(&a).unwrap();
        let c = spec.classify_at(&b, n).unwrap();
        let comps: Vec<_> = c.spinal_components().collect();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].0, &a.act(&spec.spine_vertex(n)).unwrap());
        assert_eq!(comps[0].1, g);
    }
}

#[test]
fn membership_is_deterministic_and_certified() {
    let s = Scenario::reference();
    let spec = &s.spec;
    let h = s.subgroup.clone().unwrap();
    let d = delta(spec, &h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..40 {
        let w = random_word(spec, &mut rng, 8);
        let first = d.member(&w).unwrap();
        assert_eq!(first.to_json(), d.member(&w.clone()).unwrap().to_json());
        match first {
            Membership::Yes(word) => {
                yes += 1;
                assert!(spec.exact_equal(&d.evaluate(&word, None).unwrap(), &w).unwrap());
            }
            Membership::No(cert) => {
                no += 1;
                assert!(cert.verify(&d, &w).unwrap());
            }
            Membership::Unknown(why) => panic!("unknown: {why}"),
        }
    }
    assert!(yes > 0 && no > 0);
}

#[test]
fn properness_agrees_with_orders() {
    let spec = reference();
    for h in subgroups_2gen(spec.group(), Limits::default()).unwrap() {
        let p = is_proper_delta(&spec, &h).unwrap();
        assert_eq!(p.proper, h.order() < 60, "order {}", h.order());
        if let Some(w) = p.witness {
            assert!(!h.contains(&w).unwrap() && spec.group().contains(&w).unwrap());
        }
    }
}

#[test]
fn nuclear_windows_commute_with_shift() {
    let s = Scenario::load(&scenario_text("psl27_diagonal.json"), Limits::default()).unwrap();
    let spec = &s.spec;
    let shifted = spec.shift(1).unwrap();
    assert!(shifted.ray().0.is_purely_periodic());
    assert!(shifted.spinal().0.is_purely_periodic());
    let a = spec.nuclear_window(1, 4);
    let b = shifted.nuclear_window(0, 4);
    for (x, y) in a.levels.iter().zip(&b.levels) {
        assert_eq!(x.level, y.level + 1);
        assert_eq!((x.order, x.label_order), (y.order, y.label_order));
    }
}

#[test]
fn reindexing_makes_a_representation_infinitary() {
    let doc = ScenarioDoc::parse(&scenario_text("a5xa5_not_infinitary.json")).unwrap();
    let rep = doc.representation(Limits::default()).unwrap();
    let elements = rep.group().elements(Limits::default()).unwrap();
    assert_eq!(elements.len(), 3600);
    let tail_kernel = |r: &branchkit::construction::ResidualRep| {
        elements
            .iter()
            .filter(|g| r.components().period.iter().all(|c| c.projection.apply(g).unwrap().is_identity()))
            .count()
    };
    assert_eq!(tail_kernel(&rep), 60);
    assert_eq!(rep.tail_kernel().len(), 60);
    assert!(rep.check_infinitary().is_err());
    let fixed = reindex_infinitary(&rep).unwrap();
    assert_eq!(tail_kernel(&fixed), 1);
    assert!(fixed.validate().is_ok());
}
