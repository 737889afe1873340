//! The spinal group `Γ = ⟨S₀ ∪ G⟩` built from a residual representation of a
//! finite perfect group `G`, the subgroups `Δ(H) = ⟨Fin ∪ H⟩`, the contraction
//! normal form, and a three-valued membership oracle for `Δ(H)`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::permgroup::{GeneratorWords, Homomorphism, Limits, PermutationGroup, TauAction};
use crate::tree::{
    joint_horizon, ray_vertex, validate_spinal_data, EventuallyPeriodic, Ray, SpinalSequence, ValencySequence,
    Vertex,
};
use crate::treeaut::{FinitaryLabels, Generator, Spine, TreeAut, TreeFrame};

/// Transitive non-regular faithful action used for the alphabet of a level:
/// the given permutation representation when it already qualifies, otherwise
/// the coset action found by [`crate::permgroup::tau_action`].
pub fn preferred_tau(group: &PermutationGroup, limits: Limits) -> Result<TauAction> {
    if group.is_transitive() && !group.is_regular() && group.degree() > 1 {
        return TauAction::natural(group, limits);
    }
    crate::permgroup::tau_action(group, limits)
}

/// One component `π_n : G → S_n` together with the action of `S_n` on `X_{n+1}`.
#[derive(Debug, Clone)]
pub struct Component {
    pub target: PermutationGroup,
    pub tau: Arc<TauAction>,
    pub projection: Arc<Homomorphism>,
    /// `τ ∘ π_n`, the labels spinal elements carry at level `n`.
    pub action: Arc<Homomorphism>,
}

impl Component {
    pub fn new(group: &PermutationGroup, target: PermutationGroup, tau: TauAction, images: Vec<Permutation>, limits: Limits) -> Result<Self> {
        for p in &images {
            if p.degree() != target.degree() {
                return Err(Error::DegreeMismatch(target.degree(), p.degree()));
            }
            if !target.contains(p)? {
                return Err(Error::NotHomomorphism(format!("image {p} lies outside the target group")));
            }
        }
        let projection = Homomorphism::new(group, images, limits)?;
        let action_images = projection
            .images()
            .iter()
            .map(|p| tau.apply(p).cloned().ok_or_else(|| Error::NotHomomorphism(format!("{p} outside the domain of τ"))))
            .collect::<Result<Vec<_>>>()?;
        let action = Homomorphism::new(group, action_images, limits)?;
        Ok(Component {
            target,
            tau: Arc::new(tau),
            projection: Arc::new(projection),
            action: Arc::new(action),
        })
    }

    fn describe(&self) -> Value {
        json!({
            "target": self.target.generators().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "target_degree": self.target.degree(),
            "tau": self.tau.images().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "images": self.projection.images().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// A representation `G → ∏_{n ≥ 1} S_n` with eventually periodic components;
/// `components.term(i)` is `π_{i+1}`.
#[derive(Debug, Clone)]
pub struct ResidualRep {
    group: PermutationGroup,
    components: EventuallyPeriodic<Component>,
    limits: Limits,
}

/// The diagonal representation `g ↦ (g, g, …)` into constant copies of `G`.
pub fn make_diagonal_rep(group: &PermutationGroup, limits: Limits) -> Result<ResidualRep> {
    if group.is_trivial() {
        return Err(Error::Trivial("G".into()));
    }
    if !group.is_perfect()? {
        return Err(Error::NotPerfect("G".into()));
    }
    let tau = preferred_tau(group, limits)?;
    let comp = Component::new(group, group.clone(), tau, group.generators().to_vec(), limits)?;
    Ok(ResidualRep {
        group: group.clone(),
        components: EventuallyPeriodic::constant(comp),
        limits,
    })
}

/// Folds the prefix into the period so that every component recurs
/// infinitely often; the result must pass the infinitary check.
pub fn reindex_infinitary(rep: &ResidualRep) -> Result<ResidualRep> {
    let mut period = rep.components.prefix.clone();
    period.extend(rep.components.period.iter().cloned());
    let out = ResidualRep {
        group: rep.group.clone(),
        components: EventuallyPeriodic::new(Vec::new(), period)?,
        limits: rep.limits,
    };
    out.check_subdirect()?;
    out.check_infinitary()?;
    Ok(out)
}

impl ResidualRep {
    pub fn new(group: &PermutationGroup, components: EventuallyPeriodic<Component>, limits: Limits) -> Result<Self> {
        if group.is_trivial() {
            return Err(Error::Trivial("G".into()));
        }
        Ok(ResidualRep {
            group: group.clone(),
            components,
            limits,
        })
    }

    pub fn group(&self) -> &PermutationGroup {
        &self.group
    }

    pub fn components(&self) -> &EventuallyPeriodic<Component> {
        &self.components
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    /// `π_n` for `n ≥ 1`.
    pub fn component(&self, n: usize) -> &Component {
        assert!(n >= 1, "components are indexed from 1");
        self.components.term(n - 1)
    }

    /// Representation of `G.σᵐ`: the components `π_{m+1}, π_{m+2}, …`.
    pub fn shift(&self, m: usize) -> ResidualRep {
        ResidualRep {
            group: self.group.clone(),
            components: self.components.shift(m),
            limits: self.limits,
        }
    }

    /// Every component surjects onto its target.
    pub fn check_subdirect(&self) -> Result<()> {
        for (i, c) in self.components.window() {
            let image = c.projection.image_group()?;
            if image.order() != c.target.order() {
                return Err(Error::NotSubdirect {
                    level: i + 1,
                    image: image.order(),
                    target: c.target.order(),
                });
            }
        }
        Ok(())
    }

    /// `⋂ ker π_n` over one full period, which is the tail kernel for every start.
    pub fn tail_kernel(&self) -> Vec<Permutation> {
        let mut kernel: Option<HashSet<Permutation>> = None;
        for c in &self.components.period {
            let k: HashSet<Permutation> = c.projection.kernel().into_iter().collect();
            kernel = Some(match kernel {
                None => k,
                Some(acc) => acc.intersection(&k).cloned().collect(),
            });
        }
        let mut out: Vec<Permutation> = kernel.unwrap_or_default().into_iter().collect();
        out.sort();
        out
    }

    pub fn check_infinitary(&self) -> Result<()> {
        let k = self.tail_kernel().len();
        if k > 1 {
            return Err(Error::NotInfinitary(k as u128));
        }
        Ok(())
    }

    pub fn check_perfect_levels(&self) -> Result<()> {
        for (i, c) in self.components.window() {
            if c.target.is_trivial() {
                return Err(Error::Trivial(format!("S_{}", i + 1)));
            }
            if !c.target.is_perfect()? {
                return Err(Error::NotPerfect(format!("S_{}", i + 1)));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.group.is_perfect()? {
            return Err(Error::NotPerfect("G".into()));
        }
        self.check_perfect_levels()?;
        self.check_subdirect()?;
        self.check_infinitary()
    }

    fn describe(&self) -> Value {
        json!({
            "G": self.group.generators().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "G_degree": self.group.degree(),
            "prefix": self.components.prefix.iter().map(Component::describe).collect::<Vec<_>>(),
            "period": self.components.period.iter().map(Component::describe).collect::<Vec<_>>(),
        })
    }
}

/// The label group `τ(S_n)` acting on `X_{n+1}`, with words for its elements.
#[derive(Debug)]
pub struct LevelGroup {
    pub group: PermutationGroup,
    words: GeneratorWords,
}

impl LevelGroup {
    fn new(generators: Vec<Permutation>, degree: usize, limits: Limits) -> Result<Self> {
        let group = PermutationGroup::generated(degree, &generators)?;
        let words = group.generator_words(limits)?;
        Ok(LevelGroup { group, words })
    }

    pub fn generators(&self) -> &[Permutation] {
        self.group.generators()
    }

    pub fn word(&self, p: &Permutation) -> Option<Vec<(usize, bool)>> {
        self.words.word(p)
    }

    /// Some element mapping point `from` to point `to`.
    pub fn transporter(&self, from: usize, to: usize) -> Option<Permutation> {
        let degree = self.group.degree();
        let mut reps: Vec<Option<Permutation>> = vec![None; degree];
        reps[from] = Some(Permutation::identity(degree));
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                return reps[x].clone();
            }
            for g in self.generators() {
                let y = g.image(x);
                if reps[y].is_none() {
                    reps[y] = Some(reps[x].as_ref().unwrap().then(g));
                    queue.push_back(y);
                }
            }
        }
        None
    }
}

/// Everything needed to build and query `Γ = ⟨S₀ ∪ G⟩` on `T_𝔛`.
#[derive(Debug, Clone)]
pub struct GammaSpec {
    rep: ResidualRep,
    s0: Arc<TauAction>,
    ray: Ray,
    spinal: SpinalSequence,
    frame: Arc<TreeFrame>,
    levels: EventuallyPeriodic<Arc<LevelGroup>>,
    limits: Limits,
}

/// Validates the data and assembles `Γ`.
pub fn build_gamma(rep: &ResidualRep, ray: &Ray, spinal: &SpinalSequence, s0: &TauAction) -> Result<GammaSpec> {
    let s0_group = s0.source();
    if s0_group.is_trivial() {
        return Err(Error::Trivial("S_0".into()));
    }
    if !s0_group.is_perfect()? {
        return Err(Error::NotPerfect("S_0".into()));
    }
    if !s0.is_transitive()? || s0.is_regular()? || !s0.is_faithful() {
        return Err(Error::Precondition("τ(S_0) must be faithful, transitive and non-regular".into()));
    }
    rep.validate()?;
    let limits = rep.limits;
    let comps = &rep.components;
    let arities = |cs: &[Component]| cs.iter().map(|c| c.tau.point_count()).collect::<Vec<_>>();
    let mut prefix = vec![s0.point_count()];
    prefix.extend(arities(&comps.prefix));
    let valency = ValencySequence::new(EventuallyPeriodic::new(prefix, arities(&comps.period))?)?;

    let level_group = |tau: &TauAction| -> Result<Arc<LevelGroup>> {
        Ok(Arc::new(LevelGroup::new(tau.images().to_vec(), tau.point_count(), limits)?))
    };
    let mut lprefix = vec![level_group(s0)?];
    for c in &comps.prefix {
        lprefix.push(level_group(&c.tau)?);
    }
    let lperiod = comps.period.iter().map(|c| level_group(&c.tau)).collect::<Result<Vec<_>>>()?;
    let levels = EventuallyPeriodic::new(lprefix, lperiod)?;

    let groups = levels.map(|l| l.group.clone());
    if let Some(v) = validate_spinal_data(&valency, &groups, ray, spinal)? {
        return Err(Error::Spinal(v));
    }
    let spine = Spine {
        ray: ray.clone(),
        spinal: spinal.clone(),
        group: rep.group.clone(),
        level_maps: comps.map(|c| c.action.clone()),
    };
    Ok(GammaSpec {
        rep: rep.clone(),
        s0: Arc::new(s0.clone()),
        ray: ray.clone(),
        spinal: spinal.clone(),
        frame: TreeFrame::with_spine(valency, spine),
        levels,
        limits,
    })
}

/// A word letter over the generators of `Δ(H)`, possibly with one extra element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Letter {
    /// `ins_v(r)` for the `generator`-th generator `r` of the label group at `|v|`.
    Fin { vertex: Vertex, generator: usize, inverse: bool },
    /// `s_h` for the `generator`-th generator `h` of `H`.
    Spinal { generator: usize, inverse: bool },
    /// The adjoined element.
    Extra { inverse: bool },
}

impl Letter {
    pub fn inverse(&self) -> Letter {
        match self {
            Letter::Fin { vertex, generator, inverse } => Letter::Fin {
                vertex: vertex.clone(),
                generator: *generator,
                inverse: !inverse,
            },
            Letter::Spinal { generator, inverse } => Letter::Spinal {
                generator: *generator,
                inverse: !inverse,
            },
            Letter::Extra { inverse } => Letter::Extra { inverse: !inverse },
        }
    }

    pub fn name(&self) -> String {
        let (base, inv) = match self {
            Letter::Fin { vertex, generator, inverse } => (format!("f{}@{}", generator + 1, vertex), *inverse),
            Letter::Spinal { generator, inverse } => (format!("sH{}", generator + 1), *inverse),
            Letter::Extra { inverse } => ("g".to_string(), *inverse),
        };
        if inv {
            format!("{base}^-1")
        } else {
            base
        }
    }
}

pub fn invert_word(word: &[Letter]) -> Vec<Letter> {
    word.iter().rev().map(Letter::inverse).collect()
}

pub fn word_names(word: &[Letter]) -> Vec<String> {
    word.iter().map(Letter::name).collect()
}

impl GammaSpec {
    pub fn frame(&self) -> &Arc<TreeFrame> {
        &self.frame
    }

    pub fn rep(&self) -> &ResidualRep {
        &self.rep
    }

    pub fn group(&self) -> &PermutationGroup {
        &self.rep.group
    }

    pub fn s0(&self) -> &TauAction {
        &self.s0
    }

    pub fn ray(&self) -> &Ray {
        &self.ray
    }

    pub fn spinal(&self) -> &SpinalSequence {
        &self.spinal
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn valency(&self) -> &ValencySequence {
        self.frame.valency()
    }

    /// `τ(S_n)` acting on `X_{n+1}`.
    pub fn level_group(&self, n: usize) -> &LevelGroup {
        self.levels.term(n)
    }

    /// Levels after which all data repeats with the joint period.
    pub fn horizon(&self) -> usize {
        joint_horizon(&[
            self.valency().sequence().shape(),
            self.levels.shape(),
            self.ray.0.shape(),
            self.spinal.0.shape(),
            self.rep.components.shape(),
        ])
    }

    /// `u_n`.
    pub fn spine_vertex(&self, n: usize) -> Vertex {
        ray_vertex(&self.ray, n)
    }

    pub fn rooted_generators(&self) -> Vec<TreeAut> {
        self.s0
            .images()
            .iter()
            .map(|p| TreeAut::from_word(&self.frame, 0, vec![Generator::Rooted(p.clone())]))
            .collect()
    }

    pub fn spinal_generators(&self) -> Vec<TreeAut> {
        self.group().generators().iter().map(|g| self.spinal_at(0, g)).collect()
    }

    /// Rooted generators followed by spinal generators.
    pub fn generators(&self) -> Vec<TreeAut> {
        let mut out = self.rooted_generators();
        out.extend(self.spinal_generators());
        out
    }

    /// `s_g` as an element of level `level`; `g` must lie in `G`.
    pub fn spinal_at(&self, level: usize, g: &Permutation) -> TreeAut {
        TreeAut::from_word(&self.frame, level, vec![Generator::Spinal(g.clone())])
    }

    pub fn spinal_element(&self, g: &Permutation) -> Result<TreeAut> {
        TreeAut::spinal(&self.frame, 0, g.clone())
    }

    /// Parses `r<k>` / `sG<k>` words with optional `^-1` suffixes.
    pub fn parse_word(&self, text: &str) -> Result<TreeAut> {
        let rooted = self.rooted_generators();
        let spinal = self.spinal_generators();
        let mut word = Vec::new();
        for token in text.split_whitespace() {
            let (name, inverse) = match token.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (token, false),
            };
            let (pool, index) = if let Some(k) = name.strip_prefix("sG") {
                (&spinal, k)
            } else if let Some(k) = name.strip_prefix('r') {
                (&rooted, k)
            } else {
                return Err(Error::Parse(format!("unknown generator {token:?}")));
            };
            let k: usize = index
                .parse()
                .map_err(|_| Error::Parse(format!("bad generator index in {token:?}")))?;
            let g = pool
                .get(k.wrapping_sub(1))
                .ok_or_else(|| Error::Parse(format!("generator {token:?} out of range")))?;
            word.extend(if inverse { g.inverse() } else { g.clone() }.word().iter().cloned());
        }
        Ok(TreeAut::from_word(&self.frame, 0, word))
    }

    /// The data of `Γ.σᵐ`.
    pub fn shift(&self, m: usize) -> Result<GammaSpec> {
        if m == 0 {
            return Ok(self.clone());
        }
        let rep = self.rep.shift(m);
        let s0 = self.rep.component(m).tau.clone();
        build_gamma(&rep, &self.ray.shift(m), &self.spinal.shift(m), &s0)
    }

    /// Canonical description of all defining data.
    pub fn describe(&self) -> Value {
        json!({
            "S0": self.s0.source().generators().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "S0_tau": self.s0.images().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "rep": self.rep.describe(),
            "valency": self.valency().sequence(),
            "ray": self.ray.0,
            "spinal": self.spinal.0,
        })
    }

    fn check_element(&self, w: &TreeAut) -> Result<()> {
        if !Arc::ptr_eq(w.frame(), &self.frame) {
            return Err(Error::FrameMismatch);
        }
        Ok(())
    }

    /// `ins_v(r)` for the `generator`-th label generator at level `level + |v|`.
    pub fn fin_letter(&self, level: usize, v: &Vertex, generator: usize, inverse: bool) -> Result<TreeAut> {
        let lg = self.level_group(level + v.len());
        let p = lg
            .generators()
            .get(generator)
            .ok_or_else(|| Error::Precondition(format!("no label generator {generator}")))?;
        let p = if inverse { p.inverse() } else { p.clone() };
        TreeAut::insert(v, &TreeAut::rooted(&self.frame, level + v.len(), p)?)
    }

    /// Generators of `Fin_𝔖(T)` truncated at depth `d`: every `ins_v(r)` with `|v| < d`.
    pub fn fin_generators(&self, d: usize) -> Vec<TreeAut> {
        let mut out = Vec::new();
        for n in 0..d {
            let count = self.level_group(n).generators().len();
            for v in self.valency().layer(0, n) {
                for k in 0..count {
                    out.push(self.fin_letter(0, &v, k, false).expect("valid layer vertex"));
                }
            }
        }
        out
    }

    /// The normal form: minimal `k` with every layer-`k` section equal to `s_b · f`.
    pub fn classify(&self, w: &TreeAut) -> Result<Classification> {
        self.check_element(w)?;
        let bound = ceil_log2(w.len() + 1) + w.settling_depth();
        let mut frontier: Vec<Vertex> = if w.is_trivial_word() { Vec::new() } else { vec![Vertex::root()] };
        for k in 0..=bound {
            if let Some(sections) = self.classify_layer(w, &frontier) {
                return Ok(Classification {
                    level: w.level(),
                    depth: k,
                    sections,
                });
            }
            if k == bound {
                break;
            }
            frontier = self.expand(w, &frontier);
        }
        Err(Error::ContractionFailed { bound })
    }

    /// The same normal form read at a layer `k` at or below the minimal one.
    pub fn classify_at(&self, w: &TreeAut, k: usize) -> Result<Classification> {
        let base = self.classify(w)?;
        if k <= base.depth {
            return Ok(base);
        }
        let mut frontier: Vec<Vertex> = base.sections.keys().cloned().collect();
        for _ in base.depth..k {
            frontier = self.expand(w, &frontier);
        }
        let sections = self
            .classify_layer(w, &frontier)
            .ok_or_else(|| Error::Precondition("normal form not preserved below its layer".into()))?;
        Ok(Classification {
            level: w.level(),
            depth: k,
            sections,
        })
    }

    fn expand(&self, w: &TreeAut, frontier: &[Vertex]) -> Vec<Vertex> {
        let mut next = Vec::new();
        for v in frontier {
            let arity = self.frame.arity(w.level() + v.len());
            for x in 0..arity {
                let c = v.child(x);
                if !w.section_unchecked(&c).is_trivial_word() {
                    next.push(c);
                }
            }
        }
        next
    }

    fn classify_layer(&self, w: &TreeAut, frontier: &[Vertex]) -> Option<BTreeMap<Vertex, SectionKind>> {
        let mut sections = BTreeMap::new();
        for v in frontier {
            let s = w.section_unchecked(v);
            {
                let kind = SectionKind::of_word(s.word())?;
                sections.insert(v.clone(), kind);
            }
        }
        Some(sections)
    }

    /// Labels of `w` when it is finitary, `None` when it has a spinal part.
    pub fn finitary_labels(&self, w: &TreeAut) -> Result<Option<FinitaryLabels>> {
        let c = self.classify(w)?;
        if !c.is_finitary() {
            return Ok(None);
        }
        let mut labels = Vec::new();
        let mut frontier = if w.is_trivial_word() { Vec::new() } else { vec![Vertex::root()] };
        for _ in 0..c.depth {
            for v in &frontier {
                let p = w.label(v);
                if !p.is_identity() {
                    labels.push((v.clone(), p));
                }
            }
            frontier = self.expand(w, &frontier);
        }
        for (v, kind) in &c.sections {
            if let SectionKind::Finitary(f) = kind {
                labels.extend(f.labels().map(|(u, p)| (v.concat(u), p.clone())));
            }
        }
        Ok(Some(FinitaryLabels::new(labels)))
    }

    /// Exact identity test for words over `Γ`-generators.
    pub fn is_identity(&self, w: &TreeAut) -> Result<bool> {
        Ok(self.finitary_labels(w)?.is_some_and(|l| l.is_empty()))
    }

    /// Exact equality for words over `Γ`-generators.
    pub fn exact_equal(&self, a: &TreeAut, b: &TreeAut) -> Result<bool> {
        self.is_identity(&a.inverse().multiply(b)?)
    }

    /// A finitary element with trivial layer-`|from|` sections moving `from` to `to`.
    pub fn transport(&self, level: usize, from: &Vertex, to: &Vertex) -> Result<FinitaryLabels> {
        if from.len() != to.len() {
            return Err(Error::Precondition(format!("{from} and {to} lie on different layers")));
        }
        self.valency().check_vertex(level, from)?;
        self.valency().check_vertex(level, to)?;
        let mut labels = Vec::new();
        for i in 0..from.len() {
            let p = self
                .level_group(level + i)
                .transporter(from.letters()[i], to.letters()[i])
                .ok_or_else(|| Error::Precondition(format!("level {} is not transitive", level + i)))?;
            labels.push((from.prefix(i), p));
        }
        Ok(FinitaryLabels::new(labels))
    }

    /// Word in `Fin` letters for a finitary element of level 0: layers are
    /// applied deepest first, `f = Q_{d-1} ⋯ Q_0`.
    pub fn finitary_word(&self, labels: &FinitaryLabels) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        for n in (0..labels.depth()).rev() {
            for (v, p) in labels.labels().filter(|(v, _)| v.len() == n) {
                let word = self
                    .level_group(n)
                    .word(p)
                    .ok_or_else(|| Error::Precondition(format!("label {p} at {v} lies outside τ(S_{n})")))?;
                out.extend(word.into_iter().map(|(generator, inverse)| Letter::Fin {
                    vertex: v.clone(),
                    generator,
                    inverse,
                }));
            }
        }
        Ok(out)
    }

    pub fn element_of_labels(&self, labels: &FinitaryLabels) -> Result<TreeAut> {
        TreeAut::finitary(&self.frame, 0, labels.clone())
    }

    pub fn nuclear_window(&self, start: usize, length: usize) -> NuclearWindow {
        window_for(self, self.group(), start, length)
    }
}

fn ceil_log2(n: usize) -> usize {
    let mut k = 0;
    while (1usize << k) < n {
        k += 1;
    }
    k
}

/// A layer-`k` section in normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SectionKind {
    Finitary(FinitaryLabels),
    /// `s_component · finitary`.
    Spinal { component: Permutation, finitary: FinitaryLabels },
}

impl SectionKind {
    fn of_word(word: &[Generator]) -> Option<SectionKind> {
        match word {
            [f] if f.is_finitary() => Some(SectionKind::Finitary(f.finitary_labels()?)),
            [Generator::Spinal(b)] => Some(SectionKind::Spinal {
                component: b.clone(),
                finitary: FinitaryLabels::default(),
            }),
            [Generator::Spinal(b), f] if f.is_finitary() => Some(SectionKind::Spinal {
                component: b.clone(),
                finitary: f.finitary_labels()?,
            }),
            _ => None,
        }
    }

    pub fn finitary_part(&self) -> &FinitaryLabels {
        match self {
            SectionKind::Finitary(f) => f,
            SectionKind::Spinal { finitary, .. } => finitary,
        }
    }

    pub fn component(&self) -> Option<&Permutation> {
        match self {
            SectionKind::Finitary(_) => None,
            SectionKind::Spinal { component, .. } => Some(component),
        }
    }
}

/// Normal form of an element: its non-trivial layer-`depth` sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub level: usize,
    pub depth: usize,
    pub sections: BTreeMap<Vertex, SectionKind>,
}

impl Classification {
    pub fn is_finitary(&self) -> bool {
        self.sections.values().all(|s| s.component().is_none())
    }

    pub fn spinal_components(&self) -> impl Iterator<Item = (&Vertex, &Permutation)> {
        self.sections.iter().filter_map(|(v, s)| s.component().map(|c| (v, c)))
    }

    /// Bound on the depth of the finitary remainder.
    pub fn finitary_depth(&self) -> usize {
        self.depth
            + self
                .sections
                .values()
                .map(|s| s.finitary_part().depth())
                .max()
                .unwrap_or(0)
    }

    /// `∏_v ins_v(s_{b_v})`, the spinal part of the element.
    pub fn spinal_part(&self, spec: &GammaSpec) -> Result<TreeAut> {
        let mut out = TreeAut::identity(spec.frame(), self.level);
        for (v, b) in self.spinal_components() {
            let s = spec.spinal_at(self.level + v.len(), b);
            out = out.multiply(&TreeAut::insert(v, &s)?)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let sections: Vec<Value> = self
            .sections
            .iter()
            .map(|(v, s)| match s {
                SectionKind::Finitary(f) => json!({
                    "vertex": v.to_string(),
                    "kind": "finitary",
                    "depth": f.depth(),
                }),
                SectionKind::Spinal { component, finitary } => json!({
                    "vertex": v.to_string(),
                    "kind": "spinal",
                    "component": component.to_string(),
                    "finitary_depth": finitary.depth(),
                }),
            })
            .collect();
        json!({ "level": self.level, "k": self.depth, "sections": sections })
    }
}

/// The component groups `B|₍ₖ₎` over a window of levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuclearWindow {
    pub start: usize,
    pub levels: Vec<NuclearLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuclearLevel {
    pub level: usize,
    pub generators: Vec<Permutation>,
    pub order: u128,
    /// Order of the label group `ρ_{k+1}(B)` at the spinal neighbour.
    pub label_order: u128,
}

impl NuclearWindow {
    pub fn to_json(&self) -> Value {
        json!({
            "start": self.start,
            "levels": self.levels.iter().map(|l| json!({
                "level": l.level,
                "generators": l.generators.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "order": l.order.to_string(),
                "label_order": l.label_order.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn window_for(spec: &GammaSpec, group: &PermutationGroup, start: usize, length: usize) -> NuclearWindow {
    let levels = (start..start + length)
        .map(|k| {
            let action = &spec.rep.components.term(k).action;
            let labels: Vec<Permutation> = group
                .generators()
                .iter()
                .map(|g| action.apply(g).expect("component of G").clone())
                .collect();
            let label_order = PermutationGroup::generated(action.target_degree(), &labels)
                .map(|g| g.order())
                .unwrap_or(u128::MAX);
            NuclearLevel {
                level: k,
                generators: group.generators().to_vec(),
                order: group.order(),
                label_order,
            }
        })
        .collect();
    NuclearWindow { start, levels }
}

/// `Δ(H) = ⟨Fin_𝔖(T) ∪ H⟩`.
#[derive(Debug, Clone)]
pub struct DeltaSpec {
    gamma: GammaSpec,
    subgroup: PermutationGroup,
    words: Arc<GeneratorWords>,
}

pub fn delta(spec: &GammaSpec, h: &PermutationGroup) -> Result<DeltaSpec> {
    if h.degree() != spec.group().degree() {
        return Err(Error::DegreeMismatch(spec.group().degree(), h.degree()));
    }
    for g in h.generators() {
        if !spec.group().contains(g)? {
            return Err(Error::NotASubgroup(format!("{g} is not in G")));
        }
    }
    let words = h.generator_words(spec.limits)?;
    Ok(DeltaSpec {
        gamma: spec.clone(),
        subgroup: h.clone(),
        words: Arc::new(words),
    })
}

/// Properness of `Δ(H)` certified levelwise by a witness in `G ∖ H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Properness {
    pub proper: bool,
    pub witness: Option<Permutation>,
    /// `(level, |H.σⁿ|, |G.σⁿ|)` over one joint period.
    pub levels: Vec<(usize, u128, u128)>,
}

pub fn is_proper_delta(spec: &GammaSpec, h: &PermutationGroup) -> Result<Properness> {
    let d = delta(spec, h)?;
    let witness = spec
        .group()
        .generators()
        .iter()
        .find(|g| !d.subgroup.contains(g).unwrap_or(true))
        .cloned();
    let levels = (0..spec.horizon())
        .map(|n| (n, h.order(), spec.group().order()))
        .collect();
    Ok(Properness {
        proper: witness.is_some() && h.order() < spec.group().order(),
        witness,
        levels,
    })
}

/// Answer of the `Δ(H)` membership oracle.
#[derive(Debug, Clone)]
pub enum Membership {
    /// A word over `Δ(H)`-generators, verified equal to the input.
    Yes(Vec<Letter>),
    /// A normal-form section whose spinal component lies outside `H`.
    No(NonMembership),
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonMembership {
    pub depth: usize,
    pub vertex: Vertex,
    pub component: Permutation,
}

impl Membership {
    pub fn is_yes(&self) -> bool {
        matches!(self, Membership::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Membership::No(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            Membership::Yes(w) => json!({ "answer": "yes", "witness": word_names(w) }),
            Membership::No(n) => json!({
                "answer": "no",
                "k": n.depth,
                "vertex": n.vertex.to_string(),
                "component": n.component.to_string(),
            }),
            Membership::Unknown(why) => json!({ "answer": "unknown", "reason": why }),
        }
    }
}

impl DeltaSpec {
    pub fn gamma(&self) -> &GammaSpec {
        &self.gamma
    }

    pub fn subgroup(&self) -> &PermutationGroup {
        &self.subgroup
    }

    pub fn spinal_generators(&self) -> Vec<TreeAut> {
        self.subgroup
            .generators()
            .iter()
            .map(|h| self.gamma.spinal_at(0, h))
            .collect()
    }

    /// `fin_generators(d)` followed by `s_h` for the generators of `H`.
    pub fn generators(&self, d: usize) -> Vec<TreeAut> {
        let mut out = self.gamma.fin_generators(d);
        out.extend(self.spinal_generators());
        out
    }

    pub fn nuclear_window(&self, start: usize, length: usize) -> NuclearWindow {
        window_for(&self.gamma, &self.subgroup, start, length)
    }

    /// Word in `s_h` letters for `s_b`, `b ∈ H`.
    pub fn spinal_word(&self, b: &Permutation) -> Option<Vec<Letter>> {
        Some(
            self.words
                .word(b)?
                .into_iter()
                .map(|(generator, inverse)| Letter::Spinal { generator, inverse })
                .collect(),
        )
    }

    pub fn evaluate(&self, word: &[Letter], extra: Option<&TreeAut>) -> Result<TreeAut> {
        let frame = self.gamma.frame();
        let mut out = Vec::new();
        let mut cache: HashMap<Letter, TreeAut> = HashMap::new();
        for letter in word {
            if let Some(t) = cache.get(letter) {
                out.extend(t.word().iter().cloned());
                continue;
            }
            let t = match letter {
                Letter::Fin { vertex, generator, inverse } => self.gamma.fin_letter(0, vertex, *generator, *inverse)?,
                Letter::Spinal { generator, inverse } => {
                    let h = self
                        .subgroup
                        .generators()
                        .get(*generator)
                        .ok_or_else(|| Error::Precondition(format!("no generator {generator} of H")))?;
                    let h = if *inverse { h.inverse() } else { h.clone() };
                    self.gamma.spinal_at(0, &h)
                }
                Letter::Extra { inverse } => {
                    let g = extra.ok_or_else(|| Error::Precondition("word uses an extra element".into()))?;
                    if *inverse {
                        g.inverse()
                    } else {
                        g.clone()
                    }
                }
            };
            out.extend(t.word().iter().cloned());
            cache.insert(letter.clone(), t);
        }
        Ok(TreeAut::from_word(frame, 0, out))
    }

    /// `F_b = ins_{u_k}(s_b|_{u_k})⁻¹ · s_b`, finitary for every `b ∈ G`.
    pub fn layered_difference(&self, b: &Permutation, k: usize) -> Result<TreeAut> {
        let g = &self.gamma;
        let u = g.spine_vertex(k);
        let s = g.spinal_at(0, b);
        TreeAut::insert(&u, &s.section(&u)?)?.inverse().multiply(&s)
    }

    /// Word for `ins_v(s_b)` with `v` on layer `k` and `b ∈ H`:
    /// `c⁻¹ · s_b · F_b⁻¹ · c` with `c` a finitary transport `u_k ↦ v`.
    pub fn inserted_spinal_word(&self, v: &Vertex, b: &Permutation) -> Result<Vec<Letter>> {
        let g = &self.gamma;
        let k = v.len();
        let sb = self
            .spinal_word(b)
            .ok_or_else(|| Error::Precondition(format!("{b} is not in H")))?;
        let f = g
            .finitary_labels(&self.layered_difference(b, k)?)?
            .ok_or_else(|| Error::Precondition("layered difference is not finitary".into()))?;
        let c = g.finitary_word(&g.transport(0, &g.spine_vertex(k), v)?)?;
        let mut word = invert_word(&c);
        word.extend(sb);
        word.extend(invert_word(&g.finitary_word(&f)?));
        word.extend(c);
        Ok(word)
    }

    /// Three-valued membership of a `Γ`-word in `Δ(H)`.
    pub fn member(&self, w: &TreeAut) -> Result<Membership> {
        let g = &self.gamma;
        if w.level() != 0 {
            return Err(Error::LevelMismatch(0, w.level()));
        }
        let c = match g.classify(w) {
            Ok(c) => c,
            Err(Error::ContractionFailed { bound }) => {
                return Ok(Membership::Unknown(format!("no normal form within {bound} levels")))
            }
            Err(e) => return Err(e),
        };
        for (v, b) in c.spinal_components() {
            if !self.subgroup.contains(b)? {
                return Ok(Membership::No(NonMembership {
                    depth: c.depth,
                    vertex: v.clone(),
                    component: b.clone(),
                }));
            }
        }
        let mut word = Vec::new();
        for (v, b) in c.spinal_components() {
            word.extend(self.inserted_spinal_word(v, b)?);
        }
        let remainder = c.spinal_part(g)?.inverse().multiply(w)?;
        let labels = match g.finitary_labels(&remainder)? {
            Some(l) => l,
            None => return Ok(Membership::Unknown("remainder is not finitary".into())),
        };
        word.extend(g.finitary_word(&labels)?);
        if g.exact_equal(&self.evaluate(&word, None)?, w)? {
            Ok(Membership::Yes(word))
        } else {
            Ok(Membership::Unknown("witness failed exact verification".into()))
        }
    }
}

impl NonMembership {
    /// Recomputes the normal form and re-checks the refutation.
    pub fn verify(&self, delta: &DeltaSpec, w: &TreeAut) -> Result<bool> {
        let c = delta.gamma.classify_at(w, self.depth)?;
        let found = c.sections.get(&self.vertex).and_then(SectionKind::component);
        Ok(found == Some(&self.component) && !delta.subgroup.contains(&self.component)?)
    }
}

pub fn member_delta(spec: &GammaSpec, h: &PermutationGroup, w: &TreeAut) -> Result<Membership> {
    delta(spec, h)?.member(w)
}
