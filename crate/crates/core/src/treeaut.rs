//! Automorphisms of the rooted tree as words over typed generators.
//!
//! Every generator has a closed-form section at each first-level vertex, so
//! sections of words are again words (the wreath recursion
//! `(gh)|_v = g|_v · h|_{v.g}`), and any finite amount of the portrait can be
//! evaluated lazily. Words are kept in a simplified form: adjacent finitary
//! letters are collapsed into one labelled portrait and adjacent spinal
//! letters are merged through `s_g · s_h = s_{gh}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::permgroup::{Homomorphism, PermutationGroup};
use crate::tree::{EventuallyPeriodic, Ray, SpinalSequence, ValencySequence, Vertex};

/// Spine data for spinal generators: the ray, the spinal sequence, the
/// abstract group `G`, and the level actions `ρ_{n+1} : G → Sym(X_{n+2})`
/// stored at `level_maps.term(n)`.
#[derive(Debug, Clone)]
pub struct Spine {
    pub ray: Ray,
    pub spinal: SpinalSequence,
    pub group: PermutationGroup,
    pub level_maps: EventuallyPeriodic<Arc<Homomorphism>>,
}

impl Spine {
    /// `ρ_{level+1}(g)`: the rooted label a level-`level` spinal element
    /// carries at its spinal neighbour.
    pub fn component_label(&self, level: usize, g: &Permutation) -> &Permutation {
        self.level_maps
            .term(level)
            .apply(g)
            .expect("spinal component outside G")
    }
}

/// The tree a family of automorphisms acts on.
#[derive(Debug, Clone)]
pub struct TreeFrame {
    valency: ValencySequence,
    spine: Option<Spine>,
}

impl TreeFrame {
    pub fn plain(valency: ValencySequence) -> Arc<Self> {
        Arc::new(TreeFrame { valency, spine: None })
    }

    pub fn with_spine(valency: ValencySequence, spine: Spine) -> Arc<Self> {
        Arc::new(TreeFrame {
            valency,
            spine: Some(spine),
        })
    }

    pub fn valency(&self) -> &ValencySequence {
        &self.valency
    }

    pub fn spine(&self) -> Option<&Spine> {
        self.spine.as_ref()
    }

    #[inline]
    pub fn arity(&self, level: usize) -> usize {
        self.valency.arity(level)
    }

    fn spine_ref(&self) -> &Spine {
        self.spine.as_ref().expect("spinal generator without spine")
    }
}

/// Labels of a finitary automorphism; only non-identity labels are stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FinitaryLabels {
    labels: BTreeMap<Vertex, Permutation>,
}

impl FinitaryLabels {
    pub fn new(labels: impl IntoIterator<Item = (Vertex, Permutation)>) -> Self {
        FinitaryLabels {
            labels: labels.into_iter().filter(|(_, p)| !p.is_identity()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Least `d` with all labels at length `≥ d` trivial.
    pub fn depth(&self) -> usize {
        self.labels.keys().map(|v| v.len() + 1).max().unwrap_or(0)
    }

    pub fn label(&self, v: &Vertex) -> Option<&Permutation> {
        self.labels.get(v)
    }

    pub fn labels(&self) -> impl Iterator<Item = (&Vertex, &Permutation)> {
        self.labels.iter()
    }

    fn image_letter(&self, prefix: &Vertex, x: usize) -> usize {
        self.labels.get(prefix).map_or(x, |p| p.image(x))
    }

    pub fn act(&self, v: &Vertex) -> Vertex {
        let mut prefix = Vertex::root();
        let mut out = Vec::with_capacity(v.len());
        for &x in v.letters() {
            out.push(self.image_letter(&prefix, x));
            prefix = prefix.child(x);
        }
        Vertex(out)
    }

    pub fn inverse(&self) -> FinitaryLabels {
        FinitaryLabels::new(self.labels.iter().map(|(v, p)| (self.act(v), p.inverse())))
    }

    pub fn product(&self, other: &FinitaryLabels) -> FinitaryLabels {
        let inv = self.inverse();
        let mut candidates: Vec<Vertex> = self.labels.keys().cloned().collect();
        candidates.extend(other.labels.keys().map(|w| inv.act(w)));
        candidates.sort();
        candidates.dedup();
        FinitaryLabels::new(candidates.into_iter().filter_map(|v| {
            let moved = self.act(&v);
            let label = match (self.labels.get(&v), other.labels.get(&moved)) {
                (Some(a), Some(b)) => a.then(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => return None,
            };
            Some((v, label))
        }))
    }

    fn below(&self, x: usize) -> FinitaryLabels {
        FinitaryLabels {
            labels: self
                .labels
                .iter()
                .filter(|(v, _)| v.letters().first() == Some(&x))
                .map(|(v, p)| (Vertex(v.letters()[1..].to_vec()), p.clone()))
                .collect(),
        }
    }

    fn shifted_under(&self, at: &Vertex) -> FinitaryLabels {
        FinitaryLabels {
            labels: self
                .labels
                .iter()
                .map(|(v, p)| (at.concat(v), p.clone()))
                .collect(),
        }
    }
}

/// A generator of `Aut(T.σᵐ)`; the level `m` is carried by the enclosing word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Generator {
    /// Permutes the children of the root.
    Rooted(Permutation),
    /// A finitary element of depth at least two.
    Finitary(Arc<FinitaryLabels>),
    /// `s_g` for `g ∈ G`: trivial on the spine, rooted `ρ(g)` at each spinal neighbour.
    Spinal(Permutation),
    /// `ins_v(s_g)` for a non-root vertex `v`.
    Inserted(Vertex, Arc<Generator>),
}

impl Generator {
    /// Canonical generator for finitary labels; `None` for the identity.
    pub fn finitary(labels: FinitaryLabels) -> Option<Generator> {
        if labels.is_empty() {
            return None;
        }
        if labels.depth() == 1 {
            return Some(Generator::Rooted(labels.labels[&Vertex::root()].clone()));
        }
        Some(Generator::Finitary(Arc::new(labels)))
    }

    /// `ins_v(self)` in canonical form.
    pub fn inserted(at: &Vertex, g: &Generator) -> Option<Generator> {
        if at.is_root() {
            return (!g.is_identity()).then(|| g.clone());
        }
        match g {
            Generator::Spinal(_) => (!g.is_identity()).then(|| Generator::Inserted(at.clone(), Arc::new(g.clone()))),
            Generator::Inserted(w, inner) => Generator::inserted(&at.concat(w), inner),
            _ => Generator::finitary(g.finitary_labels()?.shifted_under(at)),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Generator::Rooted(p) | Generator::Spinal(p) => p.is_identity(),
            Generator::Finitary(l) => l.is_empty(),
            Generator::Inserted(_, g) => g.is_identity(),
        }
    }

    pub fn is_finitary(&self) -> bool {
        match self {
            Generator::Rooted(_) | Generator::Finitary(_) => true,
            Generator::Spinal(p) => p.is_identity(),
            Generator::Inserted(_, g) => g.is_finitary(),
        }
    }

    /// Labels of a finitary generator.
    pub fn finitary_labels(&self) -> Option<FinitaryLabels> {
        match self {
            Generator::Rooted(p) => Some(FinitaryLabels::new([(Vertex::root(), p.clone())])),
            Generator::Finitary(l) => Some((**l).clone()),
            Generator::Spinal(p) if p.is_identity() => Some(FinitaryLabels::default()),
            Generator::Inserted(v, g) => g.finitary_labels().map(|l| l.shifted_under(v)),
            Generator::Spinal(_) => None,
        }
    }

    /// Levels below which every section is rooted, spinal or trivial: the
    /// finitary depth, or the insertion depth of a spinal letter.
    pub fn settling_depth(&self) -> usize {
        match self {
            Generator::Rooted(_) => 1,
            Generator::Finitary(l) => l.depth(),
            Generator::Spinal(_) => 0,
            Generator::Inserted(v, g) => v.len() + g.settling_depth(),
        }
    }

    pub fn inverse(&self) -> Generator {
        match self {
            Generator::Rooted(p) => Generator::Rooted(p.inverse()),
            Generator::Finitary(l) => Generator::Finitary(Arc::new(l.inverse())),
            Generator::Spinal(g) => Generator::Spinal(g.inverse()),
            Generator::Inserted(v, g) => Generator::Inserted(v.clone(), Arc::new(g.inverse())),
        }
    }

    /// Image of the first letter `x` under this generator at `level`.
    #[inline]
    fn root_image(&self, x: usize) -> usize {
        match self {
            Generator::Rooted(p) => p.image(x),
            Generator::Finitary(l) => l.image_letter(&Vertex::root(), x),
            Generator::Spinal(_) | Generator::Inserted(..) => x,
        }
    }

    /// Section at the first-level vertex `x`, `None` if trivial.
    fn section_letter(&self, frame: &TreeFrame, level: usize, x: usize) -> Option<Generator> {
        match self {
            Generator::Rooted(_) => None,
            Generator::Finitary(l) => Generator::finitary(l.below(x)),
            Generator::Spinal(g) => {
                let spine = frame.spine_ref();
                if x == spine.ray.step(level) {
                    Some(self.clone())
                } else if x == spine.spinal.step(level) {
                    let p = spine.component_label(level, g);
                    (!p.is_identity()).then(|| Generator::Rooted(p.clone()))
                } else {
                    None
                }
            }
            Generator::Inserted(v, g) => {
                if v.letters()[0] != x {
                    None
                } else if v.len() == 1 {
                    Some((**g).clone())
                } else {
                    Some(Generator::Inserted(Vertex(v.letters()[1..].to_vec()), g.clone()))
                }
            }
        }
    }

    fn act(&self, frame: &TreeFrame, level: usize, v: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(v.len());
        let mut cur = Some(self.clone());
        for (i, &x) in v.iter().enumerate() {
            match &cur {
                None => out.push(x),
                Some(g) => {
                    out.push(g.root_image(x));
                    cur = g.section_letter(frame, level + i, x);
                }
            }
        }
        out
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Rooted(p) => write!(f, "r{p}"),
            Generator::Finitary(l) => write!(f, "fin[depth {}]", l.depth()),
            Generator::Spinal(g) => write!(f, "s{g}"),
            Generator::Inserted(v, g) => write!(f, "ins[{v}]({g})"),
        }
    }
}

/// Merges two adjacent letters when their product has a single-letter form:
/// `Some(None)` means they cancel.
fn merge(a: &Generator, b: &Generator) -> Option<Option<Generator>> {
    match (a, b) {
        (Generator::Spinal(g), Generator::Spinal(h)) => {
            let gh = g.then(h);
            Some((!gh.is_identity()).then_some(Generator::Spinal(gh)))
        }
        (Generator::Inserted(v, g), Generator::Inserted(w, h)) if v == w => {
            merge(g, h).map(|m| m.and_then(|x| Generator::inserted(v, &x)))
        }
        _ if a.is_finitary() && b.is_finitary() => {
            let la = a.finitary_labels()?;
            let lb = b.finitary_labels()?;
            Some(Generator::finitary(la.product(&lb)))
        }
        _ => None,
    }
}

fn simplify(word: impl IntoIterator<Item = Generator>) -> Vec<Generator> {
    let mut out: Vec<Generator> = Vec::new();
    for g in word {
        if g.is_identity() {
            continue;
        }
        let mut next = Some(g);
        while let Some(g) = next.take() {
            match out.last().and_then(|top| merge(top, &g)) {
                Some(m) => {
                    out.pop();
                    next = m;
                }
                None => out.push(g),
            }
        }
    }
    out
}

/// An element of `Aut(T.σᵐ)` given by a simplified word.
pub struct TreeAut {
    frame: Arc<TreeFrame>,
    level: usize,
    word: Arc<Vec<Generator>>,
    cache: Mutex<HashMap<Vertex, Arc<Vec<Generator>>>>,
}

impl Clone for TreeAut {
    fn clone(&self) -> Self {
        TreeAut {
            frame: self.frame.clone(),
            level: self.level,
            word: self.word.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for TreeAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeAut")
            .field("level", &self.level)
            .field("word", &self.word)
            .finish()
    }
}

impl TreeAut {
    pub fn identity(frame: &Arc<TreeFrame>, level: usize) -> Self {
        Self::from_word(frame, level, Vec::new())
    }

    pub fn from_word(frame: &Arc<TreeFrame>, level: usize, word: Vec<Generator>) -> Self {
        TreeAut {
            frame: frame.clone(),
            level,
            word: Arc::new(simplify(word)),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn generator(frame: &Arc<TreeFrame>, level: usize, g: Generator) -> Result<Self> {
        if let Generator::Spinal(p) = &g {
            let spine = frame.spine().ok_or(Error::NoSpine)?;
            if !spine.group.contains(p)? {
                return Err(Error::NotASubgroup(format!("{p} is not in G")));
            }
        }
        if let Generator::Rooted(p) = &g {
            if p.degree() != frame.arity(level) {
                return Err(Error::DegreeMismatch(frame.arity(level), p.degree()));
            }
        }
        Ok(Self::from_word(frame, level, vec![g]))
    }

    pub fn rooted(frame: &Arc<TreeFrame>, level: usize, p: Permutation) -> Result<Self> {
        Self::generator(frame, level, Generator::Rooted(p))
    }

    pub fn spinal(frame: &Arc<TreeFrame>, level: usize, g: Permutation) -> Result<Self> {
        Self::generator(frame, level, Generator::Spinal(g))
    }

    pub fn finitary(frame: &Arc<TreeFrame>, level: usize, labels: FinitaryLabels) -> Result<Self> {
        for (v, p) in labels.labels() {
            frame.valency.check_vertex(level, v)?;
            let arity = frame.arity(level + v.len());
            if p.degree() != arity {
                return Err(Error::DegreeMismatch(arity, p.degree()));
            }
        }
        Ok(Self::from_word(frame, level, Generator::finitary(labels).into_iter().collect()))
    }

    pub fn frame(&self) -> &Arc<TreeFrame> {
        &self.frame
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn word(&self) -> &[Generator] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// True for the empty word; a non-empty word may still be trivial.
    pub fn is_trivial_word(&self) -> bool {
        self.word.is_empty()
    }

    pub fn is_finitary_word(&self) -> bool {
        self.word.iter().all(Generator::is_finitary)
    }

    /// Labels of a word consisting of finitary letters.
    pub fn finitary_labels(&self) -> Option<FinitaryLabels> {
        self.word.iter().try_fold(FinitaryLabels::default(), |acc, g| {
            Some(acc.product(&g.finitary_labels()?))
        })
    }

    pub fn spinal_factor_count(&self) -> usize {
        self.word.iter().filter(|g| !g.is_finitary()).count()
    }

    pub fn settling_depth(&self) -> usize {
        self.word.iter().map(Generator::settling_depth).max().unwrap_or(0)
    }

    pub fn clear_cache(&self) {
        self.cache.lock().unwrap().clear();
    }

    fn compatible(&self, other: &TreeAut) -> Result<()> {
        if !Arc::ptr_eq(&self.frame, &other.frame) {
            return Err(Error::FrameMismatch);
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &TreeAut) -> Result<TreeAut> {
        self.compatible(other)?;
        let word = self.word.iter().chain(other.word.iter()).cloned().collect();
        Ok(Self::from_word(&self.frame, self.level, word))
    }

    /// Product of several elements of one level; the empty product needs `frame`/`level`.
    pub fn product<'a>(frame: &Arc<TreeFrame>, level: usize, items: impl IntoIterator<Item = &'a TreeAut>) -> Result<TreeAut> {
        let mut word = Vec::new();
        for a in items {
            if !Arc::ptr_eq(&a.frame, frame) {
                return Err(Error::FrameMismatch);
            }
            if a.level != level {
                return Err(Error::LevelMismatch(level, a.level));
            }
            word.extend(a.word.iter().cloned());
        }
        Ok(Self::from_word(frame, level, word))
    }

    pub fn inverse(&self) -> TreeAut {
        let word = self.word.iter().rev().map(Generator::inverse).collect();
        Self::from_word(&self.frame, self.level, word)
    }

    /// `by⁻¹ · self · by`.
    pub fn conjugate(&self, by: &TreeAut) -> Result<TreeAut> {
        by.inverse().multiply(self)?.multiply(by)
    }

    /// `self⁻¹ · other⁻¹ · self · other`.
    pub fn commutator(&self, other: &TreeAut) -> Result<TreeAut> {
        self.inverse().multiply(&other.inverse())?.multiply(self)?.multiply(other)
    }

    fn check_vertex(&self, v: &Vertex) -> Result<()> {
        self.frame.valency.check_vertex(self.level, v)
    }

    /// `v.a`.
    pub fn act(&self, v: &Vertex) -> Result<Vertex> {
        self.check_vertex(v)?;
        Ok(self.act_unchecked(v))
    }

    fn act_unchecked(&self, v: &Vertex) -> Vertex {
        let mut cur = v.letters().to_vec();
        for g in self.word.iter() {
            cur = g.act(&self.frame, self.level, &cur);
        }
        Vertex(cur)
    }

    /// The label at the root.
    pub fn root_perm(&self) -> Permutation {
        let arity = self.frame.arity(self.level);
        let images = (0..arity)
            .map(|x| self.word.iter().fold(x, |y, g| g.root_image(y)) as u32)
            .collect();
        Permutation::from_images_unchecked(images)
    }

    fn section_word(&self, v: &Vertex) -> Arc<Vec<Generator>> {
        if v.is_root() {
            return self.word.clone();
        }
        if let Some(w) = self.cache.lock().unwrap().get(v) {
            return w.clone();
        }
        let parent = v.parent().unwrap();
        let pw = self.section_word(&parent);
        let lvl = self.level + parent.len();
        let mut cur = *v.letters().last().unwrap();
        let mut out = Vec::with_capacity(pw.len());
        for g in pw.iter() {
            if let Some(s) = g.section_letter(&self.frame, lvl, cur) {
                out.push(s);
            }
            cur = g.root_image(cur);
        }
        let w = Arc::new(simplify(out));
        self.cache.lock().unwrap().insert(v.clone(), w.clone());
        w
    }

    /// `a|_v`, an element of level `m + |v|`.
    pub fn section(&self, v: &Vertex) -> Result<TreeAut> {
        self.check_vertex(v)?;
        Ok(self.section_unchecked(v))
    }

    pub(crate) fn section_unchecked(&self, v: &Vertex) -> TreeAut {
        TreeAut {
            frame: self.frame.clone(),
            level: self.level + v.len(),
            word: self.section_word(v),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Label of `a` at `v`, i.e. the root permutation of `a|_v`.
    pub fn label(&self, v: &Vertex) -> Permutation {
        let word = self.section_word(v);
        let arity = self.frame.arity(self.level + v.len());
        let images = (0..arity)
            .map(|x| word.iter().fold(x, |y, g| g.root_image(y)) as u32)
            .collect();
        Permutation::from_images_unchecked(images)
    }

    pub fn portrait(&self, depth: usize) -> Portrait {
        let mut labels = BTreeMap::new();
        for n in 0..depth {
            for v in self.frame.valency.layer(self.level, n) {
                let p = self.label(&v);
                labels.insert(v, p);
            }
        }
        Portrait {
            level: self.level,
            depth,
            labels,
        }
    }

    /// Agreement of all labels at vertices of length `< depth`.
    pub fn equal_to_depth(&self, other: &TreeAut, depth: usize) -> Result<bool> {
        self.compatible(other)?;
        let mut frontier = vec![Vertex::root()];
        for n in 0..depth {
            let mut next = Vec::new();
            for v in frontier {
                let (a, b) = (self.section_word(&v), other.section_word(&v));
                if a == b {
                    continue;
                }
                if self.label(&v) != other.label(&v) {
                    return Ok(false);
                }
                if n + 1 < depth {
                    let arity = self.frame.arity(self.level + n);
                    next.extend((0..arity).map(|x| v.child(x)));
                }
            }
            frontier = next;
        }
        Ok(true)
    }

    /// `ins_v(a)` for `a` at level `m + |v|`; the result lives at level `m`.
    pub fn insert(v: &Vertex, a: &TreeAut) -> Result<TreeAut> {
        if v.len() > a.level {
            return Err(Error::LevelMismatch(a.level, v.len()));
        }
        let level = a.level - v.len();
        a.frame.valency.check_vertex(level, v)?;
        let word = a
            .word
            .iter()
            .filter_map(|g| Generator::inserted(v, g))
            .collect();
        Ok(Self::from_word(&a.frame, level, word))
    }

    /// Permutation induced on the layer of length `n`, vertices indexed lexicographically.
    pub fn layer_permutation(&self, n: usize) -> Permutation {
        let layer = self.frame.valency.layer(self.level, n);
        let images = layer
            .iter()
            .map(|v| self.frame.valency.index_of(self.level, &self.act_unchecked(v)) as u32)
            .collect();
        Permutation::from_images_unchecked(images)
    }
}

/// All labels of an automorphism at vertices of length `< depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Portrait {
    pub level: usize,
    pub depth: usize,
    pub labels: BTreeMap<Vertex, Permutation>,
}

impl Portrait {
    pub fn label(&self, v: &Vertex) -> Option<&Permutation> {
        self.labels.get(v)
    }

    pub fn truncate(&self, depth: usize) -> Portrait {
        Portrait {
            level: self.level,
            depth: depth.min(self.depth),
            labels: self
                .labels
                .iter()
                .filter(|(v, _)| v.len() < depth)
                .map(|(v, p)| (v.clone(), p.clone()))
                .collect(),
        }
    }

    /// Nested `{ "perm": …, "children": [ … ] }`, with `"…"` at depth-`d` nodes.
    pub fn to_json(&self) -> Value {
        self.node_json(&Vertex::root())
    }

    fn node_json(&self, v: &Vertex) -> Value {
        match self.labels.get(v) {
            None => Value::String("…".into()),
            Some(p) => {
                let children: Vec<Value> = if v.len() + 1 > self.depth {
                    Vec::new()
                } else {
                    (0..p.degree()).map(|x| self.node_json(&v.child(x))).collect()
                };
                json!({ "perm": p.to_string(), "children": children })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::Limits;

    fn cyc(s: &str) -> Permutation {
        Permutation::parse_cycles(s, 5).unwrap()
    }

    fn a5() -> PermutationGroup {
        PermutationGroup::bsgs(&[cyc("(0 1 2)"), cyc("(0 1 2 3 4)")]).unwrap()
    }

    fn diagonal_frame() -> Arc<TreeFrame> {
        let g = a5();
        let id = Homomorphism::new(&g, g.generators().to_vec(), Limits::default()).unwrap();
        TreeFrame::with_spine(
            ValencySequence::constant(5).unwrap(),
            Spine {
                ray: Ray(EventuallyPeriodic::constant(0)),
                spinal: SpinalSequence(EventuallyPeriodic::constant(1)),
                group: g,
                level_maps: EventuallyPeriodic::constant(Arc::new(id)),
            },
        )
    }

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    #[test]
    fn act_examples() {
        let f = diagonal_frame();
        let s = TreeAut::spinal(&f, 0, cyc("(0 1 2)")).unwrap();
        assert_eq!(s.act(&v("1.0")).unwrap(), v("1.1"));
        assert_eq!(TreeAut::identity(&f, 0).act(&v("2.3.4")).unwrap(), v("2.3.4"));
        let r = TreeAut::rooted(&f, 0, cyc("(0 1 2 3 4)")).unwrap();
        assert_eq!(r.act(&v("0.3")).unwrap(), v("1.3"));
        assert!(r.act(&v("5")).is_err());
    }

    #[test]
    fn section_examples() {
        let f = diagonal_frame();
        let g = cyc("(0 1 2)");
        let s = TreeAut::spinal(&f, 0, g.clone()).unwrap();
        let s0 = s.section(&v("0")).unwrap();
        assert_eq!(s0.word(), &[Generator::Spinal(g.clone())]);
        assert_eq!(s0.level(), 1);
        let s1 = s.section(&v("1")).unwrap();
        assert_eq!(s1.word(), &[Generator::Rooted(g.clone())]);
        assert!(s.section(&v("3")).unwrap().is_trivial_word());
    }

    #[test]
    fn portrait_examples() {
        let f = diagonal_frame();
        let id = TreeAut::identity(&f, 0).portrait(3);
        assert!(id.labels.values().all(Permutation::is_identity));
        assert_eq!(id.labels.len(), 1 + 5 + 25);
        let s = TreeAut::spinal(&f, 0, cyc("(0 1 2)")).unwrap().portrait(2);
        assert!(s.label(&Vertex::root()).unwrap().is_identity());
        assert!(s.label(&v("0")).unwrap().is_identity());
        assert_eq!(s.label(&v("1")).unwrap(), &cyc("(0 1 2)"));
        for x in 2..5 {
            assert!(s.label(&Vertex(vec![x])).unwrap().is_identity());
        }
        let p = cyc("(0 1 3)");
        let r = TreeAut::rooted(&f, 0, p.clone()).unwrap().portrait(5);
        assert_eq!(r.label(&Vertex::root()).unwrap(), &p);
        assert!(r.labels.iter().filter(|(v, _)| !v.is_root()).all(|(_, q)| q.is_identity()));
    }

    #[test]
    fn multiply_and_inverse() {
        let f = diagonal_frame();
        let a = TreeAut::spinal(&f, 0, cyc("(0 1 2)"))
            .unwrap()
            .multiply(&TreeAut::rooted(&f, 0, cyc("(0 2 4)")).unwrap())
            .unwrap();
        assert!(a.multiply(&a.inverse()).unwrap().is_trivial_word());
        let other = TreeAut::identity(&f, 1);
        assert!(matches!(a.multiply(&other), Err(Error::LevelMismatch(0, 1))));
    }

    #[test]
    fn spinal_product_law() {
        let f = diagonal_frame();
        let (g, h) = (cyc("(0 1 2)"), cyc("(0 1 2 3 4)"));
        let sg = TreeAut::spinal(&f, 0, g.clone()).unwrap();
        let sh = TreeAut::spinal(&f, 0, h.clone()).unwrap();
        let sgh = TreeAut::spinal(&f, 0, g.then(&h)).unwrap();
        // compare with the merge disabled: a word kept as two letters
        let split = TreeAut {
            frame: f.clone(),
            level: 0,
            word: Arc::new(vec![Generator::Spinal(g), Generator::Spinal(h)]),
            cache: Mutex::new(HashMap::new()),
        };
        assert!(split.equal_to_depth(&sgh, 6).unwrap());
        assert!(sg.multiply(&sh).unwrap().equal_to_depth(&sgh, 6).unwrap());
    }

    #[test]
    fn equal_to_depth_examples() {
        let f = diagonal_frame();
        let s = TreeAut::spinal(&f, 0, cyc("(0 1 2)")).unwrap();
        assert!(s.equal_to_depth(&s, 10).unwrap());
        assert!(!s.equal_to_depth(&TreeAut::identity(&f, 0), 2).unwrap());
        assert!(s.equal_to_depth(&TreeAut::identity(&f, 0), 1).unwrap());
    }

    #[test]
    fn insertion_examples() {
        let f = diagonal_frame();
        let a = TreeAut::spinal(&f, 2, cyc("(0 1 2 3 4)"))
            .unwrap()
            .multiply(&TreeAut::rooted(&f, 2, cyc("(1 2 3)")).unwrap())
            .unwrap();
        let at = v("3.1");
        let ins = TreeAut::insert(&at, &a).unwrap();
        assert_eq!(ins.level(), 0);
        assert!(ins.section(&at).unwrap().equal_to_depth(&a, 4).unwrap());
        for w in f.valency().layer(0, 2) {
            if w != at {
                assert!(ins.section(&w).unwrap().is_trivial_word());
            }
            assert_eq!(ins.act(&w).unwrap(), w);
        }
        let b = TreeAut::spinal(&f, 0, cyc("(0 1 2)")).unwrap();
        assert!(TreeAut::insert(&Vertex::root(), &b).unwrap().equal_to_depth(&b, 5).unwrap());
        assert!(TreeAut::insert(&v("0.0.0"), &a).is_err());
    }

    #[test]
    fn finitary_labels_algebra() {
        let l = FinitaryLabels::new([(v(""), cyc("(0 1)(2 3)")), (v("1"), cyc("(0 2 4)"))]);
        let inv = l.inverse();
        assert!(l.product(&inv).is_empty());
        assert_eq!(l.depth(), 2);
        assert_eq!(l.act(&v("1.0")), v("0.2"));
    }

    #[test]
    fn portrait_json_shape() {
        let f = diagonal_frame();
        let s = TreeAut::spinal(&f, 0, cyc("(0 1 2)")).unwrap();
        let j = s.portrait(2).to_json();
        assert_eq!(j["perm"], "()");
        assert_eq!(j["children"][1]["perm"], "(0 1 2)");
        assert_eq!(j["children"][1]["children"][0], "…");
    }
}
