//! Finite permutation groups backed by a base and strong generating set.
//!
//! The stabilizer chain is built with the deterministic Schreier–Sims
//! algorithm and explicit transversals; everything downstream (orders,
//! membership, subgroup enumeration, the coset actions used as τ-actions)
//! goes through it.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Bounds for the enumeration-based algorithms.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub order_bound: u128,
    pub index_bound: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            order_bound: 10_000,
            index_bound: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
struct StabLevel {
    base_point: usize,
    gens: Vec<Permutation>,
    orbit: Vec<usize>,
    // transversal[β] maps the base point to β
    transversal: Vec<Option<Permutation>>,
}

impl StabLevel {
    fn new(base_point: usize, gens: Vec<Permutation>, degree: usize) -> Self {
        let mut level = StabLevel {
            base_point,
            gens,
            orbit: Vec::new(),
            transversal: vec![None; degree],
        };
        level.rebuild_orbit(degree);
        level
    }

    fn rebuild_orbit(&mut self, degree: usize) {
        let mut transversal: Vec<Option<Permutation>> = vec![None; degree];
        transversal[self.base_point] = Some(Permutation::identity(degree));
        let mut orbit = vec![self.base_point];
        let mut k = 0;
        while k < orbit.len() {
            let beta = orbit[k];
            k += 1;
            for s in &self.gens {
                let gamma = s.image(beta);
                if transversal[gamma].is_none() {
                    let u = transversal[beta].as_ref().unwrap().then(s);
                    transversal[gamma] = Some(u);
                    orbit.push(gamma);
                }
            }
        }
        self.orbit = orbit;
        self.transversal = transversal;
    }
}

#[derive(Debug, Clone)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Permutation>,
    chain: Vec<StabLevel>,
    // `None` when the order does not fit in 128 bits
    order: Option<u128>,
}

impl PartialEq for PermutationGroup {
    fn eq(&self, other: &Self) -> bool {
        if self.degree != other.degree || self.order != other.order {
            return false;
        }
        let forward = other.generators.iter().all(|g| self.contains_unchecked(g));
        match self.order {
            Some(_) => forward,
            None => forward && self.generators.iter().all(|g| other.contains_unchecked(g)),
        }
    }
}

impl Eq for PermutationGroup {}

impl PermutationGroup {
    pub fn trivial(degree: usize) -> Self {
        PermutationGroup {
            degree,
            generators: Vec::new(),
            chain: Vec::new(),
            order: Some(1),
        }
    }

    /// Schreier–Sims on the given generators.
    pub fn bsgs(generators: &[Permutation]) -> Result<Self> {
        let degree = generators.first().ok_or(Error::EmptyGenerators)?.degree();
        Self::with_base(degree, generators, &[])
    }

    /// Schreier–Sims with an explicit degree, so an empty generator list is allowed.
    pub fn generated(degree: usize, generators: &[Permutation]) -> Result<Self> {
        Self::with_base(degree, generators, &[])
    }

    /// Schreier–Sims whose base starts with `base_prefix`.
    pub fn with_base(degree: usize, generators: &[Permutation], base_prefix: &[usize]) -> Result<Self> {
        for g in generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch(degree, g.degree()));
            }
        }
        for &b in base_prefix {
            if b >= degree {
                return Err(Error::PointOutOfRange { point: b, degree });
            }
        }
        let mut gens: Vec<Permutation> = Vec::new();
        for g in generators {
            if !g.is_identity() && !gens.contains(g) {
                gens.push(g.clone());
            }
        }
        let chain = schreier_sims(degree, &gens, base_prefix);
        let order = chain
            .iter()
            .try_fold(1u128, |acc, level| acc.checked_mul(level.orbit.len() as u128));
        Ok(PermutationGroup {
            degree,
            generators: generators.to_vec(),
            chain,
            order,
        })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// The group order, saturating at `u128::MAX`; see [`Self::exact_order`].
    pub fn order(&self) -> u128 {
        self.order.unwrap_or(u128::MAX)
    }

    pub fn exact_order(&self) -> Result<u128> {
        self.order.ok_or(Error::OrderOverflow)
    }

    pub fn is_trivial(&self) -> bool {
        self.order == Some(1)
    }

    pub fn identity(&self) -> Permutation {
        Permutation::identity(self.degree)
    }

    pub fn base(&self) -> Vec<usize> {
        self.chain.iter().map(|l| l.base_point).collect()
    }

    pub fn strong_generators(&self) -> Vec<Permutation> {
        let mut out: Vec<Permutation> = Vec::new();
        for level in &self.chain {
            for g in &level.gens {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
        }
        out
    }

    pub fn fundamental_orbit_lengths(&self) -> Vec<usize> {
        self.chain.iter().map(|l| l.orbit.len()).collect()
    }

    fn sift_from(&self, g: &Permutation, start: usize) -> (Permutation, usize) {
        sift(&self.chain, g.clone(), start)
    }

    fn contains_unchecked(&self, p: &Permutation) -> bool {
        let (res, j) = self.sift_from(p, 0);
        j == self.chain.len() && res.is_identity()
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool> {
        if p.degree() != self.degree {
            return Err(Error::DegreeMismatch(self.degree, p.degree()));
        }
        Ok(self.contains_unchecked(p))
    }

    /// True iff every generator of `other` lies in `self`.
    pub fn contains_group(&self, other: &PermutationGroup) -> bool {
        other.degree == self.degree && other.generators.iter().all(|g| self.contains_unchecked(g))
    }

    pub fn orbit(&self, point: usize) -> Result<Vec<usize>> {
        if point >= self.degree {
            return Err(Error::PointOutOfRange {
                point,
                degree: self.degree,
            });
        }
        Ok(orbit_of(&self.generators, self.degree, point))
    }

    pub fn is_transitive(&self) -> bool {
        orbit_of(&self.generators, self.degree, 0).len() == self.degree
    }

    pub fn is_regular(&self) -> bool {
        self.is_transitive() && self.order == Some(self.degree as u128)
    }

    pub fn point_stabilizer(&self, point: usize) -> Result<PermutationGroup> {
        let chain = Self::with_base(self.degree, &self.generators, &[point])?;
        let gens: Vec<Permutation> = match chain.chain.first() {
            Some(level) if level.base_point == point => chain
                .chain
                .get(1)
                .map(|l| l.gens.clone())
                .unwrap_or_default(),
            _ => chain.generators.clone(),
        };
        Self::generated(self.degree, &gens)
    }

    /// Group generated by `self` and the extra elements.
    pub fn extend(&self, extra: &[Permutation]) -> Result<PermutationGroup> {
        let mut gens = self.generators.clone();
        gens.extend(extra.iter().cloned());
        Self::generated(self.degree, &gens)
    }

    /// All elements in increasing image-list order.
    pub fn elements(&self, limits: Limits) -> Result<Vec<Permutation>> {
        if self.order() > limits.order_bound {
            return Err(Error::OrderBound {
                order: self.order(),
                bound: limits.order_bound,
            });
        }
        let mut out = vec![self.identity()];
        for level in self.chain.iter().rev() {
            let reps: Vec<&Permutation> = level
                .orbit
                .iter()
                .map(|&b| level.transversal[b].as_ref().unwrap())
                .collect();
            let mut next = Vec::with_capacity(out.len() * reps.len());
            for g in &out {
                for u in &reps {
                    next.push(g.then(u));
                }
            }
            out = next;
        }
        out.sort();
        Ok(out)
    }

    /// Normal closure of `gens` in `self`.
    pub fn normal_closure(&self, gens: &[Permutation]) -> Result<PermutationGroup> {
        let mut closure = Self::generated(self.degree, gens)?;
        loop {
            let mut added = false;
            let current: Vec<Permutation> = closure.generators.clone();
            'scan: for n in &current {
                for g in &self.generators {
                    let c = n.conjugate_by(g);
                    if !closure.contains_unchecked(&c) {
                        closure = closure.extend(&[c])?;
                        added = true;
                        break 'scan;
                    }
                }
            }
            if !added {
                return Ok(closure);
            }
        }
    }

    pub fn derived_subgroup(&self) -> Result<PermutationGroup> {
        let mut comms = Vec::new();
        for a in &self.generators {
            for b in &self.generators {
                let c = a.commutator(b);
                if !c.is_identity() {
                    comms.push(c);
                }
            }
        }
        self.normal_closure(&comms)
    }

    pub fn is_perfect(&self) -> Result<bool> {
        Ok(self.derived_subgroup()?.contains_group(self))
    }

    pub fn is_normal_subgroup(&self, h: &PermutationGroup) -> bool {
        h.generators.iter().all(|x| {
            self.generators
                .iter()
                .all(|g| h.contains_unchecked(&x.conjugate_by(g)))
        })
    }

    fn check_subgroup(&self, h: &PermutationGroup) -> Result<()> {
        if h.degree != self.degree {
            return Err(Error::DegreeMismatch(self.degree, h.degree));
        }
        if !self.contains_group(h) {
            return Err(Error::NotASubgroup("H is not contained in G".into()));
        }
        Ok(())
    }

    /// Shortest words in the generators (and their inverses) for every element.
    pub fn generator_words(&self, limits: Limits) -> Result<GeneratorWords> {
        GeneratorWords::new(self, limits)
    }
}

fn orbit_of(gens: &[Permutation], degree: usize, point: usize) -> Vec<usize> {
    let mut seen = vec![false; degree];
    seen[point] = true;
    let mut orbit = vec![point];
    let mut k = 0;
    while k < orbit.len() {
        let beta = orbit[k];
        k += 1;
        for s in gens {
            let gamma = s.image(beta);
            if !seen[gamma] {
                seen[gamma] = true;
                orbit.push(gamma);
            }
        }
    }
    orbit.sort_unstable();
    orbit
}

fn sift(chain: &[StabLevel], mut g: Permutation, start: usize) -> (Permutation, usize) {
    for (i, level) in chain.iter().enumerate().skip(start) {
        let beta = g.image(level.base_point);
        match &level.transversal[beta] {
            Some(u) => g = g.then(&u.inverse()),
            None => return (g, i),
        }
    }
    (g, chain.len())
}

fn schreier_sims(degree: usize, gens: &[Permutation], base_prefix: &[usize]) -> Vec<StabLevel> {
    let mut base: Vec<usize> = base_prefix.to_vec();
    for g in gens {
        if base.iter().all(|&b| g.image(b) == b) {
            if let Some(p) = g.first_moved_point() {
                base.push(p);
            }
        }
    }
    let mut chain: Vec<StabLevel> = Vec::new();
    for i in 0..base.len() {
        let level_gens: Vec<Permutation> = gens
            .iter()
            .filter(|g| base[..i].iter().all(|&b| g.image(b) == b))
            .cloned()
            .collect();
        chain.push(StabLevel::new(base[i], level_gens, degree));
    }
    // checked[i] records Schreier generators of level i already known to sift.
    let mut checked: Vec<HashSet<(usize, usize)>> = vec![HashSet::new(); chain.len()];
    let mut i = chain.len() as isize - 1;
    while i >= 0 {
        let li = i as usize;
        let mut jumped = None;
        'scan: for oi in 0..chain[li].orbit.len() {
            let beta = chain[li].orbit[oi];
            for si in 0..chain[li].gens.len() {
                if checked[li].contains(&(beta, si)) {
                    continue;
                }
                let s = &chain[li].gens[si];
                let u_beta = chain[li].transversal[beta].as_ref().unwrap();
                let gamma = s.image(beta);
                let u_gamma = chain[li].transversal[gamma].as_ref().unwrap();
                let h = u_beta.then(s).then(&u_gamma.inverse());
                if h.is_identity() {
                    checked[li].insert((beta, si));
                    continue;
                }
                let (res, j) = sift(&chain, h, li + 1);
                if j < chain.len() || !res.is_identity() {
                    if j == chain.len() {
                        let p = res.first_moved_point().expect("non-identity residue");
                        chain.push(StabLevel::new(p, Vec::new(), degree));
                        checked.push(HashSet::new());
                    }
                    for l in li + 1..=j {
                        chain[l].gens.push(res.clone());
                        chain[l].rebuild_orbit(degree);
                        // transversals may have changed
                        checked[l].clear();
                    }
                    jumped = Some(j);
                    break 'scan;
                }
                checked[li].insert((beta, si));
            }
        }
        match jumped {
            Some(j) => i = j as isize,
            None => i -= 1,
        }
    }
    chain
}

/// Shortest generator words for all elements of a small group, via BFS on the
/// Cayley graph with generators and their inverses.
#[derive(Debug, Clone)]
pub struct GeneratorWords {
    // element -> (parent, generator index, inverted)
    parent: HashMap<Permutation, Option<(Permutation, usize, bool)>>,
}

impl GeneratorWords {
    fn new(group: &PermutationGroup, limits: Limits) -> Result<Self> {
        if group.order() > limits.order_bound {
            return Err(Error::OrderBound {
                order: group.order(),
                bound: limits.order_bound,
            });
        }
        let gens = group.generators();
        let invs: Vec<Permutation> = gens.iter().map(|g| g.inverse()).collect();
        let mut parent = HashMap::new();
        let id = group.identity();
        parent.insert(id.clone(), None);
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for (k, g) in gens.iter().enumerate() {
                for (inv, step) in [(false, g), (true, &invs[k])] {
                    let y = x.then(step);
                    if !parent.contains_key(&y) {
                        parent.insert(y.clone(), Some((x.clone(), k, inv)));
                        queue.push_back(y);
                    }
                }
            }
        }
        Ok(GeneratorWords { parent })
    }

    /// `(generator index, inverted)` letters whose left-to-right product is `g`.
    pub fn word(&self, g: &Permutation) -> Option<Vec<(usize, bool)>> {
        let mut out = Vec::new();
        let mut cur = g;
        loop {
            match self.parent.get(cur)? {
                None => break,
                Some((p, k, inv)) => {
                    out.push((*k, *inv));
                    cur = p;
                }
            }
        }
        out.reverse();
        Some(out)
    }
}

/// A homomorphism from a permutation group, given by generator images and
/// tabulated on every element.
#[derive(Debug, Clone)]
pub struct Homomorphism {
    source: PermutationGroup,
    target_degree: usize,
    images: Vec<Permutation>,
    table: HashMap<Permutation, Permutation>,
}

impl Homomorphism {
    /// Tabulates the map by BFS over the Cayley graph; any inconsistency on an
    /// edge means the generator images do not define a homomorphism.
    pub fn new(source: &PermutationGroup, images: Vec<Permutation>, limits: Limits) -> Result<Self> {
        if images.len() != source.generators().len() {
            return Err(Error::NotHomomorphism(format!(
                "{} images for {} generators",
                images.len(),
                source.generators().len()
            )));
        }
        let target_degree = match images.first() {
            Some(p) => p.degree(),
            None => 1,
        };
        for p in &images {
            if p.degree() != target_degree {
                return Err(Error::DegreeMismatch(target_degree, p.degree()));
            }
        }
        if source.order() > limits.order_bound {
            return Err(Error::OrderBound {
                order: source.order(),
                bound: limits.order_bound,
            });
        }
        let mut table: HashMap<Permutation, Permutation> = HashMap::new();
        let id = source.identity();
        table.insert(id.clone(), Permutation::identity(target_degree));
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            let fx = table[&x].clone();
            for (g, fg) in source.generators().iter().zip(&images) {
                let y = x.then(g);
                let fy = fx.then(fg);
                match table.get(&y) {
                    Some(existing) if *existing != fy => {
                        return Err(Error::NotHomomorphism(format!(
                            "{y} would map to both {existing} and {fy}"
                        )))
                    }
                    Some(_) => {}
                    None => {
                        table.insert(y.clone(), fy);
                        queue.push_back(y);
                    }
                }
            }
        }
        Ok(Homomorphism {
            source: source.clone(),
            target_degree,
            images,
            table,
        })
    }

    pub fn source(&self) -> &PermutationGroup {
        &self.source
    }

    pub fn images(&self) -> &[Permutation] {
        &self.images
    }

    pub fn target_degree(&self) -> usize {
        self.target_degree
    }

    pub fn apply(&self, g: &Permutation) -> Option<&Permutation> {
        self.table.get(g)
    }

    pub fn image_group(&self) -> Result<PermutationGroup> {
        PermutationGroup::generated(self.target_degree, &self.images)
    }

    pub fn kernel(&self) -> Vec<Permutation> {
        let mut k: Vec<Permutation> = self
            .table
            .iter()
            .filter(|(_, v)| v.is_identity())
            .map(|(g, _)| g.clone())
            .collect();
        k.sort();
        k
    }

    pub fn is_injective(&self) -> bool {
        self.table.values().filter(|v| v.is_identity()).count() == 1
    }
}

/// A transitive permutation action of `source` on `point_count` points.
#[derive(Debug, Clone)]
pub struct TauAction {
    hom: Homomorphism,
}

impl TauAction {
    pub fn new(source: &PermutationGroup, images: Vec<Permutation>, limits: Limits) -> Result<Self> {
        Ok(TauAction {
            hom: Homomorphism::new(source, images, limits)?,
        })
    }

    /// The identity action of a group on its own points.
    pub fn natural(source: &PermutationGroup, limits: Limits) -> Result<Self> {
        Self::new(source, source.generators().to_vec(), limits)
    }

    pub fn source(&self) -> &PermutationGroup {
        self.hom.source()
    }

    pub fn point_count(&self) -> usize {
        self.hom.target_degree()
    }

    pub fn images(&self) -> &[Permutation] {
        self.hom.images()
    }

    pub fn apply(&self, g: &Permutation) -> Option<&Permutation> {
        self.hom.apply(g)
    }

    pub fn image_group(&self) -> Result<PermutationGroup> {
        self.hom.image_group()
    }

    pub fn is_faithful(&self) -> bool {
        self.hom.is_injective()
    }

    pub fn is_transitive(&self) -> Result<bool> {
        Ok(self.image_group()?.is_transitive())
    }

    pub fn is_regular(&self) -> Result<bool> {
        Ok(self.image_group()?.is_regular())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Members(Vec<u64>);

impl Members {
    fn empty(n: usize) -> Self {
        Members(vec![0; n.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, i % 64);
        let fresh = self.0[w] & (1 << b) == 0;
        self.0[w] |= 1 << b;
        fresh
    }
    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn is_subset(&self, other: &Members) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits & (1u64 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

const TABLE_LIMIT: usize = 6000;

/// Indexed elements of a small group with a multiplication table.
#[derive(Debug, Clone)]
pub struct ElementTable {
    elements: Vec<Permutation>,
    index: HashMap<Permutation, u32>,
    mul: Option<Vec<u32>>,
    inv: Vec<u32>,
}

impl ElementTable {
    pub fn new(group: &PermutationGroup, limits: Limits) -> Result<Self> {
        let elements = group.elements(limits)?;
        let index: HashMap<Permutation, u32> = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i as u32))
            .collect();
        let n = elements.len();
        let inv = elements.iter().map(|g| index[&g.inverse()]).collect();
        let mul = (n <= TABLE_LIMIT).then(|| {
            let mut t = Vec::with_capacity(n * n);
            for a in &elements {
                for b in &elements {
                    t.push(index[&a.then(b)]);
                }
            }
            t
        });
        Ok(ElementTable {
            elements,
            index,
            mul,
            inv,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn index_of(&self, g: &Permutation) -> Option<usize> {
        self.index.get(g).map(|&i| i as usize)
    }

    #[inline]
    fn mul(&self, a: usize, b: usize) -> usize {
        match &self.mul {
            Some(t) => t[a * self.elements.len() + b] as usize,
            None => self.index[&self.elements[a].then(&self.elements[b])] as usize,
        }
    }

    fn conj(&self, a: usize, by: usize) -> usize {
        self.mul(self.mul(self.inv[by] as usize, a), by)
    }

    fn closure(&self, gens: &[usize]) -> Members {
        let mut m = Members::empty(self.len());
        let id = 0; // the identity sorts first
        m.insert(id);
        let mut queue = vec![id];
        while let Some(x) = queue.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if m.insert(y) {
                    queue.push(y);
                }
            }
        }
        m
    }
}

/// A subgroup found by the enumeration, with its element set.
#[derive(Debug, Clone)]
pub struct EnumeratedSubgroup {
    pub group: PermutationGroup,
    members: Members,
}

impl EnumeratedSubgroup {
    pub fn order(&self) -> u128 {
        self.group.order()
    }
}

/// All subgroups `⟨a, b⟩` of a small group, in discovery order over pairs
/// `a ≤ b` of the sorted element list.
#[derive(Debug, Clone)]
pub struct SubgroupLattice {
    group: PermutationGroup,
    table: ElementTable,
    subgroups: Vec<EnumeratedSubgroup>,
}

impl SubgroupLattice {
    pub fn new(group: &PermutationGroup, limits: Limits) -> Result<Self> {
        let table = ElementTable::new(group, limits)?;
        let n = table.len();
        let cyclic: Vec<Members> = (0..n).map(|a| table.closure(&[a])).collect();
        let mut seen: HashMap<Members, usize> = HashMap::new();
        let mut found: Vec<(Members, Vec<usize>)> = Vec::new();
        for a in 0..n {
            for b in a..n {
                let gens = if b == a {
                    vec![a]
                } else {
                    if cyclic[a].contains(b) || cyclic[b].contains(a) {
                        continue;
                    }
                    vec![a, b]
                };
                let m = if b == a { cyclic[a].clone() } else { table.closure(&gens) };
                if !seen.contains_key(&m) {
                    seen.insert(m.clone(), found.len());
                    found.push((m, gens));
                }
            }
        }
        let subgroups = found
            .into_iter()
            .map(|(members, gens)| {
                let perms: Vec<Permutation> = gens
                    .iter()
                    .map(|&i| table.elements[i].clone())
                    .filter(|p| !p.is_identity())
                    .collect();
                let group = PermutationGroup::generated(group.degree(), &perms)?;
                debug_assert_eq!(group.order() as usize, members.count());
                Ok(EnumeratedSubgroup { group, members })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SubgroupLattice {
            group: group.clone(),
            table,
            subgroups,
        })
    }

    pub fn group(&self) -> &PermutationGroup {
        &self.group
    }

    pub fn elements(&self) -> &[Permutation] {
        self.table.elements()
    }

    pub fn subgroups(&self) -> &[EnumeratedSubgroup] {
        &self.subgroups
    }

    fn is_proper(&self, s: &EnumeratedSubgroup) -> bool {
        s.order() < self.group.order()
    }

    /// Proper subgroups with no enumerated subgroup strictly between them and G.
    pub fn maximal(&self) -> Vec<&EnumeratedSubgroup> {
        self.subgroups
            .iter()
            .filter(|h| self.is_proper(h))
            .filter(|h| {
                !self.subgroups.iter().any(|k| {
                    self.is_proper(k) && k.order() > h.order() && h.members.is_subset(&k.members)
                })
            })
            .collect()
    }

    pub fn is_normal(&self, h: &EnumeratedSubgroup) -> bool {
        let gens: Vec<usize> = self
            .group
            .generators()
            .iter()
            .filter_map(|g| self.table.index_of(g))
            .collect();
        h.members
            .iter()
            .all(|x| gens.iter().all(|&g| h.members.contains(self.table.conj(x, g))))
    }

    pub fn non_normal_maximal(&self) -> Vec<&EnumeratedSubgroup> {
        self.maximal().into_iter().filter(|h| !self.is_normal(h)).collect()
    }

    /// Largest normal subgroup of G inside `h`, as an element set.
    fn core_members(&self, h: &Members) -> Members {
        let gens: Vec<usize> = self
            .group
            .generators()
            .iter()
            .filter_map(|g| self.table.index_of(g))
            .collect();
        let mut core = h.clone();
        loop {
            let mut next = core.clone();
            for &g in &gens {
                let mut keep = Members::empty(self.table.len());
                for x in next.iter() {
                    if core.contains(self.table.conj(x, g)) {
                        keep.insert(x);
                    }
                }
                next = keep;
            }
            if next == core {
                return core;
            }
            core = next;
        }
    }

    pub fn is_core_free(&self, h: &EnumeratedSubgroup) -> bool {
        self.core_members(&h.members).count() == 1
    }
}

pub fn subgroups_2gen(g: &PermutationGroup, limits: Limits) -> Result<Vec<PermutationGroup>> {
    Ok(SubgroupLattice::new(g, limits)?
        .subgroups
        .into_iter()
        .map(|s| s.group)
        .collect())
}

pub fn maximal_subgroups(g: &PermutationGroup, limits: Limits) -> Result<Vec<PermutationGroup>> {
    let lattice = SubgroupLattice::new(g, limits)?;
    Ok(lattice.maximal().into_iter().map(|s| s.group.clone()).collect())
}

pub fn non_normal_maximal(g: &PermutationGroup, limits: Limits) -> Result<Vec<PermutationGroup>> {
    let lattice = SubgroupLattice::new(g, limits)?;
    Ok(lattice
        .non_normal_maximal()
        .into_iter()
        .map(|s| s.group.clone())
        .collect())
}

/// `{g ∈ G : H^g = H}`.
pub fn normalizer(g: &PermutationGroup, h: &PermutationGroup, limits: Limits) -> Result<PermutationGroup> {
    g.check_subgroup(h)?;
    let mut norm = PermutationGroup::trivial(g.degree());
    for x in g.elements(limits)? {
        if norm.contains_unchecked(&x) {
            continue;
        }
        if h.generators().iter().all(|y| h.contains_unchecked(&y.conjugate_by(&x))) {
            norm = norm.extend(&[x])?;
        }
    }
    Ok(norm)
}

/// Largest normal subgroup of `g` contained in `h`.
pub fn core(g: &PermutationGroup, h: &PermutationGroup, limits: Limits) -> Result<PermutationGroup> {
    let action = coset_action(g, h, limits)?;
    let mut core = PermutationGroup::trivial(g.degree());
    for x in h.elements(limits)? {
        if !core.contains_unchecked(&x) && action.apply(&x).is_some_and(|p| p.is_identity()) {
            core = core.extend(&[x])?;
        }
    }
    Ok(core)
}

/// Action of `g` on the right cosets `Hx`, ordered by their least elements.
pub fn coset_action(g: &PermutationGroup, h: &PermutationGroup, limits: Limits) -> Result<TauAction> {
    g.check_subgroup(h)?;
    let index = g.order() / h.order();
    if index > limits.index_bound {
        return Err(Error::IndexOverflow {
            index,
            bound: limits.index_bound,
        });
    }
    let elements = g.elements(limits)?;
    let h_elements = h.elements(limits)?;
    let mut coset_of: HashMap<Permutation, usize> = HashMap::new();
    let mut reps: Vec<Permutation> = Vec::new();
    for x in &elements {
        if coset_of.contains_key(x) {
            continue;
        }
        let c = reps.len();
        reps.push(x.clone());
        for y in &h_elements {
            coset_of.insert(y.then(x), c);
        }
    }
    let images = g
        .generators()
        .iter()
        .map(|s| {
            let imgs = reps.iter().map(|r| coset_of[&r.then(s)]).collect();
            Permutation::from_images(imgs)
        })
        .collect::<Result<Vec<_>>>()?;
    TauAction::new(g, images, limits)
}

/// A faithful, transitive, non-regular action of least degree on the cosets
/// of some 2-generated core-free subgroup `1 < H < G`.
pub fn tau_action(g: &PermutationGroup, limits: Limits) -> Result<TauAction> {
    let lattice = SubgroupLattice::new(g, limits)?;
    let mut best: Option<&EnumeratedSubgroup> = None;
    for h in lattice.subgroups() {
        if h.order() <= 1 || h.order() >= g.order() || !lattice.is_core_free(h) {
            continue;
        }
        // first in enumeration order wins ties
        if best.is_none_or(|b| h.order() > b.order()) {
            best = Some(h);
        }
    }
    let best = best.ok_or(Error::TauSearchExhausted)?;
    coset_action(g, &best.group, limits)
}
