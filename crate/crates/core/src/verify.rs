//! Finite-depth replays of the structural claims about `Γ` and `Δ(H)`, each
//! producing a report of pass/fail checks with re-computable certificates.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::construction::{delta, invert_word, is_proper_delta, DeltaSpec, GammaSpec, Letter, Membership};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::permgroup::{non_normal_maximal, normalizer, PermutationGroup};
use crate::tree::Vertex;
use crate::treeaut::{Generator, TreeAut};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub description: String,
    pub status: Status,
    pub certificate: Value,
}

impl Check {
    pub fn new(description: impl Into<String>, ok: bool, certificate: Value) -> Self {
        Check {
            description: description.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            certificate,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub scenario_digest: String,
    pub depths: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, spec: &GammaSpec, depths: &[(&str, usize)]) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            scenario_digest: scenario_digest(spec),
            depths: depths.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            scope: None,
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serialises")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let passed = self.checks.iter().filter(|c| c.passed()).count();
        let _ = writeln!(
            out,
            "suite {}: {} ({}/{} checks passed)",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            passed,
            self.checks.len()
        );
        if let Some(scope) = &self.scope {
            let _ = writeln!(out, "  scope: {scope}");
        }
        for c in &self.checks {
            let tag = if c.passed() { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "  [{tag}] {}", c.description);
            if !c.passed() {
                let _ = writeln!(out, "         {}", c.certificate);
            }
        }
        out
    }
}

/// SHA-256 of the canonical description of the defining data.
pub fn scenario_digest(spec: &GammaSpec) -> String {
    let text = serde_json::to_string(&spec.describe()).expect("description serialises");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Depths used by the suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub portrait_depth: usize,
    pub quotient_depth: usize,
    pub layered_levels: usize,
    pub max_depth: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            portrait_depth: 4,
            quotient_depth: 2,
            layered_levels: 3,
            max_depth: 6,
        }
    }
}

fn perm_strings(ps: &[Permutation]) -> Vec<String> {
    ps.iter().map(|p| p.to_string()).collect()
}

/// Action of `gens` on the layer of length `n`.
pub fn layer_action(spec: &GammaSpec, gens: &[TreeAut], n: usize) -> Result<PermutationGroup> {
    let size = spec.valency().layer_size(n);
    let perms: Vec<Permutation> = gens.par_iter().map(|g| g.layer_permutation(n)).collect();
    PermutationGroup::generated(size as usize, &perms)
}

/// `|Aut_𝔖(T) mod St(d)| = ∏_{n<d} |τ(S_n)|^{|𝓛(n)|}`, if it fits.
pub fn wreath_order(spec: &GammaSpec, d: usize) -> Option<u128> {
    let mut order: u128 = 1;
    for n in 0..d {
        let base = spec.level_group(n).group.order();
        let count = spec.valency().layer_size(n);
        for _ in 0..count {
            order = order.checked_mul(base)?;
        }
    }
    Some(order)
}

fn orbit_size(perms: &[Permutation], degree: usize, start: usize) -> usize {
    let mut seen = vec![false; degree];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(x) = queue.pop_front() {
        for p in perms {
            let y = p.image(x);
            if !seen[y] {
                seen[y] = true;
                count += 1;
                queue.push_back(y);
            }
        }
    }
    count
}

pub fn verify_spherical(spec: &GammaSpec, d: usize, config: &VerifyConfig) -> Result<SuiteReport> {
    if d > config.max_depth {
        return Err(Error::Precondition(format!("depth {d} exceeds the bound {}", config.max_depth)));
    }
    let mut report = SuiteReport::new("spherical", spec, &[("depth", d)]);
    let gens = spec.generators();
    for n in 1..=d {
        let size = spec.valency().layer_size(n) as usize;
        let perms: Vec<Permutation> = gens.par_iter().map(|g| g.layer_permutation(n)).collect();
        let orbit = orbit_size(&perms, size, 0);
        report.checks.push(Check::new(
            format!("layer {n} is a single orbit"),
            orbit == size,
            json!({ "layer": n, "orbit_size": orbit, "layer_size": size }),
        ));
    }
    Ok(report)
}

/// `[s_g, s_h^s] = ins_{x₁}([g.ρ₁, h.ρ₁])` for one admissible `s`.
pub fn rist_identity(spec: &GammaSpec, g: &Permutation, h: &Permutation, s: &Permutation, d: usize) -> Result<Vec<Check>> {
    let frame = spec.frame();
    let u1 = spec.ray().step(0);
    let x1 = spec.spinal().step(0);
    if s.image(x1) != x1 || s.image(u1) == u1 {
        return Err(Error::Precondition(format!("{s} is not in st(x₁) ∖ st(u₁)")));
    }
    if !spec.level_group(0).group.contains(s)? {
        return Err(Error::Precondition(format!("{s} is not in τ(S_0)")));
    }
    let sg = spec.spinal_at(0, g);
    let sh = spec.spinal_at(0, h);
    let rs = TreeAut::rooted(frame, 0, s.clone())?;
    let lhs = sg.commutator(&sh.conjugate(&rs)?)?;
    let action = &spec.rep().component(1).action;
    let (gl, hl) = (action.apply(g).unwrap(), action.apply(h).unwrap());
    let label = gl.commutator(hl);
    let rhs = TreeAut::insert(&Vertex(vec![x1]), &TreeAut::rooted(frame, 1, label.clone())?)?;
    let cert = json!({ "g": g.to_string(), "h": h.to_string(), "s": s.to_string(), "label": label.to_string() });
    let mut checks = vec![Check::new(
        format!("[s_{g}, s_{h}^{s}] = ins_x1({label}) to depth {d}"),
        lhs.equal_to_depth(&rhs, d)? && spec.exact_equal(&lhs, &rhs)?,
        cert.clone(),
    )];
    let mut trivial_elsewhere = true;
    let mut u1_trivial = true;
    for y in 0..frame.arity(0) {
        if y == x1 {
            continue;
        }
        let sec = lhs.section(&Vertex(vec![y]))?;
        let ok = sec.equal_to_depth(&TreeAut::identity(frame, 1), d.saturating_sub(1))? && spec.is_identity(&sec)?;
        if y == u1 {
            u1_trivial = ok;
        } else {
            trivial_elsewhere &= ok;
        }
    }
    checks.push(Check::new(format!("section at u1 trivial for s = {s}"), u1_trivial, cert.clone()));
    checks.push(Check::new(
        format!("sections off {{u1, x1}} trivial for s = {s}"),
        trivial_elsewhere,
        cert,
    ));
    Ok(checks)
}

/// All admissible `s ∈ st(x₁) ∖ st(u₁)` in `τ(S_0)`, in increasing order.
pub fn admissible_conjugators(spec: &GammaSpec) -> Result<Vec<Permutation>> {
    let u1 = spec.ray().step(0);
    let x1 = spec.spinal().step(0);
    Ok(spec
        .level_group(0)
        .group
        .elements(spec.limits())?
        .into_iter()
        .filter(|s| s.image(x1) == x1 && s.image(u1) != u1)
        .collect())
}

pub fn verify_rist_witness(spec: &GammaSpec, d: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("rist", spec, &[("depth", d)]);
    let gens = spec.group().generators().to_vec();
    let ss = admissible_conjugators(spec)?;
    let mut jobs = Vec::new();
    for g in &gens {
        for h in &gens {
            for s in &ss {
                jobs.push((g, h, s));
            }
        }
    }
    let results: Vec<Result<Vec<Check>>> = jobs.par_iter().map(|(g, h, s)| rist_identity(spec, g, h, s, d)).collect();
    report.checks.push(Check::new(
        "admissible conjugators exist",
        !ss.is_empty(),
        json!({ "count": ss.len(), "conjugators": perm_strings(&ss) }),
    ));
    for r in results {
        report.checks.extend(r?);
    }
    Ok(report)
}

/// `ins_{u_n}(h|_{u_n})⁻¹ · h`.
pub fn layered_difference(spec: &GammaSpec, h: &TreeAut, n: usize) -> Result<TreeAut> {
    let u = spec.spine_vertex(n);
    TreeAut::insert(&u, &h.section(&u)?.inverse())?.multiply(h)
}

pub fn verify_layered_witness(spec: &GammaSpec, n_max: usize, d: usize) -> Result<SuiteReport> {
    if n_max + 1 > d {
        return Err(Error::Precondition(format!("need n_max ≤ d − 1, got n_max = {n_max}, d = {d}")));
    }
    let mut report = SuiteReport::new("layered", spec, &[("n_max", n_max), ("depth", d)]);
    for (i, h) in spec.spinal_generators().iter().enumerate() {
        for n in 0..=n_max {
            let x = layered_difference(spec, h, n)?;
            let c = spec.classify(&x)?;
            let labels = spec.finitary_labels(&x)?;
            let depth = labels.as_ref().map(|l| l.depth());
            let agrees = match &labels {
                Some(l) => x.equal_to_depth(&spec.element_of_labels(l)?, d)?,
                None => false,
            };
            report.checks.push(Check::new(
                format!("ins_u{n}(h|u{n})^-1 h finitary of depth ≤ {} for h = sG{}", n + 1, i + 1),
                c.is_finitary() && depth.is_some_and(|k| k <= n + 1) && agrees,
                json!({ "generator": i + 1, "n": n, "k": c.depth, "finitary_depth": depth }),
            ));
        }
    }
    Ok(report)
}

pub fn verify_fin_in_gamma(spec: &GammaSpec, d: usize, config: &VerifyConfig) -> Result<SuiteReport> {
    if d > config.quotient_depth {
        return Err(Error::Precondition(format!("quotient depth {d} exceeds {}", config.quotient_depth)));
    }
    let mut report = SuiteReport::new("fin", spec, &[("depth", d)]);
    for n in 1..=d {
        let quotient = layer_action(spec, &spec.generators(), n)?;
        let order = quotient.exact_order()?;
        let expected = wreath_order(spec, n).ok_or(Error::OrderOverflow)?;
        report.checks.push(Check::new(
            format!("|Γ mod St({n})| equals the iterated wreath order"),
            order == expected,
            json!({ "level": n, "order": order.to_string(), "wreath_order": expected.to_string() }),
        ));
        let fin = spec.fin_generators(n);
        let missing = fin
            .iter()
            .map(|f| f.layer_permutation(n))
            .filter(|p| !quotient.contains(p).unwrap_or(false))
            .count();
        report.checks.push(Check::new(
            format!("Fin generators of depth {n} lie in Γ mod St({n})"),
            missing == 0,
            json!({ "level": n, "fin_generators": fin.len(), "missing": missing }),
        ));
    }
    Ok(report)
}

fn first_outside(m: &PermutationGroup, other: &PermutationGroup, spec: &GammaSpec) -> Result<Option<Permutation>> {
    for x in m.elements(spec.limits())? {
        if !other.contains(&x)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

pub fn verify_injectivity(spec: &GammaSpec) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("injectivity", spec, &[]);
    let maxes = non_normal_maximal(spec.group(), spec.limits())?;
    report.checks.push(Check::new(
        "Max(G) enumerated",
        !maxes.is_empty(),
        json!({ "count": maxes.len(), "orders": maxes.iter().map(|m| m.order().to_string()).collect::<Vec<_>>() }),
    ));
    let deltas = maxes.iter().map(|m| delta(spec, m)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..maxes.len())
        .flat_map(|i| (0..maxes.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let checks: Vec<Result<Check>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let m = first_outside(&maxes[i], &maxes[j], spec)?
                .ok_or_else(|| Error::Precondition(format!("M{i} ⊆ M{j}")))?;
            let w = spec.spinal_at(0, &m);
            let answer = deltas[j].member(&w)?;
            let (ok, cert) = match &answer {
                Membership::No(n) => (
                    n.verify(&deltas[j], &w)?,
                    json!({ "M": i, "M_prime": j, "m": m.to_string(), "vertex": n.vertex.to_string(), "component": n.component.to_string() }),
                ),
                other => (false, json!({ "M": i, "M_prime": j, "m": m.to_string(), "answer": other.to_json() })),
            };
            Ok(Check::new(format!("s_m ∉ Δ(M{j}) for m ∈ M{i} ∖ M{j}"), ok, cert))
        })
        .collect();
    for c in checks {
        report.checks.push(c?);
    }
    Ok(report)
}

/// Properness of `Δ(M)` for every `M ∈ Max(G)` and for the extra subgroups given.
pub fn verify_properness(spec: &GammaSpec, extra: &[PermutationGroup]) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("properness", spec, &[]);
    let mut subgroups = non_normal_maximal(spec.group(), spec.limits())?;
    subgroups.extend(extra.iter().cloned());
    for (i, h) in subgroups.iter().enumerate() {
        let p = is_proper_delta(spec, h)?;
        let expected = h.order() < spec.group().order();
        let witness_ok = match &p.witness {
            Some(w) => spec.group().contains(w)? && !h.contains(w)?,
            None => !expected,
        };
        report.checks.push(Check::new(
            format!("Δ(H{i}) proper iff H{i} < G"),
            p.proper == expected && witness_ok,
            json!({
                "index": i,
                "order": h.order().to_string(),
                "proper": p.proper,
                "witness": p.witness.as_ref().map(|w| w.to_string()),
            }),
        ));
    }
    Ok(report)
}

/// Precomputed data for replaying maximality of `Δ(M)`.
pub struct Walkthrough {
    spec: GammaSpec,
    delta: DeltaSpec,
    elements: Vec<Permutation>,
    normalizer_order: u128,
}

const WALKTHROUGH_SCOPE: &str = "certifies the constructive steps of the maximality argument for the given element; \
maximality itself quantifies over all subgroups of an infinite group and is not checked";

impl Walkthrough {
    /// Requires `M` to be a non-normal maximal subgroup of `G`.
    pub fn new(spec: &GammaSpec, m: &PermutationGroup) -> Result<Self> {
        let g = spec.group();
        let limits = spec.limits();
        if !g.contains_group(m) || m.order() >= g.order() {
            return Err(Error::Precondition("M must be a proper subgroup of G".into()));
        }
        if g.is_normal_subgroup(m) {
            return Err(Error::Precondition("M is normal in G".into()));
        }
        for x in g.elements(limits)? {
            if !m.contains(&x)? && m.extend(std::slice::from_ref(&x))?.order() != g.order() {
                return Err(Error::Precondition(format!("M is not maximal: ⟨M, {x}⟩ < G")));
            }
        }
        Ok(Walkthrough {
            spec: spec.clone(),
            delta: delta(spec, m)?,
            elements: m.elements(limits)?,
            normalizer_order: normalizer(g, m, limits)?.order(),
        })
    }

    pub fn subgroup(&self) -> &PermutationGroup {
        self.delta.subgroup()
    }

    /// Replays the argument for `g ∉ Δ(M)` at depth `d`.
    pub fn run(&self, g: &TreeAut, d: usize) -> Result<SuiteReport> {
        let spec = &self.spec;
        let m_group = self.delta.subgroup();
        let mut report = SuiteReport::new("maximality", spec, &[("depth", d)]);
        report.scope = Some(WALKTHROUGH_SCOPE.to_string());
        let refutation = match self.delta.member(g)? {
            Membership::No(n) => n,
            other => {
                return Err(Error::Precondition(format!(
                    "element is not refuted from Δ(M): {}",
                    other.to_json()
                )))
            }
        };

        // (1) a layer-k section with component outside M, moved to u_k and stabilised
        let k = refutation.depth.max(1);
        let c0 = spec.classify_at(g, k)?;
        let (v, b) = c0
            .spinal_components()
            .find(|(_, b)| !m_group.contains(b).unwrap_or(true))
            .map(|(v, b)| (v.clone(), b.clone()))
            .ok_or_else(|| Error::Precondition("no component outside M".into()))?;
        let uk = spec.spine_vertex(k);
        let conj = spec.transport(0, &v, &uk)?;
        let conj_el = spec.element_of_labels(&conj)?;
        let g1 = g.conjugate(&conj_el)?;
        let y = g1.act(&uk)?;
        let stab = spec.transport(0, &y, &uk)?;
        let g2 = g1.multiply(&spec.element_of_labels(&stab)?)?;
        let c2 = spec.classify_at(&g2, k)?;
        let at_uk = c2.sections.get(&uk).cloned();
        let step1 = g2.act(&uk)? == uk && at_uk.as_ref().and_then(|s| s.component()) == Some(&b);
        report.checks.push(Check::new(
            "(1) section outside M moved to u_k with g ∈ st(u_k)",
            step1 && !m_group.contains(&b)?,
            json!({
                "k": k,
                "vertex": v.to_string(),
                "component": b.to_string(),
                "conjugator": label_json(&conj),
                "stabiliser_correction": label_json(&stab),
            }),
        ));
        let f = at_uk.map(|s| s.finitary_part().clone()).unwrap_or_default();
        let mut g2_word = invert_word(&spec.finitary_word(&conj)?);
        g2_word.push(Letter::Extra { inverse: false });
        g2_word.extend(spec.finitary_word(&conj)?);
        g2_word.extend(spec.finitary_word(&stab)?);

        // (2) self-normalising M and an m ∈ M with m^b ∉ M
        let m = self
            .elements
            .iter()
            .find(|m| !m_group.contains(&m.conjugate_by(&b)).unwrap_or(true))
            .cloned();
        report.checks.push(Check::new(
            "(2) Norm_G(M) = M and m^b ∉ M for some m ∈ M",
            self.normalizer_order == m_group.order() && m.is_some(),
            json!({
                "normalizer_order": self.normalizer_order.to_string(),
                "M_order": m_group.order().to_string(),
                "m": m.as_ref().map(|m| m.to_string()),
            }),
        ));
        let Some(m) = m else { return Ok(report) };
        let c = m.conjugate_by(&b);

        // (3) ins_{u_k}(s_m|u_k)^g = ins_{u_k}(s_m^g|u_k)
        let sm = spec.spinal_at(0, &m);
        let a = TreeAut::insert(&uk, &sm.section(&uk)?)?;
        let e = a.conjugate(&g2)?;
        let smg = sm.conjugate(&g2)?;
        let rhs = TreeAut::insert(&uk, &smg.section(&uk)?)?;
        report.checks.push(Check::new(
            format!("(3) ins_u{k}(s_m|u{k})^g = ins_u{k}(s_m^g|u{k})"),
            e.equal_to_depth(&rhs, d)? && spec.exact_equal(&e, &rhs)?,
            json!({ "m": m.to_string(), "depth": d }),
        ));

        // (4) s_c ∈ Λ for c = m^b
        let f_el = TreeAut::insert(&uk, &TreeAut::finitary(spec.frame(), k, f.clone())?)?;
        let sc = spec.spinal_at(0, &c);
        let ins_sc = TreeAut::insert(&uk, &sc.section(&uk)?)?;
        let lhs = f_el.multiply(&e)?.multiply(&f_el.inverse())?;
        report.checks.push(Check::new(
            format!("(4a) ins_u{k}(f) · ins_u{k}(s_m|u{k})^g · ins_u{k}(f)^-1 = ins_u{k}(s_c|u{k})"),
            spec.exact_equal(&lhs, &ins_sc)?,
            json!({ "c": c.to_string(), "f_depth": f.depth() }),
        ));
        let diff = ins_sc.inverse().multiply(&sc)?;
        let diff_labels = spec.finitary_labels(&diff)?;
        let literal = spec.finitary_labels(&rhs.inverse().multiply(&smg)?)?.is_some();
        let m_last = spec.finitary_labels(&rhs.inverse().multiply(&sm)?)?.is_some();
        report.checks.push(Check::new(
            format!("(4b) ins_u{k}(s_c|u{k})^-1 · s_c is finitary"),
            diff_labels.is_some(),
            json!({
                "c": c.to_string(),
                "finitary_depth": diff_labels.as_ref().map(|l| l.depth()),
                "reading_with_m_g_last_finitary": literal,
                "reading_with_m_last_finitary": m_last,
            }),
        ));

        // (5) ⟨M, c⟩ = G and every Γ-generator as a verified Λ-word
        let closure = m_group.extend(std::slice::from_ref(&c))?;
        report.checks.push(Check::new(
            "(5a) ⟨M, m^b⟩ = G",
            closure.order() == spec.group().order(),
            json!({ "order": closure.order().to_string(), "G_order": spec.group().order().to_string() }),
        ));
        let words = self.generator_words(&m, &c, k, &f, &g2_word, diff_labels.as_ref())?;
        let gens = spec.generators();
        let mut lengths = Vec::new();
        let mut all_ok = words.len() == gens.len();
        for (word, target) in words.iter().zip(&gens) {
            let value = self.delta.evaluate(word, Some(g))?;
            all_ok &= spec.exact_equal(&value, target)?;
            lengths.push(word.len());
        }
        report.checks.push(Check::new(
            "(5b) every Γ-generator is a verified word in Δ(M)-generators and g",
            all_ok,
            json!({ "word_lengths": lengths }),
        ));
        Ok(report)
    }

    /// Λ-words for `r_1, …, sG_1, …`.
    fn generator_words(
        &self,
        m: &Permutation,
        c: &Permutation,
        k: usize,
        f: &crate::treeaut::FinitaryLabels,
        g2_word: &[Letter],
        diff: Option<&crate::treeaut::FinitaryLabels>,
    ) -> Result<Vec<Vec<Letter>>> {
        let spec = &self.spec;
        let Some(diff) = diff else { return Ok(Vec::new()) };
        let uk = spec.spine_vertex(k);
        // s_m·F_m⁻¹ = ins_{u_k}(s_m|u_k)
        let f_m = spec
            .finitary_labels(&self.delta.layered_difference(m, k)?)?
            .ok_or_else(|| Error::Precondition("layered difference not finitary".into()))?;
        let mut a_word = self
            .delta
            .spinal_word(m)
            .ok_or_else(|| Error::Precondition("m ∉ M".into()))?;
        a_word.extend(invert_word(&spec.finitary_word(&f_m)?));
        // E = g⁻¹ A g
        let mut e_word = invert_word(g2_word);
        e_word.extend(a_word);
        e_word.extend(g2_word.iter().cloned());
        // ins(s_c|u_k) = F E F⁻¹, s_c = ins(s_c|u_k) · X
        let f_shift = spec
            .finitary_labels(&TreeAut::insert(&uk, &TreeAut::finitary(spec.frame(), k, f.clone())?)?)?
            .unwrap_or_default();
        let f_word = spec.finitary_word(&f_shift)?;
        let mut sc_word = f_word.clone();
        sc_word.extend(e_word);
        sc_word.extend(invert_word(&f_word));
        sc_word.extend(spec.finitary_word(diff)?);

        let m_gens = self.delta.subgroup().generators().to_vec();
        let mut pool = m_gens.clone();
        pool.push(c.clone());
        let big = PermutationGroup::generated(spec.group().degree(), &pool)?;
        let words = big.generator_words(spec.limits())?;

        let mut out = Vec::new();
        for i in 0..spec.level_group(0).generators().len() {
            out.push(vec![Letter::Fin {
                vertex: Vertex::root(),
                generator: i,
                inverse: false,
            }]);
        }
        for gamma in spec.group().generators() {
            let w = words
                .word(gamma)
                .ok_or_else(|| Error::Precondition(format!("{gamma} not in ⟨M, c⟩")))?;
            let mut word = Vec::new();
            for (idx, inv) in w {
                if idx < m_gens.len() {
                    word.push(Letter::Spinal { generator: idx, inverse: inv });
                } else if inv {
                    word.extend(invert_word(&sc_word));
                } else {
                    word.extend(sc_word.iter().cloned());
                }
            }
            out.push(word);
        }
        Ok(out)
    }
}

fn label_json(l: &crate::treeaut::FinitaryLabels) -> Value {
    Value::Object(l.labels().map(|(v, p)| (v.to_string(), Value::String(p.to_string()))).collect())
}

pub fn verify_maximality_walkthrough(spec: &GammaSpec, m: &PermutationGroup, g: &TreeAut, d: usize) -> Result<SuiteReport> {
    Walkthrough::new(spec, m)?.run(g, d)
}

/// The walkthrough for every `M ∈ Max(G)` and every `s_w` with `w ∈ G ∖ M`,
/// one aggregated check per pair.
pub fn verify_maximality_all(spec: &GammaSpec, d: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("maximality", spec, &[("depth", d)]);
    report.scope = Some(WALKTHROUGH_SCOPE.to_string());
    let maxes = non_normal_maximal(spec.group(), spec.limits())?;
    let elements = spec.group().elements(spec.limits())?;
    let walks = maxes.iter().map(|m| Walkthrough::new(spec, m)).collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for (i, m) in maxes.iter().enumerate() {
        for w in &elements {
            if !m.contains(w)? {
                jobs.push((i, w.clone()));
            }
        }
    }
    let checks: Vec<Result<Check>> = jobs
        .par_iter()
        .map(|(i, w)| {
            let r = walks[*i].run(&spec.spinal_at(0, w), d)?;
            let failed: Vec<&str> = r.failures().map(|c| c.description.as_str()).collect();
            Ok(Check::new(
                format!("Δ(M{i}) walkthrough with g = s_{w}"),
                r.passed() && r.checks.len() == 7,
                json!({ "M": i, "w": w.to_string(), "steps": r.checks.len(), "failed": failed }),
            ))
        })
        .collect();
    report.checks.push(Check::new(
        "Max(G) enumerated",
        !maxes.is_empty(),
        json!({ "count": maxes.len(), "pairs": jobs.len() }),
    ));
    for c in checks {
        report.checks.push(c?);
    }
    Ok(report)
}

pub const SUITES: &[&str] = &["spherical", "rist", "layered", "fin", "properness", "injectivity", "maximality"];

pub fn run_suite(spec: &GammaSpec, name: &str, h: Option<&PermutationGroup>, config: &VerifyConfig) -> Result<SuiteReport> {
    match name {
        "spherical" => verify_spherical(spec, config.portrait_depth, config),
        "rist" => verify_rist_witness(spec, config.portrait_depth),
        "layered" => verify_layered_witness(spec, config.layered_levels, config.portrait_depth),
        "fin" => verify_fin_in_gamma(spec, config.quotient_depth, config),
        "properness" => verify_properness(spec, h.map(std::slice::from_ref).unwrap_or(&[])),
        "injectivity" => verify_injectivity(spec),
        "maximality" => verify_maximality_all(spec, config.portrait_depth),
        other => Err(Error::Precondition(format!("unknown suite {other:?}"))),
    }
}

pub fn run_all(spec: &GammaSpec, h: Option<&PermutationGroup>, config: &VerifyConfig) -> Result<Vec<SuiteReport>> {
    SUITES.iter().map(|s| run_suite(spec, s, h, config)).collect()
}

/// Labels of `s_g` and `s_h` composed by the wreath rule against the labels of
/// `s_{gh}`, at every spine vertex and its children over one joint period.
pub fn spinal_product_components(spec: &GammaSpec, g: &Permutation, h: &Permutation) -> Result<bool> {
    let frame = spec.frame();
    let sg = TreeAut::from_word(frame, 0, vec![Generator::Spinal(g.clone())]);
    let sh = TreeAut::from_word(frame, 0, vec![Generator::Spinal(h.clone())]);
    let merged = spec.spinal_at(0, &g.then(h));
    for n in 0..=spec.horizon() {
        let u = spec.spine_vertex(n);
        let children = (0..frame.arity(n)).map(|x| u.child(x));
        for v in std::iter::once(u.clone()).chain(children) {
            let expected = sg.label(&v).then(&sh.label(&sg.act(&v)?));
            if expected != merged.label(&v) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    fn cyc(s: &str) -> Permutation {
        Permutation::parse_cycles(s, 5).unwrap()
    }

    #[test]
    fn spherical_small_depth() {
        let s = Scenario::reference().spec;
        let r = verify_spherical(&s, 2, &VerifyConfig::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks[1].certificate["orbit_size"], 25);
    }

    #[test]
    fn rist_precondition() {
        let s = Scenario::reference().spec;
        let bad = rist_identity(&s, &cyc("(0 1 2)"), &cyc("(0 1 2)"), &cyc("(0 1 2)"), 3);
        assert!(matches!(bad, Err(Error::Precondition(_))));
        let ok = rist_identity(&s, &cyc("(0 1 2)"), &cyc("(0 1 2 3 4)"), &cyc("(0 2 4)"), 4).unwrap();
        assert!(ok.iter().all(Check::passed));
    }

    #[test]
    fn walkthrough_reference_case() {
        let scen = Scenario::reference();
        let m = scen.subgroup.unwrap();
        let w = cyc("(0 4)(1 2)");
        let r = verify_maximality_walkthrough(&scen.spec, &m, &scen.spec.spinal_at(0, &w), 4).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.checks[0].certificate["k"], 1);
        assert_eq!(r.checks[0].certificate["vertex"], "0");
    }

    #[test]
    fn walkthrough_needs_conjugation() {
        let scen = Scenario::reference();
        let m = scen.subgroup.unwrap();
        let s = &scen.spec;
        let g = s.parse_word("r2^-1 sG2 r2").unwrap();
        let r = verify_maximality_walkthrough(s, &m, &g, 4).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_ne!(r.checks[0].certificate["vertex"], "0");
    }

    #[test]
    fn report_text_and_digest() {
        let s = Scenario::reference().spec;
        let r = verify_layered_witness(&s, 1, 3).unwrap();
        assert!(r.to_text().starts_with("suite layered: PASS"));
        assert_eq!(r.scenario_digest.len(), 64);
        assert_eq!(scenario_digest(&s.shift(1).unwrap()), r.scenario_digest);
    }
}
