//! Scenario documents and the catalog of named groups.

use serde::{Deserialize, Serialize};

use crate::construction::{build_gamma, make_diagonal_rep, preferred_tau, Component, GammaSpec, ResidualRep};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::permgroup::{Limits, PermutationGroup};
use crate::tree::{EventuallyPeriodic, Ray, SpinalSequence};

const CATALOG: &[(&str, usize, &[&str])] = &[
    ("C2", 2, &["(0 1)"]),
    ("C3", 3, &["(0 1 2)"]),
    ("S3", 3, &["(0 1 2)", "(0 1)"]),
    ("A4", 4, &["(0 1 2)", "(0 1)(2 3)"]),
    ("S4", 4, &["(0 1 2 3)", "(0 1)"]),
    ("A5", 5, &["(0 1 2)", "(0 1 2 3 4)"]),
    ("S5", 5, &["(0 1 2 3 4)", "(0 1)"]),
    ("A6", 6, &["(0 1 2)", "(1 2 3 4 5)"]),
    ("A7", 7, &["(0 1 2)", "(0 1 2 3 4 5 6)"]),
    ("PSL27", 8, &["(0 1 2 3 4 5 6)", "(0 7)(1 6)(2 3)(4 5)"]),
];

pub fn catalog_names() -> impl Iterator<Item = &'static str> {
    CATALOG.iter().map(|(n, _, _)| *n)
}

pub fn catalog_group(name: &str) -> Result<PermutationGroup> {
    let (_, degree, gens) = CATALOG
        .iter()
        .find(|(n, _, _)| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownGroup(name.to_string()))?;
    let gens = gens
        .iter()
        .map(|s| Permutation::parse_cycles(s, *degree))
        .collect::<Result<Vec<_>>>()?;
    PermutationGroup::generated(*degree, &gens)
}

/// A catalog name or an explicit generating set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Name(String),
    Explicit { degree: usize, generators: Vec<String> },
}

impl GroupRef {
    pub fn resolve(&self) -> Result<PermutationGroup> {
        match self {
            GroupRef::Name(n) => catalog_group(n),
            GroupRef::Explicit { degree, generators } => {
                let gens = parse_perms(generators, *degree)?;
                PermutationGroup::generated(*degree, &gens)
            }
        }
    }
}

impl std::str::FromStr for GroupRef {
    type Err = Error;

    /// A catalog name, or inline JSON for an explicit group.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with('{') {
            serde_json::from_str(t).map_err(|e| Error::Parse(e.to_string()))
        } else {
            Ok(GroupRef::Name(t.to_string()))
        }
    }
}

fn parse_perms(texts: &[String], degree: usize) -> Result<Vec<Permutation>> {
    texts.iter().map(|s| Permutation::parse_cycles(s, degree)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub target: GroupRef,
    pub images: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentsDoc {
    Keyword(String),
    Periodic {
        #[serde(default)]
        prefix: Vec<ComponentDoc>,
        period: Vec<ComponentDoc>,
    },
}

/// An eventually periodic letter sequence: a constant, a purely periodic
/// list, or a prefix and a period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceDoc {
    Constant(usize),
    Periodic(Vec<usize>),
    Split {
        #[serde(default)]
        prefix: Vec<usize>,
        period: Vec<usize>,
    },
}

impl SequenceDoc {
    pub fn resolve(&self) -> Result<EventuallyPeriodic<usize>> {
        match self {
            SequenceDoc::Constant(x) => Ok(EventuallyPeriodic::constant(*x)),
            SequenceDoc::Periodic(p) => EventuallyPeriodic::new(Vec::new(), p.clone()),
            SequenceDoc::Split { prefix, period } => EventuallyPeriodic::new(prefix.clone(), period.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubgroupDoc {
    Generators(Vec<String>),
    Explicit { generators: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Depths {
    #[serde(default = "default_portrait")]
    pub portrait: usize,
    #[serde(default = "default_quotient")]
    pub quotient: usize,
}

fn default_portrait() -> usize {
    4
}

fn default_quotient() -> usize {
    2
}

impl Default for Depths {
    fn default() -> Self {
        Depths {
            portrait: default_portrait(),
            quotient: default_quotient(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(rename = "S0")]
    pub s0: GroupRef,
    #[serde(rename = "G")]
    pub g: GroupRef,
    pub components: ComponentsDoc,
    pub ray: SequenceDoc,
    pub spinal: SequenceDoc,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<SubgroupDoc>,
    #[serde(default)]
    pub depths: Depths,
}

impl ScenarioDoc {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::Scenario("empty scenario document".into()));
        }
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn group(&self) -> Result<PermutationGroup> {
        self.g.resolve()
    }

    /// The residual representation, without validation beyond homomorphism checks.
    pub fn representation(&self, limits: Limits) -> Result<ResidualRep> {
        let g = self.group()?;
        match &self.components {
            ComponentsDoc::Keyword(k) if k == "diagonal" => make_diagonal_rep(&g, limits),
            ComponentsDoc::Keyword(k) => Err(Error::Scenario(format!("unknown components keyword {k:?}"))),
            ComponentsDoc::Periodic { prefix, period } => {
                if period.is_empty() {
                    return Err(Error::Scenario("empty component period".into()));
                }
                let build = |docs: &[ComponentDoc]| -> Result<Vec<Component>> {
                    docs.iter()
                        .map(|d| {
                            let target = d.target.resolve()?;
                            let tau = preferred_tau(&target, limits)?;
                            let images = parse_perms(&d.images, target.degree())?;
                            Component::new(&g, target, tau, images, limits)
                        })
                        .collect()
                };
                ResidualRep::new(&g, EventuallyPeriodic::new(build(prefix)?, build(period)?)?, limits)
            }
        }
    }

    pub fn subgroup(&self) -> Result<Option<PermutationGroup>> {
        let g = self.group()?;
        let gens = match &self.h {
            None => return Ok(None),
            Some(SubgroupDoc::Generators(v)) | Some(SubgroupDoc::Explicit { generators: v }) => v,
        };
        let gens = parse_perms(gens, g.degree())?;
        for p in &gens {
            if !g.contains(p)? {
                return Err(Error::NotASubgroup(format!("{p} is not in G")));
            }
        }
        Ok(Some(PermutationGroup::generated(g.degree(), &gens)?))
    }
}

/// A resolved scenario: the validated `Γ` and the optional subgroup `H`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub spec: GammaSpec,
    pub subgroup: Option<PermutationGroup>,
}

impl Scenario {
    pub fn load(text: &str, limits: Limits) -> Result<Self> {
        let doc = ScenarioDoc::parse(text)?;
        Self::from_doc(doc, limits)
    }

    pub fn from_doc(doc: ScenarioDoc, limits: Limits) -> Result<Self> {
        let s0 = doc.s0.resolve()?;
        let tau = preferred_tau(&s0, limits)?;
        let rep = doc.representation(limits)?;
        let ray = Ray(doc.ray.resolve()?);
        let spinal = SpinalSequence(doc.spinal.resolve()?);
        let spec = build_gamma(&rep, &ray, &spinal, &tau)?;
        let subgroup = doc.subgroup()?;
        Ok(Scenario { doc, spec, subgroup })
    }

    /// The A₅-diagonal reference scenario with `H` the stabiliser of point 4.
    pub fn reference_text() -> &'static str {
        r#"{
  "S0": "A5",
  "G": "A5",
  "components": "diagonal",
  "ray": 0,
  "spinal": 1,
  "H": ["(0 1 2)", "(0 1)(2 3)"]
}"#
    }

    pub fn reference() -> Self {
        Self::load(Self::reference_text(), Limits::default()).expect("reference scenario is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_orders() {
        let orders = [("C2", 2), ("A4", 12), ("A5", 60), ("S5", 120), ("A6", 360), ("A7", 2520), ("PSL27", 168)];
        for (n, o) in orders {
            assert_eq!(catalog_group(n).unwrap().order(), o, "{n}");
        }
        assert!(matches!(catalog_group("Z9"), Err(Error::UnknownGroup(_))));
    }

    #[test]
    fn reference_loads() {
        let s = Scenario::reference();
        assert_eq!(s.spec.generators().len(), 4);
        assert_eq!(s.subgroup.unwrap().order(), 12);
        assert_eq!(s.doc.depths, Depths::default());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(Scenario::load("", Limits::default()), Err(Error::Scenario(_))));
        assert!(matches!(Scenario::load("{\"S0\": 1}", Limits::default()), Err(Error::Scenario(_))));
        let seeded = Scenario::reference_text().replace("\"spinal\": 1", "\"spinal\": 0");
        assert!(matches!(Scenario::load(&seeded, Limits::default()), Err(Error::Spinal(_))));
    }

    #[test]
    fn explicit_components() {
        let text = r#"{
          "S0": "A5", "G": "A5",
          "components": {"prefix": [], "period": [{"target": "A5", "images": ["(0 1 2)", "(0 1 2 3 4)"]}]},
          "ray": [0], "spinal": {"prefix": [2], "period": [1]}
        }"#;
        let s = Scenario::load(text, Limits::default()).unwrap();
        assert_eq!(s.spec.spinal().step(0), 2);
        assert_eq!(s.spec.spinal().step(5), 1);
    }
}
