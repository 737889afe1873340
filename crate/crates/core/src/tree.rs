//! The rooted tree over a sequence of finite alphabets, with vertices, rays
//! and spinal sequences. Infinite data is always eventually periodic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permgroup::PermutationGroup;

/// `prefix` followed by `period` repeated forever.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventuallyPeriodic<A> {
    pub prefix: Vec<A>,
    pub period: Vec<A>,
}

impl<A: Clone> EventuallyPeriodic<A> {
    pub fn new(prefix: Vec<A>, period: Vec<A>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Parse("eventually periodic sequence needs a non-empty period".into()));
        }
        Ok(EventuallyPeriodic { prefix, period })
    }

    pub fn constant(a: A) -> Self {
        EventuallyPeriodic {
            prefix: Vec::new(),
            period: vec![a],
        }
    }

    #[inline]
    pub fn term(&self, n: usize) -> &A {
        if n < self.prefix.len() {
            &self.prefix[n]
        } else {
            &self.period[(n - self.prefix.len()) % self.period.len()]
        }
    }

    /// The left shift `σᵐ`.
    pub fn shift(&self, m: usize) -> Self {
        if m <= self.prefix.len() {
            EventuallyPeriodic {
                prefix: self.prefix[m..].to_vec(),
                period: self.period.clone(),
            }
        } else {
            let k = (m - self.prefix.len()) % self.period.len();
            let mut period = self.period[k..].to_vec();
            period.extend_from_slice(&self.period[..k]);
            EventuallyPeriodic {
                prefix: Vec::new(),
                period,
            }
        }
    }

    pub fn map<B: Clone>(&self, mut f: impl FnMut(&A) -> B) -> EventuallyPeriodic<B> {
        EventuallyPeriodic {
            prefix: self.prefix.iter().map(&mut f).collect(),
            period: self.period.iter().map(&mut f).collect(),
        }
    }

    pub fn try_map<B: Clone>(&self, mut f: impl FnMut(&A) -> Result<B>) -> Result<EventuallyPeriodic<B>> {
        Ok(EventuallyPeriodic {
            prefix: self.prefix.iter().map(&mut f).collect::<Result<_>>()?,
            period: self.period.iter().map(&mut f).collect::<Result<_>>()?,
        })
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.prefix.is_empty()
    }

    /// `(prefix length, period length)`, for horizon computations.
    pub fn shape(&self) -> (usize, usize) {
        (self.prefix.len(), self.period.len())
    }

    /// Iterates over every distinct position: the prefix and one period.
    pub fn window(&self) -> impl Iterator<Item = (usize, &A)> {
        self.prefix.iter().chain(self.period.iter()).enumerate()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Number of leading positions after which every sequence with one of the
/// given shapes repeats jointly: the longest prefix plus the lcm of periods.
pub fn joint_horizon(shapes: &[(usize, usize)]) -> usize {
    let prefix = shapes.iter().map(|s| s.0).max().unwrap_or(0);
    let period = shapes.iter().fold(1, |acc, s| acc / gcd(acc, s.1) * s.1);
    prefix + period
}

/// Alphabet sizes: `term(n) = |X_{n+1}|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValencySequence(EventuallyPeriodic<usize>);

impl ValencySequence {
    pub fn new(seq: EventuallyPeriodic<usize>) -> Result<Self> {
        if let Some((_, &v)) = seq.window().find(|(_, &v)| v < 2) {
            return Err(Error::Parse(format!("alphabet of size {v}; every level needs at least 2")));
        }
        Ok(ValencySequence(seq))
    }

    pub fn constant(k: usize) -> Result<Self> {
        Self::new(EventuallyPeriodic::constant(k))
    }

    /// Size of the alphabet of children of a vertex of length `level`.
    #[inline]
    pub fn arity(&self, level: usize) -> usize {
        *self.0.term(level)
    }

    pub fn sequence(&self) -> &EventuallyPeriodic<usize> {
        &self.0
    }

    pub fn shift(&self, m: usize) -> Self {
        ValencySequence(self.0.shift(m))
    }

    /// `|𝓛(n)|` for the tree rooted at `level`.
    pub fn layer_size_from(&self, level: usize, n: usize) -> u128 {
        (0..n).map(|i| self.arity(level + i) as u128).product()
    }

    pub fn layer_size(&self, n: usize) -> u128 {
        self.layer_size_from(0, n)
    }

    /// All vertices of length `n` below a root at `level`, in lexicographic order.
    pub fn layer(&self, level: usize, n: usize) -> Vec<Vertex> {
        let mut out = vec![Vertex::root()];
        for i in 0..n {
            let k = self.arity(level + i);
            out = out
                .iter()
                .flat_map(|v| (0..k).map(move |x| v.child(x)))
                .collect();
        }
        out
    }

    /// Lexicographic index of `v` within its layer.
    pub fn index_of(&self, level: usize, v: &Vertex) -> usize {
        v.0.iter()
            .enumerate()
            .fold(0, |acc, (i, &x)| acc * self.arity(level + i) + x)
    }

    pub fn check_vertex(&self, level: usize, v: &Vertex) -> Result<()> {
        for (i, &x) in v.0.iter().enumerate() {
            if x >= self.arity(level + i) {
                return Err(Error::InvalidVertex {
                    vertex: v.to_string(),
                    level,
                });
            }
        }
        Ok(())
    }
}

/// A finite string of child indices; the root is the empty string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex(pub Vec<usize>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn child(&self, x: usize) -> Vertex {
        let mut v = self.0.clone();
        v.push(x);
        Vertex(v)
    }

    pub fn prefix(&self, n: usize) -> Vertex {
        Vertex(self.0[..n].to_vec())
    }

    pub fn parent(&self) -> Option<Vertex> {
        (!self.is_root()).then(|| self.prefix(self.len() - 1))
    }

    pub fn is_prefix_of(&self, other: &Vertex) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn concat(&self, other: &Vertex) -> Vertex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Vertex(v)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Vertex::root());
        }
        s.split('.')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad vertex {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Vertex)
    }
}

/// A ray `𝔲`: `term(n)` is the letter `y_{n+1}` with `u_{n+1} = u_n y_{n+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ray(pub EventuallyPeriodic<usize>);

/// A spinal sequence `𝔵`: `term(n)` is `x_{n+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinalSequence(pub EventuallyPeriodic<usize>);

impl Ray {
    #[inline]
    pub fn step(&self, n: usize) -> usize {
        *self.0.term(n)
    }

    pub fn shift(&self, m: usize) -> Self {
        Ray(self.0.shift(m))
    }
}

impl SpinalSequence {
    #[inline]
    pub fn step(&self, n: usize) -> usize {
        *self.0.term(n)
    }

    pub fn shift(&self, m: usize) -> Self {
        SpinalSequence(self.0.shift(m))
    }
}

/// `u_n`.
pub fn ray_vertex(ray: &Ray, n: usize) -> Vertex {
    Vertex((0..n).map(|i| ray.step(i)).collect())
}

/// `u_n x_{n+1}`.
pub fn spinal_neighbor(ray: &Ray, spinal: &SpinalSequence, n: usize) -> Vertex {
    ray_vertex(ray, n).child(spinal.step(n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpinalViolation {
    /// `u_n x_{n+1} = u_{n+1}`.
    OnRay { level: usize, letter: usize },
    /// `st_{S_n}(x_{n+1}) = st_{S_n}(y_{n+1})`.
    EqualStabilizers {
        level: usize,
        spinal_point: usize,
        ray_point: usize,
    },
}

impl fmt::Display for SpinalViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinalViolation::OnRay { level, letter } => write!(
                f,
                "u_n x_(n+1) = u_(n+1) at level {level} (both letters are {letter})"
            ),
            SpinalViolation::EqualStabilizers {
                level,
                spinal_point,
                ray_point,
            } => write!(
                f,
                "stabilizers of {spinal_point} and {ray_point} coincide in the level-{level} group"
            ),
        }
    }
}

/// Checks the spinal sequence against the ray and the level actions.
///
/// `level_groups.term(n)` is the group acting on the alphabet `X_{n+1}`.
/// Returns `Ok(None)` when every level passes, `Ok(Some(v))` for the first
/// violation, and an error when a letter is outside its alphabet.
pub fn validate_spinal_data(
    valency: &ValencySequence,
    level_groups: &EventuallyPeriodic<PermutationGroup>,
    ray: &Ray,
    spinal: &SpinalSequence,
) -> Result<Option<SpinalViolation>> {
    let horizon = joint_horizon(&[
        valency.sequence().shape(),
        level_groups.shape(),
        ray.0.shape(),
        spinal.0.shape(),
    ]);
    for n in 0..horizon {
        let arity = valency.arity(n);
        let (x, y) = (spinal.step(n), ray.step(n));
        for p in [x, y] {
            if p >= arity {
                return Err(Error::PointOutOfRange { point: p, degree: arity });
            }
        }
        let group = level_groups.term(n);
        if group.degree() != arity {
            return Err(Error::DegreeMismatch(arity, group.degree()));
        }
    }
    for n in 0..horizon {
        let (x, y) = (spinal.step(n), ray.step(n));
        if x == y {
            return Ok(Some(SpinalViolation::OnRay { level: n, letter: x }));
        }
        let group = level_groups.term(n);
        let sx = group.point_stabilizer(x)?;
        let sy = group.point_stabilizer(y)?;
        if sx == sy {
            return Ok(Some(SpinalViolation::EqualStabilizers {
                level: n,
                spinal_point: x,
                ray_point: y,
            }));
        }
    }
    Ok(None)
}
