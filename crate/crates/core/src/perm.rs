//! Permutations of a finite point set `{0, …, m−1}`, acting on the right.
//!
//! `compose(p, q)` maps `i ↦ (i.p).q`, so words are read left to right and
//! conjugation is `g^h = h⁻¹ g h`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        assert!(degree >= 1, "permutation degree must be positive");
        Permutation {
            images: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from its image list, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Parse("permutation of degree 0".into()));
        }
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() {
                return Err(Error::PointOutOfRange {
                    point: i,
                    degree: images.len(),
                });
            }
            if seen[i] {
                return Err(Error::Parse(format!("point {i} is hit twice")));
            }
            seen[i] = true;
        }
        Ok(Permutation {
            images: images.into_iter().map(|i| i as u32).collect(),
        })
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Self::from_images(images.iter().map(|&i| i as usize).collect()).is_ok());
        Permutation { images }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().map(|&i| i as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    /// `i.p`, panicking on an out-of-range point.
    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn act_point(&self, i: usize) -> Result<usize> {
        self.images
            .get(i)
            .map(|&j| j as usize)
            .ok_or(Error::PointOutOfRange {
                point: i,
                degree: self.degree(),
            })
    }

    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch(self.degree(), other.degree()));
        }
        Ok(self.then(other))
    }

    /// Unchecked `compose`; degrees must agree.
    #[inline]
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            images: self
                .images
                .iter()
                .map(|&i| other.images[i as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// `h⁻¹ · self · h`.
    pub fn conjugate_by(&self, h: &Permutation) -> Permutation {
        h.inverse().then(self).then(h)
    }

    /// `self⁻¹ · other⁻¹ · self · other`.
    pub fn commutator(&self, other: &Permutation) -> Permutation {
        self.inverse()
            .then(&other.inverse())
            .then(self)
            .then(other)
    }

    pub fn pow(&self, mut e: i64) -> Permutation {
        let mut base = if e < 0 {
            e = -e;
            self.inverse()
        } else {
            self.clone()
        };
        let mut acc = Permutation::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        acc
    }

    pub fn order(&self) -> u64 {
        let mut seen = vec![false; self.degree()];
        let mut lcm = 1u64;
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.image(i);
                len += 1;
            }
            lcm = lcm / gcd(lcm, len) * len;
        }
        lcm
    }

    pub fn is_even(&self) -> bool {
        let mut seen = vec![false; self.degree()];
        let mut transpositions = 0usize;
        for start in 0..self.degree() {
            let mut i = start;
            let mut len = 0;
            while !seen[i] {
                seen[i] = true;
                i = self.image(i);
                len += 1;
            }
            if len > 0 {
                transpositions += len - 1;
            }
        }
        transpositions.is_multiple_of(2)
    }

    pub fn first_moved_point(&self) -> Option<usize> {
        self.images
            .iter()
            .enumerate()
            .find(|(i, &j)| *i as u32 != j)
            .map(|(i, _)| i)
    }

    /// Disjoint cycles of length at least two, each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.image(start) == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.image(i);
            }
            out.push(cycle);
        }
        out
    }

    /// Parses disjoint-cycle notation such as `"(0 1 2)(3 4)"`; `"()"` is the identity.
    pub fn parse_cycles(text: &str, degree: usize) -> Result<Permutation> {
        if degree == 0 {
            return Err(Error::Parse("degree must be positive".into()));
        }
        let mut images: Vec<u32> = (0..degree as u32).collect();
        let mut used = vec![false; degree];
        let mut rest = text.trim();
        if rest.is_empty() {
            return Err(Error::Parse("empty cycle string".into()));
        }
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {text:?}")))?;
            let close = body
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed cycle in {text:?}")))?;
            let points = body[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad point {s:?} in {text:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            for &p in &points {
                if p >= degree {
                    return Err(Error::PointOutOfRange { point: p, degree });
                }
                if used[p] {
                    return Err(Error::Parse(format!("repeated point {p} in {text:?}")));
                }
                used[p] = true;
            }
            for (k, &p) in points.iter().enumerate() {
                images[p] = points[(k + 1) % points.len()] as u32;
            }
            rest = body[close + 1..].trim_start();
        }
        Ok(Permutation { images })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            f.write_str("(")?;
            for (k, p) in c.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{p}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}[{}]", self.degree())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Permutation {
        Permutation::parse_cycles(s, 5).unwrap()
    }

    #[test]
    fn compose_examples() {
        let id = Permutation::identity(5);
        assert_eq!(p("(0 1 2)").compose(&id).unwrap(), p("(0 1 2)"));
        assert_eq!(p("(0 1)(2 3)").compose(&p("(0 1)(2 3)")).unwrap(), id);
        assert_eq!(p("(0 1 2)").compose(&p("(0 1 2)")).unwrap(), p("(0 2 1)"));
        assert!(matches!(
            p("(0 1)").compose(&Permutation::identity(4)),
            Err(Error::DegreeMismatch(5, 4))
        ));
    }

    #[test]
    fn invert_examples() {
        let id = Permutation::identity(5);
        assert_eq!(id.inverse(), id);
        assert_eq!(p("(0 1 2)").inverse(), p("(0 2 1)"));
        assert_eq!(p("(0 1)(2 4)").inverse(), p("(0 1)(2 4)"));
    }

    #[test]
    fn act_point_examples() {
        assert_eq!(p("(0 1 2)").act_point(0).unwrap(), 1);
        assert_eq!(p("(0 1 2)").act_point(4).unwrap(), 4);
        assert_eq!(Permutation::identity(5).act_point(3).unwrap(), 3);
        assert!(p("(0 1 2)").act_point(5).is_err());
    }

    #[test]
    fn parse_examples() {
        assert_eq!(p("()"), Permutation::identity(5));
        let c = p("(0 1 2 3 4)");
        assert_eq!(c.images().collect::<Vec<_>>(), vec![1, 2, 3, 4, 0]);
        assert!(Permutation::parse_cycles("(0 1)(1 2)", 5).is_err());
        assert!(Permutation::parse_cycles("(0 5)", 5).is_err());
        assert!(Permutation::parse_cycles("(0 1", 5).is_err());
        assert!(Permutation::parse_cycles("0 1)", 5).is_err());
        assert!(Permutation::parse_cycles("(a b)", 5).is_err());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(p("(2 0 1)(4 3)").to_string(), "(0 1 2)(3 4)");
        assert_eq!(Permutation::identity(3).to_string(), "()");
    }

    #[test]
    fn order_and_parity() {
        assert_eq!(p("(0 1 2)(3 4)").order(), 6);
        assert!(p("(0 1 2)").is_even());
        assert!(!p("(0 1)").is_even());
        assert_eq!(p("(0 1 2)").pow(-1), p("(0 2 1)"));
        assert_eq!(p("(0 1 2 3 4)").pow(5), Permutation::identity(5));
    }

    fn arb_perm(degree: usize) -> impl Strategy<Value = Permutation> {
        Just((0..degree).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_images(v).unwrap())
    }

    proptest! {
        #[test]
        fn group_laws(a in arb_perm(7), b in arb_perm(7), c in arb_perm(7), i in 0usize..7) {
            prop_assert_eq!(a.then(&b).then(&c), a.then(&b.then(&c)));
            prop_assert!(a.then(&a.inverse()).is_identity());
            prop_assert_eq!(a.then(&b).image(i), b.image(a.image(i)));
        }

        #[test]
        fn cycle_text_round_trip(a in arb_perm(9)) {
            prop_assert_eq!(Permutation::parse_cycles(&a.to_string(), 9).unwrap(), a);
        }
    }
}
