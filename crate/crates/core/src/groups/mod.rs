//! Exact models of the finitely generated groups used throughout the crate.
//!
//! Each [`GroupModel`] fixes a finite symmetric generating list. Generators
//! are addressed by index; a [`Word`] is a sequence of such indices. For the
//! families with a finite presentation (everything except the lamplighter)
//! the model also supplies relators and a normal-form word for every element.

pub(crate) mod packed;

use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
pub(crate) use packed::Codec;

/// Default element budget for balls and measure supports.
pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupModel {
    /// `Z^d`, generated by the standard basis and its negatives.
    FreeAbelian(usize),
    /// Integer upper unitriangular 3x3 matrices, generated by `x`, `y`.
    Heisenberg,
    /// Free group on `k` letters.
    Free(usize),
    /// `Z/2 wr Z` with generators: cursor step (both directions) and toggle.
    Lamplighter,
    /// `Z/N`.
    Cyclic(u64),
}

/// Canonical encoding of a group element. Two elements are equal in the group
/// iff their encodings are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Vector(Vec<i64>),
    /// `(a, b, c)`: superdiagonal `a`, `b` and corner `c`.
    Heisenberg(i64, i64, i64),
    /// Reduced word; letter `2i` is generator `i`, `2i + 1` its inverse.
    Word(Vec<u8>),
    /// Lit lamps (strictly increasing) and cursor position.
    Lamplighter { lamps: Vec<i64>, cursor: i64 },
    Residue(u64),
}

/// Sequence of generator indices into [`GroupModel::generators`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }
}

/// Breadth-first ball. `elements[sizes[j-1]..sizes[j]]` is the sphere of
/// radius `j`; each sphere is listed in packed-key order.
#[derive(Clone, Debug)]
pub struct Ball {
    pub elements: Vec<GroupElement>,
    pub sizes: Vec<usize>,
}

impl Ball {
    pub fn radius(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn sphere(&self, j: usize) -> &[GroupElement] {
        let start = if j == 0 { 0 } else { self.sizes[j - 1] };
        &self.elements[start..self.sizes[j]]
    }
}

fn invalid(model: &GroupModel, detail: impl Into<String>) -> Error {
    Error::InvalidElement {
        model: model.to_string(),
        detail: detail.into(),
    }
}

fn sym_diff(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn reduce_into(word: &mut Vec<u8>, letter: u8) {
    if word.last() == Some(&(letter ^ 1)) {
        word.pop();
    } else {
        word.push(letter);
    }
}

impl GroupModel {
    pub fn free_abelian(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::parse("group", "free-abelian rank must be >= 1"));
        }
        Ok(GroupModel::FreeAbelian(rank))
    }

    pub fn free(rank: usize) -> Result<Self> {
        if rank == 0 || rank > 26 {
            return Err(Error::parse("group", "free rank must be in 1..=26"));
        }
        Ok(GroupModel::Free(rank))
    }

    pub fn cyclic(order: u64) -> Result<Self> {
        if order < 2 {
            return Err(Error::parse("group", "cyclic order must be >= 2"));
        }
        Ok(GroupModel::Cyclic(order))
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            GroupModel::FreeAbelian(_) => "free-abelian",
            GroupModel::Heisenberg => "heisenberg",
            GroupModel::Free(_) => "free",
            GroupModel::Lamplighter => "lamplighter",
            GroupModel::Cyclic(_) => "cyclic",
        }
    }

    pub fn is_finitely_presented(&self) -> bool {
        !matches!(self, GroupModel::Lamplighter)
    }

    fn require_presented(&self, operation: &str) -> Result<()> {
        if self.is_finitely_presented() {
            Ok(())
        } else {
            Err(Error::UnsupportedFamily {
                family: self.family_name().into(),
                operation: operation.into(),
            })
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupModel::FreeAbelian(d) => GroupElement::Vector(vec![0; *d]),
            GroupModel::Heisenberg => GroupElement::Heisenberg(0, 0, 0),
            GroupModel::Free(_) => GroupElement::Word(Vec::new()),
            GroupModel::Lamplighter => GroupElement::Lamplighter {
                lamps: Vec::new(),
                cursor: 0,
            },
            GroupModel::Cyclic(_) => GroupElement::Residue(0),
        }
    }

    /// The symmetric generating list. Never contains the identity.
    pub fn generators(&self) -> Vec<GroupElement> {
        match self {
            GroupModel::FreeAbelian(d) => (0..*d)
                .flat_map(|i| {
                    [1, -1].map(|s| {
                        let mut v = vec![0; *d];
                        v[i] = s;
                        GroupElement::Vector(v)
                    })
                })
                .collect(),
            GroupModel::Heisenberg => vec![
                GroupElement::Heisenberg(1, 0, 0),
                GroupElement::Heisenberg(-1, 0, 0),
                GroupElement::Heisenberg(0, 1, 0),
                GroupElement::Heisenberg(0, -1, 0),
            ],
            GroupModel::Free(k) => (0..2 * *k as u8)
                .map(|l| GroupElement::Word(vec![l]))
                .collect(),
            GroupModel::Lamplighter => vec![
                GroupElement::Lamplighter {
                    lamps: vec![],
                    cursor: 1,
                },
                GroupElement::Lamplighter {
                    lamps: vec![],
                    cursor: -1,
                },
                GroupElement::Lamplighter {
                    lamps: vec![0],
                    cursor: 0,
                },
            ],
            GroupModel::Cyclic(2) => vec![GroupElement::Residue(1)],
            GroupModel::Cyclic(n) => vec![GroupElement::Residue(1), GroupElement::Residue(n - 1)],
        }
    }

    pub fn generator_count(&self) -> usize {
        match self {
            GroupModel::FreeAbelian(d) => 2 * d,
            GroupModel::Heisenberg => 4,
            GroupModel::Free(k) => 2 * k,
            GroupModel::Lamplighter => 3,
            GroupModel::Cyclic(2) => 1,
            GroupModel::Cyclic(_) => 2,
        }
    }

    /// Index of the inverse of generator `i`.
    pub fn inverse_generator(&self, i: usize) -> usize {
        match self {
            GroupModel::Lamplighter if i == 2 => 2,
            GroupModel::Cyclic(2) => 0,
            _ => i ^ 1,
        }
    }

    /// One representative per inverse pair (the lower index).
    pub fn primal_generators(&self) -> Vec<usize> {
        (0..self.generator_count())
            .filter(|&i| i <= self.inverse_generator(i))
            .collect()
    }

    /// Human-readable generator label, e.g. `e1^-1`, `y`, `B`.
    pub fn generator_label(&self, i: usize) -> String {
        let primal = i.min(self.inverse_generator(i));
        let base = match self {
            GroupModel::FreeAbelian(_) => format!("e{}", primal / 2 + 1),
            GroupModel::Heisenberg => ["x", "y"][primal / 2].to_string(),
            GroupModel::Free(_) => ((b'a' + (primal / 2) as u8) as char).to_string(),
            GroupModel::Lamplighter => ["t", "", "s"][primal].to_string(),
            GroupModel::Cyclic(_) => "t".to_string(),
        };
        if primal == i {
            base
        } else if let GroupModel::Free(_) = self {
            base.to_uppercase()
        } else {
            format!("{base}^-1")
        }
    }

    /// Inverse of [`GroupModel::generator_label`].
    pub fn generator_index(&self, label: &str) -> Option<usize> {
        (0..self.generator_count()).find(|&i| self.generator_label(i) == label)
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.0.iter()
            .map(|&i| self.generator_label(i))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn validate(&self, g: &GroupElement) -> Result<()> {
        match (self, g) {
            (GroupModel::FreeAbelian(d), GroupElement::Vector(v)) if v.len() == *d => Ok(()),
            (GroupModel::Heisenberg, GroupElement::Heisenberg(..)) => Ok(()),
            (GroupModel::Free(k), GroupElement::Word(w)) => {
                if w.iter().any(|&l| l as usize >= 2 * k) {
                    return Err(invalid(self, format!("letter out of range in {g}")));
                }
                if w.windows(2).any(|p| p[0] ^ 1 == p[1]) {
                    return Err(invalid(self, format!("word {g} is not reduced")));
                }
                Ok(())
            }
            (GroupModel::Lamplighter, GroupElement::Lamplighter { lamps, .. }) => {
                if lamps.windows(2).all(|p| p[0] < p[1]) {
                    Ok(())
                } else {
                    Err(invalid(self, "lamps must be strictly increasing"))
                }
            }
            (GroupModel::Cyclic(n), GroupElement::Residue(r)) if r < n => Ok(()),
            _ => Err(invalid(self, format!("encoding {g:?} does not belong to this model"))),
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.multiply_unchecked(a, b))
    }

    fn multiply_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match (self, a, b) {
            (_, GroupElement::Vector(x), GroupElement::Vector(y)) => {
                GroupElement::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (_, GroupElement::Heisenberg(a1, b1, c1), GroupElement::Heisenberg(a2, b2, c2)) => {
                GroupElement::Heisenberg(a1 + a2, b1 + b2, c1 + c2 + a1 * b2)
            }
            (_, GroupElement::Word(x), GroupElement::Word(y)) => {
                let mut w = x.clone();
                for &l in y {
                    reduce_into(&mut w, l);
                }
                GroupElement::Word(w)
            }
            (
                _,
                GroupElement::Lamplighter {
                    lamps: f1,
                    cursor: c1,
                },
                GroupElement::Lamplighter {
                    lamps: f2,
                    cursor: c2,
                },
            ) => {
                let shifted: Vec<i64> = f2.iter().map(|p| p + c1).collect();
                GroupElement::Lamplighter {
                    lamps: sym_diff(f1, &shifted),
                    cursor: c1 + c2,
                }
            }
            (GroupModel::Cyclic(n), GroupElement::Residue(x), GroupElement::Residue(y)) => {
                GroupElement::Residue(((*x as u128 + *y as u128) % *n as u128) as u64)
            }
            _ => unreachable!("validated elements share the model's encoding"),
        }
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.validate(a)?;
        Ok(match (self, a) {
            (_, GroupElement::Vector(v)) => GroupElement::Vector(v.iter().map(|x| -x).collect()),
            (_, GroupElement::Heisenberg(a, b, c)) => GroupElement::Heisenberg(-a, -b, a * b - c),
            (_, GroupElement::Word(w)) => GroupElement::Word(w.iter().rev().map(|l| l ^ 1).collect()),
            (_, GroupElement::Lamplighter { lamps, cursor }) => GroupElement::Lamplighter {
                lamps: lamps.iter().map(|p| p - cursor).collect(),
                cursor: -cursor,
            },
            (GroupModel::Cyclic(n), GroupElement::Residue(r)) => GroupElement::Residue((n - r) % n),
            _ => unreachable!(),
        })
    }

    /// Evaluates a word under the group law.
    pub fn evaluate(&self, w: &Word) -> Result<GroupElement> {
        let gens = self.generators();
        let mut acc = self.identity();
        for &i in &w.0 {
            let g = gens
                .get(i)
                .ok_or_else(|| invalid(self, format!("generator index {i} out of range")))?;
            acc = self.multiply_unchecked(&acc, g);
        }
        Ok(acc)
    }

    /// A word evaluating to `g`. Not geodesic in general.
    pub fn express(&self, g: &GroupElement) -> Result<Word> {
        self.require_presented("express")?;
        self.validate(g)?;
        let mut w = Vec::new();
        match (self, g) {
            (_, GroupElement::Vector(v)) => {
                for (i, &x) in v.iter().enumerate() {
                    let letter = if x > 0 { 2 * i } else { 2 * i + 1 };
                    w.extend(std::iter::repeat_n(letter, x.unsigned_abs() as usize));
                }
            }
            (_, &GroupElement::Heisenberg(a, b, c)) => {
                push_power(&mut w, 0, a);
                push_power(&mut w, 2, b);
                push_commutator_power(&mut w, c - a * b);
            }
            (_, GroupElement::Word(letters)) => w.extend(letters.iter().map(|&l| l as usize)),
            (GroupModel::Cyclic(n), &GroupElement::Residue(r)) => {
                if *n > 2 && r > n / 2 {
                    w.extend(std::iter::repeat_n(1, (n - r) as usize));
                } else {
                    w.extend(std::iter::repeat_n(0, r as usize));
                }
            }
            _ => unreachable!(),
        }
        Ok(Word(w))
    }

    /// A second word for `g`, different from [`GroupModel::express`] whenever
    /// the group allows it. Used to spot-check word independence.
    pub fn alternative_word(&self, g: &GroupElement) -> Result<Word> {
        self.require_presented("alternative_word")?;
        self.validate(g)?;
        match (self, g) {
            (_, GroupElement::Vector(v)) => {
                let mut w = Vec::new();
                for (i, &x) in v.iter().enumerate().rev() {
                    let letter = if x > 0 { 2 * i } else { 2 * i + 1 };
                    w.extend(std::iter::repeat_n(letter, x.unsigned_abs() as usize));
                }
                Ok(Word(w))
            }
            (_, &GroupElement::Heisenberg(a, b, c)) => {
                // y^b x^a = (a, b, 0), then the central correction.
                let mut w = Vec::new();
                push_power(&mut w, 2, b);
                push_power(&mut w, 0, a);
                push_commutator_power(&mut w, c);
                Ok(Word(w))
            }
            (GroupModel::Cyclic(n), &GroupElement::Residue(r)) if *n > 2 => {
                let w = if r > n / 2 {
                    std::iter::repeat_n(0, r as usize).collect()
                } else {
                    std::iter::repeat_n(1, ((n - r) % n) as usize).collect()
                };
                Ok(Word(w))
            }
            _ => {
                let mut w = vec![0, self.inverse_generator(0)];
                w.extend(self.express(g)?.0);
                Ok(Word(w))
            }
        }
    }

    /// Defining relators of the finite presentation.
    pub fn relators(&self) -> Result<Vec<Word>> {
        self.require_presented("relators")?;
        Ok(match self {
            GroupModel::FreeAbelian(d) => {
                let mut rels = Vec::new();
                for i in 0..*d {
                    for j in i + 1..*d {
                        rels.push(Word(vec![2 * i, 2 * j, 2 * i + 1, 2 * j + 1]));
                    }
                }
                rels
            }
            GroupModel::Heisenberg => {
                let z = [0, 2, 1, 3];
                let z_inv = [2, 0, 3, 1];
                let mut xy_z = z.to_vec();
                xy_z.extend(z_inv);
                let commute_with_z = |g: usize, g_inv: usize| {
                    let mut w = vec![g];
                    w.extend(z);
                    w.push(g_inv);
                    w.extend(z_inv);
                    Word(w)
                };
                vec![Word(xy_z), commute_with_z(0, 1), commute_with_z(2, 3)]
            }
            GroupModel::Free(_) => Vec::new(),
            GroupModel::Cyclic(n) => vec![Word(vec![0; *n as usize])],
            GroupModel::Lamplighter => unreachable!(),
        })
    }

    /// Exact ball `{x : |x| <= r}` by breadth-first search.
    pub fn ball(&self, r: usize, budget: usize) -> Result<Ball> {
        let codec = Codec::new(self)?;
        let mut sizes = Vec::new();
        let mut elements = Vec::new();
        self.bfs(&codec, r, budget, |layer, total| {
            elements.extend(layer.iter().map(|&k| codec.unpack(k)));
            sizes.push(total);
        })?;
        Ok(Ball { elements, sizes })
    }

    /// `|B_j|` for `j <= r`, without materialising elements.
    pub fn ball_sizes(&self, r: usize, budget: usize) -> Result<Vec<usize>> {
        let codec = Codec::new(self)?;
        let mut sizes = Vec::new();
        self.bfs(&codec, r, budget, |_, total| sizes.push(total))?;
        Ok(sizes)
    }

    fn bfs(
        &self,
        codec: &Codec,
        r: usize,
        budget: usize,
        mut on_layer: impl FnMut(&[u64], usize),
    ) -> Result<()> {
        let overflow = |reached: usize| Error::BudgetExceeded {
            what: format!("ball in {self}"),
            limit: budget,
            reached,
        };
        let gens: Vec<u64> = self
            .generators()
            .iter()
            .map(|g| codec.pack(g).expect("generators always pack"))
            .collect();
        let id = codec.pack(&self.identity()).expect("identity always packs");
        let mut seen = FxHashSet::default();
        seen.insert(id);
        let mut frontier = vec![id];
        on_layer(&frontier, 1);
        for radius in 1..=r {
            let mut next = Vec::new();
            for &k in &frontier {
                for &s in &gens {
                    let y = codec.mul(k, s).ok_or_else(|| overflow(radius - 1))?;
                    if seen.insert(y) {
                        next.push(y);
                    }
                }
                if seen.len() > budget {
                    return Err(overflow(radius - 1));
                }
            }
            next.sort_unstable();
            on_layer(&next, seen.len());
            frontier = next;
        }
        Ok(())
    }

    /// Parses an element in the format produced by `Display`.
    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let s = s.trim();
        let bad = |detail: &str| Error::parse("element", format!("{detail}: {s:?}"));
        let g = match self {
            GroupModel::FreeAbelian(_) | GroupModel::Heisenberg => {
                let inner = s
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| bad("expected (..)"))?;
                let coords = inner
                    .split(',')
                    .map(|t| t.trim().parse::<i64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("bad integer"))?;
                match self {
                    GroupModel::Heisenberg => match coords[..] {
                        [a, b, c] => GroupElement::Heisenberg(a, b, c),
                        _ => return Err(bad("expected three coordinates")),
                    },
                    _ => GroupElement::Vector(coords),
                }
            }
            GroupModel::Free(_) => {
                let mut w = Vec::new();
                if s != "1" {
                    for ch in s.chars() {
                        let letter = match ch {
                            'a'..='z' => 2 * (ch as u8 - b'a'),
                            'A'..='Z' => 2 * (ch as u8 - b'A') + 1,
                            _ => return Err(bad("expected letters")),
                        };
                        reduce_into(&mut w, letter);
                    }
                }
                GroupElement::Word(w)
            }
            GroupModel::Lamplighter => {
                let (set, cursor) = s.split_once('@').ok_or_else(|| bad("expected {..}@c"))?;
                let inner = set
                    .trim()
                    .strip_prefix('{')
                    .and_then(|t| t.strip_suffix('}'))
                    .ok_or_else(|| bad("expected {..}"))?;
                let mut lamps = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|t| t.trim().parse::<i64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("bad lamp position"))?
                };
                lamps.sort_unstable();
                lamps.dedup();
                GroupElement::Lamplighter {
                    lamps,
                    cursor: cursor.trim().parse().map_err(|_| bad("bad cursor"))?,
                }
            }
            GroupModel::Cyclic(_) => GroupElement::Residue(s.parse().map_err(|_| bad("bad residue"))?),
        };
        self.validate(&g)?;
        Ok(g)
    }
}

fn push_power(w: &mut Vec<usize>, letter: usize, exponent: i64) {
    let l = if exponent >= 0 { letter } else { letter + 1 };
    w.extend(std::iter::repeat_n(l, exponent.unsigned_abs() as usize));
}

/// Appends `z^k` with `z = x y x^-1 y^-1`.
fn push_commutator_power(w: &mut Vec<usize>, k: i64) {
    let block: [usize; 4] = if k >= 0 { [0, 2, 1, 3] } else { [2, 0, 3, 1] };
    for _ in 0..k.unsigned_abs() {
        w.extend(block);
    }
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupModel::FreeAbelian(d) => write!(f, "zd:{d}"),
            GroupModel::Heisenberg => write!(f, "heisenberg"),
            GroupModel::Free(k) => write!(f, "free:{k}"),
            GroupModel::Lamplighter => write!(f, "lamplighter"),
            GroupModel::Cyclic(n) => write!(f, "cyclic:{n}"),
        }
    }
}

impl FromStr for GroupModel {
    type Err = Error;

    /// Accepts `zd:<d>`, `heisenberg`, `free:<k>`, `lamplighter`, `cyclic:<N>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.trim().split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s.trim(), None),
        };
        let int = |a: Option<&str>| -> Result<u64> {
            a.ok_or_else(|| Error::parse("group", format!("{name} needs a parameter")))?
                .trim()
                .parse()
                .map_err(|_| Error::parse("group", format!("bad parameter in {s:?}")))
        };
        match name {
            "zd" => GroupModel::free_abelian(int(arg)? as usize),
            "free" => GroupModel::free(int(arg)? as usize),
            "cyclic" => GroupModel::cyclic(int(arg)?),
            "heisenberg" if arg.is_none() => Ok(GroupModel::Heisenberg),
            "lamplighter" if arg.is_none() => Ok(GroupModel::Lamplighter),
            _ => Err(Error::parse("group", format!("unknown group spec {s:?}"))),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            GroupElement::Heisenberg(a, b, c) => write!(f, "({a},{b},{c})"),
            GroupElement::Word(w) if w.is_empty() => write!(f, "1"),
            GroupElement::Word(w) => {
                for &l in w {
                    let c = b'a' + l / 2;
                    let c = if l % 2 == 0 { c } else { c.to_ascii_uppercase() };
                    write!(f, "{}", c as char)?;
                }
                Ok(())
            }
            GroupElement::Lamplighter { lamps, cursor } => {
                let parts: Vec<String> = lamps.iter().map(|x| x.to_string()).collect();
                write!(f, "{{{}}}@{cursor}", parts.join(","))
            }
            GroupElement::Residue(r) => write!(f, "{r}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_models() -> Vec<GroupModel> {
        vec![
            GroupModel::FreeAbelian(1),
            GroupModel::FreeAbelian(2),
            GroupModel::Heisenberg,
            GroupModel::Free(2),
            GroupModel::Lamplighter,
            GroupModel::Cyclic(5),
            GroupModel::Cyclic(2),
        ]
    }

    fn random_element(model: &GroupModel, rng: &mut ChaCha8Rng, len: usize) -> GroupElement {
        let n = model.generator_count();
        let w = Word((0..len).map(|_| rng.gen_range(0..n)).collect());
        model.evaluate(&w).unwrap()
    }

    #[test]
    fn multiply_examples() {
        let z2 = GroupModel::FreeAbelian(2);
        assert_eq!(
            z2.multiply(&GroupElement::Vector(vec![1, 0]), &GroupElement::Vector(vec![0, 1]))
                .unwrap(),
            GroupElement::Vector(vec![1, 1])
        );
        let h = GroupModel::Heisenberg;
        assert_eq!(
            h.multiply(&GroupElement::Heisenberg(1, 0, 0), &GroupElement::Heisenberg(0, 1, 0))
                .unwrap(),
            GroupElement::Heisenberg(1, 1, 1)
        );
        let f2 = GroupModel::Free(2);
        let abb = f2.evaluate(&Word(vec![0, 2, 3])).unwrap();
        let a_inv = f2.parse_element("A").unwrap();
        assert_eq!(f2.multiply(&abb, &a_inv).unwrap(), f2.identity());
    }

    #[test]
    fn mismatched_encoding_is_rejected() {
        let z2 = GroupModel::FreeAbelian(2);
        let err = z2
            .multiply(&GroupElement::Residue(1), &GroupElement::Vector(vec![0, 0]))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidElement { .. }));
        assert!(GroupModel::Cyclic(5).validate(&GroupElement::Residue(5)).is_err());
        assert!(GroupModel::Free(2).validate(&GroupElement::Word(vec![0, 1])).is_err());
    }

    #[test]
    fn inverse_examples() {
        let z2 = GroupModel::FreeAbelian(2);
        assert_eq!(
            z2.inverse(&GroupElement::Vector(vec![3, -1])).unwrap(),
            GroupElement::Vector(vec![-3, 1])
        );
        assert_eq!(
            GroupModel::Heisenberg
                .inverse(&GroupElement::Heisenberg(1, 1, 1))
                .unwrap(),
            GroupElement::Heisenberg(-1, -1, 0)
        );
        assert_eq!(
            GroupModel::Cyclic(5).inverse(&GroupElement::Residue(2)).unwrap(),
            GroupElement::Residue(3)
        );
    }

    #[test]
    fn generator_lists() {
        assert_eq!(GroupModel::FreeAbelian(1).generators().len(), 2);
        assert_eq!(GroupModel::Heisenberg.generators().len(), 4);
        assert_eq!(GroupModel::Free(2).generators().len(), 4);
        for model in all_models() {
            let gens = model.generators();
            assert_eq!(gens.len(), model.generator_count());
            for (i, g) in gens.iter().enumerate() {
                assert_ne!(*g, model.identity());
                let inv = model.inverse(g).unwrap();
                assert_eq!(gens[model.inverse_generator(i)], inv, "{model} generator {i}");
                assert_eq!(model.generator_index(&model.generator_label(i)), Some(i));
            }
        }
    }

    #[test]
    fn ball_sizes_match_closed_forms() {
        let z2 = GroupModel::FreeAbelian(2);
        let sizes = z2.ball_sizes(30, DEFAULT_BUDGET).unwrap();
        for (r, &s) in sizes.iter().enumerate() {
            assert_eq!(s, 2 * r * r + 2 * r + 1);
        }
        let f2 = GroupModel::Free(2);
        assert_eq!(f2.ball(2, DEFAULT_BUDGET).unwrap().elements.len(), 17);
        for model in all_models() {
            let b = model.ball(0, 10).unwrap();
            assert_eq!(b.elements, vec![model.identity()]);
        }
    }

    #[test]
    fn ball_budget_reports_partial_radius() {
        let err = GroupModel::Free(2).ball_sizes(20, 1000).unwrap_err();
        match err {
            Error::BudgetExceeded { reached, .. } => assert_eq!(reached, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn express_examples() {
        let z2 = GroupModel::FreeAbelian(2);
        assert_eq!(
            z2.express(&GroupElement::Vector(vec![2, -1])).unwrap(),
            Word(vec![0, 0, 3])
        );
        assert_eq!(
            GroupModel::Heisenberg
                .express(&GroupElement::Heisenberg(0, 0, 1))
                .unwrap(),
            Word(vec![0, 2, 1, 3])
        );
        let f2 = GroupModel::Free(2);
        let g = f2.parse_element("abA").unwrap();
        assert_eq!(f2.express(&g).unwrap(), Word(vec![0, 2, 1]));
        assert!(matches!(
            GroupModel::Lamplighter.express(&GroupModel::Lamplighter.identity()),
            Err(Error::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn relator_examples() {
        assert!(GroupModel::Free(2).relators().unwrap().is_empty());
        let r = GroupModel::FreeAbelian(2).relators().unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].len(), 4);
        let r = GroupModel::Cyclic(3).relators().unwrap();
        assert_eq!(r, vec![Word(vec![0, 0, 0])]);
        assert!(GroupModel::Lamplighter.relators().is_err());
    }

    #[test]
    fn relators_evaluate_to_identity() {
        for model in all_models().into_iter().filter(|m| m.is_finitely_presented()) {
            for rel in model.relators().unwrap() {
                assert_eq!(model.evaluate(&rel).unwrap(), model.identity(), "{model}");
            }
        }
    }

    #[test]
    fn express_round_trips_on_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for model in all_models().into_iter().filter(|m| m.is_finitely_presented()) {
            for _ in 0..1000 {
                let len = rng.gen_range(0..12);
                let g = random_element(&model, &mut rng, len);
                assert_eq!(model.evaluate(&model.express(&g).unwrap()).unwrap(), g);
                assert_eq!(model.evaluate(&model.alternative_word(&g).unwrap()).unwrap(), g);
            }
        }
    }

    #[test]
    fn group_axioms_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for model in all_models() {
            let e = model.identity();
            for _ in 0..300 {
                let a = random_element(&model, &mut rng, 6);
                let b = random_element(&model, &mut rng, 6);
                let c = random_element(&model, &mut rng, 6);
                let ab_c = model.multiply(&model.multiply(&a, &b).unwrap(), &c).unwrap();
                let a_bc = model.multiply(&a, &model.multiply(&b, &c).unwrap()).unwrap();
                assert_eq!(ab_c, a_bc);
                assert_eq!(model.multiply(&a, &e).unwrap(), a);
                assert_eq!(model.multiply(&e, &a).unwrap(), a);
                let inv = model.inverse(&a).unwrap();
                assert_eq!(model.multiply(&a, &inv).unwrap(), e);
                assert_eq!(model.inverse(&inv).unwrap(), a);
            }
        }
    }

    #[test]
    fn element_strings_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for model in all_models() {
            for _ in 0..100 {
                let g = random_element(&model, &mut rng, 8);
                assert_eq!(model.parse_element(&g.to_string()).unwrap(), g);
            }
        }
    }

    #[test]
    fn group_specs_parse() {
        for s in ["zd:2", "heisenberg", "free:2", "lamplighter", "cyclic:12"] {
            let m: GroupModel = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        for s in ["zd:0", "cyclic:1", "nosuch", "free", "heisenberg:3"] {
            assert!(s.parse::<GroupModel>().is_err(), "{s}");
        }
    }
}
