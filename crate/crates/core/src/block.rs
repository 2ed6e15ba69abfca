//! Blocks (finite patterns), dense box configurations and occurrence counting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{BoxWindow, FiniteSubset, GroupElement, GroupId};

/// Anything that assigns symbols to a finite set of group elements.
pub trait Configuration {
    fn group(&self) -> GroupId;
    fn alphabet(&self) -> u32;
    fn symbol_at(&self, g: &GroupElement) -> Option<u32>;
    fn domain_len(&self) -> usize;
    /// Domain elements in canonical order.
    fn positions(&self) -> Box<dyn Iterator<Item = GroupElement> + '_>;
}

/// A map from a finite domain into {0, …, alphabet}. Symbols are stored in
/// the canonical order of the domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BlockWire", into = "BlockWire")]
pub struct Block {
    domain: FiniteSubset,
    symbols: Vec<u32>,
    alphabet: u32,
}

#[derive(Serialize, Deserialize)]
struct BlockWire {
    alphabet: u32,
    domain: Vec<GroupElement>,
    symbols: Vec<u32>,
}

impl TryFrom<BlockWire> for Block {
    type Error = Error;

    fn try_from(w: BlockWire) -> Result<Block> {
        Block::from_pairs(w.domain.into_iter().zip(w.symbols), w.alphabet)
    }
}

impl From<Block> for BlockWire {
    fn from(b: Block) -> BlockWire {
        BlockWire {
            alphabet: b.alphabet,
            domain: b.domain.iter().copied().collect(),
            symbols: b.symbols,
        }
    }
}

impl Block {
    /// `symbols[i]` is the symbol at the i-th element of `domain` in canonical order.
    pub fn new(domain: FiniteSubset, symbols: Vec<u32>, alphabet: u32) -> Result<Block> {
        if domain.len() != symbols.len() {
            return Err(Error::InvalidArgument(format!(
                "block has {} domain elements but {} symbols",
                domain.len(),
                symbols.len()
            )));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s > alphabet) {
            return Err(Error::InvalidArgument(format!(
                "symbol {bad} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Block {
            domain,
            symbols,
            alphabet,
        })
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (GroupElement, u32)>,
        alphabet: u32,
    ) -> Result<Block> {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_by_key(|p| p.0);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "element {:?} assigned twice",
                    w[0].0
                )));
            }
        }
        let (domain, symbols): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Block::new(FiniteSubset::new(domain), symbols, alphabet)
    }

    pub fn constant(domain: FiniteSubset, symbol: u32, alphabet: u32) -> Result<Block> {
        let n = domain.len();
        Block::new(domain, vec![symbol; n], alphabet)
    }

    /// A one-dimensional block on {0, …, len−1} ⊂ ℤ.
    pub fn word(symbols: &[u32], alphabet: u32) -> Result<Block> {
        Block::new(
            (0..symbols.len() as i64).map(GroupElement::z1).collect(),
            symbols.to_vec(),
            alphabet,
        )
    }

    pub fn domain(&self) -> &FiniteSubset {
        &self.domain
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, g: &GroupElement) -> Option<u32> {
        self.domain.index_of(g).map(|i| self.symbols[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (GroupElement, u32)> + '_ {
        self.domain.iter().copied().zip(self.symbols.iter().copied())
    }

    pub fn restrict(&self, d: &FiniteSubset) -> Result<Block> {
        let mut symbols = Vec::with_capacity(d.len());
        for g in d.iter() {
            symbols.push(self.get(g).ok_or(Error::DomainEscape(*g))?);
        }
        Block::new(d.clone(), symbols, self.alphabet)
    }

    /// The block B·g defined on domain(B)·g with (B·g)(d g) = B(d).
    pub fn translate_right(&self, g: GroupElement) -> Block {
        Block::from_pairs(self.iter().map(|(d, s)| (d * g, s)), self.alphabet)
            .expect("right translation is injective")
    }

    /// Pattern of `self` read through `shape` at `g`: symbols at d·g for d in
    /// canonical order of `shape`. `None` if any d·g is outside the domain.
    pub fn pattern_at(&self, shape: &FiniteSubset, g: GroupElement) -> Option<Vec<u32>> {
        read_pattern(self, shape, g)
    }
}

impl Configuration for Block {
    fn group(&self) -> GroupId {
        self.domain
            .iter()
            .next()
            .map(|g| g.group())
            .unwrap_or(GroupId::Z1)
    }

    fn alphabet(&self) -> u32 {
        self.alphabet
    }

    fn symbol_at(&self, g: &GroupElement) -> Option<u32> {
        self.get(g)
    }

    fn domain_len(&self) -> usize {
        self.len()
    }

    fn positions(&self) -> Box<dyn Iterator<Item = GroupElement> + '_> {
        Box::new(self.domain.iter().copied())
    }
}

/// A dense configuration on a box window of ℤ or ℤ².
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub window: BoxWindow,
    pub alphabet: u32,
    pub data: Vec<u32>,
}

impl Grid {
    pub fn new(window: BoxWindow, alphabet: u32, data: Vec<u32>) -> Result<Grid> {
        if data.len() != window.size() {
            return Err(Error::InvalidArgument(format!(
                "grid data length {} does not match window size {}",
                data.len(),
                window.size()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&s| s > alphabet) {
            return Err(Error::InvalidArgument(format!(
                "symbol {bad} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Grid {
            window,
            alphabet,
            data,
        })
    }

    pub fn filled(window: BoxWindow, alphabet: u32, symbol: u32) -> Grid {
        let n = window.size();
        Grid {
            window,
            alphabet,
            data: vec![symbol; n],
        }
    }

    pub fn get(&self, g: &GroupElement) -> Option<u32> {
        self.window.index(g).map(|i| self.data[i])
    }

    pub fn set(&mut self, g: &GroupElement, symbol: u32) -> Result<()> {
        let i = self.window.index(g).ok_or(Error::DomainEscape(*g))?;
        self.data[i] = symbol;
        Ok(())
    }

    pub fn to_block(&self) -> Block {
        Block {
            domain: self.window.to_subset(),
            symbols: self.data.clone(),
            alphabet: self.alphabet,
        }
    }

    pub fn from_block(b: &Block) -> Result<Grid> {
        let group = b.group();
        if !group.is_abelian() || b.is_empty() {
            return Err(Error::InvalidArgument("grid needs a box in z1 or z2".into()));
        }
        let dim = group.dim();
        let lo: Vec<i64> = (0..dim)
            .map(|i| b.domain.iter().map(|g| g.coord(i)).min().unwrap())
            .collect();
        let hi: Vec<i64> = (0..dim)
            .map(|i| b.domain.iter().map(|g| g.coord(i)).max().unwrap())
            .collect();
        let len = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        let window = BoxWindow::new(group, lo, len)?;
        if window.size() != b.len() {
            return Err(Error::InvalidArgument("block domain is not a box".into()));
        }
        Grid::new(window, b.alphabet, b.symbols.clone())
    }

    pub fn pattern_at(&self, shape: &FiniteSubset, g: GroupElement) -> Option<Vec<u32>> {
        read_pattern(self, shape, g)
    }

    /// Apply `f` to every symbol, producing a grid over a new alphabet.
    pub fn map(&self, alphabet: u32, f: impl Fn(u32) -> u32) -> Grid {
        Grid {
            window: self.window.clone(),
            alphabet,
            data: self.data.iter().map(|&s| f(s)).collect(),
        }
    }
}

impl Configuration for Grid {
    fn group(&self) -> GroupId {
        self.window.group
    }

    fn alphabet(&self) -> u32 {
        self.alphabet
    }

    fn symbol_at(&self, g: &GroupElement) -> Option<u32> {
        self.get(g)
    }

    fn domain_len(&self) -> usize {
        self.data.len()
    }

    fn positions(&self) -> Box<dyn Iterator<Item = GroupElement> + '_> {
        Box::new(self.window.points())
    }
}

pub fn read_pattern<C: Configuration + ?Sized>(
    c: &C,
    shape: &FiniteSubset,
    g: GroupElement,
) -> Option<Vec<u32>> {
    shape.iter().map(|&d| c.symbol_at(&(d * g))).collect()
}

/// True iff domain(B)·g ⊆ domain(C) and C(d g) = B(d) for every d.
pub fn occurs_at<C: Configuration + ?Sized>(b: &Block, c: &C, g: GroupElement) -> bool {
    b.iter().all(|(d, s)| c.symbol_at(&(d * g)) == Some(s))
}

/// (1/|domain C|)·|{h ∈ domain C : B′ occurs in C at h}|.
pub fn frequency<C: Configuration + ?Sized>(bp: &Block, c: &C) -> f64 {
    let n = c.domain_len();
    if n == 0 {
        return 0.0;
    }
    let hits = c.positions().filter(|&h| occurs_at(bp, c, h)).count();
    hits as f64 / n as f64
}

/// Counts of every pattern with domain `shape` over all translates fully
/// inside the configuration, plus the number of such translates.
pub fn pattern_counts<C: Configuration + ?Sized>(
    c: &C,
    shape: &FiniteSubset,
) -> (BTreeMap<Vec<u32>, u64>, u64) {
    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    for h in c.positions() {
        if let Some(p) = read_pattern(c, shape, h) {
            *counts.entry(p).or_insert(0) += 1;
            total += 1;
        }
    }
    (counts, total)
}
