//! Concrete countable groups, their Følner sequences and window arithmetic.
//!
//! Elements are small integer tuples. One- and two-coordinate elements live in
//! the free abelian groups ℤ and ℤ²; three-coordinate elements are matrix
//! coordinates `(a, b, c)` of the discrete Heisenberg group, with product
//! `(a, b, c)(a', b', c') = (a + a', b + b', c + c' + a b')`.
//!
//! All sets are stored sorted in lexicographic coordinate order, which is also
//! the canonical order used for scanning, enumeration and serialization.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which concrete group the coordinates of an element refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupId {
    #[serde(rename = "z1")]
    Z1,
    #[serde(rename = "z2")]
    Z2,
    #[serde(rename = "h3")]
    H3,
}

impl GroupId {
    pub fn dim(self) -> usize {
        match self {
            GroupId::Z1 => 1,
            GroupId::Z2 => 2,
            GroupId::H3 => 3,
        }
    }

    pub fn from_dim(dim: usize) -> Result<GroupId> {
        match dim {
            1 => Ok(GroupId::Z1),
            2 => Ok(GroupId::Z2),
            3 => Ok(GroupId::H3),
            d => Err(Error::UnknownGroup(format!("{d}-coordinate elements"))),
        }
    }

    pub fn is_abelian(self) -> bool {
        !matches!(self, GroupId::H3)
    }

    pub fn identity(self) -> GroupElement {
        GroupElement {
            coords: [0; 3],
            dim: self.dim() as u8,
        }
    }

    pub fn element(self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} coordinates, got {}",
                self,
                self.dim(),
                coords.len()
            )));
        }
        let mut c = [0i64; 3];
        c[..coords.len()].copy_from_slice(coords);
        Ok(GroupElement {
            coords: c,
            dim: self.dim() as u8,
        })
    }

    /// Standard generators, used for invariance diagnostics.
    pub fn generators(self) -> Vec<GroupElement> {
        match self {
            GroupId::Z1 => vec![GroupElement::z1(1)],
            GroupId::Z2 => vec![GroupElement::z2(1, 0), GroupElement::z2(0, 1)],
            GroupId::H3 => vec![GroupElement::h3(1, 0, 0), GroupElement::h3(0, 1, 0)],
        }
    }

    /// Elements of the nonnegative orthant in max-norm shells, lexicographic
    /// within a shell. This is the scan order used for canonical choices
    /// (marker coordinates in particular); for ℤ it is simply 0, 1, 2, ...
    pub fn shell_scan(self) -> impl Iterator<Item = GroupElement> {
        let dim = self.dim();
        (0i64..).flat_map(move |r| {
            let mut shell = Vec::new();
            let mut cur = vec![0i64; dim];
            loop {
                if cur.iter().copied().max().unwrap_or(0) == r {
                    let mut c = [0i64; 3];
                    c[..dim].copy_from_slice(&cur);
                    shell.push(GroupElement {
                        coords: c,
                        dim: dim as u8,
                    });
                }
                // odometer over [0, r]^dim, last coordinate fastest
                let mut i = dim;
                loop {
                    if i == 0 {
                        return shell.into_iter();
                    }
                    i -= 1;
                    if cur[i] < r {
                        cur[i] += 1;
                        for c in cur.iter_mut().skip(i + 1) {
                            *c = 0;
                        }
                        break;
                    }
                }
            }
        })
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupId::Z1 => "z1",
            GroupId::Z2 => "z2",
            GroupId::H3 => "h3",
        })
    }
}

impl FromStr for GroupId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z1" | "z" => Ok(GroupId::Z1),
            "z2" => Ok(GroupId::Z2),
            "h3" | "heisenberg" => Ok(GroupId::H3),
            other => Err(Error::UnknownGroup(other.to_string())),
        }
    }
}

/// An element of ℤ, ℤ² or the Heisenberg group, depending on `dim`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    coords: [i64; 3],
    dim: u8,
}

impl GroupElement {
    pub const fn z1(a: i64) -> Self {
        GroupElement {
            coords: [a, 0, 0],
            dim: 1,
        }
    }

    pub const fn z2(a: i64, b: i64) -> Self {
        GroupElement {
            coords: [a, b, 0],
            dim: 2,
        }
    }

    pub const fn h3(a: i64, b: i64, c: i64) -> Self {
        GroupElement {
            coords: [a, b, c],
            dim: 3,
        }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, i: usize) -> i64 {
        self.coords[i]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn group(&self) -> GroupId {
        GroupId::from_dim(self.dim()).expect("element dimension is always 1..=3")
    }

    pub fn is_identity(&self) -> bool {
        self.coords == [0; 3]
    }

    pub fn inv(&self) -> GroupElement {
        let [a, b, c] = self.coords;
        let coords = if self.dim == 3 {
            [-a, -b, -c + a * b]
        } else {
            [-a, -b, -c]
        };
        GroupElement {
            coords,
            dim: self.dim,
        }
    }

    /// Max-norm of the coordinates.
    pub fn radius(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        debug_assert_eq!(self.dim, rhs.dim, "elements of different groups");
        let [a, b, c] = self.coords;
        let [a2, b2, c2] = rhs.coords;
        let coords = if self.dim == 3 {
            [a + a2, b + b2, c + c2 + a * b2]
        } else {
            [a + a2, b + b2, c + c2]
        };
        GroupElement {
            coords,
            dim: self.dim,
        }
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then_with(|| self.coords.cmp(&other.coords))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<i64> = Vec::deserialize(deserializer)?;
        let group = GroupId::from_dim(v.len()).map_err(de::Error::custom)?;
        group.element(&v).map_err(de::Error::custom)
    }
}

/// Side of a translate: `Left` gives gF, `Right` gives Fg.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A finite set of group elements, kept sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteSubset {
    elements: Vec<GroupElement>,
}

impl FiniteSubset {
    pub fn new(elements: impl IntoIterator<Item = GroupElement>) -> Self {
        let mut elements: Vec<_> = elements.into_iter().collect();
        elements.sort_unstable();
        elements.dedup();
        FiniteSubset { elements }
    }

    pub fn empty() -> Self {
        FiniteSubset::default()
    }

    pub fn singleton(g: GroupElement) -> Self {
        FiniteSubset { elements: vec![g] }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elements.iter()
    }

    pub fn as_slice(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    /// Position of `g` in canonical order.
    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.elements.binary_search(g).ok()
    }

    pub fn is_subset(&self, other: &FiniteSubset) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    pub fn translate(&self, g: GroupElement, side: Side) -> FiniteSubset {
        FiniteSubset::new(self.elements.iter().map(|&f| match side {
            Side::Left => g * f,
            Side::Right => f * g,
        }))
    }

    pub fn inverse(&self) -> FiniteSubset {
        FiniteSubset::new(self.elements.iter().map(|g| g.inv()))
    }

    /// Element-wise product `self · other`.
    pub fn product(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset::new(
            self.elements
                .iter()
                .flat_map(|&a| other.elements.iter().map(move |&b| a * b)),
        )
    }

    pub fn union(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset::new(self.elements.iter().chain(other.elements.iter()).copied())
    }

    pub fn intersection(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset {
            elements: self
                .elements
                .iter()
                .filter(|g| other.contains(g))
                .copied()
                .collect(),
        }
    }

    pub fn difference(&self, other: &FiniteSubset) -> FiniteSubset {
        FiniteSubset {
            elements: self
                .elements
                .iter()
                .filter(|g| !other.contains(g))
                .copied()
                .collect(),
        }
    }

    pub fn intersection_len(&self, other: &FiniteSubset) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.elements.iter().filter(|g| large.contains(g)).count()
    }

    pub fn symmetric_difference_len(&self, other: &FiniteSubset) -> usize {
        self.len() + other.len() - 2 * self.intersection_len(other)
    }

    /// Max-norm radius of the set.
    pub fn radius(&self) -> i64 {
        self.elements.iter().map(|g| g.radius()).max().unwrap_or(0)
    }
}

impl FromIterator<GroupElement> for FiniteSubset {
    fn from_iter<I: IntoIterator<Item = GroupElement>>(iter: I) -> Self {
        FiniteSubset::new(iter)
    }
}

impl<'a> IntoIterator for &'a FiniteSubset {
    type Item = &'a GroupElement;
    type IntoIter = std::slice::Iter<'a, GroupElement>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

/// F_n for the fixed Følner sequence of `group`.
///
/// For ℤ^d this is the box [−n, n]^d. For the Heisenberg group it is B_n ∪ B_n⁻¹
/// with B_n = {|a|, |b| ≤ n, |c| ≤ n²}, which keeps the sequence symmetric.
pub fn folner(group: GroupId, n: usize) -> Result<FiniteSubset> {
    if n == 0 {
        return Err(Error::InvalidArgument("Følner index must be at least 1".into()));
    }
    Ok(folner_set(group, n))
}

/// Same as [`folner`] but also accepts n = 0, which yields {e}.
pub fn folner_set(group: GroupId, n: usize) -> FiniteSubset {
    let r = n as i64;
    match group {
        GroupId::Z1 => FiniteSubset {
            elements: (-r..=r).map(GroupElement::z1).collect(),
        },
        GroupId::Z2 => FiniteSubset {
            elements: (-r..=r)
                .flat_map(|a| (-r..=r).map(move |b| GroupElement::z2(a, b)))
                .collect(),
        },
        GroupId::H3 => {
            let r2 = r * r;
            let base: FiniteSubset = (-r..=r)
                .flat_map(|a| {
                    (-r..=r).flat_map(move |b| (-r2..=r2).map(move |c| GroupElement::h3(a, b, c)))
                })
                .collect();
            base.union(&base.inverse())
        }
    }
}

/// max over g ∈ K of |gF △ F| / |F|.
pub fn invariance_defect(f: &FiniteSubset, k: &FiniteSubset) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptySet("invariance_defect: F"));
    }
    Ok(k.iter()
        .map(|&g| f.translate(g, Side::Left).symmetric_difference_len(f) as f64 / f.len() as f64)
        .fold(0.0, f64::max))
}

pub fn translate_set(f: &FiniteSubset, g: GroupElement, side: Side) -> FiniteSubset {
    f.translate(g, side)
}

/// An axis-aligned box in ℤ or ℤ², with the last coordinate varying fastest
/// in its linear index (so index order is lexicographic order).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxWindow {
    pub group: GroupId,
    pub lo: Vec<i64>,
    pub len: Vec<usize>,
}

impl BoxWindow {
    pub fn new(group: GroupId, lo: Vec<i64>, len: Vec<usize>) -> Result<Self> {
        if !group.is_abelian() {
            return Err(Error::InvalidArgument(
                "box windows exist only for z1 and z2".into(),
            ));
        }
        if lo.len() != group.dim() || len.len() != group.dim() {
            return Err(Error::InvalidArgument("box dimension mismatch".into()));
        }
        if len.iter().any(|&l| l == 0) {
            return Err(Error::EmptySet("window"));
        }
        Ok(BoxWindow { group, lo, len })
    }

    /// The cube [0, side)^d.
    pub fn cube(group: GroupId, side: usize) -> Result<Self> {
        BoxWindow::new(group, vec![0; group.dim()], vec![side; group.dim()])
    }

    pub fn dim(&self) -> usize {
        self.len.len()
    }

    pub fn size(&self) -> usize {
        self.len.iter().product()
    }

    pub fn index(&self, g: &GroupElement) -> Option<usize> {
        let mut idx = 0usize;
        for i in 0..self.dim() {
            let off = g.coord(i) - self.lo[i];
            if off < 0 || off as usize >= self.len[i] {
                return None;
            }
            idx = idx * self.len[i] + off as usize;
        }
        Some(idx)
    }

    pub fn point(&self, mut idx: usize) -> GroupElement {
        let mut c = [0i64; 3];
        for i in (0..self.dim()).rev() {
            c[i] = self.lo[i] + (idx % self.len[i]) as i64;
            idx /= self.len[i];
        }
        GroupElement {
            coords: c,
            dim: self.dim() as u8,
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index(g).is_some()
    }

    pub fn points(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.size()).map(move |i| self.point(i))
    }

    /// Linear stride of each coordinate.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dim()];
        for i in (0..self.dim().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.len[i + 1];
        }
        s
    }

    /// The box shrunk by `margin` on every side, if anything is left.
    pub fn shrink(&self, margin: usize) -> Option<BoxWindow> {
        if self.len.iter().any(|&l| l <= 2 * margin) {
            return None;
        }
        Some(BoxWindow {
            group: self.group,
            lo: self.lo.iter().map(|&l| l + margin as i64).collect(),
            len: self.len.iter().map(|&l| l - 2 * margin).collect(),
        })
    }

    pub fn to_subset(&self) -> FiniteSubset {
        FiniteSubset {
            elements: self.points().collect(),
        }
    }
}

/// The finite region of the group on which an experiment lives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    Box(BoxWindow),
    Region { group: GroupId, region: FiniteSubset },
}

impl Window {
    pub fn cube(group: GroupId, side: usize) -> Result<Window> {
        Ok(Window::Box(BoxWindow::cube(group, side)?))
    }

    pub fn region(group: GroupId, region: FiniteSubset) -> Result<Window> {
        if region.is_empty() {
            return Err(Error::EmptySet("window"));
        }
        Ok(Window::Region { group, region })
    }

    pub fn group(&self) -> GroupId {
        match self {
            Window::Box(b) => b.group,
            Window::Region { group, .. } => *group,
        }
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        match self {
            Window::Box(b) => b.contains(g),
            Window::Region { region, .. } => region.contains(g),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Window::Box(b) => b.size(),
            Window::Region { region, .. } => region.len(),
        }
    }

    pub fn to_subset(&self) -> FiniteSubset {
        match self {
            Window::Box(b) => b.to_subset(),
            Window::Region { region, .. } => region.clone(),
        }
    }

    pub fn as_box(&self) -> Option<&BoxWindow> {
        match self {
            Window::Box(b) => Some(b),
            Window::Region { .. } => None,
        }
    }
}

/// Window-scale surrogate for lower Banach density: the minimum of
/// |A ∩ F_n g| / |F_n| over all g with F_n g ⊆ W.
pub fn lower_banach_density_window(a: &FiniteSubset, w: &Window, n: usize) -> Result<f64> {
    match w {
        Window::Box(b) => {
            let mut mask = vec![false; b.size()];
            for g in a.iter() {
                if let Some(i) = b.index(g) {
                    mask[i] = true;
                }
            }
            lower_banach_density_mask(&mask, b, n)
        }
        Window::Region { group, region } => {
            let f = folner_set(*group, n);
            let finv = f.inverse();
            let candidates = finv.product(region);
            let mut best: Option<f64> = None;
            for g in candidates.iter() {
                let mut inside = true;
                let mut hits = 0usize;
                for &x in f.iter() {
                    let y = x * *g;
                    if !region.contains(&y) {
                        inside = false;
                        break;
                    }
                    if a.contains(&y) {
                        hits += 1;
                    }
                }
                if inside {
                    let d = hits as f64 / f.len() as f64;
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
            best.ok_or(Error::WindowTooSmall { n })
        }
    }
}

/// [`lower_banach_density_window`] for a set given as a membership mask over a box.
pub fn lower_banach_density_mask(mask: &[bool], b: &BoxWindow, n: usize) -> Result<f64> {
    let side = 2 * n + 1;
    if b.len.iter().any(|&l| l < side) {
        return Err(Error::WindowTooSmall { n });
    }
    let fsize = side.pow(b.dim() as u32) as f64;
    match b.dim() {
        1 => {
            let len = b.len[0];
            let mut prefix = vec![0usize; len + 1];
            for i in 0..len {
                prefix[i + 1] = prefix[i] + mask[i] as usize;
            }
            let min = (0..=len - side)
                .map(|s| prefix[s + side] - prefix[s])
                .min()
                .unwrap_or(0);
            Ok(min as f64 / fsize)
        }
        2 => {
            let (h, w) = (b.len[0], b.len[1]);
            let mut ps = vec![0usize; (h + 1) * (w + 1)];
            for i in 0..h {
                let mut row = 0usize;
                for j in 0..w {
                    row += mask[i * w + j] as usize;
                    ps[(i + 1) * (w + 1) + j + 1] = ps[i * (w + 1) + j + 1] + row;
                }
            }
            let mut min = usize::MAX;
            for i in 0..=h - side {
                for j in 0..=w - side {
                    let s = ps[(i + side) * (w + 1) + j + side] + ps[i * (w + 1) + j]
                        - ps[i * (w + 1) + j + side]
                        - ps[(i + side) * (w + 1) + j];
                    min = min.min(s);
                }
            }
            Ok(min as f64 / fsize)
        }
        _ => Err(Error::InvalidArgument("box windows are one- or two-dimensional".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folner_boxes() {
        let f = folner(GroupId::Z2, 1).unwrap();
        assert_eq!(f.len(), 9);
        let f3 = folner(GroupId::Z1, 3).unwrap();
        assert_eq!(f3.len(), 7);
        assert!(f3.contains(&GroupElement::z1(0)));
        assert_eq!(f3.inverse(), f3);
        assert_eq!(folner(GroupId::Z2, 10).unwrap().len(), 441);
        assert!(folner(GroupId::Z1, 0).is_err());
    }

    #[test]
    fn folner_sequence_invariants() {
        for group in [GroupId::Z1, GroupId::Z2, GroupId::H3] {
            let top = if group == GroupId::H3 { 3 } else { 8 };
            for n in 1..top {
                let f = folner_set(group, n);
                let g = folner_set(group, n + 1);
                assert!(f.is_subset(&g), "{group} F_{n} ⊄ F_{}", n + 1);
                assert!(f.contains(&group.identity()));
                assert_eq!(f.inverse(), f);
            }
        }
    }

    #[test]
    fn defect_examples() {
        let f = folner(GroupId::Z2, 10).unwrap();
        let k = FiniteSubset::singleton(GroupElement::z2(1, 0));
        let d = invariance_defect(&f, &k).unwrap();
        assert!((d - 42.0 / 441.0).abs() < 1e-12);
        let e = FiniteSubset::singleton(GroupId::Z2.identity());
        assert_eq!(invariance_defect(&f, &e).unwrap(), 0.0);
        assert!(invariance_defect(&FiniteSubset::empty(), &e).is_err());

        let one = FiniteSubset::singleton(GroupElement::z1(1));
        let mut prev = f64::INFINITY;
        for n in 1..=30 {
            let d = invariance_defect(&folner(GroupId::Z1, n).unwrap(), &one).unwrap();
            assert!((d - 2.0 / (2 * n + 1) as f64).abs() < 1e-12);
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn defect_monotone_on_z2_and_small_for_large_n() {
        let gens: FiniteSubset = GroupId::Z2.generators().into_iter().collect();
        let mut prev = f64::INFINITY;
        for n in 1..=30 {
            let d = invariance_defect(&folner_set(GroupId::Z2, n), &gens).unwrap();
            assert!(d <= prev);
            prev = d;
        }
        assert!(prev < 0.04);
    }

    #[test]
    fn translates() {
        let f: FiniteSubset = (0..3).map(GroupElement::z1).collect();
        let t = translate_set(&f, GroupElement::z1(5), Side::Right);
        assert_eq!(t, (5..8).map(GroupElement::z1).collect());
        assert_eq!(translate_set(&f, GroupId::Z1.identity(), Side::Left), f);
    }

    #[test]
    fn heisenberg_is_a_noncommutative_group() {
        let x = GroupElement::h3(1, 0, 0);
        let y = GroupElement::h3(0, 1, 0);
        assert_ne!(x * y, y * x);
        for g in [x, y, GroupElement::h3(2, -3, 5)] {
            assert!((g * g.inv()).is_identity());
            assert!((g.inv() * g).is_identity());
        }
        let a = GroupElement::h3(1, 2, 3);
        let b = GroupElement::h3(-4, 1, 0);
        let c = GroupElement::h3(2, 2, -7);
        assert_eq!((a * b) * c, a * (b * c));

        let f = FiniteSubset::new([GroupId::H3.identity(), y]);
        assert_ne!(
            translate_set(&f, x, Side::Left),
            translate_set(&f, x, Side::Right)
        );
    }

    #[test]
    fn lbd_examples() {
        let w = Window::cube(GroupId::Z2, 12).unwrap();
        let all = w.to_subset();
        assert_eq!(lower_banach_density_window(&all, &w, 2).unwrap(), 1.0);
        assert_eq!(
            lower_banach_density_window(&FiniteSubset::empty(), &w, 2).unwrap(),
            0.0
        );
        let even: FiniteSubset = all.iter().filter(|g| g.coord(1) % 2 == 0).copied().collect();
        let d = lower_banach_density_window(&even, &w, 1).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            lower_banach_density_window(&all, &w, 6),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn lbd_region_path_agrees_with_box_path() {
        let b = Window::cube(GroupId::Z2, 9).unwrap();
        let r = Window::region(GroupId::Z2, b.to_subset()).unwrap();
        let a: FiniteSubset = b
            .to_subset()
            .iter()
            .filter(|g| (g.coord(0) * 3 + g.coord(1) * 5) % 7 < 4)
            .copied()
            .collect();
        for n in 1..=3 {
            let x = lower_banach_density_window(&a, &b, n).unwrap();
            let y = lower_banach_density_window(&a, &r, n).unwrap();
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn shell_scan_order() {
        let z: Vec<_> = GroupId::Z1.shell_scan().take(4).collect();
        assert_eq!(z, (0..4).map(GroupElement::z1).collect::<Vec<_>>());
        let z2: Vec<_> = GroupId::Z2.shell_scan().take(4).collect();
        assert_eq!(
            z2,
            vec![
                GroupElement::z2(0, 0),
                GroupElement::z2(0, 1),
                GroupElement::z2(1, 0),
                GroupElement::z2(1, 1)
            ]
        );
    }

    #[test]
    fn element_json_is_a_coordinate_list() {
        let g = GroupElement::z2(3, -1);
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, "[3,-1]");
        let back: GroupElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
