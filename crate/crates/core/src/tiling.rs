//! Quasitilings of windows: greedy layered construction, the enumeration-based
//! disjointification, ε-disjointness and covering predicates, and the
//! symbolic encoding of a tiling as a block of center labels.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::block::{Block, Grid};
use crate::error::{Error, Result};
use crate::flow::MaxFlow;
use crate::group::{
    folner_set, lower_banach_density_mask, lower_banach_density_window, BoxWindow, FiniteSubset,
    GroupElement, GroupId, Window,
};

/// A tile shape together with the Følner set it was cut from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape {
    pub set: FiniteSubset,
    /// k such that `set` is a large subset of F_k.
    pub folner_index: usize,
    /// Layer of the construction that produced it (1 = smallest).
    pub layer: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    pub shape: usize,
    pub center: GroupElement,
    pub set: FiniteSubset,
}

/// Tiles S·c for S in `shapes` (ids 1..=len) and c in `centers[id]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quasitiling {
    pub group: GroupId,
    pub shapes: Vec<Shape>,
    pub centers: BTreeMap<usize, Vec<GroupElement>>,
    pub window: Window,
}

impl Quasitiling {
    pub fn new(
        group: GroupId,
        shapes: Vec<Shape>,
        centers: BTreeMap<usize, Vec<GroupElement>>,
        window: Window,
    ) -> Result<Quasitiling> {
        let mut centers = centers;
        for cs in centers.values_mut() {
            cs.sort_unstable();
            cs.dedup();
        }
        centers.retain(|_, cs| !cs.is_empty());
        let t = Quasitiling {
            group,
            shapes,
            centers,
            window,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn empty(window: Window) -> Quasitiling {
        Quasitiling {
            group: window.group(),
            shapes: Vec::new(),
            centers: BTreeMap::new(),
            window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.group.identity();
        for (i, s) in self.shapes.iter().enumerate() {
            if !s.set.contains(&e) {
                return Err(Error::Tiling(format!("shape {} does not contain e", i + 1)));
            }
        }
        let mut seen = HashMap::new();
        for (&id, cs) in &self.centers {
            if id == 0 || id > self.shapes.len() {
                return Err(Error::Tiling(format!("centers for unknown shape {id}")));
            }
            for c in cs {
                if let Some(prev) = seen.insert(*c, id) {
                    return Err(Error::Tiling(format!(
                        "center {c:?} used by shapes {prev} and {id}"
                    )));
                }
            }
        }
        for t in self.tiles() {
            if let Some(g) = t.set.iter().find(|g| !self.window.contains(g)) {
                return Err(Error::DomainEscape(*g));
            }
        }
        Ok(())
    }

    pub fn shape(&self, id: usize) -> &Shape {
        &self.shapes[id - 1]
    }

    pub fn tile_count(&self) -> usize {
        self.centers.values().map(Vec::len).sum()
    }

    /// Tiles in canonical order: by shape id, then by center.
    pub fn tiles(&self) -> Vec<Tile> {
        let mut out = Vec::with_capacity(self.tile_count());
        for (&id, cs) in &self.centers {
            let s = &self.shapes[id - 1].set;
            for &c in cs {
                out.push(Tile {
                    shape: id,
                    center: c,
                    set: FiniteSubset::new(s.iter().map(|&f| f * c)),
                });
            }
        }
        out
    }

    pub fn union(&self) -> FiniteSubset {
        FiniteSubset::new(self.tiles().into_iter().flat_map(|t| t.set.iter().copied().collect::<Vec<_>>()))
    }

    /// The tiling moved by right multiplication by `g` (window included, for
    /// abelian box windows and explicit regions).
    pub fn translate(&self, g: GroupElement) -> Result<Quasitiling> {
        let window = match &self.window {
            Window::Box(b) => Window::Box(BoxWindow::new(
                b.group,
                b.lo.iter().enumerate().map(|(i, l)| l + g.coord(i)).collect(),
                b.len.clone(),
            )?),
            Window::Region { group, region } => Window::Region {
                group: *group,
                region: region.translate(g, crate::group::Side::Right),
            },
        };
        Quasitiling::new(
            self.group,
            self.shapes.clone(),
            self.centers
                .iter()
                .map(|(&id, cs)| (id, cs.iter().map(|&c| c * g).collect()))
                .collect(),
            window,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingParams {
    pub eta: f64,
    /// Smallest Følner index used.
    pub k_min: usize,
    pub seed: u64,
}

impl TilingParams {
    pub fn new(eta: f64, k_min: usize, seed: u64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidArgument(format!("η = {eta} must lie in (0, 1)")));
        }
        if k_min == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        Ok(TilingParams { eta, k_min, seed })
    }

    /// Følner index of layer i (1-based).
    pub fn folner_index(&self, layer: usize) -> usize {
        self.k_min + layer - 1
    }
}

/// Smallest m with (1−η)^m < η.
pub fn layer_count(eta: f64) -> usize {
    let mut m = 1;
    while (1.0 - eta).powi(m as i32) >= eta {
        m += 1;
    }
    m
}

/// True iff `sub` ⊆ `sup` and |sub| > α|sup|.
pub fn is_alpha_subset(sub: &FiniteSubset, sup: &FiniteSubset, alpha: f64) -> bool {
    sub.is_subset(sup) && sub.len() as f64 > alpha * sup.len() as f64
}

struct Fenwick2 {
    h: usize,
    w: usize,
    t: Vec<i32>,
}

impl Fenwick2 {
    fn new(h: usize, w: usize) -> Self {
        Fenwick2 {
            h,
            w,
            t: vec![0; (h + 1) * (w + 1)],
        }
    }

    fn add(&mut self, r: usize, c: usize, v: i32) {
        let mut i = r + 1;
        while i <= self.h {
            let mut j = c + 1;
            while j <= self.w {
                self.t[i * (self.w + 1) + j] += v;
                j += j & j.wrapping_neg();
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over [0, r) × [0, c).
    fn prefix(&self, r: usize, c: usize) -> i32 {
        let mut s = 0;
        let mut i = r;
        while i > 0 {
            let mut j = c;
            while j > 0 {
                s += self.t[i * (self.w + 1) + j];
                j -= j & j.wrapping_neg();
            }
            i -= i & i.wrapping_neg();
        }
        s
    }

    fn rect(&self, r: usize, c: usize, h: usize, w: usize) -> i32 {
        self.prefix(r + h, c + w) - self.prefix(r, c + w) - self.prefix(r + h, c) + self.prefix(r, c)
    }
}

/// Greedy layered quasitiling of a box window, before disjointification.
///
/// Layers are processed from the largest Følner set down. Each layer scans
/// positions lexicographically twice: the first pass only accepts tiles
/// disjoint from everything placed so far; the second accepts a tile when the
/// cells it shares with placed tiles number fewer than η|F_k| and no earlier
/// tile would end up with η or more of its own cells shared. The seed only
/// shifts the starting phase of the top layer.
pub fn construct_quasitiling_layers(w: &BoxWindow, p: &TilingParams) -> Result<Quasitiling> {
    let layers = layer_count(p.eta);
    let group = w.group;
    let dim = w.dim();
    let (h, width) = if dim == 1 { (1, w.len[0]) } else { (w.len[0], w.len[1]) };
    let k_top = p.folner_index(layers);
    if 2 * k_top + 1 > width || (dim == 2 && 2 * k_top + 1 > h) {
        return Err(Error::WindowTooSmall { n: k_top });
    }
    let mut rng = crate::source::rng(p.seed);
    let mut fen = Fenwick2::new(h, width);
    let mut count = vec![0u16; h * width];
    let mut owner = vec![u32::MAX; h * width];
    let mut tile_area: Vec<usize> = Vec::new();
    let mut tile_overlap: Vec<usize> = Vec::new();
    let mut centers: BTreeMap<usize, Vec<GroupElement>> = BTreeMap::new();
    let mut add: HashMap<u32, usize> = HashMap::new();

    for layer in (1..=layers).rev() {
        let k = p.folner_index(layer);
        let m = 2 * k + 1;
        let rows = if dim == 1 { 1 } else { m };
        let area = rows * m;
        let limit = p.eta * area as f64;
        let (r0, c0) = if layer == layers {
            (if dim == 1 { 0 } else { rng.gen_range(0..m) }, rng.gen_range(0..m))
        } else {
            (0, 0)
        };
        for pass in 0..2 {
            for r in r0..=h - rows {
                for c in c0..=width - m {
                    let ov = fen.rect(r, c, rows, m) as usize;
                    if ov as f64 >= limit || (pass == 0 && ov > 0) {
                        continue;
                    }
                    if ov > 0 {
                        add.clear();
                        for rr in r..r + rows {
                            for cc in c..c + m {
                                let i = rr * width + cc;
                                if count[i] == 1 {
                                    *add.entry(owner[i]).or_insert(0) += 1;
                                }
                            }
                        }
                        let ok = add.iter().all(|(&t, &a)| {
                            ((tile_overlap[t as usize] + a) as f64) < p.eta * tile_area[t as usize] as f64
                        });
                        if !ok {
                            continue;
                        }
                        for (&t, &a) in &add {
                            tile_overlap[t as usize] += a;
                        }
                    }
                    let id = tile_area.len() as u32;
                    for rr in r..r + rows {
                        for cc in c..c + m {
                            let i = rr * width + cc;
                            if count[i] == 0 {
                                owner[i] = id;
                                fen.add(rr, cc, 1);
                            }
                            count[i] = count[i].saturating_add(1);
                        }
                    }
                    tile_area.push(area);
                    tile_overlap.push(ov);
                    let center_idx = if dim == 1 {
                        c + k
                    } else {
                        (r + k) * width + c + k
                    };
                    centers.entry(layer).or_default().push(w.point(center_idx));
                }
            }
        }
    }

    let shapes = (1..=layers)
        .map(|layer| {
            let k = p.folner_index(layer);
            Shape {
                set: folner_set(group, k),
                folner_index: k,
                layer,
            }
        })
        .collect();
    Quasitiling::new(group, shapes, centers, Window::Box(w.clone()))
}

/// Greedy layered construction followed by disjointification.
pub fn construct_quasitiling(w: &BoxWindow, p: &TilingParams) -> Result<Quasitiling> {
    disjointify(&construct_quasitiling_layers(w, p)?, None)
}

/// e first, then the remaining elements of ∪ shapes in canonical order.
pub fn canonical_enumeration(t: &Quasitiling) -> Vec<GroupElement> {
    let e = t.group.identity();
    let all = FiniteSubset::new(t.shapes.iter().flat_map(|s| s.set.iter().copied()));
    std::iter::once(e)
        .chain(all.iter().copied().filter(|g| *g != e))
        .collect()
}

/// Assign every contested element h to the tile S·c in which h = f·c has
/// f earliest in `enumeration`, removing it from all other tiles.
pub fn disjointify(t: &Quasitiling, enumeration: Option<&[GroupElement]>) -> Result<Quasitiling> {
    let owned;
    let enumeration = match enumeration {
        Some(e) => e,
        None => {
            owned = canonical_enumeration(t);
            &owned
        }
    };
    let index: HashMap<GroupElement, usize> = enumeration
        .iter()
        .enumerate()
        .map(|(i, g)| (*g, i))
        .collect();
    let tiles = t.tiles();
    // h -> (best j, tile index, tied)
    let mut best: HashMap<GroupElement, (usize, usize, bool)> = HashMap::new();
    for (ti, tile) in tiles.iter().enumerate() {
        let cinv = tile.center.inv();
        for &h in tile.set.iter() {
            let f = h * cinv;
            let j = *index.get(&f).ok_or_else(|| Error::Disjointify {
                at: h,
                reason: format!("{f:?} missing from the enumeration"),
            })?;
            best.entry(h)
                .and_modify(|b| {
                    if j < b.0 {
                        *b = (j, ti, false);
                    } else if j == b.0 {
                        b.2 = true;
                    }
                })
                .or_insert((j, ti, false));
        }
    }
    if let Some((h, b)) = best
        .iter()
        .filter(|(_, b)| b.2)
        .min_by_key(|(h, _)| **h)
    {
        return Err(Error::Disjointify {
            at: *h,
            reason: format!("two tiles contain it with the same index {}", b.0),
        });
    }
    let mut shape_ids: BTreeMap<Shape, usize> = BTreeMap::new();
    let mut shapes: Vec<Shape> = Vec::new();
    let mut centers: BTreeMap<usize, Vec<GroupElement>> = BTreeMap::new();
    for (ti, tile) in tiles.iter().enumerate() {
        if best[&tile.center].1 != ti {
            return Err(Error::Disjointify {
                at: tile.center,
                reason: "center reassigned to another tile".into(),
            });
        }
        let cinv = tile.center.inv();
        let kept = FiniteSubset::new(
            tile.set
                .iter()
                .filter(|h| best[h].1 == ti)
                .map(|&h| h * cinv),
        );
        let parent = t.shape(tile.shape);
        let shape = Shape {
            set: kept,
            folner_index: parent.folner_index,
            layer: parent.layer,
        };
        let id = match shape_ids.get(&shape) {
            Some(&id) => id,
            None => {
                shapes.push(shape.clone());
                shape_ids.insert(shape, shapes.len());
                shapes.len()
            }
        };
        centers.entry(id).or_default().push(tile.center);
    }
    Quasitiling::new(t.group, shapes, centers, t.window.clone())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsDisjointness {
    pub holds: bool,
    /// Pairwise disjoint T° ⊆ T, one per tile in canonical order.
    pub witness: Option<Vec<FiniteSubset>>,
}

fn required_size(len: usize, eps: f64) -> usize {
    if eps <= 0.0 {
        return len;
    }
    let x = (1.0 - eps) * len as f64;
    if x < 0.0 {
        0
    } else {
        x.floor() as usize + 1
    }
}

/// Whether the tiles admit pairwise-disjoint subsets T° with |T°| > (1−ε)|T|
/// (for ε = 0: T° = T, i.e. exact disjointness). Decided exactly by a
/// maximum flow from tiles to contested elements.
pub fn is_epsilon_disjoint(t: &Quasitiling, eps: f64) -> EpsDisjointness {
    let tiles = t.tiles();
    let mut mult: HashMap<GroupElement, usize> = HashMap::new();
    for tile in &tiles {
        for g in tile.set.iter() {
            *mult.entry(*g).or_insert(0) += 1;
        }
    }
    let needs: Vec<usize> = tiles.iter().map(|x| required_size(x.set.len(), eps)).collect();
    if needs.iter().zip(&tiles).any(|(&n, x)| n > x.set.len()) {
        return EpsDisjointness {
            holds: false,
            witness: None,
        };
    }
    let mut contested: Vec<GroupElement> = mult
        .iter()
        .filter(|(_, &m)| m > 1)
        .map(|(g, _)| *g)
        .collect();
    contested.sort_unstable();
    if contested.is_empty() {
        return EpsDisjointness {
            holds: true,
            witness: Some(tiles.into_iter().map(|x| x.set).collect()),
        };
    }
    let cidx: HashMap<GroupElement, usize> =
        contested.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let nt = tiles.len();
    let (src, sink) = (0, 1 + nt + contested.len());
    let mut g = MaxFlow::new(sink + 1);
    let mut total_need = 0i64;
    let mut handles = Vec::new();
    for (ti, tile) in tiles.iter().enumerate() {
        let free = tile.set.iter().filter(|h| mult[h] == 1).count();
        let need = needs[ti].saturating_sub(free) as i64;
        total_need += need;
        if need > 0 {
            g.add_edge(src, 1 + ti, need);
        }
        for h in tile.set.iter().filter(|h| mult[h] > 1) {
            handles.push((ti, *h, g.add_edge(1 + ti, 1 + nt + cidx[h], 1)));
        }
    }
    for i in 0..contested.len() {
        g.add_edge(1 + nt + i, sink, 1);
    }
    let flow = g.run(src, sink);
    if flow < total_need {
        return EpsDisjointness {
            holds: false,
            witness: None,
        };
    }
    let mut kept: Vec<Vec<GroupElement>> = tiles
        .iter()
        .map(|x| x.set.iter().copied().filter(|h| mult[h] == 1).collect())
        .collect();
    for (ti, h, e) in handles {
        if g.flow(e) > 0 {
            kept[ti].push(h);
        }
    }
    EpsDisjointness {
        holds: true,
        witness: Some(kept.into_iter().map(FiniteSubset::new).collect()),
    }
}

fn union_mask(t: &Quasitiling, b: &BoxWindow) -> Vec<bool> {
    let mut mask = vec![false; b.size()];
    for tile in t.tiles() {
        for g in tile.set.iter() {
            if let Some(i) = b.index(g) {
                mask[i] = true;
            }
        }
    }
    mask
}

/// Window-scale lower Banach density of the union of tiles.
pub fn covering_density(t: &Quasitiling, n: usize) -> Result<f64> {
    match &t.window {
        Window::Box(b) => lower_banach_density_mask(&union_mask(t, b), b, n),
        w => lower_banach_density_window(&t.union(), w, n),
    }
}

/// Covering density over the box shrunk by `margin` on every side.
pub fn interior_covering_density(t: &Quasitiling, n: usize, margin: usize) -> Result<f64> {
    let Window::Box(b) = &t.window else {
        return Err(Error::InvalidArgument("interior density needs a box window".into()));
    };
    let inner = b.shrink(margin).ok_or(Error::WindowTooSmall { n })?;
    lower_banach_density_mask(&union_mask(t, &inner), &inner, n)
}

/// Largest shape diameter, the natural boundary margin for interior statistics.
pub fn boundary_margin(t: &Quasitiling) -> usize {
    t.shapes
        .iter()
        .map(|s| 2 * s.set.radius() as usize + 1)
        .max()
        .unwrap_or(0)
}

/// Symbol i at each center of shape i, 0 elsewhere, over the whole window.
pub fn symbolic_encode(t: &Quasitiling) -> Result<Block> {
    let alphabet = t.shapes.len() as u32;
    let mut labels: BTreeMap<GroupElement, u32> = BTreeMap::new();
    for (&id, cs) in &t.centers {
        for c in cs {
            if !t.window.contains(c) {
                return Err(Error::DomainEscape(*c));
            }
            if labels.insert(*c, id as u32).is_some() {
                return Err(Error::Tiling(format!("center collision at {c:?}")));
            }
        }
    }
    match &t.window {
        Window::Box(b) => {
            let mut grid = Grid::filled(b.clone(), alphabet, 0);
            for (c, id) in labels {
                grid.set(&c, id)?;
            }
            Ok(grid.to_block())
        }
        Window::Region { region, .. } => Block::new(
            region.clone(),
            region
                .iter()
                .map(|g| labels.get(g).copied().unwrap_or(0))
                .collect(),
            alphabet,
        ),
    }
}

pub fn symbolic_decode(b: &Block, shapes: &[Shape], window: &Window) -> Result<Quasitiling> {
    let mut centers: BTreeMap<usize, Vec<GroupElement>> = BTreeMap::new();
    for (g, s) in b.iter() {
        if s > 0 {
            centers.entry(s as usize).or_default().push(g);
        }
    }
    Quasitiling::new(window.group(), shapes.to_vec(), centers, window.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(a: i64) -> GroupElement {
        GroupElement::z1(a)
    }

    fn interval(a: i64, b: i64) -> FiniteSubset {
        (a..=b).map(z).collect()
    }

    fn line(len: usize) -> Window {
        Window::cube(GroupId::Z1, len).unwrap()
    }

    fn tiling(shapes: Vec<FiniteSubset>, centers: Vec<(usize, i64)>, len: usize) -> Quasitiling {
        let shapes = shapes
            .into_iter()
            .map(|set| Shape {
                folner_index: set.radius() as usize,
                layer: 1,
                set,
            })
            .collect();
        let mut cs: BTreeMap<usize, Vec<GroupElement>> = BTreeMap::new();
        for (id, c) in centers {
            cs.entry(id).or_default().push(z(c));
        }
        Quasitiling::new(GroupId::Z1, shapes, cs, line(len)).unwrap()
    }

    #[test]
    fn layer_counts() {
        assert_eq!(layer_count(0.1), 22);
        assert_eq!(layer_count(0.5), 2);
        assert_eq!(layer_count(0.05), 59);
    }

    #[test]
    fn disjointify_hand_trace() {
        let t = tiling(vec![interval(0, 2)], vec![(1, 0), (1, 2)], 10);
        let enumeration = [z(0), z(1), z(2)];
        let d = disjointify(&t, Some(&enumeration)).unwrap();
        let tiles = d.tiles();
        assert_eq!(tiles[0].set, interval(0, 1));
        assert_eq!(tiles[1].set, interval(2, 4));
        assert_eq!(d.union(), t.union());
    }

    #[test]
    fn disjointify_keeps_disjoint_input() {
        let t = tiling(vec![interval(-1, 1)], vec![(1, 1), (1, 4), (1, 7)], 10);
        let d = disjointify(&t, None).unwrap();
        assert_eq!(d.tiles().iter().map(|x| x.set.clone()).collect::<Vec<_>>(),
                   t.tiles().iter().map(|x| x.set.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn disjointify_rejects_shared_index() {
        // two shapes sharing a center would give the center index 0 twice
        let shapes = vec![
            Shape { set: interval(-1, 1), folner_index: 1, layer: 1 },
            Shape { set: interval(-2, 2), folner_index: 2, layer: 2 },
        ];
        let t = Quasitiling {
            group: GroupId::Z1,
            shapes,
            centers: BTreeMap::from([(1, vec![z(3)]), (2, vec![z(3)])]),
            window: line(10),
        };
        assert!(matches!(disjointify(&t, None), Err(Error::Disjointify { .. })));
    }

    #[test]
    fn epsilon_disjoint_examples() {
        let t = tiling(vec![interval(0, 9)], vec![(1, 0), (1, 8)], 20);
        let r = is_epsilon_disjoint(&t, 0.25);
        assert!(r.holds);
        let w = r.witness.unwrap();
        assert!(w[0].len() >= 8 && w[1].len() >= 8);
        assert_eq!(w[0].intersection_len(&w[1]), 0);
        assert!(!is_epsilon_disjoint(&t, 0.0).holds);

        let shapes = vec![
            Shape { set: interval(0, 9), folner_index: 9, layer: 1 },
            Shape { set: interval(-5, 4), folner_index: 5, layer: 2 },
        ];
        let same = Quasitiling::new(
            GroupId::Z1,
            shapes,
            BTreeMap::from([(1, vec![z(0)]), (2, vec![z(5)])]),
            line(20),
        )
        .unwrap();
        assert_eq!(same.tiles()[0].set, same.tiles()[1].set);
        assert!(!is_epsilon_disjoint(&same, 0.25).holds);

        let disjoint = tiling(vec![interval(0, 2)], vec![(1, 0), (1, 3)], 10);
        assert!(is_epsilon_disjoint(&disjoint, 0.0).holds);
    }

    #[test]
    fn covering_examples() {
        let w = BoxWindow::cube(GroupId::Z2, 32).unwrap();
        let shape = FiniteSubset::new(
            (0..8).flat_map(|a| (0..8).map(move |b| GroupElement::z2(a, b))),
        );
        let centers: Vec<GroupElement> = (0..4)
            .flat_map(|i| (0..4).map(move |j| GroupElement::z2(8 * i, 8 * j)))
            .collect();
        let t = Quasitiling::new(
            GroupId::Z2,
            vec![Shape { set: shape, folner_index: 4, layer: 1 }],
            BTreeMap::from([(1, centers)]),
            Window::Box(w.clone()),
        )
        .unwrap();
        assert_eq!(covering_density(&t, 3).unwrap(), 1.0);
        assert_eq!(covering_density(&Quasitiling::empty(Window::Box(w)), 3).unwrap(), 0.0);
    }

    #[test]
    fn encode_decode() {
        let t = tiling(vec![interval(-1, 1), interval(0, 2)], vec![(1, 1), (2, 5)], 10);
        let b = symbolic_encode(&t).unwrap();
        assert_eq!(b.get(&z(1)), Some(1));
        assert_eq!(b.get(&z(5)), Some(2));
        assert_eq!(b.get(&z(0)), Some(0));
        assert_eq!(symbolic_decode(&b, &t.shapes, &t.window).unwrap(), t);
        let empty = Quasitiling::empty(line(5));
        assert!(symbolic_encode(&empty).unwrap().symbols().iter().all(|&s| s == 0));
    }

    #[test]
    fn small_construction_is_disjoint_and_covers() {
        let w = BoxWindow::cube(GroupId::Z2, 64).unwrap();
        let p = TilingParams::new(0.5, 2, 3).unwrap();
        let raw = construct_quasitiling_layers(&w, &p).unwrap();
        let t = disjointify(&raw, None).unwrap();
        assert!(is_epsilon_disjoint(&t, 0.0).holds);
        let parents: HashMap<GroupElement, Tile> =
            raw.tiles().into_iter().map(|x| (x.center, x)).collect();
        assert_eq!(parents.len(), t.tile_count());
        for tile in t.tiles() {
            assert!(is_alpha_subset(&tile.set, &parents[&tile.center].set, 1.0 - p.eta));
        }
        assert_eq!(t.union(), raw.union());
        assert!(interior_covering_density(&t, 2, boundary_margin(&raw)).unwrap() > 0.5);
    }
}
