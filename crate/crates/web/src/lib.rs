//! Browser bindings: a quasitiling of a square window, the marker blocks of
//! a ℤ² code, and noise on a Bernoulli row.

use wasm_bindgen::prelude::*;

use ergowin::block::Grid;
use ergowin::entropy::{process_entropy_estimate, Partition};
use ergowin::group::{BoxWindow, GroupId};
use ergowin::marker::{construct_markers, verify_marker_uniqueness};
use ergowin::measure::empirical_measure_depths;
use ergowin::perturb::{perturb, NoiseParams};
use ergowin::source::{derive_seed, rng, SourceSpec};
use ergowin::tiling::{
    boundary_margin, construct_quasitiling, interior_covering_density, is_epsilon_disjoint,
    TilingParams,
};

fn js(e: ergowin::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub struct TilingView {
    side: usize,
    labels: Vec<u32>,
    tiles: usize,
    shapes: usize,
    interior_density: f64,
    disjoint: bool,
}

#[wasm_bindgen]
impl TilingView {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }

    /// Row-major tile label per cell, 0 where uncovered.
    pub fn labels(&self) -> Vec<u32> {
        self.labels.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn tiles(&self) -> usize {
        self.tiles
    }

    #[wasm_bindgen(getter)]
    pub fn shapes(&self) -> usize {
        self.shapes
    }

    #[wasm_bindgen(getter)]
    pub fn interior_density(&self) -> f64 {
        self.interior_density
    }

    #[wasm_bindgen(getter)]
    pub fn disjoint(&self) -> bool {
        self.disjoint
    }
}

/// Disjointified greedy quasitiling of the side × side box in ℤ².
#[wasm_bindgen]
pub fn tile_demo(side: usize, eta: f64, k_min: usize, seed: u64) -> Result<TilingView, JsValue> {
    let w = BoxWindow::cube(GroupId::Z2, side).map_err(js)?;
    let p = TilingParams::new(eta, k_min, seed).map_err(js)?;
    let t = construct_quasitiling(&w, &p).map_err(js)?;
    let mut labels = vec![0u32; w.size()];
    for (i, tile) in t.tiles().iter().enumerate() {
        for g in tile.set.iter() {
            if let Some(idx) = w.index(g) {
                labels[idx] = i as u32 + 1;
            }
        }
    }
    Ok(TilingView {
        side,
        labels,
        tiles: t.tile_count(),
        shapes: t.shapes.len(),
        interior_density: interior_covering_density(&t, 4.min(side / 4), boundary_margin(&t).min(side / 4))
            .unwrap_or(f64::NAN),
        disjoint: is_epsilon_disjoint(&t, 0.0).holds,
    })
}

#[wasm_bindgen]
pub struct MarkerView {
    side: usize,
    cells: Vec<u32>,
    count: usize,
    d0: usize,
    unique: bool,
}

#[wasm_bindgen]
impl MarkerView {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.side
    }

    /// Row-major symbols of marker `index` around its centre: 0 off the
    /// domain, 3 on the guard region, else the marker symbol.
    pub fn cells(&self) -> Vec<u32> {
        self.cells.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn count(&self) -> usize {
        self.count
    }

    #[wasm_bindgen(getter)]
    pub fn d0(&self) -> usize {
        self.d0
    }

    #[wasm_bindgen(getter)]
    pub fn unique(&self) -> bool {
        self.unique
    }
}

/// Marker `index` (1-based) of an N-layer code over s symbols in ℤ².
#[wasm_bindgen]
pub fn marker_demo(layers: usize, s: u32, delta_m: f64, index: usize) -> Result<MarkerView, JsValue> {
    let m = construct_markers(layers, delta_m, s, GroupId::Z2).map_err(js)?;
    if index == 0 || index > m.count() {
        return Err(JsValue::from_str(&format!("marker index must lie in 1..={}", m.count())));
    }
    let geo = m.geometry();
    let r = geo.neighbourhood.radius();
    let side = 2 * r as usize + 1;
    let w = BoxWindow::cube(GroupId::Z2, side).map_err(js)?;
    let centre = GroupId::Z2.element(&[r, r]).map_err(js)?;
    let mut grid = Grid::filled(w.clone(), s, 2);
    let mut cells = vec![0u32; w.size()];
    for g in geo.guard.iter() {
        cells[w.index(&(*g * centre)).expect("inside")] = 3;
    }
    for (h, v) in m.block(index - 1).iter() {
        let at = h * centre;
        grid.set(&at, v).map_err(js)?;
        cells[w.index(&at).expect("inside")] = v;
    }
    let unique = verify_marker_uniqueness(&grid, &m, centre).map_err(js)?.holds();
    Ok(MarkerView {
        side,
        cells,
        count: m.count(),
        d0: m.d0.len(),
        unique,
    })
}

#[wasm_bindgen]
pub struct NoiseView {
    before: Vec<u32>,
    after: Vec<u32>,
    h_before: f64,
    h_after: f64,
    bound: f64,
}

#[wasm_bindgen]
impl NoiseView {
    pub fn before(&self) -> Vec<u32> {
        self.before.clone()
    }

    pub fn after(&self) -> Vec<u32> {
        self.after.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn h_before(&self) -> f64 {
        self.h_before
    }

    #[wasm_bindgen(getter)]
    pub fn h_after(&self) -> f64 {
        self.h_after
    }

    /// ĥ + ε(1 − ĥ).
    #[wasm_bindgen(getter)]
    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// Bernoulli(p) row of `len` binary symbols, then noise at rate ε; entropies
/// are per-site block entropies at depth 3.
#[wasm_bindgen]
pub fn perturb_demo(p: f64, eps: f64, len: usize, seed: u64) -> Result<NoiseView, JsValue> {
    let spec = SourceSpec::bernoulli(&[p, 1.0 - p]).map_err(js)?;
    let w = BoxWindow::cube(GroupId::Z1, len).map_err(js)?;
    let x = spec.sample_grid(&w, &mut rng(derive_seed(seed, "x"))).map_err(js)?;
    let np = NoiseParams::new(eps, 2, derive_seed(seed, "noise")).map_err(js)?;
    let y = perturb(&x, &np).map_err(js)?;
    let id = Partition::identity(2);
    let h = |g: &Grid| -> Result<f64, JsValue> {
        let m = empirical_measure_depths(g, [2, 3]).map_err(js)?;
        Ok(process_entropy_estimate(&m, &id, 3).map_err(js)?.per_site)
    };
    let (h_before, h_after) = (h(&x)?, h(&y)?);
    Ok(NoiseView {
        before: x.data,
        after: y.data,
        h_before,
        h_after,
        bound: h_before + eps * (1.0 - h_before),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn views_are_consistent() {
        let t = tile_demo(64, 0.2, 2, 3).unwrap();
        assert!(t.disjoint());
        assert_eq!(t.labels().len(), 64 * 64);
        assert_eq!(t.labels().iter().copied().max().unwrap() as usize, t.tiles());

        let m = marker_demo(2, 2, 0.05, 2).unwrap();
        assert!(m.unique());
        assert_eq!(m.cells().iter().filter(|&&c| c == 1).count(), m.d0() + 1);

        let n = perturb_demo(0.9, 0.3, 4096, 1).unwrap();
        assert!(n.h_after() > n.h_before());
        assert_eq!(n.before().len(), 4096);
    }
}
