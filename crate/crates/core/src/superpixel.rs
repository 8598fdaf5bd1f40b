//! SLIC superpixels on a single-channel raster.
//!
//! Centers start on a regular grid and iterate k-means style in
//! `(intensity, row, col)` space with
//! `D² = Δi² + (compactness / S)² · Δxy²`, `S = sqrt(pixels / target_count)`.
//! A post-pass folds disconnected fragments into the neighbor they share the
//! longest boundary with, so every superpixel is 4-connected.
//!
//! The resulting [`SuperpixelMap`] also provides the spatial neighborhood used
//! by the local-information clustering term: neighbors are adjacent
//! superpixels and distances are between centroids, in pixels.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{quantize, write_gray8, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlicParams {
    pub target_count: usize,
    pub compactness: f64,
    pub max_iters: usize,
}

impl Default for SlicParams {
    fn default() -> Self {
        SlicParams {
            target_count: 500,
            compactness: 0.1,
            max_iters: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpixelMap {
    width: usize,
    height: usize,
    labels: Vec<Option<u32>>,
    centroids: Vec<(f64, f64)>,
    adjacency: Vec<BTreeSet<usize>>,
    sizes: Vec<usize>,
}

const NEIGHBORS4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

impl SuperpixelMap {
    /// Builds a map from an explicit labeling. `None` marks invalid pixels.
    ///
    /// The superpixel count is `max label + 1`; ids without pixels are kept
    /// (with size 0) so callers can exercise that error path downstream.
    pub fn from_labels(width: usize, height: usize, labels: Vec<Option<u32>>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {width}x{height} image",
                labels.len()
            )));
        }
        let count = labels
            .iter()
            .flatten()
            .map(|&l| l as usize + 1)
            .max()
            .unwrap_or(0);
        let mut sums = vec![(0.0f64, 0.0f64); count];
        let mut sizes = vec![0usize; count];
        let mut adjacency = vec![BTreeSet::new(); count];
        for row in 0..height {
            for col in 0..width {
                let Some(l) = labels[row * width + col] else {
                    continue;
                };
                let l = l as usize;
                sizes[l] += 1;
                sums[l].0 += row as f64;
                sums[l].1 += col as f64;
                // right and down neighbors cover every 4-adjacent pair once
                for (r2, c2) in [(row, col + 1), (row + 1, col)] {
                    if r2 >= height || c2 >= width {
                        continue;
                    }
                    if let Some(o) = labels[r2 * width + c2] {
                        let o = o as usize;
                        if o != l {
                            adjacency[l].insert(o);
                            adjacency[o].insert(l);
                        }
                    }
                }
            }
        }
        let centroids = sums
            .iter()
            .zip(&sizes)
            .map(|(&(r, c), &n)| {
                if n == 0 {
                    (f64::NAN, f64::NAN)
                } else {
                    (r / n as f64, c / n as f64)
                }
            })
            .collect();
        Ok(SuperpixelMap {
            width,
            height,
            labels,
            centroids,
            adjacency,
            sizes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of superpixels `N`.
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn labels(&self) -> &[Option<u32>] {
        &self.labels
    }

    pub fn label(&self, row: usize, col: usize) -> Option<usize> {
        self.labels[row * self.width + col].map(|l| l as usize)
    }

    /// `(row, col)` centroid of each superpixel.
    pub fn centroids(&self) -> &[(f64, f64)] {
        &self.centroids
    }

    pub fn adjacency(&self, n: usize) -> &BTreeSet<usize> {
        &self.adjacency[n]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Adjacent superpixels of `n` with the Euclidean centroid distance to each.
    pub fn neighborhood_distances(&self, n: usize) -> Vec<(usize, f64)> {
        let (r0, c0) = self.centroids[n];
        self.adjacency[n]
            .iter()
            .map(|&k| {
                let (r1, c1) = self.centroids[k];
                (k, ((r1 - r0).powi(2) + (c1 - c0).powi(2)).sqrt())
            })
            .collect()
    }

    /// Neighborhood structure for the spatial clustering term.
    pub fn graph(&self) -> SpatialGraph {
        SpatialGraph {
            neighbors: (0..self.count())
                .map(|n| self.neighborhood_distances(n))
                .collect(),
        }
    }

    /// Projects one value per superpixel back to a per-pixel map (0 on invalid pixels).
    pub fn project(&self, per_superpixel: &[f64]) -> Vec<f64> {
        self.labels
            .iter()
            .map(|l| l.map_or(0.0, |l| per_superpixel[l as usize]))
            .collect()
    }

    /// Labels as a 16-bit PNG; invalid pixels are written as `u16::MAX`.
    pub fn write_labels_png16(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let data: Vec<u16> = self
            .labels
            .iter()
            .map(|l| l.map_or(u16::MAX, |l| l.min(u32::from(u16::MAX - 1)) as u16))
            .collect();
        let img = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(
            self.width as u32,
            self.height as u32,
            data,
        )
        .ok_or_else(|| Error::DimensionMismatch("label buffer size".into()))?;
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
    }

    /// Raster with superpixel boundaries painted white.
    pub fn write_boundary_overlay(&self, raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.labels.len());
        for row in 0..self.height {
            for col in 0..self.width {
                let i = row * self.width + col;
                let here = self.labels[i];
                let boundary = here.is_some()
                    && NEIGHBORS4.iter().any(|&(dr, dc)| {
                        offset(row, col, dr, dc, self.height, self.width)
                            .is_some_and(|(r, c)| self.labels[r * self.width + c] != here)
                    });
                bytes.push(match (here, boundary) {
                    (None, _) => 0,
                    (_, true) => 255,
                    _ => quantize(raster.intensities()[i]),
                });
            }
        }
        write_gray8(self.width, self.height, bytes, path.as_ref())
    }
}

/// Per-superpixel neighbor lists `(k, d_nk)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpatialGraph {
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl SpatialGraph {
    pub fn new(neighbors: Vec<Vec<(usize, f64)>>) -> Self {
        SpatialGraph { neighbors }
    }

    /// A graph over `n` nodes with no edges.
    pub fn empty(n: usize) -> Self {
        SpatialGraph {
            neighbors: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, n: usize) -> &[(usize, f64)] {
        &self.neighbors[n]
    }
}

#[inline]
fn offset(
    row: usize,
    col: usize,
    dr: isize,
    dc: isize,
    height: usize,
    width: usize,
) -> Option<(usize, usize)> {
    let r = row.checked_add_signed(dr)?;
    let c = col.checked_add_signed(dc)?;
    (r < height && c < width).then_some((r, c))
}

#[derive(Debug, Clone, Copy)]
struct Center {
    intensity: f64,
    row: f64,
    col: f64,
}

/// Grid shape `(rows, cols)` with roughly `target` cells following the image aspect.
fn grid_shape(width: usize, height: usize, target: usize) -> (usize, usize) {
    let ny = ((target as f64 * height as f64 / width as f64).sqrt().round() as usize).clamp(1, height);
    let nx = ((target as f64 / ny as f64).round() as usize).clamp(1, width);
    (ny, nx)
}

/// Runs SLIC. Deterministic: centers are seeded on a regular grid.
pub fn slic(
    raster: &Raster,
    target_count: usize,
    compactness: f64,
    max_iters: usize,
) -> Result<SuperpixelMap> {
    let valid = raster.valid_count();
    if target_count < 2 || target_count > valid {
        return Err(Error::InvalidParameter(format!(
            "target_count {target_count} outside [2, {valid}]"
        )));
    }
    if !(compactness > 0.0 && compactness.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "compactness must be positive, got {compactness}"
        )));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be positive".into()));
    }
    let (width, height) = (raster.width(), raster.height());
    let step = (raster.len() as f64 / target_count as f64).sqrt();
    let spatial_weight = (compactness / step).powi(2);
    let (ny, nx) = grid_shape(width, height, target_count);
    let cell_h = height as f64 / ny as f64;
    let cell_w = width as f64 / nx as f64;
    let reach = cell_h.max(cell_w);

    let mut centers = Vec::with_capacity(ny * nx);
    for j in 0..ny {
        for i in 0..nx {
            let r0 = (j as f64 * cell_h).round() as usize;
            let r1 = (((j + 1) as f64 * cell_h).round() as usize).min(height);
            let c0 = (i as f64 * cell_w).round() as usize;
            let c1 = (((i + 1) as f64 * cell_w).round() as usize).min(width);
            let row = (r0 + r1 - 1) as f64 / 2.0;
            let col = (c0 + c1 - 1) as f64 / 2.0;
            // intensity from the valid pixel of the cell nearest its center
            let seed = (r0..r1)
                .flat_map(|r| (c0..c1).map(move |c| (r, c)))
                .filter(|&(r, c)| raster.is_valid(r, c))
                .min_by(|a, b| {
                    let da = (a.0 as f64 - row).powi(2) + (a.1 as f64 - col).powi(2);
                    let db = (b.0 as f64 - row).powi(2) + (b.1 as f64 - col).powi(2);
                    da.total_cmp(&db)
                });
            if let Some((r, c)) = seed {
                centers.push(Center {
                    intensity: raster.intensities()[raster.index(r, c)],
                    row,
                    col,
                });
            }
        }
    }

    let dist2 = |c: &Center, r: usize, col: usize, v: f64| {
        (v - c.intensity).powi(2)
            + spatial_weight * ((r as f64 - c.row).powi(2) + (col as f64 - c.col).powi(2))
    };

    let mut labels: Vec<Option<usize>> = vec![None; raster.len()];
    let mut best = vec![f64::INFINITY; raster.len()];
    for _ in 0..max_iters {
        best.iter_mut().for_each(|d| *d = f64::INFINITY);
        let mut next: Vec<Option<usize>> = vec![None; raster.len()];
        for (k, c) in centers.iter().enumerate() {
            let r_lo = (c.row - reach).floor().max(0.0) as usize;
            let r_hi = ((c.row + reach).ceil() as usize).min(height - 1);
            let c_lo = (c.col - reach).floor().max(0.0) as usize;
            let c_hi = ((c.col + reach).ceil() as usize).min(width - 1);
            for r in r_lo..=r_hi {
                for col in c_lo..=c_hi {
                    let i = r * width + col;
                    if !raster.mask()[i] {
                        continue;
                    }
                    let d = dist2(c, r, col, raster.intensities()[i]);
                    if d < best[i] {
                        best[i] = d;
                        next[i] = Some(k);
                    }
                }
            }
        }
        // stragglers outside every search window go to the globally nearest center
        for (i, slot) in next.iter_mut().enumerate() {
            if raster.mask()[i] && slot.is_none() {
                let (r, col) = (i / width, i % width);
                let v = raster.intensities()[i];
                *slot = centers
                    .iter()
                    .enumerate()
                    .min_by(|a, b| dist2(a.1, r, col, v).total_cmp(&dist2(b.1, r, col, v)))
                    .map(|(k, _)| k);
            }
        }
        let changed = next != labels;
        labels = next;
        if !changed {
            break;
        }
        let mut acc = vec![(0.0, 0.0, 0.0, 0usize); centers.len()];
        for (i, l) in labels.iter().enumerate() {
            if let Some(k) = *l {
                let a = &mut acc[k];
                a.0 += raster.intensities()[i];
                a.1 += (i / width) as f64;
                a.2 += (i % width) as f64;
                a.3 += 1;
            }
        }
        for (c, a) in centers.iter_mut().zip(&acc) {
            if a.3 > 0 {
                let n = a.3 as f64;
                *c = Center {
                    intensity: a.0 / n,
                    row: a.1 / n,
                    col: a.2 / n,
                };
            }
        }
    }

    let min_size = ((step * step / 4.0).floor() as usize).max(1);
    let labels = enforce_connectivity(width, height, &labels, min_size);
    SuperpixelMap::from_labels(width, height, labels)
}

/// Splits labels into 4-connected components, folds orphans (secondary fragments
/// and components below `min_size`) into their dominant resolved neighbor, then
/// renumbers by first appearance in raster order.
fn enforce_connectivity(
    width: usize,
    height: usize,
    labels: &[Option<usize>],
    min_size: usize,
) -> Vec<Option<u32>> {
    let mut comp: Vec<Option<usize>> = vec![None; labels.len()];
    let mut comp_label = Vec::new();
    let mut comp_size = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..labels.len() {
        let Some(l) = labels[start] else { continue };
        if comp[start].is_some() {
            continue;
        }
        let id = comp_label.len();
        comp_label.push(l);
        let mut size = 0;
        comp[start] = Some(id);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            size += 1;
            for &(dr, dc) in &NEIGHBORS4 {
                if let Some((r, c)) = offset(i / width, i % width, dr, dc, height, width) {
                    let j = r * width + c;
                    if comp[j].is_none() && labels[j] == Some(l) {
                        comp[j] = Some(id);
                        queue.push_back(j);
                    }
                }
            }
        }
        comp_size.push(size);
    }
    let n_comp = comp_label.len();

    // largest fragment per label survives if it is big enough
    let mut largest: BTreeMap<usize, usize> = BTreeMap::new();
    for id in 0..n_comp {
        let e = largest.entry(comp_label[id]).or_insert(id);
        if comp_size[id] > comp_size[*e] {
            *e = id;
        }
    }
    let mut target: Vec<Option<usize>> = vec![None; n_comp];
    for &id in largest.values() {
        if comp_size[id] >= min_size {
            target[id] = Some(id);
        }
    }

    // shared boundary lengths between components
    let mut border: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n_comp];
    for row in 0..height {
        for col in 0..width {
            let Some(a) = comp[row * width + col] else { continue };
            for (r2, c2) in [(row, col + 1), (row + 1, col)] {
                if r2 >= height || c2 >= width {
                    continue;
                }
                if let Some(b) = comp[r2 * width + c2] {
                    if a != b {
                        *border[a].entry(b).or_default() += 1;
                        *border[b].entry(a).or_default() += 1;
                    }
                }
            }
        }
    }

    loop {
        let mut progressed = false;
        for id in 0..n_comp {
            if target[id].is_some() {
                continue;
            }
            let dominant = border[id]
                .iter()
                .filter_map(|(&nb, &len)| target[nb].map(|t| (len, nb, t)))
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            if let Some((_, _, t)) = dominant {
                target[id] = Some(t);
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    // isolated orphan groups become superpixels of their own
    for (id, t) in target.iter_mut().enumerate() {
        t.get_or_insert(id);
    }

    let mut renumber: BTreeMap<usize, u32> = BTreeMap::new();
    comp.iter()
        .map(|c| {
            c.map(|c| {
                let root = target[c].expect("resolved above");
                let next = renumber.len() as u32;
                *renumber.entry(root).or_insert(next)
            })
        })
        .collect()
}
