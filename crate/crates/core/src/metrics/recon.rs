use crate::error::{Error, Result};

/// Completion-ratio threshold used by default, in centimeters.
pub const DEFAULT_THRESHOLD_CM: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconReport {
    pub acc_cm: f64,
    pub comp_cm: f64,
    pub comp_ratio_pct: f64,
    pub threshold_cm: f64,
}

#[inline]
fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (dx, dy, dz) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    dx * dx + dy * dy + dz * dz
}

/// Uniform grid over a reference cloud, points bucketed by cell.
struct Grid<'a> {
    points: &'a [[f64; 3]],
    origin: [f64; 3],
    cell: f64,
    dims: [usize; 3],
    /// Indices of `points` grouped by cell; cell `c` owns `order[start[c]..start[c + 1]]`.
    order: Vec<usize>,
    start: Vec<usize>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [[f64; 3]]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let extent = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        // about two points per cell for evenly spread clouds
        let per_axis = ((points.len() as f64 / 2.0).cbrt()).max(1.0);
        let cell = if extent > 0.0 { extent / per_axis } else { 1.0 };
        let dims = [0, 1, 2].map(|a| ((hi[a] - lo[a]) / cell).floor() as usize + 1);
        let mut grid = Self {
            points,
            origin: lo,
            cell,
            dims,
            order: Vec::new(),
            start: Vec::new(),
        };
        let ncells = dims[0] * dims[1] * dims[2];
        let keys: Vec<usize> = points.iter().map(|p| grid.flat(grid.cell_of(p))).collect();
        let mut counts = vec![0usize; ncells + 1];
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for c in 0..ncells {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut order = vec![0usize; points.len()];
        for (i, &k) in keys.iter().enumerate() {
            order[fill[k]] = i;
            fill[k] += 1;
        }
        grid.order = order;
        grid.start = counts;
        grid
    }

    /// Cell coordinates, clamped into the grid.
    fn cell_of(&self, p: &[f64; 3]) -> [usize; 3] {
        [0, 1, 2].map(|a| {
            let c = ((p[a] - self.origin[a]) / self.cell).floor();
            (c.max(0.0) as usize).min(self.dims[a] - 1)
        })
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }

    /// Distance from `q` to the nearest grid point: rings of cells around the
    /// query cell are scanned until no unscanned cell can hold a closer one.
    fn nearest(&self, q: &[f64; 3]) -> f64 {
        let qc = self.cell_of(q);
        let max_ring = (0..3)
            .map(|a| qc[a].max(self.dims[a] - 1 - qc[a]))
            .max()
            .unwrap_or(0);
        // a query outside the grid sits this far (in cells) from its clamped cell
        let outside = (0..3)
            .map(|a| {
                let lo = self.origin[a] + qc[a] as f64 * self.cell;
                let hi = lo + self.cell;
                (lo - q[a]).max(q[a] - hi).max(0.0)
            })
            .fold(0.0, f64::max);
        let mut best = f64::INFINITY;
        for r in 0..=max_ring {
            let lo = qc.map(|c| c.saturating_sub(r));
            let hi = [0, 1, 2].map(|a| (qc[a] + r).min(self.dims[a] - 1));
            for z in lo[2]..=hi[2] {
                for y in lo[1]..=hi[1] {
                    for x in lo[0]..=hi[0] {
                        let ring = [x, y, z]
                            .iter()
                            .zip(qc)
                            .map(|(&c, q)| c.abs_diff(q))
                            .max()
                            .unwrap_or(0);
                        if ring != r {
                            continue;
                        }
                        let c = self.flat([x, y, z]);
                        for &i in &self.order[self.start[c]..self.start[c + 1]] {
                            best = best.min(dist_sq(q, &self.points[i]));
                        }
                    }
                }
            }
            // points beyond ring r are at least r cells away along one axis and
            // at least the outside gap along the clamped axis
            let bound = (r as f64 * self.cell).hypot(outside) * (1.0 - 1e-9);
            if best.is_finite() && best.sqrt() < bound {
                break;
            }
        }
        best.sqrt()
    }
}

/// Distance (same unit as the inputs) from every query point to its nearest
/// reference point. Equal bit for bit to an exhaustive search.
pub fn nearest_distances(query: &[[f64; 3]], reference: &[[f64; 3]]) -> Result<Vec<f64>> {
    if query.is_empty() || reference.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    let grid = Grid::new(reference);
    Ok(query.iter().map(|q| grid.nearest(q)).collect())
}

/// Accuracy, completion (cm) and completion ratio (%) of a reconstructed
/// cloud against the ground-truth cloud, both in meters.
pub fn compute_recon_metrics(recon: &[[f64; 3]], gt: &[[f64; 3]], threshold_cm: f64) -> Result<ReconReport> {
    if !(threshold_cm >= 0.0) {
        return Err(Error::invalid(format!("threshold {threshold_cm} cm must be non-negative")));
    }
    let to_recon = nearest_distances(gt, recon)?;
    let to_gt = nearest_distances(recon, gt)?;
    let mean_cm = |d: &[f64]| d.iter().map(|m| m * 100.0).sum::<f64>() / d.len() as f64;
    let within = to_recon.iter().filter(|&&d| d * 100.0 <= threshold_cm).count();
    Ok(ReconReport {
        acc_cm: mean_cm(&to_gt),
        comp_cm: mean_cm(&to_recon),
        comp_ratio_pct: 100.0 * within as f64 / gt.len() as f64,
        threshold_cm,
    })
}
