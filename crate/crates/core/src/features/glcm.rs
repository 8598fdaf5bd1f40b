//! Gray-level co-occurrence matrices and the four Haralick statistics used as
//! texture channels: contrast, correlation, energy (angular second moment) and
//! homogeneity (inverse difference moment).

use serde::Serialize;

/// Quantizes a `[0, 1]` intensity to one of `levels` gray levels.
#[inline]
pub fn quantize_level(v: f64, levels: usize) -> usize {
    ((v * levels as f64).floor().max(0.0) as usize).min(levels - 1)
}

/// Symmetric co-occurrence counts for a single pixel offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glcm {
    levels: usize,
    counts: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HaralickStats {
    pub contrast: f64,
    pub correlation: f64,
    pub energy: f64,
    pub homogeneity: f64,
}

impl Glcm {
    pub fn new(levels: usize) -> Self {
        Glcm {
            levels,
            counts: vec![0; levels * levels],
        }
    }

    /// Counts pairs `(p, p + offset)` inside a `width × height` patch of gray
    /// levels, skipping pairs that touch a pixel with `valid == false`.
    /// Each pair is counted in both orders.
    pub fn from_patch(
        gray: &[usize],
        valid: &[bool],
        width: usize,
        height: usize,
        offset: (isize, isize),
        levels: usize,
    ) -> Self {
        let mut glcm = Glcm::new(levels);
        for r in 0..height {
            for c in 0..width {
                let (Some(r2), Some(c2)) = (r.checked_add_signed(offset.0), c.checked_add_signed(offset.1)) else {
                    continue;
                };
                if r2 >= height || c2 >= width {
                    continue;
                }
                let (a, b) = (r * width + c, r2 * width + c2);
                if valid[a] && valid[b] {
                    glcm.add_pair(gray[a], gray[b]);
                }
            }
        }
        glcm
    }

    #[inline]
    pub fn add_pair(&mut self, i: usize, j: usize) {
        self.counts[i * self.levels + j] += 1;
        self.counts[j * self.levels + i] += 1;
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.levels + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Haralick statistics of the normalized matrix. An empty matrix is treated
    /// like a perfectly uniform patch: contrast 0, everything else 1.
    pub fn stats(&self) -> HaralickStats {
        let total = self.total();
        if total == 0 {
            return HaralickStats {
                contrast: 0.0,
                correlation: 1.0,
                energy: 1.0,
                homogeneity: 1.0,
            };
        }
        let total = total as f64;
        let l = self.levels;
        let (mut contrast, mut energy, mut homogeneity) = (0.0, 0.0, 0.0);
        let (mut mu_i, mut mu_j) = (0.0, 0.0);
        for i in 0..l {
            for j in 0..l {
                let p = self.count(i, j) as f64 / total;
                let d = i as f64 - j as f64;
                contrast += p * d * d;
                energy += p * p;
                homogeneity += p / (1.0 + d * d);
                mu_i += i as f64 * p;
                mu_j += j as f64 * p;
            }
        }
        let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
        for i in 0..l {
            for j in 0..l {
                let p = self.count(i, j) as f64 / total;
                let (di, dj) = (i as f64 - mu_i, j as f64 - mu_j);
                var_i += di * di * p;
                var_j += dj * dj * p;
                cov += di * dj * p;
            }
        }
        let denom = (var_i * var_j).sqrt();
        let correlation = if denom > 1e-12 { cov / denom } else { 1.0 };
        HaralickStats {
            contrast,
            correlation,
            energy,
            homogeneity,
        }
    }
}
