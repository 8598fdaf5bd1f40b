//! Per-pixel texture operators.
//!
//! Convolution-style operators (Sobel, Gaussian, LoG, Gabor, HOG gradients,
//! structure tensor gradients) run on a *filled* plane where masked pixels are
//! replaced by the mean valid intensity and image borders are clamped.
//! Window statistics (mean, variance, GLCM, lacunarity, HOG histograms and
//! structure tensor sums) only visit valid pixels inside the window, which is
//! clipped at the image border.

use std::f64::consts::PI;

use crate::raster::Raster;

use super::glcm::{quantize_level, Glcm, HaralickStats};

/// Dense plane with clamp-to-edge reads.
pub(crate) struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn filled(raster: &Raster) -> Self {
        let fill = raster.valid_mean();
        let data = raster
            .intensities()
            .iter()
            .zip(raster.mask())
            .map(|(&v, &m)| if m { v } else { fill })
            .collect();
        Plane {
            width: raster.width(),
            height: raster.height(),
            data,
        }
    }

    #[inline]
    pub fn at(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.data[r * self.width + c]
    }

    pub fn convolve(&self, kernel: &[f64], size: usize) -> Vec<f64> {
        let half = (size / 2) as isize;
        let mut out = vec![0.0; self.data.len()];
        for r in 0..self.height as isize {
            for c in 0..self.width as isize {
                let mut acc = 0.0;
                for kr in 0..size as isize {
                    for kc in 0..size as isize {
                        acc += kernel[(kr * size as isize + kc) as usize]
                            * self.at(r + kr - half, c + kc - half);
                    }
                }
                out[(r * self.width as isize + c) as usize] = acc;
            }
        }
        out
    }

    /// Sobel derivatives `(d/dcol, d/drow)` at a pixel.
    #[inline]
    pub fn sobel_at(&self, r: isize, c: isize) -> (f64, f64) {
        let p = |dr, dc| self.at(r + dr, c + dc);
        let gx = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
        let gy = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
        (gx, gy)
    }
}

/// Valid pixel indices of the clipped `window × window` neighborhood of `(row, col)`.
fn window_bounds(raster: &Raster, row: usize, col: usize, window: usize) -> (usize, usize, usize, usize) {
    let half = window / 2;
    (
        row.saturating_sub(half),
        (row + half).min(raster.height() - 1),
        col.saturating_sub(half),
        (col + half).min(raster.width() - 1),
    )
}

/// Applies `f` to every valid pixel; invalid pixels get 0.
fn per_valid_pixel(raster: &Raster, mut f: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; raster.len()];
    for row in 0..raster.height() {
        for col in 0..raster.width() {
            if raster.is_valid(row, col) {
                out[raster.index(row, col)] = f(row, col);
            }
        }
    }
    out
}

fn mask_out(raster: &Raster, mut values: Vec<f64>) -> Vec<f64> {
    for (v, &m) in values.iter_mut().zip(raster.mask()) {
        if !m {
            *v = 0.0;
        }
    }
    values
}

pub(crate) fn intensity(raster: &Raster) -> Vec<f64> {
    raster.intensities().to_vec()
}

pub(crate) fn sobel(raster: &Raster) -> Vec<f64> {
    let plane = Plane::filled(raster);
    per_valid_pixel(raster, |r, c| {
        let (gx, gy) = plane.sobel_at(r as isize, c as isize);
        (gx * gx + gy * gy).sqrt()
    })
}

pub(crate) fn local_mean(raster: &Raster, window: usize) -> Vec<f64> {
    per_valid_pixel(raster, |row, col| {
        let (r0, r1, c0, c1) = window_bounds(raster, row, col, window);
        let (mut sum, mut n) = (0.0, 0usize);
        for r in r0..=r1 {
            for c in c0..=c1 {
                if let Some(v) = raster.get(r, c) {
                    sum += v;
                    n += 1;
                }
            }
        }
        sum / n as f64
    })
}

/// Population variance over the window, two-pass.
pub(crate) fn local_variance(raster: &Raster, window: usize) -> Vec<f64> {
    let means = local_mean(raster, window);
    per_valid_pixel(raster, |row, col| {
        let mean = means[raster.index(row, col)];
        let (r0, r1, c0, c1) = window_bounds(raster, row, col, window);
        let (mut ss, mut n) = (0.0, 0usize);
        for r in r0..=r1 {
            for c in c0..=c1 {
                if let Some(v) = raster.get(r, c) {
                    ss += (v - mean) * (v - mean);
                    n += 1;
                }
            }
        }
        ss / n as f64
    })
}

/// Rotation-invariant uniform LBP over the 8-neighborhood, radius 1.
///
/// Uniform patterns (at most two 0/1 transitions around the ring) map to their
/// count of set bits, 0..=8; everything else maps to 9. The code is divided by
/// 9 so the map lies in `[0, 1]`.
pub(crate) fn lbp(raster: &Raster) -> Vec<f64> {
    const RING: [(isize, isize); 8] = [
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
        (1, 0),
        (1, -1),
        (0, -1),
    ];
    let plane = Plane::filled(raster);
    per_valid_pixel(raster, |row, col| {
        let (r, c) = (row as isize, col as isize);
        let center = plane.at(r, c);
        let bits: Vec<bool> = RING
            .iter()
            .map(|&(dr, dc)| plane.at(r + dr, c + dc) >= center)
            .collect();
        let transitions = (0..8).filter(|&i| bits[i] != bits[(i + 1) % 8]).count();
        let code = if transitions <= 2 {
            bits.iter().filter(|&&b| b).count()
        } else {
            9
        };
        code as f64 / 9.0
    })
}

/// L2 norm of the magnitude-weighted orientation histogram over the window.
///
/// Gradients are central differences; unsigned orientations in `[0, π)` vote
/// into the two nearest of `bins` bins with linear weights.
pub(crate) fn hog(raster: &Raster, window: usize, bins: usize) -> Vec<f64> {
    let plane = Plane::filled(raster);
    let bin_width = PI / bins as f64;
    // (bin_a, weight_a, bin_b, weight_b) per pixel
    let votes: Vec<(usize, f64, usize, f64)> = (0..raster.len())
        .map(|i| {
            let (r, c) = ((i / raster.width()) as isize, (i % raster.width()) as isize);
            let gx = plane.at(r, c + 1) - plane.at(r, c - 1);
            let gy = plane.at(r + 1, c) - plane.at(r - 1, c);
            let mag = (gx * gx + gy * gy).sqrt();
            let theta = gy.atan2(gx).rem_euclid(PI);
            let pos = theta / bin_width - 0.5;
            let lower = pos.floor();
            let frac = pos - lower;
            let a = (lower as isize).rem_euclid(bins as isize) as usize;
            let b = (a + 1) % bins;
            (a, mag * (1.0 - frac), b, mag * frac)
        })
        .collect();
    let mut hist = vec![0.0; bins];
    per_valid_pixel(raster, |row, col| {
        hist.iter_mut().for_each(|h| *h = 0.0);
        let (r0, r1, c0, c1) = window_bounds(raster, row, col, window);
        for r in r0..=r1 {
            for c in c0..=c1 {
                if raster.is_valid(r, c) {
                    let (a, wa, b, wb) = votes[raster.index(r, c)];
                    hist[a] += wa;
                    hist[b] += wb;
                }
            }
        }
        hist.iter().map(|h| h * h).sum::<f64>().sqrt()
    })
}

/// Structure-tensor anisotropy `1 − λ₂/λ₁` from Sobel gradients summed over the window.
/// Flat neighborhoods (λ₁ ≈ 0) report 0.
pub(crate) fn shape_anisotropy(raster: &Raster, window: usize) -> Vec<f64> {
    let plane = Plane::filled(raster);
    let grads: Vec<(f64, f64)> = (0..raster.len())
        .map(|i| plane.sobel_at((i / raster.width()) as isize, (i % raster.width()) as isize))
        .collect();
    per_valid_pixel(raster, |row, col| {
        let (r0, r1, c0, c1) = window_bounds(raster, row, col, window);
        let (mut jxx, mut jyy, mut jxy) = (0.0, 0.0, 0.0);
        for r in r0..=r1 {
            for c in c0..=c1 {
                if raster.is_valid(r, c) {
                    let (gx, gy) = grads[raster.index(r, c)];
                    jxx += gx * gx;
                    jyy += gy * gy;
                    jxy += gx * gy;
                }
            }
        }
        let half_trace = 0.5 * (jxx + jyy);
        let disc = (0.25 * (jxx - jyy).powi(2) + jxy * jxy).sqrt();
        let (l1, l2) = (half_trace + disc, (half_trace - disc).max(0.0));
        if l1 <= 1e-12 {
            0.0
        } else {
            (1.0 - l2 / l1).clamp(0.0, 1.0)
        }
    })
}

pub(crate) fn haralick(
    raster: &Raster,
    window: usize,
    levels: usize,
    offset: (isize, isize),
    pick: impl Fn(&HaralickStats) -> f64,
) -> Vec<f64> {
    let gray: Vec<usize> = raster
        .intensities()
        .iter()
        .map(|&v| quantize_level(v, levels))
        .collect();
    let mut patch_gray = Vec::with_capacity(window * window);
    let mut patch_valid = Vec::with_capacity(window * window);
    per_valid_pixel(raster, |row, col| {
        let (r0, r1, c0, c1) = window_bounds(raster, row, col, window);
        patch_gray.clear();
        patch_valid.clear();
        for r in r0..=r1 {
            for c in c0..=c1 {
                let i = raster.index(r, c);
                patch_gray.push(gray[i]);
                patch_valid.push(raster.mask()[i]);
            }
        }
        let g = Glcm::from_patch(
            &patch_gray,
            &patch_valid,
            c1 - c0 + 1,
            r1 - r0 + 1,
            offset,
            levels,
        );
        pick(&g.stats())
    })
}

/// Gliding-box lacunarity `E[M²] / E[M]²` of box masses inside the window.
/// A window with zero mass reports 1.
pub(crate) fn lacunarity(raster: &Raster, window: usize, box_size: usize) -> Vec<f64> {
    // summed-area table of valid intensities
    let (w, h) = (raster.width(), raster.height());
    let mut sat = vec![0.0; (w + 1) * (h + 1)];
    for r in 0..h {
        for c in 0..w {
            let v = raster.get(r, c).unwrap_or(0.0);
            sat[(r + 1) * (w + 1) + c + 1] =
                v + sat[r * (w + 1) + c + 1] + sat[(r + 1) * (w + 1) + c] - sat[r * (w + 1) + c];
        }
    }
    let box_mass = |r: usize, c: usize| {
        let (r1, c1) = (r + box_size, c + box_size);
        sat[r1 * (w + 1) + c1] - sat[r * (w + 1) + c1] - sat[r1 * (w + 1) + c] + sat[r * (w + 1) + c]
    };
    per_valid_pixel(raster, |row, col| {
        let (r0, r1, c0, c1) = window_bounds(raster, row, col, window);
        let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
        let mut r = r0;
        while r + box_size <= r1 + 1 {
            let mut c = c0;
            while c + box_size <= c1 + 1 {
                let m = box_mass(r, c);
                s1 += m;
                s2 += m * m;
                n += 1;
                c += 1;
            }
            r += 1;
        }
        if n == 0 {
            return 1.0;
        }
        let mean = s1 / n as f64;
        if mean <= 1e-12 {
            1.0
        } else {
            (s2 / n as f64) / (mean * mean)
        }
    })
}

fn kernel_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil().max(1.0) as usize
}

pub(crate) fn gaussian(raster: &Raster, sigma: f64) -> Vec<f64> {
    let radius = kernel_radius(sigma) as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = taps.iter().sum();
    let taps: Vec<f64> = taps.iter().map(|t| t / norm).collect();
    let plane = Plane::filled(raster);
    // separable: rows then columns
    let mut tmp = vec![0.0; plane.data.len()];
    for r in 0..plane.height as isize {
        for c in 0..plane.width as isize {
            tmp[(r * plane.width as isize + c) as usize] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * plane.at(r, c + k as isize - radius))
                .sum();
        }
    }
    let horizontal = Plane {
        width: plane.width,
        height: plane.height,
        data: tmp,
    };
    let mut out = vec![0.0; plane.data.len()];
    for r in 0..plane.height as isize {
        for c in 0..plane.width as isize {
            out[(r * plane.width as isize + c) as usize] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * horizontal.at(r + k as isize - radius, c))
                .sum();
        }
    }
    mask_out(raster, out)
}

/// Zero-mean Laplacian-of-Gaussian response.
pub(crate) fn laplacian_of_gaussian(raster: &Raster, sigma: f64) -> Vec<f64> {
    let radius = kernel_radius(sigma) as isize;
    let size = (2 * radius + 1) as usize;
    let s2 = sigma * sigma;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .flat_map(|y| (-radius..=radius).map(move |x| (x, y)))
        .map(|(x, y)| {
            let q = (x * x + y * y) as f64 / (2.0 * s2);
            -1.0 / (PI * s2 * s2) * (1.0 - q) * (-q).exp()
        })
        .collect();
    let mean = kernel.iter().sum::<f64>() / kernel.len() as f64;
    kernel.iter_mut().for_each(|k| *k -= mean);
    mask_out(raster, Plane::filled(raster).convolve(&kernel, size))
}

/// Magnitude of the complex Gabor response at one orientation and frequency.
/// The real part of the kernel is made zero-mean so flat regions respond with 0.
pub(crate) fn gabor(raster: &Raster, theta: f64, frequency: f64, sigma: f64) -> Vec<f64> {
    let radius = kernel_radius(sigma) as isize;
    let size = (2 * radius + 1) as usize;
    let (sin_t, cos_t) = theta.sin_cos();
    let mut re = Vec::with_capacity(size * size);
    let mut im = Vec::with_capacity(size * size);
    for y in -radius..=radius {
        for x in -radius..=radius {
            let (x, y) = (x as f64, y as f64);
            let xr = x * cos_t + y * sin_t;
            let envelope = (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
            let phase = 2.0 * PI * frequency * xr;
            re.push(envelope * phase.cos());
            im.push(envelope * phase.sin());
        }
    }
    let mean = re.iter().sum::<f64>() / re.len() as f64;
    re.iter_mut().for_each(|k| *k -= mean);
    let plane = Plane::filled(raster);
    let a = plane.convolve(&re, size);
    let b = plane.convolve(&im, size);
    mask_out(
        raster,
        a.iter().zip(&b).map(|(x, y)| (x * x + y * y).sqrt()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_edge(w: usize, h: usize) -> Raster {
        let values = (0..w * h).map(|i| if i % w < w / 2 { 0.0 } else { 1.0 }).collect();
        Raster::new(w, h, values, None).unwrap()
    }

    #[test]
    fn sobel_peaks_on_edge() {
        let r = step_edge(10, 6);
        let s = sobel(&r);
        let max = s.iter().cloned().fold(0.0, f64::max);
        for row in 0..6 {
            assert_eq!(s[row * 10 + 4], max);
            assert_eq!(s[row * 10 + 5], max);
            for col in [0, 1, 2, 7, 8, 9] {
                assert_eq!(s[row * 10 + col], 0.0);
            }
        }
    }

    #[test]
    fn flat_image_responses() {
        let r = Raster::new(12, 12, vec![0.3; 144], None).unwrap();
        assert!(local_variance(&r, 9).iter().all(|&v| v == 0.0));
        assert!(sobel(&r).iter().all(|&v| v == 0.0));
        assert!(shape_anisotropy(&r, 9).iter().all(|&v| v == 0.0));
        assert!(hog(&r, 9, 9).iter().all(|&v| v == 0.0));
        assert!(lacunarity(&r, 9, 3).iter().all(|&v| v == 1.0));
        assert!(haralick(&r, 9, 8, (0, 1), |s| s.energy).iter().all(|&v| v == 1.0));
        assert!(gabor(&r, 0.0, 0.25, 2.0).iter().all(|&v| v.abs() < 1e-12));
        assert!(laplacian_of_gaussian(&r, 2.0).iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn lbp_codes() {
        // single bright pixel: every neighbor is darker
        let mut values = vec![0.0; 25];
        values[12] = 1.0;
        let r = Raster::new(5, 5, values, None).unwrap();
        let l = lbp(&r);
        assert_eq!(l[12], 0.0);
        // flat area: every neighbor ties the center
        assert_eq!(l[0], 8.0 / 9.0);
        assert!(l.iter().all(|&v| (0.0..=1.0).contains(&v)));

        // alternating ring is non-uniform
        let checker: Vec<f64> = (0..25).map(|i| ((i / 5 + i % 5) % 2) as f64).collect();
        let r = Raster::new(5, 5, checker, None).unwrap();
        let l = lbp(&r);
        // a bright center sees dark edge neighbors and bright corners
        assert_eq!(l[7], 1.0);
    }

    #[test]
    fn anisotropy_of_oriented_stripes() {
        let values = (0..400).map(|i| ((i % 20) as f64 * 0.8).sin()).collect();
        let r = Raster::new(20, 20, values, None).unwrap();
        let a = shape_anisotropy(&r, 9);
        // vertical stripes: gradients all horizontal → λ₂ = 0
        assert!(a[10 * 20 + 10] > 0.999);
    }

    #[test]
    fn gaussian_preserves_constant_and_smooths() {
        let r = step_edge(16, 4);
        let g = gaussian(&r, 1.5);
        assert!(g[0].abs() < 1e-3);
        assert!((g[15] - 1.0).abs() < 1e-3);
        assert!(g[7] > 0.0 && g[7] < 1.0);
    }

    #[test]
    fn masked_pixels_are_zero_and_skipped() {
        let mut mask = vec![true; 36];
        mask[14] = false;
        let values: Vec<f64> = (0..36).map(|i| (i as f64 * 0.37).sin()).collect();
        let r = Raster::new(6, 6, values, Some(mask)).unwrap();
        for map in [local_mean(&r, 3), local_variance(&r, 3), hog(&r, 3, 9), lacunarity(&r, 3, 2)] {
            assert_eq!(map[14], 0.0);
            assert!(map.iter().all(|v| v.is_finite()));
        }
    }
}
