//! Synthetic texture scenes.
//!
//! A [`SceneSpec`] tiles the image with polygons, each carrying a texture.
//! Polygon vertices are `[x, y]` in pixel units with the image spanning
//! `[0, width] × [0, height]`; a pixel belongs to the region containing its
//! center. Raw texture values are clamped to `[0, 1]` before the raster is
//! min-max normalized.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Texture {
    /// Constant plus Gaussian noise.
    Flat {
        level: f64,
        #[serde(default)]
        noise: f64,
    },
    /// Oriented sinusoid plus Gaussian noise. `orientation` is in radians.
    Ripple {
        level: f64,
        amplitude: f64,
        wavelength: f64,
        #[serde(default)]
        orientation: f64,
        #[serde(default)]
        noise: f64,
    },
    /// Multiplicative gamma speckle with unit mean; fewer `looks` means more variance.
    NoiseSpeckle {
        level: f64,
        #[serde(default = "one")]
        looks: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub polygon: Vec<[f64; 2]>,
    pub texture: Texture,
}

/// A bright disk stamped over the textures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outlier {
    /// `[x, y]` center in pixel units.
    pub center: [f64; 2],
    pub radius: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub regions: Vec<Region>,
    /// Width in pixels of the linear blend across region borders.
    #[serde(default)]
    pub boundary_softness: f64,
    #[serde(default)]
    pub outliers: Vec<Outlier>,
}

impl SceneSpec {
    /// Three vertical bands: ripple, flat, speckle.
    pub fn three_bands(width: usize, height: usize) -> Self {
        let (w, h) = (width as f64, height as f64);
        let band = |x0: f64, x1: f64| vec![[x0, 0.0], [x1, 0.0], [x1, h], [x0, h]];
        SceneSpec {
            width,
            height,
            regions: vec![
                Region {
                    polygon: band(0.0, (w / 3.0).round()),
                    texture: Texture::Ripple {
                        level: 0.5,
                        amplitude: 0.3,
                        wavelength: 6.0,
                        orientation: 0.4,
                        noise: 0.03,
                    },
                },
                Region {
                    polygon: band((w / 3.0).round(), (2.0 * w / 3.0).round()),
                    texture: Texture::Flat {
                        level: 0.3,
                        noise: 0.03,
                    },
                },
                Region {
                    polygon: band((2.0 * w / 3.0).round(), w),
                    texture: Texture::NoiseSpeckle {
                        level: 0.35,
                        looks: 2.0,
                    },
                },
            ],
            boundary_softness: 3.0,
            outliers: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter("scene must be non-empty".into()));
        }
        if self.regions.is_empty() {
            return Err(Error::InvalidParameter("scene has no regions".into()));
        }
        if !(self.boundary_softness >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "boundary_softness must be >= 0, got {}",
                self.boundary_softness
            )));
        }
        for r in &self.regions {
            if r.polygon.len() < 3 {
                return Err(Error::InvalidParameter("polygon needs at least 3 vertices".into()));
            }
            match r.texture {
                Texture::Ripple { wavelength, .. } if !(wavelength > 0.0) => {
                    return Err(Error::InvalidParameter("ripple wavelength must be > 0".into()))
                }
                Texture::NoiseSpeckle { looks, .. } if !(looks > 0.0) => {
                    return Err(Error::InvalidParameter("speckle looks must be > 0".into()))
                }
                Texture::Flat { noise, .. } | Texture::Ripple { noise, .. } if noise < 0.0 => {
                    return Err(Error::InvalidParameter("noise must be >= 0".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub raster: Raster,
    /// Region index per pixel, row-major.
    pub labels: Vec<u32>,
    /// True inside an outlier disk.
    pub outliers: Vec<bool>,
}

fn contains(poly: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let ([xi, yi], [xj, yj]) = (poly[i], poly[j]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn edge_distance(poly: &[[f64; 2]], x: f64, y: f64) -> f64 {
    let mut best = f64::INFINITY;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let ([ax, ay], [bx, by]) = (poly[j], poly[i]);
        let (dx, dy) = (bx - ax, by - ay);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((x - ax) * dx + (y - ay) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (px, py) = (ax + t * dx - x, ay + t * dy - y);
        best = best.min((px * px + py * py).sqrt());
        j = i;
    }
    best
}

fn texture_field(texture: &Texture, w: usize, h: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let (x, y) = (col as f64 + 0.5, row as f64 + 0.5);
            let v = match *texture {
                Texture::Flat { level, noise } => level + noise * normal.sample(rng),
                Texture::Ripple {
                    level,
                    amplitude,
                    wavelength,
                    orientation,
                    noise,
                } => {
                    let phase = (x * orientation.cos() + y * orientation.sin()) / wavelength;
                    level
                        + amplitude * (std::f64::consts::TAU * phase).sin()
                        + noise * normal.sample(rng)
                }
                Texture::NoiseSpeckle { level, looks } => {
                    let gamma = Gamma::new(looks, 1.0 / looks).expect("validated looks");
                    level * gamma.sample(rng)
                }
            };
            out.push(v);
        }
    }
    out
}

/// Renders `spec` deterministically for `seed`.
pub fn generate(spec: &SceneSpec, seed: u64) -> Result<Scene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut labels = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let (x, y) = (col as f64 + 0.5, row as f64 + 0.5);
            let hit = spec.regions.iter().position(|r| contains(&r.polygon, x, y));
            match hit {
                Some(r) => labels.push(r as u32),
                None => return Err(Error::RegionsNotTiling { row, col }),
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<Vec<f64>> = spec
        .regions
        .iter()
        .map(|r| texture_field(&r.texture, w, h, &mut rng))
        .collect();

    let soft = spec.boundary_softness;
    let mut values = vec![0.0; w * h];
    let mut outliers = vec![false; w * h];
    for row in 0..h {
        for col in 0..w {
            let p = row * w + col;
            let own = labels[p] as usize;
            let (x, y) = (col as f64 + 0.5, row as f64 + 0.5);
            let mut v = fields[own][p];
            if soft > 0.0 {
                let (mut acc, mut wsum) = (v, 1.0);
                for (r, region) in spec.regions.iter().enumerate() {
                    if r == own {
                        continue;
                    }
                    let wr = 1.0 - edge_distance(&region.polygon, x, y) / soft;
                    if wr > 0.0 {
                        acc += wr * fields[r][p];
                        wsum += wr;
                    }
                }
                v = acc / wsum;
            }
            for o in &spec.outliers {
                let (dx, dy) = (x - o.center[0], y - o.center[1]);
                if dx * dx + dy * dy <= o.radius * o.radius {
                    v = o.intensity;
                    outliers[p] = true;
                }
            }
            values[p] = v.clamp(0.0, 1.0);
        }
    }
    Ok(Scene {
        raster: Raster::new(w, h, values, None)?,
        labels,
        outliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<[f64; 2]> {
        vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    }

    fn flat(level: f64, noise: f64) -> Texture {
        Texture::Flat { level, noise }
    }

    #[test]
    fn noiseless_flat_is_constant() {
        let spec = SceneSpec {
            width: 8,
            height: 5,
            regions: vec![Region { polygon: rect(0.0, 0.0, 8.0, 5.0), texture: flat(0.4, 0.0) }],
            boundary_softness: 0.0,
            outliers: vec![],
        };
        let s = generate(&spec, 1).unwrap();
        assert!(s.raster.intensities().iter().all(|&v| v == 0.0));
        assert!(s.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn hard_step() {
        let spec = SceneSpec {
            width: 10,
            height: 4,
            regions: vec![
                Region { polygon: rect(0.0, 0.0, 5.0, 4.0), texture: flat(0.2, 0.0) },
                Region { polygon: rect(5.0, 0.0, 10.0, 4.0), texture: flat(0.8, 0.0) },
            ],
            boundary_softness: 0.0,
            outliers: vec![],
        };
        let s = generate(&spec, 0).unwrap();
        for row in 0..4 {
            for col in 0..10 {
                let want = u32::from(col >= 5);
                assert_eq!(s.labels[row * 10 + col], want);
                assert_eq!(s.raster.get(row, col), Some(want as f64));
            }
        }
    }

    #[test]
    fn softness_blends_intensity_not_labels() {
        let mut spec = SceneSpec {
            width: 20,
            height: 2,
            regions: vec![
                Region { polygon: rect(0.0, 0.0, 10.0, 2.0), texture: flat(0.0, 0.0) },
                Region { polygon: rect(10.0, 0.0, 20.0, 2.0), texture: flat(1.0, 0.0) },
            ],
            boundary_softness: 0.0,
            outliers: vec![],
        };
        let hard = generate(&spec, 0).unwrap();
        spec.boundary_softness = 4.0;
        let soft = generate(&spec, 0).unwrap();
        assert_eq!(hard.labels, soft.labels);
        let r = soft.raster.intensities();
        assert!(r[9] > 0.0 && r[9] < 0.5);
        assert!(r[10] > 0.5 && r[10] < 1.0);
        assert_eq!((r[0], r[19]), (0.0, 1.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SceneSpec::three_bands(48, 32);
        let a = generate(&spec, 9).unwrap();
        assert_eq!(a, generate(&spec, 9).unwrap());
        assert_ne!(a.raster, generate(&spec, 10).unwrap().raster);
        let mut seen = [false; 3];
        a.labels.iter().for_each(|&l| seen[l as usize] = true);
        assert_eq!(seen, [true; 3]);
    }

    #[test]
    fn gap_is_rejected() {
        let spec = SceneSpec {
            width: 10,
            height: 4,
            regions: vec![Region { polygon: rect(0.0, 0.0, 5.0, 4.0), texture: flat(0.2, 0.0) }],
            boundary_softness: 0.0,
            outliers: vec![],
        };
        assert!(matches!(generate(&spec, 0), Err(Error::RegionsNotTiling { row: 0, col: 5 })));
    }

    #[test]
    fn outlier_disk() {
        let spec = SceneSpec {
            outliers: vec![Outlier { center: [10.0, 10.0], radius: 2.0, intensity: 1.0 }],
            ..SceneSpec::three_bands(30, 20)
        };
        let s = generate(&spec, 2).unwrap();
        let n = s.outliers.iter().filter(|&&o| o).count();
        assert!((12..=16).contains(&n), "{n}");
        assert_eq!(s.raster.get(9, 9), Some(1.0));
    }

    #[test]
    fn toml_round_trip() {
        let spec = SceneSpec::three_bands(12, 9);
        let text = toml::to_string(&spec).unwrap();
        assert!(text.contains("kind = \"noise-speckle\""));
        assert_eq!(toml::from_str::<SceneSpec>(&text).unwrap(), spec);
    }

    #[test]
    fn bad_specs() {
        let mut spec = SceneSpec::three_bands(12, 9);
        spec.boundary_softness = -1.0;
        assert!(generate(&spec, 0).is_err());
        let mut spec = SceneSpec::three_bands(12, 9);
        spec.regions[2].texture = Texture::NoiseSpeckle { level: 0.3, looks: 0.0 };
        assert!(generate(&spec, 0).is_err());
    }
}
