//! Grayscale rasters with an explicit valid-pixel mask.
//!
//! Intensities are min-max normalized to `[0, 1]` over the valid pixels only.
//! Invalid pixels hold [`Raster::INVALID`] and are skipped by every extractor
//! and aggregation step.
//!
//! A mask is read from a sidecar file next to the image: `scene.png` pairs
//! with `scene.mask.png`, where any nonzero pixel is valid. No sidecar means
//! every pixel is valid.

use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageFormat};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    intensities: Vec<f64>,
    mask: Vec<bool>,
}

impl Raster {
    /// Value stored at invalid pixels.
    pub const INVALID: f64 = 0.0;

    /// Builds a raster from raw values, normalizing the valid pixels to `[0, 1]`.
    ///
    /// A constant image (or one with a single valid pixel) normalizes to all zeros.
    pub fn new(
        width: usize,
        height: usize,
        values: Vec<f64>,
        mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        let len = width * height;
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("raster must be non-empty".into()));
        }
        if values.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} raster",
                values.len()
            )));
        }
        let mask = mask.unwrap_or_else(|| vec![true; len]);
        if mask.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} entries, raster has {len}",
                mask.len()
            )));
        }
        if let Some(i) = (0..len).find(|&i| mask[i] && !values[i].is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite intensity at pixel {i}"
            )));
        }
        let mut raster = Raster {
            width,
            height,
            intensities: values,
            mask,
        };
        raster.normalize_in_place();
        Ok(raster)
    }

    fn normalize_in_place(&mut self) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (&v, _) in self.intensities.iter().zip(&self.mask).filter(|(_, &m)| m) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let range = hi - lo;
        for (v, &valid) in self.intensities.iter_mut().zip(&self.mask) {
            *v = if !valid {
                Self::INVALID
            } else if range > 0.0 {
                ((*v - lo) / range).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }

    /// Re-applies min-max normalization. Identity on an already normalized raster.
    pub fn normalized(&self) -> Raster {
        let mut out = self.clone();
        out.normalize_in_place();
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixels, valid or not.
    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.mask[self.index(row, col)]
    }

    /// Intensity of a valid pixel, `None` for masked-out pixels.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = self.index(row, col);
        self.mask[i].then(|| self.intensities[i])
    }

    /// The valid-pixel count `N` used in the validity diagnostics.
    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Mean intensity over valid pixels, 0 when nothing is valid.
    pub fn valid_mean(&self) -> f64 {
        let n = self.valid_count();
        if n == 0 {
            return 0.0;
        }
        self.intensities
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .sum::<f64>()
            / n as f64
    }
}

/// Sidecar mask location for an image path: `dir/name.ext` → `dir/name.mask.png`.
pub fn mask_sidecar_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.mask.png"))
}

/// Loads a grayscale PNG or binary PGM, picking up a sidecar mask when one exists.
pub fn load_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let sidecar = mask_sidecar_path(path);
    let mask = sidecar.is_file().then_some(sidecar);
    load_raster_with_mask(path, mask.as_deref())
}

/// Loads a raster with an explicit mask file (`None` = all valid).
pub fn load_raster_with_mask(path: impl AsRef<Path>, mask: Option<&Path>) -> Result<Raster> {
    let path = path.as_ref();
    let (width, height, values) = read_gray(path)?;
    let mask = match mask {
        Some(mask_path) => {
            let (mw, mh, mvals) = read_any_as_gray(mask_path)?;
            if (mw, mh) != (width, height) {
                return Err(Error::DimensionMismatch(format!(
                    "mask {} is {mw}x{mh}, image is {width}x{height}",
                    mask_path.display()
                )));
            }
            Some(mvals.into_iter().map(|v| v != 0).collect())
        }
        None => None,
    };
    let values = values.into_iter().map(f64::from).collect();
    Raster::new(width, height, values, mask)
}

fn open(path: &Path) -> Result<DynamicImage> {
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn read_gray(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u16::from).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("{:?}; expected 8- or 16-bit grayscale", other.color()),
            })
        }
    };
    Ok((w, h, values))
}

fn read_any_as_gray(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok((w, h, img.into_luma16().into_raw()))
}

/// Output quantization: `floor(v * 255 + 0.5)` clamped to `[0, 255]`.
#[inline]
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Writes a per-pixel map in `[0, 1]` as an 8-bit PNG; invalid pixels are black.
pub fn write_map(values: &[f64], raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if values.len() != raster.len() {
        return Err(Error::DimensionMismatch(format!(
            "map has {} values, raster has {}",
            values.len(),
            raster.len()
        )));
    }
    let bytes = values
        .iter()
        .zip(raster.mask())
        .map(|(&v, &valid)| if valid { quantize(v) } else { 0 })
        .collect();
    write_gray8(raster.width(), raster.height(), bytes, path)
}

pub(crate) fn write_gray8(
    width: usize,
    height: usize,
    bytes: Vec<u8>,
    path: &Path,
) -> Result<()> {
    let img = GrayImage::from_raw(width as u32, height as u32, bytes)
        .ok_or_else(|| Error::DimensionMismatch("buffer does not match image size".into()))?;
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}
