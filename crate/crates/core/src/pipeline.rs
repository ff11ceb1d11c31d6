//! End-to-end raster-to-minutiae pipeline shared by the CLI and the
//! evaluation harness.

use std::path::Path;

use crate::imaging::{BinaryImage, GrayImage, ImageError};
use crate::minutiae::{extract, MinutiaeError, MinutiaeSet};
use crate::preprocess::{binarize, thin, BinarizeConfig, PreprocessError, ThinConfig};

/// How the binarization cutoff is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    Fixed(u8),
    /// Use the image's mean intensity.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub threshold: ThresholdMode,
    /// Boundary band whitened before thinning; doubled, it is also the
    /// frame band whose terminations are discarded during extraction.
    pub margin: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdMode::Fixed(128),
            margin: 5,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("image: {0}")]
    Image(#[from] ImageError),
    #[error("preprocess: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("minutiae: {0}")]
    Minutiae(#[from] MinutiaeError),
}

impl PipelineConfig {
    fn binarize_config(&self, img: &GrayImage) -> BinarizeConfig {
        match self.threshold {
            ThresholdMode::Fixed(t) => BinarizeConfig { threshold: t },
            ThresholdMode::Auto => BinarizeConfig::auto(img),
        }
    }
}

/// Binarize, whiten the boundary, and thin to a skeleton.
pub fn skeletonize(img: &GrayImage, cfg: &PipelineConfig) -> Result<BinaryImage, PipelineError> {
    let bin = binarize(img, &cfg.binarize_config(img));
    let thin_cfg = ThinConfig {
        boundary_margin: cfg.margin,
        ..ThinConfig::default()
    };
    Ok(thin(&bin, &thin_cfg)?)
}

/// Full pipeline: gray image in, minutiae set out.
pub fn extract_minutiae(
    img: &GrayImage,
    cfg: &PipelineConfig,
) -> Result<MinutiaeSet, PipelineError> {
    let skel = skeletonize(img, cfg)?;
    Ok(extract(&skel, cfg.margin)?)
}

/// Loads minutiae from a path: `.csv` files are parsed as data matrices
/// directly, anything else is read as a PGM image and run through the
/// pipeline.
pub fn extract_from_path(
    path: impl AsRef<Path>,
    cfg: &PipelineConfig,
) -> Result<MinutiaeSet, PipelineError> {
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        Ok(MinutiaeSet::load_data_matrix(path)?)
    } else {
        let img = GrayImage::load(path)?;
        extract_minutiae(&img, cfg)
    }
}
