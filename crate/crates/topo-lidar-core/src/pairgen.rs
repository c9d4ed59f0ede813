//! Paired static/dynamic scan generation.
//!
//! The range image is divided into azimuth sectors. The sector with the most
//! dynamic content becomes the source; sectors nearly devoid of objects are
//! target candidates. The static scan is the input with all dynamic cells
//! removed. The dynamic scan re-inserts the source sector's dynamic cells
//! into each target sector: cells shift by the band's column offset and their
//! coordinates rotate about the z axis by the matching azimuth, so per-cell
//! ranges are preserved.

use crate::error::{Error, Result};
use crate::range_image::{Cell, RangeImage};

/// Per-cell semantic label, aligned to a range image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellLabel {
    Invalid,
    Ground,
    Static,
    Dynamic,
}

/// H x W grid of labels. Wherever the companion image cell is invalid the
/// label must be `Invalid` (checked by [`SegmentationMask::validate_alignment`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMask {
    height: usize,
    width: usize,
    labels: Vec<CellLabel>,
}

impl SegmentationMask {
    pub fn new(height: usize, width: usize, labels: Vec<CellLabel>) -> Result<Self> {
        if labels.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {}x{} mask",
                labels.len(),
                height,
                width
            )));
        }
        Ok(Self {
            height,
            width,
            labels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn label(&self, row: usize, col: usize) -> CellLabel {
        self.labels[row * self.width + col]
    }

    fn set(&mut self, row: usize, col: usize, label: CellLabel) {
        self.labels[row * self.width + col] = label;
    }

    pub fn labels(&self) -> &[CellLabel] {
        &self.labels
    }

    pub fn count(&self, label: CellLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Checks shape agreement and that every invalid image cell is labeled
    /// `Invalid`.
    pub fn validate_alignment(&self, img: &RangeImage) -> Result<()> {
        if (self.height, self.width) != img.shape() {
            let (h, w) = img.shape();
            return Err(Error::ShapeMismatch(self.height, self.width, h, w));
        }
        for (label, cell) in self.labels.iter().zip(img.cells()) {
            if !cell.is_valid() && *label != CellLabel::Invalid {
                return Err(Error::InvalidConfig(
                    "mask labels a cell that is invalid in the image".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Contiguous column bands partitioning `[0, width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorLayout {
    width: usize,
    bands: Vec<(usize, usize)>,
}

impl SectorLayout {
    pub fn n_sectors(&self) -> usize {
        self.bands.len()
    }

    /// Half-open column range `[start, end)` of sector `i`.
    pub fn band(&self, i: usize) -> (usize, usize) {
        self.bands[i]
    }

    pub fn band_width(&self, i: usize) -> usize {
        let (s, e) = self.bands[i];
        e - s
    }

    pub fn image_width(&self) -> usize {
        self.width
    }
}

/// Splits `width` columns into `n` contiguous, equal-as-possible bands;
/// earlier bands take the remainder.
pub fn divide_sectors(width: usize, n: usize) -> Result<SectorLayout> {
    if n < 1 {
        return Err(Error::InvalidConfig("sector count must be >= 1".into()));
    }
    if width < n {
        return Err(Error::InvalidConfig(format!(
            "width {width} is smaller than sector count {n}"
        )));
    }
    let base = width / n;
    let rem = width % n;
    let mut bands = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let len = base + usize::from(i < rem);
        bands.push((start, start + len));
        start += len;
    }
    Ok(SectorLayout { width, bands })
}

/// The sector with the most dynamic cells; ties go to the smaller index.
/// Errors when the mask holds no dynamic cells at all.
pub fn select_source_sector(mask: &SegmentationMask, layout: &SectorLayout) -> Result<usize> {
    check_layout(mask.width, layout)?;
    let mut best: Option<(usize, usize)> = None; // (count, sector)
    for i in 0..layout.n_sectors() {
        let (s, e) = layout.band(i);
        let mut count = 0;
        for r in 0..mask.height {
            for c in s..e {
                if mask.label(r, c) == CellLabel::Dynamic {
                    count += 1;
                }
            }
        }
        if best.is_none_or(|(bc, _)| count > bc) {
            best = Some((count, i));
        }
    }
    match best {
        Some((count, sector)) if count > 0 => Ok(sector),
        _ => Err(Error::NoDynamicContent),
    }
}

/// Sectors nearly devoid of objects: bands (other than the source, when one
/// exists) whose fraction of non-ground, non-invalid cells is below
/// `occupancy_threshold`, ordered by ascending occupancy with ties toward the
/// smaller index, truncated to `max_targets`.
pub fn select_target_sectors(
    img: &RangeImage,
    mask: &SegmentationMask,
    layout: &SectorLayout,
    max_targets: usize,
    occupancy_threshold: f64,
) -> Result<Vec<usize>> {
    mask.validate_alignment(img)?;
    check_layout(mask.width, layout)?;
    if max_targets < 1 {
        return Err(Error::InvalidConfig("max_targets must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&occupancy_threshold) {
        return Err(Error::InvalidConfig(format!(
            "occupancy threshold {occupancy_threshold} not in [0, 1]"
        )));
    }
    let source = select_source_sector(mask, layout).ok();
    let mut candidates: Vec<(f64, usize)> = (0..layout.n_sectors())
        .filter(|&i| Some(i) != source)
        .map(|i| (band_occupancy(mask, layout, i), i))
        .filter(|&(occ, _)| occ < occupancy_threshold)
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    candidates.truncate(max_targets);
    Ok(candidates.into_iter().map(|(_, i)| i).collect())
}

fn band_occupancy(mask: &SegmentationMask, layout: &SectorLayout, sector: usize) -> f64 {
    let (s, e) = layout.band(sector);
    let mut occupied = 0usize;
    for r in 0..mask.height {
        for c in s..e {
            if matches!(mask.label(r, c), CellLabel::Static | CellLabel::Dynamic) {
                occupied += 1;
            }
        }
    }
    occupied as f64 / (mask.height * (e - s)) as f64
}

fn check_layout(width: usize, layout: &SectorLayout) -> Result<()> {
    if layout.image_width() != width {
        return Err(Error::DimensionMismatch(format!(
            "sector layout covers {} columns, image has {}",
            layout.image_width(),
            width
        )));
    }
    Ok(())
}

/// Result of [`generate_pair`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPair {
    /// Input with every dynamic cell invalidated.
    pub static_image: RangeImage,
    /// Static image with the source sector's dynamic content transplanted
    /// into each target sector.
    pub dynamic_image: RangeImage,
    /// Labels aligned to the dynamic image.
    pub mask: SegmentationMask,
}

/// Builds the static/dynamic pair. The source sector is the one with the most
/// dynamic content; `targets` must be valid sector indices distinct from it.
pub fn generate_pair(
    img: &RangeImage,
    mask: &SegmentationMask,
    layout: &SectorLayout,
    targets: &[usize],
) -> Result<GeneratedPair> {
    mask.validate_alignment(img)?;
    check_layout(mask.width, layout)?;
    for (i, &t) in targets.iter().enumerate() {
        if t >= layout.n_sectors() {
            return Err(Error::InvalidConfig(format!(
                "target sector {t} out of range (layout has {})",
                layout.n_sectors()
            )));
        }
        if targets[..i].contains(&t) {
            return Err(Error::InvalidConfig(format!("duplicate target sector {t}")));
        }
    }

    // Static scan: drop all dynamic returns.
    let mut static_image = img.clone();
    let mut static_mask = mask.clone();
    for r in 0..mask.height {
        for c in 0..mask.width {
            if mask.label(r, c) == CellLabel::Dynamic {
                *static_image.cell_mut(r, c) = Cell::default();
                static_mask.set(r, c, CellLabel::Invalid);
            }
        }
    }

    if targets.is_empty() {
        return Ok(GeneratedPair {
            dynamic_image: static_image.clone(),
            mask: static_mask.clone(),
            static_image,
        });
    }

    let source = select_source_sector(mask, layout)?;
    if targets.contains(&source) {
        return Err(Error::InvalidConfig(format!(
            "target sectors overlap the source sector {source}"
        )));
    }
    let (src_start, src_end) = layout.band(source);

    // Dynamic cells of the source band and their extent from the band start.
    let mut content: Vec<(usize, usize)> = Vec::new();
    let mut extent = 0usize;
    for r in 0..mask.height {
        for c in src_start..src_end {
            if mask.label(r, c) == CellLabel::Dynamic {
                content.push((r, c));
                extent = extent.max(c - src_start + 1);
            }
        }
    }

    let mut dynamic_image = static_image.clone();
    let mut new_mask = static_mask.clone();
    let w = mask.width as f64;
    for &t in targets {
        let (tgt_start, _) = layout.band(t);
        if layout.band_width(t) < extent {
            return Err(Error::InsufficientTargetWidth {
                sector: t,
                width: layout.band_width(t),
                required: extent,
            });
        }
        // A shift of one column to the right is an azimuth decrease of
        // 2*pi/W under the projection convention.
        let col_shift = tgt_start as isize - src_start as isize;
        let angle = -2.0 * std::f64::consts::PI * col_shift as f64 / w;
        let (sin, cos) = angle.sin_cos();
        for &(r, c) in &content {
            let src = img.cell(r, c);
            let new_col = (c as isize + col_shift) as usize;
            *dynamic_image.cell_mut(r, new_col) = Cell {
                x: src.x * cos - src.y * sin,
                y: src.x * sin + src.y * cos,
                z: src.z,
                range: src.range,
            };
            new_mask.set(r, new_col, CellLabel::Dynamic);
        }
    }

    Ok(GeneratedPair {
        static_image,
        dynamic_image,
        mask: new_mask,
    })
}
