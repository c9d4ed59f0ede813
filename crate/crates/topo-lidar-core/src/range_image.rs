//! Range-image representation and spherical projection.
//!
//! A range image is an H x W grid of cells holding the Cartesian coordinates
//! and range of one LiDAR return each. Rows correspond to beams (linear in
//! pitch across the vertical field of view), columns to azimuth bins. A cell
//! with range 0 is invalid: it received no return and is excluded from all
//! downstream metrics. Conversion back to a point cloud is a reshape that
//! keeps one point per valid cell in row-major order.

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

/// One grid cell. `range == 0` marks the cell invalid; valid cells satisfy
/// `range = sqrt(x^2 + y^2 + z^2)` within 1e-5 relative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub range: f64,
}

impl Cell {
    pub fn is_valid(&self) -> bool {
        self.range > 0.0
    }

    fn from_point(p: Point3, range: f64) -> Self {
        Cell {
            x: p[0],
            y: p[1],
            z: p[2],
            range,
        }
    }
}

/// Spherical projection parameters: grid shape and vertical field of view in
/// degrees. Defaults follow the 64-beam KITTI convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionConfig {
    pub height: usize,
    pub width: usize,
    pub fov_up_deg: f64,
    pub fov_down_deg: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            height: 64,
            width: 1024,
            fov_up_deg: 3.0,
            fov_down_deg: -25.0,
        }
    }
}

impl ProjectionConfig {
    pub fn new(height: usize, width: usize, fov_up_deg: f64, fov_down_deg: f64) -> Result<Self> {
        let cfg = Self {
            height,
            width,
            fov_up_deg,
            fov_down_deg,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.height < 1 || self.width < 1 {
            return Err(Error::InvalidConfig(format!(
                "grid shape {}x{} must be at least 1x1",
                self.height, self.width
            )));
        }
        if !(self.fov_up_deg > self.fov_down_deg) {
            return Err(Error::InvalidConfig(format!(
                "fov_up ({}) must exceed fov_down ({})",
                self.fov_up_deg, self.fov_down_deg
            )));
        }
        Ok(())
    }
}

/// H x W grid of LiDAR returns.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeImage {
    height: usize,
    width: usize,
    cells: Vec<Cell>,
}

impl RangeImage {
    /// An all-invalid image.
    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            cells: vec![Cell::default(); height * width],
        }
    }

    /// Builds an image from row-major cells, enforcing the range/coordinate
    /// consistency invariant on valid cells and all-zero invalid cells.
    pub fn from_cells(height: usize, width: usize, cells: Vec<Cell>) -> Result<Self> {
        if cells.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {}x{} grid",
                cells.len(),
                height,
                width
            )));
        }
        for (idx, cell) in cells.iter().enumerate() {
            if ![cell.x, cell.y, cell.z, cell.range].iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("range image cell"));
            }
            if cell.is_valid() {
                let r = (cell.x * cell.x + cell.y * cell.y + cell.z * cell.z).sqrt();
                if (r - cell.range).abs() > 1e-5 * cell.range.max(1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "cell {} range {} inconsistent with coordinates (|xyz| = {})",
                        idx, cell.range, r
                    )));
                }
            } else if cell.x != 0.0 || cell.y != 0.0 || cell.z != 0.0 || cell.range != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "invalid cell {} carries nonzero data",
                    idx
                )));
            }
        }
        Ok(Self {
            height,
            width,
            cells,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row * self.width + col]
    }

    pub(crate) fn cell_mut(&mut self, row: usize, col: usize) -> &mut Cell {
        &mut self.cells[row * self.width + col]
    }

    /// Row-major cell slice.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn valid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_valid()).count()
    }

    /// Range values as a row-major scalar grid (0 where invalid).
    pub fn ranges(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.range).collect()
    }
}

/// Projects a point cloud onto a range image.
///
/// Row index is linear in pitch (`asin(z / r)`) across the vertical field of
/// view, column index linear in azimuth with azimuth 0 at the image center:
///
/// - `row = floor((1 - (pitch - fov_down) / (fov_up - fov_down)) * H)`, clamped
/// - `col = floor(0.5 * (1 - atan2(y, x) / pi) * W)`, clamped
///
/// On collision the nearer return wins (a physical sensor records the first
/// echo). Points with range 0 cannot be projected and are skipped; cells no
/// point maps to stay invalid.
pub fn to_range_image(cloud: &PointCloud, cfg: &ProjectionConfig) -> Result<RangeImage> {
    cfg.validate()?;
    if cloud.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    let fov_up = cfg.fov_up_deg.to_radians();
    let fov_down = cfg.fov_down_deg.to_radians();
    let fov_span = fov_up - fov_down;
    let h = cfg.height as f64;
    let w = cfg.width as f64;

    let mut img = RangeImage::empty(cfg.height, cfg.width);
    for &p in cloud.points() {
        let range = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if range == 0.0 {
            continue;
        }
        let pitch = (p[2] / range).clamp(-1.0, 1.0).asin();
        let azimuth = p[1].atan2(p[0]);
        let row_f = (1.0 - (pitch - fov_down) / fov_span) * h;
        let col_f = 0.5 * (1.0 - azimuth / std::f64::consts::PI) * w;
        let row = (row_f.floor() as i64).clamp(0, cfg.height as i64 - 1) as usize;
        let col = (col_f.floor() as i64).clamp(0, cfg.width as i64 - 1) as usize;
        let cell = img.cell_mut(row, col);
        if !cell.is_valid() || range < cell.range {
            *cell = Cell::from_point(p, range);
        }
    }
    Ok(img)
}

/// Reshapes a range image into a point cloud: one point per valid cell, in
/// row-major cell order. An all-invalid image yields an empty cloud.
pub fn to_point_cloud(img: &RangeImage) -> PointCloud {
    let points: Vec<Point3> = img
        .cells
        .iter()
        .filter(|c| c.is_valid())
        .map(|c| [c.x, c.y, c.z])
        .collect();
    PointCloud::new(points).expect("range image cells are finite by construction")
}

/// Keeps every `row_stride`-th row and `col_stride`-th column, starting at 0.
/// Strides must divide the image shape exactly.
pub fn sparsify(img: &RangeImage, row_stride: usize, col_stride: usize) -> Result<RangeImage> {
    if row_stride < 1
        || col_stride < 1
        || img.height % row_stride != 0
        || img.width % col_stride != 0
    {
        return Err(Error::StrideMismatch {
            row_stride,
            col_stride,
            height: img.height,
            width: img.width,
        });
    }
    let height = img.height / row_stride;
    let width = img.width / col_stride;
    let mut cells = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            cells.push(*img.cell(r * row_stride, c * col_stride));
        }
    }
    Ok(RangeImage {
        height,
        width,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[Point3]) -> PointCloud {
        PointCloud::new(points.to_vec()).unwrap()
    }

    #[test]
    fn projection_example_lands_in_row0_col2() {
        // Hand evaluation for (10,0,0), H=2, W=4, fov +3/-25 deg: pitch 0 gives
        // row floor((1 - 25/28) * 2) = 0, azimuth 0 gives col floor(2) = 2.
        let cfg = ProjectionConfig::new(2, 4, 3.0, -25.0).unwrap();
        let img = to_range_image(&cloud(&[[10.0, 0.0, 0.0]]), &cfg).unwrap();
        assert!(img.cell(0, 2).is_valid());
        assert_eq!(img.cell(0, 2).range, 10.0);
        assert_eq!(img.valid_count(), 1);
    }

    #[test]
    fn zero_range_points_leave_all_cells_invalid() {
        let cfg = ProjectionConfig::new(4, 8, 3.0, -25.0).unwrap();
        let img = to_range_image(&cloud(&[[0.0, 0.0, 0.0]]), &cfg).unwrap();
        assert_eq!(img.valid_count(), 0);
        assert!(to_point_cloud(&img).is_empty());
    }

    #[test]
    fn empty_cloud_is_rejected() {
        let cfg = ProjectionConfig::default();
        assert!(matches!(
            to_range_image(&cloud(&[]), &cfg),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn collision_keeps_nearer_return() {
        let cfg = ProjectionConfig::new(2, 4, 3.0, -25.0).unwrap();
        let img = to_range_image(&cloud(&[[10.0, 0.0, 0.0], [5.0, 0.0, 0.0]]), &cfg).unwrap();
        assert_eq!(img.valid_count(), 1);
        assert_eq!(img.cell(0, 2).range, 5.0);
    }

    #[test]
    fn reshape_emits_valid_cells_in_row_major_order() {
        let mut img = RangeImage::empty(2, 3);
        *img.cell_mut(0, 1) = Cell::from_point([1.0, 0.0, 0.0], 1.0);
        *img.cell_mut(1, 0) = Cell::from_point([0.0, 2.0, 0.0], 2.0);
        *img.cell_mut(1, 2) = Cell::from_point([0.0, 0.0, 3.0], 3.0);
        let cloud = to_point_cloud(&img);
        assert_eq!(
            cloud.points(),
            &[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]
        );
    }

    #[test]
    fn sparsify_shapes_and_identity() {
        let img = RangeImage::empty(64, 1024);
        let out = sparsify(&img, 4, 8).unwrap();
        assert_eq!(out.shape(), (16, 128));

        let img16 = RangeImage::empty(16, 1024);
        assert_eq!(sparsify(&img16, 1, 8).unwrap().shape(), (16, 128));

        let same = sparsify(&img16, 1, 1).unwrap();
        assert_eq!(same, img16);
    }

    #[test]
    fn sparsify_rejects_non_dividing_strides() {
        let img = RangeImage::empty(10, 10);
        assert!(matches!(
            sparsify(&img, 3, 1),
            Err(Error::StrideMismatch { .. })
        ));
        assert!(matches!(
            sparsify(&img, 0, 1),
            Err(Error::StrideMismatch { .. })
        ));
    }

    #[test]
    fn from_cells_validates_consistency() {
        let bad = vec![Cell {
            x: 1.0,
            y: 0.0,
            z: 0.0,
            range: 2.0,
        }];
        assert!(RangeImage::from_cells(1, 1, bad).is_err());

        let stale = vec![Cell {
            x: 1.0,
            y: 0.0,
            z: 0.0,
            range: 0.0,
        }];
        assert!(RangeImage::from_cells(1, 1, stale).is_err());
    }
}
