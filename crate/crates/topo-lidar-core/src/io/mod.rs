//! File formats: ASCII XYZ and binary PLY point clouds, the flat binary
//! range-image format, KITTI pose files, PGM segmentation masks, and
//! persistence-diagram CSV.

mod diagram;
mod pgm;
mod ply;
mod poses;
mod rimg;
mod xyz;

pub use diagram::write_diagram_csv;
pub use pgm::{read_mask_pgm, write_mask_pgm};
pub use ply::{read_ply, write_ply};
pub use poses::read_kitti_poses;
pub use rimg::{read_range_image, write_range_image};
pub use xyz::{read_xyz, write_xyz};
