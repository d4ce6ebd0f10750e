//! Image, affinity, edge-probability and label-map types, and the file
//! formats they are exchanged in.
//!
//! Binary formats are little-endian:
//!
//! * `AFF8`: magic, `u32` height, `u32` width, `u32` reserved (0), then
//!   `8·H·W` `f32` values, channel-major in [`Direction`] order, each plane
//!   row-major.
//! * `EDG1`: magic, `u32` height, `u32` width, then `H·W` `f32` values.
//!
//! Label maps are 16-bit binary PGM (`P5`, maxval 65535) or headerless CSV.
//! Images are 8-bit RGB PNG or binary PPM (`P6`).

mod formats;
mod pnm;

pub use formats::{
    load_image, read_affinity, read_edge_probs, read_labels, read_labels_as, save_overlay,
    write_affinity, write_edge_probs, write_labels, write_labels_as, LabelFormat,
};

use crate::{Error, Result};

/// The eight lattice directions, in on-disk channel order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Direction {
    NW = 0,
    N = 1,
    NE = 2,
    W = 3,
    E = 4,
    SW = 5,
    S = 6,
    SE = 7,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::NW,
        Direction::N,
        Direction::NE,
        Direction::W,
        Direction::E,
        Direction::SW,
        Direction::S,
        Direction::SE,
    ];

    /// Directions that emit each undirected lattice edge exactly once, from
    /// the row-major smaller endpoint.
    pub const FORWARD: [Direction; 4] = [Direction::E, Direction::SE, Direction::S, Direction::SW];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Direction> {
        Direction::ALL.get(i).copied()
    }

    /// `(drow, dcol)`.
    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::NW => (-1, -1),
            Direction::N => (-1, 0),
            Direction::NE => (-1, 1),
            Direction::W => (0, -1),
            Direction::E => (0, 1),
            Direction::SW => (1, -1),
            Direction::S => (1, 0),
            Direction::SE => (1, 1),
        }
    }

    /// The direction pointing back from the neighbor.
    pub fn mirror(self) -> Direction {
        Direction::ALL[7 - self.index()]
    }
}

/// Neighbor of `(row, col)` in direction `dir`, if it lies inside an
/// `height × width` frame.
pub fn neighbor(
    height: usize,
    width: usize,
    row: usize,
    col: usize,
    dir: Direction,
) -> Option<(usize, usize)> {
    let (dr, dc) = dir.offset();
    let r = row.checked_add_signed(dr)?;
    let c = col.checked_add_signed(dc)?;
    (r < height && c < width).then_some((r, c))
}

fn check_unit(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::format(format!("{what} value {v} outside [0, 1]")))
    }
}

fn check_dims(height: usize, width: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::format(format!("zero-sized frame {height}x{width}")));
    }
    height
        .checked_mul(width)
        .and_then(|n| n.checked_mul(8))
        .filter(|&n| n <= u32::MAX as usize)
        .map(|_| ())
        .ok_or_else(|| Error::format(format!("dimensions {height}x{width} overflow")))
}

/// An RGB image with channel values normalized to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    height: usize,
    width: usize,
    data: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(height: usize, width: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(Error::format(format!(
                "expected {} pixels, got {}",
                height * width,
                data.len()
            )));
        }
        for px in &data {
            for &v in px {
                check_unit(v, "pixel")?;
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        self.data[row * self.width + col]
    }

    /// Row-major pixels.
    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }
}

/// Directed 8-neighbor affinities in `[0, 1]`, one plane per [`Direction`].
///
/// Entries whose neighbor falls outside the frame are always 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMap {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl AffinityMap {
    /// Builds a map from channel-major data. Out-of-frame entries are zeroed.
    pub fn new(height: usize, width: usize, mut data: Vec<f32>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != 8 * height * width {
            return Err(Error::format(format!(
                "expected {} affinity values, got {}",
                8 * height * width,
                data.len()
            )));
        }
        let plane = height * width;
        for dir in Direction::ALL {
            for r in 0..height {
                for c in 0..width {
                    let slot = &mut data[dir.index() * plane + r * width + c];
                    if neighbor(height, width, r, c, dir).is_none() {
                        *slot = 0.0;
                    } else {
                        check_unit(*slot as f64, "affinity")?;
                    }
                }
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// `f(row, col, dir)` is only called for in-frame neighbors.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, Direction) -> f32,
    ) -> Result<Self> {
        check_dims(height, width)?;
        let plane = height * width;
        let mut data = vec![0.0f32; 8 * plane];
        for dir in Direction::ALL {
            for r in 0..height {
                for c in 0..width {
                    if neighbor(height, width, r, c, dir).is_some() {
                        data[dir.index() * plane + r * width + c] = f(r, c, dir);
                    }
                }
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize, dir: Direction) -> f32 {
        self.data[dir.index() * self.height * self.width + row * self.width + col]
    }

    pub fn channel(&self, dir: Direction) -> &[f32] {
        let plane = self.height * self.width;
        &self.data[dir.index() * plane..(dir.index() + 1) * plane]
    }

    /// Channel-major values.
    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Reorders channels: output channel `c` takes input channel `perm[c]`.
    ///
    /// Used to read affinity files produced with a different channel order.
    pub fn permute_channels(&self, perm: &[usize; 8]) -> Result<Self> {
        let mut seen = [false; 8];
        for &p in perm {
            if p >= 8 || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!(
                    "channel permutation {perm:?} is not a bijection on 0..8"
                )));
            }
        }
        let plane = self.height * self.width;
        let mut data = Vec::with_capacity(self.data.len());
        for &src in perm {
            data.extend_from_slice(&self.data[src * plane..(src + 1) * plane]);
        }
        Self::new(self.height, self.width, data)
    }
}

/// Per-pixel boundary probabilities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeProbMap {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl EdgeProbMap {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(Error::format(format!(
                "expected {} edge probabilities, got {}",
                height * width,
                data.len()
            )));
        }
        for &v in &data {
            check_unit(v as f64, "edge probability")?;
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

/// A dense labeling: labels are exactly `0..k`, numbered in order of first
/// appearance in a row-major scan.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelMap {
    height: usize,
    width: usize,
    labels: Vec<u32>,
    k: usize,
}

impl LabelMap {
    /// Re-indexes arbitrary label values densely.
    pub fn from_raw<T>(height: usize, width: usize, raw: &[T]) -> Result<Self>
    where
        T: Copy + Eq + std::hash::Hash,
    {
        check_dims(height, width)?;
        if raw.len() != height * width {
            return Err(Error::format(format!(
                "expected {} labels, got {}",
                height * width,
                raw.len()
            )));
        }
        let mut table = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|v| {
                let next = table.len() as u32;
                *table.entry(*v).or_insert(next)
            })
            .collect();
        Ok(Self {
            height,
            width,
            labels,
            k: table.len(),
        })
    }

    /// Wraps labels that are already dense in first-occurrence order.
    pub(crate) fn from_dense(height: usize, width: usize, labels: Vec<u32>, k: usize) -> Self {
        debug_assert_eq!(labels.len(), height * width);
        Self {
            height,
            width,
            labels,
            k,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of distinct labels.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}
