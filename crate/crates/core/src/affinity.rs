//! Handcrafted affinities: Gaussian similarity of RGB vectors, and division
//! by boundary probabilities.

use crate::exec::{self, Execution};
use crate::image_io::{neighbor, AffinityMap, Direction, EdgeProbMap, RgbImage};
use crate::{Error, Result};

/// Floor applied by [`auto_sigma`].
pub const MIN_SIGMA: f64 = 1e-4;

/// Default stabilizer for [`apply_edge_probs`].
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianParams {
    sigma: f64,
}

impl GaussianParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(Self { sigma })
        } else {
            Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {sigma}"
            )))
        }
    }

    pub fn sigma(self) -> f64 {
        self.sigma
    }

    /// `exp(-d² / 2σ²)` for a Euclidean distance `d`.
    pub fn similarity(self, distance: f64) -> f64 {
        (-(distance * distance) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

fn squared_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

pub fn rgb_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    squared_distance(a, b).sqrt()
}

pub fn gaussian_affinity(image: &RgbImage, params: GaussianParams) -> AffinityMap {
    gaussian_affinity_with(image, params, Execution::default())
}

/// Gaussian similarity toward each in-frame 8-neighbor.
///
/// Paired channels are exactly equal: the squared distance is symmetric in
/// IEEE arithmetic, so `E` at `(r, c)` and `W` at `(r, c + 1)` agree bit for bit.
pub fn gaussian_affinity_with(
    image: &RgbImage,
    params: GaussianParams,
    exec: Execution,
) -> AffinityMap {
    let (h, w) = (image.height(), image.width());
    let plane = h * w;
    let mut data = vec![0.0f32; 8 * plane];
    exec::for_each_chunk(exec, &mut data, plane, |ch, out| {
        let dir = Direction::ALL[ch];
        for r in 0..h {
            for c in 0..w {
                if let Some((nr, nc)) = neighbor(h, w, r, c, dir) {
                    let d = rgb_distance(image.pixel(r, c), image.pixel(nr, nc));
                    out[r * w + c] = params.similarity(d) as f32;
                }
            }
        }
    });
    AffinityMap::new(h, w, data).expect("gaussian similarities lie in [0, 1]")
}

/// Bandwidth set to the mean RGB distance over all undirected in-frame
/// 8-neighbor pairs, floored at [`MIN_SIGMA`].
pub fn auto_sigma(image: &RgbImage) -> GaussianParams {
    let (h, w) = (image.height(), image.width());
    let mut total = 0.0;
    let mut pairs = 0usize;
    for r in 0..h {
        for c in 0..w {
            for dir in Direction::FORWARD {
                if let Some((nr, nc)) = neighbor(h, w, r, c, dir) {
                    total += rgb_distance(image.pixel(r, c), image.pixel(nr, nc));
                    pairs += 1;
                }
            }
        }
    }
    let mean = if pairs == 0 { 0.0 } else { total / pairs as f64 };
    GaussianParams {
        sigma: mean.max(MIN_SIGMA),
    }
}

/// Divides each directed affinity `p → q` by `epsilon + (h_p + h_q) / 2` and
/// clamps the quotient to `[0, 1]`.
pub fn apply_edge_probs(
    map: &AffinityMap,
    edges: &EdgeProbMap,
    epsilon: f64,
) -> Result<AffinityMap> {
    let (h, w) = (map.height(), map.width());
    if (edges.height(), edges.width()) != (h, w) {
        return Err(Error::DimensionMismatch {
            expected: (h, w),
            found: (edges.height(), edges.width()),
        });
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    AffinityMap::from_fn(h, w, |r, c, dir| {
        let (nr, nc) = neighbor(h, w, r, c, dir).expect("from_fn visits in-frame entries only");
        let boundary = (edges.get(r, c) as f64 + edges.get(nr, nc) as f64) / 2.0;
        let a = map.get(r, c, dir) as f64 / (epsilon + boundary);
        a.clamp(0.0, 1.0) as f32
    })
}
