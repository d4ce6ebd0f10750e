//! Fixtures and independent checkers shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use hers_core::{AffinityMap, LabelMap, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Four flat quadrants with colors that are exact binary fractions.
pub const QUADRANT_COLORS: [[f64; 3]; 4] = [
    [0.875, 0.125, 0.125],
    [0.125, 0.75, 0.25],
    [0.25, 0.25, 0.875],
    [0.875, 0.875, 0.25],
];

pub fn quadrant_image(size: usize) -> RgbImage {
    let half = size / 2;
    RgbImage::from_fn(size, size, |r, c| QUADRANT_COLORS[(r / half) * 2 + c / half]).unwrap()
}

pub fn quadrant_mask(size: usize) -> LabelMap {
    let half = size / 2;
    let raw: Vec<usize> = (0..size * size)
        .map(|i| (i / size / half) * 2 + (i % size) / half)
        .collect();
    LabelMap::from_raw(size, size, &raw).unwrap()
}

/// A textured scene: smooth gradients, a few flat shapes and light noise,
/// quantized to 8-bit levels like a decoded photo.
pub fn synthetic_scene(height: usize, width: usize, seed: u64) -> RgbImage {
    let mut rng = rng(seed);
    let shapes: Vec<(f64, f64, f64, [f64; 3])> = (0..12)
        .map(|_| {
            (
                rng.gen_range(0.0..height as f64),
                rng.gen_range(0.0..width as f64),
                rng.gen_range(10.0..60.0),
                [rng.gen(), rng.gen(), rng.gen()],
            )
        })
        .collect();
    let noise: Vec<f64> = (0..height * width).map(|_| rng.gen_range(-0.03..0.03)).collect();
    RgbImage::from_fn(height, width, |r, c| {
        let (y, x) = (r as f64 / height as f64, c as f64 / width as f64);
        let mut px = [0.2 + 0.6 * x, 0.3 + 0.4 * y, 0.5 + 0.3 * (x - y)];
        for &(cy, cx, rad, color) in &shapes {
            let (dy, dx) = (r as f64 - cy, c as f64 - cx);
            if dy * dy + dx * dx < rad * rad {
                px = color;
            }
        }
        let n = noise[r * width + c];
        px.map(|v| ((v + n).clamp(0.0, 1.0) * 255.0).round() / 255.0)
    })
    .unwrap()
}

/// Random directed affinities; `levels > 0` quantizes to `levels + 1` values
/// (including 0) so that gains tie often.
pub fn random_affinity(h: usize, w: usize, levels: u32, rng: &mut impl Rng) -> AffinityMap {
    loop {
        let map = AffinityMap::from_fn(h, w, |_, _, _| {
            if levels == 0 {
                rng.gen::<f32>()
            } else {
                rng.gen_range(0..=levels) as f32 / levels as f32
            }
        })
        .unwrap();
        if map.as_slice().iter().any(|&v| v > 0.0) {
            return map;
        }
    }
}

/// Every label's pixels form one 8-connected component (breadth-first search).
pub fn labels_are_8_connected(map: &LabelMap) -> bool {
    let (h, w) = map.dims();
    let mut seen = vec![false; h * w];
    let mut starts = vec![0usize; map.k()];
    for i in 0..h * w {
        if seen[i] {
            continue;
        }
        let label = map.labels()[i];
        starts[label as usize] += 1;
        if starts[label as usize] > 1 {
            return false;
        }
        let mut queue = VecDeque::from([i]);
        seen[i] = true;
        while let Some(p) = queue.pop_front() {
            let (r, c) = ((p / w) as isize, (p % w) as isize);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                        continue;
                    }
                    let q = nr as usize * w + nc as usize;
                    if !seen[q] && map.labels()[q] == label {
                        seen[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    true
}

/// Labels are exactly `0..k` in first-occurrence order.
pub fn is_dense(map: &LabelMap) -> bool {
    let mut next = 0u32;
    for &l in map.labels() {
        if l == next {
            next += 1;
        } else if l > next {
            return false;
        }
    }
    next as usize == map.k()
}

/// `fine` refines `coarse`: each fine label lies inside a single coarse label.
pub fn refines(fine: &LabelMap, coarse: &LabelMap) -> bool {
    let mut parent = vec![u32::MAX; fine.k()];
    for (&f, &c) in fine.labels().iter().zip(coarse.labels()) {
        let slot = &mut parent[f as usize];
        if *slot == u32::MAX {
            *slot = c;
        } else if *slot != c {
            return false;
        }
    }
    true
}
