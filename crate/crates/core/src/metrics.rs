//! Superpixel quality measures: achievable segmentation accuracy (ASA),
//! boundary recall (BR) and explained variation (EV).

use std::collections::HashMap;

use crate::image_io::{LabelMap, RgbImage};
use crate::{Error, Result};

/// Default boundary-recall tolerance, in pixels (Chebyshev distance).
pub const DEFAULT_TOLERANCE: usize = 2;

fn same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        })
    }
}

/// `(1/N) Σ_k max_c |S_k ∩ G_c|`.
pub fn asa(gt: &LabelMap, seg: &LabelMap) -> Result<f64> {
    same_dims(gt.dims(), seg.dims())?;
    let mut overlap: HashMap<(u32, u32), usize> = HashMap::new();
    for (&s, &g) in seg.labels().iter().zip(gt.labels()) {
        *overlap.entry((s, g)).or_default() += 1;
    }
    let mut best = vec![0usize; seg.k()];
    for (&(s, _), &count) in &overlap {
        best[s as usize] = best[s as usize].max(count);
    }
    let covered: usize = best.iter().sum();
    Ok(covered as f64 / gt.labels().len() as f64)
}

/// Pixels with at least one in-frame 4-neighbor carrying a different label.
pub fn boundary_mask(labels: &LabelMap) -> Vec<bool> {
    let (h, w) = labels.dims();
    let l = labels.labels();
    let mut mask = vec![false; h * w];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w && l[i] != l[i + 1] {
                mask[i] = true;
                mask[i + 1] = true;
            }
            if r + 1 < h && l[i] != l[i + w] {
                mask[i] = true;
                mask[i + w] = true;
            }
        }
    }
    mask
}

/// Fraction of ground-truth boundary pixels with a segmentation boundary
/// pixel within Chebyshev distance `tolerance`. 1.0 when the ground truth
/// has no boundary.
pub fn boundary_recall(gt: &LabelMap, seg: &LabelMap, tolerance: usize) -> Result<f64> {
    same_dims(gt.dims(), seg.dims())?;
    let (h, w) = gt.dims();
    let gt_mask = boundary_mask(gt);
    let seg_mask = boundary_mask(seg);

    // summed-area table of segmentation boundary pixels, padded by one
    let stride = w + 1;
    let mut table = vec![0u32; (h + 1) * stride];
    for r in 0..h {
        let mut row = 0u32;
        for c in 0..w {
            row += seg_mask[r * w + c] as u32;
            table[(r + 1) * stride + c + 1] = table[r * stride + c + 1] + row;
        }
    }
    let window = |r: usize, c: usize| {
        let (r0, c0) = (r.saturating_sub(tolerance), c.saturating_sub(tolerance));
        let (r1, c1) = ((r + tolerance + 1).min(h), (c + tolerance + 1).min(w));
        table[r1 * stride + c1] + table[r0 * stride + c0]
            - table[r0 * stride + c1]
            - table[r1 * stride + c0]
    };

    let mut tp = 0usize;
    let mut total = 0usize;
    for r in 0..h {
        for c in 0..w {
            if gt_mask[r * w + c] {
                total += 1;
                if window(r, c) > 0 {
                    tp += 1;
                }
            }
        }
    }
    Ok(if total == 0 {
        1.0
    } else {
        tp as f64 / total as f64
    })
}

/// `Σ_i ‖μ_{S(i)} − μ‖² / Σ_i ‖p_i − μ‖²` over pixels `i`, all three
/// channels jointly. 1.0 for a constant image.
pub fn explained_variation(image: &RgbImage, seg: &LabelMap) -> Result<f64> {
    same_dims((image.height(), image.width()), seg.dims())?;
    let n = image.len() as f64;
    let mut global = [0.0f64; 3];
    let mut sums = vec![[0.0f64; 3]; seg.k()];
    let mut counts = vec![0usize; seg.k()];
    for (p, &l) in image.pixels().iter().zip(seg.labels()) {
        for ch in 0..3 {
            global[ch] += p[ch];
            sums[l as usize][ch] += p[ch];
        }
        counts[l as usize] += 1;
    }
    let global = global.map(|s| s / n);
    let means: Vec<[f64; 3]> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.map(|v| v / c as f64))
        .collect();
    let sq = |a: [f64; 3]| {
        (0..3)
            .map(|ch| (a[ch] - global[ch]) * (a[ch] - global[ch]))
            .sum::<f64>()
    };
    let mut explained = 0.0;
    let mut total = 0.0;
    for (p, &l) in image.pixels().iter().zip(seg.labels()) {
        explained += sq(means[l as usize]);
        total += sq(*p);
    }
    Ok(if total == 0.0 {
        1.0
    } else {
        (explained / total).clamp(0.0, 1.0)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub asa: f64,
    pub br: f64,
    /// Needs the source image; `None` when it was not supplied.
    pub ev: Option<f64>,
    pub k: usize,
    pub boundary_tolerance: usize,
}

impl MetricReport {
    pub const CSV_HEADER: &'static str = "image,k,asa,br,ev,tolerance";

    pub fn compute(
        gt: &LabelMap,
        seg: &LabelMap,
        image: Option<&RgbImage>,
        tolerance: usize,
    ) -> Result<Self> {
        Ok(Self {
            asa: asa(gt, seg)?,
            br: boundary_recall(gt, seg, tolerance)?,
            ev: image.map(|img| explained_variation(img, seg)).transpose()?,
            k: seg.k(),
            boundary_tolerance: tolerance,
        })
    }

    pub fn csv_row(&self, image_id: &str) -> String {
        let ev = self.ev.map(|v| format!("{v:.6}")).unwrap_or_default();
        format!(
            "{image_id},{},{:.6},{:.6},{ev},{}",
            self.k, self.asa, self.br, self.boundary_tolerance
        )
    }
}
