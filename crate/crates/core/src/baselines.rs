//! Reference systems: the segment-averaging ("naive") encoder and frame-level DTW.

use crate::data::FeatureSequence;
use crate::error::{Error, Result};
use crate::linalg::euclidean;

/// Concatenation of `m` segment means, length `D·m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveEmbedding {
    pub v: Vec<f64>,
    pub m: usize,
}

/// Splits `x` into `m` segments `[⌊iT/m⌋, ⌊(i+1)T/m⌋)`, averages each and
/// concatenates the means. Empty segments (only possible when `T < m`)
/// contribute zeros.
pub fn naive_encode(x: &FeatureSequence, m: usize) -> Result<NaiveEmbedding> {
    if m == 0 {
        return Err(Error::Invalid("segment count m must be at least 1".into()));
    }
    let (t, d) = (x.len(), x.dim());
    let mut v = vec![0.0; d * m];
    for i in 0..m {
        let (lo, hi) = (i * t / m, (i + 1) * t / m);
        if lo == hi {
            continue;
        }
        let out = &mut v[i * d..(i + 1) * d];
        for frame in lo..hi {
            for (o, f) in out.iter_mut().zip(x.frame(frame)) {
                *o += f;
            }
        }
        let n = (hi - lo) as f64;
        out.iter_mut().for_each(|o| *o /= n);
    }
    Ok(NaiveEmbedding { v, m })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DtwOptions {
    /// Divide the accumulated cost by the number of cells on the optimal path.
    pub normalize: bool,
}

/// Optimal alignment found by [`dtw_align`].
#[derive(Debug, Clone, PartialEq)]
pub struct DtwAlignment {
    /// Unnormalized accumulated cost.
    pub cost: f64,
    /// Visited cells `(i, j)`, 0-based, from `(0, 0)` to `(T_a−1, T_b−1)`.
    pub path: Vec<(usize, usize)>,
}

/// Full-matrix DTW with steps `(i−1, j)`, `(i, j−1)`, `(i−1, j−1)`, unit
/// weights, Euclidean frame distance and no band.
pub fn dtw_align(a: &FeatureSequence, b: &FeatureSequence) -> Result<DtwAlignment> {
    if a.dim() != b.dim() {
        return Err(Error::dim("DTW frame width", a.dim(), b.dim()));
    }
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Err(Error::Invalid("DTW on an empty sequence".into()));
    }
    let mut acc = vec![f64::INFINITY; n * m];
    // 0 = diagonal, 1 = from above (i-1), 2 = from left (j-1)
    let mut from = vec![0u8; n * m];
    for i in 0..n {
        for j in 0..m {
            let cost = euclidean(a.frame(i), b.frame(j));
            let idx = i * m + j;
            if i == 0 && j == 0 {
                acc[idx] = cost;
                continue;
            }
            let mut best = f64::INFINITY;
            let mut dir = 0;
            if i > 0 && j > 0 && acc[idx - m - 1] < best {
                best = acc[idx - m - 1];
                dir = 0;
            }
            if i > 0 && acc[idx - m] < best {
                best = acc[idx - m];
                dir = 1;
            }
            if j > 0 && acc[idx - 1] < best {
                best = acc[idx - 1];
                dir = 2;
            }
            acc[idx] = best + cost;
            from[idx] = dir;
        }
    }
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        match from[i * m + j] {
            0 => {
                i -= 1;
                j -= 1;
            }
            1 => i -= 1,
            _ => j -= 1,
        }
        path.push((i, j));
    }
    path.reverse();
    Ok(DtwAlignment {
        cost: acc[n * m - 1],
        path,
    })
}

pub fn dtw_distance_with(a: &FeatureSequence, b: &FeatureSequence, options: DtwOptions) -> Result<f64> {
    let al = dtw_align(a, b)?;
    Ok(if options.normalize {
        al.cost / al.path.len() as f64
    } else {
        al.cost
    })
}

/// Unnormalized DTW distance.
pub fn dtw_distance(a: &FeatureSequence, b: &FeatureSequence) -> Result<f64> {
    dtw_distance_with(a, b, DtwOptions::default())
}
