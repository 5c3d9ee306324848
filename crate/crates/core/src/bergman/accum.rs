use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::SampleSet;
use crate::error::Result;
use crate::mc::{CSum, Sum};

/// `mean[(i, j)] = Σ w a e_j conj(e_i) / Σ w` and its delta-method standard error.
#[derive(Debug, Clone)]
pub struct OuterMoments {
    pub mean: DMatrix<Complex64>,
    pub stderr: DMatrix<f64>,
}

// Sums over the upper triangle (j ≥ i) of P_ij = e_j conj(e_i), which is Hermitian;
// the real and imaginary parts of `a` are kept apart so the lower triangle follows
// by conjugation.
struct BlockSums {
    s1r: Vec<Complex64>,
    s1i: Vec<Complex64>,
    s2r: Vec<Complex64>,
    s2i: Vec<Complex64>,
    q: Vec<f64>,
}

impl BlockSums {
    fn new(m: usize) -> Self {
        let t = m * (m + 1) / 2;
        Self {
            s1r: vec![Complex64::default(); t],
            s1i: vec![Complex64::default(); t],
            s2r: vec![Complex64::default(); t],
            s2i: vec![Complex64::default(); t],
            q: vec![0.0; t],
        }
    }
}

struct ChunkSums {
    sw: f64,
    sw2: f64,
    blocks: Vec<BlockSums>,
}

/// `fill(z, e)` writes the vector `e(z)` (length `dim`) and returns the symbol value
/// `a(z)`; one moment matrix is accumulated per index range.
pub fn accumulate_blocks<F>(set: &SampleSet, dim: usize, ranges: &[Range<usize>], fill: F) -> Result<Vec<OuterMoments>>
where
    F: Fn(&[Complex64], &mut [Complex64]) -> Result<Complex64> + Sync,
{
    let parts: Vec<Result<ChunkSums>> = set
        .chunk_ranges()
        .into_par_iter()
        .map(|range| {
            let mut c = ChunkSums { sw: 0.0, sw2: 0.0, blocks: ranges.iter().map(|r| BlockSums::new(r.len())).collect() };
            let mut e = vec![Complex64::default(); dim];
            let mut abs2 = vec![0.0; dim];
            for i in range {
                let w = set.weight(i);
                let a = fill(set.point(i), &mut e)?;
                c.sw += w;
                c.sw2 += w * w;
                let (w1r, w1i) = (w * a.re, w * a.im);
                let (w2r, w2i) = (w * w1r, w * w1i);
                let wa2 = w * w * a.norm_sqr();
                for (k, x) in e.iter().enumerate() {
                    abs2[k] = x.norm_sqr();
                }
                for (blk, r) in c.blocks.iter_mut().zip(ranges) {
                    let ev = &e[r.clone()];
                    let av = &abs2[r.clone()];
                    let m = ev.len();
                    let mut k = 0;
                    for row in 0..m {
                        let ce = ev[row].conj();
                        let qa = wa2 * av[row];
                        for col in row..m {
                            let p = ev[col] * ce;
                            blk.s1r[k] += p * w1r;
                            blk.s2r[k] += p * w2r;
                            if a.im != 0.0 {
                                blk.s1i[k] += p * w1i;
                                blk.s2i[k] += p * w2i;
                            }
                            blk.q[k] += qa * av[col];
                            k += 1;
                        }
                    }
                }
            }
            Ok(c)
        })
        .collect();

    let mut sw = Sum::default();
    let mut sw2 = Sum::default();
    let mut acc: Vec<[Vec<CSum>; 4]> = ranges
        .iter()
        .map(|r| {
            let t = r.len() * (r.len() + 1) / 2;
            [vec![CSum::default(); t], vec![CSum::default(); t], vec![CSum::default(); t], vec![CSum::default(); t]]
        })
        .collect();
    let mut accq: Vec<Vec<Sum>> = ranges.iter().map(|r| vec![Sum::default(); r.len() * (r.len() + 1) / 2]).collect();
    for p in parts {
        let c = p?;
        sw.add(c.sw);
        sw2.add(c.sw2);
        for (b, blk) in c.blocks.iter().enumerate() {
            for k in 0..blk.q.len() {
                acc[b][0][k].add(blk.s1r[k]);
                acc[b][1][k].add(blk.s1i[k]);
                acc[b][2][k].add(blk.s2r[k]);
                acc[b][3][k].add(blk.s2i[k]);
                accq[b][k].add(blk.q[k]);
            }
        }
    }
    let total = sw.value();
    let total2 = sw2.value();
    let i = Complex64::new(0.0, 1.0);
    Ok(ranges
        .iter()
        .enumerate()
        .map(|(b, r)| {
            let m = r.len();
            // offset of row `row` in the packed upper triangle is Σ_{k<row} (m − k)
            let idx = |row: usize, col: usize| row * (2 * m - row + 1) / 2 + (col - row);
            let get = |which: usize, row: usize, col: usize| -> Complex64 {
                let (re, im) = (&acc[b][which], &acc[b][which + 1]);
                if col >= row {
                    let k = idx(row, col);
                    re[k].value() + i * im[k].value()
                } else {
                    let k = idx(col, row);
                    re[k].value().conj() + i * im[k].value().conj()
                }
            };
            let mean = DMatrix::from_fn(m, m, |row, col| get(0, row, col) / total);
            let stderr = DMatrix::from_fn(m, m, |row, col| {
                let mu = mean[(row, col)];
                let q = accq[b][if col >= row { idx(row, col) } else { idx(col, row) }].value();
                let var = q - 2.0 * (mu.conj() * get(2, row, col)).re + mu.norm_sqr() * total2;
                var.max(0.0).sqrt() / total
            });
            OuterMoments { mean, stderr }
        })
        .collect())
}

pub fn accumulate_outer<F>(set: &SampleSet, m: usize, fill: F) -> Result<OuterMoments>
where
    F: Fn(&[Complex64], &mut [Complex64]) -> Result<Complex64> + Sync,
{
    Ok(accumulate_blocks(set, m, &[0..m], fill)?.remove(0))
}
