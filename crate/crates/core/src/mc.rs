//! Reproducible chunked Monte Carlo plumbing and compensated summation.
//!
//! Every chunk owns an independent ChaCha stream derived from `(seed, chunk index)`,
//! so results do not depend on how rayon schedules the chunks; chunk results are
//! always folded in index order.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const DEFAULT_CHUNK: usize = 16_384;

pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `f(chunk_index, rng, count)` over `ceil(samples / chunk)` chunks in parallel
/// and returns the per-chunk results in index order.
pub fn map_chunks<T, F>(samples: usize, chunk: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunk = chunk.max(1);
    let count = samples.div_ceil(chunk);
    (0..count)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = chunk.min(samples - c * chunk);
            f(c, &mut rng, len)
        })
        .collect()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn merge(&mut self, other: &Sum) {
        self.add(other.s);
        self.add(other.c);
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CSum {
    re: Sum,
    im: Sum,
}

impl CSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &CSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = Sum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn chunk_streams_are_independent_of_chunk_count() {
        let a = map_chunks(10, 4, 7, |_, rng, len| (0..len).map(|_| rng.random::<u64>()).collect::<Vec<_>>());
        let b = map_chunks(10, 4, 7, |_, rng, len| (0..len).map(|_| rng.random::<u64>()).collect::<Vec<_>>());
        assert_eq!(a, b);
        assert_eq!(a.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4, 2]);
        assert_ne!(a[0][0], a[1][0]);
    }
}
