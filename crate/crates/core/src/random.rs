//! Seeded generators for test instances and the CLI `--seed` flag.

use crate::algebra::MultimatrixAlgebra;
use crate::channel::Channel;
use crate::linalg::{pinv_sqrt, random_gaussian, CMat};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide deterministic RNG.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random matrix-trace-preserving channel.
///
/// Each block `(i, j)` gets a Kraus rank drawn from `0..=max_rank`, raised
/// where needed so the stacked Kraus map can be an isometry.
pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    source: &MultimatrixAlgebra,
    target: &MultimatrixAlgebra,
    aux_dim: usize,
    max_rank: usize,
) -> Channel {
    let (m, n) = (source.num_factors(), target.num_factors());
    let h = aux_dim.max(1);
    let mut kraus: Vec<Vec<CMat>> = vec![vec![]; m * n];
    for i in 0..m {
        let din = h * source.factors()[i];
        let mut ranks: Vec<usize> = (0..n).map(|_| rng.random_range(0..=max_rank.max(1))).collect();
        let mut j = 0;
        while (0..n).map(|j| ranks[j] * target.factors()[j]).sum::<usize>() < din {
            ranks[j % n] += 1;
            j += 1;
        }
        let rows: usize = (0..n).map(|j| ranks[j] * target.factors()[j]).sum();
        let g = random_gaussian(rng, rows, din);
        let iso = &g * pinv_sqrt(&(g.adjoint() * &g), 1e-300);
        let mut off = 0;
        for j in 0..n {
            let e = target.factors()[j];
            for _ in 0..ranks[j] {
                kraus[i * n + j].push(iso.rows(off, e).into_owned());
                off += e;
            }
        }
    }
    Channel::from_kraus(source.clone(), target.clone(), aux_dim, &kraus).expect("random channel shapes")
}

/// A random algebra with at most `max_factors` factors of size at most `max_dim`.
pub fn random_algebra<R: Rng + ?Sized>(rng: &mut R, max_factors: usize, max_dim: usize) -> MultimatrixAlgebra {
    let m = rng.random_range(1..=max_factors);
    MultimatrixAlgebra::new((0..m).map(|_| rng.random_range(1..=max_dim)).collect()).expect("positive factors")
}
