//! Seeded, splittable random streams.
//!
//! A stream is addressed by a master seed plus a key path such as
//! `[point_index, start_index]`; the same address always yields the same
//! sequence, whichever worker thread draws from it.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// Domain tags that keep independent consumers of one master seed apart.
pub mod domain {
    pub const MULTISTART: u64 = 0x6d75_6c74_6973_7461;
    pub const WEIGHTS: u64 = 0x7765_6967_6874_7300;
    pub const INSTANCES: u64 = 0x696e_7374_616e_6365;
    pub const SYNTHETIC: u64 = 0x7379_6e74_6865_7469;
    pub const VALIDATION: u64 = 0x7661_6c69_6461_7465;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds a key path into one 64-bit stream id.
pub fn stream_id(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x5151_5151_5151_5151, |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

pub fn stream(master: u64, keys: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream_id(keys));
    rng
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_symmetric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.transpose()) * 0.5
}

pub fn unit_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}
