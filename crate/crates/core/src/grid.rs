//! Sample point sets inside the chart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_POINTS_PER_AXIS: usize = 5;
pub const MAX_LATTICE_AXES: usize = 4;
pub const DEFAULT_RANDOM_POINTS: usize = 200;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// Tensor-product lattice on `[-half_width, half_width]^s`.
    Lattice { points_per_axis: usize, half_width: f64 },
    /// Uniform samples in the same box.
    Random { count: usize, half_width: f64, seed: u64 },
}

impl GridSpec {
    /// Lattice for `dim <= 4`, random sampling above.
    pub fn default_for(dim: usize, half_width: f64) -> Self {
        if dim <= MAX_LATTICE_AXES {
            Self::Lattice { points_per_axis: DEFAULT_POINTS_PER_AXIS, half_width }
        } else {
            Self::Random { count: DEFAULT_RANDOM_POINTS, half_width, seed: DEFAULT_SEED }
        }
    }

    pub fn half_width(&self) -> f64 {
        match self {
            Self::Lattice { half_width, .. } | Self::Random { half_width, .. } => *half_width,
        }
    }

    pub fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        match *self {
            Self::Lattice { points_per_axis, half_width } => lattice(dim, points_per_axis, half_width),
            Self::Random { count, half_width, seed } => random_box(dim, count, half_width, seed),
        }
    }
}

fn lattice(dim: usize, per_axis: usize, half_width: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = match per_axis {
        0 => return Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64).collect(),
    };
    let mut out = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// `count` uniform points in `[-half_width, half_width]^dim`.
pub fn random_box(dim: usize, count: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..dim).map(|_| rng.gen_range(-half_width..=half_width)).collect()).collect()
}
