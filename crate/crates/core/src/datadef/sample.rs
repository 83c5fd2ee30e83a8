//! Index distributions for random sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::EvalError;
use crate::value::Value;
use crate::world::World;

use super::Restriction;

pub type TestRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest bit width a geometric draw may reach.
pub const MAX_BIT_WIDTH: u32 = 30;

pub const DEFAULT_UNIFORM_BOUND: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Geometric,
    Uniform,
}

impl Distribution {
    pub fn from_name(s: &str) -> Option<Distribution> {
        match s {
            "geometric" => Some(Distribution::Geometric),
            "uniform" => Some(Distribution::Uniform),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampler {
    pub dist: Distribution,
    pub uniform_bound: u64,
}

impl Sampler {
    pub fn new(dist: Distribution) -> Sampler {
        Sampler { dist, uniform_bound: DEFAULT_UNIFORM_BOUND }
    }

    /// Geometric: the bit width `g` counts fair coin flips up to and
    /// including the first head (so `g >= 1`, capped), then the index is
    /// uniform below `2^g`.
    pub fn draw(&self, rng: &mut TestRng) -> u64 {
        match self.dist {
            Distribution::Geometric => {
                let mut g = 1;
                while g < MAX_BIT_WIDTH && !rng.random_bool(0.5) {
                    g += 1;
                }
                rng.random_range(0..1u64 << g)
            }
            Distribution::Uniform => rng.random_range(0..self.uniform_bound.max(1)),
        }
    }

    pub fn sample(&self, world: &World, r: &Restriction, rng: &mut TestRng) -> Result<Value, EvalError> {
        match r {
            Restriction::Singleton(v) => Ok(v.clone()),
            _ => r.enumerate(world, self.draw(rng)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let s = Sampler::new(Distribution::Geometric);
        let a: Vec<u64> = {
            let mut r = rng_from_seed(7);
            (0..50).map(|_| s.draw(&mut r)).collect()
        };
        let mut r = rng_from_seed(7);
        let b: Vec<u64> = (0..50).map(|_| s.draw(&mut r)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn uniform_respects_bound() {
        let s = Sampler { dist: Distribution::Uniform, uniform_bound: 10 };
        let mut r = rng_from_seed(1);
        assert!((0..1000).all(|_| s.draw(&mut r) < 10));
    }

    #[test]
    fn geometric_mostly_small() {
        let s = Sampler::new(Distribution::Geometric);
        let mut r = rng_from_seed(3);
        let mut xs: Vec<u64> = (0..2001).map(|_| s.draw(&mut r)).collect();
        xs.sort();
        assert!(xs[1000] <= 3, "median {}", xs[1000]);
        assert!(xs.iter().all(|&x| x < 1 << MAX_BIT_WIDTH));
    }
}
