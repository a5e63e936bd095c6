//! Counter-based pseudo-random stream for reproducible experiments.
//!
//! The generator is a keyed SplitMix64: draw `k` of stream `key` is
//! `mix64(key + (k + 1) * GOLDEN)` with the standard SplitMix64 finalizer.
//! Because outputs depend only on `(key, counter)`, substreams can be derived
//! by hashing a tag into the key without consuming draws from the parent, and
//! any draw can be reproduced from the seed alone. Gamma sampling follows
//! Marsaglia and Tsang's squeeze method with the shape-boost for shapes below
//! one; normals come from Box-Muller on open-interval uniforms.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: mix64(seed ^ GOLDEN),
            counter: 0,
        }
    }

    /// Independent stream derived from `seed` and a textual tag. Adding new
    /// tags never shifts draws of existing streams.
    pub fn substream(seed: u64, tag: &str) -> Self {
        let mut key = mix64(seed ^ GOLDEN);
        for &b in tag.as_bytes() {
            key = mix64(key ^ u64::from(b).wrapping_mul(GOLDEN));
        }
        CounterRng { key, counter: 0 }
    }

    /// Stream for a `(seed, index)` pair, e.g. one per sweep point.
    pub fn substream_indexed(seed: u64, tag: &str, index: u64) -> Self {
        let base = Self::substream(seed, tag);
        CounterRng {
            key: mix64(base.key ^ index.wrapping_mul(GOLDEN)),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in the open interval (0, 1); safe under `ln`.
    fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Unbiased index in `0..n` via the widening-multiply trick.
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Gamma(shape, 1) for any shape > 0.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        assert!(shape > 0.0, "gamma shape must be positive");
        if shape < 1.0 {
            // Boost: Gamma(a) = Gamma(a + 1) * U^(1/a).
            let g = self.gamma(shape + 1.0);
            let u = self.next_open01();
            return g * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.next_open01();
            if u < 1.0 - 0.0331 * x * x * x * x {
                return d * v;
            }
            if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Dirichlet draw via normalized Gamma variates; entries are nonnegative
    /// and sum to one.
    pub fn dirichlet(&mut self, concentration: f64, n: usize) -> Vec<f64> {
        let mut draws: Vec<f64> = (0..n).map(|_| self.gamma(concentration)).collect();
        let sum: f64 = draws.iter().sum();
        if sum <= 0.0 {
            return vec![1.0 / n as f64; n];
        }
        for d in &mut draws {
            *d /= sum;
        }
        draws
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic() {
        let mut a = CounterRng::new(42);
        let mut b = CounterRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = CounterRng::new(43);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn substreams_do_not_collide() {
        let mut a = CounterRng::substream(7, "workload");
        let mut b = CounterRng::substream(7, "models");
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn dirichlet_normalizes() {
        let mut rng = CounterRng::new(1);
        for &conc in &[0.3, 0.5, 1.0, 5.0] {
            let draws = rng.dirichlet(conc, 8);
            assert!(draws.iter().all(|&d| d >= 0.0));
            let total: f64 = draws.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn high_concentration_approaches_uniform() {
        let mut rng = CounterRng::new(2);
        let n = 4;
        let mut max_dev = 0.0f64;
        for _ in 0..1000 {
            let draws = rng.dirichlet(1e6, n);
            for &d in &draws {
                max_dev = max_dev.max((d - 1.0 / n as f64).abs());
            }
        }
        assert!(max_dev < 0.01, "max deviation {max_dev}");
    }

    #[test]
    fn gamma_mean_is_close() {
        let mut rng = CounterRng::new(3);
        let shape = 0.5;
        let n = 20_000;
        let mean: f64 = (0..n).map(|_| rng.gamma(shape)).sum::<f64>() / n as f64;
        assert!((mean - shape).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = CounterRng::new(4);
        let mut items: Vec<usize> = (0..20).collect();
        rng.shuffle(&mut items);
        let mut sorted = items.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }
}
