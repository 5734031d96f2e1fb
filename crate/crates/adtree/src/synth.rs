//! Synthetic dataset generation from a small three-layer Bayes net.
//!
//! The generator produces entirely binary attributes in three groups:
//! source nodes ("triangles") sampled independently, parity nodes ("squares")
//! that are deterministic functions of four triangle parents, and noisy
//! copies ("circles") driven by a single parent. Layout is triangles first,
//! then squares, then circles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_triangle: usize,
    pub n_square: usize,
    pub n_circle: usize,
    pub n_records: usize,
    pub seed: u64,
    /// For each square, the four distinct triangle indices it depends on.
    pub square_parents: Vec<[usize; 4]>,
    /// For each circle, the attribute index (triangle or square) it copies.
    pub circle_parents: Vec<usize>,
}

impl SynthConfig {
    /// The default 24-attribute layout: 8 triangles, 8 squares, 8 circles.
    /// Square `s` reads triangles `s, s+1, s+2, s+3 (mod 8)`; circle `c`
    /// reads square `c`. The wiring is overridable via the fields above.
    pub fn with_defaults(n_records: usize, seed: u64) -> Self {
        let n = 8;
        let square_parents = (0..n)
            .map(|s| [s, (s + 1) % n, (s + 2) % n, (s + 3) % n])
            .collect();
        let circle_parents = (0..n).map(|c| n + c).collect();
        SynthConfig {
            n_triangle: n,
            n_square: n,
            n_circle: n,
            n_records,
            seed,
            square_parents,
            circle_parents,
        }
    }

    pub fn num_attrs(&self) -> usize {
        self.n_triangle + self.n_square + self.n_circle
    }

    fn validate(&self) -> Result<()> {
        if self.square_parents.len() != self.n_square {
            return Err(Error::Config(format!(
                "wiring lists {} squares, config declares {}",
                self.square_parents.len(),
                self.n_square
            )));
        }
        if self.circle_parents.len() != self.n_circle {
            return Err(Error::Config(format!(
                "wiring lists {} circles, config declares {}",
                self.circle_parents.len(),
                self.n_circle
            )));
        }
        for (s, parents) in self.square_parents.iter().enumerate() {
            for (i, &p) in parents.iter().enumerate() {
                if p >= self.n_triangle {
                    return Err(Error::Config(format!(
                        "square {s} lists parent {p}, which is not a triangle node"
                    )));
                }
                if parents[..i].contains(&p) {
                    return Err(Error::Config(format!(
                        "square {s} lists triangle parent {p} twice"
                    )));
                }
            }
        }
        let n_upstream = self.n_triangle + self.n_square;
        for (c, &p) in self.circle_parents.iter().enumerate() {
            if p >= n_upstream {
                return Err(Error::Config(format!(
                    "circle {c} lists parent {p}, which is not a triangle or square node"
                )));
            }
        }
        Ok(())
    }
}

/// Draws `cfg.n_records` independent records. Triangles take value 1 with
/// probability 0.8; a square is 2 iff the sum of its four parents' codes is
/// even; a circle is always 1 when its parent is 1, else 2 with probability
/// 0.4. Deterministic for a fixed seed.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let m = cfg.num_attrs();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::with_capacity(cfg.n_records);
    for _ in 0..cfg.n_records {
        let mut rec = vec![0u32; m];
        for t in 0..cfg.n_triangle {
            rec[t] = if rng.gen_bool(0.8) { 1 } else { 2 };
        }
        for (s, parents) in cfg.square_parents.iter().enumerate() {
            let sum: u32 = parents.iter().map(|&p| rec[p]).sum();
            rec[cfg.n_triangle + s] = if sum % 2 == 0 { 2 } else { 1 };
        }
        for (c, &p) in cfg.circle_parents.iter().enumerate() {
            rec[cfg.n_triangle + cfg.n_square + c] = if rec[p] == 2 && rng.gen_bool(0.4) {
                2
            } else {
                1
            };
        }
        records.push(rec);
    }

    let mut names = Vec::with_capacity(m);
    names.extend((1..=cfg.n_triangle).map(|i| format!("t{i}")));
    names.extend((1..=cfg.n_square).map(|i| format!("s{i}")));
    names.extend((1..=cfg.n_circle).map(|i| format!("c{i}")));
    let value_maps = vec![vec!["1".to_string(), "2".to_string()]; m];
    Dataset::from_encoded(names, vec![2; m], records, value_maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_records_is_legal() {
        let d = synth_generate(&SynthConfig::with_defaults(0, 1)).unwrap();
        assert_eq!(d.num_records(), 0);
        assert_eq!(d.num_attrs(), 24);
    }

    #[test]
    fn triangle_marginals_near_point_eight() {
        let cfg = SynthConfig::with_defaults(30_000, 42);
        let d = synth_generate(&cfg).unwrap();
        for t in 0..cfg.n_triangle {
            let ones = d.records().iter().filter(|r| r[t] == 1).count();
            let p = ones as f64 / d.num_records() as f64;
            assert!((p - 0.8).abs() < 0.01, "triangle {t}: empirical P(1) = {p}");
        }
    }

    #[test]
    fn parity_rule_holds_on_every_record() {
        let cfg = SynthConfig::with_defaults(5_000, 7);
        let d = synth_generate(&cfg).unwrap();
        for rec in d.records() {
            for (s, parents) in cfg.square_parents.iter().enumerate() {
                let sum: u32 = parents.iter().map(|&p| rec[p]).sum();
                let expect = if sum % 2 == 0 { 2 } else { 1 };
                assert_eq!(rec[cfg.n_triangle + s], expect);
            }
        }
    }

    #[test]
    fn circle_follows_parent() {
        let cfg = SynthConfig::with_defaults(5_000, 7);
        let d = synth_generate(&cfg).unwrap();
        let base = cfg.n_triangle + cfg.n_square;
        for rec in d.records() {
            for (c, &p) in cfg.circle_parents.iter().enumerate() {
                if rec[p] == 1 {
                    assert_eq!(rec[base + c], 1, "P(circle = 2 | parent = 1) must be 0");
                }
            }
        }
    }

    #[test]
    fn seeds_control_determinism() {
        let a = synth_generate(&SynthConfig::with_defaults(500, 9)).unwrap();
        let b = synth_generate(&SynthConfig::with_defaults(500, 9)).unwrap();
        let c = synth_generate(&SynthConfig::with_defaults(500, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bad_wiring_is_a_config_error() {
        let mut cfg = SynthConfig::with_defaults(10, 1);
        cfg.square_parents[0] = [0, 1, 2, 9]; // 9 is a square, not a triangle
        assert!(matches!(synth_generate(&cfg), Err(Error::Config(_))));
        let mut cfg = SynthConfig::with_defaults(10, 1);
        cfg.square_parents[0] = [0, 0, 1, 2];
        assert!(matches!(synth_generate(&cfg), Err(Error::Config(_))));
    }
}
