//! SINR feedback quantization and the per-BS observation vector.

use serde::{Deserialize, Serialize};

/// Uniform quantizer over a dB range, clamped at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrQuantizer {
    pub levels: usize,
    pub lo_db: f64,
    pub hi_db: f64,
}

impl Default for SinrQuantizer {
    fn default() -> Self {
        SinrQuantizer {
            levels: 8,
            lo_db: -20.0,
            hi_db: 30.0,
        }
    }
}

impl SinrQuantizer {
    pub fn bin_width_db(&self) -> f64 {
        (self.hi_db - self.lo_db) / self.levels as f64
    }

    pub fn quantize(&self, sinr: f64) -> usize {
        quantize_sinr(sinr, self.levels, (self.lo_db, self.hi_db))
    }
}

pub fn quantize_sinr(sinr: f64, levels: usize, bounds: (f64, f64)) -> usize {
    debug_assert!(levels >= 2);
    if !(sinr > 0.0) {
        return 0;
    }
    let db = 10.0 * sinr.log10();
    let width = (bounds.1 - bounds.0) / levels as f64;
    let k = ((db - bounds.0) / width).floor();
    if k < 0.0 {
        0
    } else {
        (k as usize).min(levels - 1)
    }
}

/// Quantized SINRs ordered own cell first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Observation(pub [usize; 4]);

impl Observation {
    /// BS1 sees `[q1, q2, q3, q4]`, BS2 sees `[q3, q4, q1, q2]`.
    pub fn for_bs(bs: usize, sinr: &[f64; 4], quantizer: &SinrQuantizer) -> Self {
        let q = sinr.map(|s| quantizer.quantize(s));
        match bs {
            0 => Observation(q),
            _ => Observation([q[2], q[3], q[0], q[1]]),
        }
    }

    /// Mixed-radix index in `0..levels^4`.
    pub fn state_index(&self, levels: usize) -> usize {
        self.0.iter().fold(0, |acc, q| acc * levels + q)
    }

    /// Indices scaled to `[0, 1]` for the network input.
    pub fn normalized(&self, levels: usize) -> [f64; 4] {
        let top = (levels - 1) as f64;
        self.0.map(|q| q as f64 / top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_both_ends() {
        let q = SinrQuantizer::default();
        assert_eq!(q.quantize(0.0), 0);
        assert_eq!(q.quantize(1e-4), 0);
        assert_eq!(q.quantize(1e6), 7);
    }

    #[test]
    fn bin_midpoints_map_to_their_bin() {
        let q = SinrQuantizer::default();
        for k in 0..q.levels {
            let db = q.lo_db + (k as f64 + 0.5) * q.bin_width_db();
            assert_eq!(q.quantize(10f64.powf(db / 10.0)), k);
        }
    }

    #[test]
    fn observation_ordering_and_index() {
        let q = SinrQuantizer::default();
        let sinr = [1e-3, 1.0, 10.0, 1e5];
        let o1 = Observation::for_bs(0, &sinr, &q);
        let o2 = Observation::for_bs(1, &sinr, &q);
        assert_eq!(o1.0, [0, 3, 4, 7]);
        assert_eq!(o2.0, [4, 7, 0, 3]);
        assert_eq!(o1.state_index(8), 3 * 8 * 8 + 4 * 8 + 7);
        assert_eq!(Observation([7; 4]).state_index(8), 4095);
        assert_eq!(o1.normalized(8), [0.0, 3.0 / 7.0, 4.0 / 7.0, 1.0]);
    }
}
