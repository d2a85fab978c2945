//! Network geometry, large-scale path loss and block-fading channel draws.
//!
//! All gains are stored as noise-normalized power gains `|h|^2 / sigma^2`, so
//! every SINR denominator carries an exact `1 +` noise term and transmit
//! powers are expressed in units of the noise power.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `10^-3.53`, the path-loss intercept at one meter.
pub const PATH_LOSS_INTERCEPT: f64 = 2.951_209_226_666_386e-4;
pub const PATH_LOSS_EXPONENT: f64 = 3.76;

/// Number of users served by the two base stations.
pub const USERS: usize = 4;

/// Transmitter whose signal reaches a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Bs1,
    Bs2,
    Jammer,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Bs1, Source::Bs2, Source::Jammer];

    fn column(self) -> usize {
        match self {
            Source::Bs1 => 0,
            Source::Bs2 => 1,
            Source::Jammer => 2,
        }
    }
}

/// Small-scale fading applied on top of the path loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Fading {
    /// Unit-mean exponential power gain (complex Gaussian amplitude).
    #[default]
    Rayleigh,
    /// Path loss only.
    None,
}

/// One-dimensional placement of users, base stations and the jammer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Positions of UE1..UE4 in meters.
    pub user_positions: [f64; USERS],
    /// Positions of BS1 and BS2 in meters.
    pub bs_positions: [f64; 2],
    pub jammer_position: f64,
    /// Total noise power in dB.
    pub noise_power_db: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            user_positions: [250.0, 20.0, 400.0, 480.0],
            bs_positions: [0.0, 500.0],
            jammer_position: -250.0,
            noise_power_db: -140.0,
        }
    }
}

impl Geometry {
    pub fn position(&self, source: Source) -> f64 {
        match source {
            Source::Bs1 => self.bs_positions[0],
            Source::Bs2 => self.bs_positions[1],
            Source::Jammer => self.jammer_position,
        }
    }

    pub fn distance(&self, user: usize, source: Source) -> f64 {
        (self.user_positions[user] - self.position(source)).abs()
    }

    pub fn noise_power(&self) -> f64 {
        10f64.powf(self.noise_power_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let coords = self
            .user_positions
            .iter()
            .chain(self.bs_positions.iter())
            .chain(std::iter::once(&self.jammer_position));
        if coords.clone().any(|x| !x.is_finite()) {
            return Err(Error::Geometry("non-finite coordinate".into()));
        }
        if !self.noise_power_db.is_finite() {
            return Err(Error::Geometry("noise power must be finite".into()));
        }
        for user in 0..USERS {
            for source in Source::ALL {
                if self.distance(user, source) <= 0.0 {
                    return Err(Error::Geometry(format!(
                        "UE{} coincides with {:?}",
                        user + 1,
                        source
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Large-scale fading factor `10^-3.53 / d^3.76`.
pub fn path_loss(distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::Domain(format!(
            "path loss needs a positive distance, got {distance_m}"
        )));
    }
    Ok(PATH_LOSS_INTERCEPT / distance_m.powf(PATH_LOSS_EXPONENT))
}

/// Noise-normalized power gains for one block of slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    gains: [[f64; 3]; USERS],
    pub seed: u64,
}

impl ChannelRealization {
    /// Builds a realization from explicit gains, rows UE1..UE4, columns BS1, BS2, jammer.
    pub fn from_gains(gains: [[f64; 3]; USERS], seed: u64) -> Result<Self> {
        if gains.iter().flatten().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::Domain("gains must be finite and non-negative".into()));
        }
        Ok(ChannelRealization { gains, seed })
    }

    /// Gain from `source` to user `user` (0-based, UE1 = 0).
    #[inline]
    pub fn gain(&self, user: usize, source: Source) -> f64 {
        self.gains[user][source.column()]
    }

    pub fn gains(&self) -> &[[f64; 3]; USERS] {
        &self.gains
    }

    /// The same network with the two cells relabeled: BS1 <-> BS2, UE1 <-> UE3, UE2 <-> UE4.
    pub fn mirrored(&self) -> Self {
        let swap = |row: [f64; 3]| [row[1], row[0], row[2]];
        ChannelRealization {
            gains: [
                swap(self.gains[2]),
                swap(self.gains[3]),
                swap(self.gains[0]),
                swap(self.gains[1]),
            ],
            seed: self.seed,
        }
    }
}

/// Draws one channel realization; a pure function of `(geom, seed, fading)`.
pub fn draw_channels(geom: &Geometry, seed: u64, fading: Fading) -> Result<ChannelRealization> {
    geom.validate()?;
    let noise = geom.noise_power();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gains = [[0.0; 3]; USERS];
    for (user, row) in gains.iter_mut().enumerate() {
        for source in Source::ALL {
            let large_scale = path_loss(geom.distance(user, source))?;
            let f: f64 = match fading {
                Fading::Rayleigh => Exp1.sample(&mut rng),
                Fading::None => 1.0,
            };
            row[source.column()] = large_scale * f / noise;
        }
    }
    ChannelRealization::from_gains(gains, seed)
}

/// Checks that inter-cell interference and jamming keep the SIC order
/// (UE2 stronger than UE1, UE4 stronger than UE3).
pub fn sic_order_valid(ch: &ChannelRealization, p_bs1: f64, p_bs2: f64, p_j: f64) -> bool {
    use Source::*;
    let cell1 = |u: usize| ch.gain(u, Bs1) / (1.0 + p_bs2 * ch.gain(u, Bs2) + p_j * ch.gain(u, Jammer));
    let cell2 = |u: usize| ch.gain(u, Bs2) / (1.0 + p_bs1 * ch.gain(u, Bs1) + p_j * ch.gain(u, Jammer));
    cell1(0) <= cell1(1) && cell2(2) <= cell2(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn path_loss_reference_points() {
        assert_relative_eq!(path_loss(1.0).unwrap(), 2.951_209_226_666_386e-4, max_relative = 1e-15);
        assert_relative_eq!(path_loss(10.0).unwrap(), 10f64.powf(-7.29), max_relative = 1e-13);
        // 40-digit evaluation of 10^-3.53 / 250^3.76
        assert_relative_eq!(path_loss(250.0).unwrap(), 2.842_795_160_196_713_5e-13, max_relative = 1e-13);
    }

    #[test]
    fn path_loss_rejects_non_positive() {
        assert!(path_loss(0.0).is_err());
        assert!(path_loss(-3.0).is_err());
        assert!(path_loss(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn path_loss_strictly_decreasing(a in 0.01f64..5000.0, b in 0.01f64..5000.0) {
            prop_assume!(a < b);
            prop_assert!(path_loss(a).unwrap() > path_loss(b).unwrap());
        }
    }

    #[test]
    fn geometry_rejects_coincident_nodes() {
        let mut g = Geometry::default();
        g.validate().unwrap();
        g.jammer_position = 250.0;
        assert!(matches!(g.validate(), Err(Error::Geometry(_))));
        let mut g = Geometry::default();
        g.noise_power_db = f64::INFINITY;
        assert!(g.validate().is_err());
    }

    #[test]
    fn draws_are_deterministic() {
        let g = Geometry::default();
        let a = draw_channels(&g, 17, Fading::Rayleigh).unwrap();
        let b = draw_channels(&g, 17, Fading::Rayleigh).unwrap();
        assert_eq!(a, b);
        let c = draw_channels(&g, 18, Fading::Rayleigh).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unfaded_unit_distance_reduces_to_intercept() {
        let g = Geometry {
            user_positions: [1.0, -1.0, 1.0, -1.0],
            bs_positions: [0.0, 0.0],
            jammer_position: 0.0,
            noise_power_db: 0.0,
        };
        let ch = draw_channels(&g, 3, Fading::None).unwrap();
        for gain in ch.gains().iter().flatten() {
            assert_relative_eq!(*gain, PATH_LOSS_INTERCEPT, max_relative = 1e-15);
        }
    }

    #[test]
    fn faded_gains_have_path_loss_mean() {
        let g = Geometry::default();
        let n = 100_000u64;
        let mut sums = [[0.0; 3]; USERS];
        for seed in 0..n {
            let ch = draw_channels(&g, seed, Fading::Rayleigh).unwrap();
            for (u, row) in ch.gains().iter().enumerate() {
                for (s, v) in row.iter().enumerate() {
                    sums[u][s] += v;
                }
            }
        }
        for user in 0..USERS {
            for source in Source::ALL {
                let expected = path_loss(g.distance(user, source)).unwrap() / g.noise_power();
                let mean = sums[user][source.column()] / n as f64;
                assert!(
                    ((mean - expected) / expected).abs() < 0.02,
                    "UE{} {:?}: {mean} vs {expected}",
                    user + 1,
                    source
                );
            }
        }
    }

    #[test]
    fn sic_order_equal_gains_holds() {
        let ch = ChannelRealization::from_gains(
            [[2.0, 0.5, 0.1], [2.0, 0.5, 0.1], [0.3, 4.0, 0.2], [0.3, 4.0, 0.2]],
            0,
        )
        .unwrap();
        assert!(sic_order_valid(&ch, 3.0, 7.0, 1.5));
    }

    #[test]
    fn sic_order_without_interference_compares_direct_gains() {
        let ch = ChannelRealization::from_gains(
            [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.5, 0.0]],
            0,
        )
        .unwrap();
        assert!(sic_order_valid(&ch, 5.0, 5.0, 5.0));
        let swapped = ChannelRealization::from_gains(
            [[2.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 1.5, 0.0]],
            0,
        )
        .unwrap();
        assert!(!sic_order_valid(&swapped, 5.0, 5.0, 5.0));
    }

    fn sic_oracle(g: &[[f64; 3]; 4], pb1: f64, pb2: f64, pj: f64) -> bool {
        let lhs2 = g[0][0] / (1.0 + pb2 * g[0][1] + pj * g[0][2]);
        let rhs2 = g[1][0] / (1.0 + pb2 * g[1][1] + pj * g[1][2]);
        let lhs3 = g[2][1] / (1.0 + pb1 * g[2][0] + pj * g[2][2]);
        let rhs3 = g[3][1] / (1.0 + pb1 * g[3][0] + pj * g[3][2]);
        lhs2 <= rhs2 && lhs3 <= rhs3
    }

    #[test]
    fn sic_order_matches_scalar_oracle_on_random_draws() {
        use rand::Rng;
        let g = Geometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..500 {
            let ch = draw_channels(&g, seed, Fading::Rayleigh).unwrap();
            let (pb1, pb2, pj) = (rng.random_range(0.0..40.0), rng.random_range(0.0..40.0), rng.random_range(0.0..20.0));
            assert_eq!(sic_order_valid(&ch, pb1, pb2, pj), sic_oracle(ch.gains(), pb1, pb2, pj));
        }
    }

    #[test]
    fn mirror_is_an_involution() {
        let ch = draw_channels(&Geometry::default(), 5, Fading::Rayleigh).unwrap();
        assert_eq!(ch.mirrored().mirrored(), ch);
        assert_eq!(ch.mirrored().gain(0, Source::Bs1), ch.gain(2, Source::Bs2));
        assert_eq!(ch.mirrored().gain(3, Source::Jammer), ch.gain(1, Source::Jammer));
    }
}
