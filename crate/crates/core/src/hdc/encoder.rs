use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Hypervector;
use crate::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Everything needed to rebuild an [`Encoder`]; the projection matrix itself
/// is never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderParams {
    pub feature_dim: usize,
    pub hd_dim: usize,
    pub seed: u64,
    pub epsilon: f64,
}

impl EncoderParams {
    pub fn new(feature_dim: usize, hd_dim: usize, seed: u64) -> Self {
        EncoderParams {
            feature_dim,
            hd_dim,
            seed,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 {
            return Err(Error::config("feature_dim must be at least 1"));
        }
        if self.hd_dim == 0 {
            return Err(Error::config("hd_dim must be at least 1"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::config(format!(
                "epsilon must be a positive finite number, got {}",
                self.epsilon
            )));
        }
        if self.feature_dim.checked_mul(self.hd_dim).is_none() {
            return Err(Error::config("feature_dim * hd_dim overflows"));
        }
        Ok(())
    }
}

/// Random-projection encoder: `sign(normalize(z · M))`.
///
/// `M` is a `feature_dim × hd_dim` matrix of i.i.d. standard normal `f32`
/// entries. It is sampled row-major from a single `ChaCha8Rng` stream seeded
/// with `seed_from_u64(seed)`, so equal parameters give a bit-identical matrix
/// on every platform.
#[derive(Debug, Clone)]
pub struct Encoder {
    params: EncoderParams,
    projection: Vec<f32>,
}

impl Encoder {
    pub fn new(params: EncoderParams) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let projection = (0..params.feature_dim * params.hd_dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Ok(Encoder { params, projection })
    }

    pub fn params(&self) -> &EncoderParams {
        &self.params
    }

    pub fn feature_dim(&self) -> usize {
        self.params.feature_dim
    }

    pub fn hd_dim(&self) -> usize {
        self.params.hd_dim
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    /// Row-major projection matrix (`feature_dim` rows of `hd_dim` entries).
    pub fn projection(&self) -> &[f32] {
        &self.projection
    }

    pub fn encode(&self, z: &[f32]) -> Result<Hypervector> {
        let mut scratch = vec![0.0; self.hd_dim()];
        self.encode_with(z, &mut scratch)
    }

    /// Same as [`Encoder::encode`] but reuses a caller-owned projection
    /// buffer, which is what the parallel batch paths hand to each worker.
    pub fn encode_with(&self, z: &[f32], scratch: &mut Vec<f32>) -> Result<Hypervector> {
        let d = self.hd_dim();
        if z.len() != self.feature_dim() {
            return Err(Error::contract(format!(
                "feature vector has length {}, encoder expects {}",
                z.len(),
                self.feature_dim()
            )));
        }
        if let Some(pos) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "feature entry {pos} is not finite ({})",
                z[pos]
            )));
        }

        scratch.clear();
        scratch.resize(d, 0.0);
        // Four projection rows per sweep; each entry still sums over i in order.
        let mut rows = self.projection.chunks_exact(d);
        let mut zs = z.chunks_exact(4);
        for zc in &mut zs {
            let (r0, r1, r2, r3) = (
                rows.next().unwrap(),
                rows.next().unwrap(),
                rows.next().unwrap(),
                rows.next().unwrap(),
            );
            for (j, acc) in scratch.iter_mut().enumerate() {
                let mut v = *acc;
                v += zc[0] * r0[j];
                v += zc[1] * r1[j];
                v += zc[2] * r2[j];
                v += zc[3] * r3[j];
                *acc = v;
            }
        }
        for (&zi, row) in zs.remainder().iter().zip(rows) {
            for (acc, &m) in scratch.iter_mut().zip(row) {
                *acc += zi * m;
            }
        }

        let norm = scratch.iter().map(|v| v * v).sum::<f32>().sqrt();
        let scale = 1.0 / norm.max(self.params.epsilon as f32);
        let signs = scratch
            .iter()
            .map(|&v| if v * scale >= 0.0 { 1 } else { -1 })
            .collect();
        Ok(Hypervector::from_signs_unchecked(signs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_matrix(feature_dim: usize, hd_dim: usize, projection: Vec<f32>) -> Encoder {
        Encoder {
            params: EncoderParams::new(feature_dim, hd_dim, 0),
            projection,
        }
    }

    #[test]
    fn full_width_encoder_has_expected_size() {
        let enc = Encoder::new(EncoderParams::new(128, 10_000, 42)).unwrap();
        assert_eq!(enc.projection().len(), 1_280_000);
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = Encoder::new(EncoderParams::new(8, 64, 9)).unwrap();
        let b = Encoder::new(EncoderParams::new(8, 64, 9)).unwrap();
        let c = Encoder::new(EncoderParams::new(8, 64, 10)).unwrap();
        let bits = |e: &Encoder| e.projection().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn projection_moments_are_standard_normal() {
        let enc = Encoder::new(EncoderParams::new(4096, 4096, 7)).unwrap();
        let n = enc.projection().len() as f64;
        let mean = enc.projection().iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = enc
            .projection()
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        assert!(mean.abs() <= 0.05, "mean {mean}");
        assert!((var - 1.0).abs() <= 0.05, "variance {var}");
    }

    #[test]
    fn rejects_bad_dimensions() {
        for (p, d) in [(0, 4), (4, 0)] {
            assert!(matches!(
                Encoder::new(EncoderParams::new(p, d, 1)),
                Err(Error::Config(_))
            ));
        }
        let mut params = EncoderParams::new(2, 2, 1);
        params.epsilon = 0.0;
        assert!(matches!(Encoder::new(params), Err(Error::Config(_))));
    }

    #[test]
    fn zero_features_encode_to_all_plus_one() {
        let enc = Encoder::new(EncoderParams::new(4, 32, 3)).unwrap();
        let hv = enc.encode(&[0.0; 4]).unwrap();
        assert!(hv.signs().iter().all(|&s| s == 1));
    }

    #[test]
    fn hand_matrix_example() {
        // hv = [2*1 + -2*0.5, 2*-1 + -2*1, 2*2 + -2*-1] = [1, -4, 6]
        let enc = with_matrix(2, 3, vec![1.0, -1.0, 2.0, 0.5, 1.0, -1.0]);
        let hv = enc.encode(&[2.0, -2.0]).unwrap();
        assert_eq!(hv.signs(), &[1, -1, 1]);
    }

    #[test]
    fn positive_scaling_does_not_change_encoding() {
        let enc = Encoder::new(EncoderParams::new(6, 128, 5)).unwrap();
        let z = [0.3, -1.2, 4.0, 0.0, -0.7, 2.2];
        let scaled: Vec<f32> = z.iter().map(|v| v * 3.0).collect();
        assert_eq!(enc.encode(&z).unwrap(), enc.encode(&scaled).unwrap());
    }

    #[test]
    fn contract_errors() {
        let enc = Encoder::new(EncoderParams::new(3, 16, 1)).unwrap();
        assert!(matches!(enc.encode(&[1.0, 2.0]), Err(Error::Contract(_))));
        assert!(matches!(
            enc.encode(&[1.0, f32::NAN, 2.0]),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            enc.encode(&[1.0, f32::INFINITY, 2.0]),
            Err(Error::Contract(_))
        ));
    }
}
