//! Binary checkpoints, all little-endian.
//!
//! Model (`.hseg`): magic `HSEG`, version u32, num_classes u32, hd_dim u32,
//! then `num_classes * hd_dim` i32 accumulator entries, row-major.
//!
//! Encoder (`.henc`): magic `HENC`, version u32, feature_dim u32, hd_dim u32,
//! seed u64, epsilon f64. The projection matrix is regenerated from the seed.

use std::path::Path;

use super::{ClassModel, EncoderParams};
use crate::data::bytes::Reader;
use crate::{Error, Result};

const MODEL_MAGIC: &[u8; 4] = b"HSEG";
const ENCODER_MAGIC: &[u8; 4] = b"HENC";
const VERSION: u32 = 1;

impl ClassModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.accumulators().len());
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.num_classes() as u32).to_le_bytes());
        out.extend_from_slice(&(self.hd_dim() as u32).to_le_bytes());
        for &a in self.accumulators() {
            out.extend_from_slice(&a.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(MODEL_MAGIC)?;
        r.expect_version(VERSION)?;
        let num_classes = r.u32()? as usize;
        let hd_dim = r.u32()? as usize;
        if num_classes == 0 || hd_dim == 0 {
            return Err(Error::format("model checkpoint has a zero dimension"));
        }
        let entries = num_classes
            .checked_mul(hd_dim)
            .ok_or_else(|| Error::format("model checkpoint dimensions overflow"))?;
        r.expect_remaining(entries, 4)?;
        let accumulators = (0..entries).map(|_| r.i32()).collect::<Result<Vec<_>>>()?;
        ClassModel::from_accumulators(num_classes, hd_dim, accumulators)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        ClassModel::from_bytes(&bytes)
    }
}

impl EncoderParams {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32);
        out.extend_from_slice(ENCODER_MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.feature_dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.hd_dim as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.epsilon.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(ENCODER_MAGIC)?;
        r.expect_version(VERSION)?;
        let params = EncoderParams {
            feature_dim: r.u32()? as usize,
            hd_dim: r.u32()? as usize,
            seed: r.u64()?,
            epsilon: r.f64()?,
        };
        r.expect_end()?;
        params
            .validate()
            .map_err(|e| Error::format(format!("encoder checkpoint: {e}")))?;
        Ok(params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        EncoderParams::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_layout_is_bit_exact() {
        let m = ClassModel::from_accumulators(2, 2, vec![1, -2, 3, i32::MIN]).unwrap();
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"HSEG");
        assert_eq!(&bytes[4..16], &[1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&bytes[16..20], &1i32.to_le_bytes());
        assert_eq!(&bytes[28..32], &[0, 0, 0, 0x80]);
        assert_eq!(ClassModel::from_bytes(&bytes).unwrap(), m);
    }

    #[test]
    fn model_rejects_malformed() {
        let bytes = ClassModel::new(2, 3).unwrap().to_bytes();
        assert!(ClassModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(ClassModel::from_bytes(&extra).is_err());
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(ClassModel::from_bytes(&bad_magic), Err(Error::Format(_))));
        let mut bad_version = bytes;
        bad_version[4] = 9;
        assert!(matches!(ClassModel::from_bytes(&bad_version), Err(Error::Format(_))));
    }

    #[test]
    fn encoder_params_round_trip() {
        let p = EncoderParams {
            feature_dim: 128,
            hd_dim: 10_000,
            seed: u64::MAX - 3,
            epsilon: 1e-12,
        };
        let bytes = p.to_bytes();
        assert_eq!(bytes.len(), 32);
        assert_eq!(EncoderParams::from_bytes(&bytes).unwrap(), p);
        let mut zero_eps = bytes.clone();
        zero_eps[24..32].copy_from_slice(&0f64.to_le_bytes());
        assert!(EncoderParams::from_bytes(&zero_eps).is_err());
    }
}
