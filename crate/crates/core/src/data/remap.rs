use std::collections::HashMap;

use super::IGNORE_LABEL;
use crate::{Error, Result};

/// Raw dataset class id → contiguous training class.
///
/// Text form: one `raw_label contiguous_index` pair per line; `#` starts a
/// comment. Raw labels not listed map to [`IGNORE_LABEL`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassRemap {
    table: HashMap<u16, u16>,
}

impl ClassRemap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::format(format!("class remap line {}: {msg}", lineno + 1));
            let mut fields = line.split_whitespace();
            let (Some(raw), Some(idx), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(err("expected `raw_label contiguous_index`"));
            };
            let raw: u16 = raw.parse().map_err(|_| err("raw label is not a u16"))?;
            let idx: u16 = idx.parse().map_err(|_| err("class index is not a u16"))?;
            if idx == IGNORE_LABEL {
                return Err(err("class index collides with the ignore sentinel"));
            }
            if table.insert(raw, idx).is_some() {
                return Err(err("duplicate raw label"));
            }
        }
        Ok(ClassRemap { table })
    }

    pub fn identity(num_classes: u16) -> Self {
        ClassRemap {
            table: (0..num_classes).map(|c| (c, c)).collect(),
        }
    }

    pub fn map(&self, raw: u16) -> u16 {
        self.table.get(&raw).copied().unwrap_or(IGNORE_LABEL)
    }

    /// One more than the largest contiguous index, or 0 when empty.
    pub fn num_classes(&self) -> usize {
        self.table.values().map(|&v| v as usize + 1).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let r = ClassRemap::parse("# semantic-kitti\n10 0  # car\n\n40 1\n48 1\n").unwrap();
        assert_eq!(r.map(10), 0);
        assert_eq!(r.map(48), 1);
        assert_eq!(r.map(11), IGNORE_LABEL);
        assert_eq!(r.num_classes(), 2);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["10", "10 1 2", "x 1", "10 -1", "1 0\n1 2", "3 65535"] {
            assert!(ClassRemap::parse(bad).is_err(), "{bad:?}");
        }
    }
}
