//! Bundled example designs, stored as ordinary design files under `data/` in
//! the repository (embedded at compile time) and shipped with their expected
//! verification verdicts. The verdicts are re-derived live by the test suite,
//! so a transcription error in a data file cannot survive.

use crate::error::Error;
use crate::model::{read_design_str, DesignFile};
use crate::Result;

/// Expected verification summary bundled with a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expectation {
    pub kind: &'static str,
    pub base_blocks: usize,
    pub strict: bool,
    /// `Some(true)` when the design meets the size bound for its parameters.
    pub optimal: Option<bool>,
}

/// A bundled dataset: key, parsed design, expected verdict.
#[derive(Debug, Clone)]
pub struct NamedDataset {
    pub key: &'static str,
    pub design: DesignFile,
    pub expected: Expectation,
}

struct RawDataset {
    key: &'static str,
    json: &'static str,
    expected: Expectation,
}

const DATASETS: &[RawDataset] = &[
    RawDataset {
        key: "ex-2.3",
        json: include_str!("../../../data/ex-2.3.json"),
        expected: Expectation {
            kind: "packing",
            base_blocks: 48,
            strict: true,
            optimal: Some(true),
        },
    },
    RawDataset {
        key: "ex-3.1",
        json: include_str!("../../../data/ex-3.1.json"),
        expected: Expectation {
            kind: "g-design",
            base_blocks: 14,
            strict: true,
            optimal: None,
        },
    },
    RawDataset {
        key: "ex-3.5-g28",
        json: include_str!("../../../data/ex-3.5-g28.json"),
        expected: Expectation {
            kind: "g-design",
            base_blocks: 14,
            strict: true,
            optimal: None,
        },
    },
    RawDataset {
        key: "ex-5.3",
        json: include_str!("../../../data/ex-5.3.json"),
        expected: Expectation {
            kind: "fan",
            base_blocks: 5,
            strict: false,
            optimal: None,
        },
    },
    RawDataset {
        key: "lem-6.13",
        json: include_str!("../../../data/lem-6.13.json"),
        expected: Expectation {
            kind: "packing",
            base_blocks: 48,
            strict: true,
            optimal: Some(true),
        },
    },
];

/// The available dataset keys.
pub fn builtin_keys() -> Vec<&'static str> {
    DATASETS.iter().map(|d| d.key).collect()
}

/// Loads a bundled dataset by key.
pub fn load_builtin(key: &str) -> Result<NamedDataset> {
    let raw = DATASETS
        .iter()
        .find(|d| d.key == key)
        .ok_or_else(|| Error::Parameter(format!("unknown dataset key `{key}`")))?;
    let design = read_design_str(raw.json)?;
    Ok(NamedDataset {
        key: raw.key,
        design,
        expected: raw.expected,
    })
}

/// The canonical serialized bytes of a bundled dataset.
pub fn builtin_bytes(key: &str) -> Result<&'static str> {
    DATASETS
        .iter()
        .find(|d| d.key == key)
        .map(|d| d.json)
        .ok_or_else(|| Error::Parameter(format!("unknown dataset key `{key}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds;
    use crate::model::{write_design_str, DesignFile, DesignKind};
    use crate::verifier::{self, OptimalityVerdict};

    #[test]
    fn unknown_key_is_an_error() {
        assert!(load_builtin("nope").is_err());
    }

    #[test]
    fn datasets_are_canonical_bytes() {
        for key in builtin_keys() {
            let ds = load_builtin(key).unwrap();
            let rewritten = write_design_str(&ds.design);
            assert_eq!(
                rewritten,
                builtin_bytes(key).unwrap(),
                "{key} is not canonical"
            );
        }
    }

    /// Transcription-fidelity tests: every builtin passes its verifier with
    /// exactly the bundled expectation.
    #[test]
    fn datasets_match_expectations() {
        for key in builtin_keys() {
            let ds = load_builtin(key).unwrap();
            let report = verifier::verify_file(&ds.design).unwrap();
            assert!(report.valid, "{key}: {:?}", report.violations.first());
            assert_eq!(report.strict, ds.expected.strict, "{key} strictness");
            assert_eq!(
                report.base_block_count, ds.expected.base_blocks,
                "{key} count"
            );
            if let Some(opt) = ds.expected.optimal {
                assert_eq!(
                    report.optimal.map(|o| o.meets_bound),
                    Some(opt),
                    "{key} optimality"
                );
            }
        }
    }

    #[test]
    fn z6z6_packing_meets_improved_bound() {
        let ds = load_builtin("ex-2.3").unwrap();
        let DesignFile::Design(d) = &ds.design else {
            panic!("expected a design")
        };
        let r = verifier::verify_packing(d).unwrap();
        let b = bounds::oospc_upper_bound(6, 6).unwrap();
        assert_eq!(b.improved, 48);
        assert_eq!(
            r.optimal,
            Some(OptimalityVerdict {
                size: 48,
                bound: 48,
                meets_bound: true
            })
        );
        assert_eq!(r.developed_block_count, 48 * 36);
    }

    #[test]
    fn z10z2_design_counts() {
        let ds = load_builtin("ex-3.1").unwrap();
        let DesignFile::Design(d) = &ds.design else {
            panic!("expected a design")
        };
        assert_eq!(d.kind, DesignKind::GDesign);
        assert_eq!((d.ambient().rows, d.ambient().cols), (10, 2));
        assert_eq!(d.e, Some(2));
        // Development yields 14 * 20 = 280 pairwise distinct blocks.
        let dev = crate::group::develop(d.base_blocks(), d.action()).unwrap();
        assert_eq!(dev.len(), 280);
        let mut sorted = dev.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 280);
        // Matches the closed-form base-block count.
        assert_eq!(bounds::expected_g_base_count(10, 2, 2, 4).unwrap(), 14);
    }

    #[test]
    fn z6z6_development_is_duplicate_free() {
        let ds = load_builtin("ex-2.3").unwrap();
        let DesignFile::Design(d) = &ds.design else {
            panic!("expected a design")
        };
        let dev = crate::group::develop(d.base_blocks(), d.action()).unwrap();
        assert_eq!(dev.len(), 1728);
        let mut sorted = dev;
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 1728);
    }
}
