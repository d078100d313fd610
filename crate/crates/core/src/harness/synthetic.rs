//! Seeded generator for a small arithmetic-class corpus: every contract has
//! one withdraw-style target whose subtraction is either unchecked
//! (label 1) or guarded by a `require` (label 0), plus up to `max_fillers`
//! benign functions labelled 0.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{DatasetError, DatasetManifest, FunctionLabel, ManifestEntry, VulnerabilityClass};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticContract {
    pub file_name: String,
    pub source: String,
    pub functions: Vec<FunctionLabel>,
    pub vulnerable: bool,
}

const MAPPINGS: [&str; 4] = ["balances", "deposits", "credit", "funds"];
const AMOUNTS: [&str; 3] = ["amount", "value", "wad"];
const TARGETS: [&str; 4] = ["withdraw", "take", "redeem", "release"];

fn target(rng: &mut ChaCha8Rng, vulnerable: bool) -> (String, String) {
    let map = MAPPINGS.choose(rng).unwrap();
    let amount = AMOUNTS.choose(rng).unwrap();
    let name = TARGETS.choose(rng).unwrap().to_string();
    let mut body = Vec::new();
    if !vulnerable {
        body.push(format!("require({map}[msg.sender] >= {amount});"));
    }
    if rng.gen_bool(0.5) {
        body.push(format!("{map}[msg.sender] -= {amount};"));
    } else {
        body.push(format!("{map}[msg.sender] = {map}[msg.sender] - {amount};"));
    }
    if rng.gen_bool(0.5) {
        body.push(format!("msg.sender.transfer({amount});"));
    }
    let src = format!(
        "    function {name}(uint {amount}) public {{\n        {}\n    }}\n",
        body.join("\n        ")
    );
    (name, src)
}

fn filler(rng: &mut ChaCha8Rng, index: usize) -> (String, usize, String) {
    match rng.gen_range(0..3) {
        0 => {
            let name = format!("deposit{index}");
            let src = format!(
                "    function {name}() public payable {{\n        total = total + msg.value;\n    }}\n"
            );
            (name, 0, src)
        }
        1 => {
            let name = format!("owned{index}");
            let src = format!(
                "    function {name}(address who) public view returns (bool) {{\n        return who == owner;\n    }}\n"
            );
            (name, 1, src)
        }
        _ => {
            let name = format!("scale{index}");
            let src = format!(
                "    function {name}(uint x, uint k) public pure returns (uint) {{\n        uint y = x * k;\n        return y;\n    }}\n"
            );
            (name, 2, src)
        }
    }
}

/// `per_class` vulnerable and `per_class` guarded contracts, interleaved.
pub fn synthetic_corpus(per_class: usize, max_fillers: usize, seed: u64) -> Vec<SyntheticContract> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * per_class);
    for i in 0..2 * per_class {
        let vulnerable = i % 2 == 0;
        let mut parts = Vec::new();
        let mut functions = Vec::new();
        let (name, src) = target(&mut rng, vulnerable);
        parts.push(src);
        functions.push(FunctionLabel {
            name,
            arity: 1,
            label: u8::from(vulnerable),
        });
        for k in 0..rng.gen_range(0..=max_fillers) {
            let (name, arity, src) = filler(&mut rng, k);
            parts.push(src);
            functions.push(FunctionLabel { name, arity, label: 0 });
        }
        let order: Vec<usize> = {
            let mut o: Vec<usize> = (0..parts.len()).collect();
            o.shuffle(&mut rng);
            o
        };
        let body: String = order.iter().map(|&j| parts[j].as_str()).collect::<Vec<_>>().join("\n");
        let source = format!(
            "pragma solidity ^0.4.24;\n\ncontract Bank{i} {{\n    mapping(address => uint) {};\n    uint total;\n    address owner;\n\n{body}}}\n",
            MAPPINGS.join(";\n    mapping(address => uint) ")
        );
        out.push(SyntheticContract {
            file_name: format!("bank_{i:03}.sol"),
            source,
            functions: order.iter().map(|&j| functions[j].clone()).collect(),
            vulnerable,
        });
    }
    out
}

/// Writes the sources and a `manifest.jsonl` into `dir`.
pub fn write_corpus(dir: &Path, corpus: &[SyntheticContract]) -> Result<DatasetManifest, DatasetError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| DatasetError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let entries = corpus
        .iter()
        .map(|c| {
            let path = dir.join(&c.file_name);
            std::fs::write(&path, &c.source).map_err(io(&path))?;
            Ok(ManifestEntry {
                path: c.file_name.clone(),
                class: VulnerabilityClass::Arithmetic,
                functions: c.functions.clone(),
            })
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    let manifest = DatasetManifest {
        entries,
        base: dir.to_path_buf(),
    };
    let path = dir.join("manifest.jsonl");
    std::fs::write(&path, manifest.to_jsonl()).map_err(io(&path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_source, SourceFile};
    use crate::graph::build_mrng;
    use crate::harness::dataset::align_labels;

    #[test]
    fn corpus_parses_and_labels_align() {
        let corpus = synthetic_corpus(10, 2, 7);
        assert_eq!(corpus.len(), 20);
        assert_eq!(corpus.iter().filter(|c| c.vulnerable).count(), 10);
        for c in &corpus {
            let ast = parse_source(&SourceFile::new(&c.file_name, &c.source)).unwrap();
            let g = build_mrng(&c.file_name, &ast);
            let labels = align_labels(&g, &c.functions, &c.file_name).unwrap();
            assert_eq!(labels.iter().sum::<f64>(), f64::from(u8::from(c.vulnerable)));
        }
        assert_eq!(synthetic_corpus(10, 2, 7), corpus);
    }
}
