//! Frozen token-to-id maps for node labels and edge subtypes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::edge::{all_subtypes, EdgeType, UNK_EDGE};
use super::mrng::Mrng;

pub const UNK: &str = "<unk>";
pub const PAD: &str = "<pad>";
pub const UNK_ID: usize = 0;
pub const PAD_ID: usize = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VocabularyError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("invalid vocabulary: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    node_tokens: Vec<String>,
    edge_subtypes: Vec<String>,
    min_frequency: usize,
}

/// Node ids: `UNK`=0, `PAD`=1, then frequency desc, ties lexicographic.
/// Edge ids: `UNK_EDGE`=0, then the closed subtype table in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    node_tokens: Vec<String>,
    edge_subtypes: Vec<String>,
    min_frequency: usize,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_parts(node_tokens: Vec<String>, edge_subtypes: Vec<String>, min_frequency: usize) -> Self {
        let node_index = node_tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let edge_index = edge_subtypes.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            node_tokens,
            edge_subtypes,
            min_frequency,
            node_index,
            edge_index,
        }
    }

    pub fn node_id(&self, label: &str) -> usize {
        self.node_index.get(label).copied().unwrap_or(UNK_ID)
    }

    pub fn edge_id(&self, kind: EdgeType) -> usize {
        self.edge_index.get(kind.subtype()).copied().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.node_tokens.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_subtypes.len()
    }

    pub fn node_tokens(&self) -> &[String] {
        &self.node_tokens
    }

    pub fn edge_subtypes(&self) -> &[String] {
        &self.edge_subtypes
    }

    pub fn min_frequency(&self) -> usize {
        self.min_frequency
    }
}

impl TryFrom<VocabRepr> for Vocabulary {
    type Error = VocabularyError;

    fn try_from(r: VocabRepr) -> Result<Self, Self::Error> {
        if r.node_tokens.len() < 2 || r.node_tokens[UNK_ID] != UNK || r.node_tokens[PAD_ID] != PAD {
            return Err(VocabularyError::Invalid("reserved node tokens missing".into()));
        }
        if r.edge_subtypes.first().map(String::as_str) != Some(UNK_EDGE) {
            return Err(VocabularyError::Invalid("reserved edge subtype missing".into()));
        }
        let v = Vocabulary::from_parts(r.node_tokens, r.edge_subtypes, r.min_frequency);
        if v.node_index.len() != v.node_tokens.len() || v.edge_index.len() != v.edge_subtypes.len() {
            return Err(VocabularyError::Invalid("duplicate token".into()));
        }
        Ok(v)
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            node_tokens: v.node_tokens,
            edge_subtypes: v.edge_subtypes,
            min_frequency: v.min_frequency,
        }
    }
}

pub fn build_vocabulary<'a>(
    corpus: impl IntoIterator<Item = &'a Mrng>,
    min_frequency: usize,
) -> Result<Vocabulary, VocabularyError> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut graphs = 0;
    for g in corpus {
        graphs += 1;
        for f in &g.functions {
            for n in &f.nodes {
                *counts.entry(n.label.as_str()).or_default() += 1;
            }
        }
    }
    if graphs == 0 {
        return Err(VocabularyError::EmptyCorpus);
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(t, c)| c >= min_frequency && t != UNK && t != PAD)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let node_tokens = [UNK, PAD]
        .into_iter()
        .chain(kept.into_iter().map(|(t, _)| t))
        .map(str::to_string)
        .collect();
    let edge_subtypes = std::iter::once(UNK_EDGE).chain(all_subtypes()).map(str::to_string).collect();
    Ok(Vocabulary::from_parts(node_tokens, edge_subtypes, min_frequency))
}
