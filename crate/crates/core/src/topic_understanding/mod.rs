//! Topic understanding: expand a topic word into related words, then group
//! those words into arguments.

mod affinity;
mod kmeans;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, sort_scored, EmbeddingTable};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::thesaurus::{ThesExpansionConfig, Thesaurus};
use crate::topic_model::LdaModel;

pub use affinity::{
    affinity_propagation, affinity_propagation_prepared, assign_to_exemplars, median_off_diagonal,
    prepare_similarity, AffinityResult, Preference, CONVERGENCE_ITERATIONS,
};
pub use kmeans::{kmeans, KMeansResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionBackend {
    Thes,
    Tm,
    We,
}

impl ExpansionBackend {
    pub fn name(self) -> &'static str {
        match self {
            ExpansionBackend::Thes => "thes",
            ExpansionBackend::Tm => "tm",
            ExpansionBackend::We => "we",
        }
    }
}

impl std::str::FromStr for ExpansionBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thes" => Ok(ExpansionBackend::Thes),
            "tm" => Ok(ExpansionBackend::Tm),
            "we" => Ok(ExpansionBackend::We),
            _ => Err(Error::Config(format!("unknown expansion backend {s:?} (thes, tm, we)"))),
        }
    }
}

/// Vector space used to cluster words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Tm,
    We,
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tm" => Ok(Representation::Tm),
            "we" => Ok(Representation::We),
            _ => Err(Error::Config(format!("unknown word representation {s:?} (tm, we)"))),
        }
    }
}

/// Lexical resources the expansion and clustering backends draw on.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordResources<'a> {
    pub thesaurus: Option<&'a Thesaurus>,
    pub thes_config: Option<&'a ThesExpansionConfig>,
    pub lda: Option<&'a LdaModel>,
    pub embeddings: Option<&'a EmbeddingTable>,
}

fn missing(what: &str) -> Error {
    Error::Config(format!("{what} resource is not loaded"))
}

/// One cluster of supporting words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Argument {
    pub id: usize,
    pub supporting_words: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centroid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterAlgorithm {
    Kmeans,
    AffinityPropagation,
}

impl std::str::FromStr for ClusterAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(ClusterAlgorithm::Kmeans),
            "ap" | "affinity_propagation" => Ok(ClusterAlgorithm::AffinityPropagation),
            _ => Err(Error::Config(format!("unknown cluster algorithm {s:?} (kmeans, ap)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub algorithm: ClusterAlgorithm,
    /// Number of K-Means clusters.
    pub k: usize,
    pub max_iterations: usize,
    /// AP damping in (0, 1).
    pub damping: f64,
    pub preference: Preference,
    pub min_cluster_size: usize,
    pub seed: u64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            algorithm: ClusterAlgorithm::Kmeans,
            k: 3,
            max_iterations: 200,
            damping: 0.9,
            preference: Preference::Median,
            min_cluster_size: 3,
            seed: 1,
        }
    }
}

/// Up to `k` words related to `topic`, best first; never contains `topic`.
///
/// The `tm` backend ranks words by cosine between topic-distribution vectors.
pub fn expand_topic(
    topic: &str,
    backend: ExpansionBackend,
    resources: &WordResources<'_>,
    k: usize,
) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::InvalidArgument("expansion must keep at least one word (k >= 1)".into()));
    }
    let wrap = |e: Error| Error::Expansion {
        backend: backend.name(),
        source: Box::new(e),
    };
    let mut out = match backend {
        ExpansionBackend::Thes => {
            let thesaurus = resources.thesaurus.ok_or_else(|| missing("thesaurus"))?;
            let default = ThesExpansionConfig::default();
            let cfg = resources.thes_config.unwrap_or(&default);
            thesaurus
                .expand(topic, cfg)
                .map_err(wrap)?
                .into_iter()
                .map(|(w, s)| (w, s as f64))
                .collect()
        }
        ExpansionBackend::We => {
            let table = resources.embeddings.ok_or_else(|| missing("embedding"))?;
            table.nearest_neighbors(topic, k).map_err(wrap)?
        }
        ExpansionBackend::Tm => {
            let lda = resources.lda.ok_or_else(|| missing("topic model"))?;
            let query = lda.topic_vector(topic).map_err(wrap)?;
            let mut scored = Vec::with_capacity(lda.vocabulary().len());
            for w in lda.vocabulary() {
                if w != topic {
                    scored.push((w.clone(), cosine(&query, &lda.topic_vector(w)?)?));
                }
            }
            sort_scored(&mut scored);
            scored
        }
    };
    out.retain(|(w, _)| w != topic);
    out.truncate(k);
    Ok(out)
}

/// Result of [`cluster_arguments_detailed`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterOutcome {
    pub arguments: Vec<Argument>,
    /// Words without a vector in the chosen representation.
    pub out_of_vocabulary: Vec<String>,
    /// Clusters removed for having fewer than `min_cluster_size` words.
    pub dropped_clusters: usize,
}

fn represent(word: &str, representation: Representation, resources: &WordResources<'_>) -> Result<Option<Vec<f64>>> {
    match representation {
        Representation::We => {
            let table = resources.embeddings.ok_or_else(|| missing("embedding"))?;
            Ok(table.get(word).map(<[f64]>::to_vec))
        }
        Representation::Tm => {
            let lda = resources.lda.ok_or_else(|| missing("topic model"))?;
            Ok(lda.topic_vector(word).ok())
        }
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    if n > 0.0 {
        v.into_iter().map(|x| x / n).collect()
    } else {
        v
    }
}

/// Groups `words` into arguments, keeping the words' input order inside each argument.
///
/// Vectors are L2-normalized before clustering. Arguments come back ordered by
/// size descending, then by their smallest word; ids follow that order.
pub fn cluster_arguments_detailed(
    words: &[String],
    representation: Representation,
    config: &ClusterConfig,
    resources: &WordResources<'_>,
) -> Result<ClusterOutcome> {
    let mut seen = HashSet::new();
    let mut kept: Vec<&str> = Vec::new();
    let mut vectors = Vec::new();
    let mut oov = Vec::new();
    for w in words {
        if !seen.insert(w.as_str()) {
            continue;
        }
        match represent(w, representation, resources)? {
            Some(v) if norm(&v) > 0.0 => {
                kept.push(w);
                vectors.push(unit(v));
            }
            _ => oov.push(w.clone()),
        }
    }
    if kept.is_empty() {
        return Err(Error::AllOutOfVocabulary(words.to_vec()));
    }
    if !oov.is_empty() {
        log::warn!("{} word(s) have no vector and were dropped before clustering", oov.len());
    }

    let groups: Vec<(Vec<usize>, Vec<f64>)> = match config.algorithm {
        ClusterAlgorithm::Kmeans => {
            if config.k == 0 {
                return Err(Error::InvalidArgument("k-means k must be at least 1".into()));
            }
            let k = config.k.min(kept.len());
            if k < config.k {
                log::warn!("only {} words to cluster; using k = {k}", kept.len());
            }
            let r = kmeans(&vectors, k, config.max_iterations, config.seed)?;
            r.clusters.into_iter().zip(r.centroids).collect()
        }
        ClusterAlgorithm::AffinityPropagation => {
            let sim = vectors
                .iter()
                .map(|a| vectors.iter().map(|b| cosine(a, b)).collect::<Result<Vec<f64>>>())
                .collect::<Result<Vec<_>>>()?;
            let r = affinity_propagation(&sim, config.damping, config.max_iterations, config.preference, config.seed)?;
            if !r.converged {
                log::warn!("affinity propagation did not converge in {} iterations", r.iterations);
            }
            r.exemplars
                .iter()
                .map(|&e| {
                    let members = (0..kept.len()).filter(|&i| r.assignments[i] == e).collect();
                    (members, vectors[e].clone())
                })
                .collect()
        }
    };

    let before = groups.len();
    let mut clusters: Vec<(Vec<String>, Vec<f64>)> = groups
        .into_iter()
        .filter(|(members, _)| !members.is_empty() && members.len() >= config.min_cluster_size)
        .map(|(members, c)| (members.into_iter().map(|i| kept[i].to_owned()).collect(), c))
        .collect();
    let dropped = before - clusters.len();
    clusters.sort_by(|(a, _), (b, _)| {
        b.len()
            .cmp(&a.len())
            .then_with(|| a.iter().min().cmp(&b.iter().min()))
    });
    let arguments = clusters
        .into_iter()
        .enumerate()
        .map(|(id, (supporting_words, centroid))| Argument {
            id,
            supporting_words,
            centroid: Some(centroid),
        })
        .collect();
    Ok(ClusterOutcome {
        arguments,
        out_of_vocabulary: oov,
        dropped_clusters: dropped,
    })
}

/// Groups `words` into arguments. See [`cluster_arguments_detailed`].
pub fn cluster_arguments(
    words: &[String],
    representation: Representation,
    config: &ClusterConfig,
    resources: &WordResources<'_>,
) -> Result<Vec<Argument>> {
    cluster_arguments_detailed(words, representation, config, resources).map(|o| o.arguments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> EmbeddingTable {
        EmbeddingTable::from_pairs([
            ("a", vec![1.0, 0.0]),
            ("b", vec![0.9, 0.1]),
            ("c", vec![0.0, 1.0]),
        ])
        .unwrap()
    }

    fn strings(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn we_expansion_ranks_by_cosine() {
        let t = abc();
        let res = WordResources { embeddings: Some(&t), ..Default::default() };
        let out = expand_topic("a", ExpansionBackend::We, &res, 2).unwrap();
        let words: Vec<_> = out.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(words, ["b", "c"]);
    }

    #[test]
    fn zero_k_rejected() {
        let t = abc();
        let res = WordResources { embeddings: Some(&t), ..Default::default() };
        assert!(expand_topic("a", ExpansionBackend::We, &res, 0).is_err());
    }

    #[test]
    fn unknown_topic_names_backend() {
        let t = abc();
        let res = WordResources { embeddings: Some(&t), ..Default::default() };
        let err = expand_topic("zz", ExpansionBackend::We, &res, 2).unwrap_err();
        assert!(err.to_string().starts_with("we expansion failed"), "{err}");
    }

    #[test]
    fn thes_backend_delegates() {
        let th = Thesaurus::read_tsv("happy\tsyn\tglad\nhappy\tant\tsad\nsad\tant\tjoyful\n".as_bytes()).unwrap();
        let cfg = ThesExpansionConfig::default();
        let res = WordResources { thesaurus: Some(&th), thes_config: Some(&cfg), ..Default::default() };
        let out = expand_topic("happy", ExpansionBackend::Thes, &res, 10).unwrap();
        let direct: Vec<(String, f64)> = th.expand("happy", &cfg).unwrap().into_iter().map(|(w, s)| (w, s as f64)).collect();
        assert_eq!(out, direct);
        assert_eq!(expand_topic("happy", ExpansionBackend::Thes, &res, 1).unwrap().len(), 1);
    }

    #[test]
    fn tm_backend_excludes_topic() {
        use crate::corpus::{Corpus, Document};
        use crate::topic_model::LdaConfig;
        let c = Corpus::new(vec![
            Document::from_texts("a", &["x y x y"]).unwrap(),
            Document::from_texts("b", &["p q p q"]).unwrap(),
        ])
        .unwrap();
        let m = LdaModel::train(&c, &LdaConfig { alpha: 0.1, iterations: 50, ..LdaConfig::with_topics(2) }).unwrap();
        let res = WordResources { lda: Some(&m), ..Default::default() };
        let out = expand_topic("x", ExpansionBackend::Tm, &res, 10).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|(w, _)| w != "x"));
    }

    fn groups_table() -> EmbeddingTable {
        EmbeddingTable::from_pairs([
            ("w1", vec![1.0, 0.0]),
            ("w2", vec![0.99, 0.05]),
            ("w3", vec![0.0, 1.0]),
            ("w4", vec![0.05, 0.99]),
            ("w5", vec![0.97, 0.02]),
        ])
        .unwrap()
    }

    #[test]
    fn kmeans_arguments_follow_groups() {
        let t = groups_table();
        let res = WordResources { embeddings: Some(&t), ..Default::default() };
        let cfg = ClusterConfig { k: 2, min_cluster_size: 1, ..Default::default() };
        let args = cluster_arguments(&strings(&["w1", "w2", "w3", "w4"]), Representation::We, &cfg, &res).unwrap();
        assert_eq!(args.len(), 2);
        assert_eq!(args[0].supporting_words, ["w1", "w2"]);
        assert_eq!(args[1].supporting_words, ["w3", "w4"]);
        assert_eq!((args[0].id, args[1].id), (0, 1));
    }

    #[test]
    fn small_clusters_dropped() {
        let t = groups_table();
        let res = WordResources { embeddings: Some(&t), ..Default::default() };
        let words = strings(&["w1", "w2", "w3", "w4", "w5"]);
        let cfg = ClusterConfig { k: 2, min_cluster_size: 3, ..Default::default() };
        let out = cluster_arguments_detailed(&words, Representation::We, &cfg, &res).unwrap();
        assert_eq!(out.dropped_clusters, 1);
        assert_eq!(out.arguments.len(), 1);
        assert_eq!(out.arguments[0].supporting_words, ["w1", "w2", "w5"]);

        let ap = ClusterConfig { algorithm: ClusterAlgorithm::AffinityPropagation, min_cluster_size: 3, ..Default::default() };
        let out = cluster_arguments_detailed(&words, Representation::We, &ap, &res).unwrap();
        assert!(out.arguments.iter().all(|a| a.supporting_words.len() >= 3));
        let keep_all = ClusterConfig { min_cluster_size: 1, ..ap };
        let all = cluster_arguments_detailed(&words, Representation::We, &keep_all, &res).unwrap();
        assert_eq!(all.dropped_clusters, 0);
        assert_eq!(all.arguments.iter().map(|a| a.supporting_words.len()).sum::<usize>(), 5);
    }

    #[test]
    fn oov_words_dropped_or_error() {
        let t = groups_table();
        let res = WordResources { embeddings: Some(&t), ..Default::default() };
        let cfg = ClusterConfig { k: 1, min_cluster_size: 1, ..Default::default() };
        let out = cluster_arguments_detailed(&strings(&["w1", "zz"]), Representation::We, &cfg, &res).unwrap();
        assert_eq!(out.out_of_vocabulary, ["zz"]);
        assert!(cluster_arguments(&strings(&["zz"]), Representation::We, &cfg, &res).is_err());
    }
}
