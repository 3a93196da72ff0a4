//! Weighted, undirected character co-occurrence networks.
//!
//! A pair of characters gains one unit of weight per shared unit: a paragraph
//! for long-form text, a comment tree for threaded discussion. Repeated
//! mentions inside one unit do not add weight.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use crate::corpus::{detect_mentions, AliasTable, DocKind, Document};
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoocNetwork {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), u64>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CoocNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str) {
        self.nodes.insert(name.to_string());
    }

    /// Add `weight` to the edge between `a` and `b`, inserting both nodes.
    pub fn add_edge(&mut self, a: &str, b: &str, weight: u64) -> Result<()> {
        if a == b {
            return Err(Error::invalid(format!("self-loop on {a:?}")));
        }
        if weight == 0 {
            return Err(Error::invalid("edge weight must be positive"));
        }
        self.add_node(a);
        self.add_node(b);
        *self.edges.entry(ordered(a, b)).or_insert(0) += weight;
        Ok(())
    }

    /// Count one unit containing the given set of characters.
    pub fn add_unit<'a>(&mut self, present: impl IntoIterator<Item = &'a str>) {
        let names: BTreeSet<&str> = present.into_iter().collect();
        let names: Vec<&str> = names.into_iter().collect();
        for (i, a) in names.iter().enumerate() {
            self.add_node(a);
            for b in &names[i + 1..] {
                *self.edges.entry(ordered(a, b)).or_insert(0) += 1;
            }
        }
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(String, String), u64> {
        &self.edges
    }

    pub fn weight(&self, a: &str, b: &str) -> u64 {
        self.edges.get(&ordered(a, b)).copied().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    /// Writes `<prefix>_edges.csv` ("source,target,weight") and
    /// `<prefix>_nodes.csv` ("name").
    pub fn write_csv(&self, edges_path: impl AsRef<Path>, nodes_path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(edges_path)?;
        w.write_record(["source", "target", "weight"])?;
        for ((a, b), wt) in &self.edges {
            w.write_record([a.as_str(), b.as_str(), &wt.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("edge csv", e))?;
        let mut w = csv::Writer::from_path(nodes_path)?;
        w.write_record(["name"])?;
        for n in &self.nodes {
            w.write_record([n.as_str()])?;
        }
        w.flush().map_err(|e| Error::io("node csv", e))
    }

    pub fn read_csv(edges_path: impl AsRef<Path>, nodes_path: impl AsRef<Path>) -> Result<Self> {
        let mut net = CoocNetwork::new();
        let mut r = csv::Reader::from_path(nodes_path)?;
        crate::corpus::expect_header(&mut r, &["name"])?;
        for rec in r.records() {
            net.add_node(&rec?[0]);
        }
        let mut r = csv::Reader::from_path(edges_path)?;
        crate::corpus::expect_header(&mut r, &["source", "target", "weight"])?;
        for rec in r.records() {
            let rec = rec?;
            let w: u64 = rec[2]
                .parse()
                .map_err(|_| Error::invalid(format!("bad edge weight {:?}", &rec[2])))?;
            net.add_edge(&rec[0], &rec[1], w)?;
        }
        Ok(net)
    }
}

fn charset_mentions<'c>(
    text: &str,
    aliases: &AliasTable,
    charset: &'c HashSet<&str>,
) -> BTreeSet<&'c str> {
    detect_mentions(text, aliases)
        .into_iter()
        .filter_map(|m| charset.get(m.canonical.as_str()).copied())
        .collect()
}

/// Paragraph co-occurrence network for long-form documents.
pub fn build_longform_network(
    corpus: &[Document],
    charset: &[String],
    aliases: &AliasTable,
) -> Result<CoocNetwork> {
    let set: HashSet<&str> = charset.iter().map(String::as_str).collect();
    let mut net = CoocNetwork::new();
    for doc in corpus {
        if doc.kind != DocKind::Longform {
            return Err(Error::invalid(format!(
                "threaded document {:?} in long-form network input",
                doc.id
            )));
        }
        for para in doc.units() {
            net.add_unit(charset_mentions(para, aliases, &set));
        }
    }
    Ok(net)
}

/// Tree key for every threaded document: its `tree_id` plus the id of the
/// topmost ancestor reachable through present parents. A document whose
/// parent is missing roots its own subtree.
fn tree_keys(corpus: &[Document]) -> Result<Vec<(String, String)>> {
    let by_id: HashMap<&str, &Document> = corpus.iter().map(|d| (d.id.as_str(), d)).collect();
    let mut keys = Vec::with_capacity(corpus.len());
    for doc in corpus {
        let tree = doc.tree_id.clone().ok_or_else(|| {
            Error::invalid(format!("threaded document {:?} has no tree_id", doc.id))
        })?;
        let mut cur = doc;
        let mut seen = HashSet::new();
        seen.insert(cur.id.as_str());
        while let Some(parent) = cur.parent_id.as_deref().and_then(|p| by_id.get(p)) {
            if parent.tree_id != doc.tree_id || !seen.insert(parent.id.as_str()) {
                break;
            }
            cur = parent;
        }
        keys.push((tree, cur.id.clone()));
    }
    Ok(keys)
}

/// Comment-tree co-occurrence network for threaded documents.
pub fn build_threaded_network(
    corpus: &[Document],
    charset: &[String],
    aliases: &AliasTable,
) -> Result<CoocNetwork> {
    if let Some(d) = corpus.iter().find(|d| d.kind != DocKind::Threaded) {
        return Err(Error::invalid(format!(
            "long-form document {:?} in threaded network input",
            d.id
        )));
    }
    let set: HashSet<&str> = charset.iter().map(String::as_str).collect();
    let keys = tree_keys(corpus)?;
    let mut trees: BTreeMap<(String, String), BTreeSet<&str>> = BTreeMap::new();
    for (doc, key) in corpus.iter().zip(keys) {
        trees
            .entry(key)
            .or_default()
            .extend(charset_mentions(&doc.text, aliases, &set));
    }
    let mut net = CoocNetwork::new();
    for present in trees.into_values() {
        net.add_unit(present);
    }
    Ok(net)
}

/// Build whichever network matches the corpus kind.
pub fn build_network(corpus: &[Document], charset: &[String], aliases: &AliasTable) -> Result<CoocNetwork> {
    match corpus.first().map(|d| d.kind) {
        Some(DocKind::Threaded) => build_threaded_network(corpus, charset, aliases),
        _ => build_longform_network(corpus, charset, aliases),
    }
}

/// Node union with summed edge weights.
pub fn merge_networks(nets: &[CoocNetwork]) -> CoocNetwork {
    let mut out = CoocNetwork::new();
    for net in nets {
        out.nodes.extend(net.nodes.iter().cloned());
        for (pair, w) in &net.edges {
            *out.edges.entry(pair.clone()).or_insert(0) += w;
        }
    }
    out
}
