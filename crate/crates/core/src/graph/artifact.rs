//! Versioned JSON container for graph instances.
//!
//! The container stores params, backend and label key, plus the labelled
//! adjacency for explicit graphs. Loading rebuilds from the stored key and
//! rejects any file whose adjacency disagrees with the rebuild.

use super::{build_graph_with_label_key, Backend, GraphError, SunflowerGraph};
use crate::params::GraphParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const ARTIFACT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyEntry {
    pub label: u64,
    /// (neighbor label, multiplicity), ascending by label.
    pub neighbors: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphArtifact {
    pub schema_version: u32,
    pub params: GraphParams,
    pub backend: Backend,
    pub label_key: u64,
    pub label_bits: u32,
    pub s_label: u64,
    pub t_label: u64,
    pub adjacency: Option<Vec<AdjacencyEntry>>,
}

impl GraphArtifact {
    pub fn from_graph(g: &SunflowerGraph) -> Self {
        let adjacency = (g.backend() == Backend::Explicit).then(|| {
            (0..g.params().graph_vertices())
                .map(|v| {
                    let label = g.label_of(v);
                    AdjacencyEntry { label, neighbors: g.neighbor_labels(label) }
                })
                .collect()
        });
        GraphArtifact {
            schema_version: ARTIFACT_SCHEMA,
            params: *g.params(),
            backend: g.backend(),
            label_key: g.label_key(),
            label_bits: g.params().label_bits(),
            s_label: g.s_label(),
            t_label: g.t_label(),
            adjacency,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("artifact serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let a: GraphArtifact = serde_json::from_str(s).map_err(|e| GraphError::Format(e.to_string()))?;
        if a.schema_version != ARTIFACT_SCHEMA {
            return Err(GraphError::Format(format!("unsupported schema version {}", a.schema_version)));
        }
        Ok(a)
    }

    pub fn save(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rebuilds the graph and checks it against the stored fields.
    pub fn rebuild(&self) -> Result<SunflowerGraph, GraphError> {
        let g = build_graph_with_label_key(self.params, self.backend, self.label_key)?;
        let again = GraphArtifact::from_graph(&g);
        let mismatch = |what: &str| Err(GraphError::ArtifactMismatch(what.to_string()));
        if again.label_bits != self.label_bits {
            return mismatch("label width");
        }
        if (again.s_label, again.t_label) != (self.s_label, self.t_label) {
            return mismatch("s/t labels");
        }
        if again.adjacency != self.adjacency {
            return mismatch("adjacency");
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn round_trip_and_tamper_detection() {
        let p = GraphParams::new(3, 3, 4, 2, 8).unwrap();
        let g = build_graph(p, Backend::Explicit).unwrap();
        let a = GraphArtifact::from_graph(&g);
        let json = a.to_json();
        assert_eq!(json, GraphArtifact::from_graph(&build_graph(p, Backend::Explicit).unwrap()).to_json());
        let b = GraphArtifact::from_json(&json).unwrap();
        let h = b.rebuild().unwrap();
        assert_eq!(h.adjacency().unwrap(), g.adjacency().unwrap());
        let mut c = b.clone();
        c.adjacency.as_mut().unwrap()[0].neighbors[0].1 += 1;
        assert!(matches!(c.rebuild(), Err(GraphError::ArtifactMismatch(_))));
        let mut v = b;
        v.schema_version = 99;
        assert!(GraphArtifact::from_json(&serde_json::to_string(&v).unwrap()).is_err());
    }
}
