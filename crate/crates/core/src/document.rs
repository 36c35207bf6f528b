//! The cluster output document shared by the `cluster`, `render`, `label`
//! and `sql` commands.

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterId, ClusterParams, Clustering};
use crate::error::{Error, Result};
use crate::geometry::{cluster_shapes, color_clusters, to_data_space, ClusterShape, PolygonRing, Rect};
use crate::grid::Viewport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometrySpace {
    #[default]
    Data,
    Pixel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub bandwidth_px: f64,
    #[serde(flatten)]
    pub cluster: ClusterParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub y: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub id: ClusterId,
    /// Center of the peak pixel.
    pub peak: Peak,
    pub area_px: usize,
    pub outer: PolygonRing,
    pub holes: Vec<PolygonRing>,
    pub rects: Vec<Rect>,
    pub color: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Vec<(String, f64)>>,
}

impl ClusterRecord {
    pub fn shape(&self) -> ClusterShape {
        ClusterShape {
            cluster_id: self.id,
            outer: self.outer.clone(),
            holes: self.holes.clone(),
            rects: self.rects.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDocument {
    pub viewport: Viewport,
    pub params: RunParams,
    #[serde(default)]
    pub space: GeometrySpace,
    pub clusters: Vec<ClusterRecord>,
}

impl ClusterDocument {
    /// Traces, decomposes and colors every cluster of `clustering`.
    pub fn build(
        viewport: Viewport,
        params: RunParams,
        clustering: &Clustering,
        palette_size: usize,
        space: GeometrySpace,
    ) -> Result<Self> {
        let shapes = cluster_shapes(&clustering.map, params.cluster.connectivity)?;
        let coloring = color_clusters(&clustering.graph, palette_size);
        let clusters = shapes
            .into_iter()
            .map(|shape| {
                let node = clustering
                    .graph
                    .node(shape.cluster_id)
                    .ok_or(Error::ClusterNotFound(shape.cluster_id.0))?;
                let (cx, cy) = (node.peak.x as f64 + 0.5, node.peak.y as f64 + 0.5);
                let (shape, (px, py)) = match space {
                    GeometrySpace::Data => (to_data_space(&shape, &viewport), viewport.to_data(cx, cy)),
                    GeometrySpace::Pixel => (shape, (cx, cy)),
                };
                Ok(ClusterRecord {
                    id: shape.cluster_id,
                    peak: Peak {
                        x: px,
                        y: py,
                        density: node.peak_density,
                    },
                    area_px: node.area_px,
                    outer: shape.outer,
                    holes: shape.holes,
                    rects: shape.rects,
                    color: coloring.colors.get(&shape.cluster_id).copied().unwrap_or(0),
                    label: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            viewport,
            params,
            space,
            clusters,
        })
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&ClusterRecord> {
        self.clusters.iter().find(|c| c.id == id)
    }

    /// Cluster shapes in data space, converting pixel-space geometry.
    pub fn data_shapes(&self) -> Vec<ClusterShape> {
        self.clusters
            .iter()
            .map(|c| match self.space {
                GeometrySpace::Data => c.shape(),
                GeometrySpace::Pixel => to_data_space(&c.shape(), &self.viewport),
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let doc: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            Error::Format(format!("cluster JSON at `{}`: {}", e.path(), e.inner()))
        })?;
        doc.viewport.validate()?;
        Ok(doc)
    }
}
