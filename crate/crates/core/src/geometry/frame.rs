use std::collections::VecDeque;

use nalgebra::{Point2, Rotation2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::{MaterialModel, SectionProperties};

/// Role of a member in the finger layout. Used for export and diagnostics only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Wall,
    Rib,
    Tip,
    Link,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub node_i: usize,
    pub node_j: usize,
    pub section: SectionProperties,
    /// Index into [`PlanarFrame::materials`].
    pub material: usize,
    pub kind: MemberKind,
}

/// A support node. Finger bases use fully fixed supports; `fix_rotation = false`
/// gives a pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub node: usize,
    pub fix_rotation: bool,
}

impl Support {
    pub fn fixed(node: usize) -> Support {
        Support {
            node,
            fix_rotation: true,
        }
    }

    pub fn pinned(node: usize) -> Support {
        Support {
            node,
            fix_rotation: false,
        }
    }
}

/// Node/element graph of planar Euler-Bernoulli beams in the (y, z) plane.
///
/// Point components are `[y, z]` in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarFrame {
    pub nodes: Vec<Point2<f64>>,
    pub elements: Vec<Element>,
    pub materials: Vec<MaterialModel>,
    pub supports: Vec<Support>,
    pub tip_node: usize,
}

impl PlanarFrame {
    pub fn element_length(&self, e: &Element) -> f64 {
        (self.nodes[e.node_j] - self.nodes[e.node_i]).norm()
    }

    pub fn min_element_length(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| self.element_length(e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_support(&self, node: usize) -> bool {
        self.supports.iter().any(|s| s.node == node)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.supports.is_empty() {
            return Err(Error::Invalid("frame has no support node".into()));
        }
        if self.tip_node >= n {
            return Err(Error::Invalid(format!("tip node {} out of range", self.tip_node)));
        }
        for s in &self.supports {
            if s.node >= n {
                return Err(Error::Invalid(format!("support node {} out of range", s.node)));
            }
        }
        for (k, e) in self.elements.iter().enumerate() {
            if e.node_i >= n || e.node_j >= n || e.node_i == e.node_j {
                return Err(Error::Invalid(format!("element {k} has invalid node indices")));
            }
            if e.material >= self.materials.len() {
                return Err(Error::Invalid(format!("element {k} references missing material")));
            }
            if self.element_length(e) <= 1e-9 {
                return Err(Error::Invalid(format!("element {k} has zero length")));
            }
            if !(e.section.area > 0.0 && e.section.second_moment > 0.0) {
                return Err(Error::Invalid(format!("element {k} has a degenerate section")));
            }
        }
        for m in &self.materials {
            m.validate()?;
        }
        if !self.reachable_from_supports()[self.tip_node] {
            return Err(Error::Invalid("tip node is not connected to a support".into()));
        }
        Ok(())
    }

    /// Breadth-first reachability over the element graph, seeded at the supports.
    pub fn reachable_from_supports(&self) -> Vec<bool> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: VecDeque<usize> = self.supports.iter().map(|s| s.node).collect();
        for &s in &queue {
            seen[s] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.elements {
            adj[e.node_i].push(e.node_j);
            adj[e.node_j].push(e.node_i);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Rigid rotation of all nodes about `pivot` by `angle` radians.
    pub fn rotated(&self, angle: f64, pivot: Point2<f64>) -> PlanarFrame {
        let rot = Rotation2::new(angle);
        let nodes = self.nodes.iter().map(|p| pivot + rot * (p - pivot)).collect();
        PlanarFrame { nodes, ..self.clone() }
    }

    pub fn translated(&self, offset: Vector2<f64>) -> PlanarFrame {
        PlanarFrame {
            nodes: self.nodes.iter().map(|p| p + offset).collect(),
            ..self.clone()
        }
    }

    /// Copy with every material modulus multiplied by `factor`.
    pub fn with_modulus_factor(&self, factor: f64) -> PlanarFrame {
        let mut out = self.clone();
        for m in &mut out.materials {
            m.youngs_modulus *= factor;
        }
        out
    }
}
