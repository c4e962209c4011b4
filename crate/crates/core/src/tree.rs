//! Cone-type tree specifications, vertex addressing and edge-type models.
//!
//! A [`TreeSpec`] is a finite automaton describing a rooted, locally finite
//! tree together with nearest-neighbour transition probabilities.  Every
//! vertex carries a type; the children of a vertex of type `t` are given by
//! the ordered slots of `t`, and the probability of stepping back to the
//! parent depends only on the type of the vertex the walker stands on.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for stochasticity checks.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// One child slot of a type: the child's type and the downward step probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub child_type: String,
    pub down_prob: f64,
}

/// Per-type data: the upward step probability and the ordered child slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeRecord {
    pub up_prob: f64,
    pub slots: Vec<SlotRecord>,
}

#[derive(Clone, Debug)]
pub(crate) struct ResolvedSlot {
    pub child: usize,
    pub down_prob: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct ResolvedType {
    pub up_prob: f64,
    pub slots: Vec<ResolvedSlot>,
}

/// A cone-type tree specification with resolved type indices.
///
/// Immutable after construction; all operations on it are pure.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TreeSpecJson", into = "TreeSpecJson")]
pub struct TreeSpec {
    names: Vec<String>,
    records: Vec<ResolvedType>,
    root: usize,
}

/// Wire format: `{"root_type": str, "types": {name: {"up_prob": f, "slots": [...]}}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeSpecJson {
    pub root_type: String,
    pub types: BTreeMap<String, TypeRecord>,
}

impl TryFrom<TreeSpecJson> for TreeSpec {
    type Error = Error;

    fn try_from(json: TreeSpecJson) -> Result<Self> {
        TreeSpec::new(&json.root_type, json.types)
    }
}

impl From<TreeSpec> for TreeSpecJson {
    fn from(spec: TreeSpec) -> Self {
        let mut types = BTreeMap::new();
        for (idx, name) in spec.names.iter().enumerate() {
            let rec = &spec.records[idx];
            types.insert(
                name.clone(),
                TypeRecord {
                    up_prob: rec.up_prob,
                    slots: rec
                        .slots
                        .iter()
                        .map(|s| SlotRecord {
                            child_type: spec.names[s.child].clone(),
                            down_prob: s.down_prob,
                        })
                        .collect(),
                },
            );
        }
        TreeSpecJson {
            root_type: spec.names[spec.root].clone(),
            types,
        }
    }
}

impl TreeSpec {
    /// Builds a spec, resolving type names to indices.
    ///
    /// Only structural problems (unknown names) are errors here; numeric
    /// invariants are reported by [`TreeSpec::validate`].
    pub fn new(root_type: &str, types: BTreeMap<String, TypeRecord>) -> Result<Self> {
        let names: Vec<String> = types.keys().cloned().collect();
        let index: BTreeMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let root = *index
            .get(root_type)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown root type {root_type:?}")))?;
        let mut records = Vec::with_capacity(names.len());
        for name in &names {
            let rec = &types[name];
            let mut slots = Vec::with_capacity(rec.slots.len());
            for slot in &rec.slots {
                let child = *index.get(slot.child_type.as_str()).ok_or_else(|| {
                    Error::InvalidSpec(format!(
                        "type {name:?} references unknown child type {:?}",
                        slot.child_type
                    ))
                })?;
                slots.push(ResolvedSlot {
                    child,
                    down_prob: slot.down_prob,
                });
            }
            records.push(ResolvedType {
                up_prob: rec.up_prob,
                slots,
            });
        }
        Ok(TreeSpec {
            names,
            records,
            root,
        })
    }

    /// Simple random walk on the homogeneous tree `T_q` (branching number `q`,
    /// every vertex of degree `q + 1`, all step probabilities `1/(q+1)`).
    pub fn homogeneous_srw(q: u32) -> TreeSpec {
        assert!(q >= 1, "homogeneous tree needs q >= 1");
        let p = 1.0 / f64::from(q + 1);
        let slot = |n: u32| -> Vec<SlotRecord> {
            (0..n)
                .map(|_| SlotRecord {
                    child_type: "a".into(),
                    down_prob: p,
                })
                .collect()
        };
        let mut types = BTreeMap::new();
        types.insert(
            "root".to_string(),
            TypeRecord {
                up_prob: 0.0,
                slots: slot(q + 1),
            },
        );
        types.insert(
            "a".to_string(),
            TypeRecord {
                up_prob: p,
                slots: slot(q),
            },
        );
        TreeSpec::new("root", types).expect("homogeneous spec is structurally valid")
    }

    pub fn from_json(text: &str) -> Result<TreeSpec> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }

    pub fn num_types(&self) -> usize {
        self.names.len()
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn type_name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn up_prob(&self, idx: usize) -> f64 {
        self.records[idx].up_prob
    }

    pub fn num_slots(&self, idx: usize) -> usize {
        self.records[idx].slots.len()
    }

    pub fn slot(&self, idx: usize, slot: usize) -> (usize, f64) {
        let s = &self.records[idx].slots[slot];
        (s.child, s.down_prob)
    }

    /// Type index of the vertex addressed by `path`.
    pub fn type_of(&self, path: &VertexPath) -> Result<usize> {
        let mut t = self.root;
        for (depth, &slot) in path.slots().iter().enumerate() {
            let rec = &self.records[t];
            let slot = slot as usize;
            if slot >= rec.slots.len() {
                return Err(Error::InvalidPath {
                    path: path.clone(),
                    reason: format!(
                        "slot {slot} out of range for type {:?} at depth {depth}",
                        self.names[t]
                    ),
                });
            }
            t = rec.slots[slot].child;
        }
        Ok(t)
    }

    /// Degree of the vertex addressed by `path` (parent edge plus slots).
    pub fn degree(&self, path: &VertexPath) -> Result<usize> {
        let t = self.type_of(path)?;
        let parent = usize::from(!path.is_root());
        Ok(parent + self.records[t].slots.len())
    }

    /// Checks every TreeSpec invariant and returns the list of violations.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let root_name = &self.names[self.root];
        for (idx, rec) in self.records.iter().enumerate() {
            for slot in &rec.slots {
                if slot.child == self.root {
                    report.push(format!(
                        "root type {root_name:?} appears as a child of type {:?}",
                        self.names[idx]
                    ));
                }
            }
        }
        let root_rec = &self.records[self.root];
        if root_rec.up_prob != 0.0 {
            report.push(format!(
                "root type {root_name:?} must have up_prob 0, found {}",
                root_rec.up_prob
            ));
        }
        let root_sum: f64 = root_rec.slots.iter().map(|s| s.down_prob).sum();
        if (root_sum - 1.0).abs() > STOCHASTIC_TOL {
            report.push(format!(
                "root row sum != 1: sum of down probabilities is {root_sum}"
            ));
        }
        for (idx, rec) in self.records.iter().enumerate() {
            let name = &self.names[idx];
            if rec.slots.is_empty() {
                report.push(format!("type {name:?} has no slots (leaf vertices forbidden)"));
            }
            for (s, slot) in rec.slots.iter().enumerate() {
                if slot.down_prob <= 0.0 || slot.down_prob > 1.0 {
                    report.push(format!(
                        "type {name:?} slot {s} has down_prob {} outside (0, 1]",
                        slot.down_prob
                    ));
                }
            }
            if idx == self.root {
                continue;
            }
            if rec.up_prob <= 0.0 || rec.up_prob >= 1.0 {
                report.push(format!(
                    "type {name:?} has up_prob {} outside (0, 1)",
                    rec.up_prob
                ));
            }
            let sum: f64 = rec.up_prob + rec.slots.iter().map(|s| s.down_prob).sum::<f64>();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                report.push(format!("type {name:?} row sum != 1: found {sum}"));
            }
        }
        report
    }

    /// The reversing measure `m` with `m(o) = 1`: the product of
    /// `p(x_{i-1}, x_i) / p(x_i, x_{i-1})` along the geodesic from the root.
    pub fn reversing_measure(&self, path: &VertexPath) -> Result<f64> {
        let mut m = 1.0;
        let mut t = self.root;
        for &slot in path.slots() {
            let rec = &self.records[t];
            let slot = slot as usize;
            if slot >= rec.slots.len() {
                return Err(Error::InvalidPath {
                    path: path.clone(),
                    reason: format!("slot {slot} out of range"),
                });
            }
            let child = rec.slots[slot].child;
            m *= rec.slots[slot].down_prob / self.records[child].up_prob;
            t = child;
        }
        Ok(m)
    }

    /// Transition probability `p(x, y)` for neighbours, 0 otherwise.
    pub fn step_prob(&self, x: &VertexPath, y: &VertexPath) -> Result<f64> {
        if let Some(parent) = y.parent() {
            if parent == *x {
                let tx = self.type_of(x)?;
                let slot = *y.slots().last().expect("y is not the root") as usize;
                if slot >= self.records[tx].slots.len() {
                    return Err(Error::InvalidPath {
                        path: y.clone(),
                        reason: format!("slot {slot} out of range"),
                    });
                }
                return Ok(self.records[tx].slots[slot].down_prob);
            }
        }
        if let Some(parent) = x.parent() {
            if parent == *y {
                let tx = self.type_of(x)?;
                return Ok(self.records[tx].up_prob);
            }
        }
        Ok(0.0)
    }

    /// All vertices of depth at most `depth`, in breadth-first order.
    pub fn vertices_to_depth(&self, depth: usize) -> Vec<VertexPath> {
        let mut out = vec![VertexPath::root()];
        let mut frontier = vec![(VertexPath::root(), self.root)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (path, t) in &frontier {
                for (slot, s) in self.records[*t].slots.iter().enumerate() {
                    let child = path.child(slot as u32);
                    out.push(child.clone());
                    next.push((child, s.child));
                }
            }
            frontier = next;
        }
        out
    }
}

/// Address of a vertex: the slot indices taken from the root.  The empty
/// path is the root `o`.  The same value names the boundary arc `∂T_x`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexPath(Vec<u32>);

impl VertexPath {
    pub fn root() -> VertexPath {
        VertexPath(Vec::new())
    }

    pub fn from_slots(slots: Vec<u32>) -> VertexPath {
        VertexPath(slots)
    }

    pub fn slots(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<VertexPath> {
        if self.0.is_empty() {
            None
        } else {
            Some(VertexPath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, slot: u32) -> VertexPath {
        let mut slots = self.0.clone();
        slots.push(slot);
        VertexPath(slots)
    }

    pub fn is_prefix_of(&self, other: &VertexPath) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn is_strict_prefix_of(&self, other: &VertexPath) -> bool {
        other.0.len() > self.0.len() && self.is_prefix_of(other)
    }

    /// Longest common prefix: the confluent `x ∧ y` with respect to the root.
    pub fn confluent(&self, other: &VertexPath) -> VertexPath {
        let shared = self
            .0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count();
        VertexPath(self.0[..shared].to_vec())
    }

    /// Tree distance `d(x, y) = |x| + |y| - 2 |x ∧ y|`.
    pub fn distance(&self, other: &VertexPath) -> usize {
        let c = self.confluent(other);
        self.depth() + other.depth() - 2 * c.depth()
    }

    /// The unique shortest path from `self` to `other`, inclusive.
    pub fn geodesic(&self, other: &VertexPath) -> Vec<VertexPath> {
        let c = self.confluent(other);
        let mut out = Vec::with_capacity(self.distance(other) + 1);
        let mut cur = self.clone();
        while cur.depth() > c.depth() {
            out.push(cur.clone());
            cur = cur.parent().expect("above confluent");
        }
        out.push(c.clone());
        for i in c.depth()..other.depth() {
            out.push(VertexPath(other.0[..=i].to_vec()));
        }
        out
    }

    /// All ancestors from the root to `self`, inclusive (`|self| + 1` entries).
    pub fn ancestors(&self) -> Vec<VertexPath> {
        (0..=self.0.len())
            .map(|i| VertexPath(self.0[..i].to_vec()))
            .collect()
    }
}

impl fmt::Display for VertexPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for VertexPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<VertexPath> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        if body.trim().is_empty() {
            return Ok(VertexPath::root());
        }
        let slots = body
            .split(',')
            .map(|part| {
                part.trim().parse::<u32>().map_err(|e| Error::InvalidPath {
                    path: VertexPath::root(),
                    reason: format!("cannot parse {part:?}: {e}"),
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        Ok(VertexPath(slots))
    }
}

/// One orbit of oriented edges in a vertex-transitive model: the reverse
/// orbit label, the number of such edges at each vertex, and the step
/// probability along them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeClass {
    pub inverse: i32,
    pub degree: u32,
    pub prob: f64,
}

/// Edge-type model of a random walk invariant under a transitive group
/// action: labels `j` with an involution `j -> -j`, degrees `d_j` and
/// probabilities `p_j` with `sum d_j p_j = 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeTypeModel {
    pub classes: BTreeMap<i32, EdgeClass>,
}

impl EdgeTypeModel {
    pub fn new(classes: BTreeMap<i32, EdgeClass>) -> Result<EdgeTypeModel> {
        let model = EdgeTypeModel { classes };
        for (&j, class) in &model.classes {
            let inv = model
                .classes
                .get(&class.inverse)
                .ok_or_else(|| Error::DegenerateModel(format!("inverse of {j} missing")))?;
            if inv.inverse != j {
                return Err(Error::DegenerateModel(format!(
                    "involution is not self-inverse at {j}"
                )));
            }
        }
        Ok(model)
    }

    pub fn from_json(text: &str) -> Result<EdgeTypeModel> {
        let model: EdgeTypeModel =
            serde_json::from_str(text).map_err(|e| Error::DegenerateModel(e.to_string()))?;
        EdgeTypeModel::new(model.classes)
    }

    pub fn total_degree(&self) -> u64 {
        self.classes.values().map(|c| u64::from(c.degree)).sum()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let sum: f64 = self
            .classes
            .values()
            .map(|c| f64::from(c.degree) * c.prob)
            .sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            report.push(format!("sum of d_j p_j != 1: found {sum}"));
        }
        if self.total_degree() < 3 {
            report.push(format!(
                "total degree {} is below 3; the walk need not be rho-transient",
                self.total_degree()
            ));
        }
        for (&j, class) in &self.classes {
            if class.degree == 0 {
                report.push(format!("class {j} has degree 0"));
            }
            if class.prob <= 0.0 || class.prob >= 1.0 {
                report.push(format!("class {j} has probability {} outside (0,1)", class.prob));
            }
        }
        report
    }

    /// Unfolds the model into a cone-type spec of the transitive edge-typed
    /// tree: every vertex has `d_j` outgoing edges of each class `j`.
    pub fn to_tree_spec(&self) -> Result<TreeSpec> {
        if self.total_degree() < 3 {
            return Err(Error::DegenerateModel(format!(
                "total degree {} < 3",
                self.total_degree()
            )));
        }
        let report = self.validate();
        if !report.is_empty() {
            return Err(Error::DegenerateModel(report.join("; ")));
        }
        let type_name = |j: i32| format!("via_{j}");
        let mut types = BTreeMap::new();
        let root_slots: Vec<SlotRecord> = self
            .classes
            .iter()
            .flat_map(|(&j, class)| {
                std::iter::repeat_with(move || SlotRecord {
                    child_type: type_name(j),
                    down_prob: class.prob,
                })
                .take(class.degree as usize)
            })
            .collect();
        types.insert(
            "origin".to_string(),
            TypeRecord {
                up_prob: 0.0,
                slots: root_slots,
            },
        );
        for (&j, class) in &self.classes {
            // A vertex entered via j spends one of its outgoing -j edges on
            // the parent.
            let back = class.inverse;
            let slots: Vec<SlotRecord> = self
                .classes
                .iter()
                .flat_map(|(&j2, class2)| {
                    let count = class2.degree as usize - usize::from(j2 == back);
                    std::iter::repeat_with(move || SlotRecord {
                        child_type: type_name(j2),
                        down_prob: class2.prob,
                    })
                    .take(count)
                })
                .collect();
            types.insert(
                type_name(j),
                TypeRecord {
                    up_prob: self.classes[&back].prob,
                    slots,
                },
            );
        }
        TreeSpec::new("origin", types)
    }
}
