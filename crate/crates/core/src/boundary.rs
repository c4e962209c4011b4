//! Finitely additive distributions on boundary arcs, locally constant
//! integration, the Poisson transform and distribution recovery.
//!
//! A distribution is carried on a finite rooted subtree; its value at a
//! carrier node is the mass of the boundary arc below that vertex.  Below
//! the carrier the mass refines uniformly among children, which keeps the
//! child-sum identity exact at every depth.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{self, JetTable};
use crate::jet::Jet;
use crate::tree::{TreeSpec, VertexPath};

/// Default absolute tolerance on the child-sum identity at construction.
pub const ADDITIVITY_TOL: f64 = 1e-12;

/// Complex set function on boundary arcs, carried on a finite subtree.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryDistribution {
    values: BTreeMap<VertexPath, Complex64>,
}

/// Wire format: parallel arrays of carrier paths and `[re, im]` values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionJson {
    pub carrier: Vec<Vec<u32>>,
    pub values: Vec<[f64; 2]>,
    #[serde(default = "uniform_tag")]
    pub refinement: String,
}

fn uniform_tag() -> String {
    "uniform".into()
}

impl BoundaryDistribution {
    /// Builds a distribution, checking the carrier shape and additivity at
    /// the default tolerance.
    pub fn new(spec: &TreeSpec, values: BTreeMap<VertexPath, Complex64>) -> Result<Self> {
        Self::with_tolerance(spec, values, ADDITIVITY_TOL)
    }

    pub fn with_tolerance(
        spec: &TreeSpec,
        values: BTreeMap<VertexPath, Complex64>,
        tol: f64,
    ) -> Result<Self> {
        if !values.contains_key(&VertexPath::root()) {
            return Err(Error::InvalidDistribution(
                "carrier must contain the root".into(),
            ));
        }
        for path in values.keys() {
            if let Some(parent) = path.parent() {
                if !values.contains_key(&parent) {
                    return Err(Error::InvalidDistribution(format!(
                        "carrier is not prefix-closed: {path} present without its parent"
                    )));
                }
            }
        }
        // Wherever one child is present all siblings must be, and the
        // children masses must sum to the parent mass.
        let dist = BoundaryDistribution { values };
        for (path, &value) in &dist.values {
            let t = spec.type_of(path)?;
            let n_children = spec.num_slots(t);
            let present: Vec<Complex64> = (0..n_children)
                .filter_map(|s| dist.values.get(&path.child(s as u32)).copied())
                .collect();
            if present.is_empty() {
                continue;
            }
            if present.len() != n_children {
                return Err(Error::InvalidDistribution(format!(
                    "node {path} has {} of {} children in the carrier",
                    present.len(),
                    n_children
                )));
            }
            let sum: Complex64 = present.iter().sum();
            if (sum - value).norm() > tol {
                return Err(Error::InvalidDistribution(format!(
                    "additivity violated at {path}: children sum to {sum}, node holds {value}"
                )));
            }
        }
        Ok(dist)
    }

    /// Point-like mass: `mass` on the arc below `path`, zero on every other
    /// arc of the same depth.
    pub fn point_mass(spec: &TreeSpec, path: &VertexPath, mass: Complex64) -> Result<Self> {
        let mut values = BTreeMap::new();
        values.insert(VertexPath::root(), mass);
        let mut prefix = VertexPath::root();
        for &slot in path.slots() {
            let t = spec.type_of(&prefix)?;
            for s in 0..spec.num_slots(t) {
                let child = prefix.child(s as u32);
                let v = if s as u32 == slot { mass } else { Complex64::ZERO };
                values.insert(child, v);
            }
            prefix = prefix.child(slot);
        }
        Self::new(spec, values)
    }

    /// Uniform-split distribution of total mass one on a complete carrier.
    pub fn uniform(spec: &TreeSpec, depth: usize) -> Result<Self> {
        let mut values = BTreeMap::new();
        values.insert(VertexPath::root(), Complex64::ONE);
        let mut frontier = vec![(VertexPath::root(), Complex64::ONE)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (path, mass) in frontier {
                let t = spec.type_of(&path)?;
                let share = mass / spec.num_slots(t) as f64;
                for s in 0..spec.num_slots(t) {
                    let child = path.child(s as u32);
                    values.insert(child.clone(), share);
                    next.push((child, share));
                }
            }
            frontier = next;
        }
        Self::new(spec, values)
    }

    pub fn carrier(&self) -> impl Iterator<Item = &VertexPath> {
        self.values.keys()
    }

    pub fn carrier_depth(&self) -> usize {
        self.values.keys().map(VertexPath::depth).max().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&VertexPath, &Complex64)> {
        self.values.iter()
    }

    /// Total mass `ν(∂T)`.
    pub fn total(&self) -> Complex64 {
        self.values[&VertexPath::root()]
    }

    /// Arc mass `ν(∂T_x)`: the carrier value when `x` is carried, otherwise
    /// the deepest carried ancestor's value refined by uniform child splits.
    pub fn arc_value(&self, spec: &TreeSpec, x: &VertexPath) -> Result<Complex64> {
        if let Some(&v) = self.values.get(x) {
            return Ok(v);
        }
        let mut depth = x.depth();
        let mut anchor = x.clone();
        while !self.values.contains_key(&anchor) {
            anchor = anchor.parent().expect("carrier contains the root");
            depth -= 1;
        }
        let mut value = self.values[&anchor];
        let mut cur = anchor;
        for &slot in &x.slots()[depth..] {
            let t = spec.type_of(&cur)?;
            value /= spec.num_slots(t) as f64;
            cur = cur.child(slot);
        }
        Ok(value)
    }

    /// Arc-wise linear combination on the union of carriers.
    pub fn linear_combination(
        spec: &TreeSpec,
        terms: &[(Complex64, &BoundaryDistribution)],
        tol: f64,
    ) -> Result<Self> {
        let mut values: BTreeMap<VertexPath, Complex64> = BTreeMap::new();
        for (_, dist) in terms {
            for path in dist.carrier() {
                values.insert(path.clone(), Complex64::ZERO);
            }
        }
        if values.is_empty() {
            values.insert(VertexPath::root(), Complex64::ZERO);
        }
        // The union of complete carriers can miss siblings: complete every
        // parent whose child set is partial.
        let paths: Vec<VertexPath> = values.keys().cloned().collect();
        for path in paths {
            if let Some(parent) = path.parent() {
                let t = spec.type_of(&parent)?;
                for s in 0..spec.num_slots(t) {
                    values.entry(parent.child(s as u32)).or_insert(Complex64::ZERO);
                }
            }
        }
        let keys: Vec<VertexPath> = values.keys().cloned().collect();
        for path in keys {
            let mut acc = Complex64::ZERO;
            for (coeff, dist) in terms {
                acc += coeff * dist.arc_value(spec, &path)?;
            }
            values.insert(path, acc);
        }
        Self::with_tolerance(spec, values, tol)
    }

    pub fn to_json_struct(&self) -> DistributionJson {
        let mut carrier = Vec::with_capacity(self.values.len());
        let mut values = Vec::with_capacity(self.values.len());
        for (path, v) in &self.values {
            carrier.push(path.slots().to_vec());
            values.push([v.re, v.im]);
        }
        DistributionJson {
            carrier,
            values,
            refinement: uniform_tag(),
        }
    }

    pub fn from_json_struct(spec: &TreeSpec, json: &DistributionJson) -> Result<Self> {
        Self::from_json_struct_with_tolerance(spec, json, ADDITIVITY_TOL)
    }

    pub fn from_json_struct_with_tolerance(
        spec: &TreeSpec,
        json: &DistributionJson,
        tol: f64,
    ) -> Result<Self> {
        if json.refinement != "uniform" {
            return Err(Error::InvalidDistribution(format!(
                "unsupported refinement rule {:?}",
                json.refinement
            )));
        }
        if json.carrier.len() != json.values.len() {
            return Err(Error::InvalidDistribution(
                "carrier and values have different lengths".into(),
            ));
        }
        let mut values = BTreeMap::new();
        for (slots, v) in json.carrier.iter().zip(&json.values) {
            values.insert(
                VertexPath::from_slots(slots.clone()),
                Complex64::new(v[0], v[1]),
            );
        }
        Self::with_tolerance(spec, values, tol)
    }
}

/// Function on the boundary that is constant outside finitely many arcs,
/// described by one value per carrier node.
#[derive(Clone, Debug)]
pub struct LocallyConstantFn {
    values: BTreeMap<VertexPath, Complex64>,
}

impl LocallyConstantFn {
    pub fn new(values: BTreeMap<VertexPath, Complex64>) -> Result<Self> {
        if !values.contains_key(&VertexPath::root()) {
            return Err(Error::InvalidDistribution(
                "locally constant carrier must contain the root".into(),
            ));
        }
        for path in values.keys() {
            if let Some(parent) = path.parent() {
                if !values.contains_key(&parent) {
                    return Err(Error::InvalidDistribution(format!(
                        "locally constant carrier is not prefix-closed at {path}"
                    )));
                }
            }
        }
        Ok(LocallyConstantFn { values })
    }

    /// Indicator of the arc `∂T_x`.
    pub fn indicator(x: &VertexPath) -> Self {
        let mut values = BTreeMap::new();
        for anc in x.ancestors() {
            values.insert(anc, Complex64::ZERO);
        }
        values.insert(x.clone(), Complex64::ONE);
        LocallyConstantFn { values }
    }

    pub fn constant(value: Complex64) -> Self {
        let mut values = BTreeMap::new();
        values.insert(VertexPath::root(), value);
        LocallyConstantFn { values }
    }

    /// `∫ φ dν = Σ_x φ_x (ν(∂T_x) - Σ_{y ∈ S_τ(x)} ν(∂T_y))`.
    pub fn integrate(&self, spec: &TreeSpec, nu: &BoundaryDistribution) -> Result<Complex64> {
        let mut acc = Complex64::ZERO;
        for (path, &phi) in &self.values {
            let mut region = nu.arc_value(spec, path)?;
            let t = spec.type_of(path)?;
            for s in 0..spec.num_slots(t) {
                let child = path.child(s as u32);
                if self.values.contains_key(&child) {
                    region -= nu.arc_value(spec, &child)?;
                }
            }
            acc += phi * region;
        }
        Ok(acc)
    }
}

/// Poisson transform jet at `x`:
/// `h(x) = K(x,o|λ) ν(∂T) + Σ_i (K(x,x_i|λ) - K(x,x_{i-1}|λ)) ν(∂T_{x_i})`.
/// The order-r coefficient times `r!` is the r-th λ-derivative of `h`.
pub fn poisson_transform(
    spec: &TreeSpec,
    table: &JetTable,
    nu: &BoundaryDistribution,
    x: &VertexPath,
) -> Result<Jet> {
    let kernels = green::kernels_along_path(spec, table, x)?;
    let ancestors = x.ancestors();
    let mut h = kernels[0].scale(nu.total());
    for i in 1..kernels.len() {
        let diff = &kernels[i] - &kernels[i - 1];
        h = &h + &diff.scale(nu.arc_value(spec, &ancestors[i])?);
    }
    Ok(h)
}

/// Evaluates a λ-harmonic function: either the Poisson transform of a
/// stored distribution or an explicit table on a finite ball.
#[derive(Clone, Debug)]
pub enum HarmonicEvaluator {
    Poisson(BoundaryDistribution),
    Table(BTreeMap<VertexPath, Complex64>),
}

impl HarmonicEvaluator {
    pub fn eval(&self, spec: &TreeSpec, table: &JetTable, x: &VertexPath) -> Result<Complex64> {
        match self {
            HarmonicEvaluator::Poisson(nu) => {
                Ok(poisson_transform(spec, table, nu, x)?.value())
            }
            HarmonicEvaluator::Table(values) => values
                .get(x)
                .copied()
                .ok_or_else(|| Error::EvaluatorDomain { vertex: x.clone() }),
        }
    }

    /// Checks `Ph = λ h` at every table vertex whose neighbours are all in
    /// the table.
    pub fn validate_table(&self, spec: &TreeSpec, lambda: Complex64, tol: f64) -> Result<()> {
        let HarmonicEvaluator::Table(values) = self else {
            return Ok(());
        };
        for (x, &hx) in values {
            let t = spec.type_of(x)?;
            let mut interior = x.parent().is_none_or(|p| values.contains_key(&p));
            for s in 0..spec.num_slots(t) {
                interior &= values.contains_key(&x.child(s as u32));
            }
            if !interior {
                continue;
            }
            let ph = green::apply_p(spec, |v| self.eval_table_only(v), x)?;
            if (ph - lambda * hx).norm() > tol {
                return Err(Error::InvalidDistribution(format!(
                    "table is not lambda-harmonic at {x}: residual {:.3e}",
                    (ph - lambda * hx).norm()
                )));
            }
        }
        Ok(())
    }

    fn eval_table_only(&self, x: &VertexPath) -> Result<Complex64> {
        match self {
            HarmonicEvaluator::Table(values) => values
                .get(x)
                .copied()
                .ok_or_else(|| Error::EvaluatorDomain { vertex: x.clone() }),
            HarmonicEvaluator::Poisson(_) => unreachable!("only called on tables"),
        }
    }
}

/// Recovered arc mass of the distribution representing a λ-harmonic `h`:
/// `ν^h(∂T) = h(o)` and
/// `ν^h(∂T_x) = F(o,x) (h(x) - F(x,x^-) h(x^-)) / (1 - F(x^-,x) F(x,x^-))`.
pub fn recover_arc<H>(spec: &TreeSpec, table: &JetTable, h: H, x: &VertexPath) -> Result<Complex64>
where
    H: Fn(&VertexPath) -> Result<Complex64>,
{
    if x.is_root() {
        return h(x);
    }
    let parent = x.parent().expect("x is not the root");
    let down = green::f_down_path(spec, table, x)?;
    let f_o_x: Complex64 = down.iter().map(Jet::value).product();
    let f_parent_x = down.last().expect("x is not the root").value();
    let t = spec.type_of(x)?;
    let f_x_parent = table.f_up(t)?.value();
    let den = Complex64::ONE - f_parent_x * f_x_parent;
    if den.norm() < 1e-12 {
        return Err(Error::DenominatorNearOne {
            magnitude: den.norm(),
        });
    }
    Ok(f_o_x * (h(x)? - f_x_parent * h(&parent)?) / den)
}

pub fn recover_distribution(
    spec: &TreeSpec,
    table: &JetTable,
    h: &HarmonicEvaluator,
    x: &VertexPath,
) -> Result<Complex64> {
    recover_arc(spec, table, |v| h.eval(spec, table, v), x)
}

/// Recovers arc masses on the complete carrier of the given depth.
pub fn recover_on_carrier<H>(
    spec: &TreeSpec,
    table: &JetTable,
    h: H,
    depth: usize,
) -> Result<BoundaryDistribution>
where
    H: Fn(&VertexPath) -> Result<Complex64>,
{
    let mut values = BTreeMap::new();
    for x in spec.vertices_to_depth(depth) {
        let v = recover_arc(spec, table, &h, &x)?;
        values.insert(x, v);
    }
    // Recovered masses satisfy additivity only up to solver residuals.
    BoundaryDistribution::with_tolerance(spec, values, 1e-6)
}
