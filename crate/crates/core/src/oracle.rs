//! Brute-force verifier: exact n-step probabilities on depth-truncated
//! trees and truncated Green / first-passage series.
//!
//! A nearest-neighbour walk of `n` steps cannot leave the radius-`n` ball
//! around its start, so sparse power iteration on the truncated ball gives
//! the infinite-tree probabilities exactly for `n <= radius`.  Everything
//! here is independent of the fixed-point solvers it is used to check.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tree::{TreeSpec, VertexPath};

/// Default memory guard on ball construction.
pub const DEFAULT_MAX_BALL: usize = 5_000_000;

/// Depth-truncated ball around a center vertex with all transition
/// probabilities among its vertices.
pub struct TruncatedBall {
    center: VertexPath,
    radius: usize,
    verts: Vec<VertexPath>,
    index: HashMap<VertexPath, usize>,
    /// Outgoing edges `(target, p(v, target))` per vertex.
    adj: Vec<Vec<(usize, f64)>>,
}

/// A truncated series value together with a geometric tail bound.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms: usize,
}

impl TruncatedBall {
    pub fn new(spec: &TreeSpec, center: &VertexPath, radius: usize) -> Result<TruncatedBall> {
        TruncatedBall::with_limit(spec, center, radius, DEFAULT_MAX_BALL)
    }

    pub fn with_limit(
        spec: &TreeSpec,
        center: &VertexPath,
        radius: usize,
        max_vertices: usize,
    ) -> Result<TruncatedBall> {
        spec.type_of(center)?;
        let mut verts = vec![center.clone()];
        let mut index = HashMap::new();
        index.insert(center.clone(), 0usize);
        let mut frontier = vec![center.clone()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for v in &frontier {
                let t = spec.type_of(v)?;
                let mut neighbours = Vec::with_capacity(spec.num_slots(t) + 1);
                if let Some(parent) = v.parent() {
                    neighbours.push(parent);
                }
                for slot in 0..spec.num_slots(t) {
                    neighbours.push(v.child(slot as u32));
                }
                for n in neighbours {
                    if !index.contains_key(&n) {
                        if verts.len() >= max_vertices {
                            return Err(Error::BallTooLarge {
                                vertices: verts.len() + 1,
                                limit: max_vertices,
                            });
                        }
                        index.insert(n.clone(), verts.len());
                        verts.push(n.clone());
                        next.push(n);
                    }
                }
            }
            frontier = next;
        }
        let mut adj = vec![Vec::new(); verts.len()];
        for (i, v) in verts.iter().enumerate() {
            let t = spec.type_of(v)?;
            if let Some(parent) = v.parent() {
                if let Some(&j) = index.get(&parent) {
                    adj[i].push((j, spec.up_prob(t)));
                }
            }
            for slot in 0..spec.num_slots(t) {
                let child = v.child(slot as u32);
                if let Some(&j) = index.get(&child) {
                    adj[i].push((j, spec.slot(t, slot).1));
                }
            }
        }
        Ok(TruncatedBall {
            center: center.clone(),
            radius,
            verts,
            index,
            adj,
        })
    }

    pub fn center(&self) -> &VertexPath {
        &self.center
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn contains(&self, v: &VertexPath) -> bool {
        self.index.contains_key(v)
    }

    pub fn vertices(&self) -> &[VertexPath] {
        &self.verts
    }

    fn lookup(&self, v: &VertexPath) -> Result<usize> {
        self.index.get(v).copied().ok_or_else(|| Error::InvalidPath {
            path: v.clone(),
            reason: "vertex outside the truncated ball".into(),
        })
    }

    fn step(&self, mass: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; mass.len()];
        for (i, edges) in self.adj.iter().enumerate() {
            let m = mass[i];
            if m == 0.0 {
                continue;
            }
            for &(j, p) in edges {
                next[j] += m * p;
            }
        }
        next
    }

    /// Exact `p^(n)(center, y)` for `n <= radius`.
    pub fn n_step(&self, y: &VertexPath, n: usize) -> Result<f64> {
        if n > self.radius {
            return Err(Error::HorizonExceeded {
                steps: n,
                radius: self.radius,
            });
        }
        let target = self.lookup(y)?;
        let mut mass = vec![0.0; self.verts.len()];
        mass[0] = 1.0;
        for _ in 0..n {
            mass = self.step(&mass);
        }
        Ok(mass[target])
    }

    /// All `p^(n)(center, y)` for `0 <= n <= horizon` at a fixed target.
    pub fn n_step_profile(&self, y: &VertexPath, horizon: usize) -> Result<Vec<f64>> {
        if horizon > self.radius {
            return Err(Error::HorizonExceeded {
                steps: horizon,
                radius: self.radius,
            });
        }
        let target = self.lookup(y)?;
        let mut mass = vec![0.0; self.verts.len()];
        mass[0] = 1.0;
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(mass[target]);
        for _ in 0..horizon {
            mass = self.step(&mass);
            out.push(mass[target]);
        }
        Ok(out)
    }

    /// First-passage probabilities `f^(n)(center, y)` for `0 <= n <= horizon`:
    /// the walk is killed on reaching `y`.
    pub fn first_passage_profile(&self, y: &VertexPath, horizon: usize) -> Result<Vec<f64>> {
        if horizon > self.radius {
            return Err(Error::HorizonExceeded {
                steps: horizon,
                radius: self.radius,
            });
        }
        let target = self.lookup(y)?;
        let mut mass = vec![0.0; self.verts.len()];
        mass[0] = 1.0;
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(mass[target]);
        mass[target] = 0.0;
        for _ in 0..horizon {
            mass = self.step(&mass);
            out.push(mass[target]);
            mass[target] = 0.0;
        }
        Ok(out)
    }

    /// Partial sum of `G(center, y | λ) = Σ p^(n)(center, y) λ^{-n-1}` over
    /// `n <= terms`, with a geometric tail bound driven by `rho_hi`.
    pub fn green_series(
        &self,
        y: &VertexPath,
        lambda: Complex64,
        terms: usize,
        rho_hi: f64,
    ) -> Result<SeriesValue> {
        let profile = self.n_step_profile(y, terms)?;
        series_from_profile(&profile, lambda, rho_hi, 1)
    }

    /// Partial sum of `F(center, y | λ) = Σ f^(n)(center, y) λ^{-n}`.
    pub fn first_passage_series(
        &self,
        y: &VertexPath,
        lambda: Complex64,
        terms: usize,
        rho_hi: f64,
    ) -> Result<SeriesValue> {
        let profile = self.first_passage_profile(y, terms)?;
        series_from_profile(&profile, lambda, rho_hi, 0)
    }
}

/// Sums `Σ_n a_n λ^{-n-shift}` and bounds the tail by dominating the last
/// computed coefficients with `C rho_hi^n`.
fn series_from_profile(
    profile: &[f64],
    lambda: Complex64,
    rho_hi: f64,
    shift: i32,
) -> Result<SeriesValue> {
    let lam_abs = lambda.norm();
    if lam_abs <= rho_hi {
        return Err(Error::TailNotControlled {
            lambda_abs: lam_abs,
            rho_hi,
        });
    }
    let inv = Complex64::ONE / lambda;
    let mut value = Complex64::ZERO;
    let mut weight = inv.powi(shift);
    for &a in profile {
        value += a * weight;
        weight *= inv;
    }
    let n_max = profile.len() - 1;
    // Both step parities among the last terms matter; p^(n) vanishes for
    // every n with the wrong parity.
    let window = profile.len().min(10);
    let mut c = 0.0f64;
    for (k, &a) in profile.iter().enumerate().skip(profile.len() - window) {
        if a > 0.0 {
            c = c.max(a / rho_hi.powi(k as i32));
        }
    }
    if c == 0.0 {
        c = 1.0;
    }
    let ratio = rho_hi / lam_abs;
    let tail_bound =
        c * ratio.powi(n_max as i32 + 1) / (1.0 - ratio) / lam_abs.powi(shift);
    Ok(SeriesValue {
        value,
        tail_bound,
        terms: profile.len(),
    })
}
