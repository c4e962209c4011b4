//! First-passage fixed point, Green functions and the Martin kernel.
//!
//! The upward first-passage functions close over the cone types: for a
//! vertex of type `t` with children of types `c(t,s)`,
//!
//! ```text
//! F_up(t) = u(t) / (λ - Σ_s p_f(t,s) F_up(c(t,s)))
//! ```
//!
//! Iterating this map from the zero jet produces monotone partial sums of
//! the first-passage series for real `λ` above the spectral radius, and the
//! same iteration in truncated jet arithmetic carries every derivative
//! order along for free.  Downward first-passage values do not close over
//! types: they pick up the ancestor context and are rebuilt per path.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::oracle::TruncatedBall;
use crate::tree::{TreeSpec, VertexPath};

/// Convergence parameters for [`solve_f_up_with`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iterations: 100_000,
            tolerance: 1e-13,
        }
    }
}

/// Solved upward first-passage jets per type, plus convergence metadata.
#[derive(Clone, Debug)]
pub struct JetTable {
    lambda: Complex64,
    order: usize,
    f_up: Vec<Jet>,
    root: usize,
    iterations: usize,
    residual: f64,
}

impl JetTable {
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Upward first-passage jet `F(x, x^- | λ)` for a vertex of type `t`.
    pub fn f_up(&self, t: usize) -> Result<&Jet> {
        if t == self.root {
            return Err(Error::InvalidSpec(
                "the root type has no parent edge and no upward first passage".into(),
            ));
        }
        Ok(&self.f_up[t])
    }
}

/// Solves the per-type fixed point in jet arithmetic at base point `lambda`.
pub fn solve_f_up(spec: &TreeSpec, lambda: Complex64, order: usize) -> Result<JetTable> {
    solve_f_up_with(spec, lambda, order, SolveOptions::default())
}

pub fn solve_f_up_with(
    spec: &TreeSpec,
    lambda: Complex64,
    order: usize,
    opts: SolveOptions,
) -> Result<JetTable> {
    let n = spec.num_types();
    let root = spec.root_index();
    let lam = Jet::variable(lambda, order);
    let mut f: Vec<Jet> = vec![Jet::zero(order); n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta = 0.0f64;
        let mut next = Vec::with_capacity(n);
        for t in 0..n {
            if t == root {
                next.push(Jet::zero(order));
                continue;
            }
            let value = f_up_update(spec, &lam, &f, t)?;
            if !value.is_finite() {
                return Err(Error::NonConvergence {
                    iterations,
                    last_delta: f64::INFINITY,
                });
            }
            delta = delta.max((&value - &f[t]).sup_norm());
            next.push(value);
        }
        f = next;
        if delta < opts.tolerance {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                last_delta: delta,
            });
        }
    }
    // Fixed-point residual after convergence.
    let mut residual = 0.0f64;
    for t in 0..n {
        if t == root {
            continue;
        }
        let value = f_up_update(spec, &lam, &f, t)?;
        residual = residual.max((&value - &f[t]).sup_norm());
    }
    // First-passage sum bound: over the children of any vertex,
    // Σ_s p_f(t,s) |F_up(c(t,s))| stays below |λ| away from the spectrum.
    let slack = 1e-9;
    for t in 0..n {
        let mut sum = 0.0;
        for s in 0..spec.num_slots(t) {
            let (child, p) = spec.slot(t, s);
            sum += p * f[child].value().norm();
        }
        if sum > lambda.norm() + slack {
            return Err(Error::SpectralBound {
                sum,
                lambda_abs: lambda.norm(),
            });
        }
    }
    Ok(JetTable {
        lambda,
        order,
        f_up: f,
        root,
        iterations,
        residual,
    })
}

fn f_up_update(spec: &TreeSpec, lam: &Jet, f: &[Jet], t: usize) -> Result<Jet> {
    let order = lam.order();
    let mut den = lam.clone();
    for s in 0..spec.num_slots(t) {
        let (child, p) = spec.slot(t, s);
        den = &den - &f[child].scale(p.into());
    }
    if den.value().norm() < 1e-14 {
        return Err(Error::DivisionBySingularJet {
            magnitude: den.value().norm(),
        });
    }
    Jet::constant(spec.up_prob(t).into(), order).try_div(&den)
}

/// Downward first-passage jets along the geodesic from the root to `x`, one
/// per edge, oriented downwards.  The value for the edge into `x_i` uses the
/// previously computed value for the edge into `x_{i-1}` as parent context.
pub fn f_down_path(spec: &TreeSpec, table: &JetTable, x: &VertexPath) -> Result<Vec<Jet>> {
    let order = table.order();
    let lam = Jet::variable(table.lambda(), order);
    let mut out: Vec<Jet> = Vec::with_capacity(x.depth());
    let mut t = spec.root_index();
    for (i, &slot) in x.slots().iter().enumerate() {
        let slot = slot as usize;
        if slot >= spec.num_slots(t) {
            return Err(Error::InvalidPath {
                path: x.clone(),
                reason: format!("slot {slot} out of range at depth {i}"),
            });
        }
        let mut den = lam.clone();
        if let Some(prev) = out.last() {
            den = &den - &prev.scale(spec.up_prob(t).into());
        }
        for s in 0..spec.num_slots(t) {
            if s == slot {
                continue;
            }
            let (child, p) = spec.slot(t, s);
            den = &den - &table.f_up(child)?.scale(p.into());
        }
        if den.value().norm() < 1e-14 {
            return Err(Error::DivisionBySingularJet {
                magnitude: den.value().norm(),
            });
        }
        let (child, p) = spec.slot(t, slot);
        out.push(Jet::constant(p.into(), order).try_div(&den)?);
        t = child;
    }
    Ok(out)
}

/// First-return jet `U(x, x | λ)`: parent edge term plus children terms.
pub fn first_return(spec: &TreeSpec, table: &JetTable, x: &VertexPath) -> Result<Jet> {
    let order = table.order();
    let t = spec.type_of(x)?;
    let mut u = Jet::zero(order);
    if !x.is_root() {
        let down = f_down_path(spec, table, x)?;
        let last = down.last().expect("x is not the root");
        u = &u + &last.scale(spec.up_prob(t).into());
    }
    for s in 0..spec.num_slots(t) {
        let (child, p) = spec.slot(t, s);
        u = &u + &table.f_up(child)?.scale(p.into());
    }
    Ok(u)
}

/// Diagonal Green jet `G(x, x | λ) = 1 / (λ - U(x, x | λ))`.
pub fn green_diag(spec: &TreeSpec, table: &JetTable, x: &VertexPath) -> Result<Jet> {
    let order = table.order();
    let lam = Jet::variable(table.lambda(), order);
    let u = first_return(spec, table, x)?;
    let den = &lam - &u;
    if den.value().norm() < 1e-14 {
        return Err(Error::ZeroDenominator {
            magnitude: den.value().norm(),
        });
    }
    let g = Jet::one(order).try_div(&den)?;
    if g.value().norm() < 1e-14 {
        return Err(Error::VanishingGreen {
            magnitude: g.value().norm(),
        });
    }
    Ok(g)
}

/// Off-diagonal Green jet `G(x, y | λ) = F(x, y | λ) G(y, y | λ)` for any
/// pair of vertices.
pub fn green_pair(
    spec: &TreeSpec,
    table: &JetTable,
    x: &VertexPath,
    y: &VertexPath,
) -> Result<Jet> {
    let f = first_passage(spec, table, x, y)?;
    let g = green_diag(spec, table, y)?;
    Ok(&f * &g)
}

/// First-passage jet `F(x, y | λ)` as the product of per-edge jets along
/// the geodesic from `x` to `y`.
pub fn first_passage(
    spec: &TreeSpec,
    table: &JetTable,
    x: &VertexPath,
    y: &VertexPath,
) -> Result<Jet> {
    let order = table.order();
    let c = x.confluent(y);
    let mut out = Jet::one(order);
    // Upward run x -> c: type-determined factors.
    let mut cur = x.clone();
    while cur.depth() > c.depth() {
        let t = spec.type_of(&cur)?;
        out = &out * table.f_up(t)?;
        cur = cur.parent().expect("above confluent");
    }
    // Downward run c -> y: context-dependent factors along the root geodesic.
    if c.depth() < y.depth() {
        let down = f_down_path(spec, table, y)?;
        for jet in &down[c.depth()..] {
            out = &out * jet;
        }
    }
    Ok(out)
}

/// λ-Martin kernel jet `K(x, ∂T_arc | λ) = F(x, c | λ) / F(o, c | λ)` with
/// `c = x ∧ arc`.  Constant on the arc provided `arc` is not a strict
/// ancestor of `x`.
pub fn martin_kernel(
    spec: &TreeSpec,
    table: &JetTable,
    x: &VertexPath,
    arc: &VertexPath,
) -> Result<Jet> {
    if arc.is_strict_prefix_of(x) {
        return Err(Error::ArcTooCoarse {
            vertex: x.clone(),
            arc: arc.clone(),
        });
    }
    let c = x.confluent(arc);
    kernel_at_confluent(spec, table, x, &c)
}

/// Kernel value for a known confluent `c` (an ancestor of `x`): the
/// uncancelled upward factors over the downward factors, multiplied out
/// edge by edge.
pub(crate) fn kernel_at_confluent(
    spec: &TreeSpec,
    table: &JetTable,
    x: &VertexPath,
    c: &VertexPath,
) -> Result<Jet> {
    let order = table.order();
    let mut num = Jet::one(order);
    let mut cur = x.clone();
    while cur.depth() > c.depth() {
        let t = spec.type_of(&cur)?;
        num = &num * table.f_up(t)?;
        cur = cur.parent().expect("above confluent");
    }
    let down = f_down_path(spec, table, c)?;
    let mut den = Jet::one(order);
    for jet in &down {
        den = &den * jet;
    }
    num.try_div(&den)
}

/// Kernel jets `K(x, x_i | λ)` for every vertex `x_i` on the geodesic from
/// the root to `x`, sharing the edge products across positions.
pub fn kernels_along_path(spec: &TreeSpec, table: &JetTable, x: &VertexPath) -> Result<Vec<Jet>> {
    let order = table.order();
    let k = x.depth();
    let down = f_down_path(spec, table, x)?;
    // up[i] = F(x, x_i): product of upward jets from x down-to-depth i.
    let mut up = vec![Jet::one(order); k + 1];
    let mut cur = x.clone();
    for i in (0..k).rev() {
        let t = spec.type_of(&cur)?;
        up[i] = &up[i + 1] * table.f_up(t)?;
        cur = cur.parent().expect("depth positive");
    }
    let mut out = Vec::with_capacity(k + 1);
    let mut den = Jet::one(order);
    out.push(up[0].clone());
    for i in 1..=k {
        den = &den * &down[i - 1];
        out.push(up[i].try_div(&den)?);
    }
    Ok(out)
}

/// One application of the transition operator: `Pf(x) = Σ_y p(x,y) f(y)`.
pub fn apply_p<F>(spec: &TreeSpec, f: F, x: &VertexPath) -> Result<Complex64>
where
    F: Fn(&VertexPath) -> Result<Complex64>,
{
    let t = spec.type_of(x)?;
    let mut acc = Complex64::ZERO;
    if let Some(parent) = x.parent() {
        acc += Complex64::from(spec.up_prob(t)) * f(&parent)?;
    }
    for s in 0..spec.num_slots(t) {
        let (_, p) = spec.slot(t, s);
        acc += Complex64::from(p) * f(&x.child(s as u32))?;
    }
    Ok(acc)
}

/// Bracket for the spectral radius.
#[derive(Clone, Copy, Debug)]
pub struct RhoBracket {
    pub lo: f64,
    pub hi: f64,
}

impl RhoBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Options for [`estimate_rho_with`].
#[derive(Clone, Copy, Debug)]
pub struct RhoOptions {
    /// Target bracket width.
    pub width: f64,
    /// Vertex budget for the series lower bound.
    pub series_budget: usize,
    /// Per-probe iteration budget for the convergence bisection.
    pub probe_iterations: usize,
}

impl Default for RhoOptions {
    fn default() -> Self {
        RhoOptions {
            width: 1e-3,
            series_budget: 300_000,
            probe_iterations: 200_000,
        }
    }
}

/// Brackets the spectral radius.
///
/// The floor comes from the even return probabilities: both
/// `(p^(2n)(o,o))^(1/2n)` and the moment ratio
/// `sqrt(p^(2n+2)/p^(2n))` are true lower bounds for a reversible walk.
/// The bracket is then tightened by bisection on real `λ`, classifying a
/// probe as above the spectral radius exactly when the fixed-point
/// iteration converges.  Budget exhaustion widens the bracket, never
/// narrows it.
pub fn estimate_rho(spec: &TreeSpec) -> Result<RhoBracket> {
    estimate_rho_with(spec, RhoOptions::default())
}

pub fn estimate_rho_with(spec: &TreeSpec, opts: RhoOptions) -> Result<RhoBracket> {
    let root = VertexPath::root();
    let mut radius = 4usize;
    let mut ball = TruncatedBall::with_limit(spec, &root, radius, opts.series_budget)?;
    loop {
        let next = radius + 2;
        match TruncatedBall::with_limit(spec, &root, next, opts.series_budget) {
            Ok(b) => {
                ball = b;
                radius = next;
            }
            Err(Error::BallTooLarge { .. }) => break,
            Err(e) => return Err(e),
        }
        if radius >= 24 {
            break;
        }
    }
    let profile = ball.n_step_profile(&root, radius)?;
    let mut lo = 0.0f64;
    for n in (2..=radius).step_by(2) {
        let p = profile[n];
        if p > 0.0 {
            lo = lo.max(p.powf(1.0 / n as f64));
        }
        if n + 2 <= radius && p > 0.0 && profile[n + 2] > 0.0 {
            lo = lo.max((profile[n + 2] / p).sqrt());
        }
    }
    // Stochastic operators have spectral radius at most one.
    let mut hi = 1.0f64;
    let opts_probe = SolveOptions {
        max_iterations: opts.probe_iterations,
        tolerance: 1e-13,
    };
    if lo >= hi {
        return Ok(RhoBracket { lo: hi, hi });
    }
    let converges = |lambda: f64| -> bool {
        solve_f_up_with(spec, Complex64::new(lambda, 0.0), 0, opts_probe).is_ok()
    };
    let mut budget = 60usize;
    while hi - lo > opts.width && budget > 0 {
        budget -= 1;
        let mid = 0.5 * (lo + hi);
        if converges(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RhoBracket { lo, hi })
}

/// Residual report for the group-invariant Green function identities.
#[derive(Clone, Debug)]
pub struct GroupInvariantReport {
    pub lambda: Complex64,
    pub g_value: Complex64,
    /// Per class `j`: `|p_j G_{-j} - p_{-j} G_j|`.
    pub reversibility_residuals: std::collections::BTreeMap<i32, f64>,
    /// Per class `j`: `|p_{-j} G_j^2 + G_j - p_j G^2|`.
    pub quadratic_residuals: std::collections::BTreeMap<i32, f64>,
}

impl GroupInvariantReport {
    pub fn max_residual(&self) -> f64 {
        self.reversibility_residuals
            .values()
            .chain(self.quadratic_residuals.values())
            .fold(0.0f64, |acc, &r| acc.max(r))
    }

    /// Numerical witness that the Green function does not vanish.
    pub fn g_nonzero(&self) -> bool {
        self.g_value.norm() > 1e-12
    }
}

/// Checks the reversibility and quadratic identities of the edge-type Green
/// functions `G_j(λ) = F_j(λ) G(λ)` on the unfolded transitive tree.
pub fn group_invariant_checks(
    model: &crate::tree::EdgeTypeModel,
    lambda: Complex64,
) -> Result<GroupInvariantReport> {
    if lambda.norm() == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let spec = model.to_tree_spec()?;
    let table = solve_f_up(&spec, lambda, 0)?;
    let g = green_diag(&spec, &table, &VertexPath::root())?.value();
    // A vertex of type via_i steps to its parent along an edge of class -i,
    // so the class-j first passage is the upward value at type via_{-j}.
    let f_class = |j: i32| -> Result<Complex64> {
        let inv = model.classes[&j].inverse;
        let t = spec
            .type_index(&format!("via_{inv}"))
            .expect("unfolded spec names types via_j");
        Ok(table.f_up(t)?.value())
    };
    let mut reversibility = std::collections::BTreeMap::new();
    let mut quadratic = std::collections::BTreeMap::new();
    for (&j, class) in &model.classes {
        let p_j = class.prob;
        let p_mj = model.classes[&class.inverse].prob;
        let g_j = f_class(j)? * g;
        let g_mj = f_class(class.inverse)? * g;
        reversibility.insert(j, (p_j * g_mj - p_mj * g_j).norm());
        quadratic.insert(j, (p_mj * g_j * g_j + g_j - p_j * g * g).norm());
    }
    Ok(GroupInvariantReport {
        lambda,
        g_value: g,
        reversibility_residuals: reversibility,
        quadratic_residuals: quadratic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use crate::tree::TreeSpec;

    fn t_q(q: u32) -> TreeSpec {
        TreeSpec::homogeneous_srw(q)
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    /// Closed form for simple random walk on T_q, decreasing branch.
    fn f_closed(q: u32, lambda: f64) -> f64 {
        let q = f64::from(q);
        let rho = 2.0 * q.sqrt() / (q + 1.0);
        (q + 1.0) * lambda / (2.0 * q) * (1.0 - (1.0 - rho * rho / (lambda * lambda)).sqrt())
    }

    #[test]
    fn t2_first_passage_at_one() {
        let spec = t_q(2);
        let table = solve_f_up(&spec, re(1.0), 0).unwrap();
        let a = spec.type_index("a").unwrap();
        assert!((table.f_up(a).unwrap().value() - re(0.5)).norm() < 1e-12);
        assert!(table.residual() < 1e-12);
    }

    #[test]
    fn matches_closed_form_above_rho() {
        for q in [2u32, 3, 5] {
            for lambda in [1.0, 1.2, 2.0] {
                let spec = t_q(q);
                let table = solve_f_up(&spec, re(lambda), 0).unwrap();
                let a = spec.type_index("a").unwrap();
                let got = table.f_up(a).unwrap().value();
                assert!(
                    (got - re(f_closed(q, lambda))).norm() < 1e-10,
                    "q={q} lambda={lambda}"
                );
            }
        }
    }

    #[test]
    fn jet_derivative_matches_finite_difference() {
        let spec = t_q(2);
        let lambda = 1.0;
        let table = solve_f_up(&spec, re(lambda), 1).unwrap();
        let a = spec.type_index("a").unwrap();
        let h = 1e-6;
        let fd = (f_closed(2, lambda + h) - f_closed(2, lambda - h)) / (2.0 * h);
        let jet = table.f_up(a).unwrap().coeff(1).re;
        assert!((jet - fd).abs() < 1e-6, "jet {jet} vs fd {fd}");
    }

    #[test]
    fn down_passage_matches_hand_value() {
        let spec = t_q(2);
        let table = solve_f_up(&spec, re(1.0), 0).unwrap();
        let x = VertexPath::from_slots(vec![0]);
        let down = f_down_path(&spec, &table, &x).unwrap();
        assert_eq!(down.len(), 1);
        // (1/3) / (1 - 2 (1/3)(1/2)) = 1/2.
        assert!((down[0].value() - re(0.5)).norm() < 1e-12);
    }

    #[test]
    fn homogeneous_down_equals_up() {
        let spec = t_q(3);
        let table = solve_f_up(&spec, re(1.1), 2).unwrap();
        let a = spec.type_index("a").unwrap();
        let x = VertexPath::from_slots(vec![0, 2, 1, 0]);
        for jet in f_down_path(&spec, &table, &x).unwrap() {
            for k in 0..=2 {
                assert!((jet.coeff(k) - table.f_up(a).unwrap().coeff(k)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn green_diag_at_one_is_two() {
        let spec = t_q(2);
        let table = solve_f_up(&spec, re(1.0), 0).unwrap();
        let g = green_diag(&spec, &table, &VertexPath::root()).unwrap();
        assert!((g.value() - re(2.0)).norm() < 1e-11);
    }

    #[test]
    fn first_passage_sum_bounded_by_lambda() {
        // Σ_v p(x,v) |F(v,x|λ)| <= |λ| over the neighbours of x.
        let spec = samples::lopsided();
        let lambda = 1.15;
        let table = solve_f_up(&spec, re(lambda), 0).unwrap();
        for x in spec.vertices_to_depth(3) {
            let t = spec.type_of(&x).unwrap();
            let mut sum = 0.0;
            if !x.is_root() {
                let down = f_down_path(&spec, &table, &x).unwrap();
                sum += spec.up_prob(t) * down.last().unwrap().value().norm();
            }
            for s in 0..spec.num_slots(t) {
                let (child, p) = spec.slot(t, s);
                sum += p * table.f_up(child).unwrap().value().norm();
            }
            assert!(sum <= lambda + 1e-9, "at {x}: sum {sum}");
            let u = first_return(&spec, &table, &x).unwrap();
            assert!(u.value().norm() <= sum + 1e-12);
        }
    }

    #[test]
    fn neighbour_green_cross_identity() {
        // G(x,y)/p(x,y) = G(x,x)G(y,y) - G(x,y)G(y,x) for neighbours.
        let spec = samples::lopsided();
        let table = solve_f_up(&spec, re(1.3), 0).unwrap();
        for x in spec.vertices_to_depth(2) {
            let t = spec.type_of(&x).unwrap();
            for s in 0..spec.num_slots(t) {
                let y = x.child(s as u32);
                let gxx = green_diag(&spec, &table, &x).unwrap().value();
                let gyy = green_diag(&spec, &table, &y).unwrap().value();
                let gxy = green_pair(&spec, &table, &x, &y).unwrap().value();
                let gyx = green_pair(&spec, &table, &y, &x).unwrap().value();
                let p = spec.step_prob(&x, &y).unwrap();
                let lhs = gxy / p;
                let rhs = gxx * gyy - gxy * gyx;
                assert!((lhs - rhs).norm() < 1e-10, "at {x} -> {y}");
                let q = spec.step_prob(&y, &x).unwrap();
                assert!((gxy / p - gyx / q).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let spec = t_q(2);
        let table = solve_f_up(&spec, re(1.0), 1).unwrap();
        let root = VertexPath::root();
        let x = VertexPath::from_slots(vec![0]);
        let k = martin_kernel(&spec, &table, &root, &x).unwrap();
        assert!((k.value() - re(1.0)).norm() < 1e-12);
        assert!(k.coeff(1).norm() < 1e-12);
        let k = martin_kernel(&spec, &table, &x, &x).unwrap();
        assert!((k.value() - re(2.0)).norm() < 1e-11);
        let other = VertexPath::from_slots(vec![1]);
        let k = martin_kernel(&spec, &table, &x, &other).unwrap();
        assert!((k.value() - re(0.5)).norm() < 1e-11);
    }

    #[test]
    fn arc_too_coarse_detected() {
        let spec = t_q(2);
        let table = solve_f_up(&spec, re(1.2), 0).unwrap();
        let x = VertexPath::from_slots(vec![0, 1]);
        let arc = VertexPath::from_slots(vec![0]);
        assert!(matches!(
            martin_kernel(&spec, &table, &x, &arc),
            Err(Error::ArcTooCoarse { .. })
        ));
    }

    #[test]
    fn kernels_along_path_match_pointwise() {
        let spec = samples::lopsided();
        let table = solve_f_up(&spec, re(1.4), 2).unwrap();
        let x = VertexPath::from_slots(vec![0, 1, 0]);
        let all = kernels_along_path(&spec, &table, &x).unwrap();
        for (i, anc) in x.ancestors().iter().enumerate() {
            let single = kernel_at_confluent(&spec, &table, &x, anc).unwrap();
            for k in 0..=2 {
                assert!((all[i].coeff(k) - single.coeff(k)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn stochastic_operator_fixes_constants() {
        let spec = samples::lopsided();
        let one = |_: &VertexPath| Ok(Complex64::ONE);
        let v = apply_p(&spec, one, &VertexPath::from_slots(vec![0, 0])).unwrap();
        assert!((v - Complex64::ONE).norm() < 1e-14);
    }

    #[test]
    fn kernel_is_lambda_eigenfunction() {
        let spec = samples::lopsided();
        let lambda = re(1.25);
        let table = solve_f_up(&spec, lambda, 0).unwrap();
        // Extend the arc beyond the tested ball so the kernel is
        // arc-constant at every tested vertex.
        let arc = VertexPath::from_slots(vec![0, 0, 0, 0, 0, 0]);
        let f = |v: &VertexPath| martin_kernel(&spec, &table, v, &arc).map(|j| j.value());
        for x in spec.vertices_to_depth(4) {
            let lhs = apply_p(&spec, f, &x).unwrap();
            let rhs = lambda * f(&x).unwrap();
            assert!((lhs - rhs).norm() < 1e-10, "eigen residual at {x}");
        }
    }

    #[test]
    fn rho_bracket_contains_known_values() {
        for (q, expect) in [(2u32, 2.0 * 2f64.sqrt() / 3.0), (3, 3f64.sqrt() / 2.0)] {
            let bracket = estimate_rho(&t_q(q)).unwrap();
            assert!(bracket.width() <= 1e-3, "width {}", bracket.width());
            assert!(
                bracket.lo <= expect && expect <= bracket.hi,
                "q={q}: [{}, {}] misses {expect}",
                bracket.lo,
                bracket.hi
            );
        }
    }

    #[test]
    fn group_identities_hold() {
        for model in [
            samples::srw_edge_model(),
            samples::oriented_edge_model(),
            samples::two_class_edge_model(),
        ] {
            for lambda in [1.2, 1.5] {
                let report = group_invariant_checks(&model, re(lambda)).unwrap();
                assert!(report.max_residual() < 1e-10, "residual {}", report.max_residual());
                assert!(report.g_nonzero());
            }
        }
    }
}
