//! "Forward only" transition operators: kernels, the Poisson bijection,
//! polyharmonic representation and the vertex-power factorization.
//!
//! A forward operator moves strictly away from the root, so every
//! first-passage quantity collapses to a product along the unique ray and
//! all identities here are exact finite arithmetic.  Kernel derivatives are
//! the literal `d^r/dλ^r` of `λ^{|x|}/q^{(|x|)}(o,x)`: a falling factorial
//! times `λ^{|x|-r}`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::boundary::BoundaryDistribution;
use crate::error::{Error, Result};
use crate::tree::{TreeSpec, VertexPath};

/// Cone-type description of a forward operator: a [`TreeSpec`] whose types
/// all have `up_prob = 0` and forward rows summing to one.
#[derive(Clone, Debug)]
pub struct ForwardSpec {
    spec: TreeSpec,
}

impl ForwardSpec {
    pub fn new(spec: TreeSpec) -> Result<Self> {
        let fwd = ForwardSpec { spec };
        let report = fwd.validate();
        if !report.is_empty() {
            return Err(Error::InvalidSpec(report.join("; ")));
        }
        Ok(fwd)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ForwardSpec::new(TreeSpec::from_json(text)?)
    }

    pub fn tree(&self) -> &TreeSpec {
        &self.spec
    }

    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        for idx in 0..self.spec.num_types() {
            let name = self.spec.type_name(idx);
            if self.spec.up_prob(idx) != 0.0 {
                report.push(format!(
                    "forward type {name:?} has up_prob {}",
                    self.spec.up_prob(idx)
                ));
            }
            if self.spec.num_slots(idx) == 0 {
                report.push(format!("forward type {name:?} has no slots"));
            }
            let mut sum = 0.0;
            for s in 0..self.spec.num_slots(idx) {
                let (_, q) = self.spec.slot(idx, s);
                if q <= 0.0 || q > 1.0 {
                    report.push(format!(
                        "forward type {name:?} slot {s} has probability {q} outside (0, 1]"
                    ));
                }
                sum += q;
            }
            if (sum - 1.0).abs() > crate::tree::STOCHASTIC_TOL {
                report.push(format!("forward type {name:?} row sum != 1: found {sum}"));
            }
        }
        report
    }

    /// One application of the forward operator: `Qf(x) = Σ_s q(x, xs) f(xs)`.
    pub fn apply_q<F>(&self, f: F, x: &VertexPath) -> Result<Complex64>
    where
        F: Fn(&VertexPath) -> Result<Complex64>,
    {
        let t = self.spec.type_of(x)?;
        let mut acc = Complex64::ZERO;
        for s in 0..self.spec.num_slots(t) {
            let (_, q) = self.spec.slot(t, s);
            acc += Complex64::from(q) * f(&x.child(s as u32))?;
        }
        Ok(acc)
    }

    /// `(λI - Q)^n f (x)`, exact.
    pub fn apply_defect<F>(
        &self,
        lambda: Complex64,
        f: &F,
        x: &VertexPath,
        n: usize,
    ) -> Result<Complex64>
    where
        F: Fn(&VertexPath) -> Result<Complex64>,
    {
        if n == 0 {
            return f(x);
        }
        let inner = |v: &VertexPath| self.apply_defect(lambda, f, v, n - 1);
        Ok(lambda * inner(x)? - self.apply_q(inner, x)?)
    }
}

/// `q^(|x|)(o, x)`: the product of forward probabilities along the ray from
/// the root, which is also the walk's boundary measure of the arc at `x`.
pub fn forward_mass(fwd: &ForwardSpec, x: &VertexPath) -> Result<f64> {
    let spec = fwd.tree();
    let mut mass = 1.0;
    let mut t = spec.root_index();
    for &slot in x.slots() {
        let slot = slot as usize;
        if slot >= spec.num_slots(t) {
            return Err(Error::InvalidPath {
                path: x.clone(),
                reason: format!("slot {slot} out of range"),
            });
        }
        let (child, q) = spec.slot(t, slot);
        mass *= q;
        t = child;
    }
    Ok(mass)
}

/// The walk's own boundary measure on the complete carrier of `depth`.
pub fn boundary_measure(fwd: &ForwardSpec, depth: usize) -> Result<BoundaryDistribution> {
    let mut values = BTreeMap::new();
    for x in fwd.tree().vertices_to_depth(depth) {
        let mass = Complex64::from(forward_mass(fwd, &x)?);
        values.insert(x, mass);
    }
    BoundaryDistribution::new(fwd.tree(), values)
}

/// `n (n-1) ... (n-r+1)` as a float; one for `r = 0`.
pub fn falling_factorial(n: i64, r: usize) -> f64 {
    (0..r).map(|i| (n - i as i64) as f64).product()
}

/// Derivative kernel `K_Q^(r)(x, ∂T_arc | λ)`:
/// `|x|(|x|-1)...(|x|-r+1) λ^{|x|-r} / q^(|x|)(o,x)` when `x` lies on the
/// ray to the arc, zero when the arc is elsewhere.
pub fn forward_kernel(
    fwd: &ForwardSpec,
    x: &VertexPath,
    arc: &VertexPath,
    lambda: Complex64,
    r: usize,
) -> Result<Complex64> {
    if lambda == Complex64::ZERO {
        return Err(Error::ZeroLambda);
    }
    if arc.is_strict_prefix_of(x) {
        return Err(Error::ArcTooCoarse {
            vertex: x.clone(),
            arc: arc.clone(),
        });
    }
    if !x.is_prefix_of(arc) {
        return Ok(Complex64::ZERO);
    }
    let n = x.depth();
    if r > n {
        return Ok(Complex64::ZERO);
    }
    let mass = forward_mass(fwd, x)?;
    Ok(Complex64::from(falling_factorial(n as i64, r)) * lambda.powu((n - r) as u32) / mass)
}

/// Poisson transform of `σ`: `h(x) = (λ^{|x|} / q^(|x|)(o,x)) σ(∂T_x)`,
/// always λ-harmonic for `Q`.
pub fn forward_poisson(
    fwd: &ForwardSpec,
    sigma: &BoundaryDistribution,
    lambda: Complex64,
    x: &VertexPath,
) -> Result<Complex64> {
    if lambda == Complex64::ZERO {
        return Err(Error::ZeroLambda);
    }
    let mass = forward_mass(fwd, x)?;
    Ok(lambda.powu(x.depth() as u32) / mass * sigma.arc_value(fwd.tree(), x)?)
}

/// Inverts [`forward_poisson`]: `σ(∂T_x) = q^(|x|)(o,x) λ^{-|x|} h(x)`.
pub fn forward_recover<H>(
    fwd: &ForwardSpec,
    h: H,
    lambda: Complex64,
    x: &VertexPath,
) -> Result<Complex64>
where
    H: Fn(&VertexPath) -> Result<Complex64>,
{
    if lambda == Complex64::ZERO {
        return Err(Error::ZeroLambda);
    }
    let mass = forward_mass(fwd, x)?;
    Ok(Complex64::from(mass) / lambda.powu(x.depth() as u32) * h(x)?)
}

/// `f(x) = Σ_r ∫ K_Q^(r)(x,ξ|λ) dσ_r(ξ)`; every integral collapses to the
/// single arc below `x`.
pub fn forward_poly_synthesize(
    fwd: &ForwardSpec,
    sigmas: &[BoundaryDistribution],
    lambda: Complex64,
    x: &VertexPath,
) -> Result<Complex64> {
    if lambda == Complex64::ZERO {
        return Err(Error::ZeroLambda);
    }
    let n = x.depth();
    let mass = forward_mass(fwd, x)?;
    let mut acc = Complex64::ZERO;
    for (r, sigma) in sigmas.iter().enumerate() {
        if r > n {
            continue;
        }
        acc += Complex64::from(falling_factorial(n as i64, r))
            * lambda.powu((n - r) as u32)
            * sigma.arc_value(fwd.tree(), x)?;
    }
    Ok(acc / mass)
}

/// Recovers `σ_0 .. σ_{n-1}` from a Q-polyharmonic function of order `n`,
/// peeling one order per step with `(λI - Q)` defects.
///
/// The true-derivative kernels obey `(λI - Q) K_Q^(r) = -r K_Q^(r-1)`, so
/// the harmonic top layer is `(-1)^r (λI - Q)^r f / r!`.
pub fn forward_decompose<F>(
    fwd: &ForwardSpec,
    lambda: Complex64,
    f: &F,
    radius: usize,
    n: usize,
    carrier_depth: usize,
) -> Result<Vec<BoundaryDistribution>>
where
    F: Fn(&VertexPath) -> Result<Complex64>,
{
    assert!(n >= 1, "order must be at least one");
    if lambda == Complex64::ZERO {
        return Err(Error::ZeroLambda);
    }
    if radius < n + carrier_depth {
        return Err(Error::InsufficientRadius {
            radius,
            required: n + carrier_depth,
        });
    }
    for x in fwd.tree().vertices_to_depth(carrier_depth) {
        let defect = fwd.apply_defect(lambda, f, &x, n)?;
        if defect.norm() > 1e-8 {
            return Err(Error::NotPolyharmonic {
                order: n,
                defect: defect.norm(),
                vertex: x,
            });
        }
    }
    let mut recovered: Vec<Option<BoundaryDistribution>> = vec![None; n];
    for r in (0..n).rev() {
        let residue = |x: &VertexPath| -> Result<Complex64> {
            let mut v = f(x)?;
            for (r2, sigma) in recovered.iter().enumerate() {
                if let Some(sigma) = sigma {
                    let kernel = Complex64::from(falling_factorial(x.depth() as i64, r2))
                        * lambda.powu(x.depth().saturating_sub(r2) as u32);
                    if r2 <= x.depth() {
                        v -= kernel * sigma.arc_value(fwd.tree(), x)? / forward_mass(fwd, x)?;
                    }
                }
            }
            Ok(v)
        };
        let r_fact = crate::jet::factorial(r);
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let mut values = BTreeMap::new();
        for x in fwd.tree().vertices_to_depth(carrier_depth) {
            let h = fwd.apply_defect(lambda, &residue, &x, r)? * sign / r_fact;
            let sigma = forward_recover(fwd, |_| Ok(h), lambda, &x)?;
            values.insert(x, sigma);
        }
        recovered[r] = Some(BoundaryDistribution::with_tolerance(
            fwd.tree(),
            values,
            1e-8,
        )?);
    }
    Ok(recovered
        .into_iter()
        .map(|d| d.expect("all orders recovered"))
        .collect())
}

/// Coefficients `a_{k,r}` of `t(t-1)...(t-r+1) = Σ_k a_{k,r} t^k`
/// (signed Stirling numbers of the first kind), upper triangular with unit
/// diagonal.
#[derive(Clone, Debug)]
pub struct FallingFactorialMatrix {
    /// `rows[r-1][k-1] = a_{k,r}` for `1 <= k <= r`.
    rows: Vec<Vec<i64>>,
}

impl FallingFactorialMatrix {
    pub fn new(order: usize) -> FallingFactorialMatrix {
        let mut rows: Vec<Vec<i64>> = Vec::new();
        let mut poly = vec![0i64, 1]; // t
        for r in 1..=order {
            if r > 1 {
                // Multiply by (t - (r-1)).
                let shift = (r - 1) as i64;
                let mut next = vec![0i64; poly.len() + 1];
                for (k, &c) in poly.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= shift * c;
                }
                poly = next;
            }
            rows.push(poly[1..].to_vec());
        }
        FallingFactorialMatrix { rows }
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    /// `a_{k,r}`; zero outside `1 <= k <= r`.
    pub fn coeff(&self, k: usize, r: usize) -> i64 {
        if k == 0 || r == 0 || r > self.rows.len() || k > r {
            return 0;
        }
        self.rows[r - 1][k - 1]
    }
}

/// The vertex-power form `f(x) = Σ_k |x|^k h_k(x)` of a forward
/// representation, with each `h_k` the Poisson transform of
/// `σ̄_k = Σ_{r >= k} a_{k,r} λ^{-r} σ_r`.
#[derive(Clone, Debug)]
pub struct VertexPowerBasis {
    pub lambda: Complex64,
    pub sigma_bars: Vec<BoundaryDistribution>,
}

pub fn to_vertex_power_basis(
    fwd: &ForwardSpec,
    sigmas: &[BoundaryDistribution],
    lambda: Complex64,
) -> Result<VertexPowerBasis> {
    if lambda == Complex64::ZERO {
        return Err(Error::ZeroLambda);
    }
    let n = sigmas.len();
    let matrix = FallingFactorialMatrix::new(n.saturating_sub(1));
    let mut bars = Vec::with_capacity(n);
    for k in 0..n {
        let mut terms: Vec<(Complex64, &BoundaryDistribution)> = Vec::new();
        if k == 0 {
            terms.push((Complex64::ONE, &sigmas[0]));
        } else {
            for (r, sigma) in sigmas.iter().enumerate().skip(k) {
                let factor = Complex64::from(matrix.coeff(k, r) as f64) / lambda.powu(r as u32);
                terms.push((factor, sigma));
            }
        }
        bars.push(BoundaryDistribution::linear_combination(
            fwd.tree(),
            &terms,
            1e-9,
        )?);
    }
    Ok(VertexPowerBasis {
        lambda,
        sigma_bars: bars,
    })
}

impl VertexPowerBasis {
    /// The λ-harmonic component `h_k`.
    pub fn component(&self, fwd: &ForwardSpec, k: usize, x: &VertexPath) -> Result<Complex64> {
        forward_poisson(fwd, &self.sigma_bars[k], self.lambda, x)
    }

    /// `Σ_k |x|^k h_k(x)`.
    pub fn eval(&self, fwd: &ForwardSpec, x: &VertexPath) -> Result<Complex64> {
        let mut acc = Complex64::ZERO;
        let depth = x.depth() as f64;
        for (k, _) in self.sigma_bars.iter().enumerate() {
            acc += Complex64::from(depth.powi(k as i32)) * self.component(fwd, k, x)?;
        }
        Ok(acc)
    }

    /// Inverts the triangular conversion back to `σ_0 .. σ_{n-1}`.
    pub fn to_sigmas(&self, fwd: &ForwardSpec) -> Result<Vec<BoundaryDistribution>> {
        let n = self.sigma_bars.len();
        let matrix = FallingFactorialMatrix::new(n.saturating_sub(1));
        let mut sigmas: Vec<Option<BoundaryDistribution>> = vec![None; n];
        for r in (1..n).rev() {
            let mut terms: Vec<(Complex64, BoundaryDistribution)> =
                vec![(Complex64::ONE, self.sigma_bars[r].clone())];
            for (r2, filled) in sigmas.iter().enumerate().skip(r + 1) {
                let sigma = filled.as_ref().expect("filled in decreasing order");
                let factor =
                    Complex64::from(matrix.coeff(r, r2) as f64) / self.lambda.powu(r2 as u32);
                terms.push((-factor, sigma.clone()));
            }
            let refs: Vec<(Complex64, &BoundaryDistribution)> =
                terms.iter().map(|(c, d)| (*c, d)).collect();
            let combo = BoundaryDistribution::linear_combination(fwd.tree(), &refs, 1e-9)?;
            // Diagonal entry a_{r,r} λ^{-r} = λ^{-r}.
            let scaled = BoundaryDistribution::linear_combination(
                fwd.tree(),
                &[(self.lambda.powu(r as u32), &combo)],
                1e-9,
            )?;
            sigmas[r] = Some(scaled);
        }
        let mut out = Vec::with_capacity(n);
        out.push(self.sigma_bars[0].clone());
        for filled in sigmas.into_iter().skip(1) {
            out.push(filled.expect("orders 1..n filled"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn binary() -> ForwardSpec {
        ForwardSpec::new(samples::binary_forward()).unwrap()
    }

    fn skewed() -> ForwardSpec {
        ForwardSpec::new(samples::skewed_forward()).unwrap()
    }

    #[test]
    fn backward_probability_rejected() {
        assert!(ForwardSpec::new(samples::lopsided()).is_err());
    }

    #[test]
    fn forward_mass_examples() {
        let fwd = binary();
        assert_eq!(forward_mass(&fwd, &VertexPath::root()).unwrap(), 1.0);
        let x = VertexPath::from_slots(vec![0, 1, 1]);
        assert!((forward_mass(&fwd, &x).unwrap() - 0.125).abs() < 1e-15);
        // Additivity: children masses sum to the parent mass.
        let fwd = skewed();
        for x in fwd.tree().vertices_to_depth(3) {
            let t = fwd.tree().type_of(&x).unwrap();
            let sum: f64 = (0..fwd.tree().num_slots(t))
                .map(|s| forward_mass(&fwd, &x.child(s as u32)).unwrap())
                .sum();
            assert!((sum - forward_mass(&fwd, &x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_examples() {
        let fwd = binary();
        let arc = VertexPath::from_slots(vec![0, 1, 0]);
        assert_eq!(
            forward_kernel(&fwd, &VertexPath::root(), &arc, re(1.0), 0).unwrap(),
            Complex64::ONE
        );
        let x = VertexPath::from_slots(vec![0, 1]);
        assert!(
            (forward_kernel(&fwd, &x, &arc, re(1.0), 0).unwrap() - re(4.0)).norm() < 1e-14
        );
        assert!(
            (forward_kernel(&fwd, &x, &arc, re(1.0), 1).unwrap() - re(8.0)).norm() < 1e-14
        );
        // Off the ray the kernel vanishes.
        let y = VertexPath::from_slots(vec![1]);
        assert_eq!(forward_kernel(&fwd, &y, &arc, re(1.0), 0).unwrap(), Complex64::ZERO);
        // Below the arc the kernel is not arc-constant.
        let deep = VertexPath::from_slots(vec![0, 1, 0, 0]);
        assert!(matches!(
            forward_kernel(&fwd, &deep, &arc, re(1.0), 0),
            Err(Error::ArcTooCoarse { .. })
        ));
        assert!(matches!(
            forward_kernel(&fwd, &x, &arc, Complex64::ZERO, 0),
            Err(Error::ZeroLambda)
        ));
    }

    #[test]
    fn kernel_is_q_harmonic() {
        let fwd = skewed();
        let lambda = Complex64::new(0.8, 0.3);
        let arc = VertexPath::from_slots(vec![1, 0, 1, 1, 0, 0]);
        let f = |x: &VertexPath| forward_kernel(&fwd, x, &arc, lambda, 0);
        for x in fwd.tree().vertices_to_depth(4) {
            let qf = fwd.apply_q(f, &x).unwrap();
            let expect = lambda * f(&x).unwrap();
            assert!((qf - expect).norm() < 1e-12, "at {x}");
        }
    }

    #[test]
    fn own_measure_gives_constant_one() {
        let fwd = skewed();
        let nu = boundary_measure(&fwd, 4).unwrap();
        for x in fwd.tree().vertices_to_depth(4) {
            let h = forward_poisson(&fwd, &nu, re(1.0), &x).unwrap();
            assert!((h - Complex64::ONE).norm() < 1e-13, "at {x}");
        }
    }

    #[test]
    fn poisson_bijection_is_exact() {
        let fwd = skewed();
        let lambda = Complex64::new(1.1, -0.4);
        let mut values = BTreeMap::new();
        values.insert(VertexPath::root(), Complex64::new(0.7, 0.1));
        values.insert(VertexPath::from_slots(vec![0]), Complex64::new(0.2, 0.4));
        values.insert(VertexPath::from_slots(vec![1]), Complex64::new(0.5, -0.3));
        let sigma = BoundaryDistribution::new(fwd.tree(), values).unwrap();
        let h = |x: &VertexPath| forward_poisson(&fwd, &sigma, lambda, x);
        // h is Q-harmonic and recovery inverts the transform exactly.
        for x in fwd.tree().vertices_to_depth(3) {
            let qh = fwd.apply_q(h, &x).unwrap();
            assert!((qh - lambda * h(&x).unwrap()).norm() < 1e-12);
            let back = forward_recover(&fwd, h, lambda, &x).unwrap();
            let want = sigma.arc_value(fwd.tree(), &x).unwrap();
            assert!((back - want).norm() < 1e-12, "at {x}");
        }
    }

    fn sample_sigmas(fwd: &ForwardSpec, n: usize) -> Vec<BoundaryDistribution> {
        let spec = fwd.tree();
        (0..n)
            .map(|r| {
                let mut values = BTreeMap::new();
                let total = Complex64::new(1.0 - 0.2 * r as f64, 0.15 * (r as f64 + 1.0));
                values.insert(VertexPath::root(), total);
                let t = spec.type_of(&VertexPath::root()).unwrap();
                let m = spec.num_slots(t);
                let mut rest = total;
                for s in 0..m {
                    let v = if s + 1 == m {
                        rest
                    } else {
                        let v = total * re(0.25 + 0.1 * (s as f64 + r as f64));
                        rest -= v;
                        v
                    };
                    values.insert(VertexPath::root().child(s as u32), v);
                }
                BoundaryDistribution::new(spec, values).unwrap()
            })
            .collect()
    }

    #[test]
    fn synthesis_reduces_and_annihilates() {
        let fwd = skewed();
        let lambda = re(1.3);
        let sigmas = sample_sigmas(&fwd, 3);
        // n = 1 is the plain Poisson transform.
        let x = VertexPath::from_slots(vec![1, 0]);
        let a = forward_poly_synthesize(&fwd, &sigmas[..1], lambda, &x).unwrap();
        let b = forward_poisson(&fwd, &sigmas[0], lambda, &x).unwrap();
        assert!((a - b).norm() < 1e-14);
        // (λI - Q)^n annihilates an order-n synthesis.
        for n in 1..=3usize {
            let f = |x: &VertexPath| forward_poly_synthesize(&fwd, &sigmas[..n], lambda, x);
            for x in fwd.tree().vertices_to_depth(4) {
                let defect = fwd.apply_defect(lambda, &f, &x, n).unwrap();
                assert!(defect.norm() < 1e-10, "n={n} at {x}: {defect}");
            }
        }
    }

    #[test]
    fn one_defect_lowers_one_order_with_sign() {
        // With true-derivative kernels, (λI - Q) ∫ K_Q' dσ_1 = -∫ K_Q dσ_1.
        let fwd = binary();
        let lambda = re(1.2);
        let sigmas = sample_sigmas(&fwd, 2);
        let zero = {
            let mut values = BTreeMap::new();
            values.insert(VertexPath::root(), Complex64::ZERO);
            values.insert(VertexPath::from_slots(vec![0]), Complex64::ZERO);
            values.insert(VertexPath::from_slots(vec![1]), Complex64::ZERO);
            BoundaryDistribution::new(fwd.tree(), values).unwrap()
        };
        let pair = [zero, sigmas[1].clone()];
        let f = |x: &VertexPath| forward_poly_synthesize(&fwd, &pair, lambda, x);
        for x in fwd.tree().vertices_to_depth(3) {
            let lhs = fwd.apply_defect(lambda, &f, &x, 1).unwrap();
            let rhs = -forward_poisson(&fwd, &pair[1], lambda, &x).unwrap();
            assert!((lhs - rhs).norm() < 1e-12, "at {x}");
        }
    }

    #[test]
    fn decompose_round_trips() {
        let fwd = skewed();
        let lambda = re(0.9);
        for n in 1..=3usize {
            let sigmas = sample_sigmas(&fwd, n);
            let f = |x: &VertexPath| forward_poly_synthesize(&fwd, &sigmas, lambda, x);
            let back = forward_decompose(&fwd, lambda, &f, n + 3, n, 3).unwrap();
            for (r, sigma) in back.iter().enumerate() {
                for x in fwd.tree().vertices_to_depth(3) {
                    let got = sigma.arc_value(fwd.tree(), &x).unwrap();
                    let want = sigmas[r].arc_value(fwd.tree(), &x).unwrap();
                    assert!((got - want).norm() < 1e-10, "n={n} r={r} at {x}");
                }
            }
        }
    }

    #[test]
    fn falling_factorial_coefficients() {
        let m = FallingFactorialMatrix::new(3);
        // t(t-1) = -t + t².
        assert_eq!(m.coeff(1, 2), -1);
        assert_eq!(m.coeff(2, 2), 1);
        // t(t-1)(t-2) = 2t - 3t² + t³.
        assert_eq!(m.coeff(1, 3), 2);
        assert_eq!(m.coeff(2, 3), -3);
        assert_eq!(m.coeff(3, 3), 1);
        for r in 1..=3 {
            assert_eq!(m.coeff(r, r), 1);
        }
    }

    #[test]
    fn vertex_power_basis_round_trip() {
        let fwd = skewed();
        let lambda = Complex64::new(1.4, 0.2);
        let sigmas = sample_sigmas(&fwd, 3);
        let basis = to_vertex_power_basis(&fwd, &sigmas, lambda).unwrap();
        // Σ_k |x|^k h_k matches the synthesis everywhere.
        for x in fwd.tree().vertices_to_depth(4) {
            let a = basis.eval(&fwd, &x).unwrap();
            let b = forward_poly_synthesize(&fwd, &sigmas, lambda, &x).unwrap();
            assert!((a - b).norm() < 1e-11, "at {x}: {a} vs {b}");
        }
        // And the conversion inverts exactly.
        let back = basis.to_sigmas(&fwd).unwrap();
        for (r, sigma) in back.iter().enumerate() {
            for x in fwd.tree().vertices_to_depth(3) {
                let got = sigma.arc_value(fwd.tree(), &x).unwrap();
                let want = sigmas[r].arc_value(fwd.tree(), &x).unwrap();
                assert!((got - want).norm() < 1e-12, "r={r} at {x}");
            }
        }
    }
}
