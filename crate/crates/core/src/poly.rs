//! Synthesis, verification and decomposition of λ-polyharmonic functions
//! via derivative kernels.
//!
//! The representation pairs each distribution `ν_r` with the signed
//! derivative kernel `D^r K = (-1)^r (d/dλ)^r K(·,ξ|λ)`.  Differentiating
//! the eigenequation `P K = λ K` gives `(λI - P) (d/dλ) K = -K`, so the
//! alternating sign is what makes the defect operator lower the order by
//! exactly `r`:  `(λI - P) D^r K = r D^{r-1} K`.

use num_complex::Complex64;

use crate::boundary::{self, BoundaryDistribution};
use crate::error::{Error, Result};
use crate::green::{self, JetTable};
use crate::jet::factorial;
use crate::tree::{TreeSpec, VertexPath};

/// Defect tolerance for accepting an input function as polyharmonic.
pub const DEFECT_TOL: f64 = 1e-8;

/// Ordered distributions `ν_0 .. ν_{n-1}` representing a λ-polyharmonic
/// function of order `n` through the signed derivative kernels.
#[derive(Clone, Debug)]
pub struct PolyRepresentation {
    pub lambda: Complex64,
    pub distributions: Vec<BoundaryDistribution>,
}

impl PolyRepresentation {
    pub fn new(lambda: Complex64, distributions: Vec<BoundaryDistribution>) -> Result<Self> {
        if distributions.is_empty() {
            return Err(Error::InvalidDistribution(
                "a polyharmonic representation has order at least one".into(),
            ));
        }
        Ok(PolyRepresentation {
            lambda,
            distributions,
        })
    }

    pub fn order(&self) -> usize {
        self.distributions.len()
    }
}

/// Signed derivative kernel value `D^r K(x, ∂T_arc | λ)`.
pub fn derivative_kernel(
    spec: &TreeSpec,
    table: &JetTable,
    x: &VertexPath,
    arc: &VertexPath,
    r: usize,
) -> Result<Complex64> {
    if r > table.order() {
        return Err(Error::OrderTooLow {
            have: table.order(),
            need: r,
        });
    }
    let jet = green::martin_kernel(spec, table, x, arc)?;
    Ok(sign(r) * jet.derivative_value(r))
}

fn sign(r: usize) -> f64 {
    if r.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Evaluates `f(x) = Σ_r ∫ D^r K(x,ξ|λ) dν_r(ξ)`.
pub fn synthesize(
    spec: &TreeSpec,
    table: &JetTable,
    rep: &PolyRepresentation,
    x: &VertexPath,
) -> Result<Complex64> {
    let n = rep.order();
    if table.order() + 1 < n {
        return Err(Error::OrderTooLow {
            have: table.order(),
            need: n - 1,
        });
    }
    let mut acc = Complex64::ZERO;
    for (r, nu) in rep.distributions.iter().enumerate() {
        let jet = boundary::poisson_transform(spec, table, nu, x)?;
        acc += sign(r) * jet.derivative_value(r);
    }
    Ok(acc)
}

/// `(λI - P)^n f (x)` as an exact finite sum over the radius-`n` ball.
pub fn apply_defect<F>(
    spec: &TreeSpec,
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
    let inner = |v: &VertexPath| apply_defect(spec, lambda, f, v, n - 1);
    Ok(lambda * inner(x)? - green::apply_p(spec, inner, x)?)
}

/// Recovers the representing distributions of a λ-polyharmonic function of
/// order `n` given on a ball of radius `radius` around the root.
///
/// Peels one order per step: `h = (λI - P)^{n-1} f / (n-1)!` is
/// λ-harmonic, its distribution is recovered on the requested carrier, the
/// `D^{n-1}`-term is subtracted and the remainder has order `n - 1`.
pub fn decompose<F>(
    spec: &TreeSpec,
    table: &JetTable,
    f: &F,
    radius: usize,
    n: usize,
    carrier_depth: usize,
) -> Result<PolyRepresentation>
where
    F: Fn(&VertexPath) -> Result<Complex64>,
{
    assert!(n >= 1, "order must be at least one");
    if table.order() + 1 < n {
        return Err(Error::OrderTooLow {
            have: table.order(),
            need: n - 1,
        });
    }
    if radius < n + carrier_depth {
        return Err(Error::InsufficientRadius {
            radius,
            required: n + carrier_depth,
        });
    }
    let lambda = table.lambda();
    for x in spec.vertices_to_depth((radius - n).min(carrier_depth + 1)) {
        let defect = apply_defect(spec, lambda, f, &x, n)?;
        if defect.norm() > DEFECT_TOL {
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
            for (r2, nu) in recovered.iter().enumerate() {
                if let Some(nu) = nu {
                    let jet = boundary::poisson_transform(spec, table, nu, x)?;
                    v -= sign(r2) * jet.derivative_value(r2);
                }
            }
            Ok(v)
        };
        let r_fact = factorial(r);
        let harmonic = |x: &VertexPath| -> Result<Complex64> {
            Ok(apply_defect(spec, lambda, &residue, x, r)? / r_fact)
        };
        let nu = boundary::recover_on_carrier(spec, table, harmonic, carrier_depth)?;
        recovered[r] = Some(nu);
    }
    PolyRepresentation::new(
        lambda,
        recovered.into_iter().map(|d| d.expect("all orders recovered")).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::solve_f_up;
    use crate::samples;
    use crate::tree::TreeSpec;
    use std::collections::BTreeMap;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sample_rep(spec: &TreeSpec, lambda: Complex64, n: usize) -> PolyRepresentation {
        // Distinct, non-trivial distributions per order.
        let mut dists = Vec::new();
        for r in 0..n {
            let mut values = BTreeMap::new();
            let total = Complex64::new(1.0 + r as f64 * 0.5, 0.3 - 0.2 * r as f64);
            values.insert(VertexPath::root(), total);
            let t = spec.type_of(&VertexPath::root()).unwrap();
            let k = spec.num_slots(t);
            let mut rest = total;
            for s in 0..k {
                let v = if s + 1 == k {
                    rest
                } else {
                    let v = total * re(0.2 + 0.15 * (s as f64 + r as f64));
                    rest -= v;
                    v
                };
                values.insert(VertexPath::root().child(s as u32), v);
            }
            dists.push(BoundaryDistribution::new(spec, values).unwrap());
        }
        PolyRepresentation::new(lambda, dists).unwrap()
    }

    #[test]
    fn order_one_reduces_to_poisson() {
        let spec = samples::lopsided();
        let table = solve_f_up(&spec, re(1.3), 2).unwrap();
        let rep = sample_rep(&spec, re(1.3), 1);
        let x = VertexPath::from_slots(vec![0, 1]);
        let direct = boundary::poisson_transform(&spec, &table, &rep.distributions[0], &x)
            .unwrap()
            .value();
        let synth = synthesize(&spec, &table, &rep, &x).unwrap();
        assert!((direct - synth).norm() < 1e-14);
    }

    #[test]
    fn kernel_defect_identity() {
        // (λI - P) D^r K = r D^{r-1} K for r <= 3.
        let spec = samples::lopsided();
        let lambda = re(1.35);
        let table = solve_f_up(&spec, lambda, 3).unwrap();
        let arc = VertexPath::from_slots(vec![1, 0, 0, 0, 0, 0]);
        for r in 1..=3usize {
            let f = |x: &VertexPath| derivative_kernel(&spec, &table, x, &arc, r);
            for x in spec.vertices_to_depth(3) {
                let lhs = apply_defect(&spec, lambda, &f, &x, 1).unwrap();
                let rhs = re(r as f64) * derivative_kernel(&spec, &table, &x, &arc, r - 1).unwrap();
                assert!((lhs - rhs).norm() < 1e-8, "r={r} at {x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn pure_first_order_term_has_harmonic_defect() {
        let spec = samples::lopsided();
        let lambda = re(1.4);
        let table = solve_f_up(&spec, lambda, 1).unwrap();
        let mut rep = sample_rep(&spec, lambda, 2);
        // ν_0 = 0.
        let mut zero = BTreeMap::new();
        zero.insert(VertexPath::root(), Complex64::ZERO);
        rep.distributions[0] = BoundaryDistribution::new(&spec, zero).unwrap();
        let f = |x: &VertexPath| synthesize(&spec, &table, &rep, x);
        for x in spec.vertices_to_depth(3) {
            let lhs = apply_defect(&spec, lambda, &f, &x, 1).unwrap();
            let rhs = boundary::poisson_transform(&spec, &table, &rep.distributions[1], &x)
                .unwrap()
                .value();
            assert!((lhs - rhs).norm() < 1e-8, "at {x}");
        }
    }

    #[test]
    fn synthesized_functions_are_annihilated() {
        let spec = samples::lopsided();
        let lambda = re(1.3);
        let table = solve_f_up(&spec, lambda, 3).unwrap();
        for n in 1..=3usize {
            let rep = sample_rep(&spec, lambda, n);
            let f = |x: &VertexPath| synthesize(&spec, &table, &rep, x);
            for x in spec.vertices_to_depth(5 - n) {
                let defect = apply_defect(&spec, lambda, &f, &x, n).unwrap();
                assert!(defect.norm() < 1e-8, "n={n} at {x}: {defect}");
            }
        }
    }

    #[test]
    fn defect_examples() {
        let spec = samples::lopsided();
        let lambda = re(1.45);
        let table = solve_f_up(&spec, lambda, 3).unwrap();
        // λ-harmonic input: defect vanishes.
        let arc = VertexPath::from_slots(vec![0, 0, 0, 0, 0]);
        let h = |x: &VertexPath| green::martin_kernel(&spec, &table, x, &arc).map(|j| j.value());
        let d = apply_defect(&spec, lambda, &h, &VertexPath::root(), 1).unwrap();
        assert!(d.norm() < 1e-10);
        // Synthesized order-3 input: two defects leave a harmonic remainder.
        let rep = sample_rep(&spec, lambda, 3);
        let f = |x: &VertexPath| synthesize(&spec, &table, &rep, x);
        let g = |x: &VertexPath| apply_defect(&spec, lambda, &f, x, 2);
        for x in spec.vertices_to_depth(2) {
            let residual = apply_defect(&spec, lambda, &g, &x, 1).unwrap();
            assert!(residual.norm() < 1e-8, "at {x}");
        }
    }

    #[test]
    fn decompose_round_trips_distributions() {
        let spec = samples::lopsided();
        let lambda = re(1.3);
        let table = solve_f_up(&spec, lambda, 3).unwrap();
        for n in 1..=3usize {
            let rep = sample_rep(&spec, lambda, n);
            let f = |x: &VertexPath| synthesize(&spec, &table, &rep, x);
            let back = decompose(&spec, &table, &f, n + 3, n, 3).unwrap();
            assert_eq!(back.order(), n);
            for (r, nu) in back.distributions.iter().enumerate() {
                for x in spec.vertices_to_depth(2) {
                    let got = nu.arc_value(&spec, &x).unwrap();
                    let want = rep.distributions[r].arc_value(&spec, &x).unwrap();
                    assert!(
                        (got - want).norm() < 1e-8,
                        "n={n} r={r} arc {x}: {got} vs {want}"
                    );
                }
            }
            // And the functions agree after the round trip.
            for x in spec.vertices_to_depth(2) {
                let got = synthesize(&spec, &table, &back, &x).unwrap();
                let want = f(&x).unwrap();
                assert!((got - want).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn kernel_self_representation() {
        let spec = TreeSpec::homogeneous_srw(2);
        let lambda = re(1.4);
        let table = solve_f_up(&spec, lambda, 3).unwrap();
        let xi = VertexPath::from_slots(vec![0, 0, 0, 0, 0, 0, 0, 0]);
        let f = |x: &VertexPath| derivative_kernel(&spec, &table, x, &xi, 2);
        let rep = decompose(&spec, &table, &f, 6, 3, 3).unwrap();
        for x in spec.vertices_to_depth(3) {
            let v2 = rep.distributions[2].arc_value(&spec, &x).unwrap();
            let expect = if x.is_prefix_of(&xi) { 1.0 } else { 0.0 };
            assert!((v2 - re(expect)).norm() < 1e-8, "nu_2 at {x}: {v2}");
            for r in 0..2 {
                let v = rep.distributions[r].arc_value(&spec, &x).unwrap();
                assert!(v.norm() < 1e-8, "nu_{r} at {x}: {v}");
            }
        }
    }

    #[test]
    fn non_polyharmonic_input_rejected() {
        let spec = samples::lopsided();
        let table = solve_f_up(&spec, re(1.3), 2).unwrap();
        let f = |x: &VertexPath| Ok(re(x.depth() as f64 * x.depth() as f64).exp());
        assert!(matches!(
            decompose(&spec, &table, &f, 5, 2, 2),
            Err(Error::NotPolyharmonic { .. })
        ));
        let g = |_: &VertexPath| Ok(Complex64::ONE);
        assert!(matches!(
            decompose(&spec, &table, &g, 3, 2, 2),
            Err(Error::InsufficientRadius { .. })
        ));
    }
}
