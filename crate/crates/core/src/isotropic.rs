//! Closed forms for simple random walk on the homogeneous tree `T_q` and
//! the horocycle-basis representation of polyharmonic functions.

use num_complex::Complex64;

use crate::boundary::BoundaryDistribution;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::poly::PolyRepresentation;
use crate::tree::{TreeSpec, VertexPath};

/// Guard distance from the spectral segment `[-ρ, ρ]`.
pub const BRANCH_CUT_TOL: f64 = 1e-9;

/// Parameters of the isotropic walk: branching number `q >= 2` and a
/// spectral parameter off the segment `[-ρ, ρ]`.
#[derive(Clone, Copy, Debug)]
pub struct IsotropicParams {
    q: u32,
    lambda: Complex64,
}

impl IsotropicParams {
    pub fn new(q: u32, lambda: Complex64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidSpec(format!("isotropic q must be >= 2, got {q}")));
        }
        let rho = 2.0 * f64::from(q).sqrt() / f64::from(q + 1);
        let distance = distance_to_segment(lambda, rho);
        if distance <= BRANCH_CUT_TOL {
            return Err(Error::BranchCut { lambda, distance });
        }
        Ok(IsotropicParams { q, lambda })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// `ρ = 2 sqrt(q) / (q + 1)`.
    pub fn rho(&self) -> f64 {
        2.0 * f64::from(self.q).sqrt() / f64::from(self.q + 1)
    }

    pub fn spec(&self) -> TreeSpec {
        TreeSpec::homogeneous_srw(self.q)
    }
}

fn distance_to_segment(lambda: Complex64, rho: f64) -> f64 {
    if lambda.re.abs() <= rho {
        lambda.im.abs()
    } else {
        let endpoint = Complex64::new(rho.copysign(lambda.re), 0.0);
        (lambda - endpoint).norm()
    }
}

/// Closed-form first-passage jet
/// `F(λ) = ((q+1) λ / 2q) (1 - sqrt(1 - ρ²/λ²))`, decreasing branch.
pub fn closed_f(params: &IsotropicParams, order: usize) -> Result<Jet> {
    Ok(closed_f_detailed(params, order)?.0)
}

/// As [`closed_f`]; the flag reports whether the second square-root branch
/// had to be taken to satisfy the quadratic residual and `|F·F| < 1`.
pub fn closed_f_detailed(params: &IsotropicParams, order: usize) -> Result<(Jet, bool)> {
    let (f, s, flipped) = closed_f_parts(params, order)?;
    drop(s);
    Ok((f, flipped))
}

fn closed_f_parts(params: &IsotropicParams, order: usize) -> Result<(Jet, Jet, bool)> {
    let q = f64::from(params.q);
    let rho = params.rho();
    let lam = Jet::variable(params.lambda, order);
    let lam_sq = &lam * &lam;
    let inner = &Jet::one(order) - &Jet::constant((rho * rho).into(), order).try_div(&lam_sq)?;
    let principal = inner.try_sqrt()?;
    let scale = (q + 1.0) / (2.0 * q);
    let build = |s: &Jet| -> Jet {
        let one_minus = &Jet::one(order) - s;
        (&lam * &one_minus).scale(scale.into())
    };
    let acceptable = |f: &Jet| -> bool {
        let p = 1.0 / (q + 1.0);
        let fval = f.value();
        let residual = (params.lambda * fval - p - q * p * fval * fval).norm();
        residual <= 1e-10 && (fval * fval).norm() < 1.0
    };
    let f = build(&principal);
    if acceptable(&f) {
        return Ok((f, principal, false));
    }
    let other = -&principal;
    let f = build(&other);
    if acceptable(&f) {
        return Ok((f, other, true));
    }
    Err(Error::BranchCut {
        lambda: params.lambda,
        distance: distance_to_segment(params.lambda, rho),
    })
}

/// Horocycle index `hor(x, ξ) = d(x, x∧ξ) - d(o, x∧ξ)` for ends through
/// the arc below `arc`.
pub fn horocycle_index(x: &VertexPath, arc: &VertexPath) -> Result<i64> {
    if arc.is_strict_prefix_of(x) {
        return Err(Error::ArcTooCoarse {
            vertex: x.clone(),
            arc: arc.clone(),
        });
    }
    let c = x.confluent(arc);
    Ok(x.depth() as i64 - 2 * c.depth() as i64)
}

/// The derivative-kernel coefficients of the isotropic walk:
/// `K^(r)(x,ξ|λ) = K(x,ξ|λ) Σ_{k=1}^r hor(x,ξ)^k f_{k,r}(λ)` with
/// `f(λ) = -1 / (λ sqrt(1 - ρ²/λ²))`, plus the triangular matrix
/// `A_{n-1}(λ) = (f_{k,r})`.
#[derive(Clone, Debug)]
pub struct HorocycleCoeffs {
    order: usize,
    f: Jet,
    /// `table[r-1][k-1] = f_{k,r}(λ)` for `1 <= k <= r <= n-1`.
    table: Vec<Vec<Complex64>>,
}

impl HorocycleCoeffs {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Value of `f(λ)`.
    pub fn f_value(&self) -> Complex64 {
        self.f.value()
    }

    /// The jet of `f(λ)` (true derivatives over factorials).
    pub fn f_jet(&self) -> &Jet {
        &self.f
    }

    /// `f_{k,r}(λ)`; zero outside `1 <= k <= r`.
    pub fn coeff(&self, k: usize, r: usize) -> Complex64 {
        if k == 0 || r == 0 || k > r || r > self.table.len() {
            return Complex64::ZERO;
        }
        self.table[r - 1][k - 1]
    }

    /// Determinant of the upper-triangular `A_{n-1}(λ)`.
    pub fn matrix_determinant(&self) -> Complex64 {
        (1..=self.table.len())
            .map(|r| self.coeff(r, r))
            .product()
    }
}

/// Fills the triangular recursion
/// `f_{k,r} = f_{k,r-1}' + f · f_{k-1,r-1}` with `f_{1,1} = f`.
pub fn horocycle_coeffs(params: &IsotropicParams, n: usize) -> Result<HorocycleCoeffs> {
    assert!(n >= 1, "representation order is at least one");
    // Jet room for one derivative per recursion level.
    let base_order = n + 2;
    let (_, s, _) = closed_f_parts(params, base_order)?;
    let lam = Jet::variable(params.lambda, base_order);
    let f = -&Jet::one(base_order).try_div(&(&lam * &s))?;
    // Rows r = 1 .. n-1 as jets, so derivatives stay available.
    let mut rows: Vec<Vec<Jet>> = Vec::new();
    for r in 1..n {
        let mut row: Vec<Jet> = Vec::with_capacity(r);
        for k in 1..=r {
            let jet = if r == 1 {
                f.clone()
            } else {
                let prev = &rows[r - 2];
                let d_part = if k < r {
                    prev[k - 1].derivative()
                } else {
                    Jet::zero(base_order - r)
                };
                let f_part = if k >= 2 {
                    &f.truncated(d_part.order()) * &prev[k - 2].truncated(d_part.order())
                } else {
                    Jet::zero(d_part.order())
                };
                &d_part + &f_part
            };
            row.push(jet);
        }
        rows.push(row);
    }
    let table = rows
        .iter()
        .map(|row| row.iter().map(Jet::value).collect())
        .collect();
    Ok(HorocycleCoeffs {
        order: n,
        f: f.truncated(n.max(1)),
        table,
    })
}

/// Rewrites a representation into the horocycle basis:
/// `f(x) = Σ_k ∫ K(x,ξ|λ) hor(x,ξ)^k dν̄_k(ξ)`.
///
/// The stored `ν_r` pair with the signed kernels `(-1)^r K^(r)`, so the
/// true-derivative conversion `ν̄_k = Σ_{r>=k} f_{k,r} ν_r` picks up a
/// factor `(-1)^r` per order.
pub fn to_horocycle_basis(
    spec: &TreeSpec,
    params: &IsotropicParams,
    rep: &PolyRepresentation,
) -> Result<Vec<BoundaryDistribution>> {
    let n = rep.order();
    let coeffs = horocycle_coeffs(params, n)?;
    let mut out = Vec::with_capacity(n);
    out.push(rep.distributions[0].clone());
    for k in 1..n {
        let terms: Vec<(Complex64, &BoundaryDistribution)> = (k..n)
            .map(|r| {
                let sgn = if r % 2 == 0 { 1.0 } else { -1.0 };
                (coeffs.coeff(k, r) * sgn, &rep.distributions[r])
            })
            .collect();
        out.push(BoundaryDistribution::linear_combination(spec, &terms, 1e-6)?);
    }
    Ok(out)
}

/// Inverts [`to_horocycle_basis`] by back substitution on the triangular
/// coefficient matrix.
pub fn from_horocycle_basis(
    spec: &TreeSpec,
    params: &IsotropicParams,
    bars: &[BoundaryDistribution],
) -> Result<PolyRepresentation> {
    let n = bars.len();
    assert!(n >= 1, "at least the order-zero component is required");
    let coeffs = horocycle_coeffs(params, n)?;
    // Solve for the true-derivative distributions, highest order first.
    let mut true_dists: Vec<Option<BoundaryDistribution>> = vec![None; n];
    for r in (1..n).rev() {
        let mut terms: Vec<(Complex64, BoundaryDistribution)> =
            vec![(Complex64::ONE, bars[r].clone())];
        for (r2, maybe) in true_dists.iter().enumerate().skip(r + 1) {
            let nu = maybe.as_ref().expect("filled in decreasing order");
            terms.push((-coeffs.coeff(r, r2), nu.clone()));
        }
        let refs: Vec<(Complex64, &BoundaryDistribution)> =
            terms.iter().map(|(c, d)| (*c, d)).collect();
        let combo = BoundaryDistribution::linear_combination(spec, &refs, 1e-6)?;
        let inv = Complex64::ONE / coeffs.coeff(r, r);
        let scaled =
            BoundaryDistribution::linear_combination(spec, &[(inv, &combo)], 1e-6)?;
        true_dists[r] = Some(scaled);
    }
    let mut out = Vec::with_capacity(n);
    out.push(bars[0].clone());
    for (r, maybe) in true_dists.into_iter().enumerate().skip(1) {
        let nu = maybe.expect("orders 1..n filled");
        let sgn = if r % 2 == 0 { 1.0 } else { -1.0 };
        out.push(BoundaryDistribution::linear_combination(
            spec,
            &[(Complex64::from(sgn), &nu)],
            1e-6,
        )?);
    }
    PolyRepresentation::new(params.lambda(), out)
}

/// Evaluates `Σ_k ∫ K(x,ξ|λ) hor(x,ξ)^k dν̄_k(ξ)` at `x` through the
/// locally constant decomposition along the root geodesic.
pub fn eval_horocycle_basis(
    spec: &TreeSpec,
    table: &crate::green::JetTable,
    bars: &[BoundaryDistribution],
    x: &VertexPath,
) -> Result<Complex64> {
    let kernels = crate::green::kernels_along_path(spec, table, x)?;
    let ancestors = x.ancestors();
    let depth = x.depth() as i64;
    let mut acc = Complex64::ZERO;
    for (k, nu) in bars.iter().enumerate() {
        // On ∂T_{x_i} \ ∂T_{x_{i+1}} the kernel is K(x, x_i) and the
        // horocycle index is |x| - 2i.
        let mut total = Complex64::ZERO;
        for i in 0..ancestors.len() {
            let hor = depth - 2 * i as i64;
            let region_value = kernels[i].value() * Complex64::from((hor as f64).powi(k as i32));
            let mass = if i + 1 < ancestors.len() {
                nu.arc_value(spec, &ancestors[i])? - nu.arc_value(spec, &ancestors[i + 1])?
            } else {
                nu.arc_value(spec, &ancestors[i])?
            };
            total += region_value * mass;
        }
        acc += total;
    }
    Ok(acc)
}
