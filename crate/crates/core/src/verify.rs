//! Desk-scale verification suites wrapping the module-level property
//! checks, used by the command-line `verify` subcommand.

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::boundary::{self, BoundaryDistribution, HarmonicEvaluator};
use crate::error::Result;
use crate::forward::{self, ForwardSpec};
use crate::green::{self, JetTable};
use crate::isotropic::{self, IsotropicParams};
use crate::oracle::TruncatedBall;
use crate::poly::{self, PolyRepresentation};
use crate::tree::{EdgeTypeModel, TreeSpec, VertexPath};

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

fn check(name: impl Into<String>, residual: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: residual <= tolerance,
        residual,
        tolerance,
        detail,
    }
}

pub fn all_passed(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn random_vertex(spec: &TreeSpec, rng: &mut StdRng, max_depth: usize) -> VertexPath {
    let depth = rng.random_range(0..=max_depth);
    let mut path = VertexPath::root();
    for _ in 0..depth {
        let t = spec.type_of(&path).expect("path stays valid");
        let slot = rng.random_range(0..spec.num_slots(t)) as u32;
        path = path.child(slot);
    }
    path
}

fn random_distribution(spec: &TreeSpec, rng: &mut StdRng, depth: usize) -> BoundaryDistribution {
    let mut values = std::collections::BTreeMap::new();
    let total = Complex64::new(rng.random_range(0.5..1.5), rng.random_range(-0.5..0.5));
    values.insert(VertexPath::root(), total);
    let mut frontier = vec![(VertexPath::root(), total)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (path, mass) in frontier {
            let t = spec.type_of(&path).expect("path stays valid");
            let m = spec.num_slots(t);
            let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
            let sum: f64 = weights.iter().sum();
            for (s, w) in weights.iter().enumerate() {
                let child = path.child(s as u32);
                let share = mass * (w / sum);
                values.insert(child.clone(), share);
                next.push((child, share));
            }
        }
        frontier = next;
    }
    BoundaryDistribution::new(spec, values).expect("random splits are additive")
}

/// Eigen-equation suite: `P K(·, arc | λ) = λ K` on a radius-4 ball.
pub fn eigen_suite(
    spec: &TreeSpec,
    lambda: Complex64,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let table = green::solve_f_up(spec, lambda, 0)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for case in 0..10 {
        // Extend the arc beyond the ball so the kernel is arc-constant on
        // every tested vertex.
        let mut arc = random_vertex(spec, &mut rng, 2);
        while arc.depth() < 6 {
            let t = spec.type_of(&arc)?;
            let slot = rng.random_range(0..spec.num_slots(t)) as u32;
            arc = arc.child(slot);
        }
        let f = |v: &VertexPath| green::martin_kernel(spec, &table, v, &arc).map(|j| j.value());
        let mut worst = 0.0f64;
        for x in spec.vertices_to_depth(4) {
            let lhs = green::apply_p(spec, f, &x)?;
            let rhs = lambda * f(&x)?;
            worst = worst.max((lhs - rhs).norm());
        }
        out.push(check(
            format!("eigen/arc_{case}"),
            worst,
            tolerance,
            format!("arc {arc}, radius-4 ball"),
        ));
    }
    Ok(out)
}

/// Oracle suite: truncated Green series against `G = F·G` from the solver.
pub fn oracle_suite(
    spec: &TreeSpec,
    lambda: Complex64,
    seed: u64,
    horizon: usize,
    max_ball: usize,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let bracket = green::estimate_rho(spec)?;
    let table = green::solve_f_up(spec, lambda, 0)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for case in 0..5 {
        let x = random_vertex(spec, &mut rng, 2);
        let y = random_vertex(spec, &mut rng, 2);
        let ball = TruncatedBall::with_limit(spec, &x, horizon, max_ball)?;
        let series = ball.green_series(&y, lambda, horizon, bracket.hi)?;
        let solver = green::green_pair(spec, &table, &x, &y)?.value();
        let diff = (series.value - solver).norm();
        out.push(check(
            format!("oracle/green_{case}"),
            diff,
            series.tail_bound + tolerance,
            format!("x={x} y={y} N={horizon} tail={:.3e}", series.tail_bound),
        ));
    }
    Ok(out)
}

/// Round-trip suite for the boundary representation.
pub fn roundtrip_suite(
    spec: &TreeSpec,
    lambda: Complex64,
    nu: Option<BoundaryDistribution>,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let table = green::solve_f_up(spec, lambda, 0)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let nu = match nu {
        Some(nu) => nu,
        None => random_distribution(spec, &mut rng, 2),
    };
    let mut out = Vec::new();
    let h = HarmonicEvaluator::Poisson(nu.clone());
    let mut worst = 0.0f64;
    for x in spec.vertices_to_depth(nu.carrier_depth() + 1) {
        let got = boundary::recover_distribution(spec, &table, &h, &x)?;
        let want = nu.arc_value(spec, &x)?;
        worst = worst.max((got - want).norm());
    }
    out.push(check(
        "roundtrip/recover_poisson",
        worst,
        tolerance,
        format!("carrier depth {}", nu.carrier_depth()),
    ));
    let recovered = boundary::recover_on_carrier(
        spec,
        &table,
        |x| h.eval(spec, &table, x),
        nu.carrier_depth(),
    )?;
    let mut worst = 0.0f64;
    for x in spec.vertices_to_depth(3) {
        let back = boundary::poisson_transform(spec, &table, &recovered, &x)?.value();
        let direct = h.eval(spec, &table, &x)?;
        worst = worst.max((back - direct).norm());
    }
    out.push(check(
        "roundtrip/poisson_recover",
        worst,
        tolerance,
        "radius-3 ball".into(),
    ));
    let mut worst = 0.0f64;
    for x in spec.vertices_to_depth(nu.carrier_depth().saturating_sub(1)) {
        let t = spec.type_of(&x)?;
        let sum: Complex64 = (0..spec.num_slots(t))
            .map(|s| recovered.arc_value(spec, &x.child(s as u32)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        worst = worst.max((sum - recovered.arc_value(spec, &x)?).norm());
    }
    out.push(check(
        "roundtrip/additivity",
        worst,
        tolerance,
        "recovered masses".into(),
    ));
    Ok(out)
}

/// Polyharmonic suite: kernel defect identities, annihilation and the
/// decomposition round trip.
pub fn poly_suite(
    spec: &TreeSpec,
    lambda: Complex64,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let table = green::solve_f_up(spec, lambda, 3)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = random_vertex(spec, &mut rng, 3);
        let mut arc = random_vertex(spec, &mut rng, 2);
        while arc.depth() < 8 {
            let t = spec.type_of(&arc)?;
            arc = arc.child(rng.random_range(0..spec.num_slots(t)) as u32);
        }
        for r in 1..=3usize {
            let f = |v: &VertexPath| poly::derivative_kernel(spec, &table, v, &arc, r);
            let lhs = poly::apply_defect(spec, lambda, &f, &x, 1)?;
            let rhs =
                Complex64::from(r as f64) * poly::derivative_kernel(spec, &table, &x, &arc, r - 1)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    out.push(check(
        "poly/kernel_defect",
        worst,
        tolerance,
        "(λI-P) D^r K = r D^(r-1) K, r <= 3, 20 samples".into(),
    ));
    for n in 1..=3usize {
        let rep = PolyRepresentation::new(
            lambda,
            (0..n).map(|_| random_distribution(spec, &mut rng, 1)).collect(),
        )?;
        let f = |x: &VertexPath| poly::synthesize(spec, &table, &rep, x);
        let mut worst = 0.0f64;
        for x in spec.vertices_to_depth(5 - n) {
            worst = worst.max(poly::apply_defect(spec, lambda, &f, &x, n)?.norm());
        }
        out.push(check(
            format!("poly/annihilation_n{n}"),
            worst,
            tolerance,
            format!("radius-{} ball", 5 - n),
        ));
        let back = poly::decompose(spec, &table, &f, n + 3, n, 3)?;
        let mut worst = 0.0f64;
        for (r, nu) in back.distributions.iter().enumerate() {
            for x in spec.vertices_to_depth(2) {
                let got = nu.arc_value(spec, &x)?;
                let want = rep.distributions[r].arc_value(spec, &x)?;
                worst = worst.max((got - want).norm());
            }
        }
        out.push(check(
            format!("poly/decompose_n{n}"),
            worst,
            tolerance,
            "arc values on the carrier".into(),
        ));
    }
    Ok(out)
}

/// Isotropic suite: closed form vs solver, the derivative-kernel recursion
/// and the horocycle basis round trip.
pub fn isotropic_suite(
    q: u32,
    lambda: Complex64,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let params = IsotropicParams::new(q, lambda)?;
    let spec = params.spec();
    let table = green::solve_f_up(&spec, lambda, 3)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    let f = isotropic::closed_f(&params, 3)?;
    let a = spec.type_index("a").expect("homogeneous spec has type a");
    let solver = table.f_up(a)?;
    let mut worst = 0.0f64;
    for k in 0..=3 {
        worst = worst.max((f.coeff(k) - solver.coeff(k)).norm());
    }
    out.push(check(
        "isotropic/closed_form",
        worst,
        tolerance,
        format!("q={q}, jets to order 3"),
    ));
    let coeffs = isotropic::horocycle_coeffs(&params, 4)?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x = random_vertex(&spec, &mut rng, 3);
        let mut arc = random_vertex(&spec, &mut rng, 2);
        while arc.depth() < 8 {
            let t = spec.type_of(&arc)?;
            arc = arc.child(rng.random_range(0..spec.num_slots(t)) as u32);
        }
        let kernel = green::martin_kernel(&spec, &table, &x, &arc)?;
        let hor = isotropic::horocycle_index(&x, &arc)? as f64;
        for r in 1..=3usize {
            let mut sum = Complex64::ZERO;
            for k in 1..=r {
                sum += Complex64::from(hor.powi(k as i32)) * coeffs.coeff(k, r);
            }
            worst = worst.max((kernel.derivative_value(r) - kernel.value() * sum).norm());
        }
    }
    out.push(check(
        "isotropic/kernel_recursion",
        worst,
        tolerance,
        "jet derivatives vs triangular recursion".into(),
    ));
    let rep = PolyRepresentation::new(
        lambda,
        (0..3).map(|_| random_distribution(&spec, &mut rng, 1)).collect(),
    )?;
    let bars = isotropic::to_horocycle_basis(&spec, &params, &rep)?;
    let back = isotropic::from_horocycle_basis(&spec, &params, &bars)?;
    let mut worst = 0.0f64;
    for r in 0..3 {
        for x in spec.vertices_to_depth(2) {
            let got = back.distributions[r].arc_value(&spec, &x)?;
            let want = rep.distributions[r].arc_value(&spec, &x)?;
            worst = worst.max((got - want).norm());
        }
    }
    out.push(check(
        "isotropic/horocycle_round_trip",
        worst,
        tolerance,
        "triangular solve".into(),
    ));
    let mut worst = 0.0f64;
    let mut count = 0;
    for x in spec.vertices_to_depth(3) {
        let direct = poly::synthesize(&spec, &table, &rep, &x)?;
        let via = isotropic::eval_horocycle_basis(&spec, &table, &bars, &x)?;
        worst = worst.max((direct - via).norm());
        count += 1;
    }
    out.push(check(
        "isotropic/horocycle_evaluation",
        worst,
        tolerance,
        format!("{count} vertices"),
    ));
    Ok(out)
}

/// Forward suite: bijection, annihilation, basis round trip and the
/// constant-one transform of the walk's own measure.
pub fn forward_suite(
    fwd: &ForwardSpec,
    lambda: Complex64,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let spec = fwd.tree();
    let mut out = Vec::new();
    let sigma = random_distribution(spec, &mut rng, 2);
    let h = |x: &VertexPath| forward::forward_poisson(fwd, &sigma, lambda, x);
    let mut worst = 0.0f64;
    for x in spec.vertices_to_depth(3) {
        let back = forward::forward_recover(fwd, h, lambda, &x)?;
        worst = worst.max((back - sigma.arc_value(spec, &x)?).norm());
        let qh = fwd.apply_q(h, &x)?;
        worst = worst.max((qh - lambda * h(&x)?).norm());
    }
    out.push(check(
        "forward/bijection",
        worst,
        tolerance,
        "poisson/recover and Q-harmonicity".into(),
    ));
    let sigmas: Vec<BoundaryDistribution> =
        (0..3).map(|_| random_distribution(spec, &mut rng, 1)).collect();
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        let f = |x: &VertexPath| forward::forward_poly_synthesize(fwd, &sigmas[..n], lambda, x);
        for x in spec.vertices_to_depth(4) {
            worst = worst.max(fwd.apply_defect(lambda, &f, &x, n)?.norm());
        }
    }
    out.push(check(
        "forward/annihilation",
        worst,
        tolerance,
        "(λI-Q)^n on radius-4 ball".into(),
    ));
    let basis = forward::to_vertex_power_basis(fwd, &sigmas, lambda)?;
    let back = basis.to_sigmas(fwd)?;
    let mut worst = 0.0f64;
    for (r, sigma) in back.iter().enumerate() {
        for x in spec.vertices_to_depth(2) {
            worst = worst.max((sigma.arc_value(spec, &x)? - sigmas[r].arc_value(spec, &x)?).norm());
        }
    }
    for x in spec.vertices_to_depth(3) {
        let a = basis.eval(fwd, &x)?;
        let b = forward::forward_poly_synthesize(fwd, &sigmas, lambda, &x)?;
        worst = worst.max((a - b).norm());
    }
    out.push(check(
        "forward/vertex_power_basis",
        worst,
        tolerance,
        "conversion round trip and evaluation".into(),
    ));
    let nu = forward::boundary_measure(fwd, 3)?;
    let mut worst = 0.0f64;
    for x in spec.vertices_to_depth(2) {
        let t = spec.type_of(&x)?;
        let sum: f64 = (0..spec.num_slots(t))
            .map(|s| forward::forward_mass(fwd, &x.child(s as u32)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        worst = worst.max((sum - forward::forward_mass(fwd, &x)?).abs());
        let h = forward::forward_poisson(fwd, &nu, Complex64::ONE, &x)?;
        worst = worst.max((h - Complex64::ONE).norm());
    }
    out.push(check(
        "forward/own_measure",
        worst,
        tolerance,
        "additivity and h ≡ 1 at λ = 1".into(),
    ));
    Ok(out)
}

/// Group-invariance suite over one or more edge-type models.
pub fn group_suite(
    models: &[(String, EdgeTypeModel)],
    lambda: Complex64,
    tolerance: f64,
) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, model) in models {
        let report = green::group_invariant_checks(model, lambda)?;
        out.push(check(
            format!("group/{name}/identities"),
            report.max_residual(),
            tolerance,
            format!("G = {}", report.g_value),
        ));
        out.push(check(
            format!("group/{name}/nonvanishing"),
            if report.g_nonzero() { 0.0 } else { 1.0 },
            0.5,
            format!("|G| = {:.3e}", report.g_value.norm()),
        ));
    }
    Ok(out)
}

/// Solver-table consistency checks shared by a few suites.
pub fn table_summary(spec: &TreeSpec, table: &JetTable) -> Vec<CheckResult> {
    vec![check(
        "solver/residual",
        table.residual(),
        1e-12,
        format!(
            "{} iterations at lambda = {}, {} types",
            table.iterations(),
            table.lambda(),
            spec.num_types()
        ),
    )]
}
