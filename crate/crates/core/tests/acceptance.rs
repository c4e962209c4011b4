//! Acceptance suite: one test per contract criterion, each printing a
//! pass line with its measured worst-case residual.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use martinkern::boundary::{self, BoundaryDistribution, HarmonicEvaluator};
use martinkern::forward::{self, ForwardSpec};
use martinkern::green::{self, estimate_rho};
use martinkern::isotropic::{self, IsotropicParams};
use martinkern::oracle::TruncatedBall;
use martinkern::poly::{self, PolyRepresentation};
use martinkern::samples;
use martinkern::tree::{TreeSpec, VertexPath};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn f_closed(q: u32, lambda: f64) -> f64 {
    let q = f64::from(q);
    let rho = 2.0 * q.sqrt() / (q + 1.0);
    (q + 1.0) * lambda / (2.0 * q) * (1.0 - (1.0 - rho * rho / (lambda * lambda)).sqrt())
}

fn random_vertex(spec: &TreeSpec, rng: &mut StdRng, max_depth: usize) -> VertexPath {
    let depth = rng.random_range(0..=max_depth);
    let mut path = VertexPath::root();
    for _ in 0..depth {
        let t = spec.type_of(&path).unwrap();
        path = path.child(rng.random_range(0..spec.num_slots(t)) as u32);
    }
    path
}

fn extend_to_depth(spec: &TreeSpec, mut path: VertexPath, depth: usize, rng: &mut StdRng) -> VertexPath {
    while path.depth() < depth {
        let t = spec.type_of(&path).unwrap();
        path = path.child(rng.random_range(0..spec.num_slots(t)) as u32);
    }
    path
}

fn random_distribution(spec: &TreeSpec, rng: &mut StdRng, depth: usize) -> BoundaryDistribution {
    let mut values = BTreeMap::new();
    let total = Complex64::new(rng.random_range(0.5..1.5), rng.random_range(-0.5..0.5));
    values.insert(VertexPath::root(), total);
    let mut frontier = vec![(VertexPath::root(), total)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (path, mass) in frontier {
            let t = spec.type_of(&path).unwrap();
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
    BoundaryDistribution::new(spec, values).unwrap()
}

#[test]
fn criterion_1_closed_form_agreement() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for q in [2u32, 3, 5] {
        let spec = TreeSpec::homogeneous_srw(q);
        let a = spec.type_index("a").unwrap();
        for lambda in [1.0f64, 1.2, 2.0] {
            let table = green::solve_f_up(&spec, re(lambda), 0).unwrap();
            let got = table.f_up(a).unwrap().value();
            let diff = (got - re(f_closed(q, lambda))).norm();
            assert!(diff < 1e-10, "q={q} lambda={lambda}: off by {diff:.3e}");
            worst = worst.max(diff);
            if lambda == 1.0 {
                let exact = (got - re(1.0 / f64::from(q))).norm();
                assert!(exact < 1e-12, "F(1) != 1/q for q={q}: off by {exact:.3e}");
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 1 (closed-form agreement): PASS  worst residual {worst:.3e}, {elapsed:?}"
    );
}

#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let horizon = 40usize;
    let specs = [
        ("period3", samples::slim_period_three()),
        ("period4", samples::slim_period_four()),
        ("wide", samples::slim_wide()),
    ];
    let brackets: Vec<f64> = specs
        .iter()
        .map(|(_, s)| estimate_rho(s).unwrap().hi)
        .collect();
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst_margin = f64::INFINITY;
    let mut balls: BTreeMap<(usize, VertexPath), TruncatedBall> = BTreeMap::new();
    for case in 0..20 {
        let which = case % specs.len();
        let (_, spec) = &specs[which];
        let rho_hi = brackets[which];
        let lambda = rho_hi * rng.random_range(1.1..2.6);
        let x = random_vertex(spec, &mut rng, 2);
        // Every fourth case is diagonal, exercising green_diag directly.
        let y = if case % 4 == 0 {
            x.clone()
        } else {
            random_vertex(spec, &mut rng, 3)
        };
        let ball = balls
            .entry((which, x.clone()))
            .or_insert_with(|| TruncatedBall::new(spec, &x, horizon).unwrap());
        let series = ball.green_series(&y, re(lambda), horizon, rho_hi).unwrap();
        let table = green::solve_f_up(spec, re(lambda), 0).unwrap();
        let solver = green::green_pair(spec, &table, &x, &y).unwrap().value();
        if x == y {
            let diag = green::green_diag(spec, &table, &x).unwrap().value();
            assert!((diag - solver).norm() < 1e-12, "solver routes disagree");
        }
        let diff = (series.value - solver).norm();
        let allowed = series.tail_bound + 1e-8;
        assert!(
            diff <= allowed,
            "case {case}: |series - F*G| = {diff:.3e} > tail {:.3e} + 1e-8",
            series.tail_bound
        );
        worst_margin = worst_margin.min(allowed - diff);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 2 (oracle equivalence, N=40, 20 cases, 3 specs): PASS  \
         slimmest margin {worst_margin:.3e}, {elapsed:?}"
    );
}

#[test]
fn criterion_3_eigen_equation() {
    let specs = [
        TreeSpec::homogeneous_srw(2),
        samples::lopsided(),
        samples::slim_period_three(),
        samples::slim_wide(),
    ];
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for case in 0..10 {
        let spec = &specs[case % specs.len()];
        let lambda = re(rng.random_range(1.05..2.0));
        let table = green::solve_f_up(spec, lambda, 0).unwrap();
        let arc = extend_to_depth(spec, random_vertex(spec, &mut rng, 2), 7, &mut rng);
        let f = |v: &VertexPath| green::martin_kernel(spec, &table, v, &arc).map(|j| j.value());
        for x in spec.vertices_to_depth(4) {
            let lhs = green::apply_p(spec, f, &x).unwrap();
            let rhs = lambda * f(&x).unwrap();
            let residual = (lhs - rhs).norm();
            assert!(residual < 1e-10, "case {case} at {x}: residual {residual:.3e}");
            worst = worst.max(residual);
        }
    }
    println!("criterion 3 (eigen equation, 10 triples): PASS  worst residual {worst:.3e}");
}

#[test]
fn criterion_4_representation_round_trip() {
    let mut rng = StdRng::seed_from_u64(13);
    let mut worst_recover = 0.0f64;
    let mut worst_poisson = 0.0f64;
    let mut worst_additivity = 0.0f64;
    for (spec, lambda) in [
        (TreeSpec::homogeneous_srw(2), re(1.2)),
        (samples::lopsided(), re(1.3)),
    ] {
        let table = green::solve_f_up(&spec, lambda, 0).unwrap();
        // recover ∘ poisson on a depth-3 carrier.
        let nu = random_distribution(&spec, &mut rng, 3);
        let h = HarmonicEvaluator::Poisson(nu.clone());
        for x in spec.vertices_to_depth(3) {
            let got = boundary::recover_distribution(&spec, &table, &h, &x).unwrap();
            let want = nu.arc_value(&spec, &x).unwrap();
            let diff = (got - want).norm();
            assert!(diff < 1e-10, "recover(poisson) at {x}: {diff:.3e}");
            worst_recover = worst_recover.max(diff);
        }
        // poisson ∘ recover for a table-backed harmonic function.
        let arc = extend_to_depth(&spec, VertexPath::root(), 9, &mut rng);
        let mut tab = BTreeMap::new();
        for x in spec.vertices_to_depth(4) {
            tab.insert(
                x.clone(),
                green::martin_kernel(&spec, &table, &x, &arc).unwrap().value(),
            );
        }
        let h = HarmonicEvaluator::Table(tab.clone());
        h.validate_table(&spec, lambda, 1e-10).unwrap();
        let recovered =
            boundary::recover_on_carrier(&spec, &table, |x| h.eval(&spec, &table, x), 3).unwrap();
        for x in spec.vertices_to_depth(3) {
            let back = boundary::poisson_transform(&spec, &table, &recovered, &x)
                .unwrap()
                .value();
            let diff = (back - tab[&x]).norm();
            assert!(diff < 1e-9, "poisson(recover) at {x}: {diff:.3e}");
            worst_poisson = worst_poisson.max(diff);
        }
        // Recovered masses satisfy the child-sum identity.
        for x in spec.vertices_to_depth(2) {
            let t = spec.type_of(&x).unwrap();
            let sum: Complex64 = (0..spec.num_slots(t))
                .map(|s| recovered.arc_value(&spec, &x.child(s as u32)).unwrap())
                .sum();
            let diff = (sum - recovered.arc_value(&spec, &x).unwrap()).norm();
            assert!(diff < 1e-10, "additivity at {x}: {diff:.3e}");
            worst_additivity = worst_additivity.max(diff);
        }
    }
    println!(
        "criterion 4 (representation round trip): PASS  recover {worst_recover:.3e}, \
         poisson {worst_poisson:.3e}, additivity {worst_additivity:.3e}"
    );
}

#[test]
fn criterion_5_polyharmonic_suite() {
    let mut rng = StdRng::seed_from_u64(17);
    let mut worst_kernel = 0.0f64;
    let mut worst_annihilation = 0.0f64;
    let mut worst_round_trip = 0.0f64;
    for (spec, lambda) in [
        (TreeSpec::homogeneous_srw(2), re(1.25)),
        (samples::lopsided(), re(1.35)),
    ] {
        let table = green::solve_f_up(&spec, lambda, 3).unwrap();
        // (λI - P) K^(r) = r K^(r-1) for r <= 3.
        let arc = extend_to_depth(&spec, random_vertex(&spec, &mut rng, 2), 8, &mut rng);
        for r in 1..=3usize {
            let f = |v: &VertexPath| poly::derivative_kernel(&spec, &table, v, &arc, r);
            for x in spec.vertices_to_depth(3) {
                let lhs = poly::apply_defect(&spec, lambda, &f, &x, 1).unwrap();
                let rhs = Complex64::from(r as f64)
                    * poly::derivative_kernel(&spec, &table, &x, &arc, r - 1).unwrap();
                let diff = (lhs - rhs).norm();
                assert!(diff < 1e-8, "kernel identity r={r} at {x}: {diff:.3e}");
                worst_kernel = worst_kernel.max(diff);
            }
        }
        for n in 1..=3usize {
            let rep = PolyRepresentation::new(
                lambda,
                (0..n)
                    .map(|_| random_distribution(&spec, &mut rng, 1))
                    .collect(),
            )
            .unwrap();
            let f = |x: &VertexPath| poly::synthesize(&spec, &table, &rep, x);
            for x in spec.vertices_to_depth(5 - n) {
                let defect = poly::apply_defect(&spec, lambda, &f, &x, n).unwrap().norm();
                assert!(defect < 1e-8, "annihilation n={n} at {x}: {defect:.3e}");
                worst_annihilation = worst_annihilation.max(defect);
            }
            let back = poly::decompose(&spec, &table, &f, n + 3, n, 3).unwrap();
            for (r, nu) in back.distributions.iter().enumerate() {
                for x in spec.vertices_to_depth(2) {
                    let got = nu.arc_value(&spec, &x).unwrap();
                    let want = rep.distributions[r].arc_value(&spec, &x).unwrap();
                    let diff = (got - want).norm();
                    assert!(diff < 1e-8, "decompose n={n} r={r} at {x}: {diff:.3e}");
                    worst_round_trip = worst_round_trip.max(diff);
                }
            }
        }
    }
    println!(
        "criterion 5 (polyharmonic suite): PASS  kernel {worst_kernel:.3e}, \
         annihilation {worst_annihilation:.3e}, round trip {worst_round_trip:.3e}"
    );
}

#[test]
fn criterion_6_isotropic_horocycle_basis() {
    let mut rng = StdRng::seed_from_u64(19);
    let q = 2u32;
    let lambda = 1.4f64;
    let params = IsotropicParams::new(q, re(lambda)).unwrap();
    let spec = params.spec();
    let table = green::solve_f_up(&spec, re(lambda), 3).unwrap();
    // Jet derivatives of the closed form against central finite differences.
    let jet = isotropic::closed_f(&params, 1).unwrap();
    let h = 1e-5;
    let fd = (f_closed(q, lambda + h) - f_closed(q, lambda - h)) / (2.0 * h);
    let fd_diff = (jet.derivative_value(1).re - fd).abs();
    assert!(fd_diff < 1e-6, "finite-difference mismatch {fd_diff:.3e}");
    // Jet derivatives against the triangular recursion kernels.
    let coeffs = isotropic::horocycle_coeffs(&params, 4).unwrap();
    let mut worst_rec = 0.0f64;
    for _ in 0..10 {
        let x = random_vertex(&spec, &mut rng, 3);
        let arc = extend_to_depth(&spec, random_vertex(&spec, &mut rng, 2), 8, &mut rng);
        let kernel = green::martin_kernel(&spec, &table, &x, &arc).unwrap();
        let hor = isotropic::horocycle_index(&x, &arc).unwrap() as f64;
        for r in 1..=3usize {
            let mut sum = Complex64::ZERO;
            for k in 1..=r {
                sum += Complex64::from(hor.powi(k as i32)) * coeffs.coeff(k, r);
            }
            let diff = (kernel.derivative_value(r) - kernel.value() * sum).norm();
            assert!(diff < 1e-8, "recursion kernel r={r} at {x}: {diff:.3e}");
            worst_rec = worst_rec.max(diff);
        }
    }
    // Horocycle basis round trip and evaluation equivalence.
    let rep = PolyRepresentation::new(
        re(lambda),
        (0..3)
            .map(|_| random_distribution(&spec, &mut rng, 1))
            .collect(),
    )
    .unwrap();
    let bars = isotropic::to_horocycle_basis(&spec, &params, &rep).unwrap();
    let back = isotropic::from_horocycle_basis(&spec, &params, &bars).unwrap();
    let mut worst_rt = 0.0f64;
    for r in 0..3 {
        for x in spec.vertices_to_depth(2) {
            let diff = (back.distributions[r].arc_value(&spec, &x).unwrap()
                - rep.distributions[r].arc_value(&spec, &x).unwrap())
            .norm();
            assert!(diff < 1e-10, "round trip r={r} at {x}: {diff:.3e}");
            worst_rt = worst_rt.max(diff);
        }
    }
    let mut worst_eval = 0.0f64;
    let mut count = 0;
    for x in spec.vertices_to_depth(3) {
        let direct = poly::synthesize(&spec, &table, &rep, &x).unwrap();
        let via = isotropic::eval_horocycle_basis(&spec, &table, &bars, &x).unwrap();
        let diff = (direct - via).norm();
        assert!(diff < 1e-8, "evaluation at {x}: {diff:.3e}");
        worst_eval = worst_eval.max(diff);
        count += 1;
    }
    assert!(count >= 20);
    println!(
        "criterion 6 (isotropic horocycle basis): PASS  fd {fd_diff:.3e}, recursion \
         {worst_rec:.3e}, round trip {worst_rt:.3e}, evaluation {worst_eval:.3e} ({count} vertices)"
    );
}

#[test]
fn criterion_7_group_invariant_identities() {
    let models = [
        ("srw", samples::srw_edge_model()),
        ("oriented", samples::oriented_edge_model()),
        ("two_class", samples::two_class_edge_model()),
    ];
    let mut worst = 0.0f64;
    for (name, model) in &models {
        let spec = model.to_tree_spec().unwrap();
        let rho_hi = estimate_rho(&spec).unwrap().hi;
        for factor in [1.15, 1.5, 2.2] {
            let lambda = re(rho_hi * factor);
            let report = green::group_invariant_checks(model, lambda).unwrap();
            let residual = report.max_residual();
            assert!(
                residual < 1e-10,
                "{name} at lambda={lambda}: residual {residual:.3e}"
            );
            assert!(
                report.g_value.norm() > 1e-12,
                "{name} at lambda={lambda}: |G| = {:.3e}",
                report.g_value.norm()
            );
            worst = worst.max(residual);
        }
    }
    println!(
        "criterion 7 (group-invariant identities, 3 models x 3 lambdas): PASS  \
         worst residual {worst:.3e}"
    );
}

#[test]
fn criterion_8_forward_suite() {
    let mut rng = StdRng::seed_from_u64(23);
    let mut worst_bijection = 0.0f64;
    let mut worst_annihilation = 0.0f64;
    let mut worst_basis = 0.0f64;
    let mut worst_additivity = 0.0f64;
    let mut worst_ones = 0.0f64;
    for fwd in [
        ForwardSpec::new(samples::binary_forward()).unwrap(),
        ForwardSpec::new(samples::skewed_forward()).unwrap(),
    ] {
        let spec = fwd.tree();
        let lambda = Complex64::new(rng.random_range(0.8..1.5), rng.random_range(-0.3..0.3));
        // Poisson bijection both ways.
        let sigma = random_distribution(spec, &mut rng, 2);
        let h = |x: &VertexPath| forward::forward_poisson(&fwd, &sigma, lambda, x);
        for x in spec.vertices_to_depth(3) {
            let back = forward::forward_recover(&fwd, h, lambda, &x).unwrap();
            let diff = (back - sigma.arc_value(spec, &x).unwrap()).norm();
            assert!(diff < 1e-12, "bijection at {x}: {diff:.3e}");
            worst_bijection = worst_bijection.max(diff);
            let qh = fwd.apply_q(h, &x).unwrap();
            let diff = (qh - lambda * h(&x).unwrap()).norm();
            assert!(diff < 1e-12, "harmonicity at {x}: {diff:.3e}");
            worst_bijection = worst_bijection.max(diff);
        }
        // Annihilation of order-n syntheses.
        let sigmas: Vec<BoundaryDistribution> = (0..3)
            .map(|_| random_distribution(spec, &mut rng, 1))
            .collect();
        for n in 1..=3usize {
            let f =
                |x: &VertexPath| forward::forward_poly_synthesize(&fwd, &sigmas[..n], lambda, x);
            for x in spec.vertices_to_depth(4) {
                let defect = fwd.apply_defect(lambda, &f, &x, n).unwrap().norm();
                assert!(defect < 1e-10, "annihilation n={n} at {x}: {defect:.3e}");
                worst_annihilation = worst_annihilation.max(defect);
            }
        }
        // Vertex-power basis conversion round trip.
        let basis = forward::to_vertex_power_basis(&fwd, &sigmas, lambda).unwrap();
        let back = basis.to_sigmas(&fwd).unwrap();
        for (r, sigma) in back.iter().enumerate() {
            for x in spec.vertices_to_depth(2) {
                let diff = (sigma.arc_value(spec, &x).unwrap()
                    - sigmas[r].arc_value(spec, &x).unwrap())
                .norm();
                assert!(diff < 1e-12, "basis round trip r={r} at {x}: {diff:.3e}");
                worst_basis = worst_basis.max(diff);
            }
        }
        // The walk's own boundary measure: additivity and h ≡ 1 at λ = 1.
        let nu = forward::boundary_measure(&fwd, 3).unwrap();
        for x in spec.vertices_to_depth(2) {
            let t = spec.type_of(&x).unwrap();
            let sum: f64 = (0..spec.num_slots(t))
                .map(|s| forward::forward_mass(&fwd, &x.child(s as u32)).unwrap())
                .sum();
            let diff = (sum - forward::forward_mass(&fwd, &x).unwrap()).abs();
            assert!(diff < 1e-14, "measure additivity at {x}: {diff:.3e}");
            worst_additivity = worst_additivity.max(diff);
            let h = forward::forward_poisson(&fwd, &nu, Complex64::ONE, &x).unwrap();
            let diff = (h - Complex64::ONE).norm();
            assert!(diff < 1e-13, "h != 1 at {x}: {diff:.3e}");
            worst_ones = worst_ones.max(diff);
        }
    }
    println!(
        "criterion 8 (forward suite): PASS  bijection {worst_bijection:.3e}, annihilation \
         {worst_annihilation:.3e}, basis {worst_basis:.3e}, additivity {worst_additivity:.3e}, \
         ones {worst_ones:.3e}"
    );
}

#[test]
fn criterion_9_rho_bracketing() {
    let start = Instant::now();
    for q in [2u32, 3] {
        let spec = TreeSpec::homogeneous_srw(q);
        let expect = 2.0 * f64::from(q).sqrt() / f64::from(q + 1);
        let bracket = estimate_rho(&spec).unwrap();
        assert!(
            bracket.width() <= 1e-3,
            "q={q}: width {:.3e}",
            bracket.width()
        );
        assert!(
            bracket.lo <= expect && expect <= bracket.hi,
            "q={q}: [{}, {}] misses {expect}",
            bracket.lo,
            bracket.hi
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("criterion 9 (rho bracketing, q = 2 and 3): PASS  {elapsed:?}");
}
