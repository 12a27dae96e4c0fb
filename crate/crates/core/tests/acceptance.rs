//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use opdisk_core::bundle::{verify_coro, verify_el_teo};
use opdisk_core::cross_ratio::{cr0, cross_ratio_set, endo_norm, geodesic_tuple};
use opdisk_core::disk::{
    alpha_of, dist, dist_from_origin, geodesic, geodesic_origin, limit_points, mobius, DiskPoint,
};
use opdisk_core::line::{lift, project, q_projection, Line, QProjection};
use opdisk_core::matrix::{op_norm, ComplexMatrix, Tolerances, C64};
use opdisk_core::pair::{borel_element, borel_factor, g_z, theta_unitary_residual};
use opdisk_core::sample::{self, rng_for};
use opdisk_core::trace::{verify_commutative, verify_tracial, BlockAlgebra};

const SEED: u64 = 20_240_917;

struct Outcome {
    id: u32,
    title: &'static str,
    checks: Vec<(String, f64, f64)>,
    budget: Option<Duration>,
    elapsed: Duration,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, r, tol)| r <= tol)
            && self.budget.is_none_or(|b| self.elapsed <= b)
    }
}

fn diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    op_norm(&(a - b))
}

fn scalar(x: f64) -> DiskPoint {
    DiskPoint::new(ComplexMatrix::scalar(x), &Tolerances::default()).unwrap()
}

fn run(
    id: u32,
    title: &'static str,
    budget: Option<Duration>,
    body: impl FnOnce() -> Vec<(String, f64, f64)>,
) -> Outcome {
    let start = Instant::now();
    let checks = body();
    Outcome {
        id,
        title,
        checks,
        budget,
        elapsed: start.elapsed(),
    }
}

/// Largest residual over seeded instances `0..count`.
fn worst(count: u64, stream: u64, f: impl Fn(&mut rand_chacha::ChaCha8Rng, u64) -> f64) -> f64 {
    (0..count)
        .map(|i| f(&mut rng_for(SEED + stream, i), i))
        .fold(0.0, f64::max)
}

fn scalar_disk() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let half = scalar(0.5);
    let origin = DiskPoint::origin(1);
    let half_ln3 = 0.5 * 3f64.ln();
    let d = dist(&origin, &half, &t).unwrap();
    let mid = geodesic_origin(&half, &t).sample(0.5).get(0, 0);
    let (lo, hi) = limit_points(&origin, &half, &t).unwrap();
    vec![
        ("d(0, 0.5) − ½ln3".into(), (d - half_ln3).abs(), 1e-12),
        ("δ(½) − tanh(¼ln3)".into(), (mid - C64::new((0.25 * 3f64.ln()).tanh(), 0.0)).norm(), 1e-12),
        ("limit⁻ + 1".into(), (lo.matrix().get(0, 0) + 1.0).norm(), 1e-12),
        ("limit⁺ − 1".into(), (hi.matrix().get(0, 0) - 1.0).norm(), 1e-12),
    ]
}

fn el_teo() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    (1..=5)
        .map(|n| {
            let r = worst(100, n as u64, |rng, _| {
                let z = sample::disk_point(rng, n, 0.9, &t).unwrap();
                verify_el_teo(&z, &t).unwrap()
            });
            (format!("n = {n}, 100 samples"), r, 1e-9)
        })
        .collect()
}

fn el_coro() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let r = worst(100, 10, |rng, i| {
        let n = 1 + (i % 4) as usize;
        let z0 = sample::disk_point(rng, n, 0.9, &t).unwrap();
        let z1 = sample::disk_point(rng, n, 0.9, &t).unwrap();
        verify_coro(&z0, &z1, &t).unwrap()
    });
    vec![("identity + norm identity, n ≤ 4, 100 pairs".into(), r, 1e-9)]
}

fn invariance() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let r = worst(200, 20, |rng, i| {
        let n = 1 + (i % 5) as usize;
        let g = sample::theta_unitary(rng, n, &t).unwrap();
        let z1 = sample::disk_point(rng, n, 0.9, &t).unwrap();
        let z2 = sample::disk_point(rng, n, 0.9, &t).unwrap();
        let d = dist(&z1, &z2, &t).unwrap();
        let moved = dist(&mobius(&g, &z1, &t).unwrap(), &mobius(&g, &z2, &t).unwrap(), &t).unwrap();
        (d - moved).abs()
    });
    vec![("|Δd| over 200 (g̃, z1, z2)".into(), r, 1e-9)]
}

/// `Σ_{k ≤ K} z (z*z)^k / (2k+1)`.
fn atanh_series(z: &ComplexMatrix, k_max: usize) -> ComplexMatrix {
    let zz = z.adjoint() * z;
    let mut power = ComplexMatrix::identity(z.n());
    let mut sum = ComplexMatrix::zeros(z.n());
    for k in 0..=k_max {
        sum = sum + power.scale(1.0 / (2 * k + 1) as f64);
        power = &power * &zz;
    }
    z * sum
}

fn series() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let r = worst(100, 30, |rng, i| {
        let n = 1 + (i % 5) as usize;
        let z = sample::disk_point(rng, n, 0.9, &t).unwrap();
        diff(&alpha_of(&z, &t), &atanh_series(z.matrix(), 200))
    });
    vec![("K = 200, ‖z‖ ≤ 0.9".into(), r, 1e-10)]
}

fn fibration() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let section = worst(100, 40, |rng, i| {
        let z = sample::disk_point(rng, 1 + (i % 5) as usize, 0.9, &t).unwrap();
        diff(project(lift(&z, &t).unwrap().vector(), &t).unwrap().matrix(), z.matrix())
    });
    let equivariance = worst(100, 41, |rng, i| {
        let n = 1 + (i % 5) as usize;
        let g = sample::theta_unitary(rng, n, &t).unwrap();
        let z = sample::disk_point(rng, n, 0.9, &t).unwrap();
        let line = Line::from_generator(&g.apply(lift(&z, &t).unwrap().vector()), &t).unwrap();
        diff(line.point(&t).unwrap().matrix(), mobius(&g, &z, &t).unwrap().matrix())
    });
    let (mut idem, mut selfadj, mut positive) = (0.0f64, 0.0f64, true);
    for i in 0..100u64 {
        let mut rng = rng_for(SEED + 42, i);
        let z = sample::disk_point(&mut rng, 1 + (i % 5) as usize, 0.9, &t).unwrap();
        let q = q_projection(&Line::from_point(&z, &t).unwrap(), &t).unwrap();
        let r = QProjection::residuals(&q.p);
        idem = idem.max(r.idempotency);
        selfadj = selfadj.max(r.theta_selfadjoint);
        positive &= r.rho_reflection_min_eig > 0.0;
    }
    vec![
        ("project ∘ lift = id".into(), section, 1e-12),
        ("equivariance".into(), equivariance, 1e-9),
        ("p² = p".into(), idem, 1e-9),
        ("ρ-selfadjoint".into(), selfadj, 1e-9),
        ("ρ(2p − 1) > 0 (0 = holds)".into(), if positive { 0.0 } else { 1.0 }, 0.0),
    ]
}

fn borel() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let round_trip = worst(100, 50, |rng, i| {
        let p = sample::borel_params(rng, 1 + (i % 5) as usize, &t).unwrap();
        let back = borel_factor(&borel_element(&p, &t).unwrap(), &t).unwrap();
        diff(&back.g, &p.g).max(diff(&back.x, &p.x))
    });
    let (mut unitary, mut origin) = (0.0f64, 0.0f64);
    for i in 0..100u64 {
        let mut rng = rng_for(SEED + 51, i);
        let n = 1 + (i % 5) as usize;
        let z = sample::disk_point(&mut rng, n, 0.9, &t).unwrap();
        let g = g_z(&z, &t).unwrap();
        unitary = unitary.max(theta_unitary_residual(&g));
        origin = origin.max(diff(mobius(&g, &DiskPoint::origin(n), &t).unwrap().matrix(), z.matrix()));
    }
    vec![
        ("factorization round-trip".into(), round_trip, 1e-9),
        ("g̃_z ∈ U(θ)".into(), unitary, 1e-10),
        ("g̃_z · 0 = z".into(), origin, 1e-10),
    ]
}

fn cross_ratio() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let set = worst(100, 60, |rng, i| {
        let n = 1 + (i % 4) as usize;
        let z = sample::invertible_disk_point(rng, n, 0.05, 0.9, &t).unwrap();
        let e = cross_ratio_set(&geodesic_tuple(&z, &t).unwrap(), &t, false).unwrap();
        let c = cr0(&z, &t).unwrap();
        diff(&e.coefficient_in(c.line.generator(), &t).unwrap(), &c.coefficient)
    });
    let law = worst(100, 61, |rng, i| {
        let z = sample::disk_point(rng, 1 + (i % 5) as usize, 0.9, &t).unwrap();
        (endo_norm(&cr0(&z, &t).unwrap()).ln() - 2.0 * dist_from_origin(&z)).abs()
    });
    vec![
        ("cross-ratio set = cr0 on geodesic tuples".into(), set, 1e-9),
        ("log ‖cr0(z)‖ − 2 d(0, z)".into(), law, 1e-9),
    ]
}

fn commutative_tracial() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let commutative = worst(100, 70, |rng, i| {
        let n = 1 + (i % 6) as usize;
        let z0 = sample::diagonal_disk_point(rng, n, 0.9, &t).unwrap();
        let z1 = sample::diagonal_disk_point(rng, n, 0.9, &t).unwrap();
        verify_commutative(&z0, &z1, &t).unwrap()
    });
    let alg = BlockAlgebra::new(vec![2, 2]).unwrap();
    let tracial = worst(100, 71, |rng, _| {
        let z0 = sample::block_disk_point(rng, &alg, 0.9, &t).unwrap();
        let z1 = sample::block_disk_point(rng, &alg, 0.9, &t).unwrap();
        verify_tracial(&alg, &z0, &z1, &t).unwrap()
    });
    vec![
        ("diagonal instances".into(), commutative, 1e-10),
        ("two 2×2 blocks".into(), tracial, 1e-10),
    ]
}

fn limits() -> Vec<(String, f64, f64)> {
    let t = Tolerances::default();
    let invertible = worst(100, 80, |rng, i| {
        let n = 1 + (i % 5) as usize;
        let z0 = sample::disk_point(rng, n, 0.9, &t).unwrap();
        let z1 = sample::disk_point(rng, n, 0.9, &t).unwrap();
        let geo = geodesic(&z0, &z1, &t).unwrap();
        let big_t = 30.0 / geo.base.lambda_min();
        let (_, plus) = limit_points(&z0, &z1, &t).unwrap();
        diff(&geo.sample(big_t).unwrap(), plus.matrix())
    });
    let deficient = worst(100, 81, |rng, i| {
        let n = 2 + (i % 4) as usize;
        let z = sample::diagonal_disk_point(rng, n, 0.9, &t).unwrap();
        // zero out every other diagonal entry
        let d: Vec<C64> = z.matrix().diagonal().iter().enumerate()
            .map(|(k, &v)| if k % 2 == 1 { C64::new(0.0, 0.0) } else { v })
            .collect();
        let z = DiskPoint::new(ComplexMatrix::from_diag(&d), &t).unwrap();
        let support: Vec<C64> = d.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { C64::new(0.0, 0.0) }).collect();
        let omega = ComplexMatrix::from_diag(&support);
        let geo = geodesic_origin(&z, &t);
        let lmin = geo.modulus_alpha.diagonal().iter().map(|v| v.re).filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        let (_, plus) = limit_points(&DiskPoint::origin(n), &z, &t).unwrap();
        diff(plus.matrix(), &omega).max(diff(&geo.sample(30.0 / lmin), &omega))
    });
    vec![
        ("invertible α, T = 30/λ_min".into(), invertible, 1e-6),
        ("rank-deficient diagonal, support limit".into(), deficient, 1e-9),
    ]
}

fn main() {
    let outcomes = vec![
        run(1, "scalar classical disk", Some(Duration::from_secs(1)), scalar_disk),
        run(2, "exp mod₀(Log₀ z) = cr(0, z)₀", Some(Duration::from_secs(10)), el_teo),
        run(3, "mod_{z0}(Log_{z0} z1) = log cr(z0, z1)_{z0}", None, el_coro),
        run(4, "U(θ)-invariance of distance", None, invariance),
        run(5, "series vs closed form for α", None, series),
        run(6, "Hopf fibration identities", None, fibration),
        run(7, "Borel group", None, borel),
        run(8, "cross-ratio set vs canonical choice", None, cross_ratio),
        run(9, "commutative and tracial identities", None, commutative_tracial),
        run(10, "geodesic limit convergence", None, limits),
    ];
    let mut failed = 0;
    for o in &outcomes {
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        let budget = o
            .budget
            .map(|b| format!(" (budget {:.0} s)", b.as_secs_f64()))
            .unwrap_or_default();
        println!(
            "criterion {:>2} {verdict}  {}  [{:.3} s{budget}]",
            o.id,
            o.title,
            o.elapsed.as_secs_f64()
        );
        for (name, residual, tol) in &o.checks {
            let mark = if residual <= tol { "ok " } else { "BAD" };
            println!("    {mark} {name}: {residual:.3e} ≤ {tol:.0e}");
        }
        if !o.passed() {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
