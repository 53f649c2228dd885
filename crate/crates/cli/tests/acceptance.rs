use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use muband_tool::scenario::Scenario;
use muband_core::assembly::{smooth_potential, verify_conditions, SmoothingSide};
use muband_core::bubble::planar::{enumerate_minimizers, solve_min_cut};
use muband_core::bubble::{
    brute_force_minimize, minimize_1d, minimize_2d, GridBand, PlanarGrid, Topology, WarpedBand,
};
use muband_core::comparison::{check_hypotheses, ell_negative, ell_nonneg, evaluate_partitioned, negative_threshold};
use muband_core::model_spaces::Interval;
use muband_core::{Error, ModelSpace};

fn verdict(name: &str, pass: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let within = elapsed <= limit;
    let tag = if pass && within { "PASS" } else { "FAIL" };
    println!("{tag} {name}: {detail} ({:.3}s, limit {}s)", elapsed.as_secs_f64(), limit.as_secs());
    assert!(pass, "{name}: {detail}");
    assert!(within, "{name}: took {elapsed:?}, limit {limit:?}");
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario(name: &str) -> Scenario {
    Scenario::load(&scenario_dir().join(name)).unwrap()
}

fn ode_residual(ms: &ModelSpace, grid: usize) -> f64 {
    let nf = ms.dimension() as f64;
    let sigma = ms.scalar_curvature();
    let mut worst: f64 = 0.0;
    for t in ms.domain().grid(grid) {
        let h = ms.potential_of(t).unwrap();
        let dh = ms.potential_slope_of(t).unwrap();
        let from_h = -nf / (nf - 1.0) * h * h - 2.0 * dh;
        let (phi, dphi, ddphi) = ms.warping_at(t).unwrap();
        let from_phi = -2.0 * (nf - 1.0) * ddphi / phi - (nf - 1.0) * (nf - 2.0) * (dphi / phi).powi(2);
        let reported = ms.scalar_curvature_of(t).unwrap();
        worst = worst.max((sigma - from_h).abs()).max((sigma - from_phi).abs()).max((reported - from_h).abs());
    }
    worst
}

#[test]
fn ode_identity() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 2..=7 {
        let nf = n as f64;
        for kappa in [0.5_f64, 1.0, 2.0] {
            let half = 0.9 * PI / (kappa.sqrt() * nf);
            worst = worst.max(ode_residual(&ModelSpace::spherical(n, kappa, -half, half).unwrap(), 10_000));
            cases += 1;
        }
        for (a, b) in [(0.1, 1.0), (0.5, 2.0), (1.0, 5.0)] {
            worst = worst.max(ode_residual(&ModelSpace::cone(n, a, b).unwrap(), 10_000));
            cases += 1;
        }
        for sigma in [0.5, 1.0, 4.0] {
            worst = worst.max(ode_residual(&ModelSpace::hyperbolic(n, sigma, 0.2, 3.0).unwrap(), 10_000));
            cases += 1;
        }
    }
    verdict(
        "ODE identity",
        worst < 1e-9,
        start.elapsed(),
        Duration::from_secs(1),
        &format!("{cases} models, max residual {worst:.3e} < 1e-9"),
    );
}

#[test]
fn closed_form_width() {
    let start = Instant::now();
    let exact = ell_nonneg(7, 1.0, PI / 7.0).unwrap().value;
    let err = (exact - 2.0 / 7.0).abs();
    let top = 2.0 * PI / 7.0;
    let samples: Vec<f64> =
        (1..=100).map(|i| ell_nonneg(7, 1.0, top * i as f64 / 101.0).unwrap().value).collect();
    let monotone = samples.windows(2).all(|w| w[1] < w[0]);
    let near_zero = ell_nonneg(7, 1.0, 1e-6).unwrap().value;
    let near_top = ell_nonneg(7, 1.0, top - 1e-6).unwrap().value;
    let pass = err < 1e-12 && monotone && near_zero > 1e5 && near_top < 1e-5;
    verdict(
        "closed-form width",
        pass,
        start.elapsed(),
        Duration::from_secs(1),
        &format!(
            "|ell - 2/7| = {err:.2e}, decreasing over 100 samples: {monotone}, ell(1e-6) = {near_zero:.3e}, ell(2pi/7 - 1e-6) = {near_top:.3e}"
        ),
    );
}

fn defining_residual(n: usize, kappa: f64, sigma: f64, d: f64, ell: f64) -> f64 {
    let nf = n as f64;
    let lhs = kappa.sqrt() * (nf - 1.0) * (kappa.sqrt() * nf * d / 4.0).tan();
    let rhs = (sigma * (nf - 1.0) / nf).sqrt() / ((sigma * nf).sqrt() * ell / (2.0 * (nf - 1.0).sqrt())).tanh();
    (lhs - rhs).abs()
}

#[test]
fn transcendental_width() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for kappa in [0.25_f64, 0.5, 1.0, 2.0, 4.0] {
        for f in [0.1, 0.25, 0.4, 0.55, 0.7] {
            let d = f * 2.0 * PI / (kappa.sqrt() * 7.0);
            let threshold = negative_threshold(7, kappa, d);
            for s in [0.01, 0.1, 0.3, 0.6, 0.9] {
                let sigma = s * threshold;
                let ell = ell_negative(7, kappa, sigma, d).unwrap().value;
                worst = worst.max(defining_residual(7, kappa, sigma, d, ell));
                points += 1;
            }
        }
    }
    let d = PI / 7.0;
    let small = (ell_negative(7, 1.0, 1e-8, d).unwrap().value - ell_nonneg(7, 1.0, d).unwrap().value).abs();
    verdict(
        "transcendental width",
        worst < 1e-10 && small < 1e-3,
        start.elapsed(),
        Duration::from_secs(5),
        &format!("{points} points, max residual {worst:.3e} < 1e-10, |ell_neg(1e-8) - ell_nonneg| = {small:.3e} < 1e-3"),
    );
}

/// ℓ along σ_{k+1} = σ_k + (threshold − σ_k)/2, starting halfway.
fn gap_halving_sequence(steps: usize) -> Vec<f64> {
    let d = PI / 7.0;
    let threshold = negative_threshold(7, 1.0, d);
    let mut sigma = 0.5 * threshold;
    let mut ells = vec![ell_negative(7, 1.0, sigma, d).unwrap().value];
    for _ in 0..steps {
        sigma += 0.5 * (threshold - sigma);
        ells.push(ell_negative(7, 1.0, sigma, d).unwrap().value);
    }
    ells
}

#[test]
fn ell_doubles_per_gap_halving() {
    let start = Instant::now();
    let ells = gap_halving_sequence(3);
    let ratios: Vec<f64> = ells.windows(2).map(|w| w[1] / w[0]).collect();
    verdict(
        "threshold divergence (ell doubles per halved gap)",
        ratios.iter().all(|r| *r >= 2.0),
        start.elapsed(),
        Duration::from_secs(5),
        &format!("ell = {ells:?}, ratios = {ratios:?}"),
    );
}

#[test]
fn ell_diverges_at_threshold() {
    let start = Instant::now();
    let ells = gap_halving_sequence(30);
    let increments: Vec<f64> = ells.windows(2).map(|w| w[1] - w[0]).collect();
    let nf = 7.0_f64;
    let threshold = negative_threshold(7, 1.0, PI / 7.0);
    let rate = (threshold * nf).sqrt() / (2.0 * (nf - 1.0).sqrt());
    let limit = 2f64.ln() / (2.0 * rate);
    let last = *increments.last().unwrap();
    let grows = increments.iter().all(|i| *i > 0.0);
    let divergent = matches!(ell_negative(7, 1.0, threshold, PI / 7.0), Err(Error::Threshold { .. } | Error::Divergent { .. }));
    verdict(
        "threshold divergence (unbounded logarithmic growth)",
        grows && (last - limit).abs() < 1e-3 * limit && divergent,
        start.elapsed(),
        Duration::from_secs(5),
        &format!("ell after 30 halvings = {:.4}, last increment {last:.6} vs ln2/2c = {limit:.6}", ells[30]),
    );
}

#[test]
fn smoothed_potential_bullets() {
    let start = Instant::now();
    let n = 7;
    let nf = n as f64;
    let ms = ModelSpace::spherical(n, 1.0, -0.2, 0.2).unwrap();
    let s = smooth_potential(&ms, 0.02, SmoothingSide::Both).unwrap();
    let cert = s.certify(10_000);
    let sigma = s.sigma();
    let mut excess = f64::NEG_INFINITY;
    let mut strict = f64::INFINITY;
    let mut flat = 0;
    for t in s.domain().grid(10_000) {
        let (h, dh) = s.eval(t);
        let q = -nf / (nf - 1.0) * h * h - 2.0 * dh;
        excess = excess.max(q - sigma);
        if dh == 0.0 {
            flat += 1;
            strict = strict.min(sigma - q);
        }
    }
    let pass = cert.passed && excess <= 1e-9 * sigma && flat > 0 && strict > 0.0 && cert.min_strict_margin > 0.0;
    verdict(
        "smoothed potential bullets",
        pass,
        start.elapsed(),
        Duration::from_secs(1),
        &format!(
            "certificate {}, identity deviation {:.1e}, max excess {excess:.2e}, {flat} flat samples with min strict margin {strict:.4}",
            cert.passed, cert.identity_deviation
        ),
    );
}

#[test]
fn assembly_continuity_and_condition() {
    let start = Instant::now();
    let sc = scenario("cor-analysis.toml");
    let models = sc.models().unwrap();
    let spec = sc.band_spec(&models).unwrap();
    let h = sc.assembled().unwrap();
    let mismatch = h.max_junction_mismatch();
    let cert = verify_conditions(&h, &spec);

    let mut broken = models.clone();
    let d = broken[1].domain();
    broken[1] = broken[1].with_domain(d.lo + 1e-3, d.hi).unwrap();
    let broken_spec = sc.band_spec(&broken).unwrap();
    let hypothesis = check_hypotheses(&broken_spec, &broken);
    let rejected = matches!(hypothesis, Err(Error::Hypothesis { bullet: 3, .. }))
        && matches!(evaluate_partitioned(&broken_spec, &broken), Err(Error::Hypothesis { bullet: 3, .. }));
    verdict(
        "assembly continuity and condition",
        mismatch < 1e-12 && cert.min_margin > 0.0 && cert.passed && rejected,
        start.elapsed(),
        Duration::from_secs(1),
        &format!(
            "junction mismatch {mismatch:.2e}, min margin {:.4}, broken matching -> {:?}",
            cert.min_margin,
            hypothesis.err().map(|e| e.to_string())
        ),
    );
}

#[test]
fn first_variation_1d() {
    let start = Instant::now();
    let flat = WarpedBand::flat(3, Interval::new(-1.0, 1.0), 2001, |t| (-t, -1.0)).unwrap();
    let flat_result = minimize_1d(&flat).unwrap();

    let mut sc = scenario("warped-spherical-assembled.toml");
    let coarse = match sc.grid_band().unwrap() {
        GridBand::Warped1d(b) => b,
        _ => unreachable!(),
    };
    let rc = minimize_1d(&coarse).unwrap();
    sc.solver.points = Some(2 * coarse.points() - 1);
    let fine = match sc.grid_band().unwrap() {
        GridBand::Warped1d(b) => b,
        _ => unreachable!(),
    };
    let rf = minimize_1d(&fine).unwrap();
    // independent residual at the reported s*
    let recompute = |b: &WarpedBand, s: f64| (b.slice_curvature(s) - b.potential(s).0).abs();
    let (res_c, res_f) = (recompute(&coarse, rc.s_star), recompute(&fine, rf.s_star));
    let ratio = res_f / res_c;
    let dt = coarse.spacing();
    let pass = flat_result.s_star == 0.0
        && (dt - 1e-3).abs() < 1e-5
        && res_c <= 2.0 * dt
        && ratio <= 0.7
        && (res_c - rc.residual).abs() <= 1e-12;
    verdict(
        "1D first variation",
        pass,
        start.elapsed(),
        Duration::from_secs(2),
        &format!(
            "flat s* = {}, spherical dt = {dt:.4e}, residual {res_c:.3e} <= {:.1e}, halved dt residual {res_f:.3e}, ratio {ratio:.3}",
            flat_result.s_star,
            2.0 * dt
        ),
    );
}

fn random_grid(rng: &mut ChaCha8Rng) -> PlanarGrid {
    let topology = if rng.gen_bool(0.5) { Topology::Cylinder } else { Topology::Rectangle };
    let (nx, ny) = loop {
        let nx = rng.gen_range(3..=6);
        let ny = rng.gen_range(if topology == Topology::Cylinder { 3 } else { 1 }..=5);
        if (nx - 2) * ny <= 16 {
            break (nx, ny);
        }
    };
    let h: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(-4.0..4.0)).collect();
    PlanarGrid::new(nx, ny, 0.5, topology, h).unwrap().with_boundary_curvature(10.0, 10.0)
}

#[test]
fn min_cut_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut agree = 0;
    let mut failures = Vec::new();
    for k in 0..30 {
        let grid = random_grid(&mut rng);
        let fast = minimize_2d(&grid).unwrap();
        let oracle = brute_force_minimize(&grid).unwrap();
        if fast.quantized_energy == oracle.quantized_energy
            && (fast.energy - oracle.energy).abs() <= fast.quantization_bound
            && fast.set == oracle.set
        {
            agree += 1;
        } else {
            failures.push(k);
        }
    }
    verdict(
        "2D min-cut oracle equivalence",
        agree == 30,
        start.elapsed(),
        Duration::from_secs(30),
        &format!("{agree}/30 instances match the exhaustive minimum exactly, failures {failures:?}"),
    );
}

#[test]
fn planar_geometry() {
    let start = Instant::now();
    let linear = scenario("flat-cylinder-h-linear.toml");
    let GridBand::Grid2d(grid) = linear.grid_band().unwrap() else { unreachable!() };
    let r = minimize_2d(&grid).unwrap();
    let centroid = r.boundary_centroid_x().unwrap();
    let zero = scenario("flat-cylinder-h-zero.toml");
    let GridBand::Grid2d(flat) = zero.grid_band().unwrap() else { unreachable!() };
    let z = minimize_2d(&flat).unwrap();
    let width = flat.height();
    let rel = (z.perimeter - width).abs() / width;
    verdict(
        "2D geometry",
        (centroid - 1.0).abs() <= 2.0 * grid.delta() && rel <= 0.05,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("centroid x = {centroid:.6} (cell {}), h = 0 cut length {:.5} ({:.2}% off W)", grid.delta(), z.perimeter, 100.0 * rel),
    );
}

#[test]
fn barrier_detection() {
    let start = Instant::now();
    let mut caught = 0;
    let mut total = 0;
    for c in [0.1, 1.0, 7.5] {
        for topology in [Topology::Cylinder, Topology::Rectangle] {
            let grid = PlanarGrid::from_fn(12, 6, 0.25, topology, move |_, _| c).unwrap().with_boundary_curvature(0.0, 0.0);
            total += 1;
            if matches!(GridBand::Grid2d(grid).minimize(), Err(Error::Barrier { .. })) {
                caught += 1;
            }
        }
        let band = WarpedBand::flat(4, Interval::new(0.0, 1.0), 101, move |_| (c, 0.0)).unwrap();
        total += 1;
        if matches!(GridBand::Warped1d(band).minimize(), Err(Error::Barrier { .. })) {
            caught += 1;
        }
    }
    verdict(
        "barrier detection",
        caught == total,
        start.elapsed(),
        Duration::from_secs(1),
        &format!("{caught}/{total} constant positive potentials rejected with a barrier error"),
    );
}

#[test]
fn monotonicity_and_lattice() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut antitone = 0;
    let mut nested = 0;
    for _ in 0..20 {
        let grid = random_grid(&mut rng);
        let bump: Vec<f64> = grid.h().iter().map(|h| h + rng.gen_range(0.0..2.0)).collect();
        let higher = grid.clone().with_h(bump).unwrap();
        let e_low = grid.quantized_energy(&solve_min_cut(&grid).0).unwrap();
        let e_high = higher.quantized_energy(&solve_min_cut(&higher).0).unwrap();
        if e_high <= e_low {
            antitone += 1;
        }
        let (best, all) = enumerate_minimizers(&grid).unwrap();
        let canonical = solve_min_cut(&grid).0;
        if grid.quantized_energy(&canonical).unwrap() == best && all.iter().all(|m| canonical.is_subset(m)) && all.contains(&canonical) {
            nested += 1;
        }
    }
    verdict(
        "monotonicity and lattice",
        antitone == 20 && nested == 20,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("antitone in h on {antitone}/20, canonical minimizer inside every minimizer on {nested}/20"),
    );
}

const SUITE: [(&str, &str, i32); 8] = [
    ("verify", "cor-analysis.toml", 3),
    ("verify", "cor-analysis1.toml", 3),
    ("verify", "cor-index.toml", 0),
    ("bubble", "flat-cylinder-h-linear.toml", 0),
    ("bubble", "flat-cylinder-h-zero.toml", 0),
    ("bubble", "warped-flat-linear.toml", 0),
    ("bubble", "warped-spherical-assembled.toml", 0),
    ("sweep", "sweep-n7.toml", 0),
];

fn run_suite(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for (cmd, name, code) in SUITE {
        let out = root.join(name.trim_end_matches(".toml"));
        let status = Command::new(env!("CARGO_BIN_EXE_muband"))
            .arg(cmd)
            .arg(scenario_dir().join(name))
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(code), "{cmd} {name}: {}", String::from_utf8_lossy(&status.stderr));
        let mut entries: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.extension().is_some_and(|e| e == "csv") {
                files.push((format!("{name}/{}", p.file_name().unwrap().to_string_lossy()), std::fs::read(&p).unwrap()));
            }
        }
    }
    files
}

#[test]
fn cli_determinism() {
    let start = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_suite(a.path());
    let second = run_suite(b.path());
    let differing: Vec<&String> =
        first.iter().zip(&second).filter(|(x, y)| x != y).map(|(x, _)| &x.0).collect();
    let bytes: usize = first.iter().map(|f| f.1.len()).sum();
    verdict(
        "CLI determinism",
        first.len() == second.len() && differing.is_empty() && !first.is_empty(),
        start.elapsed(),
        Duration::from_secs(120),
        &format!("{} CSV files ({bytes} bytes) identical across two runs of {} scenarios, differing {differing:?}", first.len(), SUITE.len()),
    );
}
