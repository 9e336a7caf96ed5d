//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any failed.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use mpshl::dmrg::{optimize_site_set, sweep, DmrgOptions, LocalSolver, SiteSetStrategy};
use mpshl::hamiltonian::{ChainHamiltonian, LocalTerm};
use mpshl::io::{instance_from_json, instance_to_json, read_instance, write_instance};
use mpshl::linalg::{CMatrix, C64};
use mpshl::mps::{capped_profile, random_mps};
use mpshl::oracles::{
    bqp_min, dense_ground_energy, fixed_gauge_check, grid_min_big, verify_indicator_family,
    windows_decomposition_check, IndicatorCheckOptions,
};
use mpshl::reduction::{
    assemble_instance, big_minimum, big_objective, bit_strings, kappa, solve_instance, AssemblyOptions, BqpInstance,
    IndicatorFamily, SolveMode, SolveOptions, Witness, WindowKind,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---- independent oracles -------------------------------------------------

/// `<v|H|v>` with `H` applied window by window through index arithmetic.
fn dense_expectation(v: &[C64], term: &CMatrix, n: usize, d: usize, r: usize) -> f64 {
    let block = d.pow(r as u32);
    let mut total = C64::new(0.0, 0.0);
    for start in 0..=(n - r) {
        let inner = d.pow((n - start - r) as u32);
        let outer = d.pow(start as u32);
        for o in 0..outer {
            for i in 0..inner {
                for a in 0..block {
                    let ia = (o * block + a) * inner + i;
                    for b in 0..block {
                        let h = term[(a, b)];
                        if h == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let ib = (o * block + b) * inner + i;
                        total += v[ia].conj() * h * v[ib];
                    }
                }
            }
        }
    }
    total.re
}

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Minimum of `b M b^T` and its lexicographically first minimizer, by plain
/// enumeration in increasing binary order.
fn brute_bqp(m: &DMatrix<f64>) -> (f64, Vec<u8>) {
    let k = m.nrows();
    let mut best = (f64::INFINITY, Vec::new());
    for word in 0u32..(1 << k) {
        let bits: Vec<u8> = (0..k).map(|i| ((word >> (k - 1 - i)) & 1) as u8).collect();
        let mut q = 0.0;
        for i in 0..k {
            for j in 0..k {
                q += bits[i] as f64 * m[(i, j)] * bits[j] as f64;
            }
        }
        if q < best.0 - 1e-12 {
            best = (q, bits);
        }
    }
    best
}

fn max_clique(vertices: usize, edges: &[(usize, usize)]) -> usize {
    let adj = |a: usize, b: usize| edges.iter().any(|&(u, v)| (u, v) == (a, b) || (u, v) == (b, a));
    let mut best = 0;
    for set in 0u32..(1 << vertices) {
        let members: Vec<usize> = (0..vertices).filter(|i| set >> i & 1 == 1).collect();
        let clique = members.iter().enumerate().all(|(p, &a)| members[p + 1..].iter().all(|&b| adj(a, b)));
        if clique {
            best = best.max(members.len());
        }
    }
    best
}

fn random_bqp(k: usize, rng: &mut ChaCha8Rng) -> BqpInstance {
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    BqpInstance::new(m).expect("entries in the box")
}

// ---- criteria --------------------------------------------------------------

fn gauge_suite() -> Check {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_gauge, mut worst_norm) = (0.0f64, 0.0f64);
    for seed in 0..200u64 {
        let n = rng.random_range(1..=20usize);
        let d = rng.random_range(1..=4usize);
        let bond = rng.random_range(1..=16usize);
        let psi = random_mps(n, d, &capped_profile(n, d, bond), seed).map_err(err)?;
        let left = psi.left_canonicalize().map_err(err)?;
        let g = left.gauge_residuals().into_iter().fold(0.0, f64::max);
        worst_gauge = worst_gauge.max(g);
        worst_norm = worst_norm.max((left.norm() - 1.0).abs());
        ensure!(g <= 1e-12, "seed {seed} (n={n}, d={d}, D={bond}): gauge residual {g:.3e}");
        ensure!((left.norm() - 1.0).abs() <= 1e-12, "seed {seed}: norm {}", left.norm());
    }
    let t = clock.elapsed().as_secs_f64();
    ensure!(t < 30.0, "took {t:.1} s");
    Ok(format!("200 states, max gauge residual {worst_gauge:.2e}, max |norm - 1| {worst_norm:.2e}, {t:.2} s"))
}

fn engine_vs_dense(increases: &mut Vec<f64>) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for case in 0..50u64 {
        let d = rng.random_range(2..=4usize);
        let r = rng.random_range(1..=3usize).min(if d == 4 { 2 } else { 3 });
        let max_n = (14.0 / (d as f64).log2()).floor() as usize;
        let n = rng.random_range(r.max(2)..=max_n.min(10));
        let term = random_hermitian(d.pow(r as u32), &mut rng);
        let h = ChainHamiltonian::new(LocalTerm::dense(r, d, term.clone()).map_err(err)?, n).map_err(err)?;
        let psi = random_mps(n, d, &capped_profile(n, d, 6), 100 + case).map_err(err)?;
        let v = psi.to_dense(1 << 14).map_err(err)?;
        let exact = dense_expectation(&v, &term, n, d, r);
        let e = psi.energy(&h).map_err(err)?;
        let scale = exact.abs().max(1.0);
        worst = worst.max((e - exact).abs() / scale);
        ensure!((e - exact).abs() <= 1e-9 * scale, "case {case} (n={n}, d={d}, r={r}): {e} vs dense {exact}");
    }

    let clock = Instant::now();
    let h = ChainHamiltonian::tfi(10, 1.0, true).map_err(err)?;
    let dense = dense_ground_energy(&h, 1 << 20).map_err(err)?;
    let psi = random_mps(10, 2, &capped_profile(10, 2, 16), 7).map_err(err)?;
    let opts = DmrgOptions { max_sweeps: 20, ..Default::default() };
    let (_, report) = sweep(&psi, &h, &opts).map_err(err)?;
    let t = clock.elapsed().as_secs_f64();
    increases.push(report.max_increase());
    let gap = report.final_energy - dense;
    ensure!(gap.abs() <= 1e-10, "TFI n=10: sweep {} vs dense {dense}", report.final_energy);
    ensure!(report.sweeps <= 20, "{} sweeps", report.sweeps);
    ensure!(t < 10.0, "TFI sweep took {t:.1} s");

    let two = ChainHamiltonian::tfi(2, 1.0, true).map_err(err)?;
    let psi2 = random_mps(2, 2, &[1, 2, 1], 3).map_err(err)?;
    let (_, r2) = sweep(&psi2, &two, &DmrgOptions::default()).map_err(err)?;
    increases.push(r2.max_increase());
    let analytic = -(5f64.sqrt());
    ensure!((r2.final_energy - analytic).abs() <= 1e-12, "n=2: {} vs -sqrt 5", r2.final_energy);
    Ok(format!(
        "50 random cases, max rel error {worst:.2e}; TFI n=10 D=16 gap {gap:.2e} in {} sweeps ({t:.2} s); n=2 error {:.2e}",
        report.sweeps,
        (r2.final_energy - analytic).abs()
    ))
}

fn monotonicity(increases: &mut Vec<f64>) -> Check {
    let mut runs = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for &g in &[0.3, 1.0, 1.7] {
        for &(n, bond) in &[(6, 2), (8, 4), (12, 8)] {
            for corrected in [false, true] {
                let h = ChainHamiltonian::tfi(n, g, corrected).map_err(err)?;
                let psi = random_mps(n, 2, &capped_profile(n, 2, bond), runs).map_err(err)?;
                let (_, rep) = sweep(&psi, &h, &DmrgOptions { max_sweeps: 20, ..Default::default() }).map_err(err)?;
                increases.push(rep.max_increase());
                runs += 1;
            }
        }
    }
    for _ in 0..10 {
        let d = rng.random_range(2..=3usize);
        let n = rng.random_range(4..=8usize);
        let h = ChainHamiltonian::new(LocalTerm::dense(2, d, random_hermitian(d * d, &mut rng)).map_err(err)?, n)
            .map_err(err)?;
        let psi = random_mps(n, d, &capped_profile(n, d, 4), runs).map_err(err)?;
        let (_, rep) = sweep(&psi, &h, &DmrgOptions { max_sweeps: 20, ..Default::default() }).map_err(err)?;
        increases.push(rep.max_increase());
        // restricted runs on two interior sites
        let left = psi.left_canonicalize().map_err(err)?;
        for local in [LocalSolver::Eigen, LocalSolver::Isometric] {
            let strategy = SiteSetStrategy::Alternating { local, max_rounds: 10 };
            let (_, rep) = optimize_site_set(&left, &h, &[1, n - 2], &strategy, &DmrgOptions::default(), None)
                .map_err(err)?;
            let trace: Vec<f64> = std::iter::once(rep.initial_energy).chain(rep.energies.iter().copied()).collect();
            increases.push(trace.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max));
        }
        runs += 1;
    }
    let worst = increases.iter().copied().fold(0.0, f64::max);
    ensure!(worst <= 1e-12, "a local solve raised the energy by {worst:.3e}");
    Ok(format!("{} traces, largest local increase {worst:.2e}", increases.len()))
}

fn big_structure() -> Check {
    let mut worst_grid = 0.0f64;
    let mut count = 0;
    for code in 0..81u32 {
        let digits: Vec<f64> = (0..4).map(|p| ((code / 3u32.pow(p)) % 3) as f64 - 1.0).collect();
        let m = DMatrix::from_row_slice(2, 2, &digits);
        let bqp = BqpInstance::new(m.clone()).map_err(err)?;
        let n = 3.0;
        // b M b^T is the same for M and its symmetric part
        let (bmin, _) = brute_bqp(&m);
        let expected = -n + bmin / (2.0 * 4.0);
        let big = big_minimum(&bqp).map_err(err)?;
        ensure!((big.value - expected).abs() <= 1e-12, "M={digits:?}: {} vs {expected}", big.value);
        ensure!(!big.witnesses.is_empty(), "M={digits:?}: no witness");
        for w in &big.witnesses {
            ensure!(Witness::satisfies_conditions(&w.x, &w.y), "M={digits:?}: witness {:?} breaks (i)-(iii)", w.bits);
            let f = big_objective(&w.x, &w.y, &bqp).map_err(err)?;
            ensure!((f - expected).abs() <= 1e-12, "M={digits:?}: witness value {f}");
        }
        // every binary minimizer of b M b^T is listed
        let listed: Vec<Vec<u8>> = big.witnesses.iter().map(|w| w.bits.clone()).collect();
        for bits in bit_strings(2) {
            let f = big_objective(&Witness::from_bits(&bits).x, &Witness::from_bits(&bits).y, &bqp).map_err(err)?;
            ensure!((f - expected).abs() > 1e-12 || listed.contains(&bits), "M={digits:?}: missing witness {bits:?}");
        }
        let grid = grid_min_big(&bqp, 8, 1e-9).map_err(err)?;
        worst_grid = worst_grid.max(expected - grid.value);
        ensure!(grid.value >= expected - 1e-9, "M={digits:?}: grid {} undercuts {expected}", grid.value);
        count += 1;
    }
    Ok(format!("{count} matrices, largest grid undercut {worst_grid:.2e}"))
}

fn indicator_contract() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut notes = Vec::new();
    for n in 2..=4usize {
        // the family encodes nonnegative tables below 1, as produced by the penalty table
        let y = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.01..0.99));
        let clock = Instant::now();
        let fam = IndicatorFamily::build(&y, 1.0).map_err(err)?;
        let r = verify_indicator_family(&fam, &IndicatorCheckOptions::default());
        let t = clock.elapsed().as_secs_f64();
        let p = &r.payload;
        ensure!(r.exhaustive, "N={n}: not exhaustive");
        ensure!(p["words_checked"].as_u64() == Some(1u64 << (n * n)), "N={n}: {} words", p["words_checked"]);
        ensure!(p["nonzero_outcomes"].as_u64() == Some((n * n) as u64), "N={n}: {} nonzero", p["nonzero_outcomes"]);
        ensure!(r.passed == Some(true), "N={n}: {}", p["failures"]);
        ensure!(p["max_value_error"].as_f64().unwrap_or(1.0) <= 1e-12, "N={n}: value error");
        // values are gamma * Y entrywise
        let expected = fam.expected_values();
        let target = &y * fam.gamma();
        ensure!((expected - target).abs().max() <= 1e-12, "N={n}: family values differ from gamma Y");
        ensure!(p["max_gauge_residual"].as_f64().unwrap_or(1.0) <= 1e-12, "N={n}: gauge");
        // positions must be distinct
        let positions = p["positions"].as_array().cloned().unwrap_or_default();
        let mut unique = positions.iter().map(|v| v.to_string()).collect::<Vec<_>>();
        unique.sort();
        unique.dedup();
        ensure!(unique.len() == n * n, "N={n}: {} distinct positions", unique.len());
        if n == 4 {
            ensure!(t < 60.0, "N=4 took {t:.1} s");
        }
        // the right-centre sites of an assembled chain are gauge exact
        let bqp = random_bqp(n - 1, &mut rng);
        let inst = assemble_instance(&bqp, &AssemblyOptions::default()).map_err(err)?;
        let rc = inst.layout().right_center.clone();
        let worst = inst.fixed_site_residuals().iter().filter(|(j, _)| rc.contains(j)).map(|r| r.1).fold(0.0, f64::max);
        ensure!(worst <= 1e-12, "N={n}: right-centre residual {worst:.3e}");
        notes.push(format!("N={n} {} words {t:.3} s", 1u64 << (n * n)));
    }
    Ok(notes.join(", "))
}

fn assembly_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut energy_time = 0.0;
    let mut shape = String::new();
    for n in 2..=6usize {
        let bqp = random_bqp(n - 1, &mut rng);
        let inst = assemble_instance(&bqp, &AssemblyOptions::default()).map_err(err)?;
        let l = inst.layout();
        let dim = 2 * n * n + n;
        let m = (dim as f64).log2().ceil() as usize;
        ensure!(l.dim == dim, "N={n}: D={}", l.dim);
        ensure!(l.m == m, "N={n}: m={}", l.m);
        ensure!(l.sites == n * n + 6 + 2 * m, "N={n}: n={}", l.sites);
        ensure!(inst.state().len() == l.sites && inst.hamiltonian().n() == l.sites, "N={n}: chain length");
        ensure!(inst.state().max_bond() <= dim, "N={n}: bond {}", inst.state().max_bond());
        let gauge = fixed_gauge_check(&inst, 1e-12);
        ensure!(gauge.passed == Some(true), "N={n}: fixed sites {}", gauge.payload["failing"]);
        if n == 6 {
            let clock = Instant::now();
            let e = inst.state().energy(inst.hamiltonian()).map_err(err)?;
            energy_time = clock.elapsed().as_secs_f64();
            ensure!(e.is_finite(), "N=6 energy {e}");
            ensure!(energy_time < 5.0, "N=6 energy took {energy_time:.2} s");
            shape = format!("N=6: D={}, m={}, n={}", l.dim, l.m, l.sites);
        }
    }
    Ok(format!("N=2..6 consistent; {shape}; energy {energy_time:.3} s"))
}

fn window_profile() -> Check {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut notes = Vec::new();
    for n in 2..=3usize {
        let bqp = random_bqp(n - 1, &mut rng);
        let inst = assemble_instance(&bqp, &AssemblyOptions::default()).map_err(err)?;
        let r = windows_decomposition_check(&inst, 50, 11).map_err(err)?.without_timing();
        let p = &r.payload;
        let records = p["records"].as_array().cloned().unwrap_or_default();
        ensure!(records.len() == 50, "N={n}: {} records", records.len());
        let kinds = inst.window_kinds();
        let mut tail_max = 0.0f64;
        let mut add_max = 0.0f64;
        for rec in &records {
            let profile: Vec<f64> =
                rec["profile"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            ensure!(profile.len() == kinds.len(), "N={n}: profile length");
            for (e, k) in profile.iter().zip(&kinds) {
                if *k == WindowKind::Tail {
                    tail_max = tail_max.max(e.abs());
                }
            }
            let sum: f64 = profile.iter().sum();
            add_max = add_max.max((sum - rec["energy"].as_f64().unwrap()).abs());
        }
        ensure!(tail_max <= 1e-12, "N={n}: tail window energy {tail_max:.3e}");
        ensure!(add_max <= 1e-12, "N={n}: window sum off by {add_max:.3e}");
        ensure!(r.passed == Some(true), "N={n}: report says failed");
        // report consistency
        ensure!((p["kappa"].as_f64().unwrap() - kappa(n)).abs() <= 1e-15, "N={n}: kappa");
        ensure!(p["gamma"].as_f64() == Some(inst.gamma()), "N={n}: gamma");
        ensure!((p["tail_max_abs"].as_f64().unwrap() - tail_max).abs() <= 1e-15, "N={n}: tail summary");
        let f = &p["findings"];
        let literal_gap = records
            .iter()
            .map(|r| (r["energy"].as_f64().unwrap() - r["literal_identity"].as_f64().unwrap()).abs())
            .fold(0.0, f64::max);
        ensure!(f["literal_identity_observed"].as_bool() == Some(literal_gap <= 1e-9), "N={n}: literal finding");
        let rc = records.iter().map(|r| r["right_center"].as_f64().unwrap().abs()).fold(0.0, f64::max);
        ensure!(f["right_center_contributes"].as_bool() == Some(rc > 1e-12), "N={n}: right-centre finding");
        let path = dir.join(format!("windows_N{n}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&r).map_err(err)?).map_err(err)?;
        notes.push(format!(
            "N={n}: literal identity {}, right centre {}",
            if literal_gap <= 1e-9 { "observed" } else { "not observed" },
            if rc > 1e-12 { "contributes" } else { "silent" }
        ));
    }
    Ok(notes.join("; "))
}

fn certified_solver() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let opts = SolveOptions { chain_energy: false, ..Default::default() };
    let mut count = 0;
    for n in 2..=4usize {
        for case in 0..20 {
            let bqp = random_bqp(n - 1, &mut rng);
            let oracle = bqp_min(&bqp).map_err(err)?;
            let (bv, bb) = brute_bqp(bqp.matrix());
            ensure!((oracle.value - bv).abs() <= 1e-12 && oracle.argmins[0] == bb, "N={n} case {case}: oracles disagree");
            let inst = assemble_instance(&bqp, &AssemblyOptions::default()).map_err(err)?;
            let out = solve_instance(&inst, SolveMode::Enumerate, &opts).map_err(err)?;
            ensure!(out.bits == oracle.argmins[0], "N={n} case {case}: {:?} vs {:?}", out.bits, oracle.argmins[0]);
            ensure!((out.value - oracle.value).abs() <= 1e-12, "N={n} case {case}: value {}", out.value);
            count += 1;
        }
    }
    Ok(format!("{count} instances match"))
}

fn run_cli(args: &[&str]) -> std::result::Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_mpshl")).args(args).env_remove("MPSHL_JSON").output().map_err(err)
}

fn clique_pipeline(dir: &Path) -> Check {
    let clock = Instant::now();
    let graphs: [(&str, usize, Vec<(usize, usize)>, usize); 3] = [
        ("triangle", 3, vec![(1, 2), (2, 3), (1, 3)], 3),
        ("bowtie", 5, vec![(1, 2), (2, 3), (1, 3), (3, 4), (4, 5), (3, 5)], 3),
        ("k4_pendant", 5, vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4), (4, 5)], 4),
    ];
    let mut notes = Vec::new();
    for (name, v, edges, want) in &graphs {
        let zero_based: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
        ensure!(max_clique(*v, &zero_based) == *want, "{name}: brute force disagrees with the expected size");
        let mut text = format!("c {name}\np edge {v} {}\n", edges.len());
        for (a, b) in edges {
            text.push_str(&format!("e {a} {b}\n"));
        }
        let input = dir.join(format!("{name}.col"));
        let inst = dir.join(format!("{name}.json"));
        std::fs::write(&input, text).map_err(err)?;
        let out = run_cli(&["reduce", input.to_str().unwrap(), "-o", inst.to_str().unwrap()])?;
        ensure!(out.status.success(), "{name}: reduce failed: {}", String::from_utf8_lossy(&out.stderr));
        let out = run_cli(&["--json", "solve", inst.to_str().unwrap()])?;
        ensure!(out.status.success(), "{name}: solve failed: {}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(err)?;
        let size = v["clique_size"].as_u64().unwrap_or(0) as usize;
        ensure!(size == *want, "{name}: clique size {size}, want {want}");
        notes.push(format!("{name} {size}"));
    }
    let t = clock.elapsed().as_secs_f64();
    ensure!(t < 10.0, "pipeline took {t:.1} s");
    Ok(format!("{} ({t:.2} s)", notes.join(", ")))
}

fn determinism(dir: &Path) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for n in 2..=4usize {
        let bqp = random_bqp(n - 1, &mut rng);
        let inst = assemble_instance(&bqp, &AssemblyOptions::default()).map_err(err)?;
        let path = dir.join(format!("round_trip_{n}.json"));
        write_instance(&path, &inst).map_err(err)?;
        let back = read_instance(&path).map_err(err)?;
        ensure!(back.bqp().matrix() == inst.bqp().matrix(), "N={n}: M changed");
        ensure!(back.state() == inst.state(), "N={n}: tensors changed");
        ensure!(back.hamiltonian() == inst.hamiltonian(), "N={n}: Hamiltonian changed");
        ensure!(back.layout() == inst.layout(), "N={n}: layout changed");
        ensure!(back.kappa().to_bits() == inst.kappa().to_bits(), "N={n}: kappa changed");
        let again = instance_to_json(&instance_from_json(&instance_to_json(&inst).map_err(err)?).map_err(err)?)
            .map_err(err)?;
        ensure!(again == instance_to_json(&inst).map_err(err)?, "N={n}: JSON text not stable");
    }
    let inst = dir.join("round_trip_3.json");
    let inst = inst.to_str().unwrap();
    let commands: [&[&str]; 5] = [
        &["--json", "--seed", "5", "solve", inst, "--mode", "alternating", "--starts", "2", "--max-rounds", "3"],
        &["--json", "--seed", "5", "solve", inst],
        &["--json", "--seed", "5", "verify", inst, "--samples", "1000", "--windows", "2"],
        &["--json", "--seed", "5", "report", inst],
        &["--json", "--seed", "5", "sweep", "--n", "8", "--D", "4"],
    ];
    for args in commands {
        let a = run_cli(args)?;
        let b = run_cli(args)?;
        ensure!(a.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&a.stderr));
        ensure!(a.stdout == b.stdout, "{args:?}: outputs differ");
        ensure!(!a.stdout.is_empty(), "{args:?}: empty output");
    }
    Ok("3 round trips bit-exact, 5 commands byte-identical".into())
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut increases = Vec::new();
    let results: Vec<(&str, Check)> = vec![
        ("1 gauge suite", gauge_suite()),
        ("2 engine vs dense oracle", engine_vs_dense(&mut increases)),
        ("3 sweep monotonicity", monotonicity(&mut increases)),
        ("4 penalty objective structure", big_structure()),
        ("5 indicator contract", indicator_contract()),
        ("6 assembly invariants", assembly_invariants()),
        ("7 window profile", window_profile()),
        ("8 certified solver vs oracle", certified_solver()),
        ("9 clique pipeline", clique_pipeline(dir.path())),
        ("10 determinism and round trip", determinism(dir.path())),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
