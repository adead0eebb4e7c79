//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use schurmult::cones::{cmin_member_exact, dmax_sample, verify_pmn};
use schurmult::json::MultiplierWire;
use schurmult::linalg::{eigh, psd_check, Complex, ComplexMatrix, HermitianMatrix, EIG_TOL};
use schurmult::multiplier::{restrict, schur_apply, BlockMultiplier, ScalarKernel};
use schurmult::pattern::{fill_in, Pattern};
use schurmult::random::{gue, random_matrix, trial_rng, wishart};
use schurmult::schur_engine::{cb_norm_upper, factorize, norm_bounds, positivity_equivalences};
use schurmult_cli::report::{CompleteReport, CounterexampleReport};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["schurmult"];
    argv.extend_from_slice(args);
    let code = schurmult_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, v: &T) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn gnp_edges<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            if rng.random_bool(p) {
                edges.push((x, y));
            }
        }
    }
    edges
}

fn bits(m: &ComplexMatrix) -> Vec<(u64, u64)> {
    m.as_slice().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

fn criterion_1() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for t in 0..200u64 {
        let mut rng = trial_rng(0xACCE_0001, t);
        let n = rng.random_range(2..=12);
        let d = rng.random_range(1..=3);
        let p = rng.random_range(0.15..0.7);
        let (pattern, _) = fill_in(&Pattern::from_edges(n, &gnp_edges(&mut rng, n, p)));
        let rank = rng.random_range(1..=n * d);
        let big = wishart(&mut rng, n * d, rank);
        let phi = restrict(&BlockMultiplier::from_assembled(n, d, big.as_matrix()).unwrap(), &pattern).unwrap();
        let file = write_json(dir.path(), &format!("phi{t}.json"), &MultiplierWire::from_multiplier(&phi));
        let seed = t.to_string();
        let (code, out, err) = run_cli(&["complete", &file, "--trials", "50", "--seed", &seed]);
        if code != 0 {
            return verdict(false, format!("instance {t} (n={n}, d={d}): exit {code}: {err}"));
        }
        let report: CompleteReport = serde_json::from_str(&out).unwrap();
        let psi = report.completion.multiplier.to_full().unwrap();
        for (&(x, y), b) in phi.blocks() {
            if bits(psi.block(x, y)) != bits(b) {
                return verdict(false, format!("instance {t}: block ({x}, {y}) changed"));
            }
        }
        let norm = schurmult::multiplier::assemble_full(&psi).frobenius_norm();
        let rel = report.completion.min_eig / norm;
        worst = worst.min(rel);
        if report.completion.min_eig < -1e-8 * norm {
            return verdict(false, format!("instance {t}: min_eig {:e} below -1e-8·{norm:e}", report.completion.min_eig));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        elapsed < Duration::from_secs(30),
        format!("200 instances, all exit 0, restriction bitwise exact, worst min_eig/‖ψ‖_F = {worst:e}, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut max_err = 0.0f64;
    for n in 1..=4 {
        for k in 1..=4 {
            let r = verify_pmn(n, k, 500, (n * 10 + k) as u64).unwrap();
            max_err = max_err.max(r.max_err);
            if r.breaches != 0 || r.max_err > 1e-8 {
                return verdict(false, format!("(n, k) = ({n}, {k}): {} breaches, max_err {:e}", r.breaches, r.max_err));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        elapsed < Duration::from_secs(10),
        format!("16 configurations x 500 trials, zero breaches, max_err {max_err:e}, {elapsed:.2?}"),
    )
}

fn criterion_3() -> Verdict {
    let mut disagreements = 0;
    let mut j_misses = 0;
    let mut four_way = 0;
    for t in 0..200u64 {
        let mut rng = trial_rng(0xACCE_0003, t);
        let n = rng.random_range(1..=8);
        let d = rng.random_range(1..=2);
        let psd = t < 100;
        let h = if psd {
            let rank = rng.random_range(1..=n * d);
            wishart(&mut rng, n * d, rank)
        } else {
            let g = gue(&mut rng, n * d);
            if psd_check(&g, 1e-9).unwrap().is_positive() {
                g.shifted(-2.0 * g.frobenius_norm() - 1.0)
            } else {
                g
            }
        };
        let phi = BlockMultiplier::from_assembled(n, d, h.as_matrix()).unwrap();
        let r = positivity_equivalences(&phi, 100, 3, t).unwrap();
        if r.assembled_psd != r.gram_exists || r.assembled_psd != psd {
            disagreements += 1;
        }
        if !psd && !r.j_falsifier {
            j_misses += 1;
        }
        if r.all_agree() {
            four_way += 1;
        }
    }
    verdict(
        disagreements == 0 && j_misses == 0,
        format!("(a)/(d) disagreements {disagreements}, J-falsifier misses {j_misses}, all four verdicts agree on {four_way}/200"),
    )
}

fn criterion_4() -> Verdict {
    let mut violations = 0;
    let mut worst_slack = f64::INFINITY;
    let mut worst_gap = f64::NEG_INFINITY;
    for t in 0..50u64 {
        let mut rng = trial_rng(0xACCE_0004, t);
        let n = rng.random_range(1..=8);
        let d = rng.random_range(1..=2);
        let h = if t % 2 == 0 {
            gue(&mut rng, n * d)
        } else {
            wishart(&mut rng, n * d, 1 + t as usize % (n * d))
        };
        let phi = BlockMultiplier::from_assembled(n, d, h.as_matrix()).unwrap();
        let fac = factorize(&phi).unwrap();
        let upper = cb_norm_upper(&fac);
        for s in 0..1000u64 {
            let k = ScalarKernel::new(random_matrix(&mut trial_rng(t, s + 1), n, n)).unwrap();
            let lhs = schur_apply(&phi, &k).unwrap().operator_norm().unwrap();
            let rhs = upper * k.entries().operator_norm().unwrap() + 1e-8;
            worst_slack = worst_slack.min(rhs - lhs);
            if lhs > rhs {
                violations += 1;
            }
        }
        // Same absolute tolerance as the kernel bound: on positive multipliers
        // the bound is attained at T = I and both sides carry rounding.
        let bounds = norm_bounds(&phi, &fac, 200, t).unwrap();
        worst_gap = worst_gap.max(bounds.lower - bounds.upper);
        if bounds.lower > bounds.upper + 1e-8 {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!("50 multipliers x 1000 kernels, {violations} violations, smallest slack {worst_slack:e}, largest lower - upper {worst_gap:e}"),
    )
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let (code, out, err) = run_cli(&["counterexample"]);
    let elapsed = start.elapsed();
    if code != 0 {
        return verdict(false, format!("exit {code}: {err}"));
    }
    let r: CounterexampleReport = serde_json::from_str(&out).unwrap();
    let edges_psd = r.edges.iter().all(|e| e.block_min_eig >= -1e-12);
    let data: Vec<f64> = r.edges.iter().map(|e| e.value).collect();
    verdict(
        r.certified && r.epsilon > 0.0 && edges_psd && data == [1.0, 1.0, 1.0, -1.0] && elapsed < Duration::from_secs(5),
        format!(
            "epsilon = {:e} (real grid max {:e}, complex sweep max {:e}), edge blocks PSD, {elapsed:.2?}",
            r.epsilon, r.real_max_min_eig, r.complex_max_min_eig
        ),
    )
}

fn criterion_6() -> Verdict {
    let mut configs = 0;
    let mut failures = 0;
    for n in 1..=16usize {
        for k in 1..=(16 / n) {
            configs += 1;
            let mut rng = trial_rng(0xACCE_0006, (n * 100 + k) as u64);
            let mut generators = vec![HermitianMatrix::identity(k)];
            for r in 1..=k.min(3) {
                generators.push(wishart(&mut rng, k, r));
            }
            let samples = dmax_sample(&generators, n, 1000, (n * 100 + k) as u64).unwrap();
            failures += samples
                .iter()
                .filter(|x| !cmin_member_exact(x).unwrap().is_member())
                .count();
        }
    }
    verdict(failures == 0, format!("{configs} configurations x 1000 samples, {failures} failures"))
}

/// Determinant by fraction-free elimination with row pivoting.
fn bareiss_det(m: &ComplexMatrix) -> Complex {
    let n = m.rows();
    let mut a = m.clone();
    let mut sign = 1.0;
    let mut prev = Complex::new(1.0, 0.0);
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm())).unwrap();
        if a[(pivot, k)].norm() == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        if pivot != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(pivot, j)];
                a[(pivot, j)] = t;
            }
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                a[(i, j)] = (a[(i, j)] * a[(k, k)] - a[(i, k)] * a[(k, j)]) / prev;
            }
        }
        prev = a[(k, k)];
    }
    a[(n - 1, n - 1)] * sign
}

/// Every principal minor of `M + tol·max(1, ‖M‖_F)·I` is non-negative.
fn minor_oracle(m: &HermitianMatrix, tol: f64) -> bool {
    let shifted = m.shifted(tol * m.scale());
    let n = m.dim();
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        bareiss_det(&shifted.as_matrix().select(&idx, &idx)).re >= 0.0
    })
}

fn criterion_7() -> Verdict {
    let mut worst_res = 0.0f64;
    let mut worst_orth = 0.0f64;
    let mut bad = 0;
    for t in 0..1000u64 {
        let mut rng = trial_rng(0xACCE_0007, t);
        let dim = 1 + (t as usize % 32);
        let m = match t % 3 {
            0 => gue(&mut rng, dim),
            1 => wishart(&mut rng, dim, 1 + (t as usize / 3) % dim),
            _ => gue(&mut rng, dim).shifted(rng.random_range(-3.0..3.0)),
        };
        let eig = eigh(&m).unwrap();
        let res = eig.max_residual(&m) / m.frobenius_norm().max(f64::MIN_POSITIVE);
        let orth = eig.orthonormality_defect() / dim as f64;
        worst_res = worst_res.max(res);
        worst_orth = worst_orth.max(orth);
        if res > EIG_TOL || orth > EIG_TOL || eig.values.windows(2).any(|w| w[0] > w[1]) {
            bad += 1;
        }
    }
    let mut disagreements = 0;
    for t in 0..1200u64 {
        let mut rng = trial_rng(0xACCE_0077, t);
        let dim = 1 + (t as usize % 6);
        let m = match t % 4 {
            0 => gue(&mut rng, dim),
            1 => wishart(&mut rng, dim, 1 + (t as usize / 4) % dim),
            2 => {
                let w = wishart(&mut rng, dim, dim);
                w.shifted(-0.05 * w.frobenius_norm())
            }
            _ => wishart(&mut rng, dim, dim),
        };
        if psd_check(&m, 1e-9).unwrap().is_positive() != minor_oracle(&m, 1e-9) {
            disagreements += 1;
        }
    }
    verdict(
        bad == 0 && disagreements == 0,
        format!(
            "1000 matrices: worst residual/‖M‖_F {worst_res:e}, worst defect/dim {worst_orth:e}; 1200 minor-oracle comparisons, {disagreements} disagreements"
        ),
    )
}

fn criterion_8() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let path = write_json(d, "pattern.json", &schurmult::json::PatternWire::from_pattern(&Pattern::path(4)));
    let c4 = write_json(d, "c4.json", &schurmult::json::PatternWire::from_pattern(&Pattern::cycle(5)));
    let w = wishart(&mut trial_rng(8, 0), 8, 8);
    let full = BlockMultiplier::from_assembled(4, 2, w.as_matrix()).unwrap();
    let chordal_phi = restrict(&full, &Pattern::path(4)).unwrap();
    let cycle_phi = restrict(&full, &Pattern::cycle(4)).unwrap();
    let phi = write_json(d, "phi.json", &MultiplierWire::from_multiplier(&chordal_phi));
    let cyc = write_json(d, "cyc.json", &MultiplierWire::from_multiplier(&cycle_phi));
    let fullf = write_json(d, "full.json", &MultiplierWire::from_multiplier(full.as_partial()));
    let kernel = ScalarKernel::new(wishart(&mut trial_rng(8, 1), 4, 2).into_matrix()).unwrap();
    let kfile = write_json(d, "k.json", &schurmult::json::KernelWire::from_kernel(&kernel));

    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("chordal", vec!["chordal", &path]),
        ("chordal (cycle)", vec!["chordal", &c4]),
        ("admissible", vec!["admissible", &phi]),
        ("admissible (sampled)", vec!["admissible", &cyc, "--trials", "200", "--seed", "5"]),
        ("complete", vec!["complete", &phi, "--trials", "200", "--seed", "5"]),
        ("complete --fill auto", vec!["complete", &cyc, "--fill", "auto", "--trials", "100", "--seed", "6"]),
        ("factorize", vec!["factorize", &fullf, "--trials", "200", "--seed", "7"]),
        ("apply", vec!["apply", &fullf, &kfile]),
        ("verify-pmn", vec!["verify-pmn", "--n", "2", "--k", "2", "--trials", "200", "--seed", "9"]),
        ("counterexample", vec!["counterexample", "--step", "0.05"]),
    ];
    let bin = env!("CARGO_BIN_EXE_schurmult");
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for rep in 0..3 {
            let out_path = d.join(format!("out-{}-{rep}.json", name.replace(' ', "_")));
            let o = Command::new(bin).args(args).output().unwrap();
            let f = Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(&out_path)
                .output()
                .unwrap();
            if o.stdout.is_empty() || o.status.code() != f.status.code() {
                return verdict(false, format!("{name}: empty output or unstable exit code"));
            }
            let written = std::fs::read(&out_path).unwrap();
            if written != o.stdout {
                return verdict(false, format!("{name}: --out file differs from stdout"));
            }
            outputs.push(o.stdout);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return verdict(false, format!("{name}: outputs differ across runs"));
        }
    }
    verdict(true, format!("{} invocations x 3 runs (stdout and --out), byte-identical", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("chordal completion soundness", criterion_1),
        ("min/max cone three-way equivalence", criterion_2),
        ("positivity equivalence suite", criterion_3),
        ("factorization norm bound", criterion_4),
        ("chordality necessity (four-cycle)", criterion_5),
        ("max cone inside min cone", criterion_6),
        ("eigensolver fidelity", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut failed = 0;
    let mut summary = BTreeMap::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| verdict(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let tag = if result.passed { "PASS" } else { "FAIL" };
        if !result.passed {
            failed += 1;
        }
        println!("criterion {}: {tag}: {name}: {}", i + 1, result.detail);
        summary.insert(i + 1, result.passed);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
