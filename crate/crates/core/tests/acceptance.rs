//! Acceptance suite. Each criterion prints one PASS/FAIL line.
//!
//! Criteria 5, 6 and 8 ask for errors below what any state of the requested
//! bond dimension can reach. They are run as stated and reported as FAIL,
//! together with a Schmidt-spectrum lower bound computed here from the dense
//! target state. The process fails on any other FAIL, on a bound that does
//! not actually exclude the threshold, or on a measured error below its bound.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqclone::compression::{svd_truncate_mps, variational_compress, CompressionRequest, Method};
use seqclone::gisin_massar::{clone_fidelity_oracle, gm_coefficients, gm_state, GmSpec, PureQubit};
use seqclone::linalg::{self, ComplexMatrix, C64};
use seqclone::mps::MatrixProductState;
use seqclone::sequential::{optimize_schedule_with, SynthesisOptions};
use seqclone::statevector::Statevector;

const COEFF_TOL: f64 = 1e-12;
const STRUCT_TOL: f64 = 1e-12;
const CLONE_FID_TOL: f64 = 1e-12;
const UNIVERSALITY_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;
const FIG3A_D3_MAX: f64 = 1e-10;
const FIG3A_D2_RANGE: (f64, f64) = (1e-3, 1e-1);
const FIG3B_D3_MAX: f64 = 1e-8;
const ORDERING_SLACK: f64 = 1e-12;
const TABLE_N3_AUX_MAX: f64 = 1e-6;
const TABLE_N5_AUX_MAX: f64 = 1e-3;
const TABLE_N7_AUX_MAX: f64 = 5e-2;
const TABLE_N3_NOAUX_MIN: f64 = 0.4;
const TABLE_RESTARTS: usize = 8;
const TABLE_SEEDS: [u64; 3] = [1, 2, 3];
const ECKART_MATRICES: usize = 100;
const ECKART_CANDIDATES: usize = 10_000;
const ISOMETRY_OVERLAP_MIN: f64 = 1.0 - 1e-10;
const DECOUPLE_TOL: f64 = 1e-10;

/// Criteria shown to be out of reach; see the module docs.
const UNATTAINABLE: [u32; 3] = [5, 6, 8];

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    /// For unattainable criteria: whether the lower-bound argument holds.
    bound_ok: Option<bool>,
    elapsed: Duration,
    limit: Duration,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn plus() -> PureQubit {
    PureQubit::plus()
}

fn gm(m: usize, q: PureQubit) -> Statevector {
    gm_state(&GmSpec::new(m, q).unwrap()).unwrap()
}

fn random_qubit(rng: &mut impl Rng) -> PureQubit {
    let z = |rng: &mut dyn rand::RngCore| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    PureQubit::normalize(z(rng), z(rng)).unwrap()
}

fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Basis-input cloner output built directly from its definition: clones are
/// the leftmost `M` qubits, anticlones the remaining `M - 1`.
fn gm_basis_oracle(m: usize, bit: usize) -> Vec<C64> {
    let n = 2 * m - 1;
    let mut amp = vec![C64::new(0.0, 0.0); 1 << n];
    let flip = |ones: usize, width: usize| if bit == 0 { ones } else { width - ones };
    for j in 0..m {
        let alpha = (2.0 * (m - j) as f64 / (m * (m + 1)) as f64).sqrt();
        // clones: j copies of the orthogonal state; anticlones: M-j-1 of the
        // orthogonal state's complement pattern
        let clone_ones = flip(j, m);
        let anti_ones = flip(m - 1 - j, m - 1);
        let norm = (binomial(m, clone_ones) * binomial(m - 1, anti_ones)).sqrt();
        for c in 0..1usize << m {
            if c.count_ones() as usize != clone_ones {
                continue;
            }
            for a in 0..1usize << (m - 1) {
                if a.count_ones() as usize != anti_ones {
                    continue;
                }
                amp[(c << (m - 1)) | a] += C64::new(alpha / norm, 0.0);
            }
        }
    }
    amp
}

/// Squared Schmidt values across the cut after the `left` most significant qubits.
fn schmidt_weights(v: &Statevector, left: usize) -> Vec<f64> {
    let n = v.qubits();
    let m = linalg::from_row_major(1 << left, 1 << (n - left), v.amplitudes()).unwrap();
    linalg::svd(&m).unwrap().singulars.iter().map(|s| s * s).collect()
}

/// Lower bound on `1 - |⟨v|χ⟩|` over all `χ` with norm ≤ 1 and Schmidt rank
/// ≤ `cap` at every cut: `|⟨v|χ⟩|² ≤` the weight kept at the worst cut.
fn rank_bound(v: &Statevector, cap: usize) -> f64 {
    let worst_tail = (1..v.qubits())
        .map(|left| schmidt_weights(v, left).iter().skip(cap).sum::<f64>())
        .fold(0.0, f64::max);
    1.0 - (1.0 - worst_tail).max(0.0).sqrt()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for m in 1..=20 {
        let a = gm_coefficients(m).unwrap();
        worst = worst.max((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs());
    }
    let a2 = gm_coefficients(2).unwrap();
    let d2 = (a2[0] - (2.0f64 / 3.0).sqrt()).abs().max((a2[1] - (1.0f64 / 3.0).sqrt()).abs());
    let elapsed = start.elapsed();
    Outcome {
        id: 1,
        title: "coefficient identities",
        pass: worst <= COEFF_TOL && d2 <= COEFF_TOL,
        detail: format!("max |Σα²-1| = {worst:.2e} over M=1..20; M=2 deviation {d2:.2e}"),
        bound_ok: None,
        elapsed,
        limit: secs(1),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut norm_dev, mut sym_dev, mut lin_dev) = (0.0f64, 0.0f64, 0.0f64);
    for m in 2..=7 {
        let n = 2 * m - 1;
        let q = random_qubit(&mut rng);
        let v = gm(m, q);
        norm_dev = norm_dev.max((v.norm() - 1.0).abs());
        // adjacent transpositions generate each block's permutations
        for label in 1..n {
            let same_block = label + 1 < m || label >= m;
            if !same_block {
                continue;
            }
            let s = v.swap_qubits(label, label + 1).unwrap();
            sym_dev = sym_dev.max(max_abs_diff(s.amplitudes(), v.amplitudes()));
        }
        let zero = gm_basis_oracle(m, 0);
        let one = gm_basis_oracle(m, 1);
        let combo: Vec<C64> = zero
            .iter()
            .zip(&one)
            .map(|(z, o)| q.alpha() * z + q.beta() * o)
            .collect();
        lin_dev = lin_dev.max(max_abs_diff(v.amplitudes(), &combo));
    }
    Outcome {
        id: 2,
        title: "cloner-output structure",
        pass: norm_dev <= STRUCT_TOL && sym_dev <= STRUCT_TOL && lin_dev <= STRUCT_TOL,
        detail: format!("norm {norm_dev:.2e}, block symmetry {sym_dev:.2e}, linearity {lin_dev:.2e} (M=2..7)"),
        bound_ok: None,
        elapsed: start.elapsed(),
        limit: secs(30),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let f2 = clone_fidelity_oracle(&GmSpec::new(2, plus()).unwrap(), 1).unwrap();
    let dev = (f2 - 5.0 / 6.0).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values: Vec<f64> = (0..20)
        .map(|_| clone_fidelity_oracle(&GmSpec::new(2, random_qubit(&mut rng)).unwrap(), 1).unwrap())
        .collect();
    let spread = values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
    Outcome {
        id: 3,
        title: "clone-quality oracle",
        pass: dev <= CLONE_FID_TOL && spread <= UNIVERSALITY_TOL,
        detail: format!("F(M=2) = {f2:.15} (|F-5/6| = {dev:.2e}); spread over 20 inputs {spread:.2e}"),
        bound_ok: None,
        elapsed: start.elapsed(),
        limit: secs(10),
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut dims = Vec::new();
    for m in 2..=7 {
        let n = 2 * m - 1;
        let mps = MatrixProductState::from_statevector(&gm(m, plus()), RANK_TOL).unwrap();
        let d = mps.bond_dimension();
        dims.push(format!("M={m}:{d}"));
        pass &= d <= 2 * m;
        if m >= 3 {
            pass &= d < 1 << (n / 2);
        }
    }
    Outcome {
        id: 4,
        title: "bond dimension at most 2M",
        pass,
        detail: format!("max bond {}", dims.join(" ")),
        bound_ok: None,
        elapsed: start.elapsed(),
        limit: secs(60),
    }
}

struct CompressionRow {
    m: usize,
    cap: usize,
    svd: f64,
    seeded: f64,
    random: f64,
    bound: f64,
}

impl CompressionRow {
    fn variational(&self) -> f64 {
        self.seeded.min(self.random)
    }
}

fn compression_table() -> (Vec<CompressionRow>, Duration) {
    let start = Instant::now();
    let mut rows = Vec::new();
    for m in 2..=7 {
        let v = gm(m, plus());
        let target = MatrixProductState::from_statevector(&v, RANK_TOL).unwrap();
        for cap in [2, 3] {
            let (_, svd) = svd_truncate_mps(&target, cap).unwrap();
            let seeded = variational_compress(&CompressionRequest::new(target.clone(), cap, Method::VariationalSeededBySvd)).unwrap();
            let mut req = CompressionRequest::new(target.clone(), cap, Method::Variational);
            req.seed = 1;
            let random = variational_compress(&req).unwrap();
            rows.push(CompressionRow {
                m,
                cap,
                svd: svd.error,
                seeded: seeded.report.error,
                random: random.report.error,
                bound: rank_bound(&v, cap),
            });
        }
    }
    (rows, start.elapsed())
}

fn bounds_hold(rows: &[&CompressionRow]) -> bool {
    rows.iter().all(|r| r.variational() >= r.bound - 1e-12 && r.svd >= r.bound - 1e-12)
}

fn criterion_5(table: &[CompressionRow], elapsed: Duration) -> Outcome {
    let d3 = table.iter().find(|r| r.m == 7 && r.cap == 3).unwrap();
    let d2 = table.iter().find(|r| r.m == 7 && r.cap == 2).unwrap();
    let pass_d3 = d3.variational() <= FIG3A_D3_MAX;
    let pass_d2 = (FIG3A_D2_RANGE.0..=FIG3A_D2_RANGE.1).contains(&d2.variational());
    // the bounds exclude both thresholds
    let excluded = d3.bound > FIG3A_D3_MAX && d2.bound > FIG3A_D2_RANGE.1;
    Outcome {
        id: 5,
        title: "M=7 compression at D=3 and D=2",
        pass: pass_d3 && pass_d2,
        detail: format!(
            "D=3: 1-F = {:.4e} (need ≤ {FIG3A_D3_MAX:.0e}, lower bound {:.4e}); D=2: 1-F = {:.4e} (need in [{:.0e}, {:.0e}], lower bound {:.4e})",
            d3.variational(),
            d3.bound,
            d2.variational(),
            FIG3A_D2_RANGE.0,
            FIG3A_D2_RANGE.1,
            d2.bound
        ),
        bound_ok: Some(excluded && bounds_hold(&[d3, d2])),
        elapsed,
        limit: secs(600),
    }
}

fn criterion_6(table: &[CompressionRow], elapsed: Duration) -> Outcome {
    let d3: Vec<&CompressionRow> = table.iter().filter(|r| r.cap == 3).collect();
    let d2: Vec<&CompressionRow> = table.iter().filter(|r| r.cap == 2).collect();
    let d3_ok = d3.iter().all(|r| r.variational() <= FIG3B_D3_MAX);
    let growth = d2.windows(2).all(|w| w[1].variational() > w[0].variational());
    let failing: Vec<&&CompressionRow> = d3.iter().filter(|r| r.variational() > FIG3B_D3_MAX).collect();
    let excluded = failing.iter().all(|r| r.bound > FIG3B_D3_MAX);
    let fmt = |rows: &[&CompressionRow]| {
        rows.iter()
            .map(|r| format!("n={}:{:.3e}", 2 * r.m - 1, r.variational()))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let bounds = failing
        .iter()
        .map(|r| format!("n={}:{:.3e}", 2 * r.m - 1, r.bound))
        .collect::<Vec<_>>()
        .join(" ");
    let all: Vec<&CompressionRow> = table.iter().collect();
    Outcome {
        id: 6,
        title: "error trend with n",
        pass: d3_ok && growth,
        detail: format!(
            "D=3 [{}] (need ≤ {FIG3B_D3_MAX:.0e}; lower bounds {bounds}); D=2 growing: {growth} [{}]",
            fmt(&d3),
            fmt(&d2)
        ),
        bound_ok: Some(growth && excluded && bounds_hold(&all)),
        elapsed,
        limit: secs(900),
    }
}

fn criterion_7(table: &[CompressionRow], elapsed: Duration) -> Outcome {
    let worst = table
        .iter()
        .map(|r| r.seeded - r.svd)
        .fold(f64::MIN, f64::max);
    Outcome {
        id: 7,
        title: "seeded variational no worse than truncation",
        pass: worst <= ORDERING_SLACK,
        detail: format!("max (variational - svd) = {worst:.2e} over {} (M, D) pairs", table.len()),
        bound_ok: None,
        elapsed,
        limit: secs(900),
    }
}

fn best_synthesis(m: usize, aux: bool) -> f64 {
    let target = gm(m, plus());
    TABLE_SEEDS
        .iter()
        .map(|&seed| {
            let opts = SynthesisOptions {
                aux,
                restarts: TABLE_RESTARTS,
                seed,
                ..SynthesisOptions::default()
            };
            1.0 - optimize_schedule_with(&target, 2 * m - 1, &opts).unwrap().fidelity
        })
        .fold(f64::INFINITY, f64::min)
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let n3_on = best_synthesis(2, true);
    let n3_off = best_synthesis(2, false);
    let n5_on = best_synthesis(3, true);
    let n7_on = best_synthesis(4, true);
    // a two-level ancilla emits states of Schmidt rank ≤ 2 at every cut
    let b5 = rank_bound(&gm(3, plus()), 2);
    let b7 = rank_bound(&gm(4, plus()), 2);
    let checks = [
        n3_on <= TABLE_N3_AUX_MAX,
        n5_on <= TABLE_N5_AUX_MAX,
        n7_on <= TABLE_N7_AUX_MAX,
        n3_off >= TABLE_N3_NOAUX_MIN,
    ];
    let excluded = b5 > TABLE_N5_AUX_MAX && b7 > TABLE_N7_AUX_MAX;
    let consistent = n5_on >= b5 - 1e-12 && n7_on >= b7 - 1e-12;
    Outcome {
        id: 8,
        title: "restricted synthesis",
        pass: checks.iter().all(|&c| c),
        detail: format!(
            "n=3 aux: {n3_on:.3e} (≤ {TABLE_N3_AUX_MAX:.0e}) | n=5 aux: {n5_on:.4e} (≤ {TABLE_N5_AUX_MAX:.0e}, lower bound {b5:.4e}) | n=7 aux: {n7_on:.4e} (≤ {TABLE_N7_AUX_MAX:.0e}, lower bound {b7:.4e}) | n=3 no aux: {n3_off:.4} (≥ {TABLE_N3_NOAUX_MIN})"
        ),
        bound_ok: Some(checks[0] && checks[3] && excluded && consistent),
        elapsed: start.elapsed(),
        limit: secs(1800),
    }
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violations = 0;
    for _ in 0..ECKART_MATRICES {
        let rows = rng.random_range(1..=8);
        let cols = rng.random_range(1..=8);
        let k = rng.random_range(1..=rows.min(cols));
        let a = random_matrix(&mut rng, rows, cols);
        let best = linalg::frobenius(&(linalg::truncate_rank(&a, k).unwrap() - &a));
        let dec = linalg::svd(&a).unwrap();
        for c in 0..ECKART_CANDIDATES {
            let candidate = if c % 2 == 0 {
                random_matrix(&mut rng, rows, k) * random_matrix(&mut rng, k, cols)
            } else {
                // rank-k perturbation of the optimum's factors
                let eps = 10f64.powf(rng.random_range(-4.0..-1.0));
                let mut u = dec.left.columns(0, k).into_owned();
                for (j, s) in dec.singulars.iter().take(k).enumerate() {
                    u.column_mut(j).scale_mut(*s);
                }
                let u = u + random_matrix(&mut rng, rows, k).scale(eps);
                let v = dec.right.columns(0, k).adjoint() + random_matrix(&mut rng, k, cols).scale(eps);
                u * v
            };
            if linalg::frobenius(&(candidate - &a)) < best - 1e-12 {
                violations += 1;
            }
        }
    }
    Outcome {
        id: 9,
        title: "truncation optimality",
        pass: violations == 0,
        detail: format!("{violations} better candidates among {} per matrix over {ECKART_MATRICES} matrices", ECKART_CANDIDATES),
        bound_ok: None,
        elapsed: start.elapsed(),
        limit: secs(60),
    }
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let v = gm(2, plus());
    let mps = MatrixProductState::from_statevector(&v, RANK_TOL).unwrap();
    let circuit = mps.extract_isometries().unwrap();
    let joint = circuit.run();
    let (pass, detail) = match joint.decouple(DECOUPLE_TOL).unwrap() {
        Some((_, qubits)) => {
            let overlap = qubits.inner(&v).unwrap().norm();
            (overlap >= ISOMETRY_OVERLAP_MIN, format!("ancilla decoupled; |overlap| = {overlap:.15}"))
        }
        None => (false, "ancilla stays entangled".to_string()),
    };
    Outcome {
        id: 10,
        title: "sequential isometries regenerate M=2",
        pass,
        detail,
        bound_ok: None,
        elapsed: start.elapsed(),
        limit: secs(5),
    }
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["gm-info", "--clones", "2,3"],
        &["regularize", "--clones", "3,4", "--bond-caps", "2,3", "--methods", "svd,variational,seeded", "--seed", "5"],
        &["synthesize", "--qubits", "3", "--restarts", "3", "--max-sweeps", "5", "--seed", "5", "--format", "json"],
    ];
    let mut mismatches = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (rep, threads) in ["1", "4"].iter().enumerate() {
            let path = dir.path().join(format!("run{i}-{rep}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_seqclone"))
                .args(*args)
                .args(["--threads", threads, "--output"])
                .arg(&path)
                .status()
                .unwrap();
            assert!(status.success(), "{args:?} failed");
            outputs.push(std::fs::read(&path).unwrap());
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            mismatches.push(args[0]);
        }
    }
    Outcome {
        id: 11,
        title: "CLI determinism",
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            "gm-info, regularize and synthesize byte-identical across repeated runs (1 and 4 threads)".into()
        } else {
            format!("differing outputs: {mismatches:?}")
        },
        bound_ok: None,
        elapsed: start.elapsed(),
        limit: secs(120),
    }
}

fn main() -> ExitCode {
    let mut outcomes = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4()];
    let (table, elapsed) = compression_table();
    outcomes.push(criterion_5(&table, elapsed));
    outcomes.push(criterion_6(&table, elapsed));
    outcomes.push(criterion_7(&table, elapsed));
    outcomes.push(criterion_8());
    outcomes.push(criterion_9());
    outcomes.push(criterion_10());
    outcomes.push(criterion_11());

    let mut unexpected = 0;
    for o in &outcomes {
        let in_time = o.elapsed <= o.limit;
        let pass = o.pass && in_time;
        let status = if pass { "PASS" } else { "FAIL" };
        let timing = format!("{:.2}s of {}s", o.elapsed.as_secs_f64(), o.limit.as_secs());
        println!("criterion {:>2} {status} [{}] {} ({timing})", o.id, o.title, o.detail);
        if UNATTAINABLE.contains(&o.id) {
            match o.bound_ok {
                Some(true) if !pass => println!("             unattainable: the lower bounds above exceed the thresholds"),
                Some(true) => {
                    println!("             passed although bounded away; the bound computation is wrong");
                    unexpected += 1;
                }
                _ => {
                    println!("             bound argument does not hold; this is a genuine failure");
                    unexpected += 1;
                }
            }
        } else if !pass {
            unexpected += 1;
        }
    }
    let failed = outcomes.iter().filter(|o| !(o.pass && o.elapsed <= o.limit)).count();
    println!(
        "acceptance: {} passed, {failed} failed ({} unattainable by proof, {unexpected} unexpected)",
        outcomes.len() - failed,
        failed - unexpected.min(failed)
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
