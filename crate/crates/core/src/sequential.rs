//! Sequential synthesis with a two-level ancilla and restricted interactions.
//!
//! Qubit `k` is produced by one ancilla–qubit block `exp(-i H_k)`, where `H_k`
//! is an XXZ coupling (or, for comparison, a general two-qubit Hamiltonian).
//! With auxiliary rotations enabled each block is dressed by free single-qubit
//! rotations on its qubit before and after the interaction, and the ancilla
//! gets a free rotation before the first block. The couplings and angles are
//! fitted block by block to maximize the overlap with a target state. The
//! final ancilla state is chosen optimally, so a rotation after the last
//! block adds nothing and is left fixed.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, structural, Result};
use crate::linalg::{hermitian_expm, ComplexMatrix, C64};
use crate::rng;
use crate::simplex::NelderMead;
use crate::statevector::{JointState, Statevector};

pub const ANCILLA_DIM: usize = 2;
pub const DEFAULT_RESTARTS: usize = 8;
pub const DEFAULT_MAX_SWEEPS: usize = 200;
pub const DEFAULT_SWEEP_TOL: f64 = 1e-10;

const ANGLE_PERIOD: f64 = 4.0 * PI;
const NORM_TOL: f64 = 1e-10;

/// ZYZ Euler angles of `Rz(φ) Ry(θ) Rz(λ)`, each kept in `[0, 4π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Euler {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl Euler {
    pub fn new(theta: f64, phi: f64, lambda: f64) -> Self {
        let wrap = |a: f64| {
            let w = a.rem_euclid(ANGLE_PERIOD);
            if w >= ANGLE_PERIOD {
                0.0
            } else {
                w
            }
        };
        Self {
            theta: wrap(theta),
            phi: wrap(phi),
            lambda: wrap(lambda),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    fn from_slice(p: &[f64]) -> Self {
        Self::new(p[0], p[1], p[2])
    }

    pub fn matrix(&self) -> Matrix2<C64> {
        let rz = |a: f64| {
            Matrix2::new(
                C64::from_polar(1.0, -a / 2.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, a / 2.0),
            )
        };
        let (s, c) = (self.theta / 2.0).sin_cos();
        let ry = Matrix2::new(
            C64::new(c, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
            C64::new(c, 0.0),
        );
        rz(self.phi) * ry * rz(self.lambda)
    }
}

fn pauli(j: usize) -> ComplexMatrix {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let data = match j {
        0 => [one, o, o, one],
        1 => [o, one, one, o],
        2 => [o, -i, i, o],
        _ => [one, o, o, -one],
    };
    ComplexMatrix::from_row_slice(2, 2, &data)
}

/// `h1 (X⊗X + Y⊗Y) + h2 Z⊗Z` on ancilla ⊗ qubit.
pub fn xxz_hamiltonian(h1: f64, h2: f64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(4, 4);
    h[(0, 0)] = C64::new(h2, 0.0);
    h[(1, 1)] = C64::new(-h2, 0.0);
    h[(2, 2)] = C64::new(-h2, 0.0);
    h[(3, 3)] = C64::new(h2, 0.0);
    h[(1, 2)] = C64::new(2.0 * h1, 0.0);
    h[(2, 1)] = C64::new(2.0 * h1, 0.0);
    h
}

/// `exp(-i · xxz_hamiltonian(h1, h2))` in closed form.
fn xxz_unitary(h1: f64, h2: f64) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(4, 4);
    let outer = C64::from_polar(1.0, -h2);
    let inner = C64::from_polar(1.0, h2);
    let (s, c) = (2.0 * h1).sin_cos();
    u[(0, 0)] = outer;
    u[(3, 3)] = outer;
    u[(1, 1)] = inner * c;
    u[(2, 2)] = inner * c;
    u[(1, 2)] = inner * C64::new(0.0, -s);
    u[(2, 1)] = inner * C64::new(0.0, -s);
    u
}

/// Real couplings `h[j_A][j_Q]` of `σ_{j_A} ⊗ σ_{j_Q}`, with `σ_0 = I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralCoupling {
    pub h: [[f64; 4]; 4],
}

impl GeneralCoupling {
    pub fn zero() -> Self {
        Self { h: [[0.0; 4]; 4] }
    }

    pub fn xxz(h1: f64, h2: f64) -> Self {
        let mut c = Self::zero();
        c.h[1][1] = h1;
        c.h[2][2] = h1;
        c.h[3][3] = h2;
        c
    }

    fn from_slice(p: &[f64]) -> Self {
        let mut c = Self::zero();
        for (idx, v) in p.iter().enumerate().take(16) {
            c.h[idx / 4][idx % 4] = *v;
        }
        c
    }

    fn params(&self) -> Vec<f64> {
        self.h.iter().flatten().copied().collect()
    }
}

pub fn general_hamiltonian(c: &GeneralCoupling) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(4, 4);
    for (a, row) in c.h.iter().enumerate() {
        for (q, v) in row.iter().enumerate() {
            if *v != 0.0 {
                h += crate::linalg::kron(&pauli(a), &pauli(q)).scale(*v);
            }
        }
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coupling {
    Xxz { h1: f64, h2: f64 },
    General(GeneralCoupling),
}

impl Coupling {
    pub fn hamiltonian(&self) -> ComplexMatrix {
        match self {
            Coupling::Xxz { h1, h2 } => xxz_hamiltonian(*h1, *h2),
            Coupling::General(c) => general_hamiltonian(c),
        }
    }

    fn unitary(&self) -> Result<ComplexMatrix> {
        match self {
            Coupling::Xxz { h1, h2 } => Ok(xxz_unitary(*h1, *h2)),
            Coupling::General(c) => hermitian_expm(&general_hamiltonian(c), 1.0),
        }
    }

    fn params(&self) -> Vec<f64> {
        match self {
            Coupling::Xxz { h1, h2 } => vec![*h1, *h2],
            Coupling::General(c) => c.params(),
        }
    }

    fn with_params(&self, p: &[f64]) -> Self {
        match self {
            Coupling::Xxz { .. } => Coupling::Xxz { h1: p[0], h2: p[1] },
            Coupling::General(_) => Coupling::General(GeneralCoupling::from_slice(p)),
        }
    }

    fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }
}

/// Which interaction family the optimizer fits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    Xxz,
    General,
}

impl Entangler {
    fn param_count(&self) -> usize {
        match self {
            Entangler::Xxz => 2,
            Entangler::General => 16,
        }
    }

    fn coupling(&self, p: &[f64]) -> Coupling {
        match self {
            Entangler::Xxz => Coupling::Xxz { h1: p[0], h2: p[1] },
            Entangler::General => Coupling::General(GeneralCoupling::from_slice(p)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSchedule {
    pub steps: Vec<Coupling>,
    pub aux_enabled: bool,
    /// Rotation on qubit `k` before its interaction.
    pub aux_qubit: Vec<Euler>,
    /// Rotation on qubit `k` after its interaction.
    pub aux_qubit_after: Vec<Euler>,
    pub aux_ancilla_initial: Euler,
    pub aux_ancilla_final: Euler,
    pub phi_initial: [C64; 2],
}

impl CouplingSchedule {
    /// XXZ steps without auxiliary rotations, starting from ancilla `|0⟩`.
    pub fn xxz(couplings: &[(f64, f64)]) -> Self {
        let n = couplings.len();
        Self {
            steps: couplings
                .iter()
                .map(|&(h1, h2)| Coupling::Xxz { h1, h2 })
                .collect(),
            aux_enabled: false,
            aux_qubit: vec![Euler::identity(); n],
            aux_qubit_after: vec![Euler::identity(); n],
            aux_ancilla_initial: Euler::identity(),
            aux_ancilla_final: Euler::identity(),
            phi_initial: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.steps.len() != n {
            return Err(invalid(format!(
                "schedule has {} steps for {n} qubits",
                self.steps.len()
            )));
        }
        if self.aux_qubit.len() != n || self.aux_qubit_after.len() != n {
            return Err(invalid(format!(
                "schedule needs {n} qubit rotations before and after, got {} and {}",
                self.aux_qubit.len(),
                self.aux_qubit_after.len()
            )));
        }
        if !self.steps.iter().all(Coupling::is_finite) {
            return Err(invalid("couplings must be finite"));
        }
        let norm = self.phi_initial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("phi_initial has norm {norm}")));
        }
        Ok(())
    }

    /// The 4x4 unitary of step `k` (0-based) on ancilla ⊗ qubit.
    pub fn block(&self, k: usize) -> Result<ComplexMatrix> {
        let n = self.steps.len();
        let mut u = self.steps[k].unitary()?;
        if self.aux_enabled {
            u = on_qubit(&self.aux_qubit_after[k].matrix()) * u * on_qubit(&self.aux_qubit[k].matrix());
            if k == 0 {
                u *= on_ancilla(&self.aux_ancilla_initial.matrix());
            }
            if k + 1 == n {
                u = on_ancilla(&self.aux_ancilla_final.matrix()) * u;
            }
        }
        Ok(u)
    }
}

/// `I ⊗ m` in the ancilla-major local order.
fn on_qubit(m: &Matrix2<C64>) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                out[(2 * a + i, 2 * a + j)] = m[(i, j)];
            }
        }
    }
    out
}

/// `m ⊗ I` in the ancilla-major local order.
fn on_ancilla(m: &Matrix2<C64>) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4, 4);
    for b in 0..2 {
        for a in 0..2 {
            for i in 0..2 {
                out[(2 * b + i, 2 * a + i)] = m[(b, a)];
            }
        }
    }
    out
}

fn run_blocks(schedule: &CouplingSchedule, n: usize) -> Result<JointState> {
    let mut joint = JointState::with_blank_qubits(&schedule.phi_initial, n);
    for k in 0..n {
        joint.apply_ancilla_qubit(&schedule.block(k)?, k + 1);
    }
    Ok(joint)
}

/// Joint ancilla ⊗ `n`-qubit state produced by `schedule`; the ancilla is the
/// most significant qubit of the result.
pub fn sequential_generate(schedule: &CouplingSchedule, n: usize) -> Result<Statevector> {
    schedule.validate(n)?;
    let joint = run_blocks(schedule, n)?;
    Statevector::new(n + 1, joint.amplitudes)
}

/// `F = ‖w‖` with `w_a = ⟨a ⊗ target|joint⟩`, and the optimal final ancilla
/// `w / ‖w‖` (`|0⟩` when `w = 0`).
pub fn fidelity_vs_target(joint: &Statevector, target: &Statevector) -> Result<(f64, [C64; 2])> {
    if joint.qubits() != target.qubits() + 1 {
        return Err(structural(format!(
            "joint state has {} qubits; expected ancilla plus {}",
            joint.qubits(),
            target.qubits()
        )));
    }
    let js = JointState {
        ancilla_dim: ANCILLA_DIM,
        qubits: target.qubits(),
        amplitudes: joint.amplitudes().to_vec(),
    };
    let w = js.project_qubits(target)?;
    Ok(best_final(&w))
}

fn best_final(w: &[C64]) -> (f64, [C64; 2]) {
    let f = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if f == 0.0 {
        return (0.0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    }
    (f, [w[0] / f, w[1] / f])
}

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    pub aux: bool,
    pub restarts: usize,
    pub seed: u64,
    pub entangler: Entangler,
    pub max_sweeps: usize,
    pub sweep_tol: f64,
    pub local: NelderMead,
    pub phi_initial: [C64; 2],
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            aux: true,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            entangler: Entangler::Xxz,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            sweep_tol: DEFAULT_SWEEP_TOL,
            local: NelderMead::default(),
            phi_initial: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SynthesisResult {
    /// Joint ancilla ⊗ qubits state of the best schedule.
    pub generated: Statevector,
    pub fidelity: f64,
    /// `2 (1 - fidelity)`.
    pub cost: f64,
    pub optimal_phi_final: [C64; 2],
    /// Sweeps used by the best restart.
    pub iterations: usize,
    pub restarts_used: usize,
    /// Whether the best restart stopped on the sweep tolerance.
    pub converged: bool,
    pub schedule: CouplingSchedule,
    /// Cost after every local solve of the best restart.
    pub cost_trace: Vec<f64>,
}

/// Fit an XXZ schedule for `target` with default sweep settings.
pub fn optimize_schedule(
    target: &Statevector,
    n: usize,
    aux: bool,
    restarts: usize,
    seed: u64,
) -> Result<SynthesisResult> {
    let opts = SynthesisOptions {
        aux,
        restarts,
        seed,
        ..SynthesisOptions::default()
    };
    optimize_schedule_with(target, n, &opts)
}

pub fn optimize_schedule_with(
    target: &Statevector,
    n: usize,
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    if target.qubits() != n {
        return Err(invalid(format!(
            "target has {} qubits but n = {n}",
            target.qubits()
        )));
    }
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if (target.norm() - 1.0).abs() > NORM_TOL {
        return Err(invalid(format!("target has norm {}", target.norm())));
    }
    if opts.restarts == 0 {
        return Err(invalid("restarts must be at least 1"));
    }
    if opts.max_sweeps == 0 {
        return Err(invalid("max_sweeps must be at least 1"));
    }
    let runs: Vec<Restart> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::child(opts.seed, r as u64);
            Restart::new(target, n, opts, &mut rng).and_then(Restart::optimize)
        })
        .collect::<Result<_>>()?;
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("restarts ≥ 1");

    let schedule = best.schedule();
    let generated = sequential_generate(&schedule, n)?;
    let (fidelity, phi_final) = fidelity_vs_target(&generated, target)?;
    Ok(SynthesisResult {
        generated,
        fidelity,
        cost: 2.0 * (1.0 - fidelity),
        optimal_phi_final: phi_final,
        iterations: best.sweeps,
        restarts_used: opts.restarts,
        converged: best.converged,
        schedule,
        cost_trace: best.trace,
    })
}

/// One coordinate-descent run.
struct Restart<'a> {
    target: &'a Statevector,
    opts: &'a SynthesisOptions,
    n: usize,
    /// Free parameters of each block: couplings, then (with aux) the before
    /// and after qubit angles, then for block 0 the initial ancilla angles.
    params: Vec<Vec<f64>>,
    cost: f64,
    sweeps: usize,
    converged: bool,
    trace: Vec<f64>,
}

impl<'a> Restart<'a> {
    fn new(
        target: &'a Statevector,
        n: usize,
        opts: &'a SynthesisOptions,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let nc = opts.entangler.param_count();
        let params = (0..n)
            .map(|k| {
                let mut p: Vec<f64> = (0..nc).map(|_| rng.random_range(-PI..PI)).collect();
                if opts.aux {
                    let angles = if k == 0 { 9 } else { 6 };
                    p.extend((0..angles).map(|_| rng.random_range(0.0..2.0 * PI)));
                }
                p
            })
            .collect();
        let mut run = Self {
            target,
            opts,
            n,
            params,
            cost: f64::INFINITY,
            sweeps: 0,
            converged: false,
            trace: Vec::new(),
        };
        let joint = run_blocks(&run.schedule(), n)?;
        run.cost = 2.0 * (1.0 - best_final(&joint.project_qubits(target)?).0);
        Ok(run)
    }

    fn schedule(&self) -> CouplingSchedule {
        let nc = self.opts.entangler.param_count();
        let mut s = CouplingSchedule::xxz(&vec![(0.0, 0.0); self.n]);
        s.phi_initial = self.opts.phi_initial;
        s.aux_enabled = self.opts.aux;
        for (k, p) in self.params.iter().enumerate() {
            s.steps[k] = self.opts.entangler.coupling(&p[..nc]);
            if self.opts.aux {
                s.aux_qubit[k] = Euler::from_slice(&p[nc..nc + 3]);
                s.aux_qubit_after[k] = Euler::from_slice(&p[nc + 3..nc + 6]);
                if k == 0 {
                    s.aux_ancilla_initial = Euler::from_slice(&p[nc + 6..nc + 9]);
                }
            }
        }
        s
    }

    fn block_from(&self, k: usize, p: &[f64]) -> Result<ComplexMatrix> {
        let mut s = self.schedule();
        let nc = self.opts.entangler.param_count();
        s.steps[k] = s.steps[k].with_params(&p[..nc]);
        if self.opts.aux {
            // unwrapped angles here; the stored schedule wraps them
            s.aux_qubit[k] = Euler { theta: p[nc], phi: p[nc + 1], lambda: p[nc + 2] };
            s.aux_qubit_after[k] = Euler { theta: p[nc + 3], phi: p[nc + 4], lambda: p[nc + 5] };
            if k == 0 {
                s.aux_ancilla_initial = Euler { theta: p[nc + 6], phi: p[nc + 7], lambda: p[nc + 8] };
            }
        }
        s.block(k)
    }

    /// Targets `Q_k^a = U_{k+1}^† ⋯ U_{n-1}^† (|a⟩ ⊗ target)` for every `k`.
    fn backward_targets(&self) -> Result<Vec<[JointState; 2]>> {
        let mut out = Vec::with_capacity(self.n);
        let mut q = self.final_targets();
        out.push(q.clone());
        for k in (1..self.n).rev() {
            let u = self.block_from(k, &self.params[k])?.adjoint();
            for s in q.iter_mut() {
                s.apply_ancilla_qubit(&u, k + 1);
            }
            out.push(q.clone());
        }
        out.reverse();
        Ok(out)
    }

    fn final_targets(&self) -> [JointState; 2] {
        let width = 1usize << self.n;
        let make = |a: usize| {
            let mut amplitudes = vec![C64::new(0.0, 0.0); ANCILLA_DIM * width];
            amplitudes[a * width..(a + 1) * width].copy_from_slice(self.target.amplitudes());
            JointState {
                ancilla_dim: ANCILLA_DIM,
                qubits: self.n,
                amplitudes,
            }
        };
        [make(0), make(1)]
    }

    /// Prefix states `P_k = U_{k-1} ⋯ U_0 |Φ_I⟩` for every `k`.
    fn prefixes(&self) -> Result<Vec<JointState>> {
        let mut p = JointState::with_blank_qubits(&self.opts.phi_initial, self.n);
        let mut out = Vec::with_capacity(self.n);
        for k in 0..self.n {
            out.push(p.clone());
            p.apply_ancilla_qubit(&self.block_from(k, &self.params[k])?, k + 1);
        }
        Ok(out)
    }

    fn local_cost(&self, k: usize, p: &[f64], prefix: &JointState, q: &[JointState; 2]) -> f64 {
        let u = match self.block_from(k, p) {
            Ok(u) => u,
            Err(_) => return f64::INFINITY,
        };
        let mut state = prefix.clone();
        state.apply_ancilla_qubit(&u, k + 1);
        let w: Vec<C64> = q
            .iter()
            .map(|t| {
                t.amplitudes
                    .iter()
                    .zip(&state.amplitudes)
                    .map(|(a, b)| a.conj() * b)
                    .sum()
            })
            .collect();
        2.0 * (1.0 - best_final(&w).0)
    }

    /// Re-fit block `k`; returns the updated block unitary.
    fn update(&mut self, k: usize, prefix: &JointState, q: &[JointState; 2]) -> Result<ComplexMatrix> {
        let start = self.params[k].clone();
        let result = self
            .opts
            .local
            .minimize(|p| self.local_cost(k, p, prefix, q), &start);
        if result.value < self.cost {
            self.params[k] = result.x;
            self.cost = result.value;
        }
        self.trace.push(self.cost);
        self.block_from(k, &self.params[k])
    }

    fn sweep(&mut self) -> Result<()> {
        let targets = self.backward_targets()?;
        let mut prefix = JointState::with_blank_qubits(&self.opts.phi_initial, self.n);
        for (k, target) in targets.iter().enumerate().take(self.n) {
            let u = self.update(k, &prefix, target)?;
            prefix.apply_ancilla_qubit(&u, k + 1);
        }
        let prefixes = self.prefixes()?;
        let mut q = self.final_targets();
        for k in (0..self.n).rev() {
            let u = self.update(k, &prefixes[k], &q)?;
            let back = u.adjoint();
            for s in q.iter_mut() {
                s.apply_ancilla_qubit(&back, k + 1);
            }
        }
        Ok(())
    }

    fn optimize(mut self) -> Result<Self> {
        while self.sweeps < self.opts.max_sweeps {
            let before = self.cost;
            self.sweep()?;
            self.sweeps += 1;
            if before - self.cost < self.opts.sweep_tol {
                self.converged = true;
                break;
            }
        }
        Ok(self)
    }
}
