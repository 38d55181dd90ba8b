//! Dense qubit statevectors.
//!
//! Amplitudes are indexed by the computational basis label `|i_n, …, i_1⟩`
//! read as a binary number, so qubit `k` (1-based) is bit `k - 1` and qubit
//! `n` is the most significant. Tensor products `a ⊗ b` therefore place the
//! qubits of `a` to the left (higher labels) of those of `b`.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, structural, Result};
use crate::linalg::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Statevector {
    qubits: usize,
    amplitudes: Vec<C64>,
}

impl Statevector {
    pub fn new(qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let expected = 1usize
            .checked_shl(qubits as u32)
            .ok_or_else(|| invalid(format!("{qubits} qubits is too many")))?;
        if amplitudes.len() != expected {
            return Err(structural(format!(
                "{} amplitudes given for {qubits} qubits (expected {expected})",
                amplitudes.len()
            )));
        }
        Ok(Self { qubits, amplitudes })
    }

    /// Computational basis state with the given label.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << qubits];
        *amps
            .get_mut(index)
            .ok_or_else(|| invalid(format!("basis index {index} out of range")))? = C64::new(1.0, 0.0);
        Self::new(qubits, amps)
    }

    /// Product state of single-qubit vectors, leftmost (qubit `n`) first.
    pub fn product(factors: &[[C64; 2]]) -> Self {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for f in factors {
            amps = amps
                .iter()
                .flat_map(|a| [a * f[0], a * f[1]])
                .collect();
        }
        Self {
            qubits: factors.len(),
            amplitudes: amps,
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.qubits != other.qubits {
            return Err(structural(format!(
                "inner product of {}- and {}-qubit states",
                self.qubits, other.qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            qubits: self.qubits,
            amplitudes: self.amplitudes.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(invalid("cannot normalize the zero vector"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Linear combination `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        if self.qubits != other.qubits {
            return Err(structural("combining states of different size"));
        }
        Ok(Self {
            qubits: self.qubits,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self {
            qubits: self.qubits + other.qubits,
            amplitudes,
        }
    }

    /// Exchange qubits with labels `a` and `b` (1-based).
    pub fn swap_qubits(&self, a: usize, b: usize) -> Result<Self> {
        let n = self.qubits;
        if a == 0 || b == 0 || a > n || b > n {
            return Err(invalid(format!("qubit labels {a}, {b} outside 1..={n}")));
        }
        let (ba, bb) = (a - 1, b - 1);
        let mut out = self.amplitudes.clone();
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let xa = (idx >> ba) & 1;
            let xb = (idx >> bb) & 1;
            let mut target = idx & !(1 << ba) & !(1 << bb);
            target |= xa << bb;
            target |= xb << ba;
            out[target] = *amp;
        }
        Ok(Self {
            qubits: n,
            amplitudes: out,
        })
    }

    /// Reduced density matrix of qubit `label` (1-based), tracing out the rest.
    pub fn single_qubit_density(&self, label: usize) -> Result<Matrix2<C64>> {
        if label == 0 || label > self.qubits {
            return Err(invalid(format!(
                "qubit label {label} outside 1..={}",
                self.qubits
            )));
        }
        let bit = label - 1;
        let mut rho = Matrix2::zeros();
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            if (idx >> bit) & 1 == 1 {
                continue;
            }
            let partner = self.amplitudes[idx | (1 << bit)];
            rho[(0, 0)] += amp.norm_sqr();
            rho[(1, 1)] += partner.norm_sqr();
            rho[(0, 1)] += amp * partner.conj();
            rho[(1, 0)] += partner * amp.conj();
        }
        Ok(rho)
    }
}

/// A state of an ancilla of dimension `ancilla_dim` jointly with `qubits`
/// qubits. The ancilla is the most significant factor: the amplitude of
/// `|a⟩ ⊗ |q⟩` is stored at `a * 2^qubits + q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    pub ancilla_dim: usize,
    pub qubits: usize,
    pub amplitudes: Vec<C64>,
}

impl JointState {
    /// `ancilla ⊗ |0…0⟩`.
    pub fn with_blank_qubits(ancilla: &[C64], qubits: usize) -> Self {
        let width = 1usize << qubits;
        let mut amplitudes = vec![C64::new(0.0, 0.0); ancilla.len() * width];
        for (a, z) in ancilla.iter().enumerate() {
            amplitudes[a * width] = *z;
        }
        Self {
            ancilla_dim: ancilla.len(),
            qubits,
            amplitudes,
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Qubit-register amplitudes for ancilla basis state `a`.
    pub fn branch(&self, a: usize) -> &[C64] {
        let width = 1usize << self.qubits;
        &self.amplitudes[a * width..(a + 1) * width]
    }

    /// Vector `w_a = ⟨a ⊗ target|self⟩` over ancilla basis states.
    pub fn project_qubits(&self, target: &Statevector) -> Result<Vec<C64>> {
        if target.qubits() != self.qubits {
            return Err(structural(format!(
                "joint state has {} qubits, target has {}",
                self.qubits,
                target.qubits()
            )));
        }
        Ok((0..self.ancilla_dim)
            .map(|a| {
                self.branch(a)
                    .iter()
                    .zip(target.amplitudes())
                    .map(|(x, t)| t.conj() * x)
                    .sum()
            })
            .collect())
    }

    /// Apply `u` (dimension `2 * ancilla_dim`, ordered ancilla ⊗ qubit) to the
    /// ancilla and qubit `label`.
    pub fn apply_ancilla_qubit(&mut self, u: &crate::linalg::ComplexMatrix, label: usize) {
        let d = self.ancilla_dim;
        debug_assert_eq!(u.nrows(), 2 * d);
        let width = 1usize << self.qubits;
        let bit = 1usize << (label - 1);
        let mut local = vec![C64::new(0.0, 0.0); 2 * d];
        for rest in 0..width {
            if rest & bit != 0 {
                continue;
            }
            for a in 0..d {
                local[2 * a] = self.amplitudes[a * width + rest];
                local[2 * a + 1] = self.amplitudes[a * width + (rest | bit)];
            }
            for b in 0..d {
                for i in 0..2 {
                    let row = 2 * b + i;
                    let mut acc = C64::new(0.0, 0.0);
                    for (col, x) in local.iter().enumerate() {
                        acc += u[(row, col)] * x;
                    }
                    let q = if i == 0 { rest } else { rest | bit };
                    self.amplitudes[b * width + q] = acc;
                }
            }
        }
    }

    /// Apply `u` (size `ancilla_dim`) to the ancilla factor.
    pub fn apply_ancilla(&mut self, u: &crate::linalg::ComplexMatrix) {
        let d = self.ancilla_dim;
        let width = 1usize << self.qubits;
        let mut col = vec![C64::new(0.0, 0.0); d];
        for q in 0..width {
            for (a, slot) in col.iter_mut().enumerate() {
                *slot = self.amplitudes[a * width + q];
            }
            for b in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (a, x) in col.iter().enumerate() {
                    acc += u[(b, a)] * x;
                }
                self.amplitudes[b * width + q] = acc;
            }
        }
    }

    /// Apply a 2x2 unitary to qubit `label`.
    pub fn apply_qubit(&mut self, u: &Matrix2<C64>, label: usize) {
        let bit = 1usize << (label - 1);
        for idx in 0..self.amplitudes.len() {
            if idx & bit != 0 {
                continue;
            }
            let x0 = self.amplitudes[idx];
            let x1 = self.amplitudes[idx | bit];
            self.amplitudes[idx] = u[(0, 0)] * x0 + u[(0, 1)] * x1;
            self.amplitudes[idx | bit] = u[(1, 0)] * x0 + u[(1, 1)] * x1;
        }
    }

    /// If the ancilla is in a product with the qubits, return `(ancilla,
    /// qubit state)` with the phase carried by the qubit state; otherwise
    /// `None`. Product-ness is judged by the second Schmidt value being at
    /// most `tol`.
    pub fn decouple(&self, tol: f64) -> Result<Option<(Vec<C64>, Statevector)>> {
        let width = 1usize << self.qubits;
        let m = crate::linalg::from_row_major(self.ancilla_dim, width, &self.amplitudes)?;
        let s = crate::linalg::svd(&m)?;
        if s.singulars.get(1).copied().unwrap_or(0.0) > tol {
            return Ok(None);
        }
        let ancilla: Vec<C64> = s.left.column(0).iter().copied().collect();
        // qubit part = ⟨ancilla| self
        let qubit: Vec<C64> = (0..width)
            .map(|q| {
                (0..self.ancilla_dim)
                    .map(|a| ancilla[a].conj() * self.amplitudes[a * width + q])
                    .sum()
            })
            .collect();
        Ok(Some((ancilla, Statevector::new(self.qubits, qubit)?)))
    }
}
