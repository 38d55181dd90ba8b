//! Output states of the optimal universal symmetric 1 → M qubit cloner.
//!
//! The `2M - 1` qubit output has the M clones in the leftmost (most
//! significant) qubits and the `M - 1` anticlones to their right. For a basis
//! input `|b⟩` the output is
//!
//! ```text
//! Σ_j α_j |(M-j) b, j b̄⟩_S ⊗ |(M-j-1) b̄, j b⟩_S,   α_j = sqrt(2(M-j) / (M(M+1)))
//! ```
//!
//! and a general input `α|0⟩ + β|1⟩` is mapped linearly.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::C64;
use crate::statevector::Statevector;

const NORM_TOL: f64 = 1e-12;

/// Normalized single-qubit state `alpha|0⟩ + beta|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureQubit {
    alpha: C64,
    beta: C64,
}

impl PureQubit {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!(
                "qubit amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescale an arbitrary nonzero amplitude pair to unit norm.
    pub fn normalize(alpha: C64, beta: C64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("qubit amplitudes are zero or not finite"));
        }
        Self::new(alpha / norm, beta / norm)
    }

    pub fn zero() -> Self {
        Self {
            alpha: C64::new(1.0, 0.0),
            beta: C64::new(0.0, 0.0),
        }
    }

    pub fn one() -> Self {
        Self {
            alpha: C64::new(0.0, 0.0),
            beta: C64::new(1.0, 0.0),
        }
    }

    /// `(|0⟩ + |1⟩) / √2`.
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            alpha: C64::new(h, 0.0),
            beta: C64::new(h, 0.0),
        }
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.alpha, self.beta]
    }

    /// `-β̄|0⟩ + ᾱ|1⟩`.
    pub fn orthogonal(&self) -> Self {
        Self {
            alpha: -self.beta.conj(),
            beta: self.alpha.conj(),
        }
    }

    /// Complex conjugate in the computational basis.
    pub fn conjugate(&self) -> Self {
        Self {
            alpha: self.alpha.conj(),
            beta: self.beta.conj(),
        }
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }
}

/// A 1 → `clones` cloning problem for a given input qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmSpec {
    clones: usize,
    input: PureQubit,
}

impl GmSpec {
    pub fn new(clones: usize, input: PureQubit) -> Result<Self> {
        if clones == 0 {
            return Err(invalid("number of clones must be at least 1"));
        }
        Ok(Self { clones, input })
    }

    pub fn clones(&self) -> usize {
        self.clones
    }

    pub fn input(&self) -> PureQubit {
        self.input
    }

    /// `2M - 1`.
    pub fn qubits(&self) -> usize {
        2 * self.clones - 1
    }
}

/// `[α_0, …, α_{M-1}]` with `α_j = sqrt(2(M-j) / (M(M+1)))`.
pub fn gm_coefficients(m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(invalid("number of clones must be at least 1"));
    }
    let denom = (m * (m + 1)) as f64;
    Ok((0..m)
        .map(|j| (2.0 * (m - j) as f64 / denom).sqrt())
        .collect())
}

/// Normalized equal superposition of every arrangement of `count_a` copies of
/// `state_a` and `count_b` copies of `state_b`. The two states must be
/// orthogonal.
pub fn symmetric_state(
    count_a: usize,
    state_a: PureQubit,
    count_b: usize,
    state_b: PureQubit,
) -> Result<Statevector> {
    let n = count_a + count_b;
    if n == 0 {
        return Err(invalid("symmetric state needs at least one qubit"));
    }
    let ov = state_a.overlap(&state_b).norm();
    if ov > NORM_TOL {
        return Err(invalid(format!(
            "symmetric-state constituents are not orthogonal (overlap {ov:.3e})"
        )));
    }
    let a = state_a.amplitudes();
    let b = state_b.amplitudes();
    let mut acc = vec![C64::new(0.0, 0.0); 1 << n];
    let mut arrangements = 0usize;
    // each mask with `count_b` set bits marks where state_b sits
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != count_b {
            continue;
        }
        arrangements += 1;
        let factors: Vec<[C64; 2]> = (0..n)
            .rev()
            .map(|bit| if mask >> bit & 1 == 1 { b } else { a })
            .collect();
        let term = Statevector::product(&factors);
        for (slot, z) in acc.iter_mut().zip(term.amplitudes()) {
            *slot += z;
        }
    }
    let scale = 1.0 / (arrangements as f64).sqrt();
    Statevector::new(n, acc.into_iter().map(|z| z * scale).collect())
}

/// Cloner output for the basis input `|bit⟩`.
fn gm_basis_state(m: usize, bit: u8) -> Result<Statevector> {
    let (same, flipped) = if bit == 0 {
        (PureQubit::zero(), PureQubit::one())
    } else {
        (PureQubit::one(), PureQubit::zero())
    };
    let alphas = gm_coefficients(m)?;
    let mut acc = vec![C64::new(0.0, 0.0); 1 << (2 * m - 1)];
    for (j, alpha) in alphas.iter().enumerate() {
        let clones = symmetric_state(m - j, same, j, flipped)?;
        let term = if m == 1 {
            clones
        } else {
            let anticlones = symmetric_state(m - j - 1, flipped, j, same)?;
            clones.tensor(&anticlones)
        };
        for (slot, z) in acc.iter_mut().zip(term.amplitudes()) {
            *slot += z * alpha;
        }
    }
    Statevector::new(2 * m - 1, acc)
}

/// The `2M - 1` qubit cloner output for `spec.input()`.
pub fn gm_state(spec: &GmSpec) -> Result<Statevector> {
    let m = spec.clones();
    let zero = gm_basis_state(m, 0)?;
    let one = gm_basis_state(m, 1)?;
    zero.combine(spec.input().alpha(), &one, spec.input().beta())
}

/// `⟨ψ|ρ|ψ⟩` for the reduced state `ρ` of clone `clone_index` (1 = leftmost
/// qubit), obtained by brute-force partial trace of [`gm_state`].
pub fn clone_fidelity_oracle(spec: &GmSpec, clone_index: usize) -> Result<f64> {
    let m = spec.clones();
    if clone_index == 0 || clone_index > m {
        return Err(invalid(format!(
            "clone index {clone_index} outside 1..={m}"
        )));
    }
    let state = gm_state(spec)?;
    let label = state.qubits() - clone_index + 1;
    let rho = state.single_qubit_density(label)?;
    let psi = spec.input().amplitudes();
    let mut f = C64::new(0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            f += psi[r].conj() * rho[(r, c)] * psi[c];
        }
    }
    Ok(f.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_qubit(rng: &mut impl Rng) -> PureQubit {
        PureQubit::normalize(
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        )
        .unwrap()
    }

    fn max_diff(a: &Statevector, b: &Statevector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn coefficients_small_cases() {
        assert_eq!(gm_coefficients(1).unwrap(), vec![1.0]);
        let a = gm_coefficients(2).unwrap();
        assert!((a[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((a[1] - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(gm_coefficients(0).is_err());
    }

    #[test]
    fn coefficients_normalized_and_decreasing() {
        for m in 1..=20 {
            let a = gm_coefficients(m).unwrap();
            assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(a.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn pure_qubit_rejects_unnormalized() {
        assert!(PureQubit::new(r(1.0), r(1.0)).is_err());
        assert!(PureQubit::normalize(r(0.0), r(0.0)).is_err());
    }

    #[test]
    fn symmetric_state_examples() {
        let s = symmetric_state(2, PureQubit::zero(), 0, PureQubit::one()).unwrap();
        assert_eq!(s, Statevector::basis(2, 0).unwrap());

        let s = symmetric_state(1, PureQubit::zero(), 1, PureQubit::one()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = Statevector::new(2, vec![r(0.0), r(h), r(h), r(0.0)]).unwrap();
        assert!(max_diff(&s, &expect) < 1e-15);
    }

    #[test]
    fn symmetric_state_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = random_qubit(&mut rng);
        let s = symmetric_state(2, psi, 1, psi.orthogonal()).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            assert!(max_diff(&s, &s.swap_qubits(a, b).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn symmetric_state_rejects_non_orthogonal() {
        assert!(symmetric_state(1, PureQubit::zero(), 1, PureQubit::plus()).is_err());
        assert!(symmetric_state(0, PureQubit::zero(), 0, PureQubit::one()).is_err());
    }

    #[test]
    fn single_clone_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = random_qubit(&mut rng);
        let s = gm_state(&GmSpec::new(1, psi).unwrap()).unwrap();
        let expect = Statevector::new(1, psi.amplitudes().to_vec()).unwrap();
        assert!(max_diff(&s, &expect) < 1e-15);
    }

    #[test]
    fn two_clone_state_of_zero() {
        let s = gm_state(&GmSpec::new(2, PureQubit::zero()).unwrap()).unwrap();
        let a0 = (2.0f64 / 3.0).sqrt();
        let a1 = (1.0f64 / 3.0).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
        // |00⟩|1⟩ = 0b001, |01⟩|0⟩ = 0b010, |10⟩|0⟩ = 0b100
        let mut amps = vec![r(0.0); 8];
        amps[0b001] = r(a0);
        amps[0b010] = r(a1);
        amps[0b100] = r(a1);
        let expect = Statevector::new(3, amps).unwrap();
        assert!(max_diff(&s, &expect) < 1e-15);
    }

    #[test]
    fn state_is_linear_in_input() {
        let spec = GmSpec::new(4, PureQubit::plus()).unwrap();
        let s = gm_state(&spec).unwrap();
        let z = gm_state(&GmSpec::new(4, PureQubit::zero()).unwrap()).unwrap();
        let o = gm_state(&GmSpec::new(4, PureQubit::one()).unwrap()).unwrap();
        let lin = z.combine(spec.input().alpha(), &o, spec.input().beta()).unwrap();
        assert!(max_diff(&s, &lin) < 1e-12);
    }

    #[test]
    fn block_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in 2..=5 {
            let s = gm_state(&GmSpec::new(m, random_qubit(&mut rng)).unwrap()).unwrap();
            let n = 2 * m - 1;
            // clones occupy labels n..=m, anticlones m-1..=1
            for a in m..=n {
                for b in (a + 1)..=n {
                    assert!(max_diff(&s, &s.swap_qubits(a, b).unwrap()) < 1e-12);
                }
            }
            for a in 1..m {
                for b in (a + 1)..m {
                    assert!(max_diff(&s, &s.swap_qubits(a, b).unwrap()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn oracle_values() {
        let one = clone_fidelity_oracle(&GmSpec::new(1, PureQubit::plus()).unwrap(), 1).unwrap();
        assert!((one - 1.0).abs() < 1e-14);
        let two = clone_fidelity_oracle(&GmSpec::new(2, PureQubit::zero()).unwrap(), 1).unwrap();
        assert!((two - 5.0 / 6.0).abs() < 1e-12);
        let spec = GmSpec::new(3, PureQubit::plus()).unwrap();
        let f: Vec<f64> = (1..=3).map(|c| clone_fidelity_oracle(&spec, c).unwrap()).collect();
        assert!(f.iter().all(|x| (x - f[0]).abs() < 1e-12));
        assert!(clone_fidelity_oracle(&spec, 0).is_err());
        assert!(clone_fidelity_oracle(&spec, 4).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn oracle_is_universal(ar in -1.0f64..1.0, ai in -1.0f64..1.0, br in -1.0f64..1.0, bi in -1.0f64..1.0, m in 2usize..5) {
            prop_assume!(ar * ar + ai * ai + br * br + bi * bi > 1e-3);
            let psi = PureQubit::normalize(C64::new(ar, ai), C64::new(br, bi)).unwrap();
            let f = clone_fidelity_oracle(&GmSpec::new(m, psi).unwrap(), 1).unwrap();
            let reference = clone_fidelity_oracle(&GmSpec::new(m, PureQubit::zero()).unwrap(), 1).unwrap();
            prop_assert!((f - reference).abs() < 1e-10);
        }

        #[test]
        fn state_is_normalized(ar in -1.0f64..1.0, ai in -1.0f64..1.0, br in -1.0f64..1.0, bi in -1.0f64..1.0, m in 1usize..=6) {
            prop_assume!(ar * ar + ai * ai + br * br + bi * bi > 1e-3);
            let psi = PureQubit::normalize(C64::new(ar, ai), C64::new(br, bi)).unwrap();
            let s = gm_state(&GmSpec::new(m, psi).unwrap()).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }
}
