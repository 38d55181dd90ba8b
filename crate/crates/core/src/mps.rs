//! Open-boundary matrix-product states.
//!
//! A state on `n` qubits is
//!
//! ```text
//! |ψ⟩ = Σ ⟨φ_F| V_[n]^{i_n} ⋯ V_[1]^{i_1} |φ_I⟩ |i_n, …, i_1⟩
//! ```
//!
//! Site `k` holds the pair `V_[k]^0, V_[k]^1`, each a linear map from bond
//! `k` (dimension `D_k`) to bond `k + 1` (dimension `D_{k+1}`), stored as a
//! `D_{k+1} x D_k` matrix. Bond 1 carries `|φ_I⟩` and bond `n + 1` carries
//! `|φ_F⟩`. Site 1 acts on the least significant qubit, so applying the sites
//! in order 1, 2, …, n is the sequential generation order.
//!
//! A state is *canonical* here when every site is an isometry from its input
//! bond into output bond ⊗ qubit, `Σ_i V^{i†} V^i = I`. That is exactly the
//! condition for the site to be realized by one ancilla–qubit unitary.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, structural, Error, Result};
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64};
use crate::statevector::{JointState, Statevector};

/// Tolerance on `Σ_i V^{i†} V^i = I` for the canonical flag.
pub const CANONICAL_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

/// The two `D_{k+1} x D_k` matrices of one site.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    mats: [ComplexMatrix; 2],
}

impl SiteTensor {
    pub fn new(v0: ComplexMatrix, v1: ComplexMatrix) -> Result<Self> {
        if v0.shape() != v1.shape() {
            return Err(structural(format!(
                "site matrices differ in shape: {:?} vs {:?}",
                v0.shape(),
                v1.shape()
            )));
        }
        if v0.nrows() == 0 || v0.ncols() == 0 {
            return Err(structural("site matrices must be nonempty"));
        }
        Ok(Self { mats: [v0, v1] })
    }

    pub fn matrix(&self, i: usize) -> &ComplexMatrix {
        &self.mats[i]
    }

    pub fn matrices(&self) -> &[ComplexMatrix; 2] {
        &self.mats
    }

    /// `D_k`.
    pub fn in_dim(&self) -> usize {
        self.mats[0].ncols()
    }

    /// `D_{k+1}`.
    pub fn out_dim(&self) -> usize {
        self.mats[0].nrows()
    }

    /// `2 D_{k+1} x D_k` matrix with row `2b + i` holding `V^i[b, ·]`.
    pub fn stacked(&self) -> ComplexMatrix {
        let (rows, cols) = (self.out_dim(), self.in_dim());
        ComplexMatrix::from_fn(2 * rows, cols, |r, c| self.mats[r % 2][(r / 2, c)])
    }

    pub fn from_stacked(m: &ComplexMatrix) -> Result<Self> {
        if !m.nrows().is_multiple_of(2) {
            return Err(structural("stacked site matrix needs an even row count"));
        }
        let rows = m.nrows() / 2;
        let v0 = ComplexMatrix::from_fn(rows, m.ncols(), |r, c| m[(2 * r, c)]);
        let v1 = ComplexMatrix::from_fn(rows, m.ncols(), |r, c| m[(2 * r + 1, c)]);
        Self::new(v0, v1)
    }

    /// `D_{k+1} x 2 D_k` matrix `[V^0 | V^1]`.
    pub fn wide(&self) -> ComplexMatrix {
        let (rows, cols) = (self.out_dim(), self.in_dim());
        ComplexMatrix::from_fn(rows, 2 * cols, |r, c| self.mats[c / cols][(r, c % cols)])
    }

    pub fn from_wide(m: &ComplexMatrix) -> Result<Self> {
        if !m.ncols().is_multiple_of(2) {
            return Err(structural("wide site matrix needs an even column count"));
        }
        let cols = m.ncols() / 2;
        Self::new(
            m.columns(0, cols).into_owned(),
            m.columns(cols, cols).into_owned(),
        )
    }

    /// `V^i ← left · V^i · right` for both `i`.
    pub fn sandwich(&self, left: Option<&ComplexMatrix>, right: Option<&ComplexMatrix>) -> Self {
        let apply = |m: &ComplexMatrix| {
            let mut out = m.clone();
            if let Some(l) = left {
                out = l * out;
            }
            if let Some(r) = right {
                out *= r;
            }
            out
        };
        Self {
            mats: [apply(&self.mats[0]), apply(&self.mats[1])],
        }
    }

    /// Largest entry of `|Σ_i V^{i†} V^i - I|`.
    pub fn isometry_residual(&self) -> f64 {
        linalg::orthonormality_residual(&self.stacked())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixProductState {
    sites: Vec<SiteTensor>,
    phi_initial: ComplexVector,
    phi_final: ComplexVector,
    canonical: bool,
}

impl MatrixProductState {
    /// Assemble an MPS from site tensors (site 1 first) and boundary vectors.
    /// The canonical flag is set if every site passes the isometry check.
    pub fn new(
        sites: Vec<SiteTensor>,
        phi_initial: ComplexVector,
        phi_final: ComplexVector,
    ) -> Result<Self> {
        if sites.is_empty() {
            return Err(structural("an MPS needs at least one site"));
        }
        if sites[0].in_dim() != phi_initial.len() {
            return Err(structural(format!(
                "initial boundary has length {} but site 1 expects {}",
                phi_initial.len(),
                sites[0].in_dim()
            )));
        }
        for (k, pair) in sites.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(structural(format!(
                    "bond {} mismatch: site {} outputs {} but site {} expects {}",
                    k + 2,
                    k + 1,
                    pair[0].out_dim(),
                    k + 2,
                    pair[1].in_dim()
                )));
            }
        }
        let last = sites.last().expect("nonempty");
        if last.out_dim() != phi_final.len() {
            return Err(structural(format!(
                "final boundary has length {} but site {} outputs {}",
                phi_final.len(),
                sites.len(),
                last.out_dim()
            )));
        }
        let mut mps = Self {
            sites,
            phi_initial,
            phi_final,
            canonical: false,
        };
        mps.canonical = mps.left_orthonormality_residual() <= CANONICAL_TOL;
        Ok(mps)
    }

    pub fn qubits(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &SiteTensor {
        &self.sites[k - 1]
    }

    pub fn phi_initial(&self) -> &ComplexVector {
        &self.phi_initial
    }

    pub fn phi_final(&self) -> &ComplexVector {
        &self.phi_final
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// `[D_1, …, D_{n+1}]`.
    pub fn bond_dims(&self) -> Vec<usize> {
        std::iter::once(self.sites[0].in_dim())
            .chain(self.sites.iter().map(SiteTensor::out_dim))
            .collect()
    }

    /// Bond dimensions of the `n - 1` internal cuts, `[D_2, …, D_n]`.
    pub fn internal_bond_dims(&self) -> Vec<usize> {
        let dims = self.bond_dims();
        dims[1..dims.len() - 1].to_vec()
    }

    /// `D = max_k D_k`.
    pub fn bond_dimension(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn left_orthonormality_residual(&self) -> f64 {
        self.sites
            .iter()
            .map(SiteTensor::isometry_residual)
            .fold(0.0, f64::max)
    }

    /// Exact decomposition by repeated SVD, peeling qubit `n` first. Singular
    /// values at or below `rank_tol * σ₁` of each cut are dropped; a
    /// `rank_tol` of zero keeps every value.
    pub fn from_statevector(v: &Statevector, rank_tol: f64) -> Result<Self> {
        if !rank_tol.is_finite() || rank_tol < 0.0 {
            return Err(invalid(format!("rank tolerance {rank_tol} must be finite and ≥ 0")));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("statevector norm is {norm}, expected 1")));
        }
        let n = v.qubits();
        if n == 0 {
            return Err(invalid("statevector has no qubits"));
        }
        let mut remainder = ComplexMatrix::from_row_slice(1, 1 << n, v.amplitudes());
        let mut rev_sites = Vec::with_capacity(n);
        for k in (1..=n).rev() {
            let out_dim = remainder.nrows();
            let reshaped = reshape_row_major(&remainder, 2 * out_dim, 1 << (k - 1));
            let dec = linalg::svd(&reshaped)?;
            let keep = if rank_tol == 0.0 {
                dec.singulars.len()
            } else {
                dec.rank(rank_tol).max(1)
            };
            let left = dec.left.columns(0, keep).into_owned();
            rev_sites.push(SiteTensor::from_stacked(&left)?);
            let mut next = dec.right.columns(0, keep).adjoint();
            for (r, s) in dec.singulars.iter().take(keep).enumerate() {
                next.row_mut(r).scale_mut(*s);
            }
            remainder = next;
        }
        rev_sites.reverse();
        let phi_initial = remainder.column(0).into_owned();
        let phi_final = ComplexVector::from_element(1, C64::new(1.0, 0.0));
        Self::new(rev_sites, phi_initial, phi_final)
    }

    pub fn to_statevector(&self) -> Result<Statevector> {
        let n = self.qubits();
        // partial[x] = V_[k]^{i_k} ⋯ V_[1]^{i_1} φ_I for x = (i_k … i_1)
        let mut partial = vec![self.phi_initial.clone()];
        for site in &self.sites {
            let mut next = Vec::with_capacity(partial.len() * 2);
            for i in 0..2 {
                for x in &partial {
                    next.push(site.matrix(i) * x);
                }
            }
            partial = next;
        }
        let amplitudes = partial
            .iter()
            .map(|x| self.phi_final.dotc(x))
            .collect();
        Statevector::new(n, amplitudes)
    }

    /// `⟨self|other⟩` by transfer-matrix contraction along the chain.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        if self.qubits() != other.qubits() {
            return Err(structural(format!(
                "overlap of {}- and {}-qubit MPS",
                self.qubits(),
                other.qubits()
            )));
        }
        let mut env = self.phi_initial.conjugate() * other.phi_initial.transpose();
        for (a, b) in self.sites.iter().zip(&other.sites) {
            env = transfer(a, b, &env);
        }
        let value = self.phi_final.transpose() * env * other.phi_final.conjugate();
        Ok(value[(0, 0)])
    }

    pub fn norm(&self) -> f64 {
        self.overlap(self).map(|z| z.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    /// Multiply the state by `factor` (absorbed into `φ_I`).
    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.phi_initial *= factor;
        out
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::State("cannot normalize a zero-norm MPS".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Bring every site into isometric form without changing the state. The
    /// final boundary is folded into site `n` (leaving `D_{n+1} = 1`) and the
    /// remaining weight ends up in `φ_I`. Bonds wider than their neighbours
    /// allow shrink to the exact rank bound.
    pub fn canonicalize(&self) -> Result<Self> {
        let n = self.qubits();
        let mut sites = self.sites.clone();
        let bra = ComplexMatrix::from_fn(1, self.phi_final.len(), |_, j| self.phi_final[j].conj());
        sites[n - 1] = sites[n - 1].sandwich(Some(&bra), None);
        let mut carry: Option<ComplexMatrix> = None;
        for k in (0..n).rev() {
            let site = match &carry {
                Some(c) => sites[k].sandwich(Some(c), None),
                None => sites[k].clone(),
            };
            let dec = linalg::svd(&site.stacked())?;
            let keep = dec.singulars.len();
            sites[k] = SiteTensor::from_stacked(&dec.left)?;
            let mut r = dec.right.columns(0, keep).adjoint();
            for (row, s) in dec.singulars.iter().enumerate() {
                r.row_mut(row).scale_mut(*s);
            }
            carry = Some(r);
        }
        let phi_initial = carry.expect("n ≥ 1") * &self.phi_initial;
        let mut out = Self::new(
            sites,
            phi_initial,
            ComplexVector::from_element(1, C64::new(1.0, 0.0)),
        )?;
        out.canonical = out.left_orthonormality_residual() <= CANONICAL_TOL;
        Ok(out)
    }

    /// Dilate every site to a unitary on ancilla ⊗ qubit for sequential,
    /// measurement-free generation. The ancilla dimension is the bond
    /// dimension; bond spaces occupy the leading ancilla levels.
    pub fn extract_isometries(&self) -> Result<SequentialCircuit> {
        if !self.canonical {
            return Err(Error::State(
                "MPS is not in canonical form; call canonicalize() first".into(),
            ));
        }
        let d = self.bond_dimension();
        let mut steps = Vec::with_capacity(self.qubits());
        for site in &self.sites {
            let stacked = site.stacked();
            let mut iso = ComplexMatrix::zeros(2 * d, site.in_dim());
            iso.rows_mut(0, stacked.nrows()).copy_from(&stacked);
            let completed = linalg::complete_to_unitary(&iso)?;
            // input |a⟩|0⟩ for a < D_k takes completed column a; every other
            // input basis state takes the remaining columns in index order
            let mut u = ComplexMatrix::zeros(2 * d, 2 * d);
            let mut spare = site.in_dim();
            for input in 0..2 * d {
                let (a, j) = (input / 2, input % 2);
                let src = if j == 0 && a < site.in_dim() {
                    a
                } else {
                    let s = spare;
                    spare += 1;
                    s
                };
                u.set_column(input, &completed.column(src));
            }
            steps.push(u);
        }
        let mut initial = vec![C64::new(0.0, 0.0); d];
        for (a, z) in self.phi_initial.iter().enumerate() {
            initial[a] = *z;
        }
        let mut final_bra = vec![C64::new(0.0, 0.0); d];
        for (a, z) in self.phi_final.iter().enumerate() {
            final_bra[a] = *z;
        }
        Ok(SequentialCircuit {
            ancilla_dim: d,
            initial_ancilla: initial,
            final_ancilla: final_bra,
            steps,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MpsDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MpsDocument = serde_json::from_str(text)?;
        doc.into_mps()
    }
}

/// `E' = Σ_i conj(A^i) E B^{iT}`.
pub(crate) fn transfer(a: &SiteTensor, b: &SiteTensor, env: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.out_dim(), b.out_dim());
    for i in 0..2 {
        out += a.matrix(i).conjugate() * env * b.matrix(i).transpose();
    }
    out
}

fn reshape_row_major(m: &ComplexMatrix, rows: usize, cols: usize) -> ComplexMatrix {
    let flat = linalg::to_row_major(m);
    ComplexMatrix::from_row_slice(rows, cols, &flat)
}

/// One unitary per qubit acting on ancilla ⊗ qubit (ancilla-major, `2D x 2D`).
#[derive(Clone, Debug)]
pub struct SequentialCircuit {
    pub ancilla_dim: usize,
    pub initial_ancilla: Vec<C64>,
    /// Ancilla vector `φ_F` whose bra selects the generated qubit state.
    pub final_ancilla: Vec<C64>,
    pub steps: Vec<ComplexMatrix>,
}

impl SequentialCircuit {
    /// Run the steps on `|φ_I⟩ ⊗ |0…0⟩`, step `k` touching qubit `k`.
    pub fn run(&self) -> JointState {
        let n = self.steps.len();
        let mut joint = JointState::with_blank_qubits(&self.initial_ancilla, n);
        for (k, u) in self.steps.iter().enumerate() {
            joint.apply_ancilla_qubit(u, k + 1);
        }
        joint
    }
}

const MPS_FORMAT: &str = "seqclone.mps/1";

/// On-disk layout of an MPS; see the README for the schema.
#[derive(Serialize, Deserialize)]
struct MpsDocument {
    format: String,
    qubits: usize,
    bond_dims: Vec<usize>,
    canonical: bool,
    phi_initial: Vec<String>,
    phi_final: Vec<String>,
    sites: Vec<SiteDocument>,
}

#[derive(Serialize, Deserialize)]
struct SiteDocument {
    /// `[2, D_{k+1}, D_k]`.
    shape: [usize; 3],
    /// Row-major over `(i, row, col)`, each entry as `re`, `im`.
    data: Vec<String>,
}

fn encode(values: impl IntoIterator<Item = C64>) -> Vec<String> {
    values
        .into_iter()
        .flat_map(|z| [format!("{:e}", z.re), format!("{:e}", z.im)])
        .collect()
}

fn decode(strings: &[String]) -> Result<Vec<C64>> {
    if !strings.len().is_multiple_of(2) {
        return Err(Error::Parse("complex array has odd length".into()));
    }
    strings
        .chunks(2)
        .map(|pair| {
            let re = pair[0]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{:?}: {e}", pair[0])))?;
            let im = pair[1]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{:?}: {e}", pair[1])))?;
            Ok(C64::new(re, im))
        })
        .collect()
}

impl From<&MatrixProductState> for MpsDocument {
    fn from(m: &MatrixProductState) -> Self {
        let sites = m
            .sites
            .iter()
            .map(|s| SiteDocument {
                shape: [2, s.out_dim(), s.in_dim()],
                data: encode(
                    s.matrices()
                        .iter()
                        .flat_map(linalg::to_row_major)
                        .collect::<Vec<_>>(),
                ),
            })
            .collect();
        Self {
            format: MPS_FORMAT.into(),
            qubits: m.qubits(),
            bond_dims: m.bond_dims(),
            canonical: m.canonical,
            phi_initial: encode(m.phi_initial.iter().copied()),
            phi_final: encode(m.phi_final.iter().copied()),
            sites,
        }
    }
}

impl MpsDocument {
    fn into_mps(self) -> Result<MatrixProductState> {
        if self.format != MPS_FORMAT {
            return Err(Error::Parse(format!(
                "unsupported MPS format {:?}",
                self.format
            )));
        }
        if self.sites.len() != self.qubits {
            return Err(structural("site count does not match qubit count"));
        }
        let mut sites = Vec::with_capacity(self.sites.len());
        for s in &self.sites {
            let [phys, rows, cols] = s.shape;
            let data = decode(&s.data)?;
            if phys != 2 || data.len() != 2 * rows * cols {
                return Err(structural(format!(
                    "site data of length {} does not fit shape {:?}",
                    data.len(),
                    s.shape
                )));
            }
            let block = rows * cols;
            sites.push(SiteTensor::new(
                linalg::from_row_major(rows, cols, &data[..block])?,
                linalg::from_row_major(rows, cols, &data[block..])?,
            )?);
        }
        let mps = MatrixProductState::new(
            sites,
            ComplexVector::from_vec(decode(&self.phi_initial)?),
            ComplexVector::from_vec(decode(&self.phi_final)?),
        )?;
        if mps.bond_dims() != self.bond_dims {
            return Err(structural("recorded bond dimensions disagree with site shapes"));
        }
        Ok(mps)
    }
}
