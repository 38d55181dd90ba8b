//! Reducing the bond (ancilla) dimension of an MPS.
//!
//! Two routes are provided. [`svd_truncate_mps`] walks the chain once and
//! replaces each site matrix by its best lower-rank Frobenius approximation,
//! which is locally optimal because the rest of the chain is kept in
//! orthonormal gauge. [`variational_compress`] minimizes
//! `‖|T⟩ - |A⟩‖²` over all MPS `|A⟩` with bonds `≤ D̃` by exact single-site
//! least-squares updates, sweeping back and forth until the objective stalls.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, structural, Error, Result};
use crate::gisin_massar::{gm_state, GmSpec};
use crate::linalg::{self, ComplexMatrix, ComplexVector, C64, RANK_TOL};
use crate::mps::{transfer, MatrixProductState, SiteTensor};
use crate::rng;

pub const DEFAULT_MAX_SWEEPS: usize = 50;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-12;
/// Largest qubit count built densely unless overridden.
pub const DEFAULT_MAX_QUBITS: usize = 15;

const RIDGE: f64 = 1e-12;
const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SvdTruncation,
    Variational,
    VariationalSeededBySvd,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::SvdTruncation => "svd_truncation",
            Method::Variational => "variational",
            Method::VariationalSeededBySvd => "variational_seeded_by_svd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "svd" | "svd_truncation" => Ok(Method::SvdTruncation),
            "variational" | "var" => Ok(Method::Variational),
            "seeded" | "variational_seeded" | "variational_seeded_by_svd" => {
                Ok(Method::VariationalSeededBySvd)
            }
            other => Err(invalid(format!("unknown compression method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompressionRequest {
    pub target: MatrixProductState,
    pub bond_cap: usize,
    pub method: Method,
    pub max_sweeps: usize,
    pub convergence_tol: f64,
    /// Seeds the random start of [`Method::Variational`].
    pub seed: u64,
}

impl CompressionRequest {
    pub fn new(target: MatrixProductState, bond_cap: usize, method: Method) -> Self {
        Self {
            target,
            bond_cap,
            method,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.bond_cap == 0 {
            return Err(invalid("bond_cap must be at least 1"));
        }
        if self.max_sweeps == 0 {
            return Err(invalid("max_sweeps must be at least 1"));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(invalid("convergence_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub fidelity: f64,
    /// `1 - fidelity`.
    pub error: f64,
    pub sweeps_used: usize,
    pub method: Method,
    pub bond_cap: usize,
    pub qubits: usize,
    /// Set when a local normal-equation solve needed the ridge term.
    pub regularized_solve: bool,
}

impl FidelityReport {
    fn new(fidelity: f64, method: Method, bond_cap: usize, qubits: usize) -> Self {
        Self {
            fidelity,
            error: 1.0 - fidelity,
            sweeps_used: 0,
            method,
            bond_cap,
            qubits,
            regularized_solve: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Compressed {
    pub state: MatrixProductState,
    pub report: FidelityReport,
    /// Least-squares objective after every local update (variational only).
    pub objective_trace: Vec<f64>,
    /// Objective at the end of each full sweep (variational only).
    pub sweep_objectives: Vec<f64>,
}

/// `|⟨a|b⟩|` for normalized states.
pub fn fidelity(a: &MatrixProductState, b: &MatrixProductState) -> Result<f64> {
    if a.qubits() != b.qubits() {
        return Err(structural(format!(
            "fidelity between {}- and {}-qubit states",
            a.qubits(),
            b.qubits()
        )));
    }
    for m in [a, b] {
        let n = m.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("fidelity needs normalized states, got norm {n}")));
        }
    }
    Ok(a.overlap(b)?.norm())
}

/// Run whichever method `req` names.
pub fn compress(req: &CompressionRequest) -> Result<Compressed> {
    match req.method {
        Method::SvdTruncation => {
            req.validate()?;
            let (state, report) = svd_truncate_mps(&req.target, req.bond_cap)?;
            Ok(Compressed {
                state,
                report,
                objective_trace: Vec::new(),
                sweep_objectives: Vec::new(),
            })
        }
        _ => variational_compress(req),
    }
}

/// Truncate every bond to at most `bond_cap` by per-site rank truncation.
pub fn svd_truncate_mps(
    target: &MatrixProductState,
    bond_cap: usize,
) -> Result<(MatrixProductState, FidelityReport)> {
    if bond_cap == 0 {
        return Err(invalid("bond_cap must be at least 1"));
    }
    if !target.is_canonical() {
        return Err(Error::State(
            "SVD truncation needs a canonical MPS; call canonicalize() first".into(),
        ));
    }
    let n = target.qubits();
    let method = Method::SvdTruncation;
    if bond_cap >= target.bond_dimension() {
        return Ok((target.clone(), FidelityReport::new(1.0, method, bond_cap, n)));
    }
    let reference = target.normalized()?;

    // fold φ_I into site 1 so the orthogonality centre starts there
    let phi = ComplexMatrix::from_column_slice(target.phi_initial().len(), 1, target.phi_initial().as_slice());
    let mut sites: Vec<SiteTensor> = target.sites().to_vec();
    sites[0] = sites[0].sandwich(None, Some(&phi));
    let mut carry: Option<ComplexMatrix> = None;
    for site in sites.iter_mut() {
        let current = match &carry {
            Some(c) => site.sandwich(None, Some(c)),
            None => site.clone(),
        };
        let wide = current.wide();
        let dec = linalg::svd(&wide)?;
        let keep = dec.rank(RANK_TOL).clamp(1, bond_cap);
        // rank-`keep` Eckart–Young approximation kept in factored form
        let right = dec.right.columns(0, keep).adjoint();
        *site = SiteTensor::from_wide(&right)?;
        let mut c = dec.left.columns(0, keep).into_owned();
        for (j, s) in dec.singulars.iter().take(keep).enumerate() {
            c.column_mut(j).scale_mut(*s);
        }
        carry = Some(c);
    }
    let c = carry.expect("n ≥ 1");
    let phi_final = c.adjoint() * target.phi_final();
    let raw = MatrixProductState::new(
        sites,
        ComplexVector::from_element(1, C64::new(1.0, 0.0)),
        phi_final,
    )?;
    let state = raw.canonicalize()?.normalized()?.canonicalize()?;
    let f = fidelity(&reference, &state)?;
    Ok((state, FidelityReport::new(f, method, bond_cap, n)))
}

/// Random complex Gaussian MPS with bonds `min(cap, 2^{k-1}, 2^{n-k+1})`,
/// canonicalized and normalized.
pub fn random_mps(qubits: usize, bond_cap: usize, rng: &mut impl Rng) -> Result<MatrixProductState> {
    if qubits == 0 || bond_cap == 0 {
        return Err(invalid("random MPS needs qubits ≥ 1 and bond_cap ≥ 1"));
    }
    let dims: Vec<usize> = (0..=qubits)
        .map(|k| {
            let left = 1usize.checked_shl(k as u32).unwrap_or(usize::MAX);
            let right = 1usize.checked_shl((qubits - k) as u32).unwrap_or(usize::MAX);
            bond_cap.min(left).min(right)
        })
        .collect();
    let mut gauss = || {
        C64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    };
    let mut sites = Vec::with_capacity(qubits);
    for k in 0..qubits {
        let v0 = ComplexMatrix::from_fn(dims[k + 1], dims[k], |_, _| gauss());
        let v1 = ComplexMatrix::from_fn(dims[k + 1], dims[k], |_, _| gauss());
        sites.push(SiteTensor::new(v0, v1)?);
    }
    let one = ComplexVector::from_element(1, C64::new(1.0, 0.0));
    MatrixProductState::new(sites, one.clone(), one)?
        .canonicalize()?
        .normalized()
}

/// Inverse of a Hermitian positive semidefinite matrix, with a ridge when it
/// is numerically singular. Returns whether the ridge was used.
fn hermitian_inverse(g: &ComplexMatrix) -> Result<(ComplexMatrix, bool)> {
    let (values, vectors) = linalg::hermitian_eigen(g)?;
    let max = values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let min = values.iter().fold(f64::INFINITY, |m, &l| m.min(l));
    let singular = min.is_nan() || min <= RIDGE * max.max(1.0);
    let shift = if singular { RIDGE } else { 0.0 };
    let mut scaled = vectors.clone();
    for (j, l) in values.iter().enumerate() {
        let inv = 1.0 / (l.max(0.0) + shift);
        scaled.column_mut(j).scale_mut(inv);
    }
    Ok((scaled * vectors.adjoint(), singular))
}

/// Conjugate transpose of a column as a `1 × D` matrix.
fn row(v: &ComplexVector) -> ComplexMatrix {
    ComplexMatrix::from_fn(1, v.len(), |_, j| v[j].conj())
}

/// Right environment update `F' = Σ_i A^{i†} F B^i`.
fn transfer_down(a: &SiteTensor, b: &SiteTensor, env: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.in_dim(), b.in_dim());
    for i in 0..2 {
        out += a.matrix(i).adjoint() * env * b.matrix(i);
    }
    out
}

/// `Σ_i tr(A^{i†} F B^i E^T)`, i.e. `⟨A|B⟩` read off at one site.
fn site_overlap(a: &SiteTensor, b: &SiteTensor, right: &ComplexMatrix, left: &ComplexMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..2 {
        acc += (a.matrix(i).adjoint() * right * b.matrix(i) * left.transpose()).trace();
    }
    acc
}

struct Sweeper<'a> {
    target: &'a MatrixProductState,
    target_norm_sqr: f64,
    sites: Vec<SiteTensor>,
    regularized: bool,
    trace: Vec<f64>,
}

impl<'a> Sweeper<'a> {
    fn left_envs(&self) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
        let n = self.sites.len();
        let one = ComplexMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let mut gram = vec![one.clone()];
        let t_phi = self.target.phi_initial();
        let mut cross = vec![ComplexMatrix::from_row_slice(1, t_phi.len(), t_phi.as_slice())];
        for k in 0..n - 1 {
            gram.push(transfer(&self.sites[k], &self.sites[k], &gram[k]));
            cross.push(transfer(&self.sites[k], &self.target.sites()[k], &cross[k]));
        }
        (gram, cross)
    }

    fn right_envs(&self) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
        let n = self.sites.len();
        let one = ComplexMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let t_phi = self.target.phi_final();
        let mut gram = vec![one.clone(); n];
        let mut cross = vec![one; n];
        cross[n - 1] = row(t_phi);
        for k in (1..n).rev() {
            gram[k - 1] = transfer_down(&self.sites[k], &self.sites[k], &gram[k]);
            cross[k - 1] = transfer_down(&self.sites[k], &self.target.sites()[k], &cross[k]);
        }
        (gram, cross)
    }

    /// Exact least-squares update of site `k`; records the new objective.
    fn solve(
        &mut self,
        k: usize,
        gl: &ComplexMatrix,
        ol: &ComplexMatrix,
        gr: &ComplexMatrix,
        or: &ComplexMatrix,
    ) -> Result<()> {
        let (gr_inv, r1) = hermitian_inverse(gr)?;
        let (gl_inv, r2) = hermitian_inverse(&gl.transpose())?;
        self.regularized |= r1 || r2;
        let t = &self.target.sites()[k];
        let x0 = &gr_inv * (or * t.matrix(0) * ol.transpose()) * &gl_inv;
        let x1 = &gr_inv * (or * t.matrix(1) * ol.transpose()) * &gl_inv;
        let x = SiteTensor::new(x0, x1)?;
        let aa = site_overlap(&x, &x, gr, gl).re;
        let at = site_overlap(&x, t, or, ol);
        self.trace.push(self.target_norm_sqr + aa - 2.0 * at.re);
        self.sites[k] = x;
        Ok(())
    }

    /// Move the orthogonality centre from site `k` to `k + 1`.
    fn shift_up(&mut self, k: usize) -> Result<()> {
        let dec = linalg::svd(&self.sites[k].wide())?;
        let keep = dec.singulars.len();
        self.sites[k] = SiteTensor::from_wide(&dec.right.columns(0, keep).adjoint())?;
        let mut c = dec.left.columns(0, keep).into_owned();
        for (j, s) in dec.singulars.iter().enumerate() {
            c.column_mut(j).scale_mut(*s);
        }
        self.sites[k + 1] = self.sites[k + 1].sandwich(None, Some(&c));
        Ok(())
    }

    /// Move the orthogonality centre from site `k` to `k - 1`.
    fn shift_down(&mut self, k: usize) -> Result<()> {
        let dec = linalg::svd(&self.sites[k].stacked())?;
        let keep = dec.singulars.len();
        self.sites[k] = SiteTensor::from_stacked(&dec.left.columns(0, keep).into_owned())?;
        let mut r = dec.right.columns(0, keep).adjoint();
        for (j, s) in dec.singulars.iter().enumerate() {
            r.row_mut(j).scale_mut(*s);
        }
        self.sites[k - 1] = self.sites[k - 1].sandwich(Some(&r), None);
        Ok(())
    }

    fn sweep_up(&mut self) -> Result<()> {
        let n = self.sites.len();
        let (gr, or) = self.right_envs();
        let one = ComplexMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let t_phi = self.target.phi_initial();
        let mut gl = one;
        let mut ol = ComplexMatrix::from_row_slice(1, t_phi.len(), t_phi.as_slice());
        for k in 0..n {
            self.solve(k, &gl, &ol, &gr[k], &or[k])?;
            if k + 1 < n {
                self.shift_up(k)?;
                gl = transfer(&self.sites[k], &self.sites[k], &gl);
                ol = transfer(&self.sites[k], &self.target.sites()[k], &ol);
            }
        }
        Ok(())
    }

    fn sweep_down(&mut self) -> Result<()> {
        let n = self.sites.len();
        let (gl, ol) = self.left_envs();
        let one = ComplexMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let mut gr = one;
        let mut or = row(self.target.phi_final());
        for k in (0..n).rev() {
            self.solve(k, &gl[k], &ol[k], &gr, &or)?;
            if k > 0 {
                self.shift_down(k)?;
                gr = transfer_down(&self.sites[k], &self.sites[k], &gr);
                or = transfer_down(&self.sites[k], &self.target.sites()[k], &or);
            }
        }
        Ok(())
    }
}

/// Variational compression by single-site sweeps.
pub fn variational_compress(req: &CompressionRequest) -> Result<Compressed> {
    req.validate()?;
    let start = match req.method {
        Method::Variational => {
            let mut r = rng::seeded(req.seed);
            random_mps(req.target.qubits(), req.bond_cap, &mut r)?
        }
        Method::VariationalSeededBySvd => {
            let target = if req.target.is_canonical() {
                req.target.clone()
            } else {
                req.target.canonicalize()?
            };
            svd_truncate_mps(&target, req.bond_cap)?.0
        }
        Method::SvdTruncation => {
            return Err(invalid("variational_compress called with svd_truncation"))
        }
    };
    let target = req.target.normalized()?;
    let n = target.qubits();

    // φ_I = φ_F = [1]; push φ_I into site 1 so site 1 is the centre
    let phi = ComplexMatrix::from_column_slice(start.phi_initial().len(), 1, start.phi_initial().as_slice());
    let mut sites = start.sites().to_vec();
    sites[0] = sites[0].sandwich(None, Some(&phi));
    let bra = row(start.phi_final());
    sites[n - 1] = sites[n - 1].sandwich(Some(&bra), None);

    let mut sweeper = Sweeper {
        target: &target,
        target_norm_sqr: 1.0,
        sites,
        regularized: false,
        trace: Vec::new(),
    };
    let mut sweep_objectives = Vec::new();
    let mut previous = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < req.max_sweeps {
        sweeper.sweep_up()?;
        sweeper.sweep_down()?;
        sweeps += 1;
        let current = *sweeper.trace.last().expect("at least one solve");
        sweep_objectives.push(current);
        if previous - current < req.convergence_tol {
            break;
        }
        previous = current;
    }

    let one = ComplexVector::from_element(1, C64::new(1.0, 0.0));
    let raw = MatrixProductState::new(sweeper.sites, one.clone(), one)?;
    let state = raw.normalized()?.canonicalize()?;
    let f = fidelity(&target, &state)?;
    let mut report = FidelityReport::new(f, req.method, req.bond_cap, n);
    report.sweeps_used = sweeps;
    report.regularized_solve = sweeper.regularized;
    Ok(Compressed {
        state,
        report,
        objective_trace: sweeper.trace,
        sweep_objectives,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub seed: u64,
    pub max_sweeps: usize,
    pub convergence_tol: f64,
    pub max_qubits: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

/// One report per `(bond_cap, method)` pair, caps outermost. Points run in
/// parallel on the current rayon pool; the output order is fixed.
pub fn regularization_scan(
    spec: &GmSpec,
    bond_caps: &[usize],
    methods: &[Method],
    opts: &ScanOptions,
) -> Result<Vec<FidelityReport>> {
    let n = spec.qubits();
    if n > opts.max_qubits {
        return Err(Error::Resource {
            qubits: n,
            max: opts.max_qubits,
        });
    }
    let state = gm_state(spec)?;
    let target = MatrixProductState::from_statevector(&state, RANK_TOL)?;
    regularize_target(&target, bond_caps, methods, opts)
}

/// [`regularization_scan`] against an already decomposed target.
pub fn regularize_target(
    target: &MatrixProductState,
    bond_caps: &[usize],
    methods: &[Method],
    opts: &ScanOptions,
) -> Result<Vec<FidelityReport>> {
    Ok(regularize_target_timed(target, bond_caps, methods, opts)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

/// Like [`regularize_target`], pairing each report with its wall time in seconds.
pub fn regularize_target_timed(
    target: &MatrixProductState,
    bond_caps: &[usize],
    methods: &[Method],
    opts: &ScanOptions,
) -> Result<Vec<(FidelityReport, f64)>> {
    let points: Vec<(usize, Method)> = bond_caps
        .iter()
        .flat_map(|&c| methods.iter().map(move |&m| (c, m)))
        .collect();
    points
        .par_iter()
        .enumerate()
        .map(|(idx, &(cap, method))| {
            let start = Instant::now();
            let mut req = CompressionRequest::new(target.clone(), cap, method);
            req.max_sweeps = opts.max_sweeps;
            req.convergence_tol = opts.convergence_tol;
            req.seed = rng::child(opts.seed, idx as u64).random();
            compress(&req).map(|c| (c.report, start.elapsed().as_secs_f64()))
        })
        .collect()
}
