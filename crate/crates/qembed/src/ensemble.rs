//! Sampling of the k-body GOE/GUE interaction, its embedding into the
//! m-particle space, and assembly of the quench Hamiltonian
//! H = h(1) + lambda V(k).

use crate::error::{QembedError, Result};
use crate::fock::{
    apply_annihilation, default_sp_energies, enumerate_basis, enumerate_k_configs, BasisTable,
    OccupationState, OperatorMode, OperatorString,
};
use crate::qparam::SystemSpec;
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Largest many-body dimension kept as a dense matrix.
pub const MAX_DENSE_DIM: usize = 4096;

/// Dense real-symmetric or complex-Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum HermitianMatrix {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

pub type KBodyMatrix = HermitianMatrix;
pub type ManyBodyMatrix = HermitianMatrix;

impl HermitianMatrix {
    pub fn dim(&self) -> usize {
        match self {
            HermitianMatrix::Real(a) => a.nrows(),
            HermitianMatrix::Complex(a) => a.nrows(),
        }
    }

    /// Max-norm deviation from (conjugate) symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        match self {
            HermitianMatrix::Real(a) => {
                for i in 0..a.nrows() {
                    for j in 0..i {
                        defect = defect.max((a[(i, j)] - a[(j, i)]).abs());
                    }
                }
            }
            HermitianMatrix::Complex(a) => {
                for i in 0..a.nrows() {
                    for j in 0..=i {
                        defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
                    }
                }
            }
        }
        defect
    }

    /// Real diagonal entries.
    pub fn diagonal(&self) -> Vec<f64> {
        match self {
            HermitianMatrix::Real(a) => (0..a.nrows()).map(|i| a[(i, i)]).collect(),
            HermitianMatrix::Complex(a) => (0..a.nrows()).map(|i| a[(i, i)].re).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            HermitianMatrix::Real(a) => a.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            HermitianMatrix::Complex(a) => a.iter().fold(0.0f64, |m, x| m.max(x.norm())),
        }
    }
}

/// RNG for one ensemble member: ChaCha8 keyed by the base seed with the
/// member index as the stream id, so members are independent and any
/// member is reproducible without generating its predecessors.
pub fn member_rng(base_seed: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(member);
    rng
}

/// Sample the k-body GOE (beta = 1) or GUE (beta = 2) matrix with v = 1:
/// beta = 1 gives a real symmetric matrix with off-diagonal variance 1 and
/// diagonal variance 2; beta = 2 gives a Hermitian matrix with real
/// diagonal of variance 1 and off-diagonal entries (x + iy)/sqrt(2).
pub fn sample_kbody(spec: &SystemSpec, base_seed: u64, member: u64) -> Result<KBodyMatrix> {
    spec.validate()?;
    let dim = crate::fock::space_dimension(spec.n_sp, spec.k, spec.kind.statistics()) as usize;
    let mut rng = member_rng(base_seed, member);
    let mut normal = move || -> f64 { rng.sample(StandardNormal) };
    Ok(match spec.kind.beta() {
        1 => {
            let mut a = Array2::<f64>::zeros((dim, dim));
            for i in 0..dim {
                a[(i, i)] = std::f64::consts::SQRT_2 * normal();
                for j in i + 1..dim {
                    let x = normal();
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                }
            }
            HermitianMatrix::Real(a)
        }
        _ => {
            let mut a = Array2::<Complex64>::zeros((dim, dim));
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..dim {
                a[(i, i)] = Complex64::new(normal(), 0.0);
                for j in i + 1..dim {
                    let z = Complex64::new(normal() * inv_sqrt2, normal() * inv_sqrt2);
                    a[(i, j)] = z;
                    a[(j, i)] = z.conj();
                }
            }
            HermitianMatrix::Complex(a)
        }
    })
}

#[derive(Debug, Clone, Copy)]
struct PlanEntry {
    config: u32,
    ket: u32,
    amp: f64,
}

/// Precomputed action of all annihilation strings on the m-particle basis,
/// grouped by the (m-k)-particle intermediate state they reach.
///
/// <b'|V|b> = sum_i sum_{alpha,gamma} S[i](alpha,b') v[alpha,gamma]
/// S[i](gamma,b), where S[i] holds the amplitudes below; the creation side
/// reuses the same amplitudes by adjointness. Building the plan once per
/// (N, m, k, statistics) makes per-member assembly a pure contraction that
/// scales with the selection-rule sparsity instead of O(D^2) config pairs.
#[derive(Debug, Clone)]
pub struct EmbeddingPlan {
    dim_m: usize,
    dim_k: usize,
    by_intermediate: Vec<Vec<PlanEntry>>,
}

impl EmbeddingPlan {
    pub fn build(
        basis: &BasisTable,
        kconfigs: &BasisTable,
        intermediates: &BasisTable,
    ) -> Result<Self> {
        if basis.n_sp != kconfigs.n_sp
            || basis.n_sp != intermediates.n_sp
            || basis.statistics != kconfigs.statistics
            || basis.statistics != intermediates.statistics
        {
            return Err(QembedError::Dimension(
                "basis tables disagree on N or statistics".into(),
            ));
        }
        if basis.particles < kconfigs.particles
            || intermediates.particles != basis.particles - kconfigs.particles
        {
            return Err(QembedError::Dimension(format!(
                "particle counts inconsistent: m = {}, k = {}, intermediate = {}",
                basis.particles, kconfigs.particles, intermediates.particles
            )));
        }
        let mut by_intermediate = vec![Vec::new(); intermediates.len()];
        let k = kconfigs.particles;
        for (ket, state) in basis.states().iter().enumerate() {
            for config in sub_configs(state, k) {
                let gamma = kconfigs
                    .rank(&config)
                    .ok_or_else(|| QembedError::Dimension("k-config missing from table".into()))?;
                let string =
                    OperatorString::from_config(&config, OperatorMode::Annihilation, basis.statistics);
                let t = apply_annihilation(state, &string)
                    .expect("sub-configuration must be annihilatable");
                let inter = intermediates
                    .rank(&t.target)
                    .ok_or_else(|| QembedError::Dimension("intermediate missing from table".into()))?;
                by_intermediate[inter].push(PlanEntry {
                    config: gamma as u32,
                    ket: ket as u32,
                    amp: t.amplitude,
                });
            }
        }
        Ok(EmbeddingPlan {
            dim_m: basis.len(),
            dim_k: kconfigs.len(),
            by_intermediate,
        })
    }

    pub fn apply(&self, kmat: &KBodyMatrix) -> Result<ManyBodyMatrix> {
        if kmat.dim() != self.dim_k {
            return Err(QembedError::Dimension(format!(
                "k-body matrix dimension {} does not match plan ({})",
                kmat.dim(),
                self.dim_k
            )));
        }
        Ok(match kmat {
            HermitianMatrix::Real(v) => {
                let mut out = Array2::<f64>::zeros((self.dim_m, self.dim_m));
                for group in &self.by_intermediate {
                    for bra in group {
                        for ket in group {
                            out[(bra.ket as usize, ket.ket as usize)] +=
                                bra.amp * v[(bra.config as usize, ket.config as usize)] * ket.amp;
                        }
                    }
                }
                HermitianMatrix::Real(out)
            }
            HermitianMatrix::Complex(v) => {
                let mut out = Array2::<Complex64>::zeros((self.dim_m, self.dim_m));
                for group in &self.by_intermediate {
                    for bra in group {
                        for ket in group {
                            out[(bra.ket as usize, ket.ket as usize)] +=
                                v[(bra.config as usize, ket.config as usize)] * (bra.amp * ket.amp);
                        }
                    }
                }
                HermitianMatrix::Complex(out)
            }
        })
    }
}

/// All distinct k-particle sub-configurations removable from `state`.
fn sub_configs(state: &OccupationState, k: u32) -> Vec<OccupationState> {
    let occ = state.occupations();
    let mut out = Vec::new();
    let mut current = vec![0u8; occ.len()];
    fn rec(
        occ: &[u8],
        orbital: usize,
        left: u32,
        current: &mut Vec<u8>,
        out: &mut Vec<OccupationState>,
    ) {
        if left == 0 {
            out.push(OccupationState::new(current.clone()));
            return;
        }
        if orbital == occ.len() {
            return;
        }
        let available: u32 = occ[orbital..].iter().map(|&n| n as u32).sum();
        if available < left {
            return;
        }
        for take in 0..=(occ[orbital] as u32).min(left) {
            current[orbital] = take as u8;
            rec(occ, orbital + 1, left - take, current, out);
        }
        current[orbital] = 0;
    }
    rec(occ, 0, k, &mut current, &mut out);
    out
}

/// Embed the k-body matrix into the m-particle space of `basis`.
pub fn embed(
    kmat: &KBodyMatrix,
    basis: &BasisTable,
    kconfigs: &BasisTable,
) -> Result<ManyBodyMatrix> {
    if basis.len() > MAX_DENSE_DIM {
        return Err(QembedError::Dimension(format!(
            "many-body dimension {} exceeds dense limit {MAX_DENSE_DIM}",
            basis.len()
        )));
    }
    let intermediates = enumerate_basis(
        basis.n_sp,
        basis.particles - kconfigs.particles,
        basis.statistics,
    )?;
    EmbeddingPlan::build(basis, kconfigs, &intermediates)?.apply(kmat)
}

/// H = diag(h(1)) + lambda V with h from the one-body energies.
pub fn compose_hamiltonian(
    basis: &BasisTable,
    eps: &[f64],
    interaction: &ManyBodyMatrix,
    lambda: f64,
) -> Result<ManyBodyMatrix> {
    if interaction.dim() != basis.len() {
        return Err(QembedError::Dimension(format!(
            "interaction dimension {} does not match basis ({})",
            interaction.dim(),
            basis.len()
        )));
    }
    if eps.len() != basis.n_sp as usize {
        return Err(QembedError::Dimension(
            "single-particle energies must have length N".into(),
        ));
    }
    Ok(match interaction {
        HermitianMatrix::Real(v) => {
            let mut h = v * lambda;
            for (i, state) in basis.states().iter().enumerate() {
                h[(i, i)] += state.one_body_diagonal(eps);
            }
            HermitianMatrix::Real(h)
        }
        HermitianMatrix::Complex(v) => {
            let mut h = v * Complex64::new(lambda, 0.0);
            for (i, state) in basis.states().iter().enumerate() {
                h[(i, i)] += Complex64::new(state.one_body_diagonal(eps), 0.0);
            }
            HermitianMatrix::Complex(h)
        }
    })
}

/// Full description of one ensemble run.
#[derive(Debug, Clone)]
pub struct EnsembleRunSpec {
    pub system: SystemSpec,
    pub members: usize,
    pub lambda: f64,
    pub base_seed: u64,
    /// Mean-field energies; defaults to eps_i = i + 1/i.
    pub sp_energies: Option<Vec<f64>>,
}

impl EnsembleRunSpec {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.members < 1 {
            return Err(QembedError::Config("member count must be >= 1".into()));
        }
        if self.lambda < 0.0 {
            return Err(QembedError::Config("lambda must be non-negative".into()));
        }
        Ok(())
    }
}

/// Reusable per-run context: bases and embedding plan are built once and
/// shared read-only across workers.
pub struct Ensemble {
    pub run: EnsembleRunSpec,
    pub basis: BasisTable,
    pub kconfigs: BasisTable,
    pub eps: Vec<f64>,
    plan: EmbeddingPlan,
}

impl Ensemble {
    pub fn new(run: EnsembleRunSpec) -> Result<Self> {
        run.validate()?;
        let stats = run.system.kind.statistics();
        let basis = enumerate_basis(run.system.n_sp, run.system.m, stats)?;
        if basis.len() > MAX_DENSE_DIM {
            return Err(QembedError::Dimension(format!(
                "many-body dimension {} exceeds dense limit {MAX_DENSE_DIM}",
                basis.len()
            )));
        }
        let kconfigs = enumerate_k_configs(run.system.n_sp, run.system.k, stats)?;
        let intermediates = enumerate_basis(run.system.n_sp, run.system.m - run.system.k, stats)?;
        let plan = EmbeddingPlan::build(&basis, &kconfigs, &intermediates)?;
        let eps = run
            .sp_energies
            .clone()
            .unwrap_or_else(|| default_sp_energies(run.system.n_sp));
        if eps.len() != run.system.n_sp as usize {
            return Err(QembedError::Config(
                "sp_energies must have length N".into(),
            ));
        }
        Ok(Ensemble {
            run,
            basis,
            kconfigs,
            eps,
            plan,
        })
    }

    /// The embedded pure interaction V(k) for one member.
    pub fn member_interaction(&self, member: u64) -> Result<ManyBodyMatrix> {
        let kmat = sample_kbody(&self.run.system, self.run.base_seed, member)?;
        self.plan.apply(&kmat)
    }

    /// The quench Hamiltonian h(1) + lambda V(k) for one member.
    pub fn member_hamiltonian(&self, member: u64) -> Result<ManyBodyMatrix> {
        let v = self.member_interaction(member)?;
        compose_hamiltonian(&self.basis, &self.eps, &v, self.run.lambda)
    }
}

/// One-shot member pipeline: sample_kbody -> embed -> compose_hamiltonian.
/// Prefer `Ensemble` when drawing many members from the same system.
pub fn generate_member(run: &EnsembleRunSpec, member: u64) -> Result<ManyBodyMatrix> {
    if member >= run.members as u64 {
        return Err(QembedError::Domain(format!(
            "member index {member} out of range ({} members)",
            run.members
        )));
    }
    Ensemble::new(run.clone())?.member_hamiltonian(member)
}

/// Number of single-particle moves separating two states:
/// half the L1 distance between occupation vectors.
pub fn move_distance(a: &OccupationState, b: &OccupationState) -> u32 {
    let l1: u32 = a
        .occupations()
        .iter()
        .zip(b.occupations())
        .map(|(&x, &y)| (x as i32 - y as i32).unsigned_abs())
        .sum();
    l1 / 2
}
