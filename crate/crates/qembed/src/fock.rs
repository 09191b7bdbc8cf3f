//! Occupation-number bases and creation/annihilation operator strings for
//! fermions and bosons.
//!
//! Basis order is canonical and frozen: lexicographic on the occupation
//! vector read from orbital 1 upward. Fermion states are defined as
//! creation operators applied in increasing orbital order to the vacuum;
//! annihilation signs follow from anticommuting past occupied lower
//! orbitals.

use crate::error::{QembedError, Result};
use crate::qparam::binom;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Fermion,
    Boson,
}

/// Hilbert-space dimension: C(N,m) for fermions, C(N+m-1,m) for bosons.
pub fn space_dimension(n_sp: u32, m: u32, statistics: Statistics) -> u64 {
    let d = match statistics {
        Statistics::Fermion => binom(n_sp as i64, m as i64),
        Statistics::Boson => binom(n_sp as i64 + m as i64 - 1, m as i64),
    };
    d.to_u64().expect("dimension overflows u64")
}

/// A many-particle basis vector as occupation numbers over N orbitals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OccupationState {
    occ: Vec<u8>,
}

impl OccupationState {
    pub fn new(occ: Vec<u8>) -> Self {
        OccupationState { occ }
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occ
    }

    pub fn n_orbitals(&self) -> usize {
        self.occ.len()
    }

    pub fn particle_count(&self) -> u32 {
        self.occ.iter().map(|&n| n as u32).sum()
    }

    /// Sum of eps_i over occupied orbitals (with multiplicity).
    pub fn one_body_diagonal(&self, eps: &[f64]) -> f64 {
        assert_eq!(eps.len(), self.occ.len());
        self.occ
            .iter()
            .zip(eps)
            .map(|(&n, &e)| n as f64 * e)
            .sum()
    }

    /// Orbital indices (1-based) with multiplicity, non-decreasing.
    pub fn orbital_string(&self) -> Vec<u32> {
        let mut orbitals = Vec::with_capacity(self.particle_count() as usize);
        for (i, &n) in self.occ.iter().enumerate() {
            for _ in 0..n {
                orbitals.push(i as u32 + 1);
            }
        }
        orbitals
    }
}

/// Complete ordered basis for (N, m, statistics) with state <-> rank maps.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub n_sp: u32,
    pub particles: u32,
    pub statistics: Statistics,
    states: Vec<OccupationState>,
    index: HashMap<Vec<u8>, usize>,
}

impl BasisTable {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, rank: usize) -> &OccupationState {
        &self.states[rank]
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn rank(&self, state: &OccupationState) -> Option<usize> {
        self.index.get(state.occupations()).copied()
    }
}

/// Enumerate all m-particle occupation vectors over N orbitals in
/// lexicographic order.
pub fn enumerate_basis(n_sp: u32, m: u32, statistics: Statistics) -> Result<BasisTable> {
    if statistics == Statistics::Fermion && m > n_sp {
        return Err(QembedError::Domain(format!(
            "fermion basis requires m <= N, got m = {m}, N = {n_sp}"
        )));
    }
    let cap = match statistics {
        Statistics::Fermion => 1u8,
        Statistics::Boson => m.min(255) as u8,
    };
    let mut states = Vec::new();
    let mut occ = vec![0u8; n_sp as usize];
    fill(&mut states, &mut occ, 0, m, cap);
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.occupations().to_vec(), i))
        .collect();
    Ok(BasisTable {
        n_sp,
        particles: m,
        statistics,
        states,
        index,
    })
}

fn fill(states: &mut Vec<OccupationState>, occ: &mut Vec<u8>, orbital: usize, left: u32, cap: u8) {
    if orbital == occ.len() {
        if left == 0 {
            states.push(OccupationState::new(occ.clone()));
        }
        return;
    }
    let remaining_capacity = (occ.len() - orbital - 1) as u32 * cap as u32;
    for n in 0..=(cap as u32).min(left) {
        if left - n > remaining_capacity {
            continue;
        }
        occ[orbital] = n as u8;
        fill(states, occ, orbital + 1, left - n, cap);
    }
    occ[orbital] = 0;
}

/// k-particle configuration table, same canonical order as the state basis.
pub fn enumerate_k_configs(n_sp: u32, k: u32, statistics: Statistics) -> Result<BasisTable> {
    if k < 1 {
        return Err(QembedError::Domain("k must be >= 1".into()));
    }
    enumerate_basis(n_sp, k, statistics)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorMode {
    Creation,
    Annihilation,
}

/// A normal-ordered string of k creation or annihilation operators,
/// orbital indices non-decreasing (strictly increasing for fermions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorString {
    pub orbitals: Vec<u32>,
    pub mode: OperatorMode,
    pub statistics: Statistics,
}

impl OperatorString {
    pub fn from_config(config: &OccupationState, mode: OperatorMode, statistics: Statistics) -> Self {
        OperatorString {
            orbitals: config.orbital_string(),
            mode,
            statistics,
        }
    }

    /// Bosonic unit-normalization factor 1/sqrt(prod_i nu_i!) over orbital
    /// multiplicities nu_i; 1 for fermions.
    pub fn normalization(&self) -> f64 {
        match self.statistics {
            Statistics::Fermion => 1.0,
            Statistics::Boson => {
                let mut prod = 1.0;
                let mut run = 1u32;
                for w in self.orbitals.windows(2) {
                    if w[0] == w[1] {
                        run += 1;
                    } else {
                        run = 1;
                    }
                    if run > 1 {
                        prod *= run as f64;
                    }
                }
                // prod accumulated nu! incrementally: multiply run at each repeat.
                1.0 / prod.sqrt()
            }
        }
    }
}

/// Outcome of applying an operator string: the reached state and the real
/// amplitude (fermionic sign, or bosonic normalization factor).
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTransition {
    pub target: OccupationState,
    pub amplitude: f64,
}

fn fermion_sign(occ: &[u8], orbital_index: usize) -> f64 {
    let crossings: u32 = occ[..orbital_index].iter().map(|&n| n as u32).sum();
    if crossings % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Apply psi(k; gamma) = [N_gamma] a_{mu_k} ... a_{mu_1}, lowest orbital
/// acting first, which is the exact adjoint of `apply_creation` and keeps
/// the amplitude of <b'|psi^dag(alpha)|b> equal to that of <b|psi(alpha)|b'>.
/// Returns None when a required orbital lacks occupation.
pub fn apply_annihilation(
    state: &OccupationState,
    string: &OperatorString,
) -> Option<AmplitudeTransition> {
    debug_assert_eq!(string.mode, OperatorMode::Annihilation);
    let mut occ = state.occupations().to_vec();
    let mut amp = string.normalization();
    for &mu in string.orbitals.iter() {
        let i = (mu - 1) as usize;
        if occ[i] == 0 {
            return None;
        }
        match string.statistics {
            Statistics::Fermion => amp *= fermion_sign(&occ, i),
            Statistics::Boson => amp *= (occ[i] as f64).sqrt(),
        }
        occ[i] -= 1;
    }
    Some(AmplitudeTransition {
        target: OccupationState::new(occ),
        amplitude: amp,
    })
}

/// Apply psi^dagger(k; alpha) = [N_alpha] a^dag_{mu_1} ... a^dag_{mu_k};
/// rightmost factor acts first. None on Pauli blocking.
pub fn apply_creation(
    state: &OccupationState,
    string: &OperatorString,
) -> Option<AmplitudeTransition> {
    debug_assert_eq!(string.mode, OperatorMode::Creation);
    let mut occ = state.occupations().to_vec();
    let mut amp = string.normalization();
    for &mu in string.orbitals.iter().rev() {
        let i = (mu - 1) as usize;
        match string.statistics {
            Statistics::Fermion => {
                if occ[i] != 0 {
                    return None;
                }
                amp *= fermion_sign(&occ, i);
            }
            Statistics::Boson => amp *= (occ[i] as f64 + 1.0).sqrt(),
        }
        occ[i] += 1;
    }
    Some(AmplitudeTransition {
        target: OccupationState::new(occ),
        amplitude: amp,
    })
}

/// Default mean-field single-particle energies eps_i = i + 1/i.
pub fn default_sp_energies(n_sp: u32) -> Vec<f64> {
    (1..=n_sp).map(|i| i as f64 + 1.0 / i as f64).collect()
}
