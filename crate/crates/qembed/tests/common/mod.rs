//! Shared helpers for integration tests: a brute-force operator-product
//! oracle for the k-body embedding.

use ndarray::Array2;
use num_complex::Complex64;
use qembed::ensemble::{embed, sample_kbody, HermitianMatrix};
use qembed::fock::{enumerate_basis, enumerate_k_configs, BasisTable, OccupationState, Statistics};
use qembed::qparam::{EnsembleKind, SystemSpec};

/// Matrix of a single creation operator a^dag_mu from the `from` sector to
/// the `to` sector, with conventions written out independently of the
/// library: fermion sign (-1)^(number of occupied orbitals below mu),
/// boson amplitude sqrt(nu_mu + 1).
fn creation_matrix(mu: u32, from: &BasisTable, to: &BasisTable) -> Array2<f64> {
    let mut a = Array2::zeros((to.len(), from.len()));
    let i = (mu - 1) as usize;
    for (j, s) in from.states().iter().enumerate() {
        let mut occ = s.occupations().to_vec();
        match from.statistics {
            Statistics::Fermion => {
                if occ[i] == 1 {
                    continue;
                }
                let below: u32 = occ[..i].iter().map(|&x| x as u32).sum();
                occ[i] = 1;
                let t = to.rank(&OccupationState::new(occ)).unwrap();
                a[(t, j)] = if below % 2 == 0 { 1.0 } else { -1.0 };
            }
            Statistics::Boson => {
                let nu = occ[i] as f64;
                occ[i] += 1;
                let t = to.rank(&OccupationState::new(occ)).unwrap();
                a[(t, j)] = (nu + 1.0).sqrt();
            }
        }
    }
    a
}

fn factorial(n: u8) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// Normalized creation-string matrix N_alpha a^dag_{mu_1} ... a^dag_{mu_k}
/// mapping the (m-k)-particle sector to the m-particle sector; the
/// rightmost (largest-orbital) operator acts first.
fn creation_string_matrix(
    config: &OccupationState,
    sectors: &[BasisTable],
    m: usize,
    k: usize,
) -> Array2<f64> {
    let orbitals = config.orbital_string();
    let norm = 1.0
        / config
            .occupations()
            .iter()
            .map(|&nu| factorial(nu))
            .product::<f64>()
            .sqrt();
    let mut acc: Option<Array2<f64>> = None;
    // orbitals are ascending; applying right-to-left walks sectors upward.
    for (step, &mu) in orbitals.iter().rev().enumerate() {
        let from = &sectors[m - k + step];
        let to = &sectors[m - k + step + 1];
        let c = creation_matrix(mu, from, to);
        acc = Some(match acc {
            None => c,
            Some(prev) => c.dot(&prev),
        });
    }
    acc.unwrap() * norm
}

/// Assert that `embed` matches the explicit operator-product construction
/// entrywise to 1e-12 (relative to the largest matrix element).
pub fn check_embedding_case(n: u32, m: u32, k: u32, kind: EnsembleKind) {
    let stats = kind.statistics();
    let spec = SystemSpec::new(n, m, k, kind).unwrap();
    let basis = enumerate_basis(n, m, stats).unwrap();
    let kconfigs = enumerate_k_configs(n, k, stats).unwrap();
    let kmat = sample_kbody(&spec, 1234, 0).unwrap();
    let embedded = embed(&kmat, &basis, &kconfigs).unwrap();

    let sectors: Vec<BasisTable> = (0..=m)
        .map(|p| enumerate_basis(n, p, stats).unwrap())
        .collect();
    let strings: Vec<Array2<f64>> = kconfigs
        .states()
        .iter()
        .map(|c| creation_string_matrix(c, &sectors, m as usize, k as usize))
        .collect();

    let d = basis.len();
    let label = format!("{kind} N={n} m={m} k={k}");
    match (&kmat, &embedded) {
        (HermitianMatrix::Real(v), HermitianMatrix::Real(got)) => {
            let mut want = Array2::<f64>::zeros((d, d));
            for (a, pa) in strings.iter().enumerate() {
                for (g, pg) in strings.iter().enumerate() {
                    want = want + &(pa.dot(&pg.t()) * v[(a, g)]);
                }
            }
            let scale = v.iter().fold(1.0f64, |mx, x| mx.max(x.abs()));
            for i in 0..d {
                for j in 0..d {
                    assert!(
                        (got[(i, j)] - want[(i, j)]).abs() <= 1e-12 * scale,
                        "{label}: entry ({i},{j}) = {} vs oracle {}",
                        got[(i, j)],
                        want[(i, j)]
                    );
                }
            }
        }
        (HermitianMatrix::Complex(v), HermitianMatrix::Complex(got)) => {
            let mut want = Array2::<Complex64>::zeros((d, d));
            for (a, pa) in strings.iter().enumerate() {
                for (g, pg) in strings.iter().enumerate() {
                    let outer = pa.dot(&pg.t());
                    for i in 0..d {
                        for j in 0..d {
                            want[(i, j)] += v[(a, g)] * outer[(i, j)];
                        }
                    }
                }
            }
            let scale = v.iter().fold(1.0f64, |mx, x| mx.max(x.norm()));
            for i in 0..d {
                for j in 0..d {
                    assert!(
                        (got[(i, j)] - want[(i, j)]).norm() <= 1e-12 * scale,
                        "{label}: entry ({i},{j}) = {} vs oracle {}",
                        got[(i, j)],
                        want[(i, j)]
                    );
                }
            }
        }
        _ => panic!("{label}: scalar kind mismatch"),
    }
}

/// Every (N <= 5, m <= 4, k <= m) x statistics x beta combination.
pub fn check_embedding_grid() {
    for n in 1..=5u32 {
        for m in 1..=4u32 {
            for k in 1..=m {
                for kind in [
                    EnsembleKind::Fegoe,
                    EnsembleKind::Fegue,
                    EnsembleKind::Begoe,
                    EnsembleKind::Begue,
                ] {
                    if kind.statistics() == Statistics::Fermion && m > n {
                        continue;
                    }
                    check_embedding_case(n, m, k, kind);
                }
            }
        }
    }
}
