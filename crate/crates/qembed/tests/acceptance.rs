//! Acceptance suite: twelve criteria, each printing one PASS/FAIL line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! as they complete; the heavy Monte-Carlo criteria dominate the runtime.

mod common;

use once_cell::sync::Lazy;
use qembed::config::{ExperimentConfig, Mode, OutputFormat};
use qembed::ensemble::{Ensemble, EnsembleRunSpec};
use qembed::observables::{
    self, standardize, HistogramAccum, HistogramSpec, SpectralResult, WindowSpec,
};
use qembed::qfunc::{self, QValue, WeightSettings};
use qembed::qparam::{self, EnsembleKind, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(criterion: u32, ok: bool, detail: String) {
    println!("ACCEPTANCE {criterion}: {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion}: {detail}");
}

const TABLE1: &[(u32, u32, u32, f64)] = &[
    (12, 6, 1, 0.735),
    (12, 6, 2, 0.287),
    (12, 6, 3, 0.057),
    (12, 6, 4, 0.005),
    (12, 6, 5, 0.000),
    (12, 6, 6, 0.000),
    (20, 8, 1, 0.814),
    (20, 8, 2, 0.417),
    (20, 8, 3, 0.119),
    (20, 8, 4, 0.015),
    (20, 8, 5, 0.001),
    (20, 8, 6, 0.000),
    (50, 10, 1, 0.879),
    (50, 10, 2, 0.567),
    (50, 10, 3, 0.239),
    (50, 10, 4, 0.053),
    (50, 10, 5, 0.003),
    (50, 10, 6, 0.000),
];

const TABLE2: &[(u32, u32, u32, f64)] = &[
    (5, 10, 1, 0.969),
    (5, 10, 2, 0.861),
    (5, 10, 3, 0.664),
    (5, 10, 4, 0.405),
    (5, 10, 5, 0.172),
    (5, 10, 6, 0.045),
    (5, 10, 7, 0.007),
    (5, 10, 8, 0.000),
    (5, 10, 9, 0.000),
    (5, 10, 10, 0.000),
    (10, 20, 1, 0.984),
    (10, 20, 2, 0.932),
    (10, 20, 3, 0.840),
    (10, 20, 4, 0.712),
    (10, 20, 5, 0.556),
    (10, 20, 6, 0.392),
    (10, 20, 7, 0.242),
    (10, 20, 8, 0.127),
    (10, 20, 9, 0.054),
    (10, 20, 10, 0.018),
    (10, 20, 11, 0.005),
    (10, 20, 12, 0.001),
    (10, 20, 13, 0.000),
];

#[test]
fn criterion_01_table1_reproduction() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &(n, m, k, expected) in TABLE1 {
        let qo = qparam::q_fegoe(n, m, k).unwrap();
        let qu = qparam::q_fegue(n, m, k).unwrap();
        worst = worst.max((qo - expected).abs()).max((qu - expected).abs());
    }
    let elapsed = start.elapsed();
    let ok = worst < 1e-3 && elapsed.as_secs_f64() < 1.0;
    report(1, ok, format!("worst deviation {worst:e}, elapsed {elapsed:?}"));
}

#[test]
fn criterion_02_table2_reproduction() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &(n, m, k, expected) in TABLE2 {
        let qb = qparam::q_begue(n, m, k).unwrap();
        worst = worst.max((qb - expected).abs());
    }
    let elapsed = start.elapsed();
    let ok = worst < 1e-3 && elapsed.as_secs_f64() < 1.0;
    report(2, ok, format!("worst deviation {worst:e}, elapsed {elapsed:?}"));
}

#[test]
fn criterion_03_moment_identities() {
    // Closed-form moments against the displayed low-order polynomials.
    let mu4 = |q: f64| 2.0 + q;
    let mu6 = |q: f64| 5.0 + 6.0 * q + 3.0 * q * q + q * q * q;
    let mu8 = |q: f64| {
        14.0 + 28.0 * q + 28.0 * q.powi(2) + 20.0 * q.powi(3) + 10.0 * q.powi(4)
            + 4.0 * q.powi(5)
            + q.powi(6)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_rel = 0.0f64;
    for _ in 0..20 {
        let qv: f64 = rng.gen();
        let q = QValue::new(qv).unwrap();
        for (n, reference) in [(2, mu4(qv)), (3, mu6(qv)), (4, mu8(qv))] {
            let got = qfunc::moment_closed_form(n, q);
            worst_rel = worst_rel.max((got - reference).abs() / reference);
        }
    }
    let polynomial_ok = worst_rel < 1e-12;

    // Quadrature of x^{2n} weight_pdf against the closed form.
    let mut worst_quad = 0.0f64;
    for qv in [0.0, 0.3, 0.7, 0.95] {
        let q = QValue::new(qv).unwrap();
        let settings = WeightSettings::adaptive(q);
        let grid = qfunc::weight_grid(q, &settings);
        for n in [2u32, 3, 4] {
            let got: f64 = grid
                .iter()
                .map(|&(x, w)| {
                    w * x.powi(2 * n as i32) * qfunc::weight_pdf(x, q, &settings).unwrap()
                })
                .sum();
            let reference = qfunc::moment_closed_form(n, q);
            worst_quad = worst_quad.max((got - reference).abs() / reference);
        }
    }
    let quad_ok = worst_quad < 1e-6;
    report(
        3,
        polynomial_ok && quad_ok,
        format!("polynomial rel dev {worst_rel:e}, quadrature rel dev {worst_quad:e}"),
    );
}

#[test]
fn criterion_04_orthogonality() {
    let mut worst = 0.0f64;
    for qv in [0.2, 0.5, 0.8] {
        let q = QValue::new(qv).unwrap();
        let settings = WeightSettings::adaptive(q);
        let grid = qfunc::weight_grid(q, &settings);
        for n in 0..=6u32 {
            for m in 0..=6u32 {
                let integral: f64 = grid
                    .iter()
                    .map(|&(x, w)| {
                        w * qfunc::q_hermite(n, x, q)
                            * qfunc::q_hermite(m, x, q)
                            * qfunc::weight_pdf(x, q, &settings).unwrap()
                    })
                    .sum();
                let scale = (qfunc::q_factorial(n, q) * qfunc::q_factorial(m, q)).sqrt();
                let expected = if n == m { qfunc::q_factorial(n, q) } else { 0.0 };
                worst = worst.max((integral - expected).abs() / scale);
            }
        }
    }
    report(4, worst < 1e-6, format!("worst normalized deviation {worst:e}"));
}

#[test]
fn criterion_05_embedding_oracle() {
    let start = Instant::now();
    common::check_embedding_grid();
    let elapsed = start.elapsed();
    report(5, elapsed.as_secs_f64() < 120.0, format!("elapsed {elapsed:?}"));
}

/// Pooled standardized moment of order 4 over `members` spectra of the
/// pure interaction V(k).
fn pooled_mu4(kind: EnsembleKind, n: u32, m: u32, k: u32, members: usize, seed: u64) -> f64 {
    let ens = Ensemble::new(EnsembleRunSpec {
        system: SystemSpec::new(n, m, k, kind).unwrap(),
        members,
        lambda: 0.0,
        base_seed: seed,
        sp_energies: None,
    })
    .unwrap();
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for i in 0..members as u64 {
        let v = ens.member_interaction(i).unwrap();
        let s = standardize(&observables::diagonalize_values(&v).unwrap()).unwrap();
        sum += s.eigenvalues.iter().map(|e| e.powi(4)).sum::<f64>();
        count += s.eigenvalues.len();
    }
    sum / count as f64
}

#[test]
fn criterion_06_spectral_mu4_convergence() {
    let mu4_fegue = pooled_mu4(EnsembleKind::Fegue, 12, 6, 2, 500, 6001);
    let target = 2.0 + qparam::q_fegue(12, 6, 2).unwrap();
    let dev_fegue = (mu4_fegue - target).abs() / target;

    let mu4_goe = pooled_mu4(EnsembleKind::Fegoe, 12, 6, 6, 500, 6002);
    let dev_goe = (mu4_goe - 2.0).abs() / 2.0;
    report(
        6,
        dev_fegue < 0.02 && dev_goe < 0.02,
        format!("FEGUE mu4 {mu4_fegue} vs {target}; FEGOE(k=m) mu4 {mu4_goe} vs 2.0"),
    );
}

/// Theory probability mass per histogram bin, averaged over 8 points.
fn theory_bin_masses(q: QValue, spec: HistogramSpec, settings: &WeightSettings) -> Vec<f64> {
    let width = (spec.hi - spec.lo) / spec.bins as f64;
    (0..spec.bins)
        .map(|i| {
            let lo = spec.lo + i as f64 * width;
            (0..8)
                .map(|j| {
                    let x = lo + (j as f64 + 0.5) * width / 8.0;
                    qfunc::weight_pdf(x, q, settings).unwrap() * width / 8.0
                })
                .sum()
        })
        .collect()
}

/// Reduced chi-squared between observed and theory bin probability masses,
/// over bins carrying non-negligible theory mass.
fn chi2_masses(observed: &[f64], theory: &[f64]) -> f64 {
    let mut chi2 = 0.0f64;
    let mut used = 0usize;
    for (&p_hat, &p) in observed.iter().zip(theory) {
        if p < 1e-4 {
            continue;
        }
        chi2 += (p_hat - p) * (p_hat - p) / p;
        used += 1;
    }
    chi2 / used as f64
}

fn density_chi2(kind: EnsembleKind, n: u32, m: u32, k: u32, members: usize, seed: u64) -> f64 {
    let system = SystemSpec::new(n, m, k, kind).unwrap();
    let q = QValue::new(qparam::q_for(&system).unwrap()).unwrap();
    let settings = WeightSettings::adaptive(q);
    let ens = Ensemble::new(EnsembleRunSpec {
        system,
        members,
        lambda: 0.0,
        base_seed: seed,
        sp_energies: None,
    })
    .unwrap();
    let spec = HistogramSpec::default();
    let mut accum = HistogramAccum::new(spec);
    for i in 0..members as u64 {
        let v = ens.member_interaction(i).unwrap();
        let s = standardize(&observables::diagonalize_values(&v).unwrap()).unwrap();
        observables::density_accumulate(&s, &mut accum);
    }
    let total = accum.total_weight();
    let observed: Vec<f64> = accum.bin_sums().iter().map(|&s| s / total).collect();
    chi2_masses(&observed, &theory_bin_masses(q, spec, &settings))
}

#[test]
fn criterion_07_density_shape() {
    let mut worst = (0.0f64, String::new());
    for k in 1..=6u32 {
        let chi2 = density_chi2(EnsembleKind::Fegoe, 12, 6, k, 200, 7001);
        if chi2 > worst.0 {
            worst = (chi2, format!("FEGOE(12,6,{k})"));
        }
    }
    for k in 1..=10u32 {
        let chi2 = density_chi2(EnsembleKind::Begue, 5, 10, k, 200, 7002);
        if chi2 > worst.0 {
            worst = (chi2, format!("BEGUE(5,10,{k})"));
        }
    }
    report(7, worst.0 < 2.0, format!("worst chi2/bin {} at {}", worst.0, worst.1));
}

/// Shared FEGOE(1+k) quench runs (N=12, m=6, lambda=0.5, 200 members):
/// LDOS for k = 2..6 and short-time survival for k = 4..6, accumulated in
/// one pass per k.
struct QuenchData {
    ldos_chi2: Vec<(u32, f64)>,
    survival_max_dev: Vec<(u32, f64)>,
}

static QUENCH: Lazy<QuenchData> = Lazy::new(|| {
    let members = 200usize;
    let window = WindowSpec::default(); // center 0, half-width 0.2
    let delta1 = 0.01;
    let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
    let spec = HistogramSpec::default();
    let mut ldos_chi2 = Vec::new();
    let mut survival_max_dev = Vec::new();
    for k in 2..=6u32 {
        let system = SystemSpec::new(12, 6, k, EnsembleKind::Fegoe).unwrap();
        let q = QValue::new(qparam::q_for(&system).unwrap()).unwrap();
        let settings = WeightSettings::adaptive(q);
        let ens = Ensemble::new(EnsembleRunSpec {
            system,
            members,
            lambda: 0.5,
            base_seed: 8000 + k as u64,
            sp_energies: None,
        })
        .unwrap();
        let mut accum = HistogramAccum::new(spec);
        let mut surv_sums = vec![0.0f64; times.len()];
        let mut surv_count = 0usize;
        for i in 0..members as u64 {
            let h = ens.member_hamiltonian(i).unwrap();
            let s = standardize(&observables::diagonalize(&h).unwrap()).unwrap();
            observables::ldos_accumulate(&s, &window, &mut accum).unwrap();
            if k >= 4 {
                let (sums, count) = observables::survival_accumulate(&s, &times, delta1).unwrap();
                for (a, b) in surv_sums.iter_mut().zip(&sums) {
                    *a += b;
                }
                surv_count += count;
            }
        }
        let total = accum.total_weight();
        let observed: Vec<f64> = accum.bin_sums().iter().map(|&s| s / total).collect();
        ldos_chi2.push((k, chi2_masses(&observed, &theory_bin_masses(q, spec, &settings))));
        if k >= 4 {
            let theory = observables::survival_theory(q, &times, &settings).unwrap();
            let max_dev = surv_sums
                .iter()
                .zip(&theory.y)
                .map(|(s, t)| (s / surv_count as f64 - t).abs())
                .fold(0.0f64, f64::max);
            survival_max_dev.push((k, max_dev));
        }
    }
    QuenchData {
        ldos_chi2,
        survival_max_dev,
    }
});

#[test]
fn criterion_08_ldos_shape() {
    let worst = QUENCH
        .ldos_chi2
        .iter()
        .cloned()
        .fold((0u32, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
    report(
        8,
        worst.1 < 2.0,
        format!("worst LDOS chi2/bin {} at k = {}", worst.1, worst.0),
    );
}

/// J_1 via its ascending series; accurate to well below 1e-6 for |x| <= 20.
fn bessel_j1(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half; // j = 0: (x/2) / (0! 1!)
    let mut sum = term;
    for j in 1..60 {
        term *= -half * half / (j as f64 * (j + 1) as f64);
        sum += term;
    }
    sum
}

#[test]
fn criterion_09_survival_theory_limits() {
    let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
    let q1 = QValue::new(1.0).unwrap();
    let f = observables::survival_theory(q1, &times, &WeightSettings::default()).unwrap();
    let gauss_dev = times
        .iter()
        .zip(&f.y)
        .map(|(&t, &v)| (v - (-t * t).exp()).abs())
        .fold(0.0f64, f64::max);

    let times10: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
    let q0 = QValue::new(0.0).unwrap();
    let f = observables::survival_theory(q0, &times10, &WeightSettings::default()).unwrap();
    let semi_dev = times10
        .iter()
        .zip(&f.y)
        .map(|(&t, &v)| {
            let reference = if t == 0.0 { 1.0 } else { (bessel_j1(2.0 * t) / t).powi(2) };
            (v - reference).abs()
        })
        .fold(0.0f64, f64::max);
    report(
        9,
        gauss_dev < 1e-4 && semi_dev < 1e-4,
        format!("Gaussian dev {gauss_dev:e}, semicircle dev {semi_dev:e}"),
    );
}

#[test]
fn criterion_10_survival_short_time() {
    let worst = QUENCH
        .survival_max_dev
        .iter()
        .cloned()
        .fold((0u32, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
    report(
        10,
        worst.1 < 0.05 && QUENCH.survival_max_dev.len() == 3,
        format!("worst |MC - theory| {} at k = {}", worst.1, worst.0),
    );
}

#[test]
fn criterion_11_trivial_dynamics() {
    // lambda = 0: the quench Hamiltonian is the diagonal mean field and
    // every basis state is stationary.
    let ens = Ensemble::new(EnsembleRunSpec {
        system: SystemSpec::new(6, 3, 2, EnsembleKind::Fegoe).unwrap(),
        members: 1,
        lambda: 0.0,
        base_seed: 1,
        sp_energies: None,
    })
    .unwrap();
    let h = ens.member_hamiltonian(0).unwrap();
    let s = standardize(&observables::diagonalize(&h).unwrap()).unwrap();
    let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
    let f = observables::survival_mc(&[s], &times, 10.0).unwrap();
    let stationary_ok = f.y[0] == 1.0 && f.y.iter().all(|&v| (v - 1.0).abs() < 1e-12);

    // Synthetic two-level state with equal overlaps at E = +-1.
    let two_level = SpectralResult {
        eigenvalues: vec![-1.0, 1.0],
        overlaps_sq: Some(ndarray::array![[0.5, 0.5], [0.5, 0.5]]),
        basis_energies: vec![0.0, 0.0],
        centroid: 0.0,
        width: 1.0,
    };
    let f = observables::survival_mc(&[two_level], &times, 0.1).unwrap();
    let cos_ok = f.y[0] == 1.0
        && times
            .iter()
            .zip(&f.y)
            .all(|(&t, &v)| (v - t.cos().powi(2)).abs() < 1e-12);
    report(
        11,
        stationary_ok && cos_ok,
        format!("stationary {stationary_ok}, two-level {cos_ok}"),
    );
}

#[test]
fn criterion_12_determinism() {
    let base = std::env::temp_dir().join(format!("qembed-acc12-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    let mut ok = true;
    let mut detail = String::new();
    for (mode, files) in [
        (Mode::Qtable, vec!["qtable.csv"]),
        (Mode::Density, vec!["density_hist.csv", "density_theory.csv"]),
        (Mode::Survival, vec!["survival_mc.csv", "survival_theory.csv"]),
    ] {
        let mut cfg = ExperimentConfig::default();
        cfg.kind = EnsembleKind::Begoe;
        cfg.n_sp = 4;
        cfg.m = 3;
        cfg.k = 2;
        cfg.members = 3;
        cfg.seed = 12001;
        cfg.delta1 = 0.5;
        cfg.format = OutputFormat::Csv;
        for (run, workers) in [("a", 1), ("b", 2)] {
            cfg.out_dir = base.join(format!("{mode}-{run}"));
            cfg.workers = workers;
            qembed::cli::run(mode, &cfg).unwrap();
        }
        for file in files {
            let a = std::fs::read(base.join(format!("{mode}-a")).join(file)).unwrap();
            let b = std::fs::read(base.join(format!("{mode}-b")).join(file)).unwrap();
            if qembed::output::sha256_hex(&a) != qembed::output::sha256_hex(&b) {
                ok = false;
                detail = format!("{mode}/{file} differs between reruns");
            }
        }
    }
    let _ = std::fs::remove_dir_all(&base);
    report(12, ok, detail);
}
