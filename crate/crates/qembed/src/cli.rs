//! Subcommand implementations shared by the binary and the integration
//! tests. Each command writes its data files plus a manifest and returns
//! the manifest.

use crate::config::{ExperimentConfig, Mode};
use crate::ensemble::{Ensemble, EnsembleRunSpec, ManyBodyMatrix};
use crate::error::{QembedError, Result};
use crate::observables::{
    self, standardize, HistogramAccum, SpectralResult, WindowSpec,
};
use crate::output::{OutputSink, QTableRow, RunManifest};
use crate::qfunc::{QValue, WeightSettings};
use crate::qparam::q_for;
use rayon::prelude::*;
use std::time::Instant;

pub fn run(mode: Mode, cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate(mode)?;
    match mode {
        Mode::Qtable => cmd_qtable(cfg),
        Mode::Density => cmd_density(cfg),
        Mode::Ldos => cmd_ldos(cfg),
        Mode::Survival => cmd_survival(cfg),
    }
}

/// Map each member index through `f` on the worker pool. Results come back
/// in member order, so later reduction is independent of scheduling.
fn map_members<T: Send>(
    cfg: &ExperimentConfig,
    f: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        builder = builder.num_threads(cfg.workers);
    }
    let pool = builder
        .build()
        .map_err(|e| QembedError::Config(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..cfg.members as u64)
            .into_par_iter()
            .map(|i| f(i))
            .collect()
    })
}

fn manifest_base(mode: Mode, cfg: &ExperimentConfig, started: Instant) -> RunManifest {
    RunManifest {
        command: mode.to_string(),
        config: cfg.clone(),
        q: None,
        dimension: None,
        qualifying_counts: None,
        wall_time_sec: started.elapsed().as_secs_f64(),
        files: Default::default(),
    }
}

fn cmd_qtable(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let started = Instant::now();
    let mut sink = OutputSink::new(&cfg.out_dir, cfg.format)?;
    let mut rows = Vec::new();
    for &kind in &cfg.qtable.kinds {
        for &(n, m) in &cfg.qtable.systems {
            for k in 1..=m {
                let spec = match crate::qparam::SystemSpec::new(n, m, k, kind) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("qtable: skipping {kind} N={n} m={m} k={k}: {e}");
                        continue;
                    }
                };
                match q_for(&spec) {
                    Ok(q) => rows.push(QTableRow {
                        kind: kind.to_string(),
                        n_sp: n,
                        m,
                        k,
                        q,
                    }),
                    Err(e) => eprintln!("qtable: skipping {kind} N={n} m={m} k={k}: {e}"),
                }
            }
        }
    }
    sink.qtable("qtable", &rows)?;
    let manifest = sink.manifest(&manifest_base(Mode::Qtable, cfg, started))?;
    Ok(manifest)
}

struct SystemContext {
    ensemble: Ensemble,
    q: QValue,
    settings: WeightSettings,
}

fn system_context(cfg: &ExperimentConfig) -> Result<SystemContext> {
    let system = cfg.system()?;
    let q = QValue::new(q_for(&system)?)?;
    let ensemble = Ensemble::new(EnsembleRunSpec {
        system,
        members: cfg.members,
        lambda: cfg.lambda,
        base_seed: cfg.seed,
        sp_energies: None,
    })?;
    Ok(SystemContext {
        ensemble,
        q,
        settings: WeightSettings::adaptive(q),
    })
}

fn member_spectrum(
    ctx: &SystemContext,
    member: u64,
    mean_field: bool,
    vectors: bool,
) -> Result<SpectralResult> {
    let matrix: ManyBodyMatrix = if mean_field {
        ctx.ensemble.member_hamiltonian(member)?
    } else {
        ctx.ensemble.member_interaction(member)?
    };
    let r = if vectors {
        observables::diagonalize(&matrix)?
    } else {
        observables::diagonalize_values(&matrix)?
    };
    standardize(&r)
}

fn cmd_density(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let started = Instant::now();
    let ctx = system_context(cfg)?;
    let spec = cfg.histogram_spec();
    let partials = map_members(cfg, |i| {
        let s = member_spectrum(&ctx, i, cfg.include_mean_field, false)?;
        let mut accum = HistogramAccum::new(spec);
        observables::density_accumulate(&s, &mut accum);
        Ok(accum)
    })?;
    let mut accum = HistogramAccum::new(spec);
    for p in &partials {
        accum.merge(p);
    }
    let hist = accum.finalize("spectral density")?;
    let theory =
        observables::theory_density(&cfg.theory_grid(), ctx.q, 0.0, 1.0, &ctx.settings)?;

    let mut sink = OutputSink::new(&cfg.out_dir, cfg.format)?;
    sink.histogram("density_hist", &hist, "energy")?;
    sink.curve("density_theory", &theory, "energy,density")?;
    let mut manifest = manifest_base(Mode::Density, cfg, started);
    manifest.q = Some(ctx.q.get());
    manifest.dimension = Some(ctx.ensemble.run.system.dimension());
    let manifest = sink.manifest(&manifest)?;
    Ok(manifest)
}

fn cmd_ldos(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let started = Instant::now();
    let ctx = system_context(cfg)?;
    let spec = cfg.histogram_spec();
    let window = WindowSpec {
        center: 0.0,
        half_width: cfg.delta,
    };
    let partials = map_members(cfg, |i| {
        let s = member_spectrum(&ctx, i, true, true)?;
        let mut accum = HistogramAccum::new(spec);
        let qualifying = observables::ldos_accumulate(&s, &window, &mut accum)?;
        if qualifying == 0 {
            return Err(QembedError::Numerical(format!(
                "no basis state inside the LDOS window for member {i}; enlarge delta"
            )));
        }
        Ok(accum)
    })?;
    let mut accum = HistogramAccum::new(spec);
    for p in &partials {
        accum.merge(p);
    }
    let hist = accum.finalize("LDOS")?;
    let theory =
        observables::theory_density(&cfg.theory_grid(), ctx.q, 0.0, 1.0, &ctx.settings)?;

    let mut sink = OutputSink::new(&cfg.out_dir, cfg.format)?;
    sink.histogram("ldos_hist", &hist, "energy")?;
    sink.curve("ldos_theory", &theory, "energy,density")?;
    let mut manifest = manifest_base(Mode::Ldos, cfg, started);
    manifest.q = Some(ctx.q.get());
    manifest.dimension = Some(ctx.ensemble.run.system.dimension());
    let manifest = sink.manifest(&manifest)?;
    Ok(manifest)
}

fn cmd_survival(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let started = Instant::now();
    let ctx = system_context(cfg)?;
    let times = cfg.time_grid();
    let partials = map_members(cfg, |i| {
        let s = member_spectrum(&ctx, i, true, true)?;
        observables::survival_accumulate(&s, &times, cfg.delta1)
    })?;
    let mut sums = vec![0.0f64; times.len()];
    let mut counts = Vec::with_capacity(partials.len());
    for (s, c) in &partials {
        for (a, b) in sums.iter_mut().zip(s) {
            *a += b;
        }
        counts.push(*c);
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(QembedError::Numerical(format!(
            "no basis state with |e_b| <= {} in any member; enlarge delta1",
            cfg.delta1
        )));
    }
    let mc = observables::Curve {
        x: times.clone(),
        y: sums.iter().map(|s| s / total as f64).collect(),
        label: "survival MC".into(),
        q: None,
    };
    let theory = observables::survival_theory(ctx.q, &times, &ctx.settings)?;

    let mut sink = OutputSink::new(&cfg.out_dir, cfg.format)?;
    sink.curve("survival_mc", &mc, "t,F")?;
    sink.curve("survival_theory", &theory, "t,F")?;
    let mut manifest = manifest_base(Mode::Survival, cfg, started);
    manifest.q = Some(ctx.q.get());
    manifest.dimension = Some(ctx.ensemble.run.system.dimension());
    manifest.qualifying_counts = Some(counts);
    let manifest = sink.manifest(&manifest)?;
    Ok(manifest)
}
