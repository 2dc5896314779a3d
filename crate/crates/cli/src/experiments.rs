//! Experiment recipes, one per [`Kind`].

use std::time::Instant;

use ergostab_core::dynamics::with_workers;
use ergostab_core::ergodic::{
    autocorrelation, bifurcation_scan, lyapunov_1d, mixing_rate_fit, time_average, AutocorrSeries,
    ScanSettings,
};
use ergostab_core::io;
use ergostab_core::landscapes::{
    make_dataset, LinearizedModel, QuadraticMapLoss, SyntheticDataset, Teacher, ToyNet,
};
use ergostab_core::markov::{
    koopman_spectrum_linear, spectral_gap, tv_convergence_curve, ulam_transition, LossPartition,
};
use ergostab_core::nalgebra::DVector;
use ergostab_core::stability::{
    empirical_risks, loss_statistics, sas_lower_bound, stochastic_perturbation, theorem1_bound,
    theorem2_bound, weyl_stability_bound, PerturbedPair, SasProtocol, StabilityReport,
    ORDER_BOUND_LABEL,
};
use ergostab_core::{
    run_ensemble, run_orbit, Landscape, Observable, OptimizerConfig, RngStream, Sample, Schedule,
    WeightDomain, WeightVector,
};
use serde_json::json;

use crate::config::*;
use crate::output::{num, Emitter, RunSummary};
use crate::RunError;

const TEACHER_TAG: u64 = 0x7EA;
const HELDOUT_TAG: u64 = 0x7E57;
const INIT_TAG: u64 = 0x1417;
const PAIR_TAG: u64 = 0x9A1;
const NTK_TAG: u64 = 0x47C;

type Outcome = Result<serde_json::Value, RunError>;

/// Runs the configured experiment, writes its artifacts and the summary.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let workers = config.resolved_workers();
    let mut out = Emitter::new(&config.out_dir)?;
    let seed = config.master_seed;
    let results = with_workers(workers, || -> Outcome {
        match &config.params {
            Params::Bifurcate(p) => bifurcate(p, seed, &mut out),
            Params::Lyapunov(p) => lyapunov(p, &mut out),
            Params::Orbit(p) => orbit(p, seed, &mut out),
            Params::Autocorr(p) => autocorr(p, seed, &mut out),
            Params::Sas(p) => sas(p, seed, &mut out),
            Params::Ulam(p) => ulam(p, seed, &mut out),
            Params::Ntk(p) => ntk(p, seed, &mut out),
            Params::Bound(p) => bound(p, &mut out),
            Params::CorruptSweep(p) => corrupt_sweep(p, seed, &mut out),
        }
    })?;
    out.finish(RunSummary {
        config: config.clone(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        workers,
        duration_secs: start.elapsed().as_secs_f64(),
        outputs: Vec::new(),
        results,
    })
}

fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, RunError> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(RunError::Config(format!("bad grid [{lo}, {hi}] step {step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    // snap to 12 decimals so grid points print as typed
    Ok((0..=count).map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12).collect())
}

fn bifurcate(p: &BifurcateParams, seed: u64, out: &mut Emitter) -> Outcome {
    let loss = QuadraticMapLoss::new(p.s)?;
    let etas = grid(p.eta_min, p.eta_max, p.eta_step)?;
    let settings = ScanSettings {
        n_inits: p.n_inits,
        runup: p.runup,
        keep_k: p.keep_k,
        tol: p.tol,
        divergence_radius: p.divergence_radius,
        domain: match p.domain {
            DomainChoice::Periodic => WeightDomain::unit_interval(),
            DomainChoice::Unbounded => WeightDomain::Unbounded,
        },
    };
    let scan = bifurcation_scan(&loss, &etas, &settings, seed)?;
    out.csv("bifurcation.csv", |w| io::write_bifurcation_csv(&scan, w))?;
    let rows: Vec<Vec<String>> = etas
        .iter()
        .enumerate()
        .map(|(i, eta)| {
            vec![
                num(*eta),
                scan.period_at(i).map(|q| q.to_string()).unwrap_or_default(),
                scan.diverged_count(i).to_string(),
            ]
        })
        .collect();
    out.table("periods.csv", &["eta", "period", "diverged"], &rows)?;
    let sharp = loss.sharpness(0.5);
    let total_diverged: usize = (0..etas.len()).map(|i| scan.diverged_count(i)).sum();
    if total_diverged * 2 > scan.cells.len() {
        return Err(RunError::Divergence(format!(
            "{total_diverged} of {} orbits diverged",
            scan.cells.len()
        )));
    }
    Ok(json!({
        "sharpness_at_half": sharp,
        "threshold_eta": 2.0 / sharp,
        "diverged_orbits": total_diverged,
    }))
}

fn lyapunov(p: &LyapunovParams, out: &mut Emitter) -> Outcome {
    let loss = QuadraticMapLoss::new(p.s)?;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    match p.map {
        LyapunovMap::Raw => {
            let est = lyapunov_1d(|w| loss.g_prime(w), p.w0, |w| loss.g(w), p.steps, p.runup, false)?;
            rows.push(vec![String::new(), num(est.value), est.floor_hits.to_string()]);
            values.push(est.value);
        }
        LyapunovMap::Gd => {
            let wrap = WeightDomain::unit_interval();
            for eta in grid(p.eta_min, p.eta_max, p.eta_step)? {
                let est = lyapunov_1d(
                    |w| loss.gd_map_derivative(eta, w),
                    p.w0,
                    |w| wrap.wrap(loss.gd_map(eta, w)),
                    p.steps,
                    p.runup,
                    false,
                )?;
                rows.push(vec![num(eta), num(est.value), est.floor_hits.to_string()]);
                values.push(est.value);
            }
        }
    }
    out.table("lyapunov.csv", &["eta", "lambda", "floor_hits"], &rows)?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(json!({ "max_lyapunov": if max.is_finite() { json!(max) } else { json!(null) } }))
}

/// The toy-network task shared by the SGD experiments.
struct Task {
    dataset: SyntheticDataset,
    heldout: Vec<Sample>,
    net: ToyNet,
    config: OptimizerConfig,
}

fn task(ds: &DatasetParams, net: &NetParams, opt: &OptimParams, seed: u64) -> Result<Task, RunError> {
    let teacher = Teacher::random(ds.teacher, ds.d, RngStream::derived(seed, &[TEACHER_TAG]).next_seed());
    let dataset = make_dataset(ds.n, ds.d, ds.p, teacher, seed)?;
    let heldout = dataset.fresh_samples(ds.test_size, &mut RngStream::derived(seed, &[HELDOUT_TAG]));
    let config = opt.to_config(ds.n);
    config.validate(ds.n)?;
    Ok(Task {
        dataset,
        heldout,
        net: ToyNet::new(ds.d, net.hidden, net.activation, net.loss),
        config,
    })
}

fn inits(landscape: &impl Landscape, seed: u64, count: usize) -> Vec<WeightVector> {
    (0..count)
        .map(|i| {
            let mut rng = RngStream::derived(seed, &[INIT_TAG, i as u64]);
            WeightVector(landscape.initial_weights(&mut rng))
        })
        .collect()
}

fn series_table(record: &ergostab_core::OrbitRecord, runup: usize) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["step".to_string()];
    header.extend(record.observable_series.keys().cloned());
    let rows = (0..record.recorded())
        .map(|t| {
            let mut row = vec![(runup + t + 1).to_string()];
            row.extend(record.observable_series.values().map(|s| num(s[t])));
            row
        })
        .collect();
    (header, rows)
}

fn orbit(p: &OrbitParams, seed: u64, out: &mut Emitter) -> Outcome {
    let t = task(&p.dataset, &p.net, &p.optimizer, seed)?;
    let mut observables = vec![
        Observable::TrainLoss,
        Observable::MeanLoss {
            name: "test_loss".into(),
            samples: t.heldout.clone(),
        },
    ];
    if t.dataset.teacher.is_binary() {
        observables.push(Observable::MeanError {
            name: "train_error".into(),
            samples: t.dataset.samples.clone(),
        });
        observables.push(Observable::MeanError {
            name: "test_error".into(),
            samples: t.heldout.clone(),
        });
    }
    let w0 = &inits(&t.net, seed, 1)[0];
    let schedule = Schedule::new(p.runup, p.length).with_stride(p.stride);
    let rec = run_orbit(w0, &t.net, &t.dataset.samples, &t.config, &schedule, &observables, &mut RngStream::new(seed, 0))?;
    out.write("dataset.json", io::dataset_to_json(&t.dataset)?.into_bytes())?;
    let (header, rows) = series_table(&rec, p.runup);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.table("orbit.csv", &header, &rows)?;
    if p.stride > 0 {
        let rows: Vec<Vec<String>> = rec
            .weight_snapshots
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let mut r = vec![(p.runup + (i + 1) * p.stride).to_string()];
                r.extend(w.iter().map(|v| num(*v)));
                r
            })
            .collect();
        let names: Vec<String> = std::iter::once("step".to_string())
            .chain((0..t.net.num_weights()).map(|i| format!("w{i}")))
            .collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        out.table("weights.csv", &names, &rows)?;
    }
    if let Some(step) = rec.diverged_at {
        return Err(RunError::Divergence(format!("orbit diverged at step {step}")));
    }
    let mut averages = serde_json::Map::new();
    for (name, s) in &rec.observable_series {
        if !s.is_empty() {
            averages.insert(name.clone(), json!(time_average(s, 0)?.value));
        }
    }
    Ok(json!({ "time_averages": averages }))
}

fn test_loss_observable(heldout: &[Sample]) -> Observable {
    Observable::MeanLoss {
        name: "test_loss".into(),
        samples: heldout.to_vec(),
    }
}

/// Per-init autocorrelation of the test loss and their lag-wise mean.
fn test_loss_autocorr(
    records: &[ergostab_core::OrbitRecord],
    tau_max: usize,
) -> Result<(Vec<AutocorrSeries>, AutocorrSeries), RunError> {
    let mut per = Vec::new();
    for r in records {
        let s = r.series("test_loss").unwrap_or(&[]);
        per.push(autocorrelation(s, 0, tau_max)?);
    }
    let k = per.len() as f64;
    let mean = AutocorrSeries {
        values: (0..=tau_max)
            .map(|t| per.iter().map(|a| a.values[t]).sum::<f64>() / k)
            .collect(),
        mean: per.iter().map(|a| a.mean).sum::<f64>() / k,
        guard: per.iter().any(|a| a.guard),
        runup: 0,
        window: per[0].window,
    };
    Ok((per, mean))
}

fn diverged_error(records: &[ergostab_core::OrbitRecord]) -> Result<(), RunError> {
    let bad = records.iter().filter(|r| r.diverged()).count();
    if bad > 0 {
        return Err(RunError::Divergence(format!("{bad} of {} orbits diverged", records.len())));
    }
    Ok(())
}

fn autocorr(p: &AutocorrParams, seed: u64, out: &mut Emitter) -> Outcome {
    if p.n_inits == 0 {
        return Err(RunError::Config("n_inits must be at least 1".into()));
    }
    let t = task(&p.dataset, &p.net, &p.optimizer, seed)?;
    let schedule = Schedule::new(p.runup, p.length);
    let records = run_ensemble(
        &inits(&t.net, seed, p.n_inits),
        &t.net,
        &t.dataset.samples,
        &t.config,
        &schedule,
        &[test_loss_observable(&t.heldout)],
        seed,
        0,
    )?;
    diverged_error(&records)?;
    let (per, mean) = test_loss_autocorr(&records, p.tau_max)?;
    out.csv("autocorr.csv", |w| io::write_autocorr_csv(&mean, w))?;
    let rows: Vec<Vec<String>> = per
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            a.values
                .iter()
                .enumerate()
                .map(move |(lag, c)| vec![i.to_string(), lag.to_string(), num(*c), a.guard.to_string()])
        })
        .collect();
    out.table("autocorr_inits.csv", &["init_id", "lag", "C", "guard_flag"], &rows)?;
    let fit = mixing_rate_fit(&mean.values, 1..p.tau_max + 1).ok();
    let spread: Vec<f64> = per.iter().map(|a| a.mean_over(1, p.tau_max)).collect();
    Ok(json!({
        "mean_C": mean.mean_over(1, p.tau_max),
        "per_init_mean_C": spread,
        "decay_fit": fit,
    }))
}

fn pairs_for(dataset: &SyntheticDataset, count: usize, seed: u64) -> Result<Vec<PerturbedPair>, RunError> {
    (0..count)
        .map(|j| {
            let k = (j * dataset.n / count.max(1)) % dataset.n;
            let mut rng = RngStream::derived(seed, &[PAIR_TAG, j as u64]);
            Ok(stochastic_perturbation(dataset, k, &mut rng)?)
        })
        .collect()
}

fn check_pairs(report: &StabilityReport) -> Result<(), RunError> {
    if report.diverged_pairs() * 2 > report.pairs {
        return Err(RunError::Divergence(format!(
            "{} of {} pairs diverged",
            report.diverged_pairs(),
            report.pairs
        )));
    }
    Ok(())
}

fn probes(t: &Task, count: usize) -> Result<Vec<Sample>, RunError> {
    if count == 0 || count > t.heldout.len() {
        return Err(RunError::Config(format!(
            "probes must lie in 1..={} (the held-out size)",
            t.heldout.len()
        )));
    }
    Ok(t.heldout[..count].to_vec())
}

fn sas(p: &SasParams, seed: u64, out: &mut Emitter) -> Outcome {
    let t = task(&p.dataset, &p.net, &p.optimizer, seed)?;
    let pairs = pairs_for(&t.dataset, p.pairs, seed)?;
    let protocol = SasProtocol {
        runup: p.runup,
        window: p.window,
        inits_per_side: p.inits_per_side,
        statistic: p.statistic,
    };
    let probes = probes(&t, p.probes)?;
    let report = sas_lower_bound(&t.net, &pairs, &probes, &t.config, &protocol, seed, 0)?;
    out.json("stability.json", &report)?;
    out.csv("stability.csv", |w| io::write_stability_csv(&report, w))?;
    check_pairs(&report)?;
    Ok(json!({
        "beta_hat": report.beta_hat,
        "valid_pairs": report.valid_pairs,
        "statistic": p.statistic,
        "note": "beta_hat is a lower bound on the stability coefficient",
    }))
}

fn ulam(p: &UlamParams, seed: u64, out: &mut Emitter) -> Outcome {
    let t = task(&p.dataset, &p.net, &p.optimizer, seed)?;
    let probes = probes(&t, p.probes)?;
    let observables = [
        test_loss_observable(&t.heldout),
        Observable::PerSampleLoss {
            prefix: "probe".into(),
            samples: probes.clone(),
        },
    ];
    let w0 = &inits(&t.net, seed, 1)[0];
    let rec = run_orbit(
        w0,
        &t.net,
        &t.dataset.samples,
        &t.config,
        &Schedule::new(p.runup, p.length),
        &observables,
        &mut RngStream::new(seed, 0),
    )?;
    diverged_error(std::slice::from_ref(&rec))?;

    let surrogate = |series: &[f64]| -> Result<_, RunError> {
        let part = LossPartition::from_values(series, p.bins, p.margin)?;
        let mut tm = ulam_transition(series, 0, &part, p.smoothing)?;
        tm.label = p.label.clone();
        let visited = tm.restricted_to_visited();
        let spec = spectral_gap(&visited)?;
        Ok((tm, visited, spec))
    };
    let (tm, visited, spec) = surrogate(rec.series("test_loss").unwrap_or(&[]))?;
    out.json("transition.json", &tm)?;
    out.json("spectrum.json", &spec)?;
    out.csv("spectrum.csv", |w| io::write_spectrum_csv(&spec, w))?;
    let mut start = vec![0.0; visited.size()];
    start[0] = 1.0;
    let tv = tv_convergence_curve(&visited, &start, p.tv_steps)?;
    let rows: Vec<Vec<String>> = tv.iter().enumerate().map(|(s, d)| vec![s.to_string(), num(*d)]).collect();
    out.table("tv.csv", &["step", "tv_distance"], &rows)?;

    let names = Observable::PerSampleLoss {
        prefix: "probe".into(),
        samples: probes.clone(),
    }
    .names();
    let mut rows = Vec::new();
    let mut lambda_max = 0.0f64;
    for (i, name) in names.iter().enumerate() {
        let (_, visited, s) = surrogate(rec.series(name).unwrap_or(&[]))?;
        lambda_max = lambda_max.max(s.lambda2);
        rows.push(vec![i.to_string(), num(s.lambda2), num(s.gap), visited.size().to_string()]);
    }
    out.table("probes.csv", &["probe_id", "lambda2", "gap", "states"], &rows)?;
    Ok(json!({
        "label": p.label,
        "test_loss_lambda2": spec.lambda2,
        "test_loss_gap": spec.gap,
        "probe_lambda_max": lambda_max,
    }))
}

fn ntk(p: &NtkParams, seed: u64, out: &mut Emitter) -> Outcome {
    let ntk_seed = RngStream::derived(seed, &[NTK_TAG]).next_seed();
    let base = LinearizedModel::random(p.n, p.d_w, 0.0, ntk_seed)?.with_ridge(p.ridge);
    let theta_max = base.ntk_eigenvalues().last().copied().unwrap_or(0.0);
    if !(theta_max > 0.0) {
        return Err(RunError::Numeric(ergostab_core::Error::Singular("NTK is zero".into())));
    }
    let model = base.with_eta(p.eta_scale / theta_max);
    let (a, b) = model.linearized_dynamics();
    let w_star = model.ntk_fixed_point()?;
    let fixed_point_residual = (&a * &w_star + &b - &w_star).norm();
    let interpolation_residual =
        (&model.labels - &model.features * (&w_star - &model.reference)).norm();
    let rate = model.ntk_mixing_rate();

    // starting at the reference keeps w_t − w* in the row space of Φ
    let w0 = model.reference.clone();
    let orbit = model.orbit(&w0, p.steps);
    let dist: Vec<f64> = orbit.iter().map(|w| (w - &w_star).norm()).collect();
    let rows: Vec<Vec<String>> = dist
        .iter()
        .enumerate()
        .map(|(t, d)| {
            let ratio = if t > 0 && dist[t - 1] > 0.0 { num(d / dist[t - 1]) } else { String::new() };
            vec![t.to_string(), num(*d), ratio]
        })
        .collect();
    out.table("contraction.csv", &["step", "distance", "ratio"], &rows)?;

    let modes = koopman_spectrum_linear(&a, &b)?;
    let mut probe_rng = RngStream::derived(seed, &[NTK_TAG, 1]);
    let mut koopman_residual = 0.0f64;
    for _ in 0..p.koopman_probes {
        let w = DVector::from_fn(p.d_w, |_, _| probe_rng.next_f64() * 2.0 - 1.0);
        let next = &a * &w + &b;
        for m in modes.iter().filter(|m| m.defined()) {
            let fw = m.evaluate(w.as_slice()).expect("defined");
            let fn_ = m.evaluate(next.as_slice()).expect("defined");
            koopman_residual = koopman_residual.max((fn_ - m.eigenvalue * fw).abs() / (1.0 + fw.abs()));
        }
    }
    let rows: Vec<Vec<String>> = modes
        .iter()
        .enumerate()
        .map(|(i, m)| vec![i.to_string(), num(m.eigenvalue), m.defined().to_string()])
        .collect();
    out.table("koopman.csv", &["mode_index", "eigenvalue", "defined"], &rows)?;

    let perturbed = model.with_row_redrawn(p.perturbed_row, ntk_seed)?;
    let weyl = weyl_stability_bound(&model, &perturbed)?;
    let last_ratio = dist.windows(2).last().map(|w| w[1] / w[0]);
    let results = json!({
        "eta": model.eta,
        "theta_min": rate.theta_min,
        "theta_max": rate.theta_max,
        "mixing_rate": rate.rate,
        "contraction": rate.contraction,
        "warning": rate.warning,
        "fixed_point_residual": fixed_point_residual,
        "interpolation_residual": interpolation_residual,
        "final_contraction_ratio": last_ratio,
        "koopman_residual": koopman_residual,
        "koopman_defined_modes": modes.iter().filter(|m| m.defined()).count(),
        "weyl": weyl,
    });
    out.json("ntk.json", &results)?;
    Ok(results)
}

fn bound(p: &BoundParams, out: &mut Emitter) -> Outcome {
    let t1 = theorem1_bound(p.empirical_risk, p.beta, p.n, p.loss_bound, p.delta)?;
    let t2 = theorem2_bound(p.l_d, p.lambda, p.n, p.m, p.eta, p.c)?;
    let doc = json!({
        "theorem1": t1,
        "bound_gap": t1.excess(),
        "theorem2": { "value": t2, "label": ORDER_BOUND_LABEL, "C": p.c },
    });
    out.json("bound.json", &doc)?;
    Ok(json!({ "bound": t1.bound, "bound_gap": t1.excess(), "order_bound": t2 }))
}

fn corrupt_sweep(p: &CorruptSweepParams, seed: u64, out: &mut Emitter) -> Outcome {
    if p.n_inits == 0 {
        return Err(RunError::Config("n_inits must be positive".into()));
    }
    let protocol = SasProtocol {
        runup: p.runup,
        window: p.window,
        inits_per_side: p.inits_per_side,
        statistic: p.statistic,
    };
    let schedule = Schedule::new(p.runup, p.window);
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut diverged_pairs = 0;
    let mut total_pairs = 0;
    for (idx, &prob) in p.ps.iter().enumerate() {
        let ds = DatasetParams { p: prob, ..p.dataset.clone() };
        // the same seed across p couples inputs, clean labels and corruption draws
        let t = task(&ds, &p.net, &p.optimizer, seed)?;
        let pairs = pairs_for(&t.dataset, p.pairs, seed)?;
        let probes = probes(&t, p.probes)?;
        let report = sas_lower_bound(&t.net, &pairs, &probes, &t.config, &protocol, seed, 0)?;
        out.csv(&format!("stability_p{idx}.csv"), |w| io::write_stability_csv(&report, w))?;
        diverged_pairs += report.diverged_pairs();
        total_pairs += report.pairs;

        let observables = [
            test_loss_observable(&t.heldout),
            Observable::PerSampleLoss {
                prefix: "train".into(),
                samples: t.dataset.samples.clone(),
            },
            Observable::PerSampleLoss {
                prefix: "test".into(),
                samples: t.heldout.clone(),
            },
        ];
        let records = run_ensemble(
            &inits(&t.net, seed, p.n_inits),
            &t.net,
            &t.dataset.samples,
            &t.config,
            &schedule,
            &observables,
            seed,
            0,
        )?;
        diverged_error(&records)?;
        let (mut r_hat, mut r_pop) = (0.0, 0.0);
        for r in &records {
            let risks = empirical_risks(
                &loss_statistics(r, "train", t.dataset.n)?,
                &loss_statistics(r, "test", t.heldout.len())?,
            )?;
            r_hat += risks.empirical;
            r_pop += risks.population;
        }
        let k = records.len() as f64;
        let (r_hat, r_pop) = (r_hat / k, r_pop / k);
        let gap = (r_pop - r_hat).abs();
        let (_, ac) = test_loss_autocorr(&records, p.tau_max)?;
        let mean_c = ac.mean_abs_over(1, p.tau_fit.min(p.tau_max));
        rows.push(vec![
            num(prob),
            report.beta_hat.map(num).unwrap_or_default(),
            report.valid_pairs.to_string(),
            num(r_hat),
            num(r_pop),
            num(gap),
            num(mean_c),
        ]);
        entries.push(json!({
            "p": prob,
            "beta_hat": report.beta_hat,
            "empirical_risk": r_hat,
            "population_risk": r_pop,
            "gap": gap,
            "mean_autocorr": mean_c,
            "stability": report,
        }));
    }
    out.table(
        "sweep.csv",
        &["p", "beta_hat", "valid_pairs", "empirical_risk", "population_risk", "gap", "mean_autocorr"],
        &rows,
    )?;
    out.json("sweep.json", &entries)?;
    if diverged_pairs * 2 > total_pairs {
        return Err(RunError::Divergence(format!("{diverged_pairs} of {total_pairs} pairs diverged")));
    }
    let col = |key: &str| -> Vec<serde_json::Value> { entries.iter().map(|e| e[key].clone()).collect() };
    Ok(json!({
        "p": p.ps,
        "beta_hat": col("beta_hat"),
        "gap": col("gap"),
        "mean_autocorr": col("mean_autocorr"),
    }))
}
