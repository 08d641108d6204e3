//! Experiment driver: build the model, run the configured chains and
//! summarize them.

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ModelKind, SamplerKind};
use crate::diagnostics::{
    cosine_test_function, histogram, iact, loglog_slope, mean, mean_error, standard_error,
    tv_distance, tv_to_poisson, weak_error,
};
use crate::dynamics::Dhmc;
use crate::error::Result;
use crate::mh::Mh;
use crate::potentials::{ConfinedGas, Cosine, FreeGas, LennardJones, Model};
use crate::rng::RngStream;
use crate::system::{PhaseState, SystemParams};
use crate::trace::{ChainTrace, RecordPlan};

/// Scalar results of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub records: usize,
    /// Empirical law of N, indexed by particle count.
    pub histogram: Vec<f64>,
    pub mean_n: Option<f64>,
    pub jump_acceptance: Option<f64>,
    pub mean_pressure: Option<f64>,
    pub pressure_se: Option<f64>,
    pub pressure_iact: Option<f64>,
    /// Wall-clock seconds per iteration, only with `timing = true`.
    pub wall_time_per_iter: Option<f64>,
}

/// Error of DHMC averages of the cosine test function against an MH reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakErrorSummary {
    pub reference_mean: f64,
    pub repeats: usize,
    pub sample_sizes: Vec<u64>,
    /// Mean over samples of `|phi - reference|`, averaged over repeats.
    pub weak_error: Vec<f64>,
    /// `|mean(phi) - reference|`, averaged over repeats.
    pub mean_error: Vec<f64>,
    pub weak_error_slope: Option<f64>,
    pub mean_error_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub dhmc: Option<ChainSummary>,
    pub mh: Option<ChainSummary>,
    /// `L^d e^{beta mu}` for the free gas.
    pub poisson_lambda: Option<f64>,
    pub tv_dhmc_poisson: Option<f64>,
    pub tv_mh_poisson: Option<f64>,
    pub tv_dhmc_mh: Option<f64>,
    pub weak_error: Option<WeakErrorSummary>,
    /// DHMC over MH pressure IACT.
    pub pressure_iact_ratio: Option<f64>,
}

/// Traces and summary of a finished experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub dhmc: Option<ChainTrace>,
    pub mh: Option<ChainTrace>,
    pub summary: Summary,
}

/// A chain error together with whatever was recorded before it.
#[derive(Debug, Clone)]
pub struct ExperimentFailure {
    pub error: crate::error::Error,
    pub dhmc: Option<ChainTrace>,
    pub mh: Option<ChainTrace>,
}

pub fn build_model(cfg: &ExperimentConfig) -> Result<Model> {
    Ok(match cfg.model {
        ModelKind::FreeGas => Model::FreeGas(FreeGas),
        ModelKind::Cosine => Model::Cosine(Cosine::new(cfg.system.box_length)),
        ModelKind::LennardJones => {
            Model::LennardJones(LennardJones::new(cfg.system.box_length, cfg.cutoff)?)
        }
        ModelKind::ConfinedGaussian => Model::Confined(ConfinedGas::new(cfg.system.dim)),
    })
}

/// Initial positions: a simple cubic lattice for Lennard-Jones (random
/// placement would start from overlapping cores), draws from the insertion
/// law otherwise.
pub fn initial_positions(cfg: &ExperimentConfig, rng: &mut RngStream) -> Vec<f64> {
    let p = &cfg.system;
    let count = cfg.initial_n;
    if cfg.model != ModelKind::LennardJones {
        return (0..count).flat_map(|_| p.sample_position(rng)).collect();
    }
    let side = (1..)
        .find(|s: &usize| s.pow(p.dim as u32) >= count)
        .unwrap_or(1);
    let spacing = p.box_length / side as f64;
    let mut out = Vec::with_capacity(count * p.dim);
    for i in 0..count {
        let mut rest = i;
        for _ in 0..p.dim {
            out.push((rest % side) as f64 * spacing + 0.5 * spacing);
            rest /= side;
        }
    }
    out
}

fn plan(cfg: &ExperimentConfig, n_samples: u64) -> RecordPlan {
    RecordPlan {
        n_samples,
        burn_in: cfg.burn_in,
        record_every: cfg.record_every,
        timing: cfg.timing,
    }
}

fn run_dhmc_chain(
    cfg: &ExperimentConfig,
    model: &Model,
    rng: &mut RngStream,
    positions: Vec<f64>,
    trace: &mut ChainTrace,
    observe: impl FnMut(&[f64]),
) -> Result<()> {
    let mut state = PhaseState::from_positions(cfg.system.dim, positions);
    Dhmc::new(model, &cfg.system, &cfg.integrator)?.sample_observed(
        &mut state,
        rng,
        &plan(cfg, cfg.n_samples),
        trace,
        observe,
    )
}

fn run_mh_chain(
    cfg: &ExperimentConfig,
    model: &Model,
    rng: &mut RngStream,
    mut positions: Vec<f64>,
    steps: u64,
    trace: &mut ChainTrace,
    observe: impl FnMut(&[f64]),
) -> Result<()> {
    Mh::new(model, &cfg.system, cfg.mh)?.sample_observed(
        &mut positions,
        rng,
        &plan(cfg, steps),
        trace,
        observe,
    )
}

fn summarize_chain(trace: &ChainTrace, cfg: &ExperimentConfig) -> ChainSummary {
    let mut s = summarize_records(trace);
    s.wall_time_per_iter = s.wall_time_per_iter.filter(|_| cfg.timing);
    s
}

fn summarize_records(trace: &ChainTrace) -> ChainSummary {
    let counts = trace.counts();
    let pressures = trace.pressures();
    let have_p = !pressures.is_empty();
    ChainSummary {
        records: trace.records.len(),
        histogram: histogram(&counts),
        mean_n: (!counts.is_empty())
            .then(|| mean(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())),
        jump_acceptance: trace.acceptance_rate(),
        mean_pressure: have_p.then(|| mean(&pressures)),
        pressure_se: have_p.then(|| standard_error(&pressures).ok()).flatten(),
        pressure_iact: have_p.then(|| iact(&pressures).ok()).flatten(),
        wall_time_per_iter: trace
            .records
            .last()
            .and_then(|r| r.elapsed_s.map(|t| t / r.iter as f64)),
    }
}

/// Sample sizes `10^2, 10^3, ...` up to `available`, ending with `available`.
fn sizes_up_to(available: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut s = 100usize;
    while s < available {
        out.push(s as u64);
        s *= 10;
    }
    if available > 0 {
        out.push(available as u64);
    }
    out
}

fn weak_error_curve(
    cfg: &ExperimentConfig,
    model: &Model,
    rng: &RngStream,
    first: &[f64],
    reference: f64,
) -> Result<WeakErrorSummary> {
    let sizes = sizes_up_to(first.len());
    let mut weak = vec![0.0; sizes.len()];
    let mut merr = vec![0.0; sizes.len()];
    let mut add = |phi: &[f64]| -> Result<()> {
        for (k, &s) in sizes.iter().enumerate() {
            let head = &phi[..(s as usize).min(phi.len())];
            weak[k] += weak_error(head, reference)?;
            merr[k] += mean_error(head, reference)?;
        }
        Ok(())
    };
    add(first)?;
    for r in 1..cfg.weak_error_repeats {
        let mut chain_rng = rng.derive(2 + r as u64);
        let start = initial_positions(cfg, &mut rng.derive(1_000 + r as u64));
        let mut phi = Vec::new();
        let l = cfg.system.box_length;
        run_dhmc_chain(
            cfg,
            model,
            &mut chain_rng,
            start,
            &mut ChainTrace::default(),
            |q| phi.push(cosine_test_function(q, l)),
        )?;
        add(&phi)?;
    }
    let reps = cfg.weak_error_repeats as f64;
    weak.iter_mut()
        .chain(merr.iter_mut())
        .for_each(|v| *v /= reps);
    let xs: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    Ok(WeakErrorSummary {
        reference_mean: reference,
        repeats: cfg.weak_error_repeats,
        weak_error_slope: loglog_slope(&xs, &weak).ok(),
        mean_error_slope: loglog_slope(&xs, &merr).ok(),
        sample_sizes: sizes,
        weak_error: weak,
        mean_error: merr,
    })
}

fn poisson_lambda(p: &SystemParams) -> f64 {
    p.volume() * (p.beta * p.mu).exp()
}

/// Run the configured chains. On a chain error the traces recorded so far
/// are returned inside the failure.
pub fn run_experiment(
    cfg: &ExperimentConfig,
) -> std::result::Result<ExperimentOutput, ExperimentFailure> {
    let fail = |error, dhmc, mh| ExperimentFailure { error, dhmc, mh };
    let model = build_model(cfg).map_err(|e| fail(e, None, None))?;
    let root = RngStream::new(cfg.seed);
    let start = initial_positions(cfg, &mut root.derive(1_000));
    let cosine = cfg.model == ModelKind::Cosine;
    let l = cfg.system.box_length;

    let mut dhmc = None;
    let mut dhmc_phi = Vec::new();
    if cfg.sampler != SamplerKind::Mh {
        let mut trace = ChainTrace::default();
        let res = run_dhmc_chain(
            cfg,
            &model,
            &mut root.derive(0),
            start.clone(),
            &mut trace,
            |q| {
                if cosine {
                    dhmc_phi.push(cosine_test_function(q, l))
                }
            },
        );
        if let Err(e) = res {
            return Err(fail(e, Some(trace), None));
        }
        dhmc = Some(trace);
    }

    let mut mh = None;
    let mut mh_phi = Vec::new();
    if cfg.sampler != SamplerKind::Dhmc {
        let steps = if cfg.sampler == SamplerKind::Mh {
            cfg.n_samples
        } else {
            cfg.mh_samples
        };
        let mut trace = ChainTrace::default();
        let res = run_mh_chain(
            cfg,
            &model,
            &mut root.derive(1),
            start,
            steps,
            &mut trace,
            |q| {
                if cosine {
                    mh_phi.push(cosine_test_function(q, l))
                }
            },
        );
        if let Err(e) = res {
            return Err(fail(e, dhmc, Some(trace)));
        }
        mh = Some(trace);
    }

    let free = cfg.model == ModelKind::FreeGas;
    let lambda = free.then(|| poisson_lambda(&cfg.system));
    let tv_poisson = |t: &Option<ChainTrace>| -> Option<f64> {
        let t = t.as_ref()?;
        tv_to_poisson(&t.counts(), lambda?).ok()
    };
    let tv_dhmc_mh = match (&dhmc, &mh) {
        (Some(a), Some(b)) if !a.records.is_empty() && !b.records.is_empty() => {
            tv_distance(&histogram(&a.counts()), &histogram(&b.counts())).ok()
        }
        _ => None,
    };
    let weak = if cosine && !dhmc_phi.is_empty() && !mh_phi.is_empty() {
        Some(
            weak_error_curve(cfg, &model, &root, &dhmc_phi, mean(&mh_phi))
                .map_err(|e| fail(e, dhmc.clone(), mh.clone()))?,
        )
    } else {
        None
    };
    let dhmc_summary = dhmc.as_ref().map(|t| summarize_chain(t, cfg));
    let mh_summary = mh.as_ref().map(|t| summarize_chain(t, cfg));
    let ratio = match (&dhmc_summary, &mh_summary) {
        (
            Some(ChainSummary {
                pressure_iact: Some(a),
                ..
            }),
            Some(ChainSummary {
                pressure_iact: Some(b),
                ..
            }),
        ) => Some(a / b),
        _ => None,
    };
    let summary = Summary {
        config: cfg.clone(),
        poisson_lambda: lambda,
        tv_dhmc_poisson: tv_poisson(&dhmc),
        tv_mh_poisson: tv_poisson(&mh),
        tv_dhmc_mh,
        weak_error: weak,
        pressure_iact_ratio: ratio,
        dhmc: dhmc_summary,
        mh: mh_summary,
    };
    Ok(ExperimentOutput { dhmc, mh, summary })
}

/// Results of one experiment repeated across values of a single key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub key: String,
    pub values: Vec<String>,
    pub summaries: Vec<Summary>,
    /// Log-log slope of DHMC wall time per iteration against the swept
    /// value, when it is numeric and timing is enabled.
    pub wall_time_slope: Option<f64>,
}

impl SweepSummary {
    pub fn new(key: &str, values: Vec<String>, summaries: Vec<Summary>) -> Self {
        let xs: Option<Vec<f64>> = values.iter().map(|v| v.parse().ok()).collect();
        let ys: Option<Vec<f64>> = summaries
            .iter()
            .map(|s| s.dhmc.as_ref().and_then(|d| d.wall_time_per_iter))
            .collect();
        let wall_time_slope = match (xs, ys) {
            (Some(x), Some(y)) => loglog_slope(&x, &y).ok(),
            _ => None,
        };
        Self {
            key: key.to_string(),
            values,
            summaries,
            wall_time_slope,
        }
    }
}

/// Diagnostics recomputed from a stored trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub chain: ChainSummary,
    pub energy_iact: Option<f64>,
    pub tv_to_poisson: Option<f64>,
}

/// Summarize a trace read back from disk; `lambda` adds the TV distance to Poisson(`lambda`).
pub fn analyze_trace(trace: &ChainTrace, lambda: Option<f64>) -> TraceReport {
    let chain = summarize_records(trace);
    TraceReport {
        chain,
        energy_iact: iact(&trace.energies()).ok(),
        tv_to_poisson: lambda.and_then(|l| tv_to_poisson(&trace.counts(), l).ok()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        let text = format!(
            "model = free_gas\nL = 10\nbeta = 1\nmu = -0.5\nseed = 3\nn_samples = 2000\n{extra}"
        );
        ExperimentConfig::parse(&text).unwrap()
    }

    #[test]
    fn free_gas_both_samplers() {
        let out = run_experiment(&cfg("sampler = both\nburn_in = 100\n")).unwrap();
        let s = &out.summary;
        assert_eq!(out.dhmc.as_ref().unwrap().records.len(), 1900);
        assert_eq!(out.mh.as_ref().unwrap().records.len(), 1900);
        assert!((s.poisson_lambda.unwrap() - 6.065_306_597_126_334).abs() < 1e-12);
        assert!(s.tv_dhmc_poisson.unwrap() < 0.5);
        assert!(s.tv_dhmc_mh.is_some());
        assert!(s.dhmc.as_ref().unwrap().mean_pressure.is_none());
        assert!(s.dhmc.as_ref().unwrap().wall_time_per_iter.is_none());
    }

    #[test]
    fn cosine_weak_error_summary() {
        let text = "model = cosine\nL = 10\nbeta = 1\nmu = -0.5\nseed = 3\nn_samples = 500\nsampler = both\nweak_error_repeats = 2\n";
        let out = run_experiment(&ExperimentConfig::parse(text).unwrap()).unwrap();
        let w = out.summary.weak_error.unwrap();
        assert_eq!(w.sample_sizes, vec![100, 500]);
        assert_eq!(w.repeats, 2);
        assert!(w.weak_error.iter().zip(&w.mean_error).all(|(a, b)| a >= b));
    }

    #[test]
    fn lattice_start_has_no_overlaps() {
        let text = "model = lennard_jones\nL = 12.6\nbeta = 2\nmu = 0\nseed = 3\nn_samples = 1\ninitial_n = 100\n";
        let c = ExperimentConfig::parse(text).unwrap();
        let q = initial_positions(&c, &mut RngStream::new(0));
        assert_eq!(q.len(), 300);
        let m = build_model(&c).unwrap();
        assert!(crate::potentials::PotentialModel::energy(&m, &q)
            .unwrap()
            .is_finite());
    }

    #[test]
    fn sizes_grid() {
        assert_eq!(sizes_up_to(100_000), vec![100, 1_000, 10_000, 100_000]);
        assert_eq!(sizes_up_to(50), vec![50]);
        assert!(sizes_up_to(0).is_empty());
    }
}
