use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use log::info;

use super::metrics::{oracle_distance, segmental_snr, to_node_clock};
use super::report::{pair_name, sro_trace_csv, write_wav, FsdEvents, MetricsReport, ModeMetrics, NodeMetrics, PairTrace, RunMeta, TracePoint};
use crate::danse::{run_network, DanseOptions, Mode, NetworkRun};
use crate::error::{Error, Result};
use crate::scene::{load_speech, render_scene, sro_set, RenderedScene, Scenario};

/// Segmental SNR frame length in seconds.
pub const SEG_FRAME_S: f64 = 0.032;

/// What to run and what to write.
#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub scenario: Scenario,
    pub modes: Vec<Mode>,
    /// Named clock-offset set (`small`, `moderate`, `large`) replacing the
    /// offsets in the scenario; `custom` or `None` keeps them.
    pub sro_set: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub export_signals: bool,
    pub export_traces: bool,
}

impl ExperimentOptions {
    pub fn new(scenario: Scenario, modes: Vec<Mode>) -> Self {
        Self { scenario, modes, sro_set: None, seed: None, out_dir: None, export_signals: false, export_traces: false }
    }

    /// The scenario after applying the seed and SRO-set overrides.
    pub fn effective_scenario(&self) -> Result<Scenario> {
        let mut s = self.scenario.clone();
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        match self.sro_set.as_deref() {
            None | Some("custom") => {}
            Some(name) => {
                let set = sro_set(name).ok_or_else(|| Error::InvalidConfig(format!("unknown SRO set '{name}'")))?;
                s = s.with_sro_ppm(&set)?;
            }
        }
        Ok(s)
    }
}

/// Output of [`run_experiment`]: the report plus the raw runs for callers
/// that want to inspect signals or traces.
#[derive(Debug)]
pub struct Experiment {
    pub report: MetricsReport,
    pub scene: RenderedScene,
    pub runs: BTreeMap<Mode, NetworkRun>,
    pub scenario: Scenario,
}

/// Renders the scene once, runs every requested mode, computes metrics and
/// writes the artifacts to `out_dir` when one is given.
pub fn run_experiment(opts: &ExperimentOptions) -> Result<Experiment> {
    let scenario = opts.effective_scenario()?;
    if opts.modes.is_empty() {
        return Err(Error::InvalidConfig("no modes requested".into()));
    }
    let speech = load_speech(&scenario)?;
    let scene = render_scene(&scenario, &speech)?;
    let dopts = DanseOptions::from_processing(&scenario.processing);

    let mut modes = opts.modes.clone();
    modes.sort();
    modes.dedup();
    let needs_baseline = modes.iter().any(|&m| m != Mode::Centralized);
    let mut runs = BTreeMap::new();
    for &mode in modes.iter().chain(needs_baseline.then_some(&Mode::Centralized)) {
        if runs.contains_key(&mode) {
            continue;
        }
        info!("mode {mode}");
        runs.insert(mode, run_network(&scene, mode, &dopts)?);
    }

    let report = build_report(&scenario, &scene, &runs, &modes)?;
    if let Some(dir) = &opts.out_dir {
        write_artifacts(dir, opts, &scene, &runs, &modes, report.clone())
            .map(|r| Experiment { report: r, scene, runs, scenario })
    } else {
        Ok(Experiment { report, scene, runs, scenario })
    }
}

fn build_report(scenario: &Scenario, scene: &RenderedScene, runs: &BTreeMap<Mode, NetworkRun>, modes: &[Mode]) -> Result<MetricsReport> {
    let p = &scenario.processing;
    let fs = scene.rate_hz;
    let hop = p.frame_len / 2;
    let skip = p.skip_frames * hop;
    let seg_len = (SEG_FRAME_S * fs).round() as usize;
    let tail = (p.tail_s * fs).round() as usize;
    let central = &runs[&Mode::Centralized];

    let mut per_node = Vec::new();
    for k in 0..scene.num_nodes() {
        let clean_ref = scene.reference_clean(k);
        let input = &scene.reference[k][scene.ref_mics[k]];
        let input_seg = segmental_snr(&input.samples, &clean_ref.samples, seg_len, skip, p.vad_threshold);
        let central_node = if scene.sro[k] != 0.0 {
            Some(to_node_clock(&central.outputs[k], scene.sro[k], k)?)
        } else {
            None
        };
        let mut mm = BTreeMap::new();
        for &mode in modes {
            let out = &runs[&mode].outputs[k].samples;
            let (clean, baseline) = if mode.is_async() {
                (&scene.clean_desired_at_ref[k].samples, central_node.as_ref().map_or(&central.outputs[k].samples, |s| &s.samples))
            } else {
                (&clean_ref.samples, &central.outputs[k].samples)
            };
            mm.insert(
                mode,
                ModeMetrics {
                    output_seg_snr_db: segmental_snr(out, clean, seg_len, skip, p.vad_threshold),
                    oracle_distance_db: if mode == Mode::Centralized { None } else { oracle_distance(out, baseline, tail) },
                },
            );
        }
        per_node.push(NodeMetrics { node: k + 1, mics: scene.per_node[k].len(), input_seg_snr_db: input_seg, modes: mm });
    }

    let mut sro_traces = Vec::new();
    let mut fsd_events = Vec::new();
    for &mode in modes.iter().filter(|m| m.is_async()) {
        let trace = &runs[&mode].sro_trace;
        let k_total = scene.num_nodes();
        for k in 0..k_total {
            for q in (0..k_total).filter(|&q| q != k) {
                let rows: Vec<_> = trace.iter().filter(|r| r.node == k && r.peer == q).collect();
                let Some(first) = rows.first() else { continue };
                sro_traces.push(PairTrace {
                    mode,
                    pair: pair_name(k, q),
                    eps_true_ppm: first.eps_true * 1e6,
                    points: rows
                        .iter()
                        .map(|r| TracePoint {
                            frame: r.frame,
                            time_s: r.time_s,
                            eps_hat_ppm: r.eps_hat * 1e6,
                            tau_hat_samples: r.tau_hat,
                            fsd_event: r.fsd_event,
                        })
                        .collect(),
                });
                fsd_events.push(FsdEvents {
                    mode,
                    pair: pair_name(k, q),
                    events: rows.iter().filter(|r| r.fsd_event != 0).map(|r| (r.time_s, r.fsd_event)).collect(),
                });
            }
        }
    }

    Ok(MetricsReport {
        run_meta: RunMeta {
            seed: scenario.seed,
            duration_s: scenario.duration_s,
            rate_hz: fs,
            frame_len: p.frame_len,
            sro_ppm: scenario.nodes.iter().map(|n| n.sro_ppm).collect(),
            modes: modes.to_vec(),
            metric_skip_frames: p.skip_frames,
            tail_s: p.tail_s,
            wav_gains: BTreeMap::new(),
        },
        per_node,
        sro_traces,
        fsd_events,
    })
}

fn write_artifacts(
    dir: &PathBuf,
    opts: &ExperimentOptions,
    scene: &RenderedScene,
    runs: &BTreeMap<Mode, NetworkRun>,
    modes: &[Mode],
    mut report: MetricsReport,
) -> Result<MetricsReport> {
    fs::create_dir_all(dir)?;
    if opts.export_signals {
        for &mode in modes {
            for (k, sig) in runs[&mode].outputs.iter().enumerate() {
                let name = format!("{mode}_node{}.wav", k + 1);
                let gain = write_wav(&dir.join(&name), sig)?;
                report.run_meta.wav_gains.insert(name, gain);
            }
        }
        for k in 0..scene.num_nodes() {
            let name = format!("input_node{}.wav", k + 1);
            let gain = write_wav(&dir.join(&name), &scene.per_node[k][scene.ref_mics[k]])?;
            report.run_meta.wav_gains.insert(name, gain);
        }
    }
    if opts.export_traces {
        // The plain file carries the most complete async mode; every async
        // mode also gets its own file so none is lost.
        let async_modes: Vec<Mode> = modes.iter().copied().filter(|m| m.is_async()).collect();
        let main = async_modes.last().map_or(&[][..], |m| runs[m].sro_trace.as_slice());
        fs::write(dir.join("sro_trace.csv"), sro_trace_csv(main))?;
        for mode in &async_modes {
            fs::write(dir.join(format!("sro_trace_{mode}.csv")), sro_trace_csv(&runs[mode].sro_trace))?;
        }
    }
    fs::write(dir.join("metrics.json"), report.to_json()?)?;
    fs::write(dir.join("metrics.csv"), report.to_csv())?;
    Ok(report)
}
