use log::info;
use num_complex::Complex64;
use serde::Serialize;

use super::distortion::fused_sample;
use super::node::{danse_filter_update, fuse_frame, NodeState};
use super::{DanseOptions, Mode};
use crate::dsp::{ClockOwner, OverlapAdd, TimeSignal, WolaConfig};
use crate::error::{Error, Result};
use crate::mwf::{centralized_enhance, MwfOptions, StackedFrame};
use crate::scene::RenderedScene;
use crate::sro::{compensate, detect_fsd, SroSearch, SroSyncState};

/// One frame of one ordered pair `(node, peer)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SroTraceRow {
    pub frame: usize,
    /// Zero-based receiving node.
    pub node: usize,
    /// Zero-based sending node.
    pub peer: usize,
    /// Local sample count at the frame.
    pub local_count: usize,
    /// Samples received from the peer so far.
    pub rx_count: usize,
    /// Local sample index of the analysis window.
    pub window_start: isize,
    /// Local time of the frame in seconds.
    pub time_s: f64,
    pub eps_hat: f64,
    pub tau_hat: f64,
    /// Detected FSD event in `{-1, 0, 1}`.
    pub fsd_event: i32,
    /// Running sum of detected events.
    pub fsd_total: i64,
    /// Integer shift actually compensated (zero unless FSDs are handled).
    pub fsd_applied: i64,
    pub eps_true: f64,
}

/// Result of one network simulation.
#[derive(Debug, Clone)]
pub struct NetworkRun {
    pub mode: Mode,
    pub nodes: Vec<NodeState>,
    /// Desired-signal estimate per node, on the clock the node ran on.
    pub outputs: Vec<TimeSignal>,
    pub sro_trace: Vec<SroTraceRow>,
    /// Everything each node broadcast, in its own sample indexing.
    pub tx_streams: Vec<Vec<f64>>,
    /// Frames processed per node.
    pub frames: Vec<usize>,
}

/// Clock rate of node `k` scaled to an integer, so that event times
/// `n / R_k` compare exactly.
fn rate_factor(eps: f64) -> i128 {
    1_000_000_000_000 + (eps * 1e12).round() as i128
}

/// Runs the whole network in `mode` over the rendered scene.
///
/// Events are processed in order of wall time; samples taken at the same
/// instant are handled before any frame processing at that instant, each
/// group in ascending node order.
pub fn run_network(scene: &RenderedScene, mode: Mode, opts: &DanseOptions) -> Result<NetworkRun> {
    let cfg = WolaConfig::sqrt_hann(opts.frame_len)?;
    if mode == Mode::Centralized {
        let out = centralized_enhance(scene, &cfg, &MwfOptions { beta: opts.beta, loading: opts.loading })?;
        return Ok(NetworkRun {
            mode,
            nodes: Vec::new(),
            frames: vec![out.frames; out.outputs.len()],
            outputs: out.outputs,
            sro_trace: Vec::new(),
            tx_streams: Vec::new(),
        });
    }
    Simulation::new(scene, mode, opts, cfg)?.run()
}

struct Simulation<'a> {
    scene: &'a RenderedScene,
    mode: Mode,
    opts: &'a DanseOptions,
    cfg: WolaConfig,
    signals: Vec<Vec<&'a [f64]>>,
    clocks: Vec<i128>,
    eps: Vec<f64>,
    nodes: Vec<NodeState>,
    tx: Vec<Vec<f64>>,
    tx_ola: Vec<OverlapAdd>,
    outputs: Vec<Vec<f64>>,
    trace: Vec<SroTraceRow>,
}

impl<'a> Simulation<'a> {
    fn new(scene: &'a RenderedScene, mode: Mode, opts: &'a DanseOptions, cfg: WolaConfig) -> Result<Self> {
        let k_total = scene.num_nodes();
        let source = if mode.is_async() { &scene.per_node } else { &scene.reference };
        let signals: Vec<Vec<&[f64]>> = source.iter().map(|ch| ch.iter().map(|s| s.samples.as_slice()).collect()).collect();
        let eps = if mode.is_async() { scene.sro.clone() } else { vec![0.0; k_total] };
        let clocks = eps.iter().map(|&e| rate_factor(e)).collect();
        let search = SroSearch {
            n: cfg.frame_len(),
            hop: cfg.hop(),
            lag_frames: opts.sro_lag,
            half_width_ppm: opts.search_half_width_ppm,
        };
        let mut nodes = Vec::with_capacity(k_total);
        for k in 0..k_total {
            let mut node = NodeState::new(k, signals[k].len(), scene.ref_mics[k], k_total, &cfg, opts)?;
            if mode.estimates_sro() {
                for q in (0..k_total).filter(|&q| q != k) {
                    node.sro[q] = Some(SroSyncState::new(q, search, opts.sro_alpha));
                }
            }
            nodes.push(node);
        }
        let outputs = signals.iter().map(|ch| vec![0.0; ch.iter().map(|s| s.len()).min().unwrap_or(0)]).collect();
        Ok(Self {
            scene,
            mode,
            opts,
            tx: vec![Vec::new(); k_total],
            tx_ola: (0..k_total).map(|_| OverlapAdd::new(&cfg)).collect(),
            cfg,
            signals,
            clocks,
            eps,
            nodes,
            outputs,
            trace: Vec::new(),
        })
    }

    fn len(&self, k: usize) -> usize {
        self.signals[k].iter().map(|s| s.len()).min().unwrap_or(0)
    }

    /// Frame index triggered by local count `c`, if any.
    fn frame_at(&self, c: usize) -> Option<usize> {
        let n = self.cfg.frame_len();
        let hop = self.cfg.hop();
        (c >= n && (c - n) % hop == 0).then(|| (c - n) / hop + 1)
    }

    fn run(mut self) -> Result<NetworkRun> {
        let k_total = self.nodes.len();
        let lens: Vec<usize> = (0..k_total).map(|k| self.len(k)).collect();
        let mut next = vec![0usize; k_total];
        let mut tied = Vec::with_capacity(k_total);
        info!("running {} over {k_total} nodes", self.mode);
        loop {
            let mut best: Option<usize> = None;
            for k in 0..k_total {
                if next[k] >= lens[k] {
                    continue;
                }
                best = match best {
                    Some(b) if (next[b] as i128) * self.clocks[k] <= (next[k] as i128) * self.clocks[b] => Some(b),
                    _ => Some(k),
                };
            }
            let Some(b) = best else { break };
            tied.clear();
            tied.extend((0..k_total).filter(|&k| {
                next[k] < lens[k] && (next[k] as i128) * self.clocks[b] == (next[b] as i128) * self.clocks[k]
            }));
            for &k in &tied {
                next[k] += 1;
                self.sample_event(k, next[k])?;
            }
            for &k in &tied {
                if let Some(i) = self.frame_at(next[k]) {
                    self.frame_event(k, next[k], i)?;
                }
            }
        }

        let clock = |k: usize| if self.mode.is_async() { ClockOwner::Node(k) } else { ClockOwner::Reference };
        let outputs = std::mem::take(&mut self.outputs)
            .into_iter()
            .enumerate()
            .map(|(k, x)| TimeSignal::new(x, self.scene.rate_hz * (1.0 + self.eps[k]), clock(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(NetworkRun {
            mode: self.mode,
            frames: self.nodes.iter().map(|n| n.frame_index).collect(),
            nodes: self.nodes,
            outputs,
            sro_trace: self.trace,
            tx_streams: self.tx,
        })
    }

    /// Node `k` has just taken sample `c - 1`.
    fn sample_event(&mut self, k: usize, c: usize) -> Result<()> {
        let n = self.cfg.frame_len();
        if self.mode.is_async() {
            let hist: Vec<&[f64]> = self.signals[k].iter().map(|s| &s[..c]).collect();
            let z = fused_sample(&hist, &self.nodes[k].distortion, n);
            self.tx[k].push(z);
            self.nodes[k].tx_count += 1;
        } else if self.frame_at(c).is_some() {
            // Frame-wise broadcast: fuse [c - N, c), emit the Ns samples
            // that no later frame overlaps.
            let start = c as isize - n as isize;
            let frame = self.local_frame(k, c, start)?;
            let z = fuse_frame(&self.nodes[k].w_tilde.w, &frame)?;
            let block = self.cfg.synthesize_half(&z)?;
            let done = self.tx_ola[k].push(&block);
            self.nodes[k].tx_count += done.len();
            self.tx[k].extend(done);
        }
        Ok(())
    }

    /// Whether the frame `l_d` hops back had both windows filled with signal:
    /// the local one inside the recording and the peer one past the start of
    /// the fused stream, which emits from index `N - 1` on.
    fn lagged_frame_complete(&self, start: isize, r: usize) -> bool {
        let n = self.cfg.frame_len();
        let back = self.opts.sro_lag * self.cfg.hop();
        start >= back as isize && r >= back + self.opts.sro_lag + 2 * n - 1
    }

    /// Whether the peer's distortion taps stayed fixed over every sample the
    /// current coherence product looks at. Peers refresh on a shared
    /// schedule, so the switch positions follow from the received count.
    fn peer_rule_fixed(&self, r: usize) -> bool {
        let n = self.cfg.frame_len();
        let hop = self.cfg.hop();
        let period = self.opts.update_period * hop;
        // Switches land at tx index N + (period_frames * m - 1) * Ns, m >= 1.
        let Some(since) = (r + hop).checked_sub(n + 1) else { return true };
        let m = since / period;
        if m == 0 {
            return true;
        }
        let last = n + m * period - hop;
        let span = n + self.opts.sro_lag * (hop + 1);
        last + span < r
    }

    /// Oracle voice activity for the local window starting at `start`.
    fn vad_at(&self, k: usize, start: isize) -> bool {
        self.scene.vad.is_active((start as f64 / (1.0 + self.eps[k])).round() as isize)
    }

    fn local_frame(&self, k: usize, c: usize, start: isize) -> Result<StackedFrame> {
        let spectra: Vec<Vec<Complex64>> = self.signals[k].iter().map(|s| self.cfg.analyze_half_at(&s[..c], start)).collect();
        let refs: Vec<&[Complex64]> = spectra.iter().map(Vec::as_slice).collect();
        StackedFrame::from_channels(&refs)
    }

    fn frame_event(&mut self, k: usize, c: usize, i: usize) -> Result<()> {
        let n = self.cfg.frame_len() as isize;
        let hop = self.cfg.hop();
        let k_total = self.nodes.len();
        let mode = self.mode;

        if mode.is_async() && self.nodes[k].distortion.due(i) {
            let cfg = self.cfg.clone();
            self.nodes[k].refresh_distortion(&cfg, i)?;
        }

        // The peers' fused samples lag the microphones by N - 1 samples, so
        // the local window is delayed by the same amount.
        let start = if mode.is_async() { c as isize - 2 * n + 1 } else { c as isize - n - hop as isize };
        let local = self.local_frame(k, c, start)?;
        let mut stacked: Vec<Vec<Complex64>> = (0..local.channels()).map(|m| local.channel(m)).collect();

        let local_delta = c - self.nodes[k].last_frame_count;
        for q in (0..k_total).filter(|&q| q != k) {
            let r = self.tx[q].len();
            let z = if mode.is_async() {
                if i > 1 && (r as isize) < n {
                    return Err(Error::Consistency(format!("node {} starved of samples from node {}", k + 1, q + 1)));
                }
                self.cfg.analyze_half_at(&self.tx[q], r as isize - n)
            } else {
                if r as isize != start + n {
                    return Err(Error::Consistency(format!(
                        "node {} expected {} samples from node {}, has {r}",
                        k + 1,
                        start + n,
                        q + 1
                    )));
                }
                self.cfg.analyze_half_at(&self.tx[q], start)
            };
            if !mode.is_async() {
                stacked.push(z);
                continue;
            }

            let stable = self.peer_rule_fixed(r) && self.lagged_frame_complete(start, r);
            let node = &mut self.nodes[k];
            let event = detect_fsd(r - node.rx_counts[q], local_delta)?;
            node.rx_counts[q] = r;
            node.fsd_totals[q] += i64::from(event);
            let (eps_hat, tau_hat, applied) = match node.sro[q].as_mut() {
                Some(st) => {
                    let ev = if mode.uses_fsd() { event } else { 0 };
                    let s = st.step(&stacked[0], &z, ev, (start + n / 2) as f64, stable)?;
                    if s.compensating {
                        (s.eps_hat, s.tau_hat, s.fsd_count)
                    } else {
                        (s.eps_hat, 0.0, 0)
                    }
                }
                None => (0.0, 0.0, 0),
            };
            let comp = if mode.estimates_sro() { compensate(&z, tau_hat, applied, n as usize) } else { z };
            stacked.push(comp);
            self.trace.push(SroTraceRow {
                frame: i,
                node: k,
                peer: q,
                local_count: c,
                rx_count: r,
                window_start: start,
                time_s: (c - 1) as f64 / (self.scene.rate_hz * (1.0 + self.eps[k])),
                eps_hat,
                tau_hat,
                fsd_event: event,
                fsd_total: node.fsd_totals[q],
                fsd_applied: applied,
                eps_true: (1.0 + self.eps[q]) / (1.0 + self.eps[k]) - 1.0,
            });
        }

        let refs: Vec<&[Complex64]> = stacked.iter().map(Vec::as_slice).collect();
        let frame = StackedFrame::from_channels(&refs)?;
        let active = self.vad_at(k, start);
        let node = &mut self.nodes[k];
        danse_filter_update(node, &frame, active, self.opts.loading)?;
        let d_hat = node.estimate(&frame);
        node.frame_index = i;
        node.last_frame_count = c;
        let block = self.cfg.synthesize_half(&d_hat)?;
        crate::mwf::overlap_add_at(&mut self.outputs[k], &block, start);
        Ok(())
    }
}
