use std::f64::consts::PI;

use danse_core::dsp::WolaConfig;
use danse_core::scene::{
    load_speech, schroeder_t60, simulate_rir, speech_cadence, synthetic_speech, OracleVad, RirParams, GAP_S, LEAD_SILENCE_S,
    SNIPPET_S, SPEED_OF_SOUND,
};
use danse_core::{render_scene, RenderedScene, Scenario};

const BASE: &str = r#"
seed = 3
duration_s = 6.0
snr_at_ref_db = -3.0
rir_length = 4096

[room]
dims = [5.0, 5.0, 5.0]
absorption = 0.9
t60_s = 0.15

[[nodes]]
sro_ppm = 0.0
mics = [[1.0, 1.0, 1.5], [1.2, 1.0, 1.5]]

[[nodes]]
sro_ppm = 400.0
mics = [[3.8, 1.2, 1.5]]

[[sources]]
kind = "desired"
position = [2.4, 2.2, 1.6]

[[sources]]
kind = "noise"
position = [1.6, 3.0, 1.4]

[[sources]]
kind = "noise"
position = [3.3, 2.6, 1.7]
"#;

fn scenario(text: &str) -> Scenario {
    Scenario::from_toml_str(text).unwrap()
}

fn render(sc: &Scenario) -> RenderedScene {
    render_scene(sc, &load_speech(sc).unwrap()).unwrap()
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn params(sc: &Scenario) -> RirParams {
    RirParams { room: sc.room.dims, reflection: sc.reflection_coefficient(), rate_hz: sc.nominal_rate_hz, length: sc.rir_length, seed: 9 }
}

#[test]
fn reverberation_time_matches_target() {
    let sc = scenario(BASE);
    for (src, mic) in [([2.4, 2.2, 1.6], [1.0, 1.0, 1.5]), ([1.6, 3.0, 1.4], [3.8, 1.2, 1.5])] {
        let h = simulate_rir(&params(&sc), src, mic).unwrap();
        let t60 = schroeder_t60(&h, sc.nominal_rate_hz).unwrap();
        assert!((0.1..=0.25).contains(&t60), "T60 {t60}");
    }
}

#[test]
fn anechoic_room_keeps_only_the_direct_path() {
    let sc = scenario(&BASE.replace("absorption = 0.9\nt60_s = 0.15", "absorption = 1.0"));
    let p = params(&sc);
    let src = [1.0, 2.5, 2.5];
    let near = simulate_rir(&p, src, [2.0, 2.5, 2.5]).unwrap();
    let far = simulate_rir(&p, src, [3.0, 2.5, 2.5]).unwrap();
    let peak = |h: &[f64]| h.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(i, v)| (i, *v)).unwrap();
    let (i_near, a_near) = peak(&near);
    let (i_far, a_far) = peak(&far);
    assert_eq!(i_near, (1.0 / SPEED_OF_SOUND * 16000.0).round() as usize);
    assert_eq!(i_far, (2.0 / SPEED_OF_SOUND * 16000.0).round() as usize);
    // Interpolator energy depends on the fractional delay, so compare the
    // whole-response energy rather than the peak tap: 1/r in amplitude.
    let ratio = (energy(&near) / energy(&far)).sqrt();
    assert!((ratio - 2.0).abs() < 0.02, "ratio {ratio}");
    assert!((a_near / a_far - 2.0).abs() < 0.2);
    // Nothing outside the interpolator support around the direct tap.
    assert!(near.iter().enumerate().all(|(i, v)| (i as i64 - i_near as i64).abs() <= 32 || *v == 0.0));
    let expected = 1.0 / (4.0 * PI);
    assert!((energy(&near).sqrt() - expected).abs() < 0.02 * expected);
}

#[test]
fn noise_is_scaled_to_the_target_snr() {
    let sc = scenario(BASE);
    let scene = render(&sc);
    let d = &scene.reference_desired[0][0].samples;
    let n = &scene.reference_noise[0][0].samples;
    let snr = 10.0 * (energy(d) / energy(n)).log10();
    assert!((snr + 3.0).abs() < 0.1, "snr {snr}");
}

#[test]
fn mixture_is_desired_plus_noise() {
    let scene = render(&scenario(BASE));
    for k in 0..scene.num_nodes() {
        for m in 0..scene.reference[k].len() {
            let y = &scene.reference[k][m].samples;
            let d = &scene.reference_desired[k][m].samples;
            let n = &scene.reference_noise[k][m].samples;
            assert!(y.iter().zip(d).zip(n).all(|((y, d), n)| (y - d - n).abs() <= 1e-12));
        }
    }
}

#[test]
fn rendering_is_deterministic() {
    let sc = scenario(BASE);
    let a = render(&sc);
    let b = render(&sc);
    for k in 0..a.num_nodes() {
        for m in 0..a.per_node[k].len() {
            assert_eq!(a.per_node[k][m].samples, b.per_node[k][m].samples);
        }
    }
    assert_eq!(a.vad_flags, b.vad_flags);
    let other = render(&scenario(&BASE.replace("seed = 3", "seed = 4")));
    assert_ne!(a.per_node[1][0].samples, other.per_node[1][0].samples);
}

#[test]
fn silent_noise_sources_leave_the_desired_component() {
    let text = BASE.replace("kind = \"noise\"\nposition = [1.6, 3.0, 1.4]", "kind = \"noise\"\nposition = [1.6, 3.0, 1.4]\ngain = 0.0")
        .replace("kind = \"noise\"\nposition = [3.3, 2.6, 1.7]", "kind = \"noise\"\nposition = [3.3, 2.6, 1.7]\ngain = 0.0");
    let scene = render(&scenario(&text));
    for k in 0..scene.num_nodes() {
        assert_eq!(scene.reference[k][0].samples, scene.reference_desired[k][0].samples);
        assert!(scene.reference_noise[k][0].samples.iter().all(|&v| v == 0.0));
    }
    assert_eq!(scene.per_node[1][0].samples, scene.clean_desired_at_ref[1].samples);
}

/// Lag of `b` behind `a` around sample `at`, by time-domain cross-correlation
/// with parabolic refinement.
fn local_lag(a: &[f64], b: &[f64], at: usize, half: usize, max_lag: isize) -> f64 {
    let score = |d: isize| -> f64 { (at - half..at + half).map(|n| a[n] * b[(n as isize + d) as usize]).sum() };
    let best = (-max_lag..=max_lag).max_by(|&p, &q| score(p).total_cmp(&score(q))).unwrap();
    let (l, c, r) = (score(best - 1), score(best), score(best + 1));
    best as f64 + 0.5 * (l - r) / (l - 2.0 * c + r)
}

#[test]
fn node_clock_lag_grows_with_time() {
    let scene = render(&scenario(BASE));
    let eps = scene.sro[1];
    assert!((eps - 400e-6).abs() < 1e-12);
    let reference = &scene.reference_desired[1][0].samples;
    let skewed = &scene.clean_desired_at_ref[1].samples;
    // Node sample n holds reference time n / (1 + eps), so the reference
    // content appears eps * n / (1 + eps) samples later on the node clock.
    for at in [16_000usize, 40_000, 50_000] {
        let lag = local_lag(reference, skewed, at, 2048, 40);
        let expected = eps * at as f64 / (1.0 + eps);
        assert!((lag - expected).abs() < 0.25, "at {at}: lag {lag}, expected {expected}");
    }
}

#[test]
fn vad_is_off_inside_every_gap() {
    let fs = 16000.0;
    let material = synthetic_speech(30.0, fs, 1);
    let len = (20.0 * fs) as usize;
    let clean = speech_cadence(&material, len).unwrap();
    let cfg = WolaConfig::sqrt_hann(1024).unwrap();
    let vad = OracleVad::new(&clean, &cfg, 1e-3);
    let flags = vad.flags();
    assert!(flags.iter().any(|&f| f) && flags.iter().any(|&f| !f));
    let mut gap_start = LEAD_SILENCE_S + SNIPPET_S;
    while gap_start + GAP_S < 20.0 {
        // Frames lying entirely inside the gap.
        let first = ((gap_start * fs) as usize).div_ceil(512);
        let last = (((gap_start + GAP_S) * fs) as usize - 1024) / 512;
        for i in first..=last {
            assert!(!flags[i], "frame {i} active inside gap at {gap_start} s");
        }
        gap_start += GAP_S + SNIPPET_S;
    }
    // The middle of every snippet is active.
    let mut mid = LEAD_SILENCE_S + SNIPPET_S / 2.0;
    while mid < 20.0 {
        assert!(vad.is_active((mid * fs) as isize));
        mid += SNIPPET_S + GAP_S;
    }
}
