//! Self-checks against the brute-force oracles, shared by the `verify`
//! command and the acceptance suite.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::{write_csv, CodeSpec, HarnessError, Modulation, Scheme, Simulation, SimulationConfig};
use crate::algebra::{Alphabet, AlphabetSpec};
use crate::channel::{complex_gaussian, snr_to_noise_var, ChannelModel};
use crate::ldpc::{
    construct_regular, decode_cspa, decode_gspa, gspa_check_update_2dfft, gspa_check_update_direct, CheckUpdate,
    DecoderConfig, GroupDecoder, LdpcCode, OpCounter, PairBelief, SymbolBelief, SymbolGroup,
};
use crate::modem::Constellation;
use crate::oracle;
use crate::pnc::{broadcast_recover, build_superimposed_set, demap_pair_prob, detect_ambiguity, exclusive_law, NcMap, NcRule, User, MERGE_TOLERANCE};
use crate::rng::frame_rng;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckReport { name: name.to_string(), passed, detail }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// The (8, 4) toy code with column weight 2 used by the decoder oracles.
pub fn toy_code(spec: AlphabetSpec) -> LdpcCode {
    construct_regular(8, 4, 2, 4, Alphabet::shared(spec), 1).expect("toy code")
}

/// Agreement between a decoder and an exhaustive MAP decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Agreement {
    pub frames: usize,
    pub agree: usize,
    /// Frames where the MAP decision differs from what was sent.
    pub oracle_errors: usize,
}

impl Agreement {
    pub fn rate(&self) -> f64 {
        self.agree as f64 / self.frames as f64
    }

    pub fn oracle_fer(&self) -> f64 {
        self.oracle_errors as f64 / self.frames as f64
    }

    fn add(self, agree: bool, oracle_error: bool) -> Self {
        Agreement {
            frames: self.frames + 1,
            agree: self.agree + usize::from(agree),
            oracle_errors: self.oracle_errors + usize::from(oracle_error),
        }
    }

    fn merge(self, o: Self) -> Self {
        Agreement { frames: self.frames + o.frames, agree: self.agree + o.agree, oracle_errors: self.oracle_errors + o.oracle_errors }
    }

    const ZERO: Agreement = Agreement { frames: 0, agree: 0, oracle_errors: 0 };
}

fn qpsk() -> Constellation {
    Constellation::psk_gray(4, 0.0).expect("qpsk")
}

fn decoder_cfg() -> DecoderConfig {
    DecoderConfig::default().with_max_iter(50)
}

/// C-SPA against symbol-MAP: random codewords sent over single-user QPSK
/// with AWGN at `snr_db` (no noise when `noiseless`).
pub fn cspa_vs_symbol_map(code: &LdpcCode, snr_db: f64, frames: usize, seed: u64, noiseless: bool) -> Agreement {
    let words = oracle::codewords(code);
    let c = qpsk();
    let q = code.alphabet().size();
    let n0 = snr_to_noise_var(snr_db);
    (0..frames as u64)
        .into_par_iter()
        .map(|f| {
            let mut rng = frame_rng(seed, snr_db, f);
            let w = &words[rng.random_range(0..words.len())];
            let probs: Vec<Vec<f64>> = w
                .iter()
                .map(|&s| {
                    let noise = if noiseless { Complex64::new(0.0, 0.0) } else { complex_gaussian(&mut rng, n0) };
                    let y = c.point(s) + noise;
                    let mut p: Vec<f64> = (0..q as u8).map(|x| (-(y - c.point(x)).norm_sqr() / n0).exp()).collect();
                    let t: f64 = p.iter().sum();
                    p.iter_mut().for_each(|v| *v /= t);
                    p
                })
                .collect();
            let map = oracle::symbol_map(&words, &probs);
            let beliefs: Vec<SymbolBelief> = probs.into_iter().map(SymbolBelief::from_weights).collect();
            let bp = decode_cspa(&beliefs, code, &decoder_cfg()).expect("valid beliefs");
            Agreement::ZERO.add(bp.decision == map, &map != w)
        })
        .reduce(|| Agreement::ZERO, Agreement::merge)
}

/// G-SPA against pair-MAP: two users with QPSK and pi/4-rotated QPSK
/// superimposed over AWGN at `snr_db`.
pub fn gspa_vs_pair_map(code: &LdpcCode, snr_db: f64, frames: usize, seed: u64, noiseless: bool) -> Agreement {
    let words = oracle::codewords(code);
    let (ca, cb) = (qpsk(), Constellation::psk_gray(4, PI / 4.0).expect("qpsk"));
    let one = Complex64::new(1.0, 0.0);
    let set = build_superimposed_set(&ca, &cb, one, one, MERGE_TOLERANCE).expect("set");
    let m = code.alphabet().size();
    let n0 = snr_to_noise_var(snr_db);
    (0..frames as u64)
        .into_par_iter()
        .map(|f| {
            let mut rng = frame_rng(seed, snr_db, f);
            let w1 = &words[rng.random_range(0..words.len())];
            let w2 = &words[rng.random_range(0..words.len())];
            let beliefs: Vec<PairBelief> = w1
                .iter()
                .zip(w2)
                .map(|(&a, &b)| {
                    let noise = if noiseless { Complex64::new(0.0, 0.0) } else { complex_gaussian(&mut rng, n0) };
                    demap_pair_prob(ca.point(a) + cb.point(b) + noise, &set, n0)
                })
                .collect();
            let probs: Vec<Vec<f64>> = beliefs.iter().map(|b| b.probs().to_vec()).collect();
            let map = oracle::pair_map(&words, m, &probs);
            let bp = decode_gspa(&beliefs, code, &decoder_cfg()).expect("valid beliefs");
            let sent: Vec<(u8, u8)> = w1.iter().copied().zip(w2.iter().copied()).collect();
            Agreement::ZERO.add(bp.decision == map, map != sent)
        })
        .reduce(|| Agreement::ZERO, Agreement::merge)
}

/// Operating points where the toy MAP decoders have a frame error rate
/// near 0.1.
pub const ORACLE_POINTS: [(&str, AlphabetSpec, f64, f64); 2] = [
    ("Z_4", AlphabetSpec::Ring { modulus: 4 }, 4.0, 7.0),
    ("GF(4)", AlphabetSpec::Field { bits: 2, poly: 0b111 }, 3.0, 5.5),
];

/// BP decisions against exhaustive MAP on the toy codes, noisy and
/// noiseless.
pub fn decoder_oracle_check(frames: usize, seed: u64) -> CheckReport {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, spec, snr_c, snr_g) in ORACLE_POINTS {
        let code = toy_code(spec);
        for (dec, snr) in [("C-SPA", snr_c), ("G-SPA", snr_g)] {
            let run = |noiseless| {
                if dec == "C-SPA" {
                    cspa_vs_symbol_map(&code, snr, frames, seed, noiseless)
                } else {
                    gspa_vs_pair_map(&code, snr, frames, seed, noiseless)
                }
            };
            let (noisy, clean) = (run(false), run(true));
            passed &= noisy.rate() >= 0.99 && clean.agree == clean.frames;
            parts.push(format!(
                "{dec} {name} @{snr} dB agree {}/{} (oracle FER {:.3}), noiseless {}/{}",
                noisy.agree,
                noisy.frames,
                noisy.oracle_fer(),
                clean.agree,
                clean.frames
            ));
        }
    }
    CheckReport::new("decoder oracle", passed, parts.join("; "))
}

fn random_message<R: Rng>(rng: &mut R, q: usize) -> Vec<f64> {
    let mut m: Vec<f64> = (0..q).map(|_| rng.random::<f64>().powi(3) + 1e-12).collect();
    let t: f64 = m.iter().sum();
    m.iter_mut().for_each(|v| *v /= t);
    m
}

/// Largest per-message relative deviation `max|a - b| / max|a|`.
fn max_relative_gap(a: &[f64], b: &[f64], q: usize) -> f64 {
    a.chunks(q)
        .zip(b.chunks(q))
        .map(|(x, y)| {
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let gap = x.iter().zip(y).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
            if scale > 0.0 {
                gap / scale
            } else {
                gap
            }
        })
        .fold(0.0, f64::max)
}

/// Transform-domain and direct pair-group check updates on `messages`
/// random messages per M in {2, 4, 8}, plus message-by-message agreement of
/// whole decodes.
pub fn transform_check(messages: usize, seed: u64) -> CheckReport {
    let mut worst = 0.0f64;
    let mut count = 0;
    for bits in 1..=3u8 {
        let spec = AlphabetSpec::gf(bits).expect("field");
        let g = SymbolGroup::pairs(&Alphabet::new(spec));
        let q = g.order();
        let mut rng = frame_rng(seed, bits as f64, 0);
        let ops = OpCounter::new();
        let mut done = 0;
        while done < messages {
            let d = rng.random_range(2..=6);
            let msgs: Vec<Vec<f64>> = (0..d).map(|_| random_message(&mut rng, q)).collect();
            let a = gspa_check_update_direct(&g, &msgs, &ops);
            let b = gspa_check_update_2dfft(&g, &msgs, &ops);
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max(max_relative_gap(x, y, q));
            }
            done += d;
        }
        count += done;
        // decoder messages, iteration by iteration
        let code = construct_regular(24, 12, 2, 4, Alphabet::shared(spec), 2).expect("code");
        let m = spec.size();
        let flat: Vec<f64> = (0..code.n()).flat_map(|_| random_message(&mut rng, m * m)).collect();
        let mut direct = GroupDecoder::new(&code, g.clone(), &DecoderConfig::default()).expect("decoder");
        let mut fft = GroupDecoder::new(&code, g, &DecoderConfig::default().with_check_update(CheckUpdate::Fft)).expect("decoder");
        direct.load(&flat).expect("beliefs");
        fft.load(&flat).expect("beliefs");
        for _ in 0..10 {
            direct.step();
            fft.step();
            worst = worst.max(max_relative_gap(direct.check_messages(), fft.check_messages(), q));
        }
    }
    CheckReport::new("transform equivalence", worst <= 1e-9, format!("{count} messages, worst relative gap {worst:.2e}"))
}

/// Per-check operation counts of the direct and transform updates against
/// theta^2 and theta log2 theta, for the pair groups of M = 4 and 8.
pub fn complexity_check() -> CheckReport {
    let mut rng = frame_rng(7, 0.0, 0);
    let d = 6;
    let mut rows = Vec::new();
    let mut passed = true;
    let mut counts = Vec::new();
    for spec in [AlphabetSpec::gf(2).unwrap(), AlphabetSpec::gf(3).unwrap(), AlphabetSpec::ring(4).unwrap(), AlphabetSpec::ring(8).unwrap()] {
        let g = SymbolGroup::pairs(&Alphabet::new(spec));
        let theta = g.order() as f64;
        let msgs: Vec<Vec<f64>> = (0..d).map(|_| random_message(&mut rng, g.order())).collect();
        let (od, of) = (OpCounter::new(), OpCounter::new());
        gspa_check_update_direct(&g, &msgs, &od);
        gspa_check_update_2dfft(&g, &msgs, &of);
        let r = (od.get() as f64 / of.get() as f64) / (theta / theta.log2());
        passed &= (0.5..=2.0).contains(&r);
        rows.push(format!("{spec}: direct {} fft {} (ratio/predicted {r:.2})", od.get(), of.get()));
        counts.push((spec, theta, od.get() as f64, of.get() as f64));
    }
    // growth from M = 4 to M = 8 within each family
    for pair in [(0, 1), (2, 3)] {
        let (s4, t4, d4, f4) = counts[pair.0];
        let (s8, t8, d8, f8) = counts[pair.1];
        let gd = (d8 / d4) / ((t8 * t8) / (t4 * t4));
        let gf = (f8 / f4) / ((t8 * t8.log2()) / (t4 * t4.log2()));
        passed &= (0.5..=2.0).contains(&gd) && (0.5..=2.0).contains(&gf);
        rows.push(format!("{s4} to {s8} growth/predicted direct {gd:.2} fft {gf:.2}"));
    }
    CheckReport::new("complexity scaling", passed, rows.join("; "))
}

/// Superimposed-set sizes for the rotated and identical 8PSK pairs.
pub fn constellation_check() -> CheckReport {
    let one = Complex64::new(1.0, 0.0);
    let a = Constellation::psk_gray(8, 0.0).expect("8psk");
    let b = Constellation::psk_gray(8, PI / 8.0).expect("8psk");
    let rotated = build_superimposed_set(&a, &b, one, one, MERGE_TOLERANCE).expect("set");
    let same = build_superimposed_set(&a, &a, one, one, MERGE_TOLERANCE).expect("set");
    let same_report = detect_ambiguity(&same, &NcRule::BitXor);
    let passed = rotated.entries().len() == 64
        && same.entries().len() == 33
        && rotated.unique_pair()
        && !same_report.is_ambiguous();
    CheckReport::new(
        "superimposed sets",
        passed,
        format!(
            "rotated {} points (unique pairs {}), same {} points (XOR ambiguous entries {})",
            rotated.entries().len(),
            rotated.unique_pair(),
            same.entries().len(),
            same_report.ambiguous_entries.len()
        ),
    )
}

/// Every receiver under a noiseless channel: the relay recovers the exact
/// NC message and each user recovers its partner's message from it.
pub fn noiseless_identity_check(pairs: u64) -> CheckReport {
    let mut passed = true;
    let mut rows = Vec::new();
    for scheme in Scheme::ALL {
        let result = noiseless_identity(scheme, pairs);
        match result {
            Ok(ok) => {
                passed &= ok == pairs;
                rows.push(format!("{scheme} {ok}/{pairs}"));
            }
            Err(e) => {
                passed = false;
                rows.push(format!("{scheme} error {e}"));
            }
        }
    }
    CheckReport::new("noiseless identity", passed, rows.join(", "))
}

fn noiseless_identity(scheme: Scheme, pairs: u64) -> Result<u64, HarnessError> {
    let code = if scheme.is_binary() {
        CodeSpec { n: 96, k: 48, dv: 3, dc: 6, alphabet: AlphabetSpec::binary(), seed: 1 }
    } else {
        CodeSpec { n: 48, k: 24, dv: 2, dc: 4, alphabet: AlphabetSpec::gf(3).expect("field"), seed: 1 }
    };
    let mut cfg = SimulationConfig::new(scheme, Modulation::psk_rotated(8), code, ChannelModel::Awgn);
    cfg.noiseless = true;
    let sim = Simulation::new(cfg)?;
    let mut ok = 0;
    for frame in 0..pairs {
        let t = sim.trial(30.0, frame)?;
        let map = t.output.map.clone().unwrap_or_else(|| NcMap::sum(Arc::new(Alphabet::new(AlphabetSpec::binary()))));
        let r2 = broadcast_recover(&t.info.0, &t.estimate, &map, User::One).map_err(HarnessError::runtime)?;
        let r1 = broadcast_recover(&t.info.1, &t.estimate, &map, User::Two).map_err(HarnessError::runtime)?;
        ok += u64::from(t.estimate == t.truth && r2 == t.info.1 && r1 == t.info.0);
    }
    Ok(ok)
}

/// The fast exclusive-law test against quadruple enumeration, for every
/// unit pair over every alphabet with at most 8 elements.
pub fn exclusive_law_check() -> CheckReport {
    let mut specs: Vec<AlphabetSpec> = (1..=3).map(|b| AlphabetSpec::gf(b).expect("field")).collect();
    specs.extend((2..=8).map(|m| AlphabetSpec::ring(m).expect("ring")));
    let mut maps = 0;
    let mut mismatches = Vec::new();
    for spec in specs {
        let al = Alphabet::new(spec);
        for &a in al.unit_values() {
            for &b in al.unit_values() {
                maps += 1;
                if exclusive_law(&al, a, b) != oracle::exclusive_law(spec, a as usize, b as usize) {
                    mismatches.push(format!("{spec} ({a},{b})"));
                }
            }
        }
    }
    let detail = if mismatches.is_empty() { format!("{maps} maps agree") } else { format!("mismatches: {}", mismatches.join(" ")) };
    CheckReport::new("exclusive law", mismatches.is_empty(), detail)
}

/// A small sweep written twice with one worker and once with four; the CSV
/// bytes must match.
pub fn determinism_check(config: &SimulationConfig, dir: &std::path::Path) -> CheckReport {
    let mut config = config.clone();
    config.record_timing = false;
    let mut files = Vec::new();
    for (i, threads) in [1usize, 1, 4].into_iter().enumerate() {
        let path = dir.join(format!("determinism_{i}.csv"));
        let run = Simulation::with_threads(config.clone(), threads).and_then(|s| s.run_sweep()).and_then(|r| write_csv(&r, &path));
        if let Err(e) = run {
            return CheckReport::new("determinism", false, e.to_string());
        }
        files.push(std::fs::read(&path).unwrap_or_default());
    }
    let same = files.windows(2).all(|w| w[0] == w[1]) && !files[0].is_empty();
    CheckReport::new("determinism", same, format!("{} byte CSV, runs identical: {same}", files[0].len()))
}

/// A sweep small enough for the determinism check.
pub fn small_sweep_config() -> SimulationConfig {
    let code = CodeSpec { n: 48, k: 24, dv: 2, dc: 4, alphabet: AlphabetSpec::gf(3).expect("field"), seed: 2 };
    let mut c = SimulationConfig::new(Scheme::NcCd, Modulation::psk_rotated(8), code, ChannelModel::BlockRayleigh { blocks: 2 });
    c.snr_grid = vec![4.0, 8.0, 12.0];
    c.stopping.max_frames = 200;
    c.stopping.min_frame_errors = 20;
    c.decoder.max_iter = 30;
    c
}

/// Reduced-size versions of the checks, quick enough for interactive use.
pub fn toy_suite(dir: &std::path::Path) -> Vec<CheckReport> {
    vec![
        exclusive_law_check(),
        constellation_check(),
        transform_check(1000, 1),
        complexity_check(),
        noiseless_identity_check(10),
        decoder_oracle_check(100, 1),
        determinism_check(&small_sweep_config(), dir),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_checks_pass() {
        assert!(exclusive_law_check().passed);
        assert!(constellation_check().passed);
        let t = transform_check(200, 3);
        assert!(t.passed, "{t}");
        let c = complexity_check();
        assert!(c.passed, "{c}");
        let n = noiseless_identity_check(3);
        assert!(n.passed, "{n}");
    }

    #[test]
    fn noiseless_oracle_frames_agree() {
        for (_, spec, snr, _) in ORACLE_POINTS {
            let code = toy_code(spec);
            let a = cspa_vs_symbol_map(&code, snr, 20, 1, true);
            assert_eq!(a.agree, 20);
            assert_eq!(a.oracle_errors, 0);
        }
    }

    #[test]
    fn report_lines() {
        let r = CheckReport::new("x", false, "y".into());
        assert_eq!(r.to_string(), "FAIL x: y");
    }
}
