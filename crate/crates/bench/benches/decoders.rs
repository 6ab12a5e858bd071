use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pnc_bench::{half_rate_code, random_messages, zero_pair_beliefs, zero_word_beliefs};
use pnc_core::algebra::{Alphabet, AlphabetSpec};
use pnc_core::ldpc::{
    decode_cspa, decode_gspa, gspa_check_update_2dfft, gspa_check_update_direct, CheckUpdate, DecoderConfig, OpCounter,
    SymbolGroup,
};

fn check_updates(c: &mut Criterion) {
    let mut g = c.benchmark_group("pair_check_update");
    for bits in 1..=3u8 {
        let group = SymbolGroup::pairs(&Alphabet::new(AlphabetSpec::gf(bits).unwrap()));
        let msgs = random_messages(group.order(), 6, 1);
        let ops = OpCounter::new();
        g.bench_with_input(BenchmarkId::new("direct", group.order()), &msgs, |b, m| {
            b.iter(|| gspa_check_update_direct(&group, m, &ops))
        });
        g.bench_with_input(BenchmarkId::new("fft", group.order()), &msgs, |b, m| {
            b.iter(|| gspa_check_update_2dfft(&group, m, &ops))
        });
    }
    g.finish();
}

fn decoders(c: &mut Criterion) {
    let spec = AlphabetSpec::gf(3).unwrap();
    let code = half_rate_code(spec, 136);
    let cfg = DecoderConfig::default().with_max_iter(10);
    let mut g = c.benchmark_group("decode_gf8_n136");
    g.sample_size(20);
    let sym = zero_word_beliefs(8, code.n(), 0.4);
    let pairs = zero_pair_beliefs(8, code.n(), 0.4);
    for (name, update) in [("direct", CheckUpdate::Direct), ("fft", CheckUpdate::Fft), ("ems16", CheckUpdate::Ems { list_size: 16 })] {
        let cfg = cfg.clone().with_check_update(update);
        if !matches!(update, CheckUpdate::Ems { .. }) {
            g.bench_function(format!("cspa_{name}"), |b| b.iter(|| decode_cspa(&sym, &code, &cfg).unwrap()));
        }
        g.bench_function(format!("gspa_{name}"), |b| b.iter(|| decode_gspa(&pairs, &code, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, check_updates, decoders);
criterion_main!(benches);
