//! Timings for the exact solvers on bundled examples and seeded random markets.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robustfin_core::efficient_set::{aggregator_fixpoint, omega_star_oracle, verify_scheme};
use robustfin_core::fixtures;
use robustfin_core::market::Market;
use robustfin_core::oneperiod_poly::{sa_check, usa_check};
use robustfin_core::priors::{ftap_quasi_sure, PriorSet};
use robustfin_core::random::{self, MarketParams, PolyParams};
use robustfin_core::superhedge::{duality_chain, extension_report, price_pathwise};
use robustfin_core::Rat;

fn instances(n: usize) -> Vec<(Market, PriorSet, Vec<Rat>)> {
    let mut r = ChaCha8Rng::seed_from_u64(42);
    (0..n)
        .map(|_| {
            let m = random::market(&mut r, &MarketParams::default());
            let p = random::priors(&mut r, &m);
            let g = random::claim(&mut r, &m);
            (m, p, g)
        })
        .collect()
}

fn examples(c: &mut Criterion) {
    let gap = fixtures::gap();
    let ind = fixtures::gap_zero_indicator();
    c.bench_function("gap pathwise price", |b| b.iter(|| price_pathwise(&gap, &gap.all_paths(), black_box(&ind.g)).unwrap()));

    let m = fixtures::ex35();
    let scope = fixtures::ex35_scope(&m);
    let limits = fixtures::ex35_limit_points(&m);
    let g = fixtures::ex35_claim(&m).g;
    c.bench_function("ex35 extension report", |b| b.iter(|| extension_report(&m, &scope, black_box(&g), &limits).unwrap()));

    let sausa = fixtures::sausa();
    c.bench_function("sausa SA check", |b| b.iter(|| sa_check(black_box(&sausa)).unwrap()));
}

fn random_markets(c: &mut Criterion) {
    let set = instances(20);
    c.bench_function("omega star oracle x20", |b| {
        b.iter(|| set.iter().map(|(m, _, _)| omega_star_oracle(m, &m.all_paths()).unwrap().retained.len()).sum::<usize>())
    });
    c.bench_function("separator aggregation x20", |b| {
        b.iter(|| set.iter().map(|(m, _, _)| aggregator_fixpoint(&m.without_options(), &m.all_paths()).unwrap().retained.len()).sum::<usize>())
    });
    c.bench_function("partition scheme x20", |b| b.iter(|| set.iter().filter(|(m, _, _)| verify_scheme(m, &m.all_paths()).unwrap().agree).count()));
    c.bench_function("ftap quasi-sure x20", |b| b.iter(|| set.iter().filter(|(m, p, _)| ftap_quasi_sure(m, p).unwrap().all_equivalent).count()));
    c.bench_function("duality chain x20", |b| b.iter(|| set.iter().filter(|(m, p, g)| duality_chain(m, p, g).unwrap().applicable).count()));
}

fn poly_markets(c: &mut Criterion) {
    let mut r = ChaCha8Rng::seed_from_u64(43);
    let set: Vec<_> = (0..20).map(|_| random::poly_market(&mut r, &PolyParams::default())).collect();
    c.bench_function("poly SA x20", |b| b.iter(|| set.iter().filter(|pm| sa_check(pm).unwrap().present).count()));
    c.bench_function("poly USA x20", |b| b.iter(|| set.iter().filter(|pm| usa_check(pm).unwrap().present).count()));
}

criterion_group!(benches, examples, random_markets, poly_markets);
criterion_main!(benches);
