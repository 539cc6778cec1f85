use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use matchlab_bench::random_markets;
use matchlab_core::exante::{exact_distribution_at, monte_carlo_correlated, CorrelatedUtilityConfig, ExactOptions};
use matchlab_core::{run_da, run_tcdm, Mechanism, RoundBudget};

fn mechanisms(c: &mut Criterion) {
    let markets = random_markets(200, 6, 7);
    c.bench_function("da/200 markets", |b| {
        b.iter(|| {
            markets
                .iter()
                .map(|m| run_da(black_box(m)).num_assigned())
                .sum::<usize>()
        })
    });
    for t in [1u32, 3] {
        c.bench_with_input(BenchmarkId::new("tcdm/200 markets", t), &t, |b, &t| {
            b.iter(|| {
                markets
                    .iter()
                    .map(|m| {
                        run_tcdm(black_box(m), RoundBudget::Limited(t))
                            .final_matching
                            .num_assigned()
                    })
                    .sum::<usize>()
            })
        });
    }
}

fn exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact n=m=4");
    group.sample_size(10);
    let opts = ExactOptions::default();
    for (name, mech) in [("tcdm t=2", Mechanism::Tcdm { rounds: 2 }), ("da", Mechanism::Da)] {
        group.bench_function(name, |b| {
            b.iter(|| exact_distribution_at(4, &[1, 1, 1, 1], mech, 4, &opts).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = CorrelatedUtilityConfig {
        delta: 0.6,
        num_sims: 2000,
        seed: 1,
    };
    c.bench_function("monte carlo 2000 sims", |b| {
        b.iter(|| monte_carlo_correlated(4, &[1, 1, 1, 1], 2, black_box(&cfg)).unwrap())
    });
}

criterion_group!(benches, mechanisms, exact, monte_carlo);
criterion_main!(benches);
