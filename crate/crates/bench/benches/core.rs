use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pfskit_bench::{grid_prior, paired_campaigns, rare_subdomain_model};
use pfskit_core::estimators::posterior_mean;
use pfskit_core::mc::{SeedPolicy, Workers};
use pfskit_core::ref_cert::{certify_ref, smallest_certifiable_epsilon};
use pfskit_core::strategy::{allocate_budget, simulate_debug_campaign, AllocationPolicy, DebugStrategy};
use pfskit_core::{normal_cdf, CampaignOutcome, RefCriterion};

fn normal(c: &mut Criterion) {
    c.bench_function("normal_cdf sweep", |b| {
        b.iter(|| (-800..=800).map(|i| normal_cdf(black_box(i as f64 / 100.0))).sum::<f64>())
    });
}

fn posterior(c: &mut Criterion) {
    let prior = grid_prior(4097);
    let outcome = CampaignOutcome { tests: 2000, failures: 45 };
    c.bench_function("posterior quadrature 4097 points", |b| {
        b.iter(|| posterior_mean(black_box(&outcome), &prior).unwrap())
    });
}

fn certification(c: &mut Criterion) {
    let pair = paired_campaigns();
    let crit = RefCriterion::new(0.02, 0.05).unwrap();
    c.bench_function("certify", |b| b.iter(|| certify_ref(black_box(&pair), &crit).unwrap()));
    c.bench_function("epsilon star", |b| {
        b.iter(|| smallest_certifiable_epsilon(black_box(&pair), 0.05).unwrap())
    });
}

fn campaigns(c: &mut Criterion) {
    let model = rare_subdomain_model();
    let alloc = allocate_budget(1000, 10, &AllocationPolicy::Equal).unwrap();
    let policy = SeedPolicy::new(3);
    let mut g = c.benchmark_group("debug campaign 1000 replicates");
    g.sample_size(20);
    g.bench_function("mile", |b| {
        b.iter(|| simulate_debug_campaign(&model, &DebugStrategy::Mile { tests: 1000 }, 1000, &policy, Workers::Fixed(1)).unwrap())
    });
    g.bench_function("scenario", |b| {
        b.iter(|| simulate_debug_campaign(&model, &DebugStrategy::Scenario(alloc.clone()), 1000, &policy, Workers::Fixed(1)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, normal, posterior, certification, campaigns);
criterion_main!(benches);
