use criterion::{black_box, criterion_group, criterion_main, Criterion};
use linkfold::chart::{ChartState, LinkageKind};
use linkfold::energy::lr_function;
use linkfold::flow::{gradient_flow, projected_flow, FlowOptions};
use linkfold::sample::{random_arm, random_cycle_linkage, Rng};

fn bench_straighten(c: &mut Criterion) {
    let mut rng = Rng::new(10);
    let arm = random_arm(&mut rng, 6).unwrap();
    let field = lr_function(LinkageKind::ArmLinkage);
    let opts = FlowOptions { frame_stride: usize::MAX, ..FlowOptions::default() };
    let mut group = c.benchmark_group("flows");
    group.sample_size(10);
    group.bench_function("straighten_arm_m6", |b| {
        b.iter(|| gradient_flow(&field, black_box(&ChartState::Arm(arm.clone())), &opts).unwrap())
    });
    group.finish();
}

fn bench_convexify(c: &mut Criterion) {
    let mut rng = Rng::new(11);
    let cycle = random_cycle_linkage(&mut rng, 6).unwrap();
    let field = lr_function(LinkageKind::CycleLinkage);
    let opts = FlowOptions { frame_stride: usize::MAX, ..FlowOptions::default() };
    let mut group = c.benchmark_group("flows");
    group.sample_size(10);
    group.bench_function("convexify_cycle_m6", |b| {
        b.iter(|| projected_flow(&field, black_box(&cycle), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(flows, bench_straighten, bench_convexify);
criterion_main!(flows);
