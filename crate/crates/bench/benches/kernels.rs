use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use leaper_bench::{layout, mlp_and_batch, push_toward_target};
use leaper_core::env::CONTROL_DT;
use leaper_core::physics::step;
use leaper_core::planner::{extend, sample_state, PlannerConfig, Tree};
use leaper_core::rng::{stream, Stream};
use leaper_core::ModelKind;
use ndarray::Array2;

fn physics_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("physics_step");
    for id in ["1", "3"] {
        let l = layout(id);
        let params = l.nominal_params();
        let (s, u) = push_toward_target(&l);
        for model in [ModelKind::Quasistatic, ModelKind::Weld, ModelKind::Dynamic] {
            g.bench_function(format!("layout{id}/{}", model.as_str()), |b| {
                b.iter(|| step(model, &l.scene, black_box(&s), &u, CONTROL_DT, &params))
            });
        }
    }
    g.finish();
}

fn planner_extend(c: &mut Criterion) {
    let l = layout("3");
    let params = l.nominal_params();
    let mut g = c.benchmark_group("planner_extend");
    for model in [ModelKind::Quasistatic, ModelKind::Weld] {
        let cfg = PlannerConfig {
            model,
            ..PlannerConfig::default()
        };
        let mut rng = stream(1, Stream::Planner);
        let mut sample_rng = stream(2, Stream::Planner);
        g.bench_function(model.as_str(), |b| {
            b.iter_batched(
                || {
                    let (q, _) = sample_state(&l.scene, &l.goal, 0.0, &mut sample_rng);
                    (Tree::new(l.start.clone()), q)
                },
                |(mut tree, q)| extend(&mut tree, &l.scene, &q, None, &cfg, &params, &mut rng),
                BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

fn mlp(c: &mut Criterion) {
    let (net, x) = mlp_and_batch(&[19, 64, 64, 1], 128, 3);
    let mut g = c.benchmark_group("mlp");
    g.bench_function("forward_batch128", |b| b.iter(|| net.forward_batch(black_box(x.view()))));
    let cache = net.forward_cached(x.view()).unwrap();
    let up = Array2::ones(cache.output.dim());
    g.bench_function("backward_batch128", |b| {
        b.iter(|| net.backward(black_box(&cache), up.view()))
    });
    g.finish();
}

criterion_group!(benches, physics_step, planner_extend, mlp);
criterion_main!(benches);
