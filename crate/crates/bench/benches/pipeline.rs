use criterion::{black_box, criterion_group, criterion_main, Criterion};
use sidplan::framework::{route_bounds, route_objectives, route_outcome, simulate_route, Mode};
use sidplan::noise::{people_annoyed, OperationCounts, SelGrid};
use sidplan::trajectory::{integrate_departure, synthesize_track, VerticalProfile};
use sidplan_bench::demo_scenario;

fn midpoint(lo_hi: &[(f64, f64)]) -> Vec<f64> {
    lo_hi.iter().map(|(l, h)| 0.5 * (l + h)).collect()
}

fn benches(c: &mut Criterion) {
    let s = demo_scenario();
    let ctx = &s.context;
    let sid = &s.sids[0];
    let bounds: Vec<(f64, f64)> = route_bounds(sid, Mode::TwoD, ctx.fleet.len(), ctx.segment_gamma_max)
        .iter()
        .map(|b| (b.lower, b.upper))
        .collect();
    let mut x = midpoint(&bounds);
    x[0] = 2_000.0;
    x[2] = 0.0;
    x[3] = 8_000.0;
    let route = simulate_route(ctx, sid, Mode::TwoD, &x).expect("benchmark route flies");
    let track = route.track.clone();

    c.bench_function("integrate_nadp2", |b| {
        b.iter(|| integrate_departure(&ctx.fleet[0], &ctx.atmosphere, sid, &track, &VerticalProfile::Nadp2, &ctx.departure).unwrap())
    });
    c.bench_function("synthesize_track", |b| {
        let p = sid.track_bounds.decode(&x[..5]);
        b.iter(|| synthesize_track(sid, black_box(&p), sid.track_bounds.min_radius()).unwrap())
    });
    c.bench_function("sel_fields_demo_grid", |b| b.iter(|| route_outcome(ctx, black_box(&route))));
    let outcome = route_outcome(ctx, &route);
    c.bench_function("route_objectives", |b| {
        b.iter(|| route_objectives(ctx, black_box(&outcome), &s.design_counts[0]))
    });
    c.bench_function("people_annoyed_two_routes", |b| {
        let grids: Vec<Vec<&SelGrid>> = vec![outcome.sel.iter().collect(), outcome.sel.iter().collect()];
        let counts = OperationCounts::from_nested(&[s.design_counts[0].clone(), s.design_counts[1].clone()]);
        b.iter(|| people_annoyed(&ctx.population, &grids, black_box(&counts), &ctx.lden).unwrap())
    });
    c.bench_function("evaluate_route_2d", |b| {
        b.iter(|| {
            let r = simulate_route(ctx, sid, Mode::TwoD, black_box(&x)).unwrap();
            route_objectives(ctx, &route_outcome(ctx, &r), &s.design_counts[0])
        })
    });
}

criterion_group! {
    name = pipeline;
    config = Criterion::default().sample_size(20);
    targets = benches
}
criterion_main!(pipeline);
