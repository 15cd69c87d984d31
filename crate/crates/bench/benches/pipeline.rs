use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use drift_core::enhance::TuningProfile;
use drift_core::fusion::{mertens_fuse, MertensExponents};
use drift_core::lite::compute_global_context;
use drift_core::pipeline::{heuristic_provider, tonemap, tonemap_tiled, PipelineConfig, ToneOutput};
use drift_core::reference::{synthetic_exposures, ReferenceConfig};
use drift_core::scene::synthetic_hdr;
use drift_core::tiling::plan_tiles;
use drift_core::{ColorSpace, Pyramid};
use std::hint::black_box;

fn pyramid(c: &mut Criterion) {
    let mut g = c.benchmark_group("laplacian_round_trip");
    for size in [256usize, 512] {
        let img = synthetic_hdr(size, size, 1).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(size), &img, |b, img| {
            b.iter(|| {
                Pyramid::laplacian(black_box(img), 5)
                    .unwrap()
                    .reconstruct(ColorSpace::LinearRgb)
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn mertens(c: &mut Criterion) {
    let hdr = synthetic_hdr(384, 256, 2).unwrap();
    let ctx = compute_global_context(&hdr).unwrap();
    let frames = synthetic_exposures(&hdr, &ctx, &ReferenceConfig::default()).unwrap();
    c.bench_function("mertens_fuse_384x256", |b| {
        b.iter(|| mertens_fuse(black_box(&frames), MertensExponents::default(), 5).unwrap())
    });
}

fn tone_path(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let hdr = synthetic_hdr(768, 512, 3).unwrap();
    let ctx = compute_global_context(&hdr).unwrap();
    let model = heuristic_provider(&hdr, &ctx, &cfg).unwrap();
    let prof = TuningProfile::default();
    let mut g = c.benchmark_group("tone_path_768x512");
    g.sample_size(20);
    g.bench_function("full_frame", |b| {
        b.iter(|| tonemap(black_box(&hdr), &ctx, &cfg.lite, &model, &prof).unwrap())
    });
    let plan = plan_tiles(768, 512, 4, 4, 50).unwrap();
    g.bench_function("tiled_4x4_overlap_50", |b| {
        b.iter(|| tonemap_tiled(black_box(&hdr), &plan, &ctx, &cfg.lite, &model, &prof, ToneOutput::Enhanced).unwrap())
    });
    g.finish();
}

criterion_group!(benches, pyramid, mertens, tone_path);
criterion_main!(benches);
