//! Criterion benchmarks for the hot paths of the pipeline: conductivity
//! evaluation, the coincident noise tensor, one Casimir–Polder point, and
//! a full WKB lifetime from a prebuilt potential table.

use criterion::{criterion_group, criterion_main, Criterion};
use std::f64::consts::PI;
use std::hint::black_box;

use cntrap_core::casimir::{cp_potential, CpTable, PolarizabilityModel};
use cntrap_core::green::{self, Shell};
use cntrap_core::material::{self, NanotubeSpec};
use cntrap_core::trap::{AtomSpec, TrapConfig};
use cntrap_core::tunneling;
use num_complex::Complex64;

fn bench_conductivity(c: &mut Criterion) {
    let spec = NanotubeSpec::nine_zero();
    let omega0 = 2.0 * PI * 70e3;
    c.bench_function("sigma_axial_calibrated", |b| {
        b.iter(|| material::sigma_axial(black_box(&spec), black_box(omega0)).unwrap())
    });
}

fn bench_coincident_noise(c: &mut Criterion) {
    let spec = NanotubeSpec::nine_zero();
    let omega0 = 2.0 * PI * 70e3;
    let sigma = material::sigma_sheet_real(&spec, omega0).unwrap();
    let shell = Shell {
        radius: spec.r_cn,
        sigma_sheet: sigma,
    };
    c.bench_function("im_curlcurl_coincident_150nm", |b| {
        b.iter(|| {
            green::im_curlcurl_coincident(black_box(omega0), black_box(150e-9 + spec.r_cn), &shell)
                .unwrap()
        })
    });
}

fn bench_cp_point(c: &mut Criterion) {
    let spec = NanotubeSpec::nine_zero();
    let model = PolarizabilityModel::from_atom(&AtomSpec::rb87());
    c.bench_function("cp_potential_150nm", |b| {
        b.iter(|| cp_potential(black_box(&spec), black_box(&model), black_box(150e-9)).unwrap())
    });
}

fn bench_wkb_lifetime(c: &mut Criterion) {
    let spec = NanotubeSpec::nine_zero();
    let atom = AtomSpec::rb87();
    let model = PolarizabilityModel::from_atom(&atom);
    let table = CpTable::build(&spec, &model, 2.5e-9, 5e-7, 40).unwrap();
    let trap = TrapConfig::from_trap_distance(
        20e-6,
        150e-9 + spec.r_cn,
        atom.offset_field_for_f0(),
    )
    .unwrap();
    c.bench_function("wkb_lifetime_150nm", |b| {
        b.iter(|| {
            let p = tunneling::build_profile(
                black_box(&trap),
                &atom,
                &spec,
                Some(&table),
                800,
            )
            .unwrap();
            tunneling::wkb_lifetime(&p, &atom).unwrap()
        })
    });
}

fn bench_boundary_solve(c: &mut Criterion) {
    let shell = Shell {
        radius: 3.52e-10,
        sigma_sheet: Complex64::new(1.19e9, 11.5),
    };
    let omega = 2.0 * PI * 70e3;
    let h = 0.7 * omega / 299_792_458.0;
    c.bench_function("boundary_solve_n1", |b| {
        b.iter(|| green::solve_boundary_system(1, black_box(h), omega, &shell).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_conductivity,
        bench_coincident_noise,
        bench_cp_point,
        bench_wkb_lifetime,
        bench_boundary_solve
}
criterion_main!(benches);
