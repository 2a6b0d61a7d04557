use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use hecke_core::decompose::classical_table;
use hecke_core::field::{PrimeField, Rationals};
use hecke_core::multside::{pittie_steinberg_check, MultContext};
use hecke_core::suites::lkl_engine;
use hecke_core::{AffineWeyl, Hecke};

fn weyl(c: &mut Criterion) {
    let a2 = AffineWeyl::from_label("A2~").unwrap();
    c.bench_function("ball A2 bound 6", |b| b.iter(|| black_box(a2.enumerate_ball(6)).len()));
    let ball = a2.ball_sorted(6);
    c.bench_function("length A2 bound 6", |b| {
        b.iter(|| ball.iter().map(|w| a2.length(black_box(w))).sum::<usize>())
    });
}

fn hecke(c: &mut Criterion) {
    let a2 = AffineWeyl::from_label("A2~").unwrap();
    c.bench_function("kl table A2 bound 5", |b| b.iter(|| classical_table(&a2, "A2", 5).entries.len()));
    let h = Hecke::new(&a2);
    let x = a2.parse("0:01201").unwrap();
    c.bench_function("kl basis element 01201", |b| b.iter(|| h.kl_basis(black_box(&x))));
}

fn lkl(c: &mut Criterion) {
    let mut g = c.benchmark_group("lkl");
    g.sample_size(10);
    let a1 = Arc::new(AffineWeyl::from_label("A1~").unwrap());
    let a2 = Arc::new(AffineWeyl::from_label("A2~").unwrap());
    let p3 = PrimeField::new(3).unwrap();
    g.bench_function("A1 ell 3 bound 6", |b| b.iter(|| lkl_engine(&a1, p3, 6).unwrap().chars.len()));
    g.bench_function("A2 Q bound 3", |b| b.iter(|| lkl_engine(&a2, Rationals, 3).unwrap().chars.len()));
    g.finish();
}

fn multside(c: &mut Criterion) {
    let mut g = c.benchmark_group("multside");
    g.sample_size(10);
    let a2 = AffineWeyl::from_label("A2").unwrap();
    g.bench_function("pittie-steinberg A2", |b| {
        b.iter(|| pittie_steinberg_check(&a2, &Rationals, 2).unwrap().rank)
    });
    let ctx = MultContext::new(&a2, &Rationals, 1).unwrap();
    let (m1, m2) = (ctx.m_module(1), ctx.m_module(2));
    g.bench_function("convolve A2 level 1", |b| b.iter(|| ctx.convolve(&m1, &m2).dim));
    g.bench_function("local torus A2 level 3", |b| {
        b.iter(|| MultContext::new(&a2, &Rationals, 3).unwrap().torus.dim())
    });
    g.finish();
}

criterion_group!(benches, weyl, hecke, lkl, multside);
criterion_main!(benches);
