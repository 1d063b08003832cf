use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rbacv_bench::{synthetic, university, UNIVERSITY_CONSTRAINTS};
use rbacv_core::differential::{engine_status, oracle_status, run_differential};
use rbacv_core::prover::{emit_goal, EmissionMode};
use rbacv_core::{
    check_all, close_roles, parse_constraints, parse_document, print_canonical, CheckOptions,
    ConstraintSpec, Document, Status,
};

fn closure(c: &mut Criterion) {
    let mut g = c.benchmark_group("close_roles");
    for users in [100, 1_000, 5_000] {
        let p = synthetic(users, 1);
        g.bench_with_input(BenchmarkId::from_parameter(users), &p, |b, p| {
            b.iter(|| close_roles(black_box(p)))
        });
    }
    g.finish();
}

fn fixture_checks(c: &mut Criterion) {
    let p = university();
    let cs = parse_constraints(UNIVERSITY_CONSTRAINTS, &p).unwrap();
    let cp = close_roles(&p);
    c.bench_function("check_all/fixture", |b| {
        b.iter(|| check_all(black_box(&cp), black_box(&cs), CheckOptions::default()).unwrap())
    });
    c.bench_function("oracle/fixture", |b| {
        b.iter(|| {
            cs.iter()
                .filter(|k| oracle_status(black_box(&cp), k) == Status::Violated)
                .count()
        })
    });
    c.bench_function("engine/fixture", |b| {
        b.iter(|| {
            cs.iter()
                .filter(|k| engine_status(black_box(&cp), k) == Status::Violated)
                .count()
        })
    });
}

fn synthetic_checks(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_all/synthetic");
    for users in [100, 1_000] {
        let p = synthetic(users, 2);
        let roles: Vec<_> = p.roles.iter().take(4).cloned().collect();
        let record = p.records.iter().next().unwrap().clone();
        let cs = vec![
            ConstraintSpec::SodRoles {
                conflict: roles.into_iter().collect(),
            },
            ConstraintSpec::RoleCoverage,
            ConstraintSpec::AccessCoverage,
            ConstraintSpec::MinUsersPerRecord {
                record: record.clone(),
                k: 3,
            },
            ConstraintSpec::AccessDiversity {
                record,
                users: 5,
                roles: 3,
            },
        ];
        let cp = close_roles(&p);
        g.bench_with_input(BenchmarkId::from_parameter(users), &cs, |b, cs| {
            b.iter(|| check_all(&cp, cs, CheckOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn emission(c: &mut Criterion) {
    let p = university();
    let cs = parse_constraints(UNIVERSITY_CONSTRAINTS, &p).unwrap();
    let cp = close_roles(&p);
    for (name, mode) in [
        ("enumerate", EmissionMode::Enumerate),
        ("complete", EmissionMode::Complete),
    ] {
        c.bench_function(&format!("emit/{name}"), |b| {
            b.iter(|| {
                cs.iter()
                    .map(|k| emit_goal(k, &cp, mode).render().len())
                    .sum::<usize>()
            })
        });
    }
}

fn parsing(c: &mut Criterion) {
    let p = university();
    let constraints = parse_constraints(UNIVERSITY_CONSTRAINTS, &p).unwrap();
    let text = print_canonical(&Document {
        policy: p,
        constraints,
    });
    c.bench_function("parse_document/fixture", |b| {
        b.iter(|| parse_document(black_box(&text)).unwrap())
    });
}

fn differential(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle_diff");
    g.sample_size(10);
    g.bench_function("100_cases", |b| {
        b.iter(|| run_differential(42, 100, &engine_status))
    });
    g.finish();
}

criterion_group!(
    benches,
    closure,
    fixture_checks,
    synthetic_checks,
    emission,
    parsing,
    differential
);
criterion_main!(benches);
