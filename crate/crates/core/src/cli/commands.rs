use std::collections::BTreeMap;
use std::fmt::Display;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{
    bind_sampled_set, field_err, point_set, table_element, BuiltSystem, ExperimentConfig,
    FunctionSpec, Number, StrategyName, TauRule,
};
use super::{Check, CommandError, CommandKind, Outcome, Settings};
use crate::allocation::{
    classical_kac, classical_kac_mc, kac_function, transport, verify_allocation_identity,
    verify_allocation_identity_mc, Allocation, AllocationError,
};
use crate::estimate::{EstimateError, McSettings};
use crate::exact::{parse_rational, ratio_string};
use crate::generator::{
    finite_orbit_census, generator_partition, reconstruct_and_verify, sampled_orbit_census,
    sweep_out_partition_finite, sweep_out_partition_rotation, GeneratorError,
};
use crate::group::Enumeration;
use crate::relation::{
    first_return_tau, orbit_relation, tau_to_allocation, validate_relation, verify_relation_kac,
    EquivRelation, RelationError, TauMap,
};
use crate::system::{Action, FiniteSystem, PointSet, SampledKind, SampledSet, SampledSystem};
use crate::voronoi::{
    certified_norm_lex_cell, hitting_set, is_almost_convex, render_svg, sandwich_check,
    voronoi_cells, HittingSet, LatticeCell, VoronoiCells, VoronoiError,
};

type Result<T> = std::result::Result<T, CommandError>;

/// Tolerance of statistical checks, in standard errors.
const SIGMAS: f64 = 3.0;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Attaches a config field to a library error.
fn at(field: &str) -> impl Fn(&dyn Display) -> CommandError + '_ {
    move |e| CommandError::Config(field_err(field, e))
}

fn alloc_err(field: &str) -> impl Fn(AllocationError) -> CommandError + '_ {
    move |e| {
        if e.is_abstention() {
            CommandError::Abstain(e.to_string())
        } else {
            CommandError::Config(field_err(field, e))
        }
    }
}

fn estimate_err(e: EstimateError) -> CommandError {
    match e {
        EstimateError::TooManyAbstentions { .. } => CommandError::Abstain(e.to_string()),
        other => CommandError::Config(field_err("run.samples", other)),
    }
}

fn voronoi_err(field: &str) -> impl Fn(VoronoiError) -> CommandError + '_ {
    move |e| match e {
        VoronoiError::Inconclusive(why) => CommandError::Abstain(why),
        other => CommandError::Config(field_err(field, other)),
    }
}

fn epsilon(settings: &Settings) -> Result<BigRational> {
    parse_rational(&settings.epsilon).map_err(|e| at("run.epsilon")(&e))
}

pub(super) fn dispatch(
    kind: CommandKind,
    cfg: &ExperimentConfig,
    settings: &Settings,
) -> Result<Outcome> {
    if kind == CommandKind::RelationCheck && cfg.system.is_none() {
        return relation_check(cfg, None);
    }
    if kind == CommandKind::VoronoiCells && cfg.hitting_set.is_some() {
        return voronoi_explicit(cfg);
    }
    let system = cfg.system_spec()?.build(settings.seed)?;
    match (kind, &system) {
        (CommandKind::VerifyKac, BuiltSystem::Finite(fs)) => verify_kac_finite(cfg, fs),
        (CommandKind::VerifyKac, BuiltSystem::Sampled(ss)) => verify_kac_sampled(cfg, ss, settings),
        (CommandKind::VerifyAllocation, BuiltSystem::Finite(fs)) => {
            verify_allocation_finite(cfg, fs, settings)
        }
        (CommandKind::VerifyAllocation, BuiltSystem::Sampled(ss)) => {
            verify_allocation_sampled(cfg, ss, settings)
        }
        (CommandKind::KacFunction, BuiltSystem::Finite(fs)) => kac_function_cmd(cfg, fs, settings),
        (CommandKind::VoronoiCells, BuiltSystem::Finite(fs)) => voronoi_system(cfg, fs, settings),
        (CommandKind::RelationCheck, BuiltSystem::Finite(fs)) => relation_check(cfg, Some(fs)),
        (CommandKind::GeneratorDemo, BuiltSystem::Finite(fs)) => {
            generator_finite(cfg, fs, settings)
        }
        (CommandKind::GeneratorDemo, BuiltSystem::Sampled(ss)) => generator_sampled(ss, settings),
        (CommandKind::Census, BuiltSystem::Finite(fs)) => Ok(Outcome {
            exact: Some(to_value(&finite_orbit_census(fs))),
            ..Outcome::default()
        }),
        (CommandKind::Census, BuiltSystem::Sampled(ss)) => Ok(Outcome {
            exact: Some(to_value(&sampled_orbit_census(ss))),
            ..Outcome::default()
        }),
        (kind, BuiltSystem::Sampled(_)) => Err(field_err(
            "system.kind",
            format!("`{}` needs a finite system", kind.name()),
        )
        .into()),
    }
}

fn finite_target(cfg: &ExperimentConfig, fs: &FiniteSystem) -> Result<PointSet> {
    let spec = cfg
        .target
        .as_ref()
        .ok_or_else(|| field_err("target", "missing section"))?;
    Ok(spec.finite(fs, "target")?)
}

fn sampled_target(cfg: &ExperimentConfig, ss: &SampledSystem) -> Result<SampledSet> {
    let spec = cfg
        .target
        .as_ref()
        .ok_or_else(|| field_err("target", "missing section"))?;
    Ok(bind_sampled_set(spec.sampled("target")?, ss, "target")?)
}

fn function_spec(cfg: &ExperimentConfig) -> FunctionSpec {
    cfg.function.clone().unwrap_or(FunctionSpec {
        constant: Some(Number::Int(1)),
        ..FunctionSpec::default()
    })
}

fn mc_settings(settings: &Settings) -> McSettings {
    McSettings::new(settings.samples, settings.seed)
}

fn verify_kac_finite(cfg: &ExperimentConfig, fs: &FiniteSystem) -> Result<Outcome> {
    let target = finite_target(cfg, fs)?;
    if !fs.group().is_integers() {
        return Err(field_err("system.group", "return times need a Z-action").into());
    }
    let report = classical_kac(fs, &target).map_err(alloc_err("target"))?;
    let checks = vec![
        Check::new("target sweeps out", report.sweep_out),
        Check::new("integral of return time over target is 1", report.holds)
            .with_detail(ratio_string(&report.integral)),
    ];
    Ok(Outcome {
        exact: Some(to_value(&report)),
        checks,
        ..Outcome::default()
    })
}

fn verify_kac_sampled(
    cfg: &ExperimentConfig,
    ss: &SampledSystem,
    settings: &Settings,
) -> Result<Outcome> {
    let target = sampled_target(cfg, ss)?;
    if target.measure().is_zero() {
        return Err(field_err("target", "target has measure zero").into());
    }
    let est = classical_kac_mc(ss, &target, &mc_settings(settings), settings.budget).map_err(
        |e| match e {
            AllocationError::Estimate(inner) => estimate_err(inner),
            other => alloc_err("target")(other),
        },
    )?;
    let check = Check::new(
        "estimate within 3 standard errors of 1",
        est.within(1.0, SIGMAS),
    )
    .with_detail(format!("{} +/- {}", est.mean, est.stderr));
    Ok(Outcome {
        exact: Some(json!({ "target_measure": ratio_string(&target.measure()) })),
        estimated: Some(json!({ "integral_of_return_time": est })),
        checks: vec![check],
        ..Outcome::default()
    })
}

fn finite_allocation<'s>(
    cfg: &ExperimentConfig,
    fs: &'s FiniteSystem,
    target: PointSet,
    settings: &Settings,
) -> Result<Allocation<'s, FiniteSystem>> {
    let strategy = cfg.allocation.as_ref().map(|a| &a.strategy);
    match strategy {
        None | Some(StrategyName::Greedy) => {
            Allocation::standard(fs, target, settings.budget).map_err(alloc_err("target"))
        }
        Some(StrategyName::Forward) => Allocation::forward_hitting(fs, target, settings.budget)
            .map_err(alloc_err("allocation.strategy")),
        Some(StrategyName::Table) => {
            let rows = cfg
                .allocation
                .as_ref()
                .and_then(|a| a.table.as_ref())
                .ok_or_else(|| field_err("allocation.table", "missing for strategy `table`"))?;
            let table = rows
                .iter()
                .enumerate()
                .map(|(i, c)| table_element(fs.group(), c, &format!("allocation.table[{i}]")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Allocation::from_table(fs, target, table).map_err(alloc_err("allocation.table"))
        }
    }
}

fn verify_allocation_finite(
    cfg: &ExperimentConfig,
    fs: &FiniteSystem,
    settings: &Settings,
) -> Result<Outcome> {
    let target = finite_target(cfg, fs)?;
    let f = function_spec(cfg).finite(fs.n_points())?;
    let alloc = finite_allocation(cfg, fs, target, settings)?;
    let table = alloc.table().map_err(alloc_err("allocation"))?;
    let kappa: Vec<Option<Vec<i64>>> = (0..fs.n_points())
        .map(|x| table.kappa(x).map(|g| g.coords().to_vec()))
        .collect();
    let transported = transport(&alloc, &f).map_err(alloc_err("function"))?;
    let report = verify_allocation_identity(&alloc, &f).map_err(alloc_err("function"))?;
    let check = Check::new(
        "integral of transported f over target equals integral of f",
        report.equal,
    );
    Ok(Outcome {
        exact: Some(json!({
            "kappa": kappa,
            "transported": transported,
            "identity": report,
        })),
        checks: vec![check],
        ..Outcome::default()
    })
}

fn verify_allocation_sampled(
    cfg: &ExperimentConfig,
    ss: &SampledSystem,
    settings: &Settings,
) -> Result<Outcome> {
    let target = sampled_target(cfg, ss)?;
    let f = function_spec(cfg).sampled(ss)?;
    let alloc = match cfg.allocation.as_ref().map(|a| &a.strategy) {
        None | Some(StrategyName::Greedy) => Allocation::standard(ss, target, settings.budget),
        Some(StrategyName::Forward) => Allocation::forward_hitting(ss, target, settings.budget),
        Some(StrategyName::Table) => {
            return Err(field_err("allocation.strategy", "tables need a finite system").into())
        }
    }
    .map_err(alloc_err("allocation"))?;
    let report = verify_allocation_identity_mc(&alloc, |p| f.eval(p), &mc_settings(settings))
        .map_err(|e| match e {
            AllocationError::Estimate(inner) => estimate_err(inner),
            other => alloc_err("allocation")(other),
        })?;
    let exact_rhs = f.integral();
    let checks = vec![
        Check::new("both sides agree within 3 standard errors", report.overlap),
        Check::new(
            "transported estimate within 3 standard errors of the exact integral",
            report.lhs.within(exact_rhs, SIGMAS),
        )
        .with_detail(format!(
            "{} +/- {} vs {exact_rhs}",
            report.lhs.mean, report.lhs.stderr
        )),
    ];
    Ok(Outcome {
        exact: Some(json!({ "integral_of_f": exact_rhs })),
        estimated: Some(to_value(&report)),
        checks,
        ..Outcome::default()
    })
}

fn kac_function_cmd(
    cfg: &ExperimentConfig,
    fs: &FiniteSystem,
    settings: &Settings,
) -> Result<Outcome> {
    let target = finite_target(cfg, fs)?;
    let alloc = finite_allocation(cfg, fs, target.clone(), settings)?;
    let kf = kac_function(&alloc).map_err(alloc_err("allocation"))?;
    let partition = kf.partition_check(fs).map_err(alloc_err("allocation"))?;
    let expected = kf.expected_cell_size(fs);
    let tail = kf.tail_bound_check(fs, settings.tail_n_max);

    let mut tail_csv = csv::Writer::from_writer(Vec::new());
    tail_csv
        .write_record(["n", "measure", "bound", "holds"])
        .expect("in-memory csv");
    for row in &tail.rows {
        tail_csv
            .write_record([
                row.n.to_string(),
                ratio_string(&row.measure),
                ratio_string(&row.bound),
                row.holds.to_string(),
            ])
            .expect("in-memory csv");
    }
    let mut histogram: BTreeMap<usize, (usize, BigRational)> = BTreeMap::new();
    for x in target.iter().filter(|&x| !fs.is_null(x)) {
        let size = kf.cell_size(x).unwrap_or(0);
        let entry = histogram.entry(size).or_insert((0, BigRational::zero()));
        entry.0 += 1;
        entry.1 += fs.mass(x);
    }
    let mut hist_csv = csv::Writer::from_writer(Vec::new());
    hist_csv
        .write_record(["cell_size", "points", "mass"])
        .expect("in-memory csv");
    for (size, (count, mass)) in &histogram {
        hist_csv
            .write_record([size.to_string(), count.to_string(), ratio_string(mass)])
            .expect("in-memory csv");
    }
    let csv_text =
        |w: csv::Writer<Vec<u8>>| String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");

    let shapes: Vec<Vec<Vec<i64>>> = kf.shapes().iter().map(|c| c.coords()).collect();
    let phi: Vec<Option<usize>> = (0..fs.n_points()).map(|x| kf.phi(x)).collect();
    let checks = vec![
        Check::new("translates partition the space", partition.holds),
        Check::new("expected cell size is 1", expected.is_one())
            .with_detail(ratio_string(&expected)),
        Check::new("tail bound holds for every n", tail.holds),
    ];
    let mut exact = json!({
        "shapes": shapes,
        "phi": phi,
        "partition": partition,
        "expected_cell_size": ratio_string(&expected),
        "tail_bound": tail,
    });
    if settings.universal_shapes {
        let e = Enumeration::standard(fs.group())
            .map_err(|err| field_err("system.group", err.to_string()))?;
        let indices = kf.universal_indices(&e).map_err(alloc_err("allocation"))?;
        exact["universal_indices"] =
            json!(indices.iter().map(|i| i.to_string()).collect::<Vec<_>>());
    }
    Ok(Outcome {
        exact: Some(exact),
        checks,
        artifacts: vec![
            ("tail_bounds.csv".into(), csv_text(tail_csv)),
            ("cell_sizes.csv".into(), csv_text(hist_csv)),
        ],
        ..Outcome::default()
    })
}

fn almost_convex_check(b: &LatticeCell) -> Result<Check> {
    let ok = is_almost_convex(b).map_err(voronoi_err("hitting_set"))?;
    Ok(Check::new("allocation cell is almost convex", ok))
}

fn voronoi_outcome(
    w: &HittingSet,
    cells: VoronoiCells,
    b: Option<LatticeCell>,
    mut checks: Vec<Check>,
) -> Result<Outcome> {
    let mut artifacts = Vec::new();
    if let Some(svg) = render_svg(w, &cells, b.as_ref()) {
        artifacts.push(("cells.svg".to_string(), svg));
    }
    if !cells.is_bounded() {
        checks.push(Check::skipped("sandwich", "closed cell is unbounded"));
    }
    Ok(Outcome {
        exact: Some(json!({
            "hitting_set": w,
            "cells": cells,
            "allocation_cell": b,
        })),
        checks,
        artifacts,
        ..Outcome::default()
    })
}

fn voronoi_explicit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let spec = cfg.hitting_set.as_ref().expect("checked by dispatch");
    let dim = spec.vectors.first().map(Vec::len).unwrap_or(0);
    let w = HittingSet::explicit(dim, spec.vectors.iter().cloned())
        .map_err(voronoi_err("hitting_set.vectors"))?;
    let cells = voronoi_cells(&w).map_err(voronoi_err("hitting_set.vectors"))?;
    let mut checks = Vec::new();
    let mut b = None;
    if cells.is_bounded() {
        let cell = certified_norm_lex_cell(&w).map_err(voronoi_err("hitting_set.vectors"))?;
        let sandwich = sandwich_check(&w, &cell).map_err(voronoi_err("hitting_set.vectors"))?;
        checks.push(Check::new(
            "strict cell <= allocation cell <= closed cell",
            sandwich.holds,
        ));
        checks.push(almost_convex_check(&cell)?);
        b = Some(cell);
    }
    voronoi_outcome(&w, cells, b, checks)
}

fn voronoi_system(
    cfg: &ExperimentConfig,
    fs: &FiniteSystem,
    settings: &Settings,
) -> Result<Outcome> {
    if !fs.group().is_lattice() {
        return Err(field_err("system.group", "Voronoi cells need a Z^d action").into());
    }
    let target = finite_target(cfg, fs)?;
    let x = match cfg.run.point {
        Some(x) => x,
        None => target
            .iter()
            .next()
            .ok_or_else(|| field_err("target", "empty target"))?,
    };
    if !target.contains(x) {
        return Err(field_err("run.point", format!("point {x} is not in the target")).into());
    }
    let w = hitting_set(fs, &target, &x, settings.radius).map_err(voronoi_err("target"))?;
    let cells = voronoi_cells(&w).map_err(voronoi_err("run.radius"))?;
    let alloc = Allocation::standard(fs, target, settings.budget).map_err(alloc_err("target"))?;
    let cell = alloc.cell(&x).map_err(alloc_err("target"))?;
    let b = LatticeCell::new(w.dim(), cell.coords()).map_err(voronoi_err("target"))?;
    let mut checks = vec![almost_convex_check(&b)?];
    if cells.is_bounded() {
        let sandwich = sandwich_check(&w, &b).map_err(voronoi_err("run.radius"))?;
        checks.insert(
            0,
            Check::new(
                "strict cell <= allocation cell <= closed cell",
                sandwich.holds,
            ),
        );
    }
    voronoi_outcome(&w, cells, Some(b), checks)
}

fn relation_err(field: &str) -> impl Fn(RelationError) -> CommandError + '_ {
    move |e| match e {
        RelationError::Allocation(inner) => alloc_err(field)(inner),
        other => CommandError::Config(field_err(field, other)),
    }
}

fn relation_check(cfg: &ExperimentConfig, fs: Option<&FiniteSystem>) -> Result<Outcome> {
    let spec = cfg.relation.clone().unwrap_or_default();
    let explicit = spec.classes.is_some();
    let rel = match (&spec.classes, fs) {
        (Some(classes), _) => {
            let masses = spec
                .masses
                .as_ref()
                .ok_or_else(|| field_err("relation.masses", "required with `relation.classes`"))?
                .iter()
                .enumerate()
                .map(|(i, m)| m.rational(&format!("relation.masses[{i}]")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            EquivRelation::new(masses, classes.clone()).map_err(relation_err("relation"))?
        }
        (None, Some(fs)) => orbit_relation(fs),
        (None, None) => {
            return Err(field_err("relation", "give `relation.classes` or a system").into())
        }
    };
    let n = rel.n_points();
    let tau = match (&spec.tau, &spec.tau_rule) {
        (Some(t), None) => TauMap(t.clone()),
        (None, None) | (None, Some(TauRule::Identity)) => TauMap::identity(n),
        (None, Some(TauRule::FirstReturn)) => {
            let fs =
                fs.ok_or_else(|| field_err("relation.tau_rule", "`first_return` needs a system"))?;
            let target = finite_target(cfg, fs)?;
            first_return_tau(fs, &target).map_err(relation_err("target"))?
        }
        (Some(_), Some(_)) => {
            return Err(field_err("relation.tau", "give one of `tau` and `tau_rule`").into());
        }
    };
    let f = function_spec(cfg).finite(n)?;

    let verdict = validate_relation(&rel);
    let mut checks = vec![Check::new("relation preserves the measure", verdict.valid)];
    if !verdict.valid {
        return Ok(Outcome {
            exact: Some(json!({ "relation": rel, "validity": verdict })),
            checks,
            ..Outcome::default()
        });
    }
    let report = verify_relation_kac(&rel, &tau, &f).map_err(relation_err("relation.tau"))?;
    checks.push(Check::new(
        "integral of f equals integral of transported f",
        report.equal,
    ));
    checks.push(
        Check::new("expected preimage count is 1", report.preimage_holds)
            .with_detail(ratio_string(&report.preimage_integral)),
    );
    let mut bridge = Value::Null;
    match fs {
        Some(fs) if !explicit => {
            let (target, alloc) =
                tau_to_allocation(fs, &tau).map_err(relation_err("relation.tau"))?;
            let via_alloc = transport(&alloc, &f).map_err(alloc_err("relation.tau"))?;
            let direct = tau.transport(&f);
            let identity =
                verify_allocation_identity(&alloc, &f).map_err(alloc_err("relation.tau"))?;
            checks.push(Check::new(
                "allocation transport matches relation transport",
                via_alloc == direct && identity.lhs == report.integral_f_tau,
            ));
            bridge = json!({ "target": target, "identity": identity });
        }
        _ => checks.push(Check::skipped(
            "allocation bridge",
            "explicit relation without an orbit system",
        )),
    }
    Ok(Outcome {
        exact: Some(json!({
            "relation": rel,
            "tau": tau.0,
            "validity": verdict,
            "kac": report,
            "bridge": bridge,
        })),
        checks,
        ..Outcome::default()
    })
}

fn generator_err(field: &str) -> impl Fn(GeneratorError) -> CommandError + '_ {
    move |e| match e {
        GeneratorError::Allocation(inner) => alloc_err(field)(inner),
        other => CommandError::Config(field_err(field, other)),
    }
}

fn generator_finite(
    cfg: &ExperimentConfig,
    fs: &FiniteSystem,
    settings: &Settings,
) -> Result<Outcome> {
    let spec = cfg.generator.clone().unwrap_or_default();
    let mut checks = Vec::new();
    let mut partition = Value::Null;
    let targets: Vec<PointSet> = match &spec.targets {
        Some(lists) => lists
            .iter()
            .enumerate()
            .map(|(i, pts)| point_set(fs, pts, &format!("generator.targets[{i}]")))
            .collect::<std::result::Result<_, _>>()?,
        None => {
            let eps = epsilon(settings)?;
            let p = sweep_out_partition_finite(fs, &eps).map_err(generator_err("run.epsilon"))?;
            checks.push(Check::new(
                "every piece sweeps out with measure at most epsilon",
                p.pieces
                    .iter()
                    .zip(&p.measures)
                    .all(|(a, m)| fs.is_sweep_out(a) && (*m <= eps || !p.warnings.is_empty())),
            ));
            partition = to_value(&p);
            p.pieces
        }
    };
    let sets: Vec<PointSet> = match &spec.sets {
        Some(lists) => lists
            .iter()
            .enumerate()
            .map(|(i, pts)| point_set(fs, pts, &format!("generator.sets[{i}]")))
            .collect::<std::result::Result<_, _>>()?,
        None => vec![PointSet::empty(fs.n_points()); targets.len()],
    };
    let allocations = targets
        .iter()
        .enumerate()
        .map(|(i, a)| {
            Allocation::standard(fs, a.clone(), settings.budget)
                .map_err(|e| alloc_err(&format!("generator.targets[{i}]"))(e))
        })
        .collect::<Result<Vec<_>>>()?;
    let gp = generator_partition(fs, &allocations, &sets).map_err(generator_err("generator"))?;
    let mut reconstructions = Vec::new();
    for n in 1..=sets.len() {
        let r =
            reconstruct_and_verify(fs, &gp, &sets, n).map_err(generator_err("generator.sets"))?;
        checks.push(Check::new(
            format!("set {n} is reconstructed from the blocks"),
            r.holds,
        ));
        reconstructions.push(r);
    }
    Ok(Outcome {
        exact: Some(json!({
            "sweep_out_partition": partition,
            "targets": targets,
            "blocks": gp,
            "reconstructions": reconstructions,
        })),
        checks,
        ..Outcome::default()
    })
}

fn generator_sampled(ss: &SampledSystem, settings: &Settings) -> Result<Outcome> {
    if !matches!(ss.kind(), SampledKind::Rotation { .. }) {
        return Err(field_err(
            "system.kind",
            "sampled sweep-out partitions need a rotation",
        )
        .into());
    }
    let eps = epsilon(settings)?;
    let p = sweep_out_partition_rotation(ss, &eps, settings.n_max)
        .map_err(generator_err("run.epsilon"))?;
    let mut checks = Vec::new();
    if p.warnings.is_empty() {
        let two = BigRational::from_integer(BigInt::from(2));
        let mut expected = eps.clone();
        let mut quantiles_ok = true;
        for m in p.measures.iter().take(settings.n_max) {
            expected /= &two;
            quantiles_ok &= *m == expected;
        }
        checks.push(Check::new(
            "piece n has measure epsilon / 2^n",
            quantiles_ok,
        ));
        checks.push(Check::new(
            "residual is epsilon / 2^n_max",
            p.residual_mass == expected,
        ));
        checks.push(Check::new(
            "every piece has positive measure at most epsilon",
            p.measures.iter().all(|m| m.is_positive() && *m <= eps),
        ));
    }
    let total: BigRational = p.measures.iter().sum();
    checks.push(Check::new(
        "measures and residual sum to 1",
        (total + &p.residual_mass).is_one(),
    ));
    Ok(Outcome {
        exact: Some(to_value(&p)),
        checks,
        ..Outcome::default()
    })
}
