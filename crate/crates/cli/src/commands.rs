use std::path::{Path, PathBuf};

use sbd_core::bench::{bench_csv, desk_instances, run_bench, BenchInstance};
use sbd_core::commutant::spectrum_tail_csv;
use sbd_core::export::{dense_csv, triplets};
use sbd_core::graph::{load_edge_list, LoadOptions};
use sbd_core::partition::{check_equitable, coarsest_equitable_partition, parse_cells};
use sbd_core::pipeline::{run_pipeline, PipelineResult};
use sbd_core::sensitivity::{rotated_entry_counts, sensitivity};
use sbd_core::stability::{all_exponents, exponents_csv, preset, quotient_integrate, LyapunovOptions};
use sbd_core::transform::block_report;
use sbd_core::{EdgeParam, Network, Partition, SbdError};
use serde::Serialize;
use serde_json::Value;

use crate::config::*;

const DEGENERATE_NOTE: &str =
    "single cluster: every node is equivalent, so the analysis degenerates to plain SBD of the adjacency matrix";

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Partition(g) => cmd_partition(&g),
        Command::Transform(a) => cmd_transform(&a),
        Command::Stability(a) => cmd_stability(&a, false),
        Command::Sensitivity(a) => cmd_sensitivity(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Pipeline(a) => cmd_stability(&a, true),
    }
}

/// Network, partition and the raw file contents that went into them.
struct Loaded {
    net: Network,
    part: Partition,
    input_text: String,
    cells_text: Option<String>,
}

fn load(g: &GraphArgs) -> CliResult<Loaded> {
    let input_text = read_file(&g.input)?;
    let net = load_edge_list(&input_text, LoadOptions { base: g.base as usize, weighted: !g.unweighted })?;
    let (part, cells_text) = match &g.cells {
        Some(p) => {
            let text = read_file(p)?;
            let part = parse_cells(&text, &net)?;
            if let Some(w) = check_equitable(&net, part.cells())?.witness {
                return Err(SbdError::NotEquitable(w).into());
            }
            (part, Some(text))
        }
        None => (coarsest_equitable_partition(&net), None),
    };
    Ok(Loaded { net, part, input_text, cells_text })
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

/// JSON object holding a `meta` field next to the fields of `body`.
fn with_meta(meta: &Meta, body: impl Serialize) -> CliResult<String> {
    let mut obj = serde_json::Map::new();
    obj.insert("meta".into(), serde_json::to_value(meta).map_err(SbdError::from)?);
    match serde_json::to_value(body).map_err(SbdError::from)? {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("data".into(), other);
        }
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).map_err(SbdError::from)?;
    s.push('\n');
    Ok(s)
}

/// Writes `files` into `out`, or prints the first one when there is no output directory.
fn emit(out: Option<&PathBuf>, files: &[(&str, String)]) -> CliResult<()> {
    match out {
        Some(dir) => {
            ensure_dir(dir)?;
            for (name, text) in files {
                let path = dir.join(name);
                write_file(&path, text)?;
                println!("wrote {}", path.display());
            }
        }
        None => print!("{}", files[0].1),
    }
    Ok(())
}

#[derive(Serialize)]
struct PartitionOut {
    #[serde(rename = "C")]
    c: usize,
    cells: Vec<Vec<String>>,
    sizes: Vec<usize>,
    source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

fn partition_json(meta: &Meta, l: &Loaded) -> CliResult<String> {
    let r = l.part.report(&l.net);
    with_meta(
        meta,
        PartitionOut {
            c: r.c,
            cells: r.cells,
            sizes: r.sizes,
            source: if l.cells_text.is_some() { "cells_file" } else { "coarsest" },
            note: (r.c == 1).then_some(DEGENERATE_NOTE),
        },
    )
}

fn cmd_partition(g: &GraphArgs) -> CliResult<()> {
    let l = load(g)?;
    let cfg = RunConfig::new("partition", 0).with_graph(g, &l.input_text, l.cells_text.as_deref());
    let json = partition_json(&cfg.meta(), &l)?;
    emit(g.out.as_ref(), &[("partition.json", json)])
}

#[derive(Serialize)]
struct CommutantInfo {
    n_rows: usize,
    n_cols: usize,
    dim: usize,
    attempt: usize,
    min_rel_gap: Option<f64>,
    fully_degenerate: bool,
}

#[derive(Serialize)]
struct TransformOut {
    #[serde(flatten)]
    report: sbd_core::transform::BlockReport,
    commutant: CommutantInfo,
    /// Transformed coordinate order: cluster of each column of T.
    coord_clusters: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

fn transform_files(meta: &Meta, l: &Loaded, r: &PipelineResult) -> CliResult<Vec<(&'static str, String)>> {
    let report = block_report(&r.ct, &r.ind)?;
    let gap = r.element.min_rel_gap;
    let out = TransformOut {
        report,
        commutant: CommutantInfo {
            n_rows: r.n_rows,
            n_cols: r.n_cols,
            dim: r.basis.dim(),
            attempt: r.element.attempt,
            min_rel_gap: gap.is_finite().then_some(gap),
            fully_degenerate: r.element.fully_degenerate,
        },
        coord_clusters: r.ct.coord_clusters.clone(),
        note: (l.part.n_cells() == 1).then_some(DEGENERATE_NOTE),
    };
    let t = r.ct.t_original_order(&l.part);
    let tol = r.ct.eps_zero;
    let c = meta.comment();
    Ok(vec![
        ("block_report.json", with_meta(meta, out)?),
        ("T.csv", format!("{c}{}", dense_csv(&t))),
        ("B.csv", format!("{c}{}", dense_csv(&r.ct.b))),
        ("T_triplets.txt", format!("{c}{}", triplets(&t, tol))),
        ("B_triplets.txt", format!("{c}{}", triplets(&r.ct.b, tol))),
        ("sts_tail.csv", format!("{c}{}", spectrum_tail_csv(&r.basis))),
    ])
}

fn cmd_transform(a: &TransformArgs) -> CliResult<()> {
    let l = load(&a.graph)?;
    let cfg = RunConfig::new("transform", a.solver.seed)
        .with_graph(&a.graph, &l.input_text, l.cells_text.as_deref())
        .with_solver(&a.solver);
    let r = run_pipeline(&l.net, &l.part, &a.solver.pipeline_config())?;
    let files = transform_files(&cfg.meta(), &l, &r)?;
    emit(a.graph.out.as_ref(), &files)
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

fn cmd_stability(a: &StabilityArgs, chain: bool) -> CliResult<()> {
    if chain && a.graph.out.is_none() {
        return Err(CliError::Usage("pipeline writes several files and needs --out".into()));
    }
    positive("t-end", a.t_end)?;
    positive("dt", a.dt)?;
    let dyn_params = parse_kv(&a.dyn_param)?;
    let dyn_ = preset(&a.dynamics, &dyn_params)?;
    let l = load(&a.graph)?;
    let mut cfg = RunConfig::new(if chain { "pipeline" } else { "stability" }, a.solver.seed)
        .with_graph(&a.graph, &l.input_text, l.cells_text.as_deref())
        .with_solver(&a.solver);
    cfg.dynamics = Some(a.dynamics.clone());
    cfg.dyn_params = dyn_params;
    cfg.t_end = Some(a.t_end);
    cfg.dt = Some(a.dt);
    cfg.x0 = a.x0.clone();
    cfg.qr_every = Some(a.qr_every);
    cfg.transient = Some(a.transient);
    let meta = cfg.meta();

    let r = run_pipeline(&l.net, &l.part, &a.solver.pipeline_config())?;
    let (m, c) = (dyn_.dim(), l.part.n_cells());
    let x0: Vec<f64> = match a.x0.len() {
        0 => (0..c).flat_map(|k| (0..m).map(move |i| 1.0 + 0.1 * k as f64 + 0.01 * i as f64)).collect(),
        n if n == m => a.x0.repeat(c),
        n if n == m * c => a.x0.clone(),
        n => return Err(CliError::Usage(format!("--x0 has {n} values, expected {m} or {}", m * c))),
    };
    let traj = quotient_integrate(&r.ind, dyn_.as_ref(), &x0, a.t_end, a.dt)?;
    let opts = LyapunovOptions { qr_every: a.qr_every, transient_frac: a.transient };
    let ex = all_exponents(&r.ct, &r.ind, dyn_.as_ref(), &traj, opts)?;
    let csv = format!("{}# dynamics={}\n{}", meta.comment(), dyn_.name(), exponents_csv(&ex));
    if chain {
        let mut files = vec![("exponents.csv", csv), ("partition.json", partition_json(&meta, &l)?)];
        files.extend(transform_files(&meta, &l, &r)?);
        emit(a.graph.out.as_ref(), &files)
    } else {
        emit(a.graph.out.as_ref(), &[("exponents.csv", csv)])
    }
}

#[derive(Serialize)]
struct SensitivityOut {
    #[serde(flatten)]
    report: sbd_core::sensitivity::SensitivityReport,
    /// Parameter labels as given, in the order of `params`.
    edges: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rotated_counts: Option<Vec<usize>>,
    block_sizes: Vec<usize>,
}

fn parse_params(items: &[String], base: usize) -> CliResult<Vec<EdgeParam>> {
    items
        .iter()
        .map(|s| {
            let (name, rest) = s.split_once(':').unwrap_or((s, ""));
            let addable = name.ends_with('+');
            let text = format!("{}:{rest}", name.trim_end_matches('+'));
            let mut p = EdgeParam::parse(&text, base)?;
            p.addable = addable;
            Ok(p)
        })
        .collect()
}

fn cmd_sensitivity(a: &SensitivityArgs) -> CliResult<()> {
    positive("sens-tol", a.sens_tol)?;
    let l = load(&a.graph)?;
    let params = parse_params(&a.params, a.graph.base as usize)?;
    let mut cfg = RunConfig::new("sensitivity", a.solver.seed)
        .with_graph(&a.graph, &l.input_text, l.cells_text.as_deref())
        .with_solver(&a.solver);
    cfg.sens_tol = Some(a.sens_tol);
    cfg.params = a.params.clone();
    let r = run_pipeline(&l.net, &l.part, &a.solver.pipeline_config())?;
    let report = sensitivity(&l.net, &l.part, &r.ct, &params, a.sens_tol)?;
    let rotated_counts = if a.rotation_check {
        Some(rotated_entry_counts(&l.net, &l.part, &r.ct, &params, a.sens_tol, a.solver.seed)?)
    } else {
        None
    };
    let labels = l.net.labels();
    let out = SensitivityOut {
        report,
        edges: params.iter().map(|p| (labels[p.i].clone(), labels[p.j].clone())).collect(),
        rotated_counts,
        block_sizes: r.ct.block_sizes(),
    };
    emit(a.graph.out.as_ref(), &[("sensitivity.json", with_meta(&cfg.meta(), out)?)])
}

fn cmd_bench(a: &BenchArgs) -> CliResult<()> {
    let mut cfg = RunConfig::new("bench", a.seed);
    cfg.base = a.base;
    cfg.weighted = !a.unweighted;
    cfg.sizes = a.sizes.clone();
    cfg.instances = a.instances.clone();
    cfg.repeats = Some(a.repeats);
    if a.repeats < 3 {
        return Err(CliError::Usage(format!("--repeats must be at least 3, got {}", a.repeats)));
    }
    let mut instances = desk_instances(&a.sizes, a.seed)?;
    for spec in &a.instances {
        let (file, cells) = match spec.rsplit_once(':') {
            Some((f, c)) if !f.is_empty() && !c.is_empty() => (f, Some(c)),
            _ => (spec.as_str(), None),
        };
        let g = GraphArgs {
            input: file.into(),
            base: a.base,
            unweighted: a.unweighted,
            cells: cells.map(PathBuf::from),
            out: None,
        };
        let l = load(&g)?;
        let name = Path::new(file).file_stem().map_or(file.to_string(), |s| s.to_string_lossy().into_owned());
        instances.push(BenchInstance { name, net: l.net, part: l.part });
    }
    let records = run_bench(&instances, a.repeats, a.seed)?;
    let machine = format!(
        "# machine os={} arch={} threads={}\n",
        std::env::consts::OS,
        std::env::consts::ARCH,
        std::thread::available_parallelism().map_or(1, |n| n.get())
    );
    let mut notes = String::new();
    for r in &records {
        if let Some(e) = &r.error {
            notes.push_str(&format!("# {}: {}\n", r.name, e));
        }
    }
    let csv = format!("{}{machine}{notes}{}", cfg.meta().comment(), bench_csv(&records));
    emit(a.out.as_ref(), &[("bench.csv", csv)])
}
