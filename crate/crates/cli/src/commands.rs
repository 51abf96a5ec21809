use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use gmbclust::sampler::{self, Trace};
use gmbclust::simulate::generate_scenario;
use gmbclust::summaries::{minvi_point_estimate, ppi, write_file, Partition};
use gmbclust::{CategoricalDataset, SimilarityMatrix, UndirectedGraph};
use serde_json::json;

use crate::config::{ConfigError, FitConfig, SimulateConfig, SummarizeConfig};

fn output_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["subject", "cluster"])?;
    for (i, l) in labels.iter().enumerate() {
        w.write_record([i.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn induced(graph: &UndirectedGraph, keep: usize) -> Result<UndirectedGraph> {
    let edges: Vec<(usize, usize)> = graph
        .edges()
        .into_iter()
        .filter(|&(u, v)| u < keep && v < keep)
        .collect();
    Ok(UndirectedGraph::from_edges(keep, &edges)?)
}

pub fn simulate(cfg: &SimulateConfig) -> Result<()> {
    let spec = cfg.scenario()?;
    let (mut dataset, mut truth) = generate_scenario(&spec)?;
    if let Some(k) = cfg.keep_first {
        let cols: Vec<usize> = (0..k).collect();
        dataset = dataset.select_columns(&cols)?;
        truth.graphs = truth
            .graphs
            .iter()
            .map(|g| induced(g, k))
            .collect::<Result<_>>()?;
        truth.thresholds.truncate(k);
    }
    output_dir(&cfg.output_dir)?;
    dataset.write_csv(cfg.output_dir.join("dataset.csv"))?;
    write_labels(&cfg.output_dir.join("truth.csv"), &truth.labels)?;
    fs::write(cfg.output_dir.join("graphs.json"), truth.graphs_json()? + "\n")?;
    log::info!(
        "simulated n = {}, q = {} into {}",
        dataset.n(),
        dataset.q(),
        cfg.output_dir.display()
    );
    Ok(())
}

pub fn trace_name(chain: usize) -> String {
    format!("trace_{chain}.jsonl")
}

pub fn fit(cfg: &FitConfig) -> Result<()> {
    let samplers = (0..cfg.chains.max(1))
        .map(|c| cfg.sampler(c))
        .collect::<Result<Vec<_>>>()?;
    let dataset = CategoricalDataset::load_csv(&cfg.input, cfg.missing_token.as_deref())
        .with_context(|| format!("loading {}", cfg.input.display()))?;
    output_dir(&cfg.output_dir)?;
    log::info!(
        "fitting n = {}, q = {} with {} chain(s)",
        dataset.n(),
        dataset.q(),
        samplers.len()
    );

    let results: Vec<(gmbclust::Result<Trace>, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = samplers
            .iter()
            .map(|sc| {
                let dataset = &dataset;
                s.spawn(move || {
                    let start = Instant::now();
                    let trace = sampler::run(dataset, sc);
                    (trace, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampler thread panicked"))
            .collect()
    });

    let mut chains = Vec::new();
    for (c, (trace, secs)) in results.into_iter().enumerate() {
        let trace = trace.with_context(|| format!("chain {c}"))?;
        let name = trace_name(c);
        trace.write_path(cfg.output_dir.join(&name))?;
        chains.push(json!({
            "chain": c,
            "seed": trace.meta.seed,
            "trace": name,
            "draws": trace.draws.len(),
            "graph_moves_proposed": trace.meta.graph_moves.proposed,
            "graph_moves_accepted": trace.meta.graph_moves.accepted,
            "acceptance_rate": trace.meta.acceptance_rate,
            "wall_time_secs": secs,
        }));
    }
    let meta = json!({
        "n": dataset.n(),
        "q": dataset.q(),
        "variables": dataset.names(),
        "levels": (0..dataset.q()).map(|j| dataset.labels(j)).collect::<Vec<_>>(),
        "chains": chains,
        "config": cfg,
    });
    fs::write(
        cfg.output_dir.join("fit_meta.json"),
        serde_json::to_string_pretty(&meta)? + "\n",
    )?;
    Ok(())
}

/// Group labels from the last column of a CSV with a header, so both a
/// single-column file and `subject,cluster` files are accepted.
fn read_group_labels(path: &Path, n: usize) -> Result<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path)
        .with_context(|| format!("reading labels {}", path.display()))?;
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        labels.push(
            rec.iter()
                .last()
                .ok_or_else(|| anyhow!("empty record in {}", path.display()))?
                .to_owned(),
        );
    }
    if labels.len() != n {
        return Err(gmbclust::Error::Validation(format!(
            "{} has {} labels, traces cover n = {n}",
            path.display(),
            labels.len()
        ))
        .into());
    }
    Ok(labels)
}

/// For every known group, the share of its members in each estimated cluster.
fn write_support(path: &Path, groups: &[String], partition: &Partition) -> Result<()> {
    let mut counts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (g, &l) in groups.iter().zip(partition.labels()) {
        counts.entry(g).or_insert_with(|| vec![0; partition.k()])[l - 1] += 1;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["group", "cluster", "count", "proportion"])?;
    for (g, row) in counts {
        let total: usize = row.iter().sum();
        for (k, c) in row.iter().enumerate() {
            w.write_record([
                g.to_owned(),
                (k + 1).to_string(),
                c.to_string(),
                (*c as f64 / total as f64).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn summarize(cfg: &SummarizeConfig) -> Result<()> {
    if cfg.traces.is_empty() {
        return Err(ConfigError("traces must list at least one trace file".into()).into());
    }
    let traces = cfg
        .traces
        .iter()
        .map(|p| Trace::read_path(p).with_context(|| format!("reading trace {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let merged = Trace::merge(&traces)?;
    let sim = SimilarityMatrix::from_trace(&merged)?;
    let partition = minvi_point_estimate(&merged, &sim)?;
    let subjects = match &cfg.subjects {
        Some(s) => s.clone(),
        None => partition.blocks().iter().map(|b| b[0]).collect(),
    };
    // Compute everything fallible before writing, so bad subjects leave no partial output.
    let ppis = subjects
        .iter()
        .map(|&s| ppi(&merged, s).map(|p| (s, p)))
        .collect::<gmbclust::Result<Vec<_>>>()?;
    let groups = cfg
        .labels
        .as_ref()
        .map(|p| read_group_labels(p, merged.n()))
        .transpose()?;

    let out = &cfg.output_dir;
    output_dir(out)?;
    write_file(out.join("similarity.csv"), |w| sim.write_csv(w))?;
    write_labels(&out.join("partition.csv"), partition.labels())?;
    for (s, p) in &ppis {
        write_file(out.join(format!("ppi_{s}.csv")), |w| p.write_csv(w, None))?;
    }
    write_file(out.join("alpha_posterior.csv"), |w| {
        writeln!(w, "draw,iter,K,alpha")?;
        for (i, d) in merged.draws.iter().enumerate() {
            writeln!(w, "{i},{},{},{}", d.iter, d.k, d.alpha)?;
        }
        Ok(())
    })?;
    if cfg.heatmap {
        write_file(out.join("similarity.pgm"), |w| {
            sim.write_pgm(w, &partition.heatmap_order())
        })?;
    }
    if let Some(groups) = groups {
        write_support(&out.join("support.csv"), &groups, &partition)?;
    }
    log::info!(
        "{} draws from {} trace(s): point estimate has {} clusters",
        merged.draws.len(),
        traces.len(),
        partition.k()
    );
    Ok(())
}
